//! Monte Carlo execution of hashing purification.
//!
//! Bell-diagonal states stay Bell-diagonal under bilateral CNOTs, so the
//! production path tracks two label bits per pair. The full two-party
//! stabilizer simulation in [`oracle`] validates it on small instances.

use thiserror::Error;

use crate::noise::NoiseError;
use crate::resource::ResourceError;
use crate::tableau::TableauError;

pub mod checks;
pub mod decode;
pub mod ensemble;
pub mod oracle;
pub mod run;

pub use checks::{simulate_bilateral, ParityChecks};
pub use decode::{decode_ml, decode_success, genie_decodes, Decoded, DecoderConfig};
pub use ensemble::{safe_output_count, sample_ensemble, BellDiagonalEnsemble, BellDistribution, BellLabel};
pub use run::{
    decodable_output_count, run_gate_based, run_measurement_based, run_trial, run_trials, Execution, Protocol,
    PurificationOutcome, TrialConfig, TrialSummary,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid Bell-diagonal distribution {0:?}")]
    InvalidDistribution([f64; 4]),
    #[error("entropy {entropy} leaves no distillable output at margin {delta}")]
    NotDistillable { entropy: f64, delta: f64 },
    #[error("need at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("expected {expected} pairs, got {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("transcript has {found} bits, plan has {expected} rounds")]
    TranscriptLength { expected: usize, found: usize },
    #[error("exhaustive decoding is limited to small ensembles, got {0} pairs")]
    TooLargeForExhaustive(usize),
    #[error("large-ensemble decoding needs a Werner prior")]
    NotWerner,
    #[error("output pair is not in a Bell state")]
    NotBellDiagonal,
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error(transparent)]
    Tableau(#[from] TableauError),
}
