//! Closed-form entropies, yields and noise thresholds.
//!
//! Cluster-state yields use the translation-invariant form
//! `D = 1 − 2·S(a0, a1)` with `a1` from the per-vertex error polynomials in
//! `p̃ = (3q+1)/4`. All thresholds come from bisection on monotone functions.

use std::fmt;

use thiserror::Error;

use crate::noise::{fidelity_exact, fidelity_paper_product};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("{name} = {value} is outside its domain [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("probabilities must be non-negative and sum to 1 (sum = {sum})")]
    NotNormalized { sum: f64 },
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64, AnalyticsError> {
    if value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(AnalyticsError::OutOfRange { name, value, lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Bell,
    Cluster1d,
    Cluster2d,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Bell, Target::Cluster1d, Target::Cluster2d];

    pub fn name(self) -> &'static str {
        match self {
            Target::Bell => "bell",
            Target::Cluster1d => "cluster1d",
            Target::Cluster2d => "cluster2d",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown target {s:?} (expected bell, cluster1d or cluster2d)"))
    }
}

/// How a per-particle LDN parameter `q` maps to a Bell-pair fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Convention {
    /// `F = ((3q+1)/4)²`
    PaperProduct,
    /// `F = (3q²+1)/4`
    Exact,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::PaperProduct, Convention::Exact];

    pub fn name(self) -> &'static str {
        match self {
            Convention::PaperProduct => "paper_product",
            Convention::Exact => "exact",
        }
    }

    pub fn fidelity(self, q: f64) -> f64 {
        match self {
            Convention::PaperProduct => fidelity_paper_product(q),
            Convention::Exact => fidelity_exact(q),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Convention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper_product" | "paper-product" => Ok(Convention::PaperProduct),
            "exact" => Ok(Convention::Exact),
            _ => Err(format!("unknown convention {s:?} (expected paper_product or exact)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub target: Target,
    pub convention: Convention,
    pub q_min: f64,
    pub p_min: f64,
    pub tolerable_noise: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterCoefficients {
    pub q: f64,
    pub p_tilde: f64,
    pub a0: f64,
    pub a1: f64,
    pub dimension: Dimension,
}

/// Raw yield may be negative; `clamped` is `max(raw, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Yield {
    pub raw: f64,
    pub clamped: f64,
}

impl Yield {
    fn new(raw: f64) -> Self {
        Self {
            raw,
            clamped: raw.max(0.0),
        }
    }
}

pub const BISECTION_TOL: f64 = 1e-8;
pub const BISECTION_MAX_ITER: usize = 200;

/// Bisection for a root of `f` on `[lo, hi]`; `f(lo)` and `f(hi)` must
/// have opposite signs.
pub fn bisect(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64, AnalyticsError> {
    let (orig_lo, orig_hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(AnalyticsError::NoSignChange {
            lo: orig_lo,
            hi: orig_hi,
        });
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `-a0 log2 a0 - a1 log2 a1` with `0 log 0 = 0`.
pub fn binary_entropy(a0: f64, a1: f64) -> Result<f64, AnalyticsError> {
    if a0 < 0.0 || a1 < 0.0 || (a0 + a1 - 1.0).abs() > 1e-12 {
        return Err(AnalyticsError::NotNormalized { sum: a0 + a1 });
    }
    Ok((-xlog2x(a0) - xlog2x(a1)).clamp(0.0, 1.0))
}

/// Shannon entropy (bits) of a probability vector; the von Neumann entropy
/// of a Bell-diagonal state with these weights.
pub fn shannon_entropy(probs: &[f64]) -> Result<f64, AnalyticsError> {
    let sum: f64 = probs.iter().sum();
    if probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-12 {
        return Err(AnalyticsError::NotNormalized { sum });
    }
    Ok(-probs.iter().map(|&p| xlog2x(p)).sum::<f64>())
}

/// Von Neumann entropy of the Werner state `W(F)`.
pub fn werner_entropy(f: f64) -> Result<f64, AnalyticsError> {
    let f = check_range("F", f, 0.25, 1.0)?;
    let e = (1.0 - f) / 3.0;
    Ok(-xlog2x(f) - 3.0 * xlog2x(e))
}

/// Asymptotic hashing yield `1 − S(W(F))`, possibly negative.
pub fn hashing_yield(f: f64) -> Result<Yield, AnalyticsError> {
    Ok(Yield::new(1.0 - werner_entropy(f)?))
}

/// Smallest Werner fidelity with positive hashing yield.
pub fn f_min_hashing() -> f64 {
    bisect(
        |f| werner_entropy(f).expect("bracket inside domain") - 1.0,
        0.25,
        1.0,
        BISECTION_TOL,
    )
    .expect("entropy crosses 1 on (1/4, 1)")
}

/// Per-particle `q_min` for Bell pairs given a fidelity threshold.
pub fn q_min_bell_from(f_min: f64, convention: Convention) -> f64 {
    match convention {
        Convention::PaperProduct => (4.0 * f_min.sqrt() - 1.0) / 3.0,
        Convention::Exact => ((4.0 * f_min - 1.0) / 3.0).sqrt(),
    }
}

pub fn q_min_bell(convention: Convention) -> f64 {
    q_min_bell_from(f_min_hashing(), convention)
}

/// `p·q > q_min` and `p > q`, both strict.
pub fn feasibility(p: f64, q: f64, q_min: f64) -> Result<bool, AnalyticsError> {
    check_range("p", p, 0.0, 1.0)?;
    check_range("q", q, 0.0, 1.0)?;
    check_range("q_min", q_min, 0.0, 1.0)?;
    Ok(p * q > q_min && p > q)
}

/// `(p_min, tolerable_noise) = (√q_min, 1 − √q_min)`.
pub fn p_min_from_qmin(q_min: f64) -> Result<(f64, f64), AnalyticsError> {
    if !(q_min > 0.0 && q_min <= 1.0) {
        return Err(AnalyticsError::OutOfRange {
            name: "q_min",
            value: q_min,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let p_min = q_min.sqrt();
    Ok((p_min, 1.0 - p_min))
}

pub fn p_tilde(q: f64) -> f64 {
    (3.0 * q + 1.0) / 4.0
}

/// Probability of a Z error on one vertex with the four neighbours of a
/// square-lattice vertex error free: `((1−p̃)/3)·p̃⁴`.
pub fn p_example_2d(q: f64) -> Result<f64, AnalyticsError> {
    let q = check_range("q", q, 0.0, 1.0)?;
    let pt = p_tilde(q);
    Ok((1.0 - pt) / 3.0 * pt.powi(4))
}

/// Per-vertex flip probability `a1` for the 1D cluster state.
pub fn a1_1d(q: f64) -> Result<f64, AnalyticsError> {
    let q = check_range("q", q, 0.0, 1.0)?;
    let pt = p_tilde(q);
    let e = (1.0 - pt) / 3.0;
    Ok(2.0 * e * (pt * pt + 2.0 * pt * e + e * e) + (pt + e) * (4.0 * e * (pt + e)))
}

/// Per-vertex flip probability `a1` for the 2D cluster state.
pub fn a1_2d(q: f64) -> Result<f64, AnalyticsError> {
    let q = check_range("q", q, 0.0, 1.0)?;
    let pt = p_tilde(q);
    let e = (1.0 - pt) / 3.0;
    let (pt2, pt3, pt4) = (pt * pt, pt.powi(3), pt.powi(4));
    let (e2, e3, e4) = (e * e, e.powi(3), e.powi(4));
    let first = 2.0
        * e
        * (pt4
            + 4.0 * pt3 * e
            + 4.0 * pt * e3
            + 6.0 * pt2 * e2
            + e4
            + 24.0 * e2 * (2.0 * e * pt + pt2 + e2)
            + 16.0 * e4);
    let second = (pt + e)
        * (8.0 * e * (3.0 * e * pt2 + 3.0 * e2 * pt + pt3 + e3) + 32.0 * (pt + e) * e3);
    Ok(first + second)
}

pub fn cluster_coefficients(q: f64, dimension: Dimension) -> Result<ClusterCoefficients, AnalyticsError> {
    let a1 = match dimension {
        Dimension::One => a1_1d(q)?,
        Dimension::Two => a1_2d(q)?,
    };
    Ok(ClusterCoefficients {
        q,
        p_tilde: p_tilde(q),
        a0: 1.0 - a1,
        a1,
        dimension,
    })
}

/// `D = 1 − 2·S(a0, a1)` for a translation-invariant cluster state.
pub fn cluster_yield(q: f64, dimension: Dimension) -> Result<Yield, AnalyticsError> {
    let c = cluster_coefficients(q, dimension)?;
    Ok(Yield::new(1.0 - 2.0 * binary_entropy(c.a0, c.a1)?))
}

/// Bell-pair hashing yield as a function of per-particle `q`.
pub fn bell_yield(q: f64, convention: Convention) -> Result<Yield, AnalyticsError> {
    let q = check_range("q", q, 0.0, 1.0)?;
    hashing_yield(convention.fidelity(q))
}

pub fn q_min_cluster(dimension: Dimension) -> Result<f64, AnalyticsError> {
    bisect(
        |q| cluster_yield(q, dimension).map(|y| y.raw).unwrap_or(f64::NAN),
        0.8,
        1.0,
        BISECTION_TOL,
    )
}

/// Threshold report for one target. Cluster targets have a single model
/// (the per-particle `p̃` polynomials) and ignore `convention`.
pub fn threshold_report(target: Target, convention: Convention) -> ThresholdReport {
    let (q_min, convention) = match target {
        Target::Bell => (q_min_bell(convention), convention),
        Target::Cluster1d => (
            q_min_cluster(Dimension::One).expect("bracket has a sign change"),
            Convention::PaperProduct,
        ),
        Target::Cluster2d => (
            q_min_cluster(Dimension::Two).expect("bracket has a sign change"),
            Convention::PaperProduct,
        ),
    };
    let (p_min, tolerable_noise) = p_min_from_qmin(q_min).expect("q_min in (0, 1]");
    ThresholdReport {
        target,
        convention,
        q_min,
        p_min,
        tolerable_noise,
    }
}

/// Bell reports in both conventions followed by the two cluster reports.
pub fn all_threshold_reports() -> Vec<ThresholdReport> {
    vec![
        threshold_report(Target::Bell, Convention::PaperProduct),
        threshold_report(Target::Bell, Convention::Exact),
        threshold_report(Target::Cluster1d, Convention::PaperProduct),
        threshold_report(Target::Cluster2d, Convention::PaperProduct),
    ]
}
