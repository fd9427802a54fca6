//! Optional `key = value` defaults file. Keys are long flag names; command
//! line flags always win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse(&text)
}

/// The `--config` path, located before full parsing so that the file can
/// supply required flags.
pub fn find_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().map(|a| a.to_string_lossy());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(|p| PathBuf::from(p.as_ref()));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Appends `--key value` for every config entry whose flag is absent from
/// `args`. The subcommand must already be in `args`.
pub fn merge(mut args: Vec<OsString>, defaults: &BTreeMap<String, String>) -> Vec<OsString> {
    for (key, value) in defaults {
        let flag = format!("--{key}");
        let present = args.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&format!("{flag}="))
        });
        if !present {
            args.push(flag.into());
            args.push(value.into());
        }
    }
    args
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_underscores() {
        let m = parse("# defaults\nseed = 7\nq_from=0.9 # lower end\n\n").unwrap();
        assert_eq!(m["seed"], "7");
        assert_eq!(m["q-from"], "0.9");
        assert!(parse("seed 7").is_err());
    }

    #[test]
    fn flags_override_config() {
        let args: Vec<OsString> = ["mbhash", "simulate", "--seed=3"].iter().map(Into::into).collect();
        let defaults = parse("seed = 9\ntrials = 5").unwrap();
        let merged = merge(args, &defaults);
        let merged: Vec<String> = merged.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(merged, ["mbhash", "simulate", "--seed=3", "--trials", "5"]);
    }
}
