//! Flag values merged over an optional `key=value` config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use hiercache::exact::parse_q;
use hiercache::Q;

use crate::exit::{CliError, CliResult};

/// Keys accepted in a config file; each matches a long flag name.
const KEYS: &[&str] = &[
    "k1",
    "k2",
    "n",
    "t",
    "alpha",
    "m1",
    "file-bytes",
    "demands",
    "seed",
    "out",
    "single-mirror",
    "beta-floor",
    "rational",
    "mbar",
    "schemes",
    "alpha-steps",
    "max-k",
    "max-n",
];

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Number of mirrors
    #[arg(long, global = true)]
    pub k1: Option<String>,
    /// Users per mirror
    #[arg(long, global = true)]
    pub k2: Option<String>,
    /// Number of files
    #[arg(long, global = true)]
    pub n: Option<String>,
    /// Layer-2 parameter t in [1, K]
    #[arg(long, global = true)]
    pub t: Option<String>,
    /// Layer-1 fraction as p/q or a decimal
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// Mirror memory of the single-mirror scheme
    #[arg(long, global = true)]
    pub m1: Option<String>,
    /// File size in bytes (default: smallest admissible)
    #[arg(long = "file-bytes", global = true)]
    pub file_bytes: Option<String>,
    /// Comma-separated demanded files, 1-based
    #[arg(long, global = true)]
    pub demands: Option<String>,
    /// RNG seed for files and random demands
    #[arg(long, global = true, env = "HIERCACHE_SEED")]
    pub seed: Option<String>,
    /// Write CSV to this path
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Use the single-mirror scheme (K1 = 1)
    #[arg(long = "single-mirror", global = true)]
    pub single_mirror: bool,
    /// Substitute for a prescribed beta = 0 (default 1/100)
    #[arg(long = "beta-floor", global = true)]
    pub beta_floor: Option<String>,
    /// Print exact rationals p/q instead of decimals
    #[arg(long, global = true)]
    pub rational: bool,
    /// Global memory K1 M1 + K1 K2 M2 (compare)
    #[arg(long, global = true)]
    pub mbar: Option<String>,
    /// Comma-separated schemes: proposed, knmd, zwxwl, zwxwll, wwcy, kwc, lzx (sweep)
    #[arg(long, global = true)]
    pub schemes: Option<String>,
    /// Number of alpha intervals when --alpha is not given (sweep)
    #[arg(long = "alpha-steps", global = true)]
    pub alpha_steps: Option<String>,
    /// Largest K for the exhaustive decoding run (verify)
    #[arg(long = "max-k", global = true)]
    pub max_k: Option<String>,
    /// Largest N for the exhaustive decoding run (verify)
    #[arg(long = "max-n", global = true)]
    pub max_n: Option<String>,
    /// key=value file supplying defaults for any flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl Common {
    fn pairs(&self) -> Vec<(&'static str, Option<String>)> {
        let flag = |b: bool| b.then(|| "true".to_string());
        vec![
            ("k1", self.k1.clone()),
            ("k2", self.k2.clone()),
            ("n", self.n.clone()),
            ("t", self.t.clone()),
            ("alpha", self.alpha.clone()),
            ("m1", self.m1.clone()),
            ("file-bytes", self.file_bytes.clone()),
            ("demands", self.demands.clone()),
            ("seed", self.seed.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("single-mirror", flag(self.single_mirror)),
            ("beta-floor", self.beta_floor.clone()),
            ("rational", flag(self.rational)),
            ("mbar", self.mbar.clone()),
            ("schemes", self.schemes.clone()),
            ("alpha-steps", self.alpha_steps.clone()),
            ("max-k", self.max_k.clone()),
            ("max-n", self.max_n.clone()),
        ]
    }
}

/// Resolved settings: flags first, then config-file values.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::config(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    pub fn resolve(common: &Common) -> CliResult<Self> {
        let mut values = match &common.config {
            Some(path) => parse_config(&read(path)?)?,
            None => BTreeMap::new(),
        };
        for (k, v) in common.pairs() {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        Ok(Settings { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn usize(&self, key: &str) -> CliResult<Option<usize>> {
        self.raw(key)
            .map(|v| {
                v.trim().parse().map_err(|_| CliError::config(format!("--{key}: not a non-negative integer: {v:?}")))
            })
            .transpose()
    }

    pub fn require_usize(&self, key: &str) -> CliResult<usize> {
        self.usize(key)?.ok_or_else(|| CliError::config(format!("--{key} is required")))
    }

    pub fn rational(&self, key: &str) -> CliResult<Option<Q>> {
        self.raw(key).map(|v| parse_q(v).map_err(|e| CliError::config(format!("--{key}: {e}")))).transpose()
    }

    pub fn require_rational(&self, key: &str) -> CliResult<Q> {
        self.rational(key)?.ok_or_else(|| CliError::config(format!("--{key} is required")))
    }

    pub fn flag(&self, key: &str) -> CliResult<bool> {
        match self.raw(key).map(|v| v.trim().to_ascii_lowercase()) {
            None => Ok(false),
            Some(v) if ["true", "1", "yes", "on"].contains(&v.as_str()) => Ok(true),
            Some(v) if ["false", "0", "no", "off"].contains(&v.as_str()) => Ok(false),
            Some(v) => Err(CliError::config(format!("--{key}: not a boolean: {v:?}"))),
        }
    }

    /// Integer list such as `3`, `1,2,5` or `2..4` (inclusive).
    pub fn usize_list(&self, key: &str) -> CliResult<Option<Vec<usize>>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let bad = || CliError::config(format!("--{key}: expected integers or ranges like 2..4, got {v:?}"));
        let mut out = Vec::new();
        for part in v.split(',').map(str::trim) {
            match part.split_once("..") {
                Some((lo, hi)) => {
                    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                    let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
                    if lo > hi {
                        return Err(bad());
                    }
                    out.extend(lo..=hi);
                }
                None => out.push(part.parse().map_err(|_| bad())?),
            }
        }
        Ok(Some(out))
    }

    pub fn rational_list(&self, key: &str) -> CliResult<Option<Vec<Q>>> {
        self.raw(key)
            .map(|v| v.split(',').map(|p| parse_q(p).map_err(|e| CliError::config(format!("--{key}: {e}")))).collect())
            .transpose()
    }

    pub fn seed(&self) -> CliResult<u64> {
        match self.raw("seed") {
            None => Ok(0),
            Some(v) => v.trim().parse().map_err(|_| CliError::config(format!("--seed: not a 64-bit integer: {v:?}"))),
        }
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.raw("out").map(PathBuf::from)
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_flag_precedence() {
        let file = parse_config("# comment\nk1 = 3\nk2=2\nbeta_floor = 1/50 # inline\n\n").unwrap();
        assert_eq!(file.get("beta-floor").map(String::as_str), Some("1/50"));
        assert!(parse_config("bogus=1").is_err());
        assert!(parse_config("k1").is_err());

        let dir = std::env::temp_dir().join(format!("hiercache-settings-{}", std::process::id()));
        std::fs::write(&dir, "k1=3\nk2=2\nn=6\n").unwrap();
        let common =
            Common { config: Some(dir.clone()), n: Some("3".into()), mbar: Some("7.2".into()), ..Common::default() };
        let s = Settings::resolve(&common).unwrap();
        std::fs::remove_file(&dir).unwrap();
        assert_eq!(s.require_usize("k1").unwrap(), 3);
        assert_eq!(s.require_usize("n").unwrap(), 3);
        assert_eq!(s.require_rational("mbar").unwrap(), hiercache::exact::q(36, 5));
        assert!(s.require_usize("t").is_err());
    }

    #[test]
    fn lists() {
        let common = Common { k1: Some("1,3..5".into()), alpha: Some("0, 1/2,1".into()), ..Common::default() };
        let s = Settings::resolve(&common).unwrap();
        assert_eq!(s.usize_list("k1").unwrap(), Some(vec![1, 3, 4, 5]));
        assert_eq!(s.rational_list("alpha").unwrap().unwrap().len(), 3);
        let common = Common { k1: Some("5..2".into()), ..Common::default() };
        assert!(Settings::resolve(&common).unwrap().usize_list("k1").is_err());
    }
}
