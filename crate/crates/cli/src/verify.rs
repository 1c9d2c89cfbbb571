//! `verify`: exhaustive decoding, span oracle and closed-form checks.

use hiercache::analytics::composite;
use hiercache::baselines::kwc_rates;
use hiercache::exact::q;
use hiercache::hier::simulate;
use hiercache::verify::{decode_totality, oracle_check, region_checks, total_chunks, Check};
use hiercache::{FilePartition, HierConfig, Library};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::exit::{CliError, CliResult, FAILED};
use crate::settings::Settings;

/// Largest configuration (in chunks) the oracle instances use.
const ORACLE_CHUNKS: u64 = 64;
const ORACLE_INSTANCES: usize = 240;

pub fn run(s: &Settings) -> CliResult<()> {
    let max_k = s.usize("max-k")?.unwrap_or(6);
    let max_n = s.usize("max-n")?.unwrap_or(3);
    let seed = s.seed()?;
    eprintln!("seed: {seed}");
    let checks = vec![totality(max_k, max_n, seed)?, oracle(max_k, seed)?, kwc_identity(max_k)]
        .into_iter()
        .chain(region_checks(10, 12, 20)?)
        .collect::<Vec<_>>();
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(CliError::new(FAILED, format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn configs(max_k: usize, max_n: usize, alphas: &[hiercache::Q]) -> Vec<HierConfig> {
    let mut out = Vec::new();
    for k1 in 1..=max_k {
        for k2 in 1..=max_k / k1 {
            let k = k1 * k2;
            for n in 1..=k.min(max_n) {
                for t in 1..=k {
                    for a in alphas {
                        if let Ok(cfg) = HierConfig::new(k1, k2, n, t, a.clone()) {
                            out.push(cfg);
                        }
                    }
                }
            }
        }
    }
    out
}

fn totality(max_k: usize, max_n: usize, seed: u64) -> CliResult<Check> {
    let cfgs = configs(max_k, max_n, &[q(0, 1), q(1, 3), q(1, 2), q(1, 1)]);
    let reports = cfgs
        .par_iter()
        .map(|cfg| decode_totality(cfg, FilePartition::smallest_file_bytes(cfg), seed))
        .collect::<hiercache::Result<Vec<_>>>()?;
    let instances: usize = reports.iter().map(|r| r.instances).sum();
    let failures: Vec<&String> = reports.iter().flat_map(|r| &r.failures).collect();
    let mut detail = format!("{} configurations, {instances} demand vectors, {} failures", cfgs.len(), failures.len());
    if let Some(first) = failures.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    Ok(Check::new("decode totality", failures.is_empty() && instances > 0, detail))
}

fn oracle(max_k: usize, seed: u64) -> CliResult<Check> {
    let eligible: Vec<HierConfig> = configs(max_k, max_k, &[q(0, 1), q(1, 2), q(1, 1)])
        .into_iter()
        .filter(|c| total_chunks(c).is_some_and(|n| n <= ORACLE_CHUNKS))
        .collect();
    if eligible.is_empty() {
        return Ok(Check::new("span oracle", false, "no eligible configurations"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(&HierConfig, Vec<usize>, u64)> = (0..ORACLE_INSTANCES)
        .map(|i| {
            let cfg = &eligible[i % eligible.len()];
            let d = loop {
                let d: Vec<usize> = (0..cfg.k()).map(|_| rng.gen_range(0..cfg.n_files)).collect();
                if !cfg.has_layer1() || (0..cfg.n_files).all(|f| d.contains(&f)) {
                    break d;
                }
            };
            (cfg, d, rng.gen())
        })
        .collect();
    let failures: Vec<String> = jobs
        .par_iter()
        .filter_map(|(cfg, d, file_seed)| {
            let f = FilePartition::smallest_file_bytes(cfg);
            let outcome = FilePartition::new(cfg, f).map_err(|e| e.to_string()).and_then(|part| {
                let lib = Library::random(cfg.n_files, f, *file_seed);
                let sim = simulate(cfg, &lib, &part, d).map_err(|e| e.to_string())?;
                oracle_check(cfg, &part, &sim)
            });
            outcome.err().map(|e| format!("{cfg} demands {d:?}: {e}"))
        })
        .collect();
    let detail = format!("{} instances, {} disagreements", jobs.len(), failures.len());
    Ok(Check::new("span oracle", failures.is_empty(), detail))
}

fn kwc_identity(max_k: usize) -> Check {
    let mut bad = Vec::new();
    let mut count = 0;
    for k1 in 2..=max_k {
        for k2 in 2..=max_k / k1 {
            for t in k2 + 1..k1 * k2 {
                count += 1;
                let matches = HierConfig::new(k1, k2, k2, t, q(0, 1)).ok().zip(kwc_rates(k1, k2, t).ok()).is_some_and(
                    |(cfg, kwc)| {
                        let p = composite(&cfg);
                        let n = q(k2 as i64, 1);
                        p.r1 == kwc.r1 && p.r2 == kwc.r2 && p.m1 / &n == kwc.m1_over_n && p.m2 / &n == kwc.m2_over_n
                    },
                );
                if !matches {
                    bad.push(format!("({k1},{k2},t={t})"));
                }
            }
        }
    }
    Check::new("alpha = 0 equals KWC", bad.is_empty(), format!("{count} points, mismatches: {bad:?}"))
}
