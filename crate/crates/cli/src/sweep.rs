//! `sweep`: closed-form rate points over a grid of configurations.

use hiercache::analytics::{composite, RatePoint};
use hiercache::baselines::{
    knmd_optimal_tuple, kwc_point, lzx_rates, wwcy_best, zwxwl_grid, zwxwll_best, MemPoint, Scheme,
};
use hiercache::verify::alpha_grid;
use hiercache::{HierConfig, Q};
use rayon::prelude::*;

use crate::exit::{CliError, CliResult};
use crate::output::emit_csv;
use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Proposed,
    Baseline(Scheme),
}

fn parse_schemes(text: &str) -> CliResult<Vec<Kind>> {
    text.split(',')
        .map(str::trim)
        .map(|s| {
            if s.eq_ignore_ascii_case("proposed") {
                Ok(Kind::Proposed)
            } else {
                s.parse().map(Kind::Baseline).map_err(|e: hiercache::Error| CliError::config(format!("--schemes: {e}")))
            }
        })
        .collect()
}

/// One unit of parallel work; results are concatenated in task order.
enum Task {
    Point { k1: usize, k2: usize, n: usize, t: usize, alpha: Q },
    Kwc { k1: usize, k2: usize, n: usize },
    Zwxwl { k1: usize, k2: usize, n: usize },
}

pub fn run(s: &Settings) -> CliResult<()> {
    let k1s = s.usize_list("k1")?.ok_or_else(|| CliError::config("missing --k1"))?;
    let k2s = s.usize_list("k2")?.ok_or_else(|| CliError::config("missing --k2"))?;
    let ns = s.usize_list("n")?.ok_or_else(|| CliError::config("missing --n"))?;
    let ts = s.usize_list("t")?;
    let alphas = match s.rational_list("alpha")? {
        Some(a) => a,
        None => {
            let steps = s.usize("alpha-steps")?.unwrap_or(10);
            if steps == 0 {
                return Err(CliError::config("--alpha-steps must be positive"));
            }
            alpha_grid(steps as i64)
        }
    };
    let kinds = parse_schemes(s.raw("schemes").unwrap_or("proposed"))?;
    let beta_floor = s.rational("beta-floor")?.unwrap_or_else(hiercache::baselines::default_beta_floor);

    let mut tasks = Vec::new();
    for &k1 in &k1s {
        for &k2 in &k2s {
            for &n in &ns {
                let k = k1 * k2;
                if kinds.contains(&Kind::Baseline(Scheme::Kwc)) {
                    tasks.push(Task::Kwc { k1, k2, n });
                }
                if kinds.contains(&Kind::Baseline(Scheme::Zwxwl)) {
                    tasks.push(Task::Zwxwl { k1, k2, n });
                }
                let t_values = ts.clone().unwrap_or_else(|| (1..=k).collect());
                for &t in t_values.iter().filter(|&&t| (1..=k).contains(&t)) {
                    for alpha in &alphas {
                        if n > k && *alpha != Q::from_integer(0.into()) {
                            continue;
                        }
                        tasks.push(Task::Point { k1, k2, n, t, alpha: alpha.clone() });
                    }
                }
            }
        }
    }

    let chunks: Vec<CliResult<Vec<RatePoint>>> =
        tasks.par_iter().map(|task| evaluate(task, &kinds, &beta_floor)).collect();
    let mut rows = Vec::new();
    for c in chunks {
        rows.extend(c?);
    }
    emit_csv(s.out().as_deref(), &rows, s.flag("rational")?)
}

fn evaluate(task: &Task, kinds: &[Kind], beta_floor: &Q) -> CliResult<Vec<RatePoint>> {
    match task {
        Task::Kwc { k1, k2, n } => Ok((0..=k1 * k2).filter_map(|t| kwc_point(*k1, *k2, *n, t).ok()).collect()),
        Task::Zwxwl { k1, k2, n } => Ok(zwxwl_grid(*k1, *k2, *n)),
        Task::Point { k1, k2, n, t, alpha } => {
            let cfg = HierConfig::new(*k1, *k2, *n, *t, alpha.clone())?;
            let proposed = composite(&cfg);
            let mem = MemPoint::new(*k1, *k2, *n, proposed.m1.clone(), proposed.m2.clone())?;
            let mut out = Vec::new();
            for kind in kinds {
                let rates = match kind {
                    Kind::Proposed => {
                        out.push(proposed.clone());
                        continue;
                    }
                    Kind::Baseline(Scheme::Knmd) => knmd_optimal_tuple(&mem, beta_floor).map(|(e, _)| (e.r1, e.r2)),
                    Kind::Baseline(Scheme::Zwxwll) => zwxwll_best(&mem, beta_floor).map(|e| (e.r1, e.r2)),
                    Kind::Baseline(Scheme::Wwcy) => wwcy_best(&mem, beta_floor).map(|e| (e.r1, e.r2)),
                    Kind::Baseline(Scheme::Lzx) if *k1 == 1 && *k2 == 2 => lzx_rates(*n, &mem.m1, &mem.m2),
                    _ => continue,
                };
                match rates {
                    Ok((r1, r2)) => {
                        let mut p = mem.into_rate_point(kind_name(*kind), r1, r2);
                        p.t = Some(*t);
                        p.alpha = Some(alpha.clone());
                        out.push(p);
                    }
                    Err(e) => eprintln!("skipped {} at {cfg}: {e}", kind_name(*kind)),
                }
            }
            Ok(out)
        }
    }
}

fn kind_name(kind: Kind) -> String {
    match kind {
        Kind::Proposed => "proposed".into(),
        Kind::Baseline(s) => s.to_string(),
    }
}
