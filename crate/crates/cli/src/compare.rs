//! `compare`: all schemes at one global memory.

use hiercache::analytics::{alpha_for_global_memory, composite, RatePoint};
use hiercache::baselines::{
    default_beta_floor, knmd_optimal_tuple, wwcy_best, zwxwl_envelope, zwxwll_best, MemPoint, TupleEval,
};
use hiercache::exact::fmt_ratio;
use hiercache::{HierConfig, Q};

use crate::exit::{CliError, CliResult};
use crate::output::{emit_csv, table, NumFmt};
use crate::settings::Settings;

/// The proposed point at `m_bar`: pinned `t`, or the reachable `t` with the
/// smallest composite rate (ties to the smaller `t`).
fn proposed(k1: usize, k2: usize, n: usize, t: Option<usize>, m_bar: &Q) -> CliResult<RatePoint> {
    let candidates: Vec<usize> = match t {
        Some(t) => vec![t],
        None => (1..=k1 * k2).collect(),
    };
    let mut best: Option<RatePoint> = None;
    let mut last_err = None;
    for t in candidates {
        let point = alpha_for_global_memory(k1, k2, n, t, m_bar)
            .and_then(|alpha| HierConfig::new(k1, k2, n, t, alpha))
            .map(|cfg| composite(&cfg));
        match point {
            Ok(p) if best.as_ref().is_none_or(|b| p.r_bar < b.r_bar) => best = Some(p),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| {
        let why = last_err.map(|e| e.to_string()).unwrap_or_default();
        CliError::config(format!("Mbar={} is not reachable by the proposed scheme: {why}", fmt_ratio(m_bar)))
    })
}

fn tuple_note(e: &TupleEval) -> String {
    let mut note =
        format!("tuple {} (alpha'={}, beta={})", e.label, fmt_ratio(&e.split.alpha), fmt_ratio(&e.split.beta));
    if e.beta_substituted {
        note.push_str(", beta floor used");
    }
    note
}

pub fn run(s: &Settings) -> CliResult<()> {
    let (k1, k2, n) = (s.require_usize("k1")?, s.require_usize("k2")?, s.require_usize("n")?);
    let m_bar = s.require_rational("mbar")?;
    let beta_floor = s.rational("beta-floor")?.unwrap_or_else(default_beta_floor);
    let rational = s.flag("rational")?;
    let prop = proposed(k1, k2, n, s.usize("t")?, &m_bar)?;
    let mem = MemPoint::new(k1, k2, n, prop.m1.clone(), prop.m2.clone())?;

    let mut results: Vec<(String, Result<RatePoint, String>, String)> = Vec::new();
    let mut push = |name: &str, r: hiercache::Result<(RatePoint, String)>| match r {
        Ok((p, note)) => results.push((name.into(), Ok(p), note)),
        Err(e) => results.push((name.into(), Err(e.to_string()), String::new())),
    };
    push(
        "KNMD",
        knmd_optimal_tuple(&mem, &beta_floor).map(|(e, region)| {
            (mem.into_rate_point("KNMD", e.r1.clone(), e.r2.clone()), format!("{region}, {}", tuple_note(&e)))
        }),
    );
    push("ZWXWL", zwxwl_envelope(k1, k2, n, &m_bar).map(|p| (p, "memory sharing of grid points".into())));
    push(
        "ZWXWLL",
        zwxwll_best(&mem, &beta_floor)
            .map(|e| (mem.into_rate_point("ZWXWLL", e.r1.clone(), e.r2.clone()), tuple_note(&e))),
    );
    push(
        "WWCY",
        wwcy_best(&mem, &beta_floor).map(|e| (mem.into_rate_point("WWCY", e.r1.clone(), e.r2.clone()), tuple_note(&e))),
    );
    let note = format!("t={}, alpha={}", prop.t.unwrap_or(0), fmt_ratio(prop.alpha.as_ref().unwrap_or(&Q::default())));
    results.push(("proposed".into(), Ok(prop), note));

    let f = NumFmt::text(rational);
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|(name, r, note)| match r {
            Ok(p) => vec![
                name.clone(),
                f.num(&p.m1),
                f.num(&p.m2),
                f.num(&p.m_bar),
                f.num(&p.r1),
                f.num(&p.r2),
                f.num(&p.r_bar),
                note.clone(),
            ],
            Err(e) => {
                let mut row = vec![name.clone()];
                row.extend(std::iter::repeat_n("n/a".to_string(), 6));
                row.push(e.clone());
                row
            }
        })
        .collect();
    print!("{}", table(&["scheme", "M1", "M2", "Mbar", "R1", "R2", "Rbar", "note"], &rows));
    if let Some(path) = s.out() {
        let points: Vec<RatePoint> = results.into_iter().filter_map(|(_, r, _)| r.ok()).collect();
        emit_csv(Some(&path), &points, rational)?;
    }
    Ok(())
}
