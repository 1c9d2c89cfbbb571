//! `simulate`: one end-to-end run with per-user verdicts.

use hiercache::analytics::{composite, memory_point, rate_r1, rate_r2, RatePoint};
use hiercache::exact::qi;
use hiercache::hier::{
    cache_size, check_reconstruction, measured_rates, mirror_deliver, mirror_reconstruct, place, server_deliver,
    user_decode, Placement, TransmissionLog,
};
use hiercache::single::{decode_single, deliver_single, place_single, SingleMirrorConfig};
use hiercache::{DemandProfile, FilePartition, HierConfig, Library, Q};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::demands;
use crate::exit::{CliError, CliResult, DECODE};
use crate::output::{emit_csv, table, NumFmt};
use crate::settings::Settings;

struct Report {
    verdicts: Vec<(usize, usize, Result<(), String>)>,
    rows: Vec<(String, Q, Q)>,
    measured: RatePoint,
    /// Closed-form worst-case `(R2, Rbar)` over all demand vectors.
    worst: Option<(Q, Q)>,
}

pub fn run(s: &Settings) -> CliResult<()> {
    let seed = s.seed()?;
    let rational = s.flag("rational")?;
    eprintln!("seed: {seed}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report = if s.flag("single-mirror")? { single(s, seed, &mut rng)? } else { hier(s, seed, &mut rng)? };

    let mut failed = 0;
    for (user, file, verdict) in &report.verdicts {
        match verdict {
            Ok(()) => println!("user {} file {}: DECODE OK", user + 1, file + 1),
            Err(e) => {
                failed += 1;
                println!("user {} file {}: DECODE FAIL ({e})", user + 1, file + 1);
            }
        }
    }
    let f = NumFmt::text(rational);
    let rows: Vec<Vec<String>> =
        report.rows.iter().map(|(name, got, want)| vec![name.clone(), f.num(got), f.num(want)]).collect();
    print!("{}", table(&["quantity", "measured", "closed form"], &rows));
    if let Some((r2, r_bar)) = &report.worst {
        println!("worst-case demand, closed form: R2 = {}, Rbar = {}", f.num(r2), f.num(r_bar));
    }
    if let Some(path) = s.out() {
        emit_csv(Some(&path), &[report.measured], rational)?;
    }
    if failed > 0 {
        return Err(CliError::new(DECODE, format!("{failed} of {} users failed to decode", report.verdicts.len())));
    }
    if report.rows.iter().any(|(_, got, want)| got != want) {
        return Err(CliError::new(crate::exit::FAILED, "measured rates differ from the closed forms"));
    }
    Ok(())
}

fn file_bytes(s: &Settings, smallest: usize) -> CliResult<usize> {
    Ok(s.usize("file-bytes")?.unwrap_or(smallest))
}

fn demand_vector(
    s: &Settings,
    rng: &mut ChaCha8Rng,
    users: usize,
    n: usize,
    surjective: bool,
) -> CliResult<Vec<usize>> {
    let d = match s.raw("demands") {
        Some(text) => demands::parse(text, users, n)?,
        None => demands::random(rng, users, n, surjective)?,
    };
    eprintln!("demands: {}", demands::render(&d));
    Ok(d)
}

fn hier(s: &Settings, seed: u64, rng: &mut ChaCha8Rng) -> CliResult<Report> {
    let cfg = HierConfig::new(
        s.require_usize("k1")?,
        s.require_usize("k2")?,
        s.require_usize("n")?,
        s.require_usize("t")?,
        s.rational("alpha")?.unwrap_or_else(|| qi(0)),
    )?;
    let f = file_bytes(s, FilePartition::smallest_file_bytes(&cfg))?;
    let part = FilePartition::new(&cfg, f)?;
    eprintln!("config: {cfg} F={f}");
    let lib = Library::random(cfg.n_files, f, seed);
    let d = demand_vector(s, rng, cfg.k(), cfg.n_files, cfg.has_layer1())?;
    let profile = DemandProfile::new(&cfg, &d)?;

    let placement = place(&cfg, &lib, &part)?;
    let server_msgs = server_deliver(&cfg, &lib, &part, &profile)?;
    let mut mirror_msgs = Vec::with_capacity(cfg.k1);
    let mut mirror_errors = Vec::with_capacity(cfg.k1);
    for m in 0..cfg.k1 {
        let outcome =
            mirror_reconstruct(&cfg, &part, m, &placement.mirror_caches[m], &server_msgs, &profile).and_then(|rec| {
                check_reconstruction(&lib, &part, &rec)?;
                mirror_deliver(&cfg, &part, &rec, &profile)
            });
        match outcome {
            Ok(msgs) => {
                mirror_msgs.push(msgs);
                mirror_errors.push(None);
            }
            Err(e) => {
                eprintln!("mirror {}: RECONSTRUCT FAIL ({e})", m + 1);
                mirror_msgs.push(Vec::new());
                mirror_errors.push(Some(e.to_string()));
            }
        }
    }
    let mut verdicts = Vec::with_capacity(cfg.k());
    for (k, &want) in d.iter().enumerate() {
        let m = cfg.mirror_of_user(k);
        let verdict = match &mirror_errors[m] {
            Some(e) => Err(format!("mirror {} failed: {e}", m + 1)),
            None => user_decode(&cfg, &part, k, &placement.user_caches[k], &mirror_msgs[m], &profile)
                .map_err(|e| e.to_string())
                .and_then(|bytes| if bytes == lib.file(want) { Ok(()) } else { Err("wrong bytes".into()) }),
        };
        verdicts.push((k, want, verdict));
    }

    let log = TransmissionLog { server_msgs, mirror_msgs };
    let rates = measured_rates(&log);
    let (m1, m2) = memory_point(&cfg);
    let closed = composite(&cfg);
    let mut rows = vec![
        ("M1".into(), cache_size(&placement.mirror_caches[0]), m1),
        ("M2".into(), cache_size(&placement.user_caches[0]), m2),
        ("Mbar".into(), global(&placement), closed.m_bar.clone()),
        ("R1".into(), rates.r1.clone(), rate_r1(&cfg)),
    ];
    let mut r2_closed = qi(0);
    for (m, r2) in rates.r2_per_mirror.iter().enumerate() {
        let want = rate_r2(&cfg, profile.per_mirror_count[m])?;
        r2_closed = r2_closed.max(want.clone());
        rows.push((format!("R2 mirror {}", m + 1), r2.clone(), want));
    }
    let k1 = qi(cfg.k1 as i64);
    rows.push(("Rbar".into(), &rates.r1 + &k1 * &rates.r2_worst, &closed.r1 + &k1 * r2_closed));
    let measured = RatePoint::new(
        "simulated",
        (cfg.k1, cfg.k2, cfg.n_files),
        Some(cfg.t),
        Some(cfg.alpha.clone()),
        closed.m1.clone(),
        closed.m2.clone(),
        rates.r1,
        rates.r2_worst,
    );
    Ok(Report { verdicts, rows, measured, worst: Some((closed.r2, closed.r_bar)) })
}

fn single(s: &Settings, seed: u64, rng: &mut ChaCha8Rng) -> CliResult<Report> {
    let k1 = s.usize("k1")?.unwrap_or(1);
    if k1 != 1 {
        return Err(CliError::config("--single-mirror needs K1 = 1"));
    }
    let cfg = SingleMirrorConfig::new(
        s.require_usize("k2")?,
        s.require_usize("n")?,
        s.rational("alpha")?.unwrap_or_else(|| qi(0)),
        s.rational("m1")?.unwrap_or_else(|| qi(0)),
    )?;
    let f = file_bytes(s, cfg.smallest_file_bytes())?;
    let part = cfg.partition(f)?;
    eprintln!("config: single mirror K={} N={} alpha={} M1={} F={f}", cfg.k, cfg.n_files, cfg.alpha, cfg.m1);
    let lib = Library::random(cfg.n_files, f, seed);
    let d = demand_vector(s, rng, cfg.k, cfg.n_files, cfg.alpha != qi(0))?;
    let profile = cfg.profile(&d)?;
    let placement = place_single(&cfg, &lib, &part)?;
    let log = deliver_single(&cfg, &lib, &part, &placement, &profile)?;
    let verdicts = (0..cfg.k)
        .map(|k| {
            let v = decode_single(&cfg, &part, k, &placement.user_caches[k], &log.mirror_msgs[0], &profile)
                .map_err(|e| e.to_string())
                .and_then(|bytes| if bytes == lib.file(d[k]) { Ok(()) } else { Err("wrong bytes".into()) });
            (k, d[k], v)
        })
        .collect();
    let rates = measured_rates(&log);
    let closed = cfg.rate_point();
    let rows = vec![
        ("M1".into(), cache_size(&placement.mirror_caches[0]), cfg.m1.clone()),
        ("M2".into(), cache_size(&placement.user_caches[0]), cfg.m2()),
        ("Mbar".into(), global(&placement), cfg.global_memory()),
        ("R1".into(), rates.r1.clone(), closed.r1.clone()),
        ("R2".into(), rates.r2_worst.clone(), closed.r2.clone()),
        ("Rbar".into(), &rates.r1 + &rates.r2_worst, closed.r_bar.clone()),
    ];
    let measured = RatePoint::new(
        "single-mirror-simulated",
        (1, cfg.k, cfg.n_files),
        None,
        Some(cfg.alpha.clone()),
        cfg.m1.clone(),
        cfg.m2(),
        rates.r1,
        rates.r2_worst,
    );
    Ok(Report { verdicts, rows, measured, worst: None })
}

/// Total bytes cached across all mirrors and users, in files.
fn global(placement: &Placement) -> Q {
    placement.mirror_caches.iter().chain(&placement.user_caches).map(|c| cache_size(c)).sum()
}
