//! Cross-checks shared by the `verify` command and the acceptance suite:
//! exhaustive decoding, closed-form rate agreement, GF(2) oracle
//! equivalence and the region predicates.

use std::collections::BTreeMap;

use crate::analytics::{binomial_exceeds_users, memory_point, rate_r1, rate_r2, region_classify, Region};
use crate::combinatorics::{binom_u64, k_subsets};
use crate::error::Result;
use crate::exact::{fmt_ratio, q, Q};
use crate::hier::{cache_size, simulate, Simulation};
use crate::model::{ChunkId, CodedSymbol, FilePartition, HierConfig, Library};
use crate::span::ChunkSpan;

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

/// Every demand vector in `[0, n)^k`, optionally only the surjective ones,
/// in lexicographic order.
pub fn demand_vectors(k: usize, n: usize, surjective_only: bool) -> impl Iterator<Item = Vec<usize>> {
    let mut next = (n > 0).then(|| vec![0usize; k]);
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        if let Some(i) = (0..k).rev().find(|&i| succ[i] + 1 < n) {
            succ[i] += 1;
            succ[i + 1..].iter_mut().for_each(|d| *d = 0);
            next = Some(succ);
        }
        Some(cur)
    })
    .filter(move |d| !surjective_only || (0..n).all(|f| d.contains(&f)))
}

/// Compares a simulation's measured rates and cache sizes with the closed
/// forms.
pub fn check_closed_forms(cfg: &HierConfig, sim: &Simulation) -> std::result::Result<(), String> {
    let (m1, m2) = memory_point(cfg);
    if sim.rates.r1 != rate_r1(cfg) {
        return Err(format!("R1 measured {} vs {}", fmt_ratio(&sim.rates.r1), fmt_ratio(&rate_r1(cfg))));
    }
    for (m, r2) in sim.rates.r2_per_mirror.iter().enumerate() {
        let want = rate_r2(cfg, sim.profile.per_mirror_count[m]).map_err(|e| e.to_string())?;
        if *r2 != want {
            return Err(format!("R2 of mirror {} measured {} vs {}", m + 1, fmt_ratio(r2), fmt_ratio(&want)));
        }
    }
    for (m, c) in sim.placement.mirror_caches.iter().enumerate() {
        if cache_size(c) != m1 {
            return Err(format!("mirror {} caches {} vs M1={}", m + 1, fmt_ratio(&cache_size(c)), fmt_ratio(&m1)));
        }
    }
    for (k, c) in sim.placement.user_caches.iter().enumerate() {
        if cache_size(c) != m2 {
            return Err(format!("user {} caches {} vs M2={}", k + 1, fmt_ratio(&cache_size(c)), fmt_ratio(&m2)));
        }
    }
    Ok(())
}

/// Tally of an exhaustive decoding run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TotalityReport {
    pub instances: usize,
    pub failures: Vec<String>,
}

/// Simulates every surjective demand vector and checks decoding and rates.
pub fn decode_totality(cfg: &HierConfig, file_bytes: usize, seed: u64) -> Result<TotalityReport> {
    let part = FilePartition::new(cfg, file_bytes)?;
    let lib = Library::random(cfg.n_files, file_bytes, seed);
    let mut report = TotalityReport::default();
    for d in demand_vectors(cfg.k(), cfg.n_files, true) {
        report.instances += 1;
        let outcome =
            simulate(cfg, &lib, &part, &d).map_err(|e| e.to_string()).and_then(|sim| check_closed_forms(cfg, &sim));
        if let Err(e) = outcome {
            report.failures.push(format!("{cfg} demands {d:?}: {e}"));
        }
    }
    Ok(report)
}

/// Number of chunks over all files and both layers.
pub fn total_chunks(cfg: &HierConfig) -> Option<u64> {
    let k = cfg.k() as u64;
    let per_file =
        if cfg.has_layer1() { k } else { 0 } + if cfg.has_layer2() { binom_u64(k, cfg.t as u64)? } else { 0 };
    per_file.checked_mul(cfg.n_files as u64)
}

/// One GF(2) span per layer; symbols never mix layers.
struct LayeredSpan {
    layers: BTreeMap<u8, ChunkSpan>,
}

impl LayeredSpan {
    fn new(cfg: &HierConfig, part: &FilePartition) -> Self {
        let mut layers = BTreeMap::new();
        if cfg.has_layer1() {
            let ids = (0..cfg.n_files).flat_map(|file| (0..cfg.k()).map(move |user| ChunkId::L1 { file, user }));
            layers.insert(1, ChunkSpan::new(ids, part.l1_chunk_bytes));
        }
        if cfg.has_layer2() {
            let ids: Vec<ChunkId> = (0..cfg.n_files)
                .flat_map(|file| k_subsets(cfg.k(), cfg.t).map(move |subset| ChunkId::L2 { file, subset }))
                .collect();
            layers.insert(2, ChunkSpan::new(ids, part.l2_chunk_bytes));
        }
        LayeredSpan { layers }
    }

    fn insert<'a>(&mut self, symbols: impl IntoIterator<Item = &'a CodedSymbol>) -> std::result::Result<(), String> {
        for s in symbols {
            let layer = s.generators().first().map(|g| g.layer()).ok_or("empty symbol")?;
            let span = self.layers.get_mut(&layer).ok_or_else(|| format!("{s} in an absent layer"))?;
            span.insert_symbol(s).map_err(|e| e.to_string())?;
        }
        if self.layers.values().all(|s| s.is_consistent()) {
            Ok(())
        } else {
            Err("inconsistent symbols".into())
        }
    }

    fn solve(&self, gens: &[ChunkId]) -> Option<Vec<u8>> {
        self.layers.get(&gens.first()?.layer())?.solve(gens)
    }
}

/// Checks every mirror reconstruction and user decode of `sim` against
/// brute-force GF(2) elimination over the same received symbols.
pub fn oracle_check(cfg: &HierConfig, part: &FilePartition, sim: &Simulation) -> std::result::Result<(), String> {
    for rec in &sim.reconstructed {
        let m = rec.mirror;
        let mut span = LayeredSpan::new(cfg, part);
        span.insert(&sim.placement.mirror_caches[m])?;
        span.insert(sim.log.server_msgs.iter().map(|t| &t.symbol))?;
        for (id, bytes) in &rec.layer1 {
            if span.solve(&[*id]).as_ref() != Some(bytes) {
                return Err(format!("mirror {}: {id} differs from the span", m + 1));
            }
        }
        for s in rec.mu2.iter().chain(&rec.mu3) {
            if span.solve(s.generators()).as_ref() != Some(&s.payload) {
                return Err(format!("mirror {}: {s} differs from the span", m + 1));
            }
        }
    }
    for k in 0..cfg.k() {
        let m = cfg.mirror_of_user(k);
        let mut span = LayeredSpan::new(cfg, part);
        span.insert(&sim.placement.user_caches[k])?;
        span.insert(sim.log.mirror_msgs[m].iter().map(|t| &t.symbol))?;
        let want = sim.profile.demands[k];
        let mut ids = Vec::new();
        if cfg.has_layer1() {
            ids.extend((0..cfg.k()).map(|user| ChunkId::L1 { file: want, user }));
        }
        if cfg.has_layer2() {
            ids.extend(k_subsets(cfg.k(), cfg.t).map(|subset| ChunkId::L2 { file: want, subset }));
        }
        for id in ids {
            let decoded = &sim.decoded[k][part.range(&id)];
            if span.solve(&[id]).as_deref() != Some(decoded) {
                return Err(format!("user {}: {id} differs from the span", k + 1));
            }
        }
    }
    Ok(())
}

/// Region predicates over `2 <= K1, K2 <= max_k`, with `N = K`, `t = K2`
/// and `alpha` on a grid of `steps + 1` points; the binomial bound over
/// `2 <= K1, K2 <= max_bound_k`.
pub fn region_checks(max_k: usize, max_bound_k: usize, steps: i64) -> Result<Vec<Check>> {
    let mut bound = Vec::new();
    for k1 in 2..=max_bound_k {
        for k2 in 2..=max_bound_k {
            if (k1, k2) != (2, 2) && !binomial_exceeds_users(k1, k2) {
                bound.push(format!("({k1},{k2})"));
            }
        }
    }
    let mut above = Vec::new();
    let mut below = Vec::new();
    let mut only_i_ii = Vec::new();
    let mut cases = 0usize;
    for k1 in 2..=max_k {
        for k2 in 2..=max_k {
            let excluded = (k1, k2) == (2, 2);
            for alpha in alpha_grid(steps) {
                let cfg = HierConfig::new(k1, k2, k1 * k2, k2, alpha.clone())?;
                let rep = region_classify(&cfg)?;
                cases += 1;
                let tag = || format!("({k1},{k2},alpha={})", fmt_ratio(&alpha));
                if k1 > k2 && (rep.region != Region::II || !rep.forces_region_ii) {
                    above.push(tag());
                }
                if !excluded && k1 <= k2 && (rep.region == Region::III || !rep.excludes_region_iii) {
                    below.push(tag());
                }
                if !excluded && rep.region == Region::III {
                    only_i_ii.push(tag());
                }
            }
        }
    }
    let check = |name: &str, bad: Vec<String>, n: usize| {
        let detail = if bad.is_empty() {
            format!("{n} cases")
        } else {
            format!("{} of {n} cases violate: {}", bad.len(), bad.join(" "))
        };
        Check::new(name, bad.is_empty(), detail)
    };
    let bound_cases = (max_bound_k - 1).pow(2) - 1;
    Ok(vec![
        check("C(K,K2) > K K2", bound, bound_cases),
        check("K1 > K2 gives Region II", above, cases),
        check("K1 <= K2 avoids Region III", below, cases),
        check("Region I or II only", only_i_ii, cases),
    ])
}

/// `{0, 1/steps, ..., 1}`.
pub fn alpha_grid(steps: i64) -> Vec<Q> {
    (0..=steps).map(|j| q(j, steps)).collect()
}
