//! Alternative scheme for a single mirror: the coded layer-1 placement lives
//! in the user caches and the mirror stores a prefix of every layer-2
//! subfile.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::analytics::{composite, RatePoint};
use crate::error::{Error, Result};
use crate::exact::{fmt_ratio, q, qi, Q};
use crate::hier::{
    check_library_size, coded_l1_key, layer1_server_msgs, measured_rates, recover_layer1, Book, Placement, Simulation,
    Step, Transmission, TransmissionLog,
};
use crate::model::{ChunkId, CodedSymbol, DemandProfile, FilePartition, HierConfig, Library};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleMirrorConfig {
    pub k: usize,
    pub n_files: usize,
    pub alpha: Q,
    pub m1: Q,
}

impl SingleMirrorConfig {
    pub fn new(k: usize, n_files: usize, alpha: Q, m1: Q) -> Result<Self> {
        if k == 0 || n_files == 0 {
            return Err(Error::Range("K and N must be >= 1".into()));
        }
        if alpha < Q::zero() || alpha > Q::one() {
            return Err(Error::Range(format!("alpha={} outside [0, 1]", fmt_ratio(&alpha))));
        }
        if n_files > k && !alpha.is_zero() {
            return Err(Error::Constraint(format!("N={n_files} > K={k} requires alpha = 0")));
        }
        let cfg = SingleMirrorConfig { k, n_files, alpha, m1 };
        if cfg.m1 < Q::zero() || cfg.m1 > cfg.upper_bound() {
            return Err(Error::Range(format!(
                "M1={} outside [0, (1-alpha)N = {}]",
                fmt_ratio(&cfg.m1),
                fmt_ratio(&cfg.upper_bound())
            )));
        }
        Ok(cfg)
    }

    /// Largest admissible mirror memory, `(1 - alpha) N`.
    pub fn upper_bound(&self) -> Q {
        (Q::one() - &self.alpha) * qi(self.n_files as i64)
    }

    /// The `(1 - alpha)^2 N` bound that appears once in the source text.
    /// Documented only; [`SingleMirrorConfig::new`] enforces
    /// [`SingleMirrorConfig::upper_bound`].
    pub fn alt_upper_bound(&self) -> Q {
        let om = Q::one() - &self.alpha;
        &om * &om * qi(self.n_files as i64)
    }

    /// Cached fraction of each layer-2 subfile (0 when there is no layer 2).
    pub fn theta(&self) -> Q {
        if self.alpha.is_one() {
            Q::zero()
        } else {
            &self.m1 / self.upper_bound()
        }
    }

    pub fn m2(&self) -> Q {
        &self.alpha / qi(self.k as i64)
    }

    pub fn global_memory(&self) -> Q {
        &self.m1 + qi(self.k as i64) * self.m2()
    }

    /// `N (1 - alpha/K)`.
    fn full_rate(&self) -> Q {
        qi(self.n_files as i64) * (Q::one() - self.m2())
    }

    pub fn rate_r1(&self) -> Q {
        self.full_rate() - &self.m1
    }

    pub fn rate_r2(&self) -> Q {
        self.full_rate()
    }

    pub fn rate_point(&self) -> RatePoint {
        RatePoint::new(
            "single-mirror",
            (1, self.k, self.n_files),
            None,
            Some(self.alpha.clone()),
            self.m1.clone(),
            self.m2(),
            self.rate_r1(),
            self.rate_r2(),
        )
    }

    /// Byte layout: K layer-1 chunks, then the cached head and uncached tail
    /// of the layer-2 subfile.
    pub fn partition(&self, file_bytes: usize) -> Result<FilePartition> {
        if file_bytes == 0 {
            return Err(Error::Range("file size must be positive".into()));
        }
        let f = qi(file_bytes as i64);
        let bytes = |v: Q, what: &str| -> Result<usize> {
            if !v.is_integer() {
                return Err(Error::Divisibility(format!("{what} = {} bytes is not integral", fmt_ratio(&v))));
            }
            Ok(v.to_integer().to_usize().expect("fits"))
        };
        let l1 = bytes(&self.alpha * &f / qi(self.k as i64), "alpha*F/K")?;
        let head = bytes(&self.m1 * &f / qi(self.n_files as i64), "M1*F/N")?;
        let region = file_bytes - self.k * l1;
        Ok(FilePartition {
            file_bytes,
            k: self.k,
            l1_chunk_bytes: l1,
            l2_chunk_bytes: 0,
            head_bytes: head,
            l2_region_bytes: region,
        })
    }

    pub fn smallest_file_bytes(&self) -> usize {
        let d1 = (&self.alpha / qi(self.k as i64)).denom().clone();
        let d2 = (&self.m1 / qi(self.n_files as i64)).denom().clone();
        d1.lcm(&d2).to_usize().expect("file size overflow")
    }

    /// Demand profile of the single mirror's `K` users.
    pub fn profile(&self, demands: &[usize]) -> Result<DemandProfile> {
        DemandProfile::build(1, self.k, self.n_files, !self.alpha.is_zero(), demands)
    }
}

fn head(file: usize) -> ChunkId {
    ChunkId::Head { file }
}

fn tail(file: usize) -> ChunkId {
    ChunkId::Tail { file }
}

/// Layer-2 pieces with a non-zero byte length.
fn layer2_pieces(part: &FilePartition, file: usize) -> Vec<ChunkId> {
    [head(file), tail(file)].into_iter().filter(|c| part.chunk_bytes(c) > 0).collect()
}

pub fn place_single(cfg: &SingleMirrorConfig, lib: &Library, part: &FilePartition) -> Result<Placement> {
    check_library_size(lib, cfg.n_files, part)?;
    let mirror: Vec<CodedSymbol> = if part.head_bytes > 0 {
        (0..cfg.n_files).map(|n| CodedSymbol::encode(lib, part, vec![head(n)])).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let users = (0..cfg.k)
        .map(|k| {
            if cfg.alpha.is_zero() {
                Ok(Vec::new())
            } else {
                Ok(vec![CodedSymbol::encode(lib, part, coded_l1_key(cfg.n_files, k))?])
            }
        })
        .collect::<Result<_>>()?;
    Ok(Placement { mirror_caches: vec![mirror], user_caches: users })
}

pub fn deliver_single(
    cfg: &SingleMirrorConfig,
    lib: &Library,
    part: &FilePartition,
    placement: &Placement,
    profile: &DemandProfile,
) -> Result<TransmissionLog> {
    let mut server = if cfg.alpha.is_zero() { Vec::new() } else { layer1_server_msgs(lib, part, profile)? };
    if part.chunk_bytes(&tail(0)) > 0 {
        for n in 0..cfg.n_files {
            server.push(Transmission { step: Step::Sm3, symbol: CodedSymbol::encode(lib, part, vec![tail(n)])? });
        }
    }
    let mut relay: Vec<Transmission> = server
        .iter()
        .filter(|t| t.step != Step::Sm3)
        .map(|t| Transmission {
            step: if t.step == Step::Sm1 { Step::Mu1 } else { Step::Mu2 },
            symbol: t.symbol.clone(),
        })
        .collect();
    if part.file_bytes > part.l1_region_bytes() {
        let mut known = Book::new();
        known.add(&placement.mirror_caches[0]);
        known.add(server.iter().map(|t| &t.symbol));
        for n in 0..cfg.n_files {
            for piece in layer2_pieces(part, n) {
                let payload = known.need(&[piece]).map_err(|what| Error::Reconstruct { mirror: 0, what })?.to_vec();
                let symbol = CodedSymbol::from_parts(vec![piece], payload, part.size_files(&piece))?;
                relay.push(Transmission { step: Step::Mu3, symbol });
            }
        }
    }
    Ok(TransmissionLog { server_msgs: server, mirror_msgs: vec![relay] })
}

pub fn decode_single(
    cfg: &SingleMirrorConfig,
    part: &FilePartition,
    k: usize,
    user_cache: &[CodedSymbol],
    mirror_msgs: &[Transmission],
    profile: &DemandProfile,
) -> Result<Vec<u8>> {
    let want = profile.demands[k];
    let fail = |what: String| Error::Decode { user: k, what };
    let mut book = Book::new();
    book.add(user_cache);
    book.add(mirror_msgs.iter().map(|t| &t.symbol));
    let mut out = vec![0u8; part.file_bytes];
    if !cfg.alpha.is_zero() {
        let chunks = recover_layer1(cfg.k, profile, &BTreeSet::from([want]), |_| k, &book).map_err(fail)?;
        for (id, bytes) in chunks {
            out[part.range(&id)].copy_from_slice(&bytes);
        }
    }
    for piece in layer2_pieces(part, want) {
        out[part.range(&piece)].copy_from_slice(book.need(&[piece]).map_err(fail)?);
    }
    Ok(out)
}

/// Full run of the single-mirror scheme with byte-exact checks.
pub fn simulate_single(
    cfg: &SingleMirrorConfig,
    lib: &Library,
    part: &FilePartition,
    demands: &[usize],
) -> Result<Simulation> {
    let profile = cfg.profile(demands)?;
    let placement = place_single(cfg, lib, part)?;
    let log = deliver_single(cfg, lib, part, &placement, &profile)?;
    let mut decoded = Vec::with_capacity(cfg.k);
    for k in 0..cfg.k {
        let file = decode_single(cfg, part, k, &placement.user_caches[k], &log.mirror_msgs[0], &profile)?;
        if file != lib.file(profile.demands[k]) {
            return Err(Error::Decode { user: k, what: format!("file {} (wrong bytes)", profile.demands[k] + 1) });
        }
        decoded.push(file);
    }
    let rates = measured_rates(&log);
    Ok(Simulation { profile, placement, reconstructed: Vec::new(), log, decoded, rates })
}

/// Composite-rate advantage of this scheme over the hierarchical scheme
/// with `K1 = 1, t = K` at equal global memory (`M1 = (1 - alpha) N`).
pub fn dominance_gap(k: usize, n_files: usize, alpha: &Q) -> Result<Q> {
    let single = SingleMirrorConfig::new(k, n_files, alpha.clone(), Q::zero())?;
    let single = SingleMirrorConfig { m1: single.upper_bound(), ..single };
    let hier = composite(&HierConfig::new(1, k, n_files, k, alpha.clone())?);
    let alt = single.rate_point();
    debug_assert_eq!(hier.m_bar, alt.m_bar);
    Ok(hier.r_bar - alt.r_bar)
}

/// `alpha N / K`, the closed form of [`dominance_gap`].
pub fn dominance_gap_closed_form(k: usize, n_files: usize, alpha: &Q) -> Q {
    alpha * q(n_files as i64, k as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hier::cache_size;

    fn setup(k: usize, n: usize, a: Q, m1: Q) -> (SingleMirrorConfig, Library, FilePartition) {
        let cfg = SingleMirrorConfig::new(k, n, a, m1).unwrap();
        let f = cfg.smallest_file_bytes() * 2;
        let part = cfg.partition(f).unwrap();
        (cfg, Library::random(n, f, 42), part)
    }

    #[test]
    fn four_users_placement_and_rates() {
        for m1 in [Q::zero(), q(1, 2), qi(1), qi(2)] {
            let (cfg, lib, part) = setup(4, 4, q(1, 2), m1.clone());
            let p = place_single(&cfg, &lib, &part).unwrap();
            assert_eq!(p.user_caches[0][0].generators(), coded_l1_key(4, 0).as_slice());
            assert_eq!(cache_size(&p.user_caches[0]), q(1, 8));
            assert_eq!(cache_size(&p.mirror_caches[0]), m1);
            let sim = simulate_single(&cfg, &lib, &part, &[0, 1, 2, 3]).unwrap();
            assert_eq!(sim.rates.r1, q(7, 2) - &m1);
            assert_eq!(sim.rates.r2_worst, q(7, 2));
            assert_eq!((cfg.rate_r1(), cfg.rate_r2()), (q(7, 2) - &m1, q(7, 2)));
        }
    }

    #[test]
    fn repeated_demands() {
        let (cfg, lib, part) = setup(6, 4, q(2, 3), q(2, 3));
        assert_eq!(cfg.m2(), q(1, 9));
        assert_eq!(cfg.theta(), q(3, 4) * &cfg.m1);
        let sim = simulate_single(&cfg, &lib, &part, &[0, 1, 1, 2, 0, 3]).unwrap();
        assert_eq!(TransmissionLog::count(&sim.log.server_msgs, Step::Sm2), 2);
        assert_eq!(sim.rates.r1, q(32, 9) - &cfg.m1);
        assert_eq!(sim.rates.r2_worst, q(32, 9));
    }

    #[test]
    fn degenerate_alphas() {
        let (cfg, lib, part) = setup(3, 3, Q::zero(), Q::zero());
        let sim = simulate_single(&cfg, &lib, &part, &[0, 0, 2]).unwrap();
        assert_eq!((sim.rates.r1, sim.rates.r2_worst), (qi(3), qi(3)));
        let (cfg, lib, part) = setup(3, 2, Q::one(), Q::zero());
        assert!(place_single(&cfg, &lib, &part).unwrap().mirror_caches[0].is_empty());
        assert!(simulate_single(&cfg, &lib, &part, &[0, 1, 1]).is_ok());
        assert!(matches!(SingleMirrorConfig::new(3, 2, Q::one(), q(1, 10)), Err(Error::Range(_))));
        assert!(matches!(SingleMirrorConfig::new(4, 4, q(1, 2), qi(3)), Err(Error::Range(_))));
        assert_eq!(SingleMirrorConfig::new(4, 4, q(1, 2), qi(1)).unwrap().alt_upper_bound(), qi(1));
    }

    #[test]
    fn dominance_examples() {
        assert_eq!(dominance_gap(4, 4, &q(1, 2)).unwrap(), q(1, 2));
        assert_eq!(dominance_gap(4, 4, &Q::zero()).unwrap(), Q::zero());
        assert_eq!(dominance_gap(6, 4, &q(2, 3)).unwrap(), q(4, 9));
    }

    #[test]
    fn rate_invariants_over_m1_grid() {
        let base = SingleMirrorConfig::new(6, 4, q(1, 3), Q::zero()).unwrap();
        let ub = base.upper_bound();
        for i in 0..=8 {
            let c = SingleMirrorConfig::new(6, 4, q(1, 3), &ub * q(i, 8)).unwrap();
            assert_eq!(c.rate_r2(), base.rate_r2());
            assert_eq!(c.rate_r1() + &c.m1, q(4, 1) * (Q::one() - q(1, 18)));
        }
    }
}
