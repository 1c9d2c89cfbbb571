//! Core domain types: system configuration, chunk identifiers, exact file
//! partitioning, coded symbols and demand analysis.
//!
//! Indices are 0-based throughout the API (mirror `m`, user `k`, file `n`);
//! `Display` impls render them 1-based.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{binom, lex_rank, Subset};
use crate::error::{Error, Result};
use crate::exact::{fmt_ratio, q, qi, Q};

/// Parameters of a two-layer hierarchical system running the proposed scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierConfig {
    pub k1: usize,
    pub k2: usize,
    pub n_files: usize,
    pub t: usize,
    pub alpha: Q,
}

impl HierConfig {
    /// Validates raw parameters.
    pub fn new(k1: usize, k2: usize, n_files: usize, t: usize, alpha: Q) -> Result<Self> {
        if k1 == 0 || k2 == 0 {
            return Err(Error::Range(format!("K1={k1}, K2={k2}: both must be >= 1")));
        }
        if n_files == 0 {
            return Err(Error::Range("N must be >= 1".into()));
        }
        let k = k1.checked_mul(k2).ok_or_else(|| Error::Range("K1*K2 overflows".into()))?;
        if t == 0 || t > k {
            return Err(Error::Range(format!("t={t} outside [1, {k}]")));
        }
        if alpha < Q::zero() || alpha > Q::one() {
            return Err(Error::Range(format!("alpha={} outside [0, 1]", fmt_ratio(&alpha))));
        }
        if n_files > k && !alpha.is_zero() {
            return Err(Error::Constraint(format!(
                "N={n_files} > K={k} requires alpha = 0 (got {})",
                fmt_ratio(&alpha)
            )));
        }
        Ok(HierConfig { k1, k2, n_files, t, alpha })
    }

    /// Total number of users `K = K1*K2`.
    pub fn k(&self) -> usize {
        self.k1 * self.k2
    }

    pub fn has_layer1(&self) -> bool {
        !self.alpha.is_zero()
    }

    pub fn has_layer2(&self) -> bool {
        !self.alpha.is_one()
    }

    /// Users attached to mirror `m`: `[m*K2, (m+1)*K2)`.
    pub fn users_of_mirror(&self, m: usize) -> Result<Range<usize>> {
        if m >= self.k1 {
            return Err(Error::Range(format!("mirror {m} outside [0, {})", self.k1)));
        }
        Ok(m * self.k2..(m + 1) * self.k2)
    }

    pub fn mirror_of_user(&self, k: usize) -> usize {
        k / self.k2
    }

    /// Bit-mask form of `users_of_mirror`; needs `K <= 64`.
    pub fn mirror_mask(&self, m: usize) -> Result<Subset> {
        let r = self.users_of_mirror(m)?;
        if self.k() > 64 {
            return Err(Error::Scope(format!("K={} exceeds the 64-user simulation limit", self.k())));
        }
        Ok(Subset::range(r.start, r.end))
    }

    /// Number of layer-2 mini-subfiles per file, `C(K, t)`.
    pub fn l2_chunks(&self) -> BigInt {
        binom(self.k() as i64, self.t as i64)
    }
}

impl fmt::Display for HierConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K1={} K2={} N={} t={} alpha={}", self.k1, self.k2, self.n_files, self.t, fmt_ratio(&self.alpha))
    }
}

/// Identifies one piece of a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChunkId {
    /// `W1_{file,user}`, one of the K layer-1 mini-subfiles.
    L1 { file: usize, user: usize },
    /// `W2_{file,S}` with `|S| = t`.
    L2 { file: usize, subset: Subset },
    /// Single-mirror scheme: the cached prefix of `W2_file`.
    Head { file: usize },
    /// Single-mirror scheme: the uncached remainder of `W2_file`.
    Tail { file: usize },
}

impl ChunkId {
    pub fn layer(&self) -> u8 {
        match self {
            ChunkId::L1 { .. } => 1,
            _ => 2,
        }
    }

    pub fn file(&self) -> usize {
        match *self {
            ChunkId::L1 { file, .. } | ChunkId::L2 { file, .. } | ChunkId::Head { file } | ChunkId::Tail { file } => {
                file
            }
        }
    }
}

impl fmt::Display for ChunkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ChunkId::L1 { file, user } => write!(f, "W1[{},{}]", file + 1, user + 1),
            ChunkId::L2 { file, subset } => write!(f, "W2[{},{}]", file + 1, subset),
            ChunkId::Head { file } => write!(f, "W2head[{}]", file + 1),
            ChunkId::Tail { file } => write!(f, "W2tail[{}]", file + 1),
        }
    }
}

/// Byte layout of one file. Layer-1 chunks come first in user order, then
/// the layer-2 region: `C(K,t)` chunks in lexicographic subset order for the
/// hierarchical scheme, or a head/tail split for the single-mirror scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilePartition {
    pub file_bytes: usize,
    pub k: usize,
    pub l1_chunk_bytes: usize,
    pub l2_chunk_bytes: usize,
    /// Head length of the single-mirror split (0 for the hierarchical layout).
    pub head_bytes: usize,
    /// Total layer-2 bytes, `(1 - alpha) F`.
    pub l2_region_bytes: usize,
}

fn exact_bytes(v: &Q, what: &str) -> Result<usize> {
    if !v.is_integer() {
        return Err(Error::Divisibility(format!("{what} = {} bytes is not integral", fmt_ratio(v))));
    }
    v.to_integer().to_usize().ok_or_else(|| Error::Divisibility(format!("{what} does not fit in memory")))
}

impl FilePartition {
    /// Exact split of an `file_bytes`-byte file for `cfg`; refuses to round.
    pub fn new(cfg: &HierConfig, file_bytes: usize) -> Result<Self> {
        if file_bytes == 0 {
            return Err(Error::Range("file size must be positive".into()));
        }
        let f = qi(file_bytes as i64);
        let k = cfg.k();
        let l1 = exact_bytes(&(&cfg.alpha * &f / qi(k as i64)), "alpha*F/K")?;
        let region = exact_bytes(&((Q::one() - &cfg.alpha) * &f), "(1-alpha)*F")?;
        let l2 = if region == 0 {
            0
        } else {
            exact_bytes(&(qi(region as i64) / Q::from_integer(cfg.l2_chunks())), "(1-alpha)*F/C(K,t)")?
        };
        Ok(FilePartition {
            file_bytes,
            k,
            l1_chunk_bytes: l1,
            l2_chunk_bytes: l2,
            head_bytes: 0,
            l2_region_bytes: region,
        })
    }

    /// Smallest file size for which [`FilePartition::new`] succeeds.
    pub fn smallest_file_bytes(cfg: &HierConfig) -> usize {
        let k = BigInt::from(cfg.k());
        let a = &cfg.alpha;
        let one_minus = Q::one() - a;
        // F must make a*F/K and (1-a)*F/C(K,t) integral.
        let need = |frac: &Q, div: &BigInt| -> BigInt {
            if frac.is_zero() {
                return BigInt::one();
            }
            let den = frac.denom() * div;
            &den / den.gcd(frac.numer())
        };
        let f1 = need(a, &k);
        let f2 = need(&one_minus, &cfg.l2_chunks());
        f1.lcm(&f2).to_usize().expect("file size overflow")
    }

    pub fn l1_region_bytes(&self) -> usize {
        self.k * self.l1_chunk_bytes
    }

    /// Byte range of `id` inside the file.
    pub fn range(&self, id: &ChunkId) -> Range<usize> {
        match *id {
            ChunkId::L1 { user, .. } => {
                let s = user * self.l1_chunk_bytes;
                s..s + self.l1_chunk_bytes
            }
            ChunkId::L2 { subset, .. } => {
                let s = self.l1_region_bytes() + lex_rank(self.k, subset) as usize * self.l2_chunk_bytes;
                s..s + self.l2_chunk_bytes
            }
            ChunkId::Head { .. } => {
                let s = self.l1_region_bytes();
                s..s + self.head_bytes
            }
            ChunkId::Tail { .. } => {
                let s = self.l1_region_bytes() + self.head_bytes;
                s..self.file_bytes
            }
        }
    }

    pub fn chunk_bytes(&self, id: &ChunkId) -> usize {
        self.range(id).len()
    }

    /// Size of `id` in file units.
    pub fn size_files(&self, id: &ChunkId) -> Q {
        q(self.chunk_bytes(id) as i64, self.file_bytes as i64)
    }
}

/// The server's library: `N` files of equal size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Library {
    files: Vec<Vec<u8>>,
}

impl Library {
    pub fn new(files: Vec<Vec<u8>>) -> Result<Self> {
        let len = files.first().map(Vec::len).unwrap_or(0);
        if files.is_empty() || files.iter().any(|f| f.len() != len) {
            return Err(Error::Range("library needs >= 1 file, all of equal size".into()));
        }
        Ok(Library { files })
    }

    /// Pseudorandom library derived from a 64-bit seed.
    pub fn random(n_files: usize, file_bytes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let files = (0..n_files)
            .map(|_| {
                let mut buf = vec![0u8; file_bytes];
                rng.fill_bytes(&mut buf);
                buf
            })
            .collect();
        Library { files }
    }

    pub fn n_files(&self) -> usize {
        self.files.len()
    }

    pub fn file_bytes(&self) -> usize {
        self.files[0].len()
    }

    pub fn file(&self, n: usize) -> &[u8] {
        &self.files[n]
    }

    pub fn chunk(&self, part: &FilePartition, id: &ChunkId) -> &[u8] {
        &self.files[id.file()][part.range(id)]
    }
}

pub(crate) fn xor_into(acc: &mut [u8], other: &[u8]) {
    debug_assert_eq!(acc.len(), other.len());
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
}

/// XOR of equally sized chunks, tagged with the chunks that generate it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedSymbol {
    generators: Vec<ChunkId>,
    pub payload: Vec<u8>,
    pub size_files: Q,
}

impl CodedSymbol {
    /// Builds a symbol from explicit parts. Generators are canonicalised
    /// (sorted, duplicates rejected).
    pub fn from_parts(mut generators: Vec<ChunkId>, payload: Vec<u8>, size_files: Q) -> Result<Self> {
        generators.sort();
        if generators.is_empty() {
            return Err(Error::Range("coded symbol needs at least one generator".into()));
        }
        if generators.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Range("duplicate generator in coded symbol".into()));
        }
        Ok(CodedSymbol { generators, payload, size_files })
    }

    /// Encodes `generators` from the library.
    pub fn encode(lib: &Library, part: &FilePartition, generators: Vec<ChunkId>) -> Result<Self> {
        let first =
            *generators.first().ok_or_else(|| Error::Range("coded symbol needs at least one generator".into()))?;
        let len = part.chunk_bytes(&first);
        let mut payload = vec![0u8; len];
        for g in &generators {
            if g.layer() != first.layer() || part.chunk_bytes(g) != len {
                return Err(Error::Range(format!("generators {first} and {g} differ in layer or size")));
            }
            xor_into(&mut payload, lib.chunk(part, g));
        }
        Self::from_parts(generators, payload, part.size_files(&first))
    }

    pub fn generators(&self) -> &[ChunkId] {
        &self.generators
    }

    pub fn len_bytes(&self) -> usize {
        self.payload.len()
    }
}

impl fmt::Display for CodedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Demand vector plus the derived sets used by the delivery phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandProfile {
    pub demands: Vec<usize>,
    /// First demander of each file, in file order; `None` when some file is
    /// never demanded (allowed only without layer 1).
    pub base_set: Option<Vec<usize>>,
    pub per_mirror_files: Vec<BTreeSet<usize>>,
    pub per_mirror_count: Vec<usize>,
    pub demanders: Vec<Vec<usize>>,
}

impl DemandProfile {
    pub fn new(cfg: &HierConfig, demands: &[usize]) -> Result<Self> {
        Self::build(cfg.k1, cfg.k2, cfg.n_files, cfg.has_layer1(), demands)
    }

    pub(crate) fn build(
        k1: usize,
        k2: usize,
        n_files: usize,
        require_surjective: bool,
        demands: &[usize],
    ) -> Result<Self> {
        let k = k1 * k2;
        if demands.len() != k {
            return Err(Error::Demand(format!("expected {k} demands, got {}", demands.len())));
        }
        if let Some(&bad) = demands.iter().find(|&&d| d >= n_files) {
            return Err(Error::Range(format!("demanded file {} outside [1, {n_files}]", bad + 1)));
        }
        let mut demanders = vec![Vec::new(); n_files];
        for (user, &d) in demands.iter().enumerate() {
            demanders[d].push(user);
        }
        let base_set = if demanders.iter().all(|d| !d.is_empty()) {
            Some(demanders.iter().map(|d| d[0]).collect::<Vec<_>>())
        } else {
            None
        };
        if require_surjective && base_set.is_none() {
            let missing: Vec<String> =
                demanders.iter().enumerate().filter(|(_, d)| d.is_empty()).map(|(n, _)| (n + 1).to_string()).collect();
            return Err(Error::Demand(format!(
                "files {{{}}} are never demanded; layer 1 needs every file demanded",
                missing.join(",")
            )));
        }
        let per_mirror_files: Vec<BTreeSet<usize>> =
            (0..k1).map(|m| demands[m * k2..(m + 1) * k2].iter().copied().collect()).collect();
        let per_mirror_count = per_mirror_files.iter().map(BTreeSet::len).collect();
        Ok(DemandProfile { demands: demands.to_vec(), base_set, per_mirror_files, per_mirror_count, demanders })
    }

    pub fn in_base_set(&self, user: usize) -> bool {
        self.base_set.as_ref().is_some_and(|b| b.contains(&user))
    }

    /// The base-set member demanding `file`.
    pub fn base_of_file(&self, file: usize) -> Option<usize> {
        self.base_set.as_ref().map(|b| b[file])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::RngCore;

    fn cfg(k1: usize, k2: usize, n: usize, t: usize, a: Q) -> HierConfig {
        HierConfig::new(k1, k2, n, t, a).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(HierConfig::new(3, 2, 6, 2, q(1, 2)).is_ok());
        assert!(matches!(HierConfig::new(3, 2, 7, 2, q(1, 2)), Err(Error::Constraint(_))));
        assert!(HierConfig::new(3, 2, 7, 2, Q::zero()).is_ok());
        assert!(matches!(HierConfig::new(3, 2, 6, 0, q(1, 2)), Err(Error::Range(_))));
        assert!(matches!(HierConfig::new(3, 2, 6, 7, q(1, 2)), Err(Error::Range(_))));
        assert!(matches!(HierConfig::new(3, 2, 6, 2, q(3, 2)), Err(Error::Range(_))));
        assert!(matches!(HierConfig::new(3, 2, 6, 2, q(-1, 2)), Err(Error::Range(_))));
        assert!(matches!(HierConfig::new(0, 2, 6, 1, q(0, 1)), Err(Error::Range(_))));
        // alpha is kept in lowest terms
        assert_eq!(cfg(3, 2, 6, 2, q(2, 4)).alpha, q(1, 2));
        assert_eq!(*cfg(3, 2, 6, 2, q(36, 98)).alpha.numer(), BigInt::from(18));
    }

    #[test]
    fn mirror_user_sets() {
        let c = cfg(3, 2, 6, 2, q(1, 2));
        assert_eq!(c.users_of_mirror(0).unwrap(), 0..2);
        assert_eq!(c.users_of_mirror(2).unwrap(), 4..6);
        assert!(matches!(c.users_of_mirror(3), Err(Error::Range(_))));
        let single = cfg(1, 4, 4, 1, q(1, 2));
        assert_eq!(single.users_of_mirror(0).unwrap(), 0..4);
        assert_eq!(c.mirror_mask(0).unwrap().to_string(), "{1,2}");
    }

    #[test]
    fn mirror_sets_partition_users() {
        for k1 in 1..=8 {
            for k2 in 1..=8 {
                let c = cfg(k1, k2, 1, 1, Q::zero());
                let mut seen = vec![0u32; c.k()];
                for m in 0..k1 {
                    for u in c.users_of_mirror(m).unwrap() {
                        seen[u] += 1;
                    }
                }
                assert!(seen.iter().all(|&s| s == 1), "K1={k1} K2={k2}");
            }
        }
    }

    #[test]
    fn demand_profile_examples() {
        // (1,2,1,3,2,2), 1-based in the worked example
        let c = cfg(3, 2, 3, 2, q(1, 2));
        let p = DemandProfile::new(&c, &[0, 1, 0, 2, 1, 1]).unwrap();
        assert_eq!(p.base_set, Some(vec![0, 1, 3]));
        assert_eq!(p.per_mirror_files[0], BTreeSet::from([0, 1]));
        assert_eq!(p.per_mirror_files[1], BTreeSet::from([0, 2]));
        assert_eq!(p.per_mirror_files[2], BTreeSet::from([1]));
        assert_eq!(p.per_mirror_count, vec![2, 2, 1]);
        assert_eq!(p.demanders[1], vec![1, 4, 5]);

        let c = cfg(3, 2, 6, 2, q(1, 2));
        let p = DemandProfile::new(&c, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(p.base_set, Some((0..6).collect()));
        assert_eq!(p.per_mirror_count, vec![2, 2, 2]);

        let c = cfg(1, 6, 4, 1, q(2, 3));
        let p = DemandProfile::new(&c, &[0, 1, 1, 2, 0, 3]).unwrap();
        assert_eq!(p.base_set, Some(vec![0, 1, 3, 5]));
    }

    #[test]
    fn demand_errors() {
        let c = cfg(3, 2, 3, 2, q(1, 2));
        assert!(matches!(DemandProfile::new(&c, &[0, 0, 0, 0, 1, 1]), Err(Error::Demand(_))));
        assert!(matches!(DemandProfile::new(&c, &[0, 1, 2]), Err(Error::Demand(_))));
        assert!(matches!(DemandProfile::new(&c, &[0, 1, 2, 3, 0, 0]), Err(Error::Range(_))));
        // without layer 1 non-surjective demands are fine
        let c0 = cfg(3, 2, 3, 2, Q::zero());
        let p = DemandProfile::new(&c0, &[0, 0, 0, 0, 1, 1]).unwrap();
        assert!(p.base_set.is_none());
    }

    #[test]
    fn partition_examples() {
        let c = cfg(3, 2, 6, 2, q(1, 2));
        let p = FilePartition::new(&c, 60).unwrap();
        assert_eq!((p.l1_chunk_bytes, p.l2_chunk_bytes), (5, 2));
        assert!(matches!(FilePartition::new(&c, 61), Err(Error::Divisibility(_))));

        let c = cfg(3, 2, 6, 3, Q::zero());
        let p = FilePartition::new(&c, 20).unwrap();
        assert_eq!((p.l1_chunk_bytes, p.l2_chunk_bytes), (0, 1));
        assert!(matches!(FilePartition::new(&c, 0), Err(Error::Range(_))));
    }

    #[test]
    fn smallest_sizes() {
        let c = cfg(3, 2, 6, 2, q(1, 2));
        assert_eq!(FilePartition::smallest_file_bytes(&c), 60);
        let c = cfg(3, 2, 6, 2, q(18, 49));
        let f = FilePartition::smallest_file_bytes(&c);
        assert!(FilePartition::new(&c, f).is_ok());
        let c = cfg(2, 2, 4, 4, Q::one());
        assert_eq!(FilePartition::smallest_file_bytes(&c), 4);
    }

    #[test]
    fn encode_rejects_mixed_layers() {
        let c = cfg(3, 2, 6, 2, q(1, 2));
        let p = FilePartition::new(&c, 60).unwrap();
        let lib = Library::random(6, 60, 7);
        let mixed = vec![ChunkId::L1 { file: 0, user: 0 }, ChunkId::L2 { file: 0, subset: Subset::from_elems([0, 1]) }];
        assert!(CodedSymbol::encode(&lib, &p, mixed).is_err());
        let s = CodedSymbol::encode(&lib, &p, vec![ChunkId::L1 { file: 1, user: 0 }, ChunkId::L1 { file: 0, user: 0 }])
            .unwrap();
        assert_eq!(s.generators()[0], ChunkId::L1 { file: 0, user: 0 });
        assert_eq!(s.size_files, q(1, 12));
    }

    proptest! {
        #[test]
        fn partition_is_exact(k1 in 1usize..4, k2 in 1usize..4, t_pick in 0usize..16, p in 0i64..6, mult in 1usize..4) {
            let k = k1 * k2;
            let t = 1 + t_pick % k;
            let alpha = q(p, 5);
            let c = HierConfig::new(k1, k2, k, t, alpha).unwrap();
            let f = FilePartition::smallest_file_bytes(&c) * mult;
            let part = FilePartition::new(&c, f).unwrap();
            let l2 = c.l2_chunks().to_usize().unwrap();
            prop_assert_eq!(k * part.l1_chunk_bytes + l2 * part.l2_chunk_bytes, f);
            prop_assert_eq!(q((k * part.l1_chunk_bytes) as i64, f as i64), c.alpha.clone());
        }

        #[test]
        fn base_set_covers_library(n in 1usize..5, extra in proptest::collection::vec(0usize..5, 0..4), seed in any::<u64>()) {
            // surjective demand vector: every file once, then extras, shuffled
            let mut d: Vec<usize> = (0..n).collect();
            d.extend(extra.into_iter().map(|e| e % n));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..d.len()).rev() {
                let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                d.swap(i, j);
            }
            let p = DemandProfile::build(1, d.len(), n, true, &d).unwrap();
            let base = p.base_set.unwrap();
            prop_assert_eq!(base.len(), n);
            let files: BTreeSet<usize> = base.iter().map(|&u| d[u]).collect();
            prop_assert_eq!(files, (0..n).collect::<BTreeSet<_>>());
        }
    }
}
