//! Byte-level placement and two-hop delivery of the hierarchical scheme.
//!
//! Every decoding step is constructive: a mirror or user only XORs symbols it
//! has received or cached, looked up by their generator sets. Nothing here
//! reads the library after delivery, so a successful decode is evidence that
//! the delivered symbols suffice.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::Zero;

use crate::combinatorics::{k_subsets, Subset};
use crate::error::{Error, Result};
use crate::exact::Q;
use crate::model::{xor_into, ChunkId, CodedSymbol, DemandProfile, FilePartition, HierConfig, Library};

/// Delivery step that produced a transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Sm1,
    Sm2,
    Sm3,
    Mu1,
    Mu2,
    Mu3,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::Sm1 => "SM1",
            Step::Sm2 => "SM2",
            Step::Sm3 => "SM3",
            Step::Mu1 => "MU1",
            Step::Mu2 => "MU2",
            Step::Mu3 => "MU3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    pub step: Step,
    pub symbol: CodedSymbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransmissionLog {
    pub server_msgs: Vec<Transmission>,
    pub mirror_msgs: Vec<Vec<Transmission>>,
}

impl TransmissionLog {
    pub fn count(msgs: &[Transmission], step: Step) -> usize {
        msgs.iter().filter(|m| m.step == step).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub mirror_caches: Vec<Vec<CodedSymbol>>,
    pub user_caches: Vec<Vec<CodedSymbol>>,
}

pub fn cache_size(cache: &[CodedSymbol]) -> Q {
    cache.iter().fold(Q::zero(), |acc, s| acc + &s.size_files)
}

/// Known symbols indexed by their sorted generator sets.
pub(crate) struct Book<'a>(HashMap<&'a [ChunkId], &'a [u8]>);

impl<'a> Book<'a> {
    pub(crate) fn new() -> Self {
        Book(HashMap::new())
    }

    pub(crate) fn add<I: IntoIterator<Item = &'a CodedSymbol>>(&mut self, syms: I) {
        for s in syms {
            self.0.insert(s.generators(), &s.payload);
        }
    }

    pub(crate) fn get(&self, gens: &[ChunkId]) -> Option<&'a [u8]> {
        let mut key = gens.to_vec();
        key.sort();
        self.0.get(key.as_slice()).copied()
    }

    pub(crate) fn need(&self, gens: &[ChunkId]) -> std::result::Result<&'a [u8], String> {
        self.get(gens).ok_or_else(|| {
            let names: Vec<String> = gens.iter().map(ToString::to_string).collect();
            names.join(" + ")
        })
    }
}

fn l1(file: usize, user: usize) -> ChunkId {
    ChunkId::L1 { file, user }
}

fn l2(file: usize, subset: Subset) -> ChunkId {
    ChunkId::L2 { file, subset }
}

/// Generators of the cached coded symbol `XOR_n W1_{n,user}`.
pub(crate) fn coded_l1_key(n_files: usize, user: usize) -> Vec<ChunkId> {
    (0..n_files).map(|n| l1(n, user)).collect()
}

/// Recovers all layer-1 chunks of each file in `files`.
///
/// `anchor(n)` is a user demanding `n` whose coded cache entry is available
/// in `book`. The anchor's own chunk comes from peeling SM1 symbols off the
/// coded entry; chunks of non-demanders come straight from SM1; the other
/// demanders' chunks come from SM2 pairs, routed through the base-set member
/// when the anchor is not one.
pub(crate) fn recover_layer1(
    k: usize,
    profile: &DemandProfile,
    files: &BTreeSet<usize>,
    anchor: impl Fn(usize) -> usize,
    book: &Book<'_>,
) -> std::result::Result<BTreeMap<ChunkId, Vec<u8>>, String> {
    let n_files = profile.demanders.len();
    let mut out = BTreeMap::new();
    for &n0 in files {
        let lam = anchor(n0);
        let mut own = book.need(&coded_l1_key(n_files, lam))?.to_vec();
        for n in (0..n_files).filter(|&n| n != n0) {
            xor_into(&mut own, book.need(&[l1(n, lam)])?);
        }
        for j in (0..k).filter(|&j| profile.demands[j] != n0) {
            out.insert(l1(n0, j), book.need(&[l1(n0, j)])?.to_vec());
        }
        let base = profile.base_of_file(n0).ok_or_else(|| format!("base set for file {}", n0 + 1))?;
        let (hub, hub_val) = if base == lam {
            (lam, own.clone())
        } else {
            let mut v = book.need(&[l1(n0, lam), l1(n0, base)])?.to_vec();
            xor_into(&mut v, &own);
            (base, v)
        };
        for &j in &profile.demanders[n0] {
            let val = if j == lam {
                own.clone()
            } else if j == hub {
                hub_val.clone()
            } else {
                let mut v = book.need(&[l1(n0, j), l1(n0, hub)])?.to_vec();
                xor_into(&mut v, &hub_val);
                v
            };
            out.insert(l1(n0, j), val);
        }
    }
    Ok(out)
}

fn check_sim_size(cfg: &HierConfig) -> Result<()> {
    if cfg.k() > 64 {
        return Err(Error::Scope(format!("K={} exceeds the 64-user simulation limit", cfg.k())));
    }
    Ok(())
}

pub(crate) fn check_library_size(lib: &Library, n_files: usize, part: &FilePartition) -> Result<()> {
    if lib.n_files() != n_files || lib.file_bytes() != part.file_bytes {
        return Err(Error::Range(format!(
            "library has {} files of {} bytes, expected {} of {}",
            lib.n_files(),
            lib.file_bytes(),
            n_files,
            part.file_bytes
        )));
    }
    Ok(())
}

fn check_library(cfg: &HierConfig, lib: &Library, part: &FilePartition) -> Result<()> {
    check_library_size(lib, cfg.n_files, part)
}

/// Whether the mirror caches `W2_{n,S}` itself (only possible for `t >= K2`).
fn mirror_holds(cfg: &HierConfig, mask: Subset, s: Subset) -> bool {
    cfg.t >= cfg.k2 && mask.is_subset_of(s)
}

/// Fills mirror and user caches.
pub fn place(cfg: &HierConfig, lib: &Library, part: &FilePartition) -> Result<Placement> {
    check_sim_size(cfg)?;
    check_library(cfg, lib, part)?;
    let (k, n_files) = (cfg.k(), cfg.n_files);
    let mut mirror_caches = Vec::with_capacity(cfg.k1);
    let mut user_caches = vec![Vec::new(); k];
    for m in 0..cfg.k1 {
        let mask = cfg.mirror_mask(m)?;
        let mut cache = Vec::new();
        if cfg.has_layer1() {
            for lam in mask.iter() {
                cache.push(CodedSymbol::encode(lib, part, coded_l1_key(n_files, lam))?);
            }
        }
        if cfg.has_layer2() {
            for n in 0..n_files {
                for s in k_subsets(k, cfg.t).filter(|&s| mirror_holds(cfg, mask, s)) {
                    cache.push(CodedSymbol::encode(lib, part, vec![l2(n, s)])?);
                }
            }
            for user in mask.iter() {
                for n in 0..n_files {
                    for s in k_subsets(k, cfg.t) {
                        if s.contains(user) && !mirror_holds(cfg, mask, s) {
                            user_caches[user].push(CodedSymbol::encode(lib, part, vec![l2(n, s)])?);
                        }
                    }
                }
            }
        }
        mirror_caches.push(cache);
    }
    Ok(Placement { mirror_caches, user_caches })
}

/// Generators of the SM3 symbol for the `(t+1)`-subset `t_set`.
fn sm3_key(profile: &DemandProfile, t_set: Subset) -> Vec<ChunkId> {
    t_set.iter().map(|s| l2(profile.demands[s], t_set.without(s))).collect()
}

/// Server broadcast: SM1, SM2 (layer 1) and SM3 (layer 2).
pub fn server_deliver(
    cfg: &HierConfig,
    lib: &Library,
    part: &FilePartition,
    profile: &DemandProfile,
) -> Result<Vec<Transmission>> {
    check_sim_size(cfg)?;
    check_library(cfg, lib, part)?;
    let mut msgs = if cfg.has_layer1() { layer1_server_msgs(lib, part, profile)? } else { Vec::new() };
    if cfg.has_layer2() {
        for t_set in k_subsets(cfg.k(), cfg.t + 1) {
            let symbol = CodedSymbol::encode(lib, part, sm3_key(profile, t_set))?;
            msgs.push(Transmission { step: Step::Sm3, symbol });
        }
    }
    Ok(msgs)
}

/// SM1 (chunks of files a user does not want) and SM2 (pairs of chunks of
/// the same file, one of them owned by the file's base-set user).
pub(crate) fn layer1_server_msgs(
    lib: &Library,
    part: &FilePartition,
    profile: &DemandProfile,
) -> Result<Vec<Transmission>> {
    if profile.base_set.is_none() {
        return Err(Error::Demand("layer 1 needs every file demanded".into()));
    }
    let (k, n_files) = (profile.demands.len(), profile.demanders.len());
    let mut msgs = Vec::new();
    let mut emit = |step, gens| -> Result<()> {
        msgs.push(Transmission { step, symbol: CodedSymbol::encode(lib, part, gens)? });
        Ok(())
    };
    for n in 0..n_files {
        for i in (0..k).filter(|&i| profile.demands[i] != n) {
            emit(Step::Sm1, vec![l1(n, i)])?;
        }
    }
    for n in 0..n_files {
        let base = profile.base_of_file(n).expect("checked above");
        for &i in profile.demanders[n].iter().filter(|&&i| i != base) {
            emit(Step::Sm2, vec![l1(n, i), l1(n, base)])?;
        }
    }
    Ok(msgs)
}

/// Everything mirror `m` forwards, recovered from its cache and the server
/// broadcast.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstructed {
    pub mirror: usize,
    /// `W1_{n,i}` for every `n` in `D_m` and every user `i`.
    pub layer1: BTreeMap<ChunkId, Vec<u8>>,
    /// Forwarded SM3 symbols touching `S_m`, in lexicographic subset order.
    pub mu2: Vec<CodedSymbol>,
    /// Cached `W2_{n,S}` with `n` in `D_m` and `S_m ⊆ S`.
    pub mu3: Vec<CodedSymbol>,
}

/// Generators of the MU2 symbol for `t_set` after the mirror strips the
/// terms it caches itself (those whose subset contains `S_m`).
fn mu2_key(cfg: &HierConfig, profile: &DemandProfile, mask: Subset, t_set: Subset) -> Vec<ChunkId> {
    t_set
        .iter()
        .filter(|&s| !mirror_holds(cfg, mask, t_set.without(s)))
        .map(|s| l2(profile.demands[s], t_set.without(s)))
        .collect()
}

pub fn mirror_reconstruct(
    cfg: &HierConfig,
    part: &FilePartition,
    m: usize,
    mirror_cache: &[CodedSymbol],
    server_msgs: &[Transmission],
    profile: &DemandProfile,
) -> Result<Reconstructed> {
    let mask = cfg.mirror_mask(m)?;
    let k = cfg.k();
    let fail = |what: String| Error::Reconstruct { mirror: m, what };
    let mut book = Book::new();
    book.add(mirror_cache);
    book.add(server_msgs.iter().map(|t| &t.symbol));

    let files = &profile.per_mirror_files[m];
    let layer1 = if cfg.has_layer1() {
        let anchor = |n: usize| mask.iter().find(|&u| profile.demands[u] == n).expect("n in D_m");
        recover_layer1(k, profile, files, anchor, &book).map_err(fail)?
    } else {
        BTreeMap::new()
    };

    let mut mu2 = Vec::new();
    let mut mu3 = Vec::new();
    if cfg.has_layer2() {
        let l2_size = part.size_files(&l2(0, Subset::range(0, cfg.t)));
        for t_set in k_subsets(k, cfg.t + 1).filter(|s| s.intersects(mask)) {
            let mut payload = book.need(&sm3_key(profile, t_set)).map_err(fail)?.to_vec();
            for s in t_set.iter().filter(|&s| mirror_holds(cfg, mask, t_set.without(s))) {
                let own = l2(profile.demands[s], t_set.without(s));
                xor_into(&mut payload, book.need(&[own]).map_err(fail)?);
            }
            mu2.push(CodedSymbol::from_parts(mu2_key(cfg, profile, mask, t_set), payload, l2_size.clone())?);
        }
        for &n in files {
            for s in k_subsets(k, cfg.t).filter(|&s| mirror_holds(cfg, mask, s)) {
                let payload = book.need(&[l2(n, s)]).map_err(fail)?.to_vec();
                mu3.push(CodedSymbol::from_parts(vec![l2(n, s)], payload, l2_size.clone())?);
            }
        }
    }
    Ok(Reconstructed { mirror: m, layer1, mu2, mu3 })
}

/// Mirror broadcast to its users: MU1, MU2, MU3.
pub fn mirror_deliver(
    cfg: &HierConfig,
    part: &FilePartition,
    rec: &Reconstructed,
    profile: &DemandProfile,
) -> Result<Vec<Transmission>> {
    let mut msgs = Vec::new();
    let files = if cfg.has_layer1() { &profile.per_mirror_files[rec.mirror] } else { &BTreeSet::new() };
    for &n in files {
        for i in 0..cfg.k() {
            let id = l1(n, i);
            let payload =
                rec.layer1.get(&id).ok_or_else(|| Error::Reconstruct { mirror: rec.mirror, what: id.to_string() })?;
            let symbol = CodedSymbol::from_parts(vec![id], payload.clone(), part.size_files(&id))?;
            msgs.push(Transmission { step: Step::Mu1, symbol });
        }
    }
    msgs.extend(rec.mu2.iter().map(|s| Transmission { step: Step::Mu2, symbol: s.clone() }));
    msgs.extend(rec.mu3.iter().map(|s| Transmission { step: Step::Mu3, symbol: s.clone() }));
    Ok(msgs)
}

/// Decodes user `k`'s demanded file from its cache and its mirror's broadcast.
pub fn user_decode(
    cfg: &HierConfig,
    part: &FilePartition,
    k: usize,
    user_cache: &[CodedSymbol],
    mirror_msgs: &[Transmission],
    profile: &DemandProfile,
) -> Result<Vec<u8>> {
    let m = cfg.mirror_of_user(k);
    let mask = cfg.mirror_mask(m)?;
    let want = profile.demands[k];
    let fail = |what: String| Error::Decode { user: k, what };
    let mut cache = Book::new();
    cache.add(user_cache);
    let mut heard = Book::new();
    heard.add(mirror_msgs.iter().map(|t| &t.symbol));

    let mut out = vec![0u8; part.file_bytes];
    if cfg.has_layer1() {
        for i in 0..cfg.k() {
            let id = l1(want, i);
            out[part.range(&id)].copy_from_slice(heard.need(&[id]).map_err(fail)?);
        }
    }
    if cfg.has_layer2() {
        for s in k_subsets(cfg.k(), cfg.t) {
            let id = l2(want, s);
            let bytes = if s.contains(k) {
                let src = if mirror_holds(cfg, mask, s) { &heard } else { &cache };
                src.need(&[id]).map_err(fail)?.to_vec()
            } else {
                let t_set = s.with(k);
                let key = mu2_key(cfg, profile, mask, t_set);
                let mut v = heard.need(&key).map_err(fail)?.to_vec();
                for side in key.iter().filter(|&&g| g != id) {
                    xor_into(&mut v, cache.need(&[*side]).map_err(fail)?);
                }
                v
            };
            out[part.range(&id)].copy_from_slice(&bytes);
        }
    }
    Ok(out)
}

/// Rates measured from a transmission log, in file units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasuredRates {
    pub r1: Q,
    pub r2_per_mirror: Vec<Q>,
    pub r2_worst: Q,
}

pub fn measured_rates(log: &TransmissionLog) -> MeasuredRates {
    let total = |msgs: &[Transmission]| msgs.iter().fold(Q::zero(), |a, t| a + &t.symbol.size_files);
    let r1 = total(&log.server_msgs);
    let r2_per_mirror: Vec<Q> = log.mirror_msgs.iter().map(|m| total(m)).collect();
    let r2_worst = r2_per_mirror.iter().max().cloned().unwrap_or_else(Q::zero);
    MeasuredRates { r1, r2_per_mirror, r2_worst }
}

/// Outcome of a full placement/delivery/decoding run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub profile: DemandProfile,
    pub placement: Placement,
    pub reconstructed: Vec<Reconstructed>,
    pub log: TransmissionLog,
    pub decoded: Vec<Vec<u8>>,
    pub rates: MeasuredRates,
}

/// Checks a mirror's recovered symbols against the library.
pub fn check_reconstruction(lib: &Library, part: &FilePartition, rec: &Reconstructed) -> Result<()> {
    let bad = |what: String| Error::Reconstruct { mirror: rec.mirror, what };
    for (id, bytes) in &rec.layer1 {
        if lib.chunk(part, id) != bytes.as_slice() {
            return Err(bad(format!("{id} (wrong bytes)")));
        }
    }
    for s in rec.mu2.iter().chain(&rec.mu3) {
        if CodedSymbol::encode(lib, part, s.generators().to_vec())?.payload != s.payload {
            return Err(bad(format!("{s} (wrong bytes)")));
        }
    }
    Ok(())
}

/// Runs place, server delivery, mirror reconstruction and delivery, and user
/// decoding, and compares every recovered byte with the library.
pub fn simulate(cfg: &HierConfig, lib: &Library, part: &FilePartition, demands: &[usize]) -> Result<Simulation> {
    let profile = DemandProfile::new(cfg, demands)?;
    let placement = place(cfg, lib, part)?;
    let server_msgs = server_deliver(cfg, lib, part, &profile)?;
    let mut reconstructed = Vec::with_capacity(cfg.k1);
    let mut mirror_msgs = Vec::with_capacity(cfg.k1);
    for m in 0..cfg.k1 {
        let rec = mirror_reconstruct(cfg, part, m, &placement.mirror_caches[m], &server_msgs, &profile)?;
        check_reconstruction(lib, part, &rec)?;
        mirror_msgs.push(mirror_deliver(cfg, part, &rec, &profile)?);
        reconstructed.push(rec);
    }
    let mut decoded = Vec::with_capacity(cfg.k());
    for k in 0..cfg.k() {
        let m = cfg.mirror_of_user(k);
        let file = user_decode(cfg, part, k, &placement.user_caches[k], &mirror_msgs[m], &profile)?;
        if file != lib.file(profile.demands[k]) {
            return Err(Error::Decode { user: k, what: format!("file {} (wrong bytes)", profile.demands[k] + 1) });
        }
        decoded.push(file);
    }
    let log = TransmissionLog { server_msgs, mirror_msgs };
    let rates = measured_rates(&log);
    Ok(Simulation { profile, placement, reconstructed, log, decoded, rates })
}
