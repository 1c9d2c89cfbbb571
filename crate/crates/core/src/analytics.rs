//! Closed-form memory and rate expressions of the hierarchical scheme,
//! memory sharing, coding delay and the KNMD region classifier.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::combinatorics::binom;
use crate::error::{Error, Result};
use crate::exact::{fmt_ratio, max_q, qb, qi, Q};
use crate::model::HierConfig;

/// Memories, rates and delays of one scheme at one operating point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatePoint {
    pub scheme: String,
    pub k1: usize,
    pub k2: usize,
    pub n_files: usize,
    pub t: Option<usize>,
    pub alpha: Option<Q>,
    pub m1: Q,
    pub m2: Q,
    pub m_bar: Q,
    pub r1: Q,
    pub r2: Q,
    pub r_bar: Q,
    pub r_sum: Q,
    pub t_conc: Q,
    pub t_seq: Q,
}

impl RatePoint {
    /// Builds a point and fills in the derived columns.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scheme: impl Into<String>,
        (k1, k2, n_files): (usize, usize, usize),
        t: Option<usize>,
        alpha: Option<Q>,
        m1: Q,
        m2: Q,
        r1: Q,
        r2: Q,
    ) -> Self {
        let m_bar = qi(k1 as i64) * &m1 + qi((k1 * k2) as i64) * &m2;
        let r_bar = &r1 + qi(k1 as i64) * &r2;
        let r_sum = &r1 + &r2;
        let t_conc = coding_delay(&r1, &r2, true);
        RatePoint {
            scheme: scheme.into(),
            k1,
            k2,
            n_files,
            t,
            alpha,
            m1,
            m2,
            m_bar,
            r1,
            r2,
            r_bar,
            t_seq: r_sum.clone(),
            r_sum,
            t_conc,
        }
    }
}

fn k_of(cfg: &HierConfig) -> i64 {
    cfg.k() as i64
}

/// `C(K-K2, t-K2) N / C(K,t)`: the layer-2 share cached at each mirror.
fn mirror_l2_fraction(k1: usize, k2: usize, n: usize, t: usize) -> Q {
    let k = (k1 * k2) as i64;
    qb(&binom(k - k2 as i64, t as i64 - k2 as i64)) * qi(n as i64) / qb(&binom(k, t as i64))
}

/// `[C(K-1,t-1) - C(K-K2,t-K2)] N / C(K,t)`: the layer-2 share at each user.
fn user_l2_fraction(k1: usize, k2: usize, n: usize, t: usize) -> Q {
    let k = (k1 * k2) as i64;
    let (t, k2) = (t as i64, k2 as i64);
    qb(&(binom(k - 1, t - 1) - binom(k - k2, t - k2))) * qi(n as i64) / qb(&binom(k, t))
}

/// Per-mirror and per-user cache sizes `(M1, M2)` in files.
pub fn memory_point(cfg: &HierConfig) -> (Q, Q) {
    let one_minus = Q::one() - &cfg.alpha;
    let m1 = &cfg.alpha * qi(cfg.k2 as i64) / qi(k_of(cfg))
        + &one_minus * mirror_l2_fraction(cfg.k1, cfg.k2, cfg.n_files, cfg.t);
    let m2 = one_minus * user_l2_fraction(cfg.k1, cfg.k2, cfg.n_files, cfg.t);
    (m1, m2)
}

/// `M2` on the line traced by `alpha` for fixed `(K1, K2, N, t)`.
pub fn m2_from_m1(k1: usize, k2: usize, n: usize, t: usize, m1: &Q) -> Result<Q> {
    let probe = HierConfig::new(k1, k2, n, t, Q::zero())?;
    let lo = mirror_l2_fraction(k1, k2, n, t);
    let c2 = user_l2_fraction(k1, k2, n, t);
    let apex = Q::one() / qi(k1 as i64);
    let in_range = if n > probe.k() {
        *m1 == lo
    } else {
        let (a, b) = if lo <= apex { (&lo, &apex) } else { (&apex, &lo) };
        m1 >= a && m1 <= b
    };
    if !in_range {
        return Err(Error::Range(format!(
            "M1={} is not on the t={t} line (endpoints {} and {})",
            fmt_ratio(m1),
            fmt_ratio(&lo),
            fmt_ratio(&apex)
        )));
    }
    if lo == apex {
        return Err(Error::Degenerate(format!("t={t} line is vertical at M1={}", fmt_ratio(&lo))));
    }
    Ok(c2 * (apex - m1) / (Q::one() / qi(k1 as i64) - lo))
}

/// `K1 M1 + K M2`.
pub fn global_memory(cfg: &HierConfig) -> Q {
    let (m1, m2) = memory_point(cfg);
    qi(cfg.k1 as i64) * m1 + qi(k_of(cfg)) * m2
}

/// The `alpha` at which the `t` line reaches global memory `m_bar`.
pub fn alpha_for_global_memory(k1: usize, k2: usize, n: usize, t: usize, m_bar: &Q) -> Result<Q> {
    let lo = global_memory(&HierConfig::new(k1, k2, n, t, Q::zero())?);
    if n > k1 * k2 {
        return if *m_bar == lo {
            Ok(Q::zero())
        } else {
            Err(Error::Range(format!("N > K fixes alpha = 0 and global memory {}", fmt_ratio(&lo))))
        };
    }
    let hi = global_memory(&HierConfig::new(k1, k2, n, t, Q::one())?);
    if lo == hi {
        return if *m_bar == lo {
            Ok(Q::zero())
        } else {
            Err(Error::Range(format!("t={t} line has constant global memory {}", fmt_ratio(&lo))))
        };
    }
    let alpha = (m_bar - &lo) / (&hi - &lo);
    if alpha.is_negative() || alpha > Q::one() {
        return Err(Error::Range(format!(
            "global memory {} outside [{}, {}] for t={t}",
            fmt_ratio(m_bar),
            fmt_ratio(if lo < hi { &lo } else { &hi }),
            fmt_ratio(if lo < hi { &hi } else { &lo })
        )));
    }
    Ok(alpha)
}

/// Server rate.
pub fn rate_r1(cfg: &HierConfig) -> Q {
    let (k, t) = (k_of(cfg), cfg.t as i64);
    &cfg.alpha * qi(cfg.n_files as i64 * (k - 1)) / qi(k)
        + (Q::one() - &cfg.alpha) * Q::new((k - t).into(), (t + 1).into())
}

fn check_tm(cfg: &HierConfig, t_m: usize) -> Result<()> {
    if t_m == 0 || t_m > cfg.k2 {
        return Err(Error::Range(format!("t_m={t_m} outside [1, {}]", cfg.k2)));
    }
    Ok(())
}

/// Rate of a mirror whose users demand `t_m` distinct files.
pub fn rate_r2(cfg: &HierConfig, t_m: usize) -> Result<Q> {
    check_tm(cfg, t_m)?;
    let (k, k2, t) = (k_of(cfg), cfg.k2 as i64, cfg.t as i64);
    let c = qb(&binom(k, t));
    let l2 = Q::new((k - t).into(), (t + 1).into())
        - (qb(&binom(k - k2, t + 1)) - qb(&binom(k - k2, t - k2)) * qi(t_m as i64)) / c;
    Ok(&cfg.alpha * qi(t_m as i64) + (Q::one() - &cfg.alpha) * l2)
}

/// Largest number of distinct files one mirror's users can demand.
pub fn worst_t_m(cfg: &HierConfig) -> usize {
    cfg.k2.min(cfg.n_files)
}

/// Worst-case mirror rate over all demand vectors.
pub fn rate_r2_worst(cfg: &HierConfig) -> Q {
    rate_r2(cfg, worst_t_m(cfg)).expect("worst t_m is in range")
}

/// Mirror rate when MU3 chunks are sent while the server is still
/// transmitting, so they do not add to the mirror's own slot.
pub fn concurrent_r2(cfg: &HierConfig, t_m: usize) -> Result<Q> {
    let (k, k2, t) = (k_of(cfg), cfg.k2 as i64, cfg.t as i64);
    let mu3 = (Q::one() - &cfg.alpha) * qi(t_m as i64) * qb(&binom(k - k2, t - k2)) / qb(&binom(k, t));
    Ok(rate_r2(cfg, t_m)? - mu3)
}

/// Delivery time: `max(R1, R2)` when both hops overlap, `R1 + R2` otherwise.
pub fn coding_delay(r1: &Q, r2: &Q, concurrent: bool) -> Q {
    if concurrent {
        max_q(r1, r2)
    } else {
        r1 + r2
    }
}

/// Full operating point of the hierarchical scheme.
pub fn composite(cfg: &HierConfig) -> RatePoint {
    let (m1, m2) = memory_point(cfg);
    RatePoint::new(
        "proposed",
        (cfg.k1, cfg.k2, cfg.n_files),
        Some(cfg.t),
        Some(cfg.alpha.clone()),
        m1,
        m2,
        rate_r1(cfg),
        rate_r2_worst(cfg),
    )
}

/// Barycentric weights of a target with respect to three points: weight
/// `xi` on the first, `eta` on the second, the rest on the third.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexWeights {
    pub xi: Q,
    pub eta: Q,
}

fn cross(ax: &Q, ay: &Q, bx: &Q, by: &Q) -> Q {
    ax * by - ay * bx
}

/// Solves for the convex weights placing `target = (M1, M2)` in the
/// triangle spanned by `points`. Collinear triples fall back to sharing
/// between the two outermost points.
pub fn convex_weights(points: [&RatePoint; 3], target: (&Q, &Q)) -> Result<ConvexWeights> {
    let [a, b, c] = points;
    let (tx, ty) = target;
    let (ux, uy) = (&a.m1 - &c.m1, &a.m2 - &c.m2);
    let (vx, vy) = (&b.m1 - &c.m1, &b.m2 - &c.m2);
    let (dx, dy) = (tx - &c.m1, ty - &c.m2);
    let outside = || Error::Hull(format!("target ({}, {}) is outside the hull", fmt_ratio(tx), fmt_ratio(ty)));
    let det = cross(&ux, &uy, &vx, &vy);
    if !det.is_zero() {
        let xi = cross(&dx, &dy, &vx, &vy) / &det;
        let eta = cross(&ux, &uy, &dx, &dy) / &det;
        if xi.is_negative() || eta.is_negative() || &xi + &eta > Q::one() {
            return Err(outside());
        }
        return Ok(ConvexWeights { xi, eta });
    }
    // Collinear: pick the farthest-apart pair and interpolate along it.
    let pts = [(&a.m1, &a.m2), (&b.m1, &b.m2), (&c.m1, &c.m2)];
    let dist = |i: usize, j: usize| {
        let (x, y) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
        &x * &x + &y * &y
    };
    let (i, j) =
        [(0, 1), (0, 2), (1, 2)].into_iter().max_by(|p, q| dist(p.0, p.1).cmp(&dist(q.0, q.1))).expect("three pairs");
    if dist(i, j).is_zero() {
        return Err(Error::Degenerate("all three points coincide".into()));
    }
    let (px, py) = (pts[j].0 - pts[i].0, pts[j].1 - pts[i].1);
    let (qx, qy) = (tx - pts[i].0, ty - pts[i].1);
    if !cross(&px, &py, &qx, &qy).is_zero() {
        return Err(outside());
    }
    // target = (1 - lam) * P_i + lam * P_j
    let lam = (&px * &qx + &py * &qy) / dist(i, j);
    if lam.is_negative() || lam > Q::one() {
        return Err(outside());
    }
    let mut w = [Q::zero(), Q::zero(), Q::zero()];
    w[i] = Q::one() - &lam;
    w[j] = lam;
    let [xi, eta, _] = w;
    Ok(ConvexWeights { xi, eta })
}

/// Memory sharing among three achievable points: each file is split in
/// proportion to the weights and each part served by its own scheme.
pub fn memory_share(points: [&RatePoint; 3], target: (&Q, &Q)) -> Result<RatePoint> {
    let w = convex_weights(points, target)?;
    let rest = Q::one() - &w.xi - &w.eta;
    let mix = |f: fn(&RatePoint) -> &Q| f(points[0]) * &w.xi + f(points[1]) * &w.eta + f(points[2]) * &rest;
    let p = points[0];
    Ok(RatePoint::new(
        "memory-shared",
        (p.k1, p.k2, p.n_files),
        None,
        None,
        mix(|p| &p.m1),
        mix(|p| &p.m2),
        mix(|p| &p.r1),
        mix(|p| &p.r2),
    ))
}

/// KNMD memory region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    I,
    II,
    III,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::I => "Region I",
            Region::II => "Region II",
            Region::III => "Region III",
        })
    }
}

/// Where the scheme's `t = K2` memory point falls among the KNMD regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionReport {
    pub region_a: Q,
    /// `None` when `C(K,K2) = K K1`; the `M1 <= N/4` condition then holds for every alpha.
    pub region_b: Option<Q>,
    pub alpha_threshold: Q,
    pub region: Region,
    /// `K1 > K2` (with `K1, K2 >= 2`), which forces Region II.
    pub forces_region_ii: bool,
    /// `2 <= K1 <= K2` except `K1 = K2 = 2`, which rules out Region III.
    pub excludes_region_iii: bool,
}

/// `A = K2^2 - K (K2 - 1) / C(K, K2)`.
pub fn region_a(k1: usize, k2: usize) -> Q {
    let k = (k1 * k2) as i64;
    qi((k2 * k2) as i64) - qi(k * (k2 as i64 - 1)) / qb(&binom(k, k2 as i64))
}

/// `B = (K K1 / 4)(C(K,K2) - 4) / (C(K,K2) - K K1)`.
pub fn region_b(k1: usize, k2: usize) -> Option<Q> {
    let k = (k1 * k2) as i64;
    let c = qb(&binom(k, k2 as i64));
    let den = &c - qi(k * k1 as i64);
    if den.is_zero() {
        return None;
    }
    Some(qi(k * k1 as i64) / qi(4) * (c - qi(4)) / den)
}

/// `(A - K) / (A - 1/K1)`.
pub fn alpha_threshold(k1: usize, k2: usize) -> Q {
    let a = region_a(k1, k2);
    (&a - qi((k1 * k2) as i64)) / (a - Q::one() / qi(k1 as i64))
}

pub fn binomial_exceeds_users(k1: usize, k2: usize) -> bool {
    let k = (k1 * k2) as i64;
    binom(k, k2 as i64) > (k * k2 as i64).into()
}

pub fn region_classify(cfg: &HierConfig) -> Result<RegionReport> {
    if cfg.t != cfg.k2 {
        return Err(Error::Scope(format!("region classification needs t = K2 = {} (got t={})", cfg.k2, cfg.t)));
    }
    if cfg.n_files != cfg.k() {
        return Err(Error::Scope(format!("region classification needs N = K = {} (got N={})", cfg.k(), cfg.n_files)));
    }
    let (k1, k2) = (cfg.k1, cfg.k2);
    let region_a = region_a(k1, k2);
    let region_b = region_b(k1, k2);
    let alpha_threshold = alpha_threshold(k1, k2);
    let region = if cfg.alpha > alpha_threshold {
        Region::II
    } else if region_b.as_ref().is_none_or(|b| cfg.alpha <= *b) {
        Region::I
    } else {
        Region::III
    };
    Ok(RegionReport {
        region_a,
        region_b,
        alpha_threshold,
        region,
        forces_region_ii: k2 >= 2 && k1 > k2,
        excludes_region_iii: k1 >= 2 && k1 <= k2 && !(k1 == 2 && k2 == 2),
    })
}
