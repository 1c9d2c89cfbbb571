//! Rate formulas of the comparison schemes, evaluated exactly.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::analytics::{RatePoint, Region};
use crate::combinatorics::binom;
use crate::error::{Error, Result};
use crate::exact::{fmt_ratio, q, qb, qi, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Knmd,
    Zwxwl,
    Zwxwll,
    Wwcy,
    Kwc,
    Lzx,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [Scheme::Knmd, Scheme::Zwxwl, Scheme::Zwxwll, Scheme::Wwcy, Scheme::Kwc, Scheme::Lzx];
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Knmd => "KNMD",
            Scheme::Zwxwl => "ZWXWL",
            Scheme::Zwxwll => "ZWXWLL",
            Scheme::Wwcy => "WWCY",
            Scheme::Kwc => "KWC",
            Scheme::Lzx => "LZX",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown scheme {s:?}")))
    }
}

/// Default substitute for a prescribed `beta = 0`.
pub fn default_beta_floor() -> Q {
    q(1, 100)
}

/// Memory split `(alpha, beta)` between the two sub-systems of a
/// decentralized hierarchical scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub alpha: Q,
    pub beta: Q,
}

/// Scheme, optional fixed split, and the `beta = 0` substitute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineParams {
    pub scheme: Scheme,
    pub split: Option<Split>,
    pub beta_floor: Q,
}

impl BaselineParams {
    pub fn new(scheme: Scheme) -> Self {
        BaselineParams { scheme, split: None, beta_floor: default_beta_floor() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta_floor.is_positive() || self.beta_floor > Q::one() {
            return Err(Error::Range(format!("beta floor {} outside (0, 1]", fmt_ratio(&self.beta_floor))));
        }
        if let Some(s) = &self.split {
            for v in [&s.alpha, &s.beta] {
                if v.is_negative() || *v > Q::one() {
                    return Err(Error::Range(format!("split component {} outside [0, 1]", fmt_ratio(v))));
                }
            }
        }
        Ok(())
    }
}

/// A two-layer memory point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemPoint {
    pub k1: usize,
    pub k2: usize,
    pub n: usize,
    pub m1: Q,
    pub m2: Q,
}

impl MemPoint {
    pub fn new(k1: usize, k2: usize, n: usize, m1: Q, m2: Q) -> Result<Self> {
        let nq = qi(n as i64);
        if k1 == 0 || k2 == 0 || n == 0 {
            return Err(Error::Range("K1, K2 and N must be >= 1".into()));
        }
        for (name, v) in [("M1", &m1), ("M2", &m2)] {
            if v.is_negative() || *v > nq {
                return Err(Error::Range(format!("{name}={} outside [0, {n}]", fmt_ratio(v))));
            }
        }
        Ok(MemPoint { k1, k2, n, m1, m2 })
    }

    fn k(&self) -> usize {
        self.k1 * self.k2
    }

    fn nq(&self) -> Q {
        qi(self.n as i64)
    }

    /// `M1 + K2 M2`, the quantity separating the regimes.
    fn spread(&self) -> Q {
        &self.m1 + qi(self.k2 as i64) * &self.m2
    }

    pub fn into_rate_point(&self, scheme: impl Into<String>, r1: Q, r2: Q) -> RatePoint {
        RatePoint::new(scheme, (self.k1, self.k2, self.n), None, None, self.m1.clone(), self.m2.clone(), r1, r2)
    }
}

/// Decentralized single-layer rate `[(1-q)/q (1-(1-q)^k)]^+`.
pub fn r_decentralized(mem_frac: &Q, k: usize) -> Result<Q> {
    if !mem_frac.is_positive() {
        return Err(Error::Singular(format!(
            "r(q, {k}) needs q > 0 (got {}); substitute a positive beta",
            fmt_ratio(mem_frac)
        )));
    }
    if *mem_frac >= Q::one() {
        return Ok(Q::zero());
    }
    let miss = Q::one() - mem_frac;
    let v = &miss / mem_frac * (Q::one() - num_traits::pow(miss.clone(), k));
    Ok(if v.is_negative() { Q::zero() } else { v })
}

/// `w * f()`, treating a zero-weight sub-system as absent.
fn term(w: &Q, f: impl FnOnce() -> Result<Q>) -> Result<Q> {
    if w.is_zero() {
        Ok(Q::zero())
    } else {
        Ok(w * f()?)
    }
}

/// Memory fractions `(M1/(aN), beta M2/(aN), (1-beta) M2/((1-a)N))`; the
/// first two are meaningful only for `a > 0`, the last only for `a < 1`.
fn fractions(p: &MemPoint, s: &Split) -> (Q, Q, Q) {
    let n = p.nq();
    let a = &s.alpha;
    let oma = Q::one() - a;
    let upper = |num: Q| if a.is_zero() { Q::zero() } else { num / (a * &n) };
    let lower = if oma.is_zero() { Q::zero() } else { (Q::one() - &s.beta) * &p.m2 / (&oma * &n) };
    (upper(p.m1.clone()), upper(&s.beta * &p.m2), lower)
}

fn shared_r2(p: &MemPoint, s: &Split) -> Result<Q> {
    let (_, f_b, f_low) = fractions(p, s);
    let oma = Q::one() - &s.alpha;
    Ok(term(&s.alpha, || r_decentralized(&f_b, p.k2))? + term(&oma, || r_decentralized(&f_low, p.k2))?)
}

fn lower_r1(p: &MemPoint, s: &Split) -> Result<Q> {
    let (_, _, f_low) = fractions(p, s);
    term(&(Q::one() - &s.alpha), || r_decentralized(&f_low, p.k()))
}

pub fn knmd_rates(p: &MemPoint, s: &Split) -> Result<(Q, Q)> {
    let (f_1, _, _) = fractions(p, s);
    let k2 = qi(p.k2 as i64);
    let r1 = term(&s.alpha, || Ok(&k2 * r_decentralized(&f_1, p.k1)?))? + lower_r1(p, s)?;
    Ok((r1, shared_r2(p, s)?))
}

pub fn zwxwll_rates(p: &MemPoint, s: &Split) -> Result<(Q, Q)> {
    let (f_1, f_b, _) = fractions(p, s);
    let k2 = qi(p.k2 as i64);
    let uncached = Q::one() - &f_b;
    let uncached = if uncached.is_negative() { Q::zero() } else { uncached };
    let r1 = term(&s.alpha, || Ok(&k2 * r_decentralized(&f_1, p.k1)? * uncached))? + lower_r1(p, s)?;
    Ok((r1, shared_r2(p, s)?))
}

pub fn wwcy_rates(p: &MemPoint, s: &Split) -> Result<(Q, Q)> {
    let (f_1, f_b, _) = fractions(p, s);
    let r1 = term(&s.alpha, || Ok(r_decentralized(&f_1, p.k1)? * r_decentralized(&f_b, p.k2)?))? + lower_r1(p, s)?;
    Ok((r1, shared_r2(p, s)?))
}

/// A split chosen from a scheme's menu, with the rates it yields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleEval {
    pub label: &'static str,
    pub split: Split,
    /// The menu prescribed `beta = 0` and the floor was used instead.
    pub beta_substituted: bool,
    pub r1: Q,
    pub r2: Q,
}

fn tuple(label: &'static str, alpha: Q, beta: Q, beta_floor: &Q) -> (&'static str, Split, bool) {
    if beta.is_zero() && alpha.is_positive() {
        (label, Split { alpha, beta: beta_floor.clone() }, true)
    } else {
        (label, Split { alpha, beta }, false)
    }
}

fn evaluate(
    p: &MemPoint,
    menu: Vec<(&'static str, Split, bool)>,
    rates: fn(&MemPoint, &Split) -> Result<(Q, Q)>,
) -> Result<Vec<TupleEval>> {
    menu.into_iter()
        .map(|(label, split, beta_substituted)| {
            let (r1, r2) = rates(p, &split)?;
            Ok(TupleEval { label, split, beta_substituted, r1, r2 })
        })
        .collect()
}

/// `M1 / (M1 + K2 M2)`, or 0 at the origin.
fn tuple2_alpha(p: &MemPoint) -> Q {
    let s = p.spread();
    if s.is_zero() {
        Q::zero()
    } else {
        &p.m1 / s
    }
}

/// KNMD region of a memory point.
pub fn knmd_region(p: &MemPoint) -> Region {
    let n = p.nq();
    if p.spread() < n {
        Region::II
    } else if p.m1 <= n / qi(4) {
        Region::I
    } else {
        Region::III
    }
}

/// The KNMD split prescribed for the point's region.
pub fn knmd_optimal_tuple(p: &MemPoint, beta_floor: &Q) -> Result<(TupleEval, Region)> {
    let region = knmd_region(p);
    let m1n = &p.m1 / p.nq();
    let t = match region {
        Region::I => tuple("I", m1n.clone(), m1n, beta_floor),
        Region::II => tuple("II", tuple2_alpha(p), Q::zero(), beta_floor),
        Region::III => tuple("III", m1n, q(1, 4), beta_floor),
    };
    let eval = evaluate(p, vec![t], knmd_rates)?.remove(0);
    Ok((eval, region))
}

/// Whether the point is in the `M1 + K2 M2 >= N` regime.
pub fn regime_one(p: &MemPoint) -> bool {
    p.spread() >= p.nq()
}

pub fn zwxwll_menu(p: &MemPoint, beta_floor: &Q) -> Result<Vec<TupleEval>> {
    let m1n = &p.m1 / p.nq();
    let menu = if regime_one(p) {
        vec![
            tuple("I", m1n.clone(), m1n, beta_floor),
            tuple("II", tuple2_alpha(p), Q::zero(), beta_floor),
            tuple("III", Q::one(), Q::one(), beta_floor),
        ]
    } else {
        vec![tuple("I", m1n.clone(), m1n.clone(), beta_floor), tuple("II", m1n, q(1, 2), beta_floor)]
    };
    evaluate(p, menu, zwxwll_rates)
}

/// Menu entry with the smallest mirror rate, ties broken by server rate.
pub fn zwxwll_best(p: &MemPoint, beta_floor: &Q) -> Result<TupleEval> {
    let menu = zwxwll_menu(p, beta_floor)?;
    Ok(menu.into_iter().min_by(|a, b| a.r2.cmp(&b.r2).then_with(|| a.r1.cmp(&b.r1))).expect("menu is non-empty"))
}

pub fn wwcy_menu(p: &MemPoint, beta_floor: &Q) -> Result<Vec<TupleEval>> {
    let m1n = &p.m1 / p.nq();
    let menu = vec![tuple("I", m1n.clone(), m1n, beta_floor), tuple("II", tuple2_alpha(p), Q::zero(), beta_floor)];
    evaluate(p, menu, wwcy_rates)
}

/// Tuple I in the `M1 + K2 M2 >= N` regime, Tuple II otherwise.
pub fn wwcy_best(p: &MemPoint, beta_floor: &Q) -> Result<TupleEval> {
    let idx = if regime_one(p) { 0 } else { 1 };
    Ok(wwcy_menu(p, beta_floor)?.remove(idx))
}

pub fn zwxwl_rates(p: &MemPoint) -> (Q, Q) {
    let n = p.nq();
    let (a, b) = (&p.m1 / &n, &p.m2 / &n);
    let r1 = qi(p.k() as i64) * (Q::one() - &a) * (Q::one() - &b) / (Q::one() + qi(p.k1 as i64) * &a);
    let r2 = qi(p.k2 as i64) * (Q::one() - &b) / (Q::one() + qi(p.k2 as i64) * &b);
    (r1, r2)
}

/// ZWXWL points on the grid `M1 = iN/K1`, `M2 = jN/K2`.
pub fn zwxwl_grid(k1: usize, k2: usize, n: usize) -> Vec<RatePoint> {
    let mut out = Vec::new();
    for i in 0..=k1 {
        for j in 0..=k2 {
            let p = MemPoint { k1, k2, n, m1: q((i * n) as i64, k1 as i64), m2: q((j * n) as i64, k2 as i64) };
            let (r1, r2) = zwxwl_rates(&p);
            out.push(p.into_rate_point(Scheme::Zwxwl.to_string(), r1, r2));
        }
    }
    out
}

/// Lower convex hull of points in the `(global memory, composite rate)` plane.
pub fn lower_hull(points: &[RatePoint]) -> Vec<RatePoint> {
    let mut pts: Vec<&RatePoint> = points.iter().collect();
    pts.sort_by(|a, b| a.m_bar.cmp(&b.m_bar).then_with(|| a.r_bar.cmp(&b.r_bar)));
    pts.dedup_by(|b, a| a.m_bar == b.m_bar);
    let mut hull: Vec<&RatePoint> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let turn = (&a.m_bar - &o.m_bar) * (&p.r_bar - &o.r_bar) - (&a.r_bar - &o.r_bar) * (&p.m_bar - &o.m_bar);
            if turn.is_positive() {
                break;
            }
            hull.pop();
        }
        hull.push(p);
    }
    hull.into_iter().cloned().collect()
}

/// Memory sharing along a lower hull: linear interpolation of every
/// memory and rate column between the two vertices bracketing `m_bar`.
pub fn envelope_at(hull: &[RatePoint], m_bar: &Q, scheme: &str) -> Result<RatePoint> {
    let out = || Error::Hull(format!("global memory {} outside the achievable span", fmt_ratio(m_bar)));
    let first = hull.first().ok_or_else(out)?;
    let last = hull.last().ok_or_else(out)?;
    if *m_bar < first.m_bar || *m_bar > last.m_bar {
        return Err(out());
    }
    let i = hull.iter().position(|p| p.m_bar >= *m_bar).expect("within span");
    let b = &hull[i];
    if b.m_bar == *m_bar || i == 0 {
        let mut p = b.clone();
        p.scheme = scheme.into();
        return Ok(p);
    }
    let a = &hull[i - 1];
    let lam = (m_bar - &a.m_bar) / (&b.m_bar - &a.m_bar);
    let mix = |x: &Q, y: &Q| x + (y - x) * &lam;
    Ok(RatePoint::new(
        scheme,
        (a.k1, a.k2, a.n_files),
        None,
        None,
        mix(&a.m1, &b.m1),
        mix(&a.m2, &b.m2),
        mix(&a.r1, &b.r1),
        mix(&a.r2, &b.r2),
    ))
}

/// Grid points with one cache layer empty.
pub fn zwxwl_axis_points(k1: usize, k2: usize, n: usize) -> Vec<RatePoint> {
    zwxwl_grid(k1, k2, n).into_iter().filter(|p| p.m1.is_zero() || p.m2.is_zero()).collect()
}

/// Memory sharing between single-layer ZWXWL points, as used for the
/// comparison tables.
pub fn zwxwl_envelope(k1: usize, k2: usize, n: usize, m_bar: &Q) -> Result<RatePoint> {
    envelope_at(&lower_hull(&zwxwl_axis_points(k1, k2, n)), m_bar, "ZWXWL")
}

/// Memory sharing over the whole ZWXWL grid.
pub fn zwxwl_full_envelope(k1: usize, k2: usize, n: usize, m_bar: &Q) -> Result<RatePoint> {
    envelope_at(&lower_hull(&zwxwl_grid(k1, k2, n)), m_bar, "ZWXWL")
}

/// KWC operating point for parameter `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KwcPoint {
    pub r1: Q,
    pub r2: Q,
    pub m1_over_n: Q,
    pub m2_over_n: Q,
}

pub fn kwc_rates(k1: usize, k2: usize, t: usize) -> Result<KwcPoint> {
    let k = (k1 * k2) as i64;
    if t as i64 > k {
        return Err(Error::Range(format!("t={t} outside [0, {k}]")));
    }
    let (t, k2) = (t as i64, k2 as i64);
    let c = qb(&binom(k, t));
    let r1 = Q::new((k - t).into(), (t + 1).into());
    let r2 = &r1 - qb(&binom(k - k2, t + 1)) / &c + qb(&binom(k - k2, t - k2)) * qi(k2) / &c;
    let m1_over_n = qb(&binom(k - k2, t - k2)) / &c;
    let m2_over_n = qb(&(binom(k - 1, t - 1) - binom(k - k2, t - k2))) / &c;
    Ok(KwcPoint { r1, r2, m1_over_n, m2_over_n })
}

pub fn kwc_point(k1: usize, k2: usize, n: usize, t: usize) -> Result<RatePoint> {
    let p = kwc_rates(k1, k2, t)?;
    let nq = qi(n as i64);
    Ok(RatePoint::new("KWC", (k1, k2, n), Some(t), None, p.m1_over_n * &nq, p.m2_over_n * &nq, p.r1, p.r2))
}

/// Memory sharing over the KWC points `t = 0` and `K2 < t < K`.
pub fn kwc_envelope(k1: usize, k2: usize, n: usize, m_bar: &Q) -> Result<RatePoint> {
    let k = k1 * k2;
    let pts = std::iter::once(0).chain(k2 + 1..k).map(|t| kwc_point(k1, k2, n, t)).collect::<Result<Vec<_>>>()?;
    envelope_at(&lower_hull(&pts), m_bar, "KWC")
}

/// Rates of the two-user single-mirror scheme for `2 M2 <= N`.
pub fn lzx_rates(n: usize, m1: &Q, m2: &Q) -> Result<(Q, Q)> {
    let nq = qi(n as i64);
    if qi(2) * m2 > nq {
        return Err(Error::Scope(format!("LZX rates need 2 M2 <= N (M2={}, N={n})", fmt_ratio(m2))));
    }
    if m1.is_negative() || m2.is_negative() {
        return Err(Error::Range("memories must be non-negative".into()));
    }
    let a = m2 / &nq;
    let b = Q::one() - qi(2) * m2 / &nq;
    let nn = &nq * &nq;
    let (two_n_1, three_n_2, three_n_1) = (qi(2 * n as i64 - 1), qi(3 * n as i64 - 2), qi(3 * n as i64 - 1));
    let nb = &nq * &b;
    let rates = if *m1 <= nb {
        ((&two_n_1 * (&nq - m1) - &three_n_2 * m2) / &nn, (&two_n_1 * &nq - &three_n_2 * m2) / &nn)
    } else if *m1 <= &nb + &nq * &a {
        (Q::one() - (m1 + m2) / &nq, (&nq * (&nq - m2) + (&nq - Q::one()) * m1) / &nn)
    } else if *m1 < &nb + &two_n_1 * &a {
        (Q::zero(), (three_n_1 * (&nq - m2) - &nq * m1) / &nn)
    } else {
        (Q::zero(), (&nq * &two_n_1 - three_n_2 * m2) / &nn)
    };
    Ok(rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::to_f64;
    use proptest::prelude::*;

    fn close(v: &Q, want: f64, tol: f64) -> bool {
        (to_f64(v) - want).abs() <= tol
    }

    fn point_326() -> MemPoint {
        MemPoint::new(3, 2, 6, q(92, 245), q(248, 245)).unwrap()
    }

    fn point_323() -> MemPoint {
        MemPoint::new(3, 2, 3, q(4, 15), q(2, 5)).unwrap()
    }

    fn point_236() -> MemPoint {
        MemPoint::new(2, 3, 6, q(34, 100), q(216, 100)).unwrap()
    }

    fn point_236_shared() -> MemPoint {
        MemPoint::new(2, 3, 6, q(105, 1000), q(2245, 1000)).unwrap()
    }

    // Hand-expanded evaluation of r, kept separate from the implementation.
    fn r_oracle(qv: f64, k: i32) -> f64 {
        (k as f64 * (1.0 - qv) * (1.0 / (k as f64 * qv)) * (1.0 - (1.0 - qv).powi(k))).max(0.0)
    }

    #[test]
    fn decentralized_rate() {
        assert_eq!(r_decentralized(&q(2, 5), 3).unwrap(), q(147, 125));
        assert!(close(&r_decentralized(&q(2, 5), 3).unwrap(), 1.176, 1e-12));
        assert_eq!(r_decentralized(&Q::one(), 4).unwrap(), Q::zero());
        assert_eq!(r_decentralized(&q(3, 2), 2).unwrap(), Q::zero());
        assert!(close(&r_decentralized(&q(198, 1000), 6).unwrap(), r_oracle(0.198, 6), 1e-12));
        assert!(matches!(r_decentralized(&Q::zero(), 3), Err(Error::Singular(_))));
    }

    #[test]
    fn knmd_reference_points() {
        let floor = default_beta_floor();
        let (t, region) = knmd_optimal_tuple(&point_326(), &floor).unwrap();
        assert_eq!(region, Region::II);
        assert!(t.beta_substituted);
        assert!(close(&t.split.alpha, 0.1565, 5e-5));
        let (t, _) = knmd_optimal_tuple(&point_323(), &floor).unwrap();
        assert!(close(&t.r1, 3.076, 5e-4) && close(&t.r2, 1.623, 5e-4));

        let (t, region) = knmd_optimal_tuple(&point_236(), &floor).unwrap();
        assert_eq!(region, Region::I);
        assert!(close(&t.r1, 1.56, 5e-3) && close(&t.r2, 1.312, 5e-4));
        let (t, region) = knmd_optimal_tuple(&point_236_shared(), &floor).unwrap();
        assert_eq!(region, Region::I);
        assert_eq!(t.split.alpha, t.split.beta);

        let corner = MemPoint::new(3, 2, 6, qi(6), Q::one()).unwrap();
        let (t, region) = knmd_optimal_tuple(&corner, &floor).unwrap();
        assert_eq!(region, Region::III);
        assert_eq!(t.split, Split { alpha: Q::one(), beta: q(1, 4) });
    }

    #[test]
    fn zwxwll_reference_points() {
        let floor = default_beta_floor();
        let t = zwxwll_best(&point_323(), &floor).unwrap();
        assert!(close(&t.r1, 3.413, 5e-4) && close(&t.r2, 1.618, 5e-4));
        let t = zwxwll_best(&point_236_shared(), &floor).unwrap();
        assert!(close(&t.r1, 1.5445, 5e-4) && close(&t.r2, 1.2626, 5e-4));
        assert_eq!(zwxwll_menu(&point_236_shared(), &floor).unwrap().len(), 3);
        assert_eq!(zwxwll_menu(&point_326(), &floor).unwrap().len(), 2);
    }

    #[test]
    fn wwcy_examples() {
        let floor = default_beta_floor();
        let t = wwcy_best(&point_323(), &floor).unwrap();
        assert_eq!(t.label, "II");
        assert!(close(&t.r1, 3.07, 5e-3) && close(&t.r2, 1.623, 5e-4));
        let t = wwcy_best(&point_236_shared(), &floor).unwrap();
        let z = zwxwll_best(&point_236_shared(), &floor).unwrap();
        assert_eq!((t.r1, t.r2), (z.r1, z.r2));
    }

    #[test]
    fn zwxwl_examples() {
        let p = MemPoint::new(3, 2, 6, qi(2), Q::zero()).unwrap();
        assert_eq!(zwxwl_rates(&p), (qi(2), qi(2)));
        let grid = zwxwl_grid(3, 2, 6);
        let pick = |m1: i64, m2: i64| grid.iter().find(|g| g.m1 == qi(m1) && g.m2 == qi(m2)).unwrap();
        assert_eq!((pick(0, 0).m_bar.clone(), pick(0, 0).r_bar.clone()), (Q::zero(), qi(12)));
        assert_eq!((pick(2, 0).m_bar.clone(), pick(2, 0).r_bar.clone()), (qi(6), qi(8)));
        assert_eq!((pick(0, 3).m_bar.clone(), pick(0, 3).r_bar.clone()), (qi(18), q(9, 2)));

        let e = zwxwl_envelope(3, 2, 6, &q(36, 5)).unwrap();
        assert_eq!((e.m1, e.m2, e.r1, e.r2, e.r_bar), (q(9, 5), q(3, 10), q(21, 10), q(37, 20), q(153, 20)));
        let e = zwxwl_envelope(3, 2, 3, &q(16, 5)).unwrap();
        assert!(close(&e.r_bar, 7.88, 5e-3));
        assert_eq!((e.m1, e.m2), (q(29, 30), q(1, 20)));
        assert!(matches!(zwxwl_envelope(3, 2, 6, &qi(100)), Err(Error::Hull(_))));
        // Mixed points such as (M1=2, M2=3) lie below the single-layer hull.
        let full = zwxwl_full_envelope(3, 2, 6, &q(36, 5)).unwrap();
        assert_eq!((full.m1, full.m2, full.r_bar), (qi(2), q(1, 5), q(229, 30)));
    }

    #[test]
    fn kwc_examples() {
        let e = kwc_envelope(3, 2, 6, &q(59, 10)).unwrap();
        assert!(close(&e.r_bar, 8.743, 5e-4));
        let p = kwc_rates(3, 2, 5).unwrap();
        assert_eq!(p.r1, q(1, 6));
        assert!(kwc_rates(3, 2, 7).is_err());
    }

    #[test]
    fn lzx_examples() {
        let (r1, r2) = lzx_rates(2, &Q::zero(), &q(1, 2)).unwrap();
        assert_eq!(&r1 + &r2, qi(2));
        let (r1, r2) = lzx_rates(2, &q(1, 2), &q(1, 2)).unwrap();
        assert_eq!((r1, r2), ((qi(3) * q(3, 2) - qi(4) * q(1, 2)) / qi(4), (qi(3) * qi(2) - qi(4) * q(1, 2)) / qi(4)));
        // case 4: M1 >= Nb + (2N-1)a
        let (r1, r2) = lzx_rates(2, &qi(2), &q(1, 2)).unwrap();
        assert_eq!((r1, r2), (Q::zero(), (qi(2) * qi(3) - qi(4) * q(1, 2)) / qi(4)));
        assert!(matches!(lzx_rates(2, &Q::zero(), &qi(2)), Err(Error::Scope(_))));
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert!("nope".parse::<Scheme>().is_err());
    }

    fn grid_point(k1: usize, k2: usize, n: usize, i: i64, j: i64) -> MemPoint {
        MemPoint::new(k1, k2, n, q(i * n as i64, 8), q(j * n as i64, 8)).unwrap()
    }

    proptest! {
        #[test]
        fn wwcy_and_knmd_share_mirror_rate(k1 in 1usize..4, k2 in 1usize..4, n in 1usize..6,
                                          i in 0i64..=8, j in 1i64..=8, a in 1i64..8, b in 1i64..8) {
            let p = grid_point(k1, k2, n, i, j);
            let s = Split { alpha: q(a, 8), beta: q(b, 8) };
            if i > 0 {
                prop_assert_eq!(wwcy_rates(&p, &s).unwrap().1, knmd_rates(&p, &s).unwrap().1);
            }
        }

        #[test]
        fn fixed_split_rates_decrease_with_memory(k1 in 1usize..4, k2 in 1usize..4, n in 1usize..6,
                                                  i in 1i64..8, j in 1i64..8, a in 1i64..8, b in 1i64..8) {
            let s = Split { alpha: q(a, 8), beta: q(b, 8) };
            let base = grid_point(k1, k2, n, i, j);
            let more_m1 = grid_point(k1, k2, n, i + 1, j);
            let more_m2 = grid_point(k1, k2, n, i, j + 1);
            for f in [knmd_rates, wwcy_rates, zwxwll_rates] {
                let (r1, r2) = f(&base, &s).unwrap();
                prop_assert!(!r1.is_negative() && !r2.is_negative());
                for other in [&more_m1, &more_m2] {
                    let (o1, o2) = f(other, &s).unwrap();
                    prop_assert!(o1 <= r1 && o2 <= r2);
                }
            }
            let (z1, z2) = zwxwl_rates(&base);
            for other in [&more_m1, &more_m2] {
                let (o1, o2) = zwxwl_rates(other);
                prop_assert!(o1 <= z1 && o2 <= z2);
            }
        }

        #[test]
        fn best_tuple_is_minimal(k1 in 1usize..4, k2 in 1usize..4, n in 1usize..6, i in 1i64..=8, j in 1i64..=8) {
            let p = grid_point(k1, k2, n, i, j);
            let floor = default_beta_floor();
            let best = zwxwll_best(&p, &floor).unwrap();
            for t in zwxwll_menu(&p, &floor).unwrap() {
                prop_assert!(best.r2 <= t.r2);
            }
        }

        #[test]
        fn lzx_nonnegative(n in 1usize..6, i in 0i64..=16, j in 0i64..=8) {
            let nq = qi(n as i64);
            let m2 = &nq * q(j, 16);
            let m1 = &nq * q(i, 16);
            let (r1, r2) = lzx_rates(n, &m1, &m2).unwrap();
            prop_assert!(!r1.is_negative() && !r2.is_negative());
        }
    }
}
