//! Binomial coefficients and fixed-size subset enumeration over `[n]`
//! (0-based internally, at most 64 elements).

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// `C(n, k)`, zero whenever `k < 0` or `k > n`.
pub fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `C(n, k)` as a machine integer, `None` on overflow.
pub fn binom_u64(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    u64::try_from(acc).ok()
}

/// A subset of `[n]` with `n <= 64`, stored as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_elems<I: IntoIterator<Item = usize>>(elems: I) -> Self {
        Subset(elems.into_iter().fold(0u64, |m, e| {
            assert!(e < 64, "subset element {e} out of range");
            m | (1 << e)
        }))
    }

    /// Contiguous range `[lo, hi)`.
    pub fn range(lo: usize, hi: usize) -> Self {
        Self::from_elems(lo..hi)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, e: usize) -> bool {
        e < 64 && self.0 & (1 << e) != 0
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: Subset) -> bool {
        self.0 & other.0 != 0
    }

    pub fn with(self, e: usize) -> Subset {
        Subset(self.0 | (1 << e))
    }

    pub fn without(self, e: usize) -> Subset {
        Subset(self.0 & !(1 << e))
    }

    /// Elements in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let e = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(e)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Lexicographic order of the sorted element lists, e.g. `{0,1} < {0,2} < {1,2}`.
    pub fn lex_cmp(self, other: Subset) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// 1-based rendering, matching the `{1,2}` notation used in reports.
impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", e + 1)?;
        }
        f.write_str("}")
    }
}

/// Iterates the `k`-subsets of `[n]` in lexicographic order.
pub struct KSubsets {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

pub fn k_subsets(n: usize, k: usize) -> KSubsets {
    assert!(n <= 64, "subsets of more than 64 elements are not supported");
    KSubsets { n, idx: (0..k).collect(), done: k > n }
}

impl Iterator for KSubsets {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        if self.done {
            return None;
        }
        let out = Subset::from_elems(self.idx.iter().copied());
        let k = self.idx.len();
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Position of `s` among the `|s|`-subsets of `[n]` in lexicographic order.
pub fn lex_rank(n: usize, s: Subset) -> u64 {
    let k = s.len();
    let mut rank = 0u64;
    let mut prev: Option<usize> = None;
    for (i, c) in s.iter().enumerate() {
        let start = prev.map_or(0, |p| p + 1);
        for j in start..c {
            rank += binom_u64((n - j - 1) as u64, (k - i - 1) as u64).expect("rank overflow");
        }
        prev = Some(c);
    }
    rank
}

/// Inverse of [`lex_rank`].
pub fn lex_unrank(n: usize, k: usize, mut rank: u64) -> Subset {
    let mut elems = Vec::with_capacity(k);
    let mut next = 0usize;
    for i in 0..k {
        let mut c = next;
        loop {
            let count = binom_u64((n - c - 1) as u64, (k - i - 1) as u64).expect("rank overflow");
            if count <= rank {
                rank -= count;
                c += 1;
            } else {
                elems.push(c);
                next = c + 1;
                break;
            }
        }
    }
    Subset::from_elems(elems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomials() {
        assert_eq!(binom(6, 2), BigInt::from(15));
        assert_eq!(binom(6, 7), BigInt::zero());
        assert_eq!(binom(4, -1), BigInt::zero());
        assert_eq!(binom(0, 0), BigInt::one());
        assert_eq!(binom(100, 10), BigInt::from(17_310_309_456_440u64));
        assert_eq!(binom_u64(6, 3), Some(20));
        assert_eq!(binom_u64(3, 5), Some(0));
        assert_eq!(binom_u64(200, 100), None);
    }

    #[test]
    fn lex_order_small() {
        let all: Vec<Vec<usize>> = k_subsets(4, 2).map(Subset::to_vec).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(k_subsets(3, 0).count(), 1);
        assert_eq!(k_subsets(3, 4).count(), 0);
        assert_eq!(k_subsets(5, 5).count(), 1);
    }

    #[test]
    fn display_is_one_based() {
        assert_eq!(Subset::from_elems([0, 1]).to_string(), "{1,2}");
        assert_eq!(Subset::EMPTY.to_string(), "{}");
    }

    proptest! {
        #[test]
        fn enumeration_matches_rank(n in 1usize..12, k_frac in 0.0f64..=1.0) {
            let k = ((n as f64) * k_frac).round() as usize;
            let subsets: Vec<Subset> = k_subsets(n, k).collect();
            prop_assert_eq!(subsets.len() as u64, binom_u64(n as u64, k as u64).unwrap());
            for (r, s) in subsets.iter().enumerate() {
                prop_assert_eq!(s.len(), k);
                prop_assert_eq!(lex_rank(n, *s), r as u64);
                prop_assert_eq!(lex_unrank(n, k, r as u64), *s);
            }
            for w in subsets.windows(2) {
                prop_assert_eq!(w[0].lex_cmp(w[1]), std::cmp::Ordering::Less);
            }
        }
    }
}
