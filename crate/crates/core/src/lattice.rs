//! Constrained lattice enumeration: the exact oracle behind every closed form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, Mode, Scalar};

/// Largest dimension accepted by [`enumerate`].
pub const MAX_DIM: usize = 20;
/// Largest point count accepted by [`enumerate`].
pub const MAX_POINTS: u128 = 10_000_000;

/// An integer box `lower <= x <= upper` intersected with a coordinate-sum
/// window `sum_min <= Σx <= sum_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub dim: usize,
    pub lower: Vec<u32>,
    pub upper: Vec<u32>,
    pub sum_min: u32,
    pub sum_max: u32,
}

impl ConstraintSet {
    pub fn new(lower: Vec<u32>, upper: Vec<u32>, sum_min: u32, sum_max: u32) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::invalid("upper", "bound vectors differ in length"));
        }
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::invalid(
                "lower",
                format!("coordinate {} has lower {} > upper {}", i + 1, lower[i], upper[i]),
            ));
        }
        if sum_min > sum_max {
            return Err(Error::invalid("sum_min", format!("{sum_min} > sum_max {sum_max}")));
        }
        Ok(ConstraintSet {
            dim: lower.len(),
            lower,
            upper,
            sum_min,
            sum_max,
        })
    }

    /// `0 <= x_j <= upper` for all `dim` coordinates.
    pub fn boxed(dim: usize, upper: u32, sum_min: u32, sum_max: u32) -> Result<Self> {
        Self::new(vec![0; dim], vec![upper; dim], sum_min, sum_max)
    }

    /// `{0,1}^k` with `Σx ∈ {max(0,n-1), n}`.
    pub fn first_kind(k: usize, n: u32) -> Self {
        Self::boxed(k, 1, n.saturating_sub(1), n).expect("valid first-kind bounds")
    }

    /// `{0..n}^k` with `Σx <= n`.
    pub fn second_kind(k: usize, n: u32) -> Self {
        Self::boxed(k, n, 0, n).expect("valid second-kind bounds")
    }

    pub fn contains(&self, x: &[u32]) -> bool {
        x.len() == self.dim
            && x.iter().zip(&self.lower).all(|(v, l)| v >= l)
            && x.iter().zip(&self.upper).all(|(v, u)| v <= u)
            && (self.sum_min..=self.sum_max).contains(&x.iter().sum::<u32>())
    }

    /// Number of points, by dynamic programming over the running sum.
    /// Exact up to `2^64`; larger counts saturate there.
    pub fn count(&self) -> u128 {
        const CEIL: u128 = u64::MAX as u128;
        let base: u64 = self.lower.iter().map(|&l| u64::from(l)).sum();
        let span: u64 = self.lower.iter().zip(&self.upper).map(|(&l, &u)| u64::from(u - l)).sum();
        if u64::from(self.sum_max) < base {
            return 0;
        }
        let lo = u64::from(self.sum_min).saturating_sub(base) as usize;
        let cap = (u64::from(self.sum_max) - base).min(span) as usize;
        if lo > cap {
            return 0;
        }
        let mut ways = vec![0u128; cap + 1];
        ways[0] = 1;
        let mut prefix = vec![0u128; cap + 2];
        for (&l, &u) in self.lower.iter().zip(&self.upper) {
            let width = (u - l) as usize;
            for (t, &w) in ways.iter().enumerate() {
                prefix[t + 1] = prefix[t] + w;
            }
            for (t, slot) in ways.iter_mut().enumerate() {
                let from = t.saturating_sub(width);
                *slot = (prefix[t + 1] - prefix[from]).min(CEIL);
            }
        }
        ways[lo..].iter().fold(0u128, |a, &w| (a + w).min(CEIL))
    }

    /// Fails with a capacity error when the lattice exceeds the guards.
    pub fn check_capacity(&self) -> Result<u128> {
        if self.dim > MAX_DIM {
            return Err(Error::Capacity {
                what: "dimension",
                value: self.dim as u128,
                limit: MAX_DIM as u128,
            });
        }
        // Every attainable coordinate sum contributes at least one point.
        let base: u128 = self.lower.iter().map(|&l| u128::from(l)).sum();
        let top: u128 = self.upper.iter().map(|&u| u128::from(u)).sum();
        let (lo, hi) = (base.max(self.sum_min.into()), top.min(self.sum_max.into()));
        if hi >= lo && hi - lo + 1 > MAX_POINTS {
            return Err(Error::Capacity {
                what: "support points",
                value: hi - lo + 1,
                limit: MAX_POINTS,
            });
        }
        let count = self.count();
        if count > MAX_POINTS {
            return Err(Error::Capacity {
                what: "support points",
                value: count,
                limit: MAX_POINTS,
            });
        }
        Ok(count)
    }
}

/// One lattice point. Ordering is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportPoint(pub Vec<u32>);

impl SupportPoint {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn sum(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl From<Vec<u32>> for SupportPoint {
    fn from(v: Vec<u32>) -> Self {
        SupportPoint(v)
    }
}

impl fmt::Display for SupportPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Call `visit` on every point in lexicographic order, after the capacity
/// check.
pub fn for_each_point(c: &ConstraintSet, mut visit: impl FnMut(&[u32])) -> Result<u128> {
    let count = c.check_capacity()?;
    let dim = c.dim;
    // Remaining min/max sums of the coordinates after position i.
    let mut rem_min = vec![0u32; dim + 1];
    let mut rem_max = vec![0u32; dim + 1];
    for i in (0..dim).rev() {
        rem_min[i] = rem_min[i + 1] + c.lower[i];
        rem_max[i] = rem_max[i + 1] + c.upper[i];
    }
    let mut x = vec![0u32; dim];
    let mut seen = 0u128;
    fn rec(
        c: &ConstraintSet,
        i: usize,
        s: u32,
        x: &mut Vec<u32>,
        rem_min: &[u32],
        rem_max: &[u32],
        visit: &mut dyn FnMut(&[u32]),
        seen: &mut u128,
    ) {
        if i == c.dim {
            *seen += 1;
            visit(x);
            return;
        }
        for v in c.lower[i]..=c.upper[i] {
            let t = s + v;
            if t + rem_min[i + 1] > c.sum_max {
                break;
            }
            if t + rem_max[i + 1] < c.sum_min {
                continue;
            }
            x[i] = v;
            rec(c, i + 1, t, x, rem_min, rem_max, visit, seen);
        }
    }
    if rem_min[0] <= c.sum_max && rem_max[0] >= c.sum_min {
        rec(c, 0, 0, &mut x, &rem_min, &rem_max, &mut visit, &mut seen);
    }
    debug_assert_eq!(seen, count, "enumeration disagrees with the counting recursion");
    Ok(seen)
}

/// All points of `c` in lexicographic order.
pub fn enumerate(c: &ConstraintSet) -> Result<Vec<SupportPoint>> {
    let mut out = Vec::new();
    for_each_point(c, |x| out.push(SupportPoint(x.to_vec())))?;
    Ok(out)
}

/// `Σ w(x)` over the lattice.
pub fn weighted_sum<N: Field>(c: &ConstraintSet, w: impl Fn(&[u32]) -> N) -> Result<N> {
    let mut acc = N::zero();
    for_each_point(c, |x| acc = acc.clone() + w(x))?;
    Ok(acc)
}

/// `Σ w(x)` for a type-erased weight. Fails if `w` returns a value whose mode
/// differs from `mode`.
pub fn weighted_sum_scalar(c: &ConstraintSet, mode: Mode, w: impl Fn(&[u32]) -> Scalar) -> Result<Scalar> {
    let mut acc = match mode {
        Mode::Exact => Scalar::Exact(<crate::scalar::Exact as Field>::zero()),
        Mode::Approximate => Scalar::Approx {
            value: 0.0,
            tol: crate::scalar::DEFAULT_TOL,
        },
    };
    let mut err = None;
    for_each_point(c, |x| {
        if err.is_none() {
            match acc.try_add(&w(x)) {
                Ok(v) => acc = v,
                Err(e) => err = Some(e),
            }
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Approx, Exact};

    fn pts(c: &ConstraintSet) -> Vec<Vec<u32>> {
        enumerate(c).unwrap().into_iter().map(|p| p.0).collect()
    }

    #[test]
    fn small_listings() {
        assert_eq!(
            pts(&ConstraintSet::boxed(2, 1, 0, 1).unwrap()),
            vec![vec![0, 0], vec![0, 1], vec![1, 0]]
        );
        assert_eq!(
            pts(&ConstraintSet::boxed(2, 1, 1, 2).unwrap()),
            vec![vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(pts(&ConstraintSet::boxed(1, 2, 0, 2).unwrap()), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn zero_dimensional_lattice() {
        assert_eq!(pts(&ConstraintSet::boxed(0, 1, 0, 1).unwrap()), vec![Vec::<u32>::new()]);
        assert!(pts(&ConstraintSet::boxed(0, 1, 1, 1).unwrap()).is_empty());
    }

    #[test]
    fn weighted_sums() {
        let c = ConstraintSet::boxed(2, 1, 0, 1).unwrap();
        assert_eq!(weighted_sum(&c, |_| Exact::one()).unwrap(), Exact::from_i64(3));

        let c = ConstraintSet::boxed(2, 1, 1, 2).unwrap();
        let half = Exact::from_ratio(1, 2);
        let s = weighted_sum(&c, |x| {
            let e: u32 = x.iter().enumerate().map(|(j, v)| (j as u32 + 1) * v).sum();
            half.powi(e.into())
        })
        .unwrap();
        assert_eq!(s, Exact::from_ratio(7, 8));

        let empty = ConstraintSet::boxed(2, 1, 3, 3).unwrap();
        assert_eq!(weighted_sum(&empty, |_| Exact::one()).unwrap(), Exact::zero());
    }

    #[test]
    fn scalar_sum_rejects_mixed_modes() {
        let c = ConstraintSet::boxed(2, 1, 0, 2).unwrap();
        let mixed = weighted_sum_scalar(&c, Mode::Exact, |x| {
            if x[0] == 1 {
                Approx(1.0).to_scalar()
            } else {
                Exact::one().to_scalar()
            }
        });
        assert_eq!(mixed, Err(Error::ModeMix));
        let ok = weighted_sum_scalar(&c, Mode::Exact, |_| Exact::one().to_scalar()).unwrap();
        assert_eq!(ok, Scalar::Exact(Exact::from_i64(4)));
    }

    #[test]
    fn capacity_guards() {
        let wide = ConstraintSet::boxed(21, 1, 0, 1).unwrap();
        assert!(matches!(enumerate(&wide), Err(Error::Capacity { what: "dimension", .. })));
        let big = ConstraintSet::second_kind(20, 20);
        assert!(matches!(enumerate(&big), Err(Error::Capacity { what: "support points", .. })));
        let tall = ConstraintSet::second_kind(1, 4_000_000_000);
        assert!(matches!(tall.check_capacity(), Err(Error::Capacity { what: "support points", .. })));
        assert_eq!(ConstraintSet::second_kind(20, 1000).count(), u64::MAX as u128);
    }

    #[test]
    fn invalid_bounds() {
        assert!(ConstraintSet::new(vec![2], vec![1], 0, 1).is_err());
        assert!(ConstraintSet::boxed(2, 1, 2, 1).is_err());
    }

    #[test]
    fn count_matches_enumeration() {
        for k in 0..7 {
            for n in 0..7 {
                let c = ConstraintSet::second_kind(k, n);
                assert_eq!(c.count(), enumerate(&c).unwrap().len() as u128);
                let c = ConstraintSet::first_kind(k, n);
                assert_eq!(c.count(), enumerate(&c).unwrap().len() as u128);
            }
        }
        let shifted = ConstraintSet::new(vec![1, 0, 2], vec![2, 3, 3], 4, 6).unwrap();
        assert_eq!(shifted.count(), enumerate(&shifted).unwrap().len() as u128);
    }

    #[test]
    fn display() {
        assert_eq!(SupportPoint(vec![0, 1, 1]).to_string(), "(0,1,1)");
    }
}
