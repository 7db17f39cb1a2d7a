//! Lattice-sum identities for deformed binomials, checked by exact
//! enumeration with a fitted discrepancy monomial.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::grouping::{compositions, GroupingScheme};
use crate::lattice::{weighted_sum, ConstraintSet};
use crate::monomial::{fit_monomial, Monomial};
use crate::scalar::{Field, DEFAULT_TOL};

/// Which identity to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityId {
    /// 0/1 sum against `[k+1, n]`, over the capped window `{n-1, n}`.
    Hs1,
    /// As `Hs1` over the literal window `Σr <= n` (diagnostic).
    Hs1Literal,
    /// Bounded sum against `[k+n, n]`.
    Hs2,
    /// Grouped 0/1 sum against `[k+1, n]`.
    Hsa,
    /// Grouped multiset sum against `[k+n, n]`, printed τ₂ exponent.
    Hsb,
    /// As `Hsb` with the τ₂ exponent negated.
    HsbNegated,
    /// Convolution against `[k+n, n]`.
    Cauchy,
}

impl IdentityId {
    pub const ALL: [IdentityId; 7] = [
        IdentityId::Hs1,
        IdentityId::Hs1Literal,
        IdentityId::Hs2,
        IdentityId::Hsa,
        IdentityId::Hsb,
        IdentityId::HsbNegated,
        IdentityId::Cauchy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::Hs1 => "hs1",
            IdentityId::Hs1Literal => "hs1-literal",
            IdentityId::Hs2 => "hs2",
            IdentityId::Hsa => "hsa",
            IdentityId::Hsb => "hsb",
            IdentityId::HsbNegated => "hsb-negated",
            IdentityId::Cauchy => "cauchy",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.name() == s.trim())
            .ok_or_else(|| Error::invalid("suite", format!("unknown identity {s:?}")))
    }
}

fn c2(n: u32) -> i64 {
    i64::from(n) * (i64::from(n) - 1) / 2
}

/// `Σ_j j·r_j`.
fn index_weight(r: &[u32]) -> i64 {
    r.iter().enumerate().map(|(j, &v)| (j as i64 + 1) * i64::from(v)).sum()
}

/// `Σ τ₁^{-Σ j r_j + C(n,2)} τ₂^{Σ j r_j - C(n,2)}` over `r ∈ {0,1}^k`. The
/// window is `Σr ∈ {max(0,n-1), n}`, or `Σr <= n` when `literal_window`.
pub fn hs1_lhs<N: Field>(alg: &AlgebraSpec<N>, k: u32, n: u32, literal_window: bool) -> Result<N> {
    if n < 1 || n > k + 1 {
        return Err(Error::invalid("n", format!("hs1 requires 1 <= n <= k+1 (k={k}, n={n})")));
    }
    let lo = if literal_window { 0 } else { n - 1 };
    let c = ConstraintSet::boxed(k as usize, 1, lo, n)?;
    weighted_sum(&c, |r| {
        let s = index_weight(r);
        alg.monomial(-s + c2(n), s - c2(n))
    })
}

/// `Σ τ₁^{-Σ j r_j} τ₂^{Σ j r_j}` over `r ∈ {0..n}^k`, `Σr <= n`.
pub fn hs2_lhs<N: Field>(alg: &AlgebraSpec<N>, k: u32, n: u32) -> Result<N> {
    if k < 1 {
        return Err(Error::invalid("k", "hs2 requires k >= 1"));
    }
    let c = ConstraintSet::second_kind(k as usize, n);
    weighted_sum(&c, |r| {
        let s = index_weight(r);
        alg.monomial(-s, s)
    })
}

fn group_box(groups: &GroupingScheme, upper: impl Fn(u32) -> u32, lo: u32, hi: u32) -> Result<ConstraintSet> {
    let ups = groups.sizes().iter().map(|&m| upper(m)).collect();
    ConstraintSet::new(vec![0; groups.len()], ups, lo, hi)
}

/// Grouped 0/1 sum:
/// `Σ τ₁^{Σ(n-s_j)(m_j-r_j)} τ₂^{-Σ(n_j+n-s_j-k-1) r_j} Π[m_j, r_j]`
/// with `n_j` the partial sums of the group sizes, `s_j` those of `r`, and
/// `Σr ∈ {max(0,n-1), n}`.
pub fn hsa_lhs<N: Field>(alg: &AlgebraSpec<N>, k: u32, n: u32, groups: &GroupingScheme) -> Result<N> {
    if groups.k() != k {
        return Err(Error::invalid("groups", format!("group sizes must sum to k = {k}")));
    }
    let c = group_box(groups, |m| m, n.saturating_sub(1), n)?;
    let (k, n) = (i64::from(k), i64::from(n));
    weighted_sum(&c, |r| {
        let (mut a, mut b, mut s) = (0i64, 0i64, 0i64);
        let mut coef = N::one();
        for (j, &rj) in r.iter().enumerate() {
            let (mj, nj, rj) = (i64::from(groups.m(j + 1)), i64::from(groups.s(j + 1)), i64::from(rj));
            s += rj;
            a += (n - s) * (mj - rj);
            b -= (nj + n - s - k - 1) * rj;
            coef = coef * alg.binomial_or_zero(mj, rj);
        }
        alg.monomial(a, b) * coef
    })
}

/// Grouped multiset sum:
/// `Σ τ₁^{Σ(n-s_j)(m_j-1)} τ₂^{-Σ(n_j-k-1) r_j} Π[m_j+r_j-1, r_j]`
/// over `r ∈ {0..n}^ν`, `Σr <= n`. `negated` flips the τ₂ exponent.
pub fn hsb_lhs<N: Field>(alg: &AlgebraSpec<N>, k: u32, n: u32, groups: &GroupingScheme, negated: bool) -> Result<N> {
    if groups.k() != k {
        return Err(Error::invalid("groups", format!("group sizes must sum to k = {k}")));
    }
    let c = group_box(groups, |_| n, 0, n)?;
    let (k, n) = (i64::from(k), i64::from(n));
    let sign = if negated { 1 } else { -1 };
    weighted_sum(&c, |r| {
        let (mut a, mut b, mut s) = (0i64, 0i64, 0i64);
        let mut coef = N::one();
        for (j, &rj) in r.iter().enumerate() {
            let (mj, nj, rj) = (i64::from(groups.m(j + 1)), i64::from(groups.s(j + 1)), i64::from(rj));
            s += rj;
            a += (n - s) * (mj - 1);
            b += sign * (nj - k - 1) * rj;
            coef = coef * alg.binomial_or_zero(mj + rj - 1, rj);
        }
        alg.monomial(a, b) * coef
    })
}

/// `Σ_{r=0}^{n} τ₁^{(m-k)r} τ₂^{(k-m)r} [m+r, r] [k-m+n-r-1, n-r]`.
pub fn cauchy_lhs<N: Field>(alg: &AlgebraSpec<N>, k: u32, n: u32, m: u32) -> Result<N> {
    if m > k {
        return Err(Error::invalid("m", format!("cauchy requires m <= k (k={k}, m={m})")));
    }
    let (k, n, m) = (i64::from(k), i64::from(n), i64::from(m));
    Ok((0..=n).fold(N::zero(), |acc, r| {
        acc + alg.monomial((m - k) * r, (k - m) * r)
            * alg.binomial_or_zero(m + r, r)
            * alg.binomial_or_zero(k - m + n - r - 1, n - r)
    }))
}

/// The outcome of one identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport<N> {
    pub identity: IdentityId,
    pub k: u32,
    pub n: u32,
    pub groups: Option<GroupingScheme>,
    pub m: Option<u32>,
    pub lhs: N,
    pub rhs: N,
    pub exact_match: bool,
    /// `lhs · τ₁^a τ₂^b = rhs`.
    pub discrepancy: Option<Monomial>,
}

impl<N> IdentityReport<N> {
    pub fn monomial_found(&self) -> bool {
        self.discrepancy.is_some()
    }

    /// `(a, b)` when a monomial was found.
    pub fn exponents(&self) -> Option<(i64, i64)> {
        self.discrepancy.map(|m| (m.tau1, m.tau2))
    }
}

fn report<N: Field>(
    identity: IdentityId,
    alg: &AlgebraSpec<N>,
    k: u32,
    n: u32,
    groups: Option<GroupingScheme>,
    m: Option<u32>,
    lhs: N,
    rhs: N,
) -> IdentityReport<N> {
    let exact_match = lhs.close_to(&rhs, DEFAULT_TOL);
    let discrepancy = if exact_match {
        Some(Monomial::ONE)
    } else {
        let bound = (i64::from(k) + 1) * i64::from(n.max(1));
        fit_monomial(&lhs, &rhs, &alg.tau1, &alg.tau2, bound)
    };
    IdentityReport {
        identity,
        k,
        n,
        groups,
        m,
        lhs,
        rhs,
        exact_match,
        discrepancy,
    }
}

/// Check one identity at one parameter tuple.
pub fn check_identity<N: Field>(
    identity: IdentityId,
    alg: &AlgebraSpec<N>,
    k: u32,
    n: u32,
    groups: Option<&GroupingScheme>,
    m: Option<u32>,
) -> Result<IdentityReport<N>> {
    let need_groups = || groups.ok_or_else(|| Error::invalid("groups", "grouped identities need a scheme"));
    let (lhs, rhs) = match identity {
        IdentityId::Hs1 | IdentityId::Hs1Literal => (
            hs1_lhs(alg, k, n, identity == IdentityId::Hs1Literal)?,
            alg.binomial(k + 1, n)?,
        ),
        IdentityId::Hs2 => (hs2_lhs(alg, k, n)?, alg.binomial(k + n, n)?),
        IdentityId::Hsa => (hsa_lhs(alg, k, n, need_groups()?)?, alg.binomial_or_zero(i64::from(k) + 1, n.into())),
        IdentityId::Hsb | IdentityId::HsbNegated => (
            hsb_lhs(alg, k, n, need_groups()?, identity == IdentityId::HsbNegated)?,
            alg.binomial(k + n, n)?,
        ),
        IdentityId::Cauchy => {
            let m = m.ok_or_else(|| Error::invalid("m", "cauchy needs m"))?;
            (cauchy_lhs(alg, k, n, m)?, alg.binomial(k + n, n)?)
        }
    };
    Ok(report(identity, alg, k, n, groups.cloned(), m, lhs, rhs))
}

/// Sweep `1 <= k <= kmax`, `n <= nmax` (and the identity's own range),
/// every composition of `k` for grouped identities, every `m <= k` for
/// Cauchy. Reports come back in sorted parameter order.
pub fn verify_identity<N: Field>(identity: IdentityId, alg: &AlgebraSpec<N>, kmax: u32, nmax: u32) -> Result<Vec<IdentityReport<N>>> {
    let mut out = Vec::new();
    for k in 1..=kmax {
        let ns: Vec<u32> = match identity {
            IdentityId::Hs1 | IdentityId::Hs1Literal => (1..=nmax.min(k + 1)).collect(),
            IdentityId::Hsa => (0..=nmax.min(k + 1)).collect(),
            _ => (0..=nmax).collect(),
        };
        for n in ns {
            match identity {
                IdentityId::Hsa | IdentityId::Hsb | IdentityId::HsbNegated => {
                    for g in compositions(k) {
                        out.push(check_identity(identity, alg, k, n, Some(&g), None)?);
                    }
                }
                IdentityId::Cauchy => {
                    for m in 0..=k {
                        out.push(check_identity(identity, alg, k, n, None, Some(m))?);
                    }
                }
                _ => out.push(check_identity(identity, alg, k, n, None, None)?),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn r(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    fn qd() -> AlgebraSpec<Exact> {
        AlgebraSpec::q_deformation(r(1, 2)).unwrap()
    }

    fn js() -> AlgebraSpec<Exact> {
        AlgebraSpec::jagannathan_srinivasa(r(9, 10), r(1, 2)).unwrap()
    }

    #[test]
    fn hs1_examples() {
        let a = qd();
        assert_eq!(hs1_lhs(&a, 2, 2, false).unwrap(), r(7, 4));
        assert_eq!(a.binomial(3, 2).unwrap(), r(7, 4));
        assert_eq!(hs1_lhs(&a, 0, 1, false).unwrap(), r(1, 1));
        assert!(hs1_lhs(&a, 2, 4, false).is_err());
        assert!(hs1_lhs(&a, 2, 0, false).is_err());
    }

    #[test]
    fn literal_window_overshoots() {
        let a = qd();
        for k in 1..6 {
            for n in 2..=k + 1 {
                let literal = hs1_lhs(&a, k, n, true).unwrap();
                assert!(literal > a.binomial(k + 1, n).unwrap(), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn hs2_examples() {
        let a = qd();
        assert_eq!(hs2_lhs(&a, 1, 2).unwrap(), r(7, 4));
        assert_eq!(hs2_lhs(&a, 1, 1).unwrap(), r(3, 2));
        assert_eq!(hs2_lhs(&a, 1, 0).unwrap(), r(1, 1));
    }

    #[test]
    fn grouped_examples() {
        let a = qd();
        let g = GroupingScheme::new(vec![1, 1], 2).unwrap();
        assert_eq!(hsb_lhs(&a, 2, 1, &g, false).unwrap(), r(7, 4));
        assert_eq!(hsa_lhs(&a, 2, 0, &g).unwrap(), r(1, 1));
        assert_eq!(hsb_lhs(&a, 2, 0, &g, false).unwrap(), r(1, 1));
        let single = GroupingScheme::new(vec![3], 3).unwrap();
        for n in 0..=4 {
            assert_eq!(hsa_lhs(&a, 3, n, &single).unwrap(), a.binomial(4, n).unwrap());
        }
    }

    #[test]
    fn cauchy_examples() {
        let a = qd();
        assert_eq!(cauchy_lhs(&a, 1, 1, 0).unwrap(), r(3, 2));
        assert_eq!(cauchy_lhs(&a, 3, 0, 2).unwrap(), r(1, 1));
        assert!(cauchy_lhs(&a, 1, 1, 2).is_err());
    }

    #[test]
    fn js_discrepancies() {
        let a = js();
        let rep = check_identity(IdentityId::Hs1, &a, 1, 1, None, None).unwrap();
        assert!(!rep.exact_match);
        assert_eq!(rep.exponents(), Some((1, 0)));
        let rep = check_identity(IdentityId::Hs2, &a, 1, 1, None, None).unwrap();
        assert_eq!(rep.exponents(), Some((1, 0)));
    }

    #[test]
    fn sweep_order_and_size() {
        let reps = verify_identity(IdentityId::Hs1, &qd(), 3, 8).unwrap();
        assert_eq!(reps.len(), 2 + 3 + 4);
        assert!(reps.iter().all(|r| r.exact_match));
        let reps = verify_identity(IdentityId::Cauchy, &qd(), 2, 1).unwrap();
        assert_eq!(reps.len(), (2 + 3) * 2);
    }

    #[test]
    fn identity_names_parse() {
        for id in IdentityId::ALL {
            assert_eq!(id.name().parse::<IdentityId>().unwrap(), id);
        }
        assert!("hs9".parse::<IdentityId>().is_err());
    }
}
