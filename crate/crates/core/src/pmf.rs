//! Enumerated probability tables and the reports that compare closed forms
//! against them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraSpec, AlgebraSummary};
use crate::error::{Error, Result};
use crate::lattice::{self, ConstraintSet, SupportPoint};
use crate::monomial::{fit_monomial, Monomial};
use crate::scalar::{Field, DEFAULT_TOL};

/// Which family a table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    First,
    Second,
    /// Single-ball placement over `r` urns.
    Placement,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::First => "first",
            Kind::Second => "second",
            Kind::Placement => "placement",
        })
    }
}

/// Descriptive header shared by every table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableMeta {
    pub kind: Kind,
    /// `joint`, `marginal r=2`, `grouped 1-2`, ...
    pub law: String,
    pub k: u32,
    pub n: u32,
    pub algebra: AlgebraSummary,
    /// Coordinate names: `x1..xk`, `y1..yr`, ...
    pub labels: Vec<String>,
}

impl TableMeta {
    pub fn new<N: Field>(kind: Kind, law: impl Into<String>, k: u32, n: u32, alg: &AlgebraSpec<N>, labels: Vec<String>) -> Self {
        TableMeta {
            kind,
            law: law.into(),
            k,
            n,
            algebra: alg.summary(),
            labels,
        }
    }
}

/// Coordinate labels `prefix{from}..prefix{to}` (inclusive, 1-based).
pub fn labels(prefix: &str, from: u32, to: u32) -> Vec<String> {
    (from..=to).map(|i| format!("{prefix}{i}")).collect()
}

/// An enumerated distribution. Probabilities are always `weight / z_enumerated`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable<N> {
    pub meta: TableMeta,
    pub support: Vec<SupportPoint>,
    pub weights: Vec<N>,
    pub z_enumerated: N,
    /// The normalizer claimed by the closed form, if the law has one.
    pub z_closed_form: Option<N>,
    /// `z_enumerated · τ₁^a τ₂^b = z_closed_form`, when such a monomial exists.
    pub discrepancy: Option<Monomial>,
    pub probabilities: Vec<N>,
    /// Closed-form probability per support point, if the law has one.
    pub closed_form: Option<Vec<N>>,
}

impl<N: Field> PmfTable<N> {
    /// Normalize `weights` by their sum. `support` must be sorted and
    /// duplicate free.
    pub fn from_weights(meta: TableMeta, support: Vec<SupportPoint>, weights: Vec<N>) -> Result<Self> {
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(support.len(), weights.len());
        if weights.iter().any(|w| !w.is_positive() && !w.is_zero()) {
            return Err(Error::invalid("weights", "weights must be nonnegative"));
        }
        let z = weights.iter().fold(N::zero(), |a, w| a + w.clone());
        if !z.is_positive() {
            return Err(Error::Unnormalized(z.to_string()));
        }
        let probabilities = weights.iter().map(|w| w.clone() / z.clone()).collect();
        Ok(PmfTable {
            meta,
            support,
            weights,
            z_enumerated: z,
            z_closed_form: None,
            discrepancy: None,
            probabilities,
            closed_form: None,
        })
    }

    /// Record a closed-form normalizer and fit the monomial relating it to
    /// the enumerated one.
    pub fn with_closed_normalizer(mut self, z: N, tau1: &N, tau2: &N, bound: i64) -> Self {
        self.discrepancy = fit_monomial(&self.z_enumerated, &z, tau1, tau2, bound);
        self.z_closed_form = Some(z);
        self
    }

    pub fn with_closed_form(mut self, closed: impl Fn(&[u32]) -> N) -> Self {
        self.closed_form = Some(self.support.iter().map(|x| closed(&x.0)).collect());
        self
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.meta.labels.len()
    }

    /// `P(x)`, zero off the support.
    pub fn probability(&self, x: &[u32]) -> N {
        match self.support.binary_search_by(|p| p.0.as_slice().cmp(x)) {
            Ok(i) => self.probabilities[i].clone(),
            Err(_) => N::zero(),
        }
    }

    pub fn total(&self) -> N {
        self.probabilities.iter().fold(N::zero(), |a, p| a + p.clone())
    }

    /// Total mass is one (exactly, or within the default tolerance).
    pub fn is_normalized(&self) -> bool {
        self.total().close_to(&N::one(), DEFAULT_TOL)
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() && self.probabilities.iter().all(|p| !(p < &N::zero())) {
            Ok(())
        } else {
            Err(Error::Unnormalized(self.total().to_string()))
        }
    }

    /// `Σ f(x) P(x)`.
    pub fn expectation(&self, f: impl Fn(&[u32]) -> N) -> N {
        self.support
            .iter()
            .zip(&self.probabilities)
            .fold(N::zero(), |a, (x, p)| a + f(&x.0) * p.clone())
    }

    /// Law of `f(X)`.
    pub fn pushforward(&self, law: impl Into<String>, labels: Vec<String>, f: impl Fn(&[u32]) -> Vec<u32>) -> Self {
        let mut acc: BTreeMap<Vec<u32>, N> = BTreeMap::new();
        for (x, p) in self.support.iter().zip(&self.probabilities) {
            let y = f(&x.0);
            let slot = acc.entry(y).or_insert_with(N::zero);
            *slot = slot.clone() + p.clone();
        }
        let (support, weights): (Vec<_>, Vec<_>) = acc.into_iter().map(|(y, p)| (SupportPoint(y), p)).unzip();
        let meta = TableMeta {
            law: law.into(),
            labels,
            ..self.meta.clone()
        };
        PmfTable::from_weights(meta, support, weights).expect("pushforward of a normalized table")
    }

    /// Law of the first `r` coordinates.
    pub fn marginal_prefix(&self, r: usize, law: impl Into<String>) -> Self {
        let labels = self.meta.labels[..r].to_vec();
        self.pushforward(law, labels, |x| x[..r].to_vec())
    }

    /// Law of coordinates `given.len()..m` given that the first coordinates
    /// equal `given`.
    pub fn conditional_on_prefix(&self, given: &[u32], m: usize, law: impl Into<String>) -> Result<Self> {
        let r = given.len();
        let mut acc: BTreeMap<Vec<u32>, N> = BTreeMap::new();
        let mut mass = N::zero();
        for (x, p) in self.support.iter().zip(&self.probabilities) {
            if &x.0[..r] == given && p.is_positive() {
                let slot = acc.entry(x.0[r..m].to_vec()).or_insert_with(N::zero);
                *slot = slot.clone() + p.clone();
                mass = mass + p.clone();
            }
        }
        if !mass.is_positive() {
            return Err(Error::ZeroProbabilityEvent { given: given.to_vec() });
        }
        let (support, weights): (Vec<_>, Vec<_>) = acc.into_iter().map(|(y, p)| (SupportPoint(y), p)).unzip();
        let meta = TableMeta {
            law: law.into(),
            labels: self.meta.labels[r..m].to_vec(),
            ..self.meta.clone()
        };
        PmfTable::from_weights(meta, support, weights)
    }
}

type CachedJoint<N> = (AlgebraSpec<N>, u32, u32, PmfTable<N>);

/// A joint table built once per `(algebra, k, n)`.
#[derive(Clone)]
pub(crate) struct JointCache<N>(Arc<Mutex<Option<CachedJoint<N>>>>);

impl<N> Default for JointCache<N> {
    fn default() -> Self {
        JointCache(Arc::new(Mutex::new(None)))
    }
}

impl<N> fmt::Debug for JointCache<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("JointCache")
    }
}

impl<N: Field> JointCache<N> {
    pub(crate) fn get_or(&self, alg: &AlgebraSpec<N>, k: u32, n: u32, build: impl FnOnce() -> Result<PmfTable<N>>) -> Result<PmfTable<N>> {
        let mut slot = self.0.lock().expect("joint cache lock");
        if let Some((a, kk, nn, t)) = slot.as_ref() {
            if a == alg && *kk == k && *nn == n {
                return Ok(t.clone());
            }
        }
        let t = build()?;
        *slot = Some((alg.clone(), k, n, t.clone()));
        Ok(t)
    }
}

/// `Σ f(x) P(x)` over a table.
pub fn oracle_expectation<N: Field>(pmf: &PmfTable<N>, f: impl Fn(&[u32]) -> N) -> N {
    pmf.expectation(f)
}

/// Closed form versus oracle at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCheck<N> {
    pub point: SupportPoint,
    pub closed: N,
    pub oracle: N,
    pub exact: bool,
    /// `closed · τ₁^a τ₂^b = oracle`, when not exact and such a monomial exists.
    pub monomial: Option<Monomial>,
}

/// Pointwise comparison of a closed-form law with an enumerated table.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCheck<N> {
    pub law: String,
    pub points: Vec<PointCheck<N>>,
}

impl<N: Field> ClosedFormCheck<N> {
    /// Compare `closed` with `table` on every point of `candidates` and of the
    /// table's support. Off-support points have oracle probability zero.
    pub fn compare(
        law: impl Into<String>,
        table: &PmfTable<N>,
        candidates: &ConstraintSet,
        closed: impl Fn(&[u32]) -> N,
        alg: &AlgebraSpec<N>,
        bound: i64,
    ) -> Result<Self> {
        let mut keys: std::collections::BTreeSet<SupportPoint> = lattice::enumerate(candidates)?.into_iter().collect();
        keys.extend(table.support.iter().cloned());
        let points = keys
            .into_iter()
            .map(|point| {
                let c = closed(&point.0);
                let o = table.probability(&point.0);
                let exact = c.close_to(&o, DEFAULT_TOL);
                let monomial = if exact {
                    Some(Monomial::ONE)
                } else {
                    fit_monomial(&c, &o, &alg.tau1, &alg.tau2, bound)
                };
                PointCheck {
                    point,
                    closed: c,
                    oracle: o,
                    exact,
                    monomial,
                }
            })
            .collect();
        Ok(ClosedFormCheck { law: law.into(), points })
    }

    pub fn all_exact(&self) -> bool {
        self.points.iter().all(|p| p.exact)
    }

    pub fn mismatches(&self) -> impl Iterator<Item = &PointCheck<N>> {
        self.points.iter().filter(|p| !p.exact)
    }
}

/// A closed-form moment against its oracle value.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport<N> {
    /// E.g. `E([X1]^i)`, `V([X1])`, `Cov([X1], tau2^-X1 [X2])`.
    pub quantity: String,
    pub order: Option<u32>,
    /// `None` when the formula cannot be evaluated as stated.
    pub closed_form: Option<N>,
    pub oracle: N,
    pub matched: bool,
    /// `closed · τ₁^a τ₂^b = oracle`, when not matched and such a monomial exists.
    pub discrepancy: Option<Monomial>,
    pub note: String,
}

impl<N: Field> MomentReport<N> {
    pub fn new(
        quantity: impl Into<String>,
        order: Option<u32>,
        closed_form: Option<N>,
        oracle: N,
        alg: &AlgebraSpec<N>,
        bound: i64,
    ) -> Self {
        let (matched, discrepancy) = match &closed_form {
            Some(c) if c.close_to(&oracle, DEFAULT_TOL) => (true, Some(Monomial::ONE)),
            Some(c) => (false, fit_monomial(c, &oracle, &alg.tau1, &alg.tau2, bound)),
            None => (false, None),
        };
        MomentReport {
            quantity: quantity.into(),
            order,
            closed_form,
            oracle,
            matched,
            discrepancy,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// Search bound for discrepancy fits on distribution tables.
pub fn table_fit_bound(k: u32, n: u32) -> i64 {
    let s = i64::from(k + n + 1);
    s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn table() -> PmfTable<Exact> {
        let alg = AlgebraSpec::q_deformation(Exact::from_ratio(1, 2)).unwrap();
        let meta = TableMeta::new(Kind::First, "joint", 2, 1, &alg, labels("x", 1, 2));
        let support = vec![vec![0, 0], vec![0, 1], vec![1, 0]].into_iter().map(SupportPoint).collect();
        let w = vec![Exact::one(), Exact::from_ratio(1, 2), Exact::from_ratio(1, 4)];
        PmfTable::from_weights(meta, support, w).unwrap()
    }

    #[test]
    fn normalizes_by_enumerated_sum() {
        let t = table();
        assert_eq!(t.z_enumerated, Exact::from_ratio(7, 4));
        assert_eq!(t.probabilities[0], Exact::from_ratio(4, 7));
        assert_eq!(t.total(), Exact::one());
        assert_eq!(t.probability(&[1, 1]), Exact::zero());
    }

    #[test]
    fn expectations() {
        let t = table();
        assert_eq!(oracle_expectation(&t, |_| Exact::one()), Exact::one());
        assert_eq!(
            oracle_expectation(&t, |x| Exact::from_i64(x[0].into())),
            Exact::from_ratio(1, 7)
        );
    }

    #[test]
    fn marginal_and_conditional() {
        let t = table();
        let m = t.marginal_prefix(1, "marginal r=1");
        assert_eq!(m.probabilities, vec![Exact::from_ratio(6, 7), Exact::from_ratio(1, 7)]);
        let c = t.conditional_on_prefix(&[0], 2, "conditional").unwrap();
        assert_eq!(c.probability(&[1]), Exact::from_ratio(1, 3));
        let c = t.conditional_on_prefix(&[1], 2, "conditional").unwrap();
        assert_eq!(c.probability(&[0]), Exact::one());
        assert!(matches!(
            t.conditional_on_prefix(&[2], 2, "conditional"),
            Err(Error::ZeroProbabilityEvent { .. })
        ));
    }

    #[test]
    fn rejects_zero_mass() {
        let alg = AlgebraSpec::q_deformation(Exact::from_ratio(1, 2)).unwrap();
        let meta = TableMeta::new(Kind::First, "joint", 1, 0, &alg, labels("x", 1, 1));
        let r = PmfTable::from_weights(meta, vec![SupportPoint(vec![0])], vec![Exact::zero()]);
        assert!(matches!(r, Err(Error::Unnormalized(_))));
    }
}
