//! First kind: `n` balls in `k+1` urns of capacity one.
//!
//! The state is `x ∈ {0,1}^k`; urn `k+1` holds the remaining `n - Σx`, so the
//! support is `Σx ∈ {max(0,n-1), n}`. With `S = Σ (k-j+1) x_j` the weight is
//!
//! ```text
//! τ₁^{-S + C(n,2) + kn} τ₂^{S - C(n,2)}
//! ```

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::grouping::GroupingScheme;
use crate::lattice::{self, ConstraintSet, SupportPoint};
use crate::pmf::{labels, JointCache, table_fit_bound, ClosedFormCheck, Kind, MomentReport, PmfTable, TableMeta};
use crate::scalar::{Field, DEFAULT_TOL};

#[derive(Debug, Clone)]
pub struct FirstKindParams<N> {
    pub alg: AlgebraSpec<N>,
    pub k: u32,
    pub n: u32,
    joint: JointCache<N>,
}

impl<N: Field> FirstKindParams<N> {
    pub fn new(alg: AlgebraSpec<N>, k: u32, n: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::invalid("k", "k must be at least 1"));
        }
        if n > k + 1 {
            return Err(Error::invalid("n", format!("first kind requires n <= k+1 (k={k}, n={n})")));
        }
        Ok(FirstKindParams {
            alg,
            k,
            n,
            joint: JointCache::default(),
        })
    }

    pub fn support(&self) -> ConstraintSet {
        ConstraintSet::first_kind(self.k as usize, self.n)
    }

    fn bound(&self) -> i64 {
        table_fit_bound(self.k, self.n)
    }

    fn meta(&self, law: impl Into<String>, labels: Vec<String>) -> TableMeta {
        TableMeta::new(Kind::First, law, self.k, self.n, &self.alg, labels)
    }
}

fn c2(n: i64) -> i64 {
    n * (n - 1) / 2
}

/// `S = Σ_j (k-j+1) x_j`.
pub(crate) fn s_weight(k: u32, x: &[u32]) -> i64 {
    x.iter()
        .enumerate()
        .map(|(i, &v)| (i64::from(k) - i as i64) * i64::from(v))
        .sum()
}

/// `(a, b)` with `weight(x) = τ₁^a τ₂^b`.
pub fn weight_exponents(k: u32, n: u32, x: &[u32]) -> (i64, i64) {
    let s = s_weight(k, x);
    let n = i64::from(n);
    (-s + c2(n) + i64::from(k) * n, s - c2(n))
}

/// Placement law of one ball over `r` urns: `τ₂^{j-1}/[r]`, or `τ₂^{r-j}/[r]`
/// when `reversed`. Probabilities use the enumerated normalizer; `[r]` is
/// recorded as the closed-form one.
pub fn single_ball_pmf<N: Field>(alg: &AlgebraSpec<N>, r: u32, reversed: bool) -> Result<PmfTable<N>> {
    if r == 0 {
        return Err(Error::invalid("r", "at least one urn is required"));
    }
    let support = (1..=r).map(|j| SupportPoint(vec![j])).collect();
    let weights = (1..=r)
        .map(|j| alg.tau2.powi(i64::from(if reversed { r - j } else { j - 1 })))
        .collect();
    let law = if reversed { "placement reversed" } else { "placement" };
    let meta = TableMeta::new(Kind::Placement, law, r, 1, alg, vec!["urn".into()]);
    let t = PmfTable::from_weights(meta, support, weights)?;
    let nr = alg.number(r);
    Ok(t.with_closed_normalizer(nr, &alg.tau1, &alg.tau2, i64::from(r) * i64::from(r)))
}

/// The joint law of `(X_1..X_k)`.
pub fn joint_pmf<N: Field>(params: &FirstKindParams<N>) -> Result<PmfTable<N>> {
    params.joint.get_or(&params.alg, params.k, params.n, || build_joint(params))
}

fn build_joint<N: Field>(params: &FirstKindParams<N>) -> Result<PmfTable<N>> {
    let (k, n, alg) = (params.k, params.n, &params.alg);
    let support = lattice::enumerate(&params.support())?;
    let weights = support
        .iter()
        .map(|x| {
            let (a, b) = weight_exponents(k, n, &x.0);
            alg.monomial(a, b)
        })
        .collect();
    let t = PmfTable::from_weights(params.meta("joint", labels("x", 1, k)), support, weights)?;
    Ok(t.with_closed_normalizer(alg.binomial(k + 1, n)?, &alg.tau1, &alg.tau2, params.bound()))
}

/// Outcome of a conditional-construction check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionReport<N> {
    pub theta: N,
    /// The enumerated conditional law of the trials.
    pub conditional: PmfTable<N>,
    /// The joint law it should equal (inverse-parameter algebra).
    pub target: PmfTable<N>,
    pub exact: bool,
    pub mismatches: Vec<SupportPoint>,
}

impl<N: Field> ConstructionReport<N> {
    pub(crate) fn compare(theta: N, conditional: PmfTable<N>, target: PmfTable<N>) -> Self {
        let mut keys: Vec<SupportPoint> = conditional.support.iter().chain(&target.support).cloned().collect();
        keys.sort();
        keys.dedup();
        let mismatches: Vec<SupportPoint> = keys
            .into_iter()
            .filter(|x| !conditional.probability(&x.0).close_to(&target.probability(&x.0), DEFAULT_TOL))
            .collect();
        ConstructionReport {
            theta,
            exact: mismatches.is_empty(),
            conditional,
            target,
            mismatches,
        }
    }

    /// Same conditional law as `other` (θ-invariance).
    pub fn same_law(&self, other: &Self) -> bool {
        self.conditional.support == other.conditional.support
            && self
                .conditional
                .probabilities
                .iter()
                .zip(&other.conditional.probabilities)
                .all(|(a, b)| a.close_to(b, DEFAULT_TOL))
    }
}

pub(crate) fn check_theta<N: Field>(theta: &N) -> Result<()> {
    if theta.is_positive() && *theta < N::one() {
        Ok(())
    } else {
        Err(Error::invalid("theta", format!("must lie in (0,1), got {theta}")))
    }
}

/// Independent trials with success probability
/// `P_i = θτ₂^{i-1} / (τ₁^{i-1} + θτ₂^{i-1})`, `i = 1..k+1`, conditioned on
/// `n` successes; compared with [`joint_pmf`] of the inverse algebra.
pub fn bernoulli_construction_check<N: Field>(alg: &AlgebraSpec<N>, k: u32, n: u32, theta: &N) -> Result<ConstructionReport<N>> {
    check_theta(theta)?;
    let target = joint_pmf(&FirstKindParams::new(alg.inverse()?, k, n)?)?;
    let success: Vec<N> = (0..=k)
        .map(|i| {
            let num = theta.clone() * alg.tau2.powi(i.into());
            num.clone() / (alg.tau1.powi(i.into()) + num)
        })
        .collect();
    let trials = ConstraintSet::boxed(k as usize + 1, 1, n, n)?;
    let points = lattice::enumerate(&trials)?;
    let weights = points
        .iter()
        .map(|x| {
            x.0.iter().zip(&success).fold(N::one(), |acc, (&xi, p)| {
                acc * if xi == 1 { p.clone() } else { N::one() - p.clone() }
            })
        })
        .collect();
    let meta = TableMeta::new(Kind::First, "bernoulli trials", k, n, alg, labels("x", 1, k + 1));
    let all = PmfTable::from_weights(meta, points, weights)?;
    let conditional = all.marginal_prefix(k as usize, "bernoulli conditional");
    Ok(ConstructionReport::compare(theta.clone(), conditional, target))
}

pub(crate) fn prefix_sums(x: &[u32]) -> Vec<i64> {
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(0);
    for &v in x {
        out.push(out.last().unwrap() + i64::from(v));
    }
    out
}

/// Closed form of `P(X_1..X_r = x)`.
pub fn marginal_closed_form<N: Field>(params: &FirstKindParams<N>, x: &[u32]) -> N {
    let (k, n, alg) = (i64::from(params.k), i64::from(params.n), &params.alg);
    let r = x.len() as i64;
    let y = x.iter().map(|&v| i64::from(v)).sum::<i64>();
    let e: i64 = x
        .iter()
        .enumerate()
        .map(|(i, &v)| (k - (i as i64 + 1) - n + y + 1) * i64::from(v))
        .sum();
    alg.monomial(-e + c2(y) + k * n, e - c2(y)) * alg.binomial_or_zero(k - r + 1, n - y) / alg.binomial_or_zero(k + 1, n)
}

/// Law of `(X_1..X_r)`, `1 <= r < k`, from the joint table, with the closed
/// form attached.
pub fn marginal_pmf<N: Field>(params: &FirstKindParams<N>, r: u32) -> Result<PmfTable<N>> {
    if r < 1 || r >= params.k {
        return Err(Error::invalid("r", format!("marginal requires 1 <= r < k (k={}, r={r})", params.k)));
    }
    let t = joint_pmf(params)?.marginal_prefix(r as usize, format!("marginal r={r}"));
    Ok(t.with_closed_form(|x| marginal_closed_form(params, x)))
}

pub fn check_marginal<N: Field>(params: &FirstKindParams<N>, r: u32) -> Result<ClosedFormCheck<N>> {
    let t = marginal_pmf(params, r)?;
    let cand = ConstraintSet::boxed(r as usize, 1, 0, params.n)?;
    ClosedFormCheck::compare(t.meta.law.clone(), &t, &cand, |x| marginal_closed_form(params, x), &params.alg, params.bound())
}

/// Closed form of `P(X_{r+1}..X_m = ext | X_1..X_r = given)`.
pub fn conditional_closed_form<N: Field>(params: &FirstKindParams<N>, given: &[u32], ext: &[u32]) -> N {
    let (k, n, alg) = (i64::from(params.k), i64::from(params.n), &params.alg);
    let r = given.len() as i64;
    let m = r + ext.len() as i64;
    let yr: i64 = given.iter().map(|&v| i64::from(v)).sum();
    let ym = yr + ext.iter().map(|&v| i64::from(v)).sum::<i64>();
    let (mut ea, mut eb) = (0i64, 0i64);
    for (i, &v) in ext.iter().enumerate() {
        let j = r + 1 + i as i64;
        ea += (k - j - n + yr + 1) * i64::from(v);
        eb += (k - j - n + ym + 1) * i64::from(v);
    }
    let d = c2(ym - yr);
    alg.monomial(-ea + d + k * n, eb - d) * alg.binomial_or_zero(k - m + 1, n - ym)
        / alg.binomial_or_zero(k - r + 1, n - yr)
}

/// Law of `(X_{r+1}..X_m)` given `(X_1..X_r) = given`, `1 <= r < m <= k`.
pub fn conditional_pmf<N: Field>(params: &FirstKindParams<N>, given: &[u32], m: u32) -> Result<PmfTable<N>> {
    let r = given.len() as u32;
    if r < 1 || r >= m || m > params.k {
        return Err(Error::invalid("m", format!("conditional requires 1 <= r < m <= k (r={r}, m={m}, k={})", params.k)));
    }
    let law = format!("conditional r={r} m={m}");
    let t = joint_pmf(params)?.conditional_on_prefix(given, m as usize, law)?;
    Ok(t.with_closed_form(|x| conditional_closed_form(params, given, x)))
}

pub fn check_conditional<N: Field>(params: &FirstKindParams<N>, given: &[u32], m: u32) -> Result<ClosedFormCheck<N>> {
    let t = conditional_pmf(params, given, m)?;
    let yr: u32 = given.iter().sum();
    let cand = ConstraintSet::boxed((m as usize) - given.len(), 1, 0, params.n.saturating_sub(yr))?;
    ClosedFormCheck::compare(t.meta.law.clone(), &t, &cand, |x| conditional_closed_form(params, given, x), &params.alg, params.bound())
}

/// Grouped exponents summed over groups `from..=to` (1-based), given the
/// group totals `y_1..y_to`.
fn grouped_exponents(k: i64, n: i64, scheme: &GroupingScheme, y: &[u32], from: usize, to: usize) -> (i64, i64) {
    let z = prefix_sums(&y[..to]);
    let (mut a, mut b) = (0i64, 0i64);
    for j in from..=to {
        let (mj, sj, yj) = (i64::from(scheme.m(j)), i64::from(scheme.s(j)), i64::from(y[j - 1]));
        a += (n - z[j] - sj) * (mj - yj);
        b += (k - sj - n + z[j] + 1) * yj;
    }
    (a, b)
}

/// Closed form of `P(Y_1..Y_ν = y)` for `ν = y.len() <= r`. At `ν = r` the
/// trailing factor `[1, n - z_r]` restricts to the capped window.
pub fn grouped_closed_form<N: Field>(params: &FirstKindParams<N>, scheme: &GroupingScheme, y: &[u32]) -> N {
    let (k, n, alg) = (i64::from(params.k), i64::from(params.n), &params.alg);
    let nu = y.len();
    let (a, b) = grouped_exponents(k, n, scheme, y, 1, nu);
    let z: i64 = y.iter().map(|&v| i64::from(v)).sum();
    let coef = (1..=nu).fold(N::one(), |acc, j| acc * alg.binomial_or_zero(scheme.m(j).into(), y[j - 1].into()));
    alg.monomial(a, b) * coef * alg.binomial_or_zero(k - i64::from(scheme.s(nu)) + 1, n - z)
        / alg.binomial_or_zero(k + 1, n)
}

/// Closed form of `P(Y_{ν+1}..Y_{ν'} = ext | Y_1..Y_ν = given)`.
pub fn grouped_conditional_closed_form<N: Field>(
    params: &FirstKindParams<N>,
    scheme: &GroupingScheme,
    given: &[u32],
    ext: &[u32],
) -> N {
    let (k, n, alg) = (i64::from(params.k), i64::from(params.n), &params.alg);
    let nu = given.len();
    let nu2 = nu + ext.len();
    let y: Vec<u32> = given.iter().chain(ext).copied().collect();
    let (a, b) = grouped_exponents(k, n, scheme, &y, nu + 1, nu2);
    let z = prefix_sums(&y);
    let coef = (nu + 1..=nu2).fold(N::one(), |acc, j| acc * alg.binomial_or_zero(scheme.m(j).into(), y[j - 1].into()));
    alg.monomial(a, b) * coef * alg.binomial_or_zero(k - i64::from(scheme.s(nu2)) + 1, n - z[nu2])
        / alg.binomial_or_zero(k - i64::from(scheme.s(nu)) + 1, n - z[nu])
}

pub(crate) fn check_scheme_k(k: u32, scheme: &GroupingScheme) -> Result<()> {
    if scheme.k() != k {
        return Err(Error::invalid("groups", format!("group sizes must sum to k = {k}")));
    }
    Ok(())
}

fn grouped_oracle<N: Field>(params: &FirstKindParams<N>, scheme: &GroupingScheme) -> Result<PmfTable<N>> {
    check_scheme_k(params.k, scheme)?;
    let r = scheme.len() as u32;
    Ok(joint_pmf(params)?.pushforward(format!("grouped {}", scheme.label()), labels("y", 1, r), |x| scheme.apply(x)))
}

/// Law of the group totals `(Y_1..Y_r)`.
pub fn grouped_pmf<N: Field>(params: &FirstKindParams<N>, scheme: &GroupingScheme) -> Result<PmfTable<N>> {
    Ok(grouped_oracle(params, scheme)?.with_closed_form(|y| grouped_closed_form(params, scheme, y)))
}

pub fn check_grouped<N: Field>(params: &FirstKindParams<N>, scheme: &GroupingScheme) -> Result<ClosedFormCheck<N>> {
    let t = grouped_pmf(params, scheme)?;
    let cand = ConstraintSet::new(vec![0; scheme.len()], scheme.sizes().to_vec(), 0, params.n)?;
    ClosedFormCheck::compare(t.meta.law.clone(), &t, &cand, |y| grouped_closed_form(params, scheme, y), &params.alg, params.bound())
}

/// Law of `(Y_1..Y_ν)`, `1 <= ν < r`.
pub fn grouped_marginal_pmf<N: Field>(params: &FirstKindParams<N>, scheme: &GroupingScheme, nu: u32) -> Result<PmfTable<N>> {
    if nu < 1 || nu as usize >= scheme.len() {
        return Err(Error::invalid("r", format!("grouped marginal requires 1 <= nu < {}", scheme.len())));
    }
    let law = format!("grouped {} marginal nu={nu}", scheme.label());
    let t = grouped_oracle(params, scheme)?.marginal_prefix(nu as usize, law);
    Ok(t.with_closed_form(|y| grouped_closed_form(params, scheme, y)))
}

pub fn check_grouped_marginal<N: Field>(params: &FirstKindParams<N>, scheme: &GroupingScheme, nu: u32) -> Result<ClosedFormCheck<N>> {
    let t = grouped_marginal_pmf(params, scheme, nu)?;
    let cand = ConstraintSet::new(vec![0; nu as usize], scheme.sizes()[..nu as usize].to_vec(), 0, params.n)?;
    ClosedFormCheck::compare(t.meta.law.clone(), &t, &cand, |y| grouped_closed_form(params, scheme, y), &params.alg, params.bound())
}

/// Law of `(Y_{ν+1}..Y_{upto})` given `(Y_1..Y_ν) = given`.
pub fn grouped_conditional_pmf<N: Field>(
    params: &FirstKindParams<N>,
    scheme: &GroupingScheme,
    given: &[u32],
    upto: u32,
) -> Result<PmfTable<N>> {
    let nu = given.len();
    if nu < 1 || nu >= upto as usize || upto as usize > scheme.len() {
        return Err(Error::invalid("m", format!("grouped conditional requires 1 <= nu < m <= {}", scheme.len())));
    }
    let law = format!("grouped {} conditional nu={nu} m={upto}", scheme.label());
    let t = grouped_oracle(params, scheme)?.conditional_on_prefix(given, upto as usize, law)?;
    Ok(t.with_closed_form(|y| grouped_conditional_closed_form(params, scheme, given, y)))
}

pub fn check_grouped_conditional<N: Field>(
    params: &FirstKindParams<N>,
    scheme: &GroupingScheme,
    given: &[u32],
    upto: u32,
) -> Result<ClosedFormCheck<N>> {
    let t = grouped_conditional_pmf(params, scheme, given, upto)?;
    let z: u32 = given.iter().sum();
    let ups = scheme.sizes()[given.len()..upto as usize].to_vec();
    let cand = ConstraintSet::new(vec![0; ups.len()], ups, 0, params.n.saturating_sub(z))?;
    ClosedFormCheck::compare(
        t.meta.law.clone(),
        &t,
        &cand,
        |y| grouped_conditional_closed_form(params, scheme, given, y),
        &params.alg,
        params.bound(),
    )
}

fn indicator<N: Field>(v: u32) -> N {
    N::from_i64(v.into())
}

/// `μ = τ₁^{kn} [n]' / [k+1]'` in the inverse algebra.
fn mean_closed<N: Field>(params: &FirstKindParams<N>, inv: &AlgebraSpec<N>) -> N {
    let (k, n) = (params.k, params.n);
    params.alg.tau1.powi(i64::from(k) * i64::from(n)) * inv.number(n) / inv.number(k + 1)
}

/// `E([X_1]'^i)` against `τ₁^{kn} [n]'/[k+1]'` (primes: inverse algebra).
/// Valid for any `k >= 1`; `[X]'^i = X` on `{0,1}`.
pub fn mean_report<N: Field>(params: &FirstKindParams<N>, i: u32) -> Result<MomentReport<N>> {
    let inv = params.alg.inverse()?;
    let joint = joint_pmf(params)?;
    let oracle = joint.expectation(|x| inv.number(x[0]).powi(i.into()));
    let closed = mean_closed(params, &inv);
    Ok(MomentReport::new("E([X1]^i)", Some(i), Some(closed), oracle, &params.alg, params.bound()))
}

/// Mean, variance, mixed moment and covariance of `(X_1, X_2)`, `k >= 2`.
/// Numbers in brackets are those of the inverse algebra.
pub fn bivariate_moments<N: Field>(params: &FirstKindParams<N>, max_order: u32) -> Result<Vec<MomentReport<N>>> {
    if params.k < 2 {
        return Err(Error::invalid("k", "bivariate moments require k >= 2"));
    }
    let (k, n, alg) = (params.k, params.n, &params.alg);
    let inv = alg.inverse()?;
    let joint = joint_pmf(params)?;
    let bound = params.bound();
    let (ki, ni) = (i64::from(k), i64::from(n));
    let num = |m: u32| inv.number(m);
    let mu = mean_closed(params, &inv);
    let mut out = Vec::new();

    for i in 1..=max_order {
        let oracle = joint.expectation(|x| num(x[0]).powi(i.into()));
        out.push(MomentReport::new("E([X1]^i)", Some(i), Some(mu.clone()), oracle, alg, bound));
    }

    let mean = joint.expectation(|x| indicator(x[0]));
    let var = joint.expectation(|x| {
        let d = num(x[0]) - mean.clone();
        d.clone() * d
    });
    let var_closed = mu.clone() * (N::one() - mu.clone());
    let mut rep = MomentReport::new("V([X1])", None, Some(var_closed), var, alg, bound);
    if !(mu <= N::one()) {
        rep = rep.with_note("closed-form mean exceeds one; not a Bernoulli mean");
    }
    out.push(rep);

    // E(τ₂^{-X₁} [X₂]^i) = τ₂^{-1} [n] / (τ₁^{n(1-k)} [k+1])
    let mixed_closed = alg.monomial(-ni * (1 - ki), -1) * num(n) / num(k + 1);
    for i in 1..=max_order {
        let oracle = joint.expectation(|x| alg.tau2.powi(-i64::from(x[0])) * num(x[1]).powi(i.into()));
        out.push(MomentReport::new("E(tau2^-X1 [X2]^i)", Some(i), Some(mixed_closed.clone()), oracle, alg, bound));
    }

    // Cov([X₁], τ₂^{-X₁}[X₂]) = τ₂^{-1}[n] Δ / (τ₁^{n(1-k)} [k+1]² [k]),
    // Δ = τ₁ⁿ [n-1][k+1] - [n][k].
    let e1 = joint.expectation(|x| num(x[0]));
    let e2 = joint.expectation(|x| alg.tau2.powi(-i64::from(x[0])) * num(x[1]));
    let e12 = joint.expectation(|x| num(x[0]) * alg.tau2.powi(-i64::from(x[0])) * num(x[1]));
    let cov = e12 - e1 * e2;
    let cov_closed = if n == 0 {
        N::zero()
    } else {
        let delta = alg.tau1.powi(ni) * num(n - 1) * num(k + 1) - num(n) * num(k);
        let k1 = num(k + 1);
        alg.monomial(-ni * (1 - ki), -1) * num(n) * delta / (k1.clone() * k1 * num(k))
    };
    out.push(MomentReport::new("Cov([X1], tau2^-X1 [X2])", None, Some(cov_closed), cov, alg, bound));
    Ok(out)
}
