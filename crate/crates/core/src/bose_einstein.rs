//! Second kind: `n` balls in `k+1` urns of unlimited capacity.
//!
//! The state is `x ∈ {0..n}^k` with `Σx <= n`; urn `k+1` absorbs the rest.
//! With `S = Σ (k-j+1) x_j` the weight is `τ₁^{-S + 2kn + C(k+1,2)} τ₂^S`.

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::fermi_dirac::{check_scheme_k, check_theta, prefix_sums, s_weight, ConstructionReport};
use crate::grouping::GroupingScheme;
use crate::lattice::{self, ConstraintSet};
use crate::pmf::{labels, JointCache, table_fit_bound, ClosedFormCheck, Kind, MomentReport, PmfTable, TableMeta};
use crate::scalar::Field;

#[derive(Debug, Clone)]
pub struct SecondKindParams<N> {
    pub alg: AlgebraSpec<N>,
    pub k: u32,
    pub n: u32,
    joint: JointCache<N>,
}

impl<N: Field> SecondKindParams<N> {
    pub fn new(alg: AlgebraSpec<N>, k: u32, n: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::invalid("k", "k must be at least 1"));
        }
        Ok(SecondKindParams {
            alg,
            k,
            n,
            joint: JointCache::default(),
        })
    }

    pub fn support(&self) -> ConstraintSet {
        ConstraintSet::second_kind(self.k as usize, self.n)
    }

    fn bound(&self) -> i64 {
        table_fit_bound(self.k, self.n)
    }

    fn meta(&self, law: impl Into<String>, labels: Vec<String>) -> TableMeta {
        TableMeta::new(Kind::Second, law, self.k, self.n, &self.alg, labels)
    }

    /// `2kn + C(k+1,2)`.
    fn tau1_offset(&self) -> i64 {
        let (k, n) = (i64::from(self.k), i64::from(self.n));
        2 * k * n + k * (k + 1) / 2
    }
}

/// `(a, b)` with `weight(x) = τ₁^a τ₂^b`.
pub fn weight_exponents(k: u32, n: u32, x: &[u32]) -> (i64, i64) {
    let s = s_weight(k, x);
    let (ki, ni) = (i64::from(k), i64::from(n));
    (-s + 2 * ki * ni + ki * (ki + 1) / 2, s)
}

/// The joint law of `(X_1..X_k)`. The closed-form normalizer is `[k+n, n]`.
pub fn joint_pmf2<N: Field>(params: &SecondKindParams<N>) -> Result<PmfTable<N>> {
    params.joint.get_or(&params.alg, params.k, params.n, || build_joint(params))
}

fn build_joint<N: Field>(params: &SecondKindParams<N>) -> Result<PmfTable<N>> {
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
    Ok(t.with_closed_normalizer(alg.binomial(k + n, n)?, &alg.tau1, &alg.tau2, params.bound()))
}

/// Independent failure counts with
/// `P(W_j = w) = τ₁^{(1-j)(w+1)} (θτ₂^{j-1})^w (τ₁^{j-1} - θτ₂^{j-1})`,
/// `j = 1..k+1`, conditioned on `Σ W = n`; compared with [`joint_pmf2`] of the
/// inverse algebra. Requires `0 < θ(τ₂/τ₁)^{j-1} < 1` for every trial.
pub fn geometric_construction_check<N: Field>(alg: &AlgebraSpec<N>, k: u32, n: u32, theta: &N) -> Result<ConstructionReport<N>> {
    check_theta(theta)?;
    let ratio = alg.ratio();
    for j in 0..=k {
        let p = theta.clone() * ratio.powi(j.into());
        if !(p.is_positive() && p < N::one()) {
            return Err(Error::invalid(
                "theta",
                format!("success probability of trial {} is {p}, outside (0,1)", j + 1),
            ));
        }
    }
    let target = joint_pmf2(&SecondKindParams::new(alg.inverse()?, k, n)?)?;
    let trials = ConstraintSet::boxed(k as usize + 1, n, n, n)?;
    let points = lattice::enumerate(&trials)?;
    let weights = points
        .iter()
        .map(|w| {
            w.0.iter().enumerate().fold(N::one(), |acc, (j, &wj)| {
                let (j, wj) = (j as i64, i64::from(wj));
                let t1 = alg.tau1.powi(j);
                let succ = theta.clone() * alg.tau2.powi(j);
                acc * alg.tau1.powi(-j * (wj + 1)) * succ.powi(wj) * (t1 - succ)
            })
        })
        .collect();
    let meta = TableMeta::new(Kind::Second, "geometric trials", k, n, alg, labels("w", 1, k + 1));
    let all = PmfTable::from_weights(meta, points, weights)?;
    let conditional = all.marginal_prefix(k as usize, "geometric conditional");
    Ok(ConstructionReport::compare(theta.clone(), conditional, target))
}

/// Closed form of `P(X_1..X_r = x)`.
pub fn marginal_closed_form2<N: Field>(params: &SecondKindParams<N>, x: &[u32]) -> N {
    let (k, n, alg) = (i64::from(params.k), i64::from(params.n), &params.alg);
    let r = x.len() as i64;
    let y: i64 = x.iter().map(|&v| i64::from(v)).sum();
    let e: i64 = x.iter().enumerate().map(|(i, &v)| (k - i as i64) * i64::from(v)).sum();
    alg.monomial(-(e + params.tau1_offset()), e) * alg.binomial_or_zero(k - r + n - y, n - y)
        / alg.binomial_or_zero(k + n, n)
}

/// Law of `(X_1..X_r)`, `1 <= r < k`, with the closed form attached.
pub fn marginal_pmf2<N: Field>(params: &SecondKindParams<N>, r: u32) -> Result<PmfTable<N>> {
    if r < 1 || r >= params.k {
        return Err(Error::invalid("r", format!("marginal requires 1 <= r < k (k={}, r={r})", params.k)));
    }
    let t = joint_pmf2(params)?.marginal_prefix(r as usize, format!("marginal r={r}"));
    Ok(t.with_closed_form(|x| marginal_closed_form2(params, x)))
}

pub fn check_marginal2<N: Field>(params: &SecondKindParams<N>, r: u32) -> Result<ClosedFormCheck<N>> {
    let t = marginal_pmf2(params, r)?;
    let cand = ConstraintSet::second_kind(r as usize, params.n);
    ClosedFormCheck::compare(t.meta.law.clone(), &t, &cand, |x| marginal_closed_form2(params, x), &params.alg, params.bound())
}

/// Closed form of `P(X_{r+1}..X_m = ext | X_1..X_r = given)`.
pub fn conditional_closed_form2<N: Field>(params: &SecondKindParams<N>, given: &[u32], ext: &[u32]) -> N {
    let (k, n, alg) = (i64::from(params.k), i64::from(params.n), &params.alg);
    let r = given.len() as i64;
    let m = r + ext.len() as i64;
    let yr: i64 = given.iter().map(|&v| i64::from(v)).sum();
    let ym = yr + ext.iter().map(|&v| i64::from(v)).sum::<i64>();
    let e: i64 = ext
        .iter()
        .enumerate()
        .map(|(i, &v)| (k - (r + 1 + i as i64) + 1) * i64::from(v))
        .sum();
    alg.monomial(-(e + params.tau1_offset()), e) * alg.binomial_or_zero(k - m + n - ym, n - ym)
        / alg.binomial_or_zero(k - r + n - yr, n - yr)
}

/// Law of `(X_{r+1}..X_m)` given `(X_1..X_r) = given`, `1 <= r < m <= k`.
pub fn conditional_pmf2<N: Field>(params: &SecondKindParams<N>, given: &[u32], m: u32) -> Result<PmfTable<N>> {
    let r = given.len() as u32;
    if r < 1 || r >= m || m > params.k {
        return Err(Error::invalid("m", format!("conditional requires 1 <= r < m <= k (r={r}, m={m}, k={})", params.k)));
    }
    let law = format!("conditional r={r} m={m}");
    let t = joint_pmf2(params)?.conditional_on_prefix(given, m as usize, law)?;
    Ok(t.with_closed_form(|x| conditional_closed_form2(params, given, x)))
}

pub fn check_conditional2<N: Field>(params: &SecondKindParams<N>, given: &[u32], m: u32) -> Result<ClosedFormCheck<N>> {
    let t = conditional_pmf2(params, given, m)?;
    let rest = params.n.saturating_sub(given.iter().sum());
    let cand = ConstraintSet::second_kind(m as usize - given.len(), rest);
    ClosedFormCheck::compare(t.meta.law.clone(), &t, &cand, |x| conditional_closed_form2(params, given, x), &params.alg, params.bound())
}

fn grouped_exponents2(k: i64, n: i64, scheme: &GroupingScheme, y: &[u32], from: usize, to: usize) -> (i64, i64) {
    let z = prefix_sums(&y[..to]);
    let (mut a, mut b) = (0i64, 0i64);
    for j in from..=to {
        let (mj, sj, yj) = (i64::from(scheme.m(j)), i64::from(scheme.s(j)), i64::from(y[j - 1]));
        a += (n - z[j] - sj) * (mj - 1);
        b += (k - sj + 1) * yj;
    }
    (a, b)
}

fn multiset<N: Field>(alg: &AlgebraSpec<N>, m: u32, y: u32) -> N {
    alg.binomial_or_zero(i64::from(m) + i64::from(y) - 1, y.into())
}

/// Closed form of `P(Y_1..Y_ν = y)` for `ν = y.len() <= r`.
pub fn grouped_closed_form2<N: Field>(params: &SecondKindParams<N>, scheme: &GroupingScheme, y: &[u32]) -> N {
    let (k, n, alg) = (i64::from(params.k), i64::from(params.n), &params.alg);
    let nu = y.len();
    let (a, b) = grouped_exponents2(k, n, scheme, y, 1, nu);
    let z: i64 = y.iter().map(|&v| i64::from(v)).sum();
    let coef = (1..=nu).fold(N::one(), |acc, j| acc * multiset(alg, scheme.m(j), y[j - 1]));
    let sn = i64::from(scheme.s(nu));
    alg.monomial(a, b) * coef * alg.binomial_or_zero(k - sn + n - z, n - z) / alg.binomial_or_zero(k + n, n)
}

/// Closed form of `P(Y_{ν+1}..Y_{ν'} = ext | Y_1..Y_ν = given)`.
pub fn grouped_conditional_closed_form2<N: Field>(
    params: &SecondKindParams<N>,
    scheme: &GroupingScheme,
    given: &[u32],
    ext: &[u32],
) -> N {
    let (k, n, alg) = (i64::from(params.k), i64::from(params.n), &params.alg);
    let nu = given.len();
    let nu2 = nu + ext.len();
    let y: Vec<u32> = given.iter().chain(ext).copied().collect();
    let (a, b) = grouped_exponents2(k, n, scheme, &y, nu + 1, nu2);
    let z = prefix_sums(&y);
    let coef = (nu + 1..=nu2).fold(N::one(), |acc, j| acc * multiset(alg, scheme.m(j), y[j - 1]));
    let (s1, s2) = (i64::from(scheme.s(nu)), i64::from(scheme.s(nu2)));
    alg.monomial(a, b) * coef * alg.binomial_or_zero(k - s2 + n - z[nu2], n - z[nu2])
        / alg.binomial_or_zero(k - s1 + n - z[nu], n - z[nu])
}

fn grouped_oracle<N: Field>(params: &SecondKindParams<N>, scheme: &GroupingScheme) -> Result<PmfTable<N>> {
    check_scheme_k(params.k, scheme)?;
    let r = scheme.len() as u32;
    Ok(joint_pmf2(params)?.pushforward(format!("grouped {}", scheme.label()), labels("y", 1, r), |x| scheme.apply(x)))
}

/// Law of the group totals `(Y_1..Y_r)`.
pub fn grouped_pmf2<N: Field>(params: &SecondKindParams<N>, scheme: &GroupingScheme) -> Result<PmfTable<N>> {
    Ok(grouped_oracle(params, scheme)?.with_closed_form(|y| grouped_closed_form2(params, scheme, y)))
}

pub fn check_grouped2<N: Field>(params: &SecondKindParams<N>, scheme: &GroupingScheme) -> Result<ClosedFormCheck<N>> {
    let t = grouped_pmf2(params, scheme)?;
    let cand = ConstraintSet::second_kind(scheme.len(), params.n);
    ClosedFormCheck::compare(t.meta.law.clone(), &t, &cand, |y| grouped_closed_form2(params, scheme, y), &params.alg, params.bound())
}

/// Law of `(Y_1..Y_ν)`, `1 <= ν < r`.
pub fn grouped_marginal_pmf2<N: Field>(params: &SecondKindParams<N>, scheme: &GroupingScheme, nu: u32) -> Result<PmfTable<N>> {
    if nu < 1 || nu as usize >= scheme.len() {
        return Err(Error::invalid("r", format!("grouped marginal requires 1 <= nu < {}", scheme.len())));
    }
    let law = format!("grouped {} marginal nu={nu}", scheme.label());
    let t = grouped_oracle(params, scheme)?.marginal_prefix(nu as usize, law);
    Ok(t.with_closed_form(|y| grouped_closed_form2(params, scheme, y)))
}

pub fn check_grouped_marginal2<N: Field>(params: &SecondKindParams<N>, scheme: &GroupingScheme, nu: u32) -> Result<ClosedFormCheck<N>> {
    let t = grouped_marginal_pmf2(params, scheme, nu)?;
    let cand = ConstraintSet::second_kind(nu as usize, params.n);
    ClosedFormCheck::compare(t.meta.law.clone(), &t, &cand, |y| grouped_closed_form2(params, scheme, y), &params.alg, params.bound())
}

/// Law of `(Y_{ν+1}..Y_{upto})` given `(Y_1..Y_ν) = given`.
pub fn grouped_conditional_pmf2<N: Field>(
    params: &SecondKindParams<N>,
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
    Ok(t.with_closed_form(|y| grouped_conditional_closed_form2(params, scheme, given, y)))
}

pub fn check_grouped_conditional2<N: Field>(
    params: &SecondKindParams<N>,
    scheme: &GroupingScheme,
    given: &[u32],
    upto: u32,
) -> Result<ClosedFormCheck<N>> {
    let t = grouped_conditional_pmf2(params, scheme, given, upto)?;
    let rest = params.n.saturating_sub(given.iter().sum());
    let cand = ConstraintSet::second_kind(upto as usize - given.len(), rest);
    ClosedFormCheck::compare(
        t.meta.law.clone(),
        &t,
        &cand,
        |y| grouped_conditional_closed_form2(params, scheme, given, y),
        &params.alg,
        params.bound(),
    )
}

/// `E([X_1]_i)` against
/// `τ₁^{2kn+C(k+1,2)} τ₂^{ki} [n]_i [i]! / (τ₁^{ki} [k+i]_i)`. Any `k >= 1`.
pub fn factorial_moment_report<N: Field>(params: &SecondKindParams<N>, i: u32) -> Result<MomentReport<N>> {
    let joint = joint_pmf2(params)?;
    Ok(factorial_moment(params, &joint, i))
}

fn factorial_moment<N: Field>(params: &SecondKindParams<N>, joint: &PmfTable<N>, i: u32) -> MomentReport<N> {
    let (k, n, alg) = (params.k, params.n, &params.alg);
    let ki = i64::from(k) * i64::from(i);
    let oracle = joint.expectation(|x| alg.falling_factorial(x[0], i));
    let closed = alg.monomial(params.tau1_offset() - ki, ki) * alg.falling_factorial(n, i) * alg.factorial(i)
        / alg.falling_factorial(k + i, i);
    MomentReport::new("E([X1]_i)", Some(i), Some(closed), oracle, alg, params.bound())
}

/// Factorial moments of orders `i1` and `i2`, variance and covariance of
/// `(X_1, X_2)`, `k >= 2`. Orders above `n` give zero moments.
pub fn bivariate_moments2<N: Field>(params: &SecondKindParams<N>, i1: u32, i2: u32) -> Result<Vec<MomentReport<N>>> {
    if params.k < 2 {
        return Err(Error::invalid("k", "bivariate moments require k >= 2"));
    }
    let (k, n, alg) = (params.k, params.n, &params.alg);
    let (ki, ni) = (i64::from(k), i64::from(n));
    let joint = joint_pmf2(params)?;
    let bound = params.bound();
    let c = params.tau1_offset() - 2 * ki * ni;
    let num = |m: u32| alg.number(m);
    let shift = |x: &[u32], i: i64| alg.monomial(-i * i64::from(x[0]), i * i64::from(x[0]));
    let mut out = vec![factorial_moment(params, &joint, i1)];

    // E(τ₁^{-iX₁} τ₂^{iX₁} [X₂]_i)
    let i = i64::from(i2);
    let oracle = joint.expectation(|x| shift(x, i) * alg.falling_factorial(x[1], i2));
    let closed = alg.monomial((1 - ki) * i + params.tau1_offset(), (ki - 1) * i) * alg.factorial(i2)
        * alg.falling_factorial(n, i2)
        / alg.falling_factorial(k + i2, i2);
    out.push(MomentReport::new("E(tau1^-iX1 tau2^iX1 [X2]_i)", Some(i2), Some(closed), oracle, alg, bound));

    let e1 = joint.expectation(|x| num(x[0]));
    let var = joint.expectation(|x| num(x[0]) * num(x[0])) - e1.clone() * e1.clone();
    let var_closed = alg.tau1.is_one().then(|| {
        let k1 = num(k + 1);
        alg.tau2.powi(2 * ki + 1) * alg.falling_factorial(n, 2) * alg.factorial(2) / alg.falling_factorial(k + 2, 2)
            + alg.tau2.powi(ki) * num(n) / k1.clone()
            - alg.tau2.powi(2 * ki) * num(n) * num(n) / (k1.clone() * k1)
    });
    let mut rep = MomentReport::new("V([X1])", None, var_closed, var, alg, bound);
    if rep.closed_form.is_none() {
        rep = rep.with_note("closed form contains tau1^(1-x1) with x1 unbound; evaluable only when tau1 = 1");
    }
    out.push(rep);

    // Cov([X₁], τ₁^{-X₁}τ₂^{X₁}[X₂]) = τ₂^{2k-1}[n]∇ / (τ₁^{2k(1-n)-C(k+1,2)} [k+1]² [k+2]),
    // ∇ = τ₂[n-1][k+1] - τ₁[n][k+2].
    let e2 = joint.expectation(|x| shift(x, 1) * num(x[1]));
    let e12 = joint.expectation(|x| num(x[0]) * shift(x, 1) * num(x[1]));
    let cov = e12 - e1 * e2;
    let cov_closed = if n == 0 {
        N::zero()
    } else {
        let nabla = alg.tau2.clone() * num(n - 1) * num(k + 1) - alg.tau1.clone() * num(n) * num(k + 2);
        let k1 = num(k + 1);
        alg.monomial(-(2 * ki * (1 - ni) - c), 2 * ki - 1) * num(n) * nabla / (k1.clone() * k1 * num(k + 2))
    };
    out.push(MomentReport::new("Cov([X1], tau1^-X1 tau2^X1 [X2])", None, Some(cov_closed), cov, alg, bound));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SupportPoint;
    use crate::scalar::Exact;

    fn r(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    fn params(k: u32, n: u32) -> SecondKindParams<Exact> {
        SecondKindParams::new(AlgebraSpec::q_deformation(r(1, 2)).unwrap(), k, n).unwrap()
    }

    #[test]
    fn joint_examples() {
        assert_eq!(joint_pmf2(&params(1, 1)).unwrap().probabilities, vec![r(2, 3), r(1, 3)]);
        let t = joint_pmf2(&params(1, 2)).unwrap();
        assert_eq!(t.probabilities, vec![r(4, 7), r(2, 7), r(1, 7)]);
        assert_eq!(t.z_closed_form, Some(r(7, 4)));
    }

    #[test]
    fn geometric_examples() {
        let a = AlgebraSpec::q_deformation(r(1, 2)).unwrap();
        let rep = geometric_construction_check(&a, 1, 1, &r(1, 4)).unwrap();
        assert!(rep.exact);
        let other = geometric_construction_check(&a, 1, 1, &r(2, 3)).unwrap();
        assert!(rep.same_law(&other));
        let zero = geometric_construction_check(&a, 2, 0, &r(1, 3)).unwrap();
        assert_eq!(zero.conditional.support, vec![SupportPoint(vec![0, 0])]);
        let quesne = AlgebraSpec::preset(crate::algebra::Preset::Quesne, r(1, 1), r(1, 2)).unwrap();
        assert!(matches!(
            geometric_construction_check(&quesne, 2, 1, &r(1, 3)),
            Err(Error::InvalidParameter { field: "theta", .. })
        ));
    }

    #[test]
    fn marginal_example() {
        let p = params(2, 1);
        let m = marginal_pmf2(&p, 1).unwrap();
        let q = r(1, 2);
        let z = r(7, 4);
        assert_eq!(m.probabilities, vec![(r(1, 1) + q.clone()) / z.clone(), q.powi(2) / z]);
        assert!(check_marginal2(&p, 1).unwrap().all_exact());
        let c = conditional_pmf2(&params(2, 2), &[2], 2).unwrap();
        assert_eq!(c.probability(&[0]), r(1, 1));
    }

    #[test]
    fn grouped_examples() {
        let p = params(2, 1);
        let g = GroupingScheme::new(vec![2], 2).unwrap();
        let t = grouped_pmf2(&p, &g).unwrap();
        assert_eq!(t.probabilities, vec![r(4, 7), r(3, 7)]);
        assert!(check_grouped2(&p, &g).unwrap().all_exact());
        let singles = grouped_pmf2(&p, &GroupingScheme::singletons(2)).unwrap();
        assert_eq!(singles.probabilities, joint_pmf2(&p).unwrap().probabilities);
    }

    #[test]
    fn moments() {
        let rep = factorial_moment_report(&params(1, 1), 1).unwrap();
        assert_eq!(rep.oracle, r(1, 3));
        assert!(rep.matched);
        let rep = factorial_moment_report(&params(2, 1), 2).unwrap();
        assert_eq!(rep.oracle, r(0, 1));
        assert!(rep.matched);
        let reps = bivariate_moments2(&params(3, 3), 2, 2).unwrap();
        assert!(reps.iter().all(|r| r.matched), "{reps:#?}");
    }
}
