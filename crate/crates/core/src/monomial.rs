//! Fitting a discrepancy monomial `τ₁^a τ₂^b` between two values.

use serde::{Deserialize, Serialize};

use crate::scalar::{Field, DEFAULT_TOL};

/// Exponents `(a, b)` such that `lhs · τ₁^a · τ₂^b = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct Monomial {
    pub tau1: i64,
    pub tau2: i64,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { tau1: 0, tau2: 0 };

    pub fn is_one(&self) -> bool {
        *self == Monomial::ONE
    }
}

impl std::fmt::Display for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "tau1^{} tau2^{}", self.tau1, self.tau2)
    }
}

/// Search `|a|, |b| <= bound` for a monomial relating `lhs` to `rhs`,
/// preferring the smallest `|a| + |b|`. Candidates are proposed in log space
/// and confirmed with [`Field::close_to`], so exact mode only ever returns
/// exact relations.
pub fn fit_monomial<N: Field>(lhs: &N, rhs: &N, tau1: &N, tau2: &N, bound: i64) -> Option<Monomial> {
    if lhs.is_zero() || rhs.is_zero() {
        return (lhs.is_zero() && rhs.is_zero()).then_some(Monomial::ONE);
    }
    if (lhs.is_positive()) != (rhs.is_positive()) {
        return None;
    }
    let target = rhs.ln_abs() - lhs.ln_abs();
    let (l1, l2) = (tau1.ln_abs(), tau2.ln_abs());
    let holds = |a: i64, b: i64| (lhs.clone() * tau1.powi(a) * tau2.powi(b)).close_to(rhs, DEFAULT_TOL);

    let mut best: Option<Monomial> = None;
    // Scan a = 0, 1, -1, 2, -2, ... and stop once |a| alone cannot beat the best fit.
    for step in 0..=2 * bound {
        let a = if step % 2 == 0 { -(step / 2) } else { step / 2 + 1 };
        if best.is_some_and(|m| a.abs() >= m.tau1.abs() + m.tau2.abs()) {
            break;
        }
        let residual = target - a as f64 * l1;
        let b = if l2 == 0.0 {
            0
        } else {
            let b = (residual / l2).round();
            if !b.is_finite() || b.abs() > bound as f64 {
                continue;
            }
            b as i64
        };
        if (residual - b as f64 * l2).abs() > 1e-6 * (1.0 + target.abs()) {
            continue;
        }
        let better = best.is_none_or(|m| a.abs() + b.abs() < m.tau1.abs() + m.tau2.abs());
        if better && holds(a, b) {
            best = Some(Monomial { tau1: a, tau2: b });
        }
    }
    best
}
