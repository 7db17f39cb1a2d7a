//! Deformation algebras and their numbers, factorials and binomials.
//!
//! A τ-structured algebra has numbers
//!
//! ```text
//! [n] = (τ₁ⁿ - τ₂ⁿ) / (τ₁ - τ₂) = Σ_{i<n} τ₁^{n-1-i} τ₂^i
//! ```
//!
//! The sum form is used for evaluation. It is exact, division free, and gives
//! `n·τ^{n-1}` when τ₁ = τ₂.

use std::fmt;
use std::str::FromStr;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Approx, Exact, Field, Mode};

/// Named deformations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    JagannathanSrinivasa,
    QDeformation,
    Quesne,
    ChakrabartyJagannathan,
    ArikCoon,
}

impl Preset {
    pub const TAU_STRUCTURED: [Preset; 4] = [
        Preset::JagannathanSrinivasa,
        Preset::QDeformation,
        Preset::Quesne,
        Preset::ChakrabartyJagannathan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::JagannathanSrinivasa => "jagannathan-srinivasa",
            Preset::QDeformation => "q-deformation",
            Preset::Quesne => "quesne",
            Preset::ChakrabartyJagannathan => "chakrabarty-jagannathan",
            Preset::ArikCoon => "arik-coon",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "jagannathan-srinivasa" | "js" => Preset::JagannathanSrinivasa,
            "q-deformation" | "q" => Preset::QDeformation,
            "quesne" => Preset::Quesne,
            "chakrabarty-jagannathan" | "cj" => Preset::ChakrabartyJagannathan,
            "arik-coon" | "ac" => Preset::ArikCoon,
            _ => {
                return Err(Error::invalid(
                    "preset",
                    format!(
                        "unknown preset {s:?} (expected jagannathan-srinivasa, q-deformation, \
                         quesne, chakrabarty-jagannathan or arik-coon)"
                    ),
                ))
            }
        })
    }
}

type DeformationFn<N> = Arc<dyn Fn(&N, &N, u32) -> N + Send + Sync>;
type SequenceFn<N> = Arc<dyn Fn(u32) -> N + Send + Sync>;

/// How `[n]` is produced.
#[derive(Clone)]
pub enum NumberRule<N> {
    /// `(τ₁ⁿ - τ₂ⁿ)/(τ₁ - τ₂)`.
    TauStructured,
    /// `[n] = f(p, q, n)`. The inverse algebra evaluates the same rule at
    /// `(1/p, 1/q)`.
    Deformation(DeformationFn<N>),
    /// An arbitrary positive sequence. Has no inverse-parameter form.
    Sequence(SequenceFn<N>),
}

impl<N> NumberRule<N> {
    fn same(&self, other: &Self) -> bool {
        match (self, other) {
            (NumberRule::TauStructured, NumberRule::TauStructured) => true,
            (NumberRule::Deformation(a), NumberRule::Deformation(b)) => Arc::ptr_eq(a, b),
            (NumberRule::Sequence(a), NumberRule::Sequence(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            NumberRule::TauStructured => "tau-structured",
            NumberRule::Deformation(_) => "deformation",
            NumberRule::Sequence(_) => "sequence",
        }
    }
}

impl<N> fmt::Debug for NumberRule<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind())
    }
}

/// Deformed numbers and binomials already computed for one algebra.
struct Memo<N> {
    numbers: Vec<N>,
    binomials: HashMap<(u32, u32), N>,
}

#[derive(Clone)]
struct NumberMemo<N>(Arc<Mutex<Memo<N>>>);

impl<N> Default for NumberMemo<N> {
    fn default() -> Self {
        NumberMemo(Arc::new(Mutex::new(Memo {
            numbers: Vec::new(),
            binomials: HashMap::new(),
        })))
    }
}

impl<N> fmt::Debug for NumberMemo<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("NumberMemo")
    }
}

/// A deformation: base parameters, structure constants and a number rule.
#[derive(Clone, Debug)]
pub struct AlgebraSpec<N> {
    pub name: String,
    pub p: N,
    pub q: N,
    pub tau1: N,
    pub tau2: N,
    pub rule: NumberRule<N>,
    memo: NumberMemo<N>,
}

impl<N: Field> PartialEq for AlgebraSpec<N> {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.p == other.p
            && self.q == other.q
            && self.tau1 == other.tau1
            && self.tau2 == other.tau2
            && self.rule.same(&other.rule)
    }
}

fn require_positive<N: Field>(field: &'static str, v: &N) -> Result<()> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive, got {v}")))
    }
}

impl<N: Field> AlgebraSpec<N> {
    /// Build a preset. Requires `0 < q < p <= 1`.
    pub fn preset(preset: Preset, p: N, q: N) -> Result<Self> {
        require_positive("q", &q)?;
        if q >= p {
            return Err(Error::invalid("q", format!("presets require q < p (q={q}, p={p})")));
        }
        if p > N::one() {
            return Err(Error::invalid("p", format!("presets require p <= 1, got {p}")));
        }
        let (tau1, tau2, rule) = match preset {
            Preset::JagannathanSrinivasa => (p.clone(), q.clone(), NumberRule::TauStructured),
            Preset::QDeformation => {
                if !p.is_one() {
                    return Err(Error::invalid("p", "q-deformation requires p = 1"));
                }
                (N::one(), q.clone(), NumberRule::TauStructured)
            }
            Preset::Quesne => (p.clone(), q.recip(), NumberRule::TauStructured),
            Preset::ChakrabartyJagannathan => (p.recip(), q.clone(), NumberRule::TauStructured),
            Preset::ArikCoon => {
                let rule: DeformationFn<N> = Arc::new(|_p: &N, q: &N, n: u32| {
                    let n = i64::from(n);
                    (q.powi(n) - q.powi(-n)) / (q.clone() - q.recip())
                });
                (q.recip(), q.clone(), NumberRule::Deformation(rule))
            }
        };
        Ok(AlgebraSpec {
            name: preset.name().to_string(),
            p,
            q,
            tau1,
            tau2,
            rule,
            memo: NumberMemo::default(),
        })
    }

    pub fn q_deformation(q: N) -> Result<Self> {
        Self::preset(Preset::QDeformation, N::one(), q)
    }

    pub fn jagannathan_srinivasa(p: N, q: N) -> Result<Self> {
        Self::preset(Preset::JagannathanSrinivasa, p, q)
    }

    /// A τ-structured algebra with arbitrary positive structure constants.
    pub fn tau_structured(name: &str, p: N, q: N, tau1: N, tau2: N) -> Result<Self> {
        for (f, v) in [("p", &p), ("q", &q), ("tau1", &tau1), ("tau2", &tau2)] {
            require_positive(f, v)?;
        }
        Ok(AlgebraSpec {
            name: name.to_string(),
            p,
            q,
            tau1,
            tau2,
            rule: NumberRule::TauStructured,
            memo: NumberMemo::default(),
        })
    }

    /// A custom algebra whose numbers are an arbitrary sequence. The
    /// structure constants still drive the distribution weights.
    pub fn custom_sequence(
        name: &str,
        tau1: N,
        tau2: N,
        seq: impl Fn(u32) -> N + Send + Sync + 'static,
    ) -> Result<Self> {
        require_positive("tau1", &tau1)?;
        require_positive("tau2", &tau2)?;
        Ok(AlgebraSpec {
            name: name.to_string(),
            p: tau1.clone(),
            q: tau2.clone(),
            tau1,
            tau2,
            rule: NumberRule::Sequence(Arc::new(seq)),
            memo: NumberMemo::default(),
        })
    }

    pub fn is_tau_structured(&self) -> bool {
        matches!(self.rule, NumberRule::TauStructured)
    }

    /// τ-structured with τ₁ = 1: the regime where the closed forms are exact.
    pub fn tau1_is_one(&self) -> bool {
        self.is_tau_structured() && self.tau1.is_one()
    }

    /// `τ₂/τ₁`.
    pub fn ratio(&self) -> N {
        self.tau2.clone() / self.tau1.clone()
    }

    /// `τ₁^a τ₂^b`.
    pub fn monomial(&self, a: i64, b: i64) -> N {
        self.tau1.powi(a) * self.tau2.powi(b)
    }

    pub fn number(&self, n: u32) -> N {
        let mut memo = self.memo.0.lock().expect("memo lock");
        while memo.numbers.len() <= n as usize {
            let next = self.compute_number(memo.numbers.len() as u32);
            memo.numbers.push(next);
        }
        memo.numbers[n as usize].clone()
    }

    fn compute_number(&self, n: u32) -> N {
        match &self.rule {
            NumberRule::TauStructured => {
                let mut acc = N::zero();
                let mut t2 = N::one();
                for i in 0..n {
                    acc = acc + self.tau1.powi(i64::from(n - 1 - i)) * t2.clone();
                    t2 = t2 * self.tau2.clone();
                }
                acc
            }
            NumberRule::Deformation(f) => f(&self.p, &self.q, n),
            NumberRule::Sequence(f) => f(n),
        }
    }

    pub fn factorial(&self, n: u32) -> N {
        (1..=n).fold(N::one(), |acc, i| acc * self.number(i))
    }

    /// `[n][n-1]⋯[n-i+1]`; zero when `i > n`.
    pub fn falling_factorial(&self, n: u32, i: u32) -> N {
        if i > n {
            return N::zero();
        }
        (0..i).fold(N::one(), |acc, j| acc * self.number(n - j))
    }

    pub fn binomial(&self, m: u32, n: u32) -> Result<N> {
        if n > m {
            return Err(Error::invalid("n", format!("binomial requires n <= m (m={m}, n={n})")));
        }
        Ok(self.binomial_or_zero(i64::from(m), i64::from(n)))
    }

    /// Binomial extended to any integer arguments: 1 when `n = 0`, 0 when
    /// `n < 0` or `n > m`. Covers the `[-1 choose 0] = 1` boundary term.
    pub fn binomial_or_zero(&self, m: i64, n: i64) -> N {
        if n == 0 {
            return N::one();
        }
        if n < 0 || n > m {
            return N::zero();
        }
        let (m, n) = (m as u32, n as u32);
        let n = n.min(m - n);
        if let Some(b) = self.memo.0.lock().expect("memo lock").binomials.get(&(m, n)) {
            return b.clone();
        }
        let mut num = N::one();
        let mut den = N::one();
        for j in 0..n {
            num = num * self.number(m - j);
            den = den * self.number(j + 1);
        }
        let b = num / den;
        self.memo.0.lock().expect("memo lock").binomials.insert((m, n), b.clone());
        b
    }

    /// The algebra with every parameter replaced by its reciprocal.
    pub fn inverse(&self) -> Result<Self> {
        for (f, v) in [("p", &self.p), ("q", &self.q), ("tau1", &self.tau1), ("tau2", &self.tau2)] {
            if v.is_zero() {
                return Err(Error::ZeroStructureConstant(f));
            }
        }
        if let NumberRule::Sequence(_) = self.rule {
            return Err(Error::UnsupportedInverse(self.name.clone()));
        }
        let name = match self.name.strip_suffix("^-1") {
            Some(base) => base.to_string(),
            None => format!("{}^-1", self.name),
        };
        Ok(AlgebraSpec {
            name,
            p: self.p.recip(),
            q: self.q.recip(),
            tau1: self.tau1.recip(),
            tau2: self.tau2.recip(),
            rule: self.rule.clone(),
            memo: NumberMemo::default(),
        })
    }

    pub fn summary(&self) -> AlgebraSummary {
        AlgebraSummary {
            name: self.name.clone(),
            p: self.p.to_string(),
            q: self.q.to_string(),
            tau1: self.tau1.to_string(),
            tau2: self.tau2.to_string(),
            rule: self.rule.kind().to_string(),
        }
    }
}

/// Printable description of an algebra, used in reports and output headers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraSummary {
    pub name: String,
    pub p: String,
    pub q: String,
    pub tau1: String,
    pub tau2: String,
    pub rule: String,
}

pub fn deformed_number<N: Field>(alg: &AlgebraSpec<N>, n: u32) -> N {
    alg.number(n)
}

pub fn deformed_factorial<N: Field>(alg: &AlgebraSpec<N>, n: u32) -> N {
    alg.factorial(n)
}

pub fn deformed_binomial<N: Field>(alg: &AlgebraSpec<N>, m: u32, n: u32) -> Result<N> {
    alg.binomial(m, n)
}

pub fn deformed_falling_factorial<N: Field>(alg: &AlgebraSpec<N>, n: u32, i: u32) -> N {
    alg.falling_factorial(n, i)
}

pub fn inverse_algebra<N: Field>(alg: &AlgebraSpec<N>) -> Result<AlgebraSpec<N>> {
    alg.inverse()
}

/// One candidate form of the triangular recurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecurrenceVariant {
    /// `"tau1^n, tau2^(m-n)"` or the mirror `"tau2^n, tau1^(m-n)"`.
    pub form: &'static str,
    pub holds: bool,
    /// `(m, n)` pairs where the recurrence fails.
    pub failures: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecurrenceReport {
    pub algebra: String,
    pub mmax: u32,
    pub entries: usize,
    pub variants: Vec<RecurrenceVariant>,
}

impl RecurrenceReport {
    pub fn holding_variants(&self) -> Vec<&'static str> {
        self.variants.iter().filter(|v| v.holds).map(|v| v.form).collect()
    }
}

/// Test `[m,n] = τ₁ⁿ[m-1,n] + τ₂^{m-n}[m-1,n-1]` and its mirror for
/// `1 <= n <= m <= mmax`.
pub fn check_triangular_recurrence<N: Field>(alg: &AlgebraSpec<N>, mmax: u32) -> Result<RecurrenceReport> {
    if mmax < 1 {
        return Err(Error::invalid("mmax", "must be at least 1"));
    }
    let forms: [(&'static str, bool); 2] = [("tau1^n, tau2^(m-n)", false), ("tau2^n, tau1^(m-n)", true)];
    let mut variants = Vec::new();
    let mut entries = 0;
    for (form, mirrored) in forms {
        let (a, b) = if mirrored {
            (&alg.tau2, &alg.tau1)
        } else {
            (&alg.tau1, &alg.tau2)
        };
        let mut failures = Vec::new();
        entries = 0;
        for m in 1..=mmax {
            for n in 1..=m {
                entries += 1;
                let (mi, ni) = (i64::from(m), i64::from(n));
                let lhs = alg.binomial_or_zero(mi, ni);
                let rhs = a.powi(ni) * alg.binomial_or_zero(mi - 1, ni)
                    + b.powi(mi - ni) * alg.binomial_or_zero(mi - 1, ni - 1);
                if !lhs.close_to(&rhs, crate::scalar::DEFAULT_TOL) {
                    failures.push((m, n));
                }
            }
        }
        variants.push(RecurrenceVariant {
            form,
            holds: failures.is_empty(),
            failures,
        });
    }
    Ok(RecurrenceReport {
        algebra: alg.name.clone(),
        mmax,
        entries,
        variants,
    })
}

/// Text configuration record for an algebra:
///
/// ```toml
/// name = "jagannathan-srinivasa"
/// p = "9/10"
/// q = "1/2"
/// mode = "exact"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraConfig {
    pub name: String,
    #[serde(default = "one_string")]
    pub p: String,
    pub q: String,
    #[serde(default = "exact_mode")]
    pub mode: Mode,
}

fn one_string() -> String {
    "1".to_string()
}

fn exact_mode() -> Mode {
    Mode::Exact
}

impl AlgebraConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            field: "algebra-config",
            input: text.to_string(),
            reason: e.message().to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn preset(&self) -> Result<Preset> {
        self.name.parse()
    }

    pub fn build<N: Field>(&self) -> Result<AlgebraSpec<N>> {
        if N::MODE != self.mode {
            return Err(Error::ModeMix);
        }
        let p = N::parse_literal("p", &self.p)?;
        let q = N::parse_literal("q", &self.q)?;
        AlgebraSpec::preset(self.preset()?, p, q)
    }

    pub fn build_exact(&self) -> Result<AlgebraSpec<Exact>> {
        self.build()
    }

    pub fn build_approx(&self) -> Result<AlgebraSpec<Approx>> {
        self.build()
    }
}
