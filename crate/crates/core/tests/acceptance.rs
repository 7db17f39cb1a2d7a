//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::Command;
use std::time::{Duration, Instant};

use rpq_urn::algebra::{AlgebraSpec, Preset};
use rpq_urn::bose_einstein as be;
use rpq_urn::fermi_dirac as fd;
use rpq_urn::grouping::compositions;
use rpq_urn::identities::{check_identity, IdentityId};
use rpq_urn::io::{sample_csv, RunInfo};
use rpq_urn::monomial::Monomial;
use rpq_urn::pmf::PmfTable;
use rpq_urn::sampler::sample;
use rpq_urn::scalar::{Approx, Exact, Field, Mode};

fn r(n: i64, d: i64) -> Exact {
    Exact::from_ratio(n, d)
}

fn alg(preset: Preset, p: Exact, q: Exact) -> AlgebraSpec<Exact> {
    AlgebraSpec::preset(preset, p, q).expect("valid preset parameters")
}

/// The four presets with `p = 1`, where `τ₁ = 1`.
fn unit_tau1() -> Vec<AlgebraSpec<Exact>> {
    Preset::TAU_STRUCTURED.iter().map(|&p| alg(p, r(1, 1), r(1, 2))).collect()
}

/// The four presets at p = 9/10, q = 1/2 (p = 1 for the q-deformation).
fn all_presets() -> Vec<AlgebraSpec<Exact>> {
    Preset::TAU_STRUCTURED
        .iter()
        .map(|&p| {
            let pp = if p == Preset::QDeformation { r(1, 1) } else { r(9, 10) };
            alg(p, pp, r(1, 2))
        })
        .collect()
}

/// Failures collected by one criterion, plus the number of checks run.
#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn chain_rule(joint: &PmfTable<Exact>, t: &mut Tally, label: &str) {
    let k = joint.dim();
    for r in 1..k {
        let marginal = joint.marginal_prefix(r, "marginal");
        for given in &marginal.support {
            let cond = joint.conditional_on_prefix(&given.0, k, "conditional").unwrap();
            for x in joint.support.iter().filter(|x| x.0[..r] == given.0[..]) {
                let lhs = joint.probability(&x.0);
                let rhs = marginal.probability(&given.0) * cond.probability(&x.0[r..]);
                t.check(lhs == rhs, || format!("{label} chain rule r={r} at {x}"));
            }
        }
    }
}

fn criterion_1(t: &mut Tally) {
    for q in [r(1, 2), r(3, 4)] {
        let a = AlgebraSpec::q_deformation(q.clone()).unwrap();
        for k in 1..=8u32 {
            for n in 0..=(k + 1).min(8) {
                if n >= 1 {
                    let rep = check_identity(IdentityId::Hs1, &a, k, n, None, None).unwrap();
                    t.check(rep.exact_match, || format!("hs1 q={q} k={k} n={n}"));
                }
                let rep = check_identity(IdentityId::Hs2, &a, k, n, None, None).unwrap();
                t.check(rep.exact_match, || format!("hs2 q={q} k={k} n={n}"));
            }
        }
        for k in 1..=6u32 {
            for n in 0..=6 {
                for m in 0..=k {
                    let rep = check_identity(IdentityId::Cauchy, &a, k, n, None, Some(m)).unwrap();
                    t.check(rep.exact_match, || format!("cauchy q={q} k={k} n={n} m={m}"));
                }
            }
        }
    }
}

fn criterion_2(t: &mut Tally) {
    let a = AlgebraSpec::jagannathan_srinivasa(r(9, 10), r(1, 2)).unwrap();
    for k in 1..=6u32 {
        for n in 0..=6u32 {
            let (ki, ni) = (i64::from(k), i64::from(n));
            if (1..=k + 1).contains(&n) {
                let rep = check_identity(IdentityId::Hs1, &a, k, n, None, None).unwrap();
                let want = Monomial { tau1: ni * (ki + 1 - ni), tau2: 0 };
                t.check(rep.discrepancy == Some(want), || {
                    format!("hs1 k={k} n={n}: fitted {:?}, expected {want}", rep.discrepancy)
                });
            }
            let rep = check_identity(IdentityId::Hs2, &a, k, n, None, None).unwrap();
            let want = Monomial { tau1: ni * ki, tau2: 0 };
            t.check(rep.discrepancy == Some(want), || {
                format!("hs2 k={k} n={n}: fitted {:?}, expected {want}", rep.discrepancy)
            });
        }
    }
}

fn criterion_3(t: &mut Tally) {
    for a in all_presets() {
        for k in 1..=6u32 {
            for n in 0..=k + 1 {
                let tab = fd::joint_pmf(&fd::FirstKindParams::new(a.clone(), k, n).unwrap()).unwrap();
                t.check(tab.total() == Exact::one(), || format!("first {} k={k} n={n}", a.name));
            }
        }
        for k in 1..=5u32 {
            for n in 0..=5u32 {
                let tab = be::joint_pmf2(&be::SecondKindParams::new(a.clone(), k, n).unwrap()).unwrap();
                t.check(tab.total() == Exact::one(), || format!("second {} k={k} n={n}", a.name));
            }
        }
    }
}

fn criterion_4(t: &mut Tally) {
    for a in unit_tau1() {
        for k in 1..=6u32 {
            for n in 0..=k + 1 {
                let tab = fd::joint_pmf(&fd::FirstKindParams::new(a.clone(), k, n).unwrap()).unwrap();
                let z = a.binomial(k + 1, n).unwrap();
                t.check(tab.z_enumerated == z, || format!("first {} k={k} n={n}", a.name));
            }
        }
        for k in 1..=5u32 {
            for n in 0..=5u32 {
                let tab = be::joint_pmf2(&be::SecondKindParams::new(a.clone(), k, n).unwrap()).unwrap();
                let z = a.binomial(k + n, n).unwrap();
                t.check(tab.z_enumerated == z, || format!("second {} k={k} n={n}", a.name));
            }
        }
    }
}

fn criterion_5(t: &mut Tally) {
    for a in unit_tau1() {
        for k in 1..=5u32 {
            for n in 0..=k + 1 {
                let p = fd::FirstKindParams::new(a.clone(), k, n).unwrap();
                let label = format!("first {} k={k} n={n}", a.name);
                chain_rule(&fd::joint_pmf(&p).unwrap(), t, &label);
                for g in compositions(k) {
                    let c = fd::check_grouped(&p, &g).unwrap();
                    t.check(c.all_exact(), || format!("{label} grouped {}", g.label()));
                    for nu in 1..g.len() as u32 {
                        let c = fd::check_grouped_marginal(&p, &g, nu).unwrap();
                        t.check(c.all_exact(), || format!("{label} grouped {} nu={nu}", g.label()));
                        let prefix = fd::grouped_marginal_pmf(&p, &g, nu).unwrap();
                        for given in &prefix.support {
                            let c = fd::check_grouped_conditional(&p, &g, &given.0, g.len() as u32).unwrap();
                            t.check(c.all_exact(), || format!("{label} grouped {} given {given}", g.label()));
                        }
                    }
                }
            }
            for n in 0..=5u32 {
                let p = be::SecondKindParams::new(a.clone(), k, n).unwrap();
                let label = format!("second {} k={k} n={n}", a.name);
                chain_rule(&be::joint_pmf2(&p).unwrap(), t, &label);
                for g in compositions(k) {
                    let c = be::check_grouped2(&p, &g).unwrap();
                    t.check(c.all_exact(), || format!("{label} grouped {}", g.label()));
                    for nu in 1..g.len() as u32 {
                        let c = be::check_grouped_marginal2(&p, &g, nu).unwrap();
                        t.check(c.all_exact(), || format!("{label} grouped {} nu={nu}", g.label()));
                        let prefix = be::grouped_marginal_pmf2(&p, &g, nu).unwrap();
                        for given in &prefix.support {
                            let c = be::check_grouped_conditional2(&p, &g, &given.0, g.len() as u32).unwrap();
                            t.check(c.all_exact(), || format!("{label} grouped {} given {given}", g.label()));
                        }
                    }
                }
            }
        }
    }
}

fn criterion_6(t: &mut Tally) {
    let thetas = [r(1, 4), r(1, 3), r(2, 3)];
    for a in unit_tau1() {
        for k in 1..=4u32 {
            for n in 0..=4u32 {
                if n <= k + 1 {
                    let reps: Vec<_> = thetas
                        .iter()
                        .map(|th| fd::bernoulli_construction_check(&a, k, n, th).unwrap())
                        .collect();
                    for rep in &reps {
                        t.check(rep.exact, || format!("bernoulli {} k={k} n={n} theta={}", a.name, rep.theta));
                    }
                    t.check(reps.windows(2).all(|w| w[0].same_law(&w[1])), || {
                        format!("bernoulli {} k={k} n={n} not theta-invariant", a.name)
                    });
                }
                // Each trial's success probability θ(τ₂/τ₁)^{j-1} must lie in
                // (0,1); outside that domain the construction must refuse.
                let mut reps = Vec::new();
                for th in &thetas {
                    let in_domain = (0..=k).all(|j| th.clone() * a.ratio().powi(j.into()) < Exact::one());
                    match be::geometric_construction_check(&a, k, n, th) {
                        Ok(rep) => {
                            t.check(in_domain, || format!("geometric {} k={k} n={n} theta={th} accepted outside (0,1)", a.name));
                            t.check(rep.exact, || format!("geometric {} k={k} n={n} theta={th}", a.name));
                            reps.push(rep);
                        }
                        Err(e) => t.check(!in_domain, || format!("geometric {} k={k} n={n} theta={th}: {e}", a.name)),
                    }
                }
                t.check(reps.windows(2).all(|w| w[0].same_law(&w[1])), || {
                    format!("geometric {} k={k} n={n} not theta-invariant", a.name)
                });
            }
        }
    }
}

fn criterion_7(t: &mut Tally) {
    for a in unit_tau1() {
        for k in 1..=5u32 {
            for n in 0..=5u32 {
                if n <= k + 1 {
                    let p = fd::FirstKindParams::new(a.clone(), k, n).unwrap();
                    let mut reps: Vec<_> = (1..=3).map(|i| fd::mean_report(&p, i).unwrap()).collect();
                    if k >= 2 {
                        reps.extend(fd::bivariate_moments(&p, 3).unwrap());
                    }
                    for rep in reps {
                        t.check(rep.matched, || format!("first {} k={k} n={n} {} order {:?}", a.name, rep.quantity, rep.order));
                    }
                }
                let p = be::SecondKindParams::new(a.clone(), k, n).unwrap();
                let mut reps: Vec<_> = (1..=3).map(|i| be::factorial_moment_report(&p, i).unwrap()).collect();
                if k >= 2 {
                    for i1 in 1..=3 {
                        for i2 in 1..=3 {
                            reps.extend(be::bivariate_moments2(&p, i1, i2).unwrap());
                        }
                    }
                }
                for rep in reps {
                    t.check(rep.matched, || format!("second {} k={k} n={n} {} order {:?}", a.name, rep.quantity, rep.order));
                }
            }
        }
    }
    let a = AlgebraSpec::q_deformation(r(1, 2)).unwrap();
    let first = fd::mean_report(&fd::FirstKindParams::new(a.clone(), 1, 1).unwrap(), 1).unwrap();
    t.check(first.oracle == r(1, 3) && first.closed_form == Some(r(1, 3)), || {
        format!("first-kind E[X1] = {} (closed {:?})", first.oracle, first.closed_form)
    });
    let second = be::factorial_moment_report(&be::SecondKindParams::new(a, 1, 1).unwrap(), 1).unwrap();
    t.check(second.oracle == r(1, 3) && second.closed_form == Some(r(1, 3)), || {
        format!("second-kind E[X1] = {} (closed {:?})", second.oracle, second.closed_form)
    });
}

fn binomial(m: u32, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * f64::from(m - i) / f64::from(i + 1))
}

fn criterion_8(t: &mut Tally) {
    for &preset in &Preset::TAU_STRUCTURED {
        let a = AlgebraSpec::preset(preset, Approx(1.0), Approx(1.0 - 1e-8)).unwrap();
        for k in 1..=4u32 {
            for n in 0..=4u32 {
                if n <= k + 1 {
                    let tab = fd::joint_pmf(&fd::FirstKindParams::new(a.clone(), k, n).unwrap()).unwrap();
                    let want = 1.0 / binomial(k + 1, n);
                    for p in &tab.probabilities {
                        t.check((p.0 - want).abs() <= 1e-6, || format!("first {} k={k} n={n}: {} vs {want}", a.name, p.0));
                    }
                }
                let tab = be::joint_pmf2(&be::SecondKindParams::new(a.clone(), k, n).unwrap()).unwrap();
                let want = 1.0 / binomial(k + n, n);
                for p in &tab.probabilities {
                    t.check((p.0 - want).abs() <= 1e-6, || format!("second {} k={k} n={n}: {} vs {want}", a.name, p.0));
                }
            }
        }
    }
}

fn criterion_9(t: &mut Tally) {
    let a = AlgebraSpec::q_deformation(r(1, 2)).unwrap();
    let table = fd::joint_pmf(&fd::FirstKindParams::new(a, 2, 1).unwrap()).unwrap();
    t.check(table.probabilities == vec![r(4, 7), r(2, 7), r(1, 7)], || "table is not (4/7, 2/7, 1/7)".into());
    let info = RunInfo::new("sample", Mode::Exact).field("seed", 2024);
    let first = sample(&table, 2024, 100_000).unwrap();
    let second = sample(&table, 2024, 100_000).unwrap();
    t.check(first.within_standard_errors(3.0), || {
        format!("frequencies {:?} outside 3 standard errors", first.empirical_frequencies())
    });
    t.check(sample_csv(&info, &first).unwrap() == sample_csv(&info, &second).unwrap(), || {
        "draws differ between runs".into()
    });
}

fn criterion_10(t: &mut Tally, elapsed: Duration) {
    t.check(elapsed < Duration::from_secs(60), || format!("criteria 1-9 took {elapsed:?}"));
    let bin = env!("CARGO_BIN_EXE_rpq-urn");
    for args in [
        &["tabulate", "--kind", "second", "--k", "20", "--n", "20"][..],
        &["tabulate", "--kind", "first", "--k", "21", "--n", "1"][..],
        &["tabulate", "--kind", "second", "--k", "1", "--n", "4000000000"][..],
        &["verify", "--suite", "hs2", "--kmax", "25", "--nmax", "3"][..],
    ] {
        let out = Command::new(bin).args(args).output().unwrap();
        t.check(out.status.code() == Some(3) && out.stdout.is_empty(), || {
            format!("{args:?}: exit {:?}, stdout {} bytes", out.status.code(), out.stdout.len())
        });
    }
}

fn main() {
    type Criterion = (&'static str, Option<u64>, fn(&mut Tally));
    let criteria: [Criterion; 9] = [
        ("identity suite exact for the q-deformation", Some(10), criterion_1),
        ("discrepancy monomials for Jagannathan-Srinivasa", Some(10), criterion_2),
        ("normalization across presets", None, criterion_3),
        ("closed-form normalizers at tau1 = 1", None, criterion_4),
        ("chain rule and grouped pushforwards", None, criterion_5),
        ("Bernoulli and geometric constructions", None, criterion_6),
        ("closed-form moments", None, criterion_7),
        ("classical limit", None, criterion_8),
        ("sampler frequencies and determinism", Some(5), criterion_9),
    ];
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |i: usize, name: &str, budget: Option<u64>, t: Tally, took: Duration| {
        let mut t = t;
        if let Some(b) = budget {
            t.check(took < Duration::from_secs(b), || format!("took {took:?}, budget {b}s"));
        }
        let status = if t.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {i:>2} {status}: {name} ({} checks, {:.2}s)", t.checks, took.as_secs_f64());
        for f in t.failures.iter().take(10) {
            println!("    {f}");
        }
        if t.failures.len() > 10 {
            println!("    ... {} more", t.failures.len() - 10);
        }
        failed += usize::from(!t.failures.is_empty());
    };
    for (i, (name, budget, f)) in criteria.into_iter().enumerate() {
        let mut t = Tally::default();
        let at = Instant::now();
        f(&mut t);
        report(i + 1, name, budget, t, at.elapsed());
    }
    let mut t = Tally::default();
    let at = Instant::now();
    criterion_10(&mut t, start.elapsed());
    report(10, "suite runtime and capacity guards", None, t, at.elapsed());
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
