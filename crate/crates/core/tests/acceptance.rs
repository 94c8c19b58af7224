//! Acceptance criteria 1–9. Every criterion prints one line
//! `criterion N: PASS|FAIL <name> (<elapsed>, <tolerance>)`; the test fails if any
//! criterion fails. All comparisons are exact (integer and rational
//! arithmetic), so the tolerance column records the runtime budget only.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use adelic_core::adelic::ProductPolicy;
use adelic_core::checks::{self, random_target, split_with_retry, PropertyResult};
use adelic_core::exactla::abelian::valuation;
use adelic_core::exactla::AbelianGroup;
use adelic_core::instances::hasse::{adelic_split, h0_reconstruct, hasse_spec, verify_split, HasseVariant, PresentedModule};
use adelic_core::instances::torus::{torus_cohomology, TorusRank1Instance};
use adelic_core::{IntMatrix, Rational};

struct Outcome {
    passed: bool,
    detail: String,
}

fn ok() -> Outcome {
    Outcome { passed: true, detail: String::new() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { passed: false, detail: detail.into() }
}

fn from_properties(props: &[PropertyResult]) -> Outcome {
    match props.iter().find(|p| !p.passed) {
        None => ok(),
        Some(p) => fail(format!("{}: {}", p.property, p.detail.clone().unwrap_or_default())),
    }
}

/// Runs one criterion and prints its line. The runtime budget is enforced in
/// optimized builds only; debug builds report it.
fn criterion(n: usize, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let mut out = f();
    let elapsed = t.elapsed();
    let over = budget.is_some_and(|b| elapsed > b);
    if over && !cfg!(debug_assertions) {
        out = fail(format!("took {elapsed:?}, budget {:?}", budget.unwrap()));
    }
    let budget = budget.map_or("no budget".to_string(), |b| format!("budget {b:?}{}", if over { ", exceeded in debug build" } else { "" }));
    println!(
        "criterion {n}: {} {name} ({elapsed:.2?}, exact, {budget}){}",
        if out.passed { "PASS" } else { "FAIL" },
        if out.detail.is_empty() { String::new() } else { format!(" -- {}", out.detail) }
    );
    out.passed
}

fn subsets() -> Vec<Vec<u64>> {
    let primes = [2u64, 3, 5, 7];
    (1u32..16)
        .filter(|m| (1..=3).contains(&m.count_ones()))
        .map(|m| (0..4).filter(|i| m >> i & 1 == 1).map(|i| primes[i]).collect())
        .collect()
}

fn int_matrix(rows: Vec<Vec<i64>>) -> IntMatrix {
    IntMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect())
}

/// `(name, relations, free rank, torsion orders over ℤ)`.
fn test_modules() -> Vec<(&'static str, IntMatrix, usize, Vec<u64>)> {
    vec![
        ("R", IntMatrix::zeros(1, 0), 1, vec![]),
        ("R^2", IntMatrix::zeros(2, 0), 2, vec![]),
        ("Z/6", int_matrix(vec![vec![6]]), 0, vec![6]),
        ("mixed", int_matrix(vec![vec![0, 0], vec![6, 0], vec![0, 4]]), 1, vec![6, 4]),
    ]
}

/// `M ⊗ ℤ_(S)`: the S-primary parts of the torsion survive.
fn expected_group(rank: usize, torsion: &[u64], primes: &[u64]) -> AbelianGroup {
    let mut parts = Vec::new();
    for &t in torsion {
        for &p in primes {
            let mut q = 1u64;
            let mut x = t;
            while x % p == 0 {
                x /= p;
                q *= p;
            }
            if q > 1 {
                parts.push(BigInt::from(q));
            }
        }
    }
    AbelianGroup::with_torsion(rank, parts)
}

fn hasse_reproduction() -> Outcome {
    for s in subsets() {
        for (name, rel, rank, torsion) in test_modules() {
            let m = PresentedModule::new(&s, rel).unwrap();
            let expected = expected_group(rank, &torsion, &s);
            for variant in HasseVariant::ALL {
                for policy in [ProductPolicy::SpecializationsOnly, ProductPolicy::AllClosedPoints] {
                    let mut tables = Vec::new();
                    for precision in [32, 64] {
                        let tag = format!("S={s:?} M={name} {variant} {policy:?} k={precision}");
                        let spec = match hasse_spec(&m, variant, policy, precision) {
                            Ok(x) => x,
                            Err(e) => return fail(format!("{tag}: {e}")),
                        };
                        let rec = match h0_reconstruct(&spec, &m) {
                            Ok(x) => x,
                            Err(e) => return fail(format!("{tag}: {e}")),
                        };
                        if !rec.is_isomorphism() || rec.cohomology.group(0) != expected || !rec.cohomology.vanishes_from(1) {
                            return fail(format!("{tag}: got {}", rec.cohomology));
                        }
                        tables.push(rec.cohomology);
                    }
                    if tables[0] != tables[1] {
                        return fail(format!("S={s:?} M={name} {variant}: precision dependence"));
                    }
                }
            }
        }
    }
    ok()
}

fn constructive_split() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    for s in subsets() {
        for i in 0..200 {
            let seeds: Vec<u64> = s.iter().map(|_| r.gen()).collect();
            let make = |k: usize| s.iter().zip(&seeds).map(|(&p, &x)| random_target(&mut ChaCha8Rng::seed_from_u64(x), p, k)).collect();
            match split_with_retry(&s, make, 32) {
                Ok(true) => {}
                Ok(false) => return fail(format!("S={s:?} target {i}: round trip")),
                Err(e) => return fail(format!("S={s:?} target {i}: {e}")),
            }
            // exact oracle: a_p = b_p + q has nonnegative p-adic valuation
            let targets: Vec<_> = s.iter().zip(&seeds).map(|(&p, &x)| random_target(&mut ChaCha8Rng::seed_from_u64(x), p, 64).unwrap()).collect();
            let split = adelic_split(&s, &targets).unwrap();
            assert!(verify_split(&s, &targets, &split).unwrap());
            for (b, &p) in targets.iter().zip(&s) {
                let a: Rational = b.exact.clone().unwrap() + split.q.clone();
                if a != Rational::from_integer(0.into()) && valuation(&a, p) < 0 {
                    return fail(format!("S={s:?} target {i}: a_{p} = {a} is not integral"));
                }
            }
        }
    }
    ok()
}

fn local_cohomology() -> Outcome {
    let (h, window) = checks::local_cohomology_xy().unwrap();
    for d in window.degrees() {
        if h.dim(0, &d) != 0 || h.dim(1, &d) != 0 {
            return fail(format!("H^0 or H^1 nonzero at {d:?}"));
        }
        let want = usize::from(d[0] <= -1 && d[1] <= -1);
        if h.dim(2, &d) != want {
            return fail(format!("dim H^2 at {d:?} is {}", h.dim(2, &d)));
        }
    }
    for total in 2..=10i64 {
        let sum: usize = window.degrees().iter().filter(|d| d[0] + d[1] == -total).map(|d| h.dim(2, d)).sum();
        if sum as i64 != total - 1 {
            return fail(format!("total degree −{total}: {sum}"));
        }
    }
    from_properties(&checks::radical().unwrap())
}

fn torus() -> Outcome {
    for n in 1..=5 {
        let h = torus_cohomology(&TorusRank1Instance::first(n, (-12, 4))).unwrap();
        for d in -12..=4i64 {
            let h0 = usize::from(d == 0);
            let h1 = if d < 0 && d % 2 == 0 { n } else { 0 };
            if h.dim(0, &[d]) != h0 || h.dim(1, &[d]) != h1 {
                return fail(format!("n={n} degree {d}: H^0={} H^1={}", h.dim(0, &[d]), h.dim(1, &[d])));
            }
        }
        if !h.vanishes_from(2) {
            return fail(format!("n={n}: higher cohomology"));
        }
    }
    ok()
}

// Runs without the libtest harness so the criterion lines are never captured.
fn main() -> ExitCode {
    let s = Duration::from_secs;
    let results: BTreeMap<usize, bool> = [
        (1, criterion(1, "Hasse reproduction", Some(s(5)), hasse_reproduction)),
        (2, criterion(2, "constructive H^1 = 0", Some(s(5)), constructive_split)),
        (3, criterion(3, "local cohomology of (x,y)", Some(s(5)), local_cohomology)),
        (
            4,
            criterion(4, "subdivision invariance", None, || from_properties(&checks::subdivision(4, 5, 20).unwrap())),
        ),
        (5, criterion(5, "delta squared", None, || from_properties(&checks::delta_squared(5, 100)))),
        (6, criterion(6, "rank-one torus", Some(s(2)), torus)),
        (7, criterion(7, "filtration concentration", None, || from_properties(&checks::filtration().unwrap()))),
        (8, criterion(8, "sum versus product", None, || from_properties(&checks::sum_product().unwrap()))),
        (
            9,
            criterion(9, "absorbativity and transitivity", None, || {
                from_properties(&checks::absorbative(9, &[2, 3, 5], 50).unwrap())
            }),
        ),
    ]
    .into_iter()
    .collect();
    let failed: Vec<usize> = results.iter().filter(|(_, &p)| !p).map(|(&n, _)| n).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
