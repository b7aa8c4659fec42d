//! Acceptance suite. Runs every criterion, prints one line each and exits
//! nonzero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use coorbital::algebra::{certify_square_case, sign_of, Sqrt2Rational};
use coorbital::kernel::property_report;
use coorbital::masses::mass_null_space;
use coorbital::model::{residual, Configuration};
use coorbital::roots::{
    certified_count, collinear_insertion, collinear_insertion_third, find_roots, isosceles, square_case_roots,
    DEFAULT_SCAN_STEP,
};
use coorbital::solver::{default_grid, enumerate_equal_mass, CentralSolution, CENTRAL_TOLERANCE};
use coorbital::stacking::{
    insert, merge, search_stacked_with, theorem_two_spot_check, InsertionSpec, MassMode, Scenario, SearchOptions,
    STACK_TOLERANCE,
};
use coorbital::{critical_angles, eval_f, eval_f_derivative};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROOT_TOL: f64 = 1e-12;
const DERIVATIVE_TOL: f64 = 1e-12;
const SPOT_TOL: f64 = 1e-3;
const LOCATION_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-10;
const MASS_TOL: f64 = 1e-10;
const CERTIFICATE_BUDGET_SECS: f64 = 120.0;

/// Golden critical angle, from bisection of `f'` on `(3π/5, π)` to the last bit.
const CRITICAL_ANGLE: f64 = 1.8910822898493838;
/// Smallest `|defect|` over the roots of the square balance equation, from
/// the dense oracle below.
const SQUARE_DEFECT_ORACLE: f64 = 1.2741597661461896;
const SQUARE_MARGIN: f64 = 1.27;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn cfg(theta: &[f64]) -> Configuration {
    Configuration::new(theta.to_vec()).expect("valid configuration")
}

fn kite() -> Configuration {
    cfg(&[PI / 3.0, PI / 3.0, 2.0 * PI / 3.0, 2.0 * PI / 3.0])
}

fn regular(n: usize) -> Configuration {
    Configuration::regular(n).expect("regular polygon")
}

fn deg(x: f64) -> f64 {
    x * PI / 180.0
}

fn kernel_roots() -> Outcome {
    let mut worst: f64 = 0.0;
    for x in [PI / 3.0, PI, 5.0 * PI / 3.0] {
        let v = eval_f(x).map_err(|e| e.to_string())?;
        ensure!(v.abs() < ROOT_TOL, "|f({x})| = {:e}", v.abs());
        worst = worst.max(v.abs());
    }
    Ok(format!("max |f| = {worst:.1e} (tol {ROOT_TOL:e})"))
}

fn derivative_anchor() -> Outcome {
    let d = eval_f_derivative(PI, 1).map_err(|e| e.to_string())?;
    ensure!((d + 0.875).abs() < DERIVATIVE_TOL, "f'(π) = {d}");
    Ok(format!("f'(π) = {d}"))
}

fn critical_angle() -> Outcome {
    let c = critical_angles().first;
    let slope = eval_f_derivative(c, 1).map_err(|e| e.to_string())?;
    ensure!(c > 0.6 * PI && c < PI, "θc = {c} outside (3π/5, π)");
    ensure!(slope.abs() < DERIVATIVE_TOL, "|f'(θc)| = {:e}", slope.abs());
    ensure!((c - CRITICAL_ANGLE).abs() < 1e-15, "θc = {c}, golden {CRITICAL_ANGLE}");
    Ok(format!("θc = {c}, |f'(θc)| = {:.1e}", slope.abs()))
}

fn spot_values() -> Outcome {
    let a = eval_f(deg(155.0)).map_err(|e| e.to_string())?;
    let b = eval_f(deg(73.0)).map_err(|e| e.to_string())?;
    ensure!((a - 0.365).abs() <= SPOT_TOL, "f(155°) = {a}");
    ensure!((b - 0.388).abs() <= SPOT_TOL, "f(73°) = {b}");
    Ok(format!("f(155°) = {a:.6}, f(73°) = {b:.6}"))
}

fn collinear_equation() -> Outcome {
    let cert = certified_count(collinear_insertion, collinear_insertion_third, (0.05, PI - 0.05))
        .map_err(|e| e.to_string())?;
    ensure!(cert.max_roots == 3, "max_roots = {}", cert.max_roots);
    ensure!(cert.certified, "count not certified: {:?}", cert.found_roots);
    let expected = [PI / 3.0, PI / 2.0, 2.0 * PI / 3.0];
    ensure!(cert.found_roots.len() == 3, "roots {:?}", cert.found_roots);
    for (r, e) in cert.found_roots.iter().zip(expected) {
        ensure!((r - e).abs() < LOCATION_TOL, "root {r} vs {e}");
    }
    // The interval edges: h has no sign change within 0.05 of 0 or π.
    for edge in [(1e-3, 0.06), (PI - 0.06, PI - 1e-3)] {
        let extra = find_roots(collinear_insertion, edge, DEFAULT_SCAN_STEP).map_err(|e| e.to_string())?;
        ensure!(extra.is_empty(), "extra roots near the edge: {extra:?}");
    }
    Ok(format!(
        "roots {:?}, max_roots 3, min h''' {:.3}",
        cert.found_roots, cert.min_third
    ))
}

fn isosceles_equation() -> Outcome {
    let roots = find_roots(isosceles, (1e-3, PI - 1e-3), DEFAULT_SCAN_STEP).map_err(|e| e.to_string())?;
    ensure!(roots.len() == 3, "roots {roots:?}");
    ensure!(
        roots.iter().filter(|r| (*r - 2.0 * PI / 3.0).abs() < LOCATION_TOL).count() == 1,
        "no root at 2π/3: {roots:?}"
    );
    ensure!(
        roots.iter().filter(|&&r| r > PI / 4.0 && r < deg(50.0)).count() == 1,
        "no root in (π/4, 50°): {roots:?}"
    );
    ensure!(
        roots.iter().filter(|&&r| r > deg(138.0) && r < deg(139.0)).count() == 1,
        "no root in (138°, 139°): {roots:?}"
    );
    Ok(format!("roots {roots:?}"))
}

fn known_configurations() -> Outcome {
    let mut named = vec![
        ("(π,π)", cfg(&[PI, PI])),
        ("equilateral", regular(3)),
        ("square", regular(4)),
        ("kite", kite()),
        ("6-gon", regular(6)),
    ];
    named.extend((2..=12).map(|n| ("regular", regular(n))));
    let mut worst: f64 = 0.0;
    for (name, c) in &named {
        let r = residual(c, &vec![1.0; c.len()]).map_err(|e| e.to_string())?.inf_norm;
        ensure!(r < RESIDUAL_TOL, "{name} (n = {}) residual {r:e}", c.len());
        worst = worst.max(r);
    }
    Ok(format!("{} configurations, max residual {worst:.1e}", named.len()))
}

fn class_set(solutions: &[CentralSolution]) -> Vec<Configuration> {
    solutions.iter().map(|s| s.config.clone()).collect()
}

fn same_sets(a: &[Configuration], b: &[Configuration]) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| x.same_class(y)))
        && b.iter().all(|y| a.iter().any(|x| x.same_class(y)))
}

fn enumeration_counts() -> Outcome {
    let mut counts = Vec::new();
    for (n, expected) in [(2usize, 2usize), (3, 3), (4, 3)] {
        let grid = default_grid(n);
        let base = enumerate_equal_mass(n, grid).map_err(|e| e.to_string())?;
        let doubled = enumerate_equal_mass(n, 2 * grid).map_err(|e| e.to_string())?;
        ensure!(base.len() == expected, "n = {n}: {} classes", base.len());
        ensure!(
            same_sets(&class_set(&base), &class_set(&doubled)),
            "n = {n}: class set changes under grid doubling"
        );
        counts.push(format!("n={n}: {}", base.len()));
    }
    let four = class_set(&enumerate_equal_mass(4, default_grid(4)).map_err(|e| e.to_string())?);
    ensure!(four.iter().any(|c| c.same_class(&regular(4))), "square missing for n = 4");
    ensure!(four.iter().any(|c| c.same_class(&kite())), "kite missing for n = 4");
    Ok(format!("{}, stable under grid doubling", counts.join(", ")))
}

fn inverse_masses() -> Outcome {
    let k = mass_null_space(&kite()).map_err(|e| e.to_string())?;
    let collinear = mass_null_space(&cfg(&[PI, PI])).map_err(|e| e.to_string())?;
    let rep = k.positive_representative.as_ref().ok_or("kite has no positive representative")?;
    let spread = rep.as_slice().iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
    ensure!(spread < MASS_TOL, "kite representative {:?}", rep.as_slice());
    ensure!(collinear.null_dim == 2, "(π,π) null_dim = {}", collinear.null_dim);
    ensure!(
        k.null_dim == 1,
        "kite null_dim = {} (expected 1; antisymmetric 4x4 system has even rank), equal rep within {spread:.1e}, (π,π) null_dim 2",
        k.null_dim
    );
    Ok(format!("kite null_dim 1, equal rep within {spread:.1e}, (π,π) null_dim 2"))
}

type PairClass = (Configuration, Configuration);

fn found_pairs(
    sizes: impl IntoIterator<Item = usize>,
    scenario: Scenario,
    mode: MassMode,
) -> Result<(Vec<PairClass>, usize), String> {
    let options = SearchOptions::default();
    let mut out: Vec<PairClass> = Vec::new();
    let mut near = 0;
    for n in sizes {
        let report = search_stacked_with(n, scenario, mode, &options).map_err(|e| e.to_string())?;
        near += report.near_misses;
        for p in report.pairs {
            let verdict = p.verify().map_err(|e| e.to_string())?;
            if !verdict.stacked {
                return Err(format!("pair failed re-verification: {:?}", p.extended.config));
            }
            let key = (p.base.config.clone(), p.extended.config.clone());
            if !out.iter().any(|(b, e)| b.same_class(&key.0) && e.same_class(&key.1)) {
                out.push(key);
            }
        }
    }
    Ok((out, near))
}

fn matches_catalog(found: &[PairClass], expected: &[PairClass]) -> bool {
    found.len() == expected.len()
        && expected
            .iter()
            .all(|(b, e)| found.iter().any(|(fb, fe)| fb.same_class(b) && fe.same_class(e)))
}

fn describe(pairs: &[PairClass]) -> String {
    if pairs.is_empty() {
        return "none".into();
    }
    pairs
        .iter()
        .map(|(b, e)| format!("{}→{}", b.class_id(), e.class_id()))
        .collect::<Vec<_>>()
        .join("; ")
}

fn stacked_catalog() -> Outcome {
    let pi2 = cfg(&[PI, PI]);
    let lune = cfg(&[PI / 3.0, 5.0 * PI / 3.0]);
    let searches: Vec<(&str, Vec<usize>, Scenario, MassMode, Vec<PairClass>)> = vec![
        (
            "one_addition n≤4",
            vec![2, 3, 4],
            Scenario::OneAddition,
            MassMode::Solved,
            vec![(regular(3), kite())],
        ),
        (
            "two_separated_by_one n≤5",
            vec![2, 3, 4, 5],
            Scenario::TwoSeparatedByOne,
            MassMode::Equal,
            vec![(pi2.clone(), regular(4)), (pi2.clone(), kite()), (kite(), regular(6))],
        ),
        (
            "two_same_gap n≤4",
            vec![2, 3, 4],
            Scenario::TwoSameGap,
            MassMode::Equal,
            vec![(lune, kite())],
        ),
        ("two_distant 4≤n≤6", vec![4, 5, 6], Scenario::TwoDistant, MassMode::Equal, vec![]),
    ];
    let mut lines = Vec::new();
    for (name, sizes, scenario, mode, expected) in searches {
        let (found, near) = found_pairs(sizes, scenario, mode)?;
        ensure!(
            matches_catalog(&found, &expected),
            "{name}: found {} (expected {})",
            describe(&found),
            describe(&expected)
        );
        ensure!(near == 0, "{name}: {near} near misses");
        lines.push(format!("{name}: {}", describe(&found)));
    }
    let options = SearchOptions::default();
    for n in [5, 6] {
        let report = theorem_two_spot_check(n, 2, &options).map_err(|e| e.to_string())?;
        ensure!(
            report.pairs.is_empty() && report.near_misses == 0,
            "equal added masses, n = {n}: {} pairs, {} near misses",
            report.pairs.len(),
            report.near_misses
        );
    }
    lines.push("equal added masses n=5,6: none".into());
    Ok(format!("{} (tol {STACK_TOLERANCE:e})", lines.join(" | ")))
}

/// Closed form of the kernel, independent of the library.
fn oracle_f(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    x.sin() * (1.0 - 1.0 / (8.0 * s * s * s))
}

fn oracle_square_roots() -> Vec<(f64, f64)> {
    let balance = |x: f64| oracle_f(x) - oracle_f(PI + x);
    let defect = |x: f64| 3.0 * oracle_f(x) - oracle_f(PI / 2.0 - x) - oracle_f(PI - 2.0 * x);
    let (lo, hi, cells) = (1e-4, PI / 3.0 - 1e-4, 200_000);
    let h = (hi - lo) / cells as f64;
    let mut roots = Vec::new();
    let mut prev = balance(lo);
    for k in 1..=cells {
        let x = lo + k as f64 * h;
        let cur = balance(x);
        if prev.signum() != cur.signum() {
            let (mut a, mut b) = (x - h, x);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if balance(m).signum() == balance(a).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            let r = 0.5 * (a + b);
            roots.push((r, defect(r)));
        }
        prev = cur;
    }
    roots
}

fn square_non_coincidence() -> Outcome {
    let oracle = oracle_square_roots();
    ensure!(!oracle.is_empty(), "oracle found no root of the balance equation");
    let oracle_margin = oracle.iter().map(|(_, d)| d.abs()).fold(f64::INFINITY, f64::min);
    ensure!(
        (oracle_margin - SQUARE_DEFECT_ORACLE).abs() < 1e-9,
        "oracle margin {oracle_margin} drifted from {SQUARE_DEFECT_ORACLE}"
    );
    let found = square_case_roots().map_err(|e| e.to_string())?;
    ensure!(found.len() == oracle.len(), "{} roots vs oracle {}", found.len(), oracle.len());
    for (r, (x, _)) in found.iter().zip(&oracle) {
        ensure!((r.x - x).abs() < 1e-9, "root {} vs oracle {x}", r.x);
        ensure!(r.defect.abs() > SQUARE_MARGIN, "|defect({})| = {}", r.x, r.defect.abs());
    }
    let xs: Vec<String> = found.iter().map(|r| format!("{:.10} (defect {:.6})", r.x, r.defect)).collect();
    Ok(format!("roots {}, margin m = {SQUARE_MARGIN}", xs.join(", ")))
}

fn exact_certificate() -> Outcome {
    let start = Instant::now();
    let c = certify_square_case().map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let int = |v: i64| Sqrt2Rational::from_ints(v, 0);
    let two35 = Sqrt2Rational::from_bigints(num_bigint::BigInt::from(1u64 << 35), 0.into());
    ensure!(c.r1.stripped_factor == "-2 v^12", "R1 factor {}", c.r1.stripped_factor);
    ensure!(c.r2.stripped_factor == "2 u^12", "R2 factor {}", c.r2.stripped_factor);
    ensure!(c.r1.constant == int(-4), "r1(0) = {}", c.r1.constant);
    ensure!(c.r2.constant == int(4), "r2(0) = {}", c.r2.constant);
    ensure!(c.r1.leading == two35, "r1 leading {}", c.r1.leading);
    let quoted: Vec<_> = [&c.r1.quoted, &c.r2.quoted, &c.r1_numerator.quoted, &c.r2_numerator.quoted]
        .into_iter()
        .flatten()
        .collect();
    ensure!(quoted.iter().all(|q| q.matched), "quoted coefficient mismatch: {:?}", c.errata);
    ensure!(c.r1_numerator.all_negative && c.r2_numerator.all_negative, "a numerator has a nonnegative coefficient");
    ensure!(c.certified, "certificate not certified");
    ensure!(secs < CERTIFICATE_BUDGET_SECS, "took {secs:.1}s");
    Ok(format!(
        "R1 = -2v^12 r1, R2 = 2u^12 r2, {} quoted coefficients exact, numerators all negative, {secs:.2}s",
        quoted.len()
    ))
}

fn field_sign_agrees(rng: &mut ChaCha8Rng, samples: usize) -> Result<(), String> {
    for _ in 0..samples {
        let a = rng.gen_range(-1_000_000i64..1_000_000);
        let b = rng.gen_range(-1_000_000i64..1_000_000);
        let x = Sqrt2Rational::from_ints(a, b);
        let float = a as f64 + b as f64 * std::f64::consts::SQRT_2;
        if float.abs() > 1e-6 && sign_of(&x) != float.signum() as i8 {
            return Err(format!("sign_of({a} + {b}√2) = {}", sign_of(&x)));
        }
    }
    Ok(())
}

fn random_config(rng: &mut ChaCha8Rng, n: usize) -> Configuration {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let free: Vec<f64> = raw[..n - 1].iter().map(|x| x * TAU / total).collect();
    Configuration::from_free_angles(&free).expect("valid random configuration")
}

fn residual_is_dihedral(rng: &mut ChaCha8Rng, samples: usize) -> Result<(), String> {
    for _ in 0..samples {
        let n = rng.gen_range(2..=8);
        let c = random_config(rng, n);
        let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let r = residual(&c, &mu).map_err(|e| e.to_string())?.inf_norm;
        let (canon, map) = c.canonical_form();
        let moved = residual(&canon, &map.apply_to_masses(&mu)).map_err(|e| e.to_string())?.inf_norm;
        if (r - moved).abs() > 1e-12 * (1.0 + r) {
            return Err(format!("residual {r} vs relabeled {moved} at {:?}", c.angles()));
        }
    }
    Ok(())
}

fn insert_merge_round_trip(rng: &mut ChaCha8Rng, samples: usize) -> Result<(), String> {
    for _ in 0..samples {
        let n = rng.gen_range(3..=6);
        let c = random_config(rng, n);
        let g = rng.gen_range(0..n);
        let spec = InsertionSpec::pair(g, (g + 2) % n, rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95))
            .or_else(|_| InsertionSpec::single(g, 0.5))
            .map_err(|e| e.to_string())?;
        let back = merge(&insert(&c, &spec).map_err(|e| e.to_string())?, &spec).map_err(|e| e.to_string())?;
        let err = c.angles().iter().zip(back.angles()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > 1e-12 {
            return Err(format!("merge(insert) error {err:e}"));
        }
    }
    Ok(())
}

fn enumeration_reverifies() -> Result<(), String> {
    for n in 2..=4 {
        for s in enumerate_equal_mass(n, default_grid(n)).map_err(|e| e.to_string())? {
            let r = residual(&s.config, s.masses.as_slice()).map_err(|e| e.to_string())?.inf_norm;
            if r >= CENTRAL_TOLERANCE || !s.config.is_canonical() {
                return Err(format!("n = {n}: class {} residual {r:e}", s.class_id));
            }
        }
    }
    Ok(())
}

/// Brute-force classes for n = 2 and 3: kernel-root pairs and the isosceles
/// scalar equation on a 1e-5 grid.
fn enumeration_matches_oracle() -> Result<(), String> {
    let roots_of = |g: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
        let cells = ((hi - lo) / 1e-5) as usize;
        let h = (hi - lo) / cells as f64;
        (0..cells)
            .filter(|&k| {
                let (a, b) = (g(lo + k as f64 * h), g(lo + (k + 1) as f64 * h));
                a.signum() != b.signum()
            })
            .map(|k| lo + (k as f64 + 0.5) * h)
            .collect::<Vec<_>>()
    };
    let pairs: Vec<Configuration> = roots_of(&oracle_f, 1e-3, PI + 1e-3)
        .into_iter()
        .map(|t| cfg(&[t, TAU - t]).canonicalize())
        .collect();
    let iso: Vec<Configuration> = roots_of(&|t| oracle_f(t) + oracle_f(2.0 * t), 1e-3, PI - 1e-3)
        .into_iter()
        .map(|t| cfg(&[t, t, TAU - 2.0 * t]).canonicalize())
        .collect();
    for (n, oracle) in [(2, pairs), (3, iso)] {
        let found = class_set(&enumerate_equal_mass(n, default_grid(n)).map_err(|e| e.to_string())?);
        let agree = found.len() == oracle.len()
            && oracle
                .iter()
                .all(|o| found.iter().any(|f| f.class_distance(o) < 1e-4));
        if !agree {
            return Err(format!("n = {n}: {} classes vs oracle {}", found.len(), oracle.len()));
        }
    }
    Ok(())
}

fn property_suites() -> Outcome {
    let samples = 1000;
    let kernel = property_report(samples, 0);
    if let Some(bad) = kernel.iter().find(|p| !p.passed) {
        return Err(format!("kernel {}: worst margin {:e}", bad.name, bad.worst_margin));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    field_sign_agrees(&mut rng, samples)?;
    residual_is_dihedral(&mut rng, samples)?;
    insert_merge_round_trip(&mut rng, samples)?;
    enumeration_reverifies()?;
    enumeration_matches_oracle()?;
    Ok(format!(
        "{} kernel properties, field signs, residual relabeling, insert/merge, enumeration re-verification and oracle ({samples} samples)",
        kernel.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 13] = [
        (1, "kernel roots", kernel_roots),
        (2, "derivative anchor", derivative_anchor),
        (3, "critical angle", critical_angle),
        (4, "spot values", spot_values),
        (5, "collinear insertion equation", collinear_equation),
        (6, "isosceles equation", isosceles_equation),
        (7, "known central configurations", known_configurations),
        (8, "enumeration counts", enumeration_counts),
        (9, "inverse masses", inverse_masses),
        (10, "stacked catalog", stacked_catalog),
        (11, "square-case non-coincidence", square_non_coincidence),
        (12, "exact certificate", exact_certificate),
        (13, "property suites", property_suites),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {id:>2} {name}: {detail} [{secs:.2}s]"),
            Err(reason) => {
                failed += 1;
                println!("[FAIL] {id:>2} {name}: {reason} [{secs:.2}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
