//! The interaction kernel `f(x) = sin(x) (1 - 1 / (8 sin^3(x/2)))` on `(0, 2π)`.
//!
//! Every equation in this crate is a weighted sum of `f` evaluated at cyclic
//! partial sums of gap angles. `f` blows up at `0` and `2π` (collisions), so
//! evaluation is restricted to a guarded interval `[δ, 2π - δ]`.
//!
//! Shape of `f` on `(0, 2π)`:
//!
//! * `f(π - x) = -f(π + x)` (odd about `π`),
//! * `f' >= f'(π) = -7/8`,
//! * `f''' > 0`,
//! * increasing on `(0, θc)`, decreasing on `(θc, 2π - θc)`, increasing on
//!   `(2π - θc, 2π)`, with a single critical angle `θc > 3π/5` in `(0, π)`.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::KernelError;

/// Default exclusion half-width around the collision points `0` and `2π`.
pub const DEFAULT_DELTA_GUARD: f64 = 1e-9;

/// Width at which bracketing refinements stop.
pub(crate) const BRACKET_WIDTH: f64 = 1e-13;

/// The guarded interval `[δ, 2π - δ]` on which the kernel is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDomain {
    delta_guard: f64,
}

impl Default for KernelDomain {
    fn default() -> Self {
        Self {
            delta_guard: DEFAULT_DELTA_GUARD,
        }
    }
}

impl KernelDomain {
    pub fn new(delta_guard: f64) -> Result<Self, KernelError> {
        if !(delta_guard > 0.0 && delta_guard < PI) {
            return Err(KernelError::InvalidGuard(delta_guard));
        }
        Ok(Self { delta_guard })
    }

    pub fn delta_guard(&self) -> f64 {
        self.delta_guard
    }

    pub fn lower(&self) -> f64 {
        self.delta_guard
    }

    pub fn upper(&self) -> f64 {
        TAU - self.delta_guard
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower() && x <= self.upper()
    }

    pub fn check(&self, x: f64) -> Result<f64, KernelError> {
        if self.contains(x) {
            Ok(x)
        } else {
            Err(KernelError::Domain {
                x,
                lower: self.lower(),
                upper: self.upper(),
            })
        }
    }

    pub fn f(&self, x: f64) -> Result<f64, KernelError> {
        self.check(x).map(f_value)
    }

    pub fn derivative(&self, x: f64, order: u8) -> Result<f64, KernelError> {
        let x = self.check(x)?;
        match order {
            1 => Ok(df_value(x)),
            2 => Ok(d2f_value(x)),
            3 => Ok(d3f_value(x)),
            other => Err(KernelError::DerivativeOrder(other)),
        }
    }
}

/// `f(x)` on the default guarded domain.
pub fn eval_f(x: f64) -> Result<f64, KernelError> {
    KernelDomain::default().f(x)
}

/// `f^(order)(x)` for `order` in `1..=3` on the default guarded domain.
pub fn eval_f_derivative(x: f64, order: u8) -> Result<f64, KernelError> {
    KernelDomain::default().derivative(x, order)
}

// Unchecked closed forms. Callers guarantee `x` is inside the guarded domain;
// sin(x/2) > 0 there, so the absolute value in the kernel is dropped.

#[inline]
pub(crate) fn f_value(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    x.sin() * (1.0 - 1.0 / (8.0 * s * s * s))
}

#[inline]
pub(crate) fn df_value(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    let c = x.cos();
    c + (3.0 + c) / (16.0 * s * s * s)
}

#[inline]
pub(crate) fn d2f_value(x: f64) -> f64 {
    let (s, c) = (0.5 * x).sin_cos();
    let s2 = s * s;
    -x.sin() + c / (16.0 * s2) - 3.0 * c / (8.0 * s2 * s2)
}

#[inline]
pub(crate) fn d3f_value(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    let s3 = s * s * s;
    -x.cos() + 1.0 / (32.0 * s) - 5.0 / (8.0 * s3) + 3.0 / (4.0 * s3 * s * s)
}

/// The two critical angles of `f`: `θc` in `(0, π)` and `θ'c = 2π - θc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalAngles {
    pub first: f64,
    pub second: f64,
}

/// Critical angles of `f`, computed once by bisection of `f'` on `(3π/5, π)`.
pub fn critical_angles() -> CriticalAngles {
    static CACHE: OnceLock<CriticalAngles> = OnceLock::new();
    *CACHE.get_or_init(|| {
        // f'(3π/5) > 0 and f'(π) = -7/8.
        let first = bisect_increasing(|x| -df_value(x), 0.0, 0.6 * PI, PI);
        CriticalAngles {
            first,
            second: TAU - first,
        }
    })
}

/// Finds `x` in `[lo, hi]` with `g(x) = level`, for `g` increasing on the interval
/// and `g(lo) <= level <= g(hi)`. Bisects down to [`BRACKET_WIDTH`], then takes a
/// secant step that is kept only if it stays in the bracket and improves the fit.
fn bisect_increasing(g: impl Fn(f64) -> f64, level: f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > BRACKET_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (glo, ghi) = (g(lo) - level, g(hi) - level);
    let mut best = if glo.abs() <= ghi.abs() { lo } else { hi };
    if ghi != glo {
        let secant = lo - glo * (hi - lo) / (ghi - glo);
        if secant > lo && secant < hi && (g(secant) - level).abs() < (g(best) - level).abs() {
            best = secant;
        }
    }
    best
}

/// Solutions of `f(t) = level` on each monotone branch of `f`.
///
/// Branch 1 is the increasing piece `(0, θc]`, branch 2 the decreasing piece
/// `(θc, θ'c]` and branch 3 the increasing piece `(θ'c, 2π)`. A level equal to
/// `f(θc)` resolves to `θc` on branch 1 and is absent from branch 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoints {
    pub level: f64,
    pub on_branch_1: Option<f64>,
    pub on_branch_2: Option<f64>,
    pub on_branch_3: Option<f64>,
}

/// Level-set points of `f` on its three monotone branches (default domain).
pub fn branch_points(level: f64) -> BranchPoints {
    KernelDomain::default().branch_points(level)
}

impl KernelDomain {
    pub fn branch_points(&self, level: f64) -> BranchPoints {
        let CriticalAngles { first, second } = critical_angles();
        let peak = f_value(first);
        let trough = f_value(second);
        let (lo, hi) = (self.lower(), self.upper());

        let on_branch_1 = if level == peak {
            Some(first)
        } else if level < peak && level >= f_value(lo) {
            Some(bisect_increasing(f_value, level, lo, first))
        } else {
            None
        };
        let on_branch_2 = if level < peak && level >= trough {
            Some(bisect_increasing(|x| -f_value(x), -level, first, second))
        } else {
            None
        };
        let on_branch_3 = if level > trough && level <= f_value(hi) {
            Some(bisect_increasing(f_value, level, second, hi))
        } else {
            None
        };
        BranchPoints {
            level,
            on_branch_1,
            on_branch_2,
            on_branch_3,
        }
    }
}

/// Outcome of one sampled shape property of `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub samples: usize,
    /// Smallest observed margin; the property holds when it is positive.
    pub worst_margin: f64,
    pub passed: bool,
}

impl PropertyCheck {
    fn new(name: &'static str, samples: usize, worst_margin: f64) -> Self {
        Self {
            name,
            samples,
            worst_margin,
            passed: worst_margin > 0.0,
        }
    }
}

/// Random level pair `f1 < f2` whose points on branches 1 and 2 all exist.
fn interlaced_levels(rng: &mut ChaCha8Rng) -> Option<[(f64, f64); 2]> {
    let peak = f_value(critical_angles().first);
    let a = rng.gen_range(-peak..peak);
    let b = rng.gen_range(-peak..peak);
    if a == b {
        return None;
    }
    let (p1, p2) = (branch_points(a.min(b)), branch_points(a.max(b)));
    Some([
        (p1.on_branch_1?, p1.on_branch_2?),
        (p2.on_branch_1?, p2.on_branch_2?),
    ])
}

/// Samples the shape of `f`: odd symmetry about `π`, the floor on `f'`,
/// positivity of the third derivative, the monotone branches, and how
/// level-set pairs on the first two branches move with the level.
pub fn property_report(samples: usize, seed: u64) -> Vec<PropertyCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let CriticalAngles { first, second } = critical_angles();
    let guard = 1e-6;
    let mut uniform = |lo: f64, hi: f64| -> Vec<f64> { (0..samples).map(|_| rng.gen_range(lo..hi)).collect() };

    let odd = uniform(guard, PI - guard)
        .into_iter()
        .map(|x| 1e-12 - (f_value(PI - x) + f_value(PI + x)).abs() / (1.0 + f_value(PI - x).abs()))
        .fold(f64::INFINITY, f64::min);
    let whole = uniform(guard, TAU - guard);
    let floor = whole
        .iter()
        .map(|&x| df_value(x) + 0.875 + 1e-12)
        .fold(f64::INFINITY, f64::min);
    let convex = whole.iter().map(|&x| d3f_value(x)).fold(f64::INFINITY, f64::min);

    let steps = samples.max(2);
    let mut monotone = f64::INFINITY;
    for k in 1..steps {
        let t = k as f64 / steps as f64;
        let x1 = guard + t * (first - 2.0 * guard);
        let x2 = first + guard + t * (second - first - 2.0 * guard);
        let x3 = second + guard + t * (TAU - second - 2.0 * guard);
        monotone = monotone.min(df_value(x1)).min(-df_value(x2)).min(df_value(x3));
    }

    let mut shrink = f64::INFINITY;
    let mut sum_bound = 2.0 * first - 1.2 * PI;
    let mut drawn = 0;
    while drawn < samples {
        let Some([(l1, r1), (l2, r2)]) = interlaced_levels(&mut rng) else {
            continue;
        };
        drawn += 1;
        shrink = shrink.min((l1 + r1) - (l2 + r2));
        sum_bound = sum_bound.min(l1 + r1 - 2.0 * first).min(l2 + r2 - 2.0 * first);
    }

    vec![
        PropertyCheck::new("odd_about_pi", samples, odd),
        PropertyCheck::new("derivative_floor", samples, floor),
        PropertyCheck::new("third_derivative_positive", samples, convex),
        PropertyCheck::new("monotone_branches", samples, monotone),
        PropertyCheck::new("level_pairs_shrink", samples, shrink),
        PropertyCheck::new("level_pair_sum_bound", samples, sum_bound),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const FRAC_PI_3: f64 = PI / 3.0;

    fn deg(d: f64) -> f64 {
        d * PI / 180.0
    }

    // Five-point central difference, independent of the closed forms.
    fn five_point(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-g(x + 2.0 * h) + 8.0 * g(x + h) - 8.0 * g(x - h) + g(x - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn roots_of_the_kernel() {
        for r in [FRAC_PI_3, PI, 5.0 * FRAC_PI_3] {
            assert!(eval_f(r).unwrap().abs() < 1e-12, "f({r}) not zero");
        }
    }

    #[test]
    fn closed_form_values() {
        let expected = 1.0 - 2f64.sqrt() / 4.0;
        assert!((eval_f(PI / 2.0).unwrap() - expected).abs() < 1e-15);
        assert!((eval_f(deg(155.0)).unwrap() - 0.365).abs() < 1e-3);
        assert!((eval_f(deg(73.0)).unwrap() - 0.388).abs() < 1e-3);
    }

    #[test]
    fn derivative_anchors() {
        assert!((eval_f_derivative(PI, 1).unwrap() + 0.875).abs() < 1e-15);
        assert!((eval_f_derivative(FRAC_PI_3, 1).unwrap() - 2.25).abs() < 1e-14);
        let third = eval_f_derivative(1.0, 3).unwrap();
        let fd = five_point(d2f_value, 1.0, 1e-3);
        assert!(third > 0.0);
        assert!((third - fd).abs() / third.abs() < 1e-6);
    }

    #[test]
    fn domain_guard() {
        assert!(matches!(eval_f(0.0), Err(KernelError::Domain { .. })));
        assert!(matches!(eval_f(TAU), Err(KernelError::Domain { .. })));
        assert!(eval_f(1e-10).is_err());
        assert!(eval_f(DEFAULT_DELTA_GUARD).is_ok());
        assert!(matches!(
            eval_f_derivative(1.0, 4),
            Err(KernelError::DerivativeOrder(4))
        ));
        assert!(KernelDomain::new(0.0).is_err());
        assert!(KernelDomain::new(-1.0).is_err());
    }

    #[test]
    fn critical_angle_golden() {
        let CriticalAngles { first, second } = critical_angles();
        // Independent oracle: plain bisection on f' over (3π/5, π), no polish.
        let (mut lo, mut hi) = (0.6 * PI, PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if df_value(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((first - lo).abs() < 1e-13);
        assert!((first - 1.891_082_289_849_383_8).abs() < 1e-13);
        assert!(first > 0.6 * PI && first < PI);
        assert!(df_value(first).abs() < 1e-12);
        assert_eq!(second, TAU - first);
    }

    #[test]
    fn branch_points_at_zero_level() {
        let bp = branch_points(0.0);
        assert!((bp.on_branch_1.unwrap() - FRAC_PI_3).abs() < 1e-12);
        assert!((bp.on_branch_2.unwrap() - PI).abs() < 1e-12);
        assert!((bp.on_branch_3.unwrap() - 5.0 * FRAC_PI_3).abs() < 1e-12);
    }

    #[test]
    fn branch_points_round_trip_and_paper_level() {
        let bp = branch_points(f_value(PI / 2.0));
        assert!((bp.on_branch_1.unwrap() - PI / 2.0).abs() < 1e-12);

        let bp = branch_points(0.365);
        assert!((bp.on_branch_2.unwrap() - deg(155.0)).abs() < 2e-3);
        // Oracle: bisection of f - 0.365 on (π/3, θc).
        let (mut lo, mut hi) = (FRAC_PI_3, critical_angles().first);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f_value(mid) < 0.365 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((bp.on_branch_1.unwrap() - lo).abs() < 1e-12);
        assert!((lo - 1.256_150_463_667_925).abs() < 1e-12);
    }

    #[test]
    fn branch_point_tie_and_absence() {
        let peak = f_value(critical_angles().first);
        let bp = branch_points(peak);
        assert_eq!(bp.on_branch_1, Some(critical_angles().first));
        assert_eq!(bp.on_branch_2, None);
        assert!(bp.on_branch_3.is_some());

        let bp = branch_points(peak + 0.1);
        assert!(bp.on_branch_1.is_none() && bp.on_branch_2.is_none());
        assert!(bp.on_branch_3.is_some());
    }

    #[test]
    fn antisymmetry_about_pi() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = rng.gen_range(1e-6..PI - 1e-6);
            let sum = f_value(PI - x) + f_value(PI + x);
            let scale = 1.0 + f_value(PI - x).abs();
            assert!(sum.abs() < 1e-12 * scale, "x={x} sum={sum}");
        }
    }

    #[test]
    fn derivative_floor_and_convexity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = rng.gen_range(1e-6..TAU - 1e-6);
            assert!(df_value(x) >= -0.875 - 1e-12, "f'({x}) below -7/8");
            assert!(d3f_value(x) > 0.0, "f'''({x}) not positive");
        }
    }

    #[test]
    fn monotone_branches() {
        let CriticalAngles { first, second } = critical_angles();
        let n = 2000;
        for k in 1..n {
            let t = k as f64 / n as f64;
            let x1 = 1e-6 + t * (first - 1e-6 - 1e-6);
            assert!(df_value(x1) > 0.0);
            let x2 = first + 1e-6 + t * (second - first - 2e-6);
            assert!(df_value(x2) < 0.0);
            let x3 = second + 1e-6 + t * (TAU - second - 2e-6);
            assert!(df_value(x3) > 0.0);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let n = 500;
        for k in 0..n {
            let x = 0.05 + (TAU - 0.1) * k as f64 / (n - 1) as f64;
            for (analytic, lower) in [
                (df_value as fn(f64) -> f64, f_value as fn(f64) -> f64),
                (d2f_value, df_value),
                (d3f_value, d2f_value),
            ] {
                let a = analytic(x);
                let fd = five_point(lower, x, 1e-4);
                assert!(
                    (a - fd).abs() <= 1e-6 * a.abs().max(1.0),
                    "x={x} analytic={a} fd={fd}"
                );
            }
        }
    }

    fn random_interlaced_level_pair(rng: &mut ChaCha8Rng) -> Option<(BranchPoints, BranchPoints)> {
        let peak = f_value(critical_angles().first);
        let trough = -peak;
        let a = rng.gen_range(trough..peak);
        let b = rng.gen_range(trough..peak);
        let (f1, f2) = if a < b { (a, b) } else { (b, a) };
        if f1 == f2 {
            return None;
        }
        let (p1, p2) = (branch_points(f1), branch_points(f2));
        (p1.on_branch_1.is_some()
            && p1.on_branch_2.is_some()
            && p2.on_branch_1.is_some()
            && p2.on_branch_2.is_some())
        .then_some((p1, p2))
    }

    #[test]
    fn level_pairs_shrink_as_level_rises() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let theta_c = critical_angles().first;
        let mut checked = 0;
        while checked < 1000 {
            let Some((p1, p2)) = random_interlaced_level_pair(&mut rng) else {
                continue;
            };
            let (l1, r1) = (p1.on_branch_1.unwrap(), p1.on_branch_2.unwrap());
            let (l2, r2) = (p2.on_branch_1.unwrap(), p2.on_branch_2.unwrap());
            assert!(l1 < l2 && l2 < theta_c && theta_c < r2 && r2 < r1);
            assert!(l2 + r2 < l1 + r1, "levels {} {}", p1.level, p2.level);
            for (l, r) in [(l1, r1), (l2, r2)] {
                assert!(l + r > 2.0 * theta_c);
                assert!(2.0 * theta_c > 1.2 * PI);
            }
            checked += 1;
        }
    }

    #[test]
    fn property_report_passes() {
        let report = property_report(1000, 0);
        assert_eq!(report.len(), 6);
        for check in &report {
            assert!(check.passed, "{check:?}");
        }
    }
}
