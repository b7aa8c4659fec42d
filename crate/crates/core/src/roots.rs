//! Root isolation for scalar equations built from the kernel.
//!
//! Roots are bracketed by a uniform sign scan, refined by bisection and
//! counted against an upper bound: a function with a positive third derivative
//! on an interval has at most three roots there. Positivity is checked on a
//! dense grid, which makes the bound an auditable heuristic rather than a proof;
//! the certificate records the grid step and the smallest value observed.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::RootError;
use crate::kernel::{d3f_value, f_value, BRACKET_WIDTH};

/// Default scan step in radians.
pub const DEFAULT_SCAN_STEP: f64 = 1e-3;

/// Refined roots closer than this are reported once.
pub const MERGE_DISTANCE: f64 = 1e-9;

/// An interval on whose endpoints `g` takes opposite signs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub sign_lo: i8,
    pub sign_hi: i8,
}

/// Upper bound on the number of roots in an interval, with the roots found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootCountCertificate {
    pub interval: (f64, f64),
    pub max_roots: usize,
    pub found_roots: Vec<f64>,
    pub certified: bool,
    pub grid_step: f64,
    pub min_third: f64,
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn grid(interval: (f64, f64), step: f64) -> Result<impl Iterator<Item = f64>, RootError> {
    let (lo, hi) = interval;
    if !(lo < hi) || !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(RootError::InvalidInterval { lo, hi, step });
    }
    let cells = ((hi - lo) / step).ceil().max(1.0) as usize;
    let width = (hi - lo) / cells as f64;
    Ok((0..=cells).map(move |k| if k == cells { hi } else { lo + k as f64 * width }))
}

/// Brackets every sign change of `g` on a uniform grid over `interval`.
///
/// Grid points where `g` is exactly zero or not finite are skipped, so a
/// bracket may span them.
pub fn isolate_roots(
    g: impl Fn(f64) -> f64,
    interval: (f64, f64),
    step: f64,
) -> Result<Vec<RootBracket>, RootError> {
    let mut brackets = Vec::new();
    let mut previous: Option<(f64, i8)> = None;
    for x in grid(interval, step)? {
        let value = g(x);
        let s = sign(value);
        if s == 0 || !value.is_finite() {
            continue;
        }
        if let Some((x_prev, s_prev)) = previous {
            if s != s_prev {
                brackets.push(RootBracket {
                    lo: x_prev,
                    hi: x,
                    sign_lo: s_prev,
                    sign_hi: s,
                });
            }
        }
        previous = Some((x, s));
    }
    Ok(brackets)
}

/// Bisects `bracket` down to width `1e-13`, then takes a secant step kept
/// only if it stays inside the bracket and lowers `|g|`.
pub fn refine_root(g: impl Fn(f64) -> f64, bracket: &RootBracket) -> f64 {
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let sign_lo = bracket.sign_lo;
    while hi - lo > BRACKET_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = sign(g(mid));
        if s == 0 {
            return mid;
        }
        if s == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (glo, ghi) = (g(lo), g(hi));
    let mut best = if glo.abs() <= ghi.abs() { lo } else { hi };
    if ghi != glo {
        let secant = lo - glo * (hi - lo) / (ghi - glo);
        if secant > lo && secant < hi && g(secant).abs() < g(best).abs() {
            best = secant;
        }
    }
    best
}

/// Isolates and refines every root on the scan, merging near-duplicates.
pub fn find_roots(
    g: impl Fn(f64) -> f64,
    interval: (f64, f64),
    step: f64,
) -> Result<Vec<f64>, RootError> {
    let brackets = isolate_roots(&g, interval, step)?;
    let mut roots: Vec<f64> = Vec::with_capacity(brackets.len());
    for bracket in &brackets {
        let r = refine_root(&g, bracket);
        if roots.last().map_or(true, |last| r - last > MERGE_DISTANCE) {
            roots.push(r);
        }
    }
    Ok(roots)
}

/// Bounds the number of roots of `g` on `interval` by three when `third`
/// (the third derivative of `g`) is positive on a grid of step `1e-3`, and
/// reports the roots the scan finds. The count is certified when the scan
/// reaches the bound.
pub fn certified_count(
    g: impl Fn(f64) -> f64,
    third: impl Fn(f64) -> f64,
    interval: (f64, f64),
) -> Result<RootCountCertificate, RootError> {
    let step = DEFAULT_SCAN_STEP;
    let (mut min_third, mut at) = (f64::INFINITY, interval.0);
    for x in grid(interval, step)? {
        let value = third(x);
        if !(value >= min_third) {
            min_third = value;
            at = x;
        }
    }
    if !(min_third > 0.0) {
        let sign_changes = isolate_roots(&g, interval, step)?.len();
        return Err(RootError::UncertifiedConvexity {
            min_third,
            at,
            sign_changes,
        });
    }
    let max_roots = 3;
    let found_roots = find_roots(&g, interval, step)?;
    Ok(RootCountCertificate {
        interval,
        max_roots,
        certified: found_roots.len() == max_roots,
        found_roots,
        grid_step: step,
        min_third,
    })
}

/// Condition for the collinear pair `(π, π)` to stay central after one
/// satellite is added in each gap, mirror-symmetrically: with the inner split
/// angle `x`, `h(x) = f(x) + f(2x) - f(π - x)` on `(0, π)`.
pub fn collinear_insertion(x: f64) -> f64 {
    f_value(x) + f_value(2.0 * x) - f_value(PI - x)
}

pub fn collinear_insertion_third(x: f64) -> f64 {
    d3f_value(x) + 8.0 * d3f_value(2.0 * x) + d3f_value(PI - x)
}

/// Isosceles three-satellite condition `f(θ) + f(2θ)` for `(θ, θ, 2π - 2θ)`.
pub fn isosceles(theta: f64) -> f64 {
    f_value(theta) + f_value(2.0 * theta)
}

pub fn isosceles_third(theta: f64) -> f64 {
    d3f_value(theta) + 8.0 * d3f_value(2.0 * theta)
}

/// First square-insertion condition `f(x) - f(π + x)`.
pub fn square_balance(x: f64) -> f64 {
    f_value(x) - f_value(PI + x)
}

/// Second square-insertion condition `3f(x) - f(π/2 - x) - f(π - 2x)`.
pub fn square_defect(x: f64) -> f64 {
    3.0 * f_value(x) - f_value(PI / 2.0 - x) - f_value(PI - 2.0 * x)
}

/// A root of [`square_balance`] together with [`square_defect`] there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareCaseRoot {
    pub x: f64,
    pub defect: f64,
}

/// Every root of the first square condition on `(0, π/3)`, with the value of
/// the second condition at it. The two conditions share a root exactly when
/// some reported defect vanishes.
pub fn square_case_roots() -> Result<Vec<SquareCaseRoot>, RootError> {
    let interval = (1e-3, PI / 3.0 - 1e-3);
    Ok(find_roots(square_balance, interval, DEFAULT_SCAN_STEP)?
        .into_iter()
        .map(|x| SquareCaseRoot {
            x,
            defect: square_defect(x),
        })
        .collect())
}
