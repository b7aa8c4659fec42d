//! Newton refinement and multi-start enumeration of central configurations.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::SolverError;
use crate::kernel::KernelDomain;
use crate::model::{inf_norm, residual, residual_and_jacobian, Configuration, MassVector};

/// Residual inf-norm accepted for a returned solution.
pub const CENTRAL_TOLERANCE: f64 = 1e-10;

/// Supported sizes for enumeration.
pub const MIN_ENUMERATION_SIZE: usize = 2;
pub const MAX_ENUMERATION_SIZE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Target residual inf-norm.
    pub tolerance: f64,
    /// A stalled iteration is still accepted below this residual.
    pub accept: f64,
    pub domain: KernelDomain,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            max_halvings: 30,
            tolerance: 1e-12,
            accept: CENTRAL_TOLERANCE,
            domain: KernelDomain::default(),
        }
    }
}

/// A refined central configuration in canonical position, with the masses
/// relabeled to follow the satellites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralSolution {
    pub config: Configuration,
    pub masses: MassVector,
    pub residual_inf: f64,
    pub class_id: String,
}

impl CentralSolution {
    /// Canonicalizes and re-verifies a configuration against its masses.
    pub fn from_parts(config: &Configuration, masses: &[f64]) -> Result<Self, SolverError> {
        let (config, map) = config.canonical_form();
        let masses = MassVector::new(map.apply_to_masses(masses))?;
        let residual_inf = residual(&config, masses.as_slice())?.inf_norm;
        let class_id = config.class_id();
        Ok(Self {
            config,
            masses,
            residual_inf,
            class_id,
        })
    }
}

pub(crate) fn in_simplex(theta: &[f64], domain: &KernelDomain) -> bool {
    theta.iter().all(|&t| t >= domain.delta_guard() && t.is_finite())
}

pub(crate) fn close_circle(free: &[f64]) -> Vec<f64> {
    let mut theta = free.to_vec();
    theta.push(TAU - free.iter().sum::<f64>());
    theta
}

fn sum_of_squares(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum()
}

/// Minimum-norm least-squares step `J δ = -r`.
pub(crate) fn least_squares_step(jac: &DMatrix<f64>, rows: &[f64]) -> DVector<f64> {
    let rhs = -DVector::from_column_slice(rows);
    let svd = jac.clone().svd(true, true);
    let largest = svd.singular_values.max();
    let eps = (largest * 1e-14).max(f64::MIN_POSITIVE);
    svd.solve(&rhs, eps)
        .unwrap_or_else(|_| DVector::zeros(jac.ncols()))
}

/// Damped Gauss-Newton on an unknown vector. `eval` returns the residual
/// rows and their Jacobian, or `None` where the model is undefined; steps are
/// halved until the sum of squares decreases at a feasible point.
pub(crate) fn gauss_newton(
    start: Vec<f64>,
    eval: impl Fn(&[f64]) -> Option<(Vec<f64>, DMatrix<f64>)>,
    feasible: impl Fn(&[f64]) -> bool,
    options: &NewtonOptions,
) -> Result<(Vec<f64>, f64), SolverError> {
    if !feasible(&start) {
        return Err(SolverError::DomainEscape { iteration: 0 });
    }
    let mut z = start;
    let (mut rows, mut jac) = eval(&z).ok_or(SolverError::DomainEscape { iteration: 0 })?;
    for iteration in 0..options.max_iterations {
        let norm = inf_norm(&rows);
        if norm < options.tolerance {
            return Ok((z, norm));
        }
        let step = least_squares_step(&jac, &rows);
        let merit = sum_of_squares(&rows);
        let mut scale = 1.0;
        let mut escaped = true;
        let mut accepted = None;
        for _ in 0..=options.max_halvings {
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(x, d)| x + scale * d).collect();
            if feasible(&trial) {
                escaped = false;
                if let Some((trial_rows, trial_jac)) = eval(&trial) {
                    if sum_of_squares(&trial_rows) < merit {
                        accepted = Some((trial, trial_rows, trial_jac));
                        break;
                    }
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((t, r, j)) => {
                z = t;
                rows = r;
                jac = j;
            }
            None if norm < options.accept => return Ok((z, norm)),
            None if escaped => return Err(SolverError::DomainEscape { iteration }),
            None => {
                return Err(SolverError::NoConvergence {
                    iterations: iteration,
                    residual: norm,
                })
            }
        }
    }
    let norm = inf_norm(&rows);
    if norm < options.accept {
        Ok((z, norm))
    } else {
        Err(SolverError::NoConvergence {
            iterations: options.max_iterations,
            residual: norm,
        })
    }
}

/// Newton on the free angles of `theta`, the last closing the circle.
/// Returns the full angle list and its residual inf-norm.
pub(crate) fn refine_angles(
    theta: &[f64],
    masses: &[f64],
    options: &NewtonOptions,
) -> Result<(Vec<f64>, f64), SolverError> {
    let n = theta.len();
    let domain = options.domain;
    if !in_simplex(theta, &domain) {
        return Err(SolverError::DomainEscape { iteration: 0 });
    }
    let eval = |free: &[f64]| {
        let (rows, jac) = residual_and_jacobian(&close_circle(free), masses, &domain).ok()?;
        // Eliminate θ_n = 2π - Σ θ_free.
        let reduced = DMatrix::from_fn(n, n - 1, |i, k| jac[(i, k)] - jac[(i, n - 1)]);
        Some((rows, reduced))
    };
    let feasible = |free: &[f64]| in_simplex(&close_circle(free), &domain);
    let (free, norm) = gauss_newton(theta[..n - 1].to_vec(), eval, feasible, options)?;
    Ok((close_circle(&free), norm))
}

pub fn newton_refine(start: &Configuration, masses: &MassVector) -> Result<CentralSolution, SolverError> {
    newton_refine_with(start, masses, &NewtonOptions::default())
}

pub fn newton_refine_with(
    start: &Configuration,
    masses: &MassVector,
    options: &NewtonOptions,
) -> Result<CentralSolution, SolverError> {
    if masses.len() != start.len() {
        return Err(crate::error::ModelError::MassCount {
            expected: start.len(),
            actual: masses.len(),
        }
        .into());
    }
    let (theta, _) = refine_angles(start.angles(), masses.as_slice(), options)?;
    let config = Configuration::new(theta)?;
    let solution = CentralSolution::from_parts(&config, masses.as_slice())?;
    if solution.residual_inf >= options.accept {
        return Err(SolverError::NoConvergence {
            iterations: options.max_iterations,
            residual: solution.residual_inf,
        });
    }
    Ok(solution)
}

pub fn default_grid(n: usize) -> usize {
    match n {
        0..=4 => 60,
        5 => 18,
        _ => 10,
    }
}

/// Compositions of `total` into `parts` positive integers that are smallest
/// among their rotations and reflections.
pub fn canonical_compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if parts == 0 || total < parts {
        return out;
    }
    let mut current = Vec::with_capacity(parts);
    compose(parts, total, &mut current, &mut out);
    out
}

fn compose(parts: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() + 1 == parts {
        current.push(remaining);
        if is_least_in_orbit(current) {
            out.push(current.clone());
        }
        current.pop();
        return;
    }
    let left = parts - current.len() - 1;
    for k in 1..=remaining - left {
        current.push(k);
        compose(parts, remaining - k, current, out);
        current.pop();
    }
}

fn is_least_in_orbit(k: &[usize]) -> bool {
    let n = k.len();
    (0..n).all(|s| {
        let rotated = (0..n).map(|i| k[(s + i) % n]);
        let reflected = (0..n).map(|i| k[n - 1 - (s + i) % n]);
        k.iter().copied().le(rotated) && k.iter().copied().le(reflected)
    })
}

/// Multi-start refinement with equal masses from every grid point of the
/// simplex, up to symmetry. Heuristic-complete.
pub fn enumerate_equal_mass(n: usize, grid_per_dim: usize) -> Result<Vec<CentralSolution>, SolverError> {
    enumerate_with(n, grid_per_dim, &MassVector::equal(n), &NewtonOptions::default())
}

pub fn enumerate_with(
    n: usize,
    grid_per_dim: usize,
    masses: &MassVector,
    options: &NewtonOptions,
) -> Result<Vec<CentralSolution>, SolverError> {
    if !(MIN_ENUMERATION_SIZE..=MAX_ENUMERATION_SIZE).contains(&n) {
        return Err(SolverError::UnsupportedSize(n));
    }
    let grid = grid_per_dim.max(n);
    let starts = canonical_compositions(n, grid);
    let step = TAU / grid as f64;
    let found: Vec<Option<CentralSolution>> = starts
        .par_iter()
        .map(|k| {
            let free: Vec<f64> = k[..n - 1].iter().map(|&c| c as f64 * step).collect();
            let start = Configuration::from_free_angles(&free).ok()?;
            newton_refine_with(&start, masses, options).ok()
        })
        .collect();
    Ok(dedupe_classes(found.into_iter().flatten()))
}

/// Keeps the best-residual member of each class, sorted by class id.
pub fn dedupe_classes(solutions: impl IntoIterator<Item = CentralSolution>) -> Vec<CentralSolution> {
    let mut classes: Vec<CentralSolution> = Vec::new();
    for solution in solutions {
        match classes
            .iter_mut()
            .find(|c| c.config.same_class(&solution.config))
        {
            Some(existing) => {
                if solution.residual_inf < existing.residual_inf {
                    *existing = solution;
                }
            }
            None => classes.push(solution),
        }
    }
    classes.sort_by(|a, b| a.class_id.cmp(&b.class_id));
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::f_value;
    use crate::roots::find_roots;
    use std::f64::consts::PI;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn equilateral_basin() {
        let start = Configuration::from_free_angles(&[2.09, 2.09]).unwrap();
        let s = newton_refine(&start, &MassVector::equal(3)).unwrap();
        assert!(close(s.config.angles(), &[TAU / 3.0; 3], 1e-10));
        assert!(s.residual_inf < CENTRAL_TOLERANCE);
    }

    #[test]
    fn kite_basin() {
        let start = Configuration::from_free_angles(&[1.0, 1.1, 2.1]).unwrap();
        let s = newton_refine(&start, &MassVector::equal(4)).unwrap();
        let kite = Configuration::new(vec![PI / 3.0, PI / 3.0, 2.0 * PI / 3.0, 2.0 * PI / 3.0]).unwrap();
        assert!(s.config.same_class(&kite), "{:?}", s.config);
        assert!(s.config.is_canonical());
    }

    #[test]
    fn collision_start_is_rejected() {
        let start = Configuration::from_free_angles(&[1e-12, 3.0]).unwrap();
        assert_eq!(
            newton_refine(&start, &MassVector::equal(3)),
            Err(SolverError::DomainEscape { iteration: 0 })
        );
    }

    #[test]
    fn unequal_masses_follow_canonical_relabeling() {
        let mu = MassVector::new(vec![1.0, 1.05, 0.95]).unwrap();
        let start = Configuration::from_free_angles(&[2.15, 2.05]).unwrap();
        let s = newton_refine(&start, &mu).unwrap();
        assert!(residual(&s.config, s.masses.as_slice()).unwrap().inf_norm < CENTRAL_TOLERANCE);
    }

    #[test]
    fn compositions_cover_orbits() {
        // Orbits of compositions of 6 into 3 parts: (1,1,4), (1,2,3), (2,2,2).
        assert_eq!(
            canonical_compositions(3, 6),
            vec![vec![1, 1, 4], vec![1, 2, 3], vec![2, 2, 2]]
        );
        assert_eq!(canonical_compositions(2, 5), vec![vec![1, 4], vec![2, 3]]);
    }

    #[test]
    fn rejects_unsupported_sizes() {
        assert_eq!(enumerate_equal_mass(7, 10), Err(SolverError::UnsupportedSize(7)));
        assert_eq!(enumerate_equal_mass(1, 10), Err(SolverError::UnsupportedSize(1)));
    }

    /// Independent oracle: for n = 2 every class is a pair of kernel roots
    /// summing to 2π; for n = 3 a fine scan of the symmetric ansatz.
    fn oracle_classes(n: usize) -> Vec<Configuration> {
        match n {
            2 => {
                let roots = find_roots(f_value, (0.05, TAU - 0.05), 1e-5).unwrap();
                roots
                    .iter()
                    .map(|&r| Configuration::new(vec![r, TAU - r]).unwrap().canonicalize())
                    .fold(Vec::new(), |mut acc: Vec<Configuration>, c| {
                        if !acc.iter().any(|a| a.same_class(&c)) {
                            acc.push(c);
                        }
                        acc
                    })
            }
            3 => {
                let g = |t: f64| f_value(t) + f_value(2.0 * t);
                find_roots(g, (0.05, PI - 0.05), 1e-5)
                    .unwrap()
                    .into_iter()
                    .map(|t| Configuration::new(vec![t, t, TAU - 2.0 * t]).unwrap())
                    .collect()
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn enumeration_matches_oracle_for_small_n() {
        for n in [2, 3] {
            let found = enumerate_equal_mass(n, default_grid(n)).unwrap();
            let oracle = oracle_classes(n);
            assert_eq!(found.len(), oracle.len(), "n={n}: {found:?}");
            for o in &oracle {
                assert!(found.iter().any(|s| s.config.same_class(o)), "n={n} missing {o:?}");
            }
        }
    }

    #[test]
    fn n3_classes_fall_in_expected_windows() {
        let found = enumerate_equal_mass(3, 60).unwrap();
        assert_eq!(found.len(), 3);
        let mut pairs: Vec<f64> = found
            .iter()
            .filter_map(|s| {
                let t = s.config.angles();
                (0..3).find_map(|i| {
                    ((t[i] - t[(i + 1) % 3]).abs() < 1e-8).then_some(t[i])
                })
            })
            .collect();
        pairs.sort_by(f64::total_cmp);
        assert_eq!(pairs.len(), 3);
        assert!(pairs[0] > PI / 4.0 && pairs[0] < 5.0 * PI / 18.0);
        assert!((pairs[1] - TAU / 3.0).abs() < 1e-10);
        assert!(pairs[2] > 23.0 * PI / 30.0 && pairs[2] < 139.0 * PI / 180.0);
    }

    #[test]
    fn results_are_sorted_and_canonical() {
        let found = enumerate_equal_mass(4, 24).unwrap();
        for w in found.windows(2) {
            assert!(w[0].class_id < w[1].class_id);
        }
        for s in &found {
            assert!(s.config.is_canonical());
            assert!(s.residual_inf < CENTRAL_TOLERANCE);
            assert_eq!(s.class_id, s.config.class_id());
        }
    }
}
