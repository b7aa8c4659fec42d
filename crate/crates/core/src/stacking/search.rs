//! Grid screening and joint refinement of stacked configurations.
//!
//! Added satellites share one mass, fixed at 1; base masses are scaled
//! relative to it. Each mode fixes a different set of unknowns:
//!
//! - equal: base angles fixed at an enumerated class, every mass 1;
//!   unknowns are the fractions.
//! - fixed base: base angles and mass ratios fixed, one free scale on the
//!   base masses.
//! - solved: base angles, fractions and base masses all free; the joint
//!   system holds both the base rows and the extended rows.

use std::collections::HashMap;
use std::fmt;
use std::f64::consts::TAU;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gap_separation, InsertionSpec, Layout, Role, Scenario, StackedPair};
use crate::error::StackingError;
use crate::kernel::KernelDomain;
use crate::masses::{null_space_of, positive_vector_in, DEFAULT_SAMPLES, POSITIVITY_FLOOR};
use crate::model::{residual_and_jacobian, system_matrix_of_angles, Configuration, MassVector};
use crate::solver::{
    close_circle, default_grid, enumerate_equal_mass, gauss_newton, in_simplex,
    newton_refine, CentralSolution, NewtonOptions, MAX_ENUMERATION_SIZE, MIN_ENUMERATION_SIZE,
};

/// Refined residual under which a candidate counts as a stacked pair.
pub const STACK_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassMode {
    Equal,
    Solved,
}

impl MassMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MassMode::Equal => "equal",
            MassMode::Solved => "solved",
        }
    }
}

impl fmt::Display for MassMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MassMode {
    type Err = StackingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equal" => Ok(MassMode::Equal),
            "solved" => Ok(MassMode::Solved),
            other => Err(StackingError::InvalidSpec(format!("unknown mass mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Fractions are scanned at multiples of `1 / fraction_steps`.
    pub fraction_steps: usize,
    /// Grid for the equal-mass base enumeration; `None` uses the solver default.
    pub enumeration_grid: Option<usize>,
    /// Base-angle grid in solved mode; `None` picks by size.
    pub base_grid: Option<usize>,
    /// Screened local minima above this merit are skipped.
    pub screen_threshold: f64,
    pub tolerance: f64,
    pub newton: NewtonOptions,
    pub seed: u64,
    pub samples: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            fraction_steps: 200,
            enumeration_grid: None,
            base_grid: None,
            screen_threshold: 0.5,
            tolerance: STACK_TOLERANCE,
            newton: NewtonOptions {
                accept: STACK_TOLERANCE,
                ..NewtonOptions::default()
            },
            seed: 0,
            samples: DEFAULT_SAMPLES,
        }
    }
}

/// Base-angle grid for the solved mode, sized to keep the screen near a
/// million points.
pub fn default_base_grid(n: usize, added: usize) -> usize {
    match (added, n) {
        (1, 0..=3) => 60,
        (1, 4) => 30,
        (1, 5) => 12,
        (1, _) => 8,
        (_, 0..=2) => 30,
        (_, 3) => 10,
        (_, 4) => 6,
        _ => 5,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SearchReport {
    pub pairs: Vec<StackedPair>,
    pub grid_points: usize,
    pub candidates: usize,
    pub converged: usize,
    /// Converged below the detection tolerance but without admissible masses.
    pub rejected_masses: usize,
    /// Detected but failing the independent re-verification.
    pub near_misses: usize,
}

impl SearchReport {
    fn absorb(&mut self, other: SearchReport) {
        self.pairs.extend(other.pairs);
        self.grid_points += other.grid_points;
        self.candidates += other.candidates;
        self.converged += other.converged;
        self.rejected_masses += other.rejected_masses;
        self.near_misses += other.near_misses;
    }

    fn finish(mut self) -> Self {
        let mut kept: Vec<StackedPair> = Vec::new();
        for p in self.pairs {
            let dup = kept.iter().any(|q| {
                q.scenario == p.scenario
                    && q.base.config.same_class(&p.base.config)
                    && q.extended.config.same_class(&p.extended.config)
            });
            if !dup {
                kept.push(p);
            }
        }
        kept.sort_by(|a, b| {
            (a.scenario, &a.base.class_id, &a.extended.class_id).cmp(&(b.scenario, &b.base.class_id, &b.extended.class_id))
        });
        self.pairs = kept;
        self
    }
}

#[derive(Debug, Clone)]
enum Base {
    /// Angles and masses fixed.
    Fixed { theta: Vec<f64>, mu: Vec<f64> },
    /// Angles and mass ratios fixed, overall scale free.
    Scaled { theta: Vec<f64>, mu: Vec<f64> },
    /// Angles and masses free.
    Free,
}

struct Joint {
    n: usize,
    k: usize,
    layout: Layout,
    base: Base,
    /// Extended position of each base satellite and of each added one.
    base_pos: Vec<usize>,
    added_pos: Vec<usize>,
    domain: KernelDomain,
}

struct Point {
    theta: Vec<f64>,
    t: Vec<f64>,
    mu: Vec<f64>,
}

impl Joint {
    fn new(n: usize, gaps: &[usize], base: Base, domain: KernelDomain) -> Self {
        let layout = Layout::new(n, gaps);
        let k = gaps.len();
        let mut base_pos = vec![0; n];
        let mut added_pos = vec![0; k];
        for (j, role) in layout.roles.iter().enumerate() {
            match *role {
                Role::Base(i) => base_pos[i] = j,
                Role::Added(i) => added_pos[i] = j,
            }
        }
        Self {
            n,
            k,
            layout,
            base,
            base_pos,
            added_pos,
            domain,
        }
    }

    fn free_angles(&self) -> usize {
        match self.base {
            Base::Free => self.n - 1,
            _ => 0,
        }
    }

    fn mass_unknowns(&self) -> usize {
        match self.base {
            Base::Fixed { .. } => 0,
            Base::Scaled { .. } => 1,
            Base::Free => self.n,
        }
    }

    fn unpack(&self, z: &[f64]) -> Point {
        let a = self.free_angles();
        let t = z[a..a + self.k].to_vec();
        let masses = &z[a + self.k..];
        match &self.base {
            Base::Fixed { theta, mu } => Point {
                theta: theta.clone(),
                t,
                mu: mu.clone(),
            },
            Base::Scaled { theta, mu } => Point {
                theta: theta.clone(),
                t,
                mu: mu.iter().map(|m| m * masses[0]).collect(),
            },
            Base::Free => Point {
                theta: close_circle(&z[..a]),
                t,
                mu: masses.to_vec(),
            },
        }
    }

    fn pack(&self, theta: &[f64], t: &[f64], masses: &[f64]) -> Vec<f64> {
        let mut z = theta[..self.free_angles()].to_vec();
        z.extend_from_slice(t);
        z.extend_from_slice(masses);
        z
    }

    fn feasible(&self, z: &[f64]) -> bool {
        let p = self.unpack(z);
        in_simplex(&p.theta, &self.domain) && in_simplex(&self.layout.angles(&p.theta, &p.t), &self.domain)
    }

    /// Rows `R0 + M m` with `m` the mass unknowns, extended rows only when
    /// the base is fixed (its own rows do not move).
    fn affine(&self, theta: &[f64], t: &[f64], with_base: bool) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let (n, k) = (self.n, self.k);
        let phi = self.layout.angles(theta, t);
        let ae = system_matrix_of_angles(&phi, &self.domain).ok()?;
        let ab = if with_base {
            Some(system_matrix_of_angles(theta, &self.domain).ok()?)
        } else {
            None
        };
        let offset = if with_base { n } else { 0 };
        let rows = offset + n + k;
        let mut r0 = DVector::zeros(rows);
        for j in 0..n + k {
            r0[offset + j] = self.added_pos.iter().map(|&p| ae[(j, p)]).sum();
        }
        let base_mu = |i: usize| match &self.base {
            Base::Fixed { mu, .. } | Base::Scaled { mu, .. } => mu[i],
            Base::Free => 1.0,
        };
        let m = match self.base {
            Base::Fixed { .. } => {
                for j in 0..n + k {
                    r0[offset + j] += (0..n).map(|i| ae[(j, self.base_pos[i])] * base_mu(i)).sum::<f64>();
                }
                if let Some(ab) = &ab {
                    for r in 0..n {
                        r0[r] = (0..n).map(|i| ab[(r, i)] * base_mu(i)).sum();
                    }
                }
                DMatrix::zeros(rows, 0)
            }
            Base::Scaled { .. } => DMatrix::from_fn(rows, 1, |r, _| {
                if r < offset {
                    let ab = ab.as_ref().expect("base rows requested");
                    (0..n).map(|i| ab[(r, i)] * base_mu(i)).sum()
                } else {
                    (0..n).map(|i| ae[(r - offset, self.base_pos[i])] * base_mu(i)).sum()
                }
            }),
            Base::Free => DMatrix::from_fn(rows, n, |r, i| {
                if r < offset {
                    ab.as_ref().expect("base rows requested")[(r, i)]
                } else {
                    ae[(r - offset, self.base_pos[i])]
                }
            }),
        };
        Some((r0, m))
    }

    /// Least-squares masses and the scaled leftover residual.
    fn merit(&self, theta: &[f64], t: &[f64]) -> (f64, Vec<f64>) {
        let with_base = matches!(self.base, Base::Free);
        let Some((r0, m)) = self.affine(theta, t, with_base) else {
            return (f64::INFINITY, Vec::new());
        };
        let scale = 1.0 + r0.norm();
        if m.ncols() == 0 {
            return (r0.norm() / scale, Vec::new());
        }
        let rhs = -m.transpose() * &r0;
        let gram = m.transpose() * &m;
        let x = match gram.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => crate::solver::least_squares_step(&m, r0.as_slice()),
        };
        let left = &r0 + &m * &x;
        let value = left.norm() / scale;
        (if value.is_finite() { value } else { f64::INFINITY }, x.iter().copied().collect())
    }

    fn eval(&self, z: &[f64]) -> Option<(Vec<f64>, DMatrix<f64>)> {
        let (n, k) = (self.n, self.k);
        let p = self.unpack(z);
        let phi = self.layout.angles(&p.theta, &p.t);
        let added = vec![1.0; k];
        let mu_e = self.layout.masses(&p.mu, &added);
        let (rb, jb) = residual_and_jacobian(&p.theta, &p.mu, &self.domain).ok()?;
        let (re, je) = residual_and_jacobian(&phi, &mu_e, &self.domain).ok()?;
        let rows: Vec<f64> = rb.into_iter().chain(re).collect();
        let a = self.free_angles();
        let cols = a + k + self.mass_unknowns();
        let mut jac = DMatrix::zeros(2 * n + k, cols);
        // dφ_j/dθ_g = w_j when part j belongs to gap g.
        for c in 0..a {
            for r in 0..n {
                jac[(r, c)] = jb[(r, c)] - jb[(r, n - 1)];
            }
            for (j, part) in self.layout.parts.iter().enumerate() {
                let w = part.constant + part.coeffs.iter().zip(&p.t).map(|(x, y)| x * y).sum::<f64>();
                let sign = if part.gap == c {
                    1.0
                } else if part.gap == n - 1 {
                    -1.0
                } else {
                    continue;
                };
                for r in 0..n + k {
                    jac[(n + r, c)] += sign * w * je[(r, j)];
                }
            }
        }
        for q in 0..k {
            for (j, part) in self.layout.parts.iter().enumerate() {
                let d = p.theta[part.gap] * part.coeffs[q];
                if d != 0.0 {
                    for r in 0..n + k {
                        jac[(n + r, a + q)] += d * je[(r, j)];
                    }
                }
            }
        }
        match &self.base {
            Base::Fixed { .. } => {}
            Base::Scaled { mu, .. } => {
                let ab = system_matrix_of_angles(&p.theta, &self.domain).ok()?;
                let ae = system_matrix_of_angles(&phi, &self.domain).ok()?;
                for r in 0..n {
                    jac[(r, a + k)] = (0..n).map(|i| ab[(r, i)] * mu[i]).sum();
                }
                for r in 0..n + k {
                    jac[(n + r, a + k)] = (0..n).map(|i| ae[(r, self.base_pos[i])] * mu[i]).sum();
                }
            }
            Base::Free => {
                let ab = system_matrix_of_angles(&p.theta, &self.domain).ok()?;
                let ae = system_matrix_of_angles(&phi, &self.domain).ok()?;
                for i in 0..n {
                    for r in 0..n {
                        jac[(r, a + k + i)] = ab[(r, i)];
                    }
                    for r in 0..n + k {
                        jac[(n + r, a + k + i)] = ae[(r, self.base_pos[i])];
                    }
                }
            }
        }
        Some((rows, jac))
    }

    /// Base and added masses (on one scale) if the converged point admits
    /// positive ones.
    fn admissible_masses(&self, p: &Point, options: &SearchOptions) -> Option<(Vec<f64>, Vec<f64>)> {
        let (n, k) = (self.n, self.k);
        match self.base {
            Base::Fixed { .. } => Some((p.mu.clone(), vec![1.0; k])),
            Base::Scaled { .. } => {
                let total: f64 = p.mu.iter().sum::<f64>() + k as f64;
                let floor = POSITIVITY_FLOOR * total / (n + k) as f64;
                p.mu.iter().all(|&m| m > floor).then(|| (p.mu.clone(), vec![1.0; k]))
            }
            Base::Free => {
                // All masses free, added satellites sharing one column.
                let phi = self.layout.angles(&p.theta, &p.t);
                let ab = system_matrix_of_angles(&p.theta, &self.domain).ok()?;
                let ae = system_matrix_of_angles(&phi, &self.domain).ok()?;
                let joint = DMatrix::from_fn(2 * n + k, n + 1, |r, c| match (r < n, c < n) {
                    (true, true) => ab[(r, c)],
                    (true, false) => 0.0,
                    (false, true) => ae[(r - n, self.base_pos[c])],
                    (false, false) => self.added_pos.iter().map(|&q| ae[(r - n, q)]).sum(),
                });
                let basis = null_space_of(&joint);
                let (v, _) = positive_vector_in(&basis, options.seed, options.samples);
                let v = v?;
                Some((v[..n].to_vec(), vec![v[n]; k]))
            }
        }
    }
}

/// Integer grid points with their neighbor lists.
struct Grid<T> {
    points: Vec<T>,
    neighbors: Vec<Vec<usize>>,
}

fn lattice_grid(points: Vec<Vec<usize>>, steps: &[Vec<isize>]) -> Grid<Vec<usize>> {
    let index: HashMap<Vec<usize>, usize> = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let neighbors = points
        .iter()
        .map(|p| {
            steps
                .iter()
                .filter_map(|d| {
                    let q: Option<Vec<usize>> = p
                        .iter()
                        .zip(d)
                        .map(|(&x, &dx)| usize::try_from(x as isize + dx).ok())
                        .collect();
                    q.and_then(|q| index.get(&q).copied())
                })
                .collect()
        })
        .collect();
    Grid { points, neighbors }
}

/// Moves of one unit between two parts of a composition.
fn composition_steps(parts: usize) -> Vec<Vec<isize>> {
    let mut out = Vec::new();
    for i in 0..parts {
        for j in 0..parts {
            if i != j {
                let mut d = vec![0; parts];
                d[i] = 1;
                d[j] = -1;
                out.push(d);
            }
        }
    }
    out
}

/// All nonzero moves in `{-1, 0, 1}^dim`.
fn box_steps(dim: usize) -> Vec<Vec<isize>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v: Vec<isize>| {
                [-1, 0, 1].into_iter().map(move |d| {
                    let mut w = v.clone();
                    w.push(d);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&d| d != 0));
    out
}

fn fraction_grid(same_gap: bool, k: usize, steps: usize) -> Grid<Vec<usize>> {
    let points: Vec<Vec<usize>> = match (k, same_gap) {
        (1, _) => (1..steps).map(|i| vec![i]).collect(),
        (_, false) => (1..steps).flat_map(|i| (1..steps).map(move |j| vec![i, j])).collect(),
        (_, true) => (1..steps)
            .flat_map(|i| (1..steps - i).map(move |j| vec![i, j]))
            .collect(),
    };
    lattice_grid(points, &box_steps(k))
}

fn all_compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    fn go(parts: usize, remaining: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == parts {
            cur.push(remaining);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        let left = parts - cur.len() - 1;
        for k in 1..=remaining - left {
            cur.push(k);
            go(parts, remaining - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if total >= parts && parts > 0 {
        go(parts, total, &mut Vec::new(), &mut out);
    }
    out
}

/// Gap choices to scan. With a free base, rotations make it enough to put
/// one insertion in the last gap.
fn gap_choices(n: usize, scenario: Scenario, free_base: bool) -> Vec<Vec<usize>> {
    let last = n - 1;
    let all: Vec<Vec<usize>> = match scenario {
        Scenario::OneAddition => (0..n).map(|g| vec![g]).collect(),
        Scenario::TwoSameGap => (0..n).map(|g| vec![g, g]).collect(),
        Scenario::TwoSeparatedByOne | Scenario::TwoDistant => {
            let want_one = scenario == Scenario::TwoSeparatedByOne;
            let mut v = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if (gap_separation(a, b, n) == 1) == want_one {
                        v.push(vec![a, b]);
                    }
                }
            }
            v
        }
    };
    if free_base {
        all.into_iter().filter(|g| g.contains(&last)).take(match scenario {
            Scenario::TwoDistant => usize::MAX,
            _ => 1,
        })
        .collect()
    } else {
        all
    }
}

/// Screens one gap choice over the given base grid and refines the local minima.
fn scan(
    n: usize,
    gaps: &[usize],
    bases: &Grid<Vec<f64>>,
    base_of: impl Fn(&[f64]) -> Base + Sync,
    options: &SearchOptions,
) -> Result<SearchReport, StackingError> {
    let k = gaps.len();
    let same_gap = k == 2 && gaps[0] == gaps[1];
    let fractions = fraction_grid(same_gap, k, options.fraction_steps);
    let steps = options.fraction_steps as f64;
    let t_of = |f: usize| -> Vec<f64> { fractions.points[f].iter().map(|&i| i as f64 / steps).collect() };
    let nf = fractions.points.len();
    let merits: Vec<Vec<(f64, Vec<f64>)>> = bases
        .points
        .par_iter()
        .map(|theta| {
            let joint = Joint::new(n, gaps, base_of(theta), options.newton.domain);
            (0..nf).map(|f| joint.merit(theta, &t_of(f))).collect()
        })
        .collect();
    let mut candidates = Vec::new();
    for (b, row) in merits.iter().enumerate() {
        for (f, (value, _)) in row.iter().enumerate() {
            if !(*value < options.screen_threshold) {
                continue;
            }
            let lower_fraction = fractions.neighbors[f].iter().any(|&g| row[g].0 < *value);
            let lower_base = bases.neighbors[b].iter().any(|&c| merits[c][f].0 < *value);
            if !lower_fraction && !lower_base {
                candidates.push((b, f));
            }
        }
    }
    let outcomes: Vec<Outcome> = candidates
        .par_iter()
        .map(|&(b, f)| {
            let theta = &bases.points[b];
            let joint = Joint::new(n, gaps, base_of(theta), options.newton.domain);
            refine(&joint, theta, &t_of(f), &merits[b][f].1, gaps, options)
        })
        .collect();
    let mut report = SearchReport {
        grid_points: bases.points.len() * nf,
        candidates: candidates.len(),
        ..SearchReport::default()
    };
    for outcome in outcomes {
        match outcome {
            Outcome::Failed => {}
            Outcome::NoMasses => {
                report.converged += 1;
                report.rejected_masses += 1;
            }
            Outcome::NearMiss => {
                report.converged += 1;
                report.near_misses += 1;
            }
            Outcome::Pair(p) => {
                report.converged += 1;
                report.pairs.push(*p);
            }
        }
    }
    Ok(report)
}

enum Outcome {
    Failed,
    NoMasses,
    NearMiss,
    Pair(Box<StackedPair>),
}

fn refine(joint: &Joint, theta: &[f64], t: &[f64], masses: &[f64], gaps: &[usize], options: &SearchOptions) -> Outcome {
    let start = joint.pack(theta, t, masses);
    let Ok((z, norm)) = gauss_newton(start, |z| joint.eval(z), |z| joint.feasible(z), &options.newton) else {
        return Outcome::Failed;
    };
    if norm >= options.tolerance {
        return Outcome::Failed;
    }
    let p = joint.unpack(&z);
    if p.t.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return Outcome::Failed;
    }
    let Some((base_mu, added_mu)) = joint.admissible_masses(&p, options) else {
        return Outcome::NoMasses;
    };
    let Ok(spec) = InsertionSpec::new(gaps.to_vec(), p.t.clone()) else {
        return Outcome::Failed;
    };
    // `new` may sort the gaps; keep the fractions attached to their gaps.
    let Ok(pair) = StackedPair::assemble(&p.theta, &base_mu, &spec, &added_mu) else {
        return Outcome::NoMasses;
    };
    match pair.verify() {
        Ok(v) if v.stacked => Outcome::Pair(Box::new(pair)),
        _ => Outcome::NearMiss,
    }
}

fn single_base(theta: &[f64]) -> Grid<Vec<f64>> {
    Grid {
        points: vec![theta.to_vec()],
        neighbors: vec![Vec::new()],
    }
}

fn check_size(n: usize) -> Result<(), StackingError> {
    if !(MIN_ENUMERATION_SIZE..=MAX_ENUMERATION_SIZE).contains(&n) {
        return Err(StackingError::UnsupportedSize(n));
    }
    Ok(())
}

pub fn search_stacked(n: usize, scenario: Scenario, mode: MassMode) -> Result<Vec<StackedPair>, StackingError> {
    Ok(search_stacked_with(n, scenario, mode, &SearchOptions::default())?.pairs)
}

/// Exhaustive desk-scale search for stacked pairs over `n`-satellite bases:
/// screen every insertion on the fraction grid, refine local minima of the
/// merit, keep refined points with admissible positive masses.
pub fn search_stacked_with(
    n: usize,
    scenario: Scenario,
    mode: MassMode,
    options: &SearchOptions,
) -> Result<SearchReport, StackingError> {
    check_size(n)?;
    let mut report = SearchReport::default();
    match mode {
        MassMode::Equal => {
            let grid = options.enumeration_grid.unwrap_or_else(|| default_grid(n));
            let bases = enumerate_equal_mass(n, grid).map_err(|e| StackingError::InvalidSpec(e.to_string()))?;
            for base in &bases {
                let theta = base.config.angles().to_vec();
                let mu = base.masses.as_slice().to_vec();
                for gaps in gap_choices(n, scenario, false) {
                    let grid = single_base(&theta);
                    let base_of = |th: &[f64]| Base::Fixed {
                        theta: th.to_vec(),
                        mu: mu.clone(),
                    };
                    report.absorb(scan(n, &gaps, &grid, base_of, options)?);
                }
            }
        }
        MassMode::Solved => {
            let g = options.base_grid.unwrap_or_else(|| default_base_grid(n, scenario.added()));
            let step = TAU / g as f64;
            let comps = all_compositions(n, g);
            let lattice = lattice_grid(comps, &composition_steps(n));
            let grid = Grid {
                points: lattice
                    .points
                    .iter()
                    .map(|c| c.iter().map(|&x| x as f64 * step).collect())
                    .collect(),
                neighbors: lattice.neighbors,
            };
            for gaps in gap_choices(n, scenario, true) {
                report.absorb(scan(n, &gaps, &grid, |_| Base::Free, options)?);
            }
        }
    }
    Ok(report.finish())
}

/// Search with the base held at `base`, its mass ratios fixed, and the added
/// satellites sharing one free mass.
pub fn search_fixed_base(
    base: &CentralSolution,
    scenario: Scenario,
    options: &SearchOptions,
) -> Result<SearchReport, StackingError> {
    let n = base.config.len();
    check_size(n)?;
    let theta = base.config.angles().to_vec();
    let mu = base.masses.as_slice().to_vec();
    let mut report = SearchReport::default();
    for gaps in gap_choices(n, scenario, false) {
        let grid = single_base(&theta);
        let base_of = |th: &[f64]| Base::Scaled {
            theta: th.to_vec(),
            mu: mu.clone(),
        };
        report.absorb(scan(n, &gaps, &grid, base_of, options)?);
    }
    Ok(report.finish())
}

/// Central configurations for random positive masses, one per mass draw.
pub fn random_mass_bases(n: usize, count: usize, seed: u64) -> Result<Vec<CentralSolution>, StackingError> {
    check_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        draws += 1;
        if draws > 100 * count.max(1) {
            return Err(StackingError::InvalidSpec(format!(
                "no central configuration found for random masses with n = {n}"
            )));
        }
        let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let masses = MassVector::new(mu)?;
        for _ in 0..200 {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let free: Vec<f64> = raw[..n - 1].iter().map(|x| x * TAU / total).collect();
            let Ok(start) = Configuration::from_free_angles(&free) else {
                continue;
            };
            if let Ok(solution) = newton_refine(&start, &masses) {
                out.push(solution);
                break;
            }
        }
    }
    Ok(out)
}

/// Two added satellites of one common mass on random-mass bases, every
/// two-insertion scenario.
pub fn theorem_two_spot_check(
    n: usize,
    bases: usize,
    options: &SearchOptions,
) -> Result<SearchReport, StackingError> {
    let mut report = SearchReport::default();
    for base in random_mass_bases(n, bases, options.seed)? {
        for scenario in [Scenario::TwoSameGap, Scenario::TwoSeparatedByOne, Scenario::TwoDistant] {
            report.absorb(search_fixed_base(&base, scenario, options)?);
        }
    }
    Ok(report.finish())
}
