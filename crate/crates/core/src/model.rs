//! Gap-angle configurations, satellite masses and the central-configuration
//! residual.
//!
//! Satellite `i` sits at the start of gap `i`; gap `i` spans the arc to
//! satellite `i + 1` (indices cyclic). Row `i` of the residual is
//!
//! ```text
//! r_i = Σ_{m=1}^{n-1} μ_{i+m} f(θ_i + θ_{i+1} + … + θ_{i+m-1})
//! ```
//!
//! and the configuration is central for `μ` when every row vanishes. The rows
//! are linear in `μ`, giving the matrix form `r = A(θ) μ`. Because
//! `f(2π - s) = -f(s)`, `A(θ)` is antisymmetric.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::kernel::{df_value, f_value, KernelDomain};

/// Tolerance on `Σ θ_i = 2π`.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Resolution at which canonical angles are rounded for class labels.
pub const CLASS_RESOLUTION: f64 = 1e-7;

/// Inf-norm distance under which two canonical configurations are the same class.
pub const CLASS_TOLERANCE: f64 = 1e-6;

/// Gap angles of `n >= 2` satellites on the unit circle, a point of the simplex
/// `{θ_i > 0, Σ θ_i = 2π}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Configuration {
    theta: Vec<f64>,
}

impl Configuration {
    pub fn new(theta: Vec<f64>) -> Result<Self, ModelError> {
        if theta.len() < 2 {
            return Err(ModelError::TooFewAngles(theta.len()));
        }
        for (index, &value) in theta.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::NonPositiveAngle { index, value });
            }
        }
        let sum: f64 = theta.iter().sum();
        if (sum - TAU).abs() > SUM_TOLERANCE {
            return Err(ModelError::SumNotTwoPi(sum));
        }
        Ok(Self { theta })
    }

    /// Builds a configuration from its first `n - 1` angles; the last closes the circle.
    pub fn from_free_angles(free: &[f64]) -> Result<Self, ModelError> {
        let mut theta = free.to_vec();
        theta.push(TAU - free.iter().sum::<f64>());
        Self::new(theta)
    }

    /// The regular n-gon, all gaps `2π/n`.
    pub fn regular(n: usize) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::TooFewAngles(n));
        }
        Self::new(vec![TAU / n as f64; n])
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn into_angles(self) -> Vec<f64> {
        self.theta
    }

    /// Smallest angle list, in tolerant lexicographic order, over the rotations
    /// and reflections of the configuration.
    pub fn canonicalize(&self) -> Configuration {
        self.canonical_form().0
    }

    /// The canonical configuration and the rotation/reflection that produces it.
    pub fn canonical_form(&self) -> (Configuration, DihedralMap) {
        let n = self.theta.len();
        let mut best: Option<(Vec<f64>, DihedralMap)> = None;
        for reflected in [false, true] {
            for shift in 0..n {
                let map = DihedralMap { reflected, shift };
                let candidate = map.apply_to_angles(&self.theta);
                let better = match &best {
                    None => true,
                    Some((current, _)) => canonical_order(&candidate, current) == Ordering::Less,
                };
                if better {
                    best = Some((candidate, map));
                }
            }
        }
        let (theta, map) = best.expect("n >= 2");
        (Configuration { theta }, map)
    }

    pub fn is_canonical(&self) -> bool {
        self.canonicalize().theta == self.theta
    }

    /// Stable label of the rotation/reflection class.
    pub fn class_id(&self) -> String {
        let canonical = self.canonicalize();
        // FNV-1a over the rounded angles.
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for value in canonical.theta {
            let rounded = (value / CLASS_RESOLUTION).round() as i64;
            for byte in rounded.to_le_bytes() {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        format!("{:016x}", hash)
    }

    /// Inf-norm distance between the canonical forms, `∞` for different `n`.
    pub fn class_distance(&self, other: &Configuration) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        let (a, b) = (self.canonicalize(), other.canonicalize());
        a.theta
            .iter()
            .zip(&b.theta)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn same_class(&self, other: &Configuration) -> bool {
        self.class_distance(other) < CLASS_TOLERANCE
    }
}

/// A relabeling of the satellites by a rotation, optionally preceded by a
/// reflection of the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DihedralMap {
    pub reflected: bool,
    pub shift: usize,
}

impl DihedralMap {
    pub fn apply_to_angles(&self, theta: &[f64]) -> Vec<f64> {
        let n = theta.len();
        (0..n)
            .map(|k| {
                let j = (self.shift + k) % n;
                if self.reflected {
                    theta[n - 1 - j]
                } else {
                    theta[j]
                }
            })
            .collect()
    }

    /// Satellite `k` starts gap `k`; reversing the gaps sends satellite `k` to `n - k`.
    pub fn apply_to_masses(&self, mu: &[f64]) -> Vec<f64> {
        let n = mu.len();
        (0..n)
            .map(|k| {
                let j = (self.shift + k) % n;
                if self.reflected {
                    mu[(n - j) % n]
                } else {
                    mu[j]
                }
            })
            .collect()
    }
}

/// Lexicographic order where entries closer than [`CLASS_RESOLUTION`] tie;
/// complete ties fall back to exact comparison.
fn canonical_order(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > CLASS_RESOLUTION {
            return x.total_cmp(y);
        }
    }
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Validates a raw angle list.
pub fn validate(theta: &[f64]) -> Result<Configuration, ModelError> {
    Configuration::new(theta.to_vec())
}

/// Positive satellite mass ratios, normalized to `Σ μ_i = n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassVector {
    mu: Vec<f64>,
}

impl MassVector {
    pub fn new(mu: Vec<f64>) -> Result<Self, ModelError> {
        for (index, &value) in mu.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::NonPositiveMass { index, value });
            }
        }
        let n = mu.len() as f64;
        let sum: f64 = mu.iter().sum();
        Ok(Self {
            mu: mu.into_iter().map(|m| m * n / sum).collect(),
        })
    }

    pub fn equal(n: usize) -> Self {
        Self { mu: vec![1.0; n] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mu
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

impl AsRef<[f64]> for MassVector {
    fn as_ref(&self) -> &[f64] {
        &self.mu
    }
}

/// The rows of the central-configuration system for one configuration and mass vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub rows: Vec<f64>,
    pub inf_norm: f64,
}

impl Residual {
    fn from_rows(rows: Vec<f64>) -> Self {
        let inf_norm = inf_norm(&rows);
        Self { rows, inf_norm }
    }
}

pub(crate) fn inf_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Calls `visit(row, column, partial_sum)` for every off-diagonal entry of
/// `A(θ)`, checking each partial sum against the guarded domain.
fn for_each_partial_sum(
    theta: &[f64],
    domain: &KernelDomain,
    mut visit: impl FnMut(usize, usize, f64),
) -> Result<(), ModelError> {
    let n = theta.len();
    for row in 0..n {
        let mut sum = 0.0;
        for terms in 1..n {
            sum += theta[(row + terms - 1) % n];
            domain
                .check(sum)
                .map_err(|source| ModelError::PartialSum {
                    row,
                    terms,
                    sum,
                    source,
                })?;
            visit(row, (row + terms) % n, sum);
        }
    }
    Ok(())
}

fn check_mass_count(n: usize, masses: &[f64]) -> Result<(), ModelError> {
    if masses.len() != n {
        return Err(ModelError::MassCount {
            expected: n,
            actual: masses.len(),
        });
    }
    Ok(())
}

/// Rows of the central-configuration system. Masses may be any real vector
/// of the right length (the rows are linear in them).
pub fn residual(config: &Configuration, masses: &[f64]) -> Result<Residual, ModelError> {
    residual_of_angles(config.angles(), masses, &KernelDomain::default())
}

pub(crate) fn residual_of_angles(
    theta: &[f64],
    masses: &[f64],
    domain: &KernelDomain,
) -> Result<Residual, ModelError> {
    check_mass_count(theta.len(), masses)?;
    let mut rows = vec![0.0; theta.len()];
    for_each_partial_sum(theta, domain, |row, col, sum| {
        rows[row] += masses[col] * f_value(sum);
    })?;
    Ok(Residual::from_rows(rows))
}

/// `A(θ)` with `A[i][(i+m) mod n] = f(θ_i + … + θ_{i+m-1})` and a zero diagonal.
pub fn system_matrix(config: &Configuration) -> Result<DMatrix<f64>, ModelError> {
    system_matrix_of_angles(config.angles(), &KernelDomain::default())
}

pub(crate) fn system_matrix_of_angles(
    theta: &[f64],
    domain: &KernelDomain,
) -> Result<DMatrix<f64>, ModelError> {
    let n = theta.len();
    let mut a = DMatrix::zeros(n, n);
    for_each_partial_sum(theta, domain, |row, col, sum| {
        a[(row, col)] = f_value(sum);
    })?;
    Ok(a)
}

/// Rows together with `∂r_i/∂θ_j`, all `n` angles treated as independent.
pub(crate) fn residual_and_jacobian(
    theta: &[f64],
    masses: &[f64],
    domain: &KernelDomain,
) -> Result<(Vec<f64>, DMatrix<f64>), ModelError> {
    let n = theta.len();
    check_mass_count(n, masses)?;
    let mut rows = vec![0.0; n];
    let mut jac = DMatrix::zeros(n, n);
    // slope[m] = μ_{i+m} f'(S(i, m)); θ_{i+d} enters every partial sum with m > d.
    let mut slope = vec![0.0; n + 1];
    for row in 0..n {
        let mut sum = 0.0;
        for terms in 1..n {
            sum += theta[(row + terms - 1) % n];
            domain
                .check(sum)
                .map_err(|source| ModelError::PartialSum {
                    row,
                    terms,
                    sum,
                    source,
                })?;
            let mass = masses[(row + terms) % n];
            rows[row] += mass * f_value(sum);
            slope[terms] = mass * df_value(sum);
        }
        slope[n] = 0.0;
        let mut tail = 0.0;
        for d in (0..n).rev() {
            tail += slope[d + 1];
            jac[(row, (row + d) % n)] = tail;
        }
    }
    Ok((rows, jac))
}

/// JSON interchange form of a configuration with optional masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub n: usize,
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
}

impl ConfigRecord {
    pub fn from_parts(config: &Configuration, masses: Option<&[f64]>) -> Self {
        Self {
            n: config.len(),
            theta: config.angles().to_vec(),
            mu: masses.map(<[f64]>::to_vec),
        }
    }

    pub fn configuration(&self) -> Result<Configuration, ModelError> {
        if self.theta.len() != self.n {
            return Err(ModelError::TooFewAngles(self.theta.len().min(self.n)));
        }
        validate(&self.theta)
    }

    pub fn masses(&self) -> Result<Option<MassVector>, ModelError> {
        match &self.mu {
            None => Ok(None),
            Some(mu) => {
                check_mass_count(self.n, mu)?;
                MassVector::new(mu.clone()).map(Some)
            }
        }
    }
}
