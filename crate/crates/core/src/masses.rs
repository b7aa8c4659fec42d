//! Inverse problem: the mass vectors that make a given configuration central.
//!
//! The rows are linear in the masses, so the admissible masses form the null
//! space of `A(θ)`; a configuration is realizable when that space meets the
//! open positive orthant.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::ModelError;
use crate::model::{system_matrix, Configuration, MassVector};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Smallest entry, after normalizing to `Σ μ = n`, of an accepted positive vector.
pub const POSITIVITY_FLOOR: f64 = 1e-8;

pub const DEFAULT_SAMPLES: usize = 1000;

/// A matrix whose entries are all below this is treated as zero.
pub const ZERO_MATRIX: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassSolutionSpace {
    pub null_dim: usize,
    /// Orthonormal basis of the null space.
    pub basis: Vec<Vec<f64>>,
    pub positive_representative: Option<MassVector>,
    /// False when absence rests on random sampling only.
    pub absence_certified: bool,
}

/// Orthonormal basis of the numerical null space of a square or tall matrix.
pub fn null_space_of(matrix: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let cols = matrix.ncols();
    let largest = matrix.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if largest <= ZERO_MATRIX {
        return (0..cols)
            .map(|i| (0..cols).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
    }
    // Pad to square so that `v_t` carries a full basis of the domain.
    let rows = matrix.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (matrix.nrows(), cols)).copy_from(matrix);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let sigma_max = svd.singular_values.max();
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= RANK_TOLERANCE * sigma_max)
        .map(|(k, _)| v_t.row(k).iter().copied().collect())
        .collect()
}

/// Rescales to `Σ = len`, accepting only vectors whose every entry clears the floor.
fn normalized_positive(v: &[f64]) -> Option<Vec<f64>> {
    let sum: f64 = v.iter().sum();
    if sum == 0.0 || !sum.is_finite() {
        return None;
    }
    let n = v.len() as f64;
    let scaled: Vec<f64> = v.iter().map(|x| x * n / sum).collect();
    scaled
        .iter()
        .all(|&x| x > POSITIVITY_FLOOR)
        .then_some(scaled)
}

fn combine(basis: &[Vec<f64>], coefficients: &[f64]) -> Vec<f64> {
    let n = basis[0].len();
    let mut out = vec![0.0; n];
    for (b, c) in basis.iter().zip(coefficients) {
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    out
}

/// A strictly positive vector in the span of `basis`, with a flag that is
/// true when a negative answer is exact.
pub fn positive_vector_in(basis: &[Vec<f64>], seed: u64, samples: usize) -> (Option<Vec<f64>>, bool) {
    match basis.len() {
        0 => return (None, true),
        1 => return (normalized_positive(&basis[0]), true),
        _ => {}
    }
    let n = basis[0].len();
    let ones = vec![1.0; n];
    let projection: Vec<f64> = basis
        .iter()
        .map(|b| b.iter().zip(&ones).map(|(x, y)| x * y).sum())
        .collect();
    if let Some(v) = normalized_positive(&combine(basis, &projection)) {
        return (Some(v), true);
    }
    for b in basis {
        if let Some(v) = normalized_positive(b) {
            return (Some(v), true);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let coefficients: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Some(v) = normalized_positive(&combine(basis, &coefficients)) {
            return (Some(v), true);
        }
    }
    (None, false)
}

pub fn mass_null_space(config: &Configuration) -> Result<MassSolutionSpace, ModelError> {
    mass_null_space_with(config, 0, DEFAULT_SAMPLES)
}

pub fn mass_null_space_with(
    config: &Configuration,
    seed: u64,
    samples: usize,
) -> Result<MassSolutionSpace, ModelError> {
    let a = system_matrix(config)?;
    let basis = null_space_of(&a);
    let (positive, absence_certified) = positive_vector_in(&basis, seed, samples);
    let positive_representative = positive.map(MassVector::new).transpose()?;
    Ok(MassSolutionSpace {
        null_dim: basis.len(),
        basis,
        positive_representative,
        absence_certified,
    })
}

pub fn positive_mass_exists(config: &Configuration) -> Result<Option<MassVector>, ModelError> {
    Ok(mass_null_space(config)?.positive_representative)
}
