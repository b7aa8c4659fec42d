use super::field::Sqrt2Rational;
use super::poly::{BivarPoly, QPoly, Var};
use crate::error::AlgebraError;

/// Sylvester matrix of `p` (degree m) and `q` (degree n) with coefficients
/// highest degree first: n shifted rows of `p`, then m shifted rows of `q`.
pub fn sylvester_matrix<T: Clone>(p: &[T], q: &[T], zero: &T) -> Vec<Vec<T>> {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    let row = |coeffs: &[T], shift: usize| -> Vec<T> {
        let mut r = vec![zero.clone(); size];
        for (k, c) in coeffs.iter().rev().enumerate() {
            r[shift + k] = c.clone();
        }
        r
    };
    (0..n)
        .map(|s| row(p, s))
        .chain((0..m).map(|s| row(q, s)))
        .collect()
}

/// Fraction-free elimination; every division is exact.
pub fn bareiss_determinant(mut m: Vec<Vec<QPoly>>) -> Result<QPoly, AlgebraError> {
    let n = m.len();
    if n == 0 {
        return Ok(QPoly::one());
    }
    let mut negate = false;
    let mut prev = QPoly::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return Ok(QPoly::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let cross = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = cross.div_exact(&prev)?;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    Ok(if negate { det.neg() } else { det })
}

/// Gaussian elimination over the field.
pub fn field_determinant(mut m: Vec<Vec<Sqrt2Rational>>) -> Sqrt2Rational {
    let n = m.len();
    let mut det = Sqrt2Rational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !m[r][k].is_zero()) else {
            return Sqrt2Rational::zero();
        };
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        let inv = m[k][k].inv().expect("nonzero pivot");
        det = &det * &m[k][k];
        for i in k + 1..n {
            let factor = &m[i][k] * &inv;
            if factor.is_zero() {
                continue;
            }
            for j in k..n {
                let t = &factor * &m[k][j];
                m[i][j] = &m[i][j] - &t;
            }
        }
    }
    det
}

/// Resultant of two univariate polynomials over the field, normalized so that
/// `res(x - c, x - d) = d - c`: the Sylvester determinant with the rows of `q`
/// first, which is `(-1)^(deg p · deg q)` times the root-product form.
pub fn univariate_resultant(p: &[Sqrt2Rational], q: &[Sqrt2Rational]) -> Result<Sqrt2Rational, AlgebraError> {
    let p = QPoly::new(p.to_vec());
    let q = QPoly::new(q.to_vec());
    if p.is_zero() || q.is_zero() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    if p.degree() == Some(0) && q.degree() == Some(0) {
        return Ok(Sqrt2Rational::one());
    }
    let zero = Sqrt2Rational::zero();
    Ok(field_determinant(sylvester_matrix(q.coeffs(), p.coeffs(), &zero)))
}

/// Resultant eliminating `var`, as a polynomial in the remaining variable,
/// under the convention of [`univariate_resultant`].
pub fn sylvester_resultant(p: &BivarPoly, q: &BivarPoly, eliminate: Var) -> Result<QPoly, AlgebraError> {
    let pc = p.coefficients_in(eliminate);
    let qc = q.coefficients_in(eliminate);
    if pc.is_empty() || qc.is_empty() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    if pc.len() == 1 && qc.len() == 1 {
        return Ok(QPoly::one());
    }
    bareiss_determinant(sylvester_matrix(&qc, &pc, &QPoly::zero()))
}

/// Resultant at a fixed value of the surviving variable, by an independent
/// route: specialize first, then take a field determinant.
pub fn resultant_at(
    p: &BivarPoly,
    q: &BivarPoly,
    eliminate: Var,
    value: &Sqrt2Rational,
) -> Result<Sqrt2Rational, AlgebraError> {
    let keep = if eliminate == Var::U { Var::V } else { Var::U };
    let pv = p.substitute(keep, value);
    let qv = q.substitute(keep, value);
    let dp = p.degree_in(eliminate).ok_or(AlgebraError::ZeroPolynomial)?;
    let dq = q.degree_in(eliminate).ok_or(AlgebraError::ZeroPolynomial)?;
    // Keep the formal degrees so that a vanishing leading coefficient is honored.
    let pad = |poly: &QPoly, d: usize| (0..=d).map(|k| poly.coeff(k)).collect::<Vec<_>>();
    let zero = Sqrt2Rational::zero();
    Ok(field_determinant(sylvester_matrix(&pad(&qv, dq), &pad(&pv, dp), &zero)))
}

/// `Σ c_k (α + γ s)^k (β + δ s)^(d-k)`: the numerator of `r((α+γs)/(β+δs))`
/// over `(β+δs)^d`.
pub fn mobius_numerator(r: &QPoly, num: (i64, i64), den: (i64, i64)) -> QPoly {
    let Some(d) = r.degree() else {
        return QPoly::zero();
    };
    let a = QPoly::linear(num.0, num.1);
    let b = QPoly::linear(den.0, den.1);
    let mut a_pow = vec![QPoly::one()];
    let mut b_pow = vec![QPoly::one()];
    for k in 0..d {
        a_pow.push(a_pow[k].mul(&a));
        b_pow.push(b_pow[k].mul(&b));
    }
    r.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(QPoly::zero(), |acc, (k, c)| acc.add(&a_pow[k].mul(&b_pow[d - k]).scale(c)))
}
