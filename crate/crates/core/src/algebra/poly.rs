use std::fmt;

use serde::Serialize;

use super::field::Sqrt2Rational;
use crate::error::AlgebraError;

/// Univariate polynomial over ℚ(√2), coefficients lowest degree first,
/// with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QPoly {
    coeffs: Vec<Sqrt2Rational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Sqrt2Rational>) -> Self {
        while coeffs.last().is_some_and(Sqrt2Rational::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Sqrt2Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Sqrt2Rational::one())
    }

    /// `c·x^k`.
    pub fn monomial(c: Sqrt2Rational, k: usize) -> Self {
        let mut coeffs = vec![Sqrt2Rational::zero(); k];
        coeffs.push(c);
        Self::new(coeffs)
    }

    /// `α + γ·x` from integers.
    pub fn linear(alpha: i64, gamma: i64) -> Self {
        Self::new(vec![alpha.into(), gamma.into()])
    }

    pub fn coeffs(&self) -> &[Sqrt2Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Sqrt2Rational {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Sqrt2Rational {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    /// Exponent of the largest power of `x` dividing the polynomial.
    pub fn low_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|k| &self.coeff(k) + &other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|k| &self.coeff(k) - &other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Sqrt2Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &Sqrt2Rational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|x| -x).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Quotient and remainder of long division.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), AlgebraError> {
        let d = divisor.degree().ok_or(AlgebraError::ZeroPolynomial)?;
        let lead_inv = divisor.leading().inv().ok_or(AlgebraError::ZeroPolynomial)?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![Sqrt2Rational::zero(); rem.len() - d];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + d] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = &rem[k + j] - &(&c * dc);
            }
            quot[k] = c;
        }
        rem.truncate(d);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Division that must leave no remainder.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self, AlgebraError> {
        let (q, r) = self.div_rem(divisor)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(AlgebraError::CertificateFailure(format!(
                "inexact division by a degree {} polynomial",
                divisor.degree().unwrap_or(0)
            )))
        }
    }

    /// Drops the factor `x^k`; fails if it does not divide.
    pub fn shift_down(&self, k: usize) -> Result<Self, AlgebraError> {
        match self.low_order() {
            Some(low) if low >= k => Ok(Self::new(self.coeffs[k..].to_vec())),
            None => Ok(Self::zero()),
            _ => Err(AlgebraError::CertificateFailure(format!("x^{k} does not divide"))),
        }
    }

    pub fn eval(&self, x: &Sqrt2Rational) -> Sqrt2Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Sqrt2Rational::zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    pub fn signs(&self) -> Vec<i8> {
        self.coeffs.iter().map(Sqrt2Rational::signum).collect()
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})x"),
                _ => format!("({c})x^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Serialize for QPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    U,
    V,
}

/// Polynomial in `u` and `v` over ℚ(√2); `coeffs[i][j]` multiplies `u^i v^j`.
#[derive(Debug, Clone, Default)]
pub struct BivarPoly {
    coeffs: Vec<Vec<Sqrt2Rational>>,
}

impl BivarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds from `(u power, v power, rational part, √2 part)` terms; repeats add up.
    pub fn from_terms(terms: &[(usize, usize, i64, i64)]) -> Self {
        let mut p = Self::zero();
        for &(i, j, a, b) in terms {
            p.add_term(i, j, &Sqrt2Rational::from_ints(a, b));
        }
        p
    }

    pub fn u() -> Self {
        Self::from_terms(&[(1, 0, 1, 0)])
    }

    pub fn v() -> Self {
        Self::from_terms(&[(0, 1, 1, 0)])
    }

    pub fn constant(c: Sqrt2Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(0, 0, &c);
        p
    }

    fn add_term(&mut self, i: usize, j: usize, c: &Sqrt2Rational) {
        if self.coeffs.len() <= i {
            self.coeffs.resize(i + 1, Vec::new());
        }
        let row = &mut self.coeffs[i];
        if row.len() <= j {
            row.resize(j + 1, Sqrt2Rational::zero());
        }
        row[j] += c;
    }

    pub fn coeff(&self, i: usize, j: usize) -> Sqrt2Rational {
        self.coeffs
            .get(i)
            .and_then(|r| r.get(j))
            .cloned()
            .unwrap_or_default()
    }

    fn terms(&self) -> impl Iterator<Item = (usize, usize, &Sqrt2Rational)> {
        self.coeffs.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(j, c)| (i, j, c))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.terms().next().is_none()
    }

    pub fn degree_in(&self, var: Var) -> Option<usize> {
        self.terms()
            .map(|(i, j, _)| if var == Var::U { i } else { j })
            .max()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (i, j, c) in other.terms() {
            out.add_term(i, j, c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in self.terms() {
            out.add_term(i, j, &-c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (i, j, a) in self.terms() {
            for (k, l, b) in other.terms() {
                out.add_term(i + k, j + l, &(a * b));
            }
        }
        out
    }

    pub fn scale(&self, c: &Sqrt2Rational) -> Self {
        self.mul(&Self::constant(c.clone()))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(Sqrt2Rational::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Coefficients with respect to `var`, each a polynomial in the other variable.
    pub fn coefficients_in(&self, var: Var) -> Vec<QPoly> {
        let Some(deg) = self.degree_in(var) else {
            return Vec::new();
        };
        let mut rows = vec![Vec::new(); deg + 1];
        for (i, j, c) in self.terms() {
            let (outer, inner) = if var == Var::U { (i, j) } else { (j, i) };
            let row: &mut Vec<Sqrt2Rational> = &mut rows[outer];
            if row.len() <= inner {
                row.resize(inner + 1, Sqrt2Rational::zero());
            }
            row[inner] = c.clone();
        }
        rows.into_iter().map(QPoly::new).collect()
    }

    pub fn eval(&self, u: &Sqrt2Rational, v: &Sqrt2Rational) -> Sqrt2Rational {
        let mut acc = Sqrt2Rational::zero();
        for (i, j, c) in self.terms() {
            acc += &(&(c * &u.pow(i as u32)) * &v.pow(j as u32));
        }
        acc
    }

    pub fn eval_f64(&self, u: f64, v: f64) -> f64 {
        self.terms()
            .map(|(i, j, c)| c.to_f64() * u.powi(i as i32) * v.powi(j as i32))
            .sum()
    }

    /// Specializes `var` to a value, leaving a polynomial in the other variable.
    pub fn substitute(&self, var: Var, value: &Sqrt2Rational) -> QPoly {
        let other = if var == Var::U { Var::V } else { Var::U };
        let mut out = QPoly::zero();
        for (k, c) in self.coefficients_in(other).iter().enumerate() {
            out = out.add(&QPoly::monomial(c.eval(value), k));
        }
        out
    }
}

impl PartialEq for BivarPoly {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl Eq for BivarPoly {}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_poly(c: &[i64]) -> QPoly {
        QPoly::new(c.iter().map(|&x| x.into()).collect())
    }

    #[test]
    fn normalization_trims_zeros() {
        let p = int_poly(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert!(int_poly(&[0, 0]).is_zero());
        assert_eq!(int_poly(&[0, 0, 3]).low_order(), Some(2));
    }

    #[test]
    fn division_round_trips() {
        let a = int_poly(&[1, -3, 0, 2, 5]);
        let b = QPoly::new(vec![Sqrt2Rational::from_ints(1, 1), 2.into()]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 1);
        assert_eq!(a.mul(&b).div_exact(&b).unwrap(), a);
        assert!(a.div_exact(&int_poly(&[1, 1, 1])).is_err());
        assert!(a.div_rem(&QPoly::zero()).is_err());
    }

    #[test]
    fn evaluation_matches_float() {
        let p = QPoly::new(vec![Sqrt2Rational::from_ints(1, 2), (-3).into(), Sqrt2Rational::from_ints(0, 1)]);
        let x = Sqrt2Rational::ratio(3, 7);
        assert!((p.eval(&x).to_f64() - p.eval_f64(3.0 / 7.0)).abs() < 1e-12);
    }

    #[test]
    fn bivariate_degrees_and_slices() {
        let p = BivarPoly::from_terms(&[(3, 0, -1, 0), (0, 3, -1, 0), (3, 3, 16, 0)]);
        assert_eq!(p.degree_in(Var::U), Some(3));
        assert_eq!(p.degree_in(Var::V), Some(3));
        let by_u = p.coefficients_in(Var::U);
        assert_eq!(by_u[0], int_poly(&[0, 0, 0, -1]));
        assert_eq!(by_u[3], int_poly(&[-1, 0, 0, 16]));
        let at = p.substitute(Var::V, &Sqrt2Rational::ratio(1, 2));
        assert_eq!(at, QPoly::new(vec![Sqrt2Rational::ratio(-1, 8), 0.into(), 0.into(), 1.into()]));
        let sq = p.mul(&p);
        assert!((sq.eval_f64(0.3, 0.7) - p.eval_f64(0.3, 0.7).powi(2)).abs() < 1e-12);
    }
}
