use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// An element `a + b√2` of ℚ(√2), exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Sqrt2Rational {
    pub a: BigRational,
    pub b: BigRational,
}

impl Sqrt2Rational {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Self { a, b }
    }

    pub fn from_ints(a: i64, b: i64) -> Self {
        Self::new(BigRational::from_integer(a.into()), BigRational::from_integer(b.into()))
    }

    pub fn from_bigints(a: BigInt, b: BigInt) -> Self {
        Self::new(BigRational::from_integer(a), BigRational::from_integer(b))
    }

    pub fn rational(a: BigRational) -> Self {
        Self::new(a, BigRational::zero())
    }

    /// `num / den`, rational.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(num.into(), den.into()))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_ints(1, 0)
    }

    pub fn sqrt2() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a.clone(), -self.b.clone())
    }

    /// `a² - 2b²`, the product with the conjugate.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(2.into()) * &self.b * &self.b
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Self::new(&self.a / &n, -&self.b / &n))
    }

    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self * &i)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(&self.a * k, &self.b * k)
    }

    pub fn signum(&self) -> i8 {
        sign_of(self)
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * std::f64::consts::SQRT_2
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }
}

fn sign_of_rational(x: &BigRational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Exact sign of `a + b√2`: when `a` and `b` disagree, the larger of `a²`
/// and `2b²` decides.
pub fn sign_of(x: &Sqrt2Rational) -> i8 {
    let sa = sign_of_rational(&x.a);
    let sb = sign_of_rational(&x.b);
    if sb == 0 || sa == sb {
        return if sa == 0 { sb } else { sa };
    }
    if sa == 0 {
        return sb;
    }
    let a2 = &x.a * &x.a;
    let b2 = BigRational::from_integer(2.into()) * &x.b * &x.b;
    match a2.cmp(&b2) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => 0,
    }
}

impl PartialOrd for Sqrt2Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(sign_of(&(self - other)).cmp(&0))
    }
}

impl From<i64> for Sqrt2Rational {
    fn from(v: i64) -> Self {
        Self::from_ints(v, 0)
    }
}

impl fmt::Display for Sqrt2Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}√2", self.b),
            (false, false) if self.b.is_negative() => write!(f, "{} - {}√2", self.a, -&self.b),
            _ => write!(f, "{} + {}√2", self.a, self.b),
        }
    }
}

impl Serialize for Sqrt2Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Sqrt2Rational", 2)?;
        st.serialize_field("a", &self.a.to_string())?;
        st.serialize_field("b", &self.b.to_string())?;
        st.end()
    }
}

impl<'x> Add<&'x Sqrt2Rational> for &'x Sqrt2Rational {
    type Output = Sqrt2Rational;
    fn add(self, o: &Sqrt2Rational) -> Sqrt2Rational {
        Sqrt2Rational::new(&self.a + &o.a, &self.b + &o.b)
    }
}

impl<'x> Sub<&'x Sqrt2Rational> for &'x Sqrt2Rational {
    type Output = Sqrt2Rational;
    fn sub(self, o: &Sqrt2Rational) -> Sqrt2Rational {
        Sqrt2Rational::new(&self.a - &o.a, &self.b - &o.b)
    }
}

impl<'x> Mul<&'x Sqrt2Rational> for &'x Sqrt2Rational {
    type Output = Sqrt2Rational;
    fn mul(self, o: &Sqrt2Rational) -> Sqrt2Rational {
        let two = BigRational::from_integer(2.into());
        Sqrt2Rational::new(
            &self.a * &o.a + two * &self.b * &o.b,
            &self.a * &o.b + &self.b * &o.a,
        )
    }
}

impl Add for Sqrt2Rational {
    type Output = Sqrt2Rational;
    fn add(self, o: Sqrt2Rational) -> Sqrt2Rational {
        &self + &o
    }
}

impl Sub for Sqrt2Rational {
    type Output = Sqrt2Rational;
    fn sub(self, o: Sqrt2Rational) -> Sqrt2Rational {
        &self - &o
    }
}

impl Mul for Sqrt2Rational {
    type Output = Sqrt2Rational;
    fn mul(self, o: Sqrt2Rational) -> Sqrt2Rational {
        &self * &o
    }
}

impl AddAssign<&Sqrt2Rational> for Sqrt2Rational {
    fn add_assign(&mut self, o: &Sqrt2Rational) {
        self.a += &o.a;
        self.b += &o.b;
    }
}

impl Neg for Sqrt2Rational {
    type Output = Sqrt2Rational;
    fn neg(self) -> Sqrt2Rational {
        Sqrt2Rational::new(-self.a, -self.b)
    }
}

impl Neg for &Sqrt2Rational {
    type Output = Sqrt2Rational;
    fn neg(self) -> Sqrt2Rational {
        Sqrt2Rational::new(-&self.a, -&self.b)
    }
}

impl Zero for Sqrt2Rational {
    fn zero() -> Self {
        Sqrt2Rational::zero()
    }
    fn is_zero(&self) -> bool {
        Sqrt2Rational::is_zero(self)
    }
}

impl One for Sqrt2Rational {
    fn one() -> Self {
        Sqrt2Rational::one()
    }
}
