use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::field::Sqrt2Rational;
use super::poly::{BivarPoly, QPoly, Var};
use super::resultant::{mobius_numerator, resultant_at, sylvester_resultant};
use crate::error::AlgebraError;
use crate::roots::square_case_roots;

/// Terms `(u power, v power, rational part, √2 part)` of the first numerator.
const P_TERMS: &[(usize, usize, i64, i64)] = &[(3, 0, -1, 0), (0, 3, -1, 0), (3, 3, 16, 0)];

/// Terms of the second numerator.
const Q_TERMS: &[(usize, usize, i64, i64)] = &[
    (5, 0, 0, 1),
    (8, 0, 4, 0),
    (3, 1, -2, 0),
    (4, 1, -3, 0),
    (4, 1, 0, 3),
    (7, 1, 24, 0),
    (9, 1, -16, 0),
    (3, 2, 0, 3),
    (6, 2, -12, 0),
    (2, 3, 6, 0),
    (2, 3, 0, 1),
    (5, 3, -48, 0),
    (7, 3, 48, 0),
    (4, 4, 12, 0),
    (0, 5, -3, 0),
    (3, 5, 24, 0),
    (5, 5, -48, 0),
    (2, 6, -4, 0),
    (3, 7, 16, 0),
];

const Q_DEGREE_U: usize = 9;
const Q_DEGREE_V: usize = 7;
const STRIPPED_POWER: usize = 12;
const REDUCED_DEGREE: usize = 36;

/// A published coefficient; `None` marks a part hidden by an ellipsis.
struct Quoted {
    degree: usize,
    rational: Option<&'static str>,
    sqrt2: Option<&'static str>,
}

const fn full(degree: usize, rational: &'static str, sqrt2: &'static str) -> Quoted {
    Quoted { degree, rational: Some(rational), sqrt2: Some(sqrt2) }
}

const R1_QUOTED: &[Quoted] = &[
    full(0, "-4", "0"),
    full(1, "18", "18"),
    full(2, "-135", "0"),
    full(3, "384", "0"),
    full(4, "-1800", "-1728"),
    Quoted { degree: 5, rational: Some("12240"), sqrt2: None },
    full(32, "231928233984", "0"),
    full(33, "-21474836480", "0"),
    full(34, "-154618822656", "0"),
    full(35, "0", "0"),
    full(36, "34359738368", "0"),
];

const R2_QUOTED: &[Quoted] = &[
    full(0, "4", "0"),
    full(1, "18", "-18"),
    full(2, "135", "0"),
    full(3, "-384", "0"),
    full(4, "-1800", "1728"),
    full(33, "-21474836480", "0"),
    full(34, "-154618822656", "0"),
    full(35, "0", "0"),
    full(36, "34359738368", "0"),
];

const N1_QUOTED: &[Quoted] = &[
    full(
        0,
        "-1008258045536460519041298702036036780097011712",
        "703154989278597577665542304052850511052800000",
    ),
    full(35, "-6975267000684", "4183796399670"),
    full(36, "-21095906033", "12595023450"),
];

/// Quoted after dividing the numerator by [`N2_SCALE_LOG2`] powers of two.
const N2_QUOTED: &[Quoted] = &[
    full(
        0,
        "39355704304464511525941168410542220606454431557393",
        "-39249115788439924325393189378990445455012929687500",
    ),
    Quoted { degree: 34, rational: None, sqrt2: Some("-57616560") },
    full(35, "168012", "-152568"),
    full(36, "217", "-196"),
];

/// `(50 + 2t)^36 = 2^36 (25 + t)^36` against the published `1/(16 (25 + t)^36)`.
pub const N2_SCALE_LOG2: u32 = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientCheck {
    pub degree: usize,
    pub expected_rational: Option<String>,
    pub expected_sqrt2: Option<String>,
    pub computed: Sqrt2Rational,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedResultant {
    pub variable: &'static str,
    pub eliminated: &'static str,
    pub stripped_factor: String,
    pub degree: usize,
    pub constant: Sqrt2Rational,
    pub leading: Sqrt2Rational,
    pub coefficients: QPoly,
    pub quoted: Vec<CoefficientCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubstitutedNumerator {
    pub substitution: &'static str,
    /// Power of two divided out before comparing with quoted values.
    pub scale_log2: u32,
    pub degree: usize,
    pub signs: Vec<i8>,
    pub all_negative: bool,
    pub quoted: Vec<CoefficientCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainBounds {
    pub v_upper: String,
    pub u_lower: String,
    pub u_upper: String,
    /// `(21/50)² < 1 - (9/10)²`, so the v-bound implies the u-bound.
    pub u_lower_implied: bool,
    pub v_interval: String,
    pub u_interval: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloatingCheck {
    pub x: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
    pub r1: f64,
    pub r2: f64,
    pub v_within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareCertificate {
    pub r1: ReducedResultant,
    pub r2: ReducedResultant,
    pub r1_numerator: SubstitutedNumerator,
    pub r2_numerator: SubstitutedNumerator,
    pub domain: DomainBounds,
    /// Numerators rebuilt from the closed forms of `4f` agree with the tables.
    pub p_rederived: bool,
    pub q_rederived: bool,
    /// Resultants evaluated by specializing first agree at sample points.
    pub evaluation_cross_check: bool,
    pub floating: Vec<FloatingCheck>,
    /// Quoted values that the computation does not reproduce.
    pub errata: Vec<String>,
    pub certified: bool,
}

pub fn square_case_p() -> BivarPoly {
    BivarPoly::from_terms(P_TERMS)
}

pub fn square_case_q() -> BivarPoly {
    BivarPoly::from_terms(Q_TERMS)
}

fn big(s: &str) -> BigRational {
    BigRational::from_integer(BigInt::from_str(s).expect("literal integer"))
}

fn check_quoted(poly: &QPoly, quoted: &[Quoted], scale: &BigRational) -> Vec<CoefficientCheck> {
    quoted
        .iter()
        .map(|q| {
            let c = poly.coeff(q.degree);
            let computed = Sqrt2Rational::new(&c.a / scale, &c.b / scale);
            let ok_a = q.rational.is_none_or(|a| big(a) == computed.a);
            let ok_b = q.sqrt2.is_none_or(|b| big(b) == computed.b);
            CoefficientCheck {
                degree: q.degree,
                expected_rational: q.rational.map(str::to_owned),
                expected_sqrt2: q.sqrt2.map(str::to_owned),
                computed,
                matched: ok_a && ok_b,
            }
        })
        .collect()
}

fn fail(msg: impl Into<String>) -> AlgebraError {
    AlgebraError::CertificateFailure(msg.into())
}

fn reduce(
    full: &QPoly,
    factor: i64,
    variable: &'static str,
    eliminated: &'static str,
    quoted: &[Quoted],
) -> Result<ReducedResultant, AlgebraError> {
    if full.low_order() != Some(STRIPPED_POWER) {
        return Err(fail(format!(
            "resultant in {variable} is not divisible by exactly {variable}^{STRIPPED_POWER}"
        )));
    }
    let inv = Sqrt2Rational::ratio(1, factor);
    let reduced = full.shift_down(STRIPPED_POWER)?.scale(&inv);
    if reduced.degree() != Some(REDUCED_DEGREE) {
        return Err(AlgebraError::Degree(format!(
            "reduced resultant in {variable} has degree {:?}, expected {REDUCED_DEGREE}",
            reduced.degree()
        )));
    }
    Ok(ReducedResultant {
        variable,
        eliminated,
        stripped_factor: format!("{factor} {variable}^{STRIPPED_POWER}"),
        degree: REDUCED_DEGREE,
        constant: reduced.coeff(0),
        leading: reduced.leading(),
        quoted: check_quoted(&reduced, quoted, &BigRational::from_integer(1.into())),
        coefficients: reduced,
    })
}

fn substitute(
    r: &QPoly,
    substitution: &'static str,
    num: (i64, i64),
    den: (i64, i64),
    scale_log2: u32,
    quoted: &[Quoted],
) -> SubstitutedNumerator {
    let n = mobius_numerator(r, num, den);
    let signs = n.signs();
    let scale = BigRational::from_integer(BigInt::from(2).pow(scale_log2));
    SubstitutedNumerator {
        substitution,
        scale_log2,
        degree: n.degree().unwrap_or(0),
        all_negative: !signs.is_empty() && signs.iter().all(|&s| s < 0),
        signs,
        quoted: check_quoted(&n, quoted, &scale),
    }
}

/// Rebuilds the numerators from `4f(x) = v u⁻²(8u³ - 1)` and its companions,
/// cleared by `u²v²` and `u²(v - u)²(v + u)²`.
fn rederived() -> (BivarPoly, BivarPoly) {
    let u = BivarPoly::u();
    let v = BivarPoly::v();
    let c = |a: i64| BivarPoly::constant(a.into());
    let sqrt2 = BivarPoly::constant(Sqrt2Rational::sqrt2());
    let eight_u3_minus_1 = c(8).mul(&u.pow(3)).sub(&c(1));
    let eight_v3_minus_1 = c(8).mul(&v.pow(3)).sub(&c(1));
    // 4f(x)·u²v² - 4f(π + x)·u²v²
    let p = v.pow(3).mul(&eight_u3_minus_1).add(&u.pow(3).mul(&eight_v3_minus_1));

    let diff = v.sub(&u);
    let sum = v.add(&u);
    let sq_diff = v.pow(2).sub(&u.pow(2));
    let f_x = c(3).mul(&v).mul(&eight_u3_minus_1).mul(&diff.pow(2)).mul(&sum.pow(2));
    let two_sqrt2 = BivarPoly::constant(Sqrt2Rational::from_ints(0, 2));
    let f_quarter = sqrt2
        .mul(&sum.pow(3))
        .mul(&u.pow(2))
        .mul(&two_sqrt2.mul(&diff.pow(3)).sub(&c(1)));
    let f_double = c(-2)
        .mul(&u.pow(3))
        .mul(&v)
        .mul(&c(8).mul(&sq_diff.pow(3)).sub(&c(1)));
    let q = f_x.sub(&f_quarter).sub(&f_double);
    (p, q)
}

fn domain_bounds() -> DomainBounds {
    let v_upper = BigRational::new(9.into(), 10.into());
    let u_lower = BigRational::new(21.into(), 50.into());
    let one = BigRational::from_integer(1.into());
    let implied = &u_lower * &u_lower < one - &v_upper * &v_upper;
    DomainBounds {
        v_upper: v_upper.to_string(),
        u_lower: u_lower.to_string(),
        u_upper: "1/2".into(),
        u_lower_implied: implied,
        v_interval: "0 < v < 9/10".into(),
        u_interval: "21/50 < u <= 1/2".into(),
    }
}

fn floating_checks(r1: &QPoly, r2: &QPoly) -> Vec<FloatingCheck> {
    let p = square_case_p();
    square_case_roots()
        .unwrap_or_default()
        .into_iter()
        .map(|root| {
            let (u, v) = ((root.x / 2.0).sin(), (root.x / 2.0).cos());
            FloatingCheck {
                x: root.x,
                u,
                v,
                p: p.eval_f64(u, v),
                r1: r1.eval_f64(v),
                r2: r2.eval_f64(u),
                v_within_bound: v < 0.9,
            }
        })
        .collect()
}

/// Sample points for the specialize-then-eliminate cross-check.
const CROSS_CHECK_POINTS: &[(i64, i64)] = &[(1, 3), (-2, 5), (7, 4)];

/// Exact proof that the two square-insertion conditions have no common root.
pub fn certify_square_case() -> Result<SquareCertificate, AlgebraError> {
    let p = square_case_p();
    let q = square_case_q();
    if q.degree_in(Var::U) != Some(Q_DEGREE_U) || q.degree_in(Var::V) != Some(Q_DEGREE_V) {
        return Err(AlgebraError::Degree(format!(
            "q has degrees ({:?}, {:?}), expected ({Q_DEGREE_U}, {Q_DEGREE_V})",
            q.degree_in(Var::U),
            q.degree_in(Var::V)
        )));
    }

    let res_u = sylvester_resultant(&p, &q, Var::U)?;
    let res_v = sylvester_resultant(&p, &q, Var::V)?;
    let mut evaluation_cross_check = true;
    for &(a, b) in CROSS_CHECK_POINTS {
        let x = Sqrt2Rational::ratio(a, b);
        evaluation_cross_check &= res_u.eval(&x) == resultant_at(&p, &q, Var::U, &x)?;
        evaluation_cross_check &= res_v.eval(&x) == resultant_at(&p, &q, Var::V, &x)?;
    }
    if !evaluation_cross_check {
        return Err(fail("resultant disagrees with pointwise elimination"));
    }

    let r1 = reduce(&res_u, -2, "v", "u", R1_QUOTED)?;
    let r2 = reduce(&res_v, 2, "u", "v", R2_QUOTED)?;
    let n1 = substitute(&r1.coefficients, "v = (9 + s)/(10 + s)", (9, 1), (10, 1), 0, N1_QUOTED);
    let n2 = substitute(&r2.coefficients, "u = (21 + t)/(50 + 2t)", (21, 1), (50, 2), N2_SCALE_LOG2, N2_QUOTED);
    if !n1.all_negative {
        return Err(fail("substituted r1 numerator has a nonnegative coefficient"));
    }
    if !n2.all_negative {
        return Err(fail("substituted r2 numerator has a nonnegative coefficient"));
    }
    let domain = domain_bounds();
    if !domain.u_lower_implied {
        return Err(fail("21/50 does not bound sqrt(1 - (9/10)^2) from below"));
    }

    let (p_derived, q_derived) = rederived();
    let mut errata = Vec::new();
    for (name, report) in [("r1", &r1.quoted), ("r2", &r2.quoted), ("r1 numerator", &n1.quoted), ("r2 numerator", &n2.quoted)] {
        for c in report.iter().filter(|c| !c.matched) {
            errata.push(format!("{name} degree {}: quoted ({:?}, {:?}), computed {}", c.degree, c.expected_rational, c.expected_sqrt2, c.computed));
        }
    }
    let floating = floating_checks(&r1.coefficients, &r2.coefficients);

    Ok(SquareCertificate {
        p_rederived: p_derived == p,
        q_rederived: q_derived == q,
        r1,
        r2,
        r1_numerator: n1,
        r2_numerator: n2,
        domain,
        evaluation_cross_check,
        floating,
        errata,
        certified: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::sign_of;
    use std::sync::OnceLock;

    fn certificate() -> &'static SquareCertificate {
        static CERT: OnceLock<SquareCertificate> = OnceLock::new();
        CERT.get_or_init(|| certify_square_case().expect("certificate"))
    }

    #[test]
    fn stripped_factors_and_end_coefficients() {
        let c = certificate();
        assert_eq!(c.r1.stripped_factor, "-2 v^12");
        assert_eq!(c.r2.stripped_factor, "2 u^12");
        assert_eq!(c.r1.constant, (-4).into());
        assert_eq!(c.r1.leading, Sqrt2Rational::from_bigints(num_bigint::BigInt::from(2).pow(35), 0.into()));
        assert_eq!(c.r2.constant, 4.into());
        assert_eq!(c.r2.leading, c.r1.leading);
    }

    #[test]
    fn every_quoted_coefficient_matches() {
        let c = certificate();
        assert!(c.errata.is_empty(), "{:?}", c.errata);
        let quoted = c.r1.quoted.len() + c.r2.quoted.len() + c.r1_numerator.quoted.len() + c.r2_numerator.quoted.len();
        assert_eq!(quoted, 27);
    }

    #[test]
    fn substituted_numerators_are_negative() {
        let c = certificate();
        assert_eq!(c.r1_numerator.degree, 36);
        assert_eq!(c.r1_numerator.signs.len(), 37);
        assert!(c.r1_numerator.all_negative);
        assert!(c.r2_numerator.all_negative);
        assert_eq!(c.r2_numerator.scale_log2, 32);
    }

    #[test]
    fn numerator_signs_agree_with_float_substitution() {
        // Independent check: r((α+γs)/(β+δs))·(β+δs)^36 < 0 for sample s > 0.
        let c = certificate();
        for s in [0.01, 0.5, 3.0, 40.0] {
            let v = (9.0 + s) / (10.0 + s);
            assert!(c.r1.coefficients.eval_f64(v) < 0.0, "s = {s}");
            let u = (21.0 + s) / (50.0 + 2.0 * s);
            assert!(c.r2.coefficients.eval_f64(u) < 0.0, "t = {s}");
        }
    }

    #[test]
    fn numerators_rebuilt_from_kernel_forms() {
        let c = certificate();
        assert!(c.p_rederived);
        assert!(c.q_rederived);
        assert!(c.evaluation_cross_check);
    }

    #[test]
    fn domain_bounds_are_exact() {
        let d = &certificate().domain;
        assert!(d.u_lower_implied);
        assert_eq!(d.v_upper, "9/10");
        assert_eq!(d.u_lower, "21/50");
    }

    #[test]
    fn balance_root_lies_outside_the_v_bound() {
        let c = certificate();
        assert_eq!(c.floating.len(), 1);
        let f = &c.floating[0];
        assert!((f.x - 0.8413057783215957).abs() < 1e-12);
        assert!(f.p.abs() < 1e-12);
        assert!(!f.v_within_bound);
        // The balance root is not a root of r1, so no common solution sits there.
        assert!(f.r1.abs() > 1.0);
        assert_eq!(sign_of(&c.r1_numerator.quoted[0].computed), -1);
    }

    #[test]
    fn report_serializes() {
        let json = serde_json::to_value(certificate()).unwrap();
        assert_eq!(json["r1_numerator"]["all_negative"], true);
        assert_eq!(json["r1"]["constant"]["a"], "-4");
    }
}
