//! Exact algebra over ℚ(√2): polynomials, resultants, substitutions, and the
//! sign certificate for the square insertion case.

mod certificate;
mod field;
mod poly;
mod resultant;

pub use certificate::{
    certify_square_case, square_case_p, square_case_q, CoefficientCheck, DomainBounds, FloatingCheck,
    ReducedResultant, SquareCertificate, SubstitutedNumerator, N2_SCALE_LOG2,
};
pub use field::{sign_of, Sqrt2Rational};
pub use poly::{BivarPoly, QPoly, Var};
pub use resultant::{
    bareiss_determinant, field_determinant, mobius_numerator, resultant_at, sylvester_matrix, sylvester_resultant,
    univariate_resultant,
};
