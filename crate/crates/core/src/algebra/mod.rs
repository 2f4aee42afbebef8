//! Exact arithmetic over the generic-parameter lattice.

mod factored;
mod field;
mod monomial;
mod poly;

pub use factored::Factored;
pub use field::{FieldElement, FieldOp};
pub use monomial::{Gen, Monomial, Specialization};
pub use poly::LaurentPoly;

/// q − q⁻¹
pub fn q_minus_qinv() -> Factored {
    Factored::binomial(Monomial::q(), Monomial::q().inv())
}
