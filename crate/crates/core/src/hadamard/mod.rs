//! Hadamard-type factorization `f(s) = s^{m0} e^{g(s)} W1(s)/W2(s)` of the
//! continued zeta functions, and the growth estimators used to check that
//! `f` has order at most `n`.

mod elementary;
mod factorization;
mod growth;
mod product;
mod zeros;

pub use elementary::{elementary_factor, log_elementary_factor, one_minus_elementary_factor};
pub use factorization::{
    evaluate_factorization, fit_g, FactorComponent, FactorValue, Factorization, GFit,
};
pub use growth::{
    convergence_exponent, estimate_order, estimate_order_of_values, genus_of, ExponentEstimate,
    GenusEstimate, OrderEstimate, OrderPoint, MIN_ANGLES, MIN_RADII, MIN_ZEROS,
};
pub use product::{canonical_product, LogProduct, ProductValue};
pub use zeros::{split_divisor, SplitDivisor, ZeroSet, ZeroTail};
