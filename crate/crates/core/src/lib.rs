//! Single-server private information retrieval with side information
//! (PIR-SI) and its equivalence with locally recoverable codes.

pub mod audit;
pub mod cli;
pub mod codes;
pub mod combinat;
pub mod constructions;
pub mod field;
pub mod matrix;
pub mod perm;
pub mod pir_general;
pub mod pir_linear;
pub mod query;

/// Exact rational used for probabilities, rates and bounds.
pub type Rational = num_rational::Ratio<u64>;
