//! Parity averages of binary cubic forms, together with exact checks of
//! the ideal-theoretic sieve identities used to control them.

pub mod arith;
pub mod cubic_form;
pub mod cut;
pub mod error;
pub mod experiments;
pub mod factor_sieve;
pub mod ideal_arith;
pub mod polymod;
pub mod postulates;
pub mod region_lattice;
pub mod sieve_weights;
pub mod vaughan;

pub use cubic_form::{parse_form, BinaryCubicForm, MonicizationData};
pub use error::{Error, Result};
pub use factor_sieve::{Alpha, Factorization, ParityValues};
pub use region_lattice::{ConvexRegion, LatticeCoset};
