//! Exact computer algebra for graded Hopf algebroids.
//!
//! The crate covers graded-commutative presentations ([`ring`]), Hopf
//! algebroids and their points ([`hopf`]), the Brown-Peterson family
//! ([`fgl`]), induced algebroids and equivalence certificates ([`morita`]),
//! comodules and their sheaf description ([`comodule`]), finite-ring oracles
//! ([`finite`]) and cobar Ext computations ([`cobar`]).

pub mod cobar;
pub mod coeff;
pub mod comodule;
pub mod error;
pub mod expr;
pub mod finite;
pub mod fgl;
pub mod hopf;
pub mod io;
pub mod linalg;
pub mod morita;
pub mod ring;

pub use coeff::{BaseRing, Coeff};
pub use error::{AlgebraError, Result};
pub use ring::{Element, Monomial, Presentation, PresentationBuilder, Ring, RingMorphism, Verdict};
