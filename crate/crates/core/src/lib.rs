//! Finite LMI relaxations of parameterized matrix inequalities that are
//! nested fuzzy summations over the simplex, with an exact-rational
//! generator side, a small barrier SDP feasibility solver, and numeric
//! oracles for the underlying summation identities.

pub mod cli;
pub mod combinat;
pub mod error;
pub mod matexpr;
pub mod oracle;
pub mod relax;
pub mod sdp;
pub mod sweep;

pub use error::{Error, Result};
