//! R(p,q)-deformed combinatorics and multivariate Fermi-Dirac and Bose-Einstein urn
//! distributions, checked against exact enumeration.

pub mod algebra;
pub mod bose_einstein;
pub mod cli;
pub mod error;
pub mod fermi_dirac;
pub mod grouping;
pub mod identities;
pub mod io;
pub mod lattice;
pub mod monomial;
pub mod pmf;
pub mod sampler;
pub mod scalar;
