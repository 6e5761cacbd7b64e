//! Finite-valued matrix semantics for propositional Hilbert calculi: cover
//! checking, t-soundness, tautology-set comparison, cover enumeration,
//! independence certificates and Kripke-model compilation.

pub mod analysis;
pub mod calculus;
pub mod certificate;
pub mod kripke;
pub mod matrix;
pub mod syntax;
pub mod text;
pub mod util;
