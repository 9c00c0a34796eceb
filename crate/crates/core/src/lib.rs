//! Groups acting on Bass-Serre trees.
//!
//! Two families are built from finite permutation groups: amalgamated free
//! products `G[Γ₀, Γ₁]` and HNN extensions `Λ[Σ₋₁, Σ₁]`. Elements of their
//! vertex groups are stored as finitely supported portraits on a rooted
//! tree, so group equality is structural equality. A generic normal-form
//! engine turns any base group with coset transversals into words, and the
//! tree module measures fixed sets, hulls and translation axes on bounded
//! balls of the Bass-Serre tree.
//!
//! The crate also ships `BS(2,3)` as a third instance of the word engine.

pub mod amalgam;
pub mod bs23;
pub mod cli;
pub mod error;
pub mod hnn;
pub mod instance;
pub mod permgroup;
pub mod portrait;
pub mod tree;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
