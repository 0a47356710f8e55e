//! Exact computations around Shintani twisting and the Jordan decomposition
//! of characters for special linear and unitary groups of prime rank.
//!
//! The crate builds finite realizations of GL_n, SL_n, PGL_n and the
//! disconnected centralizer model T* ⋊ ⟨c⟩ (n prime, n | q − ε), computes
//! exact character data over cyclotomic fields, solves Lang–Steinberg
//! equations to realize the Shintani twist on conjugacy classes, and
//! machine-checks the twisting identities on both sides of the Jordan
//! bridge together with the explicit bijection J between them.
//!
//! Entry points:
//! - [`cyclotomic::CycNum`] — exact values in Q(ζ_N)
//! - [`gf::FieldTower`] — compatible finite field towers with the chart to (Q/Z)_{p'}
//! - [`groups`] — enumerated matrix groups, Frobenius maps, conjugacy classes
//! - [`lang`] — Lang witnesses, the Shintani twist, commuting pairs
//! - [`charfun`] — class functions, inner products, Dixon character tables
//! - [`torus_side`] / [`sl_side`] — the two sides of the bridge
//! - [`verify`] — proposition checkers and reports, used by the `slt` binary

pub mod arith;
pub mod cache;
pub mod charfun;
pub mod cyclotomic;
pub mod error;
pub mod export;
pub mod gf;
pub mod groups;
pub mod lang;
pub mod sl_side;
pub mod torus_side;
pub mod verify;

pub use error::{Result, SltError};
