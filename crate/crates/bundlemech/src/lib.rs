//! Desk-scale numerical differential geometry on trivialized principal
//! bundles.
//!
//! The crate models a principal G-bundle `P = Ω × G` over a box chart
//! `Ω ⊂ R^n` for the matrix groups SO(2), SO(3) and SU(2), and builds the
//! layers that sit on top of it:
//!
//! * [`liegroup`] — the matrix-group kernel: exp/log, adjoint and coadjoint
//!   actions, the tangent group as a semidirect product, Lie–Poisson bracket;
//! * [`bundle`] — box charts, right-trivialized tangent vectors, principal
//!   connections as gauge-potential fields, vertical/horizontal calculus;
//! * [`autgroup`] — fibre automorphisms of TP commuting with the tangent-group
//!   action, their semidirect decomposition, and their action on connections;
//! * [`canforms`] — momentum pairings and generalized canonical one-forms on
//!   the cotangent bundle T\*P, numerical exterior calculus, symplectic
//!   matrices;
//! * [`pullback`] — the connection-dependent trivialization of T\*P over
//!   T\*Ω × G × (dual algebra) and the automorphism action transported there;
//! * [`dynamics`] — Hamiltonian vector fields against any of the symplectic
//!   structures, a Lie-group Runge–Kutta integrator, Poisson brackets,
//!   conservation diagnostics, and reduction at coadjoint fixed points;
//! * [`sampling`] — the seeded generator behind every randomized check.
//!
//! Dimensions are tiny throughout (n ≤ 3 base coordinates, groups of
//! dimension ≤ 3); all derivatives are central finite differences with a
//! fixed step, and exact closed forms are preferred wherever they exist so
//! that the finite-difference layers sit on noise-free evaluations.

pub mod autgroup;
pub mod bundle;
pub mod canforms;
pub mod dynamics;
pub mod error;
pub mod liegroup;
pub mod pullback;
pub mod sampling;

pub use error::{Error, Result};
