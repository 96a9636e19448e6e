//! Nonlinear semigroups generated by discretized accretive operators.
//!
//! The crate is organised bottom-up:
//!
//! - [`exponents`]: closed-form smoothing exponents, extrapolation rules and
//!   iteration sequences for `L^q`-`L^r` and `L^1`-`L^∞` regularisation.
//! - [`measure`]: weighted discrete measure spaces, `L^q` norms, lattice
//!   operations and the q-bracket.
//! - [`operators`]: p-Laplace type operators on 1D/2D grids (Dirichlet,
//!   Neumann, Robin), doubly nonlinear compositions, Lipschitz perturbations,
//!   the energy functional and the Barenblatt profile.
//! - [`resolvent`]: the nonlinear resolvent `J_λ = (I + λA)^{-1}` by
//!   globalized Newton.
//! - [`semigroup`]: implicit Euler trajectories and the exponential formula.
//! - [`harness`]: decay fits, Barenblatt tracking and property suites that
//!   produce JSON reports.
//!
//! Independent jobs (random trials, sweeps) are fanned out with rayon when the
//! `parallel` feature is enabled; see [`par`].

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exponents;
pub mod harness;
pub mod index;
pub mod measure;
pub mod operators;
pub mod par;
pub mod resolvent;
pub mod semigroup;

mod linalg;

pub use index::LqIndex;
