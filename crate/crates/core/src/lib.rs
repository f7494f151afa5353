//! Numerical toolkit for weighted Bergman spaces on the unit ball of `C^n`.
//!
//! The crate is organised bottom-up: [`geometry`] (automorphisms, metrics,
//! regions), [`measure`] (weighted measures and seeded Monte-Carlo
//! quadrature), [`holo`] (a symbolic family of holomorphic test functions),
//! [`operators`] (maximal, area and tent functionals, Bergman kernels and
//! their estimates) and [`atoms`] (Carleson-tube atoms, lattices and
//! kernel-sum synthesis).

pub mod atoms;
pub mod error;
pub mod geometry;
pub mod holo;
pub mod measure;
pub mod operators;
pub mod rng;

pub use error::{BergmanError, Result};
pub use geometry::{Automorphism, BallPoint, CVec, Region};
pub use holo::HoloFun;
pub use measure::{Estimate, QuadSpec, Strategy, Weight};
pub use num_complex::Complex64;
