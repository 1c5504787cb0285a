//! Numerical toolkit for the band structure of a charged particle around an
//! infinite straight wire carrying a constant current.
//!
//! The magnetic field of the wire confines the particle radially.  After a
//! Fourier transform along the wire axis and a decomposition into angular
//! momentum sectors, the three dimensional Hamiltonian splits into a family of
//! one dimensional radial operators indexed by an angular number `m` and an
//! axial frequency `k`.  Their eigenvalues, as functions of `k`, are the band
//! functions of the problem.  Every band decreases to zero as `k` grows, which
//! is the mechanism by which an arbitrarily weak attractive electric
//! perturbation creates infinitely many bound states below the free spectrum.
//!
//! The crate is organized around that pipeline:
//!
//! * [`fiber`]: the radial fiber operators in five equivalent gauges
//!   (weighted or flat measure, original or rescaled radial variable, and a
//!   blown-up variable adapted to the semiclassical regime), together with the
//!   unitary maps between them.
//! * [`eigen`]: a symmetric tridiagonal eigensolver (Sturm bisection plus
//!   inverse iteration) and the finite difference assembly of the fibers.
//! * [`bands`]: band functions over `k` grids, their derivative through the
//!   Feynman-Hellmann identity, and CSV export of band diagrams.
//! * [`hermite`]: exact ladder algebra in the Hermite basis, the second order
//!   harmonic expansion of the low bands, quasimode construction, and checks
//!   of the resulting eigenvalue asymptotics.
//! * [`agmon`]: Agmon distances and weighted norms quantifying the radial
//!   localization of the band eigenfunctions.
//! * [`counting`]: effective one dimensional potentials induced by a separable
//!   electric perturbation, Sturm counts of their bound states, and the
//!   Birman-Schwinger style norm and Hilbert-Schmidt estimates that control
//!   the accumulation of eigenvalues.
//!
//! Everything is deterministic: no randomness, no threads, fixed summation
//! orders, so identical inputs produce identical bytes in every export.

pub mod agmon;
pub mod bands;
pub mod counting;
pub mod eigen;
pub mod error;
pub mod fiber;
pub mod grid;
pub mod hermite;
mod quad;

pub use error::{Error, Result};
pub use fiber::{FiberMode, Gauge, SpectralParam};
pub use grid::{Grid1d, GridFunction};
