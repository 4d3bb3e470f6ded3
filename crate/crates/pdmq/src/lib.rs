//! Toolkit for one-dimensional position-dependent-mass (PDM) systems:
//! derive the Killing vector field, invariant measure and Noether momentum
//! of the PDM metric, build the quantum Hamiltonian under the
//! Noether-momenta / Laplace–Beltrami prescription and under von Roos
//! orderings, and solve both the classical dynamics and the quantum
//! spectrum.

pub mod classical;
pub mod expr;
pub mod geometry;
pub mod models;
pub mod numeric;
pub mod quantize;
pub mod spectral;
