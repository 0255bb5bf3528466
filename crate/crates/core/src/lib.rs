//! Exact kernel representations of the transmutation operator for
//! one-dimensional Schrödinger equations y'' - q(x) y = -omega^2 y.
//!
//! The Volterra operator T u(x) = u(x) + int_{-x}^{x} K(x,t) u(t) dt maps
//! solutions of y'' = -omega^2 y to solutions of the perturbed equation.
//! This crate tabulates the formal powers phi_k = T[x^k] from the
//! non-vanishing seed f (f'' = q f, f(0) = 1, f'(0) = 0) and builds three
//! series expansions of K:
//!
//! * Fourier-Legendre ([`kernel_legendre`]) — coefficients beta_n, solutions
//!   as Neumann series of spherical Bessel functions with truncation error
//!   independent of Re omega;
//! * Fourier-Laguerre ([`alt_representations::LaguerreKernel`]) — valid for
//!   Im omega < 1/2;
//! * Fourier-Hermite ([`alt_representations::HermiteKernel`]) — uniform in
//!   strips |Im omega| <= C.
//!
//! On top of the representations sit a Sturm-Liouville eigenvalue solver
//! whose accuracy does not deteriorate with the eigenvalue index
//! ([`spectral`]) and complete solution families / transmuted fundamental
//! solutions for (Delta - q(x)) u = 0 in the plane ([`pde_families`]).

pub mod alt_representations;
pub mod csvio;
pub(crate) mod dd;
pub mod error;
pub mod formal_powers;
pub mod grid;
pub mod kernel_legendre;
pub mod numerics;
pub mod pde_families;
pub mod potential;
pub mod spectral;

pub use error::{Error, Result, Warning};
pub use formal_powers::{build_formal_powers, solve_seed, FormalPowersTable};
pub use grid::Grid;
pub use kernel_legendre::{LegendreKernel, TailEstimate};
pub use potential::Potential;

pub use num_complex::Complex64;
