//! Self-contained numerical kernels: special functions, quadrature,
//! least squares, and the adaptive ODE reference integrator.

pub mod bessel;
pub mod legendre_q;
pub mod lstsq;
pub mod ode;
pub mod polynomials;
pub mod quadrature;

pub use bessel::{spherical_bessel_j, spherical_j_array};
pub use legendre_q::{legendre_q, legendre_q_array};
pub use lstsq::{lstsq, lstsq_real, LstsqSolution};
pub use ode::{ode_oracle, ode_solve_on_grid, OdeResult};
pub use polynomials::{
    hermite_coeffs, laguerre_eval, laguerre_eval_all, legendre_coeffs, legendre_eval_all,
    PolynomialCoeffs,
};
pub use quadrature::{antiderivative, gauss_integrate, gauss_legendre};
