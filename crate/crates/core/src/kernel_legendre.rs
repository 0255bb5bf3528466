//! Fourier-Legendre representation of the transmutation kernel and the
//! Neumann-series-of-Bessel-functions (NSBF) solution.
//!
//! ```text
//! K(x,t)   = sum_n beta_n(x)/x P_n(t/x),   |t| <= |x|
//! beta_n   = (2n+1)/2 ( sum_{k<=n} l_{k,n} phi_k(x)/x^k  -  1 )
//! u(w,x)   = e^{iwx} + 2 sum_n i^n beta_n(x) j_n(w x)
//! ```
//!
//! with l_{k,n} the coefficient of x^k in P_n. The truncation error of u_N
//! admits the bound eps_N(x) sqrt(2x) for real w (and
//! eps_N(x) sinh(Cx)/C in the strip |Im w| <= C), independent of Re w.
//!
//! The solution series carries an explicit factor 2 relative to the plain
//! plane-wave expansion: int_{-1}^{1} P_n(y) e^{izy} dy = 2 i^n j_n(z), and
//! only with that factor does u(0,x) collapse to f(x) and does
//! x^k + int K(x,t) t^k dt reproduce phi_k.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dd::CDd;
use crate::error::{Error, Result, Warning};
use crate::formal_powers::FormalPowersTable;
use crate::grid::Grid;
use crate::numerics::bessel::spherical_j_array;
use crate::numerics::polynomials::{legendre_coeffs_dd, legendre_eval_all};
use crate::potential::cubic_interp;

/// Extra coefficients kept past the truncation order for tail estimation.
pub const TAIL_MARGIN: usize = 8;

#[derive(Clone, Debug)]
pub struct LegendreKernel {
    grid: Grid,
    n_trunc: usize,
    /// beta[n][node] for n = 0..=n_trunc+TAIL_MARGIN.
    beta: Vec<Vec<Complex64>>,
    real: bool,
    warnings: Vec<Warning>,
}

/// Heuristic truncation-error certificate at one x.
#[derive(Clone, Copy, Debug)]
pub struct TailEstimate {
    /// eps_N(x): estimated L2(-x,x) norm of the dropped kernel tail.
    pub eps: f64,
    /// eps_N(x) sqrt(2x): solution error bound for real omega.
    pub bound_real_omega: f64,
    /// Coefficients fail to decay over the margin window.
    pub stagnant: bool,
}

impl TailEstimate {
    /// eps_N(x) sinh(C x)/C: solution error bound in the strip |Im w| <= C.
    pub fn bound_strip(&self, x: f64, c: f64) -> f64 {
        if c.abs() < 1e-300 {
            self.eps * x.abs()
        } else {
            self.eps * (c * x.abs()).sinh() / c
        }
    }
}

impl LegendreKernel {
    /// Tabulate beta_0..beta_{N+margin} from the formal powers.
    pub fn build(powers: &FormalPowersTable, n_trunc: usize) -> Result<LegendreKernel> {
        let needed = n_trunc + TAIL_MARGIN;
        if needed > powers.k_max() {
            return Err(Error::InvalidArgument(format!(
                "kernel order {n_trunc} + margin {TAIL_MARGIN} needs K_max >= {needed}, \
                 table has {}",
                powers.k_max()
            )));
        }
        let grid = powers.grid().clone();
        let n_nodes = grid.len();
        let i0 = grid.zero_index();
        let beta: Vec<Vec<Complex64>> = (0..=needed)
            .into_par_iter()
            .map(|n| {
                let l = legendre_coeffs_dd(n).expect("order bounded by k_max");
                let half = 0.5 * (2 * n + 1) as f64;
                let mut row = vec![Complex64::new(0.0, 0.0); n_nodes];
                for (i, slot) in row.iter_mut().enumerate() {
                    if i == i0 {
                        continue; // beta_n(0) = 0
                    }
                    let mut acc = CDd::ZERO;
                    for (k, &lk) in l.iter().enumerate() {
                        if lk.hi != 0.0 {
                            acc = acc.add(powers.delta[k][i].mul_dd(lk));
                        }
                    }
                    *slot = acc.mul_f64(half).to_c64();
                }
                row
            })
            .collect();

        let scale = beta
            .iter()
            .flat_map(|row| row.iter())
            .map(|v| v.norm())
            .fold(1e-30, f64::max);
        let real = beta
            .iter()
            .all(|row| row.iter().all(|v| v.im.abs() <= 1e-10 * scale));
        let mut kernel = LegendreKernel { grid, n_trunc, beta, real, warnings: Vec::new() };
        if let Some(w) = kernel.stagnation_warning() {
            kernel.warnings.push(w);
        }
        Ok(kernel)
    }

    fn stagnation_warning(&self) -> Option<Warning> {
        // Compare coefficient magnitudes at the right end of the interval
        // over the margin window.
        let i = self.grid.len() - 1;
        let lo: f64 = (self.n_trunc + 1..=self.n_trunc + TAIL_MARGIN / 2)
            .map(|n| self.beta[n][i].norm())
            .fold(0.0, f64::max);
        let hi: f64 = (self.n_trunc + TAIL_MARGIN / 2 + 1..=self.n_trunc + TAIL_MARGIN)
            .map(|n| self.beta[n][i].norm())
            .fold(0.0, f64::max);
        if hi > lo && hi > 1e-14 {
            Some(Warning::TailStagnant { order: self.n_trunc })
        } else {
            None
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn truncation_order(&self) -> usize {
        self.n_trunc
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// beta_n sampled on the grid (n may reach into the margin window).
    pub fn beta(&self, n: usize) -> &[Complex64] {
        &self.beta[n]
    }

    /// True when every coefficient is real (real-valued q).
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// beta_n at an arbitrary x by local cubic interpolation.
    pub fn beta_at(&self, n: usize, x: f64) -> Complex64 {
        if let Some(i) = self.grid.index_of(x) {
            self.beta[n][i]
        } else {
            cubic_interp(&self.grid, &self.beta[n], x)
        }
    }

    /// Truncated kernel K_N(x,t) = sum_{n<=N} beta_n(x)/x P_n(t/x).
    pub fn kernel_value(&self, x: f64, t: f64) -> Result<Complex64> {
        if x == 0.0 {
            return Err(Error::Domain("kernel evaluation requires x != 0".into()));
        }
        if t.abs() > x.abs() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "kernel support is |t| <= |x|: t = {t}, x = {x}"
            )));
        }
        let s = (t / x).clamp(-1.0, 1.0);
        let p = legendre_eval_all(self.n_trunc, s);
        let mut acc = Complex64::new(0.0, 0.0);
        for n in (0..=self.n_trunc).rev() {
            acc += self.beta_at(n, x) * p[n];
        }
        Ok(acc / x)
    }

    /// u_N(w, x) at a grid node.
    pub fn solution(&self, omega: Complex64, x: f64) -> Result<Complex64> {
        let i = self.grid.index_of(x).ok_or_else(|| {
            Error::InvalidArgument(format!("x = {x} is not a grid node"))
        })?;
        Ok(self.solution_at_node(omega, i))
    }

    pub fn solution_at_node(&self, omega: Complex64, i: usize) -> Complex64 {
        let x = self.grid.x(i);
        let z = omega * x;
        let j = spherical_j_array(self.n_trunc, z);
        let mut acc = Complex64::new(0.0, 0.0);
        // i^n cycles through (1, i, -1, -i)
        for n in (0..=self.n_trunc).rev() {
            let term = self.beta[n][i] * j[n];
            acc += match n % 4 {
                0 => term,
                1 => Complex64::new(0.0, 1.0) * term,
                2 => -term,
                _ => Complex64::new(0.0, -1.0) * term,
            };
        }
        (Complex64::new(0.0, 1.0) * omega * x).exp() + 2.0 * acc
    }

    /// u_N over a batch of spectral parameters, one row per omega.
    pub fn solution_batch(&self, omegas: &[Complex64]) -> Vec<Vec<Complex64>> {
        omegas
            .par_iter()
            .map(|&w| (0..self.grid.len()).map(|i| self.solution_at_node(w, i)).collect())
            .collect()
    }

    /// Tail estimate at a grid node abscissa.
    pub fn tail_estimate(&self, x: f64) -> TailEstimate {
        let i = self.grid.nearest_index(x);
        let x = self.grid.x(i);
        if x == 0.0 {
            return TailEstimate { eps: 0.0, bound_real_omega: 0.0, stagnant: false };
        }
        let n0 = self.n_trunc + 1;
        let n1 = self.n_trunc + TAIL_MARGIN;
        let mut window = 0.0f64;
        for n in n0..=n1 {
            window += self.beta[n][i].norm_sqr() / (2 * n + 1) as f64;
        }
        let first = self.beta[n0][i].norm();
        let last = self.beta[n1][i].norm();
        let stagnant = last > first && last > 1e-14;
        // Geometric extrapolation of the part beyond the window.
        let rho = if first > 0.0 && last > 0.0 {
            (last / first).powf(1.0 / (n1 - n0) as f64).clamp(1e-8, 0.95)
        } else {
            0.5
        };
        let beyond = last * last / (2 * n1 + 3) as f64 * rho * rho / (1.0 - rho * rho);
        let eps = ((2.0 / x.abs()) * (window + beyond)).sqrt();
        TailEstimate { eps, bound_real_omega: eps * (2.0 * x.abs()).sqrt(), stagnant }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::gauss_legendre;
    use crate::potential::Potential;

    fn build(q: &Potential, b: f64, m: usize, n: usize) -> LegendreKernel {
        let grid = Grid::symmetric(b, m).unwrap();
        let powers = FormalPowersTable::build(q, &grid, n + TAIL_MARGIN).unwrap();
        LegendreKernel::build(&powers, n).unwrap()
    }

    #[test]
    fn free_potential_kernel_vanishes() {
        let kern = build(&Potential::zero(), 1.0, 400, 16);
        for n in 0..=16 {
            assert!(kern.beta(n).iter().all(|v| v.norm() <= 1e-12));
        }
        assert!(kern.kernel_value(0.5, 0.25).unwrap().norm() <= 1e-12);
        let t = kern.tail_estimate(1.0);
        assert!(t.eps <= 1e-12);
    }

    #[test]
    fn beta0_and_beta1_closed_forms() {
        // q = 1: beta_0(1) = (cosh 1 - 1)/2, beta_1(1) = 3/2 (sinh 1 - 1)
        let kern = build(&Potential::constant(1.0), 1.0, 2000, 8);
        let i = kern.grid().index_of(1.0).unwrap();
        let b0 = kern.beta(0)[i].re;
        let b1 = kern.beta(1)[i].re;
        assert!((b0 - (1f64.cosh() - 1.0) / 2.0).abs() < 1e-10, "beta0 = {b0}");
        assert!((b1 - 1.5 * (1f64.sinh() - 1.0)).abs() < 1e-10, "beta1 = {b1}");
        let i0 = kern.grid().zero_index();
        for n in 0..=8 {
            assert_eq!(kern.beta(n)[i0], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn kernel_collapses_to_coefficient_sum_on_diagonal() {
        // P_n(1) = 1, so K_N(1,1) = sum_n beta_n(1)
        let kern = build(&Potential::constant(1.0), 1.0, 1000, 12);
        let i = kern.grid().index_of(1.0).unwrap();
        let sum: Complex64 = (0..=12).map(|n| kern.beta(n)[i]).sum();
        let k = kern.kernel_value(1.0, 1.0).unwrap();
        assert!((k - sum).norm() < 1e-12);
    }

    #[test]
    fn solution_matches_constant_coefficient_closed_form() {
        // q = 1, w = 5: u = cos(Wx) + 5i sin(Wx)/W, W = sqrt(24)
        let kern = build(&Potential::constant(1.0), 1.0, 2000, 20);
        let w = Complex64::new(5.0, 0.0);
        let cap = 24f64.sqrt();
        for &x in &[0.25, 0.5, 1.0] {
            let u = kern.solution(w, x).unwrap();
            let exact = Complex64::new((cap * x).cos(), 5.0 * (cap * x).sin() / cap);
            assert!((u - exact).norm() < 1e-9, "x={x}: {u} vs {exact}");
        }
    }

    #[test]
    fn omega_zero_returns_seed() {
        let grid = Grid::symmetric(1.0, 500).unwrap();
        let q = Potential::from_real_fn(|x| x.exp());
        let powers = FormalPowersTable::build(&q, &grid, 24).unwrap();
        let kern = LegendreKernel::build(&powers, 16).unwrap();
        for i in (0..grid.len()).step_by(37) {
            let u = kern.solution_at_node(Complex64::new(0.0, 0.0), i);
            assert!((u - powers.f()[i]).norm() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn initial_value_is_one_for_every_omega() {
        let kern = build(&Potential::from_real_fn(|x| 1.0 + x * x), 1.0, 300, 12);
        let i0 = kern.grid().zero_index();
        for &w in &[0.0, 1.0, 17.0, 150.0] {
            let u = kern.solution_at_node(Complex64::new(w, 0.0), i0);
            assert_eq!(u, Complex64::new(1.0, 0.0), "omega={w}");
        }
    }

    #[test]
    fn free_solution_is_plane_wave() {
        let kern = build(&Potential::zero(), 1.0, 400, 16);
        for &w in &[0.0, 1.0, 10.0, 100.0] {
            for i in (0..kern.grid().len()).step_by(41) {
                let x = kern.grid().x(i);
                let u = kern.solution_at_node(Complex64::new(w, 0.0), i);
                let exact = (Complex64::new(0.0, w * x)).exp();
                assert!((u - exact).norm() < 1e-12, "w={w} x={x}");
            }
        }
    }

    #[test]
    fn transmutation_reproduces_formal_powers() {
        // x^k + int_{-x}^{x} K_N(x,t) t^k dt = phi_k(x); the t-integral of a
        // degree N+k polynomial is exact under a 40-point Gauss rule.
        let grid = Grid::symmetric(1.2, 1200).unwrap();
        let q = Potential::from_real_fn(|x| x.exp());
        let powers = FormalPowersTable::build(&q, &grid, 28).unwrap();
        let kern = LegendreKernel::build(&powers, 20).unwrap();
        let (nodes, weights) = gauss_legendre(40);
        for &x in &[0.5, 1.0] {
            let i = grid.index_of(x).unwrap();
            for k in 0..=10usize {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&s, &w) in nodes.iter().zip(&weights) {
                    let t = s * x;
                    acc += kern.kernel_value(x, t).unwrap() * t.powi(k as i32) * w;
                }
                acc *= x; // dt = x ds
                let lhs = x.powi(k as i32) + acc;
                let rhs = powers.phi(k)[i];
                let scale = rhs.norm().max(1.0);
                assert!(
                    (lhs - rhs).norm() <= 1e-9 * scale,
                    "k={k} x={x}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn parseval_identity() {
        // int |K_N(x,t)|^2 dt = (2/x) sum |beta_n|^2/(2n+1)
        let kern = build(&Potential::constant(1.0), 1.0, 1000, 12);
        let x = 1.0;
        let i = kern.grid().index_of(x).unwrap();
        let direct: f64 = {
            let (nodes, weights) = gauss_legendre(20);
            let mut acc = 0.0;
            for (&s, &w) in nodes.iter().zip(&weights) {
                acc += kern.kernel_value(x, s * x).unwrap().norm_sqr() * w;
            }
            acc * x
        };
        let coeff: f64 = (0..=12)
            .map(|n| kern.beta(n)[i].norm_sqr() / (2 * n + 1) as f64)
            .sum::<f64>()
            * (2.0 / x);
        assert!(
            (direct - coeff).abs() <= 1e-8 * coeff.max(1e-30),
            "{direct} vs {coeff}"
        );
    }

    #[test]
    fn tail_estimate_decreases_with_order() {
        // the estimate tracks the genuine coefficient decay until the
        // quadrature bias floor of the high-order coefficients is reached
        let q = Potential::constant(1.0);
        let grid = Grid::symmetric(1.0, 2000).unwrap();
        let powers = FormalPowersTable::build(&q, &grid, 24).unwrap();
        let mut last = f64::INFINITY;
        for &n in &[2usize, 4, 6, 8] {
            let kern = LegendreKernel::build(&powers, n).unwrap();
            let eps = kern.tail_estimate(1.0).eps;
            assert!(eps < 0.5 * last, "N={n}: eps={eps} last={last}");
            last = eps;
        }
    }

    #[test]
    fn conjugate_symmetry_in_omega() {
        let kern = build(&Potential::constant(1.0), 1.0, 500, 16);
        let w = Complex64::new(3.0, 0.0);
        for i in (0..kern.grid().len()).step_by(53) {
            let a = kern.solution_at_node(w, i);
            let b = kern.solution_at_node(-w, i);
            assert!((a.conj() - b).norm() < 1e-12);
        }
    }
}
