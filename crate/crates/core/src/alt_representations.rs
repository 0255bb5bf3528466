//! Fourier-Laguerre and Fourier-Hermite representations of the
//! transmutation kernel with their omega-regions of validity.
//!
//! Laguerre: extend K by zero to t < -x and expand K(x, x-t) e^{t} in
//! Laguerre polynomials; the solution becomes
//!
//! ```text
//! u(w,x) = e^{iwx} (1 + sum_n a_n(x) (iw)^n / (1+iw)^{n+1}),   Im w < 1/2.
//! ```
//!
//! Hermite: extend K by zero outside the triangle and expand in
//! H_n(y) e^{-y^2}; then
//!
//! ```text
//! u(w,x) = e^{iwx} + sqrt(pi) e^{-w^2/4} sum_n c_n(x) (iw)^n,
//! ```
//!
//! accurate uniformly in strips |Im w| <= C.
//!
//! Both coefficient formulas are alternating sums over the formal-power
//! differences phi_k - x^k; the combinatorial factors are built by ratio
//! updates (never whole factorials) and the sums are accumulated in
//! compensated double-double arithmetic. A coefficient whose magnitude falls
//! below 1e-12 of its own largest partial sum is flagged: its digits are
//! cancellation noise.

use num_complex::Complex64;

use crate::dd::{CDd, Dd};
use crate::error::{Error, Result, Warning};
use crate::formal_powers::FormalPowersTable;
use crate::grid::Grid;
use crate::numerics::polynomials::{hermite_scaled_coeffs_dd, laguerre_eval_all};

pub const MAX_LAGUERRE_ORDER: usize = 120;
pub const MAX_HERMITE_ORDER: usize = 100;
pub const TAIL_MARGIN: usize = 8;
const CANCELLATION_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct LaguerreKernel {
    grid: Grid,
    n_trunc: usize,
    /// a[n][node] for n = 0..=n_trunc+TAIL_MARGIN.
    a: Vec<Vec<Complex64>>,
    warnings: Vec<Warning>,
}

#[derive(Clone, Debug)]
pub struct HermiteKernel {
    grid: Grid,
    n_trunc: usize,
    /// c[n][node] for n = 0..=n_trunc+TAIL_MARGIN.
    c: Vec<Vec<Complex64>>,
    warnings: Vec<Warning>,
}

impl LaguerreKernel {
    /// a_n(x) = sum_{j<=n} (-1)^j (phi_j - x^j)
    ///          sum_{k=j}^n (-1)^k n!/((n-k)! k! (k-j)! j!) x^{k-j}.
    pub fn build(powers: &FormalPowersTable, n_trunc: usize) -> Result<LaguerreKernel> {
        if n_trunc > MAX_LAGUERRE_ORDER {
            return Err(Error::OrderTooLarge { n: n_trunc, max: MAX_LAGUERRE_ORDER });
        }
        let needed = n_trunc + TAIL_MARGIN;
        if needed > powers.k_max() {
            return Err(Error::InvalidArgument(format!(
                "Laguerre order {n_trunc} + margin {TAIL_MARGIN} needs K_max >= {needed}, \
                 table has {}",
                powers.k_max()
            )));
        }
        let grid = powers.grid().clone();
        let n_nodes = grid.len();
        let mut a = Vec::with_capacity(needed + 1);
        let mut warnings = Vec::new();
        for n in 0..=needed {
            let mut row = vec![Complex64::new(0.0, 0.0); n_nodes];
            let mut worst: Option<Warning> = None;
            for (i, slot) in row.iter_mut().enumerate() {
                let x = grid.x(i);
                let mut acc = CDd::ZERO;
                let mut peak = 0.0f64;
                // Start coefficient of the inner sum times the outer sign:
                // (-1)^j (phi_j - x^j) carries (-1)^j, the k = j term another
                // (-1)^j, so the combined head is +C(n,j)/j!.
                let mut t_start = Dd::ONE;
                for j in 0..=n {
                    if j > 0 {
                        t_start = t_start
                            .mul_f64((n - j + 1) as f64)
                            .div(Dd::from_f64((j * j) as f64));
                    }
                    // inner sum over k with ratio updates:
                    // t_{k+1}/t_k = -(n-k) x / ((k+1)(k+1-j))
                    let mut term = t_start;
                    let mut inner = term;
                    for k in j..n {
                        term = term
                            .mul_f64(-((n - k) as f64) * x)
                            .div(Dd::from_f64(((k + 1) * (k + 1 - j)) as f64));
                        inner = inner.add(term);
                    }
                    let contrib = powers.diff[j][i].mul_dd(inner);
                    peak = peak.max(contrib.norm()).max(acc.norm());
                    acc = acc.add(contrib);
                }
                *slot = acc.to_c64();
                let mag = slot.norm();
                if peak > 0.0 && mag < CANCELLATION_FLOOR * peak && n <= n_trunc {
                    let replace = match &worst {
                        None => true,
                        Some(Warning::Cancellation { magnitude, .. }) => mag < *magnitude,
                        _ => false,
                    };
                    if replace {
                        worst = Some(Warning::Cancellation {
                            n,
                            magnitude: mag,
                            floor: CANCELLATION_FLOOR * peak,
                        });
                    }
                }
            }
            if let Some(w) = worst {
                warnings.push(w);
            }
            a.push(row);
        }
        Ok(LaguerreKernel { grid, n_trunc, a, warnings })
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

    pub fn coefficient(&self, n: usize) -> &[Complex64] {
        &self.a[n]
    }

    /// Truncated solution; requires Im w < 1/2, w != i, and x >= 0 (the
    /// zero-extension of the kernel to t < -x that the expansion rests on
    /// has no analogue on the negative half-axis).
    pub fn solution(&self, omega: Complex64, x: f64) -> Result<Complex64> {
        if x < 0.0 {
            return Err(Error::Domain(format!(
                "Laguerre representation is defined for x >= 0 (got {x})"
            )));
        }
        if omega.im >= 0.5 {
            return Err(Error::Domain(format!(
                "Laguerre representation requires Im omega < 1/2 (got {})",
                omega.im
            )));
        }
        let iw = Complex64::new(0.0, 1.0) * omega;
        let denom = 1.0 + iw;
        if denom.norm() < 1e-12 {
            return Err(Error::Domain("omega = i is a pole of the Laguerre series".into()));
        }
        let i = self
            .grid
            .index_of(x)
            .ok_or_else(|| Error::InvalidArgument(format!("x = {x} is not a grid node")))?;
        let r = iw / denom;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut rn = Complex64::new(1.0, 0.0);
        for n in 0..=self.n_trunc {
            acc += self.a[n][i] * rn;
            rn *= r;
        }
        let series = 1.0 + acc / denom;
        Ok((Complex64::new(0.0, 1.0) * omega * x).exp() * series)
    }

    /// Extended kernel K~(x,y) = sum_n a_n(x) L_n(x-y) e^{-(x-y)} on
    /// -x <= y <= x.
    pub fn kernel_value(&self, x: f64, y: f64) -> Result<Complex64> {
        if x <= 0.0 {
            return Err(Error::Domain("Laguerre kernel evaluation needs x > 0".into()));
        }
        if y.abs() > x * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "kernel support is |y| <= x: y = {y}, x = {x}"
            )));
        }
        let i = self
            .grid
            .index_of(x)
            .ok_or_else(|| Error::InvalidArgument(format!("x = {x} is not a grid node")))?;
        let t = x - y;
        let lag = laguerre_eval_all(self.n_trunc, t);
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..=self.n_trunc {
            acc += self.a[n][i] * lag[n];
        }
        Ok(acc * (-t).exp())
    }

    /// Mirrors the Legendre tail heuristic with the Laguerre-function
    /// Parseval weights (the functions L_n(t) e^{-t} are orthonormal in
    /// L2(0,inf; e^{t})).
    pub fn tail_estimate(&self, x: f64) -> TailEstimateAlt {
        let i = self.grid.nearest_index(x);
        let n0 = self.n_trunc + 1;
        let n1 = self.n_trunc + TAIL_MARGIN;
        let window: f64 = (n0..=n1).map(|n| self.a[n][i].norm_sqr()).sum();
        let first = self.a[n0][i].norm();
        let last = self.a[n1][i].norm();
        let stagnant = last > first && last > 1e-14;
        let rho = if first > 0.0 && last > 0.0 {
            (last / first).powf(1.0 / (n1 - n0) as f64).clamp(1e-8, 0.95)
        } else {
            0.5
        };
        let beyond = last * last * rho * rho / (1.0 - rho * rho);
        TailEstimateAlt { eps: (window + beyond).sqrt(), stagnant }
    }
}

/// Heuristic tail certificate for the Laguerre/Hermite representations
/// (the expansions come with no computable error expression; this mirrors
/// the Legendre window heuristic and is labeled accordingly).
#[derive(Clone, Copy, Debug)]
pub struct TailEstimateAlt {
    pub eps: f64,
    pub stagnant: bool,
}

impl HermiteKernel {
    /// c_n(x) = 1/(sqrt(pi) n! 2^n) sum_{k<=n} h_{k,n} (phi_k(x) - x^k).
    pub fn build(powers: &FormalPowersTable, n_trunc: usize) -> Result<HermiteKernel> {
        if n_trunc > MAX_HERMITE_ORDER {
            return Err(Error::OrderTooLarge { n: n_trunc, max: MAX_HERMITE_ORDER });
        }
        let needed = n_trunc + TAIL_MARGIN;
        if needed > powers.k_max() {
            return Err(Error::InvalidArgument(format!(
                "Hermite order {n_trunc} + margin {TAIL_MARGIN} needs K_max >= {needed}, \
                 table has {}",
                powers.k_max()
            )));
        }
        let grid = powers.grid().clone();
        let n_nodes = grid.len();
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        let mut c = Vec::with_capacity(needed + 1);
        let mut warnings = Vec::new();
        for n in 0..=needed {
            let scaled = hermite_scaled_coeffs_dd(n); // h_{k,n}/(n! 2^n)
            let mut row = vec![Complex64::new(0.0, 0.0); n_nodes];
            let mut worst: Option<Warning> = None;
            for (i, slot) in row.iter_mut().enumerate() {
                let mut acc = CDd::ZERO;
                let mut peak = 0.0f64;
                for (k, &hk) in scaled.iter().enumerate() {
                    if hk.hi != 0.0 {
                        let contrib = powers.diff[k][i].mul_dd(hk);
                        peak = peak.max(contrib.norm()).max(acc.norm());
                        acc = acc.add(contrib);
                    }
                }
                *slot = acc.mul_f64(inv_sqrt_pi).to_c64();
                let mag = slot.norm();
                if peak > 0.0 && mag < CANCELLATION_FLOOR * peak * inv_sqrt_pi && n <= n_trunc {
                    let replace = match &worst {
                        None => true,
                        Some(Warning::Cancellation { magnitude, .. }) => mag < *magnitude,
                        _ => false,
                    };
                    if replace {
                        worst = Some(Warning::Cancellation {
                            n,
                            magnitude: mag,
                            floor: CANCELLATION_FLOOR * peak * inv_sqrt_pi,
                        });
                    }
                }
            }
            if let Some(w) = worst {
                warnings.push(w);
            }
            c.push(row);
        }
        Ok(HermiteKernel { grid, n_trunc, c, warnings })
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

    pub fn coefficient(&self, n: usize) -> &[Complex64] {
        &self.c[n]
    }

    /// Reliable |omega| range of the truncated series.
    pub fn magnitude_limit(&self) -> f64 {
        2.0 * (self.n_trunc as f64).sqrt()
    }

    /// Truncated solution together with an out-of-range flag: past
    /// |omega| = 2 sqrt(N) the prefactor e^{-w^2/4} has not yet tamed the
    /// growing powers (iw)^n within the kept orders.
    pub fn solution(&self, omega: Complex64, x: f64) -> Result<(Complex64, Option<Warning>)> {
        let i = self
            .grid
            .index_of(x)
            .ok_or_else(|| Error::InvalidArgument(format!("x = {x} is not a grid node")))?;
        let iw = Complex64::new(0.0, 1.0) * omega;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = Complex64::new(1.0, 0.0);
        for n in 0..=self.n_trunc {
            acc += self.c[n][i] * p;
            p *= iw;
        }
        let prefactor = std::f64::consts::PI.sqrt() * (-omega * omega / 4.0).exp();
        let u = (Complex64::new(0.0, 1.0) * omega * x).exp() + prefactor * acc;
        let warn = if omega.norm() > self.magnitude_limit() {
            Some(Warning::Magnitude { omega_abs: omega.norm(), limit: self.magnitude_limit() })
        } else {
            None
        };
        Ok((u, warn))
    }

    pub fn tail_estimate(&self, x: f64) -> TailEstimateAlt {
        // Parseval weights sqrt(pi) n! 2^n of the Hermite functions, in
        // log space.
        let i = self.grid.nearest_index(x);
        let n0 = self.n_trunc + 1;
        let n1 = self.n_trunc + TAIL_MARGIN;
        let mut ln_fact = 0.0f64;
        for j in 1..=n0 {
            ln_fact += (j as f64).ln();
        }
        let mut window = 0.0f64;
        let mut ln_w = 0.5 * std::f64::consts::PI.ln() + ln_fact + n0 as f64 * 2f64.ln();
        for n in n0..=n1 {
            if n > n0 {
                ln_w += (n as f64).ln() + 2f64.ln();
            }
            let mag = self.c[n][i].norm();
            if mag > 0.0 {
                window += (2.0 * mag.ln() + ln_w).exp();
            }
        }
        let first = self.c[n0][i].norm();
        let last = self.c[n1][i].norm();
        TailEstimateAlt { eps: window.sqrt(), stagnant: last > first && last > 1e-14 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;

    fn powers_for(q: &Potential, b: f64, m: usize, k_max: usize) -> FormalPowersTable {
        let grid = Grid::symmetric(b, m).unwrap();
        FormalPowersTable::build(q, &grid, k_max).unwrap()
    }

    #[test]
    fn free_potential_coefficients_vanish() {
        let p = powers_for(&Potential::zero(), 1.0, 300, 20);
        let lag = LaguerreKernel::build(&p, 12).unwrap();
        let her = HermiteKernel::build(&p, 12).unwrap();
        for n in 0..=12 {
            assert!(lag.coefficient(n).iter().all(|v| v.norm() <= 1e-12));
            assert!(her.coefficient(n).iter().all(|v| v.norm() <= 1e-12));
        }
        let w = Complex64::new(3.0, 0.0);
        let x = 0.5;
        let exact = (Complex64::new(0.0, 3.0 * x)).exp();
        assert!((lag.solution(w, x).unwrap() - exact).norm() < 1e-12);
        assert!((her.solution(w, x).unwrap().0 - exact).norm() < 1e-12);
    }

    #[test]
    fn a0_is_f_minus_one() {
        let p = powers_for(&Potential::constant(1.0), 1.0, 1000, 16);
        let lag = LaguerreKernel::build(&p, 8).unwrap();
        for (i, &f) in p.f().iter().enumerate() {
            assert!((lag.coefficient(0)[i] - (f - 1.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn a1_hand_expansion() {
        // n=1: a_1 = (f-1)(1-x) + (phi_1 - x); at q=1, x=1: sinh(1) - 1
        let p = powers_for(&Potential::constant(1.0), 1.0, 2000, 16);
        let lag = LaguerreKernel::build(&p, 8).unwrap();
        let i = p.grid().index_of(1.0).unwrap();
        let a1 = lag.coefficient(1)[i].re;
        assert!((a1 - (1f64.sinh() - 1.0)).abs() < 1e-10, "a1 = {a1}");
        // a_n(0) = 0
        let i0 = p.grid().zero_index();
        for n in 0..=8 {
            assert!(lag.coefficient(n)[i0].norm() < 1e-30);
        }
    }

    #[test]
    fn c0_and_c1_closed_forms() {
        let p = powers_for(&Potential::constant(1.0), 1.0, 2000, 16);
        let her = HermiteKernel::build(&p, 8).unwrap();
        let i = p.grid().index_of(1.0).unwrap();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let c0 = her.coefficient(0)[i].re;
        let c1 = her.coefficient(1)[i].re;
        assert!((c0 - (1f64.cosh() - 1.0) / sqrt_pi).abs() < 1e-11, "c0 = {c0}");
        assert!((c1 - (1f64.sinh() - 1.0) / sqrt_pi).abs() < 1e-11, "c1 = {c1}");
    }

    #[test]
    fn omega_zero_collapse_all_representations() {
        let q = Potential::from_real_fn(|x| x.exp());
        let p = powers_for(&q, 1.0, 800, 24);
        let lag = LaguerreKernel::build(&p, 16).unwrap();
        let her = HermiteKernel::build(&p, 16).unwrap();
        let w = Complex64::new(0.0, 0.0);
        for i in (0..p.grid().len()).step_by(61) {
            let x = p.grid().x(i);
            let f = p.f()[i];
            if x >= 0.0 {
                assert!((lag.solution(w, x).unwrap() - f).norm() < 1e-12, "laguerre x={x}");
            }
            assert!((her.solution(w, x).unwrap().0 - f).norm() < 1e-12, "hermite x={x}");
        }
    }

    #[test]
    fn laguerre_solution_matches_closed_form() {
        // The Fourier-Laguerre coefficients of this kernel decay slowly, so
        // at omega = 5 (|iw/(1+iw)| = 0.98) the truncated series is only as
        // good as its own certificate; at omega = 1 the geometric ratio
        // 0.707^N does the work.
        let p = powers_for(&Potential::constant(1.0), 1.0, 2000, 48);
        let lag = LaguerreKernel::build(&p, 40).unwrap();
        let exact = |w: f64| {
            let cap = (w * w - 1.0).sqrt();
            Complex64::new(cap.cos(), w * cap.sin() / cap)
        };
        let u1 = lag.solution(Complex64::new(1.0, 0.0), 1.0).unwrap();
        let e1 = {
            // omega = 1 hits cap = 0: u = cos(0) + i*1*x -> 1 + i
            Complex64::new(1.0, 1.0)
        };
        assert!((u1 - e1).norm() < 1e-6, "{u1} vs {e1}");
        let u5 = lag.solution(Complex64::new(5.0, 0.0), 1.0).unwrap();
        let err5 = (u5 - exact(5.0)).norm();
        let cert = lag.tail_estimate(1.0).eps;
        assert!(err5 <= 3.0 * cert, "err {err5:.3e} vs certificate {cert:.3e}");
        assert!(cert < 0.1, "certificate unexpectedly large: {cert:.3e}");
    }

    #[test]
    fn laguerre_coefficients_match_projection_oracle() {
        // independent route: a_n(x) = int_0^{2x} K(x, x-t) L_n(t) dt with K
        // evaluated from the Fourier-Legendre kernel
        let q = Potential::constant(1.0);
        let p = powers_for(&q, 1.0, 2000, 32);
        let lag = LaguerreKernel::build(&p, 12).unwrap();
        let kern = crate::kernel_legendre::LegendreKernel::build(&p, 24).unwrap();
        let x = 1.0;
        let i = p.grid().index_of(x).unwrap();
        let (nodes, weights) = crate::numerics::quadrature::gauss_legendre(60);
        for n in [0usize, 1, 2, 5, 9, 12] {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&s, &w) in nodes.iter().zip(&weights) {
                let t = x * (s + 1.0); // t in [0, 2x]
                let l = crate::numerics::polynomials::laguerre_eval_all(n, t)[n];
                acc += kern.kernel_value(x, x - t).unwrap() * l * w;
            }
            acc *= x; // dt = x ds
            let direct = lag.coefficient(n)[i];
            assert!(
                (acc - direct).norm() < 1e-8,
                "n={n}: projection {acc} vs formula {direct}"
            );
        }
    }

    #[test]
    fn hermite_coefficients_match_projection_oracle() {
        // c_n(x) = 1/(sqrt(pi) n! 2^n) int_{-x}^{x} K(x,y) H_n(y) dy
        let q = Potential::constant(1.0);
        let p = powers_for(&q, 1.0, 2000, 32);
        let her = HermiteKernel::build(&p, 12).unwrap();
        let kern = crate::kernel_legendre::LegendreKernel::build(&p, 24).unwrap();
        let x = 1.0;
        let i = p.grid().index_of(x).unwrap();
        let (nodes, weights) = crate::numerics::quadrature::gauss_legendre(60);
        for n in [0usize, 1, 3, 7, 12] {
            let hc = crate::numerics::polynomials::hermite_coeffs(n).unwrap();
            let mut acc = Complex64::new(0.0, 0.0);
            for (&s, &w) in nodes.iter().zip(&weights) {
                let y = x * s;
                acc += kern.kernel_value(x, y).unwrap() * hc.eval(y) * w;
            }
            acc *= x;
            let mut fact = 1.0f64;
            for j in 1..=n {
                fact *= j as f64;
            }
            let expected = acc / (std::f64::consts::PI.sqrt() * fact * 2f64.powi(n as i32));
            let direct = her.coefficient(n)[i];
            assert!(
                (expected - direct).norm() < 1e-10,
                "n={n}: projection {expected} vs formula {direct}"
            );
        }
    }

    #[test]
    fn hermite_solution_matches_closed_form() {
        let p = powers_for(&Potential::constant(1.0), 1.0, 2000, 48);
        let her = HermiteKernel::build(&p, 40).unwrap();
        let w = 2.0f64;
        let cap = (w * w - 1.0).sqrt();
        let (u, warn) = her.solution(Complex64::new(w, 0.0), 1.0).unwrap();
        assert!(warn.is_none());
        let exact = Complex64::new(cap.cos(), w * cap.sin() / cap);
        assert!((u - exact).norm() < 1e-7, "{u} vs {exact}");
    }

    #[test]
    fn laguerre_domain_errors() {
        let p = powers_for(&Potential::constant(1.0), 1.0, 300, 16);
        let lag = LaguerreKernel::build(&p, 8).unwrap();
        assert!(lag.solution(Complex64::new(1.0, 0.6), 1.0).is_err());
        assert!(lag.solution(Complex64::new(0.0, 0.49), 1.0).is_ok());
    }

    #[test]
    fn hermite_magnitude_warning() {
        let p = powers_for(&Potential::constant(1.0), 1.0, 300, 24);
        let her = HermiteKernel::build(&p, 16).unwrap();
        let (_, warn) = her.solution(Complex64::new(9.0, 0.0), 1.0).unwrap();
        assert!(warn.is_some());
    }

    #[test]
    fn laguerre_kernel_collapses_at_diagonal() {
        // y = x -> L_n(0) = 1, weight 1: K~(x,x) = sum a_n(x)
        let p = powers_for(&Potential::constant(1.0), 1.0, 1000, 20);
        let lag = LaguerreKernel::build(&p, 12).unwrap();
        let i = p.grid().index_of(1.0).unwrap();
        let sum: Complex64 = (0..=12).map(|n| lag.coefficient(n)[i]).sum();
        let k = lag.kernel_value(1.0, 1.0).unwrap();
        assert!((k - sum).norm() < 1e-12);
    }
}
