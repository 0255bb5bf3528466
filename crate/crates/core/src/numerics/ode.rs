//! Adaptive Dormand-Prince 5(4) integration of y'' = (q(x) - omega^2) y.
//!
//! Used as the independent reference ("oracle") for every series
//! representation and for the seed solution f. Initial data are
//! y(0) = 1, y'(0) = i omega.
//!
//! Oscillation handling: for moderate |omega| the equation is integrated
//! directly with the step capped at 0.1/|omega|; for large |omega| the
//! substitution y = e^{i omega x} v removes the carrier oscillation exactly
//! (v'' = q v - 2 i omega v'), so the step is governed by the scale of q
//! rather than omega and the accuracy does not degrade with omega.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::Potential;

pub const MIN_TOL: f64 = 1e-13;
const MIN_STEP: f64 = 1e-12;
const ENVELOPE_THRESHOLD: f64 = 8.0;

/// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// 5th-order weights (same as the last A row) and the embedded 4th-order row.
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = [Complex64; 2];

#[derive(Clone, Copy, Debug)]
pub struct OdeResult {
    pub value: Complex64,
    pub derivative: Complex64,
    pub steps: usize,
}

/// Potential view over one smooth segment: evaluations at an endpoint that
/// carries a jump are nudged into the open interval so that every Runge-Kutta
/// stage sees the correct one-sided limit.
#[derive(Clone, Copy)]
struct SegmentQ<'a> {
    q: &'a Potential,
    lo: f64,
    hi: f64,
    clamp_lo: bool,
    clamp_hi: bool,
}

impl SegmentQ<'_> {
    fn eval(&self, x: f64) -> Complex64 {
        let delta = 1e-9 * (self.hi - self.lo);
        let mut xx = x;
        if self.clamp_lo {
            xx = xx.max(self.lo + delta);
        }
        if self.clamp_hi {
            xx = xx.min(self.hi - delta);
        }
        self.q.eval(xx)
    }
}

fn rhs_direct(q: &SegmentQ<'_>, omega2: Complex64, x: f64, y: &State) -> State {
    [y[1], (q.eval(x) - omega2) * y[0]]
}

fn rhs_envelope(q: &SegmentQ<'_>, omega: Complex64, x: f64, v: &State) -> State {
    let two_i_omega = Complex64::new(0.0, 2.0) * omega;
    [v[1], q.eval(x) * v[0] - two_i_omega * v[1]]
}

fn is_jump(jumps: &[f64], x: f64) -> bool {
    jumps.iter().any(|&j| (j - x).abs() <= 1e-12 * (1.0 + x.abs()))
}

/// Split points strictly between `from` and `to`, ordered along the
/// direction of integration.
fn cuts_between(jumps: &[f64], from: f64, to: f64) -> Vec<f64> {
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    let eps = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    let mut cuts: Vec<f64> =
        jumps.iter().copied().filter(|&j| j > lo + eps && j < hi - eps).collect();
    cuts.sort_by(f64::total_cmp);
    if from > to {
        cuts.reverse();
    }
    cuts
}

/// One embedded step; returns the 5th-order state, the local error
/// normalized against tol_rate * |h| (error-per-unit-length control, so the
/// accumulated error over the whole interval stays near tol), and whether
/// the acceptance scale was dominated by the floating-point noise floor
/// rather than the requested budget.
fn dp_step<F>(f: &F, x: f64, y: &State, h: f64, tol_rate: f64) -> (State, f64, bool)
where
    F: Fn(f64, &State) -> State,
{
    let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
    k[0] = f(x, y);
    for stage in 0..6 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage + 1) {
            let a = A[stage][j];
            if a != 0.0 {
                ys[0] += kj[0] * (a * h);
                ys[1] += kj[1] * (a * h);
            }
        }
        k[stage + 1] = f(x + C[stage] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = [Complex64::new(0.0, 0.0); 2];
    for (j, kj) in k.iter().enumerate() {
        if B5[j] != 0.0 {
            y5[0] += kj[0] * (B5[j] * h);
            y5[1] += kj[1] * (B5[j] * h);
        }
        let d = B5[j] - B4[j];
        if d != 0.0 {
            err[0] += kj[0] * (d * h);
            err[1] += kj[1] * (d * h);
        }
    }
    let budget = tol_rate * h.abs();
    let m0 = 1.0 + y[0].norm().max(y5[0].norm());
    let m1 = 1.0 + y[1].norm().max(y5[1].norm());
    // The f64::EPSILON floor keeps steps acceptable once the embedded error
    // estimate consists of stage arithmetic noise, which does not shrink
    // with h; the caller must then grow h instead of trusting the estimate.
    let noise = 4.0 * f64::EPSILON;
    let scale0 = (budget + noise) * m0;
    let scale1 = (budget + noise) * m1;
    let e = ((err[0].norm() / scale0).powi(2) + (err[1].norm() / scale1).powi(2)).sqrt()
        / std::f64::consts::SQRT_2;
    (y5, e, budget < noise)
}

/// Integrate from x to x_end with adaptive steps; h_cap bounds |h|.
fn integrate<F>(
    f: &F,
    mut x: f64,
    mut y: State,
    x_end: f64,
    tol: f64,
    h_cap: f64,
) -> Result<(State, usize)>
where
    F: Fn(f64, &State) -> State,
{
    let dir = if x_end >= x { 1.0 } else { -1.0 };
    let span = (x_end - x).abs();
    if span == 0.0 {
        return Ok((y, 0));
    }
    let tol_rate = tol / span.max(1.0);
    let mut h = (span / 16.0).min(h_cap).max(MIN_STEP);
    let mut steps = 0usize;
    loop {
        let remaining = (x_end - x).abs();
        if remaining <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
        let mut h_try = h.min(h_cap);
        // Stretch into the endpoint rather than leaving a sliver behind.
        // The stretch allowance (1.05) times the largest rejection factor
        // (0.9) stays below 1, so a rejected terminal step cannot be
        // stretched back to the size that just failed.
        let terminal = 1.05 * h_try >= remaining;
        if terminal {
            h_try = remaining;
        }
        if h_try < MIN_STEP && !terminal {
            return Err(Error::StepUnderflow { step: h_try, x });
        }
        let (y_next, err, noise_floor) = dp_step(f, x, &y, dir * h_try, tol_rate);
        if err <= 1.0 {
            if terminal {
                return Ok((y_next, steps + 1));
            }
            x += dir * h_try;
            y = y_next;
            steps += 1;
            let grow = if noise_floor && err < 0.8 {
                // the estimate is arithmetic noise; march out of the
                // noise-dominated regime instead of stalling in it
                2.0
            } else {
                (0.9 * err.max(1e-10).powf(-0.25)).clamp(0.2, 5.0)
            };
            h = h_try * grow;
        } else {
            // non-finite estimates (singular right-hand side) shrink hard
            let factor = if err.is_finite() { (0.9 * err.powf(-0.25)).clamp(0.2, 0.9) } else { 0.2 };
            h = h_try * factor;
            if h < MIN_STEP {
                return Err(Error::StepUnderflow { step: h, x });
            }
        }
        if steps > 50_000_000 {
            return Err(Error::Domain("ODE integration exceeded step budget".into()));
        }
    }
    Ok((y, steps))
}

/// One smooth-segment integration in either formulation.
fn integrate_segment(
    q: &Potential,
    jumps: &[f64],
    omega: Complex64,
    envelope: bool,
    from: f64,
    y: State,
    to: f64,
    tol: f64,
    h_cap: f64,
) -> Result<(State, usize)> {
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    let seg = SegmentQ {
        q,
        lo,
        hi,
        clamp_lo: is_jump(jumps, lo),
        clamp_hi: is_jump(jumps, hi),
    };
    if envelope {
        let f = |x: f64, v: &State| rhs_envelope(&seg, omega, x, v);
        integrate(&f, from, y, to, tol, h_cap)
    } else {
        let omega2 = omega * omega;
        let f = |x: f64, y: &State| rhs_direct(&seg, omega2, x, y);
        integrate(&f, from, y, to, tol, h_cap)
    }
}

/// u(omega, x_end) and u'(omega, x_end) for y'' = (q - omega^2) y,
/// y(0) = 1, y'(0) = i omega. Integration restarts at every jump of q so
/// that no step straddles a discontinuity.
pub fn ode_oracle(q: &Potential, omega: Complex64, x_end: f64, tol: f64) -> Result<OdeResult> {
    check_tol(tol)?;
    let envelope = omega.norm() > ENVELOPE_THRESHOLD;
    let h_cap = if envelope { f64::INFINITY } else { direct_cap(omega) };
    let jumps = q.jump_points();
    let mut y: State = if envelope {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
    } else {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0) * omega]
    };
    let mut steps = 0usize;
    let mut x = 0.0f64;
    for stop in cuts_between(&jumps, 0.0, x_end).into_iter().chain(std::iter::once(x_end)) {
        let (y_next, n) =
            integrate_segment(q, &jumps, omega, envelope, x, y, stop, tol, h_cap)?;
        y = y_next;
        steps += n;
        x = stop;
    }
    if envelope {
        let carrier = (Complex64::new(0.0, 1.0) * omega * x_end).exp();
        Ok(OdeResult {
            value: carrier * y[0],
            derivative: carrier * (y[1] + Complex64::new(0.0, 1.0) * omega * y[0]),
            steps,
        })
    } else {
        Ok(OdeResult { value: y[0], derivative: y[1], steps })
    }
}

/// u and u' tabulated at every node of `grid`, integrating outward from 0.
pub fn ode_solve_on_grid(
    q: &Potential,
    omega: Complex64,
    grid: &Grid,
    tol: f64,
) -> Result<Vec<(Complex64, Complex64)>> {
    check_tol(tol)?;
    let n = grid.len();
    let i0 = grid.zero_index();
    let mut out = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); n];

    let envelope = omega.norm() > ENVELOPE_THRESHOLD;
    let h_cap = if envelope { f64::INFINITY } else { direct_cap(omega) };
    // grid nodes carrying jumps of q (from the tabulation grid and from the
    // potential's own sampling)
    let mut jumps: Vec<f64> = grid.breakpoints().iter().map(|&i| grid.x(i)).collect();
    jumps.extend(q.jump_points());

    let start: State = if envelope {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
    } else {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0) * omega]
    };
    let store = |out: &mut Vec<(Complex64, Complex64)>, i: usize, y: &State| {
        if envelope {
            let carrier = (Complex64::new(0.0, 1.0) * omega * grid.x(i)).exp();
            out[i] = (carrier * y[0], carrier * (y[1] + Complex64::new(0.0, 1.0) * omega * y[0]));
        } else {
            out[i] = (y[0], y[1]);
        }
    };

    store(&mut out, i0, &start);
    let mut y = start;
    for i in i0..n - 1 {
        y = integrate_segment(q, &jumps, omega, envelope, grid.x(i), y, grid.x(i + 1), tol, h_cap)?
            .0;
        store(&mut out, i + 1, &y);
    }
    y = start;
    for i in (0..i0).rev() {
        y = integrate_segment(q, &jumps, omega, envelope, grid.x(i + 1), y, grid.x(i), tol, h_cap)?
            .0;
        store(&mut out, i, &y);
    }
    Ok(out)
}

fn direct_cap(omega: Complex64) -> f64 {
    let a = omega.norm();
    if a > 1.0 {
        0.1 / a
    } else {
        f64::INFINITY
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol >= MIN_TOL) {
        return Err(Error::InvalidArgument(format!(
            "ODE tolerance {tol:.3e} below the supported minimum {MIN_TOL:.0e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_potential_plane_wave() {
        let q = Potential::zero();
        let r = ode_oracle(&q, c(3.0, 0.0), 1.0, 1e-12).unwrap();
        let exact = c(0.0, 3.0).exp();
        assert!((r.value - exact).norm() < 1e-11);
        assert!((r.derivative - exact * c(0.0, 3.0)).norm() < 1e-10);
    }

    #[test]
    fn constant_potential_closed_form() {
        // q = 1, omega = 5: u = cos(W x) + 5i sin(W x)/W with W = sqrt(24)
        let q = Potential::constant(1.0);
        let w = 24f64.sqrt();
        let r = ode_oracle(&q, c(5.0, 0.0), 1.0, 1e-12).unwrap();
        let exact = c(w.cos(), 5.0 * w.sin() / w);
        assert!((r.value - exact).norm() < 1e-11, "{} vs {exact}", r.value);
    }

    #[test]
    fn negative_constant_at_omega_zero() {
        // q = -1, omega = 0: y'' = -y, y(0)=1, y'(0)=0 -> cos x
        let q = Potential::constant(-1.0);
        let r = ode_oracle(&q, c(0.0, 0.0), 1.0, 1e-12).unwrap();
        assert!((r.value.re - 1f64.cos()).abs() < 1e-11);
        assert!(r.value.im.abs() < 1e-12);
    }

    #[test]
    fn envelope_matches_closed_form_at_large_omega() {
        let q = Potential::constant(1.0);
        let omega = 100.0f64;
        let w = (omega * omega - 1.0).sqrt();
        let r = ode_oracle(&q, c(omega, 0.0), 1.0, 1e-13).unwrap();
        let exact = c(w.cos(), omega * w.sin() / w);
        assert!((r.value - exact).norm() < 1e-10, "{} vs {exact}", r.value);
    }

    #[test]
    fn halving_tolerance_is_consistent() {
        let q = Potential::from_real_fn(|x| x.exp());
        let a = ode_oracle(&q, c(4.0, 0.0), 2.0, 1e-9).unwrap();
        let b = ode_oracle(&q, c(4.0, 0.0), 2.0, 5e-10).unwrap();
        assert!((a.value - b.value).norm() < 1e-9);
    }

    #[test]
    fn negative_direction() {
        let q = Potential::constant(1.0);
        // f-type data: omega = 0 -> cosh on both sides
        let r = ode_oracle(&q, c(0.0, 0.0), -1.5, 1e-12).unwrap();
        assert!((r.value.re - 1.5f64.cosh()).abs() < 1e-10);
        assert!((r.derivative.re + 1.5f64.sinh()).abs() < 1e-10);
    }

    #[test]
    fn grid_tabulation_matches_single_calls() {
        let q = Potential::from_real_fn(|x| 1.0 + 0.3 * x);
        let grid = Grid::symmetric(1.0, 32).unwrap();
        let tab = ode_solve_on_grid(&q, c(2.0, 0.0), &grid, 1e-12).unwrap();
        for &i in &[0usize, 7, 16, 25, 32] {
            let single = ode_oracle(&q, c(2.0, 0.0), grid.x(i), 1e-12).unwrap();
            assert!((tab[i].0 - single.value).norm() < 1e-10, "node {i}");
        }
    }

    #[test]
    fn rejects_too_small_tolerance() {
        let q = Potential::zero();
        assert!(ode_oracle(&q, c(1.0, 0.0), 1.0, 1e-14).is_err());
    }
}
