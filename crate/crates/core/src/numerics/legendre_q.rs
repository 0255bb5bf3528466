//! Legendre functions of the second kind Q_n(z) for complex z off the cut
//! [-1, 1].
//!
//! Q_n is the minimal solution of the Legendre recurrence away from the cut,
//! so the three-term recurrence run upward loses roughly
//! (|z| + sqrt(|z^2-1|))^(2n) of relative accuracy. Upward is therefore used
//! only close to the cut where the two solutions are comparable; elsewhere the
//! values come from backward (Miller) recurrence seeded at least 20 orders
//! above and normalized against the closed form Q_0.

use num_complex::Complex64;

use crate::error::{Error, Result};

const RESCALE: f64 = 1e250;

/// Distance from z to the segment [-1, 1].
fn cut_distance(z: Complex64) -> f64 {
    if z.re.abs() <= 1.0 {
        z.im.abs()
    } else {
        (z.re.abs() - 1.0).hypot(z.im)
    }
}

fn q0(z: Complex64) -> Complex64 {
    0.5 * ((z + 1.0) / (z - 1.0)).ln()
}

/// Modulus of the exterior Joukowski parameter z + sqrt(z^2 - 1) (always
/// taken >= 1); governs the decay Q_n ~ rho^-(n+1).
fn growth_rate(z: Complex64) -> f64 {
    let s = (z * z - 1.0).sqrt();
    let w1 = (z + s).norm();
    let w2 = (z - s).norm();
    w1.max(w2).max(1.0 + 1e-15)
}

/// Q_n(z) for a single order.
pub fn legendre_q(n: usize, z: Complex64) -> Result<Complex64> {
    Ok(legendre_q_array(n, z)?[n])
}

/// Q_0(z), ..., Q_n(z).
pub fn legendre_q_array(n_max: usize, z: Complex64) -> Result<Vec<Complex64>> {
    if cut_distance(z) <= 1e-8 {
        return Err(Error::OnCut { re: z.re, im: z.im });
    }
    let rho = growth_rate(z);
    // Upward relative error grows like rho^(2n); accept up to ~1e3 * eps.
    if 2.0 * n_max as f64 * rho.ln() <= 3.0 * std::f64::consts::LN_10 {
        Ok(upward(n_max, z))
    } else {
        Ok(downward(n_max, z, rho))
    }
}

fn upward(n_max: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let q0 = q0(z);
    out.push(q0);
    if n_max == 0 {
        return out;
    }
    out.push(z * q0 - 1.0);
    for n in 1..n_max {
        let next = (out[n] * z * ((2 * n + 1) as f64) - out[n - 1] * (n as f64)) / (n + 1) as f64;
        out.push(next);
    }
    out
}

fn downward(n_max: usize, z: Complex64, rho: f64) -> Vec<Complex64> {
    let offset = ((42.0 / rho.ln()).ceil() as usize).clamp(20, 400_000);
    let start = n_max + offset;
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let mut above = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1e-150, 0.0);
    for n in (0..=start).rev() {
        // (n+2) Q_{n+2} = (2n+3) z Q_{n+1} - (n+1) Q_n
        let below = (cur * z * ((2 * n + 3) as f64) - above * ((n + 2) as f64)) / (n + 1) as f64;
        above = cur;
        cur = below;
        if n <= n_max {
            out[n] = cur;
        }
        if cur.norm() > RESCALE {
            let inv = 1.0 / RESCALE;
            cur *= inv;
            above *= inv;
            for v in out.iter_mut().skip(n.min(n_max)) {
                *v *= inv;
            }
        }
    }
    // Anchor-normalized to dodge norm_sqr underflow in complex division.
    let inv_mag = 1.0 / out[0].norm().max(f64::MIN_POSITIVE);
    let scale = q0(z) * inv_mag / (out[0] * inv_mag);
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn q0_closed_form() {
        let v = legendre_q(0, c(3.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 0.5 * 2.0f64.ln(), max_relative = 1e-14);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn q1_closed_form() {
        let v = legendre_q(1, c(3.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 1.5 * 2.0f64.ln() - 1.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_cut() {
        assert!(legendre_q(2, c(0.5, 0.0)).is_err());
        assert!(legendre_q(2, c(-1.0, 1e-12)).is_err());
        assert!(legendre_q(2, c(1.2, 0.0)).is_ok());
    }

    #[test]
    fn neumann_integral_oracle_n4() {
        // Q_n(z) = 1/2 int_{-1}^{1} P_n(t) / (z - t) dt, evaluated by
        // 200-point Gauss-Legendre quadrature.
        let z = c(2.0, 1.0);
        let (nodes, weights) = crate::numerics::quadrature::gauss_legendre(200);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&t, &w) in nodes.iter().zip(&weights) {
            let p4 = crate::numerics::polynomials::legendre_eval_all(4, t)[4];
            acc += w * p4 / (z - t);
        }
        let expected = 0.5 * acc;
        let v = legendre_q(4, z).unwrap();
        assert_relative_eq!(v.re, expected.re, max_relative = 1e-11);
        assert_relative_eq!(v.im, expected.im, max_relative = 1e-11);
    }

    #[test]
    fn recurrence_residual() {
        for &z in &[c(1.5, 0.0), c(3.0, 2.0), c(-2.5, 0.7), c(10.0, 0.0), c(1.6, -0.4)] {
            let q = legendre_q_array(31, z).unwrap();
            for n in 1..=30usize {
                let lhs = q[n + 1] * ((n + 1) as f64);
                let rhs = q[n] * z * ((2 * n + 1) as f64) - q[n - 1] * (n as f64);
                let scale = lhs.norm().max(rhs.norm());
                assert!(
                    (lhs - rhs).norm() <= 1e-10 * scale,
                    "z={z} n={n} rel={}",
                    (lhs - rhs).norm() / scale
                );
            }
        }
    }

    #[test]
    fn near_cut_upward_agrees_with_integral() {
        // close to the cut the upward recurrence is the accurate branch
        let z = c(1.02, 0.01);
        let (nodes, weights) = crate::numerics::quadrature::gauss_legendre(400);
        for n in [0usize, 3, 8] {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&t, &w) in nodes.iter().zip(&weights) {
                let p = crate::numerics::polynomials::legendre_eval_all(n, t)[n];
                acc += w * p / (z - t);
            }
            let v = legendre_q(n, z).unwrap();
            assert!(
                (v - 0.5 * acc).norm() <= 1e-7 * acc.norm().max(1.0),
                "n={n}: {v} vs {}",
                0.5 * acc
            );
        }
    }
}
