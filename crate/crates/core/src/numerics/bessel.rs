//! Spherical Bessel functions j_n(z) of complex argument.
//!
//! Upward recurrence j_{n+1} = (2n+1)/z j_n - j_{n-1} is stable only while
//! n < |z|; past the turning point the values are produced by backward
//! (Miller) recurrence normalized against the closed forms
//! j_0 = sin z / z and j_1 = (sin z - z cos z)/z^2.

use num_complex::Complex64;

const RESCALE: f64 = 1e250;

/// j_n(z) for a single order.
pub fn spherical_bessel_j(n: usize, z: Complex64) -> Complex64 {
    spherical_j_array(n, z)[n]
}

/// j_0(z), ..., j_n(z). The whole array costs the same as the last entry.
pub fn spherical_j_array(n_max: usize, z: Complex64) -> Vec<Complex64> {
    let az = z.norm();
    if az < 1e-8 {
        return small_argument(n_max, z);
    }
    let (j0, j1) = closed_forms(z);
    if n_max == 0 {
        return vec![j0];
    }
    if az > n_max as f64 {
        return upward(n_max, z, j0, j1);
    }
    downward(n_max, z, j0, j1)
}

fn closed_forms(z: Complex64) -> (Complex64, Complex64) {
    let s = z.sin();
    let c = z.cos();
    (s / z, (s - z * c) / (z * z))
}

/// Leading terms of the ascending series z^n/(2n+1)!! (1 - z^2/(2(2n+3)) + ...);
/// enough for |z| < 1e-8 where the second correction is below resolution.
fn small_argument(n_max: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let z2 = z * z;
    let mut lead = Complex64::new(1.0, 0.0);
    for n in 0..=n_max {
        if n > 0 {
            lead *= z / (2.0 * n as f64 + 1.0);
        }
        out.push(lead * (1.0 - z2 / (2.0 * (2.0 * n as f64 + 3.0))));
    }
    out
}

fn upward(n_max: usize, z: Complex64, j0: Complex64, j1: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(j0);
    out.push(j1);
    for n in 1..n_max {
        let next = out[n] * ((2 * n + 1) as f64 / z) - out[n - 1];
        out.push(next);
    }
    out
}

fn downward(n_max: usize, z: Complex64, j0: Complex64, j1: Complex64) -> Vec<Complex64> {
    let start = n_max + start_offset(n_max, z.norm());
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let mut above = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1e-150, 0.0);
    for n in (0..=start).rev() {
        let below = cur * ((2 * n + 3) as f64 / z) - above;
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
    // Normalize against whichever closed form is better conditioned. The
    // unnormalized values can sit near the underflow edge where a direct
    // complex division would square them away; pull the anchor to unit
    // magnitude first.
    let (target, anchor) =
        if j0.norm() >= j1.norm() { (j0, out[0]) } else { (j1, out[1]) };
    let inv_mag = 1.0 / anchor.norm().max(f64::MIN_POSITIVE);
    let scale = target * inv_mag / (anchor * inv_mag);
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// Extra orders needed before the minimal solution dominates the seed error:
/// accumulate log-gap until it covers 18 digits.
fn start_offset(n_max: usize, az: f64) -> usize {
    let needed = 18.0 * std::f64::consts::LN_10 * 2.0;
    let mut acc = 0.0;
    let mut s = 0usize;
    while acc < needed && s < 600 {
        s += 1;
        let k = (n_max + s) as f64;
        acc += 2.0 * ((2.0 * k + 1.0) / az).max(1.0 + 1e-3).ln();
    }
    s.max(20)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn j0_vanishes_at_pi() {
        let v = spherical_bessel_j(0, c(std::f64::consts::PI, 0.0));
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn zero_argument() {
        let v = spherical_j_array(5, c(0.0, 0.0));
        assert_eq!(v[0], c(1.0, 0.0));
        for n in 1..=5 {
            assert_eq!(v[n], c(0.0, 0.0));
        }
    }

    #[test]
    fn ascending_series_oracle_n5() {
        // Independent 12-term ascending series at z = 0.1:
        // j_n(z) = z^n/(2n+1)!! sum_m (-z^2/2)^m / (m! (2n+2m+1)!! / (2n+1)!!)
        let z = 0.1f64;
        let n = 5usize;
        let mut dfact = 1.0; // (2n+1)!!
        for k in 0..=n {
            dfact *= (2 * k + 1) as f64;
        }
        let mut sum = 0.0;
        let mut term = 1.0;
        for m in 0..12 {
            if m > 0 {
                term *= -z * z / 2.0 / (m as f64 * (2.0 * (n + m) as f64 + 1.0));
            }
            sum += term;
        }
        let expected = z.powi(n as i32) / dfact * sum;
        let v = spherical_bessel_j(n, c(z, 0.0));
        assert_relative_eq!(v.re, expected, max_relative = 1e-13);
        assert!(v.im.abs() < 1e-300);
    }

    #[test]
    fn closed_form_n2_real() {
        // j_2(x) = (3/x^3 - 1/x) sin x - 3/x^2 cos x
        for &x in &[0.5f64, 2.0, 13.7, 150.0, 480.0] {
            let exact = (3.0 / (x * x * x) - 1.0 / x) * x.sin() - 3.0 / (x * x) * x.cos();
            let v = spherical_bessel_j(2, c(x, 0.0));
            assert_relative_eq!(v.re, exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn recurrence_residual_complex() {
        let pts = [c(0.7, 0.2), c(5.0, -1.0), c(40.0, 3.0), c(300.0, 8.0), c(12.0, 0.0)];
        for &z in &pts {
            for n_max in [10usize, 60, 200] {
                let j = spherical_j_array(n_max + 1, z);
                for n in 1..=n_max {
                    let lhs = j[n - 1] + j[n + 1];
                    let rhs = j[n] * ((2 * n + 1) as f64) / z;
                    let scale = lhs.norm().max(rhs.norm());
                    if scale > 1e-280 {
                        assert!(
                            (lhs - rhs).norm() <= 1e-10 * scale,
                            "n={n} z={z} rel={}",
                            (lhs - rhs).norm() / scale
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn single_matches_array() {
        // different n_max means a different Miller start, so agreement is
        // to roundoff rather than bitwise
        let z = c(7.3, 1.1);
        let arr = spherical_j_array(30, z);
        let single = spherical_bessel_j(17, z);
        assert!((single - arr[17]).norm() <= 1e-12 * arr[17].norm());
    }
}
