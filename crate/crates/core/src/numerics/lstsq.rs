//! Householder QR least squares for dense complex (and real) systems.
//!
//! Solves min ||Ax - b||_2 for tall full-rank A; rank deficiency is reported
//! when a diagonal entry of R falls below 1e-13 times the matrix scale.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const RANK_TOLERANCE: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct LstsqSolution {
    pub x: Vec<Complex64>,
    pub residual_norm: f64,
}

/// Least squares on a row-major m-by-k complex matrix.
pub fn lstsq(a: &[Complex64], m: usize, k: usize, b: &[Complex64]) -> Result<LstsqSolution> {
    if a.len() != m * k || b.len() != m {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: matrix {} entries for {m}x{k}, rhs {}",
            a.len(),
            b.len()
        )));
    }
    if m < k {
        return Err(Error::InvalidArgument(format!(
            "underdetermined system: {m} rows < {k} columns"
        )));
    }
    let norm_a = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = RANK_TOLERANCE * norm_a.max(f64::MIN_POSITIVE);

    let mut qr = a.to_vec();
    let mut rhs = b.to_vec();

    for col in 0..k {
        // Norm of the column at and below the diagonal.
        let mut norm_sq = 0.0;
        for row in col..m {
            norm_sq += qr[row * k + col].norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm < threshold {
            return Err(Error::RankDeficient { col, diag: norm, threshold });
        }
        // Householder vector v = x + e^{i arg(x0)} ||x|| e1.
        let x0 = qr[col * k + col];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        qr[col * k + col] = x0 - alpha;
        let vnorm_sq: f64 = (col..m).map(|r| qr[r * k + col].norm_sqr()).sum();
        if vnorm_sq > 0.0 {
            let scale = 2.0 / vnorm_sq;
            // Reflect the remaining columns and the rhs.
            for j in col + 1..k {
                let mut dot = Complex64::new(0.0, 0.0);
                for r in col..m {
                    dot += qr[r * k + col].conj() * qr[r * k + j];
                }
                dot *= scale;
                for r in col..m {
                    let v = qr[r * k + col];
                    qr[r * k + j] -= v * dot;
                }
            }
            let mut dot = Complex64::new(0.0, 0.0);
            for r in col..m {
                dot += qr[r * k + col].conj() * rhs[r];
            }
            dot *= scale;
            for r in col..m {
                let v = qr[r * k + col];
                rhs[r] -= v * dot;
            }
        }
        // Store the R diagonal in place of the reflected column head.
        qr[col * k + col] = alpha;
        if alpha.norm() < threshold {
            return Err(Error::RankDeficient { col, diag: alpha.norm(), threshold });
        }
    }

    // Back substitution on the upper triangle.
    let mut x = vec![Complex64::new(0.0, 0.0); k];
    for col in (0..k).rev() {
        let mut acc = rhs[col];
        for j in col + 1..k {
            acc -= qr[col * k + j] * x[j];
        }
        x[col] = acc / qr[col * k + col];
    }
    let residual_norm = rhs[k..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(LstsqSolution { x, residual_norm })
}

/// Real-valued convenience wrapper.
pub fn lstsq_real(a: &[f64], m: usize, k: usize, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let ac: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let bc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let sol = lstsq(&ac, m, k, &bc)?;
    Ok((sol.x.iter().map(|z| z.re).collect(), sol.residual_norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system() {
        let a = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let b = [1.0, 2.0, 3.0];
        let (x, r) = lstsq_real(&a, 3, 3, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 2.0).abs() < 1e-14);
        assert!((x[2] - 3.0).abs() < 1e-14);
        assert!(r < 1e-14);
    }

    #[test]
    fn mean_minimizes() {
        let a = [1.0, 1.0];
        let b = [0.0, 2.0];
        let (x, r) = lstsq_real(&a, 2, 1, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn planted_solution_recovered() {
        // A from a fixed LCG, x planted; b = A x plus a component orthogonal
        // to the column space (projected out numerically).
        let m = 20;
        let k = 5;
        let mut state = 0x2545f4914f6cdd1du64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let a: Vec<f64> = (0..m * k).map(|_| rnd()).collect();
        let planted: Vec<f64> = (0..k).map(|_| rnd()).collect();
        let mut b: Vec<f64> = (0..m)
            .map(|r| (0..k).map(|c| a[r * k + c] * planted[c]).sum())
            .collect();
        // Add noise, then subtract its least-squares projection so that the
        // perturbation is orthogonal to range(A).
        let noise: Vec<f64> = (0..m).map(|_| rnd()).collect();
        let (coef, _) = lstsq_real(&a, m, k, &noise).unwrap();
        for r in 0..m {
            let fit: f64 = (0..k).map(|c| a[r * k + c] * coef[c]).sum();
            b[r] += noise[r] - fit;
        }
        let (x, _) = lstsq_real(&a, m, k, &b).unwrap();
        for c in 0..k {
            assert!((x[c] - planted[c]).abs() < 1e-12, "col {c}: {} vs {}", x[c], planted[c]);
        }
    }

    #[test]
    fn residual_orthogonal_to_columns() {
        let m = 12;
        let k = 4;
        let mut state = 99u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let a: Vec<Complex64> = (0..m * k).map(|_| Complex64::new(rnd(), rnd())).collect();
        let b: Vec<Complex64> = (0..m).map(|_| Complex64::new(rnd(), rnd())).collect();
        let sol = lstsq(&a, m, k, &b).unwrap();
        let mut res = b.clone();
        for r in 0..m {
            for c in 0..k {
                res[r] -= a[r * k + c] * sol.x[c];
            }
        }
        let norm_a = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let norm_b = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for c in 0..k {
            let mut dot = Complex64::new(0.0, 0.0);
            for r in 0..m {
                dot += a[r * k + c].conj() * res[r];
            }
            assert!(dot.norm() <= 1e-10 * norm_a * norm_b, "col {c}: {}", dot.norm());
        }
        // residual_norm agrees with the explicit residual
        let explicit = res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((sol.residual_norm - explicit).abs() < 1e-16f64.sqrt() * explicit.max(1.0));
    }

    #[test]
    fn rank_deficiency_detected() {
        // two identical columns
        let a = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        let b = [1.0, 2.0, 3.0];
        match lstsq_real(&a, 3, 2, &b) {
            Err(Error::RankDeficient { col, .. }) => assert_eq!(col, 1),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }
}
