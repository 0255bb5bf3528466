//! Classical orthogonal polynomials: coefficient tables and stable
//! point evaluation.
//!
//! Legendre and (physicists') Hermite polynomials are needed as coefficient
//! lists — the kernel coefficient formulas weight formal powers by the
//! coefficient of x^k — while Legendre and Laguerre values come from the
//! usual three-term recurrences.

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Maximum order before coefficients leave the double range.
pub const MAX_ORDER: usize = 200;

/// Dense coefficient list; index k holds the coefficient of x^k.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialCoeffs {
    coeffs: Vec<f64>,
}

impl PolynomialCoeffs {
    pub fn new(coeffs: Vec<f64>) -> PolynomialCoeffs {
        PolynomialCoeffs { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Coefficients of the Legendre polynomial P_n.
///
/// Recurrence (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1} applied on the
/// coefficient level. Normalization: P_n(1) = 1, so the coefficients sum
/// to one.
pub fn legendre_coeffs(n: usize) -> Result<PolynomialCoeffs> {
    let dd = legendre_coeffs_dd(n)?;
    Ok(PolynomialCoeffs::new(dd.iter().map(|c| c.to_f64()).collect()))
}

pub(crate) fn legendre_coeffs_dd(n: usize) -> Result<Vec<Dd>> {
    if n > MAX_ORDER {
        return Err(Error::OrderTooLarge { n, max: MAX_ORDER });
    }
    let mut prev = vec![Dd::ONE];
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = vec![Dd::ZERO, Dd::ONE];
    for k in 1..n {
        // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
        let mut next = vec![Dd::ZERO; k + 2];
        let a = (2 * k + 1) as f64;
        let b = k as f64;
        let divisor = Dd::from_f64((k + 1) as f64);
        for (j, c) in cur.iter().enumerate() {
            next[j + 1] = next[j + 1].add(c.mul_f64(a));
        }
        for (j, c) in prev.iter().enumerate() {
            next[j] = next[j].add(c.mul_f64(-b));
        }
        for c in next.iter_mut() {
            *c = c.div(divisor);
        }
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Coefficients of the physicists' Hermite polynomial H_n
/// (H_{n+1} = 2x H_n - 2n H_{n-1}, leading coefficient 2^n).
pub fn hermite_coeffs(n: usize) -> Result<PolynomialCoeffs> {
    if n > MAX_ORDER {
        return Err(Error::OrderTooLarge { n, max: MAX_ORDER });
    }
    let mut prev = vec![1.0f64];
    if n == 0 {
        return Ok(PolynomialCoeffs::new(prev));
    }
    let mut cur = vec![0.0, 2.0];
    for k in 1..n {
        let mut next = vec![0.0; k + 2];
        for (j, c) in cur.iter().enumerate() {
            next[j + 1] += 2.0 * c;
        }
        for (j, c) in prev.iter().enumerate() {
            next[j] -= 2.0 * k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    Ok(PolynomialCoeffs::new(cur))
}

/// Scaled Hermite coefficients h_{k,n} / (n! 2^n) for the Fourier-Hermite
/// kernel coefficients; computed by ratio updates so that no factorial is
/// ever formed. Entry k is zero unless k = n (mod 2).
pub(crate) fn hermite_scaled_coeffs_dd(n: usize) -> Vec<Dd> {
    // h_{k,n} = (-1)^m n! 2^k / (k! m!) with m = (n-k)/2, so
    // h_{k,n}/(n! 2^n) = (-1)^m 2^(k-n) / (k! m!).
    let mut out = vec![Dd::ZERO; n + 1];
    // Start at k = n (m = 0): 1/n!.
    let mut t = Dd::ONE;
    for j in 1..=n {
        t = t.div(Dd::from_f64(j as f64));
    }
    out[n] = t;
    let mut k = n;
    let mut m = 0usize;
    while k >= 2 {
        // step k -> k-2: ratio -k(k-1) / (4(m+1))
        let ratio = Dd::from_f64(-((k * (k - 1)) as f64)).div(Dd::from_f64(4.0 * (m + 1) as f64));
        t = t.mul(ratio);
        k -= 2;
        m += 1;
        out[k] = t;
    }
    out
}

/// Laguerre polynomial L_n(t) via the stable three-term recurrence,
/// L_n(0) = 1.
pub fn laguerre_eval(n: usize, t: f64) -> f64 {
    laguerre_eval_all(n, t)[n]
}

/// All of L_0(t), ..., L_n(t).
pub fn laguerre_eval_all(n: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(1.0 - t);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - t) * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// All of P_0(s), ..., P_n(s).
pub fn legendre_eval_all(n: usize, s: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(s);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * s * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// P_n(s) and P_n'(s).
pub fn legendre_with_derivative(n: usize, s: f64) -> (f64, f64) {
    let vals = legendre_eval_all(n, s);
    if n == 0 {
        return (1.0, 0.0);
    }
    let p = vals[n];
    let dp = if (s * s - 1.0).abs() < 1e-14 {
        let d = (n * (n + 1)) as f64 / 2.0;
        if s > 0.0 {
            d
        } else if n % 2 == 0 {
            -d
        } else {
            d
        }
    } else {
        n as f64 * (s * vals[n] - vals[n - 1]) / (s * s - 1.0)
    };
    (p, dp)
}
