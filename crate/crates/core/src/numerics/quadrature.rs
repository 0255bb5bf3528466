//! Composite eighth-order antidifferentiation on uniform grids and
//! Gauss-Legendre rules.
//!
//! Each node-to-node increment integrates the degree-8 interpolant of a
//! 9-point window, so cumulative integrals are exact for polynomials up to
//! degree 8 and O(h^8) accurate otherwise. The high order is not a luxury:
//! the kernel coefficient sums amplify any smooth quadrature bias of the
//! formal powers by a factor growing with the coefficient order, so the
//! bias floor set here decides how many coefficients are usable. Windows
//! are clamped inside the smooth segments between grid breakpoints. The
//! cumulative sums run outward from the origin node in both directions.

use num_complex::Complex64;

use crate::dd::CDd;
use crate::grid::Grid;

/// Integral of the degree-8 interpolant over window interval [s, s+1]
/// (9-point stencils; s = interval position inside the window).
#[rustfmt::skip]
const W: [[f64; 9]; 8] = [
    [1070017.0 / 3628800.0, 2233547.0 / 1814400.0, -2302297.0 / 1814400.0, 2797679.0 / 1814400.0, -31457.0 / 22680.0, 1573169.0 / 1814400.0, -645607.0 / 1814400.0, 156437.0 / 1814400.0, -33953.0 / 3628800.0],
    [-33953.0 / 3628800.0, 687797.0 / 1814400.0, 1622393.0 / 1814400.0, -876271.0 / 1814400.0, 8233.0 / 22680.0, -377521.0 / 1814400.0, 147143.0 / 1814400.0, -34453.0 / 1814400.0, 7297.0 / 3628800.0],
    [7297.0 / 3628800.0, -49813.0 / 1814400.0, 819143.0 / 1814400.0, 1315919.0 / 1814400.0, -5207.0 / 22680.0, 198929.0 / 1814400.0, -71047.0 / 1814400.0, 15797.0 / 1814400.0, -3233.0 / 3628800.0],
    [-3233.0 / 3628800.0, 18197.0 / 1814400.0, -108007.0 / 1814400.0, 954929.0 / 1814400.0, 13903.0 / 22680.0, -212881.0 / 1814400.0, 63143.0 / 1814400.0, -12853.0 / 1814400.0, 2497.0 / 3628800.0],
    [2497.0 / 3628800.0, -12853.0 / 1814400.0, 63143.0 / 1814400.0, -212881.0 / 1814400.0, 13903.0 / 22680.0, 954929.0 / 1814400.0, -108007.0 / 1814400.0, 18197.0 / 1814400.0, -3233.0 / 3628800.0],
    [-3233.0 / 3628800.0, 15797.0 / 1814400.0, -71047.0 / 1814400.0, 198929.0 / 1814400.0, -5207.0 / 22680.0, 1315919.0 / 1814400.0, 819143.0 / 1814400.0, -49813.0 / 1814400.0, 7297.0 / 3628800.0],
    [7297.0 / 3628800.0, -34453.0 / 1814400.0, 147143.0 / 1814400.0, -377521.0 / 1814400.0, 8233.0 / 22680.0, -876271.0 / 1814400.0, 1622393.0 / 1814400.0, 687797.0 / 1814400.0, -33953.0 / 3628800.0],
    [-33953.0 / 3628800.0, 156437.0 / 1814400.0, -645607.0 / 1814400.0, 1573169.0 / 1814400.0, -31457.0 / 22680.0, 2797679.0 / 1814400.0, -2302297.0 / 1814400.0, 2233547.0 / 1814400.0, 1070017.0 / 3628800.0],
];

/// Degree-7 extrapolation of the next value from eight predecessors
/// (vanishing eighth difference).
const EDGE: [f64; 8] = [-1.0, 8.0, -28.0, 56.0, -70.0, 56.0, -28.0, 8.0];

/// Window start, weight row, and segment end for the interval [x_i, x_{i+1}].
fn stencil(grid: &Grid, i: usize) -> (usize, &'static [f64; 9], usize) {
    let (seg_lo, seg_hi) = grid.segment_of_interval(i);
    let c = i
        .saturating_sub(4)
        .max(seg_lo)
        .min(seg_hi.saturating_sub(8).max(seg_lo));
    (c, &W[i - c], seg_hi)
}

/// Cumulative antiderivative F with F(0) = 0 and F' ~ samples.
///
/// At a breakpoint node the sample is taken as the right-sided limit; the
/// segment ending there sees a one-sided extrapolation of its own interior
/// instead.
pub fn antiderivative(grid: &Grid, samples: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(samples.len(), grid.len());
    let h = grid.step();
    let n = grid.len();
    let last = n - 1;
    let edge = |j: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &w) in EDGE.iter().enumerate() {
            acc += samples[j - 8 + k] * w;
        }
        acc
    };
    let inc = |i: usize| -> Complex64 {
        let (c, w, seg_hi) = stencil(grid, i);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..9 {
            let idx = c + j;
            let s = if idx == seg_hi && idx != last { edge(idx) } else { samples[idx] };
            acc += s * w[j];
        }
        acc * h
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let i0 = grid.zero_index();
    // Kahan-compensated running sums in both directions.
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for i in i0..n - 1 {
        let y = inc(i) - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        out[i + 1] = sum;
    }
    sum = Complex64::new(0.0, 0.0);
    comp = Complex64::new(0.0, 0.0);
    for i in (0..i0).rev() {
        let y = -inc(i) - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        out[i] = sum;
    }
    out
}

/// Double-double variant used inside the formal-power chains.
pub(crate) fn antiderivative_dd(grid: &Grid, samples: &[CDd]) -> Vec<CDd> {
    assert_eq!(samples.len(), grid.len());
    let h = grid.step();
    let n = grid.len();
    let last = n - 1;
    let edge = |j: usize| -> CDd {
        let mut acc = CDd::ZERO;
        for (k, &w) in EDGE.iter().enumerate() {
            acc = acc.add(samples[j - 8 + k].mul_f64(w));
        }
        acc
    };
    let inc = |i: usize| -> CDd {
        let (c, w, seg_hi) = stencil(grid, i);
        let mut acc = CDd::ZERO;
        for j in 0..9 {
            let idx = c + j;
            let s = if idx == seg_hi && idx != last { edge(idx) } else { samples[idx] };
            acc = acc.add(s.mul_f64(w[j]));
        }
        acc.mul_f64(h)
    };
    let mut out = vec![CDd::ZERO; n];
    let i0 = grid.zero_index();
    let mut sum = CDd::ZERO;
    for i in i0..n - 1 {
        sum = sum.add(inc(i));
        out[i + 1] = sum;
    }
    sum = CDd::ZERO;
    for i in (0..i0).rev() {
        sum = sum.sub(inc(i));
        out[i] = sum;
    }
    out
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = crate::numerics::polynomials::legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = crate::numerics::polynomials::legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integral over [a, b] of a function sampled through `f` by the n-point
/// Gauss-Legendre rule.
pub fn gauss_integrate<F>(a: f64, b: f64, n: usize, mut f: F) -> Complex64
where
    F: FnMut(f64) -> Complex64,
{
    let (nodes, weights) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&t, &w) in nodes.iter().zip(&weights) {
        acc += f(mid + half * t) * w;
    }
    acc * half
}
