//! The coefficient q of y'' - q(x) y = -omega^2 y.
//!
//! q is a complex-valued scalar field on the interval, given either as a
//! closed-form function or as samples on a grid (interpolated cubically
//! between nodes, never across a breakpoint).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Clone)]
pub enum Potential {
    Constant(Complex64),
    Function(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
    Samples { grid: Grid, values: Vec<Complex64> },
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Potential::Constant(c) => write!(f, "Potential::Constant({c})"),
            Potential::Function(_) => write!(f, "Potential::Function(..)"),
            Potential::Samples { values, .. } => {
                write!(f, "Potential::Samples({} nodes)", values.len())
            }
        }
    }
}

impl Potential {
    pub fn zero() -> Potential {
        Potential::Constant(Complex64::new(0.0, 0.0))
    }

    pub fn constant(c: f64) -> Potential {
        Potential::Constant(Complex64::new(c, 0.0))
    }

    pub fn from_fn<F>(f: F) -> Potential
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Potential::Function(Arc::new(f))
    }

    pub fn from_real_fn<F>(f: F) -> Potential
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Potential::Function(Arc::new(move |x| Complex64::new(f(x), 0.0)))
    }

    pub fn from_samples(grid: Grid, values: Vec<Complex64>) -> Result<Potential> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Potential::Samples { grid, values })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Potential::Constant(c) => *c,
            Potential::Function(f) => f(x),
            Potential::Samples { grid, values } => cubic_interp(grid, values, x),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Vec<Complex64> {
        match self {
            Potential::Constant(c) => vec![*c; grid.len()],
            Potential::Function(f) => grid.points().iter().map(|&x| f(x)).collect(),
            Potential::Samples { grid: own, values } => {
                if own.len() == grid.len() && (own.step() - grid.step()).abs() < 1e-14 {
                    values.clone()
                } else {
                    grid.points().iter().map(|&x| cubic_interp(own, values, x)).collect()
                }
            }
        }
    }

    /// True when q is real-valued at every node of `grid`.
    pub fn is_real_on(&self, grid: &Grid) -> bool {
        self.sample(grid).iter().all(|v| v.im == 0.0)
    }

    /// Jump abscissae carried by sample-based potentials.
    pub fn jump_points(&self) -> Vec<f64> {
        match self {
            Potential::Samples { grid, .. } => {
                grid.breakpoints().iter().map(|&i| grid.x(i)).collect()
            }
            _ => Vec::new(),
        }
    }
}

/// Local cubic Lagrange interpolation on a 4-node window clamped to the
/// smooth segment containing `x`. A breakpoint node carries the right-sided
/// limit, so a window ending on one substitutes a one-sided extrapolation of
/// its own segment.
pub(crate) fn cubic_interp(grid: &Grid, values: &[Complex64], x: f64) -> Complex64 {
    let n = grid.len();
    if n < 4 {
        return values[grid.nearest_index(x)];
    }
    let i = grid.nearest_index(x.min(grid.right()).max(grid.left()));
    let interval = if grid.x(i) > x && i > 0 { i - 1 } else { i.min(n - 2) };
    let (seg_lo, seg_hi) = grid.segment_of_interval(interval);
    let lo = interval
        .saturating_sub(1)
        .max(seg_lo)
        .min(seg_hi.saturating_sub(3).max(seg_lo));
    let xs = [grid.x(lo), grid.x(lo + 1), grid.x(lo + 2), grid.x(lo + 3)];
    let sample = |idx: usize| -> Complex64 {
        if idx == seg_hi && idx != n - 1 && idx >= 4 {
            -values[idx - 4] + 4.0 * values[idx - 3] - 6.0 * values[idx - 2]
                + 4.0 * values[idx - 1]
        } else {
            values[idx]
        }
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..4 {
        let mut w = 1.0;
        for k in 0..4 {
            if k != j {
                w *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += sample(lo + j) * w;
    }
    acc
}
