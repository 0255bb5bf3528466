//! Uniform spatial grid on [a, b] with a <= 0 <= b.
//!
//! Zero is always a node: the formal-power recursions integrate outward from
//! the origin. Jump discontinuities of the coefficient q are carried as
//! breakpoint node indices so that quadrature stencils never straddle a jump.

use crate::error::{Error, Result};

pub const MIN_INTERVALS: usize = 16;

#[derive(Clone, Debug)]
pub struct Grid {
    points: Vec<f64>,
    h: f64,
    zero_index: usize,
    /// Interior node indices where q may jump; sorted, no duplicates.
    breaks: Vec<usize>,
}

impl Grid {
    /// Grid with `m` intervals on [a, b]. Zero must land on a node.
    pub fn new(a: f64, b: f64, m: usize) -> Result<Grid> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidGrid(format!("bad endpoints [{a}, {b}]")));
        }
        if a > 0.0 || b < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "interval [{a}, {b}] must contain 0"
            )));
        }
        if m < MIN_INTERVALS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_INTERVALS} intervals, got {m}"
            )));
        }
        let h = (b - a) / m as f64;
        let points: Vec<f64> = (0..=m)
            .map(|i| (a * (m - i) as f64 + b * i as f64) / m as f64)
            .collect();
        let zero_index = points
            .iter()
            .enumerate()
            .min_by(|(_, x), (_, y)| x.abs().total_cmp(&y.abs()))
            .map(|(i, _)| i)
            .unwrap();
        if points[zero_index].abs() > 1e-12 * (b - a) {
            return Err(Error::InvalidGrid(format!(
                "0 is not a grid node (nearest node at {})",
                points[zero_index]
            )));
        }
        let mut points = points;
        points[zero_index] = 0.0;
        Ok(Grid { points, h, zero_index, breaks: Vec::new() })
    }

    /// Symmetric grid on [-b, b]; `m` is rounded up to even.
    pub fn symmetric(b: f64, m: usize) -> Result<Grid> {
        let m = m + m % 2;
        Grid::new(-b, b, m)
    }

    /// Grid on [0, b].
    pub fn half(b: f64, m: usize) -> Result<Grid> {
        Grid::new(0.0, b, m)
    }

    /// Snap jump locations to the nearest nodes and record them as
    /// breakpoints. Each resulting smooth segment must contain at least 9
    /// nodes for the quadrature stencils.
    pub fn with_breakpoints(mut self, jumps: &[f64]) -> Result<Grid> {
        let mut idx: Vec<usize> = jumps
            .iter()
            .map(|&x| self.nearest_index(x))
            .filter(|&i| i > 0 && i + 1 < self.points.len())
            .collect();
        idx.sort_unstable();
        idx.dedup();
        let mut prev = 0usize;
        for &i in idx.iter().chain(std::iter::once(&(self.points.len() - 1))) {
            if i - prev < 8 {
                return Err(Error::InvalidGrid(format!(
                    "segment between nodes {prev} and {i} has fewer than 9 nodes; \
                     refine the grid or merge jumps"
                )));
            }
            prev = i;
        }
        self.breaks = idx;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn x(&self, i: usize) -> f64 {
        self.points[i]
    }

    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    pub fn left(&self) -> f64 {
        self.points[0]
    }

    pub fn right(&self) -> f64 {
        *self.points.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[usize] {
        &self.breaks
    }

    pub fn nearest_index(&self, x: f64) -> usize {
        let t = (x - self.points[0]) / self.h;
        (t.round().max(0.0) as usize).min(self.points.len() - 1)
    }

    /// Node index carrying `x`, if `x` sits on the grid to 1 ulp-scale.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let i = self.nearest_index(x);
        if (self.points[i] - x).abs() <= 1e-9 * self.h.max(1.0) {
            Some(i)
        } else {
            None
        }
    }

    /// Node ranges [lo, hi] of the smooth segments between breakpoints.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.breaks.len() + 1);
        let mut lo = 0usize;
        for &b in &self.breaks {
            out.push((lo, b));
            lo = b;
        }
        out.push((lo, self.points.len() - 1));
        out
    }

    /// Segment (node range) containing the interval [x_i, x_{i+1}].
    pub fn segment_of_interval(&self, i: usize) -> (usize, usize) {
        for &(lo, hi) in self.segments().iter() {
            if i >= lo && i < hi {
                return (lo, hi);
            }
        }
        (0, self.points.len() - 1)
    }
}
