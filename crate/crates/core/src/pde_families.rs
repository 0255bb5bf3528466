//! Complete solution families and transmuted fundamental solutions for
//! (Delta - q(x)) u(x,y) = 0 in the plane.
//!
//! Since (Delta - q) T = T Delta in the x-variable, the images of the
//! harmonic polynomials under T form a complete solution family:
//!
//! ```text
//! u_0      = f(x)
//! u_{2m+1} = sum_{even k <= m+1} (-1)^{k/2}   C(m+1,k) phi_{m+1-k}(x) y^k
//! u_{2m}   = sum_{odd  k <= m}   (-1)^{(k+1)/2} C(m,k)  phi_{m-k}(x)  y^k
//! ```
//!
//! (upper limits fixed by requiring exact degeneration to Re z^n, Im z^n at
//! q = 0). The fundamental solution log|x+iy - Z| maps to a series in
//! Legendre Q functions; with W = Z - iy,
//!
//! ```text
//! T[log] = log|x+iy-Z| + beta_0(x) Re( log((W+x)(W-x)) + 2 Q_1(W/x) )
//!          + 2 sum_{n>=1} beta_n(x)/(2n+1) Re( Q_{n+1}(W/x) - Q_{n-1}(W/x) ),
//! ```
//!
//! which grounds a method of fundamental solutions with variable q.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formal_powers::FormalPowersTable;
use crate::grid::Grid;
use crate::kernel_legendre::LegendreKernel;
use crate::numerics::legendre_q::legendre_q_array;
use crate::numerics::lstsq::{lstsq, lstsq_real};
use crate::potential::cubic_interp;

/// phi_k at arbitrary x by local cubic interpolation.
fn phi_at(powers: &FormalPowersTable, k: usize, x: f64) -> Complex64 {
    if let Some(i) = powers.grid().index_of(x) {
        powers.phi(k)[i]
    } else {
        cubic_interp(powers.grid(), powers.phi(k), x)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0f64;
    for j in 0..k.min(n - k) {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// Highest formal-power order used by family member m.
pub fn member_max_order(m: usize) -> usize {
    if m == 0 {
        0
    } else if m % 2 == 1 {
        m / 2 + 1
    } else {
        m / 2 - 1
    }
}

/// Family member u_m evaluated at (x, y).
pub fn family_member(powers: &FormalPowersTable, m: usize, x: f64, y: f64) -> Result<Complex64> {
    if member_max_order(m) > powers.k_max() {
        return Err(Error::InvalidArgument(format!(
            "family member {m} needs formal powers up to {}, table has {}",
            member_max_order(m),
            powers.k_max()
        )));
    }
    if x < powers.grid().left() || x > powers.grid().right() {
        return Err(Error::Domain(format!("x = {x} outside the tabulated interval")));
    }
    if m == 0 {
        return Ok(phi_at(powers, 0, x));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    if m % 2 == 1 {
        // image of Re z^{mm}, mm = (m+1)/2
        let mm = (m + 1) / 2;
        let mut k = 0usize;
        while k <= mm {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            acc += phi_at(powers, mm - k, x) * (sign * binomial(mm, k) * y.powi(k as i32));
            k += 2;
        }
    } else {
        // image of Re(i z^{mm}) = -Im z^{mm}, mm = m/2
        let mm = m / 2;
        let mut k = 1usize;
        while k <= mm {
            let sign = if ((k + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            acc += phi_at(powers, mm - k, x) * (sign * binomial(mm, k) * y.powi(k as i32));
            k += 2;
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { cx: f64, cy: f64, r: f64 },
}

#[derive(Clone, Debug)]
pub struct PlanarDomain {
    pub shape: Shape,
    pub boundary_count: usize,
}

impl PlanarDomain {
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, boundary_count: usize) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::InvalidArgument("degenerate rectangle".into()));
        }
        Ok(PlanarDomain { shape: Shape::Rectangle { x0, x1, y0, y1 }, boundary_count })
    }

    pub fn disk(cx: f64, cy: f64, r: f64, boundary_count: usize) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument("disk radius must be positive".into()));
        }
        Ok(PlanarDomain { shape: Shape::Disk { cx, cy, r }, boundary_count })
    }

    pub fn x_extent(&self) -> (f64, f64) {
        match self.shape {
            Shape::Rectangle { x0, x1, .. } => (x0, x1),
            Shape::Disk { cx, r, .. } => (cx - r, cx + r),
        }
    }

    /// Center and circumradius.
    pub fn circumcircle(&self) -> (f64, f64, f64) {
        match self.shape {
            Shape::Rectangle { x0, x1, y0, y1 } => {
                let cx = 0.5 * (x0 + x1);
                let cy = 0.5 * (y0 + y1);
                ((x1 - x0).hypot(y1 - y0) * 0.5, cx, cy)
            }
            Shape::Disk { cx, cy, r } => (r, cx, cy),
        }
    }

    /// The transmutation integral must stay inside the tabulated interval.
    pub fn validate_against(&self, grid: &Grid) -> Result<()> {
        let (lo, hi) = self.x_extent();
        if lo < grid.left() - 1e-12 || hi > grid.right() + 1e-12 {
            return Err(Error::Domain(format!(
                "domain x-extent [{lo}, {hi}] exceeds the kernel interval [{}, {}]",
                grid.left(),
                grid.right()
            )));
        }
        Ok(())
    }

    /// Arc-length-uniform boundary sample.
    pub fn boundary_points(&self) -> Vec<(f64, f64)> {
        let p = self.boundary_count;
        match self.shape {
            Shape::Disk { cx, cy, r } => (0..p)
                .map(|i| {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / p as f64;
                    (cx + r * th.cos(), cy + r * th.sin())
                })
                .collect(),
            Shape::Rectangle { x0, x1, y0, y1 } => {
                let w = x1 - x0;
                let h = y1 - y0;
                let per = 2.0 * (w + h);
                (0..p)
                    .map(|i| {
                        let mut s = per * i as f64 / p as f64;
                        if s < w {
                            return (x0 + s, y0);
                        }
                        s -= w;
                        if s < h {
                            return (x1, y0 + s);
                        }
                        s -= h;
                        if s < w {
                            return (x1 - s, y1);
                        }
                        s -= w;
                        (x0, y1 - s)
                    })
                    .collect()
            }
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self.shape {
            Shape::Rectangle { x0, x1, y0, y1 } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
            Shape::Disk { cx, cy, r } => (x - cx).hypot(y - cy) <= r,
        }
    }

    /// Strictly interior lattice, margin of one cell from the boundary.
    pub fn interior_points(&self, nx: usize, ny: usize) -> Vec<(f64, f64)> {
        let (x0, x1, y0, y1) = match self.shape {
            Shape::Rectangle { x0, x1, y0, y1 } => (x0, x1, y0, y1),
            Shape::Disk { cx, cy, r } => (cx - r, cx + r, cy - r, cy + r),
        };
        let mut out = Vec::new();
        for i in 1..nx {
            for j in 1..ny {
                let x = x0 + (x1 - x0) * i as f64 / nx as f64;
                let y = y0 + (y1 - y0) * j as f64 / ny as f64;
                let inside = match self.shape {
                    Shape::Rectangle { .. } => true,
                    Shape::Disk { cx, cy, r } => (x - cx).hypot(y - cy) < 0.95 * r,
                };
                if inside {
                    out.push((x, y));
                }
            }
        }
        out
    }
}

/// Least-squares fit of boundary data by the first `members` family members.
#[derive(Clone, Debug)]
pub struct DirichletSolution {
    pub coefficients: Vec<Complex64>,
    pub boundary_residual: f64,
}

impl DirichletSolution {
    pub fn eval(&self, powers: &FormalPowersTable, x: f64, y: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &c) in self.coefficients.iter().enumerate() {
            acc += c * family_member(powers, m, x, y)?;
        }
        Ok(acc)
    }
}

pub fn solve_dirichlet<F>(
    powers: &FormalPowersTable,
    domain: &PlanarDomain,
    boundary_data: F,
    members: usize,
) -> Result<DirichletSolution>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    domain.validate_against(powers.grid())?;
    let pts = domain.boundary_points();
    let p = pts.len();
    if p < 4 * members {
        return Err(Error::InvalidArgument(format!(
            "{p} boundary points for {members} members; need at least {}",
            4 * members
        )));
    }
    // Assemble column-wise, normalize each column to unit boundary norm.
    let mut matrix = vec![Complex64::new(0.0, 0.0); p * members];
    let rows: Vec<Vec<Complex64>> = pts
        .par_iter()
        .map(|&(x, y)| {
            (0..members)
                .map(|m| family_member(powers, m, x, y))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut col_scale = vec![0.0f64; members];
    for row in &rows {
        for (m, v) in row.iter().enumerate() {
            col_scale[m] += v.norm_sqr();
        }
    }
    for s in col_scale.iter_mut() {
        *s = s.sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    for (r, row) in rows.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            matrix[r * members + m] = v / col_scale[m];
        }
    }
    let rhs: Vec<Complex64> = pts.iter().map(|&(x, y)| boundary_data(x, y)).collect();
    let sol = match lstsq(&matrix, p, members, &rhs) {
        Ok(s) => s,
        Err(Error::RankDeficient { col, .. }) => {
            return Err(Error::BasisDegenerate { col });
        }
        Err(e) => return Err(e),
    };
    let coefficients: Vec<Complex64> =
        sol.x.iter().zip(&col_scale).map(|(c, s)| c / s).collect();
    Ok(DirichletSolution { coefficients, boundary_residual: sol.residual_norm })
}

/// Transmuted fundamental solution T[log|. - Z|](x, y) for a source
/// Z = eta + i xi off the segment [-|x|, |x|] shifted by iy.
pub fn mfs_image(kern: &LegendreKernel, source: Complex64, x: f64, y: f64) -> Result<f64> {
    if !kern.is_real() {
        return Err(Error::InvalidArgument(
            "transmuted fundamental solutions require a real-valued potential".into(),
        ));
    }
    let w_shift = source - Complex64::new(0.0, y); // W = Z - iy
    let base = (Complex64::new(x, y) - source).norm().ln();
    let h = kern.grid().step();
    if x.abs() < 0.5 * h {
        // the correction carries a factor beta_n(x) -> 0
        return Ok(base);
    }
    let n = kern.truncation_order();
    let q = legendre_q_array(n + 1, w_shift / x)?;
    let b0 = kern.beta_at(0, x).re;
    let log_term = ((w_shift + x) * (w_shift - x)).ln().re;
    let mut acc = b0 * (log_term + 2.0 * q[1].re);
    for m in 1..=n {
        let beta = kern.beta_at(m, x).re;
        acc += 2.0 * beta / (2 * m + 1) as f64 * (q[m + 1] - q[m - 1]).re;
    }
    Ok(base + acc)
}

/// Sources on a circle at 1.5x the circumradius, uniform in angle.
pub fn default_sources(domain: &PlanarDomain, count: usize) -> Vec<Complex64> {
    let (r, cx, cy) = domain.circumcircle();
    (0..count)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / count as f64;
            Complex64::new(cx + 1.5 * r * th.cos(), cy + 1.5 * r * th.sin())
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct MfsSolution {
    pub weights: Vec<f64>,
    pub boundary_residual: f64,
    /// (x, y, |(Delta_h - q) u|) at a few interior points, h = grid step.
    pub interior_spot_residuals: Vec<(f64, f64, f64)>,
}

impl MfsSolution {
    pub fn eval(&self, kern: &LegendreKernel, sources: &[Complex64], x: f64, y: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (&w, &z) in self.weights.iter().zip(sources) {
            acc += w * mfs_image(kern, z, x, y)?;
        }
        Ok(acc)
    }
}

/// Least-squares collocation of transmuted point sources against real
/// boundary data.
pub fn mfs_solve<F>(
    kern: &LegendreKernel,
    domain: &PlanarDomain,
    boundary_data: F,
    sources: &[Complex64],
    q: &crate::potential::Potential,
) -> Result<MfsSolution>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    domain.validate_against(kern.grid())?;
    let pts = domain.boundary_points();
    let p = pts.len();
    let k = sources.len();
    if p < 2 * k {
        return Err(Error::InvalidArgument(format!(
            "{p} boundary points for {k} sources; need at least {}",
            2 * k
        )));
    }
    let rows: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|&(x, y)| {
            sources.iter().map(|&z| mfs_image(kern, z, x, y)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = vec![0.0f64; p * k];
    for (r, row) in rows.iter().enumerate() {
        matrix[r * k..(r + 1) * k].copy_from_slice(row);
    }
    let rhs: Vec<f64> = pts.iter().map(|&(x, y)| boundary_data(x, y)).collect();
    let (weights, boundary_residual) = match lstsq_real(&matrix, p, k, &rhs) {
        Ok(s) => s,
        Err(Error::RankDeficient { col, .. }) => return Err(Error::BasisDegenerate { col }),
        Err(e) => return Err(e),
    };
    let sol = MfsSolution { weights, boundary_residual, interior_spot_residuals: Vec::new() };

    // Spot-check the PDE residual with a five-point stencil at grid spacing.
    let h = kern.grid().step();
    let mut checked = sol.clone();
    let (rad, cx, cy) = domain.circumcircle();
    let spots = [
        (cx, cy),
        (cx + 0.3 * rad, cy),
        (cx, cy - 0.25 * rad),
        (cx - 0.2 * rad, cy + 0.2 * rad),
    ];
    for &(x, y) in spots.iter().filter(|&&(x, y)| domain.contains(x, y)) {
        let u = |xx: f64, yy: f64| sol.eval(kern, sources, xx, yy);
        let lap = (u(x + h, y)? + u(x - h, y)? + u(x, y + h)? + u(x, y - h)?
            - 4.0 * u(x, y)?)
            / (h * h);
        let res = lap - q.eval(x).re * u(x, y)?;
        checked.interior_spot_residuals.push((x, y, res.abs()));
    }
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel_legendre::TAIL_MARGIN;
    use crate::potential::Potential;

    fn powers_for(q: &Potential, b: f64, m: usize, k_max: usize) -> FormalPowersTable {
        let grid = Grid::symmetric(b, m).unwrap();
        FormalPowersTable::build(q, &grid, k_max).unwrap()
    }

    #[test]
    fn free_family_members_are_harmonic_polynomials() {
        let p = powers_for(&Potential::zero(), 1.5, 600, 12);
        let cases = [
            (0usize, 0.3, 0.8, 1.0),
            (1, 0.3, 0.8, 0.3),                      // Re z = x
            (2, 0.3, 0.8, -0.8),                     // Re(iz) = -y
            (3, 0.3, 0.8, 0.3f64 * 0.3 - 0.64),      // Re z^2 = x^2 - y^2
            (4, 0.3, 0.8, -2.0 * 0.3 * 0.8),         // -Im z^2 = -2xy
            (5, 0.3, 0.8, 0.027 - 3.0 * 0.3 * 0.64), // Re z^3
        ];
        for &(m, x, y, expect) in &cases {
            let v = family_member(&p, m, x, y).unwrap();
            assert!((v.re - expect).abs() < 1e-10, "m={m}: {} vs {expect}", v.re);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn constant_potential_members_satisfy_pde() {
        // q = 1: u_0 = cosh x, u_1 = phi_1 = sinh x; (Delta - 1) u = 0
        let p = powers_for(&Potential::constant(1.0), 1.0, 1000, 12);
        let i = p.grid().index_of(0.5).unwrap();
        assert!((p.f()[i].re - 0.5f64.cosh()).abs() < 1e-11);
        let u0 = family_member(&p, 0, 0.5, 0.77).unwrap();
        assert!((u0.re - 0.5f64.cosh()).abs() < 1e-11, "u0 independent of y");
        let u1 = family_member(&p, 1, 0.5, -2.0).unwrap();
        assert!((u1.re - 0.5f64.sinh()).abs() < 1e-11);
    }

    #[test]
    fn members_satisfy_discrete_pde() {
        // five-point Laplacian minus q at grid nodes is O(h^2)
        let q = Potential::from_real_fn(|x| x.exp());
        let p = powers_for(&q, 1.0, 500, 12);
        let h = p.grid().step();
        for m in 0..=8usize {
            for &(x, y) in &[(0.25, 0.4), (-0.3, -0.2), (0.5, 0.0)] {
                let i = p.grid().index_of(x).unwrap_or(p.grid().nearest_index(x));
                let xg = p.grid().x(i);
                let u = |xx: f64, yy: f64| family_member(&p, m, xx, yy).unwrap().re;
                let lap = (u(xg + h, y) + u(xg - h, y) + u(xg, y + h) + u(xg, y - h)
                    - 4.0 * u(xg, y))
                    / (h * h);
                let res = (lap - xg.exp() * u(xg, y)).abs();
                let scale = 1.0 + u(xg, y).abs() / (h * h) * 1e-11;
                assert!(res < 5e-4 * scale.max(1.0), "m={m} at ({xg},{y}): {res}");
            }
        }
    }

    #[test]
    fn dirichlet_recovers_exact_member() {
        // q = 0, data Re z^2 on the square: coefficient 1 at member 3
        let p = powers_for(&Potential::zero(), 1.0, 400, 20);
        let domain = PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0, 160).unwrap();
        let sol = solve_dirichlet(
            &p,
            &domain,
            |x, y| Complex64::new(x * x - y * y, 0.0),
            8,
        )
        .unwrap();
        for (m, c) in sol.coefficients.iter().enumerate() {
            let expect = if m == 3 { 1.0 } else { 0.0 };
            assert!((c.re - expect).abs() < 1e-10, "m={m}: {c}");
        }
        let v = sol.eval(&p, 0.37, -0.4).unwrap();
        assert!((v.re - (0.37f64 * 0.37 - 0.16)).abs() < 1e-10);
    }

    #[test]
    fn dirichlet_manufactured_exponential() {
        // q = 1: e^x solves (Delta - 1) u = 0 and equals u_0 + u_1
        let q = Potential::constant(1.0);
        let p = powers_for(&q, 1.0, 1000, 20);
        let domain = PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0, 200).unwrap();
        let sol =
            solve_dirichlet(&p, &domain, |x, _| Complex64::new(x.exp(), 0.0), 30).unwrap();
        let mut worst = 0.0f64;
        for &(x, y) in &domain.interior_points(7, 7) {
            let v = sol.eval(&p, x, y).unwrap();
            worst = worst.max((v.re - x.exp()).abs());
        }
        assert!(worst < 1e-4, "interior max error {worst}");
    }

    #[test]
    fn mfs_image_degenerates_to_log() {
        let p = powers_for(&Potential::zero(), 1.0, 400, 20 + TAIL_MARGIN);
        let kern = LegendreKernel::build(&p, 20).unwrap();
        let z = Complex64::new(2.0, 1.0);
        for &(x, y) in &[(0.5, 0.3), (-0.7, -0.2), (0.9, 0.9), (0.0, 0.4)] {
            let img = mfs_image(&kern, z, x, y).unwrap();
            let exact = (Complex64::new(x, y) - z).norm().ln();
            assert!((img - exact).abs() < 1e-10, "({x},{y}): {img} vs {exact}");
        }
    }

    #[test]
    fn mfs_image_symmetry_for_even_potential() {
        let p = powers_for(&Potential::constant(1.0), 1.0, 800, 16 + TAIL_MARGIN);
        let kern = LegendreKernel::build(&p, 16).unwrap();
        let z = Complex64::new(1.8, 0.7);
        let z_conj = z.conj();
        for &(x, y) in &[(0.4, 0.2), (0.8, -0.5)] {
            let a = mfs_image(&kern, z, x, y).unwrap();
            let b = mfs_image(&kern, z_conj, x, -y).unwrap();
            assert!((a - b).abs() < 1e-11, "({x},{y})");
        }
    }

    #[test]
    fn mfs_image_matches_kernel_quadrature() {
        // independent route: T[g](x,y) = g + int_{-x}^{x} K_N(x,t) g(t,y) dt
        // by Gauss quadrature on the kernel itself
        let q = Potential::constant(1.0);
        let p = powers_for(&q, 1.0, 1500, 24 + TAIL_MARGIN);
        let kern = LegendreKernel::build(&p, 24).unwrap();
        let z = Complex64::new(2.0, 1.0);
        let (nodes, weights) = crate::numerics::quadrature::gauss_legendre(80);
        for &(x, y) in &[(0.5, 0.0), (0.5, 0.4), (1.0, -0.3)] {
            let series = mfs_image(&kern, z, x, y).unwrap();
            let mut acc = 0.0;
            for (&s, &w) in nodes.iter().zip(&weights) {
                let t = s * x;
                let g = (Complex64::new(t, y) - z).norm().ln();
                acc += kern.kernel_value(x, t).unwrap().re * g * w;
            }
            acc *= x;
            let direct = (Complex64::new(x, y) - z).norm().ln() + acc;
            assert!(
                (series - direct).abs() < 1e-8,
                "({x},{y}): series {series} vs quadrature {direct}"
            );
        }
    }

    #[test]
    fn mfs_solves_manufactured_problem() {
        let q = Potential::constant(1.0);
        let p = powers_for(&q, 1.0, 1000, 24 + TAIL_MARGIN);
        let kern = LegendreKernel::build(&p, 24).unwrap();
        let domain = PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0, 200).unwrap();
        let sources = default_sources(&domain, 40);
        let sol = mfs_solve(&kern, &domain, |x, _| x.exp(), &sources, &q).unwrap();
        let mut worst = 0.0f64;
        for &(x, y) in &domain.interior_points(6, 6) {
            let v = sol.eval(&kern, &sources, x, y).unwrap();
            worst = worst.max((v - x.exp()).abs());
        }
        assert!(worst < 1e-3, "interior max error {worst}");
        assert!(sol.boundary_residual < 1e-2);
    }

    #[test]
    fn source_on_cut_rejected() {
        let p = powers_for(&Potential::constant(1.0), 1.0, 400, 12 + TAIL_MARGIN);
        let kern = LegendreKernel::build(&p, 12).unwrap();
        // W/x on the cut: source at (0.5, 0), evaluation at x = 1, y = 0
        assert!(mfs_image(&kern, Complex64::new(0.5, 0.0), 1.0, 0.0).is_err());
    }
}
