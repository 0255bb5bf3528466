//! Seed solution f and the formal powers phi_k = T[x^k].
//!
//! With f solving f'' = q f, f(0) = 1, f'(0) = 0 and non-vanishing on the
//! interval, the auxiliary chains
//!
//! ```text
//! X^(0) = 1,  X^(n)(x)  = n int_0^x X^(n-1)(s)  (f^2(s))^((-1)^n)     ds
//! Xt^(0) = 1, Xt^(n)(x) = n int_0^x Xt^(n-1)(s) (f^2(s))^((-1)^(n-1)) ds
//! ```
//!
//! give phi_k = f X^(k) for odd k and phi_k = f Xt^(k) for even k.
//!
//! The recursion is carried on the differences Delta^(n) = X^(n) - x^n with
//! the monomial part integrated exactly, so the tabulated quantities
//! phi_k - x^k and phi_k/x^k - 1 hold their accuracy relative to their own
//! (small) size. The kernel coefficient formulas downstream convert these
//! monomial moments into orthogonal-polynomial moments, a transformation
//! whose conditioning grows like (1+sqrt(2))^n; the difference tables are
//! therefore kept in double-double precision internally.

use num_complex::Complex64;

use crate::dd::{CDd, Dd};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::numerics::ode::ode_solve_on_grid;
use crate::numerics::quadrature::antiderivative_dd;
use crate::potential::Potential;

const SEED_TOL: f64 = 1e-13;
const VANISH_RATIO: f64 = 1e-8;
/// |x|^k values below this are not formed; delta_k is extrapolated instead.
const POWER_FLOOR: f64 = 1e-280;

#[derive(Clone, Debug)]
pub struct FormalPowersTable {
    grid: Grid,
    k_max: usize,
    f: Vec<Complex64>,
    f_prime: Vec<Complex64>,
    phi: Vec<Vec<Complex64>>,
    x_aux: Vec<Vec<Complex64>>,
    x_tilde_aux: Vec<Vec<Complex64>>,
    /// phi_k/x^k - 1 per node (delta_0 = f - 1).
    pub(crate) delta: Vec<Vec<CDd>>,
    /// phi_k - x^k per node.
    pub(crate) diff: Vec<Vec<CDd>>,
}

/// Solve the seed problem f'' = q f, f(0) = 1, f'(0) = 0 on the grid,
/// integrating outward from 0 in both directions.
pub fn solve_seed(q: &Potential, grid: &Grid) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let tab = ode_solve_on_grid(q, Complex64::new(0.0, 0.0), grid, SEED_TOL)?;
    let f: Vec<Complex64> = tab.iter().map(|p| p.0).collect();
    let f_prime: Vec<Complex64> = tab.iter().map(|p| p.1).collect();
    check_nonvanishing(&f)?;
    Ok((f, f_prime))
}

fn check_nonvanishing(f: &[Complex64]) -> Result<()> {
    let max_abs = f.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let min_abs = f.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if min_abs < VANISH_RATIO * max_abs {
        return Err(Error::SeedVanishes { min_abs, max_abs });
    }
    // A real seed crossing zero between nodes may keep large node values.
    let real = f.iter().all(|v| v.im.abs() <= 1e-12 * max_abs);
    if real && f.windows(2).any(|w| w[0].re.signum() != w[1].re.signum()) {
        return Err(Error::SeedVanishes { min_abs, max_abs });
    }
    Ok(())
}

/// Tabulate the formal powers phi_0..phi_k_max from seed samples.
pub fn build_formal_powers(
    grid: &Grid,
    f: &[Complex64],
    f_prime: &[Complex64],
    k_max: usize,
) -> Result<FormalPowersTable> {
    if f.len() != grid.len() || f_prime.len() != grid.len() {
        return Err(Error::InvalidArgument("seed sample length != grid size".into()));
    }
    check_nonvanishing(f)?;
    let n = grid.len();
    let i0 = grid.zero_index();

    // g = f - 1, G = f^2 - 1 = 2g + g^2, Gh = f^-2 - 1 = -G/(1+G)
    let g: Vec<CDd> = f.iter().map(|&v| CDd::from_c64(v).sub(CDd::ONE)).collect();
    let one_plus_g: Vec<CDd> = g.iter().map(|&v| v.add(CDd::ONE)).collect();
    let big_g: Vec<CDd> = g.iter().map(|&v| v.mul_f64(2.0).add(v.mul(v))).collect();
    let g_hat: Vec<CDd> = big_g.iter().map(|&v| v.neg().div(v.add(CDd::ONE))).collect();

    let mut phi = Vec::with_capacity(k_max + 1);
    let mut x_aux = Vec::with_capacity(k_max + 1);
    let mut x_tilde_aux = Vec::with_capacity(k_max + 1);
    let mut delta = Vec::with_capacity(k_max + 1);
    let mut diff = Vec::with_capacity(k_max + 1);

    phi.push(f.to_vec());
    x_aux.push(vec![Complex64::new(1.0, 0.0); n]);
    x_tilde_aux.push(vec![Complex64::new(1.0, 0.0); n]);
    delta.push(g.clone());
    diff.push(g.clone());

    // Running chain differences and the node powers x^(step-1).
    let mut dx = vec![CDd::ZERO; n];
    let mut dxt = vec![CDd::ZERO; n];
    let mut pow: Vec<Dd> = vec![Dd::ONE; n];

    let mut integrand = vec![CDd::ZERO; n];
    for step in 1..=k_max {
        let (w_x, w_xt) = if step % 2 == 1 { (&g_hat, &big_g) } else { (&big_g, &g_hat) };

        for i in 0..n {
            let w = w_x[i];
            integrand[i] = w.mul_dd(pow[i]).add(dx[i]).add(dx[i].mul(w));
        }
        let sf = step as f64;
        dx = antiderivative_dd(grid, &integrand);
        dx.iter_mut().for_each(|v| *v = v.mul_f64(sf));

        for i in 0..n {
            let w = w_xt[i];
            integrand[i] = w.mul_dd(pow[i]).add(dxt[i]).add(dxt[i].mul(w));
        }
        dxt = antiderivative_dd(grid, &integrand);
        dxt.iter_mut().for_each(|v| *v = v.mul_f64(sf));

        for (i, p) in pow.iter_mut().enumerate() {
            *p = p.mul_f64(grid.x(i));
        }

        x_aux.push((0..n).map(|i| dx[i].add_real(pow[i]).to_c64()).collect());
        x_tilde_aux.push((0..n).map(|i| dxt[i].add_real(pow[i]).to_c64()).collect());

        let chain = if step % 2 == 0 { &dxt } else { &dx };
        let mut d_k = vec![CDd::ZERO; n];
        let mut del_k = vec![CDd::ZERO; n];
        let mut phi_k = vec![Complex64::new(0.0, 0.0); n];
        let radius = safe_radius(grid.step(), step);
        for i in 0..n {
            let dk = g[i].mul_dd(pow[i]).add(chain[i].mul(one_plus_g[i]));
            d_k[i] = dk;
            phi_k[i] = dk.add_real(pow[i]).to_c64();
            if i == i0 {
                d_k[i] = CDd::ZERO;
                del_k[i] = CDd::ZERO;
                phi_k[i] = Complex64::new(0.0, 0.0);
            } else if grid.x(i).abs() >= radius {
                del_k[i] = g[i].add(chain[i].mul(one_plus_g[i]).div_dd(pow[i]));
            }
        }
        // Nodes inside the guard radius take the limit value 1 of phi_k/x^k
        // plus a quadratic correction transported from the first safe node.
        fill_near_zero(grid, &mut del_k, radius, i0);

        diff.push(d_k);
        delta.push(del_k);
        phi.push(phi_k);
    }

    Ok(FormalPowersTable {
        grid: grid.clone(),
        k_max,
        f: f.to_vec(),
        f_prime: f_prime.to_vec(),
        phi,
        x_aux,
        x_tilde_aux,
        delta,
        diff,
    })
}

fn safe_radius(h: f64, k: usize) -> f64 {
    let underflow = (POWER_FLOOR.ln() / k as f64).exp();
    (4.0 * h).max(underflow)
}

fn fill_near_zero(grid: &Grid, del: &mut [CDd], radius: f64, i0: usize) {
    let n = del.len();
    // positive side
    if let Some(r) = (i0 + 1..n).find(|&i| grid.x(i).abs() >= radius) {
        for i in i0 + 1..r {
            let ratio = grid.x(i) / grid.x(r);
            del[i] = del[r].mul_f64(ratio * ratio);
        }
    } else {
        for d in del.iter_mut().skip(i0 + 1) {
            *d = CDd::ZERO;
        }
    }
    // negative side
    if i0 > 0 {
        if let Some(r) = (0..i0).rev().find(|&i| grid.x(i).abs() >= radius) {
            for i in r + 1..i0 {
                let ratio = grid.x(i) / grid.x(r);
                del[i] = del[r].mul_f64(ratio * ratio);
            }
        } else {
            for d in del.iter_mut().take(i0) {
                *d = CDd::ZERO;
            }
        }
    }
}

impl FormalPowersTable {
    /// Seed + chains in one call.
    pub fn build(q: &Potential, grid: &Grid, k_max: usize) -> Result<FormalPowersTable> {
        let (f, f_prime) = solve_seed(q, grid)?;
        build_formal_powers(grid, &f, &f_prime, k_max)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn f(&self) -> &[Complex64] {
        &self.f
    }

    pub fn f_prime(&self) -> &[Complex64] {
        &self.f_prime
    }

    /// phi_k sampled on the grid.
    pub fn phi(&self, k: usize) -> &[Complex64] {
        &self.phi[k]
    }

    /// X^(n) sampled on the grid.
    pub fn x_aux(&self, n: usize) -> &[Complex64] {
        &self.x_aux[n]
    }

    /// Xt^(n) sampled on the grid.
    pub fn x_tilde_aux(&self, n: usize) -> &[Complex64] {
        &self.x_tilde_aux[n]
    }
}
