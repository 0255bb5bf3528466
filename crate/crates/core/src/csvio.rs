//! CSV interchange for tables, kernels, solution batches and eigendata.
//!
//! Numbers are written with 17 significant digits so that a read-back is
//! bit-identical. Complex quantities occupy paired re/im columns. These
//! files are f64-level tabulations; kernels are rebuilt from the pipeline,
//! not from a dump.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::formal_powers::FormalPowersTable;
use crate::grid::Grid;
use crate::spectral::Eigenpair;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header: x, re_f, im_f, re_phi1, im_phi1, ...
pub fn write_formal_powers<W: Write>(w: &mut W, table: &FormalPowersTable) -> Result<()> {
    let mut header = String::from("x,re_f,im_f");
    for k in 1..=table.k_max() {
        header.push_str(&format!(",re_phi{k},im_phi{k}"));
    }
    writeln!(w, "{header}")?;
    for (i, &x) in table.grid().points().iter().enumerate() {
        let mut line = fmt_f64(x);
        for k in 0..=table.k_max() {
            let v = table.phi(k)[i];
            line.push_str(&format!(",{},{}", fmt_f64(v.re), fmt_f64(v.im)));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Read back a formal-powers dump: the grid and the sample columns
/// (index 0 is f = phi_0).
pub fn read_formal_powers<R: BufRead>(r: R) -> Result<(Grid, Vec<Vec<Complex64>>)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::CsvParse { line: 1, message: "empty file".into() })??;
    let n_cols = header.split(',').count();
    if n_cols < 3 || n_cols % 2 == 0 {
        return Err(Error::CsvParse {
            line: 1,
            message: format!("expected x plus re/im pairs, got {n_cols} columns"),
        });
    }
    let k_max = (n_cols - 3) / 2;
    let mut xs: Vec<f64> = Vec::new();
    let mut cols: Vec<Vec<Complex64>> = vec![Vec::new(); k_max + 1];
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_cols {
            return Err(Error::CsvParse {
                line: lineno + 2,
                message: format!("expected {n_cols} fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|e| Error::CsvParse {
                line: lineno + 2,
                message: format!("bad float {s:?}: {e}"),
            })
        };
        xs.push(parse(fields[0])?);
        for (k, col) in cols.iter_mut().enumerate() {
            let re = parse(fields[1 + 2 * k])?;
            let im = parse(fields[2 + 2 * k])?;
            col.push(Complex64::new(re, im));
        }
    }
    if xs.len() < 2 {
        return Err(Error::CsvParse { line: 2, message: "need at least two rows".into() });
    }
    let grid = Grid::new(xs[0], *xs.last().unwrap(), xs.len() - 1)?;
    for (i, &x) in xs.iter().enumerate() {
        if (grid.x(i) - x).abs() > 1e-9 * grid.step() {
            return Err(Error::CsvParse {
                line: i + 2,
                message: format!("abscissa {x} is not uniform"),
            });
        }
    }
    Ok((grid, cols))
}

/// Kernel coefficient dump: representation tag, x, order, re, im.
pub fn write_kernel_coefficients<W: Write>(
    w: &mut W,
    tag: &str,
    grid: &Grid,
    coefficient: impl Fn(usize) -> Vec<Complex64>,
    orders: usize,
) -> Result<()> {
    writeln!(w, "rep,x,n,re,im")?;
    for n in 0..=orders {
        let row = coefficient(n);
        for (i, &x) in grid.points().iter().enumerate() {
            writeln!(
                w,
                "{tag},{},{n},{},{}",
                fmt_f64(x),
                fmt_f64(row[i].re),
                fmt_f64(row[i].im)
            )?;
        }
    }
    Ok(())
}

/// Solution batch: omega (re/im), x, u (re/im), tail certificate.
pub fn write_solution_batch<W: Write>(
    w: &mut W,
    rows: &[(Complex64, f64, Complex64, f64)],
) -> Result<()> {
    writeln!(w, "re_omega,im_omega,x,re_u,im_u,eps_hat")?;
    for &(omega, x, u, eps) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(omega.re),
            fmt_f64(omega.im),
            fmt_f64(x),
            fmt_f64(u.re),
            fmt_f64(u.im),
            fmt_f64(eps)
        )?;
    }
    Ok(())
}

/// Eigendata: index, omega, lambda, residual, certificate.
pub fn write_eigenpairs<W: Write>(w: &mut W, pairs: &[Eigenpair]) -> Result<()> {
    writeln!(w, "n,omega,lambda,residual,certificate")?;
    for p in pairs {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.index,
            fmt_f64(p.omega),
            fmt_f64(p.lambda),
            fmt_f64(p.residual),
            fmt_f64(p.certificate)
        )?;
    }
    Ok(())
}

/// Eigenfunction matrix: x plus one column per pair.
pub fn write_eigenfunctions<W: Write>(
    w: &mut W,
    grid: &Grid,
    pairs: &[Eigenpair],
) -> Result<()> {
    let mut header = String::from("x");
    for p in pairs {
        header.push_str(&format!(",ef_{}", p.index));
    }
    writeln!(w, "{header}")?;
    for (i, &x) in grid.points().iter().enumerate() {
        let mut line = fmt_f64(x);
        for p in pairs {
            line.push_str(&format!(",{}", fmt_f64(p.eigenfunction[i])));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Planar field samples: x, y, re_u, im_u.
pub fn write_field<W: Write>(w: &mut W, rows: &[(f64, f64, Complex64)]) -> Result<()> {
    writeln!(w, "x,y,re_u,im_u")?;
    for &(x, y, u) in rows {
        writeln!(w, "{},{},{},{}", fmt_f64(x), fmt_f64(y), fmt_f64(u.re), fmt_f64(u.im))?;
    }
    Ok(())
}
