//! Job pipeline: potential -> seed -> formal powers -> kernel -> task,
//! with CSV artifacts and a JSON run manifest.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use num_complex::Complex64;
use serde_json::json;

use transmute_core::alt_representations::{HermiteKernel, LaguerreKernel};
use transmute_core::csvio;
use transmute_core::formal_powers::FormalPowersTable;
use transmute_core::kernel_legendre::LegendreKernel;
use transmute_core::numerics::ode_solve_on_grid;
use transmute_core::pde_families::{default_sources, mfs_solve, solve_dirichlet, PlanarDomain};
use transmute_core::spectral::{
    find_eigenvalues, Boundary, EigenReport, EigenTarget, SpectralProblem,
};
use transmute_core::{Grid, Potential, Warning};

use crate::config::{DomainConfig, IntervalKind, JobConfig, Rep, TaskConfig};
use crate::expr;

#[derive(Debug, Default)]
pub struct RunSummary {
    pub warnings: Vec<String>,
    pub outputs: Vec<PathBuf>,
}

pub struct Timings {
    entries: Vec<(String, f64)>,
}

impl Timings {
    pub fn new() -> Timings {
        Timings { entries: Vec::new() }
    }

    pub fn record<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let v = f();
        self.entries.push((stage.to_string(), t0.elapsed().as_secs_f64() * 1e3));
        v
    }
}

impl Default for Timings {
    fn default() -> Self {
        Timings::new()
    }
}

pub struct Pipeline {
    pub grid: Grid,
    pub q: Potential,
    pub powers: FormalPowersTable,
}

/// Potential from the config: expression (with nodal singularity guard) or
/// sample file.
pub fn build_potential(config: &JobConfig, grid: &Grid) -> anyhow::Result<Potential> {
    let pc = &config.potential;
    if let Some(text) = &pc.expr {
        let parsed = expr::parse(text)
            .map_err(|e| anyhow!("potential expression:\n{}", e.render(text)))?;
        let values: Vec<f64> = grid.points().iter().map(|&x| parsed.eval(x)).collect();
        let bad: Vec<usize> =
            (0..values.len()).filter(|&i| !values[i].is_finite()).collect();
        if bad.is_empty() {
            return Ok(Potential::from_real_fn(move |x| parsed.eval(x)));
        }
        if !pc.principal_value_ok {
            bail!(
                "potential is singular at grid node x = {} (set principal_value_ok to \
                 average over adjacent nodes)",
                grid.x(bad[0])
            );
        }
        // mean of the adjacent finite nodes
        let mut fixed = values;
        for &i in &bad {
            let mut lo = i;
            while lo > 0 && !fixed[lo].is_finite() {
                lo -= 1;
            }
            let mut hi = i;
            while hi + 1 < fixed.len() && !fixed[hi].is_finite() {
                hi += 1;
            }
            let (a, b) = (fixed[lo], fixed[hi]);
            fixed[i] = match (a.is_finite(), b.is_finite()) {
                (true, true) => 0.5 * (a + b),
                (true, false) => a,
                (false, true) => b,
                _ => bail!("potential has no finite values near node {i}"),
            };
        }
        let samples = fixed.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        return Ok(Potential::from_samples(grid.clone(), samples)?);
    }
    let path = pc.samples.as_ref().expect("validated");
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading potential samples {}", path.display()))?;
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue; // header
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 2 {
            bail!("sample file line {}: need x,re[,im]", lineno + 1);
        }
        let x: f64 = fields[0].trim().parse().context("sample x")?;
        let re: f64 = fields[1].trim().parse().context("sample re")?;
        let im: f64 = if fields.len() > 2 { fields[2].trim().parse().context("sample im")? } else { 0.0 };
        xs.push(x);
        vals.push(Complex64::new(re, im));
    }
    if xs.len() < 2 {
        bail!("sample file has fewer than two rows");
    }
    let own = Grid::new(xs[0], *xs.last().unwrap(), xs.len() - 1)
        .map_err(|e| anyhow!("sample abscissae: {e}"))?;
    Ok(Potential::from_samples(own, vals)?)
}

pub fn build_grid(config: &JobConfig) -> anyhow::Result<Grid> {
    let grid = match config.interval_kind() {
        IntervalKind::Symmetric => Grid::symmetric(config.b, config.m)?,
        IntervalKind::Half => Grid::half(config.b, config.m)?,
    };
    Ok(grid.with_breakpoints(&config.potential.jumps)?)
}

pub fn build_pipeline(config: &JobConfig, timings: &mut Timings) -> anyhow::Result<Pipeline> {
    let grid = build_grid(config)?;
    let q = build_potential(config, &grid)?;
    let powers = {
        let q = q.clone();
        let grid = grid.clone();
        let k = config.table_order();
        timings
            .record("formal_powers", move || FormalPowersTable::build(&q, &grid, k))?
    };
    Ok(Pipeline { grid, q, powers })
}

fn push_warnings(summary: &mut RunSummary, stage: &str, warnings: &[Warning]) {
    for w in warnings {
        summary.warnings.push(format!("{stage}: {w}"));
    }
}

fn create_out(out_dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))
}

fn write_manifest(
    out_dir: &Path,
    config: &JobConfig,
    timings: &Timings,
    summary: &RunSummary,
    extra: serde_json::Value,
) -> anyhow::Result<()> {
    let manifest = json!({
        "tool": "transmute",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "timings_ms": timings.entries.iter().cloned().collect::<std::collections::BTreeMap<String, f64>>(),
        "warnings": summary.warnings,
        "outputs": summary.outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "report": extra,
    });
    let path = out_dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

/// Execute a validated job; artifacts land in `out_dir`.
pub fn run_job(config: &JobConfig, out_dir: &Path) -> anyhow::Result<RunSummary> {
    config.validate()?;
    create_out(out_dir)?;
    let mut summary = RunSummary::default();
    let mut timings = Timings::new();
    let extra = match &config.task {
        TaskConfig::Solve { omegas } => {
            run_solve(config, omegas, out_dir, &mut summary, &mut timings)?
        }
        TaskConfig::Kernel {} => run_kernel(config, out_dir, &mut summary, &mut timings)?,
        TaskConfig::Eigen { count, omega_range, boundary, scan_density, eigenfunctions } => {
            run_eigen(
                config,
                *count,
                *omega_range,
                *boundary,
                *scan_density,
                *eigenfunctions,
                out_dir,
                &mut summary,
                &mut timings,
            )?
        }
        TaskConfig::Pde { domain, data, members, mfs, sources } => run_pde(
            config,
            domain,
            data,
            *members,
            *mfs,
            *sources,
            out_dir,
            &mut summary,
            &mut timings,
        )?,
        TaskConfig::Compare { omega } => {
            run_compare(config, *omega, out_dir, &mut summary, &mut timings)?
        }
        TaskConfig::Bench { orders, eigen_count } => crate::bench::run_bench(
            config,
            orders,
            *eigen_count,
            out_dir,
            &mut summary,
            &mut timings,
        )?,
    };
    write_manifest(out_dir, config, &timings, &summary, extra)?;
    summary.outputs.push(out_dir.join("manifest.json"));
    Ok(summary)
}

fn run_solve(
    config: &JobConfig,
    omegas: &[f64],
    out_dir: &Path,
    summary: &mut RunSummary,
    timings: &mut Timings,
) -> anyhow::Result<serde_json::Value> {
    let pipeline = build_pipeline(config, timings)?;
    let n = config.order();
    let grid = &pipeline.grid;
    let mut rows: Vec<(Complex64, f64, Complex64, f64)> = Vec::new();
    match config.rep {
        Rep::Legendre => {
            let kern = timings.record("kernel", || LegendreKernel::build(&pipeline.powers, n))?;
            push_warnings(summary, "kernel", kern.warnings());
            timings.record("solve", || {
                for &w in omegas {
                    let omega = Complex64::new(w, 0.0);
                    for i in 0..grid.len() {
                        let x = grid.x(i);
                        let u = kern.solution_at_node(omega, i);
                        rows.push((omega, x, u, kern.tail_estimate(x).bound_real_omega));
                    }
                }
            });
        }
        Rep::Laguerre => {
            let kern = timings.record("kernel", || LaguerreKernel::build(&pipeline.powers, n))?;
            push_warnings(summary, "kernel", kern.warnings());
            timings.record("solve", || -> anyhow::Result<()> {
                for &w in omegas {
                    let omega = Complex64::new(w, 0.0);
                    for i in 0..grid.len() {
                        let x = grid.x(i);
                        if x < 0.0 {
                            continue;
                        }
                        let u = kern.solution(omega, x)?;
                        rows.push((omega, x, u, kern.tail_estimate(x).eps));
                    }
                }
                Ok(())
            })?;
        }
        Rep::Hermite => {
            let kern = timings.record("kernel", || HermiteKernel::build(&pipeline.powers, n))?;
            push_warnings(summary, "kernel", kern.warnings());
            let mut flagged = None;
            timings.record("solve", || -> anyhow::Result<()> {
                for &w in omegas {
                    let omega = Complex64::new(w, 0.0);
                    for i in 0..grid.len() {
                        let x = grid.x(i);
                        let (u, warn) = kern.solution(omega, x)?;
                        if let Some(w) = warn {
                            flagged.get_or_insert(w);
                        }
                        rows.push((omega, x, u, kern.tail_estimate(x).eps));
                    }
                }
                Ok(())
            })?;
            if let Some(w) = flagged {
                push_warnings(summary, "solve", &[w]);
            }
        }
    }
    let path = out_dir.join("solution.csv");
    let mut file = fs::File::create(&path)?;
    csvio::write_solution_batch(&mut file, &rows)?;
    summary.outputs.push(path);
    Ok(json!({"rows": rows.len(), "rep": config.rep.tag()}))
}

fn run_kernel(
    config: &JobConfig,
    out_dir: &Path,
    summary: &mut RunSummary,
    timings: &mut Timings,
) -> anyhow::Result<serde_json::Value> {
    let pipeline = build_pipeline(config, timings)?;
    let n = config.order();
    let powers_path = out_dir.join("formal_powers.csv");
    let mut file = fs::File::create(&powers_path)?;
    csvio::write_formal_powers(&mut file, &pipeline.powers)?;
    summary.outputs.push(powers_path);

    let coeff_path = out_dir.join("kernel_coefficients.csv");
    let mut file = fs::File::create(&coeff_path)?;
    match config.rep {
        Rep::Legendre => {
            let kern = timings.record("kernel", || LegendreKernel::build(&pipeline.powers, n))?;
            push_warnings(summary, "kernel", kern.warnings());
            csvio::write_kernel_coefficients(
                &mut file,
                config.rep.tag(),
                &pipeline.grid,
                |m| kern.beta(m).to_vec(),
                n,
            )?;
        }
        Rep::Laguerre => {
            let kern = timings.record("kernel", || LaguerreKernel::build(&pipeline.powers, n))?;
            push_warnings(summary, "kernel", kern.warnings());
            csvio::write_kernel_coefficients(
                &mut file,
                config.rep.tag(),
                &pipeline.grid,
                |m| kern.coefficient(m).to_vec(),
                n,
            )?;
        }
        Rep::Hermite => {
            let kern = timings.record("kernel", || HermiteKernel::build(&pipeline.powers, n))?;
            push_warnings(summary, "kernel", kern.warnings());
            csvio::write_kernel_coefficients(
                &mut file,
                config.rep.tag(),
                &pipeline.grid,
                |m| kern.coefficient(m).to_vec(),
                n,
            )?;
        }
    }
    summary.outputs.push(coeff_path);
    Ok(json!({"orders": n, "rep": config.rep.tag()}))
}

#[allow(clippy::too_many_arguments)]
fn run_eigen(
    config: &JobConfig,
    count: Option<usize>,
    omega_range: Option<(f64, f64)>,
    boundary: Option<[f64; 4]>,
    scan_density: Option<f64>,
    eigenfunctions: bool,
    out_dir: &Path,
    summary: &mut RunSummary,
    timings: &mut Timings,
) -> anyhow::Result<serde_json::Value> {
    if !matches!(config.rep, Rep::Legendre) {
        bail!("eigenvalue solving uses the Legendre representation only");
    }
    let pipeline = build_pipeline(config, timings)?;
    let kern = timings.record("kernel", || LegendreKernel::build(&pipeline.powers, config.order()))?;
    push_warnings(summary, "kernel", kern.warnings());

    let bc = match boundary {
        None => Boundary::Dirichlet,
        Some([a0, b0, a1, b1]) => Boundary::Robin { a0, b0, a1, b1 },
    };
    let range = match omega_range {
        Some(r) => r,
        None => {
            // Dirichlet spacing is asymptotically pi/b; pad by the potential
            // magnitude so the requested count fits inside the scan.
            let c = count.expect("validated: count or range") as f64;
            let qmax = pipeline
                .q
                .sample(&pipeline.grid)
                .iter()
                .map(|v| v.re.max(0.0))
                .fold(0.0f64, f64::max);
            let hi = (c + 2.0) * std::f64::consts::PI / config.b + qmax.sqrt() + 1.0;
            (0.45 * std::f64::consts::PI / config.b, hi)
        }
    };
    let mut problem = SpectralProblem::new(pipeline.q.clone(), config.b, bc, range)?;
    if let Some(d) = scan_density {
        problem = problem.with_scan_density(d);
    }
    let target = match count {
        Some(c) => EigenTarget::Count(c),
        None => EigenTarget::Range,
    };
    let report: EigenReport =
        timings.record("eigenvalues", || find_eigenvalues(&problem, &kern, target))?;
    push_warnings(summary, "eigenvalues", &report.warnings);

    let path = out_dir.join("eigendata.csv");
    let mut file = fs::File::create(&path)?;
    csvio::write_eigenpairs(&mut file, &report.pairs)?;
    summary.outputs.push(path);
    if eigenfunctions {
        let path = out_dir.join("eigenfunctions.csv");
        let mut file = fs::File::create(&path)?;
        csvio::write_eigenfunctions(&mut file, &pipeline.grid, &report.pairs)?;
        summary.outputs.push(path);
    }
    let worst_residual = report.pairs.iter().map(|p| p.residual).fold(0.0f64, f64::max);
    Ok(json!({
        "found": report.pairs.len(),
        "omega_range": [range.0, range.1],
        "worst_residual": worst_residual,
        "certificate": report.pairs.first().map(|p| p.certificate),
    }))
}

#[allow(clippy::too_many_arguments)]
fn run_pde(
    config: &JobConfig,
    domain_cfg: &DomainConfig,
    data: &str,
    members: usize,
    mfs: bool,
    sources: usize,
    out_dir: &Path,
    summary: &mut RunSummary,
    timings: &mut Timings,
) -> anyhow::Result<serde_json::Value> {
    let pipeline = build_pipeline(config, timings)?;
    let domain = match domain_cfg.shape.as_str() {
        "rectangle" => PlanarDomain::rectangle(
            domain_cfg.x0,
            domain_cfg.x1,
            domain_cfg.y0,
            domain_cfg.y1,
            domain_cfg.boundary_points,
        )?,
        "disk" => PlanarDomain::disk(
            domain_cfg.cx,
            domain_cfg.cy,
            domain_cfg.radius,
            domain_cfg.boundary_points,
        )?,
        other => bail!("unknown domain shape {other:?}"),
    };
    let g = expr::parse_xy(data).map_err(|e| anyhow!("boundary data:\n{}", e.render(data)))?;

    let mut field: Vec<(f64, f64, Complex64)> = Vec::new();
    let lattice = domain.interior_points(40, 40);
    let report = if mfs {
        let kern =
            timings.record("kernel", || LegendreKernel::build(&pipeline.powers, config.order()))?;
        push_warnings(summary, "kernel", kern.warnings());
        let src = default_sources(&domain, sources);
        let sol = timings.record("mfs_collocation", || {
            mfs_solve(&kern, &domain, |x, y| g.eval_xy(x, y), &src, &pipeline.q)
        })?;
        timings.record("field", || -> anyhow::Result<()> {
            for &(x, y) in &lattice {
                let v = sol.eval(&kern, &src, x, y)?;
                field.push((x, y, Complex64::new(v, 0.0)));
            }
            Ok(())
        })?;
        json!({
            "method": "mfs",
            "sources": src.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "weights": sol.weights,
            "boundary_residual": sol.boundary_residual,
            "interior_spot_residuals": sol.interior_spot_residuals,
        })
    } else {
        let sol = timings.record("collocation", || {
            solve_dirichlet(
                &pipeline.powers,
                &domain,
                |x, y| Complex64::new(g.eval_xy(x, y), 0.0),
                members,
            )
        })?;
        timings.record("field", || -> anyhow::Result<()> {
            for &(x, y) in &lattice {
                field.push((x, y, sol.eval(&pipeline.powers, x, y)?));
            }
            Ok(())
        })?;
        json!({
            "method": "family_collocation",
            "members": members,
            "coefficients": sol
                .coefficients
                .iter()
                .map(|c| [c.re, c.im])
                .collect::<Vec<_>>(),
            "boundary_residual": sol.boundary_residual,
        })
    };
    let path = out_dir.join("field.csv");
    let mut file = fs::File::create(&path)?;
    csvio::write_field(&mut file, &field)?;
    summary.outputs.push(path);
    Ok(report)
}

fn run_compare(
    config: &JobConfig,
    omega: f64,
    out_dir: &Path,
    summary: &mut RunSummary,
    timings: &mut Timings,
) -> anyhow::Result<serde_json::Value> {
    let pipeline = build_pipeline(config, timings)?;
    let n_leg = config.n.unwrap_or(Rep::Legendre.default_order());
    let n_alt = config.n.unwrap_or(40);
    let leg = timings.record("legendre", || LegendreKernel::build(&pipeline.powers, n_leg))?;
    let lag = timings.record("laguerre", || LaguerreKernel::build(&pipeline.powers, n_alt))?;
    let her = timings.record("hermite", || HermiteKernel::build(&pipeline.powers, n_alt))?;
    push_warnings(summary, "legendre", leg.warnings());
    push_warnings(summary, "laguerre", lag.warnings());
    push_warnings(summary, "hermite", her.warnings());
    let grid = &pipeline.grid;
    let w = Complex64::new(omega, 0.0);
    let oracle = timings.record("oracle", || ode_solve_on_grid(&pipeline.q, w, grid, 1e-12))?;

    let path = out_dir.join("compare.csv");
    let mut file = fs::File::create(&path)?;
    writeln!(
        file,
        "x,re_legendre,im_legendre,re_laguerre,im_laguerre,re_hermite,im_hermite,re_oracle,im_oracle"
    )?;
    let mut deltas = [0.0f64; 4]; // leg-lag, leg-her, leg-oracle, her-oracle
    let step = (grid.len() / 200).max(1);
    let mut magnitude_flag = None;
    for i in (0..grid.len()).step_by(step) {
        let x = grid.x(i);
        if x < 0.0 {
            continue; // Laguerre representation lives on x >= 0
        }
        let ul = leg.solution_at_node(w, i);
        let ua = lag.solution(w, x)?;
        let (uh, warn) = her.solution(w, x)?;
        if let Some(wn) = warn {
            magnitude_flag.get_or_insert(wn);
        }
        let uo = oracle[i].0;
        deltas[0] = deltas[0].max((ul - ua).norm());
        deltas[1] = deltas[1].max((ul - uh).norm());
        deltas[2] = deltas[2].max((ul - uo).norm());
        deltas[3] = deltas[3].max((uh - uo).norm());
        writeln!(
            file,
            "{},{},{},{},{},{},{},{},{}",
            csvio::fmt_f64(x),
            csvio::fmt_f64(ul.re),
            csvio::fmt_f64(ul.im),
            csvio::fmt_f64(ua.re),
            csvio::fmt_f64(ua.im),
            csvio::fmt_f64(uh.re),
            csvio::fmt_f64(uh.im),
            csvio::fmt_f64(uo.re),
            csvio::fmt_f64(uo.im)
        )?;
    }
    if let Some(wn) = magnitude_flag {
        push_warnings(summary, "compare", &[wn]);
    }
    summary.outputs.push(path);
    let lag_cert = lag.tail_estimate(config.b).eps;
    println!("compare at omega = {omega}:");
    println!("  legendre vs laguerre: {:.3e} (laguerre certificate {:.3e})", deltas[0], lag_cert);
    println!("  legendre vs hermite:  {:.3e}", deltas[1]);
    println!("  legendre vs oracle:   {:.3e}", deltas[2]);
    println!("  hermite vs oracle:    {:.3e}", deltas[3]);
    Ok(json!({
        "omega": omega,
        "delta_legendre_laguerre": deltas[0],
        "delta_legendre_hermite": deltas[1],
        "delta_legendre_oracle": deltas[2],
        "delta_hermite_oracle": deltas[3],
        "laguerre_certificate": lag_cert,
    }))
}
