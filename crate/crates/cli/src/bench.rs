//! Benchmark harness: truncation-order sweeps, per-omega evaluation cost,
//! grid scaling, and the eigenvalue-error comparison against a fixed-step
//! marching baseline.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::bail;
use num_complex::Complex64;
use serde_json::json;

use transmute_core::csvio::fmt_f64;
use transmute_core::formal_powers::FormalPowersTable;
use transmute_core::kernel_legendre::LegendreKernel;
use transmute_core::numerics::ode_solve_on_grid;
use transmute_core::spectral::{find_eigenvalues, shooting, EigenTarget, SpectralProblem};

use crate::config::{JobConfig, Rep, TaskConfig};
use crate::tasks::{build_grid, build_potential, Pipeline, RunSummary, Timings};

const BENCH_OMEGAS: [f64; 4] = [1.0, 5.0, 25.0, 100.0];

pub fn run_bench(
    config: &JobConfig,
    orders: &[usize],
    eigen_count: usize,
    out_dir: &Path,
    summary: &mut RunSummary,
    timings: &mut Timings,
) -> anyhow::Result<serde_json::Value> {
    if !matches!(config.rep, Rep::Legendre) {
        bail!("the benchmark sweeps the Legendre representation");
    }
    let pipeline = crate::tasks::build_pipeline(config, timings)?;
    let grid = &pipeline.grid;
    let max_order = *orders.iter().max().unwrap();
    if max_order + 8 > pipeline.powers.k_max() {
        bail!(
            "largest bench order {max_order} needs K_max >= {}, table has {}",
            max_order + 8,
            pipeline.powers.k_max()
        );
    }

    // Reference solutions, one per omega, reused across the order sweep.
    let oracle: Vec<Vec<Complex64>> = BENCH_OMEGAS
        .iter()
        .map(|&w| {
            ode_solve_on_grid(&pipeline.q, Complex64::new(w, 0.0), grid, 1e-12)
                .map(|v| v.into_iter().map(|p| p.0).collect())
        })
        .collect::<Result<_, _>>()?;

    let orders_path = out_dir.join("bench_orders.csv");
    let mut file = fs::File::create(&orders_path)?;
    writeln!(file, "n,build_ms,eval_us_per_point,max_err")?;
    println!("order sweep (q on [{}, {}], M = {}):", grid.left(), grid.right(), grid.intervals());
    for &n in orders {
        let t0 = Instant::now();
        let kern = LegendreKernel::build(&pipeline.powers, n)?;
        let build_ms = t0.elapsed().as_secs_f64() * 1e3;
        let mut max_err = 0.0f64;
        let t1 = Instant::now();
        let mut evals = 0usize;
        for (k, &w) in BENCH_OMEGAS.iter().enumerate() {
            for i in 0..grid.len() {
                let u = kern.solution_at_node(Complex64::new(w, 0.0), i);
                max_err = max_err.max((u - oracle[k][i]).norm());
                evals += 1;
            }
        }
        let eval_us = t1.elapsed().as_secs_f64() * 1e6 / evals as f64;
        writeln!(file, "{n},{},{},{}", fmt_f64(build_ms), fmt_f64(eval_us), fmt_f64(max_err))?;
        println!("  N = {n:3}: build {build_ms:8.2} ms, eval {eval_us:7.3} us/point, max err {max_err:.3e}");
    }
    summary.outputs.push(orders_path);

    // Per-omega cost: the series length is N regardless of omega.
    let kern = LegendreKernel::build(&pipeline.powers, max_order)?;
    let mut omega_cost = Vec::new();
    for &w in &BENCH_OMEGAS {
        let t = Instant::now();
        let mut sink = Complex64::new(0.0, 0.0);
        for i in 0..grid.len() {
            sink += kern.solution_at_node(Complex64::new(w, 0.0), i);
        }
        std::hint::black_box(sink);
        omega_cost.push((w, t.elapsed().as_secs_f64() * 1e6 / grid.len() as f64));
    }
    println!("per-omega evaluation cost at N = {max_order}:");
    for &(w, us) in &omega_cost {
        println!("  omega = {w:6.1}: {us:7.3} us/point");
    }

    // Eigenvalue error curve: representation vs fixed-step marching, both
    // against the adaptive reference.
    let eigen = bench_eigen(config, &pipeline, eigen_count, out_dir, summary)?;

    // Grid scaling of the table build.
    let scale = bench_grid_scaling(config)?;
    println!(
        "table build: M = {} in {:.1} ms, M = {} in {:.1} ms (ratio {:.2})",
        scale.0, scale.1, scale.2, scale.3, scale.3 / scale.1
    );

    Ok(json!({
        "orders": orders,
        "omega_cost_us": omega_cost,
        "eigen": eigen,
        "grid_scaling": {
            "m_small": scale.0, "ms_small": scale.1,
            "m_large": scale.2, "ms_large": scale.3,
        },
    }))
}

fn bench_eigen(
    config: &JobConfig,
    pipeline: &Pipeline,
    count: usize,
    out_dir: &Path,
    summary: &mut RunSummary,
) -> anyhow::Result<serde_json::Value> {
    if pipeline.grid.left() != 0.0 {
        bail!("the eigenvalue benchmark runs on [0, b]");
    }
    let b = config.b;
    let qmax = pipeline
        .q
        .sample(&pipeline.grid)
        .iter()
        .map(|v| v.re.max(0.0))
        .fold(0.0f64, f64::max);
    let hi = (count as f64 + 2.0) * std::f64::consts::PI / b + qmax.sqrt() + 1.0;
    let range = (0.45 * std::f64::consts::PI / b, hi);
    let problem = SpectralProblem::dirichlet(pipeline.q.clone(), b, range)?;

    let t0 = Instant::now();
    let reference = shooting::oracle_eigenvalues(&problem, count)?;
    let t_ref = t0.elapsed().as_secs_f64();
    if reference.len() < count {
        bail!("reference produced {} of {count} eigenvalues", reference.len());
    }

    let n = config.order();
    let kern = LegendreKernel::build(&pipeline.powers, n)?;
    let t0 = Instant::now();
    let report = find_eigenvalues(&problem, &kern, EigenTarget::Count(count))?;
    let t_nsbf = t0.elapsed().as_secs_f64();
    if report.pairs.len() < count {
        bail!("series solver produced {} of {count} eigenvalues", report.pairs.len());
    }

    // Fixed-step RK4 marching with as many steps as the table has intervals.
    let steps = pipeline.grid.intervals();
    let t0 = Instant::now();
    let marched = shooting::fixed_step_eigenvalues(
        &pipeline.q,
        b,
        range,
        problem.scan_density,
        steps,
        count,
    )?;
    let t_march = t0.elapsed().as_secs_f64();

    let path = out_dir.join("bench_eigen.csv");
    let mut file = fs::File::create(&path)?;
    writeln!(file, "n,omega_reference,err_series,err_fixed_step")?;
    let mut err5 = (0.0f64, 0.0f64);
    let mut err_last = (0.0f64, 0.0f64);
    for i in 0..count {
        let es = (report.pairs[i].omega - reference[i]).abs();
        let em = if i < marched.len() { (marched[i] - reference[i]).abs() } else { f64::NAN };
        if i + 1 == 5 {
            err5 = (es, em);
        }
        if i + 1 == count {
            err_last = (es, em);
        }
        writeln!(file, "{},{},{},{}", i + 1, fmt_f64(reference[i]), fmt_f64(es), fmt_f64(em))?;
    }
    summary.outputs.push(path);
    println!(
        "eigenvalues (n = {count}): series err n=5 {:.3e} / n={count} {:.3e}; \
         fixed-step err n=5 {:.3e} / n={count} {:.3e}",
        err5.0, err_last.0, err5.1, err_last.1
    );
    println!(
        "  timings: reference {t_ref:.2}s, series {t_nsbf:.2}s, fixed-step {t_march:.2}s"
    );
    Ok(json!({
        "count": count,
        "series_err_n5": err5.0,
        "series_err_last": err_last.0,
        "fixed_step_err_n5": err5.1,
        "fixed_step_err_last": err_last.1,
        "seconds_reference": t_ref,
        "seconds_series": t_nsbf,
        "seconds_fixed_step": t_march,
    }))
}

fn bench_grid_scaling(config: &JobConfig) -> anyhow::Result<(usize, f64, usize, f64)> {
    let mut small = config.clone();
    small.task = TaskConfig::Kernel {};
    let mut large = small.clone();
    large.m = config.m * 2;
    let time_build = |cfg: &JobConfig| -> anyhow::Result<f64> {
        let grid = build_grid(cfg)?;
        let q = build_potential(cfg, &grid)?;
        let t = Instant::now();
        let powers = FormalPowersTable::build(&q, &grid, cfg.table_order())?;
        std::hint::black_box(powers.k_max());
        Ok(t.elapsed().as_secs_f64() * 1e3)
    };
    let ms_small = time_build(&small)?;
    let ms_large = time_build(&large)?;
    Ok((small.m, ms_small, large.m, ms_large))
}
