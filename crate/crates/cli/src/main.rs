use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};

use transmute_cli::config::{
    DomainConfig, IntervalKind, JobConfig, PotentialConfig, Rep, TaskConfig,
};
use transmute_cli::tasks::run_job;

/// Series representations of the transmutation operator for
/// y'' - q(x) y = -omega^2 y: solution evaluation with accuracy independent
/// of Re omega, large eigenvalue sets without accuracy loss, and complete
/// solution families for (Delta - q(x)) u = 0.
#[derive(Parser, Debug)]
#[command(name = "transmute", version, about)]
struct Cli {
    /// JSON job configuration; flags override individual fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Potential q as an expression in x, e.g. "exp(x)" or "1/x".
    #[arg(long, global = true)]
    q: Option<String>,
    /// Interval endpoint b > 0.
    #[arg(long, global = true)]
    b: Option<f64>,
    /// Truncation order of the kernel series.
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    /// Number of grid intervals.
    #[arg(long = "M", global = true)]
    m: Option<usize>,
    /// Formal-power table order.
    #[arg(long, global = true)]
    k_max: Option<usize>,
    /// Kernel representation.
    #[arg(long, global = true, value_enum)]
    rep: Option<Rep>,
    /// Output directory (default out-<task>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Escalate numerical warnings to exit code 3.
    #[arg(long, global = true)]
    strict: bool,
    /// Accept singular potentials by nodal averaging.
    #[arg(long, global = true)]
    principal_value_ok: bool,
    /// Jump locations of q (snapped to grid nodes), comma-separated.
    #[arg(long, global = true, value_delimiter = ',')]
    jumps: Vec<f64>,
    /// Interval layout: symmetric [-b,b] or half [0,b].
    #[arg(long, global = true)]
    interval: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate u(omega, x) on the grid.
    Solve {
        /// Spectral parameters, comma-separated.
        #[arg(long, value_delimiter = ',')]
        omega: Vec<f64>,
    },
    /// Dump the formal-powers table and kernel coefficients.
    Kernel {},
    /// Compute Dirichlet/Robin eigenvalues on [0, b].
    Eigen {
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
        /// Robin coefficients a0,b0,a1,b1 for a0 y(0)+b0 y'(0) = 0,
        /// a1 y(b)+b1 y'(b) = 0 (omit for Dirichlet).
        #[arg(long, value_delimiter = ',')]
        robin: Vec<f64>,
        #[arg(long)]
        scan_density: Option<f64>,
        /// Also write the eigenfunction matrix.
        #[arg(long)]
        eigenfunctions: bool,
    },
    /// Solve (Delta - q(x)) u = 0 on a planar domain.
    Pde {
        /// Domain: "rectangle:x0,x1,y0,y1" or "disk:cx,cy,r".
        #[arg(long)]
        domain: Option<String>,
        /// Boundary data as an expression in x and y.
        #[arg(long)]
        data: Option<String>,
        #[arg(long)]
        members: Option<usize>,
        /// Use the transmuted method of fundamental solutions.
        #[arg(long)]
        mfs: bool,
        #[arg(long)]
        sources: Option<usize>,
        #[arg(long)]
        boundary_points: Option<usize>,
    },
    /// Tabulate all three representations against the adaptive integrator.
    Compare {
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Timing/accuracy sweeps and the eigenvalue comparison curve.
    Bench {
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
        #[arg(long)]
        eigen_count: Option<usize>,
    },
}

/// Task from flags alone (no config file): omitted values take defaults.
fn task_from_cmd(cmd: &Cmd) -> anyhow::Result<TaskConfig> {
    Ok(match cmd {
        Cmd::Solve { omega } => TaskConfig::Solve { omegas: omega.clone() },
        Cmd::Kernel {} => TaskConfig::Kernel {},
        Cmd::Eigen { count, omega_min, omega_max, robin, scan_density, eigenfunctions } => {
            TaskConfig::Eigen {
                count: *count,
                omega_range: omega_range_from(omega_min, omega_max)?,
                boundary: robin_from(robin)?,
                scan_density: *scan_density,
                eigenfunctions: *eigenfunctions,
            }
        }
        Cmd::Pde { domain, data, members, mfs, sources, boundary_points } => {
            let domain = domain
                .as_deref()
                .ok_or_else(|| anyhow!("--domain is required without a config file"))?;
            let data = data
                .as_deref()
                .ok_or_else(|| anyhow!("--data is required without a config file"))?;
            TaskConfig::Pde {
                domain: parse_domain(domain, boundary_points.unwrap_or(200))?,
                data: data.to_string(),
                members: members.unwrap_or(30),
                mfs: *mfs,
                sources: sources.unwrap_or(40),
            }
        }
        Cmd::Compare { omega } => TaskConfig::Compare {
            omega: omega.ok_or_else(|| anyhow!("--omega is required without a config file"))?,
        },
        Cmd::Bench { orders, eigen_count } => TaskConfig::Bench {
            orders: if orders.is_empty() { vec![8, 16, 24, 32] } else { orders.clone() },
            eigen_count: eigen_count.unwrap_or(50),
        },
    })
}

fn omega_range_from(
    omega_min: &Option<f64>,
    omega_max: &Option<f64>,
) -> anyhow::Result<Option<(f64, f64)>> {
    match (omega_min, omega_max) {
        (Some(lo), Some(hi)) => Ok(Some((*lo, *hi))),
        (None, None) => Ok(None),
        _ => bail!("--omega-min and --omega-max must be given together"),
    }
}

fn robin_from(robin: &[f64]) -> anyhow::Result<Option<[f64; 4]>> {
    match robin.len() {
        0 => Ok(None),
        4 => Ok(Some([robin[0], robin[1], robin[2], robin[3]])),
        n => bail!("--robin needs 4 coefficients, got {n}"),
    }
}

/// Field-wise overlay of explicitly-given flags onto a configured task.
fn merge_task(base: &mut TaskConfig, cmd: &Cmd) -> anyhow::Result<()> {
    match (base, cmd) {
        (TaskConfig::Solve { omegas }, Cmd::Solve { omega }) => {
            if !omega.is_empty() {
                *omegas = omega.clone();
            }
        }
        (TaskConfig::Kernel {}, Cmd::Kernel {}) => {}
        (
            TaskConfig::Eigen { count, omega_range, boundary, scan_density, eigenfunctions },
            Cmd::Eigen {
                count: fc,
                omega_min,
                omega_max,
                robin,
                scan_density: fd,
                eigenfunctions: fe,
            },
        ) => {
            if fc.is_some() {
                *count = *fc;
            }
            if let Some(r) = omega_range_from(omega_min, omega_max)? {
                *omega_range = Some(r);
            }
            if let Some(bc) = robin_from(robin)? {
                *boundary = Some(bc);
            }
            if fd.is_some() {
                *scan_density = *fd;
            }
            if *fe {
                *eigenfunctions = true;
            }
        }
        (
            TaskConfig::Pde { domain, data, members, mfs, sources },
            Cmd::Pde { domain: fdom, data: fdata, members: fm, mfs: fmfs, sources: fs, boundary_points },
        ) => {
            if let Some(d) = fdom {
                *domain = parse_domain(d, boundary_points.unwrap_or(domain.boundary_points))?;
            } else if let Some(p) = boundary_points {
                domain.boundary_points = *p;
            }
            if let Some(d) = fdata {
                *data = d.clone();
            }
            if let Some(m) = fm {
                *members = *m;
            }
            if *fmfs {
                *mfs = true;
            }
            if let Some(s) = fs {
                *sources = *s;
            }
        }
        (TaskConfig::Compare { omega }, Cmd::Compare { omega: fo }) => {
            if let Some(w) = fo {
                *omega = *w;
            }
        }
        (TaskConfig::Bench { orders, eigen_count }, Cmd::Bench { orders: fo, eigen_count: fe }) => {
            if !fo.is_empty() {
                *orders = fo.clone();
            }
            if let Some(e) = fe {
                *eigen_count = *e;
            }
        }
        _ => bail!("subcommand does not match the task in the config file"),
    }
    Ok(())
}

fn parse_domain(text: &str, boundary_points: usize) -> anyhow::Result<DomainConfig> {
    let (shape, rest) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("domain format: rectangle:x0,x1,y0,y1 or disk:cx,cy,r"))?;
    let nums: Vec<f64> = rest
        .split(',')
        .map(|s| s.trim().parse::<f64>().context("domain coordinate"))
        .collect::<anyhow::Result<_>>()?;
    let mut d = DomainConfig {
        shape: shape.to_string(),
        x0: 0.0,
        x1: 0.0,
        y0: 0.0,
        y1: 0.0,
        cx: 0.0,
        cy: 0.0,
        radius: 0.0,
        boundary_points,
    };
    match (shape, nums.len()) {
        ("rectangle", 4) => {
            d.x0 = nums[0];
            d.x1 = nums[1];
            d.y0 = nums[2];
            d.y1 = nums[3];
        }
        ("disk", 3) => {
            d.cx = nums[0];
            d.cy = nums[1];
            d.radius = nums[2];
        }
        _ => bail!("domain format: rectangle:x0,x1,y0,y1 or disk:cx,cy,r"),
    }
    Ok(d)
}

fn merge_config(cli: &Cli) -> anyhow::Result<JobConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            JobConfig::from_json(&text)?
        }
        None => JobConfig {
            potential: PotentialConfig::default(),
            b: 1.0,
            interval: None,
            rep: Rep::Legendre,
            n: None,
            k_max: None,
            m: 2000,
            task: task_from_cmd(&cli.cmd)?,
        },
    };
    if cli.config.is_some() {
        merge_task(&mut config.task, &cli.cmd)?;
    }
    if let Some(q) = &cli.q {
        config.potential.expr = Some(q.clone());
        config.potential.samples = None;
    }
    if cli.principal_value_ok {
        config.potential.principal_value_ok = true;
    }
    if !cli.jumps.is_empty() {
        config.potential.jumps = cli.jumps.clone();
    }
    if let Some(b) = cli.b {
        config.b = b;
    }
    if let Some(n) = cli.n {
        config.n = Some(n);
    }
    if let Some(m) = cli.m {
        config.m = m;
    }
    if let Some(k) = cli.k_max {
        config.k_max = Some(k);
    }
    if let Some(rep) = cli.rep {
        config.rep = rep;
    }
    if let Some(kind) = &cli.interval {
        config.interval = Some(match kind.as_str() {
            "symmetric" => IntervalKind::Symmetric,
            "half" => IntervalKind::Half,
            other => bail!("interval must be 'symmetric' or 'half', got {other:?}"),
        });
    }
    config.validate()?;
    Ok(config)
}

fn task_name(task: &TaskConfig) -> &'static str {
    match task {
        TaskConfig::Solve { .. } => "solve",
        TaskConfig::Kernel {} => "kernel",
        TaskConfig::Eigen { .. } => "eigen",
        TaskConfig::Pde { .. } => "pde",
        TaskConfig::Compare { .. } => "compare",
        TaskConfig::Bench { .. } => "bench",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("TRANSMUTE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let config = match merge_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("out-{}", task_name(&config.task))));
    match run_job(&config, &out_dir) {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("artifacts in {}", out_dir.display());
            if cli.strict && !summary.warnings.is_empty() {
                eprintln!("exiting 3: warnings escalated by --strict");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error ({}): {e:#}", task_name(&config.task));
            ExitCode::from(2)
        }
    }
}
