//! Job configuration: a single JSON document, schema-validated, with CLI
//! flags overriding individual fields.

use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Rep {
    Legendre,
    Laguerre,
    Hermite,
}

impl Rep {
    pub fn default_order(self) -> usize {
        match self {
            Rep::Legendre => 32,
            Rep::Laguerre | Rep::Hermite => 40,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Rep::Legendre => "legendre",
            Rep::Laguerre => "laguerre",
            Rep::Hermite => "hermite",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    /// Closed-form expression in x.
    pub expr: Option<String>,
    /// CSV sample file (columns x, re_q, im_q) used instead of `expr`.
    pub samples: Option<PathBuf>,
    /// Accept non-finite nodal values by replacing them with the mean of
    /// the adjacent nodes.
    pub principal_value_ok: bool,
    /// Jump locations of q, snapped to grid nodes.
    pub jumps: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    /// [-b, b]
    Symmetric,
    /// [0, b]
    Half,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub shape: String, // "rectangle" | "disk"
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub x1: f64,
    #[serde(default)]
    pub y0: f64,
    #[serde(default)]
    pub y1: f64,
    #[serde(default)]
    pub cx: f64,
    #[serde(default)]
    pub cy: f64,
    #[serde(default)]
    pub radius: f64,
    #[serde(default = "default_boundary_count")]
    pub boundary_points: usize,
}

fn default_boundary_count() -> usize {
    200
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TaskConfig {
    /// Evaluate u(omega, x) on the grid for a list of real omega.
    Solve {
        omegas: Vec<f64>,
    },
    /// Dump kernel coefficients and the formal-powers table.
    Kernel {},
    /// Dirichlet/Robin eigenvalues on [0, b].
    Eigen {
        #[serde(default)]
        count: Option<usize>,
        #[serde(default)]
        omega_range: Option<(f64, f64)>,
        /// [a0, b0, a1, b1] for a0 y(0)+b0 y'(0) = 0, a1 y(b)+b1 y'(b) = 0;
        /// omitted = Dirichlet.
        #[serde(default)]
        boundary: Option<[f64; 4]>,
        #[serde(default)]
        scan_density: Option<f64>,
        #[serde(default)]
        eigenfunctions: bool,
    },
    /// Planar Dirichlet problem for (Delta - q(x)) u = 0.
    Pde {
        domain: DomainConfig,
        /// Boundary data g(x, y); an expression in x and optionally scaled
        /// by y through the second entry.
        data: String,
        #[serde(default = "default_members")]
        members: usize,
        #[serde(default)]
        mfs: bool,
        #[serde(default = "default_sources")]
        sources: usize,
    },
    /// All three representations against the adaptive integrator.
    Compare {
        omega: f64,
    },
    /// Timing/accuracy sweeps and the eigenvalue-error comparison curve.
    Bench {
        #[serde(default = "default_bench_orders")]
        orders: Vec<usize>,
        #[serde(default = "default_bench_eigen")]
        eigen_count: usize,
    },
}

fn default_members() -> usize {
    30
}

fn default_sources() -> usize {
    40
}

fn default_bench_orders() -> Vec<usize> {
    vec![8, 16, 24, 32]
}

fn default_bench_eigen() -> usize {
    50
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub potential: PotentialConfig,
    /// Interval endpoint b > 0.
    pub b: f64,
    /// Interval layout; defaults per task (eigen: half, otherwise symmetric).
    #[serde(default)]
    pub interval: Option<IntervalKind>,
    #[serde(default = "default_rep")]
    pub rep: Rep,
    /// Truncation order N; representation-specific default if omitted.
    #[serde(default)]
    pub n: Option<usize>,
    /// Formal-power table order; max(n + 8, 64) if omitted.
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default = "default_m")]
    pub m: usize,
    pub task: TaskConfig,
}

fn default_rep() -> Rep {
    Rep::Legendre
}

fn default_m() -> usize {
    2000
}

impl JobConfig {
    pub fn from_json(text: &str) -> anyhow::Result<JobConfig> {
        let cfg: JobConfig = serde_json::from_str(text).context("config schema")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.b.is_finite() && self.b > 0.0) {
            bail!("b = {} must be finite and positive", self.b);
        }
        if self.m < 16 {
            bail!("grid size m = {} must be at least 16", self.m);
        }
        if self.potential.expr.is_none() && self.potential.samples.is_none() {
            bail!("potential needs either an expression or a sample file");
        }
        if self.potential.expr.is_some() && self.potential.samples.is_some() {
            bail!("potential expression and sample file are mutually exclusive");
        }
        for &j in &self.potential.jumps {
            if !j.is_finite() {
                bail!("jump location {j} is not finite");
            }
        }
        if let Some(n) = self.n {
            if n == 0 {
                bail!("truncation order must be positive");
            }
        }
        match &self.task {
            TaskConfig::Solve { omegas } => {
                if omegas.is_empty() {
                    bail!("solve task needs at least one omega");
                }
                if omegas.iter().any(|w| !w.is_finite()) {
                    bail!("omegas must be finite");
                }
            }
            TaskConfig::Eigen { count, omega_range, boundary, .. } => {
                if count.is_none() && omega_range.is_none() {
                    bail!("eigen task needs a count or an omega range");
                }
                if let Some((lo, hi)) = omega_range {
                    if !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && hi > lo) {
                        bail!("omega range ({lo}, {hi}) must satisfy 0 < lo < hi");
                    }
                }
                if let Some(bc) = boundary {
                    if bc.iter().any(|v| !v.is_finite()) {
                        bail!("boundary coefficients must be finite");
                    }
                }
            }
            TaskConfig::Pde { domain, members, sources, .. } => {
                match domain.shape.as_str() {
                    "rectangle" | "disk" => {}
                    other => bail!("unknown domain shape {other:?}"),
                }
                if *members == 0 {
                    bail!("pde task needs at least one basis member");
                }
                if *sources == 0 {
                    bail!("mfs needs at least one source");
                }
            }
            TaskConfig::Compare { omega } => {
                if !omega.is_finite() {
                    bail!("compare omega must be finite");
                }
            }
            TaskConfig::Bench { orders, .. } => {
                if orders.is_empty() {
                    bail!("bench task needs at least one order");
                }
            }
            TaskConfig::Kernel {} => {}
        }
        Ok(())
    }

    /// Effective truncation order.
    pub fn order(&self) -> usize {
        self.n.unwrap_or(self.rep.default_order())
    }

    /// Effective formal-power table order (always leaves the tail margin).
    pub fn table_order(&self) -> usize {
        let need = self.order() + 8;
        self.k_max.unwrap_or(64.max(need)).max(need)
    }

    /// Effective interval layout.
    pub fn interval_kind(&self) -> IntervalKind {
        self.interval.unwrap_or(match self.task {
            TaskConfig::Eigen { .. } | TaskConfig::Bench { .. } => IntervalKind::Half,
            _ => IntervalKind::Symmetric,
        })
    }
}
