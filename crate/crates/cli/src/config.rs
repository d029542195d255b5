//! Command-line flags, the TOML config file and their merge into a
//! validated [`ExperimentConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ecm_core::material::{PhaseAssignment, PhaseParams};
use ecm_core::plasticity::{yield_displacement, PlasticMetalLaw};

pub const DEFAULT_L: f64 = 0.01;
pub const DEFAULT_MESH_N: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_TOL_1D: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_EPS_LIST: [f64; 3] = [0.02, 0.04, 0.08];
pub const DEFAULT_DELTAS: [f64; 3] = [1.0, 0.5, 0.25];
pub const DEFAULT_N_PERIODS: [usize; 4] = [1, 2, 4, 8];
pub const DEFAULT_N_CELLS: [usize; 3] = [100, 1000, 10_000];
pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_MESH_PER_PERIOD: usize = 16;
pub const DEFAULT_CURVE_POINTS: usize = 20;

/// Environment variable naming the parent of run directories.
pub const OUT_DIR_ENV: &str = "ECM_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ecm", version, about = "Embedded cell method experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// 1D embedded cell iteration for a two-phase rod
    Ecm1d(Ecm1dArgs),
    /// 2D embedded cell iteration on the unit square
    Ecm2d(Ecm2dArgs),
    /// Periodic rods, harmonic mean and 1D embedded cell limit
    Homogenize1d(Homogenize1dArgs),
    /// Period-refinement sweep compared with 2D embedded cell limits
    Deltasweep2d(DeltaSweepArgs),
    /// Force statistics of random layered rods
    Stochastic1d(StochasticArgs),
    /// Elasto-plastic stress-strain curve, direct and embedded cell
    Plastic1d(PlasticArgs),
    /// Convergence order of the small-contrast expansion
    Perturb2d(PerturbArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with default values; flags take precedence
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory (default: $ECM_OUT_DIR/<command>-<timestamp>)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct KappaArgs {
    #[arg(long)]
    pub kappa_met: Option<f64>,
    #[arg(long)]
    pub kappa_cer: Option<f64>,
    #[arg(long)]
    pub vol_cer: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct LameArgs {
    #[arg(long)]
    pub lambda_met: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Contrast direction: the ceramic has `lambda_met + eps * d_c`
    #[arg(long, allow_negative_numbers = true)]
    pub d_c: Option<f64>,
    #[arg(long)]
    pub vol_cer: Option<f64>,
    /// Element phase rule: centroid or area-fraction
    #[arg(long, value_parser = parse_assignment)]
    pub assignment: Option<PhaseAssignment>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct IterArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub l: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Ecm1dArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub kappa: KappaArgs,
    #[command(flatten)]
    pub iter: IterArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Ecm2dArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub lame: LameArgs,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub mesh_n: Option<usize>,
    #[command(flatten)]
    pub iter: IterArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Homogenize1dArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub kappa: KappaArgs,
    #[arg(long, value_delimiter = ',')]
    pub n_periods: Option<Vec<usize>>,
    #[command(flatten)]
    pub iter: IterArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DeltaSweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub lame: LameArgs,
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long)]
    pub mesh_per_period: Option<usize>,
    /// Mesh of the embedded cell runs
    #[arg(long)]
    pub mesh_n: Option<usize>,
    #[command(flatten)]
    pub iter: IterArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct StochasticArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub kappa: KappaArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub l: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub n_cells: Option<Vec<usize>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PlasticArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub kappa_cer: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub u_crit: Option<f64>,
    /// Explicit ascending displacement grid
    #[arg(long, value_delimiter = ',')]
    pub l_grid: Option<Vec<f64>>,
    /// Number of grid points when no grid is given
    #[arg(long)]
    pub points: Option<usize>,
    /// Largest displacement when no grid is given (default: 3x yield)
    #[arg(long)]
    pub l_max: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub lame: LameArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub l: Option<f64>,
    #[arg(long)]
    pub mesh_n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
}

fn parse_assignment(s: &str) -> Result<PhaseAssignment, String> {
    match s {
        "centroid" => Ok(PhaseAssignment::Centroid),
        "area-fraction" | "area_fraction" => Ok(PhaseAssignment::AreaFraction),
        _ => Err(format!(
            "unknown assignment `{s}` (expected centroid or area-fraction)"
        )),
    }
}

/// Keys accepted in the config file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub l: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub mesh_n: Option<usize>,
    pub eps: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    pub deltas: Option<Vec<f64>>,
    pub mesh_per_period: Option<usize>,
    pub kappa_met: Option<f64>,
    pub kappa_cer: Option<f64>,
    pub vol_cer: Option<f64>,
    pub lambda_met: Option<f64>,
    pub mu: Option<f64>,
    pub d_c: Option<f64>,
    pub assignment: Option<PhaseAssignment>,
    pub n_periods: Option<Vec<usize>>,
    pub n_cells: Option<Vec<usize>>,
    pub samples: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub u_crit: Option<f64>,
    pub l_grid: Option<Vec<f64>>,
    pub points: Option<usize>,
    pub l_max: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }
}

/// One fully specified experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Experiment {
    Ecm1d {
        params: PhaseParams,
        l: f64,
        tol: f64,
        max_iter: usize,
    },
    Ecm2d {
        params: PhaseParams,
        l: f64,
        tol: f64,
        max_iter: usize,
        mesh_n: usize,
        assignment: PhaseAssignment,
    },
    Homogenize1d {
        params: PhaseParams,
        l: f64,
        tol: f64,
        max_iter: usize,
        n_periods: Vec<usize>,
    },
    Deltasweep2d {
        params: PhaseParams,
        l: f64,
        tol: f64,
        max_iter: usize,
        mesh_n: usize,
        eps_list: Vec<f64>,
        deltas: Vec<f64>,
        mesh_per_period: usize,
        assignment: PhaseAssignment,
    },
    Stochastic1d {
        params: PhaseParams,
        l: f64,
        n_cells: Vec<usize>,
        samples: usize,
        seed: u64,
    },
    Plastic1d {
        kappa_cer: f64,
        law: PlasticMetalLaw,
        l_grid: Vec<f64>,
        tol: f64,
        max_iter: usize,
    },
    Perturb2d {
        params: PhaseParams,
        l: f64,
        mesh_n: usize,
        eps_list: Vec<f64>,
        assignment: PhaseAssignment,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ecm1d { .. } => "ecm1d",
            Self::Ecm2d { .. } => "ecm2d",
            Self::Homogenize1d { .. } => "homogenize1d",
            Self::Deltasweep2d { .. } => "deltasweep2d",
            Self::Stochastic1d { .. } => "stochastic1d",
            Self::Plastic1d { .. } => "plastic1d",
            Self::Perturb2d { .. } => "perturb2d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub out: Option<PathBuf>,
}

/// Flag value, else file value.
fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn required<T>(name: &str, value: Option<T>) -> anyhow::Result<T> {
    match value {
        Some(v) => Ok(v),
        None => bail!("missing required value --{}", name.replace('_', "-")),
    }
}

fn positive_f64(name: &str, v: f64) -> anyhow::Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("{name} must be positive and finite, got {v}");
    }
    Ok(v)
}

fn positive_count(name: &str, v: usize) -> anyhow::Result<usize> {
    if v == 0 {
        bail!("{name} must be at least 1");
    }
    Ok(v)
}

fn displacement(v: f64) -> anyhow::Result<f64> {
    if v == 0.0 || !v.is_finite() {
        bail!("l must be finite and non-zero, got {v}");
    }
    Ok(v)
}

fn eps_list(v: Vec<f64>) -> anyhow::Result<Vec<f64>> {
    if v.is_empty() {
        bail!("eps_list must not be empty");
    }
    if v.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        bail!("eps_list entries must be positive");
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        bail!("eps_list must be strictly ascending");
    }
    Ok(v)
}

struct Merged<'a> {
    file: &'a FileConfig,
}

impl Merged<'_> {
    fn kappa(&self, a: &KappaArgs) -> anyhow::Result<PhaseParams> {
        let f = self.file;
        Ok(PhaseParams::longitudinal(
            required("kappa_met", pick(a.kappa_met, f.kappa_met))?,
            required("kappa_cer", pick(a.kappa_cer, f.kappa_cer))?,
            required("vol_cer", pick(a.vol_cer, f.vol_cer))?,
        )?)
    }

    fn lame(&self, a: &LameArgs, eps: f64) -> anyhow::Result<PhaseParams> {
        let f = self.file;
        Ok(PhaseParams::perturbed(
            required("lambda_met", pick(a.lambda_met, f.lambda_met))?,
            required("mu", pick(a.mu, f.mu))?,
            eps,
            required("d_c", pick(a.d_c, f.d_c))?,
            required("vol_cer", pick(a.vol_cer, f.vol_cer))?,
        )?)
    }

    fn assignment(&self, a: &LameArgs) -> PhaseAssignment {
        pick(a.assignment, self.file.assignment).unwrap_or(PhaseAssignment::AreaFraction)
    }

    fn l(&self, flag: Option<f64>) -> anyhow::Result<f64> {
        displacement(pick(flag, self.file.l).unwrap_or(DEFAULT_L))
    }

    fn tol(&self, flag: Option<f64>, default: f64) -> anyhow::Result<f64> {
        positive_f64("tol", pick(flag, self.file.tol).unwrap_or(default))
    }

    fn max_iter(&self, flag: Option<usize>) -> anyhow::Result<usize> {
        positive_count(
            "max_iter",
            pick(flag, self.file.max_iter).unwrap_or(DEFAULT_MAX_ITER),
        )
    }

    fn mesh_n(&self, flag: Option<usize>) -> anyhow::Result<usize> {
        positive_count(
            "mesh_n",
            pick(flag, self.file.mesh_n).unwrap_or(DEFAULT_MESH_N),
        )
    }

    fn eps_list(&self, flag: Option<Vec<f64>>) -> anyhow::Result<Vec<f64>> {
        eps_list(
            pick(flag, self.file.eps_list.clone()).unwrap_or_else(|| DEFAULT_EPS_LIST.to_vec()),
        )
    }
}

/// Merges flags over the config file over built-in defaults.
pub fn parse_config(command: Command) -> anyhow::Result<ExperimentConfig> {
    let run = match &command {
        Command::Ecm1d(a) => &a.run,
        Command::Ecm2d(a) => &a.run,
        Command::Homogenize1d(a) => &a.run,
        Command::Deltasweep2d(a) => &a.run,
        Command::Stochastic1d(a) => &a.run,
        Command::Plastic1d(a) => &a.run,
        Command::Perturb2d(a) => &a.run,
    }
    .clone();
    let file = match &run.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let m = Merged { file: &file };
    let experiment = match command {
        Command::Ecm1d(a) => Experiment::Ecm1d {
            params: m.kappa(&a.kappa)?,
            l: m.l(a.iter.l)?,
            tol: m.tol(a.iter.tol, DEFAULT_TOL_1D)?,
            max_iter: m.max_iter(a.iter.max_iter)?,
        },
        Command::Ecm2d(a) => Experiment::Ecm2d {
            params: m.lame(&a.lame, required("eps", pick(a.eps, file.eps))?)?,
            l: m.l(a.iter.l)?,
            tol: m.tol(a.iter.tol, DEFAULT_TOL)?,
            max_iter: m.max_iter(a.iter.max_iter)?,
            mesh_n: m.mesh_n(a.mesh_n)?,
            assignment: m.assignment(&a.lame),
        },
        Command::Homogenize1d(a) => {
            let n_periods = pick(a.n_periods, file.n_periods.clone())
                .unwrap_or_else(|| DEFAULT_N_PERIODS.to_vec());
            if n_periods.is_empty() || n_periods.contains(&0) {
                bail!("n_periods entries must be at least 1");
            }
            Experiment::Homogenize1d {
                params: m.kappa(&a.kappa)?,
                l: m.l(a.iter.l)?,
                tol: m.tol(a.iter.tol, DEFAULT_TOL_1D)?,
                max_iter: m.max_iter(a.iter.max_iter)?,
                n_periods,
            }
        }
        Command::Deltasweep2d(a) => {
            let deltas =
                pick(a.deltas, file.deltas.clone()).unwrap_or_else(|| DEFAULT_DELTAS.to_vec());
            if deltas.is_empty() || deltas.windows(2).any(|w| w[1] >= w[0]) {
                bail!("deltas must be non-empty and strictly decreasing");
            }
            Experiment::Deltasweep2d {
                params: m.lame(&a.lame, 0.0)?,
                l: m.l(a.iter.l)?,
                tol: m.tol(a.iter.tol, DEFAULT_TOL)?,
                max_iter: m.max_iter(a.iter.max_iter)?,
                mesh_n: m.mesh_n(a.mesh_n)?,
                eps_list: m.eps_list(a.eps_list)?,
                deltas,
                mesh_per_period: positive_count(
                    "mesh_per_period",
                    pick(a.mesh_per_period, file.mesh_per_period)
                        .unwrap_or(DEFAULT_MESH_PER_PERIOD),
                )?,
                assignment: m.assignment(&a.lame),
            }
        }
        Command::Stochastic1d(a) => {
            let n_cells =
                pick(a.n_cells, file.n_cells.clone()).unwrap_or_else(|| DEFAULT_N_CELLS.to_vec());
            if n_cells.is_empty() || n_cells.contains(&0) {
                bail!("n_cells entries must be at least 1");
            }
            Experiment::Stochastic1d {
                params: m.kappa(&a.kappa)?,
                l: m.l(a.l)?,
                n_cells,
                samples: positive_count(
                    "samples",
                    pick(a.samples, file.samples).unwrap_or(DEFAULT_SAMPLES),
                )?,
                seed: pick(a.seed, file.seed).unwrap_or(0),
            }
        }
        Command::Plastic1d(a) => {
            let kappa_cer = positive_f64(
                "kappa_cer",
                required("kappa_cer", pick(a.kappa_cer, file.kappa_cer))?,
            )?;
            let law = PlasticMetalLaw::new(
                required("alpha", pick(a.alpha, file.alpha))?,
                required("beta", pick(a.beta, file.beta))?,
                required("u_crit", pick(a.u_crit, file.u_crit))?,
            )?;
            let l_grid = match pick(a.l_grid, file.l_grid.clone()) {
                Some(grid) => grid,
                None => {
                    let points = positive_count(
                        "points",
                        pick(a.points, file.points).unwrap_or(DEFAULT_CURVE_POINTS),
                    )?;
                    let l_max = positive_f64(
                        "l_max",
                        pick(a.l_max, file.l_max)
                            .unwrap_or_else(|| 3.0 * yield_displacement(kappa_cer, &law)),
                    )?;
                    (1..=points)
                        .map(|i| l_max * i as f64 / points as f64)
                        .collect()
                }
            };
            if l_grid.is_empty()
                || l_grid.iter().any(|&l| !(l > 0.0 && l.is_finite()))
                || l_grid.windows(2).any(|w| w[1] <= w[0])
            {
                bail!("l_grid must be positive and strictly ascending");
            }
            Experiment::Plastic1d {
                kappa_cer,
                law,
                l_grid,
                tol: m.tol(a.tol, DEFAULT_TOL_1D)?,
                max_iter: m.max_iter(a.max_iter)?,
            }
        }
        Command::Perturb2d(a) => Experiment::Perturb2d {
            params: m.lame(&a.lame, 0.0)?,
            l: m.l(a.l)?,
            mesh_n: m.mesh_n(a.mesh_n)?,
            eps_list: m.eps_list(a.eps_list)?,
            assignment: m.assignment(&a.lame),
        },
    };
    if let Experiment::Deltasweep2d { eps_list, .. } | Experiment::Perturb2d { eps_list, .. } =
        &experiment
    {
        if eps_list.len() < 3 {
            bail!("eps_list needs at least 3 values for an order fit");
        }
    }
    Ok(ExperimentConfig {
        experiment,
        out: run.out.or(file.out),
    })
}
