//! Monte-Carlo sweeps over channel realizations.
//!
//! Realization `i` of a run with seed `s` always draws its channel from
//! stream `i` of a ChaCha8 generator keyed by `s`, so every scheme, CSI level
//! and worker count sees the same channels. Per-realization rates are stored
//! by index and reduced in index order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{
    apply_csi_error, build_correlation, factor, realization_rng, sample_realization, ChannelFactor, CsiModel, PortGrid,
};
use crate::error::{Error, Result};
use crate::optimizer::{equal_power, solve_all_ports, solve_gn, SolveResult};

pub const DEFAULT_REALIZATIONS: u64 = 10_000;
pub const DEFAULT_GN_STEPS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    EjOpt,
    GnOpt,
    EjEqualPower,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::EjOpt => "EJ_OPT",
            Scheme::GnOpt => "GN_OPT",
            Scheme::EjEqualPower => "EJ_EQUAL_POWER",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EJ_OPT" => Ok(Scheme::EjOpt),
            "GN_OPT" => Ok(Scheme::GnOpt),
            "EJ_EQUAL_POWER" => Ok(Scheme::EjEqualPower),
            other => Err(Error::Config(format!(
                "unknown scheme {other:?} (expected EJ_OPT, GN_OPT or EJ_EQUAL_POWER)"
            ))),
        }
    }
}

/// Settings shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub realizations: u64,
    pub seed: u64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub gn_grid_steps: usize,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            realizations: DEFAULT_REALIZATIONS,
            seed: 1,
            sigma1: 1.0,
            sigma2: 1.0,
            gn_grid_steps: DEFAULT_GN_STEPS,
            threads: None,
        }
    }
}

/// One sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointConfig {
    pub scheme: Scheme,
    pub n_ports: usize,
    pub width: f64,
    pub rho_db: f64,
    pub delta: f64,
}

impl PointConfig {
    /// Linear transmit power budget `10^(rho/10)`.
    pub fn budget(&self) -> f64 {
        10f64.powf(self.rho_db / 10.0)
    }
}

/// Cartesian sweep over every listed value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub n_ports: Vec<usize>,
    pub widths: Vec<f64>,
    pub rho_db: Vec<f64>,
    pub deltas: Vec<f64>,
    pub settings: RunSettings,
}

impl ExperimentConfig {
    /// Sweep points in output order: scheme, N, W, delta, rho.
    pub fn points(&self) -> Vec<PointConfig> {
        let mut out = Vec::new();
        for &scheme in &self.schemes {
            for &n_ports in &self.n_ports {
                for &width in &self.widths {
                    for &delta in &self.deltas {
                        for &rho_db in &self.rho_db {
                            out.push(PointConfig {
                                scheme,
                                n_ports,
                                width,
                                rho_db,
                                delta,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let s = &self.settings;
        if s.realizations == 0 {
            return Err(Error::Config("realizations must be >= 1".into()));
        }
        if [
            &self.schemes.len(),
            &self.n_ports.len(),
            &self.widths.len(),
            &self.rho_db.len(),
            &self.deltas.len(),
        ]
        .iter()
        .any(|&&n| n == 0)
        {
            return Err(Error::Config("every sweep axis needs at least one value".into()));
        }
        if let Some(&rho) = self.rho_db.iter().find(|r| !r.is_finite()) {
            return Err(Error::Config(format!("SNR must be finite, got {rho}")));
        }
        for &d in &self.deltas {
            CsiModel::new(d)?;
        }
        for &n in &self.n_ports {
            for &w in &self.widths {
                PortGrid::new(n, w)?;
            }
        }
        if s.gn_grid_steps < 100 {
            return Err(Error::Config(format!(
                "GN grid steps must be >= 100, got {}",
                s.gn_grid_steps
            )));
        }
        if s.threads == Some(0) {
            return Err(Error::Config("thread count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Aggregated result of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub point: PointConfig,
    pub realizations: u64,
    pub seed: u64,
    pub mean_rate: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentSummary {
    pub rows: Vec<SummaryRow>,
}

impl ExperimentSummary {
    pub fn find(&self, pred: impl Fn(&PointConfig) -> bool) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| pred(&r.point))
    }
}

/// What happened in a single realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizationOutcome {
    /// Rate achieved against the true Eve channel.
    pub achieved: f64,
    /// The optimizer's own view of the rate, computed on the estimated
    /// Eve channel.
    pub decision: SolveResult,
    /// Fingerprint of the true channel draw.
    pub channel_hash: u64,
}

/// Runs one realization: draw, perturb Eve's channel, optimize on the
/// estimate, score on the truth.
pub fn evaluate_realization(
    point: &PointConfig,
    chan: &ChannelFactor,
    settings: &RunSettings,
    index: u64,
) -> Result<RealizationOutcome> {
    let mut rng = realization_rng(settings.seed, index);
    let truth = sample_realization(chan, &mut rng);
    let csi = CsiModel::new(point.delta)?;
    let estimate = if point.delta > 0.0 {
        let g1 = apply_csi_error(truth.g1, &csi, &mut rng);
        let g2 = apply_csi_error(truth.g2, &csi, &mut rng);
        truth.with_eve(g1, g2)
    } else {
        truth.clone()
    };

    let budget = point.budget();
    let wrap = |e: Error| Error::Realization {
        index,
        source: Box::new(e),
    };
    let decision = match point.scheme {
        Scheme::EjOpt => solve_all_ports(budget, &estimate),
        Scheme::GnOpt => solve_gn(budget, &estimate, settings.gn_grid_steps),
        Scheme::EjEqualPower => equal_power(budget, &estimate),
    }
    .map_err(wrap)?;

    let q = truth.gains(decision.port);
    let achieved = match point.scheme {
        Scheme::GnOpt => q.gn(decision.p1, decision.p2),
        Scheme::EjOpt | Scheme::EjEqualPower => q.ej(decision.p1, decision.p2),
    };
    Ok(RealizationOutcome {
        achieved,
        decision,
        channel_hash: truth.fingerprint(),
    })
}

fn run_with_factor(point: &PointConfig, chan: &ChannelFactor, settings: &RunSettings) -> Result<SummaryRow> {
    let rates = (0..settings.realizations)
        .into_par_iter()
        .map(|i| evaluate_realization(point, chan, settings, i).map(|o| o.achieved))
        .collect::<Result<Vec<f64>>>()?;
    let (mean_rate, std_err) = mean_and_std_err(&rates);
    Ok(SummaryRow {
        point: *point,
        realizations: settings.realizations,
        seed: settings.seed,
        mean_rate,
        std_err,
    })
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn channel_factor(n_ports: usize, width: f64, settings: &RunSettings) -> Result<ChannelFactor> {
    let grid = PortGrid::new(n_ports, width)?;
    factor(&build_correlation(&grid)?, settings.sigma1, settings.sigma2)
}

/// Averages the achieved rate of one scheme at one sweep point.
pub fn run_point(point: &PointConfig, settings: &RunSettings) -> Result<SummaryRow> {
    let single = ExperimentConfig {
        schemes: vec![point.scheme],
        n_ports: vec![point.n_ports],
        widths: vec![point.width],
        rho_db: vec![point.rho_db],
        deltas: vec![point.delta],
        settings: settings.clone(),
    };
    single.validate()?;
    let chan = channel_factor(point.n_ports, point.width, settings)?;
    in_pool(settings.threads, || run_with_factor(point, &chan, settings))?
}

/// Runs every point of the sweep with the same seed, so schemes and sweep
/// values are compared on paired channel draws.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let settings = &cfg.settings;
    let mut factors: Vec<((usize, u64), ChannelFactor)> = Vec::new();
    for &n in &cfg.n_ports {
        for &w in &cfg.widths {
            factors.push(((n, w.to_bits()), channel_factor(n, w, settings)?));
        }
    }
    let lookup = |n: usize, w: f64| {
        &factors
            .iter()
            .find(|(key, _)| *key == (n, w.to_bits()))
            .expect("factor built for every (N, W)")
            .1
    };
    in_pool(settings.threads, || {
        cfg.points()
            .iter()
            .map(|p| run_with_factor(p, lookup(p.n_ports, p.width), settings))
            .collect::<Result<Vec<_>>>()
            .map(|rows| ExperimentSummary { rows })
    })?
}

/// Sample mean and standard error of the mean, both accumulated in index
/// order with Neumaier summation.
pub fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = neumaier_sum(values.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    let var = ss / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
