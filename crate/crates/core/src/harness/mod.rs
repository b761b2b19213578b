//! Experiment families: sweeps over arrival, channel and quality settings,
//! each point run under several policy arms on one shared arrival trace.

mod output;
mod plot;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

pub use output::{run_figure_sweep, run_single, write_points_csv, write_regions_csv, write_summary_csv, SweepArtifacts};
pub use plot::{emit_plot, render_svg, PlotSpec};

use crate::arrivals::{split_seed, ArrivalTrace};
use crate::config::{ArrivalProcess, ClientSpec, Deployment, PolicyMode, SystemConfig};
use crate::error::SimError;
use crate::metrics::{improvement_percent, MetricsLedger};
use crate::parallel::{map_jobs, Execution};
use crate::sim::simulate;

/// A run ending with any debt above this fraction of `K` is flagged.
pub const DEBT_BLOWUP_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    ArrivalImbalance,
    ChannelHeterogeneity,
    QualityScaling,
    CoverageImbalance,
    ApproxComparison,
    CorrelatedDelayed,
    MultiRegion,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::ArrivalImbalance,
        Family::ChannelHeterogeneity,
        Family::QualityScaling,
        Family::CoverageImbalance,
        Family::ApproxComparison,
        Family::CorrelatedDelayed,
        Family::MultiRegion,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::ArrivalImbalance => "arrival-imbalance",
            Family::ChannelHeterogeneity => "channel-heterogeneity",
            Family::QualityScaling => "quality-scaling",
            Family::CoverageImbalance => "coverage-imbalance",
            Family::ApproxComparison => "approx-comparison",
            Family::CorrelatedDelayed => "correlated-delayed",
            Family::MultiRegion => "multi-region",
        }
    }

    /// Label of the sweep axis in outputs.
    pub fn x_label(&self) -> &'static str {
        match self {
            Family::ChannelHeterogeneity => "set X capacity (Mbit/slot)",
            Family::CoverageImbalance => "coverage imbalance c1/c2 - 1",
            Family::MultiRegion => "operator 1 arrival rate (packets/period)",
            _ => "arrival imbalance a21/a11 - 1",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| SimError::UnknownFamily(s.to_string()))
    }
}

/// One setting of a family's swept parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    /// Raw swept value (beta1, a capacity in bits/slot, or a region count).
    pub param: f64,
    /// Value plotted on the horizontal axis.
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub family: Family,
    pub replications: usize,
    /// Replication `r` uses arrival seed `split(base_seed, r)` at every sweep point.
    pub base_seed: u64,
    /// Clients in every (operator, region) group.
    pub clients_per_group: usize,
    /// Peak per-client arrival rate: rates are this times beta1 or 1 - beta1.
    /// The capacity sweeps default lower so that weak-channel points stay
    /// within the slot budget when sharing.
    pub rate_scale: f64,
    /// beta1 for families that sweep something else.
    pub fixed_beta: f64,
    pub beta_grid: Vec<f64>,
    pub delay: usize,
    pub correlation: f64,
    pub tier_scales: Vec<f64>,
    pub execution: Execution,
}

impl ScenarioSpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            replications: 5,
            base_seed: 0,
            clients_per_group: 30,
            rate_scale: match family {
                Family::ChannelHeterogeneity => 0.65,
                Family::CoverageImbalance => 0.6,
                _ => 0.95,
            },
            fixed_beta: match family {
                Family::CoverageImbalance => 0.5,
                _ => 0.25,
            },
            beta_grid: (0..=10).map(|k| f64::from(k) * 0.05).collect(),
            delay: 1,
            correlation: 0.5,
            tier_scales: vec![1.2, 0.8, 0.6],
            execution: Execution::default(),
        }
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let beta_axis = |b: f64| (1.0 - b) / b - 1.0;
        let raw: Vec<(f64, f64)> = match self.family {
            Family::ArrivalImbalance | Family::QualityScaling | Family::ApproxComparison | Family::CorrelatedDelayed => {
                self.beta_grid.iter().rev().map(|&b| (b, beta_axis(b))).collect()
            }
            Family::ChannelHeterogeneity => (4..=10).map(|k| f64::from(k) * 2e6).map(|c| (c, c / 1e6)).collect(),
            Family::CoverageImbalance => (6..=10).rev().map(|k| f64::from(k) * 1e6).map(|c| (c, 10e6 / c - 1.0)).collect(),
            Family::MultiRegion => vec![(10.0, 10.0)],
        };
        raw.into_iter()
            .enumerate()
            .map(|(index, (param, x))| SweepPoint { index, param, x })
            .collect()
    }

    /// Policy arms in output order; the last is the no-sharing baseline.
    pub fn arms(&self) -> Vec<PolicyMode> {
        match self.family {
            Family::ApproxComparison => vec![PolicyMode::Sharing, PolicyMode::SharingApprox, PolicyMode::NoSharing],
            Family::CorrelatedDelayed => vec![
                PolicyMode::Sharing,
                PolicyMode::SharingDelayed(self.delay),
                PolicyMode::NoSharing,
            ],
            _ => vec![PolicyMode::Sharing, PolicyMode::NoSharing],
        }
    }

    /// Deployment of one sweep point; arms differ only in `policy_mode`.
    pub fn deployment(&self, base: &SystemConfig, point: &SweepPoint) -> Result<Deployment, SimError> {
        let s = self.rate_scale;
        let n = self.clients_per_group;
        let beta = match self.family {
            Family::ChannelHeterogeneity | Family::CoverageImbalance => self.fixed_beta,
            _ => point.param,
        };
        let regions = if self.family == Family::MultiRegion {
            point.param as usize
        } else {
            2
        };
        let mut cfg = base.clone();
        cfg.num_operators = 2;
        cfg.num_regions = regions;
        cfg.sharing_bound = rebroadcast(&base.sharing_bound);
        if self.family == Family::CorrelatedDelayed {
            cfg.arrival_process = ArrivalProcess::Correlated(self.correlation);
        }
        let mut clients = Vec::with_capacity(2 * regions * n);
        for op in 0..2 {
            for r in 0..regions {
                let rate = if self.family == Family::MultiRegion {
                    let own = 0.05 + 0.1 * r as f64;
                    if op == 0 {
                        own
                    } else {
                        1.0 - own
                    }
                } else if op == r {
                    s * beta
                } else {
                    s * (1.0 - beta)
                };
                for c in 0..n {
                    let mut spec = ClientSpec::new(op, r, c, rate);
                    match self.family {
                        Family::ChannelHeterogeneity if c >= n / 2 => spec.channel_capacity = point.param,
                        Family::CoverageImbalance if op != r => spec.channel_capacity = point.param,
                        Family::QualityScaling if !self.tier_scales.is_empty() => {
                            spec.quality_scale = self.tier_scales[c * self.tier_scales.len() / n]
                        }
                        _ => {}
                    }
                    clients.push(spec);
                }
            }
        }
        Ok(Deployment::new(cfg, clients)?)
    }
}

/// Off-diagonal value of the base bound, spread over a 2-operator matrix.
fn rebroadcast(bound: &crate::matrix::SquareMatrix<f64>) -> crate::matrix::SquareMatrix<f64> {
    let zeta = if bound.dim() > 1 { bound[(0, 1)] } else { 0.0 };
    let mut m = crate::matrix::SquareMatrix::filled(2, zeta);
    m[(0, 0)] = 0.0;
    m[(1, 1)] = 0.0;
    m
}

/// Outcome of one policy arm on one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmRun {
    pub mode: PolicyMode,
    pub total_qoe: f64,
    pub region_qoe: Vec<f64>,
    pub mean_shared_slots: f64,
    pub mean_marginal_quality: f64,
    pub max_debt_ratio: f64,
    pub delivery_failures: usize,
    pub max_imbalance: f64,
    /// Digest of the arrival trace the arm consumed.
    pub trace_digest: u64,
}

impl ArmRun {
    fn from_ledger(mode: PolicyMode, d: &Deployment, ledger: &MetricsLedger, trace_digest: u64) -> Self {
        let regions = d.config.num_regions;
        let mut region_qoe = vec![0.0; regions];
        for (n, c) in d.clients.iter().enumerate() {
            region_qoe[c.region] += ledger.client_qoe(n);
        }
        let ops = d.config.num_operators;
        let max_imbalance = (0..ops)
            .flat_map(|i| (i + 1..ops).map(move |j| (i, j)))
            .map(|(i, j)| ledger.sharing_imbalance(i, j))
            .fold(0.0, f64::max);
        Self {
            mode,
            total_qoe: ledger.total_qoe(),
            region_qoe,
            mean_shared_slots: ledger.cross_shared_per_period.iter().sum::<u64>() as f64 / ledger.periods.max(1) as f64,
            mean_marginal_quality: ledger.mean_marginal_quality(),
            max_debt_ratio: ledger.final_debt_ratio(),
            delivery_failures: (0..d.clients.len()).filter(|&n| !ledger.delivery_passes(d, n)).count(),
            max_imbalance,
            trace_digest,
        }
    }

    pub fn debt_blowup(&self) -> bool {
        self.max_debt_ratio > DEBT_BLOWUP_RATIO
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepRun {
    pub point: SweepPoint,
    pub rep: usize,
    pub seed: u64,
    /// In the order of [`ScenarioSpec::arms`].
    pub arms: Vec<ArmRun>,
}

impl RepRun {
    pub fn baseline(&self) -> &ArmRun {
        self.arms.last().expect("baseline arm")
    }

    /// Improvement of total QoE over the baseline, NaN if the baseline is not positive.
    pub fn improvement(&self, arm: usize) -> f64 {
        improvement_percent(self.arms[arm].total_qoe, self.baseline().total_qoe).unwrap_or(f64::NAN)
    }

    pub fn region_improvement(&self, arm: usize, region: usize) -> f64 {
        improvement_percent(self.arms[arm].region_qoe[region], self.baseline().region_qoe[region]).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub spec: ScenarioSpec,
    pub arms: Vec<PolicyMode>,
    pub points: Vec<SweepPoint>,
    /// Point-major, replication-minor.
    pub runs: Vec<RepRun>,
}

impl ScenarioResult {
    pub fn runs_at(&self, point: usize) -> impl Iterator<Item = &RepRun> {
        self.runs.iter().filter(move |r| r.point.index == point)
    }

    pub fn arm_index(&self, mode: PolicyMode) -> Option<usize> {
        self.arms.iter().position(|&m| m == mode)
    }

    fn mean_at(&self, point: usize, f: impl Fn(&RepRun) -> f64) -> f64 {
        let (sum, count) = self.runs_at(point).fold((0.0, 0usize), |(s, c), r| (s + f(r), c + 1));
        sum / count as f64
    }

    /// Mean improvement over replications at each sweep point.
    pub fn mean_improvements(&self, arm: usize) -> Vec<f64> {
        self.points.iter().map(|p| self.mean_at(p.index, |r| r.improvement(arm))).collect()
    }

    pub fn mean_shared_slots(&self, arm: usize) -> Vec<f64> {
        self.points.iter().map(|p| self.mean_at(p.index, |r| r.arms[arm].mean_shared_slots)).collect()
    }
}

fn trace_digest(trace: &ArrivalTrace) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    trace.hash(&mut h);
    h.finish()
}

/// Runs every sweep point and replication of `spec` under every arm.
/// Arms at one (point, replication) share a single arrival trace.
pub fn run_scenario(spec: &ScenarioSpec, base: &SystemConfig) -> Result<ScenarioResult, SimError> {
    if spec.replications == 0 {
        return Err(SimError::Usage("at least one replication is required".into()));
    }
    let points = spec.points();
    let arms = spec.arms();
    let jobs: Vec<(SweepPoint, usize)> = points
        .iter()
        .flat_map(|&p| (0..spec.replications).map(move |r| (p, r)))
        .collect();
    let runs = map_jobs(spec.execution, &jobs, |&(point, rep)| -> Result<RepRun, SimError> {
        let seed = split_seed(spec.base_seed, rep as u64);
        let base_dep = spec.deployment(base, &point)?;
        let trace = ArrivalTrace::generate(&base_dep, seed)?;
        let digest = trace_digest(&trace);
        let arms = arms
            .iter()
            .map(|&mode| {
                let mut d = base_dep.clone();
                d.config.policy_mode = mode;
                d.config.master_seed = seed;
                let ledger = simulate(&d, &trace)?;
                Ok(ArmRun::from_ledger(mode, &d, &ledger, digest))
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        Ok(RepRun { point, rep, seed, arms })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok(ScenarioResult {
        spec: spec.clone(),
        arms,
        points,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(family: Family) -> (ScenarioSpec, SystemConfig) {
        let mut spec = ScenarioSpec::new(family);
        spec.replications = 2;
        spec.clients_per_group = 4;
        spec.beta_grid = vec![0.1, 0.5];
        let mut base = SystemConfig::new(2, 2);
        base.horizon = 200;
        (spec, base)
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!(matches!("fig-99".parse::<Family>(), Err(SimError::UnknownFamily(_))));
    }

    #[test]
    fn arrival_imbalance_grid() {
        let spec = ScenarioSpec::new(Family::ArrivalImbalance);
        let pts = spec.points();
        assert_eq!(pts.len(), 11);
        assert_eq!(pts[0].param, 0.5);
        assert_eq!(pts[0].x, 0.0);
        assert!((pts[9].x - 18.0).abs() < 1e-9);
        assert!(pts[10].x.is_infinite());
        let d = spec.deployment(&SystemConfig::new(2, 2), &pts[9]).unwrap();
        assert_eq!(d.clients.len(), 120);
        assert!((d.clients[0].arrival_rate - 0.95 * 0.05).abs() < 1e-12);
        assert!((d.clients[30].arrival_rate - 0.95 * 0.95).abs() < 1e-12);
        assert!((d.clients[0].delivery_req - 0.95 * d.clients[0].arrival_rate).abs() < 1e-15);
    }

    #[test]
    fn other_grids() {
        let cov = ScenarioSpec::new(Family::CoverageImbalance);
        let xs: Vec<f64> = cov.points().iter().map(|p| p.x).collect();
        assert_eq!(xs[0], 0.0);
        assert!((xs[4] - (10.0 / 6.0 - 1.0)).abs() < 1e-12);
        let het = ScenarioSpec::new(Family::ChannelHeterogeneity);
        assert_eq!(het.points().first().unwrap().param, 8e6);
        assert_eq!(het.points().last().unwrap().param, 20e6);
        let multi = ScenarioSpec::new(Family::MultiRegion);
        let d = multi.deployment(&SystemConfig::new(2, 2), &multi.points()[0]).unwrap();
        assert_eq!(d.config.num_regions, 10);
        assert!((d.clients[9 * 30].arrival_rate - 0.95).abs() < 1e-12);
        assert!((d.clients[10 * 30 + 9 * 30].arrival_rate - 0.05).abs() < 1e-12);
    }

    #[test]
    fn arms_share_one_trace() {
        for family in [Family::ArrivalImbalance, Family::ApproxComparison, Family::CorrelatedDelayed] {
            let (spec, base) = tiny(family);
            let res = run_scenario(&spec, &base).unwrap();
            assert_eq!(res.runs.len(), 4);
            for run in &res.runs {
                assert_eq!(run.arms.len(), spec.arms().len());
                assert!(run.arms.iter().all(|a| a.trace_digest == run.arms[0].trace_digest));
            }
            assert_ne!(res.runs[0].arms[0].trace_digest, res.runs[1].arms[0].trace_digest);
        }
    }

    #[test]
    fn execution_modes_agree() {
        let (mut spec, base) = tiny(Family::ArrivalImbalance);
        spec.execution = Execution::Sequential;
        let a = run_scenario(&spec, &base).unwrap();
        spec.execution = Execution::Parallel;
        let b = run_scenario(&spec, &base).unwrap();
        assert_eq!(a.runs, b.runs);
    }

    #[test]
    fn no_sharing_arm_never_shares() {
        let (spec, base) = tiny(Family::ArrivalImbalance);
        let res = run_scenario(&spec, &base).unwrap();
        for run in &res.runs {
            assert_eq!(run.baseline().mean_shared_slots, 0.0);
            assert_eq!(run.baseline().max_imbalance, 0.0);
        }
    }
}
