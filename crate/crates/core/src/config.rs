//! System configuration, client specifications, and the TOML config schema.
//!
//! Config files are TOML with the unit of every quantity in its key name.
//! Every key except `num_operators`, `num_regions` and the client
//! `arrival_rate_per_period` has a default:
//!
//! ```toml
//! num_operators = 2
//! num_regions = 2
//! period_len_slots = 20
//! horizon_periods = 10000
//! sharing_bound_slots_per_period = 0.001   # scalar, or a full matrix [[0, a], [a, 0]]
//! policy_weight_v = 100.0
//! q_min_quality = 0.3
//! tolerance_xi1_rate = 0.01
//! tolerance_xi2_slots_per_period = 0.01
//! master_seed = 0
//! policy_mode = "sharing"          # sharing | no-sharing | sharing-approx | sharing-delayed
//! delay_periods = 1                # only read in sharing-delayed mode
//! arrival_process = "bernoulli"    # bernoulli | correlated
//! arrival_correlation = 0.5        # only read for correlated arrivals
//! unserved_quality = "zero"        # zero | log-model
//! quality_debt_increment = "every-period"  # every-period | per-arrival | literal
//! quality_floor_offset_mbps = 0.1
//! quality_normalizer_mbps = 0.4
//! debt_sample_interval_periods = 100
//!
//! [[clients]]
//! operator = 0                     # 0-based
//! region = 0                       # 0-based
//! count = 30                       # clients in this group, default 1
//! arrival_rate_per_period = 0.5
//! channel_capacity_bits_per_slot = 10e6
//! quality_scale_gamma = 0.8
//! delivery_req_per_period = 0.475  # default 0.95 * arrival rate
//! ```
//!
//! Client indices within an (operator, region) group are assigned in order of
//! appearance, starting at 0.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::matrix::SquareMatrix;
use crate::quality::QualityParams;

pub const DEFAULT_PERIOD_LEN: u32 = 20;
pub const DEFAULT_HORIZON: usize = 10_000;
pub const DEFAULT_SHARING_BOUND: f64 = 0.001;
pub const DEFAULT_POLICY_WEIGHT: f64 = 100.0;
pub const DEFAULT_Q_MIN: f64 = 0.3;
pub const DEFAULT_TOLERANCE: f64 = 0.01;
pub const DEFAULT_CAPACITY_BITS: f64 = 10e6;
pub const DEFAULT_QUALITY_SCALE: f64 = 0.8;
pub const DEFAULT_DELIVERY_FRACTION: f64 = 0.95;
pub const DEFAULT_FLOOR_OFFSET: f64 = 0.1;
pub const DEFAULT_NORMALIZER: f64 = 0.4;

/// How the per-period optimizer shares and allocates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyMode {
    /// Exact per-region solve with cross-operator sharing.
    Sharing,
    /// Each operator uses only its own `T` slots per region.
    NoSharing,
    /// Greedy solve of the relaxed (piecewise-linear acceptability) objective.
    SharingApprox,
    /// Exact solve driven by debts that are `d` periods stale.
    SharingDelayed(usize),
}

impl PolicyMode {
    pub fn label(&self) -> String {
        match self {
            PolicyMode::Sharing => "sharing".into(),
            PolicyMode::NoSharing => "no-sharing".into(),
            PolicyMode::SharingApprox => "sharing-approx".into(),
            PolicyMode::SharingDelayed(d) => format!("sharing-delayed-{d}"),
        }
    }

    pub fn shares(&self) -> bool {
        !matches!(self, PolicyMode::NoSharing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrivalProcess {
    Bernoulli,
    /// Thresholded first-order autoregressive latent with this lag-1 coefficient.
    Correlated(f64),
}

/// Quality credited to an arrived client that receives no slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnservedQuality {
    /// Contributes 0 to the objective and to QoE sums.
    Zero,
    /// Contributes the (negative) log-model value at zero slots.
    LogModel,
}

/// Amount added to a client's quality debt in a period with an arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DebtIncrement {
    /// `q / alpha`: the requirement per arrival, so the debt tracks the
    /// per-period delivery rate requirement `q`.
    PerArrival,
    /// `q` itself.
    Literal,
    /// `q` in every period, arrival or not, so the debt tracks the
    /// time-average delivery rate over all periods.
    EveryPeriod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub num_operators: usize,
    pub num_regions: usize,
    /// Timeslots per period (`T`).
    pub period_len: u32,
    /// Number of simulated periods (`K`).
    pub horizon: usize,
    /// Symmetric per-pair bound on average net sharing, slots per period.
    pub sharing_bound: SquareMatrix<f64>,
    /// Drift-plus-penalty weight `V`.
    pub policy_weight: f64,
    pub q_min: f64,
    pub tolerance_xi1: f64,
    pub tolerance_xi2: f64,
    pub master_seed: u64,
    pub policy_mode: PolicyMode,
    pub arrival_process: ArrivalProcess,
    pub unserved_quality: UnservedQuality,
    pub debt_increment: DebtIncrement,
    pub floor_offset_mbps: f64,
    pub normalizer_mbps: f64,
    pub debt_sample_interval: usize,
}

impl SystemConfig {
    /// Configuration with every optional field at its default.
    pub fn new(num_operators: usize, num_regions: usize) -> Self {
        Self {
            num_operators,
            num_regions,
            period_len: DEFAULT_PERIOD_LEN,
            horizon: DEFAULT_HORIZON,
            sharing_bound: uniform_bound(num_operators, DEFAULT_SHARING_BOUND),
            policy_weight: DEFAULT_POLICY_WEIGHT,
            q_min: DEFAULT_Q_MIN,
            tolerance_xi1: DEFAULT_TOLERANCE,
            tolerance_xi2: DEFAULT_TOLERANCE,
            master_seed: 0,
            policy_mode: PolicyMode::Sharing,
            arrival_process: ArrivalProcess::Bernoulli,
            unserved_quality: UnservedQuality::Zero,
            debt_increment: DebtIncrement::EveryPeriod,
            floor_offset_mbps: DEFAULT_FLOOR_OFFSET,
            normalizer_mbps: DEFAULT_NORMALIZER,
            debt_sample_interval: 100,
        }
    }

    pub fn with_uniform_bound(mut self, zeta: f64) -> Self {
        self.sharing_bound = uniform_bound(self.num_operators, zeta);
        self
    }

    fn validate(&self, errs: &mut Vec<String>) {
        if self.num_operators == 0 {
            errs.push("num_operators must be >= 1".into());
        }
        if self.num_regions == 0 {
            errs.push("num_regions must be >= 1".into());
        }
        if self.period_len == 0 {
            errs.push("period_len_slots must be >= 1".into());
        }
        if self.horizon == 0 {
            errs.push("horizon_periods must be >= 1".into());
        }
        if !(self.policy_weight.is_finite() && self.policy_weight > 0.0) {
            errs.push(format!("policy_weight_v must be positive, got {}", self.policy_weight));
        }
        if !self.q_min.is_finite() {
            errs.push("q_min_quality must be finite".into());
        }
        for (name, v) in [
            ("tolerance_xi1_rate", self.tolerance_xi1),
            ("tolerance_xi2_slots_per_period", self.tolerance_xi2),
            ("quality_floor_offset_mbps", self.floor_offset_mbps),
            ("quality_normalizer_mbps", self.normalizer_mbps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("{name} must be a positive real, got {v}"));
            }
        }
        if self.master_seed > i64::MAX as u64 {
            errs.push("master_seed must fit in a signed 64-bit integer".into());
        }
        if self.debt_sample_interval == 0 {
            errs.push("debt_sample_interval_periods must be >= 1".into());
        }
        if let ArrivalProcess::Correlated(rho) = self.arrival_process {
            if !(0.0..1.0).contains(&rho) {
                errs.push(format!("arrival_correlation must lie in [0, 1), got {rho}"));
            }
        }
        let zeta = &self.sharing_bound;
        if zeta.dim() != self.num_operators {
            errs.push(format!(
                "sharing_bound_slots_per_period is {0}x{0}, expected {1}x{1}",
                zeta.dim(),
                self.num_operators
            ));
            return;
        }
        for (i, j, &v) in zeta.iter() {
            if i == j && v != 0.0 {
                errs.push(format!("sharing bound diagonal ({i},{i}) must be 0, got {v}"));
            }
            if !(v.is_finite() && v >= 0.0) {
                errs.push(format!("sharing bound ({i},{j}) must be non-negative, got {v}"));
            }
            if i < j && v != zeta[(j, i)] {
                errs.push(format!(
                    "sharing bound must be symmetric: ({i},{j}) = {v} but ({j},{i}) = {}",
                    zeta[(j, i)]
                ));
            }
        }
    }
}

fn uniform_bound(n: usize, zeta: f64) -> SquareMatrix<f64> {
    let mut m = SquareMatrix::filled(n, zeta);
    for i in 0..n {
        m[(i, i)] = 0.0;
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientSpec {
    pub operator: usize,
    pub region: usize,
    /// Index within the (operator, region) group.
    pub client: usize,
    /// Packet arrival probability per period (`alpha`).
    pub arrival_rate: f64,
    /// Bits delivered per allotted timeslot (`c`).
    pub channel_capacity: f64,
    pub quality_scale: f64,
    /// Required timely delivery rate per period (`q`).
    pub delivery_req: f64,
}

impl ClientSpec {
    pub fn new(operator: usize, region: usize, client: usize, arrival_rate: f64) -> Self {
        Self {
            operator,
            region,
            client,
            arrival_rate,
            channel_capacity: DEFAULT_CAPACITY_BITS,
            quality_scale: DEFAULT_QUALITY_SCALE,
            delivery_req: DEFAULT_DELIVERY_FRACTION * arrival_rate,
        }
    }

    fn validate(&self, cfg: &SystemConfig, errs: &mut Vec<String>) {
        let who = format!(
            "client (op {}, region {}, #{})",
            self.operator, self.region, self.client
        );
        if self.operator >= cfg.num_operators {
            errs.push(format!("{who}: operator out of range"));
        }
        if self.region >= cfg.num_regions {
            errs.push(format!("{who}: region out of range"));
        }
        if !(0.0..=1.0).contains(&self.arrival_rate) {
            errs.push(format!("{who}: arrival rate {} not in [0, 1]", self.arrival_rate));
        }
        if !(self.channel_capacity.is_finite() && self.channel_capacity > 0.0) {
            errs.push(format!("{who}: channel capacity must be positive"));
        }
        if !(self.quality_scale.is_finite() && self.quality_scale > 0.0) {
            errs.push(format!("{who}: quality scale must be positive"));
        }
        if !(self.delivery_req >= 0.0 && self.delivery_req <= self.arrival_rate) {
            errs.push(format!(
                "{who}: delivery requirement {} must lie in [0, arrival rate {}]",
                self.delivery_req, self.arrival_rate
            ));
        }
    }
}

/// A validated configuration together with its client population.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub config: SystemConfig,
    pub clients: Vec<ClientSpec>,
    members: Vec<Vec<Vec<usize>>>,
}

impl Deployment {
    pub fn new(config: SystemConfig, clients: Vec<ClientSpec>) -> Result<Self, ConfigError> {
        let mut errs = Vec::new();
        config.validate(&mut errs);
        for c in &clients {
            c.validate(&config, &mut errs);
        }
        let mut members = vec![vec![Vec::new(); config.num_regions]; config.num_operators];
        if errs.is_empty() {
            for (idx, c) in clients.iter().enumerate() {
                members[c.operator][c.region].push(idx);
            }
            for (op, regions) in members.iter_mut().enumerate() {
                for (region, group) in regions.iter_mut().enumerate() {
                    group.sort_by_key(|&idx| clients[idx].client);
                    if group.windows(2).any(|w| clients[w[0]].client == clients[w[1]].client) {
                        errs.push(format!("duplicate client index in operator {op}, region {region}"));
                    }
                }
            }
        }
        if !errs.is_empty() {
            return Err(ConfigError::Invalid(errs));
        }
        Ok(Self {
            config,
            clients,
            members,
        })
    }

    /// Global client indices of one (operator, region) group, ordered by client index.
    pub fn members(&self, operator: usize, region: usize) -> &[usize] {
        &self.members[operator][region]
    }

    pub fn quality_params(&self, client: usize) -> QualityParams {
        let c = &self.clients[client];
        QualityParams {
            scale_gamma: c.quality_scale,
            floor_offset: self.config.floor_offset_mbps,
            normalizer: self.config.normalizer_mbps,
            capacity_mbits_per_slot: c.channel_capacity / 1e6,
            period_len: f64::from(self.config.period_len),
        }
    }

    /// Per-arrival debt increment for each client under the configured rule.
    pub fn debt_increments(&self) -> Vec<f64> {
        self.clients
            .iter()
            .map(|c| match self.config.debt_increment {
                DebtIncrement::Literal | DebtIncrement::EveryPeriod => c.delivery_req,
                DebtIncrement::PerArrival if c.arrival_rate > 0.0 => c.delivery_req / c.arrival_rate,
                DebtIncrement::PerArrival => 0.0,
            })
            .collect()
    }

    /// Serializes to the TOML schema; [`load_config`] reads it back unchanged.
    pub fn to_toml(&self) -> String {
        let cfg = &self.config;
        let (mode, delay) = match cfg.policy_mode {
            PolicyMode::Sharing => (ModeKey::Sharing, None),
            PolicyMode::NoSharing => (ModeKey::NoSharing, None),
            PolicyMode::SharingApprox => (ModeKey::SharingApprox, None),
            PolicyMode::SharingDelayed(d) => (ModeKey::SharingDelayed, Some(d)),
        };
        let (process, corr) = match cfg.arrival_process {
            ArrivalProcess::Bernoulli => (ProcessKey::Bernoulli, None),
            ArrivalProcess::Correlated(r) => (ProcessKey::Correlated, Some(r)),
        };
        let file = ConfigFile {
            num_operators: cfg.num_operators,
            num_regions: cfg.num_regions,
            period_len_slots: Some(cfg.period_len),
            horizon_periods: Some(cfg.horizon),
            sharing_bound_slots_per_period: Some(BoundSpec::Matrix(cfg.sharing_bound.to_rows())),
            policy_weight_v: Some(cfg.policy_weight),
            q_min_quality: Some(cfg.q_min),
            tolerance_xi1_rate: Some(cfg.tolerance_xi1),
            tolerance_xi2_slots_per_period: Some(cfg.tolerance_xi2),
            master_seed: Some(cfg.master_seed as i64),
            policy_mode: Some(mode),
            delay_periods: delay,
            arrival_process: Some(process),
            arrival_correlation: corr,
            unserved_quality: Some(cfg.unserved_quality),
            quality_debt_increment: Some(cfg.debt_increment),
            quality_floor_offset_mbps: Some(cfg.floor_offset_mbps),
            quality_normalizer_mbps: Some(cfg.normalizer_mbps),
            debt_sample_interval_periods: Some(cfg.debt_sample_interval),
            clients: self.client_groups(),
        };
        toml::to_string(&file).expect("config serializes to toml")
    }

    /// Run-length encodes consecutive clients that differ only by index.
    fn client_groups(&self) -> Vec<ClientGroup> {
        let mut groups: Vec<(ClientGroup, usize)> = Vec::new();
        for c in &self.clients {
            if let Some((g, last)) = groups.last_mut() {
                if g.operator == c.operator
                    && g.region == c.region
                    && *last + 1 == c.client
                    && g.arrival_rate_per_period == c.arrival_rate
                    && g.channel_capacity_bits_per_slot == Some(c.channel_capacity)
                    && g.quality_scale_gamma == Some(c.quality_scale)
                    && g.delivery_req_per_period == Some(c.delivery_req)
                {
                    g.count = Some(g.count.unwrap_or(1) + 1);
                    *last = c.client;
                    continue;
                }
            }
            groups.push((
                ClientGroup {
                    operator: c.operator,
                    region: c.region,
                    count: Some(1),
                    arrival_rate_per_period: c.arrival_rate,
                    channel_capacity_bits_per_slot: Some(c.channel_capacity),
                    quality_scale_gamma: Some(c.quality_scale),
                    delivery_req_per_period: Some(c.delivery_req),
                },
                c.client,
            ));
        }
        groups.into_iter().map(|(g, _)| g).collect()
    }
}

/// Parses and validates a TOML config. Unset keys take their documented defaults.
pub fn load_config(text: &str) -> Result<Deployment, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))?;
    let mut errs = Vec::new();
    let mut cfg = SystemConfig::new(file.num_operators, file.num_regions);
    if let Some(v) = file.period_len_slots {
        cfg.period_len = v;
    }
    if let Some(v) = file.horizon_periods {
        cfg.horizon = v;
    }
    match file.sharing_bound_slots_per_period {
        None => {}
        Some(BoundSpec::Scalar(z)) => cfg.sharing_bound = uniform_bound(cfg.num_operators, z),
        Some(BoundSpec::Matrix(rows)) => match SquareMatrix::from_rows(rows) {
            Some(m) => cfg.sharing_bound = m,
            None => errs.push("sharing_bound_slots_per_period must be a square matrix".into()),
        },
    }
    if let Some(v) = file.policy_weight_v {
        cfg.policy_weight = v;
    }
    if let Some(v) = file.q_min_quality {
        cfg.q_min = v;
    }
    if let Some(v) = file.tolerance_xi1_rate {
        cfg.tolerance_xi1 = v;
    }
    if let Some(v) = file.tolerance_xi2_slots_per_period {
        cfg.tolerance_xi2 = v;
    }
    if let Some(seed) = file.master_seed {
        if seed < 0 {
            errs.push(format!("master_seed must be non-negative, got {seed}"));
        } else {
            cfg.master_seed = seed as u64;
        }
    }
    cfg.policy_mode = match file.policy_mode.unwrap_or(ModeKey::Sharing) {
        ModeKey::Sharing => PolicyMode::Sharing,
        ModeKey::NoSharing => PolicyMode::NoSharing,
        ModeKey::SharingApprox => PolicyMode::SharingApprox,
        ModeKey::SharingDelayed => PolicyMode::SharingDelayed(file.delay_periods.unwrap_or(1)),
    };
    cfg.arrival_process = match file.arrival_process.unwrap_or(ProcessKey::Bernoulli) {
        ProcessKey::Bernoulli => ArrivalProcess::Bernoulli,
        ProcessKey::Correlated => ArrivalProcess::Correlated(file.arrival_correlation.unwrap_or(0.5)),
    };
    if let Some(v) = file.unserved_quality {
        cfg.unserved_quality = v;
    }
    if let Some(v) = file.quality_debt_increment {
        cfg.debt_increment = v;
    }
    if let Some(v) = file.quality_floor_offset_mbps {
        cfg.floor_offset_mbps = v;
    }
    if let Some(v) = file.quality_normalizer_mbps {
        cfg.normalizer_mbps = v;
    }
    if let Some(v) = file.debt_sample_interval_periods {
        cfg.debt_sample_interval = v;
    }

    let mut next_index = vec![vec![0usize; cfg.num_regions]; cfg.num_operators];
    let mut clients = Vec::new();
    for (g_idx, g) in file.clients.iter().enumerate() {
        if g.operator >= cfg.num_operators || g.region >= cfg.num_regions {
            errs.push(format!(
                "clients[{g_idx}]: (operator {}, region {}) out of range",
                g.operator, g.region
            ));
            continue;
        }
        let count = g.count.unwrap_or(1);
        for _ in 0..count {
            let slot = &mut next_index[g.operator][g.region];
            let mut c = ClientSpec::new(g.operator, g.region, *slot, g.arrival_rate_per_period);
            *slot += 1;
            if let Some(v) = g.channel_capacity_bits_per_slot {
                c.channel_capacity = v;
            }
            if let Some(v) = g.quality_scale_gamma {
                c.quality_scale = v;
            }
            if let Some(v) = g.delivery_req_per_period {
                c.delivery_req = v;
            }
            clients.push(c);
        }
    }
    if !errs.is_empty() {
        return Err(ConfigError::Invalid(errs));
    }
    Deployment::new(cfg, clients)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    num_operators: usize,
    num_regions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    period_len_slots: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon_periods: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sharing_bound_slots_per_period: Option<BoundSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    policy_weight_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_min_quality: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance_xi1_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance_xi2_slots_per_period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    master_seed: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    policy_mode: Option<ModeKey>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delay_periods: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    arrival_process: Option<ProcessKey>,
    #[serde(skip_serializing_if = "Option::is_none")]
    arrival_correlation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unserved_quality: Option<UnservedQuality>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quality_debt_increment: Option<DebtIncrement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quality_floor_offset_mbps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quality_normalizer_mbps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    debt_sample_interval_periods: Option<usize>,
    #[serde(default)]
    clients: Vec<ClientGroup>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum BoundSpec {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ModeKey {
    Sharing,
    NoSharing,
    SharingApprox,
    SharingDelayed,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ProcessKey {
    Bernoulli,
    Correlated,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClientGroup {
    operator: usize,
    region: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
    arrival_rate_per_period: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel_capacity_bits_per_slot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quality_scale_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delivery_req_per_period: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"
num_operators = 2
num_regions = 2

[[clients]]
operator = 0
region = 0
count = 30
arrival_rate_per_period = 0.5

[[clients]]
operator = 0
region = 1
count = 30
arrival_rate_per_period = 0.5

[[clients]]
operator = 1
region = 0
count = 30
arrival_rate_per_period = 0.5

[[clients]]
operator = 1
region = 1
count = 30
arrival_rate_per_period = 0.5
"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let d = load_config(MINIMAL).unwrap();
        let cfg = &d.config;
        assert_eq!(cfg.period_len, 20);
        assert_eq!(cfg.horizon, 10_000);
        assert_eq!(cfg.sharing_bound[(0, 1)], 0.001);
        assert_eq!(cfg.sharing_bound[(0, 0)], 0.0);
        assert_eq!(cfg.q_min, 0.3);
        assert_eq!(d.clients.len(), 120);
        for c in &d.clients {
            assert_eq!(c.channel_capacity, 10e6);
            assert!((c.delivery_req - 0.95 * 0.5).abs() < 1e-15);
        }
        assert_eq!(d.members(1, 0).len(), 30);
        assert_eq!(d.clients[d.members(1, 0)[29]].client, 29);
    }

    #[test]
    fn asymmetric_bound_rejected() {
        let text = "num_operators = 2\nnum_regions = 1\nsharing_bound_slots_per_period = [[0.0, 0.1], [0.2, 0.0]]\n";
        let err = load_config(text).unwrap_err();
        assert!(matches!(&err, ConfigError::Invalid(v) if v.iter().any(|m| m.contains("symmetric"))), "{err}");
    }

    #[test]
    fn requirement_above_arrival_rate_rejected() {
        let text = "num_operators = 1\nnum_regions = 1\n[[clients]]\noperator = 0\nregion = 0\narrival_rate_per_period = 0.4\ndelivery_req_per_period = 0.5\n";
        let err = load_config(text).unwrap_err();
        assert!(err.to_string().contains("delivery requirement"), "{err}");
    }

    #[test]
    fn all_failures_are_listed() {
        let text = "num_operators = 2\nnum_regions = 1\nperiod_len_slots = 0\npolicy_weight_v = -1.0\n[[clients]]\noperator = 0\nregion = 0\narrival_rate_per_period = 1.5\n";
        match load_config(text).unwrap_err() {
            ConfigError::Invalid(v) => assert!(v.len() >= 3, "{v:?}"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_key_is_a_schema_error() {
        let err = load_config("num_operators = 1\nnum_regions = 1\nperiod_length = 3\n").unwrap_err();
        assert!(matches!(&err, ConfigError::Schema(m) if m.contains("period_length")), "{err}");
    }

    #[test]
    fn wrong_type_names_the_field() {
        let err = load_config("num_operators = 1\nnum_regions = 1\nhorizon_periods = \"long\"\n").unwrap_err();
        assert!(matches!(&err, ConfigError::Schema(m) if m.contains("horizon_periods")), "{err}");
    }

    #[test]
    fn delayed_mode_reads_delay() {
        let d = load_config("num_operators = 1\nnum_regions = 1\npolicy_mode = \"sharing-delayed\"\ndelay_periods = 3\n").unwrap();
        assert_eq!(d.config.policy_mode, PolicyMode::SharingDelayed(3));
    }

    fn arb_deployment() -> impl Strategy<Value = Deployment> {
        (1usize..4, 1usize..3, 1u32..40, 1usize..5000, 0.0f64..2.0, 0i64..i64::MAX)
            .prop_flat_map(|(ops, regions, t, k, zeta, seed)| {
                let client = (0..ops, 0..regions, 0.0f64..=1.0, 1e5f64..3e7, 0.3f64..2.0, 0.0f64..=1.0);
                (Just((ops, regions, t, k, zeta, seed)), proptest::collection::vec(client, 0..12))
            })
            .prop_map(|((ops, regions, t, k, zeta, seed), raw)| {
                let mut cfg = SystemConfig::new(ops, regions).with_uniform_bound(zeta);
                cfg.period_len = t;
                cfg.horizon = k;
                cfg.master_seed = seed as u64;
                let mut next = vec![vec![0; regions]; ops];
                let clients = raw
                    .into_iter()
                    .map(|(op, r, alpha, c, g, frac)| {
                        let mut spec = ClientSpec::new(op, r, next[op][r], alpha);
                        next[op][r] += 1;
                        spec.channel_capacity = c;
                        spec.quality_scale = g;
                        spec.delivery_req = alpha * frac;
                        spec
                    })
                    .collect();
                Deployment::new(cfg, clients).unwrap()
            })
    }

    proptest! {
        #[test]
        fn toml_round_trip(d in arb_deployment()) {
            let text = d.to_toml();
            let back = load_config(&text).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
