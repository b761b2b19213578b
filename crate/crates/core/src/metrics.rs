//! Run statistics: timely delivery, sharing balance, QoE and debt samples.

use std::io::Write;

use crate::arrivals::ArrivalTrace;
use crate::config::Deployment;
use crate::decision::PeriodDecision;
use crate::error::MetricsError;
use crate::matrix::SquareMatrix;
use crate::policy::DebtState;

/// Snapshot of every debt at the start of a period.
#[derive(Debug, Clone, PartialEq)]
pub struct DebtSample {
    pub period: usize,
    pub debts: DebtState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsLedger {
    /// Periods recorded (`K`).
    pub periods: usize,
    pub arrivals: Vec<u64>,
    pub accepted: Vec<u64>,
    /// Sum of realized quality over periods with an arrival.
    pub quality_sum: Vec<f64>,
    /// `(donor, recipient)` slots summed over regions and periods.
    pub shared: SquareMatrix<u64>,
    /// Cross-operator slots lent in each recorded period.
    pub cross_shared_per_period: Vec<u64>,
    /// Marginal quality at the allotted slot count, summed over served clients.
    pub marginal_quality_sum: f64,
    pub served: u64,
    pub debt_samples: Vec<DebtSample>,
    /// Debts after the last recorded period.
    pub final_debts: DebtState,
}

impl MetricsLedger {
    pub fn new(num_clients: usize, num_operators: usize) -> Self {
        Self {
            periods: 0,
            arrivals: vec![0; num_clients],
            accepted: vec![0; num_clients],
            quality_sum: vec![0.0; num_clients],
            shared: SquareMatrix::zeros(num_operators),
            cross_shared_per_period: Vec::new(),
            marginal_quality_sum: 0.0,
            served: 0,
            debt_samples: Vec::new(),
            final_debts: DebtState::zeros(num_clients, num_operators),
        }
    }

    pub fn for_deployment(d: &Deployment) -> Self {
        Self::new(d.clients.len(), d.config.num_operators)
    }

    /// Adds one period. `marginal[n]` is the marginal quality of client `n`
    /// at its allotted slot count; only served clients are counted.
    pub fn record(&mut self, arrivals: &[bool], decision: &PeriodDecision, marginal: &[f64]) {
        self.periods += 1;
        for (n, &a) in arrivals.iter().enumerate() {
            if a {
                self.arrivals[n] += 1;
                self.accepted[n] += u64::from(decision.accept[n]);
                self.quality_sum[n] += decision.quality[n];
                if decision.alloc[n] > 0 {
                    self.marginal_quality_sum += marginal[n];
                    self.served += 1;
                }
            }
        }
        for (j, i, &v) in decision.share_totals().iter() {
            self.shared[(j, i)] += v;
        }
        self.cross_shared_per_period.push(decision.cross_shared());
    }

    pub fn sample_debts(&mut self, period: usize, debts: &DebtState) {
        self.debt_samples.push(DebtSample {
            period,
            debts: debts.clone(),
        });
    }

    /// Combines the ledger of a run with that of the periods following it.
    pub fn merge(&mut self, later: &MetricsLedger) {
        self.periods += later.periods;
        for (a, b) in self.arrivals.iter_mut().zip(&later.arrivals) {
            *a += b;
        }
        for (a, b) in self.accepted.iter_mut().zip(&later.accepted) {
            *a += b;
        }
        for (a, b) in self.quality_sum.iter_mut().zip(&later.quality_sum) {
            *a += b;
        }
        for (j, i, &v) in later.shared.iter() {
            self.shared[(j, i)] += v;
        }
        self.cross_shared_per_period.extend_from_slice(&later.cross_shared_per_period);
        self.marginal_quality_sum += later.marginal_quality_sum;
        self.served += later.served;
        self.debt_samples.extend(later.debt_samples.iter().cloned());
        self.final_debts = later.final_debts.clone();
    }

    fn horizon(&self) -> f64 {
        self.periods.max(1) as f64
    }

    /// `sum_k b(k) / K`.
    pub fn timely_delivery_rate(&self, client: usize) -> f64 {
        self.accepted[client] as f64 / self.horizon()
    }

    /// `|sum_k S[j->i] - sum_k S[i->j]| / K`.
    pub fn sharing_imbalance(&self, i: usize, j: usize) -> f64 {
        (self.shared[(j, i)] as f64 - self.shared[(i, j)] as f64).abs() / self.horizon()
    }

    /// Time-averaged quality of one client.
    pub fn client_qoe(&self, client: usize) -> f64 {
        self.quality_sum[client] / self.horizon()
    }

    /// Time-averaged quality summed over all clients.
    pub fn total_qoe(&self) -> f64 {
        self.quality_sum.iter().sum::<f64>() / self.horizon()
    }

    pub fn mean_marginal_quality(&self) -> f64 {
        if self.served == 0 {
            0.0
        } else {
            self.marginal_quality_sum / self.served as f64
        }
    }

    /// Largest final debt divided by `K`.
    pub fn final_debt_ratio(&self) -> f64 {
        self.final_debts.max_entry() / self.horizon()
    }

    pub fn delivery_passes(&self, deployment: &Deployment, client: usize) -> bool {
        self.timely_delivery_rate(client) >= deployment.clients[client].delivery_req - deployment.config.tolerance_xi1
    }

    pub fn imbalance_passes(&self, deployment: &Deployment, i: usize, j: usize) -> bool {
        self.sharing_imbalance(i, j) <= deployment.config.sharing_bound[(i, j)] + deployment.config.tolerance_xi2
    }

    /// One row per client then one per unordered operator pair.
    ///
    /// Columns: `kind,operator,region,client,peer,arrivals,accepted,
    /// timely_delivery_rate,requirement,qoe,imbalance,bound,pass`.
    /// Client rows leave `peer` and `imbalance` empty; pair rows leave the
    /// per-client columns empty. `bound` is `q - xi1` for clients and
    /// `zeta + xi2` for pairs.
    pub fn write_summary_csv<W: Write>(&self, deployment: &Deployment, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SUMMARY_HEADER)?;
        let cfg = &deployment.config;
        for (n, c) in deployment.clients.iter().enumerate() {
            w.write_record([
                "client".to_string(),
                c.operator.to_string(),
                c.region.to_string(),
                c.client.to_string(),
                String::new(),
                self.arrivals[n].to_string(),
                self.accepted[n].to_string(),
                self.timely_delivery_rate(n).to_string(),
                c.delivery_req.to_string(),
                self.client_qoe(n).to_string(),
                String::new(),
                (c.delivery_req - cfg.tolerance_xi1).to_string(),
                self.delivery_passes(deployment, n).to_string(),
            ])?;
        }
        for i in 0..cfg.num_operators {
            for j in i + 1..cfg.num_operators {
                w.write_record([
                    "pair".to_string(),
                    i.to_string(),
                    String::new(),
                    String::new(),
                    j.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    cfg.sharing_bound[(i, j)].to_string(),
                    String::new(),
                    self.sharing_imbalance(i, j).to_string(),
                    (cfg.sharing_bound[(i, j)] + cfg.tolerance_xi2).to_string(),
                    self.imbalance_passes(deployment, i, j).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Columns: `period,entity,debt`. Entities are `delta:<op>:<region>:<client>`
    /// and `sigma:<i>-><j>`.
    pub fn write_debt_csv<W: Write>(&self, deployment: &Deployment, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["period", "entity", "debt"])?;
        for s in &self.debt_samples {
            for (n, c) in deployment.clients.iter().enumerate() {
                w.write_record([
                    s.period.to_string(),
                    format!("delta:{}:{}:{}", c.operator, c.region, c.client),
                    s.debts.quality[n].to_string(),
                ])?;
            }
            for (i, j, v) in s.debts.sharing.off_diagonal() {
                w.write_record([s.period.to_string(), format!("sigma:{i}->{j}"), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Columns: `period,cross_shared_slots`.
    pub fn write_sharing_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["period", "cross_shared_slots"])?;
        for (k, v) in self.cross_shared_per_period.iter().enumerate() {
            w.write_record([k.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const SUMMARY_HEADER: [&str; 13] = [
    "kind",
    "operator",
    "region",
    "client",
    "peer",
    "arrivals",
    "accepted",
    "timely_delivery_rate",
    "requirement",
    "qoe",
    "imbalance",
    "bound",
    "pass",
];

/// `100 * (with - without) / without`.
pub fn improvement_percent(with_sharing: f64, without_sharing: f64) -> Result<f64, MetricsError> {
    if without_sharing > 0.0 {
        Ok(100.0 * (with_sharing - without_sharing) / without_sharing)
    } else {
        Err(MetricsError::UndefinedBaseline(without_sharing))
    }
}

/// Per-client arrival counts of a trace; equals the ledger's `arrivals`
/// field for any run on that trace.
pub fn trace_arrival_counts(trace: &ArrivalTrace) -> Vec<u64> {
    (0..trace.num_clients()).map(|n| trace.client_count(n) as u64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decision(alloc: Vec<u32>, accept: Vec<bool>, quality: Vec<f64>) -> PeriodDecision {
        let n = alloc.len();
        let mut d = PeriodDecision::empty(n, 2, 1);
        d.alloc = alloc;
        d.accept = accept;
        d.quality = quality;
        d
    }

    #[test]
    fn alternating_service_rate() {
        let mut l = MetricsLedger::new(1, 2);
        for k in 0..10 {
            let served = k % 2 == 0;
            l.record(&[true], &decision(vec![u32::from(served)], vec![served], vec![0.0]), &[0.0]);
        }
        assert_eq!(l.timely_delivery_rate(0), 0.5);
    }

    #[test]
    fn empty_run_has_zero_rate_and_qoe() {
        let mut l = MetricsLedger::new(2, 2);
        for _ in 0..5 {
            l.record(&[false, false], &PeriodDecision::empty(2, 2, 1), &[0.0; 2]);
        }
        assert_eq!(l.timely_delivery_rate(0), 0.0);
        assert_eq!(l.total_qoe(), 0.0);
        assert_eq!(l.sharing_imbalance(0, 1), 0.0);
    }

    #[test]
    fn imbalance_arithmetic() {
        let mut l = MetricsLedger::new(0, 2);
        l.periods = 10;
        l.shared[(1, 0)] = 10;
        l.shared[(0, 1)] = 4;
        assert!((l.sharing_imbalance(0, 1) - 0.6).abs() < 1e-15);
        assert_eq!(l.sharing_imbalance(0, 1), l.sharing_imbalance(1, 0));
    }

    #[test]
    fn qoe_is_a_time_average() {
        let q1 = (1.5f64).ln() / 0.8;
        let mut short = MetricsLedger::new(1, 2);
        let mut long = MetricsLedger::new(1, 2);
        for k in 0..200 {
            let d = decision(vec![1], vec![true], vec![q1]);
            if k < 100 {
                short.record(&[true], &d, &[0.0]);
            }
            long.record(&[true], &d, &[0.0]);
        }
        assert!((short.total_qoe() - 0.506_831_385_1).abs() < 1e-9);
        assert!((short.total_qoe() - long.total_qoe()).abs() < 1e-12);
    }

    #[test]
    fn improvement_examples() {
        assert_eq!(improvement_percent(2.0, 2.0).unwrap(), 0.0);
        assert!((improvement_percent(1.9, 1.0).unwrap() - 90.0).abs() < 1e-12);
        assert!((improvement_percent(0.6, 0.5).unwrap() - 20.0).abs() < 1e-12);
        assert!(improvement_percent(1.0, 0.0).is_err());
        assert!(improvement_percent(1.0, -1.0).is_err());
    }
}
