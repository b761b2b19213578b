//! Runs the policy over a whole arrival trace and fills a ledger.

use crate::arrivals::ArrivalTrace;
use crate::config::Deployment;
use crate::decision::PeriodDecision;
use crate::error::{DecisionError, SimError};
use crate::metrics::MetricsLedger;
use crate::policy::{Policy, PolicyState};
use crate::quality::{marginal_quality, QualityParams};

/// Sees every period after the policy has stepped.
pub trait PeriodObserver {
    fn observe(&mut self, period: usize, arrivals: &[bool], decision: &PeriodDecision, state: &PolicyState);
}

impl<F: FnMut(usize, &[bool], &PeriodDecision, &PolicyState)> PeriodObserver for F {
    fn observe(&mut self, period: usize, arrivals: &[bool], decision: &PeriodDecision, state: &PolicyState) {
        self(period, arrivals, decision, state)
    }
}

/// Simulates `deployment` under its configured mode on a given trace.
pub fn simulate(deployment: &Deployment, trace: &ArrivalTrace) -> Result<MetricsLedger, SimError> {
    simulate_observed(deployment, trace, &mut |_: usize, _: &[bool], _: &PeriodDecision, _: &PolicyState| {})
}

pub fn simulate_observed(
    deployment: &Deployment,
    trace: &ArrivalTrace,
    observer: &mut dyn PeriodObserver,
) -> Result<MetricsLedger, SimError> {
    if trace.num_clients() != deployment.clients.len() {
        return Err(DecisionError::Dimension(format!(
            "trace has {} clients, deployment {}",
            trace.num_clients(),
            deployment.clients.len()
        ))
        .into());
    }
    let policy = Policy::new(deployment);
    let mut state = policy.initial_state();
    let mut ledger = MetricsLedger::for_deployment(deployment);
    let params: Vec<QualityParams> = (0..deployment.clients.len()).map(|n| deployment.quality_params(n)).collect();
    let mut marginal = vec![0.0; params.len()];
    let interval = deployment.config.debt_sample_interval.max(1);
    for k in 0..trace.periods() {
        if k % interval == 0 {
            ledger.sample_debts(k, &state.debts);
        }
        let arrivals = trace.period(k);
        let decision = policy.step(&mut state, arrivals)?;
        for (n, m) in marginal.iter_mut().enumerate() {
            if decision.alloc[n] > 0 {
                *m = marginal_quality(f64::from(decision.alloc[n]), &params[n]);
            }
        }
        ledger.record(arrivals, &decision, &marginal);
        observer.observe(k, arrivals, &decision, &state);
    }
    ledger.sample_debts(trace.periods(), &state.debts);
    ledger.final_debts = state.debts;
    Ok(ledger)
}

/// Generates the trace from the configured master seed and simulates.
pub fn run_deployment(deployment: &Deployment) -> Result<MetricsLedger, SimError> {
    let trace = ArrivalTrace::generate(deployment, deployment.config.master_seed)?;
    simulate(deployment, &trace)
}
