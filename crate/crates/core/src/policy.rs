//! The online sharing policy: per-period solve across regions followed by
//! the virtual-queue (debt) updates.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::config::{DebtIncrement, Deployment, PolicyMode, UnservedQuality};
use crate::decision::PeriodDecision;
use crate::error::OptimizerError;
use crate::matrix::SquareMatrix;
use crate::optimizer::{
    solve_region_approx, solve_region_exact, solve_region_isolated, ArrivedClient, QualityCurve, RegionProblem,
    RegionSolution,
};

/// Quality debts per client and sharing debts per ordered operator pair.
///
/// `sharing[(i, j)]` is `sigma[i->j]`: how far operator `i` has net-received
/// from `j` beyond the allowance.
#[derive(Debug, Clone, PartialEq)]
pub struct DebtState {
    pub quality: Vec<f64>,
    pub sharing: SquareMatrix<f64>,
}

impl DebtState {
    pub fn zeros(num_clients: usize, num_operators: usize) -> Self {
        Self {
            quality: vec![0.0; num_clients],
            sharing: SquareMatrix::zeros(num_operators),
        }
    }

    pub fn max_quality(&self) -> f64 {
        self.quality.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_sharing(&self) -> f64 {
        self.sharing.iter().map(|(_, _, &v)| v).fold(0.0, f64::max)
    }

    pub fn max_entry(&self) -> f64 {
        self.max_quality().max(self.max_sharing())
    }
}

/// `delta' = max(delta + q - b, 0)` for clients with an arrival; others keep
/// their debt. `increments[n]` is the `q` added per arrival.
pub fn update_quality_debts(debts: &mut [f64], arrivals: &[bool], accept: &[bool], increments: &[f64]) {
    for (((d, &a), &b), &q) in debts.iter_mut().zip(arrivals).zip(accept).zip(increments) {
        if a {
            let served = if b { 1.0 } else { 0.0 };
            *d = (*d + q - served).max(0.0);
        }
    }
}

/// `delta' = max(delta + q - b, 0)` in every period, with `b = 0` when no
/// packet arrived.
pub fn update_quality_debts_every_period(debts: &mut [f64], accept: &[bool], increments: &[f64]) {
    for ((d, &b), &q) in debts.iter_mut().zip(accept).zip(increments) {
        let served = if b { 1.0 } else { 0.0 };
        *d = (*d + q - served).max(0.0);
    }
}

/// `sigma'[i->j] = max(sigma[i->j] + S[j->i] - S[i->j] - zeta[i,j], 0)` with
/// `totals[(j, i)]` the slots `j` gave `i` this period over all regions.
pub fn update_sharing_debts(sigma: &mut SquareMatrix<f64>, totals: &SquareMatrix<u64>, bound: &SquareMatrix<f64>) {
    let n = sigma.dim();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let net = totals[(j, i)] as f64 - totals[(i, j)] as f64;
                sigma[(i, j)] = (sigma[(i, j)] + net - bound[(i, j)]).max(0.0);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    pub debts: DebtState,
    pub mode: PolicyMode,
    /// Debts of the last `d` periods, oldest first; empty unless delayed.
    pub delay_buffer: VecDeque<DebtState>,
    pub period: usize,
}

/// Per-run policy data that does not change between periods.
pub struct Policy<'a> {
    deployment: &'a Deployment,
    curves: Vec<Arc<QualityCurve>>,
    increments: Vec<f64>,
}

impl<'a> Policy<'a> {
    pub fn new(deployment: &'a Deployment) -> Self {
        let cfg = &deployment.config;
        let max_slots = cfg.period_len * cfg.num_operators as u32;
        let curves = (0..deployment.clients.len())
            .map(|n| Arc::new(QualityCurve::new(&deployment.quality_params(n), cfg.q_min, max_slots)))
            .collect();
        Self {
            deployment,
            curves,
            increments: deployment.debt_increments(),
        }
    }

    pub fn deployment(&self) -> &Deployment {
        self.deployment
    }

    pub fn initial_state(&self) -> PolicyState {
        let cfg = &self.deployment.config;
        let zero = DebtState::zeros(self.deployment.clients.len(), cfg.num_operators);
        let depth = match cfg.policy_mode {
            PolicyMode::SharingDelayed(d) => d,
            _ => 0,
        };
        PolicyState {
            debts: zero.clone(),
            mode: cfg.policy_mode,
            delay_buffer: std::iter::repeat_n(zero, depth).collect(),
            period: 0,
        }
    }

    /// The subproblem of region `region` under the given debts.
    pub fn region_problem(&self, region: usize, debts: &DebtState, arrivals: &[bool]) -> RegionProblem {
        let d = self.deployment;
        let cfg = &d.config;
        let operators = (0..cfg.num_operators)
            .map(|i| {
                d.members(i, region)
                    .iter()
                    .filter(|&&n| arrivals[n])
                    .map(|&n| ArrivedClient::new(n, debts.quality[n], self.curves[n].clone()))
                    .collect()
            })
            .collect();
        RegionProblem {
            region,
            period_len: cfg.period_len,
            policy_weight: cfg.policy_weight,
            unserved: cfg.unserved_quality,
            operators,
            weights: RegionProblem::sharing_weights(&debts.sharing),
        }
    }

    fn solve(&self, mode: PolicyMode, problem: &RegionProblem) -> Result<RegionSolution, OptimizerError> {
        match mode {
            PolicyMode::Sharing | PolicyMode::SharingDelayed(_) => solve_region_exact(problem),
            PolicyMode::SharingApprox => Ok(solve_region_approx(problem)),
            PolicyMode::NoSharing => Ok(solve_region_isolated(problem)),
        }
    }

    /// Runs one period: solve every region, realize acceptability and
    /// quality, then update quality debts followed by sharing debts.
    pub fn step(&self, state: &mut PolicyState, arrivals: &[bool]) -> Result<PeriodDecision, OptimizerError> {
        let d = self.deployment;
        let cfg = &d.config;
        let mut decision = PeriodDecision::empty(d.clients.len(), cfg.num_operators, cfg.num_regions);
        {
            let driving = state.delay_buffer.front().unwrap_or(&state.debts);
            for r in 0..cfg.num_regions {
                let problem = self.region_problem(r, driving, arrivals);
                let sol = self.solve(state.mode, &problem)?;
                for (clients, taus) in problem.operators.iter().zip(&sol.alloc) {
                    for (c, &tau) in clients.iter().zip(taus) {
                        decision.alloc[c.client] = tau;
                    }
                }
                decision.share[r] = sol.share;
            }
        }
        for n in 0..d.clients.len() {
            if !arrivals[n] {
                continue;
            }
            let tau = decision.alloc[n];
            let curve = &self.curves[n];
            decision.accept[n] = curve.acceptable(tau);
            decision.quality[n] = if tau == 0 && cfg.unserved_quality == UnservedQuality::Zero {
                0.0
            } else {
                curve.quality(tau)
            };
        }

        if !state.delay_buffer.is_empty() {
            state.delay_buffer.pop_front();
            state.delay_buffer.push_back(state.debts.clone());
        }
        if cfg.debt_increment == DebtIncrement::EveryPeriod {
            update_quality_debts_every_period(&mut state.debts.quality, &decision.accept, &self.increments);
        } else {
            update_quality_debts(&mut state.debts.quality, arrivals, &decision.accept, &self.increments);
        }
        update_sharing_debts(&mut state.debts.sharing, &decision.share_totals(), &cfg.sharing_bound);
        state.period += 1;
        Ok(decision)
    }
}
