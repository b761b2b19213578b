use std::fmt;

use crate::config::Deployment;
use crate::error::DecisionError;
use crate::matrix::SquareMatrix;

/// Everything the policy decides and realizes in one period.
///
/// `share[r][(j, i)]` is the number of operator `j`'s slots used by operator
/// `i` in region `r`; the diagonal is self-use. Slot counts are unsigned, so
/// sharing is non-negative by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodDecision {
    pub alloc: Vec<u32>,
    pub share: Vec<SquareMatrix<u32>>,
    pub accept: Vec<bool>,
    pub quality: Vec<f64>,
}

impl PeriodDecision {
    pub fn empty(num_clients: usize, num_operators: usize, num_regions: usize) -> Self {
        Self {
            alloc: vec![0; num_clients],
            share: vec![SquareMatrix::zeros(num_operators); num_regions],
            accept: vec![false; num_clients],
            quality: vec![0.0; num_clients],
        }
    }

    /// Cross-operator slots summed over regions: `(j, i)` holds `sum_r S[j->i]_r`.
    pub fn share_totals(&self) -> SquareMatrix<u64> {
        let n = self.share.first().map_or(0, |m| m.dim());
        let mut total = SquareMatrix::zeros(n);
        for region in &self.share {
            for (j, i, &v) in region.iter() {
                total[(j, i)] += u64::from(v);
            }
        }
        total
    }

    /// Slots lent across operators this period, over all regions.
    pub fn cross_shared(&self) -> u64 {
        self.share
            .iter()
            .flat_map(|m| m.off_diagonal().map(|(_, _, &v)| u64::from(v)))
            .sum()
    }
}

/// A per-period constraint that a decision breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Slots were given to a client without a packet this period.
    ArrivalGating {
        client: usize,
        operator: usize,
        region: usize,
        slots: u32,
    },
    /// An operator allotted more slots to its clients than it holds in the region.
    AllocationBound {
        region: usize,
        operator: usize,
        allocated: u64,
        available: u64,
    },
    /// A donor handed out more than `T` slots in a region.
    DonorBudget {
        region: usize,
        donor: usize,
        shared: u64,
        budget: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ArrivalGating {
                client,
                operator,
                region,
                slots,
            } => write!(
                f,
                "arrival gating: client {client} (operator {operator}, region {region}) got {slots} slots without an arrival"
            ),
            Violation::AllocationBound {
                region,
                operator,
                allocated,
                available,
            } => write!(
                f,
                "allocation bound: operator {operator} in region {region} allotted {allocated} of {available} available slots"
            ),
            Violation::DonorBudget {
                region,
                donor,
                shared,
                budget,
            } => write!(
                f,
                "donor budget: operator {donor} in region {region} gave out {shared} slots, budget {budget}"
            ),
        }
    }
}

/// Lists every per-period constraint the decision breaks; empty means feasible.
pub fn validate_decision(
    decision: &PeriodDecision,
    arrivals: &[bool],
    deployment: &Deployment,
) -> Result<Vec<Violation>, DecisionError> {
    let cfg = &deployment.config;
    let n = deployment.clients.len();
    if decision.alloc.len() != n || arrivals.len() != n {
        return Err(DecisionError::Dimension(format!(
            "{} allocations and {} arrivals for {n} clients",
            decision.alloc.len(),
            arrivals.len()
        )));
    }
    if decision.share.len() != cfg.num_regions {
        return Err(DecisionError::Dimension(format!(
            "{} sharing matrices for {} regions",
            decision.share.len(),
            cfg.num_regions
        )));
    }
    if let Some(m) = decision.share.iter().find(|m| m.dim() != cfg.num_operators) {
        return Err(DecisionError::Dimension(format!(
            "{0}x{0} sharing matrix for {1} operators",
            m.dim(),
            cfg.num_operators
        )));
    }

    let mut out = Vec::new();
    for (idx, c) in deployment.clients.iter().enumerate() {
        if decision.alloc[idx] > 0 && !arrivals[idx] {
            out.push(Violation::ArrivalGating {
                client: idx,
                operator: c.operator,
                region: c.region,
                slots: decision.alloc[idx],
            });
        }
    }
    for (r, share) in decision.share.iter().enumerate() {
        for i in 0..cfg.num_operators {
            let allocated: u64 = deployment
                .members(i, r)
                .iter()
                .map(|&idx| u64::from(decision.alloc[idx]))
                .sum();
            let available: u64 = (0..cfg.num_operators).map(|j| u64::from(share[(j, i)])).sum();
            if allocated > available {
                out.push(Violation::AllocationBound {
                    region: r,
                    operator: i,
                    allocated,
                    available,
                });
            }
        }
        for j in 0..cfg.num_operators {
            let shared: u64 = share.row(j).iter().map(|&v| u64::from(v)).sum();
            if shared > u64::from(cfg.period_len) {
                out.push(Violation::DonorBudget {
                    region: r,
                    donor: j,
                    shared,
                    budget: cfg.period_len,
                });
            }
        }
    }
    Ok(out)
}
