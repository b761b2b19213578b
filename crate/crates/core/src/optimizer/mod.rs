//! Per-period, per-region maximization of the drift-plus-penalty objective.
//!
//! Once quality debts and sharing debts are fixed for a period the objective
//! separates across regions. Each region is an instance of
//!
//! ```text
//! maximize   sum_n [ delta_n * b_n(tau_n) + V * Q_n(tau_n) ] + sum_{j != i} w[j->i] * S[j->i]
//! subject to sum_{n in i} tau_n <= sum_j S[j->i]      for every recipient i
//!            sum_i S[j->i]      <= T                  for every donor j
//! ```
//!
//! with `w[j->i] = sigma[j->i] - sigma[i->j]` and only arrived clients present.

mod approx;
mod exact;
mod oracle;

use std::sync::Arc;

pub use approx::{solve_region_approx, solve_region_approx_isolated};
pub use exact::{solve_region_exact, solve_region_isolated, EXACT_MAX_OPERATORS, EXACT_MAX_PERIOD_LEN};
pub use oracle::{brute_force_oracle, brute_force_relaxed};

use crate::config::UnservedQuality;
use crate::matrix::SquareMatrix;
use crate::quality::{perceived_quality, relaxed_acceptability, QualityParams};

/// Quality and acceptability of one client at every slot count `0..=max_slots`.
///
/// Independent of debts, so the policy computes it once per client per run.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityCurve {
    quality: Vec<f64>,
    acceptable: Vec<bool>,
    relaxed: Vec<f64>,
}

impl QualityCurve {
    pub fn new(params: &QualityParams, q_min: f64, max_slots: u32) -> Self {
        let quality: Vec<f64> = (0..=max_slots)
            .map(|t| perceived_quality(f64::from(t), params))
            .collect();
        let acceptable = quality.iter().map(|&q| q >= q_min).collect();
        let relaxed = quality.iter().map(|&q| relaxed_acceptability(q, q_min)).collect();
        Self {
            quality,
            acceptable,
            relaxed,
        }
    }

    pub fn max_slots(&self) -> u32 {
        (self.quality.len() - 1) as u32
    }

    pub fn quality(&self, tau: u32) -> f64 {
        self.quality[tau as usize]
    }

    pub fn acceptable(&self, tau: u32) -> bool {
        self.acceptable[tau as usize]
    }
}

/// A client with a packet this period, as seen by the region optimizer.
#[derive(Debug, Clone)]
pub struct ArrivedClient {
    /// Global client index in the deployment.
    pub client: usize,
    /// Quality debt `delta` driving this period's decision.
    pub debt: f64,
    pub curve: Arc<QualityCurve>,
}

impl ArrivedClient {
    pub fn new(client: usize, debt: f64, curve: Arc<QualityCurve>) -> Self {
        Self { client, debt, curve }
    }
}

/// Immutable snapshot of one region's subproblem.
#[derive(Debug, Clone)]
pub struct RegionProblem {
    pub region: usize,
    pub period_len: u32,
    pub policy_weight: f64,
    pub unserved: UnservedQuality,
    /// Arrived clients grouped by operator.
    pub operators: Vec<Vec<ArrivedClient>>,
    /// Antisymmetric sharing coefficients indexed `(donor, recipient)`.
    pub weights: SquareMatrix<f64>,
}

impl RegionProblem {
    pub fn num_operators(&self) -> usize {
        self.operators.len()
    }

    /// Most slots any recipient can hold: every donor's whole budget.
    pub fn max_budget(&self) -> u32 {
        self.period_len * self.num_operators() as u32
    }

    /// `w[j->i] = sigma[j->i] - sigma[i->j]` from a sharing-debt matrix
    /// indexed `(owing operator, owed operator)`.
    pub fn sharing_weights(sigma: &SquareMatrix<f64>) -> SquareMatrix<f64> {
        let n = sigma.dim();
        let mut w = SquareMatrix::zeros(n);
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    w[(j, i)] = sigma[(j, i)] - sigma[(i, j)];
                }
            }
        }
        w
    }

    /// Unrelaxed per-client term `delta * b(tau) + V * Q(tau)`.
    pub fn client_gain(&self, c: &ArrivedClient, tau: u32) -> f64 {
        let [b, q] = self.client_parts(c, tau);
        b + q
    }

    fn client_parts(&self, c: &ArrivedClient, tau: u32) -> [f64; 2] {
        let b = if c.curve.acceptable(tau) { c.debt } else { 0.0 };
        let q = if tau == 0 && self.unserved == UnservedQuality::Zero {
            0.0
        } else {
            c.curve.quality(tau)
        };
        [b, self.policy_weight * q]
    }

    /// Relaxed per-client term with `b` replaced by `min(1, Q / q_min)`,
    /// measured from `tau = 0` so that an unserved client contributes 0.
    /// Concave in `tau`.
    pub fn relaxed_gain(&self, c: &ArrivedClient, tau: u32) -> f64 {
        let [b, q] = self.relaxed_parts(c, tau);
        b + q
    }

    fn relaxed_parts(&self, c: &ArrivedClient, tau: u32) -> [f64; 2] {
        let k = tau as usize;
        let curve = &c.curve;
        [
            c.debt * (curve.relaxed[k] - curve.relaxed[0]),
            self.policy_weight * (curve.quality[k] - curve.quality[0]),
        ]
    }

    fn gain_rows(&self, operator: usize, max_tau: u32, relaxed: bool) -> Vec<Vec<f64>> {
        self.operators[operator]
            .iter()
            .map(|c| {
                (0..=max_tau)
                    .map(|t| {
                        if relaxed {
                            self.relaxed_gain(c, t)
                        } else {
                            self.client_gain(c, t)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Per-pair terms `w[j->i] * (S[j->i] - S[i->j])` over `j < i`. Net flows
    /// are integers, so opposite gifts cancel exactly.
    fn sharing_terms(&self, share: &SquareMatrix<u32>) -> impl Iterator<Item = f64> + '_ {
        let share = share.clone();
        let n = share.dim();
        (0..n)
            .flat_map(move |j| (j + 1..n).map(move |i| (j, i)))
            .map(move |(j, i)| {
                let net = i64::from(share[(j, i)]) - i64::from(share[(i, j)]);
                self.weights[(j, i)] * net as f64
            })
    }

    /// Sums debt, quality and sharing terms separately in sorted order, so
    /// solutions that differ only by a permutation of equal terms evaluate to
    /// the same bits.
    fn evaluate(&self, sol: &RegionSolution, parts: impl Fn(&ArrivedClient, u32) -> [f64; 2]) -> f64 {
        let mut terms: Vec<f64> = self
            .operators
            .iter()
            .zip(&sol.alloc)
            .flat_map(|(cs, taus)| cs.iter().zip(taus).flat_map(|(c, &t)| parts(c, t)))
            .chain(self.sharing_terms(&sol.share))
            .collect();
        terms.sort_by(f64::total_cmp);
        terms.iter().sum()
    }

    /// Canonical evaluation of the unrelaxed objective at `sol`.
    pub fn objective(&self, sol: &RegionSolution) -> f64 {
        self.evaluate(sol, |c, t| self.client_parts(c, t))
    }

    /// Canonical evaluation of the relaxed objective at `sol`.
    pub fn relaxed_objective(&self, sol: &RegionSolution) -> f64 {
        self.evaluate(sol, |c, t| self.relaxed_parts(c, t))
    }

    /// Checks the slot bounds of `sol` against this region's constraints.
    pub fn is_feasible(&self, sol: &RegionSolution) -> bool {
        let o = self.num_operators();
        if sol.alloc.len() != o || sol.share.dim() != o {
            return false;
        }
        let t = u64::from(self.period_len);
        (0..o).all(|j| sol.share.row(j).iter().map(|&v| u64::from(v)).sum::<u64>() <= t)
            && (0..o).all(|i| {
                sol.alloc[i].len() == self.operators[i].len()
                    && sol.alloc[i].iter().map(|&v| u64::from(v)).sum::<u64>()
                        <= (0..o).map(|j| u64::from(sol.share[(j, i)])).sum::<u64>()
            })
    }
}

/// Allocation and sharing for one region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSolution {
    /// `alloc[i][n]`: slots for the `n`th arrived client of operator `i`.
    pub alloc: Vec<Vec<u32>>,
    /// `(donor, recipient)` slot counts, diagonal is self-use.
    pub share: SquareMatrix<u32>,
    pub objective_value: f64,
}

impl RegionSolution {
    pub fn cross_shared(&self) -> u64 {
        self.share.off_diagonal().map(|(_, _, &v)| u64::from(v)).sum()
    }
}

/// Best value of `sum_n gain_n(tau_n)` over allocations with `sum tau <= b`,
/// for every budget `b` up to a maximum, with the allocation recoverable.
///
/// Suffix dynamic program over clients; ties resolve to the lexicographically
/// smallest allocation.
pub(crate) struct IntraTable {
    gains: Vec<Vec<f64>>,
    /// `suffix[n][b]`: best value of clients `n..` with budget `b`.
    suffix: Vec<Vec<f64>>,
}

impl IntraTable {
    pub(crate) fn build(gains: Vec<Vec<f64>>, max_budget: u32) -> Self {
        let m = max_budget as usize;
        let count = gains.len();
        let mut suffix = vec![vec![0.0; m + 1]; count + 1];
        for n in (0..count).rev() {
            let (head, tail) = suffix.split_at_mut(n + 1);
            let (cur, next) = (&mut head[n], &tail[0]);
            let g = &gains[n];
            for b in 0..=m {
                let mut best = f64::NEG_INFINITY;
                for t in 0..=b.min(g.len() - 1) {
                    let v = g[t] + next[b - t];
                    if v > best {
                        best = v;
                    }
                }
                cur[b] = best;
            }
        }
        Self { gains, suffix }
    }

    pub(crate) fn value(&self, budget: u32) -> f64 {
        self.suffix[0][budget as usize]
    }

    pub(crate) fn allocation(&self, budget: u32) -> Vec<u32> {
        let mut b = budget as usize;
        let mut out = Vec::with_capacity(self.gains.len());
        for (n, g) in self.gains.iter().enumerate() {
            let target = self.suffix[n][b];
            let next = &self.suffix[n + 1];
            let t = (0..=b.min(g.len() - 1))
                .find(|&t| g[t] + next[b - t] == target)
                .expect("optimal choice exists");
            out.push(t as u32);
            b -= t;
        }
        out
    }
}

/// Best `sum_n [delta_n * b_n + V * Q_n]` for one operator's arrived clients
/// given `budget` slots, with the allocation achieving it.
pub fn intra_operator_value(problem: &RegionProblem, operator: usize, budget: u32) -> (f64, Vec<u32>) {
    let table = IntraTable::build(problem.gain_rows(operator, budget, false), budget);
    (table.value(budget), table.allocation(budget))
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_operator(debts: &[f64], v: f64, t: u32) -> RegionProblem {
        let curve = default_curve(t);
        RegionProblem {
            region: 0,
            period_len: t,
            policy_weight: v,
            unserved: UnservedQuality::Zero,
            operators: vec![debts
                .iter()
                .enumerate()
                .map(|(n, &d)| ArrivedClient::new(n, d, curve.clone()))
                .collect()],
            weights: SquareMatrix::zeros(1),
        }
    }

    #[test]
    fn empty_budget() {
        let p = single_operator(&[1.0, 2.0], 1.0, 4);
        assert_eq!(intra_operator_value(&p, 0, 0), (0.0, vec![0, 0]));
    }

    #[test]
    fn unserved_zero_concentrates_two_slots() {
        // Q(2) = 1.2645 beats 2 * Q(1) = 1.0137 when the unserved client scores 0
        let p = single_operator(&[0.0, 0.0], 1.0, 2);
        let (value, alloc) = intra_operator_value(&p, 0, 2);
        assert_eq!(alloc, vec![0, 2]);
        assert_eq!(value, p.operators[0][1].curve.quality(2));
    }

    #[test]
    fn spreads_when_log_model_counts_unserved() {
        let mut p = single_operator(&[0.0, 0.0], 1.0, 2);
        p.unserved = UnservedQuality::LogModel;
        let (_, alloc) = intra_operator_value(&p, 0, 2);
        assert_eq!(alloc, vec![1, 1]);
    }

    fn enumerate(p: &RegionProblem, budget: u32) -> f64 {
        let cs = &p.operators[0];
        let mut best = f64::NEG_INFINITY;
        let mut taus = vec![0u32; cs.len()];
        loop {
            if taus.iter().sum::<u32>() <= budget {
                let v: f64 = cs.iter().zip(&taus).map(|(c, &t)| p.client_gain(c, t)).sum();
                best = best.max(v);
            }
            let mut k = 0;
            loop {
                if k == taus.len() {
                    return best;
                }
                taus[k] += 1;
                if taus[k] <= budget {
                    break;
                }
                taus[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn dp_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let mut p = random_problem(&mut rng, 1, 3, 4);
            p.weights = SquareMatrix::zeros(1);
            let t = p.period_len;
            let (value, alloc) = intra_operator_value(&p, 0, t);
            let brute = enumerate(&p, t);
            assert!((value - brute).abs() <= 1e-9 * brute.abs().max(1.0), "{value} vs {brute}");
            let realized: f64 = p.operators[0].iter().zip(&alloc).map(|(c, &t)| p.client_gain(c, t)).sum();
            assert!((realized - value).abs() <= 1e-9 * value.abs().max(1.0));
        }
    }

    #[test]
    fn weights_are_antisymmetric() {
        let sigma = SquareMatrix::from_rows(vec![vec![0.0, 2.0, 1.0], vec![0.5, 0.0, 3.0], vec![4.0, 0.0, 0.0]]).unwrap();
        let w = RegionProblem::sharing_weights(&sigma);
        for j in 0..3 {
            assert_eq!(w[(j, j)], 0.0);
            for i in 0..3 {
                assert_eq!(w[(j, i)], -w[(i, j)]);
            }
        }
        assert_eq!(w[(0, 1)], 1.5);
    }

    #[test]
    fn relaxed_gain_is_concave() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = random_problem(&mut rng, 2, 3, 8);
            for c in p.operators.iter().flatten() {
                let max = c.curve.max_slots();
                for t in 1..max {
                    let d1 = p.relaxed_gain(c, t) - p.relaxed_gain(c, t - 1);
                    let d2 = p.relaxed_gain(c, t + 1) - p.relaxed_gain(c, t);
                    assert!(d2 <= d1 + 1e-12);
                }
            }
        }
    }
}
