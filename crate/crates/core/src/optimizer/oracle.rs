//! Exhaustive reference solver for tiny region instances.
//!
//! Shares no code with the production solvers beyond the canonical objective
//! evaluation: every sharing matrix and every allocation vector is visited.

use std::collections::HashMap;

use crate::error::OptimizerError;
use crate::matrix::SquareMatrix;

use super::{ArrivedClient, RegionProblem, RegionSolution};

pub const ORACLE_MAX_OPERATORS: usize = 3;
pub const ORACLE_MAX_CLIENTS: usize = 3;
pub const ORACLE_MAX_PERIOD_LEN: u32 = 4;

/// Exhaustive maximizer of the unrelaxed objective.
pub fn brute_force_oracle(problem: &RegionProblem) -> Result<RegionSolution, OptimizerError> {
    search(problem, |c, t| problem.client_gain(c, t), |s| problem.objective(s))
}

/// Exhaustive maximizer of the relaxed objective.
pub fn brute_force_relaxed(problem: &RegionProblem) -> Result<RegionSolution, OptimizerError> {
    search(problem, |c, t| problem.relaxed_gain(c, t), |s| problem.relaxed_objective(s))
}

/// All vectors of `len` non-negative integers with sum at most `cap`.
fn bounded_vectors(len: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; len];
    loop {
        if cur.iter().sum::<u32>() <= cap {
            out.push(cur.clone());
        }
        let mut k = 0;
        loop {
            if k == len {
                return out;
            }
            cur[k] += 1;
            if cur[k] <= cap {
                break;
            }
            cur[k] = 0;
            k += 1;
        }
    }
}

fn search(
    problem: &RegionProblem,
    gain: impl Fn(&ArrivedClient, u32) -> f64,
    evaluate: impl Fn(&RegionSolution) -> f64,
) -> Result<RegionSolution, OptimizerError> {
    let o = problem.num_operators();
    let t = problem.period_len;
    if o > ORACLE_MAX_OPERATORS
        || t > ORACLE_MAX_PERIOD_LEN
        || problem.operators.iter().any(|cs| cs.len() > ORACLE_MAX_CLIENTS)
    {
        return Err(OptimizerError::TooLarge(format!(
            "oracle handles at most {ORACLE_MAX_OPERATORS} operators, {ORACLE_MAX_CLIENTS} clients each, T <= {ORACLE_MAX_PERIOD_LEN}"
        )));
    }

    // best allocation for (operator, received slots), by full enumeration
    let mut cache: HashMap<(usize, u32), (f64, Vec<u32>)> = HashMap::new();
    let mut best_for = |i: usize, m: u32| -> (f64, Vec<u32>) {
        cache
            .entry((i, m))
            .or_insert_with(|| {
                let cs = &problem.operators[i];
                let mut best = (f64::NEG_INFINITY, vec![0; cs.len()]);
                for taus in bounded_vectors(cs.len(), m) {
                    let v = cs.iter().zip(&taus).fold(0.0, |acc, (c, &tau)| acc + gain(c, tau));
                    if v > best.0 {
                        best = (v, taus);
                    }
                }
                best
            })
            .clone()
    };

    let rows = bounded_vectors(o, t);
    let mut choice = vec![0usize; o];
    let mut best: Option<(f64, SquareMatrix<u32>)> = None;
    loop {
        let mut share = SquareMatrix::zeros(o);
        for j in 0..o {
            for i in 0..o {
                share[(j, i)] = rows[choice[j]][i];
            }
        }
        let mut value = 0.0;
        for i in 0..o {
            let m = (0..o).map(|j| share[(j, i)]).sum();
            value += best_for(i, m).0;
        }
        for (j, i, &s) in share.off_diagonal() {
            value += problem.weights[(j, i)] * f64::from(s);
        }
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, share));
        }
        let mut k = 0;
        loop {
            if k == o {
                let (_, share) = best.expect("at least one configuration");
                let alloc = (0..o)
                    .map(|i| best_for(i, (0..o).map(|j| share[(j, i)]).sum()).1)
                    .collect();
                let mut sol = RegionSolution {
                    alloc,
                    share,
                    objective_value: 0.0,
                };
                sol.objective_value = evaluate(&sol);
                return Ok(sol);
            }
            choice[k] += 1;
            if choice[k] < rows.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}
