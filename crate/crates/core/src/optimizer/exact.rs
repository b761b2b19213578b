use crate::error::OptimizerError;
use crate::matrix::SquareMatrix;

use super::{IntraTable, RegionProblem, RegionSolution};

pub const EXACT_MAX_OPERATORS: usize = 4;
pub const EXACT_MAX_PERIOD_LEN: u32 = 64;
/// Cap on sharing configurations visited per region.
const MAX_CONFIGURATIONS: f64 = 5e6;

/// Every vector of cross-operator gifts from `donor` summing to at most `t`,
/// in lexicographic order. The donor's own entry stays 0.
fn gift_vectors(ops: usize, donor: usize, t: u32) -> Vec<Vec<u32>> {
    fn rec(pos: usize, ops: usize, donor: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == ops {
            out.push(cur.clone());
            return;
        }
        if pos == donor {
            rec(pos + 1, ops, donor, left, cur, out);
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(pos + 1, ops, donor, left - v, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    rec(0, ops, donor, t, &mut vec![0; ops], &mut out);
    out
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_size(problem: &RegionProblem) -> Result<(), OptimizerError> {
    let o = problem.num_operators();
    let t = problem.period_len;
    if o > EXACT_MAX_OPERATORS {
        return Err(OptimizerError::TooLarge(format!(
            "{o} operators, exact search handles at most {EXACT_MAX_OPERATORS}"
        )));
    }
    if t > EXACT_MAX_PERIOD_LEN {
        return Err(OptimizerError::TooLarge(format!(
            "period of {t} slots, exact search handles at most {EXACT_MAX_PERIOD_LEN}"
        )));
    }
    let per_donor = binomial(u64::from(t) + o as u64 - 1, o as u64 - 1);
    let total = per_donor.powi(o as i32);
    if total > MAX_CONFIGURATIONS {
        return Err(OptimizerError::TooLarge(format!(
            "{total:.0} sharing configurations exceed the search budget"
        )));
    }
    Ok(())
}

/// Exact maximizer of the region objective.
///
/// Every operator's best allocation as a function of its received slots is
/// tabulated once; the search then visits every vector of cross-operator
/// gifts with each donor keeping the rest of its budget. Keeping unused slots
/// never hurts because per-client gains are non-decreasing in `tau`.
pub fn solve_region_exact(problem: &RegionProblem) -> Result<RegionSolution, OptimizerError> {
    check_size(problem)?;
    let o = problem.num_operators();
    let t = problem.period_len;
    let budget = problem.max_budget();
    let tables: Vec<IntraTable> = (0..o)
        .map(|i| IntraTable::build(problem.gain_rows(i, budget, false), budget))
        .collect();
    let options: Vec<Vec<Vec<u32>>> = (0..o).map(|j| gift_vectors(o, j, t)).collect();
    // sharing payoff per donor option, independent of the other donors
    let payoffs: Vec<Vec<f64>> = options
        .iter()
        .enumerate()
        .map(|(j, opts)| {
            opts.iter()
                .map(|g| {
                    g.iter()
                        .enumerate()
                        .fold(0.0, |acc, (i, &s)| acc + problem.weights[(j, i)] * f64::from(s))
                })
                .collect()
        })
        .collect();

    let mut choice = vec![0usize; o];
    let mut best_choice = choice.clone();
    let mut best = f64::NEG_INFINITY;
    let mut received = vec![0u32; o];
    loop {
        received.iter_mut().for_each(|r| *r = 0);
        let mut sharing = 0.0;
        for j in 0..o {
            let g = &options[j][choice[j]];
            let kept = t - g.iter().sum::<u32>();
            received[j] += kept;
            for (i, &s) in g.iter().enumerate() {
                received[i] += s;
            }
            sharing += payoffs[j][choice[j]];
        }
        let value = tables
            .iter()
            .zip(&received)
            .fold(0.0, |acc, (tab, &m)| acc + tab.value(m))
            + sharing;
        if value > best {
            best = value;
            best_choice.copy_from_slice(&choice);
        }
        // odometer over donors, last donor fastest
        let mut k = o;
        loop {
            if k == 0 {
                return Ok(assemble(problem, &tables, &options, &best_choice));
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < options[k].len() {
                break;
            }
            choice[k] = 0;
        }
    }
}

fn assemble(
    problem: &RegionProblem,
    tables: &[IntraTable],
    options: &[Vec<Vec<u32>>],
    choice: &[usize],
) -> RegionSolution {
    let o = problem.num_operators();
    let t = problem.period_len;
    let mut share = SquareMatrix::zeros(o);
    for j in 0..o {
        let g = &options[j][choice[j]];
        for (i, &s) in g.iter().enumerate() {
            share[(j, i)] = s;
        }
        share[(j, j)] = t - g.iter().sum::<u32>();
    }
    let alloc = (0..o)
        .map(|i| {
            let m: u32 = (0..o).map(|j| share[(j, i)]).sum();
            tables[i].allocation(m)
        })
        .collect();
    let mut sol = RegionSolution {
        alloc,
        share,
        objective_value: 0.0,
    };
    sol.objective_value = problem.objective(&sol);
    sol
}

/// Exact maximizer with sharing disabled: each operator keeps its `T` slots.
pub fn solve_region_isolated(problem: &RegionProblem) -> RegionSolution {
    let o = problem.num_operators();
    let t = problem.period_len;
    let mut share = SquareMatrix::zeros(o);
    let alloc = (0..o)
        .map(|i| {
            share[(i, i)] = t;
            IntraTable::build(problem.gain_rows(i, t, false), t).allocation(t)
        })
        .collect();
    let mut sol = RegionSolution {
        alloc,
        share,
        objective_value: 0.0,
    };
    sol.objective_value = problem.objective(&sol);
    sol
}

#[cfg(test)]
mod tests {
    use super::super::test_support::random_problem;
    use super::*;
    use crate::optimizer::brute_force_oracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gift_vector_counts() {
        assert_eq!(gift_vectors(2, 0, 3).len(), 4);
        assert_eq!(gift_vectors(3, 1, 2).len(), 6);
        assert!(gift_vectors(3, 1, 2).iter().all(|g| g[1] == 0));
    }

    #[test]
    fn matches_oracle_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let p = random_problem(&mut rng, 2, 3, 4);
            let exact = solve_region_exact(&p).unwrap();
            let oracle = brute_force_oracle(&p).unwrap();
            assert!(p.is_feasible(&exact));
            assert_eq!(exact.objective_value, oracle.objective_value);
        }
    }

    #[test]
    fn rejects_oversized_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = random_problem(&mut rng, 2, 1, 4);
        p.period_len = 65;
        assert!(matches!(solve_region_exact(&p), Err(OptimizerError::TooLarge(_))));
        let p = random_problem(&mut rng, 5, 1, 4);
        assert!(solve_region_exact(&p).is_err());
    }

    #[test]
    fn isolated_keeps_own_slots() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let p = random_problem(&mut rng, 3, 3, 6);
            let sol = solve_region_isolated(&p);
            assert_eq!(sol.cross_shared(), 0);
            assert!(p.is_feasible(&sol));
        }
    }
}
