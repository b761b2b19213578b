use crate::matrix::SquareMatrix;

use super::{RegionProblem, RegionSolution};

#[derive(Clone, Copy)]
struct Move {
    gain: f64,
    donor: usize,
    recipient: usize,
    /// `None` hands the slot over without assigning it to a client.
    client: Option<usize>,
}

/// Greedy maximizer of the relaxed region objective.
///
/// Slots are placed one at a time on the `(donor, recipient, client)` move
/// with the largest marginal relaxed gain plus sharing coefficient. Handing a
/// slot across operators without using it is also a move, worth `w[j->i]`.
/// Stops when no move gains. Leftover slots stay with their owner.
///
/// The reported objective is the relaxed one.
pub fn solve_region_approx(problem: &RegionProblem) -> RegionSolution {
    greedy(problem, true)
}

/// Greedy maximizer of the relaxed objective with sharing disabled.
pub fn solve_region_approx_isolated(problem: &RegionProblem) -> RegionSolution {
    greedy(problem, false)
}

fn greedy(problem: &RegionProblem, sharing: bool) -> RegionSolution {
    let o = problem.num_operators();
    let max_tau = problem.max_budget();
    let gains: Vec<Vec<Vec<f64>>> = (0..o).map(|i| problem.gain_rows(i, max_tau, true)).collect();
    let mut alloc: Vec<Vec<u32>> = problem.operators.iter().map(|cs| vec![0; cs.len()]).collect();
    let mut share = SquareMatrix::zeros(o);
    let mut remaining = vec![problem.period_len; o];

    loop {
        let mut best: Option<Move> = None;
        let mut consider = |m: Move| {
            if best.is_none_or(|b| m.gain > b.gain) {
                best = Some(m);
            }
        };
        for donor in 0..o {
            if remaining[donor] == 0 {
                continue;
            }
            for recipient in 0..o {
                if !sharing && recipient != donor {
                    continue;
                }
                let w = problem.weights[(donor, recipient)];
                for (n, g) in gains[recipient].iter().enumerate() {
                    let t = alloc[recipient][n] as usize;
                    consider(Move {
                        gain: g[t + 1] - g[t] + w,
                        donor,
                        recipient,
                        client: Some(n),
                    });
                }
                if recipient != donor {
                    consider(Move {
                        gain: w,
                        donor,
                        recipient,
                        client: None,
                    });
                }
            }
        }
        match best {
            Some(m) if m.gain > 0.0 => {
                remaining[m.donor] -= 1;
                share[(m.donor, m.recipient)] += 1;
                if let Some(n) = m.client {
                    alloc[m.recipient][n] += 1;
                }
            }
            _ => break,
        }
    }
    for (j, &left) in remaining.iter().enumerate() {
        share[(j, j)] += left;
    }
    let mut sol = RegionSolution {
        alloc,
        share,
        objective_value: 0.0,
    };
    sol.objective_value = problem.relaxed_objective(&sol);
    sol
}

#[cfg(test)]
mod tests {
    use super::super::test_support::random_problem;
    use super::*;
    use crate::optimizer::brute_force_relaxed;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_relaxed_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let p = random_problem(&mut rng, 2, 3, 4);
            let greedy = solve_region_approx(&p);
            let brute = brute_force_relaxed(&p).unwrap();
            assert!(p.is_feasible(&greedy));
            let tol = 1e-9 * brute.objective_value.abs().max(1.0);
            assert!(
                (greedy.objective_value - brute.objective_value).abs() <= tol,
                "{} vs {}",
                greedy.objective_value,
                brute.objective_value
            );
        }
    }

    #[test]
    fn isolated_never_shares() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let p = random_problem(&mut rng, 3, 3, 5);
            let sol = solve_region_approx_isolated(&p);
            assert_eq!(sol.cross_shared(), 0);
            assert!(p.is_feasible(&sol));
        }
    }
}
