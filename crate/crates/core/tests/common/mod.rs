#![allow(dead_code)]

use std::sync::Arc;

use qoeshare::config::{Deployment, SystemConfig, UnservedQuality};
use qoeshare::harness::{Family, ScenarioSpec, SweepPoint};
use qoeshare::matrix::SquareMatrix;
use qoeshare::optimizer::{ArrivedClient, QualityCurve, RegionProblem};
use qoeshare::quality::QualityParams;
use rand::Rng;

/// Tiny region instance: `ops` operators with up to `max_clients` arrived
/// clients each, `T <= max_t`, debts and sigmas uniform in [0, 3],
/// `V` drawn from {0.1, 1, 10}.
pub fn random_problem<R: Rng>(rng: &mut R, ops: usize, max_clients: usize, max_t: u32) -> RegionProblem {
    let t = rng.random_range(1..=max_t);
    let v = [0.1, 1.0, 10.0][rng.random_range(0..3)];
    let max_slots = t * ops as u32;
    let mut next = 0;
    let operators = (0..ops)
        .map(|_| {
            let n = rng.random_range(0..=max_clients);
            (0..n)
                .map(|_| {
                    let cap = [6e6, 10e6, 20e6][rng.random_range(0..3)];
                    let gamma = [0.6, 0.8, 1.2][rng.random_range(0..3)];
                    let params = QualityParams::h264(cap, 20).with_scale(gamma);
                    next += 1;
                    ArrivedClient::new(
                        next - 1,
                        rng.random_range(0.0..3.0),
                        Arc::new(QualityCurve::new(&params, 0.3, max_slots)),
                    )
                })
                .collect()
        })
        .collect();
    let mut sigma = SquareMatrix::zeros(ops);
    for j in 0..ops {
        for i in 0..ops {
            if i != j {
                sigma[(j, i)] = rng.random_range(0.0..3.0);
            }
        }
    }
    RegionProblem {
        region: 0,
        period_len: t,
        policy_weight: v,
        unserved: UnservedQuality::Zero,
        operators,
        weights: RegionProblem::sharing_weights(&sigma),
    }
}

/// Two operators, two regions, 30 clients per group, rates `0.95 * beta1`
/// and `0.95 * (1 - beta1)`, horizon `k`.
pub fn two_by_two(beta1: f64, k: usize, seed: u64) -> Deployment {
    let spec = ScenarioSpec::new(Family::ArrivalImbalance);
    let mut base = SystemConfig::new(2, 2);
    base.horizon = k;
    base.master_seed = seed;
    let point = SweepPoint {
        index: 0,
        param: beta1,
        x: 0.0,
    };
    spec.deployment(&base, &point).expect("valid deployment")
}
