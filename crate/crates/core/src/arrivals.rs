//! Packet-arrival indicator streams.
//!
//! Every client owns an independent ChaCha8 stream whose seed is derived from
//! the master seed and the client's `(operator, region, client)` coordinates
//! with [`client_stream_seed`]. Adding or removing clients therefore never
//! perturbs the arrivals of the others, and two policies run on the same
//! seed see identical traffic.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::{ArrivalProcess, Deployment};
use crate::error::{ParamError, TraceError};

const ARRIVAL_DOMAIN: u64 = 0x6172_7269_7661_6c73; // "arrivals"

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `parent` and a key.
pub fn split_seed(parent: u64, key: u64) -> u64 {
    splitmix64(parent ^ splitmix64(key))
}

/// `split(split(split(split(master, "arrivals"), operator), region), client)`.
pub fn client_stream_seed(master: u64, operator: usize, region: usize, client: usize) -> u64 {
    [operator, region, client]
        .into_iter()
        .fold(split_seed(master, ARRIVAL_DOMAIN), |s, k| split_seed(s, k as u64))
}

/// Per-client generator state: the random stream and the latent value of the
/// correlated process.
#[derive(Debug, Clone)]
pub struct ArrivalState {
    rng: ChaCha8Rng,
    latent: f64,
}

impl ArrivalState {
    /// Seeds the stream and draws the latent from its stationary N(0, 1) law.
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let latent = rng.sample(StandardNormal);
        Self { rng, latent }
    }

    pub fn latent(&self) -> f64 {
        self.latent
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

fn check_rate(rate: f64) -> Result<(), ParamError> {
    if (0.0..=1.0).contains(&rate) {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            name: "arrival rate",
            value: rate,
            domain: "[0, 1]",
        })
    }
}

pub fn sample_bernoulli<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<bool, ParamError> {
    check_rate(rate)?;
    Ok(rng.random::<f64>() < rate)
}

/// Latent level above which a standard normal exceeds with probability `rate`.
pub fn latent_threshold(rate: f64) -> Result<f64, ParamError> {
    check_rate(rate)?;
    Ok(if rate == 0.0 {
        f64::INFINITY
    } else if rate == 1.0 {
        f64::NEG_INFINITY
    } else {
        Normal::standard().inverse_cdf(1.0 - rate)
    })
}

/// Advances the latent AR(1) recursion `x' = corr * x + sqrt(1 - corr^2) * e`
/// with standard normal `e` and reports whether `x'` clears the threshold
/// for `rate`. The marginal of `x` stays N(0, 1), so the marginal arrival
/// probability is exactly `rate`.
pub fn sample_correlated(rate: f64, corr: f64, state: &mut ArrivalState) -> Result<bool, ParamError> {
    check_corr(corr)?;
    let threshold = latent_threshold(rate)?;
    Ok(step_latent(threshold, corr, state))
}

fn check_corr(corr: f64) -> Result<(), ParamError> {
    if (0.0..1.0).contains(&corr) {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            name: "arrival correlation",
            value: corr,
            domain: "[0, 1)",
        })
    }
}

fn step_latent(threshold: f64, corr: f64, state: &mut ArrivalState) -> bool {
    let e: f64 = state.rng.sample(StandardNormal);
    state.latent = corr * state.latent + (1.0 - corr * corr).sqrt() * e;
    state.latent > threshold
}

/// `A_r^i(k)`: number of arrivals among one (operator, region) group.
pub fn aggregate_arrivals(indicators: &[bool], members: &[usize]) -> usize {
    members.iter().filter(|&&idx| indicators[idx]).count()
}

/// Arrival indicators for every client over a whole horizon, period-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArrivalTrace {
    num_clients: usize,
    periods: usize,
    bits: Vec<bool>,
}

impl ArrivalTrace {
    pub fn from_fn(periods: usize, num_clients: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(periods * num_clients);
        for k in 0..periods {
            for n in 0..num_clients {
                bits.push(f(k, n));
            }
        }
        Self {
            num_clients,
            periods,
            bits,
        }
    }

    /// Generates a trace for `deployment` from `seed` (usually the master seed)
    /// under the configured arrival process.
    pub fn generate(deployment: &Deployment, seed: u64) -> Result<Self, ParamError> {
        let periods = deployment.config.horizon;
        let n = deployment.clients.len();
        let mut bits = vec![false; periods * n];
        for (idx, c) in deployment.clients.iter().enumerate() {
            let mut state = ArrivalState::new(client_stream_seed(seed, c.operator, c.region, c.client));
            match deployment.config.arrival_process {
                ArrivalProcess::Bernoulli => {
                    check_rate(c.arrival_rate)?;
                    for k in 0..periods {
                        bits[k * n + idx] = state.rng.random::<f64>() < c.arrival_rate;
                    }
                }
                ArrivalProcess::Correlated(corr) => {
                    check_corr(corr)?;
                    let threshold = latent_threshold(c.arrival_rate)?;
                    for k in 0..periods {
                        bits[k * n + idx] = step_latent(threshold, corr, &mut state);
                    }
                }
            }
        }
        Ok(Self {
            num_clients: n,
            periods,
            bits,
        })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn num_clients(&self) -> usize {
        self.num_clients
    }

    pub fn period(&self, k: usize) -> &[bool] {
        &self.bits[k * self.num_clients..(k + 1) * self.num_clients]
    }

    pub fn client_count(&self, client: usize) -> usize {
        (0..self.periods).filter(|&k| self.period(k)[client]).count()
    }

    /// CSV with header `period,operator,region,client,indicator`, one row per
    /// client per period.
    pub fn write_csv<W: Write>(&self, deployment: &Deployment, out: W) -> Result<(), TraceError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["period", "operator", "region", "client", "indicator"])?;
        for k in 0..self.periods {
            for (idx, c) in deployment.clients.iter().enumerate() {
                let bit = if self.period(k)[idx] { "1" } else { "0" };
                w.write_record([
                    k.to_string().as_str(),
                    &c.operator.to_string(),
                    &c.region.to_string(),
                    &c.client.to_string(),
                    bit,
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a trace written by [`ArrivalTrace::write_csv`]. Rows may come in
    /// any order; missing rows are zeros. The horizon is the deployment's.
    pub fn read_csv<R: Read>(deployment: &Deployment, input: R) -> Result<Self, TraceError> {
        let periods = deployment.config.horizon;
        let n = deployment.clients.len();
        let mut bits = vec![false; periods * n];
        let mut rdr = csv::Reader::from_reader(input);
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| -> Result<usize, TraceError> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| TraceError::Row {
                        row,
                        message: format!("column {i} is not a non-negative integer"),
                    })
            };
            let (k, op, region, client, ind) = (field(0)?, field(1)?, field(2)?, field(3)?, field(4)?);
            if k >= periods {
                return Err(TraceError::Row {
                    row,
                    message: format!("period {k} beyond horizon {periods}"),
                });
            }
            if ind > 1 {
                return Err(TraceError::Row {
                    row,
                    message: format!("indicator {ind} is not 0 or 1"),
                });
            }
            let idx = (op < deployment.config.num_operators && region < deployment.config.num_regions)
                .then(|| deployment.members(op, region))
                .and_then(|m| m.iter().copied().find(|&i| deployment.clients[i].client == client))
                .ok_or_else(|| TraceError::Row {
                    row,
                    message: format!("no client ({op}, {region}, {client})"),
                })?;
            bits[k * n + idx] = ind == 1;
        }
        Ok(Self {
            num_clients: n,
            periods,
            bits,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ClientSpec, SystemConfig};

    #[test]
    fn degenerate_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| !sample_bernoulli(0.0, &mut rng).unwrap()));
        assert!((0..1000).all(|_| sample_bernoulli(1.0, &mut rng).unwrap()));
        let mut st = ArrivalState::new(2);
        assert!((0..1000).all(|_| !sample_correlated(0.0, 0.5, &mut st).unwrap()));
        assert!((0..1000).all(|_| sample_correlated(1.0, 0.5, &mut st).unwrap()));
    }

    #[test]
    fn bad_parameters_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_bernoulli(1.2, &mut rng).is_err());
        assert!(sample_bernoulli(-0.1, &mut rng).is_err());
        let mut st = ArrivalState::new(1);
        assert!(sample_correlated(0.5, 1.0, &mut st).is_err());
        assert!(sample_correlated(0.5, -0.1, &mut st).is_err());
    }

    #[test]
    fn bernoulli_half_calibration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let hits = (0..100_000).filter(|_| sample_bernoulli(0.5, &mut rng).unwrap()).count();
        let mean = hits as f64 / 1e5;
        assert!((0.49..=0.51).contains(&mean), "{mean}");
    }

    #[test]
    fn aggregate_counts() {
        let members: Vec<usize> = (0..30).collect();
        assert_eq!(aggregate_arrivals(&[false; 30], &members), 0);
        assert_eq!(aggregate_arrivals(&[true; 30], &members), 30);
        let mixed: Vec<bool> = (0..30).map(|i| i < 17).collect();
        assert_eq!(aggregate_arrivals(&mixed, &members), 17);
    }

    #[test]
    fn stream_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for op in 0..3 {
            for r in 0..3 {
                for c in 0..30 {
                    assert!(seen.insert(client_stream_seed(42, op, r, c)));
                }
            }
        }
    }

    fn tiny() -> Deployment {
        let mut cfg = SystemConfig::new(2, 1);
        cfg.horizon = 50;
        let clients = vec![
            ClientSpec::new(0, 0, 0, 0.3),
            ClientSpec::new(0, 0, 1, 0.6),
            ClientSpec::new(1, 0, 0, 0.9),
        ];
        Deployment::new(cfg, clients).unwrap()
    }

    #[test]
    fn adding_a_client_leaves_others_untouched() {
        let d = tiny();
        let base = ArrivalTrace::generate(&d, 5).unwrap();
        let mut clients = d.clients.clone();
        clients.push(ClientSpec::new(1, 0, 1, 0.5));
        let bigger = Deployment::new(d.config.clone(), clients).unwrap();
        let more = ArrivalTrace::generate(&bigger, 5).unwrap();
        for k in 0..50 {
            assert_eq!(base.period(k), &more.period(k)[..3]);
        }
    }

    #[test]
    fn csv_round_trip() {
        let d = tiny();
        let trace = ArrivalTrace::generate(&d, 9).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("period,operator,region,client,indicator\n"));
        let back = ArrivalTrace::read_csv(&d, buf.as_slice()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn csv_rejects_unknown_client() {
        let d = tiny();
        let text = "period,operator,region,client,indicator\n0,1,0,7,1\n";
        assert!(ArrivalTrace::read_csv(&d, text.as_bytes()).is_err());
    }
}
