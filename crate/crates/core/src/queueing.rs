//! Deadline-success probability of an M/M/1 queue with impatient customers,
//! and the gain from pooling two such queues into one with twice the service rate.

use crate::error::ParamError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueParams {
    pub service_rate: f64,
    pub intensity: f64,
    pub deadline: f64,
}

impl QueueParams {
    pub fn new(service_rate: f64, intensity: f64, deadline: f64) -> Self {
        Self {
            service_rate,
            intensity,
            deadline,
        }
    }

    fn check(&self) -> Result<(), ParamError> {
        let out = |name, value, domain| ParamError::OutOfRange { name, value, domain };
        if !(self.service_rate > 0.0) || !self.service_rate.is_finite() {
            return Err(out("service_rate", self.service_rate, "(0, inf)"));
        }
        if !(0.0..=1.0).contains(&self.intensity) {
            return Err(out("intensity", self.intensity, "[0, 1]"));
        }
        if !(self.deadline >= 0.0) {
            return Err(out("deadline", self.deadline, "[0, inf)"));
        }
        Ok(())
    }
}

/// Probability that a customer is served before its deadline.
///
/// `(1 - e^{mu D (rho - 1)}) / (1 - rho e^{mu D (rho - 1)})`, with the limit
/// `mu D / (1 + mu D)` at `rho = 1`.
pub fn p_succ(p: &QueueParams) -> Result<f64, ParamError> {
    p.check()?;
    let md = p.service_rate * p.deadline;
    if p.intensity == 1.0 {
        return Ok(md / (1.0 + md));
    }
    // e^x - 1 without cancellation near rho = 1
    let x = md * (p.intensity - 1.0);
    let num = -x.exp_m1();
    let den = 1.0 - p.intensity * x.exp();
    Ok(num / den)
}

/// Relative increase in deadline success when the service rate doubles.
pub fn pooling_gain(p: &QueueParams) -> Result<f64, ParamError> {
    let base = p_succ(p)?;
    if base <= 0.0 {
        return Err(ParamError::UndefinedGain);
    }
    let pooled = p_succ(&QueueParams {
        service_rate: 2.0 * p.service_rate,
        ..*p
    })?;
    Ok((pooled - base) / base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(mu: f64, rho: f64, d: f64) -> f64 {
        p_succ(&QueueParams::new(mu, rho, d)).unwrap()
    }

    #[test]
    fn zero_deadline() {
        assert_eq!(ps(1.0, 0.5, 0.0), 0.0);
        assert_eq!(
            pooling_gain(&QueueParams::new(1.0, 0.5, 0.0)),
            Err(ParamError::UndefinedGain)
        );
    }

    #[test]
    fn reference_point() {
        let expected = (1.0 - (-0.5f64).exp()) / (1.0 - 0.5 * (-0.5f64).exp());
        assert!((ps(1.0, 0.5, 1.0) - expected).abs() < 1e-15);
        assert!((ps(1.0, 0.5, 1.0) - 0.5647).abs() < 1e-4);
    }

    #[test]
    fn idle_server_reduces_to_exponential() {
        for &(mu, d) in &[(1.0, 1.0), (2.5, 0.3), (0.1, 7.0)] {
            assert!((ps(mu, 0.0, d) - (1.0 - (-mu * d).exp())).abs() < 1e-15);
        }
    }

    #[test]
    fn pooling_reference_and_saturation() {
        let g = pooling_gain(&QueueParams::new(1.0, 0.9, 1.0)).unwrap();
        assert!((g - 0.344).abs() < 1e-3, "{g}");
        assert!(pooling_gain(&QueueParams::new(1.0, 0.9, 50.0)).unwrap() < 1e-2);
    }

    #[test]
    fn continuity_at_full_load() {
        for &(mu, d) in &[(1.0, 1.0), (2.0, 0.5), (0.5, 4.0)] {
            let limit = ps(mu, 1.0, d);
            assert!((ps(mu, 1.0 - 1e-6, d) - limit).abs() < 1e-4);
            assert_eq!(limit, mu * d / (1.0 + mu * d));
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(p_succ(&QueueParams::new(0.0, 0.5, 1.0)).is_err());
        assert!(p_succ(&QueueParams::new(1.0, 1.1, 1.0)).is_err());
        assert!(p_succ(&QueueParams::new(1.0, 0.5, -1.0)).is_err());
        assert!(p_succ(&QueueParams::new(f64::NAN, 0.5, 1.0)).is_err());
    }

    #[test]
    fn monotone_on_grid() {
        let grid: Vec<f64> = (1..=50).map(|k| f64::from(k) * 0.1).collect();
        for &mu in &[0.5, 1.0, 2.0] {
            for &rho in &[0.0, 0.3, 0.5, 0.7, 0.9, 1.0] {
                let mut prev_p = 0.0;
                let mut prev_g = f64::INFINITY;
                for &d in &grid {
                    let p = QueueParams::new(mu, rho, d);
                    let s = p_succ(&p).unwrap();
                    assert!((0.0..=1.0).contains(&s));
                    assert!(s >= prev_p);
                    assert!(s <= ps(2.0 * mu, rho, d));
                    if rho <= 0.9 {
                        assert!(s >= ps(mu, rho + 0.1, d) - 1e-15);
                    }
                    let g = pooling_gain(&p).unwrap();
                    assert!(g > 0.0 && g < prev_g);
                    prev_p = s;
                    prev_g = g;
                }
            }
        }
    }
}
