//! Perceived video quality as a function of allotted timeslots.
//!
//! `Q(tau) = (1/gamma) * ln((tau * c / T + floor) / normalizer)` with `c` in
//! megabits per slot, so the floor (0.1) and normalizer (0.4) sit on the same
//! megabit-per-second scale as the 360p bitrate that motivates `Q_min = 0.3`.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityParams {
    pub scale_gamma: f64,
    pub floor_offset: f64,
    pub normalizer: f64,
    pub capacity_mbits_per_slot: f64,
    pub period_len: f64,
}

impl QualityParams {
    /// Constants of the H.264 surrogate: `gamma = 0.8`, floor 0.1, normalizer 0.4.
    pub fn h264(capacity_bits_per_slot: f64, period_len: u32) -> Self {
        Self {
            scale_gamma: 0.8,
            floor_offset: 0.1,
            normalizer: 0.4,
            capacity_mbits_per_slot: capacity_bits_per_slot / 1e6,
            period_len: f64::from(period_len),
        }
    }

    pub fn with_scale(mut self, gamma: f64) -> Self {
        self.scale_gamma = gamma;
        self
    }
}

pub fn perceived_quality(tau: f64, p: &QualityParams) -> f64 {
    let rate = tau * p.capacity_mbits_per_slot / p.period_len;
    ((rate + p.floor_offset) / p.normalizer).ln() / p.scale_gamma
}

/// Exact derivative of [`perceived_quality`] with respect to `tau`.
pub fn marginal_quality(tau: f64, p: &QualityParams) -> f64 {
    1.0 / (p.scale_gamma * (tau + p.floor_offset * p.period_len / p.capacity_mbits_per_slot))
}

/// Acceptable-quality indicator `b`: false whenever no packet arrived.
pub fn acceptability(tau: u32, p: &QualityParams, q_min: f64, arrived: bool) -> bool {
    arrived && perceived_quality(f64::from(tau), p) >= q_min
}

/// Smallest slot count in `0..=T` reaching `q_min`, or `None` if even `T` falls short.
pub fn min_slots_for_acceptable(p: &QualityParams, q_min: f64) -> Option<u32> {
    let max = p.period_len.round() as u32;
    (0..=max).find(|&tau| perceived_quality(f64::from(tau), p) >= q_min)
}

/// Piecewise-linear stand-in for the acceptability indicator:
/// `min(1, Q / q_min)` clamped below at 0.
pub fn approx_acceptability(tau: f64, p: &QualityParams, q_min: f64) -> f64 {
    relaxed_acceptability(perceived_quality(tau, p), q_min).max(0.0)
}

/// `min(1, quality / q_min)` without the lower clamp; concave in `tau`
/// because `Q` is. For a non-positive threshold the indicator is returned.
pub(crate) fn relaxed_acceptability(quality: f64, q_min: f64) -> f64 {
    if q_min > 0.0 {
        (quality / q_min).min(1.0)
    } else if quality >= q_min {
        1.0
    } else {
        0.0
    }
}
