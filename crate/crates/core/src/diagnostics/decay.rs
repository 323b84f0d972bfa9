//! Exponential decay fits and envelope checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::Trajectory;

use super::functionals::compute_energy;

/// Relative slack applied to every envelope comparison.
pub const ENVELOPE_SLACK: f64 = 1e-6;

/// Upper bound `scale · exp(−rate · t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub scale: f64,
    pub rate: f64,
}

impl Envelope {
    pub fn new(scale: f64, rate: f64) -> Self {
        Self { scale, rate }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.scale * (-self.rate * t).exp()
    }

    /// True when `value` exceeds the bound at `t` beyond the slack.
    pub fn violated_by(&self, t: f64, value: f64) -> bool {
        value > self.at(t) * (1.0 + ENVELOPE_SLACK)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// Least-squares slope of `−ln E` on the fit window.
    pub rate: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// Samples anywhere in the series lying above the envelope.
    pub violations: usize,
    /// First violating time, if any.
    pub first_violation: Option<f64>,
}

/// Fits `E ≈ c e^{−rate t}` on `[t_end/2, t_end]` and counts envelope
/// violations over the whole series.
pub fn decay_fit(times: &[f64], values: &[f64], envelope: Option<Envelope>) -> Result<DecayFit> {
    assert_eq!(times.len(), values.len());
    let t_end = *times
        .last()
        .ok_or_else(|| Error::DegenerateFit("empty series".into()))?;
    let t_start = 0.5 * t_end;

    let window: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_start)
        .map(|(&t, &e)| (t, e))
        .collect();
    if window.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "fit window [{t_start}, {t_end}] holds {} samples, need 3",
            window.len()
        )));
    }
    if let Some((t, e)) = window.iter().find(|(_, e)| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::DegenerateFit(format!("E = {e} at t = {t}")));
    }

    let n = window.len() as f64;
    let t_mean = window.iter().map(|(t, _)| t).sum::<f64>() / n;
    let y_mean = window.iter().map(|(_, e)| -e.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, e) in &window {
        let dt = t - t_mean;
        sxy += dt * (-e.ln() - y_mean);
        sxx += dt * dt;
    }

    let mut violations = 0;
    let mut first_violation = None;
    if let Some(env) = envelope {
        for (&t, &e) in times.iter().zip(values) {
            if env.violated_by(t, e) {
                violations += 1;
                first_violation.get_or_insert(t);
            }
        }
    }

    Ok(DecayFit {
        rate: sxy / sxx,
        window: (t_start, t_end),
        samples: window.len(),
        violations,
        first_violation,
    })
}

/// Limit position of an uncontrolled particle and the checks on how fast
/// `h(t)` approaches it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HStarReport {
    /// `h(t_final)`
    pub h_star: f64,
    /// `‖v0‖² + g0²`
    pub initial_energy: f64,
    /// End of the checked window, `t_final − min(10, t_final/4)`.
    pub checked_until: f64,
    /// Samples with `|h − h*|² > e^{−t/4} (‖v0‖² + g0²)`.
    pub violations: usize,
    /// Samples with `|h − h*| > (√E0/8) e^{−t/8}`.
    pub display_violations: usize,
    /// Samples with `|h − h*| > 8 √E0 e^{−t/8}`.
    pub corrected_display_violations: usize,
    /// `|h(t_tail) − h*|` at the end of the checked window.
    pub tail_gap: f64,
    /// `(√E0/8) e^{−t_tail/8}`
    pub tail_display_bound: f64,
}

pub fn h_star_estimate(traj: &Trajectory, k: f64) -> Result<HStarReport> {
    if k > 0.0 {
        return Err(Error::NotApplicable(format!(
            "the particle limit is only defined without feedback (K = {k})"
        )));
    }
    let first = traj.first();
    let last = traj.last();
    let h_star = last.h;
    let e0 = compute_energy(first, 0.0, 0.0);
    let t_final = last.t;
    let margin = (t_final / 4.0).min(10.0);
    let checked_until = t_final - margin;

    let root = e0.sqrt();
    let mut report = HStarReport {
        h_star,
        initial_energy: e0,
        checked_until,
        violations: 0,
        display_violations: 0,
        corrected_display_violations: 0,
        tail_gap: 0.0,
        tail_display_bound: root / 8.0 * (-checked_until / 8.0).exp(),
    };
    let squared = Envelope::new(e0, 0.25);
    let display = Envelope::new(root / 8.0, 0.125);
    let corrected = Envelope::new(8.0 * root, 0.125);
    for s in traj.states.iter().filter(|s| s.t <= checked_until) {
        let gap = (s.h - h_star).abs();
        report.violations += usize::from(squared.violated_by(s.t, gap * gap));
        report.display_violations += usize::from(display.violated_by(s.t, gap));
        report.corrected_display_violations += usize::from(corrected.violated_by(s.t, gap));
        report.tail_gap = gap;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::State;
    use approx::assert_relative_eq;

    #[test]
    fn exact_exponential() {
        let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = times.iter().map(|t| (-0.5 * t).exp()).collect();
        let fit = decay_fit(&times, &values, Some(Envelope::new(1.0, 0.25))).unwrap();
        assert!((fit.rate - 0.5).abs() < 1e-10);
        assert_eq!(fit.violations, 0);
        let fit = decay_fit(&times, &values, Some(Envelope::new(1.0, 0.6))).unwrap();
        assert_eq!(fit.violations, 400);
        assert_relative_eq!(fit.first_violation.unwrap(), 0.1);
    }

    #[test]
    fn slack_absorbs_round_off() {
        let env = Envelope::new(2.0, 1.0);
        assert!(!env.violated_by(1.0, env.at(1.0) * (1.0 + 1e-9)));
        assert!(env.violated_by(1.0, env.at(1.0) * (1.0 + 1e-5)));
    }

    #[test]
    fn degenerate_series() {
        let t = [0.0, 1.0, 2.0, 3.0];
        assert!(matches!(decay_fit(&t, &[1.0, 0.5, 0.0, 0.0], None), Err(Error::DegenerateFit(_))));
        assert!(matches!(decay_fit(&t[..2], &[1.0, 0.5], None), Err(Error::DegenerateFit(_))));
        assert!(matches!(decay_fit(&[], &[], None), Err(Error::DegenerateFit(_))));
    }

    fn still(h: f64, n: usize) -> Trajectory {
        let mut tr = Trajectory::default();
        for i in 0..n {
            tr.push(State { t: i as f64, v: vec![0.0; 9], h, g: 0.0 }, 0.0, 0.0);
        }
        tr
    }

    #[test]
    fn zero_data_limit() {
        let r = h_star_estimate(&still(0.3, 41), 0.0).unwrap();
        assert_eq!(r.h_star, 0.3);
        assert_eq!(r.checked_until, 30.0);
        assert_eq!((r.violations, r.display_violations), (0, 0));
        assert!(matches!(h_star_estimate(&still(0.3, 5), 1.0), Err(Error::NotApplicable(_))));
    }
}
