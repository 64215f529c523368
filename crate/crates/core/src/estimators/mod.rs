//! Monte Carlo campaigns for non-disconnection probabilities, avoidance
//! moments and tilted extremal distances, plus the exponent fits.
//!
//! Every trial draws from its own counter-based stream and reports values in
//! `[0, 1]`; tallies are kept in fixed point so merging shards in any order
//! gives identical sums.

mod campaigns;
mod fit;
mod fkg;
mod squares;

pub use campaigns::*;
pub use fit::{fit_exponent, fit_power_law, ExponentFit, RadiusEstimate};
pub use fkg::*;
pub use squares::*;

use crate::error::{Error, Result};
use crate::raster::Grid;
use crate::rng::{stream, Stream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fixed-point scale of tally sums (values lie in `[0, 1]`).
const UNIT: f64 = (1u64 << 62) as f64;

fn fixed(v: f64) -> u128 {
    (v.clamp(0.0, 1.0) * UNIT).round() as u128
}

/// Order-independent accumulator of per-trial values in `[0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    /// Trials with a positive value.
    pub successes: u64,
    pub sum: u128,
    pub sum_sq: u128,
    /// Trials whose computation failed (counted in `trials`, contribute 0).
    pub failed: u64,
}

impl Tally {
    pub fn record(&mut self, v: f64) {
        self.trials += 1;
        if v > 0.0 {
            self.successes += 1;
        }
        self.sum += fixed(v);
        self.sum_sq += fixed(v * v);
    }

    pub fn record_failure(&mut self) {
        self.trials += 1;
        self.failed += 1;
    }

    pub fn merge(&self, o: &Tally) -> Tally {
        Tally {
            trials: self.trials + o.trials,
            successes: self.successes + o.successes,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
            failed: self.failed + o.failed,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.sum as f64 / UNIT / self.trials as f64
    }

    /// Variance of the mean, `(E v^2 - (E v)^2) / n` (the binomial variance
    /// `p (1 - p) / n` for 0/1 values).
    pub fn variance_of_mean(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let n = self.trials as f64;
        let m = self.mean();
        let m2 = self.sum_sq as f64 / UNIT / n;
        ((m2 - m * m).max(0.0)) / n
    }
}

/// How the avoidance probability `Z_r` of a fixed outer configuration is
/// evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZMethod {
    /// Discrete harmonic function: 1 on `C_r`, 0 on the obstacles, averaged over `C_0`.
    #[default]
    Harmonic,
    /// Fraction of `inner_samples` independent paths avoiding the obstacles.
    InnerPaths,
}

/// Parameters of a campaign over a list of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub c: f64,
    pub k: usize,
    pub lambda: f64,
    pub radii: Vec<f64>,
    pub trials_per_radius: u64,
    /// Inner paths per outer configuration for [`ZMethod::InnerPaths`].
    pub inner_samples: usize,
    pub z_method: ZMethod,
    /// Angular cells of the cylinder raster.
    pub width: usize,
    /// Standard deviation of a walk increment, in log units.
    pub step: f64,
    /// `t_min = t_min_factor * cell^2`, in log units.
    pub t_min_factor: f64,
    /// `t_max = (t_max_scale * (r + 1))^2`, in log units.
    pub t_max_scale: f64,
    /// Soup roots are drawn in `[-soup_depth, r]`.
    pub soup_depth: f64,
    pub seed: u64,
    /// Leave the smallest radius out of the fit.
    pub drop_smallest: bool,
    pub min_successes: u64,
}

impl CampaignSpec {
    pub fn new(c: f64, k: usize, radii: Vec<f64>, trials_per_radius: u64) -> Self {
        CampaignSpec {
            c,
            k,
            lambda: 0.0,
            radii,
            trials_per_radius,
            inner_samples: 50,
            z_method: ZMethod::Harmonic,
            width: 256,
            step: 0.02,
            t_min_factor: 4.0,
            t_max_scale: 2.0,
            soup_depth: 1.0,
            seed: 1,
            drop_smallest: false,
            min_successes: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(0.0..=1.0).contains(&self.c) {
            bad.push(format!("c = {} outside [0, 1]", self.c));
        }
        if self.k == 0 {
            bad.push("k must be at least 1".into());
        }
        if !(self.lambda >= 0.0) {
            bad.push(format!("lambda = {} must be nonnegative", self.lambda));
        }
        if self.radii.is_empty() {
            bad.push("radii is empty".into());
        }
        if self.radii.iter().any(|&r| !(r >= 1.0)) {
            bad.push("every radius must be at least 1".into());
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            bad.push("radii must be strictly ascending".into());
        }
        if self.trials_per_radius < 100 {
            bad.push(format!("trials_per_radius = {} below 100", self.trials_per_radius));
        }
        if self.lambda > 0.0 && self.z_method == ZMethod::InnerPaths && self.inner_samples < 50 {
            bad.push(format!("inner_samples = {} below 50", self.inner_samples));
        }
        if self.width < 16 {
            bad.push(format!("width = {} below 16", self.width));
        }
        if !(self.step > 0.0) {
            bad.push(format!("step = {} must be positive", self.step));
        }
        if !(self.t_min_factor > 0.0) {
            bad.push(format!("t_min_factor = {} must be positive", self.t_min_factor));
        }
        if !(self.t_max_scale > 0.0) {
            bad.push(format!("t_max_scale = {} must be positive", self.t_max_scale));
        }
        if !(self.soup_depth >= 0.0) {
            bad.push(format!("soup_depth = {} must be nonnegative", self.soup_depth));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(bad))
        }
    }

    pub fn cell(&self) -> f64 {
        Grid::cylinder(self.width, 0.0, 1.0).cell
    }

    /// Soup cutoffs `(t_min, t_max)` at radius `r`, in log units.
    pub fn cutoffs(&self, r: f64) -> (f64, f64) {
        let t_min = self.t_min_factor * self.cell().powi(2);
        let t_max = (self.t_max_scale * (r + 1.0)).powi(2);
        (t_min, t_max.max(2.0 * t_min))
    }
}

/// Run `trials` for one radius: trial `i` gets stream `i` under `(seed, tags)`
/// and returns one value per output slot (`None` for a failed computation).
pub fn run_trials<F>(seed: u64, tags: &[u64], trials: std::ops::Range<u64>, slots: usize, f: F) -> Vec<Tally>
where
    F: Fn(&mut Stream) -> Vec<Option<f64>> + Sync,
{
    trials
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, tags, i);
            let vals = f(&mut rng);
            let mut t = vec![Tally::default(); slots];
            for (tally, v) in t.iter_mut().zip(vals) {
                match v {
                    Some(v) => tally.record(v),
                    None => tally.record_failure(),
                }
            }
            t
        })
        .reduce(
            || vec![Tally::default(); slots],
            |a, b| a.iter().zip(&b).map(|(x, y)| x.merge(y)).collect(),
        )
}

/// Per-radius estimate from a tally, with `scale` applied to the mean.
pub fn radius_estimate(r: f64, t: &Tally, scale: f64) -> RadiusEstimate {
    RadiusEstimate {
        r,
        estimate: t.mean() * scale,
        variance: t.variance_of_mean() * scale * scale,
        trials: t.trials,
        successes: t.successes,
        attrition: t.failed,
    }
}

/// Fit the exponential decay of per-radius tallies, after checking that
/// each radius has enough successes.
pub fn fit_tallies(spec: &CampaignSpec, tallies: &[Tally], scale: impl Fn(f64) -> f64) -> Result<ExponentFit> {
    let mut pts = Vec::new();
    for (&r, t) in spec.radii.iter().zip(tallies) {
        if t.successes < spec.min_successes {
            return Err(Error::InsufficientSuccesses { r, successes: t.successes, needed: spec.min_successes });
        }
        pts.push(radius_estimate(r, t, scale(r)));
    }
    let used = if spec.drop_smallest && pts.len() > 3 { &pts[1..] } else { &pts[..] };
    let mut fit = fit_exponent(used)?;
    fit.per_radius = pts;
    Ok(fit)
}

/// One CSV row of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub c: f64,
    pub k: usize,
    pub lambda: f64,
    pub r: f64,
    pub trials: u64,
    pub successes_or_mean: f64,
    pub stderr: f64,
    pub attrition: u64,
}

pub fn campaign_rows(spec: &CampaignSpec, lambda: f64, fit: &ExponentFit) -> Vec<CampaignRow> {
    fit.per_radius
        .iter()
        .map(|e| CampaignRow {
            c: spec.c,
            k: spec.k,
            lambda,
            r: e.r,
            trials: e.trials,
            successes_or_mean: e.estimate,
            stderr: e.variance.sqrt(),
            attrition: e.attrition,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_merge_is_exact() {
        let vals = [0.1, 0.7, 0.0, 1.0, 0.333];
        let mut all = Tally::default();
        let mut a = Tally::default();
        let mut b = Tally::default();
        for (i, &v) in vals.iter().enumerate() {
            all.record(v);
            if i % 2 == 0 { a.record(v) } else { b.record(v) }
        }
        assert_eq!(a.merge(&b), all);
        assert_eq!(b.merge(&a), all);
        assert_eq!(all.successes, 4);
        assert!((all.mean() - 2.133 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn binomial_variance() {
        let mut t = Tally::default();
        for i in 0..100 {
            t.record(if i < 30 { 1.0 } else { 0.0 });
        }
        assert!((t.variance_of_mean() - 0.3 * 0.7 / 100.0).abs() < 1e-15);
    }

    #[test]
    fn spec_validation_lists_everything() {
        let mut s = CampaignSpec::new(2.0, 0, vec![0.5], 10);
        s.z_method = ZMethod::InnerPaths;
        s.lambda = 0.5;
        s.inner_samples = 3;
        match s.validate() {
            Err(Error::InvalidConfig(v)) => assert_eq!(v.len(), 5, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }
}
