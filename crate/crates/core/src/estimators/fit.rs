use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub r: f64,
    pub estimate: f64,
    /// Variance of `estimate`.
    pub variance: f64,
    pub trials: u64,
    pub successes: u64,
    /// Trials whose computation failed.
    pub attrition: u64,
}

impl RadiusEstimate {
    pub fn point(r: f64, estimate: f64, variance: f64) -> Self {
        RadiusEstimate { r, estimate, variance, trials: 0, successes: 0, attrition: 0 }
    }
}

/// `estimate ~ exp(intercept - slope * r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub per_radius: Vec<RadiusEstimate>,
}

/// Weighted least squares of `-log estimate` on `r`. Weights are inverse
/// delta-method variances `estimate^2 / variance`; if some variance is zero
/// the points are weighted equally and the stderr comes from the residuals.
pub fn fit_exponent(points: &[RadiusEstimate]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(Error::SingularFit(format!("{} points, need at least 3", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.estimate > 0.0) || !p.estimate.is_finite()) {
        return Err(Error::Domain(format!("estimate {} at r = {} is not positive", p.estimate, p.r)));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.r).collect();
    let ys: Vec<f64> = points.iter().map(|p| -p.estimate.ln()).collect();
    let vy: Vec<f64> = points.iter().map(|p| p.variance / (p.estimate * p.estimate)).collect();
    let known = vy.iter().all(|&v| v > 0.0 && v.is_finite());
    let w: Vec<f64> = if known { vy.iter().map(|v| 1.0 / v).collect() } else { vec![1.0; xs.len()] };
    let sw: f64 = w.iter().sum();
    let xm = xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = ys.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(&w).map(|(x, w)| w * (x - xm).powi(2)).sum();
    if !(sxx > 1e-12 * sw) {
        return Err(Error::SingularFit("all radii equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).zip(&w).map(|((x, y), w)| w * (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let c0 = ym - slope * xm;
    let stderr = if known {
        (1.0 / sxx).sqrt()
    } else {
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - c0 - slope * x).powi(2)).sum();
        let dof = (xs.len() - 2) as f64;
        (rss / dof / sxx).sqrt()
    };
    Ok(ExponentFit { slope, intercept: -c0, stderr, per_radius: points.to_vec() })
}

/// Power law `estimate ~ C r^slope`: the same fit on `log r`, with the sign
/// flipped so that `slope` is the log-log slope.
pub fn fit_power_law(points: &[RadiusEstimate]) -> Result<ExponentFit> {
    if let Some(p) = points.iter().find(|p| !(p.r > 0.0)) {
        return Err(Error::Domain(format!("radius {} is not positive", p.r)));
    }
    let logged: Vec<RadiusEstimate> = points.iter().map(|p| RadiusEstimate { r: p.r.ln(), ..*p }).collect();
    let f = fit_exponent(&logged)?;
    Ok(ExponentFit { slope: -f.slope, intercept: f.intercept, stderr: f.stderr, per_radius: points.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let pts: Vec<_> = (1..=5).map(|r| RadiusEstimate::point(r as f64, (-0.5 * r as f64).exp(), 0.0)).collect();
        let f = fit_exponent(&pts).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-10);
        assert!(f.intercept.abs() < 1e-10);
    }

    #[test]
    fn constant_input() {
        let pts: Vec<_> = (1..=4).map(|r| RadiusEstimate::point(r as f64, 0.3, 1e-4)).collect();
        let f = fit_exponent(&pts).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert!(f.stderr > 0.0);
    }

    #[test]
    fn singular_and_short_inputs() {
        let same: Vec<_> = (0..3).map(|_| RadiusEstimate::point(2.0, 0.1, 1e-4)).collect();
        assert!(matches!(fit_exponent(&same), Err(Error::SingularFit(_))));
        assert!(fit_exponent(&same[..2]).is_err());
        let zero = vec![
            RadiusEstimate::point(1.0, 0.1, 1e-4),
            RadiusEstimate::point(2.0, 0.0, 1e-4),
            RadiusEstimate::point(3.0, 0.1, 1e-4),
        ];
        assert!(fit_exponent(&zero).is_err());
    }

    #[test]
    fn power_law() {
        let pts: Vec<_> = (1..=5).map(|r| RadiusEstimate::point(r as f64, 0.7 / r as f64, 0.0)).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-10);
    }
}
