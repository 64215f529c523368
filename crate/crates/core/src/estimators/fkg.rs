//! Positive correlation of decreasing soup events.

use crate::clusters::build_clusters;
use crate::error::{Error, Result};
use crate::geom::P2;
use crate::rng::stream;
use crate::sampler::{sample_loop_soup, LoopSample, SoupConfig};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A yes/no property of a loop configuration.
pub trait SoupEvent: Sync {
    fn holds(&self, loops: &[LoopSample]) -> bool;
    fn name(&self) -> String;
}

/// No cluster of the soup joins `|z - center| <= r_in` to `|z - center| >= r_out`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoCrossing {
    pub center: P2,
    pub r_in: f64,
    pub r_out: f64,
    /// Raster cell used to build clusters.
    pub cell: f64,
}

impl SoupEvent for NoCrossing {
    fn holds(&self, loops: &[LoopSample]) -> bool {
        if loops.is_empty() {
            return true;
        }
        let cs = build_clusters(loops, self.cell);
        let d = |p: &P2| (p[0] - self.center[0]).hypot(p[1] - self.center[1]);
        !cs.clusters.iter().any(|cl| {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &m in &cl.members {
                for p in &loops[m].trace {
                    let r = d(p);
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
            lo <= self.r_in && hi >= self.r_out
        })
    }

    fn name(&self) -> String {
        format!("no cluster crosses A({}, {})", self.r_in, self.r_out)
    }
}

/// Complement of an event.
pub struct Negated<E>(pub E);

impl<E: SoupEvent> SoupEvent for Negated<E> {
    fn holds(&self, loops: &[LoopSample]) -> bool {
        !self.0.holds(loops)
    }

    fn name(&self) -> String {
        format!("not ({})", self.0.name())
    }
}

/// Decreasing-event check on one configuration: the event must still hold
/// on a random sub-collection whenever it holds on the whole collection.
pub fn check_decreasing<E: SoupEvent + ?Sized, R: Rng + ?Sized>(ev: &E, loops: &[LoopSample], rng: &mut R) -> Result<bool> {
    let all = ev.holds(loops);
    let sub: Vec<LoopSample> = loops.iter().filter(|_| rng.random::<bool>()).cloned().collect();
    if all && !ev.holds(&sub) {
        return Err(Error::MonotonicityViolation(format!(
            "{} holds for {} loops but fails after removing {}",
            ev.name(),
            loops.len(),
            loops.len() - sub.len()
        )));
    }
    Ok(all)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkgReport {
    pub trials: u64,
    pub pa: f64,
    pub pb: f64,
    pub pab: f64,
    /// Standard error of `pab - pa pb`.
    pub stderr: f64,
    /// `pab >= pa pb - 3 stderr`.
    pub holds: bool,
}

/// Estimate `P(A)`, `P(B)`, `P(A and B)` over `trials` soups. The first
/// `harness` draws also run the decreasing-event check on both events.
pub fn fkg_check(a: &dyn SoupEvent, b: &dyn SoupEvent, cfg: &SoupConfig, trials: u64, harness: u64, seed: u64) -> Result<FkgReport> {
    cfg.validate()?;
    if trials < 2 {
        return Err(Error::InvalidConfig(vec![format!("trials = {trials} below 2")]));
    }
    let counts = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<[u64; 3]> {
            let mut rng = stream(seed, &[0x666b67], i);
            let loops = sample_loop_soup(cfg, &mut rng)?;
            let (ea, eb) = if i < harness {
                (check_decreasing(a, &loops, &mut rng)?, check_decreasing(b, &loops, &mut rng)?)
            } else {
                (a.holds(&loops), b.holds(&loops))
            };
            Ok([ea as u64, eb as u64, (ea && eb) as u64])
        })
        .try_reduce(|| [0u64; 3], |x, y| Ok([x[0] + y[0], x[1] + y[1], x[2] + y[2]]))?;
    let n = trials as f64;
    let (pa, pb, pab) = (counts[0] as f64 / n, counts[1] as f64 / n, counts[2] as f64 / n);
    let var = |p: f64| p * (1.0 - p) / n;
    let stderr = (var(pab) + pb * pb * var(pa) + pa * pa * var(pb)).sqrt();
    Ok(FkgReport { trials, pa, pb, pab, stderr, holds: pab >= pa * pb - 3.0 * stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;

    #[test]
    fn an_event_with_itself() {
        let cfg = SoupConfig::plane(1.0, Rect::new(-1.0, -1.0, 1.0, 1.0), 0.005, 0.2, 0);
        let a = NoCrossing { center: [0.0, 0.0], r_in: 0.2, r_out: 0.5, cell: 0.02 };
        let r = fkg_check(&a, &a, &cfg, 200, 50, 1).unwrap();
        assert!(r.holds);
        assert_eq!(r.pa, r.pab);
    }

    #[test]
    fn increasing_event_is_rejected() {
        let cfg = SoupConfig::plane(1.0, Rect::new(-1.0, -1.0, 1.0, 1.0), 0.005, 0.5, 0);
        let a = NoCrossing { center: [0.0, 0.0], r_in: 0.1, r_out: 0.3, cell: 0.02 };
        let b = Negated(a);
        assert!(matches!(fkg_check(&a, &b, &cfg, 400, 400, 2), Err(Error::MonotonicityViolation(_))));
    }
}
