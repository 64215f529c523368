//! Closed-form exponents and dimensions for the loop-soup family.
//!
//! Formulas are written in expanded form so that nothing cancels badly as
//! `c -> 1` (where `sqrt(1 - c) -> 0`).

use crate::error::{Error, Result};

/// Smallest `beta` accepted by [`xi`] at intensity `c`: `(6 - kappa) / (2 kappa)`.
///
/// A second threshold `(4 - kappa)^2 / (2 kappa)` also shows up in the
/// literature; on `kappa in [8/3, 4]` it never exceeds this one, so only this
/// bound is enforced.
pub fn beta_min(c: f64) -> Result<f64> {
    let k = kappa_of_c(c)?;
    Ok((6.0 - k) / (2.0 * k))
}

fn check_c(c: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("intensity c = {c} outside [0, 1]")));
    }
    Ok(())
}

/// `kappa(c) = (13 - c - sqrt((1 - c)(25 - c))) / 3`, mapping `[0, 1]` onto `[8/3, 4]`.
pub fn kappa_of_c(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok((13.0 - c - ((1.0 - c) * (25.0 - c)).sqrt()) / 3.0)
}

/// Inverse of [`kappa_of_c`]: `c = (6 - kappa)(3 kappa - 8) / (2 kappa)`.
pub fn c_of_kappa(kappa: f64) -> Result<f64> {
    if !(8.0 / 3.0..=4.0).contains(&kappa) {
        return Err(Error::Domain(format!("kappa = {kappa} outside [8/3, 4]")));
    }
    Ok(((6.0 - kappa) * (3.0 * kappa - 8.0) / (2.0 * kappa)).clamp(0.0, 1.0))
}

/// Generalized disconnection exponent
/// `xi_c(beta) = ((sqrt(24 beta + 1 - c) - sqrt(1 - c))^2 - 4 (1 - c)) / 48`.
///
/// Evaluated as `beta/2 - (1-c)/24 - sqrt((24 beta + 1 - c)(1 - c))/24`.
pub fn xi(c: f64, beta: f64) -> Result<f64> {
    let bmin = beta_min(c)?;
    if !beta.is_finite() || beta < bmin - 1e-15 {
        return Err(Error::Domain(format!(
            "beta = {beta} below validity bound {bmin} at c = {c}"
        )));
    }
    let one_c = 1.0 - c;
    let root = ((24.0 * beta + one_c) * one_c).sqrt();
    Ok((beta / 2.0 - one_c / 24.0 - root / 24.0).max(0.0))
}

/// Restriction exponent
/// `eta_kappa(beta) = ((sqrt(16 beta kappa + (4-kappa)^2) - (4-kappa))^2 - 4 (4-kappa)^2) / (32 kappa)`.
pub fn eta_kappa(kappa: f64, beta: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa <= 4.0) {
        return Err(Error::Domain(format!("kappa = {kappa} outside (0, 4]")));
    }
    let bmin = (6.0 - kappa) / (2.0 * kappa);
    if !beta.is_finite() || beta < bmin - 1e-15 {
        return Err(Error::Domain(format!(
            "beta = {beta} below validity bound {bmin} at kappa = {kappa}"
        )));
    }
    let a = 4.0 - kappa;
    let root = (16.0 * beta * kappa + a * a).sqrt();
    Ok(beta / 2.0 - (a * a + a * root) / (16.0 * kappa))
}

/// Predicted Hausdorff dimensions at intensity `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimensions {
    /// Outer boundary of a cluster, `1 + kappa/8`.
    pub d0: f64,
    /// Simple points on the outer boundary, `2 - xi_c(2)`.
    pub d1: f64,
    /// Double points on the outer boundary, `max(2 - xi_c(4), 0)`.
    pub d2: f64,
    /// Set when `2 - xi_c(4)` was negative and `d2` was clamped to zero.
    pub d2_clamped: bool,
}

pub fn predicted_dimensions(c: f64) -> Result<Dimensions> {
    let kappa = kappa_of_c(c)?;
    let raw2 = 2.0 - xi(c, 4.0)?;
    Ok(Dimensions {
        d0: 1.0 + kappa / 8.0,
        d1: 2.0 - xi(c, 2.0)?,
        d2: raw2.max(0.0),
        d2_clamped: raw2 < 0.0,
    })
}

/// One row of the `formulas` table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FormulaRow {
    pub c: f64,
    pub kappa: f64,
    pub xi2: f64,
    pub xi4: f64,
    pub xi6: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn formula_row(c: f64) -> Result<FormulaRow> {
    let d = predicted_dimensions(c)?;
    Ok(FormulaRow {
        c,
        kappa: kappa_of_c(c)?,
        xi2: xi(c, 2.0)?,
        xi4: xi(c, 4.0)?,
        xi6: xi(c, 6.0)?,
        d0: d.d0,
        d1: d.d1,
        d2: d.d2,
    })
}

/// Table on the grid `c = 0, 1/steps, ..., 1`.
pub fn formula_table(steps: usize) -> Result<Vec<FormulaRow>> {
    let steps = steps.max(1);
    (0..=steps)
        .map(|i| formula_row(i as f64 / steps as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_endpoints() {
        assert!((kappa_of_c(0.0).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert!((kappa_of_c(1.0).unwrap() - 4.0).abs() < 1e-15);
        assert!(kappa_of_c(-0.1).is_err());
        assert!(kappa_of_c(1.1).is_err());
        assert!(c_of_kappa(2.0).is_err());
        assert!((c_of_kappa(4.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(c_of_kappa(8.0 / 3.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn kappa_half_round_trips() {
        let v = kappa_of_c(0.5).unwrap();
        assert!(((6.0 - v) * (3.0 * v - 8.0) / (2.0 * v) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn xi_domain() {
        assert!(xi(0.0, 0.5).is_err());
        assert!(xi(0.0, 0.625).is_ok());
        assert!(xi(1.0, 0.25).is_ok());
        assert!(xi(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn xi_double_point_value() {
        // (47 - sqrt 97)/24 from a 30-digit evaluation
        let expected = 1.547_964_258_258_495_6;
        assert!((xi(0.0, 4.0).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn dims_endpoints() {
        let d = predicted_dimensions(0.0).unwrap();
        assert!((d.d0 - 4.0 / 3.0).abs() < 1e-14);
        assert!((d.d1 - 4.0 / 3.0).abs() < 1e-14);
        assert!((d.d2 - (2.0 - 1.547_964_258_258_495_6)).abs() < 1e-14);
        let d = predicted_dimensions(1.0).unwrap();
        assert_eq!((d.d0, d.d1, d.d2, d.d2_clamped), (1.5, 1.0, 0.0, false));
    }

    #[test]
    fn table_has_eleven_rows() {
        let t = formula_table(10).unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t[0].c, 0.0);
        assert_eq!(t[10].c, 1.0);
    }
}
