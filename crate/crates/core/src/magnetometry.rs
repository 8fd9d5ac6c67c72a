//! Larmor-precession signal model and magnetic-field estimation.
//!
//! A bias field along the probe axis rotates the prepared alignment in the
//! J_x–J_y plane at twice the Larmor frequency `ω_L = −γ_F B_z`, so after an
//! evolution time `t` the detectable alignment is
//! `J_y = sin(2 ω_L t) · J_x`. Fitting the proportionality of measured
//! `(J_x, J_y)` pairs inverts this relation for the field.

use thiserror::Error;

use crate::fit;
use crate::real::Real;

/// Gyromagnetic ratio of the ⁸⁷Rb f = 1 ground state, rad s⁻¹ T⁻¹
/// (γ_F/2π ≈ −7.024 Hz/nT; the negative sign follows the g-factor).
pub const RB87_F1_GYROMAGNETIC: f64 = -2.0 * std::f64::consts::PI * 7.024e9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MagnetometryError {
    #[error("evolution time must be positive for a field fit, got {0}")]
    NonPositiveTime(f64),
    #[error("gyromagnetic ratio must be nonzero")]
    ZeroGyromagneticRatio,
    #[error("mean alignment must be positive, got {0}")]
    DegenerateAlignment(f64),
    #[error("fitted rotation exceeds a quarter turn; field is outside the linear-fit domain")]
    RotationOutOfRange,
    #[error(transparent)]
    Fit(#[from] fit::FitError),
}

/// One free-precession scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldScenario<R: Real> {
    /// Bias field along the probe axis, tesla.
    pub b_z: R,
    /// Ground-state gyromagnetic ratio γ_F, rad s⁻¹ T⁻¹.
    pub gyromagnetic_ratio: R,
    /// Free-evolution time between preparation and readout, seconds.
    pub evolution_time: R,
    /// Prepared alignment J_x, spins.
    pub j_x: R,
}

impl<R: Real> FieldScenario<R> {
    pub fn validate(&self) -> Result<(), MagnetometryError> {
        if self.evolution_time < R::zero() {
            return Err(MagnetometryError::NonPositiveTime(
                self.evolution_time.as_f64(),
            ));
        }
        if self.j_x <= R::zero() {
            return Err(MagnetometryError::DegenerateAlignment(self.j_x.as_f64()));
        }
        Ok(())
    }

    /// Larmor frequency ω_L = −γ_F B_z, rad/s.
    pub fn larmor_frequency(&self) -> R {
        -self.gyromagnetic_ratio * self.b_z
    }
}

/// Alignment rotated into J_y after free precession:
/// `J_y = sin(2 ω_L t) · J_x`.
pub fn larmor_jy<R: Real>(scenario: &FieldScenario<R>) -> R {
    let angle = R::val(2.0) * scenario.larmor_frequency() * scenario.evolution_time;
    angle.sin() * scenario.j_x
}

/// Estimate the bias field from `(J_x, J_y)` pairs.
///
/// Fits the proportionality `J_y = m·J_x` through the origin (zero field
/// produces zero alignment rotation) and inverts `m = sin(−2 γ_F B_z t)`
/// exactly; for small rotations this reduces to `B_z = m/(2 |γ_F| t)`.
/// Returns the field and its standard error, tesla.
pub fn fit_bz<R: Real>(
    pairs: &[(R, R)],
    evolution_time: R,
    gyromagnetic_ratio: R,
) -> Result<(R, R), MagnetometryError> {
    if evolution_time <= R::zero() {
        return Err(MagnetometryError::NonPositiveTime(evolution_time.as_f64()));
    }
    if gyromagnetic_ratio == R::zero() {
        return Err(MagnetometryError::ZeroGyromagneticRatio);
    }
    let xs: Vec<R> = pairs.iter().map(|&(x, _)| x).collect();
    let ys: Vec<R> = pairs.iter().map(|&(_, y)| y).collect();
    let fit = fit::proportional_ols(&xs, &ys)?;
    if fit.slope.abs() > R::one() {
        return Err(MagnetometryError::RotationOutOfRange);
    }
    let denominator = R::val(-2.0) * gyromagnetic_ratio * evolution_time;
    let b_z = fit.slope.asin() / denominator;
    // d(asin m)/dm = 1/sqrt(1 - m²); degenerate only at a full quarter turn.
    let gain = (R::one() - fit.slope * fit.slope).sqrt().recip();
    let stderr = (fit.slope_stderr * gain / denominator).abs();
    Ok((b_z, stderr))
}
