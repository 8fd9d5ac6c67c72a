//! Spin-squeezing metrics: measurement signal-to-noise ratio ζ, single-pass
//! noise reduction ξ², metrological (Wineland) squeezing ξ_m², and the
//! conditional-variance estimator for two-pulse measurements.
//!
//! ζ is the ratio of atomic quantum noise to optical shot noise in the
//! detected quadrature. For the AOC readout of `S_y`,
//! `ζ_AOC = (κ1² N_L N_A / 4)(1 + κ2² N_L² / 16)`; for the LTE readout of
//! `S_z` the atomic term of the output variance is `κ2² S_x² N_A/4`, giving
//! `ζ_LTE = κ2² N_L N_A / 4`. A measurement of strength ζ conditionally
//! reduces the probed spin variance by `1/(1+ζ)`, while scattering adds
//! `2 η_sc` of excess noise and costs coherence through the factor
//! `(1 − η_sc)²` of the Wineland criterion.

use thiserror::Error;

use crate::real::Real;
use crate::sensitivity::{ExperimentConfig, SensitivityError, Strategy};
use crate::spectro::{CouplingModel, CouplingValues, SpectroError, ETA_SC_VALIDITY_LIMIT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SqueezingError {
    #[error("damage fraction must lie in [0, 1), got {0}")]
    DamageOutOfRange(f64),
    #[error("mean alignment must be positive, got {0}")]
    DegenerateAlignment(f64),
    #[error("reference signal has zero variance; regression gain undefined")]
    ZeroVarianceReference,
    #[error("need at least 2 paired samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample arrays differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("photon number must be positive for a readout variance")]
    NoPhotons,
    #[error("vector coupling is zero; spin-unit readout undefined")]
    ZeroSignalSlope,
    #[error(transparent)]
    Config(#[from] SensitivityError),
    #[error(transparent)]
    Spectro(#[from] SpectroError),
}

/// Squeezing figures of one measurement scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingReport<R: Real> {
    /// Measurement signal-to-noise ratio.
    pub zeta: R,
    /// Single-pass conditional noise reduction.
    pub xi2: R,
    /// Metrological squeezing parameter (coherence-corrected).
    pub xi2_m: R,
    /// Scattering damage of the probe pulse.
    pub eta_sc: R,
    /// False once η_sc exceeds the small-damage validity limit.
    pub valid: bool,
}

/// Conditional-variance estimate of a two-pulse measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalEstimate<R: Real> {
    /// Regression gain χ = cov(Φ1, Φ2)/var(Φ1).
    pub chi: R,
    /// var(Φ2 − χ Φ1) − var(Φ_RO), spins².
    pub var_conditional: R,
    /// The readout variance that was subtracted, spins².
    pub var_readout_subtracted: R,
}

/// Signal-to-noise ratio of the chosen readout.
pub fn snr_zeta<R: Real>(
    config: &ExperimentConfig<R>,
    couplings: &CouplingValues<R>,
    strategy: Strategy,
) -> R {
    let quarter_power = config.n_photons * config.n_atoms / R::val(4.0);
    match strategy {
        Strategy::Aoc => {
            let base = couplings.kappa1 * couplings.kappa1 * quarter_power;
            let nl = config.n_photons;
            base * (R::one()
                + couplings.kappa2 * couplings.kappa2 * nl * nl / R::val(16.0))
        }
        Strategy::Lte => couplings.kappa2 * couplings.kappa2 * quarter_power,
    }
}

/// Quantum-noise reduction of a single-pass measurement,
/// ξ² = 1/(1+ζ) + 2 η_sc, together with its small-damage validity flag.
pub fn xi2_single_pass<R: Real>(zeta: R, eta_sc: R) -> (R, bool) {
    debug_assert!(zeta >= R::zero() && eta_sc >= R::zero());
    let xi2 = (R::one() + zeta).recip() + R::val(2.0) * eta_sc;
    (xi2, eta_sc <= R::val(ETA_SC_VALIDITY_LIMIT))
}

/// Metrologically significant squeezing, ξ_m² = ξ²/(1 − η_sc)².
pub fn xi2_metrological<R: Real>(xi2: R, eta_sc: R) -> Result<R, SqueezingError> {
    if eta_sc < R::zero() || eta_sc >= R::one() {
        return Err(SqueezingError::DamageOutOfRange(eta_sc.as_f64()));
    }
    let retained = R::one() - eta_sc;
    Ok(xi2 / (retained * retained))
}

/// Wineland criterion from a measured conditional variance:
/// ξ_m² = 2 (ΔK_θ)² J_x / (J_x_out)² with
/// J_x_out = (1 − η_sc)(1 − η_dep) J_x.
pub fn wineland_from_measurement<R: Real>(
    var_k_out: R,
    j_x_in: R,
    eta_sc: R,
    eta_dep: R,
) -> Result<R, SqueezingError> {
    if j_x_in <= R::zero() {
        return Err(SqueezingError::DegenerateAlignment(j_x_in.as_f64()));
    }
    for eta in [eta_sc, eta_dep] {
        if eta < R::zero() || eta >= R::one() {
            return Err(SqueezingError::DamageOutOfRange(eta.as_f64()));
        }
    }
    let retained = (R::one() - eta_sc) * (R::one() - eta_dep);
    Ok(R::val(2.0) * var_k_out / (retained * retained * j_x_in))
}

/// Optical-plus-electronic readout variance referred to spin units,
/// (cos²θ / (κ1 S_x)²) · (N_L/4 + EN).
pub fn subtracted_readout_variance<R: Real>(
    config: &ExperimentConfig<R>,
    couplings: &CouplingValues<R>,
) -> Result<R, SqueezingError> {
    if config.n_photons <= R::zero() {
        return Err(SqueezingError::NoPhotons);
    }
    let s_x = config.s_x();
    let slope = couplings.kappa1 * s_x;
    if slope == R::zero() {
        return Err(SqueezingError::ZeroSignalSlope);
    }
    let theta = (couplings.kappa2 * s_x / R::val(2.0)).atan();
    let cos2 = theta.cos() * theta.cos();
    Ok(cos2 / (slope * slope) * (config.n_photons / R::val(4.0) + config.electronic_noise))
}

/// Full analytic chain ζ → ξ² → ξ_m² at one (N_A, N_L, Δ) point.
pub fn predict<R: Real>(
    model: &CouplingModel<R>,
    n_atoms: R,
    n_photons: R,
    detuning: R,
    strategy: Strategy,
) -> Result<SqueezingReport<R>, SqueezingError> {
    let couplings = model.couplings(detuning);
    predict_from_couplings(&couplings, model.k_correction, n_atoms, n_photons, strategy)
}

/// [`predict`] with explicit couplings (bypasses the line model; used by the
/// optimizer and by testing hooks).
pub fn predict_from_couplings<R: Real>(
    couplings: &CouplingValues<R>,
    k_correction: R,
    n_atoms: R,
    n_photons: R,
    strategy: Strategy,
) -> Result<SqueezingReport<R>, SqueezingError> {
    let config = ExperimentConfig {
        n_atoms,
        n_photons,
        detuning: R::zero(),
        electronic_noise: R::zero(),
        eta_dep: R::zero(),
        j_y_mean: R::zero(),
        j_z_mean: R::zero(),
    };
    config.validate()?;
    let zeta = snr_zeta(&config, couplings, strategy);
    let eta_sc = k_correction * couplings.eta_gamma * n_photons;
    let (xi2, valid) = xi2_single_pass(zeta, eta_sc);
    let xi2_m = xi2_metrological(xi2, eta_sc)?;
    Ok(SqueezingReport { zeta, xi2, xi2_m, eta_sc, valid })
}

/// Conditional variance of the second pulse given the first, from paired
/// spin-unit samples: var(K|Φ1) = var(Φ2 − χ Φ1) − var(Φ_RO) with the
/// regression gain χ = cov(Φ1, Φ2)/var(Φ1).
pub fn conditional_variance<R: Real>(
    phi1: &[R],
    phi2: &[R],
    var_readout: R,
) -> Result<ConditionalEstimate<R>, SqueezingError> {
    if phi1.len() != phi2.len() {
        return Err(SqueezingError::LengthMismatch(phi1.len(), phi2.len()));
    }
    let n = phi1.len();
    if n < 2 {
        return Err(SqueezingError::TooFewSamples(n));
    }
    let nf = R::from_usize(n).expect("sample count fits scalar");
    let mean1 = phi1.iter().copied().sum::<R>() / nf;
    let mean2 = phi2.iter().copied().sum::<R>() / nf;
    let mut var1 = R::zero();
    let mut var2 = R::zero();
    let mut cov = R::zero();
    for (&a, &b) in phi1.iter().zip(phi2) {
        let da = a - mean1;
        let db = b - mean2;
        var1 += da * da;
        var2 += db * db;
        cov += da * db;
    }
    let denom = nf - R::one();
    var1 /= denom;
    var2 /= denom;
    cov /= denom;
    if var1 <= R::zero() {
        return Err(SqueezingError::ZeroVarianceReference);
    }
    let chi = cov / var1;
    // var(Φ2 − χΦ1) = var2 − cov²/var1 by the regression identity.
    let residual = var2 - cov * cov / var1;
    Ok(ConditionalEstimate {
        chi,
        var_conditional: (residual - var_readout).max(R::zero()),
        var_readout_subtracted: var_readout,
    })
}
