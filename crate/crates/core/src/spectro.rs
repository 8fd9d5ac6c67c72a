//! Detuning-dependent coupling constants and scattering probability of the
//! atom–light interface.
//!
//! The probe addresses the three excited hyperfine lines reachable from the
//! f = 1 ground state on the ⁸⁷Rb D₂ transition. Each line contributes a
//! regularized resonance profile `δ_i(Δ) = 1/√(Γ² + (Δ − Δ_i)²)`; weighted
//! combinations of the three profiles give the vector coupling `κ1` (Faraday
//! rotation per unit spin orientation), the tensor coupling `κ2` (alignment
//! coupling), and the single-photon scattering probability `η_γ`.
//!
//! All spectroscopic quantities are linear frequencies in MHz; only ratios of
//! them enter the formulas, so the 2π convention cancels throughout.

use thiserror::Error;

use crate::real::Real;

/// Probe wavelength of the ⁸⁷Rb D₂ line, meters.
pub const RB87_D2_WAVELENGTH_M: f64 = 780.241e-9;
/// Natural linewidth Γ/2π of the D₂ transition, MHz.
pub const RB87_D2_LINEWIDTH_MHZ: f64 = 6.1;
/// F′=1 resonance offset from F′=0, MHz.
pub const RB87_D2_LINE1_OFFSET_MHZ: f64 = 72.218;
/// F′=2 resonance offset from F′=0, MHz.
pub const RB87_D2_LINE2_OFFSET_MHZ: f64 = 229.165;
/// Default effective atom–light interaction area, m².
pub const DEFAULT_INTERACTION_AREA_M2: f64 = 4.1e-9;
/// Default scattering correction factor k (fraction of scattering events
/// that change the state).
pub const DEFAULT_K_CORRECTION: f64 = 0.4;

/// Scattering damage above this level is outside the validity range of the
/// single-pass noise-reduction estimate.
pub const ETA_SC_VALIDITY_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectroError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("line offsets must start at zero and increase strictly, got {0:?}")]
    BadLineOffsets([f64; 3]),
    #[error("k_correction must lie in (0, 1], got {0}")]
    BadKCorrection(f64),
    #[error("photon number must be non-negative, got {0}")]
    NegativePhotons(f64),
}

/// Atomic line data and beam geometry from which the couplings derive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingModel<R: Real> {
    /// Natural linewidth Γ/2π, MHz.
    pub gamma: R,
    /// Detunings of the F′ = 0, 1, 2 resonances measured from F′ = 0, MHz.
    pub line_offsets: [R; 3],
    /// Probe wavelength, meters.
    pub wavelength: R,
    /// Effective interaction area A, m².
    pub interaction_area: R,
    /// Scattering correction factor k, dimensionless.
    pub k_correction: R,
}

/// The couplings of one detuning point.
///
/// `kappa1` and `kappa2` are signed; every variance budget uses their squares,
/// so the sign only matters when reporting signal direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingValues<R: Real> {
    /// Vector (Faraday) coupling, rad/spin.
    pub kappa1: R,
    /// Tensor (alignment) coupling, rad/spin.
    pub kappa2: R,
    /// Single-photon scattering probability, dimensionless.
    pub eta_gamma: R,
}

/// Scattering damage accumulated over a pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringDamage<R: Real> {
    /// k · η_γ · N_L, dimensionless.
    pub eta_sc: R,
    /// False once η_sc exceeds the small-damage validity limit of 0.5.
    pub within_validity: bool,
    /// False once η_sc exceeds 1 (unphysical regime; value is not clamped).
    pub physical: bool,
}

impl<R: Real> CouplingModel<R> {
    pub fn new(
        gamma: R,
        line_offsets: [R; 3],
        wavelength: R,
        interaction_area: R,
        k_correction: R,
    ) -> Result<Self, SpectroError> {
        for (name, value) in [
            ("gamma", gamma),
            ("wavelength", wavelength),
            ("interaction_area", interaction_area),
        ] {
            if !(value > R::zero()) || !value.is_finite() {
                return Err(SpectroError::NonPositive {
                    name,
                    value: value.as_f64(),
                });
            }
        }
        if line_offsets[0] != R::zero()
            || !(line_offsets[1] > line_offsets[0])
            || !(line_offsets[2] > line_offsets[1])
        {
            return Err(SpectroError::BadLineOffsets([
                line_offsets[0].as_f64(),
                line_offsets[1].as_f64(),
                line_offsets[2].as_f64(),
            ]));
        }
        if !(k_correction > R::zero()) || k_correction > R::one() {
            return Err(SpectroError::BadKCorrection(k_correction.as_f64()));
        }
        Ok(Self {
            gamma,
            line_offsets,
            wavelength,
            interaction_area,
            k_correction,
        })
    }

    /// Standard ⁸⁷Rb D₂ line data with the default beam geometry.
    pub fn rb87_d2() -> Self {
        Self::new(
            R::val(RB87_D2_LINEWIDTH_MHZ),
            [
                R::zero(),
                R::val(RB87_D2_LINE1_OFFSET_MHZ),
                R::val(RB87_D2_LINE2_OFFSET_MHZ),
            ],
            R::val(RB87_D2_WAVELENGTH_M),
            R::val(DEFAULT_INTERACTION_AREA_M2),
            R::val(DEFAULT_K_CORRECTION),
        )
        .expect("built-in line data is valid")
    }

    /// Resonant scattering cross section σ0 = λ²/π, m².
    pub fn sigma0(&self) -> R {
        self.wavelength * self.wavelength / R::val(std::f64::consts::PI)
    }

    /// On-resonance optical depth of `n_atoms` atoms in the beam,
    /// OD = N_A σ0 / A.
    pub fn optical_depth(&self, n_atoms: R) -> R {
        n_atoms * self.sigma0() / self.interaction_area
    }

    /// Atom number at a given on-resonance optical depth, N_A = OD · A / σ0.
    pub fn atoms_for_optical_depth(&self, od: R) -> R {
        od * self.interaction_area / self.sigma0()
    }

    /// Regularized inverse distance to line `line`:
    /// δ_i(Δ) = 1/√(Γ² + (Δ − Δ_i)²), in MHz⁻¹.
    ///
    /// Total in the detuning; maximal on resonance with value 1/Γ.
    pub fn lorentz_delta(&self, detuning: R, line: usize) -> R {
        assert!(line < 3, "line index must be 0, 1, or 2");
        let off = detuning - self.line_offsets[line];
        (self.gamma * self.gamma + off * off).sqrt().recip()
    }

    fn prefactor(&self) -> R {
        self.sigma0() / self.interaction_area * self.gamma / R::val(16.0)
    }

    /// Vector coupling κ1(Δ), rad/spin. Falls off as 1/Δ far from the lines.
    pub fn kappa1(&self, detuning: R) -> R {
        let d0 = self.lorentz_delta(detuning, 0);
        let d1 = self.lorentz_delta(detuning, 1);
        let d2 = self.lorentz_delta(detuning, 2);
        self.prefactor() * (R::val(-4.0) * d0 - R::val(5.0) * d1 + R::val(5.0) * d2)
    }

    /// Tensor coupling κ2(Δ), rad/spin. Falls off as 1/Δ² far from the lines.
    pub fn kappa2(&self, detuning: R) -> R {
        let d0 = self.lorentz_delta(detuning, 0);
        let d1 = self.lorentz_delta(detuning, 1);
        let d2 = self.lorentz_delta(detuning, 2);
        self.prefactor() * (R::val(4.0) * d0 - R::val(5.0) * d1 + d2)
    }

    /// Probability of scattering a single probe photon, η_γ(Δ).
    ///
    /// Strictly positive for all detunings; falls off as 1/Δ².
    pub fn eta_gamma(&self, detuning: R) -> R {
        let d0 = self.lorentz_delta(detuning, 0);
        let d1 = self.lorentz_delta(detuning, 1);
        let d2 = self.lorentz_delta(detuning, 2);
        let bracket =
            R::val(4.0) * d0 * d0 + R::val(5.0) * d1 * d1 + R::val(7.0) * d2 * d2;
        self.sigma0() / self.interaction_area * self.gamma * self.gamma / R::val(64.0) * bracket
    }

    /// All three couplings of one detuning point.
    pub fn couplings(&self, detuning: R) -> CouplingValues<R> {
        CouplingValues {
            kappa1: self.kappa1(detuning),
            kappa2: self.kappa2(detuning),
            eta_gamma: self.eta_gamma(detuning),
        }
    }

    /// Scattering damage η_sc = k η_γ N_L after a pulse of `photons` photons.
    pub fn eta_sc(&self, detuning: R, photons: R) -> Result<ScatteringDamage<R>, SpectroError> {
        if photons < R::zero() {
            return Err(SpectroError::NegativePhotons(photons.as_f64()));
        }
        let eta_sc = self.k_correction * self.eta_gamma(detuning) * photons;
        Ok(ScatteringDamage {
            eta_sc,
            within_validity: eta_sc <= R::val(ETA_SC_VALIDITY_LIMIT),
            physical: eta_sc <= R::one(),
        })
    }
}
