//! Closed-form measurement-uncertainty budgets for the two readout
//! strategies, the crossover photon number, and scaling-exponent fits.
//!
//! Both strategies probe with the same coherent, fully x-polarized pulse
//! (`S_x = N_L/2` with shot-limited transverse Stokes noise `N_L/4`) on an
//! ensemble with transverse projection noise `N_A/4`. Error propagation of
//! the pulse input–output relations gives, referred to the alignment input,
//!
//! - LTE:  (ΔJ_y)² = 1/(κ2² N_L) + N_A²/(4 N_L) + N_A/4
//! - AOC:  (ΔJ_y)² = 16/(κ1² κ2² N_L³) + 4 N_A/(κ2² N_L²) + N_A/4
//!
//! The last term of each is the variance of the signal itself, which the
//! budget reports but removes from the quoted uncertainty. Detector
//! electronic noise enters referred to the interferometer input, divided by
//! the squared signal slope of the strategy.

use thiserror::Error;

use crate::fit;
use crate::real::Real;
use crate::spectro::CouplingValues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Aoc,
    Lte,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Aoc, Strategy::Lte];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Aoc => "aoc",
            Strategy::Lte => "lte",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aoc" => Ok(Strategy::Aoc),
            "lte" => Ok(Strategy::Lte),
            other => Err(format!("unknown strategy `{other}` (expected aoc or lte)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensitivityError {
    #[error("{name} violates constraint {constraint}, got {value}")]
    Constraint {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },
    #[error("photon number is zero: measurement variance is infinite")]
    InfiniteVariance,
    #[error("kappa1 is zero: no crossover exists")]
    NoCrossover,
    #[error(transparent)]
    Fit(#[from] fit::FitError),
}

/// Full parameter set of one measurement scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig<R: Real> {
    /// Atom number N_A.
    pub n_atoms: R,
    /// Photons per pulse N_L.
    pub n_photons: R,
    /// Probe detuning from the F′=0 line, MHz.
    pub detuning: R,
    /// Detector electronic noise referred to the interferometer input,
    /// photon-number-equivalent variance (photons²).
    pub electronic_noise: R,
    /// Non-scattering depolarization per measurement, dimensionless.
    pub eta_dep: R,
    /// Mean spin alignment J_y, spins.
    pub j_y_mean: R,
    /// Mean spin orientation J_z, spins.
    pub j_z_mean: R,
}

impl<R: Real> ExperimentConfig<R> {
    pub fn validate(&self) -> Result<(), SensitivityError> {
        let checks: [(&'static str, R, &'static str, bool); 4] = [
            ("n_atoms", self.n_atoms, "> 0", self.n_atoms > R::zero()),
            ("n_photons", self.n_photons, ">= 0", self.n_photons >= R::zero()),
            (
                "electronic_noise",
                self.electronic_noise,
                ">= 0",
                self.electronic_noise >= R::zero(),
            ),
            (
                "eta_dep",
                self.eta_dep,
                "in [0, 1)",
                self.eta_dep >= R::zero() && self.eta_dep < R::one(),
            ),
        ];
        for (name, value, constraint, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(SensitivityError::Constraint {
                    name,
                    constraint,
                    value: value.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Mean input alignment J_x = N_A/2 of the fully pumped ensemble.
    pub fn j_x(&self) -> R {
        self.n_atoms / R::val(2.0)
    }

    /// Mean input Stokes component S_x = N_L/2 of the fully polarized pulse.
    pub fn s_x(&self) -> R {
        self.n_photons / R::val(2.0)
    }
}

impl<R: Real> Default for ExperimentConfig<R> {
    /// Reference scenario of the measurement campaign: 5.6×10⁵ atoms probed
    /// 600 MHz to the red with 2×10⁸ photons per pulse.
    fn default() -> Self {
        Self {
            n_atoms: R::val(5.6e5),
            n_photons: R::val(2e8),
            detuning: R::val(-600.0),
            electronic_noise: R::val(9.2e5),
            eta_dep: R::val(0.034),
            j_y_mean: R::val(1.9e4),
            j_z_mean: R::zero(),
        }
    }
}

/// How much of the LTE budget to retain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LteMode {
    /// Shot-noise term only: the quantum limit of an ideal linear readout.
    Ideal,
    /// Shot noise plus the anti-polarization projection term.
    Full,
    /// As `Full`, additionally charging the configured electronic noise to
    /// the ellipticity detector.
    FullWithElectronic,
}

/// Variance budget of a single measurement, all terms in spins².
///
/// `delta_jy` is the square root of the retained readout terms; the
/// projection noise of the signal itself (`var_signal_subtracted`) is
/// reported but never included. The identity
/// `delta_jy² = var_readout_shot + var_readout_projection + var_electronic`
/// holds exactly, with terms the chosen mode excludes set to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityReport<R: Real> {
    pub strategy: Strategy,
    pub var_readout_shot: R,
    pub var_readout_projection: R,
    pub var_electronic: R,
    pub var_signal_subtracted: R,
    pub delta_jy: R,
}

impl<R: Real> SensitivityReport<R> {
    fn assemble(
        strategy: Strategy,
        shot: R,
        projection: R,
        electronic: R,
        signal: R,
    ) -> Self {
        Self {
            strategy,
            var_readout_shot: shot,
            var_readout_projection: projection,
            var_electronic: electronic,
            var_signal_subtracted: signal,
            delta_jy: (shot + projection + electronic).sqrt(),
        }
    }
}

/// LTE measurement uncertainty for the alignment J_y.
pub fn var_jy_lte<R: Real>(
    config: &ExperimentConfig<R>,
    couplings: &CouplingValues<R>,
    mode: LteMode,
) -> Result<SensitivityReport<R>, SensitivityError> {
    config.validate()?;
    if config.n_photons <= R::zero() {
        return Err(SensitivityError::InfiniteVariance);
    }
    let nl = config.n_photons;
    let na = config.n_atoms;
    let k2sq = couplings.kappa2 * couplings.kappa2;
    let shot = (k2sq * nl).recip();
    let projection = match mode {
        LteMode::Ideal => R::zero(),
        _ => na * na / (R::val(4.0) * nl),
    };
    let electronic = match mode {
        // Electronic noise referred through the ellipticity slope κ2·S_x.
        LteMode::FullWithElectronic => {
            R::val(4.0) * config.electronic_noise / (k2sq * nl * nl)
        }
        _ => R::zero(),
    };
    Ok(SensitivityReport::assemble(
        Strategy::Lte,
        shot,
        projection,
        electronic,
        na / R::val(4.0),
    ))
}

/// AOC measurement uncertainty for the alignment J_y.
///
/// The electronic-noise term uses the configured detector noise referred
/// through the squared AOC signal slope κ1 κ2 N_L²/8.
pub fn var_jy_aoc<R: Real>(
    config: &ExperimentConfig<R>,
    couplings: &CouplingValues<R>,
) -> Result<SensitivityReport<R>, SensitivityError> {
    config.validate()?;
    if config.n_photons <= R::zero() {
        return Err(SensitivityError::InfiniteVariance);
    }
    let nl = config.n_photons;
    let na = config.n_atoms;
    let k1sq = couplings.kappa1 * couplings.kappa1;
    let k2sq = couplings.kappa2 * couplings.kappa2;
    let shot = R::val(16.0) / (k1sq * k2sq * nl * nl * nl);
    let projection = R::val(4.0) * na / (k2sq * nl * nl);
    let electronic = config.electronic_noise * R::val(64.0) / (k1sq * k2sq * nl.powi(4));
    Ok(SensitivityReport::assemble(
        Strategy::Aoc,
        shot,
        projection,
        electronic,
        na / R::val(4.0),
    ))
}

/// Photon number above which the AOC readout variance (electronic noise
/// excluded) drops below the ideal LTE readout variance:
/// the positive root of N_L² − 4 N_A N_L − 16/κ1² = 0.
pub fn crossover_photons<R: Real>(
    n_atoms: R,
    couplings: &CouplingValues<R>,
) -> Result<R, SensitivityError> {
    if couplings.kappa1 == R::zero() {
        return Err(SensitivityError::NoCrossover);
    }
    let k1sq = couplings.kappa1 * couplings.kappa1;
    let four_na = R::val(4.0) * n_atoms;
    Ok(R::val(2.0) * n_atoms + (four_na * n_atoms + R::val(16.0) / k1sq).sqrt())
}

/// Ordinary least squares of ln ΔJ_y against ln N_L: returns the power-law
/// exponent and its standard error.
pub fn fit_scaling_exponent<R: Real>(points: &[(R, R)]) -> Result<(R, R), SensitivityError> {
    Ok(fit::log_log_slope(points)?)
}
