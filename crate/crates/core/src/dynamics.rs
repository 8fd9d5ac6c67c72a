//! Gaussian input–output maps of a single probe pulse, and a Monte-Carlo
//! sampling oracle that verifies the covariance algebra by brute force.
//!
//! To second order in the macroscopic Stokes component, a pulse transforms
//! the detected observables as
//!
//! ```text
//! S_z_out = S_z_in + κ2·S_y_in·J_x − κ2·S_x·J_y_in
//! S_y_out = S_y_in + κ1·S_x·J_z_in + (κ1 κ2/2)·S_x²·J_y_in
//! ```
//!
//! with `S_x` and `J_x` treated as classical numbers. Both relations are
//! linear in the fluctuating variables `(S_y, S_z, J_y, J_z)`, so means map
//! affinely and covariances transform by congruence; atomic means are
//! untouched at this order. The rotation signal scaled to spin units,
//! `Φ = (cos θ / κ1 S_x)·S_y_out`, reads the mixed alignment–orientation
//! variable `K_θ = J_z cos θ + J_y sin θ` with `tan θ = κ2 S_x / 2`.
//!
//! These relations are taken as exact; neglected higher-order corrections
//! are outside the model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{self, Mat4};
use crate::real::Real;
use crate::sensitivity::ExperimentConfig;
use crate::spectro::CouplingValues;

/// Indices into the fluctuation vector and its covariance.
pub const SY: usize = 0;
pub const SZ: usize = 1;
pub const JY: usize = 2;
pub const JZ: usize = 3;

/// Indices into the detected-observable vector `(S_y_out, S_z_out, Φ, K_θ)`.
pub const OBS_SY_OUT: usize = 0;
pub const OBS_SZ_OUT: usize = 1;
pub const OBS_PHI: usize = 2;
pub const OBS_K_THETA: usize = 3;

const MC_BLOCK: usize = 1 << 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("input covariance is not symmetric positive semidefinite")]
    NotPositiveSemidefinite,
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(u64),
    #[error("signal slope kappa1*S_x is zero; spin-unit scaling undefined")]
    ZeroSignalSlope,
    #[error("input variance is negative: {0}")]
    NegativeVariance(f64),
}

/// Means and covariance of the joint optical/atomic Gaussian state around a
/// pulse.
///
/// `mean` holds `(S_x, S_y, S_z, J_y, J_z)`; the covariance covers the four
/// fluctuating components `(S_y, S_z, J_y, J_z)` while `S_x` and `J_x` enter
/// only through their means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianJointState<R: Real> {
    pub mean: [R; 5],
    pub cov: Mat4<R>,
    pub j_x: R,
}

impl<R: Real> GaussianJointState<R> {
    /// Fresh coherent probe on a fully pumped ensemble: shot-limited optical
    /// noise `N_L/4`, isotropic projection noise `N_A/4`, no correlations.
    pub fn coherent_input(n_photons: R, n_atoms: R, j_y_mean: R, j_z_mean: R) -> Self {
        let quarter = R::val(0.25);
        let mut cov = [[R::zero(); 4]; 4];
        cov[SY][SY] = quarter * n_photons;
        cov[SZ][SZ] = quarter * n_photons;
        cov[JY][JY] = quarter * n_atoms;
        cov[JZ][JZ] = quarter * n_atoms;
        Self {
            mean: [
                n_photons / R::val(2.0),
                R::zero(),
                R::zero(),
                j_y_mean,
                j_z_mean,
            ],
            cov,
            j_x: n_atoms / R::val(2.0),
        }
    }

    pub fn from_experiment(config: &ExperimentConfig<R>) -> Self {
        Self::coherent_input(
            config.n_photons,
            config.n_atoms,
            config.j_y_mean,
            config.j_z_mean,
        )
    }

    pub fn s_x(&self) -> R {
        self.mean[0]
    }
}

/// Mixed alignment–orientation variable actually read by the AOC signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedVariable<R: Real> {
    /// Mixing angle θ = atan(κ2 S_x / 2), rad.
    pub theta: R,
    /// ⟨K_θ⟩, spins.
    pub value_mean: R,
    /// var(K_θ), spins².
    pub value_var: R,
}

/// Linear map acting on the fluctuations `(S_y, S_z, J_y, J_z)` over one
/// pulse.
fn pulse_map<R: Real>(couplings: &CouplingValues<R>, s_x: R, j_x: R) -> Mat4<R> {
    let faraday = couplings.kappa1 * s_x;
    let second_order = couplings.kappa1 * couplings.kappa2 * s_x * s_x / R::val(2.0);
    let mut m = [[R::zero(); 4]; 4];
    m[SY][SY] = R::one();
    m[SY][JZ] = faraday;
    m[SY][JY] = second_order;
    m[SZ][SZ] = R::one();
    m[SZ][SY] = couplings.kappa2 * j_x;
    m[SZ][JY] = -couplings.kappa2 * s_x;
    m[JY][JY] = R::one();
    m[JZ][JZ] = R::one();
    m
}

/// Propagate the mean vector through one pulse; the covariance is left
/// untouched.
pub fn pulse_output_means<R: Real>(
    state: &GaussianJointState<R>,
    couplings: &CouplingValues<R>,
) -> GaussianJointState<R> {
    let [s_x, s_y, s_z, j_y, j_z] = state.mean;
    let m = pulse_map(couplings, s_x, state.j_x);
    let out = linalg::mat_vec(&m, &[s_y, s_z, j_y, j_z]);
    GaussianJointState {
        mean: [s_x, out[SY], out[SZ], j_y, j_z],
        ..*state
    }
}

/// Propagate the covariance through one pulse by congruence with the pulse
/// map, including the optical–atomic cross covariances needed downstream.
pub fn pulse_output_cov<R: Real>(
    state: &GaussianJointState<R>,
    couplings: &CouplingValues<R>,
) -> Result<GaussianJointState<R>, DynamicsError> {
    if !linalg::is_psd(&state.cov) {
        return Err(DynamicsError::NotPositiveSemidefinite);
    }
    let m = pulse_map(couplings, state.s_x(), state.j_x);
    Ok(GaussianJointState {
        cov: linalg::congruence(&m, &state.cov),
        ..*state
    })
}

/// Mean and covariance propagated together.
pub fn apply_pulse<R: Real>(
    state: &GaussianJointState<R>,
    couplings: &CouplingValues<R>,
) -> Result<GaussianJointState<R>, DynamicsError> {
    let out = pulse_output_cov(state, couplings)?;
    Ok(pulse_output_means(&out, couplings))
}

/// Mixing angle and the statistics of `K_θ` under the given state.
pub fn mixed_variable<R: Real>(
    state: &GaussianJointState<R>,
    couplings: &CouplingValues<R>,
) -> MixedVariable<R> {
    let theta = (couplings.kappa2 * state.s_x() / R::val(2.0)).atan();
    let (sin_t, cos_t) = (theta.sin(), theta.cos());
    let mean = cos_t * state.mean[4] + sin_t * state.mean[3];
    let var = cos_t * cos_t * state.cov[JZ][JZ]
        + sin_t * sin_t * state.cov[JY][JY]
        + R::val(2.0) * sin_t * cos_t * state.cov[JY][JZ];
    MixedVariable { theta, value_mean: mean, value_var: var }
}

/// Faraday signal scaled to spin units, Φ = (cos θ / κ1 S_x) · S_y_out.
pub fn scaled_rotation_signal<R: Real>(
    s_y_out: R,
    theta: R,
    kappa1: R,
    s_x: R,
) -> Result<R, DynamicsError> {
    let slope = kappa1 * s_x;
    if slope == R::zero() {
        return Err(DynamicsError::ZeroSignalSlope);
    }
    Ok(theta.cos() / slope * s_y_out)
}

/// First and second moments of the detected observables
/// `(S_y_out, S_z_out, Φ, K_θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableMoments<R: Real> {
    pub mean: [R; 4],
    pub cov: Mat4<R>,
}

/// Linear map from the input fluctuations to the detected observables.
fn observable_map<R: Real>(
    couplings: &CouplingValues<R>,
    s_x: R,
    j_x: R,
) -> Result<Mat4<R>, DynamicsError> {
    let slope = couplings.kappa1 * s_x;
    if slope == R::zero() {
        return Err(DynamicsError::ZeroSignalSlope);
    }
    let theta = (couplings.kappa2 * s_x / R::val(2.0)).atan();
    let (sin_t, cos_t) = (theta.sin(), theta.cos());
    let gain = cos_t / slope;
    let pulse = pulse_map(couplings, s_x, j_x);
    let mut t = [[R::zero(); 4]; 4];
    t[OBS_SY_OUT] = pulse[SY];
    t[OBS_SZ_OUT] = pulse[SZ];
    for k in 0..4 {
        t[OBS_PHI][k] = gain * pulse[SY][k];
    }
    t[OBS_K_THETA][JY] = sin_t;
    t[OBS_K_THETA][JZ] = cos_t;
    Ok(t)
}

/// Analytic counterpart of [`mc_sample_pulse`]: moments of the detected
/// observables propagated through the linear pulse algebra.
pub fn analytic_observables<R: Real>(
    config: &ExperimentConfig<R>,
    couplings: &CouplingValues<R>,
) -> Result<ObservableMoments<R>, DynamicsError> {
    let state = GaussianJointState::from_experiment(config);
    let t = observable_map(couplings, state.s_x(), state.j_x)?;
    let mean_in = [state.mean[1], state.mean[2], state.mean[3], state.mean[4]];
    Ok(ObservableMoments {
        mean: linalg::mat_vec(&t, &mean_in),
        cov: linalg::congruence(&t, &state.cov),
    })
}

/// Input noise fed to the sampler; the testing hooks override the coherent
/// defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputNoise<R: Real> {
    /// Variance of each transverse Stokes component, photons².
    pub var_stokes: R,
    /// Variance of each transverse spin component, spins².
    pub var_spin: R,
}

impl<R: Real> InputNoise<R> {
    pub fn coherent(n_photons: R, n_atoms: R) -> Self {
        Self {
            var_stokes: n_photons / R::val(4.0),
            var_spin: n_atoms / R::val(4.0),
        }
    }

    /// Noiseless inputs: every sample lands on the mean.
    pub fn zero() -> Self {
        Self { var_stokes: R::zero(), var_spin: R::zero() }
    }
}

/// Sample statistics of the detected observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSampleStats<R: Real> {
    pub n_samples: u64,
    pub mean: [R; 4],
    pub cov: Mat4<R>,
}

/// Paired spin-unit signals of a two-pulse run sharing one atomic noise
/// draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPulseSamples<R: Real> {
    pub phi1: Vec<R>,
    pub phi2: Vec<R>,
}

/// Randomized verification scenarios spanning the operating envelope:
/// log-uniform photon number over [10⁶, 10⁹] and atom number over
/// [10⁴, 10⁷], detuning magnitude uniform over [20, 1000] MHz on either
/// side, with nonzero atomic means and no electronic noise.
pub fn random_verification_scenarios(count: usize, seed: u64) -> Vec<ExperimentConfig<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n_photons = 10f64.powf(rng.gen_range(6.0..9.0));
            let n_atoms = 10f64.powf(rng.gen_range(4.0..7.0));
            let magnitude = rng.gen_range(20.0..1000.0);
            let sign = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            ExperimentConfig {
                n_atoms,
                n_photons,
                detuning: sign * magnitude,
                electronic_noise: 0.0,
                eta_dep: 0.0,
                j_y_mean: 0.02 * n_atoms,
                j_z_mean: -0.01 * n_atoms,
            }
        })
        .collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent, reproducible stream per (seed, task, block).
fn block_rng(seed: u64, domain: u64, block: u64) -> ChaCha8Rng {
    let mixed = splitmix64(seed ^ splitmix64(domain.wrapping_add(block << 1)));
    ChaCha8Rng::seed_from_u64(mixed)
}

#[derive(Clone, Copy)]
struct MomentAccumulator<R: Real> {
    n: u64,
    mean: [R; 4],
    m2: Mat4<R>,
}

impl<R: Real> MomentAccumulator<R> {
    fn new() -> Self {
        Self { n: 0, mean: [R::zero(); 4], m2: [[R::zero(); 4]; 4] }
    }

    fn push(&mut self, x: [R; 4]) {
        self.n += 1;
        let n = R::from_u64(self.n).expect("sample count fits scalar");
        let mut delta = [R::zero(); 4];
        for i in 0..4 {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] / n;
        }
        let mut delta2 = [R::zero(); 4];
        for i in 0..4 {
            delta2[i] = x[i] - self.mean[i];
        }
        for i in 0..4 {
            for j in 0..4 {
                self.m2[i][j] += delta[i] * delta2[j];
            }
        }
    }

    /// Exact pairwise combination of two partial moment sums.
    fn merge(mut self, other: Self) -> Self {
        if other.n == 0 {
            return self;
        }
        if self.n == 0 {
            return other;
        }
        let na = R::from_u64(self.n).expect("count fits scalar");
        let nb = R::from_u64(other.n).expect("count fits scalar");
        let n = na + nb;
        let mut delta = [R::zero(); 4];
        for i in 0..4 {
            delta[i] = other.mean[i] - self.mean[i];
        }
        for i in 0..4 {
            self.mean[i] += delta[i] * nb / n;
        }
        let w = na * nb / n;
        for i in 0..4 {
            for j in 0..4 {
                self.m2[i][j] += other.m2[i][j] + delta[i] * delta[j] * w;
            }
        }
        self.n += other.n;
        self
    }

    fn finish(self) -> PulseSampleStats<R> {
        let denom = R::from_u64(self.n - 1).expect("count fits scalar");
        let mut cov = [[R::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                // Symmetrize away single-pass roundoff.
                cov[i][j] = (self.m2[i][j] + self.m2[j][i]) / (R::val(2.0) * denom);
            }
        }
        PulseSampleStats { n_samples: self.n, mean: self.mean, cov }
    }
}

struct PulseSampler<R: Real> {
    s_x: R,
    kappa1: R,
    kappa2: R,
    j_x: R,
    sin_t: R,
    cos_t: R,
    gain: R,
    mean_jy: R,
    mean_jz: R,
    sigma_stokes: R,
    sigma_spin: R,
}

impl<R: Real> PulseSampler<R> {
    fn new(
        config: &ExperimentConfig<R>,
        couplings: &CouplingValues<R>,
        noise: InputNoise<R>,
    ) -> Result<Self, DynamicsError> {
        if noise.var_stokes < R::zero() || noise.var_spin < R::zero() {
            let bad = noise.var_stokes.min(noise.var_spin);
            return Err(DynamicsError::NegativeVariance(bad.as_f64()));
        }
        let s_x = config.s_x();
        let slope = couplings.kappa1 * s_x;
        if slope == R::zero() {
            return Err(DynamicsError::ZeroSignalSlope);
        }
        let theta = (couplings.kappa2 * s_x / R::val(2.0)).atan();
        Ok(Self {
            s_x,
            kappa1: couplings.kappa1,
            kappa2: couplings.kappa2,
            j_x: config.j_x(),
            sin_t: theta.sin(),
            cos_t: theta.cos(),
            gain: theta.cos() / slope,
            mean_jy: config.j_y_mean,
            mean_jz: config.j_z_mean,
            sigma_stokes: noise.var_stokes.sqrt(),
            sigma_spin: noise.var_spin.sqrt(),
        })
    }

    fn draw<Rng_: Rng>(&self, rng: &mut Rng_) -> (R, R, R, R) {
        let normal = |rng: &mut Rng_| R::val(rng.sample::<f64, _>(StandardNormal));
        let s_y = self.sigma_stokes * normal(rng);
        let s_z = self.sigma_stokes * normal(rng);
        let j_y = self.mean_jy + self.sigma_spin * normal(rng);
        let j_z = self.mean_jz + self.sigma_spin * normal(rng);
        (s_y, s_z, j_y, j_z)
    }

    /// One pulse pushed through the update equations, term by term.
    fn observe(&self, s_y: R, s_z: R, j_y: R, j_z: R) -> [R; 4] {
        let s_y_out = s_y
            + self.kappa1 * self.s_x * j_z
            + self.kappa1 * self.kappa2 / R::val(2.0) * self.s_x * self.s_x * j_y;
        let s_z_out = s_z + self.kappa2 * (s_y * self.j_x - self.s_x * j_y);
        let phi = self.gain * s_y_out;
        let k_theta = self.cos_t * j_z + self.sin_t * j_y;
        [s_y_out, s_z_out, phi, k_theta]
    }
}

/// Draw `n_samples` coherent-input pulses and return the sample moments of
/// the detected observables. Deterministic for a fixed `(seed, n_samples)`
/// regardless of thread count.
pub fn mc_sample_pulse<R: Real>(
    config: &ExperimentConfig<R>,
    couplings: &CouplingValues<R>,
    n_samples: u64,
    seed: u64,
) -> Result<PulseSampleStats<R>, DynamicsError> {
    mc_sample_pulse_with_noise(
        config,
        couplings,
        InputNoise::coherent(config.n_photons, config.n_atoms),
        n_samples,
        seed,
    )
}

/// [`mc_sample_pulse`] with explicit input noise (testing hook).
pub fn mc_sample_pulse_with_noise<R: Real>(
    config: &ExperimentConfig<R>,
    couplings: &CouplingValues<R>,
    noise: InputNoise<R>,
    n_samples: u64,
    seed: u64,
) -> Result<PulseSampleStats<R>, DynamicsError> {
    if n_samples < 2 {
        return Err(DynamicsError::TooFewSamples(n_samples));
    }
    let sampler = PulseSampler::new(config, couplings, noise)?;
    let blocks = n_samples.div_ceil(MC_BLOCK as u64);
    let partials: Vec<MomentAccumulator<R>> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = block_rng(seed, 0x5053, block);
            let start = block * MC_BLOCK as u64;
            let count = (n_samples - start).min(MC_BLOCK as u64);
            let mut acc = MomentAccumulator::new();
            for _ in 0..count {
                let (s_y, s_z, j_y, j_z) = sampler.draw(&mut rng);
                acc.push(sampler.observe(s_y, s_z, j_y, j_z));
            }
            acc
        })
        .collect();
    let merged = partials
        .into_iter()
        .fold(MomentAccumulator::new(), MomentAccumulator::merge);
    Ok(merged.finish())
}

/// Two probe pulses sharing a single draw of the atomic noise, each with
/// independent optical shot noise. With a nonzero configured electronic
/// noise, an independent detector-noise draw (variance EN, photon units) is
/// added to each detected `S_y_out`.
pub fn mc_two_pulse<R: Real>(
    config: &ExperimentConfig<R>,
    couplings: &CouplingValues<R>,
    n_samples: u64,
    seed: u64,
) -> Result<TwoPulseSamples<R>, DynamicsError> {
    if n_samples < 2 {
        return Err(DynamicsError::TooFewSamples(n_samples));
    }
    let noise = InputNoise::coherent(config.n_photons, config.n_atoms);
    let sampler = PulseSampler::new(config, couplings, noise)?;
    let sigma_en = config.electronic_noise.max(R::zero()).sqrt();
    let n = n_samples as usize;
    let mut phi1 = vec![R::zero(); n];
    let mut phi2 = vec![R::zero(); n];
    phi1.par_chunks_mut(MC_BLOCK)
        .zip(phi2.par_chunks_mut(MC_BLOCK))
        .enumerate()
        .for_each(|(block, (chunk1, chunk2))| {
            let mut rng = block_rng(seed, 0x2B50, block as u64);
            for (p1, p2) in chunk1.iter_mut().zip(chunk2.iter_mut()) {
                let normal = |rng: &mut ChaCha8Rng| R::val(rng.sample::<f64, _>(StandardNormal));
                let j_y = sampler.mean_jy + sampler.sigma_spin * normal(&mut rng);
                let j_z = sampler.mean_jz + sampler.sigma_spin * normal(&mut rng);
                for slot in [&mut *p1, &mut *p2] {
                    let s_y = sampler.sigma_stokes * normal(&mut rng);
                    let s_z = sampler.sigma_stokes * normal(&mut rng);
                    let out = sampler.observe(s_y, s_z, j_y, j_z);
                    let detected = out[OBS_SY_OUT] + sigma_en * normal(&mut rng);
                    *slot = sampler.gain * detected;
                }
            }
        });
    Ok(TwoPulseSamples { phi1, phi2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    type Config = ExperimentConfig<f64>;

    fn paper_couplings() -> CouplingValues<f64> {
        CouplingValues { kappa1: 1.47e-7, kappa2: 7.54e-9, eta_gamma: 8.9e-10 }
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn quiet_input_stays_quiet() {
        let state = GaussianJointState::coherent_input(2e8, 5.6e5, 0.0, 0.0);
        let out = pulse_output_means(&state, &paper_couplings());
        assert_eq!(out.mean[1], 0.0);
        assert_eq!(out.mean[2], 0.0);
    }

    #[test]
    fn second_order_signal_at_reference_parameters() {
        let state = GaussianJointState::coherent_input(2e8, 5.6e5, 1.9e4, 0.0);
        let out = pulse_output_means(&state, &paper_couplings());
        // (κ1 κ2 / 2) S_x² J_y with S_x = 1e8.
        assert!(rel_err(out.mean[1], 1.053e5) < 1e-3);
        // Atomic means are untouched at this order.
        assert_eq!(out.mean[3], 1.9e4);
        assert_eq!(out.mean[4], 0.0);
    }

    #[test]
    fn without_tensor_coupling_the_signal_is_pure_faraday_rotation() {
        let couplings = CouplingValues { kappa2: 0.0, ..paper_couplings() };
        let state = GaussianJointState::coherent_input(2e8, 5.6e5, 1.9e4, 37.0);
        let out = pulse_output_means(&state, &couplings);
        assert!(rel_err(out.mean[1], couplings.kappa1 * 1e8 * 37.0) < 1e-14);
    }

    #[test]
    fn mean_map_is_linear_in_the_fluctuating_components() {
        let couplings = paper_couplings();
        let base = GaussianJointState::coherent_input(2e8, 5.6e5, 0.0, 0.0);
        let mut a = base;
        a.mean = [1e8, 120.0, -40.0, 1.7e4, 300.0];
        let mut b = base;
        b.mean = [1e8, -55.0, 12.0, -5e3, 90.0];
        let mut sum = base;
        for i in 1..5 {
            sum.mean[i] = a.mean[i] + b.mean[i];
        }
        let out_a = pulse_output_means(&a, &couplings);
        let out_b = pulse_output_means(&b, &couplings);
        let out_sum = pulse_output_means(&sum, &couplings);
        for i in 1..5 {
            let superposed = out_a.mean[i] + out_b.mean[i];
            assert!((out_sum.mean[i] - superposed).abs() <= 1e-9 * superposed.abs().max(1.0));
        }
    }

    #[test]
    fn zero_couplings_leave_the_covariance_unchanged() {
        let couplings = CouplingValues { kappa1: 0.0, kappa2: 0.0, eta_gamma: 0.0 };
        let state = GaussianJointState::coherent_input(2e8, 5.6e5, 0.0, 0.0);
        let out = pulse_output_cov(&state, &couplings).unwrap();
        assert_eq!(out.cov, state.cov);
    }

    #[test]
    fn output_variances_match_the_quadratic_forms() {
        let couplings = paper_couplings();
        let (nl, na) = (2e8, 5.6e5);
        let state = GaussianJointState::coherent_input(nl, na, 1.9e4, 0.0);
        let out = pulse_output_cov(&state, &couplings).unwrap();
        let s_x = state.s_x();
        let (k1, k2) = (couplings.kappa1, couplings.kappa2);

        let var_sy = nl / 4.0 + k1 * k1 * s_x * s_x * na / 4.0
            + k1 * k1 * k2 * k2 * s_x.powi(4) * na / 16.0;
        assert!(rel_err(out.cov[SY][SY], var_sy) < 1e-12);

        let var_sz = nl / 4.0 + k2 * k2 * state.j_x * state.j_x * nl / 4.0
            + k2 * k2 * s_x * s_x * na / 4.0;
        assert!(rel_err(out.cov[SZ][SZ], var_sz) < 1e-12);

        // Cross covariances used by the conditional-variance estimator.
        assert!(rel_err(out.cov[SY][JZ], k1 * s_x * na / 4.0) < 1e-12);
        let c2 = k1 * k2 * s_x * s_x / 2.0;
        assert!(rel_err(out.cov[SY][JY], c2 * na / 4.0) < 1e-12);
        assert!(rel_err(out.cov[SZ][JY], -k2 * s_x * na / 4.0) < 1e-12);
    }

    #[test]
    fn apply_pulse_combines_mean_and_covariance_updates() {
        let couplings = paper_couplings();
        let state = GaussianJointState::coherent_input(2e8, 5.6e5, 1.9e4, 0.0);
        let combined = apply_pulse(&state, &couplings).unwrap();
        let expected_mean = pulse_output_means(&state, &couplings).mean;
        let expected_cov = pulse_output_cov(&state, &couplings).unwrap().cov;
        assert_eq!(combined.mean, expected_mean);
        assert_eq!(combined.cov, expected_cov);
        assert_eq!(combined.j_x, state.j_x);
    }

    #[test]
    fn pulse_preserves_positive_semidefiniteness() {
        // Congruence with any map keeps a covariance PSD; exercised with a
        // correlated (but valid) input.
        let couplings = paper_couplings();
        let mut state = GaussianJointState::coherent_input(2e8, 5.6e5, 0.0, 0.0);
        state.cov[JY][JZ] = 0.3 * state.cov[JY][JY];
        state.cov[JZ][JY] = state.cov[JY][JZ];
        let out = pulse_output_cov(&state, &couplings).unwrap();
        assert!(crate::linalg::is_psd(&out.cov));
        // A second pulse keeps the conditioned state valid as well.
        let out2 = pulse_output_cov(&out, &couplings).unwrap();
        assert!(crate::linalg::is_psd(&out2.cov));
    }

    #[test]
    fn non_psd_covariance_is_rejected() {
        let mut state = GaussianJointState::coherent_input(2e8, 5.6e5, 0.0, 0.0);
        state.cov[SY][SZ] = 1e9;
        state.cov[SZ][SY] = 1e9;
        assert!(matches!(
            pulse_output_cov(&state, &paper_couplings()),
            Err(DynamicsError::NotPositiveSemidefinite)
        ));
    }

    #[test]
    fn mixed_variable_limits_and_isotropy() {
        let couplings = paper_couplings();
        let mut state = GaussianJointState::coherent_input(0.0, 5.6e5, 2e3, 7e3);
        // No light: zero mixing angle, K_θ reduces to J_z.
        let k = mixed_variable(&state, &couplings);
        assert_eq!(k.theta, 0.0);
        assert_eq!(k.value_mean, 7e3);
        assert!(rel_err(k.value_var, 5.6e5 / 4.0) < 1e-12);

        // Strong tensor rotation: θ → π/2 and K_θ → J_y.
        state.mean[0] = 1e12;
        let k = mixed_variable(&state, &couplings);
        assert!((k.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
        assert!(rel_err(k.value_mean, 2e3) < 1e-3);

        // Isotropic atomic input: var(K_θ) = N_A/4 for any angle.
        for nl in [1e6, 5e7, 2e8, 3e9] {
            state.mean[0] = nl / 2.0;
            let k = mixed_variable(&state, &couplings);
            assert!(rel_err(k.value_var, 5.6e5 / 4.0) < 1e-12);
        }
    }

    #[test]
    fn scaled_signal_edge_cases() {
        assert_eq!(scaled_rotation_signal(0.0, 0.3, 1.47e-7, 1e8).unwrap(), 0.0);
        assert_eq!(scaled_rotation_signal(42.0, 0.0, 1.0, 1.0).unwrap(), 42.0);
        assert!(matches!(
            scaled_rotation_signal(1.0, 0.0, 0.0, 1e8),
            Err(DynamicsError::ZeroSignalSlope)
        ));
    }

    #[test]
    fn scaled_signal_variance_and_faithfulness() {
        let couplings = paper_couplings();
        let config = Config::default();
        let obs = analytic_observables(&config, &couplings).unwrap();
        let state = GaussianJointState::from_experiment(&config);
        let theta = mixed_variable(&state, &couplings).theta;
        let slope = couplings.kappa1 * state.s_x();
        let var_phi =
            theta.cos().powi(2) / slope.powi(2) * (config.n_photons / 4.0) + config.n_atoms / 4.0;
        assert!(rel_err(obs.cov[OBS_PHI][OBS_PHI], var_phi) < 1e-12);
        // The signal reads the mixed variable: cov(Φ, K_θ) = var(K_θ).
        assert!(rel_err(obs.cov[OBS_PHI][OBS_K_THETA], obs.cov[OBS_K_THETA][OBS_K_THETA]) < 1e-12);
        assert!(rel_err(obs.mean[OBS_PHI], obs.mean[OBS_K_THETA]) < 1e-12);
    }

    #[test]
    fn sampler_is_deterministic_for_a_fixed_seed() {
        let config = Config::default();
        let couplings = paper_couplings();
        let a = mc_sample_pulse(&config, &couplings, 40_000, 7).unwrap();
        let b = mc_sample_pulse(&config, &couplings, 40_000, 7).unwrap();
        assert_eq!(a, b);
        let c = mc_sample_pulse(&config, &couplings, 40_000, 8).unwrap();
        assert!(a.cov[OBS_SY_OUT][OBS_SY_OUT] != c.cov[OBS_SY_OUT][OBS_SY_OUT]);
    }

    #[test]
    fn zero_input_noise_collapses_every_sample_onto_the_mean() {
        let config = Config::default();
        let couplings = paper_couplings();
        let stats =
            mc_sample_pulse_with_noise(&config, &couplings, InputNoise::zero(), 10_000, 3).unwrap();
        let analytic = analytic_observables(&config, &couplings).unwrap();
        for i in 0..4 {
            assert!(rel_err(stats.mean[i], analytic.mean[i]) < 1e-12);
            for j in 0..4 {
                assert_eq!(stats.cov[i][j], 0.0);
            }
        }
    }

    #[test]
    fn sample_variance_tracks_the_analytic_variance() {
        let config = Config::default();
        let couplings = paper_couplings();
        let stats = mc_sample_pulse(&config, &couplings, 1_000_000, 20260808).unwrap();
        let analytic = analytic_observables(&config, &couplings).unwrap();
        assert!(
            rel_err(stats.cov[OBS_SY_OUT][OBS_SY_OUT], analytic.cov[OBS_SY_OUT][OBS_SY_OUT]) < 0.01
        );
        assert!(
            rel_err(stats.cov[OBS_PHI][OBS_PHI], analytic.cov[OBS_PHI][OBS_PHI]) < 0.01
        );
        assert!(rel_err(stats.mean[OBS_PHI], analytic.mean[OBS_PHI]) < 0.01);
    }

    #[test]
    fn too_few_samples_is_rejected() {
        let config = Config::default();
        assert!(matches!(
            mc_sample_pulse(&config, &paper_couplings(), 1, 0),
            Err(DynamicsError::TooFewSamples(1))
        ));
        assert!(matches!(
            mc_two_pulse(&config, &paper_couplings(), 0, 0),
            Err(DynamicsError::TooFewSamples(0))
        ));
    }

    #[test]
    fn two_pulse_signals_share_only_the_atomic_noise() {
        let config = Config { electronic_noise: 0.0, ..Config::default() };
        let couplings = paper_couplings();
        let samples = mc_two_pulse(&config, &couplings, 400_000, 99).unwrap();
        let n = samples.phi1.len() as f64;
        let m1: f64 = samples.phi1.iter().sum::<f64>() / n;
        let m2: f64 = samples.phi2.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        for (a, b) in samples.phi1.iter().zip(&samples.phi2) {
            cov += (a - m1) * (b - m2);
        }
        cov /= n - 1.0;
        // Shared part is var(K_θ) = N_A/4.
        assert!(rel_err(cov, config.n_atoms / 4.0) < 0.02);
    }
}
