//! Photon-budget solving and squeezing optimization over photon number,
//! detuning, and optical depth.
//!
//! Every objective here comes from the analytic chain ζ → ξ² → ξ_m² of the
//! [`squeezing`] module; electronic noise is excluded from
//! optimization. Photon optima are found on a coarse logarithmic grid
//! followed by golden-section refinement inside the best coarse bracket, so
//! unimodality is never assumed. Minima that land on a range edge are
//! reported with a boundary flag rather than rejected.

use rayon::prelude::*;
use thiserror::Error;

use crate::fit;
use crate::real::Real;
use crate::sensitivity::Strategy;
use crate::spectro::{CouplingModel, CouplingValues};
use crate::squeezing::{self, SqueezingError};

/// Grid refinement: points per decade of the coarse photon grid never drop
/// below this many samples overall.
const MIN_COARSE_POINTS: usize = 200;
/// Golden-section tolerance on ln N_L (≈ relative tolerance on N_L).
const GOLDEN_TOL: f64 = 1e-4;
/// Relative tolerance of the projection-noise photon root.
const ROOT_TOL: f64 = 1e-9;
/// Detuning grid steps, MHz: fine near the atomic lines, coarse elsewhere.
const FINE_STEP: f64 = 0.5;
const COARSE_STEP: f64 = 2.0;
const NEAR_LINE_WINDOW: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("photon range must satisfy 0 < min < max, got [{0}, {1}]")]
    BadPhotonRange(f64, f64),
    #[error("grid must be nonempty and strictly increasing")]
    BadGrid,
    #[error("detuning range must satisfy min < max, got [{0}, {1}]")]
    BadDetuningRange(f64, f64),
    #[error("atom number must be positive, got {0}")]
    BadAtomNumber(f64),
    #[error("couplings leave the defining equation without a finite solution")]
    NoSolution,
    #[error("objective is nowhere finite on the requested range")]
    NoFiniteObjective,
    #[error(transparent)]
    Squeezing(#[from] SqueezingError),
    #[error(transparent)]
    Fit(#[from] fit::FitError),
}

/// Logarithmic photon-number window with its grid resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonRange<R: Real> {
    pub min: R,
    pub max: R,
    pub points: usize,
}

impl<R: Real> PhotonRange<R> {
    pub fn new(min: R, max: R, points: usize) -> Result<Self, OptimizerError> {
        if !(min > R::zero()) || !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(OptimizerError::BadPhotonRange(min.as_f64(), max.as_f64()));
        }
        if points < 2 {
            return Err(OptimizerError::BadGrid);
        }
        Ok(Self { min, max, points })
    }

    fn grid(&self) -> Vec<R> {
        let points = self.points.max(MIN_COARSE_POINTS);
        let ln_min = self.min.ln();
        let ln_max = self.max.ln();
        let step = (ln_max - ln_min) / R::from_usize(points - 1).expect("grid size fits scalar");
        (0..points)
            .map(|i| {
                if i == 0 {
                    self.min
                } else if i == points - 1 {
                    self.max
                } else {
                    (ln_min + step * R::from_usize(i).expect("index fits scalar")).exp()
                }
            })
            .collect()
    }
}

/// Scan domain for the optical-depth/detuning landscapes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid<R: Real> {
    pub detunings: Vec<R>,
    pub optical_depths: Vec<R>,
    pub photon_range: PhotonRange<R>,
}

impl<R: Real> ScanGrid<R> {
    pub fn new(
        detunings: Vec<R>,
        optical_depths: Vec<R>,
        photon_range: PhotonRange<R>,
    ) -> Result<Self, OptimizerError> {
        for axis in [&detunings, &optical_depths] {
            if axis.is_empty() || axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(OptimizerError::BadGrid);
            }
        }
        if optical_depths[0] <= R::zero() {
            return Err(OptimizerError::BadGrid);
        }
        Ok(Self { detunings, optical_depths, photon_range })
    }
}

/// One optimized operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumPoint<R: Real> {
    pub strategy: Strategy,
    /// Probe detuning, MHz.
    pub detuning: R,
    /// Optimal photon number.
    pub n_photons: R,
    /// Metrological squeezing at the optimum.
    pub xi2_m: R,
    /// Single-pass noise reduction at the optimum.
    pub xi2: R,
    /// Measurement SNR at the optimum.
    pub zeta: R,
    /// Scattering damage at the optimum.
    pub eta_sc: R,
    /// True when the optimum sits on an edge of the photon range.
    pub at_boundary: bool,
}

fn objective<R: Real>(
    couplings: &CouplingValues<R>,
    k_correction: R,
    n_atoms: R,
    strategy: Strategy,
    n_photons: R,
) -> R {
    let eta_sc = k_correction * couplings.eta_gamma * n_photons;
    if eta_sc >= R::one() {
        return R::infinity();
    }
    let quarter_power = n_photons * n_atoms / R::val(4.0);
    let zeta = match strategy {
        Strategy::Aoc => {
            couplings.kappa1
                * couplings.kappa1
                * quarter_power
                * (R::one()
                    + couplings.kappa2 * couplings.kappa2 * n_photons * n_photons / R::val(16.0))
        }
        Strategy::Lte => couplings.kappa2 * couplings.kappa2 * quarter_power,
    };
    let xi2 = (R::one() + zeta).recip() + R::val(2.0) * eta_sc;
    let retained = R::one() - eta_sc;
    xi2 / (retained * retained)
}

/// Golden-section minimization on ln N_L; on ties the left (smaller N_L)
/// interval survives.
fn golden_section<R: Real, F: Fn(R) -> R>(f: F, mut a: R, mut b: R) -> R {
    let resp = R::val(2.0 - 1.618_033_988_749_895);
    let tol = R::val(GOLDEN_TOL);
    let mut x1 = a + resp * (b - a);
    let mut x2 = b - resp * (b - a);
    let mut f1 = f(x1.exp());
    let mut f2 = f(x2.exp());
    while (b - a).abs() > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + resp * (b - a);
            f1 = f(x1.exp());
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - resp * (b - a);
            f2 = f(x2.exp());
        }
    }
    if f1 <= f2 {
        x1.exp()
    } else {
        x2.exp()
    }
}

/// Minimize ξ_m² over the photon number at fixed couplings.
pub fn optimize_photons_from_couplings<R: Real>(
    couplings: &CouplingValues<R>,
    k_correction: R,
    n_atoms: R,
    detuning: R,
    range: PhotonRange<R>,
    strategy: Strategy,
) -> Result<OptimumPoint<R>, OptimizerError> {
    if !(n_atoms > R::zero()) {
        return Err(OptimizerError::BadAtomNumber(n_atoms.as_f64()));
    }
    let grid = range.grid();
    let f = |n: R| objective(couplings, k_correction, n_atoms, strategy, n);
    let mut best = 0usize;
    let mut best_value = R::infinity();
    for (i, &n) in grid.iter().enumerate() {
        let value = f(n);
        if value < best_value {
            best_value = value;
            best = i;
        }
    }
    if !best_value.is_finite() {
        return Err(OptimizerError::NoFiniteObjective);
    }
    let at_boundary = best == 0 || best == grid.len() - 1;
    let n_opt = if at_boundary {
        grid[best]
    } else {
        golden_section(f, grid[best - 1].ln(), grid[best + 1].ln())
    };
    let report =
        squeezing::predict_from_couplings(couplings, k_correction, n_atoms, n_opt, strategy)?;
    Ok(OptimumPoint {
        strategy,
        detuning,
        n_photons: n_opt,
        xi2_m: report.xi2_m,
        xi2: report.xi2,
        zeta: report.zeta,
        eta_sc: report.eta_sc,
        at_boundary,
    })
}

/// Minimize ξ_m² over the photon number at a fixed detuning.
pub fn optimize_photons<R: Real>(
    model: &CouplingModel<R>,
    detuning: R,
    n_atoms: R,
    range: PhotonRange<R>,
    strategy: Strategy,
) -> Result<OptimumPoint<R>, OptimizerError> {
    let couplings = model.couplings(detuning);
    optimize_photons_from_couplings(
        &couplings,
        model.k_correction,
        n_atoms,
        detuning,
        range,
        strategy,
    )
}

/// Detuning grid with sub-MHz resolution around the atomic lines.
pub fn detuning_grid<R: Real>(
    model: &CouplingModel<R>,
    range: (R, R),
) -> Result<Vec<R>, OptimizerError> {
    let (lo, hi) = range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(OptimizerError::BadDetuningRange(lo.as_f64(), hi.as_f64()));
    }
    let window = R::val(NEAR_LINE_WINDOW);
    let near_line = |x: R| {
        model
            .line_offsets
            .iter()
            .any(|&line| (x - line).abs() < window)
    };
    let mut grid = Vec::new();
    let mut x = lo;
    while x < hi {
        grid.push(x);
        let step = if near_line(x) { FINE_STEP } else { COARSE_STEP };
        x += R::val(step);
    }
    grid.push(hi);
    Ok(grid)
}

/// Outer scan over detuning, inner photon optimization; returns the global
/// minimum of ξ_m². Detunings where no finite objective exists (total damage
/// across the whole photon range) are skipped.
pub fn optimize_detuning_and_photons<R: Real>(
    model: &CouplingModel<R>,
    n_atoms: R,
    detuning_range: (R, R),
    photon_range: PhotonRange<R>,
    strategy: Strategy,
) -> Result<OptimumPoint<R>, OptimizerError> {
    let grid = detuning_grid(model, detuning_range)?;
    let candidates: Vec<Option<OptimumPoint<R>>> = grid
        .par_iter()
        .map(|&detuning| optimize_photons(model, detuning, n_atoms, photon_range, strategy).ok())
        .collect();
    candidates
        .into_iter()
        .flatten()
        .reduce(|best, next| if next.xi2_m < best.xi2_m { next } else { best })
        .ok_or(OptimizerError::NoFiniteObjective)
}

/// Root of `f(n) = target` for a strictly decreasing `f`, by bracket
/// expansion and bisection.
fn solve_decreasing<R: Real, F: Fn(R) -> R>(f: F, target: R) -> Result<R, OptimizerError> {
    let mut lo = R::one();
    let mut guard = 0;
    while f(lo) < target {
        lo /= R::val(10.0);
        guard += 1;
        if guard > 60 {
            return Err(OptimizerError::NoSolution);
        }
    }
    let mut hi = lo * R::val(10.0);
    guard = 0;
    while f(hi) > target {
        hi *= R::val(10.0);
        guard += 1;
        if guard > 60 {
            return Err(OptimizerError::NoSolution);
        }
    }
    let tol = R::val(ROOT_TOL);
    let mut iterations = 0;
    while (hi - lo) > tol * lo && iterations < 500 {
        let mid = (lo + hi) / R::val(2.0);
        if f(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok((lo + hi) / R::val(2.0))
}

/// Readout variance of the AOC strategy as a function of N_L, electronic
/// noise excluded (both terms are strictly decreasing).
pub(crate) fn aoc_readout_variance<R: Real>(
    couplings: &CouplingValues<R>,
    n_atoms: R,
    n_photons: R,
) -> R {
    let k1sq = couplings.kappa1 * couplings.kappa1;
    let k2sq = couplings.kappa2 * couplings.kappa2;
    R::val(16.0) / (k1sq * k2sq * n_photons.powi(3))
        + R::val(4.0) * n_atoms / (k2sq * n_photons * n_photons)
}

/// Photon number at which the chosen strategy reaches projection-noise
/// sensitivity, (ΔJ_y)² = N_A/4.
pub fn photons_for_projection_noise<R: Real>(
    n_atoms: R,
    couplings: &CouplingValues<R>,
    strategy: Strategy,
) -> Result<R, OptimizerError> {
    if !(n_atoms > R::zero()) {
        return Err(OptimizerError::BadAtomNumber(n_atoms.as_f64()));
    }
    let target = n_atoms / R::val(4.0);
    match strategy {
        Strategy::Lte => {
            if couplings.kappa2 == R::zero() {
                return Err(OptimizerError::NoSolution);
            }
            let k2sq = couplings.kappa2 * couplings.kappa2;
            Ok((R::val(4.0) / k2sq + n_atoms * n_atoms) / n_atoms)
        }
        Strategy::Aoc => {
            if couplings.kappa1 == R::zero() || couplings.kappa2 == R::zero() {
                return Err(OptimizerError::NoSolution);
            }
            solve_decreasing(|n| aoc_readout_variance(couplings, n_atoms, n), target)
        }
    }
}

/// Per-optical-depth summary of a scan: the fully optimized operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdOptimum<R: Real> {
    pub optical_depth: R,
    pub best: OptimumPoint<R>,
}

/// Minimum achievable ξ_m² over the photon range, per (OD, detuning) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct OdScan<R: Real> {
    pub strategy: Strategy,
    pub detunings: Vec<R>,
    pub optical_depths: Vec<R>,
    /// Row-major cells: `cells[od_index][detuning_index]`; detunings where
    /// no finite optimum exists hold `None`.
    pub cells: Vec<Vec<Option<OptimumPoint<R>>>>,
}

impl<R: Real> OdScan<R> {
    /// Matrix of minimum ξ_m² values (`NaN` for empty cells).
    pub fn xi2m_matrix(&self) -> Vec<Vec<R>> {
        self.cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cell| cell.map_or(R::nan(), |p| p.xi2_m))
                    .collect()
            })
            .collect()
    }

    /// Fully optimized squeezing per optical depth (minimum over the
    /// detuning axis).
    pub fn fully_optimized(&self) -> Vec<OdOptimum<R>> {
        self.optical_depths
            .iter()
            .zip(&self.cells)
            .filter_map(|(&od, row)| {
                row.iter()
                    .flatten()
                    .copied()
                    .reduce(|best, next| if next.xi2_m < best.xi2_m { next } else { best })
                    .map(|best| OdOptimum { optical_depth: od, best })
            })
            .collect()
    }
}

/// Optimize every (OD, detuning) cell of the grid for one strategy.
pub fn scan_od_detuning<R: Real>(
    model: &CouplingModel<R>,
    grid: &ScanGrid<R>,
    strategy: Strategy,
) -> Result<OdScan<R>, OptimizerError> {
    let cells: Vec<Vec<Option<OptimumPoint<R>>>> = grid
        .optical_depths
        .par_iter()
        .map(|&od| {
            let n_atoms = model.atoms_for_optical_depth(od);
            grid.detunings
                .iter()
                .map(|&detuning| {
                    optimize_photons(model, detuning, n_atoms, grid.photon_range, strategy).ok()
                })
                .collect()
        })
        .collect();
    Ok(OdScan {
        strategy,
        detunings: grid.detunings.clone(),
        optical_depths: grid.optical_depths.clone(),
        cells,
    })
}

/// Log–log slope of fully optimized ξ_m² against optical depth.
pub fn fit_od_scaling<R: Real>(od_values: &[R], xi2_values: &[R]) -> Result<R, OptimizerError> {
    if od_values.len() != xi2_values.len() {
        return Err(OptimizerError::BadGrid);
    }
    let points: Vec<(R, R)> = od_values.iter().copied().zip(xi2_values.iter().copied()).collect();
    let (slope, _) = fit::log_log_slope(&points)?;
    Ok(slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Model = CouplingModel<f64>;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn wide_range() -> PhotonRange<f64> {
        PhotonRange::new(1e3, 1e10, 256).unwrap()
    }

    #[test]
    fn photon_grid_is_log_spaced_with_exact_endpoints() {
        let range = PhotonRange::new(1e3, 1e9, 7).unwrap();
        let grid = range.grid();
        assert_eq!(grid.len(), MIN_COARSE_POINTS);
        assert_eq!(grid[0], 1e3);
        assert_eq!(*grid.last().unwrap(), 1e9);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn bad_ranges_are_rejected() {
        assert!(PhotonRange::new(0.0, 1e9, 10).is_err());
        assert!(PhotonRange::new(1e9, 1e3, 10).is_err());
        assert!(PhotonRange::new(1e3, 1e9, 1).is_err());
        let model = Model::rb87_d2();
        assert!(detuning_grid(&model, (100.0, -100.0)).is_err());
    }

    #[test]
    fn lossless_probe_pushes_the_optimum_to_the_photon_ceiling() {
        let couplings = CouplingValues { kappa1: 1.47e-7, kappa2: 7.54e-9, eta_gamma: 0.0 };
        let range = wide_range();
        let p = optimize_photons_from_couplings(
            &couplings,
            0.4,
            5.6e5,
            -600.0,
            range,
            Strategy::Aoc,
        )
        .unwrap();
        assert!(p.at_boundary);
        assert_eq!(p.n_photons, range.max);
        assert!(rel_err(p.xi2_m, 1.0 / (1.0 + p.zeta)) < 1e-12);
    }

    #[test]
    fn useless_measurement_sits_at_the_photon_floor() {
        let couplings = CouplingValues { kappa1: 0.0, kappa2: 7.54e-9, eta_gamma: 1e-9 };
        let range = wide_range();
        let p = optimize_photons_from_couplings(
            &couplings,
            0.4,
            5.6e5,
            -600.0,
            range,
            Strategy::Aoc,
        )
        .unwrap();
        assert!(p.at_boundary);
        assert_eq!(p.n_photons, range.min);
        assert!(p.xi2_m > 1.0);
    }

    #[test]
    fn aoc_photon_optimum_near_the_global_best_detuning() {
        let model = Model::rb87_d2();
        let p = optimize_photons(&model, -59.0, 5.6e5, wide_range(), Strategy::Aoc).unwrap();
        assert!(!p.at_boundary);
        assert!((5.0e6..=8.0e6).contains(&p.n_photons), "N_L* = {}", p.n_photons);
        assert!((0.49..=0.52).contains(&p.xi2_m), "xi2_m = {}", p.xi2_m);
        assert!((0.08..=0.13).contains(&p.eta_sc));
    }

    #[test]
    fn detuning_scan_recovers_the_red_side_optimum() {
        let model = Model::rb87_d2();
        let p = optimize_detuning_and_photons(
            &model,
            5.6e5,
            (-120.0, -30.0),
            wide_range(),
            Strategy::Aoc,
        )
        .unwrap();
        assert!((-75.0..=-45.0).contains(&p.detuning), "detuning {}", p.detuning);
        assert!((0.49..=0.52).contains(&p.xi2_m));
    }

    #[test]
    fn optimizer_is_deterministic() {
        let model = Model::rb87_d2();
        let a = optimize_detuning_and_photons(
            &model,
            5.6e5,
            (-100.0, -40.0),
            wide_range(),
            Strategy::Aoc,
        )
        .unwrap();
        let b = optimize_detuning_and_photons(
            &model,
            5.6e5,
            (-100.0, -40.0),
            wide_range(),
            Strategy::Aoc,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lte_budget_closed_form_and_dominant_term() {
        let couplings = CouplingValues { kappa1: 1.47e-7, kappa2: 7.54e-9, eta_gamma: 1e-9 };
        let n_atoms = 5.6e5;
        let exact = photons_for_projection_noise(n_atoms, &couplings, Strategy::Lte).unwrap();
        let k2sq = couplings.kappa2 * couplings.kappa2;
        assert!(rel_err(exact, (4.0 / k2sq + n_atoms * n_atoms) / n_atoms) < 1e-14);
        // κ2 N_A ≪ 1 here, so the shot term dominates.
        assert!(rel_err(exact, 4.0 / (k2sq * n_atoms)) < 1e-4);
    }

    #[test]
    fn aoc_budget_reduces_to_cube_root_without_projection_term() {
        let couplings = CouplingValues { kappa1: 1.47e-7, kappa2: 7.54e-9, eta_gamma: 1e-9 };
        let n_atoms = 5.6e5;
        let k1sq = couplings.kappa1 * couplings.kappa1;
        let k2sq = couplings.kappa2 * couplings.kappa2;
        let shot_only = |n: f64| 16.0 / (k1sq * k2sq * n.powi(3));
        let root = solve_decreasing(shot_only, n_atoms / 4.0).unwrap();
        let analytic = (64.0 / (k1sq * k2sq * n_atoms)).powf(1.0 / 3.0);
        assert!(rel_err(root, analytic) < 1e-8);
    }

    #[test]
    fn aoc_budget_root_satisfies_the_defining_equation() {
        let model = Model::rb87_d2();
        let couplings = model.couplings(-600.0);
        let n_atoms = 5.6e5;
        let root = photons_for_projection_noise(n_atoms, &couplings, Strategy::Aoc).unwrap();
        let value = aoc_readout_variance(&couplings, n_atoms, root);
        assert!(rel_err(value, n_atoms / 4.0) < 1e-6);
    }

    #[test]
    fn zero_couplings_leave_no_budget_solution() {
        let dead = CouplingValues { kappa1: 0.0, kappa2: 0.0, eta_gamma: 1e-9 };
        for strategy in Strategy::ALL {
            assert!(matches!(
                photons_for_projection_noise(5.6e5, &dead, strategy),
                Err(OptimizerError::NoSolution)
            ));
        }
    }

    #[test]
    fn od_scan_improves_monotonically_with_optical_depth() {
        let model = Model::rb87_d2();
        let detunings: Vec<f64> = (0..30).map(|i| -640.0 + 20.0 * i as f64).collect();
        let grid = ScanGrid::new(
            detunings,
            vec![3.0, 10.0, 30.0, 100.0, 300.0],
            PhotonRange::new(1e3, 1e10, 200).unwrap(),
        )
        .unwrap();
        let scan = scan_od_detuning(&model, &grid, Strategy::Aoc).unwrap();
        for row in &scan.cells {
            for cell in row {
                assert!(cell.is_some());
            }
        }
        // At fixed detuning, more optical depth never hurts.
        for d in 0..grid.detunings.len() {
            for o in 1..grid.optical_depths.len() {
                let prev = scan.cells[o - 1][d].unwrap().xi2_m;
                let next = scan.cells[o][d].unwrap().xi2_m;
                assert!(next <= prev * (1.0 + 1e-9));
            }
        }
        let summary = scan.fully_optimized();
        assert_eq!(summary.len(), 5);
        for pair in summary.windows(2) {
            assert!(pair[1].best.xi2_m < pair[0].best.xi2_m);
        }
    }

    #[test]
    fn vanishing_optical_depth_gives_no_squeezing() {
        let model = Model::rb87_d2();
        let grid = ScanGrid::new(
            vec![-600.0],
            vec![1e-3],
            PhotonRange::new(1e3, 1e10, 200).unwrap(),
        )
        .unwrap();
        let scan = scan_od_detuning(&model, &grid, Strategy::Aoc).unwrap();
        let p = scan.cells[0][0].unwrap();
        assert!(p.xi2_m >= 1.0 && p.xi2_m < 1.01);
    }

    #[test]
    fn od_scan_cell_agrees_with_direct_optimization() {
        // The reference ensemble sits at OD ≈ 26.5; scanning that single
        // cell must reproduce the directly optimized squeezing.
        let model = Model::rb87_d2();
        let od = model.optical_depth(5.6e5);
        assert!((od - 26.5).abs() < 0.1);
        let detunings: Vec<f64> = (0..181).map(|i| -120.0 + 0.5 * i as f64).collect();
        let grid = ScanGrid::new(detunings, vec![od], wide_range()).unwrap();
        let scan = scan_od_detuning(&model, &grid, Strategy::Aoc).unwrap();
        let best = scan.fully_optimized()[0].best;
        let direct = optimize_detuning_and_photons(
            &model,
            model.atoms_for_optical_depth(od),
            (-120.0, -30.0),
            wide_range(),
            Strategy::Aoc,
        )
        .unwrap();
        assert!(rel_err(best.xi2_m, direct.xi2_m) < 1e-3);
        assert!(rel_err(best.xi2_m, 0.47) < 0.15);
    }

    #[test]
    fn od_scaling_fit_reference_slopes() {
        let ods: Vec<f64> = (0..12).map(|i| 10.0 * 10f64.powf(i as f64 / 5.5)).collect();
        let perfect: Vec<f64> = ods.iter().map(|od| 2.0 * od.powf(-0.5)).collect();
        let slope = fit_od_scaling(&ods, &perfect).unwrap();
        assert!((slope + 0.5).abs() < 1e-12);

        let flat: Vec<f64> = ods.iter().map(|_| 0.7).collect();
        assert!(fit_od_scaling(&ods, &flat).unwrap().abs() < 1e-12);

        assert!(fit_od_scaling(&ods[..3], &perfect[..2]).is_err());
    }
}
