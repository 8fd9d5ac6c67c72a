//! Ordinary least squares on small data sets: straight lines, lines through
//! the origin, and log–log power-law slopes.

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("abscissae are degenerate (no spread)")]
    DegenerateAbscissae,
    #[error("log-log fit requires strictly positive values")]
    NonPositiveValue,
}

/// Slope/intercept fit y = a + b·x with the standard error of the slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<R: Real> {
    pub slope: R,
    pub intercept: R,
    pub slope_stderr: R,
}

/// Fit through the origin, y = b·x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProportionalFit<R: Real> {
    pub slope: R,
    pub slope_stderr: R,
}

pub fn linear_ols<R: Real>(x: &[R], y: &[R]) -> Result<LinearFit<R>, FitError> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(FitError::TooFewPoints { needed: 3, got: n.min(y.len()) });
    }
    let nf = R::from_usize(n).expect("point count fits scalar");
    let mean_x = x.iter().copied().sum::<R>() / nf;
    let mean_y = y.iter().copied().sum::<R>() / nf;
    let mut sxx = R::zero();
    let mut sxy = R::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mean_x) * (xi - mean_x);
        sxy += (xi - mean_x) * (yi - mean_y);
    }
    if sxx <= R::zero() {
        return Err(FitError::DegenerateAbscissae);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ssr = R::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let r = yi - intercept - slope * xi;
        ssr += r * r;
    }
    let dof = nf - R::val(2.0);
    let slope_stderr = (ssr / dof / sxx).max(R::zero()).sqrt();
    Ok(LinearFit { slope, intercept, slope_stderr })
}

pub fn proportional_ols<R: Real>(x: &[R], y: &[R]) -> Result<ProportionalFit<R>, FitError> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(FitError::TooFewPoints { needed: 2, got: n.min(y.len()) });
    }
    let mut sxx = R::zero();
    let mut sxy = R::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += xi * xi;
        sxy += xi * yi;
    }
    if sxx <= R::zero() {
        return Err(FitError::DegenerateAbscissae);
    }
    let slope = sxy / sxx;
    let mut ssr = R::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let r = yi - slope * xi;
        ssr += r * r;
    }
    let nf = R::from_usize(n).expect("point count fits scalar");
    let slope_stderr = (ssr / (nf - R::one()) / sxx).max(R::zero()).sqrt();
    Ok(ProportionalFit { slope, slope_stderr })
}

/// Slope (and its standard error) of ln y against ln x.
pub fn log_log_slope<R: Real>(points: &[(R, R)]) -> Result<(R, R), FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints { needed: 3, got: points.len() });
    }
    if points.iter().any(|&(x, y)| x <= R::zero() || y <= R::zero()) {
        return Err(FitError::NonPositiveValue);
    }
    let lx: Vec<R> = points.iter().map(|&(x, _)| x.ln()).collect();
    let ly: Vec<R> = points.iter().map(|&(_, y)| y.ln()).collect();
    let fit = linear_ols(&lx, &ly)?;
    Ok((fit.slope, fit.slope_stderr))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|&v| 2.5 * v - 1.0).collect();
        let fit = linear_ols(&x, &y).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-14);
        assert!((fit.intercept + 1.0).abs() < 1e-13);
        assert!(fit.slope_stderr < 1e-13);
    }

    #[test]
    fn pure_power_law_gives_exact_exponent() {
        let points: Vec<(f64, f64)> = (1..=10)
            .map(|i| {
                let x = 10f64.powf(0.3 * i as f64);
                (x, 7.0 * x.powf(-1.5))
            })
            .collect();
        let (slope, stderr) = log_log_slope(&points).unwrap();
        assert!((slope + 1.5).abs() < 1e-12);
        assert!(stderr < 1e-12);
    }

    #[test]
    fn degenerate_and_invalid_inputs_are_rejected() {
        assert!(matches!(
            linear_ols(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(FitError::DegenerateAbscissae)
        ));
        assert!(matches!(
            log_log_slope(&[(1.0, 1.0), (2.0, -1.0), (3.0, 2.0)]),
            Err(FitError::NonPositiveValue)
        ));
        assert!(matches!(
            log_log_slope::<f64>(&[(1.0, 1.0), (2.0, 2.0)]),
            Err(FitError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn duplicated_pairs_fit_with_zero_stderr() {
        let x = [1.0f64, 1.0, 3.0, 3.0];
        let y = [2.0f64, 2.0, 6.0, 6.0];
        let fit = linear_ols(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-14);
        assert!(fit.slope_stderr.abs() < 1e-14);
    }

    #[test]
    fn constant_data_fits_zero_slope() {
        let points: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, 4.2)).collect();
        let (slope, _) = log_log_slope(&points).unwrap();
        assert!(slope.abs() < 1e-14);
    }
}
