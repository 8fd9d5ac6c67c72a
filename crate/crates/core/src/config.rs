//! Run configuration: a flat `key = value` file with section headers,
//! strictly validated so typos in physics constants cannot pass silently.
//!
//! An empty file (or a missing `--config` flag) yields the built-in defaults
//! of the reference measurement scenario. `dump` renders the effective
//! configuration back in canonical form; loading that dump reproduces the
//! configuration exactly.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::magnetometry::RB87_F1_GYROMAGNETIC;
use crate::optimizer::{OptimizerError, PhotonRange, ScanGrid};
use crate::sensitivity::{SensitivityError, Strategy};
use crate::spectro::{CouplingModel, SpectroError};
use crate::{ExperimentConfig, optimizer};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    NotFound(String),
    #[error("cannot read config: {0}")]
    Io(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: key `{key}`: {message}")]
    InvalidValue { line: usize, key: String, message: String },
    #[error("key `{key}`: {message}")]
    Constraint { key: String, message: String },
}

/// Output flavor of the table emitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    /// CSV plus a JSON mirror next to it.
    CsvWithJson,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::CsvWithJson => "json",
        }
    }
}

/// Field-fit parameters shared by the magnetometry tools.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    /// Signed gyromagnetic ratio as a linear frequency, Hz per nT.
    pub gyromagnetic_hz_per_nt: f64,
    /// Free-evolution time between preparation and readout, seconds.
    pub evolution_time_s: f64,
}

impl FieldConfig {
    /// γ_F in rad s⁻¹ T⁻¹.
    pub fn gyromagnetic_rad_per_s_t(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.gyromagnetic_hz_per_nt * 1e9
    }
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            gyromagnetic_hz_per_nt: RB87_F1_GYROMAGNETIC / (2.0 * std::f64::consts::PI) / 1e9,
            evolution_time_s: 7.5e-6,
        }
    }
}

/// Grid parameters of the scanning subcommands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub detuning_min_mhz: f64,
    pub detuning_max_mhz: f64,
    pub od_min: f64,
    pub od_max: f64,
    pub od_points: usize,
    pub photon_min: f64,
    pub photon_max: f64,
    pub photon_points: usize,
    pub scaling_min_photons: f64,
    pub scaling_max_photons: f64,
    pub scaling_points: usize,
    pub mc_samples: u64,
    pub mc_configs: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            detuning_min_mhz: -1000.0,
            detuning_max_mhz: 1000.0,
            od_min: 10.0,
            od_max: 1000.0,
            od_points: 20,
            photon_min: 1e3,
            photon_max: 1e11,
            photon_points: 256,
            scaling_min_photons: 1e7,
            scaling_max_photons: 2e8,
            scaling_points: 50,
            mc_samples: 1_000_000,
            mc_configs: 20,
        }
    }
}

/// Execution parameters of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub seed: u64,
    pub strategy: Strategy,
    pub out_dir: String,
    pub format: OutputFormat,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 1,
            strategy: Strategy::Aoc,
            out_dir: ".".into(),
            format: OutputFormat::Csv,
        }
    }
}

/// Everything a subcommand needs, fully validated.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub coupling: CouplingModel<f64>,
    pub experiment: ExperimentConfig,
    pub field: FieldConfig,
    pub scan: ScanConfig,
    pub run: RunSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            coupling: CouplingModel::rb87_d2(),
            experiment: ExperimentConfig::default(),
            field: FieldConfig::default(),
            scan: ScanConfig::default(),
            run: RunSection::default(),
        }
    }
}

impl RunConfig {
    pub fn photon_range(&self) -> Result<PhotonRange<f64>, OptimizerError> {
        PhotonRange::new(
            self.scan.photon_min,
            self.scan.photon_max,
            self.scan.photon_points,
        )
    }

    pub fn detuning_range(&self) -> (f64, f64) {
        (self.scan.detuning_min_mhz, self.scan.detuning_max_mhz)
    }

    /// Scan grid with the configured detuning resolution and a log-spaced
    /// optical-depth axis.
    pub fn scan_grid(&self) -> Result<ScanGrid<f64>, OptimizerError> {
        let detunings = optimizer::detuning_grid(&self.coupling, self.detuning_range())?;
        let n = self.scan.od_points.max(2);
        let ratio = self.scan.od_max / self.scan.od_min;
        let ods: Vec<f64> = (0..n)
            .map(|i| self.scan.od_min * ratio.powf(i as f64 / (n - 1) as f64))
            .collect();
        ScanGrid::new(detunings, ods, self.photon_range()?)
    }
}

fn spectro_constraint(err: SpectroError) -> ConfigError {
    ConfigError::Constraint {
        key: "coupling".into(),
        message: err.to_string(),
    }
}

fn experiment_constraint(err: SensitivityError) -> ConfigError {
    let key = match &err {
        SensitivityError::Constraint { name, .. } => (*name).to_string(),
        _ => "experiment".into(),
    };
    ConfigError::Constraint { key, message: err.to_string() }
}

/// Parse and validate a configuration from text. Unknown sections or keys
/// are hard errors.
pub fn load_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let defaults = RunConfig::default();
    let mut coupling_gamma = defaults.coupling.gamma;
    let mut line1 = defaults.coupling.line_offsets[1];
    let mut line2 = defaults.coupling.line_offsets[2];
    let mut wavelength = defaults.coupling.wavelength;
    let mut area = defaults.coupling.interaction_area;
    let mut k_correction = defaults.coupling.k_correction;
    let mut experiment = defaults.experiment;
    let mut field = defaults.field;
    let mut scan = defaults.scan;
    let mut run = defaults.run;

    let mut section = String::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            section = name.trim().to_ascii_lowercase();
            match section.as_str() {
                "coupling" | "experiment" | "field" | "scan" | "run" => {}
                other => {
                    return Err(ConfigError::UnknownSection {
                        line: line_no,
                        section: other.to_string(),
                    })
                }
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        let float = |value: &str, key: &str| -> Result<f64, ConfigError> {
            value.parse::<f64>().map_err(|_| ConfigError::InvalidValue {
                line: line_no,
                key: key.to_string(),
                message: format!("not a number: `{value}`"),
            })
        };
        let unsigned = |value: &str, key: &str| -> Result<u64, ConfigError> {
            value.parse::<u64>().map_err(|_| ConfigError::InvalidValue {
                line: line_no,
                key: key.to_string(),
                message: format!("not a non-negative integer: `{value}`"),
            })
        };
        match (section.as_str(), key.as_str()) {
            ("coupling", "gamma_mhz") => coupling_gamma = float(value, &key)?,
            ("coupling", "line_offset_1_mhz") => line1 = float(value, &key)?,
            ("coupling", "line_offset_2_mhz") => line2 = float(value, &key)?,
            ("coupling", "wavelength_m") => wavelength = float(value, &key)?,
            ("coupling", "interaction_area_m2") => area = float(value, &key)?,
            ("coupling", "k_correction") => k_correction = float(value, &key)?,
            ("experiment", "n_atoms") => experiment.n_atoms = float(value, &key)?,
            ("experiment", "n_photons") => experiment.n_photons = float(value, &key)?,
            ("experiment", "detuning_mhz") => experiment.detuning = float(value, &key)?,
            ("experiment", "electronic_noise") => {
                experiment.electronic_noise = float(value, &key)?
            }
            ("experiment", "eta_dep") => experiment.eta_dep = float(value, &key)?,
            ("experiment", "j_y_mean") => experiment.j_y_mean = float(value, &key)?,
            ("experiment", "j_z_mean") => experiment.j_z_mean = float(value, &key)?,
            ("field", "gyromagnetic_hz_per_nt") => {
                field.gyromagnetic_hz_per_nt = float(value, &key)?
            }
            ("field", "evolution_time_s") => field.evolution_time_s = float(value, &key)?,
            ("scan", "detuning_min_mhz") => scan.detuning_min_mhz = float(value, &key)?,
            ("scan", "detuning_max_mhz") => scan.detuning_max_mhz = float(value, &key)?,
            ("scan", "od_min") => scan.od_min = float(value, &key)?,
            ("scan", "od_max") => scan.od_max = float(value, &key)?,
            ("scan", "od_points") => scan.od_points = unsigned(value, &key)? as usize,
            ("scan", "photon_min") => scan.photon_min = float(value, &key)?,
            ("scan", "photon_max") => scan.photon_max = float(value, &key)?,
            ("scan", "photon_points") => scan.photon_points = unsigned(value, &key)? as usize,
            ("scan", "scaling_min_photons") => scan.scaling_min_photons = float(value, &key)?,
            ("scan", "scaling_max_photons") => scan.scaling_max_photons = float(value, &key)?,
            ("scan", "scaling_points") => scan.scaling_points = unsigned(value, &key)? as usize,
            ("scan", "mc_samples") => scan.mc_samples = unsigned(value, &key)?,
            ("scan", "mc_configs") => scan.mc_configs = unsigned(value, &key)? as usize,
            ("run", "seed") => run.seed = unsigned(value, &key)?,
            ("run", "strategy") => {
                run.strategy = value.parse().map_err(|message| ConfigError::InvalidValue {
                    line: line_no,
                    key: key.clone(),
                    message,
                })?
            }
            ("run", "out_dir") => run.out_dir = value.to_string(),
            ("run", "format") => {
                run.format = match value.to_ascii_lowercase().as_str() {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::CsvWithJson,
                    other => {
                        return Err(ConfigError::InvalidValue {
                            line: line_no,
                            key: key.clone(),
                            message: format!("unknown format `{other}` (expected csv or json)"),
                        })
                    }
                }
            }
            ("", _) => {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("key `{key}` appears before any section header"),
                })
            }
            (section, _) => {
                return Err(ConfigError::UnknownKey {
                    line: line_no,
                    section: section.to_string(),
                    key,
                })
            }
        }
    }

    let coupling = CouplingModel::new(
        coupling_gamma,
        [0.0, line1, line2],
        wavelength,
        area,
        k_correction,
    )
    .map_err(spectro_constraint)?;
    experiment.validate().map_err(experiment_constraint)?;
    let config = RunConfig { coupling, experiment, field, scan, run };
    validate_scan(&config.scan)?;
    Ok(config)
}

fn validate_scan(scan: &ScanConfig) -> Result<(), ConfigError> {
    let constraint = |key: &str, message: String| ConfigError::Constraint {
        key: key.into(),
        message,
    };
    if !(scan.detuning_min_mhz < scan.detuning_max_mhz) {
        return Err(constraint("detuning_min_mhz", "must be below detuning_max_mhz".into()));
    }
    if !(scan.od_min > 0.0 && scan.od_max > scan.od_min) {
        return Err(constraint("od_min", "need 0 < od_min < od_max".into()));
    }
    if !(scan.photon_min > 0.0 && scan.photon_max > scan.photon_min) {
        return Err(constraint("photon_min", "need 0 < photon_min < photon_max".into()));
    }
    if !(scan.scaling_min_photons > 0.0 && scan.scaling_max_photons > scan.scaling_min_photons) {
        return Err(constraint(
            "scaling_min_photons",
            "need 0 < scaling_min_photons < scaling_max_photons".into(),
        ));
    }
    for (key, points) in [
        ("od_points", scan.od_points),
        ("photon_points", scan.photon_points),
        ("scaling_points", scan.scaling_points),
    ] {
        if points < 2 {
            return Err(constraint(key, "need at least 2 grid points".into()));
        }
    }
    if scan.mc_samples < 2 {
        return Err(constraint("mc_samples", "need at least 2 samples".into()));
    }
    if scan.mc_configs < 1 {
        return Err(constraint("mc_configs", "need at least 1 config".into()));
    }
    Ok(())
}

/// Load a configuration file; a missing path is a distinct error.
pub fn load_config<P: AsRef<Path>>(path: P) -> Result<RunConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|err| {
        if err.kind() == std::io::ErrorKind::NotFound {
            ConfigError::NotFound(path.display().to_string())
        } else {
            ConfigError::Io(err.to_string())
        }
    })?;
    load_config_str(&text)
}

/// Canonical text form of a configuration; `load_config_str(dump(c)) == c`.
pub fn dump(config: &RunConfig) -> String {
    let mut out = String::new();
    let f = crate::table::format_float;
    let _ = writeln!(out, "[coupling]");
    let _ = writeln!(out, "gamma_mhz = {}", f(config.coupling.gamma));
    let _ = writeln!(out, "line_offset_1_mhz = {}", f(config.coupling.line_offsets[1]));
    let _ = writeln!(out, "line_offset_2_mhz = {}", f(config.coupling.line_offsets[2]));
    let _ = writeln!(out, "wavelength_m = {}", f(config.coupling.wavelength));
    let _ = writeln!(out, "interaction_area_m2 = {}", f(config.coupling.interaction_area));
    let _ = writeln!(out, "k_correction = {}", f(config.coupling.k_correction));
    let _ = writeln!(out);
    let _ = writeln!(out, "[experiment]");
    let _ = writeln!(out, "n_atoms = {}", f(config.experiment.n_atoms));
    let _ = writeln!(out, "n_photons = {}", f(config.experiment.n_photons));
    let _ = writeln!(out, "detuning_mhz = {}", f(config.experiment.detuning));
    let _ = writeln!(out, "electronic_noise = {}", f(config.experiment.electronic_noise));
    let _ = writeln!(out, "eta_dep = {}", f(config.experiment.eta_dep));
    let _ = writeln!(out, "j_y_mean = {}", f(config.experiment.j_y_mean));
    let _ = writeln!(out, "j_z_mean = {}", f(config.experiment.j_z_mean));
    let _ = writeln!(out);
    let _ = writeln!(out, "[field]");
    let _ = writeln!(out, "gyromagnetic_hz_per_nt = {}", f(config.field.gyromagnetic_hz_per_nt));
    let _ = writeln!(out, "evolution_time_s = {}", f(config.field.evolution_time_s));
    let _ = writeln!(out);
    let _ = writeln!(out, "[scan]");
    let _ = writeln!(out, "detuning_min_mhz = {}", f(config.scan.detuning_min_mhz));
    let _ = writeln!(out, "detuning_max_mhz = {}", f(config.scan.detuning_max_mhz));
    let _ = writeln!(out, "od_min = {}", f(config.scan.od_min));
    let _ = writeln!(out, "od_max = {}", f(config.scan.od_max));
    let _ = writeln!(out, "od_points = {}", config.scan.od_points);
    let _ = writeln!(out, "photon_min = {}", f(config.scan.photon_min));
    let _ = writeln!(out, "photon_max = {}", f(config.scan.photon_max));
    let _ = writeln!(out, "photon_points = {}", config.scan.photon_points);
    let _ = writeln!(out, "scaling_min_photons = {}", f(config.scan.scaling_min_photons));
    let _ = writeln!(out, "scaling_max_photons = {}", f(config.scan.scaling_max_photons));
    let _ = writeln!(out, "scaling_points = {}", config.scan.scaling_points);
    let _ = writeln!(out, "mc_samples = {}", config.scan.mc_samples);
    let _ = writeln!(out, "mc_configs = {}", config.scan.mc_configs);
    let _ = writeln!(out);
    let _ = writeln!(out, "[run]");
    let _ = writeln!(out, "seed = {}", config.run.seed);
    let _ = writeln!(out, "strategy = {}", config.run.strategy);
    let _ = writeln!(out, "out_dir = {}", config.run.out_dir);
    let _ = writeln!(out, "format = {}", config.run.format.name());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_the_reference_defaults() {
        let config = load_config_str("").unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.experiment.n_atoms, 5.6e5);
        assert_eq!(config.experiment.detuning, -600.0);
        assert_eq!(config.experiment.electronic_noise, 9.2e5);
        assert_eq!(config.experiment.eta_dep, 0.034);
        assert_eq!(config.coupling.k_correction, 0.4);
    }

    #[test]
    fn overrides_flow_into_the_coupling_model() {
        let config = load_config_str("[coupling]\nline_offset_1_mhz = 70.0\n").unwrap();
        assert_eq!(config.coupling.line_offsets[1], 70.0);
        // The derived couplings shift with the override.
        let shifted = config.coupling.kappa1(-600.0);
        let stock = CouplingModel::<f64>::rb87_d2().kappa1(-600.0);
        assert!(shifted != stock);
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        match load_config_str("[experiment]\nn_fotons = 2e8\n") {
            Err(ConfigError::UnknownKey { key, section, .. }) => {
                assert_eq!(key, "n_fotons");
                assert_eq!(section, "experiment");
            }
            other => panic!("expected unknown-key error, got {other:?}"),
        }
        assert!(matches!(
            load_config_str("[experimental]\nn_atoms = 1\n"),
            Err(ConfigError::UnknownSection { .. })
        ));
        assert!(matches!(
            load_config_str("n_atoms = 1\n"),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn constraint_violations_name_the_key() {
        match load_config_str("[experiment]\nn_photons = -1\n") {
            Err(ConfigError::Constraint { key, .. }) => assert_eq!(key, "n_photons"),
            other => panic!("expected constraint error, got {other:?}"),
        }
        assert!(load_config_str("[coupling]\nk_correction = 1.5\n").is_err());
        assert!(load_config_str("[scan]\nphoton_min = 0\n").is_err());
    }

    #[test]
    fn malformed_numbers_report_line_and_key() {
        match load_config_str("[experiment]\nn_atoms = banana\n") {
            Err(ConfigError::InvalidValue { line, key, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(key, "n_atoms");
            }
            other => panic!("expected invalid-value error, got {other:?}"),
        }
    }

    #[test]
    fn dump_load_round_trip_is_idempotent() {
        let mut config = RunConfig::default();
        config.experiment.n_photons = 5.4e6;
        config.experiment.detuning = -59.0;
        config.scan.od_points = 7;
        config.run.seed = 42;
        config.run.strategy = Strategy::Lte;
        let text = dump(&config);
        let reloaded = load_config_str(&text).unwrap();
        assert_eq!(reloaded, config);
        assert_eq!(dump(&reloaded), text);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# comment\n\n[experiment]\n; another comment\nn_atoms = 1e5\n";
        let config = load_config_str(text).unwrap();
        assert_eq!(config.experiment.n_atoms, 1e5);
    }

    #[test]
    fn missing_file_is_a_distinct_error() {
        assert!(matches!(
            load_config("/nonexistent/path/to/config.ini"),
            Err(ConfigError::NotFound(_))
        ));
    }
}
