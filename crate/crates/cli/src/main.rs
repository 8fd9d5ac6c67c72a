//! Command-line front end: each subcommand reproduces one analysis pipeline
//! of the measurement model (noise scaling, crossover, photon budgets,
//! squeezing optima, optical-depth landscapes, Monte-Carlo verification, and
//! magnetic-field fitting).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use aocspin_core::config::{self, ConfigError, OutputFormat, RunConfig};
use aocspin_core::dynamics::{self, OBS_K_THETA, OBS_PHI, OBS_SY_OUT, OBS_SZ_OUT};
use aocspin_core::magnetometry::{self, MagnetometryError};
use aocspin_core::optimizer::{self, OptimizerError};
use aocspin_core::sensitivity::{self, LteMode, SensitivityError};
use aocspin_core::squeezing::{self, SqueezingError};
use aocspin_core::table::{self, format_float};
use aocspin_core::{ExperimentConfig, Strategy};

#[derive(Parser)]
#[command(
    name = "aocspin",
    version,
    about = "Sensitivity and squeezing analysis for polarization-interferometer spin measurements"
)]
struct Cli {
    /// Configuration file (key = value under section headers); defaults are built in.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed for every stochastic pipeline.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for emitted tables.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Measurement strategy.
    #[arg(long, global = true, value_enum)]
    strategy: Option<StrategyArg>,
    /// Table format: csv, or json for a JSON mirror next to each CSV.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Aoc,
    Lte,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Measurement uncertainty versus photon number (noise-scaling table).
    Scaling,
    /// Photon number where the nonlinear readout overtakes the ideal linear one.
    Crossover,
    /// Globally optimal squeezing over detuning and photon number.
    Optimize {
        /// Accept an optimum sitting on a photon-range edge.
        #[arg(long)]
        allow_boundary: bool,
    },
    /// Photons needed for projection-noise-limited sensitivity versus detuning.
    Budget,
    /// Minimum squeezing over an optical-depth/detuning grid.
    Scan,
    /// Monte-Carlo verification of the analytic pulse covariances.
    McVerify {
        /// Verify the two-pulse conditional-variance estimator instead.
        #[arg(long)]
        conditional: bool,
    },
    /// Fit the bias field from a CSV of (j_x, j_y) pairs.
    FitField {
        /// Input CSV with columns j_x,j_y (header optional).
        input: PathBuf,
    },
}

enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<SensitivityError> for CliError {
    fn from(err: SensitivityError) -> Self {
        match err {
            SensitivityError::Constraint { .. } => CliError::Validation(err.to_string()),
            _ => CliError::Numerical(err.to_string()),
        }
    }
}

impl From<OptimizerError> for CliError {
    fn from(err: OptimizerError) -> Self {
        match err {
            OptimizerError::BadPhotonRange(..)
            | OptimizerError::BadGrid
            | OptimizerError::BadDetuningRange(..)
            | OptimizerError::BadAtomNumber(..) => CliError::Validation(err.to_string()),
            _ => CliError::Numerical(err.to_string()),
        }
    }
}

impl From<SqueezingError> for CliError {
    fn from(err: SqueezingError) -> Self {
        CliError::Numerical(err.to_string())
    }
}

impl From<MagnetometryError> for CliError {
    fn from(err: MagnetometryError) -> Self {
        match err {
            MagnetometryError::Fit(_) | MagnetometryError::NonPositiveTime(_) => {
                CliError::Validation(err.to_string())
            }
            _ => CliError::Numerical(err.to_string()),
        }
    }
}

impl From<dynamics::DynamicsError> for CliError {
    fn from(err: dynamics::DynamicsError) -> Self {
        CliError::Numerical(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut run_config = match &cli.config {
        Some(path) => config::load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        run_config.run.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        run_config.run.out_dir = dir.display().to_string();
    }
    if let Some(strategy) = cli.strategy {
        run_config.run.strategy = match strategy {
            StrategyArg::Aoc => Strategy::Aoc,
            StrategyArg::Lte => Strategy::Lte,
        };
    }
    if let Some(format) = cli.format {
        run_config.run.format = match format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::CsvWithJson,
        };
    }
    Ok(run_config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let run_config = effective_config(&cli)?;
    let out_dir = PathBuf::from(&run_config.run.out_dir);
    let with_json = run_config.run.format == OutputFormat::CsvWithJson;
    match cli.command {
        Command::Scaling => scaling(&run_config, &out_dir, with_json),
        Command::Crossover => crossover(&run_config),
        Command::Optimize { allow_boundary } => optimize(&run_config, allow_boundary),
        Command::Budget => budget(&run_config, &out_dir, with_json),
        Command::Scan => scan(&run_config, &out_dir, with_json),
        Command::McVerify { conditional } => {
            if conditional {
                mc_conditional(&run_config, &out_dir, with_json)
            } else {
                mc_verify(&run_config, &out_dir, with_json)
            }
        }
        Command::FitField { input } => fit_field(&run_config, &input),
    }
}

fn scaling(run_config: &RunConfig, out_dir: &Path, with_json: bool) -> Result<(), CliError> {
    let couplings = run_config.coupling.couplings(run_config.experiment.detuning);
    let scan = &run_config.scan;
    let ratio = scan.scaling_max_photons / scan.scaling_min_photons;
    let mut rows = Vec::with_capacity(scan.scaling_points);
    for i in 0..scan.scaling_points {
        let fraction = i as f64 / (scan.scaling_points - 1) as f64;
        let n_photons = scan.scaling_min_photons * ratio.powf(fraction);
        let config = ExperimentConfig { n_photons, ..run_config.experiment };
        let aoc = sensitivity::var_jy_aoc(&config, &couplings)?;
        let lte = sensitivity::var_jy_lte(&config, &couplings, LteMode::Ideal)?;
        rows.push(vec![
            n_photons,
            aoc.var_readout_shot,
            aoc.var_readout_projection,
            aoc.var_electronic,
            aoc.delta_jy,
            lte.delta_jy,
        ]);
    }
    let headers = [
        "n_photons",
        "var_term1",
        "var_term2",
        "var_en",
        "delta_jy_aoc",
        "delta_jy_lte_ideal",
    ];
    table::emit_table(out_dir, "scaling", &headers, &rows, with_json)?;
    Ok(())
}

fn crossover(run_config: &RunConfig) -> Result<(), CliError> {
    let couplings = run_config.coupling.couplings(run_config.experiment.detuning);
    let n_atoms = run_config.experiment.n_atoms;
    let n_star = sensitivity::crossover_photons(n_atoms, &couplings)?;
    let mut verified = [false; 2];
    for (slot, factor) in [(0usize, 1.01), (1usize, 0.99)] {
        let config = ExperimentConfig {
            n_photons: factor * n_star,
            electronic_noise: 0.0,
            ..run_config.experiment
        };
        let aoc = sensitivity::var_jy_aoc(&config, &couplings)?.delta_jy;
        let lte = sensitivity::var_jy_lte(&config, &couplings, LteMode::Ideal)?.delta_jy;
        verified[slot] = if factor > 1.0 { aoc < lte } else { aoc >= lte };
    }
    println!(
        "{{\"n_atoms\": {}, \"kappa1\": {}, \"kappa2\": {}, \"n_photons_crossover\": {}, \
         \"aoc_better_just_above\": {}, \"lte_better_just_below\": {}}}",
        format_float(n_atoms),
        format_float(couplings.kappa1),
        format_float(couplings.kappa2),
        format_float(n_star),
        verified[0],
        verified[1],
    );
    Ok(())
}

fn optimum_json(point: &optimizer::OptimumPoint<f64>) -> String {
    format!(
        "{{\"strategy\": \"{}\", \"detuning_mhz\": {}, \"n_photons\": {}, \"xi2_m\": {}, \
         \"xi2\": {}, \"zeta\": {}, \"eta_sc\": {}, \"at_boundary\": {}}}",
        point.strategy,
        format_float(point.detuning),
        format_float(point.n_photons),
        format_float(point.xi2_m),
        format_float(point.xi2),
        format_float(point.zeta),
        format_float(point.eta_sc),
        point.at_boundary,
    )
}

fn optimize(run_config: &RunConfig, allow_boundary: bool) -> Result<(), CliError> {
    let point = optimizer::optimize_detuning_and_photons(
        &run_config.coupling,
        run_config.experiment.n_atoms,
        run_config.detuning_range(),
        run_config.photon_range()?,
        run_config.run.strategy,
    )?;
    println!("{}", optimum_json(&point));
    if point.at_boundary && !allow_boundary {
        return Err(CliError::Numerical(
            "optimum sits on the photon-range boundary (re-run with --allow-boundary to accept)"
                .into(),
        ));
    }
    Ok(())
}

fn budget(run_config: &RunConfig, out_dir: &Path, with_json: bool) -> Result<(), CliError> {
    let model = &run_config.coupling;
    let n_atoms = run_config.experiment.n_atoms;
    let grid = optimizer::detuning_grid(model, run_config.detuning_range())?;
    let mut rows = Vec::new();
    for detuning in grid {
        let couplings = model.couplings(detuning);
        let aoc = optimizer::photons_for_projection_noise(n_atoms, &couplings, Strategy::Aoc);
        let lte = optimizer::photons_for_projection_noise(n_atoms, &couplings, Strategy::Lte);
        // Points where a budget diverges (coupling nodes) are left out.
        if let (Ok(aoc), Ok(lte)) = (aoc, lte) {
            let damage = |photons: f64| model.k_correction * couplings.eta_gamma * photons;
            rows.push(vec![detuning, aoc, lte, damage(aoc), damage(lte)]);
        }
    }
    let headers = [
        "detuning_mhz",
        "photons_aoc",
        "photons_lte",
        "eta_sc_aoc",
        "eta_sc_lte",
    ];
    table::emit_table(out_dir, "photon_budget", &headers, &rows, with_json)?;
    Ok(())
}

fn scan(run_config: &RunConfig, out_dir: &Path, with_json: bool) -> Result<(), CliError> {
    let strategy = run_config.run.strategy;
    let grid = run_config.scan_grid()?;
    let scan = optimizer::scan_od_detuning(&run_config.coupling, &grid, strategy)?;

    let mut headers: Vec<String> = vec!["od".into()];
    headers.extend(scan.detunings.iter().map(|d| format!("{d}")));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(scan.optical_depths.len());
    for (i, &od) in scan.optical_depths.iter().enumerate() {
        let mut row = Vec::with_capacity(scan.detunings.len() + 1);
        row.push(od);
        for cell in &scan.cells[i] {
            let point = cell.ok_or_else(|| {
                CliError::Numerical(
                    "photon range leaves no valid operating point inside the grid".into(),
                )
            })?;
            row.push(point.xi2_m);
        }
        rows.push(row);
    }
    let stem = format!("scan_{strategy}");
    table::emit_table(out_dir, &stem, &header_refs, &rows, with_json)?;

    let summary = scan.fully_optimized();
    let summary_rows: Vec<Vec<f64>> = summary
        .iter()
        .map(|o| {
            vec![
                o.optical_depth,
                o.best.xi2_m,
                o.best.detuning,
                o.best.n_photons,
                o.best.eta_sc,
            ]
        })
        .collect();
    let summary_headers = ["od", "xi2_m", "detuning_mhz", "n_photons", "eta_sc"];
    let stem = format!("od_summary_{strategy}");
    table::emit_table(out_dir, &stem, &summary_headers, &summary_rows, with_json)?;

    let ods: Vec<f64> = summary.iter().map(|o| o.optical_depth).collect();
    let xi: Vec<f64> = summary.iter().map(|o| o.best.xi2_m).collect();
    let slope = optimizer::fit_od_scaling(&ods, &xi)?;
    println!(
        "{{\"strategy\": \"{strategy}\", \"od_scaling_exponent\": {}}}",
        format_float(slope)
    );
    Ok(())
}

const OBS_NAMES: [&str; 4] = ["s_y_out", "s_z_out", "phi", "k_theta"];
const OBS_PAIRS: [(usize, usize); 10] = [
    (OBS_SY_OUT, OBS_SY_OUT),
    (OBS_SZ_OUT, OBS_SZ_OUT),
    (OBS_PHI, OBS_PHI),
    (OBS_K_THETA, OBS_K_THETA),
    (OBS_SY_OUT, OBS_SZ_OUT),
    (OBS_SY_OUT, OBS_PHI),
    (OBS_SY_OUT, OBS_K_THETA),
    (OBS_SZ_OUT, OBS_PHI),
    (OBS_SZ_OUT, OBS_K_THETA),
    (OBS_PHI, OBS_K_THETA),
];

fn mc_verify(run_config: &RunConfig, out_dir: &Path, with_json: bool) -> Result<(), CliError> {
    let mut headers: Vec<String> =
        vec!["config_id".into(), "n_photons".into(), "n_atoms".into(), "detuning_mhz".into()];
    for (i, j) in OBS_PAIRS {
        let name = if i == j {
            format!("var_{}", OBS_NAMES[i])
        } else {
            format!("cov_{}_{}", OBS_NAMES[i], OBS_NAMES[j])
        };
        headers.push(format!("{name}_analytic"));
        headers.push(format!("{name}_mc"));
        headers.push(format!("{name}_rel_err"));
    }
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();

    let scenarios =
        dynamics::random_verification_scenarios(run_config.scan.mc_configs, run_config.run.seed);
    let mut rows = Vec::new();
    for (id, config) in scenarios.iter().enumerate() {
        let couplings = run_config.coupling.couplings(config.detuning);
        let analytic = dynamics::analytic_observables(config, &couplings)?;
        let mc = dynamics::mc_sample_pulse(
            config,
            &couplings,
            run_config.scan.mc_samples,
            run_config.run.seed.wrapping_add(1 + id as u64),
        )?;
        let mut row = vec![id as f64, config.n_photons, config.n_atoms, config.detuning];
        for (i, j) in OBS_PAIRS {
            let truth = analytic.cov[i][j];
            let sampled = mc.cov[i][j];
            let rel_err = if truth == 0.0 {
                0.0
            } else {
                (sampled - truth).abs() / truth.abs()
            };
            row.extend([truth, sampled, rel_err]);
        }
        rows.push(row);
    }
    table::emit_table(out_dir, "mc_verify", &header_refs, &rows, with_json)?;
    Ok(())
}

fn mc_conditional(run_config: &RunConfig, out_dir: &Path, with_json: bool) -> Result<(), CliError> {
    let config = run_config.experiment;
    let couplings = run_config.coupling.couplings(config.detuning);
    let var_readout = squeezing::subtracted_readout_variance(&config, &couplings)?;
    let atomic = config.n_atoms / 4.0;
    let expected = atomic * var_readout / (atomic + var_readout);

    let mut sample_counts = Vec::new();
    let mut n = 10_000u64;
    while n < run_config.scan.mc_samples {
        sample_counts.push(n);
        n = n.saturating_mul(4);
    }
    sample_counts.push(run_config.scan.mc_samples);

    let mut rows = Vec::new();
    for (i, &n_samples) in sample_counts.iter().enumerate() {
        let samples = dynamics::mc_two_pulse(
            &config,
            &couplings,
            n_samples,
            run_config.run.seed.wrapping_add(100 + i as u64),
        )?;
        let estimate = squeezing::conditional_variance(&samples.phi1, &samples.phi2, var_readout)?;
        let rel_err = (estimate.var_conditional - expected).abs() / expected;
        rows.push(vec![
            n_samples as f64,
            estimate.chi,
            estimate.var_conditional,
            expected,
            rel_err,
        ]);
    }
    let headers = ["n_samples", "chi", "var_cond_mc", "var_cond_analytic", "rel_err"];
    table::emit_table(out_dir, "conditional", &headers, &rows, with_json)?;
    Ok(())
}

fn fit_field(run_config: &RunConfig, input: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input)?;
    let mut pairs = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split(',').map(str::trim);
        let (a, b) = (cells.next(), cells.next());
        match (a.and_then(|v| v.parse::<f64>().ok()), b.and_then(|v| v.parse::<f64>().ok())) {
            (Some(j_x), Some(j_y)) => pairs.push((j_x, j_y)),
            _ if index == 0 => continue, // header row
            _ => {
                return Err(CliError::Validation(format!(
                    "{}: line {} is not a j_x,j_y pair",
                    input.display(),
                    index + 1
                )))
            }
        }
    }
    let (b_z, stderr) = magnetometry::fit_bz(
        &pairs,
        run_config.field.evolution_time_s,
        run_config.field.gyromagnetic_rad_per_s_t(),
    )?;
    println!(
        "{{\"n_points\": {}, \"b_z_tesla\": {}, \"b_z_stderr_tesla\": {}, \
         \"b_z_nt\": {}, \"b_z_stderr_nt\": {}}}",
        pairs.len(),
        format_float(b_z),
        format_float(stderr),
        format_float(b_z * 1e9),
        format_float(stderr * 1e9),
    );
    Ok(())
}
