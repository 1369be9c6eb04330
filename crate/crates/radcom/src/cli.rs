//! Configuration files, overrides, run manifests and the subcommand
//! implementations behind the binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admm::{run_with, RadComSolution};
use crate::config::{AccessMode, CsitMode, SolverKnobs, SystemConfig};
use crate::experiments::{
    evaluate_solution, run_sweep, tradeoff_csv, tradeoff_curve, ErbseAggregation, SweepPlan,
};
use crate::model::{
    grid_gains, sample_channel_estimate, BeampatternSpec, CommonRateShares, Precoder,
};
use crate::rng;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config file {path}: {message}")]
    Config { path: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Other(String),
}

/// Serialized configuration schema. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub system: SystemSection,
    #[serde(default)]
    pub beampattern: BeampatternSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub solver: SolverKnobs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n_tx: usize,
    pub n_users: usize,
    /// Exactly one of the two power fields must be set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_total_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_total_linear: Option<f64>,
    pub antenna_spacing: f64,
    pub user_weights: Vec<f64>,
    pub qos_threshold: f64,
    pub reg_lambda: f64,
    pub admm_penalty: f64,
    pub admm_tolerance: f64,
    pub csit_exponent: f64,
    pub channel_variances: Vec<f64>,
    pub saa_samples: usize,
    pub access_mode: AccessMode,
    pub csit_mode: CsitMode,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternShape {
    Rect,
    ArrayMatched,
    Custom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeampatternSection {
    pub shape: PatternShape,
    pub target_deg: f64,
    pub rect_halfwidth_deg: f64,
    /// Custom grid (degrees) and desired values; required for `custom`.
    pub custom_angles_deg: Option<Vec<f64>>,
    pub custom_desired: Option<Vec<f64>>,
}

impl Default for BeampatternSection {
    fn default() -> Self {
        BeampatternSection {
            shape: PatternShape::Rect,
            target_deg: 0.0,
            rect_halfwidth_deg: 5.0,
            custom_angles_deg: None,
            custom_desired: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub lambdas: Vec<f64>,
    pub n_realizations: usize,
    /// Mode tokens: `rsma`, `sdma` (paired with the system csit mode) or
    /// explicit `rsma_partial`, `sdma_perfect`, ...
    pub modes: Vec<String>,
    pub eval_samples: usize,
    pub erbse_aggregation: ErbseAggregation,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            lambdas: (0..9).map(|i| 10f64.powi(-9 + i)).collect(),
            n_realizations: 20,
            modes: vec!["rsma".into(), "sdma".into()],
            eval_samples: 1000,
            erbse_aggregation: ErbseAggregation::RootThenMean,
        }
    }
}

impl ConfigFile {
    pub fn example() -> Self {
        let sys = SystemConfig::default();
        ConfigFile {
            schema_version: SCHEMA_VERSION,
            system: SystemSection {
                n_tx: sys.n_tx,
                n_users: sys.n_users,
                power_total_dbm: Some(20.0),
                power_total_linear: None,
                antenna_spacing: sys.antenna_spacing,
                user_weights: sys.user_weights,
                qos_threshold: sys.qos_threshold,
                reg_lambda: sys.reg_lambda,
                admm_penalty: sys.admm_penalty,
                admm_tolerance: sys.admm_tolerance,
                csit_exponent: sys.csit_exponent,
                channel_variances: sys.channel_variances,
                saa_samples: sys.saa_samples,
                access_mode: sys.access_mode,
                csit_mode: sys.csit_mode,
                rng_seed: sys.rng_seed,
            },
            beampattern: BeampatternSection::default(),
            sweep: SweepSection::default(),
            solver: SolverKnobs::default(),
        }
    }

    pub fn system_config(&self) -> Result<SystemConfig, String> {
        let power_total = match (self.system.power_total_dbm, self.system.power_total_linear) {
            (Some(dbm), None) => 10f64.powf(dbm / 10.0),
            (None, Some(lin)) => lin,
            (Some(_), Some(_)) => {
                return Err(
                    "system: set exactly one of power_total_dbm / power_total_linear".into(),
                )
            }
            (None, None) => {
                return Err(
                    "system: one of power_total_dbm / power_total_linear is required".into(),
                )
            }
        };
        let cfg = SystemConfig {
            n_tx: self.system.n_tx,
            n_users: self.system.n_users,
            power_total,
            antenna_spacing: self.system.antenna_spacing,
            user_weights: self.system.user_weights.clone(),
            qos_threshold: self.system.qos_threshold,
            reg_lambda: self.system.reg_lambda,
            admm_penalty: self.system.admm_penalty,
            admm_tolerance: self.system.admm_tolerance,
            csit_exponent: self.system.csit_exponent,
            channel_variances: self.system.channel_variances.clone(),
            saa_samples: self.system.saa_samples,
            access_mode: self.system.access_mode,
            csit_mode: self.system.csit_mode,
            rng_seed: self.system.rng_seed,
        };
        cfg.validate().map_err(|e| format!("system: {e}"))?;
        Ok(cfg)
    }

    pub fn beampattern_spec(&self, n_tx: usize, spacing: f64) -> Result<BeampatternSpec, String> {
        let b = &self.beampattern;
        match b.shape {
            PatternShape::Rect => Ok(BeampatternSpec::rectangular(
                b.target_deg,
                b.rect_halfwidth_deg,
            )),
            PatternShape::ArrayMatched => {
                Ok(BeampatternSpec::array_matched(b.target_deg, n_tx, spacing))
            }
            PatternShape::Custom => {
                let angles = b
                    .custom_angles_deg
                    .as_ref()
                    .ok_or("beampattern: custom shape requires custom_angles_deg")?;
                let desired = b
                    .custom_desired
                    .as_ref()
                    .ok_or("beampattern: custom shape requires custom_desired")?;
                BeampatternSpec::new(
                    angles.iter().map(|d| d.to_radians()).collect(),
                    desired.clone(),
                    1.0,
                )
                .map_err(|e| format!("beampattern: {e}"))
            }
        }
    }

    pub fn sweep_plan(&self, system_csit: CsitMode) -> Result<SweepPlan, String> {
        let mut modes = Vec::new();
        for token in &self.sweep.modes {
            modes.push(parse_mode_token(token, system_csit)?);
        }
        let plan = SweepPlan {
            lambdas: self.sweep.lambdas.clone(),
            n_realizations: self.sweep.n_realizations,
            modes,
            eval_samples: self.sweep.eval_samples,
            erbse_aggregation: self.sweep.erbse_aggregation,
        };
        plan.validate()?;
        Ok(plan)
    }
}

pub fn parse_mode_token(
    token: &str,
    default_csit: CsitMode,
) -> Result<(AccessMode, CsitMode), String> {
    let parts: Vec<&str> = token.split('_').collect();
    let access = match parts[0] {
        "rsma" => AccessMode::Rsma,
        "sdma" => AccessMode::Sdma,
        other => return Err(format!("unknown access mode '{other}'")),
    };
    let csit = match parts.get(1) {
        None => default_csit,
        Some(&"perfect") => CsitMode::Perfect,
        Some(&"partial") => CsitMode::Partial,
        Some(other) => return Err(format!("unknown csit mode '{other}'")),
    };
    Ok((access, csit))
}

/// Loads a config file, applies dotted-path `--set` overrides, then parses
/// the typed schema (fail-closed on unknown keys).
pub fn load_config(path: &Path, overrides: &[String]) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    for ov in overrides {
        apply_override(&mut value, ov).map_err(|message| CliError::Config {
            path: path.display().to_string(),
            message,
        })?;
    }
    let parsed: ConfigFile = serde_json::from_value(value).map_err(|e| CliError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    if parsed.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config {
            path: path.display().to_string(),
            message: format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                parsed.schema_version
            ),
        });
    }
    Ok(parsed)
}

/// `--set key=value` with dotted paths. A bare key is resolved against the
/// sections when it appears in exactly one of them.
fn apply_override(value: &mut serde_json::Value, spec: &str) -> Result<(), String> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("override '{spec}' must have the form key=value"))?;
    let parsed: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let sections = ["system", "beampattern", "sweep", "solver"];
    let segments: Vec<&str> = path.split('.').collect();
    let full_path: Vec<String> = if segments.len() == 1 && !sections.contains(&segments[0]) {
        let key = segments[0];
        let hits: Vec<&str> = sections
            .iter()
            .copied()
            .filter(|s| {
                value
                    .get(s)
                    .and_then(|sec| sec.get(key))
                    .is_some()
            })
            .collect();
        match hits.len() {
            1 => vec![hits[0].to_string(), key.to_string()],
            0 => return Err(format!("override key '{key}' not found in any section")),
            _ => {
                return Err(format!(
                    "override key '{key}' is ambiguous (found in {hits:?}); use a dotted path"
                ))
            }
        }
    } else {
        segments.iter().map(|s| s.to_string()).collect()
    };
    let mut cursor = value;
    for (i, seg) in full_path.iter().enumerate() {
        if i + 1 == full_path.len() {
            let obj = cursor
                .as_object_mut()
                .ok_or_else(|| format!("override path '{path}' does not address an object"))?;
            obj.insert(seg.clone(), parsed);
            return Ok(());
        }
        cursor = cursor
            .get_mut(seg)
            .ok_or_else(|| format!("override path segment '{seg}' not found"))?;
    }
    unreachable!("loop returns on the last segment")
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    artifact_version: &'static str,
    schema_version: u32,
    created_unix_ms: u128,
    seed: u64,
    outputs: Vec<String>,
    config: &'a ConfigFile,
}

fn write_manifest(
    out_dir: &Path,
    config: &ConfigFile,
    seed: u64,
    outputs: &[PathBuf],
) -> Result<PathBuf, CliError> {
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        created_unix_ms: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        seed,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        config,
    };
    let path = out_dir.join("manifest.json");
    write_file(
        &path,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&manifest).expect("manifest serializes")
        ),
    )?;
    Ok(path)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    announce(path);
    Ok(())
}

fn announce(path: &Path) {
    let absolute = path
        .canonicalize()
        .unwrap_or_else(|_| path.to_path_buf());
    println!("wrote {}", absolute.display());
}

fn precoder_csv(precoder: &Precoder) -> String {
    let mut out = String::from("antenna");
    for j in 0..precoder.n_streams() {
        out.push_str(&format!(",stream_{j}_re,stream_{j}_im"));
    }
    out.push('\n');
    for i in 0..precoder.n_tx() {
        out.push_str(&format!("{i}"));
        for j in 0..precoder.n_streams() {
            let v = precoder.matrix()[(i, j)];
            out.push_str(&format!(",{},{}", v.re, v.im));
        }
        out.push('\n');
    }
    out
}

pub fn parse_precoder_csv(text: &str) -> Result<Precoder, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty precoder csv")?;
    let cols = header.split(',').count();
    if cols < 3 || (cols - 1) % 2 != 0 {
        return Err("unexpected precoder csv header".into());
    }
    let n_streams = (cols - 1) / 2;
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(format!("row has {} fields, expected {cols}", fields.len()));
        }
        let mut row = Vec::with_capacity(n_streams);
        for j in 0..n_streams {
            let re: f64 = fields[1 + 2 * j].parse().map_err(|_| "bad float")?;
            let im: f64 = fields[2 + 2 * j].parse().map_err(|_| "bad float")?;
            row.push(Complex::new(re, im));
        }
        rows.push(row);
    }
    let n_tx = rows.len();
    if n_tx == 0 {
        return Err("precoder csv has no antenna rows".into());
    }
    Ok(Precoder::new(DMatrix::from_fn(n_tx, n_streams, |i, j| {
        rows[i][j]
    })))
}

fn beampattern_csv(
    precoder: &Precoder,
    spec: &BeampatternSpec,
    pattern_scale: f64,
    spacing: f64,
) -> String {
    let gains = grid_gains(precoder, spec, spacing);
    let mut out = String::from("angle_deg,desired_scaled,gain\n");
    for ((&a, &d), g) in spec.angles.iter().zip(&spec.desired).zip(gains) {
        out.push_str(&format!("{},{},{}\n", a.to_degrees(), pattern_scale * d, g));
    }
    out
}

fn residuals_csv(solution: &RadComSolution) -> String {
    let mut out = String::from("iteration,primal_residual,dual_residual,awsr_surrogate,bse\n");
    for r in &solution.history {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.iteration, r.primal_residual, r.dual_residual, r.awsr_surrogate, r.bse
        ));
    }
    out
}

pub struct CommonArgs {
    pub config_path: PathBuf,
    pub overrides: Vec<String>,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub dump_conic_failures: bool,
}

fn prepare(
    args: &CommonArgs,
) -> Result<(ConfigFile, SystemConfig, BeampatternSpec, SolverKnobs), CliError> {
    let mut file = load_config(&args.config_path, &args.overrides)?;
    if let Some(seed) = args.seed {
        file.system.rng_seed = seed;
    }
    let system = file
        .system_config()
        .map_err(|message| CliError::Config {
            path: args.config_path.display().to_string(),
            message,
        })?;
    let spec = file
        .beampattern_spec(system.n_tx, system.antenna_spacing)
        .map_err(|message| CliError::Config {
            path: args.config_path.display().to_string(),
            message,
        })?;
    let knobs = file.solver.clone();
    if let Some(jobs) = args.jobs {
        // ignore failure when a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    Ok((file, system, spec, knobs))
}

/// `run`: one optimization on realization 0 of the channel stream.
/// Exit code 0 on convergence, 2 on non-convergence, 1 on invalid input.
pub fn cmd_run(args: &CommonArgs) -> i32 {
    match run_inner(args) {
        Ok(converged) => {
            if converged {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run_inner(args: &CommonArgs) -> Result<bool, CliError> {
    let (file, system, spec, knobs) = prepare(args)?;
    let outputs = [
        args.out_dir.join("precoder.csv"),
        args.out_dir.join("beampattern.csv"),
        args.out_dir.join("residuals.csv"),
    ];
    fs::create_dir_all(&args.out_dir).map_err(|source| CliError::Io {
        path: args.out_dir.display().to_string(),
        source,
    })?;
    write_manifest(&args.out_dir, &file, system.rng_seed, &outputs)?;

    let mut channel_rng = rng::stream(system.rng_seed, "channel", &[0]);
    let mut run_cfg = system.clone();
    run_cfg.rng_seed = rng::derive_seed(system.rng_seed, "realization", &[0]);
    let estimate = sample_channel_estimate(&run_cfg, &mut channel_rng);
    let solution =
        run_with(&run_cfg, &estimate, &spec, &knobs).map_err(|e| CliError::Other(e.to_string()))?;

    let mut eval_rng = rng::stream(system.rng_seed, "eval", &[0]);
    let eval = evaluate_solution(
        &solution,
        &estimate,
        &spec,
        &run_cfg,
        file.sweep.eval_samples,
        &mut eval_rng,
    );
    println!(
        "converged: {} after {} iterations; weighted sum-rate {:.4} bps/Hz, root pattern error {:.4}, \
         common power fraction {:.3}",
        solution.converged,
        solution.iterations,
        eval.weighted_sum_rate,
        eval.rbse,
        eval.common_power_frac
    );
    write_file(&outputs[0], &precoder_csv(&solution.precoder))?;
    write_file(
        &outputs[1],
        &beampattern_csv(
            &solution.precoder,
            &spec,
            solution.pattern_scale,
            system.antenna_spacing,
        ),
    )?;
    write_file(&outputs[2], &residuals_csv(&solution))?;
    Ok(solution.converged)
}

pub struct SweepArgs {
    pub common: CommonArgs,
    pub modes: Option<String>,
    pub realizations: Option<usize>,
    pub lambdas: Option<String>,
}

/// `sweep`: the full trade-off study. Exit 0 when any point was produced.
pub fn cmd_sweep(args: &SweepArgs) -> i32 {
    match sweep_inner(args) {
        Ok(points) if points > 0 => 0,
        Ok(_) => {
            eprintln!("error: sweep produced no points");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn sweep_inner(args: &SweepArgs) -> Result<usize, CliError> {
    let (mut file, system, spec, knobs) = prepare(&args.common)?;
    if let Some(modes) = &args.modes {
        file.sweep.modes = modes.split(',').map(|s| s.trim().to_string()).collect();
    }
    if let Some(n) = args.realizations {
        file.sweep.n_realizations = n;
    }
    if let Some(lambdas) = &args.lambdas {
        let parsed: Result<Vec<f64>, _> = lambdas
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect();
        file.sweep.lambdas = parsed.map_err(|e| CliError::Config {
            path: args.common.config_path.display().to_string(),
            message: format!("bad --lambdas: {e}"),
        })?;
    }
    let plan = file
        .sweep_plan(system.csit_mode)
        .map_err(|message| CliError::Config {
            path: args.common.config_path.display().to_string(),
            message,
        })?;

    let mut outputs = Vec::new();
    for &(access, csit) in &plan.modes {
        let (a, c) = match (access, csit) {
            (AccessMode::Rsma, CsitMode::Partial) => ("rsma", "partial"),
            (AccessMode::Rsma, CsitMode::Perfect) => ("rsma", "perfect"),
            (AccessMode::Sdma, CsitMode::Partial) => ("sdma", "partial"),
            (AccessMode::Sdma, CsitMode::Perfect) => ("sdma", "perfect"),
        };
        outputs.push(args.common.out_dir.join(format!("tradeoff_{a}_{c}.csv")));
        outputs.push(args.common.out_dir.join(format!("tradeoff_curve_{a}_{c}.dat")));
    }
    fs::create_dir_all(&args.common.out_dir).map_err(|source| CliError::Io {
        path: args.common.out_dir.display().to_string(),
        source,
    })?;
    write_manifest(&args.common.out_dir, &file, system.rng_seed, &outputs)?;

    let sweeps =
        run_sweep(&plan, &system, &spec, &knobs).map_err(CliError::Other)?;
    let mut points = 0;
    for (i, sweep) in sweeps.iter().enumerate() {
        points += sweep.points.iter().filter(|p| p.n_ok > 0).count();
        write_file(&outputs[2 * i], &tradeoff_csv(sweep, system.n_users))?;
        write_file(&outputs[2 * i + 1], &tradeoff_curve(sweep))?;
        for p in &sweep.points {
            println!(
                "{:?}/{:?} lambda {:.1e}: ewsr {:.4} erbse {:.4} ({} ok, {} infeasible)",
                sweep.access_mode, sweep.csit_mode, p.lambda, p.ewsr, p.erbse, p.n_ok, p.n_infeasible
            );
        }
    }
    Ok(points)
}

pub struct EvalArgs {
    pub common: CommonArgs,
    pub precoder_path: PathBuf,
}

/// `eval`: re-evaluate a stored precoder against the configured scenario.
pub fn cmd_eval(args: &EvalArgs) -> i32 {
    match eval_inner(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn eval_inner(args: &EvalArgs) -> Result<(), CliError> {
    let (file, system, spec, _) = prepare(&args.common)?;
    let text = fs::read_to_string(&args.precoder_path).map_err(|source| CliError::Io {
        path: args.precoder_path.display().to_string(),
        source,
    })?;
    let precoder = parse_precoder_csv(&text).map_err(CliError::Other)?;
    if precoder.n_tx() != system.n_tx || precoder.n_streams() != system.n_streams() {
        return Err(CliError::Other(format!(
            "precoder shape {}x{} does not match config ({}x{})",
            precoder.n_tx(),
            precoder.n_streams(),
            system.n_tx,
            system.n_streams()
        )));
    }
    let mut channel_rng = rng::stream(system.rng_seed, "channel", &[0]);
    let estimate = sample_channel_estimate(&system, &mut channel_rng);
    let gains = grid_gains(&precoder, &spec, system.antenna_spacing);
    let scale = crate::radar::optimal_pattern_scale(&gains, &spec.desired)
        .map_err(|e| CliError::Other(e.to_string()))?;
    let solution = RadComSolution {
        precoder,
        shares: CommonRateShares::zeros(system.n_users),
        pattern_scale: scale,
        converged: true,
        iterations: 0,
        history: Vec::new(),
    };
    let mut eval_rng = rng::stream(system.rng_seed, "eval", &[0]);
    let eval = evaluate_solution(
        &solution,
        &estimate,
        &spec,
        &system,
        file.sweep.eval_samples,
        &mut eval_rng,
    );
    let out = args.common.out_dir.join("eval.csv");
    fs::create_dir_all(&args.common.out_dir).map_err(|source| CliError::Io {
        path: args.common.out_dir.display().to_string(),
        source,
    })?;
    let mut csv = String::from("metric,value\n");
    csv.push_str(&format!("weighted_sum_rate,{}\n", eval.weighted_sum_rate));
    csv.push_str(&format!("rbse,{}\n", eval.rbse));
    csv.push_str(&format!("pattern_scale,{scale}\n"));
    for (k, v) in eval.per_user_total.iter().enumerate() {
        csv.push_str(&format!("ar_user_{},{v}\n", k + 1));
    }
    write_file(&out, &csv)?;
    println!(
        "weighted sum-rate {:.4} bps/Hz, root pattern error {:.4}",
        eval.weighted_sum_rate, eval.rbse
    );
    Ok(())
}
