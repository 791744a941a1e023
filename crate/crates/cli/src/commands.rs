//! Command resolution and execution.

use crate::args::{
    ChaosArgs, Cli, Command, ConstantsArgs, CroftonArgs, CurveArgs, KacriceArgs, KostlanCommand, Mode, ReplayArgs,
    SimulateArgs,
};
use crate::config::{overlay, resolve_seed, ConfigFile};
use crate::exit::{CliError, Outcome, EXIT_OK, EXIT_USAGE};
use crate::grid::parse_t_grid;
use crate::manifest::{config_hash, tool_version, OutputFile, RunManifest};
use crate::table::{sha256_file, sha256_hex, Cell, Table};
use clap::Parser;
use nodal_core::jacobian_moments::{dnr_curve, moment_curve, moment_limit_large_t, moment_limit_small_t, SamplingMode};
use nodal_core::kostlan_model::{kac_rice_variance, second_chaos_variance};
use nodal_core::limit_model::identity_suite;
use nodal_core::universal_constants::{positivity_report, QuadratureConfig};
use nodal_core::zero_set_mc::{crofton_length_stats, empirical_root_stats, CounterMethod, ZeroStats};
use nodal_core::{DimPair, RngStream};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsParams {
    pub n_max: usize,
    pub seed: u64,
    pub samples_per_node: u64,
    pub nodes_per_panel: usize,
    pub panels: usize,
    pub t_split: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveParams {
    pub n: usize,
    pub r: usize,
    pub t_grid: String,
    pub samples: u64,
    pub seed: u64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosParams {
    pub n: usize,
    pub r: usize,
    pub d: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub d: Vec<usize>,
    pub samples: u64,
    pub seed: u64,
    pub method: CounterMethod,
    pub histogram: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KacriceParams {
    pub n: usize,
    pub r: usize,
    pub d: Vec<usize>,
    pub samples_per_node: u64,
    pub seed: u64,
    pub with_simulation: Option<u64>,
    pub method: CounterMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CroftonParams {
    pub d: Vec<usize>,
    pub samples: u64,
    pub slices: usize,
    pub seed: u64,
    pub method: CounterMethod,
}

/// A fully resolved, table-producing command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params")]
pub enum Job {
    #[serde(rename = "constants")]
    Constants(ConstantsParams),
    #[serde(rename = "dnr")]
    Dnr(CurveParams),
    #[serde(rename = "moments")]
    Moments(CurveParams),
    #[serde(rename = "kostlan chaos")]
    Chaos(ChaosParams),
    #[serde(rename = "kostlan simulate")]
    Simulate(SimulateParams),
    #[serde(rename = "kostlan kacrice")]
    Kacrice(KacriceParams),
    #[serde(rename = "kostlan crofton")]
    Crofton(CroftonParams),
}

/// Files and terminal tables produced by one job.
pub struct JobOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub tables: Vec<(String, Table)>,
    pub outcome: Outcome,
    pub budgets: BTreeMap<String, u64>,
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::usage(format!("missing required --{flag}")))
}

fn pair(n: usize, r: usize) -> Result<DimPair, CliError> {
    Ok(DimPair::new(n, r)?)
}

fn nonempty<T>(v: Vec<T>) -> Result<Vec<T>, CliError> {
    if v.is_empty() {
        return Err(CliError::usage("--d needs at least one value"));
    }
    Ok(v)
}

fn merged<T: Serialize + DeserializeOwned + Default>(flags: &T, cfg: &ConfigFile, section: &str) -> Result<T, CliError> {
    overlay(flags, &cfg.section::<T>(section)?)
}

pub fn resolve_constants(a: ConstantsArgs) -> Result<ConstantsParams, CliError> {
    let q = QuadratureConfig::default();
    let p = ConstantsParams {
        n_max: a.n_max.unwrap_or(6),
        seed: resolve_seed(a.seed)?,
        samples_per_node: a.samples_per_node.unwrap_or(q.mc_samples_per_node),
        nodes_per_panel: a.nodes_per_panel.unwrap_or(q.nodes_per_panel),
        panels: a.panels.unwrap_or(q.panels),
        t_split: a.t_split.unwrap_or(q.t_split),
        t_max: a.t_max.unwrap_or(q.t_max),
    };
    if p.n_max == 0 {
        return Err(CliError::usage("--n-max must be at least 1"));
    }
    quadrature_config(&p).validate()?;
    Ok(p)
}

fn quadrature_config(p: &ConstantsParams) -> QuadratureConfig {
    QuadratureConfig {
        t_split: p.t_split,
        t_max: p.t_max,
        nodes_per_panel: p.nodes_per_panel,
        panels: p.panels,
        mc_samples_per_node: p.samples_per_node,
        ..QuadratureConfig::default()
    }
}

pub fn resolve_curve(a: CurveArgs) -> Result<CurveParams, CliError> {
    let p = CurveParams {
        n: required(a.n, "n")?,
        r: required(a.r, "r")?,
        t_grid: a.t_grid.unwrap_or_else(|| "log:1e-3:40:50".into()),
        samples: a.samples.unwrap_or(100_000),
        seed: resolve_seed(a.seed)?,
        mode: a.mode.unwrap_or(Mode::Independent),
    };
    pair(p.n, p.r)?;
    parse_t_grid(&p.t_grid).map_err(CliError::Usage)?;
    Ok(p)
}

pub fn resolve_chaos(a: ChaosArgs) -> Result<ChaosParams, CliError> {
    let p = ChaosParams { n: required(a.n, "n")?, r: required(a.r, "r")?, d: nonempty(a.d.unwrap_or_else(|| vec![1e5]))? };
    pair(p.n, p.r)?;
    Ok(p)
}

pub fn resolve_simulate(a: SimulateArgs) -> Result<SimulateParams, CliError> {
    Ok(SimulateParams {
        d: nonempty(a.d.unwrap_or_else(|| vec![100]))?,
        samples: a.samples.unwrap_or(10_000),
        seed: resolve_seed(a.seed)?,
        method: a.method.unwrap_or(CounterMethod::Auto),
        histogram: a.histogram.unwrap_or(false),
    })
}

pub fn resolve_kacrice(a: KacriceArgs) -> Result<KacriceParams, CliError> {
    let p = KacriceParams {
        n: a.n.unwrap_or(1),
        r: a.r.unwrap_or(1),
        d: nonempty(a.d.unwrap_or_else(|| vec![50]))?,
        samples_per_node: a.samples_per_node.unwrap_or(200_000),
        seed: resolve_seed(a.seed)?,
        with_simulation: a.with_simulation,
        method: a.method.unwrap_or(CounterMethod::Auto),
    };
    pair(p.n, p.r)?;
    if p.with_simulation.is_some() && (p.n, p.r) != (1, 1) {
        return Err(CliError::usage("--with-simulation compares root counts and needs n = r = 1"));
    }
    Ok(p)
}

pub fn resolve_crofton(a: CroftonArgs) -> Result<CroftonParams, CliError> {
    Ok(CroftonParams {
        d: nonempty(a.d.unwrap_or_else(|| vec![25]))?,
        samples: a.samples.unwrap_or(2000),
        slices: a.slices.unwrap_or(50),
        seed: resolve_seed(a.seed)?,
        method: a.method.unwrap_or(CounterMethod::Auto),
    })
}

/// Streams are keyed by command and degree so that tables never share randomness by accident,
/// while `kacrice --with-simulation` reproduces `simulate` exactly.
pub fn simulate_stream(seed: u64, d: usize) -> RngStream {
    RngStream::new(seed, 0).labeled("kostlan simulate").child(d as u64)
}

pub fn kacrice_stream(seed: u64, d: usize) -> RngStream {
    RngStream::new(seed, 0).labeled("kostlan kacrice").child(d as u64)
}

pub fn crofton_stream(seed: u64, d: usize) -> RngStream {
    RngStream::new(seed, 0).labeled("kostlan crofton").child(d as u64)
}

pub fn curve_stream(seed: u64, label: &str, p: DimPair) -> RngStream {
    RngStream::new(seed, 0).labeled(label).child((p.n * 1024 + p.r) as u64)
}

const STATS_HEADER: [&str; 8] = ["d", "samples", "mean", "mean_ci", "var", "var_ci", "var_over_sqrt_d", "seed"];

fn stats_cells(s: &ZeroStats) -> Vec<Cell> {
    vec![
        s.d.into(),
        s.samples.into(),
        s.mean.into(),
        s.mean_ci.into(),
        s.var.into(),
        s.var_ci.into(),
        s.var_over_sqrt_d.into(),
        s.seed.into(),
    ]
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Constants(_) => "constants",
            Job::Dnr(_) => "dnr",
            Job::Moments(_) => "moments",
            Job::Chaos(_) => "kostlan chaos",
            Job::Simulate(_) => "kostlan simulate",
            Job::Kacrice(_) => "kostlan kacrice",
            Job::Crofton(_) => "kostlan crofton",
        }
    }

    /// File stem of the main table and of the manifest.
    pub fn stem(&self) -> String {
        self.name().replace(' ', "_")
    }

    pub fn params(&self) -> serde_json::Value {
        match serde_json::to_value(self).expect("params serialize") {
            serde_json::Value::Object(mut m) => m.remove("params").unwrap_or_default(),
            _ => unreachable!("adjacently tagged enum"),
        }
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Job, CliError> {
        serde_json::from_value(serde_json::json!({ "command": m.command, "params": m.params }))
            .map_err(|e| CliError::usage(format!("manifest: {e}")))
    }

    pub fn seed(&self) -> u64 {
        match self {
            Job::Constants(p) => p.seed,
            Job::Dnr(p) | Job::Moments(p) => p.seed,
            Job::Chaos(_) => 0,
            Job::Simulate(p) => p.seed,
            Job::Kacrice(p) => p.seed,
            Job::Crofton(p) => p.seed,
        }
    }

    pub fn run(&self) -> Result<JobOutput, CliError> {
        let stem = self.stem();
        let csv = |t: &Table| t.to_csv_bytes();
        let mut budgets = BTreeMap::new();
        let mut outcome = Outcome::Ok;
        let mut files = Vec::new();
        let mut tables = Vec::new();
        match self {
            Job::Constants(p) => {
                let rows = positivity_report(p.n_max, &quadrature_config(p), p.seed)?;
                let mut t = Table::new(&[
                    "n",
                    "r",
                    "I_nr",
                    "I_err",
                    "leading_constant",
                    "lower_bound",
                    "positive",
                    "samples",
                    "seed",
                    "I_stderr",
                    "quad_delta",
                    "tail_bound",
                    "leading_err",
                    "above_lower_bound",
                    "converged",
                ]);
                for c in &rows {
                    if !c.converged {
                        outcome = Outcome::NotConverged;
                    }
                    t.push(vec![
                        c.pair.n.into(),
                        c.pair.r.into(),
                        c.i_nr.into(),
                        c.i_err.into(),
                        c.leading_constant.into(),
                        c.lower_bound.into(),
                        c.positive.into(),
                        c.samples.into(),
                        c.seed.into(),
                        c.i_stderr.into(),
                        c.quad_delta.into(),
                        c.tail_bound.into(),
                        c.leading_err.into(),
                        c.above_lower_bound.into(),
                        c.converged.into(),
                    ]);
                }
                budgets.insert("samples_per_node".into(), p.samples_per_node);
                files.push((format!("{stem}.csv"), csv(&t)));
                tables.push((stem.clone(), t));
            }
            Job::Dnr(p) | Job::Moments(p) => {
                let dp = pair(p.n, p.r)?;
                let ts = parse_t_grid(&p.t_grid).map_err(CliError::Usage)?;
                let mode = match p.mode {
                    Mode::Independent => SamplingMode::Independent,
                    Mode::Crn => SamplingMode::CommonRandomNumbers,
                };
                let stream = curve_stream(p.seed, self.name(), dp);
                let t = if matches!(self, Job::Dnr(_)) {
                    let mut t = Table::new(&["t", "E_odet_pair", "stderr", "Dnr", "Dnr_stderr"]);
                    for e in dnr_curve(&ts, dp, p.samples, stream, mode)? {
                        t.push(vec![e.t.into(), e.moment.mean.into(), e.moment.stderr.into(), e.value.into(), e.stderr.into()]);
                    }
                    t
                } else {
                    let mut t = Table::new(&["t", "mean", "stderr", "limit_large_t", "limit_small_t"]);
                    let large = moment_limit_large_t(dp);
                    for e in moment_curve(&ts, dp, p.samples, stream, mode)? {
                        t.push(vec![
                            e.t.into(),
                            e.mean.into(),
                            e.stderr.into(),
                            large.into(),
                            moment_limit_small_t(dp, e.t).into(),
                        ]);
                    }
                    t
                };
                budgets.insert("samples_per_point".into(), p.samples);
                files.push((format!("{stem}.csv"), csv(&t)));
                tables.push((stem.clone(), t));
            }
            Job::Chaos(p) => {
                let dp = pair(p.n, p.r)?;
                let mut t = Table::new(&[
                    "d",
                    "n",
                    "r",
                    "J",
                    "var2",
                    "normalized_var2",
                    "limit",
                    "rel_err",
                    "J_error",
                    "converged",
                ]);
                for &d in &p.d {
                    let s = second_chaos_variance(d, dp)?;
                    if !s.converged {
                        outcome = Outcome::NotConverged;
                    }
                    t.push(vec![
                        d.into(),
                        p.n.into(),
                        p.r.into(),
                        s.j.into(),
                        s.var.into(),
                        s.normalized_var.into(),
                        s.limit.into(),
                        s.rel_err.into(),
                        s.j_error.into(),
                        s.converged.into(),
                    ]);
                }
                files.push((format!("{stem}.csv"), csv(&t)));
                tables.push((stem.clone(), t));
            }
            Job::Simulate(p) => {
                let mut header = STATS_HEADER.to_vec();
                header.extend(["expected_mean", "violations", "ill_conditioned"]);
                let mut t = Table::new(&header);
                let mut hist = BTreeMap::new();
                for &d in &p.d {
                    let s = empirical_root_stats(d, p.samples, simulate_stream(p.seed, d), p.method)?;
                    if s.violations > 0 {
                        outcome = Outcome::NotConverged;
                    }
                    let mut row = stats_cells(&s);
                    row.extend([(d as f64).sqrt().into(), s.violations.into(), s.ill_conditioned.into()]);
                    t.push(row);
                    hist.insert(d, s.histogram);
                }
                budgets.insert("samples".into(), p.samples);
                files.push((format!("{stem}.csv"), csv(&t)));
                if p.histogram {
                    let mut text = serde_json::to_string_pretty(&hist).map_err(anyhow::Error::from)?;
                    text.push('\n');
                    files.push((format!("{stem}_histogram.json"), text.into_bytes()));
                }
                tables.push((stem.clone(), t));
            }
            Job::Kacrice(p) => {
                let dp = pair(p.n, p.r)?;
                let mut t = Table::new(&[
                    "d",
                    "n",
                    "r",
                    "variance",
                    "stderr",
                    "var_over_sqrt_d",
                    "off_diagonal",
                    "diagonal",
                    "nodes",
                    "samples",
                    "seed",
                ]);
                let mut cmp = Table::new(&[
                    "d",
                    "kacrice_var",
                    "kacrice_stderr",
                    "simulate_var",
                    "simulate_var_ci",
                    "simulate_samples",
                    "rel_diff",
                ]);
                for &d in &p.d {
                    let k = kac_rice_variance(d, dp, p.samples_per_node, kacrice_stream(p.seed, d))?;
                    t.push(vec![
                        d.into(),
                        p.n.into(),
                        p.r.into(),
                        k.variance.into(),
                        k.stderr.into(),
                        (k.variance / (d as f64).sqrt()).into(),
                        k.off_diagonal.into(),
                        k.diagonal.into(),
                        k.nodes.into(),
                        k.samples.into(),
                        k.seed.into(),
                    ]);
                    if let Some(n) = p.with_simulation {
                        let s = empirical_root_stats(d, n, simulate_stream(p.seed, d), p.method)?;
                        if s.violations > 0 {
                            outcome = Outcome::NotConverged;
                        }
                        cmp.push(vec![
                            d.into(),
                            k.variance.into(),
                            k.stderr.into(),
                            s.var.into(),
                            s.var_ci.into(),
                            n.into(),
                            ((s.var - k.variance) / k.variance).into(),
                        ]);
                    }
                }
                budgets.insert("samples_per_node".into(), p.samples_per_node);
                files.push((format!("{stem}.csv"), csv(&t)));
                tables.push((stem.clone(), t));
                if let Some(n) = p.with_simulation {
                    budgets.insert("simulation_samples".into(), n);
                    files.push(("kostlan_compare.csv".into(), csv(&cmp)));
                    tables.push(("kostlan_compare".into(), cmp));
                }
            }
            Job::Crofton(p) => {
                let mut header = STATS_HEADER.to_vec();
                header.extend(["slices", "stderr", "expected_length", "violations", "ill_conditioned"]);
                let mut t = Table::new(&header);
                for &d in &p.d {
                    let s = crofton_length_stats(d, p.samples, p.slices, crofton_stream(p.seed, d), p.method)?;
                    if s.violations > 0 {
                        outcome = Outcome::NotConverged;
                    }
                    let mut row = stats_cells(&s);
                    row.extend([
                        p.slices.into(),
                        s.mean_stderr().into(),
                        (PI * (d as f64).sqrt()).into(),
                        s.violations.into(),
                        s.ill_conditioned.into(),
                    ]);
                    t.push(row);
                }
                budgets.insert("samples".into(), p.samples);
                budgets.insert("slices_per_sample".into(), p.slices as u64);
                files.push((format!("{stem}.csv"), csv(&t)));
                tables.push((stem.clone(), t));
            }
        }
        Ok(JobOutput { files, tables, outcome, budgets })
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn manifest_path(job: &Job, out_dir: &Path) -> PathBuf {
    out_dir.join(format!("{}.manifest.json", job.stem()))
}

/// Run a job, write its files and manifest into `out_dir`, print its tables.
pub fn execute(job: &Job, out_dir: &Path, quiet: bool) -> Result<(Outcome, RunManifest), CliError> {
    let started = now();
    let out = job.run()?;
    std::fs::create_dir_all(out_dir)?;
    let mut outputs = Vec::new();
    for (name, bytes) in &out.files {
        std::fs::write(out_dir.join(name), bytes)?;
        outputs.push(OutputFile { path: name.clone(), sha256: sha256_hex(bytes) });
    }
    let params = job.params();
    let manifest = RunManifest {
        command: job.name().to_string(),
        config_hash: config_hash(job.name(), &params),
        params,
        seed: job.seed(),
        sample_budgets: out.budgets,
        started,
        finished: now(),
        outputs,
        tool_version: tool_version(),
    };
    let mpath = manifest_path(job, out_dir);
    manifest.write(&mpath)?;
    if !quiet {
        for (title, t) in &out.tables {
            println!("# {title}\n{}", t.render());
        }
        for f in &manifest.outputs {
            println!("wrote {}", out_dir.join(&f.path).display());
        }
        println!("wrote {}", mpath.display());
    }
    Ok((out.outcome, manifest))
}

/// Re-run a manifest into `out_dir` and compare the new files with the recorded hashes.
pub fn replay(args: &ReplayArgs) -> Result<Outcome, CliError> {
    let m = RunManifest::read(&args.manifest)
        .map_err(|e| CliError::usage(format!("cannot read manifest {}: {e:#}", args.manifest.display())))?;
    if config_hash(&m.command, &m.params) != m.config_hash {
        return Err(CliError::usage("manifest config_hash does not match its params"));
    }
    let job = Job::from_manifest(&m)?;
    let out_dir = match &args.out {
        Some(d) => d.clone(),
        None => args.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let (outcome, _) = execute(&job, &out_dir, true)?;
    let mut result = outcome;
    for f in &m.outputs {
        let got = sha256_file(&out_dir.join(&f.path)).ok();
        if got.as_deref() == Some(f.sha256.as_str()) {
            println!("identical  {}", f.path);
        } else {
            println!("DIFFERENT  {}", f.path);
            result = result.worst(Outcome::Mismatch);
        }
    }
    Ok(result)
}

fn limit_check() -> Result<Outcome, CliError> {
    let mut t = Table::new(&["identity", "max_err", "tol", "result"]);
    let mut outcome = Outcome::Ok;
    for c in identity_suite()? {
        if !c.passed {
            outcome = Outcome::NotConverged;
        }
        t.push(vec![c.name.into(), c.max_err.into(), c.tol.into(), (if c.passed { "PASS" } else { "FAIL" }).into()]);
    }
    print!("{}", t.render());
    Ok(outcome)
}

fn out_dir(o: Option<PathBuf>) -> PathBuf {
    o.unwrap_or_else(|| PathBuf::from("."))
}

fn dispatch(cli: Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(anyhow::Error::from)?;
    }
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let (job, out) = match cli.command {
        Command::LimitCheck => return limit_check(),
        Command::Replay(a) => return replay(&a),
        Command::Constants(a) => {
            let a = merged(&a, &cfg, "constants")?;
            let out = a.out.clone();
            (Job::Constants(resolve_constants(a)?), out)
        }
        Command::Dnr(a) => {
            let a = merged(&a, &cfg, "dnr")?;
            let out = a.out.clone();
            (Job::Dnr(resolve_curve(a)?), out)
        }
        Command::Moments(a) => {
            let a = merged(&a, &cfg, "moments")?;
            let out = a.out.clone();
            (Job::Moments(resolve_curve(a)?), out)
        }
        Command::Kostlan(k) => match k {
            KostlanCommand::Chaos(a) => {
                let a = merged(&a, &cfg, "kostlan_chaos")?;
                let out = a.out.clone();
                (Job::Chaos(resolve_chaos(a)?), out)
            }
            KostlanCommand::Simulate(a) => {
                let a = merged(&a, &cfg, "kostlan_simulate")?;
                let out = a.out.clone();
                (Job::Simulate(resolve_simulate(a)?), out)
            }
            KostlanCommand::Kacrice(a) => {
                let a = merged(&a, &cfg, "kostlan_kacrice")?;
                let out = a.out.clone();
                (Job::Kacrice(resolve_kacrice(a)?), out)
            }
            KostlanCommand::Crofton(a) => {
                let a = merged(&a, &cfg, "kostlan_crofton")?;
                let out = a.out.clone();
                (Job::Crofton(resolve_crofton(a)?), out)
            }
        },
    };
    Ok(execute(&job, &out_dir(out), false)?.0)
}

/// Parse, run, and map everything to the exit-code contract.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(o) => o.code(),
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
