//! Command implementations behind the `cbctt` binary.
//!
//! Exit codes: 0 on success (for `solve` and `validate`: a feasible
//! timetable), 2 when the produced or checked timetable is infeasible or the
//! instance is provably infeasible, 1 on usage, I/O or parse errors.

pub mod io;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use cbctt::annealer::{anneal_with, AnnealOptions, SaParams};
use cbctt::evaluation::{format_solution, full_cost, parse_solution};
use cbctt::instance::{extract_features, validate_instance, FindingKind, Instance, FEATURE_NAMES};
use cbctt::tuning::{
    build_performance_matrix, cross_validate_accuracy, f_race, full_space, hammersley_points, permutation_importance,
    refined_space, scale_to_ranges, screen_instances, ConfigModel, ConfigPoint, ForestParams, RaceOptions, ResultTable,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::io::{FeatureRow, RunRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cbctt", version, about = "Curriculum-based course timetabling: solver and parameter tuning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run simulated annealing on one instance and print the timetable.
    Solve(SolveArgs),
    /// Screen an instance, or score a solution against it.
    Validate(ValidateArgs),
    /// Print the seven instance features as JSON lines.
    Features(FeaturesArgs),
    /// Write Hammersley-sampled configurations to CSV.
    SampleConfigs(SampleArgs),
    /// Race configurations over instances with F-Race.
    Race(RaceArgs),
    /// Run every (instance, config, seed) triple, resuming from the run log.
    Experiment(ExperimentArgs),
    /// Build the good-configuration matrix from a run log.
    BuildMatrix(BuildMatrixArgs),
    /// Train the per-configuration random forests.
    Train(TrainArgs),
    /// Pick a configuration for an instance with a trained model.
    Predict(PredictArgs),
}

/// Annealing parameters; defaults are the tuned configuration.
#[derive(Debug, Clone, Args)]
pub struct SaArgs {
    #[arg(long, default_value_t = 30.25)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.1567)]
    pub t_min: f64,
    /// Accepted-to-sampled ratio that triggers early cooling.
    #[arg(long, default_value_t = 0.0364)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.99)]
    pub cooling_rate: f64,
    #[arg(long, default_value_t = 0.43)]
    pub swap_rate: f64,
    #[arg(long, default_value_t = 100)]
    pub w_hard: u64,
    #[arg(long = "max-iterations", alias = "iterations", default_value_t = cbctt::annealer::DEFAULT_MAX_ITERATIONS)]
    pub iterations: u64,
}

impl SaArgs {
    pub fn params(&self) -> SaParams<f64> {
        SaParams {
            t0: self.t0,
            t_min: self.t_min,
            cooling_rate: self.cooling_rate,
            accept_ratio: self.rho,
            swap_rate: self.swap_rate,
            w_hard: self.w_hard,
            max_iterations: self.iterations,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub sa: SaArgs,
    /// Wall-clock limit in seconds, on top of the iteration budget.
    #[arg(long = "max-seconds")]
    pub time_limit: Option<f64>,
    /// Write the timetable here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Write the run record (parameters, seed, cost breakdown) as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub instance: PathBuf,
    /// Solution file in `course room day timeslot` format.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub w_hard: u64,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Instance files or directories of `.ctt` files.
    #[arg(required = true)]
    pub instances: Vec<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Space {
    /// T0, T_min and rho on their narrowed ranges.
    Refined,
    /// All six parameters on their initial ranges.
    Full,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, short, default_value_t = 20)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Space::Refined)]
    pub space: Space,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ParallelArgs {
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "CBCTT_PARALLELISM")]
    pub parallelism: Option<usize>,
}

impl ParallelArgs {
    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.parallelism {
            if n == 0 {
                bail!("--parallelism must be at least 1");
            }
            b = b.num_threads(n);
        }
        Ok(b.build()?)
    }
}

#[derive(Debug, Args)]
pub struct RaceArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub instances: Vec<PathBuf>,
    #[arg(long)]
    pub configs: PathBuf,
    /// Iteration budget per solver run.
    #[arg(long = "max-iterations", alias = "iterations", default_value_t = 1_000_000)]
    pub iterations: u64,
    #[arg(long, default_value_t = 1)]
    pub runs_per_step: usize,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    /// Maximum number of solver runs.
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
    #[arg(long, default_value_t = 5)]
    pub first_test: usize,
    /// Write the surviving configurations here.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub parallel: ParallelArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub instances: Vec<PathBuf>,
    #[arg(long)]
    pub configs: PathBuf,
    /// Seeds 0..seeds are run for every (instance, config) pair.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long = "max-iterations", alias = "iterations", default_value_t = 1_000_000)]
    pub iterations: u64,
    /// Run log (JSON lines); completed runs found here are skipped.
    #[arg(long)]
    pub log: PathBuf,
    /// Also build the performance matrix into this CSV.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub fdr: f64,
    #[command(flatten)]
    pub parallel: ParallelArgs,
}

#[derive(Debug, Args)]
pub struct BuildMatrixArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub fdr: f64,
    /// Drop instances where Kruskal-Wallis finds no config effect at this level.
    #[arg(long)]
    pub screen: Option<f64>,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Feature rows as written by `features`.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub trees: usize,
    #[arg(long, default_value_t = 3)]
    pub m_try: usize,
    #[arg(long, default_value_t = 5)]
    pub min_node_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report k-fold cross-validated selection accuracy (0 disables).
    #[arg(long, default_value_t = 10)]
    pub cv_folds: usize,
    /// Report permutation feature importance.
    #[arg(long)]
    pub importance: bool,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Print the chosen configuration's parameters from this CSV.
    #[arg(long)]
    pub configs: Option<PathBuf>,
    #[arg(required = true)]
    pub instances: Vec<PathBuf>,
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve(a) => solve(&a),
        Command::Validate(a) => validate(&a),
        Command::Features(a) => features(&a),
        Command::SampleConfigs(a) => sample_configs(&a),
        Command::Race(a) => race(&a),
        Command::Experiment(a) => experiment(&a),
        Command::BuildMatrix(a) => build_matrix(&a),
        Command::Train(a) => train(&a),
        Command::Predict(a) => predict(&a),
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(a: &SolveArgs) -> Result<i32> {
    let inst = io::load_instance(&a.instance)?;
    let params = a.sa.params();
    let opts = AnnealOptions { record_trace: false, max_duration: a.time_limit.map(Duration::from_secs_f64) };
    let r = anneal_with(&inst, &params, a.seed, &opts)?;
    write_or_print(a.output.as_deref(), &format_solution(&inst, &r.best_timetable))?;
    let c = &r.best_cost;
    eprintln!(
        "{}: total {} (hard {}, soft {}) after {} iterations in {:.2}s, {}",
        inst.name(),
        c.total,
        c.hard(),
        c.soft(),
        r.iterations_used,
        r.elapsed.as_secs_f64(),
        if r.feasible { "feasible" } else { "infeasible" }
    );
    if let Some(path) = &a.report {
        let rec = RunRecord {
            instance: io::instance_id(&a.instance),
            config: "cli".into(),
            params: sa_param_map(&params),
            seed: a.seed,
            iterations: r.iterations_used,
            total: Some(c.total),
            breakdown: Some(*c),
            feasible: Some(r.feasible),
            wall_ms: r.elapsed.as_millis() as u64,
            timestamp: chrono::Local::now().to_rfc3339(),
            error: None,
        };
        fs::write(path, serde_json::to_string_pretty(&rec)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if r.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn sa_param_map(p: &SaParams<f64>) -> BTreeMap<String, f64> {
    [
        ("T0", p.t0),
        ("T_min", p.t_min),
        ("rho", p.accept_ratio),
        ("cr", p.cooling_rate),
        ("sr", p.swap_rate),
        ("w_hard", p.w_hard as f64),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn validate(a: &ValidateArgs) -> Result<i32> {
    let inst = io::load_instance(&a.instance)?;
    let findings = validate_instance(&inst);
    for f in &findings {
        println!("{:?}: {}", f.kind, f.detail);
    }
    let Some(sol) = &a.solution else {
        println!(
            "{}: {} courses, {} lectures, {} rooms, {} periods, {} curricula",
            inst.name(),
            inst.n_courses(),
            inst.n_lectures(),
            inst.n_rooms(),
            inst.n_periods(),
            inst.curricula().len()
        );
        let infeasible = findings.iter().any(|f| f.kind == FindingKind::ProvablyInfeasible);
        return Ok(if infeasible { EXIT_INFEASIBLE } else { EXIT_OK });
    };
    let text = fs::read_to_string(sol).with_context(|| format!("reading {}", sol.display()))?;
    let tt = parse_solution(&inst, &text).with_context(|| format!("parsing {}", sol.display()))?;
    let c = full_cost(&inst, &tt, a.w_hard);
    println!("Conflicts: {}", c.conflicts);
    println!("RoomOccupancy: {}", c.room_occupancy);
    println!("RoomCapacity: {}", c.room_capacity);
    println!("MinWorkingDays: {}", c.min_working_days);
    println!("IsolatedLectures: {}", c.isolated_lectures);
    println!("RoomStability: {}", c.room_stability);
    println!("Hard: {}  Soft: {}  Total (w_hard = {}): {}", c.hard(), c.soft(), c.w_hard, c.total);
    Ok(if c.is_feasible() { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn features(a: &FeaturesArgs) -> Result<i32> {
    let mut out = String::new();
    for path in io::expand_instances(&a.instances)? {
        let inst = io::load_instance(&path)?;
        let row = FeatureRow { instance: io::instance_id(&path), features: extract_features(&inst)? };
        out.push_str(&serde_json::to_string(&row)?);
        out.push('\n');
    }
    write_or_print(a.output.as_deref(), &out)?;
    Ok(EXIT_OK)
}

fn sample_configs(a: &SampleArgs) -> Result<i32> {
    let space = match a.space {
        Space::Refined => refined_space::<f64>(),
        Space::Full => full_space::<f64>(),
    };
    let configs = scale_to_ranges(&hammersley_points(a.n, space.len())?, &space)?;
    io::write_configs(&a.output, &configs)?;
    eprintln!("wrote {} configurations to {}", configs.len(), a.output.display());
    Ok(EXIT_OK)
}

fn config_params(configs: &[ConfigPoint<f64>], iterations: u64) -> Result<Vec<SaParams<f64>>> {
    let base = SaParams::default().with_budget(iterations);
    configs
        .iter()
        .map(|c| c.apply_to(&base).with_context(|| format!("configuration `{}`", c.id)))
        .collect()
}

fn race(a: &RaceArgs) -> Result<i32> {
    let paths = io::expand_instances(&a.instances)?;
    let insts = paths.iter().map(|p| io::load_instance(p)).collect::<Result<Vec<Instance>>>()?;
    let configs = io::read_configs(&a.configs)?;
    let params = config_params(&configs, a.iterations)?;
    let opts =
        RaceOptions { runs_per_step: a.runs_per_step, confidence: a.confidence, budget: a.budget, first_test: a.first_test };
    let failure = Mutex::new(None);
    let result = a.parallel.pool()?.install(|| {
        f_race(insts.len(), configs.len(), &opts, |i, c, run| {
            match cbctt::anneal(&insts[i], &params[c], run as u64) {
                Ok(r) => r.best_cost.total as f64,
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(format!("{} / {}: {e}", insts[i].name(), configs[c].id));
                    f64::INFINITY
                }
            }
        })
    });
    if let Some(e) = failure.into_inner().unwrap() {
        bail!("solver run failed: {e}");
    }
    let result = result?;
    for e in &result.eliminations {
        println!(
            "eliminated {} after {} instances (mean rank {:.2} vs best {:.2})",
            configs[e.config].id, e.block, e.mean_rank, e.best_mean_rank
        );
    }
    for (&c, r) in result.survivors.iter().zip(&result.mean_ranks) {
        println!("survivor {} mean rank {r:.2}", configs[c].id);
    }
    println!("{} blocks, {} solver runs", result.blocks, result.evaluations);
    if let Some(out) = &a.output {
        let kept: Vec<ConfigPoint<f64>> = result.survivors.iter().map(|&c| configs[c].clone()).collect();
        io::write_configs(out, &kept)?;
    }
    Ok(EXIT_OK)
}

fn experiment(a: &ExperimentArgs) -> Result<i32> {
    let paths = io::expand_instances(&a.instances)?;
    let insts = paths.iter().map(|p| io::load_instance(p)).collect::<Result<Vec<Instance>>>()?;
    let ids: Vec<String> = paths.iter().map(|p| io::instance_id(p)).collect();
    let configs = io::read_configs(&a.configs)?;
    let params = config_params(&configs, a.iterations)?;

    let previous: Vec<RunRecord> = io::read_jsonl(&a.log)?;
    let done: HashSet<(String, String, u64)> = previous.iter().filter(|r| r.succeeded()).map(RunRecord::key).collect();
    let todo: Vec<(usize, usize, u64)> = (0..insts.len())
        .flat_map(|i| (0..configs.len()).flat_map(move |c| (0..a.seeds).map(move |s| (i, c, s))))
        .filter(|&(i, c, s)| !done.contains(&(ids[i].clone(), configs[c].id.clone(), s)))
        .collect();
    eprintln!(
        "{} runs to do, {} already in {}",
        todo.len(),
        insts.len() * configs.len() * a.seeds as usize - todo.len(),
        a.log.display()
    );

    let log = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&a.log)
        .with_context(|| format!("opening {}", a.log.display()))?;
    let log = Mutex::new(std::io::BufWriter::new(log));
    let write_err = Mutex::new(None);
    a.parallel.pool()?.install(|| {
        todo.par_iter().for_each(|&(i, c, seed)| {
            let start = Instant::now();
            let outcome = cbctt::anneal(&insts[i], &params[c], seed);
            let rec = RunRecord {
                instance: ids[i].clone(),
                config: configs[c].id.clone(),
                params: configs[c].values.iter().cloned().collect::<BTreeMap<_, _>>(),
                seed,
                iterations: outcome.as_ref().map_or(0, |r| r.iterations_used),
                total: outcome.as_ref().ok().map(|r| r.best_cost.total),
                breakdown: outcome.as_ref().ok().map(|r| r.best_cost),
                feasible: outcome.as_ref().ok().map(|r| r.feasible),
                wall_ms: start.elapsed().as_millis() as u64,
                timestamp: chrono::Local::now().to_rfc3339(),
                error: outcome.as_ref().err().map(|e| e.to_string()),
            };
            let line = serde_json::to_string(&rec).expect("run record serializes");
            let mut w = log.lock().unwrap();
            if let Err(e) = writeln!(w, "{line}").and_then(|_| w.flush()) {
                write_err.lock().unwrap().get_or_insert(e);
            }
        })
    });
    if let Some(e) = write_err.into_inner().unwrap() {
        bail!("writing {}: {e}", a.log.display());
    }
    drop(log);

    if let Some(out) = &a.matrix {
        let records: Vec<RunRecord> = io::read_jsonl(&a.log)?;
        let table = result_table(&records, Some(&ids), Some(&configs.iter().map(|c| c.id.clone()).collect::<Vec<_>>()))?;
        let m = build_performance_matrix(&table, a.fdr)?;
        io::write_matrix(out, &m)?;
        eprintln!("wrote {}x{} matrix to {}", m.n_instances(), m.n_configs(), out.display());
    }
    Ok(EXIT_OK)
}

fn natural_key(s: &str) -> (Option<u64>, String) {
    (s.parse().ok(), s.to_string())
}

/// Groups successful runs into per-(instance, config) samples. Row and
/// column order follow `instances`/`configs` when given, natural id order
/// otherwise.
pub fn result_table(
    records: &[RunRecord],
    instances: Option<&[String]>,
    configs: Option<&[String]>,
) -> Result<ResultTable<f64>> {
    let mut cells: HashMap<(&str, &str), Vec<f64>> = HashMap::new();
    for r in records.iter().filter(|r| r.succeeded()) {
        cells.entry((&r.instance, &r.config)).or_default().push(r.total.unwrap_or_default() as f64);
    }
    let ordered = |given: Option<&[String]>, pick: fn(&RunRecord) -> &String| -> Vec<String> {
        given.map(<[String]>::to_vec).unwrap_or_else(|| {
            let mut v: Vec<String> = records.iter().map(|r| pick(r).clone()).collect::<HashSet<_>>().into_iter().collect();
            v.sort_by_key(|s| natural_key(s));
            v
        })
    };
    let instances = ordered(instances, |r| &r.instance);
    let configs = ordered(configs, |r| &r.config);
    if instances.is_empty() || configs.is_empty() {
        bail!("run log holds no successful runs");
    }
    let mut samples = Vec::with_capacity(instances.len());
    for i in &instances {
        let mut row = Vec::with_capacity(configs.len());
        for c in &configs {
            match cells.get(&(i.as_str(), c.as_str())) {
                Some(v) => row.push(v.clone()),
                None => bail!("no successful runs for instance `{i}` with configuration `{c}`"),
            }
        }
        samples.push(row);
    }
    Ok(ResultTable { instances, configs, samples })
}

fn build_matrix(a: &BuildMatrixArgs) -> Result<i32> {
    let records: Vec<RunRecord> = io::read_jsonl(&a.log)?;
    let mut table = result_table(&records, None, None)?;
    if let Some(alpha) = a.screen {
        let keep = screen_instances(&table, alpha)?;
        eprintln!("screening kept {} of {} instances", keep.len(), table.instances.len());
        table = table.select_rows(&keep);
    }
    let m = build_performance_matrix(&table, a.fdr)?;
    io::write_matrix(&a.output, &m)?;
    let rates = m.success_rates();
    for (c, r) in m.configs.iter().zip(&rates) {
        println!("{c}: success rate {:.1}%", 100.0 * r);
    }
    if !m.configs.is_empty() {
        println!("majority configuration: {}", m.configs[m.majority_config()]);
    }
    Ok(EXIT_OK)
}

fn train(a: &TrainArgs) -> Result<i32> {
    let matrix = io::read_matrix(&a.matrix)?;
    let rows: Vec<FeatureRow> = io::read_jsonl(&a.features)?;
    let by_id: HashMap<&str, &FeatureRow> = rows.iter().map(|r| (r.instance.as_str(), r)).collect();
    let x = matrix
        .instances
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .map(|r| r.features.to_array().to_vec())
                .with_context(|| format!("no feature row for instance `{id}`"))
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let params = ForestParams { n_trees: a.trees, m_try: a.m_try, min_node_size: a.min_node_size, seed: a.seed };
    let names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    let model = ConfigModel::train(names, &x, &matrix, &params)?;
    fs::write(&a.output, model.to_json()?).with_context(|| format!("writing {}", a.output.display()))?;
    eprintln!("trained {} forests of {} trees on {} instances", matrix.n_configs(), a.trees, x.len());
    if a.cv_folds > 0 {
        if x.len() >= a.cv_folds {
            let acc = cross_validate_accuracy(&x, &matrix.flags, a.cv_folds, &params, a.seed)?;
            println!("{}-fold cross-validated accuracy: {:.1}%", a.cv_folds, 100.0 * acc);
        } else {
            eprintln!("skipping cross validation: {} instances for {} folds", x.len(), a.cv_folds);
        }
    }
    if a.importance {
        let imp = permutation_importance(&model.forests, &x, &matrix.flags, a.seed)?;
        for (name, v) in FEATURE_NAMES.iter().zip(imp) {
            println!("importance {name}: {v:.4}");
        }
    }
    Ok(EXIT_OK)
}

fn predict(a: &PredictArgs) -> Result<i32> {
    let text = fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let model = ConfigModel::<f64>::from_json(&text)?;
    let configs = a.configs.as_deref().map(io::read_configs).transpose()?;
    for path in io::expand_instances(&a.instances)? {
        let inst = io::load_instance(&path)?;
        let x = extract_features::<f64>(&inst)?.to_array();
        let chosen = &model.configs[model.select(&x)?];
        let mut line = format!("{} {chosen}", io::instance_id(&path));
        if let Some(cfg) = configs.as_ref().and_then(|cs| cs.iter().find(|c| &c.id == chosen)) {
            for (n, v) in &cfg.values {
                line.push_str(&format!(" {n}={v}"));
            }
        }
        println!("{line}");
    }
    Ok(EXIT_OK)
}
