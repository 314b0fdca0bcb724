use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use shopxai::eda::{write_beeswarms, write_eda};
use shopxai::hypotheses::{builtin_hypotheses, evaluate_all, load_hypotheses, render_markdown, CheckReport, EvalParams, Hypothesis};
use shopxai::mdp::{run_episode, Episode, Heuristic, RewardConfig};
use shopxai::policy::{load_policy, save_weights, select_action, SelectMode};
use shopxai::scenario::{shipped_week, training_weeks, PRIMARY_WEEK};
use shopxai::trainer::{save_learning_curve, TrainConfig};
use shopxai::xattr::{
    aggregate_by_action, completeness_check, explain_trace, load_attributions, outlier_flags, save_attributions,
    BackgroundSet, Method,
};
use shopxai::{PolicyNetwork, ScenarioWeek, TraceDataset, VerdictLevel};

use crate::manifest::RunManifest;
use crate::{CheckArgs, EdaArgs, ExplainArgs, PipelineArgs, SimulateArgs, TrainArgs};

/// Features shown per beeswarm plot.
const SWARM_FEATURES: usize = 10;

/// A file path if one exists, otherwise the id of a shipped week.
fn resolve_scenario(s: &str) -> Result<ScenarioWeek> {
    let path = Path::new(s);
    if path.is_file() {
        return Ok(ScenarioWeek::load(path)?);
    }
    shipped_week(s).with_context(|| format!("scenario {s:?} is neither a file nor a shipped week id"))
}

fn prepare_out(out: &Path) -> Result<()> {
    if out.is_file() {
        bail!("output path {} is a file, expected a directory", out.display());
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(path.to_path_buf())
}

fn load_trace(path: &Path) -> Result<TraceDataset> {
    let trace = TraceDataset::load(path)?;
    if trace.is_empty() {
        bail!("trace {} has no rows", path.display());
    }
    Ok(trace)
}

#[derive(Serialize)]
struct EpisodeSummary {
    scenario: String,
    policy: String,
    decisions: usize,
    idle_minutes: u64,
    setup_minutes: u64,
    /// idle + setup_weight * setup.
    cost: f64,
    total_reward: f64,
    dropped_units: u64,
}

enum Driver<'a> {
    Network(&'a PolicyNetwork),
    Heuristic(Heuristic, u64),
}

fn run_and_record(scenario: &ScenarioWeek, driver: Driver<'_>, label: &str, reward: &RewardConfig, out: &Path) -> Result<(Episode, Vec<PathBuf>)> {
    let episode = match driver {
        Driver::Network(net) => {
            net.expect_dims(shopxai::mdp::OBS_DIM, shopxai::NUM_PRODUCTS)?;
            run_episode(scenario, reward, |o| select_action(&net.forward(o.as_slice())?, SelectMode::Greedy))?
        }
        Driver::Heuristic(h, seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_episode(scenario, reward, |o| Ok(h.choose(o, &mut rng)))?
        }
    };
    let trace_path = out.join("trace.csv");
    episode.trace.save(&trace_path)?;
    let s = &episode.final_state;
    let summary = EpisodeSummary {
        scenario: scenario.id.clone(),
        policy: label.to_string(),
        decisions: episode.trace.len(),
        idle_minutes: s.total_idle_minutes(),
        setup_minutes: s.cumulative_setup_minutes,
        cost: episode.cost(reward.setup_weight),
        total_reward: episode.total_reward(),
        dropped_units: s.dropped.iter().sum(),
    };
    let summary_path = write_json(&out.join("episode.json"), &summary)?;
    Ok((episode, vec![trace_path, summary_path]))
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let scenario = resolve_scenario(&args.scenario)?;
    let reward = RewardConfig::default();
    prepare_out(&args.out)?;
    let mut m = RunManifest::start("simulate", &args.out);
    m.input("scenario", &args.scenario).seed(args.seed);
    let net;
    let (driver, label) = match (&args.weights, &args.heuristic) {
        (Some(w), _) => {
            net = load_policy(w)?;
            m.input("weights", w.display());
            (Driver::Network(&net), format!("greedy:{}", w.display()))
        }
        (None, Some(h)) => {
            m.input("heuristic", h);
            (Driver::Heuristic(h.parse()?, args.seed), h.clone())
        }
        (None, None) => bail!("simulate needs --weights or --heuristic"),
    };
    let (episode, outputs) = run_and_record(&scenario, driver, &label, &reward, &args.out)?;
    println!(
        "{}: {} decisions, cost {:.1}, trace written to {}",
        scenario.id,
        episode.trace.len(),
        episode.cost(reward.setup_weight),
        args.out.join("trace.csv").display()
    );
    m.finish(&args.out, &outputs)
}

fn load_train_config(path: Option<&Path>) -> Result<TrainConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(TrainConfig::from_toml_str(&text, &p.display().to_string())?)
        }
        None => Ok(TrainConfig::default()),
    }
}

fn run_training(cfg: &TrainConfig, weeks: &[ScenarioWeek], out: &Path) -> Result<(PolicyNetwork, Vec<PathBuf>)> {
    let outcome = shopxai::trainer::train(weeks, cfg)?;
    let weights = out.join("weights.json");
    save_weights(&outcome.network, &weights)?;
    let curve = out.join("learning_curve.csv");
    save_learning_curve(&outcome.learning_curve, &curve)?;
    let effective = out.join("train_config.toml");
    std::fs::write(&effective, toml::to_string(cfg)?).with_context(|| format!("writing {}", effective.display()))?;
    Ok((outcome.network, vec![weights, curve, effective]))
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let mut cfg = load_train_config(args.config.as_deref())?;
    if let Some(s) = args.seed {
        cfg.rng_seed = s;
    }
    if let Some(e) = args.episodes {
        cfg.episodes = e;
    }
    cfg.validate()?;
    let weeks = if args.scenario.is_empty() {
        training_weeks()
    } else {
        args.scenario.iter().map(|s| resolve_scenario(s)).collect::<Result<Vec<_>>>()?
    };
    prepare_out(&args.out)?;
    let mut m = RunManifest::start("train", &args.out);
    if let Some(c) = &args.config {
        m.config(c);
    }
    m.seed(cfg.rng_seed).input("weeks", weeks.iter().map(|w| w.id.as_str()).collect::<Vec<_>>().join(","));
    let (_, outputs) = run_training(&cfg, &weeks, &args.out)?;
    println!("trained {} episodes, weights written to {}", cfg.episodes, outputs[0].display());
    m.finish(&args.out, &outputs)
}

fn run_explain(net: &PolicyNetwork, trace: &TraceDataset, background: &BackgroundSet, method: Method, out: &Path) -> Result<(PathBuf, Vec<PathBuf>)> {
    net.expect_dims(shopxai::mdp::OBS_DIM, shopxai::NUM_PRODUCTS)?;
    let records = explain_trace(net, trace, method, background)?;
    let name = method.short();
    let csv = out.join(format!("attributions_{name}.csv"));
    save_attributions(&records, &csv)?;
    let mut outputs = vec![csv.clone()];
    outputs.push(write_json(&out.join(format!("ranking_{name}.json")), &aggregate_by_action(&records, trace)?)?);
    outputs.push(write_json(&out.join(format!("outliers_{name}.json")), &outlier_flags(&records))?);
    if method != Method::InputXGradient {
        let worst = records.iter().map(|r| completeness_check(r, net).map(f64::abs)).collect::<shopxai::Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
        outputs.push(write_json(&out.join(format!("completeness_{name}.json")), &serde_json::json!({ "max_abs_residual": worst }))?);
    }
    outputs.extend(write_beeswarms(out, &records, trace, SWARM_FEATURES)?);
    Ok((csv, outputs))
}

pub fn explain(args: &ExplainArgs) -> Result<()> {
    let net = load_policy(&args.weights)?;
    let trace = load_trace(&args.trace)?;
    let background = match &args.background {
        Some(p) => BackgroundSet::from_trace(&load_trace(p)?)?,
        None => BackgroundSet::from_trace(&trace)?,
    };
    prepare_out(&args.out)?;
    let mut m = RunManifest::start("explain", &args.out);
    m.input("weights", args.weights.display()).input("trace", args.trace.display()).input("method", args.method);
    if let Some(b) = &args.background {
        m.input("background", b.display());
    }
    let (csv, outputs) = run_explain(&net, &trace, &background, args.method, &args.out)?;
    println!("{} attributions for {} rows written to {}", args.method, trace.len(), csv.display());
    m.finish(&args.out, &outputs)
}

pub fn eda(args: &EdaArgs) -> Result<()> {
    let trace = load_trace(&args.trace)?;
    prepare_out(&args.out)?;
    let mut m = RunManifest::start("eda", &args.out);
    m.input("trace", args.trace.display());
    let outputs = write_eda(&args.out, &trace)?;
    println!("EDA report written to {}", args.out.join("eda_report.md").display());
    m.finish(&args.out, &outputs)
}

fn run_check(hypotheses: &[Hypothesis], attribution_files: &[PathBuf], trace: &TraceDataset, params: &EvalParams, out: &Path) -> Result<(VerdictLevel, Vec<PathBuf>)> {
    params.validate()?;
    let mut findings = Vec::new();
    for f in attribution_files {
        let records = load_attributions(f, trace)?;
        findings.extend(evaluate_all(hypotheses, &records, trace, params).with_context(|| format!("evaluating {}", f.display()))?);
    }
    let report = CheckReport::new(*params, findings);
    let mut outputs = vec![write_json(&out.join("findings.json"), &report)?];
    let md = out.join("check_report.md");
    std::fs::write(&md, render_markdown(&report)).with_context(|| format!("writing {}", md.display()))?;
    let verdict = out.join("verdict.txt");
    std::fs::write(&verdict, format!("{}\n", report.verdict.level.as_str())).with_context(|| format!("writing {}", verdict.display()))?;
    outputs.extend([md, verdict]);
    Ok((report.verdict.level, outputs))
}

fn eval_params(base: EvalParams, epsilon: Option<f64>, agree: Option<f64>, n_min: Option<usize>) -> EvalParams {
    EvalParams {
        epsilon: epsilon.unwrap_or(base.epsilon),
        agree_threshold: agree.unwrap_or(base.agree_threshold),
        n_min: n_min.unwrap_or(base.n_min),
    }
}

pub fn check(args: &CheckArgs) -> Result<u8> {
    let hypotheses = match &args.hypotheses {
        Some(p) => load_hypotheses(p)?,
        None => builtin_hypotheses(),
    };
    let trace = load_trace(&args.trace)?;
    let params = eval_params(EvalParams::default(), args.epsilon, args.agree_threshold, args.n_min);
    prepare_out(&args.out)?;
    let mut m = RunManifest::start("check", &args.out);
    m.input("trace", args.trace.display());
    m.input("attributions", args.attributions.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","));
    if let Some(h) = &args.hypotheses {
        m.config(h);
    }
    let (level, outputs) = run_check(&hypotheses, &args.attributions, &trace, &params, &args.out)?;
    println!("verdict: {}", level.as_str());
    m.finish(&args.out, &outputs)?;
    Ok(level.exit_code() as u8)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PipelineConfig {
    /// Week rolled out and explained.
    scenario: String,
    /// Training weeks; empty means the shipped training weeks.
    training_weeks: Vec<String>,
    /// Hypotheses file, relative to the config file; built-ins when unset.
    hypotheses: Option<PathBuf>,
    methods: Vec<String>,
    train: TrainConfig,
    check: EvalParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            scenario: PRIMARY_WEEK.to_string(),
            training_weeks: Vec::new(),
            hypotheses: None,
            methods: vec!["ixg".into(), "deepshap".into()],
            train: TrainConfig::default(),
            check: EvalParams::default(),
        }
    }
}

pub fn pipeline(args: &PipelineArgs) -> Result<()> {
    let (mut cfg, base) = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let cfg: PipelineConfig = toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {}", p.display(), e.to_string().trim()))?;
            (cfg, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (PipelineConfig::default(), PathBuf::new()),
    };
    if let Some(s) = args.seed {
        cfg.train.rng_seed = s;
    }
    if let Some(e) = args.episodes {
        cfg.train.episodes = e;
    }
    cfg.train.validate()?;
    cfg.check = eval_params(cfg.check, args.epsilon, args.agree_threshold, None);
    cfg.check.validate()?;
    let methods: Vec<Method> = cfg.methods.iter().map(|m| m.parse()).collect::<shopxai::Result<_>>()?;
    if methods.is_empty() {
        bail!("pipeline needs at least one attribution method");
    }
    let resolve = |s: &String| {
        let p = base.join(s);
        resolve_scenario(if p.is_file() { p.to_str().unwrap_or(s) } else { s })
    };
    let scenario = resolve(&cfg.scenario)?;
    let weeks = if cfg.training_weeks.is_empty() {
        training_weeks()
    } else {
        cfg.training_weeks.iter().map(resolve).collect::<Result<Vec<_>>>()?
    };
    let hypotheses = match &cfg.hypotheses {
        Some(h) => load_hypotheses(base.join(h))?,
        None => builtin_hypotheses(),
    };

    prepare_out(&args.out)?;
    let mut top = RunManifest::start("pipeline", &args.out);
    if let Some(c) = &args.config {
        top.config(c);
    }
    top.seed(cfg.train.rng_seed).input("scenario", &scenario.id);
    let step = |name: &str| -> Result<(PathBuf, RunManifest)> {
        let dir = args.out.join(name);
        prepare_out(&dir)?;
        let mut m = RunManifest::start(&format!("pipeline/{name}"), &dir);
        m.seed(cfg.train.rng_seed);
        Ok((dir, m))
    };

    let (dir, m) = step("train")?;
    eprintln!("[1/5] training {} episodes", cfg.train.episodes);
    let (net, outputs) = run_training(&cfg.train, &weeks, &dir)?;
    m.finish(&dir, &outputs)?;

    let (dir, mut m) = step("rollout")?;
    eprintln!("[2/5] greedy rollout on {}", scenario.id);
    m.input("scenario", &scenario.id);
    let (episode, outputs) = run_and_record(&scenario, Driver::Network(&net), "greedy:train/weights.json", &cfg.train.reward, &dir)?;
    m.finish(&dir, &outputs)?;
    let trace = episode.trace;

    let (dir, m) = step("eda")?;
    eprintln!("[3/5] exploratory analysis");
    let outputs = write_eda(&dir, &trace)?;
    m.finish(&dir, &outputs)?;

    let (dir, mut m) = step("explain")?;
    eprintln!("[4/5] attributions: {}", methods.iter().map(|m| m.short()).collect::<Vec<_>>().join(", "));
    let background = BackgroundSet::from_trace(&trace)?;
    let mut csvs = Vec::new();
    let mut outputs = Vec::new();
    for &method in &methods {
        m.input(&format!("method_{}", method.short()), method);
        let (csv, out) = run_explain(&net, &trace, &background, method, &dir)?;
        csvs.push(csv);
        outputs.extend(out);
    }
    m.finish(&dir, &outputs)?;

    let (dir, mut m) = step("check")?;
    eprintln!("[5/5] hypothesis check");
    if let Some(h) = &cfg.hypotheses {
        m.config(&base.join(h));
    }
    let (level, outputs) = run_check(&hypotheses, &csvs, &trace, &cfg.check, &dir)?;
    m.finish(&dir, &outputs)?;

    let effective = args.out.join("pipeline_config.toml");
    std::fs::write(&effective, toml::to_string(&cfg)?).with_context(|| format!("writing {}", effective.display()))?;
    let verdict = args.out.join("verdict.txt");
    std::fs::write(&verdict, format!("{}\n", level.as_str())).with_context(|| format!("writing {}", verdict.display()))?;
    println!("pipeline finished, verdict: {} (see {})", level.as_str(), dir.join("check_report.md").display());
    top.finish(&args.out, &[effective, verdict])
}
