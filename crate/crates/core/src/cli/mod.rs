//! Command-line front end.

pub mod bench;
pub mod generator;
pub mod render;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::allocation::{maximize_on, plan_on, PlanJson, DEFAULT_PLAN_SAMPLES};
use crate::decomposition::gen_bou_decomp;
use crate::error::{Error, Result};
use crate::geometry::{Environment, SweepSchedule};
use crate::sensing::SensingModel;
use crate::validation::validate_plan;
use generator::{gen_env, GeneratorConfig, Setting};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "sweepguard", version, about = "Minimum line-guard allocation for sweep schedules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Svg,
    Csv,
}

#[derive(Args, Debug)]
pub struct Inputs {
    /// Environment JSON file
    #[arg(long)]
    env: PathBuf,
    /// Schedule JSON file or inline JSON
    #[arg(long, default_value = r#"{"kind":"vertical","angle":0}"#)]
    schedule: String,
}

#[derive(Args, Debug)]
pub struct ModelArg {
    /// Sensing model JSON file or inline JSON
    #[arg(long, default_value = r#"{"kind":"exponential","c":1.0}"#)]
    model: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cell decomposition as DAG JSON
    Decompose {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum robot count and plan for a coverage requirement
    Allocate {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        rho0: f64,
        /// Write the plan JSON here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Uniform time samples stored in the plan
        #[arg(long, default_value_t = DEFAULT_PLAN_SAMPLES)]
        samples: usize,
    },
    /// Best coverage requirement a fleet can guarantee
    Maximize {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        robots: u64,
    },
    /// Monte-Carlo check of a plan
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random environment
    GenEnv {
        #[arg(long, value_enum, default_value_t = Setting::RegularSimilar)]
        setting: Setting,
        #[arg(long, default_value_t = 20)]
        obstacles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        min_vertices: usize,
        #[arg(long, default_value_t = 50)]
        max_vertices: usize,
        /// Workspace width; derived from the obstacle count if omitted
        #[arg(long, requires = "height")]
        width: Option<f64>,
        #[arg(long, requires = "width")]
        height: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pipeline timings over generated environments, as CSV
    Bench {
        /// `all` or a comma list of settings
        #[arg(long, default_value = "all")]
        settings: String,
        /// Vertex totals: `1e3..1e5` or a comma list
        #[arg(long, default_value = "1e3..1e4")]
        sizes: String,
        /// Instances per size and setting
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value = r#"{"kind":"vertical","angle":0}"#)]
        schedule: String,
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 0.8)]
        rho0: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SVG of the workspace, its cells and optionally robot paths
    Render {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        schedule: Option<String>,
        #[command(flatten)]
        model: ModelArg,
        /// Draw robot paths for this requirement
        #[arg(long)]
        rho0: Option<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_inline_or_file(arg: &str) -> Result<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        Ok(fs::read_to_string(arg)?)
    }
}

fn load_env(path: &Path) -> Result<Environment> {
    Environment::from_json(&fs::read_to_string(path)?)
}

fn load_schedule(arg: &str) -> Result<SweepSchedule> {
    SweepSchedule::from_json(&read_inline_or_file(arg)?)
}

fn load_model(arg: &ModelArg) -> Result<SensingModel> {
    SensingModel::from_json(&read_inline_or_file(&arg.model)?)
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body)?,
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                o.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn parse_settings(s: &str) -> Result<Vec<Setting>> {
    if s == "all" {
        return Ok(Setting::ALL.to_vec());
    }
    s.split(',')
        .map(|t| Setting::from_str(t.trim(), true).map_err(|_| Error::Contract(format!("unknown setting '{t}'"))))
        .collect()
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Decompose { inputs, out } => {
            let env = load_env(&inputs.env)?;
            let dag = gen_bou_decomp(&env, &load_schedule(&inputs.schedule)?)?;
            emit(out.as_deref(), &dag.to_json())?;
        }
        Command::Allocate { inputs, model, rho0, out, samples } => {
            let env = load_env(&inputs.env)?;
            let sched = load_schedule(&inputs.schedule)?;
            let sensing = load_model(&model)?.requirement(rho0)?;
            let plan = plan_on(gen_bou_decomp(&env, &sched)?, sensing)?;
            println!("{}", plan.robot_count());
            if let Some(p) = out {
                fs::write(p, plan.to_json(samples))?;
            }
        }
        Command::Maximize { inputs, model, robots } => {
            let env = load_env(&inputs.env)?;
            let dag = gen_bou_decomp(&env, &load_schedule(&inputs.schedule)?)?;
            let res = maximize_on(&dag, &load_model(&model)?, robots)?;
            emit(None, &serde_json::to_string(&res)?)?;
        }
        Command::Validate { inputs, model, plan, samples, seed, out } => {
            let env = load_env(&inputs.env)?;
            let dag = gen_bou_decomp(&env, &load_schedule(&inputs.schedule)?)?;
            let doc: PlanJson = serde_json::from_str(&fs::read_to_string(plan)?)?;
            let model = match &doc.model {
                Some(spec) => SensingModel::from_spec(*spec)?,
                None => load_model(&model)?,
            };
            let plan = doc.into_plan(dag, &model)?;
            let report = validate_plan(&env, &plan, samples, seed)?;
            emit(out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
            if !report.passed() {
                return Ok(EXIT_VALIDATION);
            }
        }
        Command::GenEnv { setting, obstacles, seed, min_vertices, max_vertices, width, height, out } => {
            let mut cfg = GeneratorConfig::new(setting, obstacles, seed);
            cfg.vertex_range = (min_vertices, max_vertices);
            cfg.dims = width.zip(height);
            emit(out.as_deref(), &gen_env(&cfg)?.to_json())?;
        }
        Command::Bench { settings, sizes, seeds, schedule, model, rho0, format, out } => {
            let sched = load_schedule(&schedule)?;
            let sensing = load_model(&model)?.requirement(rho0)?;
            let recs = bench::run_bench(&parse_settings(&settings)?, &bench::parse_sizes(&sizes)?, seeds, &sched, &sensing)?;
            let body = match format {
                Format::Json => serde_json::to_string_pretty(&recs)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    bench::write_csv(&recs, &mut buf)?;
                    String::from_utf8(buf).expect("csv is utf-8")
                }
                Format::Svg => return Err(Error::Contract("bench writes csv or json".into())),
            };
            emit(out.as_deref(), &body)?;
            if let Some(k) = bench::loglog_slope(&recs) {
                eprintln!("log-log slope of total time vs vertices: {k:.3}");
            }
        }
        Command::Render { env, schedule, model, rho0, samples, out } => {
            let env = load_env(&env)?;
            let dag = schedule.as_deref().map(|s| gen_bou_decomp(&env, &load_schedule(s)?)).transpose()?;
            let plan = match (rho0, &dag) {
                (Some(r), Some(d)) => Some(plan_on(d.clone(), load_model(&model)?.requirement(r)?)?),
                (Some(_), None) => return Err(Error::Contract("--rho0 needs --schedule".into())),
                _ => None,
            };
            emit(out.as_deref(), &render::render_svg(&env, dag.as_ref(), plan.as_ref(), samples))?;
        }
    }
    Ok(EXIT_OK)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
