use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cnet_repair::audit::{audit_repair, AuditScope, CellLabels, RepairAudit, RightCriterion, TrainingLabeler};
use cnet_repair::cnet::{inspect_level, load_model_file, save_model_file, CNetConfig, CandidateMap, TrainOptions};
use cnet_repair::corpus::{destroy_cells, extract_training_set, load_corpus_dir, pipe_adjacent_cells};
use cnet_repair::experiments::run_experiments;
use cnet_repair::level::{parse_level, serialize_level, Level, Position, TileSet};
use cnet_repair::repair::{evolve, FitnessWeights, GAParams, RepairContext};
use cnet_repair::{CNet64, Threshold, TrainingSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "cnet-repair",
    version,
    about = "Detect and repair defective tiles in tile-based levels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a constraint network on a directory of level files.
    Train(TrainArgs),
    /// Mark wrong and unstable tiles of a level.
    Inspect(InspectArgs),
    /// Repair a level with the genetic search.
    Repair(RepairArgs),
    /// Randomly destroy tiles of a level.
    Destroy(DestroyArgs),
    /// Run the classification experiments and write their tables.
    Experiments(ExperimentArgs),
    /// Compare a level before and after repair.
    Audit(AuditArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 4000)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch CSV report; defaults to the model path with `.train.csv`.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    level: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    theta: f64,
    /// Write the JSON summary here instead of after the rendering.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Criterion {
    Window,
    Surrounding,
}

impl From<Criterion> for RightCriterion {
    fn from(c: Criterion) -> Self {
        match c {
            Criterion::Window => RightCriterion::Window,
            Criterion::Surrounding => RightCriterion::Surrounding,
        }
    }
}

#[derive(Args)]
struct LabelArgs {
    /// Label tiles by training-data membership instead of by the model.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Criterion::Window)]
    criterion: Criterion,
    /// Audit every cell, not only those next to pipes.
    #[arg(long)]
    all_cells: bool,
}

#[derive(Args)]
struct RepairArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    level: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// `key = value` file with GA parameters; flags given explicitly win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    time_limit_secs: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    theta: f64,
    /// Evolution CSV; defaults to the output path with `.log.csv`.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Audit JSON; defaults to the output path with `.audit.json`.
    #[arg(long)]
    audit: Option<PathBuf>,
    #[command(flatten)]
    labels: LabelArgs,
}

#[derive(Args)]
struct DestroyArgs {
    #[arg(long)]
    level: PathBuf,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Only destroy cells with a pipe among their neighbors.
    #[arg(long)]
    pipe_adjacent: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    theta: f64,
    /// Directory for legal.csv, illegal.csv, unstable.csv and summary.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    before: PathBuf,
    #[arg(long)]
    after: PathBuf,
    /// Model used for labels when no corpus is given.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    theta: f64,
    #[command(flatten)]
    labels: LabelArgs,
}

fn read_level(path: &Path) -> Result<Level> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_level(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_level(path: &Path, level: &Level) -> Result<()> {
    fs::write(path, serialize_level(level) + "\n").with_context(|| format!("writing {}", path.display()))
}

fn read_model(path: &Path) -> Result<CNet64> {
    load_model_file(path).with_context(|| format!("loading model {}", path.display()))
}

fn read_training_set(dir: &Path) -> Result<TrainingSet> {
    let levels: Vec<Level> = load_corpus_dir(dir)
        .with_context(|| format!("loading corpus {}", dir.display()))?
        .into_iter()
        .map(|(_, l)| l)
        .collect();
    Ok(extract_training_set(&levels)?)
}

fn theta(value: f64) -> Result<Threshold> {
    Ok(Threshold::new(value)?)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn train(args: TrainArgs) -> Result<()> {
    let ts = read_training_set(&args.corpus)?;
    let mut net = CNet64::new(CNetConfig {
        seed: args.seed,
        ..Default::default()
    });
    let report = net.train(
        &ts,
        &TrainOptions {
            epochs: args.epochs,
            learning_rate: args.lr,
            seed: args.seed,
        },
    )?;
    save_model_file(&net, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    let report_path = args.report.unwrap_or_else(|| with_suffix(&args.out, ".train.csv"));
    report.write_csv(fs::File::create(&report_path)?)?;
    println!(
        "trained on {} combinations, final accuracy {:.4}",
        ts.len(),
        report.final_accuracy
    );
    Ok(())
}

/// Wrong cells as `(c)`, unstable cells as `{c}`, others as ` c `.
fn render(level: &Level, map: &CandidateMap) -> String {
    let mut out = String::new();
    for r in 0..level.height() {
        for c in 0..level.width() {
            let p = Position::new(r, c);
            let cell = map.get(p);
            let sym = level.get(p).symbol();
            let (open, close) = if cell.is_wrong() {
                ('(', ')')
            } else if cell.is_unstable() {
                ('{', '}')
            } else {
                (' ', ' ')
            };
            out.push(open);
            out.push(sym);
            out.push(close);
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct InspectSummary {
    height: usize,
    width: usize,
    theta: f64,
    wrong: Vec<[usize; 2]>,
    unstable: Vec<[usize; 2]>,
    unstable_value: usize,
}

fn pairs(ps: Vec<Position>) -> Vec<[usize; 2]> {
    ps.into_iter().map(|p| [p.row, p.col]).collect()
}

fn inspect(args: InspectArgs) -> Result<()> {
    let net = read_model(&args.model)?;
    let level = read_level(&args.level)?;
    let map = inspect_level(&net, &level, theta(args.theta)?);
    let summary = InspectSummary {
        height: level.height(),
        width: level.width(),
        theta: args.theta,
        wrong: pairs(map.wrong_positions()),
        unstable: pairs(map.unstable_positions()),
        unstable_value: map.unstable_value(),
    };
    let json = serde_json::to_string_pretty(&summary)?;
    print!("{}", render(&level, &map));
    match args.json {
        Some(path) => fs::write(&path, json)?,
        None => println!("\n{json}"),
    }
    Ok(())
}

fn labels_for(level: &Level, labeler: Option<&TrainingLabeler>, net: &CNet64, theta: Threshold) -> CellLabels {
    match labeler {
        Some(l) => l.label(level),
        None => CellLabels::from_candidate_map(&inspect_level(net, level, theta)),
    }
}

fn scope(labels: &LabelArgs) -> AuditScope {
    if labels.all_cells {
        AuditScope::AllCells
    } else {
        AuditScope::PipeNeighborhood
    }
}

fn labeler(labels: &LabelArgs) -> Result<Option<TrainingLabeler>> {
    labels
        .corpus
        .as_deref()
        .map(|dir| Ok(TrainingLabeler::new(&read_training_set(dir)?, labels.criterion.into())))
        .transpose()
}

fn repair(args: RepairArgs) -> Result<ExitCode> {
    let net = read_model(&args.model)?;
    let level = read_level(&args.level)?;
    let theta = theta(args.theta)?;
    let mut params = GAParams::default();
    if let Some(path) = &args.config {
        params.apply_config(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?;
    }
    if let Some(seed) = args.seed {
        params.seed = seed;
    }
    if let Some(g) = args.generations {
        params.generations = g;
    }
    if let Some(n) = args.pop {
        params.population = n;
    }
    if let Some(w) = &args.weights {
        params.weights = FitnessWeights::parse(w)?;
    }
    if let Some(t) = args.time_limit_secs {
        params.time_limit = Some(Duration::from_secs_f64(t));
    }

    let ctx = RepairContext::new(level.clone(), &net, theta, &params);
    let result = evolve(&ctx, &params)?;
    let repaired = result.repaired_level(&ctx);
    write_level(&args.out, &repaired)?;
    let log_path = args.log.clone().unwrap_or_else(|| with_suffix(&args.out, ".log.csv"));
    result.write_log_csv(fs::File::create(&log_path)?)?;

    let lab = labeler(&args.labels)?;
    let audit = audit_repair(
        &level,
        &repaired,
        &labels_for(&level, lab.as_ref(), &net, theta),
        &labels_for(&repaired, lab.as_ref(), &net, theta),
        scope(&args.labels),
    )?;
    let audit_path = args
        .audit
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".audit.json"));
    fs::write(&audit_path, serde_json::to_string_pretty(&audit)?)?;

    if result.already_clean {
        println!("already clean, nothing to repair");
    } else {
        let e = &result.best.eval;
        println!(
            "search space {}, best fitness {} (wrong {}, replaced {}, UV {})",
            ctx.search_space().len(),
            e.fitness,
            e.wrong,
            e.replaced,
            e.unstable_value
        );
    }
    print_audit(&audit);
    Ok(if audit.wrong_after <= audit.wrong_before {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn print_audit(a: &RepairAudit) {
    println!(
        "audited {}: wrong {} -> {} (ratio {:.3})",
        a.audited, a.wrong_before, a.wrong_after, a.ratio
    );
}

fn destroy(args: DestroyArgs) -> Result<()> {
    let level = read_level(&args.level)?;
    let cells: Vec<Position> = if args.pipe_adjacent {
        pipe_adjacent_cells(&level)
    } else {
        level.positions().collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let out = destroy_cells(&level, &cells, args.count, TileSet::ALL, &mut rng)?;
    write_level(&args.out, &out)
}

fn experiments(args: ExperimentArgs) -> Result<()> {
    let net = read_model(&args.model)?;
    let ts = read_training_set(&args.corpus)?;
    let report = run_experiments(&net, &ts, theta(args.theta)?, args.seed);
    report.write_dir(&args.out)?;
    println!("column,legal_elimination_rate,illegal_detection_rate,unstable_tiles,unstable_value");
    for r in &report.summary {
        println!(
            "{},{:.4},{:.4},{:.1},{:.1}",
            r.column, r.legal_elimination_rate, r.illegal_detection_rate, r.unstable_tiles, r.unstable_value
        );
    }
    Ok(())
}

fn audit(args: AuditArgs) -> Result<()> {
    let before = read_level(&args.before)?;
    let after = read_level(&args.after)?;
    let theta = theta(args.theta)?;
    let lab = labeler(&args.labels)?;
    let (lb, la) = match (&lab, &args.model) {
        (Some(l), _) => (l.label(&before), l.label(&after)),
        (None, Some(m)) => {
            let net = read_model(m)?;
            (
                CellLabels::from_candidate_map(&inspect_level(&net, &before, theta)),
                CellLabels::from_candidate_map(&inspect_level(&net, &after, theta)),
            )
        }
        (None, None) => bail!("audit needs --corpus or --model for labels"),
    };
    let a = audit_repair(&before, &after, &lb, &la, scope(&args.labels))?;
    println!("{}", serde_json::to_string_pretty(&a)?);
    Ok(())
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train(a) => train(a)?,
        Command::Inspect(a) => inspect(a)?,
        Command::Repair(a) => return repair(a),
        Command::Destroy(a) => destroy(a)?,
        Command::Experiments(a) => experiments(a)?,
        Command::Audit(a) => audit(a)?,
    }
    Ok(ExitCode::SUCCESS)
}
