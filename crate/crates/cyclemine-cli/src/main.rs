//! `cyclemine` command-line front end.
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cyclemine::codec::{collection_cost, CodecOptions, DistanceCoding, SeqStats, ShapeCounts};
use cyclemine::miner::{mine_with, MiningConfig, MiningResult};
use cyclemine::pattern::{format_pattern, parse_patterns, pattern_occurrences};
use cyclemine::sequence::Separator;
use cyclemine::synth::{evaluate, generate, PlantSpec};
use cyclemine::{load_sequence, CollectionReport, CostBreakdown, EventSequence, IngestOptions, Pattern};

#[derive(Parser)]
#[command(name = "cyclemine", version, about = "Mine nested periodic patterns from timestamped event logs")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine a pattern collection from an event log.
    Mine(MineArgs),
    /// Score a given pattern collection against an event log.
    Score(ScoreArgs),
    /// Print summary statistics of an event log.
    Stats(StatsArgs),
    /// Generate synthetic logs, mine them and compare with the plants.
    SynthEval(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SeparatorArg {
    Auto,
    Tab,
    Comma,
}

#[derive(Args)]
struct InputArgs {
    /// Event log: one `timestamp<TAB or comma>label` per line.
    file: PathBuf,
    /// Divide timestamps by this and round down.
    #[arg(long, default_value_t = 1)]
    granularity: i64,
    /// Replace timestamps by the rank of each line.
    #[arg(long)]
    succession: bool,
    #[arg(long, value_enum, default_value_t = SeparatorArg::Auto)]
    separator: SeparatorArg,
    /// Merge events occurring fewer times than this into one label.
    #[arg(long)]
    rare_threshold: Option<usize>,
}

impl InputArgs {
    fn load(&self) -> cyclemine::Result<EventSequence> {
        let opts = IngestOptions {
            separator: match self.separator {
                SeparatorArg::Auto => Separator::Auto,
                SeparatorArg::Tab => Separator::Tab,
                SeparatorArg::Comma => Separator::Comma,
            },
            granularity: self.granularity,
            succession: self.succession,
            rare_threshold: self.rare_threshold,
        };
        let file = File::open(&self.file)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", self.file.display())))?;
        load_sequence(BufReader::new(file), &opts)
    }
}

#[derive(Args)]
struct MinerArgs {
    /// Candidates kept per occurrence after each filtering step.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    max_rounds: usize,
    /// Stop after extracting simple cycles.
    #[arg(long)]
    cycles_only: bool,
    /// Forbid repetitions of a block from overlapping in time.
    #[arg(long)]
    no_interleaving: bool,
    /// Combination components above this size use greedy clique cover.
    #[arg(long, default_value_t = 64)]
    clique_node_cap: usize,
}

impl MinerArgs {
    fn config(&self) -> MiningConfig {
        MiningConfig {
            k: self.k,
            max_rounds: self.max_rounds,
            allow_interleaving: !self.no_interleaving,
            clique_node_cap: self.clique_node_cap,
            cycles_only: self.cycles_only,
        }
    }
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    miner: MinerArgs,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the selected patterns in text notation here.
    #[arg(long)]
    patterns_out: Option<PathBuf>,
    /// Leave wall-clock timings out of the JSON report.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceArg {
    /// log2(w + 1) bits per distance.
    Range,
    /// log2(w) bits per distance, none when w <= 1.
    Width,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Pattern collection, one pattern per line.
    #[arg(long)]
    patterns: PathBuf,
    /// Start of the time window used for coding (default: first timestamp).
    #[arg(long)]
    t_start: Option<i64>,
    /// End of the time window used for coding (default: last timestamp).
    #[arg(long)]
    t_end: Option<i64>,
    #[arg(long)]
    no_interleaving: bool,
    #[arg(long, value_enum, default_value_t = DistanceArg::Range)]
    distance_coding: DistanceArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator settings as `key = value` lines.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[command(flatten)]
    miner: MinerArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<cyclemine::Error> for Failure {
    fn from(e: cyclemine::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<std::fmt::Error> for Failure {
    fn from(e: std::fmt::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Data(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct PatternReport {
    pattern: String,
    cover: usize,
    cost: CostBreakdown,
}

#[derive(Serialize)]
struct StageReport {
    stage: &'static str,
    candidates: usize,
    patterns: usize,
    total: f64,
    percent_l: f64,
    lr: f64,
    residuals: usize,
    shapes: ShapeCounts,
    max_cover: usize,
}

#[derive(Serialize)]
struct TimingReport {
    cycles_ms: f64,
    combination_ms: f64,
    selection_ms: f64,
}

#[derive(Serialize)]
struct MineReport {
    input: String,
    config: MiningConfig,
    granularity: i64,
    succession: bool,
    events: usize,
    span: i64,
    alphabet: usize,
    best_stage: &'static str,
    rounds: usize,
    candidates: usize,
    total: f64,
    baseline: f64,
    percent_l: f64,
    lr: f64,
    residuals: usize,
    shapes: ShapeCounts,
    max_cover: usize,
    stages: Vec<StageReport>,
    patterns: Vec<PatternReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<TimingReport>,
}

fn pattern_reports(patterns: &[Pattern], report: &CollectionReport, seq: &EventSequence) -> Vec<PatternReport> {
    patterns
        .iter()
        .zip(&report.costs)
        .map(|(p, c)| PatternReport {
            pattern: format_pattern(p, seq.alphabet()),
            cover: pattern_occurrences(p).map_or(0, |o| o.len()),
            cost: c.clone(),
        })
        .collect()
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn print_stages(result: &MiningResult, out: &mut String) -> std::fmt::Result {
    writeln!(
        out,
        "{:<5} {:>10} {:>12} {:>8} {:>6} {:>11} {:>5} {:>9}",
        "stage", "candidates", "total", "%L", "L:R", "s/v/h/m", "c+", "residuals"
    )?;
    for s in &result.stages {
        let r = &s.report;
        let marker = if s.stage == result.best { "*" } else { "" };
        writeln!(
            out,
            "{:<5} {:>10} {:>12.3} {:>8.2} {:>6.3} {:>11} {:>5} {:>9}",
            format!("{}{marker}", s.stage.label()),
            s.pool_size,
            r.total,
            r.percent_l,
            r.lr,
            format!("{}/{}/{}/{}", r.shapes.s, r.shapes.v, r.shapes.h, r.shapes.m),
            r.max_cover,
            r.residual_count,
        )?;
    }
    Ok(())
}

fn run_mine(a: &MineArgs, out: &mut String) -> Outcome<()> {
    let seq = a.input.load()?;
    let cfg = a.miner.config();
    let result = mine_with(&seq, SeqStats::of(&seq), &cfg);
    let best = result.best_stage();
    let patterns: Vec<Pattern> = best.selection.patterns.iter().map(|c| c.pattern.clone()).collect();
    let r = &best.report;

    print_stages(&result, out)?;
    writeln!(out)?;
    for p in pattern_reports(&patterns, r, &seq) {
        writeln!(out, "{:>10.3}  {:>5}  {}", p.cost.total(), p.cover, p.pattern)?;
    }

    if let Some(path) = &a.patterns_out {
        let mut text = String::new();
        for p in &patterns {
            text.push_str(&format_pattern(p, seq.alphabet()));
            text.push('\n');
        }
        fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &a.out {
        let report = MineReport {
            input: a.input.file.display().to_string(),
            config: cfg.clone(),
            granularity: a.input.granularity,
            succession: a.input.succession,
            events: seq.len(),
            span: seq.span(),
            alphabet: seq.alphabet().len(),
            best_stage: result.best.label(),
            rounds: result.rounds,
            candidates: result.pool.len(),
            total: r.total,
            baseline: r.baseline,
            percent_l: r.percent_l,
            lr: r.lr,
            residuals: r.residual_count,
            shapes: r.shapes,
            max_cover: r.max_cover,
            stages: result
                .stages
                .iter()
                .map(|s| StageReport {
                    stage: s.stage.label(),
                    candidates: s.pool_size,
                    patterns: s.selection.patterns.len(),
                    total: s.report.total,
                    percent_l: s.report.percent_l,
                    lr: s.report.lr,
                    residuals: s.report.residual_count,
                    shapes: s.report.shapes,
                    max_cover: s.report.max_cover,
                })
                .collect(),
            patterns: pattern_reports(&patterns, r, &seq),
            timings: (!a.no_timings).then(|| TimingReport {
                cycles_ms: ms(result.timings.cycles),
                combination_ms: ms(result.timings.combination),
                selection_ms: ms(result.timings.selection),
            }),
        };
        write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ScoreReport {
    input: String,
    t_start: i64,
    t_end: i64,
    total: f64,
    pattern_bits: f64,
    residual_bits: f64,
    baseline: f64,
    percent_l: f64,
    lr: f64,
    residuals: usize,
    shapes: ShapeCounts,
    max_cover: usize,
    patterns: Vec<PatternReport>,
}

fn run_score(a: &ScoreArgs, out: &mut String) -> Outcome<()> {
    let seq = a.input.load()?;
    let patterns = parse_patterns(&read(&a.patterns)?, seq.alphabet())?;
    let base = SeqStats::of(&seq);
    let stats = base.with_window(a.t_start.unwrap_or(base.t_start), a.t_end.unwrap_or(base.t_end))?;
    let opts = CodecOptions {
        allow_interleaving: !a.no_interleaving,
        distance_coding: match a.distance_coding {
            DistanceArg::Range => DistanceCoding::Range,
            DistanceArg::Width => DistanceCoding::Width,
        },
    };
    let r = collection_cost::<f64>(&patterns, &seq, &stats, &opts)?;
    let rows = pattern_reports(&patterns, &r, &seq);
    writeln!(out, "{:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>9}  pattern", "A", "R", "p0", "D", "tau", "E", "total")?;
    for p in &rows {
        let c = &p.cost;
        writeln!(
            out,
            "{:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>9.3}  {}",
            c.a,
            c.r,
            c.p0,
            c.d,
            c.tau,
            c.e,
            c.total(),
            p.pattern
        )?;
    }
    writeln!(out, "patterns  {:.3}", r.pattern_bits)?;
    writeln!(out, "residuals {:.3} ({} occurrences)", r.residual_bits, r.residual_count)?;
    writeln!(out, "total     {:.3}", r.total)?;
    writeln!(out, "%L        {:.2}", r.percent_l)?;
    if let Some(path) = &a.out {
        write_json(
            path,
            &ScoreReport {
                input: a.input.file.display().to_string(),
                t_start: stats.t_start,
                t_end: stats.t_end,
                total: r.total,
                pattern_bits: r.pattern_bits,
                residual_bits: r.residual_bits,
                baseline: r.baseline,
                percent_l: r.percent_l,
                lr: r.lr,
                residuals: r.residual_count,
                shapes: r.shapes,
                max_cover: r.max_cover,
                patterns: rows,
            },
        )?;
    }
    Ok(())
}

fn run_stats(a: &StatsArgs, out: &mut String) -> Outcome<()> {
    let seq = a.input.load()?;
    let s = seq.stats();
    if a.json {
        let text = serde_json::to_string_pretty(&s).map_err(|e| Failure::Data(e.to_string()))?;
        writeln!(out, "{text}")?;
        return Ok(());
    }
    writeln!(out, "len                  {}", s.len)?;
    writeln!(out, "span                 {}", s.span)?;
    writeln!(out, "t_start              {}", s.t_start)?;
    writeln!(out, "t_end                {}", s.t_end)?;
    writeln!(out, "alphabet             {}", s.alphabet_size)?;
    writeln!(out, "median count         {}", s.median_count)?;
    writeln!(out, "max count            {}", s.max_count)?;
    writeln!(out, "duplicates collapsed {}", s.duplicates_collapsed)?;
    writeln!(out)?;
    for (label, n) in &s.per_event_counts {
        writeln!(out, "{n:>8}  {label}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrialReport {
    seed: u64,
    events: usize,
    exact_recovery: bool,
    percent_l_found: f64,
    percent_l_planted: f64,
    diff: f64,
}

#[derive(Serialize)]
struct SynthReport {
    spec: String,
    trials: Vec<TrialReport>,
    recovery_rate: f64,
    diff_min: f64,
    diff_median: f64,
    diff_max: f64,
}

fn run_synth(a: &SynthArgs, out: &mut String) -> Outcome<()> {
    let spec = PlantSpec::parse(&read(&a.spec)?)?;
    let cfg = a.miner.config();
    let opts = CodecOptions::interleaving(cfg.allow_interleaving);
    let mut trials = Vec::new();
    for i in 0..a.trials {
        let seed = spec.seed.wrapping_add(i);
        let truth = generate(&spec.with_seed(seed))?;
        let seq = &truth.perturbed;
        let result = mine_with(seq, SeqStats::of(seq), &cfg);
        let found: Vec<Pattern> = result.selection().patterns.iter().map(|c| c.pattern.clone()).collect();
        let ev = evaluate(&found, &truth.planted, seq, &opts)?;
        writeln!(
            out,
            "seed {seed:>6}  events {:>6}  exact {:<5}  %L found {:>7.2}  planted {:>7.2}  diff {:>+7.2}",
            seq.len(),
            ev.exact_recovery,
            ev.percent_l_found,
            ev.percent_l_planted,
            ev.diff
        )?;
        trials.push(TrialReport {
            seed,
            events: seq.len(),
            exact_recovery: ev.exact_recovery,
            percent_l_found: ev.percent_l_found,
            percent_l_planted: ev.percent_l_planted,
            diff: ev.diff,
        });
    }
    if trials.is_empty() {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let rate = trials.iter().filter(|t| t.exact_recovery).count() as f64 / trials.len() as f64;
    let mut diffs: Vec<f64> = trials.iter().map(|t| t.diff).collect();
    diffs.sort_by(f64::total_cmp);
    let n = diffs.len();
    let median = if n % 2 == 1 { diffs[n / 2] } else { (diffs[n / 2 - 1] + diffs[n / 2]) / 2.0 };
    writeln!(out)?;
    writeln!(out, "recovery rate {:.2}", rate)?;
    writeln!(out, "diff min {:+.2} median {:+.2} max {:+.2}", diffs[0], median, diffs[n - 1])?;
    if let Some(path) = &a.out {
        write_json(
            path,
            &SynthReport {
                spec: spec.to_config(),
                trials,
                recovery_rate: rate,
                diff_min: diffs[0],
                diff_median: median,
                diff_max: diffs[n - 1],
            },
        )?;
    }
    Ok(())
}

fn run(cli: &Cli, out: &mut String) -> Outcome<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Data(e.to_string()))?;
    }
    match &cli.command {
        Command::Mine(a) => run_mine(a, out),
        Command::Score(a) => run_score(a, out),
        Command::Stats(a) => run_stats(a, out),
        Command::SynthEval(a) => run_synth(a, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut out = String::new();
    let outcome = run(&cli, &mut out);
    // A closed pipe downstream is not an error.
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes()).and_then(|()| stdout.flush());
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
