//! `listved` — VED analysis and list-decoder simulation for convolutional
//! codes on the AWGN channel.
//!
//! Subcommands: `ved` (explicit vector sets), `code-ved` (minimum VED over
//! L-subsets of error events), `min-list` (minimal list size matching
//! unconstrained detection), `simulate` (one Monte Carlo point), and `sweep`
//! (an E_b/N_0 grid with CSV and SVG output). A `key = value` config file
//! supplies defaults; command-line flags override it.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use listved::codes::{free_distance, ConvCode, SignalMapping};
use listved::config::{parse_ebno_grid, ConfigFile};
use listved::geometry::{gram_of, parse_vector_file, rank_of, ved, verify_kkt, Strategy, EIG_CUTOFF};
use listved::listmin::{min_ved, minimal_list_size, SearchBounds};
use listved::report::{fmt_g9, format_list_csv, format_sim_csv, render_sweep_svg};
use listved::sim::{simulate_ce, ChannelSpec, DecoderKind, SimConfig, SimResult};

#[derive(Parser)]
#[command(name = "listved", version, about = "Vector Euclidean distance of list decoders")]
struct Cli {
    /// Config file with `key = value` defaults (flags override).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the primary CSV/report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed for simulation commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the min-norm point for an explicit vector file.
    Ved(VedArgs),
    /// Minimum VED over L-subsets of a code's error events, as CSV.
    CodeVed(CodeVedArgs),
    /// Minimal list size whose asymptote matches unconstrained detection.
    MinList(MinListArgs),
    /// One Monte Carlo codeword-error point.
    Simulate(SimArgs),
    /// Monte Carlo sweep over an E_b/N_0 grid with asymptote overlay.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct VedArgs {
    /// Vector file: one vector per line, whitespace-separated amplitudes,
    /// `#` comments.
    #[arg(long)]
    input: Option<PathBuf>,
    /// `exhaustive` or `iterative`.
    #[arg(long)]
    strategy: Option<String>,
}

#[derive(Args)]
struct CodeVedArgs {
    /// Code spec, e.g. "rate=1/2 gens=5,7 mem=2" (octal generators).
    #[arg(long)]
    code: Option<String>,
    /// Largest list size; rows are emitted for L = 1..=L.
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    max_weight: Option<u32>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Offset window W; events are placed at offsets 0..=W.
    #[arg(long)]
    window: Option<usize>,
    /// Include open paths truncated at the decision depth.
    #[arg(long)]
    include_unmerged: bool,
    #[arg(long)]
    node_cap: Option<u64>,
}

#[derive(Args)]
struct MinListArgs {
    #[arg(long)]
    code: Option<String>,
    #[arg(long)]
    max_weight: Option<u32>,
    /// Decision depth of unmerged events (also the step cap).
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    /// Largest list size to try.
    #[arg(long)]
    b_max: Option<usize>,
    /// Target VED; defaults to sqrt(E_s d_free).
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    node_cap: Option<u64>,
}

#[derive(Args, Clone)]
struct SimArgs {
    #[arg(long)]
    code: Option<String>,
    /// `viterbi`, `list_viterbi`, or `breadth_first`.
    #[arg(long)]
    decoder: Option<String>,
    /// List size L (list Viterbi) or survivor count B (breadth first).
    #[arg(long)]
    l: Option<usize>,
    /// E_b/N_0 in dB.
    #[arg(long)]
    ebno: Option<f64>,
    #[arg(long)]
    info_len: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    /// Override the minimum VED used for the asymptote column.
    #[arg(long)]
    asymptote_ved: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Inclusive grid `a:b:step`, e.g. 3:6:1.
    #[arg(long)]
    ebno_grid: Option<String>,
    /// SVG plot path; defaults to the CSV path with an .svg extension.
    #[arg(long)]
    svg: Option<PathBuf>,
}

/// Flag-over-config resolution for one command.
struct Settings {
    file: ConfigFile,
}

impl Settings {
    fn load(path: &Option<PathBuf>, allowed: &[&str]) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let file = ConfigFile::parse(&text)?;
                file.validate_keys(allowed)?;
                file
            }
            None => ConfigFile::default(),
        };
        Ok(Self { file })
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| anyhow!("config key {key}: cannot parse {raw:?}")),
        }
    }

    fn get_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.get(flag, key)?
            .ok_or_else(|| anyhow!("missing required setting {key} (flag --{})", key.replace('_', "-")))
    }

    fn get_flag(&self, flag: bool, key: &str) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        match self.file.get(key) {
            None => Ok(false),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(other) => Err(anyhow!("config key {key}: expected true/false, got {other:?}")),
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ved(args) => run_ved(&cli, args),
        Command::CodeVed(args) => run_code_ved(&cli, args),
        Command::MinList(args) => run_min_list(&cli, args),
        Command::Simulate(args) => run_simulate(&cli, args),
        Command::Sweep(args) => run_sweep(&cli, args),
    }
}

fn run_ved(cli: &Cli, args: &VedArgs) -> Result<()> {
    let settings = Settings::load(&cli.config, &["input", "strategy", "seed", "out"])?;
    let input: PathBuf = settings.require(args.input.clone(), "input")?;
    let strategy: Strategy = settings
        .get(args.strategy.clone(), "strategy")?
        .map(|s: String| Strategy::from_str(&s).map_err(|e| anyhow!(e)))
        .transpose()?
        .unwrap_or(Strategy::Exhaustive);

    let text = fs::read_to_string(&input)
        .with_context(|| format!("reading vectors {}", input.display()))?;
    let vectors = parse_vector_file(&text)?;
    let problem = gram_of(vectors)?;
    // Large constraint sets default to the iterative solver.
    let strategy = match (args.strategy.is_none() && settings.file.get("strategy").is_none(), problem.len()) {
        (true, l) if l > 12 => Strategy::Iterative,
        _ => strategy,
    };
    let solution = ved(&problem, strategy)?;
    let kkt = verify_kkt(&problem, &solution);

    let active: Vec<String> = solution.active_set.iter().map(|i| i.to_string()).collect();
    let multipliers: Vec<String> = solution.multipliers.iter().map(|m| fmt_g9(*m)).collect();
    let report = format!(
        "ved = {}\nved_sq = {}\nrank = {}\nactive = {}\nmultipliers = {}\nkkt_ok = {}\n",
        fmt_g9(solution.ved),
        fmt_g9(solution.ved_sq),
        rank_of(&problem, EIG_CUTOFF),
        active.join(","),
        multipliers.join(","),
        kkt.passes(1e-8)
    );
    emit(&cli.out, &report)
}

fn search_bounds(
    settings: &Settings,
    max_weight: Option<u32>,
    max_steps: Option<usize>,
    steps_key: &str,
    window: Option<usize>,
    include_unmerged: bool,
    node_cap: Option<u64>,
) -> Result<SearchBounds> {
    let defaults = SearchBounds::default();
    Ok(SearchBounds {
        max_weight: settings.get_or(max_weight, "max_weight", defaults.max_weight)?,
        max_steps: settings.get_or(max_steps, steps_key, defaults.max_steps)?,
        include_unmerged,
        offset_window: settings.get_or(window, "window", defaults.offset_window)?,
        node_cap: settings.get_or(node_cap, "node_cap", defaults.node_cap)?,
        event_cap: defaults.event_cap,
    })
}

fn run_code_ved(cli: &Cli, args: &CodeVedArgs) -> Result<()> {
    let settings = Settings::load(
        &cli.config,
        &["code", "l", "max_weight", "max_steps", "window", "include_unmerged", "node_cap", "seed", "out"],
    )?;
    let code_spec: String = settings.require(args.code.clone(), "code")?;
    let code = ConvCode::from_spec(&code_spec)?;
    let l_max: usize = settings.get_or(args.l, "l", 1)?;
    if l_max == 0 {
        bail!("l must be >= 1");
    }
    let include_unmerged = settings.get_flag(args.include_unmerged, "include_unmerged")?;
    let bounds = search_bounds(
        &settings,
        args.max_weight,
        args.max_steps,
        "max_steps",
        args.window,
        include_unmerged,
        args.node_cap,
    )?;
    let mut rows = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        rows.push(min_ved(&code, l, &bounds, SignalMapping::default())?);
    }
    emit(&cli.out, &format_list_csv(&rows))
}

fn run_min_list(cli: &Cli, args: &MinListArgs) -> Result<()> {
    let settings = Settings::load(
        &cli.config,
        &["code", "max_weight", "depth", "window", "b_max", "target", "node_cap", "seed", "out"],
    )?;
    let code_spec: String = settings.require(args.code.clone(), "code")?;
    let code = ConvCode::from_spec(&code_spec)?;
    let b_max: usize = settings.get_or(args.b_max, "b_max", 8)?;
    let target: Option<f64> = settings.get(args.target, "target")?;
    let bounds = search_bounds(
        &settings,
        args.max_weight,
        args.depth,
        "depth",
        args.window,
        true,
        args.node_cap,
    )?;
    let result = minimal_list_size(&code, &bounds, target, b_max, SignalMapping::default())?;
    emit(&cli.out, &format_list_csv(&result.table))?;
    println!("b_star = {}", result.b_star);
    Ok(())
}

/// The asymptote overlay for a simulation point: an explicit override, else
/// the minimum VED of the matching subset problem (d_free energy for plain
/// Viterbi).
fn asymptote_for(
    code: &ConvCode,
    decoder: DecoderKind,
    l_or_b: usize,
    overridden: Option<f64>,
) -> Result<Option<f64>> {
    if overridden.is_some() {
        return Ok(overridden);
    }
    let value = match decoder {
        DecoderKind::Viterbi => (free_distance(code) as f64).sqrt(),
        DecoderKind::ListViterbi => {
            let bounds = SearchBounds::default();
            min_ved(code, l_or_b, &bounds, SignalMapping::default())?.min_ved
        }
        DecoderKind::BreadthFirst => {
            let bounds = SearchBounds {
                include_unmerged: true,
                ..SearchBounds::default()
            };
            min_ved(code, l_or_b, &bounds, SignalMapping::default())?.min_ved
        }
    };
    Ok(Some(value))
}

fn sim_point(cli: &Cli, settings: &Settings, args: &SimArgs, ebno_db: f64) -> Result<SimResult> {
    let code_spec: String = settings.require(args.code.clone(), "code")?;
    let code = ConvCode::from_spec(&code_spec)?;
    let decoder: DecoderKind = settings
        .get(args.decoder.clone(), "decoder")?
        .map(|s: String| DecoderKind::from_str(&s).map_err(|e| anyhow!(e)))
        .transpose()?
        .unwrap_or(DecoderKind::Viterbi);
    let l_or_b: usize = settings.get_or(args.l, "l", 1)?;
    let info_len: usize = settings.get_or(args.info_len, "info_len", 100)?;
    let trials: u64 = settings.get_or(args.trials, "trials", 100_000)?;
    let seed: u64 = settings.get_or(cli.seed, "seed", 1)?;
    let asymptote_override: Option<f64> = settings.get(args.asymptote_ved, "asymptote_ved")?;
    let asymptote_ved = asymptote_for(&code, decoder, l_or_b, asymptote_override)?;

    let cfg = SimConfig {
        channel: ChannelSpec::for_code(ebno_db, &code),
        code,
        decoder,
        l_or_b,
        info_len,
        trials,
        seed,
        asymptote_ved,
    };
    Ok(simulate_ce(&cfg)?)
}

fn sim_settings(cli: &Cli) -> Result<Settings> {
    Settings::load(
        &cli.config,
        &[
            "code", "decoder", "l", "ebno", "ebno_grid", "info_len", "trials", "seed",
            "asymptote_ved", "svg", "out",
        ],
    )
}

fn run_simulate(cli: &Cli, args: &SimArgs) -> Result<()> {
    let settings = sim_settings(cli)?;
    let ebno: f64 = settings.require(args.ebno, "ebno")?;
    let row = sim_point(cli, &settings, args, ebno)?;
    emit(&cli.out, &format_sim_csv(&[row]))
}

fn run_sweep(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let settings = sim_settings(cli)?;
    let code_spec: String = settings.require(args.sim.code.clone(), "code")?;
    let grid_spec: String = settings.require(args.ebno_grid.clone(), "ebno_grid")?;
    let grid = parse_ebno_grid(&grid_spec)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &ebno in &grid {
        rows.push(sim_point(cli, &settings, &args.sim, ebno)?);
    }
    emit(&cli.out, &format_sim_csv(&rows))?;

    let svg_path: Option<PathBuf> = match (&args.svg, settings.file.get("svg"), &cli.out) {
        (Some(p), _, _) => Some(p.clone()),
        (None, Some(p), _) => Some(PathBuf::from(p)),
        (None, None, Some(out)) => Some(out.with_extension("svg")),
        (None, None, None) => None,
    };
    if let Some(path) = svg_path {
        let title = format!(
            "{code_spec} {} L={}",
            rows.first().map(|r| r.decoder.to_string()).unwrap_or_default(),
            rows.first().map(|r| r.l_or_b).unwrap_or(0)
        );
        fs::write(&path, render_sweep_svg(&rows, &title))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
