//! `macroplace` command-line tool.
//!
//! Exit codes: 0 success (legal output), 1 input or usage error, 2 an illegal
//! result (legalization failed, or `check` found violations).

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use macroplace::io::{
    check_result, generate_instance, load_config, load_result, read_instance_file, save_instance,
    save_result, stats_csv, write_atomic, write_svg, GenSpec, IoError, PositionEntry, ResultFile,
};
use macroplace::placer::{naive_legalize, PlaceError, Placer, PlacerConfig, RoundStats};

/// Default directory for outputs when `--out` is omitted.
const OUT_DIR_ENV: &str = "MACROPLACE_OUT_DIR";

#[derive(Parser)]
#[command(name = "macroplace", version, about = "Macro placement on a discretized area")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the placer on an instance and write a result file.
    Place(PlaceArgs),
    /// Independently verify a result against its instance.
    Check(CheckArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Render an instance (and optionally a result) as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct PlaceArgs {
    /// Instance file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Result file; defaults to `<stem>.result.json` in $MACROPLACE_OUT_DIR (or the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-round statistics CSV; streamed to stdout when omitted.
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
    /// Keep the placer output as is, even if it is not legal.
    #[arg(long)]
    skip_legalize: bool,
    /// JSON file with placer settings. Keys present there override the flags below.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    placer: PlacerFlags,
}

#[derive(Args)]
struct PlacerFlags {
    #[arg(long, visible_alias = "rounds")]
    max_rounds: Option<u64>,
    #[arg(long)]
    candidates: Option<u32>,
    #[arg(long)]
    grid_p: Option<u32>,
    #[arg(long)]
    grid_q: Option<u32>,
    #[arg(long)]
    penalty_c: Option<f64>,
    #[arg(long)]
    delta0: Option<f64>,
    #[arg(long)]
    delta_growth: Option<f64>,
    #[arg(long)]
    overlap_w0: Option<f64>,
    #[arg(long)]
    overlap_growth: Option<f64>,
    #[arg(long)]
    inflation_rho: Option<f64>,
    #[arg(long)]
    blockage_weight: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    model_switch_round: Option<u64>,
}

impl PlacerFlags {
    fn apply(&self, c: &mut PlacerConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(max_rounds, candidates, grid_p, grid_q, penalty_c, delta0, overlap_w0, inflation_rho, blockage_weight, seed);
        if self.delta_growth.is_some() {
            c.delta_growth = self.delta_growth;
        }
        if self.overlap_growth.is_some() {
            c.overlap_growth = self.overlap_growth;
        }
        if self.model_switch_round.is_some() {
            c.model_switch_round = self.model_switch_round;
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    #[arg(long, value_name = "FILE")]
    result: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 20)]
    macros: usize,
    #[arg(long, default_value_t = 2)]
    size_min: u32,
    #[arg(long, default_value_t = 8)]
    size_max: u32,
    #[arg(long, default_value_t = 30)]
    nets: usize,
    /// Relative weights of net degrees 2, 3, 4, ...
    #[arg(long, value_delimiter = ',', default_value = "0.7,0.2,0.07,0.03")]
    degree_weights: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    max_nets_per_macro: usize,
    #[arg(long, default_value_t = 0.5)]
    utilization: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Instance file; defaults to `gen-<seed>.json` in $MACROPLACE_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    /// Positions to draw; the instance's initial placement is used otherwise.
    #[arg(long, value_name = "FILE")]
    result: Option<PathBuf>,
    /// SVG file; defaults to `<stem>.svg` in $MACROPLACE_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Place(a) => place(a),
        Command::Check(a) => check(a),
        Command::Gen(a) => gen(a),
        Command::Render(a) => render(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn default_out(name: String) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(name),
        _ => PathBuf::from(name),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned())
}

/// Defaults, then flags, then whatever keys the config file sets.
fn resolve_config(flags: &PlacerFlags, file: Option<&Path>) -> Result<PlacerConfig> {
    let mut config = PlacerConfig::default();
    flags.apply(&mut config);
    if let Some(path) = file {
        // full parse first: reports unknown keys and bad types with a location
        load_config(path)?;
        let text = fs::read_to_string(path).with_context(|| path.display().to_string())?;
        let Value::Object(overrides) = serde_json::from_str(&text)? else {
            bail!("{}: config must be a JSON object", path.display());
        };
        let Value::Object(mut merged) = serde_json::to_value(&config)? else {
            unreachable!("config serializes to an object");
        };
        merged.extend(overrides);
        config = serde_json::from_value(Value::Object(merged))?;
    }
    config.validate()?;
    Ok(config)
}

fn place(args: PlaceArgs) -> Result<ExitCode> {
    let file = read_instance_file(&args.input)?;
    let inst = file.to_instance()?;
    let config = resolve_config(&args.placer, args.config.as_deref())?;
    let out = args.out.clone().unwrap_or_else(|| default_out(format!("{}.result.json", stem(&args.input))));

    let placer = Placer::new(&inst.netlist, &inst.area, inst.initial.as_ref(), config.clone())?;
    let placed = match &args.stats {
        Some(path) => {
            let (placed, trace) = placer.run_with(|_| {})?;
            write_atomic(path, stats_csv(&trace).as_bytes())?;
            placed
        }
        None => {
            let mut stdout = BufWriter::new(io::stdout().lock());
            writeln!(stdout, "{}", RoundStats::CSV_HEADER)?;
            let mut failed = None;
            let (placed, _) = placer.run_with(|s| {
                if failed.is_none() {
                    failed = writeln!(stdout, "{}", s.csv_line()).err();
                }
            })?;
            if let Some(e) = failed {
                return Err(e).context("writing statistics");
            }
            stdout.flush()?;
            placed
        }
    };

    let (final_placement, legalized, code) = if args.skip_legalize {
        (placed, false, ExitCode::SUCCESS)
    } else {
        match naive_legalize(&placed, &inst.netlist, &inst.area) {
            Ok(p) => (p, true, ExitCode::SUCCESS),
            Err(PlaceError::LegalizationFailed(id)) => {
                eprintln!("legalization failed: no free position for macro '{id}'; writing unlegalized result");
                (placed, false, ExitCode::from(2))
            }
            Err(e) => return Err(e.into()),
        }
    };
    let result = ResultFile::new(&inst.netlist, &inst.area, &final_placement, &config, legalized)?;
    save_result(&out, &result)?;
    eprintln!(
        "wrote {}: netlength_bb={} overlap_area={} legal={}",
        out.display(),
        result.summary.netlength_bb,
        result.summary.overlap_area,
        result.summary.legal
    );
    Ok(code)
}

fn check(args: CheckArgs) -> Result<ExitCode> {
    let instance = read_instance_file(&args.instance)?;
    instance.to_instance()?;
    let result = load_result(&args.result)?;
    let report = match check_result(&instance, &result) {
        Ok(r) => r,
        Err(IoError::Mismatch { missing, unexpected }) => {
            eprintln!("macro sets differ between instance and result");
            for id in &missing {
                eprintln!("- {id}");
            }
            for id in &unexpected {
                eprintln!("+ {id}");
            }
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e.into()),
    };
    println!("netlength_bb: {}", report.netlength_bb);
    for id in &report.out_of_area {
        println!("out_of_area: {id}");
    }
    for (a, b) in &report.overlapping {
        println!("overlap: {a} {b}");
    }
    for (id, k) in &report.blocked {
        println!("blocked: {id} blockage#{k}");
    }
    if report.is_legal() {
        println!("legal: yes");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("legal: no");
        Ok(ExitCode::from(2))
    }
}

fn gen(args: GenArgs) -> Result<ExitCode> {
    let spec = GenSpec {
        macros: args.macros,
        size_min: args.size_min,
        size_max: args.size_max,
        nets: args.nets,
        degree_weights: args.degree_weights,
        max_nets_per_macro: args.max_nets_per_macro,
        utilization: args.utilization,
        seed: args.seed,
    };
    let out = args.out.unwrap_or_else(|| default_out(format!("gen-{}.json", spec.seed)));
    save_instance(&out, &generate_instance(&spec)?)?;
    eprintln!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn render(args: RenderArgs) -> Result<ExitCode> {
    let instance = read_instance_file(&args.instance)?;
    instance.to_instance()?;
    let positions: Vec<PositionEntry> = match &args.result {
        Some(path) => load_result(path)?.positions,
        None => instance.initial_placement.clone().unwrap_or_default(),
    };
    let out = args.out.unwrap_or_else(|| default_out(format!("{}.svg", stem(&args.instance))));
    write_svg(&out, &instance, &positions)?;
    eprintln!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}
