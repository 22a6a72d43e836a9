//! `ultrascale`: command-line front end for the ultrascale library.
//!
//! Every subcommand resolves a [`RunConfig`] (defaults, then a key=value
//! config file from `--config`/`ULTRASCALE_CONFIG`, then flag overrides) and
//! stamps its output with the config hash and seed, so identical invocations
//! are byte-identical.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

use ultrascale::cantor::{build_ifs, CantorApproximation, GapSchedule};
use ultrascale::config::{OutputFormat, RunConfig};
use ultrascale::error::Error;
use ultrascale::ladder::{DeltaLadder, ScaleLadder};
use ultrascale::measures::box_count_dimension;
use ultrascale::padic::{
    build_tree_expanded, monna_default_ratio, monna_map, padic_valuation, PadicNumber,
};
use ultrascale::primes::{conservation_solve, inversion_cascade, pnt_deviation, sieve};
use ultrascale::rat::{decimal_string, format_ratio, parse_ratio, ratio_to_f64, BigRational};
use ultrascale::staircase::devil_staircase;
use ultrascale::valuation::{valuate, valuation_form_eval, Family, InfinitesimalFamily, ValuationForm};
use ultrascale::verify::run_all_with_determinism;

#[derive(Parser)]
#[command(
    name = "ultrascale",
    version,
    about = "Cantor-set covers, fractal exponents, ultrametric valuations, p-adic trees, and prime-counting asymptotics"
)]
struct Cli {
    /// Key=value config file (falls back to $ULTRASCALE_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override for randomized sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format override: json, csv, or plain.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
    /// Sieve limit override.
    #[arg(long, global = true)]
    sieve_limit: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a level-n interval cover (thin via --ratio, fat via --schedule).
    Cantor {
        #[arg(long)]
        ratio: Option<String>,
        #[arg(long)]
        level: u32,
        /// geometric:<first> or file:<path> (one gap fraction per line).
        #[arg(long)]
        schedule: Option<String>,
        /// Write the interval CSV to this path.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Box-counting dimension of a thin cover.
    Dim {
        #[arg(long)]
        ratio: String,
        #[arg(long)]
        level: u32,
        /// base:depth, e.g. 3:8 for eps = 3^-1 .. 3^-8.
        #[arg(long)]
        ladder: String,
        /// Write the (log 1/eps, log N) ladder points as CSV.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Valuation of the family x(delta) = lambda * delta^(1+l).
    Valuate {
        #[arg(long)]
        l: f64,
        #[arg(long)]
        lambda: f64,
        /// base:hi:lo, e.g. 10:-2:-9 for delta = 1e-2 .. 1e-9.
        #[arg(long, default_value = "10:-2:-9")]
        delta_ladder: String,
    },
    /// Evaluate a closed valuation form at x.
    Vform {
        /// constant-a | cantor-b | combined | measure | series | thin
        #[arg(long)]
        variant: String,
        #[arg(long)]
        a: Option<f64>,
        /// Single value, or comma list for the series variant.
        #[arg(long)]
        b: Option<String>,
        /// Single value, or comma list for the series variant.
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        ap: Option<f64>,
        #[arg(long)]
        bp: Option<f64>,
        #[arg(long)]
        xbar: Option<f64>,
        #[arg(long)]
        x: f64,
    },
    /// Devil's staircase value at t, or a plotting grid.
    Staircase {
        #[arg(long)]
        t: Option<String>,
        #[arg(long, default_value_t = 64)]
        precision: usize,
        /// Emit (t, phi) for t = 0/n .. n/n.
        #[arg(long)]
        grid: Option<u32>,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// p-adic valuation of q, digit expansion, or component-tree export.
    Padic {
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        p: Option<u64>,
        /// Also expand q to this many unit digits.
        #[arg(long)]
        depth: Option<usize>,
        /// Build the component tree from p:v pairs, e.g. 2:0.5,3:0.3.
        #[arg(long)]
        tree: Option<String>,
        /// Expand each prime branch to digit-level children of this depth.
        #[arg(long, default_value_t = 0)]
        digit_depth: u32,
    },
    /// Monna map of a digit stream onto a Cantor set.
    Monna {
        /// LSB-first digits, e.g. 1,0,1.
        #[arg(long)]
        digits: String,
        #[arg(long)]
        p: u64,
        /// Target contraction ratio (default: 1/3 for p=2, else 1/(p+1)).
        #[arg(long)]
        ratio: Option<String>,
    },
    /// Prime-counting deviation table over a decade ladder.
    Pnt {
        /// lo:hi in decades, e.g. 1e2:1e7.
        #[arg(long)]
        ladder: String,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Conservation identity: s, X = x^-s, and the residual.
    Conserve {
        #[arg(long)]
        x: f64,
        /// Scaling factor (rational like 1/3 or decimal).
        #[arg(long)]
        a: String,
        #[arg(long)]
        p: f64,
    },
    /// Prime-driven inversion cascade trace.
    Cascade {
        #[arg(long)]
        x: f64,
        /// Write the full trace JSON to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the verification suite and print the pass/fail table.
    VerifyAll,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match run(cli) {
        Ok(ExitStatus::Success) => 0,
        Ok(ExitStatus::ChecksFailed) => 1,
        Err(err) => {
            eprintln!(
                "{}",
                json!({ "error": err.kind(), "message": err.to_string() })
            );
            1
        }
    }
}

enum ExitStatus {
    Success,
    ChecksFailed,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os("ULTRASCALE_CONFIG").map(PathBuf::from));
    let mut config = match path {
        Some(p) => {
            let contents = std::fs::read_to_string(&p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::from_file_contents(&contents)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(format) = cli.format {
        config.format = format;
    }
    if let Some(limit) = cli.sieve_limit {
        config.sieve_limit = limit;
    }
    config.validate()?;
    Ok(config)
}

fn config_hash(config: &RunConfig) -> String {
    let digest = Sha256::digest(config.canonical_string().as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex[..16].to_string()
}

fn stamp(config: &RunConfig) -> serde_json::Value {
    json!({ "hash": config_hash(config), "seed": config.seed })
}

fn print_json(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
}

fn csv_header(config: &RunConfig) -> String {
    format!("# config_hash={} seed={}\n", config_hash(config), config.seed)
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<ExitStatus, Error> {
    let config = load_config(&cli)?;
    match &cli.command {
        Command::Cantor { ratio, level, schedule, emit } => {
            cmd_cantor(&config, ratio.as_deref(), *level, schedule.as_deref(), emit.as_ref())
        }
        Command::Dim { ratio, level, ladder, emit } => {
            cmd_dim(&config, ratio, *level, ladder, emit.as_ref())
        }
        Command::Valuate { l, lambda, delta_ladder } => {
            cmd_valuate(&config, *l, *lambda, delta_ladder)
        }
        Command::Vform { variant, a, b, s, beta, ap, bp, xbar, x } => cmd_vform(
            &config,
            variant,
            *a,
            b.as_deref(),
            s.as_deref(),
            *beta,
            *ap,
            *bp,
            *xbar,
            *x,
        ),
        Command::Staircase { t, precision, grid, emit } => {
            cmd_staircase(&config, t.as_deref(), *precision, *grid, emit.as_ref())
        }
        Command::Padic { q, p, depth, tree, digit_depth } => {
            cmd_padic(&config, q.as_deref(), *p, *depth, tree.as_deref(), *digit_depth)
        }
        Command::Monna { digits, p, ratio } => cmd_monna(&config, digits, *p, ratio.as_deref()),
        Command::Pnt { ladder, emit } => cmd_pnt(&config, ladder, emit.as_ref()),
        Command::Conserve { x, a, p } => cmd_conserve(&config, *x, a, *p),
        Command::Cascade { x, trace } => cmd_cascade(&config, *x, trace.as_ref()),
        Command::VerifyAll => cmd_verify_all(&config),
    }
}

// ---------------------------------------------------------------------------
// argument parsing helpers
// ---------------------------------------------------------------------------

fn parse_schedule(spec: &str) -> Result<GapSchedule, Error> {
    match spec.split_once(':') {
        Some(("geometric", first)) => GapSchedule::geometric(parse_ratio(first)?),
        Some(("file", path)) => {
            let contents = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read schedule file {path}: {e}")))?;
            let values: Result<Vec<BigRational>, Error> = contents
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(parse_ratio)
                .collect();
            GapSchedule::explicit(values?)
        }
        _ => Err(Error::Domain(format!(
            "schedule must be geometric:<fraction> or file:<path>, got '{spec}'"
        ))),
    }
}

fn parse_base_depth(spec: &str) -> Result<(u32, u32), Error> {
    let (base, depth) = spec
        .split_once(':')
        .ok_or_else(|| Error::Domain(format!("ladder must be base:depth, got '{spec}'")))?;
    let base = base
        .parse::<u32>()
        .map_err(|_| Error::Domain(format!("invalid ladder base '{base}'")))?;
    let depth = depth
        .parse::<u32>()
        .map_err(|_| Error::Domain(format!("invalid ladder depth '{depth}'")))?;
    Ok((base, depth))
}

fn parse_delta_ladder(spec: &str) -> Result<DeltaLadder, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Domain(format!(
            "delta ladder must be base:hi:lo (e.g. 10:-2:-9), got '{spec}'"
        )));
    }
    let base = parts[0]
        .parse::<f64>()
        .map_err(|_| Error::Domain(format!("invalid ladder base '{}'", parts[0])))?;
    let hi = parts[1]
        .parse::<i32>()
        .map_err(|_| Error::Domain(format!("invalid exponent '{}'", parts[1])))?;
    let lo = parts[2]
        .parse::<i32>()
        .map_err(|_| Error::Domain(format!("invalid exponent '{}'", parts[2])))?;
    if !base.is_finite() || base <= 1.0 || hi >= 0 || lo >= hi {
        return Err(Error::Domain(
            "delta ladder needs base > 1 and negative exponents with hi > lo".into(),
        ));
    }
    let log_inv: Vec<f64> = (lo..=hi).rev().map(|e| -(e as f64) * base.ln()).collect();
    DeltaLadder::from_log_inv(log_inv)
}

fn parse_f64_list(spec: &str) -> Result<Vec<f64>, Error> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("invalid number '{s}'")))
        })
        .collect()
}

fn parse_rational_or_float(spec: &str) -> Result<f64, Error> {
    if spec.contains('/') {
        Ok(ratio_to_f64(&parse_ratio(spec)?))
    } else {
        spec.parse::<f64>()
            .map_err(|_| Error::Domain(format!("invalid number '{spec}'")))
    }
}

fn require<T: Copy>(value: Option<T>, flag: &str, variant: &str) -> Result<T, Error> {
    value.ok_or_else(|| Error::Domain(format!("--{flag} is required for variant '{variant}'")))
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

fn cmd_cantor(
    config: &RunConfig,
    ratio: Option<&str>,
    level: u32,
    schedule: Option<&str>,
    emit: Option<&PathBuf>,
) -> Result<ExitStatus, Error> {
    if level > config.max_level {
        return Err(Error::Domain(format!(
            "level {level} exceeds max_level {} (raise it in the config)",
            config.max_level
        )));
    }
    let root = match (schedule, ratio) {
        (Some(spec), _) => CantorApproximation::fat_root(parse_schedule(spec)?),
        (None, Some(r)) => CantorApproximation::thin_root(build_ifs(parse_ratio(r)?)?),
        (None, None) => {
            return Err(Error::Domain("either --ratio or --schedule is required".into()))
        }
    };
    let approx = root.refine_to(level);
    let mut csv = csv_header(config);
    csv.push_str("level,index,left_num,left_den,right_num,right_den\n");
    for (index, (left, right)) in approx.intervals().into_iter().enumerate() {
        csv.push_str(&format!(
            "{level},{index},{},{},{},{}\n",
            left.numer(),
            left.denom(),
            right.numer(),
            right.denom()
        ));
    }
    if let Some(path) = emit {
        write_file(path, &csv)?;
    }
    match config.format {
        OutputFormat::Csv => print!("{csv}"),
        OutputFormat::Json => {
            let intervals: Vec<serde_json::Value> = approx
                .intervals()
                .into_iter()
                .enumerate()
                .map(|(index, (l, r))| {
                    json!({ "index": index, "left": format_ratio(&l), "right": format_ratio(&r) })
                })
                .collect();
            print_json(json!({
                "config": stamp(config),
                "level": level,
                "count": approx.interval_count(),
                "measure": format_ratio(&approx.lebesgue_measure()),
                "intervals": intervals,
            }));
        }
        OutputFormat::Plain => {
            println!("level {level}: {} intervals", approx.interval_count());
            for (index, (l, r)) in approx.intervals().into_iter().enumerate() {
                println!("{index} [{}, {}]", format_ratio(&l), format_ratio(&r));
            }
            println!("config_hash={} seed={}", config_hash(config), config.seed);
        }
    }
    Ok(ExitStatus::Success)
}

fn cmd_dim(
    config: &RunConfig,
    ratio: &str,
    level: u32,
    ladder_spec: &str,
    emit: Option<&PathBuf>,
) -> Result<ExitStatus, Error> {
    if level > config.max_level {
        return Err(Error::Domain(format!(
            "level {level} exceeds max_level {}",
            config.max_level
        )));
    }
    let (base, depth) = parse_base_depth(ladder_spec)?;
    let ladder = ScaleLadder::inverse_powers(base, 1, depth)?;
    let approx = CantorApproximation::thin_root(build_ifs(parse_ratio(ratio)?)?).refine_to(level);
    let estimate = box_count_dimension(&approx, &ladder)?;
    let mut csv = csv_header(config);
    csv.push_str("log_inv_eps,log_count\n");
    for (x, y) in &estimate.points {
        csv.push_str(&format!("{x:.12},{y:.12}\n"));
    }
    if let Some(path) = emit {
        write_file(path, &csv)?;
    }
    match config.format {
        OutputFormat::Csv => print!("{csv}"),
        OutputFormat::Json => print_json(json!({
            "config": stamp(config),
            "exponent": estimate.exponent,
            "stderr": estimate.stderr,
            "r_squared": estimate.r_squared,
            "valid": estimate.valid,
            "points": estimate.points,
        })),
        OutputFormat::Plain => {
            println!("exponent={:.9}", estimate.exponent);
            println!("stderr={:.3e}", estimate.stderr);
            println!("r_squared={:.9}", estimate.r_squared);
            println!("config_hash={} seed={}", config_hash(config), config.seed);
        }
    }
    Ok(ExitStatus::Success)
}

fn cmd_valuate(
    config: &RunConfig,
    l: f64,
    lambda: f64,
    ladder_spec: &str,
) -> Result<ExitStatus, Error> {
    if !(0.0..1.0).contains(&l) {
        return Err(Error::Domain("exponent l must lie in [0,1)".into()));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Domain("prefactor lambda must lie in (0,1]".into()));
    }
    let ladder = parse_delta_ladder(ladder_spec)?;
    let family = InfinitesimalFamily::new(l, lambda)?;
    let estimate = valuate(&Family::Power(family), &ladder)?;
    match config.format {
        OutputFormat::Json => print_json(json!({
            "config": stamp(config),
            "value": estimate.value,
            "clamped": estimate.clamped,
            "class": estimate.class,
            "residuals": estimate
                .raw
                .iter()
                .map(|&(log_inv, raw)| json!({ "log_inv_delta": log_inv, "raw": raw }))
                .collect::<Vec<_>>(),
        })),
        OutputFormat::Csv => {
            print!("{}", csv_header(config));
            println!("log_inv_delta,raw");
            for (log_inv, raw) in &estimate.raw {
                println!("{log_inv:.12},{raw:.12}");
            }
            println!("# value={:.12}", estimate.value);
        }
        OutputFormat::Plain => {
            println!("value={:.12}", estimate.value);
            for (log_inv, raw) in &estimate.raw {
                println!("ln(1/delta)={log_inv:.6} raw={raw:.12}");
            }
            println!("config_hash={} seed={}", config_hash(config), config.seed);
        }
    }
    Ok(ExitStatus::Success)
}

#[allow(clippy::too_many_arguments)]
fn cmd_vform(
    config: &RunConfig,
    variant: &str,
    a: Option<f64>,
    b: Option<&str>,
    s: Option<&str>,
    beta: Option<f64>,
    ap: Option<f64>,
    bp: Option<f64>,
    xbar: Option<f64>,
    x: f64,
) -> Result<ExitStatus, Error> {
    let single = |spec: Option<&str>, flag: &str| -> Result<f64, Error> {
        let spec = spec
            .ok_or_else(|| Error::Domain(format!("--{flag} is required for variant '{variant}'")))?;
        let values = parse_f64_list(spec)?;
        if values.len() != 1 {
            return Err(Error::Domain(format!("--{flag} must be a single value here")));
        }
        Ok(values[0])
    };
    let form = match variant {
        "constant-a" => ValuationForm::ConstantA { a: require(a, "a", variant)? },
        "cantor-b" => ValuationForm::CantorB {
            b: single(b, "b")?,
            beta: require(beta, "beta", variant)?,
        },
        "combined" => ValuationForm::Combined {
            a: require(a, "a", variant)?,
            b: single(b, "b")?,
            beta: require(beta, "beta", variant)?,
        },
        "measure" => ValuationForm::Measure {
            a_p: require(ap, "ap", variant)?,
            b_p: require(bp, "bp", variant)?,
            s: single(s, "s")?,
            x_bar: require(xbar, "xbar", variant)?,
        },
        "series" => {
            let bs = parse_f64_list(
                b.ok_or_else(|| Error::Domain("--b is required for variant 'series'".into()))?,
            )?;
            let ss = parse_f64_list(
                s.ok_or_else(|| Error::Domain("--s is required for variant 'series'".into()))?,
            )?;
            if bs.len() != ss.len() {
                return Err(Error::Domain("--b and --s lists must have equal length".into()));
            }
            ValuationForm::Series {
                a: require(a, "a", variant)?,
                terms: bs.into_iter().zip(ss).collect(),
            }
        }
        "thin" => ValuationForm::Thin { b: single(b, "b")?, s: single(s, "s")? },
        other => {
            return Err(Error::Domain(format!(
                "unknown variant '{other}' (expected constant-a, cantor-b, combined, measure, series, thin)"
            )))
        }
    };
    let value = valuation_form_eval(&form, x)?;
    match config.format {
        OutputFormat::Json => print_json(json!({
            "config": stamp(config),
            "variant": variant,
            "x": x,
            "value": value,
        })),
        OutputFormat::Csv => {
            print!("{}", csv_header(config));
            println!("variant,x,value");
            println!("{variant},{x:e},{value:.15e}");
        }
        OutputFormat::Plain => {
            println!("v({x:e}) = {value:.15e}");
            println!("config_hash={} seed={}", config_hash(config), config.seed);
        }
    }
    Ok(ExitStatus::Success)
}

fn cmd_staircase(
    config: &RunConfig,
    t: Option<&str>,
    precision: usize,
    grid: Option<u32>,
    emit: Option<&PathBuf>,
) -> Result<ExitStatus, Error> {
    if let Some(n) = grid {
        if n == 0 {
            return Err(Error::Domain("grid size must be positive".into()));
        }
        let mut csv = csv_header(config);
        csv.push_str("t,phi\n");
        for i in 0..=n {
            let t = BigRational::new(i.into(), n.into());
            let phi = devil_staircase(&t, precision)?.value;
            csv.push_str(&format!(
                "{},{}\n",
                decimal_string(&t, 12),
                decimal_string(&phi, 12)
            ));
        }
        if let Some(path) = emit {
            write_file(path, &csv)?;
        } else {
            print!("{csv}");
        }
        return Ok(ExitStatus::Success);
    }
    let t = parse_ratio(t.ok_or_else(|| Error::Domain("--t or --grid is required".into()))?)?;
    let result = devil_staircase(&t, precision)?;
    match config.format {
        OutputFormat::Json => print_json(json!({
            "config": stamp(config),
            "t": format_ratio(&result.input),
            "phi": format_ratio(&result.value),
            "decimal": decimal_string(&result.value, 24),
            "exact": result.exact,
            "ternary": result.ternary,
            "binary": result.binary,
        })),
        OutputFormat::Csv => {
            print!("{}", csv_header(config));
            println!("t,phi,exact");
            println!("{},{},{}", format_ratio(&t), format_ratio(&result.value), result.exact);
        }
        OutputFormat::Plain => {
            println!(
                "phi({}) = {} = {}",
                format_ratio(&t),
                format_ratio(&result.value),
                decimal_string(&result.value, 24)
            );
            println!("config_hash={} seed={}", config_hash(config), config.seed);
        }
    }
    Ok(ExitStatus::Success)
}

fn cmd_padic(
    config: &RunConfig,
    q: Option<&str>,
    p: Option<u64>,
    depth: Option<usize>,
    tree: Option<&str>,
    digit_depth: u32,
) -> Result<ExitStatus, Error> {
    if let Some(spec) = tree {
        let components: Result<Vec<(u64, f64)>, Error> = spec
            .split(',')
            .map(|part| {
                let (p, v) = part.split_once(':').ok_or_else(|| {
                    Error::Domain(format!("tree components must be p:v pairs, got '{part}'"))
                })?;
                let p = p
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Domain(format!("invalid prime '{p}'")))?;
                let v = v
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Domain(format!("invalid valuation '{v}'")))?;
                Ok((p, v))
            })
            .collect();
        let root = build_tree_expanded(&components?, digit_depth)?;
        match config.format {
            OutputFormat::Json => print_json(json!({
                "config": stamp(config),
                "tree": root,
                "nested": root.render_nested(),
            })),
            OutputFormat::Csv | OutputFormat::Plain => {
                print!("{}", root.render_text());
                println!("nested: {}", root.render_nested());
                println!("config_hash={} seed={}", config_hash(config), config.seed);
            }
        }
        return Ok(ExitStatus::Success);
    }
    let q = parse_ratio(q.ok_or_else(|| Error::Domain("--q or --tree is required".into()))?)?;
    let p = p.ok_or_else(|| Error::Domain("--p is required with --q".into()))?;
    let valuation = padic_valuation(&q, p)?;
    let order_json = match valuation.order {
        Some(o) => json!(o),
        None => json!("infinity"),
    };
    let digits = match depth {
        Some(d) => Some(PadicNumber::from_rational(&q, p, d)?),
        None => None,
    };
    match config.format {
        OutputFormat::Json => {
            let mut body = json!({
                "config": stamp(config),
                "q": format_ratio(&q),
                "p": p,
                "order": order_json,
                "norm": format_ratio(&valuation.norm),
            });
            if let Some(n) = &digits {
                body["digits"] = json!(n.digits());
                body["depth"] = json!(n.depth());
            }
            print_json(body);
        }
        OutputFormat::Csv => {
            print!("{}", csv_header(config));
            println!("q,p,order,norm");
            let order = valuation
                .order
                .map(|o| o.to_string())
                .unwrap_or_else(|| "infinity".into());
            println!("{},{p},{order},{}", format_ratio(&q), format_ratio(&valuation.norm));
        }
        OutputFormat::Plain => {
            let order = valuation
                .order
                .map(|o| o.to_string())
                .unwrap_or_else(|| "infinity".into());
            println!(
                "|{}|_{p}: order {order}, norm {}",
                format_ratio(&q),
                format_ratio(&valuation.norm)
            );
            if let Some(n) = &digits {
                println!("digits (lsb first): {:?}", n.digits());
            }
            println!("config_hash={} seed={}", config_hash(config), config.seed);
        }
    }
    Ok(ExitStatus::Success)
}

fn cmd_monna(
    config: &RunConfig,
    digits_spec: &str,
    p: u64,
    ratio: Option<&str>,
) -> Result<ExitStatus, Error> {
    let digits: Result<Vec<u64>, Error> = digits_spec
        .split(',')
        .map(|d| {
            d.trim()
                .parse::<u64>()
                .map_err(|_| Error::Domain(format!("invalid digit '{d}'")))
        })
        .collect();
    let digits = digits?;
    let ratio = match ratio {
        Some(r) => parse_ratio(r)?,
        None => monna_default_ratio(p),
    };
    let image = monna_map(&digits, p, &ratio)?;
    match config.format {
        OutputFormat::Json => print_json(json!({
            "config": stamp(config),
            "p": p,
            "ratio": format_ratio(&ratio),
            "digits": digits,
            "image": format_ratio(&image),
            "decimal": decimal_string(&image, 24),
        })),
        OutputFormat::Csv => {
            print!("{}", csv_header(config));
            println!("p,ratio,image");
            println!("{p},{},{}", format_ratio(&ratio), format_ratio(&image));
        }
        OutputFormat::Plain => {
            println!(
                "xi({digits:?}; p={p}, a={}) = {} = {}",
                format_ratio(&ratio),
                format_ratio(&image),
                decimal_string(&image, 24)
            );
            println!("config_hash={} seed={}", config_hash(config), config.seed);
        }
    }
    Ok(ExitStatus::Success)
}

fn parse_pnt_ladder(spec: &str) -> Result<Vec<f64>, Error> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| Error::Domain(format!("ladder must be lo:hi, got '{spec}'")))?;
    let lo = lo
        .parse::<f64>()
        .map_err(|_| Error::Domain(format!("invalid ladder bound '{lo}'")))?;
    let hi = hi
        .parse::<f64>()
        .map_err(|_| Error::Domain(format!("invalid ladder bound '{hi}'")))?;
    if !(lo >= 2.0 && hi > lo) {
        return Err(Error::Domain("ladder needs 2 <= lo < hi".into()));
    }
    let mut ladder = Vec::new();
    let mut y = lo;
    while y <= hi * 1.0000001 {
        ladder.push(y);
        y *= 10.0;
    }
    Ok(ladder)
}

fn cmd_pnt(config: &RunConfig, ladder_spec: &str, emit: Option<&PathBuf>) -> Result<ExitStatus, Error> {
    let ladder = parse_pnt_ladder(ladder_spec)?;
    let table = sieve(config.sieve_limit)?;
    let deviation = pnt_deviation(&ladder, &table)?;
    let mut csv = csv_header(config);
    csv.push_str("y,pi,psi,dev_pi,dev_psi\n");
    for row in &deviation.rows {
        csv.push_str(&format!(
            "{:e},{},{:.6},{:.9},{:.9}\n",
            row.y,
            row.pi,
            row.psi,
            row.dev_pi,
            row.psi_route - 1.0
        ));
    }
    csv.push_str(&format!(
        "# alpha_hat={:.6} stderr={:.6} r_squared={:.6} caveat={}\n",
        deviation.alpha_hat, deviation.alpha_stderr, deviation.r_squared, deviation.caveat
    ));
    if let Some(path) = emit {
        write_file(path, &csv)?;
    }
    match config.format {
        OutputFormat::Csv => print!("{csv}"),
        OutputFormat::Json => print_json(json!({
            "config": stamp(config),
            "rows": deviation.rows,
            "alpha_hat": deviation.alpha_hat,
            "alpha_stderr": deviation.alpha_stderr,
            "r_squared": deviation.r_squared,
            "excluded_rows": deviation.excluded_rows,
            "caveat": deviation.caveat,
        })),
        OutputFormat::Plain => {
            for row in &deviation.rows {
                println!(
                    "y={:e} pi={} psi={:.3} dev_pi={:.6} dev_psi={:.6}",
                    row.y,
                    row.pi,
                    row.psi,
                    row.dev_pi,
                    row.psi_route - 1.0
                );
            }
            println!(
                "alpha_hat={:.6} stderr={:.6} r_squared={:.6}",
                deviation.alpha_hat, deviation.alpha_stderr, deviation.r_squared
            );
            println!("caveat: {}", deviation.caveat);
            println!("config_hash={} seed={}", config_hash(config), config.seed);
        }
    }
    Ok(ExitStatus::Success)
}

fn cmd_conserve(config: &RunConfig, x: f64, a_spec: &str, p: f64) -> Result<ExitStatus, Error> {
    let a = parse_rational_or_float(a_spec)?;
    let solution = conservation_solve(x, a, p)?;
    match config.format {
        OutputFormat::Json => print_json(json!({
            "config": stamp(config),
            "x": x,
            "a": a,
            "p": p,
            "s": solution.s,
            "X": solution.deformed,
            "residual": solution.residual,
        })),
        OutputFormat::Csv => {
            print!("{}", csv_header(config));
            println!("x,a,p,s,X,residual");
            println!(
                "{x:e},{a:e},{p:e},{:.12},{:.12},{:.3e}",
                solution.s, solution.deformed, solution.residual
            );
        }
        OutputFormat::Plain => {
            println!("s = {:.12}", solution.s);
            println!("X = {:.12}", solution.deformed);
            println!("residual = {:.3e}", solution.residual);
            println!("config_hash={} seed={}", config_hash(config), config.seed);
        }
    }
    Ok(ExitStatus::Success)
}

fn cmd_cascade(config: &RunConfig, x: f64, trace_path: Option<&PathBuf>) -> Result<ExitStatus, Error> {
    let table = sieve(config.sieve_limit)?;
    let trace = inversion_cascade(x, &table)?;
    if let Some(path) = trace_path {
        let body = serde_json::to_string_pretty(&json!({
            "config": stamp(config),
            "x": x,
            "trace": trace,
        }))
        .expect("serializable");
        write_file(path, &format!("{body}\n"))?;
    }
    let final_state = *trace.states.last().expect("states start at x");
    match config.format {
        OutputFormat::Json => print_json(json!({
            "config": stamp(config),
            "x": x,
            "transitions": trace.transitions,
            "final_state": final_state,
            "accumulated": trace.accumulated,
        })),
        OutputFormat::Csv => {
            print!("{}", csv_header(config));
            println!("x,transitions,final_state,accumulated");
            println!("{x:e},{},{final_state:.12},{:.12}", trace.transitions, trace.accumulated);
        }
        OutputFormat::Plain => {
            println!("transitions = {}", trace.transitions);
            println!("final state = {final_state:.12}");
            println!("accumulated valuation = {:.12}", trace.accumulated);
            println!("config_hash={} seed={}", config_hash(config), config.seed);
        }
    }
    Ok(ExitStatus::Success)
}

fn cmd_verify_all(config: &RunConfig) -> Result<ExitStatus, Error> {
    let report = run_all_with_determinism(config)?;
    println!("# config_hash={} seed={}", config_hash(config), config.seed);
    print!("{}", report.render());
    if report.all_passed() {
        Ok(ExitStatus::Success)
    } else {
        Ok(ExitStatus::ChecksFailed)
    }
}
