mod cache;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use killrange_core::exactness::{cw_structure, describe, nonexactness_witness, verdict, ExactnessError};
use killrange_core::filtration::filtration_report;
use killrange_core::harness::{run_suite, DEFAULT_MAX_DEGREE};
use killrange_core::spaces::{parse_matrix, PointFrame, SpaceSpec};

use cache::{Cache, Entry};

/// Potential search degree for `witness`.
const WITNESS_DEGREE: u32 = 2;

#[derive(Parser)]
#[command(name = "killrange", version, about = "Exactness of the Killing connection on locally symmetric spaces")]
struct Cli {
    /// Write the JSON result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated seeds for `verify`
    #[arg(long, global = true, value_delimiter = ',', default_value = "1,2,3")]
    seeds: Vec<u64>,
    /// Degree bound of the random test fields for `verify`
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DEGREE)]
    degree: u32,
    /// Neither read nor write the result cache
    #[arg(long, global = true)]
    no_cache: bool,
    /// Cache directory (default: $KILLRANGE_CACHE, else ~/.cache/killrange)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor classification and point data
    Describe { spec: String },
    /// Curvature filtration E_k and the bracket filtration h_k
    Filtration { spec: String },
    /// Exactness verdict
    Exactness { spec: String },
    /// Explicit non-exactness witness
    Witness { spec: String },
    /// Run the identity suite
    Verify { spec: String },
    /// Cahen-Wallach structure check for a symmetric matrix Q, e.g. "[[1,0],[0,2]]"
    Cw { q: String },
}

/// A failure that maps to an exit code and a JSON error body.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

/// Inline JSON if it starts with `{` or `[`, otherwise a file path.
fn read_json(arg: &str) -> Result<Value, Failure> {
    let t = arg.trim_start();
    let text = if t.starts_with('{') || t.starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| usage(format!("cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| usage(format!("malformed JSON in {arg}: {e}")))
}

fn load_spec(arg: &str) -> Result<SpaceSpec, Failure> {
    let spec = SpaceSpec::from_json(&read_json(arg)?).map_err(|e| usage(e.to_string()))?;
    Ok(spec.canonical())
}

fn cache_dir(cli: &Cli) -> PathBuf {
    if let Some(d) = &cli.cache_dir {
        return d.clone();
    }
    if let Some(d) = std::env::var_os("KILLRANGE_CACHE").filter(|d| !d.is_empty()) {
        return PathBuf::from(d);
    }
    match std::env::var_os("HOME") {
        Some(h) => Path::new(&h).join(".cache").join("killrange"),
        None => PathBuf::from(".killrange-cache"),
    }
}

fn validate_paths(cli: &Cli) -> Result<(), Failure> {
    if let Some(out) = &cli.out {
        let parent = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(usage(format!("output directory {} does not exist", parent.display())));
        }
    }
    if cli.degree > DEFAULT_MAX_DEGREE {
        return Err(usage(format!("--degree {} exceeds the maximum {DEFAULT_MAX_DEGREE}", cli.degree)));
    }
    if cli.seeds.is_empty() {
        return Err(usage("--seeds must list at least one seed"));
    }
    Ok(())
}

fn exactness_failure(e: ExactnessError) -> Failure {
    usage(e.to_string())
}

/// Parse and canonicalise the input, then answer from the cache or compute `(exit, result)`.
fn run(cli: &Cli) -> Result<(u8, Value), Failure> {
    let (name, input, options): (&str, Value, Value) = match &cli.command {
        Command::Describe { spec } => ("describe", load_spec(spec)?.to_json(), json!({})),
        Command::Filtration { spec } => ("filtration", load_spec(spec)?.to_json(), json!({})),
        Command::Exactness { spec } => ("exactness", load_spec(spec)?.to_json(), json!({})),
        Command::Witness { spec } => ("witness", load_spec(spec)?.to_json(), json!({"degree": WITNESS_DEGREE})),
        Command::Verify { spec } => (
            "verify",
            load_spec(spec)?.to_json(),
            json!({"seeds": cli.seeds, "degree": cli.degree}),
        ),
        Command::Cw { q } => {
            let q = parse_matrix(&read_json(q)?).map_err(|e| usage(e.to_string()))?;
            let spec = SpaceSpec::CahenWallach { q };
            spec.validate().map_err(|e| usage(e.to_string()))?;
            ("cw", spec.to_json(), json!({}))
        }
    };
    let cache = if cli.no_cache {
        None
    } else {
        Some(Cache::open(&cache_dir(cli)).map_err(|e| usage(format!("{e:#}")))?)
    };
    let key = Cache::key(name, &input, &options);
    if let Some(hit) = cache.as_ref().and_then(|c| c.get(&key)) {
        return Ok((hit.exit, hit.result));
    }
    let spec = SpaceSpec::from_json(&input).expect("canonical spec reparses");
    let (exit, result) = compute(name, &spec, cli)?;
    if let Some(c) = &cache {
        // A cache write failure only costs a recomputation next time.
        if let Err(e) = c.put(&key, &Entry { exit, result: result.clone() }) {
            eprintln!("warning: cache write failed: {e:#}");
        }
    }
    Ok((exit, result))
}

fn compute(name: &str, spec: &SpaceSpec, cli: &Cli) -> Result<(u8, Value), Failure> {
    Ok(match name {
        "describe" => (0, describe(spec).map_err(exactness_failure)?),
        "filtration" => {
            let pf = PointFrame::build(spec).map_err(|e| usage(e.to_string()))?;
            (0, json!({"spec": spec.to_json(), "filtration": filtration_report(&pf)}))
        }
        "exactness" => {
            let mut v = verdict(spec).map_err(exactness_failure)?.to_json();
            v["spec"] = spec.to_json();
            (0, v)
        }
        "witness" => {
            let w = nonexactness_witness(spec, WITNESS_DEGREE).map_err(exactness_failure)?;
            let mut v = w.to_json();
            v["spec"] = spec.to_json();
            (if w.certified() { 0 } else { 1 }, v)
        }
        "verify" => {
            let r = run_suite(spec, &cli.seeds, cli.degree).map_err(|e| usage(e.to_string()))?;
            (if r.pass { 0 } else { 1 }, r.to_json())
        }
        "cw" => {
            let SpaceSpec::CahenWallach { q } = spec else { unreachable!("cw input is a Cahen-Wallach spec") };
            (0, cw_structure(q).map_err(exactness_failure)?.to_json())
        }
        other => unreachable!("unknown command {other}"),
    })
}

fn emit(cli: &Cli, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
    match &cli.out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = validate_paths(&cli).and_then(|()| run(&cli));
    let (code, body) = match outcome {
        Ok((code, v)) => (code, v),
        Err(f) => (f.code, json!({"error": f.message, "exit": f.code})),
    };
    if let Err(f) = emit(&cli, &body) {
        eprintln!("{}", f.message);
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
