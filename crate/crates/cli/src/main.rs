mod manifest;

use std::fmt::Display;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use mukai_core::io::{self, CertJson, LiftJson, MatrixJson, SliceJson, StartPairJson};
use mukai_core::lifting::{self, LiftOptions};
use mukai_core::random::{self, stage};
use mukai_core::selfdual::{self, Config, SkewParams, DIM};
use mukai_core::slicing::{self, CensusOptions, LinearSection, SliceOptions, DEGREE};
use mukai_core::tracker::StepInfo;
use mukai_core::{Execution, C64};

use manifest::RunManifest;

const HEARTBEAT: Duration = Duration::from_secs(5);

#[derive(Parser, Debug)]
#[command(name = "mukai", version, about = "Slice Gr(2,6) and lift self-dual configurations of 14 points in P^6")]
struct Cli {
    /// Worker threads for data-parallel stages.
    #[arg(long, global = true, env = "MUKAI_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Intersect Gr(2,6) with a codimension-8 linear space and recover the configuration.
    Slice(SliceArgs),
    /// Histogram real intersection counts over random real sections.
    Census(CensusArgs),
    /// Report self-duality, linear generality and stability of a configuration.
    Check(CheckArgs),
    /// Compute the skew normal form of a self-dual configuration.
    Snf(SnfArgs),
    /// Find a linear embedding mapping a self-dual configuration into Gr(2,6).
    Lift(LiftArgs),
    /// Build and persist a start pair for `lift`.
    MakeStartPair(MakeStartPairArgs),
}

#[derive(Args, Debug)]
struct SliceArgs {
    /// 8x15 section matrix; `file.json#field` selects a field.
    #[arg(long)]
    input: Option<String>,
    /// Seeds the start system and, without --input, the random section.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bound on the least-squares recovery residual.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CensusArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// A point is real when all imaginary parts are below this.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// 7x14 configuration; `file.json#field` selects a field.
    #[arg(long, alias = "input")]
    gamma: String,
    /// Bound on the scaled witness residual.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SnfArgs {
    #[arg(long, alias = "input")]
    gamma: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LiftArgs {
    #[arg(long, alias = "input")]
    gamma: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start pair written by `make-start-pair`; built from --seed if absent.
    #[arg(long)]
    start_cache: Option<String>,
    /// Bound on the verified relation residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Track along a random quadratic detour instead of a straight segment.
    #[arg(long)]
    gamma_arc: bool,
    /// Track a random square subsystem instead of Gauss-Newton.
    #[arg(long)]
    squared_up: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MakeStartPairArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// A failure with its exit code: 2 for domain failures, 3 for I/O and parsing.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

type CmdResult = Result<(), Failure>;

fn domain(stage: &'static str) -> impl FnOnce(mukai_core::Error) -> Failure {
    move |e| Failure {
        code: 2,
        message: format!("{stage}: {e}"),
    }
}

fn io_err(what: impl Display) -> impl FnOnce(String) -> Failure {
    move |e| Failure {
        code: 3,
        message: format!("{what}: {e}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads(cli.threads) {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    let result = match cli.command {
        Command::Slice(a) => cmd_slice(a, cli.threads),
        Command::Census(a) => cmd_census(a, cli.threads),
        Command::Check(a) => cmd_check(a, cli.threads),
        Command::Snf(a) => cmd_snf(a, cli.threads),
        Command::Lift(a) => cmd_lift(a, cli.threads),
        Command::MakeStartPair(a) => cmd_make_start_pair(a, cli.threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) -> CmdResult {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| io_err("thread pool")(e.to_string()))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: Option<usize>) -> CmdResult {
    Ok(())
}

fn execution() -> Execution {
    if cfg!(feature = "parallel") {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

// ---------------------------------------------------------------------------
// input and output

/// Reads `path` or `path#a.b.0`, returning the selected value and the raw file bytes.
fn read_json<T: DeserializeOwned>(source: &str) -> Result<(T, PathBuf, Vec<u8>), Failure> {
    let (path, field) = match source.split_once('#') {
        Some((p, f)) => (PathBuf::from(p), Some(f)),
        None => (PathBuf::from(source), None),
    };
    let bytes = fs::read(&path).map_err(|e| io_err(path.display())(e.to_string()))?;
    let mut value: Value = serde_json::from_slice(&bytes).map_err(|e| io_err(path.display())(e.to_string()))?;
    if let Some(field) = field {
        for key in field.split('.').filter(|k| !k.is_empty()) {
            let next = match &mut value {
                Value::Object(map) => map.remove(key),
                Value::Array(items) => key.parse::<usize>().ok().filter(|&i| i < items.len()).map(|i| items.swap_remove(i)),
                _ => None,
            };
            value = next.ok_or_else(|| io_err(source)(format!("no field `{key}`")))?;
        }
    }
    let parsed = serde_json::from_value(value).map_err(|e| io_err(source)(e.to_string()))?;
    Ok((parsed, path, bytes))
}

fn read_config(source: &str, manifest: &mut RunManifest) -> Result<Config, Failure> {
    let (m, path, bytes): (MatrixJson, _, _) = read_json(source)?;
    manifest.input(&path, &bytes);
    m.to_config().map_err(|e| io_err(source)(e.to_string()))
}

fn write_file(path: &Path, bytes: &[u8], manifest: &mut RunManifest) -> CmdResult {
    fs::write(path, bytes).map_err(|e| io_err(path.display())(e.to_string()))?;
    manifest.output(path, bytes);
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T, manifest: &mut RunManifest) -> CmdResult {
    let text = io::to_string(value).map_err(|e| io_err(path.display())(e.to_string()))?;
    write_file(path, text.as_bytes(), manifest)
}

/// Writes the manifest sidecar of `out`, or does nothing without an output.
fn finish(out: Option<&Path>, mut manifest: RunManifest) -> CmdResult {
    manifest.end_stage();
    let Some(out) = out else { return Ok(()) };
    let path = manifest::sidecar(out);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| io_err(path.display())(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| io_err(path.display())(e.to_string()))
}

fn fmt_complex(z: C64) -> String {
    // below the printed precision; avoids "-0.000000"
    let clean = |x: f64| if x.abs() < 5e-7 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    if im.abs() <= 1e-9 * re.abs().max(1.0) {
        format!("{re:.6}")
    } else {
        format!("{re:.6}{im:+.6}i")
    }
}

// ---------------------------------------------------------------------------
// commands

fn cmd_slice(args: SliceArgs, threads: Option<usize>) -> CmdResult {
    let mut m = RunManifest::new("slice", Some(args.seed), threads);
    let mut opts = SliceOptions {
        exec: execution(),
        ..Default::default()
    };
    if let Some(tol) = args.tol {
        opts.recovery_tol = tol;
        m.option("tol", tol);
    }
    m.sub_seed("slice_start", random::sub_seed(args.seed, stage::SLICE_START));
    m.stage("read");
    let section = match &args.input {
        Some(source) => {
            let (a, path, bytes): (MatrixJson, _, _) = read_json(source)?;
            m.input(&path, &bytes);
            let a = a.to_cmat().map_err(|e| io_err(source)(e.to_string()))?;
            LinearSection::new(a).map_err(domain("section"))?
        }
        None => {
            m.sub_seed("slice_target", random::sub_seed(args.seed, stage::SLICE_TARGET));
            LinearSection::random_complex(&mut random::stream(args.seed, stage::SLICE_TARGET))
        }
    };
    m.stage("slice");
    let result = slicing::slice_seeded(&section, args.seed, &opts).map_err(domain("slice"))?;
    m.end_stage();
    println!(
        "slice: {} points, max relation residual {:e}, recovery residual {:e}",
        result.chart_points.len(),
        result.max_relation_residual,
        result.recovery_residual
    );
    if let Some(out) = &args.out {
        write_json(out, &SliceJson::from(&result), &mut m)?;
    }
    finish(args.out.as_deref(), m)
}

fn census_csv(table: &slicing::CensusTable) -> String {
    let mut s = String::from("real_count,count,proportion\n");
    for r in (0..=DEGREE).step_by(2) {
        s += &format!("{r},{},{}\n", table.histogram[r], table.proportion(r));
    }
    let failures = table.failures as f64 / table.samples as f64;
    s += &format!("failures,{},{failures}\n", table.failures);
    s
}

fn cmd_census(args: CensusArgs, threads: Option<usize>) -> CmdResult {
    let samples = args.samples as usize;
    let mut m = RunManifest::new("census", Some(args.seed), threads);
    m.option("samples", samples);
    let mut opts = CensusOptions::default();
    opts.slice.exec = execution();
    if let Some(tol) = args.tol {
        opts.real_tol = tol;
        m.option("tol", tol);
    }
    m.sub_seed("census_start", random::sub_seed(args.seed, stage::CENSUS_START));
    m.stage("start");
    let cache = slicing::prepare_start(&opts.slice, &mut random::stream(args.seed, stage::CENSUS_START))
        .map_err(domain("census start system"))?;
    m.stage("census");
    let chunk = 100;
    let mut outcomes = Vec::with_capacity(samples);
    let t0 = Instant::now();
    while outcomes.len() < samples {
        let base = outcomes.len();
        let n = chunk.min(samples - base);
        outcomes.extend(
            opts.slice
                .exec
                .map_indexed(n, |k| slicing::run_census_sample(args.seed, base + k, &cache, &opts)),
        );
        eprintln!("census: {}/{samples} samples, {:.1} s", outcomes.len(), t0.elapsed().as_secs_f64());
    }
    let table = slicing::tally(&outcomes);
    m.end_stage();
    let csv = census_csv(&table);
    match &args.out {
        Some(out) => write_file(out, csv.as_bytes(), &mut m)?,
        None => print!("{csv}"),
    }
    finish(args.out.as_deref(), m)
}

#[derive(Serialize)]
struct CheckReport {
    self_dual: bool,
    witness: Option<Vec<io::Pair>>,
    witness_residual: Option<f64>,
    linearly_general: bool,
    semistable: bool,
    stable: bool,
}

fn cmd_check(args: CheckArgs, threads: Option<usize>) -> CmdResult {
    let mut m = RunManifest::new("check", None, threads);
    m.option("tol", args.tol);
    m.stage("read");
    let gamma = read_config(&args.gamma, &mut m)?;
    m.stage("check");
    let scale = gamma.matrix().max_abs().powi(2);
    let witness = selfdual::self_dual_witness(&gamma);
    let residual = witness
        .as_ref()
        .ok()
        .map(|w| selfdual::witness_residual(&gamma, w) / scale);
    let self_dual = residual.is_some_and(|r| r < args.tol);
    let general = selfdual::is_linearly_general(&gamma);
    let stab = selfdual::stability(&gamma);
    m.end_stage();

    match (&witness, residual) {
        (Ok(w), Some(r)) => {
            println!("witness residual: {r:e}");
            let entries: Vec<String> = w.lambda.iter().map(|&z| fmt_complex(z)).collect();
            println!("witness: [{}]", entries.join(", "));
        }
        (Err(e), _) => println!("witness: none ({e})"),
        _ => {}
    }
    println!("linearly general: {general}");
    println!("semistable: {}, stable: {}", stab.semistable, stab.stable);
    println!("{}", if self_dual { "self-dual" } else { "not self-dual" });

    if let Some(out) = &args.out {
        let report = CheckReport {
            self_dual,
            witness: witness.as_ref().ok().map(|w| io::pairs(&w.lambda)),
            witness_residual: residual,
            linearly_general: general,
            semistable: stab.semistable,
            stable: stab.stable,
        };
        write_json(out, &report, &mut m)?;
    }
    finish(args.out.as_deref(), m)?;
    if self_dual {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: "check: configuration is not self-dual".into(),
        })
    }
}

#[derive(Serialize)]
struct SnfOutput {
    s: Vec<io::Pair>,
    perm: Vec<usize>,
    reconstruction_error: f64,
    cert: CertJson,
}

fn print_skew(s: &SkewParams) {
    let mat = s.to_matrix();
    for r in 0..DIM {
        let row: Vec<String> = (0..DIM).map(|c| fmt_complex(mat[(r, c)])).collect();
        println!("  [{}]", row.join(", "));
    }
}

fn cmd_snf(args: SnfArgs, threads: Option<usize>) -> CmdResult {
    let mut m = RunManifest::new("snf", Some(args.seed), threads);
    m.sub_seed("snf_retry", random::sub_seed(args.seed, stage::SNF_RETRY));
    m.stage("read");
    let gamma = read_config(&args.gamma, &mut m)?;
    m.stage("snf");
    let snf = selfdual::skew_normal_form_retrying(
        &gamma,
        &Default::default(),
        LiftOptions::default().snf_retries,
        &mut random::stream(args.seed, stage::SNF_RETRY),
    )
    .map_err(domain("skew normal form"))?;
    m.end_stage();
    let err = snf.cert.reconstruction_error(&gamma.permuted(&snf.perm));
    println!("S =");
    print_skew(&snf.s);
    println!("column order: {:?}", snf.perm);
    println!("reconstruction error: {err:e}");
    println!("orthogonality error: {:e}", snf.cert.orthogonality_error());
    if let Some(out) = &args.out {
        let report = SnfOutput {
            s: io::skew_to_json(&snf.s),
            perm: snf.perm.clone(),
            reconstruction_error: err,
            cert: (&snf.cert).into(),
        };
        write_json(out, &report, &mut m)?;
    }
    finish(args.out.as_deref(), m)
}

#[derive(Serialize)]
struct LiftOutput {
    seed: u64,
    start_seed: u64,
    version: &'static str,
    #[serde(flatten)]
    lift: LiftJson,
}

fn lift_options(seed: u64) -> LiftOptions {
    LiftOptions {
        seed,
        ..Default::default()
    }
}

fn slice_options() -> SliceOptions {
    SliceOptions {
        exec: execution(),
        ..Default::default()
    }
}

fn cmd_lift(args: LiftArgs, threads: Option<usize>) -> CmdResult {
    let mut m = RunManifest::new("lift", Some(args.seed), threads);
    let mut opts = lift_options(args.seed);
    opts.gamma_arc = args.gamma_arc;
    opts.squared_up = args.squared_up;
    if let Some(tol) = args.tol {
        opts.lift_tol = tol;
        m.option("tol", tol);
    }
    m.option("gamma_arc", args.gamma_arc);
    m.option("squared_up", args.squared_up);
    for (name, id) in [("snf_retry", stage::SNF_RETRY), ("gamma_arc", stage::GAMMA_ARC), ("squared_up", stage::SQUARED_UP)] {
        m.sub_seed(name, random::sub_seed(args.seed, id));
    }
    m.stage("read");
    let gamma = read_config(&args.gamma, &mut m)?;
    let problem = match &args.start_cache {
        Some(source) => {
            let (pair, path, bytes): (StartPairJson, _, _) = read_json(source)?;
            m.input(&path, &bytes);
            pair.problem.to_problem().map_err(|e| io_err(source)(e.to_string()))?
        }
        None => {
            m.stage("start pair");
            eprintln!("lift: building start pair from seed {}", args.seed);
            lifting::make_start_pair(args.seed, &opts, &slice_options())
                .map_err(domain("start pair"))?
                .problem
        }
    };
    m.option("start_seed", problem.seed);

    m.stage("track");
    let mut last = Instant::now();
    let mut heartbeat = |info: &StepInfo| {
        if last.elapsed() >= HEARTBEAT {
            last = Instant::now();
            eprintln!(
                "lift: u = {:.6}, step = {:.3e}, corrector iterations = {}, steps = {}",
                info.u, info.step, info.corrector_iters, info.steps_taken
            );
        }
    };
    let result = lifting::lift_observed(&gamma, &problem, &opts, &mut heartbeat).map_err(domain("lift"))?;
    m.end_stage();

    println!(
        "steps: {} accepted, {} rejected",
        result.path_stats.steps_taken, result.path_stats.steps_rejected
    );
    println!("rank of L_hat: {}", result.report.rank);
    println!("max relation residual: {:e}", result.report.max_residual);
    let _ = std::io::stdout().flush();
    if let Some(out) = &args.out {
        let output = LiftOutput {
            seed: args.seed,
            start_seed: problem.seed,
            version: env!("CARGO_PKG_VERSION"),
            lift: (&result).into(),
        };
        write_json(out, &output, &mut m)?;
    }
    finish(args.out.as_deref(), m)
}

fn cmd_make_start_pair(args: MakeStartPairArgs, threads: Option<usize>) -> CmdResult {
    let mut m = RunManifest::new("make-start-pair", Some(args.seed), threads);
    for (name, id) in [
        ("slice_start", stage::SLICE_START),
        ("lift_start", stage::LIFT_START),
        ("lift_directions", stage::LIFT_DIRECTIONS),
    ] {
        m.sub_seed(name, random::sub_seed(args.seed, id));
    }
    m.stage("start pair");
    let pair = lifting::make_start_pair(args.seed, &lift_options(args.seed), &slice_options())
        .map_err(domain("start pair"))?;
    m.end_stage();
    println!("start residual: {:e}", pair.start_residual);
    write_json(&args.out, &StartPairJson::from(&pair), &mut m)?;
    finish(Some(&args.out), m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_even_rows_and_failures() {
        let mut histogram = [0; DEGREE + 1];
        histogram[4] = 3;
        histogram[2] = 1;
        let table = slicing::CensusTable {
            samples: 5,
            histogram,
            failures: 1,
        };
        let csv = census_csv(&table);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "real_count,count,proportion");
        assert_eq!(lines.len(), 1 + 8 + 1);
        assert_eq!(lines[3], "4,3,0.6");
        assert_eq!(lines[9], "failures,1,0.2");
    }

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(manifest::sidecar(Path::new("a/r.json")), PathBuf::from("a/r.json.manifest.json"));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
