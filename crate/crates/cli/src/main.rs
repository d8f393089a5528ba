//! Command-line driver: constant verification, Liapunov-Schmidt reduction,
//! branch continuation, and field export.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage error, 3 numerical
//! failure. `TETRA_BIFURC_THREADS` caps worker parallelism.

mod svg;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tetraflow::continuation::{continue_branch, fit_lambda2, newton_solve, ContinuationConfig};
use tetraflow::exactc::{
    compute_weight_table, lambda2_exact, quartic_integral, rational_to_f64, resolvent_sum,
};
use tetraflow::models::ModelSpec;
use tetraflow::reduction::reduce;
use tetraflow::sphharm::{build_grid, HarmonicIndex, Parity};
use tetraflow::spectral::{analyze, inner, synthesize, SpectralField, Transform};
use tetraflow::verify::vortex_geometry;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tetraflow",
    about = "Tetrahedrally symmetric stationary Euler flows on the sphere",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every closed-form constant against an independent quadrature
    /// recomputation and report comparisons with previously published values.
    VerifyConstants,
    /// Run the Liapunov-Schmidt reduction and print the result as JSON.
    Reduce(ModelArgs),
    /// Trace the bifurcating branch and write a CSV table.
    Branch(BranchArgs),
    /// Export the bifurcating field as gridded CSV or an SVG contour plot.
    Field(FieldArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model: polynomial, sine, sinh, or liouville.
    #[arg(long)]
    model: String,
    /// Cubic-profile parameter (polynomial model only, > 0).
    #[arg(long)]
    mu: Option<f64>,
    /// Cubic-profile parameter (polynomial model only, > 0).
    #[arg(long)]
    mu1: Option<f64>,
    /// Spectral band limit.
    #[arg(long = "L")]
    band_limit: Option<usize>,
}

#[derive(Args)]
struct BranchArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Accepted points per branch direction (two directions are traced).
    #[arg(long, default_value_t = 15)]
    steps: usize,
    /// Initial arclength step.
    #[arg(long, default_value_t = 0.02)]
    ds: f64,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FieldArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Kernel amplitude of the exported state.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Newton-correct the asymptotic predictor before exporting.
    #[arg(long)]
    solve: bool,
    /// Output format (defaults from the --out extension, else svg).
    #[arg(long)]
    format: Option<FieldFormat>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FieldFormat {
    Csv,
    Svg,
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::VerifyConstants => cmd_verify_constants(),
        Command::Reduce(args) => cmd_reduce(&args),
        Command::Branch(args) => cmd_branch(&args),
        Command::Field(args) => cmd_field(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code)
        }
    }
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("TETRA_BIFURC_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

struct CliError {
    message: String,
    exit_code: u8,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

fn usage_error(message: impl Into<String>) -> CliError {
    CliError {
        message: message.into(),
        exit_code: EXIT_USAGE,
    }
}

fn numerical_error(message: impl Into<String>) -> CliError {
    CliError {
        message: message.into(),
        exit_code: EXIT_NUMERICAL,
    }
}

impl From<tetraflow::Error> for CliError {
    fn from(e: tetraflow::Error) -> Self {
        numerical_error(e.to_string())
    }
}

fn parse_model(args: &ModelArgs) -> Result<ModelSpec, CliError> {
    match args.model.as_str() {
        "polynomial" => {
            let mu = args
                .mu
                .ok_or_else(|| usage_error("the polynomial model requires --mu"))?;
            let mu1 = args
                .mu1
                .ok_or_else(|| usage_error("the polynomial model requires --mu1"))?;
            if mu.is_nan() || mu <= 0.0 || mu1.is_nan() || mu1 <= 0.0 {
                return Err(usage_error(format!(
                    "polynomial parameters must be positive, got mu = {mu}, mu1 = {mu1}"
                )));
            }
            Ok(ModelSpec::polynomial(mu, mu1))
        }
        "sine" => Ok(ModelSpec::Sine),
        "sinh" => Ok(ModelSpec::Sinh),
        "liouville" => Ok(ModelSpec::Liouville),
        other => Err(usage_error(format!(
            "unknown model '{other}' (expected polynomial, sine, sinh, or liouville)"
        ))),
    }
}

fn write_output(out: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, contents).map_err(|e| {
            numerical_error(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .map_err(|e| numerical_error(format!("cannot write to stdout: {e}")))
        }
    }
}

/// 17 significant digits, RFC-4180-friendly.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_verify_constants() -> Result<ExitCode, CliError> {
    let table = compute_weight_table();
    let pi = std::f64::consts::PI;

    // independent quadrature recomputation of the (Y*)^2 coefficients
    let grid = build_grid(12, 1.0);
    let ystar = SpectralField::kernel(12);
    let mut sq = synthesize(&ystar, &grid);
    for v in &mut sq.values {
        *v *= *v;
    }
    let w = analyze(&sq, 12)?;

    let mut constants = Vec::new();
    let mut worst_diff: f64 = 0.0;
    for e in table.entries() {
        let quad = w.get(HarmonicIndex::new(e.l, e.m, Parity::Cosine));
        let exact = e.coefficient_f64();
        let diff = (quad - exact).abs();
        worst_diff = worst_diff.max(diff);
        constants.push(json!({
            "name": format!("c_{}_{}", e.l, e.m),
            "l": e.l,
            "m": e.m,
            "exact_c_squared_times_pi": e.q.to_string(),
            "exact": exact,
            "quadrature": quad,
            "abs_diff": diff,
        }));
    }
    let quartic = rational_to_f64(&quartic_integral(&table)) / pi;
    let quartic_quad = inner(&w, &w);
    worst_diff = worst_diff.max((quartic - quartic_quad).abs());
    constants.push(json!({
        "name": "quartic_integral",
        "exact_times_pi": quartic_integral(&table).to_string(),
        "exact": quartic,
        "quadrature": quartic_quad,
        "abs_diff": (quartic - quartic_quad).abs(),
    }));
    let resolvent = rational_to_f64(&resolvent_sum(&table)) / pi;
    let mut resolvent_quad = 0.0;
    for idx in HarmonicIndex::all(12) {
        if idx.l != 3 {
            let c = w.get(idx);
            resolvent_quad += c * c / (12.0 - (idx.l * (idx.l + 1)) as f64);
        }
    }
    worst_diff = worst_diff.max((resolvent - resolvent_quad).abs());
    constants.push(json!({
        "name": "resolvent_sum",
        "exact_times_pi": resolvent_sum(&table).to_string(),
        "exact": resolvent,
        "quadrature": resolvent_quad,
        "abs_diff": (resolvent - resolvent_quad).abs(),
    }));

    // comparison against previously published reference values
    let published = [
        ("c00_squared", "1/4", table.entry(0, 0).q.to_string()),
        ("c20", "0", table.entry(2, 0).q.to_string()),
        ("degree4_weight_sum", "189/1936", table.degree_sum(4).to_string()),
        ("degree6_weight_sum", "5111/25168", table.degree_sum(6).to_string()),
        ("resolvent_sum", "5621/3020160", resolvent_sum(&table).to_string()),
        ("quartic_integral", "315/572", quartic_integral(&table).to_string()),
    ];
    let published_json: Vec<_> = published
        .iter()
        .map(|(name, pub_v, computed)| {
            json!({
                "name": name,
                "published": pub_v,
                "computed": computed,
                "matches": *pub_v == computed.as_str(),
            })
        })
        .collect();

    let signs: Vec<(&str, i8)> = [
        ModelSpec::polynomial(3.0, 1.0),
        ModelSpec::Sine,
        ModelSpec::Sinh,
        ModelSpec::Liouville,
    ]
    .iter()
    .map(|s| (s.name(), lambda2_exact(&table, s).sign()))
    .collect();
    let signs_ok = signs.iter().map(|(_, s)| *s).collect::<Vec<_>>() == vec![-1, 1, -1, 1];
    let diffs_ok = worst_diff < 1e-12;

    let report = json!({
        "constants": constants,
        "published_reference": published_json,
        "sign_table": signs
            .iter()
            .map(|(n, s)| (n.to_string(), if *s >= 0 { "+" } else { "-" }))
            .collect::<std::collections::BTreeMap<_, _>>(),
        "worst_quadrature_diff": worst_diff,
        "all_diffs_below_1e-12": diffs_ok,
        "signs_match_expected": signs_ok,
    });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if diffs_ok && signs_ok {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("verification mismatch: diffs_ok = {diffs_ok}, signs_ok = {signs_ok}");
        Ok(ExitCode::from(EXIT_MISMATCH))
    }
}

fn cmd_reduce(args: &ModelArgs) -> Result<ExitCode, CliError> {
    let spec = parse_model(args)?;
    let band_limit = args.band_limit.unwrap_or(tetraflow::reduction::DEFAULT_BAND_LIMIT);
    if band_limit < 6 {
        return Err(usage_error("--L must be at least 6 for the reduction"));
    }
    let r = reduce(&spec, band_limit)?;
    let table = compute_weight_table();
    let exact = lambda2_exact(&table, &spec);
    let psi2: Vec<_> = HarmonicIndex::all(band_limit)
        .filter(|idx| r.psi2.get(*idx).abs() > 1e-12)
        .map(|idx| {
            json!({
                "l": idx.l,
                "m": idx.m,
                "parity": if idx.parity == Parity::Cosine { "cos" } else { "sin" },
                "coeff": r.psi2.get(idx),
            })
        })
        .collect();
    let report = json!({
        "model": spec.name(),
        "mu": args.mu,
        "mu1": args.mu1,
        "band_limit": band_limit,
        "lambda_star": r.lambda_star,
        "lambda_1": r.lambda1,
        "lambda_2": r.lambda2,
        "lambda_2_exact": exact.describe(),
        "lambda_2_exact_value": exact.to_f64(),
        "psi2": psi2,
    });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(ExitCode::SUCCESS)
}

fn cmd_branch(args: &BranchArgs) -> Result<ExitCode, CliError> {
    let spec = parse_model(&args.model)?;
    let band_limit = args.model.band_limit.unwrap_or(16);
    if band_limit < 6 {
        return Err(usage_error("--L must be at least 6"));
    }
    let config = ContinuationConfig {
        band_limit,
        ds: args.ds,
        max_steps: args.steps,
        ..ContinuationConfig::default()
    };
    if config.max_steps == 0 || config.ds <= 0.0 {
        return Err(usage_error("--steps and --ds must be positive"));
    }
    let reduction = reduce(&spec, config.band_limit)?;
    let pair = continue_branch(&spec, &config)?;

    let mut csv = String::from("step,lambda,epsilon,residual_norm,newton_iters,even_part_norm\n");
    for (step, p) in pair.plus.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            step as i64 + 1,
            fmt17(p.lambda),
            fmt17(p.epsilon),
            fmt17(p.residual_norm),
            p.newton_iters,
            fmt17(p.psi.equator_even_norm()),
        ));
    }
    for (step, p) in pair.minus.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            -(step as i64 + 1),
            fmt17(p.lambda),
            fmt17(p.epsilon),
            fmt17(p.residual_norm),
            p.newton_iters,
            fmt17(p.psi.equator_even_norm()),
        ));
    }
    let combined: Vec<_> = pair.plus.iter().chain(&pair.minus).cloned().collect();
    match fit_lambda2(&combined, reduction.lambda_star) {
        Ok(fit) => csv.push_str(&format!(
            "# fitted_lambda2 = {}, reduction_lambda2 = {}\n",
            fmt17(fit),
            fmt17(reduction.lambda2)
        )),
        Err(e) => csv.push_str(&format!(
            "# fitted_lambda2 unavailable ({e}), reduction_lambda2 = {}\n",
            fmt17(reduction.lambda2)
        )),
    }
    if pair.degenerate_seed {
        csv.push_str("# warning: |lambda_2| below 1e-8, fell back to kernel-amplitude stepping\n");
    }
    write_output(&args.out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_field(args: &FieldArgs) -> Result<ExitCode, CliError> {
    let spec = parse_model(&args.model)?;
    let band_limit = args.model.band_limit.unwrap_or(16);
    if band_limit < 6 {
        return Err(usage_error("--L must be at least 6"));
    }
    let eps = args.epsilon;
    let reduction = reduce(&spec, band_limit)?;
    let lambda = reduction.lambda_star + reduction.lambda2 * eps * eps;

    let mut psi = SpectralField::zeros(band_limit);
    psi.add_scaled(eps, &SpectralField::kernel(band_limit));
    psi.add_scaled(eps * eps, &reduction.psi2);
    let (psi, lambda) = if args.solve {
        let config = ContinuationConfig {
            band_limit,
            ..ContinuationConfig::default()
        };
        let point = newton_solve(&spec, lambda, &psi, &config)?;
        (point.psi, point.lambda)
    } else {
        (psi, lambda)
    };

    let format = args.format.unwrap_or_else(|| {
        match args.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("csv") => FieldFormat::Csv,
            _ => FieldFormat::Svg,
        }
    });
    let grid = build_grid(band_limit, 2.0);
    let field = Transform::new(&grid, band_limit)?.synthesize(&psi);
    match format {
        FieldFormat::Csv => {
            let mut csv = String::from("theta,phi,value\n");
            for i in 0..grid.n_theta {
                let theta = grid.theta(i);
                for (j, &phi) in grid.phi_nodes.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{}\n",
                        fmt17(theta),
                        fmt17(phi),
                        fmt17(field.value(i, j))
                    ));
                }
            }
            write_output(&args.out, &csv)?;
        }
        FieldFormat::Svg => {
            let extrema = if eps == 0.0 { Vec::new() } else { vortex_geometry(&psi) };
            let title = format!(
                "{} model: stationary non-zonal flow on the sphere",
                spec.name()
            );
            let state = if args.solve { "Newton-corrected" } else { "asymptotic predictor" };
            let subtitle = format!(
                "lambda = {lambda:.8}, epsilon = {eps}, band limit {band_limit} ({state})"
            );
            let doc = svg::render(&field, &extrema, &title, &subtitle);
            write_output(&args.out, &doc)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
