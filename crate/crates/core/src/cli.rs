//! Command-line drivers.
//!
//! Every subcommand reads a panel (or a rate triple), runs the relevant
//! estimators, and emits a report in JSON or flattened CSV, optionally with an
//! SVG chart. Reports embed the invoked command line, the tool version, and an
//! FNV-1a digest of the input bytes, and are rendered through deterministic
//! serializers — running the same command on the same file twice produces
//! byte-identical output.
//!
//! Exit codes: 0 on success, 1 when a fit fails to converge or the data is
//! rejected, 2 for command-line usage errors. `shares` and `report` treat a
//! degenerate logistic branch as a finding to report, not a failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::growth::{self, ExpFit, LogisticFit, TripleFit};
use crate::invariants::{
    beta_given_alpha, classify_returns, crs_elasticities, eval_cobb_douglas,
    eval_logistic_production, eval_s_shaped, general_invariant_value, logistic_invariant_value,
    orthogonality_residual, psi_forward, psi_inverse, pushforward_field,
    solve_production_from_invariant, CobbDouglas, LogisticProduction, ReturnsClassification,
    SShaped,
};
use crate::lsq::NlsOptions;
use crate::plot::{emit_plot, PlotSeries};
use crate::prodfit::{self, CdMode};
use crate::report::{fmt_sig, fnv1a64, RunReport, Value};
use crate::series::{self, EconPanel, SeriesKind};
use crate::shares::{self, ConstancySummary, Generator, JetPoint, DEFAULT_SHARE_STEP};

#[derive(Parser)]
#[command(
    name = "bowley",
    version,
    about = "Growth-model fits, production-surface calibration, and factor-share diagnostics for annual labor/capital/production panels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit exponential growth to each panel series
    FitExp(FitExpArgs),
    /// Fit logistic growth to each panel series
    FitLogistic(FitLogisticArgs),
    /// Calibrate a Cobb-Douglas production surface
    FitCd(FitCdArgs),
    /// Calibrate the bounded logistic production surface
    FitLpf(FitLpfArgs),
    /// Output elasticities implied by growth rates under constant returns
    Elasticities(RatesArgs),
    /// Classify which returns to scale the growth rates admit
    Classify(RatesArgs),
    /// Factor shares along the fitted flows, by every available route
    Shares(SharesArgs),
    /// Self-check the flow/invariant identities with randomized trials
    VerifyInvariants(VerifyArgs),
    /// Full pipeline: growth fits, surfaces, elasticities, and shares
    Report(ReportArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Panel CSV with header `year,labor,capital,production`
    #[arg(long)]
    input: PathBuf,
    /// Year mapped to t = 0 (default: first year in the file)
    #[arg(long)]
    origin_year: Option<i32>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also render an SVG chart to this path
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct FitExpArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FitLogisticArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Starting point `b,x0,N` applied to every series (default: self-start)
    #[arg(long, value_name = "B,X0,N", value_parser = parse_triple)]
    init: Option<Triple>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FitCdArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Pin the labor elasticity; the capital one then follows from the
    /// fitted growth rates
    #[arg(long, conflicts_with = "fix_crs")]
    alpha: Option<f64>,
    /// Constrain alpha + beta = 1
    #[arg(long)]
    fix_crs: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FitLpfArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct RatesArgs {
    /// Growth-rate triple `b1,b2,b3` for labor, capital, production
    #[arg(long, value_name = "B1,B2,B3", value_parser = parse_triple,
          conflicts_with = "input", required_unless_present = "input")]
    b: Option<Triple>,
    /// Panel CSV to estimate the rates from instead
    #[arg(long)]
    input: Option<PathBuf>,
    /// Year mapped to t = 0 (default: first year in the file)
    #[arg(long)]
    origin_year: Option<i32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SharesArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Optional panel CSV for the data-driven checks
    #[arg(long)]
    input: Option<PathBuf>,
    /// Year mapped to t = 0 (default: first year in the file)
    #[arg(long)]
    origin_year: Option<i32>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Additionally calibrate a Cobb-Douglas with this pinned labor elasticity
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Debug)]
struct Triple([f64; 3]);

fn parse_triple(s: &str) -> std::result::Result<Triple, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    }
    let mut out = [0.0f64; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a number", part.trim()))?;
    }
    Ok(Triple(out))
}

/// Run the tool on a full argv (program name included) and return the exit
/// code: 0 success, 1 data/convergence failure, 2 usage error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let echo = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command, &echo) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command, echo: &str) -> Result<i32> {
    match command {
        Command::FitExp(args) => cmd_fit_exp(args, echo),
        Command::FitLogistic(args) => cmd_fit_logistic(args, echo),
        Command::FitCd(args) => cmd_fit_cd(args, echo),
        Command::FitLpf(args) => cmd_fit_lpf(args, echo),
        Command::Elasticities(args) => cmd_elasticities(args, echo),
        Command::Classify(args) => cmd_classify(args, echo),
        Command::Shares(args) => cmd_shares(args, echo),
        Command::VerifyInvariants(args) => cmd_verify(args),
        Command::Report(args) => cmd_report(args, echo),
    }
}

// ---------------------------------------------------------------------------
// shared plumbing

fn load_panel(path: &Path, origin_year: Option<i32>) -> Result<(EconPanel, String)> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let panel = series::ingest_csv(&text, origin_year)?;
    Ok((panel, text))
}

fn provenance(echo: &str, input: Option<(&Path, &EconPanel, &str)>) -> Value {
    let mut v = Value::map();
    v.set("tool_version", Value::from(crate::VERSION));
    v.set("command", Value::from(echo));
    if let Some((path, panel, raw)) = input {
        let mut inp = Value::map();
        inp.set("path", Value::from(path.display().to_string()));
        inp.set("rows", Value::from(panel.len()));
        inp.set("origin_year", Value::Int(i64::from(panel.origin_year)));
        inp.set(
            "digest",
            Value::from(format!("fnv1a:{:016x}", fnv1a64(raw.as_bytes()))),
        );
        v.set("input", inp);
    }
    v
}

fn write_report(report: &RunReport, out: &OutputArgs) -> Result<()> {
    let text = match out.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match &out.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_plot(svg: &str, path: &Path) -> Result<()> {
    fs::write(path, svg).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn exp_fit_value(fit: &ExpFit) -> Value {
    let mut v = Value::map();
    v.set("b", Value::from(fit.b));
    v.set("x0", Value::from(fit.x0));
    v.set("c", Value::from(fit.c));
    v.set("rss_log", Value::from(fit.rss_log));
    v.set("rss_raw", Value::from(fit.rss_raw));
    v
}

fn logistic_fit_value(fit: &LogisticFit) -> Value {
    let mut v = Value::map();
    v.set("b", Value::from(fit.b));
    v.set("x0", Value::from(fit.x0));
    v.set("n", Value::from(fit.n));
    v.set("rss", Value::from(fit.rss));
    v.set("converged", Value::from(fit.converged));
    v.set("near_degenerate", Value::from(fit.near_degenerate));
    v
}

fn cd_value(model: &CobbDouglas) -> Value {
    let mut v = Value::map();
    v.set("scale", Value::from(model.scale));
    v.set("alpha", Value::from(model.alpha));
    v.set("beta", Value::from(model.beta));
    v
}

fn lp_value(model: &LogisticProduction) -> Value {
    let mut v = Value::map();
    v.set("n_l", Value::from(model.n_l));
    v.set("n_k", Value::from(model.n_k));
    v.set("n_y", Value::from(model.n_y));
    v.set("c", Value::from(model.c));
    v.set("alpha", Value::from(model.alpha));
    v.set("beta", Value::from(model.beta));
    v
}

fn rates_value(b: [f64; 3]) -> Value {
    let mut v = Value::map();
    v.set("labor", Value::from(b[0]));
    v.set("capital", Value::from(b[1]));
    v.set("production", Value::from(b[2]));
    v
}

fn summary_value(s: &ConstancySummary) -> Value {
    let mut v = Value::map();
    v.set("mean", Value::from(s.mean));
    v.set("max_abs_deviation", Value::from(s.max_abs_deviation));
    v.set("relative_range", Value::from(s.relative_range));
    v
}

fn share_pair(s_l: f64, s_k: f64) -> Value {
    let mut v = Value::map();
    v.set("s_l", Value::from(s_l));
    v.set("s_k", Value::from(s_k));
    v
}

/// Observed-versus-fitted chart for all three series against calendar years.
fn plot_panel_fits<F>(panel: &EconPanel, fitted: F, title: &str) -> Result<String>
where
    F: Fn(SeriesKind, f64) -> f64,
{
    let xs: Vec<f64> = panel.years.iter().map(|&y| f64::from(y)).collect();
    let ts = panel.times();
    let mut curves = Vec::with_capacity(6);
    for kind in SeriesKind::ALL {
        curves.push(PlotSeries::new(
            &format!("{} observed", kind.name()),
            xs.clone(),
            panel.series(kind).to_vec(),
        )?);
        curves.push(PlotSeries::new(
            &format!("{} fitted", kind.name()),
            xs.clone(),
            ts.iter().map(|&t| fitted(kind, t)).collect(),
        )?);
    }
    emit_plot(&curves, title, "year", "index value")
}

fn plot_production_fit(panel: &EconPanel, fitted: &[f64], label: &str, title: &str) -> Result<String> {
    let xs: Vec<f64> = panel.years.iter().map(|&y| f64::from(y)).collect();
    let curves = vec![
        PlotSeries::new("production observed", xs.clone(), panel.production.clone())?,
        PlotSeries::new(label, xs, fitted.to_vec())?,
    ];
    emit_plot(&curves, title, "year", "production")
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_fit_exp(args: FitExpArgs, echo: &str) -> Result<i32> {
    let (panel, raw) = load_panel(&args.input.input, args.input.origin_year)?;
    let fits = growth::fit_exponential_panel(&panel)?;

    let mut report = RunReport::new();
    report.push("run", provenance(echo, Some((&args.input.input, &panel, &raw))));
    report.push("model", Value::from("exponential"));
    let mut m = Value::map();
    for kind in SeriesKind::ALL {
        m.set(kind.name(), exp_fit_value(fits.get(kind)));
    }
    report.push("fits", m);
    report.push("rates", rates_value(fits.rates()));
    write_report(&report, &args.output)?;

    if let Some(path) = &args.output.plot {
        let svg = plot_panel_fits(&panel, |kind, t| fits.get(kind).eval(t), "Exponential growth fits")?;
        write_plot(&svg, path)?;
    }
    Ok(0)
}

fn cmd_fit_logistic(args: FitLogisticArgs, echo: &str) -> Result<i32> {
    let (panel, raw) = load_panel(&args.input.input, args.input.origin_year)?;
    let init = args.init.as_ref().map(|Triple(t)| (t[0], t[1], t[2]));
    let opts = NlsOptions::default();
    let ts = panel.times();
    let fits = TripleFit {
        labor: growth::fit_logistic(&ts, &panel.labor, init, &opts)?,
        capital: growth::fit_logistic(&ts, &panel.capital, init, &opts)?,
        production: growth::fit_logistic(&ts, &panel.production, init, &opts)?,
    };
    let all_converged =
        fits.labor.converged && fits.capital.converged && fits.production.converged;

    let mut report = RunReport::new();
    report.push("run", provenance(echo, Some((&args.input.input, &panel, &raw))));
    report.push("model", Value::from("logistic"));
    let mut m = Value::map();
    for kind in SeriesKind::ALL {
        m.set(kind.name(), logistic_fit_value(fits.get(kind)));
    }
    report.push("fits", m);
    report.push("all_converged", Value::from(all_converged));
    write_report(&report, &args.output)?;

    if let Some(path) = &args.output.plot {
        let svg = plot_panel_fits(&panel, |kind, t| fits.get(kind).eval(t), "Logistic growth fits")?;
        write_plot(&svg, path)?;
    }
    Ok(if all_converged { 0 } else { 1 })
}

fn cmd_fit_cd(args: FitCdArgs, echo: &str) -> Result<i32> {
    let (panel, raw) = load_panel(&args.input.input, args.input.origin_year)?;
    let (mode, mode_name) = if args.fix_crs {
        (CdMode::Crs, "crs")
    } else if let Some(alpha) = args.alpha {
        (CdMode::AlphaPinned(alpha), "alpha-pinned")
    } else {
        (CdMode::Free, "free")
    };
    let fit = prodfit::fit_cobb_douglas(&panel, mode, &NlsOptions::default())?;

    let mut report = RunReport::new();
    report.push("run", provenance(echo, Some((&args.input.input, &panel, &raw))));
    report.push("model", Value::from("cobb-douglas"));
    report.push("mode", Value::from(mode_name));
    if let CdMode::AlphaPinned(_) = mode {
        report.push("rates", rates_value(growth::fit_exponential_panel(&panel)?.rates()));
    }
    report.push("surface", cd_value(&fit.model));
    report.push("rss", Value::from(fit.rss));
    report.push("converged", Value::from(fit.converged));
    report.push("iterations", Value::from(fit.iterations));
    write_report(&report, &args.output)?;

    if let Some(path) = &args.output.plot {
        let fitted: Vec<f64> = (0..panel.len())
            .map(|i| eval_cobb_douglas(&fit.model, panel.labor[i], panel.capital[i]))
            .collect::<Result<_>>()?;
        let svg = plot_production_fit(&panel, &fitted, "cobb-douglas fitted", "Cobb-Douglas surface fit")?;
        write_plot(&svg, path)?;
    }
    Ok(if fit.converged { 0 } else { 1 })
}

fn cmd_fit_lpf(args: FitLpfArgs, echo: &str) -> Result<i32> {
    let (panel, raw) = load_panel(&args.input.input, args.input.origin_year)?;
    let fit = prodfit::fit_logistic_production(&panel, &NlsOptions::default())?;

    let mut report = RunReport::new();
    report.push("run", provenance(echo, Some((&args.input.input, &panel, &raw))));
    report.push("model", Value::from("logistic-production"));
    let mut m = Value::map();
    for kind in SeriesKind::ALL {
        m.set(kind.name(), logistic_fit_value(fit.growth.get(kind)));
    }
    report.push("growth_fits", m);
    report.push("surface", lp_value(&fit.model));
    report.push("rss", Value::from(fit.rss));
    report.push("converged", Value::from(fit.converged));
    report.push("iterations", Value::from(fit.iterations));
    // How close the exponents sit to the rate-orthogonality line
    // alpha*b1 + beta*b2 = b3 implied by the growth fits.
    let b = [fit.growth.labor.b, fit.growth.capital.b, fit.growth.production.b];
    report.push(
        "rate_residual",
        Value::from(fit.model.alpha * b[0] + fit.model.beta * b[1] - b[2]),
    );
    write_report(&report, &args.output)?;

    if let Some(path) = &args.output.plot {
        let fitted: Vec<f64> = (0..panel.len())
            .map(|i| eval_logistic_production(&fit.model, panel.labor[i], panel.capital[i]))
            .collect();
        let svg = plot_production_fit(
            &panel,
            &fitted,
            "logistic surface fitted",
            "Bounded logistic surface fit",
        )?;
        write_plot(&svg, path)?;
    }
    Ok(if fit.converged { 0 } else { 1 })
}

/// Resolve the rate triple for `elasticities` / `classify`: either given
/// directly or estimated from a panel.
fn resolve_rates(args: &RatesArgs, echo: &str) -> Result<(Value, [f64; 3])> {
    match (&args.b, &args.input) {
        (Some(Triple(b)), _) => Ok((provenance(echo, None), *b)),
        (None, Some(path)) => {
            let (panel, raw) = load_panel(path, args.origin_year)?;
            let rates = growth::fit_exponential_panel(&panel)?.rates();
            Ok((provenance(echo, Some((path, &panel, &raw))), rates))
        }
        (None, None) => unreachable!("clap enforces one of --b/--input"),
    }
}

fn cmd_elasticities(args: RatesArgs, echo: &str) -> Result<i32> {
    let (run, b) = resolve_rates(&args, echo)?;
    classify_returns(b)?;
    let sol = crs_elasticities(b);

    let mut report = RunReport::new();
    report.push("run", run);
    report.push("rates", rates_value(b));
    report.push("classification", Value::from(sol.classification.name()));
    report.push("alpha", Value::from(sol.alpha));
    report.push("beta", Value::from(sol.beta));
    report.push(
        "orthogonality_residual",
        Value::from(orthogonality_residual(&[sol.alpha, sol.beta, -1.0], &b)?),
    );
    write_report(&report, &args.output)?;
    Ok(0)
}

fn cmd_classify(args: RatesArgs, echo: &str) -> Result<i32> {
    let (run, b) = resolve_rates(&args, echo)?;
    let classification = classify_returns(b)?;

    let mut report = RunReport::new();
    report.push("run", run);
    report.push("rates", rates_value(b));
    report.push("classification", Value::from(classification.name()));
    report.push(
        "crs_attainable",
        Value::from(classification == ReturnsClassification::CrsAttainable),
    );
    if classification == ReturnsClassification::CrsAttainable {
        let sol = crs_elasticities(b);
        report.push("crs_elasticities", share_pair(sol.alpha, sol.beta));
    }
    write_report(&report, &args.output)?;
    Ok(0)
}

fn cmd_shares(args: SharesArgs, echo: &str) -> Result<i32> {
    let (panel, raw) = load_panel(&args.input.input, args.input.origin_year)?;
    let opts = NlsOptions::default();
    let exp = growth::fit_exponential_panel(&panel)?;
    let b = exp.rates();
    let sol = crs_elasticities(b);
    let ts = panel.times();
    let years: Vec<f64> = panel.years.iter().map(|&y| f64::from(y)).collect();

    let mut report = RunReport::new();
    report.push("run", provenance(echo, Some((&args.input.input, &panel, &raw))));
    report.push("rates", rates_value(b));

    // Exponential regime: rates pin the elasticities, the surface share is a
    // constant, and three independent routes must agree on it.
    let mut expv = Value::map();
    expv.set("classification", Value::from(sol.classification.name()));
    let mut exp_share_curve = None;
    if sol.alpha.is_finite() {
        expv.set("alpha", Value::from(sol.alpha));
        expv.set("beta", Value::from(sol.beta));
        let cd = prodfit::fit_cobb_douglas(
            &panel,
            CdMode::Fixed { alpha: sol.alpha, beta: sol.beta },
            &opts,
        )?;
        expv.set("surface", cd_value(&cd.model));
        expv.set("rss", Value::from(cd.rss));

        let i = panel.len() - 1;
        let (l, k) = (panel.labor[i], panel.capital[i]);
        let y = eval_cobb_douglas(&cd.model, l, k)?;
        let jet = JetPoint::new(k, l, y, cd.model.beta * y / k, cd.model.alpha * y / l)?;
        let generator = Generator { a: b[1], b: b[0], c: b[2] };
        let via_inv =
            shares::shares_from_invariants(&shares::fundamental_invariants(&generator, &jet)?)?;
        let surface = |l: f64, k: f64| eval_cobb_douglas(&cd.model, l, k).unwrap_or(f64::NAN);
        let via_num = shares::numeric_wage_share(&surface, l, k, DEFAULT_SHARE_STEP)?;
        let mut at = Value::map();
        at.set("year", Value::Int(i64::from(panel.years[i])));
        at.set("analytic", share_pair(cd.model.alpha, cd.model.beta));
        at.set("invariants", share_pair(via_inv.s_l, via_inv.s_k));
        at.set("numeric", share_pair(via_num.s_l, via_num.s_k));
        expv.set("share_routes_at_last_year", at);

        let constancy = shares::share_constancy_report(
            &surface,
            &|t| exp.labor.eval(t),
            &|t| exp.capital.eval(t),
            &ts,
            DEFAULT_SHARE_STEP,
        )?;
        expv.set("wage_share_constancy", summary_value(&constancy));
        exp_share_curve = Some(vec![sol.alpha; panel.len()]);
    } else {
        expv.set("degenerate", Value::from(true));
    }
    report.push("exponential_regime", expv);

    // Logistic regime: the trajectory share is an explicit function of time
    // and generally drifts; a degenerate fit is reported rather than fatal.
    let mut logv = Value::map();
    let mut traj_curve = None;
    match growth::fit_logistic_panel(&panel, &opts) {
        Ok(lfits) => {
            let mut m = Value::map();
            for kind in SeriesKind::ALL {
                m.set(kind.name(), logistic_fit_value(lfits.get(kind)));
            }
            logv.set("fits", m);
            match shares::logistic_share_trajectory(&lfits, &ts) {
                Ok(traj) => {
                    let lp = shares::trajectory_surface(&lfits)?;
                    logv.set("surface", lp_value(&lp));
                    logv.set("wage_share_trajectory", Value::from(&traj[..]));
                    logv.set("constancy", summary_value(&shares::summarize(&traj)?));
                    logv.set(
                        "exponential_limit_share",
                        Value::from(lfits.production.b / lfits.labor.b),
                    );
                    traj_curve = Some(traj);
                }
                Err(e) => {
                    logv.set("degenerate", Value::from(true));
                    logv.set("reason", Value::from(e.to_string()));
                }
            }
        }
        Err(e) => {
            logv.set("degenerate", Value::from(true));
            logv.set("reason", Value::from(e.to_string()));
        }
    }
    report.push("logistic_regime", logv);
    write_report(&report, &args.output)?;

    if let Some(path) = &args.output.plot {
        let mut curves = Vec::new();
        if let Some(ys) = exp_share_curve {
            curves.push(PlotSeries::new("wage share, exponential regime", years.clone(), ys)?);
        }
        if let Some(ys) = traj_curve {
            curves.push(PlotSeries::new("wage share, logistic trajectory", years.clone(), ys)?);
        }
        let svg = emit_plot(&curves, "Wage share along fitted flows", "year", "wage share")?;
        write_plot(&svg, path)?;
    }
    Ok(0)
}

fn cmd_report(args: ReportArgs, echo: &str) -> Result<i32> {
    let (panel, raw) = load_panel(&args.input.input, args.input.origin_year)?;
    let opts = NlsOptions::default();
    let exp = growth::fit_exponential_panel(&panel)?;
    let b = exp.rates();
    let sol = crs_elasticities(b);
    let ts = panel.times();
    let logistic = growth::fit_logistic_panel(&panel, &opts);

    let mut report = RunReport::new();
    report.push("run", provenance(echo, Some((&args.input.input, &panel, &raw))));

    let mut growth_v = Value::map();
    let mut m = Value::map();
    for kind in SeriesKind::ALL {
        m.set(kind.name(), exp_fit_value(exp.get(kind)));
    }
    growth_v.set("exponential", m);
    match &logistic {
        Ok(lfits) => {
            let mut m = Value::map();
            for kind in SeriesKind::ALL {
                m.set(kind.name(), logistic_fit_value(lfits.get(kind)));
            }
            growth_v.set("logistic", m);
        }
        Err(e) => {
            growth_v.set("logistic_error", Value::from(e.to_string()));
        }
    }
    report.push("growth", growth_v);

    let mut ev = Value::map();
    ev.set("rates", rates_value(b));
    ev.set("classification", Value::from(sol.classification.name()));
    ev.set("alpha", Value::from(sol.alpha));
    ev.set("beta", Value::from(sol.beta));
    if let Some(alpha) = args.alpha {
        let mut pinned = Value::map();
        pinned.set("alpha", Value::from(alpha));
        pinned.set("beta", Value::from(beta_given_alpha(b, alpha)?));
        ev.set("beta_given_alpha", pinned);
    }
    report.push("elasticities", ev);

    let mut surfaces = Value::map();
    let free = prodfit::fit_cobb_douglas(&panel, CdMode::Free, &opts)?;
    let crs = prodfit::fit_cobb_douglas(&panel, CdMode::Crs, &opts)?;
    for (name, fit) in [("cobb_douglas_free", &free), ("cobb_douglas_crs", &crs)] {
        let mut v = cd_value(&fit.model);
        v.set("rss", Value::from(fit.rss));
        v.set("converged", Value::from(fit.converged));
        surfaces.set(name, v);
    }
    if let Some(alpha) = args.alpha {
        let pinned = prodfit::fit_cobb_douglas(&panel, CdMode::AlphaPinned(alpha), &opts)?;
        let mut v = cd_value(&pinned.model);
        v.set("rss", Value::from(pinned.rss));
        v.set("converged", Value::from(pinned.converged));
        surfaces.set("cobb_douglas_alpha_pinned", v);
    }
    let lpf = prodfit::fit_logistic_production(&panel, &opts);
    let mut lpf_fitted = None;
    match &lpf {
        Ok(fit) => {
            let mut v = lp_value(&fit.model);
            v.set("rss", Value::from(fit.rss));
            v.set("converged", Value::from(fit.converged));
            surfaces.set("logistic_production", v);
            lpf_fitted = Some(
                (0..panel.len())
                    .map(|i| eval_logistic_production(&fit.model, panel.labor[i], panel.capital[i]))
                    .collect::<Vec<f64>>(),
            );
        }
        Err(e) => {
            surfaces.set("logistic_production_error", Value::from(e.to_string()));
        }
    }
    report.push("surfaces", surfaces);

    let mut sharev = Value::map();
    if sol.alpha.is_finite() {
        let fixed = prodfit::fit_cobb_douglas(
            &panel,
            CdMode::Fixed { alpha: sol.alpha, beta: sol.beta },
            &opts,
        )?;
        let surface = |l: f64, k: f64| eval_cobb_douglas(&fixed.model, l, k).unwrap_or(f64::NAN);
        let constancy = shares::share_constancy_report(
            &surface,
            &|t| exp.labor.eval(t),
            &|t| exp.capital.eval(t),
            &ts,
            DEFAULT_SHARE_STEP,
        )?;
        sharev.set("exponential_wage_share", Value::from(sol.alpha));
        sharev.set("exponential_constancy", summary_value(&constancy));
    }
    if let Ok(lfits) = &logistic {
        match shares::logistic_share_trajectory(lfits, &ts) {
            Ok(traj) => {
                sharev.set("logistic_constancy", summary_value(&shares::summarize(&traj)?));
                sharev.set(
                    "exponential_limit_share",
                    Value::from(lfits.production.b / lfits.labor.b),
                );
            }
            Err(e) => {
                sharev.set("logistic_degenerate", Value::from(e.to_string()));
            }
        }
    }
    report.push("shares", sharev);
    write_report(&report, &args.output)?;

    if let Some(path) = &args.output.plot {
        let xs: Vec<f64> = panel.years.iter().map(|&y| f64::from(y)).collect();
        let cd_fitted: Vec<f64> = (0..panel.len())
            .map(|i| eval_cobb_douglas(&crs.model, panel.labor[i], panel.capital[i]))
            .collect::<Result<_>>()?;
        let mut curves = vec![
            PlotSeries::new("production observed", xs.clone(), panel.production.clone())?,
            PlotSeries::new("cobb-douglas (crs) fitted", xs.clone(), cd_fitted)?,
        ];
        if let Some(fitted) = lpf_fitted {
            curves.push(PlotSeries::new("logistic surface fitted", xs, fitted)?);
        }
        let svg = emit_plot(&curves, "Production: observed and fitted", "year", "production")?;
        write_plot(&svg, path)?;
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify-invariants

#[derive(Default)]
struct Harness {
    passed: usize,
    failed: usize,
    skipped: usize,
}

impl Harness {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        if pass {
            self.passed += 1;
            println!("PASS {name} {detail}");
        } else {
            self.failed += 1;
            println!("FAIL {name} {detail}");
        }
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.skipped += 1;
        println!("SKIP {name} {why}");
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Randomized self-checks of the identities the library is built on. Each
/// property prints one PASS/FAIL line; any FAIL makes the exit code 1.
fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut h = Harness::default();
    const DRAWS: usize = 100;

    // Products with exponents orthogonal to the rates stay constant along
    // exponential flows; misaligned exponents must drift.
    let mut worst = 0.0f64;
    let mut weakest_drift = f64::INFINITY;
    for _ in 0..DRAWS {
        let b = [
            rng.random_range(0.01..0.1),
            rng.random_range(0.01..0.1),
            rng.random_range(0.01..0.1),
        ];
        let x0 = [
            rng.random_range(0.5..5.0),
            rng.random_range(0.5..5.0),
            rng.random_range(0.5..5.0),
        ];
        let sol = crs_elasticities(b);
        let mut candidates = vec![vec![b[1], -b[0], 0.0]];
        if sol.alpha.is_finite() {
            candidates.push(vec![sol.alpha, sol.beta, -1.0]);
        }
        for a in &candidates {
            let reference = general_invariant_value(&x0, a, &x0)?;
            for i in 0..=8 {
                let t = 5.0 * i as f64;
                let x: Vec<f64> = (0..3)
                    .map(|j| growth::eval_exponential(b[j], x0[j], t))
                    .collect();
                worst = worst.max(rel_gap(general_invariant_value(&x0, a, &x)?, reference));
            }
        }
        let a_bad = [1.0, 1.0, 1.0];
        let reference = general_invariant_value(&x0, &a_bad, &x0)?;
        let x: Vec<f64> = (0..3)
            .map(|j| growth::eval_exponential(b[j], x0[j], 24.0))
            .collect();
        weakest_drift = weakest_drift.min(rel_gap(general_invariant_value(&x0, &a_bad, &x)?, reference));
    }
    h.check(
        "exp-flow-invariance",
        worst < 1e-10,
        format!("({DRAWS} draws, max residual {})", fmt_sig(worst, 3)),
    );
    h.check(
        "exp-flow-variation",
        weakest_drift > 1e-3,
        format!("(min drift {})", fmt_sig(weakest_drift, 3)),
    );

    // The logistic analogue: each bracket is e^{b_i t} along the flow, so the
    // orthogonal product pins to 1; an unbalanced product must leave 1.
    let mut worst = 0.0f64;
    let mut weakest_drift = f64::INFINITY;
    for _ in 0..DRAWS {
        let b = [
            rng.random_range(0.02..0.1),
            rng.random_range(0.02..0.1),
            rng.random_range(0.02..0.1),
        ];
        let n = [
            rng.random_range(150.0..300.0),
            rng.random_range(150.0..300.0),
            rng.random_range(150.0..300.0),
        ];
        let x0 = [
            rng.random_range(1.0..10.0),
            rng.random_range(1.0..10.0),
            rng.random_range(1.0..10.0),
        ];
        let a = [b[1], -b[0], 0.0];
        for i in 0..=8 {
            let t = 5.0 * i as f64;
            let x: Vec<f64> = (0..3)
                .map(|j| growth::eval_logistic(b[j], x0[j], n[j], t))
                .collect();
            worst = worst.max((logistic_invariant_value(&x0, &n, &a, &x)? - 1.0).abs());
        }
        let a_bad = [1.0, 0.0, 0.0];
        let x: Vec<f64> = (0..3)
            .map(|j| growth::eval_logistic(b[j], x0[j], n[j], 40.0))
            .collect();
        weakest_drift =
            weakest_drift.min((logistic_invariant_value(&x0, &n, &a_bad, &x)? - 1.0).abs());
    }
    h.check(
        "logistic-flow-invariance",
        worst < 1e-8,
        format!("({DRAWS} draws, max residual {})", fmt_sig(worst, 3)),
    );
    h.check(
        "logistic-flow-variation",
        weakest_drift > 0.1,
        format!("(min drift {})", fmt_sig(weakest_drift, 3)),
    );

    // The four fundamental jet invariants are annihilated by the prolonged
    // generator: moving the jet point along its flow changes none of them.
    let mut worst = 0.0f64;
    for _ in 0..DRAWS {
        let g = Generator {
            a: rng.random_range(0.3..2.0),
            b: rng.random_range(0.3..2.0),
            c: rng.random_range(0.3..2.0),
        };
        let p = JetPoint::new(
            rng.random_range(0.5..5.0),
            rng.random_range(0.5..5.0),
            rng.random_range(0.5..5.0),
            rng.random_range(0.1..2.0),
            rng.random_range(0.1..2.0),
        )?;
        let i0 = shares::fundamental_invariants(&g, &p)?;
        for s in [0.25, -0.4] {
            let moved = JetPoint::new(
                p.k * (g.a * s).exp(),
                p.l * (g.b * s).exp(),
                p.y * (g.c * s).exp(),
                p.y_k * ((g.c - g.a) * s).exp(),
                p.y_l * ((g.c - g.b) * s).exp(),
            )?;
            let i1 = shares::fundamental_invariants(&g, &moved)?;
            for j in 0..4 {
                worst = worst.max(rel_gap(i1[j], i0[j]));
            }
        }
    }
    h.check(
        "prolongation-annihilation",
        worst < 1e-8,
        format!("({DRAWS} generator/jet pairs, max residual {})", fmt_sig(worst, 3)),
    );

    // Invariant route and numeric route both land on the exponents.
    let mut worst_inv = 0.0f64;
    let mut worst_num = 0.0f64;
    for _ in 0..DRAWS {
        let cd = CobbDouglas {
            scale: rng.random_range(0.5..2.0),
            alpha: rng.random_range(0.2..0.9),
            beta: rng.random_range(0.05..0.5),
        };
        let (l, k) = (rng.random_range(1.0..100.0), rng.random_range(1.0..100.0));
        let y = eval_cobb_douglas(&cd, l, k)?;
        let jet = JetPoint::new(k, l, y, cd.beta * y / k, cd.alpha * y / l)?;
        let g = Generator {
            a: rng.random_range(0.3..2.0),
            b: rng.random_range(0.3..2.0),
            c: rng.random_range(0.3..2.0),
        };
        let via_inv = shares::shares_from_invariants(&shares::fundamental_invariants(&g, &jet)?)?;
        let surface = |l: f64, k: f64| eval_cobb_douglas(&cd, l, k).unwrap_or(f64::NAN);
        let via_num = shares::numeric_wage_share(&surface, l, k, DEFAULT_SHARE_STEP)?;
        worst_inv = worst_inv.max(rel_gap(via_inv.s_l, cd.alpha).max(rel_gap(via_inv.s_k, cd.beta)));
        worst_num = worst_num.max(rel_gap(via_num.s_l, cd.alpha).max(rel_gap(via_num.s_k, cd.beta)));
    }
    h.check(
        "share-route-agreement",
        worst_inv < 1e-10 && worst_num < 1e-6,
        format!(
            "(invariant route {}, numeric route {})",
            fmt_sig(worst_inv, 3),
            fmt_sig(worst_num, 3)
        ),
    );

    // The rectifying map is a bijection below capacity and pushes the linear
    // field onto the logistic one.
    let mut worst = 0.0f64;
    for _ in 0..DRAWS {
        let n: Vec<f64> = (0..3).map(|_| rng.random_range(100.0..300.0)).collect();
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(1.0..90.0)).collect();
        let b: Vec<f64> = (0..3).map(|_| rng.random_range(0.01..0.1)).collect();
        let xt = psi_forward(&n, &x)?;
        let back = psi_inverse(&n, &xt)?;
        let field = pushforward_field(&b, &n, &xt)?;
        for i in 0..3 {
            worst = worst.max(rel_gap(back[i], x[i]));
            let closed = b[i] * xt[i] * (1.0 - xt[i] / n[i]);
            worst = worst.max(rel_gap(field[i], closed));
        }
    }
    h.check(
        "rectifier-conjugacy",
        worst < 1e-12,
        format!("({DRAWS} draws, max residual {})", fmt_sig(worst, 3)),
    );

    // Cobb-Douglas wage share is constant along any exponential flow pair.
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let cd = CobbDouglas {
            scale: rng.random_range(0.5..2.0),
            alpha: rng.random_range(0.2..0.9),
            beta: rng.random_range(0.05..0.5),
        };
        let (bl, bk) = (rng.random_range(0.01..0.1), rng.random_range(0.01..0.1));
        let ts: Vec<f64> = (0..25).map(f64::from).collect();
        let surface = |l: f64, k: f64| eval_cobb_douglas(&cd, l, k).unwrap_or(f64::NAN);
        let summary = shares::share_constancy_report(
            &surface,
            &|t| growth::eval_exponential(bl, 100.0, t),
            &|t| growth::eval_exponential(bk, 100.0, t),
            &ts,
            DEFAULT_SHARE_STEP,
        )?;
        worst = worst.max(summary.relative_range);
    }
    h.check(
        "cobb-douglas-share-constancy",
        worst < 1e-8,
        format!("(20 draws, max relative range {})", fmt_sig(worst, 3)),
    );

    // The bounded surface honors its bounds everywhere, capacities included.
    let mut ok = true;
    let mut bad = String::new();
    for _ in 0..2 * DRAWS {
        let lp = LogisticProduction {
            n_l: rng.random_range(150.0..250.0),
            n_k: rng.random_range(150.0..250.0),
            n_y: rng.random_range(150.0..250.0),
            c: rng.random_range(0.5..3.0),
            alpha: rng.random_range(0.2..0.8),
            beta: rng.random_range(0.05..0.4),
        };
        let l = rng.random_range(0.1..2.0 * lp.n_l);
        let k = rng.random_range(0.1..2.0 * lp.n_k);
        let y = eval_logistic_production(&lp, l, k);
        if !(y > 0.0 && y <= lp.n_y) {
            ok = false;
            bad = format!("(Y = {y} at L = {l}, K = {k})");
            break;
        }
    }
    h.check(
        "bounded-surface-range",
        ok,
        if ok { format!("({} samples in (0, N_Y])", 2 * DRAWS) } else { bad },
    );

    // The time-explicit trajectory share equals the surface share of the
    // canonical comparison member, evaluated along the fitted flows.
    let mut worst = 0.0f64;
    for _ in 0..DRAWS {
        let mk = |rng: &mut ChaCha8Rng| -> LogisticFit {
            let n = rng.random_range(150.0..300.0);
            LogisticFit {
                b: rng.random_range(0.03..0.1),
                x0: rng.random_range(1.0..10.0),
                n,
                rss: 0.0,
                converged: true,
                near_degenerate: false,
            }
        };
        let fits = TripleFit {
            labor: mk(&mut rng),
            capital: mk(&mut rng),
            production: mk(&mut rng),
        };
        let lp = shares::trajectory_surface(&fits)?;
        let ts: Vec<f64> = (0..=10).map(|i| 7.0 * i as f64).collect();
        let traj = shares::logistic_share_trajectory(&fits, &ts)?;
        for (i, &t) in ts.iter().enumerate() {
            let l = fits.labor.eval(t);
            let k = fits.capital.eval(t);
            worst = worst.max(rel_gap(traj[i], shares::analytic_logistic_share(&lp, l, k)?));
        }
    }
    h.check(
        "trajectory-vs-surface-share",
        worst < 1e-10,
        format!("({DRAWS} draws, max residual {})", fmt_sig(worst, 3)),
    );

    // The single-output S-shaped form at b = 0 is bit-for-bit Cobb-Douglas.
    let mut ok = true;
    for _ in 0..DRAWS {
        let a = rng.random_range(0.5..2.0);
        let p = rng.random_range(0.1..0.9);
        let (l, k) = (rng.random_range(0.5..50.0), rng.random_range(0.5..50.0));
        let s = SShaped { a, b: 0.0, p };
        let cd = CobbDouglas { scale: a, alpha: 1.0 - p, beta: p };
        if eval_s_shaped(&s, k, l)?.to_bits() != eval_cobb_douglas(&cd, l, k)?.to_bits() {
            ok = false;
            break;
        }
    }
    h.check(
        "s-shaped-reduction",
        ok,
        format!("({DRAWS} draws, bitwise at b = 0)"),
    );

    // Holding the invariant level fixed and solving for output reproduces the
    // power-law surface through the starting point.
    let mut worst = 0.0f64;
    for _ in 0..DRAWS {
        let alpha = rng.random_range(0.2..0.9);
        let beta = rng.random_range(0.05..0.5);
        let a = [alpha, beta, -1.0];
        let x0 = [
            rng.random_range(0.5..5.0),
            rng.random_range(0.5..5.0),
            rng.random_range(0.5..5.0),
        ];
        let c = general_invariant_value(&x0, &a, &x0)?;
        let scale = x0[2] / (x0[0].powf(alpha) * x0[1].powf(beta));
        let cd = CobbDouglas { scale, alpha, beta };
        let (l, k) = (rng.random_range(0.5..20.0), rng.random_range(0.5..20.0));
        let solved = solve_production_from_invariant(&x0, &a, c, l, k)?;
        worst = worst.max(rel_gap(solved, eval_cobb_douglas(&cd, l, k)?));
    }
    h.check(
        "invariant-solves-production",
        worst < 1e-10,
        format!("({DRAWS} draws, max residual {})", fmt_sig(worst, 3)),
    );

    // Data-driven checks, when a panel is supplied.
    match &args.input {
        Some(path) => {
            let (panel, _) = load_panel(path, args.origin_year)?;
            let exp = growth::fit_exponential_panel(&panel)?;
            let sol = crs_elasticities(exp.rates());
            if sol.alpha.is_finite() {
                let fixed = prodfit::fit_cobb_douglas(
                    &panel,
                    CdMode::Fixed { alpha: sol.alpha, beta: sol.beta },
                    &NlsOptions::default(),
                )?;
                let surface =
                    |l: f64, k: f64| eval_cobb_douglas(&fixed.model, l, k).unwrap_or(f64::NAN);
                let summary = shares::share_constancy_report(
                    &surface,
                    &|t| exp.labor.eval(t),
                    &|t| exp.capital.eval(t),
                    &panel.times(),
                    DEFAULT_SHARE_STEP,
                )?;
                h.check(
                    "panel-share-constancy",
                    summary.relative_range < 1e-8,
                    format!("(relative range {})", fmt_sig(summary.relative_range, 3)),
                );
            } else {
                h.skip("panel-share-constancy", "(degenerate rate triple)");
            }
            match growth::fit_logistic_panel(&panel, &NlsOptions::default()) {
                Ok(lfits) => match shares::logistic_share_trajectory(&lfits, &panel.times()) {
                    Ok(traj) => {
                        let lp = shares::trajectory_surface(&lfits)?;
                        let mut worst = 0.0f64;
                        for (i, &t) in panel.times().iter().enumerate() {
                            let l = lfits.labor.eval(t);
                            let k = lfits.capital.eval(t);
                            worst = worst
                                .max(rel_gap(traj[i], shares::analytic_logistic_share(&lp, l, k)?));
                        }
                        h.check(
                            "panel-trajectory-consistency",
                            worst < 1e-10,
                            format!("(max residual {})", fmt_sig(worst, 3)),
                        );
                    }
                    Err(e) => h.skip("panel-trajectory-consistency", &format!("({e})")),
                },
                Err(e) => h.skip("panel-trajectory-consistency", &format!("({e})")),
            }
        }
        None => {
            h.skip("panel-share-constancy", "(no --input)");
            h.skip("panel-trajectory-consistency", "(no --input)");
        }
    }

    println!(
        "{} passed, {} failed, {} skipped",
        h.passed, h.failed, h.skipped
    );
    Ok(if h.failed == 0 { 0 } else { 1 })
}
