//! Command-line surface for the PDM toolkit: derive symbolic geometry,
//! solve spectra, run classical trajectories, compare orderings, and
//! sweep parameters. Single results go to stdout as JSON by default;
//! `--format csv` and `-o FILE` redirect and reshape the output.

use std::error::Error;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pdmq::classical::{acceleration, conservation_report, integrate, measure_period, ClassicalState};
use pdmq::expr::{parse_expr, Bindings};
use pdmq::geometry::{derive_killing, noether_momentum, Domain, Endpoint, ProblemDef};
use pdmq::models::{builtin, ModelId, ScalingMap, ALL_MODELS};
use pdmq::quantize::{build_noether, OrderingScheme};
use pdmq::spectral::{refine_spectrum, solve_problem, SolveOutcome, SolveRoute};

type CliResult<T> = Result<T, Box<dyn Error>>;

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn log(msg: &str) {
    if std::env::var("PDMQ_LOG").map_or(false, |v| !v.is_empty() && v != "0") {
        eprintln!("pdmq: {msg}");
    }
}

#[derive(Parser)]
#[command(
    name = "pdmq",
    about = "Toolkit for 1-D position-dependent-mass systems: symmetry-derived \
             quantization, spectra, and classical dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in models and their parameter schemas
    ListModels {
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Derive the Killing field, invariant measure, Noether momentum, and
    /// Hamiltonian coefficients of a problem
    Derive {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve for the lowest part of the quantum spectrum
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        numeric: NumericArgs,
        /// Ordering scheme: noether | lb | vonroos:a1,a2,a3
        #[arg(long, default_value = "noether")]
        scheme: String,
        /// Solve in the arclength coordinate instead of the original one
        #[arg(long)]
        arclength: bool,
        /// Also write eigenfunction samples to this CSV file
        #[arg(long, value_name = "FILE")]
        dump_states: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Integrate the classical dynamics and report conservation
    Classical {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Initial position
        #[arg(long, default_value_t = 0.5)]
        x0: f64,
        /// Initial velocity
        #[arg(long, default_value_t = 0.0)]
        v0: f64,
        /// Time step
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Total integration time
        #[arg(short = 'T', default_value_t = 50.0)]
        t_final: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve the same problem under several ordering schemes and compare
    Compare {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        numeric: NumericArgs,
        /// Ordering scheme, repeatable; defaults to noether, vonroos:0,-1,0
        /// and vonroos:-0.5,0,-0.5
        #[arg(long = "scheme")]
        schemes: Vec<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve across a range of parameter values
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        numeric: NumericArgs,
        /// Ordering scheme: noether | lb | vonroos:a1,a2,a3
        #[arg(long, default_value = "noether")]
        scheme: String,
        /// Parameter to sweep (e.g. L, k, lambda)
        #[arg(long)]
        param: String,
        /// Explicit parameter values, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Range lo,hi,step as an alternative to --values
        #[arg(long, value_delimiter = ',', num_args = 3, allow_hyphen_values = true)]
        range: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Built-in model name (see list-models)
    #[arg(long, conflicts_with_all = ["mass", "potential", "domain"])]
    model: Option<String>,
    /// Inline mass profile m(x)
    #[arg(long = "m", value_name = "EXPR", allow_hyphen_values = true)]
    mass: Option<String>,
    /// Inline potential V(x)
    #[arg(long = "V", value_name = "EXPR", allow_hyphen_values = true)]
    potential: Option<String>,
    /// Inline domain "a,b"; accepts -inf, inf, pi
    #[arg(long, value_name = "A,B", allow_hyphen_values = true)]
    domain: Option<String>,
    /// Parameter binding name=value, repeatable
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
    /// Physical scales "hbar=..,m0=..,alpha=.."; reports E alongside e
    #[arg(long, value_name = "SCALES")]
    units: Option<String>,
}

#[derive(Args)]
struct NumericArgs {
    /// Number of interior grid points
    #[arg(short = 'N', default_value_t = 2000)]
    n: usize,
    /// Grid sizes for Richardson refinement, comma separated
    #[arg(long = "N-list", value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Number of eigenvalues
    #[arg(short = 'k', default_value_t = 5)]
    k: usize,
    /// Truncation cut in the arclength coordinate
    #[arg(long = "y-cut", default_value_t = 12.0)]
    y_cut: f64,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
    /// Output file; stdout when omitted
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

fn run() -> CliResult<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::ListModels { out } => cmd_list_models(&out),
        Command::Derive { problem, out } => cmd_derive(&problem, &out),
        Command::Solve {
            problem,
            numeric,
            scheme,
            arclength,
            dump_states,
            out,
        } => cmd_solve(&problem, &numeric, &scheme, arclength, dump_states.as_deref(), &out),
        Command::Classical {
            problem,
            x0,
            v0,
            dt,
            t_final,
            out,
        } => cmd_classical(&problem, x0, v0, dt, t_final, &out),
        Command::Compare {
            problem,
            numeric,
            schemes,
            out,
        } => cmd_compare(&problem, &numeric, &schemes, &out),
        Command::Sweep {
            problem,
            numeric,
            scheme,
            param,
            values,
            range,
            out,
        } => cmd_sweep(&problem, &numeric, &scheme, &param, &values, &range, &out),
    }
}

// ---------------------------------------------------------------- parsing

fn parse_bindings(set: &[String]) -> CliResult<Bindings> {
    let mut b = Bindings::new();
    for item in set {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| format!("--set expects name=value, got `{item}`"))?;
        let v: f64 = value
            .parse()
            .map_err(|_| format!("--set {name}: `{value}` is not a number"))?;
        b.insert(name.trim().to_string(), v);
    }
    Ok(b)
}

fn parse_units(units: &str) -> CliResult<ScalingMap> {
    let (mut hbar, mut m0, mut alpha) = (1.0, 1.0, 1.0);
    for item in units.split(',') {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| format!("--units expects hbar=..,m0=..,alpha=.., got `{item}`"))?;
        let v: f64 = value
            .parse()
            .map_err(|_| format!("--units {name}: `{value}` is not a number"))?;
        match name.trim() {
            "hbar" => hbar = v,
            "m0" => m0 = v,
            "alpha" => alpha = v,
            other => return Err(format!("--units: unknown scale `{other}`").into()),
        }
    }
    Ok(ScalingMap::new(hbar, m0, alpha)?)
}

fn parse_domain_bound(s: &str) -> CliResult<f64> {
    let t = s.trim().to_ascii_lowercase();
    Ok(match t.as_str() {
        "inf" | "+inf" | "infinity" => f64::INFINITY,
        "-inf" | "-infinity" => f64::NEG_INFINITY,
        "pi" => std::f64::consts::PI,
        "-pi" => -std::f64::consts::PI,
        other => other
            .parse()
            .map_err(|_| format!("bad domain bound `{s}`"))?,
    })
}

fn parse_domain(spec: &str) -> CliResult<Domain> {
    let (a, b) = spec
        .split_once(',')
        .ok_or_else(|| format!("--domain expects \"a,b\", got `{spec}`"))?;
    let lo = parse_domain_bound(a)?;
    let hi = parse_domain_bound(b)?;
    if !(lo < hi) {
        return Err(format!("--domain: {lo} must be below {hi}").into());
    }
    let ep = |v: f64| {
        if v.is_finite() {
            Endpoint::Regular(v)
        } else {
            Endpoint::Infinite
        }
    };
    Ok(Domain {
        lo: ep(lo),
        hi: ep(hi),
    })
}

fn parse_scheme(s: &str) -> CliResult<OrderingScheme> {
    let t = s.trim().to_ascii_lowercase();
    if t == "noether" {
        return Ok(OrderingScheme::Noether);
    }
    if t == "lb" || t == "laplace-beltrami" {
        return Ok(OrderingScheme::LaplaceBeltrami);
    }
    if let Some(rest) = t.strip_prefix("vonroos:").or_else(|| t.strip_prefix("von-roos:")) {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("--scheme vonroos expects three exponents, got `{s}`").into());
        }
        let mut a = [0.0; 3];
        for (slot, p) in a.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| format!("--scheme: `{p}` is not a number"))?;
        }
        let scheme = OrderingScheme::VonRoos(a[0], a[1], a[2]);
        scheme.validate()?;
        return Ok(scheme);
    }
    Err(format!("unknown scheme `{s}`; use noether | lb | vonroos:a1,a2,a3").into())
}

/// Resolved problem plus the config echo describing it.
struct ResolvedProblem {
    problem: ProblemDef,
    scaling: Option<ScalingMap>,
    config: Value,
}

fn build_problem(args: &ProblemArgs) -> CliResult<ResolvedProblem> {
    let set = parse_bindings(&args.set)?;
    let scaling = args.units.as_deref().map(parse_units).transpose()?;
    let problem = if let Some(name) = &args.model {
        let id = ModelId::from_name(name)?;
        builtin(id, &set)?
    } else {
        let mass_src = args.mass.as_deref().unwrap_or("1");
        let pot_src = args.potential.as_deref().unwrap_or("0");
        if args.mass.is_none() && args.potential.is_none() {
            return Err("give either --model or at least one of --m/--V".into());
        }
        let mass = parse_expr(mass_src)?;
        let potential = parse_expr(pot_src)?;
        let domain = match &args.domain {
            Some(d) => parse_domain(d)?,
            None => Domain::real_line(),
        };
        ProblemDef::new(mass, potential, domain, set.clone())
    };
    problem.validate_mass()?;
    let config = json!({
        "model": args.model,
        "mass": problem.mass.to_string(),
        "potential": problem.potential.to_string(),
        "domain": [problem.domain.lo_value(), problem.domain.hi_value()],
        "bindings": problem.bindings,
        "units": args.units,
    });
    Ok(ResolvedProblem {
        problem,
        scaling,
        config,
    })
}

// ----------------------------------------------------------------- output

fn emit(text: &str, out: &OutputArgs) -> CliResult<()> {
    match &out.output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            // tolerate a closed pipe (e.g. piping into `head`)
            if let Err(e) = writeln!(stdout, "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn emit_json(config: Value, results: Value, diagnostics: Value, out: &OutputArgs) -> CliResult<()> {
    let doc = json!({
        "config": config,
        "results": results,
        "diagnostics": diagnostics,
    });
    emit(&serde_json::to_string_pretty(&doc)?, out)
}

fn csv_header(config: &Value) -> String {
    format!("# config: {config}\n")
}

// --------------------------------------------------------------- commands

fn cmd_list_models(out: &OutputArgs) -> CliResult<u8> {
    let specs: Vec<Value> = ALL_MODELS
        .iter()
        .map(|id| {
            let s = id.spec();
            json!({
                "name": s.name,
                "description": s.description,
                "parameter": s.parameter,
                "admissible": s.admissible,
                "mass": s.mass_src,
                "potential": s.potential_src,
                "domain": s.domain_desc,
            })
        })
        .collect();
    if out.format == "csv" {
        let mut text = String::from("name,parameter,mass,potential,domain\n");
        for s in ALL_MODELS.iter().map(|id| id.spec()) {
            let _ = writeln!(
                text,
                "{},{},\"{}\",\"{}\",\"{}\"",
                s.name, s.parameter, s.mass_src, s.potential_src, s.domain_desc
            );
        }
        emit(&text, out)?;
    } else {
        emit(&serde_json::to_string_pretty(&json!({ "models": specs }))?, out)?;
    }
    Ok(0)
}

fn cmd_derive(problem: &ProblemArgs, out: &OutputArgs) -> CliResult<u8> {
    let rp = build_problem(problem)?;
    let p = &rp.problem;
    let kd = derive_killing(p)?;
    let nm = noether_momentum(p);
    let op = build_noether(p, 1.0);
    let (a, b) = p.domain.sample_window(3.0);
    let points: Vec<f64> = (0..100)
        .map(|i| a + (b - a) * (i as f64 + 0.5) / 100.0)
        .collect();
    let (rk, rm) = kd.max_residuals(&p.bindings, &points)?;
    let config = json!({ "command": "derive", "problem": rp.config });
    let results = json!({
        "killing_field": kd.killing_component.to_string(),
        "measure_density": kd.density.to_string(),
        "noether_momentum": {
            "velocity_form": format!("({}) * v", nm.velocity_coeff),
            "phase_form": format!("({}) * p", nm.phase_coeff),
        },
        "hamiltonian": {
            "scheme": "noether",
            "a": op.a.to_string(),
            "b": op.b.to_string(),
            "c": op.c.to_string(),
            "weight": op.weight.to_string(),
            "hbar": op.hbar,
        },
    });
    let diagnostics = json!({
        "killing_residual": rk,
        "measure_residual": rm,
    });
    emit_json(config, results, diagnostics, out)?;
    Ok(0)
}

fn solve_config(
    rp: &ResolvedProblem,
    numeric: &NumericArgs,
    scheme: &OrderingScheme,
    route: SolveRoute,
) -> Value {
    json!({
        "command": "solve",
        "problem": rp.config,
        "N": numeric.n,
        "N_list": numeric.n_list,
        "k": numeric.k,
        "y_cut": numeric.y_cut,
        "scheme": scheme.label(),
        "route": if route == SolveRoute::Arclength { "arclength" } else { "direct" },
    })
}

struct SolveSummary {
    energies: Vec<f64>,
    error_bars: Option<Vec<f64>>,
    outcome: SolveOutcome,
}

fn run_solve(
    p: &ProblemDef,
    numeric: &NumericArgs,
    scheme: OrderingScheme,
    route: SolveRoute,
) -> CliResult<SolveSummary> {
    let k = numeric.k;
    let outcome = solve_problem(p, scheme, 1.0, k, numeric.n, numeric.y_cut, route)?;
    if numeric.n_list.len() >= 2 {
        log(&format!("refining over N = {:?}", numeric.n_list));
        let refined = refine_spectrum(
            |n| Ok(solve_problem(p, scheme, 1.0, k, n, numeric.y_cut, route)?.spectrum),
            &numeric.n_list,
            k,
        )?;
        Ok(SolveSummary {
            energies: refined.energies,
            error_bars: Some(refined.error_bars),
            outcome,
        })
    } else {
        Ok(SolveSummary {
            energies: outcome.spectrum.energies.clone(),
            error_bars: None,
            outcome,
        })
    }
}

fn cmd_solve(
    problem: &ProblemArgs,
    numeric: &NumericArgs,
    scheme: &str,
    arclength: bool,
    dump_states: Option<&std::path::Path>,
    out: &OutputArgs,
) -> CliResult<u8> {
    let rp = build_problem(problem)?;
    let scheme = parse_scheme(scheme)?;
    let route = if arclength {
        SolveRoute::Arclength
    } else {
        SolveRoute::Direct
    };
    let summary = run_solve(&rp.problem, numeric, scheme, route)?;
    let config = solve_config(&rp, numeric, &scheme, route);

    if let Some(path) = dump_states {
        let s = &summary.outcome.spectrum;
        let mut text = csv_header(&config);
        let coord = if route == SolveRoute::Arclength { "y" } else { "x" };
        let _ = write!(text, "{coord}");
        for j in 0..s.states.len() {
            let _ = write!(text, ",psi_{j}");
        }
        text.push('\n');
        for i in 0..s.grid.n {
            let _ = write!(text, "{}", s.grid.point(i));
            for st in &s.states {
                let _ = write!(text, ",{}", st[i]);
            }
            text.push('\n');
        }
        std::fs::write(path, text)?;
    }

    let scaled: Option<Vec<f64>> = rp
        .scaling
        .map(|m| summary.energies.iter().map(|&e| m.energy_from_dimless(e)).collect());
    if out.format == "csv" {
        let mut text = csv_header(&config);
        text.push_str("n,energy,error,nodes\n");
        for (j, &e) in summary.energies.iter().enumerate() {
            let err = summary
                .error_bars
                .as_ref()
                .map_or(String::new(), |b| b[j].to_string());
            let _ = writeln!(text, "{j},{e},{err},{}", summary.outcome.spectrum.node_counts[j]);
        }
        emit(&text, out)?;
    } else {
        let results = json!({
            "energies": summary.energies,
            "error_bars": summary.error_bars,
            "scaled_energies": scaled,
            "node_counts": summary.outcome.spectrum.node_counts,
        });
        let diagnostics = json!({
            "hermiticity_residual": summary.outcome.hermiticity,
            "box_x": summary.outcome.box_x,
            "box_y": summary.outcome.box_y,
        });
        emit_json(config, results, diagnostics, out)?;
    }
    Ok(0)
}

fn cmd_classical(
    problem: &ProblemArgs,
    x0: f64,
    v0: f64,
    dt: f64,
    t_final: f64,
    out: &OutputArgs,
) -> CliResult<u8> {
    let rp = build_problem(problem)?;
    let p = &rp.problem;
    let acc = acceleration(p);
    let config = json!({
        "command": "classical",
        "problem": rp.config,
        "x0": x0, "v0": v0, "dt": dt, "T": t_final,
        "acceleration": {
            "v2_coeff": acc.v2_coeff.to_string(),
            "force": acc.force.to_string(),
        },
    });
    let tr = integrate(p, ClassicalState { x: x0, v: v0, t: 0.0 }, dt, t_final)?;
    let report = conservation_report(p, &tr)?;
    let period = match measure_period(&tr) {
        Ok(t) => Some(t),
        Err(e) => {
            log(&format!("no period: {e}"));
            None
        }
    };
    if out.format == "csv" {
        let mut text = csv_header(&config);
        text.push_str("t,x,v,energy,noether\n");
        for i in 0..tr.ts.len() {
            let _ = writeln!(
                text,
                "{},{},{},{},{}",
                tr.ts[i], tr.xs[i], tr.vs[i], tr.energies[i], tr.noether[i]
            );
        }
        emit(&text, out)?;
    } else {
        let results = json!({
            "steps": tr.ts.len(),
            "final_state": { "t": tr.ts.last(), "x": tr.xs.last(), "v": tr.vs.last() },
            "period": period,
            "domain_exit": tr.domain_exit,
        });
        let diagnostics = json!({
            "energy_drift": report.energy_drift,
            "noether_drift": report.noether_drift,
        });
        emit_json(config, results, diagnostics, out)?;
    }
    // partial trajectory: outputs were produced but the run left the domain
    Ok(if tr.domain_exit { 2 } else { 0 })
}

fn cmd_compare(
    problem: &ProblemArgs,
    numeric: &NumericArgs,
    schemes: &[String],
    out: &OutputArgs,
) -> CliResult<u8> {
    let rp = build_problem(problem)?;
    let default_schemes = [
        "noether".to_string(),
        "vonroos:0,-1,0".to_string(),
        "vonroos:-0.5,0,-0.5".to_string(),
    ];
    let names: Vec<String> = if schemes.is_empty() {
        default_schemes.to_vec()
    } else {
        schemes.to_vec()
    };
    let mut columns = Vec::new();
    for name in &names {
        let scheme = parse_scheme(name)?;
        log(&format!("solving scheme {}", scheme.label()));
        let summary = run_solve(&rp.problem, numeric, scheme, SolveRoute::Direct)?;
        columns.push((scheme.label(), summary));
    }
    let config = json!({
        "command": "compare",
        "problem": rp.config,
        "N": numeric.n, "N_list": numeric.n_list, "k": numeric.k, "y_cut": numeric.y_cut,
        "schemes": columns.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>(),
    });
    if out.format == "csv" {
        let mut text = csv_header(&config);
        text.push_str("scheme,n,energy,error\n");
        for (label, s) in &columns {
            for (j, &e) in s.energies.iter().enumerate() {
                let err = s
                    .error_bars
                    .as_ref()
                    .map_or(String::new(), |b| b[j].to_string());
                let _ = writeln!(text, "{label},{j},{e},{err}");
            }
        }
        emit(&text, out)?;
    } else {
        let mut pairwise = Vec::new();
        for i in 0..columns.len() {
            for j in i + 1..columns.len() {
                pairwise.push(json!({
                    "a": columns[i].0,
                    "b": columns[j].0,
                    "ground_state_gap": columns[i].1.energies[0] - columns[j].1.energies[0],
                }));
            }
        }
        let results = json!({
            "columns": columns.iter().map(|(label, s)| json!({
                "scheme": label,
                "energies": s.energies,
                "error_bars": s.error_bars,
            })).collect::<Vec<_>>(),
            "pairwise_ground_state": pairwise,
        });
        let diagnostics = json!({
            "hermiticity_residuals": columns
                .iter()
                .map(|(_, s)| s.outcome.hermiticity)
                .collect::<Vec<_>>(),
        });
        emit_json(config, results, diagnostics, out)?;
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    problem: &ProblemArgs,
    numeric: &NumericArgs,
    scheme: &str,
    param: &str,
    values: &[f64],
    range: &[f64],
    out: &OutputArgs,
) -> CliResult<u8> {
    let scheme = parse_scheme(scheme)?;
    let points: Vec<f64> = if !values.is_empty() {
        values.to_vec()
    } else if range.len() == 3 {
        let (lo, hi, step) = (range[0], range[1], range[2]);
        if step <= 0.0 || hi < lo {
            return Err("--range expects lo,hi,step with step > 0".into());
        }
        let n = ((hi - lo) / step).round() as usize;
        (0..=n).map(|i| lo + i as f64 * step).collect()
    } else {
        return Err("sweep needs --values or --range".into());
    };

    let mut rows = Vec::new();
    let mut failures = 0usize;
    let mut config_echo = None;
    for &value in &points {
        let mut args_set = problem.set.clone();
        args_set.retain(|s| !s.starts_with(&format!("{param}=")));
        args_set.push(format!("{param}={value}"));
        let point_args = ProblemArgs {
            model: problem.model.clone(),
            mass: problem.mass.clone(),
            potential: problem.potential.clone(),
            domain: problem.domain.clone(),
            set: args_set,
            units: problem.units.clone(),
        };
        let attempt = (|| -> CliResult<SolveSummary> {
            let rp = build_problem(&point_args)?;
            if config_echo.is_none() {
                config_echo = Some(rp.config.clone());
            }
            run_solve(&rp.problem, numeric, scheme, SolveRoute::Direct)
        })();
        match attempt {
            Ok(summary) => {
                for (j, &e) in summary.energies.iter().enumerate() {
                    let err = summary.error_bars.as_ref().map(|b| b[j]);
                    rows.push((value, j, e, err));
                }
            }
            Err(e) => {
                failures += 1;
                eprintln!("sweep point {param}={value} failed: {e}");
            }
        }
    }
    if rows.is_empty() {
        return Err("all sweep points failed".into());
    }
    let config = json!({
        "command": "sweep",
        "problem": config_echo,
        "param": param,
        "points": points,
        "N": numeric.n, "N_list": numeric.n_list, "k": numeric.k, "y_cut": numeric.y_cut,
        "scheme": scheme.label(),
    });
    if out.format == "json" {
        let results = json!({
            "rows": rows.iter().map(|(v, j, e, err)| json!({
                "param": v, "n": j, "energy": e, "error": err,
            })).collect::<Vec<_>>(),
        });
        emit_json(config, results, json!({ "failed_points": failures }), out)?;
    } else {
        let mut text = csv_header(&config);
        text.push_str("param,n,energy,error\n");
        for (v, j, e, err) in &rows {
            let err = err.map_or(String::new(), |x| x.to_string());
            let _ = writeln!(text, "{v},{j},{e},{err}");
        }
        emit(&text, out)?;
    }
    Ok(if failures > 0 { 2 } else { 0 })
}
