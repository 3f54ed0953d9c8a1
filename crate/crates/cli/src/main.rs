//! Command-line front end: parses a configuration, dispatches one
//! computation, and emits a flat JSON result on stdout plus CSV
//! sequences (and optional gnuplot-ready .dat files) under --out.
//!
//! Exit codes: 0 success, 2 configuration error, 3 budget exhausted,
//! 4 numerical non-convergence or a failed oracle cross-check. Errors are
//! also emitted as a structured JSON object on stderr.

use clap::{Parser, Subcommand};
use gurevic::config::{parse_system, ParsedConfig};
use gurevic::equidist::{empirical_integral, equidist_report, ld_fit, ld_tail, limit_integral};
use gurevic::exec;
use gurevic::groups::GroupKind;
use gurevic::report::{csv_body, flat_json, fmt12, JsonValue, RunManifest};
use gurevic::shift::Potential;
use gurevic::skew::{
    brute_force_constrained, check_extension_mixing, constrained_sum, extension_pressure,
    fourier_constrained_sum, free_group_radial_sum, l2_norm_growth, nyquist_points, ConstraintMode,
    ExtensionPressureReport, MixingFallback, SkewSystem,
};
use gurevic::transfer::{
    perron, perron_with_tol, pressure_via_periodic, spectral_radius, GibbsMeasure, TransferMatrix,
};
use gurevic::xi::{check_assumptions, find_xi, XiOptions};
use gurevic::{Error, Result};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "gurevic",
    version,
    about = "Pressure, Gibbs measures and group-constrained orbit statistics \
             for Markov shifts with skew-product extensions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (the line-oriented grammar described in the README)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV/plot artifacts
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the length range of the computation
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Override the numerical tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Also write two-column gnuplot-ready .dat files (requires --out)
    #[arg(long, global = true)]
    plot_data: bool,
    /// Override the DP entry budget
    #[arg(long, global = true)]
    budget_entries: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Gurevič pressure of the base shift, with the periodic-trace sequence
    Pressure,
    /// The pressure-minimizing twist ξ and the standing-assumption report
    Xi,
    /// Extension pressure of the skew product, with ℓ²-growth diagnostics
    Extension,
    /// Weighted equidistribution report over the four constrained families
    Equidist,
    /// Large-deviation tails and the fitted decay rate
    Ld,
    /// Extension pressure for G and for its abelianization, side by side
    AmenabilityGap,
    /// Truncation-family convergence report
    BipConverge,
    /// Brute-force cross-check suite over the configured system
    Oracle,
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = exec::thread_cap_from_env() {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            let diag = flat_json(&[
                ("error_kind".to_string(), JsonValue::Str(e.kind().into())),
                ("error_message".to_string(), JsonValue::Str(e.to_string())),
                (
                    "exit_code".to_string(),
                    JsonValue::Num(e.exit_code() as f64),
                ),
            ]);
            eprint!("{diag}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Validation("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(config_path)?;
    let mut cfg = parse_system(&text)?;
    if let Some(tol) = cli.tol {
        cfg.options.tol = tol;
        cfg.options.xi_tol = tol;
    }
    if let Some(b) = cli.budget_entries {
        cfg.options.budget_entries = b;
    }
    if let Some(n) = cli.n_max {
        cfg.options.n_max = Some(n);
    }
    if cli.plot_data && cli.out.is_none() {
        return Err(Error::Validation("--plot-data needs --out <dir>".into()));
    }
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
    }
    let started = Instant::now();
    match cli.command {
        Command::Pressure => cmd_pressure(cli, &cfg, started),
        Command::Xi => cmd_xi(cli, &cfg, started),
        Command::Extension => cmd_extension(cli, &cfg, started),
        Command::Equidist => cmd_equidist(cli, &cfg, started),
        Command::Ld => cmd_ld(cli, &cfg, started),
        Command::AmenabilityGap => cmd_gap(cli, &cfg, started),
        Command::BipConverge => cmd_bip(cli, &cfg, started),
        Command::Oracle => cmd_oracle(cli, &cfg, started),
    }
}

fn manifest(cfg: &ParsedConfig, sub: &str, started: Instant) -> RunManifest {
    let mut m = RunManifest::new(&cfg.raw, sub);
    m.param("oracle_ceiling", cfg.options.oracle_ceiling.to_string());
    m.param("tol", fmt12(cfg.options.tol));
    m.param("budget_entries", cfg.options.budget_entries.to_string());
    if let Some(n) = cfg.options.n_max {
        m.param("n_max", n.to_string());
    }
    m.timing("total", started.elapsed().as_millis());
    m
}

fn write_artifact(cli: &Cli, name: &str, body: &str) -> Result<()> {
    if let Some(dir) = &cli.out {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}

fn write_plot(cli: &Cli, name: &str, rows: &[(f64, f64)]) -> Result<()> {
    if !cli.plot_data {
        return Ok(());
    }
    let dir = cli.out.as_ref().expect("checked");
    let mut body = String::new();
    for (x, y) in rows {
        body.push_str(&format!("{} {}\n", fmt12(*x), fmt12(*y)));
    }
    std::fs::write(Path::new(dir).join(name), body)?;
    Ok(())
}

fn default_n_max(sys: &SkewSystem) -> usize {
    match sys.cocycle().kind() {
        GroupKind::Free(_) => {
            if free_group_radial_sum(sys, 2).is_ok() {
                200
            } else {
                14
            }
        }
        GroupKind::Heisenberg => 40,
        GroupKind::Zd(d) if d >= 1 => 400,
        _ => 60,
    }
}

fn cmd_pressure(cli: &Cli, cfg: &ParsedConfig, started: Instant) -> Result<()> {
    let sys = &cfg.system;
    let f = sys.f_values()?;
    let m = TransferMatrix::build(
        sys.shift(),
        sys.potential(),
        Some(&f),
        &vec![0.0; sys.ab_rank()],
        &vec![0.0; sys.ab_rank()],
    )?;
    let data = perron_with_tol(&m, cfg.options.tol)?;
    let n_max = cfg.options.n_max.unwrap_or(20).min(400);
    let seq = pressure_via_periodic(sys.shift(), sys.potential(), n_max)?;
    // for merely transitive systems the trace sequence vanishes off the
    // period and only a limsup over the computed range is claimed
    let interpretation = if sys.shift().mixing() {
        "limit".to_string()
    } else {
        format!(
            "limsup over computed range (base period {})",
            sys.shift().period()
        )
    };
    let mut fields = vec![
        ("pressure".to_string(), JsonValue::Num(data.pressure())),
        (
            "periodic_sequence_interpretation".to_string(),
            JsonValue::Str(interpretation),
        ),
        ("lambda".to_string(), JsonValue::Num(data.lambda)),
        ("residual".to_string(), JsonValue::Num(data.residual)),
        (
            "stationary".to_string(),
            JsonValue::Array(
                (0..sys.shift().state_count())
                    .map(|i| data.left[i] * data.right[i])
                    .collect(),
            ),
        ),
    ];
    if let Some(s) = data.second_modulus {
        fields.push(("second_modulus".to_string(), JsonValue::Num(s)));
    }
    let mani = manifest(cfg, "pressure", started);
    fields.extend(mani.json_fields());
    print!("{}", flat_json(&fields));
    let rows: Vec<Vec<String>> = seq
        .iter()
        .map(|&(n, v)| vec![n.to_string(), fmt12(v)])
        .collect();
    write_artifact(
        cli,
        "pressure_periodic.csv",
        &csv_body(&mani, &["n", "log_trace_over_n"], &rows),
    )?;
    write_plot(
        cli,
        "pressure_periodic.dat",
        &seq.iter().map(|&(n, v)| (n as f64, v)).collect::<Vec<_>>(),
    )?;
    Ok(())
}

fn cmd_xi(_cli: &Cli, cfg: &ParsedConfig, started: Instant) -> Result<()> {
    let sys = &cfg.system;
    let opts = XiOptions {
        tol: cfg.options.xi_tol,
        ..XiOptions::default()
    };
    let res = find_xi(sys, &opts)?;
    let delta = cfg.family.as_ref().map(|f| f.family.delta());
    let assumptions =
        check_assumptions(sys, cfg.options.horizon, delta, cfg.options.budget_entries)?;
    let status = |s: gurevic::skew::MixingStatus| -> String { format!("{s:?}").to_lowercase() };
    let mut fields = vec![
        ("xi".to_string(), JsonValue::Array(res.xi.clone())),
        (
            "gradient_norm".to_string(),
            JsonValue::Num(res.gradient_norm),
        ),
        (
            "pressure_at_xi".to_string(),
            JsonValue::Num(res.pressure_at_xi),
        ),
        (
            "hessian_spectrum".to_string(),
            JsonValue::Array(res.hessian_spectrum.clone()),
        ),
        (
            "assumption_mixing".to_string(),
            JsonValue::Str(status(assumptions.mixing.verified)),
        ),
        (
            "assumption_mixing_evidence".to_string(),
            JsonValue::Str(assumptions.mixing.evidence.clone()),
        ),
        (
            "assumption_moment_radius".to_string(),
            JsonValue::Str(status(assumptions.moment_radius.verified)),
        ),
        ("delta".to_string(), JsonValue::Num(assumptions.delta)),
        (
            "assumption_minimum".to_string(),
            JsonValue::Str(status(assumptions.minimum.verified)),
        ),
        (
            "assumption_minimum_evidence".to_string(),
            JsonValue::Str(assumptions.minimum.evidence.clone()),
        ),
    ];
    fields.extend(manifest(cfg, "xi", started).json_fields());
    print!("{}", flat_json(&fields));
    Ok(())
}

fn extension_csv(mani: &RunManifest, rep: &ExtensionPressureReport) -> String {
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                if r.log_z.is_finite() {
                    fmt12(r.log_z.exp())
                } else {
                    "0".to_string()
                },
                fmt12(r.value),
                rep.method.name().to_string(),
                r.work.to_string(),
            ]
        })
        .collect();
    csv_body(
        mani,
        &["n", "Z_n", "log_Z_n_over_n", "method", "ball_size"],
        &rows,
    )
}

fn extension_fields(prefix: &str, rep: &ExtensionPressureReport) -> Vec<(String, JsonValue)> {
    vec![
        (
            format!("{prefix}estimate"),
            JsonValue::Num(rep.point_estimate),
        ),
        (
            format!("{prefix}bracket_low"),
            JsonValue::Num(rep.bracket.0),
        ),
        (
            format!("{prefix}bracket_high"),
            JsonValue::Num(rep.bracket.1),
        ),
        (
            format!("{prefix}bracket_width"),
            JsonValue::Num(rep.bracket.1 - rep.bracket.0),
        ),
        (
            format!("{prefix}certified_lower"),
            JsonValue::Num(
                rep.lower_bound_rows
                    .last()
                    .map(|&(_, v)| v)
                    .unwrap_or(f64::NEG_INFINITY),
            ),
        ),
        (
            format!("{prefix}lower_is_certified"),
            JsonValue::Bool(rep.lower_is_certified),
        ),
        (
            format!("{prefix}upper_bound"),
            JsonValue::Num(rep.upper_bound),
        ),
        (format!("{prefix}fit_alpha"), JsonValue::Num(rep.fit_alpha)),
        (
            format!("{prefix}method"),
            JsonValue::Str(rep.method.name().to_string()),
        ),
        (
            format!("{prefix}constraint_period"),
            JsonValue::Num(rep.constraint_period as f64),
        ),
    ]
}

fn cmd_extension(cli: &Cli, cfg: &ParsedConfig, started: Instant) -> Result<()> {
    let sys = &cfg.system;
    let n_max = cfg.options.n_max.unwrap_or_else(|| default_n_max(sys));
    let rep = extension_pressure(
        sys,
        n_max,
        &ConstraintMode::PeriodicAll,
        cfg.options.budget_entries,
    )?;
    let l2_n = n_max.min(14);
    let l2 = l2_norm_growth(sys, l2_n, 0, cfg.options.budget_entries)?;
    let mut fields = extension_fields("", &rep);
    fields.push((
        "l2_growth_last".to_string(),
        JsonValue::Num(l2.last().map(|&(_, v)| v).unwrap_or(f64::NAN)),
    ));
    let mani = manifest(cfg, "extension", started);
    fields.extend(mani.json_fields());
    print!("{}", flat_json(&fields));
    write_artifact(cli, "extension_pressure.csv", &extension_csv(&mani, &rep))?;
    let l2_rows: Vec<Vec<String>> = l2
        .iter()
        .map(|&(n, v)| vec![n.to_string(), fmt12(v)])
        .collect();
    write_artifact(
        cli,
        "l2_growth.csv",
        &csv_body(&mani, &["n", "log_norm_over_n"], &l2_rows),
    )?;
    write_plot(
        cli,
        "extension_pressure.dat",
        &rep.rows
            .iter()
            .filter(|r| r.log_z.is_finite())
            .map(|r| (r.n as f64, r.value))
            .collect::<Vec<_>>(),
    )?;
    write_plot(
        cli,
        "l2_growth.dat",
        &l2.iter().map(|&(n, v)| (n as f64, v)).collect::<Vec<_>>(),
    )?;
    Ok(())
}

fn require_equidist(cfg: &ParsedConfig) -> Result<(&gurevic::config::EquidistSpec, &Potential)> {
    let spec = cfg
        .equidist
        .as_ref()
        .ok_or_else(|| Error::Validation("this subcommand needs an [equidist] section".into()))?;
    let g = cfg.test_function.as_ref().ok_or_else(|| {
        Error::Validation("this subcommand needs a [test] section defining g".into())
    })?;
    Ok((spec, g))
}

fn cmd_equidist(cli: &Cli, cfg: &ParsedConfig, started: Instant) -> Result<()> {
    let sys = &cfg.system;
    let (spec, g) = require_equidist(cfg)?;
    let xi = find_xi(
        sys,
        &XiOptions {
            tol: cfg.options.xi_tol,
            ..XiOptions::default()
        },
    )?;
    let modes = [
        ConstraintMode::PeriodicAll,
        ConstraintMode::PeriodicCylinder(spec.cylinder),
        ConstraintMode::Preimage(spec.base_point.clone()),
        ConstraintMode::PreimageCylinder(spec.cylinder, spec.base_point.clone()),
    ];
    let rep = equidist_report(
        sys,
        g,
        &xi.xi,
        &spec.n_list,
        &modes,
        cfg.options.budget_entries,
    )?;
    let mut fields = vec![
        ("limit".to_string(), JsonValue::Num(rep.limit)),
        ("xi".to_string(), JsonValue::Array(xi.xi.clone())),
        (
            "base_point".to_string(),
            JsonValue::Str(spec.base_point.display(sys.shift())),
        ),
        ("rows".to_string(), JsonValue::Num(rep.rows.len() as f64)),
    ];
    let mani = manifest(cfg, "equidist", started);
    fields.extend(mani.json_fields());
    print!("{}", flat_json(&fields));
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.mode.clone(),
                r.n.to_string(),
                "g".to_string(),
                r.empirical.map(fmt12).unwrap_or_else(|| "".into()),
                fmt12(r.limit),
                r.abs_diff
                    .map(fmt12)
                    .unwrap_or_else(|| r.error.clone().unwrap_or_default().replace(',', ";")),
            ]
        })
        .collect();
    write_artifact(
        cli,
        "equidist.csv",
        &csv_body(
            &mani,
            &["mode", "n", "g_name", "empirical", "limit", "abs_diff"],
            &rows,
        ),
    )?;
    let plot: Vec<(f64, f64)> = rep
        .rows
        .iter()
        .filter(|r| r.mode == "periodic" && r.abs_diff.is_some())
        .map(|r| (r.n as f64, r.abs_diff.unwrap()))
        .collect();
    write_plot(cli, "equidist_diff.dat", &plot)?;
    Ok(())
}

fn cmd_ld(cli: &Cli, cfg: &ParsedConfig, started: Instant) -> Result<()> {
    let sys = &cfg.system;
    let (spec, g) = require_equidist(cfg)?;
    let xi = find_xi(
        sys,
        &XiOptions {
            tol: cfg.options.xi_tol,
            ..XiOptions::default()
        },
    )?;
    let limit = limit_integral(sys, &xi.xi, g)?;
    let target = sys.cocycle().kind().identity();
    let mode = ConstraintMode::PeriodicAll;
    let mut tails: Vec<(usize, f64)> = Vec::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for &n in &spec.n_list {
        let tail = ld_tail(
            sys,
            &mode,
            &target,
            g,
            spec.epsilon,
            limit,
            n,
            cfg.options.budget_entries,
        );
        match tail {
            Ok(t) => {
                let empirical =
                    empirical_integral(sys, &mode, &target, n, g, cfg.options.budget_entries)?;
                tails.push((n, t));
                rows.push(vec![
                    mode.name().to_string(),
                    n.to_string(),
                    "g".to_string(),
                    fmt12(empirical),
                    fmt12(limit),
                    fmt12((empirical - limit).abs()),
                    fmt12(spec.epsilon),
                    fmt12(t),
                ]);
            }
            Err(Error::EmptyConstraint(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let fit = ld_fit(&tails);
    let (eta, r2) = fit.unwrap_or((f64::NAN, f64::NAN));
    for row in &mut rows {
        row.push(fmt12(eta));
        row.push(fmt12(1.0 - r2));
    }
    let mut fields = vec![
        ("limit".to_string(), JsonValue::Num(limit)),
        ("epsilon".to_string(), JsonValue::Num(spec.epsilon)),
        ("eta_fit".to_string(), JsonValue::Num(eta)),
        ("r_squared".to_string(), JsonValue::Num(r2)),
        (
            "tail_masses".to_string(),
            JsonValue::Array(tails.iter().map(|&(_, t)| t).collect()),
        ),
    ];
    let mani = manifest(cfg, "ld", started);
    fields.extend(mani.json_fields());
    print!("{}", flat_json(&fields));
    write_artifact(
        cli,
        "ld.csv",
        &csv_body(
            &mani,
            &[
                "mode",
                "n",
                "g_name",
                "empirical",
                "limit",
                "abs_diff",
                "epsilon",
                "tail_mass",
                "eta_fit",
                "residual",
            ],
            &rows,
        ),
    )?;
    write_plot(
        cli,
        "ld_tail.dat",
        &tails
            .iter()
            .map(|&(n, t)| (n as f64, t))
            .collect::<Vec<_>>(),
    )?;
    Ok(())
}

fn cmd_gap(cli: &Cli, cfg: &ParsedConfig, started: Instant) -> Result<()> {
    let sys = &cfg.system;
    if sys.ab_rank() == 0 {
        return Err(Error::Validation(
            "amenability-gap needs a cocycle with nontrivial abelianization".into(),
        ));
    }
    let n_max = cfg.options.n_max.unwrap_or_else(|| default_n_max(sys));
    let rep_g = extension_pressure(
        sys,
        n_max,
        &ConstraintMode::PeriodicAll,
        cfg.options.budget_entries,
    )?;
    let ab = sys.abelianized_system()?;
    let ab_n_max = cfg.options.n_max.unwrap_or_else(|| default_n_max(&ab));
    let rep_ab = extension_pressure(
        &ab,
        ab_n_max,
        &ConstraintMode::PeriodicAll,
        cfg.options.budget_entries,
    )?;
    let gap = rep_ab.point_estimate - rep_g.point_estimate;
    let width = (rep_g.bracket.1 - rep_g.bracket.0) + (rep_ab.bracket.1 - rep_ab.bracket.0);
    // a gap is significant exactly when the two bracket intervals are
    // disjoint with the abelianized one strictly above
    let significant = rep_ab.bracket.0 > rep_g.bracket.1;
    let mut fields = vec![("gap".to_string(), JsonValue::Num(gap))];
    fields.push((
        "gap_exceeds_brackets".to_string(),
        JsonValue::Bool(significant),
    ));
    fields.push(("combined_bracket_width".to_string(), JsonValue::Num(width)));
    fields.extend(extension_fields("group_", &rep_g));
    fields.extend(extension_fields("abelianized_", &rep_ab));
    let mani = manifest(cfg, "amenability-gap", started);
    fields.extend(mani.json_fields());
    print!("{}", flat_json(&fields));
    write_artifact(cli, "extension_group.csv", &extension_csv(&mani, &rep_g))?;
    write_artifact(
        cli,
        "extension_abelianized.csv",
        &extension_csv(&mani, &rep_ab),
    )?;
    Ok(())
}

fn cmd_bip(cli: &Cli, cfg: &ParsedConfig, started: Instant) -> Result<()> {
    let fam = cfg
        .family
        .as_ref()
        .ok_or_else(|| Error::Validation("bip-converge needs a [family] section".into()))?;
    let rows = gurevic::bip::convergence_report(&fam.family, &fam.n_list, 4096)?;
    let last = rows
        .last()
        .ok_or_else(|| Error::Validation("empty n_list".into()))?;
    let mut fields = vec![
        (
            "family".to_string(),
            JsonValue::Str(fam.family.name().into()),
        ),
        ("delta".to_string(), JsonValue::Num(fam.family.delta())),
        ("pressure_last".to_string(), JsonValue::Num(last.pressure)),
        (
            "pressure_upper_last".to_string(),
            JsonValue::Num(last.pressure_upper),
        ),
    ];
    let mani = manifest(cfg, "bip-converge", started);
    fields.extend(mani.json_fields());
    print!("{}", flat_json(&fields));
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n_states.to_string(),
                fmt12(r.pressure),
                fmt12(r.pressure_upper),
                r.xi.map(fmt12)
                    .unwrap_or_else(|| r.xi_error.clone().unwrap_or_default().replace(',', ";")),
                r.pressure_at_xi.map(fmt12).unwrap_or_default(),
                fmt12(r.delta),
            ]
        })
        .collect();
    write_artifact(
        cli,
        "bip_converge.csv",
        &csv_body(
            &mani,
            &[
                "N",
                "pressure",
                "pressure_upper",
                "xi",
                "pressure_at_xi",
                "delta",
            ],
            &csv_rows,
        ),
    )?;
    write_plot(
        cli,
        "bip_converge.dat",
        &rows
            .iter()
            .map(|r| (r.n_states as f64, r.pressure))
            .collect::<Vec<_>>(),
    )?;
    Ok(())
}

/// Brute-force equality suite: every fast path is pinned against direct
/// enumeration on the configured system.
fn cmd_oracle(cli: &Cli, cfg: &ParsedConfig, started: Instant) -> Result<()> {
    let sys = &cfg.system;
    let ceiling = cfg.options.oracle_ceiling;
    let budget = cfg.options.budget_entries;
    let target = sys.cocycle().kind().identity();
    let mut checks: Vec<(String, bool, String)> = Vec::new();
    let mut push = |name: String, ok: bool, detail: String| {
        println!(
            "{} {name}{}",
            if ok { "ok  " } else { "FAIL" },
            if detail.is_empty() {
                String::new()
            } else {
                format!(" ({detail})")
            }
        );
        checks.push((name, ok, detail));
    };

    // trace identity against enumeration
    let f = sys.f_values()?;
    let d = sys.ab_rank();
    let m = TransferMatrix::build(
        sys.shift(),
        sys.potential(),
        Some(&f),
        &vec![0.0; d],
        &vec![0.0; d],
    )?;
    for n in 1..=8.min(ceiling) {
        let (z, log_scale) = m.trace_pow_log(n);
        let matrix_side = z.re * log_scale.exp();
        let oracle: f64 = sys
            .shift()
            .periodic_words_capped(n, ceiling)?
            .map(|w| {
                sys.shift()
                    .birkhoff_periodic(sys.potential(), &w)
                    .unwrap()
                    .exp()
            })
            .sum();
        let ok = (matrix_side - oracle).abs() <= 1e-9 * oracle.abs().max(1.0);
        push(
            format!("trace_identity n={n}"),
            ok,
            format!(
                "matrix {} vs enumeration {}",
                fmt12(matrix_side),
                fmt12(oracle)
            ),
        );
    }
    // constrained DP against enumeration, all four modes
    let base_point = cfg
        .equidist
        .as_ref()
        .map(|e| e.base_point.clone())
        .unwrap_or_else(|| {
            gurevic::skew::BasePoint::periodic(sys.shift(), vec![0]).expect("state 1 cycles")
        });
    let modes = [
        ConstraintMode::PeriodicAll,
        ConstraintMode::PeriodicCylinder(0),
        ConstraintMode::Preimage(base_point.clone()),
        ConstraintMode::PreimageCylinder(0, base_point),
    ];
    for mode in &modes {
        for n in 1..=10.min(ceiling) {
            let dp = constrained_sum(sys, n, mode, &target, budget)?;
            let bf = brute_force_constrained(sys, n, mode, &target, ceiling)?;
            let ok = (dp - bf).abs() <= 1e-10 * bf.abs().max(1.0);
            push(
                format!("constrained_{} n={n}", mode.name()),
                ok,
                format!("dp {} vs enumeration {}", fmt12(dp), fmt12(bf)),
            );
        }
    }
    // Fourier against DP for ℤ^d cocycles
    if matches!(sys.cocycle().kind(), GroupKind::Zd(d) if d >= 1) {
        let zero = gurevic::groups::GroupElement::Zd(vec![0; d]);
        for n in 1..=12 {
            let q = nyquist_points(sys, n)?;
            let fr = fourier_constrained_sum(sys, n, &vec![0; d], q)?;
            let dp = constrained_sum(sys, n, &ConstraintMode::PeriodicAll, &zero, budget)?;
            let ok = (fr - dp).abs() <= 1e-8 * dp.abs().max(1.0);
            push(
                format!("fourier_vs_dp n={n}"),
                ok,
                format!("fourier {} vs dp {}", fmt12(fr), fmt12(dp)),
            );
        }
    }
    // radial path against DP where its preconditions hold
    if free_group_radial_sum(sys, 2).is_ok() {
        for n in 1..=10 {
            let radial = free_group_radial_sum(sys, n)?;
            let dp = constrained_sum(sys, n, &ConstraintMode::PeriodicAll, &target, budget)?;
            let ok = (radial - dp).abs() <= 1e-10 * dp.abs().max(1.0);
            push(
                format!("radial_vs_dp n={n}"),
                ok,
                format!("radial {} vs dp {}", fmt12(radial), fmt12(dp)),
            );
        }
    }
    // Gibbs masses: level sums and refinement
    {
        let data = perron(&m)?;
        let gibbs = GibbsMeasure::from_perron(&m, &data)?;
        for n in 1..=6.min(ceiling) {
            let total: f64 = sys
                .shift()
                .allowed_words_capped(n, ceiling)?
                .map(|w| gibbs.cylinder_mass(w.symbols()))
                .sum();
            let ok = (total - 1.0).abs() <= 1e-10;
            push(
                format!("gibbs_level_mass n={n}"),
                ok,
                format!("total {}", fmt12(total)),
            );
        }
    }
    // twisted radius below the untwisted pressure on a small grid
    if d >= 1 {
        let mixing =
            check_extension_mixing(sys, cfg.options.horizon, budget, MixingFallback::Assumed)?;
        let p0 = perron(&m)?.lambda;
        let mut worst: f64 = 0.0;
        let grid = 16;
        for k in 1..grid {
            let t = vec![k as f64 / grid as f64; d];
            let r = spectral_radius(&TransferMatrix::build(
                sys.shift(),
                sys.potential(),
                Some(&f),
                &vec![0.0; d],
                &t,
            )?)?;
            worst = worst.max(r / p0);
        }
        let ok = if mixing.status == gurevic::skew::MixingStatus::Verified {
            worst < 1.0
        } else {
            worst <= 1.0 + 1e-12
        };
        push(
            "twisted_radius_grid".to_string(),
            ok,
            format!("max ratio {} (mixing {:?})", fmt12(worst), mixing.status),
        );
    }
    let failed = checks.iter().filter(|(_, ok, _)| !ok).count();
    let mut fields = vec![
        ("checks".to_string(), JsonValue::Num(checks.len() as f64)),
        ("failed".to_string(), JsonValue::Num(failed as f64)),
    ];
    let mani = manifest(cfg, "oracle", started);
    fields.extend(mani.json_fields());
    print!("{}", flat_json(&fields));
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|(name, ok, detail)| {
            vec![
                name.clone(),
                if *ok { "ok" } else { "fail" }.to_string(),
                detail.replace(',', ";"),
            ]
        })
        .collect();
    write_artifact(
        cli,
        "oracle.csv",
        &csv_body(&mani, &["check", "status", "detail"], &rows),
    )?;
    if failed > 0 {
        return Err(Error::NonConvergence(format!(
            "{failed} oracle cross-checks failed"
        )));
    }
    Ok(())
}
