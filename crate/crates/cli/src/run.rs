//! Command dispatch and report rendering.
//!
//! Reports are deterministic: identical configurations produce byte-identical
//! bytes. Every report embeds the artifact version and the full config echo.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use hsystem_core::spectral::scan::{ScanConfig, SpectrumReport};
use hsystem_core::spectral::shoot;
use hsystem_core::{
    assemble_pencil, bubble_energy, build_grid, classify_mode, decay_exponent, hsystem_residual,
    linearized_residual, polar_identity_gap, radial_residual_analytic, reduce_to_radial,
    scan_spectrum, solve_pencil, zero_mode_decay_bounds, Chart, Classification, GridMap,
    KelvinProfiles, PlanarPoint, RadialMode, RadialProfiles, SeriesSeed, ZeroMode,
};

use crate::config::{CommandName, OutputFormat, RunConfig};

/// Failure classes map onto the process exit codes (1 config, 2 numerical).
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Config(m) | RunError::Numerical(m) => m,
        }
    }
}

impl From<hsystem_core::Error> for RunError {
    fn from(e: hsystem_core::Error) -> Self {
        RunError::Numerical(e.to_string())
    }
}

fn fmt_f(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{:+.9e}", x)
    }
}

pub fn version_line() -> String {
    format!(
        "{} / hsystem-cli {}",
        hsystem_core::VERSION,
        env!("CARGO_PKG_VERSION")
    )
}

fn header(config: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# hsystem report: {}", config.command.as_str());
    let _ = writeln!(out, "# version: {}", version_line());
    let _ = writeln!(out, "# config:");
    out.push_str(&config.echo());
    out
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn deterministic_points(count: usize, radius: f64, seed: u64) -> Vec<PlanarPoint> {
    let mut rng = hsystem_core::util::XorShift64::new(seed);
    (0..count)
        .map(|_| {
            PlanarPoint::new(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
                .expect("finite")
        })
        .collect()
}

/// Run a configuration; returns the rendered report.
pub fn run(config: &RunConfig) -> Result<String, RunError> {
    config.validate().map_err(RunError::Config)?;
    let mut report = header(config);
    match config.command {
        CommandName::Bubble => run_bubble(config, &mut report)?,
        CommandName::Energy => run_energy(config, &mut report)?,
        CommandName::Zeromode => run_zeromode(config, &mut report)?,
        CommandName::Reduce => run_reduce(config, &mut report)?,
        CommandName::Spectrum => run_spectrum(config, &mut report)?,
        CommandName::Scan => run_scan(config, &mut report)?,
        CommandName::Series => run_series(config, &mut report)?,
        CommandName::Shoot => run_shoot(config, &mut report)?,
    }
    Ok(report)
}

/// Write the report (and nothing else) to the configured sink.
pub fn emit(config: &RunConfig, report: &str) -> Result<(), RunError> {
    match &config.out {
        Some(path) => fs::write(path, report)
            .map_err(|e| RunError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(report.as_bytes())
                .map_err(|e| RunError::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

fn write_csv_file(path: &Path, content: &str) -> Result<(), RunError> {
    fs::write(path, content)
        .map_err(|e| RunError::Config(format!("cannot write {}: {e}", path.display())))
}

fn run_bubble(config: &RunConfig, out: &mut String) -> Result<(), RunError> {
    let m = config.degree;
    let prof = hsystem_core::BubbleProfile::new(m, Chart::R)?;
    let radii = log_spaced(1e-2, 1e2, 25);
    let _ = writeln!(out, "degree: {m}");
    let _ = writeln!(
        out,
        "{:<18} {:<18} {:<18} {:<18} {:<18}",
        "r", "F", "G", "dF", "dG"
    );
    let mut unit_worst = 0.0f64;
    for &r in &radii {
        let (f, g) = (prof.f(r), prof.g(r));
        unit_worst = unit_worst.max((f * f + g * g - 1.0).abs());
        let _ = writeln!(
            out,
            "{:<18} {:<18} {:<18} {:<18} {:<18}",
            fmt_f(r),
            fmt_f(f),
            fmt_f(g),
            fmt_f(prof.df(r)),
            fmt_f(prof.dg(r))
        );
    }
    let pts = deterministic_points(200, 10.0, 0xB0B);
    let residual = hsystem_residual(m, &pts)?;
    let _ = writeln!(out, "max |F^2+G^2-1| over samples: {}", fmt_f(unit_worst));
    let _ = writeln!(
        out,
        "h-system residual (200 points, |z|<=10): {}",
        fmt_f(residual)
    );
    if let Some(csv) = &config.csv {
        let mut body = String::from("r,F,G\n");
        for &r in &radii {
            let _ = writeln!(body, "{},{},{}", r, prof.f(r), prof.g(r));
        }
        write_csv_file(csv, &body)?;
        let _ = writeln!(out, "csv: {}", csv.display());
    }
    Ok(())
}

fn run_energy(config: &RunConfig, out: &mut String) -> Result<(), RunError> {
    let m = config.degree;
    let e = bubble_energy(m)?;
    let exact = 8.0 * std::f64::consts::PI * m as f64;
    let _ = writeln!(out, "degree: {m}");
    let _ = writeln!(out, "dirichlet energy: {}", fmt_f(e.value));
    let _ = writeln!(
        out,
        "quadrature error estimate: {}",
        fmt_f(e.error_estimate)
    );
    let _ = writeln!(out, "8*pi*m: {}", fmt_f(exact));
    let _ = writeln!(
        out,
        "relative error: {}",
        fmt_f((e.value - exact).abs() / exact)
    );
    Ok(())
}

fn run_zeromode(config: &RunConfig, out: &mut String) -> Result<(), RunError> {
    let m = config.degree;
    let zm = ZeroMode::new(m)?;
    let _ = writeln!(out, "degree: {m}");
    let _ = writeln!(out, "{:<18} {:<18} {:<18}", "r", "f0", "g0");
    for &r in &log_spaced(1e-2, 1e2, 25) {
        let _ = writeln!(
            out,
            "{:<18} {:<18} {:<18}",
            fmt_f(r),
            fmt_f(zm.f(r)),
            fmt_f(zm.g(r))
        );
    }
    let pts = deterministic_points(200, 6.0, 0x2E20);
    let residual = linearized_residual(m, 0.0, &zm.field(), &pts)?;
    let _ = writeln!(out, "linearized residual at lambda=0: {}", fmt_f(residual));
    let bounds = zero_mode_decay_bounds(m)?;
    let _ = writeln!(out, "decay upper constant c1: {}", fmt_f(bounds.c_upper));
    let _ = writeln!(out, "decay lower constant c2: {}", fmt_f(bounds.c_lower));
    let _ = writeln!(out, "log-log slope on [10,1e3]: {}", fmt_f(bounds.slope));
    let _ = writeln!(
        out,
        "square-integrable on the plane: {}",
        if m >= 2 { "yes" } else { "no (resonance)" }
    );
    if let Some(csv) = &config.csv {
        let mut nodes = vec![0.0];
        nodes.extend(log_spaced(1e-3, 1e3, 400));
        let grid = Arc::new(hsystem_core::RadialGrid::from_nodes(nodes)?);
        let mode = RadialMode::sample(&zm, grid, m, Chart::R)?;
        let mut body = Vec::new();
        hsystem_core::write_mode_csv(&mode, &mut body)
            .map_err(|e| RunError::Config(e.to_string()))?;
        write_csv_file(csv, std::str::from_utf8(&body).expect("utf8"))?;
        let _ = writeln!(out, "csv: {}", csv.display());
    }
    Ok(())
}

fn run_reduce(config: &RunConfig, out: &mut String) -> Result<(), RunError> {
    let m = config.degree;
    let lambda = match &config.lambda {
        Some(l) => l.as_f64().map_err(RunError::Config)?,
        None => 0.0,
    };
    let chart = config.chart.map(|c| c.to_chart()).unwrap_or(Chart::R);
    let sys = reduce_to_radial(m, lambda, chart)?;
    let _ = writeln!(out, "degree: {m}");
    let _ = writeln!(out, "lambda: {}", fmt_f(lambda));
    let _ = writeln!(out, "chart: {}", chart.name());
    let _ = writeln!(
        out,
        "{:<18} {:<18} {:<18} {:<18} {:<18} {:<18}",
        "x", "f_on_f", "dg_on_f", "f_on_g", "df_on_g", "rho"
    );
    for &x in &log_spaced(1e-2, 1e2, 17) {
        let c = sys.coefficients(x);
        let _ = writeln!(
            out,
            "{:<18} {:<18} {:<18} {:<18} {:<18} {:<18}",
            fmt_f(x),
            fmt_f(c.f_on_f),
            fmt_f(c.dg_on_f),
            fmt_f(c.f_on_g),
            fmt_f(c.df_on_g),
            fmt_f(c.rho)
        );
    }
    // the executable sign fixture: the dilation mode must annihilate the
    // system at lambda = 0
    let sys0 = reduce_to_radial(m, 0.0, chart)?;
    let zm = ZeroMode::new(m)?;
    let xs = log_spaced(1e-3, 1e3, 400);
    let res = match chart {
        Chart::R => radial_residual_analytic(&zm, &sys0, &xs),
        Chart::KelvinT => radial_residual_analytic(&KelvinProfiles(zm), &sys0, &xs),
    };
    let _ = writeln!(out, "zero-mode residual at lambda=0: {}", fmt_f(res));
    let pts = deterministic_points(100, 4.0, 0x9019);
    let mut gap = 0.0f64;
    for p in &pts {
        if p.r() > 0.05 {
            gap = gap.max(polar_identity_gap(m, &zm, *p)?);
        }
    }
    let _ = writeln!(out, "polar identity gap (100 points): {}", fmt_f(gap));
    Ok(())
}

fn mode_table(records: &[(f64, f64, f64, Option<f64>, Classification)], out: &mut String) {
    let _ = writeln!(
        out,
        "{:<18} {:<18} {:<18} {:<18} {:<11}",
        "lambda", "alpha", "fit_residual", "drift", "class"
    );
    for (lambda, alpha, fit, drift, class) in records {
        let drift_text = match drift {
            Some(d) => fmt_f(*d),
            None => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "{:<18} {:<18} {:<18} {:<18} {:<11}",
            fmt_f(*lambda),
            fmt_f(*alpha),
            fmt_f(*fit),
            drift_text,
            class.name()
        );
    }
}

fn run_spectrum(config: &RunConfig, out: &mut String) -> Result<(), RunError> {
    let m = config.degree;
    let n = config.grid.unwrap_or(2000);
    let map = config
        .map
        .map(|m| m.to_grid_map())
        .unwrap_or(GridMap::Rational);
    let window = config.window.unwrap_or((-30.0, 30.0));
    let grid = Arc::new(build_grid(n, map)?);
    let prob = assemble_pencil(m, &grid, true)?;
    let modes = solve_pencil(&prob, window)?;
    let _ = writeln!(out, "degree: {m}");
    let _ = writeln!(out, "grid: {n} ({})", map.name());
    let _ = writeln!(out, "window: [{}, {}]", fmt_f(window.0), fmt_f(window.1));
    let _ = writeln!(out, "unknowns: {}", prob.n_unknowns());
    let _ = writeln!(out, "modes found: {}", modes.len());
    let mut rows = Vec::new();
    for em in &modes {
        let (alpha, fitres) = match decay_exponent(&em.mode) {
            Ok(fit) => (fit.alpha, fit.fit_residual),
            Err(_) => (f64::NAN, f64::NAN),
        };
        let fit = hsystem_core::spectral::DecayFit {
            alpha,
            fit_residual: fitres,
            window: (0.0, 0.0),
            nodes_used: 0,
        };
        let class = if alpha.is_nan() {
            Classification::Spurious
        } else {
            // single solve: no refinement drift available
            classify_mode(em.lambda, &fit, 0.0)
        };
        rows.push((em.lambda, alpha, fitres, None, class));
    }
    mode_table(&rows, out);
    let _ = writeln!(
        out,
        "note: single-grid solve; run `scan` for the drift-filtered classification"
    );
    Ok(())
}

fn scan_config_of(config: &RunConfig) -> Result<ScanConfig, RunError> {
    Ok(ScanConfig {
        m: config.degree,
        window: config.window.expect("validated"),
        n_list: config.grids.clone().expect("validated"),
        maps: config
            .maps
            .clone()
            .unwrap_or_else(|| {
                vec![
                    crate::config::MapName::Rational,
                    crate::config::MapName::Stereographic,
                ]
            })
            .into_iter()
            .map(|m| m.to_grid_map())
            .collect(),
    })
}

fn run_scan(config: &RunConfig, out: &mut String) -> Result<(), RunError> {
    let sc = scan_config_of(config)?;
    let report = scan_spectrum(&sc)?;
    out.push_str(&report.render(&version_line()));
    if let Some(dir) = &config.csv_dir {
        fs::create_dir_all(dir)
            .map_err(|e| RunError::Config(format!("cannot create {}: {e}", dir.display())))?;
        let files = dump_mode_csvs(&report, dir)?;
        let _ = writeln!(
            out,
            "mode profiles: {} csv files in {}",
            files.len(),
            dir.display()
        );
        if let Some(script) = &config.plot_script {
            write_plot_script(script, &files)?;
            let _ = writeln!(out, "plot script: {}", script.display());
        }
    }
    Ok(())
}

fn dump_mode_csvs(report: &SpectrumReport, dir: &Path) -> Result<Vec<String>, RunError> {
    let mut files = Vec::new();
    for (i, mode) in report.modes.iter().enumerate() {
        let name = format!("mode_{i:03}.csv");
        let mut body = Vec::new();
        hsystem_core::write_mode_csv(mode, &mut body)
            .map_err(|e| RunError::Config(e.to_string()))?;
        write_csv_file(&dir.join(&name), std::str::from_utf8(&body).expect("utf8"))?;
        files.push(name);
    }
    Ok(files)
}

fn write_plot_script(path: &Path, files: &[String]) -> Result<(), RunError> {
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str("# plots the mode profiles dumped next to this script\n");
    s.push_str("import csv\n");
    s.push_str("import matplotlib\n");
    s.push_str("matplotlib.use(\"Agg\")\n");
    s.push_str("import matplotlib.pyplot as plt\n\n");
    s.push_str("files = [\n");
    for f in files {
        let _ = writeln!(s, "    {f:?},");
    }
    s.push_str("]\n\n");
    s.push_str(
        "fig, (axf, axg) = plt.subplots(1, 2, figsize=(11, 4.5))\n\
         for path in files:\n\
             rs, fs, gs = [], [], []\n\
             with open(path) as fh:\n\
                 for row in csv.DictReader(fh):\n\
                     r = float(row[\"r\"])\n\
                     if r == 0.0 or r == float(\"inf\"):\n\
                         continue\n\
                     rs.append(r)\n\
                     fs.append(float(row[\"f\"]))\n\
                     gs.append(float(row[\"g\"]))\n\
             axf.plot(rs, fs, lw=0.8, label=path)\n\
             axg.plot(rs, gs, lw=0.8)\n\
         for ax, title in ((axf, \"f\"), (axg, \"g\")):\n\
             ax.set_xscale(\"log\")\n\
             ax.set_xlabel(\"r\")\n\
             ax.set_title(title)\n\
         axf.legend(fontsize=6)\n\
         fig.tight_layout()\n\
         fig.savefig(\"modes.png\", dpi=150)\n\
         print(\"wrote modes.png\")\n",
    );
    write_csv_file(path, &s)
}

fn run_series(config: &RunConfig, out: &mut String) -> Result<(), RunError> {
    let lambda = match &config.lambda {
        Some(l) => l.as_rational().map_err(RunError::Config)?,
        None => hsystem_core::series::rat(0),
    };
    let seed = match &config.seed {
        Some([a0, a1, b0, b1]) => SeriesSeed {
            a0: hsystem_core::series::parse_rational(a0)?,
            a1: hsystem_core::series::parse_rational(a1)?,
            b0: hsystem_core::series::parse_rational(b0)?,
            b1: hsystem_core::series::parse_rational(b1)?,
        },
        None => SeriesSeed::zero(),
    };
    let order = config.order.unwrap_or(50);
    let state = hsystem_core::series_run(&seed, &lambda, order);
    let mut csv = Vec::new();
    hsystem_core::write_series_csv(&state, &mut csv)
        .map_err(|e| RunError::Config(e.to_string()))?;
    let csv = String::from_utf8(csv).expect("utf8");
    match config.format {
        OutputFormat::Csv => {
            // config echo lives in comment rows so the CSV stays parseable
            out.push_str(&csv);
        }
        OutputFormat::StructuredText => {
            let _ = writeln!(out, "lambda: {lambda}");
            let _ = writeln!(out, "order: {order}");
            let all_zero = state.a.iter().all(|c| c == &hsystem_core::series::rat(0))
                && state.b.iter().all(|c| c == &hsystem_core::series::rat(0));
            let _ = writeln!(out, "all coefficients zero: {all_zero}");
            out.push_str(&csv);
        }
    }
    if let Some(path) = &config.csv {
        write_csv_file(path, &csv)?;
    }
    Ok(())
}

fn run_shoot(config: &RunConfig, out: &mut String) -> Result<(), RunError> {
    let m = config.degree;
    let lambda = match &config.lambda {
        Some(l) => l.as_f64().map_err(RunError::Config)?,
        None => 0.0,
    };
    let g0 = config.g0.unwrap_or(0.0);
    let mm = shoot::shoot_mismatch(m, lambda, g0)?;
    let _ = writeln!(out, "degree: {m}");
    let _ = writeln!(out, "lambda: {}", fmt_f(lambda));
    let _ = writeln!(out, "g0: {}", fmt_f(g0));
    let _ = writeln!(out, "mismatch f-channel: {}", fmt_f(mm[0]));
    let _ = writeln!(out, "mismatch g-channel: {}", fmt_f(mm[1]));
    let _ = writeln!(out, "mismatch norm: {}", fmt_f(mm[0].hypot(mm[1])));
    if m == 1 {
        let _ = writeln!(
            out,
            "note: degree 1 has no square-integrable branch at infinity; the defect is the full outgoing state"
        );
    }
    Ok(())
}
