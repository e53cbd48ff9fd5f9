#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::Value;

use qslkit::bloch::{density_from_bloch, su_generators, BlochState, DensityMatrix};
use qslkit::bounds::bound_report;
use qslkit::dynamics::{
    first_hit_time, lindblad_evolve, unitary_trajectory, AngleProfile, NoiseParams, DEFAULT_DT,
};
use qslkit::experiments::{
    run_bd_test, run_fig1, run_fig2, run_fig3, run_fig6_scan, run_fig7a, BdTestConfig, ExperimentOutput,
    Fig1Config, Fig2Config, Fig3Config, Fig6Config, Fig6Sampling, Fig7aConfig, NamedSpectrum,
};
use qslkit::reachable::{pi_reach_report, s0_density, S0Descriptor};
use qslkit::spectrum::{oqsl, Spectrum};
use qslkit::table::{Cell, Table};
use qslkit::threelevel::{
    borderline_value, classify, h_minima, hit_time_els3, tau_circle_max, XYPoint,
};
use qslkit::{QslError, Result};

#[derive(Parser, Debug)]
#[command(name = "qslkit", version, about = "Quantum speed limits in the generalized Bloch representation")]
struct Cli {
    /// Base seed for Monte Carlo runs (each run has its own default).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output format; reports default to json, tables to csv.
    #[arg(long, global = true, value_enum)]
    out: Option<Format>,

    /// Numerical tolerance; meaning depends on the command.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Worker threads for parallel runs (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Nonzero entries of the SU(N) generators.
    Generators {
        #[arg(long)]
        n: usize,
        /// Only this generator (0-based).
        #[arg(long)]
        index: Option<usize>,
    },
    /// Bhatia-Davis and companion bounds for a state.
    Bounds(StateArgs),
    /// Operational speed limit Θ/(E_max − E_min).
    Oqsl {
        #[arg(long)]
        spectrum: Spectrum,
        #[arg(long, default_value_t = PI)]
        theta: f64,
    },
    /// First time the Bloch vector turns by Θ under unitary evolution.
    HitTime {
        #[command(flatten)]
        state: StateArgs,
        /// Search horizon; defaults to 50 periods of the slowest active gap.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Trajectory of the turning angle, optionally damped.
    Evolve {
        #[arg(long)]
        spectrum: Spectrum,
        #[arg(long)]
        state: String,
        #[arg(long)]
        t_max: f64,
        /// Number of output intervals.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0.0)]
        gamma0: f64,
        #[arg(long, default_value_t = 0.0)]
        nbar: f64,
        /// Integrator step for damped runs.
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        /// Include density-matrix entries in the output.
        #[arg(long)]
        keep_states: bool,
    },
    /// Structure of the spectrum that decides reachability of Θ = π.
    Reachable {
        #[arg(long)]
        spectrum: Spectrum,
        #[arg(long, default_value_t = PI)]
        theta: f64,
        /// Largest denominator in gap-ratio matching.
        #[arg(long, default_value_t = 64)]
        max_den: u64,
    },
    /// One-axis twisting.
    Oat {
        #[command(subcommand)]
        command: OatCommand,
    },
    /// Damped dynamics.
    Noise {
        #[command(subcommand)]
        command: NoiseCommand,
    },
    /// Monte Carlo checks.
    Mc {
        #[command(subcommand)]
        command: McCommand,
    },
    /// Equally spaced three-level systems.
    ThreeLevel {
        #[command(subcommand)]
        command: ThreeLevelCommand,
    },
    /// Minima of the auxiliary functions h₁ and h₂.
    HMin {
        /// Single angle; otherwise a sweep Θ = kπ/steps.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 50)]
        theta_steps: usize,
    },
}

#[derive(Args, Debug)]
struct StateArgs {
    #[arg(long)]
    spectrum: Spectrum,
    /// `pure:a,b,..` (complex entries like `1+2i`), `diag:p,q,..`,
    /// `bloch:r1,r2,..`, `eigen:k` or `s0:j,k,m,phase`.
    #[arg(long)]
    state: String,
    #[arg(long, default_value_t = PI)]
    theta: f64,
}

#[derive(Args, Debug)]
struct SaveArgs {
    /// Print this table instead of the summary.
    #[arg(long)]
    table: Option<String>,
    /// Write the summary and every table into this directory.
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum OatCommand {
    /// τ_BD against τ over the (φ, δ/χ) grid.
    Sweep {
        #[arg(long, default_value_t = 10)]
        n: u32,
        #[arg(long, default_value_t = 1.0)]
        chi: f64,
        /// `lo:hi` in units of χ.
        #[arg(long, default_value = "-20:20", allow_hyphen_values = true)]
        delta_range: String,
        #[arg(long, default_value_t = 401)]
        delta_steps: usize,
        #[arg(long, default_value_t = PI)]
        theta: f64,
        #[arg(long, default_value_t = 401)]
        phi_steps: usize,
        #[command(flatten)]
        save: SaveArgs,
    },
}

#[derive(Subcommand, Debug)]
enum NoiseCommand {
    /// Fraction of single-coherence states still reaching Θ as γ₀ grows.
    Scan {
        /// Spectrum to scan; defaults to the two five-level examples.
        #[arg(long)]
        spectrum: Option<Spectrum>,
        #[arg(long, default_value_t = 300)]
        states: usize,
        /// Comma-separated decay rates.
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        nbar: f64,
        #[arg(long, default_value_t = PI)]
        theta: f64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        /// Horizon in periods of the slowest gap.
        #[arg(long, default_value_t = 1.0)]
        horizon_periods: f64,
        #[command(flatten)]
        save: SaveArgs,
    },
}

#[derive(Subcommand, Debug)]
enum McCommand {
    /// τ_BD >= τ on random spectra and states.
    BdTest {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 2)]
        min_dim: usize,
        #[arg(long, default_value_t = 6)]
        max_dim: usize,
        #[arg(long, default_value_t = PI)]
        theta: f64,
        #[command(flatten)]
        save: SaveArgs,
    },
    /// Hit time against τ_BD for single-coherence states on random spectra.
    HitGap {
        #[arg(long, default_value_t = 20_000)]
        pairs: usize,
        #[arg(long, default_value_t = 5)]
        dim: usize,
        #[arg(long, default_value_t = 1e-3)]
        min_gap: f64,
        /// Spectra symmetric about their midpoint.
        #[arg(long)]
        symmetric: bool,
        #[arg(long, default_value_t = PI)]
        theta: f64,
        #[command(flatten)]
        save: SaveArgs,
    },
}

#[derive(Args, Debug)]
struct XYArgs {
    #[arg(long)]
    x: f64,
    #[arg(long)]
    y: f64,
    #[arg(long, default_value_t = 1.0)]
    norm2: f64,
    #[arg(long, default_value_t = PI)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    gap: f64,
}

#[derive(Subcommand, Debug)]
enum ThreeLevelCommand {
    /// Reachability of Θ and the hit time at (x, y).
    Regime(XYArgs),
    /// Whether τ_BD bounds every state at (x, y).
    Validity(XYArgs),
    /// Random states at fixed |r|², labelled by violation and region.
    Scan {
        #[arg(long, default_value_t = 1.0)]
        norm2: f64,
        #[arg(long, default_value_t = PI / 3.0)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        gap: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Sample random physical states instead of (x, y) points.
        #[arg(long)]
        physical: bool,
        #[command(flatten)]
        save: SaveArgs,
    },
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| QslError::Parse(format!("{p:?}: {e}"))))
        .collect()
}

fn parse_state(spec: &str, dim: usize) -> Result<DensityMatrix> {
    let (kind, body) = spec.split_once(':').ok_or_else(|| QslError::Parse(format!("state {spec:?} needs a kind prefix")))?;
    let rho = match kind {
        "pure" => {
            let amps: Vec<C64> = body
                .split(',')
                .map(|p| p.trim().parse::<C64>().map_err(|e| QslError::Parse(format!("amplitude {p:?}: {e}"))))
                .collect::<Result<_>>()?;
            let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(QslError::InvalidState("zero amplitude vector".into()));
            }
            DensityMatrix::from_pure(&amps.iter().map(|z| z / norm).collect::<Vec<_>>())?
        }
        "diag" => DensityMatrix::diagonal(&parse_list(body)?)?,
        "bloch" => density_from_bloch(&BlochState::from_components(parse_list(body)?)?),
        "eigen" => {
            let k = body.trim().parse::<usize>().map_err(|e| QslError::Parse(format!("level {body:?}: {e}")))?;
            DensityMatrix::eigenstate(dim, k)?
        }
        "s0" => {
            let v = parse_list(body)?;
            if v.len() != 4 || v[0] < 0.0 || v[1] < 0.0 || v[0].fract() != 0.0 || v[1].fract() != 0.0 {
                return Err(QslError::Parse("s0 takes j,k,magnitude,phase".into()));
            }
            s0_density(&S0Descriptor::new(dim, (v[0] as usize, v[1] as usize), v[2], v[3])?)?
        }
        _ => return Err(QslError::Parse(format!("unknown state kind {kind:?}"))),
    };
    if rho.dim() != dim {
        return Err(QslError::DimensionMismatch { expected: dim, got: rho.dim() });
    }
    Ok(rho)
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(':').ok_or_else(|| QslError::Parse(format!("range {s:?} must be lo:hi")))?;
    let parse = |p: &str| p.trim().parse::<f64>().map_err(|e| QslError::Parse(format!("{p:?}: {e}")));
    Ok((parse(a)?, parse(b)?))
}

/// Flat JSON object as a one-row table; nested values are embedded as JSON.
fn record_table(v: &Value) -> Result<Table> {
    let obj = v.as_object().ok_or_else(|| QslError::Domain("report is not an object".into()))?;
    let mut t = Table::new(obj.keys().cloned());
    let row = obj
        .values()
        .map(|x| match x {
            Value::Null => Cell::Num(f64::NAN),
            Value::Bool(b) => Cell::Bool(*b),
            Value::Number(n) => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
            Value::String(s) if s == "inf" => Cell::Num(f64::INFINITY),
            Value::String(s) => Cell::Text(s.clone()),
            other => Cell::Text(other.to_string()),
        })
        .collect();
    t.push(row)?;
    Ok(t)
}

struct Printer {
    out: Option<Format>,
}

impl Printer {
    fn report<T: Serialize>(&self, value: &T) -> Result<()> {
        let v = serde_json::to_value(value)?;
        match self.out.unwrap_or(Format::Json) {
            Format::Json => emit_json(&v),
            Format::Csv => record_table(&v)?.write_csv(io::stdout().lock()),
        }
    }

    fn table(&self, t: &Table) -> Result<()> {
        match self.out.unwrap_or(Format::Csv) {
            Format::Csv => t.write_csv(io::stdout().lock()),
            Format::Json => emit_json(&serde_json::to_value(t)?),
        }
    }

    fn experiment(&self, out: &ExperimentOutput, save: &SaveArgs) -> Result<()> {
        if let Some(dir) = &save.save {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&out.summary)?)?;
            for (name, t) in &out.tables {
                t.write_csv(fs::File::create(dir.join(format!("{name}.csv")))?)?;
            }
        }
        match &save.table {
            Some(name) => {
                let t = out.table(name).ok_or_else(|| {
                    let known: Vec<&str> = out.tables.iter().map(|(n, _)| n.as_str()).collect();
                    QslError::InvalidParameter(format!("no table {name:?}; available: {}", known.join(", ")))
                })?;
                self.table(t)
            }
            None => match self.out.unwrap_or(Format::Json) {
                Format::Json => emit_json(&serde_json::to_value(&out.summary)?),
                Format::Csv => out.summary.to_table().write_csv(io::stdout().lock()),
            },
        }
    }
}

fn emit_json(v: &Value) -> Result<()> {
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, v)?;
    writeln!(stdout)?;
    Ok(())
}

#[derive(Serialize)]
struct OqslOut {
    tau: f64,
}

#[derive(Serialize)]
struct HitTimeOut {
    theta: f64,
    t: Option<f64>,
    horizon: f64,
}

#[derive(Serialize)]
struct RegimeOut {
    x: f64,
    y: f64,
    in_s: bool,
    region: qslkit::threelevel::Region,
    t: Option<f64>,
    tau_m: f64,
}

#[derive(Serialize)]
struct ValidityOut {
    x: f64,
    y: f64,
    bd_valid: bool,
    borderline: f64,
    tau_m: f64,
}

#[derive(Serialize)]
struct HMinOut {
    theta: f64,
    min_h1: f64,
    min_h2: f64,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(QslError::InvalidParameter("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| QslError::Domain(format!("thread pool: {e}")))?;
    }
    let p = Printer { out: cli.out };
    let seed = cli.seed;
    match cli.command {
        Command::Generators { n, index } => {
            let gens = su_generators(n)?;
            let range = match index {
                Some(i) if i >= gens.len() => {
                    return Err(QslError::InvalidParameter(format!("index {i} out of range for {} generators", gens.len())))
                }
                Some(i) => i..i + 1,
                None => 0..gens.len(),
            };
            let mut t = Table::new(["index", "row", "col", "re", "im"]);
            for i in range {
                let m = gens.get(i);
                for r in 0..n {
                    for c in 0..n {
                        let z = m[(r, c)];
                        if z != C64::new(0.0, 0.0) {
                            t.push(vec![i.into(), r.into(), c.into(), z.re.into(), z.im.into()])?;
                        }
                    }
                }
            }
            p.table(&t)
        }
        Command::Bounds(a) => {
            let rho = parse_state(&a.state, a.spectrum.dim())?;
            p.report(&bound_report(&rho, &a.spectrum, a.theta)?)
        }
        Command::Oqsl { spectrum, theta } => p.report(&OqslOut { tau: oqsl(&spectrum, theta)? }),
        Command::HitTime { state: a, horizon } => {
            let rho = parse_state(&a.state, a.spectrum.dim())?;
            let profile = AngleProfile::from_density(&rho, &a.spectrum)?;
            let horizon = match horizon.or_else(|| profile.default_horizon()) {
                Some(h) => h,
                None => return p.report(&HitTimeOut { theta: a.theta, t: None, horizon: 0.0 }),
            };
            let tol = cli.tol.unwrap_or(1e-12);
            let t = first_hit_time(&rho, &a.spectrum, a.theta, horizon, tol)?;
            p.report(&HitTimeOut { theta: a.theta, t, horizon })
        }
        Command::Evolve { spectrum, state, t_max, steps, gamma0, nbar, dt, keep_states } => {
            if !(t_max > 0.0) || steps == 0 {
                return Err(QslError::InvalidParameter("need t_max > 0 and steps > 0".into()));
            }
            let rho = parse_state(&state, spectrum.dim())?;
            let times: Vec<f64> = (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect();
            let traj = if gamma0 == 0.0 && nbar == 0.0 {
                unitary_trajectory(&rho, &spectrum, &times, keep_states)?
            } else {
                lindblad_evolve(&rho, &spectrum, NoiseParams::new(gamma0, nbar)?, &times, dt, keep_states)?
            };
            match p.out.unwrap_or(Format::Csv) {
                Format::Csv => traj.write_csv(io::stdout().lock()),
                Format::Json => emit_json(&serde_json::to_value(traj.to_table())?),
            }
        }
        Command::Reachable { spectrum, theta, max_den } => {
            if (theta - PI).abs() > 1e-12 {
                return Err(QslError::InvalidParameter("reachable-set structure is defined for Θ = π".into()));
            }
            p.report(&pi_reach_report(&spectrum, max_den, cli.tol.unwrap_or(1e-9)))
        }
        Command::Oat { command: OatCommand::Sweep { n, chi, delta_range, delta_steps, theta, phi_steps, save } } => {
            let (lo, hi) = parse_range(&delta_range)?;
            let cfg = Fig1Config {
                n,
                chi,
                theta,
                phi_steps,
                delta_min: lo,
                delta_max: hi,
                delta_steps,
                curve_ns: vec![n],
                ..Fig1Config::default()
            };
            let out = run_fig1(&cfg)?;
            let save = SaveArgs { table: save.table.or_else(|| Some("grid".into())), save: save.save };
            p.experiment(&out, &save)
        }
        Command::Noise {
            command: NoiseCommand::Scan { spectrum, states, gammas, nbar, theta, dt, horizon_periods, save },
        } => {
            let mut cfg = Fig2Config { states, nbar, theta, dt, horizon_periods, ..Fig2Config::default() };
            if let Some(sp) = spectrum {
                cfg.spectra = vec![NamedSpectrum { name: "H".into(), spectrum: sp }];
            }
            if let Some(g) = gammas {
                cfg.gammas = g;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(tol) = cli.tol {
                cfg.tol = tol;
            }
            p.experiment(&run_fig2(&cfg)?, &save)
        }
        Command::Mc { command: McCommand::BdTest { samples, min_dim, max_dim, theta, save } } => {
            let mut cfg = BdTestConfig { samples, min_dim, max_dim, theta, ..BdTestConfig::default() };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            p.experiment(&run_bd_test(&cfg)?, &save)
        }
        Command::Mc { command: McCommand::HitGap { pairs, dim, min_gap, symmetric, theta, save } } => {
            let mut cfg = Fig3Config { pairs, dim, min_gap, symmetric, theta, ..Fig3Config::default() };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            p.experiment(&run_fig3(&cfg)?, &save)
        }
        Command::ThreeLevel { command } => match command {
            ThreeLevelCommand::Regime(a) => {
                let pt = XYPoint::new(a.x, a.y, a.norm2)?;
                let v = classify(&pt, a.theta, a.gap)?;
                p.report(&RegimeOut {
                    x: a.x,
                    y: a.y,
                    in_s: v.in_s,
                    region: v.region,
                    t: hit_time_els3(&pt, a.theta, a.gap)?,
                    tau_m: tau_circle_max(&pt, a.theta, a.gap)?,
                })
            }
            ThreeLevelCommand::Validity(a) => {
                let pt = XYPoint::new(a.x, a.y, a.norm2)?;
                p.report(&ValidityOut {
                    x: a.x,
                    y: a.y,
                    bd_valid: classify(&pt, a.theta, a.gap)?.bd_valid,
                    borderline: borderline_value(&pt, a.theta, a.gap)?,
                    tau_m: tau_circle_max(&pt, a.theta, a.gap)?,
                })
            }
            ThreeLevelCommand::Scan { norm2, theta, gap, samples, physical, save } => {
                let sampling = if physical { Fig6Sampling::States } else { Fig6Sampling::Points };
                let mut cfg = Fig6Config { norm2, theta, gap, samples, sampling, ..Fig6Config::default() };
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                p.experiment(&run_fig6_scan(&cfg)?, &save)
            }
        },
        Command::HMin { theta: Some(theta), .. } => {
            let (min_h1, min_h2) = h_minima(theta)?;
            p.report(&HMinOut { theta, min_h1, min_h2 })
        }
        Command::HMin { theta: None, theta_steps } => {
            if theta_steps == 0 {
                return Err(QslError::InvalidParameter("--theta-steps must be positive".into()));
            }
            let out = run_fig7a(&Fig7aConfig { theta_steps })?;
            p.table(out.table("minima").expect("fig7a table"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream closed the pipe (e.g. `| head`)
        Err(QslError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(QslError::Csv(e)) if matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
