use clap::{Args, Parser, Subcommand, ValueEnum};
use cutoff_kpp::asym_large::{solve_basis, LargeTimeCase, LargeTimeExponents};
use cutoff_kpp::asym_small::{inner_leading, InnerCorrection, SmallTimeCoefficients};
use cutoff_kpp::harness::{
    build_id, num, run_experiment, ExperimentConfig, ExperimentKind, ReactionSelector, Table, BASIS_TOL, PTW_TOL,
};
use cutoff_kpp::ptw::shoot_speed;
use cutoff_kpp::qivp::{run, QivpParams, COARSE_DY, FINE_DY};
use cutoff_kpp::{Error, Result};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kpp-lab",
    version,
    about = "Cut-off KPP fronts: waves, moving-boundary runs and asymptotics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Travelling-wave speed and tail data.
    Ptw {
        #[command(flatten)]
        reaction: ReactionArgs,
        /// Cut-off sweep `a:b:n` (n evenly spaced values, ends included).
        #[arg(long, allow_hyphen_values = true)]
        sweep: Option<String>,
        /// Directory for ptw.csv; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moving-boundary run from step initial data.
    Simulate {
        #[command(flatten)]
        reaction: ReactionArgs,
        /// Final time.
        #[arg(long = "T", default_value_t = 30.0)]
        t_final: f64,
        /// Reference grid spacing instead of the desk-scale one.
        #[arg(long)]
        fine: bool,
        /// Profile snapshot times.
        #[arg(long, value_delimiter = ',')]
        snap: Vec<f64>,
        /// Front history sampling interval.
        #[arg(long, default_value_t = 0.01)]
        front_dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Small-time coefficients and inner profiles.
    Smalltime {
        #[command(flatten)]
        reaction: ReactionArgs,
        /// Inner-variable grid `a:b:n`.
        #[arg(long = "eta-grid", default_value = "-6:6:121", allow_hyphen_values = true)]
        eta_grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Large-time classification and exponent functions.
    Largetime {
        #[command(flatten)]
        reaction: ReactionArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs the verification experiments; exits non-zero if any judged row fails.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Experiment config files (`key=value` lines); replaces --suite.
        #[arg(long)]
        config: Vec<PathBuf>,
        /// Reference grid spacing for the speed table.
        #[arg(long)]
        fine: bool,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct ReactionArgs {
    #[arg(long, value_enum, default_value_t = ReactionName::Fisher)]
    reaction: ReactionName,
    /// Rate of the piecewise-linear reaction.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "uc", default_value_t = 0.5)]
    u_c: f64,
}

#[derive(ValueEnum, Clone, Copy)]
enum ReactionName {
    Fisher,
    Pwl,
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum Suite {
    All,
    Speeds,
    Smalltime,
    Largetime,
    Convergence,
}

impl Suite {
    fn kinds(self) -> Vec<ExperimentKind> {
        use ExperimentKind::*;
        match self {
            Suite::All => ExperimentKind::ALL.to_vec(),
            Suite::Speeds => vec![SpeedTable, SdotSigns],
            Suite::Smalltime => vec![SmalltimeFit],
            Suite::Largetime => vec![ClassificationSweep],
            Suite::Convergence => vec![PtwConvergence],
        }
    }
}

impl ReactionArgs {
    fn selector(&self) -> Result<ReactionSelector> {
        let name = match self.reaction {
            ReactionName::Fisher => "fisher",
            ReactionName::Pwl => "pwl",
        };
        ReactionSelector::parse(name, self.lambda)
    }

    fn meta(&self, sel: ReactionSelector) -> Vec<(String, String)> {
        let mut m = vec![("reaction".to_owned(), sel.name().to_owned())];
        if let ReactionSelector::PiecewiseLinear { lambda } = sel {
            m.push(("lambda".into(), format!("{lambda}")));
        }
        m.push(("u_c".into(), format!("{}", self.u_c)));
        m
    }
}

fn parse_range(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("expected a:b:n, got '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    Ok(match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    })
}

fn table(header: &[&str], preamble: Vec<(String, String)>) -> Table {
    let mut t = Table::new(header.iter().copied());
    t.note("build", build_id());
    t.preamble.extend(preamble);
    t
}

fn ptw(args: &ReactionArgs, sweep: Option<&str>, out: Option<&Path>) -> Result<bool> {
    let sel = args.selector()?;
    let cutoffs = match sweep {
        Some(s) => parse_range(s)?,
        None => vec![args.u_c],
    };
    let mut preamble = args.meta(sel);
    preamble.retain(|(k, _)| k != "u_c");
    let mut t = table(&["u_c", "v_star", "lambda_plus", "A_minus_inf", "M"], preamble);
    for u_c in cutoffs {
        let ws = shoot_speed(&sel.spec(u_c)?, PTW_TOL)?;
        t.push(vec![
            num(u_c),
            num(ws.v_star()),
            num(ws.lambda_plus()),
            num(ws.a_minus_inf()),
            num(ws.m()),
        ]);
    }
    match out {
        Some(dir) => t.write(&dir.join("ptw.csv"))?,
        None => print!("{}", t.to_csv()?),
    }
    Ok(true)
}

fn simulate(args: &ReactionArgs, t_final: f64, fine: bool, snap: &[f64], front_dt: f64, out: &Path) -> Result<bool> {
    let sel = args.selector()?;
    let dy = if fine { FINE_DY } else { COARSE_DY };
    let params = QivpParams::auto(sel.spec(args.u_c)?, dy, t_final)?
        .with_front_dt(front_dt)
        .with_samples(snap.to_vec());
    params.validate()?;
    let result = run(&params)?;

    let mut meta = String::new();
    let mut kv = vec![("build".to_owned(), build_id())];
    kv.extend(args.meta(sel));
    kv.extend([
        ("dy".into(), format!("{}", params.dy)),
        ("dt".into(), format!("{}", params.dt)),
        ("m_left".into(), format!("{}", params.m_left)),
        ("m_right".into(), format!("{}", params.m_right)),
        ("t_final".into(), format!("{}", params.t_final)),
        ("front_dt".into(), format!("{}", params.front_dt)),
        ("steps".into(), result.steps.to_string()),
        ("v_inf_estimate".into(), num(result.v_inf_estimate())),
    ]);
    for (k, v) in &kv {
        let _ = writeln!(meta, "{k}={v}");
    }
    fs::create_dir_all(out)?;
    fs::write(out.join("meta.txt"), meta)?;

    let mut profiles = table(&["t", "y", "u"], Vec::new());
    for s in &result.snapshots {
        for (y, u) in result.y.iter().zip(&s.u) {
            profiles.push(vec![num(s.t), num(*y), num(*u)]);
        }
    }
    profiles.write(&out.join("profiles.csv"))?;

    let mut front = table(&["t", "s", "sdot"], Vec::new());
    let f = &result.front;
    for k in 0..f.len() {
        front.push(vec![num(f.t[k]), num(f.s[k]), num(f.sdot[k])]);
    }
    front.write(&out.join("front.csv"))?;
    println!(
        "v_inf estimate {:.6} after {} steps",
        result.v_inf_estimate(),
        result.steps
    );
    Ok(true)
}

fn smalltime(args: &ReactionArgs, eta_grid: &str, out: &Path) -> Result<bool> {
    let sel = args.selector()?;
    let spec = sel.spec(args.u_c)?;
    let inner = InnerCorrection::new(&spec)?;
    let c: SmallTimeCoefficients = *inner.coefficients();

    let mut coeffs = table(&["u_c", "s0", "s1", "d_hat1", "d1", "d2"], args.meta(sel));
    coeffs.push(vec![
        num(c.u_c),
        num(c.s0),
        num(c.s1),
        num(c.d_hat1),
        num(c.d1),
        num(c.d2),
    ]);
    coeffs.write(&out.join("smalltime.csv"))?;

    let mut profiles = table(&["eta", "u0", "u1"], args.meta(sel));
    for eta in parse_range(eta_grid)? {
        profiles.push(vec![num(eta), num(inner_leading(c.u_c, eta)?), num(inner.eval(eta)?)]);
    }
    profiles.write(&out.join("inner_profiles.csv"))?;
    println!("s0 = {:.10}  s1 = {:.10}  d_hat1 = {:.10}", c.s0, c.s1, c.d_hat1);
    Ok(true)
}

fn largetime(args: &ReactionArgs, out: &Path) -> Result<bool> {
    let sel = args.selector()?;
    let spec = sel.spec(args.u_c)?;
    let ws = shoot_speed(&spec, PTW_TOL)?;
    let c = solve_basis(&spec, &ws, BASIS_TOL)?;

    let mut cls = table(
        &[
            "u_c",
            "v_star",
            "phi0",
            "dphi0",
            "E4_over_AL",
            "c3_over_AL",
            "case",
            "gamma",
        ],
        args.meta(sel),
    );
    if let Some(w) = &c.warning {
        cls.note("warning", w);
    }
    let case = match c.case {
        LargeTimeCase::I => "I",
        LargeTimeCase::II => "II",
    };
    cls.push(vec![
        num(args.u_c),
        num(c.v_star),
        num(c.phi_plus_0),
        num(c.dphi_plus_0),
        num(c.e4_over_al),
        num(c.c3_over_al),
        case.into(),
        num(c.gamma),
    ]);
    cls.write(&out.join("classification.csv"))?;

    let e = LargeTimeExponents::from_wave(&spec, &ws)?;
    let mut exps = table(&["w", "G0_left", "G0_right", "H"], args.meta(sel));
    let (lo, hi) = (1.5 * e.kink_left, 2.0 * e.v_star);
    for k in 0..=200 {
        let w = lo + (hi - lo) * k as f64 / 200.0;
        let cell = |ok: bool, f: &dyn Fn() -> f64| if ok { num(f()) } else { String::new() };
        exps.push(vec![
            num(w),
            cell(w < 0.0, &|| e.g0_left(w)),
            cell(w > 0.0, &|| e.g0_right(w)),
            e.h_exponent(w).map(num).unwrap_or_default(),
        ]);
    }
    exps.write(&out.join("exponents.csv"))?;
    println!(
        "v* = {:.8}  phi+(0) = {:+.6e}  E4/A_L = {:+.6e}  case {case}  gamma = {}",
        c.v_star, c.phi_plus_0, c.e4_over_al, c.gamma
    );
    if let Some(w) = &c.warning {
        eprintln!("warning: {w}");
    }
    Ok(true)
}

fn verify(suite: Suite, configs: &[PathBuf], fine: bool, workers: usize, out: &Path) -> Result<bool> {
    let mut runs = Vec::new();
    if configs.is_empty() {
        for kind in suite.kinds() {
            let mut cfg = ExperimentConfig::new(kind);
            if fine && kind == ExperimentKind::SpeedTable {
                cfg.dy = FINE_DY;
            }
            runs.push(cfg);
        }
    } else {
        for path in configs {
            runs.push(ExperimentConfig::parse(&fs::read_to_string(path)?)?);
        }
    }
    let mut all = true;
    for mut cfg in runs {
        cfg.workers = workers;
        let dir = cfg.out.clone().unwrap_or_else(|| out.to_path_buf());
        let report = run_experiment(&cfg)?;
        let path = report.write(&dir)?;
        let passed = report.passed();
        all &= passed;
        println!("[{}] {}", cfg.kind.as_str(), path.display());
        for line in report.summary() {
            println!("  {line}");
        }
        println!("{} {}", if passed { "PASS" } else { "FAIL" }, cfg.kind.as_str());
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Ptw { reaction, sweep, out } => ptw(reaction, sweep.as_deref(), out.as_deref()),
        Command::Simulate {
            reaction,
            t_final,
            fine,
            snap,
            front_dt,
            out,
        } => simulate(reaction, *t_final, *fine, snap, *front_dt, out),
        Command::Smalltime {
            reaction,
            eta_grid,
            out,
        } => smalltime(reaction, eta_grid, out),
        Command::Largetime { reaction, out } => largetime(reaction, out),
        Command::Verify {
            suite,
            config,
            fine,
            workers,
            out,
        } => verify(*suite, config, *fine, *workers, out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
