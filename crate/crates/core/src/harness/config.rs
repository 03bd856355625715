use crate::qivp::{COARSE_DY, FINE_DY};
use crate::reaction::ReactionSpec;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    SpeedTable,
    SdotSigns,
    SmalltimeFit,
    PtwConvergence,
    ClassificationSweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        Self::SpeedTable,
        Self::SdotSigns,
        Self::SmalltimeFit,
        Self::PtwConvergence,
        Self::ClassificationSweep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SpeedTable => "speed_table",
            Self::SdotSigns => "sdot_signs",
            Self::SmalltimeFit => "smalltime_fit",
            Self::PtwConvergence => "ptw_convergence",
            Self::ClassificationSweep => "classification_sweep",
        }
    }

    /// Cut-offs run when the config does not list any.
    pub fn default_cutoffs(self) -> Vec<f64> {
        let grid = || (1..=9).map(|k| k as f64 / 10.0).collect();
        match self {
            Self::SpeedTable | Self::ClassificationSweep => grid(),
            Self::SdotSigns => vec![0.1, 0.45, 0.5, 0.55, 0.9],
            Self::SmalltimeFit => vec![0.3, 0.5, 0.7],
            Self::PtwConvergence => vec![0.1, 0.5, 0.9],
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReactionSelector {
    Fisher,
    PiecewiseLinear { lambda: f64 },
}

impl ReactionSelector {
    pub fn parse(name: &str, lambda: Option<f64>) -> Result<Self> {
        match (name, lambda) {
            ("fisher", None) => Ok(Self::Fisher),
            ("fisher", Some(_)) => Err(Error::Config("lambda only applies to the pwl reaction".into())),
            ("pwl", l) => Ok(Self::PiecewiseLinear {
                lambda: l.unwrap_or(1.0),
            }),
            _ => Err(Error::Config(format!(
                "unknown reaction '{name}' (expected fisher or pwl)"
            ))),
        }
    }

    pub fn spec(&self, u_c: f64) -> Result<ReactionSpec> {
        match *self {
            Self::Fisher => ReactionSpec::fisher(u_c),
            Self::PiecewiseLinear { lambda } => ReactionSpec::piecewise_linear(lambda, u_c),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fisher => "fisher",
            Self::PiecewiseLinear { .. } => "pwl",
        }
    }
}

macro_rules! thresholds {
    ($($(#[doc = $doc:literal])* $name:ident = $default:expr;)*) => {
        /// Every pass/fail tolerance used by the experiments. Each can be
        /// overridden from a config file as `threshold.<name>=<value>`.
        #[derive(Clone, Debug, PartialEq)]
        pub struct Thresholds {
            $($(#[doc = $doc])* pub $name: f64,)*
        }

        impl Default for Thresholds {
            fn default() -> Self {
                Self { $($name: $default,)* }
            }
        }

        impl Thresholds {
            pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
                match name {
                    $(stringify!($name) => self.$name = value,)*
                    _ => return Err(Error::Config(format!("unknown threshold '{name}'"))),
                }
                Ok(())
            }

            pub fn entries(&self) -> Vec<(&'static str, f64)> {
                vec![$((stringify!($name), self.$name),)*]
            }
        }
    };
}

thresholds! {
    /// `|v_inf - v*|`.
    speed_vs_ptw = 0.01;
    /// `|v_inf - reference|` when `dy` is coarser than the fine grid.
    speed_vs_reference_coarse = 0.02;
    /// `|v_inf - reference|` on the fine grid.
    speed_vs_reference_fine = 0.005;
    /// `|a|` when `s0 = 0`.
    smalltime_a_zero = 0.02;
    /// `|a / s0 - 1|` otherwise.
    smalltime_a_rel = 0.02;
    /// `|b - 0.28|` at `u_c = 1/2`.
    smalltime_b_abs = 0.05;
    /// `|b / s1 - 1|` at `u_c = 1/2`.
    smalltime_s1_rel = 0.15;
    /// Upper bound on `e(20) / e(10)`.
    convergence_ratio = 0.5;
    /// Snapshots before this time are reported but not judged.
    pre_asymptotic_t = 1.0;
    /// `|sdot|` at the start of a trace below which it counts as flat.
    sdot_flat = 0.2;
    /// Excursions of `sdot` smaller than this are treated as noise.
    sdot_noise = 0.01;
    /// Allowed factor between the observed and predicted time of minimum speed.
    minimum_factor = 3.0;
    /// `phi_+(0)` and `phi_+'(0)` against the pwl closed form.
    basis_closed_form = 1e-8;
}

/// One experiment, as read from a `key=value` config file.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub reaction: ReactionSelector,
    pub u_c: Vec<f64>,
    pub dy: f64,
    /// Overrides the per-experiment final time.
    pub t_final: Option<f64>,
    pub front_dt: f64,
    /// Cut-offs whose convergence checks count towards pass/fail.
    pub convergence_gate: Vec<f64>,
    /// Worker threads; 0 picks the available parallelism.
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub thresholds: Thresholds,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            reaction: ReactionSelector::Fisher,
            u_c: kind.default_cutoffs(),
            dy: if kind == ExperimentKind::SmalltimeFit {
                FINE_DY
            } else {
                COARSE_DY
            },
            t_final: None,
            front_dt: if kind == ExperimentKind::SmalltimeFit {
                1e-3
            } else {
                0.01
            },
            convergence_gate: vec![0.5],
            workers: 0,
            out: None,
            thresholds: Thresholds::default(),
        }
    }

    /// Parses `key=value` lines. Blank lines and lines starting with `#` are
    /// skipped. `kind` must come first if present, since it sets the defaults
    /// the other keys override.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: Option<Self> = None;
        let mut reaction: Option<String> = None;
        let mut lambda = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got '{line}'", n + 1)))?;
            if key == "kind" {
                if cfg.is_some() {
                    return Err(Error::Config(format!("line {}: kind must be the first key", n + 1)));
                }
                cfg = Some(Self::new(value.parse()?));
                continue;
            }
            let c = cfg.get_or_insert_with(|| Self::new(ExperimentKind::SpeedTable));
            let num = || parse_f64(key, value);
            match key {
                "reaction" => reaction = Some(value.to_owned()),
                "lambda" => lambda = Some(num()?),
                "u_c" => {
                    c.u_c = parse_list(key, value)?;
                }
                "dy" => c.dy = num()?,
                "fine" => {
                    if parse_bool(key, value)? {
                        c.dy = FINE_DY;
                    }
                }
                "t_final" => c.t_final = Some(num()?),
                "front_dt" => c.front_dt = num()?,
                "convergence_gate" => c.convergence_gate = parse_list(key, value)?,
                "workers" => {
                    c.workers = value
                        .parse()
                        .map_err(|_| Error::Config(format!("workers: '{value}' is not a count")))?
                }
                "out" => c.out = Some(PathBuf::from(value)),
                _ => match key.strip_prefix("threshold.") {
                    Some(name) => c.thresholds.set(name, num()?)?,
                    None => return Err(Error::Config(format!("line {}: unknown key '{key}'", n + 1))),
                },
            }
        }
        let mut cfg = cfg.ok_or_else(|| Error::Config("empty config".into()))?;
        if let Some(name) = reaction {
            cfg.reaction = ReactionSelector::parse(&name, lambda)?;
        } else if lambda.is_some() {
            cfg.reaction = ReactionSelector::parse("pwl", lambda)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&u) = self.u_c.iter().find(|&&u| !(u > 0.0 && u < 1.0)) {
            return Err(Error::Config(format!("u_c = {u} must lie in (0, 1)")));
        }
        for u in &self.u_c {
            self.reaction.spec(*u)?;
        }
        if !(self.dy > 0.0 && self.front_dt > 0.0) {
            return Err(Error::Config("dy and front_dt must be positive".into()));
        }
        if matches!(self.t_final, Some(t) if !(t > 0.0)) {
            return Err(Error::Config("t_final must be positive".into()));
        }
        Ok(())
    }

    /// Whether `dy` is at least as fine as the reference grid.
    pub fn is_fine(&self) -> bool {
        self.dy <= FINE_DY * (1.0 + 1e-12)
    }

    /// Canonical `key=value` form; parsing it gives back an equal config
    /// apart from `out`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.provenance() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// Every setting that influences the numbers, in a fixed order.
    pub fn provenance(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        let mut p = vec![
            ("kind".to_owned(), self.kind.as_str().to_owned()),
            ("reaction".to_owned(), self.reaction.name().to_owned()),
        ];
        if let ReactionSelector::PiecewiseLinear { lambda } = self.reaction {
            p.push(("lambda".into(), format!("{lambda}")));
        }
        p.push(("u_c".into(), list(&self.u_c)));
        p.push(("dy".into(), format!("{}", self.dy)));
        if let Some(t) = self.t_final {
            p.push(("t_final".into(), format!("{t}")));
        }
        p.push(("front_dt".into(), format!("{}", self.front_dt)));
        p.push(("convergence_gate".into(), list(&self.convergence_gate)));
        for (name, value) in self.thresholds.entries() {
            p.push((format!("threshold.{name}"), format!("{value}")));
        }
        p
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: '{value}' is not a number")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse_f64(key, v.trim())).collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: '{value}' is not a boolean"))),
    }
}
