use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thermocat::states::{KerrInteractionSpec, Sign};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "thermocat", version, about = "Phase-space figures and numbers for superposed thermal states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// `key=value` file; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quadrature marginals of the odd superposition and fringe metrics.
    Fig1(Params),
    /// Wigner grids of both superpositions and success probabilities.
    Fig2(Params),
    /// Rotated-axis marginals at large displacement and small Kerr phase.
    Fig3(Params),
    /// Optimized CHSH value of the two-mode state against displacement.
    Fig4a(Params),
    /// Optimized CHSH value of the split superposition against variance.
    Fig4b(Params),
    /// CHSH value under loss and the loss time where violation ends.
    Decoherence {
        #[command(flatten)]
        params: Params,
        #[arg(long, value_enum)]
        case: Option<Case>,
    },
    /// Closed form against the Fock-space oracle on small parameters.
    OracleCheck(Params),
    /// Trace, purity, entropy, photon numbers and temperature of a state.
    StateInfo {
        #[command(flatten)]
        params: Params,
        #[arg(long, value_enum)]
        state: Option<StateKind>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fig1(_) => "fig1",
            Command::Fig2(_) => "fig2",
            Command::Fig3(_) => "fig3",
            Command::Fig4a(_) => "fig4a",
            Command::Fig4b(_) => "fig4b",
            Command::Decoherence { .. } => "decoherence",
            Command::OracleCheck(_) => "oracle-check",
            Command::StateInfo { .. } => "state-info",
        }
    }

    pub fn params(&self) -> &Params {
        match self {
            Command::Fig1(p)
            | Command::Fig2(p)
            | Command::Fig3(p)
            | Command::Fig4a(p)
            | Command::Fig4b(p)
            | Command::OracleCheck(p) => p,
            Command::Decoherence { params, .. } | Command::StateInfo { params, .. } => params,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    /// V = 3, d = 1, odd superposition.
    V3d1,
    /// Pure cat with amplitude 2.2.
    Cat,
    /// V = 10, d = 0, even superposition.
    V10d0,
    /// Built from the -V/-d/--phi/--sign/--transmittance flags.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Thermal,
    Superposition,
    MicroMacro,
    Measured,
    TwoMode,
    Split,
}

impl StateKind {
    pub fn name(self) -> &'static str {
        match self {
            StateKind::Thermal => "thermal",
            StateKind::Superposition => "superposition",
            StateKind::MicroMacro => "micro-macro",
            StateKind::Measured => "measured",
            StateKind::TwoMode => "two-mode",
            StateKind::Split => "split",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    /// Thermal variance V >= 1.
    #[arg(short = 'V', long, allow_hyphen_values = true)]
    pub variance: Option<f64>,
    /// Real displacement d.
    #[arg(short = 'd', long, allow_hyphen_values = true)]
    pub displacement: Option<f64>,
    /// Kerr phase in (-2 pi, 2 pi].
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// `+` or `-` (also `plus`/`minus`).
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub transmittance: Option<f64>,
    #[arg(long = "gamma-t", allow_hyphen_values = true)]
    pub gamma_t: Option<f64>,
    #[arg(long = "grid-min", allow_hyphen_values = true)]
    pub grid_min: Option<f64>,
    #[arg(long = "grid-max", allow_hyphen_values = true)]
    pub grid_max: Option<f64>,
    #[arg(long = "grid-steps")]
    pub grid_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.min + h * i as f64).collect()
    }
}

/// Validated parameters; `None` means the subcommand default applies.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variance: Option<f64>,
    pub displacement: Option<f64>,
    pub phi: Option<f64>,
    pub sign: Option<Sign>,
    pub transmittance: Option<f64>,
    pub gamma_t: Option<f64>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_steps: Option<usize>,
    pub case: Option<Case>,
    pub state: Option<StateKind>,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

const KEYS: [&str; 13] = [
    "variance",
    "displacement",
    "phi",
    "sign",
    "transmittance",
    "gamma-t",
    "grid-min",
    "grid-max",
    "grid-steps",
    "case",
    "state",
    "out",
    "threads",
];

/// Reads `key=value` lines; `#` starts a comment, `_` and `-` are
/// interchangeable in keys.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::BadParam(format!("config line {}: expected key=value", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::BadParam(format!("config line {}: unknown key '{key}'", n + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn parsed<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| CliError::BadParam(format!("config value for {key}: '{v}'")))
        })
        .transpose()
}

fn parsed_enum<T: ValueEnum>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| T::from_str(v, true).map_err(|_| CliError::BadParam(format!("config value for {key}: '{v}'"))))
        .transpose()
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        let p = cli.command.params();
        let (case, state) = match &cli.command {
            Command::Decoherence { case, .. } => (*case, None),
            Command::StateInfo { state, .. } => (None, *state),
            _ => (None, None),
        };
        let sign = match p.sign.clone().or_else(|| file.get("sign").cloned()) {
            Some(s) => Some(s.parse::<Sign>().map_err(|e| CliError::BadParam(e.to_string()))?),
            None => None,
        };
        let cfg = RunConfig {
            variance: p.variance.or(parsed(&file, "variance")?),
            displacement: p.displacement.or(parsed(&file, "displacement")?),
            phi: p.phi.or(parsed(&file, "phi")?),
            sign,
            transmittance: p.transmittance.or(parsed(&file, "transmittance")?),
            gamma_t: p.gamma_t.or(parsed(&file, "gamma-t")?),
            grid_min: p.grid_min.or(parsed(&file, "grid-min")?),
            grid_max: p.grid_max.or(parsed(&file, "grid-max")?),
            grid_steps: p.grid_steps.or(parsed(&file, "grid-steps")?),
            case: case.or(parsed_enum(&file, "case")?),
            state: state.or(parsed_enum(&file, "state")?),
            out: cli
                .out
                .clone()
                .or_else(|| file.get("out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out")),
            threads: cli.threads.or(parsed(&file, "threads")?),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::BadParam(m));
        if let Some(v) = self.variance {
            if !(v.is_finite() && v >= 1.0) {
                return bad(format!("variance {v} must be finite and >= 1"));
            }
        }
        if let Some(d) = self.displacement {
            if !d.is_finite() {
                return bad(format!("displacement {d} must be finite"));
            }
        }
        if let Some(phi) = self.phi {
            KerrInteractionSpec::new(phi).map_err(|e| CliError::BadParam(e.to_string()))?;
        }
        if let Some(t) = self.transmittance {
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("transmittance {t} outside [0, 1]"));
            }
        }
        if let Some(g) = self.gamma_t {
            if !(g.is_finite() && g >= 0.0) {
                return bad(format!("gamma-t {g} must be finite and >= 0"));
            }
        }
        if let Some(n) = self.grid_steps {
            if n < 2 {
                return bad(format!("grid-steps {n} must be at least 2"));
            }
        }
        for x in [self.grid_min, self.grid_max].into_iter().flatten() {
            if !x.is_finite() {
                return bad(format!("grid bound {x} must be finite"));
            }
        }
        if let (Some(lo), Some(hi)) = (self.grid_min, self.grid_max) {
            if lo >= hi {
                return bad(format!("grid-min {lo} must be below grid-max {hi}"));
            }
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    /// Grid from the flags, falling back per field to `default`; `None`
    /// when no grid flag was given and there is no default.
    pub fn grid(&self, default: Option<Grid>) -> Result<Option<Grid>> {
        let given = self.grid_min.is_some() || self.grid_max.is_some() || self.grid_steps.is_some();
        let g = match (given, default) {
            (false, d) => return Ok(d),
            (true, Some(d)) => Grid {
                min: self.grid_min.unwrap_or(d.min),
                max: self.grid_max.unwrap_or(d.max),
                steps: self.grid_steps.unwrap_or(d.steps),
            },
            (true, None) => match (self.grid_min, self.grid_max) {
                (Some(min), Some(max)) => Grid {
                    min,
                    max,
                    steps: self.grid_steps.unwrap_or(201),
                },
                _ => return Err(CliError::BadParam("both grid-min and grid-max are needed here".into())),
            },
        };
        if g.min >= g.max {
            return Err(CliError::BadParam(format!("grid-min {} must be below grid-max {}", g.min, g.max)));
        }
        Ok(Some(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("thermocat").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn config_lines() {
        let m = parse_config("# comment\nvariance = 3\ngamma_t=0.1 # trailing\n\n").unwrap();
        assert_eq!(m["variance"], "3");
        assert_eq!(m["gamma-t"], "0.1");
        assert!(parse_config("nonsense").is_err());
        assert!(parse_config("colour=blue").is_err());
    }

    #[test]
    fn flags_parse_and_validate() {
        let c = RunConfig::resolve(&cli(&["fig1", "-V", "3", "-d", "-1.5", "--sign", "-"])).unwrap();
        assert_eq!(c.variance, Some(3.0));
        assert_eq!(c.displacement, Some(-1.5));
        assert_eq!(c.sign, Some(Sign::Minus));
        for bad in [
            &["fig1", "-V", "0.5"][..],
            &["fig2", "--transmittance", "1.5"],
            &["decoherence", "--gamma-t", "-0.1"],
            &["fig1", "--grid-steps", "1"],
            &["fig1", "--grid-min", "2", "--grid-max", "1"],
            &["fig1", "--phi", "7"],
            &["fig1", "--sign", "x"],
        ] {
            let err = RunConfig::resolve(&cli(bad)).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad:?}");
        }
    }

    #[test]
    fn grid_defaults_fill_missing_fields() {
        let c = RunConfig::resolve(&cli(&["fig2", "--grid-steps", "11"])).unwrap();
        let g = c.grid(Some(Grid { min: -3.0, max: 3.0, steps: 121 })).unwrap().unwrap();
        assert_eq!((g.min, g.max, g.steps), (-3.0, 3.0, 11));
        assert_eq!(g.points().len(), 11);
        assert!(c.grid(None).is_err());
    }
}
