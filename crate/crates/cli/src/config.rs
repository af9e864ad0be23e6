use std::fmt;
use std::path::{Path, PathBuf};

use anosov::constructions::{direct_sum, fuchsian_surface_rep, schottky_rep, symmetric_power, Field, SchottkyParams};
use anosov::words::Representation;
use anosov::Tolerances;
use serde::{Deserialize, Serialize};

/// How the representation under study is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", try_from = "ConstructionSpec")]
pub enum Construction {
    /// Real Schottky group in `SL(2,R)`.
    Schottky {
        rank: usize,
        dilation: f64,
        /// Axis directions in `[0, π)`; equally spaced when absent.
        #[serde(skip_serializing_if = "Option::is_none")]
        angles: Option<Vec<f64>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        trace_signs: Option<Vec<f64>>,
    },
    /// Complex Schottky group, realified into `SL(4,R)`.
    Tau2Schottky {
        rank: usize,
        dilation: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        phases: Option<Vec<f64>>,
    },
    /// `Sym^power` of a two-dimensional construction.
    SymPower {
        power: usize,
        base: Box<Construction>,
    },
    FuchsianSurface {
        genus: usize,
    },
    DirectSum {
        parts: Vec<Construction>,
    },
    /// A representation document written by `construct`.
    FromFile {
        path: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    Schottky,
    Tau2Schottky,
    SymPower,
    FuchsianSurface,
    DirectSum,
    FromFile,
}

/// Flat wire form of [`Construction`]. Parsing a plain struct (rather than
/// a tagged enum, which serde buffers) keeps exact positions and field paths
/// in parse errors all the way down nested constructions.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstructionSpec {
    kind: Kind,
    rank: Option<usize>,
    dilation: Option<f64>,
    angles: Option<Vec<f64>>,
    trace_signs: Option<Vec<f64>>,
    phases: Option<Vec<f64>>,
    power: Option<usize>,
    base: Option<Box<ConstructionSpec>>,
    genus: Option<usize>,
    parts: Option<Vec<ConstructionSpec>>,
    path: Option<PathBuf>,
}

impl TryFrom<ConstructionSpec> for Construction {
    type Error = String;

    fn try_from(s: ConstructionSpec) -> Result<Self, String> {
        let allowed: &[&str] = match s.kind {
            Kind::Schottky => &["rank", "dilation", "angles", "trace_signs"],
            Kind::Tau2Schottky => &["rank", "dilation", "phases"],
            Kind::SymPower => &["power", "base"],
            Kind::FuchsianSurface => &["genus"],
            Kind::DirectSum => &["parts"],
            Kind::FromFile => &["path"],
        };
        let present = [
            ("rank", s.rank.is_some()),
            ("dilation", s.dilation.is_some()),
            ("angles", s.angles.is_some()),
            ("trace_signs", s.trace_signs.is_some()),
            ("phases", s.phases.is_some()),
            ("power", s.power.is_some()),
            ("base", s.base.is_some()),
            ("genus", s.genus.is_some()),
            ("parts", s.parts.is_some()),
            ("path", s.path.is_some()),
        ];
        if let Some((name, _)) = present.iter().find(|(n, p)| *p && !allowed.contains(n)) {
            return Err(format!("field `{name}` does not apply to kind {:?}", s.kind));
        }
        let need = |name: &str| format!("missing field `{name}`");
        Ok(match s.kind {
            Kind::Schottky => Construction::Schottky {
                rank: s.rank.unwrap_or(2),
                dilation: s.dilation.unwrap_or(3.0),
                angles: s.angles,
                trace_signs: s.trace_signs,
            },
            Kind::Tau2Schottky => Construction::Tau2Schottky {
                rank: s.rank.unwrap_or(2),
                dilation: s.dilation.unwrap_or(3.0),
                phases: s.phases,
            },
            Kind::SymPower => Construction::SymPower {
                power: s.power.ok_or_else(|| need("power"))?,
                base: Box::new(Construction::try_from(*s.base.ok_or_else(|| need("base"))?)?),
            },
            Kind::FuchsianSurface => Construction::FuchsianSurface { genus: s.genus.unwrap_or(2) },
            Kind::DirectSum => Construction::DirectSum {
                parts: s
                    .parts
                    .ok_or_else(|| need("parts"))?
                    .into_iter()
                    .map(Construction::try_from)
                    .collect::<Result<_, _>>()?,
            },
            Kind::FromFile => Construction::FromFile { path: s.path.ok_or_else(|| need("path"))? },
        })
    }
}

impl Default for Construction {
    fn default() -> Self {
        Construction::Schottky { rank: 2, dilation: 3.0, angles: None, trace_signs: None }
    }
}

impl Construction {
    pub fn build(&self) -> anosov::Result<Representation> {
        match self {
            Construction::Schottky { rank, dilation, angles, trace_signs } => {
                let mut p = SchottkyParams::standard(*rank, *dilation);
                if let Some(a) = angles {
                    p.angles = a.clone();
                }
                if let Some(s) = trace_signs {
                    p.trace_signs = s.clone();
                }
                schottky_rep(&p)
            }
            Construction::Tau2Schottky { rank, dilation, phases } => {
                let mut p = SchottkyParams::standard(*rank, *dilation);
                p.field = Field::Complex;
                if let Some(ph) = phases {
                    p.phases = ph.clone();
                }
                schottky_rep(&p)
            }
            Construction::SymPower { power, base } => base.build()?.map(|g| symmetric_power(g, *power)),
            Construction::FuchsianSurface { genus } => fuchsian_surface_rep(*genus),
            Construction::DirectSum { parts } => {
                direct_sum(&parts.iter().map(Construction::build).collect::<anosov::Result<Vec<_>>>()?)
            }
            Construction::FromFile { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| anosov::Error::Format(format!("{}: {e}", path.display())))?;
                Representation::from_json(&text)
            }
        }
    }

    /// Short human-readable name.
    pub fn label(&self) -> String {
        match self {
            Construction::Schottky { rank, dilation, .. } => format!("schottky(rank {rank}, λ={dilation})"),
            Construction::Tau2Schottky { rank, dilation, .. } => format!("tau2-schottky(rank {rank}, λ={dilation})"),
            Construction::SymPower { power, base } => format!("sym^{power} {}", base.label()),
            Construction::FuchsianSurface { genus } => format!("fuchsian-surface(genus {genus})"),
            Construction::DirectSum { parts } => {
                format!("direct-sum[{}]", parts.iter().map(Construction::label).collect::<Vec<_>>().join(", "))
            }
            Construction::FromFile { path } => format!("from-file({})", path.display()),
        }
    }

    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        let bad = |f: &str, msg: String| Err(ConfigError::field(f, msg));
        match self {
            Construction::Schottky { rank, dilation, .. } | Construction::Tau2Schottky { rank, dilation, .. } => {
                if *rank == 0 {
                    return bad(&format!("{field}.rank"), "must be at least 1".into());
                }
                if !(*dilation > 1.0 && dilation.is_finite()) {
                    return bad(&format!("{field}.dilation"), format!("{dilation} is not a finite value > 1"));
                }
            }
            Construction::SymPower { power, base } => {
                if *power == 0 {
                    return bad(&format!("{field}.power"), "must be at least 1".into());
                }
                base.validate(&format!("{field}.base"))?;
            }
            Construction::FuchsianSurface { genus } => {
                if *genus < 2 {
                    return bad(&format!("{field}.genus"), format!("{genus} is below 2"));
                }
            }
            Construction::DirectSum { parts } => {
                if parts.is_empty() {
                    return bad(&format!("{field}.parts"), "needs at least one summand".into());
                }
                for (i, p) in parts.iter().enumerate() {
                    p.validate(&format!("{field}.parts[{i}]"))?;
                }
            }
            Construction::FromFile { path } => {
                if !path.is_file() {
                    return bad(&format!("{field}.path"), format!("{} does not exist", path.display()));
                }
            }
        }
        Ok(())
    }

    /// Makes relative file paths relative to `dir`.
    fn rebase(&mut self, dir: &Path) {
        match self {
            Construction::FromFile { path } if path.is_relative() => *path = dir.join(&*path),
            Construction::SymPower { base, .. } => base.rebase(dir),
            Construction::DirectSum { parts } => parts.iter_mut().for_each(|p| p.rebase(dir)),
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeformConfig {
    /// Size of the random perturbation of each normalized generator entry.
    pub magnitude: f64,
    pub steps: usize,
}

impl Default for DeformConfig {
    fn default() -> Self {
        DeformConfig { magnitude: 0.01, steps: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PingPongConfig {
    pub g: String,
    pub t: String,
    pub max_power: usize,
}

impl Default for PingPongConfig {
    fn default() -> Self {
        PingPongConfig { g: "a".into(), t: "b".into(), max_power: 20 }
    }
}

/// Everything a run depends on. `out` and `threads` do not influence any
/// result and are left out of the echo in `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub construction: Construction,
    #[serde(default = "default_k")]
    pub k: Vec<usize>,
    #[serde(default = "default_radius")]
    pub radius: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_ell_min")]
    pub ell_min: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deform: DeformConfig,
    #[serde(default)]
    pub pingpong: PingPongConfig,
    #[serde(default = "default_out", skip_serializing)]
    pub out: PathBuf,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

fn default_k() -> Vec<usize> {
    vec![1]
}

fn default_radius() -> usize {
    4
}

fn default_ell_min() -> usize {
    anosov::certifier::DEFAULT_ELL_MIN
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            construction: Construction::default(),
            k: default_k(),
            radius: default_radius(),
            tolerances: Tolerances::default(),
            ell_min: default_ell_min(),
            seed: 0,
            deform: DeformConfig::default(),
            pingpong: PingPongConfig::default(),
            out: default_out(),
            threads: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses a JSON config; `origin` names the source in diagnostics.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let (line, column) = (inner.line(), inner.column());
            let message = inner.to_string();
            let message =
                message.strip_suffix(&format!(" at line {line} column {column}")).unwrap_or(&message).to_string();
            ConfigError {
                origin: origin.to_string(),
                line: Some(line),
                column: Some(column),
                field: (path != ".").then_some(path),
                message,
            }
        })?;
        Ok(cfg)
    }

    /// Reads a config file; relative `from-file` paths resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            origin: origin.clone(),
            line: None,
            column: None,
            field: None,
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_json(&text, &origin)?;
        if let Some(dir) = path.parent() {
            cfg.construction.rebase(dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.construction.validate("construction")?;
        if self.k.is_empty() {
            return Err(ConfigError::field("k", "at least one index is required".into()));
        }
        if let Some(i) = self.k.iter().position(|&k| k == 0) {
            return Err(ConfigError::field(&format!("k[{i}]"), "indices start at 1".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [("eps_gap", t.eps_gap), ("alpha_min", t.alpha_min), ("cond_threshold", t.cond_threshold)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::field(&format!("tolerances.{name}"), format!("{v} is not positive")));
            }
        }
        if !(self.deform.magnitude >= 0.0 && self.deform.magnitude.is_finite()) {
            return Err(ConfigError::field("deform.magnitude", format!("{} is negative", self.deform.magnitude)));
        }
        if self.deform.steps == 0 {
            return Err(ConfigError::field("deform.steps", "must be at least 1".into()));
        }
        if self.pingpong.max_power == 0 {
            return Err(ConfigError::field("pingpong.max_power", "must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(ConfigError::field("threads", "must be at least 1".into()));
        }
        Ok(())
    }
}

/// A configuration problem, located by line/column when it comes from a
/// parse and by field path when it comes from validation.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub origin: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn field(field: &str, message: String) -> Self {
        ConfigError { origin: "config".into(), line: None, column: None, field: Some(field.into()), message }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.origin)?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, ":{l}:{c}")?;
        }
        if let Some(field) = &self.field {
            write!(f, ": field `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}
