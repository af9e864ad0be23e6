use std::path::PathBuf;
use std::process::ExitCode;

use anosov_cli::{run, Command, ConfigError, Construction, ExperimentConfig, EXIT_USAGE};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Empirical Anosov, positivity and limit-map experiments on word balls.
#[derive(Parser)]
#[command(name = "anosov", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a representation and write it as JSON.
    Construct {
        #[command(flatten)]
        common: Common,
        /// Where to write the representation (default <out>/representation.json).
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Fit singular-value gap growth and issue an empirical certificate.
    Certify(Common),
    /// Write the raw gap profile only.
    GapProfile(Common),
    /// Scan signs of top eigenvalues of exterior powers.
    ScanPositivity(Common),
    /// Sample attracting planes and audit transversality.
    LimitSet(Common),
    /// Track top-eigenvalue signs along a random perturbation path.
    Deform {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        magnitude: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Search a ping-pong power for <g, t g t^-1> and certify the subgroup.
    Pingpong {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        max_power: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Schottky,
    Tau2Schottky,
    SymPower,
    FuchsianSurface,
    FromFile,
}

#[derive(Args)]
struct Common {
    /// JSON config; flags given here override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    construction: Option<Kind>,
    #[arg(long, requires = "construction")]
    rank: Option<usize>,
    #[arg(long, requires = "construction")]
    dilation: Option<f64>,
    #[arg(long, requires = "construction")]
    genus: Option<usize>,
    /// Symmetric power degree for sym-power (base is a Schottky group).
    #[arg(long, requires = "construction")]
    power: Option<usize>,
    /// Representation file for from-file.
    #[arg(long, requires = "construction")]
    file: Option<PathBuf>,
    #[arg(long)]
    radius: Option<usize>,
    /// Index to scan; repeat for several.
    #[arg(long = "k", value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    eps_gap: Option<f64>,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    cond_threshold: Option<f64>,
    #[arg(long)]
    ell_min: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(kind) = self.construction {
            cfg.construction = self.construction(kind)?;
        }
        if let Some(r) = self.radius {
            cfg.radius = r;
        }
        if !self.k.is_empty() {
            cfg.k = self.k.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(v) = self.eps_gap {
            cfg.tolerances.eps_gap = v;
        }
        if let Some(v) = self.alpha_min {
            cfg.tolerances.alpha_min = v;
        }
        if let Some(v) = self.cond_threshold {
            cfg.tolerances.cond_threshold = v;
        }
        if let Some(v) = self.ell_min {
            cfg.ell_min = v;
        }
        Ok(cfg)
    }

    fn construction(&self, kind: Kind) -> Result<Construction, ConfigError> {
        let rank = self.rank.unwrap_or(2);
        let dilation = self.dilation.unwrap_or(3.0);
        let schottky = Construction::Schottky { rank, dilation, angles: None, trace_signs: None };
        Ok(match kind {
            Kind::Schottky => schottky,
            Kind::Tau2Schottky => Construction::Tau2Schottky { rank, dilation, phases: None },
            Kind::SymPower => Construction::SymPower {
                power: self.power.ok_or_else(|| ConfigError::field("power", "sym-power needs --power".into()))?,
                base: Box::new(schottky),
            },
            Kind::FuchsianSurface => Construction::FuchsianSurface { genus: self.genus.unwrap_or(2) },
            Kind::FromFile => Construction::FromFile {
                path: self.file.clone().ok_or_else(|| ConfigError::field("path", "from-file needs --file".into()))?,
            },
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let (common, command) = match &cli.command {
        Cmd::Construct { common, emit } => (common, Command::Construct { emit: emit.clone() }),
        Cmd::Certify(c) => (c, Command::Certify),
        Cmd::GapProfile(c) => (c, Command::GapProfile),
        Cmd::ScanPositivity(c) => (c, Command::ScanPositivity),
        Cmd::LimitSet(c) => (c, Command::LimitSet),
        Cmd::Deform { common, .. } => (common, Command::Deform),
        Cmd::Pingpong { common, .. } => (common, Command::Pingpong),
    };
    let mut cfg = match common.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match &cli.command {
        Cmd::Deform { magnitude, steps, .. } => {
            if let Some(m) = magnitude {
                cfg.deform.magnitude = *m;
            }
            if let Some(s) = steps {
                cfg.deform.steps = *s;
            }
        }
        Cmd::Pingpong { g, t, max_power, .. } => {
            if let Some(g) = g {
                cfg.pingpong.g = g.clone();
            }
            if let Some(t) = t {
                cfg.pingpong.t = t.clone();
            }
            if let Some(n) = max_power {
                cfg.pingpong.max_power = *n;
            }
        }
        _ => {}
    }
    match run(&cfg, &command) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
