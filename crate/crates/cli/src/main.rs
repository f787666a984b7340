use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kicktop_cli::config::{HistogramMode, InitialState};
use kicktop_cli::{catalog, run_experiment, CliError, ExperimentConfig, ExperimentKind, RunOptions, Validated};

#[derive(Parser)]
#[command(name = "kicktop", version, about = "Entanglement experiments on coupled quantum kicked tops")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run whatever experiment a config describes
    Run {
        config: String,
        #[command(flatten)]
        common: Common,
    },
    /// Stroboscopic sections of the classical single top
    PhaseSpace {
        config: Option<String>,
        #[arg(long)]
        iters: Option<usize>,
        /// Grid size in both cos(theta) and phi
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// von Neumann and linear entropy of a pure product start
    EvolvePure {
        config: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Log-negativity of a mixed start
    EvolveMixed {
        config: Option<String>,
        #[arg(long)]
        weight: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Random-state entropy bound over dimensions and ratios
    RmtBound {
        config: Option<String>,
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Linear-entropy growth against its large-j estimate
    RmtCurve {
        config: Option<String>,
        /// Skip the simulation column
        #[arg(long)]
        theory_only: bool,
        /// Skip the finite-N exact-sum column
        #[arg(long)]
        no_exact: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Histogram of reduced-density eigenvalues
    RdmHist {
        config: Option<String>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Use eigenvectors of the Floquet operator instead of evolved states
        #[arg(long)]
        eigenstates: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Nearest-neighbour eigenangle spacing statistics
    Spacing {
        config: Option<String>,
        /// Pool the full spectrum without separating symmetry sectors
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check a config and report every problem
    Validate { config: String },
    /// List the bundled configs, or write one (or all) to a directory
    Catalog {
        name: Option<String>,
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    j: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<f64>,
    #[arg(long)]
    k2: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    eps: Vec<f64>,
    #[arg(long)]
    n_max: Option<u64>,
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long)]
    start: Option<u64>,
    /// Start from a seeded random product state
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    name: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent parameter points
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also write a matplotlib script
    #[arg(long)]
    plots: bool,
    /// Allow mixed runs whose density matrix exceeds the size guard
    #[arg(long)]
    allow_large: bool,
}

impl Common {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if self.j.is_some() {
            cfg.system.j = self.j;
        }
        if !self.k.is_empty() {
            cfg.system.k = self.k.clone();
        }
        if self.k2.is_some() {
            cfg.system.k2 = self.k2;
        }
        if !self.eps.is_empty() {
            cfg.system.eps = self.eps.clone();
        }
        if self.n_max.is_some() {
            cfg.run.n_max = self.n_max;
        }
        if let Some(s) = self.stride {
            cfg.run.stride = s;
        }
        if let Some(s) = self.start {
            cfg.run.start = s;
        }
        if let Some(seed) = self.seed {
            cfg.initial = InitialState::RandomProduct { seed };
        }
        if self.name.is_some() {
            cfg.name = self.name.clone();
        }
        if self.out.is_some() {
            cfg.output = self.out.clone();
        }
    }
}

/// A config path, or the name of a bundled config.
fn read_source(spec: &str) -> Result<(String, PathBuf), CliError> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(src) = catalog::get(spec) {
            return Ok((src.to_string(), PathBuf::from(format!("{spec}.toml"))));
        }
    }
    let src = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok((src, path.to_path_buf()))
}

fn load(spec: Option<&str>, kind: Option<ExperimentKind>) -> Result<(ExperimentConfig, Option<String>), CliError> {
    let (mut cfg, source) = match spec {
        Some(s) => {
            let (src, path) = read_source(s)?;
            (ExperimentConfig::parse(&src, &path)?, Some(src))
        }
        None => {
            let mut c = ExperimentConfig::default();
            if kind == Some(ExperimentKind::MixedNegativity) {
                c.initial = InitialState::default_mixed();
            }
            (c, None)
        }
    };
    if let Some(kind) = kind {
        match cfg.kind {
            Some(found) if found != kind => {
                return Err(CliError::KindMismatch { expected: kind.to_string(), found: found.to_string() })
            }
            _ => cfg.kind = Some(kind),
        }
    }
    Ok((cfg, source))
}

fn execute(v: Validated, common: &Common) -> Result<(), CliError> {
    for w in &v.warnings {
        eprintln!("warning: {w}");
    }
    let opts = RunOptions { out_dir: v.config.output_dir(), jobs: common.jobs, plots: common.plots, allow_large: common.allow_large };
    let report = run_experiment(&v, &opts)?;
    for f in &report.files {
        println!("{}", f.display());
    }
    println!("{}", report.manifest.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (cfg, source, common) = match &cli.command {
        Command::Validate { config } => {
            let (src, path) = read_source(config)?;
            let v = ExperimentConfig::parse(&src, &path)?.validate(Some(&src))?;
            for w in &v.warnings {
                println!("warning: {w}");
            }
            let files = v.config.output_count(v.kind);
            println!("ok: {} ({} output file{})", v.kind, files, if files == 1 { "" } else { "s" });
            return Ok(());
        }
        Command::Catalog { name, dir } => return catalog_command(name.as_deref(), dir.as_deref()),
        Command::Run { config, common } => {
            let (c, s) = load(Some(config), None)?;
            (c, s, common)
        }
        Command::PhaseSpace { config, iters, grid, common } => {
            let (mut c, s) = load(config.as_deref(), Some(ExperimentKind::PhaseSpace))?;
            if let Some(i) = iters {
                c.section.iters = *i;
            }
            if let Some(g) = grid {
                c.section.grid_cos_theta = *g;
                c.section.grid_phi = *g;
            }
            (c, s, common)
        }
        Command::EvolvePure { config, common } => {
            let (c, s) = load(config.as_deref(), Some(ExperimentKind::PureEntropy))?;
            (c, s, common)
        }
        Command::EvolveMixed { config, weight, common } => {
            let (mut c, s) = load(config.as_deref(), Some(ExperimentKind::MixedNegativity))?;
            if let (Some(w), InitialState::Mixed { weight, .. }) = (weight, &mut c.initial) {
                *weight = *w;
            }
            (c, s, common)
        }
        Command::RmtBound { config, n, q, common } => {
            let (mut c, s) = load(config.as_deref(), Some(ExperimentKind::RmtBound))?;
            if !n.is_empty() {
                c.bound.n = n.clone();
            }
            if !q.is_empty() {
                c.bound.q = q.clone();
            }
            (c, s, common)
        }
        Command::RmtCurve { config, theory_only, no_exact, common } => {
            let (mut c, s) = load(config.as_deref(), Some(ExperimentKind::SrOverlay))?;
            c.overlay.simulate &= !theory_only;
            c.overlay.exact &= !no_exact;
            (c, s, common)
        }
        Command::RdmHist { config, bins, samples, eigenstates, common } => {
            let (mut c, s) = load(config.as_deref(), Some(ExperimentKind::RdmHist))?;
            if let Some(b) = bins {
                c.histogram.bins = *b;
            }
            if let Some(n) = samples {
                c.histogram.samples = *n;
            }
            if *eigenstates {
                c.histogram.mode = HistogramMode::Eigenstates;
            }
            (c, s, common)
        }
        Command::Spacing { config, raw, common } => {
            let (mut c, s) = load(config.as_deref(), Some(ExperimentKind::Spacing))?;
            c.spacing.resolved &= !raw;
            (c, s, common)
        }
    };
    let mut cfg = cfg;
    common.apply(&mut cfg);
    execute(cfg.validate(source.as_deref())?, common)
}

fn catalog_command(name: Option<&str>, dir: Option<&Path>) -> Result<(), CliError> {
    let Some(dir) = dir else {
        match name {
            Some(n) => match catalog::get(n) {
                Some(src) => print!("{src}"),
                None => return Err(CliError::Io { path: n.into(), source: std::io::ErrorKind::NotFound.into() }),
            },
            None => {
                for (n, _) in catalog::CONFIGS {
                    println!("{n}");
                }
            }
        }
        return Ok(());
    };
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    for (n, src) in catalog::CONFIGS.iter().filter(|(n, _)| name.is_none_or(|want| want == *n)) {
        let path = dir.join(format!("{n}.toml"));
        std::fs::write(&path, src).map_err(|source| CliError::Io { path: path.clone(), source })?;
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
