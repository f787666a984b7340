//! Runs a checked configuration and writes its artifacts.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use kicktop::cdynamics::{phase_space_section, section_to_csv, SectionSpec};
use kicktop::entanglement::{linear_entropy_series, measure_series_mixed, measure_series_pure, Cadence};
use kicktop::qdynamics::{BipartiteState, CoupledFloquet, CoupledTopParams, DensityOperator, MAX_MATERIALIZED_DIM};
use kicktop::rmt::{
    coupled_top_symmetries, rdm_eigenstate_eigenvalues, rdm_eigenvalue_histogram, rdm_histogram_from_eigenvalues,
    rmt_entropy_bound, spacing_distribution, spacing_distribution_resolved, sr_exact_sum, sr_theory_curve, RdmHistogram,
    SrTheoryParams, MAX_EXACT_SUM_DIM,
};
use kicktop::spin::{mixed_initial_state, product_initial_state, CoherentParams, SpinBasis, StateVector};
use kicktop::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, HistogramMode, InitialState, Validated};
use crate::error::CliError;
use crate::plot;

/// Theory level taken as the start of saturation in overlay headers.
pub const SATURATION_ONSET: f64 = 0.95;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub plots: bool,
    pub allow_large: bool,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

struct Artifact {
    file: String,
    body: String,
}

type Task<'a> = Box<dyn Fn() -> Result<Artifact, CliError> + Send + Sync + 'a>;

#[derive(Serialize)]
struct Manifest<'a> {
    library_version: &'a str,
    cli_version: &'a str,
    kind: &'a str,
    created_unix: u64,
    files: Vec<String>,
    warnings: &'a [String],
    config: &'a ExperimentConfig,
}

pub fn run_experiment(v: &Validated, opts: &RunOptions) -> Result<RunReport, CliError> {
    let cfg = &v.config;
    let tasks = build_tasks(v, opts)?;
    std::fs::create_dir_all(&opts.out_dir).map_err(|source| CliError::Io { path: opts.out_dir.clone(), source })?;
    let names = run_pool(opts.jobs.max(1), &tasks, &opts.out_dir)?;

    let mut files: Vec<PathBuf> = names.iter().map(|n| opts.out_dir.join(n)).collect();
    if opts.plots {
        let script = plot::script(v.kind, &names);
        let path = opts.out_dir.join("plot.py");
        write(&path, &script)?;
        files.push(path);
    }
    let manifest = Manifest {
        library_version: kicktop::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
        kind: v.kind.label(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        files: files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
        warnings: &v.warnings,
        config: cfg,
    };
    let manifest_path = opts.out_dir.join("manifest.toml");
    write(&manifest_path, &toml::to_string(&manifest).expect("manifest serialises"))?;
    Ok(RunReport { files, manifest: manifest_path })
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn run_pool(jobs: usize, tasks: &[Task<'_>], out_dir: &Path) -> Result<Vec<String>, CliError> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<String, CliError>>>> = Mutex::new((0..tasks.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(tasks.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= tasks.len() {
                    break;
                }
                let outcome = tasks[i]().and_then(|a| {
                    write(&out_dir.join(&a.file), &a.body)?;
                    Ok(a.file)
                });
                results.lock().expect("result slot lock")[i] = Some(outcome);
            });
        }
    });
    results.into_inner().expect("result slot lock").into_iter().map(|r| r.expect("every task ran")).collect()
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn tag(p: &CoupledTopParams) -> String {
    if p.k1 == p.k2 {
        format!("k{}_eps{}", num(p.k1), num(p.eps))
    } else {
        format!("k{}_k2{}_eps{}", num(p.k1), num(p.k2), num(p.eps))
    }
}

fn header(kind: ExperimentKind, p: Option<&CoupledTopParams>) -> Vec<String> {
    let mut out = vec![format!("kicktop {} {}", kicktop::VERSION, kind)];
    if let Some(p) = p {
        out.push(format!("j={} N={} k1={} k2={} eps={}", num(p.j()), p.dim(), num(p.k1), num(p.k2), num(p.eps)));
    }
    out
}

fn describe_initial(s: &InitialState) -> String {
    match s {
        InitialState::Coherent { first, second } => {
            let b = second.unwrap_or(*first);
            format!("initial: coherent ({}, {}) x ({}, {})", first[0], first[1], b[0], b[1])
        }
        InitialState::Mixed { a, b, weight, second } => format!(
            "initial: {weight}|{}, {}><..| + {}|{}, {}><..| on top 1, coherent ({}, {}) on top 2",
            a[0],
            a[1],
            1.0 - weight,
            b[0],
            b[1],
            second[0],
            second[1]
        ),
        InitialState::RandomProduct { seed } => format!("initial: random product state, seed {seed}"),
    }
}

fn coherent(p: [f64; 2]) -> CoherentParams {
    CoherentParams::new(p[0], p[1]).expect("validated coherent point")
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let r = (-2.0 * (1.0 - rng.gen::<f64>()).ln()).sqrt();
    C64::from_polar(r / 2f64.sqrt(), 2.0 * PI * rng.gen::<f64>())
}

/// Product of two independent Gaussian random vectors; every parameter point gets the same pair.
pub fn random_product_state(basis: SpinBasis, seed: u64) -> BipartiteState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || StateVector::normalized(basis, (0..basis.dim()).map(|_| gaussian(&mut rng)).collect()).expect("nonzero draw");
    let a = draw();
    let b = draw();
    BipartiteState::product(&a, &b)
}

fn pure_initial(s: &InitialState, basis: SpinBasis) -> BipartiteState {
    match s {
        InitialState::Coherent { first, second } => product_initial_state(basis, coherent(*first), coherent(second.unwrap_or(*first))),
        InitialState::RandomProduct { seed } => random_product_state(basis, *seed),
        InitialState::Mixed { .. } => unreachable!("mixed initial states are rejected for pure runs"),
    }
}

fn mixed_initial(s: &InitialState, basis: SpinBasis) -> Result<DensityOperator, CliError> {
    Ok(match s {
        InitialState::Mixed { a, b, weight, second } => {
            mixed_initial_state(basis, coherent(*a), coherent(*b), *weight, coherent(*second))?
        }
        other => pure_initial(other, basis).to_density(),
    })
}

fn build_tasks<'a>(v: &'a Validated, opts: &RunOptions) -> Result<Vec<Task<'a>>, CliError> {
    let cfg = &v.config;
    let kind = v.kind;
    let mut tasks: Vec<Task<'a>> = Vec::new();
    match kind {
        ExperimentKind::PhaseSpace => {
            for &k in &cfg.system.k {
                tasks.push(Box::new(move || {
                    let s = &cfg.section;
                    let spec = SectionSpec {
                        k,
                        grid_cos_theta: s.grid_cos_theta,
                        grid_phi: s.grid_phi,
                        points: s.points.iter().map(|p| (p[0], p[1])).collect(),
                        iters: s.iters,
                    };
                    let pts = phase_space_section(&spec)?;
                    let mut comments = header(kind, None);
                    comments.push(format!("k={} grid={}x{} iters={}", num(k), s.grid_cos_theta, s.grid_phi, s.iters));
                    comments.push("theta and phi in radians".into());
                    Ok(Artifact { file: format!("section_k{}.csv", num(k)), body: section_to_csv(&pts, &comments) })
                }));
            }
        }
        ExperimentKind::RmtBound => {
            tasks.push(Box::new(move || {
                let dims = if cfg.bound.n.is_empty() {
                    vec![SpinBasis::new(cfg.system.j.expect("validated j"))?.dim()]
                } else {
                    cfg.bound.n.clone()
                };
                let mut body = String::new();
                for c in header(kind, None) {
                    let _ = writeln!(body, "# {c}");
                }
                body.push_str("# bound in nats\nn,q,bound,ln_n\n");
                for &n in &dims {
                    for &q in &cfg.bound.q {
                        let b = rmt_entropy_bound(n, q)?;
                        let _ = writeln!(body, "{n},{},{b:.12e},{:.12e}", num(q), (n as f64).ln());
                    }
                }
                Ok(Artifact { file: "bound.csv".into(), body })
            }));
        }
        _ => {
            for p in cfg.parameter_points()? {
                if kind == ExperimentKind::MixedNegativity && p.dim() * p.dim() > MAX_MATERIALIZED_DIM && !opts.allow_large {
                    return Err(kicktop::Error::DimensionTooLarge { dim: p.dim() * p.dim(), limit: MAX_MATERIALIZED_DIM }.into());
                }
                tasks.push(Box::new(move || point_task(cfg, kind, &p)));
            }
        }
    }
    Ok(tasks)
}

fn point_task(cfg: &ExperimentConfig, kind: ExperimentKind, p: &CoupledTopParams) -> Result<Artifact, CliError> {
    let mut comments = header(kind, Some(p));
    let cadence = Cadence { start: cfg.run.start, stride: cfg.run.stride };
    match kind {
        ExperimentKind::PureEntropy => {
            comments.push(describe_initial(&cfg.initial));
            comments.push("n in kicks, entropies in nats".into());
            let s0 = pure_initial(&cfg.initial, p.basis);
            let (sv, sr) = measure_series_pure(p, &s0, cfg.run.n_max.expect("validated n_max"), cadence)?;
            let rows = sv.points().iter().zip(sr.points()).map(|(&(n, a), &(_, b))| (n, vec![a, b]));
            Ok(Artifact { file: format!("entropy_{}.csv", tag(p)), body: table(&comments, &["n", "S_V", "S_R"], rows) })
        }
        ExperimentKind::MixedNegativity => {
            comments.push(describe_initial(&cfg.initial));
            comments.push("n in kicks, log-negativity in nats".into());
            let rho = mixed_initial(&cfg.initial, p.basis)?;
            let en = measure_series_mixed(p, &rho, cfg.run.n_max.expect("validated n_max"), cadence)?;
            let rows = en.points().iter().map(|&(n, e)| (n, vec![e]));
            Ok(Artifact { file: format!("negativity_{}.csv", tag(p)), body: table(&comments, &["n", "E_N"], rows) })
        }
        ExperimentKind::SrOverlay => overlay(cfg, p, comments),
        ExperimentKind::RdmHist => {
            comments.push(describe_initial(&cfg.initial));
            let h = &cfg.histogram;
            let hist = match h.mode {
                HistogramMode::Time => {
                    let floquet = CoupledFloquet::new(*p);
                    let mut s = pure_initial(&cfg.initial, p.basis);
                    floquet.evolve_pure(&mut s, h.sample_start)?;
                    let mut samples = Vec::with_capacity(h.samples);
                    for i in 0..h.samples {
                        if i > 0 {
                            floquet.evolve_pure(&mut s, h.sample_stride)?;
                        }
                        samples.push(s.clone());
                    }
                    comments.push(format!(
                        "time-evolved states at n = {}, {}, ..., {}",
                        h.sample_start,
                        h.sample_start + h.sample_stride,
                        h.sample_start + h.sample_stride * (h.samples as u64 - 1)
                    ));
                    rdm_eigenvalue_histogram(&samples, h.bins)?
                }
                HistogramMode::Eigenstates => {
                    comments.push("all eigenvectors of the Floquet operator".into());
                    let l = rdm_eigenstate_eigenvalues(p)?;
                    rdm_histogram_from_eigenvalues(&l, p.dim(), 1.0, h.bins)?
                }
            };
            comments.extend(histogram_summary(&hist));
            Ok(Artifact { file: format!("rdm_hist_{}.csv", tag(p)), body: hist.histogram.to_csv(&comments) })
        }
        ExperimentKind::Spacing => {
            let u = CoupledFloquet::new(*p).materialize()?;
            let stats = if cfg.spacing.resolved {
                comments.push("spacings unfolded within each symmetry sector".into());
                spacing_distribution_resolved(&u, &coupled_top_symmetries(p))?
            } else {
                comments.push("spacings of the full spectrum".into());
                spacing_distribution(&u)?
            };
            comments.push(format!(
                "spacings={} chi2_wigner={:.6} chi2_poisson={:.6}",
                stats.spacings.len(),
                stats.chi_square_wigner,
                stats.chi_square_poisson
            ));
            comments.push("theory_value is the expected count under the Wigner surmise".into());
            Ok(Artifact { file: format!("spacing_{}.csv", tag(p)), body: stats.histogram.to_csv(&comments) })
        }
        ExperimentKind::PhaseSpace | ExperimentKind::RmtBound => unreachable!("handled without parameter points"),
    }
}

fn overlay(cfg: &ExperimentConfig, p: &CoupledTopParams, mut comments: Vec<String>) -> Result<Artifact, CliError> {
    let n_max = cfg.run.n_max.expect("validated n_max");
    let dim = p.dim();
    let theory = sr_theory_curve(&SrTheoryParams::new(dim, p.eps)?, n_max)?;
    match theory.points().iter().find(|&&(_, v)| v >= SATURATION_ONSET) {
        Some(&(n, _)) => comments.push(format!("theory reaches {SATURATION_ONSET} at n={n}")),
        None => comments.push(format!("theory stays below {SATURATION_ONSET} up to n={n_max}")),
    }
    let mut columns = vec!["n"];
    let sim = if cfg.overlay.simulate {
        columns.push("S_R_sim");
        comments.push(describe_initial(&cfg.initial));
        let s0 = pure_initial(&cfg.initial, p.basis);
        Some(linear_entropy_series(p, &s0, n_max, Cadence { start: 1, stride: cfg.run.stride })?)
    } else {
        None
    };
    columns.push("S_R_theory");
    let exact = cfg.overlay.exact && dim <= MAX_EXACT_SUM_DIM;
    if exact {
        columns.push("S_R_exact");
    }
    let mut rows = Vec::new();
    for &(n, t) in theory.points() {
        let s = match &sim {
            Some(series) => match series.value_at(n) {
                Some(v) => Some(v),
                None => continue,
            },
            None => None,
        };
        let mut row: Vec<f64> = s.into_iter().collect();
        row.push(t);
        if exact {
            row.push(sr_exact_sum(dim, p.eps, n)?);
        }
        rows.push((n, row));
    }
    comments.push("n in kicks, linear entropy is dimensionless".into());
    Ok(Artifact { file: format!("linear_entropy_{}.csv", tag(p)), body: table(&comments, &columns, rows) })
}

fn histogram_summary(h: &RdmHistogram) -> Vec<String> {
    let (chi, bins) = h.chi_square_per_bin();
    vec![
        format!(
            "N={} Q={} lambda_min={:.6e} lambda_max={:.6e}",
            h.density.n(),
            num(h.density.q()),
            h.density.lambda_min(),
            h.density.lambda_max()
        ),
        format!("eigenvalues={} outside_support={:.6} chi2_per_bin={chi:.6} over {bins} bins", h.eigenvalues, h.fraction_outside()),
        "bins span [0, 1.2 lambda_max]; theory_value is the expected count".into(),
    ]
}

fn table(comments: &[String], columns: &[&str], rows: impl IntoIterator<Item = (u64, Vec<f64>)>) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str(&columns.join(","));
    out.push('\n');
    for (n, values) in rows {
        let _ = write!(out, "{n}");
        for v in values {
            let _ = write!(out, ",{v:.12e}");
        }
        out.push('\n');
    }
    out
}
