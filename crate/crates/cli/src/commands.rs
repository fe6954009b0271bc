//! Subcommand bodies. Each returns the directory it wrote to, if any.

use std::path::{Path, PathBuf};

use fmgt_core::analysis::{
    classical_cross_check, convergence_table, energy_high, energy_low, kato_ponce_ratio, kernel_report, limit_study, ConvergenceTable, EnergyReport, KernelRow,
    LimitStudy, Manufactured, NORM_NAMES,
};
use fmgt_core::fractional::{alikhanov_gap, coercivity_quadform, SampledSignal, TimeGrid};
use fmgt_core::memory::solve_memory;
use fmgt_core::model::{catalog, Backend, Family, Nonlinearity};
use fmgt_core::spectral::Domain;
use fmgt_core::trajectory::Trajectory;
use fmgt_core::volterra::{solve_model, PicardOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, Problem, RunConfig};
use crate::error::CliError;
use crate::output::{append_log, finite, write_csv, write_json};

/// Options shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Globals {
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Globals {
    fn out_dir(&self, cfg: Option<&RunConfig>) -> PathBuf {
        match (&self.out, cfg) {
            (Some(p), _) => p.clone(),
            (None, Some(c)) => PathBuf::from(&c.output.directory),
            (None, None) => PathBuf::from("out"),
        }
    }
}

pub const DEFAULT_KERNEL_ALPHAS: [f64; 5] = [0.3, 0.5, 0.7, 0.9, 1.0];
pub const DEFAULT_LIMIT_ALPHAS: [f64; 5] = [0.6, 0.8, 0.9, 0.95, 0.99];
pub const DEFAULT_N_SWEEP: [usize; 4] = [64, 128, 256, 512];

// ---------------------------------------------------------------- list-models

pub fn list_models() -> String {
    let rows = catalog();
    let mut out = format!("{:<22} {:<5} {:<9} {:<13} {:<4} {}\n", "variant", "β", "α range", "backend", "γ_z", "equation");
    for r in &rows {
        out.push_str(&format!(
            "{:<22} {:<5} {:<9} {:<13} {:<4} {}\n",
            r.variant.to_string(),
            r.beta,
            r.alpha_range,
            r.backend.to_string(),
            r.gamma_z,
            r.equation
        ));
    }
    out
}

// ------------------------------------------------------------------------ run

#[derive(Serialize)]
struct ModelInfo {
    family: String,
    nonlinearity: String,
    alpha: f64,
    beta: f64,
    gamma_z: f64,
    backend: String,
}

#[derive(Serialize)]
struct GridInfo {
    horizon: f64,
    steps: usize,
    modes: usize,
    dimension: usize,
}

#[derive(Serialize)]
struct SolverInfo {
    /// Picard iterations (0 for linear solves).
    iterations: usize,
    contraction: Option<f64>,
    distances: Vec<Option<f64>>,
    /// Convolution vs L1 recovery gap of the memory solver.
    recovery_discrepancy: Option<f64>,
}

#[derive(Serialize)]
struct EnergySummary {
    constant: Option<f64>,
    ls_constant: Option<f64>,
    ls_residual: Option<f64>,
    cos_term: Option<f64>,
    cos_constant: Option<f64>,
    peaks: Vec<(String, Option<f64>)>,
}

impl EnergySummary {
    fn of(r: &EnergyReport) -> Self {
        EnergySummary {
            constant: finite(r.constant),
            ls_constant: finite(r.ls_constant),
            ls_residual: finite(r.ls_residual),
            cos_term: r.cos_term.and_then(finite),
            cos_constant: r.cos_constant.and_then(finite),
            peaks: NORM_NAMES.iter().map(|&n| (n.to_string(), r.peak(n).and_then(finite))).collect(),
        }
    }
}

#[derive(Serialize)]
struct CrossCheck {
    discrepancy: Option<f64>,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct PropertyChecks {
    seed: u64,
    signals: usize,
    abel_form_min: f64,
    alikhanov_gap_min: f64,
    kato_ponce_max: f64,
    pass: bool,
}

#[derive(Serialize)]
struct KernelSummary {
    alpha: f64,
    nonnegative: Option<bool>,
    singular_at_zero: Option<bool>,
    unit_mass: Option<bool>,
    monotone: Option<bool>,
    masses: Vec<(f64, f64, f64)>,
    gram_min_eigenvalue: Option<f64>,
    pass: bool,
}

impl KernelSummary {
    fn of(r: &KernelRow) -> Self {
        KernelSummary {
            alpha: r.alpha,
            nonnegative: r.nonnegative.pass,
            singular_at_zero: r.singular_at_zero.pass,
            unit_mass: r.unit_mass.pass,
            monotone: r.monotone.pass,
            masses: r.masses.clone(),
            gram_min_eigenvalue: finite(r.gram_min_eigenvalue),
            pass: r.all_pass(),
        }
    }
}

#[derive(Serialize)]
struct LimitColumnSummary {
    name: String,
    flag: Option<String>,
    strictly_decreasing: bool,
    loglog_slope: Option<f64>,
    converges: bool,
}

#[derive(Serialize)]
struct LimitSummary {
    family: String,
    alphas: Vec<f64>,
    columns: Vec<LimitColumnSummary>,
    rows: Vec<Vec<Option<f64>>>,
    annotations: Vec<String>,
    contract_holds: bool,
}

impl LimitSummary {
    fn of(s: &LimitStudy) -> Self {
        LimitSummary {
            family: s.family.to_string(),
            alphas: s.rows.iter().map(|r| r.alpha).collect(),
            columns: s
                .columns
                .iter()
                .enumerate()
                .map(|(j, c)| LimitColumnSummary {
                    name: c.name.to_string(),
                    flag: c.flag.clone(),
                    strictly_decreasing: s.strictly_decreasing(j),
                    loglog_slope: s.loglog_slope(j).and_then(finite),
                    converges: s.column_converges(j),
                })
                .collect(),
            rows: s.rows.iter().map(|r| r.norms.iter().map(|&x| finite(x)).collect()).collect(),
            annotations: s.annotations.clone(),
            contract_holds: s.contract_holds(),
        }
    }
}

#[derive(Serialize)]
struct ConvergenceSummary {
    manufactured: String,
    steps: Vec<usize>,
    errors: Vec<Option<f64>>,
    orders: Vec<Option<f64>>,
    fitted_order: Option<f64>,
}

impl ConvergenceSummary {
    fn of(which: Manufactured, t: &ConvergenceTable) -> Self {
        ConvergenceSummary {
            manufactured: which.name().into(),
            steps: t.steps.clone(),
            errors: t.errors.iter().map(|&x| finite(x)).collect(),
            orders: t.orders.iter().map(|&x| finite(x)).collect(),
            fitted_order: finite(t.fitted_order),
        }
    }
}

#[derive(Serialize)]
struct RunSummary {
    schema_version: u32,
    model: ModelInfo,
    grid: GridInfo,
    solver: SolverInfo,
    energy_low: EnergySummary,
    energy_high: EnergySummary,
    classical_cross_check: Option<CrossCheck>,
    property_checks: PropertyChecks,
    kernel: Option<KernelSummary>,
    limit_study: Option<LimitSummary>,
    convergence: Option<ConvergenceSummary>,
}

/// Solution of one configured problem plus solver statistics.
pub struct Solved {
    pub trajectory: Trajectory<f64>,
    solver: SolverInfo,
}

pub fn solve(p: &Problem) -> Result<Solved, CliError> {
    match p.spec.backend() {
        Backend::ResidualOnly => Err(CliError::Config(format!("{} has no solver backend (residual only)", p.spec.variant()))),
        Backend::Memory => {
            let rec = solve_memory(&p.spec, &p.data, &p.source)?;
            Ok(Solved {
                trajectory: rec.trajectory,
                solver: SolverInfo { iterations: 0, contraction: None, distances: Vec::new(), recovery_discrepancy: finite(rec.discrepancy) },
            })
        }
        Backend::Volterra => {
            let rep = solve_model(&p.spec, &p.data, &p.source, &PicardOptions::default())?;
            Ok(Solved {
                trajectory: rep.trajectory,
                solver: SolverInfo {
                    iterations: rep.iterations,
                    contraction: rep.contraction.and_then(finite),
                    distances: rep.distances.iter().map(|&d| finite(d)).collect(),
                    recovery_discrepancy: None,
                },
            })
        }
    }
}

fn domain_center(p: &Problem) -> Vec<f64> {
    match p.basis.domain() {
        Domain::Interval { length } => vec![0.5 * length],
        Domain::Rectangle { lx, ly } => vec![0.5 * lx, 0.5 * ly],
    }
}

fn weighted(c: &[f64], lam: &[f64], m: i32) -> f64 {
    c.iter().zip(lam).map(|(&x, &l)| l.powi(m) * x * x).sum::<f64>().sqrt()
}

/// Per-node diagnostic value by name.
fn diagnostic(name: &str, tr: &Trajectory<f64>, n: usize, center: &[f64]) -> f64 {
    let lam = tr.basis().eigenvalues();
    match name {
        "psi_L2" => weighted(tr.psi.node(n), lam, 0),
        "grad_psi" => weighted(tr.psi.node(n), lam, 1),
        "psi_t_L2" => weighted(tr.psi_t.node(n), lam, 0),
        "grad_psi_t" => weighted(tr.psi_t.node(n), lam, 1),
        "psi_tt_L2" => weighted(tr.psi_tt.node(n), lam, 0),
        "lap_psi" => weighted(tr.psi.node(n), lam, 2),
        "center" => tr.psi_at(n).evaluate(center),
        _ => f64::NAN,
    }
}

fn write_trajectory(dir: &Path, cfg: &RunConfig, p: &Problem, tr: &Trajectory<f64>) -> Result<(), CliError> {
    let center = domain_center(p);
    let mut header = vec!["t".to_string()];
    header.extend(cfg.output.diagnostics.iter().cloned());
    let grid = tr.grid();
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|n| std::iter::once(grid.node(n)).chain(cfg.output.diagnostics.iter().map(|d| diagnostic(d, tr, n, &center))).collect())
        .collect();
    write_csv(&dir.join("trajectory.csv"), &header, &rows)
}

fn write_energy(dir: &Path, low: &EnergyReport, high: &EnergyReport) -> Result<(), CliError> {
    let mut header: Vec<String> = ["t", "low_lhs", "low_rhs", "low_coercivity", "high_lhs", "high_rhs", "high_coercivity"].map(String::from).to_vec();
    header.extend(NORM_NAMES.iter().map(|s| s.to_string()));
    let rows: Vec<Vec<f64>> = (0..low.times.len())
        .map(|n| {
            let mut r = vec![low.times[n], low.lhs[n], low.rhs[n], low.coercivity[n], high.lhs[n], high.rhs[n], high.coercivity[n]];
            r.extend(NORM_NAMES.iter().map(|&name| low.norm(name).map_or(f64::NAN, |v| v[n])));
            r
        })
        .collect();
    write_csv(&dir.join("energy.csv"), &header, &rows)
}

/// Randomized checks of the coercivity and product inequalities on smooth
/// trigonometric signals drawn from the seeded generator.
fn property_checks(seed: u64) -> Result<PropertyChecks, CliError> {
    const SIGNALS: usize = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = TimeGrid::new(1.0, 256)?;
    let h = grid.step();
    let mut abel_min = f64::INFINITY;
    let mut gap_min = f64::INFINITY;
    let mut kp_max: f64 = 0.0;
    for i in 0..SIGNALS {
        let terms: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..5)).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..12.0), rng.gen_range(0.0..6.3))).collect();
        let w = SampledSignal::scalar_fn(grid, |t| terms.iter().map(|&(a, f, p)| a * (f * t + p).sin()).sum());
        let alpha = rng.gen_range(0.05..0.95);
        abel_min = abel_min.min(coercivity_quadform(&w, alpha)?);
        let order = if i % 2 == 0 { 0.3 } else { 0.7 };
        gap_min = gap_min.min(alikhanov_gap(&w, order)?.values().iter().copied().fold(f64::INFINITY, f64::min));
        let shifted: Vec<f64> = w.values().iter().map(|x| x + 0.5).collect();
        let g: Vec<f64> = grid.nodes().map(|t| (3.0 * t).cos() + 0.5).collect();
        kp_max = kp_max.max(kato_ponce_ratio(&shifted, &g, h, rng.gen_range(0.05..0.95)));
    }
    Ok(PropertyChecks {
        seed,
        signals: SIGNALS,
        abel_form_min: abel_min,
        alikhanov_gap_min: gap_min,
        kato_ponce_max: kp_max,
        pass: abel_min >= -1e-10 && gap_min >= -1e-10 && kp_max < 100.0,
    })
}

fn wants(cfg: &RunConfig, f: Format) -> bool {
    cfg.output.formats.contains(&f)
}

fn sweep_label(alpha: f64) -> String {
    format!("alpha-{alpha}")
}

#[derive(Serialize)]
struct SweepEntry {
    alpha: f64,
    directory: String,
    ok: bool,
    error: Option<String>,
}

/// Per-α solves of a sweep, each written to its own directory; the index is
/// written last so readers never see a partial table.
fn run_sweep(dir: &Path, cfg: &RunConfig, alphas: &[f64]) -> Result<(), CliError> {
    let entries: Vec<SweepEntry> = alphas
        .par_iter()
        .map(|&a| {
            let label = sweep_label(a);
            let sub = dir.join("sweep").join(&label);
            let mut c = cfg.clone();
            c.model.alpha = a;
            let res = (|| -> Result<(), CliError> {
                let p = c.problem()?;
                let s = solve(&p)?;
                let low = energy_low(&p.spec, &s.trajectory, &p.data, &p.source)?;
                let high = energy_high(&p.spec, &s.trajectory, &p.data, &p.source)?;
                write_trajectory(&sub, &c, &p, &s.trajectory)?;
                write_energy(&sub, &low, &high)
            })();
            SweepEntry { alpha: a, directory: format!("sweep/{label}"), ok: res.is_ok(), error: res.err().map(|e| e.to_string()) }
        })
        .collect();
    write_json(&dir.join("sweep").join("index.json"), &entries)
}

pub fn run(cfg: &RunConfig, g: &Globals) -> Result<PathBuf, CliError> {
    let dir = g.out_dir(Some(cfg));
    append_log(&dir, &format!("run {} {} alpha={}", cfg.model.family, cfg.model.nonlinearity, cfg.model.alpha))?;
    let p = cfg.problem()?;
    let solved = solve(&p)?;
    let tr = &solved.trajectory;
    let low = energy_low(&p.spec, tr, &p.data, &p.source)?;
    let high = energy_high(&p.spec, tr, &p.data, &p.source)?;

    let cross = if p.spec.alpha() == 1.0 && p.spec.nonlinearity() == Nonlinearity::Linear && p.spec.family() != Family::II {
        let d = classical_cross_check(&p.spec, tr, &p.data)?;
        Some(CrossCheck { discrepancy: finite(d), tolerance: 1e-8, pass: d < 1e-8 })
    } else {
        None
    };
    let kernel = if p.spec.family() == Family::II {
        kernel_report(&[p.spec.alpha()], p.spec.params().tau)?.first().map(KernelSummary::of)
    } else {
        None
    };
    let study = cfg.study.clone().unwrap_or_default();
    let limit = match &study.alpha_sweep {
        Some(a) => Some(LimitSummary::of(&limit_study(&p.spec, &p.data, &p.source, a)?)),
        None => None,
    };
    let convergence = match (&study.n_sweep, cfg.manufactured()) {
        (Some(ns), Some(which)) => Some(ConvergenceSummary::of(which, &convergence_table(&p.spec, which, ns, cfg.time.horizon)?)),
        _ => None,
    };

    if wants(cfg, Format::Csv) {
        write_trajectory(&dir, cfg, &p, tr)?;
        write_energy(&dir, &low, &high)?;
        if let Some(a) = &study.alpha_sweep {
            run_sweep(&dir, cfg, a)?;
        }
    }
    if wants(cfg, Format::Json) {
        let summary = RunSummary {
            schema_version: cfg.schema_version,
            model: ModelInfo {
                family: p.spec.family().to_string(),
                nonlinearity: p.spec.nonlinearity().to_string(),
                alpha: p.spec.alpha(),
                beta: p.spec.beta(),
                gamma_z: p.spec.gamma_z(),
                backend: p.spec.backend().to_string(),
            },
            grid: GridInfo { horizon: cfg.time.horizon, steps: cfg.time.steps, modes: p.basis.len(), dimension: p.basis.dimension() },
            solver: solved.solver,
            energy_low: EnergySummary::of(&low),
            energy_high: EnergySummary::of(&high),
            classical_cross_check: cross,
            property_checks: property_checks(g.seed)?,
            kernel,
            limit_study: limit,
            convergence,
        };
        write_json(&dir.join("summary.json"), &summary)?;
    }
    append_log(&dir, "run finished")?;
    Ok(dir)
}

// -------------------------------------------------------------------- kernels

pub fn kernels(cfg: Option<&RunConfig>, g: &Globals) -> Result<PathBuf, CliError> {
    let dir = g.out_dir(cfg);
    let alphas = cfg.and_then(|c| c.study.as_ref()?.alpha_sweep.clone()).unwrap_or_else(|| DEFAULT_KERNEL_ALPHAS.to_vec());
    let tau = cfg.map_or(1.0, |c| c.model.tau);
    append_log(&dir, &format!("kernels tau={tau}"))?;
    let rows = kernel_report(&alphas, tau)?;
    let tri = |c: Option<bool>| match c {
        Some(true) => "pass".to_string(),
        Some(false) => "fail".to_string(),
        None => "n/a".to_string(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["alpha", "nonnegative", "singular_at_zero", "unit_mass", "monotone", "gram_min_eigenvalue"].map(String::from).to_vec();
    for t in fmgt_core::analysis::KERNEL_MASS_HORIZONS {
        header.push(format!("mass_closed_T{t}"));
        header.push(format!("mass_quadrature_T{t}"));
    }
    w.write_record(&header)?;
    for r in &rows {
        let mut rec = vec![
            crate::output::fmt_float(r.alpha),
            tri(r.nonnegative.pass),
            tri(r.singular_at_zero.pass),
            tri(r.unit_mass.pass),
            tri(r.monotone.pass),
            crate::output::fmt_float(r.gram_min_eigenvalue),
        ];
        for &(_, closed, quad) in &r.masses {
            rec.push(crate::output::fmt_float(closed));
            rec.push(crate::output::fmt_float(quad));
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    crate::output::write_atomic(&dir.join("kernels.csv"), &bytes)?;
    let summary: Vec<KernelSummary> = rows.iter().map(KernelSummary::of).collect();
    write_json(&dir.join("kernels.json"), &summary)?;
    Ok(dir)
}

// ---------------------------------------------------------------- limit-study

pub fn limit(cfg: &RunConfig, g: &Globals) -> Result<PathBuf, CliError> {
    let dir = g.out_dir(Some(cfg));
    let alphas = cfg.study.as_ref().and_then(|s| s.alpha_sweep.clone()).unwrap_or_else(|| DEFAULT_LIMIT_ALPHAS.to_vec());
    append_log(&dir, &format!("limit-study {}", cfg.model.family))?;
    let p = cfg.problem()?;
    let s = limit_study(&p.spec, &p.data, &p.source, &alphas)?;
    let mut header = vec!["alpha".to_string()];
    header.extend(s.columns.iter().map(|c| c.name.to_string()));
    let rows: Vec<Vec<f64>> = s.rows.iter().map(|r| std::iter::once(r.alpha).chain(r.norms.iter().copied()).collect()).collect();
    write_csv(&dir.join("limit.csv"), &header, &rows)?;
    write_json(&dir.join("limit.json"), &LimitSummary::of(&s))?;
    Ok(dir)
}

// ---------------------------------------------------------------- convergence

pub fn convergence(cfg: &RunConfig, g: &Globals) -> Result<PathBuf, CliError> {
    let dir = g.out_dir(Some(cfg));
    let steps = cfg.study.as_ref().and_then(|s| s.n_sweep.clone()).unwrap_or_else(|| DEFAULT_N_SWEEP.to_vec());
    let which = cfg.manufactured().unwrap_or(Manufactured::Exponential);
    append_log(&dir, &format!("convergence {} {}", cfg.model.family, which.name()))?;
    let spec = cfg.spec().map_err(CliError::Config)?;
    let t = convergence_table(&spec, which, &steps, cfg.time.horizon)?;
    let header: Vec<String> = ["N", "h", "error", "order"].map(String::from).to_vec();
    let rows: Vec<Vec<f64>> = t
        .steps
        .iter()
        .enumerate()
        .map(|(i, &n)| vec![n as f64, cfg.time.horizon / n as f64, t.errors[i], if i == 0 { f64::NAN } else { t.orders[i - 1] }])
        .collect();
    write_csv(&dir.join("convergence.csv"), &header, &rows)?;
    write_json(&dir.join("convergence.json"), &ConvergenceSummary::of(which, &t))?;
    Ok(dir)
}
