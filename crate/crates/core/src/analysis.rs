//! Verification harness: energy functionals, α → 1⁻ limit studies, kernel
//! property tables, convergence tables and a few reference integrators.
//!
//! Everything here runs in `f64`. Norms are taken from mode coefficients only.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fractional::{abel_integral, caputo_derivative, difference_derivative, SampledSignal, TimeGrid};
use crate::memory::solve_memory;
use crate::mittag_leffler::{kernel_mass_quadrature, RelaxationKernel};
use crate::model::{Family, MediumParams, ModelSpec, Nonlinearity};
use crate::special::{gamma, recip_gamma};
use crate::spectral::EigenBasis;
use crate::trajectory::{InitialData, Trajectory};
use crate::volterra::{solve_model, PicardOptions};

/// Solves any model with a solver backend: family II through the z-form,
/// everything else through the Volterra path.
pub fn solve_any(spec: &ModelSpec<f64>, data: &InitialData<f64>, f: &SampledSignal<f64>) -> Result<Trajectory<f64>> {
    if spec.family() == Family::II {
        if spec.nonlinearity() != Nonlinearity::Linear {
            return Err(Error::Unsupported(format!("{} has no solver backend (residual only)", spec.variant())));
        }
        return Ok(solve_memory(spec, data, f)?.trajectory);
    }
    Ok(solve_model(spec, data, f, &PicardOptions::default())?.trajectory)
}

/// `Σ λ_i^m c_i²` for integer `m` (negative allowed).
fn seminorm_sq(coeffs: &[f64], lam: &[f64], m: i32) -> f64 {
    coeffs.iter().zip(lam).map(|(&c, &l)| l.powi(m) * c * c).sum()
}

fn series(s: &SampledSignal<f64>, lam: &[f64], m: i32) -> Vec<f64> {
    (0..s.len()).map(|n| seminorm_sq(s.node(n), lam, m).sqrt()).collect()
}

fn running_max(v: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    v.iter()
        .map(|&x| {
            m = m.max(x);
            m
        })
        .collect()
}

/// Cumulative trapezoid integral.
fn cumulative(v: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for n in 1..v.len() {
        out[n] = out[n - 1] + 0.5 * h * (v[n - 1] + v[n]);
    }
    out
}

fn scale_modes(s: &SampledSignal<f64>, lam: &[f64], power: f64) -> SampledSignal<f64> {
    let mut out = s.clone();
    for n in 0..s.len() {
        for (x, &l) in out.node_mut(n).iter_mut().zip(lam) {
            *x *= l.powf(power);
        }
    }
    out
}

/// Third time derivative: the Volterra unknown for family III, a difference
/// quotient of `ψ_tt` otherwise.
fn third_derivative(spec: &ModelSpec<f64>, tr: &Trajectory<f64>) -> Result<SampledSignal<f64>> {
    match (&tr.mu, spec.family()) {
        (Some(mu), Family::III) => Ok(mu.clone()),
        _ => difference_derivative(&tr.psi_tt),
    }
}

/// Which energy estimate a report follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyLevel {
    Low,
    High,
}

/// Per-node norm history with its label.
#[derive(Clone, Debug)]
pub struct NormSeries {
    pub name: &'static str,
    pub values: Vec<f64>,
}

/// Sampled energy estimate for one run.
#[derive(Clone, Debug)]
pub struct EnergyReport {
    pub level: EnergyLevel,
    pub alpha: f64,
    pub times: Vec<f64>,
    /// Plain seminorm histories: ‖ψ_tt‖, ‖∇ψ_t‖, ‖∇ψ‖, ‖Δψ_t‖, ‖Δψ_tt‖, ‖∇Δψ_t‖.
    pub norms: Vec<NormSeries>,
    /// Cumulative coercivity form `∫_0^t ⟨I^α w, w⟩` with `w = ∇ψ_tt` (low) or `Δψ_tt` (high).
    pub coercivity: Vec<f64>,
    /// α-uniform left side of the estimate.
    pub lhs: Vec<f64>,
    /// Data side without the constant.
    pub rhs: Vec<f64>,
    /// Smallest `C` with `lhs ≤ C rhs` at every node (0 when the data vanish).
    pub constant: f64,
    /// Least-squares fit of `lhs ≈ C rhs` over the nodes and its relative residual.
    pub ls_constant: f64,
    pub ls_residual: f64,
    /// `cos(απ/2)` times the final coercivity form, and its ratio to the
    /// final data side; `None` at α = 1 where the term is absent.
    pub cos_term: Option<f64>,
    pub cos_constant: Option<f64>,
}

impl EnergyReport {
    pub fn norm(&self, name: &str) -> Option<&[f64]> {
        self.norms.iter().find(|s| s.name == name).map(|s| s.values.as_slice())
    }

    /// Largest value of a named norm over the run.
    pub fn peak(&self, name: &str) -> Option<f64> {
        self.norm(name).map(|v| v.iter().copied().fold(0.0, f64::max))
    }
}

pub const NORM_NAMES: [&str; 6] = ["psi_tt_L2", "grad_psi_t", "grad_psi", "lap_psi_t", "lap_psi_tt", "grad_lap_psi_t"];

fn fit_constants(lhs: &[f64], rhs: &[f64]) -> (f64, f64, f64) {
    let mut c: f64 = 0.0;
    for (&l, &r) in lhs.iter().zip(rhs) {
        if r > 0.0 {
            c = c.max(l / r);
        }
    }
    let rr: f64 = rhs.iter().map(|r| r * r).sum();
    if rr == 0.0 {
        return (c, 0.0, 0.0);
    }
    let ls = lhs.iter().zip(rhs).map(|(l, r)| l * r).sum::<f64>() / rr;
    let ll: f64 = lhs.iter().map(|l| l * l).sum();
    let res: f64 = lhs.iter().zip(rhs).map(|(l, r)| (l - ls * r).powi(2)).sum();
    (c, ls, if ll > 0.0 { (res / ll).sqrt() } else { 0.0 })
}

fn energy(level: EnergyLevel, spec: &ModelSpec<f64>, tr: &Trajectory<f64>, data: &InitialData<f64>, f: &SampledSignal<f64>) -> Result<EnergyReport> {
    f.check_compatible(&tr.psi)?;
    let lam = tr.basis().eigenvalues().to_vec();
    let grid = *tr.grid();
    let h = grid.step();
    let alpha = spec.alpha();
    let psi_ttt = third_derivative(spec, tr)?;

    let norms = vec![
        NormSeries { name: NORM_NAMES[0], values: series(&tr.psi_tt, &lam, 0) },
        NormSeries { name: NORM_NAMES[1], values: series(&tr.psi_t, &lam, 1) },
        NormSeries { name: NORM_NAMES[2], values: series(&tr.psi, &lam, 1) },
        NormSeries { name: NORM_NAMES[3], values: series(&tr.psi_t, &lam, 2) },
        NormSeries { name: NORM_NAMES[4], values: series(&tr.psi_tt, &lam, 2) },
        NormSeries { name: NORM_NAMES[5], values: series(&tr.psi_t, &lam, 3) },
    ];

    // the level shifts every spatial weight by one power of λ^{1/2}
    let shift = match level {
        EnergyLevel::Low => 0,
        EnergyLevel::High => 1,
    };
    let sq = |s: &SampledSignal<f64>, m: i32| -> Vec<f64> { (0..s.len()).map(|n| seminorm_sq(s.node(n), &lam, m + shift)).collect() };

    let state: Vec<f64> = sq(&tr.psi, 1).iter().zip(sq(&tr.psi_t, 1)).map(|(a, b)| a + b).collect();
    let accel = sq(&tr.psi_tt, 0);
    let jerk = cumulative(&sq(&psi_ttt, -1), h);
    let mut lhs: Vec<f64> = running_max(&state)
        .iter()
        .zip(running_max(&accel))
        .zip(&jerk)
        .map(|((a, b), c)| a + b + c)
        .collect();

    let weighted_tt = scale_modes(&tr.psi_tt, &lam, 0.5 * (1 + shift) as f64);
    let (coercivity, cos_term) = if alpha < 1.0 {
        let v = abel_integral(&weighted_tt, alpha)?;
        let dots: Vec<f64> = (0..grid.len())
            .map(|n| v.node(n).iter().zip(weighted_tt.node(n)).map(|(a, b)| a * b).sum())
            .collect();
        // I^{1-α} ‖∇D^{1-α}ψ_t‖², α-uniform
        let d = caputo_derivative(&scale_modes(&tr.psi_t, &lam, 0.5 * (1 + shift) as f64), 1.0 - alpha)?;
        let dn = SampledSignal::from_flat(grid, 1, (0..grid.len()).map(|n| d.node(n).iter().map(|x| x * x).sum()).collect())?;
        let memory = running_max(abel_integral(&dn, 1.0 - alpha)?.values());
        for (l, m) in lhs.iter_mut().zip(&memory) {
            *l += m;
        }
        let q = cumulative(&dots, h);
        let cos = (alpha * PI / 2.0).cos() * q.last().copied().unwrap_or(0.0);
        (q, Some(cos))
    } else {
        (vec![0.0; grid.len()], None)
    };

    let forcing = cumulative(&(0..f.len()).map(|n| seminorm_sq(f.node(n), &lam, shift)).collect::<Vec<_>>(), h);
    let d0 = seminorm_sq(data.psi0.coeffs(), &lam, 1 + shift) + seminorm_sq(data.psi1.coeffs(), &lam, 1 + shift) + seminorm_sq(data.psi2.coeffs(), &lam, shift);
    let rhs: Vec<f64> = forcing.iter().map(|x| x + d0).collect();

    let (constant, ls_constant, ls_residual) = fit_constants(&lhs, &rhs);
    let last = *rhs.last().unwrap_or(&0.0);
    let cos_constant = cos_term.map(|c| if last > 0.0 { c / last } else { 0.0 });
    Ok(EnergyReport {
        level,
        alpha,
        times: grid.nodes().collect(),
        norms,
        coercivity,
        lhs,
        rhs,
        constant,
        ls_constant,
        ls_residual,
        cos_term,
        cos_constant,
    })
}

/// Lower-order energy estimate: `W^{1,∞}(H¹) ∩ W^{2,∞}(L²)` plus `ψ_ttt` in
/// `L²(H^{-1})` against `‖f‖_{L²(L²)}` and `(∇ψ0, ∇ψ1, ψ2)`.
pub fn energy_low(spec: &ModelSpec<f64>, tr: &Trajectory<f64>, data: &InitialData<f64>, f: &SampledSignal<f64>) -> Result<EnergyReport> {
    energy(EnergyLevel::Low, spec, tr, data, f)
}

/// Higher-order energy estimate: one more spatial derivative on every term.
pub fn energy_high(spec: &ModelSpec<f64>, tr: &Trajectory<f64>, data: &InitialData<f64>, f: &SampledSignal<f64>) -> Result<EnergyReport> {
    energy(EnergyLevel::High, spec, tr, data, f)
}

/// True when every successive value grows by more than `ratio`.
pub fn diverges_under_refinement(values: &[f64], ratio: f64) -> bool {
    values.len() >= 2 && values.windows(2).all(|w| w[1] > ratio * w[0])
}

/// Relative spread `(max - min) / min` of a sequence of fitted constants.
pub fn relative_spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    if lo > 0.0 {
        (hi - lo) / lo
    } else {
        f64::INFINITY
    }
}

/// One column of a limit-study table.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitColumn {
    pub name: &'static str,
    /// Set when the convergence claim for this column needs extra hypotheses
    /// the data do not meet.
    pub flag: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitRow {
    pub alpha: f64,
    pub norms: Vec<f64>,
}

/// Difference norms `‖ψ^α - ψ^1‖` along an α sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitStudy {
    pub family: Family,
    pub columns: Vec<LimitColumn>,
    pub rows: Vec<LimitRow>,
    pub annotations: Vec<String>,
}

impl LimitStudy {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.norms[j]).collect()
    }

    fn fractional_rows(&self) -> impl Iterator<Item = &LimitRow> {
        self.rows.iter().filter(|r| r.alpha < 1.0)
    }

    pub fn strictly_decreasing(&self, j: usize) -> bool {
        let v: Vec<f64> = self.fractional_rows().map(|r| r.norms[j]).collect();
        v.len() >= 2 && v.windows(2).all(|w| w[1] < w[0])
    }

    /// Least-squares slope of `log norm` against `log(1 - α)`.
    pub fn loglog_slope(&self, j: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .fractional_rows()
            .filter(|r| r.norms[j] > 0.0)
            .map(|r| ((1.0 - r.alpha).ln(), r.norms[j].ln()))
            .collect();
        least_squares_slope(&pts)
    }

    /// Decreasing column with positive log-log slope.
    pub fn column_converges(&self, j: usize) -> bool {
        self.strictly_decreasing(j) && self.loglog_slope(j).is_some_and(|s| s > 0.0)
    }

    /// Every unflagged column converges.
    pub fn contract_holds(&self) -> bool {
        self.columns.iter().enumerate().filter(|(_, c)| c.flag.is_none()).all(|(j, _)| self.column_converges(j))
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

const LIMIT_P: f64 = 4.0;

fn difference_columns(family: Family, a: &Trajectory<f64>, b: &Trajectory<f64>) -> Result<Vec<f64>> {
    let lam = a.basis().eigenvalues();
    let e = a.psi.zip_with(&b.psi, |x, y| x - y)?;
    let et = a.psi_t.zip_with(&b.psi_t, |x, y| x - y)?;
    let ett = a.psi_tt.zip_with(&b.psi_tt, |x, y| x - y)?;
    let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
    let n = e.len();
    if family == Family::II {
        let l2: Vec<f64> = (0..n).map(|j| seminorm_sq(e.node(j), lam, 0).sqrt()).collect();
        let l2t: Vec<f64> = (0..n).map(|j| seminorm_sq(et.node(j), lam, 0).sqrt()).collect();
        let h1: Vec<f64> = (0..n).map(|j| seminorm_sq(e.node(j), lam, 1).sqrt()).collect();
        let w = a.grid().trapezoid_weights();
        let lp = |v: &[f64]| v.iter().zip(&w).map(|(x, wt)| wt * x.powf(LIMIT_P)).sum::<f64>();
        let w1p = (lp(&l2) + lp(&l2t)).powf(1.0 / LIMIT_P);
        let w1inf = l2.iter().chain(&l2t).copied().fold(0.0, f64::max);
        Ok(vec![w1p, max(h1), w1inf])
    } else {
        let w1: Vec<f64> = (0..n).map(|j| (seminorm_sq(e.node(j), lam, 1) + seminorm_sq(et.node(j), lam, 1)).sqrt()).collect();
        let w2: Vec<f64> = (0..n).map(|j| seminorm_sq(ett.node(j), lam, 0).sqrt()).collect();
        Ok(vec![max(w1), max(w2)])
    }
}

/// Norms of the α = 1 solution that the limit arguments for the
/// fractional-leading families assume finite.
fn assumed_regularity(tr: &Trajectory<f64>) -> Result<Vec<(String, f64)>> {
    let lam = tr.basis().eigenvalues();
    let w = tr.grid().trapezoid_weights();
    let l1 = |s: &SampledSignal<f64>, m: i32| -> f64 { (0..s.len()).map(|n| w[n] * seminorm_sq(s.node(n), lam, m).sqrt()).sum() };
    let l2 = |s: &SampledSignal<f64>, m: i32| -> f64 { (0..s.len()).map(|n| w[n] * seminorm_sq(s.node(n), lam, m)).sum::<f64>().sqrt() };
    let p3 = difference_derivative(&tr.psi_tt)?;
    let p4 = difference_derivative(&p3)?;
    let lap_tt = difference_derivative(&tr.psi_t)?;
    let lap_t = difference_derivative(&lap_tt)?;
    Ok(vec![
        ("grad psi_tt in L2(L2)".into(), l2(&tr.psi_tt, 1)),
        ("psi_tt in W21(L2)".into(), l1(&tr.psi_tt, 0) + l1(&p3, 0) + l1(&p4, 0)),
        ("lap psi in W21(L2)".into(), l1(&tr.psi, 2) + l1(&tr.psi_t, 2) + l1(&lap_tt, 2)),
        ("lap psi_t in W11(L2)".into(), l1(&tr.psi_t, 2) + l1(&lap_t, 2)),
    ])
}

/// Threshold above which an assumed-regularity norm is annotated as large.
pub const REGULARITY_WARN: f64 = 1e6;

/// Runs the model at each α (and once at α = 1) on identical grid, data and
/// source, and tabulates `‖ψ^α - ψ^1‖`.
///
/// The α list is sorted and deduplicated, so the table does not depend on
/// the order it was given in. Solves run in parallel.
pub fn limit_study(spec: &ModelSpec<f64>, data: &InitialData<f64>, f: &SampledSignal<f64>, alphas: &[f64]) -> Result<LimitStudy> {
    let family = spec.family();
    if data.psi1.coeffs().iter().any(|&x| x != 0.0) {
        return Err(Error::Domain("limit studies need ψ1 = 0".into()));
    }
    if family == Family::II && data.psi2.coeffs().iter().any(|&x| x != 0.0) {
        return Err(Error::Domain("family II limit studies need ψ2 = 0".into()));
    }
    let mut alphas = alphas.to_vec();
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::Domain("α values must be finite".into()));
    }
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let reference = solve_any(&spec.with_alpha(1.0)?, data, f)?;
    let rows = alphas
        .par_iter()
        .map(|&a| {
            let tr = if a == 1.0 { reference.clone() } else { solve_any(&spec.with_alpha(a)?, data, f)? };
            Ok(LimitRow { alpha: a, norms: difference_columns(family, &tr, &reference)? })
        })
        .collect::<Result<Vec<_>>>()?;

    let columns = if family == Family::II {
        let psi0_zero = data.psi0.coeffs().iter().all(|&x| x == 0.0);
        vec![
            LimitColumn { name: "W1p_L2", flag: None },
            LimitColumn { name: "Linf_H1", flag: None },
            LimitColumn { name: "W1inf_L2", flag: (!psi0_zero).then(|| "requires ψ0 = 0".to_string()) },
        ]
    } else {
        vec![LimitColumn { name: "W1inf_H1", flag: None }, LimitColumn { name: "W2inf_L2", flag: None }]
    };

    let mut annotations = Vec::new();
    if family.fractional_leading() && family != Family::II {
        for (name, value) in assumed_regularity(&reference)? {
            let note = if value > REGULARITY_WARN { " (large)" } else { "" };
            annotations.push(format!("{name} = {value:.6e}{note}"));
        }
    }
    Ok(LimitStudy { family, columns, rows, annotations })
}

/// Outcome of one property check; `pass` is `None` when the property does not apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Check {
    pub pass: Option<bool>,
    pub margin: f64,
}

impl Check {
    fn at_least_zero(margin: f64) -> Self {
        Check { pass: Some(margin >= 0.0), margin }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelRow {
    pub alpha: f64,
    pub nonnegative: Check,
    pub singular_at_zero: Check,
    pub unit_mass: Check,
    pub monotone: Check,
    /// `(T, closed-form mass, quadrature mass)`.
    pub masses: Vec<(f64, f64, f64)>,
    /// Smallest eigenvalue of the cell-averaged convolution Gram matrix.
    pub gram_min_eigenvalue: f64,
}

impl KernelRow {
    pub fn all_pass(&self) -> bool {
        [self.nonnegative, self.singular_at_zero, self.unit_mass, self.monotone].iter().all(|c| c.pass != Some(false))
    }
}

pub const KERNEL_MASS_HORIZONS: [f64; 3] = [1.0, 10.0, 100.0];

/// Log-spaced sample points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

/// Property table of the relaxation kernel over an α grid.
pub fn kernel_report(alphas: &[f64], tau: f64) -> Result<Vec<KernelRow>> {
    let pts = log_grid(1e-4 * tau, 1e2 * tau, 60);
    alphas
        .iter()
        .map(|&a| {
            let k = RelaxationKernel::new(a, tau)?;
            let vals = pts.iter().map(|&t| k.value(t)).collect::<Result<Vec<_>>>()?;
            let nonnegative = Check::at_least_zero(vals.iter().copied().fold(f64::INFINITY, f64::min));
            let mut drop = vals.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
            for &t in &pts {
                drop = drop.min(-k.derivative(t)?);
            }
            let monotone = Check::at_least_zero(drop);
            let singular_at_zero = if a == 1.0 {
                Check { pass: None, margin: 1.0 / tau }
            } else {
                // log-slope over six decades towards the origin; t^{α-1} gives 1 - α
                let near = k.value(1e-12 * tau)?;
                let far = k.value(1e-6 * tau)?;
                let slope = (near / far).ln() / 1e6f64.ln();
                Check { pass: Some(slope > 0.5 * (1.0 - a)), margin: slope }
            };
            let deficits = (0..=12).map(|e| Ok(1.0 - k.mass(10f64.powi(e) * tau)?)).collect::<Result<Vec<f64>>>()?;
            let last = *deficits.last().unwrap();
            let decreasing = deficits.windows(2).all(|w| w[1] <= w[0]);
            let unit_mass = Check { pass: Some(decreasing && last < 1e-2), margin: last };
            let masses = KERNEL_MASS_HORIZONS
                .iter()
                .map(|&t| Ok((t, k.mass(t)?, kernel_mass_quadrature(&k, t))))
                .collect::<Result<Vec<_>>>()?;
            let gram = k.gram_matrix(0.05 * tau, 40)?;
            let n = gram.len();
            let m = nalgebra::DMatrix::from_fn(n, n, |i, j| gram[i][j]);
            let gram_min_eigenvalue = m.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(KernelRow { alpha: a, nonnegative, singular_at_zero, unit_mass, monotone, masses, gram_min_eigenvalue })
        })
        .collect()
}

/// Generalised power series `Σ a_k t^{k+s}` with exact fractional calculus.
#[derive(Clone, Debug)]
pub struct PowerSeries {
    pub coeffs: Vec<f64>,
    pub shift: f64,
}

impl PowerSeries {
    /// `I^s e^t = Σ t^{k+s} / Γ(k+s+1)`.
    pub fn integrated_exp(s: f64) -> Self {
        let coeffs = (0..48).map(|k| recip_gamma(k as f64 + s + 1.0)).collect();
        PowerSeries { coeffs, shift: s }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.frac(0.0, t)
    }

    /// `D^γ` for `γ ≥ 0` and `I^{-γ}` for `γ < 0`. Caputo and
    /// Riemann-Liouville agree as long as `γ` stays below `shift + 1`.
    pub fn frac(&self, order: f64, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(k, &a)| {
                let p = k as f64 + self.shift;
                a * gamma(p + 1.0) * recip_gamma(p + 1.0 - order) * t.powf(p - order)
            })
            .sum()
    }
}

/// Manufactured solutions available to [`convergence_table`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Manufactured {
    /// Undamped MGT plane mode `cos(c√λ t)` (needs δ = 0, linear family III).
    Wave,
    /// `ψ = I^{2+s} e^t φ1` so that the Volterra unknown is `e^t`
    /// (`s = 1` for family III, `s = α` otherwise), zero data.
    Exponential,
    /// Natural data `ψ0 = φ1`, reference by a doubled grid.
    Richardson,
}

impl Manufactured {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "wave" => Some(Self::Wave),
            "exponential" => Some(Self::Exponential),
            "richardson" => Some(Self::Richardson),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Wave => "wave",
            Self::Exponential => "exponential",
            Self::Richardson => "richardson",
        }
    }
}

/// Source term of the exponential manufactured solution for a linear model.
fn exponential_solution(spec: &ModelSpec<f64>) -> PowerSeries {
    let s = if spec.family() == Family::III { 1.0 } else { spec.alpha() };
    PowerSeries::integrated_exp(2.0 + s)
}

fn exponential_source(spec: &ModelSpec<f64>, lam: f64, t: f64) -> Result<f64> {
    let p = exponential_solution(spec);
    let MediumParams { tau, c, delta, .. } = *spec.params();
    let a = spec.alpha();
    let ta = tau.powf(a);
    let (psi, psi_t, psi_tt, psi_ttt) = (p.eval(t), p.frac(1.0, t), p.frac(2.0, t), p.frac(3.0, t));
    Ok(match spec.family() {
        Family::III => tau * psi_ttt + psi_tt + c * c * lam * psi + tau * c * c * lam * psi_t + delta * lam * p.frac(2.0 - a, t),
        Family::I => ta * p.frac(2.0 + a, t) + psi_tt + c * c * lam * psi + ta * c * c * lam * p.frac(a, t) + delta * lam * p.frac(2.0 - a, t),
        Family::Base => ta * p.frac(2.0 + a, t) + psi_tt + c * c * lam * psi + ta * c * c * lam * p.frac(a, t) + delta * lam * psi_t,
        Family::II => return Err(Error::Unsupported("exponential manufactured solution is not set up for family II".into())),
    })
}

/// Errors and observed orders of a refinement study.
#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub steps: Vec<usize>,
    /// `max_n ‖∇(ψ - ψ_ref)‖`.
    pub errors: Vec<f64>,
    /// Orders between consecutive rows.
    pub orders: Vec<f64>,
    /// Least-squares slope of `log error` against `log h`.
    pub fitted_order: f64,
}

/// Refinement study of one manufactured solution on a single-mode unit interval.
pub fn convergence_table(spec: &ModelSpec<f64>, which: Manufactured, steps: &[usize], horizon: f64) -> Result<ConvergenceTable> {
    if spec.nonlinearity() != Nonlinearity::Linear {
        return Err(Error::Unsupported("convergence tables use linear models".into()));
    }
    let basis = EigenBasis::interval(1.0, 1)?;
    let lam = basis.eigenvalues()[0];
    let mut data = InitialData::zeros(&basis);
    let c = spec.params().c;
    match which {
        Manufactured::Wave => {
            if spec.params().delta != 0.0 || spec.family() != Family::III {
                return Err(Error::Domain("the wave solution needs linear family III with δ = 0".into()));
            }
            data.psi0.coeffs_mut()[0] = 1.0;
            data.psi2.coeffs_mut()[0] = -c * c * lam;
        }
        Manufactured::Exponential => {}
        Manufactured::Richardson => data.psi0.coeffs_mut()[0] = 1.0,
    }
    let source = |grid: TimeGrid<f64>| -> Result<SampledSignal<f64>> {
        match which {
            Manufactured::Exponential => {
                let vals = grid.nodes().map(|t| exponential_source(spec, lam, t)).collect::<Result<Vec<_>>>()?;
                SampledSignal::from_flat(grid, 1, vals)
            }
            _ => Ok(SampledSignal::zeros(grid, 1)),
        }
    };
    let manufactured = exponential_solution(spec);
    let exact = |t: f64| -> f64 {
        match which {
            Manufactured::Wave => (c * lam.sqrt() * t).cos(),
            _ => manufactured.eval(t),
        }
    };
    let runs = steps
        .par_iter()
        .map(|&n| {
            let grid = TimeGrid::new(horizon, n)?;
            let tr = solve_any(spec, &data, &source(grid)?)?;
            let err = if which == Manufactured::Richardson {
                let fine_grid = grid.refined(2);
                let fine = solve_any(spec, &data, &source(fine_grid)?)?;
                (0..grid.len()).map(|j| (tr.psi.node(j)[0] - fine.psi.node(2 * j)[0]).abs()).fold(0.0, f64::max)
            } else {
                grid.nodes().enumerate().map(|(j, t)| (tr.psi.node(j)[0] - exact(t)).abs()).fold(0.0, f64::max)
            };
            Ok(err * lam.sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    let orders = steps
        .windows(2)
        .zip(runs.windows(2))
        .map(|(n, e)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    let pts: Vec<(f64, f64)> = steps.iter().zip(&runs).filter(|(_, &e)| e > 0.0).map(|(&n, &e)| ((horizon / n as f64).ln(), e.ln())).collect();
    Ok(ConvergenceTable { steps: steps.to_vec(), errors: runs, orders, fitted_order: least_squares_slope(&pts).unwrap_or(f64::NAN) })
}

/// Classical linear MGT mode `τy''' + y'' + c²λy + (τc² + δ)λy' = 0` by RK4,
/// returning `(y, y', y'')` at `steps + 1` equispaced times.
pub fn classical_reference(params: &MediumParams<f64>, lam: f64, y0: [f64; 3], horizon: f64, steps: usize, substeps: usize) -> Vec<[f64; 3]> {
    let MediumParams { tau, c, delta, .. } = *params;
    let rhs = |y: [f64; 3]| [y[1], y[2], -(y[2] + c * c * lam * y[0] + (tau * c * c + delta) * lam * y[1]) / tau];
    let h = horizon / (steps * substeps) as f64;
    let mut y = y0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y);
    for _ in 0..steps {
        for _ in 0..substeps {
            let k1 = rhs(y);
            let k2 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
            let k3 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
            let k4 = rhs(std::array::from_fn(|i| y[i] + h * k3[i]));
            y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        out.push(y);
    }
    out
}

/// Max over nodes and modes of `|ψ - ψ_ode|` against [`classical_reference`].
pub fn classical_cross_check(spec: &ModelSpec<f64>, tr: &Trajectory<f64>, data: &InitialData<f64>) -> Result<f64> {
    if spec.alpha() != 1.0 || spec.nonlinearity() != Nonlinearity::Linear {
        return Err(Error::Domain("the ODE cross-check needs a linear model at α = 1".into()));
    }
    let lam = tr.basis().eigenvalues();
    let grid = tr.grid();
    let mut worst: f64 = 0.0;
    for i in 0..lam.len() {
        let y0 = [data.psi0.coeffs()[i], data.psi1.coeffs()[i], data.psi2.coeffs()[i]];
        let r = classical_reference(spec.params(), lam[i], y0, grid.horizon(), grid.steps(), 64);
        for (n, y) in r.iter().enumerate() {
            worst = worst.max((tr.psi.node(n)[i] - y[0]).abs());
        }
    }
    Ok(worst)
}

/// `‖w‖_{H^ρ(0,T)}` of a sampled scalar function via its even periodic
/// extension and the multiplier `(1 + ω²)^{ρ/2}`.
pub fn time_sobolev_norm(samples: &[f64], step: f64, rho: f64) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let m = 2 * (n - 1);
    let mut buf: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let i = if j < n { j } else { m - j };
            Complex::new(samples[i], 0.0)
        })
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(m).process(&mut buf);
    let period = m as f64 * step;
    let s: f64 = buf
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let omega = 2.0 * PI * k.min(m - k) as f64 / period;
            (1.0 + omega * omega).powf(rho) * z.norm_sqr()
        })
        .sum();
    // half the period's L² mass belongs to (0, T)
    (0.5 * s * step / m as f64).sqrt()
}

/// Ratio of `‖fg‖_{H^ρ}` to `‖f‖_{H^ρ}‖g‖_∞ + ‖f‖_∞‖g‖_{H^ρ}`.
pub fn kato_ponce_ratio(f: &[f64], g: &[f64], step: f64, rho: f64) -> f64 {
    let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let rhs = time_sobolev_norm(f, step, rho) * sup(g) + sup(f) * time_sobolev_norm(g, step, rho);
    time_sobolev_norm(&fg, step, rho) / rhs
}
