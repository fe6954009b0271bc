use std::f64::consts::PI;

use fmgt_core::analysis::*;
use fmgt_core::fractional::{SampledSignal, TimeGrid};
use fmgt_core::model::{Family, MediumParams, ModelSpec, ModelVariant, Nonlinearity};
use fmgt_core::spectral::{EigenBasis, SpectralField};
use fmgt_core::trajectory::InitialData;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(tau: f64, c: f64, delta: f64) -> MediumParams<f64> {
    MediumParams { tau, c, delta, k: 0.0, l: 0.0 }
}

fn single_mode_data(basis: &std::sync::Arc<EigenBasis<f64>>) -> InitialData<f64> {
    let mut d = InitialData::zeros(basis);
    d.psi0 = SpectralField::new(basis.clone(), vec![1.0]).unwrap();
    d.psi1 = SpectralField::new(basis.clone(), vec![0.5]).unwrap();
    d.psi2 = SpectralField::new(basis.clone(), vec![-0.3]).unwrap();
    d
}

fn low_constant(family: Family, alpha: f64, n: usize) -> EnergyReport {
    let basis = EigenBasis::interval(1.0, 1).unwrap();
    let spec = ModelSpec::linear(family, params(0.5, 1.0, 0.2), alpha).unwrap();
    let data = single_mode_data(&basis);
    let grid = TimeGrid::new(1.0, n).unwrap();
    let f = SampledSignal::scalar_fn(grid, |t: f64| (2.0 * t).sin());
    let tr = solve_any(&spec, &data, &f).unwrap();
    energy_low(&spec, &tr, &data, &f).unwrap()
}

#[test]
fn zero_data_energy_is_zero() {
    let basis = EigenBasis::interval(1.0, 3).unwrap();
    let spec = ModelSpec::linear(Family::III, params(1.0, 1.0, 0.1), 0.7).unwrap();
    let data = InitialData::zeros(&basis);
    let f = SampledSignal::zeros(TimeGrid::new(1.0, 64).unwrap(), 3);
    let tr = solve_any(&spec, &data, &f).unwrap();
    for rep in [energy_low(&spec, &tr, &data, &f).unwrap(), energy_high(&spec, &tr, &data, &f).unwrap()] {
        assert!(rep.lhs.iter().chain(&rep.rhs).chain(&rep.coercivity).all(|&x| x == 0.0));
        assert_eq!(rep.constant, 0.0);
        assert_eq!(rep.cos_term, Some(0.0));
    }
}

#[test]
fn low_energy_constant_is_stable_under_refinement() {
    for family in [Family::III, Family::I, Family::Base] {
        let cs: Vec<f64> = [128, 256, 512].iter().map(|&n| low_constant(family, 0.7, n).constant).collect();
        assert!(relative_spread(&cs) < 0.2, "{family:?}: {cs:?}");
    }
}

#[test]
fn energy_report_invariants() {
    let rep = low_constant(Family::III, 0.6, 256);
    assert!(rep.lhs.iter().chain(&rep.rhs).all(|x| x.is_finite()));
    assert!(rep.rhs.windows(2).all(|w| w[1] >= w[0]));
    assert!(rep.lhs.iter().zip(&rep.rhs).all(|(l, r)| *l <= rep.constant * r * (1.0 + 1e-12)));
    // coercivity of the Abel form
    assert!(rep.coercivity.iter().all(|&q| q >= -1e-10));
    assert!(rep.cos_term.unwrap() <= *rep.coercivity.last().unwrap());
}

#[test]
fn alpha_uniform_constant_near_one() {
    let at_one = low_constant(Family::III, 1.0, 256);
    assert!(at_one.cos_term.is_none());
    for a in [0.9, 0.99, 0.999] {
        let rep = low_constant(Family::III, a, 256);
        assert!(rep.constant < 2.0 * at_one.constant, "α={a}: {} vs {}", rep.constant, at_one.constant);
    }
}

fn kuznetsov_high(n: usize) -> f64 {
    let basis = EigenBasis::interval(1.0, 8).unwrap();
    let p = MediumParams { tau: 1.0, c: 1.0, delta: 0.1, k: 0.1, l: 0.1 };
    let spec = ModelSpec::new(ModelVariant::new(Family::III, Nonlinearity::Kuznetsov), p, 0.7).unwrap();
    let mut data = InitialData::zeros(&basis);
    data.psi0 = basis.project(|x: &[f64]| 1e-3 * (PI * x[0]).sin());
    data.psi1 = basis.project(|x: &[f64]| 1e-3 * (2.0 * PI * x[0]).sin());
    let f = SampledSignal::zeros(TimeGrid::new(1.0, n).unwrap(), 8);
    let tr = solve_any(&spec, &data, &f).unwrap();
    energy_high(&spec, &tr, &data, &f).unwrap().constant
}

#[test]
fn kuznetsov_high_energy_constant_is_stable() {
    let cs: Vec<f64> = [128, 256].iter().map(|&n| kuznetsov_high(n)).collect();
    assert!(relative_spread(&cs) < 0.2, "{cs:?}");
}

#[test]
fn rough_data_diverge_in_high_norm() {
    let peaks: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&m| {
            let basis = EigenBasis::interval(1.0, m).unwrap();
            let spec = ModelSpec::linear(Family::III, params(1.0, 1.0, 0.1), 0.7).unwrap();
            let mut data = InitialData::zeros(&basis);
            // H¹ but not H²
            let c: Vec<f64> = (1..=m).map(|i| (i as f64).powf(-1.6)).collect();
            data.psi0 = SpectralField::new(basis.clone(), c).unwrap();
            let f = SampledSignal::zeros(TimeGrid::new(0.05, 256).unwrap(), m);
            let tr = solve_any(&spec, &data, &f).unwrap();
            energy_high(&spec, &tr, &data, &f).unwrap().peak("lap_psi_tt").unwrap()
        })
        .collect();
    assert!(diverges_under_refinement(&peaks, 1.2), "{peaks:?}");
}

fn limit_setup(family: Family, psi0: f64) -> (ModelSpec<f64>, InitialData<f64>, SampledSignal<f64>) {
    let basis = EigenBasis::interval(1.0, 4).unwrap();
    let spec = ModelSpec::linear(family, params(0.5, 1.0, 0.2), 0.8).unwrap();
    let mut data = InitialData::zeros(&basis);
    data.psi0 = basis.project(|x: &[f64]| psi0 * 16.0 * (x[0] * (1.0 - x[0])).powi(2));
    let f = SampledSignal::from_fn(TimeGrid::new(1.0, 256).unwrap(), 4, |t: f64| vec![t.cos(), 0.0, 0.5 * t, 0.0]).unwrap();
    (spec, data, f)
}

const ALPHAS: [f64; 5] = [0.6, 0.8, 0.9, 0.95, 0.99];

#[test]
fn family_three_limit_converges() {
    let (spec, data, f) = limit_setup(Family::III, 1.0);
    let study = limit_study(&spec, &data, &f, &ALPHAS).unwrap();
    assert!(study.contract_holds(), "{:?}", study.rows);
    let first = study.rows[0].norms[0];
    assert!(study.rows.last().unwrap().norms[0] < first);
}

#[test]
fn family_two_limit_flags_sup_norm() {
    let (spec, data, f) = limit_setup(Family::II, 1.0);
    let study = limit_study(&spec, &data, &f, &ALPHAS).unwrap();
    assert!(study.column_converges(0), "W1p {:?}", study.column(0));
    assert!(study.column_converges(1), "Linf_H1 {:?}", study.column(1));
    assert_eq!(study.columns[2].flag.as_deref(), Some("requires ψ0 = 0"));
    assert!(study.contract_holds());
    let (spec, data, f) = limit_setup(Family::II, 0.0);
    let study = limit_study(&spec, &data, &f, &[0.8, 0.9]).unwrap();
    assert!(study.columns[2].flag.is_none());
}

#[test]
fn limit_study_is_order_independent_and_exact_at_one() {
    let (spec, data, f) = limit_setup(Family::III, 1.0);
    let a = limit_study(&spec, &data, &f, &[0.9, 0.7, 1.0]).unwrap();
    let b = limit_study(&spec, &data, &f, &[1.0, 0.9, 0.7]).unwrap();
    assert_eq!(a, b);
    assert!(a.rows.last().unwrap().norms.iter().all(|&x| x == 0.0));
}

#[test]
fn limit_study_rejects_nonzero_velocity() {
    let (spec, mut data, f) = limit_setup(Family::III, 1.0);
    data.psi1 = SpectralField::unit(data.basis(), 0);
    assert!(limit_study(&spec, &data, &f, &ALPHAS).is_err());
}

#[test]
fn base_family_limit_is_annotated() {
    let (spec, data, f) = limit_setup(Family::Base, 1.0);
    let study = limit_study(&spec, &data, &f, &[0.8, 0.9, 0.95]).unwrap();
    assert_eq!(study.annotations.len(), 4);
    assert!(study.contract_holds(), "{:?}", study.rows);
}

#[test]
fn kernel_table() {
    let rows = kernel_report(&[0.3, 0.5, 0.7, 0.9, 1.0], 1.0).unwrap();
    for r in &rows {
        assert!(r.nonnegative.margin >= 0.0 && r.monotone.margin >= 0.0, "α={}", r.alpha);
        assert!(r.all_pass(), "α={}: {r:?}", r.alpha);
        assert!(r.gram_min_eigenvalue > 0.0);
        for &(_, closed, quad) in &r.masses {
            assert!((closed - quad).abs() < 1e-6);
        }
    }
    let one = rows.last().unwrap();
    assert_eq!(one.singular_at_zero.pass, None);
    assert!((one.masses[0].1 - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    // mpmath: 1 - exp(100) erfc(10)
    let half = &rows[1];
    assert!((half.masses[2].1 - 0.943_859_007_256_177_414).abs() < 1e-10);
}

#[test]
fn wave_converges_at_second_order() {
    let spec = ModelSpec::linear(Family::III, params(1.0, 1.0, 0.0), 0.7).unwrap();
    let t = convergence_table(&spec, Manufactured::Wave, &[64, 128, 256, 512], 1.0).unwrap();
    assert!((t.fitted_order - 2.0).abs() < 0.15, "{t:?}");
}

#[test]
fn fractional_three_manufactured_order() {
    let spec = ModelSpec::linear(Family::III, params(0.6, 1.0, 0.3), 0.5).unwrap();
    let t = convergence_table(&spec, Manufactured::Exponential, &[64, 128, 256, 512], 1.0).unwrap();
    assert!(t.fitted_order >= 1.4, "{t:?}");
}

#[test]
fn order_is_continuous_at_one() {
    let order = |a: f64| {
        let spec = ModelSpec::linear(Family::III, params(0.6, 1.0, 0.3), a).unwrap();
        convergence_table(&spec, Manufactured::Exponential, &[64, 128, 256], 1.0).unwrap().fitted_order
    };
    let near: Vec<f64> = [0.9, 0.95, 0.99].iter().map(|&a| order(a)).collect();
    // linear extrapolation in α to α = 1
    let slope = (near[2] - near[0]) / 0.09;
    let extrapolated = near[2] + 0.01 * slope;
    let at_one = order(1.0);
    assert!((at_one - extrapolated).abs() < 0.2, "{near:?} -> {extrapolated} vs {at_one}");
}

#[test]
fn manufactured_fractional_leading_families() {
    for family in [Family::I, Family::Base] {
        let spec = ModelSpec::linear(family, params(0.5, 1.0, 0.2), 0.75).unwrap();
        let t = convergence_table(&spec, Manufactured::Exponential, &[64, 128, 256], 1.0).unwrap();
        assert!(t.errors[2] < 1e-4 && t.fitted_order > 1.4, "{family:?}: {t:?}");
    }
}

#[test]
fn classical_cross_check_at_one() {
    let basis = EigenBasis::interval(PI, 1).unwrap();
    let spec = ModelSpec::linear(Family::III, params(1.0, 1.0, 0.1), 1.0).unwrap();
    let data = single_mode_data(&basis);
    let f = SampledSignal::zeros(TimeGrid::new(1.0, 1024).unwrap(), 1);
    let tr = solve_any(&spec, &data, &f).unwrap();
    assert!(classical_cross_check(&spec, &tr, &data).unwrap() < 1e-8);
    assert!(classical_cross_check(&spec.with_alpha(0.9).unwrap(), &tr, &data).is_err());
}

#[test]
fn kato_ponce_constant_is_moderate() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 512;
    let h = 1.0 / n as f64;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut smooth = || {
            let terms: Vec<(f64, f64, f64)> = (1..=5).map(|j| (rng.gen_range(-1.0..1.0), j as f64 * 2.0, rng.gen_range(0.0..PI))).collect();
            (0..=n).map(|i| terms.iter().map(|(a, w, p)| a * (w * i as f64 * h + p).cos()).sum::<f64>() + 0.5).collect::<Vec<f64>>()
        };
        let (f, g) = (smooth(), smooth());
        let rho = rng.gen_range(0.05..0.95);
        worst = worst.max(kato_ponce_ratio(&f, &g, h, rho));
    }
    assert!(worst < 100.0, "{worst}");
}
