use std::f64::consts::PI;

use fmgt_core::fractional::{SampledSignal, TimeGrid};
use fmgt_core::memory::*;
use fmgt_core::mittag_leffler::{ml, RelaxationKernel};
use fmgt_core::model::{Family, MediumParams, ModelSpec};
use fmgt_core::spectral::{EigenBasis, SpectralField};
use fmgt_core::trajectory::InitialData;

fn params(tau: f64, c: f64, delta: f64) -> MediumParams<f64> {
    MediumParams { tau, c, delta, k: 0.0, l: 0.0 }
}

#[test]
fn undamped_single_mode_is_a_cosine() {
    let basis = EigenBasis::interval(PI, 1).unwrap();
    let lam = basis.eigenvalues()[0];
    let c = 1.3;
    let spec = ModelSpec::linear(Family::II, params(1.0, c, 0.0), 0.6).unwrap();
    let mut data = InitialData::zeros(&basis);
    data.psi0 = SpectralField::new(basis.clone(), vec![0.8]).unwrap();
    let grid = TimeGrid::new(1.0, 1024).unwrap();
    let zt = solve_zform(&spec, &data, &SampledSignal::zeros(grid, 1)).unwrap();
    let err = grid
        .nodes()
        .enumerate()
        .map(|(n, t)| (zt.z.node(n)[0] - 0.8 * (c * lam.sqrt() * t).cos()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err:e}");
}

#[test]
fn zero_input_gives_zero() {
    let basis = EigenBasis::interval(1.0, 4).unwrap();
    let spec = ModelSpec::linear(Family::II, params(1.0, 1.0, 0.2), 0.5).unwrap();
    let grid = TimeGrid::new(1.0, 64).unwrap();
    let rec = solve_memory(&spec, &InitialData::zeros(&basis), &SampledSignal::zeros(grid, 4)).unwrap();
    assert_eq!(rec.trajectory.psi.max_abs(), 0.0);
    assert_eq!(rec.discrepancy, 0.0);
}

#[test]
fn nonzero_psi1_rejected_below_one() {
    let basis = EigenBasis::interval(1.0, 2).unwrap();
    let spec = ModelSpec::linear(Family::II, params(1.0, 1.0, 0.2), 0.5).unwrap();
    let mut data = InitialData::zeros(&basis);
    data.psi1 = SpectralField::unit(&basis, 0);
    let grid = TimeGrid::new(1.0, 16).unwrap();
    let err = solve_zform(&spec, &data, &SampledSignal::zeros(grid, 2)).unwrap_err();
    assert!(err.to_string().contains("ψ1 = 0"), "{err}");
}

fn rk4_mgt(tau: f64, c: f64, delta: f64, lam: f64, y0: [f64; 3], t: f64, steps: usize) -> Vec<[f64; 3]> {
    let rhs = |y: [f64; 3]| [y[1], y[2], -(y[2] + c * c * lam * y[0] + (tau * c * c + delta) * lam * y[1]) / tau];
    let h = t / steps as f64;
    let mut y = y0;
    let mut out = vec![y];
    for _ in 0..steps {
        let k1 = rhs(y);
        let k2 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
        let k3 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
        let k4 = rhs(std::array::from_fn(|i| y[i] + h * k3[i]));
        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        out.push(y);
    }
    out
}

#[test]
fn alpha_one_matches_classical_mgt() {
    let basis = EigenBasis::interval(PI, 1).unwrap();
    let lam = basis.eigenvalues()[0];
    let (tau, c, delta) = (0.5, 1.0, 0.2);
    let spec = ModelSpec::linear(Family::II, params(tau, c, delta), 1.0).unwrap();
    let mut data = InitialData::zeros(&basis);
    data.psi0 = SpectralField::new(basis.clone(), vec![1.0]).unwrap();
    data.psi1 = SpectralField::new(basis.clone(), vec![-0.4]).unwrap();
    data.psi2 = SpectralField::new(basis.clone(), vec![0.3]).unwrap();
    let n = 1024;
    let grid = TimeGrid::new(1.0, n).unwrap();
    let zt = solve_zform(&spec, &data, &SampledSignal::zeros(grid, 1)).unwrap();
    let reference = rk4_mgt(tau, c, delta, lam, [1.0, -0.4, 0.3], 1.0, n * 16);
    let mut err: f64 = 0.0;
    for j in 0..=n {
        let r = reference[j * 16];
        err = err.max((zt.z.node(j)[0] - (tau * r[1] + r[0])).abs());
    }
    assert!(err < 1e-6, "{err:e}");
    let rec = recover_psi(&zt, 1e-2).unwrap();
    let e_psi = (0..=n).map(|j| (rec.trajectory.psi.node(j)[0] - reference[j * 16][0]).abs()).fold(0.0, f64::max);
    assert!(e_psi < 1e-5, "{e_psi:e}");
}

#[test]
fn relaxation_fixed_point_and_closed_forms() {
    let grid = TimeGrid::new(2.0_f64, 400).unwrap();
    // z ≡ ψ0 leaves ψ at rest
    let k = RelaxationKernel::new(0.6_f64, 1.0).unwrap();
    let z = SampledSignal::from_fn(grid, 2, |_| vec![1.5, -0.5]).unwrap();
    let psi = relaxation_inverse(&k, &[1.5, -0.5], &z).unwrap();
    for n in 0..grid.len() {
        assert!((psi.node(n)[0] - 1.5).abs() < 1e-12);
        assert!((psi.node(n)[1] + 0.5).abs() < 1e-12);
    }
    // γ = 1, z = 0 after the start: exponential relaxation
    let tau = 0.7;
    let k1 = RelaxationKernel::new(1.0, tau).unwrap();
    let zero = SampledSignal::zeros(grid, 1);
    let psi = relaxation_inverse(&k1, &[1.0], &zero).unwrap();
    for (n, t) in grid.nodes().enumerate() {
        assert!((psi.node(n)[0] - (-t / tau).exp()).abs() < 1e-14);
    }
    // γ = 1/2: E_{1/2,1}(-t^{1/2}) from both recoveries
    let kh = RelaxationKernel::new(0.5, 1.0).unwrap();
    let conv = relaxation_inverse(&kh, &[1.0], &zero).unwrap();
    let l1 = relaxation_l1(0.5, 1.0, &[1.0], &zero).unwrap();
    for (n, t) in grid.nodes().enumerate() {
        let exact = ml(0.5, 1.0, -t.sqrt()).unwrap();
        assert!((conv.node(n)[0] - exact).abs() < 1e-12);
        assert!((l1.node(n)[0] - exact).abs() < 2e-2);
    }
}

#[test]
fn shifted_psi2_is_reproduced() {
    let basis = EigenBasis::interval(1.0, 2).unwrap();
    let spec = ModelSpec::linear(Family::II, params(1.0, 1.0, 0.2), 0.7).unwrap();
    let mut data = InitialData::zeros(&basis);
    data.psi0 = SpectralField::unit(&basis, 0);
    data.psi2 = SpectralField::unit(&basis, 1).scaled(0.5);
    let grid = TimeGrid::new(0.5, 256).unwrap();
    let rec = solve_memory(&spec, &data, &SampledSignal::zeros(grid, 2)).unwrap();
    let tr = rec.trajectory;
    assert_eq!(tr.psi.node(0), &[1.0, 0.0]);
    assert_eq!(tr.psi_t.node(0), &[0.0, 0.0]);
    assert_eq!(tr.psi_tt.node(0), &[0.0, 0.5]);
    let direct = direct_l1(&spec, &data, &SampledSignal::zeros(grid, 2)).unwrap();
    let gap = linf_h1_distance(&tr, &direct).unwrap();
    assert!(gap < 2e-2, "{gap:e}");
}

/// Max over the shared nodes of `‖∇(a - b)‖` for a coarse and a fine run.
fn self_gap(coarse: &fmgt_core::trajectory::Trajectory<f64>, fine: &fmgt_core::trajectory::Trajectory<f64>) -> f64 {
    let lam = coarse.basis().eigenvalues();
    let mut m: f64 = 0.0;
    for n in 0..coarse.grid().len() {
        let s: f64 = (0..lam.len())
            .map(|i| {
                let d = coarse.psi.node(n)[i] - fine.psi.node(2 * n)[i];
                lam[i] * d * d
            })
            .sum();
        m = m.max(s.sqrt());
    }
    m
}

#[test]
fn memory_and_direct_l1_agree() {
    let basis = EigenBasis::interval(1.0, 8).unwrap();
    let data = {
        let mut d = InitialData::zeros(&basis);
        d.psi0 = basis.project(|x: &[f64]| 16.0 * (x[0] * (1.0 - x[0])).powi(2));
        d
    };
    for &a in &[0.6, 0.8] {
        let spec = ModelSpec::linear(Family::II, params(0.5, 1.0, 0.2), a).unwrap();
        let run = |n: usize| {
            let grid = TimeGrid::new(1.0, n).unwrap();
            let f = SampledSignal::zeros(grid, 8);
            (solve_memory(&spec, &data, &f).unwrap().trajectory, direct_l1(&spec, &data, &f).unwrap())
        };
        let (m_half, d_half) = run(256);
        let (m, d) = run(512);
        let gap = linf_h1_distance(&m, &d).unwrap();
        let est = self_gap(&m_half, &m).max(self_gap(&d_half, &d));
        assert!(gap <= 5.0 * est, "α={a}: gap {gap:e}, truncation estimate {est:e}");
    }
}
