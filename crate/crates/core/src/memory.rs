//! Wave equation with memory for linear family II, written for
//! `z = τ^α D_t^α ψ + ψ`, and recovery of `ψ` from `z`.
//!
//! Per mode the z-form reads
//! `z'' + (c² + δ/τ^α) λ z - (δ/τ^α) λ (𝔨_α * z) = f + (δ/τ^α) λ E_{α,1}(-(t/τ)^α) ψ0`.
//! A nonzero `ψ2` at `α < 1` is removed beforehand by the shift
//! `ψ = ψ̂ + ψ2 t²/2`, which moves it into the source.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fractional::weights::l1_coefficients;
use crate::fractional::{ProductWeights, SampledSignal, TimeGrid};
use crate::mittag_leffler::{KernelWeights, RelaxationKernel};
use crate::model::{Family, ModelSpec, Nonlinearity};
use crate::scalar::Scalar;
use crate::special::gamma;
use crate::spectral::EigenBasis;
use crate::trajectory::{InitialData, Trajectory};
use crate::volterra::power_fn;

/// Solution of the z-form, with the data needed to map back to `ψ`.
#[derive(Clone, Debug)]
pub struct ZTrajectory<T: Scalar> {
    basis: Arc<EigenBasis<T>>,
    pub z: SampledSignal<T>,
    pub z_t: SampledSignal<T>,
    pub z_tt: SampledSignal<T>,
    /// `ψ0` of the shifted problem (unchanged by the shift).
    pub psi0: Vec<T>,
    /// `ψ1` (zero unless α = 1).
    pub psi1: Vec<T>,
    /// `ψ2` moved into the source (zero at α = 1).
    pub shift: Vec<T>,
    order: T,
    tau: T,
}

impl<T: Scalar> ZTrajectory<T> {
    pub fn basis(&self) -> &Arc<EigenBasis<T>> {
        &self.basis
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.z.grid()
    }

    pub fn kernel(&self) -> RelaxationKernel<T> {
        RelaxationKernel::new(self.order, self.tau).expect("validated kernel")
    }
}

fn check_family_ii<T: Scalar>(spec: &ModelSpec<T>, data: &InitialData<T>, f: &SampledSignal<T>) -> Result<()> {
    if spec.family() != Family::II || spec.nonlinearity() != Nonlinearity::Linear {
        return Err(Error::InvalidModel(format!(
            "the memory solver handles linear family II only, got {}",
            spec.variant()
        )));
    }
    if f.dim() != data.basis().len() {
        return Err(Error::Shape(format!(
            "source has {} modes, basis has {}",
            f.dim(),
            data.basis().len()
        )));
    }
    if spec.alpha() < T::one() && data.psi1.coeffs().iter().any(|&x| x != T::zero()) {
        return Err(Error::Domain(
            "family II with α < 1 needs ψ1 = 0: otherwise z_t carries a t^{-α} singularity at t = 0".into(),
        ));
    }
    Ok(())
}

/// Newmark (average acceleration) integration of the z-form with the
/// memory term treated implicitly.
pub fn solve_zform<T: Scalar>(
    spec: &ModelSpec<T>,
    data: &InitialData<T>,
    f: &SampledSignal<T>,
) -> Result<ZTrajectory<T>> {
    check_family_ii(spec, data, f)?;
    let p = spec.params();
    let a = spec.alpha();
    let basis = Arc::clone(data.basis());
    let lam = basis.eigenvalues().to_vec();
    let dim = lam.len();
    let grid = *f.grid();
    let h = grid.step();
    let steps = grid.steps();
    let ta = p.tau.powf(a);
    let b = p.delta / ta;
    let stiff = p.c * p.c + b;
    let kernel = RelaxationKernel::new(a, p.tau)?;
    let kw = kernel.convolution_weights(h, steps)?;
    let relax: Vec<T> = grid.nodes().map(|t| kernel.relaxation(t)).collect::<Result<_>>()?;

    let (x0, x1, x2) = (data.psi0.coeffs(), data.psi1.coeffs(), data.psi2.coeffs());
    let classical = a == T::one();
    let shift: Vec<T> = if classical { vec![T::zero(); dim] } else { x2.to_vec() };

    let mut z = SampledSignal::zeros(grid, dim);
    let mut z_t = SampledSignal::zeros(grid, dim);
    let mut z_tt = SampledSignal::zeros(grid, dim);
    let quarter = T::of(0.25) * h * h;

    for i in 0..dim {
        let l = lam[i];
        // source with the ψ2 shift folded in
        let forcing = |n: usize| {
            let t = grid.node(n);
            let mut s = f.node(n)[i] + b * l * relax[n] * x0[i];
            if shift[i] != T::zero() {
                s -= shift[i] * (T::one() + p.c * p.c * l * power_fn(T::two(), t) + (ta * p.c * p.c + p.delta) * l * power_fn(T::two() - a, t));
            }
            s
        };
        let mut zs = vec![T::zero(); grid.len()];
        let mut vs = vec![T::zero(); grid.len()];
        let mut acc = vec![T::zero(); grid.len()];
        zs[0] = if classical { x0[i] + p.tau * x1[i] } else { x0[i] };
        vs[0] = if classical { p.tau * x2[i] + x1[i] } else { T::zero() };
        acc[0] = forcing(0) - stiff * l * zs[0];
        let wd = kw.diagonal();
        let denom = T::one() + (stiff * l - b * l * wd) * quarter;
        for n in 0..steps {
            let pred = zs[n] + h * vs[n] + quarter * acc[n];
            let hist = kw.history(n + 1, &zs);
            let rhs = forcing(n + 1) - stiff * l * pred + b * l * (hist + wd * pred);
            let an = rhs / denom;
            acc[n + 1] = an;
            zs[n + 1] = pred + quarter * an;
            vs[n + 1] = vs[n] + T::half() * h * (acc[n] + an);
            if !zs[n + 1].is_finite() || !vs[n + 1].is_finite() {
                return Err(Error::BlowUp {
                    node: n + 1,
                    time: grid.node(n + 1).as_f64(),
                });
            }
        }
        for n in 0..grid.len() {
            z.node_mut(n)[i] = zs[n];
            z_t.node_mut(n)[i] = vs[n];
            z_tt.node_mut(n)[i] = acc[n];
        }
    }
    Ok(ZTrajectory {
        basis,
        z,
        z_t,
        z_tt,
        psi0: x0.to_vec(),
        psi1: if classical { x1.to_vec() } else { vec![T::zero(); dim] },
        shift,
        order: a,
        tau: p.tau,
    })
}

fn convolve<T: Scalar>(kw: &KernelWeights<T>, s: &SampledSignal<T>) -> SampledSignal<T> {
    let mut out = SampledSignal::zeros(*s.grid(), s.dim());
    for i in 0..s.dim() {
        let c = kw.apply(&s.component(i));
        for (n, v) in c.into_iter().enumerate() {
            out.node_mut(n)[i] = v;
        }
    }
    out
}

/// `ψ = E_{γ,1}(-(t/τ)^γ) ψ0 + 𝔨_γ * z`, the inverse of `z = τ^γ D^γ ψ + ψ`.
pub fn relaxation_inverse<T: Scalar>(
    kernel: &RelaxationKernel<T>,
    psi0: &[T],
    z: &SampledSignal<T>,
) -> Result<SampledSignal<T>> {
    let grid = *z.grid();
    let kw = kernel.convolution_weights(grid.step(), grid.steps())?;
    let mut out = convolve(&kw, z);
    for n in 0..grid.len() {
        let e = kernel.relaxation(grid.node(n))?;
        for (o, &x) in out.node_mut(n).iter_mut().zip(psi0) {
            *o += e * x;
        }
    }
    Ok(out)
}

/// L1 solve of `τ^γ D^γ ψ + ψ = z`, `ψ(0) = ψ0`, node by node.
pub fn relaxation_l1<T: Scalar>(order: T, tau: T, psi0: &[T], z: &SampledSignal<T>) -> Result<SampledSignal<T>> {
    if !(order > T::zero()) || order > T::one() {
        return Err(Error::Domain(format!("relaxation order must lie in (0, 1], got {order}")));
    }
    let grid = *z.grid();
    let dim = z.dim();
    let b = l1_coefficients(order, grid.steps());
    let s = tau.powf(order) * grid.step().powf(-order) / gamma(T::two() - order);
    let mut out = SampledSignal::zeros(grid, dim);
    out.node_mut(0).copy_from_slice(psi0);
    for i in 0..dim {
        let mut u = vec![psi0[i]; grid.len()];
        for n in 1..grid.len() {
            // s Σ_{m<n} b_m (u_{n-m} - u_{n-m-1}) + u_n = z_n
            let mut hist = -b[0] * u[n - 1];
            for m in 1..n {
                hist += b[m] * (u[n - m] - u[n - m - 1]);
            }
            u[n] = (z.node(n)[i] - s * hist) / (s * b[0] + T::one());
            out.node_mut(n)[i] = u[n];
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Recovery<T: Scalar> {
    pub trajectory: Trajectory<T>,
    /// Max-norm gap between the convolution and L1 recoveries of `ψ`.
    pub discrepancy: T,
}

/// Maps a z-form solution back to `(ψ, ψ_t, ψ_tt)` by convolution with
/// `𝔨_γ`; the L1 relaxation solve is run alongside as a cross-check.
pub fn recover_psi<T: Scalar>(zt: &ZTrajectory<T>, tolerance: T) -> Result<Recovery<T>> {
    let kernel = zt.kernel();
    let grid = *zt.grid();
    let dim = zt.psi0.len();
    let kw = kernel.convolution_weights(grid.step(), grid.steps())?;
    let tau = kernel.tau();

    let mut psi = relaxation_inverse(&kernel, &zt.psi0, &zt.z)?;
    let mut psi_t = convolve(&kw, &zt.z_t);
    let mut psi_tt = convolve(&kw, &zt.z_tt);
    // boundary terms from differentiating under the convolution; they vanish for γ < 1
    let z0 = zt.z.node(0).to_vec();
    let z1 = zt.z_t.node(0).to_vec();
    for n in 1..grid.len() {
        let t = grid.node(n);
        let kv = kernel.value(t)?;
        let kd = kernel.derivative(t)?;
        for i in 0..dim {
            let jump = z0[i] - zt.psi0[i];
            if jump != T::zero() {
                psi_t.node_mut(n)[i] += kv * jump;
                psi_tt.node_mut(n)[i] += kd * jump;
            }
            if z1[i] != T::zero() {
                psi_tt.node_mut(n)[i] += kv * z1[i];
            }
        }
    }
    // t = 0 from the initial data
    for i in 0..dim {
        psi_t.node_mut(0)[i] = zt.psi1[i];
        psi_tt.node_mut(0)[i] = if kernel.order() == T::one() {
            (z1[i] - zt.psi1[i]) / tau
        } else {
            T::zero()
        };
    }

    let direct = relaxation_l1(kernel.order(), tau, &zt.psi0, &zt.z)?;
    let discrepancy = psi
        .zip_with(&direct, |a, b| a - b)?
        .max_abs();
    if !(discrepancy <= tolerance) {
        return Err(Error::CrossCheck {
            what: "ψ recovered from z (convolution vs L1)",
            discrepancy: discrepancy.as_f64(),
            tolerance: tolerance.as_f64(),
        });
    }

    for n in 0..grid.len() {
        let t = grid.node(n);
        for i in 0..dim {
            let s = zt.shift[i];
            if s != T::zero() {
                psi.node_mut(n)[i] += s * T::half() * t * t;
                psi_t.node_mut(n)[i] += s * t;
                psi_tt.node_mut(n)[i] += s;
            }
        }
    }
    let trajectory = Trajectory::new(Arc::clone(zt.basis()), psi, psi_t, psi_tt, None)?;
    Ok(Recovery {
        trajectory,
        discrepancy,
    })
}

/// Default tolerance for the recovery cross-check, scaled by the data.
pub fn default_recovery_tolerance<T: Scalar>(zt: &ZTrajectory<T>) -> T {
    T::of(1e-2) * (T::one() + zt.z.max_abs())
}

/// `solve_zform` followed by `recover_psi`.
pub fn solve_memory<T: Scalar>(
    spec: &ModelSpec<T>,
    data: &InitialData<T>,
    f: &SampledSignal<T>,
) -> Result<Recovery<T>> {
    let zt = solve_zform(spec, data, f)?;
    let tol = default_recovery_tolerance(&zt);
    recover_psi(&zt, tol)
}

/// Direct time stepping of the fractional-leading families in the unknown
/// `u = ψ_tt`: L1 for every Caputo derivative, product integration for
/// `ψ_t = ψ1 + ∫u` and `ψ = ψ0 + tψ1 + ∫(t-s)u`.
pub fn direct_l1<T: Scalar>(
    spec: &ModelSpec<T>,
    data: &InitialData<T>,
    f: &SampledSignal<T>,
) -> Result<Trajectory<T>> {
    if !spec.family().fractional_leading() || spec.nonlinearity() != Nonlinearity::Linear {
        return Err(Error::InvalidModel(format!(
            "the direct L1 solver handles linear base, I and II, got {}",
            spec.variant()
        )));
    }
    let fam = spec.family();
    let p = spec.params();
    let a = spec.alpha();
    let basis = Arc::clone(data.basis());
    let lam = basis.eigenvalues().to_vec();
    let dim = lam.len();
    if f.dim() != dim {
        return Err(Error::Shape(format!("source has {} modes, basis has {dim}", f.dim())));
    }
    let grid = *f.grid();
    let h = grid.step();
    let steps = grid.steps();
    let ta = p.tau.powf(a);
    let c2 = p.c * p.c;

    let l1a = l1_coefficients(a, steps);
    let sa = h.powf(-a) / gamma(T::two() - a);
    // D^{1-α} for the family I damping (identity at α = 1)
    let g = T::one() - a;
    let l1g = if g > T::zero() { l1_coefficients(g, steps) } else { Vec::new() };
    let sg = if g > T::zero() { h.powf(-g) / gamma(T::two() - g) } else { T::zero() };
    let i1 = ProductWeights::new(T::zero(), h, steps);
    let i2 = ProductWeights::new(T::one(), h, steps);

    // Caputo L1 value at node n split as coeff·x_n + rest
    let l1_split = |b: &[T], s: T, x: &[T], n: usize| -> (T, T) {
        let mut rest = -b[0] * x[n - 1];
        for m in 1..n {
            rest += b[m] * (x[n - m] - x[n - m - 1]);
        }
        (s * b[0], s * rest)
    };

    let (x0, x1, x2) = (data.psi0.coeffs(), data.psi1.coeffs(), data.psi2.coeffs());
    let mut psi = SampledSignal::zeros(grid, dim);
    let mut psi_t = SampledSignal::zeros(grid, dim);
    let mut psi_tt = SampledSignal::zeros(grid, dim);
    for i in 0..dim {
        let l = lam[i];
        let mut u = vec![T::zero(); grid.len()];
        let mut v = vec![T::zero(); grid.len()];
        let mut w = vec![T::zero(); grid.len()];
        u[0] = x2[i];
        v[0] = x1[i];
        w[0] = x0[i];
        for n in 1..grid.len() {
            let t = grid.node(n);
            // ψ_t = v0 + d1 u_n, ψ = w0 + d2 u_n
            let d1 = i1.diagonal();
            let v0 = x1[i] + i1.history(n, &u);
            let d2 = i2.diagonal();
            let w0 = x0[i] + t * x1[i] + i2.history(n, &u);
            let (du, ru) = l1_split(&l1a, sa, &u, n);
            // L1 on ψ: coeff·ψ_n + rest, with ψ_n = w0 + d2 u_n
            w[n] = w0;
            let (dp, rp) = l1_split(&l1a, sa, &w, n);
            let mut coef = ta * du + T::one() + c2 * l * d2 + ta * c2 * l * dp * d2;
            let mut rhs = f.node(n)[i] - ta * ru - c2 * l * w0 - ta * c2 * l * (dp * w0 + rp);
            match fam {
                Family::Base => {
                    coef += p.delta * l * d1;
                    rhs -= p.delta * l * v0;
                }
                Family::I => {
                    if g > T::zero() {
                        v[n] = v0;
                        let (dv, rv) = l1_split(&l1g, sg, &v, n);
                        coef += p.delta * l * dv * d1;
                        rhs -= p.delta * l * (dv * v0 + rv);
                    } else {
                        coef += p.delta * l * d1;
                        rhs -= p.delta * l * v0;
                    }
                }
                _ => {
                    coef += p.delta * l * dp * d2;
                    rhs -= p.delta * l * (dp * w0 + rp);
                }
            }
            u[n] = rhs / coef;
            v[n] = v0 + d1 * u[n];
            w[n] = w0 + d2 * u[n];
            if !u[n].is_finite() {
                return Err(Error::BlowUp {
                    node: n,
                    time: t.as_f64(),
                });
            }
        }
        for n in 0..grid.len() {
            psi.node_mut(n)[i] = w[n];
            psi_t.node_mut(n)[i] = v[n];
            psi_tt.node_mut(n)[i] = u[n];
        }
    }
    Trajectory::new(basis, psi, psi_t, psi_tt, None)
}

/// Discrete `L^∞(H¹)` distance `max_n ‖∇(ψ^a - ψ^b)(t_n)‖`.
pub fn linf_h1_distance<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<T> {
    a.psi.check_compatible(&b.psi)?;
    let lam = a.basis().eigenvalues();
    let mut m = T::zero();
    for n in 0..a.grid().len() {
        let s: T = (0..lam.len())
            .map(|i| {
                let d = a.psi.node(n)[i] - b.psi.node(n)[i];
                lam[i] * d * d
            })
            .sum();
        m = m.max(s.sqrt());
    }
    Ok(m)
}
