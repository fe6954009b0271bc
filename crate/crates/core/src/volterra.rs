//! Volterra reformulation of the semi-discrete models in the leading
//! derivative `μ` and its marching product-integration solver.
//!
//! The discrete problem is `lead·μ(t) + Σ_k C_k(t) (p^{q_k} * μ)(t) = r(t)`
//! where `p^q(t) = t^q/Γ(q+1)` and each `C_k` is either a diagonal matrix in
//! mode space or a time-dependent operator realised by collocation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fractional::{abel_integral, ProductWeights, SampledSignal, TimeGrid};
use crate::model::{Family, ModelSpec, Nonlinearity};
use crate::scalar::Scalar;
use crate::special::recip_gamma;
use crate::spectral::{Derivative, EigenBasis, GridValues};
use crate::trajectory::{InitialData, Trajectory};

/// `p^γ(t) = t^γ / Γ(γ+1)`.
pub fn power_fn<T: Scalar>(gamma_exp: T, t: T) -> T {
    if gamma_exp == T::zero() {
        T::one()
    } else if t == T::zero() {
        T::zero()
    } else {
        t.powf(gamma_exp) * recip_gamma(gamma_exp + T::one())
    }
}

/// Linear map on mode coordinates that may depend on the time node.
pub trait ModeOperator<T: Scalar>: Send + Sync {
    fn apply(&self, node: usize, v: &[T], out: &mut [T]);
}

/// `v ↦ P(m(t_n, ·) v)` for a multiplier sampled on the collocation grid.
pub struct Multiplier<T: Scalar> {
    basis: Arc<EigenBasis<T>>,
    samples: Vec<GridValues<T>>,
}

impl<T: Scalar> Multiplier<T> {
    pub fn new(basis: Arc<EigenBasis<T>>, samples: Vec<GridValues<T>>) -> Self {
        Self { basis, samples }
    }

    /// Multiplier `scale · u(t_n)` built from a mode-coordinate signal.
    pub fn from_signal(basis: &Arc<EigenBasis<T>>, u: &SampledSignal<T>, scale: T) -> Self {
        let samples = (0..u.len())
            .map(|n| {
                let mut g = basis.synthesize(u.node(n), Derivative::None);
                g.values.iter_mut().for_each(|x| *x *= scale);
                g
            })
            .collect();
        Self::new(Arc::clone(basis), samples)
    }

    pub fn min_value(&self) -> T {
        self.samples
            .iter()
            .flat_map(|g| g.values.iter())
            .fold(T::infinity(), |m, &x| m.min(x))
    }

    pub fn max_abs(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, g| m.max(g.max_abs()))
    }
}

impl<T: Scalar> ModeOperator<T> for Multiplier<T> {
    fn apply(&self, node: usize, v: &[T], out: &mut [T]) {
        let g = self.basis.synthesize(v, Derivative::None);
        let prod = g.zip_with(&self.samples[node], |a, b| a * b);
        out.copy_from_slice(&self.basis.analyze(&prod));
    }
}

/// `v ↦ scale · P(∇w(t_n) · ∇v)`.
pub struct GradientCoupling<T: Scalar> {
    basis: Arc<EigenBasis<T>>,
    gradients: Vec<Vec<GridValues<T>>>,
    scale: T,
}

impl<T: Scalar> GradientCoupling<T> {
    pub fn from_signal(basis: &Arc<EigenBasis<T>>, w: &SampledSignal<T>, scale: T) -> Self {
        let gradients = (0..w.len())
            .map(|n| {
                (0..basis.dimension())
                    .map(|a| basis.synthesize(w.node(n), Derivative::Axis(a)))
                    .collect()
            })
            .collect();
        Self {
            basis: Arc::clone(basis),
            gradients,
            scale,
        }
    }
}

impl<T: Scalar> ModeOperator<T> for GradientCoupling<T> {
    fn apply(&self, node: usize, v: &[T], out: &mut [T]) {
        let mut acc: Option<GridValues<T>> = None;
        for (a, gw) in self.gradients[node].iter().enumerate() {
            let dv = self.basis.synthesize(v, Derivative::Axis(a));
            let prod = dv.zip_with(gw, |x, y| x * y);
            acc = Some(match acc {
                None => prod,
                Some(s) => s.zip_with(&prod, |x, y| x + y),
            });
        }
        let coeffs = self.basis.analyze(&acc.expect("at least one axis"));
        for (o, c) in out.iter_mut().zip(coeffs) {
            *o = self.scale * c;
        }
    }
}

#[derive(Clone)]
pub enum Coefficient<T: Scalar> {
    Diagonal(Vec<T>),
    Operator(Arc<dyn ModeOperator<T>>),
}

impl<T: Scalar> std::fmt::Debug for Coefficient<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coefficient::Diagonal(d) => f.debug_tuple("Diagonal").field(d).finish(),
            Coefficient::Operator(_) => f.write_str("Operator(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KernelTerm<T: Scalar> {
    pub exponent: T,
    pub coefficient: Coefficient<T>,
}

/// `Σ_k C_k p^{q_k}(t - s)` over mode space.
#[derive(Clone, Debug)]
pub struct PowerKernelSum<T: Scalar> {
    dim: usize,
    terms: Vec<KernelTerm<T>>,
}

impl<T: Scalar> PowerKernelSum<T> {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[KernelTerm<T>] {
        &self.terms
    }

    pub fn push(&mut self, exponent: T, coefficient: Coefficient<T>) -> Result<()> {
        if !(exponent > -T::one()) {
            return Err(Error::Domain(format!("kernel exponent {exponent} is not integrable")));
        }
        if let Coefficient::Diagonal(d) = &coefficient {
            if d.len() != self.dim {
                return Err(Error::Shape(format!(
                    "diagonal coefficient of length {} in a {}-mode kernel",
                    d.len(),
                    self.dim
                )));
            }
        }
        self.terms.push(KernelTerm { exponent, coefficient });
        Ok(())
    }

    pub fn diagonal(&mut self, exponent: T, d: Vec<T>) -> Result<()> {
        self.push(exponent, Coefficient::Diagonal(d))
    }

    /// Distinct exponents, ascending.
    pub fn exponents(&self) -> Vec<T> {
        let mut e: Vec<T> = Vec::new();
        for t in &self.terms {
            if !e.contains(&t.exponent) {
                e.push(t.exponent);
            }
        }
        e.sort_by(|a, b| a.partial_cmp(b).expect("finite exponents"));
        e
    }

    /// Diagonal part `Σ_k d_k p^{q_k}(t - s)`; operator terms are skipped.
    pub fn eval_diagonal(&self, t: T, s: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        for term in &self.terms {
            if let Coefficient::Diagonal(d) = &term.coefficient {
                let w = power_fn(term.exponent, t - s);
                for (o, &c) in out.iter_mut().zip(d) {
                    *o += c * w;
                }
            }
        }
        out
    }

    pub fn has_operators(&self) -> bool {
        self.terms.iter().any(|t| matches!(t.coefficient, Coefficient::Operator(_)))
    }
}

/// `lead·μ + K*μ = rhs`, equivalently `μ = f̃ + ∫ K_α(t,s) μ(s) ds`
/// with `f̃ = rhs/lead` and `K_α = -K/lead`.
#[derive(Clone, Debug)]
pub struct VolterraProblem<T: Scalar> {
    lead: T,
    kernel: PowerKernelSum<T>,
    rhs: SampledSignal<T>,
}

impl<T: Scalar> VolterraProblem<T> {
    pub fn new(lead: T, kernel: PowerKernelSum<T>, rhs: SampledSignal<T>) -> Result<Self> {
        if !(lead > T::zero()) {
            return Err(Error::Domain(format!("leading coefficient must be positive, got {lead}")));
        }
        if rhs.dim() != kernel.dim() {
            return Err(Error::Shape("right-hand side and kernel dimensions differ".into()));
        }
        Ok(Self { lead, kernel, rhs })
    }

    pub fn lead(&self) -> T {
        self.lead
    }

    pub fn kernel(&self) -> &PowerKernelSum<T> {
        &self.kernel
    }

    pub fn rhs(&self) -> &SampledSignal<T> {
        &self.rhs
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.rhs.grid()
    }

    /// Inhomogeneity `f̃` of the second-kind form.
    pub fn forcing(&self) -> SampledSignal<T> {
        let inv = self.lead.recip();
        self.rhs.map(|x| x * inv)
    }

    /// Diagonal part of the second-kind kernel `K_α(t, s)`.
    pub fn kernel_at(&self, t: T, s: T) -> Vec<T> {
        let inv = self.lead.recip();
        self.kernel.eval_diagonal(t, s).into_iter().map(|x| -x * inv).collect()
    }
}

struct Group<T: Scalar> {
    weights: ProductWeights<T>,
    diag: Vec<T>,
    ops: Vec<Arc<dyn ModeOperator<T>>>,
}

const INNER_MAX: usize = 200;

/// Marching product-integration solve for `μ` at every node of the
/// problem's grid.
pub fn solve<T: Scalar>(problem: &VolterraProblem<T>) -> Result<SampledSignal<T>> {
    let grid = *problem.grid();
    let dim = problem.kernel.dim();
    let h = grid.step();
    let steps = grid.steps();

    let mut groups: Vec<Group<T>> = problem
        .kernel
        .exponents()
        .into_iter()
        .map(|q| Group {
            weights: ProductWeights::new(q, h, steps),
            diag: vec![T::zero(); dim],
            ops: Vec::new(),
        })
        .collect();
    for term in problem.kernel.terms() {
        let g = groups
            .iter_mut()
            .find(|g| g.weights.exponent() == term.exponent)
            .expect("exponent registered");
        match &term.coefficient {
            Coefficient::Diagonal(d) => g.diag.iter_mut().zip(d).for_each(|(a, &b)| *a += b),
            Coefficient::Operator(op) => g.ops.push(Arc::clone(op)),
        }
    }

    let mut a_diag = vec![problem.lead; dim];
    for g in &groups {
        let w = g.weights.diagonal();
        for (a, &d) in a_diag.iter_mut().zip(&g.diag) {
            *a += w * d;
        }
    }
    let has_ops = groups.iter().any(|g| !g.ops.is_empty());

    let mut mu = vec![T::zero(); grid.len() * dim];
    let mut hist = vec![T::zero(); dim];
    let mut tmp = vec![T::zero(); dim];
    let mut b = vec![T::zero(); dim];
    let mut cur = vec![T::zero(); dim];
    let mut next = vec![T::zero(); dim];
    let eps = T::epsilon();

    for n in 0..grid.len() {
        b.copy_from_slice(problem.rhs.node(n));
        if n > 0 {
            for g in &groups {
                g.weights.history_vec(n, &mu, dim, &mut hist);
                for ((bi, &hi), &di) in b.iter_mut().zip(&hist).zip(&g.diag) {
                    *bi -= di * hi;
                }
                for op in &g.ops {
                    op.apply(n, &hist, &mut tmp);
                    b.iter_mut().zip(&tmp).for_each(|(bi, &t)| *bi -= t);
                }
            }
        }
        for i in 0..dim {
            // the integrals vanish at t = 0
            cur[i] = if n == 0 { b[i] / problem.lead } else { b[i] / a_diag[i] };
        }
        if has_ops && n > 0 {
            // μ_n = (b - Σ w_k C_k(t_n) μ_n) / a, contractive for small steps
            let mut converged = false;
            let mut last = T::zero();
            for _ in 0..INNER_MAX {
                next.copy_from_slice(&b);
                for g in &groups {
                    let w = g.weights.diagonal();
                    for op in &g.ops {
                        op.apply(n, &cur, &mut tmp);
                        next.iter_mut().zip(&tmp).for_each(|(x, &t)| *x -= w * t);
                    }
                }
                let mut diff = T::zero();
                let mut size = T::zero();
                for i in 0..dim {
                    next[i] /= a_diag[i];
                    diff = diff.max((next[i] - cur[i]).abs());
                    size = size.max(next[i].abs());
                }
                std::mem::swap(&mut cur, &mut next);
                last = diff;
                if !diff.is_finite() {
                    break;
                }
                if diff <= T::of(8.0) * eps * size || diff == T::zero() {
                    converged = true;
                    break;
                }
            }
            if !converged && last.is_finite() {
                return Err(Error::NoConvergence {
                    iterations: INNER_MAX,
                    distance: last.as_f64(),
                });
            }
        }
        if cur.iter().any(|x| !x.is_finite()) {
            return Err(Error::BlowUp {
                node: n,
                time: grid.node(n).as_f64(),
            });
        }
        mu[n * dim..(n + 1) * dim].copy_from_slice(&cur);
    }
    SampledSignal::from_flat(grid, dim, mu)
}

/// Collocation couplings frozen along a Picard iterate.
#[derive(Clone, Default)]
pub struct Coupling<T: Scalar> {
    /// `v ↦ P(σ v)` entering `M_σ = I + σ`.
    pub sigma: Option<Arc<dyn ModeOperator<T>>>,
    /// `v ↦ 2ℓ P(∇w · ∇v)`, applied to `ψ_t`.
    pub gradient: Option<Arc<dyn ModeOperator<T>>>,
}

impl<T: Scalar> Coupling<T> {
    pub fn none() -> Self {
        Self {
            sigma: None,
            gradient: None,
        }
    }
}

fn check_inputs<T: Scalar>(data: &InitialData<T>, f: &SampledSignal<T>) -> Result<usize> {
    let dim = data.basis().len();
    if f.dim() != dim {
        return Err(Error::Shape(format!("source has {} modes, basis has {dim}", f.dim())));
    }
    Ok(dim)
}

fn sub_op<T: Scalar>(op: &Option<Arc<dyn ModeOperator<T>>>, n: usize, v: &[T], out: &mut [T], tmp: &mut [T]) {
    if let Some(op) = op {
        op.apply(n, v, tmp);
        out.iter_mut().zip(tmp.iter()).for_each(|(o, &t)| *o -= t);
    }
}

/// Family III in `μ = ξ_ttt`; kernel exponents `{0, 1, 2, α}`.
pub fn assemble_fmgt3<T: Scalar>(
    spec: &ModelSpec<T>,
    coupling: &Coupling<T>,
    data: &InitialData<T>,
    f: &SampledSignal<T>,
) -> Result<VolterraProblem<T>> {
    if spec.family() != Family::III {
        return Err(Error::InvalidModel(format!("family {} given to the family III assembly", spec.family())));
    }
    let dim = check_inputs(data, f)?;
    let p = spec.params();
    let a = spec.alpha();
    let lam = data.basis().eigenvalues().to_vec();
    let c2 = p.c * p.c;
    let scaled = |s: T| lam.iter().map(|&l| s * l).collect::<Vec<T>>();

    let mut k = PowerKernelSum::new(dim);
    k.diagonal(T::zero(), vec![T::one(); dim])?;
    if let Some(s) = &coupling.sigma {
        k.push(T::zero(), Coefficient::Operator(Arc::clone(s)))?;
    }
    k.diagonal(T::two(), scaled(c2))?;
    k.diagonal(T::one(), scaled(p.tau * c2))?;
    if let Some(g) = &coupling.gradient {
        k.push(T::one(), Coefficient::Operator(Arc::clone(g)))?;
    }
    k.diagonal(a, scaled(p.delta))?;

    // D^{2-α} is I^α ∂_t² for α < 1 but ∂_t at α = 1, which sees ψ1
    let classical = if a == T::one() { T::one() } else { T::zero() };
    let (x0, x1, x2) = (data.psi0.coeffs(), data.psi1.coeffs(), data.psi2.coeffs());
    let grid = *f.grid();
    let mut rhs = f.clone();
    let mut tmp = vec![T::zero(); dim];
    let mut v = vec![T::zero(); dim];
    for n in 0..grid.len() {
        let t = grid.node(n);
        let pa = power_fn(a, t);
        let r = rhs.node_mut(n);
        for i in 0..dim {
            let l = lam[i];
            r[i] -= x2[i]
                + c2 * l * (x0[i] + t * x1[i] + T::half() * t * t * x2[i])
                + p.tau * c2 * l * (x1[i] + t * x2[i])
                + p.delta * l * (pa * x2[i] + classical * x1[i]);
        }
        sub_op(&coupling.sigma, n, x2, r, &mut tmp);
        for i in 0..dim {
            v[i] = x1[i] + t * x2[i];
        }
        sub_op(&coupling.gradient, n, &v, r, &mut tmp);
    }
    VolterraProblem::new(p.tau, k, rhs)
}

/// Families base and I in `μ = D_t^α ξ_tt`.
pub fn assemble_fmgt1<T: Scalar>(
    spec: &ModelSpec<T>,
    coupling: &Coupling<T>,
    data: &InitialData<T>,
    f: &SampledSignal<T>,
) -> Result<VolterraProblem<T>> {
    let fam = spec.family();
    if !matches!(fam, Family::Base | Family::I) {
        return Err(Error::InvalidModel(format!(
            "family {fam} given to the fractional-leading assembly (base or I expected)"
        )));
    }
    let a = spec.alpha();
    if !(a > T::half() && a <= T::one()) {
        return Err(Error::InvalidModel(format!("α must lie in (1/2, 1] for family {fam}, got {a}")));
    }
    let dim = check_inputs(data, f)?;
    let p = spec.params();
    let lam = data.basis().eigenvalues().to_vec();
    let c2 = p.c * p.c;
    let ta = p.tau.powf(a);
    let scaled = |s: T| lam.iter().map(|&l| s * l).collect::<Vec<T>>();
    let one = T::one();
    let classical = if a == one { one } else { T::zero() };

    let mut k = PowerKernelSum::new(dim);
    k.diagonal(a - one, vec![one; dim])?;
    if let Some(s) = &coupling.sigma {
        k.push(a - one, Coefficient::Operator(Arc::clone(s)))?;
    }
    k.diagonal(a + one, scaled(c2))?;
    k.diagonal(one, scaled(ta * c2))?;
    match fam {
        Family::I => k.diagonal(T::two() * a - one, scaled(p.delta))?,
        _ => k.diagonal(a, scaled(p.delta))?,
    }
    if let Some(g) = &coupling.gradient {
        k.push(a, Coefficient::Operator(Arc::clone(g)))?;
    }

    let (x0, x1, x2) = (data.psi0.coeffs(), data.psi1.coeffs(), data.psi2.coeffs());
    let grid = *f.grid();
    let mut rhs = f.clone();
    let mut tmp = vec![T::zero(); dim];
    let mut v = vec![T::zero(); dim];
    for n in 0..grid.len() {
        let t = grid.node(n);
        let p2a = power_fn(T::two() - a, t);
        let p1a = power_fn(one - a, t);
        let pa = power_fn(a, t);
        let r = rhs.node_mut(n);
        for i in 0..dim {
            let l = lam[i];
            let damp = match fam {
                Family::I => pa * x2[i] + classical * x1[i],
                _ => x1[i] + t * x2[i],
            };
            r[i] -= x2[i]
                + c2 * l * (T::half() * t * t * x2[i] + t * x1[i] + x0[i])
                + ta * c2 * l * (p2a * x2[i] + p1a * x1[i])
                + p.delta * l * damp;
        }
        sub_op(&coupling.sigma, n, x2, r, &mut tmp);
        for i in 0..dim {
            v[i] = x1[i] + t * x2[i];
        }
        sub_op(&coupling.gradient, n, &v, r, &mut tmp);
    }
    VolterraProblem::new(ta, k, rhs)
}

/// Order of `μ` relative to `ξ_tt`: `ξ_tt = ξ2 + I^s μ`.
fn smoothing_order<T: Scalar>(spec: &ModelSpec<T>) -> T {
    if spec.family() == Family::III {
        T::one()
    } else {
        spec.alpha()
    }
}

/// Rebuilds `(ψ, ψ_t, ψ_tt)` from `μ` and the initial data.
pub fn reconstruct<T: Scalar>(
    spec: &ModelSpec<T>,
    data: &InitialData<T>,
    mu: SampledSignal<T>,
) -> Result<Trajectory<T>> {
    let s = smoothing_order(spec);
    let grid = *mu.grid();
    let (x0, x1, x2) = (data.psi0.coeffs(), data.psi1.coeffs(), data.psi2.coeffs());
    let mut psi_tt = abel_integral(&mu, s)?;
    let mut psi_t = abel_integral(&mu, s + T::one())?;
    let mut psi = abel_integral(&mu, s + T::two())?;
    for n in 0..grid.len() {
        let t = grid.node(n);
        for (i, v) in psi_tt.node_mut(n).iter_mut().enumerate() {
            *v += x2[i];
        }
        for (i, v) in psi_t.node_mut(n).iter_mut().enumerate() {
            *v += x1[i] + t * x2[i];
        }
        for (i, v) in psi.node_mut(n).iter_mut().enumerate() {
            *v += x0[i] + t * x1[i] + T::half() * t * t * x2[i];
        }
    }
    Trajectory::new(Arc::clone(data.basis()), psi, psi_t, psi_tt, Some(mu))
}

fn assemble<T: Scalar>(
    spec: &ModelSpec<T>,
    coupling: &Coupling<T>,
    data: &InitialData<T>,
    f: &SampledSignal<T>,
) -> Result<VolterraProblem<T>> {
    match spec.family() {
        Family::III => assemble_fmgt3(spec, coupling, data, f),
        Family::Base | Family::I => assemble_fmgt1(spec, coupling, data, f),
        Family::II => Err(Error::Unsupported(
            "family II is solved through the memory (z-form) solver".into(),
        )),
    }
}

/// Solves the frozen-coefficient problem with the given couplings.
pub fn solve_frozen<T: Scalar>(
    spec: &ModelSpec<T>,
    coupling: &Coupling<T>,
    data: &InitialData<T>,
    f: &SampledSignal<T>,
) -> Result<Trajectory<T>> {
    let problem = assemble(spec, coupling, data, f)?;
    let mu = solve(&problem)?;
    reconstruct(spec, data, mu)
}

/// Linear solve (nonlinear coefficients ignored).
pub fn solve_linear<T: Scalar>(
    spec: &ModelSpec<T>,
    data: &InitialData<T>,
    f: &SampledSignal<T>,
) -> Result<Trajectory<T>> {
    solve_frozen(&spec.linearized(), &Coupling::none(), data, f)
}

#[derive(Clone, Copy, Debug)]
pub struct PicardOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    /// Optional bound on the iterate norm (the smallness ball).
    pub radius: Option<T>,
}

impl<T: Scalar> Default for PicardOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::of(1e-10),
            max_iter: 30,
            radius: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PicardReport<T: Scalar> {
    pub trajectory: Trajectory<T>,
    pub iterations: usize,
    /// Successive-iterate distances, one per iteration.
    pub distances: Vec<T>,
    /// Largest ratio of consecutive distances (the first being `‖𝒯(0)‖`)
    /// above round-off, if any.
    pub contraction: Option<T>,
}

/// Discrete `W^{1,∞}(H¹) ∩ W^{2,∞}(L²)` norm: max over nodes of
/// `(‖∇u‖² + ‖∇u_t‖² + ‖u_tt‖²)^{1/2}`.
pub fn picard_norm<T: Scalar>(traj: &Trajectory<T>) -> T {
    let lam = traj.basis().eigenvalues();
    let mut m = T::zero();
    for n in 0..traj.grid().len() {
        let mut s = T::zero();
        for i in 0..lam.len() {
            let (u, ut, utt) = (traj.psi.node(n)[i], traj.psi_t.node(n)[i], traj.psi_tt.node(n)[i]);
            s += lam[i] * (u * u + ut * ut) + utt * utt;
        }
        m = m.max(s.sqrt());
    }
    m
}

/// Same norm as [`picard_norm`] for the difference of two trajectories.
pub fn picard_distance<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<T> {
    let diff = Trajectory::new(
        Arc::clone(a.basis()),
        a.psi.zip_with(&b.psi, |x, y| x - y)?,
        a.psi_t.zip_with(&b.psi_t, |x, y| x - y)?,
        a.psi_tt.zip_with(&b.psi_tt, |x, y| x - y)?,
        None,
    )?;
    Ok(picard_norm(&diff))
}

/// Couplings frozen along the iterate `w`: `σ = 2k w_t`, gradient `2ℓ∇w`.
pub fn freeze<T: Scalar>(spec: &ModelSpec<T>, w: &Trajectory<T>) -> Result<Coupling<T>> {
    let p = spec.params();
    let basis = w.basis();
    let mut c = Coupling::none();
    if p.k != T::zero() {
        let m = Multiplier::from_signal(basis, &w.psi_t, T::two() * p.k);
        if m.min_value() <= -T::one() {
            return Err(Error::Domain(format!(
                "1 + σ degenerates (min σ = {}); the data leave the non-degeneracy regime",
                m.min_value()
            )));
        }
        c.sigma = Some(Arc::new(m));
    }
    if spec.nonlinearity() == Nonlinearity::Kuznetsov && p.l != T::zero() {
        c.gradient = Some(Arc::new(GradientCoupling::from_signal(basis, &w.psi, T::two() * p.l)));
    }
    Ok(c)
}

/// Picard iteration `w ↦ ψ` on the frozen-coefficient problem, started from
/// the linear solution.
pub fn picard_nonlinear<T: Scalar>(
    spec: &ModelSpec<T>,
    data: &InitialData<T>,
    f: &SampledSignal<T>,
    opts: &PicardOptions<T>,
) -> Result<PicardReport<T>> {
    // 𝒯(0) is the linear solution, so the sequence starts 0 → w0 → w1 → ...
    let mut w = solve_linear(spec, data, f)?;
    let d0 = picard_norm(&w);
    let floor = T::epsilon().sqrt() * d0;
    let mut distances = Vec::new();
    for it in 1..=opts.max_iter.max(1) {
        if let Some(r) = opts.radius {
            let nw = picard_norm(&w);
            if nw > r {
                return Err(Error::Domain(format!("iterate norm {nw} left the ball of radius {r}")));
            }
        }
        let coupling = freeze(spec, &w)?;
        let next = solve_frozen(spec, &coupling, data, f)?;
        let d = picard_distance(&next, &w)?;
        distances.push(d);
        w = next;
        if d < opts.tol {
            let contraction = std::iter::once(d0)
                .chain(distances.iter().copied())
                .collect::<Vec<T>>()
                .windows(2)
                .filter(|p| p[0] > floor && p[1] > floor)
                .map(|p| p[1] / p[0])
                .fold(None, |m: Option<T>, r| Some(m.map_or(r, |m| m.max(r))));
            return Ok(PicardReport {
                trajectory: w,
                iterations: it,
                distances,
                contraction,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        distance: distances.last().map_or(f64::NAN, |d| d.as_f64()),
    })
}

/// Dispatches to the linear or Picard solver according to the model.
pub fn solve_model<T: Scalar>(
    spec: &ModelSpec<T>,
    data: &InitialData<T>,
    f: &SampledSignal<T>,
    opts: &PicardOptions<T>,
) -> Result<PicardReport<T>> {
    if spec.nonlinearity() == Nonlinearity::Linear {
        let trajectory = solve_linear(spec, data, f)?;
        Ok(PicardReport {
            trajectory,
            iterations: 0,
            distances: Vec::new(),
            contraction: None,
        })
    } else {
        picard_nonlinear(spec, data, f, opts)
    }
}
