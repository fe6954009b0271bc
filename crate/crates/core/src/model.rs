//! Catalog of the fractional (J)MGT models, parameter validation and residuals.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fractional::{abel_integral, caputo_derivative, difference_derivative, SampledSignal};
use crate::scalar::Scalar;
use crate::spectral::{gradient_dot, pointwise_product, SpectralField};
use crate::trajectory::Trajectory;

/// Which heat-flux law the model descends from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Base,
    I,
    II,
    III,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Base, Family::I, Family::II, Family::III];

    /// Lower end of the admissible α range (exclusive); the upper end is 1.
    pub fn alpha_floor(self) -> f64 {
        match self {
            Family::Base | Family::I => 0.5,
            Family::II | Family::III => 0.0,
        }
    }

    /// Leading term is `τ^α D_t^α ψ_tt` rather than `τ ψ_ttt`.
    pub fn fractional_leading(self) -> bool {
        !matches!(self, Family::III)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Base => "base",
            Family::I => "I",
            Family::II => "II",
            Family::III => "III",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "base" | "0" => Ok(Family::Base),
            "i" | "1" => Ok(Family::I),
            "ii" | "2" => Ok(Family::II),
            "iii" | "3" => Ok(Family::III),
            _ => Err(Error::InvalidModel(format!(
                "unknown family {s:?} (expected base, I, II or III)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nonlinearity {
    Linear,
    Westervelt,
    Kuznetsov,
}

impl Nonlinearity {
    pub const ALL: [Nonlinearity; 3] = [Nonlinearity::Linear, Nonlinearity::Westervelt, Nonlinearity::Kuznetsov];
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Nonlinearity::Linear => "linear",
            Nonlinearity::Westervelt => "westervelt",
            Nonlinearity::Kuznetsov => "kuznetsov",
        })
    }
}

impl FromStr for Nonlinearity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Nonlinearity::Linear),
            "westervelt" | "w" => Ok(Nonlinearity::Westervelt),
            "kuznetsov" | "k" => Ok(Nonlinearity::Kuznetsov),
            _ => Err(Error::InvalidModel(format!(
                "unknown nonlinearity {s:?} (expected linear, westervelt or kuznetsov)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModelVariant {
    pub family: Family,
    pub nonlinearity: Nonlinearity,
}

/// Which solver handles a variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Volterra,
    Memory,
    ResidualOnly,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Volterra => "volterra",
            Backend::Memory => "memory",
            Backend::ResidualOnly => "residual-only",
        })
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.nonlinearity, self.family)
    }
}

impl ModelVariant {
    pub fn new(family: Family, nonlinearity: Nonlinearity) -> Self {
        Self { family, nonlinearity }
    }

    pub fn backend(&self) -> Backend {
        match (self.family, self.nonlinearity) {
            (Family::II, Nonlinearity::Linear) => Backend::Memory,
            (Family::II, _) => Backend::ResidualOnly,
            _ => Backend::Volterra,
        }
    }

    pub fn terms(&self) -> Vec<Term> {
        let mut t = Vec::new();
        if self.family.fractional_leading() {
            t.push(Term::FractionalInertia);
        } else {
            t.push(Term::ThirdOrderInertia);
        }
        t.push(Term::Inertia);
        if self.nonlinearity != Nonlinearity::Linear {
            t.push(Term::Westervelt);
        }
        t.push(Term::Stiffness);
        if self.family.fractional_leading() {
            t.push(Term::FractionalStiffness);
        } else {
            t.push(Term::RelaxedStiffness);
        }
        t.push(match self.family {
            Family::Base => Term::Damping,
            Family::I | Family::III => Term::FractionalDamping,
            Family::II => Term::FractionalLowDamping,
        });
        if self.nonlinearity == Nonlinearity::Kuznetsov {
            t.push(Term::Gradient);
        }
        t
    }
}

/// One additive term of a model's left-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Term {
    FractionalInertia,
    ThirdOrderInertia,
    Inertia,
    Westervelt,
    Stiffness,
    FractionalStiffness,
    RelaxedStiffness,
    Damping,
    FractionalDamping,
    FractionalLowDamping,
    Gradient,
}

impl Term {
    pub fn label(&self) -> &'static str {
        match self {
            Term::FractionalInertia => "τ^α D_t^α ψ_tt",
            Term::ThirdOrderInertia => "τ ψ_ttt",
            Term::Inertia => "ψ_tt",
            Term::Westervelt => "2k ψ_t ψ_tt",
            Term::Stiffness => "- c² Δψ",
            Term::FractionalStiffness => "- τ^α c² D_t^α Δψ",
            Term::RelaxedStiffness => "- τ c² Δψ_t",
            Term::Damping => "- δ Δψ_t",
            Term::FractionalDamping => "- δ D_t^{2-α} Δψ",
            Term::FractionalLowDamping => "- δ D_t^α Δψ",
            Term::Gradient => "ℓ ∂_t |∇ψ|²",
        }
    }
}

/// Medium coefficients. `k` is the local nonlinearity coefficient of either
/// form (k for Westervelt, k̃ for Kuznetsov); `l` multiplies the gradient term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MediumParams<T> {
    pub tau: T,
    pub c: T,
    pub delta: T,
    pub k: T,
    pub l: T,
}

impl<T: Scalar> Default for MediumParams<T> {
    fn default() -> Self {
        Self {
            tau: T::one(),
            c: T::one(),
            delta: T::of(0.1),
            k: T::zero(),
            l: T::zero(),
        }
    }
}

/// A validated model: variant, medium and fractional order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec<T> {
    variant: ModelVariant,
    params: MediumParams<T>,
    alpha: T,
}

/// Damping exponent β of the z-form.
pub fn beta_of<T: Scalar>(family: Family, alpha: T) -> Result<T> {
    check_alpha(family, alpha)?;
    Ok(match family {
        Family::Base => T::one(),
        Family::I | Family::III => T::two() - alpha,
        Family::II => alpha,
    })
}

/// Order of the relaxation operator in `z = τ^γ D_t^γ ψ + ψ`.
pub fn gamma_z_of<T: Scalar>(family: Family, alpha: T) -> T {
    match family {
        Family::III => T::one(),
        _ => alpha,
    }
}

fn check_alpha<T: Scalar>(family: Family, alpha: T) -> Result<()> {
    let floor = T::of(family.alpha_floor());
    if alpha > floor && alpha <= T::one() {
        Ok(())
    } else {
        let range = if family.alpha_floor() > 0.0 { "(1/2, 1]" } else { "(0, 1]" };
        Err(Error::InvalidModel(format!(
            "α must lie in {range} for family {family}, got {alpha}"
        )))
    }
}

impl<T: Scalar> ModelSpec<T> {
    /// Validates and builds a spec.
    pub fn new(variant: ModelVariant, params: MediumParams<T>, alpha: T) -> Result<Self> {
        let spec = Self { variant, params, alpha };
        spec.validate()
    }

    pub fn linear(family: Family, params: MediumParams<T>, alpha: T) -> Result<Self> {
        Self::new(ModelVariant::new(family, Nonlinearity::Linear), params, alpha)
    }

    /// Checks every invariant and returns the spec unchanged.
    pub fn validate(self) -> Result<Self> {
        check_alpha(self.variant.family, self.alpha)?;
        let p = &self.params;
        for (name, v) in [("τ", p.tau), ("c", p.c)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidModel(format!("{name} must be positive and finite, got {v}")));
            }
        }
        // δ = 0 is the undamped limit
        if !(p.delta >= T::zero()) || !p.delta.is_finite() {
            return Err(Error::InvalidModel(format!("δ must be non-negative and finite, got {}", p.delta)));
        }
        if !p.k.is_finite() || !p.l.is_finite() {
            return Err(Error::InvalidModel("nonlinearity coefficients must be finite".into()));
        }
        if self.variant.family == Family::II && self.variant.nonlinearity != Nonlinearity::Linear {
            return Err(Error::InvalidModel(
                "family II is only solvable in its linear form: its damping gives too weak an \
                 estimate to absorb a variable coefficient"
                    .into(),
            ));
        }
        if self.variant.nonlinearity == Nonlinearity::Westervelt && p.l != T::zero() {
            return Err(Error::InvalidModel("the Westervelt form has no gradient term; set l = 0".into()));
        }
        if self.variant.nonlinearity == Nonlinearity::Linear && (p.k != T::zero() || p.l != T::zero()) {
            return Err(Error::InvalidModel("linear models need k = l = 0".into()));
        }
        Ok(self)
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    pub fn family(&self) -> Family {
        self.variant.family
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.variant.nonlinearity
    }

    pub fn params(&self) -> &MediumParams<T> {
        &self.params
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        beta_of(self.variant.family, self.alpha).expect("validated")
    }

    pub fn gamma_z(&self) -> T {
        gamma_z_of(self.variant.family, self.alpha)
    }

    pub fn backend(&self) -> Backend {
        self.variant.backend()
    }

    /// Same medium and variant at another order (validated).
    pub fn with_alpha(&self, alpha: T) -> Result<Self> {
        Self::new(self.variant, self.params, alpha)
    }

    /// Linear counterpart (k = l = 0).
    pub fn linearized(&self) -> Self {
        Self {
            variant: ModelVariant::new(self.variant.family, Nonlinearity::Linear),
            params: MediumParams {
                k: T::zero(),
                l: T::zero(),
                ..self.params
            },
            alpha: self.alpha,
        }
    }
}

/// One catalog row.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub variant: ModelVariant,
    pub equation: String,
    pub beta: &'static str,
    pub alpha_range: &'static str,
    pub backend: Backend,
    pub gamma_z: &'static str,
}

/// Every (family, nonlinearity) pair: four linear and eight nonlinear rows.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut rows = Vec::new();
    for nl in Nonlinearity::ALL {
        for family in Family::ALL {
            let variant = ModelVariant::new(family, nl);
            let mut eq = String::new();
            for (i, t) in variant.terms().iter().enumerate() {
                let label = t.label();
                if i > 0 && !label.starts_with('-') {
                    eq.push_str(" + ");
                } else if i > 0 {
                    eq.push(' ');
                }
                eq.push_str(label);
            }
            eq.push_str(" = f");
            rows.push(CatalogEntry {
                variant,
                equation: eq,
                beta: match family {
                    Family::Base => "1",
                    Family::I | Family::III => "2-α",
                    Family::II => "α",
                },
                alpha_range: if family.alpha_floor() > 0.0 { "(1/2, 1]" } else { "(0, 1]" },
                backend: variant.backend(),
                gamma_z: if family == Family::III { "1" } else { "α" },
            });
        }
    }
    rows
}

/// `D_t^{order}` applied to a state history, using the supplied derivatives
/// whenever the order is an integer.
fn caputo_of<T: Scalar>(
    order: T,
    u_t: &SampledSignal<T>,
    u_tt: &SampledSignal<T>,
) -> Result<SampledSignal<T>> {
    if order == T::one() {
        Ok(u_t.clone())
    } else if order == T::two() {
        Ok(u_tt.clone())
    } else if order < T::one() {
        // D^γ u = I^{1-γ} u_t
        abel_integral(u_t, T::one() - order)
    } else {
        abel_integral(u_tt, T::two() - order)
    }
}

fn scale_by_eigen<T: Scalar>(s: &SampledSignal<T>, eig: &[T], factor: T) -> SampledSignal<T> {
    let mut out = s.clone();
    for n in 0..s.len() {
        for (x, &l) in out.node_mut(n).iter_mut().zip(eig) {
            *x *= factor * l;
        }
    }
    out
}

/// Left-hand side of the model applied to a trajectory, in mode coordinates.
pub fn apply_lhs<T: Scalar>(spec: &ModelSpec<T>, traj: &Trajectory<T>) -> Result<SampledSignal<T>> {
    let p = spec.params();
    let a = spec.alpha();
    let eig = traj.basis().eigenvalues().to_vec();
    let grid = *traj.grid();
    let dim = traj.basis().len();
    let mut lhs = SampledSignal::zeros(grid, dim);
    let mut add = |s: &SampledSignal<T>, w: T| {
        for n in 0..grid.len() {
            for (o, &x) in lhs.node_mut(n).iter_mut().zip(s.node(n)) {
                *o += w * x;
            }
        }
    };
    // -Δ acts as multiplication by λ in mode coordinates
    let lap_psi = scale_by_eigen(&traj.psi, &eig, T::one());
    let lap_psi_t = scale_by_eigen(&traj.psi_t, &eig, T::one());
    let lap_psi_tt = scale_by_eigen(&traj.psi_tt, &eig, T::one());
    let psi_ttt = difference_derivative(&traj.psi_tt)?;
    for term in spec.variant().terms() {
        match term {
            Term::FractionalInertia => {
                let d = if a == T::one() {
                    psi_ttt.clone()
                } else {
                    caputo_derivative(&traj.psi_tt, a)?
                };
                add(&d, p.tau.powf(a));
            }
            Term::ThirdOrderInertia => add(&psi_ttt, p.tau),
            Term::Inertia => add(&traj.psi_tt, T::one()),
            Term::Westervelt => {
                let mut prod = SampledSignal::zeros(grid, dim);
                for n in 0..grid.len() {
                    let q = pointwise_product(&traj.psi_t_at(n), &traj.psi_tt_at(n))?;
                    prod.node_mut(n).copy_from_slice(q.coeffs());
                }
                add(&prod, T::two() * p.k);
            }
            Term::Stiffness => add(&lap_psi, p.c * p.c),
            Term::FractionalStiffness => {
                add(&caputo_of(a, &lap_psi_t, &lap_psi_tt)?, p.tau.powf(a) * p.c * p.c)
            }
            Term::RelaxedStiffness => add(&lap_psi_t, p.tau * p.c * p.c),
            Term::Damping => add(&lap_psi_t, p.delta),
            Term::FractionalDamping => add(&caputo_of(T::two() - a, &lap_psi_t, &lap_psi_tt)?, p.delta),
            Term::FractionalLowDamping => add(&caputo_of(a, &lap_psi_t, &lap_psi_tt)?, p.delta),
            Term::Gradient => {
                // ∂_t |∇ψ|² = 2 ∇ψ · ∇ψ_t
                let mut g = SampledSignal::zeros(grid, dim);
                for n in 0..grid.len() {
                    let q = gradient_dot(&traj.psi_at(n), &traj.psi_t_at(n))?;
                    g.node_mut(n).copy_from_slice(q.coeffs());
                }
                add(&g, T::two() * p.l);
            }
        }
    }
    Ok(lhs)
}

/// Node-wise L² norm of `lhs - f`.
pub fn residual<T: Scalar>(spec: &ModelSpec<T>, traj: &Trajectory<T>, f: &SampledSignal<T>) -> Result<SampledSignal<T>> {
    let lhs = apply_lhs(spec, traj)?;
    lhs.check_compatible(f)?;
    let diff = lhs.zip_with(f, |a, b| a - b)?;
    Ok(SampledSignal::from_flat(*diff.grid(), 1, diff.node_norms())?)
}

/// Classical (J)MGT left-hand side
/// `τψ_ttt + (1 + 2kψ_t)ψ_tt - c²Δψ - (τc² + δ)Δψ_t (+ ℓ∂_t|∇ψ|²)`.
pub fn classical_lhs<T: Scalar>(params: &MediumParams<T>, nl: Nonlinearity, traj: &Trajectory<T>) -> Result<SampledSignal<T>> {
    let spec = ModelSpec {
        variant: ModelVariant::new(Family::III, nl),
        params: *params,
        alpha: T::one(),
    };
    apply_lhs(&spec, traj)
}

/// Spectral field helper: evaluates `(1 + σ) u` by collocation.
pub fn variable_mass<T: Scalar>(sigma: &SpectralField<T>, u: &SpectralField<T>) -> Result<SpectralField<T>> {
    let su = pointwise_product(sigma, u)?;
    u.combine(T::one(), &su, T::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_map() {
        assert_eq!(beta_of(Family::Base, 0.8).unwrap(), 1.0);
        assert!((beta_of(Family::I, 0.7).unwrap() - 1.3_f64).abs() < 1e-15);
        assert_eq!(beta_of(Family::II, 0.7).unwrap(), 0.7);
        assert!(beta_of(Family::Base, 0.4).is_err());
    }

    #[test]
    fn validation_messages() {
        let p = MediumParams::<f64>::default();
        let e = ModelSpec::linear(Family::Base, p, 0.4).unwrap_err();
        assert!(e.to_string().contains("(1/2, 1]"));
        let w = ModelVariant::new(Family::II, Nonlinearity::Westervelt);
        let e = ModelSpec::new(w, MediumParams { k: 0.1, ..p }, 0.7).unwrap_err();
        assert!(e.to_string().contains("family II"));
        let s = ModelSpec::linear(Family::III, p, 1.0).unwrap();
        assert_eq!(s.beta(), 1.0);
    }

    #[test]
    fn catalog_rows() {
        let rows = catalog();
        assert_eq!(rows.len(), 12);
        assert_eq!(rows.iter().filter(|r| r.variant.nonlinearity == Nonlinearity::Linear).count(), 4);
        let w2 = rows
            .iter()
            .find(|r| r.variant == ModelVariant::new(Family::II, Nonlinearity::Westervelt))
            .unwrap();
        assert_eq!(w2.backend, Backend::ResidualOnly);
    }

    #[test]
    fn westervelt_is_kuznetsov_without_gradient() {
        let w: Vec<Term> = ModelVariant::new(Family::III, Nonlinearity::Westervelt).terms();
        let k: Vec<Term> = ModelVariant::new(Family::III, Nonlinearity::Kuznetsov)
            .terms()
            .into_iter()
            .filter(|t| *t != Term::Gradient)
            .collect();
        assert_eq!(w, k);
    }
}
