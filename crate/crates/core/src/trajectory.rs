use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fractional::{SampledSignal, TimeGrid};
use crate::scalar::Scalar;
use crate::spectral::{EigenBasis, SpectralField};

/// Time history of `(ψ, ψ_t, ψ_tt)` in mode coordinates.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Scalar> {
    basis: Arc<EigenBasis<T>>,
    pub psi: SampledSignal<T>,
    pub psi_t: SampledSignal<T>,
    pub psi_tt: SampledSignal<T>,
    /// Volterra unknown (leading derivative), when the solver has one.
    pub mu: Option<SampledSignal<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(
        basis: Arc<EigenBasis<T>>,
        psi: SampledSignal<T>,
        psi_t: SampledSignal<T>,
        psi_tt: SampledSignal<T>,
        mu: Option<SampledSignal<T>>,
    ) -> Result<Self> {
        for s in [&psi, &psi_t, &psi_tt].into_iter().chain(mu.as_ref()) {
            if s.dim() != basis.len() || s.len() != psi.len() {
                return Err(Error::Shape("trajectory components disagree with the basis".into()));
            }
        }
        Ok(Self {
            basis,
            psi,
            psi_t,
            psi_tt,
            mu,
        })
    }

    pub fn zeros(basis: &Arc<EigenBasis<T>>, grid: TimeGrid<T>) -> Self {
        let z = SampledSignal::zeros(grid, basis.len());
        Self {
            basis: Arc::clone(basis),
            psi: z.clone(),
            psi_t: z.clone(),
            psi_tt: z,
            mu: None,
        }
    }

    pub fn basis(&self) -> &Arc<EigenBasis<T>> {
        &self.basis
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.psi.grid()
    }

    fn field(&self, s: &SampledSignal<T>, n: usize) -> SpectralField<T> {
        SpectralField::new(Arc::clone(&self.basis), s.node(n).to_vec()).expect("trajectory dimension")
    }

    pub fn psi_at(&self, n: usize) -> SpectralField<T> {
        self.field(&self.psi, n)
    }

    pub fn psi_t_at(&self, n: usize) -> SpectralField<T> {
        self.field(&self.psi_t, n)
    }

    pub fn psi_tt_at(&self, n: usize) -> SpectralField<T> {
        self.field(&self.psi_tt, n)
    }
}

/// Initial state `(ψ0, ψ1, ψ2)`.
#[derive(Clone, Debug)]
pub struct InitialData<T: Scalar> {
    pub psi0: SpectralField<T>,
    pub psi1: SpectralField<T>,
    pub psi2: SpectralField<T>,
}

impl<T: Scalar> InitialData<T> {
    pub fn zeros(basis: &Arc<EigenBasis<T>>) -> Self {
        Self {
            psi0: SpectralField::zeros(basis),
            psi1: SpectralField::zeros(basis),
            psi2: SpectralField::zeros(basis),
        }
    }

    pub fn basis(&self) -> &Arc<EigenBasis<T>> {
        self.psi0.basis()
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            psi0: self.psi0.scaled(a),
            psi1: self.psi1.scaled(a),
            psi2: self.psi2.scaled(a),
        }
    }
}

/// A source term sampled in mode coordinates on the solver grid.
pub type Source<T> = SampledSignal<T>;
