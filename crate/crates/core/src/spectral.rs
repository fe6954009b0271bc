//! Dirichlet-Laplacian sine eigenbasis on an interval or a rectangle.
//!
//! Fields are stored as coefficient vectors in the L²-orthonormal basis, so
//! the mass matrix is the identity and the stiffness matrix is diagonal.
//! Nonlinear and variable-coefficient terms are evaluated by collocation on
//! an interior grid with twice as many points as modes per axis.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// Spatial domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain<T> {
    Interval { length: T },
    Rectangle { lx: T, ly: T },
}

impl<T: Scalar> Domain<T> {
    pub fn interval(length: T) -> Result<Self> {
        if !(length > T::zero()) {
            return domain(format!("interval length must be positive, got {length}"));
        }
        Ok(Self::Interval { length })
    }

    pub fn rectangle(lx: T, ly: T) -> Result<Self> {
        if !(lx > T::zero()) || !(ly > T::zero()) {
            return domain(format!("rectangle sides must be positive, got {lx} x {ly}"));
        }
        Ok(Self::Rectangle { lx, ly })
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Interval { .. } => 1,
            Self::Rectangle { .. } => 2,
        }
    }

    fn lengths(&self) -> Vec<T> {
        match *self {
            Self::Interval { length } => vec![length],
            Self::Rectangle { lx, ly } => vec![lx, ly],
        }
    }
}

/// Interior collocation points of one axis and the FFT that realizes the
/// sine and cosine sums on them.
#[derive(Clone)]
struct Axis<T: Scalar> {
    length: T,
    modes: usize,
    points: usize,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Scalar> fmt::Debug for Axis<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Axis")
            .field("length", &self.length)
            .field("modes", &self.modes)
            .field("points", &self.points)
            .finish()
    }
}

enum Sum {
    Sin,
    Cos,
}

impl<T: Scalar> Axis<T> {
    fn new(length: T, modes: usize, points: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (points + 1));
        Self {
            length,
            modes,
            points,
            fft,
        }
    }

    fn spacing(&self) -> T {
        self.length / T::of_usize(self.points + 1)
    }

    fn node(&self, k: usize) -> T {
        T::of_usize(k + 1) * self.spacing()
    }

    fn wavenumber(&self, j: usize) -> T {
        T::of_usize(j + 1) * T::PI() / self.length
    }

    fn norm(&self) -> T {
        (T::two() / self.length).sqrt()
    }

    /// `out[k] = Σ_j a[j] sin|cos(π (j+1)(k+1) / (M+1))`, k < M.
    fn synthesize(&self, a: &[T], kind: Sum, out: &mut [T]) {
        let p = 2 * (self.points + 1);
        let mut buf = vec![Complex::new(T::zero(), T::zero()); p];
        for (j, &x) in a.iter().enumerate() {
            buf[j + 1].re = x;
        }
        self.fft.process(&mut buf);
        for (k, o) in out.iter_mut().enumerate().take(self.points) {
            *o = match kind {
                Sum::Sin => -buf[k + 1].im,
                Sum::Cos => buf[k + 1].re,
            };
        }
    }

    /// `out[j] = Σ_k v[k] sin(π (j+1)(k+1) / (M+1))` for the first `out.len()` modes.
    fn analyze(&self, v: &[T], out: &mut [T]) {
        let p = 2 * (self.points + 1);
        let mut buf = vec![Complex::new(T::zero(), T::zero()); p];
        for (k, &x) in v.iter().enumerate() {
            buf[k + 1].re = x;
        }
        self.fft.process(&mut buf);
        for (j, o) in out.iter_mut().enumerate() {
            *o = -buf[j + 1].im;
        }
    }
}

/// Which derivative, if any, to synthesize on the collocation grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    None,
    Axis(usize),
}

/// Eigenpairs `-Δφ_i = λ_i φ_i` sorted by eigenvalue.
#[derive(Debug)]
pub struct EigenBasis<T: Scalar> {
    domain: Domain<T>,
    axes: Vec<Axis<T>>,
    /// zero-based per-axis mode numbers of each basis function
    index: Vec<[usize; 2]>,
    eigenvalues: Vec<T>,
}

/// Values of a field on the collocation grid, axis 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridValues<T> {
    pub shape: [usize; 2],
    pub values: Vec<T>,
}

impl<T: Scalar> GridValues<T> {
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            shape: self.shape,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }
}

const DEALIAS: usize = 2;
const PROJECT_OVERSAMPLING: usize = 16;

impl<T: Scalar> EigenBasis<T> {
    /// Basis with `cutoff[a]` modes along each axis (one entry per dimension).
    pub fn new(domain: Domain<T>, cutoff: &[usize]) -> Result<Arc<Self>> {
        Self::with_grid_factor(domain, cutoff, DEALIAS)
    }

    pub fn interval(length: T, modes: usize) -> Result<Arc<Self>> {
        Self::new(Domain::interval(length)?, &[modes])
    }

    pub fn rectangle(lx: T, ly: T, mx: usize, my: usize) -> Result<Arc<Self>> {
        Self::new(Domain::rectangle(lx, ly)?, &[mx, my])
    }

    fn with_grid_factor(dom: Domain<T>, cutoff: &[usize], factor: usize) -> Result<Arc<Self>> {
        let lengths = dom.lengths();
        if cutoff.len() != lengths.len() {
            return Err(Error::Shape(format!(
                "{}-dimensional domain needs {} cutoffs, got {}",
                lengths.len(),
                lengths.len(),
                cutoff.len()
            )));
        }
        if cutoff.iter().any(|&c| c == 0) {
            return domain(format!("mode cutoffs must be positive, got {cutoff:?}"));
        }
        let axes: Vec<Axis<T>> = lengths
            .iter()
            .zip(cutoff)
            .map(|(&l, &k)| Axis::new(l, k, factor * k))
            .collect();
        let mut index: Vec<[usize; 2]> = match axes.len() {
            1 => (0..cutoff[0]).map(|i| [i, 0]).collect(),
            _ => (0..cutoff[0])
                .flat_map(|i| (0..cutoff[1]).map(move |j| [i, j]))
                .collect(),
        };
        let lambda = |ix: &[usize; 2]| -> T {
            axes.iter()
                .enumerate()
                .map(|(a, ax)| ax.wavenumber(ix[a]).powi(2))
                .sum()
        };
        index.sort_by(|a, b| lambda(a).partial_cmp(&lambda(b)).unwrap().then(a.cmp(b)));
        let eigenvalues = index.iter().map(lambda).collect();
        Ok(Arc::new(Self {
            domain: dom,
            axes,
            index,
            eigenvalues,
        }))
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// One-based per-axis mode numbers of basis function `i`.
    pub fn mode_numbers(&self, i: usize) -> Vec<usize> {
        (0..self.axes.len()).map(|a| self.index[i][a] + 1).collect()
    }

    /// Position of the basis function with the given one-based mode numbers.
    pub fn position(&self, modes: &[usize]) -> Option<usize> {
        self.index.iter().position(|ix| {
            modes.len() == self.axes.len() && modes.iter().enumerate().all(|(a, &m)| ix[a] + 1 == m)
        })
    }

    pub fn grid_shape(&self) -> [usize; 2] {
        [self.axes[0].points, self.axes.get(1).map_or(1, |a| a.points)]
    }

    /// Collocation nodes, axis 0 slowest.
    pub fn grid_points(&self) -> Vec<Vec<T>> {
        let [mx, my] = self.grid_shape();
        let mut pts = Vec::with_capacity(mx * my);
        for kx in 0..mx {
            for ky in 0..my {
                let mut p = vec![self.axes[0].node(kx)];
                if let Some(ay) = self.axes.get(1) {
                    p.push(ay.node(ky));
                }
                pts.push(p);
            }
        }
        pts
    }

    fn cell_volume(&self) -> T {
        self.axes.iter().map(|a| a.spacing()).fold(T::one(), |a, b| a * b)
    }

    /// Evaluates coefficients (or one partial derivative) on the collocation grid.
    pub fn synthesize(&self, coeffs: &[T], which: Derivative) -> GridValues<T> {
        let shape = self.grid_shape();
        let kinds = |a: usize| match which {
            Derivative::Axis(d) if d == a => Sum::Cos,
            _ => Sum::Sin,
        };
        let factor = |a: usize, j: usize| -> T {
            let ax = &self.axes[a];
            match which {
                Derivative::Axis(d) if d == a => ax.norm() * ax.wavenumber(j),
                _ => ax.norm(),
            }
        };
        if self.axes.len() == 1 {
            let ax = &self.axes[0];
            let mut a = vec![T::zero(); ax.modes];
            for (c, ix) in coeffs.iter().zip(&self.index) {
                a[ix[0]] = *c * factor(0, ix[0]);
            }
            let mut values = vec![T::zero(); ax.points];
            ax.synthesize(&a, kinds(0), &mut values);
            return GridValues { shape, values };
        }
        let (ax, ay) = (&self.axes[0], &self.axes[1]);
        // coefficient matrix [i][j]
        let mut a = vec![T::zero(); ax.modes * ay.modes];
        for (c, ix) in coeffs.iter().zip(&self.index) {
            a[ix[0] * ay.modes + ix[1]] = *c * factor(0, ix[0]) * factor(1, ix[1]);
        }
        // along x for every j: b[kx][j]
        let mut b = vec![T::zero(); ax.points * ay.modes];
        let mut col = vec![T::zero(); ax.modes];
        let mut out = vec![T::zero(); ax.points];
        for j in 0..ay.modes {
            for i in 0..ax.modes {
                col[i] = a[i * ay.modes + j];
            }
            ax.synthesize(&col, kinds(0), &mut out);
            for kx in 0..ax.points {
                b[kx * ay.modes + j] = out[kx];
            }
        }
        let mut values = vec![T::zero(); ax.points * ay.points];
        for kx in 0..ax.points {
            ay.synthesize(
                &b[kx * ay.modes..(kx + 1) * ay.modes],
                kinds(1),
                &mut values[kx * ay.points..(kx + 1) * ay.points],
            );
        }
        GridValues { shape, values }
    }

    /// Discrete L² projection of collocation values onto the basis.
    pub fn analyze(&self, grid: &GridValues<T>) -> Vec<T> {
        let scale = self.cell_volume() * self.axes.iter().map(|a| a.norm()).fold(T::one(), |a, b| a * b);
        if self.axes.len() == 1 {
            let ax = &self.axes[0];
            let mut b = vec![T::zero(); ax.modes];
            ax.analyze(&grid.values, &mut b);
            return self.index.iter().map(|ix| b[ix[0]] * scale).collect();
        }
        let (ax, ay) = (&self.axes[0], &self.axes[1]);
        // along y for every kx: b[kx][j]
        let mut b = vec![T::zero(); ax.points * ay.modes];
        for kx in 0..ax.points {
            ay.analyze(
                &grid.values[kx * ay.points..(kx + 1) * ay.points],
                &mut b[kx * ay.modes..(kx + 1) * ay.modes],
            );
        }
        let mut c = vec![T::zero(); ax.modes * ay.modes];
        let mut col = vec![T::zero(); ax.points];
        let mut out = vec![T::zero(); ax.modes];
        for j in 0..ay.modes {
            for kx in 0..ax.points {
                col[kx] = b[kx * ay.modes + j];
            }
            ax.analyze(&col, &mut out);
            for i in 0..ax.modes {
                c[i * ay.modes + j] = out[i];
            }
        }
        self.index.iter().map(|ix| c[ix[0] * ay.modes + ix[1]] * scale).collect()
    }

    /// Grid quadrature of `∫ u v dx`.
    pub fn grid_inner(&self, u: &GridValues<T>, v: &GridValues<T>) -> T {
        u.values.iter().zip(&v.values).map(|(&a, &b)| a * b).sum::<T>() * self.cell_volume()
    }

    /// L² projection of a pointwise function, computed on an oversampled grid.
    pub fn project(self: &Arc<Self>, f: impl Fn(&[T]) -> T) -> SpectralField<T> {
        let cutoff: Vec<usize> = self.axes.iter().map(|a| a.modes).collect();
        let fine = Self::with_grid_factor(self.domain, &cutoff, PROJECT_OVERSAMPLING)
            .expect("cutoffs already validated");
        let values: Vec<T> = fine.grid_points().iter().map(|p| f(p)).collect();
        let coeffs = fine.analyze(&GridValues {
            shape: fine.grid_shape(),
            values,
        });
        // the fine basis uses the same mode ordering
        SpectralField::new(Arc::clone(self), coeffs).expect("matching length")
    }
}

/// Coefficients of a field in an [`EigenBasis`].
#[derive(Clone, Debug)]
pub struct SpectralField<T: Scalar> {
    basis: Arc<EigenBasis<T>>,
    coeffs: Vec<T>,
}

impl<T: Scalar> PartialEq for SpectralField<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) && self.coeffs == other.coeffs
    }
}

impl<T: Scalar> SpectralField<T> {
    pub fn new(basis: Arc<EigenBasis<T>>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Shape(format!(
                "basis has {} functions, got {} coefficients",
                basis.len(),
                coeffs.len()
            )));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn zeros(basis: &Arc<EigenBasis<T>>) -> Self {
        Self {
            basis: Arc::clone(basis),
            coeffs: vec![T::zero(); basis.len()],
        }
    }

    /// The `i`-th basis function (zero-based position in eigenvalue order).
    pub fn unit(basis: &Arc<EigenBasis<T>>, i: usize) -> Self {
        let mut f = Self::zeros(basis);
        f.coeffs[i] = T::one();
        f
    }

    pub fn basis(&self) -> &Arc<EigenBasis<T>> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || self.basis.eigenvalues == other.basis.eigenvalues {
            Ok(())
        } else {
            Err(Error::Shape("fields live in different bases".into()))
        }
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().map(|&c| a * c).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.check_basis(other)?;
        Ok(Self {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&x, &y)| a * x + b * y).collect(),
        })
    }

    /// Value at a point of the domain.
    pub fn evaluate(&self, point: &[T]) -> T {
        let b = &self.basis;
        self.coeffs
            .iter()
            .zip(&b.index)
            .map(|(&c, ix)| {
                b.axes
                    .iter()
                    .enumerate()
                    .map(|(a, ax)| ax.norm() * (ax.wavenumber(ix[a]) * point[a]).sin())
                    .fold(c, |acc, v| acc * v)
            })
            .sum()
    }

    pub fn to_grid(&self) -> GridValues<T> {
        self.basis.synthesize(&self.coeffs, Derivative::None)
    }
}

/// `c_i ↦ -λ_i c_i`.
pub fn laplacian_apply<T: Scalar>(u: &SpectralField<T>) -> SpectralField<T> {
    SpectralField {
        basis: Arc::clone(&u.basis),
        coeffs: u
            .coeffs
            .iter()
            .zip(&u.basis.eigenvalues)
            .map(|(&c, &l)| -l * c)
            .collect(),
    }
}

/// `(Σ λ_i^m c_i²)^{1/2}` for m ∈ {0, 1, 2, 3}.
pub fn sobolev_norm<T: Scalar>(u: &SpectralField<T>, m: u32) -> Result<T> {
    if m > 3 {
        return domain(format!("Sobolev order must be 0..=3, got {m}"));
    }
    Ok(weighted_norm(u.coeffs(), u.basis.eigenvalues(), m))
}

/// `(Σ λ_i^m c_i²)^{1/2}` on raw coefficient slices.
pub fn weighted_norm<T: Scalar>(coeffs: &[T], eigenvalues: &[T], m: u32) -> T {
    coeffs
        .iter()
        .zip(eigenvalues)
        .map(|(&c, &l)| l.powi(m as i32) * c * c)
        .sum::<T>()
        .sqrt()
}

/// Dealiased collocation product `P(u v)`.
pub fn pointwise_product<T: Scalar>(u: &SpectralField<T>, v: &SpectralField<T>) -> Result<SpectralField<T>> {
    u.check_basis(v)?;
    let gu = u.to_grid();
    let gv = v.to_grid();
    let coeffs = u.basis.analyze(&gu.zip_with(&gv, |a, b| a * b));
    SpectralField::new(Arc::clone(&u.basis), coeffs)
}

/// Dealiased collocation evaluation of `P(∇u · ∇v)`.
pub fn gradient_dot<T: Scalar>(u: &SpectralField<T>, v: &SpectralField<T>) -> Result<SpectralField<T>> {
    u.check_basis(v)?;
    let b = &u.basis;
    let mut acc: Option<GridValues<T>> = None;
    for a in 0..b.dimension() {
        let du = b.synthesize(&u.coeffs, Derivative::Axis(a));
        let dv = b.synthesize(&v.coeffs, Derivative::Axis(a));
        let prod = du.zip_with(&dv, |x, y| x * y);
        acc = Some(match acc {
            None => prod,
            Some(s) => s.zip_with(&prod, |x, y| x + y),
        });
    }
    let coeffs = b.analyze(&acc.expect("at least one axis"));
    SpectralField::new(Arc::clone(b), coeffs)
}
