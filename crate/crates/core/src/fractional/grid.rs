use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Uniform grid `t_n = n T / N`, `n = 0..=N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    horizon: T,
    steps: usize,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(horizon: T, steps: usize) -> Result<Self> {
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::Domain(format!("time horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::Domain("time grid needs at least one step".into()));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> T {
        self.horizon / T::of_usize(self.steps)
    }

    pub fn node(&self, n: usize) -> T {
        if n == self.steps {
            self.horizon
        } else {
            T::of_usize(n) * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(move |n| self.node(n))
    }

    /// Grid with the same horizon and `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            horizon: self.horizon,
            steps: self.steps * factor,
        }
    }

    /// Composite trapezoid weights over the nodes.
    pub fn trapezoid_weights(&self) -> Vec<T> {
        let h = self.step();
        let mut w = vec![h; self.len()];
        w[0] = h * T::half();
        w[self.steps] = h * T::half();
        w
    }
}

/// Vector-valued samples on a [`TimeGrid`], one fixed-dimension vector per node.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal<T> {
    grid: TimeGrid<T>,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SampledSignal<T> {
    pub fn zeros(grid: TimeGrid<T>, dim: usize) -> Self {
        Self {
            grid,
            dim,
            data: vec![T::zero(); grid.len() * dim],
        }
    }

    /// Builds a signal from node vectors; all must share one dimension.
    pub fn from_nodes(grid: TimeGrid<T>, nodes: Vec<Vec<T>>) -> Result<Self> {
        if nodes.len() != grid.len() {
            return Err(Error::Shape(format!(
                "expected {} node vectors, got {}",
                grid.len(),
                nodes.len()
            )));
        }
        let dim = nodes[0].len();
        let mut data = Vec::with_capacity(dim * nodes.len());
        for (n, v) in nodes.into_iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Shape(format!("node {n} has dimension {} (expected {dim})", v.len())));
            }
            data.extend(v);
        }
        Ok(Self { grid, dim, data })
    }

    pub fn from_flat(grid: TimeGrid<T>, dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() * dim {
            return Err(Error::Shape(format!(
                "flat buffer of length {} does not match {} nodes x {dim}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, dim, data })
    }

    /// Scalar signal sampled from a closed-form function.
    pub fn scalar_fn(grid: TimeGrid<T>, f: impl Fn(T) -> T) -> Self {
        let data = grid.nodes().map(f).collect();
        Self { grid, dim: 1, data }
    }

    pub fn from_fn(grid: TimeGrid<T>, dim: usize, f: impl Fn(T) -> Vec<T>) -> Result<Self> {
        let s = Self::from_nodes(grid, grid.nodes().map(f).collect())?;
        if s.dim != dim {
            return Err(Error::Shape(format!("expected dimension {dim}, got {}", s.dim)));
        }
        Ok(s)
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, n: usize) -> &[T] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    pub fn node_mut(&mut self, n: usize) -> &mut [T] {
        &mut self.data[n * self.dim..(n + 1) * self.dim]
    }

    /// Time series of one component.
    pub fn component(&self, i: usize) -> Vec<T> {
        (0..self.len()).map(|n| self.data[n * self.dim + i]).collect()
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    /// Node values of a scalar signal.
    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            dim: self.dim,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            grid: self.grid,
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.grid.len() != other.grid.len() {
            return Err(Error::Shape(format!(
                "signals differ: {}x{} vs {}x{}",
                self.len(),
                self.dim,
                other.len(),
                other.dim
            )));
        }
        Ok(())
    }

    /// Euclidean norm of every node vector.
    pub fn node_norms(&self) -> Vec<T> {
        (0..self.len())
            .map(|n| self.node(n).iter().map(|&x| x * x).sum::<T>().sqrt())
            .collect()
    }

    /// Discrete L²(0,T) norm (trapezoid in time, Euclidean per node).
    pub fn l2_norm(&self) -> T {
        let w = self.grid.trapezoid_weights();
        (0..self.len())
            .map(|n| w[n] * self.node(n).iter().map(|&x| x * x).sum::<T>())
            .sum::<T>()
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }
}
