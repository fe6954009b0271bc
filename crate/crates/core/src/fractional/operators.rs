use crate::error::{domain, Error, Result};
use crate::fractional::grid::SampledSignal;
use crate::fractional::weights::{l1_coefficients, ProductWeights};
use crate::scalar::Scalar;
use crate::special::{gamma, recip_gamma};

/// A fractional exponent in (0, 1].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct FractionalOrder<T>(T);

impl<T: Scalar> FractionalOrder<T> {
    pub fn new(value: T) -> Result<Self> {
        if value > T::zero() && value <= T::one() {
            Ok(Self(value))
        } else {
            domain(format!("fractional order must lie in (0, 1], got {value}"))
        }
    }

    /// Orders restricted to (1/2, 1].
    pub fn above_half(value: T) -> Result<Self> {
        if value > T::half() && value <= T::one() {
            Ok(Self(value))
        } else {
            domain(format!("order must lie in (1/2, 1], got {value}"))
        }
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 == T::one()
    }
}

/// `t^{-γ}/Γ(1-γ)` for γ ∈ (-1, 1), scaled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularKernel<T> {
    exponent: T,
    scale: T,
}

impl<T: Scalar> SingularKernel<T> {
    pub fn new(exponent: T, scale: T) -> Result<Self> {
        if exponent <= -T::one() || exponent >= T::one() {
            return domain(format!("kernel exponent must lie in (-1, 1), got {exponent}"));
        }
        Ok(Self { exponent, scale })
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    pub fn eval(&self, t: T) -> Result<T> {
        if self.exponent == T::zero() {
            return Ok(self.scale);
        }
        if !(t > T::zero()) {
            return domain(format!("singular kernel evaluated at t = {t}"));
        }
        Ok(self.scale * t.powf(-self.exponent) * recip_gamma(T::one() - self.exponent))
    }
}

/// `t^{-γ}/Γ(1-γ)`; identically 1 for γ = 0.
pub fn gamma_kernel<T: Scalar>(gamma_exp: T, t: T) -> Result<T> {
    if gamma_exp < T::zero() || gamma_exp >= T::one() {
        return domain(format!("kernel exponent must lie in [0, 1), got {gamma_exp}"));
    }
    SingularKernel::new(gamma_exp, T::one())?.eval(t)
}

/// Abel integral `I^γ w` by piecewise-linear product integration.
///
/// Any positive order is accepted; γ = 1 is the running integral (trapezoid rule).
pub fn abel_integral<T: Scalar>(w: &SampledSignal<T>, order: T) -> Result<SampledSignal<T>> {
    if !(order > T::zero()) {
        return domain(format!("Abel integral order must be positive, got {order}"));
    }
    let grid = *w.grid();
    let pw = ProductWeights::new(order - T::one(), grid.step(), grid.steps());
    let dim = w.dim();
    let mut out = SampledSignal::zeros(grid, dim);
    let mut hist = vec![T::zero(); dim];
    for n in 1..grid.len() {
        pw.history_vec(n, w.as_flat(), dim, &mut hist);
        let d = pw.diagonal();
        let cur = w.node(n);
        for (o, (&h, &c)) in out.node_mut(n).iter_mut().zip(hist.iter().zip(cur)) {
            *o = h + d * c;
        }
    }
    Ok(out)
}

/// Second-order difference approximation of `w_t`.
pub fn difference_derivative<T: Scalar>(w: &SampledSignal<T>) -> Result<SampledSignal<T>> {
    let grid = *w.grid();
    let n_max = grid.steps();
    if n_max < 2 {
        return Err(Error::Shape("difference derivative needs at least 3 nodes".into()));
    }
    let h = grid.step();
    let dim = w.dim();
    let mut out = SampledSignal::zeros(grid, dim);
    let three = T::of(3.0);
    let four = T::of(4.0);
    for i in 0..dim {
        let u = w.component(i);
        for n in 0..=n_max {
            let d = if n == 0 {
                (-three * u[0] + four * u[1] - u[2]) / (T::two() * h)
            } else if n == n_max {
                (three * u[n] - four * u[n - 1] + u[n - 2]) / (T::two() * h)
            } else {
                (u[n + 1] - u[n - 1]) / (T::two() * h)
            };
            out.node_mut(n)[i] = d;
        }
    }
    Ok(out)
}

/// Centered second difference, one-sided second order at both ends.
pub fn second_difference_derivative<T: Scalar>(w: &SampledSignal<T>) -> Result<SampledSignal<T>> {
    let grid = *w.grid();
    let n_max = grid.steps();
    if n_max < 3 {
        return Err(Error::Shape("second difference needs at least 4 nodes".into()));
    }
    let h2 = grid.step() * grid.step();
    let dim = w.dim();
    let mut out = SampledSignal::zeros(grid, dim);
    let (four, five) = (T::of(4.0), T::of(5.0));
    for i in 0..dim {
        let u = w.component(i);
        for n in 0..=n_max {
            let d = if n == 0 {
                T::two() * u[0] - five * u[1] + four * u[2] - u[3]
            } else if n == n_max {
                T::two() * u[n] - five * u[n - 1] + four * u[n - 2] - u[n - 3]
            } else {
                u[n + 1] - T::two() * u[n] + u[n - 1]
            };
            out.node_mut(n)[i] = d / h2;
        }
    }
    Ok(out)
}

fn l1_caputo<T: Scalar>(w: &SampledSignal<T>, order: T) -> SampledSignal<T> {
    let grid = *w.grid();
    let b = l1_coefficients(order, grid.steps());
    let scale = grid.step().powf(-order) / gamma(T::two() - order);
    let dim = w.dim();
    let mut out = SampledSignal::zeros(grid, dim);
    let flat = w.as_flat();
    for n in 1..grid.len() {
        let node = out.node_mut(n);
        for k in 1..=n {
            let bk = b[n - k];
            for i in 0..dim {
                node[i] += bk * (flat[k * dim + i] - flat[(k - 1) * dim + i]);
            }
        }
        node.iter_mut().for_each(|x| *x *= scale);
    }
    out
}

/// Caputo derivative of order γ ∈ (0, 2).
///
/// L1 scheme for γ < 1, difference derivative for γ = 1 and `I^{2-γ}` of the
/// second difference for γ ∈ (1, 2). The value at node 0 is 0 for γ < 1.
pub fn caputo_derivative<T: Scalar>(w: &SampledSignal<T>, order: T) -> Result<SampledSignal<T>> {
    if !(order > T::zero()) || order >= T::two() {
        return domain(format!("Caputo order must lie in (0, 2), got {order}"));
    }
    if order < T::one() {
        Ok(l1_caputo(w, order))
    } else if order == T::one() {
        difference_derivative(w)
    } else {
        abel_integral(&second_difference_derivative(w)?, T::two() - order)
    }
}

/// Trapezoid quadrature of `∫_0^T ⟨I^{1-α} w, w⟩ ds`.
pub fn coercivity_quadform<T: Scalar>(w: &SampledSignal<T>, alpha: T) -> Result<T> {
    if !(alpha > T::zero()) || alpha > T::one() {
        return domain(format!("coercivity order must lie in (0, 1], got {alpha}"));
    }
    let v = if alpha == T::one() {
        w.clone()
    } else {
        abel_integral(w, T::one() - alpha)?
    };
    let weights = w.grid().trapezoid_weights();
    let mut acc = crate::scalar::KahanSum::new();
    for (n, &wt) in weights.iter().enumerate() {
        let dot: T = v.node(n).iter().zip(w.node(n)).map(|(&a, &b)| a * b).sum();
        acc.add(wt * dot);
    }
    Ok(acc.value())
}

/// `w D^γ w - ½ D^γ(w²)` at each node, both terms by the L1 scheme.
pub fn alikhanov_gap<T: Scalar>(w: &SampledSignal<T>, order: T) -> Result<SampledSignal<T>> {
    if w.dim() != 1 {
        return Err(Error::Shape("Alikhanov gap needs a scalar signal".into()));
    }
    if !(order > T::zero()) || order >= T::one() {
        return domain(format!("order must lie in (0, 1), got {order}"));
    }
    let dw = l1_caputo(w, order);
    let dw2 = l1_caputo(&w.map(|x| x * x), order);
    let prod = w.zip_with(&dw, |a, b| a * b)?;
    prod.zip_with(&dw2, |a, b| a - T::half() * b)
}

/// Discrete L²(0,T) norm of `D^α w - w_t`.
pub fn limit_discrepancy<T: Scalar>(w: &SampledSignal<T>, alpha: T) -> Result<T> {
    if !(alpha > T::zero()) || alpha >= T::two() {
        return domain(format!("order must lie in (0, 2), got {alpha}"));
    }
    let wt = difference_derivative(w)?;
    let da = caputo_derivative(w, alpha)?;
    Ok(da.zip_with(&wt, |a, b| a - b)?.l2_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::TimeGrid;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> TimeGrid<f64> {
        TimeGrid::new(1.0, n).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert_eq!(gamma_kernel(0.0, 3.7).unwrap(), 1.0);
        assert_relative_eq!(gamma_kernel(0.5, 1.0).unwrap(), 1.0 / std::f64::consts::PI.sqrt(), max_relative = 1e-14);
        // mpmath: 2^-0.3 / Gamma(0.7)
        assert_relative_eq!(gamma_kernel(0.3, 2.0).unwrap(), 0.625_745_587_208_164_603_88, max_relative = 1e-13);
        assert!(gamma_kernel(0.3, 0.0).is_err());
        assert!(gamma_kernel(1.0, 1.0).is_err());
    }

    #[test]
    fn abel_of_constant_and_linear() {
        let g = grid(64);
        let one = SampledSignal::scalar_fn(g, |_| 1.0);
        let i = abel_integral(&one, 0.5).unwrap();
        for (n, t) in g.nodes().enumerate() {
            assert!((i.values()[n] - t.sqrt() / gamma(1.5)).abs() < 1e-13);
        }
        let g = grid(256);
        let lin = SampledSignal::scalar_fn(g, |t| t);
        let i = abel_integral(&lin, 0.7).unwrap();
        assert!((i.values()[256] - 1.0 / gamma(2.7)).abs() < 1e-4);
    }

    #[test]
    fn caputo_monomials() {
        let g = grid(256);
        let c = SampledSignal::scalar_fn(g, |_| 2.5);
        assert!(caputo_derivative(&c, 0.4).unwrap().max_abs() == 0.0);
        let lin = SampledSignal::scalar_fn(g, |t| t);
        let d = caputo_derivative(&lin, 0.6).unwrap();
        for (n, t) in g.nodes().enumerate() {
            assert!((d.values()[n] - t.powf(0.4) / gamma(1.4)).abs() < 1e-12);
        }
        assert!(caputo_derivative(&lin, 2.0).is_err());
    }

    #[test]
    fn quadform_of_constant() {
        let g = TimeGrid::new(2.0, 512).unwrap();
        let one = SampledSignal::scalar_fn(g, |_| 1.0);
        let q = coercivity_quadform(&one, 0.5).unwrap();
        let exact = 2.0_f64.powf(1.5) / gamma(2.5);
        assert!((q - exact).abs() < 1e-4, "{q} vs {exact}");
    }

    #[test]
    fn limit_at_one_is_zero() {
        let g = grid(128);
        let w = SampledSignal::scalar_fn(g, |t| t * t);
        assert_eq!(limit_discrepancy(&w, 1.0).unwrap(), 0.0);
    }
}
