//! Two-parameter Mittag-Leffler functions on the non-positive real axis and
//! the relaxation kernels built from them.

use crate::error::{domain, Error, Result};
use crate::quadrature::integrate;
use crate::scalar::{KahanSum, Scalar};
use crate::special::{ln_gamma, recip_gamma};

const SERIES_CAP: usize = 600;
// Σ|terms| / |sum| above which the power series is abandoned.
const SERIES_CONDITION: f64 = 1e3;

/// Power series, returning the sum together with Σ|terms| / |sum|.
fn series<T: Scalar>(alpha: T, beta: T, x: T) -> (T, T) {
    let mut acc = KahanSum::new();
    let mut abs_acc = T::zero();
    let ln_x = x.abs().ln();
    let neg = x < T::zero();
    let mut converged = false;
    for k in 0..SERIES_CAP {
        let arg = alpha * T::of_usize(k) + beta;
        let mag = if arg < T::of(30.0) {
            x.abs().powi(k as i32) * recip_gamma(arg)
        } else {
            (T::of_usize(k) * ln_x - ln_gamma(arg)).exp()
        };
        let term = if neg && k % 2 == 1 { -mag } else { mag };
        acc.add(term);
        abs_acc += mag.abs();
        // past the peak of the terms and below resolution
        let past_peak = arg > T::one() && T::of_usize(k) * alpha > x.abs().powf(alpha.recip());
        if k > 2 && past_peak && mag <= T::epsilon() * T::of(1e-3) * acc.value().abs() {
            converged = true;
            break;
        }
    }
    let sum = acc.value();
    let cond = if !converged || sum == T::zero() { T::infinity() } else { abs_acc / sum.abs() };
    (sum, cond)
}

/// Real-axis inverse-Laplace representation of `E_{α,β}(-x)`, x > 0,
/// 0 < α < 1, β < 1 + α.
fn integral<T: Scalar>(alpha: T, beta: T, x: T) -> T {
    let pi = T::PI();
    let (sb, sba, ca) = ((beta * pi).sin(), ((beta - alpha) * pi).sin(), (alpha * pi).cos());
    let inv_alpha = alpha.recip();
    let e = (T::one() - beta) * inv_alpha;
    // u = r^α; the e^{-r} factor is negligible beyond r = 60
    let u_max = T::of(60.0).powf(alpha);
    let g = |u: T| -> T {
        let num = u * sb + x * sba;
        let den = u * u + T::two() * x * u * ca + x * x;
        (-u.powf(inv_alpha)).exp() * num / den
    };
    // the Kronrod-Gauss difference overestimates the Kronrod error by orders of magnitude
    let abs_tol = T::epsilon() / (T::one() + x);
    let rel_tol = T::of(1e-11).max(T::epsilon() * T::of(64.0));
    let pieces = |a: T, b: T, h: &dyn Fn(T) -> T| -> T {
        let split = x.min(b);
        let mut s = T::zero();
        if split > a {
            s += integrate(h, a, split, abs_tol, rel_tol);
        }
        if b > split.max(a) {
            s += integrate(h, split.max(a), b, abs_tol, rel_tol);
        }
        s
    };
    let scale = T::one() / (alpha * pi);
    if e >= T::zero() {
        scale * pieces(T::zero(), u_max, &|u: T| u.powf(e) * g(u))
    } else {
        // u = v^{1/(e+1)} absorbs the endpoint singularity u^e
        let p = (e + T::one()).recip();
        let v_of = |u: T| u.powf(e + T::one());
        let split_v = v_of(x);
        let hv = |v: T| g(v.powf(p));
        let v_max = v_of(u_max);
        let mut s = T::zero();
        let split = split_v.min(v_max);
        s += integrate(hv, T::zero(), split, abs_tol, rel_tol);
        if v_max > split {
            s += integrate(hv, split, v_max, abs_tol, rel_tol);
        }
        scale * p * s
    }
}

fn exp_family<T: Scalar>(beta: T, x: T) -> Result<T> {
    // E_{1,m}(x) = (e^x - Σ_{k<m-1} x^k/k!) / x^{m-1}
    if beta == T::one() {
        return Ok(x.exp());
    }
    if beta == T::two() {
        return Ok(if x == T::zero() { T::one() } else { x.exp_m1() / x });
    }
    let (s, cond) = series(T::one(), beta, x);
    if cond <= T::of(SERIES_CONDITION) {
        return Ok(s);
    }
    if beta == beta.floor() && beta > T::two() {
        let m = beta.to_usize().unwrap_or(0);
        let mut partial = KahanSum::new();
        let mut term = T::one();
        for k in 0..m - 1 {
            partial.add(term);
            term = term * x / T::of_usize(k + 1);
        }
        return Ok((x.exp() - partial.value()) / x.powi(m as i32 - 1));
    }
    Err(Error::Unsupported(format!("E_{{1,{beta}}}({x}) outside the series range")))
}

/// `E_{α,β}(x)` for α ∈ (0,1], β > 0, x ≤ 0.
pub fn ml<T: Scalar>(alpha: T, beta: T, x: T) -> Result<T> {
    if !(alpha > T::zero()) || alpha > T::one() {
        return domain(format!("Mittag-Leffler order must lie in (0, 1], got {alpha}"));
    }
    if !(beta > T::zero()) {
        return domain(format!("Mittag-Leffler beta must be positive, got {beta}"));
    }
    if x > T::zero() {
        return domain(format!("Mittag-Leffler argument must be non-positive, got {x}"));
    }
    if !x.is_finite() {
        return domain("Mittag-Leffler argument must be finite");
    }
    if x == T::zero() {
        return Ok(recip_gamma(beta));
    }
    if alpha == T::one() {
        return exp_family(beta, x);
    }
    let (s, cond) = series(alpha, beta, x);
    if cond <= T::of(SERIES_CONDITION) {
        return Ok(s);
    }
    Ok(large_argument(alpha, beta, -x))
}

fn large_argument<T: Scalar>(alpha: T, beta: T, y: T) -> T {
    if beta < T::one() + alpha {
        integral(alpha, beta, y)
    } else {
        // E_{α,β}(z) = (E_{α,β-α}(z) - 1/Γ(β-α)) / z
        (large_argument(alpha, beta - alpha, y) - recip_gamma(beta - alpha)) / (-y)
    }
}

/// `1 - E_{α,1}(-x)` without cancellation for small x.
pub fn one_minus_ml1<T: Scalar>(alpha: T, x: T) -> Result<T> {
    if x <= T::one() {
        Ok(x * ml(alpha, T::one() + alpha, -x)?)
    } else {
        Ok(T::one() - ml(alpha, T::one(), -x)?)
    }
}

/// `1 - E_{α,2}(-x)` without cancellation for small x.
fn one_minus_ml2<T: Scalar>(alpha: T, x: T) -> Result<T> {
    if x <= T::one() {
        Ok(x * ml(alpha, T::two() + alpha, -x)?)
    } else {
        Ok(T::one() - ml(alpha, T::two(), -x)?)
    }
}

/// The relaxation kernel `τ^{-γ} t^{γ-1} E_{γ,γ}(-(t/τ)^γ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxationKernel<T> {
    order: T,
    tau: T,
}

impl<T: Scalar> RelaxationKernel<T> {
    pub fn new(order: T, tau: T) -> Result<Self> {
        if !(order > T::zero()) || order > T::one() {
            return domain(format!("kernel order must lie in (0, 1], got {order}"));
        }
        if !(tau > T::zero()) {
            return domain(format!("relaxation time must be positive, got {tau}"));
        }
        Ok(Self { order, tau })
    }

    pub fn order(&self) -> T {
        self.order
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    fn arg(&self, t: T) -> T {
        (t / self.tau).powf(self.order)
    }

    pub fn value(&self, t: T) -> Result<T> {
        if !(t > T::zero()) {
            return domain(format!("relaxation kernel is singular at t = {t}"));
        }
        if self.order == T::one() {
            return Ok((-t / self.tau).exp() / self.tau);
        }
        let g = self.order;
        Ok(self.tau.powf(-g) * t.powf(g - T::one()) * ml(g, g, -self.arg(t))?)
    }

    /// Derivative of the kernel for t > 0.
    pub fn derivative(&self, t: T) -> Result<T> {
        if !(t > T::zero()) {
            return domain(format!("kernel derivative is singular at t = {t}"));
        }
        if self.order == T::one() {
            return Ok(-(-t / self.tau).exp() / (self.tau * self.tau));
        }
        // d/dt [t^{γ-1} E_{γ,γ}(-a t^γ)] = t^{γ-2} E_{γ,γ-1}(-a t^γ)
        let g = self.order;
        let x = self.arg(t);
        let e = ml_shifted(g, g - T::one(), -x)?;
        Ok(self.tau.powf(-g) * t.powf(g - T::two()) * e)
    }

    /// `∫_0^T 𝔨(s) ds = 1 - E_{γ,1}(-(T/τ)^γ)`.
    pub fn mass(&self, horizon: T) -> Result<T> {
        if horizon < T::zero() {
            return domain(format!("mass horizon must be non-negative, got {horizon}"));
        }
        if horizon == T::zero() {
            return Ok(T::zero());
        }
        one_minus_ml1(self.order, self.arg(horizon))
    }

    /// Relaxation function `E_{γ,1}(-(t/τ)^γ)`.
    pub fn relaxation(&self, t: T) -> Result<T> {
        if t <= T::zero() {
            return Ok(T::one());
        }
        ml(self.order, T::one(), -self.arg(t))
    }

    /// `∫_0^u mass(s) ds = u (1 - E_{γ,2}(-(u/τ)^γ))`.
    pub fn mass_integral(&self, u: T) -> Result<T> {
        if u <= T::zero() {
            return Ok(T::zero());
        }
        Ok(u * one_minus_ml2(self.order, self.arg(u))?)
    }

    /// Product-integration weights for `∫_0^{t_n} 𝔨(t_n - s) u(s) ds`, `u` piecewise linear.
    pub fn convolution_weights(&self, step: T, steps: usize) -> Result<KernelWeights<T>> {
        let mut k1 = Vec::with_capacity(steps + 1);
        let mut k2 = Vec::with_capacity(steps + 1);
        for m in 0..=steps {
            let r = T::of_usize(m) * step;
            k1.push(self.mass(r)?);
            k2.push(self.mass_integral(r)?);
        }
        let mut lower = vec![T::zero(); steps];
        let mut upper = vec![T::zero(); steps];
        for m in 0..steps {
            let dk2 = (k2[m + 1] - k2[m]) / step;
            lower[m] = k1[m + 1] - dk2;
            upper[m] = dk2 - k1[m];
        }
        Ok(KernelWeights { lower, upper })
    }

    /// Cell-averaged convolution Gram matrix `∫_{I_i}∫_{I_j} 𝔨(|t-s|) ds dt` (symmetric Toeplitz).
    pub fn gram_matrix(&self, step: T, cells: usize) -> Result<Vec<Vec<T>>> {
        let k2: Vec<T> = (0..=cells)
            .map(|m| self.mass_integral(T::of_usize(m) * step))
            .collect::<Result<_>>()?;
        let entry = |d: usize| -> T {
            if d == 0 {
                T::two() * k2[1]
            } else if d < cells {
                k2[d + 1] - T::two() * k2[d] + k2[d - 1]
            } else {
                // one cell beyond the table
                let next = self.mass_integral(T::of_usize(d + 1) * step).unwrap_or(k2[d]);
                next - T::two() * k2[d] + k2[d - 1]
            }
        };
        Ok((0..cells)
            .map(|i| (0..cells).map(|j| entry(i.abs_diff(j))).collect())
            .collect())
    }
}

/// `E_{α,β}(x)` allowing β ≤ 0 through `E_{α,β}(x) = 1/Γ(β) + x E_{α,α+β}(x)`.
fn ml_shifted<T: Scalar>(alpha: T, beta: T, x: T) -> Result<T> {
    if beta > T::zero() {
        ml(alpha, beta, x)
    } else {
        Ok(recip_gamma(beta) + x * ml_shifted(alpha, alpha + beta, x)?)
    }
}

/// Weights of the relaxation-kernel convolution on a uniform grid.
///
/// Cell `m` spans `r ∈ [m h, (m+1) h]` of the lag; `lower[m]` multiplies the
/// earlier node of the cell and `upper[m]` the later one.
#[derive(Clone, Debug)]
pub struct KernelWeights<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> KernelWeights<T> {
    pub fn diagonal(&self) -> T {
        self.upper[0]
    }

    pub fn weight(&self, n: usize, j: usize) -> T {
        if n == 0 {
            return T::zero();
        }
        let d = n - j;
        let mut w = T::zero();
        if d >= 1 {
            w += self.lower[d - 1];
        }
        if j >= 1 {
            w += self.upper[d];
        }
        w
    }

    /// `Σ_{j<n} W_{n,j} u_j` for scalar samples.
    pub fn history(&self, n: usize, u: &[T]) -> T {
        (0..n).map(|j| self.weight(n, j) * u[j]).sum()
    }

    pub fn apply(&self, u: &[T]) -> Vec<T> {
        (0..u.len())
            .map(|n| if n == 0 { T::zero() } else { self.history(n, u) + self.diagonal() * u[n] })
            .collect()
    }
}

/// Composite quadrature of the kernel mass, for self-tests of the closed form.
pub fn kernel_mass_quadrature<T: Scalar>(k: &RelaxationKernel<T>, horizon: T) -> T {
    let g = k.order();
    // s = v^{1/γ} removes the s^{γ-1} endpoint singularity
    let f = |v: T| {
        let s = v.powf(g.recip());
        k.value(s).unwrap_or(T::zero()) * s.powf(T::one() - g) / g
    };
    integrate(f, T::zero(), horizon.powf(g), T::of(1e-15), T::of(1e-13))
}
