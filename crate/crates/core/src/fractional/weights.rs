//! Product-integration weights on uniform grids.
//!
//! Both the Abel integral and the Volterra marching schemes integrate a power
//! kernel exactly against the piecewise-linear interpolant of the samples.
//! The second differences that define the weights cancel badly for large
//! offsets, so those are summed from their binomial series instead.

use crate::scalar::Scalar;
use crate::special::gamma;

const SERIES_FROM: usize = 16;

/// Σ_{k ≥ k0} C(r, k) x^k for |x| < 1, with step 1 or 2 in k.
fn binomial_tail<T: Scalar>(r: T, x: T, k0: usize, stride: usize) -> T {
    // coefficient C(r, k) x^k built incrementally
    let mut coeff = T::one();
    let mut k = 0;
    let mut sum = T::zero();
    loop {
        if k >= k0 && (k - k0) % stride == 0 {
            sum += coeff;
            if coeff.abs() <= T::epsilon() * T::of(1e-3) * sum.abs() && k > k0 + 2 * stride {
                break;
            }
        }
        coeff = coeff * (r - T::of_usize(k)) / T::of_usize(k + 1) * x;
        k += 1;
        if k > 200 {
            break;
        }
    }
    sum
}

/// `(m+1)^r - 2 m^r + (m-1)^r`, m ≥ 1.
pub(crate) fn second_difference<T: Scalar>(r: T, m: usize) -> T {
    let mf = T::of_usize(m);
    if m == 0 {
        // 0^s is the lower limit 0 even for s = 0
        T::one()
    } else if m < SERIES_FROM {
        (mf + T::one()).powf(r) - T::two() * mf.powf(r) + (mf - T::one()).powf(r)
    } else {
        T::two() * mf.powf(r) * binomial_tail(r, mf.recip(), 2, 2)
    }
}

/// `(m+1)^s - m^s`, m ≥ 0.
pub(crate) fn forward_difference<T: Scalar>(s: T, m: usize) -> T {
    let mf = T::of_usize(m);
    if m == 0 {
        // 0^s is the lower limit 0 even for s = 0
        T::one()
    } else if m < SERIES_FROM {
        (mf + T::one()).powf(s) - mf.powf(s)
    } else {
        mf.powf(s) * binomial_tail(s, mf.recip(), 1, 1)
    }
}

/// `(n-1)^r - (n-1-q) n^q` with r = q + 1, n ≥ 1.
fn start_weight<T: Scalar>(q: T, n: usize) -> T {
    let r = q + T::one();
    let nf = T::of_usize(n);
    if n < SERIES_FROM {
        (nf - T::one()).powf(r) - (nf - T::one() - q) * nf.powf(q)
    } else {
        nf.powf(r) * binomial_tail(r, -nf.recip(), 2, 1)
    }
}

/// Weights for `∫_0^{t_n} (t_n - s)^p / Γ(p+1) u(s) ds ≈ Σ_j W_{n,j} u_j`
/// with `u` interpolated piecewise linearly, exponent `p > -1`.
///
/// `W_{n,n} = lead`, `W_{n,j} = lead * interior[n-j]` for `0 < j < n` and
/// `W_{n,0} = lead * start[n]`.
#[derive(Clone, Debug)]
pub struct ProductWeights<T> {
    exponent: T,
    lead: T,
    interior: Vec<T>,
    start: Vec<T>,
}

impl<T: Scalar> ProductWeights<T> {
    pub fn new(exponent: T, step: T, steps: usize) -> Self {
        assert!(exponent > -T::one(), "kernel exponent must exceed -1");
        let q = exponent + T::one();
        let r = q + T::one();
        let lead = step.powf(q) / gamma(q + T::two());
        let mut interior = vec![T::zero(); steps + 1];
        let mut start = vec![T::zero(); steps + 1];
        for m in 1..=steps {
            interior[m] = second_difference(r, m);
            start[m] = start_weight(q, m);
        }
        Self {
            exponent,
            lead,
            interior,
            start,
        }
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    /// Weight multiplying `u_n` in the value at node `n`.
    pub fn diagonal(&self) -> T {
        self.lead
    }

    pub fn weight(&self, n: usize, j: usize) -> T {
        debug_assert!(j <= n);
        if n == 0 {
            T::zero()
        } else if j == n {
            self.lead
        } else if j == 0 {
            self.lead * self.start[n]
        } else {
            self.lead * self.interior[n - j]
        }
    }

    /// History part `Σ_{j<n} W_{n,j} u_j` for scalar samples.
    pub fn history(&self, n: usize, u: &[T]) -> T {
        if n == 0 {
            return T::zero();
        }
        let mut acc = self.start[n] * u[0];
        for j in 1..n {
            acc += self.interior[n - j] * u[j];
        }
        acc * self.lead
    }

    /// History part for vector samples stored node-major (`u[j*dim + i]`).
    pub fn history_vec(&self, n: usize, u: &[T], dim: usize, out: &mut [T]) {
        out.iter_mut().for_each(|o| *o = T::zero());
        if n == 0 {
            return;
        }
        let s = self.start[n];
        for i in 0..dim {
            out[i] = s * u[i];
        }
        for j in 1..n {
            let w = self.interior[n - j];
            let row = &u[j * dim..(j + 1) * dim];
            for (o, &x) in out.iter_mut().zip(row) {
                *o += w * x;
            }
        }
        for o in out.iter_mut() {
            *o *= self.lead;
        }
    }

    /// Full convolution of scalar samples at every node.
    pub fn apply(&self, u: &[T]) -> Vec<T> {
        (0..u.len())
            .map(|n| if n == 0 { T::zero() } else { self.history(n, u) + self.lead * u[n] })
            .collect()
    }
}

/// L1 coefficients `b_m = (m+1)^{1-γ} - m^{1-γ}` for the Caputo derivative of order γ ∈ (0,1).
pub(crate) fn l1_coefficients<T: Scalar>(order: T, steps: usize) -> Vec<T> {
    let s = T::one() - order;
    (0..steps.max(1)).map(|m| forward_difference(s, m)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_branch_continuous_with_direct_branch() {
        for &r in &[1.3_f64, 1.5, 1.999, 2.7] {
            let m = SERIES_FROM;
            let mf = m as f64;
            let direct = (mf + 1.0).powf(r) - 2.0 * mf.powf(r) + (mf - 1.0).powf(r);
            assert!((second_difference(r, m) - direct).abs() < 1e-11 * direct.abs().max(1e-3));
            let s = r - 1.0;
            let direct = (mf + 1.0).powf(s) - mf.powf(s);
            assert!((forward_difference(s, m) - direct).abs() < 1e-12 * direct.abs().max(1e-3));
            let q = r - 1.0;
            let direct = (mf - 1.0).powf(r) - (mf - 1.0 - q) * mf.powf(q);
            assert!((start_weight(q, m) - direct).abs() < 1e-10 * direct.abs().max(1e-3));
        }
    }

    #[test]
    fn weights_integrate_linear_functions_exactly() {
        // ∫_0^t (t-s)^p/Γ(p+1) s ds = t^{p+2}/Γ(p+3)
        for &p in &[-0.5_f64, -0.2, 0.0, 0.4, 1.0, 2.0] {
            let steps = 40;
            let h = 0.025;
            let w = ProductWeights::new(p, h, steps);
            let u: Vec<f64> = (0..=steps).map(|n| 1.0 + 2.0 * n as f64 * h).collect();
            let conv = w.apply(&u);
            for n in [1, 7, 40] {
                let t = n as f64 * h;
                let exact = t.powf(p + 1.0) / gamma(p + 2.0) + 2.0 * t.powf(p + 2.0) / gamma(p + 3.0);
                assert!((conv[n] - exact).abs() < 1e-12, "p={p} n={n}: {} vs {exact}", conv[n]);
            }
        }
    }
}
