//! Gamma function family.

use crate::scalar::Scalar;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Scalar>(z: T) -> T {
    let mut x = T::of(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += T::of(c) / (z + T::of_usize(i));
    }
    x
}

/// Γ(x) for real x (poles return ±∞).
pub fn gamma<T: Scalar>(x: T) -> T {
    if x == x.floor() && x <= T::zero() {
        return T::infinity();
    }
    if x < T::half() {
        // reflection
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    // exact factorials keep integer arguments exact
    if x == x.floor() && x <= T::of(30.0) {
        let mut acc = T::one();
        let mut k = T::two();
        while k < x {
            acc *= k;
            k += T::one();
        }
        return acc;
    }
    if x > T::of(171.0) {
        return T::infinity();
    }
    let z = x - T::one();
    let t = z + T::of(LANCZOS_G) + T::half();
    let sqrt_two_pi = (T::two() * T::PI()).sqrt();
    // split the power to delay overflow for large arguments
    let p = t.powf((z + T::half()) * T::half());
    sqrt_two_pi * p * (p * (-t).exp()) * lanczos_sum(z)
}

/// ln|Γ(x)|.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    if x == x.floor() && x <= T::zero() {
        return T::infinity();
    }
    if x < T::half() {
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let t = z + T::of(LANCZOS_G) + T::half();
    T::half() * (T::two() * T::PI()).ln() + (z + T::half()) * t.ln() - t + lanczos_sum(z).ln()
}

/// 1/Γ(x), zero at the poles.
pub fn recip_gamma<T: Scalar>(x: T) -> T {
    if x == x.floor() && x <= T::zero() {
        return T::zero();
    }
    T::one() / gamma(x)
}
