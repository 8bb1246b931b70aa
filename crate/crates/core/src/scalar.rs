//! Scalar abstraction shared by every module.
//!
//! All numerics are written against [`Real`], which is implemented for `f32`
//! and `f64`. Complex values are `Complex<T>` over the same real type.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

pub use nalgebra::Complex;

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Default + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("index representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number with a real part of type `T`.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn re<T: Real>(v: T) -> C<T> {
    Complex::new(v, T::zero())
}

#[inline]
pub(crate) fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// `i^q` as an exact complex number.
pub(crate) fn i_pow<T: Real>(q: usize) -> C<T> {
    match q % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

pub(crate) fn factorial<T: Real>(k: usize) -> T {
    (1..=k).fold(T::one(), |acc, j| acc * T::from_usize_lossy(j))
}

pub(crate) fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for j in 0..k {
        acc = acc * T::from_usize_lossy(n - j) / T::from_usize_lossy(j + 1);
    }
    acc
}

/// Physicists' Hermite polynomial `H_k(t)` by the three-term recurrence.
///
/// `d^k/dt^k e^{-t^2} = (-1)^k H_k(t) e^{-t^2}`.
pub fn hermite<T: Real>(k: usize, t: T) -> T {
    let two = T::lit(2.0);
    let mut h0 = T::one();
    if k == 0 {
        return h0;
    }
    let mut h1 = two * t;
    for j in 1..k {
        let h2 = two * t * h1 - two * T::from_usize_lossy(j) * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

#[inline]
pub(crate) fn cabs<T: Real>(z: C<T>) -> T {
    z.norm_sqr().sqrt()
}

#[inline]
pub(crate) fn cexp<T: Real>(z: C<T>) -> C<T> {
    let r = z.re.exp();
    Complex::new(r * z.im.cos(), r * z.im.sin())
}

/// Maximum modulus of a complex slice (0 for an empty slice).
pub(crate) fn max_modulus<'a, T: Real>(values: impl IntoIterator<Item = &'a C<T>>) -> T {
    values
        .into_iter()
        .fold(T::zero(), |acc, v| acc.max(v.norm_sqr().sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_matches_closed_forms() {
        let t = 0.7_f64;
        assert_eq!(hermite(0, t), 1.0);
        assert!((hermite(1, t) - 2.0 * t).abs() < 1e-15);
        assert!((hermite(2, t) - (4.0 * t * t - 2.0)).abs() < 1e-14);
        assert!((hermite(3, t) - (8.0 * t.powi(3) - 12.0 * t)).abs() < 1e-14);
        assert!((hermite(4, t) - (16.0 * t.powi(4) - 48.0 * t * t + 12.0)).abs() < 1e-13);
    }

    #[test]
    fn binomials_and_powers_of_i() {
        assert_eq!(binomial::<f64>(5, 2), 10.0);
        assert_eq!(binomial::<f64>(4, 0), 1.0);
        assert_eq!(binomial::<f64>(3, 4), 0.0);
        assert_eq!(i_pow::<f64>(3), Complex::new(0.0, -1.0));
        assert_eq!(factorial::<f64>(5), 120.0);
    }
}
