use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::em::Scalar;

/// Forward-mode dual number with `N` simultaneous tangent directions.
///
/// Arithmetic follows the usual rules: (uv)' = u'v + uv',
/// (u/v)' = (u'v - uv')/v², sqrt propagates by 1/(2√u).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub dx: [f64; N],
}

impl<const N: usize> Dual<N> {
    #[inline]
    pub fn constant(v: f64) -> Self {
        Self { v, dx: [0.0; N] }
    }

    /// Active variable seeded along direction `k` with tangent `scale`.
    #[inline]
    pub fn seeded(v: f64, k: usize, scale: f64) -> Self {
        let mut dx = [0.0; N];
        dx[k] = scale;
        Self { v, dx }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut dx = self.dx;
        for (a, b) in dx.iter_mut().zip(&rhs.dx) {
            *a += b;
        }
        Self {
            v: self.v + rhs.v,
            dx,
        }
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut dx = self.dx;
        for (a, b) in dx.iter_mut().zip(&rhs.dx) {
            *a -= b;
        }
        Self {
            v: self.v - rhs.v,
            dx,
        }
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut dx = [0.0; N];
        for ((d, a), b) in dx.iter_mut().zip(&self.dx).zip(&rhs.dx) {
            *d = a * rhs.v + self.v * b;
        }
        Self {
            v: self.v * rhs.v,
            dx,
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        // true division keeps the value path bit-identical to plain f64
        let v = self.v / rhs.v;
        let inv = 1.0 / rhs.v;
        let mut dx = [0.0; N];
        for ((d, a), b) in dx.iter_mut().zip(&self.dx).zip(&rhs.dx) {
            *d = (a - v * b) * inv;
        }
        Self { v, dx }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        let mut dx = self.dx;
        for x in &mut dx {
            *x = -*x;
        }
        Self { v: -self.v, dx }
    }
}

impl<const N: usize> Scalar for Dual<N> {
    #[inline]
    fn constant(x: f64) -> Self {
        Dual::constant(x)
    }

    #[inline]
    fn value(self) -> f64 {
        self.v
    }

    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        // At an exact zero (MAE kink) the subgradient is defined as 0.
        if s == 0.0 {
            return Self::constant(0.0);
        }
        let half_inv = 0.5 / s;
        let mut dx = self.dx;
        for x in &mut dx {
            *x *= half_inv;
        }
        Self { v: s, dx }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(v: f64) -> Dual<1> {
        Dual::seeded(v, 0, 1.0)
    }

    #[test]
    fn product_rule() {
        let x = var(3.0);
        let y = x * x; // d/dx x² = 2x
        assert_eq!(y.v, 9.0);
        assert_eq!(y.dx[0], 6.0);
    }

    #[test]
    fn quotient_rule() {
        let x = var(2.0);
        let y = Dual::constant(1.0) / x; // d/dx 1/x = -1/x²
        assert!((y.v - 0.5).abs() < 1e-15);
        assert!((y.dx[0] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn sqrt_rule() {
        let x = var(4.0);
        let y = x.sqrt();
        assert_eq!(y.v, 2.0);
        assert!((y.dx[0] - 0.25).abs() < 1e-15);
        // kink convention
        let z = Dual::<1>::seeded(0.0, 0, 1.0).sqrt();
        assert_eq!(z.dx[0], 0.0);
    }

    #[test]
    fn multi_direction_seeding() {
        let x = Dual::<2>::seeded(1.5, 0, 1.0);
        let y = Dual::<2>::seeded(-0.5, 1, 1.0);
        let f = x * y + x; // df/dx = y + 1, df/dy = x
        assert!((f.dx[0] - 0.5).abs() < 1e-15);
        assert!((f.dx[1] - 1.5).abs() < 1e-15);
    }
}
