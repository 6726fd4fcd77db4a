use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::Scalar;

/// Complex number over any [`Scalar`]. The base number type for all EM math.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Complex<T> {
    pub re: T,
    pub im: T,
}

/// Plain `f64` complex value.
pub type ComplexScalar = Complex<f64>;

impl<T: Scalar> Complex<T> {
    #[inline]
    pub fn new(re: T, im: T) -> Self {
        Self { re, im }
    }

    #[inline]
    pub fn from_re(re: T) -> Self {
        Self {
            re,
            im: T::constant(0.0),
        }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::from_re(T::constant(0.0))
    }

    #[inline]
    pub fn one() -> Self {
        Self::from_re(T::constant(1.0))
    }

    /// Purely imaginary value `j·im`.
    #[inline]
    pub fn imag(im: T) -> Self {
        Self {
            re: T::constant(0.0),
            im,
        }
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    /// |z|² = re² + im².
    #[inline]
    pub fn abs_sq(self) -> T {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn abs(self) -> T {
        self.abs_sq().sqrt()
    }

    #[inline]
    pub fn scale(self, k: T) -> Self {
        Self {
            re: self.re * k,
            im: self.im * k,
        }
    }

    /// Value part as a plain complex number.
    #[inline]
    pub fn value(self) -> ComplexScalar {
        ComplexScalar {
            re: self.re.value(),
            im: self.im.value(),
        }
    }
}

impl ComplexScalar {
    #[inline]
    pub fn arg(self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl<T: Scalar> Add for Complex<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl<T: Scalar> Sub for Complex<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl<T: Scalar> Mul for Complex<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl<T: Scalar> Div for Complex<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let d = rhs.abs_sq();
        Self {
            re: (self.re * rhs.re + self.im * rhs.im) / d,
            im: (self.im * rhs.re - self.re * rhs.im) / d,
        }
    }
}

impl<T: Scalar> Neg for Complex<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}
