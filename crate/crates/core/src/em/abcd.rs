use super::complex::Complex;
use super::scalar::Scalar;
use super::EmError;

/// 2x2 complex transmission (ABCD) matrix of a two-port element or cascade.
/// `b` carries units of impedance, `c` of admittance; `a`, `d` dimensionless.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Abcd<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: Complex<T>,
}

/// Plain `f64` ABCD matrix.
pub type AbcdMatrix = Abcd<f64>;

impl<T: Scalar> Abcd<T> {
    #[inline]
    pub fn identity() -> Self {
        Self {
            a: Complex::one(),
            b: Complex::zero(),
            c: Complex::zero(),
            d: Complex::one(),
        }
    }

    /// Shunt admittance element: [[1, 0], [y, 1]].
    pub fn shunt(y: Complex<T>) -> Result<Self, EmError> {
        if !y.value().is_finite() {
            return Err(EmError::NonFinite("shunt admittance".into()));
        }
        Ok(Self {
            a: Complex::one(),
            b: Complex::zero(),
            c: y,
            d: Complex::one(),
        })
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    #[inline]
    pub fn det(self) -> Complex<T> {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product in sequence order (port-1 element first).
    pub fn cascade(elements: &[Self]) -> Result<Self, EmError> {
        let (first, rest) = elements.split_first().ok_or(EmError::EmptyCascade)?;
        Ok(rest.iter().fold(*first, |acc, m| acc.mul(*m)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::ComplexScalar;

    fn shunt(im: f64) -> AbcdMatrix {
        Abcd::shunt(ComplexScalar::imag(im)).unwrap()
    }

    #[test]
    fn shunt_definition() {
        let m = shunt(0.1);
        assert_eq!(m.a, ComplexScalar::one());
        assert_eq!(m.b, ComplexScalar::zero());
        assert_eq!(m.c, ComplexScalar::imag(0.1));
        assert_eq!(m.d, ComplexScalar::one());
        // zero admittance is a transparent screen
        assert_eq!(
            Abcd::shunt(ComplexScalar::zero()).unwrap(),
            Abcd::identity()
        );
    }

    #[test]
    fn shunt_rejects_non_finite() {
        assert!(Abcd::<f64>::shunt(ComplexScalar::imag(f64::INFINITY)).is_err());
        assert!(Abcd::<f64>::shunt(ComplexScalar::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn shunt_unimodular() {
        for &y in &[0.0, 0.1, -3.7, 1e6] {
            let det = shunt(y).det();
            assert!((det - ComplexScalar::one()).abs() < 1e-12);
        }
    }

    #[test]
    fn cascade_identity_neutral() {
        let m = shunt(0.25);
        let r = Abcd::cascade(&[Abcd::identity(), m]).unwrap();
        assert_eq!(r, m);
    }

    #[test]
    fn cascade_associative() {
        let m1 = shunt(0.1);
        let m2 = shunt(-0.4);
        let m3 = shunt(2.0);
        let left = m1.mul(m2).mul(m3);
        let right = m1.mul(m2.mul(m3));
        assert!((left.a - right.a).abs() < 1e-14);
        assert!((left.b - right.b).abs() < 1e-14);
        assert!((left.c - right.c).abs() < 1e-14);
        assert!((left.d - right.d).abs() < 1e-14);
        let casc = Abcd::cascade(&[m1, m2, m3]).unwrap();
        assert_eq!(casc, left);
    }

    #[test]
    fn cascade_rejects_empty() {
        assert!(Abcd::<f64>::cascade(&[]).is_err());
    }

    #[test]
    fn cascade_determinant_multiplicative() {
        let casc = Abcd::cascade(&[shunt(0.3), shunt(-1.2), shunt(0.05)]).unwrap();
        assert!((casc.det() - ComplexScalar::one()).abs() < 1e-12);
    }
}
