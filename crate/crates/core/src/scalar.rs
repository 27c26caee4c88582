//! Scalar abstraction shared by the exact and floating-point code paths.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Coefficient field for algebra elements.
///
/// Implemented for `f32`, `f64` and [`Rational`]. Exact types answer
/// `is_exact() == true` and treat only literal zero as negligible.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Nearest `f64`; exact for dyadic rationals.
    fn to_f64(&self) -> f64;
    fn is_exact() -> bool;
    /// Zero test used for pivoting and support pruning.
    fn negligible(&self) -> bool;
    fn to_rational(&self) -> Option<Rational>;

    /// Sum of a sequence of terms. Floating-point types use compensated
    /// (Neumaier) summation.
    fn accumulate<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        terms.into_iter().fold(Self::zero(), |acc, t| acc + t)
    }
}

fn neumaier<F: Float, I: IntoIterator<Item = F>>(terms: I) -> F {
    let mut sum = F::zero();
    let mut comp = F::zero();
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp = comp + ((sum - s) + t);
        } else {
            comp = comp + ((t - s) + sum);
        }
        sum = s;
    }
    sum + comp
}

macro_rules! float_scalar {
    ($t:ty, $eps:expr) => {
        impl Scalar for $t {
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            fn from_rational(r: &Rational) -> Self {
                <$t as FromPrimitive>::from_f64(ToPrimitive::to_f64(r).unwrap_or(f64::NAN)).unwrap_or(<$t>::NAN)
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn is_exact() -> bool {
                false
            }
            fn negligible(&self) -> bool {
                self.abs() <= $eps
            }
            fn to_rational(&self) -> Option<Rational> {
                Rational::from_float(*self)
            }
            fn accumulate<I: IntoIterator<Item = Self>>(terms: I) -> Self {
                neumaier(terms)
            }
        }
    };
}

float_scalar!(f64, 1e-12);
float_scalar!(f32, 1e-5);

impl Scalar for Rational {
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_exact() -> bool {
        true
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

/// Exact rational from a finite float (every finite `f64` is a dyadic rational).
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Converts between scalar types through the rational embedding.
/// Non-finite floats map to NaN in float targets and to zero in exact ones.
pub fn convert<A: Scalar, B: Scalar>(x: &A) -> B {
    match x.to_rational() {
        Some(r) => B::from_rational(&r),
        None if B::is_exact() => B::zero(),
        None => B::from_rational(&Rational::zero()) / B::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let terms = vec![1.0e16, 1.0, -1.0e16, 1.0];
        let naive: f64 = terms.iter().sum();
        assert_eq!(f64::accumulate(terms), 2.0);
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn float_to_rational_is_exact() {
        let r = rational_from_f64(0.1).unwrap();
        assert_eq!(Scalar::to_f64(&r), 0.1);
        assert_eq!(convert::<f64, Rational>(&0.375), rational(3, 8));
        assert_eq!(convert::<Rational, f64>(&rational(3, 8)), 0.375);
    }
}
