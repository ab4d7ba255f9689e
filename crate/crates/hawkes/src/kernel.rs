use mqh_core::Scalar;
use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};

pub const DEFAULT_TRUNCATION_HORIZON: f64 = 1000.0;

/// φ(t) = a (1 + c t)^(−b) on [0, horizon], zero beyond.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PowerLawKernel<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub horizon: T,
}

impl<T: Scalar> PowerLawKernel<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        PowerLawKernel { a, b, c, horizon: T::lit(DEFAULT_TRUNCATION_HORIZON) }
    }

    pub fn zero() -> Self {
        PowerLawKernel { a: T::zero(), b: T::lit(2.0), c: T::one(), horizon: T::lit(DEFAULT_TRUNCATION_HORIZON) }
    }

    pub fn with_horizon(mut self, horizon: T) -> Self {
        self.horizon = horizon;
        self
    }

    /// Kernel with the given untruncated L1 norm and shape.
    pub fn from_norm(norm: T, b: T, c: T) -> Self {
        Self::new(norm * c * (b - T::one()), b, c)
    }

    pub fn is_zero(&self) -> bool {
        self.a == T::zero()
    }

    pub fn value(&self, t: T) -> T {
        if t < T::zero() || t > self.horizon {
            T::zero()
        } else {
            self.a * (T::one() + self.c * t).powf(-self.b)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.a.is_finite()
            && self.b.is_finite()
            && self.c.is_finite()
            && self.c > T::zero()
            && self.b > T::zero()
            && self.horizon > T::zero();
        if ok {
            Ok(())
        } else {
            Err(HawkesError::InvalidSpec(format!(
                "kernel (a={}, b={}, c={}, horizon={}) needs finite a, b > 0, c > 0, horizon > 0",
                self.a, self.b, self.c, self.horizon
            )))
        }
    }

    /// |a| / (c (b − 1)), the norm without truncation.
    pub fn untruncated_norm(&self) -> Option<T> {
        if self.is_zero() {
            return Some(T::zero());
        }
        if self.b <= T::one() {
            return None;
        }
        Some(self.a.abs() / (self.c * (self.b - T::one())))
    }

    /// Fraction of the untruncated mass lost to truncation.
    pub fn truncated_mass_fraction(&self) -> T {
        if self.horizon.is_infinite() || self.b <= T::one() {
            return T::zero();
        }
        (T::one() + self.c * self.horizon).powf(T::one() - self.b)
    }

    /// |∫₀^H φ|; `None` when the untruncated integral diverges.
    pub fn norm(&self) -> Option<T> {
        self.untruncated_norm().map(|n| n * (T::one() - self.truncated_mass_fraction()))
    }

    /// ∫₀^x φ(u) du for x ≥ 0, honouring truncation. Used for compensators.
    pub fn integral(&self, x: T) -> T {
        if self.is_zero() || x <= T::zero() {
            return T::zero();
        }
        let x = x.min(self.horizon);
        let one = T::one();
        if (self.b - one).abs() < T::epsilon() {
            return self.a / self.c * (one + self.c * x).ln();
        }
        self.a / (self.c * (self.b - one)) * (one - (one + self.c * x).powf(one - self.b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        let k = PowerLawKernel::<f64>::new(1.0, 3.0, 1.0).with_horizon(f64::INFINITY);
        assert_eq!(k.norm(), Some(0.5));
        assert_eq!(PowerLawKernel::<f64>::zero().norm(), Some(0.0));
        assert_eq!(PowerLawKernel::<f64>::new(1.0, 1.0, 1.0).norm(), None);
    }

    #[test]
    fn truncation_reduces_norm() {
        let k = PowerLawKernel::<f64>::new(1.0, 1.5, 1.0).with_horizon(1000.0);
        let frac = k.truncated_mass_fraction();
        assert!((frac - 1001f64.powf(-0.5)).abs() < 1e-15);
        assert!((k.norm().unwrap() - 2.0 * (1.0 - frac)).abs() < 1e-12);
        assert!((k.integral(1e9) - k.norm().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn value_is_zero_outside_support() {
        let k = PowerLawKernel::<f64>::new(2.0, 2.0, 1.0).with_horizon(10.0);
        assert_eq!(k.value(-1.0), 0.0);
        assert_eq!(k.value(10.5), 0.0);
        assert_eq!(k.value(0.0), 2.0);
        assert!((k.value(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn generic_over_f32() {
        let k = PowerLawKernel::<f32>::from_norm(0.5, 3.0, 2.0).with_horizon(f32::INFINITY);
        assert!((k.norm().unwrap() - 0.5).abs() < 1e-6);
    }
}
