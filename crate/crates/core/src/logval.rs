//! Log-domain arithmetic for nonnegative quantities.
//!
//! Likelihoods are products over rounds and underflow in linear domain, so
//! every mass in this crate is a `LogValue`: the natural log of a nonnegative
//! real, with `NEG_INFINITY` as the explicit representation of zero. `+` is
//! addition of the underlying quantities (log-sum-exp) and `*` is their
//! product (addition of logs). Zero absorbs `*` and is the identity of `+`.

use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign};

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogValue(f64);

impl LogValue {
    /// log of 0.
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    /// log of 1.
    pub const ONE: LogValue = LogValue(0.0);

    /// Wraps a log-domain number. NaN is rejected; use `ZERO` for -inf.
    pub fn from_log(v: f64) -> LogValue {
        assert!(!v.is_nan(), "LogValue cannot hold NaN");
        LogValue(v)
    }

    /// Takes the log of a nonnegative linear-domain number.
    pub fn from_linear(x: f64) -> LogValue {
        assert!(x >= 0.0, "LogValue::from_linear needs x >= 0, got {x}");
        LogValue(x.ln())
    }

    pub fn log(self) -> f64 {
        self.0
    }

    pub fn linear(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Max-shifted log-sum-exp over a slice; an all-zero sum stays zero.
    pub fn sum(values: &[LogValue]) -> LogValue {
        let max = values
            .iter()
            .fold(f64::NEG_INFINITY, |acc, v| acc.max(v.0));
        if max == f64::NEG_INFINITY {
            return LogValue::ZERO;
        }
        let shifted: f64 = values.iter().map(|v| (v.0 - max).exp()).sum();
        LogValue(max + shifted.ln())
    }
}

/// Kahan-compensated linear-domain accumulator, for the code paths that
/// deliberately avoid log-domain arithmetic.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    compensation: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl Add for LogValue {
    type Output = LogValue;

    /// Log-sum-exp: the log of the sum of the underlying quantities.
    fn add(self, rhs: LogValue) -> LogValue {
        if self.0 == f64::NEG_INFINITY {
            return rhs;
        }
        if rhs.0 == f64::NEG_INFINITY {
            return self;
        }
        if self.0 >= rhs.0 {
            LogValue(self.0 + (rhs.0 - self.0).exp().ln_1p())
        } else {
            LogValue(rhs.0 + (self.0 - rhs.0).exp().ln_1p())
        }
    }
}

impl AddAssign for LogValue {
    fn add_assign(&mut self, rhs: LogValue) {
        *self = *self + rhs;
    }
}

impl Mul for LogValue {
    type Output = LogValue;

    /// Product of the underlying quantities: addition of logs. Zero absorbs,
    /// even against +inf logs.
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.0 == f64::NEG_INFINITY || rhs.0 == f64::NEG_INFINITY {
            return LogValue::ZERO;
        }
        LogValue(self.0 + rhs.0)
    }
}

impl MulAssign for LogValue {
    fn mul_assign(&mut self, rhs: LogValue) {
        *self = *self * rhs;
    }
}

impl Sum for LogValue {
    fn sum<I: Iterator<Item = LogValue>>(iter: I) -> LogValue {
        iter.fold(LogValue::ZERO, |acc, v| acc + v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_additive_identity_and_multiplicative_absorber() {
        let v = LogValue::from_linear(0.3);
        assert_eq!((LogValue::ZERO + v).log(), v.log());
        assert!((LogValue::ZERO * v).is_zero());
        assert!((v * LogValue::ZERO).is_zero());
        assert!((LogValue::ZERO + LogValue::ZERO).is_zero());
    }

    #[test]
    fn add_matches_linear_sum() {
        let a = LogValue::from_linear(0.25);
        let b = LogValue::from_linear(0.5);
        assert!(((a + b).linear() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn mul_matches_linear_product() {
        let a = LogValue::from_linear(0.25);
        let b = LogValue::from_linear(0.75);
        assert!(((a * b).linear() - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn sum_handles_deep_underflow() {
        // 2^1000 copies of 2^-1000 sum to 1 in log domain.
        let tiny = LogValue::from_log(-1000.0 * std::f64::consts::LN_2);
        let total = LogValue::from_log(tiny.log() + 1000.0 * std::f64::consts::LN_2);
        assert!((total.log() - 0.0).abs() < 1e-12);
        // and the slice form shifts by the max before exponentiating
        let vals = vec![LogValue::from_log(-800.0), LogValue::from_log(-800.5)];
        let s = LogValue::sum(&vals);
        assert!((s.log() - (-800.0 + (1.0f64 + (-0.5f64).exp()).ln())).abs() < 1e-12);
    }

    #[test]
    fn sum_of_all_zero_is_zero() {
        assert!(LogValue::sum(&[LogValue::ZERO, LogValue::ZERO]).is_zero());
    }
}
