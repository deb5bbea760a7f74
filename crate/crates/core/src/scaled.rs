//! Complex values with a separate binary exponent.
//!
//! Recurrence values such as `G_n` have degree growing linearly in `n`, and
//! the closed-form iterates carry products of doubly exponential size. A
//! [`ScaledValue`] stores `mantissa · 2^exponent` with `1 ≤ |mantissa| < 2`
//! (or a zero mantissa), which keeps every intermediate in range.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Clone, Copy, PartialEq)]
pub struct ScaledValue {
    mantissa: Complex64,
    exponent: i64,
}

/// Exact multiplication by `2^k`, done in steps so the factor never leaves range.
fn ldexp(z: Complex64, k: i64) -> Complex64 {
    let mut z = z;
    let mut k = k;
    while k != 0 {
        let step = k.clamp(-1000, 1000);
        z *= 2f64.powi(step as i32);
        k -= step;
    }
    z
}

impl ScaledValue {
    pub const ZERO: ScaledValue = ScaledValue {
        mantissa: Complex64::new(0.0, 0.0),
        exponent: 0,
    };
    pub const ONE: ScaledValue = ScaledValue {
        mantissa: Complex64::new(1.0, 0.0),
        exponent: 0,
    };

    /// Builds `mantissa · 2^exponent`, renormalizing the mantissa.
    ///
    /// Non-finite mantissas are kept as they are (exponent unchanged) so that
    /// an overflow upstream stays visible instead of turning into a number.
    pub fn from_parts(mantissa: Complex64, exponent: i64) -> Self {
        if mantissa.re == 0.0 && mantissa.im == 0.0 {
            return Self::ZERO;
        }
        if !mantissa.re.is_finite() || !mantissa.im.is_finite() {
            return Self { mantissa, exponent };
        }
        let big = mantissa.re.abs().max(mantissa.im.abs());
        // frexp on the larger component, then fix up against the modulus.
        let mut k = big.log2().floor() as i64;
        let mut m = ldexp(mantissa, -k);
        let norm = m.norm();
        if norm >= 2.0 {
            m = ldexp(m, -1);
            k += 1;
        } else if norm < 1.0 {
            m = ldexp(m, 1);
            k -= 1;
        }
        Self {
            mantissa: m,
            exponent: exponent + k,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::from_parts(z, 0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_complex(Complex64::new(x, 0.0))
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    /// Binary exponent: the value is `mantissa · 2^exponent`.
    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// Natural-log scale factor, so the value is `mantissa · e^log_scale`.
    pub fn log_scale(&self) -> f64 {
        self.exponent as f64 * std::f64::consts::LN_2
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.re.is_finite() && self.mantissa.im.is_finite()
    }

    /// `ln |value|`; negative infinity for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().ln() + self.log_scale()
        }
    }

    /// Principal argument of the value.
    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// Plain complex value; overflows to infinity or underflows to zero when out of range.
    pub fn to_complex(&self) -> Complex64 {
        ldexp(self.mantissa, self.exponent)
    }

    pub fn abs(&self) -> ScaledValue {
        Self::from_parts(Complex64::new(self.mantissa.norm(), 0.0), self.exponent)
    }

    /// `|self| / |other|` as a plain real, saturating at `0` and `∞`.
    pub fn abs_ratio(&self, other: &ScaledValue) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if other.is_zero() {
            return f64::INFINITY;
        }
        let m = self.mantissa.norm() / other.mantissa.norm();
        let e = (self.exponent - other.exponent).clamp(-2000, 2000);
        ldexp(Complex64::new(m, 0.0), e).re
    }

    /// `self / other` as a plain complex number.
    pub fn ratio(&self, other: &ScaledValue) -> Complex64 {
        (*self / *other).to_complex()
    }

    pub fn recip(&self) -> ScaledValue {
        Self::from_parts(self.mantissa.inv(), -self.exponent)
    }

    pub fn powu(&self, n: u64) -> ScaledValue {
        let mut acc = Self::ONE;
        let mut base = *self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    pub fn scale(&self, z: Complex64) -> ScaledValue {
        *self * Self::from_complex(z)
    }

    /// `|a − b| / max(|a|, |b|)`; zero when both are zero.
    pub fn rel_diff(a: &ScaledValue, b: &ScaledValue) -> f64 {
        if a.is_zero() && b.is_zero() {
            return 0.0;
        }
        let d = (*a - *b).abs();
        let m = if a.abs_ratio(b) >= 1.0 { a.abs() } else { b.abs() };
        d.abs_ratio(&m)
    }
}

impl Default for ScaledValue {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<Complex64> for ScaledValue {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl From<f64> for ScaledValue {
    fn from(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl Mul for ScaledValue {
    type Output = ScaledValue;
    fn mul(self, rhs: ScaledValue) -> ScaledValue {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::from_parts(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Div for ScaledValue {
    type Output = ScaledValue;
    fn div(self, rhs: ScaledValue) -> ScaledValue {
        if self.is_zero() && !rhs.is_zero() {
            return Self::ZERO;
        }
        Self::from_parts(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl Add for ScaledValue {
    type Output = ScaledValue;
    fn add(self, rhs: ScaledValue) -> ScaledValue {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exponent >= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = lo.exponent - hi.exponent;
        // Anything more than 60 binades down is below the mantissa's precision.
        let lo_m = if shift < -60 {
            Complex64::new(0.0, 0.0)
        } else {
            ldexp(lo.mantissa, shift)
        };
        Self::from_parts(hi.mantissa + lo_m, hi.exponent)
    }
}

impl Neg for ScaledValue {
    type Output = ScaledValue;
    fn neg(self) -> ScaledValue {
        Self {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Sub for ScaledValue {
    type Output = ScaledValue;
    fn sub(self, rhs: ScaledValue) -> ScaledValue {
        self + (-rhs)
    }
}

impl fmt::Debug for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ScaledValue({}{:+}i × 2^{})",
            self.mantissa.re, self.mantissa.im, self.exponent
        )
    }
}

impl fmt::Display for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent.abs() < 900 {
            let z = self.to_complex();
            write!(f, "{}{:+}i", z.re, z.im)
        } else {
            write!(f, "({}{:+}i)·2^{}", self.mantissa.re, self.mantissa.im, self.exponent)
        }
    }
}
