//! Exact U(1) phases: roots of unity exp(2πi·a/b) stored by their reduced
//! rational exponent a/b with 0 ≤ a/b < 1.
//!
//! Multiplication of phases is addition of exponents mod 1, so every product,
//! inverse and power is exact. Floating point appears only in [`Phase::to_complex`],
//! used for report export and cross-checks against complex arithmetic.

use std::fmt;
use std::ops::{Div, DivAssign, Mul, MulAssign};

use num::complex::Complex64;
use num::rational::Rational64;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A root of unity represented by its exponent in [0, 1).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase {
    exp: Rational64,
}

impl Phase {
    /// The trivial phase 1.
    pub const ONE: Phase = Phase { exp: Rational64::new_raw(0, 1) };

    /// The phase −1.
    pub const MINUS_ONE: Phase = Phase { exp: Rational64::new_raw(1, 2) };

    /// exp(2πi·num/den). Fails on a zero denominator; the exponent is reduced mod 1.
    pub fn new(num: i64, den: i64) -> Result<Phase> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(Phase::from_rational(Rational64::new(num, den)))
    }

    /// Wraps an arbitrary rational exponent into [0, 1).
    pub fn from_rational(r: Rational64) -> Phase {
        let f = r.fract();
        let exp = if f.is_negative() { f + Rational64::one() } else { f };
        Phase { exp }
    }

    /// The reduced exponent in [0, 1).
    pub fn exponent(self) -> Rational64 {
        self.exp
    }

    /// Numerator of the reduced exponent.
    pub fn numer(self) -> i64 {
        *self.exp.numer()
    }

    /// Denominator of the reduced exponent; this is the order of the phase as
    /// a root of unity.
    pub fn denom(self) -> i64 {
        *self.exp.denom()
    }

    pub fn is_one(self) -> bool {
        self.exp.is_zero()
    }

    /// Complex conjugate, i.e. the inverse in U(1).
    pub fn inv(self) -> Phase {
        Phase::from_rational(-self.exp)
    }

    /// Integer power (negative exponents allowed).
    pub fn pow(self, k: i64) -> Phase {
        Phase::from_rational(self.exp * Rational64::from_integer(k))
    }

    /// Numerator when the exponent is written over the given denominator.
    /// Fails if the phase's order does not divide `den`.
    pub fn numer_over(self, den: i64) -> Result<i64> {
        if den <= 0 || den % self.denom() != 0 {
            return Err(Error::Unsupported(format!(
                "phase of order {} cannot be written over denominator {den}",
                self.denom()
            )));
        }
        Ok(self.numer() * (den / self.denom()))
    }

    /// exp(2πi·exp) as a complex double.
    pub fn to_complex(self) -> Complex64 {
        let theta = 2.0 * std::f64::consts::PI * (*self.exp.numer() as f64)
            / (*self.exp.denom() as f64);
        Complex64::new(theta.cos(), theta.sin())
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::ONE
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_rational(self.exp + rhs.exp)
    }
}

impl MulAssign for Phase {
    fn mul_assign(&mut self, rhs: Phase) {
        *self = *self * rhs;
    }
}

impl Div for Phase {
    type Output = Phase;
    fn div(self, rhs: Phase) -> Phase {
        Phase::from_rational(self.exp - rhs.exp)
    }
}

impl DivAssign for Phase {
    fn div_assign(&mut self, rhs: Phase) {
        *self = *self / rhs;
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phase({}/{})", self.exp.numer(), self.exp.denom())
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            write!(f, "1")
        } else if self.exp == Rational64::new(1, 2) {
            write!(f, "-1")
        } else {
            write!(f, "exp(2πi·{}/{})", self.exp.numer(), self.exp.denom())
        }
    }
}
