//! Complex numbers with an explicit natural-log exponent, for amplitudes
//! whose scaled magnitude leaves the f64 range (e^{(σΩ)²} factors).

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `mant · e^{ln_scale}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpComplex {
    pub mant: Complex64,
    pub ln_scale: f64,
}

impl ExpComplex {
    pub const ZERO: ExpComplex = ExpComplex {
        mant: Complex64::new(0.0, 0.0),
        ln_scale: 0.0,
    };

    pub fn new(mant: Complex64, ln_scale: f64) -> Self {
        Self { mant, ln_scale }.normalized()
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0.0)
    }

    fn normalized(self) -> Self {
        let m = self.mant.norm();
        if m == 0.0 || !m.is_finite() {
            if m == 0.0 {
                return Self::ZERO;
            }
            return self;
        }
        let k = m.ln();
        Self {
            mant: self.mant / m,
            ln_scale: self.ln_scale + k,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.norm() == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mant.re.is_finite() && self.mant.im.is_finite() && self.ln_scale.is_finite()
    }

    /// ln|z|; −∞ for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mant.norm().ln() + self.ln_scale
        }
    }

    pub fn arg(&self) -> f64 {
        self.mant.arg()
    }

    /// Plain f64 rendering; overflows to ±∞ and underflows to 0.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let s = self.ln_scale.exp();
        if s.is_infinite() {
            let f = |x: f64| if x == 0.0 { 0.0 } else { x.signum() * f64::INFINITY };
            return Complex64::new(f(self.mant.re), f(self.mant.im));
        }
        self.mant * s
    }

    /// Real part as an ExpComplex.
    pub fn re(&self) -> ExpComplex {
        Self::new(Complex64::new(self.mant.re, 0.0), self.ln_scale)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.mant * k, self.ln_scale)
    }
}

impl Add for ExpComplex {
    type Output = ExpComplex;
    fn add(self, rhs: ExpComplex) -> ExpComplex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.ln_scale >= rhs.ln_scale {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let d = small.ln_scale - big.ln_scale;
        ExpComplex::new(big.mant + small.mant * d.exp(), big.ln_scale)
    }
}

impl Neg for ExpComplex {
    type Output = ExpComplex;
    fn neg(self) -> ExpComplex {
        ExpComplex {
            mant: -self.mant,
            ln_scale: self.ln_scale,
        }
    }
}

impl Sub for ExpComplex {
    type Output = ExpComplex;
    fn sub(self, rhs: ExpComplex) -> ExpComplex {
        self + (-rhs)
    }
}

impl Mul for ExpComplex {
    type Output = ExpComplex;
    fn mul(self, rhs: ExpComplex) -> ExpComplex {
        ExpComplex::new(self.mant * rhs.mant, self.ln_scale + rhs.ln_scale)
    }
}

impl Mul<Complex64> for ExpComplex {
    type Output = ExpComplex;
    fn mul(self, rhs: Complex64) -> ExpComplex {
        ExpComplex::new(self.mant * rhs, self.ln_scale)
    }
}

impl From<Complex64> for ExpComplex {
    fn from(z: Complex64) -> Self {
        ExpComplex::from_complex(z)
    }
}
