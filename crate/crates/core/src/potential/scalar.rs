//! Scalar abstraction shared by plain `f64` and forward-mode dual numbers.
//!
//! The neural potential is written once against [`Scalar`]. Evaluating it on
//! [`Dual`] positions seeded with a displacement direction yields, for free,
//! the directional derivative of every intermediate quantity, which is how
//! the force term of the training loss gets its parameter gradient.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn cst(v: f64) -> Self;
    fn value(self) -> f64;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    fn tanh(self) -> Self;
    fn softplus(self) -> Self;
    fn sigmoid(self) -> Self;
    fn is_finite(self) -> bool;

    fn zero() -> Self {
        Self::cst(0.0)
    }
}

fn softplus_f64(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid_f64(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn softplus(self) -> Self {
        softplus_f64(self)
    }
    #[inline]
    fn sigmoid(self) -> Self {
        sigmoid_f64(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

/// First-order dual number `v + d·ε`, ε² = 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn new(v: f64, d: f64) -> Self {
        Dual { v, d }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: f64) -> Dual {
        Dual::new(self.v * o, self.d * o)
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: Dual) -> Dual {
        let q = self.v / o.v;
        Dual::new(q, (self.d - q * o.d) / o.v)
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, o: Dual) {
        self.v += o.v;
        self.d += o.d;
    }
}

impl SubAssign for Dual {
    #[inline]
    fn sub_assign(&mut self, o: Dual) {
        self.v -= o.v;
        self.d -= o.d;
    }
}

impl MulAssign for Dual {
    #[inline]
    fn mul_assign(&mut self, o: Dual) {
        *self = *self * o;
    }
}

impl Scalar for Dual {
    #[inline]
    fn cst(v: f64) -> Self {
        Dual::new(v, 0.0)
    }
    #[inline]
    fn value(self) -> f64 {
        self.v
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.v.exp();
        Dual::new(e, e * self.d)
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Dual::new(s, self.d / (2.0 * s))
    }
    #[inline]
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        Dual::new(t, (1.0 - t * t) * self.d)
    }
    #[inline]
    fn softplus(self) -> Self {
        Dual::new(softplus_f64(self.v), sigmoid_f64(self.v) * self.d)
    }
    #[inline]
    fn sigmoid(self) -> Self {
        let s = sigmoid_f64(self.v);
        Dual::new(s, s * (1.0 - s) * self.d)
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.v.is_finite() && self.d.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn dual_derivatives_match_finite_differences() {
        for &x in &[-3.0, -0.4, 0.0, 0.7, 2.5] {
            let d = Dual::new(x, 1.0);
            assert!((d.exp().d - fd(f64::exp, x)).abs() < 1e-6);
            assert!((d.tanh().d - fd(f64::tanh, x)).abs() < 1e-6);
            assert!((d.softplus().d - fd(softplus_f64, x)).abs() < 1e-6);
            assert!((d.sigmoid().d - fd(sigmoid_f64, x)).abs() < 1e-6);
            let q = Dual::cst(1.5) / (d * d + Dual::cst(1.0));
            assert!((q.d - fd(|x| 1.5 / (x * x + 1.0), x)).abs() < 1e-6);
        }
        let s = Dual::new(2.0, 1.0).sqrt();
        assert!((s.d - 0.5 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus_f64(800.0), 800.0);
        assert!(softplus_f64(-800.0) >= 0.0);
        assert!((softplus_f64(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
