//! Minimal double-double arithmetic for the high-accuracy coefficient solve.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::gaussian::Point;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd(pub f64, pub f64);

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let v = s - a;
    Dd(s, (a - (s - v)) + (b - v))
}

#[inline]
fn fast_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd(s, b - (s - a))
}

impl Dd {
    pub const ZERO: Dd = Dd(0.0, 0.0);
    pub const ONE: Dd = Dd(1.0, 0.0);
    const LN2: Dd = Dd(std::f64::consts::LN_2, 2.319046813846299558e-17);

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd(x, 0.0)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0 + self.1
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let p = self.0 * b;
        let e = self.0.mul_add(b, -p) + self.1 * b;
        fast_two_sum(p, e)
    }

    pub fn sqrt(self) -> Self {
        if self.0 <= 0.0 {
            return Dd::ZERO;
        }
        let y = self.0.sqrt();
        let r = self - Dd::from_f64(y).mul_f64(y);
        fast_two_sum(y, r.0 / (2.0 * y))
    }

    pub fn exp(self) -> Self {
        if self.0 < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.0 / std::f64::consts::LN_2).round();
        let r = (self - Dd::LN2.mul_f64(k)).mul_f64(1.0 / 256.0);
        // Taylor series of e^r - 1, |r| < 1.4e-3
        let mut term = r;
        let mut sum = r;
        for n in 2..=11 {
            term = (term * r) / Dd::from_f64(n as f64);
            sum = sum + term;
        }
        // (1 + s)² - 1 = s (2 + s), eight times
        for _ in 0..8 {
            sum = sum * (sum + Dd::from_f64(2.0));
        }
        let e = sum + Dd::ONE;
        let scale = 2f64.powi(k as i32);
        Dd(e.0 * scale, e.1 * scale)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let s = two_sum(self.0, b.0);
        let t = two_sum(self.1, b.1);
        let u = fast_two_sum(s.0, s.1 + t.0);
        fast_two_sum(u.0, u.1 + t.1)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let p = self.0 * b.0;
        let e = self.0.mul_add(b.0, -p) + (self.0 * b.1 + self.1 * b.0);
        fast_two_sum(p, e)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.0 / b.0;
        let r = self - b.mul_f64(q1);
        let q2 = r.0 / b.0;
        let r = r - b.mul_f64(q2);
        let q3 = r.0 / b.0;
        fast_two_sum(q1, q2) + Dd::from_f64(q3)
    }
}

/// Overlap of two normalized atoms carried in double-double.
pub(crate) fn overlap_dd(ca: &Point, sa: f64, cb: &Point, sb: f64) -> Dd {
    let s = two_sum(sa, sb);
    let t = Dd::from_f64(sa).mul_f64(4.0 * sb) / (s * s);
    let rt = t.sqrt();
    let mut d2 = Dd::ZERO;
    for k in 0..3 {
        let d = two_sum(ca[k], -cb[k]);
        d2 = d2 + d * d;
    }
    rt * rt.sqrt() * (-(d2 / s.mul_f64(2.0))).exp()
}
