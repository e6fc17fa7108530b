//! Minimal double-double arithmetic (about 32 significant digits), enough to
//! sum the Maclaurin series of `w` far outside its comfortable radius.

use num_complex::Complex64;
use std::ops::{Add, Mul};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub(crate) const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub(crate) const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub(crate) fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    pub(crate) fn square(v: f64) -> Self {
        let (p, e) = two_prod(v, v);
        Dd { hi: p, lo: e }
    }

    pub(crate) fn product(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Dd { hi: p, lo: e }
    }

    pub(crate) fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub(crate) fn scale(self, k: f64) -> Self {
        let (p, e) = two_prod(self.hi, k);
        let (hi, lo) = quick_two_sum(p, e + self.lo * k);
        Dd { hi, lo }
    }

    pub(crate) fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, f) = two_sum(self.hi, -p);
        let r = s + (f - e + self.lo);
        let q2 = r / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CDd {
    pub(crate) re: Dd,
    pub(crate) im: Dd,
}

impl CDd {
    pub(crate) const ZERO: CDd = CDd {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };

    pub(crate) fn mul(self, rhs: CDd) -> CDd {
        CDd {
            re: self.re * rhs.re + (self.im * rhs.im).neg(),
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }

    pub(crate) fn div_f64(self, k: f64) -> CDd {
        CDd {
            re: self.re.div_f64(k),
            im: self.im.div_f64(k),
        }
    }

    pub(crate) fn add(self, rhs: CDd) -> CDd {
        CDd {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }

    pub(crate) fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}
