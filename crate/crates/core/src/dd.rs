//! Compensated double-double arithmetic.
//!
//! The Fourier-Legendre/Hermite coefficient formulas convert monomial moments
//! of the kernel into orthogonal-polynomial moments. That conversion carries
//! condition numbers growing like (1+sqrt(2))^n, so the formal-power
//! difference tables and the coefficient sums are accumulated in unevaluated
//! double-double pairs (~31 significant digits). Everything exposed publicly
//! stays `f64`.

use num_complex::Complex64;

/// An unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = f64::mul_add(a, b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, other: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, other);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, other);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * other);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e }.add_f64(q3)
    }

}

/// Complex number with double-double components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub const ZERO: CDd = CDd { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: CDd = CDd { re: Dd::ONE, im: Dd::ZERO };

    #[inline]
    pub fn from_c64(z: Complex64) -> CDd {
        CDd { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    #[inline]
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    #[inline]
    pub fn add(self, other: CDd) -> CDd {
        CDd { re: self.re.add(other.re), im: self.im.add(other.im) }
    }

    #[inline]
    pub fn sub(self, other: CDd) -> CDd {
        CDd { re: self.re.sub(other.re), im: self.im.sub(other.im) }
    }

    #[inline]
    pub fn neg(self) -> CDd {
        CDd { re: self.re.neg(), im: self.im.neg() }
    }

    #[inline]
    pub fn mul(self, other: CDd) -> CDd {
        CDd {
            re: self.re.mul(other.re).sub(self.im.mul(other.im)),
            im: self.re.mul(other.im).add(self.im.mul(other.re)),
        }
    }

    #[inline]
    pub fn mul_dd(self, other: Dd) -> CDd {
        CDd { re: self.re.mul(other), im: self.im.mul(other) }
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> CDd {
        CDd { re: self.re.mul_f64(other), im: self.im.mul_f64(other) }
    }

    #[inline]
    pub fn div(self, other: CDd) -> CDd {
        let denom = other.re.mul(other.re).add(other.im.mul(other.im));
        let num = self.mul(CDd { re: other.re, im: other.im.neg() });
        CDd { re: num.re.div(denom), im: num.im.div(denom) }
    }

    #[inline]
    pub fn div_dd(self, other: Dd) -> CDd {
        CDd { re: self.re.div(other), im: self.im.div(other) }
    }

    #[inline]
    pub fn add_real(self, r: Dd) -> CDd {
        CDd { re: self.re.add(r), im: self.im }
    }

    pub fn norm(self) -> f64 {
        self.to_c64().norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_keeps_small_component() {
        let big = Dd::from_f64(1e16);
        let s = big.add_f64(1.0).add_f64(-1e16);
        assert_eq!(s.to_f64(), 1.0);
    }

    #[test]
    fn mul_is_exact_for_representable_products() {
        let a = Dd::from_f64(1.0 + 2f64.powi(-30));
        let b = Dd::from_f64(1.0 - 2f64.powi(-30));
        let p = a.mul(b);
        // (1+e)(1-e) = 1 - e^2 with e^2 = 2^-60 below f64 resolution of 1
        let expected_lo = -(2f64.powi(-60));
        assert_eq!(p.hi, 1.0);
        assert!((p.lo - expected_lo).abs() < 1e-25);
    }

    #[test]
    fn div_roundtrips() {
        let a = Dd::from_f64(std::f64::consts::PI);
        let b = Dd::from_f64(std::f64::consts::E);
        let q = a.div(b).mul(b);
        assert!((q.to_f64() - std::f64::consts::PI).abs() < 1e-30);
        assert!(q.sub(a).to_f64().abs() < 1e-30);
    }

    #[test]
    fn complex_mul_matches_f64() {
        let z = Complex64::new(1.25, -0.5);
        let w = Complex64::new(-2.0, 3.5);
        let p = CDd::from_c64(z).mul(CDd::from_c64(w)).to_c64();
        let q = z * w;
        assert!((p - q).norm() < 1e-15);
    }

    #[test]
    fn complex_div_roundtrips() {
        let z = CDd::from_c64(Complex64::new(0.7, 1.3));
        let w = CDd::from_c64(Complex64::new(-1.1, 0.3));
        let r = z.div(w).mul(w).sub(z);
        assert!(r.norm() < 1e-30);
    }
}
