use std::cmp::Ordering;
use std::fmt;

use rug::ops::CompleteRound;
use rug::{Float, Integer};

/// Arbitrary-precision complex scalar.
///
/// When `pi_factor` is set the represented value is `(re + i*im) * pi`; the
/// components stay exact (no rounding of pi) until a transcendental function
/// or a mixed operation forces numeric evaluation. This makes resonance
/// detection (`exp(x) == 1` for `x` in `2*pi*i*Z`) a symbolic test.
#[derive(Clone)]
pub struct PrecComplex {
    re: Float,
    im: Float,
    pi_factor: bool,
}

impl PrecComplex {
    pub fn new(prec: u32, re: f64, im: f64) -> Self {
        PrecComplex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
            pi_factor: false,
        }
    }

    pub fn from_floats(re: Float, im: Float) -> Self {
        PrecComplex { re, im, pi_factor: false }
    }

    /// Value `(re + i*im) * pi` with pi kept symbolic.
    pub fn pi_scaled(re: Float, im: Float) -> Self {
        PrecComplex { re, im, pi_factor: true }
    }

    pub fn zero(prec: u32) -> Self {
        Self::new(prec, 0.0, 0.0)
    }

    pub fn one(prec: u32) -> Self {
        Self::new(prec, 1.0, 0.0)
    }

    pub fn from_integer(prec: u32, n: &Integer) -> Self {
        PrecComplex {
            re: Float::with_val(prec, n),
            im: Float::with_val(prec, 0),
            pi_factor: false,
        }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        PrecComplex { re, im: Float::with_val(prec, 0), pi_factor: false }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_pi_scaled(&self) -> bool {
        self.pi_factor
    }

    /// Stored components, not multiplied out by pi.
    pub fn raw_re(&self) -> &Float {
        &self.re
    }

    pub fn raw_im(&self) -> &Float {
        &self.im
    }

    /// Numeric real part, with any pi factor multiplied out.
    pub fn re(&self) -> Float {
        if self.pi_factor {
            let pi = Float::with_val(self.prec(), rug::float::Constant::Pi);
            (&self.re * &pi).complete(self.prec())
        } else {
            self.re.clone()
        }
    }

    pub fn im(&self) -> Float {
        if self.pi_factor {
            let pi = Float::with_val(self.prec(), rug::float::Constant::Pi);
            (&self.im * &pi).complete(self.prec())
        } else {
            self.im.clone()
        }
    }

    /// Same value with the pi factor folded into the components.
    pub fn numerize(&self) -> PrecComplex {
        if self.pi_factor {
            PrecComplex { re: self.re(), im: self.im(), pi_factor: false }
        } else {
            self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> PrecComplex {
        PrecComplex {
            re: self.re.clone(),
            im: (-&self.im).complete(self.im.prec()),
            pi_factor: self.pi_factor,
        }
    }

    pub fn neg(&self) -> PrecComplex {
        PrecComplex {
            re: (-&self.re).complete(self.re.prec()),
            im: (-&self.im).complete(self.im.prec()),
            pi_factor: self.pi_factor,
        }
    }

    pub fn add(&self, rhs: &PrecComplex) -> PrecComplex {
        let prec = self.prec().max(rhs.prec());
        if self.pi_factor == rhs.pi_factor {
            PrecComplex {
                re: (&self.re + &rhs.re).complete(prec),
                im: (&self.im + &rhs.im).complete(prec),
                pi_factor: self.pi_factor,
            }
        } else {
            self.numerize().add(&rhs.numerize())
        }
    }

    pub fn sub(&self, rhs: &PrecComplex) -> PrecComplex {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &PrecComplex) -> PrecComplex {
        if self.pi_factor && rhs.pi_factor {
            return self.numerize().mul(&rhs.numerize());
        }
        let prec = self.prec().max(rhs.prec());
        let re = (&self.re * &rhs.re).complete(prec) - (&self.im * &rhs.im).complete(prec);
        let im = (&self.re * &rhs.im).complete(prec) + (&self.im * &rhs.re).complete(prec);
        PrecComplex { re, im, pi_factor: self.pi_factor || rhs.pi_factor }
    }

    pub fn div(&self, rhs: &PrecComplex) -> PrecComplex {
        if rhs.pi_factor {
            return self.numerize().div(&rhs.numerize());
        }
        let prec = self.prec().max(rhs.prec());
        let d = rhs.raw_abs_sq();
        let re = ((&self.re * &rhs.re).complete(prec) + (&self.im * &rhs.im).complete(prec)) / &d;
        let im = ((&self.im * &rhs.re).complete(prec) - (&self.re * &rhs.im).complete(prec)) / &d;
        PrecComplex { re, im, pi_factor: self.pi_factor }
    }

    /// Multiply by an exact real scalar; the pi flag survives.
    pub fn scale(&self, s: &Float) -> PrecComplex {
        let prec = self.prec().max(s.prec());
        PrecComplex {
            re: (&self.re * s).complete(prec),
            im: (&self.im * s).complete(prec),
            pi_factor: self.pi_factor,
        }
    }

    pub fn scale_int(&self, n: &Integer) -> PrecComplex {
        let prec = self.prec();
        PrecComplex {
            re: (&self.re * n).complete(prec),
            im: (&self.im * n).complete(prec),
            pi_factor: self.pi_factor,
        }
    }

    pub fn div_int(&self, n: &Integer) -> PrecComplex {
        let prec = self.prec();
        PrecComplex {
            re: (&self.re / n).complete(prec),
            im: (&self.im / n).complete(prec),
            pi_factor: self.pi_factor,
        }
    }

    /// Integer power of the numeric value (binary exponentiation).
    pub fn powu(&self, mut e: u32) -> PrecComplex {
        let mut base = self.numerize();
        let mut acc = PrecComplex::one(self.prec());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn raw_abs_sq(&self) -> Float {
        let prec = self.prec();
        (&self.re * &self.re).complete(prec) + (&self.im * &self.im).complete(prec)
    }

    pub fn abs_sq(&self) -> Float {
        let n = self.numerize();
        n.raw_abs_sq()
    }

    pub fn abs(&self) -> Float {
        self.abs_sq().sqrt()
    }

    /// True iff the value is an integer multiple of `2*pi*i`, decided on the
    /// symbolic representation (never by thresholding a float).
    pub fn is_multiple_of_two_pi_i(&self) -> bool {
        if !self.re.is_zero() {
            return false;
        }
        if self.pi_factor {
            // to_integer rounds to nearest, so gate on exactness first.
            if !self.im.is_integer() {
                return false;
            }
            match self.im.to_integer() {
                Some(k) => k.is_even(),
                None => false,
            }
        } else {
            self.im.is_zero()
        }
    }

    /// Complex exponential. Resonant arguments (multiples of `2*pi*i`)
    /// return exactly 1.
    pub fn exp(&self) -> PrecComplex {
        let prec = self.prec();
        if self.is_multiple_of_two_pi_i() {
            return PrecComplex::one(prec);
        }
        let n = self.numerize();
        let mag = n.re.exp();
        let (sin, cos) = n.im.sin_cos(Float::new(prec));
        PrecComplex { re: cos * &mag, im: sin * &mag, pi_factor: false }
    }

    /// Representation equality: same flag, bit-identical components.
    pub fn repr_eq(&self, other: &PrecComplex) -> bool {
        self.pi_factor == other.pi_factor
            && self.re == other.re
            && self.im == other.im
            && self.re.is_sign_positive() == other.re.is_sign_positive()
            && self.im.is_sign_positive() == other.im.is_sign_positive()
    }

    /// Total order on numeric value (re, then im, then flag); used only for
    /// canonical term ordering.
    pub fn repr_cmp(&self, other: &PrecComplex) -> Ordering {
        let a = self.numerize();
        let b = other.numerize();
        a.re.partial_cmp(&b.re)
            .unwrap_or(Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
            .then(self.pi_factor.cmp(&other.pi_factor))
    }

    /// |self - other| / max(|self|, |other|, floor); the floor keeps the
    /// quotient meaningful when both sides vanish.
    pub fn rel_diff(&self, other: &PrecComplex) -> Float {
        let prec = self.prec().max(other.prec());
        let diff = self.sub(other).abs();
        let mut scale = self.abs().max(&other.abs());
        let floor = Float::with_val(prec, 1e-300);
        if scale < floor {
            scale = floor;
        }
        diff / scale
    }
}

impl fmt::Debug for PrecComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = if self.pi_factor { "*pi" } else { "" };
        write!(
            f,
            "({}, {}){}",
            self.re.to_f64(),
            self.im.to_f64(),
            suffix
        )
    }
}

/// Full-precision decimal form, round-trippable when re-read at the same
/// precision.
pub fn float_to_decimal(x: &Float) -> String {
    if x.is_zero() {
        // Keep the sign bit so representation round-trips survive -0.
        return if x.is_sign_negative() { "-0".to_string() } else { "0".to_string() };
    }
    x.to_string_radix(10, None)
}

pub fn float_from_decimal(prec: u32, s: &str) -> Option<Float> {
    Float::parse(s).ok().map(|v| Float::with_val(prec, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> PrecComplex {
        PrecComplex::new(256, re, im)
    }

    #[test]
    fn arithmetic_matches_hand_values() {
        let a = c(1.0, 2.0);
        let b = c(3.0, -1.0);
        let s = a.add(&b);
        assert_eq!(s.re().to_f64(), 4.0);
        assert_eq!(s.im().to_f64(), 1.0);
        let p = a.mul(&b);
        assert_eq!(p.re().to_f64(), 5.0);
        assert_eq!(p.im().to_f64(), 5.0);
        let q = p.div(&b);
        assert!(q.rel_diff(&a) < 1e-70);
    }

    #[test]
    fn relative_error_stays_within_precision() {
        // One multiply at P bits keeps relative error below 2^(1-P).
        let third = Float::with_val(256, 1) / 3u32;
        let a = PrecComplex::from_floats(third, Float::with_val(256, 0));
        let b = a.mul(&a);
        let exact = Float::with_val(512, 1) / 9u32;
        let got = Float::with_val(512, b.re());
        let rel = ((got - &exact) / &exact).abs();
        // 2^(1-256) is about 1.7e-77; allow a few operations worth of slack.
        assert!(rel.to_f64() < 1e-75);
    }

    #[test]
    fn pi_flag_survives_scaling_and_conjugation() {
        let two_pi_i = PrecComplex::pi_scaled(Float::with_val(256, 0), Float::with_val(256, 2));
        let w = two_pi_i.conj();
        assert!(w.is_pi_scaled());
        assert_eq!(w.raw_im().to_f64(), -2.0);
        let s = two_pi_i.scale(&Float::with_val(256, 3));
        assert_eq!(s.raw_im().to_f64(), 6.0);
        assert!(s.is_pi_scaled());
    }

    #[test]
    fn resonance_detected_symbolically() {
        // (2*pi exact, as imaginary part) times a real factor stays resonant.
        let a = PrecComplex::pi_scaled(Float::with_val(256, 0), Float::with_val(256, 2));
        let b = c(1.0, 0.0);
        let prod = b.mul(&a);
        assert!(prod.is_multiple_of_two_pi_i());
        let e = prod.exp();
        assert!(e.sub(&PrecComplex::one(256)).is_zero());

        // Odd multiples of pi*i are not resonant.
        let half = PrecComplex::pi_scaled(Float::with_val(256, 0), Float::with_val(256, 1));
        assert!(!half.is_multiple_of_two_pi_i());
        // exp(pi*i) = -1 to rounding.
        let e2 = half.exp();
        assert!((e2.re().to_f64() + 1.0).abs() < 1e-70);
    }

    #[test]
    fn fractional_pi_multiples_are_not_resonant() {
        // Scaling a resonant frequency by a non-integer real must force the
        // numeric path; rounding 0.32 pi down to zero would fake exp = 1.
        let two_pi_i = PrecComplex::pi_scaled(Float::with_val(256, 0), Float::with_val(256, -2));
        let scaled = two_pi_i.scale(&Float::with_val(256, 0.16));
        assert!(scaled.is_pi_scaled());
        assert!(!scaled.is_multiple_of_two_pi_i());
        let e = scaled.exp();
        let arg = -0.32 * std::f64::consts::PI;
        assert!((e.re().to_f64() - arg.cos()).abs() < 1e-12);
        assert!((e.im().to_f64() - arg.sin()).abs() < 1e-12);
    }

    #[test]
    fn mixed_pi_products_numerize() {
        let a = PrecComplex::pi_scaled(Float::with_val(256, 1), Float::with_val(256, 0));
        let sq = a.mul(&a);
        assert!(!sq.is_pi_scaled());
        let pi = Float::with_val(256, rug::float::Constant::Pi);
        let expect = (&pi * &pi).complete(256);
        assert!((sq.re() - expect).abs() < 1e-70);
    }

    #[test]
    fn exp_of_general_value() {
        let z = c(0.5, 1.25);
        let e = z.exp();
        let mag = 0.5f64.exp();
        assert!((e.re().to_f64() - mag * 1.25f64.cos()).abs() < 1e-12);
        assert!((e.im().to_f64() - mag * 1.25f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn decimal_round_trip_is_exact() {
        let x = Float::with_val(256, 1) / 7u32;
        let s = float_to_decimal(&x);
        let back = float_from_decimal(256, &s).unwrap();
        assert_eq!(x, back);
        let y = Float::with_val(256, -1234.5e10);
        assert_eq!(y, float_from_decimal(256, &float_to_decimal(&y)).unwrap());
    }
}
