//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64` with
//! `|lo| <= ulp(hi) / 2`, giving about 106 significant bits.
//!
//! Arithmetic, `sqrt`, `exp`, `ln`, `sin` and `cos` are accurate to a few
//! units of `2^-104`; the remaining transcendental functions of
//! [`num_traits::Float`] go through `f64` and are only double accurate.
//! The error-free transformations follow Dekker and Knuth as used in the QD
//! library of Hida, Li and Bailey.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

use crate::scalar::Real;

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
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

const PI: DoubleDouble = DoubleDouble { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
const FRAC_PI_2: DoubleDouble = DoubleDouble { hi: std::f64::consts::FRAC_PI_2, lo: 6.123233995736766e-17 };
const LN_2: DoubleDouble = DoubleDouble { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };
const LN_10: DoubleDouble = DoubleDouble { hi: std::f64::consts::LN_10, lo: -2.1707562233822494e-16 };
const E: DoubleDouble = DoubleDouble { hi: std::f64::consts::E, lo: 1.4456468917292502e-16 };

impl DoubleDouble {
    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub const fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn normalized(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        Self::normalized(p1, p2 + self.lo * b)
    }

    fn ldexp(self, e: i32) -> Self {
        let s = 2f64.powi(e);
        Self { hi: self.hi * s, lo: self.lo * s }
    }

    fn square(self) -> Self {
        let (p1, p2) = two_prod(self.hi, self.hi);
        Self::normalized(p1, p2 + 2.0 * self.hi * self.lo + self.lo * self.lo)
    }

    fn taylor_sin(t: Self) -> Self {
        let t2 = -t.square();
        let mut term = t;
        let mut sum = t;
        let mut k = 1.0;
        loop {
            term = term * t2 / Self::new((k + 1.0) * (k + 2.0));
            k += 2.0;
            sum = sum + term;
            if term.hi.abs() <= 1e-33 * sum.hi.abs() || k > 60.0 {
                return sum;
            }
        }
    }

    fn taylor_cos(t: Self) -> Self {
        let t2 = -t.square();
        let mut term = Self::one();
        let mut sum = Self::one();
        let mut k = 0.0;
        loop {
            term = term * t2 / Self::new((k + 1.0) * (k + 2.0));
            k += 2.0;
            sum = sum + term;
            if term.hi.abs() <= 1e-33 || k > 60.0 {
                return sum;
            }
        }
    }

    /// Quadrant `j` and remainder `t` with `x = j pi/2 + t`, `|t| <= pi/4`.
    fn reduce_quarter(self) -> (i64, Self) {
        let j = (self / FRAC_PI_2).hi.round();
        (j as i64, self - FRAC_PI_2 * Self::new(j))
    }

    fn via_f64(self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(f(self.hi + self.lo))
    }

    /// Decimal scientific notation with `digits` significant digits.
    fn to_scientific(self, digits: usize) -> String {
        if self.hi.is_nan() {
            return "NaN".into();
        }
        if self.hi.is_infinite() {
            return if self.hi > 0.0 { "inf".into() } else { "-inf".into() };
        }
        let digits = digits.max(1);
        let sign = if self.hi < 0.0 { "-" } else { "" };
        let mut x = self.abs();
        if x.hi == 0.0 {
            return format!(
                "{sign}{}e0",
                if digits > 1 { format!("0.{}", "0".repeat(digits - 1)) } else { "0".into() }
            );
        }
        let ten = Self::new(10.0);
        let mut exp10 = x.hi.log10().floor() as i32;
        x = x / ten.powi(exp10);
        if x.hi >= 10.0 {
            x = x / ten;
            exp10 += 1;
        } else if x.hi < 1.0 {
            x = x * ten;
            exp10 -= 1;
        }
        let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = x.hi.floor().clamp(0.0, 9.0);
            ds.push(d as u8);
            x = (x - Self::new(d)) * ten;
        }
        // round half up on the guard digit
        let guard = ds.pop().unwrap_or(0);
        if guard >= 5 {
            let mut i = ds.len();
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.pop();
                    exp10 += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        let mut s = String::from(sign);
        s.push((b'0' + ds[0]) as char);
        if ds.len() > 1 {
            s.push('.');
            s.extend(ds[1..].iter().map(|&d| (b'0' + d) as char));
        }
        s.push_str(&format!("e{exp10}"));
        s
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_scientific(32))
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "{}", self.to_scientific(p + 1)),
            None => write!(f, "{}", self.to_scientific(32)),
        }
    }
}

impl fmt::LowerExp for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().map_or(32, |p| p + 1);
        write!(f, "{}", self.to_scientific(digits))
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        if !s1.is_finite() {
            return Self::new(s1);
        }
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Self::normalized(s1, s2 + t2)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        if !p1.is_finite() {
            return Self::new(p1);
        }
        Self::normalized(p1, p2 + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() || q1 == 0.0 && self.hi == 0.0 {
            return Self::new(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        Self::normalized(q1, q2) + Self::new(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        self - (self / b).trunc() * b
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::new(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::new(1.0)
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Self::new)
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        t.hi.to_i64().and_then(|h| h.checked_add(t.lo as i64))
    }
    fn to_u64(&self) -> Option<u64> {
        let t = self.trunc();
        if t.hi < 0.0 {
            return None;
        }
        let h = t.hi.to_u64()?;
        if t.lo >= 0.0 {
            h.checked_add(t.lo as u64)
        } else {
            h.checked_sub((-t.lo) as u64)
        }
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n - hi as i64) as f64;
        Some(Self::normalized(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = n.wrapping_sub(hi as u64) as i64 as f64;
        Some(Self::normalized(hi, lo))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(Self::new(x))
    }
}

impl NumCast for DoubleDouble {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        n.to_f64().map(Self::new)
    }
}

impl Float for DoubleDouble {
    fn nan() -> Self {
        Self::new(f64::NAN)
    }
    fn infinity() -> Self {
        Self::new(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        Self::new(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        Self::new(-0.0)
    }
    fn min_value() -> Self {
        Self::new(f64::MIN)
    }
    fn min_positive_value() -> Self {
        // keeps the low word a normal number
        Self::new(f64::MIN_POSITIVE * 2f64.powi(53))
    }
    fn epsilon() -> Self {
        Self::new(2f64.powi(-104))
    }
    fn max_value() -> Self {
        Self::new(f64::MAX)
    }
    fn is_nan(self) -> bool {
        self.hi.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.hi.classify()
    }
    fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            Self::normalized(hi, self.lo.floor())
        } else {
            Self::new(hi)
        }
    }
    fn ceil(self) -> Self {
        let hi = self.hi.ceil();
        if hi == self.hi {
            Self::normalized(hi, self.lo.ceil())
        } else {
            Self::new(hi)
        }
    }
    fn round(self) -> Self {
        let half = Self::new(0.5);
        if self.hi >= 0.0 {
            (self + half).floor()
        } else {
            -((-self) + half).floor()
        }
    }
    fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.hi.is_sign_negative()) {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        Self::new(self.hi.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.square();
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }
    fn powf(self, n: Self) -> Self {
        if n == n.trunc() && n.hi.abs() < 2f64.powi(30) {
            return self.powi(n.hi as i32);
        }
        (n * self.ln()).exp()
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::zero() } else { Self::nan() };
        }
        if self.hi.is_infinite() {
            return self;
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (s, e) = two_sum(ax, (self - Self::new(ax).square()).hi * (x * 0.5));
        Self::normalized(s, e)
    }
    fn exp(self) -> Self {
        if self.hi > 709.7 {
            return Self::infinity();
        }
        if self.hi < -745.0 {
            return Self::zero();
        }
        if self.hi == 0.0 {
            return Self::one();
        }
        let m = (self.hi / LN_2.hi).round();
        // r = (x - m ln 2) / 512, |r| < 7e-4
        let r = (self - LN_2 * Self::new(m)).ldexp(-9);
        let mut term = r;
        let mut p = r;
        let mut k = 1.0;
        loop {
            k += 1.0;
            term = term * r / Self::new(k);
            p = p + term;
            if term.hi.abs() <= 1e-36 || k > 30.0 {
                break;
            }
        }
        // (1 + p)^512 via s <- 2s + s^2
        for _ in 0..9 {
            p = p.ldexp(1) + p.square();
        }
        (p + Self::one()).ldexp(m as i32)
    }
    fn exp2(self) -> Self {
        (self * LN_2).exp()
    }
    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::neg_infinity() } else { Self::nan() };
        }
        if self.hi.is_infinite() {
            return self;
        }
        let mut x = Self::new(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - Self::one();
        }
        x
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.ln() / LN_2
    }
    fn log10(self) -> Self {
        self.ln() / LN_10
    }
    fn max(self, other: Self) -> Self {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }
    fn min(self, other: Self) -> Self {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            Self::zero()
        }
    }
    fn cbrt(self) -> Self {
        if self.hi == 0.0 {
            return self;
        }
        // one Newton step from the f64 root doubles the accurate bits
        let y = Self::new(self.hi.cbrt());
        y - (y.powi(3) - self) / (Self::new(3.0) * y.square())
    }
    fn hypot(self, other: Self) -> Self {
        let (a, b) = (self.abs(), other.abs());
        let (big, small) = if a > b { (a, b) } else { (b, a) };
        if big.hi == 0.0 {
            return Self::zero();
        }
        let q = small / big;
        big * (Self::one() + q.square()).sqrt()
    }
    fn sin(self) -> Self {
        if !self.is_finite() {
            return Self::nan();
        }
        let (j, t) = self.reduce_quarter();
        match j.rem_euclid(4) {
            0 => Self::taylor_sin(t),
            1 => Self::taylor_cos(t),
            2 => -Self::taylor_sin(t),
            _ => -Self::taylor_cos(t),
        }
    }
    fn cos(self) -> Self {
        if !self.is_finite() {
            return Self::nan();
        }
        let (j, t) = self.reduce_quarter();
        match j.rem_euclid(4) {
            0 => Self::taylor_cos(t),
            1 => -Self::taylor_sin(t),
            2 => -Self::taylor_cos(t),
            _ => Self::taylor_sin(t),
        }
    }
    fn tan(self) -> Self {
        self.sin() / self.cos()
    }
    fn asin(self) -> Self {
        self.via_f64(f64::asin)
    }
    fn acos(self) -> Self {
        self.via_f64(f64::acos)
    }
    fn atan(self) -> Self {
        self.via_f64(f64::atan)
    }
    fn atan2(self, other: Self) -> Self {
        Self::new((self.hi + self.lo).atan2(other.hi + other.lo))
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn exp_m1(self) -> Self {
        if self.hi.abs() < 1e-3 {
            // Taylor directly, no cancellation
            let mut term = self;
            let mut sum = self;
            let mut k = 1.0;
            while term.hi.abs() > 1e-36 * sum.hi.abs().max(1e-300) && k < 40.0 {
                k += 1.0;
                term = term * self / Self::new(k);
                sum = sum + term;
            }
            sum
        } else {
            self.exp() - Self::one()
        }
    }
    fn ln_1p(self) -> Self {
        (Self::one() + self).ln()
    }
    fn sinh(self) -> Self {
        let e = self.exp();
        (e - e.recip()).ldexp(-1)
    }
    fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()).ldexp(-1)
    }
    fn tanh(self) -> Self {
        self.sinh() / self.cosh()
    }
    fn asinh(self) -> Self {
        self.via_f64(f64::asinh)
    }
    fn acosh(self) -> Self {
        self.via_f64(f64::acosh)
    }
    fn atanh(self) -> Self {
        self.via_f64(f64::atanh)
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }
}

impl FloatConst for DoubleDouble {
    fn E() -> Self {
        E
    }
    fn FRAC_1_PI() -> Self {
        PI.recip()
    }
    fn FRAC_1_SQRT_2() -> Self {
        Self::new(2.0).sqrt().recip()
    }
    fn FRAC_2_PI() -> Self {
        Self::new(2.0) / PI
    }
    fn FRAC_2_SQRT_PI() -> Self {
        Self::new(2.0) / PI.sqrt()
    }
    fn FRAC_PI_2() -> Self {
        FRAC_PI_2
    }
    fn FRAC_PI_3() -> Self {
        PI / Self::new(3.0)
    }
    fn FRAC_PI_4() -> Self {
        PI.ldexp(-2)
    }
    fn FRAC_PI_6() -> Self {
        PI / Self::new(6.0)
    }
    fn FRAC_PI_8() -> Self {
        PI.ldexp(-3)
    }
    fn LN_10() -> Self {
        LN_10
    }
    fn LN_2() -> Self {
        LN_2
    }
    fn LOG10_E() -> Self {
        LN_10.recip()
    }
    fn LOG2_E() -> Self {
        LN_2.recip()
    }
    fn PI() -> Self {
        PI
    }
    fn SQRT_2() -> Self {
        Self::new(2.0).sqrt()
    }
}

impl Real for DoubleDouble {
    fn default_tolerance() -> Self {
        Self::new(1e-28)
    }
}
