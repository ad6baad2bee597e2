//! Exact arithmetic in the real field `F = Q(√2, √5)` and in the quaternion
//! algebra `H_F = F + Fi + Fj + Fk`.
//!
//! A [`FieldElem`] is stored as four integer numerators over one shared
//! positive denominator, in lowest terms. Values that fit in `i64` use an
//! inline representation; anything larger is promoted to `BigInt` and demoted
//! again when it shrinks, so the representation is canonical and equality is
//! structural.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse rational {0:?}")]
    Parse(String),
}

/// `a + b√2 + c√5 + d√10` with rational `a, b, c, d`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElem(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small([i64; 4], i64),
    Big(Box<([BigInt; 4], BigInt)>),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn normalize_wide(mut num: [i128; 4], mut den: i128) -> FieldElem {
    debug_assert!(den != 0);
    if num.iter().all(|&v| v == 0) {
        return FieldElem::zero();
    }
    if den < 0 {
        if den == i128::MIN || num.contains(&i128::MIN) {
            return normalize_big(num.map(BigInt::from), BigInt::from(den));
        }
        den = -den;
        for v in num.iter_mut() {
            *v = -*v;
        }
    }
    let mut g = den.unsigned_abs();
    for v in num {
        g = gcd_u128(g, v.unsigned_abs());
        if g == 1 {
            break;
        }
    }
    if g > 1 {
        let g = g as i128;
        den /= g;
        for v in num.iter_mut() {
            *v /= g;
        }
    }
    match (
        i64::try_from(num[0]),
        i64::try_from(num[1]),
        i64::try_from(num[2]),
        i64::try_from(num[3]),
        i64::try_from(den),
    ) {
        (Ok(a), Ok(b), Ok(c), Ok(d), Ok(e)) => FieldElem(Repr::Small([a, b, c, d], e)),
        _ => FieldElem(Repr::Big(Box::new((num.map(BigInt::from), BigInt::from(den))))),
    }
}

fn normalize_big(mut num: [BigInt; 4], mut den: BigInt) -> FieldElem {
    debug_assert!(!den.is_zero());
    if num.iter().all(|v| v.is_zero()) {
        return FieldElem::zero();
    }
    if den.is_negative() {
        den = -den;
        for v in num.iter_mut() {
            *v = -&*v;
        }
    }
    let mut g = den.clone();
    for v in &num {
        g = g.gcd(v);
    }
    if !g.is_one() {
        den /= &g;
        for v in num.iter_mut() {
            *v /= &g;
        }
    }
    let small: Option<Vec<i64>> = num.iter().chain(std::iter::once(&den)).map(|v| v.to_i64()).collect();
    match small {
        Some(s) => FieldElem(Repr::Small([s[0], s[1], s[2], s[3]], s[4])),
        None => FieldElem(Repr::Big(Box::new((num, den)))),
    }
}

impl FieldElem {
    pub fn zero() -> Self {
        FieldElem(Repr::Small([0; 4], 1))
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        FieldElem(Repr::Small([v, 0, 0, 0], 1))
    }

    /// `(a + b√2 + c√5 + d√10) / den` from small integers.
    pub fn from_parts(a: i64, b: i64, c: i64, d: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        normalize_wide([a as i128, b as i128, c as i128, d as i128], den as i128)
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        Self::from_parts(p, 0, 0, 0, q)
    }

    pub fn sqrt2() -> Self {
        Self::from_parts(0, 1, 0, 0, 1)
    }

    pub fn sqrt5() -> Self {
        Self::from_parts(0, 0, 1, 0, 1)
    }

    pub fn sqrt10() -> Self {
        Self::from_parts(0, 0, 0, 1, 1)
    }

    /// The golden ratio `(1+√5)/2`.
    pub fn tau() -> Self {
        Self::from_parts(1, 0, 1, 0, 2)
    }

    /// `τ⁻¹ = (√5−1)/2`.
    pub fn tau_inv() -> Self {
        Self::from_parts(-1, 0, 1, 0, 2)
    }

    pub fn from_rationals(c: [BigRational; 4]) -> Self {
        let mut den = BigInt::one();
        for r in &c {
            den = den.lcm(r.denom());
        }
        let num = c.map(|r| r.numer() * (&den / r.denom()));
        normalize_big(num, den)
    }

    /// Coefficients on the basis `1, √2, √5, √10`.
    pub fn coeffs(&self) -> [BigRational; 4] {
        let (num, den) = self.big_parts();
        num.map(|n| BigRational::new(n, den.clone()))
    }

    fn big_parts(&self) -> ([BigInt; 4], BigInt) {
        match &self.0 {
            Repr::Small(n, d) => (n.map(BigInt::from), BigInt::from(*d)),
            Repr::Big(b) => (b.0.clone(), b.1.clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Small(n, _) if *n == [0; 4])
    }

    pub fn is_one(&self) -> bool {
        matches!(&self.0, Repr::Small([1, 0, 0, 0], 1))
    }

    /// True when the element lies in `Q`.
    pub fn is_rational(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => n[1] == 0 && n[2] == 0 && n[3] == 0,
            Repr::Big(b) => b.0[1..].iter().all(|v| v.is_zero()),
        }
    }

    /// The rational part `a`.
    pub fn rational_part(&self) -> BigRational {
        let (num, den) = self.big_parts();
        BigRational::new(num[0].clone(), den)
    }

    /// Integer numerators and the shared denominator, if they all fit in `i64`.
    pub fn small_parts(&self) -> Option<([i64; 4], i64)> {
        match &self.0 {
            Repr::Small(n, d) => Some((*n, *d)),
            Repr::Big(_) => None,
        }
    }

    /// Integer numerators and shared positive denominator.
    pub fn int_parts(&self) -> ([BigInt; 4], BigInt) {
        self.big_parts()
    }

    fn is_big(&self) -> bool {
        matches!(self.0, Repr::Big(_))
    }

    /// `√2 ↦ −√2`.
    pub fn conj_sqrt2(&self) -> Self {
        self.map_signs([1, -1, 1, -1])
    }

    /// `√5 ↦ −√5`.
    pub fn conj_sqrt5(&self) -> Self {
        self.map_signs([1, 1, -1, -1])
    }

    fn map_signs(&self, s: [i64; 4]) -> Self {
        match &self.0 {
            Repr::Small(n, d) => {
                let num = [0, 1, 2, 3].map(|k| n[k] as i128 * s[k] as i128);
                normalize_wide(num, *d as i128)
            }
            Repr::Big(b) => {
                let num = [0, 1, 2, 3].map(|k| &b.0[k] * BigInt::from(s[k]));
                normalize_big(num, b.1.clone())
            }
        }
    }

    /// Multiplication by a small integer.
    pub fn scale(&self, k: i64) -> Self {
        self * &FieldElem::from_int(k)
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        // Multiply by the three nontrivial Galois conjugates; the total norm is rational.
        let c2 = self.conj_sqrt2();
        let c5 = self.conj_sqrt5();
        let c25 = c2.conj_sqrt5();
        let others = &(&c2 * &c5) * &c25;
        let norm = self * &others;
        debug_assert!(norm.is_rational());
        let (num, den) = norm.big_parts();
        // others * den / num[0]
        let (onum, oden) = others.big_parts();
        Ok(normalize_big(onum.map(|v| v * &den), oden * &num[0]))
    }

    pub fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        Ok(self * &other.inv()?)
    }

    /// Sign under the real embedding with positive square roots.
    pub fn sign(&self) -> i32 {
        field_sign(self)
    }

    pub fn to_f64(&self) -> f64 {
        let (num, den) = self.big_parts();
        let d = den.to_f64().unwrap_or(f64::INFINITY);
        let f = |v: &BigInt| v.to_f64().unwrap_or(0.0) / d;
        f(&num[0]) + f(&num[1]) * 2f64.sqrt() + f(&num[2]) * 5f64.sqrt() + f(&num[3]) * 10f64.sqrt()
    }

    /// Coefficients as `"p/q"` strings (integers render without a slash).
    pub fn to_strings(&self) -> [String; 4] {
        self.coeffs().map(|r| r.to_string())
    }

    pub fn from_strings(s: &[String]) -> Result<Self, ScalarError> {
        if s.len() != 4 {
            return Err(ScalarError::Parse(format!("{s:?}")));
        }
        let parse = |t: &String| -> Result<BigRational, ScalarError> {
            t.trim().parse::<BigRational>().map_err(|_| ScalarError::Parse(t.clone()))
        };
        Ok(Self::from_rationals([parse(&s[0])?, parse(&s[1])?, parse(&s[2])?, parse(&s[3])?]))
    }
}

fn add_small(a: &[i64; 4], da: i64, b: &[i64; 4], db: i64, sign: i128) -> Option<FieldElem> {
    let (da, db) = (da as i128, db as i128);
    let mut num = [0i128; 4];
    if da == db {
        for k in 0..4 {
            num[k] = (a[k] as i128).checked_add(sign * b[k] as i128)?;
        }
        return Some(normalize_wide(num, da));
    }
    for k in 0..4 {
        num[k] = (a[k] as i128 * db).checked_add(sign * (b[k] as i128 * da))?;
    }
    Some(normalize_wide(num, da.checked_mul(db)?))
}

fn mul_small(a: &[i64; 4], da: i64, b: &[i64; 4], db: i64) -> Option<FieldElem> {
    let p = |i: usize, j: usize| a[i] as i128 * b[j] as i128;
    let c0 = p(0, 0)
        .checked_add(p(1, 1).checked_mul(2)?)?
        .checked_add(p(2, 2).checked_mul(5)?)?
        .checked_add(p(3, 3).checked_mul(10)?)?;
    let c1 = p(0, 1).checked_add(p(1, 0))?.checked_add(p(2, 3).checked_add(p(3, 2))?.checked_mul(5)?)?;
    let c2 = p(0, 2).checked_add(p(2, 0))?.checked_add(p(1, 3).checked_add(p(3, 1))?.checked_mul(2)?)?;
    let c3 = p(0, 3).checked_add(p(3, 0))?.checked_add(p(1, 2))?.checked_add(p(2, 1))?;
    Some(normalize_wide([c0, c1, c2, c3], (da as i128).checked_mul(db as i128)?))
}

fn add_big(a: &FieldElem, b: &FieldElem, sign: i64) -> FieldElem {
    let (an, ad) = a.big_parts();
    let (bn, bd) = b.big_parts();
    let s = BigInt::from(sign);
    let num = [0, 1, 2, 3].map(|k| &an[k] * &bd + &s * &bn[k] * &ad);
    normalize_big(num, ad * bd)
}

fn mul_big(a: &FieldElem, b: &FieldElem) -> FieldElem {
    let (x, dx) = a.big_parts();
    let (y, dy) = b.big_parts();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let ten = BigInt::from(10);
    let c0 = &x[0] * &y[0] + &two * &x[1] * &y[1] + &five * &x[2] * &y[2] + &ten * &x[3] * &y[3];
    let c1 = &x[0] * &y[1] + &x[1] * &y[0] + &five * (&x[2] * &y[3] + &x[3] * &y[2]);
    let c2 = &x[0] * &y[2] + &x[2] * &y[0] + &two * (&x[1] * &y[3] + &x[3] * &y[1]);
    let c3 = &x[0] * &y[3] + &x[3] * &y[0] + &x[1] * &y[2] + &x[2] * &y[1];
    normalize_big([c0, c1, c2, c3], dx * dy)
}

impl Add for &FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: &FieldElem) -> FieldElem {
        if let (Repr::Small(a, da), Repr::Small(b, db)) = (&self.0, &rhs.0) {
            if let Some(r) = add_small(a, *da, b, *db, 1) {
                return r;
            }
        }
        add_big(self, rhs, 1)
    }
}

impl Sub for &FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: &FieldElem) -> FieldElem {
        if let (Repr::Small(a, da), Repr::Small(b, db)) = (&self.0, &rhs.0) {
            if let Some(r) = add_small(a, *da, b, *db, -1) {
                return r;
            }
        }
        add_big(self, rhs, -1)
    }
}

impl Mul for &FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: &FieldElem) -> FieldElem {
        if self.is_zero() || rhs.is_zero() {
            return FieldElem::zero();
        }
        if self.is_one() {
            return rhs.clone();
        }
        if rhs.is_one() {
            return self.clone();
        }
        if let (Repr::Small(a, da), Repr::Small(b, db)) = (&self.0, &rhs.0) {
            if let Some(r) = mul_small(a, *da, b, *db) {
                return r;
            }
        }
        mul_big(self, rhs)
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        self.map_signs([-1; 4])
    }
}

macro_rules! forward_owned {
    ($t:ty, $tr:ident, $f:ident) => {
        impl $tr for $t {
            type Output = $t;
            fn $f(self, rhs: $t) -> $t {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&$t> for $t {
            type Output = $t;
            fn $f(self, rhs: &$t) -> $t {
                (&self).$f(rhs)
            }
        }
    };
}

forward_owned!(FieldElem, Add, add);
forward_owned!(FieldElem, Sub, sub);
forward_owned!(FieldElem, Mul, mul);

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        -&self
    }
}

impl Default for FieldElem {
    fn default() -> Self {
        FieldElem::zero()
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "√2", "√5", "√10"];
        let mut first = true;
        for (k, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            let body = if k > 0 && c.abs().is_one() {
                format!("{}{}", if c.is_negative() { "-" } else { "" }, names[k])
            } else if k > 0 {
                format!("({s}){}", names[k])
            } else {
                s
            };
            if !first && !body.starts_with('-') {
                f.write_str("+")?;
            }
            f.write_str(&body)?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Floor of `sqrt(m) * 2^bits`.
fn scaled_sqrt_floor(m: u32, bits: u32) -> BigInt {
    (BigInt::from(m) << (2 * bits)).sqrt()
}

/// Sign of `x` in the real embedding: refine rational enclosures of `√2, √5,
/// √10` until the enclosure of `x` excludes zero.
pub fn field_sign(x: &FieldElem) -> i32 {
    if x.is_zero() {
        return 0;
    }
    let (num, _) = x.big_parts();
    if num[1].is_zero() && num[2].is_zero() && num[3].is_zero() {
        return if num[0].is_positive() { 1 } else { -1 };
    }
    let mut bits = 32u32;
    loop {
        let scale = BigInt::one() << bits;
        let mut lo = &num[0] * &scale;
        let mut hi = lo.clone();
        for (k, m) in [(1usize, 2u32), (2, 5), (3, 10)] {
            let c = &num[k];
            if c.is_zero() {
                continue;
            }
            let s_lo = scaled_sqrt_floor(m, bits);
            let s_hi = &s_lo + 1;
            if c.is_positive() {
                lo += c * &s_lo;
                hi += c * &s_hi;
            } else {
                lo += c * &s_hi;
                hi += c * &s_lo;
            }
        }
        if lo.is_positive() {
            return 1;
        }
        if hi.is_negative() {
            return -1;
        }
        bits *= 2;
    }
}

/// Quaternion `w + xi + yj + zk` over `F`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Quat(pub [FieldElem; 4]);

impl Quat {
    pub fn new(w: FieldElem, x: FieldElem, y: FieldElem, z: FieldElem) -> Self {
        Quat([w, x, y, z])
    }

    pub fn zero() -> Self {
        Quat::default()
    }

    pub fn one() -> Self {
        Quat::real(FieldElem::one())
    }

    pub fn i() -> Self {
        Quat([FieldElem::zero(), FieldElem::one(), FieldElem::zero(), FieldElem::zero()])
    }

    pub fn j() -> Self {
        Quat([FieldElem::zero(), FieldElem::zero(), FieldElem::one(), FieldElem::zero()])
    }

    pub fn k() -> Self {
        Quat([FieldElem::zero(), FieldElem::zero(), FieldElem::zero(), FieldElem::one()])
    }

    pub fn real(a: FieldElem) -> Self {
        Quat([a, FieldElem::zero(), FieldElem::zero(), FieldElem::zero()])
    }

    pub fn from_int(v: i64) -> Self {
        Quat::real(FieldElem::from_int(v))
    }

    /// Rational quaternion `(w + xi + yj + zk) / den`.
    pub fn from_ints(w: i64, x: i64, y: i64, z: i64, den: i64) -> Self {
        Quat([w, x, y, z].map(|v| FieldElem::from_ratio(v, den)))
    }

    /// The primitive cube root of unity `ω = (−1+i+j+k)/2`.
    pub fn omega() -> Self {
        Quat::from_ints(-1, 1, 1, 1, 2)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(FieldElem::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.0[0].is_one() && self.0[1..].iter().all(FieldElem::is_zero)
    }

    pub fn is_real(&self) -> bool {
        self.0[1..].iter().all(FieldElem::is_zero)
    }

    pub fn conj(&self) -> Self {
        Quat([self.0[0].clone(), -&self.0[1], -&self.0[2], -&self.0[3]])
    }

    /// `conj(q)·q = w² + x² + y² + z²`.
    pub fn norm(&self) -> FieldElem {
        let mut acc = FieldElem::zero();
        for c in &self.0 {
            if !c.is_zero() {
                acc = &acc + &(c * c);
            }
        }
        acc
    }

    pub fn scale(&self, s: &FieldElem) -> Self {
        Quat(self.0.clone().map(|c| &c * s))
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        let n = self.norm().inv()?;
        Ok(self.conj().scale(&n))
    }

    pub fn is_big(&self) -> bool {
        self.0.iter().any(FieldElem::is_big)
    }

    pub fn to_f64(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| self.0[k].to_f64())
    }
}

fn dot4(terms: [(&FieldElem, &FieldElem, bool); 4]) -> FieldElem {
    let mut acc = FieldElem::zero();
    for (a, b, neg) in terms {
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let p = a * b;
        acc = if neg { &acc - &p } else { &acc + &p };
    }
    acc
}

impl Mul for &Quat {
    type Output = Quat;
    fn mul(self, rhs: &Quat) -> Quat {
        let [a1, b1, c1, d1] = &self.0;
        let [a2, b2, c2, d2] = &rhs.0;
        if self.is_real() {
            return rhs.scale(a1);
        }
        if rhs.is_real() {
            return self.scale(a2);
        }
        Quat([
            dot4([(a1, a2, false), (b1, b2, true), (c1, c2, true), (d1, d2, true)]),
            dot4([(a1, b2, false), (b1, a2, false), (c1, d2, false), (d1, c2, true)]),
            dot4([(a1, c2, false), (b1, d2, true), (c1, a2, false), (d1, b2, false)]),
            dot4([(a1, d2, false), (b1, c2, false), (c1, b2, true), (d1, a2, false)]),
        ])
    }
}

impl Add for &Quat {
    type Output = Quat;
    fn add(self, rhs: &Quat) -> Quat {
        Quat([0, 1, 2, 3].map(|k| &self.0[k] + &rhs.0[k]))
    }
}

impl Sub for &Quat {
    type Output = Quat;
    fn sub(self, rhs: &Quat) -> Quat {
        Quat([0, 1, 2, 3].map(|k| &self.0[k] - &rhs.0[k]))
    }
}

impl Neg for &Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat(self.0.clone().map(|c| -&c))
    }
}

forward_owned!(Quat, Add, add);
forward_owned!(Quat, Sub, sub);
forward_owned!(Quat, Mul, mul);

impl Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        -&self
    }
}

pub fn quat_mul(a: &Quat, b: &Quat) -> Quat {
    a * b
}

pub fn quat_inv(a: &Quat) -> Result<Quat, ScalarError> {
    a.inv()
}

impl fmt::Display for Quat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let units = ["", "i", "j", "k"];
        let mut first = true;
        for (k, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            let simple = !s.chars().skip(1).any(|c| c == '+' || c == '-');
            let body = match (k, s.as_str()) {
                (0, _) => s.clone(),
                (_, "1") => units[k].to_string(),
                (_, "-1") => format!("-{}", units[k]),
                _ if simple => format!("{s}{}", units[k]),
                _ => format!("({s}){}", units[k]),
            };
            if !first && !body.starts_with('-') {
                f.write_str("+")?;
            }
            f.write_str(&body)?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Quat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
