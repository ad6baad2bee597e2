//! Dense integer polynomials in `t` and factorization over `Z[t]` for the
//! shapes that occur here (constant term 1, small degree).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("factorization needs constant term 1")]
    ConstantTermNotOne,
    #[error("bad coefficient {0:?}")]
    BadCoefficient(String),
}

/// Coefficients indexed by degree, without trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `1 + a t`.
    pub fn linear(a: i64) -> Self {
        Self::from_i64(&[1, a])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, d: usize) -> BigInt {
        self.coeffs.get(d).cloned().unwrap_or_default()
    }

    /// Coefficients as `i64`, when they all fit.
    pub fn to_i64_vec(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_i64(&self, x: i64) -> BigInt {
        self.eval(&BigInt::from(x))
    }

    pub fn product<'a>(it: impl IntoIterator<Item = &'a IntPoly>) -> IntPoly {
        it.into_iter().fold(IntPoly::one(), |acc, p| &acc * p)
    }

    /// Exact division by `other`, or `None` when it does not divide.
    pub fn div_exact(&self, other: &IntPoly) -> Option<IntPoly> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(IntPoly::zero());
        }
        if self.degree() < other.degree() {
            return None;
        }
        // divide from the low end, since divisors have unit constant term here
        // and low-end division keeps everything integral
        let b0 = other.coeff(0);
        if b0.is_zero() {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let qdeg = self.degree() - other.degree();
        let mut quot = vec![BigInt::zero(); qdeg + 1];
        for i in 0..=qdeg {
            let (qc, r) = rem[i].div_rem(&b0);
            if !r.is_zero() {
                return None;
            }
            for (j, bc) in other.coeffs.iter().enumerate() {
                rem[i + j] -= &qc * bc;
            }
            quot[i] = qc;
        }
        if rem.iter().all(Zero::is_zero) {
            Some(IntPoly::new(quot))
        } else {
            None
        }
    }

    pub fn has_positive_coeffs(&self) -> bool {
        self.coeffs.iter().all(Signed::is_positive)
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, o: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, o: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, o: &IntPoly) -> IntPoly {
        if self.is_zero() || o.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl Mul for IntPoly {
    type Output = IntPoly;
    fn mul(self, o: IntPoly) -> IntPoly {
        &self * &o
    }
}

impl Ord for IntPoly {
    fn cmp(&self, o: &Self) -> Ordering {
        self.coeffs.len().cmp(&o.coeffs.len()).then_with(|| self.coeffs.cmp(&o.coeffs))
    }
}

impl PartialOrd for IntPoly {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Renders as `1+63t+987t^2+925t^3`.
impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if c.is_negative() {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            let a = c.abs();
            if d == 0 || !a.is_one() {
                write!(f, "{a}")?;
            }
            match d {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{d}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Coef {
    Int(i64),
    Text(String),
}

/// JSON form: a coefficient array, low degree first. Coefficients that do
/// not fit in `i64` are written as decimal strings.
impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Coef> =
            self.coeffs.iter().map(|c| c.to_i64().map_or_else(|| Coef::Text(c.to_string()), Coef::Int)).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v: Vec<Coef> = Vec::deserialize(d)?;
        let coeffs = v
            .into_iter()
            .map(|c| match c {
                Coef::Int(x) => Ok(BigInt::from(x)),
                Coef::Text(s) => s.parse::<BigInt>().map_err(|_| PolyError::BadCoefficient(s)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Ok(IntPoly::new(coeffs))
    }
}

/// Result of [`factor_over_z`]. Factors are sorted by degree, then by
/// coefficients; `unverified` marks residual factors of degree ≥ 6 whose
/// irreducibility was not decided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<(IntPoly, usize)>,
    pub unverified: Vec<IntPoly>,
}

impl Factorization {
    pub fn expand(&self) -> IntPoly {
        let mut acc = IntPoly::one();
        for (f, m) in &self.factors {
            for _ in 0..*m {
                acc = &acc * f;
            }
        }
        acc
    }

    pub fn is_complete(&self) -> bool {
        self.unverified.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.factors.iter().map(|(f, _)| f.degree()).max().unwrap_or(0)
    }

    pub fn count_of_degree(&self, d: usize) -> usize {
        self.factors.iter().filter(|(f, _)| f.degree() == d).map(|(_, m)| m).sum()
    }
}

/// Renders as `(1+t)(1+9t)(1+13t)(1+13t)`, repeating factors by multiplicity.
impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (p, m) in &self.factors {
            for _ in 0..*m {
                write!(f, "({p})")?;
            }
        }
        Ok(())
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut out = Vec::new();
    if n.is_zero() {
        return out;
    }
    let r = n.sqrt();
    let mut d = BigInt::one();
    while d <= r {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            let e = &n / &d;
            if e != d {
                out.push(e);
            }
        }
        d += 1;
    }
    out.sort();
    out
}

/// Factor `p` (constant term 1) into irreducibles over `Z[t]`.
///
/// Linear factors `1 + ft` are found by divisor search on the reversed
/// polynomial, which is monic. A residual of degree 2 or 3 with no linear
/// factor is irreducible. Residuals of degree 4 or 5 are searched for a
/// quadratic factor `1 + at + bt^2`, using that `b` divides the leading
/// coefficient and `1 ± a + b` divides `p(±1)`. Anything of degree ≥ 6 left
/// after that is reported as unverified.
pub fn factor_over_z(p: &IntPoly) -> Result<Factorization, PolyError> {
    if p.coeff(0) != BigInt::one() {
        return Err(PolyError::ConstantTermNotOne);
    }
    let mut rest = p.clone();
    let mut found: Vec<IntPoly> = Vec::new();

    // linear factors
    'linear: loop {
        if rest.degree() == 0 {
            break;
        }
        let lead = rest.coeff(rest.degree());
        for d in divisors(&lead) {
            for f in [d.clone(), -d] {
                let cand = IntPoly::new(vec![BigInt::one(), f]);
                if let Some(q) = rest.div_exact(&cand) {
                    found.push(cand);
                    rest = q;
                    continue 'linear;
                }
            }
        }
        break;
    }

    // quadratic factors of residuals of degree 4 and 5
    'quad: while (4..=5).contains(&rest.degree()) {
        let lead = rest.coeff(rest.degree());
        let at1 = rest.eval_i64(1);
        let atm1 = rest.eval_i64(-1);
        for bd in divisors(&lead) {
            for b in [bd.clone(), -bd] {
                for s in divisors(&at1) {
                    for s in [s.clone(), -s] {
                        // 1 + a + b = s
                        let a: BigInt = &s - BigInt::one() - &b;
                        let other: BigInt = BigInt::one() - &a + &b;
                        if other.is_zero() || !(&atm1 % &other).is_zero() {
                            continue;
                        }
                        let cand = IntPoly::new(vec![BigInt::one(), a, b.clone()]);
                        if cand.degree() != 2 {
                            continue;
                        }
                        if let Some(q) = rest.div_exact(&cand) {
                            found.push(cand);
                            rest = q;
                            continue 'quad;
                        }
                    }
                }
            }
        }
        break;
    }

    let mut unverified = Vec::new();
    if rest.degree() >= 6 {
        unverified.push(rest.clone());
    }
    if rest.degree() >= 1 {
        found.push(rest);
    }
    found.sort();
    let mut factors: Vec<(IntPoly, usize)> = Vec::new();
    for f in found {
        match factors.last_mut() {
            Some((g, m)) if *g == f => *m += 1,
            _ => factors.push((f, 1)),
        }
    }
    Ok(Factorization { factors, unverified })
}

/// Whether `1 + at + bt^2` has a non-square discriminant.
pub fn quadratic_is_irreducible(q: &IntPoly) -> bool {
    if q.degree() != 2 {
        return false;
    }
    let disc = q.coeff(1) * q.coeff(1) - BigInt::from(4) * q.coeff(0) * q.coeff(2);
    if disc.is_negative() {
        return true;
    }
    let r = disc.sqrt();
    &r * &r != disc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64(c)
    }

    #[test]
    fn expansion_and_eval() {
        let prod = IntPoly::product(&[IntPoly::linear(7), IntPoly::linear(15), IntPoly::linear(5)]);
        assert_eq!(prod, p(&[1, 27, 215, 525]));
        assert_eq!(p(&[1, 72, 1722, 16496, 64653]).eval_i64(1), BigInt::from(82944));
        assert_eq!(p(&[1, 63, 987, 925]).eval_i64(-1), BigInt::zero());
        assert_eq!(p(&[1, 0, 0]).degree(), 0);
    }

    #[test]
    fn rendering() {
        assert_eq!(p(&[1, 63, 987, 925]).to_string(), "1+63t+987t^2+925t^3");
        assert_eq!(p(&[1, -1, 0, 1]).to_string(), "1-t+t^3");
        assert_eq!(IntPoly::zero().to_string(), "0");
        let json = serde_json::to_string(&p(&[1, 9, 24, 16])).unwrap();
        assert_eq!(json, "[1,9,24,16]");
        let back: IntPoly = serde_json::from_str("[1,\"123456789012345678901234567890\"]").unwrap();
        assert_eq!(back.coeff(1).to_string(), "123456789012345678901234567890");
    }

    #[test]
    fn factor_examples() {
        let f = factor_over_z(&p(&[1, 63, 987, 925])).unwrap();
        assert_eq!(f.to_string(), "(1+t)(1+25t)(1+37t)");
        let f = factor_over_z(&p(&[1, 72, 1722, 14176, 12525])).unwrap();
        assert_eq!(f.to_string(), "(1+t)(1+25t)(1+46t+501t^2)");
        assert!(quadratic_is_irreducible(&p(&[1, 46, 501])));
        assert_eq!(factor_over_z(&p(&[1, 1])).unwrap().to_string(), "(1+t)");
        let f = factor_over_z(&p(&[1, 36, 438, 1924, 1521])).unwrap();
        assert_eq!(f.to_string(), "(1+t)(1+9t)(1+13t)(1+13t)");
        assert_eq!(f.factors.len(), 3);
        assert!(factor_over_z(&p(&[2, 1])).is_err());
    }

    #[test]
    fn residual_cubic_and_quartic() {
        // (1+11t)(1+25t+163t^2+387t^3)
        let f = factor_over_z(&p(&[1, 36, 438, 2180, 4257])).unwrap();
        assert_eq!(f.factors.len(), 2);
        assert_eq!(f.factors[1].0, p(&[1, 25, 163, 387]));
        // product of two irreducible quadratics
        let g = &p(&[1, 1, 1]) * &p(&[1, 3, 5]);
        let f = factor_over_z(&(&g * &IntPoly::linear(2))).unwrap();
        assert_eq!(f.to_string(), "(1+2t)(1+t+t^2)(1+3t+5t^2)");
        // irreducible quartic stays whole
        let f = factor_over_z(&p(&[1, 0, 0, 0, 2])).unwrap();
        assert_eq!(f.factors, vec![(p(&[1, 0, 0, 0, 2]), 1)]);
        assert!(f.is_complete());
    }

    #[test]
    fn division() {
        let a = &p(&[1, 2]) * &p(&[1, 3, 7]);
        assert_eq!(a.div_exact(&p(&[1, 2])), Some(p(&[1, 3, 7])));
        assert_eq!(a.div_exact(&p(&[1, 5])), None);
    }
}
