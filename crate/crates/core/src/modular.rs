//! Reduction of `H_F` modulo the prime `p = 2^61 − 1`.
//!
//! `p ≡ 7 (mod 8)` and `p ≡ 1 (mod 5)`, so 2 and 5 are squares mod `p` and
//! `F → F_p` is a ring map on `p`-integral elements. A quaternionic vector in
//! `H^n` is realized as a vector in `F_p^{4n}`; a right `H`-subspace of
//! dimension `d` realizes as an `F_p`-subspace of dimension `4d` when the
//! reduction is regular. Callers use this only as a filter and confirm every
//! positive answer exactly; a rank drop signals a bad reduction.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::scalars::{FieldElem, Quat};

pub const P: u64 = (1u64 << 61) - 1;

#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P - b
    }
}

#[inline]
pub fn neg(a: u64) -> u64 {
    if a == 0 {
        0
    } else {
        P - a
    }
}

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    let t = a as u128 * b as u128;
    let lo = (t as u64) & P;
    let hi = (t >> 61) as u64;
    add(lo, hi)
}

pub fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    r
}

pub fn inv(a: u64) -> Option<u64> {
    if a == 0 {
        None
    } else {
        Some(pow(a, P - 2))
    }
}

fn from_i64(v: i64) -> u64 {
    let r = v.rem_euclid(P as i64) as u64;
    r % P
}

fn from_bigint(v: &BigInt) -> u64 {
    let m = BigInt::from(P);
    let r = ((v % &m) + &m) % &m;
    r.to_u64().expect("residue fits")
}

struct Roots {
    s2: u64,
    s5: u64,
    s10: u64,
}

fn roots() -> &'static Roots {
    static R: OnceLock<Roots> = OnceLock::new();
    R.get_or_init(|| {
        let e = (P + 1) / 4;
        let s2 = pow(2, e);
        let s5 = pow(5, e);
        assert_eq!(mul(s2, s2), 2);
        assert_eq!(mul(s5, s5), 5);
        Roots { s2, s5, s10: mul(s2, s5) }
    })
}

/// Image of `x`, or `None` when its denominator vanishes mod `p`.
pub fn reduce_field(x: &FieldElem) -> Option<u64> {
    let r = roots();
    let (num, den) = match x.small_parts() {
        Some((n, d)) => (n.map(from_i64), from_i64(d)),
        None => {
            let (n, d) = x.int_parts();
            (n.map(|v| from_bigint(&v)), from_bigint(&d))
        }
    };
    let dinv = inv(den)?;
    let v = add(add(num[0], mul(num[1], r.s2)), add(mul(num[2], r.s5), mul(num[3], r.s10)));
    Some(mul(v, dinv))
}

pub type ModQuat = [u64; 4];

pub fn reduce_quat(q: &Quat) -> Option<ModQuat> {
    Some([reduce_field(&q.0[0])?, reduce_field(&q.0[1])?, reduce_field(&q.0[2])?, reduce_field(&q.0[3])?])
}

#[inline]
pub fn qmul(a: &ModQuat, b: &ModQuat) -> ModQuat {
    let m = |x: usize, y: usize| mul(a[x], b[y]);
    [
        sub(sub(m(0, 0), m(1, 1)), add(m(2, 2), m(3, 3))),
        sub(add(add(m(0, 1), m(1, 0)), m(2, 3)), m(3, 2)),
        add(sub(m(0, 2), m(1, 3)), add(m(2, 0), m(3, 1))),
        add(sub(add(m(0, 3), m(1, 2)), m(2, 1)), m(3, 0)),
    ]
}

#[inline]
pub fn qadd(a: &ModQuat, b: &ModQuat) -> ModQuat {
    [add(a[0], b[0]), add(a[1], b[1]), add(a[2], b[2]), add(a[3], b[3])]
}

pub const QUNITS: [ModQuat; 4] = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];

/// Realize `v·u` in `F_p^{4n}` for a quaternionic vector `v` already reduced.
pub fn realize_times(v: &[ModQuat], u: &ModQuat) -> Vec<u64> {
    let mut out = Vec::with_capacity(4 * v.len());
    for q in v {
        out.extend_from_slice(&qmul(q, u));
    }
    out
}

/// An `F_p`-row space kept in reduced echelon form.
#[derive(Clone, Debug, Default)]
pub struct ModEchelon {
    pub rows: Vec<Vec<u64>>,
    pub pivots: Vec<usize>,
}

impl ModEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` in place against the rows; the result vanishes at pivots.
    pub fn reduce(&self, v: &mut [u64]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if c != 0 {
                let nc = neg(c);
                for (x, &r) in v.iter_mut().zip(row.iter()) {
                    if r != 0 {
                        *x = add(*x, mul(nc, r));
                    }
                }
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Insert `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        let Some(p) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let s = inv(w[p]).expect("nonzero pivot");
        for x in w.iter_mut() {
            *x = mul(*x, s);
        }
        for row in self.rows.iter_mut() {
            let c = row[p];
            if c != 0 {
                let nc = neg(c);
                for (x, &r) in row.iter_mut().zip(w.iter()) {
                    if r != 0 {
                        *x = add(*x, mul(nc, r));
                    }
                }
            }
        }
        self.rows.push(w);
        self.pivots.push(p);
        true
    }
}

/// Rank of a square `F_p` matrix given row-major.
pub fn rank_of(mut m: Vec<Vec<u64>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, piv);
        let s = inv(m[r][c]).expect("nonzero");
        for x in m[r].iter_mut() {
            *x = mul(*x, s);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let nc = neg(row[c]);
            for (x, &y) in row.iter_mut().zip(pivot_row.iter()) {
                if y != 0 {
                    *x = add(*x, mul(nc, y));
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}
