//! Finite matrix groups over `H_F`: closure, orders, the fixed-space
//! codimension census, and the formulas for the family `W_n(Γ, Δ)`.
//!
//! Closure hashes each element by its reduction mod `p = 2^61 − 1`. The
//! reduction is injective on a finite matrix group with `p`-integral entries
//! (its kernel is torsion free), so this is exact deduplication. Exact
//! matrices are kept only for the current breadth-first layer.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::geometry::{orth_complement, reflect_with, span, Line, Subspace, Vector};
use crate::modular::{self, ModQuat};
use crate::poly::IntPoly;
use crate::scalars::Quat;
use crate::systems::{GammaGroup, LineSystem};

pub const DEFAULT_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group order exceeds cap of {0}")]
    CapExceeded(usize),
    #[error("matrix entry has no reduction mod p")]
    BadReduction,
    #[error("matrix is not in W_n(Γ): {0}")]
    NotInGroup(String),
    #[error("generators of different sizes")]
    DimensionMismatch,
}

/// An `n × n` quaternion matrix acting on column vectors, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UnitaryMatrix {
    n: usize,
    e: Vec<Quat>,
}

impl fmt::Debug for UnitaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl UnitaryMatrix {
    pub fn identity(n: usize) -> Self {
        let mut e = vec![Quat::zero(); n * n];
        for i in 0..n {
            e[i * n + i] = Quat::one();
        }
        UnitaryMatrix { n, e }
    }

    pub fn from_rows(rows: Vec<Vec<Quat>>) -> Self {
        let n = rows.len();
        let e: Vec<Quat> = rows.into_iter().flatten().collect();
        assert_eq!(e.len(), n * n, "square matrix");
        UnitaryMatrix { n, e }
    }

    /// The matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vector]) -> Self {
        let n = cols.len();
        let mut e = vec![Quat::zero(); n * n];
        for (c, v) in cols.iter().enumerate() {
            for r in 0..n {
                e[r * n + c] = v.0[r].clone();
            }
        }
        UnitaryMatrix { n, e }
    }

    /// Monomial matrix sending `e_c` to `e_{perm[c]}·entries[c]`.
    pub fn monomial(perm: &[usize], entries: &[Quat]) -> Self {
        let n = perm.len();
        let mut e = vec![Quat::zero(); n * n];
        for c in 0..n {
            e[perm[c] * n + c] = entries[c].clone();
        }
        UnitaryMatrix { n, e }
    }

    /// The reflection fixing `l^⊥` and acting on `l` by `δ`.
    pub fn reflection(l: &Line, delta: &Quat) -> Self {
        let n = l.dim();
        let cols: Vec<Vector> = (0..n).map(|c| reflect_with(l, delta, &Vector::unit(n, c))).collect();
        Self::from_columns(&cols)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &Quat {
        &self.e[r * self.n + c]
    }

    pub fn mul(&self, o: &UnitaryMatrix) -> UnitaryMatrix {
        let n = self.n;
        let mut e = vec![Quat::zero(); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let b = o.get(k, c);
                    if !b.is_zero() {
                        e[r * n + c] = &e[r * n + c] + &(a * b);
                    }
                }
            }
        }
        UnitaryMatrix { n, e }
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        Vector(
            (0..self.n)
                .map(|r| {
                    let mut acc = Quat::zero();
                    for c in 0..self.n {
                        acc = &acc + &(self.get(r, c) * &v.0[c]);
                    }
                    acc
                })
                .collect(),
        )
    }

    pub fn conj_transpose(&self) -> UnitaryMatrix {
        let n = self.n;
        let mut e = vec![Quat::zero(); n * n];
        for r in 0..n {
            for c in 0..n {
                e[c * n + r] = self.get(r, c).conj();
            }
        }
        UnitaryMatrix { n, e }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// `M* M = I`.
    pub fn is_unitary(&self) -> bool {
        self.conj_transpose().mul(self).is_identity()
    }

    /// For unitary matrices, the inverse is the conjugate transpose.
    pub fn inverse(&self) -> UnitaryMatrix {
        self.conj_transpose()
    }

    /// The right-linear span of the rows of `conj(M − I)`, whose complement
    /// is the fixed space.
    fn moved_space(&self) -> Subspace {
        let n = self.n;
        let rows: Vec<Vector> = (0..n)
            .map(|r| {
                Vector(
                    (0..n)
                        .map(|c| {
                            let x = if r == c { self.get(r, c) - &Quat::one() } else { self.get(r, c).clone() };
                            x.conj()
                        })
                        .collect(),
                )
            })
            .collect();
        span(&rows).expect("n ≥ 1")
    }

    /// `{v : Mv = v}`.
    pub fn fixed_space(&self) -> Subspace {
        orth_complement(&self.moved_space())
    }

    /// `H`-codimension of the fixed space, the rank of `M − I`.
    pub fn fixed_codim(&self) -> usize {
        self.moved_space().rank()
    }

    fn reduce(&self) -> Option<Vec<ModQuat>> {
        self.e.iter().map(modular::reduce_quat).collect()
    }
}

fn mod_mul(a: &[ModQuat], b: &[ModQuat], n: usize) -> Vec<ModQuat> {
    let mut out = vec![[0u64; 4]; n * n];
    for r in 0..n {
        for k in 0..n {
            let x = &a[r * n + k];
            if *x == [0; 4] {
                continue;
            }
            for c in 0..n {
                let y = &b[k * n + c];
                if *y != [0; 4] {
                    out[r * n + c] = modular::qadd(&out[r * n + c], &modular::qmul(x, y));
                }
            }
        }
    }
    out
}

fn mod_identity(n: usize) -> Vec<ModQuat> {
    let mut e = vec![[0u64; 4]; n * n];
    for i in 0..n {
        e[i * n + i] = [1, 0, 0, 0];
    }
    e
}

/// Breadth-first closure of reduced generators; returns the element keys.
fn mod_closure(gens: &[Vec<ModQuat>], n: usize, cap: usize) -> Result<HashSet<Vec<ModQuat>>, GroupError> {
    let id = mod_identity(n);
    let mut seen: HashSet<Vec<ModQuat>> = HashSet::from([id.clone()]);
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in gens {
                let y = mod_mul(x, g, n);
                if !seen.contains(&y) {
                    if seen.len() >= cap {
                        return Err(GroupError::CapExceeded(cap));
                    }
                    seen.insert(y.clone());
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    Ok(seen)
}

/// A finite group generated by unitary matrices, with its order and the
/// distribution of fixed-space codimensions.
#[derive(Clone, Debug)]
pub struct GroupEnum {
    n: usize,
    generators: Vec<UnitaryMatrix>,
    order: usize,
}

impl GroupEnum {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// A generating subset of the input generators.
    pub fn generators(&self) -> &[UnitaryMatrix] {
        &self.generators
    }

    /// Visit every element exactly once, as an exact matrix.
    pub fn for_each_element(&self, mut f: impl FnMut(&UnitaryMatrix)) {
        let n = self.n;
        let red: Vec<Vec<ModQuat>> = self.generators.iter().map(|g| g.reduce().expect("checked")).collect();
        let id = UnitaryMatrix::identity(n);
        let mut seen: HashSet<Vec<ModQuat>> = HashSet::from([mod_identity(n)]);
        f(&id);
        let mut frontier = vec![(id, mod_identity(n))];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (x, xr) in &frontier {
                for (g, gr) in self.generators.iter().zip(&red) {
                    let yr = mod_mul(xr, gr, n);
                    if seen.insert(yr.clone()) {
                        let y = x.mul(g);
                        f(&y);
                        next.push((y, yr));
                    }
                }
            }
            frontier = next;
        }
    }

    /// `Σ_w t^{codim fix(w)}`.
    pub fn codim_census(&self) -> IntPoly {
        let mut counts = vec![0i64; self.n + 1];
        self.for_each_element(|w| counts[w.fixed_codim()] += 1);
        IntPoly::from_i64(&counts)
    }
}

/// Closure of `gens` under multiplication. Only generators that enlarge the
/// group are kept, which keeps later enumeration cheap.
pub fn close_group(gens: &[UnitaryMatrix], cap: usize) -> Result<GroupEnum, GroupError> {
    let n = gens.first().map_or(0, UnitaryMatrix::dim);
    if gens.iter().any(|g| g.dim() != n) {
        return Err(GroupError::DimensionMismatch);
    }
    let mut kept: Vec<UnitaryMatrix> = Vec::new();
    let mut kept_red: Vec<Vec<ModQuat>> = Vec::new();
    let mut elements: HashSet<Vec<ModQuat>> = HashSet::from([mod_identity(n)]);
    for g in gens {
        let r = g.reduce().ok_or(GroupError::BadReduction)?;
        if elements.contains(&r) {
            continue;
        }
        kept.push(g.clone());
        kept_red.push(r);
        elements = mod_closure(&kept_red, n, cap)?;
    }
    Ok(GroupEnum { n, generators: kept, order: elements.len() })
}

/// Reflections of a line system, one per line and eigenvalue.
pub fn reflection_generators(ls: &LineSystem) -> Vec<UnitaryMatrix> {
    let mut out = Vec::new();
    for (i, l) in ls.lines().iter().enumerate() {
        for d in ls.eigenvalues(i) {
            out.push(UnitaryMatrix::reflection(l, d));
        }
    }
    out
}

/// The reflection group of a line system.
pub fn reflection_group(ls: &LineSystem, cap: usize) -> Result<GroupEnum, GroupError> {
    close_group(&reflection_generators(ls), cap)
}

/// Order of the group generated by the reflections in the given lines of `ls`.
pub fn parabolic_group_order(ls: &LineSystem, lines: &[usize], cap: usize) -> Result<usize, GroupError> {
    let mut gens = Vec::new();
    for &i in lines {
        for d in ls.eigenvalues(i) {
            gens.push(UnitaryMatrix::reflection(ls.line(i), d));
        }
    }
    if gens.is_empty() {
        return Ok(1);
    }
    Ok(close_group(&gens, cap)?.order())
}

/// `∏_{k=1}^{n−1}(1 + (km−1)t) · (1 + (np−1)t)` for `|Γ| = m`, `|Δ| = p`.
pub fn family_codim_poly(m: u64, p: u64, n: u64) -> IntPoly {
    let mut acc = IntPoly::one();
    if n == 0 {
        return acc;
    }
    for k in 1..n {
        acc = &acc * &IntPoly::linear((k * m) as i64 - 1);
    }
    &acc * &IntPoly::linear((n * p) as i64 - 1)
}

/// `∏_{k=0}^{n−1}(1 + (1+km)t)`, the Poincaré polynomial of `W_n(Γ)` with
/// `|Γ| = m`, which is also that of `W_n(Γ, Δ)` whenever `Δ ≠ 1`.
pub fn family_poincare_poly(m: u64, n: u64) -> IntPoly {
    let mut acc = IntPoly::one();
    for k in 0..n {
        acc = &acc * &IntPoly::linear(1 + (k * m) as i64);
    }
    acc
}

/// Poincaré polynomial of `W_n(C_m, 1) = G(m,m,n)`:
/// `(1+t) ∏_{k=1}^{n−2}(1 + (km+1)t) · (1 + (n−1)(m−1)t)`.
pub fn gmmn_poincare_poly(m: u64, n: u64) -> IntPoly {
    if n <= 1 {
        return IntPoly::one();
    }
    let mut acc = IntPoly::linear(1);
    for k in 1..n - 1 {
        acc = &acc * &IntPoly::linear((k * m + 1) as i64);
    }
    &acc * &IntPoly::linear(((n - 1) * (m - 1)) as i64)
}

fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            cur.push(k);
            go(n - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * k)
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Number of permutations of `n` letters with cycle type `λ`.
fn cycle_type_count(lambda: &[usize]) -> BigInt {
    let n: usize = lambda.iter().sum();
    let mut denom = BigInt::one();
    let mut mult: HashMap<usize, usize> = HashMap::new();
    for &l in lambda {
        denom *= l;
        *mult.entry(l).or_insert(0) += 1;
    }
    for &m in mult.values() {
        denom *= factorial(m);
    }
    factorial(n) / denom
}

/// Counts `(a(k), b(k))` of sequences of `k` non-identity elements of a group
/// of order `m` whose product is a fixed non-identity element, respectively
/// the identity.
pub fn nonidentity_product_counts(m: u64, k: usize) -> (BigInt, BigInt) {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..k {
        let na = &b + BigInt::from(m as i64 - 2) * &a;
        let nb = BigInt::from(m as i64 - 1) * &a;
        a = na;
        b = nb;
    }
    (a, b)
}

/// `c_W(t)` for `W_n(Γ, Δ)` by counting cycle types and cycle products.
pub fn family_codim_census(gamma: &GammaGroup, n: usize) -> IntPoly {
    let m = gamma.order() as u64;
    let dsize = gamma.delta_order() as i64;
    let mut coeffs = vec![BigInt::zero(); n + 1];
    for lambda in partitions(n) {
        let l = lambda.len();
        let c = cycle_type_count(&lambda);
        let g_pow = BigInt::from(m).pow((n - l) as u32);
        for d in 0..=l {
            // Σ_{δ∈Δ} f(δ, l−d) = b + (|Δ|−1) a
            let (a, b) = nonidentity_product_counts(m, l - d);
            let s = b + a * (dsize - 1);
            coeffs[n - d] += &c * binomial(l, d) * &g_pow * s;
        }
    }
    IntPoly::new(coeffs)
}

/// Factor `w ∈ W_n(Γ)` as `w = x·v` with `v` fixing `e_n` and `x` one of
/// `1`, `γ_n = diag(1,…,1,γ)`, or the involution exchanging `e_n` and
/// `e_m·γ`.
pub fn product_decomposition(
    w: &UnitaryMatrix,
    gamma: &GammaGroup,
) -> Result<(UnitaryMatrix, UnitaryMatrix), GroupError> {
    let n = w.dim();
    let mut perm = vec![usize::MAX; n];
    for (c, slot) in perm.iter_mut().enumerate() {
        let nz: Vec<usize> = (0..n).filter(|&r| !w.get(r, c).is_zero()).collect();
        if nz.len() != 1 {
            return Err(GroupError::NotInGroup("not monomial".into()));
        }
        if !gamma.contains(w.get(nz[0], c)) {
            return Err(GroupError::NotInGroup(format!("entry {} not in Γ", w.get(nz[0], c))));
        }
        *slot = nz[0];
    }
    let mut used = vec![false; n];
    for &r in &perm {
        if used[r] {
            return Err(GroupError::NotInGroup("not a permutation".into()));
        }
        used[r] = true;
    }
    let last = n - 1;
    let m = perm[last];
    let g = w.get(m, last).clone();
    let x = if m == last {
        if g.is_one() {
            return Ok((UnitaryMatrix::identity(n), w.clone()));
        }
        let mut entries = vec![Quat::one(); n];
        entries[last] = g;
        UnitaryMatrix::monomial(&(0..n).collect::<Vec<_>>(), &entries)
    } else {
        let mut p: Vec<usize> = (0..n).collect();
        p.swap(m, last);
        let mut entries = vec![Quat::one(); n];
        entries[last] = g.clone();
        entries[m] = g.inv().expect("unit");
        UnitaryMatrix::monomial(&p, &entries)
    };
    let v = x.inverse().mul(w);
    Ok((x, v))
}

/// Group orders not obtained by enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderRecord {
    pub system: &'static str,
    pub order: u64,
    pub source: &'static str,
}

pub const ORDER_REGISTRY: &[OrderRecord] = &[
    OrderRecord { system: "Q", order: 12096, source: "published" },
    OrderRecord { system: "R", order: 1209600, source: "published" },
    OrderRecord { system: "S1", order: 6912, source: "sum of published c_W coefficients" },
    OrderRecord { system: "S2", order: 82944, source: "sum of published c_W coefficients" },
    OrderRecord { system: "S3", order: 3317760, source: "published" },
    OrderRecord { system: "T", order: 2592000, source: "published" },
    OrderRecord { system: "U", order: 27371520, source: "published" },
];

pub fn registry_order(system: &str) -> Option<u64> {
    ORDER_REGISTRY.iter().find(|r| r.system == system).map(|r| r.order)
}
