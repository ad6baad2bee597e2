//! Linear algebra in the right `H`-vector space `H^n` with the form
//! `⟨x, y⟩ = Σ conj(x_i) y_i`.
//!
//! Scalars act on the right throughout: spans are right spans and echelon
//! row operations multiply rows on the right.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalars::{FieldElem, Quat, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero vector does not span a line")]
    ZeroVector,
    #[error("angle between a line and itself")]
    IdenticalLines,
    #[error("empty vector list")]
    Empty,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Vector(pub Vec<Quat>);

impl Vector {
    pub fn zero(n: usize) -> Self {
        Vector(vec![Quat::zero(); n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.0[i] = Quat::one();
        v
    }

    pub fn from_ints(vals: &[i64]) -> Self {
        Vector(vals.iter().map(|&v| Quat::from_int(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Quat::is_zero)
    }

    /// `v·q`.
    pub fn mul_right(&self, q: &Quat) -> Self {
        Vector(self.0.iter().map(|x| x * q).collect())
    }

    /// `q·v` (entrywise left multiplication; not a vector-space operation).
    pub fn mul_left(&self, q: &Quat) -> Self {
        Vector(self.0.iter().map(|x| q * x).collect())
    }

    pub fn scale(&self, s: &FieldElem) -> Self {
        Vector(self.0.iter().map(|x| x.scale(s)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self − w·q` without materializing `w·q` for zero entries.
    pub fn sub_scaled(&self, w: &Self, q: &Quat) -> Self {
        Vector(self.0.iter().zip(&w.0).map(|(a, b)| if b.is_zero() { a.clone() } else { a - &(b * q) }).collect())
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        self.0.iter().position(|q| !q.is_zero())
    }

    /// Direct sum embedding: `self` followed by `other`.
    pub fn concat(&self, other: &Self) -> Self {
        Vector(self.0.iter().chain(&other.0).cloned().collect())
    }

    pub fn to_f64(&self) -> Vec<[f64; 4]> {
        self.0.iter().map(Quat::to_f64).collect()
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{q}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn check_dims(u: &Vector, v: &Vector) -> Result<(), GeometryError> {
    if u.dim() != v.dim() {
        return Err(GeometryError::DimensionMismatch(u.dim(), v.dim()));
    }
    Ok(())
}

fn herm_unchecked(u: &Vector, v: &Vector) -> Quat {
    let mut acc = Quat::zero();
    for (a, b) in u.0.iter().zip(&v.0) {
        if a.is_zero() || b.is_zero() {
            continue;
        }
        acc = &acc + &(&a.conj() * b);
    }
    acc
}

/// `⟨u, v⟩ = Σ conj(u_i) v_i`.
pub fn herm_form(u: &Vector, v: &Vector) -> Result<Quat, GeometryError> {
    check_dims(u, v)?;
    Ok(herm_unchecked(u, v))
}

/// `⟨v, v⟩` as a field element.
pub fn norm2(v: &Vector) -> FieldElem {
    let mut acc = FieldElem::zero();
    for q in &v.0 {
        if !q.is_zero() {
            acc = &acc + &q.norm();
        }
    }
    acc
}

/// A line of `H^n`, represented with first nonzero coordinate equal to 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Line {
    rep: Vector,
}

impl Line {
    pub fn new(v: Vector) -> Result<Self, GeometryError> {
        let p = v.first_nonzero().ok_or(GeometryError::ZeroVector)?;
        if v.0[p].is_one() {
            return Ok(Line { rep: v });
        }
        let s = v.0[p].inv()?;
        let mut rep = v.mul_right(&s);
        rep.0[p] = Quat::one();
        Ok(Line { rep })
    }

    pub fn from_ints(vals: &[i64]) -> Self {
        Line::new(Vector::from_ints(vals)).expect("nonzero vector")
    }

    pub fn rep(&self) -> &Vector {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rep)
    }
}

impl fmt::Debug for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Line{}", self.rep)
    }
}

/// The five angles that occur between lines of the catalog systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AngleClass {
    Right,
    Pi3,
    Pi4,
    Pi5,
    TwoPi5,
}

impl AngleClass {
    pub const ALL: [AngleClass; 5] =
        [AngleClass::Right, AngleClass::Pi3, AngleClass::Pi4, AngleClass::Pi5, AngleClass::TwoPi5];

    pub fn cos2(self) -> FieldElem {
        match self {
            AngleClass::Right => FieldElem::zero(),
            AngleClass::Pi3 => FieldElem::from_ratio(1, 4),
            AngleClass::Pi4 => FieldElem::from_ratio(1, 2),
            AngleClass::Pi5 => FieldElem::from_parts(3, 0, 1, 0, 8),
            AngleClass::TwoPi5 => FieldElem::from_parts(3, 0, -1, 0, 8),
        }
    }

    /// Order of the product of the two order-2 reflections.
    pub fn product_order(self) -> u64 {
        match self {
            AngleClass::Right => 2,
            AngleClass::Pi3 => 3,
            AngleClass::Pi4 => 4,
            AngleClass::Pi5 | AngleClass::TwoPi5 => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AngleClass::Right => "RIGHT",
            AngleClass::Pi3 => "PI_3",
            AngleClass::Pi4 => "PI_4",
            AngleClass::Pi5 => "PI_5",
            AngleClass::TwoPi5 => "TWO_PI_5",
        }
    }

    pub fn from_cos2(c: &FieldElem) -> Option<AngleClass> {
        AngleClass::ALL.into_iter().find(|a| a.cos2() == *c)
    }
}

impl fmt::Display for AngleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `cos²` of the angle between two lines.
pub fn cos2(l1: &Line, l2: &Line) -> Result<FieldElem, GeometryError> {
    let ip = herm_form(l1.rep(), l2.rep())?;
    let den = &norm2(l1.rep()) * &norm2(l2.rep());
    Ok(ip.norm().div(&den)?)
}

/// The catalog class of the angle between two distinct lines, `None` for an
/// angle outside the catalog.
pub fn angle_class(l1: &Line, l2: &Line) -> Result<Option<AngleClass>, GeometryError> {
    check_dims(l1.rep(), l2.rep())?;
    if l1 == l2 {
        return Err(GeometryError::IdenticalLines);
    }
    Ok(AngleClass::from_cos2(&cos2(l1, l2)?))
}

/// The order-2 reflection in `l` applied to `v`.
pub fn reflect(l: &Line, v: &Vector) -> Vector {
    let a = l.rep();
    let ip = herm_unchecked(a, v);
    if ip.is_zero() {
        return v.clone();
    }
    let c = FieldElem::from_int(2).div(&norm2(a)).expect("nonzero line");
    v.sub_scaled(a, &ip.scale(&c))
}

/// The reflection fixing `l^⊥` and acting on `l` by `δ`: `v ↦ v + a(δ−1)⟨a,v⟩/⟨a,a⟩`.
pub fn reflect_with(l: &Line, delta: &Quat, v: &Vector) -> Vector {
    let a = l.rep();
    let ip = herm_unchecked(a, v);
    if ip.is_zero() {
        return v.clone();
    }
    let c = norm2(a).inv().expect("nonzero line");
    let q = &(delta - &Quat::one()) * &ip.scale(&c);
    v.sub_scaled(a, &-q)
}

pub fn reflect_line(l: &Line, m: &Line) -> Line {
    Line::new(reflect(l, m.rep())).expect("reflection is invertible")
}

/// A right subspace in reduced row-echelon form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    n: usize,
    rows: Vec<Vector>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace { n, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[Vector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// The part of `v` outside the span: `v − Σ b_p·v[p]`.
    pub fn residual(&self, v: &Vector) -> Vector {
        let mut w = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v.0[p].is_zero() {
                w = w.sub_scaled(row, &v.0[p]);
            }
        }
        w
    }

    pub fn contains_vector(&self, v: &Vector) -> bool {
        // Only non-pivot coordinates can survive the reduction.
        let mut pivot = vec![false; self.n];
        for &p in &self.pivots {
            pivot[p] = true;
        }
        for (c, &is_pivot) in pivot.iter().enumerate() {
            if is_pivot {
                continue;
            }
            let mut acc = Quat::zero();
            for (row, &p) in self.rows.iter().zip(&self.pivots) {
                if !row.0[c].is_zero() && !v.0[p].is_zero() {
                    acc = &acc + &(&row.0[c] * &v.0[p]);
                }
            }
            if acc != v.0[c] {
                return false;
            }
        }
        true
    }

    pub fn contains_line(&self, l: &Line) -> bool {
        self.contains_vector(l.rep())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.rows.iter().all(|r| other.contains_vector(r))
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows.iter()).finish()
    }
}

fn rref(mut rows: Vec<Vector>, n: usize) -> Subspace {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(i) = (r..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else {
            continue;
        };
        rows.swap(r, i);
        if !rows[r].0[col].is_one() {
            let s = rows[r].0[col].inv().expect("nonzero pivot");
            rows[r] = rows[r].mul_right(&s);
            rows[r].0[col] = Quat::one();
        }
        for i in 0..rows.len() {
            if i != r && !rows[i].0[col].is_zero() {
                let c = rows[i].0[col].clone();
                rows[i] = rows[i].sub_scaled(&rows[r], &c);
                rows[i].0[col] = Quat::zero();
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    Subspace { n, rows, pivots }
}

/// Canonical echelon basis of the right span of `vectors`.
pub fn span(vectors: &[Vector]) -> Result<Subspace, GeometryError> {
    let first = vectors.first().ok_or(GeometryError::Empty)?;
    let n = first.dim();
    for v in vectors {
        check_dims(first, v)?;
    }
    Ok(rref(vectors.to_vec(), n))
}

pub fn span_lines(lines: &[&Line]) -> Result<Subspace, GeometryError> {
    let vs: Vec<Vector> = lines.iter().map(|l| l.rep().clone()).collect();
    span(&vs)
}

pub fn contains(s: &Subspace, l: &Line) -> Result<bool, GeometryError> {
    if s.ambient() != l.dim() {
        return Err(GeometryError::DimensionMismatch(s.ambient(), l.dim()));
    }
    Ok(s.contains_line(l))
}

/// `{x : ⟨b, x⟩ = 0 for all b ∈ s}`.
pub fn orth_complement(s: &Subspace) -> Subspace {
    let n = s.ambient();
    let mut is_pivot = vec![false; n];
    for &p in s.pivots() {
        is_pivot[p] = true;
    }
    let mut vecs = Vec::new();
    for f in (0..n).filter(|&f| !is_pivot[f]) {
        let mut x = Vector::unit(n, f);
        for (row, &p) in s.basis().iter().zip(s.pivots()) {
            x.0[p] = -&row.0[f].conj();
        }
        vecs.push(x);
    }
    rref(vecs, n)
}
