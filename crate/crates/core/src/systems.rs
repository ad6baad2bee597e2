//! Line systems: the family `W_n(Γ, Δ)`, the exceptional systems `Q, R, S1,
//! S2, S3, T, U`, a few classical systems used as references, and closure
//! utilities.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{herm_form, norm2, reflect, AngleClass, GeometryError, Line, Vector};
use crate::scalars::{FieldElem, Quat, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("unsupported group: {0}")]
    UnsupportedGamma(String),
    #[error("illegal normal subgroup {delta} for {gamma}: {reason}")]
    IllegalDelta { gamma: String, delta: String, reason: String },
    #[error("closure exceeded cap of {0} lines")]
    CapExceeded(usize),
    #[error("unknown system: {0}")]
    UnknownSystem(String),
    #[error("bad system document: {0}")]
    BadDocument(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

fn q(w: i64, x: i64, y: i64, z: i64, den: i64) -> Quat {
    Quat::from_ints(w, x, y, z, den)
}

fn fq(w: FieldElem, x: FieldElem, y: FieldElem, z: FieldElem) -> Quat {
    Quat::new(w, x, y, z)
}

/// Unit quaternion of the given order used to generate cyclic groups.
fn cyclic_generator(m: u32) -> Option<Quat> {
    let half = FieldElem::from_ratio(1, 2);
    let z = FieldElem::zero;
    Some(match m {
        1 => Quat::one(),
        2 => Quat::from_int(-1),
        3 => Quat::omega(),
        4 => Quat::i(),
        5 => fq(&FieldElem::tau_inv() * &half, &FieldElem::tau() * &half, half.clone(), z()),
        6 => q(1, 1, 1, 1, 2),
        8 => {
            let s = FieldElem::from_parts(0, 1, 0, 0, 2);
            fq(s.clone(), s, z(), z())
        }
        10 => fq(&FieldElem::tau() * &half, &FieldElem::tau_inv() * &half, half.clone(), z()),
        _ => return None,
    })
}

/// Closure of a generating set under multiplication, in breadth-first order
/// starting from 1.
fn close_quats(gens: &[Quat], cap: usize) -> Option<Vec<Quat>> {
    let mut elems = vec![Quat::one()];
    let mut seen: HashMap<Quat, usize> = HashMap::from([(Quat::one(), 0)]);
    let mut head = 0;
    while head < elems.len() {
        let x = elems[head].clone();
        head += 1;
        for g in gens {
            let y = &x * g;
            if !seen.contains_key(&y) {
                if elems.len() >= cap {
                    return None;
                }
                seen.insert(y.clone(), elems.len());
                elems.push(y);
            }
        }
    }
    Some(elems)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GammaSpec {
    Cyclic(u32),
    BinaryDihedral(u32),
    BinaryTetrahedral,
    BinaryOctahedral,
    BinaryIcosahedral,
}

impl GammaSpec {
    pub fn name(&self) -> String {
        match self {
            GammaSpec::Cyclic(m) => format!("C{m}"),
            GammaSpec::BinaryDihedral(2) => "Q8".to_string(),
            GammaSpec::BinaryDihedral(m) => format!("D{m}"),
            GammaSpec::BinaryTetrahedral => "T".to_string(),
            GammaSpec::BinaryOctahedral => "O".to_string(),
            GammaSpec::BinaryIcosahedral => "I".to_string(),
        }
    }

    pub fn parse(s: &str) -> Result<Self, SystemError> {
        let bad = || SystemError::UnsupportedGamma(s.to_string());
        Ok(match s {
            "T" => GammaSpec::BinaryTetrahedral,
            "O" => GammaSpec::BinaryOctahedral,
            "I" => GammaSpec::BinaryIcosahedral,
            "Q8" | "Q" => GammaSpec::BinaryDihedral(2),
            _ if s.starts_with('C') => GammaSpec::Cyclic(s[1..].parse().map_err(|_| bad())?),
            _ if s.starts_with('D') => GammaSpec::BinaryDihedral(s[1..].parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeltaSpec {
    Full,
    PlusMinusOne,
    Trivial,
    Index(u32),
}

impl DeltaSpec {
    pub fn name(&self) -> String {
        match self {
            DeltaSpec::Full => "full".into(),
            DeltaSpec::PlusMinusOne => "pm1".into(),
            DeltaSpec::Trivial => "triv".into(),
            DeltaSpec::Index(k) => format!("index{k}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self, SystemError> {
        let bad = || SystemError::UnknownSystem(format!("bad delta {s:?}"));
        Ok(match s {
            "full" => DeltaSpec::Full,
            "pm1" => DeltaSpec::PlusMinusOne,
            "triv" => DeltaSpec::Trivial,
            _ if s.starts_with("index") => DeltaSpec::Index(s[5..].parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        })
    }
}

/// A finite subgroup `Γ` of the unit quaternions together with a normal
/// subgroup `Δ` with abelian quotient.
#[derive(Clone, Debug)]
pub struct GammaGroup {
    name: String,
    spec: GammaSpec,
    elements: Vec<Quat>,
    lookup: HashMap<Quat, usize>,
    delta: Vec<usize>,
    delta_name: String,
}

impl GammaGroup {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> GammaSpec {
        self.spec
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Quat] {
        &self.elements
    }

    pub fn delta_indices(&self) -> &[usize] {
        &self.delta
    }

    pub fn delta(&self) -> Vec<Quat> {
        self.delta.iter().map(|&i| self.elements[i].clone()).collect()
    }

    pub fn delta_order(&self) -> usize {
        self.delta.len()
    }

    pub fn delta_name(&self) -> &str {
        &self.delta_name
    }

    pub fn index_of(&self, x: &Quat) -> Option<usize> {
        self.lookup.get(x).copied()
    }

    pub fn contains(&self, x: &Quat) -> bool {
        self.index_of(x).is_some()
    }

    pub fn is_abelian(&self) -> bool {
        let e = &self.elements;
        e.iter().all(|a| e.iter().all(|b| a * b == b * a))
    }

    /// Subgroup generated by `gens` (indices) inside `Γ`, as sorted indices.
    fn subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let g: Vec<Quat> = gens.iter().map(|&i| self.elements[i].clone()).collect();
        let sub = close_quats(&g, self.order()).expect("subgroup of a finite group");
        let mut idx: Vec<usize> = sub.iter().map(|x| self.index_of(x).expect("closed")).collect();
        idx.sort_unstable();
        idx
    }

    fn commutator_subgroup(&self) -> Vec<usize> {
        let e = &self.elements;
        let mut gens = Vec::new();
        for a in e {
            for b in e {
                let c = &(&(a * b) * &a.conj()) * &b.conj();
                gens.push(self.index_of(&c).expect("closed"));
            }
        }
        gens.sort_unstable();
        gens.dedup();
        self.subgroup(&gens)
    }

    /// Replace `Δ`. Checks normality and that `Γ/Δ` is abelian.
    pub fn with_delta(mut self, spec: DeltaSpec) -> Result<Self, SystemError> {
        let illegal = |reason: &str| SystemError::IllegalDelta {
            gamma: self.name.clone(),
            delta: spec.name(),
            reason: reason.to_string(),
        };
        let delta = match spec {
            DeltaSpec::Full => (0..self.order()).collect(),
            DeltaSpec::Trivial => vec![self.index_of(&Quat::one()).expect("identity")],
            DeltaSpec::PlusMinusOne => {
                let m = self.index_of(&Quat::from_int(-1)).ok_or_else(|| illegal("-1 not in group"))?;
                self.subgroup(&[m])
            }
            DeltaSpec::Index(k) => {
                if k == 0 || !self.order().is_multiple_of(k as usize) {
                    return Err(illegal("index does not divide the order"));
                }
                let target = self.order() / k as usize;
                let d = self.commutator_subgroup();
                let none = || illegal("no normal subgroup of that index with abelian quotient");
                if !target.is_multiple_of(d.len()) {
                    return Err(none());
                }
                // The abelianizations here need at most two generators, so
                // subgroups above [Γ,Γ] are generated by it and two elements.
                let mut found = (d.len() == target).then(|| d.clone());
                'outer: for g in 0..self.order() {
                    if found.is_some() {
                        break;
                    }
                    for h in g..self.order() {
                        let mut gens = d.clone();
                        gens.push(g);
                        gens.push(h);
                        let s = self.subgroup(&gens);
                        if s.len() == target {
                            found = Some(s);
                            break 'outer;
                        }
                    }
                }
                found.ok_or_else(none)?
            }
        };
        let mut is_member = vec![false; self.order()];
        for &i in &delta {
            is_member[i] = true;
        }
        let member = |x: &Quat| self.index_of(x).is_some_and(|i| is_member[i]);
        for a in &self.elements {
            for &d in &delta {
                if !member(&(&(a * &self.elements[d]) * &a.conj())) {
                    return Err(illegal("not normal"));
                }
            }
        }
        for &c in &self.commutator_subgroup() {
            if !is_member[c] {
                return Err(illegal("quotient is not abelian"));
            }
        }
        self.delta = delta;
        self.delta_name = spec.name();
        Ok(self)
    }
}

/// `Γ` from a spec, with `Δ = Γ`.
pub fn gamma_group(spec: GammaSpec) -> Result<GammaGroup, SystemError> {
    let unsupported = || SystemError::UnsupportedGamma(spec.name());
    let gens: Vec<Quat> = match spec {
        GammaSpec::Cyclic(m) => vec![cyclic_generator(m).ok_or_else(unsupported)?],
        GammaSpec::BinaryDihedral(m) => {
            let x = cyclic_generator(2 * m).ok_or_else(unsupported)?;
            let y = match m {
                3 => {
                    let s = FieldElem::from_parts(0, 1, 0, 0, 2);
                    fq(FieldElem::zero(), s.clone(), -&s, FieldElem::zero())
                }
                1 => Quat::i(),
                5 => Quat::k(),
                _ => Quat::j(),
            };
            vec![x, y]
        }
        GammaSpec::BinaryTetrahedral => vec![Quat::i(), Quat::omega()],
        GammaSpec::BinaryOctahedral => vec![cyclic_generator(8).expect("order 8"), Quat::omega()],
        GammaSpec::BinaryIcosahedral => vec![Quat::omega(), cyclic_generator(10).expect("order 10")],
    };
    let elements = if let GammaSpec::Cyclic(m) = spec {
        let g = &gens[0];
        let mut v = vec![Quat::one()];
        for _ in 1..m {
            let next = v.last().expect("nonempty") * g;
            v.push(next);
        }
        v
    } else {
        close_quats(&gens, 1000).ok_or_else(unsupported)?
    };
    let n = elements.len();
    let lookup = elements.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
    Ok(GammaGroup {
        name: spec.name(),
        spec,
        elements,
        lookup,
        delta: (0..n).collect(),
        delta_name: DeltaSpec::Full.name(),
    })
}

/// Pairwise angle data for a line system.
#[derive(Debug)]
pub struct AngleTable {
    n: usize,
    cls: Vec<u8>,
}

const OUTSIDE: u8 = 5;
const SELF: u8 = 255;

impl AngleTable {
    pub fn angle(&self, i: usize, j: usize) -> Option<AngleClass> {
        let c = self.cls[i * self.n + j];
        if c == OUTSIDE || c == SELF {
            None
        } else {
            Some(AngleClass::ALL[c as usize])
        }
    }

    pub fn is_orthogonal(&self, i: usize, j: usize) -> bool {
        self.cls[i * self.n + j] == 0
    }

    /// True when every pair of distinct lines has a catalog angle.
    pub fn all_in_catalog(&self) -> bool {
        self.cls.iter().all(|&c| c != OUTSIDE)
    }

    pub fn census_from(&self, i: usize) -> BTreeMap<Option<AngleClass>, usize> {
        let mut m = BTreeMap::new();
        for j in (0..self.n).filter(|&j| j != i) {
            *m.entry(self.angle(j, i)).or_insert(0) += 1;
        }
        m
    }
}

/// A finite set of lines in `H^n`, deduplicated, with the eigenvalues of the
/// reflections attached to each line (default `[-1]`).
#[derive(Clone)]
pub struct LineSystem {
    name: String,
    n: usize,
    lines: Vec<Line>,
    eigenvalues: Vec<Vec<Quat>>,
    index: HashMap<Line, usize>,
    angles: OnceLock<Arc<AngleTable>>,
}

impl fmt::Debug for LineSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LineSystem({}, {} lines in H^{})", self.name, self.lines.len(), self.n)
    }
}

impl LineSystem {
    pub fn new(name: impl Into<String>, n: usize, lines: Vec<Line>) -> Result<Self, SystemError> {
        let k = lines.len();
        Self::with_eigenvalues(name, n, lines, vec![vec![Quat::from_int(-1)]; k])
    }

    pub fn with_eigenvalues(
        name: impl Into<String>,
        n: usize,
        lines: Vec<Line>,
        eigenvalues: Vec<Vec<Quat>>,
    ) -> Result<Self, SystemError> {
        let mut out = LineSystem {
            name: name.into(),
            n,
            lines: Vec::new(),
            eigenvalues: Vec::new(),
            index: HashMap::new(),
            angles: OnceLock::new(),
        };
        for (l, ev) in lines.into_iter().zip(eigenvalues) {
            if l.dim() != n {
                return Err(GeometryError::DimensionMismatch(n, l.dim()).into());
            }
            if !out.index.contains_key(&l) {
                out.index.insert(l.clone(), out.lines.len());
                out.lines.push(l);
                out.eigenvalues.push(ev);
            }
        }
        Ok(out)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn line(&self, i: usize) -> &Line {
        &self.lines[i]
    }

    pub fn index_of(&self, l: &Line) -> Option<usize> {
        self.index.get(l).copied()
    }

    /// Non-identity eigenvalues of the reflections with the given line.
    pub fn eigenvalues(&self, i: usize) -> &[Quat] {
        &self.eigenvalues[i]
    }

    /// `N*`, the number of reflecting hyperplanes.
    pub fn n_hyperplanes(&self) -> usize {
        self.lines.len()
    }

    /// `N`, the number of reflections.
    pub fn n_reflections(&self) -> usize {
        self.eigenvalues.iter().map(Vec::len).sum()
    }

    pub fn only_order_two(&self) -> bool {
        let m1 = Quat::from_int(-1);
        self.eigenvalues.iter().all(|e| e.len() == 1 && e[0] == m1)
    }

    pub fn angle_table(&self) -> Arc<AngleTable> {
        self.angles.get_or_init(|| Arc::new(compute_angles(&self.lines))).clone()
    }

    /// Every `r_ℓ(ℓ')` is again in the system (order-2 reflections).
    pub fn is_star_closed(&self) -> bool {
        for a in &self.lines {
            for b in &self.lines {
                if a != b && !self.index.contains_key(&crate::geometry::reflect_line(a, b)) {
                    return false;
                }
            }
        }
        true
    }

    /// The classes of "equal or orthogonal" when that relation is an
    /// equivalence relation whose classes are orthogonal frames of the
    /// whole space; `None` otherwise.
    pub fn orthogonal_frames(&self) -> Option<Vec<Vec<usize>>> {
        let tab = self.angle_table();
        let mut seen = vec![false; self.lines.len()];
        let mut frames = Vec::new();
        for i in 0..self.lines.len() {
            if seen[i] {
                continue;
            }
            let mut class = vec![i];
            class.extend((0..self.lines.len()).filter(|&j| j != i && tab.is_orthogonal(i, j)));
            for (a, &x) in class.iter().enumerate() {
                for &y in &class[a + 1..] {
                    if !tab.is_orthogonal(x, y) {
                        return None;
                    }
                }
            }
            if class.len() != self.n {
                return None;
            }
            for &x in &class {
                seen[x] = true;
            }
            frames.push(class);
        }
        Some(frames)
    }

    /// Direct sum: lines of `self` in the first coordinates, lines of `other` after.
    pub fn direct_sum(&self, other: &LineSystem) -> LineSystem {
        let n = self.n + other.n;
        let mut lines = Vec::new();
        let mut ev = Vec::new();
        for (l, e) in self.lines.iter().zip(&self.eigenvalues) {
            lines.push(Line::new(l.rep().concat(&Vector::zero(other.n))).expect("nonzero"));
            ev.push(e.clone());
        }
        for (l, e) in other.lines.iter().zip(&other.eigenvalues) {
            lines.push(Line::new(Vector::zero(self.n).concat(l.rep())).expect("nonzero"));
            ev.push(e.clone());
        }
        LineSystem::with_eigenvalues(format!("{}*{}", self.name, other.name), n, lines, ev).expect("dims agree")
    }

    pub fn to_doc(&self) -> SystemDoc {
        let m1 = Quat::from_int(-1);
        let eig = if self.only_order_two() {
            None
        } else {
            Some(self.eigenvalues.iter().map(|e| e.iter().map(quat_strings).collect()).collect())
        };
        let _ = m1;
        SystemDoc {
            name: self.name.clone(),
            dimension: self.n,
            field_basis: FIELD_BASIS.iter().map(|s| s.to_string()).collect(),
            lines: self.lines.iter().map(|l| l.rep().0.iter().map(quat_strings).collect()).collect(),
            eigenvalues: eig,
        }
    }

    pub fn from_doc(doc: &SystemDoc) -> Result<Self, SystemError> {
        if doc.field_basis != FIELD_BASIS {
            return Err(SystemError::BadDocument("unexpected field basis".into()));
        }
        let mut lines = Vec::new();
        for l in &doc.lines {
            if l.len() != doc.dimension {
                return Err(SystemError::BadDocument("line of wrong dimension".into()));
            }
            let v = l.iter().map(|qs| parse_quat(qs)).collect::<Result<Vec<_>, _>>()?;
            lines.push(Line::new(Vector(v))?);
        }
        let eig = match &doc.eigenvalues {
            None => vec![vec![Quat::from_int(-1)]; lines.len()],
            Some(e) => e
                .iter()
                .map(|es| es.iter().map(|qs| parse_quat(qs)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?,
        };
        if eig.len() != lines.len() {
            return Err(SystemError::BadDocument("eigenvalue list length".into()));
        }
        LineSystem::with_eigenvalues(doc.name.clone(), doc.dimension, lines, eig)
    }
}

pub const FIELD_BASIS: [&str; 4] = ["1", "sqrt2", "sqrt5", "sqrt10"];

/// Interchange form of a line system. Each line is a list of `n` quaternions,
/// each quaternion a list of four field elements `(w, x, y, z)`, each field
/// element four rationals on the basis `1, √2, √5, √10`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub name: String,
    pub dimension: usize,
    pub field_basis: Vec<String>,
    pub lines: Vec<Vec<Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<Vec<Vec<Vec<String>>>>>,
}

pub fn quat_strings(q: &Quat) -> Vec<Vec<String>> {
    q.0.iter().map(|c| c.to_strings().to_vec()).collect()
}

pub fn parse_quat(qs: &[Vec<String>]) -> Result<Quat, SystemError> {
    if qs.len() != 4 {
        return Err(SystemError::BadDocument("quaternion needs 4 coordinates".into()));
    }
    let c = qs.iter().map(|s| FieldElem::from_strings(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(Quat::new(c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()))
}

fn compute_angles(lines: &[Line]) -> AngleTable {
    let n = lines.len();
    let inv_norms: Vec<FieldElem> = lines.iter().map(|l| norm2(l.rep()).inv().expect("nonzero")).collect();
    let targets: Vec<FieldElem> = AngleClass::ALL.iter().map(|a| a.cos2()).collect();
    let mut cls = vec![SELF; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let ip = herm_form(lines[i].rep(), lines[j].rep()).expect("same dimension");
            let c = if ip.is_zero() {
                0
            } else {
                let x = &(&ip.norm() * &inv_norms[i]) * &inv_norms[j];
                targets.iter().position(|t| *t == x).map_or(OUTSIDE, |p| p as u8)
            };
            cls[i * n + j] = c;
            cls[j * n + i] = c;
        }
    }
    AngleTable { n, cls }
}

/// Lines `e_p − e_q·γ` (`p < q`, `γ ∈ Γ`) and, when `Δ ≠ 1`, the coordinate lines.
pub fn family_lines(gamma: &GammaGroup, n: usize) -> LineSystem {
    let mut lines = Vec::new();
    let mut eig = Vec::new();
    if gamma.delta_order() > 1 {
        let nontrivial: Vec<Quat> = gamma.delta().into_iter().filter(|d| !d.is_one()).collect();
        for m in 0..n {
            lines.push(Line::new(Vector::unit(n, m)).expect("unit"));
            eig.push(nontrivial.clone());
        }
    }
    for p in 0..n {
        for r in p + 1..n {
            for g in gamma.elements() {
                let mut v = Vector::unit(n, p);
                v.0[r] = -g;
                lines.push(Line::new(v).expect("nonzero"));
                eig.push(vec![Quat::from_int(-1)]);
            }
        }
    }
    let name = format!("W{n}({},{})", gamma.name(), gamma.delta_name());
    LineSystem::with_eigenvalues(name, n, lines, eig).expect("dims agree")
}

/// Least star-closed superset of `seed`.
pub fn reflection_closure(seed: &[Line], cap: usize) -> Result<LineSystem, SystemError> {
    let first = seed.first().ok_or_else(|| SystemError::Construction("empty seed".into()))?;
    let n = first.dim();
    let mut lines: Vec<Line> = Vec::new();
    let mut index: HashMap<Line, usize> = HashMap::new();
    for l in seed {
        if l.dim() != n {
            return Err(GeometryError::DimensionMismatch(n, l.dim()).into());
        }
        if !index.contains_key(l) {
            index.insert(l.clone(), lines.len());
            lines.push(l.clone());
        }
    }
    // lines[..done] are closed among themselves
    let mut done = 0;
    while done < lines.len() {
        let k = done;
        let mut j = 0;
        while j <= k {
            let a = lines[k].clone();
            let b = lines[j].clone();
            for (x, y) in [(&a, &b), (&b, &a)] {
                if x == y {
                    continue;
                }
                let r = Line::new(reflect(x, y.rep()))?;
                if !index.contains_key(&r) {
                    if lines.len() >= cap {
                        return Err(SystemError::CapExceeded(cap));
                    }
                    index.insert(r.clone(), lines.len());
                    lines.push(r);
                }
            }
            j += 1;
        }
        done += 1;
    }
    LineSystem::new("closure", n, lines)
}

/// Orbit of `seed` under the group generated by the order-2 reflections in `mirrors`.
pub fn reflection_orbit(seed: &[Line], mirrors: &[Line], cap: usize) -> Result<Vec<Line>, SystemError> {
    let mut out: Vec<Line> = Vec::new();
    let mut seen: HashMap<Line, ()> = HashMap::new();
    let mut queue: VecDeque<Line> = VecDeque::new();
    for l in seed {
        if seen.insert(l.clone(), ()).is_none() {
            out.push(l.clone());
            queue.push_back(l.clone());
        }
    }
    while let Some(l) = queue.pop_front() {
        for m in mirrors {
            let r = Line::new(reflect(m, l.rep()))?;
            if seen.insert(r.clone(), ()).is_none() {
                if out.len() >= cap {
                    return Err(SystemError::CapExceeded(cap));
                }
                out.push(r.clone());
                queue.push_back(r);
            }
        }
    }
    Ok(out)
}

fn line_of(v: Vec<Quat>) -> Line {
    Line::new(Vector(v)).expect("nonzero vector")
}

fn signed_pairs(n: usize, offset: usize, total: usize) -> Vec<Line> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for s in [1, -1] {
                let mut v = vec![0; total];
                v[offset + i] = 1;
                v[offset + j] = s;
                out.push(Line::from_ints(&v));
            }
        }
    }
    out
}

/// All sign patterns applied to `v`, as lines.
fn sign_changes(v: &[Quat]) -> Vec<Line> {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| !v[i].is_zero()).collect();
    let mut out = Vec::new();
    for mask in 0..(1u32 << nz.len()) {
        let mut w = v.to_vec();
        for (b, &i) in nz.iter().enumerate() {
            if mask >> b & 1 == 1 {
                w[i] = -&w[i];
            }
        }
        out.push(line_of(w));
    }
    out
}

fn dedup(lines: Vec<Line>) -> Vec<Line> {
    let mut seen = HashMap::new();
    lines.into_iter().filter(|l| seen.insert(l.clone(), ()).is_none()).collect()
}

pub fn type_a(n: usize) -> LineSystem {
    let g = gamma_group(GammaSpec::Cyclic(1)).expect("trivial group");
    family_lines(&g, n + 1).renamed(format!("A{n}"))
}

pub fn type_b(n: usize) -> LineSystem {
    let g = gamma_group(GammaSpec::Cyclic(2)).expect("C2");
    family_lines(&g, n).renamed(format!("B{n}"))
}

pub fn type_d(n: usize) -> LineSystem {
    let g = gamma_group(GammaSpec::Cyclic(2)).expect("C2").with_delta(DeltaSpec::Trivial).expect("abelian");
    family_lines(&g, n).renamed(format!("D{n}"))
}

pub fn type_f4() -> LineSystem {
    let mut lines: Vec<Line> = (0..4).map(|i| Line::new(Vector::unit(4, i)).expect("unit")).collect();
    lines.extend(signed_pairs(4, 0, 4));
    lines.extend(sign_changes(&[Quat::one(), Quat::one(), Quat::one(), Quat::one()]));
    LineSystem::new("F4", 4, dedup(lines)).expect("dims")
}

fn even_perms4() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for p in permutations(4) {
        let mut inv = 0;
        for a in 0..4 {
            for b in a + 1..4 {
                if p[a] > p[b] {
                    inv += 1;
                }
            }
        }
        if inv % 2 == 0 {
            out.push([p[0], p[1], p[2], p[3]]);
        }
    }
    out
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

pub fn type_h4() -> LineSystem {
    let t = Quat::real(FieldElem::tau());
    let ti = Quat::real(FieldElem::tau_inv());
    let mut lines: Vec<Line> = (0..4).map(|i| Line::new(Vector::unit(4, i)).expect("unit")).collect();
    lines.extend(sign_changes(&[Quat::one(), Quat::one(), Quat::one(), Quat::one()]));
    let base = [ti, Quat::one(), t, Quat::zero()];
    for p in even_perms4() {
        let v: Vec<Quat> = (0..4).map(|i| base[p[i]].clone()).collect();
        lines.extend(sign_changes(&v));
    }
    LineSystem::new("H4", 4, dedup(lines)).expect("dims")
}

pub fn type_h3() -> LineSystem {
    let t = Quat::real(FieldElem::tau());
    let ti = Quat::real(FieldElem::tau_inv());
    let mut lines: Vec<Line> = (0..3).map(|i| Line::new(Vector::unit(3, i)).expect("unit")).collect();
    let base = [Quat::one(), t, ti];
    for shift in 0..3 {
        let v: Vec<Quat> = (0..3).map(|i| base[(i + shift) % 3].clone()).collect();
        lines.extend(sign_changes(&v));
    }
    LineSystem::new("H3", 3, dedup(lines)).expect("dims")
}

fn alpha_q() -> Quat {
    // (1 − i − j − √5 k)/2
    let h = FieldElem::from_ratio(1, 2);
    fq(h.clone(), -&h, -&h, FieldElem::from_parts(0, 0, -1, 0, 2))
}

fn system_q() -> Result<LineSystem, SystemError> {
    let c4 = gamma_group(GammaSpec::Cyclic(4))?.with_delta(DeltaSpec::Index(2))?;
    let roots = family_lines(&c4, 3);
    let units = c4.elements().to_vec();
    let v = [Quat::one(), Quat::one(), alpha_q()];
    let mut orbit = Vec::new();
    for p in permutations(3) {
        for a in &units {
            for b in &units {
                for c in &units {
                    let prod = &(a * b) * c;
                    if !(prod.is_one() || prod == Quat::from_int(-1)) {
                        continue;
                    }
                    let eps = [a, b, c];
                    // (Mv)_i = ε_i v_{p(i)}
                    let w: Vec<Quat> = (0..3).map(|i| eps[i] * &v[p[i]]).collect();
                    orbit.push(line_of(w));
                }
            }
        }
    }
    let mut lines = roots.lines().to_vec();
    lines.extend(dedup(orbit));
    LineSystem::new("Q", 3, lines)
}

/// Lines of `W_3(Q8, ±1)`: the coordinate axes and `e_p − e_q·γ`, `γ ∈ Q8`.
fn w3_q8_lines() -> Result<Vec<Line>, SystemError> {
    let g = gamma_group(GammaSpec::BinaryDihedral(2))?.with_delta(DeltaSpec::PlusMinusOne)?;
    Ok(family_lines(&g, 3).lines().to_vec())
}

/// Frozen extra line whose closure with the `W_3(Q8, ±1)` lines is `R`:
/// `(1, τu, τ⁻¹w)` with the units `u, w` below (as `(w,x,y,z)/2`).
pub const R_SEED_UNITS: UnitPair = ([-1, -1, -1, -1], [-1, -1, -1, 1]);

/// The `R` seed line `(1, τu, τ⁻¹w)` for half-integer units `u, w`.
pub fn r_seed_line(u: [i64; 4], w: [i64; 4]) -> Line {
    let uq = q(u[0], u[1], u[2], u[3], 2);
    let wq = q(w[0], w[1], w[2], w[3], 2);
    line_of(vec![Quat::one(), uq.scale(&FieldElem::tau()), wq.scale(&FieldElem::tau_inv())])
}

/// Angle census of `R` from the line `(1,0,0)`.
pub const R_CENSUS: [(AngleClass, usize); 5] = [
    (AngleClass::Right, 10),
    (AngleClass::Pi3, 160),
    (AngleClass::Pi4, 80),
    (AngleClass::Pi5, 32),
    (AngleClass::TwoPi5, 32),
];

fn census_matches(ls: &LineSystem, from: usize, expected: &[(AngleClass, usize)]) -> bool {
    let got = ls.angle_table().census_from(from);
    let want: BTreeMap<Option<AngleClass>, usize> = expected.iter().map(|&(a, c)| (Some(a), c)).collect();
    got == want
}

/// Coordinates of two quaternion units `(u, w)`, doubled.
pub type UnitPair = ([i64; 4], [i64; 4]);

/// Search candidate seeds `(1, τu, τ⁻¹w)` over the given half-integer units,
/// returning the first whose closure with the `W_3(Q8, ±1)` lines has 315
/// lines and the expected angle census.
pub fn search_r_seed(units: &[[i64; 4]]) -> Result<Option<UnitPair>, SystemError> {
    let base = w3_q8_lines()?;
    let e1 = Line::from_ints(&[1, 0, 0]);
    for u in units {
        for w in units {
            let cand = r_seed_line(*u, *w);
            let compatible =
                base.iter().all(|b| crate::geometry::angle_class(b, &cand).map(|a| a.is_some()).unwrap_or(false));
            if !compatible {
                continue;
            }
            let mut seed = base.clone();
            seed.push(cand);
            let Ok(ls) = reflection_closure(&seed, 400) else {
                continue;
            };
            if ls.len() != 315 {
                continue;
            }
            let i = ls.index_of(&e1).expect("coordinate line present");
            if census_matches(&ls, i, &R_CENSUS) {
                return Ok(Some((*u, *w)));
            }
        }
    }
    Ok(None)
}

fn system_r() -> Result<LineSystem, SystemError> {
    let mut seed = w3_q8_lines()?;
    seed.push(r_seed_line(R_SEED_UNITS.0, R_SEED_UNITS.1));
    let ls = reflection_closure(&seed, 400)?;
    if ls.len() != 315 {
        return Err(SystemError::Construction(format!("R closure has {} lines", ls.len())));
    }
    Ok(ls.renamed("R"))
}

fn system_s1() -> Result<LineSystem, SystemError> {
    let mut lines = signed_pairs(4, 0, 4);
    let units = [Quat::one(), Quat::i(), Quat::j(), Quat::k()];
    for p in permutations(4) {
        for mask in 0..16u32 {
            if mask.count_ones() % 2 == 1 {
                continue;
            }
            let v: Vec<Quat> =
                (0..4).map(|i| if mask >> i & 1 == 1 { -&units[p[i]] } else { units[p[i]].clone() }).collect();
            lines.push(line_of(v));
        }
    }
    LineSystem::new("S1", 4, dedup(lines))
}

fn system_s2() -> Result<LineSystem, SystemError> {
    let f4 = type_f4();
    let seed = [line_of(vec![Quat::one(), Quat::i(), Quat::j(), Quat::k()])];
    let orbit = reflection_orbit(&seed, f4.lines(), 1000)?;
    let mut lines = f4.lines().to_vec();
    lines.extend(orbit);
    LineSystem::new("S2", 4, lines)
}

fn system_s3() -> Result<LineSystem, SystemError> {
    let g = gamma_group(GammaSpec::BinaryDihedral(2))?.with_delta(DeltaSpec::PlusMinusOne)?;
    let base = family_lines(&g, 4);
    let seed = [Line::from_ints(&[1, 1, 1, 1])];
    let orbit = reflection_orbit(&seed, base.lines(), 1000)?;
    let mut lines = base.lines().to_vec();
    lines.extend(orbit);
    LineSystem::new("S3", 4, lines)
}

fn system_t() -> Result<LineSystem, SystemError> {
    let h4 = type_h4();
    let seed = [line_of(vec![Quat::one(), Quat::i(), Quat::j(), Quat::k()])];
    let orbit = reflection_orbit(&seed, h4.lines(), 1000)?;
    let mut lines = h4.lines().to_vec();
    lines.extend(orbit);
    LineSystem::new("T", 4, lines)
}

/// The `T` lines described through conjugation by the binary icosahedral
/// group: `(1, p i p⁻¹, p j p⁻¹, p k p⁻¹)` and the same with `−i, −j, −k`.
/// With `left = false` the conjugation `p⁻¹ x p` is used instead.
pub fn t_conjugation_lines(left: bool) -> Result<Vec<Line>, SystemError> {
    let ico = gamma_group(GammaSpec::BinaryIcosahedral)?;
    let mut out = Vec::new();
    for p in ico.elements() {
        let pinv = p.conj();
        let c = |x: &Quat| if left { &(p * x) * &pinv } else { &(&pinv * x) * p };
        for s in [1, -1] {
            let sg = Quat::from_int(s);
            out.push(line_of(vec![
                Quat::one(),
                c(&(&sg * &Quat::i())),
                c(&(&sg * &Quat::j())),
                c(&(&sg * &Quat::k())),
            ]));
        }
    }
    Ok(dedup(out))
}

fn system_u() -> Result<LineSystem, SystemError> {
    let d4 = signed_pairs(4, 0, 5);
    let s2 = FieldElem::sqrt2();
    let sq = |x: Quat| x.scale(&s2);
    let one = Quat::one;
    let (i, j, k) = (Quat::i(), Quat::j(), Quat::k());
    let seeds = vec![
        line_of(vec![one(), i.clone(), j.clone(), k.clone(), Quat::zero()]),
        line_of(vec![one(), one(), one(), q(0, 1, 1, 1, 1), sq(one())]),
        line_of(vec![one(), one(), one(), q(0, 1, -1, -1, 1), sq(i.clone())]),
        line_of(vec![one(), one(), one(), q(0, -1, 1, -1, 1), sq(j.clone())]),
        line_of(vec![one(), one(), one(), q(0, -1, -1, 1, 1), sq(k.clone())]),
    ];
    let orbit = reflection_orbit(&seeds, &d4, 1000)?;
    let mut lines = d4.clone();
    lines.push(Line::from_ints(&[0, 0, 0, 0, 1]));
    lines.extend(orbit);
    LineSystem::new("U", 5, lines)
}

/// The change of basis taking the cyclic form of `U` to the realization used here.
pub fn u_change_of_basis() -> Vec<Vec<Quat>> {
    let r = FieldElem::from_parts(0, 1, 0, 0, 2); // 1/√2
    let w2 = &Quat::omega() * &Quat::omega();
    let a = Quat::real(r.clone());
    let b = w2.scale(&r);
    let z = Quat::zero;
    vec![
        vec![a.clone(), -&b, z(), z(), z()],
        vec![-&a, -&b, z(), z(), z()],
        vec![z(), z(), -&b, a.clone(), z()],
        vec![z(), z(), b.clone(), a.clone(), z()],
        vec![z(), z(), z(), z(), -&w2],
    ]
}

/// The `U` lines in cyclic form: coordinate lines plus cyclic shifts and sign changes of four base vectors.
pub fn u_cyclic_lines() -> Vec<Line> {
    let w = Quat::omega();
    let conj = |g: &Quat| &(g * &w) * &g.conj();
    let (i, j, k) = (Quat::i(), Quat::j(), Quat::k());
    let z = Quat::zero;
    let one = Quat::one;
    let bases = vec![
        vec![z(), one(), w.clone(), w.clone(), one()],
        vec![z(), one(), conj(&i), conj(&k), i.clone()],
        vec![z(), one(), conj(&j), conj(&i), j.clone()],
        vec![z(), one(), conj(&k), conj(&j), k.clone()],
    ];
    let mut out: Vec<Line> = (0..5).map(|m| Line::new(Vector::unit(5, m)).expect("unit")).collect();
    for b in bases {
        for shift in 0..5 {
            let v: Vec<Quat> = (0..5).map(|t| b[(t + 5 - shift) % 5].clone()).collect();
            out.extend(sign_changes(&v));
        }
    }
    dedup(out)
}

pub const EXCEPTIONAL: [&str; 7] = ["Q", "R", "S1", "S2", "S3", "T", "U"];

pub fn exceptional_lines(name: &str) -> Result<LineSystem, SystemError> {
    match name {
        "Q" => system_q(),
        "R" => system_r(),
        "S1" => system_s1(),
        "S2" => system_s2(),
        "S3" => system_s3(),
        "T" => system_t(),
        "U" => system_u(),
        _ => Err(SystemError::UnknownSystem(name.to_string())),
    }
}

/// A parsed system specification.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SystemSpec {
    Exceptional(String),
    Family { gamma: GammaSpec, delta: DeltaSpec, n: usize },
    A(usize),
    B(usize),
    D(usize),
    F4,
    H3,
    H4,
    Sum(Vec<SystemSpec>),
}

impl SystemSpec {
    /// Grammar: exceptional names (`Q`, `R`, `S1`, `S2`, `S3`, `T`, `U`);
    /// `family:<C<m>|D<m>|Q8|T|O|I>:<full|pm1|triv|index<k>>:<n>`;
    /// `G(l,m,n)` for `W_n(C_l, Δ)` with `|Δ| = l/m`; `A<n>`, `B<n>`, `D<n>`,
    /// `F4`, `H3`, `H4`; direct sums joined by `*`.
    pub fn parse(s: &str) -> Result<SystemSpec, SystemError> {
        let s = s.trim();
        let unknown = || SystemError::UnknownSystem(s.to_string());
        if s.contains('*') || s.contains('×') {
            let parts = s.split(['*', '×']).map(SystemSpec::parse).collect::<Result<Vec<_>, _>>()?;
            return Ok(SystemSpec::Sum(parts));
        }
        if EXCEPTIONAL.contains(&s) {
            return Ok(SystemSpec::Exceptional(s.to_string()));
        }
        if let Some(rest) = s.strip_prefix("family:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(unknown());
            }
            let gamma = GammaSpec::parse(parts[0]).map_err(|_| unknown())?;
            let delta = DeltaSpec::parse(parts[1])?;
            let n: usize = parts[2].parse().map_err(|_| unknown())?;
            if n == 0 {
                return Err(unknown());
            }
            return Ok(SystemSpec::Family { gamma, delta, n });
        }
        if let Some(rest) = s.strip_prefix("G(").and_then(|r| r.strip_suffix(')')) {
            let v: Vec<usize> =
                rest.split(',').map(|t| t.trim().parse::<usize>()).collect::<Result<_, _>>().map_err(|_| unknown())?;
            if v.len() != 3 || v[0] == 0 || v[1] == 0 || !v[0].is_multiple_of(v[1]) || v[2] == 0 {
                return Err(unknown());
            }
            let delta = if v[1] == 1 { DeltaSpec::Full } else { DeltaSpec::Index(v[1] as u32) };
            return Ok(SystemSpec::Family { gamma: GammaSpec::Cyclic(v[0] as u32), delta, n: v[2] });
        }
        match s {
            "F4" => return Ok(SystemSpec::F4),
            "H3" => return Ok(SystemSpec::H3),
            "H4" => return Ok(SystemSpec::H4),
            _ => {}
        }
        let num = |t: &str| t.parse::<usize>().ok().filter(|&k| k >= 1);
        if let Some(k) = s.strip_prefix('A').and_then(num) {
            return Ok(SystemSpec::A(k));
        }
        if let Some(k) = s.strip_prefix('B').and_then(num).filter(|&k| k >= 2) {
            return Ok(SystemSpec::B(k));
        }
        if let Some(k) = s.strip_prefix('D').and_then(num).filter(|&k| k >= 2) {
            return Ok(SystemSpec::D(k));
        }
        Err(unknown())
    }

    pub fn canonical_name(&self) -> String {
        match self {
            SystemSpec::Exceptional(s) => s.clone(),
            SystemSpec::Family { gamma, delta, n } => format!("family:{}:{}:{n}", gamma.name(), delta.name()),
            SystemSpec::A(n) => format!("A{n}"),
            SystemSpec::B(n) => format!("B{n}"),
            SystemSpec::D(n) => format!("D{n}"),
            SystemSpec::F4 => "F4".into(),
            SystemSpec::H3 => "H3".into(),
            SystemSpec::H4 => "H4".into(),
            SystemSpec::Sum(v) => v.iter().map(|s| s.canonical_name()).collect::<Vec<_>>().join("*"),
        }
    }

    pub fn gamma(&self) -> Result<Option<GammaGroup>, SystemError> {
        match self {
            SystemSpec::Family { gamma, delta, .. } => Ok(Some(gamma_group(*gamma)?.with_delta(*delta)?)),
            _ => Ok(None),
        }
    }

    pub fn build(&self) -> Result<LineSystem, SystemError> {
        let ls = match self {
            SystemSpec::Exceptional(s) => exceptional_lines(s)?,
            SystemSpec::Family { n, .. } => family_lines(&self.gamma()?.expect("family"), *n),
            SystemSpec::A(n) => type_a(*n),
            SystemSpec::B(n) => type_b(*n),
            SystemSpec::D(n) => type_d(*n),
            SystemSpec::F4 => type_f4(),
            SystemSpec::H3 => type_h3(),
            SystemSpec::H4 => type_h4(),
            SystemSpec::Sum(parts) => {
                let mut it = parts.iter();
                let mut acc = it.next().ok_or_else(|| SystemError::UnknownSystem(String::new()))?.build()?;
                for p in it {
                    acc = acc.direct_sum(&p.build()?);
                }
                acc
            }
        };
        Ok(ls.renamed(self.canonical_name()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_orders() {
        let c4 = gamma_group(GammaSpec::Cyclic(4)).unwrap();
        assert_eq!(c4.elements(), &[Quat::one(), Quat::i(), Quat::from_int(-1), -Quat::i()]);
        for m in [1, 2, 3, 4, 5, 6, 8, 10] {
            assert_eq!(gamma_group(GammaSpec::Cyclic(m)).unwrap().order(), m as usize);
        }
        for m in 1..=5 {
            assert_eq!(gamma_group(GammaSpec::BinaryDihedral(m)).unwrap().order(), 4 * m as usize);
        }
        let q8 = gamma_group(GammaSpec::BinaryDihedral(2)).unwrap();
        for x in [Quat::one(), Quat::i(), Quat::j(), Quat::k()] {
            assert!(q8.contains(&x) && q8.contains(&-&x));
        }
        assert_eq!(gamma_group(GammaSpec::BinaryTetrahedral).unwrap().order(), 24);
        assert_eq!(gamma_group(GammaSpec::BinaryOctahedral).unwrap().order(), 48);
        assert_eq!(gamma_group(GammaSpec::BinaryIcosahedral).unwrap().order(), 120);
        assert!(gamma_group(GammaSpec::Cyclic(7)).is_err());
    }

    #[test]
    fn delta_choices() {
        let q8 = gamma_group(GammaSpec::BinaryDihedral(2)).unwrap();
        assert_eq!(q8.clone().with_delta(DeltaSpec::PlusMinusOne).unwrap().delta_order(), 2);
        assert!(q8.clone().with_delta(DeltaSpec::Trivial).is_err());
        assert_eq!(q8.clone().with_delta(DeltaSpec::Index(2)).unwrap().delta_order(), 4);
        assert_eq!(q8.with_delta(DeltaSpec::Index(4)).unwrap().delta_order(), 2);
        let c6 = gamma_group(GammaSpec::Cyclic(6)).unwrap();
        assert_eq!(c6.clone().with_delta(DeltaSpec::Index(3)).unwrap().delta_order(), 2);
        assert_eq!(c6.with_delta(DeltaSpec::Trivial).unwrap().delta_order(), 1);
        let i = gamma_group(GammaSpec::BinaryIcosahedral).unwrap();
        assert!(i.with_delta(DeltaSpec::Index(2)).is_err());
    }

    #[test]
    fn family_counts() {
        let q8 = gamma_group(GammaSpec::BinaryDihedral(2)).unwrap().with_delta(DeltaSpec::PlusMinusOne).unwrap();
        assert_eq!(family_lines(&q8, 3).len(), 27);
        let c3 = gamma_group(GammaSpec::Cyclic(3)).unwrap();
        assert_eq!(family_lines(&c3.clone().with_delta(DeltaSpec::Trivial).unwrap(), 3).len(), 9);
        assert_eq!(family_lines(&c3, 3).len(), 12);
        assert_eq!(type_d(3).len(), 6);
        assert_eq!(type_b(3).len(), 9);
        assert_eq!(type_a(3).len(), 6);
    }

    #[test]
    fn closure_examples() {
        let a = Line::from_ints(&[1, -1, 0]);
        let b = Line::from_ints(&[0, 1, -1]);
        assert_eq!(reflection_closure(&[a, b], 10).unwrap().len(), 3);
        let base = w3_q8_lines().unwrap();
        assert_eq!(reflection_closure(&base, 100).unwrap().len(), 27);
        assert!(matches!(
            reflection_closure(&[Line::from_ints(&[1, 0]), Line::from_ints(&[1, 2])], 50),
            Err(SystemError::CapExceeded(50))
        ));
    }

    #[test]
    fn classical_counts() {
        assert_eq!(type_f4().len(), 24);
        assert_eq!(type_h4().len(), 60);
        assert_eq!(type_h3().len(), 15);
        assert!(type_h3().is_star_closed());
        assert!(type_f4().is_star_closed());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(SystemSpec::parse("U").unwrap(), SystemSpec::Exceptional("U".into()));
        assert_eq!(
            SystemSpec::parse("family:Q8:pm1:3").unwrap(),
            SystemSpec::Family { gamma: GammaSpec::BinaryDihedral(2), delta: DeltaSpec::PlusMinusOne, n: 3 }
        );
        assert_eq!(
            SystemSpec::parse("G(4,2,3)").unwrap(),
            SystemSpec::Family { gamma: GammaSpec::Cyclic(4), delta: DeltaSpec::Index(2), n: 3 }
        );
        assert!(SystemSpec::parse("V").is_err());
        assert!(SystemSpec::parse("family:C3:full").is_err());
        let s = SystemSpec::parse("A1*A2").unwrap().build().unwrap();
        assert_eq!((s.len(), s.dim()), (4, 5));
    }

    #[test]
    fn json_roundtrip() {
        let c3 = gamma_group(GammaSpec::Cyclic(3)).unwrap();
        let ls = family_lines(&c3, 2);
        let doc = ls.to_doc();
        let text = serde_json::to_string(&doc).unwrap();
        let back = LineSystem::from_doc(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.lines(), ls.lines());
        assert_eq!(back.eigenvalues(0), ls.eigenvalues(0));
    }
}
