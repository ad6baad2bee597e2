//! The lattice of flats of a line system and its invariants: Möbius values,
//! Poincaré polynomial, parabolic orders, elliptic counts, codimension
//! polynomial, type fingerprints and censuses.
//!
//! Flats are generated rank by rank. For a flat `X` with orthogonal
//! complement basis `c_1..c_k`, the map `φ(v) = (⟨c_j, v⟩)_j` is right
//! `H`-linear with kernel `X`, so two lines outside `X` span the same cover
//! of `X` exactly when their images are the same line of `H^k`. Images are
//! compared mod `p = 2^61 − 1` when the reduction is regular and exactly
//! otherwise; every new flat is then confirmed in exact arithmetic.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use log::{debug, info, warn};
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{herm_form, orth_complement, span, AngleClass, Line, Subspace, Vector};
use crate::groups::{self, GroupError};
use crate::modular::{self, ModQuat};
use crate::poly::IntPoly;
use crate::systems::{LineSystem, SystemSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("deletion-restriction is limited to {cap} lines, system has {lines}")]
    TooManyLines { cap: usize, lines: usize },
    #[error("not a 3-system: some pair of lines is at an angle other than π/2 or π/3")]
    NotThreeSystem,
    #[error("not a 3-star: {0}")]
    NotThreeStar(String),
    #[error("parabolic orders have not been computed")]
    MissingOrders,
    #[error(transparent)]
    Group(#[from] GroupError),
}

pub type Mask = Box<[u64]>;

fn mask_new(words: usize) -> Mask {
    vec![0u64; words].into_boxed_slice()
}

fn mask_set(m: &mut [u64], i: usize) {
    m[i / 64] |= 1 << (i % 64);
}

pub fn mask_get(m: &[u64], i: usize) -> bool {
    m[i / 64] >> (i % 64) & 1 == 1
}

pub fn mask_count(m: &[u64]) -> usize {
    m.iter().map(|w| w.count_ones() as usize).sum()
}

pub fn mask_indices(m: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (w, &bits) in m.iter().enumerate() {
        let mut b = bits;
        while b != 0 {
            let t = b.trailing_zeros() as usize;
            out.push(w * 64 + t);
            b &= b - 1;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlatId {
    pub rank: u32,
    pub idx: u32,
}

/// A flat: the span of the lines in `mask`, generated by the lines `basis`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Flat {
    pub rank: usize,
    pub basis: Vec<u32>,
    pub mask: Mask,
    /// Indices of the flats of rank `rank − 1` contained in this one.
    pub lower: Vec<u32>,
    pub mobius: i64,
    pub label: u32,
    pub order: Option<u64>,
    pub elliptic: Option<i64>,
}

impl Flat {
    pub fn n_lines(&self) -> usize {
        mask_count(&self.mask)
    }
}

pub struct FlatLattice {
    system: Arc<LineSystem>,
    words: usize,
    layers: Vec<Vec<Flat>>,
    index: Vec<HashMap<Mask, u32>>,
    labels: Vec<String>,
    label_ids: HashMap<String, u32>,
}

impl std::fmt::Debug for FlatLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sizes: Vec<usize> = self.layers.iter().map(Vec::len).collect();
        write!(f, "FlatLattice({}, layers {:?})", self.system.name(), sizes)
    }
}

impl FlatLattice {
    pub fn system(&self) -> &LineSystem {
        &self.system
    }

    /// Rank of the span of all lines.
    pub fn rank(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer(&self, d: usize) -> &[Flat] {
        &self.layers[d]
    }

    pub fn layers(&self) -> &[Vec<Flat>] {
        &self.layers
    }

    pub fn n_flats(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn flat(&self, id: FlatId) -> &Flat {
        &self.layers[id.rank as usize][id.idx as usize]
    }

    pub fn top(&self) -> FlatId {
        FlatId { rank: self.rank() as u32, idx: 0 }
    }

    pub fn ids(&self) -> impl Iterator<Item = FlatId> + '_ {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(d, l)| (0..l.len()).map(move |i| FlatId { rank: d as u32, idx: i as u32 }))
    }

    pub fn lines_of(&self, id: FlatId) -> Vec<usize> {
        mask_indices(&self.flat(id).mask)
    }

    /// Exact echelon form of the flat.
    pub fn subspace(&self, id: FlatId) -> Subspace {
        let f = self.flat(id);
        if f.basis.is_empty() {
            return Subspace::zero(self.system.dim());
        }
        let vs: Vec<Vector> = f.basis.iter().map(|&i| self.system.line(i as usize).rep().clone()).collect();
        span(&vs).expect("nonempty")
    }

    pub fn label(&self, id: FlatId) -> &str {
        &self.labels[self.flat(id).label as usize]
    }

    pub fn find(&self, mask: &[u64]) -> Option<FlatId> {
        let d = self.index.iter().position(|ix| ix.contains_key(mask))?;
        Some(FlatId { rank: d as u32, idx: self.index[d][mask] })
    }

    pub fn mask_of_lines(&self, lines: &[usize]) -> Mask {
        let mut m = mask_new(self.words);
        for &i in lines {
            mask_set(&mut m, i);
        }
        m
    }

    /// The flat spanned by the given lines.
    pub fn flat_of_lines(&self, lines: &[usize]) -> FlatId {
        if lines.is_empty() {
            return FlatId { rank: 0, idx: 0 };
        }
        let vs: Vec<Vector> = lines.iter().map(|&i| self.system.line(i).rep().clone()).collect();
        let s = span(&vs).expect("nonempty");
        let contained: Vec<usize> = (0..self.system.len()).filter(|&i| s.contains_line(self.system.line(i))).collect();
        self.find(&self.mask_of_lines(&contained)).expect("every span of lines is a flat")
    }

    /// Visit every flat strictly below `id`, each once.
    fn for_each_below(&self, id: FlatId, stamps: &mut Stamps, mut f: impl FnMut(FlatId, &Flat)) {
        stamps.next();
        let mut stack = vec![id];
        while let Some(y) = stack.pop() {
            let fy = self.flat(y);
            if fy.rank == 0 {
                continue;
            }
            let below = fy.rank as u32 - 1;
            for &z in &fy.lower {
                if stamps.mark(below as usize, z as usize) {
                    let zid = FlatId { rank: below, idx: z };
                    f(zid, self.flat(zid));
                    stack.push(zid);
                }
            }
        }
    }

    pub fn below(&self, id: FlatId) -> Vec<FlatId> {
        let mut stamps = Stamps::new(self);
        let mut out = Vec::new();
        self.for_each_below(id, &mut stamps, |z, _| out.push(z));
        out.sort();
        out
    }

    fn intern(&mut self, label: &str) -> u32 {
        if let Some(&i) = self.label_ids.get(label) {
            return i;
        }
        let i = self.labels.len() as u32;
        self.labels.push(label.to_string());
        self.label_ids.insert(label.to_string(), i);
        i
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub(crate) fn from_parts(system: LineSystem, layers: Vec<Vec<Flat>>, labels: Vec<String>) -> Self {
        let words = system.len().div_ceil(64).max(1);
        let index =
            layers.iter().map(|l| l.iter().enumerate().map(|(i, f)| (f.mask.clone(), i as u32)).collect()).collect();
        let label_ids = labels.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        FlatLattice { system: Arc::new(system), words, layers, index, labels, label_ids }
    }
}

struct Stamps {
    gen: u32,
    marks: Vec<Vec<u32>>,
}

impl Stamps {
    fn new(fl: &FlatLattice) -> Self {
        Stamps { gen: 0, marks: fl.layers.iter().map(|l| vec![0; l.len()]).collect() }
    }

    fn next(&mut self) {
        self.gen += 1;
    }

    fn mark(&mut self, rank: usize, idx: usize) -> bool {
        let m = &mut self.marks[rank][idx];
        if *m == self.gen {
            false
        } else {
            *m = self.gen;
            true
        }
    }
}

fn qconj(a: &ModQuat) -> ModQuat {
    [a[0], modular::neg(a[1]), modular::neg(a[2]), modular::neg(a[3])]
}

fn qnorm(a: &ModQuat) -> u64 {
    let m = modular::mul;
    modular::add(modular::add(m(a[0], a[0]), m(a[1], a[1])), modular::add(m(a[2], a[2]), m(a[3], a[3])))
}

/// Montgomery batch inversion of nonzero residues.
fn batch_inv(xs: &[u64]) -> Vec<u64> {
    let mut prefix = Vec::with_capacity(xs.len());
    let mut acc = 1u64;
    for &x in xs {
        prefix.push(acc);
        acc = modular::mul(acc, x);
    }
    let mut inv = modular::inv(acc).expect("nonzero product");
    let mut out = vec![0u64; xs.len()];
    for i in (0..xs.len()).rev() {
        out[i] = modular::mul(inv, prefix[i]);
        inv = modular::mul(inv, xs[i]);
    }
    out
}

/// Lines outside `x`, grouped by the cover of `x` they span; each group is
/// listed in increasing order and groups are ordered by their first line.
fn cover_groups(ls: &LineSystem, reduced: Option<&[Vec<ModQuat>]>, x: &Flat, exact: bool) -> Vec<Vec<u32>> {
    let n = ls.dim();
    let sub = if x.basis.is_empty() {
        Subspace::zero(n)
    } else {
        span(&x.basis.iter().map(|&i| ls.line(i as usize).rep().clone()).collect::<Vec<_>>()).expect("nonempty")
    };
    let comp = orth_complement(&sub);
    let outside: Vec<usize> = (0..ls.len()).filter(|&i| !mask_get(&x.mask, i)).collect();
    if !exact {
        if let Some(red) = reduced {
            if let Some(g) = cover_groups_mod_p(red, &comp, &outside) {
                return g;
            }
        }
    }
    let mut groups: Vec<Vec<u32>> = Vec::new();
    let mut key_of: HashMap<Line, usize> = HashMap::new();
    for &m in &outside {
        let phi = Vector(comp.basis().iter().map(|c| herm_form(c, ls.line(m).rep()).expect("dims")).collect());
        let key = Line::new(phi).expect("line outside the flat has nonzero image");
        let g = *key_of.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(m as u32);
    }
    groups
}

fn cover_groups_mod_p(red: &[Vec<ModQuat>], comp: &Subspace, outside: &[usize]) -> Option<Vec<Vec<u32>>> {
    let k = comp.rank();
    let mut cc: Vec<Vec<ModQuat>> = Vec::with_capacity(k);
    for c in comp.basis() {
        cc.push(c.0.iter().map(|q| modular::reduce_quat(&q.conj())).collect::<Option<Vec<_>>>()?);
    }
    let mut images: Vec<Vec<ModQuat>> = Vec::with_capacity(outside.len());
    let mut lead: Vec<usize> = Vec::with_capacity(outside.len());
    let mut norms: Vec<u64> = Vec::with_capacity(outside.len());
    for &m in outside {
        let v = &red[m];
        let mut phi = vec![[0u64; 4]; k];
        for (j, c) in cc.iter().enumerate() {
            let mut acc = [0u64; 4];
            for (a, b) in c.iter().zip(v) {
                if *a != [0; 4] && *b != [0; 4] {
                    acc = modular::qadd(&acc, &modular::qmul(a, b));
                }
            }
            phi[j] = acc;
        }
        // regular: nonzero image whose nonzero entries are all invertible
        let mut first = None;
        for (j, q) in phi.iter().enumerate() {
            if *q != [0; 4] {
                let nq = qnorm(q);
                if nq == 0 {
                    return None;
                }
                if first.is_none() {
                    first = Some((j, nq));
                }
            }
        }
        let (j0, nq) = first?;
        images.push(phi);
        lead.push(j0);
        norms.push(nq);
    }
    let invs = batch_inv(&norms);
    let mut groups: Vec<Vec<u32>> = Vec::new();
    let mut key_of: HashMap<Vec<ModQuat>, usize> = HashMap::new();
    for (t, phi) in images.into_iter().enumerate() {
        let c = qconj(&phi[lead[t]]);
        let s = [
            modular::mul(c[0], invs[t]),
            modular::mul(c[1], invs[t]),
            modular::mul(c[2], invs[t]),
            modular::mul(c[3], invs[t]),
        ];
        let key: Vec<ModQuat> = phi.iter().map(|q| modular::qmul(q, &s)).collect();
        let g = *key_of.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(outside[t] as u32);
    }
    Some(groups)
}

/// Build the next layer from `layers[d]`. Returns `None` when exact
/// verification rejects a flat found mod `p`.
fn next_layer(
    ls: &LineSystem,
    reduced: Option<&[Vec<ModQuat>]>,
    words: usize,
    layers: &[Vec<Flat>],
    d: usize,
    exact: bool,
) -> Option<(Vec<Flat>, HashMap<Mask, u32>)> {
    let cur = &layers[d];
    let groups: Vec<Vec<Vec<u32>>> = cur.par_iter().map(|x| cover_groups(ls, reduced, x, exact)).collect();
    let mut out: Vec<Flat> = Vec::new();
    let mut index: HashMap<Mask, u32> = HashMap::new();
    for (xi, (x, gs)) in cur.iter().zip(groups).enumerate() {
        for g in gs {
            let mut mask = x.mask.clone();
            for &m in &g {
                mask_set(&mut mask, m as usize);
            }
            match index.get(&mask) {
                Some(&yi) => out[yi as usize].lower.push(xi as u32),
                None => {
                    let mut basis = x.basis.clone();
                    basis.push(g[0]);
                    index.insert(mask.clone(), out.len() as u32);
                    out.push(Flat {
                        rank: d + 1,
                        basis,
                        mask,
                        lower: vec![xi as u32],
                        mobius: 0,
                        label: 0,
                        order: None,
                        elliptic: None,
                    });
                }
            }
        }
    }
    let _ = words;
    if !exact {
        let ok = out.par_iter().all(|y| {
            let s = span(&y.basis.iter().map(|&i| ls.line(i as usize).rep().clone()).collect::<Vec<_>>())
                .expect("nonempty");
            s.rank() == y.rank
                && mask_indices(&y.mask)
                    .into_iter()
                    .filter(|i| !y.basis.contains(&(*i as u32)))
                    .all(|i| s.contains_line(ls.line(i)))
        });
        if !ok {
            return None;
        }
    }
    Some((out, index))
}

/// Layers at least this large are reported at info level.
const PROGRESS_MIN_FLATS: usize = 1000;

/// Structure of the lattice with Möbius values; labels are not assigned.
pub fn build_lattice_raw(ls: &LineSystem) -> FlatLattice {
    let nl = ls.len();
    let words = nl.div_ceil(64).max(1);
    let r = if nl == 0 {
        0
    } else {
        span(&ls.lines().iter().map(|l| l.rep().clone()).collect::<Vec<_>>()).expect("nonempty").rank()
    };
    let reduced: Option<Vec<Vec<ModQuat>>> =
        ls.lines().iter().map(|l| l.rep().0.iter().map(modular::reduce_quat).collect::<Option<Vec<_>>>()).collect();
    let empty = Flat {
        rank: 0,
        basis: vec![],
        mask: mask_new(words),
        lower: vec![],
        mobius: 1,
        label: 0,
        order: Some(1),
        elliptic: Some(1),
    };
    let mut layers: Vec<Vec<Flat>> = vec![vec![empty]];
    let mut index: Vec<HashMap<Mask, u32>> = vec![HashMap::from([(mask_new(words), 0)])];
    if r >= 1 {
        let mut lines = Vec::with_capacity(nl);
        let mut ix = HashMap::new();
        for i in 0..nl {
            let mut m = mask_new(words);
            mask_set(&mut m, i);
            ix.insert(m.clone(), i as u32);
            lines.push(Flat {
                rank: 1,
                basis: vec![i as u32],
                mask: m,
                lower: vec![0],
                mobius: 1,
                label: 0,
                order: None,
                elliptic: None,
            });
        }
        layers.push(lines);
        index.push(ix);
    }
    for d in 1..r.saturating_sub(1) {
        let built = next_layer(ls, reduced.as_deref(), words, &layers, d, false).or_else(|| {
            warn!("rank {}: modular filter rejected, recomputing exactly", d + 1);
            next_layer(ls, None, words, &layers, d, true)
        });
        let (layer, ix) = built.expect("exact layer");
        if layer.len() >= PROGRESS_MIN_FLATS {
            info!("{}: rank {} has {} flats", ls.name(), d + 1, layer.len());
        } else {
            debug!("{}: rank {} has {} flats", ls.name(), d + 1, layer.len());
        }
        layers.push(layer);
        index.push(ix);
    }
    if r >= 2 {
        let below = &layers[r - 1];
        let mut basis = below[0].basis.clone();
        let extra = (0..nl).find(|&i| !mask_get(&below[0].mask, i)).expect("top flat is larger");
        basis.push(extra as u32);
        let mut mask = mask_new(words);
        for i in 0..nl {
            mask_set(&mut mask, i);
        }
        let top = Flat {
            rank: r,
            basis,
            mask: mask.clone(),
            lower: (0..below.len() as u32).collect(),
            mobius: 0,
            label: 0,
            order: None,
            elliptic: None,
        };
        layers.push(vec![top]);
        index.push(HashMap::from([(mask, 0)]));
    }
    let mut fl = FlatLattice {
        system: Arc::new(ls.clone()),
        words,
        layers,
        index,
        labels: Vec::new(),
        label_ids: HashMap::new(),
    };
    mobius_all(&mut fl);
    fl
}

/// Full lattice: structure, Möbius values and type labels.
pub fn build_lattice(ls: &LineSystem) -> FlatLattice {
    let mut fl = build_lattice_raw(ls);
    assign_fingerprints(&mut fl, default_registry());
    fl
}

/// `μ(X) = Σ_{Y ⊊ X} (−1)^{rk X − rk Y − 1} μ(Y)`, with `μ(0) = 1`.
pub fn mobius_all(fl: &mut FlatLattice) {
    for d in 1..fl.layers.len() {
        let vals: Vec<i64> = {
            let fl_ref: &FlatLattice = fl;
            (0..fl_ref.layers[d].len())
                .into_par_iter()
                .map_init(
                    || Stamps::new(fl_ref),
                    |stamps, i| {
                        let mut acc = 0i64;
                        fl_ref.for_each_below(FlatId { rank: d as u32, idx: i as u32 }, stamps, |_, y| {
                            let sign = if (d - y.rank - 1) % 2 == 0 { 1 } else { -1 };
                            acc += sign * y.mobius;
                        });
                        acc
                    },
                )
                .collect()
        };
        for (f, v) in fl.layers[d].iter_mut().zip(vals) {
            f.mobius = v;
        }
    }
}

/// `Σ_d (Σ_{rk X = d} μ(X)) t^d`.
pub fn poincare(fl: &FlatLattice) -> IntPoly {
    IntPoly::from_i64(&fl.layers.iter().map(|l| l.iter().map(|f| f.mobius).sum()).collect::<Vec<i64>>())
}

pub const DELRES_CAP: usize = 25;

fn project_away(u: &Vector, v: &Vector) -> Vector {
    let ip = herm_form(u, v).expect("dims");
    let nu = crate::geometry::norm2(u).inv().expect("nonzero");
    v.sub_scaled(u, &ip.scale(&nu))
}

fn line_order_key(l: &Line) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(l.to_string().as_bytes());
    h.finalize().into()
}

fn delres(lines: Vec<Line>, memo: &mut HashMap<Vec<Line>, IntPoly>) -> IntPoly {
    if lines.is_empty() {
        return IntPoly::one();
    }
    if let Some(p) = memo.get(&lines) {
        return p.clone();
    }
    let h0 = lines.last().expect("nonempty").clone();
    let deleted: Vec<Line> = lines[..lines.len() - 1].to_vec();
    let mut restricted: Vec<Line> = Vec::new();
    for l in &deleted {
        let r = Line::new(project_away(h0.rep(), l.rep())).expect("distinct lines");
        if !restricted.contains(&r) {
            restricted.push(r);
        }
    }
    restricted.sort_by_cached_key(line_order_key);
    let a = delres(deleted, memo);
    let b = delres(restricted, memo);
    let p = &a + &(&IntPoly::from_i64(&[0, 1]) * &b);
    memo.insert(lines, p.clone());
    p
}

/// `p_A = p_{A − H_0} + t·p_{A^{H_0}}`, taking `H_0` to be the last hyperplane.
pub fn poincare_deletion_restriction(ls: &LineSystem) -> Result<IntPoly, LatticeError> {
    if ls.len() > DELRES_CAP {
        return Err(LatticeError::TooManyLines { cap: DELRES_CAP, lines: ls.len() });
    }
    let mut memo = HashMap::new();
    Ok(delres(ls.lines().to_vec(), &mut memo))
}

/// Order of the parabolic subgroup generated by the reflections in the
/// lines of `x`.
pub fn parabolic_order(fl: &FlatLattice, x: FlatId) -> Result<u64, LatticeError> {
    let lines = fl.lines_of(x);
    Ok(groups::parabolic_group_order(fl.system(), &lines, groups::DEFAULT_CAP)? as u64)
}

/// Fill in parabolic orders (memoized by label, line count and reflection
/// count, checked on two samples per key) and elliptic counts
/// `e(X) = |W_X| − Σ_{Y ⊊ X} e(Y)`. `full_order` is the order of the whole
/// group; when absent it is enumerated.
pub fn elliptic_all(fl: &mut FlatLattice, full_order: Option<u64>) -> Result<(), LatticeError> {
    let r = fl.rank();
    let top = fl.top();
    let mut keyed: BTreeMap<(u32, usize, usize), Vec<FlatId>> = BTreeMap::new();
    for id in fl.ids() {
        if id.rank == 0 || id == top {
            continue;
        }
        let f = fl.flat(id);
        let nrefl: usize = mask_indices(&f.mask).iter().map(|&i| fl.system().eigenvalues(i).len()).sum();
        keyed.entry((f.label, f.n_lines(), nrefl)).or_default().push(id);
    }
    let fl_ref: &FlatLattice = fl;
    let results: Vec<Result<Vec<(FlatId, u64)>, LatticeError>> = keyed
        .into_par_iter()
        .map(|(_, ids)| {
            let a = parabolic_order(fl_ref, ids[0])?;
            let same = if ids.len() > 1 { parabolic_order(fl_ref, ids[1])? == a } else { true };
            if same {
                Ok(ids.into_iter().map(|id| (id, a)).collect())
            } else {
                warn!("parabolic orders differ within a type; computing per flat");
                ids.into_iter().map(|id| Ok((id, parabolic_order(fl_ref, id)?))).collect()
            }
        })
        .collect();
    let mut orders: Vec<(FlatId, u64)> = Vec::new();
    for r in results {
        orders.extend(r?);
    }
    let top_order = match full_order {
        Some(o) => o,
        None if r == 0 => 1,
        None => groups::reflection_group(fl.system(), groups::DEFAULT_CAP)?.order() as u64,
    };
    for (id, o) in orders {
        fl.layers[id.rank as usize][id.idx as usize].order = Some(o);
    }
    fl.layers[top.rank as usize][top.idx as usize].order = Some(top_order);
    for d in 1..fl.layers.len() {
        let vals: Vec<i64> = {
            let fl_ref: &FlatLattice = fl;
            (0..fl_ref.layers[d].len())
                .into_par_iter()
                .map_init(
                    || Stamps::new(fl_ref),
                    |stamps, i| {
                        let id = FlatId { rank: d as u32, idx: i as u32 };
                        let mut acc = fl_ref.flat(id).order.expect("order set") as i64;
                        fl_ref.for_each_below(id, stamps, |_, y| acc -= y.elliptic.expect("lower ranks done"));
                        acc
                    },
                )
                .collect()
        };
        for (f, v) in fl.layers[d].iter_mut().zip(vals) {
            f.elliptic = Some(v);
        }
    }
    Ok(())
}

/// `Σ_d (Σ_{rk X = d} e(X)) t^d`.
pub fn codim_poly_via_lattice(fl: &FlatLattice) -> Result<IntPoly, LatticeError> {
    let mut c = Vec::new();
    for l in &fl.layers {
        let mut s = 0i64;
        for f in l {
            s += f.elliptic.ok_or(LatticeError::MissingOrders)?;
        }
        c.push(s);
    }
    Ok(IntPoly::from_i64(&c))
}

/// `p_W = (1+t)(1+(N*−1)t)` and `c_W = 1 + Nt + (|W|−N−1)t^2` for rank 2.
pub fn rank2_closed_form(n_star: i64, n: i64, order: i64) -> (IntPoly, IntPoly) {
    let p = &IntPoly::linear(1) * &IntPoly::linear(n_star - 1);
    let c = IntPoly::from_i64(&[1, n, order - n - 1]);
    (p, c)
}

/// `(g, h, k) = (2N/n, (N + N*)/n, 2N*/n)` for rank `n`.
pub fn coxeter_numbers(ls: &LineSystem, rank: usize) -> Option<(Ratio<i64>, Ratio<i64>, Ratio<i64>)> {
    if rank == 0 {
        return None;
    }
    let r = rank as i64;
    let n = ls.n_reflections() as i64;
    let ns = ls.n_hyperplanes() as i64;
    Some((Ratio::new(2 * n, r), Ratio::new(n + ns, r), Ratio::new(2 * ns, r)))
}

// ---------------------------------------------------------------------------
// fingerprints

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FingerprintKey {
    Rank2 { lines: usize, angles: [usize; 6] },
    Higher { rank: usize, lines: usize, sub: Vec<(String, usize)> },
}

impl FingerprintKey {
    fn synthetic_label(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{self:?}").as_bytes());
        let digest = hex::encode(h.finalize());
        match self {
            FingerprintKey::Rank2 { lines, .. } => format!("X2-{lines}-{}", &digest[..8]),
            FingerprintKey::Higher { rank, lines, .. } => format!("X{rank}-{lines}-{}", &digest[..8]),
        }
    }
}

fn angle_slot(a: Option<AngleClass>) -> usize {
    match a {
        Some(c) => AngleClass::ALL.iter().position(|&x| x == c).expect("catalog"),
        None => 5,
    }
}

fn rank2_key(ls: &LineSystem, lines: &[usize]) -> FingerprintKey {
    let tab = ls.angle_table();
    let mut angles = [0usize; 6];
    for (a, &i) in lines.iter().enumerate() {
        for &j in &lines[a + 1..] {
            angles[angle_slot(tab.angle(i, j))] += 1;
        }
    }
    FingerprintKey::Rank2 { lines: lines.len(), angles }
}

/// Maps keys to type names. Built from small reference systems.
#[derive(Clone, Debug, Default)]
pub struct FingerprintRegistry {
    map: HashMap<FingerprintKey, String>,
}

impl FingerprintRegistry {
    pub fn get(&self, k: &FingerprintKey) -> Option<&str> {
        self.map.get(k).map(String::as_str)
    }

    pub fn insert(&mut self, k: FingerprintKey, label: impl Into<String>) {
        self.map.entry(k).or_insert_with(|| label.into());
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn label_or_synthetic(&self, k: &FingerprintKey) -> String {
        self.get(k).map_or_else(|| k.synthetic_label(), str::to_string)
    }
}

pub const RANK2_REFERENCES: &[(&str, &str)] = &[
    ("A1×A1", "A1*A1"),
    ("A2", "A2"),
    ("B2", "B2"),
    ("G(5,5,2)", "G(5,5,2)"),
    ("G(4,2,2)", "G(4,2,2)"),
    ("W2(Q,±1)", "family:Q8:pm1:2"),
];

pub const HIGHER_REFERENCES: &[(&str, &str)] = &[
    ("A1×A1×A1", "A1*A1*A1"),
    ("A2×A1", "A2*A1"),
    ("A3", "A3"),
    ("B3", "B3"),
    ("B2×A1", "B2*A1"),
    ("G(3,3,3)", "G(3,3,3)"),
    ("G(4,4,3)", "G(4,4,3)"),
    ("G(4,2,3)", "G(4,2,3)"),
    ("H3", "H3"),
    ("G(5,5,2)×A1", "G(5,5,2)*A1"),
    ("G(5,5,3)", "G(5,5,3)"),
    ("G(4,2,2)×A1", "G(4,2,2)*A1"),
    ("W2(Q,±1)×A1", "family:Q8:pm1:2*A1"),
    ("W3(Q,±1)", "family:Q8:pm1:3"),
    ("A1×A1×A1×A1", "A1*A1*A1*A1"),
    ("A2×A1×A1", "A2*A1*A1"),
    ("A2×A2", "A2*A2"),
    ("A3×A1", "A3*A1"),
    ("A4", "A4"),
    ("D4", "D4"),
    ("B4", "B4"),
    ("F4", "F4"),
    ("G(3,3,3)×A1", "G(3,3,3)*A1"),
    ("G(3,3,4)", "G(3,3,4)"),
    ("S1", "S1"),
];

/// The registry derived from [`RANK2_REFERENCES`] and [`HIGHER_REFERENCES`].
pub fn default_registry() -> &'static FingerprintRegistry {
    static REG: OnceLock<FingerprintRegistry> = OnceLock::new();
    REG.get_or_init(|| {
        let mut reg = FingerprintRegistry::default();
        for (label, spec) in RANK2_REFERENCES {
            let ls = SystemSpec::parse(spec).and_then(|s| s.build()).expect("reference system");
            let all: Vec<usize> = (0..ls.len()).collect();
            reg.insert(rank2_key(&ls, &all), *label);
        }
        for (label, spec) in HIGHER_REFERENCES {
            let ls = SystemSpec::parse(spec).and_then(|s| s.build()).expect("reference system");
            let mut fl = build_lattice_raw(&ls);
            assign_fingerprints_up_to(&mut fl, &reg, 2);
            let key = higher_key(&fl, fl.top());
            reg.insert(key, *label);
        }
        reg
    })
}

fn higher_key(fl: &FlatLattice, id: FlatId) -> FingerprintKey {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut stamps = Stamps::new(fl);
    fl.for_each_below(id, &mut stamps, |_, y| {
        if y.rank == 2 {
            *counts.entry(fl.labels[y.label as usize].clone()).or_insert(0) += 1;
        }
    });
    FingerprintKey::Higher { rank: id.rank as usize, lines: fl.flat(id).n_lines(), sub: counts.into_iter().collect() }
}

/// The key used to name the type of a flat; rank 2 and higher only.
pub fn fingerprint_key(fl: &FlatLattice, id: FlatId) -> Option<FingerprintKey> {
    match id.rank {
        0 | 1 => None,
        2 => Some(rank2_key(fl.system(), &fl.lines_of(id))),
        _ => Some(higher_key(fl, id)),
    }
}

fn assign_fingerprints_up_to(fl: &mut FlatLattice, reg: &FingerprintRegistry, max_rank: usize) {
    let z = fl.intern("trivial");
    fl.layers[0][0].label = z;
    if fl.layers.len() > 1 {
        let a1 = fl.intern("A1");
        for f in fl.layers[1].iter_mut() {
            f.label = a1;
        }
    }
    let top = fl.top();
    let sys_name = fl.system.name().to_string();
    for d in 2..fl.layers.len().min(max_rank.saturating_add(1)) {
        let labels: Vec<String> = {
            let fl_ref: &FlatLattice = fl;
            (0..fl_ref.layers[d].len())
                .into_par_iter()
                .map(|i| {
                    let id = FlatId { rank: d as u32, idx: i as u32 };
                    let key = fingerprint_key(fl_ref, id).expect("rank ≥ 2");
                    match reg.get(&key) {
                        Some(s) => s.to_string(),
                        None if id == top => sys_name.clone(),
                        None => key.synthetic_label(),
                    }
                })
                .collect()
        };
        for (i, s) in labels.into_iter().enumerate() {
            let l = fl.intern(&s);
            fl.layers[d][i].label = l;
        }
    }
}

/// Label every flat: rank 1 is `A1`; higher ranks go through the registry,
/// with the system's own name for an unknown top flat and a stable
/// synthetic label otherwise.
pub fn assign_fingerprints(fl: &mut FlatLattice, reg: &FingerprintRegistry) {
    assign_fingerprints_up_to(fl, reg, usize::MAX);
}

/// Label of a flat.
pub fn fingerprint(fl: &FlatLattice, id: FlatId) -> &str {
    fl.label(id)
}

/// Lines of the system contained in `X^⊥`.
pub fn perp_lines(fl: &FlatLattice, id: FlatId) -> Vec<usize> {
    let c = orth_complement(&fl.subspace(id));
    (0..fl.system().len()).filter(|&i| c.contains_line(fl.system().line(i))).collect()
}

/// The flat equal to `X^⊥`, when `X^⊥` is spanned by lines of the system.
pub fn complement_flat(fl: &FlatLattice, id: FlatId) -> Option<FlatId> {
    let lines = perp_lines(fl, id);
    let target = fl.system().dim() - id.rank as usize;
    let found = fl.find(&fl.mask_of_lines(&lines))?;
    (found.rank as usize == target).then_some(found)
}

/// `A2` flats are split by what their orthogonal complement contains:
/// another `A2`, no line, or some other number of lines.
pub fn refined_label(fl: &FlatLattice, id: FlatId) -> String {
    let base = fl.label(id).to_string();
    if base != "A2" {
        return base;
    }
    let perp = perp_lines(fl, id);
    match perp.len() {
        0 => "A2(no-perp)".to_string(),
        3 if fl.flat_of_lines(&perp).rank == 2 && fl.label(fl.flat_of_lines(&perp)) == "A2" => {
            "A2(perp-A2)".to_string()
        }
        k => format!("A2(perp-{k})"),
    }
}

pub type Census = BTreeMap<usize, BTreeMap<String, usize>>;

/// Number of flats of each rank and type.
pub fn census(fl: &FlatLattice, refine: bool) -> Census {
    let mut out: Census = BTreeMap::new();
    for (d, layer) in fl.layers.iter().enumerate() {
        let labels: Vec<String> = if refine {
            (0..layer.len())
                .into_par_iter()
                .map(|i| refined_label(fl, FlatId { rank: d as u32, idx: i as u32 }))
                .collect()
        } else {
            layer.iter().map(|f| fl.labels[f.label as usize].clone()).collect()
        };
        let row = out.entry(d).or_default();
        for s in labels {
            *row.entry(s).or_insert(0) += 1;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// GS decomposition

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GsDecomposition {
    pub delta: Vec<usize>,
    pub lambda: Vec<usize>,
    pub gamma_a: Vec<usize>,
    pub gamma_b: Vec<usize>,
    pub gamma_c: Vec<usize>,
}

pub fn is_three_system(ls: &LineSystem) -> bool {
    let tab = ls.angle_table();
    (0..ls.len()).all(|i| {
        (0..ls.len()).all(|j| i == j || matches!(tab.angle(i, j), Some(AngleClass::Right) | Some(AngleClass::Pi3)))
    })
}

/// Partition the lines other than `a, b, c` by which of the three they are
/// orthogonal to.
pub fn gs_decomposition(ls: &LineSystem, star: [usize; 3]) -> Result<GsDecomposition, LatticeError> {
    if !is_three_system(ls) {
        return Err(LatticeError::NotThreeSystem);
    }
    let [a, b, c] = star;
    let tab = ls.angle_table();
    if a == b || b == c || a == c {
        return Err(LatticeError::NotThreeStar("repeated line".into()));
    }
    for (x, y) in [(a, b), (b, c), (a, c)] {
        if tab.angle(x, y) != Some(AngleClass::Pi3) {
            return Err(LatticeError::NotThreeStar("lines not pairwise at π/3".into()));
        }
    }
    let s = span(&[ls.line(a).rep().clone(), ls.line(b).rep().clone(), ls.line(c).rep().clone()]).expect("nonempty");
    if s.rank() != 2 {
        return Err(LatticeError::NotThreeStar("lines do not span a plane".into()));
    }
    let mut gs = GsDecomposition { delta: vec![], lambda: vec![], gamma_a: vec![], gamma_b: vec![], gamma_c: vec![] };
    for m in (0..ls.len()).filter(|m| !star.contains(m)) {
        let p = [tab.is_orthogonal(m, a), tab.is_orthogonal(m, b), tab.is_orthogonal(m, c)];
        match p {
            [true, true, true] => gs.delta.push(m),
            [false, false, false] => gs.lambda.push(m),
            [true, false, false] => gs.gamma_a.push(m),
            [false, true, false] => gs.gamma_b.push(m),
            [false, false, true] => gs.gamma_c.push(m),
            _ => unreachable!("orthogonal to two lines of a star means orthogonal to its plane"),
        }
    }
    Ok(gs)
}
