//! Registry of reference values and the harness that recomputes them.

use std::collections::BTreeMap;
use std::fmt;

use log::info;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::LatticeCache;
use crate::groups::{self, registry_order};
use crate::lattice::{self, Census, FlatLattice, LatticeError};
use crate::poly::{factor_over_z, IntPoly};
use crate::systems::{gamma_group, LineSystem, SystemError, SystemSpec};

pub const REGISTRY_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Group(#[from] groups::GroupError),
    #[error("record {0}: {1}")]
    BadRecord(String, String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Fast,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// Number of lines.
    Lines,
    /// Poincaré polynomial from Möbius values.
    Poincare,
    /// Factorization of the Poincaré polynomial over `Z[t]`.
    PoincareFactored,
    /// Codimension polynomial from elliptic counts.
    Codim,
    /// Codimension polynomial by enumerating the group.
    CodimEnumerated,
    /// Number of flats of a given rank and label.
    CensusCount,
    /// Group order by enumeration.
    Order,
    /// Möbius value of the top flat.
    Mu,
    /// Elliptic count of the top flat.
    E,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("serializable");
        f.write_str(s.as_str().expect("string variant"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub system: String,
    pub quantity: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Count `A2` flats by what their orthogonal complement contains.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub refined: bool,
    pub expected: String,
    pub source: String,
    pub suite: Suite,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Registry {
    pub version: u32,
    pub records: Vec<Record>,
}

const SRC_P: &str = "reference table of Poincaré polynomials";
const SRC_C: &str = "reference table of codimension polynomials";
const SRC_CENSUS: &str = "census of flats by type";
const SRC_FIXTURE: &str = "small-rank μ/e fixture";
const SRC_ORDER: &str = "group order";
const SRC_LINES: &str = "line count";
const SRC_FAMILY_P: &str = "family Poincaré product formula";
const SRC_FAMILY_C: &str = "family codimension product formula";

struct Builder {
    records: Vec<Record>,
}

impl Builder {
    fn push(&mut self, suite: Suite, system: &str, quantity: Quantity, expected: impl ToString, source: &str) {
        self.records.push(Record {
            id: format!("{system}/{quantity}"),
            system: system.to_string(),
            quantity,
            rank: None,
            label: None,
            refined: false,
            expected: expected.to_string(),
            source: source.to_string(),
            suite,
        });
    }

    fn census(&mut self, suite: Suite, system: &str, rank: usize, label: &str, refined: bool, count: u64) {
        self.records.push(Record {
            id: format!("{system}/census/{rank}/{label}"),
            system: system.to_string(),
            quantity: Quantity::CensusCount,
            rank: Some(rank),
            label: Some(label.to_string()),
            refined,
            expected: count.to_string(),
            source: SRC_CENSUS.to_string(),
            suite,
        });
    }

    fn exceptional(&mut self, suite: Suite, name: &str, lines: usize, p: &str, pf: &str, c: &str) {
        self.push(suite, name, Quantity::Lines, lines, SRC_LINES);
        self.push(suite, name, Quantity::Poincare, p, SRC_P);
        self.push(suite, name, Quantity::PoincareFactored, pf, SRC_P);
        self.push(suite, name, Quantity::Codim, c, SRC_C);
    }
}

/// Gammas and normal subgroups with `Δ ≠ 1` used for the family checks.
pub const FAMILY_CASES: &[(&str, &str)] =
    &[("C2", "full"), ("C3", "full"), ("C4", "full"), ("C4", "index2"), ("Q8", "full"), ("Q8", "pm1")];

/// The built-in registry. Family expectations are generated from the
/// closed-form products; every other value is a fixed constant.
pub fn builtin_registry() -> Registry {
    use Quantity::*;
    use Suite::*;
    let mut b = Builder { records: Vec::new() };

    b.exceptional(Fast, "Q", 63, "1+63t+987t^2+925t^3", "(1+t)(1+25t)(1+37t)", "1+63t+1239t^2+10793t^3");
    b.push(Fast, "Q", Order, 12096, SRC_ORDER);
    b.push(Fast, "Q", CodimEnumerated, "1+63t+1239t^2+10793t^3", SRC_C);
    b.census(Fast, "Q", 2, "G(4,2,2)", false, 63);
    b.census(Fast, "Q", 2, "A2", false, 336);

    b.exceptional(
        Fast,
        "S1",
        36,
        "1+36t+438t^2+1924t^3+1521t^4",
        "(1+t)(1+9t)(1+13t)(1+13t)",
        "1+36t+438t^2+2180t^3+4257t^4",
    );
    b.push(Fast, "S1", Order, 6912, SRC_ORDER);
    b.push(Fast, "S1", CodimEnumerated, "1+36t+438t^2+2180t^3+4257t^4", SRC_C);
    b.push(Fast, "S1", Mu, 1521, SRC_FIXTURE);
    b.push(Fast, "S1", E, 4257, SRC_FIXTURE);
    for (r, l, n) in [(2, "A1×A1", 54), (2, "A2", 192), (3, "A1×A1×A1", 36), (3, "A3", 144), (3, "G(3,3,3)", 64)] {
        b.census(Fast, "S1", r, l, false, n);
    }

    for (sys, mu, e) in [
        ("A1*A1*A1", 1, 1),
        ("A2*A1", 2, 2),
        ("A3", 6, 6),
        ("B3", 15, 15),
        ("G(3,3,3)", 16, 20),
        ("G(4,4,3)", 30, 42),
        ("family:Q8:pm1:3", 153, 525),
        ("G(3,3,4)", 168, 240),
    ] {
        b.push(Fast, sys, Mu, mu, SRC_FIXTURE);
        b.push(Fast, sys, E, e, SRC_FIXTURE);
    }
    for (r, l, n) in [(2, "A1×A1", 27), (2, "A2", 42), (3, "G(3,3,3)", 4), (3, "A3", 27), (3, "A2×A1", 18)] {
        b.census(Fast, "G(3,3,4)", r, l, false, n);
    }

    let mut family = |g: &str, d: &str, n: u64| {
        let gg = gamma_group(crate::systems::GammaSpec::parse(g).expect("known gamma"))
            .expect("gamma group")
            .with_delta(crate::systems::DeltaSpec::parse(d).expect("known delta"))
            .expect("admissible");
        let m = gg.order() as u64;
        let p = groups::family_poincare_poly(m, n);
        let c = groups::family_codim_poly(m, gg.delta_order() as u64, n);
        let sys = format!("family:{g}:{d}:{n}");
        b.push(Fast, &sys, Poincare, &p, SRC_FAMILY_P);
        b.push(Fast, &sys, Codim, &c, SRC_FAMILY_C);
        b.push(Fast, &sys, CodimEnumerated, &c, SRC_FAMILY_C);
    };
    for &(g, d) in FAMILY_CASES {
        for n in [2, 3] {
            family(g, d, n);
        }
    }
    family("Q8", "pm1", 4);

    b.exceptional(Full, "R", 315, "1+315t+23667t^2+23353t^3", "(1+t)(1+121t)(1+193t)", "1+315t+27447t^2+1181837t^3");
    for (l, n) in [("A2", 8400), ("G(5,5,2)", 1008), ("W2(Q,±1)", 315)] {
        b.census(Full, "R", 2, l, false, n);
    }

    b.exceptional(
        Full,
        "S2",
        72,
        "1+72t+1722t^2+14176t^3+12525t^4",
        "(1+t)(1+25t)(1+46t+501t^2)",
        "1+72t+1722t^2+16496t^3+64653t^4",
    );
    b.push(Full, "S2", Order, 82944, SRC_ORDER);
    for (l, n) in [("A1×A1", 216), ("B2", 54), ("A2(perp-A2)", 96), ("A2(no-perp)", 576)] {
        b.census(Full, "S2", 2, l, true, n);
    }
    for (l, n) in [("A2×A1", 288), ("A3", 864), ("B3", 72), ("G(3,3,3)", 256), ("G(4,4,3)", 108)] {
        b.census(Full, "S2", 3, l, false, n);
    }

    b.exceptional(
        Full,
        "S3",
        180,
        "1+180t+10326t^2+195220t^3+185073t^4",
        "(1+t)(1+49t)(1+130t+3777t^2)",
        "1+180t+10974t^2+272420t^3+3034185t^4",
    );
    for (r, l, n) in [
        (2, "W2(Q,±1)", 54),
        (2, "A2", 3840),
        (2, "A1×A1", 2160),
        (3, "W3(Q,±1)", 180),
        (3, "G(3,3,3)", 2560),
        (3, "A3", 17280),
        (3, "A2×A1", 11520),
    ] {
        b.census(Full, "S3", r, l, false, n);
    }

    b.exceptional(
        Full,
        "T",
        180,
        "1+180t+10614t^2+207892t^3+197457t^4",
        "(1+t)(1+61t)(1+118t+3237t^2)",
        "1+180t+10614t^2+244628t^3+2336577t^4",
    );
    for (l, n) in [("A1×A1", 1350), ("A2(perp-A2)", 600), ("A2(no-perp)", 3600), ("G(5,5,2)", 216)] {
        b.census(Full, "T", 2, l, true, n);
    }
    for (l, n) in
        [("H3", 180), ("A2×A1", 1800), ("G(5,5,2)×A1", 1080), ("G(5,5,3)", 864), ("G(3,3,3)", 4000), ("A3", 14400)]
    {
        b.census(Full, "T", 3, l, false, n);
    }

    b.exceptional(
        Full,
        "U",
        165,
        "1+165t+10010t^2+265210t^3+2657589t^4+2402225t^5",
        "(1+t)(1+25t)(1+37t)(1+49t)(1+53t)",
        "1+165t+10010t^2+279290t^3+3658149t^4+23423905t^5",
    );
    for (r, l, n) in [
        (2, "A2", 3520),
        (2, "A1×A1", 2970),
        (3, "A3", 23760),
        (3, "G(3,3,3)", 3520),
        (3, "A2×A1", 31680),
        (3, "A1×A1×A1", 2970),
        (4, "S1", 165),
        (4, "G(3,3,4)", 7040),
        (4, "A4", 38016),
        (4, "G(3,3,3)×A1", 10560),
        (4, "A3×A1", 23760),
    ] {
        b.census(Full, "U", r, l, false, n);
    }

    Registry { version: REGISTRY_VERSION, records: b.records }
}

#[derive(Clone, Debug, Serialize)]
pub struct RecordResult {
    pub id: String,
    pub system: String,
    pub quantity: Quantity,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
    pub source: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub registry_version: u32,
    pub suite: Suite,
    pub checked: usize,
    pub passed: usize,
    pub results: Vec<RecordResult>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.passed == self.checked
    }
}

/// Lazily computed data for one system.
pub struct SystemWork<'a> {
    ls: LineSystem,
    spec: SystemSpec,
    cache: Option<&'a LatticeCache>,
    lattice: Option<FlatLattice>,
    elliptic: bool,
    census: [Option<Census>; 2],
}

impl<'a> SystemWork<'a> {
    pub fn new(spec: &str, cache: Option<&'a LatticeCache>) -> Result<Self, VerifyError> {
        let spec = SystemSpec::parse(spec)?;
        let ls = spec.build()?;
        Ok(SystemWork { ls, spec, cache, lattice: None, elliptic: false, census: [None, None] })
    }

    pub fn system(&self) -> &LineSystem {
        &self.ls
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn lattice(&mut self) -> &FlatLattice {
        if self.lattice.is_none() {
            let cached = self.cache.and_then(|c| match c.load(&self.ls) {
                Ok(v) => v,
                Err(e) => {
                    log::warn!("ignoring cache entry for {}: {e}", self.ls.name());
                    None
                }
            });
            let fl = match cached {
                Some(fl) => {
                    info!("{}: lattice loaded from cache", self.ls.name());
                    self.elliptic = fl.flat(fl.top()).elliptic.is_some();
                    fl
                }
                None => {
                    let fl = lattice::build_lattice(&self.ls);
                    self.store(&fl);
                    fl
                }
            };
            self.lattice = Some(fl);
        }
        self.lattice.as_ref().expect("just built")
    }

    fn store(&self, fl: &FlatLattice) {
        if let Some(c) = self.cache {
            if let Err(e) = c.store(fl) {
                log::warn!("could not write cache for {}: {e}", self.ls.name());
            }
        }
    }

    /// The lattice with parabolic orders and elliptic counts filled in.
    pub fn lattice_with_elliptic(&mut self) -> Result<&FlatLattice, VerifyError> {
        self.lattice();
        if !self.elliptic {
            let full = registry_order(self.ls.name());
            let fl = self.lattice.as_mut().expect("built");
            lattice::elliptic_all(fl, full)?;
            self.elliptic = true;
            let fl = self.lattice.as_ref().expect("built");
            self.store(fl);
        }
        Ok(self.lattice.as_ref().expect("built"))
    }

    pub fn census(&mut self, refined: bool) -> &Census {
        let k = refined as usize;
        if self.census[k].is_none() {
            let c = lattice::census(self.lattice(), refined);
            self.census[k] = Some(c);
        }
        self.census[k].as_ref().expect("just computed")
    }

    pub fn compute(&mut self, r: &Record) -> Result<String, VerifyError> {
        Ok(match r.quantity {
            Quantity::Lines => self.ls.len().to_string(),
            Quantity::Poincare => lattice::poincare(self.lattice()).to_string(),
            Quantity::PoincareFactored => {
                let p = lattice::poincare(self.lattice());
                factor_over_z(&p).map_err(|e| VerifyError::BadRecord(r.id.clone(), e.to_string()))?.to_string()
            }
            Quantity::Codim => lattice::codim_poly_via_lattice(self.lattice_with_elliptic()?)?.to_string(),
            Quantity::CodimEnumerated => {
                groups::reflection_group(&self.ls, groups::DEFAULT_CAP)?.codim_census().to_string()
            }
            Quantity::Order => groups::reflection_group(&self.ls, groups::DEFAULT_CAP)?.order().to_string(),
            Quantity::Mu => {
                let fl = self.lattice();
                fl.flat(fl.top()).mobius.to_string()
            }
            Quantity::E => {
                let fl = self.lattice_with_elliptic()?;
                fl.flat(fl.top()).elliptic.expect("computed").to_string()
            }
            Quantity::CensusCount => {
                let (rank, label) = match (r.rank, &r.label) {
                    (Some(k), Some(l)) => (k, l.clone()),
                    _ => return Err(VerifyError::BadRecord(r.id.clone(), "census record needs rank and label".into())),
                };
                let c = self.census(r.refined);
                c.get(&rank).and_then(|row| row.get(&label)).copied().unwrap_or(0).to_string()
            }
        })
    }
}

/// Recompute every record of `suite` (the full suite includes the fast
/// one), grouping records by system so each lattice is built once.
pub fn run_suite(registry: &Registry, suite: Suite, cache: Option<&LatticeCache>) -> Result<Report, VerifyError> {
    let selected: Vec<&Record> = registry.records.iter().filter(|r| r.suite <= suite).collect();
    let mut by_system: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for (i, r) in selected.iter().enumerate() {
        if !by_system.contains_key(r.system.as_str()) {
            order.push(&r.system);
        }
        by_system.entry(&r.system).or_default().push(i);
    }
    let mut actual: Vec<Option<String>> = vec![None; selected.len()];
    for sys in order {
        info!("verifying {sys}");
        let mut work = SystemWork::new(sys, cache)?;
        for &i in &by_system[sys] {
            actual[i] = Some(work.compute(selected[i])?);
        }
    }
    let results: Vec<RecordResult> = selected
        .iter()
        .zip(actual)
        .map(|(r, a)| {
            let a = a.expect("computed");
            RecordResult {
                id: r.id.clone(),
                system: r.system.clone(),
                quantity: r.quantity,
                pass: a == r.expected,
                expected: r.expected.clone(),
                actual: a,
                source: r.source.clone(),
            }
        })
        .collect();
    let passed = results.iter().filter(|r| r.pass).count();
    Ok(Report { registry_version: registry.version, suite, checked: results.len(), passed, results })
}

/// Parse a polynomial in the `1+63t+987t^2` rendering.
pub fn parse_poly(s: &str) -> Option<IntPoly> {
    let mut coeffs: Vec<i64> = Vec::new();
    let s = s.replace(' ', "");
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, ch) in s.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        terms.push(cur);
    }
    for t in terms {
        let (c, e) = match t.find('t') {
            None => (t.parse::<i64>().ok()?, 0usize),
            Some(k) => {
                let c = match &t[..k] {
                    "" | "+" => 1,
                    "-" => -1,
                    x => x.parse::<i64>().ok()?,
                };
                let e = match &t[k + 1..] {
                    "" => 1,
                    x => x.strip_prefix('^')?.parse::<usize>().ok()?,
                };
                (c, e)
            }
        };
        if coeffs.len() <= e {
            coeffs.resize(e + 1, 0);
        }
        coeffs[e] += c;
    }
    Some(IntPoly::from_i64(&coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_shape() {
        let reg = builtin_registry();
        let fast = reg.records.iter().filter(|r| r.suite == Suite::Fast).count();
        assert!(fast >= 60, "{fast}");
        let mut ids: Vec<&str> = reg.records.iter().map(|r| r.id.as_str()).collect();
        ids.sort();
        let n = ids.len();
        ids.dedup();
        assert_eq!(ids.len(), n, "record ids are unique");
        assert!(reg.records.iter().all(|r| !r.source.is_empty()));
        for r in &reg.records {
            if matches!(r.quantity, Quantity::Poincare | Quantity::Codim | Quantity::CodimEnumerated) {
                assert_eq!(parse_poly(&r.expected).unwrap().to_string(), r.expected, "{}", r.id);
            }
        }
    }

    #[test]
    fn poly_parsing() {
        assert_eq!(parse_poly("1+63t+987t^2+925t^3").unwrap(), IntPoly::from_i64(&[1, 63, 987, 925]));
        assert_eq!(parse_poly("1-t").unwrap(), IntPoly::from_i64(&[1, -1]));
        assert_eq!(parse_poly("1").unwrap(), IntPoly::one());
        assert!(parse_poly("1+x").is_none());
    }

    #[test]
    fn perturbed_record_fails() {
        let mut reg = builtin_registry();
        reg.records.retain(|r| r.system == "G(3,3,3)");
        let rep = run_suite(&reg, Suite::Fast, None).unwrap();
        assert!(rep.all_pass());
        reg.records[0].expected = "17".into();
        let rep = run_suite(&reg, Suite::Fast, None).unwrap();
        assert!(!rep.all_pass());
        assert_eq!(rep.results.iter().filter(|r| !r.pass).count(), 1);
    }
}
