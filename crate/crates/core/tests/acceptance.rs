//! Acceptance criteria. Prints one `ACCEPTANCE n ...: PASS|FAIL` line per
//! criterion, with the failing comparisons indented below a FAIL, and exits
//! nonzero if any criterion fails. All comparisons are exact integer
//! equalities; the only tolerances are the wall-clock budgets below.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qarrange::geometry::{reflect_line, AngleClass};
use qarrange::groups::{family_codim_poly, family_poincare_poly, gmmn_poincare_poly, reflection_group, registry_order};
use qarrange::lattice::*;
use qarrange::poly::{factor_over_z, quadratic_is_irreducible, IntPoly};
use qarrange::systems::{gamma_group, reflection_closure, DeltaSpec, GammaSpec, LineSystem, SystemSpec};

/// Fast suite (Q and S1) budget, in total.
const FAST_BUDGET: Duration = Duration::from_secs(5 * 60);
/// Per-system budget for R, S2, S3 and T.
const FULL_BUDGET: Duration = Duration::from_secs(30 * 60);
const U_BUDGET: Duration = Duration::from_secs(120 * 60);
const FAMILY_BUDGET: Duration = Duration::from_secs(10 * 60);
/// Direct enumeration of `c_W` is only attempted up to this group order.
const ENUMERATION_LIMIT: usize = 100_000;
const RANDOM_SUBSYSTEMS: usize = 50;
const RANDOM_SEED: u64 = 20_240_601;

const EXCEPTIONAL: [&str; 7] = ["Q", "R", "S1", "S2", "S3", "T", "U"];

/// (system, p_W, factored p_W, c_W)
const TABLES: [(&str, &[i64], &str, &[i64]); 7] = [
    ("Q", &[1, 63, 987, 925], "(1+t)(1+25t)(1+37t)", &[1, 63, 1239, 10793]),
    ("R", &[1, 315, 23667, 23353], "(1+t)(1+121t)(1+193t)", &[1, 315, 27447, 1181837]),
    ("S1", &[1, 36, 438, 1924, 1521], "(1+t)(1+9t)(1+13t)(1+13t)", &[1, 36, 438, 2180, 4257]),
    ("S2", &[1, 72, 1722, 14176, 12525], "(1+t)(1+25t)(1+46t+501t^2)", &[1, 72, 1722, 16496, 64653]),
    ("S3", &[1, 180, 10326, 195220, 185073], "(1+t)(1+49t)(1+130t+3777t^2)", &[1, 180, 10974, 272420, 3034185]),
    ("T", &[1, 180, 10614, 207892, 197457], "(1+t)(1+61t)(1+118t+3237t^2)", &[1, 180, 10614, 244628, 2336577]),
    (
        "U",
        &[1, 165, 10010, 265210, 2657589, 2402225],
        "(1+t)(1+25t)(1+37t)(1+49t)(1+53t)",
        &[1, 165, 10010, 279290, 3658149, 23423905],
    ),
];

/// Irreducible quadratic factors that must appear.
const QUADRATICS: [(&str, [i64; 3]); 3] = [("S2", [1, 46, 501]), ("S3", [1, 130, 3777]), ("T", [1, 118, 3237])];

const FIXTURES: [(&str, i64, i64); 8] = [
    ("A1*A1*A1", 1, 1),
    ("A2*A1", 2, 2),
    ("A3", 6, 6),
    ("B3", 15, 15),
    ("G(3,3,3)", 16, 20),
    ("G(4,4,3)", 30, 42),
    ("family:Q8:pm1:3", 153, 525),
    ("G(3,3,4)", 168, 240),
];

/// (system, rank, refined labels, [(label, count)], whether the counts cover the whole rank)
type CensusRow = (&'static str, usize, bool, &'static [(&'static str, usize)], bool);

const CENSUSES: &[CensusRow] = &[
    ("Q", 2, false, &[("G(4,2,2)", 63), ("A2", 336)], true),
    ("R", 2, false, &[("A2", 8400), ("G(5,5,2)", 1008), ("W2(Q,±1)", 315)], true),
    ("S1", 2, false, &[("A1×A1", 54), ("A2", 192)], true),
    ("S1", 3, false, &[("A1×A1×A1", 36), ("A3", 144), ("G(3,3,3)", 64)], true),
    ("S2", 2, true, &[("A1×A1", 216), ("B2", 54), ("A2(perp-A2)", 96), ("A2(no-perp)", 576)], true),
    ("S2", 3, false, &[("A2×A1", 288), ("A3", 864), ("B3", 72), ("G(3,3,3)", 256), ("G(4,4,3)", 108)], true),
    ("S3", 2, false, &[("W2(Q,±1)", 54), ("A2", 3840), ("A1×A1", 2160)], true),
    ("S3", 3, false, &[("W3(Q,±1)", 180), ("G(3,3,3)", 2560), ("A3", 17280), ("A2×A1", 11520)], true),
    ("T", 2, true, &[("A1×A1", 1350), ("A2(perp-A2)", 600), ("A2(no-perp)", 3600), ("G(5,5,2)", 216)], true),
    (
        "T",
        3,
        false,
        &[("H3", 180), ("A2×A1", 1800), ("G(5,5,2)×A1", 1080), ("G(5,5,3)", 864), ("G(3,3,3)", 4000), ("A3", 14400)],
        true,
    ),
    ("U", 2, false, &[("A2", 3520), ("A1×A1", 2970)], true),
    ("U", 3, false, &[("A3", 23760), ("G(3,3,3)", 3520), ("A2×A1", 31680), ("A1×A1×A1", 2970)], true),
    ("U", 4, false, &[("S1", 165), ("G(3,3,4)", 7040), ("A4", 38016), ("G(3,3,3)×A1", 10560), ("A3×A1", 23760)], true),
    ("G(3,3,4)", 2, false, &[("A1×A1", 27), ("A2", 42)], true),
    ("G(3,3,4)", 3, false, &[("G(3,3,3)", 4), ("A3", 27), ("A2×A1", 18)], true),
];

/// Named systems for the whole-catalog property checks, beyond the
/// exceptional ones.
const CATALOG: &[&str] = &[
    "A1",
    "A2",
    "A3",
    "A4",
    "B2",
    "B3",
    "B4",
    "D4",
    "F4",
    "H3",
    "H4",
    "A1*A1",
    "A2*A1",
    "A1*A1*A1",
    "G(3,3,3)",
    "G(3,3,4)",
    "G(4,4,3)",
    "G(5,5,2)",
    "G(5,5,3)",
    "G(4,2,2)",
    "G(4,2,3)",
    "family:Q8:pm1:2",
    "family:Q8:pm1:3",
    "family:Q8:pm1:4",
];

/// Γ with every legal Δ.
const FAMILIES: &[(&str, &[&str])] = &[
    ("C2", &["triv", "full"]),
    ("C3", &["triv", "full"]),
    ("C4", &["triv", "index2", "full"]),
    ("Q8", &["pm1", "index2", "full"]),
];

fn build(spec: &str) -> LineSystem {
    SystemSpec::parse(spec).and_then(|s| s.build()).unwrap_or_else(|e| panic!("{spec}: {e}"))
}

/// Lattices shared between criteria, with `e` filled in once.
struct Store {
    lattices: HashMap<String, FlatLattice>,
    build_time: HashMap<String, Duration>,
}

impl Store {
    fn get(&mut self, spec: &str) -> &FlatLattice {
        if !self.lattices.contains_key(spec) {
            let t = Instant::now();
            let ls = build(spec);
            let mut fl = build_lattice(&ls);
            let order = registry_order(ls.name());
            elliptic_all(&mut fl, order).unwrap_or_else(|e| panic!("{spec}: {e}"));
            self.build_time.insert(spec.to_string(), t.elapsed());
            self.lattices.insert(spec.to_string(), fl);
        }
        &self.lattices[spec]
    }
}

struct Outcome {
    summary: String,
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { summary: String::new(), failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn eq<T: PartialEq + std::fmt::Display>(&mut self, what: &str, got: T, want: T) {
        self.check(got == want, || format!("{what}: expected {want}, got {got}"));
    }
}

fn within(o: &mut Outcome, what: &str, took: Duration, budget: Duration) {
    o.check(took <= budget, || format!("{what}: took {took:.1?}, budget {budget:.0?}"));
}

fn c1_poincare(st: &mut Store) -> Outcome {
    let mut o = Outcome::new();
    let mut fast = Duration::ZERO;
    for (name, p, pf, _) in TABLES {
        let got = poincare(st.get(name));
        let took = st.build_time[name];
        o.eq(&format!("{name} p_W"), got.clone(), IntPoly::from_i64(p));
        match factor_over_z(&got) {
            Ok(f) => {
                o.check(f.is_complete(), || format!("{name}: factorization left unverified residuals"));
                o.eq(&format!("{name} factored"), f.to_string(), pf.to_string());
            }
            Err(e) => o.failures.push(format!("{name}: factorization failed: {e}")),
        }
        match name {
            "Q" | "S1" => fast += took,
            "U" => within(&mut o, name, took, U_BUDGET),
            _ => within(&mut o, name, took, FULL_BUDGET),
        }
    }
    within(&mut o, "Q + S1", fast, FAST_BUDGET);
    for (name, q) in QUADRATICS {
        let q = IntPoly::from_i64(&q);
        o.check(quadratic_is_irreducible(&q), || format!("{name}: {q} is reducible"));
        let f = factor_over_z(&poincare(st.get(name))).expect("factored above");
        o.check(f.factors.iter().any(|(g, _)| *g == q), || format!("{name}: {q} is not a factor"));
    }
    let total: Duration = EXCEPTIONAL.iter().map(|n| st.build_time[*n]).sum();
    o.summary = format!("7 systems, lattices built in {total:.1?} (U {:.1?})", st.build_time["U"]);
    o
}

fn c2_codim(st: &mut Store) -> Outcome {
    let mut o = Outcome::new();
    for (name, _, _, c) in TABLES {
        let fl = st.get(name);
        match codim_poly_via_lattice(fl) {
            Ok(got) => o.eq(&format!("{name} c_W"), got, IntPoly::from_i64(c)),
            Err(e) => o.failures.push(format!("{name}: {e}")),
        }
        // row sums of c_W are the group orders
        let sum: i64 = c.iter().sum();
        o.check(registry_order(name) == Some(sum as u64), || format!("{name}: c_W(1) = {sum} differs from |W|"));
    }
    o.summary = "7 systems via e-invariants and parabolic orders".to_string();
    o
}

fn c3_families(st: &mut Store) -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let mut cases: Vec<(&str, &str, usize)> = Vec::new();
    for (g, deltas) in FAMILIES {
        for d in *deltas {
            for n in [2, 3] {
                cases.push((g, d, n));
            }
        }
    }
    cases.push(("Q8", "pm1", 4));
    let mut enumerated = 0;
    for &(g, d, n) in &cases {
        let spec = format!("family:{g}:{d}:{n}");
        let gamma =
            gamma_group(GammaSpec::parse(g).unwrap()).unwrap().with_delta(DeltaSpec::parse(d).unwrap()).unwrap();
        let (m, p) = (gamma.order() as u64, gamma.delta_order() as u64);
        let fl = st.get(&spec);
        let want_p = if p == 1 { gmmn_poincare_poly(m, n as u64) } else { family_poincare_poly(m, n as u64) };
        o.eq(&format!("{spec} p_W"), poincare(fl), want_p);
        let formula = family_codim_poly(m, p, n as u64);
        match codim_poly_via_lattice(fl) {
            Ok(c) => o.eq(&format!("{spec} c_W lattice"), c, formula.clone()),
            Err(e) => o.failures.push(format!("{spec}: {e}")),
        }
        let order = formula.eval_i64(1);
        if order <= ENUMERATION_LIMIT.into() {
            match reflection_group(fl.system(), ENUMERATION_LIMIT) {
                Ok(w) => {
                    enumerated += 1;
                    o.eq(&format!("{spec} c_W enumerated"), w.codim_census(), formula);
                }
                Err(e) => o.failures.push(format!("{spec}: {e}")),
            }
        }
    }
    within(&mut o, "families", t.elapsed(), FAMILY_BUDGET);
    o.summary = format!("{} groups, {enumerated} also enumerated, {:.1?}", cases.len(), t.elapsed());
    o
}

fn c4_fixtures(st: &mut Store) -> Outcome {
    let mut o = Outcome::new();
    for (name, mu, e) in FIXTURES {
        let fl = st.get(name);
        let top = fl.flat(fl.top());
        o.eq(&format!("{name} mu"), top.mobius, mu);
        o.eq(&format!("{name} e"), top.elliptic.unwrap_or(-1), e);
    }
    o.summary = format!("{} fixtures", FIXTURES.len());
    o
}

fn c5_censuses(st: &mut Store) -> Outcome {
    let mut o = Outcome::new();
    let mut refined: HashMap<&str, Census> = HashMap::new();
    let mut counts = 0;
    for &(name, rank, refine, row, complete) in CENSUSES {
        let fl = st.get(name);
        let layer = fl.layer(rank).len();
        let c =
            if refine { refined.entry(name).or_insert_with(|| census(fl, true)).clone() } else { census(fl, false) };
        let got = c.get(&rank).cloned().unwrap_or_default();
        for &(label, n) in row {
            counts += 1;
            o.eq(&format!("{name} rank {rank} {label}"), got.get(label).copied().unwrap_or(0), n);
        }
        if complete {
            let sum: usize = row.iter().map(|r| r.1).sum();
            o.eq(&format!("{name} rank {rank} total"), layer, sum);
        }
    }
    o.summary = format!("{counts} counts in {} rows", CENSUSES.len());
    o
}

fn random_subsystems(rng: &mut ChaCha8Rng) -> Vec<LineSystem> {
    let parents: Vec<LineSystem> = ["S1", "S2", "T", "U", "R", "family:Q8:full:3"].iter().map(|s| build(s)).collect();
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < RANDOM_SUBSYSTEMS {
        tries += 1;
        assert!(tries < 10_000, "could not draw closed subsystems");
        let parent = parents.choose(rng).unwrap();
        let k = rng.gen_range(2..=4);
        let seed: Vec<_> = parent.lines().choose_multiple(rng, k).cloned().collect();
        if let Ok(ls) = reflection_closure(&seed, DELRES_CAP) {
            out.push(ls.renamed(format!("sub{}", out.len())));
        }
    }
    out
}

fn three_stars(ls: &LineSystem) -> BTreeSet<[usize; 3]> {
    let tab = ls.angle_table();
    let mut stars = BTreeSet::new();
    for a in 0..ls.len() {
        for b in a + 1..ls.len() {
            if tab.angle(a, b) == Some(AngleClass::Pi3) {
                let c = ls.index_of(&reflect_line(ls.line(a), ls.line(b))).expect("star-closed");
                let mut s = [a, b, c];
                s.sort_unstable();
                stars.insert(s);
            }
        }
    }
    stars
}

fn dual_labels(fl: &FlatLattice, rank: usize, label: &str) -> Option<BTreeMap<String, usize>> {
    let mut out = BTreeMap::new();
    for (i, f) in fl.layer(rank).iter().enumerate() {
        let id = FlatId { rank: rank as u32, idx: i as u32 };
        if fl.labels()[f.label as usize] != label {
            continue;
        }
        let c = complement_flat(fl, id)?;
        if complement_flat(fl, c) != Some(id) {
            return None;
        }
        *out.entry(fl.label(c).to_string()).or_insert(0) += 1;
    }
    Some(out)
}

fn c6_properties(st: &mut Store) -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();

    let mut names: Vec<String> = st.lattices.keys().cloned().chain(CATALOG.iter().map(|s| s.to_string())).collect();
    names.sort();
    names.dedup();
    let mut flats = 0;
    for name in &names {
        let fl = st.get(name);
        for id in fl.ids() {
            flats += 1;
            let mu = fl.flat(id).mobius;
            o.check(mu > 0, || format!("{name} {id:?}: mu = {mu}"));
        }
        o.eq(&format!("{name} p(-1)"), poincare(fl).eval_i64(-1), 0.into());
    }

    let mut small: Vec<LineSystem> = Vec::new();
    for name in &names {
        let ls = st.get(name).system().clone();
        if ls.len() <= DELRES_CAP {
            small.push(ls);
        }
    }
    let n_small = small.len();
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    small.extend(random_subsystems(&mut rng));
    for ls in &small {
        match poincare_deletion_restriction(ls) {
            Ok(p) => o.eq(&format!("{} deletion-restriction", ls.name()), p, poincare(&build_lattice(ls))),
            Err(e) => o.failures.push(format!("{}: {e}", ls.name())),
        }
    }

    let mut catalog: Vec<&str> = EXCEPTIONAL.to_vec();
    catalog.extend(CATALOG);
    for name in &catalog {
        let ls = build(name);
        o.check(ls.is_star_closed(), || format!("{name} is not star-closed"));
        o.check(ls.angle_table().all_in_catalog(), || format!("{name} has an angle outside the five classes"));
    }

    let mut stars = 0;
    for name in ["S1", "U", "G(3,3,3)", "G(3,3,4)", "G(3,3,5)"] {
        let ls = build(name);
        o.check(is_three_system(&ls), || format!("{name} is not a 3-system"));
        for s in three_stars(&ls) {
            stars += 1;
            match gs_decomposition(&ls, s) {
                Ok(gs) => o.check(gs.lambda.len() % 6 == 0, || format!("{name} {s:?}: |Λ| = {}", gs.lambda.len())),
                Err(e) => o.failures.push(format!("{name} {s:?}: {e}")),
            }
        }
    }

    let duals = [("Q", 1, "A1", "G(4,2,2)", 63), ("U", 2, "A2", "G(3,3,3)", 3520), ("U", 2, "A1×A1", "A1×A1×A1", 2970)];
    for (name, rank, from, to, n) in duals {
        let got = dual_labels(st.get(name), rank, from);
        let want = BTreeMap::from([(to.to_string(), n)]);
        o.check(got.as_ref() == Some(&want), || {
            format!("{name}: complements of {from} are {got:?}, expected {want:?}")
        });
    }

    o.summary = format!(
        "{flats} flats, {} deletion-restriction checks ({n_small} named, {RANDOM_SUBSYSTEMS} random), {} catalog systems, {stars} 3-stars, {:.1?}",
        small.len(),
        catalog.len(),
        t.elapsed()
    );
    o
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut st = Store { lattices: HashMap::new(), build_time: HashMap::new() };
    type Criterion = fn(&mut Store) -> Outcome;
    let criteria: [(&str, Criterion); 6] = [
        ("1 Poincaré polynomials of the exceptional groups", c1_poincare),
        ("2 codimension polynomials of the exceptional groups", c2_codim),
        ("3 imprimitive families: lattice vs enumeration vs product formula", c3_families),
        ("4 mu and e fixtures", c4_fixtures),
        ("5 flat censuses", c5_censuses),
        ("6 property suites", c6_properties),
    ];
    let mut failed = 0;
    for (title, f) in criteria {
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| f(&mut st))).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Outcome { summary: String::new(), failures: vec![format!("panicked: {}", msg.unwrap_or_default())] }
        });
        let status = if outcome.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("ACCEPTANCE {title}: {status} ({}; {:.1?})", outcome.summary, t.elapsed());
        for msg in &outcome.failures {
            println!("    {msg}");
        }
        if !outcome.failures.is_empty() {
            failed += 1;
        }
    }
    println!("ACCEPTANCE 7 topological statements: NOT TESTED (taken as the definition of p_W; see README)");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
