use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qarrange::cache::LatticeCache;
use qarrange::groups::{self, GroupError};
use qarrange::lattice::{self, FlatId, LatticeError};
use qarrange::poly::{factor_over_z, IntPoly};
use qarrange::systems::{gamma_group, GammaGroup, LineSystem, SystemError, SystemSpec, EXCEPTIONAL};
use qarrange::verify::{builtin_registry, run_suite, Registry, Suite, SystemWork, VerifyError};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(name = "qarrange", version, about = "Line systems and reflection arrangements over the quaternions")]
struct Cli {
    /// Recompute lattices instead of reading or writing the cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Worker threads for lattice construction (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the lines of a system.
    Lines {
        system: String,
        #[arg(long)]
        json: bool,
    },
    /// Flat counts by rank, optionally with a census by type.
    Lattice {
        system: String,
        #[arg(long)]
        census: bool,
        /// Split A2 flats by the lines orthogonal to them.
        #[arg(long)]
        refine: bool,
        #[arg(long)]
        json: bool,
    },
    /// Poincaré polynomial of the reflection arrangement.
    Poincare {
        system: String,
        #[arg(long)]
        factor: bool,
        #[arg(long, value_enum, default_value_t = PoincareMethod::Mobius)]
        method: PoincareMethod,
        #[arg(long)]
        json: bool,
    },
    /// Codimension generating function of the reflection group.
    Codim {
        system: String,
        #[arg(long, value_enum, default_value_t = CodimMethod::Lattice)]
        method: CodimMethod,
        #[arg(long)]
        factor: bool,
        #[arg(long)]
        json: bool,
    },
    /// Split the lines of a 3-system around a star of three lines.
    Gs {
        system: String,
        /// Indices of the star's lines; the first star found when omitted.
        #[arg(num_args = 3)]
        star: Vec<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Closed-form data for the monomial family W_n(Γ, Δ).
    Family {
        gamma: String,
        delta: String,
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Recompute the reference values and compare.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::Fast)]
        suite: SuiteArg,
        #[arg(long)]
        json: bool,
        /// Use a registry file instead of the built-in one.
        #[arg(long)]
        registry: Option<PathBuf>,
        /// Print the built-in registry as JSON and exit.
        #[arg(long)]
        dump_registry: bool,
    },
    /// The named systems and the spec grammar.
    Catalog {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PoincareMethod {
    Mobius,
    Delres,
}

#[derive(Clone, Copy, ValueEnum)]
enum CodimMethod {
    Lattice,
    Enumerate,
    Formula,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

enum Failure {
    Usage(String),
    Cap(String),
    Verify(String),
    Other(String),
}

impl From<SystemError> for Failure {
    fn from(e: SystemError) -> Self {
        match e {
            SystemError::CapExceeded(_) => Failure::Cap(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<GroupError> for Failure {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::CapExceeded(_) => Failure::Cap(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<LatticeError> for Failure {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::TooManyLines { .. } => Failure::Cap(e.to_string()),
            LatticeError::Group(g) => g.into(),
            LatticeError::NotThreeSystem | LatticeError::NotThreeStar(_) => Failure::Usage(e.to_string()),
            LatticeError::MissingOrders => Failure::Other(e.to_string()),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::System(s) => s.into(),
            VerifyError::Lattice(l) => l.into(),
            VerifyError::Group(g) => g.into(),
            VerifyError::BadRecord(..) => Failure::Usage(e.to_string()),
        }
    }
}

type Out = Result<(), Failure>;

/// `println!` that exits quietly when stdout has been closed.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout().lock(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            panic!("writing to stdout: {e}");
        }
    }};
}

fn emit(v: &Value) {
    out!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn poly_json(p: &IntPoly) -> Value {
    serde_json::to_value(p).expect("serializable")
}

fn factored(p: &IntPoly) -> Result<String, Failure> {
    let f = factor_over_z(p).map_err(|e| Failure::Other(e.to_string()))?;
    let mut s = f.to_string();
    if !f.is_complete() {
        s.push_str(" [irreducibility unverified]");
    }
    Ok(s)
}

fn build(spec: &str) -> Result<(SystemSpec, LineSystem), Failure> {
    let spec = SystemSpec::parse(spec)?;
    let ls = spec.build()?;
    Ok((spec, ls))
}

fn family_group(spec: &SystemSpec) -> Result<(GammaGroup, usize), Failure> {
    match spec {
        SystemSpec::Family { gamma, delta, n } => Ok((gamma_group(*gamma)?.with_delta(*delta)?, *n)),
        _ => Err(Failure::Usage(format!("{} is not a family system", spec.canonical_name()))),
    }
}

fn cmd_lines(spec: &str, json_out: bool) -> Out {
    let (_, ls) = build(spec)?;
    if json_out {
        emit(&serde_json::to_value(ls.to_doc()).expect("serializable"));
        return Ok(());
    }
    out!("{} lines in dimension {}", ls.len(), ls.dim());
    if let Some(frames) = ls.orthogonal_frames() {
        out!("{} frames of {} mutually orthogonal lines", frames.len(), ls.dim());
    }
    for (i, l) in ls.lines().iter().enumerate() {
        out!("{i}: {l}");
    }
    Ok(())
}

fn coxeter_json(ls: &LineSystem, rank: usize) -> Value {
    match lattice::coxeter_numbers(ls, rank) {
        Some((g, h, k)) => json!({"g": g.to_string(), "h": h.to_string(), "k": k.to_string()}),
        None => Value::Null,
    }
}

fn cmd_lattice(spec: &str, want_census: bool, refine: bool, json_out: bool, cache: Option<&LatticeCache>) -> Out {
    let mut work = SystemWork::new(spec, cache)?;
    let fl = work.lattice();
    let sizes: Vec<usize> = fl.layers().iter().map(Vec::len).collect();
    let rank = fl.rank();
    let top = fl.top();
    let top_mu = fl.flat(top).mobius;
    let top_label = fl.label(top).to_string();
    let ls = work.system().clone();
    let census = (want_census || refine).then(|| work.census(refine).clone());
    if json_out {
        let mut v = json!({
            "system": ls.name(),
            "lines": ls.len(),
            "rank": rank,
            "flats_per_rank": sizes,
            "total_flats": sizes.iter().sum::<usize>(),
            "top": {"type": top_label, "mobius": top_mu},
            "coxeter_numbers": coxeter_json(&ls, rank),
        });
        if let Some(c) = census {
            let c: BTreeMap<String, BTreeMap<String, usize>> = c.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            v["census"] = serde_json::to_value(c).expect("serializable");
        }
        emit(&v);
        return Ok(());
    }
    out!("{}: {} lines, rank {}, {} flats", ls.name(), ls.len(), rank, sizes.iter().sum::<usize>());
    for (d, n) in sizes.iter().enumerate() {
        out!("  rank {d}: {n}");
    }
    out!("top flat: {top_label}, μ = {top_mu}");
    if let Some((g, h, k)) = lattice::coxeter_numbers(&ls, rank) {
        out!("g = {g}, h = {h}, k = {k}");
    }
    if let Some(c) = census {
        for (d, row) in c {
            let parts: Vec<String> = row.iter().map(|(l, n)| format!("{n} {l}")).collect();
            out!("  rank {d}: {}", parts.join(", "));
        }
    }
    Ok(())
}

fn cmd_poincare(spec: &str, factor: bool, method: PoincareMethod, json_out: bool, cache: Option<&LatticeCache>) -> Out {
    let mut work = SystemWork::new(spec, cache)?;
    let p = match method {
        PoincareMethod::Mobius => lattice::poincare(work.lattice()),
        PoincareMethod::Delres => lattice::poincare_deletion_restriction(work.system())?,
    };
    let f = if factor { Some(factored(&p)?) } else { None };
    if json_out {
        let mut v = json!({
            "system": work.system().name(),
            "method": match method { PoincareMethod::Mobius => "mobius", PoincareMethod::Delres => "delres" },
            "poincare": poly_json(&p),
            "text": p.to_string(),
        });
        if let Some(f) = f {
            v["factored"] = Value::String(f);
        }
        emit(&v);
    } else {
        out!("{p}");
        if let Some(f) = f {
            out!("{f}");
        }
    }
    Ok(())
}

fn cmd_codim(spec: &str, method: CodimMethod, factor: bool, json_out: bool, cache: Option<&LatticeCache>) -> Out {
    let (name, c) = match method {
        CodimMethod::Lattice => {
            let mut work = SystemWork::new(spec, cache)?;
            let c = lattice::codim_poly_via_lattice(work.lattice_with_elliptic()?)?;
            (work.system().name().to_string(), c)
        }
        CodimMethod::Enumerate => {
            let (_, ls) = build(spec)?;
            let g = groups::reflection_group(&ls, groups::DEFAULT_CAP)?;
            (ls.name().to_string(), g.codim_census())
        }
        CodimMethod::Formula => {
            let parsed = SystemSpec::parse(spec)?;
            let (gg, n) = family_group(&parsed)?;
            let c = groups::family_codim_poly(gg.order() as u64, gg.delta_order() as u64, n as u64);
            (parsed.canonical_name(), c)
        }
    };
    let f = if factor { Some(factored(&c)?) } else { None };
    if json_out {
        let mut v = json!({
            "system": name,
            "method": match method {
                CodimMethod::Lattice => "lattice",
                CodimMethod::Enumerate => "enumerate",
                CodimMethod::Formula => "formula",
            },
            "codim": poly_json(&c),
            "text": c.to_string(),
        });
        if let Some(f) = f {
            v["factored"] = Value::String(f);
        }
        emit(&v);
    } else {
        out!("{c}");
        if let Some(f) = f {
            out!("{f}");
        }
    }
    Ok(())
}

fn cmd_gs(spec: &str, star: &[usize], json_out: bool, cache: Option<&LatticeCache>) -> Out {
    let mut work = SystemWork::new(spec, cache)?;
    let star: [usize; 3] = if star.is_empty() {
        let fl = work.lattice();
        let found = (0..fl.layer(2).len())
            .map(|i| FlatId { rank: 2, idx: i as u32 })
            .find(|&id| fl.lines_of(id).len() == 3 && fl.label(id) == "A2")
            .ok_or_else(|| Failure::Usage("system has no 3-star".into()))?;
        let l = fl.lines_of(found);
        [l[0], l[1], l[2]]
    } else {
        [star[0], star[1], star[2]]
    };
    let ls = work.system();
    if let Some(&bad) = star.iter().find(|&&i| i >= ls.len()) {
        return Err(Failure::Usage(format!("line index {bad} out of range (system has {} lines)", ls.len())));
    }
    let gs = lattice::gs_decomposition(ls, star)?;
    if json_out {
        emit(&json!({
            "system": ls.name(),
            "star": star,
            "sizes": {
                "delta": gs.delta.len(),
                "lambda": gs.lambda.len(),
                "gamma_a": gs.gamma_a.len(),
                "gamma_b": gs.gamma_b.len(),
                "gamma_c": gs.gamma_c.len(),
            },
            "decomposition": gs,
        }));
    } else {
        out!("star {:?} in {}", star, ls.name());
        out!(
            "Δ: {}  Λ: {}  Γa: {}  Γb: {}  Γc: {}",
            gs.delta.len(),
            gs.lambda.len(),
            gs.gamma_a.len(),
            gs.gamma_b.len(),
            gs.gamma_c.len()
        );
    }
    Ok(())
}

fn cmd_family(gamma: &str, delta: &str, n: usize, json_out: bool) -> Out {
    let spec = SystemSpec::parse(&format!("family:{gamma}:{delta}:{n}"))?;
    let (gg, n) = family_group(&spec)?;
    let ls = spec.build()?;
    let m = gg.order() as u64;
    let dsize = gg.delta_order() as u64;
    let mut order: u128 = (m as u128).pow(n as u32) * dsize as u128 / m as u128;
    for k in 2..=n as u128 {
        order *= k;
    }
    let p = if dsize > 1 {
        Some(groups::family_poincare_poly(m, n as u64))
    } else if gg.is_abelian() {
        Some(groups::gmmn_poincare_poly(m, n as u64))
    } else {
        None
    };
    let c = groups::family_codim_poly(m, dsize, n as u64);
    let c_census = groups::family_codim_census(&gg, n);
    if json_out {
        emit(&json!({
            "system": spec.canonical_name(),
            "gamma": gg.name(),
            "gamma_order": m,
            "delta": gg.delta_name(),
            "delta_order": dsize,
            "n": n,
            "lines": ls.len(),
            "order": order.to_string(),
            "poincare": p.as_ref().map(poly_json),
            "codim": poly_json(&c),
            "codim_census": poly_json(&c_census),
        }));
    } else {
        out!("{}: |Γ| = {m}, |Δ| = {dsize}, {} lines, |W| = {order}", spec.canonical_name(), ls.len());
        match &p {
            Some(p) => out!("p = {p} = {}", factored(p)?),
            None => out!("p: no product formula for this Δ"),
        }
        out!("c = {c} = {}", factored(&c)?);
        out!("c (cycle-type count) = {c_census}");
    }
    Ok(())
}

fn cmd_verify(
    suite: SuiteArg,
    json_out: bool,
    registry: Option<PathBuf>,
    dump: bool,
    cache: Option<&LatticeCache>,
) -> Out {
    if dump {
        emit(&serde_json::to_value(builtin_registry()).expect("serializable"));
        return Ok(());
    }
    let reg: Registry = match registry {
        Some(path) => {
            let text =
                std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => builtin_registry(),
    };
    let suite = match suite {
        SuiteArg::Fast => Suite::Fast,
        SuiteArg::Full => Suite::Full,
    };
    let report = run_suite(&reg, suite, cache)?;
    if json_out {
        emit(&serde_json::to_value(&report).expect("serializable"));
    } else {
        for r in &report.results {
            let status = if r.pass { "PASS" } else { "FAIL" };
            if r.pass {
                out!("{status} {} = {} ({})", r.id, r.actual, r.source);
            } else {
                out!("{status} {}: expected {}, got {} ({})", r.id, r.expected, r.actual, r.source);
            }
        }
        out!("{}/{} records passed", report.passed, report.checked);
    }
    if report.all_pass() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.results.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
        Err(Failure::Verify(format!("failed records: {}", failed.join(", "))))
    }
}

fn cmd_catalog(json_out: bool) -> Out {
    let mut rows = Vec::new();
    for name in EXCEPTIONAL {
        let ls = SystemSpec::parse(name)?.build()?;
        rows.push((name, ls.dim(), ls.len(), groups::registry_order(name)));
    }
    if json_out {
        let systems: Vec<Value> =
            rows.iter().map(|(n, d, l, o)| json!({"name": n, "dimension": d, "lines": l, "order": o})).collect();
        emit(&json!({
            "exceptional": systems,
            "grammar": {
                "exceptional": EXCEPTIONAL,
                "family": "family:<C<m>|D<m>|Q8|T|O|I>:<full|pm1|triv|index<k>>:<n>",
                "imprimitive": "G(m,p,n)",
                "classical": ["A<n>", "B<n>", "D<n>", "F4", "H3", "H4"],
                "sum": "<spec>*<spec>",
            },
        }));
    } else {
        out!("{:<4} {:>9} {:>6} {:>10}", "name", "dimension", "lines", "order");
        for (n, d, l, o) in &rows {
            out!("{:<4} {:>9} {:>6} {:>10}", n, d, l, o.map_or("-".to_string(), |o| o.to_string()));
        }
        out!();
        out!("families:   family:<C<m>|D<m>|Q8|T|O|I>:<full|pm1|triv|index<k>>:<n>, or G(m,p,n)");
        out!("classical:  A<n>, B<n>, D<n>, F4, H3, H4");
        out!("sums:       <spec>*<spec>");
    }
    Ok(())
}

fn run(cli: Cli) -> Out {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Failure::Other(e.to_string()))?;
    }
    let cache = if cli.no_cache { None } else { LatticeCache::from_env() };
    let cache = cache.as_ref();
    match cli.cmd {
        Cmd::Lines { system, json } => cmd_lines(&system, json),
        Cmd::Lattice { system, census, refine, json } => cmd_lattice(&system, census, refine, json, cache),
        Cmd::Poincare { system, factor, method, json } => cmd_poincare(&system, factor, method, json, cache),
        Cmd::Codim { system, method, factor, json } => cmd_codim(&system, method, factor, json, cache),
        Cmd::Gs { system, star, json } => cmd_gs(&system, &star, json, cache),
        Cmd::Family { gamma, delta, n, json } => cmd_family(&gamma, &delta, n, json),
        Cmd::Verify { suite, json, registry, dump_registry } => cmd_verify(suite, json, registry, dump_registry, cache),
        Cmd::Catalog { json } => cmd_catalog(json),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Cap(m) => (EXIT_CAP, m),
                Failure::Verify(m) => (EXIT_VERIFY, m),
                Failure::Other(m) => (EXIT_VERIFY, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
