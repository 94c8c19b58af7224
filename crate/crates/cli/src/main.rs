//! `adelic`: command-line front end for adelic cohomology computations.
//!
//! Errors print one line `error[<code>] <stage>: <message>` on stderr and exit
//! with status 1; a failing `check` prints its report and exits with status 2.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use adelic_core::adelic::{adelic_cohomology, dump_json, AdelicSpec, ProductPolicy};
use adelic_core::checks::{run_suite, CheckOptions, CheckReport, Suite};
use adelic_core::coeff::{CoefficientSystem, IdentitySystem, Variance};
use adelic_core::exactla::abelian::{AbelianContext, NumberAtom};
use adelic_core::exactla::graded::MonomialAtom;
use adelic_core::exactla::{AtomicModule, CohomologyTable, Window};
use adelic_core::instances::cech::{koszul_local_cohomology, koszul_spec, monomial_primes_spec};
use adelic_core::instances::hasse::{adelic_split, hasse_spec, verify_split, HasseVariant, PresentedModule};
use adelic_core::instances::torus::{torus_rank1_spec, TorusRank1Instance};
use adelic_core::instances::PAdicElement;
use adelic_core::poset::Poset;
use adelic_core::{Error, IntMatrix, Rational};

#[derive(Parser, Debug)]
#[command(name = "adelic", version, about = "Adelic cochain complexes and their cohomology")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Policy {
    Specializations,
    AllClosedPoints,
}

impl From<Policy> for ProductPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Specializations => ProductPolicy::SpecializationsOnly,
            Policy::AllClosedPoints => ProductPolicy::AllClosedPoints,
        }
    }
}

#[derive(clap::Args, Debug, Clone)]
struct InstanceArgs {
    /// Instance file (TOML, `format = 1`).
    #[arg(long)]
    instance: PathBuf,
    /// Degree window, `lo..hi` for every variable or one range per variable
    /// separated by commas.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// p-adic precision in digits.
    #[arg(long)]
    precision: Option<u32>,
    /// Hasse variant: l-lambda, l-lambda-prime or lambda-l.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, value_enum)]
    policy: Option<Policy>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cohomology table of an instance.
    Cohomology {
        #[command(flatten)]
        args: InstanceArgs,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// Run a seeded property suite.
    Check {
        /// delta-squared, absorbative, subdivision, radical, split, filtration or sum-product.
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        max_vertices: usize,
        /// Random cases per property.
        #[arg(long, default_value_t = 20)]
        cases: usize,
        /// Number-ring instance supplying the primes.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        precision: usize,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// JSON dump of the adelic complex and its cube.
    Dump {
        #[command(flatten)]
        args: InstanceArgs,
    },
    /// Split a target in ⊕_p ℚ_p as a rational plus integral components.
    Split {
        /// Comma-separated primes.
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        /// One literal per prime: a rational `a/b`, or `d0,d1,…@v` for
        /// `p^v (d0 + d1 p + …)`. Negative literals go after `--`.
        #[arg(required = true)]
        components: Vec<String>,
        #[arg(long, default_value_t = 32)]
        precision: usize,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
}

/// A failure with the stage it happened in.
struct Failure {
    code: &'static str,
    stage: &'static str,
    message: String,
}

impl Failure {
    fn new(code: &'static str, stage: &'static str, message: impl Into<String>) -> Self {
        Failure { code, stage, message: message.into() }
    }

    fn core(stage: &'static str, e: Error) -> Self {
        let stage = match &e {
            Error::InsufficientPrecision(_) => "precision",
            Error::NonStabilizing(_) => "stabilization",
            _ => stage,
        };
        Failure { code: e.code(), stage, message: e.to_string() }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

#[derive(Deserialize, Debug)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum Instance {
    NumberRing {
        format: u32,
        primes: Vec<u64>,
        /// Free generators when no relations are given.
        #[serde(default)]
        generators: Option<usize>,
        /// One row per generator, one column per relation.
        #[serde(default)]
        relations: Vec<Vec<i64>>,
        #[serde(default)]
        variant: Option<String>,
        #[serde(default)]
        policy: Option<String>,
        #[serde(default)]
        precision: Option<u32>,
    },
    Polynomial {
        format: u32,
        variables: usize,
        #[serde(default)]
        generators: Vec<Vec<i64>>,
        /// Shifts of the free summands of the module; one copy of the ring
        /// by default.
        #[serde(default)]
        shifts: Vec<Vec<i64>>,
        #[serde(default)]
        mode: Option<String>,
        window: Vec<[i64; 2]>,
    },
    Torus {
        format: u32,
        orders: Vec<u64>,
        window: [i64; 2],
    },
    /// Constant ℤ coefficients with no localization.
    Poset {
        format: u32,
        elements: Vec<String>,
        /// `[p, q]` means q < p.
        covers: Vec<[String; 2]>,
    },
}

impl Instance {
    fn format(&self) -> u32 {
        match self {
            Instance::NumberRing { format, .. }
            | Instance::Polynomial { format, .. }
            | Instance::Torus { format, .. }
            | Instance::Poset { format, .. } => *format,
        }
    }
}

fn load(path: &Path) -> Outcome<Instance> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new("io", "parse", format!("{}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Failure::new("parse", "parse", format!("{}: {}", path.display(), one_line(&e.to_string()))))?;
    match table.get("format").and_then(|v| v.as_integer()) {
        Some(1) => {}
        Some(v) => return Err(Failure::new("schema", "parse", format!("unsupported format version {v}"))),
        None => return Err(Failure::new("schema", "parse", "missing `format = 1` header")),
    }
    let inst: Instance = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Failure::new("schema", "parse", format!("{}: {}", path.display(), one_line(&e.to_string()))))?;
    debug_assert_eq!(inst.format(), 1);
    Ok(inst)
}

fn one_line(s: &str) -> String {
    s.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ")
}

fn parse_range(s: &str) -> Outcome<[i64; 2]> {
    let bad = || Failure::new("window", "parse", format!("window '{s}' is not lo..hi"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    Ok([lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?])
}

/// Ranges from the flag, broadcast to `rank` coordinates.
fn window_override(flag: &Option<String>, rank: usize) -> Outcome<Option<Vec<[i64; 2]>>> {
    let Some(s) = flag else { return Ok(None) };
    let ranges = s.split(',').map(parse_range).collect::<Outcome<Vec<_>>>()?;
    match ranges.len() {
        1 => Ok(Some(vec![ranges[0]; rank])),
        n if n == rank => Ok(Some(ranges)),
        n => Err(Failure::new("window", "parse", format!("{n} ranges for {rank} variables"))),
    }
}

fn make_window(ranges: &[[i64; 2]]) -> Outcome<Window> {
    Window::new(ranges.iter().map(|r| r[0]).collect(), ranges.iter().map(|r| r[1]).collect()).map_err(|e| Failure::core("parse", e))
}

fn parse_variant(s: &str) -> Outcome<HasseVariant> {
    s.parse().map_err(|_| Failure::new("schema", "parse", format!("unknown variant '{s}'")))
}

fn parse_policy(s: &str) -> Outcome<ProductPolicy> {
    Policy::from_str(s, true)
        .map(Into::into)
        .map_err(|_| Failure::new("schema", "parse", format!("unknown policy '{s}'")))
}

struct NumberRing {
    module: PresentedModule,
    variant: HasseVariant,
    policy: ProductPolicy,
    precision: u32,
}

fn number_ring(inst: &Instance, args: &InstanceArgs) -> Outcome<NumberRing> {
    let Instance::NumberRing { primes, generators, relations, variant, policy, precision, .. } = inst else {
        unreachable!("caller matched the kind")
    };
    let g = generators.unwrap_or(relations.len().max(1));
    if !relations.is_empty() && relations.len() != g {
        return Err(Failure::new("schema", "parse", format!("{} relation rows for {g} generators", relations.len())));
    }
    let cols = relations.first().map_or(0, Vec::len);
    if relations.iter().any(|r| r.len() != cols) {
        return Err(Failure::new("schema", "parse", "relation rows differ in length"));
    }
    let m = if cols == 0 {
        IntMatrix::zeros(g, 0)
    } else {
        IntMatrix::from_rows(relations.iter().map(|r| r.iter().map(|&x| x.into()).collect()).collect())
    };
    let module = PresentedModule::new(primes, m).map_err(|e| Failure::core("assembly", e))?;
    let variant = match args.variant.as_deref().or(variant.as_deref()) {
        Some(v) => parse_variant(v)?,
        None => HasseVariant::LocalizedCompletion,
    };
    let policy = match (args.policy, policy) {
        (Some(p), _) => p.into(),
        (None, Some(p)) => parse_policy(p)?,
        (None, None) => ProductPolicy::SpecializationsOnly,
    };
    let precision = args.precision.or(*precision).unwrap_or(32);
    Ok(NumberRing { module, variant, policy, precision })
}

fn polynomial_module(variables: usize, shifts: &[Vec<i64>]) -> Outcome<AtomicModule<MonomialAtom>> {
    if shifts.is_empty() {
        return Ok(AtomicModule::from_atoms(vec![MonomialAtom::polynomial(variables)]));
    }
    if shifts.iter().any(|s| s.len() != variables) {
        return Err(Failure::new("schema", "parse", "shift length differs from the number of variables"));
    }
    Ok(AtomicModule::from_atoms(shifts.iter().map(|s| MonomialAtom::shifted(s)).collect()))
}

fn torus_instance(orders: &[u64], window: [i64; 2], args: &InstanceArgs) -> Outcome<TorusRank1Instance> {
    let w = window_override(&args.window, 1)?.map_or(window, |r| r[0]);
    let inst = TorusRank1Instance { orders: orders.to_vec(), window: (w[0], w[1]) };
    inst.validate().map_err(|e| Failure::core("parse", e))?;
    Ok(inst)
}

fn poset_spec(elements: &[String], covers: &[[String; 2]]) -> Outcome<AdelicSpec<NumberAtom>> {
    let names: Vec<&str> = elements.iter().map(String::as_str).collect();
    let pairs: Vec<(&str, &str)> = covers.iter().map(|[p, q]| (p.as_str(), q.as_str())).collect();
    let poset = Poset::new(&names, &pairs).map_err(|e| Failure::core("parse", e))?;
    let z = AtomicModule::from_atoms(vec![NumberAtom::Integer]);
    let coeffs = CoefficientSystem::constant(poset, Variance::Contravariant, z);
    AdelicSpec::new(AbelianContext::integers(), coeffs, Arc::new(IdentitySystem), ProductPolicy::SpecializationsOnly)
        .map_err(|e| Failure::core("assembly", e))
}

fn compute_table(inst: &Instance, args: &InstanceArgs) -> Outcome<CohomologyTable> {
    match inst {
        Instance::NumberRing { .. } => {
            let n = number_ring(inst, args)?;
            let spec = hasse_spec(&n.module, n.variant, n.policy, n.precision).map_err(|e| Failure::core("assembly", e))?;
            adelic_cohomology(&spec).map_err(|e| Failure::core("cohomology", e))
        }
        Instance::Polynomial { variables, generators, shifts, mode, window, .. } => {
            let w = make_window(&window_override(&args.window, *variables)?.unwrap_or_else(|| window.clone()))?;
            let m = polynomial_module(*variables, shifts)?;
            match mode.as_deref().unwrap_or("local") {
                "local" => koszul_local_cohomology(*variables, generators, &m, w).map_err(|e| Failure::core("assembly", e)),
                "cech" => {
                    let spec = koszul_spec(*variables, generators, &m, w).map_err(|e| Failure::core("assembly", e))?;
                    adelic_cohomology(&spec).map_err(|e| Failure::core("cohomology", e))
                }
                "primes" => {
                    let spec = monomial_primes_spec(*variables, w).map_err(|e| Failure::core("assembly", e))?;
                    adelic_cohomology(&spec).map_err(|e| Failure::core("cohomology", e))
                }
                other => Err(Failure::new("schema", "parse", format!("unknown mode '{other}'"))),
            }
        }
        Instance::Torus { orders, window, .. } => {
            let t = torus_instance(orders, *window, args)?;
            let spec = torus_rank1_spec(&t).map_err(|e| Failure::core("assembly", e))?;
            adelic_cohomology(&spec).map_err(|e| Failure::core("cohomology", e))
        }
        Instance::Poset { elements, covers, .. } => {
            adelic_cohomology(&poset_spec(elements, covers)?).map_err(|e| Failure::core("cohomology", e))
        }
    }
}

fn dump(inst: &Instance, args: &InstanceArgs) -> Outcome<serde_json::Value> {
    let assembly = |e| Failure::core("assembly", e);
    match inst {
        Instance::NumberRing { .. } => {
            let n = number_ring(inst, args)?;
            dump_json(&hasse_spec(&n.module, n.variant, n.policy, n.precision).map_err(assembly)?).map_err(assembly)
        }
        Instance::Polynomial { variables, generators, shifts, mode, window, .. } => {
            let w = make_window(&window_override(&args.window, *variables)?.unwrap_or_else(|| window.clone()))?;
            let spec = match mode.as_deref().unwrap_or("local") {
                "local" | "cech" => koszul_spec(*variables, generators, &polynomial_module(*variables, shifts)?, w),
                "primes" => monomial_primes_spec(*variables, w),
                other => return Err(Failure::new("schema", "parse", format!("unknown mode '{other}'"))),
            }
            .map_err(assembly)?;
            dump_json(&spec).map_err(assembly)
        }
        Instance::Torus { orders, window, .. } => {
            dump_json(&torus_rank1_spec(&torus_instance(orders, *window, args)?).map_err(assembly)?).map_err(assembly)
        }
        Instance::Poset { elements, covers, .. } => dump_json(&poset_spec(elements, covers)?).map_err(assembly),
    }
}

fn render_table(t: &CohomologyTable, format: Format) -> String {
    match format {
        Format::Json => t.to_json(),
        Format::Csv => t.to_csv(),
        Format::Pretty => t.to_string(),
    }
}

fn render_report(r: &CheckReport, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(r).expect("reports serialize"),
        Format::Csv => {
            let mut out = String::from("suite,property,passed,cases\n");
            for p in &r.properties {
                out.push_str(&format!("{},{},{},{}\n", r.suite, p.property, p.passed, p.cases));
            }
            out
        }
        Format::Pretty => {
            let mut out = format!("suite {} (seed {})\n", r.suite, r.seed);
            for p in &r.properties {
                let status = if p.passed { "PASS" } else { "FAIL" };
                out.push_str(&format!("{status} {} ({} cases)", p.property, p.cases));
                if let Some(d) = &p.detail {
                    out.push_str(&format!(": {d}"));
                }
                out.push('\n');
            }
            out
        }
    }
}

/// `a/b` or `d0,d1,…@v`.
fn parse_literal(s: &str, p: u64, precision: usize) -> Outcome<PAdicElement> {
    let bad = |m: String| Failure::new("parse", "parse", format!("component '{s}': {m}"));
    if let Some((digits, v)) = s.split_once('@') {
        let v: i64 = v.trim().parse().map_err(|_| bad("valuation is not an integer".into()))?;
        let digits = digits
            .split(',')
            .map(|d| d.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("digits are not integers".into()))?;
        return PAdicElement::from_digits(p, v, digits).map_err(|e| Failure::core("parse", e));
    }
    let q: Rational = s.trim().parse().map_err(|_| bad("not a rational".into()))?;
    PAdicElement::from_rational(&q, p, precision).map_err(|e| Failure::core("parse", e))
}

fn split(primes: &[u64], components: &[String], precision: usize, format: Format) -> Outcome<String> {
    if primes.len() != components.len() {
        return Err(Failure::new("shape-mismatch", "parse", format!("{} components for {} primes", components.len(), primes.len())));
    }
    let targets = primes.iter().zip(components).map(|(&p, c)| parse_literal(c, p, precision)).collect::<Outcome<Vec<_>>>()?;
    let s = adelic_split(primes, &targets).map_err(|e| Failure::core("split", e))?;
    let verified = verify_split(primes, &targets, &s).map_err(|e| Failure::core("split", e))?;
    let comps: Vec<serde_json::Value> = s
        .components
        .iter()
        .map(|a| json!({"p": a.p, "valuation": a.valuation(), "digits": a.digits, "exact": a.exact.as_ref().map(|q| q.to_string()), "display": a.to_string()}))
        .collect();
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&json!({"q": s.q.to_string(), "components": comps, "verified": verified})).unwrap(),
        Format::Csv => {
            let mut out = String::from("p,component\n");
            out.push_str(&format!("q,{}\n", s.q));
            for a in &s.components {
                out.push_str(&format!("{},{}\n", a.p, a.exact.as_ref().map_or(a.to_string(), |q| q.to_string())));
            }
            out
        }
        Format::Pretty => {
            let mut out = format!("q = {}\n", s.q);
            for a in &s.components {
                out.push_str(&format!("a_{} = {}\n", a.p, a.exact.as_ref().map_or(a.to_string(), |q| q.to_string())));
            }
            out.push_str(&format!("verified: {verified}\n"));
            out
        }
    })
}

fn run(cli: Cli) -> Outcome<(String, bool)> {
    match cli.command {
        Command::Cohomology { args, format } => {
            let inst = load(&args.instance)?;
            Ok((render_table(&compute_table(&inst, &args)?, format), true))
        }
        Command::Dump { args } => {
            let inst = load(&args.instance)?;
            Ok((serde_json::to_string_pretty(&dump(&inst, &args)?).expect("dumps serialize"), true))
        }
        Command::Check { suite, seed, max_vertices, cases, instance, precision, format } => {
            let suite: Suite = suite.parse().map_err(|e| Failure::core("parse", e))?;
            let mut opts = CheckOptions { seed, max_vertices, cases, precision, ..CheckOptions::default() };
            if let Some(path) = instance {
                match load(&path)? {
                    Instance::NumberRing { primes, .. } => opts.primes = primes,
                    _ => return Err(Failure::new("schema", "parse", "check instances must be number rings")),
                }
            }
            let report = run_suite(suite, &opts).map_err(|e| Failure::core("check", e))?;
            let passed = report.passed();
            Ok((render_report(&report, format), passed))
        }
        Command::Split { primes, components, precision, format } => Ok((split(&primes, &components, precision, format)?, true)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((mut out, passed)) => {
            if !out.ends_with('\n') {
                out.push('\n');
            }
            // a closed pipe is not an error
            let _ = io::stdout().write_all(out.as_bytes());
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(f) => {
            eprintln!("error[{}] {}: {}", f.code, f.stage, one_line(&f.message));
            ExitCode::from(1)
        }
    }
}
