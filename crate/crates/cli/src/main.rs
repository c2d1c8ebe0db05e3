use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use algebroid_core::cobar::{ext_dims, CobarComplex, Window};
use algebroid_core::comodule::{check_comodule, check_sheaf_cocycles, comodule_from_sheaf, sheaf_data};
use algebroid_core::fgl::{bp_data, johnson_wilson, quotient_localize};
use algebroid_core::finite::{self, analyze_map, check_descent, corroborate, evaluate_groupoid};
use algebroid_core::hopf::{check_hopf_axioms, HopfAlgebroid};
use algebroid_core::io::{self, Source};
use algebroid_core::morita::{equivalence_verdict, Equivalence, WitnessChoice};
use algebroid_core::{AlgebraError, Verdict};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "algebroid", version, about = "Exact computations with graded Hopf algebroids")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Presentations.
    #[command(subcommand)]
    Ring(RingCmd),
    /// Hopf algebroids.
    #[command(subcommand)]
    Hopf(HopfCmd),
    /// Maps of Hopf algebroids and equivalence certificates.
    #[command(subcommand)]
    Morita(MoritaCmd),
    /// Comodules.
    #[command(subcommand)]
    Comodule(ComoduleCmd),
    /// Cobar Ext table over a window.
    Ext(ExtArgs),
    /// Finite-ring oracles.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Checks the descent equalizer for a cover and a finite module.
    Descent {
        file: PathBuf,
    },
}

#[derive(Subcommand)]
enum RingCmd {
    /// Parses a presentation and reports degreewise basis sizes.
    Check {
        file: PathBuf,
        /// Reports basis sizes for |t| <= degree.
        #[arg(long)]
        degree: Option<i64>,
    },
}

#[derive(Subcommand)]
enum HopfCmd {
    /// Runs the Hopf algebroid axiom suite on a file or every algebroid file in a directory.
    Axioms {
        path: PathBuf,
        #[arg(long)]
        degree: Option<i64>,
    },
    /// Writes the Brown-Peterson algebroid and optional quotients.
    Bp {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        degree: i64,
        #[arg(long)]
        out: PathBuf,
        /// Also writes v_n^-1 BP_*BP/I_n as kN.toml.
        #[arg(long)]
        height: Option<usize>,
        /// Also writes the induced algebroid eM.toml and the map jwM.toml (needs --height).
        #[arg(long = "johnson-wilson")]
        johnson_wilson: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum MoritaCmd {
    /// Emits an equivalence certificate for a map file.
    Check {
        map: PathBuf,
        #[arg(long)]
        degree: i64,
        #[arg(long, conflicts_with = "flat_witness")]
        assume_flat: bool,
        #[arg(long)]
        flat_witness: Option<PathBuf>,
        /// Skips the finite-ring corroboration.
        #[arg(long)]
        no_corroborate: bool,
        #[arg(long, default_value_t = finite::DEFAULT_BUDGET)]
        budget: u64,
    },
}

#[derive(Subcommand)]
enum ComoduleCmd {
    /// Counit and coassociativity, the sheaf roundtrip and, with --rings, the cocycle laws.
    Check {
        file: PathBuf,
        /// Algebroid file; defaults to the one named in the comodule file.
        #[arg(long)]
        algebroid: Option<PathBuf>,
        #[arg(long)]
        degree: Option<i64>,
        /// Checks the cocycle laws at every catalog ring.
        #[arg(long)]
        rings: bool,
        #[arg(long, default_value_t = finite::DEFAULT_BUDGET)]
        budget: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Chart,
}

#[derive(Args)]
struct ExtArgs {
    algebroid: PathBuf,
    #[arg(long)]
    comodule: Option<PathBuf>,
    #[arg(long)]
    smax: usize,
    #[arg(long, allow_hyphen_values = true)]
    tmin: i64,
    #[arg(long, allow_hyphen_values = true)]
    tmax: i64,
    /// Weight of the source filtration; defaults to half the stable weight.
    #[arg(long)]
    weight: Option<i64>,
    /// Weight of the comparison filtration; defaults to the truncation of Γ.
    #[arg(long)]
    stable_weight: Option<i64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Evaluates an algebroid at a finite ring and verifies the groupoid laws.
    Groupoid {
        algebroid: PathBuf,
        /// Catalog name (F_2, F_4, Z/4, ...), Z/n, or a table file.
        #[arg(long)]
        ring: String,
        #[arg(long, default_value_t = finite::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Reports faithfulness, fullness and essential surjectivity of a map at a finite ring.
    Map {
        map: PathBuf,
        #[arg(long)]
        ring: String,
        #[arg(long, default_value_t = finite::DEFAULT_BUDGET)]
        budget: u64,
    },
}

/// A failed property (exit 1) carries its report.
struct Failed(String);

type Run = anyhow::Result<Result<(), Failed>>;

fn emit(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn verdict_to(v: &Verdict) -> Result<(), Failed> {
    match v {
        Verdict::Pass => Ok(()),
        Verdict::Fail { identity, witness } => Err(Failed(format!("{identity}: {witness}"))),
    }
}

fn load_algebroid(path: &Path) -> anyhow::Result<HopfAlgebroid> {
    Ok(io::read_algebroid(path)?)
}

fn ring_check(file: &Path, degree: Option<i64>) -> Run {
    let r = io::read_presentation(file)?;
    let mut dims = Vec::new();
    if let Some(d) = degree {
        for t in -d..=d {
            let n = r.degree_basis(t)?.len();
            if n > 0 {
                dims.push(json!({"t": t, "dim": n}));
            }
        }
    }
    emit(&json!({
        "schema": SCHEMA,
        "name": r.name(),
        "fingerprint": r.fingerprint(),
        "generators": r.generators(),
        "relations": r.rules().iter().filter(|x| x.is_some()).count(),
        "truncation": r.truncation(),
        "dims": dims,
    }));
    Ok(Ok(()))
}

fn is_algebroid_file(path: &Path) -> bool {
    std::fs::read_to_string(path)
        .map(|t| t.lines().any(|l| l.trim() == "[algebroid]"))
        .unwrap_or(false)
}

fn hopf_axioms(path: &Path, degree: Option<i64>) -> Run {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml") && is_algebroid_file(p))
            .collect();
        v.sort();
        if v.is_empty() {
            bail!(AlgebraError::Io(format!("no algebroid files in {}", path.display())));
        }
        v
    } else {
        vec![path.to_path_buf()]
    };
    let mut reports = Vec::new();
    let mut failure = None;
    for f in &files {
        let h = load_algebroid(f)?;
        let d = degree.unwrap_or(h.gamma().truncation());
        let v = check_hopf_axioms(&h, d);
        if let (Err(e), None) = (verdict_to(&v), &failure) {
            failure = Some(Failed(format!("{}: {}", f.display(), e.0)));
        }
        reports.push(json!({"file": f.display().to_string(), "algebroid": h.name(), "degree": d, "verdict": v}));
    }
    emit(&json!({"schema": SCHEMA, "reports": reports}));
    Ok(failure.map_or(Ok(()), Err))
}

fn hopf_bp(prime: u64, degree: i64, out: &Path, height: Option<usize>, jw: &[usize]) -> Run {
    if degree <= 0 {
        bail!(AlgebraError::parse("--degree must be positive"));
    }
    let b = bp_data(prime, degree)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let write = |name: &str, text: String| -> anyhow::Result<String> {
        let p = out.join(name);
        std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        Ok(name.to_string())
    };
    let mut files = vec![write("bp.toml", io::write_algebroid(&b.algebroid)?)?];
    if !jw.is_empty() && height.is_none() {
        bail!(AlgebraError::parse("--johnson-wilson needs --height"));
    }
    if let Some(n) = height {
        let k = quotient_localize(&b, n)?;
        let kname = format!("k{n}.toml");
        files.push(write(&kname, io::write_algebroid(&k)?)?);
        for &m in jw {
            let (e, f) = johnson_wilson(&b, m, n)?;
            let e = e.renamed(format!("v{n}^-1 E({m})_*E({m})/I_{n}"));
            let ename = format!("e{m}.toml");
            files.push(write(&ename, io::write_algebroid(&e)?)?);
            files.push(write(&format!("jw{m}.toml"), io::write_map(&f, &kname, &ename))?);
        }
    }
    emit(&json!({"schema": SCHEMA, "prime": prime, "degree": degree, "files": files}));
    Ok(Ok(()))
}

#[allow(clippy::too_many_arguments)]
fn morita_check(
    map: &Path,
    degree: i64,
    assume_flat: bool,
    witness: Option<&Path>,
    no_corroborate: bool,
    budget: u64,
) -> Run {
    let f = io::read_map(map)?;
    let w = match witness {
        Some(p) => Some(io::parse_witness(&Source::read(p)?, &f)?),
        None => None,
    };
    let choice = match (&w, assume_flat) {
        (Some(w), _) => WitnessChoice::Supplied(w),
        (None, true) => WitnessChoice::Assumed,
        (None, false) => WitnessChoice::Absent,
    };
    let corroboration = if no_corroborate {
        None
    } else {
        Some(corroborate(&f, budget)?)
    };
    let cert = equivalence_verdict(&f, choice, degree, corroboration);
    emit(&json!({"schema": SCHEMA, "map": map.display().to_string(), "certificate": cert}));
    if cert.verdict == Equivalence::No {
        let reason = match &cert.iso {
            Verdict::Fail { identity, witness } => format!("{identity}: {witness}"),
            Verdict::Pass => cert
                .corroboration
                .as_ref()
                .map(|c| match c.verdict() {
                    Verdict::Fail { identity, witness } => format!("{identity}: {witness}"),
                    Verdict::Pass => String::new(),
                })
                .unwrap_or_default(),
        };
        return Ok(Err(Failed(reason)));
    }
    Ok(Ok(()))
}

fn comodule_check(file: &Path, algebroid: Option<&Path>, degree: Option<i64>, rings: bool, budget: u64) -> Run {
    let src = Source::read(file)?;
    let apath = match algebroid {
        Some(p) => p.to_path_buf(),
        None => io::comodule_algebroid_path(&src)?.ok_or_else(|| {
            AlgebraError::parse_at(src.origin.clone(), "no algebroid named; pass --algebroid")
        })?,
    };
    let h = load_algebroid(&apath)?;
    let m = io::parse_comodule(&src, &h)?;
    let d = degree.unwrap_or(h.gamma().truncation());
    let mut v = check_comodule(&m, d);
    if v.passed() {
        let fam = sheaf_data(&m, &[])?;
        let back = comodule_from_sheaf(&h, &m.name, m.generators.clone(), &fam)?;
        if back.psi != m.psi {
            v = Verdict::fail("sheaf roundtrip", "comodule_from_sheaf(sheafify(M)) differs from M");
        }
    }
    let mut ring_reports = Vec::new();
    if rings && v.passed() {
        for r in finite::catalog() {
            let g = evaluate_groupoid(&h, &r, budget)?;
            let c = check_sheaf_cocycles(&m, &g)?;
            ring_reports.push(json!({"ring": r.name(), "morphisms": g.morphisms.len(), "verdict": c}));
            if v.passed() && !c.passed() {
                v = c;
            }
        }
    }
    emit(&json!({
        "schema": SCHEMA,
        "comodule": m.name,
        "algebroid": h.name(),
        "degree": d,
        "verdict": v,
        "rings": ring_reports,
    }));
    Ok(verdict_to(&v))
}

fn ext(a: &ExtArgs) -> Run {
    let h = load_algebroid(&a.algebroid)?;
    let c = match &a.comodule {
        Some(p) => CobarComplex::new(&io::parse_comodule(&Source::read(p)?, &h)?)?,
        None => CobarComplex::unit(&h)?,
    };
    if a.tmin > a.tmax {
        bail!(AlgebraError::parse("--tmin exceeds --tmax"));
    }
    let stable = a.stable_weight.unwrap_or(h.gamma().truncation());
    let weight = a.weight.unwrap_or(stable / 2);
    let win = Window {
        s_max: a.smax,
        t_min: a.tmin,
        t_max: a.tmax,
        weight,
        stable_weight: stable,
    };
    let t = ext_dims(&c, &win)?;
    match a.format {
        Format::Csv => print!("{}", t.to_csv()),
        Format::Json => println!("{}", t.to_json()),
        Format::Chart => print!("{}", t.chart()),
    }
    Ok(Ok(()))
}

fn oracle_groupoid(path: &Path, ring: &str, budget: u64) -> Run {
    let h = load_algebroid(path)?;
    let r = io::load_finite_ring(ring)?;
    let g = evaluate_groupoid(&h, &r, budget)?;
    let objects: Vec<String> = g.objects.iter().map(|x| g.format_point(x)).collect();
    emit(&json!({
        "schema": SCHEMA,
        "algebroid": h.name(),
        "ring": r.name(),
        "catalog_version": finite::CATALOG_VERSION,
        "objects": objects,
        "morphisms": g.morphisms.len(),
        "discrete": g.is_discrete(),
        "laws": "verified",
    }));
    Ok(Ok(()))
}

fn oracle_map(path: &Path, ring: &str, budget: u64) -> Run {
    let f = io::read_map(path)?;
    let r = io::load_finite_ring(ring)?;
    let rep = analyze_map(&f, &r, budget)?;
    emit(&json!({"schema": SCHEMA, "catalog_version": finite::CATALOG_VERSION, "report": rep}));
    Ok(Ok(()))
}

fn descent(file: &Path) -> Run {
    let d = io::parse_descent(&Source::read(file)?)?;
    let v = check_descent(&d.cover, &d.module, d.probe.as_ref())?;
    emit(&json!({
        "schema": SCHEMA,
        "base": d.module.ring.name(),
        "cover": d.cover.iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
        "rank": d.module.rank,
        "verdict": v,
    }));
    Ok(verdict_to(&v))
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<AlgebraError>() {
        Some(a) if a.is_budget() => 3,
        Some(AlgebraError::FiltrationViolation(_)) => 3,
        Some(
            AlgebraError::AxiomFailure(_)
            | AlgebraError::NotACover(_)
            | AlgebraError::NotAnEquivalence(_)
            | AlgebraError::NotQuasiCoherent(_)
            | AlgebraError::IntegralityFailure(_),
        ) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Ring(RingCmd::Check { file, degree }) => ring_check(&file, degree),
        Command::Hopf(HopfCmd::Axioms { path, degree }) => hopf_axioms(&path, degree),
        Command::Hopf(HopfCmd::Bp {
            prime,
            degree,
            out,
            height,
            johnson_wilson,
        }) => hopf_bp(prime, degree, &out, height, &johnson_wilson),
        Command::Morita(MoritaCmd::Check {
            map,
            degree,
            assume_flat,
            flat_witness,
            no_corroborate,
            budget,
        }) => morita_check(&map, degree, assume_flat, flat_witness.as_deref(), no_corroborate, budget),
        Command::Comodule(ComoduleCmd::Check {
            file,
            algebroid,
            degree,
            rings,
            budget,
        }) => comodule_check(&file, algebroid.as_deref(), degree, rings, budget),
        Command::Ext(a) => ext(&a),
        Command::Oracle(OracleCmd::Groupoid { algebroid, ring, budget }) => oracle_groupoid(&algebroid, &ring, budget),
        Command::Oracle(OracleCmd::Map { map, ring, budget }) => oracle_map(&map, &ring, budget),
        Command::Descent { file } => descent(&file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed(why))) => {
            eprintln!("failed: {why}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
