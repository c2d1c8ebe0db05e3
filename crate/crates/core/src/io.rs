//! TOML input and output formats.
//!
//! Presentation files carry `name`, `[base]`, `[generators]`, optional
//! `[weights]`, `[relations]`, `[inverted]` and `[truncation]`. Relations are
//! keyed by the rewritten generator (`x = "..."` eliminates `x`, `"x^3" = ...`
//! is a power rule). Algebroid files are the presentation of Γ plus an
//! `[algebroid]` section naming how many leading generators belong to A, and
//! `[maps.etaR]`, `[maps.epsilon]`, `[maps.c]`, `[maps.delta]` image tables.
//! Diagonal images are written with `l(..)` and `r(..)` for the two tensor
//! factors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_rational::BigRational;
use toml::{Table, Value};

use crate::coeff::BaseRing;
use crate::comodule::Comodule;
use crate::error::{AlgebraError, Result};
use crate::expr::{self, Ast, Env, RingEnv};
use crate::finite::{self, Algebra, FiniteModule, FiniteRing, Idx};
use crate::hopf::{HopfAlgebroid, TensorPowers};
use crate::morita::{default_flat_witness, induced_algebroid, FlatWitness, HopfMap};
use crate::ring::{Element, Monomial, PresentationBuilder, RawTerms, Ring, RingMorphism, Rule};

/// A document together with its origin, for diagnostics.
pub struct Source {
    pub origin: String,
    pub text: String,
}

impl Source {
    pub fn new(origin: impl Into<String>, text: impl Into<String>) -> Source {
        Source {
            origin: origin.into(),
            text: text.into(),
        }
    }

    pub fn read(path: &Path) -> Result<Source> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AlgebraError::Io(format!("{}: {e}", path.display())))?;
        Ok(Source::new(path.display().to_string(), text))
    }

    fn table(&self) -> Result<Table> {
        self.text.parse::<Table>().map_err(|e| {
            let loc = match e.span() {
                Some(span) => format!("{}:{}", self.origin, line_at(&self.text, span.start)),
                None => self.origin.clone(),
            };
            AlgebraError::parse_at(loc, e.message().to_string())
        })
    }

    /// Line of `key` inside `[section]`, falling back to the section header.
    fn locate(&self, section: &str, key: Option<&str>) -> String {
        let mut current = String::new();
        let mut header = None;
        for (i, line) in self.text.lines().enumerate() {
            let t = line.trim();
            if let Some(h) = t.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
                current = h.trim().to_string();
                if current == section && header.is_none() {
                    header = Some(i + 1);
                }
                continue;
            }
            if current != section {
                continue;
            }
            if let Some(k) = key {
                let lhs = t.split('=').next().unwrap_or("").trim().trim_matches('"');
                if t.contains('=') && lhs == k {
                    return format!("{}:{}", self.origin, i + 1);
                }
            }
        }
        match header {
            Some(l) => format!("{}:{}", self.origin, l),
            None => self.origin.clone(),
        }
    }

    fn error(&self, section: &str, key: Option<&str>, e: AlgebraError) -> AlgebraError {
        let loc = self.locate(section, key);
        let message = match e {
            AlgebraError::Parse { location: Some(l), message } => format!("{l}: {message}"),
            AlgebraError::Parse { location: None, message } => message,
            other => other.to_string(),
        };
        AlgebraError::parse_at(loc, message)
    }
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn relative(origin_dir: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        origin_dir.join(p)
    }
}

fn origin_dir(src: &Source) -> PathBuf {
    Path::new(&src.origin)
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default()
}

fn section<'a>(src: &Source, t: &'a Table, name: &str, required: bool) -> Result<Option<&'a Table>> {
    match t.get(name) {
        Some(Value::Table(s)) => Ok(Some(s)),
        Some(_) => Err(src.error(name, None, AlgebraError::parse(format!("[{name}] must be a table")))),
        None if required => Err(AlgebraError::parse_at(
            src.origin.clone(),
            format!("missing section [{name}]"),
        )),
        None => Ok(None),
    }
}

fn string_entries(src: &Source, sec: &str, t: &Table) -> Result<Vec<(String, String)>> {
    t.iter()
        .map(|(k, v)| match v {
            Value::String(s) => Ok((k.clone(), s.clone())),
            Value::Integer(n) => Ok((k.clone(), n.to_string())),
            _ => Err(src.error(sec, Some(k), AlgebraError::parse("expected a string expression"))),
        })
        .collect()
}

fn get_int(src: &Source, sec: &str, t: &Table, key: &str) -> Result<Option<i64>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Integer(n)) => Ok(Some(*n)),
        Some(_) => Err(src.error(sec, Some(key), AlgebraError::parse(format!("{key} must be an integer")))),
    }
}

fn get_str<'a>(src: &Source, sec: &str, t: &'a Table, key: &str) -> Result<Option<&'a str>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(src.error(sec, Some(key), AlgebraError::parse(format!("{key} must be a string")))),
    }
}

fn quote_key(k: &str) -> String {
    if !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        k.to_string()
    } else {
        format!("{:?}", k)
    }
}

fn quote(s: &str) -> String {
    format!("{:?}", s)
}

// ---------------------------------------------------------------- presentations

fn parse_base(src: &Source, t: &Table) -> Result<BaseRing> {
    let b = section(src, t, "base", true)?.unwrap();
    let kind = get_str(src, "base", b, "ring")?.unwrap_or("prime-field");
    let prime = get_int(src, "base", b, "prime")?;
    let need_prime = || {
        prime
            .filter(|&p| p >= 2 && is_prime(p as u64))
            .map(|p| p as u64)
            .ok_or_else(|| src.error("base", Some("prime"), AlgebraError::parse("a prime ≥ 2 is required")))
    };
    match kind {
        "integers" => Ok(BaseRing::Integers),
        "p-local" => Ok(BaseRing::PLocal(need_prime()?)),
        "prime-field" => Ok(BaseRing::PrimeField(need_prime()?)),
        other => Err(src.error(
            "base",
            Some("ring"),
            AlgebraError::parse(format!("unknown base ring {other:?}")),
        )),
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Generators, weights, inversions and truncation, without relations.
fn builder_from(src: &Source, t: &Table, name: &str) -> Result<PresentationBuilder> {
    let base = parse_base(src, t)?;
    let trunc = section(src, t, "truncation", true)?.unwrap();
    let d = get_int(src, "truncation", trunc, "degree")?
        .ok_or_else(|| src.error("truncation", None, AlgebraError::parse("missing degree")))?;
    let mut pb = PresentationBuilder::new(name, base, d);
    let gens = section(src, t, "generators", true)?.unwrap();
    for (k, v) in gens {
        match v {
            Value::Integer(deg) => {
                pb.generator(k.clone(), *deg);
            }
            _ => return Err(src.error("generators", Some(k), AlgebraError::parse("degree must be an integer"))),
        }
    }
    if let Some(inv) = section(src, t, "inverted", false)? {
        let list = match inv.get("generators") {
            Some(Value::Array(a)) => a.clone(),
            None => Vec::new(),
            Some(_) => {
                return Err(src.error("inverted", Some("generators"), AlgebraError::parse("expected a list")))
            }
        };
        for g in list {
            let Value::String(g) = g else {
                return Err(src.error("inverted", Some("generators"), AlgebraError::parse("expected names")));
            };
            pb.invert(&g)
                .map_err(|e| src.error("inverted", Some("generators"), e))?;
        }
    }
    if let Some(w) = section(src, t, "weights", false)? {
        for (k, v) in w {
            let Value::Integer(n) = v else {
                return Err(src.error("weights", Some(k), AlgebraError::parse("weight must be an integer")));
            };
            pb.set_weight(k, *n).map_err(|e| src.error("weights", Some(k), e))?;
        }
    }
    Ok(pb)
}

/// Relations parsed against the free ring on the builder's generators.
fn add_relations(
    src: &Source,
    t: &Table,
    full: &PresentationBuilder,
    pb: &mut PresentationBuilder,
    only: Option<usize>,
) -> Result<()> {
    let Some(rels) = section(src, t, "relations", false)? else {
        return Ok(());
    };
    let free = free_ring(full)?;
    for (key, text) in string_entries(src, "relations", rels)? {
        let (g, e) = match key.split_once('^') {
            Some((g, e)) => {
                let e: u32 = e
                    .trim()
                    .parse()
                    .map_err(|_| src.error("relations", Some(&key), AlgebraError::parse("bad exponent")))?;
                (g.trim().to_string(), e)
            }
            None => (key.trim().to_string(), 1),
        };
        let Some(i) = full.index_of(&g) else {
            return Err(src.error(
                "relations",
                Some(&key),
                AlgebraError::parse(format!("unknown generator {g}")),
            ));
        };
        if only.is_some_and(|n| i >= n) {
            continue;
        }
        let rhs = expr::parse_element(&free, &text).map_err(|e| src.error("relations", Some(&key), e))?;
        pb.relation(&g, e, rhs.raw_terms());
    }
    Ok(())
}

fn free_ring(pb: &PresentationBuilder) -> Result<Ring> {
    let mut f = PresentationBuilder::new("free", pb.base(), i64::MAX / 4);
    for g in pb.generators() {
        f.weighted_generator(g.name.clone(), g.degree, g.weight);
        if g.inverted {
            f.invert(&g.name)?;
        }
    }
    f.build()
}

pub fn parse_presentation(src: &Source) -> Result<Ring> {
    let t = src.table()?;
    presentation_from(src, &t, None)
}

fn presentation_from(src: &Source, t: &Table, prefix: Option<(&str, usize, i64)>) -> Result<Ring> {
    let name = get_str(src, "", t, "name")?.unwrap_or("R").to_string();
    let full = builder_from(src, t, &name)?;
    let mut pb = full.clone();
    if let Some((a_name, n, d)) = prefix {
        pb = PresentationBuilder::new(a_name, full.base(), d);
        for g in &full.generators()[..n] {
            pb.weighted_generator(g.name.clone(), g.degree, g.weight);
            if g.inverted {
                pb.invert(&g.name)?;
            }
        }
        add_relations(src, t, &full, &mut pb, Some(n))?;
    } else {
        add_relations(src, t, &full, &mut pb, None)?;
    }
    pb.build().map_err(|e| AlgebraError::parse_at(src.origin.clone(), e.to_string()))
}

pub fn read_presentation(path: &Path) -> Result<Ring> {
    parse_presentation(&Source::read(path)?)
}

fn raw_to_string(r: &Ring, raw: &RawTerms) -> Result<String> {
    let mut f = PresentationBuilder::new("free", r.base(), i64::MAX / 4);
    for g in r.generators() {
        f.weighted_generator(g.name.clone(), g.degree, g.weight);
        if g.inverted {
            f.invert(&g.name)?;
        }
    }
    let free = f.build()?;
    Ok(Element::from_terms(&free, raw.clone())?.to_string())
}

fn write_presentation_body(r: &Ring, out: &mut String) -> Result<()> {
    let _ = writeln!(out, "name = {}\n", quote(r.name()));
    let _ = writeln!(out, "[base]");
    match r.base() {
        BaseRing::Integers => {
            let _ = writeln!(out, "ring = \"integers\"");
        }
        BaseRing::PLocal(p) => {
            let _ = writeln!(out, "ring = \"p-local\"\nprime = {p}");
        }
        BaseRing::PrimeField(p) => {
            let _ = writeln!(out, "ring = \"prime-field\"\nprime = {p}");
        }
    }
    let _ = writeln!(out, "\n[generators]");
    for g in r.generators() {
        let _ = writeln!(out, "{} = {}", quote_key(&g.name), g.degree);
    }
    let odd: Vec<_> = r
        .generators()
        .iter()
        .filter(|g| g.weight != if g.inverted { 0 } else { g.degree.max(0) })
        .collect();
    if !odd.is_empty() {
        let _ = writeln!(out, "\n[weights]");
        for g in odd {
            let _ = writeln!(out, "{} = {}", quote_key(&g.name), g.weight);
        }
    }
    if r.rules().iter().any(Option::is_some) {
        let _ = writeln!(out, "\n[relations]");
        for (i, rule) in r.rules().iter().enumerate() {
            let name = &r.generators()[i].name;
            match rule {
                Some(Rule::Eliminate(rhs)) => {
                    let _ = writeln!(out, "{} = {}", quote_key(name), quote(&raw_to_string(r, rhs)?));
                }
                Some(Rule::Power { exponent, rhs }) => {
                    let _ = writeln!(
                        out,
                        "{} = {}",
                        quote(&format!("{name}^{exponent}")),
                        quote(&raw_to_string(r, rhs)?)
                    );
                }
                None => {}
            }
        }
    }
    let inv: Vec<String> = r
        .generators()
        .iter()
        .filter(|g| g.inverted)
        .map(|g| quote(&g.name))
        .collect();
    if !inv.is_empty() {
        let _ = writeln!(out, "\n[inverted]\ngenerators = [{}]", inv.join(", "));
    }
    let _ = writeln!(out, "\n[truncation]\ndegree = {}", r.truncation());
    Ok(())
}

pub fn write_presentation(r: &Ring) -> Result<String> {
    let mut out = String::new();
    write_presentation_body(r, &mut out)?;
    Ok(out)
}

// ---------------------------------------------------------------- morphisms

/// Images by name; missing eliminated generators follow from their rule,
/// missing free ones from `default`.
fn images_from(
    src: &Source,
    sec: &str,
    table: Option<&Table>,
    source: &Ring,
    target: &Ring,
    env: &dyn Fn(&str) -> Result<Element>,
    default: &dyn Fn(usize) -> Option<Result<Element>>,
) -> Result<RingMorphism> {
    let given = match table {
        Some(t) => string_entries(src, sec, t)?,
        None => Vec::new(),
    };
    for (k, _) in &given {
        if source.index_of(k).is_none() {
            return Err(src.error(sec, Some(k), AlgebraError::parse(format!("unknown generator {k}"))));
        }
    }
    let mut images: Vec<Element> = Vec::with_capacity(source.ngens());
    for i in 0..source.ngens() {
        let name = &source.generators()[i].name;
        let img = if let Some((_, text)) = given.iter().find(|(k, _)| k == name) {
            env(text).map_err(|e| src.error(sec, Some(name), e))?
        } else if let Some(Rule::Eliminate(rhs)) = &source.rules()[i] {
            eval_raw(rhs, &images, target).map_err(|e| src.error(sec, None, e))?
        } else if let Some(d) = default(i) {
            d.map_err(|e| src.error(sec, None, e))?
        } else {
            return Err(src.error(sec, None, AlgebraError::parse(format!("missing image of {name}"))));
        };
        images.push(img);
    }
    RingMorphism::new(source, target, images).map_err(|e| src.error(sec, None, e))
}

fn eval_raw(raw: &RawTerms, images: &[Element], target: &Ring) -> Result<Element> {
    let mut acc = Element::zero(target);
    for (c, m) in raw {
        let mut t = Element::constant(target, target.base().convert(c)?);
        for (i, &e) in m.0.iter().enumerate() {
            if e != 0 {
                t = t.mul(&expr::pow_signed(&images[i], e as i64)?)?;
            }
        }
        acc = acc.add(&t)?;
    }
    Ok(acc)
}

fn write_images(out: &mut String, sec: &str, m: &RingMorphism, from: usize, fmt: &dyn Fn(&Element) -> String) {
    let _ = writeln!(out, "\n[{sec}]");
    for i in from..m.source().ngens() {
        if m.source().is_eliminated(i) {
            continue;
        }
        let _ = writeln!(
            out,
            "{} = {}",
            quote_key(&m.source().generators()[i].name),
            quote(&fmt(&m.images()[i]))
        );
    }
}

// ---------------------------------------------------------------- algebroids

/// Evaluates `l(..)` and `r(..)` into Γ⊗_AΓ.
struct SquareEnv<'a> {
    gamma: &'a Ring,
    p2: Ring,
    left: RingMorphism,
    right: RingMorphism,
}

impl Env for SquareEnv<'_> {
    type Value = Element;

    fn constant(&self, q: &BigRational) -> Result<Element> {
        Ok(Element::constant(&self.p2, self.p2.base().from_rational(q)?))
    }

    fn ident(&self, name: &str) -> Result<Element> {
        Element::generator(&self.p2, name).map_err(|_| AlgebraError::parse(format!("unknown generator {name}")))
    }

    fn call(&self, name: &str, arg: &Ast) -> Result<Element> {
        let inner = expr::eval(&RingEnv { ring: self.gamma }, arg)?;
        match name {
            "l" => self.left.apply(&inner),
            "r" => self.right.apply(&inner),
            _ => Err(AlgebraError::parse(format!("unknown tensor factor {name}(..)"))),
        }
    }

    fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        a.add(b)
    }

    fn neg(&self, a: &Element) -> Result<Element> {
        Ok(a.neg())
    }

    fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        a.mul(b)
    }

    fn pow(&self, a: &Element, e: i64) -> Result<Element> {
        expr::pow_signed(a, e)
    }
}

pub fn parse_algebroid(src: &Source) -> Result<HopfAlgebroid> {
    let t = src.table()?;
    let alg = section(src, &t, "algebroid", true)?.unwrap();
    let gamma = presentation_from(src, &t, None)?;
    let n = get_int(src, "algebroid", alg, "objects")?
        .ok_or_else(|| src.error("algebroid", None, AlgebraError::parse("missing objects count")))?;
    if n < 0 || n as usize > gamma.ngens() {
        return Err(src.error("algebroid", Some("objects"), AlgebraError::parse("objects out of range")));
    }
    let n = n as usize;
    let a_name = get_str(src, "algebroid", alg, "object_ring")?.unwrap_or("A").to_string();
    let a_trunc = get_int(src, "algebroid", alg, "object_truncation")?.unwrap_or(gamma.truncation());
    let a = presentation_from(src, &t, Some((&a_name, n, a_trunc)))?;
    let name = get_str(src, "algebroid", alg, "name")?.unwrap_or(gamma.name()).to_string();
    let maps = match t.get("maps") {
        Some(Value::Table(m)) => m.clone(),
        None => Table::new(),
        Some(_) => return Err(src.error("maps", None, AlgebraError::parse("[maps] must be a table"))),
    };
    let sub = |k: &str| -> Result<Option<Table>> {
        match maps.get(k) {
            Some(Value::Table(s)) => Ok(Some(s.clone())),
            None => Ok(None),
            Some(_) => Err(src.error(&format!("maps.{k}"), None, AlgebraError::parse("expected a table"))),
        }
    };
    let on_gamma = |s: &str| expr::parse_element(&gamma, s);
    let on_a = |s: &str| expr::parse_element(&a, s);
    let eta_r = images_from(
        src,
        "maps.etaR",
        sub("etaR")?.as_ref(),
        &a,
        &gamma,
        &on_gamma,
        &|i| Some(Ok(Element::generator_at(&gamma, i))),
    )?;
    let powers = Arc::new(TensorPowers::new(&a, &gamma, &eta_r).map_err(|e| src.error("algebroid", None, e))?);
    let epsilon = images_from(
        src,
        "maps.epsilon",
        sub("epsilon")?.as_ref(),
        &gamma,
        &a,
        &on_a,
        &|i| (i < n).then(|| Ok(Element::generator_at(&a, i))),
    )?;
    let conj = images_from(
        src,
        "maps.c",
        sub("c")?.as_ref(),
        &gamma,
        &gamma,
        &on_gamma,
        &|i| (i < n).then(|| Ok(eta_r.images()[i].clone())),
    )?;
    let p2 = powers.power(2).map_err(|e| src.error("algebroid", None, e))?;
    let env = SquareEnv {
        gamma: &gamma,
        p2: p2.clone(),
        left: powers.slot(2, 1).map_err(|e| src.error("algebroid", None, e))?,
        right: powers.slot(2, 2).map_err(|e| src.error("algebroid", None, e))?,
    };
    let on_p2 = |s: &str| expr::eval(&env, &expr::parse(s)?);
    let delta = images_from(
        src,
        "maps.delta",
        sub("delta")?.as_ref(),
        &gamma,
        &p2,
        &on_p2,
        &|i| (i < n).then(|| Element::generator_at(&gamma, i).embed_prefix(&p2)),
    )?;
    HopfAlgebroid::new(
        name,
        powers,
        epsilon.images().to_vec(),
        conj.images().to_vec(),
        delta.images().to_vec(),
    )
    .map_err(|e| src.error("algebroid", None, e))
}

pub fn read_algebroid(path: &Path) -> Result<HopfAlgebroid> {
    parse_algebroid(&Source::read(path)?)
}

/// Writes an element of Γ⊗_AΓ as a sum of `l(..)*r(..)` products.
fn format_square(h: &HopfAlgebroid, e: &Element) -> Result<String> {
    let na = h.a().ngens();
    let nm = h.powers().n_morphism();
    let gamma = h.gamma();
    let mut out = String::new();
    for (m, c) in e.terms() {
        let mut left = Monomial::one(gamma.ngens());
        let mut right = Monomial::one(gamma.ngens());
        for (i, &x) in m.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            if i < na {
                left.0[i] = x;
                continue;
            }
            let k = i - na;
            let (slot, t) = (k / nm + 1, k % nm);
            if slot == 1 {
                left.0[na + t] = x;
            } else {
                right.0[na + t] = x;
            }
        }
        let (neg, abs) = c.sign_and_abs();
        let mut parts = Vec::new();
        if abs != "1" {
            parts.push(if abs.contains('/') { format!("({abs})") } else { abs });
        }
        if !left.is_one() {
            parts.push(format!("l({})", gamma.formatted_monomial(&left)));
        }
        if !right.is_one() {
            parts.push(format!("r({})", gamma.formatted_monomial(&right)));
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        let body = parts.join("*");
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    Ok(out)
}

pub fn write_algebroid(h: &HopfAlgebroid) -> Result<String> {
    let mut out = String::new();
    write_presentation_body(h.gamma(), &mut out)?;
    let na = h.a().ngens();
    let _ = writeln!(
        out,
        "\n[algebroid]\nname = {}\nobject_ring = {}\nobjects = {}",
        quote(h.name()),
        quote(h.a().name()),
        na
    );
    if h.a().truncation() != h.gamma().truncation() {
        let _ = writeln!(out, "object_truncation = {}", h.a().truncation());
    }
    let plain = |e: &Element| e.to_string();
    write_images(&mut out, "maps.etaR", h.eta_r(), 0, &plain);
    write_images(&mut out, "maps.epsilon", h.epsilon(), na, &plain);
    write_images(&mut out, "maps.c", h.conjugation(), na, &plain);
    let mut rows = Vec::new();
    for i in na..h.gamma().ngens() {
        if h.gamma().is_eliminated(i) {
            continue;
        }
        rows.push((h.gamma().generators()[i].name.clone(), format_square(h, &h.delta().images()[i])?));
    }
    let _ = writeln!(out, "\n[maps.delta]");
    for (k, v) in rows {
        let _ = writeln!(out, "{} = {}", quote_key(&k), quote(&v));
    }
    Ok(out)
}

// ---------------------------------------------------------------- comodules

#[derive(Clone)]
enum Word {
    Scalar(Element),
    Row(Vec<Element>),
}

struct WordEnv<'a> {
    gamma: &'a Ring,
    names: Vec<String>,
}

impl WordEnv<'_> {
    fn zero_row(&self) -> Vec<Element> {
        vec![Element::zero(self.gamma); self.names.len()]
    }
}

impl Env for WordEnv<'_> {
    type Value = Word;

    fn constant(&self, q: &BigRational) -> Result<Word> {
        Ok(Word::Scalar(Element::constant(self.gamma, self.gamma.base().from_rational(q)?)))
    }

    fn ident(&self, name: &str) -> Result<Word> {
        Element::generator(self.gamma, name)
            .map(Word::Scalar)
            .map_err(|_| AlgebraError::parse(format!("unknown generator {name}")))
    }

    fn tensor(&self, lhs: &Ast, gen: &str) -> Result<Word> {
        let k = self
            .names
            .iter()
            .position(|n| n == gen)
            .ok_or_else(|| AlgebraError::parse(format!("unknown comodule generator {gen}")))?;
        let c = expr::eval(&RingEnv { ring: self.gamma }, lhs)?;
        let mut row = self.zero_row();
        row[k] = c;
        Ok(Word::Row(row))
    }

    fn add(&self, a: &Word, b: &Word) -> Result<Word> {
        match (a, b) {
            (Word::Row(x), Word::Row(y)) => Ok(Word::Row(
                x.iter().zip(y).map(|(p, q)| p.add(q)).collect::<Result<_>>()?,
            )),
            (Word::Scalar(x), Word::Scalar(y)) => Ok(Word::Scalar(x.add(y)?)),
            _ => Err(AlgebraError::parse("cannot add a scalar to a tensor word")),
        }
    }

    fn neg(&self, a: &Word) -> Result<Word> {
        Ok(match a {
            Word::Scalar(x) => Word::Scalar(x.neg()),
            Word::Row(r) => Word::Row(r.iter().map(Element::neg).collect()),
        })
    }

    fn mul(&self, a: &Word, b: &Word) -> Result<Word> {
        match (a, b) {
            (Word::Scalar(x), Word::Scalar(y)) => Ok(Word::Scalar(x.mul(y)?)),
            (Word::Scalar(s), Word::Row(r)) | (Word::Row(r), Word::Scalar(s)) => {
                Ok(Word::Row(r.iter().map(|e| s.mul(e)).collect::<Result<_>>()?))
            }
            _ => Err(AlgebraError::parse("cannot multiply two tensor words")),
        }
    }

    fn pow(&self, a: &Word, e: i64) -> Result<Word> {
        match a {
            Word::Scalar(x) => Ok(Word::Scalar(expr::pow_signed(x, e)?)),
            Word::Row(_) => Err(AlgebraError::parse("cannot raise a tensor word to a power")),
        }
    }
}

/// Path of the algebroid a comodule file names, if any.
pub fn comodule_algebroid_path(src: &Source) -> Result<Option<PathBuf>> {
    let t = src.table()?;
    Ok(get_str(src, "", &t, "algebroid")?.map(|p| relative(&origin_dir(src), p)))
}

pub fn parse_comodule(src: &Source, h: &HopfAlgebroid) -> Result<Comodule> {
    let t = src.table()?;
    let name = get_str(src, "", &t, "name")?.unwrap_or("M").to_string();
    let gens = section(src, &t, "generators", true)?.unwrap();
    let mut generators = Vec::new();
    for (k, v) in gens {
        let Value::Integer(d) = v else {
            return Err(src.error("generators", Some(k), AlgebraError::parse("degree must be an integer")));
        };
        generators.push((k.clone(), *d));
    }
    let env = WordEnv {
        gamma: h.gamma(),
        names: generators.iter().map(|g| g.0.clone()).collect(),
    };
    let psi_t = section(src, &t, "psi", true)?.unwrap();
    let entries = string_entries(src, "psi", psi_t)?;
    let mut psi = Vec::new();
    for (g, _) in &generators {
        let Some((_, text)) = entries.iter().find(|(k, _)| k == g) else {
            return Err(src.error("psi", None, AlgebraError::parse(format!("missing coaction of {g}"))));
        };
        let row = match expr::eval(&env, &expr::parse(text).map_err(|e| src.error("psi", Some(g), e))?)
            .map_err(|e| src.error("psi", Some(g), e))?
        {
            Word::Row(r) => r,
            Word::Scalar(s) if s.is_zero() => env.zero_row(),
            Word::Scalar(_) => {
                return Err(src.error("psi", Some(g), AlgebraError::parse("coaction must be a sum of g(..)⊗gen words")))
            }
        };
        psi.push(row);
    }
    for (k, _) in &entries {
        if !generators.iter().any(|g| &g.0 == k) {
            return Err(src.error("psi", Some(k), AlgebraError::parse(format!("unknown comodule generator {k}"))));
        }
    }
    Comodule::new(name, h, generators, psi).map_err(|e| src.error("psi", None, e))
}

pub fn write_comodule(m: &Comodule, algebroid_path: Option<&str>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name = {}", quote(&m.name));
    if let Some(p) = algebroid_path {
        let _ = writeln!(out, "algebroid = {}", quote(p));
    }
    let _ = writeln!(out, "\n[generators]");
    for (g, d) in &m.generators {
        let _ = writeln!(out, "{} = {}", quote_key(g), d);
    }
    let _ = writeln!(out, "\n[psi]");
    for (j, (g, _)) in m.generators.iter().enumerate() {
        let words: Vec<String> = m.psi[j]
            .iter()
            .zip(&m.generators)
            .filter(|(e, _)| !e.is_zero())
            .map(|(e, (k, _))| {
                if e.len() == 1 {
                    format!("{e}⊗{k}")
                } else {
                    format!("({e})⊗{k}")
                }
            })
            .collect();
        let text = if words.is_empty() { "0".to_string() } else { words.join(" + ") };
        let _ = writeln!(out, "{} = {}", quote_key(g), quote(&text));
    }
    out
}

// ---------------------------------------------------------------- maps

/// Map files name a source algebroid and either an explicit `target`
/// algebroid with `[f0]` and `[f1]`, or a `base` presentation B, in which
/// case the target is the induced algebroid along `[f0]`.
pub fn parse_map(src: &Source) -> Result<HopfMap> {
    let t = src.table()?;
    let dir = origin_dir(src);
    let source_path = get_str(src, "", &t, "source")?
        .ok_or_else(|| AlgebraError::parse_at(src.origin.clone(), "missing source"))?;
    let source = read_algebroid(&relative(&dir, source_path))?;
    let f0_table = section(src, &t, "f0", false)?;
    if let Some(target_path) = get_str(src, "", &t, "target")? {
        let target = read_algebroid(&relative(&dir, target_path))?;
        let (b, sigma) = (target.a().clone(), target.gamma().clone());
        let f0 = images_from(
            src,
            "f0",
            f0_table,
            source.a(),
            &b,
            &|s| expr::parse_element(&b, s),
            &|i| Some(Element::generator(&b, &source.a().generators()[i].name)),
        )?;
        let f1 = images_from(
            src,
            "f1",
            section(src, &t, "f1", false)?,
            source.gamma(),
            &sigma,
            &|s| expr::parse_element(&sigma, s),
            &|i| Some(Element::generator(&sigma, &source.gamma().generators()[i].name)),
        )?;
        return HopfMap::new(&source, &target, f0, f1).map_err(|e| src.error("f1", None, e));
    }
    let base_path = get_str(src, "", &t, "base")?
        .ok_or_else(|| AlgebraError::parse_at(src.origin.clone(), "map file needs target or base"))?;
    let b = read_presentation(&relative(&dir, base_path))?;
    let f0 = images_from(
        src,
        "f0",
        f0_table,
        source.a(),
        &b,
        &|s| expr::parse_element(&b, s),
        &|i| Some(Element::generator(&b, &source.a().generators()[i].name)),
    )?;
    let ind = induced_algebroid(&source, &f0).map_err(|e| src.error("f0", None, e))?;
    Ok(ind.map)
}

pub fn read_map(path: &Path) -> Result<HopfMap> {
    parse_map(&Source::read(path)?)
}

pub fn write_map(f: &HopfMap, source_path: &str, target_path: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "source = {}\ntarget = {}", quote(source_path), quote(target_path));
    let plain = |e: &Element| e.to_string();
    write_images(&mut out, "f0", &f.f0, 0, &plain);
    write_images(&mut out, "f1", &f.f1, 0, &plain);
    out
}

// ---------------------------------------------------------------- flat witnesses

/// An empty witness file, or one without `[c]`, means C = B⊗_AΓ with g the
/// identity. `basis` lists monomials of C; if absent the standard basis is
/// used.
pub fn parse_witness(src: &Source, f: &HopfMap) -> Result<FlatWitness> {
    let t = src.table()?;
    let std = default_flat_witness(f).map_err(|e| AlgebraError::parse_at(src.origin.clone(), e.to_string()))?;
    let pair = std.g.source().clone();
    let g = match section(src, &t, "c", false)? {
        Some(c) => {
            let c_src = Source::new(src.origin.clone(), toml::to_string(c).unwrap_or_default());
            let ring = presentation_from(&c_src, c, None)?;
            images_from(
                src,
                "g",
                section(src, &t, "g", false)?,
                &pair,
                &ring,
                &|s| expr::parse_element(&ring, s),
                &|i| Some(Element::generator(&ring, &pair.generators()[i].name)),
            )?
        }
        None => std.g.clone(),
    };
    let basis = match t.get("basis") {
        None => {
            if section(src, &t, "c", false)?.is_some() {
                return Err(AlgebraError::parse_at(src.origin.clone(), "a custom C needs a basis"));
            }
            std.basis
        }
        Some(Value::Array(items)) => {
            let c = g.target().clone();
            let mut out = Vec::new();
            for v in items {
                let Value::String(s) = v else {
                    return Err(AlgebraError::parse_at(src.origin.clone(), "basis entries must be strings"));
                };
                let e = expr::parse_element(&c, s)
                    .map_err(|e| AlgebraError::parse_at(src.origin.clone(), e.to_string()))?;
                let lead = e.terms().next().map(|(m, _)| m.clone());
                match lead {
                    Some(m) if e.len() == 1 => out.push(m),
                    _ => {
                        return Err(AlgebraError::parse_at(
                            src.origin.clone(),
                            format!("basis entry {s} is not a monomial"),
                        ))
                    }
                }
            }
            out
        }
        Some(_) => return Err(AlgebraError::parse_at(src.origin.clone(), "basis must be a list")),
    };
    Ok(FlatWitness { g, basis })
}

// ---------------------------------------------------------------- finite rings

fn ring_by_name(name: &str) -> Option<Arc<FiniteRing>> {
    if let Some((a, b)) = name.split_once('×') {
        let (a, b) = (ring_by_name(a.trim())?, ring_by_name(b.trim())?);
        return Some(Arc::new(FiniteRing::product(&a, &b)));
    }
    finite::catalog_ring(name).or_else(|| {
        name.strip_prefix("Z/")
            .and_then(|n| n.parse::<u64>().ok())
            .filter(|&n| (2..=256).contains(&n))
            .map(|n| Arc::new(FiniteRing::zmod(n)))
    })
}

/// A catalog name such as `F_4`, `Z/n`, a product `R×S` of those, or a
/// table file with `name`,
/// `elements`, `add`, `mul`, `zero` and `one` (tables by element label).
pub fn load_finite_ring(name: &str) -> Result<Arc<FiniteRing>> {
    if let Some(r) = ring_by_name(name) {
        return Ok(r);
    }
    let src = Source::read(Path::new(name))?;
    parse_finite_ring(&src).map(Arc::new)
}

pub fn parse_finite_ring(src: &Source) -> Result<FiniteRing> {
    let t = src.table()?;
    let err = |m: &str| AlgebraError::parse_at(src.origin.clone(), m.to_string());
    let name = get_str(src, "", &t, "name")?.unwrap_or("R").to_string();
    let labels: Vec<String> = match t.get("elements") {
        Some(Value::Array(a)) => a
            .iter()
            .map(|v| v.as_str().map(String::from).ok_or_else(|| err("elements must be strings")))
            .collect::<Result<_>>()?,
        _ => return Err(err("missing elements list")),
    };
    let idx = |s: &str| -> Result<Idx> {
        labels
            .iter()
            .position(|l| l == s)
            .map(|i| i as Idx)
            .ok_or_else(|| err(&format!("unknown element {s}")))
    };
    let table = |key: &str| -> Result<Vec<Idx>> {
        let Some(Value::Array(rows)) = t.get(key) else {
            return Err(err(&format!("missing {key} table")));
        };
        if rows.len() != labels.len() {
            return Err(AlgebraError::parse_at(src.locate("", Some(key)), format!("{key} needs {} rows", labels.len())));
        }
        let mut out = Vec::new();
        for row in rows {
            let Value::Array(cells) = row else {
                return Err(err(&format!("{key} rows must be lists")));
            };
            if cells.len() != labels.len() {
                return Err(AlgebraError::parse_at(src.locate("", Some(key)), format!("{key} rows need {} entries", labels.len())));
            }
            for c in cells {
                out.push(idx(c.as_str().ok_or_else(|| err("table entries must be labels"))?)?);
            }
        }
        Ok(out)
    };
    let zero = idx(get_str(src, "", &t, "zero")?.unwrap_or("0"))?;
    let one = idx(get_str(src, "", &t, "one")?.unwrap_or("1"))?;
    FiniteRing::from_tables(name, labels.clone(), table("add")?, table("mul")?, zero, one)
        .map_err(|e| AlgebraError::parse_at(src.origin.clone(), e.to_string()))
}

/// A descent problem: base ring, cover algebras, module and optional probe.
pub struct DescentProblem {
    pub cover: Vec<Algebra>,
    pub module: FiniteModule,
    pub probe: Option<Algebra>,
}

fn parse_algebra(src: &Source, sec: &str, t: &Table, base: &Arc<FiniteRing>) -> Result<Algebra> {
    let err = |m: String| src.error(sec, None, AlgebraError::parse(m));
    let name = get_str(src, sec, t, "name")?.unwrap_or(sec).to_string();
    let label = |v: &Value| -> Result<Idx> {
        let s = match v {
            Value::String(s) => s.clone(),
            Value::Integer(n) => n.to_string(),
            _ => return Err(err("ring elements are labels".into())),
        };
        base.element(&s).ok_or_else(|| err(format!("{s} is not an element of {}", base.name())))
    };
    let ideal = match t.get("ideal") {
        Some(Value::Array(a)) => a.iter().map(label).collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
        Some(_) => return Err(err("ideal must be a list".into())),
    };
    let roots = match t.get("roots") {
        Some(Value::Array(a)) => a
            .iter()
            .map(|f| match f {
                Value::Array(cs) => cs.iter().map(label).collect::<Result<Vec<_>>>(),
                _ => Err(err("each root is a list of lower coefficients".into())),
            })
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
        Some(_) => return Err(err("roots must be a list".into())),
    };
    Algebra::new(name, base, &ideal, roots).map_err(|e| src.error(sec, None, e))
}

/// `base` names a finite ring or a table file; each `[[cover]]` and the optional `[probe]`
/// is `(R/ideal)[x_1..x_k]/(f_i)` with `roots` listing the lower
/// coefficients c_0..c_{d-1} of each monic f_i; `[module]` has `rank` and
/// `relations`.
pub fn parse_descent(src: &Source) -> Result<DescentProblem> {
    let t = src.table()?;
    let base_name = get_str(src, "", &t, "base")?
        .ok_or_else(|| AlgebraError::parse_at(src.origin.clone(), "missing base ring"))?;
    let base = match ring_by_name(base_name) {
        Some(r) => r,
        None => {
            let path = relative(&origin_dir(src), base_name);
            if !path.exists() {
                return Err(AlgebraError::parse_at(
                    src.locate("", Some("base")),
                    format!("unknown ring {base_name}"),
                ));
            }
            Arc::new(parse_finite_ring(&Source::read(&path)?)?)
        }
    };
    let cover = match t.get("cover") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| match v {
                Value::Table(c) => parse_algebra(src, "cover", c, &base),
                _ => Err(AlgebraError::parse_at(src.origin.clone(), "[[cover]] entries are tables")),
            })
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(AlgebraError::parse_at(src.origin.clone(), "missing [[cover]] entries")),
    };
    let probe = match section(src, &t, "probe", false)? {
        Some(p) => Some(parse_algebra(src, "probe", p, &base)?),
        None => None,
    };
    let m = section(src, &t, "module", true)?.unwrap();
    let rank = get_int(src, "module", m, "rank")?
        .filter(|&r| r >= 0)
        .ok_or_else(|| src.error("module", Some("rank"), AlgebraError::parse("rank must be a nonnegative integer")))?
        as usize;
    let mut relations = Vec::new();
    if let Some(v) = m.get("relations") {
        let Value::Array(rows) = v else {
            return Err(src.error("module", Some("relations"), AlgebraError::parse("relations must be a list")));
        };
        for row in rows {
            let Value::Array(cells) = row else {
                return Err(src.error("module", Some("relations"), AlgebraError::parse("each relation is a list")));
            };
            if cells.len() != rank {
                return Err(src.error(
                    "module",
                    Some("relations"),
                    AlgebraError::parse(format!("relations need {rank} entries")),
                ));
            }
            let mut out = Vec::new();
            for c in cells {
                let s = match c {
                    Value::String(s) => s.clone(),
                    Value::Integer(n) => n.to_string(),
                    _ => return Err(src.error("module", Some("relations"), AlgebraError::parse("entries are labels"))),
                };
                out.push(base.element(&s).ok_or_else(|| {
                    src.error("module", Some("relations"), AlgebraError::parse(format!("{s} is not in {}", base.name())))
                })?);
            }
            relations.push(out);
        }
    }
    Ok(DescentProblem {
        cover,
        module: FiniteModule {
            ring: base,
            rank,
            relations,
        },
        probe,
    })
}
