//! Normalized cobar complex and Ext dimension tables.
//!
//! A word of cohomological degree s is a monomial of P_s = Γ^{⊗s} (A-part
//! followed by s slots, each nonconstant) together with a comodule generator.
//! Weights give an increasing filtration by subcomplexes F_W; the reported
//! dimension is that of the image of H^{s,t}(F_W) in H^{s,t}(F_{W'}) for the
//! two weights of the [`Window`].

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::coeff::{BaseRing, Coeff};
use crate::comodule::Comodule;
use crate::error::{AlgebraError, Result};
use crate::hopf::HopfAlgebroid;
use crate::linalg::{FpEchelon, FpVec};
use crate::ring::{Element, Monomial, Ring, RingMorphism, Verdict};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    pub generator: usize,
    pub monomial: Monomial,
}

/// Bidegree window and the two filtration weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub s_max: usize,
    pub t_min: i64,
    pub t_max: i64,
    pub weight: i64,
    pub stable_weight: i64,
}

#[derive(Clone, Debug)]
pub struct CobarComplex {
    algebroid: HopfAlgebroid,
    comodule: Comodule,
    prime: u64,
    weights: Vec<i64>,
}

impl CobarComplex {
    pub fn new(comodule: &Comodule) -> Result<CobarComplex> {
        let h = &comodule.algebroid;
        let prime = match h.gamma().base() {
            BaseRing::PrimeField(p) => p,
            b => {
                return Err(AlgebraError::BaseMismatch(format!(
                    "Ext dimensions need a prime field base, found {b}"
                )))
            }
        };
        for i in h.morphism_generators() {
            let e = h.epsilon().images()[i].clone();
            if !e.is_zero() {
                return Err(AlgebraError::InvalidPresentation(format!(
                    "normalized cobar needs ε = 0 on morphism generators; ε({}) = {e}",
                    h.gamma().generators()[i].name
                )));
            }
        }
        let low = comodule.generators.iter().map(|g| g.1).min().unwrap_or(0);
        let weights = comodule.generators.iter().map(|g| g.1 - low).collect();
        Ok(CobarComplex {
            algebroid: h.clone(),
            comodule: comodule.clone(),
            prime,
            weights,
        })
    }

    pub fn unit(h: &HopfAlgebroid) -> Result<CobarComplex> {
        CobarComplex::new(&Comodule::unit(h))
    }

    pub fn algebroid(&self) -> &HopfAlgebroid {
        &self.algebroid
    }

    pub fn comodule(&self) -> &Comodule {
        &self.comodule
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    fn power(&self, s: usize) -> Result<Ring> {
        self.algebroid.powers().power(s)
    }

    fn is_normalized(&self, s: usize, m: &Monomial) -> bool {
        let na = self.algebroid.a().ngens();
        let nm = self.algebroid.powers().n_morphism();
        (0..s).all(|slot| {
            let lo = na + slot * nm;
            m.0[lo..lo + nm].iter().any(|&e| e != 0)
        })
    }

    pub fn word_weight(&self, s: usize, w: &Word) -> Result<i64> {
        Ok(self.power(s)?.weight_of(&w.monomial) + self.weights[w.generator])
    }

    /// Renders a word as `a[γ_1|…|γ_s]m`.
    pub fn format_word(&self, s: usize, w: &Word) -> String {
        let gamma = self.algebroid.gamma();
        let na = self.algebroid.a().ngens();
        let nm = self.algebroid.powers().n_morphism();
        let a = Monomial(w.monomial.0[..na].to_vec());
        let mut out = self.algebroid.a().formatted_monomial(&a);
        out.push('[');
        for slot in 0..s {
            if slot > 0 {
                out.push('|');
            }
            let lo = na + slot * nm;
            let mut m = vec![0; gamma.ngens()];
            m[na..].copy_from_slice(&w.monomial.0[lo..lo + nm]);
            out.push_str(&gamma.formatted_monomial(&Monomial(m)));
        }
        out.push(']');
        out.push_str(&self.comodule.generators[w.generator].0);
        out
    }
}

/// Deterministic basis of normalized words in bidegree (s, t) of weight at
/// most `max_weight`, sorted by generator and then monomial.
pub fn cobar_basis(c: &CobarComplex, s: usize, t: i64, max_weight: i64) -> Result<Vec<Word>> {
    let ring = c.power(s)?;
    let mut out = Vec::new();
    for (j, (_, deg)) in c.comodule.generators.iter().enumerate() {
        let room = max_weight - c.weights[j];
        if room < 0 {
            continue;
        }
        for m in ring.degree_basis_within(t - deg, room)? {
            if c.is_normalized(s, &m) {
                out.push(Word {
                    generator: j,
                    monomial: m,
                });
            }
        }
    }
    Ok(out)
}

/// Ring map applied monomial by monomial with a persistent power cache.
struct CachedMap<'a> {
    map: &'a RingMorphism,
    cache: HashMap<(usize, i32), Element>,
}

impl<'a> CachedMap<'a> {
    fn new(map: &'a RingMorphism) -> Self {
        CachedMap {
            map,
            cache: HashMap::new(),
        }
    }

    fn apply(&mut self, m: &Monomial) -> Result<Element> {
        let target = self.map.target();
        let mut prod = Element::one(target);
        for (i, &e) in m.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !self.cache.contains_key(&(i, e)) {
                let src = self.map.source();
                let one = src.base().one();
                let x = Element::from_terms(src, vec![(one, Monomial::generator(src.ngens(), i, e))])?;
                self.cache.insert((i, e), self.map.apply(&x)?);
            }
            prod = prod.mul(&self.cache[&(i, e)])?;
            if prod.is_zero() {
                break;
            }
        }
        Ok(prod)
    }
}

/// Structure maps for all cohomological degrees up to `s_max`.
struct Cofaces {
    /// `faces[s][i]` = d^i : P_s → P_{s+1} for 0 ≤ i ≤ s + 1.
    faces: Vec<Vec<RingMorphism>>,
    /// `psi[s][j][k]` = γ_jk placed in slot s + 1 of P_{s+1}.
    psi: Vec<Vec<Vec<Element>>>,
}

impl Cofaces {
    fn new(c: &CobarComplex, s_max: usize) -> Result<Cofaces> {
        let h = &c.algebroid;
        let mut faces = Vec::new();
        let mut psi = Vec::new();
        for s in 0..=s_max {
            faces.push((0..=s + 1).map(|i| h.coface(s, i)).collect::<Result<Vec<_>>>()?);
            let slot = h.powers().slot(s + 1, s + 1)?;
            psi.push(
                c.comodule
                    .psi
                    .iter()
                    .map(|row| row.iter().map(|g| slot.apply(g)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Cofaces { faces, psi })
    }
}

/// Per-job evaluator of d_s.
struct Differential<'a> {
    c: &'a CobarComplex,
    s: usize,
    maps: Vec<CachedMap<'a>>,
    psi: &'a [Vec<Element>],
    target: Ring,
}

impl<'a> Differential<'a> {
    fn new(c: &'a CobarComplex, cof: &'a Cofaces, s: usize) -> Result<Self> {
        Ok(Differential {
            c,
            s,
            maps: cof.faces[s].iter().map(CachedMap::new).collect(),
            psi: &cof.psi[s],
            target: c.power(s + 1)?,
        })
    }

    /// d(w) as a map from target words to residues mod p.
    fn apply(&mut self, w: &Word) -> Result<BTreeMap<Word, u64>> {
        let s = self.s;
        let p = self.c.prime;
        let n = self.c.comodule.rank();
        let mut parts: Vec<Element> = vec![Element::zero(&self.target); n];
        for i in 0..=s {
            let mut img = self.maps[i].apply(&w.monomial)?;
            if i % 2 == 1 {
                img = img.neg();
            }
            parts[w.generator].add_assign(&img)?;
        }
        let last = self.maps[s + 1].apply(&w.monomial)?;
        for k in 0..n {
            let g = &self.psi[w.generator][k];
            if g.is_zero() {
                continue;
            }
            let mut img = last.mul(g)?;
            if s % 2 == 0 {
                img = img.neg();
            }
            parts[k].add_assign(&img)?;
        }
        let source_weight = self.c.word_weight(s, w)?;
        let mut out = BTreeMap::new();
        for (k, e) in parts.into_iter().enumerate() {
            if e.truncated() {
                return Err(AlgebraError::FiltrationViolation(format!(
                    "d of {} lost terms to truncation",
                    self.c.format_word(s, w)
                )));
            }
            for (m, coeff) in e.terms() {
                let tw = Word {
                    generator: k,
                    monomial: m.clone(),
                };
                if !self.c.is_normalized(s + 1, m) {
                    return Err(AlgebraError::FiltrationViolation(format!(
                        "d of {} has a degenerate term {}",
                        self.c.format_word(s, w),
                        self.c.format_word(s + 1, &tw)
                    )));
                }
                if self.target.weight_of(m) + self.c.weights[k] > source_weight {
                    return Err(AlgebraError::FiltrationViolation(format!(
                        "d of {} raises weight through {}",
                        self.c.format_word(s, w),
                        self.c.format_word(s + 1, &tw)
                    )));
                }
                out.insert(tw, residue(coeff, p));
            }
        }
        Ok(out)
    }
}

fn residue(c: &Coeff, p: u64) -> u64 {
    match c {
        Coeff::Fp(v, _) => *v,
        Coeff::Q(_) => unreachable!("prime field base checked at construction"),
    }
    .rem_euclid(p)
}

fn to_row(image: &BTreeMap<Word, u64>, column: &mut impl FnMut(&Word) -> Result<u32>) -> Result<FpVec> {
    let mut row = Vec::with_capacity(image.len());
    for (w, &v) in image {
        row.push((column(w)?, v as u32));
    }
    row.sort_unstable();
    Ok(row)
}

/// Matrix of d_s: rows indexed by `source`, columns by `target`.
#[derive(Clone, Debug)]
pub struct DifferentialMatrix {
    pub source: Vec<Word>,
    pub target: Vec<Word>,
    pub rows: Vec<FpVec>,
}

impl DifferentialMatrix {
    pub fn rank(&self, p: u64) -> usize {
        crate::linalg::fp_rank(p, self.rows.iter().cloned())
    }
}

pub fn differential(c: &CobarComplex, s: usize, t: i64, max_weight: i64) -> Result<DifferentialMatrix> {
    let cof = Cofaces::new(c, s)?;
    let mut d = Differential::new(c, &cof, s)?;
    let source = cobar_basis(c, s, t, max_weight)?;
    let target = cobar_basis(c, s + 1, t, max_weight)?;
    let index: HashMap<&Word, u32> = target.iter().enumerate().map(|(i, w)| (w, i as u32)).collect();
    let mut rows = Vec::with_capacity(source.len());
    for w in &source {
        let img = d.apply(w)?;
        rows.push(to_row(&img, &mut |x| {
            index.get(x).copied().ok_or_else(|| {
                AlgebraError::FiltrationViolation(format!("image word outside the basis in degree {t}"))
            })
        })?);
    }
    Ok(DifferentialMatrix { source, target, rows })
}

/// d_{s+1} ∘ d_s = 0 on every word of bidegree (s, t) with weight ≤ `max_weight`.
pub fn check_d_squared(c: &CobarComplex, s: usize, t: i64, max_weight: i64) -> Verdict {
    let run = || -> Result<Verdict> {
        let p = c.prime;
        let cof = Cofaces::new(c, s + 1)?;
        let mut d0 = Differential::new(c, &cof, s)?;
        let mut d1 = Differential::new(c, &cof, s + 1)?;
        for w in cobar_basis(c, s, t, max_weight)? {
            let mut acc: BTreeMap<Word, u64> = BTreeMap::new();
            for (x, a) in d0.apply(&w)? {
                for (y, b) in d1.apply(&x)? {
                    let e = acc.entry(y).or_insert(0);
                    *e = (*e + a * b) % p;
                }
            }
            if let Some((y, v)) = acc.iter().find(|(_, v)| **v != 0) {
                return Ok(Verdict::fail(
                    format!("d∘d = 0 in bidegree ({s}, {t})"),
                    format!(
                        "dd({}) has coefficient {v} on {}",
                        c.format_word(s, &w),
                        c.format_word(s + 2, y)
                    ),
                ));
            }
        }
        Ok(Verdict::Pass)
    };
    run().unwrap_or_else(|e| Verdict::fail(format!("d∘d = 0 in bidegree ({s}, {t})"), e.to_string()))
}

fn ext_dim(c: &CobarComplex, cof: &Cofaces, s: usize, t: i64, win: &Window) -> Result<usize> {
    let p = c.prime;
    let (w, w2) = (win.weight, win.stable_weight);
    let words = cobar_basis(c, s, t, w2)?;
    let weights = words
        .iter()
        .map(|x| c.word_weight(s, x))
        .collect::<Result<Vec<_>>>()?;

    // rank of d_s on F_W
    let mut d = Differential::new(c, cof, s)?;
    let mut cols: HashMap<Word, u32> = HashMap::new();
    let mut ech = FpEchelon::new(p);
    let mut small = 0usize;
    for (x, &wt) in words.iter().zip(&weights) {
        if wt > w {
            continue;
        }
        small += 1;
        let img = d.apply(x)?;
        let row = to_row(&img, &mut |y| {
            let next = cols.len() as u32;
            Ok(*cols.entry(y.clone()).or_insert(next))
        })?;
        ech.insert(row);
    }
    let cycles = small - ech.rank();
    if s == 0 || cycles == 0 {
        return Ok(cycles);
    }

    // boundaries from F_{W'} meeting F_W: heavy columns first
    let mut order: Vec<usize> = (0..words.len()).collect();
    order.sort_by(|&i, &j| (weights[i] <= w).cmp(&(weights[j] <= w)).then_with(|| words[i].cmp(&words[j])));
    let mut index: HashMap<&Word, u32> = HashMap::with_capacity(words.len());
    let mut c0 = words.len() as u32;
    for (pos, &i) in order.iter().enumerate() {
        index.insert(&words[i], pos as u32);
        if weights[i] <= w && c0 == words.len() as u32 {
            c0 = pos as u32;
        }
    }
    let mut prev = Differential::new(c, cof, s - 1)?;
    let mut bound = FpEchelon::new(p);
    for x in cobar_basis(c, s - 1, t, w2)? {
        let img = prev.apply(&x)?;
        let row = to_row(&img, &mut |y| {
            index.get(y).copied().ok_or_else(|| {
                AlgebraError::FiltrationViolation(format!(
                    "boundary term outside the weight-{w2} basis in bidegree ({s}, {t})"
                ))
            })
        })?;
        bound.insert(row);
    }
    Ok(cycles - bound.rows_leading_at_least(c0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ExtEntry {
    pub s: usize,
    pub t: i64,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtTable {
    pub schema: u32,
    pub prime: u64,
    pub algebroid: String,
    pub comodule: String,
    pub window: Window,
    pub input_hash: String,
    /// Every bidegree of the window, sorted by (s, t).
    pub entries: Vec<ExtEntry>,
}

impl ExtTable {
    pub fn dim(&self, s: usize, t: i64) -> Option<usize> {
        self.entries
            .binary_search_by(|e| (e.s, e.t).cmp(&(s, t)))
            .ok()
            .map(|i| self.entries[i].dim)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,t,dim\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{}", e.s, e.t, e.dim);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    /// SHA-256 of the CSV rendering.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }

    /// ASCII grid: one column per t − s, one row per s (highest first).
    pub fn chart(&self) -> String {
        emit_chart(self)
    }
}

pub fn emit_chart(table: &ExtTable) -> String {
    let win = &table.window;
    let cells: BTreeMap<(usize, i64), usize> = table
        .entries
        .iter()
        .filter(|e| e.dim > 0)
        .map(|e| ((e.s, e.t - e.s as i64), e.dim))
        .collect();
    let lo = win.t_min - win.s_max as i64;
    let hi = win.t_max;
    let mut width = 1;
    for n in lo..=hi {
        width = width.max(n.to_string().len());
    }
    for d in cells.values() {
        width = width.max(d.to_string().len());
    }
    let label = win.s_max.to_string().len().max(3);
    let mut out = String::new();
    let _ = write!(out, "{:>label$} |", "t-s");
    if lo <= hi && !table.entries.is_empty() {
        for n in lo..=hi {
            let _ = write!(out, " {n:>width$}");
        }
    }
    out.push('\n');
    if table.entries.is_empty() {
        return out;
    }
    for s in (0..=win.s_max).rev() {
        let mut line = format!("{s:>label$} |");
        for n in lo..=hi {
            match cells.get(&(s, n)) {
                Some(d) => {
                    let _ = write!(line, " {d:>width$}");
                }
                None => {
                    let _ = write!(line, " {:>width$}", "");
                }
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn input_hash(c: &CobarComplex) -> String {
    let mut h = Sha256::new();
    h.update(c.algebroid.a().fingerprint().as_bytes());
    h.update(c.algebroid.gamma().fingerprint().as_bytes());
    for (name, deg) in &c.comodule.generators {
        h.update(format!("{name}:{deg};").as_bytes());
    }
    for row in &c.comodule.psi {
        for g in row {
            h.update(format!("{g};").as_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// All dimensions of the window; bidegrees run in parallel.
pub fn ext_dims(c: &CobarComplex, win: &Window) -> Result<ExtTable> {
    if win.weight > win.stable_weight {
        return Err(AlgebraError::InvalidPresentation(
            "stable weight must be at least the weight".into(),
        ));
    }
    let cof = Cofaces::new(c, win.s_max)?;
    let jobs: Vec<(usize, i64)> = (0..=win.s_max)
        .flat_map(|s| (win.t_min..=win.t_max).map(move |t| (s, t)))
        .collect();
    let dims = jobs
        .par_iter()
        .map(|&(s, t)| ext_dim(c, &cof, s, t, win).map(|dim| ExtEntry { s, t, dim }))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = dims;
    entries.sort();
    Ok(ExtTable {
        schema: 1,
        prime: c.prime,
        algebroid: c.algebroid.name().to_string(),
        comodule: c.comodule.name.clone(),
        window: *win,
        input_hash: input_hash(c),
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtMismatch {
    pub s: usize,
    pub t: i64,
    pub left: Option<usize>,
    pub right: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExtDiff {
    pub mismatches: Vec<ExtMismatch>,
}

impl ExtDiff {
    pub fn is_empty(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn first(&self) -> Option<&ExtMismatch> {
        self.mismatches.first()
    }
}

/// Bidegree-by-bidegree comparison over the union of both windows.
pub fn compare_ext(left: &ExtTable, right: &ExtTable) -> ExtDiff {
    let mut keys: Vec<(usize, i64)> = left
        .entries
        .iter()
        .chain(&right.entries)
        .map(|e| (e.s, e.t))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let mismatches = keys
        .into_iter()
        .filter_map(|(s, t)| {
            let (l, r) = (left.dim(s, t), right.dim(s, t));
            (l != r).then_some(ExtMismatch {
                s,
                t,
                left: l,
                right: r,
            })
        })
        .collect();
    ExtDiff { mismatches }
}

#[cfg(test)]
mod tests {
    use super::*;
    #[test]
    fn exterior_tower() {
        let h = crate::hopf::primitive_truncated(2, 1, 2, 64).unwrap();
        let c = CobarComplex::unit(&h).unwrap();
        assert_eq!(cobar_basis(&c, 2, 2, 64).unwrap().len(), 1);
        let win = Window {
            s_max: 4,
            t_min: 0,
            t_max: 6,
            weight: 64,
            stable_weight: 64,
        };
        let table = ext_dims(&c, &win).unwrap();
        for e in &table.entries {
            assert_eq!(e.dim, usize::from(e.t == e.s as i64), "{e:?}");
        }
        assert!(check_d_squared(&c, 1, 3, 64).passed());
    }
}
