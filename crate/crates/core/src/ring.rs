//! Graded-commutative finitely presented algebras with truncation.
//!
//! A [`Presentation`] lists generators with integer degrees, a set of
//! rewrite rules, the generators that are inverted, and a truncation bound.
//! Rewrite rules come in two flavours: elimination of a generator in favour
//! of a polynomial in strictly earlier generators (a kill rule is the zero
//! polynomial), and monic power rules `g^k -> lower terms`. The leading
//! monomials of the power rules are powers of distinct generators, so their
//! normal forms are unique.
//!
//! Every generator carries a nonnegative *weight*; for ordinary generators it
//! defaults to the degree and for inverted generators it is zero. The
//! truncation bound caps the weight of surviving terms, which for
//! presentations without inverted generators is the usual degree cap.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::coeff::{BaseRing, Coeff};
use crate::error::{AlgebraError, Result};

/// Exponent vector over the generators of one presentation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<i32>);

impl Monomial {
    pub fn one(n: usize) -> Monomial {
        Monomial(vec![0; n])
    }

    pub fn generator(n: usize, i: usize, e: i32) -> Monomial {
        let mut v = vec![0; n];
        v[i] = e;
        Monomial(v)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pads with zero exponents up to `n` generators.
    pub fn extended(&self, n: usize) -> Monomial {
        let mut v = self.0.clone();
        v.resize(n, 0);
        Monomial(v)
    }
}

pub type RawTerms = Vec<(Coeff, Monomial)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Generator {
    pub name: String,
    pub degree: i64,
    pub weight: i64,
    pub inverted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// The generator equals a polynomial in strictly earlier generators.
    Eliminate(RawTerms),
    /// `g^exponent` rewrites to a polynomial of lower order.
    Power { exponent: u32, rhs: RawTerms },
}

/// Builder input for one relation.
#[derive(Clone, Debug)]
pub struct RelationSpec {
    pub generator: String,
    pub exponent: u32,
    pub rhs: RawTerms,
}

#[derive(Debug)]
pub struct Presentation {
    name: String,
    base: BaseRing,
    gens: Vec<Generator>,
    rules: Vec<Option<Rule>>,
    truncation: i64,
    index: HashMap<String, usize>,
    /// Fully reduced images of eliminated generators.
    elim: Vec<Option<BTreeMap<Monomial, Coeff>>>,
    fingerprint: String,
}

impl PartialEq for Presentation {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
    }
}

impl Eq for Presentation {}

pub type Ring = Arc<Presentation>;

/// Incremental construction of a presentation.
#[derive(Clone, Debug)]
pub struct PresentationBuilder {
    name: String,
    base: BaseRing,
    gens: Vec<Generator>,
    relations: Vec<RelationSpec>,
    truncation: i64,
}

impl PresentationBuilder {
    pub fn new(name: impl Into<String>, base: BaseRing, truncation: i64) -> Self {
        PresentationBuilder {
            name: name.into(),
            base,
            gens: Vec::new(),
            relations: Vec::new(),
            truncation,
        }
    }

    /// Starts from an existing presentation, keeping its generators and rules.
    pub fn extending(p: &Presentation, name: impl Into<String>) -> Self {
        let mut b = PresentationBuilder::new(name, p.base, p.truncation);
        b.gens = p.gens.clone();
        for (i, r) in p.rules.iter().enumerate() {
            if let Some(r) = r {
                let (exponent, rhs) = match r {
                    Rule::Eliminate(t) => (1, t.clone()),
                    Rule::Power { exponent, rhs } => (*exponent, rhs.clone()),
                };
                b.relations.push(RelationSpec {
                    generator: p.gens[i].name.clone(),
                    exponent,
                    rhs,
                });
            }
        }
        b
    }

    pub fn generator(&mut self, name: impl Into<String>, degree: i64) -> &mut Self {
        let degree_weight = degree.max(0);
        self.gens.push(Generator {
            name: name.into(),
            degree,
            weight: degree_weight,
            inverted: false,
        });
        self
    }

    pub fn weighted_generator(
        &mut self,
        name: impl Into<String>,
        degree: i64,
        weight: i64,
    ) -> &mut Self {
        self.gens.push(Generator {
            name: name.into(),
            degree,
            weight,
            inverted: false,
        });
        self
    }

    pub fn invert(&mut self, name: &str) -> Result<&mut Self> {
        let g = self
            .gens
            .iter_mut()
            .find(|g| g.name == name)
            .ok_or_else(|| AlgebraError::InvalidPresentation(format!("unknown generator {name}")))?;
        g.inverted = true;
        g.weight = 0;
        Ok(self)
    }

    pub fn set_weight(&mut self, name: &str, weight: i64) -> Result<&mut Self> {
        let g = self
            .gens
            .iter_mut()
            .find(|g| g.name == name)
            .ok_or_else(|| AlgebraError::InvalidPresentation(format!("unknown generator {name}")))?;
        g.weight = weight;
        Ok(self)
    }

    /// Renames a generator; relations refer to positions, so they are kept.
    pub fn rename(&mut self, i: usize, name: impl Into<String>) -> &mut Self {
        let old = std::mem::replace(&mut self.gens[i].name, name.into());
        for r in self.relations.iter_mut() {
            if r.generator == old {
                r.generator = self.gens[i].name.clone();
            }
        }
        self
    }

    pub fn truncation(&mut self, d: i64) -> &mut Self {
        self.truncation = d;
        self
    }

    pub fn base(&self) -> BaseRing {
        self.base
    }

    pub fn generator_count(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    /// `generator ↦ rhs` (exponent 1) or `generator^exponent ↦ rhs`.
    /// Monomials in `rhs` index the builder's generator list.
    pub fn relation(&mut self, generator: &str, exponent: u32, rhs: RawTerms) -> &mut Self {
        self.relations.push(RelationSpec {
            generator: generator.to_string(),
            exponent,
            rhs,
        });
        self
    }

    pub fn kill(&mut self, generator: &str) -> &mut Self {
        self.relation(generator, 1, Vec::new())
    }

    pub fn build(&self) -> Result<Ring> {
        Presentation::from_builder(self).map(Arc::new)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '\'' | '|' | '.'))
}

impl Presentation {
    fn from_builder(b: &PresentationBuilder) -> Result<Presentation> {
        let n = b.gens.len();
        let mut index = HashMap::new();
        for (i, g) in b.gens.iter().enumerate() {
            if !is_identifier(&g.name) {
                return Err(AlgebraError::InvalidPresentation(format!(
                    "bad generator name {:?}",
                    g.name
                )));
            }
            if index.insert(g.name.clone(), i).is_some() {
                return Err(AlgebraError::InvalidPresentation(format!(
                    "duplicate generator {}",
                    g.name
                )));
            }
            if g.inverted && g.weight != 0 {
                return Err(AlgebraError::InvalidPresentation(format!(
                    "inverted generator {} must have weight 0",
                    g.name
                )));
            }
            if g.weight < 0 {
                return Err(AlgebraError::InvalidPresentation(format!(
                    "generator {} has negative weight",
                    g.name
                )));
            }
        }
        let char2 = b.base.characteristic() == 2;
        let mut rules: Vec<Option<Rule>> = vec![None; n];
        for rel in &b.relations {
            let gi = *index.get(&rel.generator).ok_or_else(|| {
                AlgebraError::InvalidPresentation(format!(
                    "relation for unknown generator {}",
                    rel.generator
                ))
            })?;
            let g = &b.gens[gi];
            if rules[gi].is_some() {
                return Err(AlgebraError::InvalidPresentation(format!(
                    "generator {} carries two relations",
                    g.name
                )));
            }
            if g.inverted {
                return Err(AlgebraError::InvalidPresentation(format!(
                    "inverted generator {} may not carry a relation",
                    g.name
                )));
            }
            let lhs_degree = g.degree * rel.exponent as i64;
            let mut rhs = Vec::new();
            for (c, m) in &rel.rhs {
                if c.is_zero() {
                    continue;
                }
                // Relations inherited by an extending builder predate the
                // appended generators.
                if m.len() > n {
                    return Err(AlgebraError::InvalidPresentation(format!(
                        "relation for {} has a monomial of the wrong length",
                        g.name
                    )));
                }
                let m = &m.extended(n);
                let deg: i64 = m.0.iter().zip(&b.gens).map(|(&e, h)| e as i64 * h.degree).sum();
                if deg != lhs_degree {
                    return Err(AlgebraError::InvalidPresentation(format!(
                        "relation for {} is not homogeneous (degree {deg} vs {lhs_degree})",
                        g.name
                    )));
                }
                for (j, &e) in m.0.iter().enumerate() {
                    if e < 0 && !b.gens[j].inverted {
                        return Err(AlgebraError::IllegalExponent(format!(
                            "negative power of {} in relation for {}",
                            b.gens[j].name, g.name
                        )));
                    }
                }
                rhs.push((b.base.convert(c)?, m.clone()));
            }
            if rel.exponent == 1 {
                for (_, m) in &rhs {
                    if m.0[gi..].iter().any(|&e| e != 0) {
                        return Err(AlgebraError::InvalidPresentation(format!(
                            "rewrite rule for {} must use strictly earlier generators",
                            g.name
                        )));
                    }
                }
                rules[gi] = Some(Rule::Eliminate(rhs));
            } else if rel.exponent >= 2 {
                if g.degree % 2 != 0 && !char2 {
                    return Err(AlgebraError::InvalidPresentation(format!(
                        "power rule on odd generator {} outside characteristic 2",
                        g.name
                    )));
                }
                let lhs = Monomial::generator(n, gi, rel.exponent as i32);
                for (_, m) in &rhs {
                    if order_cmp(&b.gens, m, &lhs) != std::cmp::Ordering::Less {
                        return Err(AlgebraError::InvalidPresentation(format!(
                            "power rule for {}^{} has a right-hand term that is not smaller",
                            g.name, rel.exponent
                        )));
                    }
                }
                rules[gi] = Some(Rule::Power {
                    exponent: rel.exponent,
                    rhs,
                });
            } else {
                return Err(AlgebraError::InvalidPresentation(format!(
                    "relation for {} has exponent 0",
                    g.name
                )));
            }
        }
        let fingerprint = {
            let mut h = Sha256::new();
            h.update(format!("{:?}|{}|", b.base, b.truncation));
            for g in &b.gens {
                h.update(format!("{}:{}:{}:{};", g.name, g.degree, g.weight, g.inverted));
            }
            for (i, r) in rules.iter().enumerate() {
                if let Some(r) = r {
                    h.update(format!("{i}={r:?};"));
                }
            }
            hex::encode(h.finalize())
        };
        let mut p = Presentation {
            name: b.name.clone(),
            base: b.base,
            gens: b.gens.clone(),
            rules,
            truncation: b.truncation,
            index,
            elim: vec![None; n],
            fingerprint,
        };
        // Elimination images are reduced in generator order, so each only
        // references already-reduced earlier images.
        for i in 0..n {
            if let Some(Rule::Eliminate(rhs)) = &p.rules[i] {
                let rhs = rhs.clone();
                let mut acc = BTreeMap::new();
                let mut trunc = false;
                for (c, m) in rhs {
                    p.reduce_into(c, m, &mut acc, &mut trunc)?;
                }
                p.elim[i] = Some(acc);
            }
        }
        Ok(p)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> BaseRing {
        self.base
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn rules(&self) -> &[Option<Rule>] {
        &self.rules
    }

    pub fn truncation(&self) -> i64 {
        self.truncation
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn is_eliminated(&self, i: usize) -> bool {
        matches!(self.rules[i], Some(Rule::Eliminate(_)))
    }

    /// Generators that survive in normal forms.
    pub fn free_generators(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.gens.len()).filter(move |&i| !self.is_eliminated(i))
    }

    fn is_odd(&self, i: usize) -> bool {
        self.gens[i].degree % 2 != 0
    }

    pub fn degree_of(&self, m: &Monomial) -> i64 {
        m.0.iter()
            .zip(&self.gens)
            .map(|(&e, g)| e as i64 * g.degree)
            .sum()
    }

    pub fn weight_of(&self, m: &Monomial) -> i64 {
        m.0.iter()
            .zip(&self.gens)
            .map(|(&e, g)| e as i64 * g.weight)
            .sum()
    }

    /// Renames the presentation (the fingerprint is unaffected).
    pub fn renamed(&self, name: impl Into<String>) -> Ring {
        Arc::new(Presentation {
            name: name.into(),
            base: self.base,
            gens: self.gens.clone(),
            rules: self.rules.clone(),
            truncation: self.truncation,
            index: self.index.clone(),
            elim: self.elim.clone(),
            fingerprint: self.fingerprint.clone(),
        })
    }

    /// Same presentation with a different truncation bound.
    pub fn with_truncation(&self, d: i64) -> Result<Ring> {
        let mut b = PresentationBuilder::extending(self, self.name.clone());
        b.truncation(d);
        b.build()
    }

    /// The term order used by power rules.
    pub fn compare_monomials(&self, a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
        order_cmp(&self.gens, a, b)
    }

    pub fn formatted_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (i, &e) in m.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if e == 1 {
                parts.push(self.gens[i].name.clone());
            } else {
                parts.push(format!("{}^{}", self.gens[i].name, e));
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// Koszul sign of the product `a·b` brought into canonical order.
    pub(crate) fn koszul_sign(&self, a: &[i32], b: &[i32]) -> bool {
        if self.base.characteristic() == 2 {
            return false;
        }
        let mut s: i64 = 0;
        let mut a_after: i64 = 0;
        for idx in (0..a.len()).rev() {
            if self.is_odd(idx) {
                s += b[idx] as i64 * a_after;
                a_after += a[idx] as i64;
            }
        }
        s % 2 != 0
    }

    /// Adds the normal form of `c·m` into `acc`.
    pub(crate) fn reduce_into(
        &self,
        c: Coeff,
        m: Monomial,
        acc: &mut BTreeMap<Monomial, Coeff>,
        truncated: &mut bool,
    ) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        let n = self.gens.len();
        for (i, &e) in m.0.iter().enumerate() {
            if e < 0 && !self.gens[i].inverted {
                return Err(AlgebraError::IllegalExponent(format!(
                    "negative power of non-inverted generator {}",
                    self.gens[i].name
                )));
            }
        }
        // Eliminated generators: rebuild the monomial as an ordered product.
        if let Some(gi) = (0..n).find(|&i| m.0[i] != 0 && self.elim[i].is_some()) {
            let e = m.0[gi] as u32;
            let mut prefix = m.clone();
            let mut suffix = Monomial::one(n);
            for j in gi..n {
                prefix.0[j] = 0;
                if j > gi {
                    suffix.0[j] = m.0[j];
                }
            }
            let img = self.elim[gi].as_ref().unwrap();
            let mut cur: BTreeMap<Monomial, Coeff> = BTreeMap::new();
            cur.insert(prefix, c);
            for _ in 0..e {
                cur = self.mul_maps(&cur, img, truncated)?;
            }
            let mut sfx = BTreeMap::new();
            self.reduce_into(self.base.one(), suffix, &mut sfx, truncated)?;
            let prod = self.mul_maps(&cur, &sfx, truncated)?;
            for (mm, cc) in prod {
                add_term(acc, mm, cc);
            }
            return Ok(());
        }
        let char2 = self.base.characteristic() == 2;
        if !char2 {
            for i in 0..n {
                if self.is_odd(i) && m.0[i] >= 2 {
                    return Ok(());
                }
            }
        }
        for i in 0..n {
            if let Some(Rule::Power { exponent, rhs }) = &self.rules[i] {
                if m.0[i] >= *exponent as i32 {
                    let mut rest = m.clone();
                    rest.0[i] -= *exponent as i32;
                    for (rc, rm) in rhs {
                        let neg = self.koszul_sign(&rm.0, &rest.0);
                        let mut nm = rest.clone();
                        for (a, b) in nm.0.iter_mut().zip(&rm.0) {
                            *a += b;
                        }
                        let mut nc = c.mul(rc);
                        if neg {
                            nc = nc.neg();
                        }
                        self.reduce_into(nc, nm, acc, truncated)?;
                    }
                    return Ok(());
                }
            }
        }
        if self.weight_of(&m) > self.truncation {
            *truncated = true;
            return Ok(());
        }
        add_term(acc, m, c);
        Ok(())
    }

    /// Product of two normal forms given as term maps.
    pub(crate) fn mul_maps(
        &self,
        a: &BTreeMap<Monomial, Coeff>,
        b: &BTreeMap<Monomial, Coeff>,
        truncated: &mut bool,
    ) -> Result<BTreeMap<Monomial, Coeff>> {
        let mut acc = BTreeMap::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                let neg = self.koszul_sign(&ma.0, &mb.0);
                let m = Monomial(ma.0.iter().zip(&mb.0).map(|(x, y)| x + y).collect());
                let mut c = ca.mul(cb);
                if neg {
                    c = c.neg();
                }
                if self.needs_reduction(&m) {
                    self.reduce_into(c, m, &mut acc, truncated)?;
                } else if self.weight_of(&m) > self.truncation {
                    *truncated = true;
                } else {
                    add_term(&mut acc, m, c);
                }
            }
        }
        Ok(acc)
    }

    fn needs_reduction(&self, m: &Monomial) -> bool {
        let char2 = self.base.characteristic() == 2;
        m.0.iter().enumerate().any(|(i, &e)| {
            e != 0
                && (self.elim[i].is_some()
                    || (!char2 && e >= 2 && self.is_odd(i))
                    || matches!(&self.rules[i], Some(Rule::Power { exponent, .. }) if e >= *exponent as i32))
        })
    }

    /// Complete, duplicate-free list of normal-form monomials of degree `t`
    /// whose weight is at most the truncation bound, in lexicographic order.
    pub fn degree_basis(&self, t: i64) -> Result<Vec<Monomial>> {
        self.degree_basis_within(t, self.truncation)
    }

    /// Like [`degree_basis`](Self::degree_basis) with an explicit weight cap.
    pub fn degree_basis_within(&self, t: i64, max_weight: i64) -> Result<Vec<Monomial>> {
        let n = self.gens.len();
        let char2 = self.base.characteristic() == 2;
        let mut bounded: Vec<(usize, i32)> = Vec::new();
        let mut inverted = Vec::new();
        for i in self.free_generators() {
            let g = &self.gens[i];
            if g.inverted {
                inverted.push(i);
                continue;
            }
            let mut cap: Option<i32> = None;
            if let Some(Rule::Power { exponent, .. }) = &self.rules[i] {
                cap = Some(*exponent as i32 - 1);
            }
            if !char2 && self.is_odd(i) {
                cap = Some(cap.map_or(1, |c| c.min(1)));
            }
            if g.weight > 0 {
                let wcap = (max_weight.max(0) / g.weight) as i32;
                cap = Some(cap.map_or(wcap, |c| c.min(wcap)));
            }
            match cap {
                Some(c) => bounded.push((i, c)),
                None => {
                    return Err(AlgebraError::InfiniteBasis(format!(
                        "generator {} has weight 0 and unbounded exponent",
                        g.name
                    )))
                }
            }
        }
        let inv_nonzero: Vec<usize> = inverted
            .iter()
            .copied()
            .filter(|&i| self.gens[i].degree != 0)
            .collect();
        if inverted.len() != inv_nonzero.len() {
            return Err(AlgebraError::InfiniteBasis(
                "an inverted generator of degree 0 has infinitely many powers in every degree"
                    .into(),
            ));
        }
        if inv_nonzero.len() >= 2 {
            return Err(AlgebraError::InfiniteBasis(format!(
                "{} independent inverted generators",
                inv_nonzero.len()
            )));
        }
        let mut out = Vec::new();
        let mut cur = vec![0i32; n];
        self.enumerate_rec(&bounded, 0, max_weight, t, &inv_nonzero, &mut cur, &mut out);
        out.sort();
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate_rec(
        &self,
        bounded: &[(usize, i32)],
        k: usize,
        weight_left: i64,
        degree_left: i64,
        inverted: &[usize],
        cur: &mut Vec<i32>,
        out: &mut Vec<Monomial>,
    ) {
        if k == bounded.len() {
            match inverted.first() {
                None => {
                    if degree_left == 0 {
                        out.push(Monomial(cur.clone()));
                    }
                }
                Some(&i) => {
                    let d = self.gens[i].degree;
                    if degree_left % d == 0 {
                        cur[i] = (degree_left / d) as i32;
                        out.push(Monomial(cur.clone()));
                        cur[i] = 0;
                    }
                }
            }
            return;
        }
        let (i, cap) = bounded[k];
        let g = &self.gens[i];
        for e in 0..=cap {
            let w = g.weight * e as i64;
            if w > weight_left {
                break;
            }
            cur[i] = e;
            self.enumerate_rec(
                bounded,
                k + 1,
                weight_left - w,
                degree_left - g.degree * e as i64,
                inverted,
                cur,
                out,
            );
        }
        cur[i] = 0;
    }
}

fn add_term(acc: &mut BTreeMap<Monomial, Coeff>, m: Monomial, c: Coeff) {
    use std::collections::btree_map::Entry;
    match acc.entry(m) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            o.get_mut().add_assign(&c);
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// Term order: weight first, then reverse-lexicographic on non-inverted
/// exponents (the last generator is most significant).
fn order_cmp(gens: &[Generator], a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    let wa: i64 = a.0.iter().zip(gens).map(|(&e, g)| e as i64 * g.weight).sum();
    let wb: i64 = b.0.iter().zip(gens).map(|(&e, g)| e as i64 * g.weight).sum();
    wa.cmp(&wb).then_with(|| {
        for i in (0..gens.len()).rev() {
            if gens[i].inverted {
                continue;
            }
            match a.0[i].cmp(&b.0[i]) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    })
}

/// An element in normal form.
#[derive(Clone)]
pub struct Element {
    ring: Ring,
    terms: BTreeMap<Monomial, Coeff>,
    truncated: bool,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}

impl Eq for Element {}

pub fn same_ring(a: &Ring, b: &Ring) -> bool {
    Arc::ptr_eq(a, b) || a.fingerprint == b.fingerprint
}

fn check_same(a: &Ring, b: &Ring) -> Result<()> {
    if same_ring(a, b) {
        Ok(())
    } else {
        Err(AlgebraError::PresentationMismatch(format!(
            "{} vs {}",
            a.name, b.name
        )))
    }
}

impl Element {
    pub fn zero(ring: &Ring) -> Element {
        Element {
            ring: ring.clone(),
            terms: BTreeMap::new(),
            truncated: false,
        }
    }

    pub fn one(ring: &Ring) -> Element {
        Element::constant(ring, ring.base.one())
    }

    pub fn constant(ring: &Ring, c: Coeff) -> Element {
        Element::from_terms(ring, vec![(c, Monomial::one(ring.ngens()))])
            .expect("constants are always legal")
    }

    pub fn integer(ring: &Ring, n: i64) -> Element {
        Element::constant(ring, ring.base.from_i64(n))
    }

    pub fn generator(ring: &Ring, name: &str) -> Result<Element> {
        let i = ring.index_of(name).ok_or_else(|| {
            AlgebraError::InvalidPresentation(format!("no generator {name} in {}", ring.name))
        })?;
        Element::from_terms(ring, vec![(ring.base.one(), Monomial::generator(ring.ngens(), i, 1))])
    }

    pub fn generator_at(ring: &Ring, i: usize) -> Element {
        Element::from_terms(ring, vec![(ring.base.one(), Monomial::generator(ring.ngens(), i, 1))])
            .expect("generator is legal")
    }

    /// Normalizes a raw list of terms.
    pub fn from_terms(ring: &Ring, raw: RawTerms) -> Result<Element> {
        let mut acc = BTreeMap::new();
        let mut truncated = false;
        for (c, m) in raw {
            if m.len() != ring.ngens() {
                return Err(AlgebraError::IllegalExponent(format!(
                    "monomial has {} exponents, presentation has {} generators",
                    m.len(),
                    ring.ngens()
                )));
            }
            let c = ring.base.convert(&c)?;
            ring.reduce_into(c, m, &mut acc, &mut truncated)?;
        }
        Ok(Element {
            ring: ring.clone(),
            terms: acc,
            truncated,
        })
    }

    pub(crate) fn from_map(ring: &Ring, terms: BTreeMap<Monomial, Coeff>, truncated: bool) -> Element {
        Element {
            ring: ring.clone(),
            terms,
            truncated,
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn term_map(&self) -> &BTreeMap<Monomial, Coeff> {
        &self.terms
    }

    pub fn raw_terms(&self) -> RawTerms {
        self.terms.iter().map(|(m, c)| (c.clone(), m.clone())).collect()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&Coeff> {
        self.terms.get(m)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn with_truncation_flag(mut self, flag: bool) -> Element {
        self.truncated = flag;
        self
    }

    /// Degree if homogeneous; `None` for zero or inhomogeneous elements.
    pub fn degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| self.ring.degree_of(m));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    /// Largest term in the presentation's term order.
    pub fn leading_term(&self) -> Option<(&Monomial, &Coeff)> {
        self.terms
            .iter()
            .max_by(|a, b| self.ring.compare_monomials(a.0, b.0))
    }

    pub fn max_weight(&self) -> Option<i64> {
        self.terms.keys().map(|m| self.ring.weight_of(m)).max()
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        check_same(&self.ring, &other.ring)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_term(&mut terms, m.clone(), c.clone());
        }
        Ok(Element {
            ring: self.ring.clone(),
            terms,
            truncated: self.truncated || other.truncated,
        })
    }

    pub fn add_assign(&mut self, other: &Element) -> Result<()> {
        check_same(&self.ring, &other.ring)?;
        for (m, c) in &other.terms {
            add_term(&mut self.terms, m.clone(), c.clone());
        }
        self.truncated |= other.truncated;
        Ok(())
    }

    pub fn neg(&self) -> Element {
        Element {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
            truncated: self.truncated,
        }
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Coeff) -> Element {
        let terms: BTreeMap<_, _> = self
            .terms
            .iter()
            .map(|(m, x)| (m.clone(), x.mul(c)))
            .filter(|(_, x)| !x.is_zero())
            .collect();
        Element {
            ring: self.ring.clone(),
            terms,
            truncated: self.truncated,
        }
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        check_same(&self.ring, &other.ring)?;
        let mut truncated = self.truncated || other.truncated;
        let terms = self.ring.mul_maps(&self.terms, &other.terms, &mut truncated)?;
        Ok(Element {
            ring: self.ring.clone(),
            terms,
            truncated,
        })
    }

    pub fn pow(&self, e: u32) -> Result<Element> {
        let mut acc = Element::one(&self.ring);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Inverse of `u·(1 + n)` where `u` is a unit monomial of weight 0 and
    /// every other term has positive weight, via a truncated geometric series.
    pub fn inverse(&self) -> Result<Element> {
        let ring = &self.ring;
        let mut lead = None;
        for (m, c) in &self.terms {
            if ring.weight_of(m) == 0 {
                if lead.is_some() {
                    return Err(AlgebraError::NotInvertible(format!(
                        "{self} has several weight-0 terms"
                    )));
                }
                lead = Some((m.clone(), c.clone()));
            }
        }
        let (m, c) = lead.ok_or_else(|| AlgebraError::NotInvertible(self.to_string()))?;
        let monomial_unit = m
            .0
            .iter()
            .enumerate()
            .all(|(i, &e)| e == 0 || ring.gens[i].inverted);
        let cinv = c.inverse().ok_or_else(|| AlgebraError::NotInvertible(self.to_string()))?;
        if !monomial_unit {
            return Err(AlgebraError::NotInvertible(self.to_string()));
        }
        let mut inv_m = m.clone();
        for e in inv_m.0.iter_mut() {
            *e = -*e;
        }
        let u_inv = Element::from_terms(ring, vec![(cinv, inv_m)])?;
        let normalized = self.mul(&u_inv)?;
        let nil = normalized.sub(&Element::one(ring))?;
        if nil.is_zero() {
            return Ok(u_inv);
        }
        if nil.terms.keys().any(|m| ring.weight_of(m) == 0) {
            return Err(AlgebraError::NotInvertible(self.to_string()));
        }
        // (1 + x)^{-1} = Σ (-x)^k; terminates because weights grow.
        let neg = nil.neg();
        let mut sum = Element::one(ring);
        let mut power = Element::one(ring);
        let mut steps = 0i64;
        loop {
            power = power.mul(&neg)?;
            if power.is_zero() {
                break;
            }
            steps += 1;
            if steps > ring.truncation.max(0) + 1 || steps > 100_000 {
                return Err(AlgebraError::SearchBudgetExceeded(format!(
                    "geometric series for the inverse of {self} does not terminate"
                )));
            }
            sum.add_assign(&power)?;
        }
        sum.mul(&u_inv)
    }

    /// Checks that every coefficient is p-integral (rational modes only).
    pub fn assert_p_integral(&self, p: u64) -> Result<()> {
        for (m, c) in &self.terms {
            if !c.is_p_integral(p) {
                return Err(AlgebraError::IntegralityFailure(format!(
                    "coefficient {c} of {} is not {p}-integral",
                    self.ring.formatted_monomial(m)
                )));
            }
        }
        Ok(())
    }

    /// Homogeneous component of the given weight.
    pub fn weight_part(&self, w: i64) -> Element {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| self.ring.weight_of(m) == w)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Element::from_map(&self.ring, terms, self.truncated)
    }

    /// Reinterprets this element in `target`, whose generators extend the
    /// generators of this element's presentation as a prefix.
    pub fn embed_prefix(&self, target: &Ring) -> Result<Element> {
        let raw = self
            .terms
            .iter()
            .map(|(m, c)| (c.clone(), m.extended(target.ngens())))
            .collect();
        Element::from_terms(target, raw)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let (neg, abs) = c.sign_and_abs();
            let mono = self.ring.formatted_monomial(m);
            let body = if mono == "1" {
                abs
            } else if abs == "1" {
                mono
            } else if abs.contains('/') {
                format!("({abs})*{mono}")
            } else {
                format!("{abs}*{mono}")
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                write!(f, "{body}")?;
            } else if neg {
                write!(f, " - {body}")?;
            } else {
                write!(f, " + {body}")?;
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element[{}]({})", self.ring.name, self)
    }
}

/// Outcome of a verification: pass, or the first failing identity and a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail { identity: String, witness: String },
}

impl Verdict {
    pub fn fail(identity: impl Into<String>, witness: impl Into<String>) -> Verdict {
        Verdict::Fail {
            identity: identity.into(),
            witness: witness.into(),
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    /// Keeps the first failure.
    pub fn and(self, other: impl FnOnce() -> Verdict) -> Verdict {
        match self {
            Verdict::Pass => other(),
            f => f,
        }
    }
}

/// A ring map given by the images of the source generators.
#[derive(Clone)]
pub struct RingMorphism {
    source: Ring,
    target: Ring,
    images: Vec<Element>,
    inverses: Vec<Option<Element>>,
}

impl fmt::Debug for RingMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingMorphism[{} -> {}](", self.source.name, self.target.name)?;
        for (g, img) in self.source.gens.iter().zip(&self.images) {
            write!(f, "{} ↦ {}; ", g.name, img)?;
        }
        write!(f, ")")
    }
}

impl RingMorphism {
    /// `images[i]` is the image of source generator `i`.
    pub fn new(source: &Ring, target: &Ring, images: Vec<Element>) -> Result<RingMorphism> {
        if images.len() != source.ngens() {
            return Err(AlgebraError::PresentationMismatch(format!(
                "{} images for {} generators",
                images.len(),
                source.ngens()
            )));
        }
        for img in &images {
            check_same(img.ring(), target)?;
        }
        let mut inverses = vec![None; images.len()];
        for (i, g) in source.gens.iter().enumerate() {
            if g.inverted {
                inverses[i] = Some(images[i].inverse().map_err(|e| {
                    AlgebraError::NotInvertible(format!(
                        "image of inverted generator {}: {e}",
                        g.name
                    ))
                })?);
            }
        }
        Ok(RingMorphism {
            source: source.clone(),
            target: target.clone(),
            images,
            inverses,
        })
    }

    /// Images assigned by generator name; the remaining generators map to the
    /// generator of the same name in the target.
    pub fn from_named(
        source: &Ring,
        target: &Ring,
        named: &[(&str, Element)],
    ) -> Result<RingMorphism> {
        let mut images = Vec::with_capacity(source.ngens());
        for g in &source.gens {
            if let Some((_, e)) = named.iter().find(|(n, _)| *n == g.name) {
                images.push(e.clone());
            } else {
                images.push(Element::generator(target, &g.name)?);
            }
        }
        RingMorphism::new(source, target, images)
    }

    pub fn identity(ring: &Ring) -> RingMorphism {
        let images = (0..ring.ngens()).map(|i| Element::generator_at(ring, i)).collect();
        RingMorphism::new(ring, ring, images).expect("identity is well formed")
    }

    pub fn source(&self) -> &Ring {
        &self.source
    }

    pub fn target(&self) -> &Ring {
        &self.target
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn image_of(&self, name: &str) -> Option<&Element> {
        self.source.index_of(name).map(|i| &self.images[i])
    }

    pub fn apply(&self, a: &Element) -> Result<Element> {
        check_same(a.ring(), &self.source)?;
        let mut cache: HashMap<(usize, i32), Element> = HashMap::new();
        let mut acc = Element::zero(&self.target);
        for (m, c) in a.terms() {
            let c = self.target.base.convert(c)?;
            let mut prod = Element::constant(&self.target, c);
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let factor = match cache.get(&(i, e)) {
                    Some(f) => f.clone(),
                    None => {
                        let f = if e > 0 {
                            self.images[i].pow(e as u32)?
                        } else {
                            self.inverses[i]
                                .as_ref()
                                .ok_or_else(|| {
                                    AlgebraError::IllegalExponent(format!(
                                        "negative power of {}",
                                        self.source.gens[i].name
                                    ))
                                })?
                                .pow((-e) as u32)?
                        };
                        cache.insert((i, e), f.clone());
                        f
                    }
                };
                prod = prod.mul(&factor)?;
                if prod.is_zero() {
                    break;
                }
            }
            acc.add_assign(&prod)?;
        }
        let flag = acc.truncated() || a.truncated();
        Ok(acc.with_truncation_flag(flag))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RingMorphism) -> Result<RingMorphism> {
        check_same(&other.target, &self.source)?;
        let images = other
            .images
            .iter()
            .map(|e| self.apply(e))
            .collect::<Result<Vec<_>>>()?;
        RingMorphism::new(&other.source, &self.target, images)
    }

    /// Degree preservation and relation compatibility for relations of
    /// degree at most `bound`.
    pub fn check(&self, bound: i64) -> Verdict {
        for (i, g) in self.source.gens.iter().enumerate() {
            let img = &self.images[i];
            if !img.is_zero() && img.degree() != Some(g.degree) {
                return Verdict::fail(
                    format!("degree({}) preserved", g.name),
                    format!("{} ↦ {} of degree {:?}", g.name, img, img.degree()),
                );
            }
        }
        for (i, rule) in self.source.rules.iter().enumerate() {
            let g = &self.source.gens[i];
            let Some(rule) = rule else { continue };
            let (exp, rhs) = match rule {
                Rule::Eliminate(r) => (1u32, r),
                Rule::Power { exponent, rhs } => (*exponent, rhs),
            };
            if g.degree * exp as i64 > bound {
                continue;
            }
            let lhs = match self.images[i].pow(exp) {
                Ok(l) => l,
                Err(e) => return Verdict::fail(format!("relation for {}", g.name), e.to_string()),
            };
            let rhs_img = (|| -> Result<Element> {
                let mut acc = Element::zero(&self.target);
                for (c, m) in rhs {
                    // Apply generator-wise without renormalizing in the source.
                    let c = self.target.base.convert(c)?;
                    let mut prod = Element::constant(&self.target, c);
                    for (j, &e) in m.0.iter().enumerate() {
                        if e > 0 {
                            prod = prod.mul(&self.images[j].pow(e as u32)?)?;
                        } else if e < 0 {
                            let inv = self.inverses[j].as_ref().ok_or_else(|| {
                                AlgebraError::IllegalExponent(self.source.gens[j].name.clone())
                            })?;
                            prod = prod.mul(&inv.pow((-e) as u32)?)?;
                        }
                    }
                    acc.add_assign(&prod)?;
                }
                Ok(acc)
            })();
            match rhs_img {
                Ok(r) => {
                    let diff = lhs.sub(&r).expect("same target");
                    if !diff.is_zero() {
                        let lhs_txt = if exp == 1 {
                            g.name.clone()
                        } else {
                            format!("{}^{}", g.name, exp)
                        };
                        return Verdict::fail(
                            format!("relation {lhs_txt} = rhs preserved"),
                            format!("image difference {diff}"),
                        );
                    }
                }
                Err(e) => return Verdict::fail(format!("relation for {}", g.name), e.to_string()),
            }
        }
        Verdict::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp_poly(p: u64, gens: &[(&str, i64)], d: i64) -> Ring {
        let mut b = PresentationBuilder::new("test", BaseRing::PrimeField(p), d);
        for (n, deg) in gens {
            b.generator(*n, *deg);
        }
        b.build().unwrap()
    }

    #[test]
    fn characteristic_two_cancellation() {
        let r = fp_poly(2, &[("v1", 2)], 20);
        let v = Element::generator(&r, "v1").unwrap();
        assert!(v.add(&v).unwrap().is_zero());
    }

    #[test]
    fn koszul_sign_rule() {
        let r = fp_poly(3, &[("x", 1), ("y", 1)], 10);
        let x = Element::generator(&r, "x").unwrap();
        let y = Element::generator(&r, "y").unwrap();
        let xy = x.mul(&y).unwrap();
        let yx = y.mul(&x).unwrap();
        assert_eq!(yx, xy.scale(&Coeff::Fp(2, 3)));
        assert!(x.mul(&x).unwrap().is_zero());
    }

    #[test]
    fn inversion_and_kill() {
        let mut b = PresentationBuilder::new("loc", BaseRing::PrimeField(3), 40);
        b.generator("v1", 4).generator("v2", 16);
        b.invert("v1").unwrap();
        b.kill("v2");
        let r = b.build().unwrap();
        let v1 = Element::generator(&r, "v1").unwrap();
        let inv = v1.inverse().unwrap();
        assert_eq!(inv.mul(&v1).unwrap(), Element::one(&r));
        let sq = v1.pow(2).unwrap();
        assert_eq!(inv.mul(&sq).unwrap(), v1);
        let v2 = Element::generator(&r, "v2").unwrap();
        assert!(v2.mul(&v1).unwrap().is_zero());
        assert_eq!(r.degree_basis(-8).unwrap(), vec![Monomial(vec![-2, 0])]);
    }

    #[test]
    fn illegal_negative_exponent() {
        let r = fp_poly(2, &[("v1", 2)], 20);
        let err = Element::from_terms(&r, vec![(r.base().one(), Monomial(vec![-1]))]);
        assert!(matches!(err, Err(AlgebraError::IllegalExponent(_))));
    }

    #[test]
    fn bp_degree_basis_at_two() {
        let r = fp_poly(2, &[("v1", 2), ("v2", 6), ("v3", 14)], 30);
        let basis = r.degree_basis(6).unwrap();
        assert_eq!(basis.len(), 2);
        assert!(basis.contains(&Monomial(vec![3, 0, 0])));
        assert!(basis.contains(&Monomial(vec![0, 1, 0])));
        assert_eq!(r.degree_basis(0).unwrap(), vec![Monomial(vec![0, 0, 0])]);
    }

    #[test]
    fn two_inverted_generators_are_infinite() {
        let mut b = PresentationBuilder::new("two", BaseRing::PrimeField(2), 10);
        b.generator("a", 2).generator("b", -2);
        b.invert("a").unwrap();
        b.invert("b").unwrap();
        let r = b.build().unwrap();
        assert!(matches!(r.degree_basis(0), Err(AlgebraError::InfiniteBasis(_))));
    }

    #[test]
    fn power_rule_reduces() {
        let mut b = PresentationBuilder::new("cubic", BaseRing::PrimeField(3), 100);
        b.generator("v1", 4).generator("t1", 4);
        b.invert("v1").unwrap();
        // t1^3 = v1^2 t1
        b.relation("t1", 3, vec![(Coeff::Fp(1, 3), Monomial(vec![2, 1]))]);
        let r = b.build().unwrap();
        let t = Element::generator(&r, "t1").unwrap();
        let t5 = t.pow(5).unwrap();
        // t^5 = v1^2 t^3 = v1^4 t
        assert_eq!(t5, Element::from_terms(&r, vec![(Coeff::Fp(1, 3), Monomial(vec![4, 1]))]).unwrap());
    }

    #[test]
    fn morphism_degree_violation() {
        let src = fp_poly(3, &[("v1", 4)], 20);
        let tgt = fp_poly(3, &[], 20);
        let phi = RingMorphism::new(&src, &tgt, vec![Element::one(&tgt)]).unwrap();
        assert!(!phi.check(20).passed());
        assert!(RingMorphism::identity(&src).check(20).passed());
    }

    #[test]
    fn truncation_sets_flag() {
        let r = fp_poly(2, &[("v1", 2)], 4);
        let v = Element::generator(&r, "v1").unwrap();
        let v3 = v.pow(3).unwrap();
        assert!(v3.is_zero());
        assert!(v3.truncated());
    }
}
