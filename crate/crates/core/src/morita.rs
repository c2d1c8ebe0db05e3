//! Maps of Hopf algebroids, the induced algebroid Γ_f and equivalence
//! certificates.
//!
//! Supported base maps f_0: A → B keep A's generator list: B may kill or
//! rewrite generators that are free in A, invert more generators and reduce
//! the coefficients from the rationals to F_p. Then B ⊗_A Γ is presented by
//! B's generators followed by Γ's morphism generators, and the right copy of
//! B in B ⊗_A Γ ⊗_A B is absorbed by turning each extra relation r of B into
//! the relation η_R(r) = 0, solved for its leading monomial.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::coeff::{BaseRing, Coeff};
use crate::comodule::{base_change, Comodule};
use crate::error::{AlgebraError, Result};
use crate::finite::Corroboration;
use crate::hopf::{check_hopf_axioms, HopfAlgebroid, TensorPowers};
use crate::linalg::{CoeffEchelon, FpEchelon};
use crate::ring::{same_ring, Element, Monomial, PresentationBuilder, Ring, RingMorphism, Rule, Verdict};

#[derive(Clone, Debug)]
pub struct HopfMap {
    pub source: HopfAlgebroid,
    pub target: HopfAlgebroid,
    pub f0: RingMorphism,
    pub f1: RingMorphism,
}

impl HopfMap {
    pub fn new(
        source: &HopfAlgebroid,
        target: &HopfAlgebroid,
        f0: RingMorphism,
        f1: RingMorphism,
    ) -> Result<HopfMap> {
        if !same_ring(f0.source(), source.a()) || !same_ring(f0.target(), target.a()) {
            return Err(AlgebraError::PresentationMismatch("f_0 must map A to B".into()));
        }
        if !same_ring(f1.source(), source.gamma()) || !same_ring(f1.target(), target.gamma()) {
            return Err(AlgebraError::PresentationMismatch("f_1 must map Γ to Σ".into()));
        }
        Ok(HopfMap {
            source: source.clone(),
            target: target.clone(),
            f0,
            f1,
        })
    }

    pub fn identity(h: &HopfAlgebroid) -> HopfMap {
        HopfMap {
            source: h.clone(),
            target: h.clone(),
            f0: RingMorphism::identity(h.a()),
            f1: RingMorphism::identity(h.gamma()),
        }
    }

    /// f_1 ⊗ f_1: Γ⊗_AΓ → Σ⊗_BΣ.
    pub fn tensor_square_map(&self) -> Result<RingMorphism> {
        let tp = self.target.powers();
        let p2 = tp.power(2)?;
        let a_img = self
            .f0
            .images()
            .iter()
            .map(|e| e.embed_prefix(&p2))
            .collect::<Result<Vec<_>>>()?;
        let s1m = tp.slot(2, 1)?;
        let s2m = tp.slot(2, 2)?;
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for i in self.source.morphism_generators() {
            let img = &self.f1.images()[i];
            s1.push(s1m.apply(img)?);
            s2.push(s2m.apply(img)?);
        }
        self.source.powers().map_from(2, &p2, a_img, vec![s1, s2])
    }

    /// Compatibility with every structure map on generators of degree ≤ bound.
    pub fn check(&self, bound: i64) -> Verdict {
        let run = || -> Result<Verdict> {
            for (label, m) in [("f_0", &self.f0), ("f_1", &self.f1)] {
                if let Verdict::Fail { identity, witness } = m.check(bound) {
                    return Ok(Verdict::fail(format!("{label}: {identity}"), witness));
                }
            }
            let (s, t) = (&self.source, &self.target);
            let (sl, tl) = (s.eta_l(), t.eta_l());
            for i in 0..s.a().ngens() {
                let g = &s.a().generators()[i];
                if g.degree.abs() > bound {
                    continue;
                }
                let a = Element::generator_at(s.a(), i);
                let fa = self.f0.apply(&a)?;
                let pairs = [
                    (format!("f_1 η_L({0}) = η_L f_0({0})", g.name), self.f1.apply(&sl.apply(&a)?)?, tl.apply(&fa)?),
                    (
                        format!("f_1 η_R({0}) = η_R f_0({0})", g.name),
                        self.f1.apply(&s.eta_r().apply(&a)?)?,
                        t.eta_r().apply(&fa)?,
                    ),
                ];
                for (name, l, r) in pairs {
                    if l != r {
                        return Ok(Verdict::fail(name, format!("{l} vs {r}")));
                    }
                }
            }
            let sq = self.tensor_square_map()?;
            for i in s.morphism_generators() {
                let g = &s.gamma().generators()[i];
                if g.degree.abs() > bound {
                    continue;
                }
                let x = Element::generator_at(s.gamma(), i);
                let fx = self.f1.apply(&x)?;
                let pairs = [
                    (
                        format!("ε f_1({0}) = f_0 ε({0})", g.name),
                        t.epsilon().apply(&fx)?,
                        self.f0.apply(&s.epsilon().apply(&x)?)?,
                    ),
                    (
                        format!("c f_1({0}) = f_1 c({0})", g.name),
                        t.conjugation().apply(&fx)?,
                        self.f1.apply(&s.conjugation().apply(&x)?)?,
                    ),
                    (
                        format!("Δ f_1({0}) = (f_1⊗f_1) Δ({0})", g.name),
                        t.delta().apply(&fx)?,
                        sq.apply(&s.delta().apply(&x)?)?,
                    ),
                ];
                for (name, l, r) in pairs {
                    if l != r {
                        return Ok(Verdict::fail(name, format!("{l} vs {r}")));
                    }
                }
            }
            Ok(Verdict::Pass)
        };
        run().unwrap_or_else(|e| Verdict::fail("map evaluable", e.to_string()))
    }
}

/// A relation of Γ_f coming from a generator relation of B.
#[derive(Clone, Debug, Serialize)]
pub struct DerivedRelation {
    pub from: String,
    pub generator: String,
    pub exponent: u32,
}

#[derive(Clone, Debug)]
pub struct InducedAlgebroid {
    pub algebroid: HopfAlgebroid,
    pub map: HopfMap,
    /// B ⊗_A Γ.
    pub pair: Ring,
    pub relations: Vec<DerivedRelation>,
    /// Relations of B whose image lies beyond the truncation.
    pub skipped: Vec<String>,
}

struct ExtraRelation {
    index: usize,
    exponent: u32,
    rhs: Vec<(Coeff, Monomial)>,
}

/// Validates f_0 and lists the relations B adds to A.
fn classify_base_map(f0: &RingMorphism) -> Result<Vec<ExtraRelation>> {
    let (a, b) = (f0.source(), f0.target());
    let unsupported = |m: String| AlgebraError::UnsupportedBaseMap(m);
    let base_ok = match (a.base(), b.base()) {
        (x, y) if x == y => true,
        (BaseRing::PLocal(p), BaseRing::PrimeField(q)) => p == q,
        (BaseRing::Integers, BaseRing::PrimeField(_)) => true,
        _ => false,
    };
    if !base_ok {
        return Err(unsupported(format!("no supported base change {} → {}", a.base(), b.base())));
    }
    if a.ngens() != b.ngens() {
        return Err(unsupported(format!(
            "{} and {} have different generator lists",
            a.name(),
            b.name()
        )));
    }
    let mut extra = Vec::new();
    for i in 0..a.ngens() {
        let (ga, gb) = (&a.generators()[i], &b.generators()[i]);
        if ga.name != gb.name || ga.degree != gb.degree {
            return Err(unsupported(format!("generator {} is not kept by f_0", ga.name)));
        }
        if ga.inverted && !gb.inverted {
            return Err(unsupported(format!("{} is inverted in A but not in B", ga.name)));
        }
        if f0.images()[i] != Element::generator_at(b, i) {
            return Err(unsupported(format!(
                "f_0({}) = {} is not the matching generator",
                ga.name,
                f0.images()[i]
            )));
        }
        match (&a.rules()[i], &b.rules()[i]) {
            (None, None) => {}
            (Some(ra), Some(rb)) => {
                if convert_rule(ra, b.base())? != *rb {
                    return Err(unsupported(format!("B changes the relation of {}", ga.name)));
                }
            }
            (Some(_), None) => {
                return Err(unsupported(format!("B drops the relation of {}", ga.name)));
            }
            (None, Some(rb)) => {
                let (exponent, rhs) = match rb {
                    Rule::Eliminate(r) => (1, r.clone()),
                    Rule::Power { exponent, rhs } => (*exponent, rhs.clone()),
                };
                extra.push(ExtraRelation { index: i, exponent, rhs });
            }
        }
    }
    extra.sort_by_key(|r| (a.generators()[r.index].degree * r.exponent as i64, r.index));
    Ok(extra)
}

fn convert_rule(r: &Rule, base: BaseRing) -> Result<Rule> {
    let conv = |t: &Vec<(Coeff, Monomial)>| -> Result<Vec<(Coeff, Monomial)>> {
        let mut out = Vec::new();
        for (c, m) in t {
            let c = base.convert(c)?;
            if !c.is_zero() {
                out.push((c, m.clone()));
            }
        }
        Ok(out)
    };
    Ok(match r {
        Rule::Eliminate(t) => Rule::Eliminate(conv(t)?),
        Rule::Power { exponent, rhs } => Rule::Power {
            exponent: *exponent,
            rhs: conv(rhs)?,
        },
    })
}

/// Re-reads an element in a presentation with the same generator layout.
fn transfer(e: &Element, target: &Ring) -> Result<Element> {
    Element::from_terms(target, e.raw_terms())
}

pub fn induced_algebroid(h: &HopfAlgebroid, f0: &RingMorphism) -> Result<InducedAlgebroid> {
    induced_algebroid_weighted(h, f0, None)
}

/// Presentations of B⊗_AΓ and B⊗_AΓ⊗_AB, the relations used and those skipped.
fn collapsed(
    h: &HopfAlgebroid,
    f0: &RingMorphism,
    weights: Option<&[i64]>,
) -> Result<(Ring, Ring, Vec<DerivedRelation>, Vec<String>)> {
    let extra = classify_base_map(f0)?;
    let (a, b, gamma) = (h.a(), f0.target(), h.gamma());
    let na = a.ngens();
    let mut pb = PresentationBuilder::extending(b, format!("{}⊗{}", b.name(), gamma.name()));
    for (t, i) in h.morphism_generators().enumerate() {
        let g = &gamma.generators()[i];
        let w = weights.and_then(|w| w.get(t).copied()).unwrap_or(g.weight);
        pb.weighted_generator(g.name.clone(), g.degree, w);
    }
    for i in h.morphism_generators() {
        if let Some(rule) = &gamma.rules()[i] {
            let (exponent, rhs) = match rule {
                Rule::Eliminate(r) => (1, r.clone()),
                Rule::Power { exponent, rhs } => (*exponent, rhs.clone()),
            };
            pb.relation(&gamma.generators()[i].name, exponent, rhs);
        }
    }
    let pair = pb
        .build()
        .map_err(|e| AlgebraError::UnsupportedBaseMap(format!("B⊗_AΓ: {e}")))?;
    let mut tb = pb.clone();
    let tname = format!("{}⊗{}⊗{}", b.name(), gamma.name(), b.name());
    let renamed = |bld: &PresentationBuilder| -> Result<Ring> { Ok(bld.build()?.renamed(tname.clone())) };
    let mut cur = renamed(&tb)?;
    let mut derived = Vec::new();
    let mut skipped = Vec::new();
    for rel in extra {
        let gname = &a.generators()[rel.index].name;
        let mut raw = vec![(a.base().one(), Monomial::generator(na, rel.index, rel.exponent as i32))];
        for (c, m) in &rel.rhs {
            raw.push((c.lift().neg(), m.clone()));
        }
        let in_a = Element::from_terms(a, raw)?;
        if in_a.truncated() {
            skipped.push(gname.clone());
            continue;
        }
        let image = h.eta_r().apply(&in_a)?;
        if image.truncated() {
            return Err(AlgebraError::FiltrationViolation(format!(
                "η_R of the relation for {gname} leaves the truncation"
            )));
        }
        let r = transfer(&image, &cur)?;
        if r.is_zero() {
            continue;
        }
        let (lm, lc) = r.leading_term().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        if cur.weight_of(&lm) > cur.truncation() {
            skipped.push(gname.clone());
            continue;
        }
        let mut var = None;
        for (j, &e) in lm.0.iter().enumerate() {
            if e != 0 && !cur.generators()[j].inverted {
                if var.is_some() {
                    return Err(AlgebraError::UnsupportedBaseMap(format!(
                        "η_R relation for {gname} has leading monomial {} in several variables",
                        cur.formatted_monomial(&lm)
                    )));
                }
                var = Some((j, e));
            }
        }
        let Some((j, e)) = var else {
            return Err(AlgebraError::UnsupportedBaseMap(format!(
                "η_R relation for {gname} forces a unit to vanish"
            )));
        };
        let inv_c = lc.inverse().ok_or_else(|| {
            AlgebraError::UnsupportedBaseMap(format!("leading coefficient {lc} is not invertible"))
        })?;
        let mut unit = Monomial::one(cur.ngens());
        for (k, &x) in lm.0.iter().enumerate() {
            if cur.generators()[k].inverted {
                unit.0[k] = -x;
            }
        }
        let lead = Element::from_terms(&cur, vec![(lc.clone(), lm.clone())])?;
        let factor = Element::from_terms(&cur, vec![(inv_c, unit)])?;
        let rhs = r.sub(&lead)?.mul(&factor)?.neg();
        let target_name = cur.generators()[j].name.clone();
        tb.relation(&target_name, e as u32, rhs.raw_terms());
        cur = renamed(&tb).map_err(|err| {
            AlgebraError::UnsupportedBaseMap(format!("relation from {gname} on {target_name}: {err}"))
        })?;
        derived.push(DerivedRelation {
            from: gname.clone(),
            generator: target_name,
            exponent: e as u32,
        });
    }
    Ok((pair, cur, derived, skipped))
}

/// Γ_f with optional weights for the morphism generators.
pub fn induced_algebroid_weighted(
    h: &HopfAlgebroid,
    f0: &RingMorphism,
    weights: Option<&[i64]>,
) -> Result<InducedAlgebroid> {
    if !same_ring(f0.source(), h.a()) {
        return Err(AlgebraError::PresentationMismatch("f_0 must start at A".into()));
    }
    let (pair, gf, relations, skipped) = collapsed(h, f0, weights)?;
    let b = f0.target();
    let nb = b.ngens();
    let eta_imgs = h
        .eta_r()
        .images()
        .iter()
        .map(|e| transfer(e, &gf))
        .collect::<Result<Vec<_>>>()?;
    let eta_r = RingMorphism::new(b, &gf, eta_imgs).map_err(|e| match e {
        AlgebraError::NotInvertible(m) => AlgebraError::UnsupportedBaseMap(m),
        other => other,
    })?;
    let powers = Arc::new(TensorPowers::new(b, &gf, &eta_r)?);
    let p2 = powers.power(2)?;
    let mut eps: Vec<Element> = (0..nb).map(|i| Element::generator_at(b, i)).collect();
    let mut conj: Vec<Element> = eta_r.images().to_vec();
    let mut delta: Vec<Element> = (0..nb).map(|i| Element::generator_at(&p2, i)).collect();
    for i in h.morphism_generators() {
        eps.push(f0.apply(&h.epsilon().images()[i])?);
        conj.push(transfer(&h.conjugation().images()[i], &gf)?);
        delta.push(transfer(&h.delta().images()[i], &p2)?);
    }
    let name = format!("{}_f", h.name());
    let algebroid = HopfAlgebroid::new(name, powers, eps, conj, delta)?;
    let f1_imgs = (0..h.gamma().ngens())
        .map(|i| Element::generator_at(&gf, i))
        .collect();
    let f1 = RingMorphism::new(h.gamma(), &gf, f1_imgs)?;
    let map = HopfMap::new(h, &algebroid, f0.clone(), f1)?;
    Ok(InducedAlgebroid {
        algebroid,
        map,
        pair,
        relations,
        skipped,
    })
}

/// η_L⊗f_1⊗η_R on the presented triple B⊗_AΓ⊗_AB.
#[derive(Clone, Debug)]
pub struct CombinedMap {
    pub triple: Ring,
    pub map: RingMorphism,
}

impl CombinedMap {
    /// True when every generator maps to the generator in the same position.
    pub fn is_identity(&self) -> bool {
        same_ring(self.map.source(), self.map.target())
            && self
                .map
                .images()
                .iter()
                .enumerate()
                .all(|(i, e)| *e == Element::generator_at(self.map.target(), i))
    }
}

pub fn combined_map(f: &HopfMap) -> Result<CombinedMap> {
    let sigma = f.target.gamma();
    let nb = f.target.a().ngens();
    let weights: Option<Vec<i64>> = (sigma.ngens() == nb + f.source.powers().n_morphism())
        .then(|| sigma.generators()[nb..].iter().map(|g| g.weight).collect());
    let (_, triple, _, _) = collapsed(&f.source, &f.f0, weights.as_deref())?;
    if !same_ring(f.f0.target(), f.target.a()) {
        return Err(AlgebraError::PresentationMismatch("f_0 must land in B".into()));
    }
    let mut images: Vec<Element> = (0..nb).map(|i| Element::generator_at(sigma, i)).collect();
    for i in f.source.morphism_generators() {
        images.push(f.f1.images()[i].clone());
    }
    let map = RingMorphism::new(&triple, sigma, images)?;
    Ok(CombinedMap { triple, map })
}

/// Morphism check for the combined map, including the right copy of B.
pub fn check_combined(f: &HopfMap, c: &CombinedMap, bound: i64) -> Verdict {
    let v = c.map.check(bound);
    if !v.passed() {
        return v;
    }
    let run = || -> Result<Verdict> {
        for i in 0..f.target.a().ngens() {
            let a = Element::generator_at(f.source.a(), i);
            let lhs = c.map.apply(&transfer(&f.source.eta_r().apply(&a)?, &c.triple)?)?;
            let b = Element::generator_at(f.target.a(), i);
            let rhs = f.target.eta_r().apply(&b)?;
            if lhs != rhs {
                return Ok(Verdict::fail(
                    format!("right unit of {}", f.target.a().generators()[i].name),
                    format!("{lhs} vs {rhs}"),
                ));
            }
        }
        Ok(Verdict::Pass)
    };
    run().unwrap_or_else(|e| Verdict::fail("combined map evaluable", e.to_string()))
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeRank {
    pub degree: i64,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoReport {
    pub verdict: Verdict,
    pub degrees: Vec<DegreeRank>,
}

/// Rank of `m` on the weight-≤bound part of each degree |t| ≤ bound.
pub fn check_iso(m: &RingMorphism, bound: i64) -> Result<IsoReport> {
    let (src, tgt) = (m.source(), m.target());
    let mut degrees = Vec::new();
    let mut verdict = Verdict::Pass;
    for t in -bound..=bound {
        let sb = src.degree_basis_within(t, bound)?;
        let tb = tgt.degree_basis_within(t, bound)?;
        if sb.is_empty() && tb.is_empty() {
            continue;
        }
        let index: HashMap<&Monomial, usize> = tb.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut rows: Vec<BTreeMap<usize, Coeff>> = Vec::new();
        let mut outside = None;
        for mono in &sb {
            let e = Element::from_terms(src, vec![(src.base().one(), mono.clone())])?;
            let img = m.apply(&e)?;
            let mut row = BTreeMap::new();
            for (tm, c) in img.terms() {
                match index.get(tm) {
                    Some(&i) => {
                        row.insert(i, c.clone());
                    }
                    None => outside = Some(tgt.formatted_monomial(tm)),
                }
            }
            rows.push(row);
        }
        let rank = rank_of(tgt.base(), rows);
        degrees.push(DegreeRank {
            degree: t,
            source_dim: sb.len(),
            target_dim: tb.len(),
            rank,
        });
        if !verdict.passed() {
            continue;
        }
        if let Some(o) = outside {
            verdict = Verdict::fail(format!("iso in degree {t}"), format!("image leaves the weight bound: {o}"));
        } else if sb.len() != tb.len() || rank != tb.len() {
            verdict = Verdict::fail(
                format!("iso in degree {t}"),
                format!("source dim {}, target dim {}, rank {rank}", sb.len(), tb.len()),
            );
        }
    }
    Ok(IsoReport { verdict, degrees })
}

fn rank_of(base: BaseRing, rows: Vec<BTreeMap<usize, Coeff>>) -> usize {
    match base {
        BaseRing::PrimeField(p) => {
            let mut e = FpEchelon::new(p);
            for r in rows {
                let v = r
                    .into_iter()
                    .filter_map(|(i, c)| match c {
                        Coeff::Fp(x, _) if x != 0 => Some((i as u32, x as u32)),
                        _ => None,
                    })
                    .collect();
                e.insert(v);
            }
            e.rank()
        }
        _ => {
            let mut e = CoeffEchelon::new();
            for r in rows {
                e.insert(r);
            }
            e.rank()
        }
    }
}

/// A ring map g: B⊗_AΓ → C and a claimed basis of C over A.
#[derive(Clone, Debug)]
pub struct FlatWitness {
    pub g: RingMorphism,
    pub basis: Vec<Monomial>,
}

impl FlatWitness {
    pub fn c(&self) -> &Ring {
        self.g.target()
    }
}

/// Leading monomials of φ = g(f_0⊗η_R) on the generators of A.
fn leading_images(f: &HopfMap, w: &FlatWitness, pair: &Ring) -> Result<Vec<Option<(Monomial, Coeff)>>> {
    let a = f.source.a();
    let c = w.c();
    let mut out = Vec::with_capacity(a.ngens());
    for i in 0..a.ngens() {
        if a.is_eliminated(i) {
            out.push(None);
            continue;
        }
        let x = Element::generator_at(a, i);
        let phi = w.g.apply(&transfer(&f.source.eta_r().apply(&x)?, pair)?)?;
        let lt = phi.leading_term().map(|(m, k)| (m.clone(), k.clone()));
        if lt.is_none() {
            return Err(AlgebraError::InvalidPresentation(format!(
                "φ({}) vanishes in {}",
                a.generators()[i].name,
                c.name()
            )));
        }
        out.push(lt);
    }
    Ok(out)
}

/// The standard witness: C = B⊗_AΓ, g = id, basis = monomials of weight ≤ D
/// in the non-inverted generators that no leading monomial divides.
pub fn default_flat_witness(f: &HopfMap) -> Result<FlatWitness> {
    let pair = collapsed(&f.source, &f.f0, None)?.0;
    let g = RingMorphism::identity(&pair);
    let mut w = FlatWitness { g, basis: Vec::new() };
    let lms = leading_images(f, &w, &pair)?;
    let a = f.source.a();
    let divisors: Vec<Vec<i32>> = (0..a.ngens())
        .filter(|&i| !a.generators()[i].inverted)
        .filter_map(|i| lms[i].as_ref().map(|(m, _)| non_inverted(&pair, m)))
        .collect();
    let d = pair.truncation();
    let free: Vec<usize> = pair
        .free_generators()
        .filter(|&i| !pair.generators()[i].inverted)
        .collect();
    let mut cur = vec![0i32; pair.ngens()];
    fn rec(
        pair: &Ring,
        free: &[usize],
        k: usize,
        left: i64,
        cur: &mut Vec<i32>,
        divisors: &[Vec<i32>],
        out: &mut Vec<Monomial>,
    ) {
        if divisors.iter().any(|dv| dv.iter().zip(cur.iter()).all(|(x, y)| x <= y)) {
            return;
        }
        if k == free.len() {
            out.push(Monomial(cur.clone()));
            return;
        }
        let g = &pair.generators()[free[k]];
        let cap = match &pair.rules()[free[k]] {
            Some(Rule::Power { exponent, .. }) => Some(*exponent as i32 - 1),
            _ => None,
        };
        let mut e = 0;
        loop {
            let w = g.weight * e as i64;
            if w > left || cap.is_some_and(|c| e > c) || (g.weight == 0 && e > 0 && cap.is_none()) {
                break;
            }
            cur[free[k]] = e;
            rec(pair, free, k + 1, left - w, cur, divisors, out);
            e += 1;
        }
        cur[free[k]] = 0;
    }
    rec(&pair, &free, 0, d, &mut cur, &divisors, &mut w.basis);
    w.basis.sort();
    Ok(w)
}

fn non_inverted(r: &Ring, m: &Monomial) -> Vec<i32> {
    m.0.iter()
        .enumerate()
        .map(|(i, &e)| if r.generators()[i].inverted { 0 } else { e })
        .collect()
}

/// Checks that C is free over A on `basis` in every degree |t| ≤ bound, up to
/// weight bound, by a leading-monomial count.
pub fn check_flat_witness(f: &HopfMap, w: &FlatWitness, bound: i64) -> Verdict {
    let run = || -> Result<Verdict> {
        let pair = collapsed(&f.source, &f.f0, None)?.0;
        if !same_ring(w.g.source(), &pair) {
            return Ok(Verdict::fail("g: B⊗_AΓ → C", "g does not start at B⊗_AΓ"));
        }
        let gv = w.g.check(bound);
        if !gv.passed() {
            return Ok(gv);
        }
        if w.basis.is_empty() {
            return Ok(Verdict::fail("basis nonempty", "empty basis"));
        }
        let c = w.c();
        if c.rules().iter().any(|r| matches!(r, Some(Rule::Power { .. }))) {
            return Ok(Verdict::fail(
                "C polynomial over its units",
                format!("{} has power relations", c.name()),
            ));
        }
        let a = f.source.a();
        if a.rules().iter().any(|r| matches!(r, Some(Rule::Power { .. }))) {
            return Ok(Verdict::fail("A polynomial over its units", format!("{} has power relations", a.name())));
        }
        let lms = leading_images(f, w, &pair)?;
        let mut polys: Vec<Vec<i32>> = Vec::new();
        let mut units: Vec<(usize, i32)> = Vec::new();
        for (i, lt) in lms.iter().enumerate() {
            let Some((m, k)) = lt else { continue };
            if !k.is_unit_in(c.base()) {
                return Ok(Verdict::fail(
                    "unit leading coefficients",
                    format!("φ({}) has leading coefficient {k}", a.generators()[i].name),
                ));
            }
            if a.generators()[i].inverted {
                let support: Vec<(usize, i32)> =
                    m.0.iter().enumerate().filter(|(_, &e)| e != 0).map(|(j, &e)| (j, e)).collect();
                match support.as_slice() {
                    [(j, e)] if e.abs() == 1 && c.generators()[*j].inverted && !units.iter().any(|u| u.0 == *j) => {
                        units.push((*j, *e));
                    }
                    _ => {
                        return Ok(Verdict::fail(
                            "inverted generators hit distinct units",
                            format!("φ({}) leads with {}", a.generators()[i].name, c.formatted_monomial(m)),
                        ))
                    }
                }
            } else {
                let ni = non_inverted(c, m);
                if ni.iter().all(|&e| e == 0) {
                    return Ok(Verdict::fail(
                        "leading monomials nonconstant",
                        format!("φ({}) leads with a unit", a.generators()[i].name),
                    ));
                }
                polys.push(m.0.clone());
            }
        }
        // Basis elements indexed by their non-inverted part.
        let mut by_shape: HashMap<Vec<i32>, Vec<&Monomial>> = HashMap::new();
        for b in &w.basis {
            by_shape.entry(non_inverted(c, b)).or_default().push(b);
        }
        for t in -bound..=bound {
            for mu in c.degree_basis_within(t, bound)? {
                let n = count_decompositions(c, &mu, &polys, &units, &by_shape);
                if n != 1 {
                    return Ok(Verdict::fail(
                        format!("free over A in degree {t}"),
                        format!(
                            "{} has {n} decompositions",
                            c.formatted_monomial(&mu)
                        ),
                    ));
                }
            }
        }
        Ok(Verdict::Pass)
    };
    run().unwrap_or_else(|e| Verdict::fail("witness evaluable", e.to_string()))
}

fn count_decompositions(
    c: &Ring,
    mu: &Monomial,
    polys: &[Vec<i32>],
    units: &[(usize, i32)],
    by_shape: &HashMap<Vec<i32>, Vec<&Monomial>>,
) -> usize {
    fn rec(
        c: &Ring,
        rest: &mut Vec<i32>,
        k: usize,
        polys: &[Vec<i32>],
        units: &[(usize, i32)],
        by_shape: &HashMap<Vec<i32>, Vec<&Monomial>>,
    ) -> usize {
        if k == polys.len() {
            let shape = non_inverted(c, &Monomial(rest.clone()));
            let Some(bs) = by_shape.get(&shape) else { return 0 };
            return bs
                .iter()
                .filter(|b| {
                    (0..rest.len()).all(|j| {
                        !c.generators()[j].inverted || units.iter().any(|u| u.0 == j) || rest[j] == b.0[j]
                    })
                })
                .count();
        }
        let mut total = rec(c, rest, k + 1, polys, units, by_shape);
        let mut times = 0;
        loop {
            let fits = (0..rest.len()).all(|j| c.generators()[j].inverted || rest[j] >= polys[k][j]);
            if !fits {
                break;
            }
            for j in 0..rest.len() {
                rest[j] -= polys[k][j];
            }
            times += 1;
            total += rec(c, rest, k + 1, polys, units, by_shape);
        }
        for j in 0..rest.len() {
            rest[j] += polys[k][j] * times;
        }
        total
    }
    let mut rest = mu.0.clone();
    rec(c, &mut rest, 0, polys, units, by_shape)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum WitnessStatus {
    Verified { basis_size: usize },
    Failed { reason: String },
    Assumed,
    Absent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    Yes,
    Conditional,
    No,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceCertificate {
    pub bound: i64,
    pub combined_is_identity: bool,
    pub iso: Verdict,
    pub witness: WitnessStatus,
    pub corroboration: Option<Corroboration>,
    pub verdict: Equivalence,
}

pub enum WitnessChoice<'a> {
    Supplied(&'a FlatWitness),
    Assumed,
    Absent,
}

/// Aggregates the combined-map iso check, the flatness witness and any
/// finite-ring corroboration into a certificate.
pub fn equivalence_verdict(
    f: &HopfMap,
    witness: WitnessChoice<'_>,
    bound: i64,
    corroboration: Option<Corroboration>,
) -> EquivalenceCertificate {
    let (iso, ident) = match combined_map(f) {
        Ok(c) => {
            let v = check_combined(f, &c, bound);
            let v = if v.passed() {
                match check_iso(&c.map, bound) {
                    Ok(r) => r.verdict,
                    Err(e) => Verdict::fail("iso computable", e.to_string()),
                }
            } else {
                v
            };
            (v, c.is_identity())
        }
        Err(e) => (Verdict::fail("combined map", e.to_string()), false),
    };
    let witness = match witness {
        WitnessChoice::Supplied(w) => match check_flat_witness(f, w, bound) {
            Verdict::Pass => WitnessStatus::Verified {
                basis_size: w.basis.len(),
            },
            Verdict::Fail { identity, witness } => WitnessStatus::Failed {
                reason: format!("{identity}: {witness}"),
            },
        },
        WitnessChoice::Assumed => WitnessStatus::Assumed,
        WitnessChoice::Absent => WitnessStatus::Absent,
    };
    let refuted = !iso.passed() || corroboration.as_ref().is_some_and(|c| c.counterexample.is_some());
    let verdict = if refuted {
        Equivalence::No
    } else {
        match witness {
            WitnessStatus::Verified { .. } => Equivalence::Yes,
            WitnessStatus::Assumed => Equivalence::Conditional,
            _ => Equivalence::Undetermined,
        }
    };
    EquivalenceCertificate {
        bound,
        combined_is_identity: ident,
        iso,
        witness,
        corroboration,
        verdict,
    }
}

/// Base change B ⊗_A M along a map certified as an equivalence.
#[derive(Clone, Debug)]
pub struct TransportedComodule {
    pub comodule: Comodule,
    pub certificate: EquivalenceCertificate,
}

pub fn equivalence_functor(
    f: &HopfMap,
    m: &Comodule,
    certificate: &EquivalenceCertificate,
) -> Result<TransportedComodule> {
    match certificate.verdict {
        Equivalence::Yes | Equivalence::Conditional => Ok(TransportedComodule {
            comodule: base_change(f, m)?,
            certificate: certificate.clone(),
        }),
        v => Err(AlgebraError::NotAnEquivalence(format!(
            "certificate verdict is {}",
            serde_json::to_value(v).ok().and_then(|s| s.as_str().map(String::from)).unwrap_or_default()
        ))),
    }
}

/// Axiom suite on the induced algebroid plus the canonical map checks.
pub fn check_induced(ind: &InducedAlgebroid, bound: i64) -> Verdict {
    check_hopf_axioms(&ind.algebroid, bound).and(|| ind.map.check(bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgl::{bp_data, quotient_localize};

    #[test]
    fn identity_base_map_reproduces_the_algebroid() {
        let b = bp_data(2, 12).unwrap();
        let h = quotient_localize(&b, 1).unwrap();
        let id = RingMorphism::identity(h.a());
        let ind = induced_algebroid(&h, &id).unwrap();
        assert_eq!(ind.algebroid.gamma().fingerprint(), h.gamma().fingerprint());
        assert!(ind.relations.is_empty());
        assert!(check_induced(&ind, 12).passed());
        let c = combined_map(&ind.map).unwrap();
        assert!(c.is_identity());
    }

    #[test]
    fn iso_detects_missing_negative_degrees() {
        let mut pb = PresentationBuilder::new("P", BaseRing::PrimeField(3), 16);
        pb.generator("v1", 4);
        let poly = pb.build().unwrap();
        let mut lb = PresentationBuilder::new("L", BaseRing::PrimeField(3), 16);
        lb.generator("v1", 4);
        lb.invert("v1").unwrap();
        let laurent = lb.build().unwrap();
        let inc = RingMorphism::from_named(&poly, &laurent, &[]).unwrap();
        let r = check_iso(&inc, 8).unwrap();
        match r.verdict {
            Verdict::Fail { identity, .. } => assert_eq!(identity, "iso in degree -8"),
            Verdict::Pass => panic!("inclusion is not an iso"),
        }
        assert!(check_iso(&RingMorphism::identity(&laurent), 8).unwrap().verdict.passed());
    }

    #[test]
    fn functor_needs_a_positive_certificate() {
        use crate::comodule::{catalog, check_comodule};
        use crate::fgl::johnson_wilson;
        let b = bp_data(3, 8).unwrap();
        let (_, f) = johnson_wilson(&b, 1, 1).unwrap();
        let cert = equivalence_verdict(&f, WitnessChoice::Assumed, 8, None);
        assert_eq!(cert.verdict, Equivalence::Conditional);
        let ext = catalog().unwrap().into_iter().find(|m| m.name == "extension").unwrap();
        let out = equivalence_functor(&f, &ext, &cert).unwrap();
        assert!(check_comodule(&out.comodule, 8).passed());
        assert_eq!(out.certificate.verdict, Equivalence::Conditional);

        let mut images = f.f1.images().to_vec();
        images[f.source.gamma().index_of("t1").unwrap()] = Element::zero(f.target.gamma());
        let mut broken = f.clone();
        broken.f1 = RingMorphism::new(f.source.gamma(), f.target.gamma(), images).unwrap();
        let no = equivalence_verdict(&broken, WitnessChoice::Assumed, 8, None);
        assert_eq!(no.verdict, Equivalence::No);
        assert!(matches!(
            equivalence_functor(&broken, &ext, &no),
            Err(AlgebraError::NotAnEquivalence(_))
        ));
    }
}
