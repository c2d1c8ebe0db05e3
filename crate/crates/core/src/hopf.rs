//! Hopf algebroids, iterated tensor powers and point-level composition.
//!
//! Layout convention: Γ lists the generators of A first, with the same
//! rules, followed by the morphism generators. η_L is that inclusion, which
//! makes Γ free over A on monomials in the morphism generators.
//!
//! The k-fold tensor power Γ^{⊗k} over A is presented with A's generators and
//! k tagged copies `t|i` of the morphism generators. A coefficient sitting in
//! slot i is moved to the far left through the right unit of slot i−1.

use std::ops::Range;
use std::sync::{Arc, RwLock};

use crate::error::{AlgebraError, Result};
use crate::ring::{same_ring, Element, PresentationBuilder, Ring, RingMorphism, Rule, Verdict};

#[derive(Clone)]
struct Level {
    ring: Ring,
    /// A → P_k, the unit on the right of the last slot.
    right_unit: RingMorphism,
}

/// Lazily grown tower of tensor powers P_0 = A, P_1 = Γ, P_2, ...
pub struct TensorPowers {
    a: Ring,
    gamma: Ring,
    eta_r: RingMorphism,
    levels: RwLock<Vec<Level>>,
}

impl std::fmt::Debug for TensorPowers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TensorPowers[{}]", self.gamma.name())
    }
}

fn slot_name(name: &str, slot: usize) -> String {
    format!("{name}|{slot}")
}

impl TensorPowers {
    pub fn new(a: &Ring, gamma: &Ring, eta_r: &RingMorphism) -> Result<TensorPowers> {
        check_extends(a, gamma)?;
        if !same_ring(eta_r.source(), a) || !same_ring(eta_r.target(), gamma) {
            return Err(AlgebraError::PresentationMismatch(
                "right unit must map A to Γ".into(),
            ));
        }
        let levels = vec![
            Level {
                ring: a.clone(),
                right_unit: RingMorphism::identity(a),
            },
            Level {
                ring: gamma.clone(),
                right_unit: eta_r.clone(),
            },
        ];
        Ok(TensorPowers {
            a: a.clone(),
            gamma: gamma.clone(),
            eta_r: eta_r.clone(),
            levels: RwLock::new(levels),
        })
    }

    pub fn a(&self) -> &Ring {
        &self.a
    }

    pub fn gamma(&self) -> &Ring {
        &self.gamma
    }

    pub fn n_a(&self) -> usize {
        self.a.ngens()
    }

    pub fn n_morphism(&self) -> usize {
        self.gamma.ngens() - self.a.ngens()
    }

    fn level(&self, k: usize) -> Result<Level> {
        {
            let levels = self.levels.read().unwrap();
            if k < levels.len() {
                return Ok(levels[k].clone());
            }
        }
        let mut levels = self.levels.write().unwrap();
        while levels.len() <= k {
            let j = levels.len();
            let next = self.build_level(&levels[j - 1], j)?;
            levels.push(next);
        }
        Ok(levels[k].clone())
    }

    /// Presentation of Γ^{⊗k}.
    pub fn power(&self, k: usize) -> Result<Ring> {
        Ok(self.level(k)?.ring)
    }

    /// A → Γ^{⊗k}, the unit to the right of slot k (identity for k = 0).
    pub fn right_unit(&self, k: usize) -> Result<RingMorphism> {
        Ok(self.level(k)?.right_unit)
    }

    /// Index of generator `t` (a morphism-generator offset) in slot `i` of P_k.
    pub fn slot_index(&self, slot: usize, t: usize) -> usize {
        self.n_a() + (slot - 1) * self.n_morphism() + t
    }

    fn build_level(&self, prev: &Level, j: usize) -> Result<Level> {
        let na = self.n_a();
        let nm = self.n_morphism();
        let rename_first = j == 2;
        // Free extension first, used to evaluate relation right-hand sides.
        let mut free = PresentationBuilder::extending(&prev.ring, format!("{}^{j}", self.gamma.name()));
        if rename_first {
            free = rename_slot_one(na, &free);
        }
        for t in 0..nm {
            let g = &self.gamma.generators()[na + t];
            free.weighted_generator(slot_name(&g.name, j), g.degree, g.weight);
        }
        let free_ring = free.build()?;
        let total = free_ring.ngens();
        let a_images: Vec<Element> = prev
            .right_unit
            .images()
            .iter()
            .map(|e| e.embed_prefix(&free_ring))
            .collect::<Result<_>>()?;
        let a_inverses: Vec<Option<Element>> = (0..na)
            .map(|i| {
                if self.a.generators()[i].inverted {
                    a_images[i].inverse().ok()
                } else {
                    None
                }
            })
            .collect();
        let mut builder = free.clone();
        for t in 0..nm {
            let gi = na + t;
            let Some(rule) = &self.gamma.rules()[gi] else { continue };
            let (exponent, rhs) = match rule {
                Rule::Eliminate(r) => (1u32, r),
                Rule::Power { exponent, rhs } => (*exponent, rhs),
            };
            let mut acc = Element::zero(&free_ring);
            for (c, m) in rhs {
                let mut raw = vec![0i32; total];
                let mut prod = Element::constant(&free_ring, free_ring.base().convert(c)?);
                for (i, &e) in m.0.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    if i < na {
                        let f = if e > 0 {
                            a_images[i].pow(e as u32)?
                        } else {
                            a_inverses[i]
                                .as_ref()
                                .ok_or_else(|| {
                                    AlgebraError::NotInvertible(format!(
                                        "right unit of {}",
                                        self.a.generators()[i].name
                                    ))
                                })?
                                .pow((-e) as u32)?
                        };
                        prod = prod.mul(&f)?;
                    } else {
                        raw[self.slot_index(j, i - na)] = e;
                    }
                }
                let mono = Element::from_terms(
                    &free_ring,
                    vec![(free_ring.base().one(), crate::ring::Monomial(raw))],
                )?;
                acc.add_assign(&prod.mul(&mono)?)?;
            }
            builder.relation(
                &slot_name(&self.gamma.generators()[gi].name, j),
                exponent,
                acc.raw_terms(),
            );
        }
        let ring = builder.build()?;
        // Right unit of slot j: a ↦ slot_j(η_R(a)).
        let slot = slot_morphism_into(&self.gamma, &ring, na, nm, j, &prev.right_unit)?;
        let right_unit = slot.compose(&self.eta_r)?;
        Ok(Level { ring, right_unit })
    }

    /// Γ → P_k onto slot `i` (1-based).
    pub fn slot(&self, k: usize, i: usize) -> Result<RingMorphism> {
        let target = self.power(k)?;
        let prev_unit = self.right_unit(i - 1)?;
        slot_morphism_into(&self.gamma, &target, self.n_a(), self.n_morphism(), i, &prev_unit)
    }

    /// Ring map out of P_k given the images of A's generators and of every
    /// slot's morphism generators.
    pub fn map_from(
        &self,
        k: usize,
        target: &Ring,
        a_images: Vec<Element>,
        slot_images: Vec<Vec<Element>>,
    ) -> Result<RingMorphism> {
        let source = self.power(k)?;
        let mut images = a_images;
        for s in slot_images {
            images.extend(s);
        }
        RingMorphism::new(&source, target, images)
    }

    /// The prefix inclusion P_j → P_k for j ≤ k.
    pub fn inclusion(&self, j: usize, k: usize) -> Result<RingMorphism> {
        let src = self.power(j)?;
        let tgt = self.power(k)?;
        let images = (0..src.ngens()).map(|i| Element::generator_at(&tgt, i)).collect();
        RingMorphism::new(&src, &tgt, images)
    }

    /// P_j → P_{j+1} inserting an empty slot in front: a ↦ η_R(a) in slot 1,
    /// slot i ↦ slot i+1.
    pub fn shift(&self, j: usize) -> Result<RingMorphism> {
        let src = self.power(j)?;
        let tgt = self.power(j + 1)?;
        let ru = self.right_unit(1)?;
        let mut images = Vec::with_capacity(src.ngens());
        for e in ru.images() {
            images.push(e.embed_prefix(&tgt)?);
        }
        for slot in 1..=j {
            for t in 0..self.n_morphism() {
                images.push(Element::generator_at(&tgt, self.slot_index(slot + 1, t)));
            }
        }
        RingMorphism::new(&src, &tgt, images)
    }

    pub fn eta_r(&self) -> &RingMorphism {
        &self.eta_r
    }
}

/// Slot-1 generators are renamed `t|1` once a second slot exists.
fn rename_slot_one(na: usize, b: &PresentationBuilder) -> PresentationBuilder {
    let mut out = b.clone();
    for i in na..b.generator_count() {
        let name = slot_name(&b.generators()[i].name, 1);
        out.rename(i, name);
    }
    out
}

fn slot_morphism_into(
    gamma: &Ring,
    target: &Ring,
    na: usize,
    nm: usize,
    slot: usize,
    prev_unit: &RingMorphism,
) -> Result<RingMorphism> {
    let mut images = Vec::with_capacity(na + nm);
    for e in prev_unit.images() {
        images.push(e.embed_prefix(target)?);
    }
    for t in 0..nm {
        images.push(Element::generator_at(target, na + (slot - 1) * nm + t));
    }
    RingMorphism::new(gamma, target, images)
}

fn check_extends(a: &Ring, gamma: &Ring) -> Result<()> {
    let na = a.ngens();
    if gamma.ngens() < na || gamma.base() != a.base() {
        return Err(AlgebraError::NotFreeOverA(format!(
            "{} does not extend {}",
            gamma.name(),
            a.name()
        )));
    }
    for i in 0..na {
        if gamma.generators()[i] != a.generators()[i] || gamma.rules()[i] != a.rules()[i] {
            return Err(AlgebraError::NotFreeOverA(format!(
                "generator {} of {} differs from A",
                gamma.generators()[i].name,
                gamma.name()
            )));
        }
    }
    for i in na..gamma.ngens() {
        let g = &gamma.generators()[i];
        if g.inverted {
            return Err(AlgebraError::NotFreeOverA(format!(
                "morphism generator {} is inverted",
                g.name
            )));
        }
    }
    Ok(())
}

/// The bimodule tensor square with both canonical inclusions.
pub struct TensorSquare {
    pub ring: Ring,
    pub left: RingMorphism,
    pub right: RingMorphism,
}

#[derive(Clone)]
pub struct HopfAlgebroid {
    name: String,
    powers: Arc<TensorPowers>,
    epsilon: RingMorphism,
    conj: RingMorphism,
    delta: RingMorphism,
}

impl std::fmt::Debug for HopfAlgebroid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HopfAlgebroid[{}]", self.name)
    }
}

impl HopfAlgebroid {
    /// `delta` images live in `powers.power(2)`.
    pub fn new(
        name: impl Into<String>,
        powers: Arc<TensorPowers>,
        epsilon: Vec<Element>,
        conj: Vec<Element>,
        delta: Vec<Element>,
    ) -> Result<HopfAlgebroid> {
        let gamma = powers.gamma().clone();
        let a = powers.a().clone();
        let p2 = powers.power(2)?;
        let epsilon = RingMorphism::new(&gamma, &a, epsilon)?;
        let conj = RingMorphism::new(&gamma, &gamma, conj)?;
        let delta = RingMorphism::new(&gamma, &p2, delta)?;
        Ok(HopfAlgebroid {
            name: name.into(),
            powers,
            epsilon,
            conj,
            delta,
        })
    }

    /// Γ = A with every structure map the identity.
    pub fn unit(a: &Ring) -> Result<HopfAlgebroid> {
        let id = RingMorphism::identity(a);
        let powers = Arc::new(TensorPowers::new(a, a, &id)?);
        let gens: Vec<Element> = (0..a.ngens()).map(|i| Element::generator_at(a, i)).collect();
        let p2 = powers.power(2)?;
        let delta = gens.iter().map(|g| g.embed_prefix(&p2)).collect::<Result<_>>()?;
        HopfAlgebroid::new(format!("unit({})", a.name()), powers, gens.clone(), gens, delta)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> HopfAlgebroid {
        self.name = name.into();
        self
    }

    pub fn a(&self) -> &Ring {
        self.powers.a()
    }

    pub fn gamma(&self) -> &Ring {
        self.powers.gamma()
    }

    pub fn powers(&self) -> &Arc<TensorPowers> {
        &self.powers
    }

    pub fn eta_l(&self) -> RingMorphism {
        let a = self.a();
        let g = self.gamma();
        let images = (0..a.ngens()).map(|i| Element::generator_at(g, i)).collect();
        RingMorphism::new(a, g, images).expect("prefix inclusion")
    }

    pub fn eta_r(&self) -> &RingMorphism {
        self.powers.eta_r()
    }

    pub fn epsilon(&self) -> &RingMorphism {
        &self.epsilon
    }

    pub fn conjugation(&self) -> &RingMorphism {
        &self.conj
    }

    pub fn delta(&self) -> &RingMorphism {
        &self.delta
    }

    /// Indices of the morphism generators inside Γ.
    pub fn morphism_generators(&self) -> Range<usize> {
        self.a().ngens()..self.gamma().ngens()
    }

    /// Replaces individual structure-map images (used for fault injection).
    pub fn with_delta(&self, delta: Vec<Element>) -> Result<HopfAlgebroid> {
        HopfAlgebroid::new(
            self.name.clone(),
            self.powers.clone(),
            self.epsilon.images().to_vec(),
            self.conj.images().to_vec(),
            delta,
        )
    }

    pub fn with_conjugation(&self, conj: Vec<Element>) -> Result<HopfAlgebroid> {
        HopfAlgebroid::new(
            self.name.clone(),
            self.powers.clone(),
            self.epsilon.images().to_vec(),
            conj,
            self.delta.images().to_vec(),
        )
    }

    /// Same maps with a different right unit (rebuilds the tensor powers).
    pub fn with_eta_r(&self, eta_r: Vec<Element>) -> Result<HopfAlgebroid> {
        let eta_r = RingMorphism::new(self.a(), self.gamma(), eta_r)?;
        let powers = Arc::new(TensorPowers::new(self.a(), self.gamma(), &eta_r)?);
        let p2 = powers.power(2)?;
        let delta = self
            .delta
            .images()
            .iter()
            .map(|e| Element::from_terms(&p2, e.raw_terms()))
            .collect::<Result<_>>()?;
        HopfAlgebroid::new(
            self.name.clone(),
            powers,
            self.epsilon.images().to_vec(),
            self.conj.images().to_vec(),
            delta,
        )
    }

    pub fn tensor_square(&self) -> Result<TensorSquare> {
        let ring = self.powers.power(2)?;
        let left = self.powers.slot(2, 1)?;
        let right = self.powers.slot(2, 2)?;
        for i in 0..self.a().ngens() {
            let a = Element::generator_at(self.a(), i);
            let lhs = left.apply(&self.eta_r().apply(&a)?)?;
            let rhs = right.apply(&self.eta_l().apply(&a)?)?;
            if lhs != rhs {
                return Err(AlgebraError::NotFreeOverA(format!(
                    "balanced relation fails for {}: {} vs {}",
                    self.a().generators()[i].name,
                    lhs,
                    rhs
                )));
            }
        }
        Ok(TensorSquare { ring, left, right })
    }

    fn gamma_gen(&self, i: usize) -> Element {
        Element::generator_at(self.gamma(), i)
    }

    /// (ε⊗1): P_2 → Γ.
    pub fn counit_left(&self) -> Result<RingMorphism> {
        let g = self.gamma();
        let eta_l = self.eta_l();
        let a_img = (0..self.a().ngens()).map(|i| self.gamma_gen(i)).collect();
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for i in self.morphism_generators() {
            s1.push(eta_l.apply(&self.epsilon.images()[i])?);
            s2.push(self.gamma_gen(i));
        }
        self.powers.map_from(2, g, a_img, vec![s1, s2])
    }

    /// (1⊗ε): P_2 → Γ.
    pub fn counit_right(&self) -> Result<RingMorphism> {
        let g = self.gamma();
        let a_img = (0..self.a().ngens()).map(|i| self.gamma_gen(i)).collect();
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for i in self.morphism_generators() {
            s1.push(self.gamma_gen(i));
            s2.push(self.eta_r().apply(&self.epsilon.images()[i])?);
        }
        self.powers.map_from(2, g, a_img, vec![s1, s2])
    }

    /// (Δ⊗1): P_2 → P_3.
    pub fn delta_left(&self) -> Result<RingMorphism> {
        let p3 = self.powers.power(3)?;
        let a_img = (0..self.a().ngens()).map(|i| Element::generator_at(&p3, i)).collect();
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for (t, i) in self.morphism_generators().enumerate() {
            s1.push(self.delta.images()[i].embed_prefix(&p3)?);
            s2.push(Element::generator_at(&p3, self.powers.slot_index(3, t)));
        }
        self.powers.map_from(2, &p3, a_img, vec![s1, s2])
    }

    /// (1⊗Δ): P_2 → P_3.
    pub fn delta_right(&self) -> Result<RingMorphism> {
        let p3 = self.powers.power(3)?;
        let shift = self.powers.shift(2)?;
        let a_img = (0..self.a().ngens()).map(|i| Element::generator_at(&p3, i)).collect();
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for (t, i) in self.morphism_generators().enumerate() {
            s1.push(Element::generator_at(&p3, self.powers.slot_index(1, t)));
            s2.push(shift.apply(&self.delta.images()[i])?);
        }
        self.powers.map_from(2, &p3, a_img, vec![s1, s2])
    }

    /// μ(c⊗1): P_2 → Γ.
    pub fn antipode_left(&self) -> Result<RingMorphism> {
        let g = self.gamma();
        let a_img = self.eta_r().images().to_vec();
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for i in self.morphism_generators() {
            s1.push(self.conj.images()[i].clone());
            s2.push(self.gamma_gen(i));
        }
        self.powers.map_from(2, g, a_img, vec![s1, s2])
    }

    /// μ(1⊗c): P_2 → Γ.
    pub fn antipode_right(&self) -> Result<RingMorphism> {
        let g = self.gamma();
        let a_img = (0..self.a().ngens()).map(|i| self.gamma_gen(i)).collect();
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for i in self.morphism_generators() {
            s1.push(self.gamma_gen(i));
            s2.push(self.conj.images()[i].clone());
        }
        self.powers.map_from(2, g, a_img, vec![s1, s2])
    }

    /// Coface `d^i`: P_s → P_{s+1} of the cobar construction for 0 ≤ i ≤ s+1.
    pub fn coface(&self, s: usize, i: usize) -> Result<RingMorphism> {
        let pw = &self.powers;
        if i == 0 {
            return pw.shift(s);
        }
        if i == s + 1 {
            return pw.inclusion(s, s + 1);
        }
        let tgt = pw.power(s + 1)?;
        let src = pw.power(s)?;
        let na = self.a().ngens();
        let nm = pw.n_morphism();
        // Δ applied in slot i: P_2 → P_{s+1} onto slots i, i+1.
        let two = {
            let prev = pw.right_unit(i - 1)?;
            let mut images: Vec<Element> = prev
                .images()
                .iter()
                .map(|e| e.embed_prefix(&tgt))
                .collect::<Result<_>>()?;
            for slot in [i, i + 1] {
                for t in 0..nm {
                    images.push(Element::generator_at(&tgt, pw.slot_index(slot, t)));
                }
            }
            RingMorphism::new(&pw.power(2)?, &tgt, images)?
        };
        let mut images: Vec<Element> = (0..na).map(|j| Element::generator_at(&tgt, j)).collect();
        for slot in 1..=s {
            for t in 0..nm {
                let img = if slot < i {
                    Element::generator_at(&tgt, pw.slot_index(slot, t))
                } else if slot == i {
                    two.apply(&self.delta.images()[na + t])?
                } else {
                    Element::generator_at(&tgt, pw.slot_index(slot + 1, t))
                };
                images.push(img);
            }
        }
        RingMorphism::new(&src, &tgt, images)
    }
}

/// k[x]/(x^height) over F_p with x primitive, c(x) = −x.
pub fn primitive_truncated(p: u64, degree: i64, height: u32, d: i64) -> Result<HopfAlgebroid> {
    let a = PresentationBuilder::new(format!("F_{p}"), crate::coeff::BaseRing::PrimeField(p), d).build()?;
    let mut gb = PresentationBuilder::extending(&a, format!("F_{p}[x]/(x^{height})"));
    gb.generator("x", degree).relation("x", height, vec![]);
    let g = gb.build()?;
    let eta_r = RingMorphism::new(&a, &g, vec![])?;
    let powers = Arc::new(TensorPowers::new(&a, &g, &eta_r)?);
    let p2 = powers.power(2)?;
    let x = Element::generator_at(&g, 0);
    let dx = Element::generator(&p2, "x|1")?.add(&Element::generator(&p2, "x|2")?)?;
    HopfAlgebroid::new(g.name().to_string(), powers, vec![Element::zero(&a)], vec![x.neg()], vec![dx])
}

/// F_p[x]/(x^n − 1) with x grouplike, representing μ_n over F_p.
pub fn grouplike_cyclic(p: u64, n: u32) -> Result<HopfAlgebroid> {
    let base = crate::coeff::BaseRing::PrimeField(p);
    let a = PresentationBuilder::new(format!("F_{p}"), base, 0).build()?;
    let mut gb = PresentationBuilder::extending(&a, format!("F_{p}[x]/(x^{n}-1)"));
    gb.generator("x", 0).relation("x", n, vec![(base.one(), crate::ring::Monomial::one(1))]);
    let g = gb.build()?;
    let eta_r = RingMorphism::new(&a, &g, vec![])?;
    let powers = Arc::new(TensorPowers::new(&a, &g, &eta_r)?);
    let p2 = powers.power(2)?;
    let x = Element::generator_at(&g, 0);
    let dx = Element::generator(&p2, "x|1")?.mul(&Element::generator(&p2, "x|2")?)?;
    HopfAlgebroid::new(g.name().to_string(), powers, vec![Element::one(&a)], vec![x.pow(n - 1)?], vec![dx])
}

fn identity_check(name: &str, lhs: Result<Element>, rhs: Result<Element>) -> Verdict {
    match (lhs, rhs) {
        (Ok(l), Ok(r)) => {
            if l == r {
                Verdict::Pass
            } else {
                let diff = l.sub(&r).map(|d| d.to_string()).unwrap_or_default();
                Verdict::fail(name, format!("lhs = {l}; rhs = {r}; difference {diff}"))
            }
        }
        (Err(e), _) | (_, Err(e)) => Verdict::fail(name, e.to_string()),
    }
}

/// Runs the structure identities on every generator of degree ≤ `bound`.
pub fn check_hopf_axioms(h: &HopfAlgebroid, bound: i64) -> Verdict {
    let run = || -> Result<Verdict> {
        let a = h.a();
        let g = h.gamma();
        for (label, m) in [
            ("η_R", h.eta_r()),
            ("ε", h.epsilon()),
            ("c", h.conjugation()),
            ("Δ", h.delta()),
        ] {
            let v = m.check(bound);
            if let Verdict::Fail { identity, witness } = v {
                return Ok(Verdict::fail(format!("{label}: {identity}"), witness));
            }
        }
        let eta_l = h.eta_l();
        let eps = h.epsilon();
        let c = h.conjugation();
        let delta = h.delta();
        let p2 = h.powers().power(2)?;
        let ru2 = h.powers().right_unit(2)?;
        for i in 0..a.ngens() {
            let gen = &a.generators()[i];
            if gen.degree.abs() > bound {
                continue;
            }
            let x = Element::generator_at(a, i);
            let checks = [
                (
                    format!("ε∘η_L({}) = {}", gen.name, gen.name),
                    eps.apply(&eta_l.apply(&x)?),
                    Ok(x.clone()),
                ),
                (
                    format!("ε∘η_R({}) = {}", gen.name, gen.name),
                    eps.apply(&h.eta_r().apply(&x)?),
                    Ok(x.clone()),
                ),
                (
                    format!("Δ∘η_L({}) = η_L({})⊗1", gen.name, gen.name),
                    delta.apply(&eta_l.apply(&x)?),
                    x.embed_prefix(&p2),
                ),
                (
                    format!("Δ∘η_R({}) = 1⊗η_R({})", gen.name, gen.name),
                    delta.apply(&h.eta_r().apply(&x)?),
                    ru2.apply(&x),
                ),
                (
                    format!("c∘η_L({}) = η_R({})", gen.name, gen.name),
                    c.apply(&eta_l.apply(&x)?),
                    h.eta_r().apply(&x),
                ),
                (
                    format!("c∘η_R({}) = η_L({})", gen.name, gen.name),
                    c.apply(&h.eta_r().apply(&x)?),
                    eta_l.apply(&x),
                ),
            ];
            for (name, l, r) in checks {
                let v = identity_check(&name, l, r);
                if !v.passed() {
                    return Ok(v);
                }
            }
        }
        let e_left = h.counit_left()?;
        let e_right = h.counit_right()?;
        let d_left = h.delta_left()?;
        let d_right = h.delta_right()?;
        let m_left = h.antipode_left()?;
        let m_right = h.antipode_right()?;
        for i in h.morphism_generators() {
            let gen = &g.generators()[i];
            if gen.degree.abs() > bound {
                continue;
            }
            let x = Element::generator_at(g, i);
            let dx = delta.apply(&x)?;
            let checks = [
                (format!("(ε⊗1)Δ({0}) = {0}", gen.name), e_left.apply(&dx), Ok(x.clone())),
                (format!("(1⊗ε)Δ({0}) = {0}", gen.name), e_right.apply(&dx), Ok(x.clone())),
                (
                    format!("(Δ⊗1)Δ({0}) = (1⊗Δ)Δ({0})", gen.name),
                    d_left.apply(&dx),
                    d_right.apply(&dx),
                ),
                (format!("c∘c({0}) = {0}", gen.name), c.apply(&c.apply(&x)?), Ok(x.clone())),
                (
                    format!("μ(c⊗1)Δ({0}) = η_R ε({0})", gen.name),
                    m_left.apply(&dx),
                    h.eta_r().apply(&eps.apply(&x)?),
                ),
                (
                    format!("μ(1⊗c)Δ({0}) = η_L ε({0})", gen.name),
                    m_right.apply(&dx),
                    eta_l.apply(&eps.apply(&x)?),
                ),
            ];
            for (name, l, r) in checks {
                let v = identity_check(&name, l, r);
                if !v.passed() {
                    return Ok(v);
                }
            }
        }
        Ok(Verdict::Pass)
    };
    match run() {
        Ok(v) => v,
        Err(e) => Verdict::fail("structure maps evaluable", e.to_string()),
    }
}

/// β∘α = μ(α⊗β)Δ for points α, β: Γ → R with α∘η_R = β∘η_L.
pub fn compose_points(
    h: &HopfAlgebroid,
    beta: &RingMorphism,
    alpha: &RingMorphism,
) -> Result<RingMorphism> {
    if !same_ring(alpha.source(), h.gamma()) || !same_ring(beta.source(), h.gamma()) {
        return Err(AlgebraError::NotComposable("points must be defined on Γ".into()));
    }
    if !same_ring(alpha.target(), beta.target()) {
        return Err(AlgebraError::NotComposable("points live over different rings".into()));
    }
    let r = alpha.target();
    for i in 0..h.a().ngens() {
        let a = Element::generator_at(h.a(), i);
        let cod_a = alpha.apply(&h.eta_r().apply(&a)?)?;
        let dom_b = beta.apply(&h.eta_l().apply(&a)?)?;
        if cod_a != dom_b {
            return Err(AlgebraError::NotComposable(format!(
                "codomain of α and domain of β differ on {}: {} vs {}",
                h.a().generators()[i].name,
                cod_a,
                dom_b
            )));
        }
    }
    let a_img = alpha.images()[..h.a().ngens()].to_vec();
    let s1 = h.morphism_generators().map(|i| alpha.images()[i].clone()).collect();
    let s2 = h.morphism_generators().map(|i| beta.images()[i].clone()).collect();
    let mu = h.powers().map_from(2, r, a_img, vec![s1, s2])?;
    mu.compose(h.delta())
}

/// α∘c, the inverse morphism of α.
pub fn invert_point(h: &HopfAlgebroid, alpha: &RingMorphism) -> Result<RingMorphism> {
    alpha.compose(h.conjugation())
}

/// x∘ε, the identity morphism of the object x.
pub fn identity_point(h: &HopfAlgebroid, x: &RingMorphism) -> Result<RingMorphism> {
    x.compose(h.epsilon())
}

pub fn domain_of(h: &HopfAlgebroid, alpha: &RingMorphism) -> Result<RingMorphism> {
    alpha.compose(&h.eta_l())
}

pub fn codomain_of(h: &HopfAlgebroid, alpha: &RingMorphism) -> Result<RingMorphism> {
    alpha.compose(h.eta_r())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::BaseRing;
    use crate::expr::parse_element;

    /// A = Z_(2)[a], Γ = A[t], η_R(a) = a + 2t, t primitive.
    fn shear() -> HopfAlgebroid {
        let mut b = PresentationBuilder::new("A", BaseRing::PLocal(2), 12);
        b.generator("a", 2);
        let a = b.build().unwrap();
        let mut gb = PresentationBuilder::extending(&a, "Γ");
        gb.generator("t", 2);
        let g = gb.build().unwrap();
        let eta_r = RingMorphism::new(&a, &g, vec![parse_element(&g, "a + 2*t").unwrap()]).unwrap();
        let powers = Arc::new(TensorPowers::new(&a, &g, &eta_r).unwrap());
        let p2 = powers.power(2).unwrap();
        let eps = vec![Element::generator_at(&a, 0), Element::zero(&a)];
        let conj = vec![parse_element(&g, "a + 2*t").unwrap(), parse_element(&g, "-t").unwrap()];
        let delta = vec![
            Element::generator_at(&p2, 0),
            parse_element(&p2, "t|1 + t|2").unwrap(),
        ];
        HopfAlgebroid::new("shear", powers, eps, conj, delta).unwrap()
    }

    #[test]
    fn unit_algebroid_passes() {
        let mut b = PresentationBuilder::new("k", BaseRing::PrimeField(3), 20);
        b.generator("x", 4);
        let a = b.build().unwrap();
        let h = HopfAlgebroid::unit(&a).unwrap();
        assert!(check_hopf_axioms(&h, 20).passed());
        assert_eq!(h.tensor_square().unwrap().ring.ngens(), 1);
    }

    #[test]
    fn shear_algebroid_passes() {
        let h = shear();
        assert_eq!(check_hopf_axioms(&h, 12), Verdict::Pass);
        let sq = h.tensor_square().unwrap();
        assert_eq!(sq.ring.generators()[1].name, "t|1");
        let ru2 = h.powers().right_unit(2).unwrap();
        let a = Element::generator_at(h.a(), 0);
        assert_eq!(ru2.apply(&a).unwrap(), parse_element(&sq.ring, "a + 2*t|1 + 2*t|2").unwrap());
    }

    #[test]
    fn broken_conjugation_is_reported() {
        let h = shear();
        let g = h.gamma().clone();
        let bad = h
            .with_conjugation(vec![parse_element(&g, "a + 2*t").unwrap(), parse_element(&g, "t").unwrap()])
            .unwrap();
        match check_hopf_axioms(&bad, 12) {
            Verdict::Fail { identity, .. } => assert!(identity.contains('c'), "{identity}"),
            Verdict::Pass => panic!("broken conjugation accepted"),
        }
    }

    #[test]
    fn points_compose_over_a_field() {
        let h = shear();
        let mut b = PresentationBuilder::new("Q", BaseRing::PLocal(2), 12);
        b.generator("u", 2);
        let r = b.build().unwrap();
        let pt = |a: &str, t: &str| {
            RingMorphism::new(h.gamma(), &r, vec![parse_element(&r, a).unwrap(), parse_element(&r, t).unwrap()])
                .unwrap()
        };
        // α: u → u + 2u, β: 3u → 3u + 2u.
        let alpha = pt("u", "u");
        let beta = pt("3*u", "u");
        let comp = compose_points(&h, &beta, &alpha).unwrap();
        assert_eq!(comp.images()[1].to_string(), "2*u");
        assert!(compose_points(&h, &alpha, &alpha).is_err());
        let inv = invert_point(&h, &alpha).unwrap();
        let id = compose_points(&h, &inv, &alpha).unwrap();
        assert_eq!(id.images()[1], Element::zero(&r));
    }
}
