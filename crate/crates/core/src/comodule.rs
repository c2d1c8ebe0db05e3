//! Comodules that are free over A on listed generators.
//!
//! ψ(m_j) = Σ_k γ_jk ⊗ m_k with γ_jk ∈ Γ, extended left A-linearly through
//! η_L. The unit comodule is A itself with ψ(1) = 1 ⊗ 1.

use crate::error::{AlgebraError, Result};
use crate::finite::{eval_all, evaluate_images, FiniteGroupoid, FiniteRing, Idx};
use crate::hopf::{domain_of, HopfAlgebroid};
use crate::morita::HopfMap;
use crate::ring::{same_ring, Element, RingMorphism, Verdict};

#[derive(Clone, Debug)]
pub struct Comodule {
    pub name: String,
    pub algebroid: HopfAlgebroid,
    pub generators: Vec<(String, i64)>,
    /// `psi[j][k] = γ_jk`.
    pub psi: Vec<Vec<Element>>,
}

impl Comodule {
    pub fn new(
        name: impl Into<String>,
        algebroid: &HopfAlgebroid,
        generators: Vec<(String, i64)>,
        psi: Vec<Vec<Element>>,
    ) -> Result<Comodule> {
        let n = generators.len();
        if psi.len() != n || psi.iter().any(|row| row.len() != n) {
            return Err(AlgebraError::InvalidPresentation(format!(
                "coaction matrix must be {n}×{n}"
            )));
        }
        for (j, row) in psi.iter().enumerate() {
            for (k, g) in row.iter().enumerate() {
                if !same_ring(g.ring(), algebroid.gamma()) {
                    return Err(AlgebraError::PresentationMismatch(
                        "coaction coefficients must lie in Γ".into(),
                    ));
                }
                let want = generators[j].1 - generators[k].1;
                if !g.is_zero() && (!g.is_homogeneous() || g.degree() != Some(want)) {
                    return Err(AlgebraError::InvalidPresentation(format!(
                        "ψ({}) has a {} component of degree {:?}, expected {want}",
                        generators[j].0,
                        generators[k].0,
                        g.degree()
                    )));
                }
            }
        }
        Ok(Comodule {
            name: name.into(),
            algebroid: algebroid.clone(),
            generators,
            psi,
        })
    }

    pub fn unit(h: &HopfAlgebroid) -> Comodule {
        Comodule {
            name: "A".into(),
            algebroid: h.clone(),
            generators: vec![("1".into(), 0)],
            psi: vec![vec![Element::one(h.gamma())]],
        }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.0 == name)
    }

    /// Direct sum with shifted copies; handy for catalog entries.
    pub fn direct_sum(&self, other: &Comodule) -> Result<Comodule> {
        if !same_ring(self.algebroid.gamma(), other.algebroid.gamma()) {
            return Err(AlgebraError::PresentationMismatch("different algebroids".into()));
        }
        let g = self.algebroid.gamma();
        let (n, m) = (self.rank(), other.rank());
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().map(|(s, d)| (format!("{s}'"), *d)));
        let mut psi = vec![vec![Element::zero(g); n + m]; n + m];
        for j in 0..n {
            for k in 0..n {
                psi[j][k] = self.psi[j][k].clone();
            }
        }
        for j in 0..m {
            for k in 0..m {
                psi[n + j][n + k] = other.psi[j][k].clone();
            }
        }
        Comodule::new(format!("{}⊕{}", self.name, other.name), &self.algebroid, gens, psi)
    }
}

/// Counit and coassociativity on generators of degree ≤ bound.
pub fn check_comodule(m: &Comodule, bound: i64) -> Verdict {
    let run = || -> Result<Verdict> {
        let h = &m.algebroid;
        let a = h.a();
        let p2 = h.powers().power(2)?;
        let s1 = h.powers().slot(2, 1)?;
        let s2 = h.powers().slot(2, 2)?;
        let n = m.rank();
        for j in 0..n {
            let (name, deg) = &m.generators[j];
            if deg.abs() > bound {
                continue;
            }
            for k in 0..n {
                let e = h.epsilon().apply(&m.psi[j][k])?;
                let want = if j == k { Element::one(a) } else { Element::zero(a) };
                if e != want {
                    return Ok(Verdict::fail(
                        format!("(ε⊗1)ψ({name}) = {name}"),
                        format!("coefficient of {} is {e}", m.generators[k].0),
                    ));
                }
            }
            for l in 0..n {
                let lhs = h.delta().apply(&m.psi[j][l])?;
                let mut rhs = Element::zero(&p2);
                for k in 0..n {
                    if m.psi[j][k].is_zero() || m.psi[k][l].is_zero() {
                        continue;
                    }
                    rhs.add_assign(&s1.apply(&m.psi[j][k])?.mul(&s2.apply(&m.psi[k][l])?)?)?;
                }
                if lhs != rhs {
                    return Ok(Verdict::fail(
                        format!("(Δ⊗1)ψ({name}) = (1⊗ψ)ψ({name})"),
                        format!("{} component: {lhs} vs {rhs}", m.generators[l].0),
                    ));
                }
            }
        }
        Ok(Verdict::Pass)
    };
    run().unwrap_or_else(|e| Verdict::fail("coaction evaluable", e.to_string()))
}

/// B⊗_A M with ψ'(m_j) = Σ_k f_1(γ_jk) ⊗ m_k.
pub fn base_change(f: &HopfMap, m: &Comodule) -> Result<Comodule> {
    if !same_ring(m.algebroid.gamma(), f.source.gamma()) {
        return Err(AlgebraError::PresentationMismatch(
            "comodule lives over a different algebroid".into(),
        ));
    }
    let psi = m
        .psi
        .iter()
        .map(|row| row.iter().map(|g| f.f1.apply(g)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Comodule::new(
        format!("{}⊗{}", f.target.a().name(), m.name),
        &f.target,
        m.generators.clone(),
        psi,
    )
}

/// ψ̃_α : R_{dom α}⊗M → R_{cod α}⊗M for a point α: Γ → R, as the matrix
/// `[α(γ_jk)]` acting on coordinate rows.
pub fn sheafify(m: &Comodule, alpha: &RingMorphism) -> Result<Vec<Vec<Element>>> {
    if !same_ring(alpha.source(), m.algebroid.gamma()) {
        return Err(AlgebraError::PresentationMismatch("points must be defined on Γ".into()));
    }
    m.psi
        .iter()
        .map(|row| row.iter().map(|g| alpha.apply(g)).collect())
        .collect()
}

/// The module at one point x: A → R and the transition maps out of it.
#[derive(Clone, Debug)]
pub struct SheafPointData {
    pub point: RingMorphism,
    pub rank: usize,
    pub transitions: Vec<(RingMorphism, Vec<Vec<Element>>)>,
}

fn same_point(a: &RingMorphism, b: &RingMorphism) -> bool {
    same_ring(a.target(), b.target()) && a.images() == b.images()
}

/// Point data for the universal point 1: Γ → Γ followed by the given points.
pub fn sheaf_data(m: &Comodule, alphas: &[RingMorphism]) -> Result<Vec<SheafPointData>> {
    let h = &m.algebroid;
    let universal = RingMorphism::identity(h.gamma());
    let mut out = vec![SheafPointData {
        point: h.eta_l(),
        rank: m.rank(),
        transitions: vec![(universal.clone(), sheafify(m, &universal)?)],
    }];
    for alpha in alphas {
        let x = domain_of(h, alpha)?;
        let psi = sheafify(m, alpha)?;
        match out.iter_mut().find(|d| same_point(&d.point, &x)) {
            Some(d) => d.transitions.push((alpha.clone(), psi)),
            None => out.push(SheafPointData {
                point: x,
                rank: m.rank(),
                transitions: vec![(alpha.clone(), psi)],
            }),
        }
    }
    Ok(out)
}

/// Reads ψ off the universal point after checking that every module in the
/// family is free of the expected rank.
pub fn comodule_from_sheaf(
    h: &HopfAlgebroid,
    name: &str,
    generators: Vec<(String, i64)>,
    family: &[SheafPointData],
) -> Result<Comodule> {
    let n = generators.len();
    for d in family {
        let shape_ok = d
            .transitions
            .iter()
            .all(|(_, t)| t.len() == d.rank && t.iter().all(|row| row.len() == d.rank));
        if d.rank != n || !shape_ok {
            return Err(AlgebraError::NotQuasiCoherent(format!(
                "module of rank {} over {} at a point, but {n} generators",
                d.rank,
                d.point.target().name()
            )));
        }
    }
    let universal = RingMorphism::identity(h.gamma());
    let psi = family
        .iter()
        .filter(|d| same_point(&d.point, &h.eta_l()))
        .flat_map(|d| d.transitions.iter())
        .find(|(a, _)| same_point(a, &universal))
        .map(|(_, t)| t.clone())
        .ok_or_else(|| AlgebraError::NotQuasiCoherent("family has no universal point".into()))?;
    Comodule::new(name, h, generators, psi)
}

type Matrix = Vec<Vec<Idx>>;

fn mat_mul(r: &FiniteRing, a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(r.zero(), |acc, k| r.add(acc, r.mul(a[i][k], b[k][j]))))
                .collect()
        })
        .collect()
}

fn mat_id(r: &FiniteRing, n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { r.one() } else { r.zero() }).collect())
        .collect()
}

/// ψ̃ over every morphism of a finite groupoid: ψ̃_{1_x} = id,
/// ψ̃_{β∘α} = ψ̃_β∘ψ̃_α and invertibility of each ψ̃_α.
pub fn check_sheaf_cocycles(m: &Comodule, g: &FiniteGroupoid) -> Result<Verdict> {
    let r = g.ring.as_ref();
    let n = m.rank();
    if g.morphisms.is_empty() {
        return Ok(Verdict::Pass);
    }
    let flat: Vec<Element> = m.psi.iter().flatten().cloned().collect();
    let compiled = evaluate_images(&flat, r)?;
    let mats: Vec<Matrix> = g
        .morphisms
        .iter()
        .map(|a| {
            let v = eval_all(&compiled, r, a)?;
            Ok(v.chunks(n).map(|c| c.to_vec()).collect())
        })
        .collect::<Result<_>>()?;
    let id = mat_id(r, n);
    let at = |a: usize| g.format_point(&g.morphisms[a]);
    for (x, &i) in g.identity.iter().enumerate() {
        if mats[i] != id {
            return Ok(Verdict::fail(
                format!("ψ̃ of an identity is the identity over {}", r.name()),
                format!("object {}", g.format_point(&g.objects[x])),
            ));
        }
    }
    for (a, ma) in mats.iter().enumerate() {
        let inv = &mats[g.inverse[a]];
        if mat_mul(r, ma, inv) != id || mat_mul(r, inv, ma) != id {
            return Ok(Verdict::fail(format!("ψ̃_α is invertible over {}", r.name()), at(a)));
        }
    }
    let mut pairs: Vec<(&(usize, usize), &usize)> = g.compose.iter().collect();
    pairs.sort();
    for (&(b, a), &ba) in pairs {
        if mats[ba] != mat_mul(r, &mats[a], &mats[b]) {
            return Ok(Verdict::fail(
                format!("ψ̃_(β∘α) = ψ̃_β∘ψ̃_α over {}", r.name()),
                format!("α = {}, β = {}", at(a), at(b)),
            ));
        }
    }
    Ok(Verdict::Pass)
}

/// Small comodules used by the roundtrip checks; each algebroid is small
/// enough to evaluate on the finite-ring catalog.
pub fn catalog() -> Result<Vec<Comodule>> {
    use crate::fgl::{bp_data, johnson_wilson, quotient_localize};
    let bp2 = bp_data(2, 4)?.algebroid;
    let g2 = bp2.gamma();
    let t1 = Element::generator(g2, "t1")?;
    let toy = Comodule::new(
        "toy",
        &bp2,
        vec![("m".into(), 2), ("n".into(), 0)],
        vec![vec![Element::one(g2), t1], vec![Element::zero(g2), Element::one(g2)]],
    )?;
    let b3 = bp_data(3, 8)?;
    let k1 = quotient_localize(&b3, 1)?;
    let g3 = k1.gamma();
    let zeta = Element::generator(g3, "v1")?.inverse()?.mul(&Element::generator(g3, "t1")?)?;
    let ext = Comodule::new(
        "extension",
        &k1,
        vec![("m".into(), 0), ("n".into(), 0)],
        vec![vec![Element::one(g3), zeta], vec![Element::zero(g3), Element::one(g3)]],
    )?;
    let (_, map) = johnson_wilson(&b3, 1, 1)?;
    let mu2 = crate::hopf::grouplike_cyclic(3, 2)?;
    let x = Element::generator(mu2.gamma(), "x")?;
    let sign = Comodule::new("sign", &mu2, vec![("m".into(), 0)], vec![vec![x]])?;
    let both = Comodule::unit(&mu2).direct_sum(&sign)?;
    Ok(vec![
        Comodule::unit(&bp2),
        toy,
        Comodule::unit(&k1),
        ext,
        base_change(&map, &Comodule::unit(&k1))?,
        sign,
        both,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgl::{bp_data, quotient_localize};
    use crate::morita::induced_algebroid;
    use crate::ring::RingMorphism;

    #[test]
    fn unit_comodule_and_a_broken_one() {
        let b = bp_data(2, 12).unwrap();
        let h = &b.algebroid;
        assert!(check_comodule(&Comodule::unit(h), 12).passed());
        let t1 = Element::generator(h.gamma(), "t1").unwrap();
        let bad = Comodule::new("bad", h, vec![("m".into(), 0)], vec![vec![t1.clone()]]);
        // a degree-2 coefficient on a degree-0 diagonal entry is rejected outright
        assert!(bad.is_err());
        let two = Comodule::new(
            "pair",
            h,
            vec![("m".into(), 2), ("n".into(), 0)],
            vec![
                vec![Element::one(h.gamma()), t1.clone()],
                vec![Element::zero(h.gamma()), Element::one(h.gamma())],
            ],
        )
        .unwrap();
        assert!(check_comodule(&two, 12).passed());
        let broken = Comodule::new(
            "broken",
            h,
            vec![("m".into(), 2), ("n".into(), 0)],
            vec![
                vec![Element::zero(h.gamma()), t1],
                vec![Element::zero(h.gamma()), Element::one(h.gamma())],
            ],
        )
        .unwrap();
        assert!(!check_comodule(&broken, 12).passed());
    }

    #[test]
    fn base_change_of_the_unit() {
        let b = bp_data(3, 20).unwrap();
        let h = quotient_localize(&b, 1).unwrap();
        let target = crate::fgl::johnson_wilson_ring(&h, 3, 1, 1).unwrap();
        let f0 = RingMorphism::from_named(h.a(), &target, &[]).unwrap();
        let ind = induced_algebroid(&h, &f0).unwrap();
        let m = base_change(&ind.map, &Comodule::unit(&h)).unwrap();
        assert!(check_comodule(&m, 20).passed());
        assert_eq!(m.psi[0][0], Element::one(ind.algebroid.gamma()));
    }

    #[test]
    fn roundtrip_and_cocycles_on_the_catalog() {
        let rings = crate::finite::catalog();
        let cat = catalog().unwrap();
        assert!(cat.len() >= 5);
        for m in &cat {
            assert!(check_comodule(m, 16).passed(), "{}", m.name);
            let fam = sheaf_data(m, &[]).unwrap();
            let back = comodule_from_sheaf(&m.algebroid, &m.name, m.generators.clone(), &fam).unwrap();
            assert_eq!(back.psi, m.psi);
            for r in &rings {
                let g = crate::finite::evaluate_groupoid(&m.algebroid, r, crate::finite::DEFAULT_BUDGET).unwrap();
                assert!(check_sheaf_cocycles(m, &g).unwrap().passed(), "{} at {}", m.name, r.name());
            }
        }
    }

    #[test]
    fn primitive_on_a_dual_number_point() {
        use crate::coeff::BaseRing;
        use crate::ring::PresentationBuilder;
        let h = bp_data(2, 4).unwrap().algebroid;
        let mut b = PresentationBuilder::new("F_2[t]/(t^2)", BaseRing::PrimeField(2), 8);
        b.generator("t", 2).relation("t", 2, vec![]);
        let r = b.build().unwrap();
        let t = Element::generator(&r, "t").unwrap();
        let alpha = RingMorphism::new(h.gamma(), &r, vec![t.clone(), t.clone()]).unwrap();
        let cod = crate::hopf::codomain_of(&h, &alpha).unwrap();
        assert_eq!(cod.images()[0], t);
        let psi = sheafify(&Comodule::unit(&h), &alpha).unwrap();
        assert_eq!(psi, vec![vec![Element::one(&r)]]);
        let fam = sheaf_data(&Comodule::unit(&h), &[alpha]).unwrap();
        assert_eq!(fam.len(), 2);
    }

    #[test]
    fn rank_mismatch_is_not_quasi_coherent() {
        let h = bp_data(2, 4).unwrap().algebroid;
        let m = Comodule::unit(&h);
        let mut fam = sheaf_data(&m, &[]).unwrap();
        let mut wide = fam[0].clone();
        wide.rank = 2;
        fam.push(wide);
        assert!(matches!(
            comodule_from_sheaf(&h, "A", m.generators.clone(), &fam),
            Err(AlgebraError::NotQuasiCoherent(_))
        ));
    }

    #[test]
    fn cocycle_failure_needs_a_ring_where_two_is_nonzero() {
        let h = bp_data(2, 4).unwrap().algebroid;
        let g = h.gamma();
        let t1 = Element::generator(g, "t1").unwrap();
        let bad = Comodule::new(
            "bad",
            &h,
            vec![("m".into(), 4), ("n".into(), 0)],
            vec![vec![Element::one(g), t1.pow(2).unwrap()], vec![Element::zero(g), Element::one(g)]],
        )
        .unwrap();
        assert!(!check_comodule(&bad, 8).passed());
        let verdict = |name: &str| {
            let r = crate::finite::catalog_ring(name).unwrap();
            let gpd = crate::finite::evaluate_groupoid(&h, &r, crate::finite::DEFAULT_BUDGET).unwrap();
            check_sheaf_cocycles(&bad, &gpd).unwrap().passed()
        };
        assert!(verdict("F_2"));
        assert!(!verdict("Z/4"));
    }
}
