//! Finite commutative rings as brute-force test objects.
//!
//! Presentations are evaluated with their grading forgotten. A point is the
//! list of values of every generator, eliminated ones included.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use rayon::prelude::*;
use serde::Serialize;

use crate::coeff::{BaseRing, Coeff};
use crate::error::{AlgebraError, Result};
use crate::hopf::HopfAlgebroid;
use crate::morita::HopfMap;
use crate::ring::{Element, Ring, Rule, Verdict};

pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const CATALOG_VERSION: u32 = 1;

pub type Idx = u16;

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteRing {
    name: String,
    size: usize,
    add: Vec<Idx>,
    mul: Vec<Idx>,
    neg: Vec<Idx>,
    zero: Idx,
    one: Idx,
    inverse: Vec<Option<Idx>>,
    labels: Vec<String>,
    characteristic: u64,
}

impl fmt::Debug for FiniteRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteRing[{}; {}]", self.name, self.size)
    }
}

impl FiniteRing {
    /// Tables are indexed `a * size + b`; the ring axioms are checked
    /// exhaustively.
    pub fn from_tables(
        name: impl Into<String>,
        labels: Vec<String>,
        add: Vec<Idx>,
        mul: Vec<Idx>,
        zero: Idx,
        one: Idx,
    ) -> Result<FiniteRing> {
        let name = name.into();
        let n = labels.len();
        let bad = |what: &str| AlgebraError::InvalidPresentation(format!("{name}: {what}"));
        if n == 0 || n > Idx::MAX as usize || add.len() != n * n || mul.len() != n * n {
            return Err(bad("tables must be n×n for 1 ≤ n < 65536"));
        }
        if add.iter().chain(&mul).any(|&x| x as usize >= n) || zero as usize >= n || one as usize >= n {
            return Err(bad("table entry out of range"));
        }
        let at = |t: &[Idx], a: usize, b: usize| t[a * n + b] as usize;
        let mut neg = vec![0; n];
        for a in 0..n {
            match (0..n).find(|&b| at(&add, a, b) == zero as usize) {
                Some(b) => neg[a] = b as Idx,
                None => return Err(bad(&format!("{} has no additive inverse", labels[a]))),
            }
            if at(&add, a, zero as usize) != a || at(&mul, a, one as usize) != a {
                return Err(bad("0 or 1 is not neutral"));
            }
            for b in 0..n {
                if at(&add, a, b) != at(&add, b, a) || at(&mul, a, b) != at(&mul, b, a) {
                    return Err(bad("operations are not commutative"));
                }
                for c in 0..n {
                    if at(&add, at(&add, a, b), c) != at(&add, a, at(&add, b, c))
                        || at(&mul, at(&mul, a, b), c) != at(&mul, a, at(&mul, b, c))
                    {
                        return Err(bad("operations are not associative"));
                    }
                    if at(&mul, a, at(&add, b, c)) != at(&add, at(&mul, a, b), at(&mul, a, c)) {
                        return Err(bad("distributivity fails"));
                    }
                }
            }
        }
        Ok(FiniteRing::assemble(name, labels, add, mul, neg, zero, one))
    }

    fn assemble(
        name: String,
        labels: Vec<String>,
        add: Vec<Idx>,
        mul: Vec<Idx>,
        neg: Vec<Idx>,
        zero: Idx,
        one: Idx,
    ) -> FiniteRing {
        let n = labels.len();
        let inverse = (0..n)
            .map(|a| (0..n).find(|&b| mul[a * n + b] == one).map(|b| b as Idx))
            .collect();
        let mut characteristic = 1u64;
        let mut x = one;
        while x != zero {
            x = add[x as usize * n + one as usize];
            characteristic += 1;
        }
        FiniteRing {
            name,
            size: n,
            add,
            mul,
            neg,
            zero,
            one,
            inverse,
            labels,
            characteristic,
        }
    }

    pub fn zmod(n: u64) -> FiniteRing {
        let k = n as usize;
        let mut add = vec![0; k * k];
        let mut mul = vec![0; k * k];
        for a in 0..k {
            for b in 0..k {
                add[a * k + b] = ((a + b) % k) as Idx;
                mul[a * k + b] = ((a * b) % k) as Idx;
            }
        }
        let neg = (0..k).map(|a| ((k - a) % k) as Idx).collect();
        let labels = (0..k).map(|a| a.to_string()).collect();
        let name = if is_prime(n) { format!("F_{n}") } else { format!("Z/{n}") };
        FiniteRing::assemble(name, labels, add, mul, neg, 0, (1 % k) as Idx)
    }

    pub fn product(a: &FiniteRing, b: &FiniteRing) -> FiniteRing {
        let (na, nb) = (a.size, b.size);
        let n = na * nb;
        let enc = |x: usize, y: usize| (x + na * y) as Idx;
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for u in 0..n {
            for v in 0..n {
                let (x1, y1, x2, y2) = (u % na, u / na, v % na, v / na);
                add[u * n + v] = enc(a.add_idx(x1, x2), b.add_idx(y1, y2));
                mul[u * n + v] = enc(a.mul_idx(x1, x2), b.mul_idx(y1, y2));
            }
        }
        let neg = (0..n).map(|u| enc(a.neg[u % na] as usize, b.neg[u / na] as usize)).collect();
        let labels = (0..n).map(|u| format!("({},{})", a.labels[u % na], b.labels[u / na])).collect();
        FiniteRing::assemble(
            format!("{}×{}", a.name, b.name),
            labels,
            add,
            mul,
            neg,
            enc(a.zero as usize, b.zero as usize),
            enc(a.one as usize, b.one as usize),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn zero(&self) -> Idx {
        self.zero
    }

    pub fn one(&self) -> Idx {
        self.one
    }

    pub fn characteristic(&self) -> u64 {
        self.characteristic
    }

    pub fn label(&self, a: Idx) -> &str {
        &self.labels[a as usize]
    }

    pub fn element(&self, label: &str) -> Option<Idx> {
        self.labels.iter().position(|l| l == label).map(|i| i as Idx)
    }

    pub fn units(&self) -> Vec<Idx> {
        (0..self.size as Idx).filter(|&a| self.inverse[a as usize].is_some()).collect()
    }

    pub fn is_unit(&self, a: Idx) -> bool {
        self.inverse[a as usize].is_some()
    }

    pub fn inv(&self, a: Idx) -> Option<Idx> {
        self.inverse[a as usize]
    }

    fn add_idx(&self, a: usize, b: usize) -> usize {
        self.add[a * self.size + b] as usize
    }

    fn mul_idx(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.size + b] as usize
    }

    pub fn add(&self, a: Idx, b: Idx) -> Idx {
        self.add[a as usize * self.size + b as usize]
    }

    pub fn mul(&self, a: Idx, b: Idx) -> Idx {
        self.mul[a as usize * self.size + b as usize]
    }

    pub fn neg(&self, a: Idx) -> Idx {
        self.neg[a as usize]
    }

    pub fn sub(&self, a: Idx, b: Idx) -> Idx {
        self.add(a, self.neg(b))
    }

    pub fn pow(&self, a: Idx, e: u32) -> Idx {
        let mut acc = self.one;
        for _ in 0..e {
            acc = self.mul(acc, a);
        }
        acc
    }

    /// Image of an integer under Z → R.
    pub fn integer(&self, n: i64) -> Idx {
        let c = self.characteristic as i64;
        let k = n.rem_euclid(c);
        let mut acc = self.zero;
        for _ in 0..k {
            acc = self.add(acc, self.one);
        }
        acc
    }

    /// True when Z → R extends to the given coefficient ring.
    pub fn admits_base(&self, base: BaseRing) -> bool {
        let c = self.characteristic;
        match base {
            BaseRing::Integers => true,
            BaseRing::PrimeField(p) => c == p,
            BaseRing::PLocal(p) => prime_factors(c).iter().all(|&q| q == p),
        }
    }

    /// Image of a coefficient, when the base admits a map to R.
    pub fn coefficient(&self, c: &Coeff) -> Option<Idx> {
        match c {
            Coeff::Fp(v, p) => (self.characteristic == *p).then(|| self.integer(*v as i64)),
            Coeff::Q(q) => {
                let m = self.characteristic as i64;
                let num = q.numer().mod_floor(&m.into()).to_i64()?;
                let den = q.denom().abs().mod_floor(&m.into()).to_i64()?;
                let d = self.integer(den);
                let inv = self.inv(d)?;
                Some(self.mul(self.integer(num), inv))
            }
        }
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// An R-algebra (R/I)[x_1,…,x_k]/(f_1(x_1),…,f_k(x_k)) with each f_i monic.
/// Elements are coefficient vectors over the monomial basis, each entry the
/// smallest representative of its class mod I.
#[derive(Clone, Debug)]
pub struct Algebra {
    pub name: String,
    pub base: Arc<FiniteRing>,
    ideal: Vec<Idx>,
    /// Lower coefficients of each monic f_i.
    roots: Vec<Vec<Idx>>,
    canon: Vec<Idx>,
}

pub type AlgElem = Vec<Idx>;

impl Algebra {
    pub fn new(
        name: impl Into<String>,
        base: &Arc<FiniteRing>,
        ideal_generators: &[Idx],
        roots: Vec<Vec<Idx>>,
    ) -> Result<Algebra> {
        if roots.iter().any(|f| f.is_empty()) {
            return Err(AlgebraError::InvalidPresentation("adjoined roots need degree ≥ 1".into()));
        }
        let r = base.as_ref();
        let ideal = ideal_closure(r, ideal_generators);
        let mut canon = vec![0; r.size];
        for a in 0..r.size as Idx {
            canon[a as usize] = ideal.iter().map(|&i| r.add(a, i)).min().unwrap_or(a);
        }
        let roots = roots
            .into_iter()
            .map(|f| f.into_iter().map(|c| canon[c as usize]).collect())
            .collect();
        Ok(Algebra {
            name: name.into(),
            base: base.clone(),
            ideal,
            roots,
            canon,
        })
    }

    /// R itself.
    pub fn trivial(base: &Arc<FiniteRing>) -> Algebra {
        Algebra::new(base.name.clone(), base, &[], vec![]).expect("trivial algebra")
    }

    pub fn rank(&self) -> usize {
        self.roots.iter().map(|f| f.len()).product()
    }

    fn degrees(&self) -> Vec<usize> {
        self.roots.iter().map(|f| f.len()).collect()
    }

    pub fn zero(&self) -> AlgElem {
        vec![self.base.zero; self.rank()]
    }

    /// Structure map R → S.
    pub fn embed(&self, r: Idx) -> AlgElem {
        let mut v = self.zero();
        v[0] = self.canon[r as usize];
        v
    }

    pub fn one(&self) -> AlgElem {
        self.embed(self.base.one)
    }

    pub fn add(&self, a: &AlgElem, b: &AlgElem) -> AlgElem {
        a.iter().zip(b).map(|(&x, &y)| self.canon[self.base.add(x, y) as usize]).collect()
    }

    pub fn scale(&self, r: Idx, a: &AlgElem) -> AlgElem {
        a.iter().map(|&x| self.canon[self.base.mul(r, x) as usize]).collect()
    }

    pub fn mul(&self, a: &AlgElem, b: &AlgElem) -> AlgElem {
        let r = self.base.as_ref();
        let degs = self.degrees();
        let k = degs.len();
        // unreduced product on exponents < 2d_i − 1
        let wide: Vec<usize> = degs.iter().map(|d| 2 * d - 1).collect();
        let mut acc: HashMap<Vec<usize>, Idx> = HashMap::new();
        for (i, &x) in a.iter().enumerate() {
            if x == r.zero {
                continue;
            }
            let ei = unrank(i, &degs);
            for (j, &y) in b.iter().enumerate() {
                if y == r.zero {
                    continue;
                }
                let ej = unrank(j, &degs);
                let e: Vec<usize> = (0..k).map(|t| ei[t] + ej[t]).collect();
                let slot = acc.entry(e).or_insert(r.zero);
                *slot = r.add(*slot, r.mul(x, y));
            }
        }
        // reduce variable by variable from the top exponent
        for (v, f) in self.roots.iter().enumerate() {
            let d = f.len();
            for top in (d..wide[v]).rev() {
                let keys: Vec<Vec<usize>> = acc.keys().filter(|e| e[v] == top).cloned().collect();
                for e in keys {
                    let c = acc.remove(&e).unwrap_or(r.zero);
                    if c == r.zero {
                        continue;
                    }
                    for (j, &fj) in f.iter().enumerate() {
                        let mut e2 = e.clone();
                        e2[v] = top - d + j;
                        let slot = acc.entry(e2).or_insert(r.zero);
                        *slot = r.sub(*slot, r.mul(c, fj));
                    }
                }
            }
        }
        let mut out = self.zero();
        for (e, c) in acc {
            let i = rank_of(&e, &degs);
            out[i] = self.canon[r.add(out[i], c) as usize];
        }
        out
    }

    /// Every element, in index order.
    pub fn elements(&self) -> Vec<AlgElem> {
        let reps: Vec<Idx> = {
            let set: BTreeSet<Idx> = self.canon.iter().copied().collect();
            set.into_iter().collect()
        };
        let n = self.rank();
        let total = reps.len().pow(n as u32);
        (0..total)
            .map(|mut u| {
                (0..n)
                    .map(|_| {
                        let x = reps[u % reps.len()];
                        u /= reps.len();
                        x
                    })
                    .collect()
            })
            .collect()
    }

    /// S ⊗_R S' with its two structure maps.
    pub fn tensor(&self, other: &Algebra) -> Result<Algebra> {
        if self.base != other.base {
            return Err(AlgebraError::PresentationMismatch("algebras over different rings".into()));
        }
        let mut gens = self.ideal.clone();
        gens.extend(&other.ideal);
        let mut roots = self.roots.clone();
        roots.extend(other.roots.iter().cloned());
        Algebra::new(format!("{}⊗{}", self.name, other.name), &self.base, &gens, roots)
    }

    /// Pushes an element of a tensor factor into `self = left ⊗ right`.
    fn include(&self, x: &AlgElem, factor_degrees: &[usize], offset: usize) -> AlgElem {
        let degs = self.degrees();
        let mut out = self.zero();
        for (i, &c) in x.iter().enumerate() {
            let e = unrank(i, factor_degrees);
            let mut full = vec![0; degs.len()];
            full[offset..offset + e.len()].copy_from_slice(&e);
            out[rank_of(&full, &degs)] = self.canon[c as usize];
        }
        out
    }

    pub fn label(&self, x: &AlgElem) -> String {
        let degs = self.degrees();
        let mut parts = Vec::new();
        for (i, &c) in x.iter().enumerate() {
            if c == self.base.zero {
                continue;
            }
            let e = unrank(i, &degs);
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { format!("x{}", v + 1) } else { format!("x{}^{k}", v + 1) })
                .collect();
            let c = self.base.label(c);
            parts.push(match (mono.is_empty(), c == "1") {
                (true, _) => c.to_string(),
                (false, true) => mono.join("*"),
                (false, false) => format!("{c}*{}", mono.join("*")),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("+")
        }
    }

    /// The algebra as a finite ring, with the structure map as an index table.
    pub fn to_ring(&self) -> (FiniteRing, Vec<Idx>) {
        let elems = self.elements();
        let index: HashMap<&AlgElem, Idx> = elems.iter().enumerate().map(|(i, e)| (e, i as Idx)).collect();
        let n = elems.len();
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for (i, a) in elems.iter().enumerate() {
            for (j, b) in elems.iter().enumerate() {
                add[i * n + j] = index[&self.add(a, b)];
                mul[i * n + j] = index[&self.mul(a, b)];
            }
        }
        let neg = elems.iter().map(|a| index[&self.scale(self.base.neg(self.base.one), a)]).collect();
        let labels = elems.iter().map(|e| self.label(e)).collect();
        let ring = FiniteRing::assemble(
            self.name.clone(),
            labels,
            add,
            mul,
            neg,
            index[&self.zero()],
            index[&self.one()],
        );
        let map = (0..self.base.size as Idx).map(|r| index[&self.embed(r)]).collect();
        (ring, map)
    }

    /// T ⊗_R self as an algebra over T, for an R-algebra T given as a ring
    /// with its structure map.
    fn base_change(&self, t: &Arc<FiniteRing>, map: &[Idx]) -> Result<Algebra> {
        let ideal: Vec<Idx> = self.ideal.iter().map(|&i| map[i as usize]).collect();
        let roots = self.roots.iter().map(|f| f.iter().map(|&c| map[c as usize]).collect()).collect();
        Algebra::new(format!("{}⊗{}", t.name, self.name), t, &ideal, roots)
    }
}

fn unrank(mut i: usize, degs: &[usize]) -> Vec<usize> {
    degs.iter()
        .map(|&d| {
            let e = i % d;
            i /= d;
            e
        })
        .collect()
}

fn rank_of(e: &[usize], degs: &[usize]) -> usize {
    let mut i = 0;
    for (k, &d) in degs.iter().enumerate().rev() {
        i = i * d + e[k];
    }
    i
}

fn ideal_closure(r: &FiniteRing, gens: &[Idx]) -> Vec<Idx> {
    let mut set: BTreeSet<Idx> = BTreeSet::from([r.zero]);
    let multiples: Vec<Idx> = gens
        .iter()
        .flat_map(|&g| (0..r.size as Idx).map(move |a| (g, a)))
        .map(|(g, a)| r.mul(g, a))
        .collect();
    let mut frontier: Vec<Idx> = vec![r.zero];
    while let Some(x) = frontier.pop() {
        for &m in &multiples {
            let y = r.add(x, m);
            if set.insert(y) {
                frontier.push(y);
            }
        }
    }
    set.into_iter().collect()
}

/// The fixed test rings: a non-field, a non-reduced ring and a non-local ring
/// among them, plus F_9 for the descent covers.
pub fn catalog() -> Vec<Arc<FiniteRing>> {
    let f2 = Arc::new(FiniteRing::zmod(2));
    let f3 = Arc::new(FiniteRing::zmod(3));
    let f4 = Algebra::new("F_4", &f2, &[], vec![vec![1, 1]]).expect("F_4").to_ring().0;
    let f9 = Algebra::new("F_9", &f3, &[], vec![vec![1, 0]]).expect("F_9").to_ring().0;
    let dual = Algebra::new("F_2[e]/(e^2)", &f2, &[], vec![vec![0, 0]]).expect("dual").to_ring().0;
    vec![
        f2,
        f3,
        Arc::new(f4),
        Arc::new(f9),
        Arc::new(FiniteRing::zmod(4)),
        Arc::new(dual),
        Arc::new(FiniteRing::zmod(6)),
    ]
}

pub fn catalog_ring(name: &str) -> Option<Arc<FiniteRing>> {
    catalog().into_iter().find(|r| r.name == name)
}

/// Compiled element: coefficient image and sparse exponent list per term.
#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    terms: Vec<(Idx, Vec<(usize, i32)>)>,
}

impl Compiled {
    fn new(e: &Element, r: &FiniteRing) -> Result<Compiled> {
        let mut terms = Vec::with_capacity(e.len());
        for (m, c) in e.terms() {
            let c = r.coefficient(c).ok_or_else(|| {
                AlgebraError::BaseMismatch(format!("coefficient {c} has no image in {}", r.name))
            })?;
            let exps = m.0.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, x)).collect();
            terms.push((c, exps));
        }
        Ok(Compiled { terms })
    }

    fn raw(raw: &[(Coeff, crate::ring::Monomial)], r: &FiniteRing) -> Result<Compiled> {
        let mut terms = Vec::with_capacity(raw.len());
        for (c, m) in raw {
            let c = r.coefficient(c).ok_or_else(|| {
                AlgebraError::BaseMismatch(format!("coefficient {c} has no image in {}", r.name))
            })?;
            let exps = m.0.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, x)).collect();
            terms.push((c, exps));
        }
        Ok(Compiled { terms })
    }

    /// None when a negative power of a non-unit is needed.
    fn eval(&self, r: &FiniteRing, values: &[Idx]) -> Option<Idx> {
        let mut acc = r.zero;
        for (c, exps) in &self.terms {
            let mut prod = *c;
            for &(i, e) in exps {
                let base = if e < 0 { r.inv(values[i])? } else { values[i] };
                prod = r.mul(prod, r.pow(base, e.unsigned_abs()));
            }
            acc = r.add(acc, prod);
        }
        Some(acc)
    }
}

pub(crate) fn evaluate_images(images: &[Element], r: &FiniteRing) -> Result<Vec<Compiled>> {
    images.iter().map(|e| Compiled::new(e, r)).collect()
}

pub(crate) fn eval_all(maps: &[Compiled], r: &FiniteRing, values: &[Idx]) -> Result<Vec<Idx>> {
    maps.iter()
        .map(|m| {
            m.eval(r, values).ok_or_else(|| {
                AlgebraError::AxiomFailure("structure map inverts a non-unit at a point".into())
            })
        })
        .collect()
}

/// Ring maps P → R as generator values; deterministic order.
pub fn enumerate_points(p: &Ring, r: &FiniteRing, budget: u64) -> Result<Vec<Vec<Idx>>> {
    if !r.admits_base(p.base()) {
        return Ok(Vec::new());
    }
    let n = p.ngens();
    let free: Vec<usize> = p.free_generators().collect();
    let units = r.units();
    let all: Vec<Idx> = (0..r.size as Idx).collect();
    let choices: Vec<&[Idx]> = free
        .iter()
        .map(|&i| if p.generators()[i].inverted { units.as_slice() } else { all.as_slice() })
        .collect();
    let mut total: u64 = 1;
    for c in &choices {
        total = total.saturating_mul(c.len() as u64);
    }
    let cap = (r.size as u64).checked_pow(free.len() as u32).unwrap_or(u64::MAX);
    if cap > budget {
        return Err(AlgebraError::SearchBudgetExceeded(format!(
            "{}^{} assignments for {} at {} exceed {budget}",
            r.size,
            free.len(),
            p.name(),
            r.name
        )));
    }
    let odd_char = r.characteristic % 2 == 1;
    let mut elim = Vec::new();
    let mut powers = Vec::new();
    for (i, rule) in p.rules().iter().enumerate() {
        match rule {
            Some(Rule::Eliminate(rhs)) => elim.push((i, Compiled::raw(rhs, r)?)),
            Some(Rule::Power { exponent, rhs }) => powers.push((i, *exponent, Compiled::raw(rhs, r)?)),
            None => {}
        }
    }
    let odd: Vec<usize> = (0..n).filter(|&i| odd_char && p.generators()[i].degree % 2 != 0).collect();
    let points: Vec<Option<Vec<Idx>>> = (0..total)
        .into_par_iter()
        .map(|mut u| {
            let mut v = vec![r.zero; n];
            for (k, &i) in free.iter().enumerate() {
                let c = choices[k];
                v[i] = c[(u % c.len() as u64) as usize];
                u /= c.len() as u64;
            }
            for (i, f) in &elim {
                v[*i] = f.eval(r, &v)?;
            }
            for (i, e, f) in &powers {
                if r.pow(v[*i], *e) != f.eval(r, &v)? {
                    return None;
                }
            }
            if odd.iter().any(|&i| r.mul(v[i], v[i]) != r.zero) {
                return None;
            }
            Some(v)
        })
        .collect();
    Ok(points.into_iter().flatten().collect())
}

/// (Spec A, Spec Γ)(R) with every structure table filled in.
#[derive(Clone, Debug)]
pub struct FiniteGroupoid {
    pub ring: Arc<FiniteRing>,
    pub objects: Vec<Vec<Idx>>,
    pub morphisms: Vec<Vec<Idx>>,
    pub dom: Vec<usize>,
    pub cod: Vec<usize>,
    pub identity: Vec<usize>,
    pub inverse: Vec<usize>,
    /// `(β, α) ↦ β∘α` for every composable pair.
    pub compose: HashMap<(usize, usize), usize>,
    object_index: HashMap<Vec<Idx>, usize>,
    morphism_index: HashMap<Vec<Idx>, usize>,
}

impl FiniteGroupoid {
    pub fn object(&self, v: &[Idx]) -> Option<usize> {
        self.object_index.get(v).copied()
    }

    pub fn morphism(&self, v: &[Idx]) -> Option<usize> {
        self.morphism_index.get(v).copied()
    }

    pub fn hom(&self, x: usize, y: usize) -> Vec<usize> {
        (0..self.morphisms.len()).filter(|&a| self.dom[a] == x && self.cod[a] == y).collect()
    }

    pub fn is_discrete(&self) -> bool {
        (0..self.morphisms.len()).all(|a| self.identity[self.dom[a]] == a)
    }

    pub fn format_point(&self, v: &[Idx]) -> String {
        let parts: Vec<&str> = v.iter().map(|&x| self.ring.label(x)).collect();
        format!("({})", parts.join(","))
    }
}

/// Builds the groupoid at R and checks its axioms exhaustively.
pub fn evaluate_groupoid(h: &HopfAlgebroid, r: &Arc<FiniteRing>, budget: u64) -> Result<FiniteGroupoid> {
    let ring = r.as_ref();
    let objects = enumerate_points(h.a(), ring, budget)?;
    let morphisms = enumerate_points(h.gamma(), ring, budget)?;
    let na = h.a().ngens();
    let object_index: HashMap<Vec<Idx>, usize> =
        objects.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let morphism_index: HashMap<Vec<Idx>, usize> =
        morphisms.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let fail = |what: String| AlgebraError::AxiomFailure(format!("at {}: {what}", ring.name));
    if objects.is_empty() {
        return Ok(FiniteGroupoid {
            ring: r.clone(),
            objects,
            morphisms: Vec::new(),
            dom: Vec::new(),
            cod: Vec::new(),
            identity: Vec::new(),
            inverse: Vec::new(),
            compose: HashMap::new(),
            object_index,
            morphism_index: HashMap::new(),
        });
    }
    let lookup_obj = |v: &[Idx]| object_index.get(v).copied();
    let lookup_mor = |v: &[Idx]| morphism_index.get(v).copied();

    let eta_r = evaluate_images(h.eta_r().images(), ring)?;
    let eps = evaluate_images(h.epsilon().images(), ring)?;
    let conj = evaluate_images(h.conjugation().images(), ring)?;
    let delta = evaluate_images(h.delta().images(), ring)?;

    let mut dom = Vec::with_capacity(morphisms.len());
    let mut cod = Vec::with_capacity(morphisms.len());
    let mut inverse = Vec::with_capacity(morphisms.len());
    for alpha in &morphisms {
        let d = lookup_obj(&alpha[..na]).ok_or_else(|| fail("domain is not an object".into()))?;
        let c = eval_all(&eta_r, ring, alpha)?;
        let c = lookup_obj(&c).ok_or_else(|| fail(format!("codomain of {alpha:?} is not an object")))?;
        let inv = eval_all(&conj, ring, alpha)?;
        let inv = lookup_mor(&inv).ok_or_else(|| fail(format!("inverse of {alpha:?} is not a point")))?;
        dom.push(d);
        cod.push(c);
        inverse.push(inv);
    }
    let mut identity = Vec::with_capacity(objects.len());
    for x in &objects {
        let v = eval_all(&eps, ring, x)?;
        identity.push(lookup_mor(&v).ok_or_else(|| fail(format!("identity of {x:?} is not a point")))?);
    }
    let mut out_of: Vec<Vec<usize>> = vec![Vec::new(); objects.len()];
    for (a, &d) in dom.iter().enumerate() {
        out_of[d].push(a);
    }
    let pairs: u64 = cod.iter().map(|&c| out_of[c].len() as u64).sum();
    if pairs > budget {
        return Err(AlgebraError::SearchBudgetExceeded(format!(
            "{pairs} composable pairs at {}",
            ring.name
        )));
    }
    let composed: Vec<Result<Vec<((usize, usize), usize)>>> = (0..morphisms.len())
        .into_par_iter()
        .map(|a| {
            let mut local = Vec::with_capacity(out_of[cod[a]].len());
            for &b in &out_of[cod[a]] {
                let mut v = morphisms[a].clone();
                v.extend_from_slice(&morphisms[b][na..]);
                let img = eval_all(&delta, ring, &v)?;
                let ba = lookup_mor(&img).ok_or_else(|| {
                    fail(format!("composite of {:?} and {:?} is not a point", morphisms[b], morphisms[a]))
                })?;
                local.push(((b, a), ba));
            }
            Ok(local)
        })
        .collect();
    let mut compose = HashMap::with_capacity(pairs as usize);
    for part in composed {
        compose.extend(part?);
    }
    let g = FiniteGroupoid {
        ring: r.clone(),
        objects,
        morphisms,
        dom,
        cod,
        identity,
        inverse,
        compose,
        object_index,
        morphism_index,
    };
    verify_groupoid(&g, budget)?;
    Ok(g)
}

fn verify_groupoid(g: &FiniteGroupoid, budget: u64) -> Result<()> {
    let name = g.ring.name.clone();
    verify_laws(g, budget).map_err(|e| match e {
        LawError::Budget(n) => AlgebraError::SearchBudgetExceeded(format!("{n} composable triples at {name}")),
        LawError::Axiom(w) => AlgebraError::AxiomFailure(format!("at {name}: {w}")),
    })
}

enum LawError {
    Budget(u64),
    Axiom(String),
}

fn verify_laws(g: &FiniteGroupoid, budget: u64) -> std::result::Result<(), LawError> {
    use LawError::Axiom;
    for (x, &i) in g.identity.iter().enumerate() {
        if g.dom[i] != x || g.cod[i] != x {
            return Err(Axiom(format!("identity of object {x} has the wrong ends")));
        }
    }
    let mut out_of: Vec<Vec<usize>> = vec![Vec::new(); g.objects.len()];
    for (a, &d) in g.dom.iter().enumerate() {
        out_of[d].push(a);
    }
    let triples: u64 = (0..g.morphisms.len())
        .map(|a| out_of[g.cod[a]].iter().map(|&b| out_of[g.cod[b]].len() as u64).sum::<u64>())
        .sum();
    if triples > budget {
        return Err(LawError::Budget(triples));
    }
    (0..g.morphisms.len()).into_par_iter().try_for_each(|a| {
        let (d, c) = (g.dom[a], g.cod[a]);
        let get = |b: usize, a: usize| g.compose.get(&(b, a)).copied();
        if get(a, g.identity[d]) != Some(a) || get(g.identity[c], a) != Some(a) {
            return Err(Axiom(format!("unit law fails for morphism {}", g.format_point(&g.morphisms[a]))));
        }
        let inv = g.inverse[a];
        if get(inv, a) != Some(g.identity[d]) || get(a, inv) != Some(g.identity[c]) {
            return Err(Axiom(format!("inverse law fails for {}", g.format_point(&g.morphisms[a]))));
        }
        for &b in &out_of[c] {
            let ba = get(b, a).ok_or_else(|| Axiom("composable pair without composite".into()))?;
            if g.dom[ba] != d || g.cod[ba] != g.cod[b] {
                return Err(Axiom("composite has the wrong ends".into()));
            }
            for &k in &out_of[g.cod[b]] {
                let lhs = get(k, ba);
                let rhs = get(k, b).and_then(|kb| get(kb, a));
                if lhs != rhs {
                    return Err(Axiom(format!(
                        "associativity fails on ({}, {}, {})",
                        g.format_point(&g.morphisms[k]),
                        g.format_point(&g.morphisms[b]),
                        g.format_point(&g.morphisms[a])
                    )));
                }
            }
        }
        Ok(())
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupoidMapReport {
    pub ring: String,
    pub source_objects: usize,
    pub target_objects: usize,
    pub faithful: bool,
    pub full: bool,
    pub essentially_surjective: bool,
    pub essential_image: usize,
    pub witnesses: Vec<String>,
}

impl GroupoidMapReport {
    pub fn full_and_faithful(&self) -> bool {
        self.full && self.faithful
    }
}

/// Catalog-wide full-and-faithful check of a map. Rings whose search would
/// exceed the budget are listed as skipped.
#[derive(Clone, Debug, Serialize)]
pub struct Corroboration {
    pub catalog_version: u32,
    pub checked: Vec<String>,
    pub skipped: Vec<String>,
    pub counterexample: Option<GroupoidMapReport>,
}

impl Corroboration {
    pub fn verdict(&self) -> Verdict {
        match &self.counterexample {
            None => Verdict::Pass,
            Some(r) => Verdict::fail(
                format!("full and faithful at {}", r.ring),
                r.witnesses.join("; "),
            ),
        }
    }
}

pub fn corroborate(f: &HopfMap, budget: u64) -> Result<Corroboration> {
    let mut out = Corroboration {
        catalog_version: CATALOG_VERSION,
        checked: Vec::new(),
        skipped: Vec::new(),
        counterexample: None,
    };
    for r in catalog() {
        match analyze_map(f, &r, budget) {
            Ok(rep) => {
                out.checked.push(rep.ring.clone());
                if !rep.full_and_faithful() && out.counterexample.is_none() {
                    out.counterexample = Some(rep);
                }
            }
            Err(e) if e.is_budget() => out.skipped.push(r.name().to_string()),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// The functor (Spec B, Spec Σ)(R) → (Spec A, Spec Γ)(R) of a map
/// (A, Γ) → (B, Σ), by precomposition.
pub fn analyze_map(f: &HopfMap, r: &Arc<FiniteRing>, budget: u64) -> Result<GroupoidMapReport> {
    let ring = r.as_ref();
    let src = evaluate_groupoid(&f.target, r, budget)?;
    let tgt = evaluate_groupoid(&f.source, r, budget)?;
    let (f0, f1) = if src.objects.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        (evaluate_images(f.f0.images(), ring)?, evaluate_images(f.f1.images(), ring)?)
    };
    let obj_map = src
        .objects
        .iter()
        .map(|x| {
            let v = eval_all(&f0, ring, x)?;
            tgt.object(&v)
                .ok_or_else(|| AlgebraError::AxiomFailure(format!("f_0 sends {x:?} outside the objects")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mor_map = src
        .morphisms
        .iter()
        .map(|a| {
            let v = eval_all(&f1, ring, a)?;
            tgt.morphism(&v)
                .ok_or_else(|| AlgebraError::AxiomFailure(format!("f_1 sends {a:?} outside the morphisms")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut witnesses = Vec::new();

    let mut faithful = true;
    let mut seen: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for (a, &img) in mor_map.iter().enumerate() {
        if tgt.dom[img] != obj_map[src.dom[a]] || tgt.cod[img] != obj_map[src.cod[a]] {
            return Err(AlgebraError::AxiomFailure("f does not commute with domain or codomain".into()));
        }
        if let Some(&b) = seen.get(&(src.dom[a], src.cod[a], img)) {
            if faithful {
                witnesses.push(format!(
                    "not faithful: {} and {} both map to {}",
                    src.format_point(&src.morphisms[b]),
                    src.format_point(&src.morphisms[a]),
                    tgt.format_point(&tgt.morphisms[img])
                ));
            }
            faithful = false;
        } else {
            seen.insert((src.dom[a], src.cod[a], img), a);
        }
    }

    let mut full = true;
    let hit: HashSet<(usize, usize, usize)> =
        mor_map.iter().enumerate().map(|(a, &img)| (src.dom[a], src.cod[a], img)).collect();
    'outer: for x in 0..src.objects.len() {
        for y in 0..src.objects.len() {
            for alpha in tgt.hom(obj_map[x], obj_map[y]) {
                if !hit.contains(&(x, y, alpha)) {
                    witnesses.push(format!(
                        "not full: {} from {} to {} has no preimage",
                        tgt.format_point(&tgt.morphisms[alpha]),
                        src.format_point(&src.objects[x]),
                        src.format_point(&src.objects[y])
                    ));
                    full = false;
                    break 'outer;
                }
            }
        }
    }

    let image: HashSet<usize> = obj_map.iter().copied().collect();
    let reached: BTreeSet<usize> = (0..tgt.morphisms.len())
        .filter(|&a| image.contains(&tgt.dom[a]))
        .map(|a| tgt.cod[a])
        .collect();
    let essentially_surjective = reached.len() == tgt.objects.len();
    if !essentially_surjective {
        if let Some(z) = (0..tgt.objects.len()).find(|z| !reached.contains(z)) {
            witnesses.push(format!(
                "object {} is not isomorphic to an image object",
                tgt.format_point(&tgt.objects[z])
            ));
        }
    }
    Ok(GroupoidMapReport {
        ring: ring.name.clone(),
        source_objects: src.objects.len(),
        target_objects: tgt.objects.len(),
        faithful,
        full,
        essentially_surjective,
        essential_image: reached.len(),
        witnesses,
    })
}

/// M = R^rank / (relations) over a finite ring.
#[derive(Clone, Debug)]
pub struct FiniteModule {
    pub ring: Arc<FiniteRing>,
    pub rank: usize,
    pub relations: Vec<Vec<Idx>>,
}

/// S ⊗_R M for an R-algebra S: S^rank modulo the S-span of the relations.
struct TensorModule<'a> {
    alg: &'a Algebra,
    rank: usize,
    sub: Vec<Vec<AlgElem>>,
}

impl<'a> TensorModule<'a> {
    fn new(alg: &'a Algebra, m: &FiniteModule, lift: impl Fn(Idx) -> AlgElem) -> TensorModule<'a> {
        let elems = alg.elements();
        let mut gens: Vec<Vec<AlgElem>> = Vec::new();
        for rel in &m.relations {
            let v: Vec<AlgElem> = rel.iter().map(|&c| lift(c)).collect();
            for s in &elems {
                gens.push(v.iter().map(|x| alg.mul(s, x)).collect());
            }
        }
        let zero = vec![alg.zero(); m.rank];
        let mut set: HashSet<Vec<AlgElem>> = HashSet::from([zero.clone()]);
        let mut frontier = vec![zero];
        while let Some(x) = frontier.pop() {
            for g in &gens {
                let y: Vec<AlgElem> = x.iter().zip(g).map(|(a, b)| alg.add(a, b)).collect();
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        let mut sub: Vec<Vec<AlgElem>> = set.into_iter().collect();
        sub.sort();
        TensorModule {
            alg,
            rank: m.rank,
            sub,
        }
    }

    fn canonical(&self, x: &[AlgElem]) -> Vec<AlgElem> {
        self.sub
            .iter()
            .map(|y| x.iter().zip(y).map(|(a, b)| self.alg.add(a, b)).collect::<Vec<_>>())
            .min()
            .expect("submodule contains zero")
    }

    fn elements(&self) -> BTreeSet<Vec<AlgElem>> {
        let base = self.alg.elements();
        let mut out = BTreeSet::new();
        let total = base.len().pow(self.rank as u32);
        for mut u in 0..total {
            let v: Vec<AlgElem> = (0..self.rank)
                .map(|_| {
                    let x = base[u % base.len()].clone();
                    u /= base.len();
                    x
                })
                .collect();
            out.insert(self.canonical(&v));
        }
        out
    }
}

fn module_elements(m: &FiniteModule) -> Vec<Vec<Idx>> {
    let n = m.ring.size;
    let total = n.pow(m.rank as u32);
    (0..total)
        .map(|mut u| {
            (0..m.rank)
                .map(|_| {
                    let x = (u % n) as Idx;
                    u /= n;
                    x
                })
                .collect()
        })
        .collect()
}

/// M → ∏ S_i⊗M ⇉ ∏ S_j⊗S_k⊗M is an equalizer, checked element by element.
/// A non-injective first map is reported as `NotACover`. With a probe T the
/// check is repeated for T⊗M over the cover T⊗S_i.
pub fn check_descent(cover: &[Algebra], m: &FiniteModule, probe: Option<&Algebra>) -> Result<Verdict> {
    if cover.is_empty() {
        return Err(AlgebraError::NotACover("empty family".into()));
    }
    if cover.iter().any(|s| s.base != m.ring) {
        return Err(AlgebraError::PresentationMismatch("cover and module over different rings".into()));
    }
    let r = m.ring.as_ref();
    let tensors: Vec<TensorModule> = cover
        .iter()
        .map(|s| TensorModule::new(s, m, |c| s.embed(c)))
        .collect();
    let mut pairs: Vec<(usize, usize, Algebra)> = Vec::new();
    for j in 0..cover.len() {
        for k in 0..cover.len() {
            pairs.push((j, k, cover[j].tensor(&cover[k])?));
        }
    }
    let pair_modules: Vec<TensorModule> = pairs
        .iter()
        .map(|(_, _, t)| TensorModule::new(t, m, |c| t.embed(c)))
        .collect();

    // canonical forms of M itself: R^n modulo the relation span
    let trivial = Algebra::trivial(&m.ring);
    let own = TensorModule::new(&trivial, m, |c| trivial.embed(c));
    let mut image: BTreeSet<Vec<Vec<AlgElem>>> = BTreeSet::new();
    let mut seen_m: HashMap<Vec<AlgElem>, Vec<Vec<AlgElem>>> = HashMap::new();
    for v in module_elements(m) {
        let mv = own.canonical(&v.iter().map(|&c| trivial.embed(c)).collect::<Vec<_>>());
        if seen_m.contains_key(&mv) {
            continue;
        }
        let e: Vec<Vec<AlgElem>> = cover
            .iter()
            .zip(&tensors)
            .map(|(s, t)| t.canonical(&v.iter().map(|&c| s.embed(c)).collect::<Vec<_>>()))
            .collect();
        if let Some((other, _)) = seen_m.iter().find(|(_, img)| **img == e) {
            let a: Vec<String> = mv.iter().map(|x| trivial.label(x)).collect();
            let b: Vec<String> = other.iter().map(|x| trivial.label(x)).collect();
            let diff: Vec<String> = mv
                .iter()
                .zip(other)
                .map(|(x, y)| r.label(r.sub(x[0], y[0])).to_string())
                .collect();
            return Err(AlgebraError::NotACover(format!(
                "({}) and ({}) have the same image; ({}) lies in the kernel over {}",
                a.join(","),
                b.join(","),
                diff.join(","),
                r.name
            )));
        }
        seen_m.insert(mv, e.clone());
        image.insert(e);
    }

    // equalizer: tuples x with ι_1(x_j) = ι_2(x_k) in S_j⊗S_k⊗M
    let factors: Vec<Vec<Vec<AlgElem>>> = tensors.iter().map(|t| t.elements().into_iter().collect()).collect();
    let count: u128 = factors.iter().map(|f| f.len() as u128).product();
    if count > DEFAULT_BUDGET as u128 {
        return Err(AlgebraError::SearchBudgetExceeded(format!("{count} cover elements")));
    }
    let mut equalizer = 0usize;
    for mut u in 0..count as usize {
        let x: Vec<&Vec<AlgElem>> = factors
            .iter()
            .map(|f| {
                let e = &f[u % f.len()];
                u /= f.len();
                e
            })
            .collect();
        let mut equal = true;
        for ((j, k, t), tm) in pairs.iter().zip(&pair_modules) {
            let (dj, dk) = (cover[*j].degrees(), cover[*k].degrees());
            let left: Vec<AlgElem> = x[*j].iter().map(|a| t.include(a, &dj, 0)).collect();
            let right: Vec<AlgElem> = x[*k].iter().map(|a| t.include(a, &dk, dj.len())).collect();
            if tm.canonical(&left) != tm.canonical(&right) {
                equal = false;
                break;
            }
        }
        if !equal {
            continue;
        }
        equalizer += 1;
        let key: Vec<Vec<AlgElem>> = x.iter().map(|v| (*v).clone()).collect();
        if !image.contains(&key) {
            let shown: Vec<String> = key
                .iter()
                .zip(cover)
                .map(|(v, s)| v.iter().map(|a| s.label(a)).collect::<Vec<_>>().join(","))
                .collect();
            return Ok(Verdict::fail(
                format!("M → ∏S⊗M is the equalizer over {}", r.name),
                format!("({}) is equalized but not in the image", shown.join(" | ")),
            ));
        }
    }
    if equalizer != image.len() {
        return Ok(Verdict::fail(
            format!("M → ∏S⊗M is the equalizer over {}", r.name),
            format!("{} equalized elements vs image of size {}", equalizer, image.len()),
        ));
    }

    if let Some(t) = probe {
        let (tr, map) = t.to_ring();
        let tr = Arc::new(tr);
        let cover_t = cover.iter().map(|s| s.base_change(&tr, &map)).collect::<Result<Vec<_>>>()?;
        let mt = FiniteModule {
            ring: tr.clone(),
            rank: m.rank,
            relations: m.relations.iter().map(|v| v.iter().map(|&c| map[c as usize]).collect()).collect(),
        };
        return check_descent(&cover_t, &mt, None);
    }
    Ok(Verdict::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::BaseRing;
    use crate::ring::PresentationBuilder;

    #[test]
    fn catalog_rings_are_rings() {
        for r in catalog() {
            let n = r.size;
            let labels = r.labels.clone();
            FiniteRing::from_tables(r.name(), labels, r.add.clone(), r.mul.clone(), r.zero, r.one).unwrap();
            assert!(n >= 2);
        }
        let f4 = catalog_ring("F_4").unwrap();
        assert_eq!(f4.units().len(), 3);
        let f9 = catalog_ring("F_9").unwrap();
        assert_eq!(f9.units().len(), 8);
        assert_eq!(catalog_ring("Z/6").unwrap().units().len(), 2);
        assert_eq!(catalog_ring("F_2[e]/(e^2)").unwrap().units().len(), 2);
    }

    #[test]
    fn points_of_small_presentations() {
        let f2 = catalog_ring("F_2").unwrap();
        let f3 = catalog_ring("F_3").unwrap();
        let mut b = PresentationBuilder::new("Z[x]", BaseRing::Integers, 8);
        b.generator("x", 2);
        assert_eq!(enumerate_points(&b.build().unwrap(), &f2, DEFAULT_BUDGET).unwrap().len(), 2);
        let mut b = PresentationBuilder::new("F_2[x]/x^2", BaseRing::PrimeField(2), 8);
        b.generator("x", 2).relation("x", 2, vec![]);
        assert_eq!(enumerate_points(&b.build().unwrap(), &f2, DEFAULT_BUDGET).unwrap(), vec![vec![0]]);
        let mut b = PresentationBuilder::new("F_3[x^±]", BaseRing::PrimeField(3), 8);
        b.generator("x", 2).invert("x").unwrap();
        let pts = enumerate_points(&b.build().unwrap(), &f3, DEFAULT_BUDGET).unwrap();
        assert_eq!(pts, vec![vec![1], vec![2]]);
        assert!(enumerate_points(&b.build().unwrap(), &f2, DEFAULT_BUDGET).unwrap().is_empty());
    }

    #[test]
    fn budget_is_enforced() {
        let mut b = PresentationBuilder::new("Z[x,y,z]", BaseRing::Integers, 8);
        b.generator("x", 2).generator("y", 2).generator("z", 2);
        let r = catalog_ring("F_9").unwrap();
        assert!(matches!(
            enumerate_points(&b.build().unwrap(), &r, 100),
            Err(AlgebraError::SearchBudgetExceeded(_))
        ));
    }

    #[test]
    fn field_extension_descends() {
        let f2 = catalog_ring("F_2").unwrap();
        let f4 = Algebra::new("F_4", &f2, &[], vec![vec![1, 1]]).unwrap();
        let m = FiniteModule {
            ring: f2.clone(),
            rank: 1,
            relations: vec![],
        };
        assert!(check_descent(&[f4.clone()], &m, None).unwrap().passed());
        assert!(check_descent(&[Algebra::trivial(&f2)], &m, None).unwrap().passed());
        assert!(check_descent(&[f4.clone(), f4], &m, None).unwrap().passed());
    }

    #[test]
    fn projection_is_not_a_cover() {
        let f2 = FiniteRing::zmod(2);
        let r = Arc::new(FiniteRing::product(&f2, &f2));
        let e2 = r.element("(0,1)").unwrap();
        let s = Algebra::new("F_2", &r, &[e2], vec![]).unwrap();
        let m = FiniteModule {
            ring: r.clone(),
            rank: 1,
            relations: vec![],
        };
        match check_descent(&[s], &m, None) {
            Err(AlgebraError::NotACover(w)) => assert!(w.contains("(0,1)"), "{w}"),
            other => panic!("expected NotACover, got {other:?}"),
        }
    }
    #[test]
    fn mu_two_over_f3() {
        let h = crate::hopf::grouplike_cyclic(3, 2).unwrap();
        let f3 = catalog_ring("F_3").unwrap();
        let g = evaluate_groupoid(&h, &f3, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.objects.len(), 1);
        assert_eq!(g.morphisms, vec![vec![1], vec![2]]);
        assert_eq!(g.compose[&(1, 1)], 0);
        assert_eq!(g.identity, vec![0]);
        let f2 = catalog_ring("F_2").unwrap();
        assert!(evaluate_groupoid(&h, &f2, DEFAULT_BUDGET).unwrap().objects.is_empty());
    }

    #[test]
    fn corrupted_diagonal_is_caught() {
        let h = crate::hopf::grouplike_cyclic(3, 2).unwrap();
        let p2 = h.powers().power(2).unwrap();
        let bad = h.with_delta(vec![Element::generator(&p2, "x|1").unwrap()]).unwrap();
        let f3 = catalog_ring("F_3").unwrap();
        assert!(matches!(evaluate_groupoid(&bad, &f3, DEFAULT_BUDGET), Err(AlgebraError::AxiomFailure(_))));
    }

    #[test]
    fn unit_algebroid_is_discrete() {
        let mut b = PresentationBuilder::new("Z[x]", BaseRing::Integers, 8);
        b.generator("x", 2);
        let h = HopfAlgebroid::unit(&b.build().unwrap()).unwrap();
        for r in catalog() {
            let g = evaluate_groupoid(&h, &r, DEFAULT_BUDGET).unwrap();
            assert!(g.is_discrete());
            assert_eq!(g.objects.len(), r.size());
            let rep = analyze_map(&HopfMap::identity(&h), &r, DEFAULT_BUDGET).unwrap();
            assert!(rep.full && rep.faithful && rep.essentially_surjective);
        }
    }
}
