use std::collections::BTreeMap;
use std::sync::OnceLock;

use proptest::prelude::*;

use algebroid_core::cobar::{check_d_squared, compare_ext, ext_dims, CobarComplex, ExtTable, Window};
use algebroid_core::comodule::{check_comodule, Comodule};
use algebroid_core::fgl::{bp_data, johnson_wilson, quotient_localize};
use algebroid_core::hopf::{check_hopf_axioms, primitive_truncated, HopfAlgebroid};
use algebroid_core::io::{parse_algebroid, Source};
use algebroid_core::linalg::fp_rank;
use algebroid_core::{Coeff, Element};

fn algebroids() -> &'static Vec<HopfAlgebroid> {
    static CELL: OnceLock<Vec<HopfAlgebroid>> = OnceLock::new();
    CELL.get_or_init(|| {
        let b = bp_data(3, 24).unwrap();
        vec![
            quotient_localize(&b, 1).unwrap(),
            johnson_wilson(&b, 1, 1).unwrap().0,
            johnson_wilson(&b, 2, 1).unwrap().0,
            primitive_truncated(3, 2, 3, 24).unwrap(),
            primitive_truncated(2, 1, 2, 24).unwrap(),
        ]
    })
}

fn residue(c: &Coeff) -> u32 {
    match c {
        Coeff::Fp(v, _) => *v as u32,
        Coeff::Q(_) => panic!("expected a prime field coefficient"),
    }
}

/// Dimension of {a ∈ A_t of weight ≤ w : η_R(a) = η_L(a)}, from the ring
/// structure alone.
fn primitives(h: &HopfAlgebroid, t: i64, w: i64) -> usize {
    let p = h.gamma().base().prime().unwrap();
    let eta_l = h.eta_l();
    let basis = h.a().degree_basis_within(t, w).unwrap();
    let mut columns = BTreeMap::new();
    let rows: Vec<_> = basis
        .iter()
        .map(|m| {
            let a = Element::from_terms(h.a(), vec![(h.a().base().one(), m.clone())]).unwrap();
            let d = h.eta_r().apply(&a).unwrap().sub(&eta_l.apply(&a).unwrap()).unwrap();
            let mut row: Vec<(u32, u32)> = d
                .terms()
                .map(|(mono, c)| {
                    let next = columns.len() as u32;
                    (*columns.entry(mono.clone()).or_insert(next), residue(c))
                })
                .collect();
            row.sort_unstable();
            row
        })
        .collect();
    basis.len() - fp_rank(p, rows)
}

fn window(w: i64, w2: i64) -> Window {
    Window {
        s_max: 2,
        t_min: -12,
        t_max: 12,
        weight: w,
        stable_weight: w2,
    }
}

fn unit_ext(h: &HopfAlgebroid, win: &Window) -> ExtTable {
    ext_dims(&CobarComplex::unit(h).unwrap(), win).unwrap()
}

#[test]
fn ext_zero_is_the_primitives() {
    let win = window(8, 16);
    for h in algebroids() {
        let table = unit_ext(h, &win);
        for t in win.t_min..=win.t_max {
            let want = primitives(h, t, win.weight);
            assert_eq!(table.dim(0, t), Some(want), "{} t={t}", h.name());
        }
    }
}

const TRANSLATION: &str = r#"name = "F_3[a,t]"

[base]
ring = "prime-field"
prime = 3

[generators]
a = 4
t = 4

[truncation]
degree = 24

[algebroid]
name = "translation"
object_ring = "F_3[a]"
objects = 1

[maps.etaR]
a = "a + t"

[maps.epsilon]
t = "0"

[maps.c]
t = "2*t"

[maps.delta]
t = "l(t) + r(t)"
"#;

#[test]
fn wrong_right_unit_shows_up_in_ext_zero() {
    let h = parse_algebroid(&Source::new("translation.toml", TRANSLATION)).unwrap();
    assert!(check_hopf_axioms(&h, 24).passed());
    let a = Element::generator(h.gamma(), "a").unwrap();
    let faulty = h.with_eta_r(vec![a]).unwrap();
    let win = Window {
        s_max: 3,
        t_min: 0,
        t_max: 12,
        weight: 12,
        stable_weight: 24,
    };
    let good = unit_ext(&h, &win);
    for e in &good.entries {
        assert_eq!(e.dim, usize::from(e.s == 0 && e.t == 0), "{e:?}");
    }
    let diff = compare_ext(&good, &unit_ext(&faulty, &win));
    let first = diff.first().expect("the fault must change Ext");
    let expected = (win.t_min..=win.t_max)
        .find(|&t| primitives(&h, t, win.weight) != primitives(&faulty, t, win.weight))
        .unwrap();
    assert_eq!((first.s, first.t), (0, expected));
    assert_eq!(expected, 4);
}

#[test]
fn direct_sums_add_and_ignore_order() {
    let k1 = &algebroids()[0];
    let g = k1.gamma();
    let pair = Comodule::new(
        "pair",
        k1,
        vec![("m".into(), 4), ("n".into(), 0)],
        vec![
            vec![Element::one(g), Element::generator(g, "t1").unwrap()],
            vec![Element::zero(g), Element::one(g)],
        ],
    )
    .unwrap();
    assert!(check_comodule(&pair, 24).passed());
    let unit = Comodule::unit(k1);
    let win = Window {
        s_max: 2,
        t_min: -8,
        t_max: 8,
        weight: 4,
        stable_weight: 8,
    };
    let dims = |m: &Comodule| ext_dims(&CobarComplex::new(m).unwrap(), &win).unwrap();
    let a = dims(&pair.direct_sum(&unit).unwrap());
    let b = dims(&unit.direct_sum(&pair).unwrap());
    assert!(compare_ext(&a, &b).is_empty());
    let (x, y) = (dims(&pair), dims(&unit));
    for e in &a.entries {
        assert_eq!(Some(e.dim), Some(x.dim(e.s, e.t).unwrap() + y.dim(e.s, e.t).unwrap()), "{e:?}");
    }
}

#[test]
fn unstable_window_reports_spurious_classes() {
    let b = bp_data(3, 48).unwrap();
    let k1 = quotient_localize(&b, 1).unwrap();
    let (jw, _) = johnson_wilson(&b, 1, 1).unwrap();
    let run = |w2: i64| {
        let win = Window {
            s_max: 3,
            t_min: -16,
            t_max: 16,
            weight: 24,
            stable_weight: w2,
        };
        compare_ext(&unit_ext(&k1, &win), &unit_ext(&jw, &win))
    };
    assert!(run(48).is_empty());
    let collapsed = run(24);
    assert!(!collapsed.is_empty());
    assert!(collapsed.mismatches.iter().all(|m| m.s >= 2), "{:?}", collapsed.mismatches);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn d_squared_vanishes(k in 0usize..5, s in 0usize..2, t in -8i64..=8, w in 0i64..12) {
        let h = &algebroids()[k];
        let c = CobarComplex::unit(h).unwrap();
        let v = check_d_squared(&c, s, t, w);
        prop_assert!(v.passed(), "{}: {v:?}", h.name());
    }
}
