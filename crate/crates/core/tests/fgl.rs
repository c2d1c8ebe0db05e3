use std::time::Instant;

use algebroid_core::fgl::{bp_data, johnson_wilson, primitive_mod_in, quotient_localize};
use algebroid_core::hopf::check_hopf_axioms;

#[test]
fn bp_axioms_at_both_primes() {
    for (p, d) in [(2, 16), (3, 40)] {
        let t = Instant::now();
        let b = bp_data(p, d).unwrap();
        let v = check_hopf_axioms(&b.algebroid, d);
        eprintln!("p={p} D={d}: {v:?} in {:?}", t.elapsed());
        assert!(v.passed());
    }
}

#[test]
fn primitivity_low_heights() {
    for p in [2u64, 3] {
        let d = 2 * (p.pow(2) as i64 - 1);
        let b = bp_data(p, d).unwrap();
        for n in 1..=2 {
            assert!(primitive_mod_in(&b, n).unwrap(), "p={p} n={n}");
        }
    }
}

#[test]
fn johnson_wilson_targets() {
    let b = bp_data(3, 40).unwrap();
    let h = quotient_localize(&b, 1).unwrap();
    assert!(check_hopf_axioms(&h, 40).passed());
    for m in 1..=2 {
        let t = Instant::now();
        let (e, map) = johnson_wilson(&b, m, 1).unwrap();
        let v = check_hopf_axioms(&e, 40);
        eprintln!("m={m}: {} {v:?} in {:?}", e.gamma().name(), t.elapsed());
        assert!(v.passed());
        assert!(map.check(40).passed());
    }
}
