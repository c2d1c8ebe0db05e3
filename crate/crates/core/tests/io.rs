use algebroid_core::cobar::{ext_dims, CobarComplex, Window};
use algebroid_core::comodule::{catalog, check_comodule};
use algebroid_core::fgl::{bp_data, johnson_wilson, quotient_localize};
use algebroid_core::hopf::check_hopf_axioms;
use algebroid_core::io::*;
use algebroid_core::AlgebraError;

#[test]
fn bp_algebroid_roundtrips() {
    let b = bp_data(2, 16).unwrap();
    let text = write_algebroid(&b.algebroid).unwrap();
    let h = parse_algebroid(&Source::new("bp.toml", text.clone())).unwrap();
    assert!(check_hopf_axioms(&h, 16).passed());
    assert_eq!(h.a().fingerprint(), b.algebroid.a().fingerprint());
    assert_eq!(write_algebroid(&h).unwrap(), text);
}

#[test]
fn induced_target_roundtrips_with_weights() {
    let b = bp_data(3, 16).unwrap();
    let (jw, _) = johnson_wilson(&b, 1, 1).unwrap();
    let text = write_algebroid(&jw).unwrap();
    assert!(text.contains("[weights]"));
    let back = parse_algebroid(&Source::new("e1.toml", text)).unwrap();
    assert_eq!(back.gamma().fingerprint(), jw.gamma().fingerprint());
    let win = Window {
        s_max: 2,
        t_min: -8,
        t_max: 8,
        weight: 8,
        stable_weight: 16,
    };
    let left = ext_dims(&CobarComplex::unit(&jw).unwrap(), &win).unwrap();
    let right = ext_dims(&CobarComplex::unit(&back).unwrap(), &win).unwrap();
    assert_eq!(left.to_csv(), right.to_csv());
}

#[test]
fn catalog_comodules_roundtrip() {
    for m in catalog().unwrap() {
        let text = write_comodule(&m, None);
        let back = parse_comodule(&Source::new("m.toml", text.clone()), &m.algebroid)
            .unwrap_or_else(|e| panic!("{}: {e}\n{text}", m.name));
        assert_eq!(back.psi, m.psi, "{}", m.name);
        assert!(check_comodule(&back, 8).passed());
    }
}

#[test]
fn presentation_with_power_rule() {
    let text = r#"
name = "T"

[base]
ring = "prime-field"
prime = 3

[generators]
x = 2
y = 4

[relations]
"x^3" = "0"
y = "x^2"

[truncation]
degree = 24
"#;
    let r = parse_presentation(&Source::new("t.toml", text)).unwrap();
    assert_eq!(r.degree_basis(6).unwrap().len(), 0);
    assert_eq!(r.degree_basis(4).unwrap().len(), 1);
    let again = parse_presentation(&Source::new("t2.toml", write_presentation(&r).unwrap())).unwrap();
    assert_eq!(again.fingerprint(), r.fingerprint());
}

#[test]
fn diagnostics_name_the_line() {
    let text = "name = \"T\"\n\n[base]\nprime = 3\n\n[generators]\nx = 2\n\n[relations]\nx = \"y + \"\n\n[truncation]\ndegree = 8\n";
    match parse_presentation(&Source::new("bad.toml", text)) {
        Err(AlgebraError::Parse { location: Some(l), .. }) => assert_eq!(l, "bad.toml:10"),
        other => panic!("expected a parse error, got {other:?}"),
    }
    match parse_presentation(&Source::new("syntax.toml", "[base\nprime = 3\n")) {
        Err(AlgebraError::Parse { location: Some(l), .. }) => assert!(l.starts_with("syntax.toml:1"), "{l}"),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn map_files_resolve_relative_paths() {
    let dir = std::env::temp_dir().join(format!("algebroid-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let b = bp_data(3, 8).unwrap();
    let k1 = quotient_localize(&b, 1).unwrap();
    let (jw, f) = johnson_wilson(&b, 1, 1).unwrap();
    std::fs::write(dir.join("k1.toml"), write_algebroid(&k1).unwrap()).unwrap();
    std::fs::write(dir.join("e1.toml"), write_algebroid(&jw).unwrap()).unwrap();
    std::fs::write(dir.join("jw.toml"), write_map(&f, "k1.toml", "e1.toml")).unwrap();
    let back = read_map(&dir.join("jw.toml")).unwrap();
    assert!(back.check(8).passed());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn descent_problem_file() {
    let text = r#"
base = "F_3"

[[cover]]
name = "F_9"
roots = [["1", "0"]]

[module]
rank = 2
relations = [["1", "2"]]
"#;
    let d = parse_descent(&Source::new("d.toml", text)).unwrap();
    let v = algebroid_core::finite::check_descent(&d.cover, &d.module, d.probe.as_ref()).unwrap();
    assert!(v.passed());
}

