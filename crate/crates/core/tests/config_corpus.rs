//! The shipped demo configurations must parse to exactly the systems the
//! test fixtures build programmatically, so the CLI examples and the
//! test suites can never drift apart.

mod common;

use gurevic::config::parse_system;
use gurevic::skew::SkewSystem;
use std::path::Path;

fn load(name: &str) -> gurevic::config::ParsedConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    parse_system(&text).unwrap_or_else(|e| panic!("parsing {name}: {e}"))
}

fn assert_same_system(name: &str, parsed: &SkewSystem, fixture: &SkewSystem) {
    let (a, b) = (parsed.shift(), fixture.shift());
    assert_eq!(a.state_count(), b.state_count(), "{name}: state count");
    for i in 0..a.state_count() as u32 {
        for j in 0..a.state_count() as u32 {
            assert_eq!(a.allowed(i, j), b.allowed(i, j), "{name}: edge {i}->{j}");
            assert_eq!(
                parsed.potential().edge(i, j),
                fixture.potential().edge(i, j),
                "{name}: potential at {i}->{j}"
            );
        }
    }
    assert_eq!(
        parsed.cocycle().kind(),
        fixture.cocycle().kind(),
        "{name}: group"
    );
    assert_eq!(
        parsed.cocycle().values(),
        fixture.cocycle().values(),
        "{name}: cocycle values"
    );
}

#[test]
fn demo_configs_match_fixtures() {
    let pairs: Vec<(&str, SkewSystem)> = vec![
        ("golden_mean.cfg", common::golden_mean_trivial()),
        ("full2_sym.cfg", common::full2_sym()),
        ("full2_asym.cfg", common::full2_asym()),
        ("full3_z.cfg", common::full3_z()),
        ("full4_f2.cfg", common::full4_f2()),
        ("full4_heis.cfg", common::full4_heis()),
        ("full4_z2.cfg", common::full4_z2()),
        ("cyclic3.cfg", common::cyclic3()),
    ];
    for (name, fixture) in &pairs {
        let cfg = load(name);
        assert_same_system(name, &cfg.system, fixture);
    }
}

#[test]
fn zeta_config_matches_family_truncation() {
    let cfg = load("zeta2.cfg");
    let fam = cfg.family.expect("zeta2.cfg declares a family");
    assert_eq!(fam.family.name(), "zeta");
    assert!((fam.family.delta() - std::f64::consts::LN_2).abs() < 1e-15);
    // the [shift] section of the config is the family's N = 2 truncation
    let (shift, phi, coc) = fam.family.truncate(2).unwrap();
    let sys = SkewSystem::new(shift, phi, coc).unwrap();
    assert_same_system("zeta2.cfg", &cfg.system, &sys);
}

#[test]
fn every_config_in_corpus_is_covered() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let covered = [
        "golden_mean.cfg",
        "full2_sym.cfg",
        "full2_asym.cfg",
        "full3_z.cfg",
        "full4_f2.cfg",
        "full4_heis.cfg",
        "full4_z2.cfg",
        "cyclic3.cfg",
        "zeta2.cfg",
    ];
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("cfg") {
            let name = path.file_name().unwrap().to_str().unwrap().to_string();
            assert!(
                covered.contains(&name.as_str()),
                "config {name} is not pinned by the corpus test"
            );
        }
    }
}
