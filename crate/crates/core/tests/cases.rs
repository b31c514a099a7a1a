use morpd::network::{bundled_case, control_bounds, load_case, ControlVector};
use morpd::powerflow::evaluate;
use morpd::Case;

fn data(name: &str) -> String {
    format!("{}/data/{name}.case", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn bundled_case_shapes() {
    // (name, generators, transformers, shunts, branches, controls)
    for (name, g, t, s, b, dim) in [("ieee30", 6, 4, 3, 41, 13), ("ieee118", 54, 9, 15, 186, 78)] {
        let c: Case = bundled_case(name).unwrap();
        assert_eq!(c.generators.len(), g, "{name}");
        assert_eq!(c.transformers.len(), t, "{name}");
        assert_eq!(c.shunts.len(), s, "{name}");
        assert_eq!(c.branches.len(), b, "{name}");
        assert_eq!(control_bounds(&c).dimension(), dim, "{name}");
    }
    assert!(bundled_case::<f64>("ieee57").is_err());
}

#[test]
fn file_and_bundled_copies_agree() {
    for name in ["ieee30", "ieee118"] {
        let from_file: Case = load_case(data(name)).unwrap();
        let bundled: Case = bundled_case(name).unwrap();
        assert_eq!(from_file.buses, bundled.buses);
        assert_eq!(from_file.branches, bundled.branches);
        assert_eq!(from_file.generators, bundled.generators);
    }
}

#[test]
fn case_defaults_solve() {
    for name in ["ieee30", "ieee118"] {
        let c: Case = bundled_case(name).unwrap();
        let e = evaluate(&c, &ControlVector::from_case(&c)).unwrap();
        assert!(!e.violation.non_convergence, "{name}");
        assert!(e.max_mismatch <= 1e-6);
        assert!(e.objectives.p_loss > 0.0 && e.objectives.vd > 0.0);
    }
}

#[test]
fn edited_case_file_is_validated() {
    let text = std::fs::read_to_string(data("ieee30")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("two_slacks.case");
    // promote bus 2 to a second slack
    std::fs::write(&p, text.replacen("\n2  2  21.7", "\n2  3  21.7", 1)).unwrap();
    assert!(load_case::<f64>(&p).is_err());
    assert!(load_case::<f64>(dir.path().join("missing.case")).is_err());
}
