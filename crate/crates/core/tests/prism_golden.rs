use patternmc::fixtures::{yoshi_mixture, WORKED_THETA};
use patternmc::prism::export_prism;

const GOLDEN: &str = include_str!("../fixtures/yoshi_umm.prism");

#[test]
fn bundled_model_matches_golden_file() {
    let text = export_prism(&yoshi_mixture(), &WORKED_THETA, "m").unwrap().text();
    assert_eq!(text, GOLDEN);
}

#[test]
fn export_is_deterministic() {
    let m = yoshi_mixture();
    let a = export_prism(&m, &[0.25, 0.75], "x").unwrap().text();
    let b = export_prism(&m, &[0.25, 0.75], "x").unwrap().text();
    assert_eq!(a, b);
}
