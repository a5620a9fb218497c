mod common;

use common::*;

#[test]
fn oracle_matches_closed_form_for_one_gaussian() {
    // e^{uΔ} of exp(-y²/w²) is w/√(w²+4u) exp(-x²/(w²+4u)); T over one piece telescopes
    let w: f64 = 0.5;
    let f = PiecewiseInput {
        len: 1.0,
        pieces: vec![Mixture { parts: vec![(1.0, 0.0, w)] }],
    };
    let heat = |u: f64, x: f64| w / (w * w + 4.0 * u).sqrt() * (-x * x / (w * w + 4.0 * u)).exp();
    for (t, x) in [(0.5, 0.1), (1.5, -0.7), (2.0, 1.3)] {
        let exact = if t < 1.0 { heat(t, x) - heat(0.0, x) } else { heat(t, x) - heat(t - 1.0, x) };
        let got = duhamel(&f, t, x, 1e-12);
        assert!((got - exact).abs() < 1e-7, "t={t} x={x}: {got} vs {exact}");
    }
}

#[test]
fn telescoping_agrees_with_duhamel() {
    let f = PiecewiseInput::random(11, 4, 0.5);
    let e = telescoping_discrepancy(&f, DEFAULT_H);
    let e2 = telescoping_discrepancy(&f, 0.5 * DEFAULT_H);
    assert!(e < 1e-3, "{e:e}");
    // second order in h
    assert!((e / e2 - 4.0).abs() < 0.05, "{e:e} {e2:e}");
}
