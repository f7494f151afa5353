use bergman_core::operators::FunctionalSelector;
use bergman_harness::experiments::{equivalence, measures};

#[test]
fn grid_volume_of_centered_disc() {
    // v_0(D(0, gamma)) = tanh^2 gamma in one variable
    for gamma in [0.5f64, 1.0] {
        let got = measures::disc_grid_volume(0.0, gamma, 0.0, 1500);
        assert!((got / gamma.tanh().powi(2) - 1.0).abs() < 1e-3, "{gamma}: {got}");
    }
}

#[test]
fn grid_volume_off_center() {
    // v_0(D(z, gamma)) = (1-|z|^2)^2 r^2 / (1 - |z|^2 r^2)^2 with r = tanh gamma
    let (z, gamma) = (0.5f64, 1.0f64);
    let r2 = gamma.tanh().powi(2);
    let want = (1.0 - z * z).powi(2) * r2 / (1.0 - z * z * r2).powi(2);
    let got = measures::disc_grid_volume(z, gamma, 0.0, 1500);
    assert!((got / want - 1.0).abs() < 2e-3, "{got} vs {want}");
}

#[test]
fn constant_function_values() {
    let tent = FunctionalSelector::Tent { gamma: 1.0, q: 2.0 };
    assert!((equivalence::constant_value(&tent, 1) - 1f64.sinh()).abs() < 1e-15);
    assert_eq!(equivalence::constant_value(&FunctionalSelector::Maximal { gamma: 1.0 }, 2), 1.0);
    assert_eq!(equivalence::constant_value(&FunctionalSelector::AreaGrad { gamma: 1.0, q: 2.0 }, 2), 0.0);
    assert!(equivalence::selectors("hlmax-k", 1.0, 2.0, &[1, 2]).unwrap().len() == 2);
    assert!(equivalence::selectors("nope", 1.0, 2.0, &[1]).is_err());
}
