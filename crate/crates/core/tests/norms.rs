use fraccalc::norms::{gagliardo_seminorm, holder_exponent, lp_norm, lp_norm_on, pairing, sbv_norm, total_variation};
use fraccalc::operators::rl_integral;
use fraccalc::{CorpusFunction, FracParams, Grid, GridField, Jump, PowerTerm, SbvFunction};
use proptest::prelude::*;

fn sample(spec: &str, n: usize) -> SbvFunction {
    spec.parse::<CorpusFunction>().unwrap().sample(&Grid::unit(n).unwrap()).unwrap()
}

#[test]
fn step_lp_norms() {
    let u = sample("heaviside:0.3", 64).scaled(2.0);
    for p in [1.0, 1.5, 2.0, 3.0] {
        let want = 2.0 * 0.7f64.powf(1.0 / p);
        assert!((lp_norm(&u, p).unwrap().value - want).abs() < 1e-10, "p = {p}");
    }
    assert!((lp_norm_on(&u, 1.0, 0.0, 0.5).unwrap().value - 0.4).abs() < 1e-12);
}

#[test]
fn singular_power_is_integrated_exactly() {
    let g = Grid::unit(128).unwrap();
    let u = GridField::new(g, vec![0.0; 129], vec![PowerTerm::left(0.0, 1.0, -0.5)]).unwrap();
    assert!((lp_norm(&u, 1.0).unwrap().value - 2.0).abs() < 1e-12);
    // ∫ x^{−1/2} dx over [0.25, 1]
    assert!((lp_norm_on(&u, 1.0, 0.25, 1.0).unwrap().value - 1.0).abs() < 1e-12);
    // p = 1.5: ∫ x^{−3/4} dx = 4
    assert!((lp_norm(&u, 1.5).unwrap().value - 4f64.powf(2.0 / 3.0)).abs() < 1e-8);
}

#[test]
fn sign_changes_are_resolved() {
    // |x − 1/3| on [0, 1] integrates to 5/18.
    let u = sample("poly:-0.3333333333333333,1", 10);
    assert!((lp_norm(&u, 1.0).unwrap().value - 5.0 / 18.0).abs() < 1e-12);
}

#[test]
fn pairing_with_closure() {
    let u = sample("heaviside:0.5", 32);
    let v = pairing(&u, &|x: f64| x);
    assert!((v - 0.375).abs() < 1e-12);
}

#[test]
fn gagliardo_stabilizes_under_refinement() {
    for (spec, s) in [("power:1", 0.5), ("poly:0,1,-3,2", 0.5), ("poly:0,1,-3,2", 0.3)] {
        let vals: Vec<f64> =
            [64, 128, 256].iter().map(|&n| gagliardo_seminorm(&sample(spec, n), s, 1.0).unwrap().value).collect();
        for w in vals.windows(2) {
            assert!(w[1] <= 1.01 * w[0], "{spec}: {vals:?}");
            assert!((w[1] - w[0]).abs() <= 0.02 * w[0], "{spec}: {vals:?}");
        }
    }
}

#[test]
fn gagliardo_rejects_jumps_when_sp_reaches_one() {
    let u = sample("heaviside:0.5", 32);
    assert!(gagliardo_seminorm(&u, 0.5, 2.0).is_err());
    assert!(gagliardo_seminorm(&u, 0.5, 1.5).is_ok());
    assert!(gagliardo_seminorm(&sample("power:1", 32), 0.6, 2.0).is_ok());
}

#[test]
fn integrals_gain_holder_regularity() {
    for spec in ["heaviside:0.5", "constant:1", "cantor:12", "poly:1,-2,0.5"] {
        let u = sample(spec, 1024);
        for s in [0.3, 0.5, 0.7] {
            let iu = rl_integral(&u, FracParams::left(s).unwrap()).unwrap();
            let alpha = holder_exponent(&iu).value;
            assert!(alpha >= s - 0.05, "{spec}, s = {s}: {alpha}");
        }
    }
}

fn arb_sbv() -> impl Strategy<Value = SbvFunction> {
    (prop::collection::vec(-2.0f64..2.0, 17), prop::collection::vec((0.02f64..0.98, -2.0f64..2.0), 0..3), -2.0f64..2.0)
        .prop_map(|(ac, jumps, base)| {
            let mut ac = ac;
            ac[0] = 0.0;
            let mut jumps: Vec<Jump> = jumps.into_iter().map(|(x, p)| Jump::new(x, p)).collect();
            jumps.sort_by(|l, r| l.location.total_cmp(&r.location));
            jumps.dedup_by(|l, r| l.location == r.location);
            SbvFunction::new(Grid::unit(16).unwrap(), ac, jumps, base).unwrap()
        })
}

proptest! {
    #[test]
    fn variation_is_a_seminorm(u in arb_sbv(), v in arb_sbv(), alpha in -4.0f64..4.0) {
        let tv = |w: &SbvFunction| total_variation(w).value;
        prop_assert!((tv(&u.scaled(alpha)) - alpha.abs() * tv(&u)).abs() <= 1e-12 * (1.0 + tv(&u)));
        prop_assert!(tv(&u.add(&v).unwrap()) <= tv(&u) + tv(&v) + 1e-12);
    }

    #[test]
    fn sbv_norm_is_a_norm(u in arb_sbv(), v in arb_sbv(), alpha in -4.0f64..4.0) {
        let nm = |w: &SbvFunction| sbv_norm(w).value;
        prop_assert!((nm(&u.scaled(alpha)) - alpha.abs() * nm(&u)).abs() <= 1e-10 * (1.0 + nm(&u)));
        prop_assert!(nm(&u.add(&v).unwrap()) <= nm(&u) + nm(&v) + 1e-10);
        prop_assert!(nm(&u) >= total_variation(&u).value);
    }

    #[test]
    fn l1_triangle_inequality(u in arb_sbv(), v in arb_sbv()) {
        let l1 = |w: &SbvFunction| lp_norm(w, 1.0).unwrap().value;
        prop_assert!(l1(&u.add(&v).unwrap()) <= l1(&u) + l1(&v) + 1e-10);
    }
}
