use fraccalc::norms::{l1_distance, lp_norm, lp_norm_on};
use fraccalc::operators::{
    caputo_derivative, marchaud_derivative, rl_derivative, rl_derivative_right, rl_integral, rl_integral_right,
};
use fraccalc::special::try_gamma;
use fraccalc::{AsField, CorpusFunction, FracParams, Grid, GridField, Jump, SbvFunction};
use proptest::prelude::*;

fn grid(n: usize) -> Grid {
    Grid::unit(n).unwrap()
}

fn sample(spec: &str, n: usize) -> SbvFunction {
    spec.parse::<CorpusFunction>().unwrap().sample(&grid(n)).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn power_derivative_against_exact_evaluator() {
    let f: CorpusFunction = "power:2".parse().unwrap();
    let u = f.sample(&grid(1024)).unwrap();
    let s = 0.5;
    let d = rl_derivative(&u, FracParams::left(s).unwrap()).unwrap();
    for j in (103..=1024).step_by(97) {
        let x = u.grid().node(j);
        let exact = f.exact_derivative(fraccalc::Side::Left, s, 0.0, 1.0, x).unwrap();
        assert!(((d.values()[j] - exact) / exact).abs() < 2e-3, "x = {x}");
    }
}

#[test]
fn null_derivative_of_critical_power() {
    let s = 0.5;
    let u = sample("power:-0.5", 4096);
    let d = rl_derivative(&u, FracParams::left(s).unwrap()).unwrap();
    assert!(lp_norm_on(&d, 1.0, 0.1, 1.0).unwrap().value < 5e-3);
}

#[test]
fn right_derivative_of_reflected_critical_power() {
    let u = sample("power:-0.5", 4096).reflected();
    let d = rl_derivative_right(&u, 0.5).unwrap();
    assert!(lp_norm_on(&d, 1.0, 0.0, 0.9).unwrap().value < 5e-3);
}

#[test]
fn reflection_consistency() {
    let u = sample("poly:0.5,1,-2,3", 256).add(&sample("heaviside:0.3", 256)).unwrap();
    let s = 0.4;
    let right = rl_integral_right(&u, s).unwrap();
    let mirrored = rl_integral(&u.reflected(), FracParams::left(s).unwrap()).unwrap();
    let mut back = mirrored.values().to_vec();
    back.reverse();
    assert!(max_diff(right.values(), &back) < 1e-12);
}

#[test]
fn semigroup_on_smooth_data() {
    let f = sample("poly:1,0,-0.5,0,0.041666666666666664", 1024);
    let twice =
        rl_integral(&rl_integral(&f, FracParams::left(0.4).unwrap()).unwrap(), FracParams::left(0.3).unwrap()).unwrap();
    let once = rl_integral(&f, FracParams::left(0.7).unwrap()).unwrap();
    let norm = lp_norm(&f, 1.0).unwrap().value;
    assert!(l1_distance(&twice, &once).unwrap() <= 5e-3 * norm);
}

#[test]
fn inversion_on_moderate_grid() {
    for spec in ["power:1", "power:2", "poly:1,0,-0.5,0,0.041666666666666664"] {
        let f = sample(spec, 1024);
        let norm = lp_norm(&f, 1.0).unwrap().value;
        for s in [0.3, 0.5, 0.7] {
            let p = FracParams::left(s).unwrap();
            let di = rl_derivative(&rl_integral(&f, p).unwrap(), p).unwrap();
            assert!(l1_distance(&di, &f).unwrap() <= 5e-3 * norm, "{spec}, s = {s}");
        }
    }
}

#[test]
fn inversion_keeps_jumps() {
    let f = sample("heaviside:0.4", 512);
    let p = FracParams::left(0.6).unwrap();
    let di = rl_derivative(&rl_integral(&f, p).unwrap(), p).unwrap();
    assert!(l1_distance(&di, &f).unwrap() < 1e-12);
}

#[test]
fn caputo_rl_relation_at_every_node() {
    let u = sample("poly:2,-1,0.5", 512);
    let s = 0.3;
    let p = FracParams::left(s).unwrap();
    let rl = rl_derivative(&u, p).unwrap();
    let cap = caputo_derivative(&u, p).unwrap();
    let g = try_gamma(1.0 - s).unwrap();
    for j in 1..=512 {
        let x = u.grid().node(j);
        let r = rl.values()[j] - cap.values()[j] - 2.0 * x.powf(-s) / g;
        assert!(r.abs() < 1e-9);
    }
}

#[test]
fn caputo_equals_rl_for_zero_trace() {
    let u = sample("poly:0,1,3", 256);
    let p = FracParams::left(0.45).unwrap();
    let rl = rl_derivative(&u, p).unwrap();
    let cap = caputo_derivative(&u, p).unwrap();
    assert!(max_diff(rl.values(), cap.values()) < 1e-13);
}

#[test]
fn marchaud_agrees_with_rl_as_eps_halves() {
    let n = 1024;
    let u = sample("poly:0,1,1", n);
    let p = FracParams::left(0.5).unwrap();
    let d = rl_derivative(&u, p).unwrap();
    let errs: Vec<f64> = [8.0, 4.0, 2.0, 1.0]
        .iter()
        .map(|m| {
            let md = marchaud_derivative(&u, p, m / n as f64).unwrap();
            max_diff(&md.values()[1..], &d.values()[1..])
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn marchaud_inverts_integral() {
    let n = 2048;
    let f = sample("poly:1,0,-0.5,0,0.041666666666666664", n);
    let p = FracParams::left(0.3).unwrap();
    let u = rl_integral(&f, p).unwrap();
    let m = marchaud_derivative(&u, p, 1.0 / n as f64).unwrap();
    assert!(l1_distance(&m, &f).unwrap() < 1e-2);
}

#[test]
fn operators_accept_fields_and_results() {
    let g = grid(64);
    let field = GridField::from_nodes(g, g.nodes().iter().map(|x| x * x).collect()).unwrap();
    let p = FracParams::left(0.5).unwrap();
    let a = rl_integral(&field, p).unwrap();
    let b = rl_integral(&sample("power:2", 64), p).unwrap();
    assert!(max_diff(a.values(), b.values()) < 1e-15);
    let c = rl_derivative(&a, p).unwrap();
    assert_eq!(c.as_field().grid(), &g);
}

fn random_sbv(n: usize, seed_vals: &[f64], jump: (f64, f64), base: f64) -> SbvFunction {
    let g = grid(n);
    let mut ac = vec![0.0];
    for k in 1..=n {
        ac.push(ac[k - 1] + seed_vals[k % seed_vals.len()]);
    }
    let jumps = if jump.1 != 0.0 { vec![Jump::new(jump.0, jump.1)] } else { vec![] };
    SbvFunction::new(g, ac, jumps, base).unwrap()
}

fn arb_sbv() -> impl Strategy<Value = SbvFunction> {
    (prop::collection::vec(-1.0f64..1.0, 4..12), 0.05f64..0.95, prop_oneof![Just(0.0), -2.0f64..2.0], -3.0f64..3.0)
        .prop_map(|(incs, x, p, base)| random_sbv(64, &incs, (x, p), base))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operators_are_linear(u in arb_sbv(), v in arb_sbv(), alpha in -3.0f64..3.0, s in 0.05f64..0.95) {
        let combo = u.scaled(alpha).add(&v).unwrap();
        let p = FracParams::left(s).unwrap();
        let q = FracParams::right(s).unwrap();
        type Op = fn(&SbvFunction, FracParams) -> fraccalc::Result<fraccalc::OperatorResult>;
        let ops: [(Op, FracParams); 4] = [
            (|u, p| rl_integral(u, p), p),
            (|u, p| rl_derivative(u, p), p),
            (|u, p| rl_integral(u, p), q),
            (|u, p| marchaud_derivative(u, p, 2.0 / 64.0), p),
        ];
        for (op, par) in ops {
            let lhs = op(&combo, par).unwrap();
            let ru = op(&u, par).unwrap();
            let rv = op(&v, par).unwrap();
            let scale = 1.0 + ru.values().iter().chain(rv.values()).fold(0.0f64, |m, x| m.max(x.abs()));
            for j in 0..=64 {
                let want = alpha * ru.values()[j] + rv.values()[j];
                prop_assert!((lhs.values()[j] - want).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn integral_values_are_finite(u in arb_sbv(), s in 0.01f64..0.99) {
        let r = rl_integral(&u, FracParams::left(s).unwrap()).unwrap();
        prop_assert!(r.values().iter().all(|v| v.is_finite()));
        let d = rl_derivative(&u, FracParams::left(s).unwrap()).unwrap();
        prop_assert!(d.values().iter().all(|v| v.is_finite()));
        prop_assert_eq!(d.singular_at_base(), u.base_value() != 0.0);
    }
}

#[test]
fn right_integral_of_step_is_exact() {
    let s = 0.4;
    let u = sample("heaviside:0.3", 100);
    let r = rl_integral_right(&u, s).unwrap();
    let g = try_gamma(s + 1.0).unwrap();
    for j in 0..=100 {
        let x = u.grid().node(j);
        let want = ((1.0 - x).powf(s) - (x.max(0.3) - x).powf(s)) / g;
        assert!((r.values()[j] - want).abs() < 1e-13, "x = {x}");
    }
}

#[test]
fn square_integral_at_endpoint() {
    let r = rl_integral(&sample("power:2", 2048), FracParams::left(0.5).unwrap()).unwrap();
    // Γ(3)/Γ(3.5)
    assert!((r.values()[2048] - 0.601_802_242_211_046_6).abs() < 1e-6);
}
