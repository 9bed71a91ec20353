use dde_lambert::{
    compute_spectrum, integrate, psi, psi_oracle, truncation_error_curve, uniform_grid, DelaySystem,
    InputSignal, Piece, Preshape, ResponseSeries, SolverOptions, Spectrum,
};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn fixture(ad: &[f64]) -> (DelaySystem<f64>, Preshape<f64>) {
    let sys = DelaySystem::new(-1.0, ad.to_vec(), 1.0, 1.0).unwrap();
    let pre = Preshape::constant(1.0, sys.history_span(), 1.0).unwrap();
    (sys, pre)
}

fn spec(sys: &DelaySystem<f64>, pre: &Preshape<f64>, depth: usize) -> Spectrum<f64> {
    compute_spectrum(sys, Some(pre), depth, &SolverOptions::default()).unwrap()
}

fn cosine() -> InputSignal<f64> {
    InputSignal::Cosine { amplitude: 1.0, omega: 1.0, phase: 0.0 }
}

const SINGLE: &[f64] = &[-1.0];
const TWO: &[f64] = &[-1.0, -0.5];
const THREE: &[f64] = &[0.5, -1.0, -1.0];

#[test]
fn total_is_initial_plus_forced() {
    let (sys, pre) = fixture(TWO);
    let rs = ResponseSeries::new(&spec(&sys, &pre, 5), &pre, &cosine()).unwrap();
    let grid = uniform_grid(10.0, 201);
    let traj = rs.total_response(&grid).unwrap();
    for (&t, &x) in grid.iter().zip(&traj.values) {
        let sum = rs.initial_response(t) + rs.forced_response(t);
        assert!((x - sum).abs() <= 1e-10 * x.abs().max(1.0));
    }
    assert!(traj.meta.max_imag_residue < 1e-12);
    assert_eq!(traj.meta.depth, Some(5));
}

#[test]
fn forced_response_is_linear_in_the_input() {
    let (sys, pre) = fixture(THREE);
    let s = spec(&sys, &pre, 3);
    let u1 = InputSignal::Polynomial(vec![0.5, -0.2, 0.03]);
    let u2 = InputSignal::Cosine { amplitude: 2.0, omega: 1.7, phase: 0.4 };
    let (al, be) = (1.5, -0.75);
    let combined = InputSignal::Sum(vec![
        InputSignal::Polynomial(vec![al * 0.5, al * -0.2, al * 0.03]),
        InputSignal::Cosine { amplitude: be * 2.0, omega: 1.7, phase: 0.4 },
    ]);
    let f = |u: &InputSignal<f64>, t| ResponseSeries::new(&s, &pre, u).unwrap().forced_response(t);
    for t in [0.0, 0.3, 1.0, 2.5, 7.0, 10.0] {
        let lhs = f(&combined, t);
        let rhs = al * f(&u1, t) + be * f(&u2, t);
        assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "t={t}");
    }
}

#[test]
fn initial_response_scales_with_history_and_x0() {
    let (sys, _) = fixture(TWO);
    let s = compute_spectrum(&sys, None, 4, &SolverOptions::default()).unwrap();
    let p1 = Preshape::new(vec![Piece { from: -2.0, to: 0.0, coeffs: vec![1.0, 0.5] }], 0.3).unwrap();
    let p3 = Preshape::new(vec![Piece { from: -2.0, to: 0.0, coeffs: vec![3.0, 1.5] }], 0.9).unwrap();
    let r1 = ResponseSeries::new(&s, &p1, &InputSignal::Zero).unwrap();
    let r3 = ResponseSeries::new(&s, &p3, &InputSignal::Zero).unwrap();
    for t in [0.0, 0.5, 3.0, 9.0] {
        assert!((r3.initial_response(t) - 3.0 * r1.initial_response(t)).abs() < 1e-12);
    }
}

#[test]
fn agreement_with_integrator_for_all_fixtures() {
    let grid = uniform_grid(10.0, 1001);
    for (ad, forced_tol, free_tol) in [(SINGLE, 1e-2, 1e-3), (TWO, 1e-2, 1e-3), (THREE, 1e-2, 1e-3)] {
        let (sys, pre) = fixture(ad);
        let s = spec(&sys, &pre, 5);
        for (u, tol) in [(cosine(), forced_tol), (InputSignal::Zero, free_tol)] {
            let oracle = integrate(&sys, &pre, &u, 10.0, 64).unwrap().sample(&grid).unwrap();
            let series = ResponseSeries::new(&s, &pre, &u).unwrap().total_response(&grid).unwrap();
            let err = series.sup_distance(&oracle, 1.0, 10.0).unwrap();
            assert!(err <= tol, "ad={ad:?} u={u:?} err={err:e}");
        }
    }
}

#[test]
fn single_delay_total_response_at_low_depth() {
    let (sys, pre) = fixture(SINGLE);
    let grid = uniform_grid(10.0, 1001);
    let oracle = integrate(&sys, &pre, &cosine(), 10.0, 64).unwrap().sample(&grid).unwrap();
    let s = spec(&sys, &pre, 2);
    let series = ResponseSeries::new(&s, &pre, &cosine()).unwrap().total_response(&grid).unwrap();
    assert!(series.sup_distance(&oracle, 0.5, 10.0).unwrap() <= 2e-2);
}

#[test]
fn forced_error_decays_like_inverse_depth() {
    // Ψ jumps at 0, so the convolution with the truncated series converges at O(1/K).
    let (sys, pre) = fixture(SINGLE);
    let grid = uniform_grid(10.0, 501);
    let oracle = integrate(&sys, &pre, &cosine(), 10.0, 64).unwrap().sample(&grid).unwrap();
    let full = spec(&sys, &pre, 20);
    let err = |k| {
        let rs = ResponseSeries::new(&full.truncate(k), &pre, &cosine()).unwrap();
        rs.total_response(&grid).unwrap().sup_distance(&oracle, 1.0, 10.0).unwrap()
    };
    let (e5, e10, e20) = (err(5), err(10), err(20));
    for ratio in [e5 / e10, e10 / e20] {
        assert!((1.6..2.4).contains(&ratio), "ratios {e5:e} {e10:e} {e20:e}");
    }
}

#[test]
fn psi_series_matches_integrated_fundamental_solution() {
    for ad in [SINGLE, TWO, THREE] {
        let (sys, _) = fixture(ad);
        let s = compute_spectrum(&sys, None, 10, &SolverOptions::default()).unwrap();
        let oracle = psi_oracle(&sys, 10.0, 64).unwrap();
        for i in 100..=1000 {
            let t = i as f64 / 100.0;
            let d = (psi(&s, t) - oracle.eval(t).unwrap()).abs();
            assert!(d < 1e-2, "ad={ad:?} t={t} d={d:e}");
        }
    }
}

#[test]
fn psi_series_at_zero_tends_to_midpoint_of_jump() {
    // Ψ(0⁻) = 0 and Ψ(0⁺) = 1; the residue series converges to the average.
    for ad in [SINGLE, TWO, THREE] {
        let (sys, _) = fixture(ad);
        let s = compute_spectrum(&sys, None, 40, &SolverOptions::default()).unwrap();
        assert!((psi(&s, 0.0) - 0.5).abs() < 1e-2, "{}", psi(&s, 0.0));
        assert!((psi(&s.truncate(40), 0.0) - 0.5).abs() < (psi(&s.truncate(5), 0.0) - 0.5).abs());
    }
}

#[test]
fn sampled_input_matches_direct_quadrature() {
    let (sys, pre) = fixture(TWO);
    let s = spec(&sys, &pre, 3);
    let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.2).collect();
    let values: Vec<f64> = times.iter().map(|t| (0.7 * t).sin() + 0.1 * t).collect();
    let u = InputSignal::Sampled { times: times.clone(), values };
    let rs = ResponseSeries::new(&s, &pre, &u).unwrap();
    for t in [0.5, 3.3, 7.9, 9.5] {
        // Composite Simpson between consecutive knots, where the input is linear.
        let kernel = |tau: f64| -> f64 {
            let k: C = s.roots().iter().map(|r| r.c * (r.s * (t - tau)).exp()).sum();
            k.re * u.eval(tau)
        };
        let mut want = 0.0;
        for win in times.windows(2) {
            let (lo, hi) = (win[0], win[1].min(t));
            if lo >= hi {
                continue;
            }
            let n = 400;
            let w = (hi - lo) / n as f64;
            let mut acc = 0.0;
            for i in 0..=n {
                let weight = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += weight * kernel(lo + i as f64 * w);
            }
            want += acc * w / 3.0;
        }
        let got = rs.forced_response(t);
        assert!((got - want).abs() < 1e-10, "t={t} {got} {want}");
    }
}

#[test]
fn step_and_constant_inputs_agree_when_onset_is_zero() {
    let (sys, pre) = fixture(THREE);
    let s = spec(&sys, &pre, 2);
    let a = ResponseSeries::new(&s, &pre, &InputSignal::Constant(0.8)).unwrap();
    let b = ResponseSeries::new(&s, &pre, &InputSignal::Step { amplitude: 0.8, onset: 0.0 }).unwrap();
    for t in [0.1, 1.0, 4.0] {
        assert!((a.total(t) - b.total(t)).abs() < 1e-14);
    }
}

#[test]
fn resonant_input_is_finite_and_matches_integrator() {
    let (sys, pre) = fixture(TWO);
    let s = spec(&sys, &pre, 5);
    let s0 = s.get(0).unwrap().s;
    let u = InputSignal::Exponential { amplitude: 1.0, rate: s0.re };
    let rs = ResponseSeries::new(&s, &pre, &u).unwrap();
    let grid = uniform_grid(8.0, 161);
    let series = rs.total_response(&grid).unwrap();
    let oracle = integrate(&sys, &pre, &u, 8.0, 64).unwrap().sample(&grid).unwrap();
    assert!(series.values.iter().all(|v| v.is_finite()));
    assert!(series.sup_distance(&oracle, 1.0, 8.0).unwrap() < 1e-2);
}

#[test]
fn error_curve_shrinks_with_depth() {
    let (sys, pre) = fixture(TWO);
    let grid = uniform_grid(10.0, 501);
    let oracle = integrate(&sys, &pre, &cosine(), 10.0, 64).unwrap().sample(&grid).unwrap();
    let curve = truncation_error_curve(&sys, &pre, &cosine(), &[0, 2, 5, 5, 10], &oracle, &SolverOptions::default()).unwrap();
    let errs: Vec<f64> = curve.iter().map(|&(_, e)| e).collect();
    assert_eq!(curve.iter().map(|c| c.0).collect::<Vec<_>>(), vec![0, 2, 5, 5, 10]);
    assert_eq!(errs[2], errs[3]);
    assert!(errs[0] > errs[1] && errs[1] > errs[2] && errs[2] > errs[4]);
}

#[test]
fn rejects_bad_grids() {
    let (sys, pre) = fixture(SINGLE);
    let rs = ResponseSeries::new(&spec(&sys, &pre, 1), &pre, &cosine()).unwrap();
    assert!(rs.total_response(&[0.0, 1.0, 1.0]).is_err());
    assert!(rs.total_response(&[-1.0, 1.0]).is_err());
    let wrong_span = Preshape::constant(1.0, 2.0, 1.0).unwrap();
    assert!(ResponseSeries::new(rs.spectrum(), &wrong_span, &cosine()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn response_is_real_and_superposes(
        x0 in -2.0f64..2.0,
        c0 in -1.0f64..1.0,
        c1 in -0.5f64..0.5,
        omega in 0.1f64..3.0,
        t in 0.0f64..10.0,
    ) {
        let (sys, _) = fixture(TWO);
        let pre = Preshape::new(vec![Piece { from: -2.0, to: 0.0, coeffs: vec![c0, c1] }], x0).unwrap();
        let s = spec(&sys, &pre, 3);
        let u = InputSignal::Cosine { amplitude: 1.0, omega, phase: 0.0 };
        let rs = ResponseSeries::new(&s, &pre, &u).unwrap();
        let (init, forced, imag) = rs.components(t);
        prop_assert!(imag < 1e-12);
        prop_assert!((rs.total(t) - (init + forced)).abs() <= 1e-10);
        let free = ResponseSeries::new(&s, &pre, &InputSignal::Zero).unwrap();
        prop_assert!((free.total(t) - init).abs() <= 1e-12);
    }
}
