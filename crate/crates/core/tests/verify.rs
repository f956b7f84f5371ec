use bergman_core::kernels::{BallKernel, KernelSpec};
use bergman_core::spaces::{gallery_entry, Domain, SWeight};
use bergman_core::verify::*;
use bergman_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn grid() -> VerifyGrid {
    VerifyGrid::default()
}

#[test]
fn rro_closed_forms() {
    // α = 1, λ = 3, ρ = ½: ∫₀¹ u (½ + u/2)^{-3} du = 8 ∫₀¹ u (1+u)^{-3} du = 1
    let rep = verify_rro(1.0, 3.0, &[0.5], &grid()).unwrap();
    assert!((rep.rows[0].value - 1.0).abs() < 1e-12);
    assert!((rep.rows[0].ratio - 0.5).abs() < 1e-12);
    assert!((rep.rows[0].refined_ratio - rep.rows[0].ratio).abs() < 1e-6);
    // α = 0, λ = 2: I(ρ) = 1/(1 − ρ)
    let rep = verify_rro(0.0, 2.0, &RHO_GRID, &grid()).unwrap();
    for row in &rep.rows {
        assert!((row.ratio - 1.0).abs() < 1e-9, "{row:?}");
    }
    assert_eq!(rep.verdict, Verdict::Pass);
}

#[test]
fn rro_refuses_outside_the_lemma() {
    let err = verify_rro(0.0, 0.5, &RHO_GRID, &grid()).unwrap_err();
    assert!(matches!(err, Error::Precondition { ref hypothesis, .. } if hypothesis == "λ > α + 1"));
}

#[test]
fn qbeta_at_origin_is_the_constant_term() {
    // Q_β(0, y) = 2Γ(β+1+n/2)/(Γ(β+1)Γ(n/2)) = 315/8 · 1/3 = 13.125 for n = 3, β = 2
    let rep = verify_qbeta(3, 0.0, 4.0, 2.0, &[0.0], &grid()).unwrap();
    let expected = 13.125f64.powf(0.8);
    assert!((rep.rows[0].value - expected).abs() < 1e-12 * expected);
    assert_eq!(rep.rows[0].ratio, rep.rows[0].value);
}

#[test]
fn qbeta_matches_monte_carlo_at_r_09() {
    let (n, beta, gamma) = (3usize, 2.0, 4.0);
    let quad = qbeta_integral(n, beta, 0.0, gamma, 0.9, &grid()).unwrap();
    let kernel = BallKernel::new(&KernelSpec::ball(n, beta).unwrap()).unwrap();
    let x = [0.9, 0.0, 0.0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples = 1_000_000;
    let e = gamma / (n as f64 + beta);
    let mut acc = 0.0;
    for _ in 0..samples {
        let y = loop {
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            if c.iter().map(|v| v * v).sum::<f64>() < 1.0 {
                break c;
            }
        };
        acc += kernel.eval(&x, &y).abs().powf(e);
    }
    let mc = acc / samples as f64;
    assert!((mc - quad).abs() < 0.04 * quad, "mc {mc} quad {quad}");
}

#[test]
fn qbeta_ratio_settles_toward_the_boundary() {
    let rep = verify_qbeta(3, 0.0, 4.0, 2.0, &QBETA_R_GRID, &grid()).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert!(rep.grid_refinement_drift < 0.01);
    let ratios: Vec<f64> = rep.rows.iter().map(|r| r.ratio).collect();
    // increasing toward a boundary constant; the last two agree within 5%
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    assert!(ratios[2] / ratios[1] - 1.0 < 0.05, "{ratios:?}");
}

#[test]
fn qbeta_refuses_small_gamma() {
    let err = verify_qbeta(3, 0.0, 3.0, 2.0, &[0.5], &grid()).unwrap_err();
    assert!(matches!(err, Error::Precondition { ref hypothesis, .. } if hypothesis == "γ > n + δ"));
    assert!(verify_qbeta(3, 0.0, 4.0, 0.0, &[0.5], &grid()).is_err());
}

#[test]
fn qm_closed_form_and_monte_carlo() {
    // n = 1, m = 0, γ = 4: ∫_R Q₀² dy = 1/(π h³), so I(1) = ∫₀^∞ ds/(π (1+s)³) = 1/(2π)
    let window = QmWindow {
        s_min: 2f64.powi(-30),
        s_max: 2f64.powi(30),
        order: 12,
        lateral_levels: 40,
    };
    let i = qm_integral(1, 0, 0.0, 4.0, 1.0, &window).unwrap();
    let exact = 1.0 / (2.0 * PI);
    assert!((i.value - exact).abs() < 1e-9, "{} vs {exact}", i.value);
    assert!((i.value - exact).abs() <= i.tail_bound + 1e-12);

    // importance sampling: y | s Cauchy with scale 1+s, s with density 2/(1+s)³
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples = 1_000_000;
    let mut acc = 0.0;
    for _ in 0..samples {
        let u: f64 = rng.random();
        let h = 1.0 / (1.0 - u).sqrt();
        let y = h * (PI * (rng.random::<f64>() - 0.5)).tan();
        let p = 1.0 / PI;
        let dp = p * (y * y - h * h) / (y * y + h * h).powi(2);
        let f = (2.0 * dp).powi(2);
        let q = h / (PI * (y * y + h * h)) * 2.0 / h.powi(3);
        acc += f / q;
    }
    let mc = acc / samples as f64;
    assert!((mc - i.value).abs() < 0.02 * i.value, "mc {mc} quad {}", i.value);
}

#[test]
fn qm_tail_bound_covers_halving_s_min() {
    let mut window = QmWindow {
        s_min: 2f64.powi(-8),
        s_max: 2f64.powi(16),
        order: 12,
        lateral_levels: 30,
    };
    let a = qm_integral(1, 1, 0.0, 4.0, 1.0, &window).unwrap();
    window.s_min /= 2.0;
    let b = qm_integral(1, 1, 0.0, 4.0, 1.0, &window).unwrap();
    assert!(b.value > a.value);
    assert!(b.value - a.value < a.tail_bound);
}

#[test]
fn qm_scaling_for_three_triples() {
    for (n, delta, gamma) in [(1, 0.0, 4.0), (1, 0.5, 3.0), (2, 0.0, 5.0)] {
        let rep = verify_qm(n, delta, gamma, 1, &[1.0], &grid()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
        assert!(rep.checks.iter().all(|c| c.ok && c.value.abs() < 1e-4));
    }
    assert!(verify_qm(1, 0.0, 2.0, 1, &[1.0], &grid()).is_err());
}

#[test]
fn kernel_bounds_ball() {
    let reps = verify_kernel_bounds(&KernelSpec::ball(3, 2.0).unwrap(), 2048, &grid()).unwrap();
    let ids: Vec<&str> = reps.iter().map(|r| r.lemma_id.as_str()).collect();
    assert_eq!(ids, ["kernel_bound_pointwise", "kernel_bound_sphere_mean", "kernel_bound_sphere_power"]);
    for r in &reps {
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    }
    let err = verify_kernel_bounds(&KernelSpec::ball(3, 0.0).unwrap(), 16, &grid()).unwrap_err();
    assert!(matches!(err, Error::Precondition { .. }));
}

#[test]
fn sphere_power_law_with_exponent_n() {
    // n = 3, b = 3: ∫_S |rx′ − y′|^{-3} dσ = 1/(1 − r²), so the ratio is 1/(1 + r)
    let rs = [0.0, 0.5, 0.9, 0.99];
    let rep = verify_sphere_power_law(3, 3.0, &rs, &grid()).unwrap();
    for (row, r) in rep.rows.iter().zip(rs) {
        assert!((row.ratio - 1.0 / (1.0 + r)).abs() < 1e-10, "{row:?}");
    }
    assert!(verify_sphere_power_law(3, 2.0, &rs, &grid()).is_err());
}

#[test]
fn halfspace_kernel_bound_aligned_value() {
    let rep = &verify_kernel_bounds(&KernelSpec::halfspace(1, 0).unwrap(), 1024, &grid()).unwrap()[0];
    assert!((rep.rows[0].value - 2.0 / PI).abs() < 1e-12);
    for n in 1..=2 {
        for m in 0..=3 {
            let rep = &verify_kernel_bounds(&KernelSpec::halfspace(n, m).unwrap(), 4096, &grid()).unwrap()[0];
            assert_eq!(rep.verdict, Verdict::Pass);
            assert!(rep.grid_refinement_drift <= 0.10);
        }
    }
}

#[test]
fn poisson_series_converges_geometrically() {
    let rep = verify_poisson_series(3, 0.5, 1.0, 8, 8, 4).unwrap();
    assert_eq!(rep.parameter_point["closed_form"], 6.0);
    assert_eq!(rep.verdict, Verdict::Pass);
    for row in &rep.rows {
        assert!((row.ratio - 0.5).abs() <= 0.05);
    }
    assert!((rep.rows.last().unwrap().value - 6.0).abs() < 1e-9);
}

#[test]
fn representation_of_constants_is_exact() {
    let f = gallery_entry("constant", 3).unwrap();
    let pts = interior_grid(Domain::Ball, 3);
    for beta in [0.0, 1.0, 2.0] {
        let spec = KernelSpec::ball(3, beta).unwrap();
        let rep = verify_representation(&f, &spec, &Hypothesis::Bergman { p: 2.0, alpha: beta }, &pts, &grid()).unwrap();
        assert!(rep.max_ratio <= 1e-8, "β = {beta}: {}", rep.max_ratio);
    }
}

#[test]
fn representation_error_decreases_under_refinement() {
    let f = gallery_entry("solid_k2", 3).unwrap();
    let kernel = BallKernel::new(&KernelSpec::ball(3, 1.0).unwrap()).unwrap();
    let x = [0.0, 0.7, 0.0];
    let exact = f.eval(&x);
    let mut g = VerifyGrid {
        order: 3,
        extra_levels: 1,
        sphere_degree: 6,
        azimuth_degree: 6,
        half_depth: 8,
    };
    let mut last = f64::INFINITY;
    for _ in 0..4 {
        let err = (ball_reproduction(&f, &kernel, &x, &g).unwrap() - exact).abs();
        assert!(err < last, "{err} ≥ {last}");
        last = err;
        g = g.refined();
    }
    assert!(last < 1e-4);
}

#[test]
fn representation_rejects_mismatched_inputs() {
    let f = gallery_entry("solid_k2", 3).unwrap();
    let pts = interior_grid(Domain::Ball, 3);
    let hyp = Hypothesis::Bergman { p: 2.0, alpha: 0.0 };
    assert!(verify_representation(&f, &KernelSpec::halfspace(3, 1).unwrap(), &hyp, &pts, &grid()).is_err());
    assert!(verify_representation(&f, &KernelSpec::ball(2, 1.0).unwrap(), &hyp, &pts, &grid()).is_err());
    let outside = vec![vec![1.0, 0.0, 0.0]];
    assert!(verify_representation(&f, &KernelSpec::ball(3, 1.0).unwrap(), &hyp, &outside, &grid()).is_err());
    let low = Hypothesis::Bergman { p: 0.5, alpha: 0.0 };
    assert!(verify_representation(&f, &KernelSpec::ball(3, 1.0).unwrap(), &low, &pts, &grid()).is_err());
}

#[test]
fn weighted_representation_refuses_small_alpha() {
    // v(u) = u^{1/2}: α_v = 1/2 and s(v, 1) = 3/2
    let f = gallery_entry("poisson_e1", 3).unwrap();
    let w = SWeight::power(0.5, Domain::Ball).unwrap();
    let hyp = Hypothesis::Weighted { weight: w, p: 1.0 };
    let err = verify_representation(&f, &KernelSpec::ball(3, 1.0).unwrap(), &hyp, &[vec![0.0; 3]], &grid()).unwrap_err();
    match err {
        Error::Precondition { hypothesis, .. } => assert!(hypothesis.contains("s(v,p)")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn halfspace_representation_m1() {
    let f = gallery_entry("hs_poisson", 1).unwrap();
    let rep = verify_representation(
        &f,
        &KernelSpec::halfspace(1, 1).unwrap(),
        &Hypothesis::Bergman { p: 3.0, alpha: 0.0 },
        &interior_grid(Domain::HalfSpace, 1),
        &grid(),
    )
    .unwrap();
    assert_eq!(rep.rows.len(), 25);
    assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
}

#[test]
fn runner_orders_by_lemma_id() {
    let suites = vec![
        Suite::PoissonSeries { n: 3, r: 0.5 },
        Suite::Rro { alpha: 0.0, lambda: 2.0, rho_grid: vec![0.5] },
        Suite::Rro { alpha: 0.0, lambda: 0.5, rho_grid: vec![0.5] },
        Suite::SpherePowerLaw { n: 3, b: 3.0, r_grid: vec![0.5] },
    ];
    let out = run_suites(&suites, &grid());
    assert!(out[0].1.is_err());
    let ids: Vec<String> = out[1..].iter().map(|(_, r)| r.as_ref().unwrap()[0].lemma_id.clone()).collect();
    assert_eq!(ids, ["kernel_bound_sphere_power", "poisson_series", "rro"]);
    let again = run_suites(&suites, &grid());
    assert_eq!(format!("{out:?}"), format!("{again:?}"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rro_at_origin(alpha in -0.9f64..3.0, gap in 0.1f64..3.0) {
        let rep = verify_rro(alpha, alpha + 1.0 + gap, &[0.0], &grid()).unwrap();
        prop_assert!((rep.rows[0].ratio - 1.0 / (alpha + 1.0)).abs() < 1e-9 / (alpha + 1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn qm_scaling_is_exact(n in 1usize..=2, m in 0u32..=2, delta in 0.0f64..1.0, excess in 0.75f64..3.0) {
        let gamma = n as f64 + 1.0 + delta + excess;
        let window = QmWindow { s_min: 2f64.powi(-30), s_max: 2f64.powi(30), order: 12, lateral_levels: 40 };
        let a = qm_integral(n, m, delta, gamma, 1.0, &window).unwrap();
        let b = qm_integral(n, m, delta, gamma, 2.0, &window).unwrap();
        let expected = 2f64.powf(delta - gamma + n as f64 + 1.0);
        prop_assert!((b.value / a.value / expected - 1.0).abs() < 1e-4);
    }
}
