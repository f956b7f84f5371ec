use super::*;
use crate::quadrature::unit;
use crate::spaces::{constant, gallery_entry, poisson_ball_fn, solid_harmonic};
use proptest::prelude::*;

fn ball_kernel(n: usize, beta: f64) -> KernelSpec {
    KernelSpec::ball(n, beta).unwrap()
}

fn interior_grid(n: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; n]];
    for r in [0.3, 0.7] {
        for k in 0..n {
            for sign in [1.0, -1.0] {
                let mut x = vec![0.0; n];
                x[k] = sign * r;
                pts.push(x);
            }
        }
        let c = r / (n as f64).sqrt();
        pts.push(vec![c; n]);
    }
    pts
}

#[test]
fn level_set_examples() {
    let one = constant(Domain::Ball, 3);
    let spec = LevelSetSpec::new(2.0, 1.0).unwrap();
    assert!(!in_level_set(&one, &spec, &[0.1, 0.2, 0.0]).unwrap());

    let p = poisson_ball_fn(3, unit(3, 0));
    let spec = LevelSetSpec::new(1.0, 2.0).unwrap();
    // (0.1)²·(1 − 0.81)/(0.1)³ = 1.9
    assert!(in_level_set(&p, &spec, &[0.9, 0.0, 0.0]).unwrap());

    let spec = LevelSetSpec::new(3.0, 2.0).unwrap();
    for i in 0..40 {
        let r = 1.0 - 0.5f64.powf(i as f64 / 3.0);
        for th in [0.0, 1e-3, 0.05, 0.3, 1.0, 3.0] {
            let x = [r * f64::cos(th), r * f64::sin(th), 0.0];
            assert!(!in_level_set(&p, &spec, &x).unwrap(), "{x:?}");
        }
    }
}

#[test]
fn level_set_rejects_outside_points() {
    let p = poisson_ball_fn(3, unit(3, 0));
    let spec = LevelSetSpec::new(1.0, 2.0).unwrap();
    assert!(in_level_set(&p, &spec, &[1.0, 0.0, 0.0]).is_err());
    assert!(in_level_set(&p, &spec, &[0.1, 0.0]).is_err());
    assert!(LevelSetSpec::new(0.0, 1.0).is_err());
    assert!(LevelSetSpec::new(1.0, -1.0).is_err());
}

#[test]
fn empty_mask_gives_zero() {
    let f = solid_harmonic(3, 2);
    let spec = LevelSetSpec::new(10.0, 2.0).unwrap();
    let k = ball_kernel(3, 3.0);
    let grid = DistanceGrid::default();
    assert_eq!(s2_inner(&f, &spec, &k, &[0.2, 0.1, 0.0], &grid).unwrap(), 0.0);
    let prof = s2_profile(&f, &spec, &k, 2.0, 1.0, &grid).unwrap();
    assert_eq!(prof.classification, Classification::Finite);
    assert!(prof.values.iter().all(|&v| v == 0.0));
}

#[test]
fn polynomial_profile_is_finite_and_stable() {
    let f = solid_harmonic(3, 2);
    let spec = LevelSetSpec::new(0.02, 2.0).unwrap();
    let k = ball_kernel(3, 3.0);
    let grid = DistanceGrid::default();
    let prof = s2_profile(&f, &spec, &k, 2.0, 1.0, &grid).unwrap();
    assert_eq!(prof.classification, Classification::Finite, "{prof:?}");
    let a = s2_inner(&f, &spec, &k, &[0.2, 0.1, 0.0], &grid).unwrap();
    let b = s2_inner(&f, &spec, &k, &[0.2, 0.1, 0.0], &grid.refined()).unwrap();
    assert!(a > 0.0 && (a - b).abs() < 0.02 * b, "{a} vs {b}");
}

#[test]
fn poisson_inner_matches_monte_carlo_and_exact() {
    let f = poisson_ball_fn(3, unit(3, 0));
    let spec = LevelSetSpec::new(1.0, 2.0).unwrap();
    let k = ball_kernel(3, 3.0);
    let x = [0.0; 3];
    let q = s2_inner(&f, &spec, &k, &x, &DistanceGrid::default()).unwrap();
    let (mc, se) = s2_inner_monte_carlo(&f, &spec, &k, &x, 1_000_000, 11, (1.0, 1.0)).unwrap();
    assert!((q - mc).abs() < 0.02 * mc, "quadrature {q}, Monte-Carlo {mc} ± {se}");
    // Q_3(0, ·) = 315/16 times a one-dimensional integral over the cap
    // {cos θ ≥ c*(r)}, evaluated with scipy's adaptive quad
    let exact = 0.154_337_714_949_281_9;
    assert!((q - exact).abs() < 1e-7 * exact, "{q}");
}

#[test]
fn poisson_profile_signatures() {
    let f = poisson_ball_fn(3, unit(3, 0));
    let k = ball_kernel(3, 3.0);
    let grid = DistanceGrid::default();
    let lambda = LevelSetSpec::critical_lambda(Domain::Ball, 3, 2.0, 1.0);
    assert_eq!(lambda, 2.0);
    let small = s2_profile(&f, &LevelSetSpec::new(0.1, lambda).unwrap(), &k, 2.0, 1.0, &grid).unwrap();
    assert_eq!(small.classification, Classification::Divergent, "{small:?}");
    let large = s2_profile(&f, &LevelSetSpec::new(3.0, lambda).unwrap(), &k, 2.0, 1.0, &grid).unwrap();
    assert_eq!(large.classification, Classification::Finite);
}

#[test]
fn decompose_reproduces_polynomials() {
    let grid = DistanceGrid::default();
    for name in ["coord_1", "solid_k2", "solid_k3"] {
        let f = gallery_entry(name, 3).unwrap();
        for eps in [0.01, 0.05] {
            let spec = LevelSetSpec::new(eps, 2.0).unwrap();
            let (f1, f2) = decompose(&f, &spec, &ball_kernel(3, 3.0), &grid).unwrap();
            let mut touched = false;
            for x in interior_grid(3) {
                let err = (f.eval(&x) - f1.eval(&x) - f2.eval(&x)).abs();
                assert!(err <= 1e-4, "{name} ε={eps} at {x:?}: {err:e}");
                touched |= f2.eval(&x) != 0.0;
            }
            assert!(touched, "{name} ε={eps}: level set unexpectedly empty");
        }
    }
}

#[test]
fn decompose_with_empty_mask_is_reproduction() {
    let f = solid_harmonic(3, 2);
    let spec = LevelSetSpec::new(10.0, 2.0).unwrap();
    let (f1, f2) = decompose(&f, &spec, &ball_kernel(3, 2.0), &DistanceGrid::default()).unwrap();
    for x in interior_grid(3) {
        assert_eq!(f2.eval(&x), 0.0);
        assert!((f1.eval(&x) - f.eval(&x)).abs() < 1e-4);
    }
}

#[test]
fn decompose_refuses_small_beta() {
    let f = solid_harmonic(3, 2);
    let spec = LevelSetSpec::new(0.1, 2.0).unwrap();
    let err = decompose(&f, &spec, &ball_kernel(3, 1.0), &DistanceGrid::default()).unwrap_err();
    assert!(matches!(err, Error::Precondition { .. }), "{err}");
    let err = s1_upper(&f, &spec, &ball_kernel(3, 1.0), 2.0, 1.0, &DistanceGrid::default()).unwrap_err();
    assert!(matches!(err, Error::Precondition { .. }), "{err}");
}

#[test]
fn kernel_domain_mismatch_is_rejected() {
    let f = solid_harmonic(3, 2);
    let spec = LevelSetSpec::new(0.1, 2.0).unwrap();
    assert!(s2_inner(&f, &spec, &ball_kernel(2, 3.0), &[0.0; 3], &DistanceGrid::default()).is_err());
    assert!(s2_profile(&f, &spec, &ball_kernel(3, 3.0), 0.0, 1.0, &DistanceGrid::default()).is_err());
    assert!(s2_profile(&f, &spec, &ball_kernel(3, 3.0), 2.0, -1.0, &DistanceGrid::default()).is_err());
}

#[test]
fn halfspace_inner_matches_monte_carlo() {
    // Q₀(·, (0, 1)) on R²₊, λ = (0 + 2)/2
    let f = gallery_entry("qm_w0", 1).unwrap();
    let spec = LevelSetSpec::new(0.05, 1.0).unwrap();
    let k = KernelSpec::halfspace(1, 1).unwrap();
    let z = [0.0, 1.0];
    let q = s2_inner(&f, &spec, &k, &z, &DistanceGrid::default()).unwrap();
    let (mc, se) = s2_inner_monte_carlo(&f, &spec, &k, &z, 1_000_000, 5, (8.0, 8.0)).unwrap();
    assert!(q > 0.0);
    assert!((q - mc).abs() < (0.02 * mc).max(3.0 * se), "quadrature {q}, Monte-Carlo {mc} ± {se}");
}

#[test]
fn halfspace_decompose_reproduces() {
    let f = gallery_entry("hs_poisson", 1).unwrap();
    let spec = LevelSetSpec::new(0.05, 1.0).unwrap();
    let k = KernelSpec::halfspace(1, 2).unwrap();
    let grid = DistanceGrid::default();
    let (f1, f2) = decompose(&f, &spec, &k, &grid).unwrap();
    let (g1, g2) = decompose(&f, &spec, &k, &grid.refined()).unwrap();
    for z in [[0.0, 0.5], [0.5, 1.0], [-1.0, 2.0], [0.2, 0.25]] {
        // the window of radius 2^L leaves a tail of order 2^{-L}
        let err = (f.eval(&z) - f1.eval(&z) - f2.eval(&z)).abs();
        let fine = (f.eval(&z) - g1.eval(&z) - g2.eval(&z)).abs();
        assert!(err < 1e-2, "{z:?}: {err:e}");
        assert!(fine < 0.5 * err.max(1e-6), "{z:?}: {fine:e} vs {err:e}");
    }
    let bad = KernelSpec::halfspace(1, 0).unwrap();
    assert!(decompose(&f, &spec, &bad, &DistanceGrid::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inner_is_nonincreasing_in_eps(
        r in 0.0f64..0.9,
        th in 0.0f64..std::f64::consts::PI,
        e1 in 0.005f64..0.2,
        bump in 0.0f64..0.2,
    ) {
        let f = solid_harmonic(3, 2);
        let k = ball_kernel(3, 3.0);
        let grid = DistanceGrid::default();
        let x = [r * th.cos(), r * th.sin(), 0.0];
        let lo = s2_inner(&f, &LevelSetSpec::new(e1, 2.0).unwrap(), &k, &x, &grid).unwrap();
        let hi = s2_inner(&f, &LevelSetSpec::new(e1 + bump, 2.0).unwrap(), &k, &x, &grid).unwrap();
        prop_assert!(hi <= lo, "{hi} > {lo}");
    }

    #[test]
    fn decompose_is_linear_in_powers_of_two(
        k in -4i32..5,
        negate in any::<bool>(),
        r in 0.0f64..0.9,
        th in 0.0f64..std::f64::consts::PI,
    ) {
        let a = if negate { -1.0 } else { 1.0 } * 2f64.powi(k);
        let f = solid_harmonic(3, 3);
        let spec = LevelSetSpec::new(0.03, 2.0).unwrap();
        let scaled_spec = LevelSetSpec::new(0.03 * a.abs(), 2.0).unwrap();
        let kern = ball_kernel(3, 3.0);
        let grid = DistanceGrid::default();
        let (f1, f2) = decompose(&f, &spec, &kern, &grid).unwrap();
        let (g1, g2) = decompose(&f.scaled(a), &scaled_spec, &kern, &grid).unwrap();
        let x = [r * th.cos(), 0.0, r * th.sin()];
        prop_assert_eq!(g1.eval(&x), a * f1.eval(&x));
        prop_assert_eq!(g2.eval(&x), a * f2.eval(&x));
    }
}
