use bergman_core::spaces::{gallery_entry, BALL_GALLERY, HALFSPACE_GALLERY};
use bergman_core::whitney::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square(l: i32, top: i32, half_width: f64, n: usize) -> HalfBox {
    HalfBox::new(vec![-half_width; n], vec![half_width; n], 2f64.powi(-l), 2f64.powi(top)).unwrap()
}

#[test]
fn cubes_are_disjoint_and_side_matches_height() {
    for n in [1, 2] {
        let cubes = whitney_halfspace(&square(4, 1, 1.0, n), -4..=0).unwrap();
        for (i, a) in cubes.iter().enumerate() {
            let s = a.lower_corner[n];
            assert_eq!(a.side, s);
            // every interior height t ∈ [s, 2s) has t/side ∈ [1, 2)
            assert!(s / a.side >= 1.0 && (s + a.side) / a.side <= 2.0);
            for b in &cubes[i + 1..] {
                assert!(!a.overlaps(b), "{a:?} {b:?}");
            }
        }
    }
}

#[test]
fn cubes_cover_every_region_point_exactly_once() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [1, 2] {
        let region = HalfBox::new(vec![-0.75; n], vec![1.3; n], 0.1, 3.0).unwrap();
        let cubes = whitney_halfspace(&region, -4..=1).unwrap();
        let dyadic = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
            // dyadic rationals hit the cube faces exactly
            let v = lo + (hi - lo) * rng.random::<f64>();
            if rng.random::<bool>() {
                (v * 64.0).floor() / 64.0
            } else {
                v
            }
        };
        for _ in 0..5000 {
            let mut p: Vec<f64> = (0..n).map(|_| dyadic(&mut rng, -0.75, 1.3)).collect();
            p.push(dyadic(&mut rng, 0.1, 3.0));
            if !region.contains(&p) {
                continue;
            }
            let hits = cubes.iter().filter(|c| c.contains(&p)).count();
            assert_eq!(hits, 1, "{p:?}");
            assert!(cubes.contains(&cube_containing(&p).unwrap()));
        }
    }
}

#[test]
fn ball_cells_cover_and_have_bounded_overlap() {
    for (n, levels) in [(2, 6), (3, 4)] {
        let fam = whitney_ball(n, levels).unwrap();
        assert!(fam.c2 / fam.c1 <= 8.0, "{} {}", fam.c1, fam.c2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut checked = 0;
        let mut worst = 0;
        while checked < 10_000 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r >= 1.0 {
                continue;
            }
            checked += 1;
            if r < 0.5 || r >= fam.outer_radius() {
                continue;
            }
            let k = fam.covering(&x);
            assert!(k >= 1, "{x:?} uncovered");
            worst = worst.max(k);
        }
        // the recorded constant comes from its own sample; both stay small
        assert!(worst <= 16 && fam.overlap <= 16, "{worst} {}", fam.overlap);
    }
}

#[test]
fn ball_cell_counts_grow_geometrically() {
    for (n, levels) in [(2, 7), (3, 4)] {
        let fam = whitney_ball(n, levels).unwrap();
        let scaled: Vec<f64> = fam
            .per_level
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 / 2f64.powi((i as i32 + 1) * (n as i32 - 1)))
            .collect();
        let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = scaled.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo <= 4.0, "{scaled:?}");
    }
}

#[test]
fn ball_cell_diameters_bound_sampled_pairs() {
    let fam = whitney_ball(3, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for cell in fam.cells.iter().step_by(17) {
        let d = cell.diameter();
        let (a, b) = cell.radii();
        let mut pts = Vec::new();
        while pts.len() < 200 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x: Vec<f64> = {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let t = rng.random_range(a..b);
                // push sampled directions into the cap by mixing with its center
                let mix = rng.random_range(0.0..1.0);
                let y: Vec<f64> = x.iter().zip(&cell.cap_center).map(|(u, c)| mix * u / r + 4.0 * c).collect();
                let ry = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                y.iter().map(|v| t * v / ry).collect()
            };
            if cell.contains(&x) {
                pts.push(x);
            }
        }
        for p in &pts {
            for q in &pts {
                let dist = p.iter().zip(q).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
                assert!(dist <= d * (1.0 + 1e-12));
            }
            let ratio = d / (1.0 - p.iter().map(|v| v * v).sum::<f64>().sqrt());
            assert!(ratio >= fam.c1 * (1.0 - 1e-12) && ratio <= fam.c2 * (1.0 + 1e-12));
        }
    }
}

#[test]
fn riemann_ratio_on_the_gallery() {
    let region = square(6, 2, 2.0, 1);
    let cubes = whitney_halfspace(&region, -6..=1).unwrap();
    for name in HALFSPACE_GALLERY {
        let f = gallery_entry(name, 1).unwrap();
        for p in [1.0, 2.0] {
            for w in [0.0, 1.0] {
                let g = |x: &[f64]| f.eval(x).abs().powf(p);
                let c = discrete_vs_integral(&g, w, &cubes, 6).unwrap();
                assert!((0.5..=2.0).contains(&c.ratio), "{name} p={p} w={w}: {c:?}");
            }
        }
    }
    let fam = whitney_ball(3, 4).unwrap();
    for name in BALL_GALLERY {
        let f = gallery_entry(name, 3).unwrap();
        for p in [1.0, 2.0] {
            for w in [0.0, 1.0] {
                let g = |x: &[f64]| f.eval(x).abs().powf(p);
                let c = discrete_vs_integral(&g, w, &fam.cells, 6).unwrap();
                assert!((0.5..=2.0).contains(&c.ratio), "{name} p={p} w={w}: {c:?}");
            }
        }
    }
}

#[test]
fn subdivision_moves_ratio_toward_one() {
    let cubes = whitney_halfspace(&square(4, 0, 1.0, 1), -4..=-1).unwrap();
    let f = gallery_entry("hs_poisson", 1).unwrap();
    let g = |x: &[f64]| f.eval(x).powi(2);
    let mut level = cubes;
    let mut last = f64::INFINITY;
    for _ in 0..4 {
        let c = discrete_vs_integral(&g, 0.0, &level, 8).unwrap();
        let gap = (c.ratio - 1.0).abs();
        assert!(gap < last, "{gap} after {last}");
        last = gap;
        level = level.iter().flat_map(|c| c.children()).collect();
    }
    assert!(last < 1e-3);
}

#[test]
fn csv_rows_match_headers() {
    let cubes = whitney_halfspace(&square(2, 0, 0.5, 2), -2..=-1).unwrap();
    let header = WhitneyCube::csv_header(2);
    for c in &cubes {
        assert_eq!(c.csv_row().len(), header.len());
    }
    let fam = whitney_ball(2, 2).unwrap();
    assert_eq!(fam.cells[0].csv_row(0).len(), BallCell::csv_header(2).len());
}

#[test]
fn construction_is_deterministic() {
    assert_eq!(whitney_ball(3, 2).unwrap(), whitney_ball(3, 2).unwrap());
}

proptest! {
    #[test]
    fn lookup_agrees_with_enumeration(y in -1.0f64..1.0, s in 0.0625f64..2.0) {
        let cubes = whitney_halfspace(&HalfBox::new(vec![-1.0], vec![1.0], 0.0625, 2.0).unwrap(), -4..=0).unwrap();
        let c = cube_containing(&[y, s]).unwrap();
        prop_assert!(c.contains(&[y, s]));
        prop_assert!(cubes.contains(&c));
        prop_assert!(s / c.side >= 1.0 && s / c.side < 2.0);
    }
}
