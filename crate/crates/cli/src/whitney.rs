use crate::config::{usage, Region, RunConfig, WhitneyArgs};
use crate::report::{num, write_json, Table};
use crate::Outcome;
use bergman_core::spaces::gallery_entry;
use bergman_core::whitney::{
    cube_containing, discrete_vs_integral, dyadic_level, whitney_ball, whitney_halfspace, BallCell, DiscreteComparison,
    HalfBox, WhitneyCube,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Serialize)]
pub struct Summary {
    pub region: Region,
    pub cells: usize,
    pub per_level: Vec<(i32, usize)>,
    /// Percentage of sampled region points lying in exactly one cell
    /// (half-space) or in at least one cell (ball).
    pub cover_percent: f64,
    /// `Σ |cube ∩ region| / |region|` (half-space only; exact for dyadic boxes).
    pub volume_cover: Option<f64>,
    /// Overlapping cube pairs (half-space) or the recorded overlap constant
    /// (ball).
    pub overlap: usize,
    /// Range of `dist(·, boundary) / side` (half-space) or
    /// `diameter / dist(·, ∂B)` (ball).
    pub band: Option<[f64; 2]>,
    pub comparison: Option<DiscreteComparison>,
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    summary: &'a Summary,
}

fn region_box(a: &WhitneyArgs) -> anyhow::Result<(HalfBox, i32, i32)> {
    match a.region {
        Region::Halfplane => {
            let n = a.n.unwrap_or(1);
            if a.levels < 1 {
                return Err(usage("--levels must be at least 1"));
            }
            let l = a.levels as i32;
            Ok((HalfBox::new(vec![0.0; n], vec![1.0; n], 2f64.powi(-l), 1.0)?, -l, -1))
        }
        Region::Box => {
            let (Some(s_lo), Some(s_hi)) = (a.s_lo, a.s_hi) else {
                return Err(usage("--region box needs --s-lo and --s-hi"));
            };
            if a.lo.is_empty() || a.lo.len() != a.hi.len() {
                return Err(usage("--region box needs --lo and --hi of equal length"));
            }
            let b = HalfBox::new(a.lo.clone(), a.hi.clone(), s_lo, s_hi).map_err(|e| usage(e.to_string()))?;
            if b.is_empty() {
                return Ok((b, 0, 0));
            }
            let j_min = dyadic_level(s_lo)?;
            let top = dyadic_level(s_hi)?;
            let j_max = if 2f64.powi(top) == s_hi { top - 1 } else { top };
            Ok((b, j_min, j_max))
        }
        Region::Ball => unreachable!(),
    }
}

fn intersection_volume(c: &WhitneyCube, b: &HalfBox) -> f64 {
    let n = b.n();
    let mut v = 1.0;
    for i in 0..=n {
        let (lo, hi) = if i < n { (b.lateral_lo[i], b.lateral_hi[i]) } else { (b.s_lo, b.s_hi) };
        let a = c.lower_corner[i].max(lo);
        let z = (c.lower_corner[i] + c.side).min(hi);
        v *= (z - a).max(0.0);
    }
    v
}

fn per_level<I: Iterator<Item = i32>>(levels: I) -> Vec<(i32, usize)> {
    let mut out: Vec<(i32, usize)> = Vec::new();
    for l in levels {
        match out.last_mut() {
            Some((k, c)) if *k == l => *c += 1,
            _ => out.push((l, 1)),
        }
    }
    out
}

/// A sample coordinate in `[lo, hi)`, snapped to a dyadic grid half the time
/// so that cube faces are hit exactly.
fn sample(rng: &mut ChaCha8Rng, lo: f64, hi: f64, snap: f64) -> f64 {
    let v = lo + (hi - lo) * rng.random::<f64>();
    if rng.random::<bool>() {
        ((v / snap).floor() * snap).max(lo)
    } else {
        v
    }
}

pub fn halfspace(a: &WhitneyArgs) -> anyhow::Result<(Summary, Table)> {
    let (region, j_min, j_max) = region_box(a)?;
    let cubes = if region.is_empty() { Vec::new() } else { whitney_halfspace(&region, j_min..=j_max)? };
    let n = region.n();
    let mut table = Table::new(
        "cubes [k*2^j, (k+1)*2^j)^n x [2^j, 2^(j+1)); lower_corner lists lateral coordinates then the height; \
         distance to the boundary is the height s",
        &WhitneyCube::csv_header(n).iter().map(String::as_str).collect::<Vec<_>>(),
    );
    for c in &cubes {
        table.push(c.csv_row());
    }

    // dyadic cubes of one side overlap iff their lattice indices agree;
    // different levels occupy disjoint height bands when height == side
    let mut index = HashMap::new();
    let mut overlap = 0;
    let mut band = [f64::INFINITY, f64::NEG_INFINITY];
    for (i, c) in cubes.iter().enumerate() {
        if index.insert((c.level, c.lattice_index.clone()), i).is_some() || c.lower_corner[n] != c.side {
            overlap += 1;
        }
        band[0] = band[0].min(c.lower_corner[n] / c.side);
        band[1] = band[1].max((c.lower_corner[n] + c.side) / c.side);
    }
    let (cover_percent, volume_cover) = if region.is_empty() {
        (100.0, None)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(a.output.seed);
        let snap = 2f64.powi(j_min - 3);
        let mut hits = 0;
        for _ in 0..a.cover_samples {
            let mut p: Vec<f64> = (0..n).map(|i| sample(&mut rng, region.lateral_lo[i], region.lateral_hi[i], snap)).collect();
            p.push(sample(&mut rng, region.s_lo, region.s_hi, snap));
            let k = cube_containing(&p)?;
            if index.get(&(k.level, k.lattice_index)).is_some_and(|&i| cubes[i].contains(&p)) {
                hits += 1;
            }
        }
        let total: f64 = cubes.iter().map(|c| intersection_volume(c, &region)).sum();
        let vol: f64 = (0..n).map(|i| region.lateral_hi[i] - region.lateral_lo[i]).product::<f64>()
            * (region.s_hi - region.s_lo);
        (100.0 * hits as f64 / a.cover_samples.max(1) as f64, Some(total / vol))
    };
    let comparison = match &a.function {
        Some(name) if !cubes.is_empty() => {
            let f = gallery_entry(name, n).map_err(|e| usage(e.to_string()))?;
            let p = a.p;
            let g = move |x: &[f64]| f.eval(x).abs().powf(p);
            Some(discrete_vs_integral(&g, a.w, &cubes, 6)?)
        }
        _ => None,
    };
    Ok((
        Summary {
            region: a.region,
            cells: cubes.len(),
            per_level: per_level(cubes.iter().map(|c| c.level)),
            cover_percent,
            volume_cover,
            overlap,
            band: (!cubes.is_empty()).then_some(band),
            comparison,
        },
        table,
    ))
}

pub fn ball(a: &WhitneyArgs) -> anyhow::Result<(Summary, Table)> {
    let n = a.n.unwrap_or(3);
    let fam = whitney_ball(n, a.levels)?;
    let mut table = Table::new(
        format!(
            "cells {{1-2^-j <= |x| < 1-2^-(j+1)}} x caps of angular radius cap_radius; distance to the sphere is 1-|x|; \
             recorded overlap constant {}",
            fam.overlap
        ),
        &BallCell::csv_header(n).iter().map(String::as_str).collect::<Vec<_>>(),
    );
    for (i, c) in fam.cells.iter().enumerate() {
        table.push(c.csv_row(i));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.output.seed);
    let (mut hits, mut total) = (0usize, 0usize);
    while total < a.cover_samples {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < 0.5 || r >= fam.outer_radius() {
            continue;
        }
        total += 1;
        if fam.covering(&x) >= 1 {
            hits += 1;
        }
    }
    let comparison = match &a.function {
        Some(name) => {
            let f = gallery_entry(name, n).map_err(|e| usage(e.to_string()))?;
            let p = a.p;
            let g = move |x: &[f64]| f.eval(x).abs().powf(p);
            Some(discrete_vs_integral(&g, a.w, &fam.cells, 6)?)
        }
        None => None,
    };
    Ok((
        Summary {
            region: a.region,
            cells: fam.cells.len(),
            per_level: fam.per_level.iter().enumerate().map(|(i, &c)| (i as i32 + 1, c)).collect(),
            cover_percent: 100.0 * hits as f64 / total.max(1) as f64,
            volume_cover: None,
            overlap: fam.overlap,
            band: Some([fam.c1, fam.c2]),
            comparison,
        },
        table,
    ))
}

pub fn run(a: &WhitneyArgs, config: &RunConfig) -> anyhow::Result<Outcome> {
    let (summary, table) = match a.region {
        Region::Ball => ball(a)?,
        _ => halfspace(a)?,
    };
    println!("cells {}", summary.cells);
    println!("cover {}%", num(summary.cover_percent));
    if let Some(v) = summary.volume_cover {
        println!("volume cover {}", num(v));
    }
    println!("overlap {}", summary.overlap);
    match summary.band {
        Some([lo, hi]) => println!("band [{}, {}]", num(lo), num(hi)),
        None => println!("band none (no cells)"),
    }
    if let Some(c) = &summary.comparison {
        println!("discrete/integral {}", num(c.ratio));
    }
    let o = &a.output;
    table.write(&o.path("whitney", ".csv"))?;
    write_json(&o.path("whitney", ".json"), &Report { config, summary: &summary })?;
    let covered = summary.cover_percent == 100.0;
    let ok = match a.region {
        Region::Ball => covered,
        _ => covered && summary.overlap == 0,
    };
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}
