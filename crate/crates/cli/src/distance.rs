use crate::config::{usage, DistanceArgs, DomainArg, MixedArg, RunConfig};
use crate::report::{num, opt, write_bytes, write_json, Table};
use crate::Outcome;
use bergman_core::distance::{equivalence_experiment, DistanceGrid, DistanceReport, ExperimentConfig, MixedTarget};
use bergman_core::spaces::{gallery_entry, Domain, NormScale};
use serde::Serialize;

#[derive(Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    grid: DistanceGrid,
    report: DistanceReport,
}

pub fn experiment_config(a: &DistanceArgs) -> anyhow::Result<ExperimentConfig> {
    let sweep: Vec<f64> = match a.domain {
        DomainArg::Ball if !a.m.is_empty() => return Err(usage("--m applies to --domain halfspace")),
        DomainArg::Halfspace if !a.beta.is_empty() => return Err(usage("--beta applies to --domain ball")),
        DomainArg::Ball if a.beta.is_empty() => vec![2.0, 3.0, 4.0],
        DomainArg::Ball => a.beta.clone(),
        DomainArg::Halfspace if a.m.is_empty() => vec![1.0],
        DomainArg::Halfspace => a.m.iter().map(|&m| m as f64).collect(),
    };
    let mut cfg = ExperimentConfig::new(a.p, a.alpha, sweep);
    if let (Some(q), Some(kind)) = (a.q, a.mixed) {
        let scale = match kind {
            MixedArg::B => NormScale::Bpqa,
            MixedArg::F => NormScale::Fpqa,
        };
        cfg.mixed = Some(MixedTarget { scale, q });
    }
    if !a.eps.is_empty() {
        cfg.eps_grid = Some(a.eps.clone());
    }
    cfg.monte_carlo_samples = a.mc_samples;
    cfg.seed = a.output.seed;
    Ok(cfg)
}

pub fn run(a: &DistanceArgs, config: &RunConfig) -> anyhow::Result<Outcome> {
    let domain: Domain = a.domain.into();
    let n = a.n.unwrap_or(if domain == Domain::Ball { 3 } else { 1 });
    let f = gallery_entry(&a.function, n).map_err(|e| usage(e.to_string()))?;
    if f.domain != domain {
        return Err(usage(format!(
            "{} lives on the {}, not the {}",
            a.function,
            f.domain.as_str(),
            domain.as_str()
        )));
    }
    let cfg = experiment_config(a)?;
    let mut grid = DistanceGrid::default();
    for _ in 0..a.refine {
        grid = grid.refined();
    }
    let report = equivalence_experiment(&f, &cfg, &grid)?;

    let weight = match domain {
        Domain::Ball => "(1-|x|)^lambda",
        Domain::HalfSpace => "s^lambda",
    };
    let convention = format!(
        "level sets {{|f| {weight} >= eps}}, lambda = {}; s1_upper is the weighted sup of f - f2 when the s2 \
         profile is FINITE; kernel_param is beta (ball) or m (half-space)",
        num(report.lambda)
    );
    let mut summary = Table::new(
        convention.clone(),
        &["kernel_param", "eps", "classification", "s1_upper", "remainder_sup", "remainder_over_eps", "fitted_exponent", "truncated_integral"],
    );
    let mut profiles = Table::new(
        format!("{convention}; depth = 1-R (ball) or s_min (half-space); natural logarithms"),
        &["kernel_param", "eps", "depth", "log_depth", "truncated_integral", "log_truncated_integral"],
    );
    let o = &a.output;
    for sweep in &report.sweeps {
        let k = num(sweep.kernel.order());
        println!(
            "kernel {k}: s2 bracket [{}, {}] estimate {} coherent {} monotone {}",
            num(sweep.bracket.lo),
            opt(sweep.bracket.hi),
            num(sweep.s2_estimate),
            sweep.coherent,
            sweep.monotone
        );
        for (i, e) in sweep.entries.iter().enumerate() {
            summary.push(vec![
                k.clone(),
                num(e.eps),
                e.classification.as_str().into(),
                opt(e.s1_upper),
                opt(e.remainder_sup),
                opt(e.remainder_sup.map(|s| s / e.eps)),
                num(e.profile.fitted_exponent),
                num(e.profile.last_value()),
            ]);
            let mut dat = String::from("# log(1-R) log(I_R)\n");
            for (d, v) in e.profile.depths.iter().zip(&e.profile.values) {
                profiles.push(vec![k.clone(), num(e.eps), num(*d), num(d.ln()), num(*v), num(v.ln())]);
                dat.push_str(&format!("{} {}\n", num(d.ln()), num(v.ln())));
            }
            if a.gnuplot {
                write_bytes(&o.path("distance", &format!("_k{k}_e{i}.dat")), dat.as_bytes())?;
            }
        }
    }
    summary.write(&o.path("distance", ".csv"))?;
    profiles.write(&o.path("distance", "_profiles.csv"))?;
    let inconclusive = report.sweeps.iter().any(|s| s.bracket.inconclusive);
    write_json(&o.path("distance", ".json"), &Report { config, grid, report })?;
    Ok(if inconclusive { Outcome::Inconclusive } else { Outcome::Pass })
}
