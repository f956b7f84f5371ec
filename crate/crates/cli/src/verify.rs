use crate::config::{parse_weight, usage, DomainArg, Lemma, RunConfig, VerifyArgs};
use crate::report::{num, write_json, Table};
use crate::Outcome;
use bergman_core::kernels::KernelSpec;
use bergman_core::spaces::Domain;
use bergman_core::verify::{
    default_suites, overall, run_suites, Hypothesis, LemmaReport, Suite, Verdict, VerifyGrid, BALL_R_GRID,
    QBETA_R_GRID, QM_T_GRID, RHO_GRID,
};
use bergman_core::Error;
use serde::Serialize;

const CONVENTION: &str = "ratio = value / model; ball weights (1-|x|^2)^alpha, sphere measure normalized, \
half-space weights s^alpha; abscissa is rho (rro), r (qbeta, sphere power law), t (qm), r*rho (sphere mean), \
sample count (pointwise sups), series order (poisson) or point index (representation)";

pub fn grid(args: &VerifyArgs) -> VerifyGrid {
    let d = VerifyGrid::default();
    let g = &args.grid;
    VerifyGrid {
        order: g.order.unwrap_or(d.order),
        extra_levels: g.extra_levels.unwrap_or(d.extra_levels),
        sphere_degree: g.sphere_degree.unwrap_or(d.sphere_degree),
        azimuth_degree: g.azimuth_degree.unwrap_or(d.azimuth_degree),
        half_depth: g.half_depth.unwrap_or(d.half_depth),
    }
}

fn or_grid(given: &[f64], default: &[f64]) -> Vec<f64> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}

/// Resolve the single-lemma flags into a suite, filling defaults.
pub fn suite_for(lemma: Lemma, a: &VerifyArgs) -> anyhow::Result<Suite> {
    let half = a.domain == DomainArg::Halfspace;
    let n = a.n.unwrap_or(if half || lemma == Lemma::Qm { 1 } else { 3 });
    Ok(match lemma {
        Lemma::Rro => Suite::Rro {
            alpha: a.alpha.unwrap_or(0.0),
            lambda: a.lambda.ok_or_else(|| usage("--lemma rro needs --lambda"))?,
            rho_grid: or_grid(&a.rho, &RHO_GRID),
        },
        Lemma::Qbeta => {
            let delta = a.delta.unwrap_or(0.0);
            Suite::Qbeta {
                n,
                delta,
                gamma: a.gamma.unwrap_or(n as f64 + delta + 1.0),
                beta: a.beta.unwrap_or(2.0),
                r_grid: or_grid(&a.r, &QBETA_R_GRID),
            }
        }
        Lemma::Qm => {
            let delta = a.delta.unwrap_or(0.0);
            Suite::Qm {
                n,
                delta,
                gamma: a.gamma.unwrap_or(n as f64 + delta + 3.0),
                m: a.m.unwrap_or(1),
                t_grid: or_grid(&a.t, &QM_T_GRID),
            }
        }
        Lemma::Kernel => Suite::KernelBounds {
            spec: if half {
                KernelSpec::halfspace(n, a.m.unwrap_or(0))?
            } else {
                KernelSpec::ball(n, a.beta.unwrap_or(2.0))?
            },
            samples: a.samples,
        },
        Lemma::Sphere => Suite::SpherePowerLaw {
            n,
            b: a.b.unwrap_or(n as f64),
            r_grid: or_grid(&a.r, &BALL_R_GRID),
        },
        Lemma::Poisson => Suite::PoissonSeries {
            n,
            r: a.r.first().copied().unwrap_or(0.5),
        },
        Lemma::Representation => {
            let function = a
                .function
                .clone()
                .ok_or_else(|| usage("--lemma representation needs --f <gallery function>"))?;
            let (spec, domain) = if half {
                (KernelSpec::halfspace(n, a.m.unwrap_or(1))?, Domain::HalfSpace)
            } else {
                (KernelSpec::ball(n, a.beta.unwrap_or(2.0))?, Domain::Ball)
            };
            let hypothesis = match &a.weight {
                Some(w) => Hypothesis::Weighted {
                    weight: parse_weight(w, domain)?,
                    p: a.p.unwrap_or(1.0),
                },
                None => Hypothesis::Bergman {
                    p: a.p.unwrap_or(2.0),
                    alpha: a.alpha.unwrap_or(if half { 0.0 } else { spec.order() }),
                },
            };
            Suite::Representation { function, spec, hypothesis }
        }
    })
}

#[derive(Serialize)]
struct SuiteResult {
    suite: Suite,
    #[serde(skip_serializing_if = "Option::is_none")]
    refused: Option<String>,
    reports: Vec<LemmaReport>,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    config: &'a RunConfig,
    grid: VerifyGrid,
    overall: Verdict,
    results: Vec<SuiteResult>,
}

fn param_text(r: &LemmaReport) -> String {
    r.parameter_point
        .iter()
        .map(|(k, v)| format!("{k}={}", num(*v)))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn run(args: &VerifyArgs, config: &RunConfig) -> anyhow::Result<Outcome> {
    let grid = grid(args);
    let single = args.lemma.is_some();
    let suites = match args.lemma {
        Some(l) => vec![suite_for(l, args)?],
        None => default_suites(args.n.unwrap_or(3))?,
    };
    let results = run_suites(&suites, &grid);

    // a single refused lemma is a usage error: the config broke a hypothesis
    if single {
        if let Err(e @ (Error::Precondition { .. } | Error::InvalidParameter(_) | Error::Domain(_))) = &results[0].1 {
            return Err(usage(format!("{} refused: {e}", results[0].0.name())));
        }
    }

    let mut table = Table::new(
        CONVENTION,
        &["suite", "lemma_id", "parameters", "abscissa", "value", "ratio", "refined_ratio", "verdict"],
    );
    let mut all = Vec::new();
    let mut out = Vec::new();
    let mut refused = false;
    for (suite, res) in results {
        match res {
            Ok(reports) => {
                for r in &reports {
                    for row in &r.rows {
                        table.push(vec![
                            suite.name().into(),
                            r.lemma_id.clone(),
                            param_text(r),
                            num(row.abscissa),
                            num(row.value),
                            num(row.ratio),
                            num(row.refined_ratio),
                            r.verdict.as_str().into(),
                        ]);
                    }
                    println!(
                        "{:<28} {:<12} max_ratio {:<12.6e} drift {:.2e}",
                        r.lemma_id,
                        r.verdict.as_str(),
                        r.max_ratio,
                        r.grid_refinement_drift
                    );
                }
                all.extend(reports.iter().cloned());
                out.push(SuiteResult { suite, refused: None, reports });
            }
            Err(e) => {
                refused = true;
                println!("{:<28} REFUSED      {e}", suite.name());
                table.push(vec![
                    suite.name().into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "REFUSED".into(),
                ]);
                out.push(SuiteResult { suite, refused: Some(e.to_string()), reports: Vec::new() });
            }
        }
    }
    let verdict = if refused { Verdict::Fail } else { overall(&all) };
    println!("overall {}", verdict.as_str());

    let o = &args.output;
    table.write(&o.path("verify", ".csv"))?;
    write_json(
        &o.path("verify", ".json"),
        &VerifyReport {
            config,
            grid,
            overall: verdict,
            results: out,
        },
    )?;
    Ok(match verdict {
        Verdict::Pass => Outcome::Pass,
        Verdict::Inconclusive => Outcome::Inconclusive,
        Verdict::Fail => Outcome::Fail,
    })
}
