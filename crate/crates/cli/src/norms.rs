use crate::config::{parse_weight, usage, NormsArgs, RunConfig};
use crate::report::{num, write_json, Table};
use crate::Outcome;
use bergman_core::spaces::{
    ainf_norm, bergman_norm, gallery, gallery_entry, mixed_norm, weighted_norm, AinfGrid, BallGrid, HalfGrid,
    HarmonicFn, NormOutcome, NormScale, NormSpec, WeightConvention, BALL_GALLERY,
};
use bergman_core::Result;
use serde::Serialize;

const CONVENTION: &str = "A^p_alpha: weight (1-|x|^2)^alpha (ball, normalized volume) or s^alpha (half-space); \
B/F^{p,q}_alpha: mixed norms with the same weight; h^p_v: weight v(1-|x|) or v(s); A^inf_t: sup |f|(1-|x|)^t or \
sup |f| s^t; DIV = divergent, NA = not defined for this function";

#[derive(Serialize)]
struct Cell {
    column: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    outcome: Option<NormOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    ball_grid: BallGrid,
    half_grid: HalfGrid,
    rows: Vec<Row>,
}

#[derive(Serialize)]
struct Row {
    function: String,
    cells: Vec<Cell>,
}

fn functions(a: &NormsArgs) -> anyhow::Result<Vec<HarmonicFn>> {
    if a.functions.is_empty() {
        return Ok(gallery(a.n));
    }
    a.functions
        .iter()
        .map(|name| {
            let dim = if BALL_GALLERY.contains(&name.as_str()) { a.n } else { a.n.saturating_sub(1).max(1) };
            gallery_entry(name, dim).map_err(|e| usage(e.to_string()))
        })
        .collect()
}

fn outcome_cell(column: &str, r: Result<NormOutcome>) -> (String, Cell) {
    match r {
        Ok(o) => {
            let text = match o.norm() {
                Some(v) => num(v),
                None => "DIV".into(),
            };
            (text, Cell { column: column.into(), outcome: Some(o), sup: None, error: None })
        }
        Err(e) => ("NA".into(), Cell { column: column.into(), outcome: None, sup: None, error: Some(e.to_string()) }),
    }
}

pub fn run(a: &NormsArgs, config: &RunConfig) -> anyhow::Result<Outcome> {
    let fs = functions(a)?;
    let mut ball = BallGrid::default();
    let mut half = HalfGrid::default();
    let mut sup_grid = AinfGrid::default();
    for _ in 0..a.refine {
        ball = ball.refined();
        half = half.refined();
        sup_grid = sup_grid.refined();
    }
    let p = a.p;
    let mut header = vec!["function".to_string(), "domain".to_string(), "n".to_string()];
    for alpha in &a.alpha {
        header.push(format!("A^p_alpha[p={},alpha={}]", num(p), num(*alpha)));
        if let Some(q) = a.q {
            header.push(format!("B^(p,q)_alpha[p={},q={},alpha={}]", num(p), num(q), num(*alpha)));
            header.push(format!("F^(p,q)_alpha[p={},q={},alpha={}]", num(p), num(q), num(*alpha)));
        }
    }
    if let Some(w) = &a.weight {
        header.push(format!("h^p_v[p={},v={w}]", num(p)));
    }
    for t in &a.ainf {
        header.push(format!("A^inf_t[t={}]", num(*t)));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(CONVENTION, &header_refs);
    let mut rows = Vec::new();

    for f in &fs {
        let mut row = vec![f.label.clone(), f.domain.as_str().to_string(), f.n.to_string()];
        let mut out = Vec::new();
        let mut idx = 3;
        let mut push = |row: &mut Vec<String>, (text, cell): (String, Cell)| {
            row.push(text);
            out.push(cell);
        };
        for &alpha in &a.alpha {
            let r = NormSpec::bergman(p, alpha).and_then(|s| bergman_norm(f, &s, &ball, &half));
            push(&mut row, outcome_cell(&header[idx], r));
            idx += 1;
            if let Some(q) = a.q {
                for scale in [NormScale::Bpqa, NormScale::Fpqa] {
                    let r = NormSpec::mixed(scale, p, q, alpha).and_then(|s| mixed_norm(f, &s, &ball, &half));
                    push(&mut row, outcome_cell(&header[idx], r));
                    idx += 1;
                }
            }
        }
        if let Some(w) = &a.weight {
            let r = parse_weight(w, f.domain)
                .map_err(|e| bergman_core::Error::InvalidParameter(e.to_string()))
                .and_then(|w| NormSpec::weighted(p, w))
                .and_then(|s| weighted_norm(f, &s, &ball, &half));
            push(&mut row, outcome_cell(&header[idx], r));
            idx += 1;
        }
        for &t in &a.ainf {
            let column = header[idx].clone();
            idx += 1;
            match ainf_norm(f, t, WeightConvention::OneMinus, &sup_grid) {
                Ok(v) if v.unbounded => push(
                    &mut row,
                    ("DIV".into(), Cell { column, outcome: None, sup: None, error: Some("unbounded".into()) }),
                ),
                Ok(v) => push(&mut row, (num(v.value), Cell { column, outcome: None, sup: Some(v.value), error: None })),
                Err(e) => push(
                    &mut row,
                    ("NA".into(), Cell { column, outcome: None, sup: None, error: Some(e.to_string()) }),
                ),
            }
        }
        table.push(row);
        rows.push(Row { function: f.label.clone(), cells: out });
    }
    print!("{}", table.render());
    let o = &a.output;
    table.write(&o.path("norms", ".csv"))?;
    write_json(
        &o.path("norms", ".json"),
        &Report { config, ball_grid: ball, half_grid: half, rows },
    )?;
    Ok(Outcome::Pass)
}
