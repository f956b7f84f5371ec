use serde::{Deserialize, Serialize};

/// Verdict on an improper integral from its truncation sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Classification {
    Finite,
    Divergent,
    Inconclusive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Finite => "FINITE",
            Classification::Divergent => "DIVERGENT",
            Classification::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Increment ratio at or below which the tail is taken to decay geometrically.
pub const FINITE_RATIO: f64 = 0.85;
/// Increment ratio at or above which the increments are taken not to decay.
pub const DIVERGENT_RATIO: f64 = 0.95;
/// Increments this small relative to the running value count as zero.
pub const NEGLIGIBLE: f64 = 1e-13;

/// Truncated outer integrals `I_k` against a boundary-approach parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceProfile {
    /// Cutoffs: `R` for the ball, `s_min` for the half-space.
    pub truncation_grid: Vec<f64>,
    /// Distance of each cutoff to the boundary (`1 − R`, or `s_min`).
    pub depths: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `log I` against `−log depth` over the last
    /// three cutoffs.
    pub fitted_exponent: f64,
    pub classification: Classification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl DivergenceProfile {
    /// Classify the sequence; `depths` must decrease toward the boundary.
    pub fn new(truncation_grid: Vec<f64>, depths: Vec<f64>, values: Vec<f64>) -> Self {
        let (classification, fitted_exponent) = classify(&depths, &values);
        DivergenceProfile {
            truncation_grid,
            depths,
            values,
            fitted_exponent,
            classification,
            note: None,
        }
    }

    /// Ball profile from cumulative values at depths `1 − R`.
    pub fn from_depths(depths: Vec<f64>, values: Vec<f64>) -> Self {
        let grid = depths.iter().map(|d| 1.0 - d).collect();
        Self::new(grid, depths, values)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn last_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Geometric extrapolation of the omitted tail for a finite profile.
    pub fn tail_estimate(&self) -> f64 {
        let inc = self.increments();
        if inc.len() < 2 {
            return f64::INFINITY;
        }
        let last = inc[inc.len() - 1].abs();
        let prev = inc[inc.len() - 2].abs();
        if last == 0.0 {
            return 0.0;
        }
        let q = if prev > 0.0 { last / prev } else { 1.0 };
        if q < 1.0 {
            last * q / (1.0 - q)
        } else {
            f64::INFINITY
        }
    }
}

/// Heuristic classifier.
///
/// FINITE when the last three increment ratios are all `≤ 0.85` (or the
/// increments are negligible), DIVERGENT when they are all `≥ 0.95` and the
/// local log-log slopes are positive, INCONCLUSIVE otherwise or when fewer
/// than five cutoffs are available.
pub fn classify(depths: &[f64], values: &[f64]) -> (Classification, f64) {
    let exponent = fitted_exponent(depths, values);
    let len = values.len();
    if len < 5 || depths.len() != len {
        return (Classification::Inconclusive, exponent);
    }
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let tail = &inc[inc.len() - 4..];
    let scale = values[len - 1].abs();
    if scale == 0.0 || tail[1..].iter().all(|d| d.abs() <= NEGLIGIBLE * scale) {
        return (Classification::Finite, exponent);
    }
    let ratios: Vec<f64> = tail
        .windows(2)
        .map(|w| {
            if w[0] == 0.0 {
                if w[1] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                w[1] / w[0]
            }
        })
        .collect();
    if ratios.iter().all(|&q| (0.0..=FINITE_RATIO).contains(&q)) {
        return (Classification::Finite, exponent);
    }
    if ratios.iter().all(|&q| q >= DIVERGENT_RATIO) {
        let slopes_positive = (len - 3..len).all(|k| {
            let a = values[k - 1];
            let b = values[k];
            a > 0.0 && b > a && depths[k] < depths[k - 1]
        });
        if slopes_positive {
            return (Classification::Divergent, exponent);
        }
    }
    (Classification::Inconclusive, exponent)
}

fn fitted_exponent(depths: &[f64], values: &[f64]) -> f64 {
    let len = values.len().min(depths.len());
    if len < 2 {
        return f64::NAN;
    }
    let start = len.saturating_sub(3);
    let pts: Vec<(f64, f64)> = (start..len)
        .filter(|&k| values[k] > 0.0 && depths[k] > 0.0)
        .map(|k| (-depths[k].ln(), values[k].ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}
