//! Overlap and surface-distance metrics, and the evaluation report.
//!
//! Surfaces are the foreground voxels with at least one 6-neighbour in the
//! background (outside the grid counts as background). Surface distances are
//! measured centre to centre in millimetres, using the exact distance
//! transform of each surface.

use serde::{Deserialize, Serialize};

use crate::distance::squared_distance_to_seeds;
use crate::sum::{mean_std, pairwise_sum};
use crate::volume::{Mask, Spacing};
use crate::{Error, Result};

/// Dice overlap as a percentage. Two empty masks score 100.
pub fn dice_score(a: &Mask, b: &Mask) -> Result<f64> {
    a.as_volume().ensure_same_shape(b.as_volume())?;
    let (na, nb) = (a.count(), b.count());
    if na + nb == 0 {
        return Ok(100.0);
    }
    let inter = a.and(b)?.count();
    Ok(200.0 * inter as f64 / (na + nb) as f64)
}

pub fn surface_voxels(m: &Mask) -> Mask {
    let d = m.dims();
    Mask::from_fn(d, m.spacing(), |x, y, z| {
        if !m.get(x, y, z) {
            return false;
        }
        const N6: [(isize, isize, isize); 6] = [
            (-1, 0, 0),
            (1, 0, 0),
            (0, -1, 0),
            (0, 1, 0),
            (0, 0, -1),
            (0, 0, 1),
        ];
        N6.iter().any(|&(dx, dy, dz)| {
            let (xx, yy, zz) = (x as isize + dx, y as isize + dy, z as isize + dz);
            !d.contains(xx, yy, zz) || !m.get(xx as usize, yy as usize, zz as usize)
        })
    })
}

/// Directed nearest-surface distances between the surfaces of two masks.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDistances {
    /// For each surface voxel of `a` (index order), distance to surface of `b`.
    pub a_to_b: Vec<f64>,
    pub b_to_a: Vec<f64>,
}

impl SurfaceDistances {
    pub fn compute(a: &Mask, b: &Mask, spacing: Spacing) -> Result<Self> {
        a.as_volume().ensure_same_shape(b.as_volume())?;
        if !a.any() || !b.any() {
            return Err(Error::UndefinedMetric(
                "surface distance needs two nonempty masks".into(),
            ));
        }
        let sa = surface_voxels(a).to_bools();
        let sb = surface_voxels(b).to_bools();
        let da = squared_distance_to_seeds(&sa, a.dims(), spacing);
        let db = squared_distance_to_seeds(&sb, a.dims(), spacing);
        let pick = |surface: &[bool], dist: &[f64]| -> Vec<f64> {
            surface
                .iter()
                .zip(dist)
                .filter(|(&s, _)| s)
                .map(|(_, d)| d.sqrt())
                .collect()
        };
        Ok(SurfaceDistances {
            a_to_b: pick(&sa, &db),
            b_to_a: pick(&sb, &da),
        })
    }

    /// Symmetric maximum (HD100).
    pub fn hausdorff(&self) -> f64 {
        self.a_to_b
            .iter()
            .chain(&self.b_to_a)
            .copied()
            .fold(0.0, f64::max)
    }

    /// Larger of the two directed 95th percentiles (linear interpolation).
    pub fn hausdorff95(&self) -> f64 {
        percentile(&self.a_to_b, 95.0).max(percentile(&self.b_to_a, 95.0))
    }

    /// Mean over both surfaces of the distance to the other surface.
    pub fn average(&self) -> f64 {
        let all: Vec<f64> = self.a_to_b.iter().chain(&self.b_to_a).copied().collect();
        pairwise_sum(&all) / all.len() as f64
    }
}

fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn hausdorff(a: &Mask, b: &Mask, spacing: Spacing) -> Result<f64> {
    Ok(SurfaceDistances::compute(a, b, spacing)?.hausdorff())
}

pub fn hausdorff95(a: &Mask, b: &Mask, spacing: Spacing) -> Result<f64> {
    Ok(SurfaceDistances::compute(a, b, spacing)?.hausdorff95())
}

pub fn asd(a: &Mask, b: &Mask, spacing: Spacing) -> Result<f64> {
    Ok(SurfaceDistances::compute(a, b, spacing)?.average())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub case_id: String,
    pub dice_pct: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hd_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asd_mm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let (mean, std) = mean_std(values);
        Some(Summary { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub dice: Summary,
    pub hd: Option<Summary>,
    pub asd: Option<Summary>,
}

/// Per-metric mean and population std over the rows.
pub fn aggregate(rows: Vec<EvalRow>) -> Result<EvalReport> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no cases to aggregate".into()));
    }
    let dice: Vec<f64> = rows.iter().map(|r| r.dice_pct).collect();
    let hd: Vec<f64> = rows.iter().filter_map(|r| r.hd_mm).collect();
    let asd: Vec<f64> = rows.iter().filter_map(|r| r.asd_mm).collect();
    Ok(EvalReport {
        dice: Summary::of(&dice).expect("nonempty"),
        hd: Summary::of(&hd),
        asd: Summary::of(&asd),
        rows,
    })
}

impl EvalReport {
    fn has_surface(&self) -> bool {
        self.rows.iter().any(|r| r.hd_mm.is_some())
    }

    /// Plain-text table: one aggregate line with Mean/Std per metric, then
    /// one line per case. `label` prefixes the metric names (e.g. "cavity").
    pub fn render_table(&self, label: &str) -> String {
        let prefix = if label.is_empty() {
            String::new()
        } else {
            format!("{label} ")
        };
        let mut metrics = vec![(format!("{prefix}Dice (%)"), 2usize)];
        if self.has_surface() {
            metrics.push((format!("{prefix}HD (mm)"), 3));
            metrics.push((format!("{prefix}ASD (mm)"), 3));
        }
        let id_w = self
            .rows
            .iter()
            .map(|r| r.case_id.len())
            .chain([10])
            .max()
            .unwrap();
        let col_w = metrics.iter().map(|(m, _)| m.len()).max().unwrap().max(18);

        let mut out = String::new();
        let mut line = format!("{:<id_w$}", "Case");
        for (m, _) in &metrics {
            line.push_str(&format!(" | {m:<col_w$}"));
        }
        out.push_str(line.trim_end());
        out.push('\n');
        let mut line = format!("{:<id_w$}", "");
        for _ in &metrics {
            line.push_str(&format!(" | {:<9}{:<w$}", "Mean", "Std", w = col_w - 9));
        }
        out.push_str(line.trim_end());
        out.push('\n');
        let rule = {
            let mut r = "-".repeat(id_w);
            for _ in &metrics {
                r.push_str(&format!("-+-{}", "-".repeat(col_w)));
            }
            r
        };
        out.push_str(&rule);
        out.push('\n');

        let summaries = [Some(self.dice), self.hd, self.asd];
        let mut line = format!("{:<id_w$}", format!("all (n={})", self.rows.len()));
        for (i, (_, prec)) in metrics.iter().enumerate() {
            let cell = match summaries[i] {
                Some(s) => format!(
                    "{:<9}{:.p$}",
                    format!("{:.p$}", s.mean, p = *prec),
                    s.std,
                    p = *prec
                ),
                None => "-".to_string(),
            };
            line.push_str(&format!(" | {cell:<col_w$}"));
        }
        out.push_str(line.trim_end());
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');

        for r in &self.rows {
            let mut line = format!("{:<id_w$}", r.case_id);
            let values = [Some(r.dice_pct), r.hd_mm, r.asd_mm];
            for (i, (_, prec)) in metrics.iter().enumerate() {
                let cell = match values[i] {
                    Some(v) => format!("{v:.p$}", p = *prec),
                    None => "-".to_string(),
                };
                line.push_str(&format!(" | {cell:<col_w$}"));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    /// One JSON object per case, newline separated.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            s.push_str(&serde_json::to_string(r).expect("row serializes"));
            s.push('\n');
        }
        s
    }
}
