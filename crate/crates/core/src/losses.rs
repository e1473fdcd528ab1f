//! Segmentation losses with analytic gradients with respect to the predicted
//! foreground probabilities.
//!
//! Cross-entropy is the full binary form per voxel,
//! `-(g ln s + (1 - g) ln(1 - s))`, with `s` clamped to `[1e-7, 1 - 1e-7]`
//! before the logs. TopK averages the per-voxel cross-entropy over the `k%`
//! voxels with the highest loss; the selection is held fixed when
//! differentiating. All sums use a fixed pairwise order, which makes
//! `topk_loss` at `k = 100` bit-identical to `cross_entropy`.

use crate::sum::pairwise_sum;
use crate::volume::{Kind, Mask, Volume};
use crate::{Error, Result};

/// Probability clamp applied before taking logarithms.
pub const PROB_EPS: f64 = 1e-7;
/// Smoothing term of the soft Dice ratio.
pub const DICE_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// `dL/ds` per voxel, same grid as the prediction.
    pub gradient: Option<Volume>,
}

impl LossValue {
    pub fn value_only(self) -> Self {
        LossValue {
            value: self.value,
            gradient: None,
        }
    }
}

/// Denominator of the TopK mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TopKNorm {
    /// Mean over the selected voxels.
    #[default]
    Selected,
    /// Sum over the selected voxels divided by the total voxel count.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopKConfig {
    k_percent: f64,
    pub norm: TopKNorm,
}

impl TopKConfig {
    pub fn new(k_percent: f64) -> Result<Self> {
        if !(k_percent > 0.0 && k_percent <= 100.0) {
            return Err(Error::InvalidArgument(format!(
                "k must lie in (0, 100], got {k_percent}"
            )));
        }
        Ok(TopKConfig {
            k_percent,
            norm: TopKNorm::Selected,
        })
    }

    pub fn with_norm(mut self, norm: TopKNorm) -> Self {
        self.norm = norm;
        self
    }

    pub fn k_percent(&self) -> f64 {
        self.k_percent
    }

    /// `ceil(k% * n)`, at least one voxel.
    pub fn selected_count(&self, n: usize) -> usize {
        let raw = (self.k_percent * n as f64 / 100.0).ceil() as usize;
        raw.clamp(1, n.max(1))
    }
}

fn check_inputs(s: &Volume, g: &Mask) -> Result<()> {
    s.require_kind(Kind::Probability)?;
    s.ensure_same_shape(g.as_volume())
}

fn gradient_volume(s: &Volume, grad: Vec<f64>) -> Result<Volume> {
    Volume::new(
        s.dims(),
        s.spacing(),
        Kind::Image,
        grad.into_iter().map(|x| x as f32).collect(),
    )
}

/// Per-voxel cross-entropy and its derivative with respect to `s`.
fn voxel_terms(s: &Volume, g: &Mask) -> (Vec<f64>, Vec<f64>) {
    s.data()
        .iter()
        .zip(g.as_volume().data())
        .map(|(&si, &gi)| {
            let (si, gi) = (f64::from(si), f64::from(gi));
            let c = si.clamp(PROB_EPS, 1.0 - PROB_EPS);
            let ce = -(gi * c.ln() + (1.0 - gi) * (1.0 - c).ln());
            let d = if c == si {
                -gi / c + (1.0 - gi) / (1.0 - c)
            } else {
                0.0
            };
            (ce, d)
        })
        .unzip()
}

/// Per-voxel binary cross-entropy values.
pub fn voxel_cross_entropy(s: &Volume, g: &Mask) -> Result<Vec<f64>> {
    check_inputs(s, g)?;
    Ok(voxel_terms(s, g).0)
}

pub fn cross_entropy(s: &Volume, g: &Mask) -> Result<LossValue> {
    check_inputs(s, g)?;
    let (ce, d) = voxel_terms(s, g);
    let n = ce.len() as f64;
    let grad = d.into_iter().map(|x| x / n).collect();
    Ok(LossValue {
        value: pairwise_sum(&ce) / n,
        gradient: Some(gradient_volume(s, grad)?),
    })
}

/// Soft Dice loss `1 - (2 sum(s g) + eps) / (sum(s) + sum(g) + eps)`.
pub fn dice_loss(s: &Volume, g: &Mask) -> Result<LossValue> {
    check_inputs(s, g)?;
    let sv: Vec<f64> = s.data().iter().map(|&x| f64::from(x)).collect();
    let gv: Vec<f64> = g.as_volume().data().iter().map(|&x| f64::from(x)).collect();
    let inter: Vec<f64> = sv.iter().zip(&gv).map(|(a, b)| a * b).collect();
    let num = 2.0 * pairwise_sum(&inter) + DICE_EPS;
    let den = pairwise_sum(&sv) + pairwise_sum(&gv) + DICE_EPS;
    let grad = gv
        .iter()
        .map(|&gi| -(2.0 * gi * den - num) / (den * den))
        .collect();
    Ok(LossValue {
        value: 1.0 - num / den,
        gradient: Some(gradient_volume(s, grad)?),
    })
}

/// Indices of the selected voxels in ascending index order.
fn select_topk(ce: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ce.len()).collect();
    // Highest loss first; ties go to the lower linear index.
    order.sort_unstable_by(|&a, &b| ce[b].total_cmp(&ce[a]).then(a.cmp(&b)));
    order.truncate(count);
    order.sort_unstable();
    order
}

pub fn topk_loss(s: &Volume, g: &Mask, cfg: &TopKConfig) -> Result<LossValue> {
    check_inputs(s, g)?;
    let (ce, d) = voxel_terms(s, g);
    let selected = select_topk(&ce, cfg.selected_count(ce.len()));
    let denom = match cfg.norm {
        TopKNorm::Selected => selected.len() as f64,
        TopKNorm::Total => ce.len() as f64,
    };
    let picked: Vec<f64> = selected.iter().map(|&i| ce[i]).collect();
    let mut grad = vec![0.0; ce.len()];
    for &i in &selected {
        grad[i] = d[i] / denom;
    }
    Ok(LossValue {
        value: pairwise_sum(&picked) / denom,
        gradient: Some(gradient_volume(s, grad)?),
    })
}

/// `topk_loss + dice_loss`, values and gradients.
pub fn combined_loss(s: &Volume, g: &Mask, cfg: &TopKConfig) -> Result<LossValue> {
    let t = topk_loss(s, g, cfg)?;
    let d = dice_loss(s, g)?;
    let gradient = match (t.gradient, d.gradient) {
        (Some(a), Some(b)) => Some(gradient_volume(
            s,
            a.data()
                .iter()
                .zip(b.data())
                .map(|(&x, &y)| f64::from(x) + f64::from(y))
                .collect(),
        )?),
        _ => None,
    };
    Ok(LossValue {
        value: t.value + d.value,
        gradient,
    })
}

/// The voxels TopK attends to: the `ceil(k% * N)` highest-loss voxels.
pub fn topk_focus_mask(s: &Volume, g: &Mask, cfg: &TopKConfig) -> Result<Mask> {
    check_inputs(s, g)?;
    let (ce, _) = voxel_terms(s, g);
    let mut bits = vec![false; ce.len()];
    for i in select_topk(&ce, cfg.selected_count(ce.len())) {
        bits[i] = true;
    }
    Mask::from_bools(s.dims(), s.spacing(), &bits)
}
