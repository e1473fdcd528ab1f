use std::io::Write;

use bfseg_core::bvol::{read_volume, write_volume};
use bfseg_core::losses::{
    combined_loss, cross_entropy, dice_loss, topk_focus_mask, topk_loss, TopKConfig, TopKNorm,
};
use bfseg_core::Mask;

use crate::args::{LossEvalArgs, Norm};
use crate::{CmdResult, Config};

pub const DEFAULT_K: [f64; 4] = [100.0, 20.0, 10.0, 5.0];

pub fn run(a: LossEvalArgs, config: &Config, out: &mut dyn Write) -> CmdResult {
    let c = &config.loss;
    let ks = a.k.clone().or(c.k.clone()).unwrap_or(DEFAULT_K.to_vec());
    let norm = match a.norm.or(c.norm).unwrap_or(Norm::Selected) {
        Norm::Selected => TopKNorm::Selected,
        Norm::Total => TopKNorm::Total,
    };
    // Validate every k before doing any work.
    let configs = ks
        .iter()
        .map(|&k| TopKConfig::new(k).map(|cfg| cfg.with_norm(norm)))
        .collect::<Result<Vec<_>, _>>()?;

    let s = read_volume(&a.prob)?;
    let g = Mask::from_volume(read_volume(&a.gt)?)?;

    writeln!(out, "{:<10} {:>6} {:>14}", "loss", "k", "value")?;
    writeln!(
        out,
        "{:<10} {:>6} {:>14.8}",
        "ce",
        "-",
        cross_entropy(&s, &g)?.value
    )?;
    writeln!(
        out,
        "{:<10} {:>6} {:>14.8}",
        "dice",
        "-",
        dice_loss(&s, &g)?.value
    )?;
    for cfg in &configs {
        let k = cfg.k_percent();
        writeln!(
            out,
            "{:<10} {:>6} {:>14.8}",
            "topk",
            k,
            topk_loss(&s, &g, cfg)?.value
        )?;
        writeln!(
            out,
            "{:<10} {:>6} {:>14.8}",
            "combined",
            k,
            combined_loss(&s, &g, cfg)?.value
        )?;
        if let Some(dir) = &a.focus_out {
            let focus = topk_focus_mask(&s, &g, cfg)?;
            write_volume(focus.as_volume(), &dir.join(format!("focus_k{k}")))?;
        }
    }
    Ok(())
}
