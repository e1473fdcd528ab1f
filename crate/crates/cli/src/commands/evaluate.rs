use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use bfseg_core::bvol::{names, pair_paths, read_volume};
use bfseg_core::metrics::{aggregate, dice_score, EvalRow, SurfaceDistances};
use bfseg_core::uam::scar_threshold;
use bfseg_core::{Kind, Mask};

use crate::args::EvaluateArgs;
use crate::commands::stage1::LA_MASK;
use crate::{
    first_failure, list_cases, par_map, resolve_jobs, write_text, CmdResult, Config, Failure,
};

pub const SCAR_MASK: &str = "scar_mask";

fn read_mask(path: &Path) -> Result<Mask, Failure> {
    Ok(Mask::from_volume(read_volume(path)?)?)
}

fn cavity_row(id: &str, pred: &Path, gt: &Path, hd95: bool) -> Result<EvalRow, Failure> {
    let p = read_mask(&pred.join(LA_MASK))?;
    let g = read_mask(&gt.join(names::LA_LABEL))?;
    p.as_volume().ensure_same_grid(g.as_volume())?;
    let dice_pct = dice_score(&p, &g)?;
    // Surface distances are undefined when either mask is empty.
    let (hd_mm, asd_mm) = if p.any() && g.any() {
        let d = SurfaceDistances::compute(&p, &g, g.spacing())?;
        (
            Some(if hd95 { d.hausdorff95() } else { d.hausdorff() }),
            Some(d.average()),
        )
    } else {
        eprintln!("warning: {id}: empty mask, surface distances skipped");
        (None, None)
    };
    Ok(EvalRow {
        case_id: id.to_string(),
        dice_pct,
        hd_mm,
        asd_mm,
    })
}

fn scar_row(id: &str, pred: &Path, gt: &Path) -> Result<Option<EvalRow>, Failure> {
    let label = gt.join(names::SCAR_LABEL);
    if !pair_paths(&label).0.is_file() {
        return Ok(None);
    }
    let mask_path = pred.join(SCAR_MASK);
    let p = if pair_paths(&mask_path).0.is_file() {
        read_mask(&mask_path)?
    } else {
        let prob = read_volume(&pred.join(names::SCAR_PROB))?;
        prob.require_kind(Kind::Probability)?;
        scar_threshold(&prob)?
    };
    let g = read_mask(&label)?;
    p.as_volume().ensure_same_grid(g.as_volume())?;
    Ok(Some(EvalRow {
        case_id: id.to_string(),
        dice_pct: dice_score(&p, &g)?,
        hd_mm: None,
        asd_mm: None,
    }))
}

fn ids(cases: &[(String, std::path::PathBuf)]) -> BTreeSet<&str> {
    cases.iter().map(|(id, _)| id.as_str()).collect()
}

pub fn run(a: EvaluateArgs, config: &Config, out: &mut dyn Write) -> CmdResult {
    let hd95 = a.hd95 || config.evaluate.hd95.unwrap_or(false);
    let jobs = resolve_jobs(a.jobs, config)?;
    let pred = list_cases(&a.pred, LA_MASK)?;
    let gt = list_cases(&a.gt, names::LA_LABEL)?;
    if ids(&pred) != ids(&gt) {
        let only_pred: Vec<_> = ids(&pred).difference(&ids(&gt)).copied().collect();
        let only_gt: Vec<_> = ids(&gt).difference(&ids(&pred)).copied().collect();
        return Err(Failure::bad_input(format!(
            "case sets differ: prediction only {only_pred:?}, ground truth only {only_gt:?}"
        )));
    }
    if pred.is_empty() {
        return Err(Failure::bad_input(format!(
            "no cases under {}",
            a.pred.display()
        )));
    }

    let rows = par_map(jobs, &pred, |(id, dir)| {
        cavity_row(id, dir, &a.gt.join(id), hd95)
    })?;
    let cavity = first_failure(pred.iter().map(|(id, _)| id.clone()).zip(rows).collect())?;
    let cavity = aggregate(cavity.into_iter().map(|(_, r)| r).collect())?;
    let mut reports = vec![("cavity", cavity)];

    if let Some(scar_root) = &a.scar_pred {
        let rows = par_map(jobs, &pred, |(id, _)| {
            scar_row(id, &scar_root.join(id), &a.gt.join(id))
        })?;
        let scar = first_failure(pred.iter().map(|(id, _)| id.clone()).zip(rows).collect())?;
        let scar: Vec<EvalRow> = scar.into_iter().filter_map(|(_, r)| r).collect();
        if scar.is_empty() {
            return Err(Failure::bad_input("no scar labels to evaluate against"));
        }
        reports.push(("scar", aggregate(scar)?));
    }

    for (i, (label, report)) in reports.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        let table = report.render_table(label);
        write!(out, "{table}")?;
        if let Some(dir) = &a.out {
            write_text(&dir.join(format!("{label}.txt")), &table)?;
            write_text(&dir.join(format!("{label}.jsonl")), &report.to_jsonl())?;
        }
    }
    Ok(())
}
