use std::io::Write;
use std::path::{Path, PathBuf};

use bfseg_core::boundary::boundary_mask;
use bfseg_core::bvol::{names, read_volume, write_volume};
use bfseg_core::distance::{signed_boundary_distance, BandOffset};
use bfseg_core::uam::{apply_threshold, entropy_sum, UamStats};
use bfseg_core::{Mask, Volume};
use serde::Serialize;

use crate::args::{DmMode, Stage1Args};
use crate::{list_cases, par_map, resolve_jobs, write_text, CmdResult, Config, Failure};

pub const LA_MASK: &str = "la_mask";
pub const BAND: &str = "band";
pub const DM: &str = "dm";
pub const SUMMARY: &str = "stage1.json";

#[derive(Debug, Serialize)]
struct Outcome {
    entropy_sum: f64,
    outlier: bool,
    threshold: f64,
}

struct Products {
    outcome: Outcome,
    mask: Mask,
    band: Mask,
    dm: Volume,
}

fn process(p: &Volume, stats: &UamStats, offset: BandOffset) -> Result<Products, Failure> {
    let h = entropy_sum(p)?;
    let mask = apply_threshold(p, stats, h)?;
    let band = boundary_mask(&mask);
    let dm = signed_boundary_distance(&band, p.spacing(), offset)
        .map_err(|e| Failure::from(e).context("degenerate boundary band"))?;
    Ok(Products {
        outcome: Outcome {
            entropy_sum: h,
            outlier: stats.is_outlier(h),
            threshold: stats.threshold_for(h),
        },
        mask,
        band,
        dm,
    })
}

fn write(products: &Products, dir: &Path) -> Result<(), Failure> {
    write_volume(products.mask.as_volume(), &dir.join(LA_MASK))?;
    write_volume(products.band.as_volume(), &dir.join(BAND))?;
    write_volume(&products.dm, &dir.join(DM))?;
    let mut text = serde_json::to_string_pretty(&products.outcome).expect("outcome serializes");
    text.push('\n');
    write_text(&dir.join(SUMMARY), &text)
}

pub fn run(a: Stage1Args, config: &Config, out: &mut dyn Write) -> CmdResult {
    let c = &config.stage1;
    let offset = match a.dm_mode.or(c.dm_mode).unwrap_or(DmMode::Millimetre) {
        DmMode::Millimetre => BandOffset::Millimetre,
        DmMode::VoxelStep => BandOffset::VoxelStep,
    };
    let stats_bytes = std::fs::read(&a.stats)
        .map_err(|e| Failure::bad_input(format!("{}: {e}", a.stats.display())))?;
    let stats = UamStats::from_json(&stats_bytes)?;

    if !a.input.is_dir() {
        let p = read_volume(&a.input)?;
        let products = process(&p, &stats, offset)?;
        write(&products, &a.out)?;
        report(out, None, &products.outcome)?;
        return Ok(());
    }

    let prob_name = a
        .prob_name
        .clone()
        .or(c.prob_name.clone())
        .unwrap_or(names::LA_PROB.into());
    let cases: Vec<(String, PathBuf)> = list_cases(&a.input, &prob_name)?;
    if cases.is_empty() {
        return Err(Failure::bad_input(format!(
            "no case directories with {prob_name} under {}",
            a.input.display()
        )));
    }
    let jobs = resolve_jobs(a.jobs, config)?;
    let results = par_map(jobs, &cases, |(id, dir)| {
        let p = read_volume(&dir.join(&prob_name))?;
        let products = process(&p, &stats, offset)?;
        write(&products, &a.out.join(id))?;
        Ok::<_, Failure>(products.outcome)
    })?;
    // Successful cases are reported even when another case failed.
    let mut first = None;
    for ((id, _), r) in cases.iter().zip(results) {
        match r {
            Ok(o) => report(out, Some(id), &o)?,
            Err(f) => {
                eprintln!("error: {id}: {f}");
                first.get_or_insert(f.context(id));
            }
        }
    }
    first.map_or(Ok(()), Err)
}

fn report(out: &mut dyn Write, id: Option<&str>, o: &Outcome) -> std::io::Result<()> {
    if let Some(id) = id {
        writeln!(out, "case: {id}")?;
    }
    writeln!(out, "entropy_sum: {:.6}", o.entropy_sum)?;
    writeln!(out, "outlier: {}", o.outlier)?;
    writeln!(out, "threshold: {}", o.threshold)
}
