use std::io::Write;

use bfseg_core::bvol::write_case_dir;
use bfseg_core::synth::{make_case, make_outlier_case, SynthParams};
use bfseg_core::{Dims, Spacing};
use serde::Serialize;

use crate::args::SynthArgs;
use crate::{first_failure, par_map, resolve_jobs, write_text, CmdResult, Config, Failure};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Serialize)]
struct Manifest {
    dims: [usize; 3],
    spacing_mm: [f64; 3],
    corruption: f64,
    cases: Vec<Entry>,
}

#[derive(Serialize)]
struct Entry {
    case_id: String,
    seed: u64,
    outlier: bool,
}

pub fn run(a: SynthArgs, config: &Config, out: &mut dyn Write) -> CmdResult {
    let c = &config.synth;
    let seed = a.seed.or(c.seed).unwrap_or(0);
    let n_cases = a.cases.or(c.cases).unwrap_or(10);
    let n_outliers = a.outlier_cases.or(c.outlier_cases).unwrap_or(0);
    let [nx, ny, nz] = a.dims.map(|t| t.0).or(c.dims).unwrap_or([32, 32, 8]);
    let [sx, sy, sz] = a
        .spacing
        .map(|t| t.0)
        .or(c.spacing)
        .unwrap_or([1.0, 1.0, 2.5]);
    let corruption = a.corruption.or(c.corruption).unwrap_or(0.0);
    let jobs = resolve_jobs(a.jobs, config)?;

    let params = SynthParams::new(Dims::new(nx, ny, nz)?, Spacing::new(sx, sy, sz)?)
        .with_corruption(corruption);
    let mut plan: Vec<(u64, bool)> = (0..n_cases as u64).map(|i| (seed + i, false)).collect();
    plan.extend((0..n_outliers as u64).map(|i| (seed + n_cases as u64 + i, true)));
    if plan.is_empty() {
        return Err(Failure::bad_input("nothing to generate"));
    }

    let results = par_map(jobs, &plan, |&(s, outlier)| {
        let case = if outlier {
            make_outlier_case(s, &params)
        } else {
            make_case(s, &params)
        }?;
        write_case_dir(&case, &a.out.join(&case.case_id))?;
        Ok::<_, Failure>(Entry {
            case_id: case.case_id,
            seed: s,
            outlier,
        })
    })?;
    let labelled = plan
        .iter()
        .zip(results)
        .map(|(p, r)| (format!("seed {}", p.0), r))
        .collect();
    let entries: Vec<Entry> = first_failure(labelled)?
        .into_iter()
        .map(|(_, e)| e)
        .collect();

    let manifest = Manifest {
        dims: [nx, ny, nz],
        spacing_mm: [sx, sy, sz],
        corruption,
        cases: entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_text(&a.out.join(MANIFEST_NAME), &text)?;
    writeln!(out, "wrote {} cases to {}", plan.len(), a.out.display())?;
    Ok(())
}
