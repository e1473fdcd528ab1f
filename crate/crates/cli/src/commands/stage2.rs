use std::io::Write;
use std::path::Path;

use bfseg_core::bundle::write_bundle;
use bfseg_core::bvol::{names, read_volume};
use bfseg_core::volume::zscore_normalize;

use crate::args::Stage2Args;
use crate::commands::stage1::DM;
use crate::{first_failure, list_cases, par_map, resolve_jobs, CmdResult, Config, Failure};

fn bundle(
    image: &Path,
    dm: &Path,
    out: &Path,
    normalize: bool,
) -> Result<std::path::PathBuf, Failure> {
    let mut image = read_volume(image)?;
    if normalize {
        image = zscore_normalize(&image)?;
    }
    let dm = read_volume(dm)?;
    Ok(write_bundle(out, &image, &dm)?)
}

pub fn run(a: Stage2Args, config: &Config, out: &mut dyn Write) -> CmdResult {
    match (&a.image, &a.dm, &a.cases, &a.stage1) {
        (Some(image), Some(dm), None, None) => {
            let manifest = bundle(image, dm, &a.out, a.normalize)?;
            writeln!(out, "bundle: {}", manifest.display())?;
            Ok(())
        }
        (None, None, Some(cases_root), Some(stage1_root)) => {
            let cases = list_cases(stage1_root, DM)?;
            if cases.is_empty() {
                return Err(Failure::bad_input(format!(
                    "no stage-1 outputs under {}",
                    stage1_root.display()
                )));
            }
            let jobs = resolve_jobs(a.jobs, config)?;
            let results = par_map(jobs, &cases, |(id, dir)| {
                bundle(
                    &cases_root.join(id).join(names::IMAGE),
                    &dir.join(DM),
                    &a.out.join(id),
                    a.normalize,
                )
            })?;
            let ids = cases.into_iter().map(|(id, _)| id);
            for (id, manifest) in first_failure(ids.zip(results).collect())? {
                writeln!(out, "{id}: {}", manifest.display())?;
            }
            Ok(())
        }
        _ => Err(Failure::bad_input(
            "give either --image and --dm, or --cases and --stage1",
        )),
    }
}
