use std::io::Write;

use bfseg_core::bvol::{names, read_volume};
use bfseg_core::uam::{
    entropy_sum, fit_population, format_entropy_manifest, parse_entropy_manifest,
};

use crate::args::UamFitArgs;
use crate::{
    first_failure, list_cases, par_map, resolve_jobs, write_text, CmdResult, Config, Failure,
};

pub fn run(a: UamFitArgs, config: &Config, out: &mut dyn Write) -> CmdResult {
    let c = &config.uam;
    let prob_name = a
        .prob_name
        .clone()
        .or(c.prob_name.clone())
        .unwrap_or(names::LA_PROB.into());
    let jobs = resolve_jobs(a.jobs, config)?;

    let rows: Vec<(String, f64)> = if a.input.is_dir() {
        let cases = list_cases(&a.input, &prob_name)?;
        let sums = par_map(jobs, &cases, |(_, dir)| {
            let p = read_volume(&dir.join(&prob_name))?;
            Ok::<_, Failure>(entropy_sum(&p)?)
        })?;
        first_failure(cases.into_iter().map(|(id, _)| id).zip(sums).collect())?
    } else {
        let text = std::fs::read_to_string(&a.input)
            .map_err(|e| Failure::bad_input(format!("{}: {e}", a.input.display())))?;
        parse_entropy_manifest(&text)?
    };

    let values: Vec<f64> = rows.iter().map(|(_, h)| *h).collect();
    let mut stats = fit_population(&values)?;
    if let Some(k) = a.sigma_factor.or(c.sigma_factor) {
        stats = stats.with_sigma_factor(k)?;
    }
    stats = stats.two_sided(a.two_sided || c.two_sided.unwrap_or(false));

    write_text(&a.out, &stats.to_json())?;
    if let Some(path) = &a.entropies_out {
        write_text(path, &format_entropy_manifest(&rows))?;
    }
    writeln!(out, "n: {}", stats.n_cases)?;
    writeln!(out, "mean: {}", stats.mean)?;
    writeln!(out, "std: {}", stats.std)?;
    Ok(())
}
