//! Loading a data source, running the repeats and writing the outputs.

use std::fs;
use std::path::Path;

use rda_core::datasets::preprocess;
use rda_core::evaluation::{aggregate, run_repeat, validate_experiment, EvaluationReport, RepeatOutcome};
use rda_core::LabeledDataset;

use crate::csv_io::load_csv;
use crate::error::{Error, Result};
use crate::idx::load_idx;
use crate::report::{hash_inputs, trace_csv, trace_file_name, DataSource, Report, RunConfig};
use crate::svg;

/// Reads the data. IDX images are shuffled with `seed`.
pub fn load_source(source: &DataSource, seed: u64) -> Result<LabeledDataset> {
    for path in source.paths() {
        if !path.exists() {
            return Err(Error::MissingPath(path.to_path_buf()));
        }
    }
    match source {
        DataSource::Csv {
            path,
            label_column,
            header,
        } => load_csv(path, *label_column, *header),
        DataSource::Idx { images, labels, resize } => {
            let raw = load_idx(images, labels)?;
            Ok(preprocess(&raw, seed, *resize)?)
        }
    }
}

/// Runs every repeat on `jobs` threads. Repeats are independent and each
/// one is seeded from its index, so the result does not depend on `jobs`.
pub fn run_repeats(ds: &LabeledDataset, config: &RunConfig, jobs: usize) -> Result<(EvaluationReport, Vec<RepeatOutcome>)> {
    let cfg = &config.experiment;
    validate_experiment(ds, cfg)?;
    let jobs = jobs.clamp(1, cfg.repeats);
    let results: Vec<rda_core::Result<RepeatOutcome>> = if jobs == 1 {
        (0..cfg.repeats).map(|r| run_repeat(ds, cfg, r)).collect()
    } else {
        std::thread::scope(|scope| {
            let workers: Vec<_> = (0..jobs)
                .map(|w| {
                    scope.spawn(move || {
                        (w..cfg.repeats)
                            .step_by(jobs)
                            .map(|r| (r, run_repeat(ds, cfg, r)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            let mut all: Vec<_> = workers
                .into_iter()
                .flat_map(|h| h.join().expect("repeat worker panicked"))
                .collect();
            all.sort_by_key(|(r, _)| *r);
            all.into_iter().map(|(_, o)| o).collect()
        })
    };
    let outcomes = results.into_iter().collect::<rda_core::Result<Vec<_>>>()?;
    // With λ > 0 the gradient of the L1 term does not vanish, so running
    // out of iterations is only unexpected for the smooth objective.
    for o in outcomes.iter().filter(|_| cfg.lambda == 0.0) {
        if let Some(fit) = &o.fit {
            if fit.termination == rda_core::Termination::MaxIter {
                log::warn!(
                    "repeat {}: solver stopped with {:?} after {} iterations",
                    o.repeat,
                    fit.termination,
                    fit.iterations
                );
            }
        }
    }
    Ok((aggregate(&outcomes, cfg), outcomes))
}

/// Loads the data, hashes the inputs and runs the experiment.
pub fn evaluate(config: &RunConfig, jobs: usize) -> Result<(Report, Vec<RepeatOutcome>)> {
    let ds = load_source(&config.source, config.experiment.seed)?;
    let inputs = hash_inputs(&config.source)?;
    let (evaluation, outcomes) = run_repeats(&ds, config, jobs)?;
    Ok((Report::new(config.clone(), inputs, &evaluation, &outcomes), outcomes))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// `report.json`, `report.csv`, one trace per solver run and optionally
/// `cost_curve.svg`.
pub fn write_outputs(dir: &Path, report: &Report, outcomes: &[RepeatOutcome], plot: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    write(&dir.join("report.json"), &report.to_json())?;
    write(&dir.join("report.csv"), &report.repeats_csv())?;
    let mut series = Vec::new();
    for o in outcomes {
        if let Some(fit) = &o.fit {
            write(&dir.join(trace_file_name(o.repeat)), &trace_csv(fit))?;
            series.push((format!("repeat {}", o.repeat), fit.cost_trace.clone()));
        }
    }
    if plot {
        if series.is_empty() {
            log::warn!("--plot: no solver runs to draw");
        } else {
            write(&dir.join("cost_curve.svg"), &svg::cost_curves(&series))?;
        }
    }
    Ok(())
}
