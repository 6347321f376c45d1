//! Implementations of the six subcommands. File formats are the JSON/CSV
//! contracts of the owning core modules; this layer adds only framing and
//! exit-code mapping.

use std::fs;
use std::io::{BufReader, BufWriter, Write};

use serde::Serialize;

use nelab_core::ensembles::{build_sampler, EnsembleSpec, RngStream};
use nelab_core::harness::{
    chi_fit, histogram_csv, histogram_svg, run_experiment, ExperimentConfig,
};
use nelab_core::symmetry::{twirl as twirl_state, ChargeFamily, ChargeOperator};
use nelab_core::witness::{decide_symsep, NeWitness, SymsepVerdict};

use crate::dump::{read_states, write_states, DumpHeader};
use crate::CliError;

fn read_json<T: serde::de::DeserializeOwned>(path: &str, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {what} {path:?}: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid {what} {path:?}: {e}")))
}

fn create_out(path: &str) -> Result<BufWriter<fs::File>, CliError> {
    let file = fs::File::create(path)
        .map_err(|e| CliError::io(format!("cannot create {path:?}: {e}")))?;
    Ok(BufWriter::new(file))
}

pub fn gen(spec_path: &str, count: usize, seed: u64, out_path: &str) -> Result<(), CliError> {
    let spec: EnsembleSpec = read_json(spec_path, "ensemble spec")?;
    let sampler = build_sampler(&spec)?;
    let mut out = create_out(out_path)?;
    let header = DumpHeader::states(Some(spec), Some(seed), count);
    write_states(
        &mut out,
        &header,
        (0..count).map(|i| sampler.sample(&mut RngStream::new(seed, i as u64))),
    )?;
    out.flush().map_err(CliError::io)
}

pub fn ne(states_path: &str, charge_path: &str, out_path: &str, format: &str) -> Result<(), CliError> {
    let charge: ChargeOperator = read_json(charge_path, "charge")?;
    let file = fs::File::open(states_path)
        .map_err(|e| CliError::io(format!("cannot read states {states_path:?}: {e}")))?;
    let states = read_states(BufReader::new(file))?;

    let mut values: Vec<f64> = Vec::with_capacity(states.len());
    let mut witness: Option<(usize, NeWitness)> = None;
    for (line_no, rho) in &states {
        let d_a = charge.dim();
        if rho.dim() % d_a != 0 {
            return Err(CliError::validation(format!(
                "line {line_no}: state dimension {} is not a multiple of the charge dimension {d_a}",
                rho.dim()
            )));
        }
        let d_b = rho.dim() / d_a;
        // Rebuild the witness only when the state dimension changes.
        if witness.as_ref().map(|(dim, _)| *dim) != Some(rho.dim()) {
            let w = NeWitness::new(&charge, (d_a, d_b)).map_err(|e| {
                CliError::validation(format!("line {line_no}: {e}"))
            })?;
            witness = Some((rho.dim(), w));
        }
        let ne = witness
            .as_ref()
            .unwrap()
            .1
            .evaluate(rho)
            .map_err(|e| CliError::validation(format!("line {line_no}: {e}")))?;
        values.push(ne);
    }

    let mut out = create_out(out_path)?;
    match format {
        "json" => {
            let line = serde_json::to_string(&values).map_err(CliError::config)?;
            writeln!(out, "{line}").map_err(CliError::io)?;
        }
        _ => {
            writeln!(out, "ne").map_err(CliError::io)?;
            for v in &values {
                writeln!(out, "{v}").map_err(CliError::io)?;
            }
        }
    }
    out.flush().map_err(CliError::io)
}

pub fn twirl(states_path: &str, family_path: &str, out_path: &str) -> Result<(), CliError> {
    let family: ChargeFamily = read_json(family_path, "charge family")?;
    let file = fs::File::open(states_path)
        .map_err(|e| CliError::io(format!("cannot read states {states_path:?}: {e}")))?;
    let states = read_states(BufReader::new(file))?;

    let mut twirled = Vec::with_capacity(states.len());
    for (line_no, rho) in states {
        let out = twirl_state(&rho, &family)
            .map_err(|e| CliError::validation(format!("line {line_no}: {e}")))?;
        twirled.push(out);
    }
    let mut out = create_out(out_path)?;
    let header = DumpHeader::states(None, None, twirled.len());
    write_states(&mut out, &header, twirled.into_iter())?;
    out.flush().map_err(CliError::io)
}

#[derive(Serialize)]
struct VerdictLine {
    line: usize,
    #[serde(flatten)]
    verdict: SymsepVerdict,
}

pub fn decide(states_path: &str, family_path: &str, out_path: &str) -> Result<(), CliError> {
    let family: ChargeFamily = read_json(family_path, "charge family")?;
    let file = fs::File::open(states_path)
        .map_err(|e| CliError::io(format!("cannot read states {states_path:?}: {e}")))?;
    let states = read_states(BufReader::new(file))?;

    let mut out = create_out(out_path)?;
    for (line_no, rho) in states {
        let verdict = decide_symsep(&rho, &family)
            .map_err(|e| CliError::validation(format!("line {line_no}: {e}")))?;
        let line = serde_json::to_string(&VerdictLine {
            line: line_no,
            verdict,
        })
        .map_err(CliError::config)?;
        writeln!(out, "{line}").map_err(CliError::io)?;
    }
    out.flush().map_err(CliError::io)
}

pub fn experiment(
    config_path: &str,
    out_prefix: &str,
    svg: bool,
    workers: Option<usize>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut config: ExperimentConfig = read_json(config_path, "experiment config")?;
    if let Some(w) = workers {
        config.workers = w;
    } else if let Ok(env_workers) = std::env::var("NELAB_WORKERS") {
        config.workers = env_workers
            .parse()
            .map_err(|e| CliError::config(format!("NELAB_WORKERS: {e}")))?;
    }
    if let Some(s) = seed {
        config.seed = s;
    }

    let results = run_experiment(&config)?;

    let json = serde_json::to_string_pretty(&results).map_err(CliError::config)?;
    fs::write(format!("{out_prefix}.results.json"), json).map_err(CliError::io)?;
    fs::write(
        format!("{out_prefix}.hist.csv"),
        histogram_csv(&results.stats.histogram),
    )
    .map_err(CliError::io)?;
    if svg {
        let title = format!(
            "NE distribution: {} {:?}",
            results.config.ensemble.kind, results.config.ensemble.dims
        );
        fs::write(
            format!("{out_prefix}.hist.svg"),
            histogram_svg(&results.stats, results.chi_fit.as_ref(), &title),
        )
        .map_err(CliError::io)?;
    }
    println!(
        "samples={} mean={:.6} std={:.6} wall={:.2}s",
        results.stats.sample_count,
        results.stats.mean,
        results.stats.std,
        results.wall_time_seconds
    );
    Ok(())
}

pub fn fit(input_path: &str, out_path: Option<&str>) -> Result<(), CliError> {
    let text = fs::read_to_string(input_path)
        .map_err(|e| CliError::io(format!("cannot read {input_path:?}: {e}")))?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(e) => {
                // Tolerate a single header line.
                if idx == 0 {
                    continue;
                }
                return Err(CliError::config(format!(
                    "line {}: not a number: {e}",
                    idx + 1
                )));
            }
        }
    }
    let fit = chi_fit(&values)?;
    let json = serde_json::to_string_pretty(&fit).map_err(CliError::config)?;
    match out_path {
        Some(path) => fs::write(path, json).map_err(CliError::io)?,
        None => println!("{json}"),
    }
    Ok(())
}
