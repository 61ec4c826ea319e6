//! CSV and summary emitters for reasoning traces.
//!
//! Both CSV layouts print reals with 17 significant digits so that parsing
//! them back reconstructs the exact f64, and iterate rows in a fixed order,
//! making outputs byte-identical across runs.

use std::fmt::Write as _;
use std::path::Path;

use crate::engine::{FcmModel, ReasoningTrace};
use crate::error::{DrvError, FileError};

/// 17 significant digits: enough to round-trip any f64.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// `iteration,concept,value,probability` rows, one per support point,
/// ordered by iteration, then concept position in the model, then value.
pub fn trace_csv(trace: &ReasoningTrace, model: &FcmModel) -> String {
    let mut out = String::from("iteration,concept,value,probability\n");
    for (iteration, state) in trace.states.iter().enumerate() {
        for (name, drv) in model.concepts().iter().zip(state) {
            for (v, p) in drv.iter() {
                let _ = writeln!(out, "{iteration},{name},{},{}", real(v), real(p));
            }
        }
    }
    out
}

/// `iteration,concept,mean,q<r1>,...,q<rn>` rows: the expected value and
/// the quantiles at `ranks` for every concept at every iteration.
pub fn percentile_csv(
    trace: &ReasoningTrace,
    model: &FcmModel,
    ranks: &[f64],
) -> Result<String, DrvError> {
    let mut out = String::from("iteration,concept,mean");
    for r in ranks {
        let _ = write!(out, ",q{r}");
    }
    out.push('\n');
    for (iteration, state) in trace.states.iter().enumerate() {
        for (name, drv) in model.concepts().iter().zip(state) {
            let _ = write!(out, "{iteration},{name},{}", real(drv.mean()));
            for &r in ranks {
                let _ = write!(out, ",{}", real(drv.quantile(r)?));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Human-readable run outcome: convergence, iteration count, final means.
pub fn run_summary(trace: &ReasoningTrace, model: &FcmModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "converged: {}", trace.converged);
    match trace.convergence_iteration {
        Some(i) => {
            let _ = writeln!(out, "iterations: {i}");
        }
        None => {
            let _ = writeln!(out, "iterations: {} (no convergence)", trace.states.len() - 1);
        }
    }
    out.push_str("final means:\n");
    for (name, drv) in model.concepts().iter().zip(trace.final_state()) {
        let _ = writeln!(out, "  {name} = {:?}", drv.mean());
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), FileError> {
    std::fs::write(path, contents)
        .map_err(|source| FileError { path: path.to_path_buf(), source })
}

pub fn write_trace_csv(
    trace: &ReasoningTrace,
    model: &FcmModel,
    path: &Path,
) -> Result<(), FileError> {
    write_file(path, &trace_csv(trace, model))
}

pub fn write_percentile_csv(
    trace: &ReasoningTrace,
    model: &FcmModel,
    ranks: &[f64],
    path: &Path,
) -> Result<(), FileError> {
    let contents = percentile_csv(trace, model, ranks)
        .expect("ranks are validated before any run starts");
    write_file(path, &contents)
}

/// Trace rows grouped back into (iteration, concept) keys, each with its
/// value/probability pairs.
pub type TraceGroups = Vec<((usize, String), Vec<(f64, f64)>)>;

/// Parses a trace CSV back into per-(iteration, concept) value/probability
/// pairs. Used by tests to verify the round trip.
pub fn parse_trace_csv(text: &str) -> TraceGroups {
    let mut groups: TraceGroups = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let key = (fields[0].parse().unwrap(), fields[1].to_string());
        let pair = (fields[2].parse().unwrap(), fields[3].parse().unwrap());
        match groups.last_mut() {
            Some((k, pairs)) if *k == key => pairs.push(pair),
            _ => groups.push((key, vec![pair])),
        }
    }
    groups
}
