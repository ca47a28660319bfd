use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::config::{Experiment, ExperimentConfig, Format};
use crate::probes::run_probe;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The probe raised an error; counted as a failure.
    Error,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeRecord {
    pub index: usize,
    pub kind: String,
    pub status: Status,
    pub message: String,
    pub artifacts: Vec<String>,
    pub metrics: Value,
}

/// Everything written to `summary.json`. No wall-clock data, so two runs
/// of the same config produce the same bytes.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportBundle {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub system: &'static str,
    pub passed: bool,
    /// False when a resource error stopped the run early.
    pub complete: bool,
    pub probe_count: usize,
    pub probes: Vec<ProbeRecord>,
    pub config: ExperimentConfig,
    #[serde(skip)]
    pub directory: PathBuf,
}

impl ReportBundle {
    pub fn exit_code(&self) -> i32 {
        if self.passed && self.complete {
            0
        } else {
            1
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), RunError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| RunError::Write { path, source })
}

fn aborts(e: &minlab_core::Error) -> bool {
    matches!(e, minlab_core::Error::Resource(_) | minlab_core::Error::Depth { .. })
}

/// Run every probe in order and write the report bundle into `dir`.
/// Probe failures are recorded and the run continues; a resource error
/// stops it and the bundle is marked incomplete.
pub fn run_experiment(exp: &Experiment, dir: &Path) -> Result<ReportBundle, RunError> {
    std::fs::create_dir_all(dir).map_err(|source| RunError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let out = &exp.config.output;
    let mut records = Vec::new();
    let mut complete = true;
    for (k, probe) in exp.config.probes.iter().enumerate() {
        let index = k + 1;
        let probe = probe.get_ref();
        let kind = probe.kind();
        let stem = format!("{index:02}-{kind}");
        let seed = out.seed.wrapping_add(index as u64);
        match run_probe(exp, probe, seed) {
            Ok(o) => {
                let mut artifacts = Vec::new();
                if let (Some(t), true) = (&o.csv, out.wants(Format::Csv)) {
                    let name = format!("{stem}.csv");
                    write(dir, &name, &t.to_csv())?;
                    artifacts.push(name);
                }
                if out.wants(Format::Json) {
                    let name = format!("{stem}.json");
                    let text = serde_json::to_string_pretty(&o.metrics).expect("metrics serialize");
                    write(dir, &name, &(text + "\n"))?;
                    artifacts.push(name);
                }
                if let (Some(s), true) = (&o.svg, out.wants(Format::Svg)) {
                    let name = format!("{stem}.svg");
                    write(dir, &name, s)?;
                    artifacts.push(name);
                }
                records.push(ProbeRecord {
                    index,
                    kind: kind.to_string(),
                    status: if o.passed { Status::Pass } else { Status::Fail },
                    message: o.message,
                    artifacts,
                    metrics: o.metrics,
                });
            }
            Err(e) => {
                let stop = aborts(&e);
                records.push(ProbeRecord {
                    index,
                    kind: kind.to_string(),
                    status: Status::Error,
                    message: e.to_string(),
                    artifacts: Vec::new(),
                    metrics: Value::Null,
                });
                if stop {
                    complete = false;
                    break;
                }
            }
        }
    }
    let bundle = ReportBundle {
        tool: "minlab",
        version: env!("CARGO_PKG_VERSION"),
        seed: out.seed,
        system: exp.config.system.get_ref().kind(),
        passed: records.iter().all(|r| r.status == Status::Pass),
        complete,
        probe_count: exp.config.probes.len(),
        probes: records,
        config: exp.config.clone(),
        directory: dir.to_path_buf(),
    };
    let text = serde_json::to_string_pretty(&bundle).expect("summary serializes");
    write(dir, "summary.json", &(text + "\n"))?;
    Ok(bundle)
}
