//! On-disk run outputs: metrics table, PCA tables, snapshots, config echo.
//!
//! An output directory looks like:
//!
//! ```text
//! out/
//!   config.toml                 effective configuration
//!   metrics.csv                 one row per metrics emission
//!   snapshots/step_00000050.saec
//!   pca/step_00000050_m3.csv    PCA tables, written with each snapshot
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::config::SimConfig;
use crate::engine::{Engine, RunEvent, RunState};
use crate::error::{ConfigError, RunError};
use crate::metrics::MetricsRecord;
use crate::molecule::MoleculeKind;
use crate::pca::{pca_project_flat, PcaProjection};
use crate::snapshot::Snapshot;

pub const CONFIG_FILE: &str = "config.toml";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const PCA_DIR: &str = "pca";
pub const PCA_DIMS: usize = 3;

/// Column names of the metrics table for a config.
pub fn metrics_columns(config: &SimConfig) -> Vec<String> {
    let mut cols = vec!["step".to_string()];
    cols.extend(config.pathways.iter().map(|p| p.column()));
    cols.extend(MoleculeKind::ALL.iter().map(|k| format!("clusters_{}", k.name())));
    cols.push("wallclock_ms".into());
    cols
}

fn header_comments(config: &SimConfig) -> Vec<String> {
    vec![
        format!("# seed={} catalyst_seed={}", config.seed, config.seed),
        format!("# noise={:?} sigma={}", config.noise.kind, config.noise.sigma).to_lowercase(),
        format!(
            "# epsilon={} sample_size={} cadence={}",
            config.metrics.epsilon, config.metrics.sample_size, config.metrics.cadence
        ),
    ]
}

/// Append-only comma-separated metrics table. Rows must have strictly
/// increasing steps; each row is flushed as it is written.
pub struct MetricsWriter {
    path: PathBuf,
    file: File,
    columns: usize,
    last_step: Option<u64>,
}

impl MetricsWriter {
    fn err(&self, message: impl Into<String>) -> RunError {
        RunError::Metrics {
            path: self.path.clone(),
            message: message.into(),
        }
    }

    /// Creates (or replaces) a metrics file and writes its header.
    pub fn create(path: &Path, config: &SimConfig) -> Result<Self, RunError> {
        let io = |source| RunError::Io {
            step: 0,
            path: path.to_path_buf(),
            source,
        };
        let mut file = File::create(path).map_err(io)?;
        let columns = metrics_columns(config);
        let mut header = header_comments(config).join("\n");
        header.push('\n');
        header.push_str(&columns.join(","));
        header.push('\n');
        file.write_all(header.as_bytes()).map_err(io)?;
        file.flush().map_err(io)?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
            columns: columns.len(),
            last_step: None,
        })
    }

    /// Reopens an existing metrics file for a run resumed at `resume_step`,
    /// dropping any rows past it (left behind by an interrupted run).
    pub fn reopen(path: &Path, config: &SimConfig, resume_step: u64) -> Result<Self, RunError> {
        if !path.exists() {
            return Self::create(path, config);
        }
        let io = |source| RunError::Io {
            step: resume_step,
            path: path.to_path_buf(),
            source,
        };
        let bad = |message: String| RunError::Metrics {
            path: path.to_path_buf(),
            message,
        };
        let columns = metrics_columns(config);
        let reader = BufReader::new(File::open(path).map_err(io)?);
        let mut kept = String::new();
        let mut last_step = None;
        let mut saw_header = false;
        for line in reader.lines() {
            let line = line.map_err(io)?;
            if line.starts_with('#') {
                kept.push_str(&line);
                kept.push('\n');
                continue;
            }
            if !saw_header {
                if line != columns.join(",") {
                    return Err(bad(format!("header {line:?} does not match config")));
                }
                saw_header = true;
                kept.push_str(&line);
                kept.push('\n');
                continue;
            }
            // A partial final row has too few fields; drop it with the rest.
            if line.split(',').count() != columns.len() {
                break;
            }
            let step: u64 = line
                .split(',')
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("bad row {line:?}")))?;
            if step > resume_step {
                break;
            }
            last_step = Some(step);
            kept.push_str(&line);
            kept.push('\n');
        }
        if !saw_header {
            return Self::create(path, config);
        }
        fs::write(path, kept).map_err(io)?;
        let file = OpenOptions::new().append(true).open(path).map_err(io)?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
            columns: columns.len(),
            last_step,
        })
    }

    pub fn append(&mut self, record: &MetricsRecord) -> Result<(), RunError> {
        if let Some(last) = self.last_step {
            if record.step <= last {
                return Err(self.err(format!(
                    "step {} is not after previous row's step {last}",
                    record.step
                )));
            }
        }
        let mut fields = vec![record.step.to_string()];
        fields.extend(record.re_by_pathway.iter().map(|(_, v)| v.to_string()));
        fields.extend(record.cluster_counts.iter().map(|c| c.to_string()));
        fields.push(format!("{:.3}", record.wallclock_ms));
        if fields.len() != self.columns {
            return Err(self.err(format!(
                "record has {} fields, table has {} columns",
                fields.len(),
                self.columns
            )));
        }
        let mut line = fields.join(",");
        line.push('\n');
        let step = record.step;
        let path = self.path.clone();
        let io = |source| RunError::Io { step, path, source };
        self.file.write_all(line.as_bytes()).map_err(io)?;
        self.file.flush().map_err(|source| RunError::Io {
            step,
            path: self.path.clone(),
            source,
        })?;
        self.last_step = Some(step);
        Ok(())
    }
}

/// Writes a PCA table: an explained-variance row, a column header, then one
/// row of coordinates per molecule.
pub fn write_pca_table(path: &Path, projection: &PcaProjection) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str("# explained_variance");
    for e in &projection.explained {
        out.push_str(&format!(",{e}"));
    }
    out.push('\n');
    let header: Vec<String> = (1..=projection.explained.len()).map(|i| format!("pc{i}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &projection.coords {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, out)?;
    fs::rename(tmp, path)
}

pub fn snapshot_path(out_dir: &Path, step: u64) -> PathBuf {
    out_dir.join(SNAPSHOT_DIR).join(format!("step_{step:08}.saec"))
}

/// Output directory a snapshot belongs to.
pub fn out_dir_of_snapshot(snapshot: &Path) -> PathBuf {
    let parent = snapshot.parent().unwrap_or(Path::new("."));
    if parent.file_name().is_some_and(|n| n == SNAPSHOT_DIR) {
        parent.parent().unwrap_or(Path::new(".")).to_path_buf()
    } else {
        parent.to_path_buf()
    }
}

/// Runs `engine` from `start` to step `until`, persisting everything under
/// `out_dir`. Fresh runs (`start.step == 0`) create the metrics file;
/// resumed runs extend it.
pub fn run_to_dir(
    engine: &Engine,
    start: RunState,
    until: u64,
    out_dir: &Path,
) -> Result<RunState, RunError> {
    let config = engine.config();
    let step0 = start.step;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io {
            step: step0,
            path,
            source,
        }
    };
    for dir in [out_dir.to_path_buf(), out_dir.join(SNAPSHOT_DIR), out_dir.join(PCA_DIR)] {
        fs::create_dir_all(&dir).map_err(io(&dir))?;
    }
    let mut echo = config.clone();
    echo.steps = until;
    let config_toml = echo.to_toml();
    let cfg_path = out_dir.join(CONFIG_FILE);
    fs::write(&cfg_path, &config_toml).map_err(io(&cfg_path))?;

    let metrics_path = out_dir.join(METRICS_FILE);
    let fresh = start.step == 0;
    let mut metrics = if config.metrics.cadence == 0 {
        None
    } else if fresh {
        Some(MetricsWriter::create(&metrics_path, config)?)
    } else {
        Some(MetricsWriter::reopen(&metrics_path, config, start.step)?)
    };

    engine.run(start, until, fresh, |event| match event {
        RunEvent::Metrics(record, _) => match metrics.as_mut() {
            Some(m) => m.append(record),
            None => Ok(()),
        },
        RunEvent::Snapshot(state) => {
            let path = snapshot_path(out_dir, state.step);
            Snapshot {
                state: state.clone(),
                config_toml: config_toml.clone(),
            }
            .write(&path)
            .map_err(|source| RunError::Snapshot {
                step: state.step,
                source,
            })?;
            for kind in MoleculeKind::ALL {
                let pool = state.population.pool(kind);
                let proj = pca_project_flat(pool.as_flat(), kind.len(), PCA_DIMS)?;
                let pca_path = out_dir
                    .join(PCA_DIR)
                    .join(format!("step_{:08}_{}.csv", state.step, kind.name()));
                write_pca_table(&pca_path, &proj).map_err(|source| RunError::Io {
                    step: state.step,
                    path: pca_path.clone(),
                    source,
                })?;
            }
            Ok(())
        }
    })
}

/// Loads a snapshot and the configuration echoed inside it, checking that
/// the two agree.
pub fn load_snapshot_with_config(path: &Path) -> Result<(Snapshot, SimConfig), RunError> {
    let snap = Snapshot::read(path).map_err(|source| RunError::Snapshot { step: 0, source })?;
    let config = SimConfig::from_toml(&snap.config_toml)?;
    if config.seed != snap.state.seed || config.counts != snap.state.population.counts() {
        return Err(RunError::Config(ConfigError::Invalid {
            key: "seed".into(),
            message: "snapshot state does not match its embedded config".into(),
        }));
    }
    Ok((snap, config))
}
