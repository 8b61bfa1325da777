use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use fermion_epi::report::{CheckRecord, ExperimentReport, SCHEMA_VERSION};
use serde::Serialize;

use crate::config::RunConfig;

/// Flat sweep data for external plotting.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PlotTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PlotTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Everything one invocation produces.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub library_version: String,
    pub config: RunConfig,
    pub report: ExperimentReport,
    pub wall_clock_seconds: f64,
    #[serde(skip)]
    pub table: Option<PlotTable>,
}

impl RunReport {
    pub fn new(config: RunConfig, report: ExperimentReport, table: Option<PlotTable>, seconds: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            library_version: fermion_epi::VERSION.to_string(),
            config,
            report,
            wall_clock_seconds: seconds,
            table,
        }
    }

    pub fn pass(&self) -> bool {
        self.report.pass
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `<command>.json` and `<command>.txt`, plus `<command>.csv` for sweeps.
    pub fn write_to(&self, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let stem = self.config.command.name();
        let json = dir.join(format!("{stem}.json"));
        std::fs::write(&json, self.to_json()? + "\n")?;
        let text = dir.join(format!("{stem}.txt"));
        std::fs::write(&text, self.to_string())?;
        let mut written = vec![json, text];
        let csv = dir.join(format!("{stem}.csv"));
        if emit_plot_data(self, &csv)? {
            written.push(csv);
        }
        Ok(written)
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.report)?;
        writeln!(
            f,
            "  seed {} | modes {} | trials {} | fermion-epi {} | {:.2}s",
            self.config.seed, self.config.modes, self.config.trials, self.library_version, self.wall_clock_seconds
        )
    }
}

/// Writes the sweep table as CSV. A report without sweep rows is left alone
/// with a warning on stderr; the return value says whether a file was written.
pub fn emit_plot_data(run: &RunReport, path: &Path) -> anyhow::Result<bool> {
    let Some(table) = run.table.as_ref().filter(|t| !t.rows.is_empty()) else {
        eprintln!(
            "warning: {} report has no sweep data; no table written",
            run.config.command
        );
        return Ok(false);
    };
    let mut writer = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(&table.columns)?;
    for row in &table.rows {
        writer.write_record(row.iter().map(|v| v.to_string()))?;
    }
    writer.flush()?;
    Ok(true)
}

#[derive(Debug)]
struct Slot {
    worst: CheckRecord,
    seen: usize,
    failed: usize,
    skipped: usize,
    sum: f64,
}

/// Folds per-trial records into one record per check name: the worst defect
/// for checked quantities, the mean for informational ones.
#[derive(Debug)]
pub struct Aggregator {
    tolerances: BTreeMap<String, f64>,
    order: Vec<String>,
    slots: BTreeMap<String, Slot>,
}

impl Aggregator {
    pub fn new(tolerances: &BTreeMap<String, f64>) -> Self {
        Self {
            tolerances: tolerances.clone(),
            order: Vec::new(),
            slots: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, mut record: CheckRecord) {
        if let (Some(&tol), Some(_)) = (self.tolerances.get(&record.name), record.tolerance) {
            record.tolerance = Some(tol);
            record.pass = record.defect <= tol;
        }
        let skipped = record.is_skipped();
        let counted = !skipped && record.tolerance.is_some();
        let slot = match self.slots.get_mut(&record.name) {
            Some(slot) => slot,
            None => {
                self.order.push(record.name.clone());
                self.slots.entry(record.name.clone()).or_insert(Slot {
                    worst: record.clone(),
                    seen: 0,
                    failed: 0,
                    skipped: 0,
                    sum: 0.0,
                })
            }
        };
        slot.seen += 1;
        slot.failed += usize::from(!record.pass);
        slot.skipped += usize::from(skipped);
        slot.sum += record.value;
        let worse = (!record.pass && slot.worst.pass) || record.defect.is_nan() || record.defect > slot.worst.defect;
        if counted && (slot.worst.is_skipped() || worse) {
            slot.worst = record;
        }
    }

    pub fn add_all(&mut self, records: impl IntoIterator<Item = CheckRecord>) {
        for r in records {
            self.add(r);
        }
    }

    pub fn finish_into(self, report: &mut ExperimentReport) {
        let mut slots = self.slots;
        for name in self.order {
            let slot = slots.remove(&name).expect("slot recorded with its name");
            let mut record = slot.worst;
            if slot.seen > 1 {
                if record.tolerance.is_none() && !record.is_skipped() {
                    record.value = slot.sum / slot.seen as f64;
                    record.note = Some(format!("mean over {}", slot.seen));
                } else {
                    let mut notes = Vec::new();
                    if slot.failed > 0 {
                        notes.push(format!("{} of {} failed", slot.failed, slot.seen));
                    }
                    if slot.skipped > 0 {
                        notes.push(format!("{} of {} skipped", slot.skipped, slot.seen));
                    }
                    if notes.is_empty() {
                        notes.push(format!("worst of {}", slot.seen));
                    }
                    record.note = Some(notes.join(", "));
                    record.pass = slot.failed == 0;
                }
            }
            report.push(record);
        }
    }
}
