use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};

use super::ReportError;

fn finite_or_inf<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_str(""),
        Some(x) if x.is_infinite() && *x > 0.0 => s.serialize_str("inf"),
        Some(x) => s.serialize_f64(*x),
    }
}

/// One sweep point. Optional metrics are empty cells when not measured.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Record {
    pub snr_db: f64,
    pub cbr: f64,
    pub kbps: f64,
    pub trials: usize,
    pub failures: usize,
    pub fer: f64,
    pub ber: f64,
    #[serde(serialize_with = "finite_or_inf")]
    pub psnr: Option<f64>,
    #[serde(serialize_with = "finite_or_inf")]
    pub ssim: Option<f64>,
    #[serde(serialize_with = "finite_or_inf")]
    pub box_iou: Option<f64>,
    #[serde(serialize_with = "finite_or_inf")]
    pub category_accuracy: Option<f64>,
    #[serde(serialize_with = "finite_or_inf")]
    pub angle_mae: Option<f64>,
    pub seed: u64,
}

impl Record {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials.max(1) as f64
    }
}

/// Experiment table: per-point records plus the configuration that made them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: serde_json::Value,
    #[serde(skip)]
    pub records: Vec<Record>,
    pub seeds: Vec<u64>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    experiment: &'a str,
    config: &'a serde_json::Value,
    seeds: &'a [u64],
    rows: usize,
}

impl Report {
    pub fn new(experiment: impl Into<String>, config: serde_json::Value) -> Report {
        Report {
            experiment: experiment.into(),
            config,
            records: Vec::new(),
            seeds: Vec::new(),
        }
    }

    pub fn push(&mut self, record: Record) {
        if !self.seeds.contains(&record.seed) {
            self.seeds.push(record.seed);
        }
        self.records.push(record);
    }

    /// Stable order by SNR, then CBR.
    pub fn sort(&mut self) {
        self.records
            .sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db).then(a.cbr.total_cmp(&b.cbr)));
    }

    pub fn to_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)?;
        }
        if self.records.is_empty() {
            w.write_record(HEADER)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| ReportError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn sidecar_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(&Sidecar {
            experiment: &self.experiment,
            config: &self.config,
            seeds: &self.seeds,
            rows: self.records.len(),
        })?)
    }

    /// `<csv>.json` next to the table.
    pub fn sidecar_path(csv: &Path) -> PathBuf {
        let mut s = csv.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    /// Writes the CSV and its JSON sidecar; returns the sidecar path.
    pub fn write(&self, csv: &Path) -> Result<PathBuf, ReportError> {
        std::fs::write(csv, self.to_csv()?)?;
        let side = Report::sidecar_path(csv);
        std::fs::write(&side, self.sidecar_json()?)?;
        Ok(side)
    }
}

const HEADER: [&str; 13] = [
    "snr_db",
    "cbr",
    "kbps",
    "trials",
    "failures",
    "fer",
    "ber",
    "psnr",
    "ssim",
    "box_iou",
    "category_accuracy",
    "angle_mae",
    "seed",
];
