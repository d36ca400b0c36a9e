use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row of a convergence trace. `primal` and `gap` are `None` while the
/// primal iterate is outside the polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub epoch: usize,
    #[serde(rename = "time_s")]
    pub elapsed: f64,
    pub dual: f64,
    pub primal: Option<f64>,
    pub gap: Option<f64>,
}

/// Per-epoch convergence records with strictly increasing epochs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Trace {
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: TraceRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.epoch <= last.epoch {
                return Err(Error::invalid(format!(
                    "trace epochs must increase: {} after {}",
                    record.epoch, last.epoch
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Writes `epoch,time_s,dual,primal,gap`; undefined values are empty
    /// fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["epoch", "time_s", "dual", "primal", "gap"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            writer.write_record([
                r.epoch.to_string(),
                format!("{:.6}", r.elapsed),
                r.dual.to_string(),
                opt(r.primal),
                opt(r.gap),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut trace = Trace::new();
        for row in reader.deserialize() {
            trace.push(row?)?;
        }
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(epoch: usize, primal: Option<f64>) -> TraceRecord {
        TraceRecord {
            epoch,
            elapsed: 0.25,
            dual: 1.5,
            primal,
            gap: primal.map(|p| p - 1.5),
        }
    }

    #[test]
    fn epochs_must_increase() {
        let mut t = Trace::new();
        t.push(rec(0, None)).unwrap();
        t.push(rec(2, Some(2.0))).unwrap();
        assert!(t.push(rec(2, None)).is_err());
    }

    #[test]
    fn csv_layout_and_read_back() {
        let mut t = Trace::new();
        t.push(rec(0, None)).unwrap();
        t.push(rec(1, Some(2.0))).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "epoch,time_s,dual,primal,gap\n0,0.250000,1.5,,\n1,0.250000,1.5,2,0.5\n"
        );

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        t.save_csv(&path).unwrap();
        let back = Trace::read_csv(&path).unwrap();
        assert_eq!(back.records(), t.records());
    }
}
