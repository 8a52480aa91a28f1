use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::error::Result;

/// Records kept in memory per row before the remainder goes to disk.
pub const DEFAULT_MEMORY_CAP: usize = 100_000;

/// One correlation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    /// Series identifier (generated id, or `dataset/entity`).
    pub series: String,
    pub tau: f64,
    pub p: f64,
    pub n: usize,
}

/// Per-test results behind an [`AuditRow`](super::AuditRow). The first
/// `cap` records live in memory; the rest are spilled to a temporary CSV
/// that is removed when the last clone is dropped.
#[derive(Debug, Clone, Default)]
pub struct Retained {
    memory: Vec<TestRecord>,
    spill: Option<Arc<NamedTempFile>>,
    total: usize,
}

impl PartialEq for Retained {
    fn eq(&self, other: &Self) -> bool {
        self.total == other.total
            && self.memory == other.memory
            && self.spill.as_ref().map(|f| f.path().to_owned())
                == other.spill.as_ref().map(|f| f.path().to_owned())
    }
}

impl Retained {
    pub fn collect(records: impl IntoIterator<Item = TestRecord>, cap: usize) -> Result<Self> {
        let mut memory = Vec::new();
        let mut writer: Option<csv::Writer<NamedTempFile>> = None;
        let mut total = 0;
        for r in records {
            total += 1;
            if memory.len() < cap {
                memory.push(r);
                continue;
            }
            if writer.is_none() {
                writer = Some(csv::Writer::from_writer(NamedTempFile::new()?));
            }
            if let Some(w) = writer.as_mut() {
                w.serialize(&r)?;
            }
        }
        let spill = match writer {
            Some(w) => {
                let mut file = w.into_inner().map_err(|e| e.into_error())?;
                file.flush()?;
                Some(Arc::new(file))
            }
            None => None,
        };
        Ok(Retained {
            memory,
            spill,
            total,
        })
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn is_spilled(&self) -> bool {
        self.spill.is_some()
    }

    /// All records in test order, reading back any spilled part.
    pub fn records(&self) -> Result<Vec<TestRecord>> {
        let mut out = self.memory.clone();
        if let Some(file) = &self.spill {
            let mut rdr = csv::Reader::from_path(file.path())?;
            for r in rdr.deserialize() {
                out.push(r?);
            }
        }
        Ok(out)
    }

    /// Writes every record as CSV with header `series,tau,p,n`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in self.records()? {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
