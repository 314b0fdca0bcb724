//! State/action traces recorded while a policy acts, stored as CSV:
//! `step_index`, the 33 observation features by name, then `action`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mdp::observation::{Observation, FEATURE_NAMES, OBS_DIM};
use crate::product::NUM_PRODUCTS;

pub const TRACE_COLUMNS: usize = OBS_DIM + 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step_index: usize,
    pub observation: Observation,
    pub action: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceDataset {
    pub rows: Vec<TraceRow>,
}

pub fn column_names() -> Vec<&'static str> {
    let mut cols = Vec::with_capacity(TRACE_COLUMNS);
    cols.push("step_index");
    cols.extend(FEATURE_NAMES);
    cols.push("action");
    cols
}

impl TraceDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn actions(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.action).collect()
    }

    pub fn observations(&self) -> Vec<Observation> {
        self.rows.iter().map(|r| r.observation).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(column_names())?;
        for row in &self.rows {
            let mut rec = Vec::with_capacity(TRACE_COLUMNS);
            rec.push(row.step_index.to_string());
            rec.extend(row.observation.0.iter().map(|v| v.to_string()));
            rec.push(row.action.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<trace writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, origin: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let expected = column_names();
        if header.len() != TRACE_COLUMNS || header.iter().zip(&expected).any(|(a, b)| a != *b) {
            return Err(Error::parse(
                format!("{origin}:1"),
                format!("trace header must be the {TRACE_COLUMNS} columns step_index, <features>, action"),
            ));
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = format!("{origin}:{}", i + 2);
            let step_index = rec[0].parse().map_err(|_| Error::parse(&line, format!("bad step_index {:?}", &rec[0])))?;
            let mut obs = [0.0; OBS_DIM];
            for (k, v) in obs.iter_mut().enumerate() {
                let field = &rec[k + 1];
                *v = field.parse().map_err(|_| Error::parse(&line, format!("bad value {field:?} for {}", FEATURE_NAMES[k])))?;
            }
            let action: usize =
                rec[OBS_DIM + 1].parse().map_err(|_| Error::parse(&line, format!("bad action {:?}", &rec[OBS_DIM + 1])))?;
            if action >= NUM_PRODUCTS {
                return Err(Error::parse(&line, format!("action {action} outside 0..=7")));
            }
            rows.push(TraceRow { step_index, observation: Observation(obs), action });
        }
        Ok(TraceDataset { rows })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file), &path.display().to_string())
    }
}
