//! Attribution CSV: `method,instance_index,action,phi_<feature>...,base_value`.
//! Feature values are not stored; they are restored from the trace.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mdp::{TraceDataset, FEATURE_NAMES, OBS_DIM};
use crate::xattr::{AttributionRecord, Method};

fn header() -> Vec<String> {
    let mut h = vec!["method".to_string(), "instance_index".into(), "action".into()];
    h.extend(FEATURE_NAMES.iter().map(|n| format!("phi_{n}")));
    h.push("base_value".into());
    h
}

pub fn write_attributions<W: Write>(records: &[AttributionRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header())?;
    for r in records {
        if r.phi.len() != OBS_DIM {
            return Err(Error::Usage(format!(
                "attribution export needs {OBS_DIM} phi values, record {} has {}",
                r.instance_index,
                r.phi.len()
            )));
        }
        let mut row = vec![r.method.as_str().to_string(), r.instance_index.to_string(), r.action.to_string()];
        row.extend(r.phi.iter().map(|v| v.to_string()));
        row.push(r.base_value.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<attribution writer>", e))?;
    Ok(())
}

/// Reads attributions and fills `feature_values` from the matching trace row.
pub fn read_attributions<R: Read>(reader: R, origin: &str, trace: &TraceDataset) -> Result<Vec<AttributionRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let expected = header();
    let found = r.headers()?.clone();
    if found.len() != expected.len() || found.iter().zip(&expected).any(|(a, b)| a != b) {
        return Err(Error::parse(
            format!("{origin}:1"),
            format!("attribution header must be method, instance_index, action, {OBS_DIM} phi_<feature> columns, base_value"),
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let loc = format!("{origin}:{}", i + 2);
        let num = |k: usize| -> Result<f64> {
            let v: f64 = rec[k].trim().parse().map_err(|_| Error::parse(&loc, format!("column {} is not a number: {:?}", &expected[k], &rec[k])))?;
            if !v.is_finite() {
                return Err(Error::parse(&loc, format!("column {} is not finite", &expected[k])));
            }
            Ok(v)
        };
        let method: Method = rec[0].parse().map_err(|e: Error| Error::parse(&loc, e.to_string()))?;
        let instance_index: usize = rec[1].parse().map_err(|_| Error::parse(&loc, format!("bad instance_index {:?}", &rec[1])))?;
        let action: usize = rec[2].parse().map_err(|_| Error::parse(&loc, format!("bad action {:?}", &rec[2])))?;
        let phi = (3..3 + OBS_DIM).map(num).collect::<Result<Vec<_>>>()?;
        let base_value = num(3 + OBS_DIM)?;
        let row = trace.rows.get(instance_index).ok_or_else(|| {
            Error::parse(&loc, format!("instance_index {instance_index} outside the {}-row trace", trace.len()))
        })?;
        out.push(AttributionRecord {
            method,
            instance_index,
            action,
            phi,
            base_value,
            feature_values: row.observation.0.to_vec(),
        });
    }
    Ok(out)
}

pub fn save_attributions(records: &[AttributionRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_attributions(records, std::io::BufWriter::new(file))
}

pub fn load_attributions(path: impl AsRef<Path>, trace: &TraceDataset) -> Result<Vec<AttributionRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_attributions(std::io::BufReader::new(file), &path.display().to_string(), trace)
}
