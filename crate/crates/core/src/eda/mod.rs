//! Exploratory statistics over a recorded trace: production counts and
//! runs, the buffer fill trend, buffer content durations, demand, plus SVG
//! plots and a markdown report.

mod lowess;
pub mod svg;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdp::{criticality, feature_index, TraceDataset};
use crate::product::{Product, NUM_PRODUCTS};
use crate::xattr::{aggregate_by_action, AttributionRecord};

pub use lowess::smooth_trend;

/// Smoothing span for the buffer trend.
pub const TREND_FRAC: f64 = 0.66;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Run {
    pub product: u8,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendPoint {
    pub index: usize,
    pub raw: f64,
    pub smoothed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemandRow {
    pub product: u8,
    pub mean_next_24h_demand: f64,
    pub mean_end_of_planning_period_demand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdaSummary {
    pub decisions: usize,
    /// Lots per product, index 0 = prod1.
    pub production_counts: [usize; NUM_PRODUCTS],
    pub production_order: Vec<Run>,
    pub buffer_trend: Vec<TrendPoint>,
    /// Normalized buffer content duration per product.
    pub mean_buffer_duration: [MeanStd; NUM_PRODUCTS],
    pub demand_table: Vec<DemandRow>,
}

fn column(trace: &TraceDataset, name: &str) -> Vec<f64> {
    let i = feature_index(name).expect("known feature");
    trace.rows.iter().map(|r| r.observation.0[i]).collect()
}

fn mean_std(v: &[f64]) -> MeanStd {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    MeanStd { mean, std }
}

pub fn runs(actions: &[usize]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::new();
    for &a in actions {
        match out.last_mut() {
            Some(r) if r.product as usize == a + 1 => r.length += 1,
            _ => out.push(Run { product: (a + 1) as u8, length: 1 }),
        }
    }
    out
}

pub fn summarize(trace: &TraceDataset) -> Result<EdaSummary> {
    if trace.is_empty() {
        return Err(Error::Domain("cannot summarize an empty trace".into()));
    }
    let actions = trace.actions();
    let mut production_counts = [0usize; NUM_PRODUCTS];
    for &a in &actions {
        *production_counts.get_mut(a).ok_or_else(|| Error::Domain(format!("trace action {a} outside 0..{NUM_PRODUCTS}")))? += 1;
    }

    let fill = column(trace, "buffer_fill_level");
    let smoothed = if fill.len() >= 3 { smooth_trend(&fill, TREND_FRAC)? } else { fill.clone() };
    let buffer_trend = fill.iter().zip(&smoothed).enumerate().map(|(index, (&raw, &smoothed))| TrendPoint { index, raw, smoothed }).collect();

    let mean_buffer_duration = std::array::from_fn(|k| mean_std(&column(trace, &format!("buffer_content_duration_prod{}", k + 1))));
    let demand_table = Product::all()
        .map(|p| DemandRow {
            product: p.id(),
            mean_next_24h_demand: mean_std(&column(trace, &format!("next_24h_demand_{p}"))).mean,
            mean_end_of_planning_period_demand: mean_std(&column(trace, &format!("end_of_planning_period_demand_{p}"))).mean,
        })
        .collect();

    Ok(EdaSummary {
        decisions: trace.len(),
        production_counts,
        production_order: runs(&actions),
        buffer_trend,
        mean_buffer_duration,
        demand_table,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalityRow {
    pub instance_index: usize,
    pub product: u8,
    pub criticality: f64,
    pub next_24h_demand: f64,
    pub buffer_duration: f64,
    pub last_produced: bool,
    pub chosen: bool,
}

/// Criticality of every product at the given trace rows, recomputed from
/// the stored features.
pub fn criticality_rows(trace: &TraceDataset, indices: &[usize]) -> Result<Vec<CriticalityRow>> {
    let mut out = Vec::with_capacity(indices.len() * NUM_PRODUCTS);
    for &i in indices {
        let row = trace
            .rows
            .get(i)
            .ok_or_else(|| Error::Domain(format!("row {i} outside the {}-row trace", trace.len())))?;
        let obs = &row.observation;
        for p in Product::all() {
            let d = obs.next_24h_demand(p);
            let b = obs.buffer_content_duration(p);
            out.push(CriticalityRow {
                instance_index: i,
                product: p.id(),
                criticality: criticality(d, b)?,
                next_24h_demand: d,
                buffer_duration: b,
                last_produced: obs.last_prod_type() == Some(p),
                chosen: row.action == p.index(),
            });
        }
    }
    Ok(out)
}

pub fn write_demand_csv<W: Write>(summary: &EdaSummary, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["product", "next_24h_demand", "end_of_planning_period_demand"])?;
    for r in &summary.demand_table {
        w.write_record([format!("prod{}", r.product), format!("{:.6}", r.mean_next_24h_demand), format!("{:.6}", r.mean_end_of_planning_period_demand)])?;
    }
    w.flush().map_err(|e| Error::io("<demand table>", e))?;
    Ok(())
}

fn product_labels() -> Vec<String> {
    Product::all().map(|p| p.to_string()).collect()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Beeswarm rows for one action: the `top` features by mean |phi|.
fn swarm_rows(records: &[AttributionRecord], trace: &TraceDataset, action: usize, top: usize) -> Result<Vec<svg::SwarmRow>> {
    let summary = aggregate_by_action(records, trace)?;
    let chosen: Vec<&AttributionRecord> =
        records.iter().filter(|r| r.action == action && trace.rows.get(r.instance_index).is_some_and(|t| t.action == action)).collect();
    Ok(summary[action]
        .features
        .iter()
        .take(top)
        .map(|f| svg::SwarmRow {
            name: f.name.clone(),
            phi: chosen.iter().map(|r| r.phi[f.feature]).collect(),
            values: chosen.iter().map(|r| r.feature_values.get(f.feature).copied().unwrap_or(0.0)).collect(),
        })
        .collect())
}

/// Writes the EDA plots, `demand_table.csv`, `summary.json` and
/// `eda_report.md` into `dir`. Returns the written paths.
pub fn write_eda(dir: &Path, trace: &TraceDataset) -> Result<Vec<PathBuf>> {
    let summary = summarize(trace)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let labels = product_labels();
    let counts: Vec<f64> = summary.production_counts.iter().map(|&c| c as f64).collect();
    let raw: Vec<f64> = summary.buffer_trend.iter().map(|p| p.raw).collect();
    let smooth: Vec<f64> = summary.buffer_trend.iter().map(|p| p.smoothed).collect();
    let means: Vec<f64> = summary.mean_buffer_duration.iter().map(|m| m.mean).collect();
    let stds: Vec<f64> = summary.mean_buffer_duration.iter().map(|m| m.std).collect();

    let files = [
        ("production_counts.svg", svg::bar_chart("Lots produced per product", &labels, &counts, "lots")),
        ("production_order.svg", svg::order_strip("Production order", &trace.actions())),
        ("buffer_trend.svg", svg::trend_plot(&format!("Buffer fill level (LOWESS, frac = {TREND_FRAC})"), &raw, &smooth, "fill level")),
        ("buffer_duration.svg", svg::error_bars("Mean buffer content duration (+-1 std)", &labels, &means, &stds, "share of horizon")),
    ];
    let mut written = Vec::new();
    for (name, body) in &files {
        let path = dir.join(name);
        write_file(&path, body)?;
        written.push(path);
    }
    let csv_path = dir.join("demand_table.csv");
    let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    write_demand_csv(&summary, std::io::BufWriter::new(file))?;
    written.push(csv_path);
    let json_path = dir.join("summary.json");
    write_file(&json_path, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    written.push(json_path);
    let md_path = dir.join("eda_report.md");
    write_file(&md_path, &render_markdown(&summary, &files.iter().map(|(n, _)| *n).collect::<Vec<_>>()))?;
    written.push(md_path);
    Ok(written)
}

/// Writes one beeswarm per taken action, named `beeswarm_<method>_prod<k>.svg`.
pub fn write_beeswarms(dir: &Path, records: &[AttributionRecord], trace: &TraceDataset, top: usize) -> Result<Vec<PathBuf>> {
    let Some(method) = records.first().map(|r| r.method) else { return Ok(Vec::new()) };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for action in 0..NUM_PRODUCTS {
        let rows = swarm_rows(records, trace, action, top)?;
        if rows.is_empty() {
            continue;
        }
        let path = dir.join(format!("beeswarm_{}_prod{}.svg", method.short(), action + 1));
        write_file(&path, &svg::beeswarm(&format!("{method}: top features when producing prod{}", action + 1), &rows))?;
        written.push(path);
    }
    Ok(written)
}

pub fn render_markdown(summary: &EdaSummary, plots: &[&str]) -> String {
    let mut md = String::new();
    let _ = writeln!(md, "# Exploratory analysis\n");
    let _ = writeln!(md, "{} decisions.\n", summary.decisions);
    let _ = writeln!(md, "## Production\n");
    let _ = writeln!(md, "| product | lots | mean buffer content duration | std |");
    let _ = writeln!(md, "|---|---:|---:|---:|");
    for (k, (c, m)) in summary.production_counts.iter().zip(&summary.mean_buffer_duration).enumerate() {
        let _ = writeln!(md, "| prod{} | {c} | {:.4} | {:.4} |", k + 1, m.mean, m.std);
    }
    let longest = summary.production_order.iter().max_by(|a, b| a.length.cmp(&b.length).then(b.product.cmp(&a.product)));
    if let Some(r) = longest {
        let _ = writeln!(md, "\nLongest uninterrupted run: {} lots of prod{}.", r.length, r.product);
    }
    let order: Vec<String> = summary.production_order.iter().map(|r| format!("prod{}x{}", r.product, r.length)).collect();
    let _ = writeln!(md, "\nRuns: {}\n", order.join(" "));
    let _ = writeln!(md, "## Mean demand\n");
    let _ = writeln!(md, "| product | next 24h demand | end of planning period demand |");
    let _ = writeln!(md, "|---|---:|---:|");
    for r in &summary.demand_table {
        let _ = writeln!(md, "| prod{} | {:.4} | {:.4} |", r.product, r.mean_next_24h_demand, r.mean_end_of_planning_period_demand);
    }
    let _ = writeln!(md, "\n## Plots\n");
    for p in plots {
        let _ = writeln!(md, "![{p}]({p})\n");
    }
    md
}
