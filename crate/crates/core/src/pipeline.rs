//! Dataset generation, train/test splitting, evaluation, and curve emission.
//!
//! The sweep covers the open boxes J1 ∈ (-1, 0), J2 ∈ (0, 1), D ∈ (0, 0.5)
//! at 11 midpoint samples per axis (value_i = min + (i + ½)(max - min)/11),
//! giving 11³ = 1331 records. OTOC targets come from the single-excitation
//! spectral sum at L = 10, n1 = 1; memory targets from the L = 4
//! two-excitation closed form. Curves are sampled at t = 0.4 i, i = 1..25.

use crate::chain::{Branch, ChainParams};
use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::memory::memory_curve_two_excitation_l4;
use crate::nn::{evaluate_mse, train, NetworkModel, TrainConfig, TrainHistory};
use crate::otoc::otoc_single_excitation;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

pub const CURVE_POINTS: usize = 25;
pub const CURVE_DT: f64 = 0.4;

/// Which exact curve a record carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Otoc,
    MemoryLhs,
    MemoryRhs,
}

impl std::fmt::Display for TargetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TargetKind::Otoc => write!(f, "otoc"),
            TargetKind::MemoryLhs => write!(f, "memory-lhs"),
            TargetKind::MemoryRhs => write!(f, "memory-rhs"),
        }
    }
}

impl std::str::FromStr for TargetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "otoc" => Ok(TargetKind::Otoc),
            "memory-lhs" => Ok(TargetKind::MemoryLhs),
            "memory-rhs" => Ok(TargetKind::MemoryRhs),
            other => Err(Error::InvalidParams(format!("unknown target `{other}`"))),
        }
    }
}

/// One sweep axis sampled at open-interval midpoints.
#[derive(Debug, Clone, Copy)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count == 0 || !(max > min) {
            return Err(Error::InvalidParams(format!(
                "axis needs count ≥ 1 and max > min, got [{min}, {max}] x {count}"
            )));
        }
        Ok(AxisSpec { min, max, count })
    }

    /// min + (i + ½)(max - min)/count, strictly inside the open interval.
    pub fn value(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * (self.max - self.min) / self.count as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Cartesian sweep specification.
#[derive(Debug, Clone, Copy)]
pub struct SweepSpec {
    pub j1: AxisSpec,
    pub j2: AxisSpec,
    pub dm: AxisSpec,
    /// Chain length for the exact solver (10 for OTOC, 4 for memory).
    pub length: usize,
    /// Magnon sector index for the OTOC target.
    pub n1: usize,
    pub branch: Branch,
    pub target: TargetKind,
}

impl SweepSpec {
    /// The 11 x 11 x 11 sweep over the standard parameter box.
    pub fn paper_default(target: TargetKind, branch: Branch) -> Self {
        let length = match target {
            TargetKind::Otoc => 10,
            _ => 4,
        };
        SweepSpec {
            j1: AxisSpec::new(-1.0, 0.0, 11).expect("valid"),
            j2: AxisSpec::new(0.0, 1.0, 11).expect("valid"),
            dm: AxisSpec::new(0.0, 0.5, 11).expect("valid"),
            length,
            n1: 1,
            branch,
            target,
        }
    }

    pub fn size(&self) -> usize {
        self.j1.count * self.j2.count * self.dm.count
    }
}

/// One labelled curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub length: usize,
    pub j1: f64,
    pub j2: f64,
    pub dm: f64,
    pub n1: usize,
    pub branch: Branch,
    pub target: TargetKind,
    pub values: Vec<f64>,
}

impl DatasetRecord {
    /// Network input features (L, J1, J2, D, n1).
    pub fn features(&self) -> Vec<f64> {
        vec![self.length as f64, self.j1, self.j2, self.dm, self.n1 as f64]
    }
}

/// The curve time grid t = 0.4 i, i = 1..25.
pub fn curve_grid() -> TimeGrid {
    TimeGrid::new(CURVE_DT, CURVE_DT, CURVE_POINTS).expect("valid")
}

/// Evaluates the exact solver at one grid point.
pub fn solve_record(
    spec: &SweepSpec,
    j1: f64,
    j2: f64,
    dm: f64,
) -> Result<DatasetRecord> {
    let params = ChainParams::new(spec.length, j1, j2, dm, spec.branch)?;
    let grid = curve_grid();
    let values = match spec.target {
        TargetKind::Otoc => otoc_single_excitation(&params, spec.n1, &grid)?.values,
        TargetKind::MemoryLhs => memory_curve_two_excitation_l4(&params, &grid)?.lhs,
        TargetKind::MemoryRhs => memory_curve_two_excitation_l4(&params, &grid)?.rhs,
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidState(format!(
            "non-finite curve at (J1, J2, D) = ({j1}, {j2}, {dm})"
        )));
    }
    Ok(DatasetRecord {
        length: spec.length,
        j1,
        j2,
        dm,
        n1: spec.n1,
        branch: spec.branch,
        target: spec.target,
        values,
    })
}

/// Evaluates the whole Cartesian grid in deterministic lexicographic order
/// (J1-major, then J2, then D); grid points run in parallel.
pub fn generate_dataset(spec: &SweepSpec) -> Result<Vec<DatasetRecord>> {
    let mut points = Vec::with_capacity(spec.size());
    for j1 in spec.j1.values() {
        for j2 in spec.j2.values() {
            for dm in spec.dm.values() {
                points.push((j1, j2, dm));
            }
        }
    }
    points
        .into_par_iter()
        .map(|(j1, j2, dm)| {
            solve_record(spec, j1, j2, dm).map_err(|e| {
                Error::InvalidState(format!("grid point (J1={j1}, J2={j2}, D={dm}): {e}"))
            })
        })
        .collect()
}

/// Seeded shuffle followed by a split at floor(ratio · n): disjoint and
/// exhaustive.
pub fn split(
    dataset: &[DatasetRecord],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<DatasetRecord>, Vec<DatasetRecord>)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(0.0 < ratio && ratio < 1.0) {
        return Err(Error::InvalidParams(format!("split ratio {ratio} outside (0, 1)")));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let cut = (ratio * dataset.len() as f64).floor() as usize;
    let train = order[..cut].iter().map(|&i| dataset[i].clone()).collect();
    let test = order[cut..].iter().map(|&i| dataset[i].clone()).collect();
    Ok((train, test))
}

/// Converts records into (features, curve) training pairs.
pub fn to_training_pairs(records: &[DatasetRecord]) -> Vec<(Vec<f64>, Vec<f64>)> {
    records.iter().map(|r| (r.features(), r.values.clone())).collect()
}

/// Test metrics: MSE plus peak-time synchronization.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub test_mse: f64,
    /// argmax(prediction) - argmax(truth) per curve, in grid steps.
    pub peak_offsets: Vec<i64>,
    /// Fraction of curves with |offset| ≤ 1.
    pub peak_sync_fraction: f64,
}

impl EvalReport {
    pub fn offset_histogram(&self) -> Vec<(i64, usize)> {
        let mut hist = std::collections::BTreeMap::new();
        for &o in &self.peak_offsets {
            *hist.entry(o).or_insert(0usize) += 1;
        }
        hist.into_iter().collect()
    }
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Runs the model over a test set and reports MSE and peak synchronization.
pub fn evaluate(model: &NetworkModel, test: &[DatasetRecord]) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    model.expect_dims(5, test[0].values.len())?;
    let mut preds = Vec::with_capacity(test.len());
    let mut offsets = Vec::with_capacity(test.len());
    for r in test {
        let p = model.infer(&r.features())?;
        offsets.push(argmax(&p) as i64 - argmax(&r.values) as i64);
        preds.push(p);
    }
    let targets: Vec<Vec<f64>> = test.iter().map(|r| r.values.clone()).collect();
    let test_mse = crate::nn::mse(&preds, &targets)?;
    let synced = offsets.iter().filter(|o| o.abs() <= 1).count();
    Ok(EvalReport {
        test_mse,
        peak_sync_fraction: synced as f64 / offsets.len() as f64,
        peak_offsets: offsets,
    })
}

/// Named series on a shared time grid, for CSV/SVG emission.
#[derive(Debug, Clone)]
pub struct Curve {
    pub times: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
}

impl Curve {
    pub fn new(times: Vec<f64>) -> Self {
        Curve { times, series: Vec::new() }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.times.len() {
            return Err(Error::DimensionMismatch { expected: self.times.len(), got: values.len() });
        }
        self.series.push((name.into(), values));
        Ok(())
    }
}

/// Writes `t,name1,name2,...` rows at full (round-trip) precision.
pub fn emit_curve_csv<W: Write>(curve: &Curve, mut out: W) -> Result<()> {
    if curve.series.is_empty() {
        return Err(Error::InvalidParams("no series to emit".into()));
    }
    write!(out, "t")?;
    for (name, _) in &curve.series {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for (i, t) in curve.times.iter().enumerate() {
        write!(out, "{t}")?;
        for (_, values) in &curve.series {
            write!(out, ",{}", values[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Parses a CSV produced by [`emit_curve_csv`].
pub fn parse_curve_csv(text: &str) -> Result<Curve> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::InvalidParams("empty curve CSV".into()))?;
    let names: Vec<&str> = header.split(',').collect();
    if names.len() < 2 || names[0] != "t" {
        return Err(Error::InvalidParams("curve CSV must start with a `t` column".into()));
    }
    let mut times = Vec::new();
    let mut series: Vec<(String, Vec<f64>)> =
        names[1..].iter().map(|n| (n.to_string(), Vec::new())).collect();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != names.len() {
            return Err(Error::InvalidParams(format!("ragged CSV row `{line}`")));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidParams(format!("bad float `{s}`")))
        };
        times.push(parse(cells[0])?);
        for (k, cell) in cells[1..].iter().enumerate() {
            series[k].1.push(parse(cell)?);
        }
    }
    Ok(Curve { times, series })
}

/// A minimal SVG line chart with axes and a legend.
pub fn emit_curve_svg<W: Write>(curve: &Curve, title: &str, mut out: W) -> Result<()> {
    if curve.series.is_empty() || curve.times.is_empty() {
        return Err(Error::InvalidParams("no data to plot".into()));
    }
    let (w, h, ml, mr, mt, mb) = (760.0, 480.0, 64.0, 16.0, 40.0, 48.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let tmin = curve.times.first().copied().unwrap();
    let tmax = curve.times.last().copied().unwrap();
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for (_, vs) in &curve.series {
        for &v in vs {
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
    }
    if vmax - vmin < 1e-12 {
        vmax = vmin + 1.0;
    }
    let pad = 0.05 * (vmax - vmin);
    let (vmin, vmax) = (vmin - pad, vmax + pad);
    let x = |t: f64| ml + (t - tmin) / (tmax - tmin).max(1e-300) * pw;
    let y = |v: f64| mt + (vmax - v) / (vmax - vmin) * ph;
    let colors = ["#e8a33d", "#3d6fe8", "#3de86f", "#e83d5f", "#8f3de8", "#3de8d8"];

    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    )?;
    writeln!(out, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>")?;
    writeln!(out, "<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{title}</text>", ml + pw / 2.0)?;
    // Axes.
    writeln!(
        out,
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        mt + ph, ml + pw, mt + ph
    )?;
    writeln!(out, "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>", mt + ph)?;
    for i in 0..=4 {
        let tv = tmin + (tmax - tmin) * i as f64 / 4.0;
        let vv = vmin + (vmax - vmin) * i as f64 / 4.0;
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{tv:.2}</text>",
            x(tv), mt + ph + 18.0
        )?;
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{vv:.3}</text>",
            ml - 6.0, y(vv) + 4.0
        )?;
    }
    writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">t</text>",
        ml + pw / 2.0, h - 8.0
    )?;
    for (k, (name, vs)) in curve.series.iter().enumerate() {
        let color = colors[k % colors.len()];
        let pts: Vec<String> = curve
            .times
            .iter()
            .zip(vs)
            .map(|(&t, &v)| format!("{:.2},{:.2}", x(t), y(v)))
            .collect();
        writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        )?;
        let ly = mt + 14.0 * k as f64;
        writeln!(out, "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>", ml + pw - 120.0, ml + pw - 96.0)?;
        writeln!(out, "<text x=\"{}\" y=\"{}\" font-size=\"11\">{name}</text>", ml + pw - 90.0, ly + 4.0)?;
    }
    writeln!(out, "</svg>")?;
    Ok(())
}

pub const DATASET_HEADER: &str = "L,J1,J2,D,n1,branch,target,v1,v2,v3,v4,v5,v6,v7,v8,v9,v10,v11,v12,v13,v14,v15,v16,v17,v18,v19,v20,v21,v22,v23,v24,v25";

/// Writes records as CSV at full precision.
pub fn write_dataset_csv<W: Write>(records: &[DatasetRecord], mut out: W) -> Result<()> {
    writeln!(out, "{DATASET_HEADER}")?;
    for r in records {
        write!(out, "{},{},{},{},{},{},{}", r.length, r.j1, r.j2, r.dm, r.n1, r.branch, r.target)?;
        for v in &r.values {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads a dataset CSV produced by [`write_dataset_csv`].
pub fn read_dataset_csv(text: &str) -> Result<Vec<DatasetRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::InvalidParams("empty dataset CSV".into()))?;
    if header != DATASET_HEADER {
        return Err(Error::InvalidParams("unrecognized dataset header".into()));
    }
    let mut records = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 7 + CURVE_POINTS {
            return Err(Error::InvalidParams(format!("ragged dataset row `{line}`")));
        }
        let bad = |s: &str| Error::InvalidParams(format!("bad value `{s}`"));
        let values: Result<Vec<f64>> = cells[7..]
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad(s)))
            .collect();
        records.push(DatasetRecord {
            length: cells[0].parse().map_err(|_| bad(cells[0]))?,
            j1: cells[1].parse().map_err(|_| bad(cells[1]))?,
            j2: cells[2].parse().map_err(|_| bad(cells[2]))?,
            dm: cells[3].parse().map_err(|_| bad(cells[3]))?,
            n1: cells[4].parse().map_err(|_| bad(cells[4]))?,
            branch: cells[5].parse()?,
            target: cells[6].parse()?,
            values: values?,
        });
    }
    Ok(records)
}

/// One row of the DM-stratified sensitivity probe.
#[derive(Debug, Clone)]
pub struct StratumReport {
    pub dm_low: f64,
    pub dm_high: f64,
    pub dm_mean: f64,
    pub records: usize,
    pub test_mse: f64,
}

/// Trains one fresh model per D stratum of the given records (80/20 split
/// inside each stratum) and reports the held-out MSE against the stratum's
/// mean DM constant. The trend is reported, not asserted.
pub fn dm_stratified_probe(
    records: &[DatasetRecord],
    bins: usize,
    config: &TrainConfig,
) -> Result<Vec<StratumReport>> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if bins == 0 {
        return Err(Error::InvalidParams("need at least one stratum".into()));
    }
    let mut sorted = records.to_vec();
    sorted.sort_by(|a, b| a.dm.partial_cmp(&b.dm).unwrap());
    let mut out = Vec::with_capacity(bins);
    let per = sorted.len().div_ceil(bins);
    for chunk in sorted.chunks(per) {
        let (train_set, test_set) = split(chunk, 0.8, config.seed)?;
        if train_set.is_empty() || test_set.is_empty() {
            continue;
        }
        let mut model = NetworkModel::curve_predictor(config.seed);
        let pairs = to_training_pairs(&train_set);
        train(&mut model, &pairs, None, config)?;
        let test_pairs = to_training_pairs(&test_set);
        let test_mse = evaluate_mse(&model, &test_pairs)?;
        let dm_mean = chunk.iter().map(|r| r.dm).sum::<f64>() / chunk.len() as f64;
        out.push(StratumReport {
            dm_low: chunk.first().unwrap().dm,
            dm_high: chunk.last().unwrap().dm,
            dm_mean,
            records: chunk.len(),
            test_mse,
        });
    }
    Ok(out)
}

/// Full training run on a generated dataset: split, train, evaluate.
pub struct PipelineRun {
    pub model: NetworkModel,
    pub history: TrainHistory,
    pub initial_test_mse: f64,
    pub report: EvalReport,
}

pub fn run_training_pipeline(
    records: &[DatasetRecord],
    ratio: f64,
    config: &TrainConfig,
) -> Result<PipelineRun> {
    let (train_set, test_set) = split(records, ratio, config.seed)?;
    let mut model = NetworkModel::curve_predictor(config.seed);
    let test_pairs = to_training_pairs(&test_set);
    let initial_test_mse = evaluate_mse(&model, &test_pairs)?;
    let pairs = to_training_pairs(&train_set);
    let history = train(&mut model, &pairs, Some(&test_pairs), config)?;
    let report = evaluate(&model, &test_set)?;
    Ok(PipelineRun { model, history, initial_test_mse, report })
}
