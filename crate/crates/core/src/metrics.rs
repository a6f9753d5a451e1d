//! Lateral-separation samples and their distribution summaries.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flocking::{Flock, FlockId};
use crate::scenario::GroundTruthFrame;
use crate::sensing::TrackedObject;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pair {
    #[serde(rename = "Ego-Left")]
    EgoLeft,
    #[serde(rename = "Ego-Right")]
    EgoRight,
}

impl Pair {
    pub const ALL: [Pair; 2] = [Pair::EgoLeft, Pair::EgoRight];

    pub fn as_str(self) -> &'static str {
        match self {
            Pair::EgoLeft => "Ego-Left",
            Pair::EgoRight => "Ego-Right",
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pair {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "Ego-Left" => Ok(Pair::EgoLeft),
            "Ego-Right" => Ok(Pair::EgoRight),
            other => Err(format!("unknown pair `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Boids,
    Tracked,
    GroundTruth,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Boids, Source::Tracked, Source::GroundTruth];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Boids => "boids",
            Source::Tracked => "tracked",
            Source::GroundTruth => "ground-truth",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "boids" => Ok(Source::Boids),
            "tracked" => Ok(Source::Tracked),
            "ground-truth" => Ok(Source::GroundTruth),
            other => Err(format!("unknown source `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    /// Samples are taken only while the pair is at most this far apart
    /// longitudinally (meters, ground truth).
    pub parallel_gate: f64,
    /// Vehicle ids of the Ego-Left pair.
    pub ego_left: [FlockId; 2],
    /// Vehicle ids of the Ego-Right pair.
    pub ego_right: [FlockId; 2],
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            parallel_gate: 50.0,
            ego_left: [1, 2],
            ego_right: [2, 3],
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.parallel_gate.is_finite() && self.parallel_gate > 0.0) {
            return Err(Error::invalid("metrics.parallel_gate", "must be positive"));
        }
        Ok(())
    }

    pub fn members(&self, pair: Pair) -> [FlockId; 2] {
        match pair {
            Pair::EgoLeft => self.ego_left,
            Pair::EgoRight => self.ego_right,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparationSample {
    pub run_seed: u64,
    pub cycle: u64,
    pub pair: Pair,
    pub source: Source,
    /// Meters, non-negative.
    pub value: f64,
}

/// Mean lateral position of a flock; `None` for an empty flock.
pub fn swarm_lateral_position(flock: &Flock) -> Option<f64> {
    if flock.is_empty() {
        return None;
    }
    Some(flock.boids.iter().map(|b| b.position.y).sum::<f64>() / flock.len() as f64)
}

/// Everything a separation sample can be drawn from at one cycle.
#[derive(Clone, Copy, Debug)]
pub struct CycleView<'a> {
    pub truth: &'a GroundTruthFrame,
    pub tracked: &'a [TrackedObject],
    pub flocks: &'a [&'a Flock],
}

impl CycleView<'_> {
    fn lateral(&self, id: FlockId, source: Source) -> Option<f64> {
        match source {
            Source::GroundTruth => self.truth.vehicle(id).map(|v| v.pose.position.y),
            Source::Tracked => self.tracked.iter().find(|t| t.id == id).map(|t| t.position.y),
            Source::Boids => self
                .flocks
                .iter()
                .find(|f| f.flock_id == id)
                .and_then(|f| swarm_lateral_position(f)),
        }
    }
}

/// `|y_A − y_B|` for a pair, if both members exist for the source and the
/// pair is within the parallel gate.
pub fn sample_separation(
    view: &CycleView<'_>,
    pair: Pair,
    source: Source,
    cfg: &MetricsConfig,
) -> Option<f64> {
    let [a, b] = cfg.members(pair);
    let (ta, tb) = (view.truth.vehicle(a)?, view.truth.vehicle(b)?);
    if (ta.pose.position.x - tb.pose.position.x).abs() > cfg.parallel_gate {
        return None;
    }
    Some((view.lateral(a, source)? - view.lateral(b, source)?).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub count: usize,
    pub mean: f64,
    pub p1: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p99: f64,
}

/// Percentile of sorted data by linear interpolation between closest ranks,
/// with rank `(n − 1)·q`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

pub fn summarize(samples: &[f64]) -> Result<DistributionSummary> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Sum in sorted order so the mean does not depend on input order.
    let mean = (sorted.iter().sum::<f64>() / sorted.len() as f64)
        .clamp(sorted[0], sorted[sorted.len() - 1]);
    Ok(DistributionSummary {
        count: sorted.len(),
        mean,
        p1: percentile_sorted(&sorted, 0.01),
        p25: percentile_sorted(&sorted, 0.25),
        p50: percentile_sorted(&sorted, 0.50),
        p75: percentile_sorted(&sorted, 0.75),
        p99: percentile_sorted(&sorted, 0.99),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub pair: Pair,
    pub source: Source,
    pub nb: usize,
    #[serde(flatten)]
    pub summary: DistributionSummary,
}

/// Pools samples per `(pair, source)` and summarizes each group. Groups with
/// no samples are omitted and reported in the returned warnings.
pub fn summarize_pooled(samples: &[SeparationSample], nb: usize) -> (Vec<SummaryRow>, Vec<String>) {
    let mut groups: BTreeMap<(Pair, Source), Vec<f64>> = BTreeMap::new();
    for s in samples {
        groups.entry((s.pair, s.source)).or_default().push(s.value);
    }
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for pair in Pair::ALL {
        for source in Source::ALL {
            match groups.get(&(pair, source)).map(|v| summarize(v)) {
                Some(Ok(summary)) => rows.push(SummaryRow {
                    pair,
                    source,
                    nb,
                    summary,
                }),
                _ => warnings.push(format!("no samples for {pair}/{source} at N_b={nb}; row omitted")),
            }
        }
    }
    (rows, warnings)
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

pub fn write_samples_csv(path: &Path, samples: &[SeparationSample]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(out, "run_seed,cycle,pair,source,value").map_err(io)?;
    for s in samples {
        writeln!(out, "{},{},{},{},{:.6}", s.run_seed, s.cycle, s.pair, s.source, s.value).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads a raw samples CSV written by [`write_samples_csv`].
pub fn read_samples_csv(path: &Path) -> Result<Vec<SeparationSample>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(perr(format!("expected 5 columns, found {}", cols.len())));
        }
        out.push(SeparationSample {
            run_seed: cols[0].parse().map_err(|e| perr(format!("run_seed: {e}")))?,
            cycle: cols[1].parse().map_err(|e| perr(format!("cycle: {e}")))?,
            pair: cols[2].parse().map_err(perr)?,
            source: cols[3].parse().map_err(perr)?,
            value: cols[4].parse().map_err(|e| perr(format!("value: {e}")))?,
        });
    }
    Ok(out)
}

const SUMMARY_HEADER: &str = "pair,source,nb,count,mean,p1,p25,p50,p75,p99";

fn summary_line(r: &SummaryRow) -> String {
    let s = &r.summary;
    format!(
        "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
        r.pair, r.source, r.nb, s.count, s.mean, s.p1, s.p25, s.p50, s.p75, s.p99
    )
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut text = String::from(SUMMARY_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(&summary_line(r));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_summary_json(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let rounded: Vec<SummaryRow> = rows
        .iter()
        .map(|r| {
            let s = r.summary;
            SummaryRow {
                summary: DistributionSummary {
                    count: s.count,
                    mean: round6(s.mean),
                    p1: round6(s.p1),
                    p25: round6(s.p25),
                    p50: round6(s.p50),
                    p75: round6(s.p75),
                    p99: round6(s.p99),
                },
                ..r.clone()
            }
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rounded).map_err(|e| Error::Serialize(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `samples_<nb>.csv`, `summary_<nb>.csv` and `summary_<nb>.json`
/// into `dir` and returns the summary rows plus warnings for omitted groups.
pub fn export(dir: &Path, nb: usize, samples: &[SeparationSample]) -> Result<(Vec<SummaryRow>, Vec<String>)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_samples_csv(&dir.join(format!("samples_{nb}.csv")), samples)?;
    let (rows, warnings) = summarize_pooled(samples, nb);
    write_summary_csv(&dir.join(format!("summary_{nb}.csv")), &rows)?;
    write_summary_json(&dir.join(format!("summary_{nb}.json")), &rows)?;
    Ok((rows, warnings))
}

/// Plain-text table of summary rows.
pub fn format_table(rows: &[SummaryRow]) -> String {
    let mut s = format!(
        "{:<10} {:<13} {:>4} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "pair", "source", "N_b", "count", "mean", "p1", "p25", "p50", "p75", "p99"
    );
    for r in rows {
        let d = &r.summary;
        s.push_str(&format!(
            "{:<10} {:<13} {:>4} {:>8} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}\n",
            r.pair.as_str(),
            r.source.as_str(),
            r.nb,
            d.count,
            d.mean,
            d.p1,
            d.p25,
            d.p50,
            d.p75,
            d.p99
        ));
    }
    s
}
