//! Monte Carlo sweeps, result files and plot scripts.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{run_baseline, BaselineKind, TrialSeeds};
use crate::channel::{write_matrix, ChannelRealization};
use crate::error::{Error, Result};
use crate::optimizer::{brute_force_joint, optimize_joint, PsoParams, RisProblem};
use crate::rng::tag;
use crate::scenario::{ArrayDims, Scenario};

/// CSV header of every result file.
pub const CSV_HEADER: &str =
    "sweep_kind,swept_value,baseline,mean_rate_bpshz,stderr,trials,seed,config_digest,ris_x,ris_y";

/// Share of failed trials above which a point is flagged.
pub const FAILURE_FLAG_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Power,
    Elements,
    UeScenarios,
    Single,
}

impl SweepKind {
    pub const fn name(self) -> &'static str {
        match self {
            SweepKind::Power => "power",
            SweepKind::Elements => "elements",
            SweepKind::UeScenarios => "ue_scenarios",
            SweepKind::Single => "single",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SweepKind::Power,
            SweepKind::Elements,
            SweepKind::UeScenarios,
            SweepKind::Single,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Malformed(format!("unknown sweep kind '{s}'")))
    }
}

/// One point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SweepValue {
    /// Transmit power in dBm.
    Power(f64),
    Elements(ArrayDims),
    Ue([f64; 3]),
    Single,
}

impl SweepValue {
    pub fn kind(&self) -> SweepKind {
        match self {
            SweepValue::Power(_) => SweepKind::Power,
            SweepValue::Elements(_) => SweepKind::Elements,
            SweepValue::Ue(_) => SweepKind::UeScenarios,
            SweepValue::Single => SweepKind::Single,
        }
    }

    /// The scenario with this value substituted.
    pub fn apply(&self, base: &Scenario) -> Scenario {
        let mut s = base.clone();
        match *self {
            SweepValue::Power(p) => s.config.transmit_power_dbm = p,
            SweepValue::Elements(d) => s.config.ris_elements = d,
            SweepValue::Ue(ue) => s.geometry.ue_position = ue,
            SweepValue::Single => {}
        }
        s
    }

    /// Parses a CSV or command-line token for the given kind. Element counts
    /// accept either `MxN` or a perfect square.
    pub fn parse(kind: SweepKind, text: &str) -> Result<Self> {
        let bad = || Error::Malformed(format!("bad {kind} value '{text}'"));
        let t = text.trim();
        match kind {
            SweepKind::Power => t.parse().map(SweepValue::Power).map_err(|_| bad()),
            SweepKind::Elements => {
                let dims = match t.split_once('x') {
                    Some((a, b)) => ArrayDims::new(
                        a.parse().map_err(|_| bad())?,
                        b.parse().map_err(|_| bad())?,
                    ),
                    None => ArrayDims::square(t.parse().map_err(|_| bad())?).ok_or_else(bad)?,
                };
                Ok(SweepValue::Elements(dims))
            }
            SweepKind::UeScenarios => {
                let parts = t
                    .split(';')
                    .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<Vec<f64>>>()?;
                let ue: [f64; 3] = parts.try_into().map_err(|_| bad())?;
                Ok(SweepValue::Ue(ue))
            }
            SweepKind::Single => Ok(SweepValue::Single),
        }
    }
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Power(p) => write!(f, "{p}"),
            SweepValue::Elements(d) => write!(f, "{d}"),
            SweepValue::Ue([x, y, z]) => write!(f, "{x};{y};{z}"),
            SweepValue::Single => f.write_str("-"),
        }
    }
}

pub fn default_power_values() -> Vec<SweepValue> {
    [0.0, 10.0, 20.0, 30.0, 40.0]
        .into_iter()
        .map(SweepValue::Power)
        .collect()
}

pub fn default_element_values() -> Vec<SweepValue> {
    [4, 6, 8, 10]
        .into_iter()
        .map(|n| SweepValue::Elements(ArrayDims::new(n, n)))
        .collect()
}

pub fn default_ue_values() -> Vec<SweepValue> {
    [[100.0, 100.0, 2.0], [80.0, 60.0, 2.0], [60.0, 90.0, 2.0]]
        .into_iter()
        .map(SweepValue::Ue)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub values: Vec<SweepValue>,
    pub baselines: Vec<BaselineKind>,
    pub trials: usize,
    pub seed: u64,
    /// Seed for search randomness; the channel seed when absent.
    pub pso_seed: Option<u64>,
}

impl SweepSpec {
    pub fn new(kind: SweepKind, values: Vec<SweepValue>, trials: usize, seed: u64) -> Self {
        Self {
            kind,
            values,
            baselines: BaselineKind::ALL.to_vec(),
            trials,
            seed,
            pso_seed: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep has no values".into()));
        }
        if self.baselines.is_empty() {
            return Err(Error::InvalidConfig("sweep has no baselines".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if let Some(v) = self.values.iter().find(|v| v.kind() != self.kind) {
            return Err(Error::MixedSweepKinds(format!(
                "value {v} in a {} sweep",
                self.kind
            )));
        }
        Ok(())
    }

    fn seeds(&self, trial: u64) -> TrialSeeds {
        TrialSeeds {
            seed: self.seed,
            pso_seed: self.pso_seed.unwrap_or(self.seed),
            trial,
        }
    }
}

/// Monte Carlo summary of one scheme at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateResult {
    pub kind: SweepKind,
    pub value: SweepValue,
    pub baseline: BaselineKind,
    /// Mean over successful trials.
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub rates: Vec<f64>,
    pub failures: Vec<(u64, String)>,
    /// Trials that ran with fewer streams or a regularized rate.
    pub degraded_trials: usize,
    pub flagged: bool,
    pub seed: u64,
    pub digest: String,
    /// Mean platform point over trials, for kinds that use one.
    pub ris_position: Option<(f64, f64)>,
    pub positions: Vec<(f64, f64)>,
}

impl RateResult {
    pub fn row(&self) -> ResultRow {
        ResultRow {
            sweep_kind: self.kind.name().to_string(),
            swept_value: self.value.to_string(),
            baseline: self.baseline.name().to_string(),
            mean_rate_bpshz: self.mean,
            stderr: self.stderr,
            trials: self.trials,
            seed: self.seed,
            config_digest: self.digest.clone(),
            ris_x: self.ris_position.map(|p| p.0),
            ris_y: self.ris_position.map(|p| p.1),
        }
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_kind: String,
    pub swept_value: String,
    pub baseline: String,
    pub mean_rate_bpshz: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
    pub config_digest: String,
    pub ris_x: Option<f64>,
    pub ris_y: Option<f64>,
}

/// Sample mean and standard error; the error is zero for a single sample.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn monte_carlo_with(
    scenario: &Scenario,
    value: SweepValue,
    kind: BaselineKind,
    trials: usize,
    seeds: impl Fn(u64) -> TrialSeeds,
) -> RateResult {
    let mut rates = Vec::with_capacity(trials);
    let mut positions = Vec::new();
    let mut failures = Vec::new();
    let mut degraded = 0;
    for t in 0..trials as u64 {
        match run_baseline(kind, scenario, seeds(t)) {
            Ok(out) if out.rate.is_finite() => {
                rates.push(out.rate);
                positions.extend(out.position);
                degraded += usize::from(out.flagged);
            }
            Ok(out) => failures.push((t, format!("non-finite rate {}", out.rate))),
            Err(e) => failures.push((t, e.to_string())),
        }
    }
    let (mean, stderr) = mean_and_stderr(&rates);
    let ris_position = (!positions.is_empty()).then(|| {
        let n = positions.len() as f64;
        (
            positions.iter().map(|p| p.0).sum::<f64>() / n,
            positions.iter().map(|p| p.1).sum::<f64>() / n,
        )
    });
    RateResult {
        kind: value.kind(),
        value,
        baseline: kind,
        mean,
        stderr,
        trials,
        flagged: failures.len() as f64 > FAILURE_FLAG_FRACTION * trials as f64,
        failures,
        degraded_trials: degraded,
        rates,
        seed: seeds(0).seed,
        digest: scenario.digest(),
        ris_position,
        positions,
    }
}

/// Averages `trials` independent trials; trial `t` draws from `(seed, t)`.
pub fn monte_carlo_point(
    scenario: &Scenario,
    kind: BaselineKind,
    trials: usize,
    seed: u64,
) -> RateResult {
    monte_carlo_with(scenario, SweepValue::Single, kind, trials, |t| {
        TrialSeeds::new(seed, t)
    })
}

/// Results of one sweep, rows ordered by value (as listed) then baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub kind: SweepKind,
    pub results: Vec<RateResult>,
}

impl ResultTable {
    pub fn rows(&self) -> Vec<ResultRow> {
        self.results.iter().map(RateResult::row).collect()
    }

    pub fn get(&self, value: &SweepValue, kind: BaselineKind) -> Option<&RateResult> {
        self.results
            .iter()
            .find(|r| &r.value == value && r.baseline == kind)
    }
}

pub fn sweep(spec: &SweepSpec, base: &Scenario) -> Result<ResultTable> {
    spec.check()?;
    let mut baselines = spec.baselines.clone();
    baselines.sort();
    baselines.dedup();
    let mut results = Vec::with_capacity(spec.values.len() * baselines.len());
    for value in &spec.values {
        let scenario = value.apply(base).validated()?;
        for &kind in &baselines {
            results.push(monte_carlo_with(&scenario, *value, kind, spec.trials, |t| {
                spec.seeds(t)
            }));
        }
    }
    Ok(ResultTable {
        kind: spec.kind,
        results,
    })
}

/// Paths of the files written for one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub metadata: PathBuf,
    pub plot: PathBuf,
}

impl OutputFiles {
    pub fn in_dir(dir: &Path, kind: SweepKind) -> Self {
        Self {
            csv: dir.join(format!("results_{kind}.csv")),
            metadata: dir.join(format!("results_{kind}.json")),
            plot: dir.join(format!("plot_{kind}.py")),
        }
    }
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Malformed(format!("unexpected header '{header}'")));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    sweep_kind: SweepKind,
    swept_values: Vec<String>,
    baselines: Vec<&'static str>,
    trials: usize,
    seed: u64,
    pso_seed: u64,
    config_digest: String,
    fixed_ris_position: [f64; 3],
    ris_height_m: f64,
    relay_model: &'static str,
    crate_version: &'static str,
    points: Vec<PointMeta>,
    config: &'a Scenario,
}

#[derive(Debug, Serialize)]
struct PointMeta {
    swept_value: String,
    baseline: &'static str,
    config_digest: String,
    failed_trials: Vec<(u64, String)>,
    degraded_trials: usize,
    flagged: bool,
    per_trial_rates: Vec<f64>,
    per_trial_positions: Vec<(f64, f64)>,
}

/// Writes the CSV, the JSON sidecar and the plot script into `dir`.
pub fn write_results(
    table: &ResultTable,
    spec: &SweepSpec,
    base: &Scenario,
    dir: &Path,
) -> Result<OutputFiles> {
    let rows = table.rows();
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    fs::create_dir_all(dir)?;
    let files = OutputFiles::in_dir(dir, table.kind);
    write_csv(&rows, &files.csv)?;

    let meta = Metadata {
        sweep_kind: table.kind,
        swept_values: spec.values.iter().map(ToString::to_string).collect(),
        baselines: spec.baselines.iter().map(|k| k.name()).collect(),
        trials: spec.trials,
        seed: spec.seed,
        pso_seed: spec.pso_seed.unwrap_or(spec.seed),
        config_digest: base.digest(),
        fixed_ris_position: base.geometry.platform_center(),
        ris_height_m: base.geometry.ris_height,
        relay_model: "ideal decode-and-forward; receive array = rx_antennas, \
                      transmit array = tx_antennas; half duplex halves the full-duplex optimum",
        crate_version: env!("CARGO_PKG_VERSION"),
        points: table
            .results
            .iter()
            .map(|r| PointMeta {
                swept_value: r.value.to_string(),
                baseline: r.baseline.name(),
                config_digest: r.digest.clone(),
                failed_trials: r.failures.clone(),
                degraded_trials: r.degraded_trials,
                flagged: r.flagged,
                per_trial_rates: r.rates.clone(),
                per_trial_positions: r.positions.clone(),
            })
            .collect(),
        config: base,
    };
    let mut f = fs::File::create(&files.metadata)?;
    serde_json::to_writer_pretty(&mut f, &meta)?;
    writeln!(f)?;

    let csv_name = files
        .csv
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("results.csv")
        .to_string();
    emit_plot_script(&rows, &csv_name, base, &files.plot)?;
    Ok(files)
}

const PLOT_PRELUDE: &str = r#"import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
"#;

const PLOT_LINES: &str = r#"
def x_value(text):
    if "x" in text:
        a, b = text.split("x")
        return int(a) * int(b)
    return float(text)


series = defaultdict(list)
with open(os.path.join(HERE, CSV_NAME), newline="") as f:
    for row in csv.DictReader(f):
        series[row["baseline"]].append(
            (x_value(row["swept_value"]), float(row["mean_rate_bpshz"]), float(row["stderr"]))
        )

fig, ax = plt.subplots(figsize=(6.4, 4.8))
for name, pts in series.items():
    pts.sort()
    xs, ys, es = zip(*pts)
    ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=name)
positive = [y for pts in series.values() for _, y, _ in pts if y > 0]
if positive and max(positive) > 1e3 * min(positive):
    ax.set_yscale("log")
ax.set_xlabel(X_LABEL)
ax.set_ylabel("Achievable rate (bps/Hz)")
ax.grid(True, alpha=0.3)
ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(os.path.join(HERE, OUTPUT), dpi=150)
"#;

const PLOT_BARS: &str = r#"
groups = []
rates = defaultdict(dict)
spots = defaultdict(list)
with open(os.path.join(HERE, CSV_NAME), newline="") as f:
    for row in csv.DictReader(f):
        g = row["swept_value"]
        if g not in groups:
            groups.append(g)
        rates[row["baseline"]][g] = float(row["mean_rate_bpshz"])
        if row["ris_x"] and row["baseline"].startswith("movable"):
            spots[row["baseline"]].append((float(row["ris_x"]), float(row["ris_y"]), g))

fig, (bars, plan) = plt.subplots(1, 2, figsize=(11, 4.8))
width = 0.8 / max(len(rates), 1)
for i, (name, by_group) in enumerate(rates.items()):
    xs = [j + (i - (len(rates) - 1) / 2) * width for j in range(len(groups))]
    bars.bar(xs, [by_group.get(g, 0.0) for g in groups], width, label=name)
positive = [v for by_group in rates.values() for v in by_group.values() if v > 0]
if positive and max(positive) > 1e3 * min(positive):
    bars.set_yscale("log")
bars.set_xticks(range(len(groups)))
bars.set_xticklabels(["UE " + g.replace(";", ", ") for g in groups], fontsize="small")
bars.set_ylabel("Achievable rate (bps/Hz)")
bars.legend(fontsize="small")

(x0, x1), (y0, y1) = PLATFORM
plan.add_patch(plt.Rectangle((x0, y0), x1 - x0, y1 - y0, fill=False, linestyle="--"))
plan.plot(*FIXED, marker="s", color="k", linestyle="none", label="fixed RIS")
for name, pts in spots.items():
    plan.scatter([p[0] for p in pts], [p[1] for p in pts], label=name)
    for x, y, g in pts:
        plan.annotate("UE " + g.replace(";", ", "), (x, y), fontsize="x-small")
plan.set_xlim(x0 - 5, x1 + 5)
plan.set_ylim(y0 - 5, y1 + 5)
plan.set_aspect("equal")
plan.set_xlabel("x (m)")
plan.set_ylabel("y (m)")
plan.legend(fontsize="small")
fig.tight_layout()
fig.savefig(os.path.join(HERE, OUTPUT), dpi=150)
"#;

/// Writes a matplotlib script that reads `csv_name` from its own directory.
pub fn emit_plot_script(
    rows: &[ResultRow],
    csv_name: &str,
    scenario: &Scenario,
    path: &Path,
) -> Result<()> {
    let first = rows.first().ok_or(Error::EmptyTable)?;
    if let Some(other) = rows.iter().find(|r| r.sweep_kind != first.sweep_kind) {
        return Err(Error::MixedSweepKinds(format!(
            "{} and {}",
            first.sweep_kind, other.sweep_kind
        )));
    }
    let kind: SweepKind = first.sweep_kind.parse()?;
    let stem = Path::new(csv_name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results");
    let mut script = String::from(PLOT_PRELUDE);
    script.push_str(&format!("CSV_NAME = {csv_name:?}\nOUTPUT = \"{stem}.png\"\n"));
    match kind {
        SweepKind::UeScenarios | SweepKind::Single => {
            let g = &scenario.geometry;
            let [cx, cy, _] = g.platform_center();
            script.push_str(&format!(
                "PLATFORM = (({:?}, {:?}), ({:?}, {:?}))\nFIXED = ({cx:?}, {cy:?})\n",
                g.platform_x_range[0],
                g.platform_x_range[1],
                g.platform_y_range[0],
                g.platform_y_range[1],
            ));
            script.push_str(PLOT_BARS);
        }
        SweepKind::Power | SweepKind::Elements => {
            let label = if kind == SweepKind::Power {
                "Transmit power P_T (dBm)"
            } else {
                "RIS elements M_I"
            };
            script.push_str(&format!("X_LABEL = {label:?}\n"));
            script.push_str(PLOT_LINES);
        }
    }
    fs::write(path, script)?;
    Ok(())
}

/// Writes `H_TI` and `H_IR` with the RIS at the platform center for each
/// trial, one text file per matrix.
pub fn dump_channels(
    scenario: &Scenario,
    seed: u64,
    trials: usize,
    dir: &Path,
    prefix: &str,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in 0..trials as u64 {
        let draw = TrialSeeds::new(seed, t).channel_draw(scenario);
        let real = ChannelRealization::at(scenario, &draw, scenario.geometry.platform_center())?;
        for (name, m) in [("h_ti", &real.h_ti), ("h_ir", &real.h_ir)] {
            let path = dir.join(format!("{prefix}trial{t}_{name}.txt"));
            let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
            writeln!(f, "# {name} seed={seed} trial={t} ris=platform_center")?;
            write_matrix(&mut f, m)?;
            f.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Small instance on which exhaustive search is affordable: 2x2 Tx and Rx
/// arrays and `ris` elements.
pub fn oracle_scenario(ris: ArrayDims) -> Scenario {
    let mut s = Scenario::default();
    s.config.tx_antennas = ArrayDims::new(2, 2);
    s.config.rx_antennas = ArrayDims::new(2, 2);
    s.config.ris_elements = ris;
    s.config.pso = PsoParams {
        swarm_size: 10,
        iterations: 50,
        ..PsoParams::default()
    };
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRun {
    pub seed: u64,
    pub pso_rate: f64,
    pub oracle_rate: f64,
    pub history_monotone: bool,
}

impl OracleRun {
    pub fn ratio(&self) -> f64 {
        self.pso_rate / self.oracle_rate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub ris: ArrayDims,
    pub position_steps: usize,
    pub phase_steps: usize,
    pub threshold: f64,
    pub runs: Vec<OracleRun>,
}

impl OracleReport {
    /// Share of runs reaching `threshold` of the oracle value.
    pub fn success_fraction(&self) -> f64 {
        let ok = self
            .runs
            .iter()
            .filter(|r| r.ratio() >= self.threshold)
            .count();
        ok as f64 / self.runs.len().max(1) as f64
    }

    pub fn all_monotone(&self) -> bool {
        self.runs.iter().all(|r| r.history_monotone)
    }
}

/// PSO against exhaustive search on `seeds` independent channel draws.
pub fn oracle_check(
    scenario: &Scenario,
    seeds: std::ops::Range<u64>,
    position_steps: usize,
    phase_steps: usize,
) -> Result<OracleReport> {
    let mut runs = Vec::with_capacity(seeds.end.saturating_sub(seeds.start) as usize);
    for seed in seeds {
        let ts = TrialSeeds::new(seed, 0);
        let draw = ts.channel_draw(scenario);
        let problem = RisProblem::new(scenario, &draw)?;
        let (_, oracle_rate) = brute_force_joint(&problem, position_steps, phase_steps)?;
        let out = optimize_joint(&problem, &scenario.config.pso, &mut ts.search_rng(tag::PSO_JOINT));
        runs.push(OracleRun {
            seed,
            pso_rate: out.rate,
            oracle_rate,
            history_monotone: out.history.windows(2).all(|w| w[1] >= w[0]),
        });
    }
    Ok(OracleReport {
        ris: scenario.config.ris_elements,
        position_steps,
        phase_steps,
        threshold: 0.98,
        runs,
    })
}
