//! Seeded batch experiments, growth fits, Clarkson-Shor sampling and plots.
//!
//! A batch runs every `(n, seed)` pair of a [`RunConfig`] in parallel, one
//! single-threaded simulation per scene, and merges results in `(n, seed)`
//! order so that identical configs give byte-identical data files. Scenes
//! small enough for the oracle are cross-checked against the census, the
//! static triangulation and the crossing lemmas.

pub mod curated;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{tally, tally_log_only, EventCounters};
use crate::crossings::analyze_scene;
use crate::error::{KdtError, Result};
use crate::kinetic::{self, EventKind, EventLog};
use crate::motion::{generate_scene, rational_serde, MotionFamily, Scene, Time};
use crate::oracle::{compare_log_with_census, enumerate_events_cached, interior_points, verify_snapshots, CensusEvent};
use crate::predicates::TupleCache;
use crate::roots::compare_roots;

/// Largest oracle cap a config may request.
pub const MAX_ORACLE_CAP: usize = 16;

fn default_k_values() -> Vec<usize> {
    vec![13]
}

fn default_oracle_cap() -> usize {
    12
}

fn default_snapshot_samples() -> usize {
    20
}

fn default_max_reseeds() -> u32 {
    8
}

mod opt_horizon {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<(Time, Time)>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|(a, b)| [rational_serde::format(a), rational_serde::format(b)])
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<(Time, Time)>, D::Error> {
        let v = Option::<[String; 2]>::deserialize(d)?;
        v.map(|[a, b]| {
            Ok((
                rational_serde::parse(&a).map_err(serde::de::Error::custom)?,
                rational_serde::parse(&b).map_err(serde::de::Error::custom)?,
            ))
        })
        .transpose()
    }
}

/// Batch configuration, read from a JSON file by the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: MotionFamily,
    pub n_values: Vec<usize>,
    /// Seeds per value of `n`: `base_seed, base_seed + 1, ...`.
    pub seeds: u64,
    #[serde(default)]
    pub base_seed: u64,
    /// Horizon as `["num/den", "num/den"]`; the family default when absent.
    #[serde(default, with = "opt_horizon")]
    pub horizon: Option<(Time, Time)>,
    /// Levels for the shallow-event counters.
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
    /// Directory for the JSON and CSV artifacts; nothing is written when absent.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Largest `n` that gets the full oracle verification.
    #[serde(default = "default_oracle_cap")]
    pub oracle_cap: usize,
    /// Inter-event snapshots compared with the static oracle per verified run.
    #[serde(default = "default_snapshot_samples")]
    pub snapshot_samples: usize,
    /// Isolation precision in bits. `KDT_PRECISION` takes priority when set.
    #[serde(default)]
    pub precision: Option<u32>,
    /// Replacement scenes tried after a degenerate one.
    #[serde(default = "default_max_reseeds")]
    pub max_reseeds: u32,
}

impl RunConfig {
    /// Config with defaults for everything but the family, sizes and seed count.
    pub fn new(family: MotionFamily, n_values: Vec<usize>, seeds: u64) -> Self {
        RunConfig {
            family,
            n_values,
            seeds,
            base_seed: 0,
            horizon: None,
            k_values: default_k_values(),
            output_dir: None,
            oracle_cap: default_oracle_cap(),
            snapshot_samples: default_snapshot_samples(),
            precision: None,
            max_reseeds: default_max_reseeds(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(KdtError::InvalidInput(format!("invalid config: {m}")));
        if self.seeds == 0 {
            return bad("no seeds");
        }
        if self.n_values.is_empty() {
            return bad("no values of n");
        }
        if self.n_values.iter().any(|&n| n < 4) {
            return bad("every n must be at least 4");
        }
        if self.oracle_cap > MAX_ORACLE_CAP {
            return bad(&format!("oracle cap above {MAX_ORACLE_CAP}"));
        }
        if let Some((a, b)) = &self.horizon {
            if a >= b {
                return bad("empty horizon");
            }
        }
        if self.precision == Some(0) {
            return bad("zero precision");
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }
}

/// Oracle-backed checks of one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleChecks {
    pub log_matches_census: bool,
    pub snapshots_checked: usize,
    pub snapshot_mismatches: usize,
    pub crossings: usize,
    pub lemma_failures: usize,
    /// Same-rotation pairs of single crossings compared for order coincidence.
    pub order_pairs_checked: usize,
    pub order_violations: usize,
    pub double_pairs_checked: usize,
    pub nesting_violations: usize,
    pub must_cross_checked: usize,
    pub must_cross_failures: usize,
}

impl OracleChecks {
    pub fn all_pass(&self) -> bool {
        self.log_matches_census
            && self.snapshot_mismatches == 0
            && self.lemma_failures == 0
            && self.order_violations == 0
            && self.nesting_violations == 0
            && self.must_cross_failures == 0
    }
}

/// Result of one `(n, seed)` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub n: usize,
    /// Requested seed.
    pub seed: u64,
    /// Seed of the scene actually simulated (differs after a reseed).
    pub scene_seed: u64,
    /// Reasons for every rejected scene.
    pub reseeds: Vec<String>,
    pub counters: EventCounters,
    pub checks: Option<OracleChecks>,
}

/// Seed of the `attempt`-th replacement scene.
pub fn reseed(seed: u64, attempt: u32) -> u64 {
    if attempt == 0 {
        seed
    } else {
        seed ^ ((attempt as u64) << 40) ^ 0x5EED_0000_0000_0000
    }
}

/// Simulate one scene and run the checks its size allows.
pub fn evaluate_scene(scene: &Scene, ks: &[usize], oracle_cap: usize, snapshot_samples: usize) -> Result<(EventCounters, Option<OracleChecks>)> {
    let (log, _) = kinetic::run(scene)?;
    let n = scene.len();
    if n > oracle_cap {
        return Ok((tally_log_only(&log, n), None));
    }
    let mut cache = TupleCache::new(scene);
    let census = enumerate_events_cached(scene, &mut cache)?;
    let mut counters = tally(&census, &log, n, ks);
    let snaps = verify_snapshots(scene, &log, snapshot_samples)?;
    let an = analyze_scene(scene, &log, &mut cache)?;
    counters.crossings = Some(an.crossings.len());
    counters.single_crossings = Some(an.singles());
    counters.double_crossings = Some(an.doubles());
    let checks = OracleChecks {
        log_matches_census: compare_log_with_census(&log, &census).equal(),
        snapshots_checked: snaps.checked,
        snapshot_mismatches: snaps.mismatches.len(),
        crossings: an.crossings.len(),
        lemma_failures: an.lemma_failures(),
        order_pairs_checked: an.order.single_pairs_checked,
        order_violations: an.order.order_violations.len(),
        double_pairs_checked: an.order.double_pairs_checked,
        nesting_violations: an.order.nesting_violations.len(),
        must_cross_checked: an.must_cross.len(),
        must_cross_failures: an.must_cross_failures(),
    };
    Ok((counters, Some(checks)))
}

fn is_scene_defect(e: &KdtError) -> bool {
    matches!(e, KdtError::Degenerate(_) | KdtError::Tangency(_) | KdtError::Ordering(_))
}

/// One run with reseeding on degenerate scenes.
pub fn run_one(config: &RunConfig, n: usize, seed: u64) -> Result<RunResult> {
    let mut reseeds = Vec::new();
    for attempt in 0..=config.max_reseeds {
        let scene_seed = reseed(seed, attempt);
        let outcome = generate_scene(config.family, n, scene_seed, config.horizon.clone())
            .and_then(|scene| evaluate_scene(&scene, &config.k_values, config.oracle_cap, config.snapshot_samples));
        match outcome {
            Ok((counters, checks)) => {
                return Ok(RunResult { n, seed, scene_seed, reseeds, counters, checks });
            }
            Err(e) if is_scene_defect(&e) => reseeds.push(format!("seed {scene_seed}: {e}")),
            Err(e) => return Err(e),
        }
    }
    Err(KdtError::Degenerate(format!(
        "n = {n}, seed = {seed}: every scene rejected ({})",
        reseeds.join("; ")
    )))
}

/// Mean counts for one value of `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    pub runs: usize,
    pub mean_events: f64,
    pub median_events: f64,
    pub mean_cocircularities: f64,
    pub mean_hull_events: f64,
    pub mean_crossings: Option<f64>,
    pub mean_single_crossings: Option<f64>,
    pub mean_double_crossings: Option<f64>,
    /// Mean number of cocircularities of level at most k, by k.
    pub mean_shallow: BTreeMap<usize, f64>,
}

/// Least-squares line through `(ln n, ln mean_events)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals in log space.
    pub residual: f64,
    pub points: usize,
}

/// Fraction of verified runs passing each check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassRates {
    pub verified_runs: usize,
    pub log_equivalence: f64,
    pub snapshots: f64,
    pub lemmas: f64,
    pub order: f64,
    pub must_cross: f64,
}

/// Aggregated batch results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub family: MotionFamily,
    pub rows: Vec<GrowthRow>,
    /// Present when at least three distinct `n` were run.
    pub slope: Option<SlopeFit>,
    pub pass_rates: Option<PassRates>,
    pub reseeds: usize,
}

/// Everything a batch produces.
#[derive(Clone, Debug, Serialize)]
pub struct BatchOutput {
    pub config: RunConfig,
    pub report: GrowthReport,
    pub runs: Vec<RunResult>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) / 2.0
    }
}

/// Least-squares fit of `ln y` against `ln x`; needs three distinct `x`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return None;
    }
    let mx = mean(&pts.iter().map(|p| p.0).collect::<Vec<_>>());
    let my = mean(&pts.iter().map(|p| p.1).collect::<Vec<_>>());
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Some(SlopeFit { slope, intercept, residual: (rss / pts.len() as f64).sqrt(), points: pts.len() })
}

/// Aggregate run results, ordered by `(n, seed)`.
pub fn aggregate(family: MotionFamily, runs: &[RunResult]) -> GrowthReport {
    let mut by_n: BTreeMap<usize, Vec<&RunResult>> = BTreeMap::new();
    for r in runs {
        by_n.entry(r.n).or_default().push(r);
    }
    let opt_mean = |v: Vec<Option<usize>>| -> Option<f64> {
        let v: Option<Vec<f64>> = v.into_iter().map(|x| x.map(|c| c as f64)).collect();
        v.map(|v| mean(&v))
    };
    let rows: Vec<GrowthRow> = by_n
        .iter()
        .map(|(&n, rs)| {
            let events: Vec<f64> = rs.iter().map(|r| r.counters.log_events as f64).collect();
            let mut mean_shallow = BTreeMap::new();
            if let Some(first) = rs.first() {
                for &k in first.counters.shallow_cocircularities.keys() {
                    let v: Vec<f64> = rs
                        .iter()
                        .filter_map(|r| r.counters.shallow_cocircularities.get(&k).map(|&c| c as f64))
                        .collect();
                    if v.len() == rs.len() {
                        mean_shallow.insert(k, mean(&v));
                    }
                }
            }
            GrowthRow {
                n,
                runs: rs.len(),
                mean_events: mean(&events),
                median_events: median(&events),
                mean_cocircularities: mean(&rs.iter().map(|r| r.counters.log_cocircularities as f64).collect::<Vec<_>>()),
                mean_hull_events: mean(&rs.iter().map(|r| r.counters.log_collinearities as f64).collect::<Vec<_>>()),
                mean_crossings: opt_mean(rs.iter().map(|r| r.counters.crossings).collect()),
                mean_single_crossings: opt_mean(rs.iter().map(|r| r.counters.single_crossings).collect()),
                mean_double_crossings: opt_mean(rs.iter().map(|r| r.counters.double_crossings).collect()),
                mean_shallow,
            }
        })
        .collect();
    let slope = fit_log_log(&rows.iter().map(|r| (r.n as f64, r.mean_events)).collect::<Vec<_>>());
    let verified: Vec<&OracleChecks> = runs.iter().filter_map(|r| r.checks.as_ref()).collect();
    let pass_rates = (!verified.is_empty()).then(|| {
        let rate = |f: &dyn Fn(&OracleChecks) -> bool| verified.iter().filter(|c| f(c)).count() as f64 / verified.len() as f64;
        PassRates {
            verified_runs: verified.len(),
            log_equivalence: rate(&|c| c.log_matches_census),
            snapshots: rate(&|c| c.snapshot_mismatches == 0),
            lemmas: rate(&|c| c.lemma_failures == 0),
            order: rate(&|c| c.order_violations == 0 && c.nesting_violations == 0),
            must_cross: rate(&|c| c.must_cross_failures == 0),
        }
    });
    GrowthReport {
        family,
        rows,
        slope,
        pass_rates,
        reseeds: runs.iter().map(|r| r.reseeds.len()).sum(),
    }
}

/// Run every `(n, seed)` pair of the config and write the artifacts.
pub fn run_batch(config: &RunConfig) -> Result<BatchOutput> {
    config.validate()?;
    let jobs: Vec<(usize, u64)> = config
        .n_values
        .iter()
        .flat_map(|&n| (0..config.seeds).map(move |i| (n, config.base_seed + i)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(n, seed)| run_one(config, n, seed))
        .collect::<Result<Vec<_>>>()?;
    let report = aggregate(config.family, &runs);
    let out = BatchOutput { config: config.clone(), report, runs };
    if let Some(dir) = &config.output_dir {
        write_artifacts(&out, dir)?;
    }
    Ok(out)
}

/// Flat CSV row of one run.
#[derive(Serialize)]
struct RunCsvRow {
    n: usize,
    seed: u64,
    scene_seed: u64,
    reseeds: usize,
    log_events: usize,
    log_cocircularities: usize,
    log_collinearities: usize,
    delaunay_cocircularities: Option<usize>,
    delaunay_index1: Option<usize>,
    delaunay_index2: Option<usize>,
    crossings: Option<usize>,
    single_crossings: Option<usize>,
    double_crossings: Option<usize>,
    verified: Option<bool>,
}

#[derive(Serialize)]
struct GrowthCsvRow {
    n: usize,
    runs: usize,
    mean_events: f64,
    median_events: f64,
    mean_cocircularities: f64,
    mean_hull_events: f64,
    mean_crossings: Option<f64>,
}

fn csv_err(e: csv::Error) -> KdtError {
    KdtError::Io(std::io::Error::other(e))
}

/// Write `batch.json`, `runs.csv` and `growth.csv` into `dir`.
pub fn write_artifacts(out: &BatchOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join("batch.json");
    std::fs::write(&json, serde_json::to_string_pretty(out)? + "\n")?;
    let runs = dir.join("runs.csv");
    let mut w = csv::Writer::from_path(&runs).map_err(csv_err)?;
    for r in &out.runs {
        let c = &r.counters;
        w.serialize(RunCsvRow {
            n: r.n,
            seed: r.seed,
            scene_seed: r.scene_seed,
            reseeds: r.reseeds.len(),
            log_events: c.log_events,
            log_cocircularities: c.log_cocircularities,
            log_collinearities: c.log_collinearities,
            delaunay_cocircularities: c.delaunay_cocircularities,
            delaunay_index1: c.delaunay_index1,
            delaunay_index2: c.delaunay_index2,
            crossings: c.crossings,
            single_crossings: c.single_crossings,
            double_crossings: c.double_crossings,
            verified: r.checks.as_ref().map(OracleChecks::all_pass),
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    let growth = dir.join("growth.csv");
    let mut w = csv::Writer::from_path(&growth).map_err(csv_err)?;
    for r in &out.report.rows {
        w.serialize(GrowthCsvRow {
            n: r.n,
            runs: r.runs,
            mean_events: r.mean_events,
            median_events: r.median_events,
            mean_cocircularities: r.mean_cocircularities,
            mean_hull_events: r.mean_hull_events,
            mean_crossings: r.mean_crossings,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(vec![json, runs, growth])
}

/// Probability that a cocircularity with `level` interior points among `n`
/// survives as a Delaunay event in a uniform `m`-subset: its four points are
/// drawn and none of the interior ones is.
pub fn hypergeometric_survival(n: usize, m: usize, level: usize) -> f64 {
    if m < 4 || n < 4 + level || m > n {
        return 0.0;
    }
    // C(n - 4 - level, m - 4) / C(n, m) as a running product
    let free = n - 4 - level;
    if m - 4 > free {
        return 0.0;
    }
    let mut p = 1.0;
    for i in 0..4 {
        p *= (m - i) as f64 / (n - i) as f64;
    }
    for j in 0..level {
        p *= (n - m - j) as f64 / (n - 4 - j) as f64;
    }
    p
}

/// Survival statistics of one tracked event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSurvival {
    pub participants: Vec<u32>,
    pub level: usize,
    pub probability: f64,
    pub survivals: usize,
    /// Standardized deviation of `survivals` from its binomial mean.
    pub z_score: f64,
}

/// Clarkson-Shor sampling report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClarksonShorReport {
    pub n: usize,
    pub k: usize,
    pub sample_size: usize,
    pub trials: usize,
    pub seed: u64,
    /// Cocircularities of level at most k in the full scene.
    pub shallow_events: usize,
    /// Mean number of those that are Delaunay events of the sample.
    pub mean_retained: f64,
    /// The same mean predicted by the hypergeometric formula.
    pub expected_retained: f64,
    pub mean_sample_delaunay: f64,
    /// Success probability floors: four defining points and three defining points.
    pub floor_cocircularity: f64,
    pub floor_collinearity: f64,
    /// Shallow events whose presence in a sample log disagreed with the membership rule.
    pub prediction_mismatches: usize,
    pub target: Option<TargetSurvival>,
}

/// Draw `trials` uniform subsets of size `ceil(n / k)`, simulate each and count
/// which k-shallow cocircularities of the full scene survive as Delaunay events.
/// The tracked target is the earliest cocircularity of level exactly `k`.
pub fn clarkson_shor_experiment(scene: &Scene, k: usize, trials: usize, seed: u64) -> Result<ClarksonShorReport> {
    let n = scene.len();
    if k == 0 || n < 4 * k {
        return Err(KdtError::Precondition(format!("need k >= 1 and n >= 4k, got n = {n}, k = {k}")));
    }
    let m = n.div_ceil(k);
    let mut cache = TupleCache::new(scene);
    let census = enumerate_events_cached(scene, &mut cache)?;
    let shallow: Vec<&CensusEvent> = census
        .iter()
        .filter(|e| e.kind == EventKind::Cocircularity && e.level <= k)
        .collect();
    let mut members: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(shallow.len());
    let mut by_tuple: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    for (i, e) in shallow.iter().enumerate() {
        let tuple: Vec<usize> = e.participants.iter().map(|&id| scene.index_of(id).unwrap()).collect();
        let mut time = e.time.clone();
        let inside = interior_points(&mut cache, &mut time, [tuple[0], tuple[1], tuple[2], tuple[3]])?;
        members.push((tuple, inside));
        by_tuple.entry(e.participants.clone()).or_default().push(i);
    }
    let target = shallow.iter().position(|e| e.level == k);
    let expected_retained: f64 = shallow.iter().map(|e| hypergeometric_survival(n, m, e.level)).sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut retained, mut sample_delaunay, mut mismatches, mut target_hits) = (0usize, 0usize, 0usize, 0usize);
    for _ in 0..trials {
        let mut pick = sample(&mut rng, n, m).into_vec();
        pick.sort_unstable();
        let sub = scene.subset(&pick);
        let (log, _) = kinetic::run(&sub)?;
        let observed = survivors(&log, &shallow, &by_tuple);
        let mut in_sample = vec![false; n];
        for &i in &pick {
            in_sample[i] = true;
        }
        sample_delaunay += log.cocircularities();
        for (i, (tuple, inside)) in members.iter().enumerate() {
            let predicted = tuple.iter().all(|&x| in_sample[x]) && !inside.iter().any(|&x| in_sample[x]);
            if predicted != observed[i] {
                mismatches += 1;
            }
            if observed[i] {
                retained += 1;
                if Some(i) == target {
                    target_hits += 1;
                }
            }
        }
    }
    let target = target.map(|i| {
        let p = hypergeometric_survival(n, m, k);
        let mu = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        TargetSurvival {
            participants: shallow[i].participants.clone(),
            level: k,
            probability: p,
            survivals: target_hits,
            z_score: if sd > 0.0 { (target_hits as f64 - mu) / sd } else { 0.0 },
        }
    });
    let t = trials.max(1) as f64;
    Ok(ClarksonShorReport {
        n,
        k,
        sample_size: m,
        trials,
        seed,
        shallow_events: shallow.len(),
        mean_retained: retained as f64 / t,
        expected_retained,
        mean_sample_delaunay: sample_delaunay as f64 / t,
        floor_cocircularity: 1.0 / (k as f64).powi(4),
        floor_collinearity: 1.0 / (k as f64).powi(3),
        prediction_mismatches: mismatches,
        target,
    })
}

/// Which shallow events of the full scene appear in a sample's log.
fn survivors(log: &EventLog, shallow: &[&CensusEvent], by_tuple: &HashMap<Vec<u32>, Vec<usize>>) -> Vec<bool> {
    let mut seen = vec![false; shallow.len()];
    for e in log.events.iter().filter(|e| e.kind == EventKind::Cocircularity) {
        let mut ids = e.participants.clone();
        ids.sort_unstable();
        let Some(candidates) = by_tuple.get(&ids) else { continue };
        for &i in candidates {
            let (mut a, mut b) = (e.time.clone(), shallow[i].time.clone());
            if compare_roots(&mut a, &mut b) == std::cmp::Ordering::Equal {
                seen[i] = true;
            }
        }
    }
    seen
}

/// Paths written by [`emit_plots`].
#[derive(Clone, Debug)]
pub struct PlotFiles {
    pub svg: PathBuf,
    pub csv: PathBuf,
}

/// Log-log plot of mean event counts against `n`, with the fitted line when
/// there is one, as `growth.svg` plus the plotted data as `growth_plot.csv`.
pub fn emit_plots(report: &GrowthReport, dir: &Path) -> Result<PlotFiles> {
    if report.rows.is_empty() {
        return Err(KdtError::InvalidInput("empty report".into()));
    }
    std::fs::create_dir_all(dir)?;
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.mean_events > 0.0)
        .map(|r| ((r.n as f64).log10(), r.mean_events.log10()))
        .collect();
    let fitted = |x: f64| {
        report
            .slope
            .as_ref()
            .map(|f| (f.intercept + f.slope * x * std::f64::consts::LN_10) / std::f64::consts::LN_10)
    };

    let csv_path = dir.join("growth_plot.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    w.write_record(["n", "mean_events", "log10_n", "log10_events", "log10_fit"]).map_err(csv_err)?;
    for r in &report.rows {
        let lx = (r.n as f64).log10();
        let ly = if r.mean_events > 0.0 { r.mean_events.log10().to_string() } else { String::new() };
        let lf = fitted(lx).map(|v| v.to_string()).unwrap_or_default();
        w.write_record([r.n.to_string(), r.mean_events.to_string(), lx.to_string(), ly, lf]).map_err(csv_err)?;
    }
    w.flush()?;

    let svg_path = dir.join("growth.svg");
    std::fs::write(&svg_path, render_svg(report, &pts, &fitted))?;
    Ok(PlotFiles { svg: svg_path, csv: csv_path })
}

fn render_svg(report: &GrowthReport, pts: &[(f64, f64)], fitted: &dyn Fn(f64) -> Option<f64>) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    let span = |v: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = v.collect();
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if v.is_empty() {
            (0.0, 1.0)
        } else if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = span(&mut pts.iter().map(|p| p.0));
    let (y0, y1) = span(&mut pts.iter().map(|p| p.1).chain(pts.iter().filter_map(|p| fitted(p.0))));
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{M} {t} L{M} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        t = M,
        b = H - M,
        r = W - M
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">log10 n</text>"#,
        W / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 15 {})">log10 mean events</text>"#,
        H / 2.0,
        H / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{} events vs n</text>"#,
        W / 2.0,
        report.family
    );
    for (row, p) in report.rows.iter().filter(|r| r.mean_events > 0.0).zip(pts) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, sx(p.0), sy(p.1));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
            sx(p.0),
            H - M + 16.0,
            row.n
        );
    }
    if let (Some(fit), Some(a), Some(b)) = (&report.slope, fitted(x0), fitted(x1)) {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
            sx(x0),
            sy(a),
            sx(x1),
            sy(b)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="13" fill="firebrick">slope {:.3}, rms residual {:.3}</text>"#,
            M + 10.0,
            M + 10.0,
            fit.slope,
            fit.residual
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn hypergeometric_matches_binomial_ratio() {
        for (n, m, l) in [(16, 8, 2), (16, 4, 4), (16, 4, 0), (12, 6, 3), (8, 8, 0)] {
            let want = binom((n - 4 - l) as u64, (m - 4) as u64) / binom(n as u64, m as u64);
            let got = hypergeometric_survival(n, m, l);
            assert!((want - got).abs() < 1e-12, "{n} {m} {l}: {want} vs {got}");
        }
        assert_eq!(hypergeometric_survival(8, 8, 1), 0.0);
    }

    #[test]
    fn slope_needs_three_sizes() {
        assert!(fit_log_log(&[(10.0, 100.0), (20.0, 400.0)]).is_none());
        let f = fit_log_log(&[(10.0, 100.0), (20.0, 400.0), (40.0, 1600.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn config_rejects_zero_seeds() {
        let c = RunConfig::new(MotionFamily::GenericLinear, vec![8], 0);
        assert!(matches!(c.validate(), Err(KdtError::InvalidInput(_))));
    }

    #[test]
    fn config_json_roundtrip() {
        let mut c = RunConfig::new(MotionFamily::GenericLinear, vec![6, 8], 3);
        c.horizon = Some((BigRational::new(1.into(), 4.into()), BigRational::from_integer(2.into())));
        let s = serde_json::to_string(&c).unwrap();
        let back = RunConfig::from_json(&s).unwrap();
        assert_eq!(back.horizon, c.horizon);
        assert_eq!(back.n_values, c.n_values);
    }
}
