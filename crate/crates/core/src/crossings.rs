//! Delaunay crossings and the structural checks attached to them.
//!
//! A Delaunay crossing `(pq, r, I = [t0, t1])` is an absence interval of the edge
//! `pq` during which `r` passes through the open segment `pq` and whose removal
//! keeps `pq` Delaunay throughout `I`. Records are oriented so that the first hit
//! takes `r` from the left of `p -> q` (`L-`, blue) to its right (`L+`, red).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{KdtError, Result};
use crate::kinetic::{EventKind, EventLog};
use crate::motion::{rational_serde, Scene};
use crate::oracle::{interval_check_cached, middle_of};
use crate::predicates::TupleCache;
use crate::roots::{compare_roots, precision_bits, IsolatedRoot};

/// Number of hits of the crossed segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CrossingKind {
    Single,
    Double,
}

/// Rotation sense of a crossing around one endpoint of the crossed edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rotation {
    Clockwise,
    Counterclockwise,
}

/// A detected Delaunay crossing. Point references are ids.
#[derive(Clone, Debug)]
pub struct DelaunayCrossing {
    /// Oriented edge `(p, q)`: the first hit moves `r` from `L-` to `L+`.
    pub edge: (u32, u32),
    pub crosser: u32,
    pub t0: IsolatedRoot,
    pub t1: IsolatedRoot,
    /// Times at which `r` lies on the open segment, increasing.
    pub hits: Vec<IsolatedRoot>,
    pub kind: CrossingKind,
    /// A hit coincides with `t0` or `t1` (hull event).
    pub degenerate: bool,
    /// Removing `r` keeps the edge Delaunay over `(t0, t1)`.
    pub verified: bool,
}

impl DelaunayCrossing {
    /// `(p, r)` key of this clockwise crossing and `(q, r)` key of this counterclockwise one.
    pub fn rotation_keys(&self) -> [((u32, u32), Rotation); 2] {
        [
            ((self.edge.0, self.crosser), Rotation::Clockwise),
            ((self.edge.1, self.crosser), Rotation::Counterclockwise),
        ]
    }
}

fn idx(scene: &Scene, id: u32) -> Result<usize> {
    scene.index_of(id).ok_or_else(|| KdtError::InvalidInput(format!("unknown point id {id}")))
}

fn cmp(a: &IsolatedRoot, b: &IsolatedRoot) -> Ordering {
    let (mut x, mut y) = (a.clone(), b.clone());
    compare_roots(&mut x, &mut y)
}

/// Whether `x` lies in the closed interval `[lo, hi]`.
pub fn in_closed(x: &IsolatedRoot, lo: &IsolatedRoot, hi: &IsolatedRoot) -> bool {
    cmp(x, lo) != Ordering::Less && cmp(x, hi) != Ordering::Greater
}

/// Whether `x` lies in the half-open interval `(lo, hi]`.
pub fn in_left_open(x: &IsolatedRoot, lo: &IsolatedRoot, hi: &IsolatedRoot) -> bool {
    cmp(x, lo) == Ordering::Greater && cmp(x, hi) != Ordering::Greater
}

/// A maximal interval during which an edge is missing from the log's triangulation,
/// bounded by its removal and its reinsertion.
#[derive(Clone, Debug)]
pub struct AbsenceInterval {
    pub edge: (u32, u32),
    pub t0: IsolatedRoot,
    pub t1: IsolatedRoot,
    /// Log positions of the removal and the reinsertion.
    pub events: (usize, usize),
}

/// Absence intervals of every edge that leaves and later returns within the horizon.
pub fn absence_intervals(log: &EventLog) -> Vec<AbsenceInterval> {
    let mut open: HashMap<(u32, u32), usize> = HashMap::new();
    let mut out = Vec::new();
    let norm = |(a, b): (u32, u32)| (a.min(b), a.max(b));
    for (i, e) in log.events.iter().enumerate() {
        if let Some(r) = e.removed_edge {
            open.insert(norm(r), i);
        }
        if let Some(ins) = e.inserted_edge {
            if let Some(j) = open.remove(&norm(ins)) {
                out.push(AbsenceInterval {
                    edge: norm(ins),
                    t0: log.events[j].time.clone(),
                    t1: e.time.clone(),
                    events: (j, i),
                });
            }
        }
    }
    out.sort_by_key(|a| a.events);
    out
}

/// Times in `[lo, hi]` at which `r` lies on the open segment `pq`, increasing.
fn segment_hits(cache: &mut TupleCache, p: usize, q: usize, r: usize, lo: &IsolatedRoot, hi: &IsolatedRoot) -> Result<Vec<IsolatedRoot>> {
    let (t, _) = cache.orientation([p, q, r])?;
    let mut out = Vec::new();
    for root in &t.roots {
        if in_closed(root, lo, hi) {
            let mut time = root.clone();
            if middle_of(cache, &mut time, [p, q, r])? == r {
                out.push(time);
            }
        }
    }
    Ok(out)
}

/// Sign of `orientation(p, q, r)` just before a root of that predicate.
fn sign_before(cache: &mut TupleCache, p: usize, q: usize, r: usize, root: &IsolatedRoot) -> Result<i8> {
    let (_, s) = cache.orientation([p, q, r])?;
    if root.tangent {
        return Err(KdtError::Tangency(format!("tangent collinearity of {p}, {q}, {r}")));
    }
    Ok(s * root.sign_before)
}

/// Detect all Delaunay crossings of a verified log.
pub fn detect_crossings(scene: &Scene, log: &EventLog, cache: &mut TupleCache) -> Result<Vec<DelaunayCrossing>> {
    let n = scene.len();
    let mut out = Vec::new();
    for gap in absence_intervals(log) {
        let (p, q) = (idx(scene, gap.edge.0)?, idx(scene, gap.edge.1)?);
        let mut crossers = Vec::new();
        for r in 0..n {
            if r == p || r == q {
                continue;
            }
            let hits = segment_hits(cache, p, q, r, &gap.t0, &gap.t1)?;
            if !hits.is_empty() {
                crossers.push((r, hits));
            }
        }
        for (r, hits) in crossers {
            let mut excluded = vec![false; n];
            excluded[r] = true;
            if !interval_check_cached(cache, p, q, &gap.t0, &gap.t1, &excluded)? {
                continue;
            }
            let first = sign_before(cache, p, q, r, &hits[0])?;
            let (a, b) = if first > 0 { (p, q) } else { (q, p) };
            let degenerate = hits.iter().any(|h| cmp(h, &gap.t0) == Ordering::Equal || cmp(h, &gap.t1) == Ordering::Equal);
            let kind = match hits.len() {
                1 => CrossingKind::Single,
                2 => CrossingKind::Double,
                k => return Err(KdtError::InvariantViolation(format!("{k} hits in one crossing"))),
            };
            out.push(DelaunayCrossing {
                edge: (scene.id(a), scene.id(b)),
                crosser: scene.id(r),
                t0: gap.t0.clone(),
                t1: gap.t1.clone(),
                hits,
                kind,
                degenerate,
                verified: true,
            });
        }
    }
    Ok(out)
}

/// Outcome of the per-crossing lemma checks.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LemmaReport {
    /// `pr` and `rq` are Delaunay throughout the interval.
    pub crossing: bool,
    /// Every fourth point forms a red-blue cocircularity with `p, q, r` in the interval.
    /// For double crossings only points in `L+` at some hit are required to.
    pub once_collin: bool,
    /// Cocircularities of `r` with the pair are red-blue, and every red-blue one involves `r`.
    pub only_red_blue: bool,
    /// `r` meets `L_pq` only inside the segment.
    pub no_line_crossing: bool,
    /// No other point passes through the segment.
    pub sole_crosser: bool,
    pub failures: Vec<String>,
}

impl LemmaReport {
    pub fn all_hold(&self) -> bool {
        self.crossing && self.once_collin && self.only_red_blue && self.no_line_crossing && self.sole_crosser
    }
}

/// Colors of a pair cocircularity: true if the two other points are on opposite sides.
fn red_blue_at(cache: &mut TupleCache, time: &mut IsolatedRoot, p: usize, q: usize, x: usize, y: usize) -> Result<bool> {
    let sx = cache.orientation_sign_at(time, p, q, x)?;
    let sy = cache.orientation_sign_at(time, p, q, y)?;
    if sx == 0 || sy == 0 {
        return Err(KdtError::Degenerate("collinear point at a cocircularity".into()));
    }
    Ok(sx != sy)
}

/// Whether `s` lies in `L+` of the oriented edge at one of the hit times.
fn in_plus_at_some_hit(cache: &mut TupleCache, p: usize, q: usize, s: usize, hits: &[IsolatedRoot]) -> Result<bool> {
    for h in hits {
        let mut time = h.clone();
        if cache.orientation_sign_at(&mut time, p, q, s)? <= 0 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Check the structural lemmas on one crossing.
pub fn verify_crossing_lemmas(scene: &Scene, cache: &mut TupleCache, c: &DelaunayCrossing) -> Result<LemmaReport> {
    let n = scene.len();
    let (p, q, r) = (idx(scene, c.edge.0)?, idx(scene, c.edge.1)?, idx(scene, c.crosser)?);
    let mut rep = LemmaReport { crossing: true, once_collin: true, only_red_blue: true, no_line_crossing: true, sole_crosser: true, failures: vec![] };
    let none = vec![false; n];
    for (u, v) in [(p, r), (r, q)] {
        if !interval_check_cached(cache, u, v, &c.t0, &c.t1, &none)? {
            rep.crossing = false;
            rep.failures.push(format!("edge {}-{} not Delaunay throughout", scene.id(u), scene.id(v)));
        }
    }
    for s in 0..n {
        if s == p || s == q || s == r {
            continue;
        }
        // In a double crossing the disc flips sides at both hits, so a point
        // that stays in `L-` never has to cross its boundary.
        if c.kind == CrossingKind::Double && !in_plus_at_some_hit(cache, p, q, s, &c.hits)? {
            continue;
        }
        let (t, _) = cache.incircle([p, q, r, s])?;
        let mut found = false;
        for root in &t.roots {
            if in_closed(root, &c.t0, &c.t1) {
                let mut time = root.clone();
                if red_blue_at(cache, &mut time, p, q, r, s)? {
                    found = true;
                }
            }
        }
        if !found {
            rep.once_collin = false;
            rep.failures.push(format!("no red-blue cocircularity with {}", scene.id(s)));
        }
    }
    for x in 0..n {
        if x == p || x == q {
            continue;
        }
        for y in x + 1..n {
            if y == p || y == q {
                continue;
            }
            let (t, _) = cache.incircle([p, q, x, y])?;
            for root in &t.roots {
                if !in_closed(root, &c.t0, &c.t1) {
                    continue;
                }
                let mut time = root.clone();
                let rb = red_blue_at(cache, &mut time, p, q, x, y)?;
                let with_r = x == r || y == r;
                if rb != with_r {
                    rep.only_red_blue = false;
                    rep.failures.push(format!(
                        "cocircularity with {} and {} is {}",
                        scene.id(x),
                        scene.id(y),
                        if rb { "red-blue" } else { "monochromatic" }
                    ));
                }
            }
        }
    }
    let (t, _) = cache.orientation([p, q, r])?;
    for root in &t.roots {
        if in_closed(root, &c.t0, &c.t1) {
            let mut time = root.clone();
            if middle_of(cache, &mut time, [p, q, r])? != r {
                rep.no_line_crossing = false;
                rep.failures.push("crosser meets the line outside the segment".into());
            }
        }
    }
    for x in 0..n {
        if x == p || x == q || x == r {
            continue;
        }
        if !segment_hits(cache, p, q, x, &c.t0, &c.t1)?.is_empty() {
            rep.sole_crosser = false;
            rep.failures.push(format!("point {} also crosses the segment", scene.id(x)));
        }
    }
    Ok(rep)
}

/// Outcome of the order and nesting checks over all crossings of a scene.
#[derive(Clone, Debug, Default, Serialize)]
pub struct OrderReport {
    pub single_pairs_checked: usize,
    /// Index pairs of single crossings whose three orders disagree.
    pub order_violations: Vec<(usize, usize)>,
    pub double_crossings: usize,
    pub double_pairs_checked: usize,
    /// Index pairs of double crossings with the failed property.
    pub nesting_violations: Vec<(usize, usize, String)>,
}

impl OrderReport {
    pub fn order_ok(&self, i: usize) -> bool {
        !self.order_violations.iter().any(|&(a, b)| a == i || b == i)
    }

    pub fn nesting_ok(&self, i: usize) -> bool {
        !self.nesting_violations.iter().any(|(a, b, _)| *a == i || *b == i)
    }
}

/// Check order coincidence for single crossings sharing `(p, r)` and a rotation,
/// and the structure of pairs of double crossings sharing an endpoint and `r`.
pub fn verify_order_and_nesting(scene: &Scene, cache: &mut TupleCache, crossings: &[DelaunayCrossing]) -> Result<OrderReport> {
    let mut rep = OrderReport::default();
    let mut groups: BTreeMap<((u32, u32), Rotation), Vec<usize>> = BTreeMap::new();
    for (i, c) in crossings.iter().enumerate() {
        if c.kind == CrossingKind::Single {
            for key in c.rotation_keys() {
                groups.entry(key).or_default().push(i);
            }
        }
    }
    for members in groups.values() {
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                let (a, b) = (&crossings[i], &crossings[j]);
                if a.edge == b.edge {
                    continue;
                }
                rep.single_pairs_checked += 1;
                let hit = cmp(&a.hits[0], &b.hits[0]);
                let start = cmp(&a.t0, &b.t0);
                let end = cmp(&a.t1, &b.t1);
                if hit != start || hit != end {
                    rep.order_violations.push((i, j));
                }
            }
        }
    }

    let doubles: Vec<usize> = (0..crossings.len()).filter(|&i| crossings[i].kind == CrossingKind::Double).collect();
    rep.double_crossings = doubles.len();
    for (x, &i) in doubles.iter().enumerate() {
        for &j in &doubles[x + 1..] {
            let (ci, cj) = (&crossings[i], &crossings[j]);
            if ci.crosser != cj.crosser {
                continue;
            }
            // shared endpoint in the same role: both outgoing or both incoming
            let shared = if ci.edge.0 == cj.edge.0 && ci.edge.1 != cj.edge.1 {
                Some((ci.edge.0, ci.edge.1, cj.edge.1))
            } else if ci.edge.1 == cj.edge.1 && ci.edge.0 != cj.edge.0 {
                Some((ci.edge.1, ci.edge.0, cj.edge.0))
            } else {
                None
            };
            let Some(_) = shared else { continue };
            rep.double_pairs_checked += 1;
            let (first, second) = if cmp(&ci.hits[0], &cj.hits[0]) == Ordering::Less { (i, j) } else { (j, i) };
            if let Some(msg) = check_double_pair(scene, cache, &crossings[first], &crossings[second])? {
                rep.nesting_violations.push((first, second, msg));
            }
        }
    }
    Ok(rep)
}

/// Properties of two double crossings `(pq, r, I)` and `(pa, r, J)` sharing an
/// endpoint, `r` hitting `pq` first. Returns the first failed property.
fn check_double_pair(scene: &Scene, cache: &mut TupleCache, c1: &DelaunayCrossing, c2: &DelaunayCrossing) -> Result<Option<String>> {
    let (e1a, e1b) = (idx(scene, c1.edge.0)?, idx(scene, c1.edge.1)?);
    let (e2a, e2b) = (idx(scene, c2.edge.0)?, idx(scene, c2.edge.1)?);
    let r = idx(scene, c1.crosser)?;
    let p = if e1a == e2a { e1a } else { e1b };
    let q = if e1a == p { e1b } else { e1a };
    let a = if e2a == p { e2b } else { e2a };
    // (i) a on the right of the first edge at both of its hits
    for h in &c1.hits {
        let mut t = h.clone();
        if cache.orientation_sign_at(&mut t, e1a, e1b, a)? >= 0 {
            return Ok(Some("(i) fourth point not in L+ of the first edge".into()));
        }
    }
    // (ii) q on the left of the second edge at both of its hits
    for h in &c2.hits {
        let mut t = h.clone();
        if cache.orientation_sign_at(&mut t, e2a, e2b, q)? <= 0 {
            return Ok(Some("(ii) other endpoint not in L- of the second edge".into()));
        }
    }
    // (iv) strict nesting
    if cmp(&c1.t0, &c2.t0) != Ordering::Less || cmp(&c2.t1, &c1.t1) != Ordering::Less {
        return Ok(Some("(iv) second interval not nested in the first".into()));
    }
    // (iii) red-blue cocircularities of p, q, a, r in I \ J, one on each side of J
    let (t, _) = cache.incircle([p, q, a, r])?;
    let (mut before, mut after) = (0, 0);
    for root in &t.roots {
        if !in_closed(root, &c1.t0, &c1.t1) {
            continue;
        }
        let side = if cmp(root, &c2.t0) == Ordering::Less {
            &mut before
        } else if cmp(root, &c2.t1) == Ordering::Greater {
            &mut after
        } else {
            continue;
        };
        let mut time = root.clone();
        let sr = cache.orientation_sign_at(&mut time, e1a, e1b, r)?;
        let sa = cache.orientation_sign_at(&mut time, e1a, e1b, a)?;
        if sr > 0 && sa < 0 {
            *side += 1;
        }
    }
    if before == 0 || after == 0 {
        return Ok(Some(format!("(iii) red-blue cocircularities before/after the inner interval: {before}/{after}")));
    }
    Ok(None)
}

/// Outcome of the MustCross check on one index-2 Delaunay cocircularity.
#[derive(Clone, Debug, Serialize)]
pub struct MustCrossReport {
    /// Log position of the cocircularity.
    pub event: usize,
    pub edge: (u32, u32),
    /// Violating points at the event: `a` on the left, `b` on the right of `p -> q`.
    pub a: u32,
    pub b: u32,
    /// `a` crosses the segment from left to right.
    pub a_crosses: bool,
    /// `b` crosses the segment from right to left.
    pub b_crosses: bool,
    /// Another cocircularity of the same four points.
    pub recurs: bool,
}

impl MustCrossReport {
    pub fn holds(&self) -> bool {
        self.a_crosses || self.b_crosses || self.recurs
    }
}

/// Check MustCross on every flip of index 2 (second root of its 4-tuple in the
/// horizon) whose removed edge returns later in the log.
pub fn verify_must_cross(scene: &Scene, cache: &mut TupleCache, log: &EventLog) -> Result<Vec<MustCrossReport>> {
    let mut out = Vec::new();
    for gap in absence_intervals(log) {
        let ev = &log.events[gap.events.0];
        if ev.kind != EventKind::Cocircularity {
            continue;
        }
        let index = ev.time.tag.map(|t| t.index + 1);
        if index != Some(2) {
            continue;
        }
        out.push(must_cross_at(scene, cache, log, gap.events.0, gap.events.1)?);
    }
    Ok(out)
}

/// Check MustCross for the flip at log position `i` whose edge returns at position `j`.
pub fn must_cross_at(scene: &Scene, cache: &mut TupleCache, log: &EventLog, i: usize, j: usize) -> Result<MustCrossReport> {
    let ev = &log.events[i];
    let (p_id, q_id) = ev.removed_edge.ok_or_else(|| KdtError::Precondition("event removes no edge".into()))?;
    let (ins0, ins1) = ev.inserted_edge.ok_or_else(|| KdtError::Precondition("event inserts no edge".into()))?;
    let (p, q) = (idx(scene, p_id)?, idx(scene, q_id)?);
    let (x, y) = (idx(scene, ins0)?, idx(scene, ins1)?);
    let mut t0 = ev.time.clone();
    let t1 = log.events[j].time.clone();
    let (a, b) = if cache.orientation_sign_at(&mut t0, p, q, x)? > 0 { (x, y) } else { (y, x) };
    let crosses = |cache: &mut TupleCache, v: usize, from: i8| -> Result<bool> {
        let (t, _) = cache.orientation([p, q, v])?;
        for root in &t.roots {
            if in_left_open(root, &t0, &t1) {
                let mut time = root.clone();
                if middle_of(cache, &mut time, [p, q, v])? == v && sign_before(cache, p, q, v, root)? == from {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    };
    let a_crosses = crosses(cache, a, 1)?;
    let b_crosses = crosses(cache, b, -1)?;
    let (t, _) = cache.incircle([p, q, a, b])?;
    let recurs = t.roots.iter().any(|root| in_left_open(root, &t0, &t1));
    Ok(MustCrossReport { event: i, edge: (p_id, q_id), a: scene.id(a), b: scene.id(b), a_crosses, b_crosses, recurs })
}

/// JSON report of one crossing.
#[derive(Clone, Debug, Serialize)]
pub struct CrossingRecord {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    /// Isolating interval `[lo, hi]` of the start, refined to the working precision.
    pub t0: [String; 2],
    pub t1: [String; 2],
    pub hits: Vec<[String; 2]>,
    pub kind: CrossingKind,
    pub degenerate: bool,
    pub lemma_checks: LemmaChecks,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaChecks {
    pub crossing: bool,
    pub once_collin: bool,
    pub order: bool,
    pub nesting: bool,
}

/// Interval refined to the working precision, as `"num/den"` strings.
fn interval_strings(t: &IsolatedRoot) -> [String; 2] {
    let mut t = t.clone();
    t.refine_to(precision_bits());
    [rational_serde::format(t.lo()), rational_serde::format(t.hi())]
}

/// Records for all crossings of a scene with their checks.
pub fn crossing_records(crossings: &[DelaunayCrossing], lemmas: &[LemmaReport], order: &OrderReport) -> Vec<CrossingRecord> {
    crossings
        .iter()
        .zip(lemmas)
        .enumerate()
        .map(|(i, (c, l))| CrossingRecord {
            p: c.edge.0,
            q: c.edge.1,
            r: c.crosser,
            t0: interval_strings(&c.t0),
            t1: interval_strings(&c.t1),
            hits: c.hits.iter().map(interval_strings).collect(),
            kind: c.kind,
            degenerate: c.degenerate,
            lemma_checks: LemmaChecks {
                crossing: l.crossing,
                once_collin: l.once_collin && l.only_red_blue && l.no_line_crossing && l.sole_crosser,
                order: order.order_ok(i),
                nesting: order.nesting_ok(i),
            },
        })
        .collect()
}

/// Run detection and every check on one scene.
pub fn analyze_scene(scene: &Scene, log: &EventLog, cache: &mut TupleCache) -> Result<CrossingAnalysis> {
    let crossings = detect_crossings(scene, log, cache)?;
    let lemmas = crossings.iter().map(|c| verify_crossing_lemmas(scene, cache, c)).collect::<Result<Vec<_>>>()?;
    let order = verify_order_and_nesting(scene, cache, &crossings)?;
    let must_cross = verify_must_cross(scene, cache, log)?;
    Ok(CrossingAnalysis { crossings, lemmas, order, must_cross })
}

/// Everything the crossing checks produce for one scene.
#[derive(Clone, Debug)]
pub struct CrossingAnalysis {
    pub crossings: Vec<DelaunayCrossing>,
    pub lemmas: Vec<LemmaReport>,
    pub order: OrderReport,
    pub must_cross: Vec<MustCrossReport>,
}

impl CrossingAnalysis {
    pub fn records(&self) -> Vec<CrossingRecord> {
        crossing_records(&self.crossings, &self.lemmas, &self.order)
    }

    pub fn singles(&self) -> usize {
        self.crossings.iter().filter(|c| c.kind == CrossingKind::Single).count()
    }

    pub fn doubles(&self) -> usize {
        self.crossings.iter().filter(|c| c.kind == CrossingKind::Double).count()
    }

    pub fn lemma_failures(&self) -> usize {
        self.lemmas.iter().filter(|l| !l.all_hold()).count()
    }

    pub fn must_cross_failures(&self) -> usize {
        self.must_cross.iter().filter(|m| !m.holds()).count()
    }
}
