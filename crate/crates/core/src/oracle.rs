//! Brute-force ground truth.
//!
//! `static_delaunay` applies the empty-circumcircle definition to every triangle,
//! `enumerate_events` lists every cocircularity and collinearity in the horizon
//! with its exact level, and `delaunayhood_interval_check` decides whether an edge
//! survives a whole time interval once some points are removed.

use std::cell::RefCell;
use std::cmp::Ordering;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{KdtError, Result};
use crate::kinetic::{EventKind, EventLog};
use crate::motion::{rational_serde, Scene, Time};
use crate::pairwise::{edge_is_delaunay, gap_witnesses, pair_events, rational_between};
use crate::poly::IntPoly;
use crate::predicates::{incircle_static, orient_static, TupleCache};
use crate::roots::{compare_roots, sign_at, IsolatedRoot};

/// Largest scene size for which exhaustive oracle checks run by default.
pub const DEFAULT_ORACLE_CAP: usize = 16;

/// One event of the exhaustive census.
#[derive(Clone, Debug)]
pub struct CensusEvent {
    pub time: IsolatedRoot,
    pub kind: EventKind,
    /// Cocircularity: the four ids in increasing order. Collinearity: the two
    /// outer ids in increasing order followed by the middle one.
    pub participants: Vec<u32>,
    /// Points strictly inside the circumdisc, or the smaller side count of the line.
    pub level: usize,
    /// Collinearity: the last participant lies on the open segment of the first two.
    pub on_segment: bool,
}

impl CensusEvent {
    /// Middle point of a collinearity.
    pub fn middle(&self) -> Option<u32> {
        match self.kind {
            EventKind::Collinearity => Some(self.participants[2]),
            EventKind::Cocircularity => None,
        }
    }

    pub fn involves(&self, id: u32) -> bool {
        self.participants.contains(&id)
    }

    /// Participants as a sorted id tuple (identifies the predicate polynomial).
    pub fn sorted_tuple(&self) -> Vec<u32> {
        let mut v = self.participants.clone();
        v.sort_unstable();
        v
    }

    pub fn record(&self) -> CensusRecord {
        CensusRecord {
            t_lo: rational_serde::format(self.time.lo()),
            t_hi: rational_serde::format(self.time.hi()),
            kind: self.kind,
            participants: self.participants.clone(),
            level: self.level,
            on_segment: self.on_segment,
        }
    }
}

/// JSON-lines record of a census event.
#[derive(Clone, Debug, Serialize)]
pub struct CensusRecord {
    pub t_lo: String,
    pub t_hi: String,
    pub kind: EventKind,
    pub participants: Vec<u32>,
    pub level: usize,
    pub on_segment: bool,
}

/// Census as JSON-lines.
pub fn census_to_jsonl(census: &[CensusEvent]) -> Result<String> {
    let mut out = String::new();
    for e in census {
        out.push_str(&serde_json::to_string(&e.record())?);
        out.push('\n');
    }
    Ok(out)
}

/// Delaunay edges at rational time `t` by the definition: `pq` is an edge iff it
/// belongs to a triangle whose circumdisc holds no other point.
pub fn static_delaunay(scene: &Scene, t: &Time) -> Result<Vec<(u32, u32)>> {
    let pts = scene.integer_form().positions_at(t);
    let tris = static_delaunay_triangles(&pts)?;
    let mut edges = std::collections::BTreeSet::new();
    for [a, b, c] in tris {
        for (u, v) in [(a, b), (b, c), (c, a)] {
            let (x, y) = (scene.id(u), scene.id(v));
            edges.insert((x.min(y), x.max(y)));
        }
    }
    Ok(edges.into_iter().collect())
}

/// Empty-circumdisc triangles of integer points, as counter-clockwise index triples.
pub fn static_delaunay_triangles(pts: &[(BigInt, BigInt)]) -> Result<Vec<[usize; 3]>> {
    let n = pts.len();
    if n < 3 {
        return Err(KdtError::Precondition("need at least 3 points".into()));
    }
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let o = orient_static(&pts[a], &pts[b], &pts[c]);
                if o == 0 {
                    continue;
                }
                let (b2, c2) = if o > 0 { (b, c) } else { (c, b) };
                let mut empty = true;
                let mut on_circle = false;
                for s in 0..n {
                    if s == a || s == b || s == c {
                        continue;
                    }
                    match incircle_static(&pts[a], &pts[b2], &pts[c2], &pts[s]) {
                        1 => {
                            empty = false;
                            break;
                        }
                        0 => on_circle = true,
                        _ => {}
                    }
                }
                if empty && on_circle {
                    return Err(KdtError::Degenerate("four cocircular points with an empty circumdisc".into()));
                }
                if empty {
                    out.push([a, b2, c2]);
                }
            }
        }
    }
    if out.is_empty() {
        return Err(KdtError::Degenerate("all points collinear".into()));
    }
    Ok(out)
}

fn dot_int(cache: &TupleCache, m: usize, x: usize, y: usize) -> IntPoly {
    let s = &cache.int_scene;
    let ax = &s.x[x] - &s.x[m];
    let ay = &s.y[x] - &s.y[m];
    let bx = &s.x[y] - &s.x[m];
    let by = &s.y[y] - &s.y[m];
    &(&ax * &bx) + &(&ay * &by)
}

/// Index of the point strictly between the other two at a collinearity time.
pub(crate) fn middle_of(cache: &TupleCache, time: &mut IsolatedRoot, t: [usize; 3]) -> Result<usize> {
    for k in 0..3 {
        let (m, x, y) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
        if sign_at(time, &dot_int(cache, m, x, y)) < 0 {
            return Ok(m);
        }
    }
    Err(KdtError::Degenerate(format!("coincident points in collinear triple {t:?}")))
}

/// Level of a cocircularity of the sorted tuple `t` at `time`.
pub(crate) fn cocircularity_level(cache: &mut TupleCache, time: &mut IsolatedRoot, t: [usize; 4]) -> Result<usize> {
    Ok(interior_points(cache, time, t)?.len())
}

/// Points strictly inside the circumdisc of a cocircular tuple `t` at `time`.
pub fn interior_points(cache: &mut TupleCache, time: &mut IsolatedRoot, t: [usize; 4]) -> Result<Vec<usize>> {
    let [a, b, c, _] = t;
    let o = cache.orientation_sign_at(time, a, b, c)?;
    if o == 0 {
        return Err(KdtError::Degenerate(format!("collinear and cocircular tuple {t:?}")));
    }
    let mut inside = Vec::new();
    for s in 0..cache.len() {
        if t.contains(&s) {
            continue;
        }
        let ic = cache.incircle_sign_at(time, a, b, c, s)?;
        if ic == 0 {
            return Err(KdtError::Degenerate(format!("five cocircular points including {t:?}")));
        }
        if ic * o > 0 {
            inside.push(s);
        }
    }
    Ok(inside)
}

/// Side counts `(left, right)` of the line through `a, b` at `time`, excluding `skip`.
pub(crate) fn side_counts(
    cache: &mut TupleCache,
    time: &mut IsolatedRoot,
    a: usize,
    b: usize,
    skip: &[usize],
) -> Result<(usize, usize)> {
    let (mut left, mut right) = (0, 0);
    for s in 0..cache.len() {
        if s == a || s == b || skip.contains(&s) {
            continue;
        }
        match cache.orientation_sign_at(time, a, b, s)? {
            1 => left += 1,
            -1 => right += 1,
            _ => return Err(KdtError::Degenerate("four collinear points".into())),
        }
    }
    Ok((left, right))
}

/// Every cocircularity and collinearity in the open horizon with exact levels, by time.
pub fn enumerate_events(scene: &Scene) -> Result<Vec<CensusEvent>> {
    let mut cache = TupleCache::new(scene);
    enumerate_events_cached(scene, &mut cache)
}

pub fn enumerate_events_cached(scene: &Scene, cache: &mut TupleCache) -> Result<Vec<CensusEvent>> {
    let n = scene.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let (tr, _) = cache.orientation([a, b, c])?;
                for root in &tr.roots {
                    let mut time = root.clone();
                    let m = middle_of(cache, &mut time, [a, b, c])?;
                    let ends: Vec<usize> = [a, b, c].into_iter().filter(|&x| x != m).collect();
                    let (l, r) = side_counts(cache, &mut time, ends[0], ends[1], &[m])?;
                    let mut ids = vec![scene.id(ends[0]), scene.id(ends[1])];
                    ids.sort_unstable();
                    ids.push(scene.id(m));
                    out.push(CensusEvent {
                        time,
                        kind: EventKind::Collinearity,
                        participants: ids,
                        level: l.min(r),
                        on_segment: true,
                    });
                }
                for d in c + 1..n {
                    let (tr, _) = cache.incircle([a, b, c, d])?;
                    for root in &tr.roots {
                        let mut time = root.clone();
                        let level = cocircularity_level(cache, &mut time, [a, b, c, d])?;
                        let mut ids: Vec<u32> = [a, b, c, d].iter().map(|&i| scene.id(i)).collect();
                        ids.sort_unstable();
                        out.push(CensusEvent {
                            time,
                            kind: EventKind::Cocircularity,
                            participants: ids,
                            level,
                            on_segment: false,
                        });
                    }
                }
            }
        }
    }
    Ok(sort_census(out))
}

fn sort_census(events: Vec<CensusEvent>) -> Vec<CensusEvent> {
    let cells: Vec<RefCell<IsolatedRoot>> = events.iter().map(|e| RefCell::new(e.time.clone())).collect();
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by(|&i, &j| {
        if i == j {
            return Ordering::Equal;
        }
        compare_roots(&mut cells[i].borrow_mut(), &mut cells[j].borrow_mut())
    });
    let mut slots: Vec<Option<CensusEvent>> = events.into_iter().map(Some).collect();
    order
        .into_iter()
        .map(|i| {
            let mut e = slots[i].take().unwrap();
            e.time = cells[i].borrow().clone();
            e
        })
        .collect()
}

/// Whether `pq` is an edge of the Delaunay triangulation of `scene` minus `removed`
/// throughout the open interval `(lo, hi)`.
///
/// The check samples one rational time in every gap between consecutive events
/// of tuples containing `p` and `q` (the only events that can change the answer)
/// and applies the envelope criterion there; it also rejects any point of the
/// reduced set passing through the open segment inside the interval.
pub fn delaunayhood_interval_check(
    scene: &Scene,
    pair: (u32, u32),
    lo: &IsolatedRoot,
    hi: &IsolatedRoot,
    removed: &[u32],
) -> Result<bool> {
    let mut cache = TupleCache::new(scene);
    let p = scene.index_of(pair.0).ok_or_else(|| KdtError::InvalidInput("unknown id".into()))?;
    let q = scene.index_of(pair.1).ok_or_else(|| KdtError::InvalidInput("unknown id".into()))?;
    let mut excluded = vec![false; scene.len()];
    for id in removed {
        let i = scene.index_of(*id).ok_or_else(|| KdtError::InvalidInput("unknown id".into()))?;
        excluded[i] = true;
    }
    interval_check_cached(&mut cache, p, q, lo, hi, &excluded)
}

/// Index-based interval check sharing a tuple cache.
pub fn interval_check_cached(
    cache: &mut TupleCache,
    p: usize,
    q: usize,
    lo: &IsolatedRoot,
    hi: &IsolatedRoot,
    excluded: &[bool],
) -> Result<bool> {
    let mut lo_c = lo.clone();
    let mut hi_c = hi.clone();
    if compare_roots(&mut lo_c, &mut hi_c) != Ordering::Less {
        return Err(KdtError::Precondition("empty interval".into()));
    }
    let mut events = pair_events(cache, p, q, lo, hi, excluded)?;
    for e in events.iter_mut() {
        if e.kind == EventKind::Collinearity {
            let x = e.others[0];
            if middle_of(cache, &mut e.time, [p, q, x])? == x {
                return Ok(false);
            }
        }
    }
    let witnesses = gap_witnesses(&mut events, lo, hi);
    for t in witnesses {
        let pts = cache.int_scene.positions_at(&t);
        if !edge_is_delaunay(&pts, p, q, excluded) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Census events the kinetic log must contain: level-0 cocircularities and
/// level-0 collinearities (a point passing through a hull edge).
pub fn delaunay_subset(census: &[CensusEvent]) -> Vec<&CensusEvent> {
    census.iter().filter(|e| e.level == 0).collect()
}

/// Outcome of matching a kinetic log against the census.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LogComparison {
    pub log_events: usize,
    pub census_events: usize,
    pub matched: usize,
    /// First position where the two sequences disagree.
    pub first_mismatch: Option<usize>,
}

impl LogComparison {
    pub fn equal(&self) -> bool {
        self.first_mismatch.is_none() && self.log_events == self.census_events
    }
}

/// Match the log against the level-0 census position by position: same
/// participant set (and middle point for collinearities) and the same root.
pub fn compare_log_with_census(log: &EventLog, census: &[CensusEvent]) -> LogComparison {
    let expected = delaunay_subset(census);
    let mut out = LogComparison { log_events: log.len(), census_events: expected.len(), ..Default::default() };
    for (i, (e, c)) in log.events.iter().zip(&expected).enumerate() {
        let mut ids = e.participants.clone();
        ids.sort_unstable();
        let same_middle = match e.kind {
            EventKind::Collinearity => c.middle() == Some(e.participants[1]),
            EventKind::Cocircularity => true,
        };
        let (mut a, mut b) = (e.time.clone(), c.time.clone());
        if e.kind != c.kind || ids != c.sorted_tuple() || !same_middle || compare_roots(&mut a, &mut b) != Ordering::Equal {
            out.first_mismatch = Some(i);
            return out;
        }
        out.matched += 1;
    }
    if out.log_events != out.census_events {
        out.first_mismatch = Some(out.matched);
    }
    out
}

/// Outcome of comparing replayed states with the static oracle.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SnapshotReport {
    pub checked: usize,
    /// Sample times whose edge sets differ.
    #[serde(serialize_with = "serialize_times")]
    pub mismatches: Vec<Time>,
}

fn serialize_times<S: serde::Serializer>(v: &[Time], s: S) -> std::result::Result<S::Ok, S::Error> {
    let strs: Vec<String> = v.iter().map(rational_serde::format).collect();
    strs.serialize(s)
}

impl SnapshotReport {
    pub fn all_equal(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Replay the log at up to `samples` gaps between consecutive events (the
/// horizon ends count as gap bounds) and compare with `static_delaunay`.
pub fn verify_snapshots(scene: &Scene, log: &EventLog, samples: usize) -> Result<SnapshotReport> {
    let mut bounds = Vec::with_capacity(log.len() + 2);
    bounds.push(IsolatedRoot::rational(scene.horizon.0.clone()));
    bounds.extend(log.events.iter().map(|e| e.time.clone()));
    bounds.push(IsolatedRoot::rational(scene.horizon.1.clone()));
    let gaps = bounds.len() - 1;
    let picks: Vec<usize> = if gaps <= samples {
        (0..gaps).collect()
    } else {
        let mut v: Vec<usize> = (0..samples).map(|i| i * gaps / samples).collect();
        v.dedup();
        v
    };
    let mut rep = SnapshotReport::default();
    for g in picks {
        let (l, r) = bounds.split_at_mut(g + 1);
        let t = rational_between(&mut l[g], &mut r[0]);
        let st = crate::kinetic::state_at(scene, log, &t)?;
        rep.checked += 1;
        if !crate::kinetic::snapshot_equals(&st, &t, scene)? {
            rep.mismatches.push(t);
        }
    }
    Ok(rep)
}
