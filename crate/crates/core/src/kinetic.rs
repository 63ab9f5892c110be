//! Kinetic Delaunay triangulation driven by exact certificate failures.
//!
//! Every interior edge carries an incircle certificate, every hull vertex an
//! orientation certificate with its hull neighbours, and every hull edge whose
//! triangle is not an ear an orientation certificate with its apex. Failures are
//! processed in exact time order from a priority queue keyed by isolating
//! intervals; ties are broken by refinement, never by tolerance.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{KdtError, Result};
use crate::motion::{rational_serde, Scene, Time};
use crate::predicates::{incircle_static, orient_static, TupleCache, TupleRoots};
use crate::roots::{compare_roots, IsolatedRoot};

/// Kind of a topological event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    Cocircularity,
    Collinearity,
}

/// Change to the convex hull caused by a collinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HullChange {
    VertexEnters,
    VertexLeaves,
}

/// One processed event. Point references are ids.
#[derive(Clone, Debug)]
pub struct KineticEvent {
    pub time: IsolatedRoot,
    pub kind: EventKind,
    /// Four ids for a flip `[p, q, a, b]` (old edge `pq`, new edge `ab`); three ids
    /// `[a, v, b]` for a hull event with `v` the middle point.
    pub participants: Vec<u32>,
    /// Flip quad in circular order `[p, a, q, b]`.
    pub circular_order: Option<[u32; 4]>,
    pub removed_edge: Option<(u32, u32)>,
    pub inserted_edge: Option<(u32, u32)>,
    pub hull_change: Option<HullChange>,
    /// Level 0 at the event time; always true for processed events.
    pub delaunay: bool,
    /// The inserted or removed hull edge is Delaunay only on one side of the event.
    pub half_open: bool,
}

/// JSON-lines record of a kinetic event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    #[serde(with = "rational_serde")]
    pub t_lo: BigRational,
    #[serde(with = "rational_serde")]
    pub t_hi: BigRational,
    pub kind: EventKind,
    pub participants: Vec<u32>,
    pub circular_order: Option<Vec<u32>>,
    pub removed_edge: Option<[u32; 2]>,
    pub inserted_edge: Option<[u32; 2]>,
    pub hull_change: Option<HullChange>,
    pub delaunay: bool,
    pub half_open: bool,
}

impl KineticEvent {
    pub fn record(&self) -> EventRecord {
        EventRecord {
            t_lo: self.time.lo().clone(),
            t_hi: self.time.hi().clone(),
            kind: self.kind,
            participants: self.participants.clone(),
            circular_order: self.circular_order.map(|c| c.to_vec()),
            removed_edge: self.removed_edge.map(|(a, b)| [a, b]),
            inserted_edge: self.inserted_edge.map(|(a, b)| [a, b]),
            hull_change: self.hull_change,
            delaunay: self.delaunay,
            half_open: self.half_open,
        }
    }
}

/// Ordered events of one run.
#[derive(Clone, Debug)]
pub struct EventLog {
    pub t_start: Time,
    pub t_end: Time,
    pub events: Vec<KineticEvent>,
}

impl EventLog {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn cocircularities(&self) -> usize {
        self.events.iter().filter(|e| e.kind == EventKind::Cocircularity).count()
    }

    pub fn collinearities(&self) -> usize {
        self.events.iter().filter(|e| e.kind == EventKind::Collinearity).count()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(&e.record())?);
            out.push('\n');
        }
        Ok(out)
    }

    /// Parse JSON-lines records.
    pub fn records_from_jsonl(s: &str) -> Result<Vec<EventRecord>> {
        s.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(KdtError::from))
            .collect()
    }
}

fn norm(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Combinatorial triangulation: directed edge to apex, plus the hull cycle.
/// Vertices are point indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangulationState {
    n: usize,
    apex: HashMap<(usize, usize), usize>,
    hull_next: Vec<Option<usize>>,
    hull_prev: Vec<Option<usize>>,
}

impl TriangulationState {
    /// Delaunay triangulation of static integer points (at least 3).
    pub fn from_points(pts: &[(BigInt, BigInt)]) -> Result<Self> {
        let n = pts.len();
        if n < 3 {
            return Err(KdtError::Precondition("need at least 3 points".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| pts[a].cmp(&pts[b]));
        if order.windows(2).any(|w| pts[w[0]] == pts[w[1]]) {
            return Err(KdtError::Degenerate("coincident points".into()));
        }
        let mut st = TriangulationState {
            n,
            apex: HashMap::new(),
            hull_next: vec![None; n],
            hull_prev: vec![None; n],
        };
        let (p0, p1, p2) = (order[0], order[1], order[2]);
        let o = orient_static(&pts[p0], &pts[p1], &pts[p2]);
        if o == 0 {
            return Err(KdtError::Degenerate("collinear initial triple".into()));
        }
        let tri = if o > 0 { [p0, p1, p2] } else { [p0, p2, p1] };
        st.add_triangle(tri[0], tri[1], tri[2]);
        for i in 0..3 {
            st.hull_next[tri[i]] = Some(tri[(i + 1) % 3]);
            st.hull_prev[tri[(i + 1) % 3]] = Some(tri[i]);
        }
        for &p in &order[3..] {
            st.sweep_insert(p, pts)?;
        }
        let hull = st.hull();
        let h = hull.len();
        if (0..h).any(|i| orient_static(&pts[hull[i]], &pts[hull[(i + 1) % h]], &pts[hull[(i + 2) % h]]) <= 0) {
            return Err(KdtError::Degenerate("collinear hull triple".into()));
        }
        st.lawson(pts)?;
        if !st.is_delaunay_at(pts) {
            return Err(KdtError::Degenerate("degenerate triangle at the start time".into()));
        }
        Ok(st)
    }

    fn sweep_insert(&mut self, p: usize, pts: &[(BigInt, BigInt)]) -> Result<()> {
        let hull = self.hull();
        let h = hull.len();
        let mut visible = vec![false; h];
        for i in 0..h {
            let (u, v) = (hull[i], hull[(i + 1) % h]);
            visible[i] = orient_static(&pts[u], &pts[v], &pts[p]) < 0;
        }
        let start = (0..h)
            .find(|&i| visible[i] && !visible[(i + h - 1) % h])
            .ok_or_else(|| KdtError::InvariantViolation("no visible hull edge".into()))?;
        let mut i = start;
        let first = hull[start];
        let mut last = first;
        while visible[i] {
            let (u, v) = (hull[i], hull[(i + 1) % h]);
            self.add_triangle(v, u, p);
            if u != first {
                self.hull_next[u] = None;
                self.hull_prev[u] = None;
            }
            last = v;
            i = (i + 1) % h;
        }
        self.hull_next[first] = Some(p);
        self.hull_prev[p] = Some(first);
        self.hull_next[p] = Some(last);
        self.hull_prev[last] = Some(p);
        Ok(())
    }

    fn lawson(&mut self, pts: &[(BigInt, BigInt)]) -> Result<()> {
        let mut stack: Vec<(usize, usize)> = self.edges();
        while let Some((u, v)) = stack.pop() {
            let (Some(&a), Some(&b)) = (self.apex.get(&(u, v)), self.apex.get(&(v, u))) else {
                continue;
            };
            match incircle_static(&pts[u], &pts[v], &pts[a], &pts[b]) {
                0 => return Err(KdtError::Degenerate("four cocircular points".into())),
                s if s > 0 => {
                    self.flip(u, v)?;
                    stack.extend([(u, a), (a, v), (v, b), (b, u)]);
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn add_triangle(&mut self, a: usize, b: usize, c: usize) {
        self.apex.insert((a, b), c);
        self.apex.insert((b, c), a);
        self.apex.insert((c, a), b);
    }

    fn remove_triangle(&mut self, a: usize, b: usize, c: usize) {
        self.apex.remove(&(a, b));
        self.apex.remove(&(b, c));
        self.apex.remove(&(c, a));
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    /// Apex of the triangle left of the directed edge `u -> v`.
    pub fn apex(&self, u: usize, v: usize) -> Option<usize> {
        self.apex.get(&(u, v)).copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.apex.contains_key(&(u, v)) || self.apex.contains_key(&(v, u))
    }

    pub fn on_hull(&self, v: usize) -> bool {
        self.hull_next[v].is_some()
    }

    pub fn hull_next(&self, v: usize) -> Option<usize> {
        self.hull_next[v]
    }

    pub fn hull_prev(&self, v: usize) -> Option<usize> {
        self.hull_prev[v]
    }

    /// Undirected edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<(usize, usize)> = self.apex.keys().map(|&(u, v)| norm(u, v)).collect();
        set.into_iter().collect()
    }

    /// Counter-clockwise triangles, each rotated to start at its smallest vertex, sorted.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out: Vec<[usize; 3]> = self
            .apex
            .iter()
            .filter(|(&(u, v), &w)| u < v && u < w)
            .map(|(&(u, v), &w)| [u, v, w])
            .collect();
        out.sort_unstable();
        out
    }

    /// Hull vertices in counter-clockwise order starting from the smallest index.
    pub fn hull(&self) -> Vec<usize> {
        let Some(start) = (0..self.n).find(|&v| self.hull_next[v].is_some()) else {
            return Vec::new();
        };
        let mut out = vec![start];
        let mut v = self.hull_next[start].unwrap();
        while v != start {
            out.push(v);
            v = self.hull_next[v].unwrap();
        }
        out
    }

    /// Flip the interior edge `u v`: triangles `(u, v, a)` and `(v, u, b)` become
    /// `(a, u, b)` and `(b, v, a)`. Returns `(a, b)`.
    pub fn flip(&mut self, u: usize, v: usize) -> Result<(usize, usize)> {
        let (Some(a), Some(b)) = (self.apex(u, v), self.apex(v, u)) else {
            return Err(KdtError::InvariantViolation(format!("flip of non-interior edge {u}-{v}")));
        };
        if self.has_edge(a, b) {
            return Err(KdtError::InvariantViolation(format!("flip would duplicate edge {a}-{b}")));
        }
        self.remove_triangle(u, v, a);
        self.remove_triangle(v, u, b);
        self.add_triangle(a, u, b);
        self.add_triangle(b, v, a);
        Ok((a, b))
    }

    /// Hull vertex `v` moves inside across the chord of its hull neighbours.
    /// Returns the neighbours `(a, b)`.
    pub fn hull_vertex_leaves(&mut self, v: usize) -> Result<(usize, usize)> {
        let (Some(a), Some(b)) = (self.hull_prev[v], self.hull_next[v]) else {
            return Err(KdtError::InvariantViolation(format!("vertex {v} is not on the hull")));
        };
        if self.has_edge(a, b) {
            return Err(KdtError::InvariantViolation(format!("hull chord {a}-{b} already present")));
        }
        self.add_triangle(a, b, v);
        self.hull_next[a] = Some(b);
        self.hull_prev[b] = Some(a);
        self.hull_next[v] = None;
        self.hull_prev[v] = None;
        Ok((a, b))
    }

    /// Apex `w` of the hull edge `a -> b` moves outside across it.
    pub fn hull_vertex_enters(&mut self, a: usize, b: usize) -> Result<usize> {
        if self.hull_next[a] != Some(b) {
            return Err(KdtError::InvariantViolation(format!("{a} -> {b} is not a hull edge")));
        }
        let w = self
            .apex(a, b)
            .ok_or_else(|| KdtError::InvariantViolation(format!("hull edge {a} -> {b} has no triangle")))?;
        if self.on_hull(w) {
            return Err(KdtError::InvariantViolation(format!("apex {w} already on the hull")));
        }
        self.remove_triangle(a, b, w);
        self.hull_next[a] = Some(w);
        self.hull_prev[w] = Some(a);
        self.hull_next[w] = Some(b);
        self.hull_prev[b] = Some(w);
        Ok(w)
    }

    /// Structural checks: twin consistency, Euler relation, hull cycle.
    pub fn validate(&self) -> Result<()> {
        let hull = self.hull();
        let h = hull.len();
        let tris = self.apex.len() / 3;
        if !self.apex.len().is_multiple_of(3) || tris + h + 2 != 2 * self.n {
            return Err(KdtError::InvariantViolation(format!(
                "Euler relation fails: {tris} triangles, {} vertices, {h} hull",
                self.n
            )));
        }
        for (&(u, v), &w) in &self.apex {
            if self.apex.get(&(v, w)) != Some(&u) || self.apex.get(&(w, u)) != Some(&v) {
                return Err(KdtError::InvariantViolation(format!("broken triangle {u} {v} {w}")));
            }
            if !self.apex.contains_key(&(v, u)) && self.hull_next[u] != Some(v) {
                return Err(KdtError::InvariantViolation(format!("boundary edge {u}-{v} off hull")));
            }
        }
        Ok(())
    }

    /// Local Delaunay and hull convexity at integer positions.
    pub fn is_delaunay_at(&self, pts: &[(BigInt, BigInt)]) -> bool {
        for (&(u, v), &a) in &self.apex {
            if orient_static(&pts[u], &pts[v], &pts[a]) <= 0 {
                return false;
            }
            if let Some(&b) = self.apex.get(&(v, u)) {
                if incircle_static(&pts[u], &pts[v], &pts[a], &pts[b]) >= 0 {
                    return false;
                }
            }
        }
        let hull = self.hull();
        let h = hull.len();
        (0..h).all(|i| orient_static(&pts[hull[i]], &pts[hull[(i + 1) % h]], &pts[hull[(i + 2) % h]]) > 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum CertKey {
    Edge(usize, usize),
    HullVertex(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CertKind {
    /// Interior edge `p q` with left apex `a` and right apex `b`; valid while
    /// `incircle(p, q, a, b) < 0`.
    Flip { p: usize, q: usize, a: usize, b: usize },
    /// Hull edge `a -> b` with apex `w`; valid while `orientation(a, b, w) > 0`.
    HullEdge { a: usize, b: usize, w: usize },
    /// Hull vertex `v` between `a` and `b`; valid while `orientation(a, v, b) > 0`.
    HullVertex { a: usize, v: usize, b: usize },
}

struct CertEntry {
    kind: CertKind,
    next: Option<IsolatedRoot>,
    seq: u64,
}

#[derive(PartialEq, Eq)]
struct QueueItem {
    lo: BigRational,
    seq: u64,
    key: CertKey,
}

impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lo.cmp(&other.lo).then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Kinetic simulator state.
pub struct KineticDt<'s> {
    scene: &'s Scene,
    cache: TupleCache,
    state: TriangulationState,
    now: IsolatedRoot,
    certs: HashMap<CertKey, CertEntry>,
    queue: BinaryHeap<Reverse<QueueItem>>,
    seq: u64,
    log: Vec<KineticEvent>,
}

/// Exact Delaunay triangulation at `t_start` together with its certificates.
pub fn build_initial(scene: &Scene) -> Result<KineticDt<'_>> {
    if scene.len() < 4 {
        return Err(KdtError::Precondition("a kinetic run needs at least 4 points".into()));
    }
    let cache = TupleCache::new(scene);
    let pts = cache.int_scene.positions_at(&scene.horizon.0);
    let state = TriangulationState::from_points(&pts)?;
    let mut kdt = KineticDt {
        scene,
        cache,
        state,
        now: IsolatedRoot::rational(scene.horizon.0.clone()),
        certs: HashMap::new(),
        queue: BinaryHeap::new(),
        seq: 0,
        log: Vec::new(),
    };
    let edges = kdt.state.edges();
    for (u, v) in edges {
        kdt.refresh_edge(u, v)?;
    }
    for v in kdt.state.hull() {
        kdt.refresh_hull_vertex(v)?;
    }
    Ok(kdt)
}

/// Run the simulation over the whole horizon.
pub fn run(scene: &Scene) -> Result<(EventLog, TriangulationState)> {
    let mut kdt = build_initial(scene)?;
    while kdt.step()?.is_some() {}
    Ok(kdt.finish())
}

impl<'s> KineticDt<'s> {
    pub fn state(&self) -> &TriangulationState {
        &self.state
    }

    pub fn now(&self) -> &IsolatedRoot {
        &self.now
    }


    pub fn events(&self) -> &[KineticEvent] {
        &self.log
    }

    /// Finish: separate consecutive event intervals and hand out the log.
    pub fn finish(mut self) -> (EventLog, TriangulationState) {
        for i in 1..self.log.len() {
            let (left, right) = self.log.split_at_mut(i);
            compare_roots(&mut left[i - 1].time, &mut right[0].time);
        }
        let log = EventLog {
            t_start: self.scene.horizon.0.clone(),
            t_end: self.scene.horizon.1.clone(),
            events: self.log,
        };
        (log, self.state)
    }

    fn tuple_roots(&mut self, kind: &CertKind) -> Result<(std::sync::Arc<TupleRoots>, i8)> {
        match *kind {
            CertKind::Flip { p, q, a, b } => self.cache.incircle([p, q, a, b]),
            CertKind::HullEdge { a, b, w } => self.cache.orientation([a, b, w]),
            CertKind::HullVertex { a, v, b } => self.cache.orientation([a, v, b]),
        }
    }

    /// First root of the certificate's polynomial strictly after `now`.
    fn next_failure(&mut self, kind: &CertKind) -> Result<Option<IsolatedRoot>> {
        let (tr, _) = self.tuple_roots(kind)?;
        for root in &tr.roots {
            if let (Some(a), Some(b)) = (root.tag, self.now.tag) {
                if a.poly == b.poly {
                    if a.index > b.index {
                        return Ok(Some(root.clone()));
                    }
                    continue;
                }
            }
            let mut r = root.clone();
            match compare_roots(&mut r, &mut self.now) {
                Ordering::Greater => return Ok(Some(r)),
                Ordering::Equal => {
                    return Err(KdtError::Ordering(format!(
                        "certificate root coincides with event at t = {:.9}",
                        self.now.approx()
                    )))
                }
                Ordering::Less => {}
            }
        }
        Ok(None)
    }

    fn set_cert(&mut self, key: CertKey, kind: Option<CertKind>) -> Result<()> {
        let Some(kind) = kind else {
            self.certs.remove(&key);
            return Ok(());
        };
        if let Some(e) = self.certs.get(&key) {
            if e.kind == kind {
                return Ok(());
            }
        }
        let next = self.next_failure(&kind)?;
        self.seq += 1;
        let seq = self.seq;
        if let Some(r) = &next {
            self.queue.push(Reverse(QueueItem { lo: r.lo().clone(), seq, key }));
        }
        self.certs.insert(key, CertEntry { kind, next, seq });
        Ok(())
    }

    fn refresh_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let (u, v) = norm(u, v);
        let key = CertKey::Edge(u, v);
        let st = &self.state;
        let kind = match (st.apex(u, v), st.apex(v, u)) {
            (Some(a), Some(b)) => Some(CertKind::Flip { p: u, q: v, a, b }),
            (Some(w), None) => hull_edge_cert(st, u, v, w),
            (None, Some(w)) => hull_edge_cert(st, v, u, w),
            (None, None) => None,
        };
        self.set_cert(key, kind)
    }

    fn refresh_hull_vertex(&mut self, v: usize) -> Result<()> {
        let st = &self.state;
        let kind = match (st.hull_prev(v), st.hull_next(v)) {
            (Some(a), Some(b)) if st.hull_next(b) != Some(a) => Some(CertKind::HullVertex { a, v, b }),
            _ => None,
        };
        self.set_cert(CertKey::HullVertex(v), kind)
    }

    /// Pop stale entries and return the key and stored lower bound of the earliest live one.
    fn peek_live(&mut self) -> Option<(CertKey, BigRational)> {
        while let Some(Reverse(top)) = self.queue.peek() {
            let live = self
                .certs
                .get(&top.key)
                .is_some_and(|e| e.seq == top.seq && e.next.is_some());
            if live {
                return Some((top.key, top.lo.clone()));
            }
            self.queue.pop();
        }
        None
    }

    fn requeue(&mut self, key: CertKey) {
        self.seq += 1;
        let seq = self.seq;
        let e = self.certs.get_mut(&key).unwrap();
        e.seq = seq;
        let lo = e.next.as_ref().unwrap().lo().clone();
        self.queue.push(Reverse(QueueItem { lo, seq, key }));
    }

    /// Process the next event, if any.
    pub fn step(&mut self) -> Result<Option<&KineticEvent>> {
        loop {
            let Some((ka, _)) = self.peek_live() else {
                return Ok(None);
            };
            self.queue.pop();
            // Certificates watching the same root of one predicate (a degree-3
            // vertex has three) are set aside while `ka` is compared with the rest.
            let mut held = Vec::new();
            let mut later = None;
            while let Some((kb, lo_b)) = self.peek_live() {
                let ra = self.certs[&ka].next.as_ref().unwrap();
                let rb = self.certs[&kb].next.as_ref().unwrap();
                let clear = ra.hi() < &lo_b || (ra.hi() == &lo_b && !(ra.is_exact() && rb.is_exact() && rb.lo() == &lo_b));
                if clear {
                    break;
                }
                let mut ra = ra.clone();
                let mut rb = rb.clone();
                let ord = compare_roots(&mut ra, &mut rb);
                let same_root = ra.tag.is_some() && ra.tag == rb.tag;
                self.certs.get_mut(&ka).unwrap().next = Some(ra.clone());
                self.certs.get_mut(&kb).unwrap().next = Some(rb.clone());
                match ord {
                    Ordering::Equal if same_root => held.push(self.queue.pop().unwrap()),
                    Ordering::Equal => {
                        return Err(KdtError::Ordering(format!(
                            "simultaneous events near t = {:.9}",
                            ra.approx()
                        )));
                    }
                    _ => {
                        self.queue.pop();
                        later = Some(kb);
                        break;
                    }
                }
            }
            for h in held {
                self.queue.push(h);
            }
            match later {
                None => return self.process(ka).map(Some),
                Some(kb) => {
                    self.requeue(ka);
                    self.requeue(kb);
                }
            }
        }
    }

    fn ids(&self, v: &[usize]) -> Vec<u32> {
        v.iter().map(|&i| self.scene.id(i)).collect()
    }

    fn edge_ids(&self, u: usize, v: usize) -> (u32, u32) {
        let (a, b) = (self.scene.id(u), self.scene.id(v));
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    }

    fn process(&mut self, key: CertKey) -> Result<&KineticEvent> {
        let entry = self.certs.remove(&key).unwrap();
        let time = entry.next.unwrap();
        if time.tangent {
            return Err(KdtError::Tangency(format!("certificate {:?} near t = {:.9}", entry.kind, time.approx())));
        }
        let (_, perm) = self.tuple_roots(&entry.kind)?;
        // Certificates are valid while negative (flip) or positive (hull) before failing.
        let expected_before = match entry.kind {
            CertKind::Flip { .. } => -1,
            _ => 1,
        };
        if perm * time.sign_before != expected_before || perm * time.sign_after != -expected_before {
            return Err(KdtError::InvariantViolation(format!(
                "certificate {:?} was not valid before its failure",
                entry.kind
            )));
        }
        self.now = time.clone();
        let event = match entry.kind {
            CertKind::Flip { p, q, a, b } => {
                let (a2, b2) = self.state.flip(p, q)?;
                debug_assert_eq!((a, b), (a2, b2));
                for (x, y) in [(p, q), (a, b), (p, a), (a, q), (q, b), (b, p)] {
                    self.refresh_edge(x, y)?;
                }
                let ids = self.ids(&[p, q, a, b]);
                KineticEvent {
                    time,
                    kind: EventKind::Cocircularity,
                    participants: ids.clone(),
                    circular_order: Some([ids[0], ids[2], ids[1], ids[3]]),
                    removed_edge: Some(self.edge_ids(p, q)),
                    inserted_edge: Some(self.edge_ids(a, b)),
                    hull_change: None,
                    delaunay: true,
                    half_open: false,
                }
            }
            CertKind::HullVertex { a, v, b } => {
                let (a2, b2) = self.state.hull_vertex_leaves(v)?;
                debug_assert_eq!((a, b), (a2, b2));
                for (x, y) in [(a, v), (v, b), (a, b)] {
                    self.refresh_edge(x, y)?;
                }
                self.refresh_hull_around(&[a, v, b])?;
                KineticEvent {
                    time,
                    kind: EventKind::Collinearity,
                    participants: self.ids(&[a, v, b]),
                    circular_order: None,
                    removed_edge: None,
                    inserted_edge: Some(self.edge_ids(a, b)),
                    hull_change: Some(HullChange::VertexLeaves),
                    delaunay: true,
                    half_open: true,
                }
            }
            CertKind::HullEdge { a, b, w } => {
                let w2 = self.state.hull_vertex_enters(a, b)?;
                debug_assert_eq!(w, w2);
                for (x, y) in [(a, b), (a, w), (w, b)] {
                    self.refresh_edge(x, y)?;
                }
                self.refresh_hull_around(&[a, w, b])?;
                KineticEvent {
                    time,
                    kind: EventKind::Collinearity,
                    participants: self.ids(&[a, w, b]),
                    circular_order: None,
                    removed_edge: Some(self.edge_ids(a, b)),
                    inserted_edge: None,
                    hull_change: Some(HullChange::VertexEnters),
                    delaunay: true,
                    half_open: true,
                }
            }
        };
        self.log.push(event);
        Ok(self.log.last().unwrap())
    }

    /// Refresh hull-vertex certificates and the ear status of nearby hull edges.
    fn refresh_hull_around(&mut self, touched: &[usize]) -> Result<()> {
        let hull = self.state.hull();
        if hull.len() <= 4 {
            for v in 0..self.state.num_vertices() {
                self.refresh_hull_vertex(v)?;
            }
            for i in 0..hull.len() {
                self.refresh_edge(hull[i], hull[(i + 1) % hull.len()])?;
            }
            return Ok(());
        }
        let mut verts: BTreeSet<usize> = touched.iter().copied().collect();
        for &t in touched {
            if let (Some(p), Some(n)) = (self.state.hull_prev(t), self.state.hull_next(t)) {
                verts.insert(p);
                verts.insert(n);
            }
        }
        for &v in &verts {
            self.refresh_hull_vertex(v)?;
            if let Some(n) = self.state.hull_next(v) {
                self.refresh_edge(v, n)?;
            }
            if let Some(p) = self.state.hull_prev(v) {
                self.refresh_edge(p, v)?;
            }
        }
        Ok(())
    }
}

/// Certificate for the hull edge `a -> b` (interior on the left) with apex `w`,
/// unless the triangle is an ear already watched by a hull-vertex certificate.
fn hull_edge_cert(st: &TriangulationState, a: usize, b: usize, w: usize) -> Option<CertKind> {
    if st.hull_next(b) == Some(w) || st.hull_prev(a) == Some(w) {
        None
    } else {
        Some(CertKind::HullEdge { a, b, w })
    }
}

/// Replay an event log on the initial triangulation up to (not including) time `t`.
pub fn state_at(scene: &Scene, log: &EventLog, t: &Time) -> Result<TriangulationState> {
    let is = scene.integer_form();
    let mut st = TriangulationState::from_points(&is.positions_at(&scene.horizon.0))?;
    let idx = |id: u32| {
        scene
            .index_of(id)
            .ok_or_else(|| KdtError::InvalidInput(format!("unknown point id {id}")))
    };
    for e in &log.events {
        let mut time = e.time.clone();
        match time.cmp_rational(t) {
            Ordering::Less => {}
            Ordering::Equal => {
                return Err(KdtError::Precondition("requested time is an event time".into()));
            }
            Ordering::Greater => break,
        }
        match (e.kind, e.hull_change) {
            (EventKind::Cocircularity, _) => {
                st.flip(idx(e.participants[0])?, idx(e.participants[1])?)?;
            }
            (EventKind::Collinearity, Some(HullChange::VertexLeaves)) => {
                st.hull_vertex_leaves(idx(e.participants[1])?)?;
            }
            (EventKind::Collinearity, Some(HullChange::VertexEnters)) => {
                st.hull_vertex_enters(idx(e.participants[0])?, idx(e.participants[2])?)?;
            }
            (EventKind::Collinearity, None) => {
                return Err(KdtError::InvalidInput("collinearity without hull change".into()));
            }
        }
    }
    Ok(st)
}

/// Edge set of a state as id pairs `(min, max)`, sorted.
pub fn edge_ids(scene: &Scene, st: &TriangulationState) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = st
        .edges()
        .into_iter()
        .map(|(u, v)| {
            let (a, b) = (scene.id(u), scene.id(v));
            (a.min(b), a.max(b))
        })
        .collect();
    out.sort_unstable();
    out
}

/// Whether `state`'s edges match the oracle triangulation at rational time `t`.
pub fn snapshot_equals(state: &TriangulationState, t: &Time, scene: &Scene) -> Result<bool> {
    let oracle = crate::oracle::static_delaunay(scene, t)?;
    Ok(edge_ids(scene, state) == oracle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<(BigInt, BigInt)> {
        v.iter().map(|&(x, y)| (x.into(), y.into())).collect()
    }

    #[test]
    fn three_points_make_one_triangle() {
        let st = TriangulationState::from_points(&pts(&[(0, 0), (4, 1), (1, 3)])).unwrap();
        assert_eq!(st.triangles(), vec![[0, 1, 2]]);
        assert_eq!(st.hull().len(), 3);
        st.validate().unwrap();
    }

    #[test]
    fn quadrilateral_uses_delaunay_diagonal() {
        // long thin kite: the short diagonal 1-3 is Delaunay
        let p = pts(&[(0, 0), (5, -1), (10, 0), (5, 1)]);
        let st = TriangulationState::from_points(&p).unwrap();
        assert_eq!(st.edges(), vec![(0, 1), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(st.is_delaunay_at(&p));
    }

    #[test]
    fn cocircular_square_is_rejected() {
        let p = pts(&[(0, 0), (1, 0), (1, 1), (0, 1)]);
        assert!(matches!(TriangulationState::from_points(&p), Err(KdtError::Degenerate(_))));
    }

    #[test]
    fn flip_then_flip_back_restores_state() {
        let p = pts(&[(0, 0), (5, -1), (10, 0), (5, 1)]);
        let st = TriangulationState::from_points(&p).unwrap();
        let mut s2 = st.clone();
        let (a, b) = s2.flip(1, 3).unwrap();
        s2.validate().unwrap();
        assert!(!s2.is_delaunay_at(&p));
        s2.flip(a, b).unwrap();
        assert_eq!(s2.edges(), st.edges());
    }

    #[test]
    fn hull_leave_and_enter_are_inverse() {
        let p = pts(&[(0, 0), (10, 0), (12, 6), (5, 9), (-2, 5), (5, 4)]);
        let st = TriangulationState::from_points(&p).unwrap();
        st.validate().unwrap();
        let mut s2 = st.clone();
        let v = s2.hull()[1];
        let (a, b) = s2.hull_vertex_leaves(v).unwrap();
        s2.validate().unwrap();
        assert!(!s2.on_hull(v));
        let w = s2.hull_vertex_enters(a, b).unwrap();
        assert_eq!(w, v);
        s2.validate().unwrap();
        assert_eq!(s2, st);
    }
}
