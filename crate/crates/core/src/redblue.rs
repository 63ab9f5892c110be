//! Red and blue functions of a pair and the trichotomy of their arrangement.
//!
//! For a directed pair `pq` every other point `r` defines a function of time: the
//! offset of the center of the circle through `p, q, r` from `L_pq`, in units of
//! `|pq|`, positive on the red (right) side. It is the red function of `r` while
//! `r` is red and its blue function while `r` is blue. The red level of a point
//! `(t, rho)` counts red functions below it, the blue level counts blue functions
//! above it, and `pq` is Delaunay exactly when the upper envelope of the blue
//! functions stays below the lower envelope of the red ones.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::analysis::ColorLabel;
use crate::error::{KdtError, Result};
use crate::kinetic::EventKind;
use crate::motion::{rational_serde, IntScene, Scene, Time};
use crate::oracle::{cocircularity_level, interval_check_cached, side_counts};
use crate::pairwise::{edge_is_delaunay, function_value, gap_witnesses, pair_events, PairEvent, Side};
use crate::predicates::TupleCache;
use crate::roots::IsolatedRoot;

/// Default constant of the many-cocircularities condition.
pub const DEFAULT_C_II: f64 = 1.0 / 144.0;

/// Smallest admissible `k`.
pub const DEFAULT_K: usize = 13;

/// The function of `owner` with respect to a directed pair.
#[derive(Clone, Debug)]
pub struct RedBlueFunction {
    pub owner: u32,
    index: usize,
    /// Times at which `owner` is collinear with the pair.
    pub breakpoints: Vec<IsolatedRoot>,
}

impl RedBlueFunction {
    /// Color and value at integer positions; `None` on the line.
    pub fn value_at(&self, pts: &[(BigInt, BigInt)], p: usize, q: usize) -> Option<(Side, BigRational)> {
        function_value(pts, p, q, self.index)
    }
}

/// A cocircularity of the pair with two other points.
#[derive(Clone, Debug)]
pub struct SliceVertex {
    pub time: IsolatedRoot,
    pub others: [u32; 2],
    pub color: ColorLabel,
    pub level: usize,
    /// Red points inside the common circle.
    pub red_level: usize,
    /// Blue points inside the common circle.
    pub blue_level: usize,
}

/// A collinearity of the pair with a third point.
#[derive(Clone, Debug)]
pub struct SliceCollinearity {
    pub time: IsolatedRoot,
    pub point: u32,
    /// Smaller number of points strictly on one side of the line.
    pub level: usize,
    /// The third point lies on the open segment `pq`.
    pub on_segment: bool,
}

/// Envelope values at one rational time.
#[derive(Clone, Debug)]
pub struct EnvelopeSample {
    pub time: Time,
    /// Lower envelope of the red functions.
    pub e_plus: Option<BigRational>,
    /// Upper envelope of the blue functions.
    pub e_minus: Option<BigRational>,
    /// Envelope criterion, including the open-segment test.
    pub delaunay: bool,
}

/// The arrangement of one pair over an open time interval.
#[derive(Clone, Debug)]
pub struct ArrangementSlice {
    pub pair: (u32, u32),
    pub interval: (Time, Time),
    pub functions: Vec<RedBlueFunction>,
    pub vertices: Vec<SliceVertex>,
    pub collinearities: Vec<SliceCollinearity>,
    pub envelope_samples: Vec<EnvelopeSample>,
    p: usize,
    q: usize,
    int_scene: IntScene,
}

fn idx(scene: &Scene, id: u32) -> Result<usize> {
    scene.index_of(id).ok_or_else(|| KdtError::InvalidInput(format!("unknown point id {id}")))
}

fn check_interval(scene: &Scene, lo: &Time, hi: &Time) -> Result<()> {
    if lo >= hi || lo < &scene.horizon.0 || hi > &scene.horizon.1 {
        return Err(KdtError::Precondition("interval must be nonempty and inside the horizon".into()));
    }
    Ok(())
}

/// Envelope values at integer positions.
pub fn envelopes(pts: &[(BigInt, BigInt)], p: usize, q: usize) -> (Option<BigRational>, Option<BigRational>) {
    let mut e_plus: Option<BigRational> = None;
    let mut e_minus: Option<BigRational> = None;
    for x in 0..pts.len() {
        if x == p || x == q {
            continue;
        }
        match function_value(pts, p, q, x) {
            Some((Side::Red, v)) if e_plus.as_ref().is_none_or(|m| &v < m) => e_plus = Some(v),
            Some((Side::Blue, v)) if e_minus.as_ref().is_none_or(|m| &v > m) => e_minus = Some(v),
            _ => {}
        }
    }
    (e_plus, e_minus)
}

/// Red and blue counts inside the circle of a pair cocircularity.
fn vertex_levels(cache: &mut TupleCache, e: &mut PairEvent, p: usize, q: usize) -> Result<(ColorLabel, usize, usize)> {
    let [a, b] = [e.others[0], e.others[1]];
    let sa = cache.orientation_sign_at(&mut e.time, p, q, a)?;
    let sb = cache.orientation_sign_at(&mut e.time, p, q, b)?;
    if sa == 0 || sb == 0 {
        return Err(KdtError::Degenerate("collinear point at a cocircularity".into()));
    }
    let color = match (sa < 0, sb < 0) {
        (true, true) => ColorLabel::RedRed,
        (false, false) => ColorLabel::BlueBlue,
        _ => ColorLabel::RedBlue,
    };
    let (mut red, mut blue) = (0, 0);
    for s in 0..cache.len() {
        if s == p || s == q || s == a || s == b {
            continue;
        }
        let inside = cache.incircle_sign_at(&mut e.time, p, q, a, s)? * sa > 0;
        if inside {
            match cache.orientation_sign_at(&mut e.time, p, q, s)? {
                -1 => red += 1,
                1 => blue += 1,
                _ => return Err(KdtError::Degenerate("point on the line at a cocircularity".into())),
            }
        }
    }
    Ok((color, red, blue))
}

/// Build the arrangement of `pair` over `(lo, hi)`, sampling the envelopes at one
/// witness per gap between consecutive pair events and at `extra_times`.
pub fn build_slice(scene: &Scene, pair: (u32, u32), lo: &Time, hi: &Time, extra_times: &[Time]) -> Result<ArrangementSlice> {
    let mut cache = TupleCache::new(scene);
    build_slice_cached(scene, &mut cache, pair, lo, hi, extra_times)
}

pub fn build_slice_cached(
    scene: &Scene,
    cache: &mut TupleCache,
    pair: (u32, u32),
    lo: &Time,
    hi: &Time,
    extra_times: &[Time],
) -> Result<ArrangementSlice> {
    check_interval(scene, lo, hi)?;
    let (p, q) = (idx(scene, pair.0)?, idx(scene, pair.1)?);
    if p == q {
        return Err(KdtError::InvalidInput("pair of identical points".into()));
    }
    let lo_r = IsolatedRoot::rational(lo.clone());
    let hi_r = IsolatedRoot::rational(hi.clone());
    let none = vec![false; scene.len()];
    let mut events = pair_events(cache, p, q, &lo_r, &hi_r, &none)?;
    let witnesses = gap_witnesses(&mut events, &lo_r, &hi_r);

    let mut functions: Vec<RedBlueFunction> = (0..scene.len())
        .filter(|&x| x != p && x != q)
        .map(|x| RedBlueFunction { owner: scene.id(x), index: x, breakpoints: Vec::new() })
        .collect();
    let mut vertices = Vec::new();
    let mut collinearities = Vec::new();
    for e in events.iter_mut() {
        match e.kind {
            EventKind::Cocircularity => {
                let (color, red_level, blue_level) = vertex_levels(cache, e, p, q)?;
                let (a, b) = (e.others[0], e.others[1]);
                let mut t = [a, b, p, q];
                t.sort_unstable();
                let level = cocircularity_level(cache, &mut e.time, t)?;
                debug_assert_eq!(level, red_level + blue_level);
                vertices.push(SliceVertex {
                    time: e.time.clone(),
                    others: [scene.id(a), scene.id(b)],
                    color,
                    level,
                    red_level,
                    blue_level,
                });
            }
            EventKind::Collinearity => {
                let x = e.others[0];
                let (l, r) = side_counts(cache, &mut e.time, p, q, &[x])?;
                let m = crate::oracle::middle_of(cache, &mut e.time, [p, q, x])?;
                if let Some(f) = functions.iter_mut().find(|f| f.index == x) {
                    f.breakpoints.push(e.time.clone());
                }
                collinearities.push(SliceCollinearity {
                    time: e.time.clone(),
                    point: scene.id(x),
                    level: l.min(r),
                    on_segment: m == x,
                });
            }
        }
    }

    let int_scene = cache.int_scene.clone();
    let mut envelope_samples = Vec::new();
    for t in witnesses.iter().chain(extra_times.iter()) {
        if t <= lo || t >= hi {
            continue;
        }
        let pts = int_scene.positions_at(t);
        let (e_plus, e_minus) = envelopes(&pts, p, q);
        envelope_samples.push(EnvelopeSample {
            time: t.clone(),
            e_plus,
            e_minus,
            delaunay: edge_is_delaunay(&pts, p, q, &none),
        });
    }
    Ok(ArrangementSlice {
        pair,
        interval: (lo.clone(), hi.clone()),
        functions,
        vertices,
        collinearities,
        envelope_samples,
        p,
        q,
        int_scene,
    })
}

impl ArrangementSlice {
    /// `(red_level, blue_level)` of the point `(t, rho)` of the parametric plane.
    pub fn levels_at(&self, t: &Time, rho: &BigRational) -> Result<(usize, usize)> {
        let pts = self.int_scene.positions_at(t);
        levels_at_positions(&pts, self.p, self.q, rho)
    }

    /// Envelope values and criterion at a rational time.
    pub fn envelope_at(&self, t: &Time) -> EnvelopeSample {
        let pts = self.int_scene.positions_at(t);
        let (e_plus, e_minus) = envelopes(&pts, self.p, self.q);
        EnvelopeSample {
            time: t.clone(),
            e_plus,
            e_minus,
            delaunay: edge_is_delaunay(&pts, self.p, self.q, &vec![false; pts.len()]),
        }
    }

    /// JSON dump of the slice.
    pub fn to_json(&self) -> serde_json::Value {
        let f = rational_serde::format;
        let opt = |v: &Option<BigRational>| v.as_ref().map(f);
        serde_json::json!({
            "pair": [self.pair.0, self.pair.1],
            "interval": [f(&self.interval.0), f(&self.interval.1)],
            "vertices": self.vertices.iter().map(|v| serde_json::json!({
                "t_lo": f(v.time.lo()),
                "t_hi": f(v.time.hi()),
                "others": v.others,
                "color": v.color,
                "level": v.level,
                "red_level": v.red_level,
                "blue_level": v.blue_level,
            })).collect::<Vec<_>>(),
            "collinearities": self.collinearities.iter().map(|c| serde_json::json!({
                "t_lo": f(c.time.lo()),
                "t_hi": f(c.time.hi()),
                "point": c.point,
                "level": c.level,
                "on_segment": c.on_segment,
            })).collect::<Vec<_>>(),
            "envelope_samples": self.envelope_samples.iter().map(|s| serde_json::json!({
                "t": f(&s.time),
                "e_plus": opt(&s.e_plus),
                "e_minus": opt(&s.e_minus),
                "delaunay": s.delaunay,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Red and blue levels of `rho` among the functions at integer positions.
/// Errors if some point is on the line.
pub fn levels_at_positions(pts: &[(BigInt, BigInt)], p: usize, q: usize, rho: &BigRational) -> Result<(usize, usize)> {
    let (mut red, mut blue) = (0, 0);
    for x in 0..pts.len() {
        if x == p || x == q {
            continue;
        }
        match function_value(pts, p, q, x) {
            Some((Side::Red, v)) if &v < rho => red += 1,
            Some((Side::Blue, v)) if &v > rho => blue += 1,
            Some(_) => {}
            None => return Err(KdtError::Precondition("a point is collinear with the pair".into())),
        }
    }
    Ok((red, blue))
}

/// Level of each function within its own color at integer positions: for a red
/// function the red functions strictly below it, for a blue one the blue functions
/// strictly above it. `None` for points on the line and for `p, q`.
pub fn own_color_levels(pts: &[(BigInt, BigInt)], p: usize, q: usize) -> Vec<Option<usize>> {
    let vals: Vec<Option<(Side, BigRational)>> =
        (0..pts.len()).map(|x| if x == p || x == q { None } else { function_value(pts, p, q, x) }).collect();
    let mut reds: Vec<&BigRational> = vals.iter().flatten().filter(|(s, _)| *s == Side::Red).map(|(_, v)| v).collect();
    let mut blues: Vec<&BigRational> = vals.iter().flatten().filter(|(s, _)| *s == Side::Blue).map(|(_, v)| v).collect();
    reds.sort();
    blues.sort();
    vals.iter()
        .map(|v| {
            v.as_ref().map(|(s, val)| match s {
                Side::Red => reds.partition_point(|r| *r < val),
                Side::Blue => blues.len() - blues.partition_point(|b| *b <= val),
            })
        })
        .collect()
}

/// Certified outcome of the trichotomy check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TrichotomyOutcome {
    /// A k-shallow collinearity of the pair with the given point.
    ShallowCollinearity(u32),
    /// At least the threshold number of k-shallow cocircularities involving the pair.
    ManyShallowCocircularities(usize),
    /// Removing these ids keeps the pair Delaunay throughout the interval.
    RemovalSet(Vec<u32>),
    /// No outcome could be certified.
    VerificationFailure,
}

/// Outcome plus the raw counts it was derived from.
#[derive(Clone, Debug, Serialize)]
pub struct TrichotomyReport {
    pub pair: (u32, u32),
    #[serde(with = "rational_serde::pair")]
    pub interval: (Time, Time),
    pub k: usize,
    pub c_ii: f64,
    pub outcome: TrichotomyOutcome,
    pub shallow_collinearities: usize,
    pub shallow_cocircularities: usize,
    /// `c_ii * k^2`.
    pub threshold: f64,
    /// Which removal construction was tried last: "empty", "side" or "levels".
    pub removal_candidate: Option<String>,
    pub removal_size: Option<usize>,
    pub removal_check: Option<bool>,
}

/// Certify one of the three outcomes for `pair` over `(t0, t1)`: a k-shallow
/// collinearity, many k-shallow cocircularities, or a removal set of fewer than
/// `3k` points.
pub fn check_trichotomy(scene: &Scene, pair: (u32, u32), t0: &Time, t1: &Time, k: usize, c_ii: f64) -> Result<TrichotomyReport> {
    let mut cache = TupleCache::new(scene);
    check_trichotomy_cached(scene, &mut cache, pair, t0, t1, k, c_ii)
}

#[allow(clippy::too_many_arguments)]
pub fn check_trichotomy_cached(
    scene: &Scene,
    cache: &mut TupleCache,
    pair: (u32, u32),
    t0: &Time,
    t1: &Time,
    k: usize,
    c_ii: f64,
) -> Result<TrichotomyReport> {
    check_interval(scene, t0, t1)?;
    if k <= 12 {
        return Err(KdtError::Precondition("k must exceed 12".into()));
    }
    let (p, q) = (idx(scene, pair.0)?, idx(scene, pair.1)?);
    if p == q {
        return Err(KdtError::InvalidInput("pair of identical points".into()));
    }
    let n = scene.len();
    let none = vec![false; n];
    let at_t0 = cache.int_scene.positions_at(t0);
    let at_t1 = cache.int_scene.positions_at(t1);
    if !edge_is_delaunay(&at_t0, p, q, &none) && !edge_is_delaunay(&at_t1, p, q, &none) {
        return Err(KdtError::Precondition("pair is Delaunay at neither endpoint".into()));
    }

    let lo = IsolatedRoot::rational(t0.clone());
    let hi = IsolatedRoot::rational(t1.clone());
    let mut events = pair_events(cache, p, q, &lo, &hi, &none)?;
    let mut first_shallow_collinear = None;
    let mut shallow_collinearities = 0;
    let mut shallow_cocircularities = 0;
    for e in events.iter_mut() {
        match e.kind {
            EventKind::Collinearity => {
                let x = e.others[0];
                let (l, r) = side_counts(cache, &mut e.time, p, q, &[x])?;
                if l.min(r) <= k {
                    shallow_collinearities += 1;
                    first_shallow_collinear.get_or_insert(scene.id(x));
                }
            }
            EventKind::Cocircularity => {
                let mut t = [e.others[0], e.others[1], p, q];
                t.sort_unstable();
                if cocircularity_level(cache, &mut e.time, t)? <= k {
                    shallow_cocircularities += 1;
                }
            }
        }
    }
    let threshold = c_ii * (k * k) as f64;
    let mut report = TrichotomyReport {
        pair,
        interval: (t0.clone(), t1.clone()),
        k,
        c_ii,
        outcome: TrichotomyOutcome::VerificationFailure,
        shallow_collinearities,
        shallow_cocircularities,
        threshold,
        removal_candidate: None,
        removal_size: None,
        removal_check: None,
    };
    if let Some(x) = first_shallow_collinear {
        report.outcome = TrichotomyOutcome::ShallowCollinearity(x);
        return Ok(report);
    }
    if shallow_cocircularities as f64 >= threshold {
        report.outcome = TrichotomyOutcome::ManyShallowCocircularities(shallow_cocircularities);
        return Ok(report);
    }

    // An edge that is already Delaunay throughout needs nothing removed.
    if try_removal(cache, p, q, &lo, &hi, &[], k, &mut report, "empty", scene)? {
        return Ok(report);
    }

    let witnesses = gap_witnesses(&mut events, &lo, &hi);

    // Without shallow collinearities no point changes sides while one side is
    // small, so a side with fewer than k points can be removed wholesale.
    let pts = cache.int_scene.positions_at(&witnesses[0]);
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for x in 0..n {
        if x == p || x == q {
            continue;
        }
        match function_value(&pts, p, q, x) {
            Some((Side::Red, _)) => right.push(x),
            Some((Side::Blue, _)) => left.push(x),
            None => return Err(KdtError::Degenerate("witness time on a collinearity".into())),
        }
    }
    let smaller = if left.len() <= right.len() { left } else { right };
    if smaller.len() < k && try_removal(cache, p, q, &lo, &hi, &smaller, k, &mut report, "side", scene)? {
        return Ok(report);
    }

    // Points whose own-color level reaches ceil(k/3) at some moment of the interval.
    let bound = k.div_ceil(3);
    let mut chosen = vec![false; n];
    for t in &witnesses {
        let pts = cache.int_scene.positions_at(t);
        for (x, lvl) in own_color_levels(&pts, p, q).into_iter().enumerate() {
            if lvl.is_some_and(|l| l <= bound) {
                chosen[x] = true;
            }
        }
    }
    let set: Vec<usize> = (0..n).filter(|&x| chosen[x]).collect();
    try_removal(cache, p, q, &lo, &hi, &set, k, &mut report, "levels", scene)?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn try_removal(
    cache: &mut TupleCache,
    p: usize,
    q: usize,
    lo: &IsolatedRoot,
    hi: &IsolatedRoot,
    set: &[usize],
    k: usize,
    report: &mut TrichotomyReport,
    label: &str,
    scene: &Scene,
) -> Result<bool> {
    report.removal_candidate = Some(label.to_string());
    report.removal_size = Some(set.len());
    if set.len() >= 3 * k {
        report.removal_check = None;
        return Ok(false);
    }
    let mut excluded = vec![false; scene.len()];
    for &x in set {
        excluded[x] = true;
    }
    let ok = interval_check_cached(cache, p, q, lo, hi, &excluded)?;
    report.removal_check = Some(ok);
    if ok {
        let mut ids: Vec<u32> = set.iter().map(|&x| scene.id(x)).collect();
        ids.sort_unstable();
        report.outcome = TrichotomyOutcome::RemovalSet(ids);
    }
    Ok(ok)
}
