//! Events and witness times relevant to one pair of points.
//!
//! For a pair `(p, q)` the only events that change the order or the colors of
//! the red/blue functions are the cocircularities `(p, q, x, y)` and the
//! collinearities `(p, q, x)`. Between consecutive such events every
//! combinatorial quantity attached to the pair is constant, so one rational
//! witness per gap is enough to evaluate it.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::Result;
use crate::kinetic::EventKind;
use crate::predicates::{TupleCache, TupleRoots};
use crate::roots::{compare_roots, IsolatedRoot};

/// Side of the directed line `p -> q`: red is right (`L+`), blue is left (`L-`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Side {
    Red,
    Blue,
}

/// An event of a tuple containing `p` and `q`.
#[derive(Clone, Debug)]
pub struct PairEvent {
    pub time: IsolatedRoot,
    pub kind: EventKind,
    /// The one (collinearity) or two (cocircularity) points besides `p, q`, as indices.
    pub others: Vec<usize>,
    pub tuple: Arc<TupleRoots>,
}

/// Whether `r` lies strictly inside `(lo, hi)`.
pub fn strictly_inside(r: &IsolatedRoot, lo: &IsolatedRoot, hi: &IsolatedRoot) -> bool {
    let mut r1 = r.clone();
    let mut l = lo.clone();
    if compare_roots(&mut r1, &mut l) != Ordering::Greater {
        return false;
    }
    let mut h = hi.clone();
    compare_roots(&mut r1, &mut h) == Ordering::Less
}

/// All `(p, q, ·)` collinearities and `(p, q, ·, ·)` cocircularities strictly inside
/// `(lo, hi)`, skipping points flagged in `excluded`, sorted by time.
pub fn pair_events(
    cache: &mut TupleCache,
    p: usize,
    q: usize,
    lo: &IsolatedRoot,
    hi: &IsolatedRoot,
    excluded: &[bool],
) -> Result<Vec<PairEvent>> {
    let n = cache.len();
    let mut events = Vec::new();
    let keep = |time: &IsolatedRoot| strictly_inside(time, lo, hi);
    for x in 0..n {
        if x == p || x == q || excluded[x] {
            continue;
        }
        let (t, _) = cache.orientation([p, q, x])?;
        for r in &t.roots {
            if keep(r) {
                events.push(PairEvent { time: r.clone(), kind: EventKind::Collinearity, others: vec![x], tuple: t.clone() });
            }
        }
        for y in x + 1..n {
            if y == p || y == q || excluded[y] {
                continue;
            }
            let (t, _) = cache.incircle([p, q, x, y])?;
            for r in &t.roots {
                if keep(r) {
                    events.push(PairEvent {
                        time: r.clone(),
                        kind: EventKind::Cocircularity,
                        others: vec![x, y],
                        tuple: t.clone(),
                    });
                }
            }
        }
    }
    Ok(sort_events(events))
}

pub fn sort_events(events: Vec<PairEvent>) -> Vec<PairEvent> {
    let cells: Vec<RefCell<IsolatedRoot>> = events.iter().map(|e| RefCell::new(e.time.clone())).collect();
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by(|&i, &j| {
        if i == j {
            return Ordering::Equal;
        }
        compare_roots(&mut cells[i].borrow_mut(), &mut cells[j].borrow_mut())
    });
    let mut slots: Vec<Option<PairEvent>> = events.into_iter().map(Some).collect();
    order
        .into_iter()
        .map(|i| {
            let mut e = slots[i].take().unwrap();
            e.time = cells[i].borrow().clone();
            e
        })
        .collect()
}

/// A rational strictly between two roots with `a < b`.
pub fn rational_between(a: &mut IsolatedRoot, b: &mut IsolatedRoot) -> BigRational {
    loop {
        if a.hi() < b.lo() {
            return simplest_between(a.hi(), b.lo());
        }
        if a.hi() == b.lo() && !a.is_exact() && !b.is_exact() {
            return a.hi().clone();
        }
        if a.hi() == b.lo() && a.is_exact() != b.is_exact() {
            // The shared endpoint is one of the roots; refine the other side.
            if a.is_exact() {
                b.refine();
            } else {
                a.refine();
            }
            continue;
        }
        if a.width() >= b.width() {
            a.refine();
        } else {
            b.refine();
        }
    }
}

/// A rational in the open interval `(lo, hi)` with a small denominator.
pub fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    debug_assert!(lo < hi);
    let mut den = BigInt::from(1);
    loop {
        // smallest multiple of 1/den strictly above lo
        let k = (lo * BigRational::from_integer(den.clone())).floor().to_integer() + 1;
        let cand = BigRational::new(k, den.clone());
        if &cand < hi {
            return cand;
        }
        den <<= 1;
    }
}

/// Witness times: one rational in each gap of `lo < e_1 < ... < e_m < hi`.
pub fn gap_witnesses(events: &mut [PairEvent], lo: &IsolatedRoot, hi: &IsolatedRoot) -> Vec<BigRational> {
    let mut bounds: Vec<IsolatedRoot> = Vec::with_capacity(events.len() + 2);
    bounds.push(lo.clone());
    bounds.extend(events.iter().map(|e| e.time.clone()));
    bounds.push(hi.clone());
    let mut out = Vec::with_capacity(bounds.len() - 1);
    for i in 0..bounds.len() - 1 {
        let (l, r) = bounds.split_at_mut(i + 1);
        out.push(rational_between(&mut l[i], &mut r[0]));
    }
    for (e, b) in events.iter_mut().zip(bounds.into_iter().skip(1)) {
        e.time = b;
    }
    out
}

/// Red/blue function value of `x` for the pair `(p, q)` at integer positions: the
/// signed offset of the circumcenter of `p, q, x` from the midpoint of `pq`,
/// positive towards the red side, divided by `|pq|`. `None` when `x` is on the line.
pub fn function_value(pts: &[(BigInt, BigInt)], p: usize, q: usize, x: usize) -> Option<(Side, BigRational)> {
    let (px, py) = &pts[p];
    let (qx, qy) = &pts[q];
    let (xx, xy) = &pts[x];
    let ux = qx - px;
    let uy = qy - py;
    // 2w = 2x - p - q; right normal n = (uy, -ux)
    let wx: BigInt = BigInt::from(2) * xx - px - qx;
    let wy: BigInt = BigInt::from(2) * xy - py - qy;
    let ndotw = &uy * &wx - &ux * &wy;
    if ndotw.is_zero() {
        return None;
    }
    let num = &wx * &wx + &wy * &wy - &ux * &ux - &uy * &uy;
    let side = if ndotw > BigInt::zero() { Side::Red } else { Side::Blue };
    Some((side, BigRational::new(num, BigInt::from(4) * ndotw)))
}

/// Whether `x` lies strictly inside segment `pq` (positions are integer scaled).
pub fn on_open_segment(pts: &[(BigInt, BigInt)], p: usize, q: usize, x: usize) -> bool {
    let (px, py) = &pts[p];
    let (qx, qy) = &pts[q];
    let (xx, xy) = &pts[x];
    let cross = (qx - px) * (xy - py) - (qy - py) * (xx - px);
    if !cross.is_zero() {
        return false;
    }
    let dot = (px - xx) * (qx - xx) + (py - xy) * (qy - xy);
    dot < BigInt::zero()
}

/// Envelope criterion: `pq` is an edge of the Delaunay triangulation of the
/// non-excluded points iff the highest blue function is below the lowest red one
/// and no point lies on the open segment.
pub fn edge_is_delaunay(pts: &[(BigInt, BigInt)], p: usize, q: usize, excluded: &[bool]) -> bool {
    let mut max_blue: Option<BigRational> = None;
    let mut min_red: Option<BigRational> = None;
    for x in 0..pts.len() {
        if x == p || x == q || excluded.get(x).copied().unwrap_or(false) {
            continue;
        }
        match function_value(pts, p, q, x) {
            None => {
                if on_open_segment(pts, p, q, x) {
                    return false;
                }
            }
            Some((Side::Red, v)) => {
                if min_red.as_ref().is_none_or(|m| &v < m) {
                    min_red = Some(v);
                }
            }
            Some((Side::Blue, v)) => {
                if max_blue.as_ref().is_none_or(|m| &v > m) {
                    max_blue = Some(v);
                }
            }
        }
    }
    match (max_blue, min_red) {
        (Some(b), Some(r)) => b < r,
        _ => true,
    }
}
