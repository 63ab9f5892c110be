//! Orientation and incircle predicates as polynomials in time.
//!
//! `orientation(p, q, r) > 0` means `r` lies to the left of the directed line `p -> q`.
//! `incircle(p, q, r, s) > 0` means `s` lies inside the circle through `p, q, r` when
//! `p, q, r` is counter-clockwise. Both are alternating in their arguments, so the
//! per-tuple cache stores one polynomial per sorted tuple and applies the permutation sign.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{KdtError, Result};
use crate::motion::{IntScene, Scene, Time};
use crate::poly::{sign_of, IntPoly};
use crate::roots::{compare_roots, isolate_real_roots, IsolatedRoot, RootTag};

/// Which predicate a certificate polynomial encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PredicateKind {
    Orientation,
    Incircle,
}

/// Predicate polynomial for an ordered tuple of points (given by id).
///
/// `poly` is the exact predicate scaled by a positive constant (a power of the
/// common coordinate denominator), so it has the same roots and signs.
#[derive(Clone, Debug)]
pub struct CertificatePolynomial {
    pub kind: PredicateKind,
    pub participants: Vec<u32>,
    pub poly: IntPoly,
}

impl CertificatePolynomial {
    pub fn degree(&self) -> usize {
        self.poly.degree().unwrap_or(0)
    }
}

fn det2(a: &IntPoly, b: &IntPoly, c: &IntPoly, d: &IntPoly) -> IntPoly {
    &(a * d) - &(b * c)
}

/// Orientation polynomial by point index into an integer scene.
pub fn orientation_int(s: &IntScene, p: usize, q: usize, r: usize) -> IntPoly {
    let qx = &s.x[q] - &s.x[p];
    let qy = &s.y[q] - &s.y[p];
    let rx = &s.x[r] - &s.x[p];
    let ry = &s.y[r] - &s.y[p];
    det2(&qx, &qy, &rx, &ry)
}

/// Incircle polynomial by point index into an integer scene.
pub fn incircle_int(sc: &IntScene, p: usize, q: usize, r: usize, s: usize) -> IntPoly {
    let row = |i: usize| {
        let dx = &sc.x[i] - &sc.x[s];
        let dy = &sc.y[i] - &sc.y[s];
        let l = &(&dx * &dx) + &(&dy * &dy);
        (dx, dy, l)
    };
    let (a1, b1, c1) = row(p);
    let (a2, b2, c2) = row(q);
    let (a3, b3, c3) = row(r);
    let m1 = &a1 * &det2(&b2, &c2, &b3, &c3);
    let m2 = &b1 * &det2(&a2, &c2, &a3, &c3);
    let m3 = &c1 * &det2(&a2, &b2, &a3, &b3);
    &(&m1 - &m2) + &m3
}

/// Static orientation sign for integer points.
pub fn orient_static(p: &(BigInt, BigInt), q: &(BigInt, BigInt), r: &(BigInt, BigInt)) -> i8 {
    let v = (&q.0 - &p.0) * (&r.1 - &p.1) - (&q.1 - &p.1) * (&r.0 - &p.0);
    sign_of(&v)
}

/// Static incircle sign for integer points.
pub fn incircle_static(
    p: &(BigInt, BigInt),
    q: &(BigInt, BigInt),
    r: &(BigInt, BigInt),
    s: &(BigInt, BigInt),
) -> i8 {
    let row = |a: &(BigInt, BigInt)| {
        let dx = &a.0 - &s.0;
        let dy = &a.1 - &s.1;
        let l = &dx * &dx + &dy * &dy;
        (dx, dy, l)
    };
    let (a1, b1, c1) = row(p);
    let (a2, b2, c2) = row(q);
    let (a3, b3, c3) = row(r);
    let v = &a1 * (&b2 * &c3 - &c2 * &b3) - &b1 * (&a2 * &c3 - &c2 * &a3) + &c1 * (&a2 * &b3 - &b2 * &a3);
    sign_of(&v)
}

fn index(scene: &Scene, id: u32) -> Result<usize> {
    scene
        .index_of(id)
        .ok_or_else(|| KdtError::InvalidInput(format!("unknown point id {id}")))
}

fn distinct(ids: &[u32]) -> Result<()> {
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            if ids[i] == ids[j] {
                return Err(KdtError::InvalidInput(format!("repeated point id {}", ids[i])));
            }
        }
    }
    Ok(())
}

/// Orientation polynomial of three distinct points. Errors if it vanishes identically.
pub fn orientation_poly(scene: &Scene, p: u32, q: u32, r: u32) -> Result<CertificatePolynomial> {
    distinct(&[p, q, r])?;
    let is = scene.integer_form();
    let poly = orientation_int(&is, index(scene, p)?, index(scene, q)?, index(scene, r)?);
    if poly.is_zero() {
        return Err(KdtError::Degenerate(format!("points {p}, {q}, {r} are always collinear")));
    }
    Ok(CertificatePolynomial { kind: PredicateKind::Orientation, participants: vec![p, q, r], poly })
}

/// Incircle polynomial of four distinct points. Errors if it vanishes identically.
pub fn incircle_poly(scene: &Scene, p: u32, q: u32, r: u32, s: u32) -> Result<CertificatePolynomial> {
    distinct(&[p, q, r, s])?;
    let is = scene.integer_form();
    let poly = incircle_int(
        &is,
        index(scene, p)?,
        index(scene, q)?,
        index(scene, r)?,
        index(scene, s)?,
    );
    if poly.is_zero() {
        return Err(KdtError::Degenerate(format!("points {p}, {q}, {r}, {s} are always cocircular")));
    }
    Ok(CertificatePolynomial { kind: PredicateKind::Incircle, participants: vec![p, q, r, s], poly })
}

/// Real roots of a certificate polynomial inside the open interval, increasing.
pub fn isolate_roots(poly: &CertificatePolynomial, lo: &Time, hi: &Time) -> Result<Vec<IsolatedRoot>> {
    isolate_real_roots(&poly.poly, lo, hi)
}

/// Parity of the permutation sorting `v`: +1 for even, -1 for odd.
pub fn permutation_sign(v: &[usize]) -> i8 {
    let mut sign = 1i8;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Key identifying a sorted tuple; doubles as the root tag namespace.
pub fn tuple_key(kind: PredicateKind, sorted: &[usize]) -> u128 {
    let mut k: u128 = match kind {
        PredicateKind::Orientation => 1,
        PredicateKind::Incircle => 2,
    };
    for &i in sorted {
        k = (k << 30) | (i as u128 + 1);
    }
    k
}

/// Polynomial and horizon roots of one sorted tuple.
#[derive(Debug)]
pub struct TupleRoots {
    pub kind: PredicateKind,
    /// Point indices, increasing.
    pub tuple: Vec<usize>,
    /// Predicate of the sorted tuple.
    pub poly: IntPoly,
    /// Roots in the open horizon, increasing, tagged with their rank.
    pub roots: Vec<IsolatedRoot>,
}

/// Lazily computed certificate polynomials and their roots over a scene's horizon.
pub struct TupleCache {
    pub int_scene: IntScene,
    pub horizon: (Time, Time),
    incircle: HashMap<[usize; 4], Arc<TupleRoots>>,
    orientation: HashMap<[usize; 3], Arc<TupleRoots>>,
}

impl TupleCache {
    pub fn new(scene: &Scene) -> Self {
        TupleCache {
            int_scene: scene.integer_form(),
            horizon: scene.horizon.clone(),
            incircle: HashMap::new(),
            orientation: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.int_scene.len()
    }

    pub fn is_empty(&self) -> bool {
        self.int_scene.is_empty()
    }

    fn build(&self, kind: PredicateKind, tuple: &[usize]) -> Result<TupleRoots> {
        let poly = match kind {
            PredicateKind::Orientation => orientation_int(&self.int_scene, tuple[0], tuple[1], tuple[2]),
            PredicateKind::Incircle => incircle_int(&self.int_scene, tuple[0], tuple[1], tuple[2], tuple[3]),
        };
        if poly.is_zero() {
            return Err(KdtError::Degenerate(format!("{kind:?} of {tuple:?} vanishes identically")));
        }
        let key = tuple_key(kind, tuple);
        let roots = isolate_real_roots(&poly, &self.horizon.0, &self.horizon.1)?
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.with_tag(RootTag { poly: key, index: i as u32 }))
            .collect();
        Ok(TupleRoots { kind, tuple: tuple.to_vec(), poly, roots })
    }

    /// Incircle data for the sorted version of `tuple`, plus the permutation sign.
    pub fn incircle(&mut self, tuple: [usize; 4]) -> Result<(Arc<TupleRoots>, i8)> {
        let sign = permutation_sign(&tuple);
        let mut sorted = tuple;
        sorted.sort_unstable();
        if let Some(t) = self.incircle.get(&sorted) {
            return Ok((t.clone(), sign));
        }
        let t = Arc::new(self.build(PredicateKind::Incircle, &sorted)?);
        self.incircle.insert(sorted, t.clone());
        Ok((t, sign))
    }

    /// Orientation data for the sorted version of `tuple`, plus the permutation sign.
    pub fn orientation(&mut self, tuple: [usize; 3]) -> Result<(Arc<TupleRoots>, i8)> {
        let sign = permutation_sign(&tuple);
        let mut sorted = tuple;
        sorted.sort_unstable();
        if let Some(t) = self.orientation.get(&sorted) {
            return Ok((t.clone(), sign));
        }
        let t = Arc::new(self.build(PredicateKind::Orientation, &sorted)?);
        self.orientation.insert(sorted, t.clone());
        Ok((t, sign))
    }

    /// Sign of `orientation(p, q, r)` at a root time.
    pub fn orientation_sign_at(&mut self, root: &mut IsolatedRoot, p: usize, q: usize, r: usize) -> Result<i8> {
        let (t, s) = self.orientation([p, q, r])?;
        Ok(s * crate::roots::sign_at(root, &t.poly))
    }

    /// Sign of `incircle(p, q, r, s)` at a root time.
    pub fn incircle_sign_at(&mut self, root: &mut IsolatedRoot, p: usize, q: usize, r: usize, s: usize) -> Result<i8> {
        let (t, sg) = self.incircle([p, q, r, s])?;
        Ok(sg * crate::roots::sign_at(root, &t.poly))
    }
}

/// Sort roots increasingly with exact comparisons.
pub fn sort_roots(roots: Vec<IsolatedRoot>) -> Vec<IsolatedRoot> {
    let cells: Vec<RefCell<IsolatedRoot>> = roots.into_iter().map(RefCell::new).collect();
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&i, &j| {
        if i == j {
            return Ordering::Equal;
        }
        compare_roots(&mut cells[i].borrow_mut(), &mut cells[j].borrow_mut())
    });
    let mut cells: Vec<Option<IsolatedRoot>> = cells.into_iter().map(|c| Some(c.into_inner())).collect();
    order.into_iter().map(|i| cells[i].take().unwrap()).collect()
}

/// Reject scenes violating general position over the horizon.
///
/// Exhaustive (every triple and 4-tuple, no repeated roots, no two distinct events
/// at the same time) up to `crate::oracle::DEFAULT_ORACLE_CAP` points; above that
/// only coincident trajectories are rejected here.
pub fn assert_general_position(scene: &Scene) -> Result<()> {
    assert_general_position_with_cap(scene, crate::oracle::DEFAULT_ORACLE_CAP)
}

pub fn assert_general_position_with_cap(scene: &Scene, cap: usize) -> Result<()> {
    let n = scene.len();
    let is = scene.integer_form();
    for i in 0..n {
        for j in i + 1..n {
            if is.x[i] == is.x[j] && is.y[i] == is.y[j] {
                return Err(KdtError::Degenerate(format!(
                    "points {} and {} coincide",
                    scene.id(i),
                    scene.id(j)
                )));
            }
        }
    }
    if n > cap {
        return Ok(());
    }
    let mut cache = TupleCache::new(scene);
    let mut all = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let (t, _) = cache.orientation([a, b, c])?;
                all.extend(t.roots.iter().cloned());
                for d in c + 1..n {
                    let (t, _) = cache.incircle([a, b, c, d])?;
                    all.extend(t.roots.iter().cloned());
                }
            }
        }
    }
    if let Some(r) = all.iter().find(|r| r.repeated) {
        return Err(KdtError::Tangency(format!("repeated root near t = {:.6}", r.approx())));
    }
    let sorted = sort_roots(all);
    let cells: Vec<RefCell<IsolatedRoot>> = sorted.into_iter().map(RefCell::new).collect();
    for w in cells.windows(2) {
        if compare_roots(&mut w[0].borrow_mut(), &mut w[1].borrow_mut()) == Ordering::Equal {
            return Err(KdtError::Degenerate(format!(
                "simultaneous events near t = {:.6}",
                w[0].borrow().approx()
            )));
        }
    }
    Ok(())
}

/// Exact rational value of a certificate polynomial (for cross-checks).
pub fn eval_certificate(poly: &CertificatePolynomial, t: &Time) -> BigRational {
    poly.poly.eval(t)
}
