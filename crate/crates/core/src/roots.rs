//! Real root isolation and exact comparison of real algebraic times.
//!
//! Roots are isolated by Descartes bisection (the Vincent-Collins-Akritas scheme)
//! on the square-free part of the input, then refined by sign bisection. Two roots
//! are compared by refining until their intervals separate; once both are narrower
//! than `2^-precision` a gcd test decides whether they are in fact the same number.

use std::cmp::Ordering;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{KdtError, Result};
use crate::poly::{descartes_bound, descartes_unit, taylor_shift_one, IntPoly};

/// Default isolation precision in bits.
pub const DEFAULT_PRECISION: u32 = 64;

/// Precision in bits, read once from `KDT_PRECISION` (default 64).
pub fn precision_bits() -> u32 {
    static PREC: OnceLock<u32> = OnceLock::new();
    *PREC.get_or_init(|| {
        std::env::var("KDT_PRECISION")
            .ok()
            .and_then(|s| s.trim().parse::<u32>().ok())
            .filter(|&p| p > 0)
            .unwrap_or(DEFAULT_PRECISION)
    })
}

/// Identity of a root: an opaque polynomial key plus the root's rank inside the horizon.
/// Roots with equal tags are the same real number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootTag {
    pub poly: u128,
    pub index: u32,
}

/// A real root of an integer polynomial, known to lie in `(lo, hi)`, or equal to
/// `lo == hi` when `exact`.
#[derive(Clone, Debug)]
pub struct IsolatedRoot {
    lo: BigRational,
    hi: BigRational,
    exact: bool,
    sf: Arc<IntPoly>,
    sf_sign_lo: i8,
    /// Sign of the original polynomial just before the root.
    pub sign_before: i8,
    /// Sign of the original polynomial just after the root.
    pub sign_after: i8,
    /// Even multiplicity: the polynomial touches zero without changing sign.
    pub tangent: bool,
    /// Multiplicity greater than one.
    pub repeated: bool,
    pub tag: Option<RootTag>,
}

impl IsolatedRoot {
    /// A rational time viewed as a root of `den * t - num`.
    pub fn rational(t: BigRational) -> Self {
        let sf = Arc::new(IntPoly::linear_root(&t));
        IsolatedRoot {
            lo: t.clone(),
            hi: t,
            exact: true,
            sf,
            sf_sign_lo: 0,
            sign_before: -1,
            sign_after: 1,
            tangent: false,
            repeated: false,
            tag: None,
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Square-free polynomial that vanishes at this root.
    pub fn defining_poly(&self) -> &IntPoly {
        &self.sf
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn with_tag(mut self, tag: RootTag) -> Self {
        self.tag = Some(tag);
        self
    }

    /// Midpoint approximation.
    pub fn approx(&self) -> f64 {
        let m = (&self.lo + &self.hi) / BigRational::from_integer(2.into());
        rational_to_f64(&m)
    }

    /// Halve the isolating interval.
    pub fn refine(&mut self) {
        if self.exact {
            return;
        }
        let m = (&self.lo + &self.hi) / BigRational::from_integer(2.into());
        self.split_at(m);
    }

    /// Shrink the interval using `m` (which must lie inside it) as the cut point.
    fn split_at(&mut self, m: BigRational) {
        let s = self.sf.sign_at(&m);
        if s == 0 {
            self.lo = m.clone();
            self.hi = m;
            self.exact = true;
        } else if s == self.sf_sign_lo {
            self.lo = m;
        } else {
            self.hi = m;
        }
    }

    /// Refine until the width is at most `2^-bits`.
    pub fn refine_to(&mut self, bits: u32) {
        let eps = pow2_inv(bits);
        while !self.exact && self.width() > eps {
            self.refine();
        }
    }

    /// Compare with a rational number exactly.
    pub fn cmp_rational(&mut self, t: &BigRational) -> Ordering {
        loop {
            if self.exact {
                return self.lo.cmp(t);
            }
            if &self.hi <= t {
                return Ordering::Less;
            }
            if &self.lo >= t {
                return Ordering::Greater;
            }
            self.split_at(t.clone());
        }
    }

    /// True when the root is a root of `g`, where the roots of `g` are simple.
    fn is_root_of_simple(&self, g: &IntPoly) -> bool {
        if g.degree().unwrap_or(0) == 0 {
            return false;
        }
        if self.exact {
            return g.sign_at(&self.lo) == 0;
        }
        let a = g.sign_at(&self.lo);
        let b = g.sign_at(&self.hi);
        if a == 0 || b == 0 {
            // An endpoint root of g is not a root of sf, so shrink away from it.
            let mut c = self.clone();
            c.refine();
            return c.is_root_of_simple(g);
        }
        a != b
    }

    fn certainly_below(&self, other: &IsolatedRoot) -> bool {
        self.hi < other.lo || (self.hi == other.lo && !(self.exact && other.exact))
    }
}

pub(crate) fn pow2_inv(bits: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << bits)
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        // Very large numerators and denominators: scale both down.
        let n = x.numer();
        let d = x.denom();
        let shift = n.bits().max(d.bits()).saturating_sub(1000);
        let n2: BigInt = n >> shift;
        let d2: BigInt = d >> shift;
        n2.to_f64().unwrap_or(f64::NAN) / d2.to_f64().unwrap_or(f64::NAN)
    })
}

/// Isolate the real roots of `p` in the open interval `(lo, hi)`, in increasing order.
pub fn isolate_real_roots(p: &IntPoly, lo: &BigRational, hi: &BigRational) -> Result<Vec<IsolatedRoot>> {
    if p.is_zero() {
        return Err(KdtError::Degenerate("identically zero polynomial".into()));
    }
    if lo >= hi || p.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let sf = Arc::new(p.square_free());
    let g = p.gcd(&p.derivative());
    let repeated_part = if g.degree().unwrap_or(0) > 0 { Some(g.square_free()) } else { None };

    let width = hi - lo;
    let mut found: Vec<(BigRational, BigRational, bool)> = Vec::new();
    let q0 = sf.substitute_interval(lo, hi);
    // (poly on (0,1), numerator c, level k): the interval (c / 2^k, (c + 1) / 2^k)
    let mut stack: Vec<(IntPoly, BigInt, u32)> = vec![(q0, BigInt::zero(), 0)];
    while let Some((q, c, k)) = stack.pop() {
        let v = descartes_unit(&q);
        if v == 0 {
            continue;
        }
        let scale = BigRational::new(BigInt::one(), BigInt::one() << k);
        let y_lo = BigRational::from_integer(c.clone()) * &scale;
        let y_hi = BigRational::from_integer(&c + 1) * &scale;
        if v == 1 {
            found.push((lo + &width * y_lo, lo + &width * y_hi, false));
            continue;
        }
        let (ql, qr) = split_unit(&q);
        if qr.coeffs().first().is_none_or(Zero::is_zero) {
            let y_mid = (y_lo + y_hi) / BigRational::from_integer(2.into());
            let t = lo + &width * y_mid;
            found.push((t.clone(), t, true));
        }
        let c2: BigInt = &c << 1;
        stack.push((qr, &c2 + 1, k + 1));
        stack.push((ql, c2, k + 1));
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));

    let mut out = Vec::with_capacity(found.len());
    for (a, b, exact) in found {
        let mut root = IsolatedRoot {
            lo: a,
            hi: b,
            exact,
            sf: sf.clone(),
            sf_sign_lo: 0,
            sign_before: 0,
            sign_after: 0,
            tangent: false,
            repeated: false,
            tag: None,
        };
        tighten(&mut root);
        let (before, after) = side_signs(&root, p);
        root.sign_before = before;
        root.sign_after = after;
        root.tangent = before == after;
        root.repeated = match &repeated_part {
            Some(h) => root.is_root_of_simple(h),
            None => false,
        };
        out.push(root);
    }
    Ok(out)
}

/// Split a polynomial on `(0, 1)` into its halves, each re-mapped to `(0, 1)`.
fn split_unit(q: &IntPoly) -> (IntPoly, IntPoly) {
    let d = q.degree().unwrap_or(0);
    let left: Vec<BigInt> = q
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c << (d - i))
        .collect();
    let mut right = left.clone();
    taylor_shift_one(&mut right);
    (IntPoly::new(left).primitive(), IntPoly::new(right).primitive())
}

/// Ensure the square-free polynomial is nonzero at both endpoints.
fn tighten(root: &mut IsolatedRoot) {
    if root.exact {
        return;
    }
    loop {
        let a = root.sf.sign_at(&root.lo);
        let b = root.sf.sign_at(&root.hi);
        if a != 0 && b != 0 {
            root.sf_sign_lo = a;
            return;
        }
        let m = (&root.lo + &root.hi) / BigRational::from_integer(2.into());
        if root.sf.sign_at(&m) == 0 {
            root.lo = m.clone();
            root.hi = m;
            root.exact = true;
            return;
        }
        // Exactly one root inside: the half with an odd Descartes count holds it.
        if descartes_bound(&root.sf, &root.lo, &m) % 2 == 1 {
            root.hi = m;
        } else {
            root.lo = m;
        }
    }
}

/// Signs of `p` immediately before and after the root.
fn side_signs(root: &IsolatedRoot, p: &IntPoly) -> (i8, i8) {
    if !root.exact {
        return (p.sign_at(&root.lo), p.sign_at(&root.hi));
    }
    let m = &root.lo;
    let mut delta = BigRational::one();
    loop {
        let a = m - &delta;
        let b = m + &delta;
        if root.sf.sign_at(&a) != 0
            && root.sf.sign_at(&b) != 0
            && descartes_bound(&root.sf, &a, m) == 0
            && descartes_bound(&root.sf, m, &b) == 0
        {
            return (p.sign_at(&a), p.sign_at(&b));
        }
        delta /= BigRational::from_integer(2.into());
    }
}

/// Total order on isolated roots. `Equal` means the two are the same real number.
pub fn compare_roots(a: &mut IsolatedRoot, b: &mut IsolatedRoot) -> Ordering {
    compare_roots_with(a, b, precision_bits())
}

pub fn compare_roots_with(a: &mut IsolatedRoot, b: &mut IsolatedRoot, precision: u32) -> Ordering {
    if a.tag.is_some() && a.tag == b.tag {
        return Ordering::Equal;
    }
    let eps = pow2_inv(precision);
    let mut distinct = false;
    loop {
        if a.certainly_below(b) {
            return Ordering::Less;
        }
        if b.certainly_below(a) {
            return Ordering::Greater;
        }
        if a.exact && b.exact {
            return a.lo.cmp(&b.lo);
        }
        if !distinct && a.width() <= eps && b.width() <= eps {
            let g = a.sf.gcd(&b.sf);
            if a.is_root_of_simple(&g) && b.is_root_of_simple(&g) {
                // Both are roots of g, whose roots are simple roots of a.sf; the
                // only one inside a's interval is a itself.
                return if contained_in(b, a) { Ordering::Equal } else { equal_or_order(a, b) };
            }
            distinct = true;
        }
        if a.width() >= b.width() {
            a.refine();
        } else {
            b.refine();
        }
    }
}

fn contained_in(inner: &IsolatedRoot, outer: &IsolatedRoot) -> bool {
    if outer.exact {
        inner.exact && inner.lo == outer.lo
    } else if inner.exact {
        inner.lo > outer.lo && inner.lo < outer.hi
    } else {
        inner.lo >= outer.lo && inner.hi <= outer.hi
    }
}

/// Both roots lie in the zero set of a common factor; refine until one interval
/// nests inside the other (equal) or they separate.
fn equal_or_order(a: &mut IsolatedRoot, b: &mut IsolatedRoot) -> Ordering {
    loop {
        if a.certainly_below(b) {
            return Ordering::Less;
        }
        if b.certainly_below(a) {
            return Ordering::Greater;
        }
        if contained_in(b, a) || contained_in(a, b) {
            return Ordering::Equal;
        }
        if a.exact && b.exact {
            return a.lo.cmp(&b.lo);
        }
        if a.width() >= b.width() {
            a.refine();
        } else {
            b.refine();
        }
    }
}

/// Sign of `q` at the root.
pub fn sign_at(root: &mut IsolatedRoot, q: &IntPoly) -> i8 {
    if q.is_zero() {
        return 0;
    }
    if root.exact {
        return q.sign_at(&root.lo);
    }
    if q.degree() == Some(0) {
        return q.sign_at(&root.lo);
    }
    let mut checked_common = false;
    loop {
        if root.exact {
            return q.sign_at(&root.lo);
        }
        let a = q.sign_at(&root.lo);
        let b = q.sign_at(&root.hi);
        if a != 0 && a == b && descartes_bound(q, &root.lo, &root.hi) == 0 {
            return a;
        }
        if !checked_common {
            checked_common = true;
            let g = q.gcd(&root.sf);
            if root.is_root_of_simple(&g) {
                return 0;
            }
        }
        root.refine();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn isolates_known_roots() {
        // (2t - 1)(3t - 2)(t + 4)
        let p = &(&IntPoly::from_i64(&[-1, 2]) * &IntPoly::from_i64(&[-2, 3])) * &IntPoly::from_i64(&[4, 1]);
        let roots = isolate_real_roots(&p, &r(0, 1), &r(1, 1)).unwrap();
        assert_eq!(roots.len(), 2);
        let mut a = roots[0].clone();
        assert_eq!(a.cmp_rational(&r(1, 2)), Ordering::Equal);
        let mut b = roots[1].clone();
        assert_eq!(b.cmp_rational(&r(2, 3)), Ordering::Equal);
        assert!(roots.iter().all(|x| !x.tangent && !x.repeated));
    }

    #[test]
    fn endpoint_roots_are_excluded() {
        let p = &IntPoly::from_i64(&[0, 1]) * &IntPoly::from_i64(&[-1, 1]);
        assert!(isolate_real_roots(&p, &r(0, 1), &r(1, 1)).unwrap().is_empty());
        assert_eq!(isolate_real_roots(&p, &r(-1, 2), &r(3, 2)).unwrap().len(), 2);
    }

    #[test]
    fn tangent_root_is_flagged() {
        let l = IntPoly::from_i64(&[-1, 3]);
        let p = &(&l * &l) * &IntPoly::from_i64(&[1, 0, 1]);
        let roots = isolate_real_roots(&p, &r(0, 1), &r(1, 1)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].tangent && roots[0].repeated);
        assert_eq!(roots[0].sign_before, 1);
    }

    #[test]
    fn irrational_roots_compare_equal_across_polynomials() {
        // sqrt(2)/2 as a root of 2t^2 - 1 and of (2t^2 - 1)(t + 3)
        let p = IntPoly::from_i64(&[-1, 0, 2]);
        let q = &p * &IntPoly::from_i64(&[3, 1]);
        let mut a = isolate_real_roots(&p, &r(0, 1), &r(1, 1)).unwrap().remove(0);
        let mut b = isolate_real_roots(&q, &r(1, 2), &r(1, 1)).unwrap().remove(0);
        assert_eq!(compare_roots_with(&mut a, &mut b, 32), Ordering::Equal);
        let mut c = isolate_real_roots(&IntPoly::from_i64(&[-1, 0, 0, 2]), &r(0, 1), &r(1, 1))
            .unwrap()
            .remove(0);
        assert_eq!(compare_roots_with(&mut a, &mut c, 32), Ordering::Less);
    }

    #[test]
    fn sign_at_detects_common_root() {
        let p = IntPoly::from_i64(&[-1, 0, 2]);
        let mut a = isolate_real_roots(&p, &r(0, 1), &r(1, 1)).unwrap().remove(0);
        let q = &p * &IntPoly::from_i64(&[-5, 1]);
        assert_eq!(sign_at(&mut a, &q), 0);
        assert_eq!(sign_at(&mut a, &IntPoly::from_i64(&[-7, 10])), 1);
        assert_eq!(sign_at(&mut a, &IntPoly::from_i64(&[-71, 100])), -1);
    }

    #[test]
    fn dyadic_midpoint_root_is_exact() {
        // roots 1/4, 1/2, 3/4 are bisection midpoints of (0, 1)
        let p = &(&IntPoly::from_i64(&[-1, 4]) * &IntPoly::from_i64(&[-1, 2])) * &IntPoly::from_i64(&[-3, 4]);
        let roots = isolate_real_roots(&p, &r(0, 1), &r(1, 1)).unwrap();
        assert_eq!(roots.len(), 3);
        assert!(roots.iter().any(IsolatedRoot::is_exact));
        for (root, t) in roots.iter().zip([r(1, 4), r(1, 2), r(3, 4)]) {
            let mut c = root.clone();
            assert_eq!(c.cmp_rational(&t), Ordering::Equal);
        }
        assert_eq!(roots[1].sign_before, -roots[1].sign_after);
    }
}
