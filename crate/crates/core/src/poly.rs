//! Dense univariate polynomials over the integers.
//!
//! Certificate polynomials are built from scene coordinates scaled to a common
//! denominator, so every polynomial the engine manipulates has integer
//! coefficients. Rational evaluation is done homogeneously to stay in `BigInt`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Polynomial with ascending integer coefficients and no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPoly[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigInt) -> Self {
        IntPoly::new(vec![c])
    }

    /// The polynomial `den * t - num`, whose only root is `num / den`.
    pub fn linear_root(t: &BigRational) -> Self {
        IntPoly::new(vec![-t.numer().clone(), t.denom().clone()])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        IntPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Self {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// Non-negative gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Primitive part with a positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut g = self.content();
        if self.leading().is_some_and(Signed::is_negative) {
            g = -g;
        }
        if g.is_one() {
            return self.clone();
        }
        IntPoly::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Value at `num / den` multiplied by `den^deg`; `den` must be positive.
    pub fn eval_homogeneous(&self, num: &BigInt, den: &BigInt) -> BigInt {
        let Some(deg) = self.degree() else {
            return BigInt::zero();
        };
        let mut acc = self.coeffs[deg].clone();
        let mut dpow = BigInt::one();
        for i in (0..deg).rev() {
            dpow *= den;
            acc = acc * num + &self.coeffs[i] * &dpow;
        }
        acc
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        let Some(deg) = self.degree() else {
            return BigRational::zero();
        };
        let h = self.eval_homogeneous(t.numer(), t.denom());
        BigRational::new(h, num_traits::pow(t.denom().clone(), deg))
    }

    /// Sign of the value at `t` as -1, 0 or 1.
    pub fn sign_at(&self, t: &BigRational) -> i8 {
        sign_of(&self.eval_homogeneous(t.numer(), t.denom()))
    }

    /// `P(lo + (hi - lo) y)` times a positive constant, so its roots in `(0, 1)`
    /// correspond to the roots of `P` in `(lo, hi)` with the same signs.
    pub fn substitute_interval(&self, lo: &BigRational, hi: &BigRational) -> Self {
        let Some(deg) = self.degree() else {
            return IntPoly::zero();
        };
        let w = hi - lo;
        let (a, b) = (lo.numer(), lo.denom());
        let (c, d) = (w.numer(), w.denom());
        let bd = b * d;
        let lin = IntPoly::new(vec![a * d, b * c]);
        let mut acc = IntPoly::constant(self.coeffs[deg].clone());
        let mut bdpow = BigInt::one();
        for i in (0..deg).rev() {
            bdpow *= &bd;
            acc = &(&acc * &lin) + &IntPoly::constant(&self.coeffs[i] * &bdpow);
        }
        acc
    }

    /// Pseudo-remainder of `self` by `other`.
    fn pseudo_rem(&self, other: &IntPoly) -> IntPoly {
        let db = other.degree().expect("pseudo_rem by zero polynomial");
        let lb = other.leading().unwrap().clone();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let lr = r.leading().unwrap().clone();
            let mut coeffs: Vec<BigInt> = r.coeffs.iter().map(|c| c * &lb).collect();
            let shift = dr - db;
            for (i, c) in other.coeffs.iter().enumerate() {
                coeffs[i + shift] -= &lr * c;
            }
            r = IntPoly::new(coeffs);
        }
        r
    }

    /// Greatest common divisor, primitive with positive leading coefficient.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let mut a = self.primitive();
        let mut b = other.primitive();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            if b.degree() == Some(0) {
                return IntPoly::constant(BigInt::one());
            }
            let r = a.pseudo_rem(&b).primitive();
            a = b;
            b = r;
        }
        a
    }

    /// Exact quotient of `self` by a primitive divisor. Panics if the division leaves a remainder.
    pub fn div_exact(&self, divisor: &IntPoly) -> IntPoly {
        let db = divisor.degree().expect("division by zero polynomial");
        let lb = divisor.leading().unwrap();
        let mut r = self.clone();
        let Some(da) = r.degree() else {
            return IntPoly::zero();
        };
        if da < db {
            assert!(r.is_zero(), "inexact polynomial division");
            return IntPoly::zero();
        }
        let mut q = vec![BigInt::zero(); da - db + 1];
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let (qc, rem) = r.leading().unwrap().div_rem(lb);
            assert!(rem.is_zero(), "inexact polynomial division");
            let shift = dr - db;
            let mut coeffs = r.coeffs.clone();
            for (i, c) in divisor.coeffs.iter().enumerate() {
                coeffs[i + shift] -= &qc * c;
            }
            q[shift] = qc;
            r = IntPoly::new(coeffs);
        }
        assert!(r.is_zero(), "inexact polynomial division");
        IntPoly::new(q)
    }

    /// Square-free part: the primitive polynomial with the same roots, all simple.
    pub fn square_free(&self) -> IntPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.primitive();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            self.primitive()
        } else {
            self.primitive().div_exact(&g)
        }
    }
}

pub(crate) fn sign_of(x: &BigInt) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Number of sign changes in a coefficient sequence, zeros skipped.
pub(crate) fn sign_variations(coeffs: &[BigInt]) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for c in coeffs {
        let s = sign_of(c);
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// In-place substitution `y -> y + 1`.
pub(crate) fn taylor_shift_one(a: &mut [BigInt]) {
    let n = a.len();
    for i in 0..n.saturating_sub(1) {
        for j in (i..n - 1).rev() {
            let next = a[j + 1].clone();
            a[j] += next;
        }
    }
}

/// Descartes bound for the number of roots in `(0, 1)`: sign variations of
/// `(1 + y)^d P(1 / (1 + y))`. Exact when it returns 0 or 1.
pub(crate) fn descartes_unit(p: &IntPoly) -> usize {
    let mut r: Vec<BigInt> = p.coeffs.iter().rev().cloned().collect();
    taylor_shift_one(&mut r);
    sign_variations(&r)
}

/// Descartes bound for the number of roots in the open interval `(lo, hi)`.
pub fn descartes_bound(p: &IntPoly, lo: &BigRational, hi: &BigRational) -> usize {
    if p.degree().unwrap_or(0) == 0 {
        return 0;
    }
    descartes_unit(&p.substitute_interval(lo, hi))
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i);
            let b = rhs.coeffs.get(i);
            out.push(match (a, b) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        IntPoly::new(out)
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        self + &(-rhs)
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn gcd_of_products() {
        // (t-1)(t+2) and (t-1)(t-3)
        let a = &IntPoly::from_i64(&[-1, 1]) * &IntPoly::from_i64(&[2, 1]);
        let b = &IntPoly::from_i64(&[-1, 1]) * &IntPoly::from_i64(&[-3, 1]);
        assert_eq!(a.gcd(&b), IntPoly::from_i64(&[-1, 1]));
    }

    #[test]
    fn square_free_removes_repeats() {
        let l = IntPoly::from_i64(&[-1, 2]);
        let p = &(&l * &l) * &IntPoly::from_i64(&[5, 0, 1]);
        assert_eq!(p.square_free(), &l * &IntPoly::from_i64(&[5, 0, 1]));
    }

    #[test]
    fn homogeneous_evaluation_matches_rational() {
        let p = IntPoly::from_i64(&[3, -7, 0, 2]);
        let t = r(-5, 3);
        let direct = r(3, 1) - r(7, 1) * &t + r(2, 1) * &t * &t * &t;
        assert_eq!(p.eval(&t), direct);
        assert_eq!(p.sign_at(&t), 1);
    }

    #[test]
    fn substitution_preserves_root_positions() {
        // roots 1/3 and 2/3 of (3t-1)(3t-2) map to 1/4 and 3/4 on (1/6, 5/6)
        let p = &IntPoly::from_i64(&[-1, 3]) * &IntPoly::from_i64(&[-2, 3]);
        let q = p.substitute_interval(&r(1, 6), &r(5, 6));
        assert_eq!(q.sign_at(&r(1, 4)), 0);
        assert_eq!(q.sign_at(&r(3, 4)), 0);
        assert_eq!(q.sign_at(&r(0, 1)), p.sign_at(&r(1, 6)));
        assert_eq!(descartes_unit(&q), 2);
    }

    #[test]
    fn div_exact_roundtrip() {
        let a = IntPoly::from_i64(&[4, -3, 0, 7]);
        let b = IntPoly::from_i64(&[-2, 5, 1]);
        assert_eq!((&a * &b).div_exact(&b), a);
    }
}
