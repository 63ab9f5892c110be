//! Moving points with polynomial trajectories, motion families and scene generation.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{KdtError, Result};
use crate::poly::IntPoly;

/// Exact time value.
pub type Time = BigRational;

/// Trajectory family; fixes the degree and the declared event bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MotionFamily {
    /// Independent random linear motion.
    GenericLinear,
    /// Points on the x-axis at time 0 moving with unit speed in rational directions.
    UnitSpeedFromLine,
    /// Random polynomial trajectories of the given degree.
    GenericPoly(u32),
    /// Hand-built quadratic scenes that exhibit double crossings.
    CuratedQuadratic,
}

impl MotionFamily {
    /// Maximum trajectory degree.
    pub fn degree(self) -> u32 {
        match self {
            MotionFamily::GenericLinear | MotionFamily::UnitSpeedFromLine => 1,
            MotionFamily::GenericPoly(d) => d,
            MotionFamily::CuratedQuadratic => 2,
        }
    }

    /// Maximum number of cocircularities of one 4-tuple.
    pub fn s_bound(self) -> usize {
        match self {
            MotionFamily::UnitSpeedFromLine => 2,
            f => 4 * f.degree() as usize,
        }
    }

    /// Maximum number of collinearities of one triple.
    pub fn c_bound(self) -> usize {
        match self {
            MotionFamily::UnitSpeedFromLine => 1,
            f => 2 * f.degree() as usize,
        }
    }

    /// Maximum number of times a given point lies on the segment of a given pair.
    pub fn ordered_c_bound(self) -> usize {
        self.c_bound()
    }

    /// Horizon used when a scene is generated without an explicit one.
    pub fn default_horizon(self) -> (Time, Time) {
        match self {
            MotionFamily::UnitSpeedFromLine => (BigRational::new(1.into(), 1024.into()), BigRational::one()),
            _ => (BigRational::zero(), BigRational::one()),
        }
    }
}

impl fmt::Display for MotionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MotionFamily::GenericLinear => write!(f, "GENERIC_LINEAR"),
            MotionFamily::UnitSpeedFromLine => write!(f, "UNIT_SPEED_FROM_LINE"),
            MotionFamily::GenericPoly(d) => write!(f, "GENERIC_POLY({d})"),
            MotionFamily::CuratedQuadratic => write!(f, "CURATED_QUADRATIC"),
        }
    }
}

impl FromStr for MotionFamily {
    type Err = KdtError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "GENERIC_LINEAR" => return Ok(MotionFamily::GenericLinear),
            "UNIT_SPEED_FROM_LINE" => return Ok(MotionFamily::UnitSpeedFromLine),
            "CURATED_QUADRATIC" => return Ok(MotionFamily::CuratedQuadratic),
            _ => {}
        }
        if let Some(d) = s.strip_prefix("GENERIC_POLY(").and_then(|r| r.strip_suffix(')')) {
            let d: u32 = d
                .trim()
                .parse()
                .map_err(|_| KdtError::InvalidInput(format!("bad degree in {s}")))?;
            if d == 0 {
                return Err(KdtError::InvalidInput("GENERIC_POLY degree must be positive".into()));
            }
            return Ok(MotionFamily::GenericPoly(d));
        }
        Err(KdtError::InvalidInput(format!("unknown motion family {s}")))
    }
}

impl Serialize for MotionFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MotionFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde helpers writing rationals as `"num/den"` strings.
pub mod rational_serde {
    use super::*;

    pub fn format(x: &BigRational) -> String {
        format!("{}/{}", x.numer(), x.denom())
    }

    pub fn parse(s: &str) -> Result<BigRational> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| KdtError::InvalidInput(format!("bad rational {s}")))?;
        let d: BigInt = d.parse().map_err(|_| KdtError::InvalidInput(format!("bad rational {s}")))?;
        if d.is_zero() {
            return Err(KdtError::InvalidInput(format!("zero denominator in {s}")));
        }
        Ok(BigRational::new(n, d))
    }

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
            let strs: Vec<String> = v.iter().map(format).collect();
            strs.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
            let strs = Vec::<String>::deserialize(d)?;
            strs.iter().map(|s| parse(s).map_err(serde::de::Error::custom)).collect()
        }
    }

    pub mod pair {
        use super::*;

        pub fn serialize<S: Serializer>(v: &(BigRational, BigRational), s: S) -> std::result::Result<S::Ok, S::Error> {
            [format(&v.0), format(&v.1)].serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<(BigRational, BigRational), D::Error> {
            let [a, b] = <[String; 2]>::deserialize(d)?;
            Ok((
                parse(&a).map_err(serde::de::Error::custom)?,
                parse(&b).map_err(serde::de::Error::custom)?,
            ))
        }
    }
}

/// A point whose coordinates are polynomials in time, coefficients in ascending order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovingPoint {
    pub id: u32,
    #[serde(with = "rational_serde::vec")]
    pub x: Vec<BigRational>,
    #[serde(with = "rational_serde::vec")]
    pub y: Vec<BigRational>,
}

impl MovingPoint {
    pub fn new(id: u32, x: Vec<BigRational>, y: Vec<BigRational>) -> Self {
        MovingPoint { id, x, y }
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_ints(id: u32, x: &[i64], y: &[i64]) -> Self {
        let conv = |v: &[i64]| v.iter().map(|&c| BigRational::from_integer(c.into())).collect();
        MovingPoint { id, x: conv(x), y: conv(y) }
    }

    pub fn degree(&self) -> usize {
        let deg = |v: &[BigRational]| v.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
        deg(&self.x).max(deg(&self.y))
    }
}

fn eval_rational(coeffs: &[BigRational], t: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

/// Position of a point at a rational time.
pub fn position(point: &MovingPoint, t: &Time) -> (BigRational, BigRational) {
    (eval_rational(&point.x, t), eval_rational(&point.y, t))
}

/// A set of moving points over a time horizon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scene {
    pub family: MotionFamily,
    pub seed: u64,
    #[serde(with = "rational_serde::pair")]
    pub horizon: (Time, Time),
    pub points: Vec<MovingPoint>,
}

impl Scene {
    pub fn new(family: MotionFamily, seed: u64, horizon: (Time, Time), points: Vec<MovingPoint>) -> Result<Self> {
        let scene = Scene { family, seed, horizon, points };
        scene.validate()?;
        Ok(scene)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Check ids are unique, the horizon is non-empty and degrees respect the family.
    pub fn validate(&self) -> Result<()> {
        if self.horizon.0 >= self.horizon.1 {
            return Err(KdtError::InvalidInput("empty horizon".into()));
        }
        let mut ids: Vec<u32> = self.points.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(KdtError::InvalidInput("duplicate point id".into()));
        }
        let max_deg = self.family.degree() as usize;
        if let Some(p) = self.points.iter().find(|p| p.degree() > max_deg) {
            return Err(KdtError::InvalidInput(format!(
                "point {} has degree {} above the family degree {}",
                p.id,
                p.degree(),
                max_deg
            )));
        }
        Ok(())
    }

    /// Index of the point with the given id.
    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.points.iter().position(|p| p.id == id)
    }

    pub fn id(&self, index: usize) -> u32 {
        self.points[index].id
    }

    /// Positions at time `t`, indexed like `points`.
    pub fn positions_at(&self, t: &Time) -> Vec<(BigRational, BigRational)> {
        self.points.iter().map(|p| position(p, t)).collect()
    }

    /// Coordinates scaled to integer polynomials by a common positive denominator.
    pub fn integer_form(&self) -> IntScene {
        let mut den = BigInt::one();
        for p in &self.points {
            for c in p.x.iter().chain(p.y.iter()) {
                den = den.lcm(c.denom());
            }
        }
        let conv = |v: &[BigRational]| {
            IntPoly::new(v.iter().map(|c| c.numer() * (&den / c.denom())).collect())
        };
        IntScene {
            x: self.points.iter().map(|p| conv(&p.x)).collect(),
            y: self.points.iter().map(|p| conv(&p.y)).collect(),
        }
    }

    /// Scene restricted to the given point indices.
    pub fn subset(&self, indices: &[usize]) -> Scene {
        Scene {
            family: self.family,
            seed: self.seed,
            horizon: self.horizon.clone(),
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Scene> {
        let scene: Scene = serde_json::from_str(s)?;
        scene.validate()?;
        Ok(scene)
    }
}

/// Integer-scaled trajectories; signs of all predicates agree with the original scene.
#[derive(Clone, Debug)]
pub struct IntScene {
    pub x: Vec<IntPoly>,
    pub y: Vec<IntPoly>,
}

impl IntScene {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Integer positions at time `t`, all scaled by one common positive factor.
    pub fn positions_at(&self, t: &Time) -> Vec<(BigInt, BigInt)> {
        let deg = self
            .x
            .iter()
            .chain(self.y.iter())
            .filter_map(IntPoly::degree)
            .max()
            .unwrap_or(0);
        let (n, d) = (t.numer(), t.denom());
        let lift = |p: &IntPoly| {
            let pd = p.degree().unwrap_or(0);
            let extra = num_traits::pow(d.clone(), deg - pd.min(deg));
            p.eval_homogeneous(n, d) * extra
        };
        self.x.iter().zip(&self.y).map(|(x, y)| (lift(x), lift(y))).collect()
    }
}

const GRID_BITS: u32 = 16;

fn grid_value(rng: &mut ChaCha8Rng, bits: u32) -> BigRational {
    let m = 1i64 << bits;
    BigRational::new(rng.gen_range(-m..=m).into(), m.into())
}

/// Generate a scene of `n` points from `family`, deterministic in `seed`.
///
/// Scenes failing the general-position check are regenerated from a derived
/// stream; the returned scene keeps the requested seed.
pub fn generate_scene(family: MotionFamily, n: usize, seed: u64, horizon: Option<(Time, Time)>) -> Result<Scene> {
    if n < 4 {
        return Err(KdtError::Precondition(format!("a scene needs at least 4 points, got {n}")));
    }
    let gadget = crate::experiments::curated::GADGET_SIZE;
    if family == MotionFamily::CuratedQuadratic && n < gadget {
        return Err(KdtError::Precondition(format!("curated scenes need at least {gadget} points, got {n}")));
    }
    let horizon = horizon.unwrap_or_else(|| family.default_horizon());
    if horizon.0 >= horizon.1 {
        return Err(KdtError::InvalidInput("empty horizon".into()));
    }
    const ATTEMPTS: u64 = 64;
    let mut last_err = None;
    for attempt in 0..ATTEMPTS {
        let stream = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ attempt;
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        let points = match family {
            MotionFamily::GenericLinear => (0..n)
                .map(|i| {
                    let x = vec![grid_value(&mut rng, GRID_BITS), grid_value(&mut rng, GRID_BITS)];
                    let y = vec![grid_value(&mut rng, GRID_BITS), grid_value(&mut rng, GRID_BITS)];
                    MovingPoint::new(i as u32, x, y)
                })
                .collect(),
            MotionFamily::UnitSpeedFromLine => (0..n).map(|i| unit_speed_point(&mut rng, i as u32)).collect(),
            MotionFamily::GenericPoly(d) => (0..n)
                .map(|i| {
                    let x = (0..=d).map(|_| grid_value(&mut rng, 8)).collect();
                    let y = (0..=d).map(|_| grid_value(&mut rng, 8)).collect();
                    MovingPoint::new(i as u32, x, y)
                })
                .collect(),
            MotionFamily::CuratedQuadratic => crate::experiments::curated::double_crossing_points(&mut rng, n),
        };
        let scene = Scene { family, seed, horizon: horizon.clone(), points };
        match crate::predicates::assert_general_position(&scene) {
            Ok(()) => return Ok(scene),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| KdtError::Degenerate("no valid scene".into())))
}

fn unit_speed_point(rng: &mut ChaCha8Rng, id: u32) -> MovingPoint {
    let x0 = grid_value(rng, GRID_BITS);
    let (u, v) = loop {
        let u: i64 = rng.gen_range(-128..=128);
        let v: i64 = rng.gen_range(1..=128);
        if u != 0 || v != 0 {
            break (u, v);
        }
    };
    let norm = BigInt::from(u * u + v * v);
    let c = BigRational::new(BigInt::from(v * v - u * u), norm.clone());
    let s = BigRational::new(BigInt::from(2 * u * v), norm);
    debug_assert!((&c * &c + &s * &s - BigRational::one()).is_zero());
    MovingPoint::new(id, vec![x0, c], vec![BigRational::zero(), s])
}
