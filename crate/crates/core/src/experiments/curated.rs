//! Quadratic scenes built to exhibit pairs of double Delaunay crossings.
//!
//! A point `r` dips along a parabola through the edge `pq` and the edge `pa`
//! below it, then climbs back out. Removing `r` leaves both edges Delaunay, so
//! each edge undergoes a double crossing by `r`, and the two crossings share
//! the endpoint `p`. The remaining points sit on a far ring and drift slowly.

use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::motion::MovingPoint;

/// Number of points in the core gadget.
pub const GADGET_SIZE: usize = 6;

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Integer grid value in `[-m, m]` scaled by `1/den`.
fn jitter(rng: &mut ChaCha8Rng, m: i64, den: i64) -> BigRational {
    rat(rng.gen_range(-m..=m), den)
}

fn fixed(id: u32, x: BigRational, y: BigRational) -> MovingPoint {
    MovingPoint::new(id, vec![x], vec![y])
}

/// The gadget `p, q, u, a, b, r` (ids 0 to 5) plus `n - 6` ring points.
///
/// `p = (0, 0)`, `q = (10, 0)` and `u` above them keep `pq` Delaunay without `r`;
/// `a` below the line makes `pa` the next edge around `p`, and `b` closes the
/// triangulation under `pa`. Coordinates are jittered so that every scene is in
/// general position.
pub fn double_crossing_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<MovingPoint> {
    let mut pts = Vec::with_capacity(n.max(GADGET_SIZE));
    let j = |rng: &mut ChaCha8Rng| jitter(rng, 16, 256);
    pts.push(fixed(0, j(rng), j(rng)));
    pts.push(fixed(1, rat(10, 1) + j(rng), j(rng)));
    pts.push(fixed(2, rat(5, 1) + j(rng), rat(5, 1) + j(rng)));
    pts.push(fixed(3, rat(14, 1) + j(rng), rat(-7, 1) + j(rng)));
    pts.push(fixed(4, rat(4, 1) + j(rng), rat(-20, 1) + j(rng)));
    // r(t) = (x0 + d t, 3 - 4 h t (1 - t)) dips to depth 3 - h at t = 1/2
    let x0 = rat(5, 1) + j(rng);
    let drift = jitter(rng, 64, 256);
    let h = rat(13, 2) + jitter(rng, 32, 256);
    let four_h = rat(4, 1) * &h;
    pts.push(MovingPoint::new(
        5,
        vec![x0, drift],
        vec![rat(3, 1), -four_h.clone(), four_h],
    ));
    for id in GADGET_SIZE..n {
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let radius = rng.gen_range(60.0..90.0);
        let to_grid = |v: f64| rat((v * 256.0).round() as i64, 256);
        let x = to_grid(5.0 + radius * angle.cos());
        let y = to_grid(-5.0 + radius * angle.sin());
        pts.push(MovingPoint::new(
            id as u32,
            vec![x, jitter(rng, 256, 256)],
            vec![y, jitter(rng, 256, 256)],
        ));
    }
    pts
}
