//! Built-in spaces: the ℓ¹/ℓ∞ balls, polygonal discs, seeded random
//! polytope balls, and the two smooth examples whose dual balls have
//! non-closed sets of extreme sets.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{self, dot, q, qf, Q, QVec};
use crate::convexfn::{AffinePiece, MaxAffine, RealFunction};
use crate::geometry::{convex_hull, Halfspace, Polytope};
use crate::normedspace::{realize_ball, BallKind, BallSpec, CircleMode, NormedSpace, Piece, SmoothNorm};
use crate::{Error, Result};

fn unit(d: usize, i: usize, sign: i64) -> QVec {
    (0..d).map(|k| if k == i { q(sign) } else { Q::zero() }).collect()
}

fn cross_polytope(d: usize) -> Polytope {
    let pts: Vec<QVec> = (0..d).flat_map(|i| [unit(d, i, 1), unit(d, i, -1)]).collect();
    convex_hull(&pts).expect("cross polytope")
}

fn cube(d: usize) -> Polytope {
    let pts: Vec<QVec> = (0..1usize << d)
        .map(|mask| (0..d).map(|i| if mask >> i & 1 == 1 { q(1) } else { q(-1) }).collect())
        .collect();
    convex_hull(&pts).expect("cube")
}

/// `||x|| = max |x_i|`.
pub fn linf(d: usize) -> Result<NormedSpace> {
    check_dim(d)?;
    NormedSpace::from_dual(cross_polytope(d))
}

/// `||x|| = Σ |x_i|`.
pub fn l1(d: usize) -> Result<NormedSpace> {
    check_dim(d)?;
    NormedSpace::from_dual(cube(d))
}

fn check_dim(d: usize) -> Result<()> {
    if (1..=6).contains(&d) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("dimension {d} outside 1..=6")))
    }
}

/// The plane with unit ball the `m`-gon inscribed in the Euclidean disc.
pub fn euclid(m: usize) -> Result<NormedSpace> {
    if m < 3 {
        return Err(Error::InvalidInput("a polygonal disc needs m >= 3".into()));
    }
    let pts: Vec<QVec> = crate::normedspace::unit_circle_points(m).into_iter().map(|(c, s)| vec![c, s]).collect();
    NormedSpace::from_ball(convex_hull(&pts)?)
}

/// A seeded random rational polytope ball in `R^d` with `extra + d + 1`
/// candidate vertices; typically not centrally symmetric.
pub fn random_polytope_ball(d: usize, extra: usize, seed: u64) -> Result<NormedSpace> {
    check_dim(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let pts: Vec<QVec> = (0..d + 1 + extra)
            .map(|_| (0..d).map(|_| qf(rng.gen_range(-12..=12), rng.gen_range(2..=6))).collect())
            .collect();
        let Ok(ball) = convex_hull(&pts) else { continue };
        if let Ok(space) = NormedSpace::from_ball(ball) {
            return Ok(space);
        }
    }
    Err(Error::Precondition("could not draw a ball with the origin inside".into()))
}

/// An evaluator for `x -> <a, x>` in floating point.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear(pub Vec<f64>);

impl RealFunction for Linear {
    fn eval(&self, x: &[f64]) -> f64 {
        arith::dot_f64(&self.0, x)
    }
}

/// Rational points on the unit circle tending to `(1, 0)` from above:
/// `((n² - 1)/(n² + 1), 2n/(n² + 1))` for `n = 2, 4, 8, ...`; the angle
/// is about `2/n`.
pub fn pythagorean_approach(count: usize) -> Vec<(Q, Q)> {
    (1..=count.min(30) as u32)
        .map(|k| {
            let n = 1i64 << k;
            let den = q(n * n + 1);
            (q(n * n - 1) / &den, q(2 * n) / &den)
        })
        .collect()
}

fn maxaff(pieces: &[(&[i64], i64)]) -> MaxAffine {
    MaxAffine::new(pieces.iter().map(|(g, b)| AffinePiece::new(arith::qvec(g), q(*b))).collect())
        .expect("nonempty")
}

/// `R³` with `||(x, y, z)|| = max(|x| + |z|, sqrt(x² + y²))`. The dual ball
/// is the convex hull of the square with corners `(±1, 0, ±1)` and the unit
/// circle in the `xy`-plane.
pub mod example2 {
    use super::*;

    /// The unit ball as an intersection; the cylinder is replaced by `m`
    /// tangent planes, so the realised dual ball is the hull of the square
    /// and `m` exact points of the circle.
    pub fn spec(m: usize) -> BallSpec {
        let mut halfspaces = Vec::new();
        for sx in [-1, 1] {
            for sz in [-1, 1] {
                halfspaces.push(Halfspace::new(arith::qvec(&[sx, 0, sz]), q(1)));
            }
        }
        BallSpec {
            dimension: 3,
            kind: BallKind::HpolytopeIntersection,
            dual_side: false,
            pieces: vec![
                Piece::Halfspaces { halfspaces },
                Piece::Circle {
                    center: arith::qvec(&[0, 0, 0]),
                    axis1: arith::qvec(&[1, 0, 0]),
                    axis2: arith::qvec(&[0, 1, 0]),
                    radius: q(1),
                },
            ],
            discretization: m,
            circle_mode: CircleMode::Circumscribed,
        }
    }

    pub fn space(m: usize) -> Result<NormedSpace> {
        Ok(realize_ball(&spec(m))?.with_smooth(SmoothNorm::PrismCylinder))
    }

    /// `p_n = (cos(1/n), sin(1/n), 0)`.
    pub fn p_n(n: u32) -> Vec<f64> {
        let a = 1.0 / n as f64;
        vec![a.cos(), a.sin(), 0.0]
    }

    /// `ξ_n(x) = -<p_n, x>`, the limit of `φ_{m p_n}` as `m -> ∞`.
    pub fn xi_n(n: u32) -> Linear {
        Linear(p_n(n).iter().map(|c| -c).collect())
    }

    /// `f(x, y, z) = -x`.
    pub fn f() -> MaxAffine {
        maxaff(&[(&[-1, 0, 0], 0)])
    }

    /// `-x + z` for `z >= 0`, `-x` otherwise.
    pub fn f1() -> MaxAffine {
        maxaff(&[(&[-1, 0, 1], 0), (&[-1, 0, 0], 0)])
    }

    /// `-x` for `z >= 0`, `-x - z` otherwise.
    pub fn f2() -> MaxAffine {
        maxaff(&[(&[-1, 0, 0], 0), (&[-1, 0, -1], 0)])
    }

    /// Exact square corners together with the point `(1, 0, 0)`; every
    /// point lies in the dual ball.
    pub fn square() -> Vec<QVec> {
        let mut pts = Vec::new();
        for sx in [-1, 1] {
            for sz in [-1, 1] {
                pts.push(arith::qvec(&[sx, 0, sz]));
            }
        }
        pts
    }

    /// Rational extreme points `u_k` of the dual ball on the circle,
    /// converging to `(1, 0, 0)`; `{u_k}` is exposed by `<u_k, .> <= 1`.
    pub fn witness_points(count: usize) -> Vec<QVec> {
        pythagorean_approach(count).into_iter().map(|(c, s)| vec![c, s, Q::zero()]).collect()
    }

    /// Symbolic proof that `{u}` is an exposed point of the exact dual
    /// ball: `u` on the unit circle in the `xy`-plane with `|u_x| < 1`, so
    /// `<u, .>` is `< 1` on the square corners and on the circle away from
    /// `u` (Cauchy–Schwarz).
    pub fn certify_exposed_point(u: &[Q]) -> bool {
        u.len() == 3
            && u[2].is_zero()
            && (&u[0] * &u[0] + &u[1] * &u[1]).is_one()
            && u[0].abs() < Q::one()
    }

    pub fn limit_point() -> QVec {
        arith::qvec(&[1, 0, 0])
    }
}

/// `R⁴` with coordinates `(x, y, w, z)` and dual ball the convex hull of
/// the four circles `S₁^± = {(x, y, ±1, 0) : x² + y² = 1}` and
/// `S₂^± = {(±1, 0, w, z) : w² + z² = 1}`.
pub mod example3 {
    use super::*;

    pub fn spec(m: usize) -> BallSpec {
        let circle = |center: &[i64], a1: &[i64], a2: &[i64]| Piece::Circle {
            center: arith::qvec(center),
            axis1: arith::qvec(a1),
            axis2: arith::qvec(a2),
            radius: q(1),
        };
        BallSpec {
            dimension: 4,
            kind: BallKind::Hull,
            dual_side: true,
            pieces: vec![
                circle(&[0, 0, 1, 0], &[1, 0, 0, 0], &[0, 1, 0, 0]),
                circle(&[0, 0, -1, 0], &[1, 0, 0, 0], &[0, 1, 0, 0]),
                circle(&[1, 0, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]),
                circle(&[-1, 0, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]),
            ],
            discretization: m,
            circle_mode: CircleMode::Inscribed,
        }
    }

    pub fn space(m: usize) -> Result<NormedSpace> {
        Ok(realize_ball(&spec(m))?.with_smooth(SmoothNorm::FourCircles))
    }

    /// Point of `S₁^{sign}` at angle `t`.
    pub fn s1(t: f64, sign: f64) -> [f64; 4] {
        [t.cos(), t.sin(), sign, 0.0]
    }

    /// Point of `S₂^{sign}` at angle `t`.
    pub fn s2(t: f64, sign: f64) -> [f64; 4] {
        [sign, 0.0, t.cos(), t.sin()]
    }

    /// `f_θ = x cos θ + y sin θ + z (1 - cos θ)`, a functional on the dual
    /// space bounded by 1 on the dual ball.
    pub fn f_theta(theta: f64) -> [f64; 4] {
        [theta.cos(), theta.sin(), 0.0, 1.0 - theta.cos()]
    }

    pub fn t_theta(theta: f64) -> [[f64; 4]; 3] {
        let (c, s) = (theta.cos(), theta.sin());
        [[c, s, -1.0, 0.0], [c, s, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0]]
    }

    /// `T_θ` for a rational point `(c, s)` of the unit circle.
    pub fn t_exact(c: &Q, s: &Q) -> Vec<QVec> {
        vec![
            vec![c.clone(), s.clone(), q(-1), Q::zero()],
            vec![c.clone(), s.clone(), q(1), Q::zero()],
            arith::qvec(&[1, 0, 0, 1]),
        ]
    }

    /// Exact version of `f_θ` for `cos θ = c`, `sin θ = s`.
    pub fn f_exact(c: &Q, s: &Q) -> QVec {
        vec![c.clone(), s.clone(), Q::zero(), Q::one() - c]
    }

    /// Symbolic proof that `T_θ` is the face `{f_θ = 1}` of the exact dual
    /// ball: for `c² + s² = 1` and `0 < c < 1`, `f_θ = cx + sy <= 1` on
    /// `S₁^±` with equality at `(c, s, ±1, 0)`, and
    /// `f_θ = ±c + (1 - c) z <= 1` on `S₂^±` with equality only at
    /// `(1, 0, 0, 1)`.
    pub fn certify_face(c: &Q, s: &Q) -> bool {
        (c * c + s * s).is_one() && c.is_positive() && c < &Q::one() && {
            let f = f_exact(c, s);
            t_exact(c, s).iter().all(|v| dot(&f, v).is_one())
        }
    }

    pub fn limit_triangle() -> Vec<QVec> {
        vec![arith::qvec(&[1, 0, -1, 0]), arith::qvec(&[1, 0, 1, 0]), arith::qvec(&[1, 0, 0, 1])]
    }

    /// Inscribed `m`-gon of the disc `conv S₂^+`.
    pub fn s2_plus_disc(m: usize) -> Result<Polytope> {
        let pts: Vec<QVec> = crate::normedspace::unit_circle_points(m)
            .into_iter()
            .map(|(c, s)| vec![q(1), Q::zero(), c, s])
            .collect();
        convex_hull(&pts)
    }

    /// `g = max(x - w, x + w, x + z)`.
    pub fn g() -> MaxAffine {
        maxaff(&[(&[1, 0, -1, 0], 0), (&[1, 0, 1, 0], 0), (&[1, 0, 0, 1], 0)])
    }

    /// The largest double `c` with `2c² <= 1`, standing in for `1/√2` so
    /// that `(1, 0, ±c, c)` stays inside `conv S₂^+`.
    pub fn inv_sqrt2() -> Q {
        let mut c = std::f64::consts::FRAC_1_SQRT_2;
        loop {
            let e = arith::from_f64(c).expect("finite");
            if q(2) * &e * &e <= Q::one() {
                return e;
            }
            c = f64::from_bits(c.to_bits() - 1);
        }
    }

    fn with_extra(wsign: i64) -> MaxAffine {
        let c = inv_sqrt2();
        let mut pieces = g().pieces().to_vec();
        let w = if wsign > 0 { c.clone() } else { -c.clone() };
        pieces.push(AffinePiece::new(vec![q(1), Q::zero(), w, c], Q::zero()));
        MaxAffine::new(pieces).expect("nonempty")
    }

    /// `max(x - w, x + w, x + z, x + w/√2 + z/√2)`.
    pub fn g1() -> MaxAffine {
        with_extra(1)
    }

    /// `max(x - w, x + w, x + z, x - w/√2 + z/√2)`.
    pub fn g2() -> MaxAffine {
        with_extra(-1)
    }
}

/// Name-addressable built-in spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Linf(usize),
    L1(usize),
    Euclid(usize),
    Example2,
    Example3,
}

impl Builtin {
    /// Accepts `linf`, `l1`, `euclid-<m>`, `example2`, `example3`;
    /// `dim` applies to the first two.
    pub fn parse(name: &str, dim: usize) -> Result<Builtin> {
        match name {
            "linf" => Ok(Builtin::Linf(dim)),
            "l1" => Ok(Builtin::L1(dim)),
            "example2" => Ok(Builtin::Example2),
            "example3" => Ok(Builtin::Example3),
            _ => {
                if let Some(m) = name.strip_prefix("euclid-") {
                    let m = m.parse().map_err(|_| Error::InvalidInput(format!("bad polygon size in {name:?}")))?;
                    Ok(Builtin::Euclid(m))
                } else {
                    Err(Error::InvalidInput(format!("unknown builtin {name:?}")))
                }
            }
        }
    }

    /// Realises the space; `m` is the circle discretization of the smooth
    /// examples.
    pub fn space(self, m: usize) -> Result<NormedSpace> {
        match self {
            Builtin::Linf(d) => linf(d),
            Builtin::L1(d) => l1(d),
            Builtin::Euclid(k) => euclid(k),
            Builtin::Example2 => example2::space(m),
            Builtin::Example3 => example3::space(m),
        }
    }

    pub fn is_smooth_example(self) -> bool {
        matches!(self, Builtin::Example2 | Builtin::Example3)
    }
}
