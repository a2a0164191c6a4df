//! Balls, gauges, metrics and the distance functions `φ_z`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, dot, Q, QVec};
use crate::convexfn::{AffineOnPolytope, AffinePiece, MaxAffine, RealFunction};
use crate::geometry::{convex_hull, from_hrep, polar, Halfspace, Polytope};
use crate::lp::{self, LpOutcome};
use crate::{Error, Result};

/// Evaluation access to a (possibly asymmetric) gauge.
pub trait Gauge: Sync {
    fn dimension(&self) -> usize;

    fn gauge(&self, z: &[f64]) -> f64;

    /// Axis-aligned box containing the closed unit ball.
    fn unit_ball_box(&self) -> (Vec<f64>, Vec<f64>);

    /// `d(x, y) = ||y - x||`.
    fn metric(&self, x: &[f64], y: &[f64]) -> f64 {
        let diff: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        self.gauge(&diff)
    }
}

/// Closed-form norms of the two smooth built-in spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothNorm {
    /// `max(|x| + |z|, sqrt(x² + y²))` on R³.
    PrismCylinder,
    /// `max(sqrt(x² + y²) + |w|, sqrt(w² + z²) + |x|)` on R⁴ with
    /// coordinates ordered `(x, y, w, z)`; its dual ball is the convex hull
    /// of four unit circles.
    FourCircles,
}

impl Gauge for SmoothNorm {
    fn dimension(&self) -> usize {
        match self {
            SmoothNorm::PrismCylinder => 3,
            SmoothNorm::FourCircles => 4,
        }
    }

    fn gauge(&self, v: &[f64]) -> f64 {
        match self {
            SmoothNorm::PrismCylinder => (v[0].abs() + v[2].abs()).max(v[0].hypot(v[1])),
            SmoothNorm::FourCircles => (v[0].hypot(v[1]) + v[2].abs()).max(v[2].hypot(v[3]) + v[0].abs()),
        }
    }

    fn unit_ball_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dimension();
        (vec![-1.0; d], vec![1.0; d])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallKind {
    #[default]
    Vpolytope,
    Hull,
    HpolytopeIntersection,
}

/// How circle constraints enter an intersection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircleMode {
    /// Tangent half-spaces; the polygon contains the disc.
    #[default]
    Circumscribed,
    /// Chord half-spaces; the polygon is contained in the disc.
    Inscribed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Piece {
    Circle {
        #[serde(with = "crate::json::qvec_serde")]
        center: QVec,
        #[serde(with = "crate::json::qvec_serde")]
        axis1: QVec,
        #[serde(with = "crate::json::qvec_serde")]
        axis2: QVec,
        #[serde(with = "crate::json::q_serde")]
        radius: Q,
    },
    Points {
        #[serde(with = "crate::json::qvecs_serde")]
        points: Vec<QVec>,
    },
    /// `<normal_i, x> <= offset_i`; only meaningful in intersections.
    Halfspaces { halfspaces: Vec<Halfspace> },
}

fn default_discretization() -> usize {
    64
}

/// Declarative description of a unit ball (or, with `dual_side`, of the
/// dual ball).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub dimension: usize,
    pub kind: BallKind,
    #[serde(default)]
    pub dual_side: bool,
    pub pieces: Vec<Piece>,
    #[serde(default = "default_discretization")]
    pub discretization: usize,
    #[serde(default)]
    pub circle_mode: CircleMode,
}

impl BallSpec {
    pub fn from_json(text: &str) -> Result<BallSpec> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("ball spec: {e}")))
    }

    pub fn has_circles(&self) -> bool {
        self.pieces.iter().any(|p| matches!(p, Piece::Circle { .. }))
    }
}

const CIRCLE_DENOMINATOR: i64 = 1 << 16;

/// Rational points exactly on the unit circle at angles close to
/// `2πk/m`, `k = 0..m`. Axis angles are hit exactly and the set is
/// invariant under the coordinate reflections.
pub fn unit_circle_points(m: usize) -> Vec<(Q, Q)> {
    assert!(m >= 3, "a circle needs at least three sample points");
    let d = Q::from_integer(CIRCLE_DENOMINATOR.into());
    (0..m)
        .map(|k| {
            let quadrant = (4 * k) / m;
            let r = 4 * k - quadrant * m;
            let (swap, num) = if 2 * r > m { (true, m - r) } else { (false, r) };
            let phi = std::f64::consts::FRAC_PI_2 * num as f64 / m as f64;
            let t_int = ((phi / 2.0).tan() * CIRCLE_DENOMINATOR as f64).round() as i64;
            let t = Q::from_integer(t_int.into()) / &d;
            let denom = Q::one() + &t * &t;
            let c = (Q::one() - &t * &t) / &denom;
            let s = (arith::q(2) * &t) / &denom;
            let (mut x, mut y) = if swap { (s, c) } else { (c, s) };
            for _ in 0..quadrant {
                let nx = -y;
                y = x;
                x = nx;
            }
            (x, y)
        })
        .collect()
}

/// A rational point exactly on the unit circle at angle close to `phi`.
pub fn rational_circle_point(phi: f64) -> (Q, Q) {
    let quarter = std::f64::consts::FRAC_PI_2;
    let k = (phi / quarter).round();
    let r = phi - k * quarter;
    let scale = (1i64 << 20) as f64;
    let t = Q::new((((r / 2.0).tan() * scale).round() as i64).into(), (1i64 << 20).into());
    let denom = Q::one() + &t * &t;
    let (mut x, mut y) = ((Q::one() - &t * &t) / &denom, (arith::q(2) * &t) / &denom);
    for _ in 0..(k as i64).rem_euclid(4) {
        let nx = -y;
        y = x;
        x = nx;
    }
    (x, y)
}

fn check_circle(dimension: usize, center: &QVec, a1: &QVec, a2: &QVec, radius: &Q) -> Result<()> {
    if center.len() != dimension || a1.len() != dimension || a2.len() != dimension {
        return Err(Error::InvalidInput("circle piece has wrong dimension".into()));
    }
    if !dot(a1, a2).is_zero() || !dot(a1, a1).is_one() || !dot(a2, a2).is_one() {
        return Err(Error::InvalidInput("circle axes must be exactly orthonormal".into()));
    }
    if !radius.is_positive() {
        return Err(Error::InvalidInput("circle radius must be positive".into()));
    }
    Ok(())
}

pub fn circle_point(center: &QVec, a1: &QVec, a2: &QVec, radius: &Q, c: &Q, s: &Q) -> QVec {
    (0..center.len())
        .map(|i| &center[i] + radius * (c * &a1[i] + s * &a2[i]))
        .collect()
}

fn realize_body(spec: &BallSpec) -> Result<Polytope> {
    let d = spec.dimension;
    if d == 0 || d > 6 {
        return Err(Error::InvalidInput(format!("dimension {d} outside 1..=6")));
    }
    if spec.discretization < 3 {
        return Err(Error::InvalidInput("discretization must be at least 3".into()));
    }
    match spec.kind {
        BallKind::Vpolytope | BallKind::Hull => {
            let mut pts: Vec<QVec> = Vec::new();
            for piece in &spec.pieces {
                match piece {
                    Piece::Points { points } => pts.extend(points.iter().cloned()),
                    Piece::Circle { center, axis1, axis2, radius } => {
                        if spec.kind == BallKind::Vpolytope {
                            return Err(Error::InvalidInput("vpolytope balls take point pieces only".into()));
                        }
                        check_circle(d, center, axis1, axis2, radius)?;
                        for (c, s) in unit_circle_points(spec.discretization) {
                            pts.push(circle_point(center, axis1, axis2, radius, &c, &s));
                        }
                    }
                    Piece::Halfspaces { .. } => {
                        return Err(Error::InvalidInput("halfspace pieces need kind hpolytope-intersection".into()))
                    }
                }
            }
            if let Some(p) = pts.iter().find(|p| p.len() != d) {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
            convex_hull(&pts)
        }
        BallKind::HpolytopeIntersection => {
            let mut hs: Vec<Halfspace> = Vec::new();
            for piece in &spec.pieces {
                match piece {
                    Piece::Halfspaces { halfspaces } => hs.extend(halfspaces.iter().cloned()),
                    Piece::Points { points } => {
                        let p = convex_hull(points)?;
                        hs.extend(p.facets().iter().cloned());
                        for e in p.equations() {
                            hs.push(e.clone());
                            hs.push(Halfspace::new(arith::neg(&e.normal), -e.offset.clone()));
                        }
                    }
                    Piece::Circle { center, axis1, axis2, radius } => {
                        check_circle(d, center, axis1, axis2, radius)?;
                        let pts = unit_circle_points(spec.discretization);
                        for k in 0..pts.len() {
                            let (c, s) = &pts[k];
                            let normal: QVec = match spec.circle_mode {
                                CircleMode::Circumscribed => (0..d).map(|i| c * &axis1[i] + s * &axis2[i]).collect(),
                                CircleMode::Inscribed => {
                                    let (c2, s2) = &pts[(k + 1) % pts.len()];
                                    (0..d).map(|i| (c + c2) * &axis1[i] + (s + s2) * &axis2[i]).collect()
                                }
                            };
                            let rhs = match spec.circle_mode {
                                CircleMode::Circumscribed => radius.clone(),
                                CircleMode::Inscribed => {
                                    let (c2, s2) = &pts[(k + 1) % pts.len()];
                                    radius * (Q::one() + c * c2 + s * s2)
                                }
                            };
                            let offset = dot(&normal, center) + rhs;
                            hs.push(Halfspace::new(normal, offset));
                        }
                    }
                }
            }
            from_hrep(d, &hs)
        }
    }
}

/// A finite-dimensional normed space realised through its polytopal unit
/// ball and dual ball, optionally carrying the exact smooth norm the
/// polytopes discretise.
#[derive(Clone, Debug)]
pub struct NormedSpace {
    ball: Polytope,
    dual: Polytope,
    smooth: Option<SmoothNorm>,
}

pub fn realize_ball(spec: &BallSpec) -> Result<NormedSpace> {
    let body = realize_body(spec)?;
    if spec.dual_side {
        let ball = polar(&body)?;
        Ok(NormedSpace { ball, dual: body, smooth: None })
    } else {
        NormedSpace::from_ball(body)
    }
}

impl NormedSpace {
    pub fn from_ball(ball: Polytope) -> Result<NormedSpace> {
        let dual = polar(&ball)?;
        Ok(NormedSpace { ball, dual, smooth: None })
    }

    pub fn from_dual(dual: Polytope) -> Result<NormedSpace> {
        let ball = polar(&dual)?;
        Ok(NormedSpace { ball, dual, smooth: None })
    }

    pub fn with_smooth(mut self, smooth: SmoothNorm) -> Self {
        self.smooth = Some(smooth);
        self
    }

    pub fn smooth(&self) -> Option<SmoothNorm> {
        self.smooth
    }

    pub fn ball(&self) -> &Polytope {
        &self.ball
    }

    pub fn dual(&self) -> &Polytope {
        &self.dual
    }

    /// `max_{y in B°} -<y, z>`, exact.
    pub fn gauge_exact(&self, z: &[Q]) -> Q {
        support_neg(&self.dual, z)
    }

    /// `min {t >= 0 : z in t B}` by linear programming over the vertices of
    /// `B`; independent of the dual ball.
    pub fn gauge_primal(&self, z: &[Q]) -> Q {
        let verts = self.ball.vertices();
        let d = self.dimension();
        let a: Vec<QVec> = (0..d).map(|i| verts.iter().map(|v| v[i].clone()).collect()).collect();
        let c: QVec = vec![Q::one(); verts.len()];
        match lp::minimize(&c, &a, z) {
            LpOutcome::Optimal(s) => s.value,
            other => panic!("gauge LP must be feasible and bounded, got {other:?}"),
        }
    }

    pub fn metric_exact(&self, x: &[Q], y: &[Q]) -> Q {
        self.gauge_exact(&arith::sub(y, x))
    }

    pub fn phi<'a>(&'a self, z: &[f64]) -> PhiFunction<'a> {
        PhiFunction::new(self, z)
    }

    /// `φ_z` as a max-affine function with one piece per dual vertex.
    pub fn phi_max_affine(&self, z: &[Q]) -> MaxAffine {
        let norm = self.gauge_exact(z);
        let pieces = self
            .dual
            .vertices()
            .iter()
            .map(|v| AffinePiece::new(v.clone(), -dot(v, z) - &norm))
            .collect();
        MaxAffine::new(pieces).expect("dual ball has vertices")
    }

    /// `φ*_z = I_{B°} + <., z> + ||z||`.
    pub fn phi_star_closed_form(&self, z: &[Q]) -> AffineOnPolytope {
        AffineOnPolytope::new(self.dual.clone(), z.to_vec(), self.gauge_exact(z))
            .expect("dual ball is a valid domain")
    }
}

impl Gauge for NormedSpace {
    fn dimension(&self) -> usize {
        self.ball.dimension()
    }

    fn gauge(&self, z: &[f64]) -> f64 {
        -self.dual.min_dot_f64(z)
    }

    fn unit_ball_box(&self) -> (Vec<f64>, Vec<f64>) {
        self.ball.bounding_box_f64()
    }
}

/// `|p|_C = -inf_{q in C} <q, p>`; equals the gauge for `C = B°` and can
/// be negative for other sets.
pub fn support_neg(c: &Polytope, p: &[Q]) -> Q {
    -c.min_dot(p)
}

pub fn support_neg_f64(c: &Polytope, p: &[f64]) -> f64 {
    -c.min_dot_f64(p)
}

/// `x -> ||z - x|| - ||z||`.
#[derive(Clone)]
pub struct PhiFunction<'a> {
    gauge: &'a dyn Gauge,
    z: Vec<f64>,
    norm_z: f64,
}

impl<'a> PhiFunction<'a> {
    pub fn new(gauge: &'a dyn Gauge, z: &[f64]) -> Self {
        PhiFunction { gauge, z: z.to_vec(), norm_z: gauge.gauge(z) }
    }

    pub fn base(&self) -> &[f64] {
        &self.z
    }
}

impl RealFunction for PhiFunction<'_> {
    fn eval(&self, x: &[f64]) -> f64 {
        let diff: Vec<f64> = self.z.iter().zip(x).map(|(a, b)| a - b).collect();
        self.gauge.gauge(&diff) - self.norm_z
    }
}
