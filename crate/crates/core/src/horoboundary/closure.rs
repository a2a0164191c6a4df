use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::arith::{self, Q, QVec};
use crate::builtins::{example2, example3, pythagorean_approach, Builtin};
use crate::convexfn::{lipschitz_check, FnGridProbe, LipschitzReport, RealFunction};
use crate::geometry::{convex_hull, hausdorff_distance, is_extreme_set, PointCloud, Polytope};
use crate::json::polytope_to_json;
use crate::lp::{self, LpOutcome};
use crate::normedspace::{circle_point, rational_circle_point, unit_circle_points, BallKind, BallSpec, CircleMode, Gauge, NormedSpace, Piece};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Closed,
    NotClosed,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Closed => "closed",
            Verdict::NotClosed => "not-closed",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of the closure test for the extreme sets of the dual ball.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureReport {
    pub verdict: Verdict,
    /// Extreme sets converging to `limit`.
    pub witness: Vec<Polytope>,
    pub limit: Option<Polytope>,
    pub reason: String,
    /// Hausdorff distance from the last witness to the limit.
    pub limit_gap: Option<f64>,
}

impl ClosureReport {
    fn closed(reason: &str) -> Self {
        ClosureReport { verdict: Verdict::Closed, witness: Vec::new(), limit: None, reason: reason.into(), limit_gap: None }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "verdict": self.verdict.label(),
            "witness": self.witness.iter().map(polytope_to_json).collect::<Vec<_>>(),
            "limit": self.limit.as_ref().map(polytope_to_json),
            "reason": self.reason,
            "limit_gap": self.limit_gap,
        })
    }
}

/// What to test: a polytopal space, one of the smooth built-ins, or a
/// discretisation of a user body with circles.
#[derive(Clone, Copy, Debug)]
pub enum ClosureTarget<'a> {
    Polytopal(&'a NormedSpace),
    Builtin(Builtin),
    Discretized { spec: &'a BallSpec, space: &'a NormedSpace },
}

fn cloud(p: &Polytope) -> PointCloud {
    PointCloud::new(p.vertices_f64().to_vec()).expect("nonempty")
}

fn witness_report(witness: Vec<Polytope>, limit: Polytope, reason: String) -> ClosureReport {
    let limit_gap = witness.last().map(|w| hausdorff_distance(&cloud(w), &cloud(&limit)));
    ClosureReport { verdict: Verdict::NotClosed, witness, limit: Some(limit), reason, limit_gap }
}

const WITNESS_LENGTH: usize = 12;

fn example2_report() -> Result<ClosureReport> {
    let points = example2::witness_points(WITNESS_LENGTH);
    if !points.iter().all(|u| example2::certify_exposed_point(u)) {
        return Ok(ClosureReport { verdict: Verdict::Inconclusive, ..ClosureReport::closed("witness certificate failed") });
    }
    let limit = convex_hull(&[example2::limit_point()])?;
    // The square lies in the dual ball, so a segment of it through the
    // limit point shows non-extremality in the whole ball.
    let square = convex_hull(&example2::square())?;
    if is_extreme_set(&square, &limit)? {
        return Ok(ClosureReport { verdict: Verdict::Inconclusive, ..ClosureReport::closed("limit unexpectedly extreme") });
    }
    let witness = points.iter().map(|u| convex_hull(std::slice::from_ref(u))).collect::<Result<Vec<_>>>()?;
    Ok(witness_report(
        witness,
        limit,
        "exposed points of the circle converge to (1,0,0), the midpoint of the square edge from (1,0,-1) to (1,0,1)".into(),
    ))
}

fn example3_report() -> Result<ClosureReport> {
    let angles = pythagorean_approach(WITNESS_LENGTH);
    if !angles.iter().all(|(c, s)| example3::certify_face(c, s)) {
        return Ok(ClosureReport { verdict: Verdict::Inconclusive, ..ClosureReport::closed("witness certificate failed") });
    }
    let limit = convex_hull(&example3::limit_triangle())?;
    // Square inscribed in the disc conv S2+.
    let square = convex_hull(&[
        arith::qvec(&[1, 0, 1, 0]),
        arith::qvec(&[1, 0, -1, 0]),
        arith::qvec(&[1, 0, 0, 1]),
        arith::qvec(&[1, 0, 0, -1]),
    ])?;
    if is_extreme_set(&square, &limit)? {
        return Ok(ClosureReport { verdict: Verdict::Inconclusive, ..ClosureReport::closed("limit unexpectedly extreme") });
    }
    let witness = angles
        .iter()
        .map(|(c, s)| convex_hull(&example3::t_exact(c, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(witness_report(
        witness,
        limit,
        "the exposed triangles T_θ converge to a triangle containing a relative interior point of conv S2+ and properly inside it".into(),
    ))
}

/// `x ∈ conv(points)`, by linear programming.
fn in_hull(points: &[QVec], x: &[Q]) -> bool {
    let n = points.len();
    let mut a: Vec<QVec> = (0..x.len()).map(|i| points.iter().map(|p| p[i].clone()).collect()).collect();
    a.push(vec![Q::one(); n]);
    let mut b = x.to_vec();
    b.push(Q::one());
    matches!(lp::minimize(&vec![Q::zero(); n], &a, &b), LpOutcome::Optimal(_))
}

/// Point of the dual body contributed by the circle piece at the rational
/// angle `(c, s)`: the circle itself when it spans the dual side, or the
/// pole `-u / (<u, center> + r)` of a tangent plane of the primal cylinder.
fn dual_curve_point(spec: &BallSpec, center: &QVec, a1: &QVec, a2: &QVec, radius: &Q, c: &Q, s: &Q) -> Option<QVec> {
    match (spec.dual_side, spec.kind, spec.circle_mode) {
        (true, BallKind::Hull, _) => Some(circle_point(center, a1, a2, radius, c, s)),
        (false, BallKind::HpolytopeIntersection, CircleMode::Circumscribed) => {
            let u: QVec = (0..center.len()).map(|i| c * &a1[i] + s * &a2[i]).collect();
            let h = arith::dot(&u, center) + radius;
            h.is_positive().then(|| arith::scale(&(-Q::one() / h), &u))
        }
        _ => None,
    }
}

/// Looks for a curve sample that is not a vertex of the discretised dual
/// ball while its neighbours are; finer samples approaching it from one
/// side are checked to lie outside the coarse body.
fn discretized_report(spec: &BallSpec, space: &NormedSpace) -> Result<ClosureReport> {
    let body = space.dual();
    let m = spec.discretization;
    let mut sampled = false;
    for piece in &spec.pieces {
        let Piece::Circle { center, axis1, axis2, radius } = piece else { continue };
        let curve = |c: &Q, s: &Q| dual_curve_point(spec, center, axis1, axis2, radius, c, s);
        let Some(pts) = unit_circle_points(m).iter().map(|(c, s)| curve(c, s)).collect::<Option<Vec<QVec>>>() else {
            continue;
        };
        sampled = true;
        for k in 0..m {
            let (prev, next) = (&pts[(k + m - 1) % m], &pts[(k + 1) % m]);
            if body.vertex_index(&pts[k]).is_some() || body.vertex_index(prev).is_none() || body.vertex_index(next).is_none() {
                continue;
            }
            let limit = convex_hull(std::slice::from_ref(&pts[k]))?;
            if is_extreme_set(body, &limit)? {
                continue;
            }
            let theta = std::f64::consts::TAU * k as f64 / m as f64;
            let step = std::f64::consts::TAU / m as f64;
            let approach: Vec<QVec> = (1..=WITNESS_LENGTH)
                .filter_map(|j| {
                    let (c, s) = rational_circle_point(theta + step / (1u64 << j) as f64);
                    curve(&c, &s)
                })
                .collect();
            if !approach.is_empty() && approach.iter().all(|u| !in_hull(body.vertices(), u)) {
                let witness = approach.iter().map(|u| convex_hull(std::slice::from_ref(u))).collect::<Result<Vec<_>>>()?;
                return Ok(witness_report(
                    witness,
                    limit,
                    format!(
                        "sampling-based: curve points approaching sample {k} lie outside the discretisation, \
                         while sample {k} is interior to a segment of it; extremality of the approaching points \
                         in the smooth body is not proved"
                    ),
                ));
            }
        }
    }
    let reason = if sampled {
        "no sampled non-extreme accumulation point; closure cannot be decided from a finite discretisation"
    } else {
        "the circles do not map to a curve on the dual side; nothing to sample"
    };
    Ok(ClosureReport { verdict: Verdict::Inconclusive, ..ClosureReport::closed(reason) })
}

pub fn check_extreme_closure(target: ClosureTarget) -> Result<ClosureReport> {
    match target {
        ClosureTarget::Builtin(Builtin::Example2) => example2_report(),
        ClosureTarget::Builtin(Builtin::Example3) => example3_report(),
        ClosureTarget::Builtin(_) => Ok(ClosureReport::closed("finite face lattice")),
        ClosureTarget::Polytopal(_) => Ok(ClosureReport::closed("finite face lattice")),
        ClosureTarget::Discretized { spec, space } => {
            if space.dimension() <= 2 {
                Ok(ClosureReport::closed("in dimension two the extreme sets of a convex set are closed"))
            } else if !spec.has_circles() {
                Ok(ClosureReport::closed("finite face lattice"))
            } else {
                discretized_report(spec, space)
            }
        }
    }
}

/// Evidence that `f = min(f₁, f₂)` with both `f_i` 1-Lipschitz and each
/// different from `f`, which rules out `f` being a Busemann point.
#[derive(Clone, Debug, PartialEq)]
pub struct MinDecompositionCertificate {
    /// `sup |min(f₁, f₂) - f|` over the probe.
    pub min_error: f64,
    pub f1_lipschitz: LipschitzReport,
    pub f2_lipschitz: LipschitzReport,
    /// `sup |f_i - f|` over the probe.
    pub f1_gap: f64,
    pub f2_gap: f64,
    pub tolerance: f64,
    pub valid: bool,
}

impl MinDecompositionCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "valid": self.valid,
            "tolerance": self.tolerance,
            "min_error": self.min_error,
            "f1_lipschitz": {"ok": self.f1_lipschitz.ok, "worst_ratio": self.f1_lipschitz.worst_ratio},
            "f2_lipschitz": {"ok": self.f2_lipschitz.ok, "worst_ratio": self.f2_lipschitz.worst_ratio},
            "f1_gap": self.f1_gap,
            "f2_gap": self.f2_gap,
        })
    }
}

pub fn verify_min_decomposition(
    gauge: &dyn Gauge,
    f: &dyn RealFunction,
    f1: &dyn RealFunction,
    f2: &dyn RealFunction,
    probe: &FnGridProbe,
    pairs: &[(Vec<f64>, Vec<f64>)],
    tolerance: f64,
) -> MinDecompositionCertificate {
    let mut min_error: f64 = 0.0;
    let (mut f1_gap, mut f2_gap): (f64, f64) = (0.0, 0.0);
    for x in &probe.samples {
        let (a, b, c) = (f.eval(x), f1.eval(x), f2.eval(x));
        min_error = min_error.max((b.min(c) - a).abs());
        f1_gap = f1_gap.max((b - a).abs());
        f2_gap = f2_gap.max((c - a).abs());
    }
    let f1_lipschitz = lipschitz_check(f1, gauge, pairs, tolerance);
    let f2_lipschitz = lipschitz_check(f2, gauge, pairs, tolerance);
    let valid = min_error <= tolerance
        && f1_lipschitz.ok
        && f2_lipschitz.ok
        && f1_gap > tolerance
        && f2_gap > tolerance;
    MinDecompositionCertificate { min_error, f1_lipschitz, f2_lipschitz, f1_gap, f2_gap, tolerance, valid }
}
