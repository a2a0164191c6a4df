use serde_json::json;

use crate::arith::{self, dot, Q, QVec};
use crate::convexfn::{lf_transform_dual, uniform_distance, AffineOnPolytope, FnGridProbe, MaxAffine, RealFunction};
use crate::geometry::{is_extreme_set, minimal_face, Face, Polytope};
use crate::json::face_to_json;
use crate::normedspace::NormedSpace;
use crate::{Error, Result};

/// A face `E` of the dual ball with a point `p`, describing
/// `h_{E,p} = I_E + <., p> - inf_E <., p>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualHorodata {
    pub face: Face,
    pub p: QVec,
    /// `inf_{y in E} <y, p>`.
    pub canonical_offset: Q,
}

pub fn build_dual_horodata(space: &NormedSpace, face: &Face, p: &[Q]) -> Result<DualHorodata> {
    if p.len() != space.dual().dimension() {
        return Err(Error::DimensionMismatch { expected: space.dual().dimension(), got: p.len() });
    }
    face.validate(space.dual())?;
    let canonical_offset = face
        .vertices
        .iter()
        .map(|&i| dot(&space.dual().vertices()[i], p))
        .min()
        .expect("faces are nonempty");
    Ok(DualHorodata { face: face.clone(), p: p.to_vec(), canonical_offset })
}

/// The face of the dual ball equal to `set`, or `NotExtreme`.
pub fn face_of_set(space: &NormedSpace, set: &Polytope) -> Result<Face> {
    if !is_extreme_set(space.dual(), set)? {
        return Err(Error::NotExtreme);
    }
    minimal_face(space.dual(), set.vertices())
}

impl DualHorodata {
    pub fn is_proper(&self, space: &NormedSpace) -> bool {
        !self.face.is_whole(space.dual())
    }

    pub fn face_vertices(&self, space: &NormedSpace) -> Vec<QVec> {
        self.face.vertex_coords(space.dual())
    }

    pub fn h(&self, space: &NormedSpace) -> AffineOnPolytope {
        AffineOnPolytope::new(self.face.to_polytope(space.dual()), self.p.clone(), -self.canonical_offset.clone())
            .expect("dimensions agree")
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "E": face_to_json(&self.face),
            "p": self.p.iter().map(arith::format_q).collect::<Vec<_>>(),
            "canonical_offset": arith::format_q(&self.canonical_offset),
        })
    }
}

/// `h*_{E,p}(x) = |p - x|_E - |p|_E`.
#[derive(Clone, Debug)]
pub struct BusemannPoint {
    source: DualHorodata,
    vertices: Vec<QVec>,
    vertices_f64: Vec<Vec<f64>>,
    p_f64: Vec<f64>,
    norm_p_f64: f64,
}

impl BusemannPoint {
    pub fn new(space: &NormedSpace, source: DualHorodata) -> Self {
        let vertices = source.face_vertices(space);
        let vertices_f64: Vec<Vec<f64>> = vertices.iter().map(|v| arith::vec_to_f64(v)).collect();
        let p_f64 = arith::vec_to_f64(&source.p);
        let norm_p_f64 = -arith::to_f64(&source.canonical_offset);
        BusemannPoint { source, vertices, vertices_f64, p_f64, norm_p_f64 }
    }

    pub fn source(&self) -> &DualHorodata {
        &self.source
    }

    pub fn eval_exact(&self, x: &[Q]) -> Q {
        let w = arith::sub(&self.source.p, x);
        let support = -self.vertices.iter().map(|v| dot(v, &w)).min().expect("nonempty");
        support + &self.source.canonical_offset
    }

    /// The same function written as `max_v (<v, x> - <v, p>) + inf_E <., p>`.
    pub fn to_max_affine(&self) -> MaxAffine {
        let pieces = self
            .vertices
            .iter()
            .map(|v| crate::convexfn::AffinePiece::new(v.clone(), -dot(v, &self.source.p) + &self.source.canonical_offset))
            .collect();
        MaxAffine::new(pieces).expect("nonempty")
    }
}

impl RealFunction for BusemannPoint {
    fn eval(&self, x: &[f64]) -> f64 {
        let support = self
            .vertices_f64
            .iter()
            .map(|v| v.iter().zip(&self.p_f64).zip(x).map(|((vi, pi), xi)| vi * (xi - pi)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        support - self.norm_p_f64
    }
}

pub fn eval_busemann(bp: &BusemannPoint, x: &[f64]) -> f64 {
    bp.eval(x)
}

/// Exact check that the two evaluators agree as max-affine functions:
/// the transform of `h_{E,p}` has the same pieces as `h*_{E,p}`.
pub fn busemann_matches_transform(space: &NormedSpace, bp: &BusemannPoint) -> bool {
    let via_transform = lf_transform_dual(&bp.source.h(space));
    let mut a = via_transform.pieces().to_vec();
    let mut b = bp.to_max_affine().pieces().to_vec();
    let key = |p: &crate::convexfn::AffinePiece| (p.gradient.clone(), p.offset.clone());
    a.sort_by_key(key);
    b.sort_by_key(key);
    a == b
}

#[derive(Clone, Debug, PartialEq)]
pub struct BusemannComparison {
    pub equal: bool,
    /// `sup |h*_a - h*_b|` over the probe.
    pub probe_distance: f64,
    /// Whether the exact verdict and the probe agree at `tolerance`.
    pub consistent: bool,
    pub tolerance: f64,
}

/// Same face, and `<., p_a - p_b>` constant on the face's vertices.
pub fn busemann_equal(space: &NormedSpace, a: &DualHorodata, b: &DualHorodata, probe: &FnGridProbe) -> BusemannComparison {
    let equal = a.face == b.face && {
        let diff = arith::sub(&a.p, &b.p);
        let values: Vec<Q> = a.face_vertices(space).iter().map(|v| dot(v, &diff)).collect();
        values.windows(2).all(|w| w[0] == w[1])
    };
    let (ba, bb) = (BusemannPoint::new(space, a.clone()), BusemannPoint::new(space, b.clone()));
    let probe_distance = uniform_distance(&ba, &bb, probe).unwrap_or(f64::INFINITY);
    let tolerance = 1e-9;
    BusemannComparison { equal, probe_distance, consistent: equal == (probe_distance <= tolerance), tolerance }
}

/// JSON helper shared by the reports.
pub(crate) fn q_string(x: &Q) -> serde_json::Value {
    serde_json::Value::String(arith::format_q(x))
}
