use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::dd::{self, Bits};
use crate::arith::{self, dot, Q, QVec};
use crate::{Error, Result};

/// `<normal, x> <= offset` when used as a facet, `<normal, x> = offset` when
/// used as an affine-hull equation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Halfspace {
    #[serde(with = "crate::json::qvec_serde")]
    pub normal: QVec,
    #[serde(with = "crate::json::q_serde")]
    pub offset: Q,
}

impl Halfspace {
    pub fn new(normal: QVec, offset: Q) -> Self {
        Halfspace { normal, offset }
    }

    /// `offset - <normal, x>`; nonnegative on the polytope.
    pub fn slack(&self, x: &[Q]) -> Q {
        &self.offset - dot(&self.normal, x)
    }
}

/// A bounded convex polytope carrying both representations.
///
/// Vertices are sorted lexicographically and facets by `(normal, offset)`;
/// both orders are part of the output contract. Lower-dimensional polytopes
/// record their affine hull in `equations`; their facets are only meaningful
/// on that hull.
#[derive(Clone, Debug)]
pub struct Polytope {
    dimension: usize,
    intrinsic_dim: usize,
    vertices: Vec<QVec>,
    vertices_f64: Vec<Vec<f64>>,
    facets: Vec<Halfspace>,
    equations: Vec<Halfspace>,
    incidence: Vec<Vec<usize>>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.vertices == other.vertices
    }
}

impl Eq for Polytope {}

impl Polytope {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.intrinsic_dim == self.dimension
    }

    pub fn vertices(&self) -> &[QVec] {
        &self.vertices
    }

    pub fn vertices_f64(&self) -> &[Vec<f64>] {
        &self.vertices_f64
    }

    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    pub fn equations(&self) -> &[Halfspace] {
        &self.equations
    }

    /// Per-facet sorted vertex indices.
    pub fn incidence(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        x.len() == self.dimension
            && self.equations.iter().all(|h| h.slack(x).is_zero())
            && self.facets.iter().all(|h| !h.slack(x).is_negative())
    }

    pub fn vertex_index(&self, x: &[Q]) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_slice().cmp(x)).ok()
    }

    /// Indices of facets on which `x` is tight.
    pub fn tight_facets(&self, x: &[Q]) -> Vec<usize> {
        (0..self.facets.len())
            .filter(|&j| self.facets[j].slack(x).is_zero())
            .collect()
    }

    pub fn centroid(&self) -> QVec {
        let n = arith::q(self.vertices.len() as i64);
        let mut c = vec![Q::zero(); self.dimension];
        for v in &self.vertices {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi;
            }
        }
        c.iter().map(|x| x / &n).collect()
    }

    /// `min_{v in vertices} <v, p>` evaluated exactly.
    pub fn min_dot(&self, p: &[Q]) -> Q {
        self.vertices
            .iter()
            .map(|v| dot(v, p))
            .min()
            .expect("polytopes are nonempty")
    }

    pub fn min_dot_f64(&self, p: &[f64]) -> f64 {
        self.vertices_f64
            .iter()
            .map(|v| arith::dot_f64(v, p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bounding_box_f64(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dimension];
        let mut hi = vec![f64::NEG_INFINITY; self.dimension];
        for v in &self.vertices_f64 {
            for i in 0..self.dimension {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    /// Largest `s >= 0` with `base + s * dir` in the polytope, `None` when
    /// `base` is outside or the ray is unbounded (cannot happen for a
    /// polytope unless `dir` is zero).
    pub fn ray_exit(&self, base: &[Q], dir: &[Q]) -> Option<Q> {
        if !self.contains(base) {
            return None;
        }
        if self.equations.iter().any(|h| !dot(&h.normal, dir).is_zero()) {
            return Some(Q::zero());
        }
        let mut best: Option<Q> = None;
        for h in &self.facets {
            let rate = dot(&h.normal, dir);
            if rate.is_positive() {
                let s = h.slack(base) / rate;
                best = Some(match best {
                    Some(b) if b <= s => b,
                    _ => s,
                });
            }
        }
        best
    }

    fn assemble(dimension: usize, intrinsic_dim: usize, vertices: Vec<QVec>, mut facets: Vec<Halfspace>, equations: Vec<Halfspace>) -> Polytope {
        facets.sort();
        facets.dedup();
        let incidence = incidence_of(&vertices, &facets);
        let vertices_f64 = vertices.iter().map(|v| arith::vec_to_f64(v)).collect();
        Polytope {
            dimension,
            intrinsic_dim,
            vertices,
            vertices_f64,
            facets,
            equations,
            incidence,
        }
    }
}

fn homogeneous_point(v: &[Q]) -> Vec<BigInt> {
    let mut row = vec![Q::one()];
    row.extend(v.iter().cloned());
    arith::primitive_integer(&row)
}

fn homogeneous_halfspace(h: &Halfspace) -> Vec<BigInt> {
    let mut row = vec![h.offset.clone()];
    row.extend(h.normal.iter().map(|a| -a));
    arith::primitive_integer(&row)
}

fn int_dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

/// For each halfspace, the sorted indices of the points on its boundary,
/// computed in integer homogeneous coordinates.
fn incidence_of(points: &[QVec], halfspaces: &[Halfspace]) -> Vec<Vec<usize>> {
    let pts: Vec<Vec<BigInt>> = points.iter().map(|v| homogeneous_point(v)).collect();
    halfspaces
        .iter()
        .map(|h| {
            let row = homogeneous_halfspace(h);
            (0..pts.len()).filter(|&i| int_dot(&row, &pts[i]).is_zero()).collect()
        })
        .collect()
}

fn to_q(v: &[BigInt]) -> QVec {
    v.iter().map(|x| Q::from_integer(x.clone())).collect()
}

/// Affine rank of a point set.
pub fn affine_dim(points: &[QVec]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let diffs: Vec<QVec> = points[1..].iter().map(|p| arith::sub(p, &points[0])).collect();
    arith::rank(&diffs, points[0].len())
}

/// Convex hull with irredundant V- and H-representations.
pub fn convex_hull(points: &[QVec]) -> Result<Polytope> {
    let Some(first) = points.first() else {
        return Err(Error::EmptyPointSet);
    };
    let d = first.len();
    if d == 0 {
        return Err(Error::InvalidInput("zero-dimensional ambient space".into()));
    }
    if let Some(bad) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
    }
    let mut pts: Vec<QVec> = points.to_vec();
    pts.sort();
    pts.dedup();
    let base = pts[0].clone();
    let diffs: Vec<QVec> = pts[1..].iter().map(|p| arith::sub(p, &base)).collect();
    let ech = arith::rref(&diffs, d);
    let k = ech.pivots.len();
    let equations: Vec<Halfspace> = arith::nullspace(&ech.rows, d)
        .into_iter()
        .map(|n| {
            let n = to_q(&arith::primitive_integer(&n));
            let off = dot(&n, &base);
            Halfspace::new(n, off)
        })
        .collect();
    if k == 0 {
        return Ok(Polytope::assemble(d, 0, vec![base], Vec::new(), equations));
    }

    // The pivot coordinates chart the affine hull bijectively.
    let chart = |x: &QVec| -> QVec { ech.pivots.iter().map(|&c| x[c].clone()).collect() };
    let rows: Vec<Vec<BigInt>> = pts
        .iter()
        .map(|p| {
            let mut row = vec![Q::one()];
            row.extend(chart(p).into_iter().map(|x| -x));
            arith::primitive_integer(&row)
        })
        .collect();
    let rays = dd::extreme_rays(&rows, k + 1)?;
    let local: Vec<(QVec, Q)> = rays
        .iter()
        .map(|r| (to_q(&r[1..]), Q::from_integer(r[0].clone())))
        .collect();

    // A point is a vertex unless another point lies on every facet through
    // it: the facets through a point cut out its minimal face.
    let mut on: Vec<Bits> = vec![Bits::new(local.len()); pts.len()];
    for (j, ray) in rays.iter().enumerate() {
        for (i, row) in rows.iter().enumerate() {
            if int_dot(row, ray).is_zero() {
                on[i].set(j);
            }
        }
    }
    let vertices: Vec<QVec> = (0..pts.len())
        .filter(|&i| (0..pts.len()).all(|k| k == i || !on[k].is_superset(&on[i])))
        .map(|i| pts[i].clone())
        .collect();
    let facets = local
        .into_iter()
        .map(|(a, b)| {
            let mut normal = vec![Q::zero(); d];
            for (ai, &c) in a.into_iter().zip(&ech.pivots) {
                normal[c] = ai;
            }
            Halfspace::new(normal, b)
        })
        .collect();
    Ok(Polytope::assemble(d, k, vertices, facets, equations))
}

/// Vertex enumeration of `{x : <a, x> <= b}` by double description. The
/// result must be a bounded, full-dimensional polytope.
pub fn from_hrep(dimension: usize, halfspaces: &[Halfspace]) -> Result<Polytope> {
    if let Some(h) = halfspaces.iter().find(|h| h.normal.len() != dimension) {
        return Err(Error::DimensionMismatch { expected: dimension, got: h.normal.len() });
    }
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(halfspaces.len() + 1);
    let mut homog = vec![BigInt::one()];
    homog.extend(std::iter::repeat(BigInt::zero()).take(dimension));
    rows.push(homog);
    for h in halfspaces {
        let mut row = vec![h.offset.clone()];
        row.extend(h.normal.iter().map(|a| -a));
        rows.push(arith::primitive_integer(&row));
    }
    let rays = dd::extreme_rays(&rows, dimension + 1)
        .map_err(|_| Error::Unbounded("halfspace normals do not span the space".into()))?;
    let mut vertices = Vec::new();
    for r in &rays {
        if r[0].is_zero() {
            return Err(Error::Unbounded("recession direction found".into()));
        }
        let t = Q::from_integer(r[0].clone());
        vertices.push(r[1..].iter().map(|x| Q::from_integer(x.clone()) / &t).collect::<QVec>());
    }
    if vertices.is_empty() {
        return Err(Error::InvalidInput("empty halfspace intersection".into()));
    }
    vertices.sort();
    vertices.dedup();
    let k = affine_dim(&vertices);
    if k < dimension {
        return Err(Error::NotFullDimensional(format!(
            "halfspace intersection has dimension {k} in R^{dimension}"
        )));
    }
    // Facets are the constraints whose tight vertex sets are maximal.
    let mut facets: Vec<Halfspace> = halfspaces.iter().map(|h| canonical(&h.normal, &h.offset)).collect();
    facets.sort();
    facets.dedup();
    let tight: Vec<Bits> = incidence_of(&vertices, &facets)
        .into_iter()
        .map(|inc| {
            let mut b = Bits::new(vertices.len());
            for i in inc {
                b.set(i);
            }
            b
        })
        .collect();
    let keep: Vec<bool> = (0..facets.len())
        .map(|j| {
            tight[j].count() >= dimension
                && (0..facets.len()).all(|k| k == j || !tight[k].is_superset(&tight[j]) || tight[k].count() == tight[j].count())
        })
        .collect();
    let facets: Vec<Halfspace> = facets.into_iter().zip(keep).filter(|(_, k)| *k).map(|(h, _)| h).collect();
    Ok(Polytope::assemble(dimension, dimension, vertices, facets, Vec::new()))
}

/// Positive rescaling making `(offset, normal)` a primitive integer vector.
fn canonical(normal: &[Q], offset: &Q) -> Halfspace {
    let mut row = vec![offset.clone()];
    row.extend(normal.iter().cloned());
    let ints = to_q(&arith::primitive_integer(&row));
    Halfspace::new(ints[1..].to_vec(), ints[0].clone())
}

/// The dual body `{y : <y, v> >= -1 for every vertex v}`.
pub fn polar(ball: &Polytope) -> Result<Polytope> {
    if !ball.is_full_dimensional() || ball.facets.iter().any(|h| !h.offset.is_positive()) {
        return Err(Error::OriginNotInterior);
    }
    // Facets of the ball give the vertices of the polar and vice versa.
    let mut vertices: Vec<QVec> = ball
        .facets
        .iter()
        .map(|h| h.normal.iter().map(|a| -a / &h.offset).collect())
        .collect();
    vertices.sort();
    vertices.dedup();
    let facets = ball.vertices.iter().map(|v| canonical(&arith::neg(v), &Q::one())).collect();
    Ok(Polytope::assemble(ball.dimension, ball.dimension, vertices, facets, Vec::new()))
}
