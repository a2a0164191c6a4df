//! Face lattice, extreme-set test and exposed-face chains.

use std::collections::{BTreeMap, HashSet, VecDeque};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::dd::Bits;
use super::polytope::{affine_dim, convex_hull, Polytope};
use crate::arith::{self, dot, Q, QVec};
use crate::{Error, Result};

/// A nonempty face of a parent polytope, identified by index sets into the
/// parent's facet and vertex lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face {
    pub tight_facets: Vec<usize>,
    pub vertices: Vec<usize>,
    pub dim: usize,
}

impl Face {
    pub fn is_whole(&self, parent: &Polytope) -> bool {
        self.vertices.len() == parent.vertices().len()
    }

    pub fn vertex_coords(&self, parent: &Polytope) -> Vec<QVec> {
        self.vertices.iter().map(|&i| parent.vertices()[i].clone()).collect()
    }

    pub fn to_polytope(&self, parent: &Polytope) -> Polytope {
        convex_hull(&self.vertex_coords(parent)).expect("faces are nonempty")
    }

    /// Checks that the index sets describe a face of `parent`.
    pub fn validate(&self, parent: &Polytope) -> Result<()> {
        let n = parent.vertices().len();
        if self.vertices.is_empty() || self.vertices.iter().any(|&i| i >= n) {
            return Err(Error::InvalidInput("face vertex index out of range".into()));
        }
        let closed = closure(parent, &self.vertices);
        if closed.vertices != self.vertices || closed.tight_facets != self.tight_facets {
            return Err(Error::NotExtreme);
        }
        Ok(())
    }
}

fn incidence_bits(p: &Polytope) -> Vec<Bits> {
    let n = p.vertices().len();
    p.incidence()
        .iter()
        .map(|inc| {
            let mut b = Bits::new(n);
            for &i in inc {
                b.set(i);
            }
            b
        })
        .collect()
}

/// Smallest face containing the given vertex indices.
fn closure(p: &Polytope, vertex_ids: &[usize]) -> Face {
    let tight: Vec<usize> = (0..p.facets().len())
        .filter(|&j| {
            let inc = &p.incidence()[j];
            vertex_ids.iter().all(|v| inc.binary_search(v).is_ok())
        })
        .collect();
    face_from_tight(p, tight)
}

fn face_from_tight(p: &Polytope, tight: Vec<usize>) -> Face {
    let vertices: Vec<usize> = (0..p.vertices().len())
        .filter(|v| tight.iter().all(|&j| p.incidence()[j].binary_search(v).is_ok()))
        .collect();
    let coords: Vec<QVec> = vertices.iter().map(|&i| p.vertices()[i].clone()).collect();
    Face { dim: affine_dim(&coords), tight_facets: tight, vertices }
}

/// Smallest face of `p` containing every point of `points` (which must lie
/// in `p`).
pub fn minimal_face(p: &Polytope, points: &[QVec]) -> Result<Face> {
    if let Some(x) = points.iter().find(|x| !p.contains(x)) {
        return Err(Error::NotSubset(format!(
            "point {:?} is not in the polytope",
            arith::vec_to_f64(x)
        )));
    }
    let tight: Vec<usize> = (0..p.facets().len())
        .filter(|&j| points.iter().all(|x| p.facets()[j].slack(x).is_zero()))
        .collect();
    Ok(face_from_tight(p, tight))
}

/// All nonempty faces, the polytope itself included, ordered
/// lexicographically by tight-facet set.
pub fn enumerate_faces(p: &Polytope) -> Vec<Face> {
    let bits = incidence_bits(p);
    let nv = p.vertices().len();
    let mut facets_of: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (j, inc) in p.incidence().iter().enumerate() {
        for &i in inc {
            facets_of[i].push(j);
        }
    }
    let tight_of = |s: &Bits| -> Vec<usize> {
        match s.ones().filter(|&i| i < nv).min_by_key(|&i| facets_of[i].len()) {
            Some(i) => facets_of[i].iter().copied().filter(|&j| bits[j].is_superset(s)).collect(),
            None => (0..bits.len()).collect(),
        }
    };
    let mut all = Bits::new(nv);
    for i in 0..nv {
        all.set(i);
    }
    // A face meets a facet in a face, so vertex sets identify faces.
    let mut seen: HashSet<Bits> = HashSet::new();
    let mut found: BTreeMap<Vec<usize>, Bits> = BTreeMap::new();
    let mut queue: VecDeque<(Vec<usize>, Bits)> = VecDeque::new();
    let top = tight_of(&all);
    seen.insert(all.clone());
    found.insert(top.clone(), all.clone());
    queue.push_back((top, all));
    while let Some((tight, verts)) = queue.pop_front() {
        for (j, inc) in bits.iter().enumerate() {
            if tight.binary_search(&j).is_ok() {
                continue;
            }
            let sub = verts.and(inc);
            if sub.count() == 0 || seen.contains(&sub) {
                continue;
            }
            seen.insert(sub.clone());
            let t = tight_of(&sub);
            found.insert(t.clone(), sub.clone());
            queue.push_back((t, sub));
        }
    }
    found
        .into_iter()
        .map(|(tight, verts)| {
            let vertices: Vec<usize> = verts.ones().filter(|&i| i < nv).collect();
            let coords: Vec<QVec> = vertices.iter().map(|&i| p.vertices()[i].clone()).collect();
            Face { dim: affine_dim(&coords), tight_facets: tight, vertices }
        })
        .collect()
}

/// Whether `e` is an extreme set of `c`: every segment of `c` with an
/// interior point in `e` has both endpoints in `e`. For polytopes this holds
/// exactly when `e` equals the smallest face of `c` containing it.
pub fn is_extreme_set(c: &Polytope, e: &Polytope) -> Result<bool> {
    if c.dimension() != e.dimension() {
        return Err(Error::DimensionMismatch { expected: c.dimension(), got: e.dimension() });
    }
    let face = minimal_face(c, e.vertices())?;
    Ok(face.vertices.iter().all(|&i| e.contains(&c.vertices()[i])))
}

/// Affine function `y -> <gradient, y> + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineFunctional {
    #[serde(with = "crate::json::qvec_serde")]
    pub gradient: QVec,
    #[serde(with = "crate::json::q_serde")]
    pub constant: Q,
}

impl AffineFunctional {
    pub fn eval(&self, y: &[Q]) -> Q {
        dot(&self.gradient, y) + &self.constant
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    /// `F_{i+1}`.
    pub face: Face,
    /// Vanishes on `F_{i+1}` and is positive on the rest of `F_i`.
    pub functional: AffineFunctional,
}

/// `F_0 = C ⊃ F_1 ⊃ ... ⊃ F_n = E`, each an exposed face of its predecessor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceChain {
    pub steps: Vec<ChainStep>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChainStrategy {
    /// One step: every face of a polytope is exposed.
    #[default]
    Direct,
    /// Descend one facet hyperplane at a time.
    Facetwise,
}

impl FaceChain {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Sign checks on vertices: `f_i >= 0` on `F_i`, `f_i = 0` exactly on
    /// the vertices of `F_{i+1}`.
    pub fn verify(&self, c: &Polytope) -> bool {
        let mut current: Vec<usize> = (0..c.vertices().len()).collect();
        for step in &self.steps {
            for &v in &current {
                let value = step.functional.eval(&c.vertices()[v]);
                let in_next = step.face.vertices.binary_search(&v).is_ok();
                if value.is_negative() || (value.is_zero() != in_next) {
                    return false;
                }
            }
            if !step.face.vertices.iter().all(|v| current.contains(v)) {
                return false;
            }
            current = step.face.vertices.clone();
        }
        true
    }
}

fn slack_functional(c: &Polytope, facets: &[usize]) -> AffineFunctional {
    let mut gradient = vec![Q::zero(); c.dimension()];
    let mut constant = Q::zero();
    for &j in facets {
        let h = &c.facets()[j];
        for (g, a) in gradient.iter_mut().zip(&h.normal) {
            *g -= a;
        }
        constant += &h.offset;
    }
    AffineFunctional { gradient, constant }
}

pub fn exposed_face_chain(c: &Polytope, e: &Face, strategy: ChainStrategy) -> Result<FaceChain> {
    e.validate(c)?;
    if e.is_whole(c) {
        return Ok(FaceChain { steps: Vec::new() });
    }
    match strategy {
        ChainStrategy::Direct => Ok(FaceChain {
            steps: vec![ChainStep { face: e.clone(), functional: slack_functional(c, &e.tight_facets) }],
        }),
        ChainStrategy::Facetwise => {
            let mut steps = Vec::new();
            let mut current: Vec<usize> = (0..c.vertices().len()).collect();
            while current != e.vertices {
                let candidate = e
                    .tight_facets
                    .iter()
                    .map(|&j| {
                        let next: Vec<usize> = current
                            .iter()
                            .copied()
                            .filter(|v| c.incidence()[j].binary_search(v).is_ok())
                            .collect();
                        (j, next)
                    })
                    .filter(|(_, next)| next.len() < current.len())
                    .max_by(|(ja, a), (jb, b)| a.len().cmp(&b.len()).then(jb.cmp(ja)));
                let Some((j, next)) = candidate else {
                    return Err(Error::NotExtreme);
                };
                let face = closure(c, &next);
                steps.push(ChainStep { face, functional: slack_functional(c, &[j]) });
                current = next;
            }
            Ok(FaceChain { steps })
        }
    }
}
