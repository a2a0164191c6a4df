//! Exact polytope geometry and numeric set limits.

pub(crate) mod dd;
mod faces;
mod polytope;
mod sets;

pub use faces::{
    enumerate_faces, exposed_face_chain, is_extreme_set, minimal_face, AffineFunctional, ChainStep,
    ChainStrategy, Face, FaceChain,
};
pub use polytope::{affine_dim, convex_hull, from_hrep, polar, Halfspace, Polytope};
pub use sets::{euclid, hausdorff_distance, pk_lower_limit, pk_upper_limit, PointCloud, SetLimit};
