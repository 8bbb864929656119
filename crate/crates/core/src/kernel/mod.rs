//! Exact rational geometry in R^4.

pub(crate) mod exact;
pub mod lp;
mod param;
mod predicates;
mod shear;
mod types;

pub(crate) use param::ANCHOR_XY;
pub(crate) use types::collinear;

pub use exact::{det, det_sign, solve};
pub use param::{line_param, twoplane_frame_sign, twoplane_param, LineParam, TwoPlaneParam};
pub use predicates::{
    hyperplane_of, line_2flat_meet, orient5, segment_tetra_direct, segment_tetra_predicate,
    side_of_hyperplane, tetra_contains, tri_tri_direct, tri_tri_predicate, tri_tri_witness,
};
pub use shear::{generic_shear, Shear};
pub use types::{
    format_scalar, parse_scalar, q, qr, ExactScalar, Hyperplane4, Point4, Segment4, Sign,
    Tetrahedron4, Triangle4,
};
