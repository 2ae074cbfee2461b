//! Zero sets of functions of two complex variables, read slice by slice.

pub mod chart;
pub mod geometry;
pub mod order;
pub mod slice_roots;
pub mod weierstrass;
pub mod winding;

pub use chart::{match_roots, nth_root_slice, track_zero_graphs, Matching, SliceRoots, ZeroChart};
pub use slice_roots::{count_zeros_slice, Root, SliceCount};
pub use winding::{winding_around, winding_number, winding_value, Contour};
pub use geometry::{
    dbar_closedness_test, distance_comparison, graph_distance, ClosednessReport, CutoffSpec,
    DistanceComparison, TestForm,
};
pub use order::{vanishing_order, VanishingOrder};
pub use weierstrass::{
    discriminant_h, distinct_roots, elementary_symmetric, weierstrass_reconstruct,
    WeierstrassPolynomial,
};
