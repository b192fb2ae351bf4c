//! Bounded continuous functions: exact polygonal functions, evaluation
//! descriptors, compact-open names and the cut-off functions used in
//! convergence arguments.

mod bcf;
mod coname;
mod polygonal;
mod special;

pub use bcf::{default_enclose, polygonal_as_bcf, BCFunction, BcfImpl};
pub use coname::{co_name_of, eval_from_co_name, polygonal_approx, COName, CoPair};
pub use polygonal::RationalPolygonal;
pub use special::{
    denormalize_h, indicator_approx, normalize_h, tent_function, trapezoid, trapezoid_max,
    w_function,
};
