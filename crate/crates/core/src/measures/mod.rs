//! Effective open and closed sets, computable measures, level sets and
//! almost decidable sets.

mod decidable;
mod exact;
mod integrate;
mod interval;
mod levels;
mod measure;
mod sets;

pub use decidable::{almost_decidable_box, AlmostDecidablePair, BoxInterval};
pub use exact::{DensityPiece, ExactMeasure};
pub use integrate::{integrate, integrate_checked, integrate_unit, measure_from_integrator};
pub use interval::{
    complement_of_closed, complement_of_open, merge_closed, merge_intervals, merge_open, Interval,
    Span,
};
pub use levels::{closed_superlevel, superlevel_open};
pub use measure::{
    mass_closed, mixture, point_mass, polygonal_density_measure, truncated_lebesgue, CMeasure,
};
pub use sets::{
    interval_enumeration, interval_index, pair, positive_rational_enumeration,
    positive_rational_index, rational_enumeration, rational_index, unpair, Pi01Set, Sigma01Set,
    Stage,
};
