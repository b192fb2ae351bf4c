//! Constructive conversions between weak-convergence certificates.
//!
//! * effective weak limit to open/closed set witnesses: [`open_witness`],
//!   [`closed_witness`], [`provider_from_ewlimit`];
//! * witnesses back to integral moduli: [`liminf_integral_witness`],
//!   [`limsup_integral_witness`], [`ewc_from_witness_provider`];
//! * witnesses to moduli on almost decidable sets: [`ad_modulus`], and back
//!   to closed-set witnesses: [`closed_witness_from_ad`];
//! * moduli for uniformly continuous functions to a full limit:
//!   [`uc_modulus_to_ewc`].

mod decidable;
mod harness;
mod integral;
mod provider;

pub use decidable::{ad_modulus, closed_witness_from_ad};
pub(crate) use harness::csv_field;
pub use harness::{
    portmanteau_harness, skipped_report, Fault, HarnessConfig, Report, Row, Status, TestItems,
    ARROWS, REDUCTION_PRECISIONS,
};
pub use integral::{
    ewc_from_witness_provider, liminf_integral_witness, limsup_integral_witness, lower_tuple,
    total_mass_modulus, tuple_sum, upper_tuple,
};
pub use provider::{
    closed_witness, family_provider, open_witness, provider_from_ewlimit, WitnessProvider,
};

use crate::functions::BCFunction;
use crate::kernel::Modulus;
use crate::measures::CMeasure;
use crate::weakconv::{restrict, uniformize, EWLimit, MeasureSeq};

/// Full effective weak limit from moduli that are only trusted on uniformly
/// continuous functions. The uniformization pipeline queries `ucm` only on
/// rational polygonal functions, which are uniformly continuous.
pub fn uc_modulus_to_ewc(
    seq: MeasureSeq,
    limit: CMeasure,
    ucm: impl Fn(&BCFunction, u64) -> Modulus + Send + Sync + 'static,
) -> EWLimit {
    restrict(&uniformize(&EWLimit::new(seq, limit, ucm)))
}
