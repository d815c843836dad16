//! Rate regions, power-splitting factors and power allocation for two-user
//! multiple-access channels with simultaneous wireless information and power
//! transfer (SWIPT).
//!
//! The destination splits the received RF power: a fraction `ρ` feeds an
//! energy harvester, the rest is used to decode. Decoding costs power, so the
//! harvested energy bounds the decodable rates. The crate computes
//!
//! * maximum departure region boundaries for simultaneous decoding
//!   ([`mdrb_simultaneous`]) and successive interference cancellation
//!   ([`mdrb_sic`]),
//! * optimal PS factors and sum rates ([`sumrate_simultaneous`],
//!   [`sic_sumrate_numeric`], [`sic_sumrate_closed_form`]),
//! * cooperative power allocations and frontiers ([`coop_solve_general`],
//!   [`coop_solve_closed_form`], [`coop_mdrb`]),
//! * brute-force grid oracles to check all of the above ([`oracle`]).
//!
//! ```
//! use swipt_mac::{sumrate_simultaneous, ClassicalParams, CostModel, EhModel};
//!
//! let params = ClassicalParams::reference(EhModel::reference_logistic(), CostModel::exp(1e-3)?);
//! let report = sumrate_simultaneous(&params)?;
//! assert!(report.sum_rate > 1.0 && report.sum_rate < 2.0);
//! # Ok::<(), swipt_mac::Error>(())
//! ```

// `!(x > 0.0)` style checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical_sic;
pub mod classical_simul;
pub mod coop_mac;
pub mod error;
pub mod models;
pub mod numerics;
pub mod oracle;
pub mod region;

pub use classical_sic::{
    mdrb_sic, sic_breakpoints, sic_feasible, sic_rates_at, sic_sumrate_closed_form,
    sic_sumrate_numeric, sic_sumrate_numeric_with, DecodingOrder, SicBreakpoints, SicClosedForm,
    SicOptions,
};
pub use classical_simul::{
    mdrb_simultaneous, remark4_rho, simul_breakpoints, simul_feasible, sumrate_simultaneous,
    Candidate, SimulBreakpoints, SolveReport,
};
pub use coop_mac::{
    coop_constraints_eval, coop_mdrb, coop_solve_closed_form, coop_solve_general, default_weights,
    CoopClosedForm, CoopSlacks, CoopSolution, CoopSolver,
};
pub use error::{Error, Result};
pub use models::{
    half_log2_1p, ClassicalParams, CoopParams, CostInverse, CostModel, EhModel, IdNoise,
    PowerAllocation,
};
pub use numerics::{RootConfig, ScanConfig};
pub use oracle::{
    oracle_coop_weighted, oracle_sic_sumrate, oracle_sic_sumrate_order, oracle_simul_sumrate,
    OracleOptimum,
};
pub use region::{
    dominates, hausdorff, upper_hull, BoundaryCurve, BoundaryPoint, PointTag, RatePoint,
    SimulSegment,
};

/// The guide's chapters, compiled so their code samples stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    struct Readme;
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/models.md")]
    struct Models;
    #[doc = include_str!("../../../book/src/numerics.md")]
    struct Numerics;
    #[doc = include_str!("../../../book/src/simultaneous.md")]
    struct Simultaneous;
    #[doc = include_str!("../../../book/src/sic.md")]
    struct Sic;
    #[doc = include_str!("../../../book/src/cooperation.md")]
    struct Cooperation;
    #[doc = include_str!("../../../book/src/regions.md")]
    struct Regions;
    #[doc = include_str!("../../../book/src/oracles.md")]
    struct Oracles;
}
