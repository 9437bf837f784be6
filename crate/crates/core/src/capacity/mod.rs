//! Region arithmetic: rate tuples, the inner and outer region tests, the
//! downlink max-min optimizer and the private-message baseline LP.

mod fdfp;
mod optimizer;
mod rates;
mod region;

pub use fdfp::{caps_from_channel, fdfp_feasible, FdfpInfeasibility, FdfpVerdict, ForcedBound, Split};
pub use optimizer::{max_min_downlink, DownlinkOptimum, GAP_TOLERANCE, GRID_STEPS, MAX_GRID_POINTS, MAX_ITERATIONS};
pub use rates::{parse_rational, rational_from_f64, rational_to_f64, RateTuple, SumRates};
pub use region::{
    check_achievable, check_outer, format_rate, InnerVerdict, OuterVerdict, RegionReport, RegionSlice, SliceRow,
    MARGIN_TOLERANCE,
};
