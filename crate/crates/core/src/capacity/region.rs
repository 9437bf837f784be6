use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::optimizer::{max_min_downlink, DownlinkOptimum};
use super::rates::{rational_from_f64, rational_to_f64, RateTuple};
use crate::channel::{DownlinkSpec, UplinkSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::message::MessageId;

/// Tolerance on the real-valued downlink margin.
pub const MARGIN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerVerdict {
    Achievable,
    NotShown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterVerdict {
    InsideOrBoundary,
    Outside,
}

/// Everything both region tests look at.
#[derive(Debug, Clone)]
pub struct RegionReport {
    pub sums: Vec<BigRational>,
    pub uplink_bound: f64,
    pub downlink: DownlinkOptimum,
    pub inner: InnerVerdict,
    pub outer: OuterVerdict,
}

impl RegionReport {
    pub fn evaluate(r: &RateTuple, up: &UplinkSpec, down: &DownlinkSpec) -> Result<Self> {
        if down.users() != r.users() {
            return Err(Error::usage(format!(
                "rate tuple has {} users, downlink has {}",
                r.users(),
                down.users()
            )));
        }
        let sums = r.sum_rates().0;
        let bound = up.bound();
        let bound_exact = rational_from_f64(bound);
        let sums_f: Vec<f64> = sums.iter().map(rational_to_f64).collect();
        let downlink = max_min_downlink(down, &sums_f)?;

        let inner = if sums.iter().all(|s| *s < bound_exact) && downlink.margin > MARGIN_TOLERANCE {
            InnerVerdict::Achievable
        } else {
            InnerVerdict::NotShown
        };
        let outer = if sums.iter().all(|s| *s <= bound_exact) && downlink.upper() >= -MARGIN_TOLERANCE {
            OuterVerdict::InsideOrBoundary
        } else {
            OuterVerdict::Outside
        };
        Ok(RegionReport {
            sums,
            uplink_bound: bound,
            downlink,
            inner,
            outer,
        })
    }
}

/// Sufficient condition: every `R^Σ_a < log2 F - H(N0)` and some `p(x0)`
/// gives every `R^Σ_a < I(X0;Y_a)`.
pub fn check_achievable(r: &RateTuple, up: &UplinkSpec, down: &DownlinkSpec) -> Result<InnerVerdict> {
    Ok(RegionReport::evaluate(r, up, down)?.inner)
}

/// Cut-set outer bound with non-strict inequalities, evaluated on the two
/// cuts isolating each user.
pub fn check_outer(r: &RateTuple, up: &UplinkSpec, down: &DownlinkSpec) -> Result<OuterVerdict> {
    Ok(RegionReport::evaluate(r, up, down)?.outer)
}

/// One grid point of a two-coordinate slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceRow {
    pub x: BigRational,
    pub y: BigRational,
    pub achievable: bool,
    pub outer: bool,
}

/// A 2-D slice through the region: `x` and `y` rates swept over
/// `0, step, 2·step, …` up to their maxima, all other rates fixed.
#[derive(Debug, Clone)]
pub struct RegionSlice {
    pub base: RateTuple,
    pub x: MessageId,
    pub y: MessageId,
    pub x_max: BigRational,
    pub y_max: BigRational,
    pub step: BigRational,
}

fn grid_count(max: &BigRational, step: &BigRational) -> usize {
    (max / step).floor().to_integer().to_usize().unwrap_or(0) + 1
}

impl RegionSlice {
    pub fn evaluate(&self, up: &UplinkSpec, down: &DownlinkSpec, exec: Execution) -> Result<Vec<SliceRow>> {
        if !self.step.is_positive() {
            return Err(Error::usage("slice step must be positive"));
        }
        if self.x == self.y {
            return Err(Error::usage("slice coordinates must differ"));
        }
        if self.x_max.is_negative() || self.y_max.is_negative() {
            return Err(Error::usage("slice extents must be nonnegative"));
        }
        for m in [self.x, self.y] {
            if m.max_user() >= self.base.users() {
                return Err(Error::usage(format!("{} is not a coordinate of this tuple", m.rate_name())));
            }
        }
        let nx = grid_count(&self.x_max, &self.step);
        let ny = grid_count(&self.y_max, &self.step);
        let points = nx * ny;
        if points > 1_000_000 {
            return Err(Error::Capability {
                what: "slice grid points".into(),
                value: points.to_string(),
                limit: "1000000".into(),
                hint: "increase the step".into(),
            });
        }
        let rows = exec.map_indexed(points, |idx| -> Result<SliceRow> {
            let (iy, ix) = (idx / nx, idx % nx);
            let x = &self.step * BigRational::from_integer(ix.into());
            let y = &self.step * BigRational::from_integer(iy.into());
            let r = self.base.clone().with(self.x, x.clone())?.with(self.y, y.clone())?;
            let rep = RegionReport::evaluate(&r, up, down)?;
            Ok(SliceRow {
                x,
                y,
                achievable: rep.inner == InnerVerdict::Achievable,
                outer: rep.outer == OuterVerdict::InsideOrBoundary,
            })
        });
        rows.into_iter().collect()
    }

    /// CSV text: header with the two coordinate names, then `x,y,achievable,outer`.
    pub fn to_csv(&self, rows: &[SliceRow]) -> String {
        let mut out = format!("{},{},achievable,outer\n", self.x.rate_name(), self.y.rate_name());
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                format_rate(&r.x),
                format_rate(&r.y),
                r.achievable as u8,
                r.outer as u8
            ));
        }
        out
    }
}

/// Decimal rendering when exact within 12 places, fraction otherwise.
pub fn format_rate(r: &BigRational) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let scale = BigRational::from_integer(num_traits::pow(num_bigint::BigInt::from(10), 12));
    let scaled = r * &scale;
    if scaled.is_integer() {
        let f = rational_to_f64(r);
        format!("{}", (f * 1e12).round() / 1e12)
    } else {
        r.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::rates::parse_rational;
    use crate::channel::Dmc;
    use crate::gf::Field;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn example_channel() -> (UplinkSpec, DownlinkSpec) {
        let up = UplinkSpec::new(Field::gf(4).unwrap(), vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        (up, DownlinkSpec::noiseless(2, 3))
    }

    fn counterexample() -> RateTuple {
        let mut r = RateTuple::zeros(3);
        for u in 0..3 {
            r.set(MessageId::Private(u), q("0.39")).unwrap();
        }
        r.set(MessageId::Common(0, 1), q("0.19")).unwrap();
        r.set(MessageId::Common(0, 2), q("0.14")).unwrap();
        r.set(MessageId::Common(1, 2), q("0.14")).unwrap();
        r
    }

    #[test]
    fn counterexample_is_achievable() {
        let (up, down) = example_channel();
        let rep = RegionReport::evaluate(&counterexample(), &up, &down).unwrap();
        assert_eq!(rep.sums, vec![q("0.92"), q("0.92"), q("0.97")]);
        assert_eq!(rep.uplink_bound, 1.0);
        assert!((rep.downlink.margin - 0.03).abs() < 1e-9);
        assert_eq!(rep.inner, InnerVerdict::Achievable);
        assert_eq!(rep.outer, OuterVerdict::InsideOrBoundary);
    }

    #[test]
    fn zero_rates_achievable() {
        let (up, down) = example_channel();
        assert_eq!(check_achievable(&RateTuple::zeros(3), &up, &down).unwrap(), InnerVerdict::Achievable);
    }

    #[test]
    fn above_log_f_is_not_shown() {
        let (up, down) = example_channel();
        let r = RateTuple::zeros(3).with(MessageId::Private(1), q("2.5")).unwrap();
        assert_eq!(check_achievable(&r, &up, &down).unwrap(), InnerVerdict::NotShown);
        assert_eq!(check_outer(&r, &up, &down).unwrap(), OuterVerdict::Outside);
    }

    #[test]
    fn boundary_is_outer_but_not_inner() {
        // two users, wide downlink so the uplink is the bottleneck
        let up = UplinkSpec::new(Field::gf(4).unwrap(), vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let down = DownlinkSpec::noiseless(4, 2);
        let r = RateTuple::zeros(2).with(MessageId::Private(1), q("1")).unwrap();
        assert_eq!(r.sum_rate(0).unwrap(), q("1"));
        assert_eq!(check_achievable(&r, &up, &down).unwrap(), InnerVerdict::NotShown);
        assert_eq!(check_outer(&r, &up, &down).unwrap(), OuterVerdict::InsideOrBoundary);
        let r = RateTuple::zeros(2).with(MessageId::Private(1), q("1.1")).unwrap();
        assert_eq!(check_outer(&r, &up, &down).unwrap(), OuterVerdict::Outside);
    }

    #[test]
    fn downlink_bottleneck() {
        let up = UplinkSpec::noiseless(Field::gf(4).unwrap());
        let down = DownlinkSpec::new(2, vec![Dmc::bsc(0.1).unwrap(), Dmc::identity(2)]).unwrap();
        // user 1 must decode R2 = 0.6 > 1 - H(0.1) ≈ 0.531
        let r = RateTuple::zeros(2).with(MessageId::Private(1), q("0.6")).unwrap();
        assert_eq!(check_achievable(&r, &up, &down).unwrap(), InnerVerdict::NotShown);
        assert_eq!(check_outer(&r, &up, &down).unwrap(), OuterVerdict::Outside);
    }

    #[test]
    fn one_point_slice() {
        let (up, down) = example_channel();
        let slice = RegionSlice {
            base: RateTuple::zeros(3),
            x: MessageId::Common(0, 1),
            y: MessageId::Private(2),
            x_max: q("0"),
            y_max: q("0"),
            step: q("1/10"),
        };
        let rows = slice.evaluate(&up, &down, Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].achievable && rows[0].outer);
        assert_eq!(slice.to_csv(&rows), "R1_2,R3,achievable,outer\n0,0,1,1\n");
    }

    #[test]
    fn huge_step_leaves_only_origin_inside() {
        let (up, down) = example_channel();
        let slice = RegionSlice {
            base: RateTuple::zeros(3),
            x: MessageId::Private(0),
            y: MessageId::Private(1),
            x_max: q("10"),
            y_max: q("10"),
            step: q("5"),
        };
        let rows = slice.evaluate(&up, &down, Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 9);
        for r in &rows {
            let origin = r.x.is_zero() && r.y.is_zero();
            assert_eq!(r.achievable, origin);
            assert_eq!(r.outer, origin);
        }
    }

    #[test]
    fn slice_crosses_boundary_once() {
        // R2_3 pinned to 0 by the degenerate y range; user 3 needs 0.78 + R1_2
        let (up, down) = example_channel();
        let slice = RegionSlice {
            base: counterexample(),
            x: MessageId::Common(0, 1),
            y: MessageId::Common(1, 2),
            x_max: q("1/2"),
            y_max: q("0"),
            step: q("1/100"),
        };
        let rows = slice.evaluate(&up, &down, Execution::Parallel).unwrap();
        assert_eq!(rows.len(), 51);
        let flips = rows.windows(2).filter(|w| w[0].achievable != w[1].achievable).count();
        assert_eq!(flips, 1);
        let first_not = rows.iter().position(|r| !r.achievable).unwrap();
        assert_eq!(rows[first_not].x, q("0.22"));
        assert!(rows[first_not].outer);
        assert!(!rows[first_not + 1].outer);
    }

    #[test]
    fn parallel_and_sequential_slices_agree() {
        let (up, down) = example_channel();
        let slice = RegionSlice {
            base: counterexample(),
            x: MessageId::Private(0),
            y: MessageId::Common(1, 2),
            x_max: q("0.6"),
            y_max: q("0.3"),
            step: q("0.05"),
        };
        let a = slice.evaluate(&up, &down, Execution::Sequential).unwrap();
        let b = slice.evaluate(&up, &down, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn formats_rates() {
        assert_eq!(format_rate(&q("0.39")), "0.39");
        assert_eq!(format_rate(&q("1/3")), "1/3");
        assert_eq!(format_rate(&q("2")), "2");
    }
}
