//! Rate-region boundaries: representation, time-sharing hull, dominance and
//! distance between frontiers.
//!
//! Curves live in the `(r2, r1)` plane, ordered by increasing `r2`. Regions
//! are downward closed, so a curve stands for everything on or below it.

use std::fmt;

use crate::classical_sic::DecodingOrder;
use crate::models::PowerAllocation;

/// An achievable rate pair and the PS factor that achieves it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
    pub rho: f64,
}

impl RatePoint {
    pub fn new(r1: f64, r2: f64, rho: f64) -> Self {
        RatePoint { r1, r2, rho }
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Which piece of a simultaneous-decoding boundary a sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulSegment {
    /// User 2 at its individual bound, user 1 takes the remaining cost budget.
    User2Bound,
    /// User 1 at its individual bound.
    User1Bound,
    /// Both the sum-rate and the cost bound tight.
    Corner,
}

/// Solver metadata carried by every boundary sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointTag {
    Simultaneous(SimulSegment),
    Sic(DecodingOrder),
    Coop {
        mu1: f64,
        mu2: f64,
        alloc: PowerAllocation,
        /// The weight pair fell back to the classical frontier.
        fallback: bool,
    },
    /// Projection of the curve onto an axis (downward closure).
    Axis,
    Raw,
}

impl fmt::Display for PointTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointTag::Simultaneous(SimulSegment::User2Bound) => write!(f, "simul:user2-bound"),
            PointTag::Simultaneous(SimulSegment::User1Bound) => write!(f, "simul:user1-bound"),
            PointTag::Simultaneous(SimulSegment::Corner) => write!(f, "simul:corner"),
            PointTag::Sic(order) => write!(f, "sic:{order}"),
            PointTag::Coop {
                mu1, mu2, fallback, ..
            } => {
                write!(f, "mu1={mu1};mu2={mu2}")?;
                if *fallback {
                    write!(f, ";classical")?;
                }
                Ok(())
            }
            PointTag::Axis => write!(f, "axis"),
            PointTag::Raw => write!(f, "raw"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: RatePoint,
    pub tag: PointTag,
}

impl BoundaryPoint {
    pub fn new(point: RatePoint, tag: PointTag) -> Self {
        BoundaryPoint { point, tag }
    }

    pub fn raw(r1: f64, r2: f64) -> Self {
        BoundaryPoint::new(RatePoint::new(r1, r2, f64::NAN), PointTag::Raw)
    }
}

/// A discretised maximum departure region boundary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryCurve {
    /// Strictly increasing `r2`, non-increasing `r1`.
    pub points: Vec<BoundaryPoint>,
    /// The time-sharing hull was applied.
    pub hulled: bool,
    /// Why the curve is empty, when it is.
    pub diagnostic: Option<String>,
}

fn usable(p: &BoundaryPoint) -> bool {
    p.point.r1.is_finite() && p.point.r2.is_finite() && p.point.r1 >= 0.0 && p.point.r2 >= 0.0
}

fn sorted_unique(points: &[BoundaryPoint]) -> Vec<BoundaryPoint> {
    let mut pts: Vec<BoundaryPoint> = points.iter().copied().filter(usable).collect();
    pts.sort_by(|a, b| {
        a.point
            .r2
            .total_cmp(&b.point.r2)
            .then(b.point.r1.total_cmp(&a.point.r1))
    });
    pts.dedup_by(|later, kept| later.point.r2 == kept.point.r2);
    pts
}

impl BoundaryCurve {
    pub fn empty(reason: impl Into<String>) -> Self {
        BoundaryCurve {
            points: Vec::new(),
            hulled: false,
            diagnostic: Some(reason.into()),
        }
    }

    /// Pareto frontier of `points` joined as a polyline (no hull).
    pub fn frontier(points: &[BoundaryPoint]) -> Self {
        let pts = sorted_unique(points);
        let mut keep: Vec<BoundaryPoint> = Vec::with_capacity(pts.len());
        let mut best_r1 = f64::NEG_INFINITY;
        for p in pts.into_iter().rev() {
            if p.point.r1 > best_r1 {
                best_r1 = p.point.r1;
                keep.push(p);
            }
        }
        keep.reverse();
        BoundaryCurve {
            points: keep,
            hulled: false,
            diagnostic: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn max_r1(&self) -> f64 {
        self.points.iter().map(|p| p.point.r1).fold(0.0, f64::max)
    }

    pub fn max_r2(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.point.r2)
    }

    /// Largest sum rate among the samples.
    pub fn max_sum(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.point.sum())
            .fold(0.0, f64::max)
    }

    /// Linear interpolation of `r1` at `r2`; `None` beyond the last sample.
    /// Left of the first sample the region's downward closure gives the
    /// first sample's `r1`.
    pub fn r1_at(&self, r2: f64) -> Option<f64> {
        let pts = &self.points;
        let first = pts.first()?;
        if r2 <= first.point.r2 {
            return Some(first.point.r1);
        }
        let last = pts.last()?;
        if r2 > last.point.r2 {
            return None;
        }
        let idx = pts.partition_point(|p| p.point.r2 < r2);
        let hi = &pts[idx].point;
        if hi.r2 == r2 {
            return Some(hi.r1);
        }
        let lo = &pts[idx - 1].point;
        let t = (r2 - lo.r2) / (hi.r2 - lo.r2);
        Some(lo.r1 + t * (hi.r1 - lo.r1))
    }

    /// Adds the axis projections `(0, first r1)` and `(last r2, 0)` when the
    /// curve stops short of an axis.
    pub fn close_to_axes(mut self) -> Self {
        if let Some(first) = self.points.first().copied() {
            if first.point.r2 > 0.0 {
                let p = RatePoint::new(first.point.r1, 0.0, first.point.rho);
                self.points.insert(0, BoundaryPoint::new(p, PointTag::Axis));
            }
        }
        if let Some(last) = self.points.last().copied() {
            if last.point.r1 > 0.0 {
                // same r2 would break strict ordering; the region already
                // contains the vertical drop below the last sample
                let _ = last;
            }
        }
        self
    }

    pub fn rate_points(&self) -> impl Iterator<Item = RatePoint> + '_ {
        self.points.iter().map(|p| p.point)
    }
}

/// Upper concave envelope of `points` in the `(r2, r1)` plane, with the axis
/// intercepts `(0, max r1)` and `(max r2, 0)` added. Collinear points are
/// kept.
pub fn upper_hull(points: &[BoundaryPoint]) -> BoundaryCurve {
    let pts: Vec<BoundaryPoint> = points.iter().copied().filter(usable).collect();
    if pts.is_empty() {
        return BoundaryCurve::empty("no achievable points");
    }
    let top = *pts
        .iter()
        .max_by(|a, b| {
            a.point
                .r1
                .total_cmp(&b.point.r1)
                .then(b.point.r2.total_cmp(&a.point.r2))
        })
        .expect("non-empty");
    let right = *pts
        .iter()
        .max_by(|a, b| {
            a.point
                .r2
                .total_cmp(&b.point.r2)
                .then(a.point.r1.total_cmp(&b.point.r1))
        })
        .expect("non-empty");

    let mut all = pts;
    all.push(BoundaryPoint::new(
        RatePoint::new(top.point.r1, 0.0, top.point.rho),
        PointTag::Axis,
    ));
    all.push(BoundaryPoint::new(
        RatePoint::new(0.0, right.point.r2, right.point.rho),
        PointTag::Axis,
    ));
    let sorted = sorted_unique(&all);

    let mut hull: Vec<BoundaryPoint> = Vec::with_capacity(sorted.len());
    for p in sorted {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2].point;
            let a = hull[hull.len() - 1].point;
            let (dx1, dy1) = (a.r2 - o.r2, a.r1 - o.r1);
            let (dx2, dy2) = (p.point.r2 - o.r2, p.point.r1 - o.r1);
            let cross = dx1 * dy2 - dy1 * dx2;
            let scale = (dx1.abs() + dy1.abs()) * (dx2.abs() + dy2.abs());
            // positive cross: `a` lies strictly below the chord o -> p
            if cross > 1e-13 * scale {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    BoundaryCurve {
        points: hull,
        hulled: true,
        diagnostic: None,
    }
}

/// `true` iff `a` lies on or above `b` everywhere, within `tol` bits, and
/// reaches at least as far along the `r2` axis.
pub fn dominates(a: &BoundaryCurve, b: &BoundaryCurve, tol: f64) -> bool {
    if b.is_empty() {
        return true;
    }
    if a.is_empty() {
        return false;
    }
    let (a_max, b_max) = (a.max_r2(), b.max_r2());
    if a_max < b_max - tol {
        return false;
    }
    if a.points[0].point.r1 < b.points[0].point.r1 - tol {
        return false;
    }
    let grid = a
        .points
        .iter()
        .chain(b.points.iter())
        .map(|p| p.point.r2)
        .filter(|&r2| r2 <= b_max);
    for r2 in grid {
        let rb = b.r1_at(r2).unwrap_or(0.0);
        let ra = a.r1_at(r2.min(a_max)).unwrap_or(0.0);
        if ra < rb - tol {
            return false;
        }
    }
    true
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len_sq).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

fn distance_to_polyline(p: (f64, f64), curve: &[(f64, f64)]) -> f64 {
    if curve.len() == 1 {
        return point_segment_distance(p, curve[0], curve[0]);
    }
    curve
        .windows(2)
        .map(|w| point_segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

fn directed_hausdorff(from: &[(f64, f64)], to: &[(f64, f64)]) -> f64 {
    // Vertices plus three interior samples per segment.
    let mut worst: f64 = 0.0;
    for (i, &v) in from.iter().enumerate() {
        worst = worst.max(distance_to_polyline(v, to));
        if let Some(&next) = from.get(i + 1) {
            for k in 1..4 {
                let t = k as f64 / 4.0;
                let s = (v.0 + t * (next.0 - v.0), v.1 + t * (next.1 - v.1));
                worst = worst.max(distance_to_polyline(s, to));
            }
        }
    }
    worst
}

/// Symmetric Hausdorff distance between two boundary polylines, in bits.
pub fn hausdorff(a: &BoundaryCurve, b: &BoundaryCurve) -> f64 {
    let pa: Vec<(f64, f64)> = a.rate_points().map(|p| (p.r2, p.r1)).collect();
    let pb: Vec<(f64, f64)> = b.rate_points().map(|p| (p.r2, p.r1)).collect();
    if pa.is_empty() || pb.is_empty() {
        return if pa.is_empty() && pb.is_empty() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    directed_hausdorff(&pa, &pb).max(directed_hausdorff(&pb, &pa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(pairs: &[(f64, f64)]) -> Vec<BoundaryPoint> {
        // (r2, r1) pairs
        pairs
            .iter()
            .map(|&(r2, r1)| BoundaryPoint::raw(r1, r2))
            .collect()
    }

    fn coords(c: &BoundaryCurve) -> Vec<(f64, f64)> {
        c.rate_points().map(|p| (p.r2, p.r1)).collect()
    }

    #[test]
    fn collinear_points_retained() {
        let hull = upper_hull(&raw(&[(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)]));
        assert_eq!(coords(&hull), vec![(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)]);
        assert!(hull.hulled);
    }

    #[test]
    fn point_below_chord_dropped() {
        let hull = upper_hull(&raw(&[(0.0, 2.0), (1.0, 0.5), (2.0, 0.0)]));
        assert_eq!(coords(&hull), vec![(0.0, 2.0), (2.0, 0.0)]);
    }

    #[test]
    fn axis_intercepts_added() {
        let hull = upper_hull(&raw(&[(0.5, 1.0), (1.0, 0.6)]));
        assert_eq!(coords(&hull), vec![(0.0, 1.0), (0.5, 1.0), (1.0, 0.6)]);
    }

    #[test]
    fn empty_input() {
        let hull = upper_hull(&[]);
        assert!(hull.is_empty());
        assert!(hull.diagnostic.is_some());
    }

    #[test]
    fn interpolation() {
        let c = upper_hull(&raw(&[(0.0, 2.0), (2.0, 0.0)]));
        assert_eq!(c.r1_at(1.0), Some(1.0));
        assert_eq!(c.r1_at(-1.0), Some(2.0));
        assert_eq!(c.r1_at(2.5), None);
    }

    fn quarter_circle(n: usize) -> BoundaryCurve {
        let pts: Vec<_> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64 * std::f64::consts::FRAC_PI_2;
                BoundaryPoint::raw(t.cos(), t.sin())
            })
            .collect();
        upper_hull(&pts)
    }

    #[test]
    fn dominance_reflexive_and_scaled() {
        let c = quarter_circle(50);
        assert!(dominates(&c, &c, 0.0));
        let scaled = BoundaryCurve {
            points: c
                .points
                .iter()
                .map(|p| BoundaryPoint::raw(0.9 * p.point.r1, 0.9 * p.point.r2))
                .collect(),
            hulled: true,
            diagnostic: None,
        };
        assert!(dominates(&c, &scaled, 0.0));
        assert!(!dominates(&scaled, &c, 0.0));
    }

    #[test]
    fn hausdorff_identity_and_translation() {
        let c = quarter_circle(40);
        assert!(hausdorff(&c, &c) < 1e-15);
        let d = 0.125;
        let shifted = BoundaryCurve {
            points: c
                .points
                .iter()
                .map(|p| BoundaryPoint::raw(p.point.r1 + d, p.point.r2))
                .collect(),
            hulled: false,
            diagnostic: None,
        };
        assert!((hausdorff(&c, &shifted) - d).abs() < 1e-12);
    }

    #[test]
    fn frontier_drops_dominated() {
        let c = BoundaryCurve::frontier(&raw(&[
            (0.0, 1.0),
            (0.5, 0.4),
            (0.4, 0.8),
            (1.0, 0.1),
            (0.6, 0.9),
        ]));
        assert_eq!(coords(&c), vec![(0.0, 1.0), (0.6, 0.9), (1.0, 0.1)]);
    }

    fn arb_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0f64..3.0, 0.0f64..3.0), 1..40)
    }

    proptest! {
        #[test]
        fn hull_is_idempotent(pts in arb_points()) {
            let h1 = upper_hull(&raw(&pts));
            let h2 = upper_hull(&h1.points);
            prop_assert_eq!(coords(&h1), coords(&h2));
        }

        #[test]
        fn hull_dominates_its_input(pts in arb_points()) {
            let input = raw(&pts);
            let hull = upper_hull(&input);
            prop_assert!(dominates(&hull, &BoundaryCurve::frontier(&input), 1e-12));
            for p in &input {
                let r1 = hull.r1_at(p.point.r2).unwrap();
                prop_assert!(r1 >= p.point.r1 - 1e-12);
            }
        }

        #[test]
        fn hull_slopes_non_increasing(pts in arb_points()) {
            let hull = upper_hull(&raw(&pts));
            let c = coords(&hull);
            let mut last = f64::INFINITY;
            for w in c.windows(2) {
                prop_assert!(w[1].0 > w[0].0);
                prop_assert!(w[1].1 <= w[0].1);
                let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                prop_assert!(slope <= last + 1e-9);
                last = slope;
            }
        }

        #[test]
        fn mutual_dominance_bounds_distance(pts in arb_points(), eps in 0.0f64..0.01) {
            let a = upper_hull(&raw(&pts));
            let b = BoundaryCurve {
                points: a.points.iter().map(|p| BoundaryPoint::raw(p.point.r1 + eps, p.point.r2)).collect(),
                hulled: true,
                diagnostic: None,
            };
            let tol = eps;
            if dominates(&a, &b, tol) && dominates(&b, &a, tol) {
                prop_assert!(hausdorff(&a, &b) <= 2.0 * tol + 1e-12);
            }
        }
    }
}
