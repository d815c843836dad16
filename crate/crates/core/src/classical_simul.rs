//! Classical MAC with joint (simultaneous) decoding of both users.
//!
//! Decoding both messages jointly costs `φ(R1 + R2)`, paid from the harvested
//! power `ψ(ρ a)`. The boundary is traced in rate space: the cost bound
//! `φ^{-1}(ψ(ρ a))` grows with `ρ` while every information-rate bound shrinks,
//! so each breakpoint is a single bracketed crossing.

use crate::classical_sic::DecodingOrder;
use crate::error::{Error, Result};
use crate::models::{ClassicalParams, CostInverse, CostModel, EhModel};
use crate::numerics::{bisect_root, RootConfig};
use crate::region::{
    dominates, upper_hull, BoundaryCurve, BoundaryPoint, PointTag, RatePoint, SimulSegment,
};

/// Relative slack allowed by the feasibility predicates.
pub(crate) const FEAS_RTOL: f64 = 1e-12;

pub(crate) fn within(value: f64, bound: f64) -> bool {
    value <= bound + FEAS_RTOL * bound.abs().max(1e-300)
}

/// PS factors delimiting the simultaneous-decoding boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulBreakpoints {
    /// Cost bound meets the sum-rate bound.
    pub rho_c: f64,
    /// Cost bound meets user 2's individual bound.
    pub rho_1: f64,
    /// Cost bound meets user 1's individual bound.
    pub rho_2: f64,
}

/// One entry of an optimizer's candidate table.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub rho: f64,
    pub sum_rate: f64,
    pub source: String,
    pub order: Option<DecodingOrder>,
}

/// Optimum of a sum-rate problem together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub rho: f64,
    pub sum_rate: f64,
    pub r1: f64,
    pub r2: f64,
    /// Residual of the defining equality at the optimum, in watts.
    pub residual: f64,
    /// `φ^{-1}(ψ(a))`, the rate decodable with everything harvested.
    pub upper_bound: f64,
    pub order: Option<DecodingOrder>,
    /// User labels were exchanged so that user 1 is the stronger one.
    pub relabeled: bool,
    pub candidates: Vec<Candidate>,
    /// Scan resolution behind the candidate search, if any.
    pub grid_points: Option<usize>,
    pub warnings: Vec<String>,
}

/// Checks the two individual bounds, the sum-rate bound and the cost bound.
pub fn simul_feasible(params: &ClassicalParams, point: &RatePoint) -> bool {
    let RatePoint { r1, r2, rho } = *point;
    if !(r1 >= 0.0 && r2 >= 0.0 && (0.0..=1.0).contains(&rho)) {
        return false;
    }
    let sum = r1 + r2;
    if !(within(r1, params.rate1(rho))
        && within(r2, params.rate2(rho))
        && within(sum, params.rate_sum(rho)))
    {
        return false;
    }
    if sum == 0.0 {
        return true;
    }
    within(params.cost.eval_unchecked(sum), params.harvested(rho))
}

fn exp2_twice(r: f64) -> f64 {
    (2.0 * r * std::f64::consts::LN_2).exp()
}

/// `Γ_c(x) = 2^{2 φ^{-1}(ψ(x a))}·(noise) − (1−x)(signal) − ((noise) − N_p)`,
/// which equals `N_p` exactly at the sum-rate breakpoint. With the default
/// noise model this is `2^{2φ^{-1}(ψ(xa))}((1−x)N + N_p) − (1−x)a`.
pub fn gamma_c(params: &ClassicalParams, x: f64) -> f64 {
    let noise = params.id_noise_power(x);
    let growth = match params.cost_rate_bound(x) {
        CostInverse::Finite(r) => exp2_twice(r),
        CostInverse::Unbounded => f64::INFINITY,
    };
    growth * noise - (1.0 - x) * (params.rx1() + params.rx2()) - (noise - params.n_p)
}

pub fn gamma_1(params: &ClassicalParams, x: f64) -> f64 {
    gamma_c(params, x) + (1.0 - x) * params.rx1()
}

pub fn gamma_2(params: &ClassicalParams, x: f64) -> f64 {
    gamma_c(params, x) + (1.0 - x) * params.rx2()
}

/// Residual `φ(R_sum(ρ)) − ψ(ρ a)` of the full-consumption condition.
/// Decreasing in `ρ`; zero at the optimal PS factor.
pub fn eq_residual(params: &ClassicalParams, rho: f64) -> f64 {
    params.cost.eval_unchecked(params.rate_sum(rho)) - params.harvested(rho)
}

/// Smallest `ρ` whose harvest covers the constant decoding cost.
pub(crate) fn const_threshold(params: &ClassicalParams, phi0: f64) -> Result<f64> {
    if phi0 <= 0.0 {
        return Ok(0.0);
    }
    if params.harvested(1.0) < phi0 {
        return Err(Error::Infeasible(format!(
            "harvest {:.6e} W at rho = 1 is below the decoding cost {phi0:e} W",
            params.harvested(1.0)
        )));
    }
    bisect_root(
        |rho| params.harvested(rho) - phi0,
        0.0,
        1.0,
        &RootConfig::default(),
    )
}

/// Crossing of the increasing cost bound with a decreasing rate bound.
fn crossing<F: Fn(f64) -> f64>(params: &ClassicalParams, bound: F) -> Result<f64> {
    let gap = |rho: f64| params.cost.rate_for_power(params.harvested(rho)) - bound(rho);
    if gap(0.0) >= 0.0 {
        return Ok(0.0);
    }
    if gap(1.0) < 0.0 {
        return Err(Error::Infeasible(
            "cost bound never reaches the rate bound".into(),
        ));
    }
    bisect_root(gap, 0.0, 1.0, &RootConfig::default())
}

pub fn simul_breakpoints(params: &ClassicalParams) -> Result<SimulBreakpoints> {
    params.validate()?;
    if let CostModel::Const { phi0 } = params.cost {
        let rho = const_threshold(params, phi0)?;
        return Ok(SimulBreakpoints {
            rho_c: rho,
            rho_1: rho,
            rho_2: rho,
        });
    }
    let rho_c = crossing(params, |r| params.rate_sum(r))?;
    let rho_1 = crossing(params, |r| params.rate2(r))?.min(rho_c);
    let rho_2 = crossing(params, |r| params.rate1(r))?.min(rho_c);
    Ok(SimulBreakpoints {
        rho_c,
        rho_1,
        rho_2,
    })
}

/// Sum rate the harvested power can pay for, capped by the sum-rate bound.
fn sum_cap(params: &ClassicalParams, rho: f64) -> f64 {
    params.cost_rate_bound(rho).capped(params.rate_sum(rho))
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

/// Second-difference test of `x ↦ φ^{-1}(ψ(x))` on `[lo, hi]`.
fn cost_curve_is_convex(params: &ClassicalParams, lo: f64, hi: f64) -> bool {
    if !(hi - lo > 1e-12 * hi.abs().max(1e-300)) {
        return true;
    }
    let values: Vec<f64> = linspace(lo, hi, 257)
        .map(|x| params.cost.rate_for_power(params.eh.eval_unchecked(x)))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values
        .windows(3)
        .all(|w| w[0] - 2.0 * w[1] + w[2] >= -1e-10 * scale)
}

/// Discretised boundary of the simultaneous-decoding region, `n_points`
/// samples per segment. When the cost curve `φ^{-1}∘ψ` is not convex over
/// the swept interval, or the sampled boundary is not concave, time sharing
/// is applied and the curve is flagged `hulled`.
pub fn mdrb_simultaneous(params: &ClassicalParams, n_points: usize) -> BoundaryCurve {
    let bp = match simul_breakpoints(params) {
        Ok(bp) => bp,
        Err(e) => return BoundaryCurve::empty(e.to_string()),
    };
    let n = if bp.rho_1 == bp.rho_c && bp.rho_2 == bp.rho_c {
        1
    } else {
        n_points.max(2)
    };
    let sample = |rho: f64, segment: SimulSegment| {
        let cap = sum_cap(params, rho);
        let (r1, r2) = match segment {
            SimulSegment::User2Bound => {
                let r2 = params.rate2(rho).min(cap);
                ((cap - r2).max(0.0), r2)
            }
            _ => {
                let r1 = params.rate1(rho).min(cap);
                (r1, (cap - r1).max(0.0))
            }
        };
        BoundaryPoint::new(RatePoint::new(r1, r2, rho), PointTag::Simultaneous(segment))
    };

    let mut points = Vec::with_capacity(2 * n);
    // user-1-bound segment runs from the r1 axis toward the corner
    for rho in linspace(bp.rho_2, bp.rho_c, n) {
        points.push(sample(rho, SimulSegment::User1Bound));
    }
    let corner = sample(bp.rho_c, SimulSegment::User2Bound);
    points.push(BoundaryPoint::new(
        corner.point,
        PointTag::Simultaneous(SimulSegment::Corner),
    ));
    let tail: Vec<_> = linspace(bp.rho_1, bp.rho_c, n)
        .map(|rho| sample(rho, SimulSegment::User2Bound))
        .collect();
    points.extend(tail.into_iter().rev());

    let a = params.a();
    let convex = params.cost.is_const()
        || (cost_curve_is_convex(params, a * bp.rho_1, a * bp.rho_c)
            && cost_curve_is_convex(params, a * bp.rho_2, a * bp.rho_c));
    let frontier = BoundaryCurve::frontier(&points).close_to_axes();
    if convex && frontier_is_concave(&frontier) {
        frontier
    } else {
        upper_hull(&points)
    }
}

/// A convex cost curve does not make the sampled boundary concave when the
/// rate bounds bend the other way; time sharing is needed then too.
fn frontier_is_concave(frontier: &BoundaryCurve) -> bool {
    let scale = frontier.max_r1().max(frontier.max_r2()).max(1.0);
    dominates(frontier, &upper_hull(&frontier.points), 1e-12 * scale)
}

/// Optimal PS factor and sum rate: the harvested power exactly pays for
/// decoding at the sum-rate bound.
pub fn sumrate_simultaneous(params: &ClassicalParams) -> Result<SolveReport> {
    params.validate()?;
    let (rho, residual) = match params.cost {
        CostModel::Const { phi0 } => (const_threshold(params, phi0)?, 0.0),
        _ => {
            let rho = if eq_residual(params, 0.0) <= 0.0 {
                0.0
            } else if eq_residual(params, 1.0) >= 0.0 {
                1.0
            } else {
                bisect_root(|r| eq_residual(params, r), 0.0, 1.0, &RootConfig::default())?
            };
            (rho, eq_residual(params, rho))
        }
    };
    let sum_rate = sum_cap(params, rho);
    let upper_bound = params.cost.rate_for_power(params.harvested(1.0));
    if sum_rate > upper_bound * (1.0 + 1e-12) {
        return Err(Error::Internal(format!(
            "sum rate {sum_rate} exceeds the harvest ceiling {upper_bound}"
        )));
    }
    let r1 = params.rate1(rho).min(sum_rate);
    Ok(SolveReport {
        rho,
        sum_rate,
        r1,
        r2: sum_rate - r1,
        residual,
        upper_bound,
        order: None,
        relabeled: false,
        candidates: Vec::new(),
        grid_points: None,
        warnings: Vec::new(),
    })
}

/// Closed-form optimal PS factor for a linear harvester, exponential cost
/// and noise-free decoding branch: `β(a−N) / (β(a−N) + η a N_p)`.
pub fn remark4_rho(params: &ClassicalParams) -> Option<f64> {
    match (params.eh, params.cost) {
        (EhModel::Linear { eta }, CostModel::Exp { beta }) => {
            let a = params.a();
            let signal = a - params.n;
            Some(beta * signal / (beta * signal + eta * a * params.n_p))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{half_log2_1p, IdNoise};

    fn logistic(beta: f64) -> ClassicalParams {
        ClassicalParams::reference(EhModel::reference_logistic(), CostModel::exp(beta).unwrap())
    }

    fn linear(beta: f64) -> ClassicalParams {
        ClassicalParams::reference(EhModel::linear(1.0).unwrap(), CostModel::exp(beta).unwrap())
    }

    #[test]
    fn zero_rates_feasible() {
        let p = logistic(1e-3);
        assert!(simul_feasible(&p, &RatePoint::new(0.0, 0.0, 0.5)));
    }

    #[test]
    fn individual_violation_infeasible() {
        let p = logistic(1e-3);
        let r1 = p.rate1(0.5) + 1e-3;
        assert!(!simul_feasible(&p, &RatePoint::new(r1, 0.0, 0.5)));
    }

    #[test]
    fn optimum_is_feasible_and_tight() {
        let p = logistic(1e-3);
        let rep = sumrate_simultaneous(&p).unwrap();
        let pt = RatePoint::new(rep.r1, rep.r2, rep.rho);
        assert!(simul_feasible(&p, &pt));
        assert!((p.rate_sum(rep.rho) - rep.sum_rate).abs() < 1e-9);
        assert!((p.cost.eval_unchecked(rep.sum_rate) - p.harvested(rep.rho)).abs() < 1e-9);
    }

    #[test]
    fn rho_c_matches_closed_form() {
        let p = linear(1e-3).with_id_noise(IdNoise::ProcessingOnly);
        let bp = simul_breakpoints(&p).unwrap();
        assert!((bp.rho_c - remark4_rho(&p).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn free_decoding_needs_no_harvest() {
        let bp = simul_breakpoints(&logistic(1e-12)).unwrap();
        assert!(bp.rho_c < 1e-6);
    }

    #[test]
    fn breakpoint_residuals() {
        let p = logistic(1e-3);
        let bp = simul_breakpoints(&p).unwrap();
        assert!((gamma_c(&p, bp.rho_c) - p.n_p).abs() < 1e-10);
        assert!((gamma_1(&p, bp.rho_1) - p.n_p).abs() < 1e-10);
        assert!((gamma_2(&p, bp.rho_2) - p.n_p).abs() < 1e-10);
        assert!(bp.rho_1 <= bp.rho_c && bp.rho_2 <= bp.rho_c);
    }

    #[test]
    fn curve_ends_on_single_user_points() {
        let p = logistic(1e-3);
        let bp = simul_breakpoints(&p).unwrap();
        let r1 = (p.cost.rate_for_power(p.harvested(bp.rho_1)) - p.rate2(bp.rho_1)).max(0.0);
        assert!(r1 < 1e-9);
        let curve = mdrb_simultaneous(&p, 64);
        let last = curve.points.last().unwrap().point;
        assert!(last.r1 < 1e-9);
        assert_eq!(curve.points[0].point.r2, 0.0);
    }

    #[test]
    fn remark4_value() {
        let p = linear(1e-3).with_id_noise(IdNoise::ProcessingOnly);
        let rep = sumrate_simultaneous(&p).unwrap();
        let expected = remark4_rho(&p).unwrap();
        assert!((rep.rho - expected).abs() < 1e-9);
        assert!((rep.rho - 0.49998).abs() < 1e-4);
        let rate = half_log2_1p((1.0 - rep.rho) * (p.a() - p.n) / p.n_p);
        assert!((rep.sum_rate - rate).abs() < 1e-9);
        assert!((rep.sum_rate - 1.4215).abs() < 1e-3);
    }

    #[test]
    fn expensive_decoding_starves() {
        let rep = sumrate_simultaneous(&logistic(1e3)).unwrap();
        assert!(rep.rho > 0.999);
        assert!(rep.sum_rate < 1e-3);
    }

    #[test]
    fn optimum_equals_rho_c() {
        let p = logistic(1e-3);
        let rep = sumrate_simultaneous(&p).unwrap();
        assert!(rep.residual.abs() < 1e-9);
        let bp = simul_breakpoints(&p).unwrap();
        assert!((rep.rho - bp.rho_c).abs() < 1e-9);
        assert!(rep.sum_rate <= rep.upper_bound);
    }

    #[test]
    fn constant_cost_above_ceiling_is_empty() {
        let p = logistic(1e-3).with_cost(CostModel::constant(0.025).unwrap());
        let curve = mdrb_simultaneous(&p, 64);
        assert!(curve.is_empty());
        assert!(curve.diagnostic.is_some());
    }

    #[test]
    fn constant_cost_pentagon() {
        let p = logistic(1e-3).with_cost(CostModel::constant(0.013).unwrap());
        let curve = mdrb_simultaneous(&p, 64);
        assert!(curve
            .points
            .iter()
            .any(|b| b.point.r1 > 1e-9 && b.point.r2 > 1e-9));
    }

    #[test]
    fn segment_slopes_steeper_than_minus_one() {
        let p = ClassicalParams::reference(
            EhModel::linear(1.0).unwrap(),
            CostModel::log(1e-3).unwrap(),
        );
        let bp = simul_breakpoints(&p).unwrap();
        let a = p.a();
        assert!(cost_curve_is_convex(&p, a * bp.rho_1, a * bp.rho_c));
        let seg: Vec<(f64, f64)> = linspace(bp.rho_1, bp.rho_c, 128)
            .map(|rho| {
                let r2 = p.rate2(rho);
                (p.cost_rate_bound(rho).capped(f64::INFINITY) - r2, r2)
            })
            .collect();
        for w in seg.windows(2) {
            let slope = (w[1].0 - w[0].0) / (w[1].1 - w[0].1);
            assert!(slope <= -1.0 + 1e-6, "slope {slope}");
        }
        // the segment still bows inward, so the returned boundary is hulled
        assert!(mdrb_simultaneous(&p, 128).hulled);
    }

    #[test]
    fn more_power_never_hurts() {
        let p = logistic(1e-3);
        let mut q = p;
        q.p1 *= 1.1;
        let a = sumrate_simultaneous(&p).unwrap().sum_rate;
        let b = sumrate_simultaneous(&q).unwrap().sum_rate;
        assert!(b >= a);
    }
}
