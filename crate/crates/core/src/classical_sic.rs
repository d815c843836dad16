//! Classical MAC with successive interference cancellation.
//!
//! The destination decodes one user treating the other as noise, cancels it,
//! then decodes the second cleanly. Each message is charged separately, so
//! the cost constraint is `φ(R1) + φ(R2) ≤ ψ(ρ a)`.
//!
//! All solvers work in an oriented frame in which "user 1" is decoded first;
//! the other order is the same computation on the swapped channel.

use std::fmt;

use crate::classical_simul::{within, Candidate, SolveReport};
use crate::error::{Error, Result};
use crate::models::{half_log2_1p, ClassicalParams, CostModel, EhModel};
use crate::numerics::{bisect_root, critical_points, RootConfig, ScanConfig};
use crate::region::{upper_hull, BoundaryCurve, BoundaryPoint, PointTag, RatePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodingOrder {
    User1First,
    User2First,
}

impl DecodingOrder {
    pub fn other(self) -> Self {
        match self {
            DecodingOrder::User1First => DecodingOrder::User2First,
            DecodingOrder::User2First => DecodingOrder::User1First,
        }
    }
}

impl fmt::Display for DecodingOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodingOrder::User1First => write!(f, "user1-first"),
            DecodingOrder::User2First => write!(f, "user2-first"),
        }
    }
}

/// Channel seen from `order`: the user decoded first is labelled 1.
fn oriented(params: &ClassicalParams, order: DecodingOrder) -> ClassicalParams {
    match order {
        DecodingOrder::User1First => *params,
        DecodingOrder::User2First => params.swapped(),
    }
}

/// Maps an oriented `(first, second)` rate pair back to user labels.
fn unorient(order: DecodingOrder, first: f64, second: f64) -> (f64, f64) {
    match order {
        DecodingOrder::User1First => (first, second),
        DecodingOrder::User2First => (second, first),
    }
}

/// PS factors delimiting one decoding order's boundary. A breakpoint is
/// `None` when the harvest can never pay for it (constant cost only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SicBreakpoints {
    /// Both rates at their bounds.
    pub rho_c: Option<f64>,
    /// Second-decoded user at its bound, first-decoded user gets the rest.
    pub rho_1: Option<f64>,
    /// First-decoded user at its bound.
    pub rho_2: Option<f64>,
    pub order: DecodingOrder,
}

/// Closed-form optimum for a linear harvester, exponential cost and
/// negligible antenna noise. Users are labelled so that user 1 is stronger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SicClosedForm {
    pub rho_opt: f64,
    pub sum_rate: f64,
    pub r1: f64,
    pub r2: f64,
    /// Received power of the stronger user.
    pub sic_a: f64,
    pub sic_b: f64,
    pub sic_c: f64,
    pub delta: f64,
    /// Coefficients of `−qa ρ² + qb ρ − qc ≤ 0`.
    pub quad_a: f64,
    pub quad_b: f64,
    pub quad_c: f64,
    /// Smaller quadratic root: the weak user's bound stops binding above it.
    pub rho_1: f64,
    /// Below this the weak user's own decoding cost is unaffordable.
    pub rho_2: f64,
    /// End of the interval on which the sum rate increases.
    pub rho_ceiling: f64,
    pub relabeled: bool,
    /// `N ≤ N_p / 100` failed; the formula is only an approximation.
    pub noise_warning: bool,
    /// `rho_2 ≤ ρ̃ ≤ rho_ceiling`. When false the sum rate peaks at
    /// `rho_ceiling` before the root is reached and `ρ̃` is not optimal.
    pub ordered: bool,
}

/// Interference-limited bound of the first-decoded user, `g2(1−ρ)`.
fn first_bound(p: &ClassicalParams, rho: f64) -> f64 {
    p.rate1_under_interference(rho)
}

/// Clean bound of the second-decoded user, `g1(1−ρ)`.
fn second_bound(p: &ClassicalParams, rho: f64) -> f64 {
    p.rate2(rho)
}

/// Checks the SIC rate bounds and the separate-cost constraint.
pub fn sic_feasible(params: &ClassicalParams, point: &RatePoint, order: DecodingOrder) -> bool {
    let RatePoint { r1, r2, rho } = *point;
    if !(r1 >= 0.0 && r2 >= 0.0 && (0.0..=1.0).contains(&rho)) {
        return false;
    }
    let p = oriented(params, order);
    let (first, second) = unorient(order, r1, r2);
    if !(within(first, first_bound(&p, rho)) && within(second, second_bound(&p, rho))) {
        return false;
    }
    let cost = p.cost.eval_unchecked(first) + p.cost.eval_unchecked(second);
    cost == 0.0 || within(cost, p.harvested(rho))
}

/// Smallest `ρ` at which the harvest covers `required(ρ)` (non-increasing).
fn affordable_from<F: Fn(f64) -> f64>(p: &ClassicalParams, required: F) -> Result<Option<f64>> {
    let gap = |rho: f64| p.harvested(rho) - required(rho);
    if gap(0.0) >= 0.0 {
        return Ok(Some(0.0));
    }
    if gap(1.0) < 0.0 {
        return Ok(None);
    }
    bisect_root(gap, 0.0, 1.0, &RootConfig::default()).map(Some)
}

fn const_from(p: &ClassicalParams, need: f64) -> Result<Option<f64>> {
    if need <= 0.0 {
        return Ok(Some(0.0));
    }
    if p.harvested(1.0) < need {
        return Ok(None);
    }
    bisect_root(
        |rho| p.harvested(rho) - need,
        0.0,
        1.0,
        &RootConfig::default(),
    )
    .map(Some)
}

pub fn sic_breakpoints(params: &ClassicalParams, order: DecodingOrder) -> Result<SicBreakpoints> {
    params.validate()?;
    let p = oriented(params, order);
    let cost = p.cost;
    let (rho_c, rho_1, rho_2) = match cost {
        CostModel::Const { phi0 } => {
            let single = const_from(&p, phi0)?;
            (const_from(&p, 2.0 * phi0)?, single, single)
        }
        _ => {
            let phi = |r: f64| cost.eval_unchecked(r);
            let rho_c =
                affordable_from(&p, |x| phi(first_bound(&p, x)) + phi(second_bound(&p, x)))?;
            let rho_1 = affordable_from(&p, |x| phi(second_bound(&p, x)))?;
            let rho_2 = affordable_from(&p, |x| phi(first_bound(&p, x)))?;
            (rho_c, rho_1, rho_2)
        }
    };
    let clamp = |r: Option<f64>| match (r, rho_c) {
        (Some(r), Some(c)) => Some(r.min(c)),
        (r, _) => r,
    };
    Ok(SicBreakpoints {
        rho_c,
        rho_1: clamp(rho_1),
        rho_2: clamp(rho_2),
        order,
    })
}

/// `Γ(x) = ψ^{-1}(required(x)) / x` for the three SIC breakpoints; each
/// equals `a` at its breakpoint. Returns `(Γ_c, Γ_1, Γ_2)`.
pub fn sic_gammas(
    params: &ClassicalParams,
    order: DecodingOrder,
    x: f64,
) -> Result<(f64, f64, f64)> {
    let p = oriented(params, order);
    let phi1 = p.cost.eval_unchecked(first_bound(&p, x));
    let phi2 = p.cost.eval_unchecked(second_bound(&p, x));
    let g = |need: f64| p.eh.inverse(need).map(|pin| pin / x);
    Ok((g(phi1 + phi2)?, g(phi2)?, g(phi1)?))
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

/// Rate left for one user after the other is paid for, capped by its bound.
fn residual_rate(p: &ClassicalParams, rho: f64, spent: f64, cap: f64) -> f64 {
    let left = p.harvested(rho) - spent;
    if left < 0.0 {
        return 0.0;
    }
    p.cost.inverse_unchecked(left).capped(cap)
}

/// Best SIC rate pair at a fixed `ρ` over both decoding orders, and whether
/// both individual rate bounds bind there (otherwise the harvest does).
pub fn sic_rates_at(params: &ClassicalParams, rho: f64) -> (RatePoint, DecodingOrder, bool) {
    let mut best = (
        RatePoint::new(0.0, 0.0, rho),
        DecodingOrder::User1First,
        false,
    );
    for order in [DecodingOrder::User1First, DecodingOrder::User2First] {
        let p = oriented(params, order);
        let (u1, u2) = (first_bound(&p, rho), second_bound(&p, rho));
        let harvest = p.harvested(rho);
        let alone = |cap: f64| p.cost.inverse_unchecked(harvest).capped(cap);
        let mut splits = vec![(alone(u1), 0.0), (0.0, alone(u2))];
        if harvest >= p.cost.eval_unchecked(u2) {
            splits.push((residual_rate(&p, rho, p.cost.eval_unchecked(u2), u1), u2));
        }
        if harvest >= p.cost.eval_unchecked(u1) {
            splits.push((u1, residual_rate(&p, rho, p.cost.eval_unchecked(u1), u2)));
        }
        for (first, second) in splits {
            if first + second > best.0.sum() {
                let (r1, r2) = unorient(order, first, second);
                let bound = first >= u1 && second >= u2;
                best = (RatePoint::new(r1, r2, rho), order, bound);
            }
        }
    }
    best
}

/// Points `(first, second, rho)` of both segments for one oriented order.
fn segments(p: &ClassicalParams, bp: &SicBreakpoints, n: usize) -> Vec<(f64, f64, f64)> {
    let hi = bp.rho_c.unwrap_or(1.0);
    let mut out = Vec::with_capacity(2 * n);
    if let Some(lo) = bp.rho_1 {
        for rho in linspace(lo, hi, n) {
            let second = second_bound(p, rho);
            let first = residual_rate(p, rho, p.cost.eval_unchecked(second), first_bound(p, rho));
            out.push((first, second, rho));
        }
    }
    if let Some(lo) = bp.rho_2 {
        for rho in linspace(lo, hi, n) {
            let first = first_bound(p, rho);
            let second = residual_rate(p, rho, p.cost.eval_unchecked(first), second_bound(p, rho));
            out.push((first, second, rho));
        }
    }
    out
}

/// Boundary of the SIC region: both decoding orders, `n_points` samples per
/// segment, joined by the time-sharing hull.
pub fn mdrb_sic(params: &ClassicalParams, n_points: usize) -> BoundaryCurve {
    if let Err(e) = params.validate() {
        return BoundaryCurve::empty(e.to_string());
    }
    let mut points = Vec::new();
    for order in [DecodingOrder::User1First, DecodingOrder::User2First] {
        let p = oriented(params, order);
        let bp = match sic_breakpoints(params, order) {
            Ok(bp) => bp,
            Err(e) => return BoundaryCurve::empty(e.to_string()),
        };
        for (first, second, rho) in segments(&p, &bp, n_points) {
            let (r1, r2) = unorient(order, first, second);
            points.push(BoundaryPoint::new(
                RatePoint::new(r1, r2, rho),
                PointTag::Sic(order),
            ));
        }
    }
    if points.is_empty() {
        return BoundaryCurve::empty("harvest cannot pay for decoding either user in any order");
    }
    upper_hull(&points)
}

/// Options of the numeric SIC sum-rate search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SicOptions {
    pub scan: ScanConfig,
    /// Evaluate the second candidate function with the first-decoded cost
    /// term replaced by the second-decoded one, as some printings have it.
    pub printed_f2: bool,
    /// Search the weaker-user-first order too.
    pub both_orders: bool,
}

impl Default for SicOptions {
    fn default() -> Self {
        SicOptions {
            scan: ScanConfig::default(),
            printed_f2: false,
            both_orders: true,
        }
    }
}

/// Optimal SIC sum rate by candidate enumeration with default options.
pub fn sic_sumrate_numeric(params: &ClassicalParams) -> Result<SolveReport> {
    sic_sumrate_numeric_with(params, &SicOptions::default())
}

pub fn sic_sumrate_numeric_with(
    params: &ClassicalParams,
    opts: &SicOptions,
) -> Result<SolveReport> {
    params.validate()?;
    let relabeled = params.rx2() > params.rx1();
    let primary = if relabeled {
        DecodingOrder::User2First
    } else {
        DecodingOrder::User1First
    };
    let orders: Vec<DecodingOrder> = if opts.both_orders {
        vec![primary, primary.other()]
    } else {
        vec![primary]
    };

    let mut candidates: Vec<(Candidate, f64, f64)> = Vec::new();
    for order in orders {
        let p = oriented(params, order);
        let bp = sic_breakpoints(params, order)?;
        let hi = bp.rho_c.unwrap_or(1.0);
        let phi = |r: f64| p.cost.eval_unchecked(r);

        // f1: second-decoded user at its bound
        let f1_split = |x: f64| {
            let second = second_bound(&p, x);
            let first = residual_rate(&p, x, phi(second), first_bound(&p, x));
            (first, second)
        };
        // f2: first-decoded user at its bound
        let f2_split = |x: f64| {
            let first = first_bound(&p, x);
            let spent = if opts.printed_f2 {
                phi(second_bound(&p, x))
            } else {
                phi(first)
            };
            let second = residual_rate(&p, x, spent, second_bound(&p, x));
            (first, second)
        };
        let mut push = |x: f64, split: (f64, f64), tag: &str| {
            let (r1, r2) = unorient(order, split.0, split.1);
            candidates.push((
                Candidate {
                    rho: x,
                    sum_rate: r1 + r2,
                    source: tag.to_string(),
                    order: Some(order),
                },
                r1,
                r2,
            ));
        };
        if let Some(lo) = bp.rho_1 {
            push(lo, f1_split(lo), "f1:lower");
            push(hi, f1_split(hi), "f1:upper");
            let f = |x: f64| {
                let (a, b) = f1_split(x);
                a + b
            };
            for x in critical_points(f, lo, hi, &opts.scan) {
                push(x, f1_split(x), "f1:critical");
            }
        }
        if let Some(lo) = bp.rho_2 {
            push(lo, f2_split(lo), "f2:lower");
            push(hi, f2_split(hi), "f2:upper");
            let f = |x: f64| {
                let (a, b) = f2_split(x);
                a + b
            };
            for x in critical_points(f, lo, hi, &opts.scan) {
                push(x, f2_split(x), "f2:critical");
            }
        }
    }
    // ties go to the earlier candidate, so the primary order wins them
    let (best, r1, r2) = candidates
        .iter()
        .filter(|c| c.0.sum_rate.is_finite())
        .fold(None::<&(Candidate, f64, f64)>, |best, c| match best {
            Some(b) if b.0.sum_rate >= c.0.sum_rate => Some(b),
            _ => Some(c),
        })
        .cloned()
        .ok_or_else(|| Error::Infeasible("no SIC decoding order is affordable".into()))?;

    let order = best.order.expect("every SIC candidate carries its order");
    let p = oriented(params, order);
    let (first, second) = unorient(order, r1, r2);
    let residual =
        p.harvested(best.rho) - p.cost.eval_unchecked(first) - p.cost.eval_unchecked(second);
    let mut warnings = Vec::new();
    if relabeled {
        warnings.push("user 2 is stronger; it is decoded first in the primary order".to_string());
    }
    Ok(SolveReport {
        rho: best.rho,
        sum_rate: best.sum_rate,
        r1,
        r2,
        residual,
        upper_bound: params.cost.rate_for_power(params.harvested(1.0)),
        order: Some(order),
        relabeled,
        candidates: candidates.into_iter().map(|c| c.0).collect(),
        grid_points: Some(opts.scan.grid_points),
        warnings,
    })
}

/// Closed-form SIC optimum for a linear harvester and exponential cost with
/// the antenna noise neglected in the decoding branch.
pub fn sic_sumrate_closed_form(params: &ClassicalParams) -> Result<SicClosedForm> {
    params.validate()?;
    let (eta, beta) = match (params.eh, params.cost) {
        (EhModel::Linear { eta }, CostModel::Exp { beta }) => (eta, beta),
        _ => {
            return Err(Error::Precondition(
                "closed form needs a linear harvester and exponential cost".into(),
            ))
        }
    };
    let relabeled = params.rx2() > params.rx1();
    let p = if relabeled { params.swapped() } else { *params };
    let (a_pow, b_pow) = (p.rx1(), p.rx2());
    let c_pow = a_pow + b_pow;
    let a = p.a();
    let np = p.n_p;
    let ea = eta * a;

    let inner = (ea * b_pow - beta * c_pow).powi(2)
        + ea * (ea * np * np
            + 2.0 * ea * np * b_pow
            + 2.0 * beta * c_pow * np
            + 4.0 * beta * b_pow * b_pow);
    if !(inner > 0.0) {
        return Err(Error::Internal(format!(
            "discriminant {inner} is not positive"
        )));
    }
    let delta = np * inner.sqrt();

    let quad_a = b_pow * (ea * np + beta * b_pow);
    let quad_b = ea * np * (b_pow + np) + beta * (2.0 * b_pow * b_pow + c_pow * np);
    let quad_c = beta * (b_pow * b_pow + a_pow * np + b_pow * np);
    // smaller root of qa ρ² − qb ρ + qc, written without cancellation
    let rho_1 = 2.0 * quad_c / (quad_b + delta);
    let rho_2 = beta * b_pow / (beta * b_pow + ea * np);
    let rho_ceiling =
        0.5 * (1.0 + (beta * b_pow * b_pow + ea * np * np) / ((beta * b_pow + ea * np) * b_pow));

    let ordered = rho_2 <= rho_1 * (1.0 + 1e-12) && rho_1 <= rho_ceiling * (1.0 + 1e-12);
    let keep = 1.0 - rho_1;
    let r_strong = half_log2_1p(keep * a_pow / (keep * p.n_u() + np));
    let r_weak = half_log2_1p(keep * b_pow / np);
    let (r1, r2) = if relabeled {
        (r_weak, r_strong)
    } else {
        (r_strong, r_weak)
    };
    Ok(SicClosedForm {
        rho_opt: rho_1,
        sum_rate: r_strong + r_weak,
        r1,
        r2,
        sic_a: a_pow,
        sic_b: b_pow,
        sic_c: c_pow,
        delta,
        quad_a,
        quad_b,
        quad_c,
        rho_1,
        rho_2,
        rho_ceiling,
        relabeled,
        noise_warning: p.n > np / 100.0,
        ordered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical_simul::{mdrb_simultaneous, simul_breakpoints, sumrate_simultaneous};
    use crate::models::IdNoise;
    use crate::region::{dominates, hausdorff};

    fn reference(cost: CostModel) -> ClassicalParams {
        ClassicalParams::reference(EhModel::reference_logistic(), cost)
    }

    fn lemma(beta: f64) -> ClassicalParams {
        let mut p = ClassicalParams::reference(
            EhModel::linear(1.0).unwrap(),
            CostModel::exp(beta).unwrap(),
        );
        p.n = 1e-12;
        p
    }

    #[test]
    fn zero_point_feasible_any_rho() {
        let p = reference(CostModel::exp(1e-3).unwrap());
        for rho in [0.0, 0.3, 1.0] {
            assert!(sic_feasible(
                &p,
                &RatePoint::new(0.0, 0.0, rho),
                DecodingOrder::User1First
            ));
        }
    }

    #[test]
    fn cost_violation_detected() {
        let p = reference(CostModel::exp(1e-3).unwrap());
        let bp = sic_breakpoints(&p, DecodingOrder::User1First).unwrap();
        // between the breakpoints the harvest covers the first user's bound
        // but not both
        let rho = 0.5 * (bp.rho_2.unwrap() + bp.rho_c.unwrap());
        let r1 = p.rate1_under_interference(rho);
        let left = p.harvested(rho) - p.cost.eval_unchecked(r1);
        assert!(left > 0.0);
        let r2 = p.cost.inverse_unchecked(left).capped(f64::INFINITY);
        assert!(r2 < p.rate2(rho));
        assert!(!sic_feasible(
            &p,
            &RatePoint::new(r1, r2 + 1e-6, rho),
            DecodingOrder::User1First
        ));
        assert!(sic_feasible(
            &p,
            &RatePoint::new(r1, r2 * (1.0 - 1e-9), rho),
            DecodingOrder::User1First
        ));
    }

    #[test]
    fn lin_cost_breakpoint_matches_simultaneous() {
        let p = ClassicalParams::reference(
            EhModel::linear(0.8).unwrap(),
            CostModel::lin(1e-3).unwrap(),
        );
        let sic = sic_breakpoints(&p, DecodingOrder::User1First).unwrap();
        let simul = simul_breakpoints(&p).unwrap();
        assert!((sic.rho_c.unwrap() - simul.rho_c).abs() < 1e-8);
    }

    #[test]
    fn free_decoding() {
        let p = reference(CostModel::exp(1e-12).unwrap());
        let bp = sic_breakpoints(&p, DecodingOrder::User1First).unwrap();
        assert!(bp.rho_c.unwrap() < 1e-6);
    }

    #[test]
    fn gamma_residual() {
        let p = reference(CostModel::exp(1e-3).unwrap());
        for order in [DecodingOrder::User1First, DecodingOrder::User2First] {
            let bp = sic_breakpoints(&p, order).unwrap();
            let rho_c = bp.rho_c.unwrap();
            let (gc, _, _) = sic_gammas(&p, order, rho_c).unwrap();
            assert!((gc - p.a()).abs() < 1e-10 * p.a(), "{gc} vs {}", p.a());
            let (_, g1, _) = sic_gammas(&p, order, bp.rho_1.unwrap()).unwrap();
            assert!((g1 - p.a()).abs() < 1e-10 * p.a());
        }
    }

    #[test]
    fn exp_cost_sic_beats_simultaneous() {
        let p = reference(CostModel::exp(1e-3).unwrap());
        assert!(dominates(
            &mdrb_sic(&p, 256),
            &mdrb_simultaneous(&p, 256),
            1e-6
        ));
    }

    #[test]
    fn log_cost_simultaneous_beats_sic() {
        let p = reference(CostModel::log(1e-3).unwrap());
        assert!(dominates(
            &mdrb_simultaneous(&p, 256),
            &mdrb_sic(&p, 256),
            1e-6
        ));
    }

    #[test]
    fn lin_cost_regions_coincide() {
        let p = reference(CostModel::lin(1e-3).unwrap());
        let d = hausdorff(&mdrb_simultaneous(&p, 256), &mdrb_sic(&p, 256));
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn constant_cost_between_half_and_full_ceiling() {
        let p = reference(CostModel::constant(0.013).unwrap());
        let curve = mdrb_sic(&p, 64);
        assert!(!curve.is_empty());
        assert!(curve
            .points
            .iter()
            .all(|b| b.point.r1 <= 1e-9 || b.point.r2 <= 1e-9));
        assert!(curve.max_r1() > 0.1 && curve.max_r2() > 0.1);
    }

    #[test]
    fn order_swap_mirrors_region() {
        let mut p = reference(CostModel::exp(1e-3).unwrap());
        p.p2 = 0.3;
        let a = mdrb_sic(&p, 128);
        let b = mdrb_sic(&p.swapped(), 128);
        let mirrored: Vec<_> = b
            .points
            .iter()
            .map(|q| BoundaryPoint::raw(q.point.r2, q.point.r1))
            .collect();
        let m = upper_hull(&mirrored);
        assert!(hausdorff(&a, &m) < 1e-9);
    }

    #[test]
    fn time_sharing_bridges_orders() {
        let p = reference(CostModel::exp(1e-3).unwrap());
        let curve = mdrb_sic(&p, 128);
        let tags: Vec<_> = curve.points.iter().map(|b| b.tag).collect();
        let switch = tags.windows(2).position(|w| {
            w[0] != w[1] && !matches!(w[0], PointTag::Axis) && !matches!(w[1], PointTag::Axis)
        });
        assert!(switch.is_some(), "hull should switch decoding order once");
    }

    #[test]
    fn lin_numeric_matches_simultaneous() {
        let p = ClassicalParams::reference(
            EhModel::linear(1.0).unwrap(),
            CostModel::lin(1e-3).unwrap(),
        );
        let sic = sic_sumrate_numeric(&p).unwrap();
        let simul = sumrate_simultaneous(&p).unwrap();
        assert!((sic.sum_rate - simul.sum_rate).abs() < 1e-6);
    }

    #[test]
    fn closed_form_matches_numeric() {
        let p = lemma(1e-3);
        let cf = sic_sumrate_closed_form(&p).unwrap();
        let num = sic_sumrate_numeric(&p).unwrap();
        assert!(
            (cf.sum_rate - num.sum_rate).abs() < 1e-6,
            "{} vs {}",
            cf.sum_rate,
            num.sum_rate
        );
        assert!(!cf.noise_warning);
    }

    #[test]
    fn rates_at_fixed_rho_are_feasible_and_peak_at_the_optimum() {
        let p = reference(CostModel::exp(1e-3).unwrap());
        let best = sic_sumrate_numeric(&p).unwrap();
        let mut peak = 0f64;
        for i in 0..=1000 {
            let (pt, order, _) = sic_rates_at(&p, i as f64 / 1000.0);
            assert!(sic_feasible(&p, &pt, order), "{pt:?}");
            peak = peak.max(pt.sum());
        }
        assert!(peak <= best.sum_rate + 1e-9);
        assert!(peak > best.sum_rate - 1e-2);
        let (at_opt, _, _) = sic_rates_at(&p, best.rho);
        assert!((at_opt.sum() - best.sum_rate).abs() < 1e-9);
    }

    #[test]
    fn strong_asymmetry_peaks_before_the_root() {
        // A ≫ B with costly decoding: the sum rate turns down before the
        // quadratic root, so the root is feasible but not optimal
        let p = ClassicalParams::new(
            0.0218,
            0.00263,
            0.79,
            0.63,
            1e-12,
            3e-4,
            EhModel::linear(0.52).unwrap(),
            CostModel::exp(2.7e-3).unwrap(),
        )
        .unwrap();
        let cf = sic_sumrate_closed_form(&p).unwrap();
        assert!(!cf.ordered && cf.rho_opt > cf.rho_ceiling);
        let num = sic_sumrate_numeric(&p).unwrap();
        assert!((num.rho - cf.rho_ceiling).abs() < 1e-6);
        assert!(num.sum_rate > cf.sum_rate + 1e-3);
    }

    #[test]
    fn closed_form_spends_all_harvest() {
        let p = lemma(1e-3);
        let cf = sic_sumrate_closed_form(&p).unwrap();
        let (eta, beta) = (1.0, 1e-3);
        let spent =
            beta * (crate::models::snr_for_rate(cf.r1) + crate::models::snr_for_rate(cf.r2));
        assert!((spent - eta * cf.rho_opt * p.a()).abs() < 1e-9);
        let q = p.with_id_noise(IdNoise::ProcessingOnly);
        assert!((cf.r1 - q.rate1_under_interference(cf.rho_opt)).abs() < 1e-9);
        assert!((cf.r2 - q.rate2(cf.rho_opt)).abs() < 1e-9);
    }

    #[test]
    fn discriminant_identity() {
        let p = lemma(2e-3);
        let cf = sic_sumrate_closed_form(&p).unwrap();
        let disc = cf.quad_b * cf.quad_b - 4.0 * cf.quad_a * cf.quad_c;
        assert!((cf.delta - disc.sqrt()).abs() < 1e-9 * cf.delta);
        let (beta, ea, np, b) = (2e-3, p.a(), p.n_p, cf.sic_b);
        let textbook = 0.5
            * (1.0
                + (beta * b * b + beta * cf.sic_c * np + ea * np * np - cf.delta)
                    / (beta * b * b + ea * np * b));
        assert!((textbook - cf.rho_opt).abs() < 1e-6);
    }

    #[test]
    fn silent_second_user_limit() {
        let mut p = lemma(1e-3);
        p.p2 = 1e-12;
        let cf = sic_sumrate_closed_form(&p).unwrap();
        let (a_pow, a) = (p.rx1(), p.rx1() + p.n);
        let expected = 1e-3 * a_pow / (1e-3 * a_pow + a * p.n_p);
        assert!((cf.rho_opt - expected).abs() < 1e-6);
    }

    #[test]
    fn symmetric_users_label_invariant() {
        let p = lemma(1e-3);
        let a = sic_sumrate_closed_form(&p).unwrap();
        let b = sic_sumrate_closed_form(&p.swapped()).unwrap();
        assert!((a.sum_rate - b.sum_rate).abs() < 1e-12);
    }

    #[test]
    fn weaker_first_is_relabeled() {
        let mut p = lemma(1e-3);
        p.p1 = 0.2;
        let rep = sic_sumrate_numeric(&p).unwrap();
        assert!(rep.relabeled);
        let cf = sic_sumrate_closed_form(&p).unwrap();
        assert!(cf.relabeled);
        assert!((rep.sum_rate - cf.sum_rate).abs() < 1e-6);
    }

    #[test]
    fn printed_f2_option_evaluates() {
        let p = reference(CostModel::exp(1e-3).unwrap());
        let opts = SicOptions {
            printed_f2: true,
            ..SicOptions::default()
        };
        let printed = sic_sumrate_numeric_with(&p, &opts).unwrap();
        assert!(printed
            .candidates
            .iter()
            .any(|c| c.source.starts_with("f2")));
        assert!(printed.candidates.iter().all(|c| c.sum_rate.is_finite()));
    }
}
