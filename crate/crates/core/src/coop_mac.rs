//! Two-user MAC with cooperating encoders.
//!
//! Each user splits its power between a fresh message (decoded by the other
//! user) and a common message beamed coherently with the other user. Users
//! pay for decoding each other's fresh message out of their own budgets; the
//! destination pays from its harvest, as in the classical case.
//!
//! Rates always sit at the user-user link bounds, `R1 = g(b P12)` and
//! `R2 = g(c P21)`.

use rayon::prelude::*;

use crate::classical_simul::mdrb_simultaneous;
use crate::error::{Error, Result};
use crate::models::{snr_for_rate, ClassicalParams, CoopParams, PowerAllocation};
use crate::numerics::{bisect_bracket, maximize_scan, solve_2x2, RootConfig, ScanConfig};
use crate::region::{upper_hull, BoundaryCurve, BoundaryPoint, PointTag, RatePoint};

/// Signed slack of each constraint: bound minus usage. Rates in bits,
/// budgets in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoopSlacks {
    pub link1: f64,
    pub link2: f64,
    pub sum_rate: f64,
    pub dest_cost: f64,
    pub budget1: f64,
    pub budget2: f64,
}

impl CoopSlacks {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.link1,
            self.link2,
            self.sum_rate,
            self.dest_cost,
            self.budget1,
            self.budget2,
        ]
    }

    pub fn min(&self) -> f64 {
        self.as_array().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn feasible(&self, tol: f64) -> bool {
        self.min() >= -tol
    }
}

pub fn coop_constraints_eval(
    params: &CoopParams,
    alloc: &PowerAllocation,
    rho: f64,
    r1: f64,
    r2: f64,
) -> CoopSlacks {
    let s = params.received_power(alloc);
    let sum = r1 + r2;
    CoopSlacks {
        link1: params.link_rate1(alloc.p12) - r1,
        link2: params.link_rate2(alloc.p21) - r2,
        sum_rate: params.rate_sum(rho, s) - sum,
        dest_cost: params.cost_dest.rate_for_power(params.harvested(rho, s)) - sum,
        budget1: params.p_u1_budget - params.cost_user1.eval_unchecked(r2) - alloc.p1(),
        budget2: params.p_u2_budget - params.cost_user2.eval_unchecked(r1) - alloc.p2(),
    }
}

/// A weighted-sum-rate optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoopSolution {
    pub mu1: f64,
    pub mu2: f64,
    pub alloc: PowerAllocation,
    pub rho: f64,
    pub r1: f64,
    pub r2: f64,
    pub weighted_rate: f64,
    /// Equality residuals: budget 1 (W), budget 2 (W), destination cost
    /// (W, harvest minus decoding power), destination sum rate (bits).
    pub constraint_residuals: [f64; 4],
    /// Non-negative powers and `ρ ∈ [0, 1]`.
    pub cooperation_valid: bool,
    /// The destination sum-rate bound holds at the solution.
    pub constraint36_satisfied: bool,
    /// The destination constraints are slack: the fresh power hit `Pu ≥ 0`
    /// before the destination limit.
    pub interior: bool,
}

pub(crate) fn residuals(
    params: &CoopParams,
    alloc: &PowerAllocation,
    rho: f64,
    r1: f64,
    r2: f64,
) -> [f64; 4] {
    let s = params.received_power(alloc);
    [
        params.p_u1_budget - alloc.p12 - alloc.pu1 - params.cost_user1.eval_unchecked(r2),
        params.p_u2_budget - alloc.p21 - alloc.pu2 - params.cost_user2.eval_unchecked(r1),
        params.harvested(rho, s) - params.cost_dest.eval_unchecked(r1 + r2),
        params.rate_sum(rho, s) - (r1 + r2),
    ]
}

fn build(
    params: &CoopParams,
    mu1: f64,
    mu2: f64,
    alloc: PowerAllocation,
    rho: f64,
    interior: bool,
) -> CoopSolution {
    let r1 = params.link_rate1(alloc.p12);
    let r2 = params.link_rate2(alloc.p21);
    let s = params.received_power(&alloc);
    let finite = r1.is_finite() && r2.is_finite();
    let constraint36_satisfied = finite && params.rate_sum(rho, s) - (r1 + r2) >= -1e-9;
    CoopSolution {
        mu1,
        mu2,
        alloc,
        rho,
        r1,
        r2,
        weighted_rate: mu1 * r1 + mu2 * r2,
        constraint_residuals: residuals(params, &alloc, rho, r1, r2),
        cooperation_valid: finite && alloc.is_non_negative() && (0.0..=1.0).contains(&rho),
        constraint36_satisfied,
        interior,
    }
}

/// Closed-form stationary point together with its intermediate quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoopClosedForm {
    pub solution: CoopSolution,
    pub coop_c: f64,
    pub coop_d: f64,
    pub coop_e: f64,
    pub coop_f: f64,
    pub coop_c1: f64,
    pub coop_c2: f64,
    /// `P_U1 − βc P_U2`
    pub coop_a: f64,
    /// `P_U2 − βb P_U1`
    pub coop_b: f64,
    /// `1 − β² b c`
    pub k: f64,
}

impl CoopClosedForm {
    /// Residuals of the two stationarity equations at the returned powers.
    pub fn stationarity_residuals(&self) -> (f64, f64) {
        let a = &self.solution.alloc;
        (
            self.coop_d * a.pu2 - self.coop_c * a.pu1 - self.coop_c1,
            self.coop_e * a.pu1 - self.coop_f * a.pu2 - self.coop_c2,
        )
    }
}

fn p4(params: &CoopParams) -> Result<(f64, f64)> {
    params.p4_constants().ok_or_else(|| {
        Error::Precondition(
            "needs a linear harvester and one exponential cost shared by all receivers".into(),
        )
    })
}

/// Fresh powers from the budget equalities given the common powers
/// (linear harvester, common exponential cost).
pub fn p4_fresh_powers(params: &CoopParams, beta: f64, pu1: f64, pu2: f64) -> (f64, f64) {
    let (b, c) = (params.b(), params.c());
    let k = 1.0 - beta * beta * b * c;
    let coop_a = params.p_u1_budget - beta * c * params.p_u2_budget;
    let coop_b = params.p_u2_budget - beta * b * params.p_u1_budget;
    (
        (coop_a - pu1 + beta * c * pu2) / k,
        (coop_b - pu2 + beta * b * pu1) / k,
    )
}

/// Weighted rate as a function of the common powers once the budgets are
/// spent on fresh messages. `-inf` where a fresh power makes a rate
/// undefined.
pub fn coop_p4_objective(
    params: &CoopParams,
    mu1: f64,
    mu2: f64,
    pu1: f64,
    pu2: f64,
) -> Result<f64> {
    let (_, beta) = p4(params)?;
    let (p12, p21) = p4_fresh_powers(params, beta, pu1, pu2);
    let r = |x: f64| {
        if x > -1.0 {
            crate::models::half_log2_1p(x)
        } else {
            f64::NEG_INFINITY
        }
    };
    Ok(mu1 * r(params.b() * p12) + mu2 * r(params.c() * p21))
}

/// Stationary point of the weighted rate in the common powers for a linear
/// harvester and one exponential cost, with `ρ` set by the destination cost
/// equality.
pub fn coop_solve_closed_form(params: &CoopParams, mu1: f64, mu2: f64) -> Result<CoopClosedForm> {
    params.validate()?;
    let (eta, beta) = p4(params)?;
    let (b, c) = (params.b(), params.c());
    let bc = b * c;
    let k = 1.0 - beta * beta * bc;
    if k.abs() <= 1e-12 {
        return Err(Error::NonUnique {
            value: beta * beta * bc,
        });
    }
    let coop_a = params.p_u1_budget - beta * c * params.p_u2_budget;
    let coop_b = params.p_u2_budget - beta * b * params.p_u1_budget;
    let coop_c = beta * b * bc * (mu1 + mu2);
    let coop_d = bc * (mu1 + mu2 * beta * beta * bc);
    let coop_e = bc * (mu2 + mu1 * beta * beta * bc);
    let coop_f = beta * bc * c * (mu1 + mu2);
    let coop_c1 = mu1 * b * (k + coop_b * c) - mu2 * beta * bc * (k + coop_a * b);
    let coop_c2 = mu2 * c * (k + coop_a * b) - mu1 * beta * bc * (k + coop_b * c);

    let (pu1, pu2) =
        solve_2x2(-coop_c, coop_d, coop_e, -coop_f, coop_c1, coop_c2).map_err(|e| match e {
            Error::Singular { .. } => Error::NonUnique {
                value: beta * beta * bc,
            },
            other => other,
        })?;
    let (p12, p21) = p4_fresh_powers(params, beta, pu1, pu2);
    let alloc = PowerAllocation { p12, p21, pu1, pu2 };
    let s = params.received_power(&alloc);
    let rho = beta * (b * p12 + c * p21 + bc * p12 * p21) / (eta * (s + params.n));
    Ok(CoopClosedForm {
        solution: build(params, mu1, mu2, alloc, rho, false),
        coop_c,
        coop_d,
        coop_e,
        coop_f,
        coop_c1,
        coop_c2,
        coop_a,
        coop_b,
        k,
    })
}

/// Best sum rate the destination supports for received power `s`, and the
/// PS factor achieving it: where the rising cost bound meets the falling
/// sum-rate bound. At the returned `ρ` the cost bound is not below the cap.
pub fn destination_cap(params: &CoopParams, s: f64) -> (f64, f64) {
    let cost = |rho: f64| params.cost_dest.rate_for_power(params.harvested(rho, s));
    let rate = |rho: f64| params.rate_sum(rho, s);
    let gap = |rho: f64| cost(rho) - rate(rho);
    if gap(0.0) >= 0.0 {
        return (0.0, rate(0.0));
    }
    let cfg = RootConfig {
        abs_tol: 1e-14,
        max_iter: 200,
    };
    match bisect_bracket(gap, 0.0, 1.0, &cfg) {
        Ok((_, hi)) => (hi, rate(hi).min(cost(hi))),
        Err(_) => (1.0, 0.0),
    }
}

/// State of the search for a fixed `P21`.
struct Fixed<'a> {
    params: &'a CoopParams,
    p21: f64,
    r2: f64,
}

impl Fixed<'_> {
    fn alloc(&self, p12: f64) -> (PowerAllocation, f64) {
        let p = self.params;
        let r1 = p.link_rate1(p12);
        let alloc = PowerAllocation {
            p12,
            p21: self.p21,
            pu1: (p.p_u1_budget - p12 - p.cost_user1.eval_unchecked(self.r2)).max(0.0),
            pu2: (p.p_u2_budget - self.p21 - p.cost_user2.eval_unchecked(r1)).max(0.0),
        };
        (alloc, r1)
    }

    /// Destination headroom (bits) and PS factor at fresh power `p12`.
    fn slack(&self, p12: f64) -> (f64, f64) {
        let (alloc, r1) = self.alloc(p12);
        let (rho, cap) = destination_cap(self.params, self.params.received_power(&alloc));
        (cap - r1 - self.r2, rho)
    }

    /// Largest `P12` keeping both common powers non-negative.
    fn p12_max(&self) -> Option<f64> {
        let p = self.params;
        let by_budget1 = p.p_u1_budget - p.cost_user1.eval_unchecked(self.r2);
        let left2 = p.p_u2_budget - self.p21;
        if by_budget1 < 0.0 || left2 < 0.0 {
            return None;
        }
        let by_budget2 = match p.cost_user2.inverse_unchecked(left2) {
            crate::models::CostInverse::Finite(r) => snr_for_rate(r) / p.b(),
            crate::models::CostInverse::Unbounded => f64::INFINITY,
        };
        Some(by_budget1.min(by_budget2))
    }

    /// `(p12, rho, interior)` maximising `P12`, or `None` if even `P12 = 0`
    /// overloads the destination.
    fn solve(&self) -> Option<(f64, f64, bool)> {
        let hi = self.p12_max()?;
        let (s_hi, rho_hi) = self.slack(hi);
        if s_hi >= 0.0 {
            return Some((hi, rho_hi, true));
        }
        let (s_lo, rho_lo) = self.slack(0.0);
        if s_lo < 0.0 {
            return None;
        }
        if s_lo == 0.0 || hi == 0.0 {
            return Some((0.0, rho_lo, false));
        }
        let cfg = RootConfig {
            abs_tol: 1e-15 * hi.max(1.0),
            max_iter: 200,
        };
        let (lo, _) = bisect_bracket(|x| self.slack(x).0, 0.0, hi, &cfg).ok()?;
        let (_, rho) = self.slack(lo);
        Some((lo, rho, false))
    }
}

/// Weighted-sum-rate optimum for any harvester and cost families.
///
/// For a fixed user-2 fresh power the budgets fix both common powers as
/// functions of `P12`; the destination headroom then decreases in `P12`,
/// so the best `P12` is the largest feasible one (bisection). The outer
/// search over `P21` uses [`maximize_scan`].
pub fn coop_solve_general(
    params: &CoopParams,
    mu1: f64,
    mu2: f64,
    scan: &ScanConfig,
) -> Result<CoopSolution> {
    params.validate()?;
    if !(mu1 >= 0.0 && mu2 >= 0.0 && mu1 + mu2 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "weights",
            reason: format!("need non-negative weights, not both zero; got ({mu1}, {mu2})"),
        });
    }
    let at = |p21: f64| {
        let fixed = Fixed {
            params,
            p21,
            r2: params.link_rate2(p21),
        };
        fixed.solve().map(|(p12, rho, interior)| {
            let (alloc, _) = fixed.alloc(p12);
            (alloc, rho, interior)
        })
    };
    let objective = |p21: f64| match at(p21) {
        Some((alloc, _, _)) => {
            mu1 * params.link_rate1(alloc.p12) + mu2 * params.link_rate2(alloc.p21)
        }
        None => f64::NEG_INFINITY,
    };

    let by_budget1 = match params.cost_user1.inverse_unchecked(params.p_u1_budget) {
        crate::models::CostInverse::Finite(r) => snr_for_rate(r) / params.c(),
        crate::models::CostInverse::Unbounded => f64::INFINITY,
    };
    let p21_max = params.p_u2_budget.min(by_budget1);
    let p21 = if p21_max > 0.0 {
        let (x, v) = maximize_scan(objective, 0.0, p21_max, scan)?;
        if v == f64::NEG_INFINITY {
            return Err(Error::Infeasible(
                "no fresh-power split satisfies the destination".into(),
            ));
        }
        x
    } else {
        0.0
    };
    let (alloc, rho, interior) = at(p21).ok_or_else(|| {
        Error::Infeasible("no fresh-power split satisfies the destination".into())
    })?;
    Ok(build(params, mu1, mu2, alloc, rho, interior))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoopSolver {
    ClosedForm,
    General(ScanConfig),
}

impl CoopSolver {
    /// General solver with a scan resolution suited to frontier sweeps.
    pub fn general() -> Self {
        CoopSolver::General(ScanConfig {
            grid_points: 257,
            refine_iters: 100,
        })
    }
}

/// `(t, 1 − t)` for `n` evenly spaced `t ∈ [0, 1]`.
pub fn default_weights(n: usize) -> Vec<(f64, f64)> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            (t, 1.0 - t)
        })
        .collect()
}

/// The classical MAC with the same users, each transmitting its whole budget.
pub fn classical_equivalent(params: &CoopParams) -> Result<ClassicalParams> {
    ClassicalParams::new(
        params.h1 * params.h1,
        params.h2 * params.h2,
        params.p_u1_budget,
        params.p_u2_budget,
        params.n,
        params.n_p,
        params.eh,
        params.cost_dest,
    )
}

fn classical_best(curve: &BoundaryCurve, mu1: f64, mu2: f64) -> Option<RatePoint> {
    curve
        .rate_points()
        .max_by(|a, b| (mu1 * a.r1 + mu2 * a.r2).total_cmp(&(mu1 * b.r1 + mu2 * b.r2)))
}

/// Cooperative frontier traced by weighted-sum-rate maximisation. Weight
/// pairs whose cooperative solution is invalid (or infeasible) use the best
/// classical simultaneous-decoding point instead and are tagged as such.
pub fn coop_mdrb(params: &CoopParams, weights: &[(f64, f64)], solver: CoopSolver) -> BoundaryCurve {
    if let Err(e) = params.validate() {
        return BoundaryCurve::empty(e.to_string());
    }
    let classical = classical_equivalent(params)
        .map(|c| mdrb_simultaneous(&c, 512))
        .unwrap_or_default();
    let points: Vec<BoundaryPoint> = weights
        .par_iter()
        .filter_map(|&(mu1, mu2)| {
            let solved = match solver {
                CoopSolver::ClosedForm => coop_solve_closed_form(params, mu1, mu2)
                    .ok()
                    .map(|cf| cf.solution)
                    .filter(|s| s.cooperation_valid && s.constraint36_satisfied),
                CoopSolver::General(scan) => coop_solve_general(params, mu1, mu2, &scan).ok(),
            };
            match solved {
                Some(s) => Some(BoundaryPoint::new(
                    RatePoint::new(s.r1, s.r2, s.rho),
                    PointTag::Coop {
                        mu1,
                        mu2,
                        alloc: s.alloc,
                        fallback: false,
                    },
                )),
                None => classical_best(&classical, mu1, mu2).map(|p| {
                    BoundaryPoint::new(
                        p,
                        PointTag::Coop {
                            mu1,
                            mu2,
                            alloc: PowerAllocation {
                                p12: 0.0,
                                p21: 0.0,
                                pu1: 0.0,
                                pu2: 0.0,
                            },
                            fallback: true,
                        },
                    )
                }),
            }
        })
        .collect();
    if points.is_empty() {
        return BoundaryCurve::empty("no weight pair produced a feasible point");
    }
    upper_hull(&points)
}
