//! Brute-force grid verifiers. Nothing here uses a breakpoint, a closed form
//! or a root finder; every optimum is the best cell of a uniform grid.

use rayon::prelude::*;

use crate::coop_mac::{coop_constraints_eval, residuals, CoopSolution};
use crate::error::{Error, Result};
use crate::models::{snr_for_rate, ClassicalParams, CoopParams, CostModel, PowerAllocation};

/// Best grid cell of a classical oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptimum {
    pub rho: f64,
    pub sum_rate: f64,
    pub r1: f64,
    pub r2: f64,
}

fn rho_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1e-3) {
        return Err(Error::InvalidParameter {
            name: "rho_step",
            reason: format!("must lie in (0, 1e-3], got {step}"),
        });
    }
    let n = (1.0 / step).round() as usize;
    Ok((0..=n).map(|i| (i as f64 * step).min(1.0)).collect())
}

fn best(cells: impl ParallelIterator<Item = OracleOptimum>) -> OracleOptimum {
    cells.reduce(
        || OracleOptimum {
            rho: 0.0,
            sum_rate: f64::NEG_INFINITY,
            r1: 0.0,
            r2: 0.0,
        },
        |a, b| {
            if b.sum_rate > a.sum_rate || (b.sum_rate == a.sum_rate && b.rho < a.rho) {
                b
            } else {
                a
            }
        },
    )
}

/// Simultaneous decoding: per `ρ`, the smaller of the sum-rate bound and the
/// rate the harvest can pay for.
pub fn oracle_simul_sumrate(params: &ClassicalParams, rho_step: f64) -> Result<OracleOptimum> {
    let grid = rho_grid(rho_step)?;
    Ok(best(grid.into_par_iter().map(|rho| {
        let sum = params.cost_rate_bound(rho).capped(params.rate_sum(rho));
        let r1 = params.rate1(rho).min(sum);
        OracleOptimum {
            rho,
            sum_rate: sum,
            r1,
            r2: sum - r1,
        }
    })))
}

/// Best `(first, second)` SIC split at `rho` with `first` decoded under
/// interference: one rate at its bound, the other from the leftover harvest.
fn sic_cell(p: &ClassicalParams, rho: f64) -> (f64, f64) {
    let phi = |r: f64| p.cost.eval_unchecked(r);
    let harvest = p.harvested(rho);
    let u_first = p.rate1_under_interference(rho);
    let u_second = p.rate2(rho);
    let leftover = |spent: f64, cap: f64| {
        if harvest < spent {
            None
        } else {
            Some(p.cost.inverse_unchecked(harvest - spent).capped(cap))
        }
    };
    let mut options = vec![
        // neither bound reachable: the harvest alone limits one user
        (p.cost.inverse_unchecked(harvest).capped(u_first), 0.0),
        (0.0, p.cost.inverse_unchecked(harvest).capped(u_second)),
    ];
    if let Some(first) = leftover(phi(u_second), u_first) {
        options.push((first, u_second));
    }
    if let Some(second) = leftover(phi(u_first), u_second) {
        options.push((u_first, second));
    }
    options
        .into_iter()
        .max_by(|a, b| (a.0 + a.1).total_cmp(&(b.0 + b.1)))
        .expect("non-empty")
}

/// SIC: per `ρ` and decoding order, each individual bound binds in turn and
/// the other rate takes the remaining harvest.
pub fn oracle_sic_sumrate(params: &ClassicalParams, rho_step: f64) -> Result<OracleOptimum> {
    let grid = rho_grid(rho_step)?;
    let swapped = params.swapped();
    Ok(best(grid.into_par_iter().map(|rho| {
        let (f, s) = sic_cell(params, rho);
        let (s2, f2) = sic_cell(&swapped, rho);
        // second tuple is in swapped labels: (user 2, user 1)
        let (r1, r2) = if f + s >= s2 + f2 { (f, s) } else { (f2, s2) };
        OracleOptimum {
            rho,
            sum_rate: r1 + r2,
            r1,
            r2,
        }
    })))
}

/// SIC oracle restricted to one decoding order.
pub fn oracle_sic_sumrate_order(
    params: &ClassicalParams,
    rho_step: f64,
    user2_first: bool,
) -> Result<OracleOptimum> {
    let grid = rho_grid(rho_step)?;
    let p = if user2_first {
        params.swapped()
    } else {
        *params
    };
    Ok(best(grid.into_par_iter().map(|rho| {
        let (first, second) = sic_cell(&p, rho);
        let (r1, r2) = if user2_first {
            (second, first)
        } else {
            (first, second)
        };
        OracleOptimum {
            rho,
            sum_rate: r1 + r2,
            r1,
            r2,
        }
    })))
}

/// Cooperative weighted rate on a `(P12, P21, ρ)` grid with `grid` points
/// per axis. The common powers follow from the two budget equalities, which
/// are linear when the user costs are exponential. The fresh-power axes stop
/// where a user link alone would outrun anything the destination can decode.
pub fn oracle_coop_weighted(
    params: &CoopParams,
    mu1: f64,
    mu2: f64,
    grid: [usize; 3],
) -> Result<CoopSolution> {
    params.validate()?;
    let (beta1, beta2) = match (params.cost_user1, params.cost_user2) {
        (CostModel::Exp { beta: b1 }, CostModel::Exp { beta: b2 }) => (b1, b2),
        _ => {
            return Err(Error::Precondition(
                "oracle needs exponential user costs".into(),
            ))
        }
    };
    if grid.iter().any(|&n| n < 2) {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "need at least 2 points per axis".into(),
        });
    }
    let (b, c) = (params.b(), params.c());
    let coherent =
        (params.h1 * params.p_u1_budget.sqrt() + params.h2 * params.p_u2_budget.sqrt()).powi(2);
    let rate_ceiling = params
        .cost_dest
        .inverse_unchecked(params.harvested(1.0, coherent))
        .capped(params.rate_sum(0.0, coherent));
    let useful = snr_for_rate(rate_ceiling);
    let axis = |hi: f64, n: usize| -> Vec<f64> {
        (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
    };
    let p12s = axis(params.p_u1_budget.min(useful / b), grid[0]);
    let p21s = axis(params.p_u2_budget.min(useful / c), grid[1]);
    let rhos = axis(1.0, grid[2]);

    let zero = CoopSolution {
        mu1,
        mu2,
        alloc: PowerAllocation::default(),
        rho: 0.0,
        r1: 0.0,
        r2: 0.0,
        weighted_rate: 0.0,
        constraint_residuals: [0.0; 4],
        cooperation_valid: true,
        constraint36_satisfied: true,
        interior: true,
    };
    let pick = |a: CoopSolution, b: CoopSolution| {
        if b.weighted_rate > a.weighted_rate {
            b
        } else {
            a
        }
    };

    let found = p12s
        .par_iter()
        .map(|&p12| {
            let mut best = zero;
            for &p21 in &p21s {
                // budgets: Pu1 = P_U1 − P12 − β1 c P21, Pu2 = P_U2 − P21 − β2 b P12
                let pu1 = params.p_u1_budget - p12 - beta1 * c * p21;
                let pu2 = params.p_u2_budget - p21 - beta2 * b * p12;
                if pu1 < 0.0 || pu2 < 0.0 {
                    continue;
                }
                let alloc = PowerAllocation { p12, p21, pu1, pu2 };
                let s = params.received_power(&alloc);
                let (l1, l2) = (params.link_rate1(p12), params.link_rate2(p21));
                for &rho in &rhos {
                    let cap = params
                        .cost_dest
                        .inverse_unchecked(params.harvested(rho, s))
                        .capped(params.rate_sum(rho, s));
                    let (r1, r2) = if mu1 >= mu2 {
                        let r1 = l1.min(cap);
                        (r1, l2.min(cap - r1))
                    } else {
                        let r2 = l2.min(cap);
                        (l1.min(cap - r2), r2)
                    };
                    let w = mu1 * r1 + mu2 * r2;
                    if w > best.weighted_rate
                        && coop_constraints_eval(params, &alloc, rho, r1, r2).feasible(1e-12)
                    {
                        best = CoopSolution {
                            alloc,
                            rho,
                            r1,
                            r2,
                            weighted_rate: w,
                            constraint_residuals: residuals(params, &alloc, rho, r1, r2),
                            ..zero
                        };
                    }
                }
            }
            best
        })
        .reduce(|| zero, pick);
    Ok(found)
}
