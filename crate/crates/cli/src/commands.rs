use std::io::Write;

use anyhow::{bail, Context, Result};
use swipt_mac::{
    coop_mdrb, coop_solve_closed_form, coop_solve_general, default_weights, mdrb_sic,
    mdrb_simultaneous, oracle_coop_weighted, oracle_sic_sumrate, oracle_simul_sumrate,
    sic_rates_at, sic_sumrate_closed_form, sic_sumrate_numeric, sumrate_simultaneous,
    BoundaryCurve, ClassicalParams, CoopParams, CoopSolution, CoopSolver, CostModel, EhModel,
};

use crate::config::{Channel, CoopMethod, RunConfig, Scenario};

/// Equality residual tolerance, watts.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Sum-rate agreement between an analytic solver and its 1-D oracle, bits.
pub const CLASSICAL_TOL: f64 = 1e-4;
/// Weighted-rate agreement between the cooperative solver and its 3-D oracle, bits.
pub const COOP_TOL: f64 = 5e-3;

const UNITS: &str = "# rates in bits per channel use, powers in W, rho dimensionless";

fn classical(cfg: &RunConfig) -> Result<&ClassicalParams> {
    match &cfg.channel {
        Channel::Classical(p) => Ok(p),
        Channel::Coop(_) => bail!(
            "scenario `{}` has no classical channel",
            cfg.scenario.name()
        ),
    }
}

fn coop(cfg: &RunConfig) -> Result<&CoopParams> {
    match &cfg.channel {
        Channel::Coop(p) => Ok(p),
        Channel::Classical(_) => bail!("scenario `{}` is not cooperative", cfg.scenario.name()),
    }
}

fn solver(cfg: &RunConfig) -> CoopSolver {
    match cfg.coop_method {
        CoopMethod::General => CoopSolver::General(cfg.sweep.scan),
        CoopMethod::ClosedForm => CoopSolver::ClosedForm,
    }
}

/// Boundary of the configured scenario's region.
pub fn region(cfg: &RunConfig) -> Result<BoundaryCurve> {
    let n = cfg.sweep.region_points;
    Ok(match cfg.scenario {
        Scenario::ClassicalSimul => mdrb_simultaneous(classical(cfg)?, n),
        Scenario::ClassicalSic => mdrb_sic(classical(cfg)?, n),
        Scenario::Coop => coop_mdrb(coop(cfg)?, &default_weights(cfg.sweep.weights), solver(cfg)),
    })
}

/// Writes the region boundary as CSV, rows by increasing `r2`.
pub fn cmd_region<W: Write>(cfg: &RunConfig, out: W) -> Result<()> {
    let curve = region(cfg)?;
    let mut out = out;
    writeln!(out, "{UNITS}")?;
    if curve.is_empty() {
        let reason = curve.diagnostic.as_deref().unwrap_or("region is empty");
        writeln!(out, "# empty: {}", reason.replace('\n', " "))?;
    }
    let mut points = curve.points.clone();
    points.sort_by(|a, b| {
        a.point
            .r2
            .total_cmp(&b.point.r2)
            .then(b.point.r1.total_cmp(&a.point.r1))
    });
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r2_bits", "r1_bits", "rho", "order_or_weights", "hulled"])?;
    for b in &points {
        w.write_record([
            b.point.r2.to_string(),
            b.point.r1.to_string(),
            b.point.rho.to_string(),
            b.tag.to_string(),
            curve.hulled.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One sweep row: sum rate at `ρ` and which bound limits it.
fn sweep_point(cfg: &RunConfig, p: &ClassicalParams, rho: f64) -> (f64, &'static str) {
    match cfg.scenario {
        Scenario::ClassicalSic => {
            let (pt, _, bound) = sic_rates_at(p, rho);
            (pt.sum(), if bound { "rate" } else { "cost" })
        }
        _ => {
            let rate = p.rate_sum(rho);
            let cost = p.cost_rate_bound(rho).capped(f64::INFINITY);
            if rate <= cost {
                (rate, "rate")
            } else {
                (cost, "cost")
            }
        }
    }
}

/// Sum rate against `ρ` on the configured grid, then the optimum row.
pub fn cmd_sumrate_sweep<W: Write>(cfg: &RunConfig, out: W) -> Result<()> {
    let p = classical(cfg)?;
    let mut out = out;
    writeln!(out, "{UNITS}")?;
    let n = cfg.sweep.rho_points;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rho", "sum_rate_bits", "binding_constraint"])?;
    for i in 0..n {
        let rho = i as f64 / (n - 1) as f64;
        let (sum, binding) = sweep_point(cfg, p, rho);
        w.write_record([rho.to_string(), sum.to_string(), binding.to_string()])?;
    }
    let opt = match cfg.scenario {
        Scenario::ClassicalSic => sic_sumrate_numeric(p),
        _ => sumrate_simultaneous(p),
    };
    match opt {
        Ok(r) => w.write_record([r.rho.to_string(), r.sum_rate.to_string(), "opt".to_string()])?,
        Err(e) => {
            w.flush()?;
            let mut out = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
            writeln!(out, "# no optimum: {e}")?;
            return Ok(());
        }
    }
    w.flush()?;
    Ok(())
}

fn solve_coop(cfg: &RunConfig, p: &CoopParams, mu1: f64, mu2: f64) -> Result<CoopSolution> {
    Ok(match cfg.coop_method {
        CoopMethod::General => coop_solve_general(p, mu1, mu2, &cfg.sweep.scan)?,
        CoopMethod::ClosedForm => coop_solve_closed_form(p, mu1, mu2)?.solution,
    })
}

/// Per-weight cooperative optima.
pub fn cmd_coop<W: Write>(cfg: &RunConfig, out: W) -> Result<()> {
    let p = coop(cfg)?;
    let mut out = out;
    writeln!(out, "{UNITS}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "mu1",
        "mu2",
        "r1_bits",
        "r2_bits",
        "weighted_bits",
        "rho",
        "p12_w",
        "p21_w",
        "pu1_w",
        "pu2_w",
        "cooperation_valid",
        "interior",
    ])?;
    for (mu1, mu2) in default_weights(cfg.sweep.weights) {
        let s = solve_coop(cfg, p, mu1, mu2).with_context(|| format!("weights ({mu1}, {mu2})"))?;
        w.write_record([
            mu1.to_string(),
            mu2.to_string(),
            s.r1.to_string(),
            s.r2.to_string(),
            s.weighted_rate.to_string(),
            s.rho.to_string(),
            s.alloc.p12.to_string(),
            s.alloc.p21.to_string(),
            s.alloc.pu1.to_string(),
            s.alloc.pu2.to_string(),
            s.cooperation_valid.to_string(),
            s.interior.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

struct Verdict<'a, W: Write> {
    out: &'a mut W,
    pass: bool,
}

impl<W: Write> Verdict<'_, W> {
    fn check(&mut self, what: &str, value: f64, tol: f64) -> Result<()> {
        let ok = value.abs() <= tol;
        self.pass &= ok;
        writeln!(
            self.out,
            "{} {what}: {value:.3e} (tol {tol:.0e})",
            if ok { "PASS" } else { "FAIL" }
        )?;
        Ok(())
    }

    fn note(&mut self, text: impl std::fmt::Display) -> Result<()> {
        writeln!(self.out, "     {text}")?;
        Ok(())
    }
}

/// Runs the scenario's oracle against its analytic solver. Returns `true`
/// when every check passes.
pub fn cmd_verify<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<bool> {
    writeln!(out, "verify {}", cfg.scenario.name())?;
    let mut v = Verdict { out, pass: true };
    let step = cfg.sweep.oracle_step;
    match cfg.scenario {
        Scenario::ClassicalSimul => {
            let p = classical(cfg)?;
            let r = sumrate_simultaneous(p)?;
            let o = oracle_simul_sumrate(p, step)?;
            v.note(format!(
                "analytic rho {:.6} sum {:.9}; oracle rho {:.6} sum {:.9}",
                r.rho, r.sum_rate, o.rho, o.sum_rate
            ))?;
            let s = |x: f64| p.cost_rate_bound(x).capped(p.rate_sum(x));
            let slope = ((s((r.rho + step).min(1.0)) - r.sum_rate).abs())
                .max((r.sum_rate - s((r.rho - step).max(0.0))).abs())
                / step;
            v.check(
                "sum-rate gap vs oracle",
                r.sum_rate - o.sum_rate,
                CLASSICAL_TOL.max(slope * step),
            )?;
            if r.rho > 0.0 && r.rho < 1.0 {
                v.check("harvest equality residual (W)", r.residual, RESIDUAL_TOL)?;
            } else {
                v.note("optimum on the rho boundary: harvest equality not required")?;
            }
        }
        Scenario::ClassicalSic => {
            let p = classical(cfg)?;
            let r = sic_sumrate_numeric(p)?;
            let o = oracle_sic_sumrate(p, step)?;
            v.note(format!(
                "numeric rho {:.6} sum {:.9} ({}); oracle rho {:.6} sum {:.9}",
                r.rho,
                r.sum_rate,
                r.order.map(|o| o.to_string()).unwrap_or_default(),
                o.rho,
                o.sum_rate
            ))?;
            v.check(
                "sum-rate gap vs oracle",
                r.sum_rate - o.sum_rate,
                CLASSICAL_TOL,
            )?;
            v.check(
                "harvest fully consumed, residual (W)",
                r.residual,
                RESIDUAL_TOL,
            )?;
            if matches!(
                (p.eh, p.cost),
                (EhModel::Linear { .. }, CostModel::Exp { .. })
            ) {
                let c = sic_sumrate_closed_form(p)?;
                v.note(format!(
                    "closed form rho {:.6} sum {:.9}",
                    c.rho_opt, c.sum_rate
                ))?;
                if !c.ordered {
                    v.note(
                        "closed-form root lies past the sum-rate peak; it is not the optimum here",
                    )?;
                }
                if c.noise_warning {
                    v.note("N > N_p/100: the closed form neglects N")?;
                }
                v.check(
                    "closed form vs numeric",
                    c.sum_rate - r.sum_rate,
                    CLASSICAL_TOL,
                )?;
                v.check(
                    "closed form vs oracle",
                    c.sum_rate - o.sum_rate,
                    CLASSICAL_TOL,
                )?;
            }
        }
        Scenario::Coop => {
            let p = coop(cfg)?;
            let g = cfg.sweep.oracle_grid;
            for (mu1, mu2) in default_weights(10) {
                let s = solve_coop(cfg, p, mu1, mu2)?;
                let o = oracle_coop_weighted(p, mu1, mu2, [g, g, g])?;
                v.note(format!(
                    "weights ({mu1:.3}, {mu2:.3}): solver {:.6} bits, oracle {:.6} bits{}",
                    s.weighted_rate,
                    o.weighted_rate,
                    if s.cooperation_valid {
                        ""
                    } else {
                        " (solver point invalid)"
                    }
                ))?;
                v.check(
                    "  weighted-rate gap",
                    s.weighted_rate - o.weighted_rate,
                    COOP_TOL,
                )?;
                let budgets = s.constraint_residuals[0]
                    .abs()
                    .max(s.constraint_residuals[1].abs());
                v.check("  budget equality residual (W)", budgets, RESIDUAL_TOL)?;
            }
        }
    }
    let pass = v.pass;
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
    Ok(pass)
}
