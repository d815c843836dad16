//! Scalar numerical machinery: bracketed root finding, grid-plus-golden
//! maximisation, critical-point scanning and a 2×2 linear solver.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            abs_tol: 1e-12,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Number of uniformly spaced samples, endpoints included.
    pub grid_points: usize,
    /// Golden-section / bisection iterations spent refining a grid cell.
    pub refine_iters: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            grid_points: 20001,
            refine_iters: 100,
        }
    }
}

impl ScanConfig {
    pub fn with_grid(grid_points: usize) -> Self {
        ScanConfig {
            grid_points,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::InvalidParameter {
                name: "grid_points",
                reason: format!("need at least 3 samples, got {}", self.grid_points),
            });
        }
        Ok(())
    }
}

fn eval_checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_nan() {
        Err(Error::Evaluation { x })
    } else {
        Ok(v)
    }
}

/// Bisection on a sign change of `f` over `[lo, hi]`.
///
/// Infinite values are allowed; only the sign is used. Returns the midpoint
/// of the final bracket (or an endpoint where `f` is exactly zero).
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cfg: &RootConfig) -> Result<f64> {
    let (lo, hi) = bisect_bracket(f, lo, hi, cfg)?;
    Ok(if lo == hi { lo } else { 0.5 * (lo + hi) })
}

/// Final bracket `(lo, hi)` of the bisection, `lo ≤ hi`, with `f(lo)` and
/// `f(hi)` keeping the signs of the initial endpoints. Collapses to a single
/// point when `f` hits zero exactly.
pub fn bisect_bracket<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: &RootConfig,
) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = eval_checked(&f, lo)?;
    let f_hi = eval_checked(&f, hi)?;
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    for _ in 0..cfg.max_iter {
        if hi - lo <= cfg.abs_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = eval_checked(&f, mid)?;
        if f_mid == 0.0 {
            return Ok((mid, mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Global maximum of `f` on `[lo, hi]`: a uniform scan followed by
/// golden-section refinement of the best cell and one parabolic polish.
///
/// Samples that evaluate to NaN are skipped; `-inf` is a valid (worst) value.
pub fn maximize_scan<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: &ScanConfig,
) -> Result<(f64, f64)> {
    cfg.check()?;
    if !(lo < hi) {
        return Err(Error::InvalidParameter {
            name: "interval",
            reason: format!("need lo < hi, got [{lo}, {hi}]"),
        });
    }
    let n = cfg.grid_points;
    let step = (hi - lo) / (n - 1) as f64;
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, x) in grid(lo, hi, n).enumerate() {
        let v = f(x);
        if v.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, _, bv)| v > bv) {
            best = Some((i, x, v));
        }
    }
    let (i, mut bx, mut bv) = best.ok_or(Error::Evaluation { x: lo })?;
    if bv == f64::NEG_INFINITY {
        return Ok((bx, bv));
    }

    let a = if i == 0 {
        lo
    } else {
        lo + step * (i - 1) as f64
    };
    let b = if i + 1 >= n {
        hi
    } else {
        (lo + step * (i + 1) as f64).min(hi)
    };
    let nan_as_worst = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let (gx, gv) = golden_max(&nan_as_worst, a, b, cfg.refine_iters);
    if gv >= bv {
        bx = gx;
        bv = gv;
    }

    // Parabolic polish: golden section alone stalls at ~sqrt(eps) in x.
    let h = 0.5 * step;
    if bx - h >= lo && bx + h <= hi {
        let (fm, fp) = (nan_as_worst(bx - h), nan_as_worst(bx + h));
        let curvature = fp - 2.0 * bv + fm;
        if curvature < 0.0 && fm.is_finite() && fp.is_finite() {
            let x = bx - 0.5 * h * (fp - fm) / curvature;
            if (x - bx).abs() <= h {
                let v = nan_as_worst(x);
                if v >= bv {
                    bx = x;
                    bv = v;
                }
            }
        }
    }
    Ok((bx, bv))
}

/// Interior stationary points of `f`, located by sign changes of a central
/// difference derivative (step = grid cell) and refined by bisection.
pub fn critical_points<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cfg: &ScanConfig) -> Vec<f64> {
    if !(lo < hi) || cfg.check().is_err() {
        return Vec::new();
    }
    let h = (hi - lo) / cfg.grid_points as f64;
    let derivative = |x: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    critical_points_with_derivative(derivative, lo, hi, cfg)
}

/// [`critical_points`] with a caller-supplied derivative.
pub fn critical_points_with_derivative<D: Fn(f64) -> f64>(
    derivative: D,
    lo: f64,
    hi: f64,
    cfg: &ScanConfig,
) -> Vec<f64> {
    if !(lo < hi) || cfg.check().is_err() {
        return Vec::new();
    }
    let n = cfg.grid_points;
    let xs: Vec<f64> = grid(lo, hi, n).collect();
    let ds: Vec<f64> = xs.iter().map(|&x| derivative(x)).collect();
    let root_cfg = RootConfig {
        abs_tol: 1e-14 * (hi - lo).max(1.0),
        max_iter: cfg.refine_iters,
    };
    let mut out = Vec::new();
    // endpoints excluded: start at the first interior sample
    let mut i = 1;
    while i + 1 < n {
        let (d0, d1) = (ds[i], ds[i + 1]);
        if d0.is_nan() || d1.is_nan() {
            i += 1;
            continue;
        }
        if d0 == 0.0 {
            if ds[i - 1].is_finite() && ds[i - 1] != 0.0 && ds[i - 1].signum() != d1.signum() {
                out.push(xs[i]);
            }
        } else if d1 != 0.0 && d0.signum() != d1.signum() && i + 2 < n {
            if let Ok(x) = bisect_root(&derivative, xs[i], xs[i + 1], &root_cfg) {
                out.push(x);
            }
        }
        i += 1;
    }
    out
}

/// Cramer solution of `[[m11, m12], [m21, m22]] · x = rhs`.
pub fn solve_2x2(
    m11: f64,
    m12: f64,
    m21: f64,
    m22: f64,
    rhs1: f64,
    rhs2: f64,
) -> Result<(f64, f64)> {
    let det = m11 * m22 - m12 * m21;
    let scale = m11.abs().max(m12.abs()).max(m21.abs()).max(m22.abs());
    if !det.is_finite() || det.abs() <= 1e-14 * scale * scale {
        return Err(Error::Singular { det });
    }
    let x1 = (rhs1 * m22 - m12 * rhs2) / det;
    let x2 = (m11 * rhs2 - m21 * rhs1) / det;
    Ok((x1, x2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sqrt_two() {
        let x = bisect_root(|x| x * x - 2.0, 1.0, 2.0, &RootConfig::default()).unwrap();
        assert!((x - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn odd_function_root() {
        let x = bisect_root(|x| x, -1.0, 1.0, &RootConfig::default()).unwrap();
        assert_eq!(x, 0.0);
    }

    #[test]
    fn bracket_and_nan_errors() {
        let cfg = RootConfig::default();
        assert!(matches!(
            bisect_root(|x| x * x + 1.0, -1.0, 1.0, &cfg),
            Err(Error::Bracket { .. })
        ));
        assert!(matches!(
            bisect_root(|x| if x > 0.1 { f64::NAN } else { x - 0.5 }, 0.0, 1.0, &cfg),
            Err(Error::Evaluation { .. })
        ));
    }

    #[test]
    fn infinite_values_only_contribute_sign() {
        let x = bisect_root(
            |x| if x > 0.3 { f64::INFINITY } else { -1.0 },
            0.0,
            1.0,
            &RootConfig::default(),
        )
        .unwrap();
        assert!((x - 0.3).abs() < 1e-12);
    }

    #[test]
    fn quadratic_vertex() {
        let (x, v) =
            maximize_scan(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, &ScanConfig::default()).unwrap();
        assert!((x - 0.3).abs() < 1e-8, "{x}");
        assert!(v.abs() < 1e-8);
    }

    #[test]
    fn sine_peak() {
        let (x, v) =
            maximize_scan(f64::sin, 0.0, std::f64::consts::PI, &ScanConfig::default()).unwrap();
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-8, "{x}");
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn maximize_rejects_all_nan() {
        assert!(maximize_scan(|_| f64::NAN, 0.0, 1.0, &ScanConfig::with_grid(11)).is_err());
        assert!(maximize_scan(|x| x, 0.0, 1.0, &ScanConfig::with_grid(2)).is_err());
    }

    #[test]
    fn maximize_finds_boundary_max() {
        let (x, v) = maximize_scan(|x| x, 0.0, 1.0, &ScanConfig::with_grid(101)).unwrap();
        assert_eq!((x, v), (1.0, 1.0));
    }

    #[test]
    fn cubic_critical_points() {
        let pts = critical_points(|x| x * x * x - 3.0 * x, -2.0, 2.0, &ScanConfig::default());
        assert_eq!(pts.len(), 2, "{pts:?}");
        assert!((pts[0] + 1.0).abs() < 1e-6);
        assert!((pts[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn monotone_has_no_critical_points() {
        assert!(critical_points(|x| x, 0.0, 1.0, &ScanConfig::default()).is_empty());
    }

    #[test]
    fn analytic_derivative_hook() {
        // f = sin on [0, 3π]: f' = cos, zeros at π/2, 3π/2, 5π/2
        let pts = critical_points_with_derivative(
            f64::cos,
            0.0,
            3.0 * std::f64::consts::PI,
            &ScanConfig::default(),
        );
        assert_eq!(pts.len(), 3);
        for (k, p) in pts.iter().enumerate() {
            let expect = (2 * k + 1) as f64 * std::f64::consts::FRAC_PI_2;
            assert!((p - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn two_by_two_examples() {
        assert_eq!(solve_2x2(1.0, 0.0, 0.0, 1.0, 3.0, 4.0).unwrap(), (3.0, 4.0));
        assert_eq!(solve_2x2(2.0, 0.0, 0.0, 4.0, 2.0, 2.0).unwrap(), (1.0, 0.5));
        assert_eq!(
            solve_2x2(1.0, 1.0, 1.0, -1.0, 2.0, 0.0).unwrap(),
            (1.0, 1.0)
        );
        assert!(matches!(
            solve_2x2(1.0, 2.0, 2.0, 4.0, 1.0, 1.0),
            Err(Error::Singular { .. })
        ));
    }

    proptest! {
        #[test]
        fn bisection_residual_bounded(root in -0.9f64..0.9, slope in 0.1f64..10.0) {
            let f = |x: f64| slope * (x - root) + 0.1 * (x - root).powi(3);
            let cfg = RootConfig::default();
            let x = bisect_root(f, -1.0, 1.0, &cfg).unwrap();
            prop_assert!((x - root).abs() <= cfg.abs_tol);
            let ends = f(x - cfg.abs_tol).abs().max(f(x + cfg.abs_tol).abs());
            prop_assert!(f(x).abs() <= ends);
        }

        #[test]
        fn scan_never_worse_than_grid(c in 0.0f64..1.0, w in 1.0f64..40.0) {
            let f = |x: f64| (w * (x - c)).cos() * (-x).exp();
            let cfg = ScanConfig::with_grid(101);
            let (_, v) = maximize_scan(f, 0.0, 1.0, &cfg).unwrap();
            let grid_best = (0..101).map(|i| f(i as f64 / 100.0)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v >= grid_best);
        }

        #[test]
        fn polynomial_critical_points_recovered(r1 in -0.9f64..-0.1, r2 in 0.1f64..0.9) {
            // f' = (x - r1)(x - r2)
            let f = |x: f64| x * x * x / 3.0 - (r1 + r2) * x * x / 2.0 + r1 * r2 * x;
            let pts = critical_points(f, -1.0, 1.0, &ScanConfig::default());
            prop_assert_eq!(pts.len(), 2);
            prop_assert!((pts[0] - r1).abs() < 1e-6);
            prop_assert!((pts[1] - r2).abs() < 1e-6);
        }
    }
}
