//! Energy-harvesting conversion, decoding-cost families and the channel
//! parameter records shared by every solver.
//!
//! Units are SI watts for powers and bits per channel use for rates. Every
//! rate expression uses the real-channel convention `R = ½·log2(1 + SNR)`.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// `½·log2(1 + x)`, the rate carried by a link with signal-to-noise ratio `x`.
#[inline]
pub fn half_log2_1p(x: f64) -> f64 {
    0.5 * x.ln_1p() / LN_2
}

/// Inverse of [`half_log2_1p`]: the SNR needed to carry rate `r`.
#[inline]
pub fn snr_for_rate(r: f64) -> f64 {
    (2.0 * r * LN_2).exp_m1()
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Energy-harvesting conversion function: RF input power to DC output power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EhModel {
    /// Logistic rectifier normalised to pass through the origin. `theta` is
    /// the offset `1/(1 + e^{q1 q2})`, cached at construction.
    Logistic {
        q1: f64,
        q2: f64,
        p_max_dc: f64,
        theta: f64,
    },
    /// Ideal linear harvester with efficiency `eta`.
    Linear { eta: f64 },
}

impl EhModel {
    pub fn logistic(q1: f64, q2: f64, p_max_dc: f64) -> Result<Self> {
        if !(q1 > 0.0 && q1.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "q1",
                reason: format!("must be positive and finite, got {q1}"),
            });
        }
        if !(q2 >= 0.0 && q2.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "q2",
                reason: format!("must be non-negative and finite, got {q2}"),
            });
        }
        if !(p_max_dc > 0.0 && p_max_dc.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p_max_dc",
                reason: format!("must be positive and finite, got {p_max_dc}"),
            });
        }
        // theta = 1/(1 + e^{q1 q2}) in log space so large q1*q2 underflows to 0
        // instead of producing inf/inf.
        let theta = (-softplus(q1 * q2)).exp();
        Ok(EhModel::Logistic {
            q1,
            q2,
            p_max_dc,
            theta,
        })
    }

    pub fn linear(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("must lie in [0, 1], got {eta}"),
            });
        }
        Ok(EhModel::Linear { eta })
    }

    /// The rectifier fit used throughout the numerical study:
    /// `q1 = 1500 /W`, `q2 = 2.2 mW`, `P_max^DC = 24 mW`.
    pub fn reference_logistic() -> Self {
        Self::logistic(1500.0, 0.0022, 0.024).expect("reference rectifier is valid")
    }

    /// Supremum of the output power (`+inf` for the linear model).
    pub fn ceiling(&self) -> f64 {
        match *self {
            EhModel::Logistic { p_max_dc, .. } => p_max_dc,
            EhModel::Linear { .. } => f64::INFINITY,
        }
    }

    /// Harvested DC power for RF input `p_in`.
    pub fn eval(&self, p_in: f64) -> Result<f64> {
        if !(p_in >= 0.0) {
            return Err(Error::Domain {
                what: "EH input power",
                value: p_in,
            });
        }
        Ok(self.eval_unchecked(p_in))
    }

    /// [`EhModel::eval`] without the domain check; negative inputs clamp to 0.
    pub(crate) fn eval_unchecked(&self, p_in: f64) -> f64 {
        let p_in = p_in.max(0.0);
        match *self {
            // (Ψ(p) - P θ)/(1 - θ) rewritten as P (1 - e^{-q1 p}) / (1 + e^{-q1 (p - q2)}):
            // same function, exactly zero at p = 0 and free of cancellation.
            EhModel::Logistic {
                q1, q2, p_max_dc, ..
            } => {
                let rise = -(-q1 * p_in).exp_m1();
                p_max_dc * rise / (1.0 + (-q1 * (p_in - q2)).exp())
            }
            EhModel::Linear { eta } => eta * p_in,
        }
    }

    /// RF input power that yields DC output `p_dc`.
    pub fn inverse(&self, p_dc: f64) -> Result<f64> {
        if !(p_dc >= 0.0) {
            return Err(Error::Domain {
                what: "DC power",
                value: p_dc,
            });
        }
        if p_dc == 0.0 {
            return Ok(0.0);
        }
        match *self {
            EhModel::Logistic {
                q1, q2, p_max_dc, ..
            } => {
                if p_dc >= p_max_dc {
                    return Err(Error::Saturation {
                        p_dc,
                        p_max: p_max_dc,
                    });
                }
                // Solving P(1-u)/(1+u w) = y for u = e^{-q1 p}, w = e^{q1 q2}:
                // p = [ln(1 + y w / P) - ln(1 - y / P)] / q1.
                let ratio = p_dc / p_max_dc;
                let up = softplus(ratio.ln() + q1 * q2);
                let down = (-ratio).ln_1p();
                Ok((up - down) / q1)
            }
            EhModel::Linear { eta } => {
                if eta == 0.0 {
                    Err(Error::NoInverse { p_dc })
                } else {
                    Ok(p_dc / eta)
                }
            }
        }
    }

    /// dψ/dp_in.
    pub fn slope(&self, p_in: f64) -> f64 {
        match *self {
            EhModel::Logistic {
                q1,
                q2,
                p_max_dc,
                theta,
            } => {
                // ψ = (Ψ - Pθ)/(1-θ), Ψ' = q1 Ψ (1 - Ψ/P)
                let s = 1.0 / (1.0 + (-q1 * (p_in - q2)).exp());
                q1 * p_max_dc * s * (1.0 - s) / (1.0 - theta)
            }
            EhModel::Linear { eta } => eta,
        }
    }
}

/// Result of the generalised cost inverse `sup{R ≥ 0 : φ(R) ≤ p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostInverse {
    Finite(f64),
    /// Any rate is affordable; callers cap it with the rate constraints.
    Unbounded,
}

impl CostInverse {
    /// `min(self, cap)`.
    pub fn capped(self, cap: f64) -> f64 {
        match self {
            CostInverse::Finite(r) => r.min(cap),
            CostInverse::Unbounded => cap,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, CostInverse::Unbounded)
    }
}

/// Decoding power φ(R) needed to decode rate R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostModel {
    /// `β (2^{2R} - 1)`
    Exp { beta: f64 },
    /// `β log2(2R + 1)`
    Log { beta: f64 },
    /// `2 β R`
    Lin { beta: f64 },
    /// `φ0` whenever `R > 0`
    Const { phi0: f64 },
}

impl CostModel {
    pub fn exp(beta: f64) -> Result<Self> {
        check_beta(beta).map(|beta| CostModel::Exp { beta })
    }

    pub fn log(beta: f64) -> Result<Self> {
        check_beta(beta).map(|beta| CostModel::Log { beta })
    }

    pub fn lin(beta: f64) -> Result<Self> {
        check_beta(beta).map(|beta| CostModel::Lin { beta })
    }

    pub fn constant(phi0: f64) -> Result<Self> {
        if !(phi0 >= 0.0 && phi0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "phi0",
                reason: format!("must be non-negative and finite, got {phi0}"),
            });
        }
        Ok(CostModel::Const { phi0 })
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain {
                what: "rate",
                value: r,
            });
        }
        Ok(self.eval_unchecked(r))
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        match *self {
            CostModel::Exp { beta } => beta * snr_for_rate(r),
            CostModel::Log { beta } => beta * (2.0 * r).ln_1p() / LN_2,
            CostModel::Lin { beta } => 2.0 * beta * r,
            CostModel::Const { phi0 } => {
                if r > 0.0 {
                    phi0
                } else {
                    0.0
                }
            }
        }
    }

    /// Largest rate decodable with power `p`.
    pub fn inverse(&self, p: f64) -> Result<CostInverse> {
        if !(p >= 0.0) {
            return Err(Error::Domain {
                what: "decoding power",
                value: p,
            });
        }
        Ok(self.inverse_unchecked(p))
    }

    pub(crate) fn inverse_unchecked(&self, p: f64) -> CostInverse {
        let p = p.max(0.0);
        match *self {
            CostModel::Exp { beta } => CostInverse::Finite(half_log2_1p(p / beta)),
            CostModel::Log { beta } => CostInverse::Finite(0.5 * (p / beta * LN_2).exp_m1()),
            CostModel::Lin { beta } => CostInverse::Finite(p / (2.0 * beta)),
            CostModel::Const { phi0 } => {
                if p >= phi0 {
                    CostInverse::Unbounded
                } else {
                    CostInverse::Finite(0.0)
                }
            }
        }
    }

    /// Rate affordable with power `p`, as a float (`+inf` when unbounded).
    pub(crate) fn rate_for_power(&self, p: f64) -> f64 {
        match self.inverse_unchecked(p) {
            CostInverse::Finite(r) => r,
            CostInverse::Unbounded => f64::INFINITY,
        }
    }

    /// dφ/dR, `None` for the constant family.
    pub fn slope(&self, r: f64) -> Option<f64> {
        match *self {
            CostModel::Exp { beta } => Some(2.0 * LN_2 * beta * (2.0 * r * LN_2).exp()),
            CostModel::Log { beta } => Some(2.0 * beta / (LN_2 * (2.0 * r + 1.0))),
            CostModel::Lin { beta } => Some(2.0 * beta),
            CostModel::Const { .. } => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, CostModel::Const { .. })
    }
}

fn check_beta(beta: f64) -> Result<f64> {
    if beta > 0.0 && beta.is_finite() {
        Ok(beta)
    } else {
        Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("must be positive and finite, got {beta}"),
        })
    }
}

/// Which noise terms enter the information-decoding SINR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IdNoise {
    /// `(1-ρ)N + N_p`
    #[default]
    AntennaAndProcessing,
    /// `N_p` only: the `N ≪ N_p` approximation. The harvested power still
    /// includes `N`.
    ProcessingOnly,
}

/// Classical two-user MAC with a power-splitting destination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalParams {
    /// `|h1|²`
    pub h1_sq: f64,
    /// `|h2|²`
    pub h2_sq: f64,
    pub p1: f64,
    pub p2: f64,
    /// Antenna noise power `N`.
    pub n: f64,
    /// Processing noise power `N_p` added after the splitter.
    pub n_p: f64,
    pub eh: EhModel,
    pub cost: CostModel,
    pub id_noise: IdNoise,
}

impl ClassicalParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        h1_sq: f64,
        h2_sq: f64,
        p1: f64,
        p2: f64,
        n: f64,
        n_p: f64,
        eh: EhModel,
        cost: CostModel,
    ) -> Result<Self> {
        let params = ClassicalParams {
            h1_sq,
            h2_sq,
            p1,
            p2,
            n,
            n_p,
            eh,
            cost,
            id_noise: IdNoise::AntennaAndProcessing,
        };
        params.validate()?;
        Ok(params)
    }

    /// Two users at 3 m with path-loss exponent 2, 0.5 W each,
    /// `N = -60 dBW`, `N_p = -30 dBW`.
    pub fn reference(eh: EhModel, cost: CostModel) -> Self {
        let gain = 3f64.powi(-4);
        Self::new(gain, gain, 0.5, 0.5, 1e-6, 1e-3, eh, cost).expect("reference set is valid")
    }

    pub fn with_id_noise(mut self, id_noise: IdNoise) -> Self {
        self.id_noise = id_noise;
        self
    }

    pub fn with_cost(mut self, cost: CostModel) -> Self {
        self.cost = cost;
        self
    }

    pub fn with_eh(mut self, eh: EhModel) -> Self {
        self.eh = eh;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("h1_sq", self.h1_sq),
            ("h2_sq", self.h2_sq),
            ("n_p", self.n_p),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        let non_negative = [("p1", self.p1), ("p2", self.p2), ("n", self.n)];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be non-negative and finite, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Received signal power of user 1, `|h1|² P1`.
    pub fn rx1(&self) -> f64 {
        self.h1_sq * self.p1
    }

    pub fn rx2(&self) -> f64 {
        self.h2_sq * self.p2
    }

    /// Total received RF power `a = |h1|²P1 + |h2|²P2 + N`.
    pub fn a(&self) -> f64 {
        self.rx1() + self.rx2() + self.n
    }

    /// Interference-plus-noise seen by user 1 when decoded first under SIC.
    pub fn n_u(&self) -> f64 {
        self.rx2() + self.n
    }

    /// Noise at the ID branch for PS factor `rho`.
    pub fn id_noise_power(&self, rho: f64) -> f64 {
        match self.id_noise {
            IdNoise::AntennaAndProcessing => (1.0 - rho) * self.n + self.n_p,
            IdNoise::ProcessingOnly => self.n_p,
        }
    }

    fn id_rate(&self, rho: f64, signal: f64, interference: f64) -> f64 {
        let s = 1.0 - rho;
        half_log2_1p(s * signal / (s * interference + self.id_noise_power(rho)))
    }

    /// Individual bound for user 1 (interference-free).
    pub fn rate1(&self, rho: f64) -> f64 {
        self.id_rate(rho, self.rx1(), 0.0)
    }

    pub fn rate2(&self, rho: f64) -> f64 {
        self.id_rate(rho, self.rx2(), 0.0)
    }

    /// Sum-rate bound.
    pub fn rate_sum(&self, rho: f64) -> f64 {
        self.id_rate(rho, self.rx1() + self.rx2(), 0.0)
    }

    /// User 1's bound when it is decoded first, treating user 2 as noise.
    pub fn rate1_under_interference(&self, rho: f64) -> f64 {
        self.id_rate(rho, self.rx1(), self.rx2())
    }

    pub fn rate2_under_interference(&self, rho: f64) -> f64 {
        self.id_rate(rho, self.rx2(), self.rx1())
    }

    /// DC power available for decoding, `ψ(ρ a)`.
    pub fn harvested(&self, rho: f64) -> f64 {
        self.eh.eval_unchecked(rho * self.a())
    }

    /// Largest sum rate the harvested power can decode jointly, `φ^{-1}(ψ(ρ a))`.
    pub fn cost_rate_bound(&self, rho: f64) -> CostInverse {
        self.cost.inverse_unchecked(self.harvested(rho))
    }

    /// The same channel with the user labels exchanged.
    pub fn swapped(&self) -> Self {
        ClassicalParams {
            h1_sq: self.h2_sq,
            h2_sq: self.h1_sq,
            p1: self.p2,
            p2: self.p1,
            ..*self
        }
    }
}

/// Fresh and common powers of the two cooperating users.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerAllocation {
    /// Fresh power of user 1 (decoded at user 2).
    pub p12: f64,
    /// Fresh power of user 2 (decoded at user 1).
    pub p21: f64,
    /// Common-message power of user 1.
    pub pu1: f64,
    pub pu2: f64,
}

impl PowerAllocation {
    pub fn p1(&self) -> f64 {
        self.p12 + self.pu1
    }

    pub fn p2(&self) -> f64 {
        self.p21 + self.pu2
    }

    pub fn is_non_negative(&self) -> bool {
        self.p12 >= 0.0 && self.p21 >= 0.0 && self.pu1 >= 0.0 && self.pu2 >= 0.0
    }
}

/// Two-user MAC whose users exchange fresh messages and beam a common one.
///
/// Gains are real non-negative amplitudes; the coherent term in the received
/// power is `2 h1 h2 √(Pu1 Pu2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoopParams {
    pub h1: f64,
    pub h2: f64,
    /// User 1 to user 2.
    pub h12: f64,
    /// User 2 to user 1.
    pub h21: f64,
    /// Noise at user 1.
    pub n1: f64,
    pub n2: f64,
    pub n: f64,
    pub n_p: f64,
    pub p_u1_budget: f64,
    pub p_u2_budget: f64,
    pub eh: EhModel,
    pub cost_dest: CostModel,
    /// Cost at user 1 of decoding user 2's fresh message.
    pub cost_user1: CostModel,
    pub cost_user2: CostModel,
}

impl CoopParams {
    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("h1", self.h1),
            ("h2", self.h2),
            ("h12", self.h12),
            ("h21", self.h21),
            ("n", self.n),
            ("p_u1_budget", self.p_u1_budget),
            ("p_u2_budget", self.p_u2_budget),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be non-negative and finite, got {v}"),
                });
            }
        }
        for (name, v) in [("n1", self.n1), ("n2", self.n2), ("n_p", self.n_p)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if !(self.b() > 0.0 && self.c() > 0.0) {
            return Err(Error::InvalidParameter {
                name: "h12/h21",
                reason: "user-user links must have positive gain".into(),
            });
        }
        Ok(())
    }

    /// `b = h12² / N2`, the SNR per watt of user 1's fresh message at user 2.
    pub fn b(&self) -> f64 {
        self.h12 * self.h12 / self.n2
    }

    /// `c = h21² / N1`.
    pub fn c(&self) -> f64 {
        self.h21 * self.h21 / self.n1
    }

    /// Rate of user 1's fresh message over the user-user link.
    pub fn link_rate1(&self, p12: f64) -> f64 {
        half_log2_1p(self.b() * p12)
    }

    pub fn link_rate2(&self, p21: f64) -> f64 {
        half_log2_1p(self.c() * p21)
    }

    /// Received RF signal power `S` at the destination.
    pub fn received_power(&self, alloc: &PowerAllocation) -> f64 {
        let coherent = (alloc.pu1 * alloc.pu2).max(0.0).sqrt();
        self.h1 * self.h1 * alloc.p1()
            + self.h2 * self.h2 * alloc.p2()
            + 2.0 * self.h1 * self.h2 * coherent
    }

    /// Sum-rate bound at the destination for received power `s`.
    pub fn rate_sum(&self, rho: f64, s: f64) -> f64 {
        let keep = 1.0 - rho;
        half_log2_1p(keep * s / (keep * self.n + self.n_p))
    }

    /// Harvested DC power for received power `s`.
    pub fn harvested(&self, rho: f64, s: f64) -> f64 {
        self.eh.eval_unchecked(rho * (s + self.n))
    }

    /// The P4 special case: linear EH and a common exponential cost at all
    /// three receivers. Returns `(eta, beta)`.
    pub fn p4_constants(&self) -> Option<(f64, f64)> {
        let eta = match self.eh {
            EhModel::Linear { eta } => eta,
            _ => return None,
        };
        match (self.cost_dest, self.cost_user1, self.cost_user2) {
            (CostModel::Exp { beta }, CostModel::Exp { beta: b1 }, CostModel::Exp { beta: b2 })
                if beta == b1 && beta == b2 =>
            {
                Some((eta, beta))
            }
            _ => None,
        }
    }
}
