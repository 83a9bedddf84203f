//! Secrecy-rate expressions at a single port. All rates are in bits per
//! channel use; receiver noise powers are fixed to one.

use crate::error::{Error, Result};

/// Squared channel magnitudes at one port: Bob's `|h_1|^2`, `|h_2|^2` and
/// Eve's `|g_1|^2`, `|g_2|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainQuad {
    pub gh1: f64,
    pub gh2: f64,
    pub gg1: f64,
    pub gg2: f64,
}

impl GainQuad {
    pub fn new(gh1: f64, gh2: f64, gg1: f64, gg2: f64) -> Result<Self> {
        for (name, v) in [("gh1", gh1), ("gh2", gh2), ("gg1", gg1), ("gg2", gg2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self { gh1, gh2, gg1, gg2 })
    }

    /// Unchecked constructor for values that are squared magnitudes of
    /// finite complex numbers.
    pub(crate) fn from_raw(gh1: f64, gh2: f64, gg1: f64, gg2: f64) -> Self {
        Self { gh1, gh2, gg1, gg2 }
    }

    /// Gaussian-noise jamming rate before the `[.]+` clamp.
    pub fn gn_raw(&self, p1: f64, p2: f64) -> f64 {
        log2_1p(p1 * self.gh1 / (p2 * self.gh2 + 1.0)) - log2_1p(p1 * self.gg1 / (p2 * self.gg2 + 1.0))
    }

    /// Secret-message bound with the jamming codeword cancelled at Bob,
    /// before the clamp.
    pub fn hat_raw(&self, p1: f64, p2: f64) -> f64 {
        log2_1p(p1 * self.gh1) - log2_1p(p1 * self.gg1 / (p2 * self.gg2 + 1.0))
    }

    /// Sum-rate bound, before the clamp.
    pub fn tilde_raw(&self, p1: f64, p2: f64) -> f64 {
        log2_1p(p1 * self.gh1 + p2 * self.gh2) - log2_1p(p1 * self.gg1 + p2 * self.gg2)
    }

    /// Rate without jamming, before the clamp.
    pub fn bar_raw(&self, p1: f64) -> f64 {
        log2_1p(p1 * self.gh1) - log2_1p(p1 * self.gg1)
    }

    pub fn gn(&self, p1: f64, p2: f64) -> f64 {
        self.gn_raw(p1, p2).max(0.0)
    }

    pub fn hat(&self, p1: f64, p2: f64) -> f64 {
        self.hat_raw(p1, p2).max(0.0)
    }

    pub fn tilde(&self, p1: f64, p2: f64) -> f64 {
        self.tilde_raw(p1, p2).max(0.0)
    }

    pub fn bar(&self, p1: f64) -> f64 {
        self.bar_raw(p1).max(0.0)
    }

    /// Encoded-jamming secrecy rate `max{min{hat, tilde}, bar}`.
    pub fn ej(&self, p1: f64, p2: f64) -> f64 {
        self.hat(p1, p2).min(self.tilde(p1, p2)).max(self.bar(p1))
    }
}

#[inline]
fn log2_1p(x: f64) -> f64 {
    x.ln_1p() * std::f64::consts::LOG2_E
}

/// Slack allowed on `p1 + p2 <= budget` for round-off.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

/// A feasible transmit-power split under a total budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    pub p1: f64,
    pub p2: f64,
    pub budget: f64,
}

impl PowerAllocation {
    pub fn new(p1: f64, p2: f64, budget: f64) -> Result<Self> {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::domain(format!("power budget must be positive, got {budget}")));
        }
        if !(p1.is_finite() && p2.is_finite() && p1 >= 0.0 && p2 >= 0.0) {
            return Err(Error::domain(format!(
                "powers must be finite and >= 0, got ({p1}, {p2})"
            )));
        }
        if p1 + p2 > budget + FEASIBILITY_SLACK {
            return Err(Error::domain(format!("p1 + p2 = {} exceeds budget {budget}", p1 + p2)));
        }
        Ok(Self { p1, p2, budget })
    }
}

pub fn rate_gn(q: &GainQuad, a: &PowerAllocation) -> f64 {
    q.gn(a.p1, a.p2)
}

pub fn rate_hat(q: &GainQuad, a: &PowerAllocation) -> f64 {
    q.hat(a.p1, a.p2)
}

pub fn rate_tilde(q: &GainQuad, a: &PowerAllocation) -> f64 {
    q.tilde(a.p1, a.p2)
}

pub fn rate_bar(q: &GainQuad, a: &PowerAllocation) -> f64 {
    q.bar(a.p1)
}

pub fn rate_ej(q: &GainQuad, a: &PowerAllocation) -> f64 {
    q.ej(a.p1, a.p2)
}
