//! Port selection and power control.
//!
//! For a fixed port the max-min problem `max min{R_hat, R_tilde}` splits on
//! the sign of `R_hat - R_tilde`, which depends only on `p1`:
//!
//! * `gg2 <= gh2 / (1 + P gh1)`: `R_hat` is the smaller bound everywhere, so
//!   maximize it along `p2 = P - p1`.
//! * `gg2 >= gh2`: `R_tilde` is the smaller bound everywhere; it is
//!   linear-fractional in `(p1, p2)` and peaks at a vertex.
//! * otherwise the crossover `beta` splits `[0, P]` into an `R_hat` piece and
//!   an `R_tilde` piece.
//!
//! Stationary points of `R_hat(p1, P - p1)` are the real roots of the
//! quadratic `a p^2 + b p + c` (the derivative's denominator is positive),
//! so evaluating the interval ends plus the in-range roots is exact.

use std::fmt;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::rates::GainQuad;

/// Bounds on `p1` for one of the reduced subproblems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lb: f64,
    pub ub: f64,
}

impl Interval {
    pub fn new(lb: f64, ub: f64, budget: f64) -> Result<Self> {
        if !(lb.is_finite() && ub.is_finite()) || lb > ub {
            return Err(Error::domain(format!("empty power interval [{lb}, {ub}]")));
        }
        if lb < 0.0 || ub > budget {
            return Err(Error::domain(format!("interval [{lb}, {ub}] outside [0, {budget}]")));
        }
        Ok(Self { lb, ub })
    }

    pub fn full(budget: f64) -> Self {
        Self { lb: 0.0, ub: budget }
    }
}

/// Numerator coefficients of `dR_hat/dp1` along `p2 = P - p1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadCoeffs {
    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    /// Real roots, in no particular order. Uses the cancellation-free form
    /// so a tiny `a` degrades gracefully to the linear root `-c/b`.
    pub fn roots(&self) -> Vec<f64> {
        let QuadCoeffs { a, b, c } = *self;
        if a == 0.0 {
            return if b != 0.0 { vec![-c / b] } else { Vec::new() };
        }
        let disc = self.discriminant();
        if disc < 0.0 {
            return Vec::new();
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return vec![0.0];
        }
        vec![q / a, c / q]
    }
}

pub fn quad_coeffs(budget: f64, q: &GainQuad) -> QuadCoeffs {
    let k = budget * q.gg2 + 1.0;
    QuadCoeffs {
        a: -q.gh1 * q.gg2 * (q.gg1 - q.gg2),
        b: -2.0 * q.gh1 * q.gg2 * k,
        c: q.gh1 * k * k - q.gg1 * k,
    }
}

/// A power split and the rate it attains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    pub p1: f64,
    pub p2: f64,
    pub value: f64,
}

fn check_budget(budget: f64) -> Result<()> {
    if budget.is_finite() && budget > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("power budget must be positive, got {budget}")))
    }
}

/// Maximizes `R_hat` over `p1` in `iv` with `p2 = P - p1`.
pub fn solve_rhat(budget: f64, q: &GainQuad, iv: &Interval) -> Result<PowerPoint> {
    check_budget(budget)?;
    let iv = Interval::new(iv.lb, iv.ub, budget)?;
    let mut candidates = vec![iv.lb, iv.ub];
    candidates.extend(
        quad_coeffs(budget, q)
            .roots()
            .into_iter()
            .filter(|r| *r > iv.lb && *r < iv.ub),
    );
    candidates.sort_by(f64::total_cmp);

    let mut best: Option<(f64, f64)> = None;
    for p1 in candidates {
        let v = q.hat_raw(p1, budget - p1);
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((p1, v));
        }
    }
    let (p1, v) = best.expect("at least two candidates");
    Ok(PowerPoint {
        p1,
        p2: budget - p1,
        value: v.max(0.0),
    })
}

/// Maximizes `R_tilde` over `p1` in `iv`, `p2 >= 0`, `p1 + p2 <= P`.
pub fn solve_rtilde(budget: f64, q: &GainQuad, iv: &Interval) -> Result<PowerPoint> {
    check_budget(budget)?;
    let iv = Interval::new(iv.lb, iv.ub, budget)?;
    let vertices = [
        (iv.lb, 0.0),
        (iv.lb, budget - iv.lb),
        (iv.ub, 0.0),
        (iv.ub, budget - iv.ub),
    ];
    let mut best = (vertices[0], q.tilde_raw(vertices[0].0, vertices[0].1));
    for &(p1, p2) in &vertices[1..] {
        let v = q.tilde_raw(p1, p2);
        if v > best.1 {
            best = ((p1, p2), v);
        }
    }
    let ((p1, p2), v) = best;
    Ok(PowerPoint {
        p1,
        p2,
        value: v.max(0.0),
    })
}

/// Which regime of the per-port max-min problem applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// `R_hat <= R_tilde` on the whole feasible set.
    RHat,
    /// `R_hat >= R_tilde` on the whole feasible set.
    RTilde,
    /// The sign flips at `p1 = beta`.
    Split,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::RHat => "CASE1_RHAT",
            CaseTag::RTilde => "CASE2_RTILDE",
            CaseTag::Split => "CASE3_SPLIT",
        })
    }
}

/// The subproblem whose solution was kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subproblem {
    RHat,
    RTilde,
}

/// How a [`SolveResult`] was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    ClosedForm {
        case: CaseTag,
        branch: Subproblem,
        beta: Option<f64>,
    },
    Oracle,
    GaussianNoiseGrid,
    EqualPower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveResult {
    /// Zero-based port index.
    pub port: usize,
    pub p1: f64,
    pub p2: f64,
    pub value: f64,
    pub method: Method,
}

impl SolveResult {
    pub fn case_tag(&self) -> Option<CaseTag> {
        match self.method {
            Method::ClosedForm { case, .. } => Some(case),
            _ => None,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self.method {
            Method::ClosedForm { beta, .. } => beta,
            _ => None,
        }
    }

    /// Replaces `self` if `other` is strictly better, or equally good at a
    /// smaller port.
    fn keep_better(&mut self, other: SolveResult) {
        if other.value > self.value || (other.value == self.value && other.port < self.port) {
            *self = other;
        }
    }
}

/// Crossover power where `R_hat - R_tilde` changes sign.
pub fn crossover(q: &GainQuad) -> f64 {
    (q.gh2 / q.gg2 - 1.0) / q.gh1
}

/// Optimal encoded-jamming power control at one port (`port` is left 0).
pub fn solve_port(budget: f64, q: &GainQuad) -> Result<SolveResult> {
    check_budget(budget)?;
    let full = Interval::full(budget);
    let (point, case, branch, beta) = if q.gg2 <= q.gh2 / (1.0 + budget * q.gh1) {
        (solve_rhat(budget, q, &full)?, CaseTag::RHat, Subproblem::RHat, None)
    } else if q.gg2 >= q.gh2 {
        (
            solve_rtilde(budget, q, &full)?,
            CaseTag::RTilde,
            Subproblem::RTilde,
            None,
        )
    } else {
        // Strictly between the two thresholds, so gh1 > 0 and gg2 > 0.
        let beta = crossover(q).clamp(0.0, budget);
        let hat = solve_rhat(budget, q, &Interval { lb: 0.0, ub: beta })?;
        let tilde = solve_rtilde(budget, q, &Interval { lb: beta, ub: budget })?;
        let hat_ej = q.ej(hat.p1, hat.p2);
        let tilde_ej = q.ej(tilde.p1, tilde.p2);
        let hat_wins = hat_ej > tilde_ej || (hat_ej == tilde_ej && (hat.p1, hat.p2) <= (tilde.p1, tilde.p2));
        if hat_wins {
            (hat, CaseTag::Split, Subproblem::RHat, Some(beta))
        } else {
            (tilde, CaseTag::Split, Subproblem::RTilde, Some(beta))
        }
    };
    let value = q.ej(point.p1, point.p2);
    debug_assert!(
        value >= q.bar(budget) - 1e-12,
        "max-min optimum {value} below no-jamming rate {}",
        q.bar(budget)
    );
    Ok(SolveResult {
        port: 0,
        p1: point.p1,
        p2: point.p2,
        value,
        method: Method::ClosedForm { case, branch, beta },
    })
}

/// Exhaustive port selection over closed-form per-port solutions.
pub fn solve_all_ports(budget: f64, real: &ChannelRealization) -> Result<SolveResult> {
    let mut best = SolveResult {
        port: 0,
        ..solve_port(budget, &real.gains(0))?
    };
    for port in 1..real.n_ports() {
        best.keep_better(SolveResult {
            port,
            ..solve_port(budget, &real.gains(port))?
        });
    }
    Ok(best)
}

/// Running argmax with first-wins ties.
#[derive(Debug, Clone, Copy)]
struct Best {
    p1: f64,
    p2: f64,
    value: f64,
}

impl Best {
    fn new() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            value: f64::NEG_INFINITY,
        }
    }

    #[inline]
    fn offer(&mut self, p1: f64, p2: f64, value: f64) {
        if value > self.value {
            *self = Self { p1, p2, value };
        }
    }
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < 100 {
        Err(Error::Config(format!("grid steps must be >= 100, got {steps}")))
    } else {
        Ok(())
    }
}

/// Visits a `resolution x resolution` grid over the simplex
/// `p1, p2 >= 0, p1 + p2 <= budget`.
fn simplex_grid(budget: f64, resolution: usize, mut visit: impl FnMut(f64, f64)) {
    let h = budget / resolution as f64;
    for i in 0..=resolution {
        let p1 = i as f64 * h;
        for j in 0..=resolution - i {
            visit(p1, (j as f64 * h).min(budget - p1));
        }
    }
}

/// Visits a `resolution x resolution` grid on the window of half-width
/// `half` around `(c1, c2)`, clipped to the simplex.
fn window_grid(budget: f64, (c1, c2): (f64, f64), half: f64, resolution: usize, mut visit: impl FnMut(f64, f64)) {
    let (lo1, hi1) = ((c1 - half).max(0.0), (c1 + half).min(budget));
    let (lo2, hi2) = ((c2 - half).max(0.0), (c2 + half).min(budget));
    let d1 = (hi1 - lo1) / resolution as f64;
    let d2 = (hi2 - lo2) / resolution as f64;
    for i in 0..=resolution {
        let p1 = lo1 + i as f64 * d1;
        let room = budget - p1;
        for j in 0..=resolution {
            let p2 = lo2 + j as f64 * d2;
            if p2 > room {
                if lo2 <= room {
                    visit(p1, room);
                }
                break;
            }
            visit(p1, p2);
        }
    }
}

fn oracle_port(budget: f64, q: &GainQuad, steps: usize) -> Best {
    let mut best = Best::new();
    let edge = |best: &mut Best, p1: f64| {
        best.offer(p1, 0.0, q.ej(p1, 0.0));
        best.offer(p1, budget - p1, q.ej(p1, budget - p1));
    };

    // Stage 1: the two edges p2 = 0 and p2 = P - p1, then one refinement.
    let h = budget / steps as f64;
    for i in 0..=steps {
        edge(&mut best, i as f64 * h);
    }
    let (lo, hi) = ((best.p1 - h).max(0.0), (best.p1 + h).min(budget));
    for i in 0..=steps {
        edge(&mut best, lo + (hi - lo) * i as f64 / steps as f64);
    }

    // Stage 2: the whole simplex, coarse then refined around the winner.
    let res = (steps / 20).max(20);
    simplex_grid(budget, res, |p1, p2| best.offer(p1, p2, q.ej(p1, p2)));
    let center = (best.p1, best.p2);
    window_grid(budget, center, budget / res as f64, res, |p1, p2| {
        best.offer(p1, p2, q.ej(p1, p2))
    });
    best
}

/// Brute-force maximizer of the encoded-jamming rate used to cross-check
/// [`solve_all_ports`]. `steps` is the edge resolution; the 2-D stage uses
/// `steps / 20` points per axis, refined once.
pub fn oracle_ej(budget: f64, real: &ChannelRealization, steps: usize) -> Result<SolveResult> {
    check_budget(budget)?;
    check_steps(steps)?;
    let mut result: Option<SolveResult> = None;
    for port in 0..real.n_ports() {
        let b = oracle_port(budget, &real.gains(port), steps);
        let cand = SolveResult {
            port,
            p1: b.p1,
            p2: b.p2,
            value: b.value.max(0.0),
            method: Method::Oracle,
        };
        match result.as_mut() {
            Some(r) => r.keep_better(cand),
            None => result = Some(cand),
        }
    }
    Ok(result.expect("realization has at least one port"))
}

/// `2^R_GN` before the clamp; monotone in the rate and cheaper to evaluate.
#[inline]
fn gn_ratio(q: &GainQuad, p1: f64, p2: f64) -> f64 {
    let bob = 1.0 + p2 * q.gh2;
    let eve = 1.0 + p2 * q.gg2;
    ((bob + p1 * q.gh1) * eve) / (bob * (eve + p1 * q.gg1))
}

fn gn_port(budget: f64, q: &GainQuad, steps: usize) -> Best {
    let mut best = Best::new();
    simplex_grid(budget, steps, |p1, p2| best.offer(p1, p2, gn_ratio(q, p1, p2)));
    let center = (best.p1, best.p2);
    window_grid(budget, center, budget / steps as f64, steps, |p1, p2| {
        best.offer(p1, p2, gn_ratio(q, p1, p2))
    });
    best
}

/// Gaussian-noise jamming baseline: two-stage 2-D grid search per port.
///
/// Ports are visited in decreasing `|h1|^2`. A port is skipped when
/// `log2(1 + P gh1) - log2(1 + P gg1 / (1 + P gg2))`, an upper bound on its
/// rate, cannot beat the incumbent.
pub fn solve_gn(budget: f64, real: &ChannelRealization, steps: usize) -> Result<SolveResult> {
    check_budget(budget)?;
    check_steps(steps)?;
    let eve_floor = real.g1.norm_sqr() / (1.0 + budget * real.g2.norm_sqr());
    let bound = |gh1: f64| ((1.0 + budget * gh1).log2() - (1.0 + budget * eve_floor).log2()).max(0.0);

    let mut order: Vec<usize> = (0..real.n_ports()).collect();
    order.sort_by(|&i, &j| real.h1[j].norm_sqr().total_cmp(&real.h1[i].norm_sqr()).then(i.cmp(&j)));

    let mut result: Option<SolveResult> = None;
    for port in order {
        let q = real.gains(port);
        if let Some(r) = &result {
            let ub = bound(q.gh1);
            if ub < r.value || (ub == r.value && port > r.port) {
                continue;
            }
        }
        let b = gn_port(budget, &q, steps);
        let cand = SolveResult {
            port,
            p1: b.p1,
            p2: b.p2,
            value: q.gn(b.p1, b.p2),
            method: Method::GaussianNoiseGrid,
        };
        match result.as_mut() {
            Some(r) => r.keep_better(cand),
            None => result = Some(cand),
        }
    }
    Ok(result.expect("realization has at least one port"))
}

/// `p1 = p2 = P/2` at every port; the port maximizing the encoded-jamming
/// rate is chosen.
pub fn equal_power(budget: f64, real: &ChannelRealization) -> Result<SolveResult> {
    check_budget(budget)?;
    let half = budget / 2.0;
    let at = |port: usize| SolveResult {
        port,
        p1: half,
        p2: half,
        value: real.gains(port).ej(half, half),
        method: Method::EqualPower,
    };
    let mut best = at(0);
    for port in 1..real.n_ports() {
        best.keep_better(at(port));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sample() -> GainQuad {
        GainQuad::new(2.0, 1.0, 1.0, 0.5).unwrap()
    }

    fn single_port(q: &GainQuad) -> ChannelRealization {
        let c = |g: f64| Complex64::new(g.sqrt(), 0.0);
        ChannelRealization::new(vec![c(q.gh1)], vec![c(q.gh2)], c(q.gg1), c(q.gg2)).unwrap()
    }

    #[test]
    fn coefficients() {
        let k = quad_coeffs(2.0, &sample());
        assert_eq!((k.a, k.b, k.c), (-0.5, -4.0, 6.0));

        let k = quad_coeffs(3.0, &GainQuad::new(1.5, 1.0, 0.7, 0.0).unwrap());
        assert_eq!((k.a, k.b), (0.0, 0.0));
        assert!((k.c - 0.8).abs() < 1e-15);

        let k = quad_coeffs(3.0, &GainQuad::new(1.5, 1.0, 0.7, 0.7).unwrap());
        assert_eq!(k.a, 0.0);
    }

    #[test]
    fn roots_of_linear_and_quadratic() {
        assert_eq!(
            QuadCoeffs {
                a: 0.0,
                b: -2.0,
                c: 3.0
            }
            .roots(),
            vec![1.5]
        );
        assert!(QuadCoeffs { a: 0.0, b: 0.0, c: 3.0 }.roots().is_empty());
        assert!(QuadCoeffs { a: 1.0, b: 0.0, c: 3.0 }.roots().is_empty());
        let mut r = QuadCoeffs {
            a: 1.0,
            b: -3.0,
            c: 2.0,
        }
        .roots();
        r.sort_by(f64::total_cmp);
        assert_eq!(r, vec![1.0, 2.0]);
    }

    #[test]
    fn deaf_eve_on_link_one_uses_full_interval() {
        let q = GainQuad::new(2.0, 1.0, 0.0, 0.5).unwrap();
        let p = solve_rhat(2.0, &q, &Interval::full(2.0)).unwrap();
        assert_eq!(p.p1, 2.0);
        assert_eq!(p.p2, 0.0);
    }

    #[test]
    fn degenerate_interval() {
        let iv = Interval::new(0.7, 0.7, 2.0).unwrap();
        let p = solve_rhat(2.0, &sample(), &iv).unwrap();
        assert_eq!(p.p1, 0.7);
        let p = solve_rtilde(2.0, &sample(), &iv).unwrap();
        assert_eq!(p.p1, 0.7);
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(Interval::new(1.0, 0.5, 2.0).is_err());
        assert!(solve_rhat(2.0, &sample(), &Interval { lb: 1.0, ub: 0.5 }).is_err());
        assert!(solve_rtilde(2.0, &sample(), &Interval { lb: 1.0, ub: 0.5 }).is_err());
    }

    #[test]
    fn degraded_bob_gives_zero_tilde() {
        let q = GainQuad::new(0.5, 0.3, 1.0, 0.9).unwrap();
        let p = solve_rtilde(4.0, &q, &Interval::full(4.0)).unwrap();
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn case_predicates() {
        let q = GainQuad::new(1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(solve_port(2.0, &q).unwrap().case_tag(), Some(CaseTag::RHat));

        let q = GainQuad::new(1.0, 1.0, 1.0, 1.5).unwrap();
        assert_eq!(solve_port(2.0, &q).unwrap().case_tag(), Some(CaseTag::RTilde));

        let r = solve_port(2.0, &sample()).unwrap();
        assert_eq!(r.case_tag(), Some(CaseTag::Split));
        assert!((r.beta().unwrap() - 0.5).abs() < 1e-15);

        assert_eq!(crossover(&GainQuad::new(1.0, 2.0, 0.3, 1.0).unwrap()), 1.0);
    }

    #[test]
    fn zero_gh1_never_splits() {
        for gg2 in [0.0, 0.5, 1.0, 1.5] {
            let q = GainQuad::new(0.0, 1.0, 0.4, gg2).unwrap();
            let r = solve_port(3.0, &q).unwrap();
            assert_ne!(r.case_tag(), Some(CaseTag::Split));
            assert_eq!(r.value, 0.0);
        }
    }

    #[test]
    fn crossover_boundaries() {
        let q = GainQuad::new(1.0, 2.0, 0.5, 2.0).unwrap();
        assert_eq!(crossover(&q), 0.0);
        // gg2 = gh2 / (1 + P gh1) with exactly representable values
        let q = GainQuad::new(0.5, 3.0, 0.5, 1.0).unwrap();
        assert_eq!(crossover(&q), 4.0);
    }

    #[test]
    fn single_port_matches_solve_port() {
        let real = single_port(&sample());
        let a = solve_all_ports(2.0, &real).unwrap();
        let b = solve_port(2.0, &real.gains(0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equal_power_is_feasible_point() {
        let real = single_port(&sample());
        let eq = equal_power(2.0, &real).unwrap();
        assert_eq!((eq.p1, eq.p2), (1.0, 1.0));
        assert!((eq.value - sample().ej(1.0, 1.0)).abs() < 1e-15);
        assert!(eq.value <= solve_all_ports(2.0, &real).unwrap().value);
    }

    #[test]
    fn symmetric_channels() {
        let q = GainQuad::new(0.8, 1.1, 0.8, 1.1).unwrap();
        let real = single_port(&q);
        assert_eq!(equal_power(5.0, &real).unwrap().value, 0.0);
        assert_eq!(solve_gn(5.0, &real, 100).unwrap().value, 0.0);
        assert!(oracle_ej(5.0, &real, 100).unwrap().value.abs() < 1e-12);
        assert!(solve_all_ports(5.0, &real).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn vanishing_budget() {
        let real = single_port(&sample());
        assert!(oracle_ej(1e-9, &real, 100).unwrap().value < 1e-8);
        assert!(solve_all_ports(1e-9, &real).unwrap().value < 1e-8);
    }

    #[test]
    fn too_few_steps() {
        let real = single_port(&sample());
        assert!(oracle_ej(1.0, &real, 99).is_err());
        assert!(solve_gn(1.0, &real, 10).is_err());
    }

    #[test]
    fn gn_without_eve_jamming_prefers_no_jamming() {
        let q = GainQuad::new(1.5, 0.8, 0.6, 0.0).unwrap();
        let r = solve_gn(4.0, &single_port(&q), 256).unwrap();
        assert!(r.p2 <= 4.0 / 256.0, "p2 = {}", r.p2);
        let line = q.gn(4.0, 0.0);
        assert!((r.value - line).abs() < 1e-12);
    }

    #[test]
    fn window_grid_stays_feasible() {
        let mut count = 0;
        window_grid(1.0, (0.5, 0.5), 0.1, 50, |p1, p2| {
            assert!(p1 >= 0.0 && p2 >= 0.0 && p1 + p2 <= 1.0 + 1e-15);
            count += 1;
        });
        assert!(count > 50);
    }
}
