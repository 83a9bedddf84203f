//! Randomized cross-check of the closed-form solver against the grid oracle.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{complex_normal, realization_rng, ChannelRealization};
use crate::error::{Error, Result};
use crate::optimizer::{oracle_ej, solve_all_ports, SolveResult};

/// The closed form may trail the oracle by at most this much.
pub const SHORTFALL_TOL: f64 = 1e-9;
/// The closed form may beat the oracle by at most this much (grid resolution).
pub const EXCESS_TOL: f64 = 1e-3;
pub const DEFAULT_ORACLE_STEPS: usize = 2000;

const BUDGETS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
const MAX_PORTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub budget: f64,
    pub realization: ChannelRealization,
}

/// Uncorrelated `CN(0, 1)` gains on 1..=10 ports with a budget drawn from
/// {0.1, 1, 10, 100}.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R) -> Instance {
    let n = rng.random_range(1..=MAX_PORTS);
    let budget = BUDGETS[rng.random_range(0..BUDGETS.len())];
    let h1 = (0..n).map(|_| complex_normal(rng)).collect();
    let h2 = (0..n).map(|_| complex_normal(rng)).collect();
    let g1 = complex_normal(rng);
    let g2 = complex_normal(rng);
    Instance {
        budget,
        realization: ChannelRealization { h1, h2, g1, g2 },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub index: u64,
    pub instance: Instance,
    pub closed_form: SolveResult,
    pub oracle: SolveResult,
}

impl Comparison {
    /// How far past either tolerance this comparison lands; positive means
    /// a violation.
    fn violation(&self) -> f64 {
        let gap = self.closed_form.value - self.oracle.value;
        (-gap - SHORTFALL_TOL).max(gap - EXCESS_TOL)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub count: u64,
    pub seed: u64,
    pub steps: usize,
    /// Largest `oracle - closed_form`.
    pub max_shortfall: f64,
    /// Largest `closed_form - oracle`.
    pub max_excess: f64,
    pub worst: Comparison,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_shortfall <= SHORTFALL_TOL && self.max_excess <= EXCESS_TOL
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instances:     {}", self.count)?;
        writeln!(f, "seed:          {}", self.seed)?;
        writeln!(f, "oracle steps:  {}", self.steps)?;
        writeln!(
            f,
            "max shortfall: {:.3e} bits (limit {SHORTFALL_TOL:e})",
            self.max_shortfall
        )?;
        writeln!(f, "max excess:    {:.3e} bits (limit {EXCESS_TOL:e})", self.max_excess)?;
        write!(f, "result:        {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let real = &self.instance.realization;
        writeln!(f, "instance #{} with P = {}", self.index, self.instance.budget)?;
        writeln!(
            f,
            "  |g1|^2 = {:e}, |g2|^2 = {:e}",
            real.g1.norm_sqr(),
            real.g2.norm_sqr()
        )?;
        for n in 0..real.n_ports() {
            let q = real.gains(n);
            writeln!(f, "  port {}: |h1|^2 = {:e}, |h2|^2 = {:e}", n + 1, q.gh1, q.gh2)?;
        }
        let show = |f: &mut fmt::Formatter<'_>, label: &str, r: &SolveResult| {
            writeln!(
                f,
                "  {label}: port {} p1 = {:e} p2 = {:e} value = {:.12}",
                r.port + 1,
                r.p1,
                r.p2,
                r.value
            )
        };
        show(f, "closed form", &self.closed_form)?;
        show(f, "oracle     ", &self.oracle)
    }
}

/// Compares [`solve_all_ports`] with [`oracle_ej`] on `count` random
/// instances; instance `i` is drawn from stream `i` of `seed`.
pub fn oracle_equivalence(count: u64, seed: u64, steps: usize) -> Result<OracleReport> {
    if count == 0 {
        return Err(Error::Config("instance count must be >= 1".into()));
    }
    let comparisons = (0..count)
        .into_par_iter()
        .map(|index| {
            let instance = random_instance(&mut realization_rng(seed, index));
            let closed_form = solve_all_ports(instance.budget, &instance.realization)?;
            let oracle = oracle_ej(instance.budget, &instance.realization, steps)?;
            Ok(Comparison {
                index,
                instance,
                closed_form,
                oracle,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut max_shortfall = f64::NEG_INFINITY;
    let mut max_excess = f64::NEG_INFINITY;
    let mut worst = 0;
    for (i, c) in comparisons.iter().enumerate() {
        let gap = c.closed_form.value - c.oracle.value;
        max_shortfall = max_shortfall.max(-gap);
        max_excess = max_excess.max(gap);
        if c.violation() > comparisons[worst].violation() {
            worst = i;
        }
    }
    Ok(OracleReport {
        count,
        seed,
        steps,
        max_shortfall,
        max_excess,
        worst: comparisons.into_iter().nth(worst).expect("count >= 1"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let a = oracle_equivalence(50, 3, 400).unwrap();
        let b = oracle_equivalence(50, 3, 400).unwrap();
        assert!(a.passed(), "{a}\n{}", a.worst);
        assert_eq!(a, b);
        assert_eq!(a.to_string(), b.to_string());
    }

    #[test]
    fn zero_count_rejected() {
        assert!(oracle_equivalence(0, 1, 2000).is_err());
    }

    #[test]
    fn instances_within_ranges() {
        let mut rng = realization_rng(9, 0);
        for _ in 0..200 {
            let inst = random_instance(&mut rng);
            assert!((1..=MAX_PORTS).contains(&inst.realization.n_ports()));
            assert!(BUDGETS.contains(&inst.budget));
        }
    }
}
