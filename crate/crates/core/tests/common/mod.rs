//! Reference computations shared by the integration tests. Nothing here
//! calls the closed-form solver.

#![allow(dead_code)]

use fas_secrecy::channel::complex_normal;
use fas_secrecy::rates::GainQuad;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;

const FRAC_BITS: u32 = 256;

/// `J0(x)` from its power series evaluated in 256-bit fixed point. Summation
/// stops once a term falls below `1e-20`, well past the `1e-18` needed.
pub fn j0_series(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let one = BigInt::from(1) << FRAC_BITS;
    // x = mantissa * 2^exp exactly.
    let (mantissa, exp) = decompose(x.abs());
    let shift = FRAC_BITS as i64 + exp;
    let xf = if shift >= 0 {
        BigInt::from(mantissa) << shift as u32
    } else {
        BigInt::from(mantissa) >> (-shift) as u32
    };
    // y = (x/2)^2 in fixed point
    let y: BigInt = (&xf * &xf) >> (FRAC_BITS + 2);
    let stop = &one / BigInt::from(10u64).pow(20);

    let mut term = one.clone();
    let mut sum = one.clone();
    let mut m: u64 = 1;
    loop {
        term = -((&term * &y) >> FRAC_BITS) / BigInt::from(m * m);
        sum += &term;
        if term.abs() < stop && m as f64 > x {
            break;
        }
        m += 1;
        assert!(m < 10_000);
    }
    sum.to_f64().unwrap() * 2f64.powi(-(FRAC_BITS as i32))
}

fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}

/// Gains drawn as squared magnitudes of `CN(0, 1)` variables.
pub fn random_quad<R: Rng>(rng: &mut R) -> GainQuad {
    let mut g = || complex_normal(rng).norm_sqr();
    GainQuad::new(g(), g(), g(), g()).unwrap()
}

/// Best value of `f` on a uniform `steps x steps` grid over the simplex, refined
/// `rounds` times by a factor of `steps / 4` around the incumbent.
pub fn grid_max<F: Fn(f64, f64) -> f64>(budget: f64, steps: usize, rounds: usize, f: F) -> (f64, f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut lo1 = 0.0;
    let mut hi1 = budget;
    let mut lo2 = 0.0;
    let mut hi2 = budget;
    for _ in 0..=rounds {
        let d1 = (hi1 - lo1) / steps as f64;
        let d2 = (hi2 - lo2) / steps as f64;
        for i in 0..=steps {
            let p1 = lo1 + d1 * i as f64;
            for j in 0..=steps {
                let p2 = (lo2 + d2 * j as f64).min(budget - p1);
                if p2 < 0.0 {
                    continue;
                }
                let v = f(p1, p2);
                if v > best.0 {
                    best = (v, p1, p2);
                }
            }
        }
        lo1 = (best.1 - 2.0 * d1).max(0.0);
        hi1 = (best.1 + 2.0 * d1).min(budget);
        lo2 = (best.2 - 2.0 * d2).max(0.0);
        hi2 = (best.2 + 2.0 * d2).min(budget);
    }
    best
}

/// Literal case enumeration for maximizing `R_hat(p1, P - p1)` over
/// `[lb, ub]`, with `a`, `b`, `c` and `alpha` written out directly.
pub fn rhat_case_enumeration(budget: f64, q: &GainQuad, lb: f64, ub: f64) -> f64 {
    let GainQuad { gh1, gg1, gg2, .. } = *q;
    let k = budget * gg2 + 1.0;
    let a = -gh1 * gg2 * (gg1 - gg2);
    let b = -2.0 * gh1 * gg2 * k;
    let c = gh1 * k * k - gg1 * k;
    let r = |p1: f64| q.hat_raw(p1, budget - p1);
    let argmax2 = |x: f64, y: f64| r(x).max(r(y));

    let disc = b * b - 4.0 * a * c;
    let alpha = (-b - disc.sqrt()) / (2.0 * a);
    let inside = |p: f64| lb < p && p < ub;
    if a == 0.0 && inside(-c / b) {
        r(-c / b)
    } else if a > 0.0 && inside(alpha) {
        argmax2(alpha, ub)
    } else if a < 0.0 && disc > 0.0 && inside(alpha) {
        argmax2(lb, alpha)
    } else {
        argmax2(lb, ub)
    }
}
