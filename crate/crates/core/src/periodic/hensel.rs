//! Lifting mod-p cycles to exact rational periodic points.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::modp::{periodic_modp, ModPCycle};
use crate::error::Result;
use crate::map::{ExactPoint, HenonMap};
use crate::rational::{is_prime, mod_inverse, rational_reconstruct, reduce_mod};

pub const DEFAULT_HEIGHT_BOUND: u64 = 1_000_000;
pub const DEFAULT_PRIMES: [u64; 2] = [101, 103];

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct LiftReport {
    /// Certified periodic points (whole orbits), sorted.
    pub points: Vec<ExactPoint>,
    /// Attempts skipped because `Df^n - I` is singular mod p.
    pub singular: usize,
    /// Attempts whose reconstruction or exact check failed.
    pub no_rational_point: usize,
}

struct ModMap {
    m: BigInt,
    factors: Vec<(Vec<BigInt>, BigInt)>,
}

type Vec2 = (BigInt, BigInt);
type Mat = [[BigInt; 2]; 2];

impl ModMap {
    fn new(f: &HenonMap, m: &BigInt) -> Option<Self> {
        let mut factors = Vec::new();
        for h in f.factors() {
            let coeffs = h
                .poly()
                .coeffs()
                .iter()
                .map(|c| reduce_mod(c, m))
                .collect::<Option<Vec<_>>>()?;
            factors.push((coeffs, reduce_mod(h.delta(), m)?));
        }
        Some(ModMap { m: m.clone(), factors })
    }

    /// `f^n(z)` and `Df^n(z)` modulo m.
    fn iterate_with_jacobian(&self, z: &Vec2, n: usize) -> (Vec2, Mat) {
        let m = &self.m;
        let (mut x, mut y) = z.clone();
        let mut j: Mat = [[BigInt::one(), BigInt::zero()], [BigInt::zero(), BigInt::one()]];
        for _ in 0..n {
            for (coeffs, delta) in &self.factors {
                let mut p = BigInt::zero();
                let mut dp = BigInt::zero();
                for c in coeffs.iter().rev() {
                    dp = (&dp * &y + &p).mod_floor(m);
                    p = (&p * &y + c).mod_floor(m);
                }
                // local differential [[0, 1], [-δ, p'(y)]]
                let r0 = [j[1][0].clone(), j[1][1].clone()];
                let r1 = [
                    (&dp * &j[1][0] - delta * &j[0][0]).mod_floor(m),
                    (&dp * &j[1][1] - delta * &j[0][1]).mod_floor(m),
                ];
                j = [r0, r1];
                let ny = (p - delta * &x).mod_floor(m);
                x = std::mem::replace(&mut y, ny);
            }
        }
        ((x, y), j)
    }
}

/// Newton-lifts the first point of `cycle` to a fixed point of `f^n` modulo
/// `p^k`; `None` when `Df^n - I` is singular mod p.
fn lift_point(map: &ModMap, p: u64, start: (u64, u64), n: usize, steps: usize) -> Option<Vec2> {
    let m = &map.m;
    let mut z = (BigInt::from(start.0), BigInt::from(start.1));
    for _ in 0..steps {
        let ((fx, fy), j) = map.iterate_with_jacobian(&z, n);
        let rx = (fx - &z.0).mod_floor(m);
        let ry = (fy - &z.1).mod_floor(m);
        if rx.is_zero() && ry.is_zero() {
            return Some(z);
        }
        let a: BigInt = &j[0][0] - 1;
        let d: BigInt = &j[1][1] - 1;
        let det = (&a * &d - &j[0][1] * &j[1][0]).mod_floor(m);
        if (&det % BigInt::from(p)).is_zero() {
            return None;
        }
        let inv = mod_inverse(&det, m)?;
        // (J - I)^{-1} r
        let sx = ((&d * &rx - &j[0][1] * &ry) * &inv).mod_floor(m);
        let sy = ((&a * &ry - &j[1][0] * &rx) * &inv).mod_floor(m);
        z = ((&z.0 - sx).mod_floor(m), (&z.1 - sy).mod_floor(m));
    }
    let ((fx, fy), _) = map.iterate_with_jacobian(&z, n);
    (fx == z.0 && fy == z.1).then_some(z)
}

/// Exact orbit of `q` if it closes within `n` steps.
pub fn exact_cycle(f: &HenonMap, q: &ExactPoint, n: usize) -> Option<Vec<ExactPoint>> {
    let mut orbit = vec![q.clone()];
    let mut cur = f.eval_exact(q);
    for _ in 1..=n {
        if &cur == q {
            return Some(orbit);
        }
        orbit.push(cur.clone());
        cur = f.eval_exact(&cur);
    }
    None
}

/// Lifts a cycle of length `k` mod p against `f^{km}` for every `km ≤ max_period`,
/// reconstructs rationals of height at most `height_bound`, and keeps only
/// points whose exact orbit closes.
pub fn hensel_lift(
    f: &HenonMap,
    p: u64,
    cycle: &ModPCycle,
    max_period: usize,
    height_bound: u64,
) -> Result<LiftReport> {
    let mut report = LiftReport::default();
    if cycle.is_empty() || !is_prime(p) {
        return Ok(report);
    }
    // p^k > 2 H²
    let target = BigInt::from(height_bound).pow(2) * 2;
    let mut m = BigInt::from(p);
    let mut k = 1usize;
    while m <= target {
        m *= p;
        k += 1;
    }
    let steps = (usize::BITS - k.leading_zeros()) as usize + 2;
    let Some(map) = ModMap::new(f, &m) else {
        return Ok(report);
    };
    let len = cycle.len();
    let mut found = Vec::new();
    for n in (len..=max_period).step_by(len) {
        let Some((x, y)) = lift_point(&map, p, cycle.points[0], n, steps) else {
            report.singular += 1;
            continue;
        };
        let cand = rational_reconstruct(&x, &m).zip(rational_reconstruct(&y, &m));
        match cand.and_then(|(x, y)| exact_cycle(f, &ExactPoint::new(x, y), n)) {
            Some(orbit) => found.extend(orbit),
            None => report.no_rational_point += 1,
        }
    }
    found.sort();
    found.dedup();
    report.points = found;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactCycle {
    /// Orbit order, starting from the smallest point.
    pub points: Vec<ExactPoint>,
    pub period: usize,
    /// Primes whose lifts produced this cycle.
    pub primes: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactPeriodicReport {
    pub cycles: Vec<ExactCycle>,
    pub primes_used: Vec<u64>,
    /// Primes skipped for bad reduction.
    pub primes_skipped: Vec<u64>,
    pub height_bound: u64,
    pub singular_lifts: usize,
}

impl ExactPeriodicReport {
    pub fn points(&self) -> impl Iterator<Item = &ExactPoint> {
        self.cycles.iter().flat_map(|c| c.points.iter())
    }
}

/// Rational periodic points of period at most `max_period` from mod-p cycles
/// at each good prime in `primes`. Every returned point is exactly verified;
/// the union over primes is reported with the primes that found each cycle.
pub fn exact_periodic_points(
    f: &HenonMap,
    max_period: usize,
    primes: &[u64],
    height_bound: u64,
) -> Result<ExactPeriodicReport> {
    let mut by_cycle: BTreeMap<Vec<ExactPoint>, Vec<u64>> = BTreeMap::new();
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    let mut singular = 0;
    for &p in primes {
        let set = periodic_modp(f, p, max_period)?;
        if !set.good_reduction {
            skipped.push(p);
            continue;
        }
        used.push(p);
        for c in &set.cycles {
            let lift = hensel_lift(f, p, c, max_period, height_bound)?;
            singular += lift.singular;
            for q in &lift.points {
                let orbit = exact_cycle(f, q, max_period).expect("lifted points are periodic");
                let m = (0..orbit.len()).min_by(|&a, &b| orbit[a].cmp(&orbit[b])).unwrap();
                let mut orbit = orbit;
                orbit.rotate_left(m);
                let entry = by_cycle.entry(orbit).or_default();
                if !entry.contains(&p) {
                    entry.push(p);
                }
            }
        }
    }
    let mut cycles: Vec<ExactCycle> = by_cycle
        .into_iter()
        .map(|(points, primes)| ExactCycle {
            period: points.len(),
            points,
            primes,
        })
        .collect();
    cycles.sort_by(|a, b| a.period.cmp(&b.period).then_with(|| a.points.cmp(&b.points)));
    Ok(ExactPeriodicReport {
        cycles,
        primes_used: used,
        primes_skipped: skipped,
        height_bound,
        singular_lifts: singular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn dissipative() -> HenonMap {
        HenonMap::quadratic(rat(1, 2), rat(1, 2)).unwrap()
    }

    #[test]
    fn lifts_fixed_points_mod_5() {
        let f = dissipative();
        let three = ModPCycle { points: vec![(3, 3)] };
        let r = hensel_lift(&f, 5, &three, 1, 10).unwrap();
        assert_eq!(r.points, vec![ExactPoint::new(rat(1, 2), rat(1, 2))]);
        let one = ModPCycle { points: vec![(1, 1)] };
        let r = hensel_lift(&f, 5, &one, 1, 10).unwrap();
        assert_eq!(r.points, vec![ExactPoint::new(int(1), int(1))]);
    }

    /// Exhaustive search over rationals of height ≤ 10 for points of period ≤ 5.
    fn brute_periodic(f: &HenonMap, h: i64, max_period: usize) -> Vec<ExactPoint> {
        let mut vals = Vec::new();
        for d in 1..=h {
            for n in -h..=h {
                let r = rat(n, d);
                if !vals.contains(&r) {
                    vals.push(r);
                }
            }
        }
        let mut out = Vec::new();
        for x in &vals {
            for y in &vals {
                let q = ExactPoint::new(x.clone(), y.clone());
                if exact_cycle(f, &q, max_period).is_some() {
                    out.push(q);
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn five_cycles_usually_lift_to_nothing() {
        let f = HenonMap::quadratic(rat(2, 7), rat(3, 5)).unwrap();
        let set = periodic_modp(&f, 11, 5).unwrap();
        let mut lifted = Vec::new();
        for c in set.cycles.iter().filter(|c| c.len() == 5) {
            lifted.extend(hensel_lift(&f, 11, c, 5, 10).unwrap().points);
        }
        let brute: Vec<_> = brute_periodic(&f, 10, 5).into_iter().collect();
        for q in &lifted {
            assert!(brute.contains(q));
        }
        assert!(brute.iter().all(|q| exact_cycle(&f, q, 5).unwrap().len() != 5 || lifted.contains(q)));
    }

    #[test]
    fn two_prime_pipeline_matches_brute_force() {
        let f = dissipative();
        let report = exact_periodic_points(&f, 4, &DEFAULT_PRIMES, DEFAULT_HEIGHT_BOUND).unwrap();
        let found: Vec<ExactPoint> = {
            let mut v: Vec<_> = report.points().cloned().collect();
            v.sort();
            v
        };
        assert_eq!(found, brute_periodic(&f, 10, 4));
        assert_eq!(
            found,
            vec![ExactPoint::new(rat(1, 2), rat(1, 2)), ExactPoint::new(int(1), int(1))]
        );
        assert!(report.cycles.iter().all(|c| c.primes == vec![101, 103]));
    }
}
