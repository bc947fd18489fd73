//! Cycles of the reduction of a map modulo a prime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp::PrimeField;
use crate::map::HenonMap;
use crate::rational::is_prime;

/// Largest field size enumerated exhaustively.
pub const MAX_MODP_STATES: u64 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModPCycle {
    /// Orbit order, starting from the lexicographically smallest point.
    pub points: Vec<(u64, u64)>,
}

impl ModPCycle {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModPCycleSet {
    pub p: u64,
    /// Cycles of length at most the requested maximal period.
    pub cycles: Vec<ModPCycle>,
    /// Sum of the lengths of all cycles, whatever their length.
    pub cycle_length_sum: u64,
    /// Every coefficient reduces and every delta is a unit mod p.
    pub good_reduction: bool,
    /// Some coefficient has p in its denominator: the reduction is undefined.
    pub undefined: bool,
}

pub(crate) struct ReducedMap {
    field: PrimeField,
    factors: Vec<(Vec<u64>, u64)>,
}

impl ReducedMap {
    pub(crate) fn new(f: &HenonMap, p: u64) -> Option<Self> {
        let field = PrimeField::new(p);
        let mut factors = Vec::new();
        for h in f.factors() {
            let coeffs = h
                .poly()
                .coeffs()
                .iter()
                .map(|c| field.reduce(c))
                .collect::<Option<Vec<_>>>()?;
            factors.push((coeffs, field.reduce(h.delta())?));
        }
        Some(ReducedMap { field, factors })
    }

    fn invertible(&self) -> bool {
        self.factors.iter().all(|(_, d)| *d != 0)
    }

    pub(crate) fn apply(&self, (mut x, mut y): (u64, u64)) -> (u64, u64) {
        let f = &self.field;
        for (coeffs, delta) in &self.factors {
            let ny = f.sub(f.eval(coeffs, y), f.mul(*delta, x));
            x = y;
            y = ny;
        }
        (x, y)
    }
}

/// Enumerates all cycles of the reduced map on `F_p²` by walking the functional
/// graph once from every state.
pub fn periodic_modp(f: &HenonMap, p: u64, max_period: usize) -> Result<ModPCycleSet> {
    if !is_prime(p) {
        return Err(Error::invalid("p", format!("{p} is not prime")));
    }
    if max_period == 0 {
        return Err(Error::invalid("max_period", "must be at least 1"));
    }
    if p.saturating_mul(p) > MAX_MODP_STATES {
        return Err(Error::CapExceeded(format!("p^2 = {} states exceed the enumeration cap", p as u128 * p as u128)));
    }
    let Some(map) = ReducedMap::new(f, p) else {
        return Ok(ModPCycleSet {
            p,
            cycles: Vec::new(),
            cycle_length_sum: 0,
            good_reduction: false,
            undefined: true,
        });
    };
    let n = (p * p) as usize;
    let index = |(x, y): (u64, u64)| (x * p + y) as usize;
    let point = |i: usize| ((i as u64) / p, (i as u64) % p);
    // 0 = unvisited, otherwise the 1-based id of the walk that reached it
    let mut walk_id = vec![0u32; n];
    let mut cycles = Vec::new();
    let mut cycle_length_sum = 0u64;
    let mut path = Vec::new();
    for start in 0..n {
        if walk_id[start] != 0 {
            continue;
        }
        let id = start as u32 + 1;
        path.clear();
        let mut cur = start;
        while walk_id[cur] == 0 {
            walk_id[cur] = id;
            path.push(cur);
            cur = index(map.apply(point(cur)));
        }
        if walk_id[cur] != id {
            continue;
        }
        let pos = path.iter().position(|&s| s == cur).expect("cycle entry on path");
        let len = path.len() - pos;
        cycle_length_sum += len as u64;
        if len <= max_period {
            let mut pts: Vec<(u64, u64)> = path[pos..].iter().map(|&s| point(s)).collect();
            let m = (0..len).min_by_key(|&i| pts[i]).unwrap();
            pts.rotate_left(m);
            cycles.push(ModPCycle { points: pts });
        }
    }
    cycles.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.points.cmp(&b.points)));
    Ok(ModPCycleSet {
        p,
        cycles,
        cycle_length_sum,
        good_reduction: map.invertible(),
        undefined: false,
    })
}
