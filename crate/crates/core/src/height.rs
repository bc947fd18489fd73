//! Canonical heights of rational points: `ĥ(q) = Σ_v (G⁺_v + G⁻_v)(q)` over the
//! places of ℚ, all with weight 1.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{GreenEvaluator, GreenValue, DEFAULT_N_MAX};
use crate::map::{Direction, ExactPoint, HenonMap, NumPoint};
use crate::padic::{exact_orbit, padic_from_orbit, relevant_places, ExactOrbit, PlaceId, ORBIT_BIT_CAP, ORBIT_STEP_CAP};
use crate::rational::format_rational;

pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaceContribution {
    pub plus: f64,
    pub minus: f64,
    pub error: f64,
    pub exact: bool,
    /// At a prime: the rational multiples of `log p` (midpoints if inexact).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub plus_multiple: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub minus_multiple: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightValue {
    pub h_plus: f64,
    pub h_minus: f64,
    pub per_place: BTreeMap<PlaceId, PlaceContribution>,
    pub error: f64,
    /// The exact orbit of the point closes up.
    pub periodic: bool,
}

impl HeightValue {
    pub fn total(&self) -> f64 {
        self.h_plus + self.h_minus
    }
}

/// Picks the latest orbit point that is comfortably representable in floating
/// point; `G(q) = λ^{-n} G(f^n q)` lets the numeric evaluation start there.
fn float_start(orbit: &ExactOrbit) -> (usize, NumPoint) {
    for (n, q) in orbit.points.iter().enumerate().take(64).rev() {
        let z = q.to_numeric();
        if z.is_finite() && z.norm() < 1e100 {
            return (n, z);
        }
    }
    (0, orbit.points[0].to_numeric())
}

fn archimedean(ev: &GreenEvaluator, dir: Direction, orbit: &ExactOrbit, tol: f64) -> GreenValue {
    let oriented = ev.oriented(dir);
    let (n, z) = float_start(orbit);
    let scale = oriented.lambda().powi(n as i32);
    let g = oriented.green_normalized(z, (tol * scale).min(1e-3).max(tol), DEFAULT_N_MAX);
    GreenValue {
        value: g.value / scale,
        error: g.error / scale,
        escaped: g.escaped,
        escape_iterate: g.escape_iterate.map(|k| k + n as u32),
    }
}

/// `ĥ_f(q)` with every relevant place listed. Periodic points (exact orbit
/// closure) get exact zeros everywhere; otherwise the archimedean terms carry
/// an error at most `tol` each and inexact primes add their bracket radius.
pub fn canonical_height(f: &HenonMap, q: &ExactPoint, tol: f64) -> Result<HeightValue> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid("tol", "must be a positive finite number"));
    }
    let places = relevant_places(f, q)?;
    // Most points are settled by a short orbit; the full budget is spent only
    // when positivity is not yet certified.
    for cap in STAGED_ORBIT_BITS {
        let h = height_with_cap(f, q, tol, &places, cap);
        if h.periodic || certified_positive(&h) {
            return Ok(h);
        }
    }
    Ok(height_with_cap(f, q, tol, &places, ORBIT_BIT_CAP))
}

/// Bit budgets of the cheaper orbit passes tried before the full one.
pub const STAGED_ORBIT_BITS: [u64; 2] = [256, 1024];

fn certified_positive(h: &HeightValue) -> bool {
    let all_exact = h.per_place.values().all(|c| c.exact || c.plus_multiple.is_none());
    let positive = h.per_place.values().any(|c| {
        if c.plus_multiple.is_some() {
            c.plus + c.minus > 0.0
        } else {
            c.plus + c.minus > c.error
        }
    });
    all_exact && positive
}

fn height_with_cap(f: &HenonMap, q: &ExactPoint, tol: f64, places: &BTreeSet<PlaceId>, bit_cap: u64) -> HeightValue {
    let orbits: Vec<(Direction, HenonMap, ExactOrbit)> = [Direction::Plus, Direction::Minus]
        .into_iter()
        .map(|dir| {
            let (g, swap) = f.oriented(dir);
            let start = if swap { q.swapped() } else { q.clone() };
            let orbit = exact_orbit(&g, &start, ORBIT_STEP_CAP, bit_cap);
            (dir, g, orbit)
        })
        .collect();
    let periodic = orbits[0].2.periodic;
    let mut per_place = BTreeMap::new();
    if periodic {
        for &place in places {
            let zero = match place {
                PlaceId::Infinity => None,
                PlaceId::Prime(_) => Some("0/1".to_string()),
            };
            per_place.insert(
                place,
                PlaceContribution {
                    plus: 0.0,
                    minus: 0.0,
                    error: 0.0,
                    exact: true,
                    plus_multiple: zero.clone(),
                    minus_multiple: zero,
                },
            );
        }
        return HeightValue {
            h_plus: 0.0,
            h_minus: 0.0,
            per_place,
            error: 0.0,
            periodic: true,
        };
    }
    let ev = GreenEvaluator::new(f);
    for &place in places {
        let c = match place {
            PlaceId::Infinity => {
                let gp = archimedean(&ev, Direction::Plus, &orbits[0].2, tol);
                let gm = archimedean(&ev, Direction::Minus, &orbits[1].2, tol);
                PlaceContribution {
                    plus: gp.value,
                    minus: gm.value,
                    error: gp.error + gm.error,
                    exact: false,
                    plus_multiple: None,
                    minus_multiple: None,
                }
            }
            PlaceId::Prime(p) => {
                let gp = padic_from_orbit(&orbits[0].1, &orbits[0].2, p);
                let gm = padic_from_orbit(&orbits[1].1, &orbits[1].2, p);
                PlaceContribution {
                    plus: gp.value(),
                    minus: gm.value(),
                    error: gp.radius() + gm.radius(),
                    exact: gp.exact && gm.exact,
                    plus_multiple: Some(format_rational(&gp.multiple())),
                    minus_multiple: Some(format_rational(&gm.multiple())),
                }
            }
        };
        per_place.insert(place, c);
    }
    // fixed summation order: places ascending
    let h_plus = per_place.values().map(|c| c.plus).sum();
    let h_minus = per_place.values().map(|c| c.minus).sum();
    let error = per_place.values().map(|c| c.error).sum();
    HeightValue {
        h_plus,
        h_minus,
        per_place,
        error,
        periodic: false,
    }
}

fn verdict(value: f64, error: f64, eps: f64) -> Result<bool> {
    if !(eps > error) {
        return Err(Error::MeaninglessVerdict { eps, error });
    }
    Ok(value <= eps)
}

/// Numeric surrogate of the Northcott criterion: `ĥ_f(q) ≤ eps`.
pub fn is_periodic_by_height(f: &HenonMap, q: &ExactPoint, eps: f64, tol: f64) -> Result<bool> {
    let h = canonical_height(f, q, tol)?;
    verdict(h.total(), h.error, eps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairHeight {
    pub value: f64,
    pub error: f64,
    pub member: bool,
    pub f: HeightValue,
    pub g: HeightValue,
}

/// Membership of `(q, q)` in the small-height set: `ĥ_f(q) + ĥ_g(q) ≤ eps`.
pub fn pair_small_height(f: &HenonMap, g: &HenonMap, q: &ExactPoint, eps: f64, tol: f64) -> Result<PairHeight> {
    let hf = canonical_height(f, q, tol)?;
    let hg = canonical_height(g, q, tol)?;
    let value = hf.total() + hg.total();
    let error = hf.error + hg.error;
    Ok(PairHeight {
        value,
        error,
        member: verdict(value, error, eps)?,
        f: hf,
        g: hg,
    })
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    key: String,
    value: HeightValue,
}

/// Append-only JSON-lines cache of heights keyed by map hash, point and tol.
pub struct HeightCache {
    path: PathBuf,
    entries: RwLock<HashMap<String, HeightValue>>,
    file: Mutex<File>,
}

impl HeightCache {
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                // a torn final line from an interrupted writer is skipped
                if let Ok(l) = serde_json::from_str::<CacheLine>(&line?) {
                    entries.insert(l.key, l.value);
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(HeightCache {
            path: path.to_path_buf(),
            entries: RwLock::new(entries),
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn key(map_hash: &str, q: &ExactPoint, tol: f64) -> String {
        format!("{map_hash}|{},{}|{:016x}", format_rational(&q.x), format_rational(&q.y), tol.to_bits())
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_compute(&self, f: &HenonMap, map_hash: &str, q: &ExactPoint, tol: f64) -> Result<HeightValue> {
        let key = Self::key(map_hash, q, tol);
        if let Some(v) = self.entries.read().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let value = canonical_height(f, q, tol)?;
        let mut entries = self.entries.write().expect("cache lock");
        if let Some(v) = entries.get(&key) {
            return Ok(v.clone());
        }
        let line = serde_json::to_string(&CacheLine {
            key: key.clone(),
            value: value.clone(),
        })?;
        {
            let mut file = self.file.lock().expect("cache file lock");
            writeln!(file, "{line}")?;
            file.flush()?;
        }
        entries.insert(key, value.clone());
        Ok(value)
    }
}
