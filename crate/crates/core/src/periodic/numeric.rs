//! Complex periodic points by Newton's method.
//!
//! A point of period dividing n of a map with k factors is encoded by the
//! cyclic sequence `y_0, ..., y_{L-1}` (`L = nk`) of second coordinates of the
//! intermediate states, subject to `y_{j+1} = p_j(y_j) - δ_j y_{j-1}` with
//! indices mod L. Its solutions are exactly the points `(y_{L-1}, y_0)` with
//! `f^n(z) = z`, and the sparse cyclic system is far better conditioned than
//! `f^n(z) - z` itself.

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::Oriented;
use crate::map::{mat_mul, ComplexHenon, Mat2, NumPoint};

const NEWTON_ITERS: usize = 80;
pub const SADDLE_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleClass {
    Saddle,
    Attracting,
    RepellingLike,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericCycle {
    /// Orbit order, starting from the lexicographically smallest point.
    pub points: Vec<NumPoint>,
    pub period: usize,
    /// Eigenvalue magnitudes of `Df^period`, largest first.
    pub multipliers: [f64; 2],
    pub class: CycleClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericReport {
    pub n: usize,
    pub cycles: Vec<NumericCycle>,
    /// Distinct points of period dividing n that were found.
    pub found: usize,
    /// `λ^n`, the count with multiplicity.
    pub expected: u64,
    pub coverage: f64,
    pub seed: u64,
    pub starts: usize,
}

impl NumericReport {
    pub fn points(&self) -> impl Iterator<Item = &NumPoint> {
        self.cycles.iter().flat_map(|c| c.points.iter())
    }
}

/// Radius of a bidisk containing every bounded orbit.
pub fn bounded_radius(f: &ComplexHenon) -> f64 {
    let fwd = Oriented::new(f.clone(), false).escape_data().radius;
    let bwd = Oriented::new(f.swapped_inverse(), true).escape_data().radius;
    fwd.max(bwd)
}

/// Dense complex LU solve of `a x = b`; `None` if singular.
fn solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[piv][col].norm() == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            if m.is_zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= m * v;
            }
            let v = b[col];
            b[row] -= m * v;
        }
    }
    let mut x = vec![Complex64::zero(); n];
    for i in (0..n).rev() {
        let s: Complex64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn newton(f: &ComplexHenon, n: usize, mut y: Vec<Complex64>, scale: f64) -> Option<NumPoint> {
    let factors = f.factors();
    let k = factors.len();
    let l = n * k;
    for _ in 0..NEWTON_ITERS {
        let mut jac = vec![vec![Complex64::zero(); l]; l];
        let mut res = vec![Complex64::zero(); l];
        for j in 0..l {
            let h = &factors[j % k];
            let (next, prev) = ((j + 1) % l, (j + l - 1) % l);
            let (p, dp) = h.poly_and_derivative(y[j]);
            res[j] = y[next] - p + h.delta * y[prev];
            jac[j][next] += 1.0;
            jac[j][j] -= dp;
            jac[j][prev] += h.delta;
        }
        let step = solve(jac, res)?;
        let norm = step.iter().map(|s| s.norm()).fold(0.0, f64::max);
        if !norm.is_finite() {
            return None;
        }
        // damp wild steps so the iteration stays near the bounded region
        let damp = if norm > scale { scale / norm } else { 1.0 };
        for (yi, si) in y.iter_mut().zip(&step) {
            *yi -= si * damp;
        }
        let size = y.iter().map(|v| v.norm()).fold(1.0, f64::max);
        if size > 1e6 * scale {
            return None;
        }
        if norm <= 1e-15 * size {
            break;
        }
    }
    Some(NumPoint::new(y[l - 1], y[0]))
}

fn closure(f: &ComplexHenon, z: &NumPoint, n: usize) -> f64 {
    f.iterate_point(z, n).map_or(f64::INFINITY, |w| w.dist(z))
}

/// Eigenvalue magnitudes of a 2×2 complex matrix, largest first.
pub fn eigen_magnitudes(m: &Mat2) -> [f64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr - det * 4.0).sqrt();
    let a = ((tr + disc) / 2.0).norm();
    let b = ((tr - disc) / 2.0).norm();
    if a >= b {
        [a, b]
    } else {
        [b, a]
    }
}

pub fn classify(mult: [f64; 2]) -> CycleClass {
    let (hi, lo) = (mult[0], mult[1]);
    if hi > 1.0 + SADDLE_MARGIN && lo < 1.0 - SADDLE_MARGIN {
        CycleClass::Saddle
    } else if hi < 1.0 - SADDLE_MARGIN {
        CycleClass::Attracting
    } else if lo > 1.0 + SADDLE_MARGIN {
        CycleClass::RepellingLike
    } else {
        CycleClass::Undetermined
    }
}

fn cycle_of(f: &ComplexHenon, z: NumPoint, period: usize) -> NumericCycle {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::zero();
    let mut d: Mat2 = [[one, zero], [zero, one]];
    let mut points = Vec::with_capacity(period);
    let mut s = z;
    for _ in 0..period {
        points.push(s);
        let (next, ds) = f.step_with_differential(&s);
        d = mat_mul(&ds, &d);
        s = next;
    }
    let m = (0..period).min_by(|&a, &b| points[a].lex_cmp(&points[b])).unwrap();
    points.rotate_left(m);
    let multipliers = eigen_magnitudes(&d);
    NumericCycle {
        points,
        period,
        multipliers,
        class: classify(multipliers),
    }
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Newton from `n_starts` seeded random starts; solutions verified by
/// `|f^n(z) - z| ≤ tol`, grouped into cycles of their minimal period, and
/// deduplicated at distance `10·tol`.
pub fn periodic_numeric(f: &ComplexHenon, n: usize, tol: f64, n_starts: usize, seed: u64) -> Result<NumericReport> {
    if n == 0 {
        return Err(Error::invalid("n", "period must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let l = n * f.factors().len();
    if l > 512 {
        return Err(Error::CapExceeded(format!("Newton system of size {l} exceeds 512")));
    }
    let radius = bounded_radius(f);
    let solutions: Vec<Option<NumPoint>> = (0..n_starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let start: Vec<Complex64> = (0..l)
                .map(|_| {
                    let r = radius * rng.gen::<f64>().sqrt();
                    Complex64::from_polar(r, rng.gen::<f64>() * std::f64::consts::TAU)
                })
                .collect();
            let z = newton(f, n, start, radius)?;
            (z.is_finite() && closure(f, &z, n) <= tol).then_some(z)
        })
        .collect();
    let dedup = 10.0 * tol;
    let mut cycles: Vec<NumericCycle> = Vec::new();
    for z in solutions.into_iter().flatten() {
        if cycles.iter().any(|c| c.points.iter().any(|p| p.dist(&z) <= dedup)) {
            continue;
        }
        let period = divisors(n).into_iter().find(|&d| closure(f, &z, d) <= tol).unwrap_or(n);
        cycles.push(cycle_of(f, z, period));
    }
    cycles.sort_by(|a, b| a.period.cmp(&b.period).then_with(|| a.points[0].lex_cmp(&b.points[0])));
    let found = cycles.iter().map(|c| c.period).sum();
    let expected = f.dynamical_degree().saturating_pow(n as u32);
    Ok(NumericReport {
        n,
        cycles,
        found,
        expected,
        coverage: found as f64 / expected as f64,
        seed,
        starts: n_starts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::HenonMap;
    use crate::rational::{int, rat};

    #[test]
    fn henon_fixed_points() {
        let f = HenonMap::quadratic(int(-1), rat(3, 10)).unwrap().to_complex();
        let r = periodic_numeric(&f, 1, 1e-10, 32, 7).unwrap();
        assert_eq!(r.found, 2);
        let mut ys: Vec<f64> = r.points().map(|p| p.y.re).collect();
        ys.sort_by(f64::total_cmp);
        // roots of y² - 1.3 y - 1 = 0
        let d = (1.69f64 + 4.0).sqrt();
        assert!((ys[0] - (1.3 - d) / 2.0).abs() < 1e-10);
        assert!((ys[1] - (1.3 + d) / 2.0).abs() < 1e-10);
        assert!((ys[1] - 1.8427).abs() < 1e-4 && (ys[0] + 0.5427).abs() < 1e-4);
    }

    #[test]
    fn counts_reach_lambda_power() {
        let f = HenonMap::quadratic(int(-1), rat(3, 10)).unwrap().to_complex();
        for n in 1..=4 {
            let r = periodic_numeric(&f, n, 1e-9, 400, 11).unwrap();
            assert_eq!(r.found as u64, 1 << n, "n={n}");
            assert_eq!(r.coverage, 1.0);
        }
    }

    #[test]
    fn attracting_cycles_respect_determinant() {
        let f = HenonMap::quadratic(rat(1, 2), rat(1, 2)).unwrap().to_complex();
        let r = periodic_numeric(&f, 3, 1e-10, 300, 3).unwrap();
        assert!(r.cycles.iter().any(|c| c.class == CycleClass::Attracting));
        for c in &r.cycles {
            let prod = c.multipliers[0] * c.multipliers[1];
            assert!((prod - 0.5f64.powi(c.period as i32)).abs() < 1e-8, "{c:?}");
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let f = HenonMap::quadratic(int(-1), rat(3, 10)).unwrap().to_complex();
        let a = periodic_numeric(&f, 3, 1e-10, 100, 5).unwrap();
        let b = periodic_numeric(&f, 3, 1e-10, 100, 5).unwrap();
        assert_eq!(a, b);
    }
}
