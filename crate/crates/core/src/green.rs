//! Archimedean Green functions `G±(q) = lim λ^{-n} log⁺‖f^{±n}(q)‖` with
//! rigorous error radii.
//!
//! Both directions run on a normal-form map: `G⁻_f(q) = G⁺_{f'}(τq)` where
//! `f' = τ f⁻¹ τ` and `τ` swaps coordinates (the max norm is `τ`-invariant).
//!
//! Escape region: `V = {|y| ≥ max(|x|, R)}`. For a factor with coefficients
//! `c_j` and `S = Σ_{j<d} |c_j| + |δ|`, every point of `V` satisfies
//! `|p(y) - δx| ≥ max(2|y|, |c_d||y|^d / 2)`, so `V` is forward invariant and
//! `log|y'| = d log|y| + log|c_d| + e` with `|e| ≤ min(log 2, 2S/(|c_d||y|))`.
//! Summing the geometric tail gives a closed form with an explicit error.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{ComplexHenon, Direction, HenonMap, NumPoint};

pub const DEFAULT_N_MAX: u32 = 2048;

/// Largest log-magnitude we let a coordinate reach before stopping refinement.
const LOG_CEILING: f64 = 600.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeData {
    pub radius: f64,
    /// Bounds `|λ^{-(n+1)} log‖f^{n+1}q‖ - λ^{-n} log‖f^n q‖| ≤ C λ^{-n}` inside the region.
    pub tail_constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenValue {
    pub value: f64,
    pub error: f64,
    pub escaped: bool,
    pub escape_iterate: Option<u32>,
}

impl GreenValue {
    pub fn zero_exact() -> Self {
        GreenValue {
            value: 0.0,
            error: 0.0,
            escaped: false,
            escape_iterate: None,
        }
    }

    fn add(&self, other: &GreenValue) -> GreenValue {
        GreenValue {
            value: self.value + other.value,
            error: self.error + other.error,
            escaped: self.escaped || other.escaped,
            escape_iterate: match (self.escape_iterate, other.escape_iterate) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        }
    }
}

#[derive(Clone, Debug)]
struct FactorBound {
    degree: f64,
    lead_abs: f64,
    /// `Σ_{j<d} |c_j| + |δ|`.
    s: f64,
    /// Product of the degrees of the later factors.
    weight: f64,
}

/// One orientation of a map prepared for Green evaluation.
#[derive(Clone, Debug)]
pub struct Oriented {
    map: ComplexHenon,
    swap: bool,
    lambda: f64,
    radius: f64,
    /// `K = Σ w_i log|c_{d,i}|`.
    k: f64,
    tail: f64,
    bounds: Vec<FactorBound>,
}

impl Oriented {
    pub fn new(map: ComplexHenon, swap: bool) -> Self {
        let factors = map.factors();
        let mut bounds = Vec::with_capacity(factors.len());
        let mut radius: f64 = 1.0;
        for (i, h) in factors.iter().enumerate() {
            let d = h.degree();
            let lead = h.leading().norm();
            // Slight inflation absorbs rounding in the coefficient sums.
            let s = (h.coeffs[..d].iter().map(|c| c.norm()).sum::<f64>() + h.delta.norm()) * (1.0 + 1e-12);
            let mut r: f64 = 1.0;
            while r < 2.0 * s / lead || lead * r.powi(d as i32 - 1) - s * r.powi(d as i32 - 2) - 2.0 < 0.0 {
                r *= 2.0;
            }
            radius = radius.max(r);
            let weight = factors[i + 1..].iter().map(|g| g.degree() as f64).product();
            bounds.push(FactorBound {
                degree: d as f64,
                lead_abs: lead,
                s,
                weight,
            });
        }
        let lambda = map.dynamical_degree() as f64;
        let k = bounds.iter().map(|b| b.weight * b.lead_abs.ln()).sum();
        let tail = bounds
            .iter()
            .map(|b| b.weight * (b.lead_abs.ln().abs() + std::f64::consts::LN_2))
            .sum();
        Oriented {
            map,
            swap,
            lambda,
            radius,
            k,
            tail,
            bounds,
        }
    }

    pub fn escape_data(&self) -> EscapeData {
        EscapeData {
            radius: self.radius,
            tail_constant: self.tail,
        }
    }

    pub fn map(&self) -> &ComplexHenon {
        &self.map
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn in_region(&self, q: &NumPoint) -> bool {
        let ay = q.y.norm();
        ay >= self.radius && ay >= q.x.norm()
    }

    /// Rigorous bound on `|Σ_i w_i e_i|` for one full iterate from `|y| = r`.
    fn step_error(&self, r: f64) -> f64 {
        let mut r = r;
        let mut total = 0.0;
        for b in &self.bounds {
            total += b.weight * (std::f64::consts::LN_2).min(2.0 * b.s / (b.lead_abs * r));
            r *= 2.0;
        }
        total
    }

    /// Whether one more full iterate from `log|y| = l` stays far from overflow.
    fn safe_to_step(&self, l: f64) -> bool {
        let mut l = l;
        for b in &self.bounds {
            l = b.degree * l + b.lead_abs.ln() + std::f64::consts::LN_2;
            if l > LOG_CEILING {
                return false;
            }
        }
        true
    }

    pub fn green(&self, q: &NumPoint, tol: f64, n_max: u32) -> GreenValue {
        self.green_normalized(if self.swap { q.swapped() } else { *q }, tol, n_max)
    }

    /// Like [`Oriented::green`] for a point already in normal-form coordinates.
    pub fn green_normalized(&self, start: NumPoint, tol: f64, n_max: u32) -> GreenValue {
        let mut s = start;
        if !s.is_finite() {
            return GreenValue {
                value: f64::INFINITY,
                error: 0.0,
                escaped: true,
                escape_iterate: Some(0),
            };
        }
        let mut scale = 1.0; // λ^{-n}
        let mut entered: Option<u32> = None;
        for n in 0..=n_max {
            if entered.is_none() && self.in_region(&s) {
                entered = Some(n);
            }
            if let Some(n0) = entered {
                let l = s.y.norm().ln();
                let err = scale * self.step_error(s.y.norm()) / (self.lambda - 1.0);
                if err <= tol || !self.safe_to_step(l) || n == n_max {
                    let value = scale * (l + self.k / (self.lambda - 1.0));
                    let rounding = (value.abs() + scale * l.abs()) * 64.0 * f64::EPSILON;
                    return GreenValue {
                        value: value.max(0.0),
                        error: err + rounding,
                        escaped: true,
                        escape_iterate: Some(n0),
                    };
                }
            }
            if n == n_max {
                break;
            }
            match self.map.step(&s) {
                Some(next) => s = next,
                None => {
                    // Left the representable range before the region test could
                    // certify anything: only a crude bracket is available.
                    let l = q_log(&s);
                    let value = scale * l;
                    return GreenValue {
                        value,
                        error: value + scale * self.tail / (self.lambda - 1.0),
                        escaped: true,
                        escape_iterate: Some(n),
                    };
                }
            }
            scale /= self.lambda;
        }
        let log_plus = q_log(&s).max(self.radius.ln());
        GreenValue {
            value: 0.0,
            error: scale * (log_plus + self.tail / (self.lambda - 1.0)),
            escaped: false,
            escape_iterate: None,
        }
    }
}

fn q_log(q: &NumPoint) -> f64 {
    q.norm().max(1.0).ln()
}

/// Escape radius and tail constant of the forward normal form of `f`.
pub fn escape_data(f: &HenonMap) -> EscapeData {
    Oriented::new(f.to_complex(), false).escape_data()
}

/// Caches both orientations of one map.
#[derive(Clone, Debug)]
pub struct GreenEvaluator {
    plus: Oriented,
    minus: Oriented,
    n_max: u32,
}

impl GreenEvaluator {
    pub fn new(f: &HenonMap) -> Self {
        let (g, swap) = f.oriented(Direction::Minus);
        GreenEvaluator {
            plus: Oriented::new(f.to_complex(), false),
            minus: Oriented::new(g.to_complex(), swap),
            n_max: DEFAULT_N_MAX,
        }
    }

    /// Evaluator for a map with complex coefficients (a fibre of a family at a
    /// complex parameter).
    pub fn from_complex(f: &ComplexHenon) -> Self {
        GreenEvaluator {
            plus: Oriented::new(f.clone(), false),
            minus: Oriented::new(f.swapped_inverse(), true),
            n_max: DEFAULT_N_MAX,
        }
    }

    pub fn with_n_max(mut self, n_max: u32) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn oriented(&self, dir: Direction) -> &Oriented {
        match dir {
            Direction::Plus => &self.plus,
            Direction::Minus => &self.minus,
        }
    }

    pub fn green(&self, dir: Direction, q: &NumPoint, tol: f64) -> Result<GreenValue> {
        check_tol(tol)?;
        Ok(self.oriented(dir).green(q, tol, self.n_max))
    }

    pub fn green_total(&self, q: &NumPoint, tol: f64) -> Result<GreenValue> {
        Ok(self.green(Direction::Plus, q, tol)?.add(&self.green(Direction::Minus, q, tol)?))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid("tol", "must be a positive finite number"));
    }
    Ok(())
}

pub fn green(f: &HenonMap, dir: Direction, q: &NumPoint, tol: f64) -> Result<GreenValue> {
    check_tol(tol)?;
    let (g, swap) = f.oriented(dir);
    Ok(Oriented::new(g.to_complex(), swap).green(q, tol, DEFAULT_N_MAX))
}

pub fn green_total(f: &HenonMap, q: &NumPoint, tol: f64) -> Result<GreenValue> {
    GreenEvaluator::new(f).green_total(q, tol)
}

/// Polynomial curve `t ↦ (x(t), y(t))`, coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyCurve {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

impl PolyCurve {
    pub fn vertical(x0: f64) -> Self {
        PolyCurve {
            x: vec![x0.into()],
            y: vec![0.0.into(), 1.0.into()],
        }
    }

    pub fn horizontal(y0: f64) -> Self {
        PolyCurve {
            x: vec![0.0.into(), 1.0.into()],
            y: vec![y0.into()],
        }
    }

    pub fn at(&self, t: Complex64) -> NumPoint {
        let ev = |c: &[Complex64]| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * t + a);
        NumPoint::new(ev(&self.x), ev(&self.y))
    }
}

pub const CIRCLE_POINTS: usize = 512;
pub const MASS_RADII: usize = 12;

/// Trapezoid average of `h` over the circle `|t - center| = r`.
pub fn circle_average<F: Fn(Complex64) -> f64 + Sync>(h: F, center: Complex64, r: f64, points: usize) -> f64 {
    let sum: f64 = (0..points)
        .into_par_iter()
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
            h(center + Complex64::from_polar(r, theta))
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    sum / points as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMass {
    /// Least-squares slope of the circle average against `log r`.
    pub mass: f64,
    pub radii: Vec<f64>,
    pub averages: Vec<f64>,
    /// `(max - min) / |mass|` over the slopes between consecutive radii.
    pub slope_spread: f64,
    /// Set when the spread exceeds 10%: growth is irregular, typically because
    /// the curve meets the line at infinity near the backward indeterminacy point.
    pub irregular: bool,
}

/// Laplacian mass of `G⁺` restricted to a curve, read off the growth of circle
/// averages between `r_lo` and `r_hi`.
pub fn curve_green_mass(f: &HenonMap, curve: &PolyCurve, r_lo: f64, r_hi: f64) -> Result<CurveMass> {
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return Err(Error::invalid("radii", "need 0 < r_lo < r_hi"));
    }
    let ev = GreenEvaluator::new(f);
    let tol = 1e-10;
    let radii: Vec<f64> = (0..MASS_RADII)
        .map(|k| (r_lo.ln() + (r_hi.ln() - r_lo.ln()) * k as f64 / (MASS_RADII - 1) as f64).exp())
        .collect();
    let averages: Vec<f64> = radii
        .iter()
        .map(|&r| {
            circle_average(
                |t| ev.plus.green(&curve.at(t), tol, ev.n_max).value,
                Complex64::new(0.0, 0.0),
                r,
                CIRCLE_POINTS,
            )
        })
        .collect();
    let logs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let mass = lsq_slope(&logs, &averages);
    let local: Vec<f64> = logs
        .windows(2)
        .zip(averages.windows(2))
        .map(|(l, a)| (a[1] - a[0]) / (l[1] - l[0]))
        .collect();
    let hi = local.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = local.iter().cloned().fold(f64::INFINITY, f64::min);
    let slope_spread = if mass.abs() > 0.0 { (hi - lo) / mass.abs() } else { f64::INFINITY };
    Ok(CurveMass {
        mass,
        radii,
        averages,
        slope_spread,
        irregular: slope_spread > 0.1,
    })
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub re: f64,
    pub im: f64,
    pub g_plus: f64,
    pub g_minus: f64,
    pub err: f64,
}

/// Evaluates `G±` at `(x0, re + i·im)` over a rectangular grid, row-major in `im`
/// then `re`.
pub fn green_grid(
    f: &HenonMap,
    x0: Complex64,
    re: (f64, f64),
    im: (f64, f64),
    resolution: usize,
    tol: f64,
) -> Result<Vec<GridRow>> {
    check_tol(tol)?;
    if resolution < 2 {
        return Err(Error::invalid("resolution", "must be at least 2"));
    }
    let ev = GreenEvaluator::new(f);
    let step = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (resolution - 1) as f64;
    Ok((0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let (j, i) = (k / resolution, k % resolution);
            let (a, b) = (step(re.0, re.1, i), step(im.0, im.1, j));
            let q = NumPoint::new(x0, Complex64::new(a, b));
            let gp = ev.plus.green(&q, tol, ev.n_max);
            let gm = ev.minus.green(&q, tol, ev.n_max);
            GridRow {
                re: a,
                im: b,
                g_plus: gp.value,
                g_minus: gm.value,
                err: gp.error + gm.error,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn dissipative() -> HenonMap {
        HenonMap::quadratic(rat(1, 2), rat(1, 2)).unwrap()
    }

    /// Independent estimate: plain iteration of `λ^{-n} log‖f^n q‖` in extended
    /// range via log-magnitudes once the orbit is large.
    fn brute_force(f: &HenonMap, q: NumPoint, n: usize) -> f64 {
        let c = f.to_complex();
        let mut s = q;
        let lambda = f.dynamical_degree() as f64;
        for k in 0..n {
            match c.step(&s) {
                Some(t) if t.norm() < 1e100 => s = t,
                _ => return s.norm().ln() / lambda.powi(k as i32),
            }
        }
        s.norm().max(1.0).ln() / lambda.powi(n as i32)
    }

    #[test]
    fn escape_radii() {
        // |y|² ≥ 2|y| already at |y| = 2 for the pure monomial; any nonzero
        // delta pushes the power-of-two radius to 4.
        let tiny = HenonMap::quadratic(int(0), rat(1, 1_000_000)).unwrap();
        assert_eq!(escape_data(&tiny).radius, 4.0);
        let unit = HenonMap::quadratic(int(0), int(1)).unwrap();
        assert_eq!(escape_data(&unit).radius, 4.0);
        let f = HenonMap::quadratic(int(-1), rat(1, 2)).unwrap();
        let e = escape_data(&f);
        assert!(e.radius <= 4.0);
        let c = f.to_complex();
        // Boundary sampling of the region: |y| = R, |x| ≤ R.
        for k in 0..1000 {
            let th = k as f64 * 0.0061;
            let y = Complex64::from_polar(e.radius, th * 7.0);
            let x = Complex64::from_polar(e.radius * (k % 10) as f64 / 10.0, th * 3.0);
            let img = c.step(&NumPoint::new(x, y)).unwrap();
            assert!(img.y.norm() >= (2.0 * y.norm()).max(y.norm().powi(2) / 2.0) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn tail_constant_bounds_orbit_increments() {
        let f = HenonMap::quadratic(int(-1), rat(1, 2)).unwrap();
        let e = escape_data(&f);
        let c = f.to_complex();
        let mut s = NumPoint::real(0.5, 5.0);
        let mut prev = s.norm().ln();
        for n in 0..8 {
            s = c.step(&s).unwrap();
            let cur = s.norm().ln();
            let incr = (cur / 2f64.powi(n + 1) - prev / 2f64.powi(n)).abs();
            assert!(incr <= e.tail_constant / 2f64.powi(n), "n={n}");
            prev = cur;
        }
    }

    #[test]
    fn bounded_fixed_point() {
        let g = green(&dissipative(), Direction::Plus, &NumPoint::real(1.0, 1.0), 1e-10).unwrap();
        assert_eq!(g.value, 0.0);
        assert!(!g.escaped);
        let t = green_total(&dissipative(), &NumPoint::real(1.0, 1.0), 1e-10).unwrap();
        assert_eq!(t.value, 0.0);
    }

    #[test]
    fn large_vertical_point() {
        let f = HenonMap::quadratic(int(-1), rat(1, 1_000_000)).unwrap();
        let q = NumPoint::real(0.0, 1e6);
        let g = green(&f, Direction::Plus, &q, 1e-10).unwrap();
        let oracle = brute_force(&f, q, 60);
        assert!((g.value - 13.815510557964274).abs() < 1e-6, "{g:?}");
        assert!((g.value - oracle).abs() < 1e-9, "{g:?} vs {oracle}");
        assert!(g.error <= 1e-10);
        let t = green_total(&f, &q, 1e-10).unwrap();
        assert!(t.value > 13.0 && t.value >= g.value);
    }

    #[test]
    fn functional_equation_instance() {
        let f = dissipative();
        let q = NumPoint::real(0.0, 3.0);
        let tol = 1e-9;
        let g0 = green(&f, Direction::Plus, &q, tol).unwrap();
        let fq = f.to_complex().step(&q).unwrap();
        let g1 = green(&f, Direction::Plus, &fq, tol).unwrap();
        assert!((g1.value - 2.0 * g0.value).abs() <= 3.0 * tol);
        let oracle = brute_force(&f, q, 40);
        assert!((g0.value - oracle).abs() < 1e-8);
    }

    #[test]
    fn inverse_direction_matches_inverse_map() {
        let f = dissipative();
        let inv = f.inverse();
        let ev_inv = GreenEvaluator::from_complex(&inv.swapped().to_complex());
        let tol = 1e-9;
        for q in [NumPoint::real(3.0, 0.0), NumPoint::real(-1.5, 0.25), NumPoint::real(0.2, 2.5)] {
            let a = green(&f, Direction::Minus, &q, tol).unwrap().value;
            // G⁺ of f⁻¹ at q equals G⁺ of its swapped normal form at τq.
            let b = ev_inv.green(Direction::Plus, &q.swapped(), tol).unwrap().value;
            assert!((a - b).abs() <= 2.0 * tol, "{a} {b}");
        }
    }

    #[test]
    fn square_has_same_green() {
        let f = dissipative();
        let f2 = f.iterate(2).unwrap();
        let tol = 1e-9;
        for q in [NumPoint::real(0.0, 3.0), NumPoint::real(2.0, -1.0), NumPoint::real(0.3, 0.1)] {
            for dir in [Direction::Plus, Direction::Minus] {
                let a = green(&f, dir, &q, tol).unwrap().value;
                let b = green(&f2, dir, &q, tol).unwrap().value;
                assert!((a - b).abs() <= 2.0 * tol, "{dir:?} {a} {b}");
            }
        }
    }

    #[test]
    fn refinement_is_monotone() {
        let f = dissipative();
        let q = NumPoint::real(0.1, 2.2);
        let coarse = green(&f, Direction::Plus, &q, 1e-3).unwrap();
        let fine = green(&f, Direction::Plus, &q, 1e-12).unwrap();
        assert!(fine.error <= coarse.error);
        assert!((fine.value - coarse.value).abs() <= coarse.error + fine.error);
    }

    #[test]
    fn non_finite_input_and_bad_tol() {
        let f = dissipative();
        let g = green(&f, Direction::Plus, &NumPoint::real(f64::INFINITY, 0.0), 1e-6).unwrap();
        assert!(g.value.is_infinite() && g.escaped);
        assert!(green(&f, Direction::Plus, &NumPoint::real(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn line_masses() {
        let f = dissipative();
        let v = curve_green_mass(&f, &PolyCurve::vertical(0.0), 1e3, 1e6).unwrap();
        assert!((v.mass - 1.0).abs() < 0.05, "{v:?}");
        let h = curve_green_mass(&f, &PolyCurve::horizontal(0.0), 1e3, 1e6).unwrap();
        assert!((h.mass - 0.5).abs() < 0.05, "{h:?}");
        assert!(!v.irregular && !h.irregular);
    }

    #[test]
    fn grid_rows_ordered() {
        let rows = green_grid(&dissipative(), Complex64::new(0.0, 0.0), (-1.0, 1.0), (-1.0, 1.0), 3, 1e-8).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!((rows[1].re, rows[1].im), (0.0, -1.0));
        assert!(rows.iter().all(|r| r.g_plus >= 0.0 && r.g_minus >= 0.0));
    }
}
