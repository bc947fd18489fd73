//! Saddle-cycle samples standing in for the equilibrium measure, support
//! checks, energy-distance comparisons and a mean-value harmonicity probe.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{circle_average, GreenEvaluator, PolyCurve};
use crate::map::{common_iterate_detect, ComplexHenon, HenonMap, NumPoint};
use crate::periodic::{periodic_numeric, CycleClass};

pub const MIN_SAMPLE: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSample {
    pub points: Vec<NumPoint>,
    pub weights: Vec<f64>,
    pub period: usize,
    pub seed: u64,
    /// Fewer than four saddle points were found.
    pub low_quality: bool,
}

impl MeasureSample {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_re,x_im,y_re,y_im,weight\n");
        for (p, w) in self.points.iter().zip(&self.weights) {
            out.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", p.x.re, p.x.im, p.y.re, p.y.im, w));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    /// Reads a point cloud written by [`MeasureSample::to_csv`]; period and seed
    /// are not stored in the file and come back as zero.
    pub fn read_csv<R: BufRead>(r: R) -> Result<MeasureSample> {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::invalid("csv", format!("line {}: expected five numbers", i + 1)))?;
            if vals.len() != 5 {
                return Err(Error::invalid("csv", format!("line {}: expected five columns", i + 1)));
            }
            points.push(NumPoint::new(Complex64::new(vals[0], vals[1]), Complex64::new(vals[2], vals[3])));
            weights.push(vals[4]);
        }
        let total: f64 = weights.iter().sum();
        if !points.is_empty() && (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("csv", format!("weights sum to {total}, not 1")));
        }
        Ok(MeasureSample {
            low_quality: points.len() < MIN_SAMPLE,
            points,
            weights,
            period: 0,
            seed: 0,
        })
    }
}

/// Uniform measure on the saddle points of period dividing `n` found by Newton.
pub fn measure_from_periodic(f: &ComplexHenon, n: usize, tol: f64, n_starts: usize, seed: u64) -> Result<MeasureSample> {
    let report = periodic_numeric(f, n, tol, n_starts, seed)?;
    let points: Vec<NumPoint> = report
        .cycles
        .iter()
        .filter(|c| c.class == CycleClass::Saddle)
        .flat_map(|c| c.points.iter().copied())
        .collect();
    let w = 1.0 / points.len().max(1) as f64;
    Ok(MeasureSample {
        weights: vec![w; points.len()],
        low_quality: points.len() < MIN_SAMPLE,
        points,
        period: n,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub max_green: f64,
    pub pass: bool,
    pub vacuous: bool,
}

/// Largest `G⁺ + G⁻` over the sample; passes iff at most `tol`.
pub fn support_check(ev: &GreenEvaluator, sample: &MeasureSample, tol: f64) -> Result<SupportReport> {
    if sample.is_empty() {
        return Ok(SupportReport {
            max_green: 0.0,
            pass: true,
            vacuous: true,
        });
    }
    let values = sample
        .points
        .par_iter()
        .map(|p| ev.green_total(p, tol / 10.0).map(|g| g.value))
        .collect::<Result<Vec<f64>>>()?;
    let max_green = values.into_iter().fold(0.0, f64::max);
    Ok(SupportReport {
        max_green,
        pass: max_green <= tol,
        vacuous: false,
    })
}

fn euclid(a: &NumPoint, b: &NumPoint) -> f64 {
    ((a.x - b.x).norm_sqr() + (a.y - b.y).norm_sqr()).sqrt()
}

// Terms are summed in sorted order so that swapping the arguments gives the
// bit-identical result.
fn mean_distance(a: &MeasureSample, b: &MeasureSample) -> f64 {
    let mut terms: Vec<f64> = a
        .points
        .iter()
        .zip(&a.weights)
        .flat_map(|(p, wp)| b.points.iter().zip(&b.weights).map(move |(q, wq)| wp * wq * euclid(p, q)))
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Energy distance `sqrt(2E|X-Y| - E|X-X'| - E|Y-Y'|)` between two weighted
/// clouds in `C² ≅ R⁴`.
pub fn measure_discrepancy(a: &MeasureSample, b: &MeasureSample) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("sample", "discrepancy needs two non-empty samples"));
    }
    let d2 = 2.0 * mean_distance(a, b) - (mean_distance(a, a) + mean_distance(b, b));
    Ok(d2.max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureComparison {
    pub discrepancy: f64,
    pub threshold: f64,
    /// The discrepancy was small enough to ask for a symbolic check.
    pub follow_up: bool,
    /// Set only when `f^N = g^M` was confirmed symbolically.
    pub shared_iterate: Option<(u32, u32)>,
}

/// Compares two samples; a discrepancy below `threshold` triggers the symbolic
/// common-iterate search, and only a symbolic hit reports a shared iterate.
pub fn compare_measures(
    f: &HenonMap,
    g: &HenonMap,
    sf: &MeasureSample,
    sg: &MeasureSample,
    threshold: f64,
    iterate_bound: u32,
) -> Result<MeasureComparison> {
    let discrepancy = measure_discrepancy(sf, sg)?;
    let follow_up = discrepancy <= threshold;
    let shared_iterate = if follow_up {
        common_iterate_detect(f, g, iterate_bound, iterate_bound)?
    } else {
        None
    };
    Ok(MeasureComparison {
        discrepancy,
        threshold,
        follow_up,
        shared_iterate,
    })
}

/// `max |avg_{∂D} h - h(center)|` over disks in the curve parameter.
pub fn mean_value_defect<H: Fn(Complex64) -> f64 + Sync>(h: H, disks: &[(Complex64, f64)], quad_points: usize) -> f64 {
    disks
        .iter()
        .map(|&(c, r)| (circle_average(&h, c, r, quad_points) - h(c)).abs())
        .fold(0.0, f64::max)
}

/// Mean-value defect of `G⁺ - α G⁻` pulled back along `curve`. Small defects
/// are evidence of harmonicity, not a certificate.
pub fn harmonicity_probe(
    ev: &GreenEvaluator,
    alpha: f64,
    curve: &PolyCurve,
    disks: &[(Complex64, f64)],
    quad_points: usize,
    tol: f64,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be positive"));
    }
    if quad_points < 8 {
        return Err(Error::invalid("quad_points", "need at least 8"));
    }
    let h = |t: Complex64| {
        let q = curve.at(t);
        let gp = ev.oriented(crate::map::Direction::Plus).green(&q, tol, crate::green::DEFAULT_N_MAX);
        let gm = ev.oriented(crate::map::Direction::Minus).green(&q, tol, crate::green::DEFAULT_N_MAX);
        gp.value - alpha * gm.value
    };
    Ok(mean_value_defect(h, disks, quad_points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn henon03() -> HenonMap {
        HenonMap::quadratic(int(-1), rat(3, 10)).unwrap()
    }

    #[test]
    fn sample_points_close_up_and_are_saddles() {
        let f = henon03().to_complex();
        let s = measure_from_periodic(&f, 4, 1e-10, 300, 1).unwrap();
        assert!(!s.low_quality);
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for p in &s.points {
            assert!(f.iterate_point(p, 4).unwrap().dist(p) <= 1e-10);
        }
        // the attracting fixed point y ≈ -0.5427 is filtered out
        assert!(s.points.iter().all(|p| (p.y.re + 0.5427).abs() > 1e-3 || p.y.im.abs() > 1e-3));
    }

    #[test]
    fn support_and_escaping_injection() {
        let f = henon03();
        let ev = GreenEvaluator::new(&f);
        let mut s = measure_from_periodic(&f.to_complex(), 5, 1e-10, 400, 2).unwrap();
        let r = support_check(&ev, &s, 1e-4).unwrap();
        assert!(r.pass, "{r:?}");
        s.points.push(NumPoint::real(0.0, 50.0));
        let r = support_check(&ev, &s, 1e-4).unwrap();
        assert!(!r.pass && r.max_green > 1.0);
        let empty = MeasureSample {
            points: vec![],
            weights: vec![],
            period: 1,
            seed: 0,
            low_quality: true,
        };
        assert!(support_check(&ev, &empty, 1e-4).unwrap().vacuous);
    }

    #[test]
    fn discrepancy_pseudometric() {
        let f = henon03().to_complex();
        let a = measure_from_periodic(&f, 3, 1e-10, 200, 1).unwrap();
        let b = measure_from_periodic(&f, 4, 1e-10, 200, 1).unwrap();
        let c = measure_from_periodic(&HenonMap::quadratic(rat(1, 2), rat(1, 2)).unwrap().to_complex(), 4, 1e-10, 200, 1)
            .unwrap();
        assert_eq!(measure_discrepancy(&a, &a).unwrap(), 0.0);
        let ab = measure_discrepancy(&a, &b).unwrap();
        assert_eq!(ab, measure_discrepancy(&b, &a).unwrap());
        let ac = measure_discrepancy(&a, &c).unwrap();
        let bc = measure_discrepancy(&b, &c).unwrap();
        assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let f = henon03().to_complex();
        let a = measure_from_periodic(&f, 3, 1e-10, 100, 9).unwrap();
        let b = MeasureSample::read_csv(a.to_csv().as_bytes()).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        assert!(measure_discrepancy(&a, &b).unwrap() < 1e-6);
    }

    #[test]
    fn harmonic_in_escape_region() {
        let f = henon03();
        let ev = GreenEvaluator::new(&f);
        let curve = PolyCurve::vertical(0.0);
        let disks = [(Complex64::new(1000.0, 0.0), 100.0), (Complex64::new(0.0, 2000.0), 300.0)];
        let d = harmonicity_probe(&ev, 1.0, &curve, &disks, 256, 1e-12).unwrap();
        assert!(d <= 1e-6, "{d}");
    }

    #[test]
    fn defect_is_homogeneous_and_shift_invariant() {
        let h = |t: Complex64| t.norm_sqr().ln_1p();
        let disks = [(Complex64::new(0.3, 0.1), 0.5)];
        let d1 = mean_value_defect(h, &disks, 128);
        let d2 = mean_value_defect(|t| 2.0 * h(t), &disks, 128);
        let d3 = mean_value_defect(|t| h(t) + 5.0, &disks, 128);
        assert!((d2 - 2.0 * d1).abs() < 1e-12);
        assert!((d3 - d1).abs() < 1e-12);
    }

    #[test]
    fn dissipative_map_is_not_harmonic_through_support() {
        let f0 = HenonMap::quadratic(int(0), rat(1, 2)).unwrap();
        let ev = GreenEvaluator::new(&f0);
        let s = measure_from_periodic(&f0.to_complex(), 3, 1e-10, 200, 4).unwrap();
        let z = s.points[0];
        let curve = PolyCurve {
            x: vec![z.x, Complex64::new(1.0, 0.0)],
            y: vec![z.y, Complex64::new(0.0, 0.7)],
        };
        let disks = [
            (Complex64::new(0.0, 0.0), 0.5),
            (Complex64::new(0.0, 0.0), 2.0),
            (Complex64::new(1.0, 0.5), 1.0),
        ];
        for k in 0..=20 {
            let alpha = 0.1 * 100f64.powf(k as f64 / 20.0);
            let d = harmonicity_probe(&ev, alpha, &curve, &disks, 128, 1e-10).unwrap();
            assert!(d > 1e-3, "alpha={alpha} defect={d}");
        }
    }
}
