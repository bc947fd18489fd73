//! One-parameter families over the affine line, their Jacobian map, and the
//! sweeps that count common periodic points fibre by fibre.

use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{ComplexFactor, ComplexHenon, ElementaryHenon, ExactPoint, HenonMap};
use crate::periodic::{common_periodic, CommonOptions, CommonResult};
use crate::poly::UniPoly;
use crate::rational::{format_rational, Rational};

/// Elementary factor whose coefficients and delta are polynomials in `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyFactor {
    coeffs: Vec<UniPoly>,
    delta: UniPoly,
}

impl FamilyFactor {
    pub fn new(coeffs: Vec<UniPoly>, delta: UniPoly) -> Self {
        FamilyFactor { coeffs, delta }
    }

    pub fn coeffs(&self) -> &[UniPoly] {
        &self.coeffs
    }

    pub fn delta(&self) -> &UniPoly {
        &self.delta
    }

    fn declared_degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HenonFamily {
    factors: Vec<FamilyFactor>,
    excluded: Vec<Rational>,
}

impl HenonFamily {
    pub fn new(factors: Vec<FamilyFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("factors", "a family needs at least one factor"));
        }
        let mut excluded = Vec::new();
        for (i, h) in factors.iter().enumerate() {
            if h.coeffs.len() < 3 {
                return Err(Error::invalid(
                    format!("factors[{i}].poly"),
                    "elementary factors need d >= 2",
                ));
            }
            let lead = h.coeffs.last().unwrap();
            if lead.is_zero() || h.delta.is_zero() {
                return Err(Error::invalid(
                    format!("factors[{i}]"),
                    "leading coefficient and delta must not vanish identically",
                ));
            }
            for p in [lead, &h.delta] {
                if p.degree() > 0 {
                    excluded.extend(p.rational_roots(100_000)?);
                }
            }
        }
        excluded.sort();
        excluded.dedup();
        Ok(HenonFamily { factors, excluded })
    }

    pub fn factors(&self) -> &[FamilyFactor] {
        &self.factors
    }

    /// Rational parameters where some delta or leading coefficient vanishes.
    pub fn excluded_params(&self) -> &[Rational] {
        &self.excluded
    }

    pub fn specialize(&self, b: &Rational) -> Result<HenonMap> {
        let mut out = Vec::with_capacity(self.factors.len());
        for (i, h) in self.factors.iter().enumerate() {
            let delta = h.delta.eval(b);
            if delta.is_zero() {
                return Err(excluded(b, format!("delta of factor {i} ({}) vanishes", h.delta)));
            }
            let coeffs: Vec<Rational> = h.coeffs.iter().map(|c| c.eval(b)).collect();
            if coeffs.last().unwrap().is_zero() {
                return Err(excluded(
                    b,
                    format!("leading coefficient of factor {i} ({}) vanishes", h.coeffs.last().unwrap()),
                ));
            }
            out.push(ElementaryHenon::new(UniPoly::new(coeffs), delta)?);
        }
        HenonMap::new(out)
    }

    pub fn specialize_complex(&self, b: Complex64) -> Result<ComplexHenon> {
        let mut out = Vec::with_capacity(self.factors.len());
        for (i, h) in self.factors.iter().enumerate() {
            let delta = h.delta.eval_complex(b);
            let coeffs: Vec<Complex64> = h.coeffs.iter().map(|c| c.eval_complex(b)).collect();
            if delta == Complex64::zero() || *coeffs.last().unwrap() == Complex64::zero() {
                return Err(Error::ExcludedParameter {
                    param: format!("{b}"),
                    reason: format!("factor {i} degenerates"),
                });
            }
            out.push(ComplexFactor { coeffs, delta });
        }
        ComplexHenon::new(out)
    }

    /// `t ↦ Jac(f_t)`, the product of the deltas.
    pub fn jacobian_map(&self) -> UniPoly {
        self.factors
            .iter()
            .fold(UniPoly::constant(Rational::one()), |acc, h| acc.mul(&h.delta))
    }

    pub fn declared_dynamical_degree(&self) -> u64 {
        self.factors.iter().map(|h| h.declared_degree() as u64).product()
    }
}

fn excluded(b: &Rational, reason: String) -> Error {
    Error::ExcludedParameter {
        param: format_rational(b),
        reason,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianVerdict {
    Dissipative,
    Conservative,
    Expanding,
    /// The Jacobian vanishes: the parameter is excluded.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleVerdict {
    pub param: Complex64,
    pub abs_jacobian: f64,
    pub verdict: JacobianVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipativityReport {
    pub samples: Vec<SampleVerdict>,
    /// True iff every sample is dissipative. A sampling statement, not a proof.
    pub dissipative_on_samples: bool,
}

const CONSERVATIVE_TOL: f64 = 1e-12;

pub fn classify_dissipative(fam: &HenonFamily, samples: &[Complex64]) -> DissipativityReport {
    let jac = fam.jacobian_map();
    let samples: Vec<SampleVerdict> = samples
        .iter()
        .map(|&b| {
            let a = jac.eval_complex(b).norm();
            let verdict = if a == 0.0 {
                JacobianVerdict::Degenerate
            } else if (a - 1.0).abs() <= CONSERVATIVE_TOL {
                JacobianVerdict::Conservative
            } else if a < 1.0 {
                JacobianVerdict::Dissipative
            } else {
                JacobianVerdict::Expanding
            };
            SampleVerdict {
                param: b,
                abs_jacobian: a,
                verdict,
            }
        })
        .collect();
    let dissipative_on_samples = samples
        .iter()
        .all(|s| s.verdict == JacobianVerdict::Dissipative);
    DissipativityReport {
        samples,
        dissipative_on_samples,
    }
}

/// Rectangle `[re_lo, re_hi] × [im_lo, im_hi]` of the parameter plane, split
/// into `resolution × resolution` cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub resolution: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocusCluster {
    pub center: Complex64,
    pub cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitLocusReport {
    pub resolutions: [usize; 3],
    pub flagged_counts: [usize; 3],
    /// Connected flagged regions at the finest resolution.
    pub clusters: Vec<LocusCluster>,
    pub empty: bool,
    pub likely_discrete: bool,
}

/// Approximates `{|Jac F| = 1} ∩ {|Jac G| = 1}` by marking grid cells on whose
/// corners both `|Jac| - 1` change sign, at `r`, `2r` and `4r`. More than
/// doubling of the flagged count from `r` to `4r` is read as a curve rather than
/// a discrete set.
pub fn unit_locus_grid(f: &HenonFamily, g: &HenonFamily, grid: &ParamGrid) -> Result<UnitLocusReport> {
    if grid.resolution < 16 {
        return Err(Error::invalid("resolution", "must be at least 16"));
    }
    if !(grid.re.0 < grid.re.1 && grid.im.0 < grid.im.1) {
        return Err(Error::invalid("grid", "box must have positive extent"));
    }
    let jf = f.jacobian_map();
    let jg = g.jacobian_map();
    let resolutions = [grid.resolution, 2 * grid.resolution, 4 * grid.resolution];
    let mut flagged_counts = [0; 3];
    let mut finest = Vec::new();
    for (k, &res) in resolutions.iter().enumerate() {
        let cells = flag_cells(&jf, &jg, grid, res);
        flagged_counts[k] = cells.len();
        if k == 2 {
            finest = cells;
        }
    }
    let clusters = cluster_cells(&finest, grid, resolutions[2]);
    let likely_discrete = flagged_counts[2] <= 2 * flagged_counts[0].max(4);
    Ok(UnitLocusReport {
        resolutions,
        flagged_counts,
        clusters,
        empty: flagged_counts.iter().all(|&c| c == 0),
        likely_discrete,
    })
}

fn flag_cells(jf: &UniPoly, jg: &UniPoly, grid: &ParamGrid, res: usize) -> Vec<(usize, usize)> {
    let node = |i: usize, j: usize| {
        Complex64::new(
            grid.re.0 + (grid.re.1 - grid.re.0) * i as f64 / res as f64,
            grid.im.0 + (grid.im.1 - grid.im.0) * j as f64 / res as f64,
        )
    };
    let values: Vec<Vec<(f64, f64)>> = (0..=res)
        .into_par_iter()
        .map(|i| {
            (0..=res)
                .map(|j| {
                    let t = node(i, j);
                    (jf.eval_complex(t).norm() - 1.0, jg.eval_complex(t).norm() - 1.0)
                })
                .collect()
        })
        .collect();
    let crosses = |vals: [f64; 4]| {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        lo <= 0.0 && hi >= 0.0
    };
    let mut out = Vec::new();
    for i in 0..res {
        for j in 0..res {
            let c = [values[i][j], values[i + 1][j], values[i][j + 1], values[i + 1][j + 1]];
            if crosses(c.map(|v| v.0)) && crosses(c.map(|v| v.1)) {
                out.push((i, j));
            }
        }
    }
    out
}

fn cluster_cells(cells: &[(usize, usize)], grid: &ParamGrid, res: usize) -> Vec<LocusCluster> {
    let index: BTreeMap<(usize, usize), usize> = cells.iter().enumerate().map(|(k, c)| (*c, k)).collect();
    let mut seen = vec![false; cells.len()];
    let mut clusters = Vec::new();
    let w = (grid.re.1 - grid.re.0) / res as f64;
    let h = (grid.im.1 - grid.im.0) / res as f64;
    for start in 0..cells.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut sum = Complex64::zero();
        let mut n = 0;
        while let Some(k) = queue.pop_front() {
            let (i, j) = cells[k];
            sum += Complex64::new(grid.re.0 + (i as f64 + 0.5) * w, grid.im.0 + (j as f64 + 0.5) * h);
            n += 1;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 {
                        continue;
                    }
                    if let Some(&m) = index.get(&(ni as usize, nj as usize)) {
                        if !seen[m] {
                            seen[m] = true;
                            queue.push_back(m);
                        }
                    }
                }
            }
        }
        clusters.push(LocusCluster {
            center: sum / n as f64,
            cells: n,
        });
    }
    clusters
}

/// Parses `"a:b:step"` into the rational parameters `a, a+step, ..., ≤ b`.
pub fn parse_param_range(s: &str) -> Result<Vec<Rational>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::invalid("params", format!("expected `a:b:step`, got `{s}`")));
    }
    let a = crate::rational::parse_rational(parts[0])?;
    let b = crate::rational::parse_rational(parts[1])?;
    let step = crate::rational::parse_rational(parts[2])?;
    if step <= Rational::zero() {
        return Err(Error::invalid("params", "step must be positive"));
    }
    let mut out = Vec::new();
    let mut t = a;
    while t <= b {
        out.push(t.clone());
        t += &step;
        if out.len() > 1_000_000 {
            return Err(Error::CapExceeded("parameter range has more than 10^6 entries".into()));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamStatus {
    Ok,
    SharedIterate,
    Excluded,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamOutcome {
    pub param: String,
    pub status: ParamStatus,
    pub count: usize,
    pub shared_iterate: Option<(u32, u32)>,
    pub points: Vec<String>,
    pub max_pair_height: Option<f64>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub params: Vec<String>,
    pub outcomes: Vec<ParamOutcome>,
    /// Largest common-point count over parameters that are neither flagged nor
    /// failed. An empirical lower bound for the uniform constant, not a certificate.
    pub d_observed: usize,
    pub exceptional: Vec<String>,
    pub seed: u64,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("b,count,flag,max_pair_height\n");
        for o in &self.outcomes {
            let flag = match o.status {
                ParamStatus::Ok => "none",
                ParamStatus::SharedIterate => "shared_iterate",
                ParamStatus::Excluded => "excluded",
                ParamStatus::Failed => "failed",
            };
            let h = o.max_pair_height.map(|h| format!("{h:e}")).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", o.param, o.count, flag, h));
        }
        out
    }
}

/// Counts common periodic points of `f_b` and `g_b` for each parameter.
/// Per-parameter failures are recorded and never abort the sweep; the report
/// is ordered by parameter value regardless of completion order.
pub fn sweep_common_periodic(
    f: &HenonFamily,
    g: &HenonFamily,
    params: &[Rational],
    opts: &CommonOptions,
) -> SweepReport {
    let mut sorted: Vec<Rational> = params.to_vec();
    sorted.sort();
    sorted.dedup();
    let outcomes: Vec<ParamOutcome> = sorted
        .par_iter()
        .map(|b| sweep_one(f, g, b, opts))
        .collect();
    let d_observed = outcomes
        .iter()
        .filter(|o| o.status == ParamStatus::Ok)
        .map(|o| o.count)
        .max()
        .unwrap_or(0);
    let exceptional = outcomes
        .iter()
        .filter(|o| o.status == ParamStatus::SharedIterate)
        .map(|o| o.param.clone())
        .collect();
    SweepReport {
        params: sorted.iter().map(format_rational).collect(),
        outcomes,
        d_observed,
        exceptional,
        seed: opts.seed,
    }
}

fn sweep_one(f: &HenonFamily, g: &HenonFamily, b: &Rational, opts: &CommonOptions) -> ParamOutcome {
    let mut out = ParamOutcome {
        param: format_rational(b),
        status: ParamStatus::Ok,
        count: 0,
        shared_iterate: None,
        points: Vec::new(),
        max_pair_height: None,
        message: None,
    };
    let maps = f.specialize(b).and_then(|fb| Ok((fb, g.specialize(b)?)));
    let (fb, gb) = match maps {
        Ok(m) => m,
        Err(e) => {
            out.status = match e {
                Error::ExcludedParameter { .. } => ParamStatus::Excluded,
                _ => ParamStatus::Failed,
            };
            out.message = Some(e.to_string());
            return out;
        }
    };
    match common_periodic(&fb, &gb, opts) {
        Ok(CommonResult::SharedIterate { n, m }) => {
            out.status = ParamStatus::SharedIterate;
            out.shared_iterate = Some((n, m));
        }
        Ok(CommonResult::Points { points }) => {
            out.count = points.len();
            out.points = points.iter().map(|p| p.label()).collect();
            out.max_pair_height = points
                .iter()
                .filter_map(|p| p.pair_height)
                .fold(None, |acc: Option<f64>, h| Some(acc.map_or(h, |a| a.max(h))));
        }
        Err(e) => {
            out.status = ParamStatus::Failed;
            out.message = Some(e.to_string());
        }
    }
    out
}

/// Exact images of a point under the fibre map, for consistency checks.
pub fn specialize_and_eval(f: &HenonFamily, b: &Rational, q: &ExactPoint) -> Result<ExactPoint> {
    Ok(f.specialize(b)?.eval_exact(q))
}
