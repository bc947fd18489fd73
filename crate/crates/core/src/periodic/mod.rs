//! Periodic points: exact (mod-p cycles, Hensel lifting, resultants) and
//! numeric (Newton), and common periodic points of pairs of maps.

mod hensel;
mod modp;
mod numeric;
mod resultant;

pub use hensel::{
    exact_cycle, exact_periodic_points, hensel_lift, ExactCycle, ExactPeriodicReport, LiftReport,
    DEFAULT_HEIGHT_BOUND, DEFAULT_PRIMES,
};
pub use modp::{periodic_modp, ModPCycle, ModPCycleSet, MAX_MODP_STATES};
pub use numeric::{
    bounded_radius, classify, eigen_magnitudes, periodic_numeric, CycleClass, NumericCycle, NumericReport,
};
pub use resultant::{fixed_points_exact_resultant, ResultantReport, DEFAULT_RESULTANT_DEGREE_CAP, MAX_RESULTANT_PERIOD};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::height::{pair_small_height, DEFAULT_TOL};
use crate::map::{common_iterate_detect, equal_symbolic, ExactPoint, HenonMap, NumPoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonOptions {
    pub max_period: usize,
    /// Matching tolerance for the numeric pipeline.
    pub tol: f64,
    pub primes: Vec<u64>,
    pub height_bound: u64,
    pub numeric: bool,
    pub n_starts: usize,
    pub seed: u64,
    /// Bound on N and M for the common-iterate search.
    pub iterate_bound: u32,
    /// Threshold for the small-height screening of exact common points.
    pub eps: f64,
}

impl Default for CommonOptions {
    fn default() -> Self {
        CommonOptions {
            max_period: 2,
            tol: 1e-8,
            primes: DEFAULT_PRIMES.to_vec(),
            height_bound: DEFAULT_HEIGHT_BOUND,
            numeric: true,
            n_starts: 64,
            seed: 0,
            iterate_bound: 4,
            eps: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    ModpHensel,
    Newton,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonPoint {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<ExactPoint>,
    pub numeric: NumPoint,
    pub period_f: usize,
    pub period_g: usize,
    pub methods: Vec<MethodTag>,
    /// `ĥ_f + ĥ_g` for exact points.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair_height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub small_height: Option<bool>,
}

impl CommonPoint {
    pub fn label(&self) -> String {
        match &self.exact {
            Some(q) => q.to_string(),
            None => format!(
                "{:.12}{:+.12}i,{:.12}{:+.12}i",
                self.numeric.x.re, self.numeric.x.im, self.numeric.y.re, self.numeric.y.im
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CommonResult {
    /// `f^n = g^m` symbolically: every periodic point is shared.
    SharedIterate { n: u32, m: u32 },
    Points { points: Vec<CommonPoint> },
}

fn numeric_points(f: &HenonMap, opts: &CommonOptions) -> Result<Vec<(NumPoint, usize)>> {
    let c = f.to_complex();
    let mut out: Vec<(NumPoint, usize)> = Vec::new();
    for n in 1..=opts.max_period {
        let r = periodic_numeric(&c, n, opts.tol, opts.n_starts, opts.seed)?;
        for cyc in &r.cycles {
            for p in &cyc.points {
                if !out.iter().any(|(q, _)| q.dist(p) <= 10.0 * opts.tol) {
                    out.push((*p, cyc.period));
                }
            }
        }
    }
    Ok(out)
}

/// Common periodic points of period at most `max_period`, or the shared-iterate
/// flag when `f^N = g^M` for some small `N, M`.
pub fn common_periodic(f: &HenonMap, g: &HenonMap, opts: &CommonOptions) -> Result<CommonResult> {
    if equal_symbolic(f, g)? {
        return Ok(CommonResult::SharedIterate { n: 1, m: 1 });
    }
    if let Some((n, m)) = common_iterate_detect(f, g, opts.iterate_bound, opts.iterate_bound)? {
        return Ok(CommonResult::SharedIterate { n, m });
    }
    let ef = exact_periodic_points(f, opts.max_period, &opts.primes, opts.height_bound)?;
    let eg = exact_periodic_points(g, opts.max_period, &opts.primes, opts.height_bound)?;
    let mut points: Vec<CommonPoint> = Vec::new();
    for cf in &ef.cycles {
        for q in &cf.points {
            if let Some(cg) = eg.cycles.iter().find(|c| c.points.contains(q)) {
                let ph = pair_small_height(f, g, q, opts.eps, DEFAULT_TOL)?;
                points.push(CommonPoint {
                    exact: Some(q.clone()),
                    numeric: q.to_numeric(),
                    period_f: cf.period,
                    period_g: cg.period,
                    methods: vec![MethodTag::ModpHensel],
                    pair_height: Some(ph.value),
                    small_height: Some(ph.member),
                });
            }
        }
    }
    if opts.numeric {
        let nf = numeric_points(f, opts)?;
        let ng = numeric_points(g, opts)?;
        let matched = 100.0 * opts.tol;
        for (p, pf) in &nf {
            let Some((_, pg)) = ng.iter().find(|(q, _)| q.dist(p) <= matched) else {
                continue;
            };
            if let Some(cp) = points.iter_mut().find(|c| c.numeric.dist(p) <= matched) {
                if !cp.methods.contains(&MethodTag::Newton) {
                    cp.methods.push(MethodTag::Newton);
                }
                continue;
            }
            points.push(CommonPoint {
                exact: None,
                numeric: *p,
                period_f: *pf,
                period_g: *pg,
                methods: vec![MethodTag::Newton],
                pair_height: None,
                small_height: None,
            });
        }
    }
    points.sort_by(|a, b| match (&a.exact, &b.exact) {
        (Some(x), Some(y)) => x.cmp(y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.numeric.lex_cmp(&b.numeric),
    });
    Ok(CommonResult::Points { points })
}
