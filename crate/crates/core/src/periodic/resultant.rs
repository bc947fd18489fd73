//! Fixed points of `f^n` by eliminating `x` with a resultant.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{ExactPoint, HenonMap};
use crate::poly::{BiPoly, UniPoly};
use crate::rational::{int, Rational};

pub const MAX_RESULTANT_PERIOD: u32 = 3;
pub const DEFAULT_RESULTANT_DEGREE_CAP: u64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultantReport {
    pub n: u32,
    /// Degree of `Res_x(X - x, Y - y)`: fixed points of `f^n` with multiplicity.
    pub count: usize,
    pub expected: u64,
    pub rational_points: Vec<ExactPoint>,
}

/// Coefficients in x at a fixed y, padded to the formal degree.
fn coeffs_at(p: &BiPoly, deg: usize, y: &Rational) -> Vec<Rational> {
    let mut c = vec![Rational::zero(); deg + 1];
    for ((i, j), a) in p.terms() {
        c[*i as usize] += a * num_traits::pow(y.clone(), *j as usize);
    }
    c
}

fn determinant(mut a: Vec<Vec<Rational>>) -> Rational {
    let n = a.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let m = &a[row][col] / &p;
            for k in col..n {
                let v = &a[col][k] * &m;
                a[row][k] -= v;
            }
        }
    }
    det
}

/// Sylvester resultant of two coefficient vectors (ascending, formal degrees).
fn sylvester(p: &[Rational], q: &[Rational]) -> Rational {
    let (m, n) = (p.len() - 1, q.len() - 1);
    if m + n == 0 {
        return Rational::one();
    }
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut r = vec![Rational::zero(); size];
        for (k, c) in p.iter().rev().enumerate() {
            r[i + k] = c.clone();
        }
        rows.push(r);
    }
    for i in 0..m {
        let mut r = vec![Rational::zero(); size];
        for (k, c) in q.iter().rev().enumerate() {
            r[i + k] = c.clone();
        }
        rows.push(r);
    }
    determinant(rows)
}

/// Counts fixed points of `f^n` (n ≤ 3) with multiplicity as the degree of the
/// resultant in y, obtained by interpolation at `deg P · deg Q + 1` values, and
/// finds all rational fixed points from its rational roots.
pub fn fixed_points_exact_resultant(f: &HenonMap, n: u32, degree_cap: u64) -> Result<ResultantReport> {
    if n == 0 || n > MAX_RESULTANT_PERIOD {
        return Err(Error::invalid("n", format!("resultant counts need 1 <= n <= {MAX_RESULTANT_PERIOD}")));
    }
    let fnn = f.iterate(n)?;
    if fnn.dynamical_degree() > degree_cap {
        return Err(Error::CapExceeded(format!(
            "f^{n} has degree {} above the resultant cap {degree_cap}",
            fnn.dynamical_degree()
        )));
    }
    let (x_img, y_img) = fnn.expand(degree_cap)?;
    let p = x_img.add(&BiPoly::x().scale(&int(-1)));
    let q = y_img.add(&BiPoly::y().scale(&int(-1)));
    let (dp, dq) = (p.degree_in_x() as usize, q.degree_in_x() as usize);
    let bound = p.total_degree() as usize * q.total_degree() as usize;
    let samples: Vec<(Rational, Rational)> = (0..=bound as i64)
        .map(|k| {
            let y = int(k);
            let r = sylvester(&coeffs_at(&p, dp, &y), &coeffs_at(&q, dq, &y));
            (y, r)
        })
        .collect();
    let res = UniPoly::interpolate(&samples);
    if res.is_zero() {
        return Err(Error::CapExceeded("resultant vanishes identically: a curve of fixed points".into()));
    }
    let mut points = Vec::new();
    for y in res.rational_roots(1_000_000)? {
        let g = UniPoly::new(coeffs_at(&p, dp, &y)).gcd(&UniPoly::new(coeffs_at(&q, dq, &y)));
        if g.degree() == 0 {
            continue;
        }
        for x in g.rational_roots(1_000_000)? {
            let z = ExactPoint::new(x, y.clone());
            if fnn.eval_exact(&z) == z {
                points.push(z);
            }
        }
    }
    points.sort();
    points.dedup();
    Ok(ResultantReport {
        n,
        count: res.degree(),
        expected: fnn.dynamical_degree(),
        rational_points: points,
    })
}
