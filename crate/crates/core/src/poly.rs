//! Dense univariate and sparse bivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{prime_divisors, to_f64, Rational};

/// Dense polynomial `c_0 + c_1 t + ... + c_d t^d`, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `t`.
    pub fn var() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        let (n, d) = self.eval_unreduced(t);
        Rational::new(n, d)
    }

    /// `p(t)` as an unreduced fraction `(num, den)` with `den > 0`, computed in
    /// integers so that only the caller pays for a gcd.
    pub fn eval_unreduced(&self, t: &Rational) -> (BigInt, BigInt) {
        let m = self.coeffs.iter().fold(BigInt::one(), |m, c| m.lcm(c.denom()));
        let (a, b) = (t.numer(), t.denom());
        let mut acc = BigInt::zero();
        let mut bpow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            let scaled = c.numer() * (&m / c.denom());
            acc = acc * a + scaled * &bpow;
            bpow *= b;
        }
        // acc = Σ C_j a^j b^(d-j) and bpow = b^(d+1)
        let den = if self.coeffs.is_empty() { m } else { m * (bpow / b) };
        (acc, den)
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * t + to_f64(c);
        }
        acc
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn scale(&self, s: &Rational) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.leading();
        if rem.len() < divisor.coeffs.len() {
            return (UniPoly::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = &rem[k + dd] / &lead;
            if !q.is_zero() {
                for (j, c) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &q * c;
                }
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.leading();
        self.scale(&(Rational::one() / l))
    }

    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Interpolates the unique polynomial of degree < n through n points.
    pub fn interpolate(points: &[(Rational, Rational)]) -> UniPoly {
        // Newton divided differences.
        let n = points.len();
        let xs: Vec<&Rational> = points.iter().map(|p| &p.0).collect();
        let mut dd: Vec<Rational> = points.iter().map(|p| p.1.clone()).collect();
        for level in 1..n {
            for i in (level..n).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / (xs[i] - xs[i - level]);
            }
        }
        let mut acc = UniPoly::zero();
        for i in (0..n).rev() {
            let lin = UniPoly::new(vec![-xs[i].clone(), Rational::one()]);
            acc = acc.mul(&lin).add(&UniPoly::constant(dd[i].clone()));
        }
        acc
    }

    /// All rational roots (without multiplicity), ascending. Candidates come from the
    /// rational root theorem; `max_candidates` bounds the enumeration.
    pub fn rational_roots(&self, max_candidates: usize) -> Result<Vec<Rational>> {
        if self.is_zero() {
            return Err(Error::invalid("polynomial", "the zero polynomial has every root"));
        }
        let mut roots = Vec::new();
        let mut p = self.clone();
        // strip the factor t^k
        let zeros = p.coeffs.iter().take_while(|c| c.is_zero()).count();
        if zeros > 0 {
            roots.push(Rational::zero());
            p = UniPoly::new(p.coeffs[zeros..].to_vec());
        }
        // square-free part keeps coefficients small
        let g = p.gcd(&p.derivative());
        if g.degree() > 0 {
            p = p.div_rem(&g).0;
        }
        while p.degree() >= 1 {
            let ints = p.integer_coeffs();
            let a0 = ints.first().unwrap().clone();
            let an = ints.last().unwrap().clone();
            let num_divs = divisors(&a0)?;
            let den_divs = divisors(&an)?;
            if num_divs.len().saturating_mul(den_divs.len()) > max_candidates {
                return Err(Error::CapExceeded(format!(
                    "rational root search needs {} x {} candidates",
                    num_divs.len(),
                    den_divs.len()
                )));
            }
            let bound = p.cauchy_bound();
            let mut found = None;
            'search: for b in &den_divs {
                for a in &num_divs {
                    for sign in [1i32, -1] {
                        let r = Rational::new(a * BigInt::from(sign), b.clone());
                        if r.abs() > bound {
                            continue;
                        }
                        if p.eval(&r).is_zero() {
                            found = Some(r);
                            break 'search;
                        }
                    }
                }
            }
            match found {
                Some(r) => {
                    p = p.div_rem(&UniPoly::new(vec![-r.clone(), Rational::one()])).0;
                    roots.push(r);
                }
                None => break,
            }
        }
        roots.sort();
        roots.dedup();
        Ok(roots)
    }

    /// Primitive integer coefficient vector proportional to `self`.
    pub fn integer_coeffs(&self) -> Vec<BigInt> {
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if content.is_zero() {
            return ints;
        }
        ints.into_iter().map(|c| c / &content).collect()
    }

    fn cauchy_bound(&self) -> Rational {
        let lead = self.leading().abs();
        let m = self
            .coeffs
            .iter()
            .take(self.degree())
            .map(|c| c.abs() / &lead)
            .max()
            .unwrap_or_else(Rational::zero);
        m + Rational::one()
    }
}

fn divisors(n: &BigInt) -> Result<Vec<BigInt>> {
    let primes = prime_divisors(n)?;
    let mut divs = vec![BigInt::one()];
    let mut rest = n.abs();
    for p in primes {
        let p = BigInt::from(p);
        let mut e = 0;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        let base = divs.clone();
        let mut pk = BigInt::one();
        for _ in 0..e {
            pk *= &p;
            divs.extend(base.iter().map(|d| d * &pk));
        }
    }
    divs.sort();
    Ok(divs)
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                1 if a.is_one() => write!(f, "t")?,
                1 => write!(f, "{a}*t")?,
                _ if a.is_one() => write!(f, "t^{i}")?,
                _ => write!(f, "{a}*t^{i}")?,
            }
        }
        Ok(())
    }
}

/// Sparse bivariate polynomial in x and y; keys are (deg_x, deg_y).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly::default()
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, Rational::one())
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        BiPoly { terms }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), Rational> {
        &self.terms
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn degree_in_x(&self) -> u32 {
        self.terms.keys().map(|(i, _)| *i).max().unwrap_or(0)
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            let e = terms.entry(*k).or_insert_with(Rational::zero);
            *e += c;
            if e.is_zero() {
                terms.remove(k);
            }
        }
        BiPoly { terms }
    }

    pub fn scale(&self, s: &Rational) -> BiPoly {
        if s.is_zero() {
            return BiPoly::zero();
        }
        BiPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        let mut terms: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for ((i1, j1), a) in &self.terms {
            for ((i2, j2), b) in &other.terms {
                *terms.entry((i1 + i2, j1 + j2)).or_insert_with(Rational::zero) += a * b;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        BiPoly { terms }
    }

    /// `q(self)` for a univariate `q`, by Horner's rule.
    pub fn compose_univariate(&self, q: &UniPoly) -> BiPoly {
        let mut acc = BiPoly::zero();
        for c in q.coeffs().iter().rev() {
            acc = acc.mul(self).add(&BiPoly::constant(c.clone()));
        }
        acc
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, ((i, j), c)| {
            acc + c * num_traits::pow(x.clone(), *i as usize) * num_traits::pow(y.clone(), *j as usize)
        })
    }

    /// Specialises y to a value, returning a univariate polynomial in x.
    pub fn at_y(&self, y: &Rational) -> UniPoly {
        let deg = self.degree_in_x() as usize;
        let mut coeffs = vec![Rational::zero(); deg + 1];
        for ((i, j), c) in &self.terms {
            coeffs[*i as usize] += c * num_traits::pow(y.clone(), *j as usize);
        }
        UniPoly::new(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn p(cs: &[i64]) -> UniPoly {
        UniPoly::new(cs.iter().map(|&c| int(c)).collect())
    }

    #[test]
    fn trims_and_degrees() {
        let q = UniPoly::new(vec![int(1), int(2), int(0), int(0)]);
        assert_eq!(q.degree(), 1);
        assert!(UniPoly::new(vec![int(0)]).is_zero());
    }

    #[test]
    fn division_and_gcd() {
        // (t-1)(t+2) = t^2 + t - 2 ; (t-1)(t-3) = t^2 - 4t + 3
        let a = p(&[-2, 1, 1]);
        let b = p(&[3, -4, 1]);
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
        let (q, r) = a.div_rem(&p(&[-1, 1]));
        assert_eq!(q, p(&[2, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn rational_roots_of_product() {
        // (2t - 3) t (t + 5)^2 (t^2 + 1)
        let f = p(&[-3, 2])
            .mul(&p(&[0, 1]))
            .mul(&p(&[5, 1]))
            .mul(&p(&[5, 1]))
            .mul(&p(&[1, 0, 1]));
        let roots = f.rational_roots(10_000).unwrap();
        assert_eq!(roots, vec![int(-5), int(0), rat(3, 2)]);
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let f = UniPoly::new(vec![rat(1, 2), int(-3), int(0), rat(7, 3)]);
        let pts: Vec<_> = (0..4).map(|i| (int(i), f.eval(&int(i)))).collect();
        assert_eq!(UniPoly::interpolate(&pts), f);
    }

    #[test]
    fn bivariate_compose() {
        // (x + y)^2 via compose with t^2
        let s = BiPoly::x().add(&BiPoly::y());
        let sq = s.compose_univariate(&p(&[0, 0, 1]));
        assert_eq!(sq.terms().len(), 3);
        assert_eq!(sq.terms()[&(1, 1)], int(2));
        assert_eq!(sq.eval(&int(2), &int(3)), int(25));
        assert_eq!(sq.at_y(&int(1)), p(&[1, 2, 1]));
    }
}
