//! Generalized Hénon maps in composed-elementary normal form.
//!
//! A map is a composition `h_k ∘ ... ∘ h_1` of elementary factors
//! `h(x, y) = (y, p(y) - δ x)` with `deg p ≥ 2` and `δ ≠ 0`. Factors are stored in
//! application order, so `factors()[0]` acts first. In this form the extension to
//! the projective plane has indeterminacy points `[0:1:0]` (forward) and
//! `[1:0:0]` (backward), so every map built here is regular.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp::PrimeField;
use crate::poly::{BiPoly, UniPoly};
use crate::rational::{format_rational, parse_rational, to_f64, Rational};

/// Magnitude beyond which numeric evaluation reports escape to infinity.
pub const ESCAPE_SENTINEL: f64 = 1e300;

/// Hard ceiling on the total degree of symbolically expanded maps.
pub const MAX_EXPANDED_DEGREE: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    pub fn sign(self) -> i32 {
        match self {
            Direction::Plus => 1,
            Direction::Minus => -1,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Direction::Plus),
            "minus" | "-" => Ok(Direction::Minus),
            _ => Err(Error::invalid("direction", format!("expected plus or minus, got `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactPoint {
    #[serde(with = "crate::rational::serde_str")]
    pub x: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub y: Rational,
}

impl ExactPoint {
    pub fn new(x: Rational, y: Rational) -> Self {
        ExactPoint { x, y }
    }

    pub fn swapped(&self) -> ExactPoint {
        ExactPoint::new(self.y.clone(), self.x.clone())
    }

    pub fn to_numeric(&self) -> NumPoint {
        NumPoint::new(to_f64(&self.x).into(), to_f64(&self.y).into())
    }

    /// Parses `"x,y"` with rational coordinates.
    pub fn parse(s: &str) -> Result<ExactPoint> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::invalid("point", format!("expected `x,y`, got `{s}`")))?;
        Ok(ExactPoint::new(parse_rational(a)?, parse_rational(b)?))
    }
}

impl fmt::Display for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", format_rational(&self.x), format_rational(&self.y))
    }
}

impl PartialOrd for ExactPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.x.cmp(&other.x).then_with(|| self.y.cmp(&other.y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumPoint {
    pub x: Complex64,
    pub y: Complex64,
}

impl NumPoint {
    pub fn new(x: Complex64, y: Complex64) -> Self {
        NumPoint { x, y }
    }

    pub fn real(x: f64, y: f64) -> Self {
        NumPoint::new(x.into(), y.into())
    }

    /// Max norm `max(|x|, |y|)`.
    pub fn norm(&self) -> f64 {
        self.x.norm().max(self.y.norm())
    }

    pub fn swapped(&self) -> NumPoint {
        NumPoint::new(self.y, self.x)
    }

    pub fn dist(&self, other: &NumPoint) -> f64 {
        (self.x - other.x).norm().max((self.y - other.y).norm())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Total lexicographic order on (Re x, Im x, Re y, Im y).
    pub fn lex_cmp(&self, other: &NumPoint) -> Ordering {
        self.x
            .re
            .total_cmp(&other.x.re)
            .then(self.x.im.total_cmp(&other.x.im))
            .then(self.y.re.total_cmp(&other.y.re))
            .then(self.y.im.total_cmp(&other.y.im))
    }
}

/// A point of the plane: exact, numeric, or the escape sentinel.
#[derive(Clone, Debug, PartialEq)]
pub enum Point2 {
    Exact(ExactPoint),
    Numeric(NumPoint),
    /// Numeric evaluation left the representable range (|coordinate| > 1e300).
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementaryHenon {
    poly: UniPoly,
    delta: Rational,
}

impl ElementaryHenon {
    pub fn new(poly: UniPoly, delta: Rational) -> Result<Self> {
        if poly.degree() < 2 {
            return Err(Error::invalid(
                "poly",
                format!("elementary factor needs degree >= 2, got {}", poly.degree()),
            ));
        }
        if delta.is_zero() {
            return Err(Error::invalid("delta", "delta must be nonzero"));
        }
        Ok(ElementaryHenon { poly, delta })
    }

    pub fn poly(&self) -> &UniPoly {
        &self.poly
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn apply(&self, q: &ExactPoint) -> ExactPoint {
        // p(y) - δx over one common denominator, reduced once
        let (n, d) = self.poly.eval_unreduced(&q.y);
        let (dn, dd) = (self.delta.numer() * q.x.numer(), self.delta.denom() * q.x.denom());
        let y = Rational::new(n * &dd - dn * &d, d * dd);
        ExactPoint::new(q.y.clone(), y)
    }

    /// Inverse `(x, y) ↦ ((p(x) - y)/δ, x)`.
    pub fn apply_inverse(&self, q: &ExactPoint) -> ExactPoint {
        let x = (self.poly.eval(&q.x) - &q.y) / &self.delta;
        ExactPoint::new(x, q.x.clone())
    }

    /// The swap-conjugate of the inverse, `τ h⁻¹ τ = (y, p(y)/δ - x/δ)`, which is
    /// again elementary.
    pub fn swapped_inverse(&self) -> ElementaryHenon {
        let inv = Rational::one() / &self.delta;
        ElementaryHenon {
            poly: self.poly.scale(&inv),
            delta: inv,
        }
    }

    fn to_complex(&self) -> ComplexFactor {
        ComplexFactor {
            coeffs: self.poly.coeffs().iter().map(|c| to_f64(c).into()).collect(),
            delta: to_f64(&self.delta).into(),
        }
    }
}

impl fmt::Display for ElementaryHenon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.poly.to_string().replace('t', "y");
        write!(f, "(y, {p} - ({})*x)", self.delta)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HenonMap {
    factors: Vec<ElementaryHenon>,
    lambda: u64,
    jac: Rational,
}

impl HenonMap {
    pub fn new(factors: Vec<ElementaryHenon>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("factors", "a map needs at least one factor"));
        }
        let mut lambda: u64 = 1;
        for h in &factors {
            lambda = lambda
                .checked_mul(h.degree() as u64)
                .ok_or_else(|| Error::CapExceeded("dynamical degree overflows u64".into()))?;
        }
        let jac = factors
            .iter()
            .fold(Rational::one(), |acc, h| acc * h.delta());
        Ok(HenonMap { factors, lambda, jac })
    }

    pub fn elementary(poly: UniPoly, delta: Rational) -> Result<Self> {
        HenonMap::new(vec![ElementaryHenon::new(poly, delta)?])
    }

    /// `(x, y) ↦ (y, y² + c - δ x)`.
    pub fn quadratic(c: Rational, delta: Rational) -> Result<Self> {
        HenonMap::elementary(
            UniPoly::new(vec![c, Rational::zero(), Rational::one()]),
            delta,
        )
    }

    pub fn factors(&self) -> &[ElementaryHenon] {
        &self.factors
    }

    /// First dynamical degree, the product of the factor degrees.
    pub fn dynamical_degree(&self) -> u64 {
        self.lambda
    }

    /// Constant Jacobian determinant, the product of the deltas.
    pub fn jacobian(&self) -> &Rational {
        &self.jac
    }

    pub fn evaluate(&self, q: &Point2) -> Point2 {
        match q {
            Point2::Exact(p) => Point2::Exact(self.eval_exact(p)),
            Point2::Numeric(p) => match self.to_complex().step(p) {
                Some(r) => Point2::Numeric(r),
                None => Point2::Infinity,
            },
            Point2::Infinity => Point2::Infinity,
        }
    }

    pub fn eval_exact(&self, q: &ExactPoint) -> ExactPoint {
        self.factors
            .iter()
            .fold(q.clone(), |acc, h| h.apply(&acc))
    }

    pub fn eval_inverse_exact(&self, q: &ExactPoint) -> ExactPoint {
        self.factors
            .iter()
            .rev()
            .fold(q.clone(), |acc, h| h.apply_inverse(&acc))
    }

    pub fn inverse(&self) -> HenonInverse {
        let swapped = HenonMap {
            factors: self.factors.iter().rev().map(|h| h.swapped_inverse()).collect(),
            lambda: self.lambda,
            jac: Rational::one() / &self.jac,
        };
        HenonInverse {
            original: self.clone(),
            swapped,
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &HenonMap) -> Result<HenonMap> {
        let mut factors = inner.factors.clone();
        factors.extend(self.factors.iter().cloned());
        HenonMap::new(factors)
    }

    /// `self^n` for n ≥ 1, by repeating the factor list.
    pub fn iterate(&self, n: u32) -> Result<HenonMap> {
        if n == 0 {
            return Err(Error::invalid("n", "iterate exponent must be at least 1"));
        }
        let mut factors = Vec::with_capacity(self.factors.len() * n as usize);
        for _ in 0..n {
            factors.extend(self.factors.iter().cloned());
        }
        HenonMap::new(factors)
    }

    /// Normal-form map whose forward orbits realise `dir`, plus whether points
    /// must be swapped `(x, y) ↦ (y, x)` before and after. The backward
    /// direction uses `f⁻¹ = τ ∘ f' ∘ τ`.
    pub fn oriented(&self, dir: Direction) -> (HenonMap, bool) {
        match dir {
            Direction::Plus => (self.clone(), false),
            Direction::Minus => (self.inverse().swapped, true),
        }
    }

    pub fn to_complex(&self) -> ComplexHenon {
        ComplexHenon {
            factors: self.factors.iter().map(|h| h.to_complex()).collect(),
        }
    }

    /// Fully expanded coordinate polynomials `(X(x,y), Y(x,y))`.
    pub fn expand(&self, degree_cap: u64) -> Result<(BiPoly, BiPoly)> {
        if self.lambda > degree_cap.min(MAX_EXPANDED_DEGREE) {
            return Err(Error::CapExceeded(format!(
                "expansion of degree {} exceeds cap {}",
                self.lambda,
                degree_cap.min(MAX_EXPANDED_DEGREE)
            )));
        }
        let (mut x, mut y) = (BiPoly::x(), BiPoly::y());
        for h in &self.factors {
            let new_y = y.compose_univariate(h.poly()).add(&x.scale(&-h.delta().clone()));
            x = y;
            y = new_y;
        }
        Ok((x, y))
    }

    /// Evaluation over F_p; `None` if some coefficient does not reduce.
    fn eval_mod(&self, field: &PrimeField, q: (u64, u64)) -> Option<(u64, u64)> {
        let mut s = q;
        for h in &self.factors {
            let cs: Option<Vec<u64>> = h.poly().coeffs().iter().map(|c| field.reduce(c)).collect();
            let d = field.reduce(h.delta())?;
            let py = field.eval(&cs?, s.1);
            s = (s.1, field.sub(py, field.mul(d, s.0)));
        }
        Some(s)
    }
}

impl fmt::Display for HenonMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().rev().map(|h| h.to_string()).collect();
        write!(f, "{}", parts.join(" o "))
    }
}

/// Inverse of a normal-form map, held as `τ ∘ swapped ∘ τ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HenonInverse {
    original: HenonMap,
    swapped: HenonMap,
}

impl HenonInverse {
    /// The map being inverted.
    pub fn original(&self) -> &HenonMap {
        &self.original
    }

    /// The normal-form conjugate `τ f⁻¹ τ`.
    pub fn swapped(&self) -> &HenonMap {
        &self.swapped
    }

    pub fn eval_exact(&self, q: &ExactPoint) -> ExactPoint {
        self.swapped.eval_exact(&q.swapped()).swapped()
    }

    pub fn evaluate(&self, q: &Point2) -> Point2 {
        match q {
            Point2::Exact(p) => Point2::Exact(self.eval_exact(p)),
            Point2::Numeric(p) => match self.swapped.to_complex().step(&p.swapped()) {
                Some(r) => Point2::Numeric(r.swapped()),
                None => Point2::Infinity,
            },
            Point2::Infinity => Point2::Infinity,
        }
    }

    pub fn jacobian(&self) -> &Rational {
        self.swapped.jacobian()
    }

    pub fn dynamical_degree(&self) -> u64 {
        self.swapped.dynamical_degree()
    }

    pub fn oriented(&self, dir: Direction) -> (HenonMap, bool) {
        match dir {
            Direction::Plus => (self.swapped.clone(), true),
            Direction::Minus => (self.original.clone(), false),
        }
    }

    /// Expanded coordinates of the inverse itself.
    pub fn expand(&self, degree_cap: u64) -> Result<(BiPoly, BiPoly)> {
        let (sx, sy) = self.swapped.expand(degree_cap)?;
        Ok((swap_vars(&sy), swap_vars(&sx)))
    }
}

fn swap_vars(p: &BiPoly) -> BiPoly {
    p.terms()
        .iter()
        .fold(BiPoly::zero(), |acc, ((i, j), c)| {
            acc.add(&BiPoly::monomial(*j, *i, c.clone()))
        })
}

/// Either orientation of a normal-form map; used where plus/minus parts are needed.
pub trait Automorphism: Send + Sync {
    fn oriented(&self, dir: Direction) -> (HenonMap, bool);
}

impl Automorphism for HenonMap {
    fn oriented(&self, dir: Direction) -> (HenonMap, bool) {
        HenonMap::oriented(self, dir)
    }
}

impl Automorphism for HenonInverse {
    fn oriented(&self, dir: Direction) -> (HenonMap, bool) {
        HenonInverse::oriented(self, dir)
    }
}

/// True iff `f` and `g` are the same polynomial map of the plane.
pub fn equal_symbolic(f: &HenonMap, g: &HenonMap) -> Result<bool> {
    if f.dynamical_degree() != g.dynamical_degree() || f.jacobian() != g.jacobian() {
        return Ok(false);
    }
    if f.factors == g.factors {
        return Ok(true);
    }
    if differ_mod_prime(f, g) {
        return Ok(false);
    }
    let cap = 2 * f.dynamical_degree();
    Ok(f.expand(cap)? == g.expand(cap)?)
}

/// Cheap certificate of inequality: distinct values at a few points over F_p.
fn differ_mod_prime(f: &HenonMap, g: &HenonMap) -> bool {
    let field = PrimeField::new((1 << 61) - 1);
    let probes = [
        (3u64, 7u64),
        (0x1234_5678_9abc, 0x0fed_cba9_8765),
        (1 << 40, 17),
        (999_999_937, 2_147_483_647),
    ];
    probes.iter().any(|&q| match (f.eval_mod(&field, q), g.eval_mod(&field, q)) {
        (Some(a), Some(b)) => a != b,
        _ => false,
    })
}

/// Smallest `(N, M)` in lexicographic order with `f^N = g^M`, searching
/// `1 ≤ N ≤ n_max`, `1 ≤ M ≤ m_max`. `None` only means no hit within the bounds.
pub fn common_iterate_detect(
    f: &HenonMap,
    g: &HenonMap,
    n_max: u32,
    m_max: u32,
) -> Result<Option<(u32, u32)>> {
    if n_max == 0 || m_max == 0 {
        return Err(Error::invalid("bounds", "iterate bounds must be at least 1"));
    }
    let lf = f.dynamical_degree() as u128;
    let lg = g.dynamical_degree() as u128;
    let cap = (lf.saturating_pow(n_max)).saturating_mul(2).min(u64::MAX as u128) as u64;
    for n in 1..=n_max {
        let dn = lf.saturating_pow(n);
        for m in 1..=m_max {
            if lg.saturating_pow(m) != dn {
                continue;
            }
            let fnn = f.iterate(n)?;
            let gm = g.iterate(m)?;
            if fnn.jacobian() != gm.jacobian() || differ_mod_prime(&fnn, &gm) {
                continue;
            }
            if fnn.factors == gm.factors || fnn.expand(cap)? == gm.expand(cap)? {
                return Ok(Some((n, m)));
            }
        }
    }
    Ok(None)
}

/// Numeric elementary factor with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexFactor {
    pub coeffs: Vec<Complex64>,
    pub delta: Complex64,
}

impl ComplexFactor {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().expect("nonempty coefficients")
    }

    /// `(p(y), p'(y))` by Horner.
    pub fn poly_and_derivative(&self, y: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for c in self.coeffs.iter().rev() {
            dp = dp * y + p;
            p = p * y + c;
        }
        (p, dp)
    }

    pub fn apply(&self, q: &NumPoint) -> NumPoint {
        let (p, _) = self.poly_and_derivative(q.y);
        NumPoint::new(q.y, p - self.delta * q.x)
    }

    fn swapped_inverse(&self) -> ComplexFactor {
        let inv = Complex64::one() / self.delta;
        ComplexFactor {
            coeffs: self.coeffs.iter().map(|c| c * inv).collect(),
            delta: inv,
        }
    }
}

/// Floating-point image of a normal-form map, possibly with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexHenon {
    factors: Vec<ComplexFactor>,
}

pub type Mat2 = [[Complex64; 2]; 2];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[Complex64::zero(); 2]; 2];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

impl ComplexHenon {
    pub fn new(factors: Vec<ComplexFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("factors", "a map needs at least one factor"));
        }
        for h in &factors {
            if h.degree() < 2 || h.leading() == Complex64::zero() {
                return Err(Error::invalid("poly", "elementary factor needs degree >= 2"));
            }
            if h.delta == Complex64::zero() {
                return Err(Error::invalid("delta", "delta must be nonzero"));
            }
        }
        Ok(ComplexHenon { factors })
    }

    pub fn factors(&self) -> &[ComplexFactor] {
        &self.factors
    }

    pub fn dynamical_degree(&self) -> u64 {
        self.factors.iter().map(|h| h.degree() as u64).product()
    }

    pub fn jacobian(&self) -> Complex64 {
        self.factors.iter().map(|h| h.delta).product()
    }

    /// One full iterate; `None` once a coordinate exceeds the escape sentinel.
    pub fn step(&self, q: &NumPoint) -> Option<NumPoint> {
        let mut s = *q;
        for h in &self.factors {
            s = h.apply(&s);
            if !(s.norm() <= ESCAPE_SENTINEL) {
                return None;
            }
        }
        Some(s)
    }

    /// `f^n(q)`, or `None` on escape.
    pub fn iterate_point(&self, q: &NumPoint, n: usize) -> Option<NumPoint> {
        let mut s = *q;
        for _ in 0..n {
            s = self.step(&s)?;
        }
        Some(s)
    }

    /// Image and differential of one full iterate at `q`.
    pub fn step_with_differential(&self, q: &NumPoint) -> (NumPoint, Mat2) {
        let one = Complex64::one();
        let zero = Complex64::zero();
        let mut d: Mat2 = [[one, zero], [zero, one]];
        let mut s = *q;
        for h in &self.factors {
            let (p, dp) = h.poly_and_derivative(s.y);
            let local: Mat2 = [[zero, one], [-h.delta, dp]];
            d = mat_mul(&local, &d);
            s = NumPoint::new(s.y, p - h.delta * s.x);
        }
        (s, d)
    }

    pub fn swapped_inverse(&self) -> ComplexHenon {
        ComplexHenon {
            factors: self.factors.iter().rev().map(|h| h.swapped_inverse()).collect(),
        }
    }
}
