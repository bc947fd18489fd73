//! Exact rational helpers on top of `num_rational::BigRational`.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"n"`, `"n/d"` or a terminating decimal like `"-0.3"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::invalid("rational", format!("cannot parse `{s}` as a rational"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::invalid("rational", format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit()) || !ip.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = BigInt::from(10u32).pow(fp.len() as u32);
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Canonical text form, always `num/den`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// p-adic valuation; `None` for zero.
pub fn valuation(r: &Rational, p: u64) -> Option<i64> {
    if r.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    Some(int_valuation(r.numer(), &p) - int_valuation(r.denom(), &p))
}

fn int_valuation(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

pub fn is_p_integral(r: &Rational, p: u64) -> bool {
    !(r.denom() % BigInt::from(p)).is_zero()
}

/// Bit length of numerator plus denominator, used as an exact-arithmetic budget.
pub fn bit_size(r: &Rational) -> u64 {
    r.numer().bits() + r.denom().bits()
}

/// Prime divisors of |n| (n ≠ 0). Fails only if a factor does not fit in u64.
pub fn prime_divisors(n: &BigInt) -> Result<BTreeSet<u64>> {
    let mut out = BTreeSet::new();
    let m: BigUint = n.magnitude().clone();
    if m.is_zero() || m.is_one() {
        return Ok(out);
    }
    if let Some(small) = m.to_u64() {
        out.extend(num_prime::nt_funcs::factorize64(small).into_keys());
        return Ok(out);
    }
    let (found, rest) = num_prime::nt_funcs::factors(m, None);
    if rest.is_some() {
        return Err(Error::CapExceeded("integer factorisation did not complete".into()));
    }
    for p in found.into_keys() {
        let p = p
            .to_u64()
            .ok_or_else(|| Error::CapExceeded("prime factor exceeds 64 bits".into()))?;
        out.insert(p);
    }
    Ok(out)
}

/// Modular image of a rational, if the denominator is invertible mod `m`.
pub fn reduce_mod(r: &Rational, m: &BigInt) -> Option<BigInt> {
    let den = r.denom().mod_floor(m);
    let inv = mod_inverse(&den, m)?;
    Some((r.numer().mod_floor(m) * inv).mod_floor(m))
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Rational reconstruction: finds a/b ≡ u (mod m) with |a|, b ≤ sqrt(m/2).
pub fn rational_reconstruct(u: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let (a, b) = if t1.sign() == Sign::Minus {
        (-r1, -t1)
    } else {
        (r1, t1)
    };
    if !a.gcd(&b).is_one() {
        return None;
    }
    Some(Rational::new(a, b))
}

pub fn is_prime(p: u64) -> bool {
    num_prime::nt_funcs::is_prime64(p)
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod serde_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
