//! Numeric policy: working precision, the [`Real`] abstraction used by the
//! exact-sensitive kernels, a fixed-point extended type, and the symbolic
//! grammar for irrational inputs.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for comparing binary64 quantities against thresholds.
pub const TOL_CMP: f64 = 1e-12;

/// Name of the environment variable selecting the working precision.
pub const PRECISION_ENV: &str = "ORBITAPPROX_PRECISION";

/// Working precision for irrational inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Binary64,
    /// Fixed point with the given number of fractional bits.
    Extended { bits: u32 },
}

impl Default for Precision {
    fn default() -> Self {
        Precision::Binary64
    }
}

impl Precision {
    pub const DEFAULT_EXTENDED_BITS: u32 = 256;

    pub fn extended() -> Self {
        Precision::Extended {
            bits: Self::DEFAULT_EXTENDED_BITS,
        }
    }

    /// Values at or below this magnitude count as exact zeros.
    pub fn tol_zero(&self) -> f64 {
        match self {
            Precision::Binary64 => f64::tol_zero(),
            Precision::Extended { .. } => Fixed::tol_zero(),
        }
    }

    /// Reads [`PRECISION_ENV`]; unset means binary64.
    pub fn from_env() -> Result<Self> {
        match std::env::var(PRECISION_ENV) {
            Ok(s) => s.parse(),
            Err(_) => Ok(Precision::Binary64),
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    /// Accepts `binary64`, `extended` or `extended:<bits>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("binary64") {
            return Ok(Precision::Binary64);
        }
        if s.eq_ignore_ascii_case("extended") {
            return Ok(Precision::extended());
        }
        if let Some(bits) = s.strip_prefix("extended:") {
            let bits: u32 = bits
                .parse()
                .map_err(|_| Error::Parse(format!("bad bit width in precision '{s}'")))?;
            if !(64..=8192).contains(&bits) {
                return Err(Error::Parse(format!("bit width {bits} outside 64..=8192")));
            }
            return Ok(Precision::Extended { bits });
        }
        Err(Error::Parse(format!(
            "unknown precision '{s}' (expected binary64 | extended | extended:<bits>)"
        )))
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Binary64 => write!(f, "binary64"),
            Precision::Extended { bits } => write!(f, "extended:{bits}"),
        }
    }
}

/// Scalar type for kernels that only form integer combinations of the input
/// entries, take absolute values and compare.
pub trait Real: Clone + PartialEq + PartialOrd + fmt::Debug + Send + Sync + 'static {
    /// `sum_k coeffs[k] * values[k]`, accumulated in index order.
    fn dot_int(coeffs: &[i64], values: &[Self]) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Distance to the nearest integer.
    fn dist_to_int(&self) -> Self;
    /// The integer `v` at the same precision as `self`.
    fn int_like(&self, v: i64) -> Self;
    /// Magnitude below which a value is treated as an exact zero.
    fn tol_zero() -> f64;
}

impl Real for f64 {
    #[inline]
    fn dot_int(coeffs: &[i64], values: &[Self]) -> Self {
        let mut s = 0.0;
        for (c, v) in coeffs.iter().zip(values) {
            s += *c as f64 * v;
        }
        s
    }

    #[inline]
    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    #[inline]
    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }

    fn dist_to_int(&self) -> Self {
        (self - self.round()).abs()
    }

    fn int_like(&self, v: i64) -> Self {
        v as f64
    }

    fn tol_zero() -> f64 {
        1e-15
    }
}

/// Binary fixed-point real `mant / 2^bits`.
#[derive(Clone, PartialEq, Eq)]
pub struct Fixed {
    mant: BigInt,
    bits: u32,
}

impl Fixed {
    pub fn from_mantissa(mant: BigInt, bits: u32) -> Self {
        Fixed { mant, bits }
    }

    pub fn from_int(v: i64, bits: u32) -> Self {
        Fixed {
            mant: BigInt::from(v) << bits,
            bits,
        }
    }

    /// Nearest fixed-point value to `num / den`.
    pub fn from_ratio(num: &BigInt, den: &BigInt, bits: u32) -> Self {
        assert!(!den.is_zero());
        let scaled = num << (bits + 1);
        let q = scaled.div_floor(den);
        // round half up on the doubled quotient
        let mant = (q + BigInt::one()) >> 1;
        Fixed { mant, bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }
}

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed({:e}; {} bits)", self.to_f64(), self.bits)
    }
}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        debug_assert_eq!(self.bits, other.bits);
        Some(self.mant.cmp(&other.mant))
    }
}

impl Real for Fixed {
    fn dot_int(coeffs: &[i64], values: &[Self]) -> Self {
        let bits = values.first().map(|v| v.bits).unwrap_or(0);
        let mut s = BigInt::zero();
        for (c, v) in coeffs.iter().zip(values) {
            if *c != 0 {
                s += &v.mant * *c;
            }
        }
        Fixed { mant: s, bits }
    }

    fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.bits, other.bits);
        Fixed {
            mant: &self.mant - &other.mant,
            bits: self.bits,
        }
    }

    fn abs(&self) -> Self {
        Fixed {
            mant: self.mant.abs(),
            bits: self.bits,
        }
    }

    fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let len = self.mant.bits();
        let shift = len.saturating_sub(64);
        let top = (&self.mant >> shift).to_f64().unwrap_or(f64::NAN);
        let e = shift as i64 - self.bits as i64;
        scale_pow2(top, e)
    }

    fn dist_to_int(&self) -> Self {
        let one = BigInt::one() << self.bits;
        let r = self.mant.mod_floor(&one);
        let other = &one - &r;
        Fixed {
            mant: if r <= other { r } else { other },
            bits: self.bits,
        }
    }

    fn int_like(&self, v: i64) -> Self {
        Fixed::from_int(v, self.bits)
    }

    fn tol_zero() -> f64 {
        1e-300
    }
}

fn scale_pow2(v: f64, e: i64) -> f64 {
    // split the exponent so intermediate powers stay finite
    let mut out = v;
    let mut e = e;
    while e > 1000 {
        out *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        out *= 2f64.powi(-1000);
        e += 1000;
    }
    out * 2f64.powi(e as i32)
}

/// A real input given symbolically so it can be evaluated at any precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Symbolic {
    Sqrt(u64),
    Golden,
    Pi,
    E,
    Liouville { base: u64, kmax: u32 },
    /// Exact decimal literal, kept as text.
    Decimal(String),
    Ratio(i64, i64),
    Neg(Box<Symbolic>),
}

impl Symbolic {
    pub fn eval_f64(&self) -> f64 {
        match self {
            Symbolic::Sqrt(k) => (*k as f64).sqrt(),
            Symbolic::Golden => (1.0 + 5f64.sqrt()) / 2.0,
            Symbolic::Pi => std::f64::consts::PI,
            Symbolic::E => std::f64::consts::E,
            Symbolic::Liouville { base, kmax } => {
                let mut s = 0.0;
                let mut fact: u64 = 1;
                for k in 1..=*kmax as u64 {
                    fact = fact.saturating_mul(k);
                    let e = fact.min(i32::MAX as u64) as i32;
                    s += (*base as f64).powi(-e);
                }
                s
            }
            Symbolic::Decimal(s) => s.parse::<f64>().unwrap_or(f64::NAN),
            Symbolic::Ratio(p, q) => *p as f64 / *q as f64,
            Symbolic::Neg(inner) => -inner.eval_f64(),
        }
    }

    pub fn eval_fixed(&self, bits: u32) -> Fixed {
        const GUARD: u32 = 32;
        let wide = bits + GUARD;
        let narrow = |m: BigInt| -> Fixed {
            let half = BigInt::one() << (GUARD - 1);
            Fixed::from_mantissa((m + half) >> GUARD, bits)
        };
        match self {
            Symbolic::Sqrt(k) => {
                let m = (BigInt::from(*k) << (2 * wide)).sqrt();
                narrow(m)
            }
            Symbolic::Golden => {
                let root5 = (BigInt::from(5u8) << (2 * wide)).sqrt();
                narrow(((BigInt::one() << wide) + root5) >> 1)
            }
            Symbolic::Pi => {
                let a5 = arctan_inv(5, wide);
                let a239 = arctan_inv(239, wide);
                narrow(a5 * 16 - a239 * 4)
            }
            Symbolic::E => {
                let mut term = BigInt::one() << wide;
                let mut sum = term.clone();
                let mut k = 1u64;
                while !term.is_zero() {
                    term /= k;
                    sum += &term;
                    k += 1;
                }
                narrow(sum)
            }
            Symbolic::Liouville { base, kmax } => {
                let one = BigInt::one() << wide;
                let mut sum = BigInt::zero();
                let mut fact: u64 = 1;
                let log2b = (*base as f64).log2();
                for k in 1..=*kmax as u64 {
                    fact = fact.saturating_mul(k);
                    if fact as f64 * log2b > wide as f64 + 2.0 {
                        break;
                    }
                    let den = num_traits::pow(BigInt::from(*base), fact as usize);
                    sum += &one / den;
                }
                narrow(sum)
            }
            Symbolic::Decimal(s) => {
                let (num, den) = parse_decimal_exact(s).expect("validated at parse time");
                Fixed::from_ratio(&num, &den, bits)
            }
            Symbolic::Ratio(p, q) => Fixed::from_ratio(&BigInt::from(*p), &BigInt::from(*q), bits),
            Symbolic::Neg(inner) => {
                let v = inner.eval_fixed(bits);
                Fixed::from_mantissa(-v.mant, bits)
            }
        }
    }
}

/// arctan(1/k) scaled by 2^wide.
fn arctan_inv(k: u64, wide: u32) -> BigInt {
    let k2 = BigInt::from(k * k);
    let mut power = (BigInt::one() << wide) / k;
    let mut sum = power.clone();
    let mut i = 1u64;
    loop {
        power /= &k2;
        if power.is_zero() {
            break;
        }
        let term = &power / (2 * i + 1);
        if i % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        i += 1;
    }
    sum
}

fn parse_decimal_exact(s: &str) -> Option<(BigInt, BigInt)> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let mut den = BigInt::one();
    if scale >= 0 {
        num *= num_traits::pow(ten, scale as usize);
    } else {
        den = num_traits::pow(ten, (-scale) as usize);
    }
    if neg {
        num = -num;
    }
    Some((num, den))
}

impl FromStr for Symbolic {
    type Err = Error;

    /// Grammar: `sqrt(<int>)`, `golden`, `pi`, `e`, `liouville(<base>,<kmax>)`,
    /// `<int>/<int>`, `<decimal>`, each optionally prefixed by `-`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix('-') {
            let inner: Symbolic = rest.parse()?;
            return Ok(Symbolic::Neg(Box::new(inner)));
        }
        let lower = t.to_ascii_lowercase();
        let call_args = |name: &str| -> Option<Vec<String>> {
            let body = lower.strip_prefix(name)?.trim_start();
            let body = body.strip_prefix('(')?.strip_suffix(')')?;
            Some(body.split(',').map(|a| a.trim().to_string()).collect())
        };
        let bad = || Error::Parse(format!("cannot parse scalar '{t}'"));
        match lower.as_str() {
            "golden" | "phi" => return Ok(Symbolic::Golden),
            "pi" => return Ok(Symbolic::Pi),
            "e" => return Ok(Symbolic::E),
            _ => {}
        }
        if let Some(args) = call_args("sqrt") {
            if args.len() != 1 {
                return Err(bad());
            }
            let k: u64 = args[0].parse().map_err(|_| bad())?;
            return Ok(Symbolic::Sqrt(k));
        }
        if let Some(args) = call_args("liouville") {
            if args.len() != 2 {
                return Err(bad());
            }
            let base: u64 = args[0].parse().map_err(|_| bad())?;
            let kmax: u32 = args[1].parse().map_err(|_| bad())?;
            if base < 2 || kmax == 0 || kmax > 12 {
                return Err(Error::Parse(format!(
                    "liouville needs base >= 2 and 1 <= kmax <= 12, got ({base},{kmax})"
                )));
            }
            return Ok(Symbolic::Liouville { base, kmax });
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(Error::Parse("zero denominator".into()));
            }
            return Ok(Symbolic::Ratio(p, q));
        }
        if parse_decimal_exact(t).is_some() {
            return Ok(Symbolic::Decimal(t.to_string()));
        }
        Err(bad())
    }
}

/// Parses a comma-separated list of symbolic scalars.
pub fn parse_list(s: &str) -> Result<Vec<Symbolic>> {
    split_top_level(s).iter().map(|t| t.parse()).collect()
}

fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth -= 1;
                cur.push(c);
            }
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out.into_iter()
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Serde adapter writing non-finite floats as strings (`"inf"`, `"-inf"`,
/// `"nan"`) so that sentinels survive a JSON round trip.
pub mod serde_ext_f64 {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = f64;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "inf" | "+inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    _ => Err(E::custom(format!("unexpected float string '{v}'"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Same as [`serde_ext_f64`] for a pair.
pub mod serde_ext_pair {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "super::serde_ext_f64")] f64);

    pub fn serialize<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        [W(v.0), W(v.1)].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let [a, b] = <[W; 2]>::deserialize(d)?;
        Ok((a.0, b.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_grammar() {
        assert_eq!("sqrt(2)".parse::<Symbolic>().unwrap(), Symbolic::Sqrt(2));
        assert_eq!("golden".parse::<Symbolic>().unwrap(), Symbolic::Golden);
        assert_eq!(
            "liouville(10, 4)".parse::<Symbolic>().unwrap(),
            Symbolic::Liouville { base: 10, kmax: 4 }
        );
        assert_eq!("1/2".parse::<Symbolic>().unwrap(), Symbolic::Ratio(1, 2));
        assert!(matches!(
            "-sqrt(3)".parse::<Symbolic>().unwrap(),
            Symbolic::Neg(_)
        ));
        assert!("sqrt(x)".parse::<Symbolic>().is_err());
        assert!("1.2.3".parse::<Symbolic>().is_err());
        assert_eq!(parse_list("sqrt(2), 1").unwrap().len(), 2);
        assert_eq!(parse_list("liouville(10,4),1").unwrap().len(), 2);
    }

    #[test]
    fn f64_evaluation() {
        assert_eq!(Symbolic::Sqrt(2).eval_f64(), 2f64.sqrt());
        assert!((Symbolic::Golden.eval_f64() - 1.618033988749895).abs() < 1e-15);
        assert!((Symbolic::Liouville { base: 10, kmax: 3 }.eval_f64() - 0.110001).abs() < 1e-15);
        assert_eq!("0.125".parse::<Symbolic>().unwrap().eval_f64(), 0.125);
        assert_eq!("-1.5e-2".parse::<Symbolic>().unwrap().eval_f64(), -0.015);
    }

    #[test]
    fn fixed_evaluation_agrees_with_f64() {
        for s in ["sqrt(2)", "golden", "pi", "e", "liouville(10,4)", "0.3", "-7/3"] {
            let sym: Symbolic = s.parse().unwrap();
            let fx = sym.eval_fixed(200);
            assert!(
                (fx.to_f64() - sym.eval_f64()).abs() < 4e-16 * sym.eval_f64().abs().max(1.0),
                "{s}: {} vs {}",
                fx.to_f64(),
                sym.eval_f64()
            );
        }
    }

    #[test]
    fn fixed_keeps_deep_liouville_digits() {
        // 10^6 * L - 110001 = 10^-18 exactly up to the 10^-24 tail
        let l = Symbolic::Liouville { base: 10, kmax: 4 }.eval_fixed(256);
        let one = Fixed::from_int(1, 256);
        let v = Fixed::dot_int(&[1_000_000, -110_001], &[l, one]);
        assert!((v.to_f64() - 1e-18).abs() < 1e-30);
    }

    #[test]
    fn fixed_dist_to_int() {
        let x = Symbolic::Sqrt(2).eval_fixed(128);
        let five = Fixed::dot_int(&[5], &[x]);
        assert!((five.dist_to_int().to_f64() - (5.0 * 2f64.sqrt() - 7.0)).abs() < 1e-15);
        let half = "0.5".parse::<Symbolic>().unwrap().eval_fixed(64);
        let two = Fixed::dot_int(&[2], &[half]);
        assert!(two.dist_to_int().is_zero());
    }

    #[test]
    fn precision_parsing() {
        assert_eq!("binary64".parse::<Precision>().unwrap(), Precision::Binary64);
        assert_eq!("extended".parse::<Precision>().unwrap(), Precision::extended());
        assert_eq!(
            "extended:512".parse::<Precision>().unwrap(),
            Precision::Extended { bits: 512 }
        );
        assert!("quad".parse::<Precision>().is_err());
    }

    #[test]
    fn serde_infinity_round_trip() {
        #[derive(Serialize, Deserialize)]
        struct S {
            #[serde(with = "serde_ext_f64")]
            v: f64,
        }
        let js = serde_json::to_string(&S { v: f64::INFINITY }).unwrap();
        assert_eq!(js, r#"{"v":"inf"}"#);
        let back: S = serde_json::from_str(&js).unwrap();
        assert!(back.v.is_infinite());
        let back: S = serde_json::from_str(r#"{"v":1.5}"#).unwrap();
        assert_eq!(back.v, 1.5);
    }
}
