//! Closed-form bound evaluators, computed exactly with big integers and
//! rationals.
//!
//! Real-valued factors are carried as exact rationals and only the final
//! product is rounded, upwards, so every returned value is a valid upper
//! bound.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};

/// Values whose binary length would exceed this are reported by their
/// base-2 logarithm instead of being materialised.
pub const MAX_EXACT_BITS: f64 = 4_194_304.0;

/// Parses `"0.1"`, `"3"`, `"-2.5e-3"` or `"7/20"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || crate::Error::InvalidArgument(format!("not a number: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let num = a.trim().parse::<num_bigint::BigInt>().map_err(|_| bad())?;
        let den = b.trim().parse::<num_bigint::BigInt>().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let num: num_bigint::BigInt = if all.is_empty() { 0.into() } else { all.parse().map_err(|_| bad())? };
    let scale = exp - frac_part.len() as i64;
    let ten = num_bigint::BigInt::from(10u32);
    let mut q = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

/// The rational whose decimal expansion is the shortest round-trip
/// representation of `x`, so `0.1` becomes exactly `1/10`.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return invalid(format!("expected a finite number, got {x}"));
    }
    parse_rational(&format!("{x:e}"))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn ceil_nonneg(q: &BigRational) -> BigUint {
    let (quot, rem) = q.numer().div_rem(q.denom());
    let mut c = quot;
    if !rem.is_zero() {
        c += 1;
    }
    c.to_biguint().unwrap_or_default()
}

fn ceil_u64(q: &BigRational) -> Result<u64> {
    ceil_nonneg(q)
        .to_u64()
        .ok_or_else(|| crate::Error::TooLarge(format!("ceiling of {q} does not fit in 64 bits")))
}

fn log2_uint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(0.0);
    top.log2() + shift as f64
}

fn log2_rational(q: &BigRational) -> f64 {
    let n = q.numer().to_biguint().unwrap_or_default();
    let d = q.denom().to_biguint().unwrap_or_default();
    log2_uint(&n) - log2_uint(&d)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WcolBound {
    /// `K_h`-minor-free partition with ratio `x = r/ρ`.
    MinorFree { h: u64, x: BigRationalRepr },
    /// Tree decomposition with maximum bag size `k` and ratio `x = r/ρ`.
    Treewidth { k: u64, x: BigRationalRepr },
}

/// Rational wrapper with a readable serialisation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigRationalRepr(pub BigRational);

impl Serialize for BigRationalRepr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl From<BigRational> for BigRationalRepr {
    fn from(q: BigRational) -> Self {
        BigRationalRepr(q)
    }
}

/// `c(h, x) = ⌈C(h-2 + 2⌈4hx⌉, h-1) · (12 + 8x) · (h-1)⌉`.
pub fn minor_free_wcol_bound(h: u64, x: &BigRational) -> Result<BigUint> {
    if h < 2 {
        return invalid(format!("minor-free bound needs h >= 2, got {h}"));
    }
    if x <= &BigRational::one() {
        return invalid(format!("minor-free bound needs r/rho > 1, got {x}"));
    }
    let q = ceil_u64(&(BigRational::from_integer((4 * h).into()) * x))?;
    let choose = binomial(h - 2 + 2 * q, h - 1);
    let factor = BigRational::from_integer(12.into()) + BigRational::from_integer(8.into()) * x;
    let prod = BigRational::from_integer(choose.into()) * factor * BigRational::from_integer((h - 1).into());
    Ok(ceil_nonneg(&prod))
}

/// `min(k·2^k·C(k + ⌈2x⌉, k), (2⌈2x⌉ + k + 1)^(3⌈2x⌉ + 4))`.
pub fn treewidth_wcol_bound(k: u64, x: &BigRational) -> Result<BigUint> {
    if k < 1 {
        return invalid("treewidth bound needs bag size k >= 1");
    }
    if x <= &BigRational::one() {
        return invalid(format!("treewidth bound needs r/rho > 1, got {x}"));
    }
    let q = ceil_u64(&(BigRational::from_integer(2.into()) * x))?;
    let first = BigUint::from(k) * (BigUint::one() << k) * binomial(k + q, k);
    let base = 2 * q + k + 1;
    let exp = 3 * q + 4;
    let second_log = exp as f64 * (base as f64).log2();
    if second_log > log2_uint(&first) + 1.0 {
        return Ok(first);
    }
    let second = num_traits::pow(BigUint::from(base), exp as usize);
    Ok(first.min(second))
}

pub fn evaluate_wcol_bound(bound: &WcolBound) -> Result<BigUint> {
    match bound {
        WcolBound::MinorFree { h, x } => minor_free_wcol_bound(*h, &x.0),
        WcolBound::Treewidth { k, x } => treewidth_wcol_bound(*k, &x.0),
    }
}

/// An exact integer, or only its base-2 logarithm when it is too large to
/// materialise.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundValue {
    Exact(BigUint),
    Huge { log2: f64 },
}

impl BoundValue {
    pub fn log2(&self) -> f64 {
        match self {
            BoundValue::Exact(v) => log2_uint(v),
            BoundValue::Huge { log2 } => *log2,
        }
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        match self {
            BoundValue::Exact(v) => Some(v),
            BoundValue::Huge { .. } => None,
        }
    }

    /// Whether `value <= self`.
    pub fn admits(&self, value: &BigUint) -> bool {
        match self {
            BoundValue::Exact(v) => value <= v,
            BoundValue::Huge { log2 } => log2_uint(value) <= *log2,
        }
    }
}

impl std::fmt::Display for BoundValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundValue::Exact(v) => write!(f, "{v}"),
            BoundValue::Huge { log2 } => write!(f, "2^{log2:.6}"),
        }
    }
}

impl Serialize for BoundValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DimBound {
    /// Scatter-dimension bound for `K_h`-minor-free graphs.
    MinorFree { h: u64, eps: BigRational },
    /// Ladder-length bound from a partition with `wcol_{3r} = c` and ratio `r/ρ`.
    FromWcol { c: BigUint, ratio: BigRational },
    /// Lower-bound ladder length `2^C(t+r, t)`.
    LowerBound { t: u64, r: u64 },
}

/// The wcol constant used by the minor-free scatter-dimension bound,
/// `c(h, 9/ε)`.
pub fn minor_free_dim_c(h: u64, eps: &BigRational) -> Result<BigUint> {
    if !eps.is_positive() {
        return invalid("epsilon must be positive");
    }
    minor_free_wcol_bound(h, &(BigRational::from_integer(9.into()) / eps))
}

/// `⌈(6c·(x+2)^c)^(c+1)⌉`, shared by the two scatter-dimension bounds.
fn ladder_power(c: &BigUint, x: &BigRational) -> Result<BoundValue> {
    let cf = c
        .to_u64()
        .ok_or_else(|| crate::Error::TooLarge("wcol constant exceeds 64 bits".into()))?;
    let x2 = x + BigRational::from_integer(2.into());
    let log2 = (cf as f64 + 1.0) * ((6.0 * cf as f64).log2() + cf as f64 * log2_rational(&x2));
    if log2 > MAX_EXACT_BITS {
        return Ok(BoundValue::Huge { log2 });
    }
    let inner = BigRational::from_integer((BigUint::from(6u32) * c).into())
        * num_traits::pow(x2, cf as usize);
    let value = num_traits::pow(inner, cf as usize + 1);
    Ok(BoundValue::Exact(ceil_nonneg(&value)))
}

pub fn evaluate_dim_bound(bound: &DimBound) -> Result<BoundValue> {
    match bound {
        DimBound::MinorFree { h, eps } => {
            let c = minor_free_dim_c(*h, eps)?;
            let x = BigRational::from_integer(9.into()) / eps;
            ladder_power(&c, &x)
        }
        DimBound::FromWcol { c, ratio } => {
            if c.is_zero() {
                return invalid("wcol ladder bound needs c >= 1");
            }
            if ratio <= &BigRational::one() {
                return invalid(format!("wcol ladder bound needs r/rho > 1, got {ratio}"));
            }
            ladder_power(c, ratio)
        }
        DimBound::LowerBound { t, r } => {
            if *t < 1 || *r < 1 {
                return invalid("lower-bound length needs t, r >= 1");
            }
            let e = binomial(t + r, *t);
            let bits = e.to_f64().unwrap_or(f64::INFINITY);
            if bits > MAX_EXACT_BITS {
                return Ok(BoundValue::Huge { log2: bits });
            }
            Ok(BoundValue::Exact(BigUint::one() << e.to_u64().unwrap_or(0)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(q("0.1"), BigRational::new(1.into(), 10.into()));
        assert_eq!(q("2.5e-1"), BigRational::new(1.into(), 4.into()));
        assert_eq!(q("-3"), BigRational::from_integer((-3).into()));
        assert_eq!(q("7/20"), BigRational::new(7.into(), 20.into()));
        assert_eq!(rational_from_f64(0.1).unwrap(), q("0.1"));
        assert_eq!(rational_from_f64(1e-7).unwrap(), q("1e-7"));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    // Expected values below were computed with an independent Python
    // script (math.comb, fractions.Fraction) before this module existed.
    #[test]
    fn wcol_bound_examples() {
        assert_eq!(minor_free_wcol_bound(2, &q("2")).unwrap(), BigUint::from(896u32));
        assert_eq!(treewidth_wcol_bound(1, &q("2")).unwrap(), BigUint::from(10u32));
        assert_eq!(treewidth_wcol_bound(3, &q("8")).unwrap(), BigUint::from(23256u32));
        assert_eq!(treewidth_wcol_bound(4, &q("4")).unwrap(), BigUint::from(31680u32));
        assert_eq!(
            minor_free_wcol_bound(5, &q("8")).unwrap(),
            BigUint::from(135_324_286_720u64)
        );
        assert!(minor_free_wcol_bound(1, &q("2")).is_err());
        assert!(minor_free_wcol_bound(2, &q("1")).is_err());
        assert!(treewidth_wcol_bound(0, &q("2")).is_err());
    }

    #[test]
    fn minor_free_bound_is_monotone() {
        let mut prev = BigUint::zero();
        for i in 11..60 {
            let x = BigRational::new(i.into(), 10.into());
            let v = minor_free_wcol_bound(2, &x).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn dim_bound_examples() {
        assert_eq!(minor_free_dim_c(2, &q("1")).unwrap(), BigUint::from(12096u32));
        let lb = evaluate_dim_bound(&DimBound::LowerBound { t: 2, r: 2 }).unwrap();
        assert_eq!(lb, BoundValue::Exact(BigUint::from(64u32)));
        let l4 = evaluate_dim_bound(&DimBound::FromWcol {
            c: BigUint::one(),
            ratio: q("3"),
        })
        .unwrap();
        assert_eq!(l4, BoundValue::Exact(BigUint::from(900u32)));
        let mf = evaluate_dim_bound(&DimBound::MinorFree { h: 2, eps: q("1") }).unwrap();
        assert!(matches!(mf, BoundValue::Huge { .. }));
        assert!(mf.log2() > 1e8);
        assert!(evaluate_dim_bound(&DimBound::LowerBound { t: 0, r: 1 }).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(5, 7), BigUint::zero());
        assert_eq!(binomial(144, 1), BigUint::from(144u32));
    }
}
