//! Exact rationals: parsing from `3`, `-2`, `3/4` or `0.25`, and serde helpers
//! that write them as strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serializer;

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            digits if digits.bytes().all(|b| b.is_ascii_digit()) => digits.parse().ok()?,
            _ => return None,
        };
        let scale = BigInt::from(10u8).pow(frac.len() as u32);
        let frac_part: BigInt = frac.parse().ok()?;
        let mag = BigRational::new(int_part * &scale + frac_part, scale);
        return Some(if negative { -mag } else { mag });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

pub fn in_unit_interval(r: &BigRational) -> bool {
    !r.is_negative() && r <= &BigRational::one()
}

pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

pub fn serialize_opt<S: Serializer>(r: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.collect_str(r),
        None => s.serialize_none(),
    }
}
