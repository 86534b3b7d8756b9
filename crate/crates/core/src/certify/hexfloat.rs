//! C99-style hexadecimal float strings (`0x1.8p+1`), exact in both directions.

use crate::error::{Error, Result};

const MANT_BITS: u32 = 52;
const EXP_BIAS: i32 = 1023;

pub fn to_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits();
    let biased = ((bits >> MANT_BITS) & 0x7ff) as i32;
    let mant = bits & ((1 << MANT_BITS) - 1);
    if biased == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 { (0, 1 - EXP_BIAS) } else { (1, biased - EXP_BIAS) };
    let digits = format!("{mant:013x}");
    let digits = digits.trim_end_matches('0');
    let frac = if digits.is_empty() { String::new() } else { format!(".{digits}") };
    format!("{sign}0x{lead}{frac}p{exp:+}")
}

pub fn from_hex(s: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("invalid hexfloat {s:?}"));
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let sign = if neg { -1.0 } else { 1.0 };
    match body {
        "nan" => return Ok(f64::NAN),
        "inf" => return Ok(sign * f64::INFINITY),
        _ => {}
    }
    let body = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")).ok_or_else(bad)?;
    let (mant_str, exp_str) = body.split_once(['p', 'P']).ok_or_else(bad)?;
    let exp: i32 = exp_str.parse().map_err(|_| bad())?;
    let (int_part, frac_part) = mant_str.split_once('.').unwrap_or((mant_str, ""));
    if int_part.is_empty() || frac_part.len() > 13 {
        return Err(bad());
    }
    let lead = u64::from_str_radix(int_part, 16).map_err(|_| bad())?;
    if lead > 1 {
        return Err(bad());
    }
    let frac = if frac_part.is_empty() {
        0
    } else {
        u64::from_str_radix(frac_part, 16).map_err(|_| bad())? << (4 * (13 - frac_part.len()))
    };
    let bits = if lead == 0 {
        if frac == 0 {
            0
        } else if exp == 1 - EXP_BIAS {
            frac
        } else {
            return Err(bad());
        }
    } else {
        let biased = exp + EXP_BIAS;
        if !(1..=2046).contains(&biased) {
            return Err(bad());
        }
        ((biased as u64) << MANT_BITS) | frac
    };
    Ok(sign * f64::from_bits(bits))
}
