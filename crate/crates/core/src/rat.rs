//! Exact rational scalars and conversions between rationals and decimal text.
//!
//! Every number inside the solver is a [`Rat`]: an arbitrary-precision
//! rational kept in canonical form (lowest terms, positive denominator).
//! No operation anywhere in the engine rounds, so verdicts carry exact
//! witnesses.
//!
//! Text conversions are exact in both directions: a finite decimal literal
//! like `0.1` denotes precisely 1/10, and any rational whose denominator has
//! only the prime factors 2 and 5 prints back as a finite decimal.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Exact arbitrary-precision rational. Canonical form (reduced, positive
/// denominator) is maintained by the underlying representation.
pub type Rat = num_rational::BigRational;

/// Shorthand for `n/d` used heavily in tests and constructions.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Error produced when a numeric token cannot be read exactly.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid numeric literal `{token}`")]
pub struct NumberError {
    pub token: String,
}

fn bad(token: &str) -> NumberError {
    NumberError {
        token: token.to_string(),
    }
}

/// Parses a numeric literal into an exact rational.
///
/// Accepted forms:
/// * decimal literals with optional sign, fraction and exponent
///   (`-3`, `0.25`, `1e-3`, `+2.5E2`) — converted exactly, never via binary
///   floating point;
/// * explicit fractions `p/q` with integer parts (`-7/2`), used by the
///   serializers for rationals that have no finite decimal expansion.
pub fn parse_number(token: &str) -> Result<Rat, NumberError> {
    let s = token.trim();
    if s.is_empty() {
        return Err(bad(token));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad(token))?;
        let d: BigInt = den.trim().parse().map_err(|_| bad(token))?;
        if d.is_zero() {
            return Err(bad(token));
        }
        return Ok(Rat::new(n, d));
    }
    parse_decimal(s).ok_or_else(|| bad(token))
}

fn parse_decimal(s: &str) -> Option<Rat> {
    let (sign, rest) = match s.as_bytes()[0] {
        b'+' => (1, &s[1..]),
        b'-' => (-1, &s[1..]),
        _ => (1, s),
    };
    if rest.is_empty() {
        return None;
    }
    let (mantissa, exp) = match rest.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = rest[i + 1..].parse().ok()?;
            (&rest[..i], e)
        }
        None => (rest, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let unscaled: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rat::from_integer(unscaled * ten.pow(scale as u32))
    } else {
        Rat::new(unscaled, ten.pow((-scale) as u32))
    };
    Some(if sign < 0 { -value } else { value })
}

/// Renders `r` as a finite decimal string if its denominator divides a power
/// of ten, otherwise returns `None`.
pub fn decimal_exact(r: &Rat) -> Option<String> {
    let denom = r.denom();
    let mut d = denom.clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return None;
    }
    let k = twos.max(fives);
    // numer * 2^(k-twos) * 5^(k-fives) over 10^k
    let scaled = r.numer() * two.pow(k - twos) * five.pow(k - fives);
    let neg = scaled.is_negative();
    let digits = scaled.magnitude().to_string();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if k == 0 {
        out.push_str(&digits);
        return Some(out);
    }
    let k = k as usize;
    if digits.len() <= k {
        out.push_str("0.");
        out.push_str(&"0".repeat(k - digits.len()));
        out.push_str(&digits);
    } else {
        out.push_str(&digits[..digits.len() - k]);
        out.push('.');
        out.push_str(&digits[digits.len() - k..]);
    }
    Some(out)
}

/// Exact textual form: a finite decimal when one exists, else `p/q`.
///
/// This is the form the serializers emit; [`parse_number`] reads both back
/// exactly.
pub fn format_exact(r: &Rat) -> String {
    decimal_exact(r).unwrap_or_else(|| format!("{}/{}", r.numer(), r.denom()))
}

/// Decimal rendering for humans: exact when the expansion is finite and no
/// longer than `max_digits` fractional digits, otherwise rounded to
/// `max_digits` places (half away from zero) and marked with a trailing `~`.
pub fn decimal_approx(r: &Rat, max_digits: usize) -> String {
    if let Some(s) = decimal_exact(r) {
        let frac_len = s.split_once('.').map_or(0, |(_, f)| f.len());
        if frac_len <= max_digits {
            return s;
        }
    }
    let scale = BigInt::from(10).pow(max_digits as u32);
    let scaled_num = r.numer() * &scale;
    let den = r.denom();
    let mut q = &scaled_num / den;
    let rem = &scaled_num - &q * den;
    // round half away from zero; denominator is positive in canonical form
    if BigInt::from(2) * rem.abs() >= *den {
        if scaled_num.is_negative() {
            q -= 1;
        } else {
            q += 1;
        }
    }
    let rounded = Rat::new(q, scale);
    let mut s = decimal_exact(&rounded).expect("power-of-ten denominator");
    s.push('~');
    s
}

/// Loss-free display wrapper used by error messages and traces.
pub struct DisplayRat<'a>(pub &'a Rat);

impl fmt::Display for DisplayRat<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_exact(self.0))
    }
}

/// `f64` approximation, for report aggregation only (never fed back into the
/// solver).
pub fn to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}
