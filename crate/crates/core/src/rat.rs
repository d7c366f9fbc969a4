//! Exact rational scalars used throughout the workbench.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Exact rational number. All probabilities and semantic coefficients are
/// computed in this type unless a float back-end is explicitly requested.
pub type Rat = BigRational;

/// `p / q` as an exact rational. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// The integer `n` as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// Canonical `numerator/denominator` rendering, always with the slash, e.g.
/// `0/1`, `1/2`, `-3/4`. This is the wire format used in JSON output.
pub fn rat_str(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer into a rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Rat::new(p, q))
            }
        }
        None => {
            let p: BigInt = s.parse().ok()?;
            Some(Rat::from_integer(p))
        }
    }
}

/// True when `r` is a valid probability, i.e. `0 <= r <= 1`.
pub fn is_probability(r: &Rat) -> bool {
    !r.is_negative() && *r <= one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_always_uses_slash() {
        assert_eq!(rat_str(&rat(1, 2)), "1/2");
        assert_eq!(rat_str(&rat_int(0)), "0/1");
        assert_eq!(rat_str(&rat_int(3)), "3/1");
        assert_eq!(rat_str(&rat(2, 4)), "1/2");
    }

    #[test]
    fn parse_roundtrip() {
        assert_eq!(parse_rat("1/3"), Some(rat(1, 3)));
        assert_eq!(parse_rat("7"), Some(rat_int(7)));
        assert_eq!(parse_rat("2/6"), Some(rat(1, 3)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("x"), None);
    }

    #[test]
    fn probability_range() {
        assert!(is_probability(&rat(0, 1)));
        assert!(is_probability(&rat(1, 1)));
        assert!(is_probability(&rat(2, 3)));
        assert!(!is_probability(&rat(4, 3)));
        assert!(!is_probability(&rat(-1, 3)));
    }
}
