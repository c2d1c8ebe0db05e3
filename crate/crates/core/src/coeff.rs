//! Exact scalar coefficients.
//!
//! Three base modes are supported: the integers, the rationals used as a
//! stand-in for the p-local integers, and the prime field `F_p`. Integer and
//! p-local coefficients share the rational representation; integrality is
//! asserted where it matters rather than enforced on every operation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{AlgebraError, Result};

/// The ground ring every element of a presentation lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseRing {
    Integers,
    /// Rationals with an attached prime; models `Z_(p)` inside `Q`.
    PLocal(u64),
    PrimeField(u64),
}

impl BaseRing {
    pub fn prime(&self) -> Option<u64> {
        match self {
            BaseRing::Integers => None,
            BaseRing::PLocal(p) | BaseRing::PrimeField(p) => Some(*p),
        }
    }

    /// Characteristic of the base ring (0 for the two rational modes).
    pub fn characteristic(&self) -> u64 {
        match self {
            BaseRing::PrimeField(p) => *p,
            _ => 0,
        }
    }

    pub fn is_field(&self) -> bool {
        matches!(self, BaseRing::PrimeField(_))
    }

    pub fn zero(&self) -> Coeff {
        self.from_i64(0)
    }

    pub fn one(&self) -> Coeff {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Coeff {
        match self {
            BaseRing::PrimeField(p) => Coeff::Fp(reduce_i128(n as i128, *p), *p),
            _ => Coeff::Q(BigRational::from_integer(BigInt::from(n))),
        }
    }

    pub fn from_bigint(&self, n: &BigInt) -> Coeff {
        match self {
            BaseRing::PrimeField(p) => {
                let r = n.mod_floor(&BigInt::from(*p));
                Coeff::Fp(r.to_u64().unwrap(), *p)
            }
            _ => Coeff::Q(BigRational::from_integer(n.clone())),
        }
    }

    /// Converts a rational into this base. Fails in prime-field mode when the
    /// denominator is divisible by `p`.
    pub fn from_rational(&self, q: &BigRational) -> Result<Coeff> {
        match self {
            BaseRing::PrimeField(p) => {
                let pb = BigInt::from(*p);
                let den = q.denom().mod_floor(&pb);
                if den.is_zero() {
                    return Err(AlgebraError::IntegralityFailure(format!(
                        "{q} is not {p}-integral"
                    )));
                }
                let num = q.numer().mod_floor(&pb).to_u64().unwrap();
                let den = den.to_u64().unwrap();
                let inv = mod_inverse(den, *p).expect("nonzero residue is invertible");
                Ok(Coeff::Fp(mul_mod(num, inv, *p), *p))
            }
            _ => Ok(Coeff::Q(q.clone())),
        }
    }

    /// Image of a coefficient of `source` under the canonical map into `self`.
    pub fn convert(&self, c: &Coeff) -> Result<Coeff> {
        match (c, self) {
            (Coeff::Q(q), _) => self.from_rational(q),
            (Coeff::Fp(v, p), BaseRing::PrimeField(q)) if p == q => Ok(Coeff::Fp(*v, *p)),
            (Coeff::Fp(_, p), other) => Err(AlgebraError::BaseMismatch(format!(
                "no ring map F_{p} -> {other}"
            ))),
        }
    }
}

impl fmt::Display for BaseRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseRing::Integers => write!(f, "Z"),
            BaseRing::PLocal(p) => write!(f, "Z_({p})"),
            BaseRing::PrimeField(p) => write!(f, "F_{p}"),
        }
    }
}

/// A single exact scalar.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Coeff {
    Q(BigRational),
    /// Residue in `[0, p)` together with its modulus.
    Fp(u64, u64),
}

pub(crate) fn reduce_i128(n: i128, p: u64) -> u64 {
    n.rem_euclid(p as i128) as u64
}

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn mod_inverse(a: u64, p: u64) -> Option<u64> {
    let (g, x, _) = ext_gcd(a as i128 % p as i128, p as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(p as i128) as u64)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

impl Coeff {
    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Q(q) => q.is_zero(),
            Coeff::Fp(v, _) => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coeff::Q(q) => q.is_one(),
            Coeff::Fp(v, _) => *v == 1,
        }
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        match (self, other) {
            (Coeff::Q(a), Coeff::Q(b)) => Coeff::Q(a + b),
            (Coeff::Fp(a, p), Coeff::Fp(b, _)) => Coeff::Fp((a + b) % p, *p),
            _ => panic!("mixed coefficient modes"),
        }
    }

    pub fn add_assign(&mut self, other: &Coeff) {
        match (self, other) {
            (Coeff::Q(a), Coeff::Q(b)) => *a += b,
            (Coeff::Fp(a, p), Coeff::Fp(b, _)) => *a = (*a + b) % *p,
            _ => panic!("mixed coefficient modes"),
        }
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::Q(a) => Coeff::Q(-a),
            Coeff::Fp(a, p) => Coeff::Fp((p - a) % p, *p),
        }
    }

    pub fn sub(&self, other: &Coeff) -> Coeff {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Coeff) -> Coeff {
        match (self, other) {
            (Coeff::Q(a), Coeff::Q(b)) => Coeff::Q(a * b),
            (Coeff::Fp(a, p), Coeff::Fp(b, _)) => Coeff::Fp(mul_mod(*a, *b, *p), *p),
            _ => panic!("mixed coefficient modes"),
        }
    }

    /// Multiplicative inverse, if one exists in the coefficient ring.
    ///
    /// In the rational modes every nonzero value is invertible; callers that
    /// need integrality check it separately.
    pub fn inverse(&self) -> Option<Coeff> {
        match self {
            Coeff::Q(a) if !a.is_zero() => Some(Coeff::Q(a.recip())),
            Coeff::Q(_) => None,
            Coeff::Fp(a, p) => mod_inverse(*a, *p).map(|i| Coeff::Fp(i, *p)),
        }
    }

    pub fn pow(&self, e: u32) -> Coeff {
        let mut acc = match self {
            Coeff::Q(_) => Coeff::Q(BigRational::one()),
            Coeff::Fp(_, p) => Coeff::Fp(1 % p, *p),
        };
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// True when the value lies in `Z_(p)` (rational mode) or always (field mode).
    pub fn is_p_integral(&self, p: u64) -> bool {
        match self {
            Coeff::Q(q) => !q.denom().is_multiple_of(&BigInt::from(p)),
            Coeff::Fp(..) => true,
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Coeff::Q(q) => q.is_integer(),
            Coeff::Fp(..) => true,
        }
    }

    /// Representative in the rationals (residues lift to `[0, p)`).
    pub fn lift(&self) -> Coeff {
        match self {
            Coeff::Q(q) => Coeff::Q(q.clone()),
            Coeff::Fp(v, _) => Coeff::Q(BigRational::from_integer(BigInt::from(*v))),
        }
    }

    /// Unit of the base ring: nonzero in a field, ±1 over Z, p-adic unit in Z_(p).
    pub fn is_unit_in(&self, base: BaseRing) -> bool {
        match (self, base) {
            (Coeff::Fp(v, _), _) => *v != 0,
            (Coeff::Q(q), BaseRing::Integers) => q.is_integer() && q.abs().is_one(),
            (Coeff::Q(q), BaseRing::PLocal(p)) => {
                !q.is_zero() && self.is_p_integral(p) && !q.numer().is_multiple_of(&BigInt::from(p))
            }
            (Coeff::Q(q), BaseRing::PrimeField(_)) => !q.is_zero(),
        }
    }

    /// Sign used when printing: returns (is_negative, absolute value string).
    pub(crate) fn sign_and_abs(&self) -> (bool, String) {
        match self {
            Coeff::Q(q) => (q.is_negative(), q.abs().to_string()),
            Coeff::Fp(v, _) => (false, v.to_string()),
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Q(q) => write!(f, "{q}"),
            Coeff::Fp(v, _) => write!(f, "{v}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_reduces_into_range() {
        let f = BaseRing::PrimeField(5);
        assert_eq!(f.from_i64(-1), Coeff::Fp(4, 5));
        assert_eq!(f.from_i64(12), Coeff::Fp(2, 5));
        assert_eq!(f.from_i64(3).inverse(), Some(Coeff::Fp(2, 5)));
    }

    #[test]
    fn rational_to_field_needs_integrality() {
        let f = BaseRing::PrimeField(3);
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(f.from_rational(&half).unwrap(), Coeff::Fp(2, 3));
        let third = BigRational::new(1.into(), 3.into());
        assert!(f.from_rational(&third).is_err());
    }

    #[test]
    fn p_integrality() {
        let q = Coeff::Q(BigRational::new(5.into(), 4.into()));
        assert!(q.is_p_integral(3));
        assert!(!q.is_p_integral(2));
    }
}
