//! Binary fixed-point numbers with 256 fractional bits.
//!
//! Only what the analysis calculators need: exact conversion from `f64`, the
//! four operations, and a natural logarithm accurate to the working precision.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

const FRAC_BITS: u32 = 256;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixed(BigInt);

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    pub fn one() -> Self {
        Fixed(BigInt::from(1) << FRAC_BITS)
    }

    pub fn from_u64(v: u64) -> Self {
        Fixed(BigInt::from(v) << FRAC_BITS)
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "cannot represent {x}");
        if x == 0.0 {
            return Fixed::zero();
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let fraction = bits & ((1u64 << 52) - 1);
        let (mantissa, exponent) = if biased == 0 {
            (fraction, -1074)
        } else {
            (fraction | (1u64 << 52), biased - 1075)
        };
        let shift = exponent + FRAC_BITS as i64;
        let mag = BigInt::from(mantissa);
        let mag = if shift >= 0 {
            mag << shift as u64
        } else {
            mag >> (-shift) as u64
        };
        Fixed(if negative { -mag } else { mag })
    }

    pub fn to_f64(&self) -> f64 {
        let mag = self.0.magnitude();
        let bits = mag.bits();
        let value = if bits <= 64 {
            mag.to_u64().unwrap() as f64 * 2f64.powi(-(FRAC_BITS as i32))
        } else {
            let shift = bits - 64;
            let top = (mag >> shift).to_u64().unwrap() as f64;
            top * 2f64.powi(shift as i32 - FRAC_BITS as i32)
        };
        if self.0.sign() == Sign::Minus { -value } else { value }
    }

    pub fn abs(&self) -> Self {
        Fixed(self.0.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn div_small(&self, d: u64) -> Self {
        Fixed(&self.0 / BigInt::from(d))
    }

    /// `2·atanh(z)` by its odd power series; requires `|z| < 1`.
    fn twice_atanh(z: &Fixed) -> Fixed {
        let z2 = z * z;
        let mut power = z.clone();
        let mut sum = Fixed::zero();
        let mut n = 1u64;
        loop {
            let term = power.div_small(n);
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
            power = &power * &z2;
            n += 2;
        }
        &sum + &sum
    }

    pub fn ln2() -> Fixed {
        Fixed::twice_atanh(&Fixed::one().div_small(3))
    }

    /// Natural logarithm; `None` unless `self > 0`.
    pub fn ln(&self) -> Option<Fixed> {
        if self.0.sign() != Sign::Plus {
            return None;
        }
        // self = y · 2^j with y in [1, 2)
        let j = self.0.bits() as i64 - 1 - FRAC_BITS as i64;
        let y = if j >= 0 {
            Fixed(&self.0 >> j as u64)
        } else {
            Fixed(&self.0 << (-j) as u64)
        };
        let one = Fixed::one();
        let z = &(&y - &one) / &(&y + &one);
        let scale = Fixed(BigInt::from(j) << FRAC_BITS);
        Some(&(&scale * &Fixed::ln2()) + &Fixed::twice_atanh(&z))
    }
}

impl Add for &Fixed {
    type Output = Fixed;
    fn add(self, rhs: &Fixed) -> Fixed {
        Fixed(&self.0 + &rhs.0)
    }
}

impl Sub for &Fixed {
    type Output = Fixed;
    fn sub(self, rhs: &Fixed) -> Fixed {
        Fixed(&self.0 - &rhs.0)
    }
}

impl Mul for &Fixed {
    type Output = Fixed;
    fn mul(self, rhs: &Fixed) -> Fixed {
        Fixed((&self.0 * &rhs.0) >> FRAC_BITS)
    }
}

impl Div for &Fixed {
    type Output = Fixed;
    fn div(self, rhs: &Fixed) -> Fixed {
        assert!(!rhs.is_zero(), "fixed-point division by zero");
        Fixed((&self.0 << FRAC_BITS) / &rhs.0)
    }
}

impl Neg for &Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-&self.0)
    }
}
