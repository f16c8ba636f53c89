//! Finite field arithmetic: prime fields `F(p)` and binary extensions
//! `F(2^m)`, plus the trace map down to the prime subfield.
//!
//! Only the two families the code constructions actually need are supported:
//! arbitrary prime fields (`m = 1`) and binary extension fields (`p = 2`,
//! `m <= 16`). Elements are stored as a single `u64`: the value itself for a
//! prime field, the coefficient bitmask for a binary extension.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// An element of a [`FieldSpec`], as a raw representation word.
///
/// For `F(p)` this is the value in `[0, p)`; for `F(2^m)` it is the
/// polynomial coefficient bitmask (bit `i` = coefficient of `x^i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fe(pub u64);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);
}

/// A concrete finite field `F(p^m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u64,
    m: u32,
    /// Modulus polynomial as a coefficient bitmask, only meaningful for p = 2.
    modulus_mask: u64,
    /// Modulus coefficients c_0..c_m over F(p), monic.
    modulus: Vec<u64>,
}

/// Primitive polynomials over F(2) for degrees 1..=16, as bitmasks.
/// Classic LFSR taps; `x` is a primitive element for each of these moduli.
const DEFAULT_BINARY_MODULI: [u64; 16] = [
    0b11,                // x + 1
    0b111,               // x^2 + x + 1
    0b1011,              // x^3 + x + 1
    0b10011,             // x^4 + x + 1
    0b100101,            // x^5 + x^2 + 1
    0b1000011,           // x^6 + x + 1
    0b10001001,          // x^7 + x^3 + 1
    0b100011101,         // x^8 + x^4 + x^3 + x^2 + 1
    0b1000010001,        // x^9 + x^4 + 1
    0b10000001001,       // x^10 + x^3 + 1
    0b100000000101,      // x^11 + x^2 + 1
    0b1000001010011,     // x^12 + x^6 + x^4 + x + 1
    0b10000000011011,    // x^13 + x^4 + x^3 + x + 1
    0b100010001000011,   // x^14 + x^10 + x^6 + x + 1
    0b1000000000000011,  // x^15 + x + 1
    0b11010100000000001, // not used; replaced below
];

fn default_binary_modulus(m: u32) -> Result<u64> {
    if m == 16 {
        // x^16 + x^12 + x^3 + x + 1
        return Ok((1u64 << 16) | (1 << 12) | (1 << 3) | (1 << 1) | 1);
    }
    if (1..=16).contains(&m) {
        Ok(DEFAULT_BINARY_MODULI[(m - 1) as usize])
    } else {
        Err(Error::usage(format!("no default modulus for F(2^{m}); m must be in 1..=16")))
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Degree of a binary polynomial bitmask (`0` has degree 0 by convention here).
fn poly_deg(p: u64) -> u32 {
    63 - p.leading_zeros().min(63)
}

/// Remainder of binary polynomial division.
fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = poly_deg(b);
    while a != 0 && poly_deg(a) >= db {
        a ^= b << (poly_deg(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
fn binary_irreducible(modulus: u64, m: u32) -> bool {
    if poly_deg(modulus) != m {
        return false;
    }
    for d in 1..=(m / 2) {
        for low in 0..(1u64 << d) {
            let divisor = (1u64 << d) | low;
            if poly_rem(modulus, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

impl FieldSpec {
    /// A prime field `F(p)`.
    pub fn prime(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::usage(format!("{p} is not prime")));
        }
        Ok(Self { p, m: 1, modulus_mask: 0, modulus: alloc::vec![0, 1] })
    }

    /// The binary extension `F(2^m)` with the built-in primitive modulus.
    pub fn binary(m: u32) -> Result<Self> {
        Self::binary_with_modulus(m, default_binary_modulus(m)?)
    }

    /// `F(2^m)` with an explicit modulus bitmask (bit i = coefficient of x^i).
    pub fn binary_with_modulus(m: u32, modulus_mask: u64) -> Result<Self> {
        if m == 0 || m > 16 {
            return Err(Error::usage(format!("extension degree {m} out of supported range 1..=16")));
        }
        if !binary_irreducible(modulus_mask, m) {
            return Err(Error::usage(format!(
                "modulus {modulus_mask:#b} is not an irreducible degree-{m} polynomial over F(2)"
            )));
        }
        let modulus = (0..=m).map(|i| (modulus_mask >> i) & 1).collect();
        Ok(Self { p: 2, m, modulus_mask, modulus })
    }

    /// General constructor from coefficient list `c_0..c_m` over `F(p)`.
    pub fn new(p: u64, modulus: &[u64]) -> Result<Self> {
        if modulus.len() < 2 {
            return Err(Error::usage("modulus must have degree >= 1"));
        }
        let m = (modulus.len() - 1) as u32;
        if m == 1 {
            let mut f = Self::prime(p)?;
            f.modulus = modulus.to_vec();
            return Ok(f);
        }
        if p != 2 {
            return Err(Error::usage(format!(
                "extension fields are only supported in characteristic 2 (got p = {p}, m = {m})"
            )));
        }
        let mut mask = 0u64;
        for (i, &c) in modulus.iter().enumerate() {
            if c > 1 {
                return Err(Error::usage("binary modulus coefficients must be 0 or 1"));
            }
            mask |= c << i;
        }
        Self::binary_with_modulus(m, mask)
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// Field order `q = p^m`.
    pub fn order(&self) -> u64 {
        self.p.pow(self.m)
    }

    pub fn modulus_mask(&self) -> u64 {
        self.modulus_mask
    }

    fn check(&self, a: Fe) -> Result<()> {
        let ok = if self.p == 2 { a.0 < (1u64 << self.m) } else { a.0 < self.p };
        if ok {
            Ok(())
        } else {
            Err(Error::usage(format!("{:?} is not an element of F({}^{})", a, self.p, self.m)))
        }
    }

    pub fn element(&self, raw: u64) -> Result<Fe> {
        let e = Fe(raw);
        self.check(e)?;
        Ok(e)
    }

    /// All `q` field elements in representation order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.order()).map(Fe)
    }

    pub fn add(&self, a: Fe, b: Fe) -> Result<Fe> {
        self.check(a)?;
        self.check(b)?;
        Ok(if self.p == 2 { Fe(a.0 ^ b.0) } else { Fe((a.0 + b.0) % self.p) })
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Result<Fe> {
        self.check(a)?;
        self.check(b)?;
        Ok(if self.p == 2 { Fe(a.0 ^ b.0) } else { Fe((a.0 + self.p - b.0) % self.p) })
    }

    pub fn neg(&self, a: Fe) -> Result<Fe> {
        self.sub(Fe::ZERO, a)
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Result<Fe> {
        self.check(a)?;
        self.check(b)?;
        if self.m == 1 {
            return Ok(Fe((a.0 * b.0) % self.p));
        }
        // Carry-less multiply then reduce by the modulus.
        let mut acc = 0u64;
        let mut x = a.0;
        let mut y = b.0;
        while y != 0 {
            if y & 1 == 1 {
                acc ^= x;
            }
            x <<= 1;
            y >>= 1;
        }
        Ok(Fe(poly_rem(acc, self.modulus_mask)))
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Result<Fe> {
        self.check(a)?;
        let mut base = a;
        let mut acc = Fe::ONE;
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base)?;
            }
            base = self.mul(base, base)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        self.check(a)?;
        if a == Fe::ZERO {
            return Err(Error::domain("inverse of zero"));
        }
        self.pow(a, self.order() - 2)
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        self.mul(a, self.inv(b)?)
    }

    /// Trace down to the prime subfield: `a + a^p + ... + a^{p^(m-1)}`.
    ///
    /// The result is an element of `F(p)`, returned as its raw value.
    pub fn trace(&self, a: Fe) -> Result<u64> {
        self.check(a)?;
        let mut conj = a;
        let mut acc = Fe::ZERO;
        for _ in 0..self.m {
            acc = self.add(acc, conj)?;
            conj = self.pow(conj, self.p)?;
        }
        debug_assert!(self.p != 2 || acc.0 <= 1, "binary trace must land in F(2)");
        Ok(acc.0)
    }

    /// True when `a` generates the multiplicative group.
    pub fn is_primitive(&self, a: Fe) -> Result<bool> {
        self.check(a)?;
        if a == Fe::ZERO {
            return Ok(false);
        }
        let group = self.order() - 1;
        for r in prime_factors(group) {
            if self.pow(a, group / r)? == Fe::ONE {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn label(&self) -> String {
        if self.m == 1 {
            format!("F({})", self.p)
        } else {
            format!("F({}^{})", self.p, self.m)
        }
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
