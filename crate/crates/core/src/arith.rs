//! Exact residue-ring and finite-field arithmetic.
//!
//! `ZMod` covers the cyclic groups ℤ/mℤ that carry difference sets, and
//! `GaloisField` gives GF(p^k) for the Singer construction and the
//! projective-line models. Field orders are capped at 1000.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Largest field order accepted by [`GaloisField::new`].
pub const MAX_FIELD_ORDER: u64 = 1000;
/// Largest extension degree accepted by [`GaloisField::new`].
pub const MAX_FIELD_DEGREE: u32 = 9;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q = p^eta` with `p` prime; `None` when `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|&d| q.is_multiple_of(d))?;
    let mut rest = q;
    let mut eta = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        eta += 1;
    }
    (rest == 1).then_some((p, eta))
}

/// Units of ℤ/mℤ in ascending order.
pub fn zmod_units(m: u64) -> Vec<u64> {
    (1..m).filter(|&a| gcd(a, m) == 1).collect()
}

/// Modular inverse of `a` mod `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        // m == 1 is the degenerate ring where everything is 0 = 1
        return (m == 1).then_some(0);
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// An element of ℤ/mℤ, always stored reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZMod {
    value: u64,
    modulus: u64,
}

impl ZMod {
    pub fn new(value: i64, modulus: u64) -> Result<ZMod> {
        if modulus == 0 {
            return Err(Error::InvalidInput("modulus must be positive".into()));
        }
        Ok(ZMod {
            value: (value as i128).rem_euclid(modulus as i128) as u64,
            modulus,
        })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_unit(self) -> bool {
        gcd(self.value, self.modulus) == 1
    }

    pub fn inv(self) -> Option<ZMod> {
        inv_mod(self.value, self.modulus).map(|value| ZMod { value, ..self })
    }

    pub fn pow(self, mut e: u64) -> ZMod {
        let m = self.modulus as u128;
        let mut base = self.value as u128;
        let mut acc = 1u128 % m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            e >>= 1;
        }
        ZMod {
            value: acc as u64,
            modulus: self.modulus,
        }
    }

    fn check(self, other: ZMod) {
        assert_eq!(
            self.modulus, other.modulus,
            "mixed moduli in ZMod arithmetic"
        );
    }
}

impl Add for ZMod {
    type Output = ZMod;
    fn add(self, rhs: ZMod) -> ZMod {
        self.check(rhs);
        ZMod {
            value: ((self.value as u128 + rhs.value as u128) % self.modulus as u128) as u64,
            modulus: self.modulus,
        }
    }
}

impl Sub for ZMod {
    type Output = ZMod;
    fn sub(self, rhs: ZMod) -> ZMod {
        self + (-rhs)
    }
}

impl Neg for ZMod {
    type Output = ZMod;
    fn neg(self) -> ZMod {
        ZMod {
            value: (self.modulus - self.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}

impl Mul for ZMod {
    type Output = ZMod;
    fn mul(self, rhs: ZMod) -> ZMod {
        self.check(rhs);
        ZMod {
            value: ((self.value as u128 * rhs.value as u128) % self.modulus as u128) as u64,
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for ZMod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

// Polynomials over GF(p) are coefficient vectors, constant term first, with no
// trailing zeros (the zero polynomial is the empty vector).

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    let lead_inv = inv_mod(*b.last().expect("division by zero polynomial"), p).unwrap();
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let factor = r.last().unwrap() * lead_inv % p;
        for (i, &c) in b.iter().enumerate() {
            let idx = i + shift;
            r[idx] = (r[idx] + p * p - factor * c % p) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(out)
}

/// Decodes a base-`p` code into `len` coefficients, constant term first.
fn digits(mut code: u64, p: u64, len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(code % p);
        code /= p;
    }
    out
}

fn undigits(coeffs: &[u64], p: u64) -> u64 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Monic polynomials of exact degree `deg`, ordered lexicographically by
/// `(c_{deg-1}, ..., c_0)`.
fn monic_polys(p: u64, deg: usize) -> impl Iterator<Item = Vec<u64>> {
    (0..p.pow(deg as u32)).map(move |code| {
        let mut c = digits(code, p, deg);
        c.push(1);
        c
    })
}

/// Irreducibility over GF(p) by trial division with every monic polynomial of
/// degree at most half.
pub fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let poly = trim(poly.to_vec());
    let deg = match poly.len() {
        0 | 1 => return false,
        n => n - 1,
    };
    (1..=deg / 2).all(|d| monic_polys(p, d).all(|f| !poly_rem(&poly, &f, p).is_empty()))
}

/// Element of a [`GaloisField`], encoded as `sum c_i p^i` over its polynomial
/// coefficients. The encoding order is the canonical element order used
/// throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem(u32);

impl FieldElem {
    pub fn code(self) -> u32 {
        self.0
    }

    pub(crate) fn from_index(i: usize) -> FieldElem {
        FieldElem(i as u32)
    }
}

/// GF(p^k) as GF(p)[x] modulo the lexicographically smallest monic
/// irreducible of degree `k`, together with a verified primitive element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisField {
    p: u64,
    k: u32,
    order: u64,
    reduction: Vec<u64>,
    primitive: FieldElem,
}

impl GaloisField {
    pub fn new(p: u64, k: u32) -> Result<GaloisField> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 || k > MAX_FIELD_DEGREE {
            return Err(Error::cap("extension degree", k as u64, MAX_FIELD_DEGREE as u64));
        }
        let order = p
            .checked_pow(k)
            .filter(|&o| o <= MAX_FIELD_ORDER)
            .ok_or_else(|| Error::cap("field order", p.saturating_pow(k), MAX_FIELD_ORDER))?;
        let reduction = monic_polys(p, k as usize)
            .find(|f| is_irreducible(f, p))
            .expect("an irreducible polynomial exists in every degree");
        let mut field = GaloisField {
            p,
            k,
            order,
            reduction,
            primitive: FieldElem(1),
        };
        field.primitive = (1..order as u32)
            .map(FieldElem)
            .find(|&a| field.mult_order(a) == order - 1)
            .expect("the multiplicative group of a finite field is cyclic");
        Ok(field)
    }

    /// GF(q) for a prime power `q`.
    pub fn of_order(q: u64) -> Result<GaloisField> {
        let (p, k) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        GaloisField::new(p, k)
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Reduction polynomial, constant term first, monic of degree `k`.
    pub fn reduction_poly(&self) -> &[u64] {
        &self.reduction
    }

    pub fn primitive(&self) -> FieldElem {
        self.primitive
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(0)
    }

    pub fn one(&self) -> FieldElem {
        FieldElem(1)
    }

    /// The class of `x` (equal to `p` as a code unless `k = 1`).
    pub fn generator_x(&self) -> FieldElem {
        self.from_coeffs(&[0, 1])
    }

    /// All elements in ascending code order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.order as u32).map(FieldElem)
    }

    pub fn from_code(&self, code: u32) -> Result<FieldElem> {
        if (code as u64) < self.order {
            Ok(FieldElem(code))
        } else {
            Err(Error::InvalidInput(format!(
                "code {code} out of range for GF({})",
                self.order
            )))
        }
    }

    /// Element represented by an arbitrary polynomial (reduced first).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> FieldElem {
        let c: Vec<u64> = coeffs.iter().map(|c| c % self.p).collect();
        let r = poly_rem(&c, &self.reduction, self.p);
        FieldElem(undigits(&r, self.p) as u32)
    }

    /// Coefficient vector of length `k`, constant term first.
    pub fn coeffs(&self, a: FieldElem) -> Vec<u64> {
        digits(a.0 as u64, self.p, self.k as usize)
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let sum: Vec<u64> = self
            .coeffs(a)
            .iter()
            .zip(self.coeffs(b))
            .map(|(x, y)| (x + y) % self.p)
            .collect();
        FieldElem(undigits(&sum, self.p) as u32)
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        let c: Vec<u64> = self
            .coeffs(a)
            .iter()
            .map(|x| (self.p - x) % self.p)
            .collect();
        FieldElem(undigits(&c, self.p) as u32)
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let prod = poly_mul(&trim(self.coeffs(a)), &trim(self.coeffs(b)), self.p);
        self.from_coeffs(&prod)
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a == self.zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.order - 2))
    }

    /// The absolute Frobenius `a ↦ a^p`.
    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        self.pow(a, self.p)
    }

    /// Multiplicative order of a nonzero element, by walking its powers.
    pub fn mult_order(&self, a: FieldElem) -> u64 {
        assert_ne!(a, self.zero(), "zero has no multiplicative order");
        let mut x = a;
        let mut n = 1;
        while x != self.one() {
            x = self.mul(x, a);
            n += 1;
        }
        n
    }
}
