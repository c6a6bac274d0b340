//! Exact arithmetic in GF(q) for q = p^m.
//!
//! Elements are stored as integers in `[0, q)` whose base-p digits are the
//! polynomial-basis coefficients, least-significant first. For prime fields
//! this is the residue itself. Extension fields use a fixed modulus per
//! `(p, m)` taken from [`MODULUS_TABLE`], so encoded matrices are portable.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// Irreducible moduli for the supported extension fields, as
/// `(p, m, coefficients)` with coefficients least-significant first.
///
/// This table is part of the external interface: adding or changing an entry
/// changes the meaning of serialized elements.
pub const MODULUS_TABLE: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),                   // x^2 + x + 1
    (2, 3, &[1, 1, 0, 1]),                // x^3 + x + 1
    (2, 4, &[1, 1, 0, 0, 1]),             // x^4 + x + 1
    (2, 5, &[1, 0, 1, 0, 0, 1]),          // x^5 + x^2 + 1
    (2, 6, &[1, 1, 0, 0, 0, 0, 1]),       // x^6 + x + 1
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),    // x^7 + x + 1
    (2, 8, &[1, 0, 1, 1, 1, 0, 0, 0, 1]), // x^8 + x^4 + x^3 + x^2 + 1
    (3, 2, &[1, 0, 1]),                   // x^2 + 1
    (3, 3, &[1, 2, 0, 1]),                // x^3 + 2x + 1
    (5, 2, &[2, 1, 1]),                   // x^2 + x + 2
    (7, 2, &[1, 0, 1]),                   // x^2 + 1
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{m} exceeds the supported maximum 2^16")]
    TooLarge { p: u32, m: u32 },
    #[error("no modulus for GF({p}^{m}) in the built-in table")]
    Unsupported { p: u32, m: u32 },
    #[error("field order {0} is not a supported prime power")]
    BadOrder(u32),
    #[error("value {value} out of range for GF({q})")]
    OutOfRange { value: u32, q: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different fields (GF({0}) vs GF({1}))")]
    FieldMismatch(u32, u32),
}

pub type Result<T> = std::result::Result<T, FieldError>;

enum Arith {
    Prime,
    Tables {
        add: Vec<u32>,
        mul: Vec<u32>,
        neg: Vec<u32>,
        inv: Vec<u32>,
    },
}

struct Inner {
    p: u32,
    m: u32,
    q: u32,
    modulus: Option<Vec<u32>>,
    arith: Arith,
}

/// A finite field GF(p^m). Cheap to clone.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.m == other.0.m)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.0.q)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.0.q)
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Builds GF(p^m) using the built-in modulus table for `m > 1`.
pub fn make_field(p: u32, m: u32) -> Result<Field> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if m == 0 {
        return Err(FieldError::ZeroDegree);
    }
    let q = (p as u64)
        .checked_pow(m)
        .filter(|&q| q <= MAX_ORDER as u64)
        .ok_or(FieldError::TooLarge { p, m })? as u32;
    if m == 1 {
        return Ok(Field(Arc::new(Inner {
            p,
            m,
            q,
            modulus: None,
            arith: Arith::Prime,
        })));
    }
    let modulus = MODULUS_TABLE
        .iter()
        .find(|(tp, tm, _)| *tp == p && *tm == m)
        .map(|(_, _, c)| c.to_vec())
        .ok_or(FieldError::Unsupported { p, m })?;
    let arith = build_tables(p, m, q, &modulus);
    Ok(Field(Arc::new(Inner {
        p,
        m,
        q,
        modulus: Some(modulus),
        arith,
    })))
}

/// Builds the field of order `q`, which must be a prime or a tabulated prime power.
pub fn field_of_order(q: u32) -> Result<Field> {
    if q < 2 {
        return Err(FieldError::BadOrder(q));
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d)).unwrap();
    let mut m = 0;
    let mut rest = q;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    if rest != 1 {
        return Err(FieldError::BadOrder(q));
    }
    make_field(p, m)
}

fn digits(mut v: u32, p: u32, m: u32) -> Vec<u32> {
    (0..m)
        .map(|_| {
            let d = v % p;
            v /= p;
            d
        })
        .collect()
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

fn poly_mul_mod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let m = modulus.len() - 1;
    let mut prod = vec![0u32; 2 * m];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // modulus is monic: x^m = -(lower terms)
    for deg in (m..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (t, &mc) in modulus[..m].iter().enumerate() {
            let idx = deg - m + t;
            prod[idx] = (prod[idx] + (p - c) * mc % p) % p;
        }
    }
    prod.truncate(m);
    prod
}

fn build_tables(p: u32, m: u32, q: u32, modulus: &[u32]) -> Arith {
    let qs = q as usize;
    let digs: Vec<Vec<u32>> = (0..q).map(|v| digits(v, p, m)).collect();
    let mut add = vec![0u32; qs * qs];
    let mut mul = vec![0u32; qs * qs];
    for a in 0..qs {
        for b in 0..qs {
            let s: Vec<u32> = digs[a].iter().zip(&digs[b]).map(|(x, y)| (x + y) % p).collect();
            add[a * qs + b] = undigits(&s, p);
            if b >= a {
                let prod = undigits(&poly_mul_mod(&digs[a], &digs[b], modulus, p), p);
                mul[a * qs + b] = prod;
                mul[b * qs + a] = prod;
            }
        }
    }
    let mut neg = vec![0u32; qs];
    let mut inv = vec![0u32; qs];
    for a in 0..qs {
        neg[a] = (0..q).find(|&b| add[a * qs + b as usize] == 0).unwrap();
        if a != 0 {
            inv[a] = (1..q).find(|&b| mul[a * qs + b as usize] == 1).unwrap_or(0);
        }
    }
    Arith::Tables { add, mul, neg, inv }
}

impl Field {
    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    pub fn degree(&self) -> u32 {
        self.0.m
    }

    pub fn order(&self) -> u32 {
        self.0.q
    }

    /// Modulus coefficients (least-significant first), present iff `m > 1`.
    pub fn modulus(&self) -> Option<&[u32]> {
        self.0.modulus.as_deref()
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        v < self.0.q
    }

    pub fn check(&self, v: u32) -> Result<u32> {
        if self.contains(v) {
            Ok(v)
        } else {
            Err(FieldError::OutOfRange { value: v, q: self.0.q })
        }
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.0.arith {
            Arith::Prime => {
                let s = a + b;
                if s >= self.0.p {
                    s - self.0.p
                } else {
                    s
                }
            }
            Arith::Tables { add, .. } => add[(a * self.0.q + b) as usize],
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        match &self.0.arith {
            Arith::Prime => {
                if a == 0 {
                    0
                } else {
                    self.0.p - a
                }
            }
            Arith::Tables { neg, .. } => neg[a as usize],
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.0.arith {
            Arith::Prime => ((a as u64 * b as u64) % self.0.p as u64) as u32,
            Arith::Tables { mul, .. } => mul[(a * self.0.q + b) as usize],
        }
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        match &self.0.arith {
            Arith::Prime => Some(self.pow(a, self.0.p - 2)),
            Arith::Tables { inv, .. } => Some(inv[a as usize]),
        }
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    pub fn pow(&self, mut base: u32, mut exp: u32) -> u32 {
        let mut acc = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Element with the given integer encoding.
    pub fn elem(&self, value: u32) -> Result<FieldElement> {
        self.check(value)?;
        Ok(FieldElement {
            value,
            field: self.clone(),
        })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            value: 0,
            field: self.clone(),
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            value: 1,
            field: self.clone(),
        }
    }

    /// All elements in ascending encoding order.
    pub fn enumerate_elements(&self) -> Vec<FieldElement> {
        (0..self.0.q)
            .map(|value| FieldElement {
                value,
                field: self.clone(),
            })
            .collect()
    }
}

/// A field element tagged with its field.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    value: u32,
    field: Field,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{:?}", self.value, self.field)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

/// Applies `op` to two elements of the same field.
pub fn arithmetic(a: &FieldElement, b: &FieldElement, op: Op) -> Result<FieldElement> {
    if a.field != b.field {
        return Err(FieldError::FieldMismatch(a.field.order(), b.field.order()));
    }
    let f = &a.field;
    let value = match op {
        Op::Add => f.add(a.value, b.value),
        Op::Sub => f.sub(a.value, b.value),
        Op::Mul => f.mul(a.value, b.value),
        Op::Div => f.div(a.value, b.value).ok_or(FieldError::DivisionByZero)?,
    };
    Ok(FieldElement {
        value,
        field: f.clone(),
    })
}

impl FieldElement {
    pub fn from_int(field: &Field, value: u32) -> Result<Self> {
        field.elem(value)
    }

    pub fn to_int(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        arithmetic(self, rhs, Op::Add)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        arithmetic(self, rhs, Op::Sub)
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        arithmetic(self, rhs, Op::Mul)
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        arithmetic(self, rhs, Op::Div)
    }
}

/// Brute-force irreducibility test for a monic polynomial over GF(p)
/// (coefficients least-significant first). Intended for small degrees.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg == 0 || poly[deg] != 1 {
        return false;
    }
    // trial division by every monic polynomial of degree 1..=deg/2
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut divisor = digits(low as u32, p, d as u32);
            divisor.push(1);
            if poly_rem(poly, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (t, &bc) in b.iter().enumerate() {
                r[shift + t] = (r[shift + t] + (p - lead) * bc % p) % p;
            }
        }
        r.pop();
    }
    r
}
