//! Finite field arithmetic over GF(q), q = p^r, with integer element labels.
//!
//! An element is identified by its label in `0..q`. For r > 1 an element is a
//! polynomial `c_0 + c_1 z + ... + c_{r-1} z^{r-1}` in a root `z` of the
//! modulus, and its label is `c_0 + c_1 p + ... + c_{r-1} p^{r-1}`: the p-ary
//! digits read from the most significant end are the coefficients of
//! `z^{r-1}, ..., z, 1`. For r = 1 labels are the residues mod p.
//!
//! Vectors in F_q^k are indexed by `j in 1..q^k`, coordinate `i` being the
//! `i`-th most significant base-q digit of `j`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field size.
pub const MAX_FIELD_SIZE: u32 = 1 << 16;

/// A field element, stored as its integer label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Wraps a raw label without range checking; see [`FieldSpec::element`].
    pub const fn from_label_unchecked(label: u32) -> Self {
        FieldElement(label)
    }

    pub fn label(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// GF(p^r) together with its arithmetic tables.
///
/// Immutable after construction; cloning copies the tables.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "FieldRepr", try_from = "FieldRepr")]
pub struct FieldSpec {
    p: u32,
    r: u32,
    q: u32,
    /// Monic modulus, low-degree coefficient first (r + 1 entries). Empty when r = 1.
    modulus: Vec<u32>,
    /// `exp[i]` is the label of `g^i` for a fixed primitive element `g`.
    exp: Vec<u32>,
    /// `log[a]` is the discrete log of label `a`; `log[0]` is unused.
    log: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    p: u32,
    r: u32,
    #[serde(default)]
    modulus: Vec<u32>,
}

impl From<FieldSpec> for FieldRepr {
    fn from(f: FieldSpec) -> Self {
        FieldRepr {
            p: f.p,
            r: f.r,
            modulus: f.modulus,
        }
    }
}

impl TryFrom<FieldRepr> for FieldSpec {
    type Error = Error;

    fn try_from(repr: FieldRepr) -> Result<Self> {
        if repr.modulus.is_empty() {
            FieldSpec::new(repr.p, repr.r)
        } else {
            FieldSpec::with_modulus(repr.p, repr.r, &repr.modulus)
        }
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("modulus", &self.modulus)
            .finish()
    }
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

/// Splits `q` as `p^r` with `p` prime, or `None` if `q` is not a prime power.
pub fn prime_power_decomposition(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut rest = q;
    let mut r = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        r += 1;
    }
    (rest == 1).then_some((p as u32, r))
}

pub fn is_prime_power(q: u64) -> bool {
    prime_power_decomposition(q).is_some()
}

/// Prime powers in `lo..=hi`, ascending.
pub fn prime_powers_between(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..=hi).filter(|&q| is_prime_power(q)).collect()
}

// Polynomials over F_p as coefficient vectors, low degree first.

fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    // p is small, so exponentiation by p - 2 is fine.
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

/// Remainder of `a` modulo the non-zero polynomial `m`.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let m = poly_trim(m.to_vec());
    let mut a = poly_trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod_p(m[dm], p);
    while a.len() > dm {
        let da = a.len() - 1;
        let factor = (a[da] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &c) in m.iter().enumerate() {
            let idx = da - dm + i;
            let sub = (factor as u64 * c as u64 % p as u64) as u32;
            a[idx] = (a[idx] + p - sub) % p;
        }
        a = poly_trim(a);
    }
    a
}

/// Monic polynomials of the given degree, enumerated with the constant
/// coefficient varying slowest (lexicographic order, low degree first).
fn monic_polys(p: u32, degree: u32) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as u64).pow(degree);
    (0..count).map(move |mut idx| {
        let mut coeffs = vec![0u32; degree as usize + 1];
        for c in coeffs[..degree as usize].iter_mut().rev() {
            *c = (idx % p as u64) as u32;
            idx /= p as u64;
        }
        coeffs[degree as usize] = 1;
        coeffs
    })
}

/// Irreducibility over F_p by trial division with every monic polynomial of
/// degree at most half the degree.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let poly = poly_trim(poly.to_vec());
    if poly.len() < 2 {
        return false;
    }
    let degree = (poly.len() - 1) as u32;
    for d in 1..=degree / 2 {
        for divisor in monic_polys(p, d) {
            if poly_rem(&poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FieldSpec {
    /// GF(p^r) using the lexicographically smallest monic irreducible
    /// modulus of degree r (coefficients compared low degree first).
    pub fn new(p: u32, r: u32) -> Result<Self> {
        Self::validate_params(p, r)?;
        if r == 1 {
            return Self::build(p, 1, Vec::new());
        }
        let modulus = monic_polys(p, r)
            .find(|m| is_irreducible(m, p))
            .expect("an irreducible polynomial exists in every degree");
        Self::build(p, r, modulus)
    }

    /// GF(q) for a prime power `q`.
    pub fn of_order(q: u64) -> Result<Self> {
        let (p, r) = prime_power_decomposition(q)
            .ok_or_else(|| Error::invalid(format!("{q} is not a prime power")))?;
        Self::new(p, r)
    }

    /// GF(p^r) with an explicitly chosen modulus (monic, irreducible, degree r,
    /// low-degree coefficient first). Any such choice yields an isomorphic field.
    pub fn with_modulus(p: u32, r: u32, modulus: &[u32]) -> Result<Self> {
        Self::validate_params(p, r)?;
        if r == 1 {
            if modulus.is_empty() || modulus == [0, 1] {
                return Self::build(p, 1, Vec::new());
            }
            return Err(Error::invalid("prime fields take no modulus"));
        }
        if modulus.len() != r as usize + 1 || modulus[r as usize] != 1 {
            return Err(Error::invalid(format!(
                "modulus must be monic of degree {r} with {} coefficients",
                r + 1
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::invalid("modulus coefficient out of range"));
        }
        if !is_irreducible(modulus, p) {
            return Err(Error::invalid(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        Self::build(p, r, modulus.to_vec())
    }

    fn validate_params(p: u32, r: u32) -> Result<()> {
        if !is_prime(p as u64) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        if r < 1 {
            return Err(Error::invalid("extension degree must be at least 1"));
        }
        match (p as u64).checked_pow(r) {
            Some(q) if q <= MAX_FIELD_SIZE as u64 => Ok(()),
            _ => Err(Error::invalid(format!(
                "field size {p}^{r} exceeds the supported maximum {MAX_FIELD_SIZE}"
            ))),
        }
    }

    fn build(p: u32, r: u32, modulus: Vec<u32>) -> Result<Self> {
        let q = p.pow(r);
        let mut field = FieldSpec {
            p,
            r,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
        };
        if r > 1 {
            field.build_log_tables();
        }
        Ok(field)
    }

    fn digits(&self, label: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.r as usize);
        let mut x = label;
        for _ in 0..self.r {
            out.push(x % self.p);
            x /= self.p;
        }
        out
    }

    fn label_of_digits(&self, digits: &[u32]) -> u32 {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    fn poly_mul_label(&self, a: u32, b: u32) -> u32 {
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u32; da.len() + db.len()];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % self.p as u64) as u32;
            }
        }
        let mut rem = poly_rem(&prod, &self.modulus, self.p);
        rem.resize(self.r as usize, 0);
        self.label_of_digits(&rem)
    }

    fn build_log_tables(&mut self) {
        let order = self.q - 1;
        let generator = (2..self.q)
            .find(|&g| {
                let mut x = 1;
                for i in 1..=order {
                    x = self.poly_mul_label(x, g);
                    if x == 1 {
                        return i == order;
                    }
                }
                false
            })
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; self.q as usize];
        let mut x = 1;
        for i in 0..order {
            exp.push(x);
            log[x as usize] = i;
            x = self.poly_mul_label(x, generator);
        }
        self.exp = exp;
        self.log = log;
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The element with the given label.
    pub fn element(&self, label: u32) -> Result<FieldElement> {
        if label < self.q {
            Ok(FieldElement(label))
        } else {
            Err(Error::invalid(format!("label {label} out of range for GF({})", self.q)))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.r == 1 {
            return FieldElement((a.0 + b.0) % self.p);
        }
        if self.p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        FieldElement(out)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if self.r == 1 {
            return FieldElement((self.p - a.0) % self.p);
        }
        if self.p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += ((self.p - x % self.p) % self.p) * place;
            x /= self.p;
            place *= self.p;
        }
        FieldElement(out)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        if self.r == 1 {
            return FieldElement(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32);
        }
        let order = self.q - 1;
        let e = (self.log[a.0 as usize] + self.log[b.0 as usize]) % order;
        FieldElement(self.exp[e as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        if self.r == 1 {
            return Ok(FieldElement(inv_mod_p(a.0, self.p)));
        }
        let order = self.q - 1;
        let e = (order - self.log[a.0 as usize]) % order;
        Ok(FieldElement(self.exp[e as usize]))
    }

    /// Number of non-zero vectors in F_q^k, or an error if it does not fit in u64.
    pub fn nonzero_vector_count(&self, k: usize) -> Result<u64> {
        (self.q as u64)
            .checked_pow(k as u32)
            .map(|n| n - 1)
            .ok_or_else(|| Error::Budget(format!("q^k overflows for q = {}, k = {k}", self.q)))
    }

    /// The vector `v_j` of F_q^k.
    pub fn vector_of_index(&self, j: u64, k: usize) -> Result<IndexedVector> {
        let total = self.nonzero_vector_count(k)?;
        if j < 1 || j > total {
            return Err(Error::invalid(format!("vector index {j} outside 1..={total}")));
        }
        let mut coords = vec![FieldElement::ZERO; k];
        let mut rest = j;
        for c in coords.iter_mut().rev() {
            *c = FieldElement((rest % self.q as u64) as u32);
            rest /= self.q as u64;
        }
        Ok(IndexedVector { index: j, coords })
    }

    /// Inverse of [`FieldSpec::vector_of_index`]; zero vectors have no index.
    pub fn index_of_vector(&self, coords: &[FieldElement]) -> Result<u64> {
        let mut j: u64 = 0;
        for c in coords {
            if c.0 >= self.q {
                return Err(Error::invalid(format!("label {} out of range", c.0)));
            }
            j = j
                .checked_mul(self.q as u64)
                .and_then(|x| x.checked_add(c.0 as u64))
                .ok_or_else(|| Error::Budget("vector index overflows u64".into()))?;
        }
        if j == 0 {
            return Err(Error::invalid("the zero vector has no index"));
        }
        Ok(j)
    }

    /// Multiplies every coordinate by `c`.
    pub fn scale(&self, c: FieldElement, v: &[FieldElement]) -> Vec<FieldElement> {
        v.iter().map(|&x| self.mul(c, x)).collect()
    }

    /// Standard bilinear form `sum_i a_i b_i`.
    pub fn dot(&self, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
        a.iter()
            .zip(b)
            .fold(FieldElement::ZERO, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    /// Scales `v` so its first non-zero coordinate is 1. Returns `None` for the zero vector.
    pub fn canonicalize(&self, v: &[FieldElement]) -> Option<Vec<FieldElement>> {
        let lead = *v.iter().find(|c| !c.is_zero())?;
        let inv = self.inv(lead).expect("lead is non-zero");
        Some(self.scale(inv, v))
    }

    /// Parses a list of labels into a vector of field elements.
    pub fn vector_from_labels(&self, labels: &[u32]) -> Result<Vec<FieldElement>> {
        labels.iter().map(|&l| self.element(l)).collect()
    }
}

/// A non-zero vector `v_j` of F_q^k together with its index `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexedVector {
    pub index: u64,
    pub coords: Vec<FieldElement>,
}

impl IndexedVector {
    pub fn labels(&self) -> Vec<u32> {
        self.coords.iter().map(|c| c.label()).collect()
    }
}
