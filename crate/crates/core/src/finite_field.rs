//! Arithmetic in the residue field F_q = F_p[w]/(m(w)).
//!
//! Elements are packed as the integer `sum c_i p^i` of their coefficient
//! vector `(c_0, .., c_{n-1})` in the basis `1, w, .., w^{n-1}`; multiplication
//! goes through discrete log tables, which is fine for the residue fields
//! used here (q is at most a few thousand).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported field size.
pub const MAX_Q: u64 = 1 << 20;

/// Shared handle to a residue field.
pub type Fq = Arc<FqField>;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FqElem(pub(crate) u32);

impl FqElem {
    pub const ZERO: FqElem = FqElem(0);
    pub const ONE: FqElem = FqElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Packed index `sum c_i p^i`.
    pub fn index(self) -> u32 {
        self.0
    }
}

pub struct FqField {
    p: u32,
    n: usize,
    q: u32,
    modulus: Vec<u32>,
    // exp[k] = g^k for a fixed primitive element g, log is its inverse
    exp: Vec<u32>,
    log: Vec<u32>,
    // w^r reduced mod the modulus, r < 2n - 1
    wpow: Vec<Vec<u32>>,
}

impl fmt::Debug for FqField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {:?}", self.p, self.n, self.modulus)
    }
}

impl PartialEq for FqField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.n == other.n && self.modulus == other.modulus
    }
}

impl Eq for FqField {}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
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

// Dense polynomials over F_p, little-endian, used only at construction time.
mod fp_poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let inv_lead = inv_mod(m[dm], p);
        while r.len() > dm {
            let top = r.len() - 1;
            let c = (r[top] as u64 * inv_lead as u64 % p as u64) as u32;
            let shift = top - dm;
            for (k, &mk) in m.iter().enumerate() {
                let sub = (c as u64 * mk as u64 % p as u64) as u32;
                r[shift + k] = (r[shift + k] + p - sub) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = a as u64 % p as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    }

    /// Monic polynomial of degree `d` with lower coefficients given by the
    /// base-p digits of `idx`.
    pub fn monic_from_index(mut idx: u64, d: usize, p: u32) -> Vec<u32> {
        let mut v = Vec::with_capacity(d + 1);
        for _ in 0..d {
            v.push((idx % p as u64) as u32);
            idx /= p as u64;
        }
        v.push(1);
        v
    }

    pub fn is_irreducible(m: &[u32], p: u32) -> bool {
        let n = m.len() - 1;
        if n == 0 || m[n] == 0 {
            return false;
        }
        for d in 1..=n / 2 {
            let count = (p as u64).pow(d as u32);
            for idx in 0..count {
                let f = monic_from_index(idx, d, p);
                if rem(m, &f, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

impl FqField {
    /// Builds F_{p^n}. Without a modulus, the smallest monic irreducible of
    /// degree n (ordered by packed coefficient index) is used.
    pub fn new(p: u64, n: usize, modulus: Option<Vec<u32>>) -> Result<Fq> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::InvalidSpec("residue degree must be positive".into()));
        }
        let q = (p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if q > MAX_Q as u128 {
            return Err(Error::FieldTooLarge(q.min(u64::MAX as u128) as u64));
        }
        let p32 = p as u32;
        let q = q as u32;
        let modulus = match modulus {
            Some(mut m) => {
                for c in m.iter_mut() {
                    *c %= p32;
                }
                if m.len() != n + 1 || m[n] != 1 || !fp_poly::is_irreducible(&m, p32) {
                    return Err(Error::ReducibleModulus(m));
                }
                m
            }
            None => {
                let count = p.pow(n as u32);
                (0..count)
                    .map(|idx| fp_poly::monic_from_index(idx, n, p32))
                    .find(|m| fp_poly::is_irreducible(m, p32))
                    .expect("irreducible polynomials exist in every degree")
            }
        };

        let mut wpow = Vec::with_capacity(2 * n);
        for r in 0..(2 * n - 1).max(2) {
            let mut mono = vec![0u32; r + 1];
            mono[r] = 1;
            let mut red = fp_poly::rem(&mono, &modulus, p32);
            red.resize(n, 0);
            wpow.push(red);
        }

        let mut field = FqField {
            p: p32,
            n,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            wpow,
        };
        field.build_log_tables();
        Ok(Arc::new(field))
    }

    pub fn prime(p: u64) -> Result<Fq> {
        Self::new(p, 1, None)
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let da = self.digits(FqElem(a));
        let db = self.digits(FqElem(b));
        let mut prod = vec![0u64; 2 * self.n - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] += x as u64 * y as u64;
            }
        }
        self.reduce_wide(&prod).0
    }

    fn build_log_tables(&mut self) {
        let order = (self.q - 1) as u64;
        if order == 0 {
            return;
        }
        let factors = prime_factors(order);
        let pow_slow = |f: &FqField, x: u32, mut e: u64| {
            let mut r = 1u32;
            let mut b = x;
            while e > 0 {
                if e & 1 == 1 {
                    r = f.mul_slow(r, b);
                }
                b = f.mul_slow(b, b);
                e >>= 1;
            }
            r
        };
        let g = (1..self.q)
            .find(|&x| factors.iter().all(|&r| pow_slow(self, x, order / r) != 1))
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; self.q as usize];
        let mut x = 1u32;
        for k in 0..order as u32 {
            exp.push(x);
            log[x as usize] = k;
            x = self.mul_slow(x, g);
        }
        self.exp = exp;
        self.log = log;
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FqElem {
        FqElem::ZERO
    }

    pub fn one(&self) -> FqElem {
        FqElem::ONE
    }

    /// The class of the modulus root `w`.
    pub fn generator_w(&self) -> FqElem {
        self.from_digits(&self.wpow[1])
    }

    pub fn from_int(&self, k: i64) -> FqElem {
        FqElem(k.rem_euclid(self.p as i64) as u32)
    }

    pub fn from_digits(&self, digits: &[u32]) -> FqElem {
        let mut v = 0u32;
        for &d in digits.iter().take(self.n).rev() {
            v = v * self.p + d % self.p;
        }
        FqElem(v)
    }

    /// Coefficient vector, little-endian in the modulus root.
    pub fn digits(&self, a: FqElem) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.n);
        let mut x = a.0;
        for _ in 0..self.n {
            v.push(x % self.p);
            x /= self.p;
        }
        v
    }

    fn reduce_wide(&self, prod: &[u64]) -> FqElem {
        let p = self.p as u64;
        let mut out = vec![0u64; self.n];
        for (r, &c) in prod.iter().enumerate() {
            let c = c % p;
            if c == 0 {
                continue;
            }
            for (k, &w) in self.wpow[r].iter().enumerate() {
                out[k] += c * w as u64;
            }
        }
        let digits: Vec<u32> = out.iter().map(|&c| (c % p) as u32).collect();
        self.from_digits(&digits)
    }

    /// Reduces a product given as `2n - 1` wide coefficient accumulators.
    pub(crate) fn pack_wide(&self, prod: &[u64]) -> FqElem {
        if self.n == 1 {
            FqElem((prod[0] % self.p as u64) as u32)
        } else {
            self.reduce_wide(prod)
        }
    }

    pub fn is_prime_field(&self) -> bool {
        self.n == 1
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        (0..self.q).map(FqElem)
    }

    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        if self.n == 1 {
            let s = a.0 + b.0;
            return FqElem(if s >= self.p { s - self.p } else { s });
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut v = 0u32;
        let mut place = 1u32;
        for _ in 0..self.n {
            let d = (x % self.p + y % self.p) % self.p;
            v += d * place;
            place *= self.p;
            x /= self.p;
            y /= self.p;
        }
        FqElem(v)
    }

    pub fn neg(&self, a: FqElem) -> FqElem {
        if self.n == 1 {
            return FqElem(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        let mut x = a.0;
        let mut v = 0u32;
        let mut place = 1u32;
        for _ in 0..self.n {
            let d = (self.p - x % self.p) % self.p;
            v += d * place;
            place *= self.p;
            x /= self.p;
        }
        FqElem(v)
    }

    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        if a.0 == 0 || b.0 == 0 {
            return FqElem::ZERO;
        }
        let order = self.q - 1;
        let k = self.log[a.0 as usize] + self.log[b.0 as usize];
        FqElem(self.exp[(if k >= order { k - order } else { k }) as usize])
    }

    pub fn inv(&self, a: FqElem) -> Result<FqElem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let order = self.q - 1;
        let k = self.log[a.0 as usize];
        Ok(FqElem(self.exp[((order - k) % order) as usize]))
    }

    pub fn div(&self, a: FqElem, b: FqElem) -> Result<FqElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FqElem, k: i64) -> Result<FqElem> {
        if a.0 == 0 {
            return match k {
                0 => Ok(FqElem::ONE),
                k if k > 0 => Ok(FqElem::ZERO),
                _ => Err(Error::DivisionByZero),
            };
        }
        let order = (self.q - 1) as i64;
        let e = (self.log[a.0 as usize] as i64 * k.rem_euclid(order)).rem_euclid(order);
        Ok(FqElem(self.exp[e as usize]))
    }

    /// `pow` with a non-negative exponent, which cannot fail.
    pub(crate) fn pow_u(&self, a: FqElem, k: u64) -> FqElem {
        if a.0 == 0 {
            return if k == 0 { FqElem::ONE } else { FqElem::ZERO };
        }
        let order = (self.q - 1) as u64;
        let e = self.log[a.0 as usize] as u64 * (k % order) % order;
        FqElem(self.exp[e as usize])
    }

    /// Scalar multiple by an integer.
    pub fn scale_int(&self, a: FqElem, k: i64) -> FqElem {
        self.mul(a, self.from_int(k))
    }

    pub fn frobenius(&self, a: FqElem) -> FqElem {
        self.pow_u(a, self.p as u64)
    }

    /// The unique `y` with `y^p = x`, namely `x^(p^(n-1))`.
    pub fn pth_root(&self, a: FqElem) -> FqElem {
        self.pow_u(a, (self.p as u64).pow(self.n as u32 - 1))
    }

    /// `x^p - x`.
    pub fn wp(&self, a: FqElem) -> FqElem {
        self.sub(self.frobenius(a), a)
    }

    /// Whether `c` lies in the image of `x -> x^p - x`, by enumeration.
    pub fn is_wp_image(&self, c: FqElem) -> bool {
        self.elements().any(|d| self.wp(d) == c)
    }

    /// Multiplicative order of a non-zero element.
    pub fn order(&self, a: FqElem) -> Result<u64> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let order = (self.q - 1) as u64;
        let k = self.log[a.0 as usize] as u64;
        Ok(order / num_integer::gcd(order, k))
    }

    /// The smallest (by packed index) element of multiplicative order exactly `m`.
    pub fn root_of_unity(&self, m: u64) -> Result<FqElem> {
        if m == 0 || m.is_multiple_of(self.p as u64) {
            return Err(Error::NotCoprime {
                m,
                p: self.p as u64,
            });
        }
        if !(self.q as u64 - 1).is_multiple_of(m) {
            return Err(Error::NoSuchRoot {
                m,
                q: self.q as u64,
            });
        }
        let found = self
            .elements()
            .skip(1)
            .find(|&x| self.order(x).map(|o| o == m).unwrap_or(false));
        found.ok_or(Error::NoSuchRoot {
            m,
            q: self.q as u64,
        })
    }

    /// The smallest (by packed index) `y` with `y^m = c`, if any.
    pub fn nth_root(&self, c: FqElem, m: u64) -> Option<FqElem> {
        if c.is_zero() {
            return Some(FqElem::ZERO);
        }
        self.elements()
            .skip(1)
            .find(|&y| self.pow_u(y, m) == c)
    }

    pub fn format(&self, a: FqElem) -> String {
        if self.n == 1 {
            return a.0.to_string();
        }
        let digits = self.digits(a);
        let mut terms = Vec::new();
        for (k, &d) in digits.iter().enumerate().rev() {
            if d == 0 {
                continue;
            }
            let coeff = if d == 1 && k > 0 {
                String::new()
            } else {
                d.to_string()
            };
            terms.push(match k {
                0 => coeff,
                1 => format!("{coeff}w"),
                _ => format!("{coeff}w^{k}"),
            });
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}
