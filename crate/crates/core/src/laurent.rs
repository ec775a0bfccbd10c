//! Truncated Laurent series over F_q with absolute precision.
//!
//! A series `sum_{e >= val} c_e s^e + O(s^prec)` stores every coefficient
//! from `val` to `prec - 1`. Every operation computes the exact propagated
//! precision of its result; a series whose known coefficients are all zero
//! is kept as "zero to precision prec" and has no valuation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::finite_field::{Fq, FqElem};

mod dense;

#[derive(Clone)]
pub struct LaurentSeries {
    field: Fq,
    // exponent of coeffs[0]; equals prec when the series is indeterminate
    val: i64,
    coeffs: Vec<FqElem>,
    prec: i64,
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format("s"))
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format("t"))
    }
}

fn same_field(a: &Fq, b: &Fq) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::FieldMismatch)
    }
}

impl LaurentSeries {
    /// Builds `sum_k coeffs[k] s^(val + k) + O(s^prec)`; missing coefficients
    /// below `prec` are zero.
    pub fn new(field: &Fq, val: i64, mut coeffs: Vec<FqElem>, prec: i64) -> Self {
        let len = (prec - val).max(0) as usize;
        coeffs.truncate(len);
        coeffs.resize(len, FqElem::ZERO);
        let mut s = LaurentSeries {
            field: field.clone(),
            val,
            coeffs,
            prec,
        };
        s.normalize();
        s
    }

    /// The series known to be zero below `prec`.
    pub fn zero(field: &Fq, prec: i64) -> Self {
        LaurentSeries {
            field: field.clone(),
            val: prec,
            coeffs: Vec::new(),
            prec,
        }
    }

    pub fn monomial(field: &Fq, c: FqElem, exp: i64, prec: i64) -> Self {
        Self::new(field, exp, vec![c], prec)
    }

    pub fn one(field: &Fq, prec: i64) -> Self {
        Self::monomial(field, FqElem::ONE, 0, prec)
    }

    /// `s + O(s^prec)`.
    pub fn var(field: &Fq, prec: i64) -> Self {
        Self::monomial(field, FqElem::ONE, 1, prec)
    }

    /// Builds from small integer coefficients starting at exponent `val`.
    pub fn from_ints(field: &Fq, val: i64, ints: &[i64], prec: i64) -> Self {
        let coeffs = ints.iter().map(|&k| field.from_int(k)).collect();
        Self::new(field, val, coeffs, prec)
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(0) => {}
            Some(k) => {
                self.coeffs.drain(..k);
                self.val += k as i64;
            }
            None => {
                self.coeffs.clear();
                self.val = self.prec;
            }
        }
    }

    pub fn field(&self) -> &Fq {
        &self.field
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Number of known coefficients from the valuation up to the precision.
    pub fn rel_prec(&self) -> i64 {
        self.prec - self.val
    }

    pub fn is_indeterminate(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponent of the lowest non-zero term.
    pub fn valuation(&self) -> Result<i64> {
        if self.is_indeterminate() {
            Err(Error::ValuationIndeterminate)
        } else {
            Ok(self.val)
        }
    }

    /// Lower bound for the valuation: the exponent of the first term not
    /// known to vanish.
    pub fn val_bound(&self) -> i64 {
        self.val
    }

    pub fn leading_coeff(&self) -> Result<FqElem> {
        self.coeffs
            .first()
            .copied()
            .ok_or(Error::ValuationIndeterminate)
    }

    /// Coefficient of `s^e`, or `None` when `e >= prec`.
    pub fn coeff(&self, e: i64) -> Option<FqElem> {
        if e >= self.prec {
            None
        } else if e < self.val {
            Some(FqElem::ZERO)
        } else {
            Some(self.coeffs[(e - self.val) as usize])
        }
    }

    #[cfg(test)]
    pub(crate) fn coeffs(&self) -> &[FqElem] {
        &self.coeffs
    }

    /// Known non-zero terms as `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, FqElem)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(k, &c)| (self.val + k as i64, c))
    }

    /// Forgets every term at exponent `>= prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        let mut out = self.clone();
        out.prec = prec;
        if prec <= out.val {
            out.coeffs.clear();
            out.val = prec;
        } else {
            out.coeffs.truncate((prec - out.val) as usize);
        }
        out
    }

    /// Keeps at most `len` terms past the valuation.
    pub fn truncate_rel(&self, len: i64) -> Self {
        if self.is_indeterminate() {
            return self.clone();
        }
        self.truncate(self.val + len)
    }

    /// Claims zeros up to the new precision. Only sound when the caller
    /// knows the missing terms vanish (Newton iterations re-certify later).
    pub(crate) fn lift_prec(&self, prec: i64) -> Self {
        if prec <= self.prec {
            return self.truncate(prec);
        }
        if self.is_indeterminate() {
            return Self::zero(&self.field, prec);
        }
        let mut out = self.clone();
        out.coeffs.resize((prec - out.val) as usize, FqElem::ZERO);
        out.prec = prec;
        out
    }

    /// True when both series agree on every coefficient known to both.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let top = self.prec.min(other.prec);
        let low = self.val.min(other.val);
        (low..top).all(|e| self.coeff(e) == other.coeff(e))
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = f.neg(*c);
        }
        out
    }

    pub fn scale(&self, c: FqElem) -> Self {
        let f = &self.field;
        if c.is_zero() {
            return Self::zero(f, self.prec);
        }
        let mut out = self.clone();
        for x in out.coeffs.iter_mut() {
            *x = f.mul(*x, c);
        }
        out
    }

    /// Multiplication by `s^k`.
    pub fn shift(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.val += k;
        out.prec += k;
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_field(&self.field, &other.field)?;
        let f = &self.field;
        let prec = self.prec.min(other.prec);
        let val = self.val.min(other.val);
        if val >= prec {
            return Ok(Self::zero(f, prec));
        }
        let mut coeffs = vec![FqElem::ZERO; (prec - val) as usize];
        for src in [self, other] {
            for (k, &c) in src.coeffs.iter().enumerate() {
                let e = src.val + k as i64;
                if e >= prec {
                    break;
                }
                let slot = &mut coeffs[(e - val) as usize];
                *slot = f.add(*slot, c);
            }
        }
        let mut out = LaurentSeries {
            field: f.clone(),
            val,
            coeffs,
            prec,
        };
        out.normalize();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Adds `c s^e` exactly; `e` must lie below the precision.
    pub fn add_monomial(&self, c: FqElem, e: i64) -> Self {
        assert!(e < self.prec, "monomial beyond precision");
        let m = Self::new(&self.field, e, vec![c], self.prec);
        self.add(&m).expect("same field")
    }

    pub fn add_scalar(&self, c: FqElem) -> Result<Self> {
        if 0 >= self.prec {
            return Err(Error::PrecisionExhausted(
                "constant added below the known precision".into(),
            ));
        }
        Ok(self.add_monomial(c, 0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_field(&self.field, &other.field)?;
        let f = &self.field;
        let prec = (self.prec + other.val).min(other.prec + self.val);
        if self.is_indeterminate() || other.is_indeterminate() {
            return Ok(Self::zero(f, prec));
        }
        let val = self.val + other.val;
        let len = (prec - val) as usize;
        let coeffs = dense::mul(f, &self.coeffs, &other.coeffs, len);
        Ok(LaurentSeries {
            field: f.clone(),
            val,
            coeffs,
            prec,
        })
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_indeterminate() {
            return Err(Error::ValuationIndeterminate);
        }
        let f = &self.field;
        let len = self.coeffs.len();
        let coeffs = dense::inv(f, &self.coeffs, len)?;
        Ok(LaurentSeries {
            field: f.clone(),
            val: -self.val,
            coeffs,
            prec: -self.val + len as i64,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        if self.is_indeterminate() {
            if k > 0 {
                return Ok(Self::zero(&self.field, self.prec * k));
            }
            return Err(Error::ValuationIndeterminate);
        }
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let f = &self.field;
        let len = self.coeffs.len();
        if k == 0 {
            return Ok(Self::one(f, len as i64));
        }
        let coeffs = dense::pow(f, &self.coeffs, k as u64, len);
        let val = self.val * k;
        Ok(LaurentSeries {
            field: f.clone(),
            val,
            coeffs,
            prec: val + len as i64,
        })
    }

    /// `f(s^m)`.
    pub fn inflate(&self, m: i64) -> Self {
        assert!(m >= 1);
        let f = &self.field;
        if self.is_indeterminate() {
            return Self::zero(f, self.prec * m);
        }
        let mut coeffs = vec![FqElem::ZERO; self.coeffs.len() * m as usize];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[k * m as usize] = c;
        }
        LaurentSeries {
            field: f.clone(),
            val: self.val * m,
            coeffs,
            prec: self.prec * m,
        }
    }

    /// `f^p`, computed coefficient-wise.
    pub fn frobenius(&self) -> Self {
        let f = &self.field;
        let p = f.p() as i64;
        if self.is_indeterminate() {
            return Self::zero(f, self.prec * p);
        }
        let mut coeffs = vec![FqElem::ZERO; self.coeffs.len() * p as usize];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[k * p as usize] = f.frobenius(c);
        }
        LaurentSeries {
            field: f.clone(),
            val: self.val * p,
            coeffs,
            prec: self.prec * p,
        }
    }

    /// `f^p - f`.
    pub fn wp(&self) -> Self {
        self.frobenius().sub(self).expect("same field")
    }

    pub fn pth_root(&self) -> Result<Self> {
        let f = &self.field;
        let p = f.p() as i64;
        let prec = self.prec.div_euclid(p) + (self.prec.rem_euclid(p) != 0) as i64;
        if self.is_indeterminate() {
            return Ok(Self::zero(f, prec));
        }
        if self.terms().any(|(e, _)| e.rem_euclid(p) != 0) {
            return Err(Error::NotAPthPower);
        }
        let val = self.val / p;
        let coeffs = (val..prec)
            .map(|e| f.pth_root(self.coeff(e * p).unwrap_or(FqElem::ZERO)))
            .collect();
        Ok(Self::new(f, val, coeffs, prec))
    }

    /// An m-th root for m prime to p; the leading coefficient is the
    /// smallest m-th root of the given leading coefficient.
    pub fn nth_root(&self, m: u64) -> Result<Self> {
        let f = &self.field;
        if m == 0 || m.is_multiple_of(f.p() as u64) {
            return Err(Error::NotCoprime {
                m,
                p: f.p() as u64,
            });
        }
        let v = self.valuation()?;
        if v.rem_euclid(m as i64) != 0 {
            return Err(Error::NoNthRoot(m));
        }
        let lead = self.coeffs[0];
        let root = f.nth_root(lead, m).ok_or(Error::NoNthRoot(m))?;
        let len = self.coeffs.len();
        let inv_lead = f.inv(lead)?;
        let unit: Vec<FqElem> = self.coeffs.iter().map(|&c| f.mul(c, inv_lead)).collect();
        let mut coeffs = dense::one_unit_root(f, &unit, m, len)?;
        for c in coeffs.iter_mut() {
            *c = f.mul(*c, root);
        }
        let val = v / m as i64;
        Ok(LaurentSeries {
            field: f.clone(),
            val,
            coeffs,
            prec: val + len as i64,
        })
    }

    pub fn derivative(&self) -> Self {
        let f = &self.field;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| f.scale_int(c, self.val + k as i64))
            .collect();
        Self::new(f, self.val - 1, coeffs, self.prec - 1)
    }

    /// `self(g)` for `g` of positive valuation.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        same_field(&self.field, &g.field)?;
        let f = &self.field;
        if g.is_indeterminate() {
            return Err(Error::PrecisionExhausted(
                "composition with an indeterminate series".into(),
            ));
        }
        let d = g.val;
        if d <= 0 {
            return Err(Error::CompositionDomain(d));
        }
        if self.is_indeterminate() {
            return Ok(Self::zero(f, self.prec.saturating_mul(d)));
        }
        let lf = self.coeffs.len() as i64;
        let lg = g.coeffs.len() as i64;
        let out_len = (d * lf).min(lg) as usize;
        // unit part of g, so that g = s^d * unit
        let unit = &g.coeffs[..out_len.min(g.coeffs.len())];
        // h(g) with h = self / s^val, computed on the scale of s
        let terms = ((out_len as i64 + d - 1) / d).min(lf) as usize;
        let h = &self.coeffs[..terms];
        let mut g_dense = vec![FqElem::ZERO; out_len];
        for (k, &c) in unit.iter().enumerate() {
            let e = d as usize + k;
            if e < out_len {
                g_dense[e] = c;
            }
        }
        let body = dense::compose(f, h, &g_dense, out_len);
        let unit_pow = dense::pow_signed(f, unit, self.val, out_len)?;
        let coeffs = dense::mul(f, &body, &unit_pow, out_len);
        let val = d * self.val;
        let mut out = LaurentSeries {
            field: f.clone(),
            val,
            coeffs,
            prec: val + out_len as i64,
        };
        out.normalize();
        Ok(out)
    }

    /// Compositional inverse of a series of valuation 1.
    pub fn reverse(&self) -> Result<Self> {
        let f = &self.field;
        let v = self.valuation()?;
        if v != 1 {
            return Err(Error::NotAUniformizerSeries(v));
        }
        let len = self.coeffs.len() as i64;
        let deriv = self.derivative();
        let target = Self::var(f, 1 + len);
        let mut g = Self::monomial(f, f.inv(self.coeffs[0])?, 1, 2);
        let mut cur = 1;
        while cur < len {
            cur = (2 * cur).min(len);
            let lifted = g.lift_prec(1 + cur);
            let fg = self.truncate(1 + cur).compose(&lifted)?;
            let err = fg.sub(&target.truncate(1 + cur))?;
            let dg = deriv.compose(&lifted)?;
            let step = err.div(&dg)?;
            g = lifted.sub(&step)?.truncate(1 + cur);
        }
        Ok(g.truncate(1 + len))
    }

    pub fn format(&self, var: &str) -> String {
        let f = &self.field;
        let mut parts = Vec::new();
        for (e, c) in self.terms() {
            let coeff = f.format(c);
            let coeff = if f.is_prime_field() || !coeff.contains('+') {
                coeff
            } else {
                format!("({coeff})")
            };
            let mono = match e {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{e}"),
            };
            parts.push(match (coeff.as_str(), mono.is_empty()) {
                (_, true) => coeff,
                ("1", false) => mono,
                (_, false) => format!("{coeff}*{mono}"),
            });
        }
        parts.push(match self.prec {
            0 => "O(1)".to_string(),
            1 => format!("O({var})"),
            e => format!("O({var}^{e})"),
        });
        parts.join(" + ")
    }
}
