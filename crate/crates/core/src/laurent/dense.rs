// Kernels on dense coefficient vectors with implicit lowest exponent 0.
// Every function returns exactly `len` coefficients.

use crate::error::{Error, Result};
use crate::finite_field::{FqElem, FqField};

fn digit_planes(f: &FqField, a: &[FqElem]) -> Vec<Vec<u32>> {
    let n = f.degree();
    let p = f.p();
    let mut planes = vec![vec![0u32; a.len()]; n];
    for (k, &c) in a.iter().enumerate() {
        let mut x = c.index();
        for plane in planes.iter_mut() {
            plane[k] = x % p;
            x /= p;
        }
    }
    planes
}

fn convolve_into(acc: &mut [u64], a: &[u32], b: &[u32]) {
    let len = acc.len();
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0 {
            continue;
        }
        let x = x as u64;
        let top = (len - i).min(b.len());
        for (slot, &y) in acc[i..i + top].iter_mut().zip(&b[..top]) {
            *slot += x * y as u64;
        }
    }
}

fn convolve_into_u32(acc: &mut [u32], a: &[u32], b: &[u32]) {
    let len = acc.len();
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0 {
            continue;
        }
        let top = (len - i).min(b.len());
        for (slot, &y) in acc[i..i + top].iter_mut().zip(&b[..top]) {
            *slot += x * y;
        }
    }
}

/// First `len` coefficients of `a * b`.
pub(crate) fn mul(f: &FqField, a: &[FqElem], b: &[FqElem], len: usize) -> Vec<FqElem> {
    let a = &a[..a.len().min(len)];
    let b = &b[..b.len().min(len)];
    let p = f.p() as u64;
    if f.degree() == 1 {
        let au: Vec<u32> = a.iter().map(|c| c.index()).collect();
        let bu: Vec<u32> = b.iter().map(|c| c.index()).collect();
        let terms = a.len().min(b.len()) as u64;
        if (p - 1) * (p - 1) * terms.max(1) < u32::MAX as u64 {
            let mut acc = vec![0u32; len];
            convolve_into_u32(&mut acc, &au, &bu);
            return acc
                .into_iter()
                .map(|x| FqElem(x % p as u32))
                .collect();
        }
        let mut acc = vec![0u64; len];
        convolve_into(&mut acc, &au, &bu);
        return acc.into_iter().map(|x| FqElem((x % p) as u32)).collect();
    }
    let n = f.degree();
    let pa = digit_planes(f, a);
    let pb = digit_planes(f, b);
    let mut acc = vec![vec![0u64; len]; 2 * n - 1];
    for (u, plane_a) in pa.iter().enumerate() {
        for (v, plane_b) in pb.iter().enumerate() {
            convolve_into(&mut acc[u + v], plane_a, plane_b);
        }
    }
    let mut wide = vec![0u64; 2 * n - 1];
    (0..len)
        .map(|k| {
            for (r, slot) in wide.iter_mut().enumerate() {
                *slot = acc[r][k];
            }
            f.pack_wide(&wide)
        })
        .collect()
}

fn sub_from_const(f: &FqField, c: FqElem, a: &[FqElem]) -> Vec<FqElem> {
    let mut out: Vec<FqElem> = a.iter().map(|&x| f.neg(x)).collect();
    out[0] = f.add(out[0], c);
    out
}

/// Inverse of a unit (a[0] != 0) to `len` terms, by Newton iteration.
pub(crate) fn inv(f: &FqField, a: &[FqElem], len: usize) -> Result<Vec<FqElem>> {
    if a.is_empty() || a[0].is_zero() {
        return Err(Error::DivisionByZero);
    }
    let mut g = vec![f.inv(a[0])?];
    let two = f.from_int(2);
    let mut cur = 1;
    while cur < len {
        cur = (2 * cur).min(len);
        let e = mul(f, a, &g, cur);
        let corr = sub_from_const(f, two, &e);
        g = mul(f, &g, &corr, cur);
    }
    g.resize(len, FqElem::ZERO);
    g.truncate(len);
    Ok(g)
}

pub(crate) fn one(len: usize) -> Vec<FqElem> {
    let mut v = vec![FqElem::ZERO; len];
    if len > 0 {
        v[0] = FqElem::ONE;
    }
    v
}

pub(crate) fn pow(f: &FqField, a: &[FqElem], mut k: u64, len: usize) -> Vec<FqElem> {
    let mut result = one(len);
    let mut base: Vec<FqElem> = a[..a.len().min(len)].to_vec();
    base.resize(len, FqElem::ZERO);
    let mut first = true;
    while k > 0 {
        if k & 1 == 1 {
            result = if first {
                base.clone()
            } else {
                mul(f, &result, &base, len)
            };
            first = false;
        }
        k >>= 1;
        if k > 0 {
            base = mul(f, &base, &base, len);
        }
    }
    result
}

pub(crate) fn pow_signed(f: &FqField, a: &[FqElem], k: i64, len: usize) -> Result<Vec<FqElem>> {
    if k >= 0 {
        Ok(pow(f, a, k as u64, len))
    } else {
        let i = inv(f, a, len)?;
        Ok(pow(f, &i, k.unsigned_abs(), len))
    }
}

/// The m-th root with constant term 1 of a unit with constant term 1.
pub(crate) fn one_unit_root(f: &FqField, u: &[FqElem], m: u64, len: usize) -> Result<Vec<FqElem>> {
    debug_assert_eq!(u[0], FqElem::ONE);
    let inv_m = f.inv(f.from_int(m as i64))?;
    let mut y = one(1);
    let mut cur = 1;
    while cur < len {
        cur = (2 * cur).min(len);
        y.resize(cur, FqElem::ZERO);
        let z = pow(f, &y, m - 1, cur);
        let ym = mul(f, &z, &y, cur);
        let diff: Vec<FqElem> = (0..cur)
            .map(|k| f.sub(ym[k], u.get(k).copied().unwrap_or(FqElem::ZERO)))
            .collect();
        let step = mul(f, &diff, &inv(f, &z, cur)?, cur);
        for k in 0..cur {
            y[k] = f.sub(y[k], f.mul(step[k], inv_m));
        }
    }
    y.resize(len, FqElem::ZERO);
    Ok(y)
}

fn axpy(f: &FqField, acc: &mut [FqElem], c: FqElem, x: &[FqElem]) {
    if c.is_zero() {
        return;
    }
    for (slot, &v) in acc.iter_mut().zip(x) {
        if !v.is_zero() {
            *slot = f.add(*slot, f.mul(c, v));
        }
    }
}

/// `sum_k h[k] g^k` to `len` terms, where `g` has zero constant term.
/// Baby-step giant-step: about `2 sqrt(h.len())` full multiplications.
pub(crate) fn compose(f: &FqField, h: &[FqElem], g: &[FqElem], len: usize) -> Vec<FqElem> {
    let k_terms = h.len();
    if k_terms == 0 {
        return vec![FqElem::ZERO; len];
    }
    let r = ((k_terms as f64).sqrt().ceil() as usize).max(1);
    let mut baby = Vec::with_capacity(r + 1);
    baby.push(one(len));
    let mut gl = g[..g.len().min(len)].to_vec();
    gl.resize(len, FqElem::ZERO);
    for i in 1..=r {
        let next = if i == 1 {
            gl.clone()
        } else {
            mul(f, &baby[i - 1], &gl, len)
        };
        baby.push(next);
    }
    let blocks = k_terms.div_ceil(r);
    let block = |j: usize| {
        let mut acc = vec![FqElem::ZERO; len];
        for i in 0..r {
            if let Some(&c) = h.get(j * r + i) {
                axpy(f, &mut acc, c, &baby[i]);
            }
        }
        acc
    };
    let mut acc = block(blocks - 1);
    for j in (0..blocks - 1).rev() {
        acc = mul(f, &acc, &baby[r], len);
        let b = block(j);
        for (slot, v) in acc.iter_mut().zip(b) {
            *slot = f.add(*slot, v);
        }
    }
    acc
}
