//! K-automorphisms of a built tower, realized as substitutions s -> sigma(s)
//! of the top uniformizer.
//!
//! An automorphism is pinned down by small data: for each tame step the
//! leading coefficient of sigma(u)/u, and for each Artin-Schreier step the
//! affine image sigma(g) = lambda g + sum n_j g_j + c over earlier wild
//! generators. Composition works on this data exactly; series are only
//! needed to find the data of a generating set and to read off lower
//! ramification numbers.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::finite_field::{Fq, FqElem, FqField};
use crate::laurent::LaurentSeries;
use crate::pgroups::FiniteGroupTable;
use crate::tower::{eval_laurent_poly, Derived, StepKind, TowerModel};

/// Lower numbers within this many terms of the working precision are not
/// trusted.
pub const GUARD: i64 = 4;
/// Relative precision the lower-number pass starts from.
const START_PRECISION: i64 = 64;
/// Up to this order every pair of the table is checked against series
/// composition; above it a seeded sample of `SAMPLE_PAIRS` pairs.
const CHECK_ALL_PAIRS: usize = 64;
const SAMPLE_PAIRS: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AutData {
    /// Leading coefficient of sigma(u)/u, one per tame step.
    pub tame: Vec<FqElem>,
    /// Row r: coefficients of sigma(g) on wild generators 0..=r, then the
    /// constant.
    pub wild: Vec<Vec<FqElem>>,
}

impl AutData {
    fn identity_prefix(tame: usize, wild: usize) -> Self {
        AutData {
            tame: vec![FqElem::ONE; tame],
            wild: (0..wild)
                .map(|r| {
                    let mut row = vec![FqElem::ZERO; r + 2];
                    row[r] = FqElem::ONE;
                    row
                })
                .collect(),
        }
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &AutData, f: &FqField) -> AutData {
        let tame = self
            .tame
            .iter()
            .zip(&other.tame)
            .map(|(&a, &b)| f.mul(a, b))
            .collect();
        let wild = other
            .wild
            .iter()
            .enumerate()
            .map(|(k, row)| {
                let mut out = vec![FqElem::ZERO; k + 2];
                for (m, &coef) in row[..=k].iter().enumerate() {
                    if coef.is_zero() {
                        continue;
                    }
                    let inner = &self.wild[m];
                    for l in 0..=m {
                        out[l] = f.add(out[l], f.mul(coef, inner[l]));
                    }
                    out[k + 1] = f.add(out[k + 1], f.mul(coef, inner[m + 1]));
                }
                out[k + 1] = f.add(out[k + 1], row[k + 1]);
                out
            })
            .collect();
        AutData { tame, wild }
    }

    /// sigma(g_r) = g_r for the wild generator r.
    pub fn fixes_wild(&self, r: usize) -> bool {
        let row = &self.wild[r];
        row[r] == FqElem::ONE && row.iter().enumerate().all(|(l, c)| l == r || c.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        *self == AutData::identity_prefix(self.tame.len(), self.wild.len())
    }
}

/// A generator of the group with its action on the top uniformizer.
#[derive(Clone, Debug)]
struct Realized {
    data: AutData,
    /// sigma(s) as a series in s.
    sigma: LaurentSeries,
}

/// The Galois group of a tower with lower ramification numbers.
#[derive(Clone, Debug)]
pub struct GaloisGroup {
    field: Fq,
    elements: Vec<AutData>,
    lower: Vec<Option<i64>>,
    table: FiniteGroupTable,
    generators: Vec<usize>,
    precision: i64,
    tame_degrees: Vec<u64>,
    series: Vec<LaurentSeries>,
}

impl GaloisGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[AutData] {
        &self.elements
    }

    pub fn table(&self) -> &FiniteGroupTable {
        &self.table
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// `i(sigma) = v(sigma(s) - s)`; `None` for the identity.
    pub fn lower_number(&self, idx: usize) -> Option<i64> {
        self.lower[idx]
    }

    pub fn lower_numbers(&self) -> &[Option<i64>] {
        &self.lower
    }

    /// sigma(s) to the relative precision used for the lower numbers.
    pub fn sigma_series(&self, idx: usize) -> &LaurentSeries {
        &self.series[idx]
    }

    pub fn series_precision(&self) -> i64 {
        self.precision
    }

    /// Elements with `i(sigma) >= 2` together with the identity.
    pub fn wild_subgroup(&self) -> Vec<usize> {
        (0..self.order())
            .filter(|&k| self.lower[k].is_none_or(|i| i >= 2))
            .collect()
    }

    /// Exponents e with leading coefficient zeta_M^e of sigma(u)/u, where M
    /// is the product of tame degrees up to that step.
    pub fn tame_exponents(&self, idx: usize) -> Vec<u64> {
        let f = &self.field;
        let mut total = 1;
        self.elements[idx]
            .tame
            .iter()
            .zip(&self.tame_degrees)
            .map(|(&lead, &m)| {
                total *= m;
                let zeta = f.root_of_unity(total).unwrap_or(FqElem::ONE);
                (0..total)
                    .find(|&e| f.pow_u(zeta, e) == lead)
                    .unwrap_or(0)
            })
            .collect()
    }

    /// `{"tame": [e_k], "shifts": [[coefficients of sigma(g) - g]], "i": i}`.
    pub fn automorphism_json(&self, idx: usize) -> Value {
        let f = &self.field;
        let shifts: Vec<Vec<String>> = self.elements[idx]
            .wild
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .map(|(l, &c)| {
                        let c = if l == r { f.sub(c, FqElem::ONE) } else { c };
                        f.format(c)
                    })
                    .collect()
            })
            .collect();
        json!({
            "tame": self.tame_exponents(idx),
            "shifts": shifts,
            "i": self.lower[idx],
        })
    }

    /// Sum of `i(sigma)` over the non-identity elements.
    pub fn different_exponent(&self) -> i64 {
        self.lower.iter().flatten().sum()
    }
}

enum Slot {
    Tame,
    Wild(usize),
}

fn slots(model: &TowerModel) -> (Vec<Slot>, Vec<usize>, Vec<u64>) {
    let mut slots = Vec::new();
    let mut wild_steps = Vec::new();
    let mut tame_degrees = Vec::new();
    for (k, step) in model.steps().iter().enumerate() {
        match step.kind {
            StepKind::Tame { m, .. } => {
                slots.push(Slot::Tame);
                tame_degrees.push(m);
            }
            StepKind::ArtinSchreier { .. } => {
                slots.push(Slot::Wild(wild_steps.len()));
                wild_steps.push(k);
            }
        }
    }
    (slots, wild_steps, tame_degrees)
}

/// Enumerates the automorphisms, their lower numbers and the group table.
pub fn galois_group(model: &TowerModel) -> Result<GaloisGroup> {
    let field = model.field().clone();
    let (_, _, tame_degrees) = slots(model);
    let gens = lift_generators(model)?;

    let top = model.top();
    for g in &gens {
        let moved = top.t.compose(&g.sigma)?;
        if !moved.agrees_with(&top.t) {
            return Err(Error::ClosureFailure("generator does not fix t".into()));
        }
    }

    let max_t = gens
        .iter()
        .map(|g| g.sigma.prec() - 1)
        .min()
        .unwrap_or(i64::MAX / 4);
    let degree = model.degree() as usize;
    let mut t = START_PRECISION.min(max_t.max(1));
    loop {
        let (elements, series) = closure(&field, &gens, Some(t), 1 + t)?;
        if elements.len() != degree {
            return Err(Error::ClosureFailure(format!(
                "generated {} automorphisms, degree {degree}",
                elements.len()
            )));
        }
        let mut lower = Vec::with_capacity(degree);
        let mut certified = true;
        for (data, s) in elements.iter().zip(&series) {
            if data.is_identity() {
                lower.push(None);
                continue;
            }
            let diff = s.sub(&LaurentSeries::var(&field, s.prec()))?;
            match diff.valuation() {
                Ok(i) if i + GUARD <= t => lower.push(Some(i)),
                _ => {
                    certified = false;
                    break;
                }
            }
        }
        if !certified {
            if t >= max_t {
                return Err(Error::PrecisionExhausted(format!(
                    "lower numbers not certified at relative precision {t}"
                )));
            }
            t = (2 * t).min(max_t);
            continue;
        }
        let generators = gens
            .iter()
            .map(|g| elements.iter().position(|e| *e == g.data).unwrap())
            .collect();
        let table = group_table(&field, &elements)?;
        let group = GaloisGroup {
            field: field.clone(),
            elements,
            lower,
            table,
            generators,
            precision: t,
            tame_degrees,
            series,
        };
        verify_composition(&group)?;
        return Ok(group);
    }
}

/// BFS over the Cayley graph: `(g o sigma)(s) = sigma(s)` evaluated at
/// `g(s)`. With `rel = Some(T)` all series are cut to relative precision T.
fn closure(
    field: &Fq,
    gens: &[Realized],
    rel: Option<i64>,
    id_prec: i64,
) -> Result<(Vec<AutData>, Vec<LaurentSeries>)> {
    let cut = |s: &LaurentSeries| match rel {
        Some(t) => s.truncate(1 + t),
        None => s.clone(),
    };
    let gen_series: Vec<LaurentSeries> = gens.iter().map(|g| cut(&g.sigma)).collect();
    let (tame, wild) = gens
        .first()
        .map(|g| (g.data.tame.len(), g.data.wild.len()))
        .unwrap_or((0, 0));
    let id = AutData::identity_prefix(tame, wild);
    let id_prec = match rel {
        Some(t) => 1 + t,
        None => id_prec,
    };
    let mut elements = vec![id.clone()];
    let mut series = vec![LaurentSeries::var(field, id_prec)];
    let mut index: HashMap<AutData, usize> = HashMap::from([(id, 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        for (g, gs) in gens.iter().zip(&gen_series) {
            let data = g.data.compose(&elements[k], field);
            if index.contains_key(&data) {
                continue;
            }
            let s = cut(&series[k].compose(gs)?);
            index.insert(data.clone(), elements.len());
            queue.push_back(elements.len());
            elements.push(data);
            series.push(s);
        }
    }
    Ok((elements, series))
}

fn group_table(field: &FqField, elements: &[AutData]) -> Result<FiniteGroupTable> {
    let index: HashMap<&AutData, usize> = elements.iter().enumerate().map(|(k, e)| (e, k)).collect();
    let rows = elements
        .iter()
        .map(|a| {
            elements
                .iter()
                .map(|b| {
                    index
                        .get(&a.compose(b, field))
                        .copied()
                        .ok_or_else(|| Error::ClosureFailure("product not in the group".into()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteGroupTable::new(rows, None).map_err(|e| Error::ClosureFailure(e.to_string()))
}

/// Checks the algebraic product against series composition: all pairs for
/// small groups, a seeded sample otherwise.
fn verify_composition(g: &GaloisGroup) -> Result<()> {
    let n = g.order();
    let pairs: Vec<(usize, usize)> = if n <= CHECK_ALL_PAIRS {
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9a10);
        (0..SAMPLE_PAIRS)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
            .collect()
    };
    for (a, b) in pairs {
        let c = g.table.mul(a, b);
        let direct = g.series[b].compose(&g.series[a])?;
        if !direct.agrees_with(&g.series[c]) {
            return Err(Error::ClosureFailure(format!(
                "series composition disagrees with the table at ({a}, {b})"
            )));
        }
    }
    Ok(())
}

/// Generators of the full group with sigma(s) at registry precision: at
/// each step, one lift of every earlier generator plus a generator of the
/// automorphisms fixing the level below.
fn lift_generators(model: &TowerModel) -> Result<Vec<Realized>> {
    let field = model.field().clone();
    let (kinds, wild_steps, _) = slots(model);
    let exact_prec = 1 + 2 * model.precision();
    let mut gens: Vec<Realized> = Vec::new();
    let mut n_tame = 0;
    let mut n_wild = 0;
    for (k, step) in model.steps().iter().enumerate() {
        let next = model.derived(k + 1)?;
        let mut lifted = Vec::with_capacity(gens.len() + 1);
        match (&step.kind, &kinds[k]) {
            (StepKind::Tame { m, zeta }, Slot::Tame) => {
                for g in &gens {
                    let Some((lead, sigma)) = tame_lift(&field, &g.sigma, *m)? else {
                        return Err(not_galois(model, k, &gens, &field)?);
                    };
                    let mut data = g.data.clone();
                    data.tame.push(lead);
                    lifted.push(Realized { data, sigma });
                }
                let mut data = AutData::identity_prefix(n_tame, n_wild);
                data.tame.push(*zeta);
                lifted.push(Realized {
                    data,
                    sigma: LaurentSeries::monomial(&field, *zeta, 1, exact_prec),
                });
                n_tame += 1;
            }
            (StepKind::ArtinSchreier { rhs, .. }, Slot::Wild(r)) => {
                let b = model.eval_at(k, rhs)?;
                let cs = earlier_rhs(model, k, &wild_steps[..*r])?;
                for g in &gens {
                    let a = b.compose(&g.sigma)?;
                    let Some(row) = solve_correction(&field, &a, &b, &cs)? else {
                        return Err(not_galois(model, k, &gens, &field)?);
                    };
                    let sigma = as_lift(model, k, &next, Some(&g.sigma), &row, &wild_steps)?;
                    let mut data = g.data.clone();
                    data.wild.push(row);
                    lifted.push(Realized { data, sigma });
                }
                let mut data = AutData::identity_prefix(n_tame, n_wild);
                let mut row = vec![FqElem::ZERO; r + 2];
                row[*r] = FqElem::ONE;
                row[r + 1] = FqElem::ONE;
                let sigma = as_lift(model, k, &next, None, &row, &wild_steps)?;
                data.wild.push(row);
                lifted.push(Realized { data, sigma });
                n_wild += 1;
            }
            _ => unreachable!("slots follow the steps"),
        }
        gens = lifted;
    }
    Ok(gens)
}

/// User right-hand sides of the given wild steps, i.e. wp(g_j), at level k.
fn earlier_rhs(model: &TowerModel, k: usize, steps: &[usize]) -> Result<Vec<LaurentSeries>> {
    steps
        .iter()
        .map(|&j| match &model.steps()[j].kind {
            StepKind::ArtinSchreier { rhs, .. } => model.eval_at(k, rhs),
            StepKind::Tame { .. } => unreachable!(),
        })
        .collect()
}

/// sigma(u) for `u^m = s`, given sigma(s); `None` when the leading
/// coefficient of sigma(s)/s has no m-th root in F_q.
fn tame_lift(
    field: &Fq,
    sigma: &LaurentSeries,
    m: u64,
) -> Result<Option<(FqElem, LaurentSeries)>> {
    let ratio = sigma.inflate(m as i64).shift(-(m as i64));
    let a = ratio.leading_coeff()?;
    let Some(root) = field.nth_root(a, m) else {
        return Ok(None);
    };
    let unit = ratio.scale(field.inv(a)?).nth_root(m)?;
    Ok(Some((root, unit.shift(1).scale(root))))
}

/// sigma(s_{k+1}) from sigma(s_k) and the affine image `row` of the new
/// generator; `sigma_k = None` stands for the identity on level k.
fn as_lift(
    model: &TowerModel,
    k: usize,
    next: &Derived,
    sigma_k: Option<&LaurentSeries>,
    row: &[FqElem],
    wild_steps: &[usize],
) -> Result<LaurentSeries> {
    let StepKind::ArtinSchreier { shift, i, j, .. } = &model.steps()[k].kind else {
        unreachable!()
    };
    let s_prev = &next.s[k];
    let moved = match sigma_k {
        Some(sig) => sig.compose(s_prev)?,
        None => s_prev.clone(),
    };
    let r = row.len() - 2;
    let mut image = next.g[k].scale(row[r]);
    for (l, &coef) in row[..r].iter().enumerate() {
        if !coef.is_zero() {
            image = image.add(&next.g[wild_steps[l]].scale(coef))?;
        }
    }
    if !row[r + 1].is_zero() {
        image = image.add_scalar(row[r + 1])?;
    }
    let x = match eval_laurent_poly(shift, &moved)? {
        Some(sh) => image.sub(&sh)?,
        None => image,
    };
    let out = moved.pow(*i)?.mul(&x.pow(*j)?)?;
    match out.valuation() {
        Ok(1) => Ok(out),
        Ok(v) => Err(Error::ClosureFailure(format!(
            "image of the uniformizer has valuation {v}"
        ))),
        Err(_) => Err(Error::PrecisionExhausted(
            "image of the uniformizer has no known terms".into(),
        )),
    }
}

/// Finds lambda in F_p^x, n in F_p^w and c in F_q with
/// `a - lambda b - sum n_j cs_j = wp(c)`, as the row `[n.., lambda, c]`.
/// Solved as a linear system over F_p on the known non-constant
/// coefficients; `None` when there is no solution.
fn solve_correction(
    field: &FqField,
    a: &LaurentSeries,
    b: &LaurentSeries,
    cs: &[LaurentSeries],
) -> Result<Option<Vec<FqElem>>> {
    let p = field.p() as u64;
    let cols: Vec<&LaurentSeries> = std::iter::once(b).chain(cs).collect();
    let top = cols.iter().map(|s| s.prec()).min().unwrap().min(a.prec());
    if top <= 0 {
        return Err(Error::PrecisionExhausted(
            "conjugated right-hand side has no known constant term".into(),
        ));
    }
    let low = cols
        .iter()
        .map(|s| s.val_bound())
        .min()
        .unwrap()
        .min(a.val_bound());
    let u = cols.len();
    let mut pivots: Vec<(usize, Vec<u64>)> = Vec::new();
    let coeff = |s: &LaurentSeries, e: i64| s.coeff(e).unwrap_or(FqElem::ZERO);
    for e in low..top {
        if e == 0 {
            continue;
        }
        let digit_cols: Vec<Vec<u32>> = cols.iter().map(|s| field.digits(coeff(s, e))).collect();
        let digit_rhs = field.digits(coeff(a, e));
        for d in 0..field.degree() {
            let mut row: Vec<u64> = digit_cols.iter().map(|c| c[d] as u64).collect();
            row.push(digit_rhs[d] as u64);
            if row.iter().all(|&x| x == 0) {
                continue;
            }
            for (col, prow) in &pivots {
                let f = row[*col];
                if f != 0 {
                    for (x, &y) in row.iter_mut().zip(prow) {
                        *x = (*x + (p - f) * y) % p;
                    }
                }
            }
            match (0..u).find(|&c| row[c] != 0) {
                Some(c) => {
                    let inv = mod_inv(row[c], p);
                    row.iter_mut().for_each(|x| *x = *x * inv % p);
                    pivots.push((c, row));
                }
                None if row[u] != 0 => return Ok(None),
                None => {}
            }
        }
    }
    if pivots.len() < u {
        return Err(Error::AmbiguousCorrection);
    }
    let mut x = vec![0u64; u];
    for (col, prow) in pivots.iter().rev() {
        let mut v = prow[u];
        for c in 0..u {
            if c != *col {
                v = (v + (p - prow[c]) * x[c] % p) % p;
            }
        }
        x[*col] = v;
    }
    if x[0] == 0 {
        return Ok(None);
    }
    let lambda = field.from_int(x[0] as i64);
    let n: Vec<FqElem> = x[1..].iter().map(|&v| field.from_int(v as i64)).collect();
    let mut d0 = field.sub(coeff(a, 0), field.mul(lambda, coeff(b, 0)));
    for (s, &nj) in cs.iter().zip(&n) {
        d0 = field.sub(d0, field.mul(nj, coeff(s, 0)));
    }
    let Some(c) = field.elements().find(|&c| field.wp(c) == d0) else {
        return Ok(None);
    };
    let mut row = n;
    row.push(lambda);
    row.push(c);
    Ok(Some(row))
}

fn mod_inv(a: u64, p: u64) -> u64 {
    (1..p).find(|&b| a * b % p == 1).expect("p is prime")
}

/// Builds the ExtensionNotGalois error for a failure at step k: counts the
/// automorphisms of level k that do extend, times the new kernel.
fn not_galois(model: &TowerModel, k: usize, gens: &[Realized], field: &Fq) -> Result<Error> {
    let (_, series) = closure(field, gens, None, 1 + 2 * model.precision())?;
    let step = &model.steps()[k];
    let mut extendable = 0;
    match &step.kind {
        StepKind::Tame { m, .. } => {
            for s in &series {
                if tame_lift(field, s, *m)?.is_some() {
                    extendable += 1;
                }
            }
        }
        StepKind::ArtinSchreier { rhs, .. } => {
            let (_, wild_steps, _) = slots(model);
            let before: Vec<usize> = wild_steps.into_iter().filter(|&j| j < k).collect();
            let b = model.eval_at(k, rhs)?;
            let cs = earlier_rhs(model, k, &before)?;
            for s in &series {
                let a = b.compose(s)?;
                if solve_correction(field, &a, &b, &cs)?.is_some() {
                    extendable += 1;
                }
            }
        }
    }
    let kernel = step.degree(field.p() as u64) as usize;
    Ok(Error::ExtensionNotGalois {
        found: extendable * kernel,
        degree: model.level_degree(k + 1) as usize,
    })
}

#[cfg(test)]
mod tests;
