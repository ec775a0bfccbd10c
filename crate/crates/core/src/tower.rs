//! Totally ramified towers over K = F_q((t)), built one Artin-Schreier or
//! tame Kummer step at a time.
//!
//! Level k of a tower is the field obtained after k steps. It is realized as
//! F_q((s_k)) for a uniformizer s_k, and a registry records `t` and every
//! reduced generator as series in s_k. Going up a level re-expresses the
//! whole registry in the new uniformizer by substituting the old uniformizer
//! as a series in the new one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr, Symbol};
use crate::finite_field::{Fq, FqElem, FqField};
use crate::laurent::LaurentSeries;

/// Smallest relative precision used for registries.
pub const MIN_PRECISION: i64 = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

fn one() -> usize {
    1
}

impl FieldSpec {
    pub fn prime(p: u64) -> Self {
        FieldSpec {
            p,
            n: 1,
            modulus: None,
        }
    }

    pub fn build(&self) -> Result<Fq> {
        FqField::new(self.p, self.n, self.modulus.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StepSpec {
    ArtinSchreier { rhs: String },
    Tame { m: u64 },
}

impl StepSpec {
    pub fn artin_schreier(rhs: impl Into<String>) -> Self {
        StepSpec::ArtinSchreier { rhs: rhs.into() }
    }
}

/// The tower-spec file format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub field: FieldSpec,
    pub steps: Vec<StepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<i64>,
}

impl TowerSpec {
    pub fn new(field: FieldSpec, steps: Vec<StepSpec>) -> Self {
        TowerSpec {
            field,
            steps,
            precision: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    /// Appends the steps of `other`, renumbering its generators.
    pub fn concat(&self, other: &TowerSpec) -> Result<TowerSpec> {
        if self.field != other.field {
            return Err(Error::InvalidSpec("towers over different fields".into()));
        }
        let offset = self.steps.len();
        let mut steps = self.steps.clone();
        for step in &other.steps {
            steps.push(match step {
                StepSpec::ArtinSchreier { rhs } => StepSpec::ArtinSchreier {
                    rhs: parse_expr(rhs)?.shift_generators(offset).to_string(),
                },
                tame => tame.clone(),
            });
        }
        Ok(TowerSpec {
            field: self.field.clone(),
            steps,
            precision: self.precision.max(other.precision),
        })
    }

    /// Same steps over another residue field.
    pub fn with_field(&self, field: FieldSpec) -> TowerSpec {
        TowerSpec {
            field,
            ..self.clone()
        }
    }
}

/// Data fixed when a step is built.
#[derive(Clone, Debug)]
pub enum StepKind {
    ArtinSchreier {
        rhs: Expr,
        /// Valuation of the unreduced right-hand side at the previous level.
        rhs_val: i64,
        /// The reduced right-hand side has valuation `-break_`, prime to p.
        break_: i64,
        /// Laurent polynomial (exponent, coefficient) in the previous
        /// uniformizer: user generator = reduced generator + shift.
        shift: Vec<(i64, FqElem)>,
        /// New uniformizer = s_prev^i * x^j with p i - b j = 1.
        i: i64,
        j: i64,
    },
    Tame {
        m: u64,
        zeta: FqElem,
    },
}

#[derive(Clone, Debug)]
pub struct Step {
    pub kind: StepKind,
}

impl Step {
    pub fn is_wild(&self) -> bool {
        matches!(self.kind, StepKind::ArtinSchreier { .. })
    }

    pub fn degree(&self, p: u64) -> u64 {
        match self.kind {
            StepKind::ArtinSchreier { .. } => p,
            StepKind::Tame { m, .. } => m,
        }
    }
}

/// Registry of one level: `t` and the reduced generators, as series in the
/// level's uniformizer.
#[derive(Clone, Debug)]
pub struct Level {
    pub t: LaurentSeries,
    pub x: Vec<LaurentSeries>,
}

/// Series derived from a level's registry: the user generators and the
/// uniformizers of every lower level.
#[derive(Clone, Debug)]
pub struct Derived {
    /// `s[k]` is the uniformizer of level k; `s[0] = t`.
    pub s: Vec<LaurentSeries>,
    /// `g[k - 1]` is the generator of step k.
    pub g: Vec<LaurentSeries>,
}

/// Result of Artin-Schreier reduction.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub reduced: LaurentSeries,
    pub shift: Vec<(i64, FqElem)>,
    pub break_: i64,
}

/// Subtracts `wp(c^(1/p) s^(-k))` from a leading term `c s^(-pk)` until the
/// valuation is negative and prime to p.
pub fn as_reduce(f: &LaurentSeries) -> Result<Reduction> {
    let field = f.field().clone();
    let p = field.p() as i64;
    let mut cur = f.clone();
    let mut shift = Vec::new();
    loop {
        if cur.is_indeterminate() {
            if cur.prec() > 0 {
                return Err(Error::TrivialStep);
            }
            return Err(Error::PrecisionExhausted(
                "Artin-Schreier reduction ran out of known terms".into(),
            ));
        }
        let v = cur.valuation()?;
        if v >= 0 {
            let c0 = cur.coeff(0).expect("v >= 0 is below the precision");
            return Err(if field.is_wp_image(c0) {
                Error::TrivialStep
            } else {
                Error::NotWildTotallyRamified
            });
        }
        if v % p != 0 {
            return Ok(Reduction {
                reduced: cur,
                shift,
                break_: -v,
            });
        }
        let c = cur.leading_coeff()?;
        let d = field.pth_root(c);
        let k = -v / p;
        if -k >= cur.prec() {
            return Err(Error::PrecisionExhausted(
                "Artin-Schreier reduction ran out of known terms".into(),
            ));
        }
        cur = cur.add_monomial(field.neg(c), v).add_monomial(d, -k);
        shift.push((-k, d));
    }
}

/// `sum_k c_k y^k` over the given sparse terms (any signs of exponents).
pub(crate) fn eval_laurent_poly(
    terms: &[(i64, FqElem)],
    y: &LaurentSeries,
) -> Result<Option<LaurentSeries>> {
    if terms.is_empty() {
        return Ok(None);
    }
    let field = y.field().clone();
    let mut total: Option<LaurentSeries> = None;
    for negative in [false, true] {
        let part: Vec<(u64, FqElem)> = terms
            .iter()
            .filter(|&&(e, _)| (e < 0) == negative)
            .map(|&(e, c)| (e.unsigned_abs(), c))
            .collect();
        if part.is_empty() {
            continue;
        }
        let z = if negative { y.inv()? } else { y.clone() };
        let degree = part.iter().map(|&(e, _)| e).max().unwrap() as usize;
        let mut dense = vec![FqElem::ZERO; degree + 1];
        for (e, c) in part {
            dense[e as usize] = field.add(dense[e as usize], c);
        }
        let value = eval_poly(&dense, &z)?;
        total = Some(match total {
            None => value,
            Some(t) => t.add(&value)?,
        });
    }
    Ok(total)
}

/// `sum_k c[k] z^k` by baby-step giant-step.
fn eval_poly(c: &[FqElem], z: &LaurentSeries) -> Result<LaurentSeries> {
    let r = ((c.len() as f64).sqrt().ceil() as usize).max(1);
    let mut baby = Vec::with_capacity(r + 1);
    baby.push(LaurentSeries::one(z.field(), z.rel_prec()));
    for i in 1..=r {
        let next = if i == 1 {
            z.clone()
        } else {
            baby[i - 1].mul(z)?
        };
        baby.push(next);
    }
    let blocks = c.len().div_ceil(r);
    let block = |j: usize| -> Result<Option<LaurentSeries>> {
        let mut acc: Option<LaurentSeries> = None;
        for (i, b) in baby.iter().enumerate().take(r) {
            let Some(&coef) = c.get(j * r + i) else { break };
            if coef.is_zero() {
                continue;
            }
            let term = b.scale(coef);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc)
    };
    let mut acc = block(blocks - 1)?;
    for j in (0..blocks - 1).rev() {
        acc = match acc {
            Some(a) => Some(a.mul(&baby[r])?),
            None => None,
        };
        if let Some(b) = block(j)? {
            acc = Some(match acc {
                None => b,
                Some(a) => a.add(&b)?,
            });
        }
    }
    Ok(acc.unwrap_or_else(|| LaurentSeries::zero(z.field(), i64::MAX / 8)))
}

/// A built tower. Immutable once built.
#[derive(Clone, Debug)]
pub struct TowerModel {
    field: Fq,
    steps: Vec<Step>,
    levels: Vec<Level>,
    degree: u64,
    precision: i64,
}

impl TowerModel {
    /// The base field F_q((t)) with registry precision `precision`.
    pub fn base(field: Fq, precision: i64) -> Self {
        let precision = precision.max(MIN_PRECISION);
        let t = LaurentSeries::var(&field, 1 + precision);
        TowerModel {
            field,
            steps: Vec::new(),
            levels: vec![Level { t, x: Vec::new() }],
            degree: 1,
            precision,
        }
    }

    pub fn field(&self) -> &Fq {
        &self.field
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    /// All towers built here are totally ramified.
    pub fn ramification_index(&self) -> u64 {
        self.degree
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    pub fn level(&self, k: usize) -> &Level {
        &self.levels[k]
    }

    pub fn top(&self) -> &Level {
        self.levels.last().unwrap()
    }

    pub fn height(&self) -> usize {
        self.steps.len()
    }

    /// Degree of level k over K.
    pub fn level_degree(&self, k: usize) -> u64 {
        let p = self.field.p() as u64;
        self.steps[..k].iter().map(|s| s.degree(p)).product()
    }

    /// Indices (0-based) of the Artin-Schreier steps.
    pub fn wild_steps(&self) -> Vec<usize> {
        (0..self.steps.len())
            .filter(|&k| self.steps[k].is_wild())
            .collect()
    }

    pub fn derived(&self, level: usize) -> Result<Derived> {
        let reg = &self.levels[level];
        let mut s = vec![reg.t.clone()];
        let mut g = Vec::with_capacity(level);
        for (k, x) in reg.x.iter().enumerate() {
            match &self.steps[k].kind {
                StepKind::ArtinSchreier { shift, i, j, .. } => {
                    let gen = match eval_laurent_poly(shift, &s[k])? {
                        Some(sh) => x.add(&sh)?,
                        None => x.clone(),
                    };
                    g.push(gen);
                    s.push(s[k].pow(*i)?.mul(&x.pow(*j)?)?);
                }
                StepKind::Tame { .. } => {
                    g.push(x.clone());
                    s.push(x.clone());
                }
            }
        }
        Ok(Derived { s, g })
    }

    /// Evaluates an expression in the registry of `level`.
    pub fn eval_at(&self, level: usize, e: &Expr) -> Result<LaurentSeries> {
        e.check_generators(level)?;
        let reg = &self.levels[level];
        let derived = if e.generators().is_empty() {
            None
        } else {
            Some(self.derived(level)?)
        };
        e.eval(&self.field, 1 + self.precision, &mut |sym| match sym {
            Symbol::T => Ok(reg.t.clone()),
            Symbol::Gen(k) => Ok(derived.as_ref().unwrap().g[k - 1].clone()),
            Symbol::W => unreachable!("constants are evaluated as scalars"),
        })
    }

    /// Evaluates an expression in the top field.
    pub fn eval_expr(&self, e: &Expr) -> Result<LaurentSeries> {
        self.eval_at(self.height(), e)
    }

    pub fn extend_as(&self, rhs: &Expr) -> Result<TowerModel> {
        let field = self.field.clone();
        let p = field.p() as i64;
        let level = self.height();
        let f = self.eval_at(level, rhs)?;
        let rhs_val = f.valuation().map_err(|_| {
            Error::PrecisionExhausted("right-hand side has no known terms".into())
        });
        let red = as_reduce(&f)?;
        let rhs_val = rhs_val?;
        let b = red.break_;
        let j = (1..p).find(|&j| (b * j) % p == p - 1).expect("b is prime to p");
        let i = (1 + b * j) / p;
        let s_new = solve_uniformizer(&red.reduced, b, i, j, self.precision)?;

        let reg = &self.levels[level];
        let cap = self.precision;
        let t = reg.t.compose(&s_new.old_uniformizer)?.truncate_rel(cap);
        let mut x = Vec::with_capacity(reg.x.len() + 1);
        for xk in &reg.x {
            x.push(xk.compose(&s_new.old_uniformizer)?.truncate_rel(cap));
        }
        x.push(s_new.generator.truncate_rel(cap));

        let mut out = self.clone();
        out.steps.push(Step {
            kind: StepKind::ArtinSchreier {
                rhs: rhs.clone(),
                rhs_val,
                break_: b,
                shift: red.shift,
                i,
                j,
            },
        });
        out.levels.push(Level { t, x });
        out.degree *= p as u64;
        Ok(out)
    }

    pub fn extend_tame(&self, m: u64) -> Result<TowerModel> {
        let field = self.field.clone();
        let zeta = field.root_of_unity(m)?;
        let cap = self.precision;
        let reg = self.top();
        let inflate = |s: &LaurentSeries| s.inflate(m as i64).truncate_rel(cap);
        let mut x: Vec<LaurentSeries> = reg.x.iter().map(inflate).collect();
        x.push(LaurentSeries::var(&field, 1 + cap));
        let mut out = self.clone();
        out.steps.push(Step {
            kind: StepKind::Tame { m, zeta },
        });
        out.levels.push(Level {
            t: inflate(&reg.t),
            x,
        });
        out.degree *= m;
        Ok(out)
    }

    /// Builds every step of `spec` at registry precision `precision`.
    pub fn build(spec: &TowerSpec, precision: i64) -> Result<TowerModel> {
        let field = spec.field.build()?;
        let mut model = TowerModel::base(field, precision);
        for (k, step) in spec.steps.iter().enumerate() {
            let next = match step {
                StepSpec::ArtinSchreier { rhs } => parse_expr(rhs)
                    .and_then(|e| {
                        e.check_generators(k)?;
                        Ok(e)
                    })
                    .and_then(|e| model.extend_as(&e)),
                StepSpec::Tame { m } => model.extend_tame(*m),
            };
            model = next.map_err(|e| e.at_step(k + 1))?;
        }
        Ok(model)
    }

    /// Re-checks the defining relations of every step in the top field and
    /// that `t` has valuation equal to the degree.
    pub fn check_relations(&self) -> Result<()> {
        let top = self.height();
        let d = self.derived(top)?;
        let vt = self.top().t.valuation()?;
        if vt as u64 != self.degree {
            return Err(Error::ClosureFailure(format!(
                "v(t) = {vt}, degree {}",
                self.degree
            )));
        }
        let s_top = &d.s[top];
        let unif = LaurentSeries::var(&self.field, s_top.prec().max(2));
        if s_top.valuation()? != 1 || !s_top.agrees_with(&unif) {
            return Err(Error::ClosureFailure(
                "uniformizer monomial does not reproduce s".into(),
            ));
        }
        for (k, step) in self.steps.iter().enumerate() {
            let residual = match &step.kind {
                StepKind::ArtinSchreier { rhs, .. } => {
                    let rhs = self.eval_at(top, rhs)?;
                    d.g[k].wp().sub(&rhs)?
                }
                StepKind::Tame { m, .. } => d.g[k].pow(*m as i64)?.sub(&d.s[k])?,
            };
            if !residual.is_indeterminate() {
                return Err(Error::ClosureFailure(format!(
                    "defining relation of step {} fails at exponent {}",
                    k + 1,
                    residual.val_bound()
                )));
            }
        }
        Ok(())
    }
}

pub(crate) struct UniformizerSolution {
    /// Previous uniformizer as a series in the new one.
    pub old_uniformizer: LaurentSeries,
    /// Reduced generator as a series in the new one.
    pub generator: LaurentSeries,
}

/// Solves `x^p - x = R(S)` and `S^i x^j = s` for series S (valuation p) and
/// x (valuation -b) in the new uniformizer s. `x` is eliminated through
/// `x = (s S^-i)^(1/j)`; S is then found by Newton iteration, which doubles
/// the number of correct terms per round (the derivative of `x^p` vanishes).
fn solve_uniformizer(
    reduced: &LaurentSeries,
    b: i64,
    i: i64,
    j: i64,
    cap: i64,
) -> Result<UniformizerSolution> {
    let field = reduced.field().clone();
    let p = field.p() as i64;
    let r0 = reduced.leading_coeff()?;
    let sigma0 = field.pow(r0, -j)?;
    let xi0 = field.pow(r0, i)?;
    let target = (p * reduced.rel_prec()).min(cap);
    if target < 1 {
        return Err(Error::PrecisionExhausted(
            "reduced right-hand side has no known terms".into(),
        ));
    }
    let deriv = reduced.derivative();
    if deriv.leading_coeff().is_err() {
        return Err(Error::SingularLeadingSystem);
    }
    let ij = field.mul(field.from_int(i), field.inv(field.from_int(j))?);

    let x_of = |s_ser: &LaurentSeries| -> Result<LaurentSeries> {
        let base = s_ser.pow(-i)?.shift(1);
        let root = if j == 1 { base } else { base.nth_root(j as u64)? };
        let lead = root.leading_coeff()?;
        Ok(root.scale(field.div(xi0, lead)?))
    };

    let mut s_ser = LaurentSeries::monomial(&field, sigma0, p, p + 1);
    let mut cur = 1;
    let mut rounds = 0;
    loop {
        let done = cur >= target;
        cur = (2 * cur).min(target);
        let lifted = s_ser.lift_prec(p + cur);
        let x = x_of(&lifted)?;
        let g_val = x
            .frobenius()
            .sub(&x)?
            .sub(&reduced.compose(&lifted)?)?;
        if done {
            if !g_val.is_indeterminate() || g_val.prec() < -p * b + target {
                if rounds > 64 {
                    return Err(Error::PrecisionExhausted(
                        "uniformizer solve did not converge".into(),
                    ));
                }
            } else {
                return Ok(UniformizerSolution {
                    generator: x.truncate(-b + target),
                    old_uniformizer: lifted.truncate(p + target),
                });
            }
        }
        let gprime = x
            .mul(&lifted.inv()?)?
            .scale(ij)
            .sub(&deriv.compose(&lifted)?)?;
        let step = g_val.div(&gprime)?;
        s_ser = lifted.sub(&step)?.truncate(p + cur);
        rounds += 1;
    }
}

#[cfg(test)]
mod tests;
