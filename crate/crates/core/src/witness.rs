//! End-to-end constructions: build a tower, enumerate its Galois group,
//! compute breaks and package the verdicts.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::finite_field::is_prime;
use crate::galois::{galois_group, GaloisGroup};
use crate::pgroups::{direct_product, group_name, identify_h11};
use crate::ramification::{
    disjoint, hasse_arf_check, multiset_union_check, q, q_frac, q_str, theorem_check,
    upper_breaks, BreakData, HasseArfReport, TheoremVerdict, Q,
};
use crate::tower::{FieldSpec, StepSpec, TowerModel, TowerSpec, MIN_PRECISION};

/// Adaptive runs stop doubling here.
pub const MAX_PRECISION: i64 = 1 << 15;

/// Environment variable holding a default precision for the CLI.
pub const PRECISION_ENV: &str = "RAMIFY_PRECISION";

/// A tower together with its Galois group and breaks.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub spec: TowerSpec,
    pub model: TowerModel,
    pub group: GaloisGroup,
    pub breaks: BreakData,
}

fn retryable(e: &Error) -> bool {
    e.is_precision() || matches!(e.root(), Error::AmbiguousCorrection)
}

impl Analysis {
    /// With `precision = None` the run starts from the spec's precision (or
    /// 64) and doubles on precision failures; an explicit precision is used
    /// as is.
    pub fn run(spec: &TowerSpec, precision: Option<i64>) -> Result<Analysis> {
        if let Some(n) = precision {
            return Self::attempt(spec, n);
        }
        let mut n = spec.precision.unwrap_or(MIN_PRECISION).max(MIN_PRECISION);
        loop {
            match Self::attempt(spec, n) {
                Err(e) if retryable(&e) && n < MAX_PRECISION => n *= 2,
                r => return r,
            }
        }
    }

    fn attempt(spec: &TowerSpec, n: i64) -> Result<Analysis> {
        let model = TowerModel::build(spec, n)?;
        let group = galois_group(&model)?;
        let breaks = upper_breaks(&group, model.field().p() as u64)?;
        Ok(Analysis {
            spec: spec.clone(),
            model,
            group,
            breaks,
        })
    }

    pub fn p(&self) -> u64 {
        self.model.field().p() as u64
    }

    pub fn precision(&self) -> i64 {
        self.model.precision()
    }

    pub fn name(&self) -> String {
        group_name(self.group.table())
    }

    pub fn different(&self) -> i64 {
        self.group.different_exponent()
    }

    pub fn hasse_arf(&self) -> HasseArfReport {
        hasse_arf_check(&self.breaks, self.group.table())
    }

    pub fn theorem(&self) -> Result<TheoremVerdict> {
        theorem_check(&self.breaks, self.group.table(), &self.group.wild_subgroup())
    }

    /// Some non-log break is not an integer.
    pub fn converse(&self) -> bool {
        !self.breaks.all_nonlog_integral()
    }

    /// The identities every model must satisfy: the different from `i` and
    /// from the filtration agree, `psi o phi = id` on a grid, and the
    /// filtration reproduces the enumerated `i(sigma)`.
    pub fn consistency(&self) -> Vec<(&'static str, bool)> {
        let b = &self.breaks;
        let different = b.different_from_filtration() == Some(self.different());
        let top = b.lower.last().cloned().unwrap_or_else(|| q(1)) + q(2);
        let roundtrip = (0..100).all(|k| {
            let u = q_frac(k, 99) * &top - q(1);
            b.phi.psi(&b.phi.phi(&u)) == u && b.phi.phi(&b.phi.psi(&u)) == u
        });
        let i_values = self.group.lower_numbers();
        let last = i_values.iter().flatten().max().copied().unwrap_or(0);
        let lowers = (-1..=last).all(|u| {
            let count = i_values.iter().filter(|i| i.is_none_or(|i| i > u)).count();
            count as u64 == b.lower_order_at(&q(u))
        });
        let transported = b
            .lower
            .iter()
            .zip(&b.upper)
            .all(|(l, v)| b.phi.psi(&v.value) == *l);
        vec![
            ("different", different),
            ("herbrand_roundtrip", roundtrip),
            ("lower_numbers", lowers),
            ("transport", transported),
        ]
    }

    pub fn report_json(&self) -> Result<Value> {
        let mut out = self.breaks.to_json();
        out["different"] = json!(self.different());
        out["group"] = json!(self.name());
        out["order"] = json!(self.group.order());
        out["hasse_arf"] = json!(self.hasse_arf().verdict.as_str());
        out["theorem_imperfect"] = json!(self.theorem()?.as_str());
        out["converse"] = json!(self.converse());
        Ok(out)
    }
}

/// A construction with its analysis and named checks.
#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub witness: String,
    pub analysis: Analysis,
    pub checks: BTreeMap<String, bool>,
}

impl WitnessReport {
    fn new(witness: impl Into<String>, analysis: Analysis) -> Self {
        let checks = analysis
            .consistency()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        WitnessReport {
            witness: witness.into(),
            analysis,
            checks,
        }
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.to_string(), ok);
    }

    pub fn passed(&self) -> bool {
        self.checks.values().all(|&v| v)
    }

    pub fn converse(&self) -> bool {
        self.analysis.converse()
    }

    pub fn breaks(&self) -> &BreakData {
        &self.analysis.breaks
    }

    pub fn to_json(&self) -> Result<Value> {
        let mut out = self.analysis.report_json()?;
        out["witness"] = json!(self.witness);
        out["checks"] = json!(self.checks);
        out["spec"] = serde_json::to_value(&self.analysis.spec).expect("spec serializes");
        Ok(out)
    }
}

fn require_odd_prime(p: u64, bad: &mut Vec<String>) {
    if !is_prime(p) {
        bad.push(format!("p = {p} is not prime"));
    } else if p == 2 {
        bad.push("p = 2 (witnesses need p > 2)".into());
    }
}

fn field(p: u64, residue_n: usize) -> FieldSpec {
    FieldSpec {
        p,
        n: residue_n,
        modulus: None,
    }
}

/// `C_p` with break b: one step `x^p - x = t^-b`.
pub fn construct_cp(p: u64, residue_n: usize, b: u64, precision: Option<i64>) -> Result<WitnessReport> {
    let mut bad = Vec::new();
    require_odd_prime(p, &mut bad);
    if !bad.is_empty() {
        return Err(Error::ConstraintViolation(bad.join("; ")));
    }
    if b == 0 || b.is_multiple_of(p) {
        return Err(Error::InvalidBreak(b));
    }
    let spec = TowerSpec::new(field(p, residue_n), vec![StepSpec::artin_schreier(format!("t^-{b}"))]);
    let mut r = WitnessReport::new("cp", Analysis::run(&spec, precision)?);
    let b = q(b as i64);
    r.check("break", r.breaks().upper_values() == vec![b.clone()]);
    r.check("nonlog", r.breaks().nonlog() == vec![b + q(1)]);
    r.check("group", r.analysis.name() == format!("C_{p}"));
    Ok(r)
}

/// The three-step H(1,1) spec for breaks `b, a, a + b/p`, with `beta = c t^-b`.
pub fn h11_spec(p: u64, residue_n: usize, b: u64, a: u64, c: u64) -> Result<TowerSpec> {
    let mut bad = Vec::new();
    require_odd_prime(p, &mut bad);
    if !bad.is_empty() {
        return Err(Error::ConstraintViolation(bad.join("; ")));
    }
    if b == 0 {
        bad.push("b = 0".into());
    }
    if b.is_multiple_of(p) {
        bad.push(format!("p = {p} divides b = {b}"));
    }
    if a <= b {
        bad.push(format!("a = {a} is not > b = {b}"));
    }
    if a.is_multiple_of(p) {
        bad.push(format!("a = {a} is 0 mod {p}"));
    }
    if (a + b).is_multiple_of(p) {
        bad.push(format!("a = {a} is -b mod {p}"));
    }
    if c.is_multiple_of(p) {
        bad.push(format!("beta coefficient {c} is 0 mod {p}"));
    }
    if !bad.is_empty() {
        return Err(Error::ConstraintViolation(bad.join("; ")));
    }
    // a = b*tt + p*s with 0 <= tt < p
    let tt = (a % p) * inv_mod(b % p, p) % p;
    let gamma = inv_mod(tt + 1, p);
    // alpha = t^(-ps) beta^tt = c^tt t^-a
    let ca = pow_mod(c, tt, p);
    let cz = gamma * ca % p * c % p;
    let steps = vec![
        StepSpec::artin_schreier(format!("{c}*t^-{b}")),
        StepSpec::artin_schreier(format!("{ca}*t^-{a}")),
        StepSpec::artin_schreier(format!("{ca}*g1*t^-{a} + {cz}*t^-{}", a + b)),
    ];
    Ok(TowerSpec::new(field(p, residue_n), steps))
}

fn pow_mod(mut a: u64, mut k: u64, p: u64) -> u64 {
    let mut r = 1;
    a %= p;
    while k > 0 {
        if k & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        k >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// The H(1,1) witness over F_p.
pub fn construct_h11(p: u64, b: u64, a: u64) -> Result<WitnessReport> {
    construct_h11_over(p, 1, b, a, 1, None)
}

/// The H(1,1) witness over `F_(p^residue_n)` with `beta = c t^-b`.
pub fn construct_h11_over(
    p: u64,
    residue_n: usize,
    b: u64,
    a: u64,
    c: u64,
    precision: Option<i64>,
) -> Result<WitnessReport> {
    let spec = h11_spec(p, residue_n, b, a, c)?;
    let mut r = WitnessReport::new("h11", Analysis::run(&spec, precision)?);
    let (bq, aq) = (q(b as i64), q(a as i64));
    let expected = vec![bq.clone(), aq.clone(), aq + bq / q(p as i64)];
    let nonlog: Vec<Q> = expected.iter().map(|v| v + q(1)).collect();
    r.check("closed_form", r.breaks().upper_values() == expected);
    r.check("nonlog", r.breaks().nonlog() == nonlog);
    r.check("group", identify_h11(r.analysis.group.table(), p));
    r.check("converse", r.converse());
    Ok(r)
}

/// `P x C_m`: the tame step `u^m = t` followed by the wild steps of
/// `wild` (written over the base, in t).
pub fn construct_split_product(
    p: u64,
    residue_n: usize,
    m: u64,
    wild: &TowerSpec,
    precision: Option<i64>,
) -> Result<WitnessReport> {
    if wild.steps.iter().any(|s| !matches!(s, StepSpec::ArtinSchreier { .. })) {
        return Err(Error::InvalidSpec("wild spec has a tame step".into()));
    }
    let base = field(p, residue_n);
    let wild = wild.with_field(base.clone());
    let tame = TowerSpec::new(base, vec![StepSpec::Tame { m }]);
    let spec = tame.concat(&wild)?;
    let alone = Analysis::run(&wild, precision)?;
    let mut r = WitnessReport::new("split_product", Analysis::run(&spec, precision)?);
    let g = &r.analysis.group;
    let wild_gens = wild.steps.len();
    let tame_part: Vec<usize> = (0..g.order())
        .filter(|&k| (0..wild_gens).all(|w| g.elements()[k].fixes_wild(w)))
        .collect();
    let product = internal_product(g, &g.wild_subgroup(), &tame_part);
    let order = g.order() as u64 == alone.group.order() as u64 * m;
    let same = r.breaks().wild_multiset() == alone.breaks.wild_multiset();
    r.check("order", order);
    r.check("direct_product", product && tame_part.len() as u64 == m);
    r.check("wild_breaks", same);
    Ok(r)
}

/// `u^m = t`, then `x^p - x = u^-1`.
pub fn construct_s3(p: u64, m: u64, precision: Option<i64>) -> Result<WitnessReport> {
    let mut bad = Vec::new();
    require_odd_prime(p, &mut bad);
    if !bad.is_empty() {
        return Err(Error::ConstraintViolation(bad.join("; ")));
    }
    let spec = TowerSpec::new(
        field(p, 1),
        vec![StepSpec::Tame { m }, StepSpec::artin_schreier("g1^-1")],
    );
    let mut r = WitnessReport::new("s3", Analysis::run(&spec, precision)?);
    let m_q = q(m as i64);
    let nonlog = vec![q(1), q(1) + q(1) / m_q];
    let t = r.analysis.group.table();
    let wild_abelian = t.subgroup_table(&r.analysis.group.wild_subgroup())?.is_abelian();
    let nonabelian = !t.is_abelian();
    r.check("nonlog", r.breaks().nonlog() == nonlog);
    r.check("nonabelian", nonabelian);
    r.check("wild_abelian", wild_abelian);
    r.check("theorem", r.analysis.theorem()? == TheoremVerdict::Confirmed);
    Ok(r)
}

/// The composite of two wild towers with disjoint break multisets.
pub fn disjoint_composite(
    spec1: &TowerSpec,
    spec2: &TowerSpec,
    precision: Option<i64>,
) -> Result<WitnessReport> {
    let a1 = Analysis::run(spec1, precision)?;
    let a2 = Analysis::run(spec2, precision)?;
    let (b1, b2) = (a1.breaks.wild_multiset(), a2.breaks.wild_multiset());
    if !disjoint(&b1, &b2) {
        return Err(Error::BreaksNotDisjoint);
    }
    let spec = spec1.concat(spec2)?;
    let mut r = WitnessReport::new("composite", Analysis::run(&spec, precision)?);
    let g = &r.analysis.group;
    let n1 = spec1.steps.len();
    let n2 = spec2.steps.len();
    let fix_first: Vec<usize> = (0..g.order())
        .filter(|&k| (0..n1).all(|w| g.elements()[k].fixes_wild(w)))
        .collect();
    let fix_second: Vec<usize> = (0..g.order())
        .filter(|&k| (n1..n1 + n2).all(|w| g.elements()[k].fixes_wild(w)))
        .collect();
    let product = direct_product(a1.group.table(), a2.group.table());
    let order = g.order() == a1.group.order() * a2.group.order();
    let internal = internal_product(g, &fix_first, &fix_second);
    let invariants = g.table().invariants() == product.invariants();
    r.check("order", order);
    r.check("direct_product", internal);
    r.check("invariants", invariants);
    r.check(
        "union",
        multiset_union_check(&b1, &b2, &r.breaks().wild_multiset()),
    );
    Ok(r)
}

/// G is the internal direct product of the element sets a and b.
fn internal_product(g: &GaloisGroup, a: &[usize], b: &[usize]) -> bool {
    let t = g.table();
    if a.len() * b.len() != t.order() || !t.is_subgroup(a) || !t.is_subgroup(b) {
        return false;
    }
    let meet = a.iter().filter(|x| b.contains(x)).count();
    meet == 1
        && a
            .iter()
            .all(|&x| b.iter().all(|&y| t.mul(x, y) == t.mul(y, x)))
}

/// Named specs of the standard witnesses.
pub fn catalog() -> BTreeMap<&'static str, TowerSpec> {
    let mut out = BTreeMap::new();
    let wild = |rhs: &[&str]| -> Vec<StepSpec> {
        rhs.iter().map(|r| StepSpec::artin_schreier(*r)).collect()
    };
    out.insert("c3", TowerSpec::new(FieldSpec::prime(3), wild(&["t^-1"])));
    out.insert(
        "c3xc3",
        TowerSpec::new(FieldSpec::prime(3), wild(&["t^-1", "t^-2"])),
    );
    out.insert("h11", h11_spec(3, 1, 1, 4, 1).expect("admissible"));
    out.insert("h11_b2_a5", h11_spec(3, 1, 2, 5, 1).expect("admissible"));
    out.insert(
        "s3",
        TowerSpec::new(
            FieldSpec::prime(3),
            vec![StepSpec::Tame { m: 2 }, StepSpec::artin_schreier("g1^-1")],
        ),
    );
    out.insert(
        "h11xc2",
        TowerSpec::new(FieldSpec::prime(3), vec![StepSpec::Tame { m: 2 }])
            .concat(&h11_spec(3, 1, 1, 4, 1).expect("admissible"))
            .expect("same field"),
    );
    out.insert(
        "c3xc4_f9",
        TowerSpec::new(
            field(3, 2),
            vec![StepSpec::Tame { m: 4 }, StepSpec::artin_schreier("t^-1")],
        ),
    );
    out
}

/// Closed-form wild breaks of a random factor.
fn factor_breaks(p: u64, b: u64, a: Option<u64>) -> Vec<Q> {
    let (bq, pq) = (q(b as i64), q(p as i64));
    match a {
        None => vec![bq],
        Some(a) => {
            let aq = q(a as i64);
            vec![bq.clone(), aq.clone(), aq + bq / pq]
        }
    }
}

/// Seeded pairs of `C_3` / `H(1,1)` specs over F_3 whose closed-form break
/// multisets are disjoint. At most one side of a pair is `H(1,1)`.
pub fn random_disjoint_pairs(seed: u64, count: usize) -> Vec<(TowerSpec, TowerSpec)> {
    use rand::{Rng, SeedableRng};
    let p = 3;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut factor = |allow_h11: bool| -> (TowerSpec, Vec<Q>) {
        if allow_h11 && rng.gen_bool(0.5) {
            loop {
                let b = rng.gen_range(1..=2);
                let a = rng.gen_range(b + 1..=8);
                if let Ok(spec) = h11_spec(p, 1, b, a, 1) {
                    return (spec, factor_breaks(p, b, Some(a)));
                }
            }
        }
        let b = [1, 2, 4, 5, 7, 8][rng.gen_range(0..6)];
        let spec = TowerSpec::new(
            FieldSpec::prime(p),
            vec![StepSpec::artin_schreier(format!("t^-{b}"))],
        );
        (spec, factor_breaks(p, b, None))
    };
    let mut out = Vec::new();
    while out.len() < count {
        let (s1, b1) = factor(true);
        let h11 = s1.steps.len() > 1;
        let (s2, b2) = factor(!h11);
        if disjoint(&b1, &b2) {
            out.push((s1, s2));
        }
    }
    out
}

/// Positive classical breaks as strings, for messages.
pub fn show(v: &[Q]) -> String {
    let parts: Vec<String> = v.iter().map(q_str).collect();
    format!("{{{}}}", parts.join(", "))
}
