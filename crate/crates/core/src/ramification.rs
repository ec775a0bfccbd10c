//! Lower and upper ramification filtrations, the Herbrand function, and the
//! integrality checks built on them.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::galois::GaloisGroup;
use crate::pgroups::FiniteGroupTable;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical text form: `"13/3"`, `"4"`, `"-1/2"`.
pub fn q_str(x: &Q) -> String {
    x.to_string()
}

/// Parses `"a"` or `"a/b"`.
pub fn parse_q(s: &str) -> Option<Q> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::one()),
    };
    (!d.is_zero()).then(|| Q::new(n, d))
}

/// A jump of the upper filtration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpperBreak {
    pub value: Q,
    /// `(G^v : G^(v + eps))`.
    pub index: u64,
    /// `log_p` of the index for wild jumps; `None` at a tame jump.
    pub multiplicity: Option<u32>,
}

/// Piecewise-linear Herbrand function through `(0, 0)` and its corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Herbrand {
    /// Corners `(u, phi(u))`, starting at `(0, 0)`.
    corners: Vec<(Q, Q)>,
    /// Slope on each piece after the corresponding corner; the last slope
    /// continues forever.
    slopes: Vec<Q>,
}

impl Herbrand {
    /// From lower breaks `b_1 < .. < b_r` and `|G_u|` on `(b_(k-1), b_k]`.
    pub fn new(lower: &[Q], orders: &[u64], group_order: u64) -> Self {
        let g0 = Q::from_integer(BigInt::from(group_order));
        let mut corners = vec![(Q::zero(), Q::zero())];
        let mut slopes = Vec::new();
        let mut prev_u = Q::zero();
        let mut prev_phi = Q::zero();
        for (b, &ord) in lower.iter().zip(orders) {
            let slope = Q::from_integer(BigInt::from(ord)) / &g0;
            if b > &prev_u {
                prev_phi = &prev_phi + (b - &prev_u) * &slope;
                slopes.push(slope);
                corners.push((b.clone(), prev_phi.clone()));
                prev_u = b.clone();
            }
        }
        slopes.push(Q::one() / g0);
        Herbrand { corners, slopes }
    }

    pub fn corners(&self) -> &[(Q, Q)] {
        &self.corners
    }

    pub fn phi(&self, u: &Q) -> Q {
        if u.is_negative() {
            return u.clone();
        }
        let k = self.corners.iter().rposition(|(c, _)| c <= u).unwrap();
        let (c, v) = &self.corners[k];
        v + (u - c) * &self.slopes[k]
    }

    pub fn psi(&self, v: &Q) -> Q {
        if v.is_negative() {
            return v.clone();
        }
        let k = self.corners.iter().rposition(|(_, w)| w <= v).unwrap();
        let (c, w) = &self.corners[k];
        c + (v - w) / &self.slopes[k]
    }
}

/// Lower breaks with the orders of the filtration, and the upper data
/// derived through the Herbrand function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BreakData {
    pub group_order: u64,
    pub p: u64,
    /// Lower breaks `b_1 < .. < b_r`.
    pub lower: Vec<Q>,
    /// `|G_u|` for `u` in `(b_(k-1), b_k]` (with `b_0 = -1`).
    pub lower_orders: Vec<u64>,
    pub phi: Herbrand,
    pub upper: Vec<UpperBreak>,
}

impl BreakData {
    pub fn from_lower(p: u64, group_order: u64, lower: Vec<Q>, lower_orders: Vec<u64>) -> Self {
        let phi = Herbrand::new(&lower, &lower_orders, group_order);
        let upper = lower
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let after = lower_orders.get(k + 1).copied().unwrap_or(1);
                let index = lower_orders[k] / after;
                UpperBreak {
                    value: phi.phi(b),
                    index,
                    multiplicity: log_exact(index, p),
                }
            })
            .collect();
        BreakData {
            group_order,
            p,
            lower,
            lower_orders,
            phi,
            upper,
        }
    }

    /// Rebuilds lower data from upper jumps `(v, index)` of a quotient.
    pub fn from_upper(p: u64, group_order: u64, jumps: &[(Q, u64)]) -> Self {
        let mut lower = Vec::new();
        let mut orders = Vec::new();
        let mut ord = group_order;
        let mut u = Q::zero();
        let mut v_prev = Q::zero();
        for (v, index) in jumps {
            // psi has slope |G| / |G^w| on (v_prev, v]
            let slope = Q::new(BigInt::from(group_order), BigInt::from(ord));
            u = &u + (v - &v_prev) * slope;
            lower.push(u.clone());
            orders.push(ord);
            ord /= index;
            v_prev = v.clone();
        }
        BreakData::from_lower(p, group_order, lower, orders)
    }

    /// Classical upper breaks counted with multiplicity (wild part only).
    pub fn wild_multiset(&self) -> Vec<Q> {
        let mut out = Vec::new();
        for b in &self.upper {
            if b.value.is_positive() {
                for _ in 0..b.multiplicity.unwrap_or(1) {
                    out.push(b.value.clone());
                }
            }
        }
        out
    }

    /// Non-log breaks: classical + 1, wild jumps repeated by multiplicity.
    pub fn nonlog(&self) -> Vec<Q> {
        let mut out = Vec::new();
        for b in &self.upper {
            let reps = if b.value.is_positive() {
                b.multiplicity.unwrap_or(1)
            } else {
                1
            };
            for _ in 0..reps {
                out.push(&b.value + Q::one());
            }
        }
        out
    }

    pub fn upper_values(&self) -> Vec<Q> {
        self.upper.iter().map(|b| b.value.clone()).collect()
    }

    pub fn all_upper_integral(&self) -> bool {
        self.upper.iter().all(|b| b.value.is_integer())
    }

    pub fn all_nonlog_integral(&self) -> bool {
        self.nonlog().iter().all(|b| b.is_integer())
    }

    /// `sum_{u >= 0} (|G_u| - 1)` over the integers u, from the filtration.
    pub fn different_from_filtration(&self) -> Option<i64> {
        let mut total = 0i64;
        let mut u = 0i64;
        for (b, &ord) in self.lower.iter().zip(&self.lower_orders) {
            if !b.is_integer() {
                return None;
            }
            let b = b.to_integer().to_i64()?;
            while u <= b {
                total += ord as i64 - 1;
                u += 1;
            }
        }
        Some(total)
    }

    /// `|G_u|` at a lower number u >= -1.
    pub fn lower_order_at(&self, u: &Q) -> u64 {
        self.lower
            .iter()
            .position(|b| u <= b)
            .map(|k| self.lower_orders[k])
            .unwrap_or(1)
    }

    /// `|G^v|` at an upper number v >= -1.
    pub fn upper_order_at(&self, v: &Q) -> u64 {
        self.lower_order_at(&self.phi.psi(v))
    }

    pub fn to_json(&self) -> Value {
        let upper: Vec<Value> = self
            .upper
            .iter()
            .map(|b| {
                let mut o = json!({"break": q_str(&b.value), "index": b.index});
                if let Some(d) = b.multiplicity {
                    if b.value.is_positive() {
                        o["multiplicity"] = json!(d);
                    }
                }
                o
            })
            .collect();
        json!({
            "lower": self.lower.iter().map(q_str).collect::<Vec<_>>(),
            "upper": upper,
            "nonlog": self.nonlog().iter().map(q_str).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for BreakData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[Q]| v.iter().map(q_str).collect::<Vec<_>>().join(", ");
        write!(
            f,
            "lower {{{}}}, upper {{{}}}, non-log {{{}}}",
            show(&self.lower),
            show(&self.upper_values()),
            show(&self.nonlog())
        )
    }
}

fn log_exact(mut n: u64, p: u64) -> Option<u32> {
    let mut d = 0;
    while n > 1 && n.is_multiple_of(p) {
        n /= p;
        d += 1;
    }
    (n == 1).then_some(d)
}

/// Lower filtration from `i(sigma)`: `sigma in G_u` iff `i(sigma) >= u + 1`.
/// Checks that every `G_u` is a subgroup of the table.
pub fn lower_filtration(
    i_values: &[Option<i64>],
    table: &FiniteGroupTable,
) -> Result<(Vec<Q>, Vec<u64>)> {
    let mut by_i: BTreeMap<i64, usize> = BTreeMap::new();
    for i in i_values.iter().flatten() {
        *by_i.entry(*i).or_default() += 1;
    }
    let mut lower = Vec::new();
    let mut orders = Vec::new();
    let mut remaining = i_values.len() as u64;
    for (&i, &count) in &by_i {
        let members: Vec<usize> = (0..i_values.len())
            .filter(|&k| i_values[k].is_none_or(|j| j >= i))
            .collect();
        if !table.is_subgroup(&members) {
            return Err(Error::NonFiltration);
        }
        lower.push(q(i - 1));
        orders.push(remaining);
        remaining -= count as u64;
    }
    Ok((lower, orders))
}

/// Break data of a computed Galois group.
pub fn upper_breaks(group: &GaloisGroup, p: u64) -> Result<BreakData> {
    let (lower, orders) = lower_filtration(group.lower_numbers(), group.table())?;
    Ok(BreakData::from_lower(p, group.order() as u64, lower, orders))
}

/// Upper breaks of the fixed field of a normal subgroup N: the jumps of the
/// image filtration `G^v N / N`.
pub fn quotient_breaks(
    breaks: &BreakData,
    i_values: &[Option<i64>],
    table: &FiniteGroupTable,
    normal: &[usize],
) -> Result<BreakData> {
    if !table.is_normal(normal) {
        return Err(Error::NotNormal);
    }
    let in_n: Vec<bool> = {
        let mut v = vec![false; table.order()];
        for &x in normal {
            v[x] = true;
        }
        v
    };
    let image_order = |min_i: Option<i64>| -> u64 {
        let members: Vec<usize> = (0..table.order())
            .filter(|&k| match (min_i, i_values[k]) {
                (None, _) | (_, None) => true,
                (Some(m), Some(i)) => i >= m,
            })
            .collect();
        let inter = members.iter().filter(|&&k| in_n[k]).count();
        (members.len() / inter) as u64
    };
    let q_order = (table.order() / normal.len()) as u64;
    let mut jumps = Vec::new();
    for (b, ub) in breaks.lower.iter().zip(&breaks.upper) {
        let i_at = b.to_integer().to_i64().ok_or(Error::NonFiltration)? + 1;
        let at = image_order(Some(i_at));
        let after = image_order(Some(i_at + 1));
        if at != after {
            jumps.push((ub.value.clone(), at / after));
        }
    }
    Ok(BreakData::from_upper(breaks.p, q_order, &jumps))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HasseArf {
    Pass,
    Fail,
    NotApplicable,
}

impl HasseArf {
    pub fn as_str(self) -> &'static str {
        match self {
            HasseArf::Pass => "PASS",
            HasseArf::Fail => "FAIL",
            HasseArf::NotApplicable => "N/A",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HasseArfReport {
    pub verdict: HasseArf,
    pub abelian: bool,
    pub integral: bool,
}

/// Abelian groups must have integral classical upper breaks; for
/// non-abelian groups integrality is only recorded.
pub fn hasse_arf_check(breaks: &BreakData, table: &FiniteGroupTable) -> HasseArfReport {
    let abelian = table.is_abelian();
    let integral = breaks.all_upper_integral();
    let verdict = match (abelian, integral) {
        (true, true) => HasseArf::Pass,
        (true, false) => HasseArf::Fail,
        (false, _) => HasseArf::NotApplicable,
    };
    HasseArfReport {
        verdict,
        abelian,
        integral,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoremVerdict {
    Vacuous,
    Confirmed,
    Violation,
}

impl TheoremVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoremVerdict::Vacuous => "VACUOUS",
            TheoremVerdict::Confirmed => "CONFIRMED",
            TheoremVerdict::Violation => "VIOLATION",
        }
    }
}

/// Wild part abelian and all non-log breaks integral implies G abelian.
/// Vacuous when the wild part is non-abelian.
pub fn theorem_check(
    breaks: &BreakData,
    table: &FiniteGroupTable,
    wild_subgroup: &[usize],
) -> Result<TheoremVerdict> {
    let wild = table.subgroup_table(wild_subgroup)?;
    if !wild.is_abelian() {
        return Ok(TheoremVerdict::Vacuous);
    }
    if breaks.all_nonlog_integral() && !table.is_abelian() {
        return Ok(TheoremVerdict::Violation);
    }
    Ok(TheoremVerdict::Confirmed)
}

/// `sum_{sigma != 1} i(sigma)`.
pub fn different_exponent(i_values: &[Option<i64>]) -> i64 {
    i_values.iter().flatten().sum()
}

/// `b12 = b1 + b2` as multisets.
pub fn multiset_union_check(b1: &[Q], b2: &[Q], b12: &[Q]) -> bool {
    let mut lhs: Vec<Q> = b1.iter().chain(b2).cloned().collect();
    let mut rhs = b12.to_vec();
    lhs.sort();
    rhs.sort();
    lhs == rhs
}

/// True when the two multisets share no value.
pub fn disjoint(b1: &[Q], b2: &[Q]) -> bool {
    b1.iter().all(|x| !b2.contains(x))
}
