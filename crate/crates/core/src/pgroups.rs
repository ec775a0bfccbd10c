//! Finite groups given by explicit multiplication tables.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_field::{is_prime, prime_factors};

/// Orders up to this bound get every associativity triple checked.
const FULL_ASSOC_CHECK: usize = 64;
/// Subgroup lattices are only enumerated up to this order.
const LATTICE_LIMIT: usize = 256;

/// A subgroup as a sorted list of element indices.
pub type Subgroup = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupTable {
    n: usize,
    mul: Vec<u32>,
    identity: usize,
    inverse: Vec<usize>,
    labels: Option<Vec<String>>,
}

#[derive(Serialize)]
struct TableJson<'a> {
    order: usize,
    mul: Vec<&'a [u32]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<&'a [String]>,
}

impl FiniteGroupTable {
    /// Validates identity, inverses, the Latin property and associativity
    /// (every triple up to order 64, a seeded sample above).
    pub fn new(rows: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        let mut mul = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::InvalidTable("table is not square".into()));
            }
            for &x in row {
                if x >= n {
                    return Err(Error::InvalidTable(format!("entry {x} out of range")));
                }
                mul.push(x as u32);
            }
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::InvalidTable("wrong number of labels".into()));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| rows[e][x] == x && rows[x][e] == x))
            .ok_or_else(|| Error::InvalidTable("no identity".into()))?;
        let mut seen = vec![false; n];
        for a in 0..n {
            for by_row in [true, false] {
                seen.iter_mut().for_each(|s| *s = false);
                for b in 0..n {
                    let x = if by_row { rows[a][b] } else { rows[b][a] };
                    if std::mem::replace(&mut seen[x], true) {
                        return Err(Error::InvalidTable("not a Latin square".into()));
                    }
                }
            }
        }
        let inverse = (0..n)
            .map(|a| (0..n).find(|&b| rows[a][b] == identity).unwrap())
            .collect();
        let g = FiniteGroupTable {
            n,
            mul,
            identity,
            inverse,
            labels,
        };
        g.check_associative()?;
        Ok(g)
    }

    fn check_associative(&self) -> Result<()> {
        let n = self.n;
        let bad = |a, b, c| self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c));
        if n <= FULL_ASSOC_CHECK {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if bad(a, b, c) {
                            return Err(Error::InvalidTable(format!(
                                "not associative at ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..20_000 {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if bad(a, b, c) {
                    return Err(Error::InvalidTable(format!(
                        "not associative at ({a}, {b}, {c})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidTable("wrong number of labels".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|a| (0..self.n).map(|b| self.mul(a, b)).collect())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<&[u32]> = self.mul.chunks(self.n).collect();
        serde_json::to_value(TableJson {
            order: self.n,
            mul: rows,
            labels: self.labels.as_deref(),
        })
        .expect("table serializes")
    }

    pub fn pow(&self, a: usize, k: u64) -> usize {
        let mut r = self.identity;
        for _ in 0..k {
            r = self.mul(r, a);
        }
        r
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn exponent(&self) -> usize {
        (0..self.n)
            .map(|a| self.element_order(a))
            .fold(1, num_integer::lcm)
    }

    pub fn commutator(&self, a: usize, b: usize) -> usize {
        let ab = self.mul(a, b);
        let ba = self.mul(b, a);
        self.mul(ab, self.inv(ba))
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// The prime p when the order is a power of p (order 1 counts for any p
    /// and reports `None`).
    pub fn p_group_prime(&self) -> Option<u64> {
        let f = prime_factors(self.n as u64);
        (f.len() == 1).then(|| f[0])
    }

    pub fn center(&self) -> Subgroup {
        (0..self.n)
            .filter(|&a| (0..self.n).all(|b| self.mul(a, b) == self.mul(b, a)))
            .collect()
    }

    /// Subgroup generated by `gens`.
    pub fn generated(&self, gens: &[usize]) -> Subgroup {
        let mut inside = vec![false; self.n];
        inside[self.identity] = true;
        let mut elems = vec![self.identity];
        let mut k = 0;
        while k < elems.len() {
            let x = elems[k];
            for &g in gens {
                let y = self.mul(x, g);
                if !inside[y] {
                    inside[y] = true;
                    elems.push(y);
                }
            }
            k += 1;
        }
        elems.sort_unstable();
        elems
    }

    pub fn derived_subgroup(&self) -> Subgroup {
        let comms: BTreeSet<usize> = (0..self.n)
            .flat_map(|a| (0..self.n).map(move |b| (a, b)))
            .map(|(a, b)| self.commutator(a, b))
            .collect();
        self.generated(&comms.into_iter().collect::<Vec<_>>())
    }

    pub fn is_subgroup(&self, h: &[usize]) -> bool {
        let set: HashSet<usize> = h.iter().copied().collect();
        set.contains(&self.identity)
            && h.iter()
                .all(|&a| h.iter().all(|&b| set.contains(&self.mul(a, self.inv(b)))))
    }

    pub fn is_normal(&self, h: &[usize]) -> bool {
        let set: HashSet<usize> = h.iter().copied().collect();
        self.is_subgroup(h)
            && (0..self.n).all(|g| {
                h.iter()
                    .all(|&x| set.contains(&self.mul(self.mul(g, x), self.inv(g))))
            })
    }

    /// Smallest normal subgroup containing `gens`.
    pub fn normal_closure(&self, gens: &[usize]) -> Subgroup {
        let conj: BTreeSet<usize> = gens
            .iter()
            .flat_map(|&x| (0..self.n).map(move |g| (g, x)))
            .map(|(g, x)| self.mul(self.mul(g, x), self.inv(g)))
            .collect();
        self.generated(&conj.into_iter().collect::<Vec<_>>())
    }

    /// Product set `HK` of two subgroups (a subgroup when one is normal).
    pub fn product_set(&self, h: &[usize], k: &[usize]) -> Subgroup {
        let set: BTreeSet<usize> = h
            .iter()
            .flat_map(|&a| k.iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.mul(a, b))
            .collect();
        set.into_iter().collect()
    }

    /// Every subgroup, by closing under joins with cyclic subgroups.
    pub fn subgroups(&self) -> Result<Vec<Subgroup>> {
        if self.n > LATTICE_LIMIT {
            return Err(Error::InvalidTable(format!(
                "subgroup lattice enumeration is limited to order {LATTICE_LIMIT}"
            )));
        }
        let cyclic: BTreeSet<Subgroup> = (0..self.n).map(|a| self.generated(&[a])).collect();
        let cyclic: Vec<Subgroup> = cyclic.into_iter().collect();
        let mut all: BTreeSet<Subgroup> = cyclic.iter().cloned().collect();
        let mut frontier: Vec<Subgroup> = cyclic.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for h in &frontier {
                let inside: HashSet<usize> = h.iter().copied().collect();
                for c in &cyclic {
                    if c.iter().all(|x| inside.contains(x)) {
                        continue;
                    }
                    let mut gens = h.clone();
                    gens.extend(c);
                    let j = self.generated(&gens);
                    if all.insert(j.clone()) {
                        next.push(j);
                    }
                }
            }
            frontier = next;
        }
        Ok(all.into_iter().collect())
    }

    pub fn maximal_subgroups(&self) -> Result<Vec<Subgroup>> {
        let subs = self.subgroups()?;
        let proper: Vec<&Subgroup> = subs.iter().filter(|h| h.len() < self.n).collect();
        Ok(proper
            .iter()
            .filter(|h| {
                !proper
                    .iter()
                    .any(|k| k.len() > h.len() && is_subset(h, k))
            })
            .map(|h| (*h).clone())
            .collect())
    }

    /// Intersection of the maximal subgroups. Uses the subgroup lattice up
    /// to order 256 and `G^p [G, G]` (valid for p-groups) above.
    pub fn frattini(&self) -> Result<Subgroup> {
        let p = self.p_group_prime();
        if self.n == 1 {
            return Ok(vec![self.identity]);
        }
        let p = p.ok_or(Error::NotPGroup)?;
        if self.n <= LATTICE_LIMIT {
            let maxes = self.maximal_subgroups()?;
            let mut acc: Subgroup = (0..self.n).collect();
            for m in maxes {
                acc.retain(|x| m.binary_search(x).is_ok());
            }
            Ok(acc)
        } else {
            Ok(self.frattini_burnside(p))
        }
    }

    pub(crate) fn frattini_burnside(&self, p: u64) -> Subgroup {
        let mut gens: BTreeSet<usize> = (0..self.n).map(|a| self.pow(a, p)).collect();
        gens.extend(self.derived_subgroup());
        self.generated(&gens.into_iter().collect::<Vec<_>>())
    }

    /// Minimal number of generators, via `rank(G) = rank(G / Phi(G))`.
    pub fn rank(&self) -> Result<usize> {
        if self.n == 1 {
            return Ok(0);
        }
        let p = self.p_group_prime().ok_or(Error::NotPGroup)?;
        let phi = self.frattini()?;
        let mut index = self.n / phi.len();
        let mut r = 0;
        while index > 1 {
            index /= p as usize;
            r += 1;
        }
        Ok(r)
    }

    /// Minimal generating-set size by search over joins of cyclic subgroups.
    pub fn rank_brute_force(&self) -> usize {
        if self.n == 1 {
            return 0;
        }
        let full: Subgroup = (0..self.n).collect();
        let mut level: BTreeSet<Subgroup> = BTreeSet::new();
        level.insert(vec![self.identity]);
        for k in 1.. {
            let mut next = BTreeSet::new();
            for h in &level {
                for a in 0..self.n {
                    if h.binary_search(&a).is_ok() {
                        continue;
                    }
                    let mut gens = h.clone();
                    gens.push(a);
                    next.insert(self.generated(&gens));
                }
            }
            if next.contains(&full) {
                return k;
            }
            level = next;
        }
        unreachable!()
    }

    /// Non-abelian with every proper quotient abelian: every non-trivial
    /// normal subgroup contains the derived subgroup. It suffices to test
    /// normal closures of single elements.
    pub fn is_minimal_nonabelian(&self) -> Result<bool> {
        self.p_group_prime().ok_or(Error::NotPGroup)?;
        if self.is_abelian() {
            return Ok(false);
        }
        let derived = self.derived_subgroup();
        for a in 0..self.n {
            if a == self.identity {
                continue;
            }
            let ncl = self.normal_closure(&[a]);
            if !is_subset(&derived, &ncl) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Sylow p-subgroup of a group whose Sylow p-subgroup is normal.
    pub fn normal_sylow(&self, p: u64) -> Option<Subgroup> {
        let elems: Vec<usize> = (0..self.n)
            .filter(|&a| is_power_of(self.element_order(a) as u64, p))
            .collect();
        let sub = self.generated(&elems);
        let mut pp = 1;
        let mut m = self.n;
        while m.is_multiple_of(p as usize) {
            m /= p as usize;
            pp *= p as usize;
        }
        (sub.len() == pp).then_some(sub)
    }

    /// Restriction of the table to a subgroup, with indices renumbered in
    /// sorted order.
    pub fn subgroup_table(&self, h: &[usize]) -> Result<FiniteGroupTable> {
        let pos: HashMap<usize, usize> = h.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let rows = h
            .iter()
            .map(|&a| {
                h.iter()
                    .map(|&b| {
                        pos.get(&self.mul(a, b))
                            .copied()
                            .ok_or_else(|| Error::InvalidTable("not a subgroup".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteGroupTable::new(rows, None)
    }

    pub fn invariants(&self) -> GroupInvariants {
        GroupInvariants {
            order: self.n,
            abelian: self.is_abelian(),
            exponent: self.exponent(),
            center: self.center().len(),
            derived: self.derived_subgroup().len(),
            rank: self.rank().ok(),
        }
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn is_power_of(mut n: u64, p: u64) -> bool {
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

/// Invariant vector used as the isomorphism test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupInvariants {
    pub order: usize,
    pub abelian: bool,
    pub exponent: usize,
    pub center: usize,
    pub derived: usize,
    pub rank: Option<usize>,
}

pub fn cyclic(n: usize) -> FiniteGroupTable {
    let rows = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    FiniteGroupTable::new(rows, None).expect("cyclic table is valid")
}

/// Elements `(a, b)` are numbered `a * |H| + b`.
pub fn direct_product(g: &FiniteGroupTable, h: &FiniteGroupTable) -> FiniteGroupTable {
    let (n, m) = (g.order(), h.order());
    let rows = (0..n * m)
        .map(|x| {
            (0..n * m)
                .map(|y| g.mul(x / m, y / m) * m + h.mul(x % m, y % m))
                .collect()
        })
        .collect();
    FiniteGroupTable::new(rows, None).expect("product of groups is a group")
}

/// `G / N` together with the projection `G -> G/N`.
pub fn quotient(g: &FiniteGroupTable, normal: &[usize]) -> Result<(FiniteGroupTable, Vec<usize>)> {
    if !g.is_normal(normal) {
        return Err(Error::NotNormal);
    }
    let mut coset = vec![usize::MAX; g.order()];
    let mut reps = Vec::new();
    for a in 0..g.order() {
        if coset[a] != usize::MAX {
            continue;
        }
        let idx = reps.len();
        reps.push(a);
        for &x in normal {
            coset[g.mul(a, x)] = idx;
        }
    }
    let rows = reps
        .iter()
        .map(|&a| reps.iter().map(|&b| coset[g.mul(a, b)]).collect())
        .collect();
    Ok((FiniteGroupTable::new(rows, None)?, coset))
}

/// `P x| C_m` where the generator of C_m acts by the permutation `action` of
/// P's elements. Elements `(x, k)` are numbered `k * |P| + x`.
pub fn semidirect_product(
    p: &FiniteGroupTable,
    m: usize,
    action: &[usize],
) -> Result<FiniteGroupTable> {
    let n = p.order();
    let bad = Error::NotAnAutomorphism(m as u64);
    if action.len() != n || m == 0 {
        return Err(bad);
    }
    let mut image = vec![false; n];
    for &y in action {
        if y >= n || std::mem::replace(&mut image[y], true) {
            return Err(bad);
        }
    }
    for a in 0..n {
        for b in 0..n {
            if action[p.mul(a, b)] != p.mul(action[a], action[b]) {
                return Err(bad);
            }
        }
    }
    // powers[k] = action^k
    let mut powers = vec![(0..n).collect::<Vec<_>>()];
    for k in 1..=m {
        let prev: &Vec<usize> = &powers[k - 1];
        let next = prev.iter().map(|&x| action[x]).collect();
        powers.push(next);
    }
    if powers[m].iter().enumerate().any(|(i, &x)| i != x) {
        return Err(bad);
    }
    let rows = (0..n * m)
        .map(|u| {
            let (x, k) = (u % n, u / n);
            (0..n * m)
                .map(|v| {
                    let (y, l) = (v % n, v / n);
                    ((k + l) % m) * n + p.mul(x, powers[k][y])
                })
                .collect()
        })
        .collect();
    FiniteGroupTable::new(rows, None)
}

/// The symmetric group on three letters as `C_3 x| C_2` by inversion.
pub fn symmetric3() -> FiniteGroupTable {
    let c3 = cyclic(3);
    let inversion: Vec<usize> = (0..3).map(|a| c3.inv(a)).collect();
    semidirect_product(&c3, 2, &inversion).expect("inversion is an automorphism")
}

/// Heisenberg group of upper unitriangular 3x3 matrices over F_p; element
/// `(a, b, c)` is numbered `(a p + b) p + c` and stands for `x^a y^b z^c`.
pub fn heisenberg(p: usize) -> FiniteGroupTable {
    let n = p * p * p;
    let split = |u: usize| (u / (p * p), (u / p) % p, u % p);
    let rows = (0..n)
        .map(|u| {
            let (a, b, c) = split(u);
            (0..n)
                .map(|v| {
                    let (d, e, f) = split(v);
                    ((a + d) % p * p + (b + e) % p) * p + (c + f + a * e) % p
                })
                .collect()
        })
        .collect();
    FiniteGroupTable::new(rows, None).expect("Heisenberg table is valid")
}

/// Generators `x, y, z` of H(1,1) inside `g`: `|x| = |y| = p`,
/// `z = [x, y]` central of order p, and `<x, y> = G`.
pub fn h11_generators(g: &FiniteGroupTable, p: u64) -> Option<(usize, usize, usize)> {
    let pu = p as usize;
    if !is_prime(p) || g.order() != pu * pu * pu || g.is_abelian() || g.exponent() != pu {
        return None;
    }
    let center = g.center();
    for x in 0..g.order() {
        if center.binary_search(&x).is_ok() {
            continue;
        }
        for y in 0..g.order() {
            let z = g.commutator(x, y);
            if z == g.identity() || center.binary_search(&z).is_err() {
                continue;
            }
            if g.generated(&[x, y]).len() == g.order() {
                return Some((x, y, z));
            }
        }
    }
    None
}

/// `|G| = p^3`, exponent p and non-abelian, certified by an explicit
/// generating triple.
pub fn identify_h11(g: &FiniteGroupTable, p: u64) -> bool {
    h11_generators(g, p).is_some()
}

/// Elementary divisors `p^e` of an abelian group, ascending.
pub fn abelian_invariants(g: &FiniteGroupTable) -> Vec<u64> {
    let n = g.order() as u64;
    let mut out = Vec::new();
    let mut primes = prime_factors(n);
    primes.dedup();
    let orders: Vec<u64> = (0..g.order()).map(|a| g.element_order(a) as u64).collect();
    for p in primes {
        // omega[k] = #{x : x^(p^k) = 1} = p^(sum_i min(k, e_i))
        let mut logs = vec![0u32];
        let mut k = 1;
        loop {
            let pk = p.pow(k);
            let count = orders.iter().filter(|&&o| pk % o == 0).count() as u64;
            let mut l = 0;
            let mut c = count;
            while c.is_multiple_of(p) && c > 1 {
                c /= p;
                l += 1;
            }
            logs.push(l);
            if l == logs[logs.len() - 2] {
                break;
            }
            k += 1;
        }
        // number of factors with exponent >= k is logs[k] - logs[k-1]
        let at_least: Vec<u32> = (1..logs.len()).map(|k| logs[k] - logs[k - 1]).collect();
        for k in 1..=at_least.len() {
            let exactly = at_least[k - 1] - at_least.get(k).copied().unwrap_or(0);
            for _ in 0..exactly {
                out.push(p.pow(k as u32));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Descriptive name: invariant factors for abelian groups, `H(1,1)`, `S_3`,
/// or a product over Sylow subgroups for nilpotent groups.
pub fn group_name(g: &FiniteGroupTable) -> String {
    if g.order() == 1 {
        return "1".into();
    }
    if g.is_abelian() {
        return abelian_invariants(g)
            .iter()
            .map(|d| format!("C_{d}"))
            .collect::<Vec<_>>()
            .join(" x ");
    }
    if g.order() == 6 {
        return "S_3".into();
    }
    let mut primes = prime_factors(g.order() as u64);
    primes.dedup();
    if primes.len() == 1 {
        let p = primes[0];
        if identify_h11(g, p) {
            return "H(1,1)".into();
        }
        return format!("order {} non-abelian", g.order());
    }
    let sylows: Option<Vec<Subgroup>> = primes.iter().map(|&p| g.normal_sylow(p)).collect();
    let Some(sylows) = sylows else {
        return format!("order {} non-abelian", g.order());
    };
    let mut nonabelian = Vec::new();
    let mut cyclic_parts = Vec::new();
    for s in &sylows {
        let t = g.subgroup_table(s).expect("Sylow subgroup");
        if t.is_abelian() {
            cyclic_parts.extend(abelian_invariants(&t));
        } else {
            nonabelian.push(group_name(&t));
        }
    }
    cyclic_parts.sort_unstable();
    nonabelian
        .into_iter()
        .chain(cyclic_parts.into_iter().map(|d| format!("C_{d}")))
        .collect::<Vec<_>>()
        .join(" x ")
}
