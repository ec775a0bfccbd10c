use super::*;
use crate::pgroups::{direct_product, cyclic, group_name, heisenberg, identify_h11, symmetric3};
use crate::tower::{FieldSpec, StepSpec, TowerSpec};

fn build(p: u64, steps: Vec<StepSpec>, n: i64) -> TowerModel {
    TowerModel::build(&TowerSpec::new(FieldSpec::prime(p), steps), n).unwrap()
}

fn wild(rhs: &[&str]) -> Vec<StepSpec> {
    rhs.iter().map(|r| StepSpec::artin_schreier(*r)).collect()
}

fn sorted_lower(g: &GaloisGroup) -> Vec<i64> {
    let mut v: Vec<i64> = g.lower_numbers().iter().flatten().copied().collect();
    v.sort_unstable();
    v
}

#[test]
fn cyclic_cubic() {
    let m = build(3, wild(&["t^-1"]), 64);
    let g = galois_group(&m).unwrap();
    assert_eq!(g.order(), 3);
    assert_eq!(sorted_lower(&g), vec![2, 2]);
    assert_eq!(group_name(g.table()), "C_3");
    assert_eq!(g.different_exponent(), 4);
    // the corrections are g1 -> g1 + c for c in F_3
    let mut consts: Vec<u32> = g.elements().iter().map(|e| e.wild[0][1].index()).collect();
    consts.sort_unstable();
    assert_eq!(consts, vec![0, 1, 2]);
    // sigma(s) - s = 2 T Y + T + ... for Y -> Y + 1
    let k = g.elements().iter().position(|e| e.wild[0][1] == FqElem::ONE).unwrap();
    let diff = g
        .sigma_series(k)
        .sub(&LaurentSeries::var(m.field(), 40))
        .unwrap();
    assert_eq!(diff.valuation().unwrap(), 2);
    assert_eq!(diff.leading_coeff().unwrap().index(), 2);
}

#[test]
fn cp_break_is_b_plus_one() {
    for b in [1, 2, 4, 5] {
        let m = build(3, wild(&[&format!("t^-{b}")]), 64);
        let g = galois_group(&m).unwrap();
        assert_eq!(sorted_lower(&g), vec![b + 1; 2], "b = {b}");
        assert_eq!(g.different_exponent(), 2 * (b + 1));
    }
    let m = build(5, wild(&["2*t^-3 + t^-1"]), 64);
    let g = galois_group(&m).unwrap();
    assert_eq!(sorted_lower(&g), vec![4; 4]);
}

#[test]
fn heisenberg_group() {
    let m = build(3, wild(&["t^-1", "t^-4", "g1*t^-4 + 2*t^-5"]), 64);
    let g = galois_group(&m).unwrap();
    assert_eq!(g.order(), 27);
    assert!(identify_h11(g.table(), 3));
    assert_eq!(g.table().invariants(), heisenberg(3).invariants());
    let lower = sorted_lower(&g);
    let count = |i| lower.iter().filter(|&&x| x == i).count();
    assert_eq!((count(2), count(11), count(14)), (18, 6, 2));
    assert_eq!(g.different_exponent(), 130);
    // z-corrections are n x + c: only the constant and g2 slots move
    for e in g.elements() {
        assert_eq!(e.wild[2][2], FqElem::ONE);
        assert_eq!(e.wild[2][0], FqElem::ZERO);
    }
    for a in 0..27 {
        for b in 0..27 {
            let ab = g.table().mul(a, b);
            if let (Some(x), Some(y), Some(z)) = (g.lower_number(a), g.lower_number(b), g.lower_number(ab)) {
                assert!(z >= x.min(y));
            }
        }
    }
}

#[test]
fn symmetric_group() {
    let m = build(3, vec![StepSpec::Tame { m: 2 }, StepSpec::artin_schreier("g1^-1")], 64);
    let g = galois_group(&m).unwrap();
    assert_eq!(g.order(), 6);
    assert_eq!(g.table().invariants(), symmetric3().invariants());
    assert_eq!(group_name(g.table()), "S_3");
    assert_eq!(sorted_lower(&g), vec![1, 1, 1, 2, 2]);
    // the tame generator u -> -u sends x to 2x + c
    for (k, e) in g.elements().iter().enumerate() {
        let tame = e.tame[0];
        let lambda = e.wild[0][0];
        assert_eq!(tame, lambda);
        assert_eq!(g.lower_number(k) == Some(1), tame != FqElem::ONE);
    }
    assert_eq!(g.wild_subgroup().len(), 3);
    let j = g.automorphism_json(g.generators()[0]);
    assert!(j.get("tame").is_some() && j.get("shifts").is_some());
}

#[test]
fn tame_over_f9_with_wild_part() {
    let spec = TowerSpec::new(
        FieldSpec { p: 3, n: 2, modulus: None },
        vec![StepSpec::Tame { m: 4 }, StepSpec::artin_schreier("t^-1")],
    );
    let m = TowerModel::build(&spec, 64).unwrap();
    let g = galois_group(&m).unwrap();
    assert_eq!(g.order(), 12);
    assert_eq!(group_name(g.table()), "C_3 x C_4");
    assert_eq!(g.table().invariants(), direct_product(&cyclic(3), &cyclic(4)).invariants());
    let mut e: Vec<u64> = (0..12).map(|k| g.tame_exponents(k)[0]).collect();
    e.sort_unstable();
    assert_eq!(e, vec![0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3]);
}

#[test]
fn non_galois_is_detected() {
    // u^2 = t, then x^3 - x = u^-1 + u^-2: the conjugate u -> -u would need
    // x -> 2x + ..., which does not match the u^-2 term
    let m = build(3, vec![StepSpec::Tame { m: 2 }, StepSpec::artin_schreier("g1^-1 + g1^-2")], 64);
    match galois_group(&m).unwrap_err() {
        Error::ExtensionNotGalois { found, degree } => {
            assert_eq!((found, degree), (3, 6));
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn composite_of_two_cubics() {
    let m = build(3, wild(&["t^-1", "t^-2"]), 64);
    let g = galois_group(&m).unwrap();
    assert_eq!(group_name(g.table()), "C_3 x C_3");
    // upper breaks {1, 2} sit at lower breaks {1, 4}
    assert_eq!(sorted_lower(&g), vec![2, 2, 2, 2, 2, 2, 5, 5]);
}

#[test]
fn affine_composition_law() {
    let f = crate::finite_field::FqField::prime(3).unwrap();
    let one = FqElem::ONE;
    let two = f.from_int(2);
    let zero = FqElem::ZERO;
    // sigma: g0 -> g0 + 1, g1 -> g1 + g0 ; tau: g0 -> g0, g1 -> g1 + 1
    let sigma = AutData { tame: vec![], wild: vec![vec![one, one], vec![one, one, zero]] };
    let tau = AutData { tame: vec![], wild: vec![vec![one, zero], vec![zero, one, one]] };
    let st = sigma.compose(&tau, &f);
    assert_eq!(st.wild[1], vec![one, one, one]);
    let ts = tau.compose(&sigma, &f);
    assert_eq!(ts.wild[1], vec![one, one, one]);
    // sigma^3 = id
    let s2 = sigma.compose(&sigma, &f);
    assert_eq!(s2.wild[1], vec![two, one, one]);
    assert!(s2.compose(&sigma, &f).is_identity());
}
