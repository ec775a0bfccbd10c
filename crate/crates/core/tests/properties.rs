use ramify::pgroups::quotient;
use ramify::ramification::{quotient_breaks, Q};
use ramify::witness::{catalog, construct_h11, h11_spec, Analysis};

fn corpus() -> Vec<Analysis> {
    let mut out: Vec<Analysis> = catalog()
        .values()
        .map(|s| Analysis::run(s, None).unwrap())
        .collect();
    for (p, b, a) in [(3, 2, 8), (5, 1, 3), (5, 3, 4)] {
        out.push(Analysis::run(&h11_spec(p, 1, b, a, 1).unwrap(), None).unwrap());
    }
    out
}

#[test]
fn lower_numbers_are_ultrametric() {
    for a in corpus() {
        let g = &a.group;
        let t = g.table();
        let i = |k: usize| g.lower_number(k).unwrap_or(i64::MAX);
        for x in 0..t.order() {
            for y in 0..t.order() {
                assert!(i(t.mul(x, y)) >= i(x).min(i(y)), "{:?}", a.spec.steps);
            }
        }
    }
}

#[test]
fn herbrand_is_concave_and_counts_the_wild_degree() {
    for a in corpus() {
        let b = &a.breaks;
        let corners = b.phi.corners();
        let slopes: Vec<Q> = corners
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))
            .collect();
        assert!(slopes.windows(2).all(|w| w[0] > w[1]), "{:?}", a.spec.steps);
        let wild = a.group.wild_subgroup().len() as u64;
        let p = a.p();
        let n = (wild as f64).log(p as f64).round() as usize;
        assert_eq!(p.pow(n as u32), wild);
        assert_eq!(b.wild_multiset().len(), n, "{:?}", a.spec.steps);
    }
}

#[test]
fn quotient_breaks_are_a_submultiset() {
    for a in corpus() {
        let t = a.group.table();
        let upper = a.breaks.upper_values();
        for n in t.subgroups().unwrap() {
            if !t.is_normal(&n) {
                continue;
            }
            let qb = quotient_breaks(&a.breaks, a.group.lower_numbers(), t, &n).unwrap();
            let (qt, _) = quotient(t, &n).unwrap();
            assert_eq!(qb.group_order as usize, qt.order());
            let mut rest = upper.clone();
            for v in qb.upper_values() {
                let k = rest.iter().position(|u| *u == v).expect("break of G");
                rest.remove(k);
            }
        }
    }
}

#[test]
fn h11_galois_group_is_minimal_nonabelian() {
    for (p, b, a) in [(3, 1, 4), (3, 2, 5), (5, 2, 4)] {
        let r = construct_h11(p, b, a).unwrap();
        let t = r.analysis.group.table();
        assert!(t.is_minimal_nonabelian().unwrap());
        let center = t.center();
        assert_eq!(center.len() as u64, p);
        assert_eq!(t.frattini().unwrap(), center);
        assert_eq!(t.derived_subgroup(), center);
        assert_eq!(t.rank().unwrap(), 2);
    }
}
