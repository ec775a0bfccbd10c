use super::*;

fn f3() -> Fq {
    FqField::prime(3).unwrap()
}

fn as_spec(p: u64, rhs: &[&str]) -> TowerSpec {
    TowerSpec::new(
        FieldSpec::prime(p),
        rhs.iter().map(|r| StepSpec::artin_schreier(*r)).collect(),
    )
}

fn ints(s: &LaurentSeries) -> Vec<(i64, u32)> {
    s.terms().map(|(e, c)| (e, c.index())).collect()
}

#[test]
fn reduce_examples() {
    let f = f3();
    let r = as_reduce(&LaurentSeries::from_ints(&f, -3, &[1], 10)).unwrap();
    assert_eq!(r.break_, 1);
    assert_eq!(ints(&r.reduced), vec![(-1, 1)]);
    assert_eq!(r.shift, vec![(-1, FqElem::ONE)]);

    let g = LaurentSeries::from_ints(&f, -2, &[1, 1], 10);
    let r = as_reduce(&g).unwrap();
    assert_eq!(r.break_, 2);
    assert!(r.shift.is_empty());
    assert!(r.reduced.agrees_with(&g));

    let one = LaurentSeries::one(&f, 10);
    assert_eq!(as_reduce(&one).unwrap_err(), Error::NotWildTotallyRamified);
    let zero = LaurentSeries::zero(&f, 10);
    assert_eq!(as_reduce(&zero).unwrap_err(), Error::TrivialStep);
    // t^-9 + t^-3 = wp(t^-3) + 2 t^-3 + t^-3 + ... reduces twice
    let h = LaurentSeries::from_ints(&f, -9, &[1, 0, 0, 0, 0, 0, 1], 5);
    let r = as_reduce(&h).unwrap();
    assert_eq!(r.break_, 1);
}

#[test]
fn reduce_over_f9() {
    let f = FqField::new(3, 2, None).unwrap();
    let w = f.generator_w();
    // w t^-3 = wp(w^(1/3) t^-1) + w^(1/3) t^-1
    let s = LaurentSeries::monomial(&f, w, -3, 10);
    let r = as_reduce(&s).unwrap();
    assert_eq!(r.break_, 1);
    assert_eq!(r.reduced.leading_coeff().unwrap(), f.pth_root(w));
    // constant w is not in wp(F_9) iff its trace is non-zero
    let c = LaurentSeries::monomial(&f, w, 0, 10);
    let expected = if f.is_wp_image(w) {
        Error::TrivialStep
    } else {
        Error::NotWildTotallyRamified
    };
    assert_eq!(as_reduce(&c).unwrap_err(), expected);
}

#[test]
fn cyclic_cubic() {
    let m = TowerModel::build(&as_spec(3, &["t^-1"]), 64).unwrap();
    assert_eq!(m.degree(), 3);
    let top = m.top();
    assert_eq!(top.t.valuation().unwrap(), 3);
    assert_eq!(top.t.leading_coeff().unwrap(), FqElem::ONE);
    let d = m.derived(1).unwrap();
    assert_eq!(d.g[0].valuation().unwrap(), -1);
    assert_eq!(d.g[0].leading_coeff().unwrap(), FqElem::ONE);
    let rel = m.eval_expr(&parse_expr("g1^3 - g1").unwrap()).unwrap();
    let tinv = top.t.inv().unwrap();
    assert!(rel.agrees_with(&tinv));
    assert!(rel.rel_prec() >= 32);
    m.check_relations().unwrap();
    match &m.steps()[0].kind {
        StepKind::ArtinSchreier { break_, i, j, .. } => {
            assert_eq!((*break_, *i, *j), (1, 1, 2));
        }
        _ => panic!("wild step expected"),
    }
}

#[test]
fn heisenberg_tower() {
    let partial = TowerModel::build(&as_spec(3, &["t^-1", "t^-4"]), 64).unwrap();
    assert_eq!(partial.degree(), 9);
    let e = parse_expr("t^-4*g1 + 2*t^-5").unwrap();
    let rhs = partial.eval_expr(&e).unwrap();
    assert_eq!(rhs.valuation().unwrap(), -45);

    let m = TowerModel::build(&as_spec(3, &["t^-1", "t^-4", "g1*t^-4 + 2*t^-5"]), 64).unwrap();
    assert_eq!(m.degree(), 27);
    assert_eq!(m.top().t.valuation().unwrap(), 27);
    let rhs = m.eval_expr(&e).unwrap();
    assert_eq!(rhs.valuation().unwrap(), -135);
    m.check_relations().unwrap();
    let breaks: Vec<i64> = m
        .steps()
        .iter()
        .map(|s| match s.kind {
            StepKind::ArtinSchreier { break_, .. } => break_,
            _ => 0,
        })
        .collect();
    // relative breaks, each in the uniformizer of the level below
    assert_eq!(breaks, vec![1, 10, 13]);
}

#[test]
fn s3_tower() {
    let spec = TowerSpec::new(
        FieldSpec::prime(3),
        vec![StepSpec::Tame { m: 2 }, StepSpec::artin_schreier("g1^-1")],
    );
    let m = TowerModel::build(&spec, 64).unwrap();
    assert_eq!(m.degree(), 6);
    m.check_relations().unwrap();
    let d = m.derived(2).unwrap();
    let u2 = d.g[0].pow(2).unwrap();
    assert!(u2.agrees_with(&m.top().t));
}

#[test]
fn tame_steps() {
    let m = TowerModel::base(f3(), 64).extend_tame(2).unwrap();
    assert_eq!(m.degree(), 2);
    assert_eq!(ints(&m.top().t), vec![(2, 1)]);
    assert_eq!(
        TowerModel::base(f3(), 64).extend_tame(4).unwrap_err(),
        Error::NoSuchRoot { m: 4, q: 3 }
    );
    assert!(matches!(
        TowerModel::base(f3(), 64).extend_tame(3).unwrap_err(),
        Error::NotCoprime { .. }
    ));
    let f9 = FqField::new(3, 2, None).unwrap();
    let m = TowerModel::base(f9, 64).extend_tame(4).unwrap();
    assert_eq!(m.degree(), 4);
    m.check_relations().unwrap();
}

#[test]
fn build_errors_carry_step_index() {
    let err = TowerModel::build(&as_spec(3, &["t^-1", "t^-4", "g3*t^-4"]), 64).unwrap_err();
    match err {
        Error::Step { index, source } => {
            assert_eq!(index, 3);
            assert!(matches!(*source, Error::UnknownSymbol { .. }));
        }
        other => panic!("unexpected {other:?}"),
    }
    let err = TowerModel::build(&as_spec(3, &["1"]), 64).unwrap_err();
    assert_eq!(err.root(), &Error::NotWildTotallyRamified);
    let err = TowerModel::build(&as_spec(3, &["t^^2"]), 64).unwrap_err();
    assert!(matches!(err.root(), Error::Syntax { .. }));
    // g1 = t^-1 + ..., so g1^3 - g1 - t^-1 adds nothing new
    let err = TowerModel::build(&as_spec(3, &["t^-1", "g1^3 - g1"]), 64).unwrap_err();
    assert!(matches!(
        err.root(),
        Error::TrivialStep | Error::PrecisionExhausted(_)
    ));
}

#[test]
fn prefix_stability() {
    let spec = as_spec(3, &["t^-1", "t^-4", "g1*t^-4 + 2*t^-5"]);
    let a = TowerModel::build(&spec, 64).unwrap();
    let b = TowerModel::build(&spec, 128).unwrap();
    assert!(a.top().t.agrees_with(&b.top().t));
    for (x, y) in a.top().x.iter().zip(&b.top().x) {
        assert!(x.agrees_with(y));
    }
    assert!(b.top().t.rel_prec() > a.top().t.rel_prec());
}

#[test]
fn spec_json_roundtrip() {
    let text = r#"{"field": {"p":3,"n":1}, "steps": [{"type":"artin_schreier","rhs":"t^-1"}, {"type":"tame","m":2}], "precision": 80}"#;
    let spec = TowerSpec::from_json(text).unwrap();
    assert_eq!(spec.steps[1], StepSpec::Tame { m: 2 });
    assert_eq!(spec.precision, Some(80));
    assert_eq!(TowerSpec::from_json(&spec.to_json()).unwrap(), spec);
    assert!(TowerSpec::from_json("{\"field\":{}}").is_err());
}

#[test]
fn concat_renumbers() {
    let a = TowerSpec::new(FieldSpec::prime(3), vec![StepSpec::Tame { m: 2 }]);
    let b = as_spec(3, &["t^-1", "g1*t^-2"]);
    let c = a.concat(&b).unwrap();
    assert_eq!(c.steps[2], StepSpec::artin_schreier("g2*t^-2"));
}
