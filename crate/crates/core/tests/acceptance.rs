//! The ten acceptance criteria. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::{BTreeMap, HashMap};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ramify::pgroups::quotient;
use ramify::ramification::{
    hasse_arf_check, q, q_frac, quotient_breaks, HasseArf, TheoremVerdict, Q,
};
use ramify::tower::{FieldSpec, StepSpec, TowerSpec};
use ramify::witness::{
    construct_cp, construct_h11, construct_h11_over, construct_s3, disjoint_composite, h11_spec,
    random_disjoint_pairs, show, Analysis,
};

const SEED: u64 = 0x5eed;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: ramify::Error) -> String {
    e.to_string()
}

fn admissible(p: u64, b: u64, a: u64) -> bool {
    !b.is_multiple_of(p) && a > b && !a.is_multiple_of(p) && !(a + b).is_multiple_of(p)
}

fn c3(b: u64) -> TowerSpec {
    TowerSpec::new(
        FieldSpec::prime(3),
        vec![StepSpec::artin_schreier(format!("t^-{b}"))],
    )
}

#[derive(Default)]
struct State {
    corpus: Vec<Analysis>,
    /// (p, b, a) -> upper breaks over F_p
    sweep: BTreeMap<(u64, u64, u64), Vec<Q>>,
}

fn run_cli(args: &[&str]) -> Result<(serde_json::Value, i32), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ramify"))
        .args(args)
        .env_remove("RAMIFY_PRECISION")
        .output()
        .map_err(|e| e.to_string())?;
    let json = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    Ok((json, out.status.code().unwrap_or(-1)))
}

fn criterion1(st: &mut State) -> Check {
    let (json, code) = run_cli(&["verify", "converse", "--p", "3", "--b", "1", "--a", "4"])?;
    ensure(code == 0, || format!("exit status {code}"))?;
    let strings = |v: &serde_json::Value| -> Vec<String> {
        v.as_array()
            .map(|a| a.iter().filter_map(|x| x.as_str().map(String::from)).collect())
            .unwrap_or_default()
    };
    let upper: Vec<String> = json["upper"]
        .as_array()
        .map(|a| a.iter().filter_map(|u| u["break"].as_str().map(String::from)).collect())
        .unwrap_or_default();
    ensure(upper == ["1", "4", "13/3"], || format!("upper {upper:?}"))?;
    let nonlog = strings(&json["nonlog"]);
    ensure(nonlog == ["2", "5", "16/3"], || format!("nonlog {nonlog:?}"))?;
    ensure(json["group"] == "H(1,1)", || format!("group {}", json["group"]))?;
    let r = construct_h11(3, 1, 4).map_err(err)?;
    let n = r.analysis.group.elements().len();
    ensure(n == 27 && r.passed(), || format!("{n} automorphisms, checks {:?}", r.checks))?;
    st.corpus.push(r.analysis);
    Ok(format!("upper {{1, 4, 13/3}}, non-log {{2, 5, 16/3}}, H(1,1) from {n} automorphisms"))
}

fn criterion2(st: &mut State) -> Check {
    let mut count = 0;
    for p in [3u64, 5] {
        for b in 1..=4u64 {
            for a in 1..=12u64 {
                let built = h11_spec(p, 1, b, a, 1);
                if !admissible(p, b, a) {
                    ensure(built.is_err(), || format!("({p},{b},{a}) accepted"))?;
                    continue;
                }
                let r = construct_h11(p, b, a).map_err(|e| format!("({p},{b},{a}): {e}"))?;
                let upper = r.breaks().upper_values();
                let expected = vec![q(b as i64), q(a as i64), q(a as i64) + q_frac(b as i64, p as i64)];
                ensure(upper == expected, || {
                    format!("({p},{b},{a}): {} != {}", show(&upper), show(&expected))
                })?;
                ensure(!upper[2].is_integer() && r.converse(), || {
                    format!("({p},{b},{a}): largest break integral")
                })?;
                ensure(r.passed(), || format!("({p},{b},{a}): {:?}", r.checks))?;
                st.sweep.insert((p, b, a), upper);
                st.corpus.push(r.analysis);
                count += 1;
            }
        }
    }
    Ok(format!("{count} admissible (p, b, a) match b, a, a + b/p"))
}

fn criterion3(st: &mut State) -> Check {
    for b in [1u64, 2, 4, 5] {
        let start = Instant::now();
        let r = construct_cp(3, 1, b, None).map_err(err)?;
        ensure(r.breaks().upper_values() == vec![q(b as i64)], || {
            format!("b = {b}: {}", show(&r.breaks().upper_values()))
        })?;
        ensure(start.elapsed() <= Duration::from_secs(1), || format!("b = {b} too slow"))?;
        st.corpus.push(r.analysis);
    }
    Ok("breaks 1, 2, 4, 5".into())
}

fn criterion4(st: &mut State) -> Check {
    let mut pairs = random_disjoint_pairs(SEED, 19);
    pairs.push((
        h11_spec(3, 1, 1, 4, 1).map_err(err)?,
        h11_spec(3, 1, 2, 5, 1).map_err(err)?,
    ));
    let mut orders = BTreeMap::new();
    let mut big = Duration::ZERO;
    for (s1, s2) in &pairs {
        let start = Instant::now();
        let r = disjoint_composite(s1, s2, None).map_err(err)?;
        ensure(r.passed(), || format!("{:?}: {:?}", r.analysis.spec, r.checks))?;
        let n = r.analysis.group.order();
        if n == 729 {
            big = start.elapsed();
        }
        *orders.entry(n).or_insert(0) += 1;
        st.corpus.push(r.analysis);
    }
    ensure(orders.contains_key(&729), || "no order-729 case".into())?;
    ensure(big <= Duration::from_secs(120), || format!("order 729 took {big:.2?}"))?;
    Ok(format!("{} pairs, orders {orders:?}, order 729 in {big:.2?}", pairs.len()))
}

fn criterion5(st: &mut State) -> Check {
    let mut instances = 0;
    let mut record = |what: String, abelian: bool, verdict: HasseArf| -> Result<(), String> {
        if abelian {
            instances += 1;
            ensure(verdict == HasseArf::Pass, || format!("{what}: non-integral break"))?;
        }
        Ok(())
    };
    for (p, bs) in [(3u64, [1u64, 2, 4, 5, 7, 8]), (5, [1, 2, 3, 4, 6, 7])] {
        for b in bs {
            let r = construct_cp(p, 1, b, None).map_err(err)?;
            let ha = r.analysis.hasse_arf();
            record(format!("C_{p} b={b}"), ha.abelian, ha.verdict)?;
            st.corpus.push(r.analysis);
        }
    }
    for a in &st.corpus {
        let ha = a.hasse_arf();
        record(format!("{:?}", a.spec.steps), ha.abelian, ha.verdict)?;
        let t = a.group.table();
        if t.order() > 125 {
            continue;
        }
        for n in t.subgroups().map_err(err)? {
            if n.len() == t.order() || !t.is_normal(&n) {
                continue;
            }
            let (qt, _) = quotient(t, &n).map_err(err)?;
            let qb = quotient_breaks(&a.breaks, a.group.lower_numbers(), t, &n).map_err(err)?;
            let ha = hasse_arf_check(&qb, &qt);
            record(format!("quotient of {:?}", a.spec.steps), ha.abelian, ha.verdict)?;
        }
    }
    ensure(instances >= 30, || format!("only {instances} abelian instances"))?;
    Ok(format!("{instances} abelian extensions, all integral"))
}

fn criterion6(st: &mut State) -> Check {
    let r = construct_s3(3, 2, None).map_err(err)?;
    let nonlog = r.breaks().nonlog();
    ensure(nonlog == vec![q(1), q_frac(3, 2)], || format!("non-log {}", show(&nonlog)))?;
    ensure(!nonlog[1].is_integer(), || "3/2 integral".into())?;
    let a = &r.analysis;
    ensure(!a.group.table().is_abelian(), || "abelian".into())?;
    let wild = a.group.table().subgroup_table(&a.group.wild_subgroup()).map_err(err)?;
    ensure(wild.is_abelian(), || "wild part non-abelian".into())?;
    ensure(a.model.ramification_index() == a.model.degree(), || "not totally ramified".into())?;
    let verdict = a.theorem().map_err(err)?;
    ensure(verdict == TheoremVerdict::Confirmed, || format!("{verdict:?}"))?;
    st.corpus.push(r.analysis);
    Ok("S_3 non-log {1, 3/2}, CONFIRMED".into())
}

fn criterion7(st: &mut State) -> Check {
    for a in &st.corpus {
        for (name, ok) in a.consistency() {
            ensure(ok, || format!("{name} fails for {:?}", a.spec.steps))?;
        }
    }
    let h = construct_h11(3, 1, 4).map_err(err)?;
    let lower = h.breaks().lower.clone();
    ensure(lower == vec![q(1), q(10), q(13)], || format!("lower {}", show(&lower)))?;
    ensure(h.analysis.different() == 130, || format!("different {}", h.analysis.different()))?;
    Ok(format!(
        "{} extensions; H(1,1) lower {{1, 10, 13}}, different 130",
        st.corpus.len()
    ))
}

fn criterion8(st: &mut State) -> Check {
    let h = construct_h11(3, 1, 4).map_err(err)?;
    let g = &h.analysis.group;
    let center = g.table().center();
    let qb = quotient_breaks(h.breaks(), g.lower_numbers(), g.table(), &center).map_err(err)?;
    let c = disjoint_composite(&c3(1), &c3(4), None).map_err(err)?;
    let upper = qb.upper_values();
    ensure(upper == vec![q(1), q(4)], || format!("quotient {}", show(&upper)))?;
    ensure(upper == c.breaks().wild_multiset(), || {
        format!("composite {}", show(&c.breaks().wild_multiset()))
    })?;
    ensure(c.analysis.name() == "C_3 x C_3", || c.analysis.name())?;
    st.corpus.push(c.analysis);
    Ok("H(1,1)/Z breaks {1, 4} = C_3 x C_3 composite".into())
}

fn criterion9(st: &mut State) -> Check {
    let sweep = std::mem::take(&mut st.sweep);
    for (&(p, b, a), upper) in &sweep {
        let r = construct_h11_over(p, 2, b, a, 1, None).map_err(|e| format!("({p},{b},{a}): {e}"))?;
        ensure(r.breaks().upper_values() == *upper, || {
            format!("({p},{b},{a}) over F_{}: {}", p * p, show(&r.breaks().upper_values()))
        })?;
        st.corpus.push(r.analysis);
    }
    let n = sweep.len();
    st.sweep = sweep;
    Ok(format!("{n} towers rebuilt over F_(p^2) with identical breaks"))
}

fn criterion10(st: &mut State) -> Check {
    for a in &st.corpus {
        let n = a.precision();
        let b = Analysis::run(&a.spec, Some(2 * n)).map_err(|e| format!("at {}: {e}", 2 * n))?;
        let what = || format!("{:?} at {n} vs {}", a.spec.steps, 2 * n);
        ensure(a.breaks == b.breaks, || format!("breaks differ: {}", what()))?;
        ensure(a.name() == b.name() && a.different() == b.different(), what)?;
        let (la, lb) = (a.model.top(), b.model.top());
        let same_series = la.t.agrees_with(&lb.t)
            && la.x.iter().zip(&lb.x).all(|(x, y)| x.agrees_with(y));
        ensure(same_series, || format!("registry differs: {}", what()))?;
        let index: HashMap<_, usize> = b
            .group
            .elements()
            .iter()
            .enumerate()
            .map(|(k, d)| (d.clone(), k))
            .collect();
        for (k, d) in a.group.elements().iter().enumerate() {
            let Some(&j) = index.get(d) else {
                return Err(format!("automorphism missing: {}", what()));
            };
            ensure(a.group.lower_number(k) == b.group.lower_number(j), what)?;
            ensure(a.group.sigma_series(k).agrees_with(b.group.sigma_series(j)), || {
                format!("sigma(s) differs: {}", what())
            })?;
        }
    }
    let args = ["verify", "converse", "--p", "3", "--b", "1", "--a", "4"];
    let (plain, _) = run_cli(&args)?;
    let mut doubled_args = args.to_vec();
    doubled_args.extend(["--precision", "128"]);
    let (doubled, _) = run_cli(&doubled_args)?;
    ensure(plain == doubled, || "CLI report changes with --precision".into())?;
    Ok(format!("{} extensions stable under doubled precision", st.corpus.len()))
}

type Criterion = (u32, &'static str, Option<u64>, fn(&mut State) -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "H(1,1) witness", Some(10), criterion1),
        (2, "closed-form sweep", Some(300), criterion2),
        (3, "C_p breaks", None, criterion3),
        (4, "composite law", None, criterion4),
        (5, "Hasse-Arf suite", None, criterion5),
        (6, "S_3 contrapositive", Some(2), criterion6),
        (7, "consistency identities", None, criterion7),
        (8, "quotient compatibility", Some(5), criterion8),
        (9, "base-change invariance", None, criterion9),
        (10, "precision robustness", None, criterion10),
    ];
    // criterion 7 and 10 run over everything built before them; 9 feeds 10
    let order = [1, 2, 3, 4, 6, 8, 9, 5, 7, 10];
    let mut st = State::default();
    let mut results = BTreeMap::new();
    for n in order {
        let (num, title, limit, f) = criteria[n - 1];
        let start = Instant::now();
        let outcome = f(&mut st);
        let elapsed = start.elapsed();
        let (mut ok, mut detail) = match outcome {
            Ok(d) => (true, d),
            Err(e) => (false, e),
        };
        if let Some(secs) = limit {
            if elapsed > Duration::from_secs(secs) {
                ok = false;
                detail = format!("{detail}; over the {secs} s limit");
            }
        }
        results.insert(num, (title, ok, detail, elapsed));
    }
    let mut failed = 0;
    for (num, (title, ok, detail, elapsed)) in &results {
        let tag = if *ok { "PASS" } else { "FAIL" };
        println!("criterion {num:>2} {tag}  {title}: {detail} [{elapsed:.2?}]");
        failed += usize::from(!ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
