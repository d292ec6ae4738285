//! One `[PASS]`/`[FAIL]` line per acceptance criterion. Every check is exact.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use killrange_core::exactness::{cw_structure, nonexactness_witness, verdict, CLEAR_RULE, OBSTRUCTION_RULE};
use killrange_core::filtration::{genericity_test, GenericConnection};
use killrange_core::harness::{random_q, witness_spec, FieldGen};
use killrange_core::killing::KillingChart;
use killrange_core::linalg::{Matrix, Subspace};
use killrange_core::scalars::{int, Coeff, Poly, Rat, RatFunc};
use killrange_core::spaces::{covariant_derivative, Chart, PointFrame, SpaceSpec};
use killrange_core::tensor::{Slot, Tensor};

type Criterion = (usize, &'static str, fn() -> Result<(), String>, Option<u64>);

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn diag(q: &[i64]) -> Vec<Vec<Rat>> {
    let n = q.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { int(q[i]) } else { int(0) }).collect()).collect()
}

fn cw12() -> SpaceSpec {
    SpaceSpec::CahenWallach { q: diag(&[1, 2]) }
}

fn herm_s2() -> SpaceSpec {
    SpaceSpec::Sphere { n: 2, hermitian: true }
}

fn lorentz_ds() -> SpaceSpec {
    SpaceSpec::ConstCurv { p: 1, q: 2, sign: 1 }
}

fn product(a: SpaceSpec, b: SpaceSpec) -> SpaceSpec {
    SpaceSpec::Product { factors: vec![a, b] }
}

/// `dim {B ∈ so(n) : BQ = QB}` by direct elimination.
fn commutant_in_so(q: &[Vec<Rat>]) -> usize {
    let n = q.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    if pairs.is_empty() {
        return 0;
    }
    let entry = |p: usize, i: usize, j: usize| -> Rat {
        let (a, b) = pairs[p];
        if (i, j) == (a, b) {
            int(1)
        } else if (i, j) == (b, a) {
            int(-1)
        } else {
            int(0)
        }
    };
    let mut rows = Vec::new();
    for k in 0..n {
        for l in 0..n {
            rows.push(
                (0..pairs.len())
                    .map(|p| (0..n).fold(int(0), |acc, t| acc + entry(p, k, t) * &q[t][l] - &q[k][t] * entry(p, t, l)))
                    .collect(),
            );
        }
    }
    Matrix::from_rows(rows, pairs.len()).unwrap().kernel().dim()
}

fn criterion_1() -> Result<(), String> {
    let s = cw_structure(&diag(&[1, 2])).map_err(|e| e.to_string())?;
    let want = (vec![2, 4, 6], vec![6, 8, 10]);
    if (s.h_dims.clone(), s.e_dims.clone()) != want {
        return Err(format!("h {:?}, E {:?}", s.h_dims, s.e_dims));
    }
    if !(s.e_stabilized_at == 2 && s.parallel && s.e_is_e2 && s.closed_forms_agree == Some(true)) {
        return Err(format!("{}", s.to_json()));
    }
    for seed in 1..=10u64 {
        let n = 1 + (seed as usize - 1) % 4;
        let q = random_q(n, seed);
        let s = cw_structure(&q).map_err(|e| e.to_string())?;
        let shifted: Vec<usize> = s.h_dims.iter().map(|d| d + n + 2).collect();
        let oracle = vec![n + commutant_in_so(&q), n + n * (n - 1) / 2 + 1, (n + 2) * (n + 1) / 2];
        if s.h_dims != oracle {
            return Err(format!("seed {seed}: h {:?}, expected {oracle:?}", s.h_dims));
        }
        if s.closed_forms_agree != Some(true) || !s.parallel || !s.e_is_e2 || s.e_dims != shifted || s.e_stabilized_at > 2 {
            return Err(format!("seed {seed}, Q {q:?}: {}", s.to_json()));
        }
    }
    Ok(())
}

fn criterion_2() -> Result<(), String> {
    for spec in [cw12(), SpaceSpec::Flat { p: 1, q: 2 }, SpaceSpec::Sphere { n: 2, hermitian: false }] {
        let chart = Chart::build(&spec).map_err(|e| e.to_string())?;
        let k = KillingChart::new(&chart);
        let m = chart.dim();
        for seed in SEEDS {
            let s = FieldGen::new(m, 3, seed).section(m);
            if k.dwedge(&k.connection(&s)) != k.kappa(&s) {
                return Err(format!("{spec:?}, seed {seed}"));
            }
        }
    }
    Ok(())
}

fn criterion_3() -> Result<(), String> {
    for spec in [cw12(), SpaceSpec::Flat { p: 1, q: 2 }] {
        let chart = Chart::build(&spec).map_err(|e| e.to_string())?;
        let k = KillingChart::new(&chart);
        let m = chart.dim();
        for seed in SEEDS {
            let mut gen = FieldGen::new(m, 3, seed);
            let sigma = gen.tensor(m, vec![Slot::Down]);
            let h = gen.symmetric2(m);
            if k.connection(&k.split_sigma(&sigma)) != k.split_h(&k.killing_op(&sigma)) {
                return Err(format!("lower-left square, {spec:?}, seed {seed}"));
            }
            let lr = k.dwedge(&k.split_h(&h));
            if !lr.sigma.is_zero() || lr.mu != k.calabi(&h).scale(&killrange_core::scalars::rat(1, 2)) {
                return Err(format!("lower-right square, {spec:?}, seed {seed}"));
            }
            if !k.calabi_mod_range(&k.killing_op(&sigma)).iter().all(RatFunc::is_zero) {
                return Err(format!("calabi of killing not in range, {spec:?}, seed {seed}"));
            }
        }
    }
    Ok(())
}

fn criterion_4() -> Result<(), String> {
    for n in [2usize, 3] {
        let chart = Chart::build(&SpaceSpec::Sphere { n, hermitian: false }).map_err(|e| e.to_string())?;
        let g = chart.metric();
        let r = chart.riemann_down();
        let expect = Tensor::from_fn(n, vec![Slot::Down; 4], |i| {
            g.get(&[i[0], i[2]]).times(g.get(&[i[1], i[3]])).minus(&g.get(&[i[0], i[3]]).times(g.get(&[i[1], i[2]])))
        });
        if r != expect {
            return Err(format!("Riemann on S^{n}"));
        }
        let gi = chart.metric_inv();
        let ric = Tensor::from_fn(n, vec![Slot::Down; 2], |i| {
            let mut acc = RatFunc::zero();
            for b in 0..n {
                for d in 0..n {
                    acc = acc.plus(&gi.get(&[b, d]).times(r.get(&[i[0], b, i[1], d])));
                }
            }
            acc
        });
        if ric != g.scale(&int(n as i64 - 1)) {
            return Err(format!("Ricci on S^{n}"));
        }
        if !covariant_derivative(&chart, &r).is_zero() {
            return Err(format!("nabla R on S^{n}"));
        }
    }
    Ok(())
}

fn criterion_5() -> Result<(), String> {
    let chart = Chart::build(&SpaceSpec::Sphere { n: 2, hermitian: false }).map_err(|e| e.to_string())?;
    let k = KillingChart::new(&chart);
    let g = chart.metric();
    let d = |i: usize, j: usize| if i == j { RatFunc::one() } else { RatFunc::zero() };
    let delta = Tensor::from_fn(2, vec![Slot::Down, Slot::Up], |i| d(i[0], i[1]));
    let r = k.sphere_range_conditions(&delta);
    // g_a[b δ_c]^d
    let expected = Tensor::from_fn(2, vec![Slot::Down, Slot::Down, Slot::Down, Slot::Up], |i| {
        let (a, b, c, e) = (i[0], i[1], i[2], i[3]);
        g.get(&[a, b]).times(&d(e, c)).minus(&g.get(&[a, c]).times(&d(e, b))).scale(&killrange_core::scalars::rat(1, 2))
    });
    match () {
        _ if !r.nec_holds => Err("necessary condition fails".into()),
        _ if !r.phi_c.is_zero() => Err("phi_c nonzero".into()),
        _ if r.suff_holds => Err("sufficient condition unexpectedly holds".into()),
        _ if r.suff_residual != expected || expected.is_zero() => Err("residual differs from g_a[b delta_c]^d".into()),
        _ => Ok(()),
    }
}

fn criterion_6() -> Result<(), String> {
    let table = [
        ("CW", cw12(), true),
        ("dS(1,2) x S^3", product(lorentz_ds(), SpaceSpec::Sphere { n: 3, hermitian: false }), true),
        ("S^2 x R^{1,1}", product(herm_s2(), SpaceSpec::Flat { p: 1, q: 1 }), false),
        ("S^2 x CW", product(herm_s2(), SpaceSpec::CahenWallach { q: diag(&[1]) }), false),
        ("S^2 x dS(1,2)", product(herm_s2(), lorentz_ds()), true),
        ("R^{1,2}", SpaceSpec::Flat { p: 1, q: 2 }, true),
    ];
    for (name, spec, exact) in table {
        let v = verdict(&spec).map_err(|e| e.to_string())?;
        let rule = if exact { CLEAR_RULE } else { OBSTRUCTION_RULE };
        if v.exact() != Some(exact) || v.rule != rule || v.citations.is_empty() {
            return Err(format!("{name}: {}", v.to_json()));
        }
        if !exact && v.pair != Some((0, 1)) {
            return Err(format!("{name}: pair {:?}", v.pair));
        }
    }
    Ok(())
}

fn criterion_7() -> Result<(), String> {
    let w = nonexactness_witness(&witness_spec(), 2).map_err(|e| e.to_string())?;
    match () {
        _ if !w.residual_zero => Err("residual nonzero".into()),
        _ if !w.obstruction_nonzero => Err("obstruction vanishes".into()),
        _ if !w.certified() => Err("potential, Kähler form or parallel one-form not certified".into()),
        _ => Ok(()),
    }
}

fn criterion_8() -> Result<(), String> {
    let toy = GenericConnection::toy();
    let e1 = Subspace::span(2, vec![vec![int(1), int(0)]]);
    for (p, f, _) in toy.sampled().map_err(|e| e.to_string())? {
        if f.level(0) != e1 {
            return Err(format!("E_0 at {p:?} has dim {}", f.level(0).dim()));
        }
    }
    let r = toy.parallelness_check().map_err(|e| e.to_string())?;
    if r.parallel || r.failing_level != Some(0) {
        return Err(format!("{r:?}"));
    }
    Ok(())
}

fn criterion_9() -> Result<(), String> {
    let builtins = [
        SpaceSpec::Flat { p: 1, q: 2 },
        SpaceSpec::Flat { p: 0, q: 2 },
        SpaceSpec::Sphere { n: 2, hermitian: false },
        SpaceSpec::Sphere { n: 3, hermitian: false },
        SpaceSpec::Hyperbolic { n: 3 },
        lorentz_ds(),
        cw12(),
        product(herm_s2(), SpaceSpec::Flat { p: 1, q: 1 }),
    ];
    for spec in builtins {
        let pf = PointFrame::build(&spec).map_err(|e| e.to_string())?;
        if genericity_test(&pf) {
            return Err(format!("{spec:?} reported generic"));
        }
    }
    let mut gen = FieldGen::new(2, 1, 17);
    for rank in 1..=3 {
        let omega: Vec<Matrix<RatFunc>> = (0..2)
            .map(|_| Matrix::from_rows((0..rank).map(|_| (0..rank).map(|_| gen.func()).collect()).collect(), rank).unwrap())
            .collect();
        let c = GenericConnection::new(2, omega).map_err(|e| e.to_string())?;
        if c.is_generic().map_err(|e| e.to_string())? {
            return Err(format!("rank {rank} connection on a surface reported generic"));
        }
    }
    if GenericConnection::toy().is_generic().map_err(|e| e.to_string())? {
        return Err("toy connection reported generic".into());
    }
    Ok(())
}

fn criterion_10() -> Result<(), String> {
    let s2 = Chart::build(&SpaceSpec::Sphere { n: 2, hermitian: false }).map_err(|e| e.to_string())?;
    let k = KillingChart::new(&s2);
    let base = &Poly::one() + &(&(&Poly::var(0) * &Poly::var(0)) + &(&Poly::var(1) * &Poly::var(1)));
    let n = k.parallel_sections(&base.pow(2), &base.pow(3), 4).len();
    if n != 3 {
        return Err(format!("S^2: {n} parallel sections"));
    }
    let flat = Chart::build(&SpaceSpec::Flat { p: 1, q: 1 }).map_err(|e| e.to_string())?;
    let n = KillingChart::new(&flat).parallel_sections(&Poly::one(), &Poly::one(), 2).len();
    if n != 3 {
        return Err(format!("R^(1,1): {n} parallel sections"));
    }
    let cw = Chart::build(&cw12()).map_err(|e| e.to_string())?;
    let k = KillingChart::new(&cw);
    let mut up = vec![RatFunc::zero(); 4];
    up[0] = RatFunc::one();
    let x = Tensor::from_data(4, vec![Slot::Up], up).unwrap().raise_lower(0, cw.metric(), cw.metric_inv()).unwrap();
    let split = k.split_sigma(&x);
    if !k.killing_op(&x).is_zero() || !k.connection(&split).is_zero() || split.sigma != x {
        return Err("g(e_-, .) does not give a parallel section".into());
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        (1, "Cahen-Wallach filtration dimensions and closed forms", criterion_1, Some(10)),
        (2, "curvature identity suite", criterion_2, Some(60)),
        (3, "diagram squares and calabi of killing in range", criterion_3, None),
        (4, "sphere chart certification", criterion_4, None),
        (5, "round-sphere delta counterexample", criterion_5, None),
        (6, "verdict table", criterion_6, None),
        (7, "non-exactness witness", criterion_7, Some(120)),
        (8, "toy connection not parallel", criterion_8, None),
        (9, "genericity fails on built-ins and surfaces", criterion_9, None),
        (10, "parallel section counts", criterion_10, None),
    ];
    let mut failed = Vec::new();
    for (n, name, f, limit) in criteria {
        let t = Instant::now();
        let mut res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let dt = t.elapsed();
        if let (Ok(()), Some(s)) = (&res, limit) {
            if dt > Duration::from_secs(s) {
                res = Err(format!("took {dt:.1?}, limit {s} s"));
            }
        }
        match res {
            Ok(()) => println!("[PASS] criterion {n}: {name} ({dt:.2?})"),
            Err(e) => {
                println!("[FAIL] criterion {n}: {name}: {e}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
