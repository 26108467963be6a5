//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use common::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use span_lattice::closure::{freudenthal_approx, smallest_order_closed_sublattice, uo_to_order_stage};
use span_lattice::expr::LatticeExpr;
use span_lattice::lab::{
    build_counterexample, convergence_detect, obstruction_certificate, row_limit_law, summable_order_null, DoubleArray,
    Mode,
};
use span_lattice::linalg::SpanBasis;
use span_lattice::sigma::{is_measurable, measurable_subspace_basis, measurable_via_components, sigma_of, Partition};
use span_lattice::spanning::{lattice_closure_oracle, option_space_basis, replicate, sublattice_membership};
use span_lattice::{Exact, LatticeElement, Payoff, Scalar, StateSpace};

const REPLICATION_TOL: f64 = 1e-9;
const SPAN_TOL: f64 = 1e-9;
const DYADIC_SLACK: f64 = 1e-12;
const COMPLETENESS_BUDGET: Duration = Duration::from_secs(5);
const COUNTEREXAMPLE_BUDGET: Duration = Duration::from_secs(30);
const TRUNCATION: usize = 25;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn zero() -> Exact {
    Exact::from_ratio(0, 1)
}

fn one() -> Exact {
    Exact::from_ratio(1, 1)
}

fn injective(rng: &mut StdRng, n: usize) -> Vec<i64> {
    let mut pool: Vec<i64> = (0..3 * n as i64).collect();
    pool.shuffle(rng);
    pool.truncate(n);
    pool
}

fn completeness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut claims = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let space = random_probs(&mut rng, n);
        let f = injective(&mut rng, n);
        let (ff, fe) = (payoff(&space, &f), exact_payoff(&space, &f));
        for i in 0..n {
            let g = Payoff::<f64>::indicator(space.clone(), &[i]);
            let r = replicate(&g, &ff).map_err(|e| e.to_string())?;
            worst = worst.max(r.evaluate().minus(&g).unwrap().sup_norm());
            let ge = Payoff::<Exact>::indicator(space.clone(), &[i]);
            let re = replicate(&ge, &fe).map_err(|e| e.to_string())?;
            check(re.evaluate() == ge, || format!("exact replication of e_{i} is off for f = {f:?}"))?;
            claims += 1;
        }
    }
    let elapsed = start.elapsed();
    check(worst <= REPLICATION_TOL, || format!("max residual {worst:e}"))?;
    check(elapsed < COMPLETENESS_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{claims} claims, max float residual {worst:.1e}, exact residual 0, {elapsed:.2?}"))
}

fn option_span_equals_measurable() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    for trial in 0..500 {
        let n = rng.random_range(2..=12);
        let levels = rng.random_range(1..n);
        let values: Vec<f64> = (0..levels).map(|_| rng.random_range(0.0..10.0)).collect();
        let f: Vec<f64> = (0..n).map(|_| values[rng.random_range(0..levels)]).collect();
        let space = StateSpace::uniform(n).unwrap();
        let f = Payoff::new(space, f).unwrap();
        let options = option_space_basis(&f).map_err(|e| e.to_string())?;
        let part = sigma_of(std::slice::from_ref(&f)).unwrap();
        check(options.dim() == part.num_blocks(), || {
            format!("trial {trial}: dim {} vs {} blocks", options.dim(), part.num_blocks())
        })?;
        let measurable = measurable_subspace_basis::<f64>(&part);
        let a = SpanBasis::from_vectors(n, options.basis.iter().map(|b| b.values()));
        let b = SpanBasis::from_vectors(n, measurable.iter().map(|b| b.values()));
        for (basis, span) in [(&options.basis, &b), (&measurable, &a)] {
            for v in basis {
                let p = span.project(v.values());
                let rel = p.residual_norm / (1.0 + v.sup_norm());
                check(rel <= SPAN_TOL, || format!("trial {trial}: residual {rel:e}"))?;
            }
        }
    }
    Ok("500 underlyings, dimensions equal, mutual containment".into())
}

fn membership_vs_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let mut members = 0;
    let trials = 1500;
    for _ in 0..trials {
        let n = rng.random_range(1..=6);
        let space = StateSpace::uniform(n).unwrap();
        let v = |rng: &mut StdRng| -> Vec<i64> { (0..n).map(|_| rng.random_range(0..=5)).collect() };
        let (x, y) = (v(&mut rng), v(&mut rng));
        let (xe, ye) = (exact_payoff(&space, &x), exact_payoff(&space, &y));
        let z = if rng.random_bool(0.5) {
            v(&mut rng)
        } else {
            // a lattice expression in x, y is always a member
            let e = LatticeExpr::random(&mut rng, 3, 2);
            let ze = e.eval(&[xe.clone(), ye.clone()]).unwrap().scale(&Exact::from_ratio(48, 1));
            ze.values().iter().map(|q| q.to_integer().try_into().unwrap_or(0)).collect()
        };
        let ze = exact_payoff(&space, &z);
        let ours = sublattice_membership(&ze, &xe, &ye).map_err(|e| e.to_string())?.member;
        let oracle = if x.iter().chain(&y).all(|&c| c == 0) {
            z.iter().all(|&c| c == 0)
        } else {
            let basis = lattice_closure_oracle(&[xe, ye], 2 * n + 2).map_err(|e| e.to_string())?;
            SpanBasis::from_vectors(n, basis.iter().map(|b| b.values())).contains(ze.values())
        };
        check(ours == oracle, || format!("disagreement at x={x:?} y={y:?} z={z:?}"))?;
        members += ours as usize;
    }
    Ok(format!("{trials} trials ({members} members), 0 disagreements"))
}

fn counterexample_reconstruction() -> (Outcome, Vec<DoubleArray<Exact>>, DoubleArray<Exact>) {
    let start = Instant::now();
    let cx = build_counterexample::<Exact>(TRUNCATION, TRUNCATION).unwrap();
    let m = TRUNCATION;
    let mut xs: HashMap<(usize, usize), DoubleArray<Exact>> = HashMap::new();
    let outcome = (|| -> Outcome {
        // (a) identities of x^{kj}
        for k in 1..=m {
            for j in 1..=cx.max_j() {
                let x = cx.xkj(k, j, None).map_err(|e| e.to_string())?;
                check(x.entry(k, 1).clone() * Exact::from_ratio(k as i64, 1) == one(), || format!("k x_k1 != 1 at ({k},{j})"))?;
                for n in 2..=(j + 1).min(m) {
                    check(*x.entry(k, n) == zero(), || format!("x^{{{k},{j}}}_{{{k},{n}}} != 0"))?;
                }
                for r in (1..=m).filter(|&r| r != k) {
                    check(x.row(r).iter().all(|v| *v == zero()) && *x.limit(r) == zero(), || {
                        format!("x^{{{k},{j}}} has a nonzero entry in row {r}")
                    })?;
                }
                xs.insert((k, j), x);
            }
        }
        // (b) y^j -> e coordinatewise
        let seq = cx.y_sequence(cx.max_j()).map_err(|e| e.to_string())?;
        let d = convergence_detect(&seq, &cx.e, Mode::Uo).map_err(|e| e.to_string())?;
        check(d.converged, || format!("unsettled coordinates {:?}", d.unsettled()))?;
        // (c) row-limit law
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..500 {
            let e = LatticeExpr::random(&mut rng, 6, 2);
            let res = row_limit_law(&e, &cx).map_err(|e| e.to_string())?;
            check(res.iter().all(|r| *r == zero()), || format!("nonzero residual for {}", e.render(&["u", "v"])))?;
        }
        // (d) anything near e in the first column is large
        let mut sampled = 0;
        for _ in 0..60 {
            let mut z = DoubleArray::zeros(m, m);
            for k in 1..=m {
                let j = rng.random_range(1..=cx.max_j());
                z = z.plus(&xs[&(k, j)].scale(&Exact::from_ratio(k as i64, 1))).unwrap();
            }
            let w = LatticeExpr::random(&mut rng, 3, 2).eval(&cx.generators()).unwrap();
            let shrink = Exact::from_ratio(1, 4) / (one() + w.sup_norm());
            let z = z.plus(&w.scale(&shrink)).unwrap();
            let half = Exact::from_ratio(1, 2);
            let near = (1..=m).all(|r| {
                let d = z.entry(r, 1).clone() - one();
                d < half && -d < half
            });
            if !near {
                continue;
            }
            sampled += 1;
            let cert = obstruction_certificate(&z, m).map_err(|e| e.to_string())?;
            check(cert.holds && z.sup_norm() >= Exact::from_ratio(25, 2), || {
                format!("sup norm {} below 12.5", z.sup_norm())
            })?;
        }
        check(sampled > 0, || "no sample landed near e".into())?;
        let elapsed = start.elapsed();
        check(elapsed < COUNTEREXAMPLE_BUDGET, || format!("took {elapsed:?}"))?;
        Ok(format!(
            "{} identities, detector settles by j = {}, 500 expressions, {sampled} samples with sup >= 12.5, {elapsed:.2?}",
            xs.len(),
            d.latest_settle.map_or(0, |s| s + 1)
        ))
    })();
    let seq = cx.y_sequence(cx.max_j()).unwrap_or_default();
    (outcome, seq, cx.e)
}

fn bridge(seq: &[DoubleArray<Exact>], e: &DoubleArray<Exact>) -> Outcome {
    check(!seq.is_empty(), || "no sequence".into())?;
    let r = uo_to_order_stage(e, seq).map_err(|e| e.to_string())?;
    for (n, (y, s)) in seq.iter().zip(&r.stages).enumerate() {
        check(s.dominated_by(e).unwrap(), || format!("stage {n} not dominated by e"))?;
        let lhs = s.minus(e).unwrap().abs();
        let rhs = y.minus(e).unwrap().abs().meet(e).unwrap();
        check(lhs.dominated_by(&rhs).unwrap(), || format!("domination inequality fails at stage {n}"))?;
    }
    let last = r.final_error().cloned().unwrap_or_else(one);
    check(last == zero(), || format!("final error {last}"))?;
    Ok(format!("{} stages dominated by e, final error 0", r.stages.len()))
}

fn summability() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let (rows, cols, len) = (6, 6, 400);
    for trial in 0..100 {
        let cells = rows * cols;
        let raw = DoubleArray::new(rows, cols, (0..cells).map(|_| rng.random_range(0.01..1.0)).collect(), vec![0.0; rows]).unwrap();
        let total: f64 = raw.coordinates().iter().sum();
        let weights = raw.scale(&(1.0 / total));
        let base = DoubleArray::new(rows, cols, (0..cells).map(|_| rng.random_range(0.0..5.0)).collect(), vec![0.0; rows]).unwrap();
        let ratio = rng.random_range(0.05..0.9);
        let mut seq = Vec::with_capacity(len);
        let mut x = base.clone();
        for _ in 0..len {
            x = x.scale(&ratio);
            seq.push(x.clone());
        }
        let budget = base.sup_norm() * ratio / (1.0 - ratio) + 1.0;
        let r = summable_order_null(&seq, &weights, &budget).map_err(|e| e.to_string())?;
        check(r.summable && r.order_null, || format!("trial {trial}: geometric sequence rejected"))?;
        check(r.limsup.coordinates().iter().all(|v| *v == 0.0), || format!("trial {trial}: limsup not zero"))?;
    }
    let weights = DoubleArray::from_fn(rows, cols, |_, _| 1.0 / (rows * cols) as f64, |_| 0.0);
    let e = DoubleArray::from_fn(rows, cols, |_, n| if n == 1 { 1.0 } else { 0.0 }, |_| 0.0);
    let constant = vec![e; len];
    let r = summable_order_null(&constant, &weights, &f64::MAX).map_err(|e| e.to_string())?;
    check(!r.order_null, || "constant e accepted".into())?;
    Ok("100 geometric sequences accepted with zero limsup, constant e rejected".into())
}

fn measurability_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut checks = 0;
    for n in 1..=5 {
        let space = StateSpace::uniform(n).unwrap();
        let unit = Payoff::<f64>::one(space.clone());
        for blocks in all_partitions(n) {
            let part = Partition::new(space.clone(), blocks.clone()).unwrap();
            for c in 0..50 {
                let g: Vec<f64> = if c % 2 == 0 {
                    let vals: Vec<f64> = blocks.iter().map(|_| rng.random_range(-3..=3) as f64).collect();
                    (0..n).map(|i| vals[part.block_of(i).unwrap()]).collect()
                } else {
                    (0..n).map(|_| rng.random_range(-3..=3) as f64).collect()
                };
                let g = Payoff::new(space.clone(), g).unwrap();
                let a = measurable_via_components(&g, &part, &unit).map_err(|e| e.to_string())?;
                let b = is_measurable(&g, &part).map_err(|e| e.to_string())?;
                check(a == b, || format!("disagreement for {:?} on {blocks:?}", g.values()))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} claim/partition pairs, 0 disagreements"))
}

fn smallest_sublattice_triple() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    for trial in 0..200 {
        let n = rng.random_range(1..=8);
        let space = StateSpace::uniform(n).unwrap();
        let k = rng.random_range(1..=3);
        let single = trial % 2 == 0;
        let gens: Vec<Vec<i64>> = (0..if single { 1 } else { k })
            .map(|_| (0..n).map(|_| rng.random_range(0..=4)).collect())
            .collect();
        let a: Vec<Payoff<Exact>> = gens.iter().map(|g| exact_payoff(&space, g)).collect();
        let unit = Payoff::<Exact>::one(space.clone());
        let ours = smallest_order_closed_sublattice(&a, &unit).map_err(|e| e.to_string())?;
        let mut with_unit = a.clone();
        with_unit.push(unit);
        let oracle = lattice_closure_oracle(&with_unit, 2 * n + 2).map_err(|e| e.to_string())?;
        let s1 = SpanBasis::from_vectors(n, ours.iter().map(|b| b.values()));
        let s2 = SpanBasis::from_vectors(n, oracle.iter().map(|b| b.values()));
        check(
            s1.contains_all(oracle.iter().map(|b| b.values())) && s2.contains_all(ours.iter().map(|b| b.values())),
            || format!("trial {trial}: closure differs from oracle for {gens:?}"),
        )?;
        if single {
            let options = option_space_basis(&a[0]).map_err(|e| e.to_string())?;
            let s3 = SpanBasis::from_vectors(n, options.basis.iter().map(|b| b.values()));
            check(
                s1.contains_all(options.basis.iter().map(|b| b.values())) && s3.contains_all(ours.iter().map(|b| b.values())),
                || format!("trial {trial}: closure differs from option space of {:?}", gens[0]),
            )?;
        }
    }
    Ok("200 instances, three constructions agree".into())
}

fn dyadic_envelope() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    for trial in 0..100 {
        let n = rng.random_range(1..=10);
        let space = StateSpace::uniform(n).unwrap();
        let f: Vec<i64> = (0..n).map(|_| rng.random_range(0..=3)).collect();
        let part = sigma_of(&[payoff(&space, &f)]).unwrap();
        let nonneg = trial % 4 != 0;
        let vals: Vec<f64> = (0..4)
            .map(|_| if nonneg { rng.random_range(0.0..10.0) } else { rng.random_range(-10.0..10.0) })
            .collect();
        let g = Payoff::new(space, f.iter().map(|&v| vals[v as usize]).collect()).unwrap();
        let r = freudenthal_approx(&g, &part, 10).map_err(|e| e.to_string())?;
        let hi = g.values().iter().cloned().fold(f64::MIN, f64::max);
        let lo = g.values().iter().cloned().fold(f64::MAX, f64::min);
        for (l, err) in r.errors.iter().enumerate() {
            let bound = (hi - lo) / 2f64.powi(l as i32 + 1);
            check(*err <= bound + DYADIC_SLACK, || format!("trial {trial}: level {} error {err} > {bound}", l + 1))?;
        }
        if nonneg {
            for (l, w) in r.stages.windows(2).enumerate() {
                check(w[0].dominated_by(&w[1]).unwrap(), || format!("trial {trial}: stage {} decreases", l + 2))?;
            }
        }
    }
    Ok("100 claims x 10 levels within range/2^L, stages increasing".into())
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("criterion {n} PASS  {name}: {detail}"),
        Err(why) => {
            failed += 1;
            println!("criterion {n} FAIL  {name}: {why}");
        }
    };
    report(1, "completeness with an injective underlying", completeness());
    report(2, "option span equals measurable span", option_span_equals_measurable());
    report(3, "two-generator membership vs closure oracle", membership_vs_oracle());
    let (outcome, seq, e) = counterexample_reconstruction();
    report(4, "uo-closure counterexample at 25x25", outcome);
    report(5, "uo to order bridge", bridge(&seq, &e));
    report(6, "weighted summability detector", summability());
    report(7, "measurability tests agree", measurability_equivalence());
    report(8, "smallest order closed sublattice", smallest_sublattice_triple());
    report(9, "dyadic approximation envelope", dyadic_envelope());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
