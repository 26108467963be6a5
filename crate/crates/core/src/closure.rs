//! Closure constructions: turning uo-approximations into order bounded ones,
//! the smallest order closed sublattice containing a family, dyadic
//! approximation by simple claims, and increasing approximation from ideals.
//!
//! In finite dimensions every sublattice is order closed, so the closures
//! below collapse to spans. The constructions are still carried out
//! explicitly so they can be cross-checked against each other.

use crate::error::{LatticeError, Result};
use crate::lab::{convergence_detect, Mode};
use crate::lattice::{support, LatticeElement, Payoff};
use crate::linalg::{self, SpanBasis};
use crate::scalar::Scalar;
use crate::sigma::{is_measurable, measurable_subspace_basis, sigma_of, violating_block, Partition};
use crate::spanning::lattice_closure_oracle;

/// A sequence of approximants with their sup-norm distances to the target.
#[derive(Debug, Clone)]
pub struct ApproxReport<S, E> {
    pub stages: Vec<E>,
    pub errors: Vec<S>,
    /// Dominates `|stage|` for every stage when present.
    pub dominator: Option<E>,
}

impl<S: Scalar, E: LatticeElement<S>> ApproxReport<S, E> {
    fn build(target: &E, stages: Vec<E>, dominator: Option<E>) -> Result<Self> {
        let errors = stages
            .iter()
            .map(|s| s.minus(target).map(|d| d.sup_norm()))
            .collect::<Result<_>>()?;
        Ok(ApproxReport {
            stages,
            errors,
            dominator,
        })
    }

    pub fn final_error(&self) -> Option<&S> {
        self.errors.last()
    }
}

fn require_nonneg<S: Scalar, E: LatticeElement<S>>(x: &E) -> Result<()> {
    if x.is_nonneg() {
        Ok(())
    } else {
        Err(LatticeError::DecomposeFirst)
    }
}

/// Replaces a uo-convergent sequence `y_n -> x` of positive elements by
/// `y_n ∧ x`, which is dominated by `x` and so converges in order.
pub fn uo_to_order_stage<S: Scalar, E: LatticeElement<S>>(x: &E, seq: &[E]) -> Result<ApproxReport<S, E>> {
    require_nonneg(x)?;
    for y in seq {
        require_nonneg(y)?;
    }
    let detection = convergence_detect(seq, x, Mode::Uo)?;
    if !detection.converged {
        return Err(LatticeError::Contract(format!(
            "sequence does not converge coordinatewise on the prefix; unsettled coordinates {:?}",
            detection.unsettled()
        )));
    }
    let mut stages = Vec::with_capacity(seq.len());
    for (n, y) in seq.iter().enumerate() {
        let z = y.meet(x)?;
        let lhs = z.minus(x)?.abs();
        let rhs = y.minus(x)?.abs().meet(x)?;
        if !lhs.dominated_by(&rhs)? {
            return Err(LatticeError::Contract(format!("domination fails at stage {n}")));
        }
        stages.push(z);
    }
    let report = ApproxReport::build(x, stages, Some(x.clone()))?;
    match report.final_error() {
        Some(e) if !e.is_negligible() => Err(LatticeError::Contract(format!("final stage error {e} is not negligible"))),
        _ => Ok(report),
    }
}

/// Basis `{u 1_B}` of the smallest order closed sublattice containing `a` and
/// the weak unit `u`, with `B` ranging over the blocks generated by the ratios
/// `a_i / u`.
pub fn smallest_order_closed_sublattice<S: Scalar>(a: &[Payoff<S>], u: &Payoff<S>) -> Result<Vec<Payoff<S>>> {
    if let Some(index) = u.values().iter().position(|v| !(*v > S::zero() && !v.is_negligible())) {
        return Err(LatticeError::NotWeakUnit { index });
    }
    if a.is_empty() {
        return Ok(vec![u.clone()]);
    }
    let ratios = a
        .iter()
        .map(|x| x.zip_with(u, |p, q| p.clone() / q.clone()))
        .collect::<Result<Vec<_>>>()?;
    let part = sigma_of(&ratios)?;
    measurable_subspace_basis::<S>(&part)
        .iter()
        .map(|ind| ind.zip_with(u, |p, q| p.clone() * q.clone()))
        .collect()
}

fn floor_to_grid<S: Scalar>(v: &S, lo: &S, step: &S) -> S {
    let q = (v.clone() - lo.clone()) / step.clone();
    let nearest = (q.clone() + S::from_ratio(1, 2)).floor_value();
    let k = if (q.clone() - nearest.clone()).is_negligible() {
        nearest
    } else {
        q.floor_value()
    };
    lo.clone() + k * step.clone()
}

/// Lower dyadic approximations of a measurable claim: at level `L` every block
/// value is floored to the grid `min g + k (max g - min g) / 2^L`.
///
/// The grids are nested, so stages increase; the error at level `L` is below
/// one grid step.
pub fn freudenthal_approx<S: Scalar>(g: &Payoff<S>, part: &Partition, levels: usize) -> Result<ApproxReport<S, Payoff<S>>> {
    if levels == 0 {
        return Err(LatticeError::Argument("levels must be at least 1".into()));
    }
    if !is_measurable(g, part)? {
        let block = violating_block(g, part).unwrap_or_default();
        return Err(LatticeError::NotMeasurable(format!("claim is not constant on block {block:?}")));
    }
    let lo = g.values().iter().fold(g.values()[0].clone(), |a, b| S::min_of(&a, b));
    let hi = g.values().iter().fold(g.values()[0].clone(), |a, b| S::max_of(&a, b));
    let range = hi - lo.clone();
    let two = S::one() + S::one();
    let mut step = range.clone();
    let mut stages = Vec::with_capacity(levels);
    for _ in 0..levels {
        step = step / two.clone();
        let mut stage = Payoff::zero(g.space().clone());
        for block in part.blocks() {
            let value = block
                .iter()
                .map(|&i| g.values()[i].clone())
                .reduce(|a, b| S::min_of(&a, &b))
                .expect("blocks are non-empty");
            let level = if range.is_negligible() {
                value
            } else {
                floor_to_grid(&value, &lo, &step)
            };
            let ind = Payoff::<S>::indicator(g.space().clone(), block);
            stage = stage.plus(&ind.scale(&level))?;
        }
        stages.push(stage);
    }
    let dominator = g.abs().join(&Payoff::constant(g.space().clone(), lo.abs()))?;
    ApproxReport::build(g, stages, Some(dominator))
}

fn check_ideal_sublattice<S: Scalar>(basis: &[Payoff<S>]) -> Result<SpanBasis<S>> {
    let first = basis
        .first()
        .ok_or_else(|| LatticeError::Argument("empty basis".into()))?;
    for b in &basis[1..] {
        first.same_space(b)?;
    }
    let n = first.len();
    let vectors: Vec<Vec<S>> = basis.iter().map(|b| b.values().to_vec()).collect();
    let span = SpanBasis::from_vectors(n, vectors.iter().map(|v| v.as_slice()));
    let closure = lattice_closure_oracle(basis, n + 1)?;
    if closure.len() != linalg::rank(n, &vectors) {
        return Err(LatticeError::NotASublattice(format!(
            "span has dimension {} but generates a sublattice of dimension {}",
            span.dim(),
            closure.len()
        )));
    }
    // an ideal of R^n is the set of vectors supported in a fixed set of states
    for b in basis {
        for i in support(b) {
            let mut e = vec![S::zero(); n];
            e[i] = S::one();
            if !span.contains(&e) {
                return Err(LatticeError::NotAnIdeal(format!(
                    "the unit vector of state {i} is dominated by a basis element but lies outside the span"
                )));
            }
        }
    }
    Ok(span)
}

/// An increasing sequence in the positive cone of the ideal sublattice spanned
/// by `y_basis` converging to `x`.
///
/// Starts from the oscillating sequence `y_b = (1 + (-1)^b / b) x`, takes the
/// tail infima `z_a = inf_{b >= a} y_b` over `b <= 2 steps + 1`, and returns
/// the running suprema of the first `steps` of them. Every stage is below `x`.
pub fn monotone_approximation<S: Scalar>(x: &Payoff<S>, y_basis: &[Payoff<S>], steps: usize) -> Result<ApproxReport<S, Payoff<S>>> {
    if !x.is_nonneg() {
        return Err(LatticeError::DecomposeFirst);
    }
    if x.values().iter().all(|v| v.is_negligible()) {
        return Err(LatticeError::Argument("target must be nonzero".into()));
    }
    if steps == 0 {
        return Err(LatticeError::Argument("steps must be at least 1".into()));
    }
    for b in y_basis {
        x.same_space(b)?;
    }
    let span = check_ideal_sublattice(y_basis)?;
    let projection = span.project(x.values());
    if !projection.member {
        return Err(LatticeError::NoApproximation(format!(
            "target is outside the span (residual {}); in finite dimensions the order closure adds nothing",
            projection.residual_norm
        )));
    }
    // an odd horizon keeps every tail infimum below x
    let horizon = 2 * steps + 1;
    let net: Vec<Payoff<S>> = (1..=horizon)
        .map(|b| {
            let sign = if b % 2 == 0 { S::one() } else { -S::one() };
            x.scale(&(S::one() + sign / S::from_ratio(b as i64, 1)))
        })
        .collect();
    let mut tails = net.clone();
    for a in (0..horizon - 1).rev() {
        tails[a] = tails[a].meet(&tails[a + 1])?;
    }
    tails.truncate(steps);
    let mut stages: Vec<Payoff<S>> = Vec::with_capacity(steps);
    for z in tails {
        let next = match stages.last() {
            Some(prev) => prev.join(&z)?,
            None => z,
        };
        stages.push(next);
    }
    ApproxReport::build(x, stages, Some(x.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::build_counterexample;
    use crate::lattice::StateSpace;
    use crate::scalar::Exact;
    use std::sync::Arc;

    fn p(space: &Arc<StateSpace>, v: &[f64]) -> Payoff {
        Payoff::new(space.clone(), v.to_vec()).unwrap()
    }

    #[test]
    fn counterexample_bridge() {
        let cx = build_counterexample::<Exact>(5, 5).unwrap();
        let seq = cx.y_sequence(cx.max_j()).unwrap();
        let r = uo_to_order_stage(&cx.e, &seq).unwrap();
        for s in &r.stages {
            assert!(s.dominated_by(&cx.e).unwrap());
        }
        assert!(r.final_error().unwrap().is_negligible());
    }

    #[test]
    fn bridge_rejects_negative_input() {
        let s = StateSpace::uniform(2).unwrap();
        let x = p(&s, &[1.0, -1.0]);
        assert_eq!(uo_to_order_stage(&x, &[x.clone()]).unwrap_err(), LatticeError::DecomposeFirst);
    }

    #[test]
    fn smallest_sublattice_cases() {
        let s = StateSpace::uniform(4).unwrap();
        let u = Payoff::one(s.clone());
        assert_eq!(smallest_order_closed_sublattice(&[], &u).unwrap(), vec![u.clone()]);
        let f = p(&s, &[1.0, 2.0, 1.0, 3.0]);
        assert_eq!(smallest_order_closed_sublattice(&[f.clone()], &u).unwrap().len(), 3);
        let inj = p(&s, &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(smallest_order_closed_sublattice(&[inj], &u).unwrap().len(), 4);
        let bad = p(&s, &[1.0, 0.0, 1.0, 1.0]);
        assert!(matches!(
            smallest_order_closed_sublattice(&[f], &bad),
            Err(LatticeError::NotWeakUnit { index: 1 })
        ));
    }

    #[test]
    fn dyadic_stages() {
        let s = StateSpace::uniform(3).unwrap();
        let g = p(&s, &[0.0, 0.3, 0.9]);
        let r = freudenthal_approx(&g, &Partition::discrete(s.clone()), 2).unwrap();
        assert_eq!(r.stages[1].values(), &[0.0, 0.225, 0.9]);
        assert!((r.errors[1] - 0.075).abs() < 1e-12);

        let ind = p(&s, &[1.0, 1.0, 0.0]);
        let part = Partition::new(s.clone(), vec![vec![0, 1], vec![2]]).unwrap();
        let r = freudenthal_approx(&ind, &part, 1).unwrap();
        assert_eq!(r.errors, vec![0.0]);
        assert!(matches!(freudenthal_approx(&g, &part, 1), Err(LatticeError::NotMeasurable(_))));
    }

    #[test]
    fn monotone_from_ideal() {
        let s = StateSpace::uniform(3).unwrap();
        let x = p(&s, &[2.0, 1.0, 0.0]);
        let ideal = vec![p(&s, &[1.0, 0.0, 0.0]), p(&s, &[0.0, 1.0, 0.0])];
        let r = monotone_approximation(&x, &ideal, 20).unwrap();
        for w in r.stages.windows(2) {
            assert!(w[0].dominated_by(&w[1]).unwrap());
        }
        assert!(r.stages.iter().all(|st| st.dominated_by(&x).unwrap()));
        assert!(r.errors.last().unwrap() < &0.2);

        let not_ideal = vec![p(&s, &[1.0, 1.0, 0.0])];
        assert!(matches!(monotone_approximation(&x, &not_ideal, 5), Err(LatticeError::NotAnIdeal(_))));
        let outside = p(&s, &[0.0, 0.0, 1.0]);
        assert!(matches!(monotone_approximation(&outside, &ideal, 5), Err(LatticeError::NoApproximation(_))));
        let not_sub = vec![p(&s, &[1.0, -1.0, 0.0])];
        assert!(matches!(monotone_approximation(&x, &not_sub, 5), Err(LatticeError::NotASublattice(_))));
    }
}
