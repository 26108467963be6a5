//! Convergence detectors for finite prefixes of sequences.
//!
//! A detector can only certify what the represented prefix shows: a
//! coordinate counts as convergent when its deviation from the limit is
//! negligible from some index on up to the end of the prefix.

use crate::error::{LatticeError, Result};
use crate::lattice::LatticeElement;
use crate::scalar::{tolerance, Scalar};

use super::array::DoubleArray;

pub const TRUNCATION_CAVEAT: &str =
    "certifies the represented prefix only; behavior past the last index and outside the truncation is not observed";

#[derive(Debug, Clone, PartialEq)]
pub enum Mode<S> {
    /// Coordinatewise convergence.
    Uo,
    /// Coordinatewise convergence with a common dominating element of sup
    /// norm at most `cap`.
    Order { cap: S },
}

#[derive(Debug, Clone)]
pub struct Detection<S, E> {
    pub converged: bool,
    /// Coordinatewise convergence on the prefix, regardless of mode.
    pub coordinatewise: bool,
    /// Per coordinate, the first index from which the deviation stays
    /// negligible (`None` if it does not settle within the prefix).
    pub settle_index: Vec<Option<usize>>,
    /// Largest settle index over all coordinates that settle.
    pub latest_settle: Option<usize>,
    /// Comparison tolerance used (`0` in exact mode).
    pub tolerance: f64,
    /// Entrywise supremum of `|x_n|` (order mode only).
    pub dominator: Option<E>,
    pub dominator_norm: Option<S>,
    pub caveat: &'static str,
}

impl<S, E> Detection<S, E> {
    pub fn unsettled(&self) -> Vec<usize> {
        self.settle_index
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_none())
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn convergence_detect<S: Scalar, E: LatticeElement<S>>(
    seq: &[E],
    limit: &E,
    mode: Mode<S>,
) -> Result<Detection<S, E>> {
    let first = seq
        .first()
        .ok_or_else(|| LatticeError::Argument("empty sequence".into()))?;
    let deviations: Vec<E> = seq
        .iter()
        .map(|x| x.minus(limit).map(|d| d.abs()))
        .collect::<Result<_>>()?;
    let coords = first.coordinates().len();
    let settle_index: Vec<Option<usize>> = (0..coords)
        .map(|i| {
            let mut start = None;
            for (t, d) in deviations.iter().enumerate().rev() {
                if d.coordinates()[i].is_negligible() {
                    start = Some(t);
                } else {
                    break;
                }
            }
            start
        })
        .collect();
    let coordinatewise = settle_index.iter().all(|s| s.is_some());
    let latest_settle = settle_index.iter().flatten().copied().max();

    let (dominator, dominator_norm, bounded) = match &mode {
        Mode::Uo => (None, None, true),
        Mode::Order { cap } => {
            let mut dom = first.abs();
            for x in &seq[1..] {
                dom = dom.join(&x.abs())?;
            }
            let norm = dom.sup_norm();
            let bounded = norm <= *cap;
            (Some(dom), Some(norm), bounded)
        }
    };
    Ok(Detection {
        converged: coordinatewise && bounded,
        coordinatewise,
        settle_index,
        latest_settle,
        tolerance: if S::EXACT { 0.0 } else { tolerance() },
        dominator,
        dominator_norm,
        caveat: TRUNCATION_CAVEAT,
    })
}

#[derive(Debug, Clone)]
pub struct NullReport<S> {
    /// `sum_n phi(|x_n|)` over the prefix.
    pub mass: S,
    pub summable: bool,
    /// `inf_k sup_{n >= k} |x_n|` over the prefix, negligible entries set to zero.
    pub limsup: DoubleArray<S>,
    pub order_null: bool,
}

/// Weighted summability test for order convergence to zero.
///
/// `weights` is a strictly positive array acting on coordinates (its limit
/// column is ignored). The sequence counts as summable when its total
/// weighted mass stays within `budget`; in that case the pointwise limit
/// superior must vanish.
pub fn summable_order_null<S: Scalar>(
    seq: &[DoubleArray<S>],
    weights: &DoubleArray<S>,
    budget: &S,
) -> Result<NullReport<S>> {
    if seq.is_empty() {
        return Err(LatticeError::Argument("empty sequence".into()));
    }
    if let Some(i) = weights.coordinates().iter().position(|w| !(*w > S::zero())) {
        return Err(LatticeError::Domain(format!("weight {i} is not strictly positive")));
    }
    for (n, x) in seq.iter().enumerate() {
        if x.rows() != weights.rows() || x.cols() != weights.cols() {
            return Err(LatticeError::Dimension {
                expected: weights.rows() * weights.cols(),
                found: x.rows() * x.cols(),
            });
        }
        if x.stored_values().any(|v| v.to_f64().is_none_or(|f| !f.is_finite())) {
            return Err(LatticeError::Unbounded(format!("element {n} has a non-finite entry")));
        }
    }
    let mut mass = S::zero();
    for x in seq {
        for (w, v) in weights.coordinates().iter().zip(x.coordinates()) {
            mass = mass + w.clone() * v.abs();
        }
    }
    let summable = mass <= *budget;

    // tail suprema, then their infimum
    let mut tail = seq.last().unwrap().abs();
    let mut limsup = tail.clone();
    for x in seq.iter().rev().skip(1) {
        tail = tail.join(&x.abs())?;
        limsup = limsup.meet(&tail)?;
    }
    let limsup = limsup.map(|v| if v.is_negligible() { S::zero() } else { v.clone() });
    let vanishes = limsup.coordinates().iter().all(|v| v.is_zero());
    Ok(NullReport {
        mass,
        summable,
        order_null: summable && vanishes,
        limsup,
    })
}
