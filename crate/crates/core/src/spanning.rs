//! Option spaces, replication by calls and puts, and two-generator sublattices.
//!
//! The call `(x - ky)^+` is piecewise linear in the strike `k` with breakpoints
//! exactly at the ratios `x_i / y_i`. Strikes at each ratio, at the midpoints,
//! and one strike outside the ratio range on each side therefore span every
//! payoff that any real strike could contribute. The same argument with
//! `y = 1` gives the strike grid of an option space.

use std::sync::Arc;

use crate::error::{LatticeError, Result};
use crate::lattice::{option_payoff, LatticeElement, OptionKind, Payoff, StateSpace};
use crate::linalg::SpanBasis;
use crate::scalar::Scalar;
use crate::sigma::{is_measurable, level_groups, level_sets, sigma_of, violating_block};

/// A single call or put on an underlying payoff.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument<S = f64> {
    pub kind: OptionKind,
    pub strike: S,
    pub underlying: Arc<Payoff<S>>,
}

impl<S: Scalar> Instrument<S> {
    pub fn payoff(&self) -> Payoff<S> {
        option_payoff(&self.underlying, &self.strike, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Position<S = f64> {
    pub instrument: Instrument<S>,
    pub weight: S,
}

/// A weighted list of options.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio<S = f64> {
    space: Arc<StateSpace>,
    positions: Vec<Position<S>>,
}

impl<S: Scalar> Portfolio<S> {
    pub fn new(space: Arc<StateSpace>) -> Self {
        Portfolio {
            space,
            positions: Vec::new(),
        }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn positions(&self) -> &[Position<S>] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Adds a position, netting it against an existing one with the same
    /// underlying, kind and strike.
    pub fn push(&mut self, instrument: Instrument<S>, weight: S) -> Result<()> {
        if **instrument.underlying.space() != *self.space {
            return Err(LatticeError::Dimension {
                expected: self.space.len(),
                found: instrument.underlying.len(),
            });
        }
        if let Some(existing) = self.positions.iter_mut().find(|p| {
            p.instrument.kind == instrument.kind
                && p.instrument.strike.approx_eq(&instrument.strike)
                && p.instrument.underlying == instrument.underlying
        }) {
            existing.weight = existing.weight.clone() + weight;
        } else {
            self.positions.push(Position { instrument, weight });
        }
        Ok(())
    }

    /// Drops zero positions and orders by kind, then strike.
    pub fn normalize(&mut self) {
        self.positions.retain(|p| !p.weight.is_negligible());
        self.positions.sort_by(|a, b| {
            a.instrument
                .kind
                .cmp(&b.instrument.kind)
                .then(a.instrument.strike.partial_cmp(&b.instrument.strike).unwrap_or(std::cmp::Ordering::Equal))
        });
    }

    pub fn scaled(&self, lambda: &S) -> Self {
        Portfolio {
            space: self.space.clone(),
            positions: self
                .positions
                .iter()
                .map(|p| Position {
                    instrument: p.instrument.clone(),
                    weight: p.weight.clone() * lambda.clone(),
                })
                .collect(),
        }
    }

    pub fn merge(&mut self, other: &Portfolio<S>) -> Result<()> {
        for p in &other.positions {
            self.push(p.instrument.clone(), p.weight.clone())?;
        }
        Ok(())
    }

    pub fn evaluate(&self) -> Payoff<S> {
        let mut total = Payoff::zero(self.space.clone());
        for p in &self.positions {
            let leg = p.instrument.payoff().scale(&p.weight);
            total = total.plus(&leg).expect("positions share the portfolio space");
        }
        total
    }
}

/// A linearly independent spanning set of an option space.
#[derive(Debug, Clone)]
pub struct OptionSpaceBasis<S = f64> {
    pub basis: Vec<Payoff<S>>,
    pub instruments: Vec<(OptionKind, S)>,
}

impl<S> OptionSpaceBasis<S> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn strikes(&self) -> Vec<&S> {
        self.instruments.iter().map(|(_, k)| k).collect()
    }
}

fn check_limited_liability<S: Scalar>(f: &Payoff<S>) -> Result<()> {
    match f
        .values()
        .iter()
        .position(|v| v.is_negative() && !v.is_negligible())
    {
        Some(index) => Err(LatticeError::LimitedLiability { index }),
        None => Ok(()),
    }
}

fn two<S: Scalar>() -> S {
    S::one() + S::one()
}

/// Strikes at the distinct values of `values`, the midpoints between them,
/// and one strike below the smallest.
fn option_strike_grid<S: Scalar>(distinct: &[S]) -> Vec<S> {
    let lowest = distinct[0].clone();
    let below = if lowest > S::zero() && !lowest.is_negligible() {
        S::zero()
    } else {
        lowest.clone() - S::one()
    };
    let mut grid = vec![below];
    for (k, v) in distinct.iter().enumerate() {
        grid.push(v.clone());
        if let Some(next) = distinct.get(k + 1) {
            grid.push((v.clone() + next.clone()) / two());
        }
    }
    grid
}

/// Calls and puts on `f` whose span is the option space of `f`.
pub fn option_space_basis<S: Scalar>(f: &Payoff<S>) -> Result<OptionSpaceBasis<S>> {
    check_limited_liability(f)?;
    let distinct: Vec<S> = level_sets(f).into_iter().map(|(v, _)| v).collect();
    let mut span = SpanBasis::new(f.len());
    let mut basis = Vec::new();
    let mut instruments = Vec::new();
    for strike in option_strike_grid(&distinct) {
        for kind in [OptionKind::Call, OptionKind::Put] {
            let payoff = option_payoff(f, &strike, kind);
            if span.insert(payoff.values(), instruments.len()) {
                basis.push(payoff);
                instruments.push((kind, strike.clone()));
            }
        }
    }
    Ok(OptionSpaceBasis { basis, instruments })
}

/// A portfolio of at most three options on `f` paying the indicator of
/// `{f = target}`.
pub fn butterfly<S: Scalar>(f: &Payoff<S>, target: &S) -> Result<Portfolio<S>> {
    check_limited_liability(f)?;
    let levels: Vec<S> = level_sets(f).into_iter().map(|(v, _)| v).collect();
    let scale = levels.iter().fold(S::zero(), |acc, v| S::max_of(&acc, &v.abs()));
    let idx = levels
        .iter()
        .position(|v| (v.clone() - target.clone()).is_negligible_rel(&scale, crate::sigma::LEVEL_TOLERANCE))
        .ok_or_else(|| LatticeError::Argument(format!("{target} is not a value of the underlying")))?;
    let v = levels[idx].clone();
    let underlying = Arc::new(f.clone());
    let leg = |kind, strike: S| Instrument {
        kind,
        strike,
        underlying: underlying.clone(),
    };
    let below = idx.checked_sub(1).map(|i| v.clone() - levels[i].clone());
    let above = levels.get(idx + 1).map(|w| w.clone() - v.clone());

    let mut portfolio = Portfolio::new(f.space().clone());
    match (below, above) {
        // single level: a deep put pays one everywhere
        (None, None) => {
            portfolio.push(leg(OptionKind::Put, v + S::one()), S::one())?;
        }
        (None, Some(gap)) => {
            let eps = gap / two();
            portfolio.push(leg(OptionKind::Put, v + eps.clone()), S::one() / eps)?;
        }
        (Some(gap), None) => {
            let eps = gap / two();
            portfolio.push(leg(OptionKind::Call, v - eps.clone()), S::one() / eps)?;
        }
        (Some(lo), Some(hi)) => {
            let eps = S::min_of(&lo, &hi) / two();
            let inv = S::one() / eps.clone();
            portfolio.push(leg(OptionKind::Call, v.clone() - eps.clone()), inv.clone())?;
            portfolio.push(leg(OptionKind::Call, v.clone()), -(two::<S>() * inv.clone()))?;
            portfolio.push(leg(OptionKind::Call, v + eps), inv)?;
        }
    }
    Ok(portfolio)
}

/// Probability-weighted conditional expectation of `g` given the level sets of `f`.
fn conditional_expectation<S: Scalar>(g: &Payoff<S>, f: &Payoff<S>) -> Vec<f64> {
    let probs = g.space().probs();
    let mut out = vec![0.0; g.len()];
    let partition = sigma_of(std::slice::from_ref(f)).expect("one asset");
    for block in partition.blocks() {
        let mass: f64 = block.iter().map(|&i| probs[i]).sum();
        let mean: f64 = block
            .iter()
            .map(|&i| probs[i] * g.values()[i].to_f64_lossy())
            .sum::<f64>()
            / mass;
        for &i in block {
            out[i] = mean;
        }
    }
    out
}

/// Replicates a claim on `f` exactly as a sum of butterflies.
///
/// Fails with [`LatticeError::SpanningFailure`] when `g` separates states
/// that `f` does not; the error carries the conditional expectation of `g`
/// given `f` (the best approximation by claims on `f`) and its max residual.
pub fn replicate<S: Scalar>(g: &Payoff<S>, f: &Payoff<S>) -> Result<Portfolio<S>> {
    g.same_space(f)?;
    check_limited_liability(f)?;
    let partition = sigma_of(std::slice::from_ref(f))?;
    if !is_measurable(g, &partition)? {
        let best = conditional_expectation(g, f);
        let residual = g
            .values()
            .iter()
            .zip(&best)
            .map(|(a, b)| (a.to_f64_lossy() - b).abs())
            .fold(0.0, f64::max);
        return Err(LatticeError::SpanningFailure {
            residual,
            block: violating_block(g, &partition).unwrap_or_default(),
            best_approximation: best,
        });
    }
    let mut portfolio = Portfolio::new(f.space().clone());
    for (value, states) in level_sets(f) {
        let payout = g.values()[states[0]].clone();
        if payout.is_zero() {
            continue;
        }
        portfolio.merge(&butterfly(f, &value)?.scaled(&payout))?;
    }
    portfolio.normalize();
    Ok(portfolio)
}

/// Outcome of a two-generator sublattice membership test.
#[derive(Debug, Clone)]
pub struct Membership<S = f64> {
    pub member: bool,
    /// `(strike, kind, weight)`: a call stands for `(x - k y)^+`, a put for `(k y - x)^+`.
    pub coefficients: Vec<(S, OptionKind, S)>,
    pub residual: S,
}

/// Generators `(x - ky)^+` and `(ky - x)^+` on the ratio grid.
pub fn two_asset_generators<S: Scalar>(x: &Payoff<S>, y: &Payoff<S>) -> Result<Vec<(S, OptionKind, Payoff<S>)>> {
    x.same_space(y)?;
    x.check_nonneg()?;
    y.check_nonneg()?;
    let supp: Vec<usize> = (0..y.len()).filter(|&i| !y.values()[i].is_negligible()).collect();
    let ratios: Vec<S> = (0..x.len())
        .map(|i| {
            if supp.contains(&i) {
                x.values()[i].clone() / y.values()[i].clone()
            } else {
                S::zero()
            }
        })
        .collect();
    let groups = level_groups(&supp, &ratios);
    let mut grid = Vec::new();
    if groups.is_empty() {
        grid.push(S::zero());
    } else {
        let rep = |g: &Vec<usize>| ratios[g[0]].clone();
        grid.push(rep(&groups[0]) - S::one());
        for (k, g) in groups.iter().enumerate() {
            grid.push(rep(g));
            if let Some(next) = groups.get(k + 1) {
                grid.push((rep(g) + rep(next)) / two());
            }
        }
        grid.push(rep(groups.last().unwrap()) + S::one());
    }
    let mut out = Vec::with_capacity(2 * grid.len());
    for k in grid {
        let ky = y.scale(&k);
        out.push((k.clone(), OptionKind::Call, x.minus(&ky)?.pos_part()));
        out.push((k, OptionKind::Put, ky.minus(x)?.pos_part()));
    }
    Ok(out)
}

/// Decides whether `z` lies in the sublattice generated by `x, y >= 0`.
pub fn sublattice_membership<S: Scalar>(z: &Payoff<S>, x: &Payoff<S>, y: &Payoff<S>) -> Result<Membership<S>> {
    z.same_space(x)?;
    let generators = two_asset_generators(x, y)?;
    let span = SpanBasis::from_vectors(z.len(), generators.iter().map(|(_, _, g)| g.values()));
    let projection = span.project(z.values());
    let coefficients = span
        .kept()
        .iter()
        .zip(projection.weights)
        .map(|(&i, w)| (generators[i].0.clone(), generators[i].1, w))
        .collect();
    Ok(Membership {
        member: projection.member,
        coefficients,
        residual: projection.residual_norm,
    })
}

/// Reduced row echelon basis of the span of `vectors`, entries below the
/// span tolerance snapped to zero.
fn rref<S: Scalar>(n: usize, vectors: &[Vec<S>]) -> Vec<Vec<S>> {
    let mut rows: Vec<Vec<S>> = vectors.to_vec();
    let scale = rows
        .iter()
        .flatten()
        .fold(S::zero(), |acc, v| S::max_of(&acc, &v.abs()));
    let tiny = |v: &S| v.is_negligible_rel(&scale, crate::scalar::SPAN_TOLERANCE);
    let mut pivot_row = 0;
    for col in 0..n {
        if pivot_row == rows.len() {
            break;
        }
        let best = (pivot_row..rows.len())
            .max_by(|&a, &b| rows[a][col].abs().partial_cmp(&rows[b][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        if tiny(&rows[best][col]) {
            continue;
        }
        rows.swap(pivot_row, best);
        let p = rows[pivot_row][col].clone();
        for v in rows[pivot_row].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == pivot_row || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot) {
                *v = v.clone() - factor.clone() * pv.clone();
                if tiny(v) {
                    *v = S::zero();
                }
            }
        }
        pivot_row += 1;
    }
    rows.truncate(pivot_row);
    rows
}

/// The sublattice generated by `generators`, by brute-force closure.
///
/// Each round puts the current span in reduced row echelon form and adds the
/// positive part of every basis row and the meet of every pair of rows. When
/// all of them already lie in the span, the rows are nonnegative and pairwise
/// disjoint, so the span is a sublattice; otherwise the span grows. The
/// returned basis consists of those disjoint nonnegative rows.
pub fn lattice_closure_oracle<S: Scalar>(generators: &[Payoff<S>], cap: usize) -> Result<Vec<Payoff<S>>> {
    let first = generators
        .first()
        .ok_or_else(|| LatticeError::Argument("at least one generator is required".into()))?;
    for g in &generators[1..] {
        first.same_space(g)?;
    }
    let n = first.len();
    let mut vectors: Vec<Vec<S>> = generators.iter().map(|g| g.values().to_vec()).collect();
    let mut rounds = 0;
    loop {
        let rows = rref(n, &vectors);
        let span = SpanBasis::from_vectors(n, rows.iter().map(|r| r.as_slice()));
        let mut candidates: Vec<Vec<S>> = rows.iter().map(|r| r.iter().map(S::pos_part).collect()).collect();
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                candidates.push(rows[a].iter().zip(&rows[b]).map(|(p, q)| S::min_of(p, q)).collect());
            }
        }
        let missing: Vec<Vec<S>> = candidates.into_iter().filter(|c| !span.contains(c)).collect();
        if missing.is_empty() {
            return rows
                .into_iter()
                .map(|r| Payoff::new(first.space().clone(), r))
                .collect();
        }
        rounds += 1;
        if rounds > cap {
            return Err(LatticeError::NonConvergence { cap });
        }
        vectors = rows;
        vectors.extend(missing);
    }
}
