//! Pointwise lattice arithmetic on payoffs over a finite state space.

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{LatticeError, Result};
use crate::scalar::{Exact, Scalar};

const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// A finite probability space with strictly positive state weights.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    probs: Vec<f64>,
}

impl StateSpace {
    pub fn new(probs: Vec<f64>) -> Result<Arc<Self>> {
        if probs.is_empty() {
            return Err(LatticeError::StateSpace("at least one state is required".into()));
        }
        if let Some(i) = probs.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(LatticeError::StateSpace(format!(
                "state {i} has non-positive probability {}",
                probs[i]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(LatticeError::StateSpace(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Arc::new(StateSpace { probs }))
    }

    pub fn uniform(n: usize) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(LatticeError::StateSpace("at least one state is required".into()));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Operations shared by every lattice element the crate works with: payoff
/// vectors and truncated double arrays.
///
/// All operations act coordinatewise on the stored values.
pub trait LatticeElement<S: Scalar>: Clone + Sized {
    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self>;

    fn map(&self, f: impl Fn(&S) -> S) -> Self;

    /// The observable coordinates (excludes auxiliary data such as a limit column).
    fn coordinates(&self) -> &[S];

    /// Every stored value, auxiliary data included.
    fn stored_values(&self) -> Box<dyn Iterator<Item = &S> + '_>;

    fn sup_norm(&self) -> S {
        self.stored_values()
            .fold(S::zero(), |acc, v| S::max_of(&acc, &v.abs()))
    }

    fn meet(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, S::min_of)
    }

    fn join(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, S::max_of)
    }

    fn plus(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    fn minus(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    fn scale(&self, lambda: &S) -> Self {
        self.map(|a| a.clone() * lambda.clone())
    }

    fn pos_part(&self) -> Self {
        self.map(S::pos_part)
    }

    fn neg_part(&self) -> Self {
        self.map(|a| (-a.clone()).pos_part())
    }

    fn abs(&self) -> Self {
        self.map(|a| a.abs())
    }

    fn is_nonneg(&self) -> bool {
        self.stored_values().all(|v| !v.is_negative() || v.is_negligible())
    }

    /// Entrywise `self <= other` up to the comparison tolerance.
    fn dominated_by(&self, other: &Self) -> Result<bool> {
        let diff = other.minus(self)?;
        Ok(diff.is_nonneg())
    }

    /// `|self - other|_inf` is negligible.
    fn approx_eq(&self, other: &Self) -> Result<bool> {
        Ok(self
            .minus(other)?
            .stored_values()
            .all(|v| v.is_negligible()))
    }
}

/// A random variable on a finite state space.
#[derive(Clone, PartialEq)]
pub struct Payoff<S = f64> {
    space: Arc<StateSpace>,
    values: Vec<S>,
}

impl<S: fmt::Debug> fmt::Debug for Payoff<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Payoff").field(&self.values).finish()
    }
}

impl<S: Scalar> Payoff<S> {
    pub fn new(space: Arc<StateSpace>, values: Vec<S>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(LatticeError::Dimension {
                expected: space.len(),
                found: values.len(),
            });
        }
        Ok(Payoff { space, values })
    }

    pub fn constant(space: Arc<StateSpace>, c: S) -> Self {
        let values = vec![c; space.len()];
        Payoff { space, values }
    }

    pub fn zero(space: Arc<StateSpace>) -> Self {
        Self::constant(space, S::zero())
    }

    /// The constant-one payoff.
    pub fn one(space: Arc<StateSpace>) -> Self {
        Self::constant(space, S::one())
    }

    /// Indicator of a set of states. Out-of-range indices are ignored.
    pub fn indicator(space: Arc<StateSpace>, states: &[usize]) -> Self {
        let mut values = vec![S::zero(); space.len()];
        for &i in states {
            if let Some(v) = values.get_mut(i) {
                *v = S::one();
            }
        }
        Payoff { space, values }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_values(&self, values: Vec<S>) -> Result<Self> {
        Self::new(self.space.clone(), values)
    }

    pub fn same_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(LatticeError::Dimension {
                expected: self.len(),
                found: other.len(),
            })
        }
    }

    /// Probability-weighted expectation.
    pub fn expectation(&self) -> f64 {
        self.values
            .iter()
            .zip(self.space.probs())
            .map(|(v, p)| v.to_f64_lossy() * p)
            .sum()
    }

    pub fn to_f64(&self) -> Payoff<f64> {
        Payoff {
            space: self.space.clone(),
            values: self.values.iter().map(|v| v.to_f64_lossy()).collect(),
        }
    }

    /// Strictly positive in every state.
    pub fn is_weak_unit(&self) -> bool {
        self.values
            .iter()
            .all(|v| *v > S::zero() && !v.is_negligible())
    }

    pub fn check_nonneg(&self) -> Result<()> {
        match self
            .values
            .iter()
            .position(|v| v.is_negative() && !v.is_negligible())
        {
            Some(index) => Err(LatticeError::Domain(format!(
                "entry {index} is negative ({})",
                self.values[index]
            ))),
            None => Ok(()),
        }
    }
}

impl Payoff<f64> {
    /// Exact image of the stored binary floats.
    pub fn to_exact(&self) -> Payoff<Exact> {
        Payoff {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .map(|v| Exact::from_float(*v).unwrap_or_else(Exact::zero))
                .collect(),
        }
    }
}

impl<S: Scalar> LatticeElement<S> for Payoff<S> {
    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        self.same_space(other)?;
        Ok(Payoff {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Payoff {
            space: self.space.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    fn coordinates(&self) -> &[S] {
        &self.values
    }

    fn stored_values(&self) -> Box<dyn Iterator<Item = &S> + '_> {
        Box::new(self.values.iter())
    }
}

/// One of the pointwise lattice-linear operations.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeOp<S> {
    Meet,
    Join,
    PosPart,
    Abs,
    Plus,
    Scale(S),
}

/// Applies `op` to `x` (and `y` for the binary operations).
pub fn lattice_op<S: Scalar, E: LatticeElement<S>>(
    op: &LatticeOp<S>,
    x: &E,
    y: Option<&E>,
) -> Result<E> {
    let rhs = || y.ok_or_else(|| LatticeError::Argument("binary operation needs two operands".into()));
    match op {
        LatticeOp::Meet => x.meet(rhs()?),
        LatticeOp::Join => x.join(rhs()?),
        LatticeOp::Plus => x.plus(rhs()?),
        LatticeOp::PosPart => Ok(x.pos_part()),
        LatticeOp::Abs => Ok(x.abs()),
        LatticeOp::Scale(lambda) => Ok(x.scale(lambda)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        }
    }
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OptionKind {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "call" => Ok(OptionKind::Call),
            "put" => Ok(OptionKind::Put),
            other => Err(LatticeError::Argument(format!("unknown option kind `{other}`"))),
        }
    }
}

/// `(f - k)^+` for a call, `(k - f)^+` for a put.
pub fn option_payoff<S: Scalar>(f: &Payoff<S>, strike: &S, kind: OptionKind) -> Payoff<S> {
    match kind {
        OptionKind::Call => f.map(|v| (v.clone() - strike.clone()).pos_part()),
        OptionKind::Put => f.map(|v| (strike.clone() - v.clone()).pos_part()),
    }
}

/// Whether `x` is a component of `u`, i.e. `(u - x) ∧ x = 0`.
pub fn is_component<S: Scalar>(x: &Payoff<S>, u: &Payoff<S>) -> Result<bool> {
    let gap = u.minus(x)?.meet(x)?;
    Ok(gap.values().iter().all(|v| v.is_negligible()))
}

/// The band projection of `u` onto the band generated by `x`: `u` on the
/// support of `x`, zero elsewhere.
pub fn band_projection_unit<S: Scalar>(x: &Payoff<S>, u: &Payoff<S>) -> Result<Payoff<S>> {
    x.same_space(u)?;
    x.check_nonneg()?;
    u.check_nonneg()?;
    Ok(x.zip_with(u, |xi, ui| {
        if xi.is_negligible() {
            S::zero()
        } else {
            ui.clone()
        }
    })?)
}

/// Indices where a payoff is not negligible.
pub fn support<S: Scalar>(x: &Payoff<S>) -> Vec<usize> {
    x.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_negligible())
        .map(|(i, _)| i)
        .collect()
}
