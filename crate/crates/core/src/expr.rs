//! Expression trees over lattice generators.

use std::fmt;

use rand::Rng;

use crate::error::{LatticeError, Result};
use crate::lattice::LatticeElement;
use crate::scalar::Scalar;

/// A lattice-linear expression in numbered generators.
///
/// Scalars are stored as small rationals so the same tree evaluates exactly
/// in rational mode and approximately in float mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeExpr {
    Gen(usize),
    Add(Box<LatticeExpr>, Box<LatticeExpr>),
    Scale { numer: i64, denom: i64, expr: Box<LatticeExpr> },
    Meet(Box<LatticeExpr>, Box<LatticeExpr>),
    Join(Box<LatticeExpr>, Box<LatticeExpr>),
    Pos(Box<LatticeExpr>),
}

const SCALARS: [(i64, i64); 8] = [(-2, 1), (-1, 1), (-1, 2), (1, 3), (1, 2), (2, 1), (3, 1), (-3, 4)];

impl LatticeExpr {
    pub fn gen(i: usize) -> Self {
        LatticeExpr::Gen(i)
    }

    pub fn add(a: LatticeExpr, b: LatticeExpr) -> Self {
        LatticeExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn scale(numer: i64, denom: i64, e: LatticeExpr) -> Self {
        LatticeExpr::Scale {
            numer,
            denom,
            expr: Box::new(e),
        }
    }

    pub fn meet(a: LatticeExpr, b: LatticeExpr) -> Self {
        LatticeExpr::Meet(Box::new(a), Box::new(b))
    }

    pub fn join(a: LatticeExpr, b: LatticeExpr) -> Self {
        LatticeExpr::Join(Box::new(a), Box::new(b))
    }

    pub fn pos(a: LatticeExpr) -> Self {
        LatticeExpr::Pos(Box::new(a))
    }

    /// `a - b`.
    pub fn sub(a: LatticeExpr, b: LatticeExpr) -> Self {
        Self::add(a, Self::scale(-1, 1, b))
    }

    pub fn depth(&self) -> usize {
        match self {
            LatticeExpr::Gen(_) => 0,
            LatticeExpr::Scale { expr, .. } | LatticeExpr::Pos(expr) => 1 + expr.depth(),
            LatticeExpr::Add(a, b) | LatticeExpr::Meet(a, b) | LatticeExpr::Join(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn max_generator(&self) -> usize {
        match self {
            LatticeExpr::Gen(i) => *i,
            LatticeExpr::Scale { expr, .. } | LatticeExpr::Pos(expr) => expr.max_generator(),
            LatticeExpr::Add(a, b) | LatticeExpr::Meet(a, b) | LatticeExpr::Join(a, b) => {
                a.max_generator().max(b.max_generator())
            }
        }
    }

    pub fn eval<S: Scalar, E: LatticeElement<S>>(&self, generators: &[E]) -> Result<E> {
        if self.max_generator() >= generators.len() {
            return Err(LatticeError::Argument(format!(
                "expression references generator {} but only {} are given",
                self.max_generator(),
                generators.len()
            )));
        }
        self.eval_unchecked(generators)
    }

    fn eval_unchecked<S: Scalar, E: LatticeElement<S>>(&self, gens: &[E]) -> Result<E> {
        Ok(match self {
            LatticeExpr::Gen(i) => gens[*i].clone(),
            LatticeExpr::Add(a, b) => a.eval_unchecked(gens)?.plus(&b.eval_unchecked(gens)?)?,
            LatticeExpr::Scale { numer, denom, expr } => expr.eval_unchecked(gens)?.scale(&S::from_ratio(*numer, *denom)),
            LatticeExpr::Meet(a, b) => a.eval_unchecked(gens)?.meet(&b.eval_unchecked(gens)?)?,
            LatticeExpr::Join(a, b) => a.eval_unchecked(gens)?.join(&b.eval_unchecked(gens)?)?,
            LatticeExpr::Pos(a) => a.eval_unchecked(gens)?.pos_part(),
        })
    }

    /// A random tree of depth at most `max_depth` over `generators` leaves.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_depth: usize, generators: usize) -> Self {
        assert!(generators > 0);
        if max_depth == 0 || rng.random_bool(0.2) {
            return LatticeExpr::Gen(rng.random_range(0..generators));
        }
        let d = max_depth - 1;
        match rng.random_range(0..5) {
            0 => Self::add(Self::random(rng, d, generators), Self::random(rng, d, generators)),
            1 => {
                let (n, q) = SCALARS[rng.random_range(0..SCALARS.len())];
                Self::scale(n, q, Self::random(rng, d, generators))
            }
            2 => Self::meet(Self::random(rng, d, generators), Self::random(rng, d, generators)),
            3 => Self::join(Self::random(rng, d, generators), Self::random(rng, d, generators)),
            _ => Self::pos(Self::random(rng, d, generators)),
        }
    }

    /// Renders with the given generator names (`g{i}` when missing).
    pub fn render(&self, names: &[&str]) -> String {
        match self {
            LatticeExpr::Gen(i) => names.get(*i).map(|s| s.to_string()).unwrap_or_else(|| format!("g{i}")),
            LatticeExpr::Add(a, b) => format!("({} + {})", a.render(names), b.render(names)),
            LatticeExpr::Scale { numer, denom, expr } if *denom == 1 => format!("{numer}*{}", expr.render(names)),
            LatticeExpr::Scale { numer, denom, expr } => format!("({numer}/{denom})*{}", expr.render(names)),
            LatticeExpr::Meet(a, b) => format!("({} ∧ {})", a.render(names), b.render(names)),
            LatticeExpr::Join(a, b) => format!("({} ∨ {})", a.render(names), b.render(names)),
            LatticeExpr::Pos(a) => format!("{}⁺", a.render(names)),
        }
    }
}

impl fmt::Display for LatticeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&[]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Payoff, StateSpace};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn evaluates_pointwise() {
        let s = StateSpace::uniform(2).unwrap();
        let x = Payoff::new(s.clone(), vec![1.0, -2.0]).unwrap();
        let y = Payoff::new(s.clone(), vec![0.5, 3.0]).unwrap();
        let e = LatticeExpr::meet(LatticeExpr::pos(LatticeExpr::gen(0)), LatticeExpr::scale(1, 2, LatticeExpr::gen(1)));
        assert_eq!(e.eval(&[x.clone(), y.clone()]).unwrap().values(), &[0.25, 0.0]);
        assert_eq!(e.render(&["x", "y"]), "(x⁺ ∧ (1/2)*y)");
        assert!(LatticeExpr::gen(2).eval(&[x, y]).is_err());
    }

    #[test]
    fn random_respects_depth() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let e = LatticeExpr::random(&mut rng, 6, 2);
            assert!(e.depth() <= 6);
            assert!(e.max_generator() < 2);
        }
    }
}
