//! Finite sigma-algebras, represented as partitions of the state space.
//!
//! A finite complete Boolean algebra of components of the unit corresponds to
//! a partition: its atoms are the blocks, and its members are the indicators of
//! unions of blocks.
//!
//! Measurability through components quantifies over every level `λ`. On a
//! finite space the support of `(λu - x)^+` only changes when `λ` crosses one
//! of the ratios `x_i / u_i`, so it suffices to test `λ` at each distinct
//! ratio and between consecutive ratios. Below the smallest ratio the
//! projection is `0`, above the largest it is `u`, and both belong to every
//! algebra.

use std::sync::Arc;

use crate::error::{LatticeError, Result};
use crate::lattice::{band_projection_unit, is_component, support, LatticeElement, Payoff, StateSpace};
use crate::linalg;
use crate::scalar::Scalar;
use crate::spanning::lattice_closure_oracle;

/// Relative tolerance used to merge nearly equal values into one level set.
pub const LEVEL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    space: Arc<StateSpace>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(space: Arc<StateSpace>, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = space.len();
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(LatticeError::Argument("partition has an empty block".into()));
            }
            for &i in block {
                if i >= n {
                    return Err(LatticeError::Argument(format!("state {i} out of range (n = {n})")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(LatticeError::Argument(format!("state {i} appears in two blocks")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(LatticeError::Argument(format!("state {i} is not covered")));
        }
        Ok(Self::canonical(space, blocks))
    }

    fn canonical(space: Arc<StateSpace>, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Partition { space, blocks }
    }

    pub fn discrete(space: Arc<StateSpace>) -> Self {
        let blocks = (0..space.len()).map(|i| vec![i]).collect();
        Partition { space, blocks }
    }

    pub fn trivial(space: Arc<StateSpace>) -> Self {
        let blocks = vec![(0..space.len()).collect()];
        Partition { space, blocks }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, state: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&state))
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks.iter().all(|b| {
            let target = coarser.block_of(b[0]);
            b.iter().all(|&i| coarser.block_of(i) == target)
        })
    }

    /// Whether a set of states is a union of blocks (a member of the algebra).
    pub fn is_union_of_blocks(&self, states: &[usize]) -> bool {
        let mut mark = vec![false; self.space.len()];
        for &i in states {
            if i < mark.len() {
                mark[i] = true;
            }
        }
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&i| mark[i]) || b.iter().all(|&i| !mark[i]))
    }
}

/// Groups `values` (indexed by state) into level sets: sorted by value,
/// consecutive values within tolerance are merged. Returns groups in increasing
/// order of value.
pub(crate) fn level_groups<S: Scalar>(states: &[usize], values: &[S]) -> Vec<Vec<usize>> {
    if states.is_empty() {
        return Vec::new();
    }
    let scale = states
        .iter()
        .fold(S::zero(), |acc, &i| S::max_of(&acc, &values[i].abs()));
    let mut order = states.to_vec();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut groups: Vec<Vec<usize>> = vec![vec![order[0]]];
    for w in order.windows(2) {
        let gap = values[w[1]].clone() - values[w[0]].clone();
        if gap.is_negligible_rel(&scale, LEVEL_TOLERANCE) {
            groups.last_mut().unwrap().push(w[1]);
        } else {
            groups.push(vec![w[1]]);
        }
    }
    groups
}

/// Distinct values of `f` (up to the level tolerance), ascending, with the
/// states where each is attained. The representative of a level set is its
/// smallest member value.
pub fn level_sets<S: Scalar>(f: &Payoff<S>) -> Vec<(S, Vec<usize>)> {
    let states: Vec<usize> = (0..f.len()).collect();
    level_groups(&states, f.values())
        .into_iter()
        .map(|mut g| {
            g.sort_unstable();
            let rep = g
                .iter()
                .map(|&i| f.values()[i].clone())
                .reduce(|a, b| S::min_of(&a, &b))
                .expect("level sets are non-empty");
            (rep, g)
        })
        .collect()
}

/// Common refinement of the level-set partitions of several value vectors,
/// restricted to `states`.
fn refine_states<S: Scalar>(states: &[usize], vectors: &[&[S]]) -> Vec<Vec<usize>> {
    let mut blocks = vec![states.to_vec()];
    for values in vectors {
        blocks = blocks
            .into_iter()
            .flat_map(|b| level_groups(&b, values))
            .collect();
    }
    blocks
}

/// The sigma-algebra generated by a family of payoffs: the coarsest partition
/// on whose blocks every payoff is constant.
pub fn sigma_of<S: Scalar>(assets: &[Payoff<S>]) -> Result<Partition> {
    let first = assets
        .first()
        .ok_or_else(|| LatticeError::Argument("sigma_of needs at least one payoff".into()))?;
    for a in &assets[1..] {
        first.same_space(a)?;
    }
    let states: Vec<usize> = (0..first.len()).collect();
    let vectors: Vec<&[S]> = assets.iter().map(|a| a.values()).collect();
    Ok(Partition::canonical(first.space().clone(), refine_states(&states, &vectors)))
}

fn check_space<S: Scalar>(g: &Payoff<S>, part: &Partition) -> Result<()> {
    if g.space() == part.space() {
        Ok(())
    } else {
        Err(LatticeError::Dimension {
            expected: part.space().len(),
            found: g.len(),
        })
    }
}

/// `g` is constant on every block of `part`.
pub fn is_measurable<S: Scalar>(g: &Payoff<S>, part: &Partition) -> Result<bool> {
    check_space(g, part)?;
    Ok(violating_block(g, part).is_none())
}

/// The first block on which `g` is not constant.
pub fn violating_block<S: Scalar>(g: &Payoff<S>, part: &Partition) -> Option<Vec<usize>> {
    part.blocks()
        .iter()
        .find(|b| level_groups(b, g.values()).len() > 1)
        .cloned()
}

/// Measurability tested through band projections of `u`: for every level `λ`
/// the component `P_{(λu - x)^+} u` must be an element of the algebra.
pub fn measurable_via_components<S: Scalar>(x: &Payoff<S>, part: &Partition, u: &Payoff<S>) -> Result<bool> {
    check_space(x, part)?;
    x.same_space(u)?;
    if let Some(index) = u.values().iter().position(|v| !(*v > S::zero() && !v.is_negligible())) {
        return Err(LatticeError::NotWeakUnit { index });
    }
    let ratios: Vec<S> = x
        .values()
        .iter()
        .zip(u.values())
        .map(|(xi, ui)| xi.clone() / ui.clone())
        .collect();
    for lambda in level_grid(&ratios) {
        let w = u.scale(&lambda).minus(x)?.pos_part();
        let projection = band_projection_unit(&w, u)?;
        if !is_component(&projection, u)? {
            return Ok(false);
        }
        if !part.is_union_of_blocks(&support(&projection)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Each distinct value (at its smallest member) plus the midpoint of every gap
/// between consecutive level sets.
fn level_grid<S: Scalar>(values: &[S]) -> Vec<S> {
    let states: Vec<usize> = (0..values.len()).collect();
    let groups = level_groups(&states, values);
    let lo = |g: &Vec<usize>| g.iter().map(|&i| values[i].clone()).reduce(|a, b| S::min_of(&a, &b)).unwrap();
    let hi = |g: &Vec<usize>| g.iter().map(|&i| values[i].clone()).reduce(|a, b| S::max_of(&a, &b)).unwrap();
    let two = S::one() + S::one();
    let mut grid = Vec::with_capacity(2 * groups.len());
    for (k, g) in groups.iter().enumerate() {
        grid.push(lo(g));
        if let Some(next) = groups.get(k + 1) {
            grid.push((hi(g) + lo(next)) / two.clone());
        }
    }
    grid
}

/// Block indicators; they form a basis of the measurable payoffs.
pub fn measurable_subspace_basis<S: Scalar>(part: &Partition) -> Vec<Payoff<S>> {
    part.blocks()
        .iter()
        .map(|b| Payoff::indicator(part.space().clone(), b))
        .collect()
}

/// An order closed sublattice written as `{u h : h measurable}`.
#[derive(Debug, Clone)]
pub struct SublatticeRepresentation<S> {
    pub unit: Payoff<S>,
    pub partition: Partition,
    /// Index of the block holding the states outside the support of `unit`.
    pub null_block: Option<usize>,
}

impl<S: Scalar> SublatticeRepresentation<S> {
    /// Writes `g = u h` with `h` constant on blocks and zero on the null block;
    /// `None` when `g` is not of that form.
    pub fn factor(&self, g: &Payoff<S>) -> Result<Option<Payoff<S>>> {
        g.same_space(&self.unit)?;
        let mut h = vec![S::zero(); g.len()];
        for (b, block) in self.partition.blocks().iter().enumerate() {
            if Some(b) == self.null_block {
                if block.iter().any(|&i| !g.values()[i].is_negligible()) {
                    return Ok(None);
                }
                continue;
            }
            let ratio = g.values()[block[0]].clone() / self.unit.values()[block[0]].clone();
            for &i in block {
                let fitted = ratio.clone() * self.unit.values()[i].clone();
                let scale = S::max_of(&g.values()[i].abs(), &self.unit.values()[i].abs());
                if !(g.values()[i].clone() - fitted).is_negligible_rel(&scale, LEVEL_TOLERANCE) {
                    return Ok(None);
                }
                h[i] = ratio.clone();
            }
        }
        Ok(Some(g.with_values(h)?))
    }

    /// `u h` for a block-constant `h`.
    pub fn compose(&self, h: &Payoff<S>) -> Result<Payoff<S>> {
        if !is_measurable(h, &self.partition)? {
            return Err(LatticeError::NotMeasurable("h is not constant on blocks".into()));
        }
        self.unit.zip_with(h, |u, h| u.clone() * h.clone())
    }

    /// The basis `{u 1_B}` over the non-null blocks.
    pub fn basis(&self) -> Vec<Payoff<S>> {
        self.partition
            .blocks()
            .iter()
            .enumerate()
            .filter(|(b, _)| Some(*b) != self.null_block)
            .map(|(_, block)| {
                let ind = Payoff::<S>::indicator(self.unit.space().clone(), block);
                ind.zip_with(&self.unit, |a, b| a.clone() * b.clone()).expect("same space")
            })
            .collect()
    }
}

/// Represents the sublattice spanned by `basis` as `{u h : h measurable w.r.t.
/// the returned partition}`, with `u` the normalized sum of `|g|` over the basis.
pub fn closed_sublattice_representation<S: Scalar>(basis: &[Payoff<S>]) -> Result<SublatticeRepresentation<S>> {
    let first = basis
        .first()
        .ok_or_else(|| LatticeError::Argument("empty basis".into()))?;
    for g in &basis[1..] {
        first.same_space(g)?;
    }
    let n = first.len();
    let vectors: Vec<Vec<S>> = basis.iter().map(|g| g.values().to_vec()).collect();
    let own_rank = linalg::rank(n, &vectors);
    let closure = lattice_closure_oracle(basis, n + 1)?;
    if closure.len() != own_rank {
        return Err(LatticeError::NotASublattice(format!(
            "span has dimension {own_rank} but the generated sublattice has dimension {}",
            closure.len()
        )));
    }

    let mut unit = Payoff::zero(first.space().clone());
    for g in basis {
        unit = unit.plus(&g.abs())?;
    }
    let norm = unit.sup_norm();
    if !norm.is_negligible() {
        unit = unit.scale(&(S::one() / norm));
    }

    let supp = support(&unit);
    let ratios: Vec<Vec<S>> = basis
        .iter()
        .map(|g| {
            g.values()
                .iter()
                .zip(unit.values())
                .map(|(gi, ui)| if ui.is_negligible() { S::zero() } else { gi.clone() / ui.clone() })
                .collect()
        })
        .collect();
    let ratio_refs: Vec<&[S]> = ratios.iter().map(|r| r.as_slice()).collect();
    let mut blocks = refine_states(&supp, &ratio_refs);
    let null: Vec<usize> = (0..n).filter(|i| !supp.contains(i)).collect();
    let has_null = !null.is_empty();
    if has_null {
        blocks.push(null.clone());
    }
    let partition = Partition::canonical(first.space().clone(), blocks);
    let null_block = if has_null { partition.block_of(null[0]) } else { None };
    Ok(SublatticeRepresentation {
        unit,
        partition,
        null_block,
    })
}
