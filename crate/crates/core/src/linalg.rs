//! Span computations shared by the spanning and closure modules.
//!
//! Uses modified Gram-Schmidt without normalization, so the same code runs on
//! floats and on exact rationals (no square roots are taken).

use crate::scalar::{Scalar, SPAN_TOLERANCE};

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn max_abs<S: Scalar>(a: &[S]) -> S {
    a.iter().fold(S::zero(), |acc, x| S::max_of(&acc, &x.abs()))
}

fn negligible_residual<S: Scalar>(residual: &[S], reference: &[S]) -> bool {
    max_abs(residual).is_negligible_rel(&max_abs(reference), SPAN_TOLERANCE)
}

/// Orthogonal projection of a vector onto a [`SpanBasis`].
#[derive(Debug, Clone)]
pub struct Projection<S> {
    /// Weights on the kept basis vectors (in insertion order).
    pub weights: Vec<S>,
    pub residual: Vec<S>,
    /// `max |residual_i|`.
    pub residual_norm: S,
    pub member: bool,
}

/// An incrementally built linearly independent set.
#[derive(Debug, Clone)]
pub struct SpanBasis<S> {
    dim_ambient: usize,
    vectors: Vec<Vec<S>>,
    kept: Vec<usize>,
    ortho: Vec<Vec<S>>,
    ortho_sq: Vec<S>,
    // coupling[i][l] = coefficient of ortho[l] in vectors[i], l < i
    coupling: Vec<Vec<S>>,
}

impl<S: Scalar> SpanBasis<S> {
    pub fn new(dim_ambient: usize) -> Self {
        SpanBasis {
            dim_ambient,
            vectors: Vec::new(),
            kept: Vec::new(),
            ortho: Vec::new(),
            ortho_sq: Vec::new(),
            coupling: Vec::new(),
        }
    }

    /// Greedily keeps the vectors that enlarge the span, in order.
    pub fn from_vectors<'a, I>(dim_ambient: usize, vectors: I) -> Self
    where
        I: IntoIterator<Item = &'a [S]>,
        S: 'a,
    {
        let mut basis = Self::new(dim_ambient);
        for (i, v) in vectors.into_iter().enumerate() {
            basis.insert(v, i);
        }
        basis
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim_ambient
    }

    /// Indices (as passed to [`SpanBasis::insert`]) of the kept vectors.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn vectors(&self) -> &[Vec<S>] {
        &self.vectors
    }

    fn orthogonalize(&self, v: &[S]) -> (Vec<S>, Vec<S>) {
        let mut w = v.to_vec();
        let mut coeffs = Vec::with_capacity(self.ortho.len());
        for (q, q_sq) in self.ortho.iter().zip(&self.ortho_sq) {
            let c = dot(q, &w) / q_sq.clone();
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi = wi.clone() - c.clone() * qi.clone();
            }
            coeffs.push(c);
        }
        (w, coeffs)
    }

    /// Adds `v` if it is not already in the span. Returns whether it was added.
    pub fn insert(&mut self, v: &[S], tag: usize) -> bool {
        assert_eq!(v.len(), self.dim_ambient, "vector length differs from ambient dimension");
        if self.dim() == self.dim_ambient {
            return false;
        }
        let (w, coeffs) = self.orthogonalize(v);
        if negligible_residual(&w, v) {
            return false;
        }
        self.ortho_sq.push(dot(&w, &w));
        self.ortho.push(w);
        self.coupling.push(coeffs);
        self.vectors.push(v.to_vec());
        self.kept.push(tag);
        true
    }

    pub fn project(&self, z: &[S]) -> Projection<S> {
        let (residual, d) = self.orthogonalize(z);
        // vectors = Q R with R unit upper triangular; solve R w = d.
        let k = d.len();
        let mut weights = vec![S::zero(); k];
        for i in (0..k).rev() {
            let mut acc = d[i].clone();
            for j in i + 1..k {
                acc = acc - self.coupling[j][i].clone() * weights[j].clone();
            }
            weights[i] = acc;
        }
        let residual_norm = max_abs(&residual);
        let member = negligible_residual(&residual, z);
        Projection {
            weights,
            residual,
            residual_norm,
            member,
        }
    }

    pub fn contains(&self, z: &[S]) -> bool {
        self.project(z).member
    }

    pub fn contains_all<'a, I>(&self, others: I) -> bool
    where
        I: IntoIterator<Item = &'a [S]>,
        S: 'a,
    {
        others.into_iter().all(|z| self.contains(z))
    }
}

pub fn rank<S: Scalar>(dim_ambient: usize, vectors: &[Vec<S>]) -> usize {
    SpanBasis::from_vectors(dim_ambient, vectors.iter().map(|v| v.as_slice())).dim()
}

/// Mutual span containment.
pub fn spans_equal<S: Scalar>(dim_ambient: usize, a: &[Vec<S>], b: &[Vec<S>]) -> bool {
    let sa = SpanBasis::from_vectors(dim_ambient, a.iter().map(|v| v.as_slice()));
    let sb = SpanBasis::from_vectors(dim_ambient, b.iter().map(|v| v.as_slice()));
    sa.dim() == sb.dim()
        && sa.contains_all(b.iter().map(|v| v.as_slice()))
        && sb.contains_all(a.iter().map(|v| v.as_slice()))
}
