//! Two positive elements `u, v` of `l^inf(N x N)` whose generated sublattice
//! has an element `e` in its uo-closure that is not in its order closure.
//!
//! Row `m` of `u` is `(1/m, 1, 1, ...)` and row `m` of `v` is
//! `(c_m/m, c_{m1}, c_{m2}, ...)`, so every row of every element `z` of the
//! sublattice satisfies `lim_n z_{mn} = m z_{m1}`. Differences of call spreads
//! on `v` with strikes between consecutive parameters isolate one row at a
//! time and sum to `y^j`, which tends to `e = (1, 0, 0, ...)` coordinatewise.
//! Any `z` that is within `1/2` of `e` in the first column of row `m` has
//! `|z|_inf >= m/2`, so no order bounded sequence can reach `e`.



use super::array::DoubleArray;
use crate::error::{LatticeError, Result};
use crate::expr::LatticeExpr;
use crate::lattice::LatticeElement;
use crate::scalar::Scalar;

/// The sequences `c_m` and `c_{mn}`, stored 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleParams<S = f64> {
    c: Vec<S>,
    grid: Vec<Vec<S>>,
}

fn half_pow<S: Scalar>(k: usize) -> S {
    let half = S::from_ratio(1, 2);
    (0..k).fold(S::one(), |acc, _| acc * half.clone())
}

impl<S: Scalar> CounterexampleParams<S> {
    pub fn new(c: Vec<S>, grid: Vec<Vec<S>>) -> Result<Self> {
        let p = CounterexampleParams { c, grid };
        p.validate()?;
        Ok(p)
    }

    /// `c_m = 1 - 2^-(m+1)` and `c_{mn} = c_m - 2^-(m+1+n)`.
    pub fn dyadic(rows: usize, cols: usize) -> Self {
        let c: Vec<S> = (1..=rows).map(|m| S::one() - half_pow::<S>(m + 1)).collect();
        let grid = (1..=rows)
            .map(|m| (1..=cols).map(|n| c[m - 1].clone() - half_pow::<S>(m + 1 + n)).collect())
            .collect();
        CounterexampleParams { c, grid }
    }

    pub fn rows(&self) -> usize {
        self.c.len()
    }

    pub fn cols(&self) -> usize {
        self.grid.first().map_or(0, |r| r.len())
    }

    /// `c_m`, 1-based.
    pub fn c(&self, m: usize) -> &S {
        &self.c[m - 1]
    }

    /// `c_{mn}`, 1-based.
    pub fn c_grid(&self, m: usize, n: usize) -> &S {
        &self.grid[m - 1][n - 1]
    }

    /// Checks `c_{m,n} < c_{m,n+1} < c_m < c_{m+1,n} < 1` and `c_m > 0` on the stored range.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LatticeError::InvalidParameters(msg));
        if self.c.is_empty() || self.grid.len() != self.c.len() {
            return bad("one grid row per c_m is required".into());
        }
        let cols = self.cols();
        if cols == 0 || self.grid.iter().any(|r| r.len() != cols) {
            return bad("grid rows must be non-empty and of equal length".into());
        }
        for m in 1..=self.rows() {
            let cm = self.c(m);
            if !(*cm > S::zero() && *cm < S::one()) {
                return bad(format!("c_{m} = {cm} is outside (0, 1)"));
            }
            for n in 1..=cols {
                let cmn = self.c_grid(m, n);
                if cmn >= cm {
                    return bad(format!("c_{{{m},{n}}} = {cmn} is not below c_{m} = {cm}"));
                }
                if n < cols && self.c_grid(m, n + 1) <= cmn {
                    return bad(format!("row {m} is not strictly increasing at column {n}"));
                }
                if m > 1 && cmn <= self.c(m - 1) {
                    return bad(format!("c_{{{m},{n}}} = {cmn} is not above c_{} = {}", m - 1, self.c(m - 1)));
                }
            }
        }
        Ok(())
    }
}

/// The generators `u`, `v`, the target `e`, and the parameters they were built from.
#[derive(Debug, Clone)]
pub struct Counterexample<S = f64> {
    pub u: DoubleArray<S>,
    pub v: DoubleArray<S>,
    pub e: DoubleArray<S>,
    pub params: CounterexampleParams<S>,
}

/// Strikes of the element `x^{kj}`:
/// `c_{kj} < alpha < alpha' < c_{k,j+1}` and `c_k < beta < beta' < c_{k+1,1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct XkjStrikes<S> {
    pub alpha: S,
    pub alpha_prime: S,
    pub beta: S,
    pub beta_prime: S,
}

fn third_points<S: Scalar>(lo: &S, hi: &S) -> (S, S) {
    let gap = hi.clone() - lo.clone();
    (
        lo.clone() + gap.clone() * S::from_ratio(1, 3),
        lo.clone() + gap * S::from_ratio(2, 3),
    )
}

/// Builds `u`, `v` and `e` truncated to `rows x cols` with dyadic parameters.
///
/// Parameters are generated for `rows + 1` rows and `max(rows, cols) + 1`
/// columns so that `x^{kj}` is available for every represented row and for
/// every `j <= max(rows, cols)`.
pub fn build_counterexample<S: Scalar>(rows: usize, cols: usize) -> Result<Counterexample<S>> {
    if rows < 2 || cols < 2 {
        return Err(LatticeError::Argument(format!("truncation {rows}x{cols} is below 2x2")));
    }
    build_with_params(rows, cols, CounterexampleParams::dyadic(rows + 1, rows.max(cols) + 1))
}

pub fn build_with_params<S: Scalar>(rows: usize, cols: usize, params: CounterexampleParams<S>) -> Result<Counterexample<S>> {
    if rows < 2 || cols < 2 {
        return Err(LatticeError::Argument(format!("truncation {rows}x{cols} is below 2x2")));
    }
    params.validate()?;
    if params.rows() < rows + 1 || params.cols() < cols {
        return Err(LatticeError::InvalidParameters(format!(
            "parameters cover {}x{}, need at least {}x{}",
            params.rows(),
            params.cols(),
            rows + 1,
            cols
        )));
    }
    let u = DoubleArray::from_fn(
        rows,
        cols,
        |m, n| if n == 1 { S::from_ratio(1, m as i64) } else { S::one() },
        |_| S::one(),
    );
    let v = DoubleArray::from_fn(
        rows,
        cols,
        |m, n| {
            if n == 1 {
                params.c(m).clone() / S::from_ratio(m as i64, 1)
            } else {
                params.c_grid(m, n - 1).clone()
            }
        },
        |m| params.c(m).clone(),
    );
    let e = DoubleArray::from_fn(rows, cols, |_, n| if n == 1 { S::one() } else { S::zero() }, |_| S::zero());
    Ok(Counterexample { u, v, e, params })
}

impl<S: Scalar> Counterexample<S> {
    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.u.cols()
    }

    /// Largest `j` for which `x^{kj}` and `y^j` can be formed.
    pub fn max_j(&self) -> usize {
        self.params.cols() - 1
    }

    pub fn default_strikes(&self, k: usize, j: usize) -> Result<XkjStrikes<S>> {
        self.check_kj(k, j)?;
        let p = &self.params;
        let (alpha, alpha_prime) = third_points(p.c_grid(k, j), p.c_grid(k, j + 1));
        let (beta, beta_prime) = third_points(p.c(k), p.c_grid(k + 1, 1));
        Ok(XkjStrikes {
            alpha,
            alpha_prime,
            beta,
            beta_prime,
        })
    }

    fn check_kj(&self, k: usize, j: usize) -> Result<()> {
        if k == 0 || k > self.rows() {
            return Err(LatticeError::Argument(format!("row k = {k} outside 1..={}", self.rows())));
        }
        if j == 0 || j > self.max_j() {
            return Err(LatticeError::Argument(format!(
                "j = {j} outside 1..={}; truncation too small",
                self.max_j()
            )));
        }
        Ok(())
    }

    /// `((v - βu)^+ - (v - β'u)^+)/(β - β') - ((v - αu)^+ - (v - α'u)^+)/(α - α')`.
    pub fn xkj(&self, k: usize, j: usize, strikes: Option<XkjStrikes<S>>) -> Result<DoubleArray<S>> {
        let s = match strikes {
            Some(s) => {
                self.check_kj(k, j)?;
                let p = &self.params;
                let ok = p.c_grid(k, j) < &s.alpha
                    && s.alpha < s.alpha_prime
                    && &s.alpha_prime < p.c_grid(k, j + 1)
                    && p.c(k) < &s.beta
                    && s.beta < s.beta_prime
                    && &s.beta_prime < p.c_grid(k + 1, 1);
                if !ok {
                    return Err(LatticeError::Argument(format!("strikes for x^{{{k},{j}}} violate the ordering")));
                }
                s
            }
            None => self.default_strikes(k, j)?,
        };
        let spread = |lo: &S, hi: &S| -> Result<DoubleArray<S>> {
            let a = self.v.minus(&self.u.scale(lo))?.pos_part();
            let b = self.v.minus(&self.u.scale(hi))?.pos_part();
            Ok(a.minus(&b)?.scale(&(S::one() / (lo.clone() - hi.clone()))))
        };
        spread(&s.beta, &s.beta_prime)?.minus(&spread(&s.alpha, &s.alpha_prime)?)
    }

    /// `y^j = sum_{k <= j} k x^{kj}` (rows beyond the truncation contribute nothing).
    pub fn yj(&self, j: usize) -> Result<DoubleArray<S>> {
        if j == 0 || j > self.max_j() {
            return Err(LatticeError::Argument(format!(
                "j = {j} outside 1..={}; truncation too small",
                self.max_j()
            )));
        }
        let mut acc = DoubleArray::zeros(self.rows(), self.cols());
        for k in 1..=j.min(self.rows()) {
            let term = self.xkj(k, j, None)?.scale(&S::from_ratio(k as i64, 1));
            acc = acc.plus(&term)?;
        }
        Ok(acc)
    }

    /// `(y^1, ..., y^J)`.
    pub fn y_sequence(&self, last: usize) -> Result<Vec<DoubleArray<S>>> {
        (1..=last).map(|j| self.yj(j)).collect()
    }

    pub fn generators(&self) -> [DoubleArray<S>; 2] {
        [self.u.clone(), self.v.clone()]
    }
}

/// `limit(m) - m z_{m1}` for every row.
pub fn row_limit_residuals<S: Scalar>(z: &DoubleArray<S>) -> Vec<S> {
    (1..=z.rows())
        .map(|m| z.limit(m).clone() - S::from_ratio(m as i64, 1) * z.entry(m, 1).clone())
        .collect()
}

fn law_holds<S: Scalar>(z: &DoubleArray<S>) -> bool {
    row_limit_residuals(z)
        .iter()
        .zip(z.limit_column())
        .all(|(r, l)| r.is_negligible_rel(l, crate::scalar::tolerance()))
}

/// Evaluates `expr` over `[u, v]` on the first column and the limit column
/// only, and returns the per-row residuals of `lim_n z_{mn} = m z_{m1}`.
pub fn row_limit_law<S: Scalar>(expr: &LatticeExpr, cx: &Counterexample<S>) -> Result<Vec<S>> {
    if expr.max_generator() > 1 {
        return Err(LatticeError::Argument(format!(
            "expression references generator {}; only u (0) and v (1) exist",
            expr.max_generator()
        )));
    }
    let gens = [cx.u.leading_columns(1), cx.v.leading_columns(1)];
    let z = expr.eval(&gens)?;
    Ok(row_limit_residuals(&z))
}

/// Lower bound on `|z|_inf` at row `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstruction<S> {
    /// `|z_{m1} - 1| < 1/2`.
    pub holds: bool,
    /// `m / 2`; a lower bound for `sup_norm` whenever `holds`.
    pub bound: S,
    pub sup_norm: S,
}

/// If `z` is within `1/2` of `e` in the first column of row `m`, then
/// `|z|_inf >= |lim_n z_{mn}| = m z_{m1} > m/2`.
pub fn obstruction_certificate<S: Scalar>(z: &DoubleArray<S>, m: usize) -> Result<Obstruction<S>> {
    if m == 0 || m > z.rows() {
        return Err(LatticeError::Argument(format!("row {m} outside 1..={}", z.rows())));
    }
    if !law_holds(z) {
        return Err(LatticeError::Contract(
            "the row-limit law does not hold for this array".into(),
        ));
    }
    let half = S::from_ratio(1, 2);
    let holds = (z.entry(m, 1).clone() - S::one()).abs() < half;
    let bound = S::from_ratio(m as i64, 2);
    let sup_norm = z.sup_norm();
    if holds && sup_norm < bound {
        return Err(LatticeError::Contract(format!(
            "row {m}: sup norm {sup_norm} below {bound} although the row-limit law holds"
        )));
    }
    Ok(Obstruction { holds, bound, sup_norm })
}
