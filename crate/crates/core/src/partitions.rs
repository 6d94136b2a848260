//! Exact integer combinatorics of Young diagrams: contents, hooks,
//! addable/removable cells, symmetric-group and unitary-group dimensions and
//! branching ratios.
//!
//! Everything in this module is exact (big integers and rationals). Floating
//! point only enters downstream when these quantities are turned into matrix
//! entries or rotation angles.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A cell of a Young diagram, addressed by 1-based row and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        assert!(row >= 1 && col >= 1, "cells are 1-based");
        Cell { row, col }
    }

    /// Content of the cell, `col - row`.
    pub fn content(&self) -> i64 {
        self.col as i64 - self.row as i64
    }
}

/// Content `cont(u) = j - i` of a cell `u = (i, j)`.
pub fn content(cell: Cell) -> i64 {
    cell.content()
}

/// A Young diagram as weakly decreasing positive row lengths. Trailing zeros
/// are never stored; the empty list is the empty diagram.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    rows: Vec<usize>,
}

impl Partition {
    pub fn new(rows: Vec<usize>) -> Result<Self> {
        for w in rows.windows(2) {
            if w[0] < w[1] {
                return Err(Error::InvalidPartition(rows));
            }
        }
        if rows.contains(&0) {
            return Err(Error::InvalidPartition(rows));
        }
        Ok(Partition { rows })
    }

    pub fn empty() -> Self {
        Partition { rows: Vec::new() }
    }

    /// The single-box diagram `(1)`.
    pub fn single_box() -> Self {
        Partition { rows: vec![1] }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Number of cells `|λ|`.
    pub fn size(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Number of nonzero rows `len(λ)`.
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Length of row `i` (1-based); 0 beyond the last row.
    pub fn row(&self, i: usize) -> usize {
        if i >= 1 && i <= self.rows.len() {
            self.rows[i - 1]
        } else {
            0
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, &len)| (1..=len).map(move |j| Cell::new(i + 1, j)))
    }

    pub fn conjugate(&self) -> Partition {
        let cols = self.row(1);
        let rows = (1..=cols)
            .map(|j| self.rows.iter().filter(|&&r| r >= j).count())
            .collect();
        Partition { rows }
    }

    /// Hook length of a cell of the diagram.
    pub fn hook_len(&self, c: Cell) -> usize {
        debug_assert!(c.row <= self.num_rows() && c.col <= self.row(c.row));
        let arm = self.row(c.row) - c.col;
        let leg = self.rows.iter().skip(c.row).filter(|&&r| r >= c.col).count();
        arm + leg + 1
    }

    /// Addable cells `AC(λ)`, optionally bounded to `len(λ ∪ a) ≤ max_rows`
    /// (`AC_d(λ)`). Sorted by row.
    pub fn addable_cells(&self, max_rows: Option<usize>) -> Vec<Cell> {
        let mut out = Vec::new();
        let k = self.num_rows();
        for i in 1..=(k + 1) {
            if let Some(d) = max_rows {
                if i > d {
                    break;
                }
            }
            // Row i can grow iff it is strictly shorter than row i-1.
            let above = if i == 1 { usize::MAX } else { self.row(i - 1) };
            if self.row(i) < above {
                out.push(Cell::new(i, self.row(i) + 1));
            }
        }
        out
    }

    /// Removable cells `RC(λ)`, sorted by row.
    pub fn removable_cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for i in 1..=self.num_rows() {
            if self.row(i) > self.row(i + 1) {
                out.push(Cell::new(i, self.row(i)));
            }
        }
        out
    }

    pub fn with_cell(&self, a: Cell) -> Result<Partition> {
        if !self.addable_cells(None).contains(&a) {
            return Err(Error::NotAddable {
                row: a.row,
                col: a.col,
                partition: self.to_string(),
            });
        }
        let mut rows = self.rows.clone();
        if a.row == rows.len() + 1 {
            rows.push(1);
        } else {
            rows[a.row - 1] += 1;
        }
        Ok(Partition { rows })
    }

    pub fn without_cell(&self, r: Cell) -> Result<Partition> {
        if !self.removable_cells().contains(&r) {
            return Err(Error::NotRemovable {
                row: r.row,
                col: r.col,
                partition: self.to_string(),
            });
        }
        let mut rows = self.rows.clone();
        rows[r.row - 1] -= 1;
        if rows[r.row - 1] == 0 {
            rows.pop();
        }
        Ok(Partition { rows })
    }

    /// The skew `self \ sub` when it consists of a single cell.
    pub fn single_cell_diff(&self, sub: &Partition) -> Option<Cell> {
        if self.size() != sub.size() + 1 {
            return None;
        }
        let mut found = None;
        for i in 1..=self.num_rows() {
            match self.row(i).checked_sub(sub.row(i)) {
                Some(0) => {}
                Some(1) if found.is_none() => found = Some(Cell::new(i, self.row(i))),
                _ => return None,
            }
        }
        found
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows.is_empty() {
            return write!(f, "empty");
        }
        write!(f, "(")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

/// All partitions `λ ⊢ n` with `len(λ) ≤ max_rows` in descending
/// lexicographic order on rows. This fixed order is the global tie-break for
/// every basis enumeration downstream.
pub fn enumerate_partitions(n: usize, max_rows: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(remaining: usize, max_part: usize, rows_left: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { rows: current.clone() });
            return;
        }
        if rows_left == 0 {
            return;
        }
        let hi = remaining.min(max_part);
        // Largest first part first gives descending lexicographic output order.
        for part in (1..=hi).rev() {
            current.push(part);
            rec(remaining - part, part, rows_left - 1, current, out);
            current.pop();
        }
    }
    rec(n, n.max(1), max_rows, &mut current, &mut out);
    if n == 0 {
        return vec![Partition::empty()];
    }
    out
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Dimension `d_λ` of the symmetric-group irrep `λ`, by the hook-length
/// formula. Agrees with the root-to-λ path count in the Young lattice.
pub fn sym_dim(p: &Partition) -> BigUint {
    let mut denom = BigUint::one();
    for c in p.cells() {
        denom *= BigUint::from(p.hook_len(c));
    }
    factorial(p.size()) / denom
}

/// `d_λ` as `f64`; exact for the desk-scale diagrams used here.
pub fn sym_dim_f64(p: &Partition) -> f64 {
    sym_dim(p).to_f64().expect("sym_dim fits in f64")
}

/// Dimension `m_λ` of the `U(d)` irrep `λ` by the Weyl product formula.
/// Returns 0 when `len(λ) > d` (the representation does not exist); errors
/// are reserved for malformed inputs.
pub fn weyl_dim(p: &Partition, d: usize) -> BigUint {
    if p.num_rows() > d {
        return BigUint::zero();
    }
    let stair: Vec<i64> = (1..=d).map(|i| p.row(i) as i64).collect();
    weyl_dim_staircase(&stair)
}

/// Weyl dimension product for a general staircase (weakly decreasing integer
/// tuple, possibly with negative entries).
pub fn weyl_dim_staircase(stair: &[i64]) -> BigUint {
    let d = stair.len();
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..d {
        for j in (i + 1)..d {
            num *= BigInt::from(stair[i] - stair[j] + j as i64 - i as i64);
            den *= BigInt::from(j as i64 - i as i64);
        }
    }
    let q = num / den;
    assert!(!q.is_negative(), "staircase must be weakly decreasing");
    q.to_biguint().unwrap()
}

/// `m_λ` via the hook-content formula; used as a cross-check of [`weyl_dim`].
pub fn weyl_dim_hook_content(p: &Partition, d: usize) -> BigUint {
    if p.num_rows() > d {
        return BigUint::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for c in p.cells() {
        num *= BigInt::from(d as i64 + c.content());
        den *= BigInt::from(p.hook_len(c) as i64);
    }
    let q = num / den;
    q.to_biguint().expect("hook-content dimension is nonnegative")
}

/// `m_λ` as `f64`.
pub fn weyl_dim_f64(p: &Partition, d: usize) -> f64 {
    weyl_dim(p, d).to_f64().expect("weyl_dim fits in f64")
}

/// Branching ratio `d_{λ∪a} / (n · d_λ)` with `n = |λ| + 1`, computed by the
/// content product
/// `Π_{c∈RC(λ)}(cont(a)−cont(c)) / Π_{c∈AC(λ)\{a}}(cont(a)−cont(c))`.
/// The dimension-ratio form is kept separately as the test oracle.
pub fn branch_ratio(lambda: &Partition, a: Cell) -> Result<BigRational> {
    let addable = lambda.addable_cells(None);
    if !addable.contains(&a) {
        return Err(Error::NotAddable {
            row: a.row,
            col: a.col,
            partition: lambda.to_string(),
        });
    }
    let ca = a.content();
    let mut num = BigInt::one();
    for c in lambda.removable_cells() {
        num *= BigInt::from(ca - c.content());
    }
    let mut den = BigInt::one();
    for c in addable.iter().filter(|&&c| c != a) {
        den *= BigInt::from(ca - c.content());
    }
    let r = BigRational::new(num, den);
    debug_assert!(r.is_positive());
    Ok(r)
}

/// Branching ratio via irrep dimensions, `d_{λ∪a} / ((|λ|+1) · d_λ)`.
pub fn branch_ratio_dims(lambda: &Partition, a: Cell) -> Result<BigRational> {
    let mu = lambda.with_cell(a)?;
    let num = BigInt::from(sym_dim(&mu));
    let den = BigInt::from(lambda.size() as u64 + 1) * BigInt::from(sym_dim(lambda));
    Ok(BigRational::new(num, den))
}

/// Label of an irreducible representation of the partially transposed
/// permutation algebra on `n+1` qudits: either `(λ, empty)` with `λ ⊢ n−1`
/// and `len(λ) ≤ d`, or `(μ, box)` with `μ ⊢ n` and `len(μ) ≤ d−1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IrrepLabel {
    pub left: Partition,
    pub right: Partition,
    pub d: usize,
}

impl IrrepLabel {
    pub fn wedge(lambda: Partition, d: usize) -> Self {
        IrrepLabel { left: lambda, right: Partition::empty(), d }
    }

    pub fn boxed(mu: Partition, d: usize) -> Self {
        IrrepLabel { left: mu, right: Partition::single_box(), d }
    }

    pub fn is_boxed(&self) -> bool {
        !self.right.is_empty()
    }

    /// Check the length constraints for the algebra on `n+1` qudits.
    pub fn validate(&self, n: usize) -> Result<()> {
        let ok = if self.is_boxed() {
            self.right == Partition::single_box()
                && self.left.size() == n
                && self.left.num_rows() < self.d
        } else {
            self.left.size() + 1 == n && self.left.num_rows() <= self.d
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "irrep label {self} invalid for n={n}, d={}",
                self.d
            )))
        }
    }

    /// The length-`d` staircase labelling the same `U(d)` representation:
    /// `(λ_1,…,λ_d)` for `(λ, empty)` and `(μ_1,…,μ_{d−1},−1)` for `(μ, box)`.
    pub fn staircase(&self) -> Vec<i64> {
        let mut s: Vec<i64> = Vec::with_capacity(self.d);
        if self.is_boxed() {
            for i in 1..self.d {
                s.push(self.left.row(i) as i64);
            }
            s.push(-1);
        } else {
            for i in 1..=self.d {
                s.push(self.left.row(i) as i64);
            }
        }
        s
    }

    /// Multiplicity-space dimension `m_Λ` (Weyl formula on the staircase).
    pub fn weyl_dim(&self) -> BigUint {
        weyl_dim_staircase(&self.staircase())
    }

    pub fn weyl_dim_f64(&self) -> f64 {
        self.weyl_dim().to_f64().expect("weyl_dim fits in f64")
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_boxed() {
            write!(f, "({},box)", self.left)
        } else {
            write!(f, "({},empty)", self.left)
        }
    }
}

/// Exact rational → f64 helper used at the single point where exact
/// parameters become gate amplitudes.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    let num = r.numer().to_f64().expect("numerator fits in f64");
    let den = r.denom().to_f64().expect("denominator fits in f64");
    num / den
}
