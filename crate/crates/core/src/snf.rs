//! Integer matrices, Smith normal form, and linear systems over ℚ/ℤ.
//!
//! `smith_solve` decides `M·x = b` with `b ∈ (ℚ/ℤ)^m`. Because ℚ/ℤ is
//! divisible, the system is solvable iff every integer row combination `y`
//! with `yᵀM = 0` also has `yᵀb = 0`; when it is not, such a `y` is
//! returned as the certificate.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::qz::QZ;

#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<IntMatrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|row| row.iter().cloned().map(Into::into)).collect();
        Ok(IntMatrix { rows: r, cols: c, data })
    }

    pub fn diagonal<T: Into<BigInt> + Clone>(entries: &[T]) -> IntMatrix {
        let n = entries.len();
        let mut m = IntMatrix::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone().into();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `M·x` in ℚ/ℤ.
    pub fn apply_qz(&self, x: &[QZ]) -> Result<Vec<QZ>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, v)| v.scale_big(a)).sum())
            .collect())
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let r: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", r.join(", "))?;
        }
        write!(f, "]")
    }
}

/// `M = U·S·V` with `U`, `V` unimodular and `S` diagonal, `s₁ | s₂ | …`.
#[derive(Debug, Clone)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    /// `P` and `Q` with `P·M·Q = S` (so `P = U⁻¹`, `Q = V⁻¹`).
    pub p: IntMatrix,
    pub q: IntMatrix,
    pub rank: usize,
}

impl SmithDecomposition {
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.s.get(i, i).clone()).collect()
    }
}

struct SnfState {
    a: Vec<Vec<BigInt>>,
    p: Vec<Vec<BigInt>>,
    pinv: Vec<Vec<BigInt>>,
    q: Vec<Vec<BigInt>>,
    qinv: Vec<Vec<BigInt>>,
}

impl SnfState {
    // row_i -= k * row_t
    fn row_sub(&mut self, i: usize, t: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for mat in [&mut self.a, &mut self.p] {
            let (ri, rt) = two_rows(mat, i, t);
            for (x, y) in ri.iter_mut().zip(rt.iter()) {
                if !y.is_zero() {
                    *x -= k * y;
                }
            }
        }
        for row in self.pinv.iter_mut() {
            let add = k * &row[i];
            if !add.is_zero() {
                row[t] += add;
            }
        }
    }

    fn row_swap(&mut self, i: usize, t: usize) {
        if i == t {
            return;
        }
        self.a.swap(i, t);
        self.p.swap(i, t);
        for row in self.pinv.iter_mut() {
            row.swap(i, t);
        }
    }

    fn row_negate(&mut self, t: usize) {
        for x in self.a[t].iter_mut().chain(self.p[t].iter_mut()) {
            *x = -std::mem::take(x);
        }
        for row in self.pinv.iter_mut() {
            row[t] = -std::mem::take(&mut row[t]);
        }
    }

    // col_j -= k * col_t
    fn col_sub(&mut self, j: usize, t: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for mat in [&mut self.a, &mut self.q] {
            for row in mat.iter_mut() {
                let sub = k * &row[t];
                if !sub.is_zero() {
                    row[j] -= sub;
                }
            }
        }
        let (rt, rj) = two_rows(&mut self.qinv, t, j);
        for (x, y) in rt.iter_mut().zip(rj.iter()) {
            if !y.is_zero() {
                *x += k * y;
            }
        }
    }

    fn col_swap(&mut self, j: usize, t: usize) {
        if j == t {
            return;
        }
        for mat in [&mut self.a, &mut self.q] {
            for row in mat.iter_mut() {
                row.swap(j, t);
            }
        }
        self.qinv.swap(j, t);
    }
}

fn two_rows<T>(m: &mut [Vec<T>], i: usize, j: usize) -> (&mut Vec<T>, &mut Vec<T>) {
    assert_ne!(i, j);
    if i < j {
        let (lo, hi) = m.split_at_mut(j);
        (&mut lo[i], &mut hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(i);
        (&mut hi[0], &mut lo[j])
    }
}

fn to_rows(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows).map(|i| m.row(i).to_vec()).collect()
}

fn from_rows_vec(rows: Vec<Vec<BigInt>>, cols: usize) -> IntMatrix {
    let r = rows.len();
    IntMatrix { rows: r, cols, data: rows.into_iter().flatten().collect() }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithDecomposition {
    let (rows, cols) = (m.rows, m.cols);
    let mut st = SnfState {
        a: to_rows(m),
        p: to_rows(&IntMatrix::identity(rows)),
        pinv: to_rows(&IntMatrix::identity(rows)),
        q: to_rows(&IntMatrix::identity(cols)),
        qinv: to_rows(&IntMatrix::identity(cols)),
    };
    let mut rank = 0;
    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let v = &st.a[i][j];
                if !v.is_zero() && best.is_none_or(|(bi, bj)| v.abs() < st.a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        st.row_swap(bi, t);
        st.col_swap(bj, t);
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if st.a[i][t].is_zero() {
                    continue;
                }
                let k = st.a[i][t].div_floor(&st.a[t][t]);
                st.row_sub(i, t, &k);
                if !st.a[i][t].is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if st.a[t][j].is_zero() {
                    continue;
                }
                let k = st.a[t][j].div_floor(&st.a[t][t]);
                st.col_sub(j, t, &k);
                if !st.a[t][j].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                // bring the smallest remainder in row/column t to the pivot
                let mut best = (t, t);
                for i in t + 1..rows {
                    let v = &st.a[i][t];
                    if !v.is_zero() && v.abs() < st.a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    let v = &st.a[t][j];
                    if !v.is_zero() && v.abs() < st.a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                st.row_swap(best.0, t);
                st.col_swap(best.1, t);
                continue;
            }
            // divisibility condition on the trailing block
            let piv = st.a[t][t].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !st.a[i][j].is_multiple_of(&piv)));
            match bad {
                Some(i) => st.row_sub(t, i, &BigInt::from(-1)),
                None => break,
            }
        }
        if st.a[t][t].is_negative() {
            st.row_negate(t);
        }
        rank += 1;
    }
    SmithDecomposition {
        u: from_rows_vec(st.pinv, rows),
        s: from_rows_vec(st.a, cols),
        v: from_rows_vec(st.qinv, cols),
        p: from_rows_vec(st.p, rows),
        q: from_rows_vec(st.q, cols),
        rank,
    }
}

/// An integer combination `y` of the equations with `yᵀM = 0` and
/// `yᵀb = value ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub combination: Vec<(usize, BigInt)>,
    pub value: QZ,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(Vec<QZ>),
    Unsolvable(Certificate),
}

impl SolveOutcome {
    pub fn solution(self) -> Option<Vec<QZ>> {
        match self {
            SolveOutcome::Solved(x) => Some(x),
            SolveOutcome::Unsolvable(_) => None,
        }
    }
}

/// A sparse integer equation `Σ coef·x = rhs` over ℚ/ℤ.
#[derive(Debug, Clone, Default)]
pub struct SparseRow {
    pub coefs: BTreeMap<usize, BigInt>,
    pub rhs: QZ,
}

impl SparseRow {
    pub fn new(rhs: QZ) -> SparseRow {
        SparseRow { coefs: BTreeMap::new(), rhs }
    }

    pub fn add_term(&mut self, var: usize, coef: i64) {
        if coef == 0 {
            return;
        }
        let e = self.coefs.entry(var).or_insert_with(BigInt::zero);
        *e += coef;
        if e.is_zero() {
            self.coefs.remove(&var);
        }
    }
}

pub fn smith_solve(m: &IntMatrix, b: &[QZ]) -> Result<SolveOutcome> {
    if m.rows != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side has {} entries",
            m.rows,
            b.len()
        )));
    }
    let rows = (0..m.rows)
        .map(|i| {
            let coefs = m
                .row(i)
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(j, v)| (j, v.clone()))
                .collect();
            SparseRow { coefs, rhs: b[i] }
        })
        .collect();
    solve_sparse(m.cols, rows)
}

struct LiveRow {
    coefs: BTreeMap<usize, BigInt>,
    rhs: QZ,
    combo: BTreeMap<usize, BigInt>,
}

struct Elimination {
    var: usize,
    coef: BigInt,
    others: Vec<(usize, BigInt)>,
    rhs: QZ,
}

fn combo_to_vec(c: &BTreeMap<usize, BigInt>) -> Vec<(usize, BigInt)> {
    c.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (*k, v.clone())).collect()
}

fn axpy(dst: &mut BTreeMap<usize, BigInt>, k: &BigInt, src: &BTreeMap<usize, BigInt>) {
    for (j, v) in src {
        let e = dst.entry(*j).or_insert_with(BigInt::zero);
        *e += k * v;
        if e.is_zero() {
            dst.remove(j);
        }
    }
}

/// Solves a sparse system over ℚ/ℤ. Unit pivots are eliminated by
/// substitution first (a unimodular change of rows and variables), as are
/// variables occurring in a single equation (solved last, by division);
/// what remains goes through the dense Smith normal form.
///
/// Row combinations are only tracked on a second pass, once the system is
/// known to be unsolvable.
pub fn solve_sparse(nvars: usize, rows: Vec<SparseRow>) -> Result<SolveOutcome> {
    if let Some(bad) = rows.iter().flat_map(|r| r.coefs.keys()).find(|&&j| j >= nvars) {
        return Err(Error::DimensionMismatch(format!("variable {bad} out of range {nvars}")));
    }
    match solve_sparse_pass(nvars, rows.clone(), false)? {
        SolveOutcome::Solved(x) => Ok(SolveOutcome::Solved(x)),
        SolveOutcome::Unsolvable(_) => solve_sparse_pass(nvars, rows, true),
    }
}

fn solve_sparse_pass(nvars: usize, rows: Vec<SparseRow>, track: bool) -> Result<SolveOutcome> {
    let mut live: Vec<Option<LiveRow>> = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut combo = BTreeMap::new();
            if track {
                combo.insert(i, BigInt::one());
            }
            Some(LiveRow { coefs: r.coefs, rhs: r.rhs, combo })
        })
        .collect();
    let mut occurs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nvars];
    for (i, r) in live.iter().enumerate() {
        for j in r.as_ref().unwrap().coefs.keys() {
            occurs[*j].insert(i);
        }
    }
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = live
        .iter()
        .enumerate()
        .map(|(i, r)| Reverse((r.as_ref().unwrap().coefs.len(), i)))
        .collect();
    let mut elims: Vec<Elimination> = Vec::new();

    while let Some(Reverse((len, r))) = heap.pop() {
        let Some(row) = live[r].as_ref() else { continue };
        if row.coefs.len() != len {
            continue; // stale entry; a fresher one is queued
        }
        if row.coefs.is_empty() {
            let row = live[r].take().unwrap();
            if !row.rhs.is_zero() {
                return Ok(SolveOutcome::Unsolvable(Certificate {
                    combination: combo_to_vec(&row.combo),
                    value: row.rhs,
                }));
            }
            continue;
        }
        // unit coefficients, or variables that occur in this row only
        let pivot = row
            .coefs
            .iter()
            .filter(|(j, v)| v.abs().is_one() || occurs[**j].len() == 1)
            .map(|(j, _)| *j)
            .min_by_key(|j| (occurs[*j].len(), !row.coefs[j].abs().is_one()));
        let Some(var) = pivot else { continue };
        let row = live[r].take().unwrap();
        let coef = row.coefs[&var].clone();
        for j in row.coefs.keys() {
            occurs[*j].remove(&r);
        }
        let targets: Vec<usize> = occurs[var].iter().copied().collect();
        for i in targets {
            let other = live[i].as_mut().unwrap();
            // only reachable for unit pivots, where 1/coef = coef
            let k = -(&other.coefs[&var] * &coef);
            for j in row.coefs.keys() {
                if !other.coefs.contains_key(j) {
                    occurs[*j].insert(i);
                }
            }
            axpy(&mut other.coefs, &k, &row.coefs);
            for j in row.coefs.keys() {
                if !other.coefs.contains_key(j) {
                    occurs[*j].remove(&i);
                }
            }
            other.rhs += row.rhs.scale_big(&k);
            axpy(&mut other.combo, &k, &row.combo);
            heap.push(Reverse((other.coefs.len(), i)));
        }
        debug_assert!(occurs[var].is_empty());
        elims.push(Elimination {
            var,
            others: row.coefs.iter().filter(|(j, _)| **j != var).map(|(j, v)| (*j, v.clone())).collect(),
            coef,
            rhs: row.rhs,
        });
    }

    // dense remainder
    let rest: Vec<LiveRow> = live.into_iter().flatten().filter(|r| !r.coefs.is_empty() || !r.rhs.is_zero()).collect();
    let mut x = vec![QZ::ZERO; nvars];
    if !rest.is_empty() {
        let vars: Vec<usize> = rest
            .iter()
            .flat_map(|r| r.coefs.keys().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let col_of: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(c, v)| (*v, c)).collect();
        let mut dense = IntMatrix::zeros(rest.len(), vars.len());
        for (i, r) in rest.iter().enumerate() {
            for (j, v) in &r.coefs {
                dense.set(i, col_of[j], v.clone());
            }
        }
        let snf = smith_normal_form(&dense);
        // transformed right-hand side P·b
        let pb: Vec<QZ> = (0..rest.len())
            .map(|i| snf.p.row(i).iter().zip(&rest).map(|(k, r)| r.rhs.scale_big(k)).sum())
            .collect();
        if let Some(i) = (snf.rank..rest.len()).find(|&i| !pb[i].is_zero()) {
            let mut combo = BTreeMap::new();
            for (k, r) in snf.p.row(i).iter().zip(&rest) {
                axpy(&mut combo, k, &r.combo);
            }
            return Ok(SolveOutcome::Unsolvable(Certificate {
                combination: combo_to_vec(&combo),
                value: pb[i],
            }));
        }
        let mut y = vec![QZ::ZERO; vars.len()];
        for (i, yi) in y.iter_mut().enumerate().take(snf.rank) {
            *yi = pb[i].div_big(snf.s.get(i, i))?;
        }
        for (c, var) in vars.iter().enumerate() {
            x[*var] = snf.q.row(c).iter().zip(&y).map(|(k, v)| v.scale_big(k)).sum();
        }
    }
    for e in elims.iter().rev() {
        let acc: QZ = e.others.iter().map(|(j, k)| x[*j].scale_big(k)).sum();
        x[e.var] = (e.rhs - acc).div_big(&e.coef)?;
    }
    Ok(SolveOutcome::Solved(x))
}
