//! Supermatrices over the super Laurent ring and the Berezinian.

use std::fmt;
use std::sync::Arc;

use super::scalar::{same_table, SuperScalar};
use super::vars::{Parity, VarTable};
use crate::error::{Error, Result};

/// A matrix whose rows and columns carry parities.
///
/// A matrix is *even* (grading preserving) when entry `(r, c)` has parity
/// `row_parity[r] + col_parity[c]`; transition matrices of bundles are even.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperMatrix {
    table: Arc<VarTable>,
    pub row_parity: Vec<Parity>,
    pub col_parity: Vec<Parity>,
    entries: Vec<SuperScalar>,
}

impl SuperMatrix {
    pub fn zeros(table: &Arc<VarTable>, row_parity: Vec<Parity>, col_parity: Vec<Parity>) -> Self {
        let n = row_parity.len() * col_parity.len();
        SuperMatrix { table: table.clone(), row_parity, col_parity, entries: vec![SuperScalar::zero(table); n] }
    }

    pub fn identity(table: &Arc<VarTable>, parity: Vec<Parity>) -> Self {
        let mut m = SuperMatrix::zeros(table, parity.clone(), parity);
        for i in 0..m.rows() {
            m.set(i, i, SuperScalar::one(table));
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(
        table: &Arc<VarTable>,
        row_parity: Vec<Parity>,
        col_parity: Vec<Parity>,
        rows: Vec<Vec<SuperScalar>>,
    ) -> Result<Self> {
        if rows.len() != row_parity.len() || rows.iter().any(|r| r.len() != col_parity.len()) {
            return Err(Error::DimensionMismatch("row data does not match parities".into()));
        }
        let entries: Vec<SuperScalar> = rows.into_iter().flatten().collect();
        if entries.iter().any(|e| !same_table(e.table(), table)) {
            return Err(Error::IncompatibleTables("matrix entry over a foreign table".into()));
        }
        Ok(SuperMatrix { table: table.clone(), row_parity, col_parity, entries })
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    pub fn rows(&self) -> usize {
        self.row_parity.len()
    }

    pub fn cols(&self) -> usize {
        self.col_parity.len()
    }

    pub fn get(&self, r: usize, c: usize) -> &SuperScalar {
        &self.entries[r * self.cols() + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: SuperScalar) {
        let k = r * self.cols() + c;
        self.entries[k] = v;
    }

    pub fn entries(&self) -> &[SuperScalar] {
        &self.entries
    }

    /// Checks that every entry has the parity its row and column demand.
    pub fn is_even(&self) -> bool {
        (0..self.rows()).all(|r| {
            (0..self.cols()).all(|c| self.get(r, c).has_parity(self.row_parity[r] + self.col_parity[c]))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(SuperScalar::is_zero)
    }

    pub fn map<F: Fn(&SuperScalar) -> Result<SuperScalar>>(&self, f: F) -> Result<SuperMatrix> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        let table = entries.first().map(|e| e.table().clone()).unwrap_or_else(|| self.table.clone());
        Ok(SuperMatrix { table, row_parity: self.row_parity.clone(), col_parity: self.col_parity.clone(), entries })
    }

    pub fn mul(&self, o: &SuperMatrix) -> Result<SuperMatrix> {
        if self.cols() != o.rows() {
            return Err(Error::DimensionMismatch(format!("{}x{} times {}x{}", self.rows(), self.cols(), o.rows(), o.cols())));
        }
        let mut out = SuperMatrix::zeros(&self.table, self.row_parity.clone(), o.col_parity.clone());
        for r in 0..self.rows() {
            for c in 0..o.cols() {
                let mut acc = SuperScalar::zero(&self.table);
                for k in 0..self.cols() {
                    let a = self.get(r, k);
                    let b = o.get(k, c);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &a.try_mul(b)?;
                    }
                }
                out.set(r, c, acc);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, o: &SuperMatrix) -> Result<SuperMatrix> {
        if self.rows() != o.rows() || self.cols() != o.cols() {
            return Err(Error::DimensionMismatch("matrix difference".into()));
        }
        let entries = self.entries.iter().zip(&o.entries).map(|(a, b)| a.try_sub(b)).collect::<Result<Vec<_>>>()?;
        Ok(SuperMatrix { table: self.table.clone(), row_parity: self.row_parity.clone(), col_parity: self.col_parity.clone(), entries })
    }

    pub fn add(&self, o: &SuperMatrix) -> Result<SuperMatrix> {
        if self.rows() != o.rows() || self.cols() != o.cols() {
            return Err(Error::DimensionMismatch("matrix sum".into()));
        }
        let entries = self.entries.iter().zip(&o.entries).map(|(a, b)| a.try_add(b)).collect::<Result<Vec<_>>>()?;
        Ok(SuperMatrix { table: self.table.clone(), row_parity: self.row_parity.clone(), col_parity: self.col_parity.clone(), entries })
    }

    pub fn scale(&self, s: &SuperScalar) -> SuperMatrix {
        SuperMatrix {
            table: self.table.clone(),
            row_parity: self.row_parity.clone(),
            col_parity: self.col_parity.clone(),
            entries: self.entries.iter().map(|e| s * e).collect(),
        }
    }

    /// Sub-matrix on the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> SuperMatrix {
        let mut out = SuperMatrix::zeros(
            &self.table,
            rows.iter().map(|&r| self.row_parity[r]).collect(),
            cols.iter().map(|&c| self.col_parity[c]).collect(),
        );
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.get(r, c).clone());
            }
        }
        out
    }

    /// Body of the matrix with every odd variable set to zero.
    pub fn reduced(&self) -> SuperMatrix {
        SuperMatrix {
            table: self.table.clone(),
            row_parity: self.row_parity.clone(),
            col_parity: self.col_parity.clone(),
            entries: self.entries.iter().map(SuperScalar::reduced).collect(),
        }
    }

    fn even_first(parities: &[Parity]) -> (Vec<usize>, Vec<usize>) {
        let evens = (0..parities.len()).filter(|&i| parities[i] == Parity::Even).collect();
        let odds = (0..parities.len()).filter(|&i| parities[i] == Parity::Odd).collect();
        (evens, odds)
    }

    fn check_square_even(&self) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>)> {
        let (re, ro) = Self::even_first(&self.row_parity);
        let (ce, co) = Self::even_first(&self.col_parity);
        if re.len() != ce.len() || ro.len() != co.len() {
            return Err(Error::DimensionMismatch(format!(
                "rows are {}|{} but columns are {}|{}",
                re.len(),
                ro.len(),
                ce.len(),
                co.len()
            )));
        }
        if !self.is_even() {
            return Err(Error::ParityMismatch("supermatrix is not even".into()));
        }
        Ok((re, ro, ce, co))
    }

    /// Berezinian `det(A − B D⁻¹ C) · det(D)⁻¹` with rows and columns taken
    /// even-first in their stored order.
    pub fn berezinian(&self) -> Result<SuperScalar> {
        let (re, ro, ce, co) = self.check_square_even()?;
        let a = self.select(&re, &ce);
        let b = self.select(&re, &co);
        let c = self.select(&ro, &ce);
        let d = self.select(&ro, &co);
        let d_inv = even_inverse(&d).map_err(|_| Error::BerezinianUndefined)?;
        let det_d = even_det(&d);
        let schur = a.sub(&b.mul(&d_inv)?.mul(&c)?)?;
        let inv_det_d = det_d.invert().map_err(|_| Error::BerezinianUndefined)?;
        Ok(&even_det(&schur) * &inv_det_d)
    }

    /// Two-sided inverse of an even supermatrix.
    ///
    /// Starts from the exact inverse of the block-diagonal part and refines by
    /// Newton steps `X ← X(2 − MX)`; the error lies in the nilpotent ideal and
    /// squares at every step, so the loop terminates.
    pub fn inverse(&self) -> Result<SuperMatrix> {
        let (re, ro, ce, co) = self.check_square_even()?;
        let a = self.select(&re, &ce);
        let d = self.select(&ro, &co);
        let a_inv = even_inverse(&a)?;
        let d_inv = even_inverse(&d)?;
        // X0 maps row space back: X0[c][r] placed at original indices.
        let mut x = SuperMatrix::zeros(&self.table, self.col_parity.clone(), self.row_parity.clone());
        for (i, &cj) in ce.iter().enumerate() {
            for (j, &ri) in re.iter().enumerate() {
                x.set(cj, ri, a_inv.get(i, j).clone());
            }
        }
        for (i, &cj) in co.iter().enumerate() {
            for (j, &ri) in ro.iter().enumerate() {
                x.set(cj, ri, d_inv.get(i, j).clone());
            }
        }
        let id_rows = SuperMatrix::identity(&self.table, self.row_parity.clone());
        for _ in 0..=(2 * self.table.n_odd() + 1) {
            let err = id_rows.sub(&self.mul(&x)?)?;
            if err.is_zero() {
                return Ok(x);
            }
            x = x.add(&x.mul(&err)?)?;
        }
        let err = id_rows.sub(&self.mul(&x)?)?;
        if err.is_zero() {
            Ok(x)
        } else {
            Err(Error::NotInvertible("Newton refinement of the inverse did not terminate".into()))
        }
    }
}

/// Determinant of a matrix with pairwise commuting (even) entries.
pub(crate) fn even_det(m: &SuperMatrix) -> SuperScalar {
    let n = m.rows();
    if n == 0 {
        return SuperScalar::one(m.table());
    }
    if n == 1 {
        return m.get(0, 0).clone();
    }
    // Laplace expansion along the first row.
    let mut acc = SuperScalar::zero(m.table());
    let cols: Vec<usize> = (0..n).collect();
    let rows: Vec<usize> = (1..n).collect();
    for j in 0..n {
        let e = m.get(0, j);
        if e.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&c| c != j).collect();
        let minor = even_det(&m.select(&rows, &rest));
        let term = e * &minor;
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Inverse of a square matrix with even entries via the adjugate.
pub(crate) fn even_inverse(m: &SuperMatrix) -> Result<SuperMatrix> {
    let n = m.rows();
    let det = even_det(m);
    let inv_det = det.invert()?;
    let mut out = SuperMatrix::zeros(m.table(), m.col_parity.clone(), m.row_parity.clone());
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let cof = even_det(&m.select(&rows, &cols));
            let cof = if (i + j) % 2 == 0 { cof } else { -cof };
            out.set(i, j, &cof * &inv_det);
        }
    }
    Ok(out)
}

impl fmt::Display for SuperMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows() {
            let row: Vec<String> = (0..self.cols()).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalgebra::parse::parse_scalar;

    fn t() -> Arc<VarTable> {
        VarTable::from_lists(&["z", "w"], &["a", "b"]).unwrap()
    }

    fn s(x: &str) -> SuperScalar {
        parse_scalar(x, &t()).unwrap()
    }

    #[test]
    fn berezinian_of_diagonal_one_one() {
        let m = SuperMatrix::from_rows(
            &t(),
            vec![Parity::Even, Parity::Odd],
            vec![Parity::Even, Parity::Odd],
            vec![vec![s("z"), s("0")], vec![s("0"), s("w")]],
        )
        .unwrap();
        assert_eq!(m.berezinian().unwrap(), s("z/w"));
    }

    #[test]
    fn berezinian_with_odd_blocks() {
        // [[z, a], [b, w]] : Ber = (z - a w^-1 b) / w
        let m = SuperMatrix::from_rows(
            &t(),
            vec![Parity::Even, Parity::Odd],
            vec![Parity::Even, Parity::Odd],
            vec![vec![s("z"), s("a")], vec![s("b"), s("w")]],
        )
        .unwrap();
        assert_eq!(m.berezinian().unwrap(), s("z/w - a*b/w^2"));
    }

    #[test]
    fn undefined_when_odd_block_singular() {
        let m = SuperMatrix::from_rows(
            &t(),
            vec![Parity::Even, Parity::Odd],
            vec![Parity::Even, Parity::Odd],
            vec![vec![s("z"), s("a")], vec![s("b"), s("1 + w")]],
        )
        .unwrap();
        assert_eq!(m.berezinian(), Err(Error::BerezinianUndefined));
    }

    #[test]
    fn inverse_of_mixed_matrix() {
        let m = SuperMatrix::from_rows(
            &t(),
            vec![Parity::Even, Parity::Odd, Parity::Odd],
            vec![Parity::Even, Parity::Odd, Parity::Odd],
            vec![
                vec![s("z + a*b"), s("a"), s("b")],
                vec![s("b"), s("w"), s("0")],
                vec![s("a*z"), s("1"), s("1 + a*b")],
            ],
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        let id = SuperMatrix::identity(&t(), m.row_parity.clone());
        assert_eq!(m.mul(&inv).unwrap(), id);
        assert_eq!(inv.mul(&m).unwrap(), id);
    }

    #[test]
    fn determinant_three_by_three() {
        let m = SuperMatrix::from_rows(
            &t(),
            vec![Parity::Even; 3],
            vec![Parity::Even; 3],
            vec![
                vec![s("1"), s("0"), s("i")],
                vec![s("0"), s("i"), s("0")],
                vec![s("1"), s("0"), s("-i")],
            ],
        )
        .unwrap();
        // i * (1*(-i) - i*1) = i * (-2i) = 2
        assert_eq!(even_det(&m), s("2"));
    }
}
