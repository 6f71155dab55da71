use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::SubspaceBasis;
use crate::determinant::{diagonal_energy, for_each_connection, Determinant};
use crate::model::ElectronicIntegrals;

/// `P H P` on a determinant list, stored as CSR rows.
#[derive(Clone, Debug)]
pub struct ProjectedOperator {
    determinants: Vec<Determinant>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diagonal: Vec<f64>,
}

impl ProjectedOperator {
    pub fn dimension(&self) -> usize {
        self.determinants.len()
    }

    pub fn determinants(&self) -> &[Determinant] {
        &self.determinants
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries `(col, value)` of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        });
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dimension();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Projects `H` onto an arbitrary list of distinct determinants, visiting
/// only connected pairs found through a hash index.
pub fn project_determinants(dets: Vec<Determinant>, ints: &ElectronicIntegrals) -> ProjectedOperator {
    let index: HashMap<Determinant, usize> = dets.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let rows: Vec<(f64, Vec<(usize, f64)>)> = dets
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let diag = diagonal_energy(d, ints);
            let mut row = vec![(i, diag)];
            for_each_connection(d, ints, |other, v| {
                if let Some(&j) = index.get(&other) {
                    row.push((j, v));
                }
            });
            row.sort_unstable_by_key(|e| e.0);
            (diag, row)
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(dets.len() + 1);
    row_ptr.push(0);
    let nnz = rows.iter().map(|r| r.1.len()).sum();
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    let mut diagonal = Vec::with_capacity(dets.len());
    for (diag, row) in rows {
        diagonal.push(diag);
        for (j, v) in row {
            cols.push(j);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    ProjectedOperator {
        determinants: dets,
        row_ptr,
        cols,
        vals,
        diagonal,
    }
}

pub fn project_hamiltonian(basis: &SubspaceBasis, ints: &ElectronicIntegrals) -> ProjectedOperator {
    project_determinants(basis.determinants(), ints)
}
