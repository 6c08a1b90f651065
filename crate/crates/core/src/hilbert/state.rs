use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use sprs::{CsMat, TriMat};

use super::layout::SpaceLayout;
use super::operator::{prune, same_layout, OperatorMatrix, HERMITIAN_TOL, PRUNE_TOL};
use crate::error::{Error, Result};

pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Imaginary parts of Hermitian expectation values below this are dropped.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-10;

/// Density matrix on a composite space, stored sparse.
#[derive(Debug, Clone)]
pub struct DensityState {
    layout: Arc<SpaceLayout>,
    matrix: CsMat<Complex64>,
}

impl DensityState {
    /// Checks unit trace and Hermiticity. Positivity is checked separately.
    pub fn new(layout: Arc<SpaceLayout>, matrix: CsMat<Complex64>) -> Result<Self> {
        let n = layout.dim();
        if matrix.shape() != (n, n) {
            return Err(Error::LayoutMismatch);
        }
        let state = DensityState { layout, matrix: prune(&matrix.to_csr()) };
        let tr = state.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::TraceNotUnit(tr.re));
        }
        let defect = state.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(state)
    }

    /// Skips validation; used by integrators that track drift themselves.
    pub(crate) fn from_parts(layout: Arc<SpaceLayout>, matrix: CsMat<Complex64>) -> Self {
        DensityState { layout, matrix }
    }

    pub fn from_dense(layout: Arc<SpaceLayout>, dense: &DMatrix<Complex64>) -> Result<Self> {
        let mut tri = TriMat::new((dense.nrows(), dense.ncols()));
        for c in 0..dense.ncols() {
            for r in 0..dense.nrows() {
                let v = dense[(r, c)];
                if v.norm() >= PRUNE_TOL {
                    tri.add_triplet(r, c, v);
                }
            }
        }
        Self::new(layout, tri.to_csr())
    }

    /// Projector onto basis state `index`.
    pub fn basis(layout: Arc<SpaceLayout>, index: usize) -> Result<Self> {
        let n = layout.dim();
        let mut tri = TriMat::new((n, n));
        tri.add_triplet(index, index, Complex64::new(1.0, 0.0));
        Self::new(layout, tri.to_csr())
    }

    /// `|psi><psi|` for a normalised ket.
    pub fn pure(layout: Arc<SpaceLayout>, ket: &[Complex64]) -> Result<Self> {
        let nz: Vec<(usize, Complex64)> =
            ket.iter().copied().enumerate().filter(|(_, v)| v.norm() >= PRUNE_TOL).collect();
        let n = layout.dim();
        let mut tri = TriMat::new((n, n));
        for &(r, a) in &nz {
            for &(c, b) in &nz {
                tri.add_triplet(r, c, a * b.conj());
            }
        }
        Self::new(layout, tri.to_csr())
    }

    /// Kronecker product of local density matrices, one per factor.
    pub fn product(layout: Arc<SpaceLayout>, locals: &[DMatrix<Complex64>]) -> Result<Self> {
        if locals.len() != layout.n_factors() {
            return Err(Error::LayoutMismatch);
        }
        let mut entries = vec![(0usize, 0usize, Complex64::new(1.0, 0.0))];
        for (f, local) in locals.iter().enumerate() {
            let d = layout.dims()[f];
            if local.nrows() != d || local.ncols() != d {
                return Err(Error::LocalDimension { factor: f, expected: d, found: local.nrows() });
            }
            let mut next = Vec::new();
            for &(r, c, v) in &entries {
                for i in 0..d {
                    for j in 0..d {
                        let w = local[(i, j)];
                        if w.norm() >= PRUNE_TOL {
                            next.push((r * d + i, c * d + j, v * w));
                        }
                    }
                }
            }
            entries = next;
        }
        let n = layout.dim();
        let mut tri = TriMat::new((n, n));
        for (r, c, v) in entries {
            tri.add_triplet(r, c, v);
        }
        Self::new(layout, tri.to_csr())
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn layout_arc(&self) -> &Arc<SpaceLayout> {
        &self.layout
    }

    pub fn matrix(&self) -> &CsMat<Complex64> {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix.get(row, col).copied().unwrap_or_default()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.diag().iter().map(|(_, v)| *v).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix
            .iter()
            .map(|(v, (r, c))| (*v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.layout.dim();
        let mut d = DMatrix::zeros(n, n);
        for (v, (r, c)) in self.matrix.iter() {
            d[(r, c)] = *v;
        }
        d
    }

    /// Smallest eigenvalue via a dense Hermitian eigensolve. Expensive.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.to_dense();
        let h = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check_positive(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    /// `Tr(rho O)`. For operators flagged Hermitian a negligible imaginary part is dropped.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<Complex64> {
        if !same_layout(&self.layout, op.layout_arc()) {
            return Err(Error::LayoutMismatch);
        }
        let value: Complex64 = if self.matrix.nnz() <= op.nnz() {
            self.matrix.iter().map(|(v, (r, c))| v * op.get(c, r)).sum()
        } else {
            op.entries().map(|(r, c, o)| o * self.get(c, r)).sum()
        };
        if op.is_hermitian() && value.im.abs() <= EXPECTATION_IMAG_TOL {
            return Ok(Complex64::new(value.re, 0.0));
        }
        Ok(value)
    }

    pub fn expectation_real(&self, op: &OperatorMatrix) -> Result<f64> {
        self.expectation(op).map(|z| z.re)
    }

    /// Reduced state on the factors listed in `keep` (order of the layout is preserved).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityState> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let sub = Arc::new(self.layout.sublayout(&keep)?);
        let traced: Vec<usize> = (0..self.layout.n_factors()).filter(|f| !keep.contains(f)).collect();
        let reduce = |i: usize| -> usize {
            keep.iter().enumerate().map(|(k, &f)| self.layout.digit(i, f) * sub.stride(k)).sum()
        };
        let n = sub.dim();
        let mut tri = TriMat::new((n, n));
        for (v, (r, c)) in self.matrix.iter() {
            if traced.iter().all(|&f| self.layout.digit(r, f) == self.layout.digit(c, f)) {
                tri.add_triplet(reduce(r), reduce(c), *v);
            }
        }
        Ok(DensityState { layout: sub, matrix: prune(&tri.to_csr()) })
    }
}

pub fn expectation(state: &DensityState, op: &OperatorMatrix) -> Result<Complex64> {
    state.expectation(op)
}

pub fn partial_trace(state: &DensityState, keep: &[usize]) -> Result<DensityState> {
    state.partial_trace(keep)
}
