use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use sprs::{CsMat, TriMat};

use super::layout::{Factor, SpaceLayout};
use crate::error::{Error, Result};

/// Entries below this magnitude are treated as structural zeros.
pub const PRUNE_TOL: f64 = 1e-15;
/// Tolerance on `max |M - M^dagger|` for matrices flagged Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Sparse complex operator on a composite space.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    layout: Arc<SpaceLayout>,
    matrix: CsMat<Complex64>,
    hermitian: bool,
}

pub(crate) fn prune(m: &CsMat<Complex64>) -> CsMat<Complex64> {
    let mut tri = TriMat::new(m.shape());
    for (v, (r, c)) in m.iter() {
        if v.norm() >= PRUNE_TOL {
            tri.add_triplet(r, c, *v);
        }
    }
    tri.to_csr()
}

pub(crate) fn same_layout(a: &Arc<SpaceLayout>, b: &Arc<SpaceLayout>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

fn adjoint_csr(m: &CsMat<Complex64>) -> CsMat<Complex64> {
    m.transpose_view().map(|x| x.conj()).to_csr()
}

fn max_abs_diff(a: &CsMat<Complex64>, b: &CsMat<Complex64>) -> f64 {
    let d = a - b;
    d.iter().map(|(v, _)| v.norm()).fold(0.0, f64::max)
}

impl OperatorMatrix {
    pub fn from_csr(layout: Arc<SpaceLayout>, matrix: CsMat<Complex64>, hermitian: bool) -> Result<Self> {
        let n = layout.dim();
        if matrix.shape() != (n, n) {
            return Err(Error::LayoutMismatch);
        }
        let matrix = prune(&matrix.to_csr());
        if hermitian {
            let defect = max_abs_diff(&matrix, &adjoint_csr(&matrix));
            if defect > HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect));
            }
        }
        Ok(OperatorMatrix { layout, matrix, hermitian })
    }

    pub fn from_triplets<I>(layout: Arc<SpaceLayout>, entries: I, hermitian: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let n = layout.dim();
        let mut tri = TriMat::new((n, n));
        for (r, c, v) in entries {
            if r >= n || c >= n {
                return Err(Error::LayoutMismatch);
            }
            tri.add_triplet(r, c, v);
        }
        Self::from_csr(layout, tri.to_csr(), hermitian)
    }

    pub fn identity(layout: Arc<SpaceLayout>) -> Self {
        let n = layout.dim();
        OperatorMatrix { layout, matrix: CsMat::eye(n), hermitian: true }
    }

    pub fn zeros(layout: Arc<SpaceLayout>) -> Self {
        let n = layout.dim();
        OperatorMatrix { layout, matrix: CsMat::zero((n, n)), hermitian: true }
    }

    /// Real diagonal operator with entries `f(index)`.
    pub fn real_diagonal(layout: Arc<SpaceLayout>, f: impl Fn(usize) -> f64) -> Self {
        let n = layout.dim();
        let mut tri = TriMat::new((n, n));
        for i in 0..n {
            let v = f(i);
            if v.abs() >= PRUNE_TOL {
                tri.add_triplet(i, i, Complex64::new(v, 0.0));
            }
        }
        OperatorMatrix { layout, matrix: tri.to_csr(), hermitian: true }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn layout_arc(&self) -> &Arc<SpaceLayout> {
        &self.layout
    }

    pub fn csr(&self) -> &CsMat<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix.get(row, col).copied().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.matrix.iter().map(|(v, (r, c))| (r, c, *v))
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            layout: self.layout.clone(),
            matrix: adjoint_csr(&self.matrix),
            hermitian: self.hermitian,
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.matrix, &adjoint_csr(&self.matrix))
    }

    /// Set the Hermitian flag after checking the matrix actually is.
    pub fn into_hermitian(self) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(OperatorMatrix { hermitian: true, ..self })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let hermitian = self.hermitian && factor.im == 0.0;
        let matrix = prune(&self.matrix.map(|x| x * factor));
        OperatorMatrix { layout: self.layout.clone(), matrix, hermitian }
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|(v, _)| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entry magnitude among entries whose row and column pass `keep`.
    pub fn max_abs_where(&self, keep: impl Fn(usize) -> bool) -> f64 {
        self.matrix
            .iter()
            .filter(|(_, (r, c))| keep(*r) && keep(*c))
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim());
        let mut out = vec![Complex64::default(); self.dim()];
        for (row, vec) in self.matrix.outer_iterator().enumerate() {
            out[row] = vec.iter().map(|(c, x)| x * v[c]).sum();
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut d = DMatrix::zeros(n, n);
        for (v, (r, c)) in self.matrix.iter() {
            d[(r, c)] = *v;
        }
        d
    }

    fn check_layout(&self, other: &Self) {
        assert!(
            same_layout(&self.layout, &other.layout),
            "operator algebra across different layouts"
        );
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.check_layout(rhs);
        OperatorMatrix {
            layout: self.layout.clone(),
            matrix: prune(&(&self.matrix + &rhs.matrix)),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.check_layout(rhs);
        OperatorMatrix {
            layout: self.layout.clone(),
            matrix: prune(&(&self.matrix - &rhs.matrix)),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.check_layout(rhs);
        OperatorMatrix {
            layout: self.layout.clone(),
            matrix: prune(&(&self.matrix * &rhs.matrix)),
            hermitian: false,
        }
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: f64) -> OperatorMatrix {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    &(a * b) - &(b * a)
}

pub fn anticommutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    &(a * b) + &(b * a)
}

/// Lift a local operator on factor `factor_index` to the full space (identity elsewhere).
pub fn embed(local: &DMatrix<Complex64>, factor_index: usize, layout: &Arc<SpaceLayout>) -> Result<OperatorMatrix> {
    let factor_dim = layout.factor(factor_index)?.dim();
    if local.nrows() != factor_dim || local.ncols() != factor_dim {
        return Err(Error::LocalDimension {
            factor: factor_index,
            expected: factor_dim,
            found: local.nrows(),
        });
    }
    let stride = layout.stride(factor_index);
    let local_nz: Vec<(usize, usize, Complex64)> = (0..factor_dim)
        .flat_map(|r| (0..factor_dim).map(move |c| (r, c)))
        .map(|(r, c)| (r, c, local[(r, c)]))
        .filter(|(_, _, v)| v.norm() >= PRUNE_TOL)
        .collect();
    let hermitian = (local - local.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max) <= HERMITIAN_TOL;

    let n = layout.dim();
    let mut tri = TriMat::with_capacity((n, n), n / factor_dim * local_nz.len());
    for col in 0..n {
        let digit = layout.digit(col, factor_index);
        let base = col - digit * stride;
        for &(r, c, v) in &local_nz {
            if c == digit {
                tri.add_triplet(base + r * stride, col, v);
            }
        }
    }
    Ok(OperatorMatrix { layout: layout.clone(), matrix: tri.to_csr(), hermitian })
}

/// Load energy `W = sum n E_v |n><n|` and lowering operator `A = sum |n-1><n|` on a ladder factor.
///
/// `A` is truncated: the transition out of `|n_min>` is dropped.
pub fn ladder_ops(layout: &Arc<SpaceLayout>, factor_index: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (n_min, quantum) = match layout.factor(factor_index)? {
        Factor::Ladder { n_min, quantum, .. } => (n_min, quantum),
        _ => return Err(Error::NotALadder(factor_index)),
    };
    let d = layout.dims()[factor_index];
    let energy = DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            Complex64::new((n_min + r as i64) as f64 * quantum, 0.0)
        } else {
            Complex64::default()
        }
    });
    let lowering = DMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    });
    Ok((embed(&energy, factor_index, layout)?, embed(&lowering, factor_index, layout)?))
}

/// Annihilation operator `a` and number operator `a^dagger a` on a Fock factor.
pub fn fock_ops(layout: &Arc<SpaceLayout>, factor_index: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if !matches!(layout.factor(factor_index)?, Factor::FockOscillator { .. }) {
        return Err(Error::NotAnOscillator(factor_index));
    }
    let d = layout.dims()[factor_index];
    let a = DMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            Complex64::default()
        }
    });
    let n = DMatrix::from_fn(d, d, |r, c| if r == c { Complex64::new(r as f64, 0.0) } else { Complex64::default() });
    Ok((embed(&a, factor_index, layout)?, embed(&n, factor_index, layout)?))
}

/// Single-qubit matrices in the (excited, ground) basis.
pub mod pauli {
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn m(entries: [[Complex64; 2]; 2]) -> DMatrix<Complex64> {
        DMatrix::from_fn(2, 2, |r, c| entries[r][c])
    }

    const O: Complex64 = Complex64::new(0.0, 0.0);
    const ONE: Complex64 = Complex64::new(1.0, 0.0);
    const I: Complex64 = Complex64::new(0.0, 1.0);

    pub fn identity() -> DMatrix<Complex64> {
        m([[ONE, O], [O, ONE]])
    }

    pub fn sigma_x() -> DMatrix<Complex64> {
        m([[O, ONE], [ONE, O]])
    }

    pub fn sigma_y() -> DMatrix<Complex64> {
        m([[O, -I], [I, O]])
    }

    pub fn sigma_z() -> DMatrix<Complex64> {
        m([[ONE, O], [O, -ONE]])
    }

    /// Raising operator, ground -> excited.
    pub fn sigma_plus() -> DMatrix<Complex64> {
        m([[O, ONE], [O, O]])
    }

    pub fn sigma_minus() -> DMatrix<Complex64> {
        m([[O, O], [ONE, O]])
    }

    /// Thermal state `exp(-x sigma^z / 2) / Z` with `x = beta * E`.
    pub fn thermal(x: f64) -> DMatrix<Complex64> {
        let excited = 1.0 / (1.0 + x.exp());
        m([[Complex64::new(excited, 0.0), O], [O, Complex64::new(1.0 - excited, 0.0)]])
    }

    /// Diagonal qubit state with the given sigma^z expectation.
    pub fn with_bias(z: f64) -> DMatrix<Complex64> {
        m([
            [Complex64::new((1.0 + z) / 2.0, 0.0), O],
            [O, Complex64::new((1.0 - z) / 2.0, 0.0)],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::layout::build_space;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn two_qubits() -> Arc<SpaceLayout> {
        Arc::new(build_space(&[Factor::Qubit, Factor::Qubit]).unwrap())
    }

    #[test]
    fn sigma_z_on_first_qubit() {
        let l = two_qubits();
        let z0 = embed(&pauli::sigma_z(), 0, &l).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| z0.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        assert!(z0.is_hermitian());
    }

    #[test]
    fn identity_embeds_to_identity() {
        let l = Arc::new(build_space(&[Factor::Qubit, Factor::ladder(-2, 2, 1.0)]).unwrap());
        for f in 0..2 {
            let d = l.dims()[f];
            let id = embed(&DMatrix::identity(d, d), f, &l).unwrap();
            assert_eq!((&id - &OperatorMatrix::identity(l.clone())).max_abs(), 0.0);
        }
    }

    #[test]
    fn raising_second_qubit() {
        // |00> (both ground) is index 3; |01> (second excited) is index 2.
        let l = two_qubits();
        let sp1 = embed(&pauli::sigma_plus(), 1, &l).unwrap();
        let mut ket = vec![Complex64::default(); 4];
        ket[3] = c(1.0);
        let out = sp1.apply(&ket);
        assert_eq!(out, vec![c(0.0), c(0.0), c(1.0), c(0.0)]);
    }

    #[test]
    fn embed_rejects_bad_input() {
        let l = two_qubits();
        assert!(matches!(embed(&pauli::sigma_z(), 2, &l), Err(Error::FactorIndex { .. })));
        assert!(matches!(
            embed(&DMatrix::identity(3, 3), 0, &l),
            Err(Error::LocalDimension { .. })
        ));
    }

    #[test]
    fn ladder_definitions() {
        let l = Arc::new(build_space(&[Factor::ladder(-1, 1, 1.0)]).unwrap());
        let (w, a) = ladder_ops(&l, 0).unwrap();
        let diag: Vec<f64> = (0..3).map(|i| w.get(i, i).re).collect();
        assert_eq!(diag, vec![-1.0, 0.0, 1.0]);
        // A|0> = |-1>, A|n_min> = 0
        assert_eq!(a.apply(&[c(0.0), c(1.0), c(0.0)]), vec![c(1.0), c(0.0), c(0.0)]);
        assert_eq!(a.apply(&[c(1.0), c(0.0), c(0.0)]), vec![c(0.0); 3]);
    }

    #[test]
    fn lowering_product_misses_only_the_bottom_rung() {
        // oracle: explicit dense product
        let l = Arc::new(build_space(&[Factor::Qubit, Factor::ladder(-3, 4, 1.0)]).unwrap());
        let (_, a) = ladder_ops(&l, 1).unwrap();
        let dense = a.to_dense();
        let prod = dense.adjoint() * &dense;
        for i in 0..l.dim() {
            for j in 0..l.dim() {
                let expected = if i == j && l.digit(i, 1) != 0 { 1.0 } else { 0.0 };
                assert_eq!(prod[(i, j)], c(expected));
            }
        }
        assert!(matches!(ladder_ops(&l, 0), Err(Error::NotALadder(0))));
    }

    #[test]
    fn ladder_commutator_on_interior() {
        let e_v = 0.7;
        let l = Arc::new(build_space(&[Factor::Qubit, Factor::ladder(-4, 4, e_v)]).unwrap());
        let (w, a) = ladder_ops(&l, 1).unwrap();
        let lhs = commutator(&w, &a);
        let rhs = a.scale(c(-e_v));
        let interior = |i: usize| {
            let d = l.digit(i, 1);
            d != 0 && d != 8
        };
        assert!((&lhs - &rhs).max_abs_where(interior) <= 1e-12);
    }

    #[test]
    fn pauli_algebra() {
        let sp = pauli::sigma_plus();
        let sm = pauli::sigma_minus();
        let i = Complex64::new(0.0, 1.0);
        assert_eq!((pauli::sigma_x() + pauli::sigma_y() * i) * c(0.5), sp);
        assert_eq!(&sp * &sm - &sm * &sp, pauli::sigma_z());
        let t = pauli::thermal(3.0);
        let z = (t * pauli::sigma_z()).trace().re;
        assert!((z + (1.5f64).tanh()).abs() < 1e-15);
    }

    #[test]
    fn fock_number_operator() {
        let l = Arc::new(build_space(&[Factor::FockOscillator { n_max: 5, frequency: 1.0 }]).unwrap());
        let (a, n) = fock_ops(&l, 0).unwrap();
        let ad_a = &a.adjoint() * &a;
        assert!((&ad_a - &n).max_abs() < 1e-14);
    }
}
