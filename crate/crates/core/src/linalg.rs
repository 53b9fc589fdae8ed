//! Dense complex matrices: Hermitian and unitary predicates, spectral
//! decomposition with eigenvalue clustering, and deterministic eigenbases.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. The eigen-solver is
//! nalgebra's Hermitian (`symmetric_eigen`) routine; everything built on top
//! of it (clustering, projector assembly, basis selection) lives here.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{NogpError, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Default Hermiticity tolerance for [`Observable`] construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on the orthonormality and range checks of a basis partition.
pub const BASIS_TOL: f64 = 1e-10;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max_abs(a - b)` without allocating.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut r = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

/// `max_abs(U^dagger U - I)`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.ncols()))
}

/// Unitary factor `W` of the polar decomposition `M = W P`, the unitary
/// closest to `M`.
pub fn unitary_polar(m: &ComplexMatrix) -> ComplexMatrix {
    let svd = m.clone().svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

/// True iff `max_abs(U^dagger U - I) <= tol`.
pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    u.is_square() && unitarity_residual(u) <= tol
}

/// Spectral (operator 2-) norm of a Hermitian matrix.
fn hermitian_norm(m: &ComplexMatrix) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, l| acc.max(l.abs()))
}

/// A self-adjoint matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable(ComplexMatrix);

impl Observable {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, HERMITIAN_TOL)
    }

    /// Validates with a custom Hermiticity tolerance, then symmetrizes.
    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(NogpError::EmptyMatrix);
        }
        if !m.is_square() {
            return Err(NogpError::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NogpError::NonFinite);
        }
        let residual = hermiticity_residual(&m);
        if residual > tol {
            return Err(NogpError::NonHermitianInput { residual, tol });
        }
        let sym = (&m + m.adjoint()).scale(0.5);
        Ok(Self(sym))
    }

    /// Real diagonal observable.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(values.len(), values.iter().map(|&x| c(x, 0.0)));
        Self::new(ComplexMatrix::from_diagonal(&v))
    }

    pub fn zeros(d: usize) -> Self {
        Self(ComplexMatrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }
}

impl AsRef<ComplexMatrix> for Observable {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Orthonormal basis of the full space whose columns are grouped into
/// consecutive blocks of sizes `[d_1, ..., d_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasisPartition {
    vectors: ComplexMatrix,
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl EigenBasisPartition {
    pub fn new(vectors: ComplexMatrix, sizes: Vec<usize>) -> Result<Self> {
        let d = vectors.nrows();
        if d == 0 {
            return Err(NogpError::EmptyMatrix);
        }
        if vectors.ncols() != d {
            return Err(NogpError::DimensionMismatch {
                expected: d,
                found: vectors.ncols(),
            });
        }
        let total: usize = sizes.iter().sum();
        if total != d || sizes.contains(&0) {
            return Err(NogpError::InvalidParameter(format!(
                "block sizes {sizes:?} do not partition dimension {d}"
            )));
        }
        let residual = unitarity_residual(&vectors);
        if residual > BASIS_TOL {
            return Err(NogpError::NotUnitary {
                residual,
                tol: BASIS_TOL,
            });
        }
        let offsets = sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        Ok(Self {
            vectors,
            sizes,
            offsets,
        })
    }

    /// Standard basis with the given block sizes.
    pub fn standard(sizes: Vec<usize>) -> Result<Self> {
        let d = sizes.iter().sum();
        Self::new(identity(d), sizes)
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// All basis columns, block after block.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j] + self.sizes[j]
    }

    /// Column index of basis vector `k` of block `j`.
    pub fn column_index(&self, j: usize, k: usize) -> usize {
        assert!(k < self.sizes[j], "vector index out of block");
        self.offsets[j] + k
    }

    /// The `d x d_j` matrix of block `j`'s basis columns.
    pub fn block(&self, j: usize) -> ComplexMatrix {
        self.vectors
            .columns(self.offsets[j], self.sizes[j])
            .into_owned()
    }

    /// Block index of every column.
    pub fn block_of_column(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(j, &s)| std::iter::repeat_n(j, s))
            .collect()
    }

    /// Expresses an operator in this basis: `B^dagger M B`.
    pub fn to_partition_basis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.vectors.adjoint() * m * &self.vectors
    }

    /// Inverse of [`Self::to_partition_basis`].
    pub fn from_partition_basis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &self.vectors * m * self.vectors.adjoint()
    }

    /// Largest off-block entry of `m` given in partition coordinates.
    pub fn off_block_max(&self, m: &ComplexMatrix) -> f64 {
        let owner = self.block_of_column();
        let mut r = 0.0_f64;
        for (i, bi) in owner.iter().enumerate() {
            for (k, bk) in owner.iter().enumerate() {
                if bi != bk {
                    r = r.max(m[(i, k)].norm());
                }
            }
        }
        r
    }

    /// Zeroes every off-block entry of `m` given in partition coordinates.
    pub fn block_diagonal_part(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let owner = self.block_of_column();
        let mut out = m.clone();
        for (i, bi) in owner.iter().enumerate() {
            for (k, bk) in owner.iter().enumerate() {
                if bi != bk {
                    out[(i, k)] = C64::new(0.0, 0.0);
                }
            }
        }
        out
    }

    /// Assembles `sum_j B_j M_j B_j^dagger` from per-block `d_j x d_j` matrices.
    pub fn assemble_blocks(&self, blocks: &[ComplexMatrix]) -> ComplexMatrix {
        assert_eq!(blocks.len(), self.num_blocks());
        let d = self.dim();
        let mut inner = ComplexMatrix::zeros(d, d);
        for (j, g) in blocks.iter().enumerate() {
            let r = self.block_range(j);
            inner
                .view_mut((r.start, r.start), (r.len(), r.len()))
                .copy_from(g);
        }
        self.from_partition_basis(&inner)
    }
}

/// `X = sum_j lambda_j E_j` with an orthonormal basis adapted to the `E_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projections: Vec<ComplexMatrix>,
    basis: EigenBasisPartition,
    cluster_tol: f64,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projections(&self) -> &[ComplexMatrix] {
        &self.projections
    }

    pub fn multiplicities(&self) -> &[usize] {
        self.basis.sizes()
    }

    pub fn basis(&self) -> &EigenBasisPartition {
        &self.basis
    }

    pub fn num_blocks(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Clustering tolerance used to build this decomposition.
    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    /// `sum_j lambda_j E_j`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.dim();
        self.eigenvalues
            .iter()
            .zip(&self.projections)
            .fold(ComplexMatrix::zeros(d, d), |acc, (l, e)| acc + e.scale(*l))
    }

    /// Replaces the basis with another partition adapted to the same
    /// projections (same block sizes, block `j` inside `range(E_j)`).
    pub fn with_basis(&self, basis: EigenBasisPartition) -> Result<Self> {
        if basis.sizes() != self.basis.sizes() {
            return Err(NogpError::InvalidParameter(format!(
                "block sizes {:?} differ from multiplicities {:?}",
                basis.sizes(),
                self.basis.sizes()
            )));
        }
        for (j, e) in self.projections.iter().enumerate() {
            let b = basis.block(j);
            let leak = max_abs_diff(&(e * &b), &b);
            if leak > BASIS_TOL {
                return Err(NogpError::InvalidParameter(format!(
                    "basis block {j} leaves range(E_{j}) by {leak:.3e}"
                )));
            }
        }
        Ok(Self {
            basis,
            ..self.clone()
        })
    }

    /// Right-multiplies block `j`'s basis by the `d_j x d_j` unitary `w`.
    pub fn with_block_rotation(&self, j: usize, w: &ComplexMatrix) -> Result<Self> {
        let mut vectors = self.basis.matrix().clone();
        let r = self.basis.block_range(j);
        let rotated = self.basis.block(j) * w;
        vectors.columns_mut(r.start, r.len()).copy_from(&rotated);
        self.with_basis(EigenBasisPartition::new(
            vectors,
            self.basis.sizes().to_vec(),
        )?)
    }
}

/// `1e-8 * (1 + ||X||)`, with `||X||` the spectral norm.
pub fn default_cluster_tol(x: &Observable) -> f64 {
    1e-8 * (1.0 + hermitian_norm(x.matrix()))
}

/// Spectral decomposition with eigenvalues closer than `cluster_tol` merged
/// into one degenerate block.
///
/// Eigenvalues are sorted ascending. Within each block the basis is built by
/// projecting the standard basis vectors onto `range(E_j)` and running
/// Gram-Schmidt with largest-residual-first pivoting (ties go to the lowest
/// index), so the result does not depend on how the eigen-solver happens to
/// rotate a degenerate eigenspace.
pub fn spectral_decompose(x: &Observable, cluster_tol: f64) -> Result<SpectralDecomposition> {
    if !(cluster_tol > 0.0) {
        return Err(NogpError::InvalidParameter(
            "cluster tolerance must be positive".into(),
        ));
    }
    let residual = hermiticity_residual(x.matrix());
    if residual > HERMITIAN_TOL {
        return Err(NogpError::NonHermitianInput {
            residual,
            tol: HERMITIAN_TOL,
        });
    }
    let d = x.dim();
    let eig = x.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &idx in &order {
        let lam = eig.eigenvalues[idx];
        match clusters.last_mut() {
            Some(cl) if lam - eig.eigenvalues[*cl.last().unwrap()] <= cluster_tol => cl.push(idx),
            _ => clusters.push(vec![idx]),
        }
    }

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut sizes = Vec::with_capacity(clusters.len());
    let mut vectors = ComplexMatrix::zeros(d, d);
    let mut col = 0;
    for cl in &clusters {
        let lo = eig.eigenvalues[cl[0]];
        let hi = eig.eigenvalues[*cl.last().unwrap()];
        if hi - lo > 10.0 * cluster_tol {
            return Err(NogpError::DegenerateClustering {
                span: hi - lo,
                tol: cluster_tol,
            });
        }
        let mean = cl.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / cl.len() as f64;
        eigenvalues.push(mean);
        sizes.push(cl.len());

        let mut raw = ComplexMatrix::zeros(d, cl.len());
        for (k, &i) in cl.iter().enumerate() {
            raw.set_column(k, &eig.eigenvectors.column(i));
        }
        let projector = &raw * raw.adjoint();
        let block = pivoted_basis(&projector, cl.len());
        vectors.columns_mut(col, cl.len()).copy_from(&block);
        col += cl.len();
    }

    let basis = EigenBasisPartition::new(vectors, sizes)?;
    let projections = (0..basis.num_blocks())
        .map(|j| {
            let b = basis.block(j);
            &b * b.adjoint()
        })
        .collect();
    Ok(SpectralDecomposition {
        eigenvalues,
        projections,
        basis,
        cluster_tol,
    })
}

/// [`spectral_decompose`] with [`default_cluster_tol`].
pub fn spectral_decompose_default(x: &Observable) -> Result<SpectralDecomposition> {
    spectral_decompose(x, default_cluster_tol(x))
}

/// Orthonormal basis of `range(projector)` (rank `rank`) from the projected
/// standard basis vectors, pivoting on the largest remaining residual.
fn pivoted_basis(projector: &ComplexMatrix, rank: usize) -> ComplexMatrix {
    const TIE: f64 = 1e-12;
    let d = projector.nrows();
    let mut residuals: Vec<DVector<C64>> =
        (0..d).map(|i| projector.column(i).into_owned()).collect();
    let mut used = vec![false; d];
    let mut out = ComplexMatrix::zeros(d, rank);
    for k in 0..rank {
        let norms: Vec<f64> = residuals.iter().map(|r| r.norm()).collect();
        let best = (0..d)
            .filter(|&i| !used[i])
            .fold(0.0_f64, |acc, i| acc.max(norms[i]));
        let pivot = (0..d)
            .find(|&i| !used[i] && norms[i] >= best - TIE)
            .expect("projector rank exceeds available pivots");
        used[pivot] = true;
        let q = residuals[pivot].unscale(norms[pivot]);
        for r in residuals.iter_mut() {
            // two passes of classical Gram-Schmidt
            for _ in 0..2 {
                let overlap = q.dotc(r);
                r.axpy(-overlap, &q, C64::new(1.0, 0.0));
            }
        }
        out.set_column(k, &q);
    }
    out
}

/// `exp(-i H tau)` for a Hermitian matrix, through its eigen-decomposition.
///
/// Only the lower triangle of `h` is read.
pub fn exp_hermitian(h: &ComplexMatrix, tau: f64) -> ComplexMatrix {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        let mut col = scaled.column_mut(k);
        col *= C64::from_polar(1.0, -l * tau);
    }
    scaled * v.adjoint()
}

/// `exp(-i H tau)`; unitary up to eigen-solver accuracy.
pub fn skew_exp(h: &Observable, tau: f64) -> ComplexMatrix {
    exp_hermitian(h.matrix(), tau)
}

/// Principal logarithm of a unitary: Hermitian `K` with `W = exp(i K)` and
/// eigenvalues in `(-pi, pi]`.
///
/// Returns `(K, branch_cut_hit)`; the flag is set when an eigenphase sat
/// within `1e-12` of `-pi` and was moved to `+pi`.
pub fn unitary_log(w: &ComplexMatrix) -> (ComplexMatrix, bool) {
    use std::f64::consts::PI;
    let schur = nalgebra::Schur::new(w.clone());
    let (q, t) = schur.unpack();
    let mut flagged = false;
    let n = w.nrows();
    let mut diag = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let mut a = t[(k, k)].arg();
        if a <= -PI + 1e-12 {
            a = PI;
            flagged = true;
        }
        diag[(k, k)] = c(a, 0.0);
    }
    let k = &q * diag * q.adjoint();
    let k = (&k + k.adjoint()).scale(0.5);
    (k, flagged)
}
