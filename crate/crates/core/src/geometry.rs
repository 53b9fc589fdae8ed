//! Gauge group, canonical connection and holonomy of unitary lifts.
//!
//! A basis `O_0` split into blocks `[d_1, ..., d_n]` fixes the gauge group of
//! unitaries that are block-diagonal in that basis. A curve of unitaries
//! `L(t)` is a lift of the curve of frames `L(t) O_0`; it is horizontal when
//! the block-diagonal part of `L^dagger dL/dt` vanishes, and for a closed base
//! curve `L(0)^dagger L(T)` is the holonomy element.

use crate::error::{NogpError, Result};
use crate::linalg::{
    identity, is_unitary, max_abs, unitarity_residual, unitary_polar, ComplexMatrix,
    EigenBasisPartition, SpectralDecomposition, BASIS_TOL,
};
use crate::nogp::default_cyclic_threshold;
use crate::propagator::{PropagatorGrid, TimeGrid};

/// Orthonormal basis with a block partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFrame {
    pub partition: EigenBasisPartition,
}

impl PartitionFrame {
    pub fn new(partition: EigenBasisPartition) -> Self {
        Self { partition }
    }

    pub fn from_spectral(s: &SpectralDecomposition) -> Self {
        Self::new(s.basis().clone())
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    /// `B_j^dagger M B_j` for every block.
    pub fn blocks_of(&self, m: &ComplexMatrix) -> Vec<ComplexMatrix> {
        (0..self.partition.num_blocks())
            .map(|j| {
                let b = self.partition.block(j);
                b.adjoint() * m * b
            })
            .collect()
    }

    fn project(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let p = &self.partition;
        p.from_partition_basis(&p.block_diagonal_part(&p.to_partition_basis(m)))
    }
}

/// Unitary samples on a uniform time grid.
#[derive(Debug, Clone)]
pub struct LiftCurve {
    grid: TimeGrid,
    unitaries: Vec<ComplexMatrix>,
}

impl LiftCurve {
    pub fn new(grid: TimeGrid, unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        if unitaries.len() != grid.len() {
            return Err(NogpError::GridMismatch(format!(
                "{} samples for {} grid points",
                unitaries.len(),
                grid.len()
            )));
        }
        for u in &unitaries {
            let residual = unitarity_residual(u);
            if residual > BASIS_TOL {
                return Err(NogpError::NotUnitary {
                    residual,
                    tol: BASIS_TOL,
                });
            }
        }
        Ok(Self { grid, unitaries })
    }

    /// `U(0,t) = U(t,0)^dagger`, which carries the initial basis along the
    /// Heisenberg frames.
    pub fn heisenberg(p: &PropagatorGrid) -> Self {
        Self {
            grid: p.grid(),
            unitaries: p.unitaries().iter().map(|u| u.adjoint()).collect(),
        }
    }

    /// `U(t,0)`.
    pub fn schrodinger(p: &PropagatorGrid) -> Self {
        Self {
            grid: p.grid(),
            unitaries: p.unitaries().to_vec(),
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn first(&self) -> &ComplexMatrix {
        &self.unitaries[0]
    }

    pub fn last(&self) -> &ComplexMatrix {
        self.unitaries.last().expect("non-empty")
    }
}

fn check_unitary(u: &ComplexMatrix) -> Result<()> {
    let residual = unitarity_residual(u);
    if residual > BASIS_TOL {
        Err(NogpError::NotUnitary {
            residual,
            tol: BASIS_TOL,
        })
    } else {
        Ok(())
    }
}

/// Whether `u` is block-diagonal in the frame's basis up to `tol`.
pub fn gauge_group_membership(u: &ComplexMatrix, f: &PartitionFrame, tol: f64) -> Result<bool> {
    check_unitary(u)?;
    Ok(f.partition
        .off_block_max(&f.partition.to_partition_basis(u))
        <= tol)
}

/// Canonical connection `Omega_P(Q)`: the block-diagonal part of
/// `P^dagger Q` in the frame's basis, returned in the original basis.
pub fn canonical_connection(
    p: &ComplexMatrix,
    q: &ComplexMatrix,
    f: &PartitionFrame,
) -> Result<ComplexMatrix> {
    check_unitary(p)?;
    Ok(f.project(&(p.adjoint() * q)))
}

/// Largest canonical connection along the curve, with `dL/dt` from the
/// five-point central difference at nodes `2..n-2`.
pub fn verify_horizontal(l: &LiftCurve, f: &PartitionFrame) -> Result<f64> {
    let u = &l.unitaries;
    let n = u.len();
    if n < 5 {
        return Err(NogpError::GridTooCoarse { needed: 5, got: n });
    }
    let scale = 1.0 / (12.0 * l.grid.dt());
    let mut residual = 0.0_f64;
    for i in 2..n - 2 {
        let deriv = ((&u[i + 1] - &u[i - 1]).scale(8.0) - (&u[i + 2] - &u[i - 2])).scale(scale);
        residual = residual.max(max_abs(&canonical_connection(&u[i], &deriv, f)?));
    }
    Ok(residual)
}

/// Horizontal lift `Gamma(t) G(t)` with `G(0) = I` and `G` in the gauge group.
///
/// Each step picks the gauge factor that makes the block-diagonal part of
/// `L_i^dagger L_{i+1}` Hermitian positive; this discretizes
/// `dG/dt = -Omega_Gamma(dGamma/dt) G` to second order.
pub fn horizontal_lift(gamma: &LiftCurve, f: &PartitionFrame) -> LiftCurve {
    let p = &f.partition;
    let b = p.matrix();
    let mut g = identity(p.dim());
    let mut out = Vec::with_capacity(gamma.unitaries.len());
    out.push(gamma.unitaries[0].clone());
    for w in gamma.unitaries.windows(2) {
        let step = p.block_diagonal_part(&p.to_partition_basis(&(w[0].adjoint() * &w[1])));
        g = unitary_polar(&step).adjoint() * g;
        out.push(&w[1] * b * &g * b.adjoint());
    }
    LiftCurve {
        grid: gamma.grid,
        unitaries: out,
    }
}

/// Holonomy element `L(0)^dagger L(T)` of a lift over a closed base curve.
///
/// The base curve counts as closed when the off-block part stays within
/// `1e-6 d`; the returned element is its block-diagonal part.
pub fn holonomy_from_lift(l: &LiftCurve, f: &PartitionFrame) -> Result<ComplexMatrix> {
    let g = l.first().adjoint() * l.last();
    let tol = default_cyclic_threshold(f.dim());
    if !is_unitary(&g, BASIS_TOL) || !gauge_group_membership(&g, f, tol)? {
        return Err(NogpError::NotClosedBase);
    }
    Ok(f.project(&g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff, C64};

    fn frame21() -> PartitionFrame {
        PartitionFrame::new(EigenBasisPartition::standard(vec![2, 1]).unwrap())
    }

    fn block_diag_unitary() -> ComplexMatrix {
        let s = 0.5_f64.sqrt();
        ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                c(s, 0.),
                c(0., s),
                c(0., 0.),
                c(0., s),
                c(s, 0.),
                c(0., 0.),
                c(0., 0.),
                c(0., 0.),
                C64::from_polar(1.0, 0.3),
            ],
        )
    }

    #[test]
    fn membership() {
        let f = frame21();
        assert!(gauge_group_membership(&block_diag_unitary(), &f, 1e-12).unwrap());
        let mut perm = ComplexMatrix::zeros(3, 3);
        perm[(0, 2)] = c(1., 0.);
        perm[(2, 0)] = c(1., 0.);
        perm[(1, 1)] = c(1., 0.);
        assert!(!gauge_group_membership(&perm, &f, 1e-12).unwrap());
        assert!(matches!(
            gauge_group_membership(&identity(3).scale(2.0), &f, 1e-12),
            Err(NogpError::NotUnitary { .. })
        ));
    }

    #[test]
    fn connection_of_identity() {
        let f = frame21();
        let q = block_diag_unitary();
        assert!(max_abs_diff(&canonical_connection(&identity(3), &q, &f).unwrap(), &q) < 1e-15);
        let mut off = ComplexMatrix::zeros(3, 3);
        off[(0, 2)] = c(1., 2.);
        off[(2, 1)] = c(-1., 0.);
        assert_eq!(
            max_abs(&canonical_connection(&identity(3), &off, &f).unwrap()),
            0.0
        );
    }

    #[test]
    fn constant_lift() {
        let f = frame21();
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let u = block_diag_unitary();
        let l = LiftCurve::new(grid, vec![u.clone(); 11]).unwrap();
        assert_eq!(verify_horizontal(&l, &f).unwrap(), 0.0);
        let h = horizontal_lift(&l, &f);
        for m in h.unitaries() {
            assert!(max_abs_diff(m, &u) < 1e-14);
        }
        assert!(max_abs_diff(&holonomy_from_lift(&l, &f).unwrap(), &identity(3)) < 1e-14);
    }

    #[test]
    fn too_coarse() {
        let f = frame21();
        let grid = TimeGrid::new(1.0, 3).unwrap();
        let l = LiftCurve::new(grid, vec![identity(3); 4]).unwrap();
        assert!(matches!(
            verify_horizontal(&l, &f),
            Err(NogpError::GridTooCoarse { needed: 5, got: 4 })
        ));
    }

    #[test]
    fn open_base_rejected() {
        let f = frame21();
        let grid = TimeGrid::new(1.0, 1).unwrap();
        let mut perm = ComplexMatrix::zeros(3, 3);
        perm[(0, 2)] = c(1., 0.);
        perm[(2, 0)] = c(1., 0.);
        perm[(1, 1)] = c(1., 0.);
        let l = LiftCurve::new(grid, vec![identity(3), perm]).unwrap();
        assert_eq!(holonomy_from_lift(&l, &f), Err(NogpError::NotClosedBase));
    }
}
