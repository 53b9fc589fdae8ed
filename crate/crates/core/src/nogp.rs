//! Non-Abelian observable-geometric phases.
//!
//! For a cyclic observable `X_0 = sum_j lambda_j E_j` with basis `psi^(j)_k`
//! of each eigenspace, the Heisenberg frames `psi^(j)_k(t) = U(0,t) psi^(j)_k`
//! are rotated inside their moving eigenspace by `V_j(t)`, the solution of
//! `i dV_j/dt = C_j(t) V_j` with `C_j(t)_{mk} = <psi_m, H(t) psi_k>`. The
//! rotated frame is parallel, and its overlap with the initial basis after
//! one period is the phase block `G_j`.
//!
//! Two cross-checks that do not go through `H(t)` are provided as well:
//! [`phase_via_loop_basis`] computes `G_j` from any smooth closed frame of
//! the same subspace loop, and [`state_evolution_phase`] is the
//! Schrödinger-picture analogue for an invariant subspace.

use crate::error::{NogpError, Result};
use crate::linalg::{
    exp_hermitian, identity, max_abs, max_abs_diff, unitarity_residual, unitary_log, unitary_polar,
    ComplexMatrix, SpectralDecomposition, C64,
};
use crate::propagator::{evolve, DrivenHamiltonian, PropagatorGrid, TimeGrid};

/// Default propagator steps per period.
pub const DEFAULT_STEPS: usize = 2000;

/// Default convergence tolerance of the step-doubling rule.
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-8;

/// Cyclicity threshold `1e-6 * d`.
pub fn default_cyclic_threshold(dim: usize) -> f64 {
    1e-6 * dim as f64
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `C_j(t) = [<psi_m, H(t) psi_k>]` sampled on grid nodes and step midpoints.
#[derive(Debug, Clone)]
pub struct TransportCoefficients {
    pub block: usize,
    grid: TimeGrid,
    nodes: Vec<ComplexMatrix>,
    midpoints: Vec<ComplexMatrix>,
}

impl TransportCoefficients {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// `C_j(t_i)`.
    pub fn nodes(&self) -> &[ComplexMatrix] {
        &self.nodes
    }

    /// `C_j` at the step midpoints, as consumed by the integrator.
    pub fn midpoints(&self) -> &[ComplexMatrix] {
        &self.midpoints
    }

    pub fn block_dim(&self) -> usize {
        self.nodes[0].nrows()
    }
}

/// Transport coefficients of every block.
///
/// Only the initial basis enters: `<psi_m(t), H~(t) psi_k(t)>` equals
/// `<psi_m, H(t) psi_k>`, so no propagator is needed.
pub fn transport_coefficients(
    h: &DrivenHamiltonian,
    s: &SpectralDecomposition,
    grid: TimeGrid,
) -> Result<Vec<TransportCoefficients>> {
    if h.dim() != s.dim() {
        return Err(NogpError::DimensionMismatch {
            expected: s.dim(),
            found: h.dim(),
        });
    }
    let blocks: Vec<ComplexMatrix> = (0..s.num_blocks()).map(|j| s.basis().block(j)).collect();
    let project = |m: &ComplexMatrix| -> Vec<ComplexMatrix> {
        blocks
            .iter()
            .map(|b| hermitize(&(b.adjoint() * m * b)))
            .collect()
    };
    let mut out: Vec<TransportCoefficients> = (0..blocks.len())
        .map(|j| TransportCoefficients {
            block: j,
            grid,
            nodes: Vec::with_capacity(grid.len()),
            midpoints: Vec::with_capacity(grid.steps),
        })
        .collect();
    for i in 0..=grid.steps {
        for (tc, c) in out.iter_mut().zip(project(&h.sample(grid.time(i)))) {
            tc.nodes.push(c);
        }
        if i < grid.steps {
            for (tc, c) in out.iter_mut().zip(project(&h.sample(grid.midpoint(i)))) {
                tc.midpoints.push(c);
            }
        }
    }
    Ok(out)
}

/// Samples of `V(t_i)` solving a `d_j x d_j` transport equation.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    pub block: usize,
    grid: TimeGrid,
    unitaries: Vec<ComplexMatrix>,
}

impl TransportSolution {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn final_unitary(&self) -> &ComplexMatrix {
        self.unitaries.last().expect("non-empty")
    }
}

fn integrate_generator(
    block: usize,
    grid: TimeGrid,
    generators: impl Iterator<Item = ComplexMatrix>,
    dim: usize,
) -> TransportSolution {
    let dt = grid.dt();
    let mut unitaries = Vec::with_capacity(grid.len());
    unitaries.push(identity(dim));
    for (i, g) in generators.enumerate() {
        let next = exp_hermitian(&g, dt) * &unitaries[i];
        unitaries.push(next);
    }
    TransportSolution {
        block,
        grid,
        unitaries,
    }
}

/// Solves `i dV/dt = C(t) V`, `V(0) = I` with the exponential midpoint rule.
pub fn solve_transport(c: &TransportCoefficients) -> TransportSolution {
    integrate_generator(c.block, c.grid, c.midpoints.iter().cloned(), c.block_dim())
}

/// Parallel frame `psi~^(j)_k(t_i) = sum_m V_j(t_i)_{mk} U(0,t_i) psi^(j)_m`,
/// stored as `d x d_j` matrices.
#[derive(Debug, Clone)]
pub struct ParallelFrame {
    pub block: usize,
    grid: TimeGrid,
    frames: Vec<ComplexMatrix>,
}

impl ParallelFrame {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn frames(&self) -> &[ComplexMatrix] {
        &self.frames
    }

    pub fn final_frame(&self) -> &ComplexMatrix {
        self.frames.last().expect("non-empty")
    }

    /// `max_i max_abs(F_i^dagger F_i - I)`.
    pub fn gram_residual(&self) -> f64 {
        let k = self.frames[0].ncols();
        self.frames
            .iter()
            .map(|f| max_abs_diff(&(f.adjoint() * f), &identity(k)))
            .fold(0.0, f64::max)
    }

    /// `max_i max_abs(F_i^dagger dF/dt)` with the five-point central
    /// difference at nodes `2..n-2`; vanishes for an exactly parallel frame.
    pub fn parallel_residual(&self) -> f64 {
        parallel_residual(&self.frames, self.grid.dt())
    }
}

pub(crate) fn parallel_residual(frames: &[ComplexMatrix], dt: f64) -> f64 {
    let f = frames;
    (2..f.len().saturating_sub(2))
        .map(|i| {
            let deriv = ((&f[i + 1] - &f[i - 1]).scale(8.0) - (&f[i + 2] - &f[i - 2]))
                .scale(1.0 / (12.0 * dt));
            max_abs(&(f[i].adjoint() * deriv))
        })
        .fold(0.0, f64::max)
}

pub fn parallel_frame(
    p: &PropagatorGrid,
    v: &TransportSolution,
    s: &SpectralDecomposition,
) -> Result<ParallelFrame> {
    if p.grid() != v.grid {
        return Err(NogpError::GridMismatch(format!(
            "propagator grid {:?} vs transport grid {:?}",
            p.grid(),
            v.grid
        )));
    }
    if p.dim() != s.dim() {
        return Err(NogpError::DimensionMismatch {
            expected: s.dim(),
            found: p.dim(),
        });
    }
    let psi = s.basis().block(v.block);
    let frames = p
        .unitaries()
        .iter()
        .zip(&v.unitaries)
        .map(|(u, vt)| u.adjoint() * &psi * vt)
        .collect();
    Ok(ParallelFrame {
        block: v.block,
        grid: v.grid,
        frames,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// Largest leakage of a final frame out of its initial eigenspace.
    pub cyclicity: f64,
    /// Largest finite-difference parallel-condition residual.
    pub parallel: f64,
    /// Largest unitarity residual over the blocks and the holonomy.
    pub unitarity: f64,
}

/// Phase blocks `G_j`, the assembled holonomy `U~ = sum_j U~_j`, and
/// diagnostics. `cyclic` is false when the evolution failed the cyclicity
/// threshold; the blocks are still reported.
#[derive(Debug, Clone)]
pub struct NogpResult {
    pub blocks: Vec<ComplexMatrix>,
    pub holonomy: ComplexMatrix,
    pub residuals: Residuals,
    pub cyclic: bool,
    pub cyclic_threshold: f64,
}

impl NogpResult {
    /// Turns a non-cyclic result into [`NogpError::NotCyclic`].
    pub fn require_cyclic(self) -> Result<Self> {
        if self.cyclic {
            Ok(self)
        } else {
            Err(NogpError::NotCyclic {
                residual: self.residuals.cyclicity,
                threshold: self.cyclic_threshold,
            })
        }
    }

    /// 1x1 block `j` as a complex number.
    pub fn scalar_block(&self, j: usize) -> Option<C64> {
        let g = &self.blocks[j];
        (g.nrows() == 1).then(|| g[(0, 0)])
    }
}

/// `g^(j)_{mk} = <psi^(j)_m, psi~^(j)_k(T)>` for one block.
pub fn block_phase(frame: &ParallelFrame, s: &SpectralDecomposition) -> ComplexMatrix {
    s.basis().block(frame.block).adjoint() * frame.final_frame()
}

/// Assembles the phase blocks from one parallel frame per block.
pub fn extract_phase(
    frames: &[ParallelFrame],
    s: &SpectralDecomposition,
    cyclic_threshold: f64,
) -> Result<NogpResult> {
    if frames.len() != s.num_blocks() {
        return Err(NogpError::InvalidParameter(format!(
            "{} frames for {} blocks",
            frames.len(),
            s.num_blocks()
        )));
    }
    let mut blocks = Vec::with_capacity(frames.len());
    let mut cyclicity = 0.0_f64;
    let mut parallel = 0.0_f64;
    for (j, f) in frames.iter().enumerate() {
        if f.block != j {
            return Err(NogpError::InvalidParameter(format!(
                "frame {j} belongs to block {}",
                f.block
            )));
        }
        let e = &s.projections()[j];
        let end = f.final_frame();
        cyclicity = cyclicity.max(max_abs_diff(&(e * end), end));
        parallel = parallel.max(f.parallel_residual());
        blocks.push(block_phase(f, s));
    }
    let holonomy = s.basis().assemble_blocks(&blocks);
    let unitarity = blocks
        .iter()
        .map(unitarity_residual)
        .fold(unitarity_residual(&holonomy), f64::max);
    Ok(NogpResult {
        blocks,
        holonomy,
        residuals: Residuals {
            cyclicity,
            parallel,
            unitarity,
        },
        cyclic: cyclicity <= cyclic_threshold,
        cyclic_threshold,
    })
}

/// Everything computed along the way to the phases.
#[derive(Debug, Clone)]
pub struct NogpRun {
    pub propagator: PropagatorGrid,
    pub transport: Vec<TransportSolution>,
    pub frames: Vec<ParallelFrame>,
    pub result: NogpResult,
}

impl NogpRun {
    /// `U~(t_i) = sum_j sum_k |psi~^(j)_k(t_i)><psi^(j)_k|`.
    pub fn lift_samples(&self, s: &SpectralDecomposition) -> Vec<ComplexMatrix> {
        let n = self.frames[0].frames().len();
        let bases: Vec<ComplexMatrix> = (0..s.num_blocks()).map(|j| s.basis().block(j)).collect();
        (0..n)
            .map(|i| {
                self.frames
                    .iter()
                    .zip(&bases)
                    .map(|(f, b)| &f.frames()[i] * b.adjoint())
                    .fold(ComplexMatrix::zeros(s.dim(), s.dim()), |acc, m| acc + m)
            })
            .collect()
    }
}

/// Full pipeline on an existing propagator grid.
pub fn nogp_from_propagator(
    h: &DrivenHamiltonian,
    s: &SpectralDecomposition,
    propagator: PropagatorGrid,
) -> Result<NogpRun> {
    let coeffs = transport_coefficients(h, s, propagator.grid())?;
    let transport: Vec<TransportSolution> = coeffs.iter().map(solve_transport).collect();
    let frames = transport
        .iter()
        .map(|v| parallel_frame(&propagator, v, s))
        .collect::<Result<Vec<_>>>()?;
    let result = extract_phase(&frames, s, default_cyclic_threshold(s.dim()))?;
    Ok(NogpRun {
        propagator,
        transport,
        frames,
        result,
    })
}

/// Full pipeline over one period with `steps` steps.
pub fn compute_nogp(
    h: &DrivenHamiltonian,
    s: &SpectralDecomposition,
    steps: usize,
) -> Result<NogpRun> {
    nogp_from_propagator(h, s, evolve(h, steps)?)
}

/// Outcome of [`compute_nogp_converged`].
#[derive(Debug, Clone)]
pub struct ConvergedNogp {
    pub run: NogpRun,
    pub steps: usize,
    /// `max_j max_abs(G_j(N) - G_j(N/2))` at the accepted `N`.
    pub last_change: f64,
    pub converged: bool,
}

/// Doubles the step count from `start_steps` until successive phase blocks
/// differ by less than `tol`, or `max_steps` is reached.
pub fn compute_nogp_converged(
    h: &DrivenHamiltonian,
    s: &SpectralDecomposition,
    start_steps: usize,
    tol: f64,
    max_steps: usize,
) -> Result<ConvergedNogp> {
    let mut steps = start_steps.max(1);
    let mut prev = compute_nogp(h, s, steps)?;
    loop {
        let next_steps = steps * 2;
        let next = compute_nogp(h, s, next_steps)?;
        let change = prev
            .result
            .blocks
            .iter()
            .zip(&next.result.blocks)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max);
        if change < tol || next_steps * 2 > max_steps {
            return Ok(ConvergedNogp {
                run: next,
                steps: next_steps,
                last_change: change,
                converged: change < tol,
            });
        }
        prev = next;
        steps = next_steps;
    }
}

/// Smooth orthonormal `d x d_j` frames on a uniform grid, closed:
/// the last sample equals the first.
#[derive(Debug, Clone)]
pub struct LoopBasis {
    grid: TimeGrid,
    frames: Vec<ComplexMatrix>,
    /// Set when closing hit the `-pi` branch cut of the matrix logarithm.
    pub branch_flag: bool,
}

impl LoopBasis {
    /// Checks sample count and per-time orthonormality (to `1e-8`).
    pub fn new(grid: TimeGrid, frames: Vec<ComplexMatrix>) -> Result<Self> {
        if frames.len() != grid.len() {
            return Err(NogpError::GridMismatch(format!(
                "{} frames for {} grid points",
                frames.len(),
                grid.len()
            )));
        }
        let k = frames[0].ncols();
        for f in &frames {
            let r = max_abs_diff(&(f.adjoint() * f), &identity(k));
            if r > 1e-8 {
                return Err(NogpError::InvalidParameter(format!(
                    "loop frame not orthonormal (residual {r:.3e})"
                )));
            }
        }
        Ok(Self {
            grid,
            frames,
            branch_flag: false,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn frames(&self) -> &[ComplexMatrix] {
        &self.frames
    }

    /// `max_abs(F(T) - F(0))`.
    pub fn closure_mismatch(&self) -> f64 {
        max_abs_diff(self.frames.last().unwrap(), &self.frames[0])
    }
}

/// Closes an open frame `F(t)` of a cyclic subspace loop by right-multiplying
/// with `W(t) = exp((t/T) log W_T)`, where `W_T` undoes the end-point mismatch
/// `F(0)^dagger F(T)` (principal logarithm, eigenphases in `(-pi, pi]`).
///
/// `extra_winding` adds `2 pi * extra_winding` to the largest eigenphase of
/// the logarithm, giving a different closed frame of the same subspace loop.
pub fn close_loop(
    grid: TimeGrid,
    open_frames: &[ComplexMatrix],
    extra_winding: i32,
) -> Result<LoopBasis> {
    if open_frames.len() != grid.len() {
        return Err(NogpError::GridMismatch(format!(
            "{} frames for {} grid points",
            open_frames.len(),
            grid.len()
        )));
    }
    let first = &open_frames[0];
    let last = open_frames.last().unwrap();
    // nearest unitary to the overlap, so slight leakage does not spoil the log
    let overlap = first.adjoint() * last;
    let m = unitary_polar(&overlap);
    let (mut k, branch_flag) = unitary_log(&m.adjoint());
    if extra_winding != 0 {
        let eig = k.clone().symmetric_eigen();
        let top = eig.eigenvalues.imax();
        let q = eig.eigenvectors.column(top).into_owned();
        k += (&q * q.adjoint()).scale(2.0 * std::f64::consts::PI * extra_winding as f64);
    }
    let t_end = grid.t_end;
    let frames = open_frames
        .iter()
        .enumerate()
        .map(|(i, f)| f * exp_hermitian(&k, -grid.time(i) / t_end))
        .collect();
    let mut lb = LoopBasis::new(grid, frames)?;
    lb.branch_flag = branch_flag;
    Ok(lb)
}

/// Hamiltonian-free route: transports the frame with `i dV/dt = -A(t) V`,
/// `A(t)_{mk} = i <F_m(t), dF_k/dt>`, `V(0) = I`, and returns `V(T)`.
///
/// Each step uses the unitary part of the overlap `F_i^dagger F_{i+1}`,
/// which equals `exp(-i A dt)` up to third order; the product is exact for
/// one-dimensional blocks and for the full space.
pub fn phase_via_loop_basis(loop_basis: &LoopBasis) -> Result<ComplexMatrix> {
    let mismatch = loop_basis.closure_mismatch();
    if mismatch > 1e-8 {
        return Err(NogpError::NotClosed { mismatch });
    }
    let f = &loop_basis.frames;
    let mut v = identity(f[0].ncols());
    for w in f.windows(2) {
        v = unitary_polar(&(w[0].adjoint() * &w[1])).adjoint() * v;
    }
    Ok(v)
}

/// Schrödinger-picture transport of a subspace: `i dV/dt = C(t) V` with
/// `C_{mk}(t) = -<U(t) psi_m, H(t) U(t) psi_k>`.
pub fn state_transport(
    h: &DrivenHamiltonian,
    p: &PropagatorGrid,
    subspace: &ComplexMatrix,
) -> Result<TransportSolution> {
    if subspace.nrows() != p.dim() || h.dim() != p.dim() {
        return Err(NogpError::DimensionMismatch {
            expected: p.dim(),
            found: subspace.nrows(),
        });
    }
    let grid = p.grid();
    let generators = (0..grid.steps).map(|i| {
        // H(t_mid) commutes with the half step, so U(t_i) gives the same C
        let moved = p.at(i) * subspace;
        -hermitize(&(moved.adjoint() * h.sample(grid.midpoint(i)) * &moved))
    });
    Ok(integrate_generator(0, grid, generators, subspace.ncols()))
}

/// Non-Abelian phase of the state evolution of the subspace spanned by the
/// orthonormal columns of `subspace`: `G = [<psi_m, psi~_k(T)>]`. The
/// subspace must return to itself within `1e-6 d`.
pub fn state_evolution_phase(
    h: &DrivenHamiltonian,
    p: &PropagatorGrid,
    subspace: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let moved = p.final_unitary() * subspace;
    let leak = max_abs(&(&moved - subspace * (subspace.adjoint() * &moved)));
    if leak > default_cyclic_threshold(p.dim()) {
        return Err(NogpError::NotCyclicSubspace { residual: leak });
    }
    let v = state_transport(h, p, subspace)?;
    Ok(subspace.adjoint() * moved * v.final_unitary())
}
