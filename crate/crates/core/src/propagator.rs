//! Time-dependent Hamiltonians and their propagators.
//!
//! `U(t, 0)` is integrated with the exponential midpoint rule
//! `U_{i+1} = exp(-i H(t_i + dt/2) dt) U_i`, which is second order and keeps
//! every sample unitary up to eigen-solver accuracy. `U(0, t)` is taken as
//! the adjoint of `U(t, 0)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{NogpError, Result};
use crate::linalg::{
    exp_hermitian, hermiticity_residual, identity, max_abs_diff, ComplexMatrix, Observable,
    SpectralDecomposition, C64, HERMITIAN_TOL,
};

type HamiltonianFn = dyn Fn(f64) -> ComplexMatrix + Send + Sync;

/// A `T`-periodic Hamiltonian `t -> H(t)`.
#[derive(Clone)]
pub struct DrivenHamiltonian {
    label: String,
    period: f64,
    dim: usize,
    eval: Arc<HamiltonianFn>,
}

impl fmt::Debug for DrivenHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DrivenHamiltonian")
            .field("label", &self.label)
            .field("period", &self.period)
            .field("dim", &self.dim)
            .finish()
    }
}

impl DrivenHamiltonian {
    pub fn new<F>(label: impl Into<String>, period: f64, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
    {
        if !(period > 0.0 && period.is_finite()) {
            return Err(NogpError::InvalidParameter(format!(
                "period must be positive, got {period}"
            )));
        }
        let h0 = eval(0.0);
        if h0.nrows() == 0 || !h0.is_square() {
            return Err(NogpError::DimensionMismatch {
                expected: h0.nrows(),
                found: h0.ncols(),
            });
        }
        Ok(Self {
            label: label.into(),
            period,
            dim: h0.nrows(),
            eval: Arc::new(eval),
        })
    }

    pub fn constant(label: impl Into<String>, period: f64, h: Observable) -> Result<Self> {
        let m = h.into_inner();
        Self::new(label, period, move |_| m.clone())
    }

    pub fn zero(dim: usize, period: f64) -> Result<Self> {
        Self::constant("zero", period, Observable::zeros(dim))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Raw sample `H(t)`.
    pub fn sample(&self, t: f64) -> ComplexMatrix {
        (self.eval)(t)
    }

    /// Validated sample `H(t)`.
    pub fn at(&self, t: f64) -> Result<Observable> {
        let m = self.sample(t);
        let residual = hermiticity_residual(&m);
        if residual > HERMITIAN_TOL {
            return Err(NogpError::NonHermitianSample { time: t, residual });
        }
        Observable::new(m)
    }

    /// `H(t) + c(t) I`.
    pub fn with_energy_shift<F>(&self, shift: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let inner = self.eval.clone();
        let d = self.dim;
        Self {
            label: format!("{}+shift", self.label),
            period: self.period,
            dim: d,
            eval: Arc::new(move |t| inner(t) + identity(d).scale(shift(t))),
        }
    }

    /// Checks Hermiticity and `H(t + T) = H(t)` at `samples` uniformly spaced
    /// points of one period. Returns the worst residual of each kind.
    pub fn check(&self, samples: usize) -> Result<(f64, f64)> {
        let mut herm = 0.0_f64;
        let mut periodic = 0.0_f64;
        for k in 0..samples.max(1) {
            let t = self.period * k as f64 / samples.max(1) as f64;
            let h = self.sample(t);
            let r = hermiticity_residual(&h);
            if r > HERMITIAN_TOL {
                return Err(NogpError::NonHermitianSample {
                    time: t,
                    residual: r,
                });
            }
            herm = herm.max(r);
            periodic = periodic.max(max_abs_diff(&h, &self.sample(t + self.period)));
        }
        Ok((herm, periodic))
    }
}

/// Uniform grid `t_i = i * t_end / steps`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(NogpError::InvalidParameter(
                "step count must be >= 1".into(),
            ));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(NogpError::InvalidParameter(format!(
                "grid end must be positive, got {t_end}"
            )));
        }
        Ok(Self { t_end, steps })
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_end * i as f64 / self.steps as f64
    }

    /// Midpoint of step `i` (between `t_i` and `t_{i+1}`).
    pub fn midpoint(&self, i: usize) -> f64 {
        self.t_end * (i as f64 + 0.5) / self.steps as f64
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.time(i)).collect()
    }
}

/// Samples `U(t_i, 0)` on a uniform grid.
#[derive(Debug, Clone)]
pub struct PropagatorGrid {
    grid: TimeGrid,
    unitaries: Vec<ComplexMatrix>,
}

impl PropagatorGrid {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn step_count(&self) -> usize {
        self.grid.steps
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].nrows()
    }

    /// `U(t_i, 0)` for all grid points.
    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn at(&self, i: usize) -> &ComplexMatrix {
        &self.unitaries[i]
    }

    /// `U(t_end, 0)`.
    pub fn final_unitary(&self) -> &ComplexMatrix {
        self.unitaries.last().expect("grid is never empty")
    }

    /// `U(0, t_i) = U(t_i, 0)^dagger`.
    pub fn backward(&self, i: usize) -> ComplexMatrix {
        self.unitaries[i].adjoint()
    }
}

/// Propagator over one period with `steps` exponential-midpoint steps.
pub fn evolve(h: &DrivenHamiltonian, steps: usize) -> Result<PropagatorGrid> {
    evolve_over(h, h.period(), steps)
}

/// Propagator over `[0, t_end]`.
pub fn evolve_over(h: &DrivenHamiltonian, t_end: f64, steps: usize) -> Result<PropagatorGrid> {
    let grid = TimeGrid::new(t_end, steps)?;
    let dt = grid.dt();
    let mut unitaries = Vec::with_capacity(grid.len());
    unitaries.push(identity(h.dim()));
    for i in 0..steps {
        let tm = grid.midpoint(i);
        let hm = h.sample(tm);
        let residual = hermiticity_residual(&hm);
        if residual > HERMITIAN_TOL {
            return Err(NogpError::NonHermitianSample { time: tm, residual });
        }
        let step = exp_hermitian(&hm, dt);
        let next = step * &unitaries[i];
        unitaries.push(next);
    }
    Ok(PropagatorGrid { grid, unitaries })
}

/// Truncated Dyson series
/// `I + sum_{m <= order} (-i)^m int_{t > t_1 > ... > t_m > 0} H(t_1) ... H(t_m)`
/// with every nested integral done by cumulative trapezoid on `substeps`
/// intervals. Independent of the exponential integrator; meant as an oracle.
///
/// # Panics
/// If `order < 1` or `substeps < 10 * order`.
pub fn dyson_series(h: &DrivenHamiltonian, t: f64, order: usize, substeps: usize) -> ComplexMatrix {
    assert!(order >= 1, "dyson_series: order must be >= 1");
    assert!(
        substeps >= 10 * order,
        "dyson_series: need substeps >= 10 * order"
    );
    let d = h.dim();
    let step = t / substeps as f64;
    let samples: Vec<ComplexMatrix> = (0..=substeps).map(|k| h.sample(step * k as f64)).collect();

    let mut result = identity(d);
    let mut previous: Vec<ComplexMatrix> = vec![identity(d); substeps + 1];
    let mut coeff = C64::new(1.0, 0.0);
    for _ in 0..order {
        let integrand: Vec<ComplexMatrix> = samples
            .iter()
            .zip(&previous)
            .map(|(hk, sk)| hk * sk)
            .collect();
        let mut current = Vec::with_capacity(substeps + 1);
        current.push(ComplexMatrix::zeros(d, d));
        for k in 1..=substeps {
            let inc = (&integrand[k - 1] + &integrand[k]).scale(0.5 * step);
            let next = &current[k - 1] + inc;
            current.push(next);
        }
        coeff *= C64::new(0.0, -1.0);
        result += current[substeps].clone() * coeff;
        previous = current;
    }
    result
}

/// `X(t_i) = U(0, t_i) X_0 U(t_i, 0)` on the propagator grid.
pub fn heisenberg_evolve(p: &PropagatorGrid, x0: &Observable) -> Result<Vec<Observable>> {
    if x0.dim() != p.dim() {
        return Err(NogpError::DimensionMismatch {
            expected: p.dim(),
            found: x0.dim(),
        });
    }
    p.unitaries()
        .iter()
        .map(|u| Observable::with_tolerance(u.adjoint() * x0.matrix() * u, 1e-10))
        .collect()
}

/// `max_j max_abs(U(0,T) E_j U(T,0) - E_j)`; zero for a cyclic observable.
pub fn cyclicity_residual(p: &PropagatorGrid, s: &SpectralDecomposition) -> Result<f64> {
    if s.dim() != p.dim() {
        return Err(NogpError::DimensionMismatch {
            expected: p.dim(),
            found: s.dim(),
        });
    }
    let u = p.final_unitary();
    Ok(s.projections()
        .iter()
        .map(|e| max_abs_diff(&(u.adjoint() * e * u), e))
        .fold(0.0_f64, f64::max))
}
