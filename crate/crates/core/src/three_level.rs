//! Closed forms for the driven three-level system
//! `H(t) = Omega(t) (|2><b| + |b><2|)`, `|b> = conj(w0)|0> + conj(w1)|1>`.
//!
//! With `int_0^T Omega = pi` the dark state `|d> = -w1|0> + w0|1>` is left
//! alone while `|b>, |2>` undergo a full Rabi flip, so the observable
//! `lambda_1 (|0><0| + |1><1|) + lambda_2 |2><2|` is cyclic and its phases
//! are known exactly. These serve as golden references for the engine.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{NogpError, Result};
use crate::linalg::{
    c, spectral_decompose_default, ComplexMatrix, EigenBasisPartition, Observable,
    SpectralDecomposition, C64,
};
use crate::propagator::DrivenHamiltonian;

/// Pulse envelopes with `int_0^T Omega = pi` (except [`Pulse::Off`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pulse {
    /// `pi / T`
    #[serde(rename = "const")]
    Constant,
    /// `(2 pi / T) sin^2(pi t / T)`
    Sin2,
    /// `(12 pi / T) x (1 - x)^2` with `x = t / T`: continuous, vanishing at
    /// both ends, peaked at `x = 1/3`.
    Bump,
    /// `Omega = 0`; not a valid gate pulse.
    Off,
}

impl Pulse {
    pub const GATE_PULSES: [Pulse; 3] = [Pulse::Constant, Pulse::Sin2, Pulse::Bump];

    pub fn name(self) -> &'static str {
        match self {
            Pulse::Constant => "const",
            Pulse::Sin2 => "sin2",
            Pulse::Bump => "bump",
            Pulse::Off => "off",
        }
    }

    /// `Omega(t)`, extended periodically.
    pub fn value(self, t: f64, period: f64) -> f64 {
        let x = (t / period).rem_euclid(1.0);
        match self {
            Pulse::Constant => PI / period,
            Pulse::Sin2 => 2.0 * PI / period * (PI * x).sin().powi(2),
            Pulse::Bump => 12.0 * PI / period * x * (1.0 - x).powi(2),
            Pulse::Off => 0.0,
        }
    }

    /// Pulse area `Phi(t) = int_0^t Omega`.
    pub fn area(self, t: f64, period: f64) -> f64 {
        let cycles = (t / period).floor();
        let x = t / period - cycles;
        let full = match self {
            Pulse::Off => 0.0,
            _ => PI,
        };
        let partial = match self {
            Pulse::Constant => PI * x,
            Pulse::Sin2 => PI * x - (2.0 * PI * x).sin() / 2.0,
            Pulse::Bump => 12.0 * PI * (x * x / 2.0 - 2.0 * x.powi(3) / 3.0 + x.powi(4) / 4.0),
            Pulse::Off => 0.0,
        };
        cycles * full + partial
    }
}

impl fmt::Display for Pulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pulse {
    type Err = NogpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "const" | "constant" => Ok(Pulse::Constant),
            "sin2" => Ok(Pulse::Sin2),
            "bump" => Ok(Pulse::Bump),
            "off" => Ok(Pulse::Off),
            other => Err(NogpError::InvalidParameter(format!(
                "unknown pulse '{other}'"
            ))),
        }
    }
}

/// Composite Simpson rule on `[a, b]` with an even number of intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|k| {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            w * f(a + h * k as f64)
        })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelParams {
    pub omega0: C64,
    pub omega1: C64,
    pub pulse: Pulse,
    pub period: f64,
    /// Mixing angle of the block-1 basis.
    pub phi: f64,
    /// Relative phase of the block-1 basis.
    pub varphi: f64,
}

impl ThreeLevelParams {
    pub fn new(omega0: C64, omega1: C64, pulse: Pulse, period: f64) -> Result<Self> {
        let p = Self {
            omega0,
            omega1,
            pulse,
            period,
            phi: 0.0,
            varphi: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// `w0 = e^{i vartheta} sin(theta/2)`, `w1 = -cos(theta/2)`, standard
    /// block-1 basis. The resulting block-1 phase is the gate `n . sigma`.
    pub fn for_gate(theta: f64, vartheta: f64, pulse: Pulse, period: f64) -> Result<Self> {
        let (w0, w1) = gate_amplitudes(theta, vartheta);
        Self::new(w0, w1, pulse, period)
    }

    pub fn with_basis_angles(mut self, phi: f64, varphi: f64) -> Self {
        self.phi = phi;
        self.varphi = varphi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let norm = self.omega0.norm_sqr() + self.omega1.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(NogpError::InvalidParameter(format!(
                "|w0|^2 + |w1|^2 = {norm}, expected 1"
            )));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(NogpError::InvalidParameter(format!(
                "period must be positive, got {}",
                self.period
            )));
        }
        let area = simpson(|t| self.pulse.value(t, self.period), 0.0, self.period, 2000);
        if (area - PI).abs() > 1e-10 {
            return Err(NogpError::InvalidParameter(format!(
                "pulse area {area} differs from pi"
            )));
        }
        Ok(())
    }

    /// `|b> = conj(w0)|0> + conj(w1)|1>`.
    pub fn bright(&self) -> DVector<C64> {
        DVector::from_vec(vec![self.omega0.conj(), self.omega1.conj(), c(0., 0.)])
    }

    /// `|d> = -w1|0> + w0|1>`.
    pub fn dark(&self) -> DVector<C64> {
        DVector::from_vec(vec![-self.omega1, self.omega0, c(0., 0.)])
    }

    /// `|2><b| + |b><2|`.
    pub fn coupling(&self) -> ComplexMatrix {
        let b = self.bright();
        let e2 = DVector::from_vec(vec![c(0., 0.), c(0., 0.), c(1., 0.)]);
        &e2 * b.adjoint() + &b * e2.adjoint()
    }

    /// `lambda_1 (|0><0| + |1><1|) + lambda_2 |2><2|`.
    pub fn observable(lambda1: f64, lambda2: f64) -> Result<Observable> {
        Observable::diagonal(&[lambda1, lambda1, lambda2])
    }

    /// Block 1: `cos(phi/2)|0> + e^{i varphi} sin(phi/2)|1>`,
    /// `-e^{-i varphi} sin(phi/2)|0> + cos(phi/2)|1>`; block 2: `e^{i phi}|2>`.
    pub fn initial_basis(&self) -> Result<EigenBasisPartition> {
        let (ch, sh) = ((self.phi / 2.0).cos(), (self.phi / 2.0).sin());
        let ep = C64::from_polar(1.0, self.varphi);
        let z = c(0., 0.);
        let m = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                c(ch, 0.),
                -ep.conj() * sh,
                z,
                ep * sh,
                c(ch, 0.),
                z,
                z,
                z,
                C64::from_polar(1.0, self.phi),
            ],
        );
        EigenBasisPartition::new(m, vec![2, 1])
    }

    /// Spectral decomposition of [`Self::observable`] carrying
    /// [`Self::initial_basis`].
    pub fn spectral(&self, lambda1: f64, lambda2: f64) -> Result<SpectralDecomposition> {
        if lambda1 >= lambda2 {
            return Err(NogpError::InvalidParameter(
                "expected lambda1 < lambda2 so block order is [2, 1]".into(),
            ));
        }
        let s = spectral_decompose_default(&Self::observable(lambda1, lambda2)?)?;
        s.with_basis(self.initial_basis()?)
    }
}

/// `(w0, w1) = (e^{i vartheta} sin(theta/2), -cos(theta/2))`.
pub fn gate_amplitudes(theta: f64, vartheta: f64) -> (C64, C64) {
    (
        C64::from_polar((theta / 2.0).sin(), vartheta),
        c(-(theta / 2.0).cos(), 0.),
    )
}

/// `H(t) = Omega(t) (|2><b| + |b><2|)`.
pub fn build_hamiltonian(p: &ThreeLevelParams) -> DrivenHamiltonian {
    let coupling = p.coupling();
    let pulse = p.pulse;
    let period = p.period;
    DrivenHamiltonian::new(format!("three-level/{pulse}"), period, move |t| {
        coupling.scale(pulse.value(t, period))
    })
    .expect("three-level Hamiltonian is well formed")
}

/// `U(t,0) = |d><d| + cos Phi (|b><b| + |2><2|) - i sin Phi (|2><b| + |b><2|)`.
pub fn closed_form_propagator(p: &ThreeLevelParams, t: f64) -> ComplexMatrix {
    let phi = p.pulse.area(t, p.period);
    let b = p.bright();
    let d = p.dark();
    let e2 = DVector::from_vec(vec![c(0., 0.), c(0., 0.), c(1., 0.)]);
    let dd = &d * d.adjoint();
    let bb_22 = &b * b.adjoint() + &e2 * e2.adjoint();
    dd + bb_22.scale(phi.cos()) + p.coupling() * c(0., -phi.sin())
}

/// `[[cos t, e^{-i v} sin t], [e^{i v} sin t, -cos t]] = n . sigma`.
pub fn closed_form_g1(theta: f64, vartheta: f64) -> ComplexMatrix {
    let (ct, st) = (theta.cos(), theta.sin());
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            c(ct, 0.),
            C64::from_polar(st, -vartheta),
            C64::from_polar(st, vartheta),
            c(-ct, 0.),
        ],
    )
}

/// Block-1 phase for arbitrary amplitudes and basis angles:
/// `[[g11, conj(g21)], [g21, -g11]]` with
/// `g11 = (|w1|^2 - |w0|^2) cos phi - (e^{-i vp} w0 conj(w1) + e^{i vp} conj(w0) w1) sin phi`,
/// `g21 = e^{i vp} (|w0|^2 - |w1|^2) sin phi - 2 w0 conj(w1) cos^2(phi/2)
///        + 2 e^{2 i vp} conj(w0) w1 sin^2(phi/2)`.
pub fn closed_form_g1_general(p: &ThreeLevelParams) -> ComplexMatrix {
    let (w0, w1) = (p.omega0, p.omega1);
    let (phi, vp) = (p.phi, p.varphi);
    let e = C64::from_polar(1.0, vp);
    let diff = w1.norm_sqr() - w0.norm_sqr();
    let g11 =
        c(diff * phi.cos(), 0.) - (e.conj() * w0 * w1.conj() + e * w0.conj() * w1) * phi.sin();
    let g21 = e * (-diff * phi.sin()) - w0 * w1.conj() * (2.0 * (phi / 2.0).cos().powi(2))
        + e * e * w0.conj() * w1 * (2.0 * (phi / 2.0).sin().powi(2));
    ComplexMatrix::from_row_slice(2, 2, &[g11, g21.conj(), g21, -g11])
}

/// The block-2 phase `e^{i pi} = -1`.
pub fn closed_form_g2() -> C64 {
    c(-1.0, 0.0)
}
