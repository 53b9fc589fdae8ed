//! Test-side oracles, written without the library's numerics.
#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use nogp_core::linalg::{
    c, ComplexMatrix, EigenBasisPartition, Observable, SpectralDecomposition, C64,
};
use nogp_core::propagator::DrivenHamiltonian;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// High-precision reference values (50-digit arithmetic).
pub mod fixtures {
    /// `xi` at `E = 0`, i.e. the completed zeta at `s = 1/2`.
    pub const XI_AT_ZERO: f64 = 0.497_120_778_188_314_109_912_773_739_685;
    /// `Phi(0)` summed to 200 terms.
    pub const PHI_AT_ZERO: f64 = 0.893_393_800_934_246_888_173_969_334_109;
    /// First three zeros on the critical line.
    pub const ZEROS: [f64; 3] = [
        14.134_725_141_734_693_790_457_251_983_561_7,
        21.022_039_638_771_554_992_628_479_593_896_5,
        25.010_857_580_145_688_763_213_790_992_564,
    ];
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex_matrix(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let a = random_complex_matrix(rng, d);
    (&a + a.adjoint()).scale(0.5)
}

/// Modified Gram-Schmidt on a random complex matrix.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let mut q = random_complex_matrix(rng, d);
    for k in 0..d {
        for j in 0..k {
            let proj: C64 = q.column(j).dotc(&q.column(k));
            let qj = q.column(j).into_owned();
            let mut col = q.column_mut(k);
            col -= qj * proj;
        }
        let n = q.column(k).norm();
        q.column_mut(k).unscale_mut(n);
    }
    q
}

/// Cyclic Jacobi on the real symmetric embedding `[[Re, -Im], [Im, Re]]`.
/// Returns the `2d` real eigenvalues (each complex eigenvalue twice) and the
/// real eigenvectors as columns.
pub fn jacobi_real_embedding(h: &ComplexMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let d = h.nrows();
    let n = 2 * d;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..d {
        for k in 0..d {
            let z = h[(i, k)];
            a[(i, k)] = z.re;
            a[(i + d, k + d)] = z.re;
            a[(i, k + d)] = -z.im;
            a[(i + d, k)] = z.im;
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = cs * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

/// Eigenvalues of a Hermitian matrix in ascending order, via the embedding.
pub fn jacobi_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let (mut ev, _) = jacobi_real_embedding(h);
    ev.sort_by(|a, b| a.total_cmp(b));
    ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Spectral projector onto eigenvalues within `tol` of `lambda`.
pub fn jacobi_projector(h: &ComplexMatrix, lambda: f64, tol: f64) -> ComplexMatrix {
    let d = h.nrows();
    let (ev, v) = jacobi_real_embedding(h);
    let mut p = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for (k, &e) in ev.iter().enumerate() {
        if (e - lambda).abs() <= tol {
            let col = v.column(k);
            p += col * col.transpose();
        }
    }
    ComplexMatrix::from_fn(d, d, |i, k| c(p[(i, k)], p[(i + d, k)]))
}

/// `exp(M)` by scaling and squaring with a 24-term Taylor series.
pub fn expm(m: &ComplexMatrix) -> ComplexMatrix {
    let norm: f64 = m.iter().map(|z| z.norm()).sum();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let a = m.scale(1.0 / 2f64.powi(squarings as i32));
    let d = m.nrows();
    let mut term = ComplexMatrix::identity(d, d);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &a / c(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(-i H tau)` through [`expm`].
pub fn expm_hermitian(h: &ComplexMatrix, tau: f64) -> ComplexMatrix {
    expm(&(h * c(0.0, -tau)))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(z)` (Lanczos, with reflection for `Re z < 1/2`).
pub fn ln_gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        let pi = c(PI, 0.0);
        return pi.ln() - (pi * z).sin().ln() - ln_gamma(c(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = c(LANCZOS[0], 0.0);
    for (i, &coef) in LANCZOS.iter().enumerate().skip(1) {
        x += coef / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    c(0.5 * (2.0 * PI).ln(), 0.0) + (z + 0.5) * t.ln() - t + x.ln()
}

/// `zeta(s)` by Euler-Maclaurin with `N = 30` and ten Bernoulli corrections.
pub fn zeta(s: C64) -> C64 {
    const B2K: [f64; 10] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
        43867.0 / 798.0,
        -174611.0 / 330.0,
    ];
    let n = 30.0_f64;
    let pow = |base: f64, e: C64| (e * base.ln()).exp();
    let mut sum = c(0.0, 0.0);
    for k in 1..30 {
        sum += pow(k as f64, -s);
    }
    sum += pow(n, c(1.0, 0.0) - s) / (s - 1.0) + pow(n, -s) * 0.5;
    let mut rising = s;
    let mut fact = 2.0_f64;
    for (k, &b) in B2K.iter().enumerate() {
        let k = k + 1;
        sum += rising * b / fact * pow(n, -s - (2 * k - 1) as f64);
        rising = rising * (s + (2 * k - 1) as f64) * (s + (2 * k) as f64);
        fact *= ((2 * k + 1) * (2 * k + 2)) as f64;
    }
    sum
}

/// `1/2 s (s-1) pi^{-s/2} Gamma(s/2) zeta(s)` at `s = 1/2 + iE`.
pub fn completed_zeta(e: f64) -> f64 {
    let s = c(0.5, e);
    let log_part = -(s / 2.0) * PI.ln() + ln_gamma(s / 2.0);
    (s * (s - 1.0) * 0.5 * log_part.exp() * zeta(s)).re
}

/// Random cyclic system `U(t) = e^{-i K1 a(t)} e^{-i K2 b(t)} e^{-i K3 g(t)}`
/// with integer spectra for `K1, K2`, `a(T) = b(T) = 2 pi`, and `K3`
/// block-diagonal for the partition of `X0 = diag(0, 0, 1, 2)`, so
/// `U(T) = e^{-i K3}` commutes with `X0`.
#[derive(Clone)]
pub struct CyclicSystem {
    pub period: f64,
    q1: ComplexMatrix,
    d1: Vec<f64>,
    q2: ComplexMatrix,
    d2: Vec<f64>,
    k3: ComplexMatrix,
}

impl CyclicSystem {
    pub fn random(seed: u64) -> Self {
        let mut r = rng(seed);
        let q1 = random_unitary(&mut r, 4);
        let q2 = random_unitary(&mut r, 4);
        let d1 = (0..4).map(|_| r.random_range(-1..=1) as f64).collect();
        let d2 = (0..4).map(|_| r.random_range(0..=1) as f64).collect();
        let mut k3 = ComplexMatrix::zeros(4, 4);
        let b = random_hermitian(&mut r, 2);
        k3.view_mut((0, 0), (2, 2)).copy_from(&b);
        k3[(2, 2)] = c(r.random_range(-1.0..1.0), 0.0);
        k3[(3, 3)] = c(r.random_range(-1.0..1.0), 0.0);
        Self {
            period: 1.0,
            q1,
            d1,
            q2,
            d2,
            k3,
        }
    }

    fn rates(&self, t: f64) -> ([f64; 3], [f64; 3]) {
        let w = 2.0 * PI / self.period;
        let x = t / self.period;
        let s = (2.0 * PI * x).sin();
        let co = (2.0 * PI * x).cos();
        let a = 2.0 * PI * x - s;
        let b = 2.0 * PI * x + 0.5 * (1.0 - co);
        let g = x - s / (2.0 * PI);
        let da = w * (1.0 - co);
        let db = w * (1.0 + 0.5 * s);
        let dg = (1.0 - co) / self.period;
        ([a, b, g], [da, db, dg])
    }

    fn spectral_exp(q: &ComplexMatrix, d: &[f64], angle: f64) -> ComplexMatrix {
        let diag = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d.len(),
            d.iter().map(|&x| C64::from_polar(1.0, -x * angle)),
        ));
        q * diag * q.adjoint()
    }

    fn k(q: &ComplexMatrix, d: &[f64]) -> ComplexMatrix {
        let diag = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d.len(),
            d.iter().map(|&x| c(x, 0.0)),
        ));
        q * diag * q.adjoint()
    }

    /// `U(t, 0)` in closed form.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let ([a, b, g], _) = self.rates(t);
        Self::spectral_exp(&self.q1, &self.d1, a)
            * Self::spectral_exp(&self.q2, &self.d2, b)
            * expm_hermitian(&self.k3, g)
    }

    /// `H = i U' U^dagger = a' K1 + b' A K2 A^dagger + g' (AB) K3 (AB)^dagger`.
    pub fn hamiltonian_at(&self, t: f64) -> ComplexMatrix {
        let ([a, b, _], [da, db, dg]) = self.rates(t);
        let ea = Self::spectral_exp(&self.q1, &self.d1, a);
        let eb = Self::spectral_exp(&self.q2, &self.d2, b);
        let ab = &ea * &eb;
        let k1 = Self::k(&self.q1, &self.d1);
        let k2 = Self::k(&self.q2, &self.d2);
        let h = k1.scale(da)
            + (&ea * k2 * ea.adjoint()).scale(db)
            + (&ab * &self.k3 * ab.adjoint()).scale(dg);
        (&h + h.adjoint()).scale(0.5)
    }

    pub fn hamiltonian(&self) -> DrivenHamiltonian {
        let me = self.clone();
        DrivenHamiltonian::new("cyclic-4", self.period, move |t| me.hamiltonian_at(t)).unwrap()
    }

    pub fn observable() -> Observable {
        Observable::diagonal(&[0.0, 0.0, 1.0, 2.0]).unwrap()
    }

    pub fn spectral() -> SpectralDecomposition {
        let s = nogp_core::linalg::spectral_decompose_default(&Self::observable()).unwrap();
        s.with_basis(EigenBasisPartition::standard(vec![2, 1, 1]).unwrap())
            .unwrap()
    }
}
