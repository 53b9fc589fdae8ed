//! The completed zeta function on the critical line,
//! `xi(E) = int_0^inf Phi(t) cos(E t / 2) dt` with
//! `Phi(t) = 2 pi e^{5t/4} sum_n (2 pi e^t n^2 - 3) n^2 e^{-pi n^2 e^t}`,
//! and its real zeros.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NogpError, Result};

/// Partial sum of `Phi(t)` over `n = 1..=terms` and a bound on the omitted tail.
///
/// Terms are bounded by `2 pi e^{5t/4} 2a n^4 e^{-a n^2}` with `a = pi e^t`;
/// successive bounds shrink by at least
/// `r = ((N+2)/(N+1))^4 e^{-a(2N+3)}` past `n = N + 1`, so the tail is at most
/// the first omitted bound over `1 - r`. Summation stops early once the
/// remaining terms underflow.
pub fn phi(t: f64, terms: usize) -> (f64, f64) {
    assert!(
        t >= 0.0 && terms >= 1,
        "phi needs t >= 0 and at least one term"
    );
    let a = PI * t.exp();
    let pre = 2.0 * PI * (1.25 * t).exp();
    let mut sum = 0.0;
    for n in 1..=terms {
        let n2 = (n * n) as f64;
        let expo = a * n2;
        if expo > 745.0 {
            break;
        }
        sum += (2.0 * a * n2 - 3.0) * n2 * (-expo).exp();
    }
    let m = (terms + 1) as f64;
    let r = ((m + 1.0) / m).powi(4) * (-a * (2.0 * m + 1.0)).exp();
    let tail = pre * 2.0 * a * m.powi(4) * (-a * m * m).exp() / (1.0 - r);
    (pre * sum, tail)
}

/// Bound on `int_{t_max}^inf Phi(t) dt`.
///
/// With `u = e^t`, `Phi <= 2 pi u^{5/4} 2 pi u e^{-pi u} (1 + q)` where `q`
/// bounds the relative weight of `n >= 2`; the `u` integral of
/// `u^{5/4} e^{-pi u}` past `u_0` is at most `u_0^{5/4} e^{-pi u_0} / (pi - 5/(4 u_0))`.
pub fn integral_tail_bound(t_max: f64) -> f64 {
    let u0 = t_max.exp();
    let (_, q) = phi(t_max, 1);
    let lead = 4.0 * PI * PI * u0.powf(1.25) * (-PI * u0).exp() / (PI - 1.25 / u0);
    let base = 2.0 * PI * (1.25 * t_max).exp() * 2.0 * PI * u0 * (-PI * u0).exp();
    let ratio = if base > 0.0 { q / base } else { 0.0 };
    lead * (1.0 + ratio)
}

/// Quadrature settings for [`xi`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiConfig {
    pub t_max: f64,
    /// Minimum number of panels on `[0, t_max]`.
    pub panels: usize,
    /// Series terms of `Phi`.
    pub terms: usize,
    /// Gauss-Legendre nodes per panel; a rule with two thirds as many nodes
    /// supplies the quadrature error estimate.
    pub order: usize,
    /// Required `err_bound`; panels double up to `max_panels` to meet it.
    pub tol: Option<f64>,
    pub max_panels: usize,
}

impl Default for XiConfig {
    fn default() -> Self {
        Self {
            t_max: 12.0,
            panels: 8,
            terms: 64,
            order: 24,
            tol: Some(1e-10),
            max_panels: 1 << 14,
        }
    }
}

impl XiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(NogpError::InvalidParameter(format!(
                "t_max = {}",
                self.t_max
            )));
        }
        if self.panels < 8 {
            return Err(NogpError::InvalidParameter(format!(
                "at least 8 panels required, got {}",
                self.panels
            )));
        }
        if self.terms == 0 || self.order < 3 {
            return Err(NogpError::InvalidParameter(
                "need terms >= 1 and order >= 3".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiEvaluation {
    pub e: f64,
    pub value: f64,
    pub series_terms: usize,
    pub quad_panels: usize,
    pub t_max: f64,
    /// Series truncation, integral tail, quadrature estimate and a rounding
    /// allowance, summed.
    pub err_bound: f64,
}

/// Reusable evaluator holding the quadrature rules of a [`XiConfig`].
#[derive(Debug, Clone)]
pub struct XiEvaluator {
    cfg: XiConfig,
    high: Vec<(f64, f64)>,
    low: Vec<(f64, f64)>,
}

impl XiEvaluator {
    pub fn new(cfg: XiConfig) -> Result<Self> {
        cfg.validate()?;
        let rule = |n: usize| {
            GaussLegendre::new(n)
                .map(|g| g.as_node_weight_pairs().to_vec())
                .map_err(|e| NogpError::InvalidParameter(e.to_string()))
        };
        Ok(Self {
            cfg,
            high: rule(cfg.order)?,
            low: rule((2 * cfg.order / 3).max(2))?,
        })
    }

    pub fn config(&self) -> &XiConfig {
        &self.cfg
    }

    /// Panels needed to keep the width at or below `min(1, pi/|E|)`.
    pub fn panels_for(&self, e: f64) -> usize {
        let width = (PI / e.abs()).min(1.0);
        let needed = (self.cfg.t_max / width).ceil() as usize;
        needed.max(self.cfg.panels)
    }

    fn integrate(&self, e: f64, panels: usize) -> XiEvaluation {
        let cfg = &self.cfg;
        let h = cfg.t_max / panels as f64;
        let mut value = 0.0;
        let mut series = 0.0;
        let mut quad = 0.0;
        let mut magnitude = 0.0;
        for p in 0..panels {
            let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let mut rule_sum = |rule: &[(f64, f64)], track: bool| -> f64 {
                let mut s = 0.0;
                for &(x, w) in rule {
                    let t = mid + half * x;
                    let (f, tail) = phi(t, cfg.terms);
                    let term = w * half * f * (0.5 * e * t).cos();
                    if track {
                        series += w * half * tail;
                        magnitude += (w * half * f).abs();
                    }
                    s += term;
                }
                s
            };
            let hi = rule_sum(&self.high, true);
            let lo = rule_sum(&self.low, false);
            value += hi;
            quad += (hi - lo).abs();
        }
        let rounding = 100.0 * f64::EPSILON * magnitude;
        XiEvaluation {
            e,
            value,
            series_terms: cfg.terms,
            quad_panels: panels,
            t_max: cfg.t_max,
            err_bound: series + integral_tail_bound(cfg.t_max) + quad + rounding,
        }
    }

    /// `xi(E)`; with a tolerance set, panels double until `err_bound <= tol`.
    pub fn eval(&self, e: f64) -> Result<XiEvaluation> {
        if !e.is_finite() {
            return Err(NogpError::InvalidParameter(format!("E = {e}")));
        }
        let mut panels = self.panels_for(e);
        loop {
            let ev = self.integrate(e, panels);
            match self.cfg.tol {
                Some(tol) if ev.err_bound > tol => {
                    if panels * 2 > self.cfg.max_panels {
                        return Err(NogpError::ToleranceNotMet {
                            err_bound: ev.err_bound,
                            tol,
                            panels,
                        });
                    }
                    panels *= 2;
                }
                _ => return Ok(ev),
            }
        }
    }

    /// Single evaluation on `max(panels, panels_for(e))` panels, without the
    /// doubling loop.
    pub fn eval_with_panels(&self, e: f64, panels: usize) -> XiEvaluation {
        self.integrate(e, panels.max(self.panels_for(e)))
    }

    /// Evaluates a grid in parallel; results keep the input order.
    pub fn eval_grid(&self, es: &[f64]) -> Result<Vec<XiEvaluation>> {
        es.par_iter().map(|&e| self.eval(e)).collect()
    }
}

/// `xi(E)` under `cfg`.
pub fn xi(e: f64, cfg: &XiConfig) -> Result<XiEvaluation> {
    XiEvaluator::new(*cfg)?.eval(e)
}

/// A sign-change bracket refined by bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroBracket {
    /// Scan-grid cell in which the sign change was seen.
    pub grid_lo: f64,
    pub grid_hi: f64,
    /// Refined bracket, `xi(lo) xi(hi) < 0`.
    pub lo: f64,
    pub hi: f64,
    pub root: f64,
    pub tol: f64,
}

/// Two sign changes (or a hidden pair) inside one scan step; the cell was
/// rescanned at a tenth of the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTooCoarse {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ZeroScan {
    pub roots: Vec<ZeroBracket>,
    pub warnings: Vec<StepTooCoarse>,
}

/// Default bisection tolerance in `E`.
pub const DEFAULT_ROOT_TOL: f64 = 1e-8;

/// Uniform grid `lo, lo + step, ...` ending exactly at `hi`.
pub fn scan_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if !(lo < hi) {
        return Vec::new();
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut es: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    if hi - es[n] > 1e-9 * step {
        es.push(hi);
    } else {
        es[n] = hi;
    }
    es
}

fn sign_changes(es: &[f64], vs: &[f64]) -> Vec<(f64, f64, f64, f64)> {
    (0..es.len() - 1)
        .filter(|&k| (vs[k] < 0.0) != (vs[k + 1] < 0.0))
        .map(|k| (es[k], es[k + 1], vs[k], vs[k + 1]))
        .collect()
}

fn bisect(
    ev: &XiEvaluator,
    (mut lo, mut hi, mut vlo, _): (f64, f64, f64, f64),
    tol: f64,
) -> Result<(f64, f64)> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let vm = ev.eval(mid)?.value;
        if (vm < 0.0) == (vlo < 0.0) {
            lo = mid;
            vlo = vm;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Sign-change brackets of `xi` on `[e_lo, e_hi]`, refined to `hi - lo <= tol`.
///
/// Every cell is also rescanned at `step / 10`; a cell whose fine scan shows
/// more than one sign change, or a different count than its end points, is
/// reported as [`StepTooCoarse`] and bracketed on the fine grid.
pub fn find_zeros(e_lo: f64, e_hi: f64, step: f64, tol: f64, cfg: &XiConfig) -> Result<ZeroScan> {
    if !(step > 0.0) || !(tol > 0.0) {
        return Err(NogpError::InvalidParameter(format!(
            "step = {step} and tol = {tol} must be positive"
        )));
    }
    if e_lo > e_hi {
        return Err(NogpError::InvalidParameter(format!(
            "empty range [{e_lo}, {e_hi}]"
        )));
    }
    let es = scan_grid(e_lo, e_hi, step);
    if es.len() < 2 {
        return Ok(ZeroScan::default());
    }
    let ev = XiEvaluator::new(*cfg)?;
    let vs: Vec<f64> = ev.eval_grid(&es)?.iter().map(|x| x.value).collect();

    let cells: Vec<Vec<f64>> = (0..es.len() - 1)
        .map(|k| scan_grid(es[k], es[k + 1], step / 10.0))
        .collect();
    let fine: Vec<f64> = cells.iter().flatten().copied().collect();
    let fine_values = ev.eval_grid(&fine)?;
    let mut scan = ZeroScan::default();
    let mut brackets = Vec::new();
    let mut offset = 0;
    for (k, cell) in cells.iter().enumerate() {
        let fv: Vec<f64> = fine_values[offset..offset + cell.len()]
            .iter()
            .map(|x| x.value)
            .collect();
        offset += cell.len();
        let changes = sign_changes(cell, &fv);
        let coarse = usize::from((vs[k] < 0.0) != (vs[k + 1] < 0.0));
        if changes.len() > 1 || changes.len() != coarse {
            scan.warnings.push(StepTooCoarse {
                lo: es[k],
                hi: es[k + 1],
                step,
            });
            brackets.extend(changes.into_iter().map(|ch| (es[k], es[k + 1], ch)));
        } else if coarse == 1 {
            brackets.push((es[k], es[k + 1], (es[k], es[k + 1], vs[k], vs[k + 1])));
        }
    }
    for (grid_lo, grid_hi, br) in brackets {
        let (lo, hi) = bisect(&ev, br, tol)?;
        scan.roots.push(ZeroBracket {
            grid_lo,
            grid_hi,
            lo,
            hi,
            root: 0.5 * (lo + hi),
            tol,
        });
    }
    scan.roots.sort_by(|x, y| x.root.total_cmp(&y.root));
    scan.roots.dedup_by(|x, y| (x.root - y.root).abs() <= tol);
    Ok(scan)
}
