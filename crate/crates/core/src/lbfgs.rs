//! Limited-memory BFGS with a strong Wolfe line search.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Sufficient-decrease constant.
pub const WOLFE_C1: f64 = 1e-4;
/// Curvature constant.
pub const WOLFE_C2: f64 = 0.9;

const MAX_BRACKET_STEPS: usize = 40;
const MAX_ZOOM_STEPS: usize = 40;
const MAX_STEP: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LbfgsOptions {
    /// History length `m`.
    pub history: usize,
    pub max_iterations: usize,
    /// Stop once `‖∇f‖₂` is at or below this.
    pub gradient_tolerance: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            history: 10,
            max_iterations: 100,
            gradient_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
}

/// One accepted iterate. Iteration 0 is the starting point with step 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
    pub trace: Vec<IterationRecord>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Probe {
    alpha: f64,
    f: f64,
    slope: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

struct LineSearch<'a, F> {
    f: &'a mut F,
    x0: &'a [f64],
    d: &'a [f64],
    f0: f64,
    slope0: f64,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> LineSearch<'_, F> {
    fn probe(&mut self, alpha: f64) -> Probe {
        let x: Vec<f64> = self.x0.iter().zip(self.d).map(|(x, d)| x + alpha * d).collect();
        let mut g = vec![0.0; x.len()];
        let f = (self.f)(&x, &mut g);
        let slope = dot(&g, self.d);
        Probe { alpha, f, slope, x, g }
    }

    fn armijo_fails(&self, p: &Probe) -> bool {
        p.f > self.f0 + WOLFE_C1 * p.alpha * self.slope0
    }

    fn curvature_holds(&self, p: &Probe) -> bool {
        p.slope.abs() <= -WOLFE_C2 * self.slope0
    }

    fn is_finite(p: &Probe) -> bool {
        p.f.is_finite() && p.g.iter().all(|v| v.is_finite())
    }

    fn run(&mut self, alpha_init: f64) -> Option<Probe> {
        let mut prev = Probe {
            alpha: 0.0,
            f: self.f0,
            slope: self.slope0,
            x: Vec::new(),
            g: Vec::new(),
        };
        let mut alpha = alpha_init;
        for i in 0..MAX_BRACKET_STEPS {
            let cur = self.probe(alpha);
            if !Self::is_finite(&cur) {
                // overshoot into a region where the objective blows up
                alpha = 0.5 * (prev.alpha + alpha);
                if alpha - prev.alpha <= f64::EPSILON * alpha {
                    return None;
                }
                continue;
            }
            if self.armijo_fails(&cur) || (i > 0 && cur.f >= prev.f) {
                return self.zoom(prev, cur);
            }
            if self.curvature_holds(&cur) {
                return Some(cur);
            }
            if cur.slope >= 0.0 {
                return self.zoom(cur, prev);
            }
            if alpha >= MAX_STEP {
                return None;
            }
            alpha = (2.0 * alpha).min(MAX_STEP);
            prev = cur;
        }
        None
    }

    /// `lo` satisfies sufficient decrease and has the lower value of the two.
    fn zoom(&mut self, mut lo: Probe, mut hi: Probe) -> Option<Probe> {
        for _ in 0..MAX_ZOOM_STEPS {
            let width = hi.alpha - lo.alpha;
            if width.abs() <= f64::EPSILON * lo.alpha.abs().max(hi.alpha.abs()) {
                break;
            }
            let alpha = safeguarded_cubic(&lo, &hi);
            let cur = self.probe(alpha);
            if !Self::is_finite(&cur) || self.armijo_fails(&cur) || cur.f >= lo.f {
                hi = cur;
                continue;
            }
            if self.curvature_holds(&cur) {
                return Some(cur);
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
        // accept the best decreasing point found, if any
        (lo.alpha > 0.0 && lo.f < self.f0).then_some(lo)
    }
}

/// Minimizer of the cubic through both end points, kept at least 10% of the
/// interval away from either end.
fn safeguarded_cubic(a: &Probe, b: &Probe) -> f64 {
    let (lo, hi) = if a.alpha < b.alpha { (a, b) } else { (b, a) };
    let width = hi.alpha - lo.alpha;
    let fallback = lo.alpha + 0.5 * width;
    let (f_hi, s_hi) = if hi.f.is_finite() { (hi.f, hi.slope) } else { return fallback };
    let d1 = lo.slope + s_hi - 3.0 * (lo.f - f_hi) / (lo.alpha - hi.alpha);
    let disc = d1 * d1 - lo.slope * s_hi;
    if !(disc >= 0.0) {
        return fallback;
    }
    let d2 = disc.sqrt();
    let t = hi.alpha - width * (s_hi + d2 - d1) / (s_hi - lo.slope + 2.0 * d2);
    let margin = 0.1 * width;
    if t.is_finite() && t >= lo.alpha + margin && t <= hi.alpha - margin {
        t
    } else {
        fallback
    }
}

/// Minimizes `f`, which writes the gradient into its second argument and
/// returns the objective.
pub fn lbfgs_minimize<F>(mut f: F, x0: &[f64], opts: &LbfgsOptions) -> Result<LbfgsResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    if opts.history == 0 || !(opts.gradient_tolerance > 0.0) {
        return Err(Error::InvalidConfig("lbfgs history must be ≥ 1 and tolerance > 0".into()));
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { iterate: x });
    }
    let mut gnorm = norm(&g);
    let mut trace = vec![IterationRecord {
        iteration: 0,
        objective: fx,
        gradient_norm: gnorm,
        step: 0.0,
    }];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.history);
    let mut iterations = 0;

    let termination = loop {
        if gnorm <= opts.gradient_tolerance {
            break Termination::GradientTolerance;
        }
        if iterations >= opts.max_iterations {
            break Termination::MaxIterations;
        }

        let mut d = two_loop(&g, &history);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let alpha_init = if history.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };

        let accepted = LineSearch {
            f: &mut f,
            x0: &x,
            d: &d,
            f0: fx,
            slope0: slope,
        }
        .run(alpha_init);
        let Some(p) = accepted else {
            break Termination::LineSearchFailed;
        };

        let s: Vec<f64> = p.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = p.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * norm(&s) * norm(&y) {
            if history.len() == opts.history {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let step = p.alpha * norm(&d);
        x = p.x;
        g = p.g;
        fx = p.f;
        gnorm = norm(&g);
        iterations += 1;
        trace.push(IterationRecord {
            iteration: iterations,
            objective: fx,
            gradient_norm: gnorm,
            step,
        });
    };

    Ok(LbfgsResult {
        x,
        objective: fx,
        gradient: g,
        iterations,
        termination,
        trace,
    })
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = vec![0.0; history.len()];
    for (i, (s, y, rho)) in history.iter().enumerate().rev() {
        let a = rho * dot(s, &q);
        alphas[i] = a;
        q.iter_mut().zip(y).for_each(|(q, y)| *q -= a * y);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for (i, (s, y, rho)) in history.iter().enumerate() {
        let b = rho * dot(y, &q);
        let a = alphas[i];
        q.iter_mut().zip(s).for_each(|(q, s)| *q += (a - b) * s);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}
