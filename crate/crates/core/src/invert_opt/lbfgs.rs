//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! Two-loop recursion for the search direction and a Moré–Thuente line
//! search for the step. Only steps that decrease the
//! objective are accepted, so the recorded trace is non-increasing.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsConfig {
    /// Number of stored correction pairs.
    pub memory: usize,
    pub max_iters: usize,
    /// Stop once `‖∇f‖∞` falls to this value.
    pub gtol: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Function evaluations allowed per line search.
    pub max_linesearch: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self { memory: 10, max_iters: 500, gtol: 1e-8, c1: 1e-4, c2: 0.9, max_linesearch: 25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub f: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// Objective at the start point followed by one entry per accepted step.
    pub trace: Vec<TracePoint>,
}

impl LbfgsResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::GradientTolerance
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + t * di).collect()
}

#[derive(Clone)]
struct Sample {
    t: f64,
    f: f64,
    g: Vec<f64>,
    gtd: f64,
}

/// One endpoint of the Moré–Thuente interval of uncertainty: step, value, slope.
#[derive(Clone, Copy)]
struct Point {
    t: f64,
    f: f64,
    d: f64,
}

/// Safeguarded step update. `x` is the best step so far, `y` the other
/// interval end, `p` the latest trial. Updates the interval in place and
/// returns the next trial step.
fn dcstep(x: &mut Point, y: &mut Point, p: Point, bracketed: &mut bool, lo: f64, hi: f64) -> f64 {
    let sgnd = p.d * x.d.signum();
    let next = if p.f > x.f {
        let theta = 3.0 * (x.f - p.f) / (p.t - x.t) + x.d + p.d;
        let s = theta.abs().max(x.d.abs()).max(p.d.abs());
        let mut gamma = s * ((theta / s).powi(2) - (x.d / s) * (p.d / s)).max(0.0).sqrt();
        if p.t < x.t {
            gamma = -gamma;
        }
        let r = ((gamma - x.d) + theta) / (((gamma - x.d) + gamma) + p.d);
        let cubic = x.t + r * (p.t - x.t);
        let quad = x.t + (x.d / ((x.f - p.f) / (p.t - x.t) + x.d)) / 2.0 * (p.t - x.t);
        *bracketed = true;
        if (cubic - x.t).abs() < (quad - x.t).abs() {
            cubic
        } else {
            cubic + (quad - cubic) / 2.0
        }
    } else if sgnd < 0.0 {
        let theta = 3.0 * (x.f - p.f) / (p.t - x.t) + x.d + p.d;
        let s = theta.abs().max(x.d.abs()).max(p.d.abs());
        let mut gamma = s * ((theta / s).powi(2) - (x.d / s) * (p.d / s)).max(0.0).sqrt();
        if p.t > x.t {
            gamma = -gamma;
        }
        let r = ((gamma - p.d) + theta) / (((gamma - p.d) + gamma) + x.d);
        let cubic = p.t + r * (x.t - p.t);
        let secant = p.t + (p.d / (p.d - x.d)) * (x.t - p.t);
        *bracketed = true;
        if (cubic - p.t).abs() > (secant - p.t).abs() {
            cubic
        } else {
            secant
        }
    } else if p.d.abs() < x.d.abs() {
        let theta = 3.0 * (x.f - p.f) / (p.t - x.t) + x.d + p.d;
        let s = theta.abs().max(x.d.abs()).max(p.d.abs());
        let mut gamma = s * ((theta / s).powi(2) - (x.d / s) * (p.d / s)).max(0.0).sqrt();
        if p.t > x.t {
            gamma = -gamma;
        }
        let r = ((gamma - p.d) + theta) / ((gamma + (x.d - p.d)) + gamma);
        let cubic = if r < 0.0 && gamma != 0.0 {
            p.t + r * (x.t - p.t)
        } else if p.t > x.t {
            hi
        } else {
            lo
        };
        let secant = p.t + (p.d / (p.d - x.d)) * (x.t - p.t);
        if *bracketed {
            let t = if (cubic - p.t).abs() < (secant - p.t).abs() { cubic } else { secant };
            let limit = p.t + 0.66 * (y.t - p.t);
            if p.t > x.t {
                t.min(limit)
            } else {
                t.max(limit)
            }
        } else {
            let t = if (cubic - p.t).abs() > (secant - p.t).abs() { cubic } else { secant };
            t.clamp(lo, hi)
        }
    } else if *bracketed {
        let theta = 3.0 * (p.f - y.f) / (y.t - p.t) + y.d + p.d;
        let s = theta.abs().max(y.d.abs()).max(p.d.abs());
        let mut gamma = s * ((theta / s).powi(2) - (y.d / s) * (p.d / s)).max(0.0).sqrt();
        if p.t > y.t {
            gamma = -gamma;
        }
        let r = ((gamma - p.d) + theta) / (((gamma - p.d) + gamma) + y.d);
        p.t + r * (y.t - p.t)
    } else if p.t > x.t {
        hi
    } else {
        lo
    };

    if p.f > x.f {
        *y = p;
    } else {
        if sgnd < 0.0 {
            *y = *x;
        }
        *x = p;
    }
    next
}

struct LineSearch<'a, F> {
    objective: &'a mut F,
    x: &'a [f64],
    d: &'a [f64],
    f0: f64,
    gtd0: f64,
    cfg: &'a LbfgsConfig,
    evals: usize,
}

const XTOL: f64 = 0.1;
const EXTRAP_LO: f64 = 1.1;
const EXTRAP_HI: f64 = 4.0;

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> LineSearch<'_, F> {
    fn eval(&mut self, t: f64) -> Sample {
        self.evals += 1;
        let (f, g) = (self.objective)(&axpy(self.x, t, self.d));
        let gtd = dot(&g, self.d);
        let f = if f.is_nan() { f64::INFINITY } else { f };
        Sample { t, f, g, gtd }
    }

    /// Moré–Thuente search for a strong-Wolfe step. Falls back to the best
    /// sufficient-decrease step seen when the budget runs out; `None` if no
    /// evaluated step decreased the objective.
    fn run(&mut self, t_init: f64) -> Option<Sample> {
        let gtest = self.cfg.c1 * self.gtd0;
        let mut x = Point { t: 0.0, f: self.f0, d: self.gtd0 };
        let mut y = x;
        let mut bracketed = false;
        let mut stage_one = true;
        let mut width = f64::INFINITY;
        let mut width_prev = f64::INFINITY;
        let (mut lo, mut hi) = (0.0, t_init * (1.0 + EXTRAP_HI));
        // smallest step known to give a non-finite objective
        let mut ceiling = f64::INFINITY;
        let mut best: Option<Sample> = None;
        let mut t = t_init;

        while self.evals < self.cfg.max_linesearch {
            let cur = self.eval(t);
            let armijo = cur.f <= self.f0 + t * gtest;
            if armijo && best.as_ref().is_none_or(|b| cur.f < b.f) {
                best = Some(cur.clone());
            }
            if !cur.f.is_finite() {
                ceiling = ceiling.min(t);
                t = x.t + 0.5 * (t - x.t);
                continue;
            }
            if armijo && cur.gtd.abs() <= -self.cfg.c2 * self.gtd0 {
                return Some(cur);
            }
            if bracketed && (t <= lo || t >= hi || hi - lo <= XTOL * hi) {
                break;
            }
            if stage_one && armijo && cur.gtd >= 0.0 {
                stage_one = false;
            }

            let p = Point { t, f: cur.f, d: cur.gtd };
            t = if stage_one && cur.f <= x.f && !armijo {
                // modified function ψ(t) = φ(t) − φ(0) − c1·t·φ'(0)
                let shift = |q: Point| Point { t: q.t, f: q.f - q.t * gtest, d: q.d - gtest };
                let (mut xm, mut ym) = (shift(x), shift(y));
                let next = dcstep(&mut xm, &mut ym, shift(p), &mut bracketed, lo, hi);
                let unshift = |q: Point| Point { t: q.t, f: q.f + q.t * gtest, d: q.d + gtest };
                x = unshift(xm);
                y = unshift(ym);
                next
            } else {
                dcstep(&mut x, &mut y, p, &mut bracketed, lo, hi)
            };

            if bracketed {
                let span = (y.t - x.t).abs();
                if span >= 0.66 * width_prev {
                    t = x.t + 0.5 * (y.t - x.t);
                }
                width_prev = width;
                width = span;
                lo = x.t.min(y.t);
                hi = x.t.max(y.t);
            } else {
                lo = t + EXTRAP_LO * (t - x.t);
                hi = t + EXTRAP_HI * (t - x.t);
            }
            t = t.max(0.0);
            if t >= ceiling {
                t = x.t + 0.5 * (ceiling - x.t);
            }
            if bracketed && (t <= lo || t >= hi || hi - lo <= XTOL * hi) {
                t = x.t;
            }
            if t <= 0.0 {
                break;
            }
        }
        best.filter(|b| b.t > 0.0 && b.f < self.f0)
    }
}

/// Minimizes `objective`, which returns the value and gradient at a point.
/// Non-finite values are treated as infeasible and backtracked from.
pub fn minimize<F>(mut objective: F, x0: Vec<f64>, cfg: &LbfgsConfig) -> LbfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut f, mut g) = objective(&x);
    let mut evaluations = 1;
    let mut trace = vec![TracePoint { f, grad_norm: inf_norm(&g) }];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut iterations = 0;

    let termination = loop {
        if inf_norm(&g) <= cfg.gtol {
            break Termination::GradientTolerance;
        }
        if !f.is_finite() {
            break Termination::LineSearchFailed;
        }
        if iterations >= cfg.max_iters {
            break Termination::MaxIterations;
        }

        let mut d = two_loop(&g, &history);
        let mut gtd = dot(&g, &d);
        if !(gtd < 0.0) {
            history.clear();
            d = g.iter().map(|x| -x).collect();
            gtd = dot(&g, &d);
        }
        let t_init = if history.is_empty() { 1.0 / dot(&d, &d).sqrt() } else { 1.0 };

        let mut ls = LineSearch { objective: &mut objective, x: &x, d: &d, f0: f, gtd0: gtd, cfg, evals: 0 };
        let step = ls.run(t_init);
        evaluations += ls.evals;
        let Some(step) = step else {
            break Termination::LineSearchFailed;
        };

        let s: Vec<f64> = d.iter().map(|di| step.t * di).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let ys = dot(&y, &s);
        if ys > 1e-10 {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s.clone(), y, 1.0 / ys));
        }
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        f = step.f;
        g = step.g;
        iterations += 1;
        trace.push(TracePoint { f, grad_norm: inf_norm(&g) });
    };

    LbfgsResult { x, f, grad: g, iterations, evaluations, termination, trace }
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.iter().map(|x| -x).collect();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        (f, g)
    }

    #[test]
    fn solves_rosenbrock() {
        let res = minimize(rosenbrock, vec![-1.2, 1.0], &LbfgsConfig { max_iters: 200, ..Default::default() });
        assert!(res.converged(), "{:?}", res.termination);
        assert!((res.x[0] - 1.0).abs() < 1e-6 && (res.x[1] - 1.0).abs() < 1e-6);
        assert!(res.trace.windows(2).all(|w| w[1].f <= w[0].f));
    }

    #[test]
    fn quadratic_in_few_iterations() {
        let diag = [1.0, 10.0, 100.0];
        let obj = |x: &[f64]| {
            let f = x.iter().zip(diag).map(|(xi, c)| 0.5 * c * xi * xi).sum();
            (f, x.iter().zip(diag).map(|(xi, c)| c * xi).collect())
        };
        let res = minimize(obj, vec![1.0, 1.0, 1.0], &LbfgsConfig::default());
        assert!(res.converged());
        assert!(res.iterations < 20);
    }

    #[test]
    fn respects_iteration_cap() {
        let res = minimize(rosenbrock, vec![-1.2, 1.0], &LbfgsConfig { max_iters: 1, ..Default::default() });
        assert_eq!(res.iterations, 1);
        assert_eq!(res.termination, Termination::MaxIterations);
        assert_eq!(res.trace.len(), 2);
    }

    #[test]
    fn backtracks_from_infeasible_region() {
        // log barrier: infinite for x <= 0
        let obj = |x: &[f64]| {
            if x[0] <= 0.0 {
                (f64::INFINITY, vec![0.0])
            } else {
                (x[0] - x[0].ln(), vec![1.0 - 1.0 / x[0]])
            }
        };
        let res = minimize(obj, vec![5.0], &LbfgsConfig::default());
        assert!(res.converged());
        assert!((res.x[0] - 1.0).abs() < 1e-6);
    }
}
