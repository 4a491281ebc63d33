//! Density evolution for the coupled ensemble, BP thresholds and EBP
//! EXIT-like curves.
//!
//! The state holds, per section `i` in `-L..=L`, the erasure probability `p_i`
//! of punctured-bit-to-check messages and `q_i` of transmitted-bit-to-check
//! messages. Sections outside the chain are shortened and read as zero.
//! One sweep updates every section from the previous state (Jacobi order):
//!
//! ```text
//! P_c = (1/w) sum_k p_{c-k}      Q_c = (1/w) sum_k q_{c-k}        (check averages)
//! p_i' = ( (1/w) sum_j [1 - (1-P_{i+j})^{dr-1} (1-Q_{i+j})^{dg}] )^{dl-1}
//! s_i  =   (1/w) sum_j [1 - (1-P_{i+j})^{dr}   (1-Q_{i+j})^{dg-1}]
//! q_i' = f(z_i) s_i^{dg-1},  z_i = s_i^{dg}
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, ChannelFamily, FamilyKind, TransferFunction, TransferKernel};
use crate::ensemble::EnsembleParams;

/// Success tolerance on `max_i p_i`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Stall tolerance on the L-infinity change of one sweep.
pub const DEFAULT_STALL_TOL: f64 = 1e-15;
pub const DEFAULT_MAX_ITER: usize = 2_000_000;
pub const DEFAULT_BISECT_TOL: f64 = 1e-6;
/// Bound on the DE residual of every returned curve point.
pub const CURVE_RESIDUAL_TOL: f64 = 1e-9;
/// Sweeps between attempts to certify a stall.
const CERTIFICATE_BLOCK: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("{0}")]
    Config(String),
    #[error("density evolution hit the iteration cap ({iterations}) at epsilon = {epsilon}; bracket is inconclusive")]
    Inconclusive { epsilon: f64, iterations: usize },
}

/// Iteration controls for [`run_de`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    pub tol: f64,
    pub stall_tol: f64,
    pub max_iter: usize,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            stall_tol: DEFAULT_STALL_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl DeConfig {
    fn validate(&self) -> Result<(), DeError> {
        if !(self.tol > 0.0) || !(self.stall_tol >= 0.0) || self.max_iter == 0 {
            return Err(DeError::Config(format!("invalid DE config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeState {
    pub half_width: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub epsilon: f64,
    pub iterations: usize,
}

impl DeState {
    /// The all-erased initialization `p_i = q_i = 1`.
    pub fn ones(half_width: usize, epsilon: f64) -> Self {
        let n = 2 * half_width + 1;
        Self {
            half_width,
            p: vec![1.0; n],
            q: vec![1.0; n],
            epsilon,
            iterations: 0,
        }
    }

    pub fn zeros(half_width: usize, epsilon: f64) -> Self {
        let n = 2 * half_width + 1;
        Self {
            half_width,
            p: vec![0.0; n],
            q: vec![0.0; n],
            epsilon,
            iterations: 0,
        }
    }

    pub fn sections(&self) -> usize {
        self.p.len()
    }

    /// `p` at signed position `i`, zero outside the chain.
    pub fn p_at(&self, i: i64) -> f64 {
        let idx = i + self.half_width as i64;
        if idx < 0 || idx as usize >= self.p.len() {
            0.0
        } else {
            self.p[idx as usize]
        }
    }

    pub fn q_at(&self, i: i64) -> f64 {
        let idx = i + self.half_width as i64;
        if idx < 0 || idx as usize >= self.q.len() {
            0.0
        } else {
            self.q[idx as usize]
        }
    }

    pub fn max_p(&self) -> f64 {
        self.p.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean_p(&self) -> f64 {
        self.p.iter().sum::<f64>() / self.p.len() as f64
    }

    pub fn mean_q(&self) -> f64 {
        self.q.iter().sum::<f64>() / self.q.len() as f64
    }

    /// L-infinity distance over both message vectors.
    pub fn distance(&self, other: &DeState) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .chain(self.q.iter().zip(&other.q))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn dominated_by(&self, other: &DeState, slack: f64) -> bool {
        self.p
            .iter()
            .zip(&other.p)
            .chain(self.q.iter().zip(&other.q))
            .all(|(a, b)| *a <= *b + slack)
    }
}

/// The epsilon-independent half of a sweep: new `p` and the per-section
/// check-to-transmitted-bit erasure rate `s`.
struct CheckPass {
    p: Vec<f64>,
    s: Vec<f64>,
}

/// Density evolution for one ensemble and one channel family at varying epsilon.
#[derive(Debug, Clone)]
pub struct CoupledDe {
    params: EnsembleParams,
    kind: FamilyKind,
    m: usize,
    kernel: TransferKernel,
}

impl CoupledDe {
    pub fn new(params: EnsembleParams, kind: FamilyKind, m: usize) -> Result<Self, DeError> {
        params.validate().map_err(|e| DeError::Config(e.to_string()))?;
        let kernel = TransferKernel::new(m)?;
        Ok(Self { params, kind, m, kernel })
    }

    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn family(&self, epsilon: f64) -> Result<ChannelFamily, DeError> {
        Ok(self.kind.with_epsilon(self.m, epsilon)?)
    }

    pub fn transfer(&self, epsilon: f64) -> Result<TransferFunction, DeError> {
        let dist = self.family(epsilon)?.dimension_distribution()?;
        Ok(self.kernel.bind(&dist)?)
    }

    fn check_pass(&self, state: &DeState) -> CheckPass {
        let EnsembleParams { dl, dr, dg, window, .. } = self.params;
        let n = state.sections();
        let inv_w = 1.0 / window as f64;
        let mut to_punctured = Vec::with_capacity(n + window - 1);
        let mut to_transmitted = Vec::with_capacity(n + window - 1);
        for c in 0..n + window - 1 {
            let lo = c.saturating_sub(window - 1);
            let hi = c.min(n - 1);
            let pbar = state.p[lo..=hi].iter().sum::<f64>() * inv_w;
            let qbar = state.q[lo..=hi].iter().sum::<f64>() * inv_w;
            let (kp, kq) = (1.0 - pbar, 1.0 - qbar);
            to_punctured.push(1.0 - kp.powi(dr as i32 - 1) * kq.powi(dg as i32));
            to_transmitted.push(1.0 - kp.powi(dr as i32) * kq.powi(dg as i32 - 1));
        }
        let mut p = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        for i in 0..n {
            let a = to_punctured[i..i + window].iter().sum::<f64>() * inv_w;
            let b = to_transmitted[i..i + window].iter().sum::<f64>() * inv_w;
            p.push(a.powi(dl as i32 - 1));
            s.push(b);
        }
        CheckPass { p, s }
    }

    fn finish(&self, pass: &CheckPass, f: &TransferFunction, state: &DeState, epsilon: f64) -> DeState {
        let dg = self.params.dg as i32;
        let q = pass.s.iter().map(|&s| f.eval(s.powi(dg)) * s.powi(dg - 1)).collect();
        DeState {
            half_width: state.half_width,
            p: pass.p.clone(),
            q,
            epsilon,
            iterations: state.iterations + 1,
        }
    }

    /// One Jacobi sweep with a prepared transfer function.
    pub fn sweep_with(&self, state: &DeState, f: &TransferFunction) -> DeState {
        let pass = self.check_pass(state);
        self.finish(&pass, f, state, state.epsilon)
    }

    /// One sweep at the state's own epsilon.
    pub fn sweep(&self, state: &DeState) -> Result<DeState, DeError> {
        self.check_state(state)?;
        let f = self.transfer(state.epsilon)?;
        Ok(self.sweep_with(state, &f))
    }

    fn check_state(&self, state: &DeState) -> Result<(), DeError> {
        let n = self.params.sections();
        if state.half_width != self.params.half_width || state.p.len() != n || state.q.len() != n {
            return Err(DeError::Config(format!(
                "state has {} sections, ensemble has {n}",
                state.p.len()
            )));
        }
        if state.p.iter().chain(&state.q).any(|x| !(0.0..=1.0).contains(x)) {
            return Err(DeError::Config("state entries must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Iterates from all-ones until decoding, a stall, or the iteration cap.
    ///
    /// Besides the stall tolerance, a run is declared stalled once it finds a
    /// sub-solution below the current state: a nontrivial `x <= state` with
    /// `sweep(x) >= x`. The map is monotone, so every later iterate stays
    /// above `x` and the run can never decode.
    pub fn run(&self, epsilon: f64, config: &DeConfig) -> Result<DeRun, DeError> {
        config.validate()?;
        let f = self.transfer(epsilon)?;
        let mut state = DeState::ones(self.params.half_width, epsilon);
        let mut checkpoint = state.clone();
        loop {
            let next = self.sweep_with(&state, &f);
            let change = next.distance(&state);
            state = next;
            if cfg!(debug_assertions) && state.iterations.is_multiple_of(100) {
                debug_assert!(state.dominated_by(&checkpoint, 1e-14), "DE sequence increased");
                checkpoint = state.clone();
            }
            let outcome = if state.max_p() < config.tol {
                Some(DeOutcome::Decoded)
            } else if change < config.stall_tol {
                Some(DeOutcome::Stalled)
            } else if state.iterations >= config.max_iter {
                Some(DeOutcome::IterationCap)
            } else if change < 1e-6 && state.iterations.is_multiple_of(CERTIFICATE_BLOCK) {
                self.certifies_failure(&state, &f, config.tol).then_some(DeOutcome::Stalled)
            } else {
                None
            };
            if let Some(outcome) = outcome {
                return Ok(DeRun { state, outcome });
            }
        }
    }

    /// Looks for a sub-solution below `state`.
    ///
    /// Newton's method locates a fixed point `y` near the current iterate, then
    /// `x = y - eta (I - J)^{-1} 1` satisfies `sweep(x) - x ~ eta` componentwise
    /// whenever the fixed point is attracting. The inequality is checked
    /// directly, so a `true` answer does not rely on the linearization.
    fn certifies_failure(&self, state: &DeState, f: &TransferFunction, tol: f64) -> bool {
        let n = state.sections();
        let map = |y: &[f64]| -> Vec<f64> {
            let s = self.vector_state(state, y);
            let t = self.sweep_with(&s, f);
            t.p.into_iter().chain(t.q).collect()
        };
        let mut y: Vec<f64> = state.p.iter().chain(&state.q).copied().collect();
        let mut converged = false;
        for _ in 0..12 {
            let image = map(&y);
            let residual: Vec<f64> = image.iter().zip(&y).map(|(a, b)| a - b).collect();
            if residual.iter().all(|r| r.abs() < 1e-15) {
                converged = true;
                break;
            }
            let jac = jacobian(&map, &y);
            let Some(step) = solve_identity_minus(&jac, &residual) else { return false };
            for (yi, di) in y.iter_mut().zip(step) {
                *yi += di;
            }
            if y.iter().any(|v| !(-1e-12..=1.0 + 1e-12).contains(v)) {
                return false;
            }
        }
        if !converged {
            return false;
        }
        let jac = jacobian(&map, &y);
        let Some(dir) = solve_identity_minus(&jac, &vec![1.0; 2 * n]) else { return false };
        let largest = dir.iter().copied().fold(0.0, f64::max);
        if dir.iter().any(|d| !(*d > 0.0)) || !largest.is_finite() {
            return false;
        }
        let eta = 1e-9 / largest;
        let x: Vec<f64> = y.iter().zip(&dir).map(|(yi, di)| yi - eta * di).collect();
        let current: Vec<f64> = state.p.iter().chain(&state.q).copied().collect();
        if x.iter().zip(&current).any(|(xi, ci)| *xi < 0.0 || xi > ci) {
            return false;
        }
        if x[..n].iter().copied().fold(0.0, f64::max) < tol {
            return false;
        }
        map(&x).iter().zip(&x).all(|(tx, xi)| tx >= xi)
    }

    fn vector_state(&self, like: &DeState, y: &[f64]) -> DeState {
        let n = like.sections();
        DeState {
            half_width: like.half_width,
            p: y[..n].to_vec(),
            q: y[n..].to_vec(),
            epsilon: like.epsilon,
            iterations: 0,
        }
    }

    /// Largest epsilon at which DE decodes, by bisection on `[0, 1]`.
    pub fn threshold(&self, bisect_tol: f64, config: &DeConfig) -> Result<f64, DeError> {
        if !(bisect_tol > 0.0) {
            return Err(DeError::Config(format!("bisection tolerance {bisect_tol} must be positive")));
        }
        bisect_monotone(0.0, 1.0, bisect_tol, |eps| {
            let run = self.run(eps, config)?;
            match run.outcome {
                DeOutcome::Decoded => Ok(true),
                DeOutcome::Stalled => Ok(false),
                DeOutcome::IterationCap => Err(DeError::Inconclusive {
                    epsilon: eps,
                    iterations: run.state.iterations,
                }),
            }
        })
    }

    /// Largest epsilon found by bisection at which DE decodes within
    /// `config.max_iter` sweeps; runs that hit the cap count as failures.
    ///
    /// Decoding within a fixed number of sweeps is monotone in epsilon, so the
    /// returned value (the decoding end of the final bracket) is a lower bound
    /// on the threshold. Useful for long chains, where DE just above the
    /// threshold crawls for millions of sweeps.
    pub fn threshold_lower_bound(&self, bisect_tol: f64, config: &DeConfig) -> Result<f64, DeError> {
        if !(bisect_tol > 0.0) {
            return Err(DeError::Config(format!("bisection tolerance {bisect_tol} must be positive")));
        }
        let (lo, _) = bisect_bracket(0.0, 1.0, bisect_tol, |eps| Ok::<_, DeError>(self.run(eps, config)?.outcome == DeOutcome::Decoded))?;
        Ok(lo)
    }

    /// `z_i = s_i^{dg}` for every section of `state`.
    pub fn channel_inputs(&self, state: &DeState) -> Vec<f64> {
        let dg = self.params.dg as i32;
        self.check_pass(state).s.iter().map(|s| s.powi(dg)).collect()
    }

    /// Per-section EXIT-like values at the state's epsilon.
    pub fn h_sections(&self, state: &DeState, variant: ExitVariant) -> Result<Vec<f64>, DeError> {
        self.check_state(state)?;
        let f = self.transfer(state.epsilon)?;
        let dg = self.params.dg as i32;
        Ok(self
            .channel_inputs(state)
            .into_iter()
            .map(|z| {
                let tail = match variant {
                    ExitVariant::Full => z.powi(dg),
                    ExitVariant::Extrinsic => z,
                };
                f.eval(z) * tail
            })
            .collect())
    }

    /// Section-averaged EXIT-like value.
    pub fn h_ebp(&self, state: &DeState, variant: ExitVariant) -> Result<f64, DeError> {
        let h = self.h_sections(state, variant)?;
        Ok(h.iter().sum::<f64>() / h.len() as f64)
    }

    /// Solves `mean_i f_eps(z_i) s_i^{dg-1} = chi` for epsilon by bisection.
    fn anchor_epsilon(&self, pass: &CheckPass, chi: f64, tol: f64) -> Result<f64, DeError> {
        let dg = self.params.dg as i32;
        let inputs: Vec<(f64, f64)> = pass.s.iter().map(|&s| (s.powi(dg), s.powi(dg - 1))).collect();
        let mean_q = |eps: f64| -> Result<f64, DeError> {
            let f = self.transfer(eps)?;
            Ok(inputs.iter().map(|&(z, tail)| f.eval(z) * tail).sum::<f64>() / inputs.len() as f64)
        };
        if mean_q(1.0)? <= chi {
            return Ok(1.0);
        }
        if mean_q(0.0)? >= chi {
            return Ok(0.0);
        }
        bisect_monotone(0.0, 1.0, tol, |eps| Ok(mean_q(eps)? < chi))
    }

    /// Finds a fixed point whose mean `q` equals `chi`, starting from `start`.
    pub fn anchored_fixed_point(
        &self,
        chi: f64,
        start: &DeState,
        config: &TraceConfig,
    ) -> Result<CurvePoint, TraceFailure> {
        let mut state = start.clone();
        let mut eps = start.epsilon;
        for round in 1..=config.max_rounds {
            let pass = self.check_pass(&state);
            let new_eps = self
                .anchor_epsilon(&pass, chi, config.epsilon_tol)
                .map_err(|e| TraceFailure { chi, reason: e.to_string() })?;
            let f = self.transfer(new_eps).map_err(|e| TraceFailure { chi, reason: e.to_string() })?;
            let next = self.finish(&pass, &f, &state, new_eps);
            let change = next.distance(&state);
            let eps_change = (new_eps - eps).abs();
            state = next;
            eps = new_eps;
            if change < config.state_tol && eps_change < config.epsilon_change_tol {
                let residual = self.sweep_with(&state, &f).distance(&state);
                if residual >= CURVE_RESIDUAL_TOL {
                    return Err(TraceFailure {
                        chi,
                        reason: format!("fixed-point residual {residual:e} after {round} rounds"),
                    });
                }
                if state.max_p() < config.trivial_tol {
                    return Err(TraceFailure {
                        chi,
                        reason: "collapsed to the trivial fixed point".into(),
                    });
                }
                let h_sections = self
                    .h_sections(&state, config.variant)
                    .map_err(|e| TraceFailure { chi, reason: e.to_string() })?;
                let h = h_sections.iter().sum::<f64>() / h_sections.len() as f64;
                return Ok(CurvePoint {
                    epsilon: eps,
                    h,
                    chi,
                    residual,
                    rounds: round,
                    h_sections,
                    state,
                });
            }
        }
        Err(TraceFailure {
            chi,
            reason: format!("no convergence within {} rounds", config.max_rounds),
        })
    }

    /// Traces the EBP curve over a strictly descending grid of anchors.
    ///
    /// Each point warm-starts from the previous converged state. Points that
    /// fail are reported in [`Trace::failures`] and skipped.
    pub fn trace(&self, chi_grid: &[f64], config: &TraceConfig) -> Result<Trace, DeError> {
        if chi_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(DeError::Config("chi grid must be strictly descending".into()));
        }
        if chi_grid.iter().any(|c| !(*c > 0.0 && *c <= 1.0)) {
            return Err(DeError::Config("chi values must lie in (0, 1]".into()));
        }
        let mut trace = Trace::default();
        let mut warm = DeState::ones(self.params.half_width, 1.0);
        for &chi in chi_grid {
            match self.anchored_fixed_point(chi, &warm, config) {
                Ok(point) => {
                    warm = point.state.clone();
                    warm.iterations = 0;
                    trace.points.push(point);
                }
                Err(fail) => trace.failures.push(fail),
            }
        }
        Ok(trace)
    }

    /// Traces `chi_grid`, then repeatedly refines around the point of smallest
    /// epsilon with `refine_points` extra anchors between its neighbours.
    pub fn leftmost_point(
        &self,
        chi_grid: &[f64],
        refinements: usize,
        refine_points: usize,
        config: &TraceConfig,
    ) -> Result<Option<CurvePoint>, DeError> {
        let trace = self.trace(chi_grid, config)?;
        let mut points = trace.points;
        for _ in 0..refinements {
            let Some(best) = argmin_epsilon(&points) else { break };
            let hi = if best > 0 { points[best - 1].chi } else { points[best].chi };
            let lo = if best + 1 < points.len() { points[best + 1].chi } else { points[best].chi };
            if hi - lo <= 1e-12 {
                break;
            }
            let start = if best > 0 { points[best - 1].state.clone() } else { points[best].state.clone() };
            let grid: Vec<f64> = (1..=refine_points)
                .map(|k| hi - (hi - lo) * k as f64 / (refine_points + 1) as f64)
                .collect();
            let mut warm = start;
            let mut fine = Vec::new();
            for chi in grid {
                if let Ok(point) = self.anchored_fixed_point(chi, &warm, config) {
                    warm = point.state.clone();
                    fine.push(point);
                }
            }
            if fine.is_empty() {
                break;
            }
            let keep_lo = best.saturating_sub(1);
            let keep_hi = (best + 1).min(points.len() - 1);
            let mut local: Vec<CurvePoint> = points.drain(keep_lo..=keep_hi).collect();
            local.extend(fine);
            local.sort_by(|a, b| b.chi.total_cmp(&a.chi));
            points = local;
        }
        Ok(argmin_epsilon(&points).map(|i| points.swap_remove(i)))
    }
}

/// Central-difference Jacobian of `map` at `y`, row-major.
fn jacobian(map: &impl Fn(&[f64]) -> Vec<f64>, y: &[f64]) -> Vec<Vec<f64>> {
    let n = y.len();
    let mut jac = vec![vec![0.0; n]; n];
    let mut probe = y.to_vec();
    for col in 0..n {
        let h = 1e-6 * y[col].abs().max(1e-3);
        probe[col] = y[col] + h;
        let up = map(&probe);
        probe[col] = y[col] - h;
        let down = map(&probe);
        probe[col] = y[col];
        for row in 0..n {
            jac[row][col] = (up[row] - down[row]) / (2.0 * h);
        }
    }
    jac
}

/// Solves `(I - J) x = b` by Gaussian elimination with partial pivoting.
fn solve_identity_minus(jac: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut a: Vec<Vec<f64>> = jac
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<f64> = row.iter().map(|v| -v).collect();
            r[i] += 1.0;
            r.push(b[i]);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..=n {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn argmin_epsilon(points: &[CurvePoint]) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.epsilon.total_cmp(&b.1.epsilon))
        .map(|(i, _)| i)
}

/// Bisection for the boundary of a predicate that holds at `lo` and fails at `hi`.
///
/// Returns the midpoint of the final bracket once its width drops below `tol`.
pub fn bisect_monotone<E>(lo: f64, hi: f64, tol: f64, holds: impl FnMut(f64) -> Result<bool, E>) -> Result<f64, E> {
    let (lo, hi) = bisect_bracket(lo, hi, tol, holds)?;
    Ok(0.5 * (lo + hi))
}

/// Final `(lo, hi)` bracket of [`bisect_monotone`].
pub fn bisect_bracket<E>(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut holds: impl FnMut(f64) -> Result<bool, E>,
) -> Result<(f64, f64), E> {
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeOutcome {
    /// `max_i p_i` fell below the success tolerance.
    Decoded,
    /// The sweep change fell below the stall tolerance at a nontrivial point.
    Stalled,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeRun {
    pub state: DeState,
    pub outcome: DeOutcome,
}

impl DeRun {
    pub fn converged_to_zero(&self) -> bool {
        self.outcome == DeOutcome::Decoded
    }
}

/// Which EXIT-like functional to project fixed points onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ExitVariant {
    /// `f(z_i) z_i^{dg}`.
    #[default]
    Full,
    /// `f(z_i) z_i`, i.e. `f(z_i) s_i^{dg}`.
    Extrinsic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    /// Bisection tolerance when solving for epsilon.
    pub epsilon_tol: f64,
    /// Joint convergence: state change ...
    pub state_tol: f64,
    /// ... and epsilon change.
    pub epsilon_change_tol: f64,
    pub max_rounds: usize,
    /// States with `max p` below this are treated as trivial.
    pub trivial_tol: f64,
    pub variant: ExitVariant,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            epsilon_tol: 1e-12,
            state_tol: 1e-11,
            epsilon_change_tol: 1e-10,
            max_rounds: 200_000,
            trivial_tol: 1e-8,
            variant: ExitVariant::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub epsilon: f64,
    pub h: f64,
    pub chi: f64,
    pub residual: f64,
    pub rounds: usize,
    pub h_sections: Vec<f64>,
    pub state: DeState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFailure {
    pub chi: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub points: Vec<CurvePoint>,
    pub failures: Vec<TraceFailure>,
}

impl Trace {
    pub fn leftmost(&self) -> Option<&CurvePoint> {
        argmin_epsilon(&self.points).map(|i| &self.points[i])
    }
}

/// Evenly spaced descending anchors from `hi` to `lo`, both included.
pub fn chi_grid(hi: f64, lo: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && hi > lo);
    (0..points)
        .map(|k| hi - (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

/// One sweep of `state` for the given ensemble and channel.
pub fn de_sweep(state: &DeState, params: &EnsembleParams, family: &ChannelFamily) -> Result<DeState, DeError> {
    let de = CoupledDe::new(*params, family.kind(), family.m())?;
    let f = TransferFunction::new(&family.dimension_distribution()?)?;
    de.check_state(state)?;
    let mut next = de.sweep_with(state, &f);
    next.epsilon = family.epsilon();
    Ok(next)
}

/// Runs DE from the all-ones state at `epsilon`.
pub fn run_de(
    params: &EnsembleParams,
    kind: FamilyKind,
    m: usize,
    epsilon: f64,
    config: &DeConfig,
) -> Result<DeRun, DeError> {
    CoupledDe::new(*params, kind, m)?.run(epsilon, config)
}

/// BP threshold by bisection.
pub fn threshold(params: &EnsembleParams, kind: FamilyKind, m: usize, bisect_tol: f64) -> Result<f64, DeError> {
    CoupledDe::new(*params, kind, m)?.threshold(bisect_tol, &DeConfig::default())
}

/// One cell of a threshold table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCell {
    pub params: EnsembleParams,
    pub kind: FamilyKind,
    pub m: usize,
}

/// Thresholds for independent cells, computed in parallel; output order follows input order.
pub fn threshold_table(cells: &[ThresholdCell], bisect_tol: f64, config: &DeConfig) -> Vec<Result<f64, DeError>> {
    cells
        .par_iter()
        .map(|c| CoupledDe::new(c.params, c.kind, c.m)?.threshold(bisect_tol, config))
        .collect()
}

/// Traces the EBP curve for one ensemble and channel family.
pub fn ebp_trace(
    params: &EnsembleParams,
    kind: FamilyKind,
    m: usize,
    chi_grid: &[f64],
    config: &TraceConfig,
) -> Result<Trace, DeError> {
    CoupledDe::new(*params, kind, m)?.trace(chi_grid, config)
}

/// Section-averaged EXIT-like value of `state` under `family`.
pub fn h_ebp(state: &DeState, params: &EnsembleParams, family: &ChannelFamily, variant: ExitVariant) -> Result<f64, DeError> {
    let de = CoupledDe::new(*params, family.kind(), family.m())?;
    let mut s = state.clone();
    s.epsilon = family.epsilon();
    de.h_ebp(&s, variant)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(l: usize, w: usize) -> EnsembleParams {
        EnsembleParams::new(4, 2, 2, l, w).unwrap()
    }

    #[test]
    fn zero_state_is_fixed() {
        let fam = ChannelFamily::cd(2, 0.7).unwrap();
        let s = DeState::zeros(3, 0.7);
        let next = de_sweep(&s, &base(3, 2), &fam).unwrap();
        assert!(next.p.iter().chain(&next.q).all(|&x| x == 0.0));
    }

    #[test]
    fn bec_single_section_sweep() {
        // L = 1, w = 1: every check sees only its own section.
        let fam = ChannelFamily::cd(1, 0.5).unwrap();
        let next = de_sweep(&DeState::ones(1, 0.5), &base(1, 1), &fam).unwrap();
        for i in 0..3 {
            assert_eq!(next.p[i], 1.0);
            assert_eq!(next.q[i], 0.5);
        }
    }

    #[test]
    fn sweep_by_hand_with_boundary() {
        // L = 0, w = 2, m = 1 at eps: check sections 0 and 1 each average p_0/2.
        let eps = 0.3;
        let fam = ChannelFamily::bd(1, eps).unwrap();
        let mut s = DeState::ones(0, eps);
        s.p[0] = 0.6;
        s.q[0] = 0.4;
        let next = de_sweep(&s, &base(0, 2), &fam).unwrap();
        let (pb, qb) = (0.3f64, 0.2f64);
        let to_p = 1.0 - (1.0 - pb) * (1.0 - qb).powi(2);
        let to_t = 1.0 - (1.0 - pb).powi(2) * (1.0 - qb);
        assert!((next.p[0] - to_p.powi(3)).abs() < 1e-15);
        assert!((next.q[0] - eps * to_t).abs() < 1e-15);
    }

    #[test]
    fn symmetric_states_stay_symmetric() {
        let de = CoupledDe::new(base(6, 3), FamilyKind::Bd, 3).unwrap();
        let f = de.transfer(0.48).unwrap();
        let mut s = DeState::ones(6, 0.48);
        for _ in 0..500 {
            s = de.sweep_with(&s, &f);
            for k in 0..s.sections() {
                let r = s.sections() - 1 - k;
                assert!((s.p[k] - s.p[r]).abs() < 1e-15);
                assert!((s.q[k] - s.q[r]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sequence_is_monotone_from_ones() {
        let de = CoupledDe::new(base(5, 2), FamilyKind::Cd, 2).unwrap();
        let f = de.transfer(0.49).unwrap();
        let mut s = DeState::ones(5, 0.49);
        for _ in 0..2000 {
            let next = de.sweep_with(&s, &f);
            assert!(next.dominated_by(&s, 1e-15));
            s = next;
        }
    }

    #[test]
    fn run_outcomes() {
        let p = base(10, 2);
        let cfg = DeConfig::default();
        assert!(run_de(&p, FamilyKind::Cd, 2, 0.40, &cfg).unwrap().converged_to_zero());
        let fail = run_de(&p, FamilyKind::Cd, 2, 0.55, &cfg).unwrap();
        assert_eq!(fail.outcome, DeOutcome::Stalled);
        assert!(fail.state.max_p() > 0.1);
        let zero = run_de(&p, FamilyKind::Cd, 2, 0.0, &cfg).unwrap();
        assert!(zero.converged_to_zero());
        assert!(zero.state.iterations < 20);
        let capped = run_de(&p, FamilyKind::Cd, 2, 0.55, &DeConfig { max_iter: 3, ..cfg }).unwrap();
        assert_eq!(capped.outcome, DeOutcome::IterationCap);
    }

    #[test]
    fn inconclusive_bracket_is_an_error() {
        let de = CoupledDe::new(base(10, 2), FamilyKind::Cd, 2).unwrap();
        let cfg = DeConfig { max_iter: 5, ..DeConfig::default() };
        assert!(matches!(de.threshold(1e-3, &cfg), Err(DeError::Inconclusive { .. })));
        assert!(de.threshold(0.0, &DeConfig::default()).is_err());
    }

    #[test]
    fn bisection_finds_boundary() {
        let x = bisect_monotone::<()>(0.0, 1.0, 1e-9, |x| Ok(x < 0.3141)).unwrap();
        assert!((x - 0.3141).abs() < 1e-9);
    }

    #[test]
    fn h_of_trivial_state_is_zero() {
        let p = base(4, 2);
        let fam = ChannelFamily::cd(3, 0.6).unwrap();
        assert_eq!(h_ebp(&DeState::zeros(4, 0.6), &p, &fam, ExitVariant::Full).unwrap(), 0.0);
        let h = h_ebp(&DeState::ones(4, 0.6), &p, &fam, ExitVariant::Full).unwrap();
        assert!((0.0..=1.0).contains(&h));
    }

    #[test]
    fn h_is_monotone_in_state() {
        let p = base(4, 2);
        let fam = ChannelFamily::bd(2, 0.45).unwrap();
        let mut lo = DeState::ones(4, 0.45);
        let mut hi = DeState::ones(4, 0.45);
        for (k, (a, b)) in lo.p.iter_mut().zip(hi.p.iter_mut()).enumerate() {
            *a = 0.1 + 0.05 * k as f64;
            *b = *a + 0.1;
        }
        for (k, (a, b)) in lo.q.iter_mut().zip(hi.q.iter_mut()).enumerate() {
            *a = 0.2 + 0.03 * k as f64;
            *b = *a + 0.05;
        }
        for v in [ExitVariant::Full, ExitVariant::Extrinsic] {
            assert!(h_ebp(&lo, &p, &fam, v).unwrap() <= h_ebp(&hi, &p, &fam, v).unwrap());
        }
    }

    #[test]
    fn trace_points_are_fixed_points() {
        let de = CoupledDe::new(base(4, 2), FamilyKind::Cd, 2).unwrap();
        let grid = chi_grid(0.9, 0.1, 9);
        let trace = de.trace(&grid, &TraceConfig::default()).unwrap();
        assert!(trace.points.len() >= 7, "{:?}", trace.failures);
        for pt in &trace.points {
            assert!(pt.residual < CURVE_RESIDUAL_TOL);
            assert!((pt.state.mean_q() - pt.chi).abs() < 1e-8);
            let f = de.transfer(pt.epsilon).unwrap();
            assert!(de.sweep_with(&pt.state, &f).distance(&pt.state) < CURVE_RESIDUAL_TOL);
            assert!((0.0..=1.0).contains(&pt.h));
        }
    }

    #[test]
    fn trace_rejects_bad_grids() {
        let de = CoupledDe::new(base(2, 2), FamilyKind::Cd, 2).unwrap();
        assert!(de.trace(&[0.5, 0.6], &TraceConfig::default()).is_err());
        assert!(de.trace(&[1.5], &TraceConfig::default()).is_err());
    }
}
