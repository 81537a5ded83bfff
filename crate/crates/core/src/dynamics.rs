//! Exact-formula layer: `f`, `f'`, poles, inverse branches and orbits.
//!
//! With `u = e^{2z}` the map is the Möbius image
//!
//! ```text
//! f(z) = λμ(u − 1) / (μu − λ)
//! ```
//!
//! of the exponential. `u − 1` is evaluated without cancellation so that
//! `f(z) = ρz + O(z²)` holds to full relative precision near the origin.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::params::{principal_ln_1p, ParamPoint};
use crate::{Error, Result, C64};

/// `|Re 2z|` beyond which `f` is replaced by its asymptotic expansion.
pub const OVERFLOW_THRESHOLD: f64 = 300.0;
/// Distance to the nearest pole below which evaluation is refused.
pub const EPS_POLE: f64 = 1e-12;
/// Radius of the "arrived at zero" disk.
pub const EPS_ZERO: f64 = 1e-9;
/// Consecutive iterates inside [`EPS_ZERO`] needed for `ConvergedToZero`.
pub const ZERO_PERSISTENCE: usize = 5;
/// Largest period searched for by near-return detection.
pub const MAX_PERIOD: usize = 64;
/// Largest supported near-return window.
pub const MAX_WINDOW: usize = 256;

/// `(e^{2z} − 1, e^{2z})` with the first component free of cancellation.
fn exp2_minus_one(z: C64) -> (C64, C64) {
    let x2 = 2.0 * z.re;
    let (s2, c2) = (2.0 * z.im).sin_cos();
    let e = x2.exp();
    let sy = z.im.sin();
    let em1 = C64::new(x2.exp_m1() * c2 - 2.0 * sy * sy, e * s2);
    (em1, C64::new(e * c2, e * s2))
}

/// Index of the pole nearest to `z` and its distance.
pub fn nearest_pole(p: &ParamPoint, z: C64) -> (i64, f64) {
    let k = ((z.im - p.pole0.im) / PI).round();
    let pole = p.pole0 + C64::new(0.0, k * PI);
    (k as i64, (z - pole).norm())
}

fn check_pole(p: &ParamPoint, z: C64) -> Result<()> {
    let (k, d) = nearest_pole(p, z);
    if d < EPS_POLE {
        Err(Error::PoleProximity(k))
    } else {
        Ok(())
    }
}

/// `f_{λ,ρ}(z)`.
pub fn eval_f(p: &ParamPoint, z: C64) -> Result<C64> {
    let x2 = 2.0 * z.re;
    if x2 > OVERFLOW_THRESHOLD {
        // λ(1 − 1/u)/(1 − λ/(μu)) ≈ λ + λ(λ/μ − 1)/u
        let v = (-2.0 * z).exp();
        return Ok(p.lambda + p.lambda * (p.lambda / p.mu - 1.0) * v);
    }
    if x2 < -OVERFLOW_THRESHOLD {
        let u = (2.0 * z).exp();
        return Ok(p.mu + p.mu * (p.mu / p.lambda - 1.0) * u);
    }
    check_pole(p, z)?;
    let (em1, _) = exp2_minus_one(z);
    let w = p.lm * em1 / (p.mu * em1 + p.mu_minus_lambda);
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::PoleProximity(nearest_pole(p, z).0));
    }
    Ok(w)
}

/// `f'(z) = 2λμ(μ − λ)u / (μu − λ)²`.
pub fn eval_f_prime(p: &ParamPoint, z: C64) -> Result<C64> {
    let x2 = 2.0 * z.re;
    if x2 > 0.0 {
        if x2 <= OVERFLOW_THRESHOLD {
            check_pole(p, z)?;
        }
        // divide through by u²
        let v = (-2.0 * z).exp();
        let d = p.mu - p.lambda * v;
        return Ok(2.0 * p.lm * p.mu_minus_lambda * v / (d * d));
    }
    if x2 >= -OVERFLOW_THRESHOLD {
        check_pole(p, z)?;
    }
    let (em1, u) = exp2_minus_one(z);
    let d = p.mu * em1 + p.mu_minus_lambda;
    let w = 2.0 * p.lm * p.mu_minus_lambda * u / (d * d);
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::PoleProximity(nearest_pole(p, z).0));
    }
    Ok(w)
}

/// `ln |f'(z)|`, finite where `f'` itself underflows deep in a tract.
pub fn eval_ln_abs_f_prime(p: &ParamPoint, z: C64) -> Result<f64> {
    let x2 = 2.0 * z.re;
    let c = (2.0 * p.lm * p.mu_minus_lambda).norm().ln();
    if x2 > 0.0 {
        if x2 <= OVERFLOW_THRESHOLD {
            check_pole(p, z)?;
        }
        let v = if x2 > 1400.0 {
            C64::new(0.0, 0.0)
        } else {
            (-2.0 * z).exp()
        };
        return Ok(c - x2 - 2.0 * (p.mu - p.lambda * v).norm().ln());
    }
    if x2 >= -OVERFLOW_THRESHOLD {
        check_pole(p, z)?;
    }
    let em1 = if x2 < -1400.0 {
        C64::new(-1.0, 0.0)
    } else {
        exp2_minus_one(z).0
    };
    Ok(c + x2 - 2.0 * (p.mu * em1 + p.mu_minus_lambda).norm().ln())
}

/// The pole `p_k(λ) = ½ Log((ρ − 2λ)/ρ) + ikπ`, principal `Log`.
pub fn pole_k(p: &ParamPoint, k: i64) -> C64 {
    p.pole0 + C64::new(0.0, k as f64 * PI)
}

/// The inverse branch `g_{λ,k}` of `f`, the one sending `∞` to `p_k(λ)`:
///
/// ```text
/// g_{λ,k}(w) = ½ Log(λ(w − μ) / (μ(w − λ))) + ikπ
/// ```
///
/// `g_{λ,0}(0) = 0` exactly. The omitted values `λ`, `μ` have no preimage.
pub fn inverse_branch(p: &ParamPoint, k: i64, w: C64) -> Result<C64> {
    let tol = 1e-14;
    if (w - p.lambda).norm() <= tol * (1.0 + p.lambda.norm()) {
        return Err(Error::OmittedValue(p.lambda));
    }
    if (w - p.mu).norm() <= tol * (1.0 + p.mu.norm()) {
        return Err(Error::OmittedValue(p.mu));
    }
    // λ(w − μ)/(μ(w − λ)) − 1 = w(λ − μ)/(μ(w − λ))
    let x = -w * p.mu_minus_lambda / (p.mu * (w - p.lambda));
    Ok(0.5 * principal_ln_1p(x) + C64::new(0.0, k as f64 * PI))
}

/// Label of the branch taking `f(z)` back to `z`: `z = g_{λ,k}(f(z))`.
///
/// Returns the label together with the distance of the raw quotient from the
/// nearest integer.
pub fn branch_label(p: &ParamPoint, z: C64, image: C64) -> Result<(i64, f64)> {
    let base = inverse_branch(p, 0, image)?;
    let q = (z - base).im / PI;
    let k = q.round();
    Ok((k as i64, (q - k).abs()))
}

/// Which asymptotic tract an orbit entered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TractSide {
    /// `Re z → +∞`, where `f → λ`.
    Plus,
    /// `Re z → −∞`, where `f → μ`.
    Minus,
}

/// A periodic cycle `a_0 … a_{n−1}` with multiplier `ν = Π f'(a_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleInfo {
    pub period: usize,
    /// Cycle points ordered so that `points[i+1] = f(points[i])` and
    /// `points[1 % period]` is the point attracting the seed itself.
    #[serde(with = "crate::wire::vec_complex")]
    pub points: Vec<C64>,
    #[serde(with = "crate::wire::complex")]
    pub multiplier: C64,
    /// `ln |ν|`, kept separately because `ν` underflows for cycles passing
    /// deep into an asymptotic tract.
    pub ln_abs_multiplier: f64,
}

impl CycleInfo {
    /// Largest `|f(a_i) − a_{i+1}|` around the cycle.
    pub fn closure_residual(&self, p: &ParamPoint) -> f64 {
        let n = self.period;
        (0..n)
            .map(|i| match eval_f(p, self.points[i]) {
                Ok(w) => (w - self.points[(i + 1) % n]).norm(),
                Err(_) => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    pub fn is_attracting(&self) -> bool {
        self.ln_abs_multiplier < 0.0
    }
}

/// How an orbit ended.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail")]
pub enum OrbitVerdict {
    ConvergedToZero,
    /// Near-return detected; points are the raw orbit points, not refined.
    ConvergedToCycle(CycleInfo),
    /// The orbit came within [`EPS_POLE`] of the pole with this index.
    NearPoleBlowup(i64),
    /// The orbit entered an asymptotic tract (only with `stop_on_tract`).
    AsymptoticTractExit(TractSide),
    BudgetExhausted,
}

/// Termination rules for [`iterate_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitLimits {
    pub budget: usize,
    pub eps_zero: f64,
    pub zero_persistence: usize,
    /// Near-return tolerance `|z_{m+n} − z_m|`.
    pub eps_cycle: f64,
    /// Number of trailing iterates kept for near-return detection.
    pub cycle_window: usize,
    pub max_period: usize,
    /// Stop as soon as `|Re 2z|` exceeds [`OVERFLOW_THRESHOLD`]; afterwards the
    /// orbit coincides with that of an asymptotic value to machine precision.
    pub stop_on_tract: bool,
}

impl OrbitLimits {
    pub fn with_budget(budget: usize) -> Self {
        Self {
            budget,
            ..Self::default()
        }
    }
}

impl Default for OrbitLimits {
    fn default() -> Self {
        Self {
            budget: 2000,
            eps_zero: EPS_ZERO,
            zero_persistence: ZERO_PERSISTENCE,
            eps_cycle: 1e-8,
            cycle_window: 2 * MAX_PERIOD,
            max_period: MAX_PERIOD,
            stop_on_tract: false,
        }
    }
}

/// A finite orbit of `seed` with its termination verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    #[serde(with = "crate::wire::complex")]
    pub seed: C64,
    #[serde(with = "crate::wire::vec_complex")]
    pub points: Vec<C64>,
    pub verdict: OrbitVerdict,
    pub iterations_used: usize,
}

impl OrbitRecord {
    /// Copy keeping at most `max_points` leading points.
    pub fn truncated(&self, max_points: usize) -> Self {
        Self {
            seed: self.seed,
            points: self.points.iter().take(max_points).copied().collect(),
            verdict: self.verdict.clone(),
            iterations_used: self.iterations_used,
        }
    }
}

/// Iterates `seed` under the default limits with the given budget.
pub fn iterate(p: &ParamPoint, seed: C64, budget: usize) -> OrbitRecord {
    iterate_with(p, seed, &OrbitLimits::with_budget(budget.max(1)))
}

/// Iterates `seed`, recording every point.
pub fn iterate_with(p: &ParamPoint, seed: C64, limits: &OrbitLimits) -> OrbitRecord {
    let mut points = Vec::with_capacity(limits.budget.min(4096) + 1);
    let (verdict, iterations_used) = run_orbit(p, seed, limits, Some(&mut points));
    OrbitRecord {
        seed,
        points,
        verdict,
        iterations_used,
    }
}

/// Allocation-free orbit fate, used by per-pixel loops.
pub fn orbit_fate(p: &ParamPoint, seed: C64, limits: &OrbitLimits) -> (OrbitVerdict, usize) {
    run_orbit(p, seed, limits, None)
}

fn run_orbit(
    p: &ParamPoint,
    seed: C64,
    limits: &OrbitLimits,
    mut record: Option<&mut Vec<C64>>,
) -> (OrbitVerdict, usize) {
    let window = limits.cycle_window.clamp(2, MAX_WINDOW);
    let max_period = limits.max_period.min(window / 2).max(1);
    let mut ring = [C64::new(0.0, 0.0); MAX_WINDOW];
    let mut zero_run = 0usize;
    let mut z = seed;

    for i in 0..=limits.budget {
        if let Some(rec) = record.as_deref_mut() {
            rec.push(z);
        }
        ring[i % window] = z;

        if z.norm() < limits.eps_zero {
            zero_run += 1;
            if zero_run >= limits.zero_persistence {
                return (OrbitVerdict::ConvergedToZero, i);
            }
        } else {
            zero_run = 0;
        }

        // near-return check every fourth step, away from the origin
        if i % 4 == 0 && z.norm() > 1e-6 {
            if let Some(n) = near_return(&ring, window, i, max_period, limits.eps_cycle) {
                return (
                    OrbitVerdict::ConvergedToCycle(aligned_cycle(p, &ring, window, i, n)),
                    i,
                );
            }
        }

        if i == limits.budget {
            break;
        }
        if limits.stop_on_tract && (2.0 * z.re).abs() > OVERFLOW_THRESHOLD {
            let side = if z.re > 0.0 {
                TractSide::Plus
            } else {
                TractSide::Minus
            };
            return (OrbitVerdict::AsymptoticTractExit(side), i);
        }
        z = match eval_f(p, z) {
            Ok(w) => w,
            Err(Error::PoleProximity(k)) => return (OrbitVerdict::NearPoleBlowup(k), i),
            Err(_) => return (OrbitVerdict::NearPoleBlowup(nearest_pole(p, z).0), i),
        };
    }
    (OrbitVerdict::BudgetExhausted, limits.budget)
}

/// Number of consecutive near-return pairs required for period `n`.
fn confirm_len(n: usize) -> usize {
    n.max(16)
}

/// Smallest period `n` whose near-return `|z_{t−j} − z_{t−j−n}| < eps` holds
/// for `j < confirm_len(n)`, given the ring holding `z_{t−window+1} … z_t`.
pub(crate) fn near_return(
    ring: &[C64],
    window: usize,
    t: usize,
    max_period: usize,
    eps: f64,
) -> Option<usize> {
    let at = |idx: usize| ring[idx % window];
    let zt = at(t);
    for n in 1..=max_period {
        let need = confirm_len(n);
        if need + n > window || t + 1 < need + n {
            continue;
        }
        if (zt - at(t - n)).norm() >= eps {
            continue;
        }
        if (1..need).all(|j| (at(t - j) - at(t - j - n)).norm() < eps) {
            return Some(n);
        }
    }
    None
}

/// Raw cycle from the ring, rotated so that index `i ≡ 0 (mod n)` of the orbit
/// lands on `points[1 % n]`.
pub(crate) fn aligned_cycle(
    p: &ParamPoint,
    ring: &[C64],
    window: usize,
    t: usize,
    n: usize,
) -> CycleInfo {
    let mut points = vec![C64::new(0.0, 0.0); n];
    for idx in (t + 1 - n)..=t {
        points[(1 + idx) % n] = ring[idx % window];
    }
    let multiplier = points
        .iter()
        .map(|&a| eval_f_prime(p, a).unwrap_or(C64::new(f64::INFINITY, 0.0)))
        .product();
    let ln_abs_multiplier = points
        .iter()
        .map(|&a| eval_ln_abs_f_prime(p, a).unwrap_or(f64::INFINITY))
        .sum();
    CycleInfo {
        period: n,
        points,
        multiplier,
        ln_abs_multiplier,
    }
}

/// Schwarzian derivative `f'''/f' − 3/2 (f''/f')²` by central differences of
/// the closed-form `f'`. For every member of the family it equals `−2`.
pub fn schwarzian_check(p: &ParamPoint, z: C64) -> Result<C64> {
    schwarzian_with_step(p, z, 1e-3)
}

/// [`schwarzian_check`] with an explicit difference step; the error is `O(h²)`.
pub fn schwarzian_with_step(p: &ParamPoint, z: C64, h: f64) -> Result<C64> {
    let d0 = eval_f_prime(p, z)?;
    let dp = eval_f_prime(p, z + h)?;
    let dm = eval_f_prime(p, z - h)?;
    let second = (dp - dm) / (2.0 * h);
    let third = (dp - 2.0 * d0 + dm) / (h * h);
    let ratio = second / d0;
    Ok(third / d0 - 1.5 * ratio * ratio)
}
