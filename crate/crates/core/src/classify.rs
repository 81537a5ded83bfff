//! Fate of the two asymptotic values and the shift-locus / `M_λ` / `M_μ`
//! trichotomy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::centers::Itinerary;
use crate::dynamics::{
    aligned_cycle, eval_f, eval_f_prime, eval_ln_abs_f_prime, inverse_branch, near_return,
    orbit_fate, CycleInfo, OrbitLimits, OrbitVerdict, MAX_PERIOD, MAX_WINDOW,
};
use crate::{Error, ParamPoint, Result, C64};

/// Cycle points closer than this to the origin are the fixed point `0` itself.
const ORIGIN_RADIUS: f64 = 1e-6;
const NEWTON_STEPS: usize = 30;

/// Iteration limits for classification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierBudget {
    pub max_iter: usize,
    pub cycle_window: usize,
    pub eps_cycle: f64,
    pub eps_zero: f64,
}

impl Default for ClassifierBudget {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            cycle_window: 2 * MAX_PERIOD,
            eps_cycle: 1e-8,
            eps_zero: 1e-9,
        }
    }
}

impl ClassifierBudget {
    pub fn with_max_iter(max_iter: usize) -> Self {
        Self {
            max_iter,
            ..Self::default()
        }
    }

    /// Checks `max_iter ≥ cycle_window ≥ 2` and that the tolerances are positive.
    pub fn validate(&self) -> Result<()> {
        let ok = self.cycle_window >= 2
            && self.cycle_window <= MAX_WINDOW
            && self.max_iter >= self.cycle_window
            && self.eps_cycle > 0.0
            && self.eps_zero > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "inconsistent classifier budget {self:?}"
            )))
        }
    }

    /// Largest period this budget can detect.
    pub fn max_period(&self) -> usize {
        (self.cycle_window / 2).min(MAX_PERIOD)
    }

    pub fn orbit_limits(&self) -> OrbitLimits {
        OrbitLimits {
            budget: self.max_iter,
            eps_zero: self.eps_zero,
            eps_cycle: self.eps_cycle,
            cycle_window: self.cycle_window,
            max_period: self.max_period(),
            ..OrbitLimits::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassKind {
    ShiftLocus,
    MLambda,
    MMu,
    Undetermined,
    Singular,
}

impl ClassKind {
    /// The kind of `I(λ)` given the kind of `λ`.
    pub fn mirrored(self) -> Self {
        match self {
            ClassKind::MLambda => ClassKind::MMu,
            ClassKind::MMu => ClassKind::MLambda,
            k => k,
        }
    }
}

/// Classification of one parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamClass {
    pub kind: ClassKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub period: Option<usize>,
    #[serde(
        with = "crate::wire::opt_complex",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub multiplier: Option<C64>,
    /// Refined attracting cycle of the free asymptotic value.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cycle: Option<CycleInfo>,
    pub lambda_orbit_len: usize,
    pub mu_orbit_len: usize,
}

impl ParamClass {
    fn bare(kind: ClassKind, lambda_orbit_len: usize, mu_orbit_len: usize) -> Self {
        Self {
            kind,
            period: None,
            multiplier: None,
            cycle: None,
            lambda_orbit_len,
            mu_orbit_len,
        }
    }

    pub fn singular() -> Self {
        Self::bare(ClassKind::Singular, 0, 0)
    }

    pub fn is_determined(&self) -> bool {
        !matches!(self.kind, ClassKind::Undetermined | ClassKind::Singular)
    }
}

/// Newton on `f^n(z) − z` from `seed`; the returned cycle starts
/// `points[1 % n]` at the refined seed. If the root has a smaller exact
/// period the cycle is reported with that period.
pub fn refine_cycle(p: &ParamPoint, seed: C64, n: usize) -> Result<CycleInfo> {
    let newton_err = || Error::NewtonDivergence { seed };
    let eval = |z: C64| -> Result<(C64, C64)> {
        let mut w = z;
        let mut d = C64::new(1.0, 0.0);
        for _ in 0..n {
            d *= eval_f_prime(p, w)?;
            w = eval_f(p, w)?;
        }
        Ok((w - z, d - 1.0))
    };

    let mut z = seed;
    let (mut g, mut dg) = eval(z).map_err(|_| newton_err())?;
    for _ in 0..NEWTON_STEPS {
        let scale = 1.0 + z.norm();
        if g.norm() <= 1e-15 * scale {
            break;
        }
        if dg.norm() == 0.0 {
            return Err(newton_err());
        }
        let mut step = g / dg;
        let mut accepted = None;
        for _ in 0..8 {
            if let Ok((g1, dg1)) = eval(z - step) {
                if g1.norm() < g.norm() || g1.norm() <= 1e-14 * scale {
                    accepted = Some((z - step, g1, dg1));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((z1, g1, dg1)) = accepted else { break };
        let moved = (z1 - z).norm();
        z = z1;
        g = g1;
        dg = dg1;
        if moved <= 1e-15 * scale {
            break;
        }
    }
    if g.norm() > 1e-10 * (1.0 + z.norm()) || (z - seed).norm() > 1e-3 * (1.0 + seed.norm()) {
        return Err(newton_err());
    }
    // slow rotation near a multiplier e^{2πi/m} makes a fixed point look like
    // an m-cycle; Newton then lands on the fixed point itself
    let mut w = z;
    for d in 1..n {
        w = eval_f(p, w).map_err(|_| newton_err())?;
        if n.is_multiple_of(d) && (w - z).norm() <= 1e-9 * (1.0 + z.norm()) {
            return refine_cycle(p, z, d);
        }
    }

    let mut points = vec![C64::new(0.0, 0.0); n];
    let mut multiplier = C64::new(1.0, 0.0);
    let mut ln_abs_multiplier = 0.0;
    let mut w = z;
    for i in 0..n {
        points[(1 + i) % n] = w;
        multiplier *= eval_f_prime(p, w).map_err(|_| newton_err())?;
        ln_abs_multiplier += eval_ln_abs_f_prime(p, w).map_err(|_| newton_err())?;
        w = eval_f(p, w).map_err(|_| newton_err())?;
    }
    Ok(CycleInfo {
        period: n,
        points,
        multiplier,
        ln_abs_multiplier,
    })
}

/// Finds the minimal period of a converged orbit tail and refines the cycle.
///
/// `orbit_tail[0]` is taken as the seed, so the result is aligned with
/// `points[1 % n]` attracting `orbit_tail[0]`. Refinement failures yield `None`.
pub fn detect_cycle(
    p: &ParamPoint,
    orbit_tail: &[C64],
    budget: &ClassifierBudget,
) -> Option<CycleInfo> {
    let len = orbit_tail.len();
    if len < 2 {
        return None;
    }
    let max_period = budget.max_period().min(len / 2).max(1);
    let t = len - 1;
    let n = near_return(orbit_tail, len, t, max_period, budget.eps_cycle)?;
    let raw = aligned_cycle(p, orbit_tail, len, t, n);
    refine_cycle(p, raw.points[1 % n], n).ok()
}

/// Where one asymptotic value ends up.
enum Fate {
    Zero,
    Cycle(CycleInfo),
    Unknown,
}

fn fate(p: &ParamPoint, av: C64, limits: &OrbitLimits) -> (Fate, usize) {
    let (verdict, used) = orbit_fate(p, av, limits);
    let fate = match verdict {
        OrbitVerdict::ConvergedToZero => Fate::Zero,
        OrbitVerdict::ConvergedToCycle(raw) => {
            let n = raw.period;
            if raw.points.iter().all(|a| a.norm() < ORIGIN_RADIUS) {
                Fate::Zero
            } else {
                match refine_cycle(p, raw.points[1 % n], n) {
                    Ok(c) if c.is_attracting() => Fate::Cycle(c),
                    _ => Fate::Unknown,
                }
            }
        }
        _ => Fate::Unknown,
    };
    (fate, used)
}

/// Classifies `p` by the fates of `μ` and `λ`, in that order.
pub fn classify(p: &ParamPoint, budget: &ClassifierBudget) -> ParamClass {
    let limits = budget.orbit_limits();
    let (mu_fate, mu_len) = fate(p, p.mu, &limits);
    if matches!(mu_fate, Fate::Unknown) {
        // one orbit must tend to 0 and that is the only way to classify
        return ParamClass::bare(ClassKind::Undetermined, 0, mu_len);
    }
    let (lambda_fate, lambda_len) = fate(p, p.lambda, &limits);
    let (kind, cycle) = match (mu_fate, lambda_fate) {
        (Fate::Zero, Fate::Zero) => (ClassKind::ShiftLocus, None),
        (Fate::Zero, Fate::Cycle(c)) => (ClassKind::MLambda, Some(c)),
        (Fate::Cycle(c), Fate::Zero) => (ClassKind::MMu, Some(c)),
        _ => (ClassKind::Undetermined, None),
    };
    let mut out = ParamClass::bare(kind, lambda_len, mu_len);
    if let Some(c) = cycle {
        out.period = Some(c.period);
        out.multiplier = Some(c.multiplier);
        out.cycle = Some(c);
    }
    out
}

/// [`classify`] from raw `(ρ, λ)`, returning `Singular` for `λ ∈ {0, ρ/2}`.
pub fn classify_lambda(rho: C64, lambda: C64, budget: &ClassifierBudget) -> ParamClass {
    match ParamPoint::new(rho, lambda) {
        Ok(p) => classify(&p, budget),
        Err(_) => ParamClass::singular(),
    }
}

/// Branch labels of an attracting cycle, based at `a_1 = points[1 % n]`.
///
/// Entry `j` is the `k` with `a_{j+1} = g_{λ,k}(a_{j+2})` (indices mod `n`), so
/// that `a_1 = g_{e_0} ∘ … ∘ g_{e_{n−1}}(a_1)`: the last entry is applied first.
pub fn cycle_itinerary(p: &ParamPoint, cycle: &CycleInfo) -> Result<Itinerary> {
    let n = cycle.period;
    let a = |i: usize| cycle.points[i % n];
    let mut entries = Vec::with_capacity(n);
    for j in 0..n {
        let base = inverse_branch(p, 0, a(j + 2))?;
        let q = (a(j + 1) - base).im / PI;
        let k = q.round();
        if (q - k).abs() > 0.45 {
            return Err(Error::BranchAmbiguity(q));
        }
        entries.push(k as i64);
    }
    let mut z = a(1);
    for &k in entries.iter().rev() {
        z = inverse_branch(p, k, z)?;
    }
    if (z - a(1)).norm() > 1e-8 * (1.0 + a(1).norm()) {
        return Err(Error::BranchAmbiguity((z - a(1)).norm()));
    }
    Itinerary::new(entries)
}
