//! Linearizing coordinates at attracting fixed points and what they reveal
//! about the shift locus: the partition `S_λ / S_μ / S_*`, the tie curve
//! `S_*`, and the model map `E`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{branch_label, eval_f, eval_f_prime, inverse_branch, iterate, OrbitVerdict};
use crate::{Error, ParamPoint, Result, C64};

/// Default relative agreement of successive extrapolated Koenigs values.
pub const DEFAULT_TARGET: f64 = 1e-13;
/// Relative tie band on `ln |φ(λ)/φ(μ)|` for `S_*` membership.
pub const TIE_TOL: f64 = 1e-6;
const MAX_ITER: usize = 2000;
const MAX_EXTRA: usize = 400;

/// Koenigs value at a point, with its derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KoenigsEval {
    pub value: C64,
    pub derivative: C64,
    /// Orbit depth of the last term used.
    pub n_used: usize,
    /// Change between the last two extrapolated values.
    pub change: f64,
}

/// `φ = lim ρ^{−n}(f^n − c)` for an attracting fixed point `c` of a family
/// member, with `φ(c) = 0` and `φ'(c) = 1`.
#[derive(Clone, Copy, Debug)]
pub struct Linearizer {
    pub param: ParamPoint,
    pub center: C64,
    pub multiplier: C64,
    /// Radius around the center inside which terms enter the extrapolation.
    pub disk: f64,
    /// Below this distance from the center rounding dominates.
    floor: f64,
}

impl Linearizer {
    /// The linearizer of `f_λ` at `0`.
    pub fn at_origin(p: &ParamPoint) -> Self {
        let disk = 0.01 * p.lambda.norm().min(p.mu.norm()).min(1.0);
        Self {
            param: *p,
            center: C64::new(0.0, 0.0),
            multiplier: p.rho,
            disk,
            floor: 1e-250,
        }
    }

    /// The linearizer of `f_λ` at another attracting fixed point `q`.
    pub fn at_fixed_point(p: &ParamPoint, q: C64) -> Result<Self> {
        let multiplier = eval_f_prime(p, q)?;
        if multiplier.norm() >= 1.0 || multiplier.norm() == 0.0 {
            return Err(Error::NotInBasin(q));
        }
        let disk = 0.01
            * (p.lambda - q)
                .norm()
                .min((p.mu - q).norm())
                .min(q.norm())
                .min(1.0);
        Ok(Self {
            param: *p,
            center: q,
            multiplier,
            disk,
            floor: 1e-5 * q.norm(),
        })
    }

    pub fn value(&self, z: C64) -> Result<C64> {
        Ok(self.eval(z, DEFAULT_TARGET)?.value)
    }

    pub fn eval(&self, z: C64, target: f64) -> Result<KoenigsEval> {
        self.eval_from_depth(z, 0, target)
    }

    /// Evaluates with the extrapolation starting no earlier than `min_depth`.
    ///
    /// Terms `φ_n = ρ^{−n}(f^n(z) − c)` differ from the limit by a series in
    /// `ρ^n`; two Richardson passes remove the first two powers.
    pub fn eval_from_depth(&self, z: C64, min_depth: usize, target: f64) -> Result<KoenigsEval> {
        let rho = self.multiplier;
        let c = self.center;
        let p = &self.param;
        let mut w = z;
        let mut d = C64::new(1.0, 0.0);
        let mut inv = C64::new(1.0, 0.0);
        let mut terms: Vec<(C64, C64)> = Vec::new();
        let mut r2: Vec<(C64, C64)> = Vec::new();
        let mut entered = None;
        let one = C64::new(1.0, 0.0);
        let rho2 = rho * rho;

        for n in 0..=MAX_ITER + MAX_EXTRA {
            let dist = (w - c).norm();
            if !(dist.is_finite()) {
                return Err(Error::NotInBasin(z));
            }
            if dist < self.disk && n >= min_depth {
                entered.get_or_insert(n);
                terms.push(((w - c) * inv, d * inv));
                let m = terms.len();
                if m >= 3 {
                    let r1 = |i: usize| {
                        let (a0, b0) = terms[i];
                        let (a1, b1) = terms[i + 1];
                        ((a1 - rho * a0) / (one - rho), (b1 - rho * b0) / (one - rho))
                    };
                    let (u0, v0) = r1(m - 3);
                    let (u1, v1) = r1(m - 2);
                    r2.push((
                        (u1 - rho2 * u0) / (one - rho2),
                        (v1 - rho2 * v0) / (one - rho2),
                    ));
                }
                if r2.len() >= 2 {
                    let (a, da) = r2[r2.len() - 1];
                    let (b, _) = r2[r2.len() - 2];
                    let change = (a - b).norm();
                    let done = change <= target * (1.0 + a.norm())
                        || dist < self.floor
                        || n >= entered.unwrap_or(n) + MAX_EXTRA;
                    if done {
                        return Ok(KoenigsEval {
                            value: a,
                            derivative: da,
                            n_used: n,
                            change,
                        });
                    }
                }
                if dist < self.floor || dist == 0.0 {
                    let (a, da) = r2.last().copied().unwrap_or(terms[m - 1]);
                    return Ok(KoenigsEval {
                        value: a,
                        derivative: da,
                        n_used: n,
                        change: 0.0,
                    });
                }
            }
            if n >= MAX_ITER && entered.is_none() {
                break;
            }
            d *= eval_f_prime(p, w).map_err(|_| Error::NotInBasin(z))?;
            w = eval_f(p, w).map_err(|_| Error::NotInBasin(z))?;
            inv /= rho;
        }
        Err(Error::NotInBasin(z))
    }

    /// `|φ(f(z)) − ρ φ(z)|`.
    pub fn functional_residual(&self, z: C64) -> Result<f64> {
        let fz = eval_f(&self.param, z)?;
        Ok((self.value(fz)? - self.multiplier * self.value(z)?).norm())
    }

    /// The branch of `φ^{−1}` fixing the center, continued along the straight
    /// segment from `0` to `zeta`.
    pub fn invert(&self, zeta: C64) -> Result<C64> {
        self.continue_inverse(self.center, C64::new(0.0, 0.0), zeta)
    }

    /// Continues `φ^{−1}` along the segment `zeta0 → zeta1`, starting from a
    /// point `z0` with `φ(z0) = zeta0`.
    pub fn continue_inverse(&self, z0: C64, zeta0: C64, zeta1: C64) -> Result<C64> {
        let span = zeta1 - zeta0;
        if span.norm() == 0.0 {
            return Ok(z0);
        }
        let tol = 1e-10 * (1.0 + zeta1.norm());
        let mut z = z0;
        let mut t = 0.0f64;
        let mut dt = (0.25 * self.disk / span.norm()).min(1.0);
        let mut deriv = self.eval(z, DEFAULT_TARGET)?.derivative;

        while t < 1.0 {
            if dt < 1e-10 {
                return Err(Error::ContinuationStuck { t });
            }
            let t1 = (t + dt).min(1.0);
            let goal = zeta0 + t1 * span;
            let pred = z + (t1 - t) * span / deriv;
            match self.correct(pred, goal, tol, (pred - z).norm()) {
                Some((z1, d1)) => {
                    z = z1;
                    deriv = d1;
                    t = t1;
                    dt *= 1.5;
                }
                None => dt *= 0.5,
            }
        }
        Ok(z)
    }

    /// Newton corrector for `φ(z) = goal`. Rejects runs whose first correction
    /// is large against the predictor step, which signals a sheet change.
    fn correct(&self, mut z: C64, goal: C64, tol: f64, step: f64) -> Option<(C64, C64)> {
        for i in 0..12 {
            let e = self.eval(z, DEFAULT_TARGET).ok()?;
            let defect = e.value - goal;
            if defect.norm() <= tol {
                return Some((z, e.derivative));
            }
            if e.derivative.norm() == 0.0 {
                return None;
            }
            let dz = defect / e.derivative;
            if i == 0 && dz.norm() > 0.3 * step + 1e-14 * (1.0 + z.norm()) {
                return None;
            }
            z -= dz;
        }
        None
    }
}

/// `φ_λ(z)` at the origin with the given relative convergence target.
pub fn koenigs_value(p: &ParamPoint, z: C64, target_residual: f64) -> Result<C64> {
    Ok(Linearizer::at_origin(p).eval(z, target_residual)?.value)
}

/// `φ_λ(z)` with extrapolation forced to start at depth `depth` or later.
pub fn koenigs_at_depth(p: &ParamPoint, z: C64, depth: usize) -> Result<KoenigsEval> {
    Linearizer::at_origin(p).eval_from_depth(z, depth, DEFAULT_TARGET)
}

/// Koenigs data of one shift-locus parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KoenigsFrame {
    pub param: ParamPoint,
    #[serde(with = "crate::wire::complex")]
    pub phi_at_lambda: C64,
    #[serde(with = "crate::wire::complex")]
    pub phi_at_mu: C64,
    pub n_used: usize,
    /// Largest functional-equation residual at `λ` and `μ`.
    pub residual: f64,
}

pub fn koenigs_frame(p: &ParamPoint) -> Result<KoenigsFrame> {
    let lin = Linearizer::at_origin(p);
    let a = lin.eval(p.lambda, DEFAULT_TARGET)?;
    let b = lin.eval(p.mu, DEFAULT_TARGET)?;
    let residual = lin
        .functional_residual(p.lambda)?
        .max(lin.functional_residual(p.mu)?);
    Ok(KoenigsFrame {
        param: *p,
        phi_at_lambda: a.value,
        phi_at_mu: b.value,
        n_used: a.n_used.max(b.n_used),
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SPartition {
    /// `μ` bounds the maximal linearizing disk.
    SLambda,
    /// `λ` bounds it.
    SMu,
    /// Both do.
    SStar,
}

impl SPartition {
    pub fn mirrored(self) -> Self {
        match self {
            SPartition::SLambda => SPartition::SMu,
            SPartition::SMu => SPartition::SLambda,
            SPartition::SStar => SPartition::SStar,
        }
    }
}

/// `true` if continuing `φ^{−1}` from the center along the ray to `φ(a)`
/// ends at `a` itself.
fn reachable(lin: &Linearizer, a: C64, phi_a: C64) -> bool {
    match lin.invert(phi_a) {
        Ok(z) => (z - a).norm() < 1e-6 * (1.0 + a.norm()),
        Err(_) => false,
    }
}

/// Which asymptotic value lies on the boundary of the maximal linearizing
/// domain.
///
/// The value with the smaller `|φ|` is the candidate, but a point of the
/// grand orbit of `0` (say `f^n(λ) = 0`, so `φ(λ) = 0`) is not reached by the
/// inverse branch; in that case the other value is the boundary point.
pub fn s_partition(p: &ParamPoint) -> Result<SPartition> {
    let lin = Linearizer::at_origin(p);
    let phi_l = lin.value(p.lambda).map_err(|_| Error::NotShiftLocus)?;
    let phi_m = lin.value(p.mu).map_err(|_| Error::NotShiftLocus)?;
    let log_ratio = phi_l.norm().ln() - phi_m.norm().ln();
    if log_ratio.abs() < TIE_TOL {
        // equal values (f(λ) = f(μ), say) tie without both being on the boundary
        let on_l = reachable(&lin, p.lambda, phi_l);
        let on_m = reachable(&lin, p.mu, phi_m);
        return Ok(match (on_l, on_m) {
            (false, true) => SPartition::SLambda,
            (true, false) => SPartition::SMu,
            _ => SPartition::SStar,
        });
    }
    let mu_first = log_ratio > 0.0;
    let order = if mu_first {
        [
            (p.mu, phi_m, SPartition::SLambda),
            (p.lambda, phi_l, SPartition::SMu),
        ]
    } else {
        [
            (p.lambda, phi_l, SPartition::SMu),
            (p.mu, phi_m, SPartition::SLambda),
        ]
    };
    for (a, phi_a, part) in order {
        if phi_a.norm() > 0.0 && reachable(&lin, a, phi_a) {
            return Ok(part);
        }
    }
    Err(Error::PartitionUnresolved)
}

/// `ln|φ(λ)| − ln|φ(μ)|`, or `None` outside the shift locus.
pub fn tie_function(rho: C64, lambda: C64) -> Option<f64> {
    let p = ParamPoint::new(rho, lambda).ok()?;
    let lin = Linearizer::at_origin(&p);
    let a = lin.value(p.lambda).ok()?;
    let b = lin.value(p.mu).ok()?;
    Some(a.norm().ln() - b.norm().ln())
}

/// Points of `S_*` on `n_samples` rays from `ρ/2`.
///
/// Ray `j` leaves at angle `arg ρ + 2π(j + ½)/n`; `I` reflects these angles
/// about `arg ρ`, so ray `j` and ray `n − 1 − j` are exchanged by `I`. Each
/// root of the tie function is bracketed near the previous one (or `|ρ/2|`)
/// and bisected. A ray aimed exactly at the origin returns `0`.
pub fn trace_s_star(rho: C64, n_samples: usize) -> Result<Vec<C64>> {
    if !(rho.norm() > 0.0 && rho.norm() < 1.0) {
        return Err(Error::SingularParameter(format!(
            "rho = {rho} outside punctured unit disk"
        )));
    }
    let half = rho / 2.0;
    let base = rho.arg();
    let mut out: Vec<C64> = Vec::with_capacity(n_samples);
    let mut prev_r = half.norm();
    for j in 0..n_samples {
        let alpha = 2.0 * PI * (j as f64 + 0.5) / n_samples as f64;
        if (alpha - PI).abs() < 1e-12 {
            out.push(C64::new(0.0, 0.0));
            continue;
        }
        let dir = C64::from_polar(1.0, base + alpha);
        let h = |r: f64| tie_function(rho, half + r * dir);
        let found = bracket_and_bisect(&h, prev_r).or_else(|| bracket_and_bisect(&h, half.norm()));
        match found {
            Some(r) => {
                prev_r = r;
                out.push(half + r * dir);
            }
            None => {
                return Err(Error::TraceLost {
                    ray: j,
                    found: out.len(),
                    partial: out,
                })
            }
        }
    }
    Ok(out)
}

fn bracket_and_bisect(h: &dyn Fn(f64) -> Option<f64>, r0: f64) -> Option<f64> {
    let h0 = h(r0)?;
    if h0 == 0.0 {
        return Some(r0);
    }
    let mut s = 0.005;
    while s < 0.95 {
        for r in [r0 * (1.0 + s), r0 * (1.0 - s)] {
            if let Some(hr) = h(r) {
                if hr == 0.0 {
                    return Some(r);
                }
                if hr.signum() != h0.signum() {
                    return bisect(h, r0, h0, r, hr);
                }
            }
        }
        s *= 1.6;
    }
    None
}

fn bisect(
    h: &dyn Fn(f64) -> Option<f64>,
    mut a: f64,
    mut ha: f64,
    mut b: f64,
    _hb: f64,
) -> Option<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= 1e-13 * m.abs().max(1e-300) {
            break;
        }
        let hm = h(m)?;
        if hm == 0.0 {
            return Some(m);
        }
        if hm.signum() == ha.signum() {
            a = m;
            ha = hm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// The model map `Q = f_{λ_0}` whose second attracting fixed point `q_0` has
/// multiplier `ρ`, and the radius of its linearizing disk `Δ` at `λ_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFrame {
    #[serde(with = "crate::wire::complex")]
    pub rho: C64,
    #[serde(with = "crate::wire::complex")]
    pub lambda0: C64,
    #[serde(with = "crate::wire::complex")]
    pub q0: C64,
    /// `|φ_0(λ_0)|`
    pub r: f64,
    /// `φ_0(λ_0)`
    #[serde(with = "crate::wire::complex")]
    pub phi0_lambda0: C64,
}

impl ModelFrame {
    pub fn param(&self) -> Result<ParamPoint> {
        ParamPoint::new(self.rho, self.lambda0)
    }

    pub fn linearizer(&self) -> Result<Linearizer> {
        Linearizer::at_fixed_point(&self.param()?, self.q0)
    }
}

/// `(f_λ(q) − q, f'_λ(q) − ρ)`
fn model_system(rho: C64, lambda: C64, q: C64) -> Result<[C64; 2]> {
    let p = ParamPoint::new(rho, lambda)?;
    Ok([eval_f(&p, q)? - q, eval_f_prime(&p, q)? - rho])
}

fn model_newton(rho: C64, mut x: [C64; 2]) -> Result<[C64; 2]> {
    let seed = x[0];
    let diverged = || Error::NewtonDivergence { seed };
    let h = 1e-7;
    for _ in 0..60 {
        let g = model_system(rho, x[0], x[1]).map_err(|_| diverged())?;
        let mut jac = [[C64::new(0.0, 0.0); 2]; 2];
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let gp = model_system(rho, xp[0], xp[1]).map_err(|_| diverged())?;
            let gm = model_system(rho, xm[0], xm[1]).map_err(|_| diverged())?;
            for i in 0..2 {
                jac[i][j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.norm() == 0.0 {
            return Err(diverged());
        }
        let d0 = (jac[1][1] * g[0] - jac[0][1] * g[1]) / det;
        let d1 = (jac[0][0] * g[1] - jac[1][0] * g[0]) / det;
        x = [x[0] - d0, x[1] - d1];
        if !(x[0].norm().is_finite() && x[1].norm().is_finite()) || x[0].norm() > 1e6 {
            return Err(diverged());
        }
        if d0.norm() + d1.norm() < 1e-15 * (1.0 + x[0].norm() + x[1].norm()) {
            break;
        }
    }
    let g = model_system(rho, x[0], x[1]).map_err(|_| diverged())?;
    if g[0].norm() < 1e-11 && g[1].norm() < 1e-10 {
        Ok(x)
    } else {
        Err(diverged())
    }
}

/// `true` if the orbit of `λ` converges to the fixed point `q`.
fn attracts_lambda(rho: C64, lambda: C64, q: C64) -> bool {
    let Ok(p) = ParamPoint::new(rho, lambda) else {
        return false;
    };
    match iterate(&p, p.lambda, 2000).verdict {
        OrbitVerdict::ConvergedToCycle(c) => c.period == 1 && (c.points[0] - q).norm() < 1e-6,
        _ => false,
    }
}

/// The real solution with `λ`-orbit attracted to `q_0`, from a scan of real seeds.
fn real_model(rho: f64) -> Result<[C64; 2]> {
    let r = C64::new(rho, 0.0);
    for i in 1..=200 {
        let l = 0.05 * i as f64;
        let Ok(mu) = crate::derive_mu(r, C64::new(l, 0.0)) else {
            continue;
        };
        let seed = [C64::new(l, 0.0), C64::new(l, 0.0) + mu];
        if let Ok(x) = model_newton(r, seed) {
            if x[0].im.abs() < 1e-9 && x[1].norm() > 1e-3 && attracts_lambda(r, x[0], x[1]) {
                return Ok([C64::new(x[0].re, 0.0), C64::new(x[1].re, 0.0)]);
            }
        }
    }
    Err(Error::NewtonDivergence { seed: r })
}

/// Solves `f_λ(q) = q`, `f'_λ(q) = ρ` for the model parameter `λ_0` in the
/// unbounded period-one component.
///
/// Real `ρ` uses the real branch; otherwise the real solution at `|ρ|` is
/// continued along the arc to `arg ρ`.
pub fn find_model_parameter(rho: C64) -> Result<ModelFrame> {
    if !(rho.norm() > 0.0 && rho.norm() < 1.0) {
        return Err(Error::SingularParameter(format!(
            "rho = {rho} outside punctured unit disk"
        )));
    }
    let x = if rho.im == 0.0 {
        real_model(rho.re)?
    } else {
        let mut x = real_model(rho.norm())?;
        let theta = rho.arg();
        let steps = ((theta.abs() / (PI / 64.0)).ceil() as usize).max(1);
        for s in 1..=steps {
            let r = C64::from_polar(rho.norm(), theta * s as f64 / steps as f64);
            x = model_newton(r, x)?;
        }
        x
    };
    let p = ParamPoint::new(rho, x[0])?;
    let lin = Linearizer::at_fixed_point(&p, x[1])?;
    let phi0_lambda0 = lin.value(p.lambda)?;
    Ok(ModelFrame {
        rho,
        lambda0: x[0],
        q0: x[1],
        r: phi0_lambda0.norm(),
        phi0_lambda0,
    })
}

/// `true` if `w` lies in `Δ`, the image of the disk `|ζ| < r` under the
/// inverse of `φ_0` fixing `q_0`.
pub fn in_delta(model: &ModelFrame, w: C64) -> bool {
    let Ok(lin) = model.linearizer() else {
        return false;
    };
    let Ok(zeta) = lin.value(w) else { return false };
    if zeta.norm() >= model.r {
        return false;
    }
    match lin.invert(zeta) {
        Ok(z) => (z - w).norm() < 1e-7 * (1.0 + w.norm()),
        Err(_) => false,
    }
}

/// Result of [`eval_e_detailed`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EValue {
    #[serde(with = "crate::wire::complex")]
    pub w: C64,
    /// First orbit index `m` with `f^m(λ)` inside the linearizing domain.
    pub depth: usize,
    /// Branch labels used on the way back, `k_0 … k_{m−1}`.
    pub labels: Vec<i64>,
    /// `c = φ_0(λ_0)/φ_λ(μ)`
    #[serde(with = "crate::wire::complex")]
    pub scale: C64,
    /// `c φ_λ(λ)`, the target value of `φ_0(w)`.
    #[serde(with = "crate::wire::complex")]
    pub target: C64,
}

/// `E(λ) = ξ_λ(λ)` for `λ ∈ S_λ`.
pub fn eval_e(model: &ModelFrame, p: &ParamPoint) -> Result<C64> {
    Ok(eval_e_detailed(model, p)?.w)
}

/// `E(λ)`, with `ξ_λ = φ_0^{−1} ∘ c φ_λ` evaluated where the inverse is
/// univalent and carried to `λ` by the conjugacy `ξ_λ ∘ f_λ = Q ∘ ξ_λ`.
///
/// The orbit `λ_j = f^j(λ)` is followed until `λ_m` lies in the linearizing
/// domain of `0`; there `w_m = φ_0^{−1}(c φ_λ(λ_m))` by continuation from
/// `q_0`. Then `w_j = g_{λ_0,k_j}(w_{j+1})` where `λ_j = g_{λ,k_j}(λ_{j+1})`.
pub fn eval_e_detailed(model: &ModelFrame, p: &ParamPoint) -> Result<EValue> {
    if (p.rho - model.rho).norm() > 1e-14 {
        return Err(Error::InvalidSpec(
            "model frame built for another rho".into(),
        ));
    }
    if s_partition(p)? != SPartition::SLambda {
        return Err(Error::NotSLambda);
    }
    let lin = Linearizer::at_origin(p);
    let phi_mu = lin.value(p.mu)?;
    let phi_lambda = lin.value(p.lambda)?;
    let scale = model.phi0_lambda0 / phi_mu;

    let mut orbit = vec![p.lambda];
    let mut phi = phi_lambda;
    let mut depth = None;
    for m in 0..MAX_ITER {
        let lm = orbit[m];
        if phi.norm() < phi_mu.norm() && (phi.norm() == 0.0 || reachable(&lin, lm, phi)) {
            depth = Some(m);
            break;
        }
        orbit.push(eval_f(p, lm)?);
        phi *= p.rho;
    }
    let m = depth.ok_or(Error::NotInBasin(p.lambda))?;

    let model_p = model.param()?;
    let model_lin = model.linearizer()?;
    let mut w = model_lin.invert(scale * phi)?;
    let mut labels = vec![0i64; m];
    for j in (0..m).rev() {
        let (k, frac) = branch_label(p, orbit[j], orbit[j + 1])?;
        if frac > 0.45 {
            return Err(Error::BranchAmbiguity(frac));
        }
        labels[j] = k;
        w = inverse_branch(&model_p, k, w)?;
    }
    Ok(EValue {
        w,
        depth: m,
        labels,
        scale,
        target: scale * phi_lambda,
    })
}
