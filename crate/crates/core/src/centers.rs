//! Virtual cycle parameters: solutions of `f^{n−1}(av) = ∞` for `av = λ` or
//! `av = μ`, labelled by the inverse branches leading from a pole back to `av`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{eval_f, inverse_branch, nearest_pole, pole_k};
use crate::{Error, ParamPoint, Result, C64};

const MAX_ENTRY: i64 = 1_000_000;
/// Newton step used for `F'(λ)`.
pub const DIFF_STEP: f64 = 1e-7;
/// Residual required of every emitted center.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Centers closer than this are the same center.
pub const DEDUP_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ORDER: usize = 8;

/// Branch labels `k_{n−1} … k_1`. The last entry is the pole index; the
/// prepole is built by applying branches from the back of the list forward.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Itinerary(Vec<i64>);

impl Itinerary {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSpec("empty itinerary".into()));
        }
        if entries.iter().any(|k| k.abs() > MAX_ENTRY) {
            return Err(Error::InvalidSpec(format!(
                "itinerary entry beyond ±{MAX_ENTRY}"
            )));
        }
        Ok(Self(entries))
    }

    pub fn single(k: i64) -> Self {
        Self(vec![k])
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Itinerary of the next-order center with `k0` as its new pole index.
    pub fn child(&self, k0: i64) -> Self {
        let mut v = self.0.clone();
        v.push(k0);
        Self(v)
    }

    /// Drops the pole index; `None` for a single entry.
    pub fn parent(&self) -> Option<Self> {
        (self.0.len() > 1).then(|| Self(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|k| -k).collect())
    }
}

impl TryFrom<Vec<i64>> for Itinerary {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Itinerary> for Vec<i64> {
    fn from(i: Itinerary) -> Self {
        i.0
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for Itinerary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::InvalidSpec(format!("itinerary entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

/// Which asymptotic value is sent to infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkedValue {
    Lambda,
    Mu,
}

impl MarkedValue {
    pub fn value(self, p: &ParamPoint) -> C64 {
        match self {
            MarkedValue::Lambda => p.lambda,
            MarkedValue::Mu => p.mu,
        }
    }

    pub fn other(self) -> Self {
        match self {
            MarkedValue::Lambda => MarkedValue::Mu,
            MarkedValue::Mu => MarkedValue::Lambda,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MarkedValue::Lambda => "lambda",
            MarkedValue::Mu => "mu",
        }
    }
}

impl FromStr for MarkedValue {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(MarkedValue::Lambda),
            "mu" => Ok(MarkedValue::Mu),
            _ => Err(Error::InvalidSpec(format!("marked value {s:?}"))),
        }
    }
}

/// A parameter `λ*` with `f_{λ*}^{n−1}(av) = ∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirtualCenter {
    pub order: usize,
    pub marked_av: MarkedValue,
    #[serde(with = "crate::wire::complex")]
    pub location: C64,
    pub itinerary: Itinerary,
    /// `|f^{n−2}(av) − p_{k}(λ*)|` with `k` the pole index.
    pub residual: f64,
    /// `F'(λ*)` for `F(λ) = av(λ) − p_itin(λ)`.
    #[serde(with = "crate::wire::complex")]
    pub transversality: C64,
}

/// The prepole `p_itin(λ)`, a point whose `|itin|`-th image is `∞`.
pub fn prepole(p: &ParamPoint, itin: &Itinerary) -> Result<C64> {
    let e = itin.entries();
    let mut z = pole_k(p, e[e.len() - 1]);
    for &k in e[..e.len() - 1].iter().rev() {
        z = inverse_branch(p, k, z).map_err(|err| match err {
            Error::OmittedValue(_) => Error::CompositionThroughOmittedValue,
            other => other,
        })?;
    }
    Ok(z)
}

fn defect(rho: C64, marked: MarkedValue, itin: &Itinerary, lambda: C64) -> Result<C64> {
    let p = ParamPoint::new(rho, lambda)?;
    Ok(marked.value(&p) - prepole(&p, itin)?)
}

fn derivative(rho: C64, marked: MarkedValue, itin: &Itinerary, lambda: C64) -> Result<C64> {
    let h = DIFF_STEP * (1.0 + lambda.norm());
    let fp = defect(rho, marked, itin, lambda + h)?;
    let fm = defect(rho, marked, itin, lambda - h)?;
    Ok((fp - fm) / (2.0 * h))
}

/// `|f^{n−2}(av) − p_k(λ)|` for the pole index `k` of `itin`.
pub fn forward_residual(p: &ParamPoint, marked: MarkedValue, itin: &Itinerary) -> f64 {
    let mut z = marked.value(p);
    for _ in 0..itin.len() - 1 {
        z = match eval_f(p, z) {
            Ok(w) => w,
            Err(_) => return f64::INFINITY,
        };
    }
    let k = itin.entries()[itin.len() - 1];
    (z - pole_k(p, k)).norm()
}

/// Newton on `F(λ) = av(λ) − p_itin(λ)` from `seed`.
pub fn solve_virtual_center(
    rho: C64,
    marked_av: MarkedValue,
    itin: &Itinerary,
    seed: C64,
) -> Result<VirtualCenter> {
    let diverged = || Error::NewtonDivergence { seed };
    let reach = 10.0 * (1.0 + seed.norm());
    let mut lambda = seed;
    let mut f = defect(rho, marked_av, itin, lambda).map_err(|_| diverged())?;
    for _ in 0..80 {
        if f.norm() < 1e-14 * (1.0 + lambda.norm()) {
            break;
        }
        let d = derivative(rho, marked_av, itin, lambda).map_err(|_| diverged())?;
        if d.norm() == 0.0 || !d.re.is_finite() || !d.im.is_finite() {
            return Err(diverged());
        }
        let mut step = f / d;
        let mut next = None;
        for _ in 0..12 {
            let cand = lambda - step;
            if let Ok(fc) = defect(rho, marked_av, itin, cand) {
                if fc.norm() < f.norm() {
                    next = Some((cand, fc));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((cand, fc)) = next else { break };
        if (cand - seed).norm() > reach {
            return Err(Error::SeedEscaped { seed });
        }
        let moved = (cand - lambda).norm();
        lambda = cand;
        f = fc;
        if moved < 1e-16 * (1.0 + lambda.norm()) {
            break;
        }
    }
    if lambda.norm() < 1e-6 || (lambda - rho / 2.0).norm() < 1e-6 {
        return Err(Error::SingularParameter(format!(
            "Newton from {seed} reached {lambda}"
        )));
    }
    let p = ParamPoint::new(rho, lambda).map_err(|_| diverged())?;
    let residual = forward_residual(&p, marked_av, itin);
    if f.norm() >= RESIDUAL_TOL || residual.is_nan() || residual >= RESIDUAL_TOL {
        return Err(diverged());
    }
    let transversality = derivative(rho, marked_av, itin, lambda).map_err(|_| diverged())?;
    Ok(VirtualCenter {
        order: itin.len() + 1,
        marked_av,
        location: lambda,
        itinerary: itin.clone(),
        residual,
        transversality,
    })
}

/// The `I`-image of a center: a center for the other asymptotic value with
/// the negated itinerary, polished by Newton.
pub fn dual_center(rho: C64, center: &VirtualCenter) -> Result<VirtualCenter> {
    let seed = crate::inversion(rho, center.location)?;
    solve_virtual_center(
        rho,
        center.marked_av.other(),
        &center.itinerary.negated(),
        seed,
    )
}

/// Predicted location of the child with pole index `k0`.
///
/// Near `λ*` the map `λ ↦ f^{n−1}(av(λ))` has a simple pole with residue `C`,
/// so the child sits near `λ* + C/p_{k0}(λ*)`.
pub fn child_seed(rho: C64, parent: &VirtualCenter, k0: i64) -> Result<C64> {
    let delta = C64::new(1e-6, 0.0) * (1.0 + parent.location.norm());
    let lambda = parent.location + delta;
    let p = ParamPoint::new(rho, lambda)?;
    let mut z = parent.marked_av.value(&p);
    for _ in 0..parent.order - 1 {
        z = eval_f(&p, z)?;
    }
    let residue = delta * z;
    let at = ParamPoint::new(rho, parent.location)?;
    Ok(parent.location + residue / pole_k(&at, k0))
}

/// Solves the children of `parent` with pole indices `k0s`.
pub fn solve_children(
    rho: C64,
    parent: &VirtualCenter,
    k0s: &[i64],
) -> Vec<(i64, Result<VirtualCenter>)> {
    crate::par::map(k0s, |&k0| {
        let res = child_seed(rho, parent, k0).and_then(|seed| {
            solve_virtual_center(rho, parent.marked_av, &parent.itinerary.child(k0), seed)
        });
        (k0, res)
    })
}

/// Axis-aligned rectangle in the λ-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// `true` if `z` is strictly inside.
    pub fn contains_strictly(&self, z: C64) -> bool {
        z.re > self.re_min && z.re < self.re_max && z.im > self.im_min && z.im < self.im_max
    }

    pub fn is_empty(&self) -> bool {
        !(self.re_max > self.re_min && self.im_max > self.im_min)
    }
}

/// A seed whose Newton run failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub marked_av: MarkedValue,
    pub itinerary: Itinerary,
    #[serde(with = "crate::wire::complex")]
    pub seed: C64,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub centers: Vec<VirtualCenter>,
    pub failures: Vec<SeedFailure>,
}

/// Enumeration settings beyond the window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumerateOptions {
    pub max_order: usize,
    pub k_min: i64,
    pub k_max: i64,
    /// Grid points per axis for order-2 seeds.
    pub grid: usize,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            max_order: 3,
            k_min: -5,
            k_max: 5,
            grid: 12,
        }
    }
}

type Job = (MarkedValue, Itinerary, C64);

fn run_jobs(rho: C64, jobs: &[Job], failures: &mut Vec<SeedFailure>) -> Vec<VirtualCenter> {
    let results = crate::par::map(jobs, |(m, itin, seed)| {
        solve_virtual_center(rho, *m, itin, *seed)
    });
    let mut out = Vec::new();
    for ((m, itin, seed), r) in jobs.iter().zip(results) {
        match r {
            Ok(c) => out.push(c),
            Err(e) => failures.push(SeedFailure {
                marked_av: *m,
                itinerary: itin.clone(),
                seed: *seed,
                error: e.to_string(),
            }),
        }
    }
    out
}

/// Keeps one center per `(marked, itinerary)` and per location, preferring
/// lower residuals.
fn merge(into: &mut Vec<VirtualCenter>, found: Vec<VirtualCenter>) {
    let mut by_label: HashMap<(MarkedValue, Itinerary), usize> = into
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.marked_av, c.itinerary.clone()), i))
        .collect();
    for c in found {
        let key = (c.marked_av, c.itinerary.clone());
        if let Some(&i) = by_label.get(&key) {
            if c.residual < into[i].residual {
                into[i] = c;
            }
            continue;
        }
        if let Some(i) = into.iter().position(|o| {
            o.marked_av == c.marked_av && (o.location - c.location).norm() < DEDUP_TOL
        }) {
            if c.residual < into[i].residual {
                by_label.remove(&(into[i].marked_av, into[i].itinerary.clone()));
                by_label.insert(key, i);
                into[i] = c;
            }
            continue;
        }
        by_label.insert(key, into.len());
        into.push(c);
    }
}

/// Virtual centers of both asymptotic values inside `window`, orders
/// `2..=max_order`, pole indices in `k_min..=k_max`.
///
/// Order-2 centers are seeded from `p_k(ρ)` and a coarse grid; higher orders
/// from the predicted children of every center found one order below.
/// `μ`-centers come from `I`-images of `λ`-centers. Centers within `1e−6` of
/// `0` or `ρ/2` are dropped.
pub fn enumerate_centers(rho: C64, window: &Window, opts: &EnumerateOptions) -> Enumeration {
    let mut failures = Vec::new();
    let mut all: Vec<VirtualCenter> = Vec::new();
    if window.is_empty() || opts.max_order < 2 || opts.k_min > opts.k_max {
        return Enumeration::default();
    }
    let ks: Vec<i64> = (opts.k_min..=opts.k_max).collect();
    let keep = |c: &VirtualCenter| {
        window.contains(c.location)
            && c.location.norm() > 1e-6
            && (c.location - rho / 2.0).norm() > 1e-6
    };

    // λ-centers in the window and in its I-image, so that both kinds are found
    let mirror = mirrored_window(rho, window);
    let mut seeds: Vec<Job> = Vec::new();
    for &k in &ks {
        let itin = Itinerary::single(k);
        if let Ok(p) = ParamPoint::new(rho, rho) {
            seeds.push((MarkedValue::Lambda, itin.clone(), pole_k(&p, k)));
        }
        for w in [window, &mirror] {
            for z in grid_points(w, opts.grid) {
                seeds.push((MarkedValue::Lambda, itin.clone(), z));
            }
        }
    }
    let lambda2 = run_jobs(rho, &seeds, &mut failures);
    let mut level = Vec::new();
    merge(&mut level, lambda2);

    let mut order = 2;
    loop {
        let duals: Vec<VirtualCenter> = crate::par::map(&level, |c| dual_center(rho, c))
            .into_iter()
            .filter_map(|r| r.ok())
            .collect();
        let mut both = level.clone();
        merge(&mut both, duals);
        both.retain(|c| {
            keep(c) || window.contains(crate::inversion(rho, c.location).unwrap_or(c.location))
        });
        merge(&mut all, both.iter().filter(|c| keep(c)).cloned().collect());
        if order >= opts.max_order.min(DEFAULT_MAX_ORDER) {
            break;
        }
        let mut jobs: Vec<Job> = Vec::new();
        for parent in both.iter().filter(|c| c.marked_av == MarkedValue::Lambda) {
            for &k0 in &ks {
                match child_seed(rho, parent, k0) {
                    Ok(seed) => jobs.push((MarkedValue::Lambda, parent.itinerary.child(k0), seed)),
                    Err(e) => failures.push(SeedFailure {
                        marked_av: MarkedValue::Lambda,
                        itinerary: parent.itinerary.child(k0),
                        seed: parent.location,
                        error: e.to_string(),
                    }),
                }
            }
        }
        let found = run_jobs(rho, &jobs, &mut failures);
        level = Vec::new();
        merge(&mut level, found);
        if level.is_empty() {
            break;
        }
        order += 1;
    }

    all.sort_by(|a, b| {
        a.order
            .cmp(&b.order)
            .then(a.location.norm().total_cmp(&b.location.norm()))
            .then(a.marked_av.cmp(&b.marked_av))
            .then(a.itinerary.cmp(&b.itinerary))
    });
    Enumeration {
        centers: all,
        failures,
    }
}

fn grid_points(w: &Window, n: usize) -> Vec<C64> {
    if w.is_empty() || n == 0 {
        return Vec::new();
    }
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let re = w.re_min + (i as f64 + 0.5) * (w.re_max - w.re_min) / n as f64;
            let im = w.im_min + (j as f64 + 0.5) * (w.im_max - w.im_min) / n as f64;
            v.push(C64::new(re, im));
        }
    }
    v
}

/// Bounding box of the `I`-image of the window boundary (clamped to `|λ| ≤ 100`).
fn mirrored_window(rho: C64, w: &Window) -> Window {
    let mut out = Window::new(
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    let steps = 64;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let re = w.re_min + t * (w.re_max - w.re_min);
        let im = w.im_min + t * (w.im_max - w.im_min);
        for z in [
            C64::new(re, w.im_min),
            C64::new(re, w.im_max),
            C64::new(w.re_min, im),
            C64::new(w.re_max, im),
        ] {
            if let Ok(m) = crate::inversion(rho, z) {
                let m = if m.norm() > 100.0 {
                    m * (100.0 / m.norm())
                } else {
                    m
                };
                out.re_min = out.re_min.min(m.re);
                out.re_max = out.re_max.max(m.re);
                out.im_min = out.im_min.min(m.im);
                out.im_max = out.im_max.max(m.im);
            }
        }
    }
    out
}

/// The virtual cycle `a_1 = av, a_{i+1} = f(a_i)` of a center, ending at the
/// pole; `a_0 = ∞` is implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirtualCycle {
    #[serde(with = "crate::wire::vec_complex")]
    pub points: Vec<C64>,
    /// Index of the pole reached by the last point.
    pub pole_index: i64,
    /// Distance from the last point to that pole.
    pub pole_distance: f64,
    /// `true` when the implicit closing point `a_0 = ∞` was reached.
    pub closes_at_infinity: bool,
}

pub fn virtual_cycle(rho: C64, center: &VirtualCenter, p_budget: usize) -> Result<VirtualCycle> {
    let p = ParamPoint::new(rho, center.location)?;
    let len = (center.order - 1).min(p_budget.max(1));
    let mut points = Vec::with_capacity(len);
    let mut z = center.marked_av.value(&p);
    points.push(z);
    while points.len() < len {
        z = eval_f(&p, z)?;
        points.push(z);
    }
    let (pole_index, pole_distance) = nearest_pole(&p, z);
    Ok(VirtualCycle {
        points,
        pole_index,
        pole_distance,
        closes_at_infinity: len == center.order - 1 && pole_distance < 1e-8,
    })
}

/// Tab-separated record: order, marked value, itinerary, Re λ*, Im λ*,
/// residual, |transversality|.
pub fn to_record(c: &VirtualCenter) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}\t{:e}\t{:e}",
        c.order,
        c.marked_av.as_str(),
        c.itinerary,
        c.location.re,
        c.location.im,
        c.residual,
        c.transversality.norm()
    )
}

/// Fields of one record line.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterRecord {
    pub order: usize,
    pub marked_av: MarkedValue,
    pub itinerary: Itinerary,
    pub location: C64,
    pub residual: f64,
    pub transversality_abs: f64,
}

pub fn parse_record(line: &str) -> Result<CenterRecord> {
    let f: Vec<&str> = line.trim_end_matches(['\n', '\r']).split('\t').collect();
    if f.len() != 7 {
        return Err(Error::InvalidSpec(format!(
            "expected 7 fields, got {}",
            f.len()
        )));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| Error::InvalidSpec(format!("field {s:?}: {e}")))
    };
    let order = f[0]
        .parse::<usize>()
        .map_err(|e| Error::InvalidSpec(format!("order {:?}: {e}", f[0])))?;
    let itinerary: Itinerary = f[2].parse()?;
    if itinerary.len() + 1 != order {
        return Err(Error::InvalidSpec(
            "order does not match itinerary length".into(),
        ));
    }
    Ok(CenterRecord {
        order,
        marked_av: f[1].parse()?,
        itinerary,
        location: C64::new(num(f[3])?, num(f[4])?),
        residual: num(f[5])?,
        transversality_abs: num(f[6])?,
    })
}
