use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use merodyn::centers::{EnumerateOptions, Window};
use merodyn::classify::ClassifierBudget;
use merodyn::render::{Overlay, PaletteId, Plane, RenderSpec, Viewport, MAX_ZOOM, TILE_SIZE};
use merodyn::{ParamPoint, C64};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Inputs closer than this (relative to `|ρ|`) to `0` or `ρ/2` are singular.
/// Decimal inputs of `ρ/2` are usually truncated, hence the loose value.
pub const WIRE_SINGULAR_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigError {
    /// Unparseable or out-of-range input.
    Malformed(String),
    /// Well-formed, but `λ` or the window hits `0` or `ρ/2`.
    Singular(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Malformed(m) => write!(f, "{m}"),
            ConfigError::Singular(m) => write!(f, "singular parameter: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

pub type Result<T> = std::result::Result<T, ConfigError>;

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError::Malformed(msg.into())
}

/// Raw job settings. Keys use dashes; underscores are accepted and folded.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key=value", n + 1)))?;
            let key = normalize(k);
            if out.0.contains_key(&key) {
                return Err(bad(format!("line {}: duplicate key {key}", n + 1)));
            }
            out.0.insert(key, v.trim().to_string());
        }
        Ok(out)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self(
            pairs
                .into_iter()
                .map(|(k, v)| (normalize(k), v.to_string()))
                .collect(),
        )
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(normalize(key), value.into());
    }

    /// Values in `other` win.
    pub fn overlay(mut self, other: Settings) -> Self {
        self.0.extend(other.0);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn req(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| bad(format!("missing {key}")))
    }

    fn complex(&self, key: &str) -> Result<Option<C64>> {
        self.get(key).map(|s| complex_arg(key, s)).transpose()
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| bad(format!("{key}: cannot parse {s:?}")))
            })
            .transpose()
    }

    pub fn rho(&self) -> Result<C64> {
        let rho = complex_arg("rho", self.req("rho")?)?;
        if !(rho.norm() > 0.0 && rho.norm() < 1.0) {
            return Err(bad(format!(
                "rho outside punctured unit disk (got {})",
                fmt_c(rho)
            )));
        }
        Ok(rho)
    }

    pub fn lambda(&self, rho: C64) -> Result<C64> {
        let lambda = complex_arg("lambda", self.req("lambda")?)?;
        check_regular(rho, lambda)?;
        Ok(lambda)
    }

    pub fn budget(&self) -> Result<ClassifierBudget> {
        let mut b = ClassifierBudget::default();
        if let Some(v) = self.number("max-iter")? {
            b.max_iter = v;
        }
        if let Some(v) = self.number("cycle-window")? {
            b.cycle_window = v;
        }
        if let Some(v) = self.number("eps-cycle")? {
            b.eps_cycle = v;
        }
        if let Some(v) = self.number("eps-zero")? {
            b.eps_zero = v;
        }
        b.validate().map_err(|e| bad(e.to_string()))?;
        Ok(b)
    }
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

fn fmt_c(z: C64) -> String {
    merodyn::wire::format_complex(z)
}

/// Parses a complex input, which must be written as `re,im`.
pub fn complex_arg(key: &str, s: &str) -> Result<C64> {
    if !s.contains(',') {
        return Err(bad(format!("{key}: expected \"re,im\", got {s:?}")));
    }
    merodyn::wire::parse_complex(s).ok_or_else(|| bad(format!("{key}: cannot parse {s:?}")))
}

pub fn check_regular(rho: C64, lambda: C64) -> Result<()> {
    let tol = WIRE_SINGULAR_TOL * rho.norm();
    if lambda.norm() < tol {
        return Err(ConfigError::Singular(format!(
            "lambda = {} is 0",
            fmt_c(lambda)
        )));
    }
    if (lambda - rho / 2.0).norm() < tol {
        return Err(ConfigError::Singular(format!(
            "lambda = {} is rho/2",
            fmt_c(lambda)
        )));
    }
    ParamPoint::new(rho, lambda).map_err(|e| ConfigError::Singular(e.to_string()))?;
    Ok(())
}

/// `re_min,im_min,re_max,im_max`, the usual west/south/east/north order.
pub fn parse_bbox(s: &str) -> Result<Window> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(format!("bbox: cannot parse {s:?}")))?;
    if v.len() != 4 || v.iter().any(|x| !x.is_finite()) {
        return Err(bad(format!("bbox: expected 4 numbers, got {s:?}")));
    }
    if v[0] > v[2] || v[1] > v[3] {
        return Err(bad(format!("bbox: min above max in {s:?}")));
    }
    Ok(Window::new(v[0], v[2], v[1], v[3]))
}

fn parse_overlays(s: &str) -> Result<BTreeSet<Overlay>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Overlay>().map_err(|e| bad(e.to_string())))
        .collect()
}

/// Canonical hex digest of any serializable job description.
pub fn digest_of<T: Serialize>(job: &T) -> String {
    let bytes = serde_json::to_vec(job).expect("job serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneKind {
    Parameter,
    Dynamic,
}

impl std::str::FromStr for PlaneKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parameter" | "param" => Ok(PlaneKind::Parameter),
            "dynamic" | "dyn" => Ok(PlaneKind::Dynamic),
            _ => Err(bad(format!("unknown plane {s:?}"))),
        }
    }
}

/// Default viewports: the parameter view sits to the right of `ρ/2` in the
/// direction of `ρ`, the dynamic view is centered at the origin.
pub fn render_spec(s: &Settings, plane: PlaneKind) -> Result<RenderSpec> {
    let rho = s.rho()?;
    let (plane, center, width) = match plane {
        PlaneKind::Parameter => {
            let default = rho / 2.0 + 1.2 * rho / rho.norm();
            (Plane::Parameter { rho }, default, 5.0)
        }
        PlaneKind::Dynamic => {
            let lambda = s.lambda(rho)?;
            let p =
                ParamPoint::new(rho, lambda).map_err(|e| ConfigError::Singular(e.to_string()))?;
            (Plane::Dynamic(p), C64::new(0.0, 0.0), 8.0)
        }
    };
    let center = s.complex("center")?.unwrap_or(center);
    let width = s.number("width")?.unwrap_or(width);
    let px: u32 = s.number("px")?.unwrap_or(512);
    let height_px: u32 = s.number("height-px")?.unwrap_or(px);
    let spec = RenderSpec {
        plane,
        viewport: Viewport { center, width },
        width_px: px,
        height_px,
        budget: s.budget()?,
        palette: match s.get("palette") {
            Some(p) => p.parse::<PaletteId>().map_err(|e| bad(e.to_string()))?,
            None => PaletteId::Classic,
        },
        overlays: match s.get("overlays") {
            Some(o) => parse_overlays(o)?,
            None => BTreeSet::new(),
        },
    };
    spec.validate().map_err(|e| match e {
        merodyn::Error::SingularParameter(m) => bad(m),
        other => bad(other.to_string()),
    })?;
    Ok(spec)
}

/// Base spec of a tile pyramid. Its resolution is pinned to one tile so that
/// the digest only depends on the view, budget, palette and overlays.
pub fn tile_base(s: &Settings, plane: PlaneKind) -> Result<RenderSpec> {
    let mut base = render_spec(s, plane)?;
    base.width_px = TILE_SIZE;
    base.height_px = TILE_SIZE;
    Ok(base)
}

/// Highest pyramid level for `tiles` jobs.
pub fn zoom(s: &Settings) -> Result<u32> {
    let z: u32 = s.number("zoom")?.unwrap_or(0);
    if z > MAX_ZOOM {
        return Err(bad(format!("zoom {z} above {MAX_ZOOM}")));
    }
    Ok(z)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentersJob {
    #[serde(with = "merodyn::wire::complex")]
    pub rho: C64,
    pub window: Window,
    pub max_order: usize,
    pub k_min: i64,
    pub k_max: i64,
    pub grid: usize,
}

impl CentersJob {
    pub const MAX_ORDER_LIMIT: usize = 6;

    pub fn from_settings(s: &Settings) -> Result<Self> {
        let rho = s.rho()?;
        let half = rho / 2.0;
        // default: the strip to the right of ρ/2, which holds the λ-centers
        // and their I-images for positive ρ
        let window = match s.get("bbox").or_else(|| s.get("window")) {
            Some(b) => parse_bbox(b)?,
            None => Window::new(
                half.re + 1e-9,
                half.re + 20.0,
                half.im - 20.0,
                half.im + 20.0,
            ),
        };
        let d = EnumerateOptions::default();
        let job = Self {
            rho,
            window,
            max_order: s.number("max-order")?.unwrap_or(d.max_order),
            k_min: s.number("k-min")?.unwrap_or(d.k_min),
            k_max: s.number("k-max")?.unwrap_or(d.k_max),
            grid: s.number("grid")?.unwrap_or(d.grid),
        };
        if !(2..=Self::MAX_ORDER_LIMIT).contains(&job.max_order) {
            return Err(bad(format!(
                "max-order must be in 2..={}",
                Self::MAX_ORDER_LIMIT
            )));
        }
        if job.k_min > job.k_max || job.k_max - job.k_min > 200 || job.grid > 64 {
            return Err(bad("k range or grid too large"));
        }
        if !job.window.is_empty() {
            for (name, z) in [("rho/2", half), ("0", C64::new(0.0, 0.0))] {
                if job.window.contains(z) {
                    return Err(ConfigError::Singular(format!("window contains {name}")));
                }
            }
        }
        Ok(job)
    }

    pub fn options(&self) -> EnumerateOptions {
        EnumerateOptions {
            max_order: self.max_order,
            k_min: self.k_min,
            k_max: self.k_max,
            grid: self.grid,
        }
    }

    pub fn digest(&self) -> String {
        digest_of(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SStarJob {
    #[serde(with = "merodyn::wire::complex")]
    pub rho: C64,
    pub n: usize,
}

impl SStarJob {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let n = s.number("n")?.unwrap_or(64);
        if !(4..=4096).contains(&n) {
            return Err(bad("n must be in 4..=4096"));
        }
        Ok(Self { rho: s.rho()?, n })
    }
}
