//! Deterministic raster images of the parameter and dynamic planes.
//!
//! Every pixel is classified independently from its own center point, so
//! renders are byte-identical across runs, worker counts and tilings.

mod overlay;
mod palette;
mod tile;

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::{classify_lambda, ClassifierBudget};
use crate::dynamics::{orbit_fate, OrbitVerdict};
use crate::{par, Error, ParamPoint, Result, C64};

pub use overlay::{Overlay, OverlayData};
pub use palette::{ColorMap, PaletteId, Rgb};
pub use tile::{
    pyramid_overlays, render_tile, render_tile_with, tile_spec, Tile, TileKey, MAX_ZOOM, TILE_SIZE,
};

pub const MIN_PX: u32 = 16;
pub const MAX_PX: u32 = 16384;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Plane {
    /// The `λ`-plane at fixed `ρ`.
    Parameter {
        #[serde(with = "crate::wire::complex")]
        rho: C64,
    },
    /// The `z`-plane of one map.
    Dynamic(ParamPoint),
}

impl Plane {
    pub fn rho(&self) -> C64 {
        match self {
            Plane::Parameter { rho } => *rho,
            Plane::Dynamic(p) => p.rho,
        }
    }
}

/// Axis-aligned view; the height follows from the pixel aspect ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    #[serde(with = "crate::wire::complex")]
    pub center: C64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub plane: Plane,
    pub viewport: Viewport,
    pub width_px: u32,
    pub height_px: u32,
    pub budget: ClassifierBudget,
    #[serde(default)]
    pub palette: PaletteId,
    #[serde(default)]
    pub overlays: BTreeSet<Overlay>,
}

impl RenderSpec {
    pub fn parameter(rho: C64, center: C64, width: f64, px: u32) -> Self {
        Self::square(Plane::Parameter { rho }, center, width, px)
    }

    pub fn dynamic(p: ParamPoint, center: C64, width: f64, px: u32) -> Self {
        Self::square(Plane::Dynamic(p), center, width, px)
    }

    fn square(plane: Plane, center: C64, width: f64, px: u32) -> Self {
        Self {
            plane,
            viewport: Viewport { center, width },
            width_px: px,
            height_px: px,
            budget: ClassifierBudget::default(),
            palette: PaletteId::Classic,
            overlays: BTreeSet::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for px in [self.width_px, self.height_px] {
            if !(MIN_PX..=MAX_PX).contains(&px) {
                return Err(Error::InvalidSpec(format!(
                    "resolution {px} outside [{MIN_PX}, {MAX_PX}]"
                )));
            }
        }
        self.validate_view()
    }

    /// Everything except the resolution bounds, which tiles exceed.
    fn validate_view(&self) -> Result<()> {
        let v = &self.viewport;
        if !(v.width > 0.0
            && v.width.is_finite()
            && v.center.re.is_finite()
            && v.center.im.is_finite())
        {
            return Err(Error::InvalidSpec(format!("bad viewport {v:?}")));
        }
        self.budget.validate()?;
        crate::params::check_rho(self.plane.rho())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn frame(&self) -> Frame {
        Frame::new(
            self.viewport.center,
            self.viewport.width,
            self.width_px as u64,
            self.height_px as u64,
        )
    }
}

/// Pixel geometry: pixel `(i, j)` of the global grid has center
/// `(x0 + (i + ½)dx, y0 − (j + ½)dy)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub cols: u64,
    pub rows: u64,
}

impl Frame {
    pub fn new(center: C64, width: f64, cols: u64, rows: u64) -> Self {
        let height = width * (rows as f64 / cols as f64);
        let dx = width / cols as f64;
        Self {
            x0: center.re - 0.5 * width,
            y0: center.im + 0.5 * height,
            dx,
            dy: dx,
            cols,
            rows,
        }
    }

    pub fn point(&self, i: u64, j: u64) -> C64 {
        C64::new(
            self.x0 + (i as f64 + 0.5) * self.dx,
            self.y0 - (j as f64 + 0.5) * self.dy,
        )
    }

    /// Continuous pixel coordinates; integer values are pixel centers.
    pub fn to_pixel(&self, z: C64) -> (f64, f64) {
        (
            (z.re - self.x0) / self.dx - 0.5,
            (self.y0 - z.im) / self.dy - 0.5,
        )
    }
}

/// Row-major 8-bit RGB.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Image {
        let mut pixels = Vec::with_capacity(3 * (w * h) as usize);
        for row in y..y + h {
            let start = 3 * (row as usize * self.width as usize + x as usize);
            pixels.extend_from_slice(&self.pixels[start..start + 3 * w as usize]);
        }
        Image {
            width: w,
            height: h,
            pixels,
        }
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        encode_png(self.width, self.height, &self.pixels)
    }
}

pub(crate) fn encode_png(width: u32, height: u32, pixels: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc
            .write_header()
            .map_err(|e| Error::Encode(e.to_string()))?;
        w.write_image_data(pixels)
            .map_err(|e| Error::Encode(e.to_string()))?;
    }
    Ok(out)
}

/// Sidecar metadata written next to each image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderMeta {
    pub digest: String,
    #[serde(with = "crate::wire::complex")]
    pub rho: C64,
    pub plane: Plane,
    pub viewport: Viewport,
    pub resolution: (u32, u32),
    pub budget: ClassifierBudget,
    pub palette: PaletteId,
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct Rendered {
    pub image: Image,
    pub meta: RenderMeta,
}

fn pixel_color(
    plane: &Plane,
    frame: &Frame,
    budget: &ClassifierBudget,
    colors: &ColorMap,
    i: u64,
    j: u64,
) -> Rgb {
    let z = frame.point(i, j);
    match plane {
        Plane::Parameter { rho } => {
            let half = 0.5 * frame.dx;
            let hits = |s: C64| (z.re - s.re).abs() <= half && (z.im - s.im).abs() <= half;
            if hits(C64::new(0.0, 0.0)) || hits(rho / 2.0) {
                return colors.singular;
            }
            let class = classify_lambda(*rho, z, budget);
            colors.class(class.kind, class.period.unwrap_or(0))
        }
        Plane::Dynamic(p) => match orbit_fate(p, z, &budget.orbit_limits()).0 {
            OrbitVerdict::ConvergedToZero => colors.basin_zero,
            OrbitVerdict::ConvergedToCycle(c) if c.is_attracting() => colors.basin_cycle,
            _ => colors.undetermined,
        },
    }
}

/// Renders the `w × h` block of `frame`'s global grid starting at `(gx0, gy0)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn render_region(
    spec: &RenderSpec,
    frame: &Frame,
    gx0: u64,
    gy0: u64,
    w: u32,
    h: u32,
    data: &OverlayData,
    workers: Option<usize>,
) -> Vec<u8> {
    let colors = spec.palette.colors();
    let rows: Vec<u64> = (0..h as u64).collect();
    let lines = par::with_workers(workers, || {
        par::map(&rows, |&j| {
            let mut line = Vec::with_capacity(3 * w as usize);
            for i in 0..w as u64 {
                line.extend_from_slice(&pixel_color(
                    &spec.plane,
                    frame,
                    &spec.budget,
                    &colors,
                    gx0 + i,
                    gy0 + j,
                ));
            }
            line
        })
    });
    let mut buf = lines.concat();
    let mut canvas = overlay::Canvas {
        buf: &mut buf,
        w: w as usize,
        h: h as usize,
        gx0,
        gy0,
    };
    overlay::draw(&mut canvas, frame, data, &colors);
    buf
}

fn draw(spec: &RenderSpec, workers: Option<usize>) -> Result<Image> {
    spec.validate()?;
    let frame = spec.frame();
    let data = OverlayData::compute(&spec.plane, &frame, &spec.overlays, &spec.budget);
    let pixels = render_region(
        spec,
        &frame,
        0,
        0,
        spec.width_px,
        spec.height_px,
        &data,
        workers,
    );
    Ok(Image {
        width: spec.width_px,
        height: spec.height_px,
        pixels,
    })
}

/// Full render with metadata; `workers = None` uses the shared pool.
pub fn render_with_workers(spec: &RenderSpec, workers: Option<usize>) -> Result<Rendered> {
    let started = Instant::now();
    let image = draw(spec, workers)?;
    let meta = RenderMeta {
        digest: spec.digest(),
        rho: spec.plane.rho(),
        plane: spec.plane,
        viewport: spec.viewport,
        resolution: (spec.width_px, spec.height_px),
        budget: spec.budget,
        palette: spec.palette,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Rendered { image, meta })
}

pub fn render(spec: &RenderSpec) -> Result<Rendered> {
    render_with_workers(spec, None)
}

/// Parameter plane colored by classification and period. Unlike [`render`]
/// this reads no clock, so it also runs where `Instant` is unavailable.
pub fn render_parameter_plane(spec: &RenderSpec) -> Result<Image> {
    if !matches!(spec.plane, Plane::Parameter { .. }) {
        return Err(Error::InvalidSpec("expected a parameter plane".into()));
    }
    draw(spec, None)
}

/// Dynamic plane colored by the fate of each starting point.
pub fn render_dynamic_plane(spec: &RenderSpec) -> Result<Image> {
    if !matches!(spec.plane, Plane::Dynamic(_)) {
        return Err(Error::InvalidSpec("expected a dynamic plane".into()));
    }
    draw(spec, None)
}
