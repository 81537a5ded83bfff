use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::palette::{ColorMap, Rgb};
use super::{Frame, Plane};
use crate::centers::{enumerate_centers, EnumerateOptions, Window};
use crate::classify::{classify, ClassifierBudget};
use crate::dynamics::pole_k;
use crate::koenigs::trace_s_star;
use crate::C64;

/// Markers and curves drawn over the classification.
///
/// `Centers`, `SStar` and `C0Circle` apply to the parameter plane; `Poles`
/// and `FixedPoints` to the dynamic plane. Others are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlay {
    Centers,
    SStar,
    C0Circle,
    Poles,
    FixedPoints,
}

impl std::str::FromStr for Overlay {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Ok(match s {
            "centers" => Overlay::Centers,
            "sstar" | "s_star" => Overlay::SStar,
            "c0" | "c0_circle" => Overlay::C0Circle,
            "poles" => Overlay::Poles,
            "fixed" | "fixed_points" => Overlay::FixedPoints,
            _ => return Err(crate::Error::InvalidSpec(format!("unknown overlay {s:?}"))),
        })
    }
}

const SSTAR_SAMPLES: usize = 256;

/// Geometry behind the requested overlays, computed once per window so that
/// every tile of a pyramid draws the same markers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OverlayData {
    pub centers: Vec<C64>,
    pub sstar: Vec<C64>,
    /// `(center, radius)` of `C_0`.
    pub circle: Option<(C64, f64)>,
    pub poles: Vec<C64>,
    pub fixed: Vec<C64>,
}

impl OverlayData {
    pub fn compute(
        plane: &Plane,
        frame: &Frame,
        overlays: &std::collections::BTreeSet<Overlay>,
        budget: &ClassifierBudget,
    ) -> Self {
        let mut out = Self::default();
        let window = frame.window();
        match plane {
            Plane::Parameter { rho } => {
                let rho = *rho;
                if overlays.contains(&Overlay::Centers) {
                    let opts = EnumerateOptions::default();
                    out.centers = enumerate_centers(rho, &window, &opts)
                        .centers
                        .into_iter()
                        .map(|c| c.location)
                        .collect();
                }
                if overlays.contains(&Overlay::SStar) {
                    // a lost trace still leaves a usable partial polyline
                    out.sstar = match trace_s_star(rho, SSTAR_SAMPLES) {
                        Ok(v) => v,
                        Err(crate::Error::TraceLost { partial, .. }) => partial,
                        Err(_) => Vec::new(),
                    };
                }
                if overlays.contains(&Overlay::C0Circle) {
                    out.circle = Some((rho / 2.0, (rho / 2.0).norm()));
                }
            }
            Plane::Dynamic(p) => {
                if overlays.contains(&Overlay::Poles) {
                    let k_lo = ((window.im_min - p.pole0.im) / PI).floor() as i64 - 1;
                    let k_hi = ((window.im_max - p.pole0.im) / PI).ceil() as i64 + 1;
                    let k_lo = k_lo.max(k_hi - 4096);
                    out.poles = (k_lo..=k_hi)
                        .map(|k| pole_k(p, k))
                        .filter(|z| window.contains(*z))
                        .collect();
                }
                if overlays.contains(&Overlay::FixedPoints) {
                    out.fixed.push(C64::new(0.0, 0.0));
                    if let Some(c) = classify(p, budget).cycle {
                        out.fixed.extend(c.points);
                    }
                }
            }
        }
        out
    }
}

/// A rectangle of the global pixel grid, `w × h` starting at `(gx0, gy0)`.
pub(crate) struct Canvas<'a> {
    pub buf: &'a mut [u8],
    pub w: usize,
    pub h: usize,
    pub gx0: u64,
    pub gy0: u64,
}

impl Canvas<'_> {
    fn put(&mut self, gx: i128, gy: i128, c: Rgb) {
        let x = gx - self.gx0 as i128;
        let y = gy - self.gy0 as i128;
        if x < 0 || y < 0 || x >= self.w as i128 || y >= self.h as i128 {
            return;
        }
        let i = 3 * (y as usize * self.w + x as usize);
        self.buf[i..i + 3].copy_from_slice(&c);
    }

    fn put_f(&mut self, fx: f64, fy: f64, c: Rgb) {
        if fx.is_finite() && fy.is_finite() && fx.abs() < 1e30 && fy.abs() < 1e30 {
            self.put(fx.round() as i128, fy.round() as i128, c);
        }
    }

    fn bounds(&self, margin: f64) -> (f64, f64, f64, f64) {
        (
            self.gx0 as f64 - margin,
            self.gy0 as f64 - margin,
            (self.gx0 + self.w as u64) as f64 + margin,
            (self.gy0 + self.h as u64) as f64 + margin,
        )
    }

    fn disk(&mut self, fx: f64, fy: f64, r: i128, c: Rgb) {
        let (x0, y0, x1, y1) = self.bounds(r as f64 + 1.0);
        if !(fx >= x0 && fx <= x1 && fy >= y0 && fy <= y1) {
            return;
        }
        let (cx, cy) = (fx.round() as i128, fy.round() as i128);
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy <= r * r {
                    self.put(cx + dx, cy + dy, c);
                }
            }
        }
    }

    fn star(&mut self, fx: f64, fy: f64, r: i128, c: Rgb) {
        let (x0, y0, x1, y1) = self.bounds(r as f64 + 1.0);
        if !(fx >= x0 && fx <= x1 && fy >= y0 && fy <= y1) {
            return;
        }
        let (cx, cy) = (fx.round() as i128, fy.round() as i128);
        for d in -r..=r {
            self.put(cx + d, cy, c);
            self.put(cx, cy + d, c);
            if d.abs() <= r - r / 3 {
                self.put(cx + d, cy + d, c);
                self.put(cx + d, cy - d, c);
            }
        }
    }

    fn ring(&mut self, fx: f64, fy: f64, r: i128, c: Rgb) {
        let (x0, y0, x1, y1) = self.bounds(r as f64 + 1.0);
        if !(fx >= x0 && fx <= x1 && fy >= y0 && fy <= y1) {
            return;
        }
        let (cx, cy) = (fx.round() as i128, fy.round() as i128);
        for dy in -r..=r {
            for dx in -r..=r {
                let d2 = dx * dx + dy * dy;
                if d2 <= r * r && d2 > (r - 1) * (r - 1) {
                    self.put(cx + dx, cy + dy, c);
                }
            }
        }
        self.put(cx, cy, c);
    }

    /// Draws the segment by sampling it at `1/n` steps of the whole segment,
    /// visiting only the samples that can land on this canvas. The sample
    /// positions never depend on the canvas, so tiles agree with full renders.
    fn segment(&mut self, a: (f64, f64), b: (f64, f64), c: Rgb) {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len = dx.abs().max(dy.abs());
        if !len.is_finite() {
            return;
        }
        let n = len.ceil().max(1.0);
        let (x0, y0, x1, y1) = self.bounds(2.0);
        let Some((t0, t1)) = clip(a, (dx, dy), (x0, y0, x1, y1)) else {
            return;
        };
        let i0 = (t0 * n).floor().max(0.0) as u64;
        let i1 = (t1 * n).ceil().min(n) as u64;
        for i in i0..=i1 {
            let t = i as f64 / n;
            self.put_f(a.0 + t * dx, a.1 + t * dy, c);
        }
    }
}

/// Liang–Barsky parameter range of `a + t d`, `t ∈ [0, 1]`, inside a box.
fn clip(a: (f64, f64), d: (f64, f64), b: (f64, f64, f64, f64)) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d.0, a.0 - b.0),
        (d.0, b.2 - a.0),
        (-d.1, a.1 - b.1),
        (d.1, b.3 - a.1),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

pub(crate) fn draw(canvas: &mut Canvas, frame: &Frame, data: &OverlayData, colors: &ColorMap) {
    if let Some((c, r)) = data.circle {
        let r_px = r / frame.dx;
        let n = ((2.0 * PI * r_px / 4.0).ceil() as usize).clamp(64, 1 << 16);
        let pts: Vec<_> = (0..=n)
            .map(|j| frame.to_pixel(c + C64::from_polar(r, 2.0 * PI * j as f64 / n as f64)))
            .collect();
        for w in pts.windows(2) {
            canvas.segment(w[0], w[1], colors.circle_line);
        }
    }
    if data.sstar.len() > 1 {
        let mut pts: Vec<_> = data.sstar.iter().map(|z| frame.to_pixel(*z)).collect();
        pts.push(pts[0]);
        for w in pts.windows(2) {
            canvas.segment(w[0], w[1], colors.sstar_line);
        }
    }
    for z in &data.centers {
        let (x, y) = frame.to_pixel(*z);
        canvas.ring(x, y, 3, colors.center_marker);
    }
    for z in &data.poles {
        let (x, y) = frame.to_pixel(*z);
        canvas.disk(x, y, 2, colors.pole_marker);
    }
    for z in &data.fixed {
        let (x, y) = frame.to_pixel(*z);
        canvas.star(x, y, 5, colors.fixed_marker);
    }
}

impl Frame {
    pub(crate) fn window(&self) -> Window {
        Window::new(
            self.x0,
            self.x0 + self.dx * self.cols as f64,
            self.y0 - self.dy * self.rows as f64,
            self.y0,
        )
    }
}
