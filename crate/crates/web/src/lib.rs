//! wasm-bindgen bindings for the static page in `www/`.
//!
//! Everything runs on the page's thread; keep `px` and `max_iter` modest.

use merodyn::classify::{classify as classify_point, ClassifierBudget, ParamClass};
use merodyn::koenigs::{s_partition, SPartition};
use merodyn::render::{render_dynamic_plane, render_parameter_plane, Image, RenderSpec};
use merodyn::{inversion, ParamPoint, C64};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest canvas side the demo accepts.
pub const MAX_PX: u32 = 1024;

#[derive(Serialize)]
struct Summary {
    #[serde(with = "merodyn::wire::complex")]
    mu: C64,
    class: ParamClass,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_partition: Option<SPartition>,
}

fn budget(max_iter: u32) -> Result<ClassifierBudget, String> {
    let b = ClassifierBudget::with_max_iter(max_iter as usize);
    b.validate().map_err(|e| e.to_string())?;
    Ok(b)
}

fn check_px(px: u32) -> Result<(), String> {
    if px > MAX_PX {
        return Err(format!("px above {MAX_PX}"));
    }
    Ok(())
}

/// Pads row-major RGB to the RGBA layout `ImageData` expects.
fn rgba(img: &Image) -> Vec<u8> {
    img.pixels
        .chunks_exact(3)
        .flat_map(|p| [p[0], p[1], p[2], 255])
        .collect()
}

pub fn classify_json(rho: C64, lambda: C64, max_iter: u32) -> Result<String, String> {
    let p = ParamPoint::new(rho, lambda).map_err(|e| e.to_string())?;
    let class = classify_point(&p, &budget(max_iter)?);
    let s_partition = match class.kind {
        merodyn::classify::ClassKind::ShiftLocus => s_partition(&p).ok(),
        _ => None,
    };
    let summary = Summary {
        mu: p.mu,
        class,
        s_partition,
    };
    serde_json::to_string(&summary).map_err(|e| e.to_string())
}

pub fn parameter_rgba(
    rho: C64,
    center: C64,
    width: f64,
    px: u32,
    max_iter: u32,
) -> Result<Vec<u8>, String> {
    check_px(px)?;
    let mut spec = RenderSpec::parameter(rho, center, width, px);
    spec.budget = budget(max_iter)?;
    render_parameter_plane(&spec)
        .map(|img| rgba(&img))
        .map_err(|e| e.to_string())
}

pub fn dynamic_rgba(
    rho: C64,
    lambda: C64,
    width: f64,
    px: u32,
    max_iter: u32,
) -> Result<Vec<u8>, String> {
    check_px(px)?;
    let p = ParamPoint::new(rho, lambda).map_err(|e| e.to_string())?;
    let mut spec = RenderSpec::dynamic(p, C64::new(0.0, 0.0), width, px);
    spec.budget = budget(max_iter)?;
    render_dynamic_plane(&spec)
        .map(|img| rgba(&img))
        .map_err(|e| e.to_string())
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// JSON summary of a parameter: `mu`, `class` and, in the shift locus, its side.
#[wasm_bindgen]
pub fn classify(
    rho_re: f64,
    rho_im: f64,
    re: f64,
    im: f64,
    max_iter: u32,
) -> Result<String, JsError> {
    classify_json(C64::new(rho_re, rho_im), C64::new(re, im), max_iter).map_err(js)
}

/// `I(λ)` as `[re, im]`.
#[wasm_bindgen]
pub fn invert(rho_re: f64, rho_im: f64, re: f64, im: f64) -> Result<Vec<f64>, JsError> {
    let z = inversion(C64::new(rho_re, rho_im), C64::new(re, im)).map_err(|e| js(e.to_string()))?;
    Ok(vec![z.re, z.im])
}

/// Square λ-plane image as RGBA bytes.
#[wasm_bindgen]
pub fn render_parameter(
    rho_re: f64,
    rho_im: f64,
    center_re: f64,
    center_im: f64,
    width: f64,
    px: u32,
    max_iter: u32,
) -> Result<Vec<u8>, JsError> {
    parameter_rgba(
        C64::new(rho_re, rho_im),
        C64::new(center_re, center_im),
        width,
        px,
        max_iter,
    )
    .map_err(js)
}

/// Square z-plane image centered at the origin as RGBA bytes.
#[wasm_bindgen]
pub fn render_dynamic(
    rho_re: f64,
    rho_im: f64,
    re: f64,
    im: f64,
    width: f64,
    px: u32,
    max_iter: u32,
) -> Result<Vec<u8>, JsError> {
    dynamic_rgba(
        C64::new(rho_re, rho_im),
        C64::new(re, im),
        width,
        px,
        max_iter,
    )
    .map_err(js)
}
