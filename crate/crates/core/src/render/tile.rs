use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{render_region, Frame, OverlayData, RenderSpec};
use crate::{Error, Result};

pub const TILE_SIZE: u32 = 256;
pub const MAX_ZOOM: u32 = 40;

/// Position in the pyramid over the square with the base viewport's center
/// and width. Zoom `z` splits it into `2^z × 2^z` tiles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TileKey {
    /// Digest of the base spec.
    pub plane_hash: String,
    pub zoom: u32,
    pub x: u64,
    pub y: u64,
}

impl TileKey {
    pub fn new(base: &RenderSpec, zoom: u32, x: u64, y: u64) -> Self {
        Self {
            plane_hash: base.digest(),
            zoom,
            x,
            y,
        }
    }

    fn check(&self) -> Result<()> {
        if self.zoom > MAX_ZOOM {
            return Err(Error::InvalidSpec(format!(
                "zoom {} above {MAX_ZOOM}",
                self.zoom
            )));
        }
        let n = 1u64 << self.zoom;
        if self.x >= n || self.y >= n {
            return Err(Error::InvalidSpec(format!(
                "tile ({}, {}) outside zoom {}",
                self.x, self.y, self.zoom
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tile {
    pub key: TileKey,
    /// `256 × 256` row-major RGB.
    pub pixels: Vec<u8>,
    pub provenance: String,
}

impl Tile {
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        super::encode_png(TILE_SIZE, TILE_SIZE, &self.pixels)
    }
}

/// The monolithic render whose crop at `(256x, 256y)` equals the tile: the
/// pyramid square at `256·2^z` pixels with `max_iter` scaled by `1 + z/8`.
pub fn tile_spec(base: &RenderSpec, zoom: u32) -> RenderSpec {
    let px = TILE_SIZE as u64 * (1u64 << zoom.min(MAX_ZOOM));
    let mut spec = base.clone();
    // resolution fields saturate past 2^32; the frame below carries the truth
    spec.width_px = px.min(u32::MAX as u64) as u32;
    spec.height_px = spec.width_px;
    spec.budget.max_iter = base.budget.max_iter + base.budget.max_iter * zoom as usize / 8;
    spec
}

fn pyramid_frame(base: &RenderSpec, zoom: u32) -> Frame {
    let px = TILE_SIZE as u64 * (1u64 << zoom);
    Frame::new(base.viewport.center, base.viewport.width, px, px)
}

/// Overlay geometry shared by every tile of the pyramid.
pub fn pyramid_overlays(base: &RenderSpec) -> OverlayData {
    OverlayData::compute(
        &base.plane,
        &pyramid_frame(base, 0),
        &base.overlays,
        &base.budget,
    )
}

pub fn render_tile(key: &TileKey, base: &RenderSpec) -> Result<Tile> {
    render_tile_with(key, base, &pyramid_overlays(base), None)
}

/// [`render_tile`] with precomputed overlays and an optional worker count.
pub fn render_tile_with(
    key: &TileKey,
    base: &RenderSpec,
    overlays: &OverlayData,
    workers: Option<usize>,
) -> Result<Tile> {
    key.check()?;
    base.validate_view()?;
    let digest = base.digest();
    if key.plane_hash != digest {
        return Err(Error::InvalidSpec(
            "tile key belongs to another spec".into(),
        ));
    }
    let spec = tile_spec(base, key.zoom);
    let frame = pyramid_frame(base, key.zoom);
    let pixels = render_region(
        &spec,
        &frame,
        key.x * TILE_SIZE as u64,
        key.y * TILE_SIZE as u64,
        TILE_SIZE,
        TILE_SIZE,
        overlays,
        workers,
    );
    let provenance = hex::encode(Sha256::digest(
        format!("{}/{}/{}/{}", spec.digest(), key.zoom, key.x, key.y).as_bytes(),
    ));
    Ok(Tile {
        key: key.clone(),
        pixels,
        provenance,
    })
}
