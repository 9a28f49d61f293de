//! Page image preprocessing and glyph segmentation.
//!
//! Converts page images into ordered, padded glyph crops: grayscale
//! conversion, Otsu binarization, morphological opening, 8-connected
//! component extraction, bounding-box size filtering, reading-order sort
//! (Y-binning, then x) and padded cropping.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("unsupported channel count {0}; expected 1 or 3")]
    UnsupportedChannels(u8),
    #[error("image data length {got} does not match {width}x{height}x{channels}")]
    DataLengthMismatch {
        width: u32,
        height: u32,
        channels: u8,
        got: usize,
    },
    #[error("image dimensions must be at least 1x1")]
    EmptyImage,
    #[error("operation requires a grayscale image, got {0} channels")]
    NotGrayscale(u8),
    #[error("morphological kernel size must be odd and >= 1, got {0}")]
    EvenKernel(u32),
    #[error("box ({x},{y} {w}x{h}) lies outside a {width}x{height} image")]
    BoxOutOfBounds {
        x: u32,
        y: u32,
        w: u32,
        h: u32,
        width: u32,
        height: u32,
    },
    #[error("failed to read image {path}: {source}")]
    Decode {
        path: String,
        source: image::ImageError,
    },
}

/// A raster page image: 1 (grayscale) or 3 (RGB) channels, row-major samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::EmptyImage);
        }
        if channels != 1 && channels != 3 {
            return Err(ImagingError::UnsupportedChannels(channels));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(ImagingError::DataLengthMismatch {
                width,
                height,
                channels,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Decode a PNG/JPEG page image. Images with an alpha channel are
    /// flattened to RGB; palette and 16-bit inputs are converted to 8-bit.
    pub fn from_path(path: &Path) -> Result<Self, ImagingError> {
        let img = image::open(path).map_err(|source| ImagingError::Decode {
            path: path.display().to_string(),
            source,
        })?;
        match img {
            image::DynamicImage::ImageLuma8(g) => {
                let (w, h) = g.dimensions();
                Self::new(w, h, 1, g.into_raw())
            }
            other => {
                let rgb = other.to_rgb8();
                let (w, h) = rgb.dimensions();
                Self::new(w, h, 3, rgb.into_raw())
            }
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// Binary ink mask over a page; `true` means foreground (ink).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    pub width: u32,
    pub height: u32,
    pub mask: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: u32, height: u32, mask: Vec<bool>) -> Result<Self, ImagingError> {
        if mask.len() != width as usize * height as usize {
            return Err(ImagingError::DataLengthMismatch {
                width,
                height,
                channels: 1,
                got: mask.len(),
            });
        }
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.mask[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    fn set(&mut self, x: u32, y: u32, v: bool) {
        self.mask[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn count_foreground(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Axis-aligned box, top-left origin, `w`/`h` >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BoundingBox {
    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn center_y(&self) -> f64 {
        self.y as f64 + self.h as f64 / 2.0
    }

    fn fits_in(&self, width: u32, height: u32) -> bool {
        self.w >= 1
            && self.h >= 1
            && (self.x as u64 + self.w as u64) <= width as u64
            && (self.y as u64 + self.h as u64) <= height as u64
    }
}

/// One segmented character image with provenance.
///
/// `patch` is the bounding box expanded by the segmentation padding on all
/// sides; expansion past the page border is filled with background, so the
/// patch dimensions are always `box + 2 * padding`.
#[derive(Debug, Clone)]
pub struct GlyphCrop {
    pub manuscript_id: String,
    /// Reading-order ordinal, unique and contiguous within one manuscript.
    pub index: usize,
    pub bbox: BoundingBox,
    /// Line ordinal from 0 within the page the glyph came from.
    pub line: usize,
    pub patch: BinaryImage,
}

impl GlyphCrop {
    /// Stable identifier used in crop filenames and embedding sidecars.
    pub fn glyph_id(&self) -> String {
        glyph_id(&self.manuscript_id, self.index)
    }
}

pub fn glyph_id(manuscript_id: &str, index: usize) -> String {
    format!("{manuscript_id}_{index:05}")
}

/// Convert to grayscale with BT.601 luma weights (0.299 R + 0.587 G + 0.114 B),
/// rounded to nearest. Grayscale input is returned unchanged.
pub fn to_grayscale(img: &RasterImage) -> Result<RasterImage, ImagingError> {
    match img.channels {
        1 => Ok(img.clone()),
        3 => {
            let mut data = Vec::with_capacity(img.pixel_count());
            for px in img.data.chunks_exact(3) {
                let y = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
                data.push(y.round().min(255.0) as u8);
            }
            RasterImage::new(img.width, img.height, 1, data)
        }
        c => Err(ImagingError::UnsupportedChannels(c)),
    }
}

/// Otsu's global threshold over the 256-bin histogram.
///
/// Returns the smallest `t` maximizing between-class variance, where class A
/// holds pixels `<= t` and class B pixels `> t`. A uniform-intensity image
/// yields that intensity.
pub fn otsu_threshold(img: &RasterImage) -> Result<u8, ImagingError> {
    if img.channels != 1 {
        return Err(ImagingError::NotGrayscale(img.channels));
    }
    let mut hist = [0u64; 256];
    for &p in &img.data {
        hist[p as usize] += 1;
    }
    let total = img.data.len() as f64;
    let min = img.data.iter().copied().min().expect("nonempty image");
    let max = img.data.iter().copied().max().expect("nonempty image");
    if min == max {
        return Ok(min);
    }

    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum();
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    let mut best_t = 0u8;
    let mut best_var = f64::NEG_INFINITY;
    for (t, &count) in hist.iter().enumerate() {
        w0 += count as f64;
        sum0 += t as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let var = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }
    Ok(best_t)
}

/// Threshold a grayscale image. With `ink_is_dark` (the usual case for ink on
/// parchment) pixels `<= t` become foreground; otherwise the mask is inverted.
pub fn binarize(img: &RasterImage, t: u8, ink_is_dark: bool) -> Result<BinaryImage, ImagingError> {
    if img.channels != 1 {
        return Err(ImagingError::NotGrayscale(img.channels));
    }
    let mask = img
        .data
        .iter()
        .map(|&p| (p <= t) == ink_is_dark)
        .collect();
    BinaryImage::new(img.width, img.height, mask)
}

/// Morphological opening (erosion then dilation) with an all-true square
/// kernel of odd side `kernel`. Pixels outside the image count as background,
/// so the result equals the opening computed on an infinite background plane.
pub fn morphological_open(img: &BinaryImage, kernel: u32) -> Result<BinaryImage, ImagingError> {
    if kernel == 0 || kernel.is_multiple_of(2) {
        return Err(ImagingError::EvenKernel(kernel));
    }
    if kernel == 1 {
        return Ok(img.clone());
    }
    let r = (kernel / 2) as i64;
    let (w, h) = (img.width as i64, img.height as i64);

    let mut eroded = BinaryImage::new(img.width, img.height, vec![false; img.mask.len()])?;
    for y in 0..h {
        for x in 0..w {
            if x - r < 0 || y - r < 0 || x + r >= w || y + r >= h {
                continue;
            }
            let mut all = true;
            'win: for dy in -r..=r {
                for dx in -r..=r {
                    if !img.get((x + dx) as u32, (y + dy) as u32) {
                        all = false;
                        break 'win;
                    }
                }
            }
            if all {
                eroded.set(x as u32, y as u32, true);
            }
        }
    }

    let mut opened = BinaryImage::new(img.width, img.height, vec![false; img.mask.len()])?;
    for y in 0..h {
        for x in 0..w {
            if !eroded.get(x as u32, y as u32) {
                continue;
            }
            for dy in -r..=r {
                for dx in -r..=r {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && nx < w && ny < h {
                        opened.set(nx as u32, ny as u32, true);
                    }
                }
            }
        }
    }
    Ok(opened)
}

/// Tight bounding boxes of the 8-connected foreground components, ordered by
/// the scanline position of each component's first pixel. Holes inside a
/// component do not produce separate boxes.
pub fn extract_components(img: &BinaryImage) -> Vec<BoundingBox> {
    let (w, h) = (img.width as usize, img.height as usize);
    let mut visited = vec![false; w * h];
    let mut boxes = Vec::new();
    let mut stack = Vec::new();

    for start in 0..w * h {
        if !img.mask[start] || visited[start] {
            continue;
        }
        let (mut min_x, mut min_y) = (w, h);
        let (mut max_x, mut max_y) = (0usize, 0usize);
        visited[start] = true;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (px, py) = (p % w, p / w);
            min_x = min_x.min(px);
            max_x = max_x.max(px);
            min_y = min_y.min(py);
            max_y = max_y.max(py);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (px as i64 + dx, py as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let q = ny as usize * w + nx as usize;
                    if img.mask[q] && !visited[q] {
                        visited[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        boxes.push(BoundingBox {
            x: min_x as u32,
            y: min_y as u32,
            w: (max_x - min_x + 1) as u32,
            h: (max_y - min_y + 1) as u32,
        });
    }
    boxes
}

/// Keep boxes with `min_area <= w*h <= max_area` and `min(w, h) >= min_side`,
/// preserving order.
pub fn filter_boxes(
    boxes: &[BoundingBox],
    min_area: u64,
    max_area: u64,
    min_side: u32,
) -> Vec<BoundingBox> {
    boxes
        .iter()
        .filter(|b| {
            let area = b.area();
            area >= min_area && area <= max_area && b.w.min(b.h) >= min_side
        })
        .copied()
        .collect()
}

/// Median box height; the default Y-bin height for [`sort_reading_order`].
/// Returns `None` for an empty slice. Even-length inputs use the midpoint of
/// the two middle values.
pub fn median_box_height(boxes: &[BoundingBox]) -> Option<f64> {
    if boxes.is_empty() {
        return None;
    }
    let mut heights: Vec<u32> = boxes.iter().map(|b| b.h).collect();
    heights.sort_unstable();
    let n = heights.len();
    Some(if n % 2 == 1 {
        heights[n / 2] as f64
    } else {
        (heights[n / 2 - 1] as f64 + heights[n / 2] as f64) / 2.0
    })
}

/// Sort boxes into reading order: group by `floor(center_y / bin_height)`
/// ascending, then x ascending within a group (stable for exact ties).
/// Returns each box with its line ordinal, where line ordinals are the dense
/// rank of the occupied Y-bins starting at 0.
pub fn sort_reading_order(boxes: &[BoundingBox], bin_height: f64) -> Vec<(BoundingBox, usize)> {
    assert!(bin_height >= 1.0, "bin_height must be >= 1");
    let mut keyed: Vec<(i64, BoundingBox)> = boxes
        .iter()
        .map(|b| ((b.center_y() / bin_height).floor() as i64, *b))
        .collect();
    keyed.sort_by(|(bin_a, a), (bin_b, b)| bin_a.cmp(bin_b).then(a.x.cmp(&b.x)));

    let mut out = Vec::with_capacity(keyed.len());
    let mut line = 0usize;
    let mut prev_bin = None;
    for (bin, b) in keyed {
        match prev_bin {
            None => prev_bin = Some(bin),
            Some(p) if p != bin => {
                line += 1;
                prev_bin = Some(bin);
            }
            _ => {}
        }
        out.push((b, line));
    }
    out
}

/// Cut padded crops in the given (reading) order. Each crop covers the box
/// expanded by `padding` on all sides; parts of the expansion that fall
/// outside the image are filled with background, so every patch measures
/// exactly `(w + 2*padding) x (h + 2*padding)`. Indices start at
/// `start_index` and follow the input order.
pub fn crop_glyphs(
    img: &BinaryImage,
    ordered: &[(BoundingBox, usize)],
    padding: u32,
    manuscript_id: &str,
    start_index: usize,
) -> Result<Vec<GlyphCrop>, ImagingError> {
    let mut crops = Vec::with_capacity(ordered.len());
    for (offset, (bbox, line)) in ordered.iter().enumerate() {
        if !bbox.fits_in(img.width, img.height) {
            return Err(ImagingError::BoxOutOfBounds {
                x: bbox.x,
                y: bbox.y,
                w: bbox.w,
                h: bbox.h,
                width: img.width,
                height: img.height,
            });
        }
        let pw = bbox.w + 2 * padding;
        let ph = bbox.h + 2 * padding;
        let mut patch = BinaryImage::new(pw, ph, vec![false; pw as usize * ph as usize])?;
        for py in 0..ph as i64 {
            for px in 0..pw as i64 {
                let sx = bbox.x as i64 + px - padding as i64;
                let sy = bbox.y as i64 + py - padding as i64;
                if sx >= 0 && sy >= 0 && sx < img.width as i64 && sy < img.height as i64 {
                    patch.set(px as u32, py as u32, img.get(sx as u32, sy as u32));
                }
            }
        }
        crops.push(GlyphCrop {
            manuscript_id: manuscript_id.to_string(),
            index: start_index + offset,
            bbox: *bbox,
            line: *line,
            patch,
        });
    }
    Ok(crops)
}

/// Segmentation parameters, all CLI-overridable and echoed into output
/// manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentParams {
    /// Morphological opening kernel side (odd).
    pub kernel: u32,
    /// Minimum component area in px^2.
    pub min_area: u64,
    /// Maximum component area as a fraction of the page area.
    pub max_area_frac: f64,
    /// Minimum of width and height in px.
    pub min_side: u32,
    /// Crop padding in px.
    pub padding: u32,
    /// Reading-order Y-bin height; `None` uses the page's median box height.
    pub bin_height: Option<f64>,
    /// Dark pixels are ink.
    pub ink_is_dark: bool,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            kernel: 3,
            min_area: 15,
            max_area_frac: 0.05,
            min_side: 3,
            padding: 2,
            bin_height: None,
            ink_is_dark: true,
        }
    }
}

/// Full page segmentation: grayscale, Otsu, binarize, open, components,
/// size filter, reading-order sort, padded crops.
///
/// A uniform-intensity page produces no crops (nothing can be segmented from
/// a blank page). Crop indices start at `start_index` so that multi-page
/// manuscripts get contiguous indices; line ordinals are page-local.
pub fn segment_page(
    img: &RasterImage,
    params: &SegmentParams,
    manuscript_id: &str,
    start_index: usize,
) -> Result<Vec<GlyphCrop>, ImagingError> {
    let gray = to_grayscale(img)?;
    let min = gray.data.iter().copied().min().expect("nonempty image");
    let max = gray.data.iter().copied().max().expect("nonempty image");
    if min == max {
        return Ok(Vec::new());
    }
    let t = otsu_threshold(&gray)?;
    let bin = binarize(&gray, t, params.ink_is_dark)?;
    let opened = morphological_open(&bin, params.kernel)?;
    let boxes = extract_components(&opened);
    let max_area = (params.max_area_frac * gray.pixel_count() as f64).floor() as u64;
    let kept = filter_boxes(&boxes, params.min_area, max_area, params.min_side);
    let bin_height = params
        .bin_height
        .or_else(|| median_box_height(&kept))
        .unwrap_or(1.0)
        .max(1.0);
    let ordered = sort_reading_order(&kept, bin_height);
    crop_glyphs(&opened, &ordered, params.padding, manuscript_id, start_index)
}
