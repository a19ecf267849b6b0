//! Screenshot descriptors.
//!
//! Two fixed-length global descriptors are extracted from every screenshot:
//!
//! * a 128-value structure vector: gradient-orientation energy on a 4×4
//!   spatial grid with 8 orientation bins per cell, L2-normalized;
//! * a 189-value color vector: a 21-bin HSV histogram (5 achromatic value
//!   bins followed by 16 hue bins) on a 3×3 spatial grid, each cell
//!   normalized by its pixel count.
//!
//! Reports without a screenshot use the descriptors of a blank white image.

use std::f64::consts::PI;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};

pub const STRUCTURE_GRID: usize = 4;
pub const ORIENTATION_BINS: usize = 8;
pub const STRUCTURE_DIM: usize = STRUCTURE_GRID * STRUCTURE_GRID * ORIENTATION_BINS;

pub const COLOR_GRID: usize = 3;
pub const ACHROMATIC_BINS: usize = 5;
pub const HUE_BINS: usize = 16;
pub const COLOR_CELL_BINS: usize = ACHROMATIC_BINS + HUE_BINS;
pub const COLOR_DIM: usize = COLOR_GRID * COLOR_GRID * COLOR_CELL_BINS;

/// Pixels with saturation or value below these limits count as achromatic.
pub const MIN_SATURATION: f64 = 0.1;
pub const MIN_VALUE: f64 = 0.1;

pub const BLANK_SIDE: u32 = 256;

/// Row-major 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "raster must be non-empty, got {width}x{height}"
            )));
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidArgument(format!(
                "raster {width}x{height} needs {} pixels, got {}",
                width as usize * height as usize,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "raster must be non-empty");
        Self {
            width,
            height,
            pixels: vec![rgb; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [[u8; 3]] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = rgb;
    }

    /// Encodes the raster as PNG.
    pub fn to_png(&self) -> Result<Vec<u8>> {
        let flat: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        let buffer = image::RgbImage::from_raw(self.width, self.height, flat)
            .ok_or_else(|| Error::InvalidArgument("raster buffer size mismatch".into()))?;
        let mut out = std::io::Cursor::new(Vec::new());
        buffer
            .write_to(&mut out, ImageFormat::Png)
            .map_err(|e| Error::Decode(e.to_string()))?;
        Ok(out.into_inner())
    }
}

/// Decodes a PNG or JPEG stream to 8-bit RGB. Alpha is composited over white.
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    let format = image::guess_format(bytes).map_err(|e| Error::Decode(e.to_string()))?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Jpeg) {
        return Err(Error::Decode(format!(
            "unsupported image format {format:?}"
        )));
    }
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::Decode(e.to_string()))?;
    let (width, height) = (decoded.width(), decoded.height());
    let pixels = if decoded.color().has_alpha() {
        composite_over_white(&decoded)
    } else {
        decoded.to_rgb8().pixels().map(|p| p.0).collect()
    };
    RasterImage::new(width, height, pixels)
}

fn composite_over_white(img: &DynamicImage) -> Vec<[u8; 3]> {
    img.to_rgba8()
        .pixels()
        .map(|p| {
            let [r, g, b, a] = p.0;
            let a = a as u32;
            let blend = |c: u8| ((c as u32 * a + 255 * (255 - a) + 127) / 255) as u8;
            [blend(r), blend(g), blend(b)]
        })
        .collect()
}

/// 128-d gradient-orientation descriptor; all-zero or unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureVector(pub Vec<f64>);

/// 189-d per-cell HSV histogram descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorVector(pub Vec<f64>);

impl StructureVector {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }
}

impl ColorVector {
    /// The 21-bin histogram of spatial cell `cell` (row-major, 0..9).
    pub fn cell(&self, cell: usize) -> &[f64] {
        &self.0[cell * COLOR_CELL_BINS..(cell + 1) * COLOR_CELL_BINS]
    }
}

pub fn luma(rgb: [u8; 3]) -> f64 {
    0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64
}

/// Luma scaled by 1000 so it is an exact integer; gradients then stay exact
/// under brightness offsets and the scale cancels in normalization.
fn luma_milli(rgb: [u8; 3]) -> f64 {
    (299 * rgb[0] as u32 + 587 * rgb[1] as u32 + 114 * rgb[2] as u32) as f64
}

/// Orientation bin of a gradient; angles are folded into [0, π).
pub fn orientation_bin(gx: f64, gy: f64) -> usize {
    let mut theta = gy.atan2(gx);
    if theta < 0.0 {
        theta += PI;
    }
    if theta >= PI {
        theta -= PI;
    }
    ((theta / (PI / ORIENTATION_BINS as f64)) as usize).min(ORIENTATION_BINS - 1)
}

pub fn structure_descriptor(image: &RasterImage) -> StructureVector {
    let w = image.width as usize;
    let h = image.height as usize;
    let gray: Vec<f64> = image.pixels.iter().map(|p| luma_milli(*p)).collect();
    let at = |x: usize, y: usize| gray[y * w + x];

    let mut values = vec![0.0; STRUCTURE_DIM];
    for y in 0..h {
        let up = y.saturating_sub(1);
        let down = (y + 1).min(h - 1);
        let cy = y * STRUCTURE_GRID / h;
        for x in 0..w {
            let left = x.saturating_sub(1);
            let right = (x + 1).min(w - 1);
            let gx = (at(right, y) - at(left, y)) / 2.0;
            let gy = (at(x, down) - at(x, up)) / 2.0;
            let magnitude = gx.hypot(gy);
            if magnitude == 0.0 {
                continue;
            }
            let cx = x * STRUCTURE_GRID / w;
            let cell = cy * STRUCTURE_GRID + cx;
            values[cell * ORIENTATION_BINS + orientation_bin(gx, gy)] += magnitude;
        }
    }

    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
    StructureVector(values)
}

/// Histogram bin (0..21) of one pixel.
pub fn color_bin(rgb: [u8; 3]) -> usize {
    let r = rgb[0] as f64 / 255.0;
    let g = rgb[1] as f64 / 255.0;
    let b = rgb[2] as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let value = max;
    let saturation = if max > 0.0 { (max - min) / max } else { 0.0 };
    if saturation < MIN_SATURATION || value < MIN_VALUE {
        return ((value * ACHROMATIC_BINS as f64) as usize).min(ACHROMATIC_BINS - 1);
    }
    let delta = max - min;
    let mut hue = if max == r {
        60.0 * ((g - b) / delta)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    if hue < 0.0 {
        hue += 360.0;
    }
    let bin = ((hue / (360.0 / HUE_BINS as f64)) as usize).min(HUE_BINS - 1);
    ACHROMATIC_BINS + bin
}

pub fn color_descriptor(image: &RasterImage) -> ColorVector {
    let w = image.width as usize;
    let h = image.height as usize;
    let mut values = vec![0.0; COLOR_DIM];
    let mut counts = [0usize; COLOR_GRID * COLOR_GRID];
    for y in 0..h {
        let cy = y * COLOR_GRID / h;
        for x in 0..w {
            let cell = cy * COLOR_GRID + x * COLOR_GRID / w;
            counts[cell] += 1;
            values[cell * COLOR_CELL_BINS + color_bin(image.pixels[y * w + x])] += 1.0;
        }
    }
    for (cell, &count) in counts.iter().enumerate() {
        if count > 0 {
            let block = &mut values[cell * COLOR_CELL_BINS..(cell + 1) * COLOR_CELL_BINS];
            block.iter_mut().for_each(|v| *v /= count as f64);
        }
    }
    ColorVector(values)
}

pub fn blank_image() -> RasterImage {
    RasterImage::filled(BLANK_SIDE, BLANK_SIDE, [255, 255, 255])
}

/// Descriptors substituted for reports without a screenshot.
pub fn blank_descriptor() -> (StructureVector, ColorVector) {
    let mut color = vec![0.0; COLOR_DIM];
    for cell in 0..COLOR_GRID * COLOR_GRID {
        color[cell * COLOR_CELL_BINS + ACHROMATIC_BINS - 1] = 1.0;
    }
    (
        StructureVector(vec![0.0; STRUCTURE_DIM]),
        ColorVector(color),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cosine(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    fn random_image(rng: &mut ChaCha8Rng, w: u32, h: u32, lo: u8, hi: u8) -> RasterImage {
        let pixels = (0..w * h)
            .map(|_| {
                [
                    rng.gen_range(lo..=hi),
                    rng.gen_range(lo..=hi),
                    rng.gen_range(lo..=hi),
                ]
            })
            .collect();
        RasterImage::new(w, h, pixels).unwrap()
    }

    #[test]
    fn decode_white_png() {
        let png = RasterImage::filled(1, 1, [255, 255, 255]).to_png().unwrap();
        let img = decode_image(&png).unwrap();
        assert_eq!((img.width(), img.height()), (1, 1));
        assert_eq!(img.pixels(), &[[255, 255, 255]]);
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(matches!(
            decode_image(b"\x89PNG\r\n\x1a\nbroken"),
            Err(Error::Decode(_))
        ));
        assert!(matches!(decode_image(b"hello"), Err(Error::Decode(_))));
        assert!(matches!(decode_image(b""), Err(Error::Decode(_))));
    }

    #[test]
    fn decode_round_trips_known_pixels() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let img = random_image(&mut rng, 4, 4, 0, 255);
        assert_eq!(decode_image(&img.to_png().unwrap()).unwrap(), img);
    }

    #[test]
    fn decode_composites_alpha_over_white() {
        let mut rgba = image::RgbaImage::new(2, 1);
        rgba.put_pixel(0, 0, image::Rgba([0, 0, 0, 0]));
        rgba.put_pixel(1, 0, image::Rgba([255, 0, 0, 255]));
        let mut out = std::io::Cursor::new(Vec::new());
        rgba.write_to(&mut out, ImageFormat::Png).unwrap();
        let img = decode_image(out.get_ref()).unwrap();
        assert_eq!(img.pixels(), &[[255, 255, 255], [255, 0, 0]]);
    }

    #[test]
    fn decode_jpeg() {
        let rgb = image::RgbImage::from_pixel(8, 8, image::Rgb([200, 30, 30]));
        let mut out = std::io::Cursor::new(Vec::new());
        rgb.write_to(&mut out, ImageFormat::Jpeg).unwrap();
        let img = decode_image(out.get_ref()).unwrap();
        assert_eq!((img.width(), img.height()), (8, 8));
        let p = img.get(3, 3);
        assert!((p[0] as i32 - 200).abs() < 10 && (p[1] as i32 - 30).abs() < 10);
    }

    #[test]
    fn uniform_image_has_zero_structure() {
        for rgb in [[0, 0, 0], [255, 255, 255], [12, 200, 99]] {
            let v = structure_descriptor(&RasterImage::filled(37, 23, rgb));
            assert!(v.is_zero());
            assert_eq!(v.0.len(), STRUCTURE_DIM);
        }
    }

    #[test]
    fn vertical_stripes_match_pixel_oracle() {
        let (w, h) = (32u32, 24u32);
        let pixels = (0..w * h)
            .map(|i| {
                if (i % w) / 2 % 2 == 0 {
                    [255, 255, 255]
                } else {
                    [0, 0, 0]
                }
            })
            .collect();
        let img = RasterImage::new(w, h, pixels).unwrap();
        let v = structure_descriptor(&img);

        // Direct per-pixel accumulation: stripes only vary along x, so every
        // gradient is horizontal and lands in orientation bin 0.
        let mut expected = vec![0.0; STRUCTURE_DIM];
        for y in 0..h as usize {
            for x in 0..w as usize {
                let l = |xx: usize| luma(img.get(xx as u32, y as u32));
                let gx = (l((x + 1).min(w as usize - 1)) - l(x.saturating_sub(1))) / 2.0;
                let cell = (y * 4 / h as usize) * 4 + x * 4 / w as usize;
                expected[cell * 8] += gx.abs();
            }
        }
        let norm = expected.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (got, want) in v.0.iter().zip(&expected) {
            assert!((got - want / norm).abs() < 1e-12);
        }
        for cell in 0..16 {
            let block = &v.0[cell * 8..cell * 8 + 8];
            assert!(block[0] > 0.0);
            assert!(block[1..].iter().all(|b| *b == 0.0));
        }
    }

    #[test]
    fn orientation_bins_fold_opposite_directions() {
        assert_eq!(orientation_bin(1.0, 0.0), 0);
        assert_eq!(orientation_bin(-1.0, 0.0), 0);
        assert_eq!(orientation_bin(-1.0, -0.0), 0);
        assert_eq!(orientation_bin(0.0, 1.0), 4);
        assert_eq!(orientation_bin(0.0, -1.0), 4);
        assert_eq!(orientation_bin(1.0, 1.0), 2);
    }

    #[test]
    fn white_image_color_mass_in_brightest_achromatic_bin() {
        let v = color_descriptor(&RasterImage::filled(30, 30, [255, 255, 255]));
        for cell in 0..9 {
            let block = v.cell(cell);
            assert_eq!(block[ACHROMATIC_BINS - 1], 1.0);
            assert_eq!(block.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn red_blue_halves_match_pixel_counting() {
        let (w, h) = (10u32, 9u32);
        let pixels = (0..w * h)
            .map(|i| if i % w < 5 { [255, 0, 0] } else { [0, 0, 255] })
            .collect();
        let img = RasterImage::new(w, h, pixels).unwrap();
        let v = color_descriptor(&img);
        // red: hue 0 -> bin 5; blue: hue 240 -> 240/22.5 = 10.67 -> bin 5 + 10
        let (red, blue) = (5, 15);
        assert_eq!(color_bin([255, 0, 0]), red);
        assert_eq!(color_bin([0, 0, 255]), blue);
        // columns: cell 0 = x 0..3, cell 1 = x 4..6, cell 2 = x 7..9
        for row in 0..3 {
            let mut counts = [[0usize; 21]; 3];
            for x in 0..w as usize {
                let cx = x * 3 / w as usize;
                counts[cx][if x < 5 { red } else { blue }] += 1;
            }
            for (cx, cell) in counts.iter().enumerate() {
                let total: usize = cell.iter().sum();
                for (bin, &count) in cell.iter().enumerate() {
                    let want = count as f64 / total as f64;
                    assert!((v.cell(row * 3 + cx)[bin] - want).abs() < 1e-12);
                }
            }
        }
        assert!((v.cell(1)[red] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn achromatic_value_quintiles() {
        assert_eq!(color_bin([0, 0, 0]), 0);
        assert_eq!(color_bin([100, 100, 100]), 1);
        assert_eq!(color_bin([128, 128, 128]), 2);
        assert_eq!(color_bin([200, 200, 200]), 3);
        assert_eq!(color_bin([255, 250, 250]), 4);
        // dark but saturated still counts as achromatic below value 0.1
        assert_eq!(color_bin([20, 0, 0]), 0);
    }

    #[test]
    fn noise_keeps_color_cosine_high() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let base = random_image(&mut rng, 40, 40, 30, 225);
        let mut noisy = base.clone();
        for p in noisy.pixels_mut() {
            for c in p.iter_mut() {
                *c = (*c as i16 + rng.gen_range(-1..=1)).clamp(0, 255) as u8;
            }
        }
        let a = color_descriptor(&base);
        let b = color_descriptor(&noisy);
        assert!(cosine(&a.0, &b.0) >= 0.99);
    }

    #[test]
    fn blank_descriptor_matches_general_operations() {
        let (s, c) = blank_descriptor();
        let white = blank_image();
        assert_eq!((white.width(), white.height()), (256, 256));
        assert!(s.is_zero());
        assert_eq!(s, structure_descriptor(&white));
        assert_eq!(c, color_descriptor(&white));
        for cell in 0..9 {
            assert_eq!(c.cell(cell)[ACHROMATIC_BINS - 1], 1.0);
        }
    }

    #[test]
    fn raster_validation() {
        assert!(RasterImage::new(0, 3, vec![]).is_err());
        assert!(RasterImage::new(2, 2, vec![[0, 0, 0]; 3]).is_err());
    }

    proptest! {
        #[test]
        fn descriptor_contracts(seed in any::<u64>(), w in 1u32..40, h in 1u32..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let img = random_image(&mut rng, w, h, 0, 255);
            let s = structure_descriptor(&img);
            let c = color_descriptor(&img);
            prop_assert_eq!(s.0.len(), STRUCTURE_DIM);
            prop_assert_eq!(c.0.len(), COLOR_DIM);
            let norm = s.0.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(s.is_zero() || (norm - 1.0).abs() < 1e-9);
            for cell in 0..9 {
                let sum: f64 = c.cell(cell).iter().sum();
                prop_assert!(sum == 0.0 || (sum - 1.0).abs() < 1e-9);
                prop_assert!(c.cell(cell).iter().all(|v| (0.0..=1.0).contains(v)));
            }
            prop_assert_eq!(structure_descriptor(&img), s);
            prop_assert_eq!(color_descriptor(&img), c);
        }

        #[test]
        fn structure_ignores_brightness_offset(seed in any::<u64>(), offset in 1u8..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let img = random_image(&mut rng, 24, 20, 0, 200);
            let mut brighter = img.clone();
            for p in brighter.pixels_mut() {
                for c in p.iter_mut() {
                    *c += offset;
                }
            }
            let a = structure_descriptor(&img);
            let b = structure_descriptor(&brighter);
            for (x, y) in a.0.iter().zip(&b.0) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
