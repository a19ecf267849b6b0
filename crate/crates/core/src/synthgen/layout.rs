//! Procedural UI layouts rendered as screenshots.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::image_features::{
    color_descriptor, structure_descriptor, ColorVector, RasterImage, StructureVector,
};
use crate::similarity::cosine;

const WHITE: [u8; 3] = [250, 250, 250];
const LIGHT_GRAY: [u8; 3] = [236, 236, 236];
const MID_GRAY: [u8; 3] = [128, 128, 128];
const INK: [u8; 3] = [60, 60, 60];
const DARK: [u8; 3] = [40, 40, 40];

/// How the inside of an element is painted.
#[derive(Debug, Clone, PartialEq)]
pub enum Fill {
    Solid([u8; 3]),
    /// Horizontal text-like lines.
    Lines {
        bg: [u8; 3],
        ink: [u8; 3],
        period: u32,
        thickness: u32,
    },
    /// Vertical bars, e.g. a chart.
    Bars {
        bg: [u8; 3],
        ink: [u8; 3],
        period: u32,
        thickness: u32,
    },
    /// Diagonal stripes, e.g. a photo placeholder.
    Diagonal {
        bg: [u8; 3],
        ink: [u8; 3],
        period: u32,
    },
    /// Icon grid.
    Checker {
        a: [u8; 3],
        b: [u8; 3],
        cells: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    /// x0, y0, x1, y1 as fractions of the screen.
    pub rect: [f64; 4],
    pub fill: Fill,
}

/// A screen design; renders identically at a given size apart from noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub background: [u8; 3],
    pub elements: Vec<Element>,
}

/// RGB of an HSV color (hue in degrees, saturation and value in [0, 1]).
pub fn hsv_to_rgb(hue: f64, saturation: f64, value: f64) -> [u8; 3] {
    let c = value * saturation;
    let h = (hue % 360.0) / 60.0;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = value - c;
    let to_u8 = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to_u8(r), to_u8(g), to_u8(b)]
}

/// A saturated color centred in one of the 16 hue bins.
fn palette_color(rng: &mut ChaCha8Rng, hue_bin: usize) -> [u8; 3] {
    let hue = 22.5 * hue_bin as f64 + 11.25;
    hsv_to_rgb(hue, rng.gen_range(0.55..0.95), rng.gen_range(0.55..0.95))
}

impl Layout {
    /// Draws a random screen: status bar, header, a stack of content blocks
    /// and optional footer and floating button.
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut hues: Vec<usize> = (0..16).collect();
        hues.shuffle(rng);
        let palette: Vec<[u8; 3]> = hues[..3].iter().map(|&h| palette_color(rng, h)).collect();
        let neutrals = [WHITE, LIGHT_GRAY, DARK];
        let background = if rng.gen_bool(0.5) {
            palette[0]
        } else {
            *neutrals.choose(rng).unwrap()
        };
        let pick = |rng: &mut ChaCha8Rng| -> [u8; 3] {
            if rng.gen_bool(0.7) {
                *palette.choose(rng).unwrap()
            } else {
                *[WHITE, MID_GRAY, DARK].choose(rng).unwrap()
            }
        };

        let mut elements = vec![Element {
            rect: [0.0, 0.0, 1.0, 0.03],
            fill: Fill::Solid(WHITE),
        }];
        let header_bottom = rng.gen_range(0.09..0.17);
        elements.push(Element {
            rect: [0.0, 0.03, 1.0, header_bottom],
            fill: Fill::Solid(palette[rng.gen_range(0..3)]),
        });
        let has_footer = rng.gen_bool(0.5);
        let body_bottom = if has_footer {
            rng.gen_range(0.86..0.92)
        } else {
            0.98
        };

        let n_blocks = rng.gen_range(2..=5);
        let mut cuts: Vec<f64> = (0..n_blocks - 1)
            .map(|_| rng.gen_range(header_bottom..body_bottom))
            .collect();
        cuts.sort_by(f64::total_cmp);
        let mut edges = vec![header_bottom];
        edges.extend(cuts);
        edges.push(body_bottom);
        for pair in edges.windows(2) {
            let (top, bottom) = (pair[0] + 0.01, pair[1] - 0.01);
            if bottom - top < 0.03 {
                continue;
            }
            let margin = rng.gen_range(0.0..0.12);
            let fill = match rng.gen_range(0..5) {
                0 => Fill::Solid(pick(rng)),
                1 => Fill::Lines {
                    bg: if rng.gen_bool(0.6) { WHITE } else { pick(rng) },
                    ink: if rng.gen_bool(0.6) { INK } else { pick(rng) },
                    period: rng.gen_range(4..9),
                    thickness: rng.gen_range(1..3),
                },
                2 => Fill::Bars {
                    bg: if rng.gen_bool(0.5) { WHITE } else { pick(rng) },
                    ink: pick(rng),
                    period: rng.gen_range(5..12),
                    thickness: rng.gen_range(2..5),
                },
                3 => Fill::Diagonal {
                    bg: pick(rng),
                    ink: pick(rng),
                    period: rng.gen_range(6..14),
                },
                _ => Fill::Checker {
                    a: pick(rng),
                    b: if rng.gen_bool(0.5) { WHITE } else { pick(rng) },
                    cells: rng.gen_range(3..7),
                },
            };
            elements.push(Element {
                rect: [margin, top, 1.0 - margin, bottom],
                fill,
            });
        }
        if has_footer {
            elements.push(Element {
                rect: [0.0, body_bottom, 1.0, 1.0],
                fill: Fill::Solid(pick(rng)),
            });
        }
        if rng.gen_bool(0.5) {
            let x = rng.gen_range(0.6..0.8);
            let y = rng.gen_range(0.6..0.8);
            elements.push(Element {
                rect: [x, y, x + 0.14, y + 0.08],
                fill: Fill::Solid(palette[2]),
            });
        }
        Self {
            background,
            elements,
        }
    }

    /// Noise-free rendering.
    pub fn render(&self, width: u32, height: u32) -> RasterImage {
        let mut img = RasterImage::filled(width, height, self.background);
        for el in &self.elements {
            let x0 = (el.rect[0] * width as f64).round() as u32;
            let y0 = (el.rect[1] * height as f64).round() as u32;
            let x1 = ((el.rect[2] * width as f64).round() as u32).min(width);
            let y1 = ((el.rect[3] * height as f64).round() as u32).min(height);
            for y in y0..y1 {
                for x in x0..x1 {
                    let (lx, ly) = (x - x0, y - y0);
                    let rgb = match el.fill {
                        Fill::Solid(c) => c,
                        Fill::Lines {
                            bg,
                            ink,
                            period,
                            thickness,
                        } => {
                            // leave a left gutter so lines read as text
                            if ly % period < thickness && lx >= 2 && lx + 2 < x1 - x0 {
                                ink
                            } else {
                                bg
                            }
                        }
                        Fill::Bars {
                            bg,
                            ink,
                            period,
                            thickness,
                        } => {
                            if lx % period < thickness {
                                ink
                            } else {
                                bg
                            }
                        }
                        Fill::Diagonal { bg, ink, period } => {
                            if (lx + ly) % period < period / 2 {
                                ink
                            } else {
                                bg
                            }
                        }
                        Fill::Checker { a, b, cells } => {
                            let cw = ((x1 - x0) / cells).max(1);
                            let ch = ((y1 - y0) / cells).max(1);
                            if (lx / cw + ly / ch).is_multiple_of(2) {
                                a
                            } else {
                                b
                            }
                        }
                    };
                    img.set(x, y, rgb);
                }
            }
        }
        img
    }
}

/// Per-pixel RGB offsets in {-1, 0, 1}.
#[derive(Debug, Clone)]
pub struct NoiseField(Vec<[i8; 3]>);

impl NoiseField {
    pub fn random(rng: &mut ChaCha8Rng, width: u32, height: u32) -> Self {
        Self(
            (0..width as usize * height as usize)
                .map(|_| {
                    [
                        rng.gen_range(-1..=1),
                        rng.gen_range(-1..=1),
                        rng.gen_range(-1..=1),
                    ]
                })
                .collect(),
        )
    }

    pub fn apply(&self, image: &RasterImage) -> RasterImage {
        let mut out = image.clone();
        for (p, n) in out.pixels_mut().iter_mut().zip(&self.0) {
            for (c, d) in p.iter_mut().zip(n) {
                *c = (*c as i16 + *d as i16).clamp(0, 255) as u8;
            }
        }
        out
    }
}

/// Replaces the first `count` pixels of `base`, in column-major order, with
/// the pixels of `other`.
pub fn wipe(base: &RasterImage, other: &RasterImage, count: usize) -> RasterImage {
    let (w, h) = (base.width(), base.height());
    let mut out = base.clone();
    let mut done = 0;
    'outer: for x in 0..w {
        for y in 0..h {
            if done == count {
                break 'outer;
            }
            out.set(x, y, other.get(x, y));
            done += 1;
        }
    }
    out
}

/// Descriptors of a rendered screenshot.
#[derive(Debug, Clone)]
pub struct Descriptors {
    pub structure: StructureVector,
    pub color: ColorVector,
}

impl Descriptors {
    pub fn of(image: &RasterImage) -> Self {
        Self {
            structure: structure_descriptor(image),
            color: color_descriptor(image),
        }
    }

    /// Screenshot similarity under the full mask.
    pub fn similarity(&self, other: &Descriptors) -> f64 {
        let s = cosine(&self.structure.0, &other.structure.0)
            .unwrap_or(0.0)
            .clamp(0.0, 1.0);
        let c = cosine(&self.color.0, &other.color.0)
            .unwrap_or(0.0)
            .clamp(0.0, 1.0);
        (s + c) / 2.0
    }
}

/// Largest screenshot similarity accepted between two library layouts,
/// measured on clean renders.
pub const DISTINCT_LAYOUT_LIMIT: f64 = 0.85;
const MAX_LAYOUT_ATTEMPTS: usize = 500;

/// Layouts that are pairwise dissimilar at a fixed render size.
#[derive(Debug, Clone)]
pub struct LayoutLibrary {
    width: u32,
    height: u32,
    layouts: Vec<Layout>,
    descriptors: Vec<Descriptors>,
}

impl LayoutLibrary {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            layouts: Vec::new(),
            descriptors: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.layouts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layouts.is_empty()
    }

    pub fn get(&self, id: usize) -> &Layout {
        &self.layouts[id]
    }

    /// Adds a random layout whose clean render stays at or below
    /// [`DISTINCT_LAYOUT_LIMIT`] against every layout already present.
    /// Returns `None` if no such layout was found.
    pub fn add_distinct(&mut self, rng: &mut ChaCha8Rng) -> Option<usize> {
        for _ in 0..MAX_LAYOUT_ATTEMPTS {
            let layout = Layout::random(rng);
            let desc = Descriptors::of(&layout.render(self.width, self.height));
            if self
                .descriptors
                .iter()
                .all(|d| d.similarity(&desc) <= DISTINCT_LAYOUT_LIMIT)
            {
                self.layouts.push(layout);
                self.descriptors.push(desc);
                return Some(self.layouts.len() - 1);
            }
        }
        None
    }

    /// Renders layout `id` with a fresh noise field.
    pub fn render_noisy(&self, id: usize, rng: &mut ChaCha8Rng) -> RasterImage {
        let clean = self.layouts[id].render(self.width, self.height);
        NoiseField::random(rng, self.width, self.height).apply(&clean)
    }

    pub fn render_clean(&self, id: usize) -> RasterImage {
        self.layouts[id].render(self.width, self.height)
    }
}
