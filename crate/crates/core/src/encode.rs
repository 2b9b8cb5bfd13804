//! Bitmap to case: the end-to-end encoding pipeline used for digit and
//! sketch images.

use serde::{Deserialize, Serialize};

use crate::case::CaseDescription;
use crate::error::{HpsError, Result};
use crate::glyph::{glyph_from_strokes, ConceptLabel, Glyph};
use crate::raster::{
    binarize, blur, extract_strokes, resize_below, simplify, thin, upscale, BinaryImage,
    GrayImage, Polarity, Polyline,
};
use crate::phal::{decompose_analysis, LevelDescription};
use crate::shape::{analyze, encode_selection, ShapeParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodeParams {
    pub max_dim: usize,
    /// Integer upsampling applied before blurring; 1 disables it.
    pub upscale: usize,
    pub threshold: u8,
    pub polarity: Polarity,
    pub simplify_eps: f64,
    /// Strokes shorter than this (pixels) are treated as noise.
    pub min_stroke_len: f64,
    pub shape: ShapeParams,
}

impl Default for EncodeParams {
    fn default() -> Self {
        EncodeParams {
            max_dim: 300,
            upscale: 1,
            threshold: 128,
            polarity: Polarity::BrightInk,
            simplify_eps: 1.5,
            min_stroke_len: 0.0,
            shape: ShapeParams::default(),
        }
    }
}

/// Resize, optionally upsample, blur and binarize.
pub fn preprocess(img: &GrayImage, p: &EncodeParams) -> Result<BinaryImage> {
    let small = resize_below(img, p.max_dim)?;
    let big = upscale(&small, p.upscale);
    Ok(binarize(&blur(&big), p.threshold, p.polarity))
}

/// Skeleton strokes of an image, simplified.
pub fn vectorize(img: &GrayImage, p: &EncodeParams) -> Result<Vec<Polyline>> {
    let skeleton = thin(&preprocess(img, p)?);
    Ok(extract_strokes(&skeleton)
        .iter()
        .map(|s| simplify(s, p.simplify_eps))
        .filter(|s| p.min_stroke_len <= 0.0 || crate::geom::polyline_length(&s.path()) >= p.min_stroke_len)
        .collect())
}

/// All of an image's ink as one glyph.
pub fn image_glyph(img: &GrayImage, label: Option<ConceptLabel>, p: &EncodeParams) -> Result<Glyph> {
    let strokes = vectorize(img, p)?;
    if strokes.is_empty() {
        return Err(HpsError::Data("image contains no ink".into()));
    }
    glyph_from_strokes(strokes, label)
}

/// Shape case of an image; an image without ink gives an empty case.
pub fn encode_image(img: &GrayImage, p: &EncodeParams, provenance: &str) -> Result<CaseDescription> {
    match image_glyph(img, None, p) {
        Ok(g) => {
            let a = analyze(&g, &p.shape);
            let all_s: Vec<usize> = (0..a.segments.len()).collect();
            let all_c: Vec<usize> = (0..a.cycles.len()).collect();
            Ok(encode_selection(&a, &all_s, &all_c, &p.shape, provenance).canonicalize())
        }
        Err(HpsError::Data(_)) => Ok(CaseDescription::new(provenance)),
        Err(e) => Err(e),
    }
}

/// Level descriptions of an image for the part-based cascade; an image
/// without ink gives a single empty level-1 description.
pub fn encode_image_levels(img: &GrayImage, p: &EncodeParams, provenance: &str) -> Result<Vec<LevelDescription>> {
    match image_glyph(img, None, p) {
        Ok(g) => Ok(decompose_analysis(&analyze(&g, &p.shape), &p.shape, provenance)),
        Err(HpsError::Data(_)) => Ok(vec![LevelDescription {
            level: 1,
            case: CaseDescription::new(provenance),
            part_cases: Vec::new(),
        }]),
        Err(e) => Err(e),
    }
}
