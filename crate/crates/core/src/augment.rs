//! Shape-preserving augmentations for single-channel SAR-style images.
//!
//! Every operation returns an image of the input's size with intensities
//! clamped to `[0, 1]`. The random variants draw only from the generator
//! they are handed, so a seeded generator makes them reproducible.

use alloc::vec::Vec;

use rand::{Rng, RngExt};

use crate::error::{bail, Result};
use crate::image::ImageBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipAxis {
    /// Mirror left-right.
    Horizontal,
    /// Mirror top-bottom.
    Vertical,
}

pub fn flip(img: &ImageBuffer, axis: FlipAxis) -> ImageBuffer {
    let (h, w) = (img.height(), img.width());
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        let src = match axis {
            FlipAxis::Horizontal => r,
            FlipAxis::Vertical => h - 1 - r,
        };
        let row = &img.pixels()[src * w..(src + 1) * w];
        match axis {
            FlipAxis::Horizontal => out.extend(row.iter().rev()),
            FlipAxis::Vertical => out.extend_from_slice(row),
        }
    }
    ImageBuffer::from_clamped(h, w, out)
}

/// Rotates clockwise by `degrees` about the image center.
///
/// Quarter turns are exact index permutations (180° always, 90°/270° on
/// square images). Any other angle uses nearest-neighbour sampling with
/// zero fill outside the source.
pub fn rotate(img: &ImageBuffer, degrees: f64) -> Result<ImageBuffer> {
    if !degrees.is_finite() {
        bail!(Domain, "rotation angle must be finite, got {degrees}");
    }
    let (h, w) = (img.height(), img.width());
    let mut turn = libm::fmod(degrees, 360.0);
    if turn < 0.0 {
        turn += 360.0;
    }
    if turn == 360.0 {
        turn = 0.0;
    }
    let px = img.pixels();
    let exact: Option<Vec<f64>> = if turn == 0.0 {
        Some(px.to_vec())
    } else if turn == 180.0 {
        Some(px.iter().rev().copied().collect())
    } else if h == w && turn == 90.0 {
        Some((0..h * w).map(|i| img.get(h - 1 - i % w, i / w)).collect())
    } else if h == w && turn == 270.0 {
        Some((0..h * w).map(|i| img.get(i % w, w - 1 - i / w)).collect())
    } else {
        None
    };
    if let Some(out) = exact {
        return Ok(ImageBuffer::from_clamped(h, w, out));
    }

    let theta = turn.to_radians();
    let (sin, cos) = (libm::sin(theta), libm::cos(theta));
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            let (dy, dx) = (r as f64 - cy, c as f64 - cx);
            // inverse of a clockwise turn in y-down coordinates
            let sx = libm::round(cx + dx * cos + dy * sin);
            let sy = libm::round(cy - dx * sin + dy * cos);
            let inside = sx >= 0.0 && sy >= 0.0 && sx < w as f64 && sy < h as f64;
            out.push(if inside { img.get(sy as usize, sx as usize) } else { 0.0 });
        }
    }
    Ok(ImageBuffer::from_clamped(h, w, out))
}

/// Contrast about the image mean, then brightness scaling; both clamped.
pub fn jitter(img: &ImageBuffer, brightness_factor: f64, contrast_factor: f64) -> Result<ImageBuffer> {
    for (name, f) in [("brightness", brightness_factor), ("contrast", contrast_factor)] {
        if !(f.is_finite() && f > 0.0) {
            bail!(Domain, "{name} factor must be positive, got {f}");
        }
    }
    let mean = img.mean();
    let out = img
        .pixels()
        .iter()
        .map(|&p| {
            let contrasted = ((p - mean) * contrast_factor + mean).clamp(0.0, 1.0);
            contrasted * brightness_factor
        })
        .collect();
    Ok(ImageBuffer::from_clamped(img.height(), img.width(), out))
}

/// Bilinear resize with half-pixel centers and edge clamping.
pub fn resize_bilinear(img: &ImageBuffer, height: usize, width: usize) -> Result<ImageBuffer> {
    if height == 0 || width == 0 {
        bail!(Shape, "resize target must be at least 1x1");
    }
    let axis = |out_len: usize, in_len: usize| -> Vec<(usize, usize, f64)> {
        let scale = in_len as f64 / out_len as f64;
        (0..out_len)
            .map(|d| {
                let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (in_len - 1) as f64);
                let i0 = libm::floor(s) as usize;
                let i1 = (i0 + 1).min(in_len - 1);
                (i0, i1, s - i0 as f64)
            })
            .collect()
    };
    let ys = axis(height, img.height());
    let xs = axis(width, img.width());
    let lerp = |a: f64, b: f64, t: f64| a + t * (b - a);
    let mut out = Vec::with_capacity(height * width);
    for &(y0, y1, ty) in &ys {
        for &(x0, x1, tx) in &xs {
            let top = lerp(img.get(y0, x0), img.get(y0, x1), tx);
            let bottom = lerp(img.get(y1, x0), img.get(y1, x1), tx);
            out.push(lerp(top, bottom, ty));
        }
    }
    Ok(ImageBuffer::from_clamped(height, width, out))
}

fn crop_window(img: &ImageBuffer, side_fraction: f64) -> Result<(usize, usize)> {
    if !(side_fraction > 0.0 && side_fraction <= 1.0) {
        bail!(Domain, "crop fraction {side_fraction} outside (0, 1]");
    }
    let ch = libm::floor(side_fraction * img.height() as f64) as usize;
    let cw = libm::floor(side_fraction * img.width() as f64) as usize;
    if ch == 0 || cw == 0 {
        bail!(Domain, "crop fraction {side_fraction} leaves a window under one pixel");
    }
    Ok((ch, cw))
}

/// Crops the `side_fraction` window at (`top`, `left`) and resizes it back.
pub fn crop_resize_at(img: &ImageBuffer, side_fraction: f64, top: usize, left: usize) -> Result<ImageBuffer> {
    let (ch, cw) = crop_window(img, side_fraction)?;
    if top + ch > img.height() || left + cw > img.width() {
        bail!(Shape, "crop window {ch}x{cw} at ({top}, {left}) exceeds the image");
    }
    let mut px = Vec::with_capacity(ch * cw);
    for r in top..top + ch {
        px.extend_from_slice(&img.pixels()[r * img.width() + left..r * img.width() + left + cw]);
    }
    let window = ImageBuffer::from_clamped(ch, cw, px);
    resize_bilinear(&window, img.height(), img.width())
}

/// Random-offset crop of `floor(f*H) x floor(f*W)`, resized back to `H x W`.
pub fn random_crop_resize<R: Rng + ?Sized>(img: &ImageBuffer, side_fraction: f64, rng: &mut R) -> Result<ImageBuffer> {
    let (ch, cw) = crop_window(img, side_fraction)?;
    let top = rng.random_range(0..=img.height() - ch);
    let left = rng.random_range(0..=img.width() - cw);
    crop_resize_at(img, side_fraction, top, left)
}

fn hole_side(img: &ImageBuffer, hole_fraction: f64) -> Result<usize> {
    if !(hole_fraction > 0.0 && hole_fraction <= 1.0) {
        bail!(Domain, "cutout fraction {hole_fraction} outside (0, 1]");
    }
    let side = libm::floor(hole_fraction * img.height().min(img.width()) as f64) as usize;
    if side == 0 {
        bail!(Domain, "cutout fraction {hole_fraction} leaves a hole under one pixel");
    }
    Ok(side)
}

/// Zeroes the `side x side` square with top-left corner (`top`, `left`).
pub fn cutout_at(img: &ImageBuffer, side: usize, top: usize, left: usize) -> Result<ImageBuffer> {
    if side == 0 || top + side > img.height() || left + side > img.width() {
        bail!(Shape, "cutout square {side} at ({top}, {left}) does not fit the image");
    }
    let w = img.width();
    let mut px = img.pixels().to_vec();
    for r in top..top + side {
        px[r * w + left..r * w + left + side].fill(0.0);
    }
    Ok(ImageBuffer::from_clamped(img.height(), w, px))
}

/// One square hole of side `floor(f * min(H, W))` at a uniform position.
pub fn cutout<R: Rng + ?Sized>(img: &ImageBuffer, hole_fraction: f64, rng: &mut R) -> Result<ImageBuffer> {
    let side = hole_side(img, hole_fraction)?;
    let top = rng.random_range(0..=img.height() - side);
    let left = rng.random_range(0..=img.width() - side);
    cutout_at(img, side, top, left)
}

/// Which augmentations run and the ranges they sample from.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentSpec {
    /// Maximum absolute rotation in degrees; `None` disables rotation.
    pub rotation: Option<f64>,
    pub horizontal_flip: bool,
    pub vertical_flip: bool,
    /// Brightness factor range; `None` keeps brightness.
    pub brightness: Option<(f64, f64)>,
    /// Contrast factor range; `None` keeps contrast.
    pub contrast: Option<(f64, f64)>,
    /// Crop side fraction; `None` disables cropping.
    pub crop: Option<f64>,
    /// Cutout hole side as a fraction of `min(H, W)`; `None` disables it.
    pub cutout: Option<f64>,
    pub seed: u64,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        Self {
            rotation: Some(180.0),
            horizontal_flip: true,
            vertical_flip: true,
            brightness: Some((0.8, 1.2)),
            contrast: Some((0.8, 1.2)),
            crop: Some(0.875),
            cutout: Some(0.25),
            seed: 0,
        }
    }
}

impl AugmentSpec {
    /// Every augmentation switched off.
    pub fn disabled() -> Self {
        Self {
            rotation: None,
            horizontal_flip: false,
            vertical_flip: false,
            brightness: None,
            contrast: None,
            crop: None,
            cutout: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.rotation {
            if !(r.is_finite() && r >= 0.0) {
                bail!(Domain, "max rotation must be finite and non-negative, got {r}");
            }
        }
        for (name, range) in [("brightness", self.brightness), ("contrast", self.contrast)] {
            if let Some((lo, hi)) = range {
                if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                    bail!(Domain, "{name} range ({lo}, {hi}) must be positive and ordered");
                }
            }
        }
        for (name, f) in [("crop", self.crop), ("cutout", self.cutout)] {
            if let Some(f) = f {
                if !(f > 0.0 && f <= 1.0) {
                    bail!(Domain, "{name} fraction {f} outside (0, 1]");
                }
            }
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Applies the enabled augmentations in the order
/// rotate, flip, jitter, crop, cutout.
pub fn augment<R: Rng + ?Sized>(img: &ImageBuffer, spec: &AugmentSpec, rng: &mut R) -> Result<ImageBuffer> {
    spec.validate()?;
    let mut out = img.clone();
    if let Some(max) = spec.rotation {
        let angle = uniform(rng, -max, max);
        out = rotate(&out, angle)?;
    }
    if spec.horizontal_flip && rng.random_bool(0.5) {
        out = flip(&out, FlipAxis::Horizontal);
    }
    if spec.vertical_flip && rng.random_bool(0.5) {
        out = flip(&out, FlipAxis::Vertical);
    }
    if spec.brightness.is_some() || spec.contrast.is_some() {
        let b = spec.brightness.map_or(1.0, |(lo, hi)| uniform(rng, lo, hi));
        let c = spec.contrast.map_or(1.0, |(lo, hi)| uniform(rng, lo, hi));
        out = jitter(&out, b, c)?;
    }
    if let Some(f) = spec.crop {
        out = random_crop_resize(&out, f, rng)?;
    }
    if let Some(f) = spec.cutout {
        out = cutout(&out, f, rng)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn two_by_two() -> ImageBuffer {
        ImageBuffer::from_rows(&[[0.1, 0.2], [0.3, 0.4]]).unwrap()
    }

    fn random_image(h: usize, w: usize, seed: u64) -> ImageBuffer {
        let mut rng = crate::seeded_rng(seed);
        ImageBuffer::new(h, w, (0..h * w).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    #[test]
    fn flips() {
        let img = two_by_two();
        assert_eq!(flip(&img, FlipAxis::Horizontal).pixels(), &[0.2, 0.1, 0.4, 0.3]);
        assert_eq!(flip(&img, FlipAxis::Vertical).pixels(), &[0.3, 0.4, 0.1, 0.2]);
        let one = ImageBuffer::filled(1, 1, 0.7).unwrap();
        assert_eq!(flip(&one, FlipAxis::Horizontal), one);
        let r = random_image(5, 7, 1);
        for axis in [FlipAxis::Horizontal, FlipAxis::Vertical] {
            assert_eq!(flip(&flip(&r, axis), axis), r);
        }
    }

    #[test]
    fn quarter_turns() {
        let img = two_by_two();
        assert_eq!(rotate(&img, 90.0).unwrap().pixels(), &[0.3, 0.1, 0.4, 0.2]);
        assert_eq!(rotate(&img, -90.0).unwrap(), rotate(&img, 270.0).unwrap());
        assert_eq!(rotate(&img, 0.0).unwrap(), img);
        let sq = random_image(6, 6, 2);
        let mut r = sq.clone();
        for _ in 0..4 {
            r = rotate(&r, 90.0).unwrap();
        }
        assert_eq!(r, sq);
        let rect = random_image(3, 5, 3);
        assert_eq!(rotate(&rotate(&rect, 180.0).unwrap(), 180.0).unwrap(), rect);
        assert!(rotate(&img, f64::NAN).is_err());
    }

    #[test]
    fn nearest_neighbour_matches_exact_quarter_turn() {
        // 90° through the sampling path must agree with the permutation.
        let sq = random_image(5, 5, 4);
        let exact = rotate(&sq, 90.0).unwrap();
        let sampled = rotate(&sq, 90.0 + 1e-9).unwrap();
        assert_eq!(exact, sampled);
    }

    #[test]
    fn off_axis_rotation_pads_with_zero() {
        let ones = ImageBuffer::filled(9, 9, 1.0).unwrap();
        let r = rotate(&ones, 45.0).unwrap();
        assert_eq!(r.get(0, 0), 0.0);
        assert_eq!(r.get(4, 4), 1.0);
    }

    #[test]
    fn jitter_examples() {
        let r = random_image(4, 4, 5);
        assert_eq!(jitter(&r, 1.0, 1.0).unwrap(), r);
        let flat = ImageBuffer::filled(3, 3, 0.5).unwrap();
        let j = jitter(&flat, 1.1, 0.37).unwrap();
        assert!(j.pixels().iter().all(|&p| (p - 0.55).abs() < 1e-15));
        let bright = ImageBuffer::filled(1, 1, 0.95).unwrap();
        assert_eq!(jitter(&bright, 1.2, 1.0).unwrap().pixels(), &[1.0]);
        assert!(jitter(&r, 0.0, 1.0).is_err());
        assert!(jitter(&r, 1.0, -1.0).is_err());
    }

    #[test]
    fn crop_examples() {
        let mut rng = crate::seeded_rng(9);
        let r = random_image(6, 5, 6);
        assert_eq!(random_crop_resize(&r, 1.0, &mut rng).unwrap(), r);
        let flat = ImageBuffer::filled(7, 5, 0.3).unwrap();
        assert_eq!(random_crop_resize(&flat, 0.6, &mut rng).unwrap(), flat);
        assert!(random_crop_resize(&r, 0.1, &mut rng).is_err());
        assert!(random_crop_resize(&r, 0.0, &mut rng).is_err());
    }

    #[test]
    fn cutout_examples() {
        let ones = ImageBuffer::filled(4, 4, 1.0).unwrap();
        let c = cutout_at(&ones, 2, 0, 0).unwrap();
        assert_eq!(c.pixels().iter().sum::<f64>(), 12.0);
        let mut rng = crate::seeded_rng(1);
        let all = cutout(&ones, 1.0, &mut rng).unwrap();
        assert!(all.pixels().iter().all(|&p| p == 0.0));
        assert!(cutout(&ones, 0.1, &mut rng).is_err());
        assert!(cutout_at(&ones, 3, 2, 0).is_err());
    }

    #[test]
    fn augment_contracts() {
        let r = random_image(8, 8, 7);
        let mut rng = crate::seeded_rng(0);
        assert_eq!(augment(&r, &AugmentSpec::disabled(), &mut rng).unwrap(), r);
        let spec = AugmentSpec::default();
        let a = augment(&r, &spec, &mut crate::seeded_rng(42)).unwrap();
        let b = augment(&r, &spec, &mut crate::seeded_rng(42)).unwrap();
        assert_eq!(a, b);
        let bad = AugmentSpec { crop: Some(1.5), ..AugmentSpec::default() };
        assert!(augment(&r, &bad, &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn shape_and_range_preserved(h in 1usize..12, w in 1usize..12, seed in any::<u64>(), angle in -400.0f64..400.0) {
            let img = random_image(h, w, seed);
            let mut rng = crate::seeded_rng(seed ^ 0x5eed);
            let mut outs = vec![
                flip(&img, FlipAxis::Horizontal),
                flip(&img, FlipAxis::Vertical),
                rotate(&img, angle).unwrap(),
                jitter(&img, 1.7, 2.5).unwrap(),
                jitter(&img, 0.3, 0.2).unwrap(),
            ];
            if let Ok(c) = random_crop_resize(&img, 0.875, &mut rng) { outs.push(c); }
            if let Ok(c) = cutout(&img, 0.5, &mut rng) {
                prop_assert!(c.pixels().iter().zip(img.pixels()).all(|(a, b)| a <= b));
                outs.push(c);
            }
            let spec = AugmentSpec { crop: Some(1.0), cutout: Some(1.0), ..AugmentSpec::default() };
            outs.push(augment(&img, &spec, &mut rng).unwrap());
            for o in outs {
                prop_assert_eq!((o.height(), o.width()), (h, w));
                prop_assert!(o.pixels().iter().all(|p| (0.0..=1.0).contains(p)));
            }
        }
    }
}
