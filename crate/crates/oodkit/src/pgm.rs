//! Single-channel images as 8-bit binary PGM (P5) or FVEC (rows = height).

use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};
use oodkit_core::ImageBuffer;

use crate::error::{read, FileError};
use crate::fvec_file;

fn image_err(path: &Path, e: image::ImageError) -> FileError {
    FileError::parse(path, 0, e.to_string())
}

/// Loads a PGM, mapping 0..=255 to [0, 1].
pub fn read_pgm(path: &Path) -> Result<ImageBuffer, FileError> {
    let bytes = read(path)?;
    let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Pnm)
        .map_err(|e| image_err(path, e))?
        .into_luma8();
    let (w, h) = img.dimensions();
    let px = img.into_raw().into_iter().map(|p| f64::from(p) / 255.0).collect();
    ImageBuffer::new(h as usize, w as usize, px).map_err(|e| FileError::data(path, e))
}

/// Saves as binary PGM, rounding intensities to the nearest 8-bit level.
pub fn write_pgm(img: &ImageBuffer, path: &Path) -> Result<(), FileError> {
    let px: Vec<u8> = img.pixels().iter().map(|&p| (p * 255.0).round() as u8).collect();
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&px, img.width() as u32, img.height() as u32, ExtendedColorType::L8)
        .map_err(|e| image_err(path, e))?;
    crate::write_atomic(path, &out)
}

/// Reads `.fvec` files as FVEC images and anything else as PGM.
pub fn read_image(path: &Path) -> Result<ImageBuffer, FileError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("fvec")) {
        let m = fvec_file::read_fvec(path)?;
        ImageBuffer::from_matrix(&m).map_err(|e| FileError::data(path, e))
    } else {
        read_pgm(path)
    }
}

pub fn write_image(img: &ImageBuffer, path: &Path) -> Result<(), FileError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("fvec")) {
        fvec_file::write_fvec(&img.to_matrix(), path)
    } else {
        write_pgm(img, path)
    }
}
