//! Square letterboxing of chest radiographs.

use std::path::Path;

use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("cannot decode {path}: {source}")]
    Decode {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("cannot write {path}: {source}")]
    Encode {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("target side must be positive")]
    ZeroTarget,
    #[error("input image has a zero dimension ({0}x{1})")]
    EmptyImage(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSpec {
    pub target_side: u32,
    pub pad_color: [u8; 3],
}

impl Default for ImageSpec {
    fn default() -> Self {
        ImageSpec { target_side: 384, pad_color: [127, 127, 127] }
    }
}

/// Where the scaled content sits inside the square output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Letterbox {
    pub content_width: u32,
    pub content_height: u32,
    pub offset_x: u32,
    pub offset_y: u32,
}

/// Content size and offsets for a `width x height` input. The long side
/// maps to `target`, the short side is rounded to the nearest pixel (at
/// least 1), and any odd padding pixel goes to the bottom/right.
pub fn letterbox(width: u32, height: u32, target: u32) -> Letterbox {
    let scale_short = |short: u32, long: u32| -> u32 {
        let scaled = (short as u64 * target as u64 * 2 + long as u64) / (2 * long as u64);
        (scaled as u32).clamp(1, target)
    };
    let (cw, ch) =
        if width >= height { (target, scale_short(height, width)) } else { (scale_short(width, height), target) };
    Letterbox { content_width: cw, content_height: ch, offset_x: (target - cw) / 2, offset_y: (target - ch) / 2 }
}

/// Resizes (bilinear) and pads `input` to `spec.target_side` squared.
pub fn preprocess_image(input: &RgbImage, spec: &ImageSpec) -> Result<RgbImage, ImageError> {
    if spec.target_side == 0 {
        return Err(ImageError::ZeroTarget);
    }
    let (w, h) = input.dimensions();
    if w == 0 || h == 0 {
        return Err(ImageError::EmptyImage(w, h));
    }
    let layout = letterbox(w, h, spec.target_side);
    let mut canvas = RgbImage::from_pixel(spec.target_side, spec.target_side, Rgb(spec.pad_color));
    if (layout.content_width, layout.content_height) == (w, h) {
        imageops::replace(&mut canvas, input, layout.offset_x.into(), layout.offset_y.into());
    } else {
        let scaled = imageops::resize(input, layout.content_width, layout.content_height, FilterType::Triangle);
        imageops::replace(&mut canvas, &scaled, layout.offset_x.into(), layout.offset_y.into());
    }
    Ok(canvas)
}

pub fn load_rgb(path: &Path) -> Result<RgbImage, ImageError> {
    image::open(path)
        .map(|img| img.to_rgb8())
        .map_err(|source| ImageError::Decode { path: path.display().to_string(), source })
}

pub fn save_png(img: &RgbImage, path: &Path) -> Result<(), ImageError> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| ImageError::Encode { path: path.display().to_string(), source })
}

/// Loads, letterboxes and writes a PNG.
pub fn preprocess_file(input: &Path, output: &Path, spec: &ImageSpec) -> Result<Letterbox, ImageError> {
    let img = load_rgb(input)?;
    let out = preprocess_image(&img, spec)?;
    save_png(&out, output)?;
    let (w, h) = img.dimensions();
    Ok(letterbox(w, h, spec.target_side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GREY: Rgb<u8> = Rgb([127, 127, 127]);

    fn is_pad(layout: &Letterbox, x: u32, y: u32) -> bool {
        let inside_x = x >= layout.offset_x && x < layout.offset_x + layout.content_width;
        let inside_y = y >= layout.offset_y && y < layout.offset_y + layout.content_height;
        !(inside_x && inside_y)
    }

    #[test]
    fn landscape_1000x500() {
        let l = letterbox(1000, 500, 384);
        assert_eq!((l.content_width, l.content_height), (384, 192));
        assert_eq!((l.offset_x, l.offset_y), (0, 96));
        let img = RgbImage::from_pixel(1000, 500, Rgb([255, 0, 0]));
        let out = preprocess_image(&img, &ImageSpec::default()).unwrap();
        assert_eq!(out.dimensions(), (384, 384));
        for y in 0..384 {
            let expect_pad = !(96..288).contains(&y);
            for x in 0..384 {
                let px = *out.get_pixel(x, y);
                if expect_pad {
                    assert_eq!(px, GREY, "({x},{y})");
                } else {
                    assert_eq!(px, Rgb([255, 0, 0]), "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn square_input_is_unchanged() {
        let img = RgbImage::from_fn(384, 384, |x, y| Rgb([(x % 256) as u8, (y % 256) as u8, 7]));
        let out = preprocess_image(&img, &ImageSpec::default()).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn portrait_500x999() {
        let l = letterbox(500, 999, 384);
        // 500 * 384 / 999 = 192.19
        assert_eq!((l.content_width, l.content_height), (192, 384));
        assert_eq!((l.offset_x, l.offset_y), (96, 0));
    }

    #[test]
    fn odd_remainder_goes_right() {
        // 300x1000 -> 115.2 rounds to 115, padding 269 = 134 left + 135 right
        let l = letterbox(300, 1000, 384);
        assert_eq!(l.content_width, 115);
        assert_eq!(l.offset_x, 134);
        assert_eq!(384 - l.offset_x - l.content_width, 135);
    }

    #[test]
    fn degenerate_thin_images_keep_one_pixel() {
        let l = letterbox(1, 5000, 384);
        assert_eq!(l.content_width, 1);
        assert_eq!(l.offset_x, 191);
    }

    #[test]
    fn bilinear_preserves_constant_and_ramp_order() {
        let flat = RgbImage::from_pixel(800, 400, Rgb([50, 60, 70]));
        let out = preprocess_image(&flat, &ImageSpec::default()).unwrap();
        assert_eq!(*out.get_pixel(200, 192), Rgb([50, 60, 70]));

        let ramp = RgbImage::from_fn(768, 768, |x, _| Rgb([(x / 3) as u8, 0, 0]));
        let out = preprocess_image(&ramp, &ImageSpec::default()).unwrap();
        let row: Vec<u8> = (0..384).map(|x| out.get_pixel(x, 100)[0]).collect();
        assert!(row.windows(2).all(|w| w[0] <= w[1]));
        // halving a linear ramp x/3 gives roughly 2x/3
        for x in [30u32, 150, 300] {
            let expected = (2.0 * x as f64 + 0.5) / 3.0;
            assert!((row[x as usize] as f64 - expected).abs() <= 1.5, "x={x}");
        }
    }

    #[test]
    fn errors() {
        let img = RgbImage::new(4, 4);
        assert!(matches!(
            preprocess_image(&img, &ImageSpec { target_side: 0, pad_color: [0, 0, 0] }),
            Err(ImageError::ZeroTarget)
        ));
        assert!(matches!(load_rgb(Path::new("/definitely/not/here.png")), Err(ImageError::Decode { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn output_is_square_and_pad_exact(w in 1u32..600, h in 1u32..600, target in 8u32..128) {
            let img = RgbImage::from_pixel(w, h, Rgb([10, 200, 30]));
            let spec = ImageSpec { target_side: target, pad_color: [127, 127, 127] };
            let out = preprocess_image(&img, &spec).unwrap();
            prop_assert_eq!(out.dimensions(), (target, target));
            let l = letterbox(w, h, target);
            for (x, y, px) in out.enumerate_pixels() {
                if is_pad(&l, x, y) {
                    prop_assert_eq!(*px, GREY);
                }
            }
            // aspect ratio within one pixel
            let ideal = if w >= h { h as f64 * target as f64 / w as f64 } else { w as f64 * target as f64 / h as f64 };
            let short = l.content_width.min(l.content_height) as f64;
            prop_assert!((short - ideal.max(1.0)).abs() <= 1.0);
        }
    }
}
