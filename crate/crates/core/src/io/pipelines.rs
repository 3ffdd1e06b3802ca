//! Image models: denoising/inpainting and stereo, with superpixel cliques read
//! from a segmentation raster.

use std::path::Path;

use super::pnm::{segments, write_image, Image};
use super::IoError;
use crate::model::{Clique, DistanceSpec, Energy, Label, Labeling, Model};

fn cliques_from(segmentation: &Image, weight: Energy) -> Vec<Clique> {
    segments(segmentation)
        .into_iter()
        .map(|members| Clique::new(members, weight))
        .collect()
}

fn check_shape(a: &Image, b: &Image, what: &str) -> Result<(), IoError> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(IoError::DimensionMismatch(format!(
            "{what}: {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )))
    }
}

/// Intensity represented by `label` when labels step through `0..=maxval` by
/// `stride`.
pub fn label_value(label: Label, stride: u16) -> u32 {
    (label - 1) * stride as u32
}

/// Labels are intensities `0, stride, 2 stride, ... <= maxval`; the unary of a
/// pixel is the squared difference between label intensity and observation
/// (summed over channels). Pixels whose `mask` value is 0 are unobserved and
/// get zero unaries (inpainting). One clique per segment with weight `weight`.
pub fn build_denoise_model(
    image: &Image,
    segmentation: &Image,
    mask: Option<&Image>,
    weight: Energy,
    dist: DistanceSpec,
    stride: u16,
) -> Result<Model, IoError> {
    check_shape(image, segmentation, "image and segmentation")?;
    if let Some(mask) = mask {
        check_shape(image, mask, "image and mask")?;
    }
    let stride = stride.max(1);
    let labels = image.maxval as usize / stride as usize + 1;
    let mut unary = Vec::with_capacity(image.pixels() * labels);
    for p in 0..image.pixels() {
        let observed = mask.is_none_or(|m| m.data[p * m.channels] != 0);
        let px = &image.data[p * image.channels..(p + 1) * image.channels];
        for label in 1..=labels as Label {
            let value = label_value(label, stride) as i64;
            let cost: i64 = if observed {
                px.iter().map(|&v| (value - v as i64).pow(2)).sum()
            } else {
                0
            };
            unary.push(cost as Energy);
        }
    }
    Ok(Model::new(
        image.pixels(),
        labels,
        unary,
        cliques_from(segmentation, weight),
        dist,
    )?)
}

/// Disparities `0..=max_disparity` (label `i` is disparity `i - 1`). The unary
/// is the L1 color difference between `left(x, y)` and `right(x - d, y)`;
/// disparities that leave the frame cost the largest in-frame unary of that
/// pixel.
pub fn build_stereo_model(
    left: &Image,
    right: &Image,
    segmentation: &Image,
    weight: Energy,
    dist: DistanceSpec,
    max_disparity: usize,
) -> Result<Model, IoError> {
    check_shape(left, right, "left and right")?;
    check_shape(left, segmentation, "image and segmentation")?;
    if left.channels != right.channels {
        return Err(IoError::DimensionMismatch(format!(
            "left has {} channels, right has {}",
            left.channels, right.channels
        )));
    }
    let labels = max_disparity + 1;
    let mut unary = Vec::with_capacity(left.pixels() * labels);
    let mut row = vec![None; labels];
    for y in 0..left.height {
        for x in 0..left.width {
            let l = left.pixel(x, y);
            for (d, slot) in row.iter_mut().enumerate() {
                *slot = x.checked_sub(d).map(|xr| {
                    let r = right.pixel(xr, y);
                    l.iter()
                        .zip(r)
                        .map(|(&a, &b)| (a as i64 - b as i64).unsigned_abs())
                        .sum::<u64>()
                });
            }
            let worst = row.iter().flatten().copied().max().unwrap_or(0);
            unary.extend(row.iter().map(|c| c.unwrap_or(worst)));
        }
    }
    Ok(Model::new(
        left.pixels(),
        labels,
        unary,
        cliques_from(segmentation, weight),
        dist,
    )?)
}

/// How labels become gray levels when a labeling is saved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelToGray {
    /// `(label - 1) * stride`
    Stride(u16),
    /// Spread `1..=labels` evenly over `0..=255`.
    Stretch { labels: usize },
}

impl LabelToGray {
    pub fn gray(&self, label: Label) -> u16 {
        match *self {
            LabelToGray::Stride(s) => label_value(label, s).min(u16::MAX as u32) as u16,
            LabelToGray::Stretch { labels } => {
                if labels <= 1 {
                    0
                } else {
                    ((label as usize - 1) * 255 / (labels - 1)) as u16
                }
            }
        }
    }
}

pub fn labeling_image(
    labeling: &Labeling,
    width: usize,
    height: usize,
    map: LabelToGray,
) -> Result<Image, IoError> {
    if labeling.len() != width * height {
        return Err(IoError::DimensionMismatch(format!(
            "{} labels for a {width}x{height} image",
            labeling.len()
        )));
    }
    let data: Vec<u16> = labeling.labels().iter().map(|&l| map.gray(l)).collect();
    let maxval = if data.iter().all(|&v| v <= 255) {
        255
    } else {
        u16::MAX
    };
    Ok(Image::gray(width, height, maxval, data))
}

pub fn save_labeling(
    path: impl AsRef<Path>,
    labeling: &Labeling,
    width: usize,
    height: usize,
    map: LabelToGray,
) -> Result<(), IoError> {
    write_image(path, &labeling_image(labeling, width, height, map)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn denoise_unaries() {
        let img = Image::gray(2, 1, 10, vec![0, 10]);
        let seg = Image::gray(2, 1, 255, vec![1, 1]);
        let model =
            build_denoise_model(&img, &seg, None, 1, DistanceSpec::linear(2, 1), 1).unwrap();
        assert_eq!(model.num_labels(), 11);
        assert_eq!(model.unary(0, 1), 0);
        // pixel 10, label value 7
        assert_eq!(model.unary(1, 8), 9);
        assert_eq!(model.cliques().len(), 1);
    }

    #[test]
    fn denoise_stride_and_mask() {
        let img = Image::gray(2, 1, 255, vec![30, 200]);
        let seg = Image::gray(2, 1, 255, vec![1, 2]);
        let mask = Image::gray(2, 1, 255, vec![255, 0]);
        let model = build_denoise_model(&img, &seg, Some(&mask), 1, DistanceSpec::linear(2, 1), 16)
            .unwrap();
        assert_eq!(model.num_labels(), 16);
        assert_eq!(model.unary(0, 3), 4);
        assert!(model.unary_row(1).iter().all(|&v| v == 0));
        // singleton segments are dropped
        assert!(model.cliques().is_empty());
    }

    #[test]
    fn stereo_l1() {
        let left = Image::rgb(2, 1, 255, vec![10, 20, 30, 40, 50, 60]);
        let right = Image::rgb(2, 1, 255, vec![12, 18, 35, 0, 0, 0]);
        let seg = Image::gray(2, 1, 255, vec![0, 0]);
        let model =
            build_stereo_model(&left, &right, &seg, 1, DistanceSpec::linear(1, 1), 1).unwrap();
        // pixel 1 at disparity 1 matches right pixel 0: |40-12|+|50-18|+|60-35|
        assert_eq!(model.unary(1, 2), 28 + 32 + 25);
        // pixel 0 at disparity 1 leaves the frame: worst in-frame cost
        assert_eq!(model.unary(0, 2), model.unary(0, 1));
        assert_eq!(model.unary(0, 1), 2 + 2 + 5);
    }

    #[test]
    fn identical_pair_is_free_at_zero() {
        let img = Image::gray(3, 1, 255, vec![5, 90, 200]);
        let seg = Image::gray(3, 1, 255, vec![0, 0, 0]);
        let model = build_stereo_model(&img, &img, &seg, 1, DistanceSpec::linear(1, 1), 2).unwrap();
        for p in 0..3 {
            assert_eq!(model.unary(p, 1), 0);
        }
    }

    #[test]
    fn shape_mismatch() {
        let a = Image::gray(2, 1, 255, vec![0, 0]);
        let b = Image::gray(1, 2, 255, vec![0, 0]);
        assert!(matches!(
            build_denoise_model(&a, &b, None, 1, DistanceSpec::linear(1, 1), 1),
            Err(IoError::DimensionMismatch(_))
        ));
        assert!(matches!(
            build_stereo_model(&a, &b, &a, 1, DistanceSpec::linear(1, 1), 1),
            Err(IoError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn gray_maps_are_monotone() {
        let stretch = LabelToGray::Stretch { labels: 16 };
        let stride = LabelToGray::Stride(17);
        for l in 1..16 {
            assert!(stretch.gray(l) < stretch.gray(l + 1));
            assert!(stride.gray(l) < stride.gray(l + 1));
        }
        assert_eq!(stretch.gray(16), 255);
    }
}
