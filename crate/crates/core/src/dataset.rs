//! Synthetic multi-focus pairs: blur complementary regions of a sharp image.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::grid::Raster;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("region {region} lies outside the {width}×{height} image")]
    RegionOutOfBounds {
        region: String,
        width: usize,
        height: usize,
    },
    #[error("invalid blur kernel: {0}")]
    InvalidKernel(String),
    #[error("unknown region {0:?} (expected left, right, top or bottom)")]
    UnknownRegion(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlurKernel {
    Gaussian {
        sigma: f64,
        radius: usize,
    },
    /// Uniform average over the pixels within `radius` (Euclidean).
    Disk {
        radius: usize,
    },
}

impl BlurKernel {
    /// Gaussian with the conventional `ceil(3σ)` support.
    pub fn gaussian(sigma: f64) -> Self {
        BlurKernel::Gaussian {
            sigma,
            radius: (3.0 * sigma).ceil() as usize,
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        match *self {
            BlurKernel::Gaussian { sigma, radius } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(DatasetError::InvalidKernel(format!("sigma {sigma}")));
                }
                if (radius as f64) < (3.0 * sigma).ceil() {
                    return Err(DatasetError::InvalidKernel(format!(
                        "radius {radius} below ceil(3σ) for σ = {sigma}"
                    )));
                }
                Ok(())
            }
            BlurKernel::Disk { .. } => Ok(()),
        }
    }
}

/// Normalized 1-D Gaussian taps over `-radius..=radius`.
pub fn gaussian_taps(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let raw: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    LeftHalf,
    RightHalf,
    TopHalf,
    BottomHalf,
    Rect {
        left: usize,
        top: usize,
        width: usize,
        height: usize,
    },
}

/// Pixel rectangle `[left, right) × [top, bottom)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub left: usize,
    pub top: usize,
    pub right: usize,
    pub bottom: usize,
}

impl Bounds {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.top..self.bottom).contains(&row) && (self.left..self.right).contains(&col)
    }
}

impl Region {
    /// Resolves to pixel bounds; halves split at `floor(n / 2)`.
    pub fn bounds(&self, width: usize, height: usize) -> Result<Bounds, DatasetError> {
        let b = match *self {
            Region::LeftHalf => Bounds {
                left: 0,
                top: 0,
                right: width / 2,
                bottom: height,
            },
            Region::RightHalf => Bounds {
                left: width / 2,
                top: 0,
                right: width,
                bottom: height,
            },
            Region::TopHalf => Bounds {
                left: 0,
                top: 0,
                right: width,
                bottom: height / 2,
            },
            Region::BottomHalf => Bounds {
                left: 0,
                top: height / 2,
                right: width,
                bottom: height,
            },
            Region::Rect {
                left,
                top,
                width: w,
                height: h,
            } => {
                let b = Bounds {
                    left,
                    top,
                    right: left + w,
                    bottom: top + h,
                };
                if b.right > width || b.bottom > height {
                    return Err(DatasetError::RegionOutOfBounds {
                        region: self.to_string(),
                        width,
                        height,
                    });
                }
                b
            }
        };
        Ok(b)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::LeftHalf => f.write_str("left"),
            Region::RightHalf => f.write_str("right"),
            Region::TopHalf => f.write_str("top"),
            Region::BottomHalf => f.write_str("bottom"),
            Region::Rect {
                left,
                top,
                width,
                height,
            } => {
                write!(f, "{width}x{height}+{left}+{top}")
            }
        }
    }
}

impl FromStr for Region {
    type Err = DatasetError;

    /// `left`, `right`, `top`, `bottom` or `WxH+X+Y`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => return Ok(Region::LeftHalf),
            "right" => return Ok(Region::RightHalf),
            "top" => return Ok(Region::TopHalf),
            "bottom" => return Ok(Region::BottomHalf),
            _ => {}
        }
        let bad = || DatasetError::UnknownRegion(s.to_string());
        let (size, offset) = s.split_once('+').ok_or_else(bad)?;
        let (w, h) = size.split_once('x').ok_or_else(bad)?;
        let (x, y) = offset.split_once('+').ok_or_else(bad)?;
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        Ok(Region::Rect {
            left: num(x)?,
            top: num(y)?,
            width: num(w)?,
            height: num(h)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlurSpec {
    pub kernel: BlurKernel,
    pub region: Region,
}

impl Default for BlurSpec {
    fn default() -> Self {
        Self {
            kernel: BlurKernel::Gaussian {
                sigma: 2.0,
                radius: 6,
            },
            region: Region::RightHalf,
        }
    }
}

// Edge-replicated sample.
fn at(img: &Raster, row: isize, col: isize) -> f64 {
    let r = row.clamp(0, img.height() as isize - 1) as usize;
    let c = col.clamp(0, img.width() as isize - 1) as usize;
    img.get(r, c)
}

fn blur_within(image: &Raster, kernel: &BlurKernel, b: Bounds) -> Raster {
    let mut out = image.clone();
    if b.left >= b.right || b.top >= b.bottom {
        return out;
    }
    match *kernel {
        BlurKernel::Gaussian { sigma, radius } => {
            let taps = gaussian_taps(sigma, radius);
            let r = radius as isize;
            // Horizontal pass over the rows the vertical pass will read.
            let row_lo = b.top as isize - r;
            let row_hi = b.bottom as isize + r;
            let span = b.right - b.left;
            let mut horiz = vec![0.0; (row_hi - row_lo) as usize * span];
            for (i, row) in (row_lo..row_hi).enumerate() {
                for (j, col) in (b.left..b.right).enumerate() {
                    let mut acc = 0.0;
                    for (k, t) in taps.iter().enumerate() {
                        acc += t * at(image, row, col as isize + k as isize - r);
                    }
                    horiz[i * span + j] = acc;
                }
            }
            for row in b.top..b.bottom {
                let base = (row as isize - row_lo) as usize;
                for (j, col) in (b.left..b.right).enumerate() {
                    let mut acc = 0.0;
                    for (k, t) in taps.iter().enumerate() {
                        acc += t * horiz[(base + k - radius) * span + j];
                    }
                    out.set(row, col, acc);
                }
            }
        }
        BlurKernel::Disk { radius } => {
            if radius == 0 {
                return out;
            }
            let r = radius as isize;
            let offsets: Vec<(isize, isize)> = (-r..=r)
                .flat_map(|dy| (-r..=r).map(move |dx| (dy, dx)))
                .filter(|(dy, dx)| dy * dy + dx * dx <= r * r)
                .collect();
            let weight = 1.0 / offsets.len() as f64;
            for row in b.top..b.bottom {
                for col in b.left..b.right {
                    let acc: f64 = offsets
                        .iter()
                        .map(|&(dy, dx)| at(image, row as isize + dy, col as isize + dx))
                        .sum();
                    out.set(row, col, acc * weight);
                }
            }
        }
    }
    out
}

/// Convolves the pixels inside `spec.region`, reading neighbours from the
/// whole (unblurred) image with edge replication. Pixels outside the region
/// are copied unchanged.
pub fn blur_region(image: &Raster, spec: &BlurSpec) -> Result<Raster, DatasetError> {
    spec.kernel.validate()?;
    let b = spec.region.bounds(image.width(), image.height())?;
    Ok(blur_within(image, &spec.kernel, b))
}

/// Blurs every pixel outside `spec.region`.
fn blur_complement(image: &Raster, spec: &BlurSpec) -> Result<Raster, DatasetError> {
    spec.kernel.validate()?;
    let keep = spec.region.bounds(image.width(), image.height())?;
    let full = Bounds {
        left: 0,
        top: 0,
        right: image.width(),
        bottom: image.height(),
    };
    let blurred = blur_within(image, &spec.kernel, full);
    let mut out = blurred;
    for row in keep.top..keep.bottom {
        for col in keep.left..keep.right {
            out.set(row, col, image.get(row, col));
        }
    }
    Ok(out)
}

/// Source pair for one ground truth: `A` is sharp inside `spec.region` and
/// blurred elsewhere, `B` is the reverse.
pub fn make_pair(ground_truth: &Raster, spec: &BlurSpec) -> Result<(Raster, Raster), DatasetError> {
    let a = blur_complement(ground_truth, spec)?;
    let b = blur_region(ground_truth, spec)?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize) -> Raster {
        Raster::from_fn(w, h, |r, c| ((r * 53 + c * 29 + r * c) % 256) as f64).unwrap()
    }

    #[test]
    fn constant_image_unchanged() {
        let img = Raster::filled(20, 12, 77.0).unwrap();
        for kernel in [BlurKernel::gaussian(1.5), BlurKernel::Disk { radius: 3 }] {
            let spec = BlurSpec {
                kernel,
                region: Region::LeftHalf,
            };
            let out = blur_region(&img, &spec).unwrap();
            for v in out.data() {
                assert!((v - 77.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_radius_disk_is_identity() {
        let img = textured(17, 9);
        let spec = BlurSpec {
            kernel: BlurKernel::Disk { radius: 0 },
            region: Region::RightHalf,
        };
        assert_eq!(blur_region(&img, &spec).unwrap(), img);
    }

    #[test]
    fn taps_sum_to_one() {
        for (sigma, radius) in [(0.5, 2), (2.0, 6), (3.3, 10), (2.0, 20)] {
            let s: f64 = gaussian_taps(sigma, radius).iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn outside_region_untouched() {
        let img = textured(30, 20);
        let spec = BlurSpec::default();
        let out = blur_region(&img, &spec).unwrap();
        for r in 0..20 {
            for c in 0..15 {
                assert_eq!(out.get(r, c).to_bits(), img.get(r, c).to_bits());
            }
        }
        assert_ne!(out, img);
    }

    #[test]
    fn pair_is_complementary() {
        let img = textured(32, 24);
        let (a, b) = make_pair(&img, &BlurSpec::default()).unwrap();
        for r in 0..24 {
            for c in 0..32 {
                if c >= 16 {
                    assert_eq!(a.get(r, c), img.get(r, c));
                } else {
                    assert_eq!(b.get(r, c), img.get(r, c));
                }
            }
        }
        assert_eq!(make_pair(&img, &BlurSpec::default()).unwrap(), (a, b));
    }

    #[test]
    fn bad_region_and_kernel() {
        let img = textured(10, 10);
        let spec = BlurSpec {
            kernel: BlurKernel::gaussian(1.0),
            region: Region::Rect {
                left: 5,
                top: 0,
                width: 6,
                height: 2,
            },
        };
        assert!(matches!(
            blur_region(&img, &spec),
            Err(DatasetError::RegionOutOfBounds { .. })
        ));
        let spec = BlurSpec {
            kernel: BlurKernel::Gaussian {
                sigma: 2.0,
                radius: 5,
            },
            region: Region::LeftHalf,
        };
        assert!(matches!(
            blur_region(&img, &spec),
            Err(DatasetError::InvalidKernel(_))
        ));
    }

    #[test]
    fn region_parsing() {
        assert_eq!("right".parse::<Region>().unwrap(), Region::RightHalf);
        let r: Region = "4x3+1+2".parse().unwrap();
        assert_eq!(
            r,
            Region::Rect {
                left: 1,
                top: 2,
                width: 4,
                height: 3
            }
        );
        assert_eq!(r.to_string(), "4x3+1+2");
        assert!("middle".parse::<Region>().is_err());
    }
}
