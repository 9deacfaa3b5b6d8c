//! Multi-focus image fusion carried out directly on baseline JPEG
//! coefficients.
//!
//! Sources are entropy-decoded and de-quantized, never inverse transformed.
//! Each 8×8 block is scored by its spatial frequency, computed exactly in the
//! DCT domain. The sharper source wins the block, and a 3×3 majority sum over
//! the decision map cleans up isolated mistakes. The fused coefficients are
//! re-quantized and entropy coded into a new stream.
//!
//! ```
//! use dctfuse::{fuse, FusionConfig, Raster, encode_raster, parse_jpeg};
//!
//! let sharp = Raster::from_fn(16, 16, |r, c| ((r * 17 + c * 5) % 256) as f64).unwrap();
//! let a = parse_jpeg(&encode_raster(&sharp, 90).unwrap()).unwrap();
//! let fused = fuse(&a, &a, &FusionConfig::default()).unwrap();
//! assert_eq!(fused, a.dequantized());
//! ```

pub mod bench;
pub mod blockdct;
pub mod dataset;
pub mod fusion;
pub mod grid;
pub mod jpeg_codec;
pub mod metrics;

pub use blockdct::{CoeffBlock, CoeffForm, FocusStats, PixelBlock, QuantTable};
pub use dataset::{blur_region, make_pair, BlurKernel, BlurSpec, Region};
pub use fusion::{
    build_decision_map, compose_fused, consistency_verify, fuse, fuse_all, DecisionMap,
    FusionConfig, FusionError, FusionMethod, RefinedMap,
};
pub use grid::{BlockGrid, BlockImage, Padding, PixelGrid, Raster};
pub use jpeg_codec::{emit_jpeg, emit_pgm, encode_raster, parse_jpeg, parse_pgm, CodecError};
pub use metrics::{rmse, ssim, MetricReport, SsimMode};
