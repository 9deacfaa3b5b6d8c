//! Pixel rasters and 8×8 block grids.

use thiserror::Error;

use crate::blockdct::{
    self, BlockError, CoeffBlock, CoeffForm, PixelBlock, QuantTable, BLOCK_LEN, BLOCK_SIDE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("image dimensions must be positive, got {width}×{height}")]
    EmptyImage { width: usize, height: usize },
    #[error("expected {expected} samples for {width}×{height}, got {found}")]
    SampleCount {
        width: usize,
        height: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} blocks, got {found}")]
    BlockCount { expected: usize, found: usize },
    #[error("blocks mix quantized and dequantized forms")]
    MixedForms,
    #[error(transparent)]
    Block(#[from] BlockError),
}

/// Row-major grid of real-valued 8-bit intensities at the true image size.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyImage { width, height });
        }
        if data.len() != width * height {
            return Err(GridError::SampleCount {
                width,
                height,
                expected: width * height,
                found: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self, GridError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self, GridError> {
        Self::new(width, height, bytes.iter().map(|&b| f64::from(b)).collect())
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, GridError> {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    /// Rounds half away from zero and clamps to `0..=255`.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| to_byte(v)).collect()
    }

    /// Same image snapped to 8-bit integer levels.
    pub fn quantized_to_u8(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f64::from(to_byte(v))).collect(),
        }
    }

    /// Splits into 8×8 blocks, replicating the last column/row into padding.
    pub fn to_pixel_grid(&self) -> PixelGrid {
        let cols = self.width.div_ceil(BLOCK_SIDE);
        let rows = self.height.div_ceil(BLOCK_SIDE);
        let mut blocks = Vec::with_capacity(cols * rows);
        for br in 0..rows {
            for bc in 0..cols {
                blocks.push(PixelBlock::from_fn(|x, y| {
                    let r = (br * BLOCK_SIDE + x).min(self.height - 1);
                    let c = (bc * BLOCK_SIDE + y).min(self.width - 1);
                    self.get(r, c)
                }));
            }
        }
        BlockGrid {
            width: self.width,
            height: self.height,
            cols,
            rows,
            blocks,
        }
    }
}

pub(crate) fn to_byte(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Columns added on the right and rows added at the bottom to reach a
/// multiple of eight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Padding {
    pub right: usize,
    pub bottom: usize,
}

/// Rectangular grid of blocks covering a `width × height` image.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid<B> {
    width: usize,
    height: usize,
    cols: usize,
    rows: usize,
    blocks: Vec<B>,
}

pub type PixelGrid = BlockGrid<PixelBlock>;

impl<B> BlockGrid<B> {
    pub fn new(width: usize, height: usize, blocks: Vec<B>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyImage { width, height });
        }
        let cols = width.div_ceil(BLOCK_SIDE);
        let rows = height.div_ceil(BLOCK_SIDE);
        if blocks.len() != cols * rows {
            return Err(GridError::BlockCount {
                expected: cols * rows,
                found: blocks.len(),
            });
        }
        Ok(Self {
            width,
            height,
            cols,
            rows,
            blocks,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of block columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of block rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn padding(&self) -> Padding {
        Padding {
            right: self.cols * BLOCK_SIDE - self.width,
            bottom: self.rows * BLOCK_SIDE - self.height,
        }
    }

    pub fn blocks(&self) -> &[B] {
        &self.blocks
    }

    pub fn block(&self, row: usize, col: usize) -> &B {
        &self.blocks[row * self.cols + col]
    }

    pub fn same_shape<C>(&self, other: &BlockGrid<C>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn map<C>(&self, f: impl FnMut(&B) -> C) -> BlockGrid<C> {
        BlockGrid {
            width: self.width,
            height: self.height,
            cols: self.cols,
            rows: self.rows,
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub fn try_map<C, E>(&self, f: impl FnMut(&B) -> Result<C, E>) -> Result<BlockGrid<C>, E> {
        Ok(BlockGrid {
            width: self.width,
            height: self.height,
            cols: self.cols,
            rows: self.rows,
            blocks: self.blocks.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    pub(crate) fn with_blocks<C>(&self, blocks: Vec<C>) -> BlockGrid<C> {
        debug_assert_eq!(blocks.len(), self.blocks.len());
        BlockGrid {
            width: self.width,
            height: self.height,
            cols: self.cols,
            rows: self.rows,
            blocks,
        }
    }
}

impl PixelGrid {
    /// Crops the padding away.
    pub fn to_raster(&self) -> Raster {
        let mut data = vec![0.0; self.width * self.height];
        for (i, block) in self.blocks.iter().enumerate() {
            let (br, bc) = (i / self.cols, i % self.cols);
            for x in 0..BLOCK_SIDE {
                let r = br * BLOCK_SIDE + x;
                if r >= self.height {
                    break;
                }
                for y in 0..BLOCK_SIDE {
                    let c = bc * BLOCK_SIDE + y;
                    if c >= self.width {
                        break;
                    }
                    data[r * self.width + c] = block.get(x, y);
                }
            }
        }
        Raster {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// A decoded JPEG in the coefficient domain: a grid of DCT blocks plus the
/// quantization table they were (or will be) quantized with.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockImage {
    grid: BlockGrid<CoeffBlock>,
    quant: QuantTable,
    form: CoeffForm,
}

impl BlockImage {
    pub fn new(grid: BlockGrid<CoeffBlock>, quant: QuantTable) -> Result<Self, GridError> {
        let form = grid
            .blocks
            .first()
            .map(|b| b.form())
            .unwrap_or(CoeffForm::Quantized);
        if grid.blocks.iter().any(|b| b.form() != form) {
            return Err(GridError::MixedForms);
        }
        Ok(Self { grid, quant, form })
    }

    /// Level-shifts, transforms and quantizes an 8-bit raster.
    pub fn from_raster(raster: &Raster, quant: &QuantTable) -> Self {
        let grid = raster.to_pixel_grid().map(|p| {
            let shifted = PixelBlock::from_fn(|x, y| p.get(x, y) - 128.0);
            let coeffs = blockdct::forward_dct(&shifted);
            blockdct::quantize(&coeffs, quant).expect("forward_dct yields dequantized blocks")
        });
        Self {
            grid,
            quant: *quant,
            form: CoeffForm::Quantized,
        }
    }

    pub fn grid(&self) -> &BlockGrid<CoeffBlock> {
        &self.grid
    }

    pub fn quant(&self) -> &QuantTable {
        &self.quant
    }

    pub fn form(&self) -> CoeffForm {
        self.form
    }

    pub fn width(&self) -> usize {
        self.grid.width
    }

    pub fn height(&self) -> usize {
        self.grid.height
    }

    pub fn blocks(&self) -> &[CoeffBlock] {
        &self.grid.blocks
    }

    pub fn block(&self, row: usize, col: usize) -> &CoeffBlock {
        self.grid.block(row, col)
    }

    pub fn same_shape(&self, other: &BlockImage) -> bool {
        self.grid.same_shape(&other.grid)
    }

    /// Multiplies every block by the table; already-real images are cloned.
    pub fn dequantized(&self) -> BlockImage {
        match self.form {
            CoeffForm::Dequantized => self.clone(),
            CoeffForm::Quantized => {
                let grid = self
                    .grid
                    .map(|b| blockdct::dequantize(b, &self.quant).expect("form checked above"));
                BlockImage {
                    grid,
                    quant: self.quant,
                    form: CoeffForm::Dequantized,
                }
            }
        }
    }

    /// Quantizes real coefficients with `quant`, which becomes the image's table.
    pub fn quantized_with(&self, quant: &QuantTable) -> Result<BlockImage, GridError> {
        let grid = self.grid.try_map(|b| blockdct::quantize(b, quant))?;
        Ok(BlockImage {
            grid,
            quant: *quant,
            form: CoeffForm::Quantized,
        })
    }

    /// Inverse transform back to pixels (level shift undone, padding kept).
    pub fn to_pixel_grid(&self) -> PixelGrid {
        let deq = self.dequantized();
        deq.grid.map(|b| {
            let p = blockdct::inverse_dct(b).expect("dequantized above");
            PixelBlock::from_fn(|x, y| p.get(x, y) + 128.0)
        })
    }

    /// Real-valued pixels cropped to the image size.
    pub fn to_raster(&self) -> Raster {
        self.to_pixel_grid().to_raster()
    }

    pub(crate) fn from_parts(
        grid: BlockGrid<CoeffBlock>,
        quant: QuantTable,
        form: CoeffForm,
    ) -> Self {
        Self { grid, quant, form }
    }
}

/// Integer levels of every block, for bit-exact comparisons.
pub fn block_levels(image: &BlockImage) -> Result<Vec<[i32; BLOCK_LEN]>, BlockError> {
    image.blocks().iter().map(|b| b.levels()).collect()
}
