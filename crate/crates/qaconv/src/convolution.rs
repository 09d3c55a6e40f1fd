//! Classical convolution reference and window plumbing.
//!
//! The reference operation is correlation-style: the kernel is slid over
//! the (zero-padded) image without flipping, and each output entry is the
//! Frobenius inner product of the kernel with the window under it. Every
//! quantum feature map in this crate is validated against these functions.

use crate::encoding::{KernelMatrix, WindowMatrix};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::qacl::FeatureMap;

/// Single-channel image with real pixel values.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    grid: Grid,
}

impl ImageGrid {
    pub fn new(grid: Grid) -> Self {
        ImageGrid { grid }
    }

    pub fn rows(&self) -> usize {
        self.grid.rows()
    }

    pub fn cols(&self) -> usize {
        self.grid.cols()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.grid.at(r, c)
    }

    /// Pixel at padded coordinates: positions inside the zero border read 0.
    fn at_padded(&self, padding: usize, pr: usize, pc: usize) -> f64 {
        if pr < padding || pc < padding {
            return 0.0;
        }
        let (r, c) = (pr - padding, pc - padding);
        if r >= self.rows() || c >= self.cols() {
            0.0
        } else {
            self.grid.at(r, c)
        }
    }
}

/// Output dimensions of a sliding-window pass:
/// floor((rows + 2*padding - l) / stride) + 1 per axis.
pub fn output_shape(
    rows: usize,
    cols: usize,
    l: usize,
    m: usize,
    stride: usize,
    padding: usize,
) -> Result<(usize, usize)> {
    if stride == 0 {
        return Err(Error::Input("stride must be at least 1".into()));
    }
    let padded_rows = rows + 2 * padding;
    let padded_cols = cols + 2 * padding;
    if l > padded_rows || m > padded_cols {
        return Err(Error::Shape(format!(
            "{l}x{m} kernel does not fit the {padded_rows}x{padded_cols} padded image"
        )));
    }
    Ok(((padded_rows - l) / stride + 1, (padded_cols - m) / stride + 1))
}

/// All kernel-sized windows in row-major output order; anchors are
/// top-left positions in padded coordinates, so anchor = output index times
/// stride.
pub fn extract_windows(
    image: &ImageGrid,
    l: usize,
    m: usize,
    stride: usize,
    padding: usize,
) -> Result<Vec<WindowMatrix>> {
    let (out_rows, out_cols) = output_shape(image.rows(), image.cols(), l, m, stride, padding)?;
    let mut windows = Vec::with_capacity(out_rows * out_cols);
    for wr in 0..out_rows {
        for wc in 0..out_cols {
            let anchor = (wr * stride, wc * stride);
            let mut data = Vec::with_capacity(l * m);
            for i in 0..l {
                for j in 0..m {
                    data.push(image.at_padded(padding, anchor.0 + i, anchor.1 + j));
                }
            }
            windows.push(WindowMatrix::new(anchor, Grid::new(l, m, data)?));
        }
    }
    Ok(windows)
}

/// Elementwise product sum of two equal-shape grids.
pub fn frobenius(a: &Grid, b: &Grid) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Shape(format!(
            "cannot take the inner product of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum())
}

/// Convolution output plus the geometry that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvResult {
    pub grid: Grid,
    pub stride: usize,
    pub padding: usize,
}

/// Classical correlation-style convolution, computed with direct index
/// arithmetic so it stays independent of the window/encoding pipeline it
/// validates.
pub fn classical_conv(
    image: &ImageGrid,
    kernel: &KernelMatrix,
    stride: usize,
    padding: usize,
) -> Result<ConvResult> {
    let (l, m) = (kernel.rows(), kernel.cols());
    let (out_rows, out_cols) = output_shape(image.rows(), image.cols(), l, m, stride, padding)?;
    let mut grid = Grid::zeros(out_rows, out_cols)?;
    for wr in 0..out_rows {
        for wc in 0..out_cols {
            let mut acc = 0.0;
            for i in 0..l {
                for j in 0..m {
                    acc += kernel.weights().at(i, j)
                        * image.at_padded(padding, wr * stride + i, wc * stride + j);
                }
            }
            grid.set(wr, wc, acc);
        }
    }
    Ok(ConvResult {
        grid,
        stride,
        padding,
    })
}

/// Classical value of what the normalized quantum overlap should produce:
/// Frobenius product divided by both Euclidean norms, 0 for all-zero
/// windows.
pub fn normalized_reference(
    image: &ImageGrid,
    kernel: &KernelMatrix,
    stride: usize,
    padding: usize,
) -> Result<ConvResult> {
    let kernel_norm = norm_of(kernel.weights());
    if kernel_norm == 0.0 {
        return Err(Error::DegeneratePatch(
            "all-zero kernel has no normalized overlap".into(),
        ));
    }
    let windows = extract_windows(image, kernel.rows(), kernel.cols(), stride, padding)?;
    let (out_rows, out_cols) =
        output_shape(image.rows(), image.cols(), kernel.rows(), kernel.cols(), stride, padding)?;
    let mut grid = Grid::zeros(out_rows, out_cols)?;
    for (idx, window) in windows.iter().enumerate() {
        let wnorm = norm_of(window.entries());
        if wnorm == 0.0 {
            continue;
        }
        let value = frobenius(window.entries(), kernel.weights())? / (wnorm * kernel_norm);
        grid.set(idx / out_cols, idx % out_cols, value);
    }
    Ok(ConvResult {
        grid,
        stride,
        padding,
    })
}

fn norm_of(g: &Grid) -> f64 {
    g.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Multiplies each overlap by its window norm and the kernel norm, mapping
/// a normalized feature map back to classical convolution units.
pub fn rescale_map(map: &FeatureMap) -> ConvResult {
    let mut grid = map.grid.clone();
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            grid.set(r, c, map.grid.at(r, c) * map.window_norms.at(r, c) * map.kernel_norm);
        }
    }
    ConvResult {
        grid,
        stride: map.stride,
        padding: map.padding,
    }
}

/// The five fixed 3x3 kernels available by name.
pub fn builtin_kernel(name: &str) -> Result<KernelMatrix> {
    let rows: &[[f64; 3]; 3] = match name.replace('-', "_").as_str() {
        "edge_detection" => &[[-1.0, -1.0, -1.0], [-1.0, 8.0, -1.0], [-1.0, -1.0, -1.0]],
        "gaussian_blur" => &[
            [1.0 / 16.0, 2.0 / 16.0, 1.0 / 16.0],
            [2.0 / 16.0, 4.0 / 16.0, 2.0 / 16.0],
            [1.0 / 16.0, 2.0 / 16.0, 1.0 / 16.0],
        ],
        "sharpen" => &[[0.0, -1.0, 0.0], [-1.0, 5.0, -1.0], [0.0, -1.0, 0.0]],
        "emboss" => &[[-2.0, -1.0, 0.0], [-1.0, 1.0, 1.0], [0.0, 1.0, 2.0]],
        "box_blur" => &[
            [1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0],
            [1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0],
            [1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0],
        ],
        _ => return Err(Error::UnknownKernel(name.into())),
    };
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(KernelMatrix::new(Grid::new(3, 3, data)?))
}

pub fn builtin_kernel_names() -> [&'static str; 5] {
    ["edge_detection", "gaussian_blur", "sharpen", "emboss", "box_blur"]
}
