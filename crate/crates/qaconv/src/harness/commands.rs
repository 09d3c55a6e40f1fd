//! Bodies of the CLI commands.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convolution::{
    builtin_kernel, builtin_kernel_names, classical_conv, extract_windows, frobenius,
    output_shape, rescale_map, ImageGrid,
};
use crate::encoding::{encode, KernelMatrix};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::harness::images::{builtin_image, toy_dataset};
use crate::harness::io::{load_image, load_kernel_file, save_map, with_suffix, write_csv};
use crate::overlap::{estimate_overlap, hadamard_overlap, EstimateMode, OverlapMethod};
use crate::qacl::{
    decode_error_bound, derive_window_seed, qacl_layer, FeatureMap, MapMethod,
};

/// Prints progress without panicking when stdout is a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Image argument: `builtin:NAME` picks a bundled image, anything else is a
/// file path.
#[derive(Debug, Clone)]
pub enum ImageSource {
    Builtin(String),
    File(PathBuf),
}

impl ImageSource {
    pub fn parse(raw: &str) -> ImageSource {
        match raw.strip_prefix("builtin:") {
            Some(name) => ImageSource::Builtin(name.to_string()),
            None => ImageSource::File(PathBuf::from(raw)),
        }
    }

    pub fn resolve(&self) -> Result<ImageGrid> {
        match self {
            ImageSource::Builtin(name) => builtin_image(name),
            ImageSource::File(path) => load_image(path),
        }
    }
}

/// Kernel argument: one of the built-in names, otherwise a file path.
#[derive(Debug, Clone)]
pub enum KernelSource {
    Builtin(String),
    File(PathBuf),
}

impl KernelSource {
    pub fn parse(raw: &str) -> KernelSource {
        let normalized = raw.replace('-', "_");
        if builtin_kernel_names().contains(&normalized.as_str()) {
            KernelSource::Builtin(normalized)
        } else {
            KernelSource::File(PathBuf::from(raw))
        }
    }

    pub fn resolve(&self) -> Result<KernelMatrix> {
        match self {
            KernelSource::Builtin(name) => builtin_kernel(name),
            KernelSource::File(path) => {
                if !path.exists() {
                    // Neither a builtin name nor a file that exists.
                    return Err(Error::UnknownKernel(path.display().to_string()));
                }
                load_kernel_file(path)
            }
        }
    }
}

/// One entry of a `--method` list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmdMethod {
    Classical,
    Overlap(OverlapMethod),
    Qpe,
}

impl CmdMethod {
    pub fn label(&self) -> &'static str {
        match self {
            CmdMethod::Classical => "classical",
            CmdMethod::Overlap(m) => m.label(),
            CmdMethod::Qpe => "qpe",
        }
    }
}

/// Parses a comma-separated method list; `all` expands to every method.
pub fn parse_methods(raw: &str) -> Result<Vec<CmdMethod>> {
    let mut out = Vec::new();
    let mut push = |m: CmdMethod| {
        if !out.contains(&m) {
            out.push(m);
        }
    };
    for token in raw.split(',') {
        match token.trim() {
            "classical" => push(CmdMethod::Classical),
            "hadamard" => push(CmdMethod::Overlap(OverlapMethod::Hadamard)),
            "swap" => push(CmdMethod::Overlap(OverlapMethod::Swap)),
            "adjoint" => push(CmdMethod::Overlap(OverlapMethod::Adjoint)),
            "qpe" => push(CmdMethod::Qpe),
            "all" => {
                push(CmdMethod::Classical);
                push(CmdMethod::Overlap(OverlapMethod::Hadamard));
                push(CmdMethod::Overlap(OverlapMethod::Swap));
                push(CmdMethod::Overlap(OverlapMethod::Adjoint));
                push(CmdMethod::Qpe);
            }
            other => {
                return Err(Error::Input(format!(
                    "unknown method `{other}`; expected classical|hadamard|swap|adjoint|qpe|all"
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Input("method list is empty".into()));
    }
    Ok(out)
}

/// `--shots` argument: `exact`, or one or more positive counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShotsSpec {
    Exact,
    Counts(Vec<u64>),
}

pub fn parse_shots(raw: &str) -> Result<ShotsSpec> {
    if raw.trim() == "exact" {
        return Ok(ShotsSpec::Exact);
    }
    let mut counts = Vec::new();
    for token in raw.split(',') {
        let token = token.trim();
        let n: u64 = token
            .parse()
            .map_err(|_| Error::Input(format!("shot count `{token}` is not a positive integer")))?;
        if n == 0 {
            return Err(Error::Input("shot counts must be at least 1".into()));
        }
        counts.push(n);
    }
    if counts.is_empty() {
        return Err(Error::Input("shot list is empty".into()));
    }
    Ok(ShotsSpec::Counts(counts))
}

impl ShotsSpec {
    /// Estimation mode for commands that take a single shot count.
    pub fn single_mode(&self, seed: u64) -> Result<EstimateMode> {
        match self {
            ShotsSpec::Exact => Ok(EstimateMode::Exact),
            ShotsSpec::Counts(counts) if counts.len() == 1 => Ok(EstimateMode::Shots {
                shots: counts[0],
                seed,
            }),
            ShotsSpec::Counts(counts) => Err(Error::Input(format!(
                "this command takes one shot count, got {}",
                counts.len()
            ))),
        }
    }
}

/// Shared settings of the map-producing commands.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: String,
    pub image: ImageSource,
    pub kernel: KernelSource,
    pub stride: usize,
    pub padding: usize,
    pub methods: Vec<CmdMethod>,
    pub shots: ShotsSpec,
    pub seed: u64,
    pub qpe_bits: usize,
    pub out: PathBuf,
}

/// Window/kernel pair with flattened entries [1,1,-5,3] and [5,3,1,1]; both
/// norms are 6 and the normalized overlap is exactly 1/6.
pub fn reference_pair() -> (Grid, Grid) {
    let window = Grid::from_rows(&[vec![1.0, 1.0], vec![-5.0, 3.0]]).unwrap();
    let kernel = Grid::from_rows(&[vec![5.0, 3.0], vec![1.0, 1.0]]).unwrap();
    (window, kernel)
}

/// Relative deviation of an estimate from the truth, in percent, measured
/// against the estimate itself: 100 * |est - truth| / |est|. Infinite when
/// the estimate is 0.
pub fn error_metric(estimate: f64, truth: f64) -> f64 {
    100.0 * (estimate - truth).abs() / estimate.abs()
}

#[derive(Debug, Clone)]
pub struct VerifyRow {
    /// `exact` or the shot count.
    pub label: String,
    pub p0: f64,
    pub overlap: f64,
    pub std_error: f64,
    pub err_percent: f64,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub csv: PathBuf,
}

/// Runs the reference pair through the interference circuit, exactly and at
/// the requested shot counts, and reports the estimate quality.
pub fn cmd_verify_qaco(shots: &ShotsSpec, seed: u64, out: &Path) -> Result<VerifyReport> {
    let (window, kernel) = reference_pair();
    let (pw, pk) = (encode(&window)?, encode(&kernel)?);
    let exact = hadamard_overlap(&pw, &pk, EstimateMode::Exact)?;
    let truth = exact.overlap;
    let mut rows = vec![VerifyRow {
        label: "exact".into(),
        p0: exact.p0,
        overlap: exact.overlap,
        std_error: 0.0,
        err_percent: 0.0,
    }];
    if let ShotsSpec::Counts(counts) = shots {
        for (i, &n) in counts.iter().enumerate() {
            let mode = EstimateMode::Shots {
                shots: n,
                seed: derive_window_seed(seed, i, 0),
            };
            let est = hadamard_overlap(&pw, &pk, mode)?;
            rows.push(VerifyRow {
                label: n.to_string(),
                p0: est.p0,
                overlap: est.overlap,
                std_error: est.std_error,
                err_percent: error_metric(est.overlap, truth),
            });
        }
    }
    let csv = with_suffix(out, ".csv");
    let mut text = String::from("shots,p0,overlap,std_error,err_percent\n");
    for row in &rows {
        text.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            row.label, row.p0, row.overlap, row.std_error, row.err_percent
        ));
    }
    std::fs::write(&csv, text).map_err(|e| Error::io(&csv, e))?;

    say!("reference pair: overlap 1/6, ancilla probability 7/12");
    say!("{:>8} {:>12} {:>12} {:>12} {:>8}", "shots", "p0", "overlap", "std_err", "err%");
    for row in &rows {
        say!(
            "{:>8} {:>12.6} {:>12.6} {:>12.6} {:>8.2}",
            row.label, row.p0, row.overlap, row.std_error, row.err_percent
        );
    }
    say!("wrote {}", csv.display());
    Ok(VerifyReport { rows, csv })
}

fn window_mode(mode: EstimateMode, row: usize, col: usize) -> EstimateMode {
    match mode {
        EstimateMode::Exact => EstimateMode::Exact,
        EstimateMode::Shots { shots, seed } => EstimateMode::Shots {
            shots,
            seed: derive_window_seed(seed, row, col),
        },
    }
}

/// Feature map from one of the direct overlap circuits, window by window.
/// All-zero windows enter as overlap 0 with window norm 0; in shot mode
/// each window draws from its own derived seed.
pub fn overlap_feature_map(
    image: &ImageGrid,
    kernel: &KernelMatrix,
    stride: usize,
    padding: usize,
    method: OverlapMethod,
    mode: EstimateMode,
) -> Result<FeatureMap> {
    let kernel_patch = kernel.encode()?;
    let windows = extract_windows(image, kernel.rows(), kernel.cols(), stride, padding)?;
    let (out_rows, out_cols) = output_shape(
        image.rows(),
        image.cols(),
        kernel.rows(),
        kernel.cols(),
        stride,
        padding,
    )?;
    let mut grid = Grid::zeros(out_rows, out_cols)?;
    let mut norms = Grid::zeros(out_rows, out_cols)?;
    for (idx, window) in windows.iter().enumerate() {
        let (r, c) = (idx / out_cols, idx % out_cols);
        match window.encode() {
            Err(Error::DegeneratePatch(_)) => {}
            Err(other) => return Err(other),
            Ok(patch) => {
                let est = estimate_overlap(method, &patch, &kernel_patch, window_mode(mode, r, c))?;
                grid.set(r, c, est.overlap);
                norms.set(r, c, patch.norm_factor());
            }
        }
    }
    Ok(FeatureMap {
        grid,
        stride,
        padding,
        method: MapMethod::Overlap(method),
        window_norms: norms,
        kernel_norm: kernel_patch.norm_factor(),
    })
}

#[derive(Debug, Clone)]
pub struct EmittedMap {
    pub method: String,
    pub csv: PathBuf,
    pub pgm: PathBuf,
    /// Overlap maps also emit a rescaled map in classical units.
    pub rescaled_csv: Option<PathBuf>,
}

fn emit_feature_map(map: &FeatureMap, prefix: &Path) -> Result<EmittedMap> {
    let label = map.method.label();
    let stem = with_suffix(prefix, &format!("_{label}"));
    let (csv, pgm) = save_map(&map.grid, &stem)?;
    let rescaled_path = with_suffix(prefix, &format!("_{label}_rescaled.csv"));
    write_csv(&rescale_map(map).grid, &rescaled_path)?;
    Ok(EmittedMap {
        method: label.to_string(),
        csv,
        pgm,
        rescaled_csv: Some(rescaled_path),
    })
}

/// Produces one feature map per requested method and writes each as CSV
/// plus a PGM rendering; quantum maps additionally get a rescaled CSV in
/// classical units.
pub fn cmd_conv_map(config: &ExperimentConfig) -> Result<Vec<EmittedMap>> {
    let image = config.image.resolve()?;
    let kernel = config.kernel.resolve()?;
    let mut emitted = Vec::new();
    for method in &config.methods {
        let item = match method {
            CmdMethod::Classical => {
                let conv = classical_conv(&image, &kernel, config.stride, config.padding)?;
                let stem = with_suffix(&config.out, "_classical");
                let (csv, pgm) = save_map(&conv.grid, &stem)?;
                EmittedMap {
                    method: "classical".into(),
                    csv,
                    pgm,
                    rescaled_csv: None,
                }
            }
            CmdMethod::Overlap(m) => {
                let mode = config.shots.single_mode(config.seed)?;
                let map = overlap_feature_map(
                    &image,
                    &kernel,
                    config.stride,
                    config.padding,
                    *m,
                    mode,
                )?;
                emit_feature_map(&map, &config.out)?
            }
            CmdMethod::Qpe => {
                let mode = config.shots.single_mode(config.seed)?;
                let map = qacl_layer(
                    &image,
                    &kernel,
                    config.stride,
                    config.padding,
                    config.qpe_bits,
                    mode,
                )?;
                emit_feature_map(&map, &config.out)?
            }
        };
        say!("{:>10}: {}", item.method, item.csv.display());
        emitted.push(item);
    }
    Ok(emitted)
}

#[derive(Debug, Clone)]
pub struct QpeLayerReport {
    pub decoded_csv: PathBuf,
    pub decoded_pgm: PathBuf,
    pub rescaled_csv: PathBuf,
    pub error_csv: PathBuf,
    /// Largest |decoded - exact overlap| across windows.
    pub max_abs_error: f64,
    /// One phase bin on the overlap scale.
    pub error_bound: f64,
}

/// Runs the phase-estimation layer and reports its per-window deviation
/// from the exact interference readout.
pub fn cmd_qpe_layer(config: &ExperimentConfig) -> Result<QpeLayerReport> {
    let image = config.image.resolve()?;
    let kernel = config.kernel.resolve()?;
    let mode = config.shots.single_mode(config.seed)?;
    let decoded = qacl_layer(
        &image,
        &kernel,
        config.stride,
        config.padding,
        config.qpe_bits,
        mode,
    )?;
    let oracle = overlap_feature_map(
        &image,
        &kernel,
        config.stride,
        config.padding,
        OverlapMethod::Hadamard,
        EstimateMode::Exact,
    )?;
    let mut error_grid = Grid::zeros(decoded.grid.rows(), decoded.grid.cols())?;
    for r in 0..error_grid.rows() {
        for c in 0..error_grid.cols() {
            error_grid.set(r, c, (decoded.grid.at(r, c) - oracle.grid.at(r, c)).abs());
        }
    }
    let (decoded_csv, decoded_pgm) = save_map(&decoded.grid, &with_suffix(&config.out, "_decoded"))?;
    let rescaled_csv = with_suffix(&config.out, "_rescaled.csv");
    write_csv(&rescale_map(&decoded).grid, &rescaled_csv)?;
    let error_csv = with_suffix(&config.out, "_error.csv");
    write_csv(&error_grid, &error_csv)?;
    let report = QpeLayerReport {
        decoded_csv,
        decoded_pgm,
        rescaled_csv,
        error_csv,
        max_abs_error: error_grid.max_abs(),
        error_bound: decode_error_bound(config.qpe_bits),
    };
    say!(
        "phase readout with s={} bits: max |decoded - exact| = {:.3e} (one bin = {:.3e})",
        config.qpe_bits, report.max_abs_error, report.error_bound
    );
    say!("wrote {}", report.decoded_csv.display());
    Ok(report)
}

/// Normalized overlap of a window with kernel weights, the quantity the
/// exact interference readout reports.
pub fn normalized_overlap_value(window: &Grid, weights: &Grid) -> Result<f64> {
    let wnorm = norm_of(weights);
    let anorm = norm_of(window);
    if wnorm == 0.0 || anorm == 0.0 {
        return Err(Error::DegeneratePatch(
            "normalized overlap needs nonzero window and weights".into(),
        ));
    }
    Ok(frobenius(window, weights)? / (anorm * wnorm))
}

/// Gradient of the normalized overlap with respect to each weight:
/// dG/dw_i = a_i / (|a| |w|) - G * w_i / |w|^2.
pub fn analytic_gradient(window: &Grid, weights: &Grid) -> Result<Vec<f64>> {
    let g = normalized_overlap_value(window, weights)?;
    let (anorm, wnorm) = (norm_of(window), norm_of(weights));
    Ok(window
        .as_slice()
        .iter()
        .zip(weights.as_slice())
        .map(|(a, w)| a / (anorm * wnorm) - g * w / (wnorm * wnorm))
        .collect())
}

fn norm_of(g: &Grid) -> f64 {
    g.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone)]
pub struct GradReport {
    pub analytic: Vec<f64>,
    pub finite_diff: Vec<f64>,
    pub max_abs_deviation: f64,
    pub csv: PathBuf,
}

/// Checks the closed-form gradient against a central finite difference of
/// the normalized overlap.
pub fn cmd_grad_check(
    window: &Grid,
    kernel: &KernelMatrix,
    epsilon: f64,
    out: &Path,
) -> Result<GradReport> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Input(format!("epsilon must be positive, got {epsilon}")));
    }
    let weights = kernel.weights();
    if window.rows() != weights.rows() || window.cols() != weights.cols() {
        return Err(Error::Shape(format!(
            "window is {}x{} but kernel is {}x{}",
            window.rows(),
            window.cols(),
            weights.rows(),
            weights.cols()
        )));
    }
    let analytic = analytic_gradient(window, weights)?;
    let mut finite_diff = Vec::with_capacity(analytic.len());
    for r in 0..weights.rows() {
        for c in 0..weights.cols() {
            let mut plus = weights.clone();
            plus.set(r, c, weights.at(r, c) + epsilon);
            let mut minus = weights.clone();
            minus.set(r, c, weights.at(r, c) - epsilon);
            let fd = (normalized_overlap_value(window, &plus)?
                - normalized_overlap_value(window, &minus)?)
                / (2.0 * epsilon);
            finite_diff.push(fd);
        }
    }
    let max_abs_deviation = analytic
        .iter()
        .zip(&finite_diff)
        .fold(0.0f64, |m, (a, f)| m.max((a - f).abs()));
    let csv = with_suffix(out, ".csv");
    let mut text = String::from("index,analytic,finite_diff,abs_dev\n");
    for (i, (a, f)) in analytic.iter().zip(&finite_diff).enumerate() {
        text.push_str(&format!("{i},{a:.16e},{f:.16e},{:.16e}\n", (a - f).abs()));
    }
    std::fs::write(&csv, text).map_err(|e| Error::io(&csv, e))?;
    say!(
        "gradient check: max |analytic - finite difference| = {max_abs_deviation:.3e} at epsilon {epsilon:.1e}"
    );
    say!("wrote {}", csv.display());
    Ok(GradReport {
        analytic,
        finite_diff,
        max_abs_deviation,
        csv,
    })
}

#[derive(Debug, Clone)]
pub struct TrainTrace {
    pub loss: Vec<f64>,
    pub accuracy: Vec<f64>,
    pub csv: PathBuf,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Trains a one-kernel classifier on the bundled toy dataset with plain
/// gradient descent. The feature of an image is the mean normalized window
/// overlap with the kernel, the exact value the interference layer reads
/// out, and the kernel gradient flows through the closed form checked by
/// `cmd_grad_check`. Logs loss and accuracy per iteration.
pub fn cmd_train_toy(lr: f64, iters: usize, seed: u64, out: &Path) -> Result<TrainTrace> {
    if !(lr.is_finite() && lr > 0.0) {
        return Err(Error::Input(format!("learning rate must be positive, got {lr}")));
    }
    if iters == 0 {
        return Err(Error::Input("need at least one iteration".into()));
    }
    let (images, labels) = toy_dataset();
    let mut windows_per_image = Vec::with_capacity(images.len());
    for image in &images {
        windows_per_image.push(extract_windows(image, 3, 3, 1, 0)?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights;
    loop {
        let data: Vec<f64> = (0..9).map(|_| rng.random::<f64>() - 0.5).collect();
        weights = Grid::new(3, 3, data)?;
        if norm_of(&weights) > 1e-3 {
            break;
        }
    }
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;

    let n = images.len() as f64;
    let mut loss_trace = Vec::with_capacity(iters);
    let mut acc_trace = Vec::with_capacity(iters);
    for _ in 0..iters {
        // Forward pass: pooled feature, logistic head.
        let mut features = Vec::with_capacity(images.len());
        for windows in &windows_per_image {
            let mut pooled = 0.0;
            for w in windows {
                pooled += match normalized_overlap_value(w.entries(), &weights) {
                    Ok(g) => g,
                    Err(Error::DegeneratePatch(_)) => 0.0,
                    Err(other) => return Err(other),
                };
            }
            features.push(pooled / windows.len() as f64);
        }
        let mut loss = 0.0;
        let mut correct = 0usize;
        let mut dz = Vec::with_capacity(images.len());
        for (i, &label) in labels.iter().enumerate() {
            let y = f64::from(label);
            let p = sigmoid(scale * features[i] + bias);
            // Clamp away from 0/1; the loss stays finite and the gradient
            // is unchanged.
            let p_safe = p.clamp(1e-12, 1.0 - 1e-12);
            loss -= (y * p_safe.ln() + (1.0 - y) * (1.0 - p_safe).ln()) / n;
            if (p > 0.5) == (label == 1) {
                correct += 1;
            }
            dz.push((p - y) / n);
        }
        loss_trace.push(loss);
        acc_trace.push(correct as f64 / n);

        // Backward pass.
        let mut d_scale = 0.0;
        let mut d_bias = 0.0;
        let mut d_weights = vec![0.0f64; 9];
        for (i, windows) in windows_per_image.iter().enumerate() {
            d_scale += dz[i] * features[i];
            d_bias += dz[i];
            let per_window = dz[i] * scale / windows.len() as f64;
            for w in windows {
                let grad = match analytic_gradient(w.entries(), &weights) {
                    Ok(g) => g,
                    Err(Error::DegeneratePatch(_)) => continue,
                    Err(other) => return Err(other),
                };
                for (acc, g) in d_weights.iter_mut().zip(&grad) {
                    *acc += per_window * g;
                }
            }
        }
        scale -= lr * d_scale;
        bias -= lr * d_bias;
        let mut updated = weights.as_slice().to_vec();
        for (w, g) in updated.iter_mut().zip(&d_weights) {
            *w -= lr * g;
        }
        weights = Grid::new(3, 3, updated)?;
    }

    let csv = with_suffix(out, ".csv");
    let mut text = String::from("iter,loss,accuracy\n");
    for (i, (l, a)) in loss_trace.iter().zip(&acc_trace).enumerate() {
        text.push_str(&format!("{i},{l:.16e},{a:.16e}\n"));
    }
    std::fs::write(&csv, text).map_err(|e| Error::io(&csv, e))?;
    say!(
        "trained {iters} iterations: loss {:.4} -> {:.4}, final accuracy {:.2}",
        loss_trace[0],
        loss_trace[iters - 1],
        acc_trace[iters - 1]
    );
    say!("wrote {}", csv.display());
    Ok(TrainTrace {
        loss: loss_trace,
        accuracy: acc_trace,
        csv,
    })
}
