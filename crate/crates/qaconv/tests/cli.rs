//! End-to-end runs of the compiled binary: happy paths for every
//! subcommand, the documented exit codes, and byte-level determinism of
//! seeded output files.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qaconv"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Parses a headerless numeric CSV.
fn read_grid(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|line| {
            line.split(',')
                .map(|tok| tok.trim().parse::<f64>().unwrap())
                .collect()
        })
        .collect()
}

fn write_image_csv(path: &Path) {
    let mut text = String::new();
    for r in 0..6 {
        let row: Vec<String> = (0..6)
            .map(|c| format!("{}", (r * 37 + c * 11) % 100))
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn help_and_version_exit_zero() {
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    for name in ["verify-qaco", "conv-map", "qpe-layer", "grad-check", "train-toy"] {
        assert!(stdout(&help).contains(name), "help is missing {name}");
    }
    assert_eq!(code(&run(&["--version"])), 0);
    // Usage errors are ordinary invalid input.
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["no-such-command"])), 1);
}

#[test]
fn verify_qaco_writes_a_reproducible_report() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("v");
    let out = run(&[
        "verify-qaco",
        "--shots",
        "50,200",
        "--seed",
        "3",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("reference pair"));
    let csv = std::fs::read_to_string(dir.path().join("v.csv")).unwrap();
    assert!(csv.starts_with("shots,p0,overlap,std_error,err_percent\n"));
    assert_eq!(csv.lines().count(), 4); // header + exact + two shot rows

    let second = dir.path().join("w");
    let again = run(&[
        "verify-qaco",
        "--shots",
        "50,200",
        "--seed",
        "3",
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(code(&again), 0);
    assert_eq!(csv, std::fs::read_to_string(dir.path().join("w.csv")).unwrap());
}

#[test]
fn conv_map_runs_every_method_on_a_csv_image() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("image.csv");
    write_image_csv(&image);
    let prefix = dir.path().join("map");
    let out = run(&[
        "conv-map",
        "--image",
        image.to_str().unwrap(),
        "--kernel",
        "sharpen",
        "--method",
        "all",
        "--qpe-bits",
        "6",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    for label in ["classical", "hadamard", "swap", "adjoint", "qpe"] {
        assert!(dir.path().join(format!("map_{label}.csv")).exists());
        assert!(dir.path().join(format!("map_{label}.pgm")).exists());
    }
    // 6x6 image, 3x3 kernel, stride 1, no padding -> 4x4 maps.
    let classical = read_grid(&dir.path().join("map_classical.csv"));
    assert_eq!(classical.len(), 4);
    assert_eq!(classical[0].len(), 4);

    // Undoing the normalization recovers the classical map.
    let rescaled = read_grid(&dir.path().join("map_hadamard_rescaled.csv"));
    for (row_c, row_r) in classical.iter().zip(&rescaled) {
        for (c, r) in row_c.iter().zip(row_r) {
            assert!((c - r).abs() < 1e-9, "classical {c} vs rescaled {r}");
        }
    }
}

#[test]
fn conv_map_accepts_pgm_images() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("image.pgm");
    std::fs::write(&image, "P2\n# four by four\n4 4\n255\n0 10 20 30\n40 50 60 70\n80 90 100 110\n120 130 140 150\n").unwrap();
    let out = run(&[
        "conv-map",
        "--image",
        image.to_str().unwrap(),
        "--kernel",
        "box_blur",
        "--method",
        "classical,hadamard",
        "--out",
        dir.path().join("p").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(read_grid(&dir.path().join("p_classical.csv")).len(), 2);
}

#[test]
fn sampled_maps_are_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = |prefix: &Path, seed: &str| {
        vec![
            "conv-map".to_string(),
            "--image".into(),
            "builtin:checkerboard".into(),
            "--kernel".into(),
            "edge_detection".into(),
            "--method".into(),
            "hadamard".into(),
            "--shots".into(),
            "300".into(),
            "--seed".into(),
            seed.into(),
            "--out".into(),
            prefix.to_str().unwrap().into(),
        ]
    };
    for (prefix, seed) in [("a", "9"), ("b", "9"), ("c", "10")] {
        let argv = args(&dir.path().join(prefix), seed);
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        assert_eq!(code(&run(&argv)), 0);
    }
    let a = std::fs::read(dir.path().join("a_hadamard.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b_hadamard.csv")).unwrap();
    let c = std::fs::read(dir.path().join("c_hadamard.csv")).unwrap();
    assert_eq!(a, b, "same seed must give identical bytes");
    assert_ne!(a, c, "different seeds should sample differently");
}

#[test]
fn qpe_layer_reports_the_decode_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("q");
    let out = run(&[
        "qpe-layer",
        "--image",
        "builtin:checkerboard",
        "--kernel",
        "box_blur",
        "--qpe-bits",
        "5",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("phase readout"));
    for suffix in ["_decoded.csv", "_decoded.pgm", "_rescaled.csv", "_error.csv"] {
        assert!(dir.path().join(format!("q{suffix}")).exists(), "missing q{suffix}");
    }
    // Every recorded deviation respects one phase bin at s=5.
    let bin = std::f64::consts::PI / 16.0;
    for row in read_grid(&dir.path().join("q_error.csv")) {
        for err in row {
            assert!(err <= bin + 1e-12, "decode error {err} above one bin {bin}");
        }
    }
}

#[test]
fn grad_check_accepts_a_window_file() {
    let dir = tempfile::tempdir().unwrap();
    let window = dir.path().join("window.csv");
    std::fs::write(&window, "1,2,3\n-4,5,-6\n7,0.5,2\n").unwrap();
    let prefix = dir.path().join("g");
    let out = run(&[
        "grad-check",
        "--kernel",
        "emboss",
        "--window",
        window.to_str().unwrap(),
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    assert!(csv.starts_with("index,analytic,finite_diff,abs_dev\n"));
    assert_eq!(csv.lines().count(), 10); // header + nine weights
}

#[test]
fn train_toy_logs_every_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("t");
    let out = run(&[
        "train-toy",
        "--iters",
        "5",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(csv.starts_with("iter,loss,accuracy\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn invalid_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out_arg = dir.path().join("x");
    let out_arg = out_arg.to_str().unwrap();

    let missing = run(&[
        "conv-map", "--image", "/does/not/exist.csv", "--kernel", "sharpen",
        "--out", out_arg,
    ]);
    assert_eq!(code(&missing), 1);

    let unknown = run(&[
        "conv-map", "--image", "builtin:gradient", "--kernel", "ridge",
        "--out", out_arg,
    ]);
    assert_eq!(code(&unknown), 1);
    assert!(
        stderr(&unknown).contains("edge_detection"),
        "error should list the available kernels: {}",
        stderr(&unknown)
    );

    let bad_method = run(&[
        "conv-map", "--image", "builtin:gradient", "--kernel", "sharpen",
        "--method", "fourier", "--out", out_arg,
    ]);
    assert_eq!(code(&bad_method), 1);

    let zero_stride = run(&[
        "conv-map", "--image", "builtin:gradient", "--kernel", "sharpen",
        "--stride", "0", "--out", out_arg,
    ]);
    assert_eq!(code(&zero_stride), 1);
}

#[test]
fn capacity_limits_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "qpe-layer",
        "--image",
        "builtin:gradient",
        "--kernel",
        "sharpen",
        "--qpe-bits",
        "25",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("capacity"), "stderr: {}", stderr(&out));
}
