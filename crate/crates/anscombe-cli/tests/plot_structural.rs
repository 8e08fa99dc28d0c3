//! Structural checks on plot emission: panel count, point count, and the
//! fitted line's data-space endpoints. Rendering is qualitative beyond
//! that, so no pixel comparisons.

use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anscombe"))
}

fn emit_quartet(dir: &Path) {
    let out = bin()
        .args(["quartet", "--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
}

/// Pulls a numeric attribute out of the first element of `svg` that has
/// the given class.
fn attr_of(svg: &str, class: &str, attr: &str) -> f64 {
    let element_start = svg
        .find(&format!("class=\"{class}\""))
        .unwrap_or_else(|| panic!("no element with class {class}"));
    let tail = &svg[element_start..];
    let key = format!("{attr}=\"");
    let start = tail.find(&key).expect("attribute present") + key.len();
    let end = tail[start..].find('"').unwrap() + start;
    tail[start..end].parse().expect("numeric attribute")
}

#[test]
fn four_panel_quartet_figure() {
    let dir = TempDir::new().unwrap();
    emit_quartet(dir.path());
    let fig = dir.path().join("quartet.svg");
    let inputs: Vec<String> = ["I", "II", "III", "IV"]
        .iter()
        .map(|l| dir.path().join(format!("quartet_{l}.csv")).display().to_string())
        .collect();
    let out = bin()
        .args(["plot"])
        .args(&inputs)
        .args(["--out", fig.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());

    let svg = std::fs::read_to_string(&fig).unwrap();
    assert_eq!(svg.matches("<g class=\"panel\"").count(), 4);
    assert_eq!(svg.matches("<circle class=\"pt\"").count(), 44);
    assert_eq!(svg.matches("<line class=\"fit\"").count(), 4);

    // First panel's fitted line runs from x = 4 to x = 14 and its height
    // there matches the shared regression line y = 3 + 0.5x within the
    // published rounding.
    assert_eq!(attr_of(&svg, "fit", "data-x1"), 4.0);
    assert_eq!(attr_of(&svg, "fit", "data-x2"), 14.0);
    let y1 = attr_of(&svg, "fit", "data-y1");
    let y2 = attr_of(&svg, "fit", "data-y2");
    assert!((y1 - 5.0).abs() < 0.05, "line at x=4: {y1}");
    assert!((y2 - 10.0).abs() < 0.05, "line at x=14: {y2}");
}

#[test]
fn single_collinear_dataset_line_matches_points() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("line.csv");
    let mut text = String::from("x,y\n");
    for k in 0..7 {
        let x = k as f64;
        text.push_str(&format!("{x},{}\n", 1.0 + 2.0 * x));
    }
    std::fs::write(&csv, text).unwrap();
    let fig = dir.path().join("line.svg");
    let out = bin()
        .args(["plot", csv.to_str().unwrap(), "--out", fig.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let svg = std::fs::read_to_string(&fig).unwrap();
    assert_eq!(svg.matches("<g class=\"panel\"").count(), 1);
    assert_eq!(svg.matches("<circle class=\"pt\"").count(), 7);
    // Perfect fit: endpoints land exactly on the line.
    assert_eq!(attr_of(&svg, "fit", "data-y1"), 1.0);
    assert_eq!(attr_of(&svg, "fit", "data-y2"), 13.0);
}

#[test]
fn three_point_minimal_figure() {
    // The smallest sample size still renders: one panel, three points,
    // one fitted line.
    let dir = TempDir::new().unwrap();
    let gen = bin()
        .args([
            "generate", "--n", "3", "--mean-x", "9", "--var-x", "11", "--mean-y", "7.5",
            "--var-y", "4.125", "--beta1", "0.5", "--shape", "on-line", "--tol", "1e-9",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let fig = dir.path().join("three.svg");
    let out = bin()
        .args([
            "plot",
            dir.path().join("dataset_000.csv").to_str().unwrap(),
            "--out",
            fig.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let svg = std::fs::read_to_string(&fig).unwrap();
    assert_eq!(svg.matches("<g class=\"panel\"").count(), 1);
    assert_eq!(svg.matches("<circle class=\"pt\"").count(), 3);
    assert_eq!(svg.matches("<line class=\"fit\"").count(), 1);
    // The fitted slope equals the constraint slope: endpoints obey
    // y = 3 + 0.5x at the extreme x positions.
    let x1 = attr_of(&svg, "fit", "data-x1");
    let y1 = attr_of(&svg, "fit", "data-y1");
    let x2 = attr_of(&svg, "fit", "data-x2");
    let y2 = attr_of(&svg, "fit", "data-y2");
    assert!((y1 - (3.0 + 0.5 * x1)).abs() < 1e-6);
    assert!((y2 - (3.0 + 0.5 * x2)).abs() < 1e-6);
}

#[test]
fn plot_output_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    emit_quartet(dir.path());
    let input = dir.path().join("quartet_II.csv");
    let fig_a = dir.path().join("a.svg");
    let fig_b = dir.path().join("b.svg");
    for fig in [&fig_a, &fig_b] {
        let out = bin()
            .args([
                "plot",
                input.to_str().unwrap(),
                "--out",
                fig.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    assert_eq!(
        std::fs::read(&fig_a).unwrap(),
        std::fs::read(&fig_b).unwrap()
    );
}
