use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hueshift_core::colorspace::{delta_e_linear, lab_from_linear, srgb_decode, srgb_encode, LinearRgb, SRgb8};
use hueshift_core::cvd::{sample_confusion_line, CvdType};
use hueshift_core::image::{FileFormat, Image};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hueshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hueshift")).args(args).output().expect("binary runs")
}

fn ok(o: Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_png(dir: &Path, name: &str, img: &Image) -> PathBuf {
    let p = dir.join(name);
    img.save(&p).unwrap();
    p
}

fn random_image(w: u32, h: u32, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image::new(w, h, (0..w * h).map(|_| SRgb8::new(rng.random(), rng.random(), rng.random())).collect()).unwrap()
}

#[test]
fn rotate_zero_is_identity_and_120_maps_red_to_green() {
    let dir = tempfile::tempdir().unwrap();
    let img = random_image(33, 17, 1);
    let input = write_png(dir.path(), "in.png", &img);
    let out = dir.path().join("out.png");
    ok(hueshift(&["rotate", s(&input), s(&out), "--theta", "0"]));
    assert_eq!(Image::load(&out).unwrap(), img);

    let red = write_png(dir.path(), "red.png", &Image::filled(4, 3, SRgb8::new(255, 0, 0)));
    ok(hueshift(&["rotate", s(&red), s(&out), "--theta", "120"]));
    let green = Image::load(&out).unwrap();
    assert_eq!((green.width(), green.height()), (4, 3));
    assert!(green.pixels().iter().all(|&p| p == SRgb8::new(0, 255, 0)));

    ok(hueshift(&["rotate", s(&red), s(&out), "--theta", "-240"]));
    assert!(Image::load(&out).unwrap().pixels().iter().all(|&p| p == SRgb8::new(0, 255, 0)));
}

#[test]
fn rotate_writes_ppm_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let img = random_image(5, 5, 2);
    let input = write_png(dir.path(), "in.png", &img);
    let out = dir.path().join("out.ppm");
    ok(hueshift(&["rotate", s(&input), s(&out), "--theta", "0"]));
    assert!(std::fs::read(&out).unwrap().starts_with(b"P6"));
    assert_eq!(Image::load(&out).unwrap(), img);
}

#[test]
fn malformed_png_exits_2_and_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.png");
    let mut bytes = random_image(8, 8, 3).encode(FileFormat::Png).unwrap();
    bytes.truncate(bytes.len() / 2);
    std::fs::write(&bad, bytes).unwrap();
    let o = hueshift(&["rotate", s(&bad), s(&dir.path().join("o.png")), "--theta", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.png"));

    let o = hueshift(&["simulate", s(&dir.path().join("missing.png")), "o.png", "--cvd", "deutan"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.png"));
}

#[test]
fn simulate_preserves_gray_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let grays: Vec<SRgb8> = (0..=255).map(|v| SRgb8::new(v, v, v)).collect();
    let gray = write_png(dir.path(), "gray.png", &Image::new(16, 16, grays.clone()).unwrap());
    let colors = write_png(dir.path(), "colors.png", &random_image(16, 16, 4));
    for cvd in ["protan", "deutan", "tritan"] {
        let out = dir.path().join(format!("g_{cvd}.png"));
        ok(hueshift(&["simulate", s(&gray), s(&out), "--cvd", cvd]));
        for (a, b) in Image::load(&out).unwrap().pixels().iter().zip(&grays) {
            for (x, y) in a.to_array().into_iter().zip(b.to_array()) {
                assert!((x as i32 - y as i32).abs() <= 1, "{cvd}: {a:?} vs {b:?}");
            }
        }

        let once = dir.path().join(format!("once_{cvd}.png"));
        let twice = dir.path().join(format!("twice_{cvd}.png"));
        ok(hueshift(&["simulate", s(&colors), s(&once), "--cvd", cvd]));
        ok(hueshift(&["simulate", s(&once), s(&twice), "--cvd", cvd]));
        let (a, b) = (Image::load(&once).unwrap(), Image::load(&twice).unwrap());
        for (p, q) in a.pixels().iter().zip(b.pixels()) {
            for (x, y) in p.to_array().into_iter().zip(q.to_array()) {
                assert!((x as i32 - y as i32).abs() <= 1, "{cvd}: {p:?} vs {q:?}");
            }
        }
    }
}

fn mean(pixels: &[SRgb8]) -> LinearRgb {
    let n = pixels.len() as f64;
    let sum = pixels.iter().map(|&p| srgb_decode(p)).fold([0.0; 3], |acc, c| [acc[0] + c.r, acc[1] + c.g, acc[2] + c.b]);
    LinearRgb::new(sum[0] / n, sum[1] / n, sum[2] / n)
}

#[test]
fn red_green_card_collapses_under_deutan() {
    // two fields on one deutan confusion line, one reddish and one greenish
    let line = sample_confusion_line(srgb_decode(SRgb8::new(150, 130, 70)), CvdType::Deutan, 30.0, 2).unwrap();
    let (red, green) = (srgb_encode(line[0]).unwrap(), srgb_encode(line[1]).unwrap());
    let (la, lb) = (lab_from_linear(srgb_decode(red)), lab_from_linear(srgb_decode(green)));
    let (red, green) = if la.a > lb.a { (red, green) } else { (green, red) };
    assert!(lab_from_linear(srgb_decode(red)).a > 0.0 && lab_from_linear(srgb_decode(green)).a < 0.0, "{red:?} {green:?}");

    let (w, h) = (20u32, 10u32);
    let pixels = (0..w * h).map(|i| if i % w < w / 2 { red } else { green }).collect();
    let dir = tempfile::tempdir().unwrap();
    let card = write_png(dir.path(), "card.png", &Image::new(w, h, pixels).unwrap());
    let out = dir.path().join("sim.png");
    ok(hueshift(&["simulate", s(&card), s(&out), "--cvd", "deutan"]));
    let sim = Image::load(&out).unwrap();
    let (left, right): (Vec<_>, Vec<_>) =
        sim.pixels().iter().enumerate().partition::<Vec<_>, _>(|(i, _)| (*i as u32) % w < w / 2);
    let left: Vec<SRgb8> = left.into_iter().map(|(_, &p)| p).collect();
    let right: Vec<SRgb8> = right.into_iter().map(|(_, &p)| p).collect();
    assert!(delta_e_linear(mean(&left), mean(&right)) <= 2.0);
    assert!(delta_e_linear(srgb_decode(red), srgb_decode(green)) > 20.0);
}

#[test]
fn name_command() {
    let gray = ok(hueshift(&["name", "136", "136", "136"]));
    assert!(gray.trim().ends_with("gray"), "{gray}");
    assert_eq!(ok(hueshift(&["name", "0", "0", "0"])).trim(), "black");
    let o = hueshift(&["name", "256", "0", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let json: serde_json::Value = serde_json::from_str(&ok(hueshift(&["name", "255", "0", "0", "--json"]))).unwrap();
    assert_eq!(json["name"], "red");
    let three = ok(hueshift(&["name", "10", "20", "200", "--k", "3"]));
    assert_eq!(three.lines().count(), 3);
}

#[test]
fn custom_dictionary() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("dict.csv");
    let mut text = String::from("name,variant,r,g,b\n");
    for i in 0..57u32 {
        text.push_str(&format!("c{i},base,{},{},{}\n", i * 4, 255 - i * 4, (i * 7) % 256));
    }
    std::fs::write(&good, &text).unwrap();
    assert_eq!(ok(hueshift(&["--dictionary", s(&good), "name", "0", "255", "0"])).trim(), "c0");

    let bad = dir.path().join("short.csv");
    std::fs::write(&bad, "name,variant,r,g,b\nred,base,255,0,0\n").unwrap();
    let o = hueshift(&["name", "1", "2", "3", "--dictionary", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("expected 57 entries"));
}

#[test]
fn fig9_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig9.csv");
    ok(hueshift(&["analyze", "fig9", "--base", "136,136,136", "--cvd", "protan", "--out", s(&out)]));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 12 * 360);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    let pairs = summary["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 12);
    assert!(pairs.iter().all(|p| p["jnd_max"].as_f64().unwrap() >= 3.0));

    let o = hueshift(&["analyze", "fig9", "--step", "90"]);
    let stdout = ok(o);
    assert_eq!(stdout.lines().count(), 1 + 12 * 4);
}

#[test]
fn ellipse_command() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pts.csv");
    let mut text = String::from("x,y\n");
    for i in 0..8 {
        let t = i as f64 * std::f64::consts::TAU / 8.0;
        text.push_str(&format!("{},{}\n", 0.31 + 0.02 * t.cos(), 0.33 + 0.01 * t.sin()));
    }
    std::fs::write(&input, text).unwrap();
    let json: serde_json::Value = serde_json::from_str(&ok(hueshift(&["analyze", "ellipse", s(&input)]))).unwrap();
    assert!((json["area"].as_f64().unwrap() - std::f64::consts::PI * 2e-4).abs() < 1e-9);
    assert!((json["ellipse"]["semi_major"].as_f64().unwrap() - 0.02).abs() < 1e-9);

    std::fs::write(&input, "x,y\n0.1,0.1\n").unwrap();
    assert_eq!(hueshift(&["analyze", "ellipse", s(&input)]).status.code(), Some(2));
}

#[test]
fn study_runs_are_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    ok(hueshift(&["study", "run", "--cvd", "deutan", "--seed", "7", "--out", s(&a)]));
    ok(hueshift(&["--seed", "7", "study", "run", "--cvd", "deutan", "--out", s(&b)]));
    ok(hueshift(&["study", "run", "--cvd", "deutan", "--seed", "8", "--out", s(&c)]));
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a.with_extension("json")), read(&b.with_extension("json")));
    assert_ne!(read(&a), read(&c));
    let csv = String::from_utf8(read(&a)).unwrap();
    assert!(csv.starts_with("base_name,line,direction,phase,threshold_delta_e\n"));
    assert_eq!(csv.lines().count(), 65);

    let o = hueshift(&["study", "run", "--lapse", "1.5", "--out", s(&c)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let o = hueshift(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(hueshift(&["simulate", "a.png", "b.png", "--cvd", "purple"]).status.code(), Some(2));
    assert_eq!(hueshift(&["serve", "--max-width", "0"]).status.code(), Some(2));
}
