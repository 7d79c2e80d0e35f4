use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const GT: &str = "patientId,x,y,width,height,Target\n\
                  a,10,10,50,60,1\n\
                  a,200,220,40,40,1\n\
                  b,,,,,0\n\
                  c,5,5,100,100,1\n";

fn lungdet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lungdet"))
        .args(args)
        .output()
        .expect("spawn lungdet")
}

fn put(dir: &TempDir, name: &str, body: impl AsRef<[u8]>) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn score_perfect_predictions() {
    let dir = TempDir::new().unwrap();
    let gt = put(&dir, "gt.csv", GT);
    let pred = put(
        &dir,
        "pred.csv",
        "patientId,PredictionString\na,1.0 10 10 50 60 1.0 200 220 40 40\nb,\nc,1.0 5 5 100 100\n",
    );
    let out = dir.path().join("report.json");
    let o = lungdet(&[
        "score",
        "--gt",
        s(&gt),
        "--pred",
        s(&pred),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o).trim(), "1.000000");
    let report = fs::read_to_string(out).unwrap();
    assert!(report.starts_with("{\"dataset_map\":1.000000,"), "{report}");
    assert!(
        report.contains("{\"patient_id\":\"b\",\"ap\":null}"),
        "{report}"
    );
}

#[test]
fn score_empty_predictions() {
    let dir = TempDir::new().unwrap();
    let gt = put(&dir, "gt.csv", GT);
    let pred = put(&dir, "pred.csv", "patientId,PredictionString\n");
    let out = dir.path().join("r.json");
    let o = lungdet(&[
        "score",
        "--gt",
        s(&gt),
        "--pred",
        s(&pred),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.000000");
}

#[test]
fn score_report_goes_to_stdout_without_out() {
    let dir = TempDir::new().unwrap();
    let gt = put(&dir, "gt.csv", GT);
    let pred = put(&dir, "pred.csv", "patientId,PredictionString\n");
    let o = lungdet(&[
        "score",
        "--gt",
        s(&gt),
        "--pred",
        s(&pred),
        "--workers",
        "2",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("{\"dataset_map\":0.000000,"));
}

#[test]
fn bad_gt_row_exits_2_and_names_line() {
    let dir = TempDir::new().unwrap();
    let gt = put(
        &dir,
        "gt.csv",
        "patientId,x,y,width,height,Target\na,1,2,3,4,1\na,1,two,3,4,1\n",
    );
    let pred = put(&dir, "pred.csv", "patientId,PredictionString\n");
    let o = lungdet(&["score", "--gt", s(&gt), "--pred", s(&pred)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn missing_file_exits_1() {
    let dir = TempDir::new().unwrap();
    let pred = put(&dir, "pred.csv", "patientId,PredictionString\n");
    let missing = dir.path().join("nope.csv");
    let o = lungdet(&["score", "--gt", s(&missing), "--pred", s(&pred)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_parameters_exit_2() {
    let o = lungdet(&["anchors", "--scales", "8,-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lungdet(&[
        "score",
        "--gt",
        "x",
        "--pred",
        "y",
        "--thresholds",
        "0.9:0.1:0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = lungdet(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn folds_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let ids: String = (0..37).map(|i| format!("p{i}\n")).collect();
    let ids = put(&dir, "ids.txt", ids);
    let run = || lungdet(&["folds", "--ids", s(&ids), "--k", "5", "--seed", "7"]);
    let (a, b) = (run(), run());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("patientId,fold\n"));
    assert_eq!(text.lines().count(), 38);
    let other = lungdet(&["folds", "--ids", s(&ids), "--k", "5", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn folds_from_ground_truth_ids() {
    let dir = TempDir::new().unwrap();
    let gt = put(&dir, "gt.csv", GT);
    let o = lungdet(&["folds", "--gt", s(&gt), "--k", "3"]);
    assert!(o.status.success());
    // three distinct patients, one per fold
    let mut folds: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_owned())
        .collect();
    folds.sort();
    assert_eq!(folds, ["0", "1", "2"]);
}

#[test]
fn hard_nms_on_three_box_fixture() {
    let dir = TempDir::new().unwrap();
    let input = put(
        &dir,
        "dets.csv",
        "patientId,x,y,width,height,score,classId\n\
         p,0,0,10,10,0.9,\n\
         p,0,0,10,10,0.8,\n\
         p,20,20,10,10,0.7,\n",
    );
    let o = lungdet(&[
        "nms",
        "--input",
        s(&input),
        "--mode",
        "hard",
        "--iou",
        "0.5",
    ]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "patientId,x,y,width,height,score,classId\np,0,0,10,10,0.9,\np,20,20,10,10,0.7,\n"
    );
}

#[test]
fn soft_gaussian_nms_keeps_decayed_duplicate() {
    let dir = TempDir::new().unwrap();
    let input = put(
        &dir,
        "dets.csv",
        "patientId,x,y,width,height,score,classId\np,0,0,10,10,0.9,\np,0,0,10,10,0.8,\n",
    );
    let out = dir.path().join("kept.csv");
    let o = lungdet(&[
        "nms",
        "--input",
        s(&input),
        "--mode",
        "soft-gaussian",
        "--sigma",
        "0.5",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let kept = fs::read_to_string(out).unwrap();
    let rows: Vec<&str> = kept.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    let second: f64 = rows[1].split(',').nth(5).unwrap().parse().unwrap();
    assert!((second - 0.8 * (-2.0f64).exp()).abs() < 1e-12);
}

#[test]
fn classify_perfect_labels() {
    let dir = TempDir::new().unwrap();
    let gt = put(&dir, "gt.csv", GT);
    let pred = put(
        &dir,
        "pred.csv",
        "patientId,PredictionString\na,0.9 0 0 5 5\nb,0.2 0 0 5 5\nc,0.5 1 1 2 2\n",
    );
    let o = lungdet(&["classify", "--gt", s(&gt), "--pred", s(&pred)]);
    assert!(o.status.success());
    let text = stdout(&o);
    for key in ["accuracy", "specificity", "precision", "recall", "f1"] {
        assert!(
            text.contains(&format!("\"{key}\":1.000000")),
            "{key}: {text}"
        );
    }
    assert!(text.contains("\"undefined\":[]"), "{text}");
}

#[test]
fn anchors_default_cell() {
    let o = lungdet(&["anchors"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "index,x_min,y_min,x_max,y_max");
    assert_eq!(rows.len(), 10);
    // scale 16, ratio 1: a 256-pixel square centred on the first cell
    assert_eq!(rows[5], "4,-120,-120,136,136");

    let o = lungdet(&["anchors", "--grid", "3x2", "--scales", "1", "--ratios", "1"]);
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn preprocess_flip_moves_image_and_boxes() {
    let dir = TempDir::new().unwrap();
    let (w, h) = (8usize, 4usize);
    let mut pgm = format!("P5\n{w} {h}\n255\n").into_bytes();
    pgm.extend((0..w * h).map(|i| (i % w) as u8 * 10));
    let input = put(&dir, "in.pgm", &pgm);
    let boxes = put(
        &dir,
        "boxes.csv",
        "patientId,x,y,width,height,Target\nq,1,1,2,2,1\nq,,,,,0\n",
    );
    let out = dir.path().join("out.pgm");
    let boxes_out = dir.path().join("boxes_out.csv");
    let o = lungdet(&[
        "preprocess",
        "--input",
        s(&input),
        "--out",
        s(&out),
        "--hflip",
        "--boxes",
        s(&boxes),
        "--boxes-out",
        s(&boxes_out),
    ]);
    assert!(o.status.success(), "{o:?}");
    let flipped = fs::read(&out).unwrap();
    let header = b"P5\n8 4\n255\n";
    assert_eq!(&flipped[..header.len()], header);
    assert_eq!(
        &flipped[header.len()..header.len() + w],
        &[70, 60, 50, 40, 30, 20, 10, 0]
    );
    assert_eq!(
        fs::read_to_string(boxes_out).unwrap(),
        "patientId,x,y,width,height,Target\nq,5,1,2,2,1\nq,,,,,0\n"
    );
}

#[test]
fn preprocess_resize_clahe_and_seeded_augment_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let (w, h) = (40usize, 30usize);
    let mut pgm = format!("P5\n{w} {h}\n255\n").into_bytes();
    pgm.extend((0..w * h).map(|i| ((i * 37) % 251) as u8));
    let input = put(&dir, "in.pgm", &pgm);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = lungdet(&[
            "preprocess",
            "--input",
            s(&input),
            "--out",
            s(&out),
            "--resize",
            "32",
            "--clahe",
            "--tiles",
            "4x4",
            "--clip",
            "2",
            "--seed",
            "11",
        ]);
        assert!(o.status.success(), "{o:?}");
        fs::read(out).unwrap()
    };
    let (a, b) = (run("a.pgm"), run("b.pgm"));
    assert_eq!(a, b);
    assert!(a.starts_with(b"P5\n32 32\n255\n"));
    assert_eq!(a.len(), b"P5\n32 32\n255\n".len() + 32 * 32);
}

#[test]
fn preprocess_rejects_bad_pgm() {
    let dir = TempDir::new().unwrap();
    let input = put(&dir, "in.pgm", b"P2\n1 1\n255\n0\n");
    let out = dir.path().join("o.pgm");
    let o = lungdet(&["preprocess", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}
