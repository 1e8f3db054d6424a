use std::path::Path;
use std::process::{Command, Output};

use sspca::groups::{make_halfspace_groups, GridSpec, GroupStructure};
use sspca::io::{load_matrix, load_model, save_matrix};
use sspca::pipeline::{NoiseLevel, PlantedSpec};

fn sspca(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sspca"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn planted_files(dir: &Path) {
    let data = PlantedSpec::new(GridSpec::grid_2d(4, 4).unwrap(), 2, 40)
        .noise(NoiseLevel::RelativeToSignal(0.3))
        .one_element_per_row(true)
        .seed(3)
        .generate()
        .unwrap();
    save_matrix(data.dataset.x.view(), dir.join("x.csv")).unwrap();
    let labels: String = data.dataset.labels.iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(dir.join("y.txt"), labels).unwrap();
}

#[test]
fn gen_groups_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    planted_files(dir.path());
    let out = sspca(&["gen-groups", "--grid-2d", "4x4", "--out", "g.txt"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(dir.path().join("g.txt")).unwrap();
    let parsed = GroupStructure::from_text(&text, Some(16)).unwrap();
    assert_eq!(parsed, make_halfspace_groups(&GridSpec::grid_2d(4, 4).unwrap()).unwrap());

    let fit_args = [
        "fit", "--data", "x.csv", "--groups", "g.txt", "--rank", "4", "--lambda", "1e-5", "--partition", "1,2;3,4",
        "--restarts", "2", "--seed", "9", "--out", "m.txt", "--trace", "t.csv",
    ];
    let out = sspca(&fit_args, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (model, header) = load_model(dir.path().join("m.txt")).unwrap();
    assert_eq!((model.n(), model.p(), model.r()), (40, 16, 4));
    assert_eq!(model.partition.to_string(), "1,2;3,4");
    assert_eq!(header.lambda, 1e-5);
    let first_model = std::fs::read(dir.path().join("m.txt")).unwrap();
    let first_trace = std::fs::read(dir.path().join("t.csv")).unwrap();

    let out = sspca(&fit_args, dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("m.txt")).unwrap(), first_model);
    assert_eq!(std::fs::read(dir.path().join("t.csv")).unwrap(), first_trace);

    let out = sspca(&["encode", "--model", "m.txt", "--data", "x.csv", "--out", "u.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(load_matrix(dir.path().join("u.csv")).unwrap().dim(), (40, 4));

    let out = sspca(&["render", "--model", "m.txt", "--grid-2d", "4x4", "--out-prefix", "el_"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for k in 1..=4 {
        let pgm = std::fs::read_to_string(dir.path().join(format!("el_{k:03}.pgm"))).unwrap();
        assert!(pgm.starts_with("P2\n4 4\n255\n"));
    }
}

#[test]
fn evaluate_writes_scores_and_the_baseline() {
    let dir = tempfile::tempdir().unwrap();
    planted_files(dir.path());
    let out = sspca(
        &[
            "evaluate", "--data", "x.csv", "--labels", "y.txt", "--grid-2d", "4x4", "--cv-grid",
            "k=1,3;log2_lambda=-16,-12;r=2", "--out", "eval",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("eval/cv_scores.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("log2_lambda,lambda,rank,k,fold,accuracy"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 5);
    let summary = std::fs::read_to_string(dir.path().join("eval/summary.txt")).unwrap();
    assert!(summary.contains("raw k-NN baseline: k=1"));
    assert!(summary.contains("grid points: 4"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    planted_files(dir.path());
    sspca(&["gen-groups", "--grid-2d", "4x4", "--out", "g.txt"], dir.path());

    assert_eq!(sspca(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(sspca(&["fit", "--data", "x.csv"], dir.path()).status.code(), Some(1));
    assert_eq!(sspca(&["bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(sspca(&["gen-groups", "--grid-2d", "4x4", "--singletons", "3", "--out", "g2.txt"], dir.path()).status.code(), Some(1));

    let bad_alpha = ["fit", "--data", "x.csv", "--groups", "g.txt", "--rank", "2", "--alpha", "2.5", "--out", "m.txt"];
    assert_eq!(sspca(&bad_alpha, dir.path()).status.code(), Some(1));
    let missing = ["fit", "--data", "nope.csv", "--groups", "g.txt", "--rank", "2", "--out", "m.txt"];
    assert_eq!(sspca(&missing, dir.path()).status.code(), Some(1));

    std::fs::write(dir.path().join("huge.csv"), "1,1e308\n2,-1e308\n").unwrap();
    sspca(&["gen-groups", "--line", "2", "--out", "g1.txt"], dir.path());
    let out = sspca(&["fit", "--data", "huge.csv", "--groups", "g1.txt", "--rank", "1", "--out", "m.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    std::fs::write(dir.path().join("bad.csv"), "1,2\n3,nan\n").unwrap();
    let out = sspca(&["fit", "--data", "bad.csv", "--groups", "g1.txt", "--rank", "1", "--out", "m.txt"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2") && stderr.contains("column 2"), "{stderr}");
}

#[test]
fn render_rejects_a_mismatched_grid() {
    let dir = tempfile::tempdir().unwrap();
    planted_files(dir.path());
    sspca(&["gen-groups", "--grid-2d", "4x4", "--out", "g.txt"], dir.path());
    sspca(&["fit", "--data", "x.csv", "--groups", "g.txt", "--rank", "2", "--out", "m.txt"], dir.path());
    let out = sspca(&["render", "--model", "m.txt", "--grid-2d", "2x8x1", "--out-prefix", "e_"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = sspca(&["render", "--model", "m.txt", "--grid-2d", "5x5", "--out-prefix", "e_"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
