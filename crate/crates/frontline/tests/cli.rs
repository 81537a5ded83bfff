use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use merodyn::centers::parse_record;
use merodyn::wire::parse_complex;
use merodyn::C64;

fn frontline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frontline"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rho_outside_the_disk_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.png");
    let o = frontline(&[
        "render-param",
        "--rho",
        "1.5,0",
        "--px",
        "64",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("rho outside punctured unit disk"),
        "{}",
        stderr(&o)
    );
    assert!(!out.exists());
}

#[test]
fn unknown_flags_and_bad_numbers_exit_2() {
    assert_eq!(
        frontline(&["render-param", "--bogus", "1"]).status.code(),
        Some(2)
    );
    let o = frontline(&["render-param", "--rho", "0.5,0", "--px", "many"]);
    assert_eq!(o.status.code(), Some(2));
    let o = frontline(&["render-dyn", "--rho", "0.5,0", "--lambda", "0.25,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("singular"));
}

#[test]
fn render_writes_png_and_sidecar_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.png");
    let b = dir.path().join("sub/b.png");
    for out in [&a, &b] {
        let o = frontline(&[
            "render-param",
            "--rho",
            "0.6667,0",
            "--px",
            "48",
            "--max-iter",
            "300",
            "--overlays",
            "c0,poles",
            "--out",
            path(out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let png = fs::read(&a).unwrap();
    assert_eq!(&png[..8], b"\x89PNG\r\n\x1a\n");
    assert_eq!(png, fs::read(&b).unwrap());
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(a.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta["resolution"], serde_json::json!([48, 48]));
    assert_eq!(meta["plane"]["kind"], "parameter");
    assert_eq!(meta["digest"].as_str().unwrap().len(), 64);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.conf");
    fs::write(
        &cfg,
        "# fig 1 view\nrho = 0.6667,0\nlambda = 2,2\npx = 999999\nmax_iter = 200\n",
    )
    .unwrap();
    let out = dir.path().join("d.png");
    let o = frontline(&[
        "render-dyn",
        "--config",
        path(&cfg),
        "--px",
        "32",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta["resolution"], serde_json::json!([32, 32]));
    assert_eq!(meta["budget"]["max_iter"], 200);

    let missing = dir.path().join("nope.conf");
    assert_eq!(
        frontline(&["classify", "--config", path(&missing)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("p.png");
    let o = frontline(&[
        "render-param",
        "--rho",
        "0.5,0",
        "--px",
        "16",
        "--max-iter",
        "200",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn centers_windows() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    let o = frontline(&[
        "centers",
        "--rho",
        "0.6667,0",
        "--window",
        "5,5,5,5",
        "--out",
        path(&empty),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(&empty).unwrap().len(), 0);

    let o = frontline(&["centers", "--rho", "0.6667,0", "--window", "0,-1,1,1"]);
    assert_eq!(o.status.code(), Some(2));

    // the k = 1 order-2 center near 0.97 + 2.22i and some of its children
    let recs = dir.path().join("c.txt");
    let o = frontline(&[
        "centers",
        "--rho",
        "0.6667,0",
        "--window",
        "0.5,1.5,2,3.8",
        "--k-min",
        "-3",
        "--k-max",
        "3",
        "--out",
        path(&recs),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&recs).unwrap();
    let parsed: Vec<_> = text.lines().map(|l| parse_record(l).unwrap()).collect();
    assert!(
        parsed.iter().any(|r| r.itinerary.entries() == [1]),
        "{text}"
    );
    assert!(parsed.iter().any(|r| r.itinerary.len() == 2));
}

#[test]
fn sstar_lines_lie_on_the_circle() {
    let o = frontline(&["sstar", "--rho", "0.6666666666666666,0", "--n", "16"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let pts: Vec<C64> = text.lines().map(|l| parse_complex(l).unwrap()).collect();
    assert_eq!(pts.len(), 16);
    let c = C64::new(1.0 / 3.0, 0.0);
    assert!(pts
        .iter()
        .all(|z| ((z - c).norm() - 1.0 / 3.0).abs() < 1e-4));
}

#[test]
fn classify_and_invert_print_results() {
    let o = frontline(&["invert", "--rho", "0.6667,0", "--lambda", "2,2"]);
    let image = parse_complex(String::from_utf8(o.stdout).unwrap().trim()).unwrap();
    assert!((image - C64::new(0.360656, -0.032787)).norm() < 1e-4);

    let o = frontline(&[
        "classify",
        "--rho",
        "0.6667,0",
        "--lambda",
        "0.6667,0",
        "--max-iter",
        "500",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["class"]["kind"], "ShiftLocus");
}

#[test]
fn tiles_form_a_pyramid() {
    let dir = tempfile::tempdir().unwrap();
    let o = frontline(&[
        "tiles",
        "--rho",
        "0.6667,0",
        "--zoom",
        "1",
        "--max-iter",
        "200",
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for rel in [
        "0/0/0.png",
        "1/0/0.png",
        "1/0/1.png",
        "1/1/0.png",
        "1/1/1.png",
        "meta.json",
    ] {
        assert!(dir.path().join(rel).is_file(), "{rel}");
    }
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["max_zoom"], 1);
    assert_eq!(
        frontline(&["tiles", "--rho", "0.6667,0", "--zoom", "9"])
            .status
            .code(),
        Some(2)
    );
}
