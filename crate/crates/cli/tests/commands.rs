use std::path::Path;
use std::process::{Command, Output};

use bfseg_core::bvol::{read_volume, write_case_dir, write_volume};
use bfseg_core::synth::{make_case, make_outlier_case, SynthParams};
use bfseg_core::uam::fit_population;
use bfseg_core::{Dims, Kind, Mask, Spacing, Volume};
use tempfile::TempDir;

fn bfseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfseg"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = bfseg(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    bfseg(args).status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn params() -> SynthParams {
    SynthParams::new(
        Dims::new(24, 24, 6).unwrap(),
        Spacing::new(1.0, 1.0, 2.5).unwrap(),
    )
    .with_corruption(0.1)
}

/// Writes `n` control cases under `root` and fits statistics from them.
fn fitted(dir: &TempDir, n: u64) -> std::path::PathBuf {
    let root = dir.path().join("val");
    for seed in 0..n {
        let c = make_case(seed, &params()).unwrap();
        write_case_dir(&c, &root.join(&c.case_id)).unwrap();
    }
    let stats = dir.path().join("stats.json");
    ok(&["uam-fit", "--in", p(&root), "--out", p(&stats)]);
    stats
}

#[test]
fn stage1_threshold_line_follows_the_outlier_rule() {
    let dir = TempDir::new().unwrap();
    let stats = fitted(&dir, 10);
    let normal = make_case(50, &params()).unwrap();
    let outlier = make_outlier_case(51, &params()).unwrap();
    for (case, want) in [(normal, "threshold: 0.5"), (outlier, "threshold: 0.2")] {
        let prob = dir.path().join(&case.case_id).join("la_prob");
        write_volume(case.la_prob.as_ref().unwrap(), &prob).unwrap();
        let out_dir = dir.path().join("out").join(&case.case_id);
        let stdout = ok(&[
            "stage1-post",
            "--in",
            p(&prob),
            "--stats",
            p(&stats),
            "--out",
            p(&out_dir),
        ]);
        assert!(stdout.lines().any(|l| l == want), "{stdout}");
        assert!(stdout.contains("entropy_sum: "));
        for name in ["la_mask", "band", "dm"] {
            read_volume(&out_dir.join(name)).unwrap();
        }
        assert_eq!(
            read_volume(&out_dir.join("dm")).unwrap().kind(),
            Kind::Distance
        );
    }
}

#[test]
fn empty_probability_map_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let stats = fitted(&dir, 3);
    let prob = dir.path().join("empty");
    write_volume(
        &Volume::filled(
            Dims::new(8, 8, 2).unwrap(),
            Spacing::unit(),
            Kind::Probability,
            0.0,
        )
        .unwrap(),
        &prob,
    )
    .unwrap();
    let out = bfseg(&[
        "stage1-post",
        "--in",
        p(&prob),
        "--stats",
        p(&stats),
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn missing_inputs_are_bad_input() {
    let dir = TempDir::new().unwrap();
    let stats = fitted(&dir, 3);
    let missing = dir.path().join("nope");
    assert_eq!(
        code(&[
            "stage1-post",
            "--in",
            p(&missing),
            "--stats",
            p(&stats),
            "--out",
            p(dir.path())
        ]),
        2
    );
    assert_eq!(
        code(&[
            "stage1-post",
            "--in",
            p(&missing),
            "--stats",
            p(&missing),
            "--out",
            p(dir.path())
        ]),
        2
    );
    assert_eq!(code(&["stage1-post", "--in", p(&missing)]), 2);
}

#[test]
fn uam_fit_from_manifest_and_volumes() {
    let dir = TempDir::new().unwrap();
    let manifest = dir.path().join("h.txt");
    std::fs::write(&manifest, "# case entropy\na 8\nb 12\n").unwrap();
    let stats = dir.path().join("stats.json");
    let stdout = ok(&["uam-fit", "--in", p(&manifest), "--out", p(&stats)]);
    assert_eq!(stdout, "n: 2\nmean: 10\nstd: 2\n");
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&stats).unwrap()).unwrap();
    assert_eq!(
        (json["mean"].as_f64(), json["std"].as_f64()),
        (Some(10.0), Some(2.0))
    );

    std::fs::write(&manifest, "only 8\n").unwrap();
    assert_eq!(
        code(&["uam-fit", "--in", p(&manifest), "--out", p(&stats)]),
        2
    );

    // Direct volumes and their exported manifest agree.
    let direct = fitted(&dir, 4);
    let sums = dir.path().join("sums.txt");
    let again = dir.path().join("again.json");
    ok(&[
        "uam-fit",
        "--in",
        p(&dir.path().join("val")),
        "--out",
        p(&again),
        "--entropies-out",
        p(&sums),
    ]);
    let via_manifest = dir.path().join("via.json");
    ok(&["uam-fit", "--in", p(&sums), "--out", p(&via_manifest)]);
    let read = |path: &Path| {
        serde_json::from_slice::<serde_json::Value>(&std::fs::read(path).unwrap()).unwrap()
    };
    for key in ["mean", "std"] {
        let (a, b) = (
            read(&direct)[key].as_f64().unwrap(),
            read(&via_manifest)[key].as_f64().unwrap(),
        );
        assert!(
            (a - b).abs() <= 1e-6 * a.abs().max(1.0),
            "{key}: {a} vs {b}"
        );
    }
    assert_eq!(
        std::fs::read(&direct).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn uam_fit_flags_reach_the_stats_file() {
    let dir = TempDir::new().unwrap();
    let manifest = dir.path().join("h.txt");
    std::fs::write(&manifest, "a 8\nb 12\nc 10\n").unwrap();
    let stats = dir.path().join("stats.json");
    ok(&[
        "uam-fit",
        "--in",
        p(&manifest),
        "--out",
        p(&stats),
        "--sigma-factor",
        "2",
        "--two-sided",
    ]);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&stats).unwrap()).unwrap();
    assert_eq!(json["sigma_factor"].as_f64(), Some(2.0));
    assert_eq!(json["two_sided"].as_bool(), Some(true));
    let want = fit_population(&[8.0, 12.0, 10.0]).unwrap();
    assert_eq!(json["std"].as_f64(), Some(want.std));
}

fn loss_inputs(dir: &Path, perfect: bool) -> (String, String) {
    let c = make_case(7, &params()).unwrap();
    let gt = c.la_label.unwrap();
    let prob = if perfect {
        gt.as_volume().clone().with_kind(Kind::Probability).unwrap()
    } else {
        c.la_prob.unwrap()
    };
    let (pp, gp) = (dir.join("prob"), dir.join("gt"));
    write_volume(&prob, &pp).unwrap();
    write_volume(gt.as_volume(), &gp).unwrap();
    (pp.to_str().unwrap().into(), gp.to_str().unwrap().into())
}

fn loss_rows(stdout: &str) -> Vec<(String, String, f64)> {
    stdout
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[0].to_string(), f[1].to_string(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn loss_eval_rows() {
    let dir = TempDir::new().unwrap();
    let (prob, gt) = loss_inputs(dir.path(), false);
    let rows = loss_rows(&ok(&["loss-eval", "--prob", &prob, "--gt", &gt]));
    let ks: Vec<_> = rows
        .iter()
        .filter(|r| r.0 == "topk")
        .map(|r| r.1.as_str())
        .collect();
    assert_eq!(ks, ["100", "20", "10", "5"]);
    let ce = rows.iter().find(|r| r.0 == "ce").unwrap().2;
    let topk100 = rows
        .iter()
        .find(|r| r.0 == "topk" && r.1 == "100")
        .unwrap()
        .2;
    assert_eq!(ce, topk100);

    let (prob, gt) = loss_inputs(dir.path(), true);
    let rows = loss_rows(&ok(&[
        "loss-eval",
        "--prob",
        &prob,
        "--gt",
        &gt,
        "--k",
        "100,10",
    ]));
    assert!(rows.iter().all(|r| r.2 <= 1e-4), "{rows:?}");

    for bad in ["0", "101", "-5"] {
        assert_eq!(
            code(&[
                "loss-eval",
                "--prob",
                &prob,
                "--gt",
                &gt,
                &format!("--k={bad}")
            ]),
            2
        );
    }
}

#[test]
fn focus_masks_have_the_selected_count() {
    let dir = TempDir::new().unwrap();
    let (prob, gt) = loss_inputs(dir.path(), false);
    let focus = dir.path().join("focus");
    ok(&[
        "loss-eval",
        "--prob",
        &prob,
        "--gt",
        &gt,
        "--k",
        "10,2.5",
        "--focus-out",
        p(&focus),
    ]);
    let n = 24 * 24 * 6;
    for (name, k) in [("focus_k10", 10.0), ("focus_k2.5", 2.5)] {
        let m = Mask::from_volume(read_volume(&focus.join(name)).unwrap()).unwrap();
        assert_eq!(m.count(), (k * n as f64 / 100.0f64).ceil() as usize);
    }
}

#[test]
fn stage2_bundles_in_channel_order() {
    let dir = TempDir::new().unwrap();
    let dims = Dims::new(5, 4, 3).unwrap();
    let spacing = Spacing::new(0.625, 0.625, 2.5).unwrap();
    let image = Volume::from_fn(dims, spacing, Kind::Image, |x, y, z| {
        (x * 7 + y * 3 + z) as f32 * 0.1
    })
    .unwrap();
    let dm = Volume::from_fn(dims, spacing, Kind::Distance, |x, _, _| x as f32 - 1.5).unwrap();
    let (ip, dp) = (dir.path().join("image"), dir.path().join("dm"));
    write_volume(&image, &ip).unwrap();
    write_volume(&dm, &dp).unwrap();
    let out = dir.path().join("bundle");
    ok(&[
        "stage2-prep",
        "--image",
        p(&ip),
        "--dm",
        p(&dp),
        "--out",
        p(&out),
    ]);
    let channels = bfseg_core::bundle::read_bundle(&out.join("bundle.json")).unwrap();
    assert_eq!(channels.len(), 2);
    assert_eq!(
        (channels[0].0.as_str(), channels[1].0.as_str()),
        ("image", "distance")
    );
    assert_eq!(channels[0].1, image);
    assert_eq!(channels[1].1, dm);

    let other = dm
        .clone()
        .with_spacing(Spacing::new(0.625, 0.625, 2.0).unwrap());
    write_volume(&other, &dp).unwrap();
    assert_eq!(
        code(&[
            "stage2-prep",
            "--image",
            p(&ip),
            "--dm",
            p(&dp),
            "--out",
            p(&out)
        ]),
        2
    );
    assert_eq!(
        code(&["stage2-prep", "--image", p(&ip), "--out", p(&out)]),
        2
    );
}

#[test]
fn evaluate_identity_and_mismatch() {
    let dir = TempDir::new().unwrap();
    let (gt_root, pred_root) = (dir.path().join("gt"), dir.path().join("pred"));
    for seed in 0..3 {
        let c = make_case(seed, &params()).unwrap();
        write_case_dir(&c, &gt_root.join(&c.case_id)).unwrap();
        write_volume(
            c.la_label.as_ref().unwrap().as_volume(),
            &pred_root.join(&c.case_id).join("la_mask"),
        )
        .unwrap();
    }
    let report = dir.path().join("report");
    let stdout = ok(&[
        "evaluate",
        "--pred",
        p(&pred_root),
        "--gt",
        p(&gt_root),
        "--scar-pred",
        p(&gt_root),
        "--out",
        p(&report),
    ]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(
        lines[0].contains("cavity Dice (%)")
            && lines[0].contains("cavity HD (mm)")
            && lines[0].contains("cavity ASD (mm)")
    );
    assert!(lines[1].contains("Mean") && lines[1].contains("Std"));
    assert!(stdout.contains("scar Dice (%)"));
    for line in std::fs::read_to_string(report.join("cavity.jsonl"))
        .unwrap()
        .lines()
    {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["dice_pct"].as_f64(), Some(100.0));
        assert_eq!(row["hd_mm"].as_f64(), Some(0.0));
        assert_eq!(row["asd_mm"].as_f64(), Some(0.0));
    }
    // Scar probabilities are thresholded at 0.2 and match the labels here.
    for line in std::fs::read_to_string(report.join("scar.jsonl"))
        .unwrap()
        .lines()
    {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["dice_pct"].as_f64(), Some(100.0));
    }
    assert_eq!(
        std::fs::read_to_string(report.join("cavity.txt")).unwrap(),
        stdout.split("\n\n").next().unwrap().to_string() + "\n"
    );

    std::fs::remove_dir_all(pred_root.join("case_0001")).unwrap();
    let out = bfseg(&["evaluate", "--pred", p(&pred_root), "--gt", p(&gt_root)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("case_0001"));
}

#[test]
fn evaluate_hd95_never_exceeds_hd() {
    let dir = TempDir::new().unwrap();
    let (gt_root, pred_root) = (dir.path().join("gt"), dir.path().join("pred"));
    let c = make_case(4, &params()).unwrap();
    write_case_dir(&c, &gt_root.join(&c.case_id)).unwrap();
    let gt = c.la_label.as_ref().unwrap();
    let shifted = Mask::from_fn(gt.dims(), gt.spacing(), |x, y, z| {
        x > 0 && gt.get(x - 1, y, z) || (x == 3 && y == 3)
    });
    write_volume(
        shifted.as_volume(),
        &pred_root.join(&c.case_id).join("la_mask"),
    )
    .unwrap();
    let read = |extra: &[&str]| -> f64 {
        let out = dir.path().join(format!("r{}", extra.len()));
        let mut args = vec![
            "evaluate",
            "--pred",
            p(&pred_root),
            "--gt",
            p(&gt_root),
            "--out",
            p(&out),
        ];
        args.extend(extra);
        ok(&args);
        let line = std::fs::read_to_string(out.join("cavity.jsonl")).unwrap();
        serde_json::from_str::<serde_json::Value>(&line).unwrap()["hd_mm"]
            .as_f64()
            .unwrap()
    };
    let (hd, hd95) = (read(&[]), read(&["--hd95"]));
    assert!(hd95 <= hd && hd > 0.0, "{hd95} vs {hd}");
}

#[test]
fn config_defaults_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bfseg.toml");
    std::fs::write(
        &cfg,
        "jobs = 2\n[synth]\ncases = 2\ndims = [16, 16, 4]\nseed = 40\n",
    )
    .unwrap();
    let out = dir.path().join("s");
    ok(&[
        "synth",
        "--config",
        p(&cfg),
        "--out",
        p(&out),
        "--cases",
        "3",
    ]);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["cases"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["dims"], serde_json::json!([16, 16, 4]));
    assert_eq!(manifest["cases"][0]["case_id"], "case_0040");

    std::fs::write(&cfg, "[synth]\ncasez = 2\n").unwrap();
    assert_eq!(code(&["synth", "--config", p(&cfg), "--out", p(&out)]), 2);
    assert_eq!(code(&["synth", "--out", p(&out), "--dims", "8,8,2"]), 2);
    assert_eq!(code(&["synth", "--out", p(&out), "--jobs", "0"]), 2);
}

#[test]
fn resample_by_kind() {
    let dir = TempDir::new().unwrap();
    let c = make_case(2, &params()).unwrap();
    let (lp, out) = (dir.path().join("label"), dir.path().join("out"));
    write_volume(c.la_label.as_ref().unwrap().as_volume(), &lp).unwrap();
    let stdout = ok(&[
        "resample",
        "--in",
        p(&lp),
        "--out",
        p(&out),
        "--spacing",
        "1,1,1.25",
    ]);
    assert_eq!(stdout.trim(), "24x24x6 -> 24x24x12");
    let r = read_volume(&out).unwrap();
    assert_eq!(
        (r.kind(), r.dims()),
        (Kind::Label, Dims::new(24, 24, 12).unwrap())
    );
    assert_eq!(
        code(&[
            "resample",
            "--in",
            p(&lp),
            "--out",
            p(&out),
            "--spacing",
            "1,1,1",
            "--order",
            "2"
        ]),
        2
    );
}

#[test]
fn config_fuzz_seeds_replay() {
    let dir =
        std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/cli_config");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let parsed = bfseg_cli::Config::parse(&std::fs::read_to_string(&path).unwrap());
        assert_eq!(parsed.is_ok(), name == "full" || name == "empty", "{name}");
        seen += 1;
    }
    assert_eq!(seen, 4);
}
