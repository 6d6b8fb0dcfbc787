use std::process::{Command, Output};

fn qirange(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qirange")).args(args).output().unwrap()
}

fn csv_body(out: &Output) -> Vec<String> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn probs_table() {
    let out = qirange(&["probs"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let body = csv_body(&out);
    assert_eq!(body[0], "quantity,value");
    let p_i: f64 = body.iter().find(|l| l.starts_with("p_i,")).unwrap()[4..].parse().unwrap();
    assert!((p_i * 1.76e6 / 1.98e4 - 1.0).abs() < 0.01);
}

#[test]
fn nt_reproduces_reference_table() {
    let out = qirange(&["nt"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let body = csv_body(&out);
    assert_eq!(body[0], "distance_m,regime,xi,m_delay,n_t");
    let want = [
        ("1.2", "qi", 4, 5.29e4),
        ("3", "qi", 10, 1.76e6),
        ("3.3", "qi", 11, 2.56e6),
        ("6", "qi", 20, 2.73e7),
        ("3", "ci", 10, 3.91e7),
    ];
    for (d, regime, m, nt) in want {
        let row = body
            .iter()
            .find(|l| l.starts_with(&format!("{d},{regime},")))
            .unwrap_or_else(|| panic!("no row for {d} {regime}"));
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[3].parse::<u64>().unwrap(), m);
        let got: f64 = cells[4].parse().unwrap();
        assert!((got / nt - 1.0).abs() < 0.02, "{row}");
    }
}

#[test]
fn zero_attenuation_is_a_degenerate_regime() {
    let out = qirange(&["--set", "channel.xi=0", "probs"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("hint:"));
}

#[test]
fn config_errors_name_the_field() {
    let out = qirange(&["--set", "detectors.eta_i=2", "probs"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("detectors.eta_i"));
    let out = qirange(&["--set", "timing.rep=1", "probs"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qirange(&["detect-sim"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("protocol.seed"));
}

#[test]
fn starved_detectors_violate_the_gaussian_regime() {
    let args = ["--set", "detectors.bg_s=1e-5", "--set", "detectors.bg_i=1e-6", "nt"];
    assert_eq!(qirange(&args).status.code(), Some(4));
    let mut relaxed = args.to_vec();
    relaxed.push("--allow-non-gaussian");
    let out = qirange(&relaxed);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("# warning"));
}

#[test]
fn qa_grid_smoke() {
    let out = qirange(&["qa-grid", "--size", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let body = csv_body(&out);
    assert_eq!(body[0], "n_bar,bg_s,qa");
    let rows: Vec<Vec<f64>> = body[1..]
        .iter()
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[2].is_finite() && r[2] > 0.0));
    // Rows run over n_bar fastest: [lo, hi] for each bg_s.
    assert!(rows[0][2] > rows[1][2] && rows[2][2] > rows[3][2]);
}

#[test]
fn roc_emits_operating_points() {
    let out = qirange(&["roc", "--thresholds", "50"]);
    assert!(out.status.success());
    let body = csv_body(&out);
    assert_eq!(body[0], "d_llv,p_d,p_fa,regime");
    for regime in ["qi", "ci"] {
        assert!(body.iter().any(|l| l.starts_with("0,") && l.ends_with(&format!(",{regime}"))));
    }
}

#[test]
fn simulation_output_is_reproducible() {
    let args = ["--seed", "9", "--set", "channel.geometry.distance_m=1.2", "detect-sim", "--windows", "3"];
    let a = qirange(&args);
    let b = qirange(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let body = csv_body(&a);
    assert_eq!(body[0], "z,llv");
    assert!(String::from_utf8_lossy(&a.stdout).contains("# generator ChaCha8Rng"));
    let c = qirange(&["--seed", "10", "--set", "channel.geometry.distance_m=1.2", "detect-sim", "--windows", "3"]);
    assert_ne!(csv_body(&c), body);
}

#[test]
fn rangefind_and_pcorrect_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.json");
    std::fs::write(
        &cfg,
        r#"{"protocol": {"distances_m": [1.2, 3.0], "seed": 4, "trials": 100, "horizon_shots": 3600000}}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = qirange(&["--config", cfg, "rangefind", "--truth", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let body = csv_body(&out);
    assert_eq!(body[0], "elapsed_shots,distance_m,mu_s,decision");
    // 68 samples at 1.2 m plus 2 at 3 m.
    assert_eq!(body.len() - 1, 3_600_000 / 52_279 + 2);

    let csv_path = dir.path().join("pc.csv");
    let out = qirange(&["--config", cfg, "pcorrect", "--out", csv_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "elapsed_shots,distance_m,p_correct");
    assert!(text.contains("s_star="));
    assert!(!text.contains('\r'));

    let out = qirange(&["--config", cfg, "--set", "protocol.trials=20", "pcorrect"]);
    assert_eq!(out.status.code(), Some(2));
}
