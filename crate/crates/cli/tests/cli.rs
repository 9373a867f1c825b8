use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydrosample"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn simulate_y5(out: &Path) {
    let net = fixture("y5.inp");
    let o = run(
        out,
        &[
            "simulate",
            "--network",
            net.to_str().unwrap(),
            "--sources",
            "J1,J2,J3",
            "--rates",
            "40,90",
            "--durations",
            "300,600",
            "--timestep",
            "30",
            "--max-steps",
            "400",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_gft_plan_train_evaluate_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    simulate_y5(out);
    assert_eq!(std::fs::read_dir(out.join("data")).unwrap().count(), 2 * 3 * 4);

    let data = out.join("data");
    let o = run(out, &["gft", data.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 3);

    let o = run(
        out,
        &["plan", "important", out.join("datasets").to_str().unwrap(), "--n", "1"],
    );
    assert_eq!(code(&o), 0);
    let plan = out.join("plans/gft_important-n1.json");
    assert!(plan.exists());

    let train = [
        "train",
        "--plan",
        plan.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--epochs",
        "50",
        "--hidden",
        "8",
        "--seed",
        "4",
    ];
    assert_eq!(code(&run(out, &train)), 0);
    let model = out.join("models/gft_important-n1-seed4.json");
    assert!(model.exists());

    let eval = [
        "evaluate",
        "--plan",
        plan.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--seed",
        "4",
    ];
    let o = run(out, &eval);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("sensitivity"));

    let o = run(out, &["export", out.join("reports").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(out.join("plot_data.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
}

#[test]
fn pipeline_from_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("y5.inp"), dir.path().join("y5.inp")).unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
network = "y5.inp"
sources = ["J1", "J3"]
seeds = [0]

[variants]
rates_mg_s = [40.0, 90.0]
durations_s = [300.0]
timestep_s = 30.0
max_steps = 400

[plans]
budgets = [0.6]
random = false

[decoder]
epochs = 20
learning_rate = 0.003
batch_size = 16
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&out, &["pipeline", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("manifest.json").exists());
    assert!(stdout(&o).contains("laplacian-b3"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let net = fixture("y5.inp");
    let net = net.to_str().unwrap();

    // usage errors and invalid input
    assert_eq!(code(&run(out, &["frobnicate"])), 1);
    assert_eq!(
        code(&run(out, &["plan", "laplacian", "--network", net, "--budget", "2"])),
        1
    );
    assert_eq!(code(&run(out, &["pipeline"])), 1);
    let bad = out.join("bad.inp");
    std::fs::write(&bad, "[JUNCTIONS]\nJ1 x\n").unwrap();
    assert_eq!(
        code(&run(
            out,
            &["plan", "random", "--network", bad.to_str().unwrap(), "--budget", "0.5"]
        )),
        1
    );

    // failures while running
    assert_eq!(
        code(&run(
            out,
            &["plan", "laplacian", "--network", "/no/such.inp", "--budget", "0.5"]
        )),
        2
    );

    assert_eq!(code(&run(out, &["--help"])), 0);
    assert_eq!(
        code(&run(out, &["plan", "laplacian", "--network", net, "--budget", "0.4"])),
        0
    );
}

#[test]
fn random_plan_follows_seed() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixture("looped30.inp");
    let net = net.to_str().unwrap();
    let a = stdout(&run(
        dir.path(),
        &["plan", "random", "--network", net, "--budget", "0.3", "--seed", "9"],
    ));
    let b = stdout(&run(
        dir.path(),
        &["plan", "random", "--network", net, "--budget", "0.3", "--seed", "9"],
    ));
    let c = stdout(&run(
        dir.path(),
        &["plan", "random", "--network", net, "--budget", "0.3", "--seed", "10"],
    ));
    assert_eq!(a, b);
    assert_ne!(a, c);
}
