use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nls-star")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn header(out: &Output) -> String {
    stdout(out).lines().next().unwrap_or_default().to_string()
}

const POINT: [&str; 10] = ["--N", "3", "--k", "1", "--alpha", "-1", "--omega", "4", "--p", "3"];

fn with_point(cmd: &str, extra: &[&str]) -> Vec<String> {
    std::iter::once(cmd).chain(POINT).chain(extra.iter().copied()).map(String::from).collect()
}

fn run_owned(args: &[String]) -> Output {
    run(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert!(stdout(&run(&["--help"])).contains("selftest"));
}

#[test]
fn unknown_flag_prints_usage() {
    let out = run(&["verdict", "--bogus", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("Usage"));
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&[])), 1);
}

#[test]
fn verdict_for_the_cubic_well() {
    let out = run_owned(&with_point("verdict", &[]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["kind"], "cross-check");
    assert_eq!(v["data"]["numerical"]["verdict"], "UnstableInE");
    assert_eq!(v["data"]["analytic"]["verdict"], "UnstableInE");
    assert_eq!(v["provenance"]["origin"], "numerical");
}

#[test]
fn repulsive_profile_needs_negative_alpha() {
    let out = run(&["profile", "--family", "repulsive", "--N", "3", "--alpha", "1", "--omega", "0.05", "--p", "3"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("alpha"));
}

#[test]
fn validation_messages_reach_the_user() {
    let cases: [&[&str]; 6] = [
        &["profile", "--N", "3", "--alpha", "-1", "--omega", "4", "--p", "3"],
        &["profile", "--N", "3", "--k", "1", "--alpha", "-1", "--omega", "0.5", "--p", "3"],
        &["profile", "--N", "3", "--k", "1", "--alpha", "-1", "--omega", "4", "--p", "0.5"],
        &["profile", "--family", "kirchhoff", "--N", "3", "--omega-rel", "2", "--p", "3"],
        &["evolve", "--N", "3", "--k", "1", "--alpha", "-1", "--omega", "4", "--p", "3", "--M", "100", "--dt", "5"],
        &["evolve", "--N", "3", "--k", "1", "--alpha", "-1", "--omega", "4", "--p", "3", "--M", "100", "--eps", "-1"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(stderr(&out).starts_with("error:"), "{args:?}");
    }
}

#[test]
fn conflicting_sweep_is_a_numerical_error() {
    // on 200 intervals the kernel threshold swallows small eigenvalues
    let out = run(&["sweep", "--M", "200"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains(",conflict,"));
    assert!(stderr(&out).contains("conflicting verdicts"));
}

#[test]
fn critical_frequency_is_inconclusive() {
    let w = nls_star::slope::find_critical_omega::<f64>(3, 1, -1.0, 7.0).unwrap().unwrap();
    let omega = format!("{w:?}");
    let out = run(&["verdict", "--N", "3", "--k", "1", "--alpha", "-1", "--omega", &omega, "--p", "7", "--M", "500"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["data"]["analytic"]["verdict"], "Inconclusive");
}

#[test]
fn csv_headers() {
    let out = run_owned(&with_point("profile", &["--M", "50"]));
    assert_eq!(header(&out), "edge,x,value,imag");
    assert_eq!(stdout(&out).lines().count(), 1 + 3 * 51);

    let out = run(&["slope", "--N", "3", "--k", "1", "--alpha", "-1", "--omega", "2,4", "--p", "3"]);
    assert_eq!(header(&out), "omega,J,J_tilde,p_omega");
    assert!(stdout(&out).lines().nth(2).unwrap().starts_with("4.0000000000000000e0,1.5000000000000000e0,"));

    let out = run_owned(&with_point("evolve", &["--M", "100", "--T", "0.2"]));
    assert_eq!(header(&out), "t,mass,energy,d");

    let out = run_owned(&with_point("verdict", &["--format", "csv", "--M", "500"]));
    assert!(header(&out).starts_with("N,k,alpha,omega,p,family,"));
}

#[test]
fn spectrum_reports_both_operators() {
    let out = run_owned(&with_point("spectrum", &["--M", "1000"]));
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let data = v["data"].as_array().unwrap();
    assert_eq!(data.len(), 2);
    assert_eq!(data[0]["operator"], "L1");
    assert_eq!(data[0]["n_neg"], 2);
    assert_eq!(data[1]["n_neg"], 0);
    assert_eq!(data[0]["lowest"].as_array().unwrap().len(), 10);
    assert_eq!(data[0]["intervals"], 1000);
    assert_eq!(code(&run_owned(&with_point("spectrum", &["--sector", "half"]))), 1);
}

#[test]
fn config_file_with_flags_winning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "N = 3\nk = 1\nalpha = -1\nomega = 9.0\np = 3\nM = 500\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = run(&["verdict", "--config", cfg, "--omega", "4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["data"]["numerical"]["spec"]["omega"], 4.0);
    assert_eq!(v["provenance"]["grid"]["intervals"], 500);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "N = 3\nomgea = 4.0\n").unwrap();
    assert_eq!(code(&run(&["verdict", "--config", bad.to_str().unwrap()])), 1);
    assert_eq!(code(&run(&["verdict", "--config", "/nonexistent/run.toml"])), 1);
}

#[test]
fn evolve_config_and_final_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("evolve.toml");
    std::fs::write(
        &cfg,
        "N = 3\nk = 1\nalpha = 1\nomega = 4\np = 2\nL = 8\nM = 200\n\
         dt = 0.02\nT = 0.4\neps = 0.01\nmode = \"scale\"\nseed = 1\ngrowth_threshold = 5\n",
    )
    .unwrap();
    let fin = dir.path().join("final.csv");
    let out = run(&["evolve", "--config", cfg.to_str().unwrap(), "--final", fin.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 1 + 21);
    let text = std::fs::read_to_string(&fin).unwrap();
    assert_eq!(text.lines().next().unwrap(), "edge,x,value,imag");

    let out = run(&["evolve", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["provenance"]["origin"], "empirical");
    assert_eq!(v["kind"], "trace");
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let args = with_point(
            "evolve",
            &["--M", "150", "--T", "0.3", "--mode", "random", "--eps", "0.05", "--seed", seed, "--out", path.to_str().unwrap()],
        );
        assert_eq!(code(&run_owned(&args)), 0);
        std::fs::read(path).unwrap()
    };
    let a = file("a.csv", "7");
    assert_eq!(a, file("b.csv", "7"));
    assert_ne!(a, file("c.csv", "8"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = run_owned(&with_point("verdict", &["--M", "300", "--out", "/nonexistent/dir/v.json"]));
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("i/o"));
}

fn sweep_rows(path: &Path, extra: &[&str]) -> (i32, Vec<String>) {
    let mut args = vec!["sweep", "--config", path.to_str().unwrap()];
    args.extend(extra);
    let out = run(&args);
    (code(&out), stdout(&out).lines().map(String::from).collect())
}

#[test]
fn sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("single.toml");
    std::fs::write(&single, "family = [\"attractive\"]\nN = [3]\nalpha = [-1.0, 1.0]\nomega = [0.5, 4.0]\np = [3.0]\n").unwrap();
    let (c, rows) = sweep_rows(&single, &["--M", "400"]);
    assert_eq!(c, 0);
    assert_eq!(rows.len(), 1 + 4);
    assert_eq!(rows.iter().filter(|r| r.contains(",invalid,")).count(), 2);

    let multi = dir.path().join("multi.toml");
    std::fs::write(
        &multi,
        "[[sweep]]\nfamily = [\"kirchhoff\"]\nN = [3, 4]\nomega = [1.0]\np = [3.0, 6.0]\nintervals = 400\n\n\
         [[sweep]]\nfamily = [\"repulsive\"]\nN = [3]\nalpha = [-3.0]\nomega_rel = [0.5]\np = [3.0]\nintervals = 400\n",
    )
    .unwrap();
    let (c, rows) = sweep_rows(&multi, &[]);
    assert_eq!(c, 0);
    assert_eq!(rows.len(), 1 + 5);
    assert!(rows[1..].iter().all(|r| r.contains("both-agree")));
    assert_eq!(sweep_rows(&multi, &[]).1, rows);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "Nn = [3]\n").unwrap();
    assert_eq!(sweep_rows(&bad, &[]).0, 1);
}

#[test]
fn acceptance_sweep_has_no_conflicts() {
    let out = run(&["sweep"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let source = reader.headers().unwrap().iter().position(|h| h == "source").unwrap();
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert!(rows.len() >= 40);
    assert!(rows.iter().all(|r| &r[source] == "both-agree"));
    assert!(stderr(&out).contains("0 conflicts"));
}

#[test]
fn selftest_single_criterion() {
    let out = run(&["selftest", "--only", "2"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("criterion  2 [PASS]"));
    assert_eq!(code(&run(&["selftest", "--only", "12"])), 1);
}
