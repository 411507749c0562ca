use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dilab_core::io::codebook_to_json;
use dilab_core::{Codebook, Schedule};
use tempfile::TempDir;

fn dilab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dilab"))
        .args(args)
        .env_remove("DILAB_OUT_DIR")
        .output()
        .expect("failed to spawn dilab")
}

fn run_in(out: &Path, args: &[&str]) -> Output {
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", out.to_str().unwrap()]);
    dilab(&full)
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

const SMALL: &str = "trials = 2000\n[pack]\nn = 32\nmax_codewords = 64\npatience = 200\n";

#[test]
fn pack_is_deterministic_and_seed_sensitive() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", SMALL);
    let cfg = cfg.to_str().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert!(run_in(&a, &["pack", "--config", cfg, "--seed", "5"]).status.success());
    assert!(run_in(&b, &["pack", "--config", cfg, "--seed", "5", "--threads", "1"])
        .status
        .success());
    assert!(run_in(&c, &["pack", "--config", cfg, "--seed", "6"]).status.success());
    assert_eq!(read(a.join("codebook.json")), read(b.join("codebook.json")));
    assert_eq!(read(a.join("summary.txt")), read(b.join("summary.txt")));
    assert_ne!(read(a.join("codebook.json")), read(c.join("codebook.json")));
}

#[test]
fn simulate_is_thread_count_invariant() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", &format!("{SMALL}[simulate]\nrandom_pairs = 3\n"));
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let out1 = run_in(&a, &["simulate", "--config", cfg, "--threads", "1"]);
    assert!(out1.status.success(), "{}", stderr(&out1));
    let out4 = run_in(&b, &["simulate", "--config", cfg, "--threads", "4"]);
    assert!(out4.status.success(), "{}", stderr(&out4));
    for f in ["errors.csv", "summary.txt", "codebook.json"] {
        assert_eq!(read(a.join(f)), read(b.join(f)), "{f}");
    }
}

#[test]
fn slow_simulate_writes_one_row_per_message_and_gain() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        &format!("{SMALL}[simulate]\nflavor = \"slow\"\ngrid_resolution = 5\npairs = [[1, 2]]\n"),
    );
    let out = dir.path().join("o");
    let o = run_in(&out, &["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = read(out.join("errors.csv"));
    // Header, then type I for messages 1 and 2 and type II for (1, 2), each on 5 gains.
    assert_eq!(csv.lines().count(), 1 + 3 * 5, "{csv}");
}

#[test]
fn zero_in_closure_reports_complementarity() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        &format!(
            "{SMALL}[simulate]\nflavor = \"slow\"\nzero_in_closure = true\nfading = {{ family = \"discrete\", points = [{{ value = 0.0, weight = 1.0 }}, {{ value = 1.0, weight = 1.0 }}] }}\ndelta = 0.2\npairs = [[1, 2]]\n"
        ),
    );
    let out = dir.path().join("o");
    let o = run_in(&out, &["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}\n{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("PASS zero_gain_complementarity"), "{}", stdout(&o));
}

#[test]
fn scales_defaults_pass() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    let o = run_in(&out, &["scales"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(read(out.join("dominance.csv")).lines().count(), 1 + 36);
    assert_eq!(read(out.join("regimes.csv")).lines().count(), 1 + 24);
    assert!(stdout(&o).contains("status: pass"));
}

#[test]
fn sweep_marks_vacuous_lower_bounds() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "trials = 500\n[sweep]\nns = [16, 64]\nmax_codewords = 32\npatience = 100\n",
    );
    let out = dir.path().join("o");
    let o = run_in(&out, &["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let csv = read(out.join("sweep.csv"));
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.contains("vacuous"));
    assert_eq!(read(out.join("bounds.csv")).lines().count(), 3);
}

#[test]
fn near_codeword_with_floor_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "trials = 4000\n[near-codeword]\nns = [16, 64]\nmin_sum = 0.9\n",
    );
    let out = dir.path().join("o");
    let o = run_in(&out, &["near-codeword", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS sum_floor"));
    assert_eq!(read(out.join("near_codeword.csv")).lines().count(), 3);
}

#[test]
fn converse_check_fails_on_closely_spaced_codebook() {
    let dir = TempDir::new().unwrap();
    let n = 4;
    let cb = Codebook::from_codewords(
        n,
        1.0,
        0.0,
        Schedule::Achievability,
        vec![vec![0.05, 0.0, 0.0, 0.0], vec![-0.05, 0.0, 0.0, 0.0]],
    )
    .unwrap();
    let path = write(&dir, "cb.json", &codebook_to_json(&cb));
    let out = dir.path().join("o");
    let o = run_in(&out, &["converse-check", "--codebook", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL converse_spacing"));
    assert!(out.join("summary.txt").exists());
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "[pack]\nn = 16\nbogus = 1\n");
    let o = run_in(&dir.path().join("o"), &["pack", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
}

#[test]
fn bad_flag_is_a_config_error() {
    assert_eq!(dilab(&["pack", "--seed", "minus-one"]).status.code(), Some(2));
}

#[test]
fn invalid_parameter_is_a_precondition_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "[pack]\nn = 1\n");
    let o = run_in(&dir.path().join("o"), &["pack", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("pack.n"), "{}", stderr(&o));
    let o = run_in(&dir.path().join("o"), &["scales", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn converse_check_without_codebook_is_a_precondition_error() {
    let dir = TempDir::new().unwrap();
    let o = run_in(&dir.path().join("o"), &["converse-check"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn missing_files_are_io_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = run_in(&dir.path().join("o"), &["pack", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let missing = dir.path().join("nope.json");
    let o = run_in(
        &dir.path().join("o"),
        &["simulate", "--codebook", missing.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn out_dir_comes_from_environment_when_no_flag() {
    let dir = TempDir::new().unwrap();
    let env_out = dir.path().join("env");
    let o = Command::new(env!("CARGO_BIN_EXE_dilab"))
        .arg("scales")
        .env("DILAB_OUT_DIR", &env_out)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_out.join("summary.txt").exists());

    let flag_out = dir.path().join("flag");
    let o = Command::new(env!("CARGO_BIN_EXE_dilab"))
        .args(["scales", "--out", flag_out.to_str().unwrap()])
        .env("DILAB_OUT_DIR", &env_out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(flag_out.join("summary.txt").exists());
}
