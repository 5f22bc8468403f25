use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nnip-ll"))
        .current_dir(dir)
        .env_remove("NNIP_LL_OUTPUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap()
}

#[test]
fn config_errors_exit_2_with_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        tmp.path(),
        &["train", "--out", "bad", "--set", "train.nope=1"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "config");
    let m = json(tmp.path().join("bad/manifest.json"));
    assert_eq!(m["status"], "error");
    assert_eq!(m["error"]["exit_code"], 2);
    assert!(m["artifacts"].as_object().unwrap().is_empty());
}

#[test]
fn unknown_subcommand_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["landscape3d"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["exit_code"], 2);
}

#[test]
fn missing_files_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        tmp.path(),
        &["eval", "--out", "e", "--set", "model.path=\"absent.json\""],
    );
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(
        json(tmp.path().join("e/manifest.json"))["error"]["kind"],
        "io"
    );
}

#[test]
fn singular_geometry_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert!(run(
        d,
        &["gen-data", "--out", "g", "--set", "generate.frames_per_t=4"]
    )
    .status
    .success());
    let train = run(
        d,
        &[
            "train",
            "--out",
            "t",
            "--set",
            "data.path=\"g/dataset.extxyz\"",
            "--set",
            "train.max_epochs=1",
        ],
    );
    assert!(train.status.success());
    std::fs::write(
        d.join("co.extxyz"),
        "2\nProperties=species:S:1:pos:R:3:forces:R:3 energy=-1.0 temperature=300\n\
         C 0 0 0 0 0 0\nC 0 0 0 0 0 0\n",
    )
    .unwrap();
    let o = run(
        d,
        &[
            "eval",
            "--out",
            "e",
            "--set",
            "data.path=\"co.extxyz\"",
            "--set",
            "model.path=\"t/model.json\"",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(d.join("e/manifest.json"))["status"], "error");
}

#[test]
fn entropy_echoes_its_settings() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("p.csv"),
        "direction,t,loss_energy_mev_per_atom,loss_force_mev_per_ang\n0,-1,5,50\n0,0,0,0\n0,1,5,50\n",
    )
    .unwrap();
    let o = run(
        tmp.path(),
        &[
            "entropy",
            "--out",
            "s",
            "--set",
            "entropy.profile=\"p.csv\"",
        ],
    );
    assert!(o.status.success());
    let e = json(tmp.path().join("s/entropy.json"));
    assert_eq!(e["T_E_mev_per_atom"], 4.0);
    assert_eq!(e["T_F_mev_per_ang"], 40.0);
    assert_eq!(e["alpha"], 0.2);
    let expect = 1.0 + 2.0 * (-1.25f64).exp();
    assert!((e["S_E"].as_f64().unwrap() - expect.ln()).abs() < 1e-12);
}

#[test]
fn noiseless_toy_rows_are_zero_and_runs_repeat() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out| {
        [
            "toy-regression",
            "--out",
            out,
            "--seed",
            "5",
            "--set",
            "toy.repeats=5",
        ]
    };
    assert!(run(tmp.path(), &args("a")).status.success());
    assert!(run(tmp.path(), &args("b")).status.success());
    let csv = std::fs::read_to_string(tmp.path().join("a/toy_regression.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[1] == "0" {
            assert_eq!((f[2], f[3]), ("0", "0"), "{line}");
        }
    }
    let a = json(tmp.path().join("a/manifest.json"));
    let b = json(tmp.path().join("b/manifest.json"));
    assert_eq!(a["artifacts"], b["artifacts"]);
    assert_eq!(a["seeds"]["global"], 5);
}

#[test]
fn output_dir_falls_back_to_env() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nnip-ll"))
        .current_dir(tmp.path())
        .env("NNIP_LL_OUTPUT_DIR", "from-env")
        .args([
            "toy-regression",
            "--set",
            "toy.repeats=2",
            "--set",
            "toy.n_list=[2]",
        ])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("from-env/toy_regression.csv").exists());
}
