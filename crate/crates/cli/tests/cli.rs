use std::path::Path;
use std::process::{Command, Output};

fn scalelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scalelab"))
        .args(args)
        .env_remove("SCALELAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn sample_tree_is_deterministic() {
    let args = ["sample-tree", "--preset", "poisson1", "--n", "1000", "--seed", "7"];
    let a = scalelab(&args);
    let b = scalelab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = scalelab(&["sample-tree", "--preset", "poisson1", "--n", "1000", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("# scalelab "));
    assert!(text.lines().next().unwrap().contains("seed=7"));
    assert_eq!(body(&text).len(), 1001);
}

#[test]
fn decode_worked_example_word() {
    let o = scalelab(&["decode", "--word", "4 8 3 8 9 3 5 8 10"]);
    assert!(o.status.success());
    let mut edges: Vec<(u32, u32)> = body(&stdout(&o))
        .iter()
        .map(|l| {
            let v: Vec<u32> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
            (v[0], v[1])
        })
        .collect();
    edges.sort();
    let mut want = vec![(4, 8), (8, 3), (3, 1), (8, 9), (9, 2), (3, 5), (5, 6), (8, 10), (10, 7)];
    want.sort();
    assert_eq!(edges, want);
}

#[test]
fn encode_inverts_decode() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.txt");
    let o = scalelab(&["decode", "--word", "4 8 3 8 9 3 5 8 10", "--format", "parent"]);
    std::fs::write(&tree, &o.stdout).unwrap();
    let w = scalelab(&["encode", "--as", "word", "--input", tree.to_str().unwrap()]);
    assert!(w.status.success());
    assert_eq!(body(&stdout(&w)), ["4 8 3 8 9 3 5 8 10"]);
}

#[test]
fn exit_codes() {
    assert_eq!(scalelab(&["sample-tree", "--n", "10", "--bogus"]).status.code(), Some(2));
    assert_eq!(scalelab(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(scalelab(&["sample-tree", "--preset", "binary", "--n", "10"]).status.code(), Some(2));
    assert_eq!(scalelab(&["decode", "--word", "0 9"]).status.code(), Some(2));
    assert_eq!(scalelab(&["experiment", "nope"]).status.code(), Some(2));
    assert_eq!(scalelab(&["experiment", "core-size", "--n", "50", "--csv"]).status.code(), Some(2));
    assert_eq!(scalelab(&["--version"]).status.code(), Some(0));
    // The output directory path is an existing regular file.
    let f = tempfile::NamedTempFile::new().unwrap();
    let o = scalelab(&["crt", "--branches", "2", "--out", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

fn experiment(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["experiment", "core-size", "--n", "60", "--s", "1", "--draws", "150", "--seed", "3"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", dir.to_str().unwrap()]);
    scalelab(&args)
}

#[test]
fn experiment_outputs_json_csv_svg() {
    let dir = tempfile::tempdir().unwrap();
    let o = experiment(dir.path(), &["--csv", "--svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("core-size.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "core_size");
    assert_eq!(report["seed"], 3);
    assert_eq!(report["manifest"]["seed"], 3);
    assert_eq!(report["manifest"]["tool"], "scalelab");
    for c in report["checks"].as_array().unwrap() {
        assert!(c["name"].is_string() && c["statistic"].is_number());
        assert!(["pass", "flag", "fail"].contains(&c["verdict"].as_str().unwrap()));
    }

    let csv = std::fs::read_to_string(dir.path().join("core-size.csv")).unwrap();
    assert!(csv.starts_with("# scalelab "));
    let rows = body(&csv);
    assert_eq!(rows[0], "series,index,value");
    assert_eq!(rows[1..].iter().filter(|r| r.starts_with("core_size,")).count(), 150);

    let svg = std::fs::read_to_string(dir.path().join("core-size_core_size.svg")).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("seed=3"));
    assert_well_formed(&svg);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["params"]["experiment"], "core-size");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);

    let again = tempfile::tempdir().unwrap();
    experiment(again.path(), &["--csv", "--svg"]);
    for name in ["core-size.json", "core-size.csv", "core-size_core_size.svg", "manifest.json"] {
        assert_eq!(
            std::fs::read(dir.path().join(name)).unwrap(),
            std::fs::read(again.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

/// Minimal XML check: one root, balanced tags, no stray `<` in text.
fn assert_well_formed(xml: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = xml;
    let mut roots = 0;
    while let Some(i) = rest.find('<') {
        let j = rest[i..].find('>').expect("unterminated tag") + i;
        let tag = &rest[i + 1..j];
        rest = &rest[j + 1..];
        if tag.starts_with('?') || tag.starts_with("!--") {
            continue;
        }
        if let Some(name) = tag.strip_prefix('/') {
            assert_eq!(stack.pop().as_deref(), Some(name.trim()));
        } else {
            let name = tag.split_whitespace().next().unwrap().trim_end_matches('/').to_string();
            if stack.is_empty() {
                roots += 1;
            }
            if !tag.ends_with('/') {
                stack.push(name);
            }
        }
    }
    assert!(stack.is_empty());
    assert_eq!(roots, 1);
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# defaults\nn = 25\nseed = 5\npreset = geometric\n").unwrap();
    let c = cfg.to_str().unwrap();
    let a = stdout(&scalelab(&["sample-tree", "--config", c]));
    assert!(a.lines().next().unwrap().contains("seed=5"));
    assert!(a.contains("preset=geometric"));
    assert_eq!(body(&a).len(), 26);
    let b = stdout(&scalelab(&["sample-tree", "--config", c, "--n", "9"]));
    assert_eq!(body(&b).len(), 10);
    let direct = stdout(&scalelab(&["sample-tree", "--n", "9", "--seed", "5", "--preset", "geometric"]));
    assert_eq!(b, direct);
}

#[test]
fn env_var_sets_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_scalelab"))
        .args(["crt", "--branches", "4", "--seed", "2"])
        .env("SCALELAB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let crt = std::fs::read_to_string(dir.path().join("crt.txt")).unwrap();
    assert!(crt.starts_with("# scalelab 0.1.0 crt seed=2"));
    assert!(dir.path().join("leaves.txt").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn pipelines_between_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let o = scalelab(&["sample-graph", "--n", "30", "--surplus", "2", "--seed", "4"]);
    assert!(o.status.success());
    std::fs::write(&g, &o.stdout).unwrap();
    let k = scalelab(&["core-kernel", "--input", g.to_str().unwrap()]);
    assert!(k.status.success());
    assert!(stdout(&k).contains("output=kernel_paths.txt"));

    let m = scalelab(&["sample-graph", "--n", "12", "--surplus", "1", "--format", "marked-dfq", "--seed", "4"]);
    let md = dir.path().join("m.txt");
    std::fs::write(&md, &m.stdout).unwrap();
    let back = scalelab(&["decode", "--from", "marked-dfq", "--input", md.to_str().unwrap()]);
    assert!(back.status.success(), "{}", String::from_utf8_lossy(&back.stderr));
    let plain = scalelab(&["sample-graph", "--n", "12", "--surplus", "1", "--seed", "4"]);
    assert_eq!(body(&stdout(&back)), body(&stdout(&plain)));
}

#[test]
fn remaining_subcommands_run() {
    for args in [
        vec!["er", "--n", "500", "--lambda", "1"],
        vec!["er", "--n", "500", "--p", "0.002", "--mode", "markov"],
        vec!["limit-process", "--horizon", "4", "--dt", "0.01"],
        vec!["limit-process", "--law", "1:0.75,3:0.25", "--horizon", "4", "--dt", "0.01", "--path"],
        vec!["marchal", "--alpha", "1.5", "--steps", "200", "--output", "distance"],
        vec!["marchal", "--alpha", "2", "--steps", "3"],
        vec!["continuum-graph", "--surplus", "2", "--branches", "3"],
        vec!["continuum-graph", "--surplus", "1", "--method", "glue", "--grid", "40"],
        vec!["sample-tree", "--preset", "uniform", "--n", "20", "--format", "contour"],
    ] {
        let o = scalelab(&args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).starts_with("# scalelab "), "{args:?}");
    }
    assert_eq!(scalelab(&["marchal", "--alpha", "2.5", "--steps", "3"]).status.code(), Some(2));
    assert_eq!(scalelab(&["continuum-graph", "--surplus", "1"]).status.code(), Some(2));
}
