use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use caedge::{
    hamming, load_image, save_image, BinaryGrid, Individual, PbmFormat, Population,
    PopulationFile, RuleTable,
};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_caedge"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn caedge(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn evolve_args<'a>(dir: &'a Path, tag: &str, extra: &[&'a str]) -> Vec<String> {
    let mut args: Vec<String> = [
        "evolve", "--start", p(&data("start16.pbm")), "--goal", p(&data("goal16.pbm")),
        "--pop", "10", "--gens", "5", "--passes", "1", "--seed", "42", "--xover", "2pt",
        "--mutation", "type1",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for (flag, file) in [("--out", "pop.capop"), ("--stats", "run.csv"), ("--result", "best.pbm")] {
        args.push(flag.into());
        args.push(dir.join(format!("{tag}-{file}")).to_string_lossy().into_owned());
    }
    // Later flags replace the defaults rather than repeating them.
    let mut rest = extra.iter().peekable();
    while let Some(flag) = rest.next() {
        let value = rest.next_if(|v| !v.starts_with("--"));
        match (args.iter().position(|a| a == flag), value) {
            (Some(i), Some(v)) => args[i + 1] = v.to_string(),
            (_, v) => args.extend(std::iter::once(flag).chain(v).map(|s| s.to_string())),
        }
    }
    args
}

fn csv_rows(path: &Path) -> Vec<(u64, u64, f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("generation,best_fitness,avg_fitness,elapsed_seconds")
    );
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn evolve_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(evolve_args(dir.path(), "a", &[])).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 5);
    assert!(stdout(&out).starts_with("generation=0 best_fitness="));

    let rows = csv_rows(&dir.path().join("a-run.csv"));
    assert_eq!(rows.len(), 5);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.0, i as u64);
        assert!(row.1 as f64 <= row.2);
        assert_eq!(row.3, 0.0);
    }
    assert!(rows.windows(2).all(|w| w[1].1 <= w[0].1));

    let file = PopulationFile::load(dir.path().join("a-pop.capop")).unwrap();
    assert_eq!(file.population.len(), 10);
    assert_eq!(file.population.generation, 5);

    // The result image scores exactly the final best fitness.
    let result = load_image(dir.path().join("a-best.pbm")).unwrap();
    let goal = load_image(data("goal16.pbm")).unwrap();
    assert_eq!(hamming(&result, &goal).unwrap(), rows[4].1);
}

#[test]
fn evolve_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for tag in ["x", "y"] {
        assert!(bin().args(evolve_args(dir.path(), tag, &[])).status().unwrap().success());
    }
    for file in ["run.csv", "pop.capop", "best.pbm"] {
        assert_eq!(
            std::fs::read(dir.path().join(format!("x-{file}"))).unwrap(),
            std::fs::read(dir.path().join(format!("y-{file}"))).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn evolve_with_timing_records_elapsed() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(evolve_args(dir.path(), "t", &["--timing", "--gens", "2"]))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("elapsed_seconds="));
    assert_eq!(csv_rows(&dir.path().join("t-run.csv")).len(), 2);
}

#[test]
fn evolve_resumes_from_saved_population() {
    let dir = tempfile::tempdir().unwrap();
    assert!(bin().args(evolve_args(dir.path(), "r", &[])).status().unwrap().success());
    let first = csv_rows(&dir.path().join("r-run.csv"));
    let saved = dir.path().join("r-pop.capop");
    let out = bin()
        .args(evolve_args(dir.path(), "r2", &["--resume", p(&saved)]))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let second = csv_rows(&dir.path().join("r2-run.csv"));
    assert_eq!(second[0].0, 5);
    assert!(second[0].1 <= first[4].1);
}

#[test]
fn evolve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("small.pbm");
    save_image(&BinaryGrid::zeros(8, 8).unwrap(), &small, PbmFormat::P1).unwrap();
    let out = caedge(&["evolve", "--start", p(&data("start16.pbm")), "--goal", p(&small)]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);

    let missing = caedge(&["evolve", "--start", "/nope.pbm", "--goal", p(&small)]);
    assert_eq!(missing.status.code(), Some(2));

    let bad_pop = caedge(&[
        "evolve", "--start", p(&data("start16.pbm")), "--goal", p(&data("goal16.pbm")),
        "--pop", "3",
    ]);
    assert_eq!(bad_pop.status.code(), Some(1));

    assert_eq!(caedge(&["evolve", "--bogus"]).status.code(), Some(1));
    assert_eq!(caedge(&["--help"]).status.code(), Some(0));
}

fn write_pop(dir: &Path, members: Vec<Individual>) -> PathBuf {
    let path = dir.join("handmade.capop");
    PopulationFile::new(Population {
        members,
        generation: 0,
        seed: 0,
    })
    .save(&path)
    .unwrap();
    path
}

#[test]
fn apply_identity_and_zero_rules() {
    let dir = tempfile::tempdir().unwrap();
    let pop = write_pop(
        dir.path(),
        vec![
            Individual::new(RuleTable::identity()),
            Individual::new(RuleTable::zeros()),
        ],
    );
    let out_path = dir.path().join("out.pbm");
    let start = data("start16.pbm");
    let run = |index: &str| {
        caedge(&[
            "apply", "--pop", p(&pop), "--index", index, "--image", p(&start), "--out", p(&out_path),
        ])
    };
    assert!(run("0").status.success());
    assert_eq!(load_image(&out_path).unwrap(), load_image(&start).unwrap());
    assert!(run("1").status.success());
    assert_eq!(load_image(&out_path).unwrap(), BinaryGrid::zeros(16, 16).unwrap());

    assert_eq!(run("2").status.code(), Some(1));
    assert_eq!(run("first").status.code(), Some(1));
    // No cached fitness and no goal to rank by.
    assert_eq!(run("best").status.code(), Some(1));

    let with_goal = caedge(&[
        "apply", "--pop", p(&pop), "--image", p(&start), "--goal", p(&start), "--out", p(&out_path),
        "--format", "p4",
    ]);
    assert!(with_goal.status.success());
    assert_eq!(load_image(&out_path).unwrap(), load_image(&start).unwrap());
}

#[test]
fn apply_best_of_run_matches_final_best_fitness() {
    let dir = tempfile::tempdir().unwrap();
    assert!(bin().args(evolve_args(dir.path(), "b", &[])).status().unwrap().success());
    let rows = csv_rows(&dir.path().join("b-run.csv"));
    let out_path = dir.path().join("applied.pbm");
    let out = caedge(&[
        "apply", "--pop", p(&dir.path().join("b-pop.capop")), "--index", "best",
        "--image", p(&data("start16.pbm")), "--out", p(&out_path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let applied = load_image(&out_path).unwrap();
    let goal = load_image(data("goal16.pbm")).unwrap();
    assert_eq!(hamming(&applied, &goal).unwrap(), rows.last().unwrap().1);
}

#[test]
fn score_output_format() {
    let dir = tempfile::tempdir().unwrap();
    let a = BinaryGrid::zeros(4, 4).unwrap();
    let mut cells = a.cells().to_vec();
    for i in [0, 5, 15] {
        cells[i] = 1;
    }
    let b = BinaryGrid::new(4, 4, cells).unwrap();
    let (pa, pb) = (dir.path().join("a.pbm"), dir.path().join("b.pbm"));
    save_image(&a, &pa, PbmFormat::P1).unwrap();
    save_image(&b, &pb, PbmFormat::P4).unwrap();

    let same = caedge(&["score", p(&pa), p(&pa)]);
    assert_eq!(stdout(&same), "distance=0 normalized=0.000000\n");
    let diff = caedge(&["score", p(&pa), p(&pb)]);
    assert_eq!(stdout(&diff), "distance=3 normalized=0.187500\n");
    let sizes = caedge(&["score", p(&pa), p(&data("goal16.pbm"))]);
    assert_eq!(sizes.status.code(), Some(3));
}

#[test]
fn init_pop_structure_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.capop"), dir.path().join("b.capop"));
    for path in [&a, &b] {
        let out = caedge(&["init-pop", "--size", "10", "--seed", "7", "--out", p(path)]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    let individuals = doc["individuals"].as_array().unwrap();
    assert_eq!(individuals.len(), 10);
    for ind in individuals {
        let rules = ind["rules"].as_object().unwrap();
        assert_eq!(rules.len(), 512);
        assert!(rules.keys().all(|k| k.len() == 9));
    }

    for size in ["4", "100"] {
        let out = caedge(&["init-pop", "--size", size, "--seed", "1", "--out", p(&a)]);
        assert!(out.status.success(), "size {size}");
    }
    let too_small = caedge(&["init-pop", "--size", "3", "--seed", "1", "--out", p(&a)]);
    assert_eq!(too_small.status.code(), Some(1));
}

#[test]
fn bench_prints_fixed_schema() {
    let out = caedge(&[
        "bench", "--width", "16", "--height", "16", "--pop", "10", "--passes", "1", "--seed", "3",
        "--reps", "5", "--threads", "1",
    ]);
    assert!(out.status.success());
    let line = stdout(&out);
    let keys: Vec<&str> = line
        .split_whitespace()
        .map(|kv| kv.split('=').next().unwrap())
        .collect();
    assert_eq!(
        keys,
        [
            "width", "height", "pop", "passes", "seed", "reps", "threads", "gen_median_s",
            "gen_min_s", "gen_max_s", "pass_median_s", "evaluations", "cells_per_s",
            "speedup_vs_56.1s"
        ]
    );
    let too_small = caedge(&["bench", "--width", "8", "--height", "8"]);
    assert_eq!(too_small.status.code(), Some(1));
}
