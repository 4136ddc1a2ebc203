use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dutycycle")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn path_oracle_score() {
    let text = stdout(&["schedule", path_str(&data("path.toml")), "--solver", "oracle"]);
    assert!(text.contains("# score: 2/3 (0.666667)"), "{text}");
    assert!(text.contains("# optimal_labelings: 2"), "{text}");
    assert!(text.ends_with("2: 1\n3: 2\n"), "{text}");
}

#[test]
fn every_solver_reaches_the_path_optimum() {
    for solver in ["greedy", "blll"] {
        let text = stdout(&["schedule", path_str(&data("path.toml")), "--solver", solver]);
        assert!(text.contains("# score: 2/3 (0.666667)"), "{solver}: {text}");
    }
}

#[test]
fn coverage_text() {
    let text = stdout(&["build-coverage", path_str(&data("path.toml"))]);
    assert!(text.ends_with("2: 1-2,2-3\n3: 2-3,3-4\n"), "{text}");
    assert!(text.contains("# y-elements: 3\n"));
}

#[test]
fn isolation_covers_target_pairs() {
    let text = stdout(&["build-coverage", path_str(&data("star.toml")), "--objective", "isolation"]);
    // 7 node targets give 21 pairs.
    assert!(text.contains("# y-elements: 21\n"), "{text}");
    // The hub reaches every node, so it separates no pair.
    assert!(text.contains("\nc: \n1: c|2,c|3,c|4,c|5,c|6,1|2,1|3,1|4,1|5,1|6\n"), "{text}");
}

#[test]
fn malformed_instances_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "k = 2\nsigma = 1\nedges = [[\"a\", \"b c\"]]\n").unwrap();
    let out = run(&["schedule", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("b c"));

    std::fs::write(&bad, "k = 2\nsigma = 1\nsensors = [\"z\"]\nedges = [[\"a\", \"b\"]]\n").unwrap();
    let out = run(&["schedule", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown node names: z"));

    let out = run(&["schedule", path_str(&data("path.toml")), "--sigma", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_refuses_large_spaces() {
    let out = run(&["schedule", path_str(&data("water1.toml")), "--solver", "oracle"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("refused:"));
}

#[test]
fn lifetime_statuses() {
    let text = stdout(&["lifetime", path_str(&data("petersen.toml")), "--sigma", "1", "--mode", "config", "--k", "3"]);
    assert!(text.contains("# status: nonexistent"), "{text}");

    let text = stdout(&["lifetime", path_str(&data("star.toml")), "--sigma", "3"]);
    assert!(text.contains("# lifetime: 6\n"), "{text}");
    assert!(text.contains("# score: 1 (1.00000)"), "{text}");

    let out = run(&[
        "lifetime",
        path_str(&data("petersen.toml")),
        "--sigma",
        "2",
        "--mode",
        "config",
        "--k",
        "7",
        "--budget",
        "500",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("not found within budget"));
}

#[test]
fn csv_headers() {
    let text = stdout(&[
        "rand-experiment",
        "--family",
        "er",
        "--n",
        "50",
        "--p",
        "0.1",
        "--k-range",
        "1..3",
        "--sigma",
        "2",
        "--trials",
        "5",
    ]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,sigma,closed_form,empirical_mean,stderr,trials");
    // k = 1 is below sigma and skipped.
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2,2,1.00000,1.00000,"));

    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    stdout(&["schedule", path_str(&data("path.toml")), "--iters", "250", "--trace", path_str(&trace)]);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("iteration,phi,best_phi,score,best_score\n"));
    assert!(text.ends_with("\n250,4,4,0.666667,0.666667\n"), "{text}");

    let text = stdout(&[
        "place-and-schedule",
        path_str(&data("star.toml")),
        "--devices",
        "2",
        "--k-range",
        "2..3",
        "--iters",
        "500",
    ]);
    assert!(text.starts_with("k,D_joint,D_twostage\n2,"), "{text}");
}

#[test]
fn same_seed_same_bytes() {
    let water = data("water1.toml");
    let args = ["schedule", path_str(&water), "--iters", "2000", "--seed", "7"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let other = stdout(&["schedule", path_str(&water), "--iters", "2000", "--seed", "8"]);
    assert_ne!(a, other);
}

#[test]
fn import_and_generate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("net.txt");
    std::fs::write(&edges, "# junction pipe list\nJ1 J2 120.5\nJ2 J3\nJ3 J1\nJ3 R1\n").unwrap();
    let inst = dir.path().join("net.toml");
    stdout(&["import-edgelist", path_str(&edges), "-o", path_str(&inst)]);
    let text = stdout(&["build-coverage", path_str(&inst)]);
    assert!(text.contains("# devices: 4\n# y-elements: 4\n"), "{text}");
    assert!(text.contains("R1: J3,R1\n"), "{text}");

    let generated = stdout(&["generate", "--family", "pipe", "--n", "20", "--edges", "25", "--seed", "3"]);
    std::fs::write(&inst, &generated).unwrap();
    let text = stdout(&["build-coverage", path_str(&inst)]);
    assert!(text.contains("# devices: 20\n"), "{text}");
    let file: toml::Table = generated.parse().unwrap();
    assert_eq!(file["edges"].as_array().unwrap().len(), 25);
}

#[test]
fn water_stand_ins_have_the_stated_size() {
    for (name, nodes, edges) in [("water1.toml", 126, 168), ("water2.toml", 270, 366)] {
        let text = std::fs::read_to_string(data(name)).unwrap();
        let file: toml::Table = text.parse().unwrap();
        assert_eq!(file["nodes"].as_array().unwrap().len(), nodes, "{name}");
        assert_eq!(file["edges"].as_array().unwrap().len(), edges, "{name}");
    }
}

#[test]
fn verify_passes() {
    let text = stdout(&["verify", "--potential-game", "--seed", "5"]);
    assert!(text.contains("potential-game:") && text.contains("[PASS]"), "{text}");
}
