use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const THREE_QUADRATICS: &str = "vars x y z
bits 3
eq 3x^2 + 2y^2 + 5z^2 = 40
eq 2xy - 4yz + 3xz = 13
eq -x^2 + 5y - 7z = -6
";

fn dioph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dioph")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_three_quadratics_peaks_at_seventeen() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "three_quadratics.dioph", THREE_QUADRATICS);
    let out = dir.path().join("trace.csv");
    let o = dioph(&["simulate", s(&input), "--backend", "hybrid", "--steps", "25", "--out", s(&out)]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step,success_probability,backend"));
    let rows: Vec<(usize, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f[2], "hybrid");
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 26);
    let (t, p) = rows.iter().cloned().fold((0, 0.0), |best, r| if r.1 > best.1 { r } else { best });
    assert_eq!(t, 17);
    assert!(p >= 0.999);
}

#[test]
fn verify_three_quadratics_reports_agreement() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "three_quadratics.dioph", THREE_QUADRATICS);
    let o = dioph(&["verify", s(&input)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("marked set = brute-force set"));
}

#[test]
fn verify_samples_large_domains_with_a_seed() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "big.dioph", "vars x y\nbits 10\neq x^2 - 3y = 7\n");
    assert_eq!(dioph(&["verify", s(&input), "--max-domain", "1000"]).status.code(), Some(1));
    let o = dioph(&["verify", s(&input), "--max-domain", "1000", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("sampled: 10000 basis states"));
}

#[test]
fn enumerate_finds_both_roots() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "sq.dioph", "vars x\nbits 4\neq x^2 = 4\n");
    let o = dioph(&["solve", s(&input), "--mode", "enumerate", "--seed", "7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let sols: Vec<&str> = text.lines().filter(|l| l.starts_with("solution")).collect();
    assert_eq!(sols, ["solution (-2)", "solution (2)"]);
}

#[test]
fn solve_modes_return_the_three_quadratics_solution() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "three_quadratics.dioph", THREE_QUADRATICS);
    for mode in ["bbht", "calibrated"] {
        let o = dioph(&["solve", s(&input), "--mode", mode, "--seed", "11", "--budget", "500"]);
        assert!(o.status.success(), "{mode}");
        assert!(stdout(&o).starts_with("solution (3, 2, 1)"), "{mode}");
    }
}

#[test]
fn same_seed_gives_identical_artifacts() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "three_quadratics.dioph", THREE_QUADRATICS);
    let run = |name: &str| {
        let out = dir.path().join(name);
        assert!(dioph(&["solve", s(&input), "--mode", "enumerate", "--seed", "5", "--out", s(&out)]).status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.txt"), run("b.txt"));
    let sweep = |name: &str| {
        let out = dir.path().join(name);
        assert!(dioph(&["sweep", "--instances", "12", "--seed", "9", "--out", s(&out)]).status.success());
        std::fs::read(out).unwrap()
    };
    let a = sweep("a.csv");
    assert_eq!(a, sweep("b.csv"));
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 13);
}

#[test]
fn exit_codes_follow_failure_class() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.dioph", "vars x\nbits 3\neq x^2 = = 2\n");
    assert_eq!(dioph(&["resources", s(&bad)]).status.code(), Some(2));

    let sys3 = write(&dir, "three_quadratics.dioph", THREE_QUADRATICS);
    assert_eq!(dioph(&["simulate", s(&sys3), "--backend", "dense"]).status.code(), Some(3));
    assert_eq!(dioph(&["simulate", s(&sys3), "--max-qubits", "8"]).status.code(), Some(3));

    let unsat = write(&dir, "unsat.dioph", "vars x\nbits 3\neq x^2 = 2\n");
    let o = dioph(&["solve", s(&unsat), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn synth_writes_parseable_circuit_and_cost() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "three_quadratics.dioph", THREE_QUADRATICS);
    let out = dir.path().join("iteration.txt");
    let o = dioph(&["synth", s(&input), "--out", s(&out)]);
    assert!(o.status.success());
    let report = stdout(&o);
    assert!(report.starts_with("qubits 33\n"));
    assert!(report.contains("section diffusion"));
    let circuit = dioph_core::Circuit::from_text(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(circuit.qubit_count(), 33);
}

#[test]
fn resources_lists_registers() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "cubic.dioph", "vars x y\nbits 3\neq x^2 y - 2y = 1\n");
    let o = dioph(&["resources", s(&input)]);
    assert!(o.status.success());
    let text = stdout(&o);
    for reg in ["register S[0]", "register F", "register D_2", "register R", "toffoli_equiv"] {
        assert!(text.contains(reg), "missing {reg} in\n{text}");
    }
}

#[test]
fn thread_cap_is_validated() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "three_quadratics.dioph", THREE_QUADRATICS);
    let o = Command::new(env!("CARGO_BIN_EXE_dioph"))
        .args(["verify", s(&input)])
        .env("DIOPH_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_dioph"))
        .args(["verify", s(&input)])
        .env("DIOPH_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
}
