mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::thermal_steady_state_closed_form;
use lindblad::matrix::{ComplexMatrix, C64};
use tempfile::TempDir;

fn lindblad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindblad"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn matrix_json(m: &ComplexMatrix) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let entries: Vec<String> = m.row(i).iter().map(|z| format!("[{:?}, {:?}]", z.re, z.im)).collect();
            format!("[{}]", entries.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(",\n "))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn model_json(h: &ComplexMatrix, jumps: &[(f64, ComplexMatrix)]) -> String {
    let jumps: Vec<String> = jumps
        .iter()
        .map(|(rate, op)| format!("{{\"rate\": {rate:?}, \"operator\": {}}}", matrix_json(op)))
        .collect();
    format!(
        "{{\n  \"dim\": {},\n  \"hamiltonian\": {},\n  \"jumps\": [{}],\n  \"label\": \"test\"\n}}\n",
        h.rows(),
        matrix_json(h),
        jumps.join(", ")
    )
}

fn damped_qubit_model_file(dir: &TempDir) -> PathBuf {
    let h = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 1.0]]);
    write(dir, "damped_qubit.json", &model_json(&h, &[(0.1, ComplexMatrix::unit(2, 0, 1))]))
}

/// Data rows of a CSV, skipping comments and the header.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn validate_accepts_well_formed_model() {
    let dir = TempDir::new().unwrap();
    let out = lindblad(&["validate", p(&damped_qubit_model_file(&dir))]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("dim: 2"));
    assert!(text.contains("PASS hamiltonian hermiticity"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn validate_flags_non_hermitian_hamiltonian() {
    let dir = TempDir::new().unwrap();
    let h = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 1.0]]);
    let path = write(&dir, "bad.json", &model_json(&h, &[]));
    let out = lindblad(&["validate", p(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL hamiltonian hermiticity"));
}

#[test]
fn malformed_json_exits_two_with_position() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "broken.json", "{\n  \"dim\": 2,\n  \"hamiltonian\": [[[0, 0], [1, 0]],\n");
    let out = lindblad(&["validate", p(&path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));

    let path = write(&dir, "typed.json", "{\"dim\": 2, \"hamiltonian\": [[[0, 0], [1, \"x\"]]]}");
    let out = lindblad(&["validate", p(&path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("hamiltonian"), "{}", stderr(&out));
}

#[test]
fn evolve_decay_column_is_exponential() {
    let out = lindblad(&[
        "evolve", "--preset", "decaying_driven_tls", "--rate", "0.1", "--drive", "0", "--energy", "1",
        "--observable", "p1", "--t-max", "20",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "t,p1,trace_drift,purity");
    let data = rows(&text);
    assert_eq!(data.len(), 20_001);
    for row in data {
        assert!((row[1] - (-0.1 * row[0]).exp()).abs() <= 1e-6);
    }
}

#[test]
fn evolve_closed_model_has_constant_purity() {
    for method in ["rk4", "cn", "spectral"] {
        let out = lindblad(&["evolve", "--preset", "driven_tls", "--method", method, "--observable", "p0", "--observable", "p1"]);
        assert_eq!(out.status.code(), Some(0));
        let data = rows(&stdout(&out));
        let (lo, hi) = data.iter().fold((1.0f64, 0.0f64), |(lo, hi), r| (lo.min(r[1]), hi.max(r[1])));
        assert!(hi - lo > 0.5, "populations should oscillate");
        assert!(data.iter().all(|r| (r[4] - 1.0).abs() <= 1e-9));
    }
}

#[test]
fn evolve_zero_horizon_single_row() {
    let out = lindblad(&["evolve", "--preset", "driven_tls", "--t-max", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&stdout(&out)).len(), 1);
}

#[test]
fn evolve_output_is_deterministic_and_written_to_file() {
    let dir = TempDir::new().unwrap();
    let model = damped_qubit_model_file(&dir);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = lindblad(&["evolve", "--model", p(&model), "--method", "cn", "--t-max", "5", "--observable", "p1", "--out", p(out)]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn evolve_with_matrix_observable_and_initial_state_file() {
    let dir = TempDir::new().unwrap();
    let sz = write(&dir, "sz.json", &matrix_json(&ComplexMatrix::diag_real(&[1.0, -1.0])));
    let rho = write(&dir, "rho.json", &matrix_json(&ComplexMatrix::diag_real(&[0.25, 0.75])));
    let arg = format!("sz={}", p(&sz));
    let out = lindblad(&[
        "evolve", "--preset", "driven_tls", "--drive", "0", "--t-max", "1", "--observable", &arg, "--initial", p(&rho),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("t,sz,trace_drift,purity"));
    assert!(rows(&text).iter().all(|r| (r[1] + 0.5).abs() <= 1e-12));
}

#[test]
fn evolve_divergence_flushes_partial_csv() {
    let out = lindblad(&[
        "evolve", "--preset", "decaying_driven_tls", "--rate", "50", "--dt", "0.5", "--t-max", "100", "--observable", "p1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.lines().last().unwrap().starts_with("# DIVERGED at t="));
    assert!(!rows(&text).is_empty());
    assert!(stderr(&out).contains("warning: dt * spectral radius"));
}

#[test]
fn steady_thermal_matches_closed_form() {
    let (e, omega, gamma, n) = (1.0, 0.5, 0.2, 1.0);
    let out = lindblad(&[
        "steady", "--preset", "thermal_tls", "--energy", "1", "--drive", "0.5", "--rate", "0.2", "--occupation", "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# kernel_dimension=1"));
    let mut got = ComplexMatrix::zeros(2, 2);
    for r in rows(&text) {
        got[(r[0] as usize, r[1] as usize)] = C64::new(r[2], r[3]);
    }
    let closed = thermal_steady_state_closed_form(e, omega, gamma, n);
    assert!(got.max_abs_diff(&closed).min(got.max_abs_diff(&closed.conj())) <= 1e-9);
}

#[test]
fn steady_degenerate_exits_three() {
    let out = lindblad(&["steady", "--preset", "driven_tls"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("kernel_dimension=2"));
}

#[test]
fn spectrum_rows_for_decay_model() {
    let out = lindblad(&["spectrum", "--preset", "decaying_driven_tls", "--drive", "0", "--rate", "0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let data = rows(&stdout(&out));
    let expected = [(0.0, 0.0), (-0.1, 1.0), (-0.1, -1.0), (-0.2, 0.0)];
    assert_eq!(data.len(), 4);
    for (r, (re, im)) in data.iter().zip(expected) {
        assert!((r[0] - re).abs() <= 1e-12 && (r[1] - im).abs() <= 1e-12);
    }
}

#[test]
fn channel_check_identity_and_amplitude_damping() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.json", &matrix_json(&ComplexMatrix::identity(2)));
    let out = lindblad(&["channel", "check", "--kraus", p(&id)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("completeness residual: 0.0000000000000000e0"), "{text}");
    assert!(text.contains("completely positive") && !text.contains("NOT"));

    let ch = lindblad::channels::QuantumChannel::amplitude_damping(0.3);
    let k0 = write(&dir, "k0.json", &matrix_json(&ch.kraus()[0]));
    let k1 = write(&dir, "k1.json", &matrix_json(&ch.kraus()[1]));
    let out = lindblad(&["channel", "check", "--kraus", p(&k0), p(&k1)]);
    assert_eq!(out.status.code(), Some(0));
    let line = stdout(&out).lines().find(|l| l.starts_with("completeness residual")).unwrap().to_string();
    let residual: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(residual <= 1e-15);
}

#[test]
fn channel_check_transposition_is_not_cp() {
    let dir = TempDir::new().unwrap();
    let choi = lindblad::channels::transposition_choi(2);
    let path = write(&dir, "swap.json", &matrix_json(choi.matrix()));
    let out = lindblad(&["channel", "check", "--choi", p(&path)]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("NOT completely positive")).expect(&text);
    let eig: f64 = line.trim_end_matches(')').rsplit(' ').next().unwrap().parse().unwrap();
    assert!((eig + 1.0).abs() <= 1e-12);
}

#[test]
fn channel_choi_round_trip() {
    let dir = TempDir::new().unwrap();
    let ch = lindblad::channels::QuantumChannel::amplitude_damping(0.4);
    let k0 = write(&dir, "k0.json", &matrix_json(&ch.kraus()[0]));
    let k1 = write(&dir, "k1.json", &matrix_json(&ch.kraus()[1]));
    let choi = dir.path().join("choi.json");
    let kraus = dir.path().join("kraus.json");
    assert_eq!(lindblad(&["channel", "choi", "--kraus", p(&k0), p(&k1), "--out", p(&choi)]).status.code(), Some(0));
    assert_eq!(lindblad(&["channel", "from-choi", "--choi", p(&choi), "--out", p(&kraus)]).status.code(), Some(0));
    let out = lindblad(&["channel", "check", "--kraus", p(&kraus)]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let back: Vec<Vec<Vec<[f64; 2]>>> = serde_json::from_str(&std::fs::read_to_string(&kraus).unwrap()).unwrap();
    assert_eq!(back.len(), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(lindblad(&["evolve"]).status.code(), Some(2));
    assert_eq!(lindblad(&["evolve", "--preset", "thermal_tls", "--rate", "-1"]).status.code(), Some(2));
    assert_eq!(lindblad(&["spectrum", "--model", "/nonexistent/model.json"]).status.code(), Some(2));
}
