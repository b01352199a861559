use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use solwave_core::rlw::{HomoclinicOrbit, ModelParams};

fn solwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(o: &Output, key: &str) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(key).map(|rest| rest.trim().to_string()))
        .unwrap_or_else(|| panic!("no '{key}' in output:\n{}", stdout(o)))
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| if f.is_empty() { None } else { Some(f.parse().unwrap()) })
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn root_values() {
    for (kind, g, want) in [
        ("ks", "2", 1.466998871),
        ("me", "-0.2", 0.3286393802),
        ("ks", "0", 5.0 / 12.0),
    ] {
        let o = solwave(&["melnikov-root", "--kind", kind, "--g", g]);
        assert!(o.status.success());
        let c: f64 = field(&o, "c_star").parse().unwrap();
        assert!((c - want).abs() < 1e-6, "{kind} {g}: {c}");
    }
}

#[test]
fn missing_root_exits_with_two() {
    for branch in ["lower", "upper"] {
        let o = solwave(&["melnikov-root", "--kind", "ks", "--g", "-0.6", "--branch", branch]);
        assert_eq!(o.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&o.stderr).contains("no admissible zero"));
    }
}

#[test]
fn invalid_arguments_exit_with_three() {
    let out = scratch("invalid");
    let out = out.to_str().unwrap();
    let cases: [&[&str]; 5] = [
        &["simulate", "--kind", "ks", "--g", "0", "--tau", "0.2", "--out", out],
        &["melnikov-scan", "--kind", "ks", "--g", "0", "--n", "1", "--out", out],
        &["melnikov-root", "--kind", "xx", "--g", "0"],
        &["wave", "--c", "1", "--g", "0", "--out", out],
        &[],
    ];
    for args in cases {
        assert_eq!(solwave(args).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn wave_profile() {
    let dir = scratch("wave");
    let o = solwave(&[
        "wave",
        "--c",
        "0.5",
        "--g",
        "0",
        "--samples",
        "801",
        "--out",
        dir.to_str().unwrap(),
        "--format",
        "both",
    ]);
    assert!(o.status.success());
    let (header, rows) = read_csv(&dir.join("wave.csv"));
    assert_eq!(header, ["xi", "phi", "y"]);
    assert_eq!(rows.len(), 801);
    let peak = rows
        .iter()
        .max_by(|a, b| a[1].unwrap().total_cmp(&b[1].unwrap()))
        .unwrap();
    assert_eq!(peak[0], Some(0.0));
    assert!((peak[1].unwrap() - 0.5).abs() < 1e-15);
    for end in [&rows[0], &rows[800]] {
        assert!((end[1].unwrap() + 1.0).abs() < 1e-6);
    }
    for svg in ["wave_profile.svg", "wave_phase.svg"] {
        let text = fs::read_to_string(dir.join(svg)).unwrap();
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    }
}

fn scan(kind: &str, g: &str, lo: &str, hi: &str, n: &str, dir: &Path) -> Vec<Vec<Option<f64>>> {
    let o = solwave(&[
        "melnikov-scan",
        "--kind",
        kind,
        "--g",
        g,
        "--c-min",
        lo,
        "--c-max",
        hi,
        "--n",
        n,
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let (header, rows) = read_csv(&dir.join(format!("melnikov_scan_{kind}.csv")));
    assert_eq!(header, ["c", "M_star", "M", "dM_star_dc"]);
    rows
}

fn sign_changes(rows: &[Vec<Option<f64>>]) -> Vec<f64> {
    rows.windows(2)
        .filter_map(|w| match (w[0][1], w[1][1]) {
            (Some(a), Some(b)) if a * b < 0.0 => Some(w[0][0].unwrap()),
            _ => None,
        })
        .collect()
}

#[test]
fn melnikov_scans() {
    let dir = scratch("scan");
    let ks0 = scan("ks", "0", "0.01", "0.99", "99", &dir);
    assert_eq!(ks0.len(), 99);
    let crossings = sign_changes(&ks0);
    assert_eq!(crossings.len(), 1);
    assert!((crossings[0] - 5.0 / 12.0).abs() < 0.011);

    let upper = scan("ks", "-0.2", "1.6325", "6", "200", &dir);
    assert!(upper.iter().all(|r| r[1].unwrap() < 0.0));

    let me2 = scan("me", "2", "0.01", "0.99", "99", &dir);
    let crossings = sign_changes(&me2);
    assert_eq!(crossings.len(), 1);
    assert!((crossings[0] - 0.6801960271).abs() < 0.011);

    // The gap (c - 1)^2 < 0.4 has no loop; those rows keep only c.
    let gap = scan("ks", "-0.2", "0.1", "2", "20", &dir);
    let invalid: Vec<_> = gap.iter().filter(|r| r[1].is_none()).collect();
    assert!(!invalid.is_empty());
    assert!(invalid
        .iter()
        .all(|r| r[0].is_some() && r[2].is_none() && r[3].is_none()));
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    let run = |dir: &Path, threads: &str| {
        let d = dir.to_str().unwrap();
        for args in [
            vec!["melnikov-scan", "--kind", "me", "--g", "0.5", "--n", "300", "--out", d],
            vec!["simulate", "--kind", "ks", "--g", "2", "--eps0", "1e-3", "--out", d],
            vec!["wave", "--c", "2", "--g", "0", "--out", d, "--format", "both"],
        ] {
            let o = Command::new(env!("CARGO_BIN_EXE_solwave"))
                .args(&args)
                .env("SOLWAVE_THREADS", threads)
                .output()
                .unwrap();
            assert!(o.status.success(), "{args:?}");
        }
    };
    run(&a, "1");
    run(&b, "4");
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for name in names {
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn simulated_loops_close_near_the_root() {
    let dir = scratch("simulate");
    let d = dir.to_str().unwrap();
    for args in [
        vec!["simulate", "--kind", "ks", "--g", "0", "--out", d],
        vec!["simulate", "--kind", "me", "--g", "2", "--eps0", "1e-3", "--out", d],
    ] {
        let o = solwave(&args);
        assert!(o.status.success());
        assert_eq!(field(&o, "near_closed"), "yes", "{args:?}");
    }
    let far = solwave(&["simulate", "--kind", "ks", "--g", "0", "--c", "0.8", "--out", d]);
    assert!(far.status.success());
    assert_eq!(field(&far, "near_closed"), "no");
}

#[test]
fn unperturbed_simulation_follows_closed_form() {
    let dir = scratch("closed-form");
    let o = solwave(&[
        "simulate",
        "--kind",
        "ks",
        "--g",
        "0",
        "--tau",
        "0",
        "--eps0",
        "0",
        "--span",
        "12",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let c: f64 = field(&o, "c ").parse().unwrap();
    let orbit = HomoclinicOrbit::new(ModelParams::unperturbed(c, 0.0).unwrap()).unwrap();
    let (_, history) = read_csv(&dir.join("simulate_ks_history.csv"));
    let (_, phase) = read_csv(&dir.join("simulate_ks_phase.csv"));
    assert_eq!(history.len(), phase.len());
    for (h, p) in history.iter().zip(&phase) {
        let xi = h[0].unwrap();
        assert!((h[1].unwrap() - orbit.phi(xi)).abs() < 1e-6);
        assert!((p[1].unwrap() - orbit.y(xi)).abs() < 1e-6);
    }
    assert!(history.windows(2).all(|w| w[1][0] > w[0][0]));
}

#[test]
fn verify_passes_and_catches_fault() {
    let ok = solwave(&["verify", "--seed", "11"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("slow-manifold residual slope"));
    let broken = solwave(&["verify", "--inject-fault", "i2-sign"]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(stdout(&broken).contains("FAIL  Abelian integrals vs quadrature"));
}
