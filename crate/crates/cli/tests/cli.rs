use std::process::{Command, Output};

fn adsv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adsv")).args(args).output().expect("run adsv")
}

fn stdout(args: &[&str]) -> String {
    let out = adsv(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn stderr_of_failure(args: &[&str]) -> String {
    let out = adsv(args);
    assert!(!out.status.success());
    String::from_utf8(out.stderr).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    let prefix = format!("{key}=");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap().parse().unwrap()
}

fn table(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("adsv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn derive_presets() {
    let cap = stdout(&["derive", "capillary"]);
    assert_eq!(value(&cap, "mu"), 1.0);
    assert!((value(&cap, "sigma2") - 2.0 * 242.78 / 790.0f64.powi(2)).abs() < 1e-15);
    assert!((value(&cap, "skewness") - 3.0 * (2.0 * 242.78 / 790.0f64.powi(2)).sqrt()).abs() < 1e-12);
    assert!(cap.contains("normal_ok=true"));
    let svc = stdout(&["derive", "svc"]);
    assert!((value(&svc, "sigma2") - 3.371_944_4e-8).abs() < 1e-14);
    let custom = stdout(&["derive", "--d", "10", "--v", "1", "--D", "100"]);
    assert!(custom.contains("normal_ok=false"));
    assert!(stderr_of_failure(&["derive", "--d", "1", "--v", "1", "--D", "0"]).contains("'D'"));
    assert!(stderr_of_failure(&["derive", "aorta"]).starts_with("error:"));
}

#[test]
fn reversed_rows_give_identical_columns() {
    let out = stdout(&["pdf", "--rows", "4,0;2,2;0,4", "--grid", "0:20:41"]);
    let rows = table(&out);
    assert_eq!(rows.len(), 41);
    for r in &rows {
        assert_eq!(r[1], r[3]);
    }
    assert!(stderr_of_failure(&["pdf", "--rows", "4,0;4,0", "--grid", "1"]).contains("identical"));
}

#[test]
fn densities_integrate_to_one() {
    let out = stdout(&["pdf", "--rows", "8,0;4,4", "--noisy", "--m", "4", "--grid", "0:80:80001"]);
    let rows = table(&out);
    for col in 1..=2 {
        let h = rows[1][0] - rows[0][0];
        let inner: f64 = rows[1..rows.len() - 1].iter().map(|r| r[col]).sum();
        let area = h * (inner + 0.5 * (rows[0][col] + rows[rows.len() - 1][col]));
        assert!((area - 1.0).abs() < 1e-4, "column {col}: {area}");
    }
}

#[test]
fn pdf_rejects_bad_requests() {
    assert!(stderr_of_failure(&["pdf", "--rows", "4,0;2,2", "--grid", "0:1:0"]).contains("empty"));
    stderr_of_failure(&["pdf", "--rows", "4,0;2,2", "--m", "3", "--grid", "1"]);
    stderr_of_failure(&["pdf", "--rows", "4,0;2,2", "--noisy", "--m", "1", "--grid", "1"]);
}

#[test]
fn ber_is_reproducible_from_its_own_header() {
    let cfg = scratch("ber.cfg");
    let first = scratch("first.csv");
    std::fs::write(&cfg, format!("N=8\nTe=0.08\ntrials=20000\naxis=pd\nvalues=0,0.1\nout={}\n", first.display())).unwrap();
    assert!(stdout(&["ber", cfg.to_str().unwrap()]).is_empty());
    let text = std::fs::read_to_string(&first).unwrap();
    let again = stdout(&["ber", cfg.to_str().unwrap()]);
    assert!(again.is_empty());
    assert_eq!(std::fs::read_to_string(&first).unwrap(), text);

    let header: String = text.lines().filter(|l| l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let rerun = scratch("rerun.cfg");
    std::fs::write(&rerun, header).unwrap();
    assert_eq!(stdout(&["ber", rerun.to_str().unwrap()]), text);

    let rows = table(&text);
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!((r[1] - r[3]).abs() < 5.0 * r[2] + 1e-3, "{r:?}");
    }
}

#[test]
fn ber_names_the_offending_key() {
    let cfg = scratch("bad.cfg");
    std::fs::write(&cfg, "Te=0.1\ntrails=100\n").unwrap();
    assert!(stderr_of_failure(&["ber", cfg.to_str().unwrap()]).contains("'trails'"));
    std::fs::write(&cfg, "Te=0.1\npd=1.5\n").unwrap();
    assert!(stderr_of_failure(&["ber", cfg.to_str().unwrap()]).starts_with("error:"));
    assert!(stderr_of_failure(&["ber", "/nonexistent/adsv.cfg"]).contains("/nonexistent/adsv.cfg"));
}

#[test]
fn optimize_half_splits() {
    let out = stdout(&["optimize", "--N", "2,3,4,8,16", "--te", "0.1"]);
    let rows = table(&out);
    let splits: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r[0], r[1], r[2])).collect();
    assert_eq!(splits, vec![(2.0, 2.0, 1.0), (3.0, 3.0, 1.0), (4.0, 4.0, 2.0), (8.0, 8.0, 4.0), (16.0, 16.0, 8.0)]);
    for w in rows.windows(2) {
        assert!(w[1][3] < w[0][3]);
    }
}
