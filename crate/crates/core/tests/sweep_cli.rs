//! Sweep outputs, manifest handling and the command-line front end.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use stochres::sweep::{cell_dir, emit_plots, run_cell, run_sweep, Manifest, Preset, SweepConfig};
use stochres::Error;

fn small_config(dir: &Path) -> SweepConfig {
    SweepConfig {
        preset: Preset::Custom,
        omega: 0.05,
        epsilons: vec![0.2, 0.25],
        phis: vec![0.0, 90.0],
        n_realizations: 4,
        n_periods: 3.0,
        discard_periods: 1.0,
        phase_bins: 32,
        rate_points: 128,
        seed: 11,
        output_dir: dir.to_path_buf(),
        ..SweepConfig::desk()
    }
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn manifest_lists_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let manifest = run_sweep(&cfg).unwrap();
    assert_eq!(manifest.cells.len(), 4);
    assert_eq!(manifest.master_seed, 11);
    assert_eq!(manifest.config_sha256, cfg.sha256().unwrap());
    assert!(manifest.cells.iter().all(|c| c.ok && c.artifacts.len() == 3));
    for a in manifest.artifacts() {
        let p = dir.path().join(&a.path);
        assert_eq!(fs::metadata(&p).unwrap().len(), a.bytes, "{}", a.path.display());
        assert_eq!(stochres::io::count_rows(&p).unwrap(), a.rows);
    }
    assert_eq!(Manifest::load(&dir.path().join(Manifest::FILE_NAME)).unwrap(), manifest);
    assert_eq!(SweepConfig::load(&dir.path().join("config.toml")).unwrap(), cfg);

    let plots = emit_plots(&manifest, dir.path()).unwrap();
    assert!(plots.iter().all(|p| p.is_file()));
    assert!(plots.iter().any(|p| p.file_name().unwrap() == "measures_p01.csv"));
}

#[test]
fn reruns_are_byte_identical_and_cells_independent() {
    let a = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    run_sweep(&small_config(a.path())).unwrap();
    let ta = tree(a.path());
    fs::remove_dir_all(a.path().join("cells")).unwrap();
    run_sweep(&small_config(a.path())).unwrap();
    assert!(ta == tree(a.path()), "rerun changed the output bytes");

    // one cell on its own matches the same cell inside the full sweep
    let (entry, _) = run_cell(&small_config(c.path()), 1, 1);
    assert!(entry.ok);
    let tc = tree(c.path());
    assert_eq!(tc.len(), 3);
    for (rel, bytes) in tc {
        assert!(rel.starts_with(cell_dir(1, 1)));
        assert_eq!(ta[&rel], bytes, "{}", rel.display());
    }
}

#[test]
fn missing_artifacts_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.epsilons.truncate(1);
    cfg.phis.truncate(1);
    let manifest = run_sweep(&cfg).unwrap();
    let victim = dir.path().join(&manifest.cells[0].artifacts[0].path);
    fs::remove_file(&victim).unwrap();
    match emit_plots(&manifest, dir.path()) {
        Err(Error::MissingArtifact(p)) => assert_eq!(p, victim),
        other => panic!("expected a missing artifact, got {other:?}"),
    }
}

#[test]
fn empty_manifest_gives_empty_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let manifest = Manifest {
        schema_version: 1,
        config_sha256: cfg.sha256().unwrap(),
        master_seed: cfg.seed,
        config: cfg,
        summary: None,
        cells: vec![],
    };
    assert!(emit_plots(&manifest, dir.path()).unwrap().is_empty());
    assert!(!dir.path().join("plots").exists());
}

fn cli(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_stochres")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn command_line_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    let points = cli(&["critical-points", "--phi", "90", "--phase", "0.25"]);
    let rows: Vec<&str> = points.lines().skip_while(|l| !l.starts_with("label,")).collect();
    assert_eq!(rows.len(), 6, "{points}");
    assert!(rows[1].starts_with("well_left,-1.14017542"), "{points}");

    cli(&["rates", "--epsilon", "0.2", "--omega", "0.05", "--points", "64", "--out", &d("rates.csv")]);
    assert_eq!(stochres::io::count_rows(&dir.path().join("rates.csv")).unwrap(), 64);
    cli(&["ctmc", "--rates", &d("rates.csv"), "--grid", "50", "--out", &d("chain.csv")]);
    assert!(stochres::io::count_rows(&dir.path().join("chain.csv")).unwrap() > 0);

    cli(&[
        "simulate", "--epsilon", "0.25", "--omega", "0.05", "--periods", "3", "--out", &d("path.csv"), "--escapes",
        &d("esc.csv"),
    ]);
    assert!(stochres::io::count_rows(&dir.path().join("path.csv")).unwrap() > 100);
    cli(&[
        "escape-times", "--escapes", &d("esc.csv"), "--omega", "0.05", "--histogram", &d("hist.csv"), "--rates",
        &d("rates.csv"),
    ]);
    cli(&["ks-test", "--escapes", &d("esc.csv"), "--rates", &d("rates.csv")]);

    let cfg = SweepConfig { epsilons: vec![0.3, 0.35], ..small_config(&dir.path().join("sweep")) };
    fs::write(dir.path().join("sweep.toml"), cfg.to_toml().unwrap()).unwrap();
    let printed = cli(&["sweep", "--config", &d("sweep.toml"), "--print-config"]);
    assert_eq!(SweepConfig::from_toml(&printed).unwrap(), cfg);
    cli(&["sweep", "--config", &d("sweep.toml"), "--realizations", "2"]);
    let manifest = dir.path().join("sweep").join(Manifest::FILE_NAME);
    let plots = cli(&["emit-plots", "--manifest", manifest.to_str().unwrap()]);
    assert!(plots.lines().count() > 4, "{plots}");

    let folded = dir.path().join("sweep").join(cell_dir(0, 1)).join("folded.csv");
    let m = cli(&["measures", "--folded", folded.to_str().unwrap(), "--force", "0.19", "--epsilon", "0.2"]);
    assert!(m.starts_with("phi,epsilon,m1,m2,m3,m4,m5,m6,"), "{m}");
    assert_eq!(m.lines().count(), 2);

    let bad = Command::new(env!("CARGO_BIN_EXE_stochres")).args(["rates", "--epsilon", "-1"]).output().unwrap();
    assert!(!bad.status.success());
}
