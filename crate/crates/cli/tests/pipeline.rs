mod common;

use std::fs;

use common::{dense_fci, dense_hf, json, snapshot, Fixture, SpeciesSpec};
use sqdforge::{Determinant, SampleSet};

fn small_run() -> Fixture {
    Fixture::new(
        &[SpeciesSpec::new("h2", 2, 1, 1, 1), SpeciesSpec::new("h3", 3, 1, 1, 2)],
        "shots = 20000\nseed = 17\nbatches = 4\nmax_iter = 3\n[noise]\np_flip = 0.02\np_depol = 0.1\n",
    )
}

#[test]
fn zero_shots_write_a_valid_empty_file() {
    let fx = small_run();
    fx.run_ok(&["sample", "--shots", "0"]);
    let set = SampleSet::parse(&fs::read_to_string(fx.species_file("h2", "samples.txt")).unwrap()).unwrap();
    assert!(set.is_empty());
    assert_eq!(set.n_shots, 0);
    assert_eq!(json(&fx.species_file("h2", "samples.json"))["diagnostics"]["n_shots"], 0);
}

#[test]
fn sampling_is_byte_identical_across_runs_and_job_counts() {
    let fx = small_run();
    fx.run_ok(&["sample"]);
    let first = snapshot(fx.dir.path());
    fx.run_ok(&["sample", "--jobs", "1"]);
    assert_eq!(first, snapshot(fx.dir.path()));
    fx.run_ok(&["sample", "--seed", "18"]);
    assert_ne!(first, snapshot(fx.dir.path()));
}

#[test]
fn full_depolarization_matches_uniform_rate() {
    let fx = small_run();
    let n = 100_000f64;
    fx.run_ok(&["sample", "-s", "h2", "--shots", "100000", "--p-depol", "1", "--p-flip", "0"]);
    let d = &json(&fx.species_file("h2", "samples.json"))["diagnostics"];
    let p_unif = 4.0 / 16.0;
    assert_eq!(d["p_unif"].as_f64().unwrap(), p_unif);
    let sigma = (p_unif * (1.0 - p_unif) / n).sqrt();
    let p_hw = d["p_hw"].as_f64().unwrap();
    assert!((p_hw - p_unif).abs() <= 3.0 * sigma, "{p_hw}");
}

#[test]
fn full_space_ladder_reaches_fci() {
    let fx = Fixture::new(&[SpeciesSpec::new("h3", 3, 1, 1, 5)], "shots = 50000\nbatches = 2\nzetas = [1.0, 4.0]\n");
    fx.run_ok(&["sample"]);
    fx.run_ok(&["solve"]);
    let top = json(&fx.species_file("h3", "sqd_z1.json"));
    assert_eq!(top["d"], 9);
    let fci = dense_fci(&fx.integrals["h3"]);
    let e = top["result"]["energy"].as_f64().unwrap();
    assert!((e - fci).abs() < 1e-8, "{e} vs {fci}");

    // the full-space state has zero variance, so GEV falls back to it
    fx.run_ok(&["extrapolate", "--method", "gev"]);
    let r = &json(&fx.species_file("h3", "extrap_gev.json"))["result"];
    let est = r["estimate"].as_f64().unwrap();
    match r["method"].as_str().unwrap() {
        "MIN_FALLBACK" => assert!((est - fci).abs() < 1e-8),
        "GEV" => {
            let ci = r["ci"].as_array().unwrap();
            assert!(ci[0].as_f64().unwrap() <= fci && fci <= ci[1].as_f64().unwrap());
        }
        other => panic!("{other}"),
    }
}

#[test]
fn hartree_fock_only_samples_give_hf_energy() {
    let fx = Fixture::new(&[SpeciesSpec::new("h3", 3, 1, 1, 9)], "zetas = [4.0]\n");
    let hf = Determinant::hartree_fock(1, 1);
    let set = SampleSet::from_counts(3, [(hf, 1000)]).unwrap();
    fs::create_dir_all(fx.species_file("h3", "")).unwrap();
    fs::write(fx.species_file("h3", "samples.txt"), set.to_text()).unwrap();
    fx.run_ok(&["solve", "--batches", "1"]);
    let e = json(&fx.species_file("h3", "sqd_z0.json"))["result"]["energy"].as_f64().unwrap();
    let e_hf = dense_hf(&fx.integrals["h3"]);
    assert!((e - e_hf).abs() < 1e-10, "{e} vs {e_hf}");
}

#[test]
fn single_cluster_lmm_equals_ols() {
    let fx = small_run();
    fx.run_ok(&["sample"]);
    fx.run_ok(&["solve", "-s", "h3"]);
    fx.run_ok(&["extrapolate", "-s", "h3", "--method", "ols"]);
    fx.run_ok(&["extrapolate", "-s", "h3", "--method", "lmm", "--clusters", "1"]);
    let ols = &json(&fx.species_file("h3", "extrap_ols.json"))["result"];
    let lmm = &json(&fx.species_file("h3", "extrap_lmm.json"))["result"];
    for key in ["estimate", "ci"] {
        assert_eq!(ols[key], lmm[key], "{key}");
    }
    assert_eq!(ols["diagnostics"]["fit"], lmm["diagnostics"]["fit"]);
}

#[test]
fn missing_wavefunction_store_is_a_data_error() {
    let fx = small_run();
    fx.run_ok(&["sample", "-s", "h2"]);
    fx.run_ok(&["solve", "-s", "h2"]);
    fs::remove_dir_all(fx.species_file("h2", "wfn")).unwrap();
    let out = fx.run(&["extrapolate", "-s", "h2", "--method", "gev"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wavefunction") && err.contains("sqdforge solve"), "{err}");
}

#[test]
fn every_stage_is_deterministic() {
    let fx = small_run();
    let stages: [&[&str]; 6] = [
        &["sample"],
        &["solve"],
        &["extrapolate", "--method", "ols"],
        &["extrapolate", "--method", "gev"],
        &["diagnostics"],
        &["solve", "--zeta", "0.5", "--zeta", "2"],
    ];
    for stage in stages {
        fx.run_ok(stage);
        let first = snapshot(fx.dir.path());
        fx.run_ok(stage);
        assert_eq!(first, snapshot(fx.dir.path()), "{stage:?}");
    }
}

#[test]
fn rerunning_from_surviving_samples_reproduces_outputs() {
    let fx = small_run();
    fx.run_ok(&["sample"]);
    fx.run_ok(&["solve"]);
    fx.run_ok(&["extrapolate", "--method", "gev"]);
    let before = snapshot(fx.dir.path());
    for id in ["h2", "h3"] {
        fs::remove_dir_all(fx.species_file(id, "wfn")).unwrap();
        fs::remove_file(fx.species_file(id, "extrap_gev.json")).unwrap();
        fs::remove_file(fx.species_file(id, "sqd_z0.json")).unwrap();
    }
    fx.run_ok(&["solve"]);
    fx.run_ok(&["extrapolate", "--method", "gev"]);
    assert_eq!(before, snapshot(fx.dir.path()));
}

#[test]
fn usage_and_data_exit_codes() {
    let fx = small_run();
    assert_eq!(fx.run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(fx.run(&["sample", "-s", "nope"]).status.code(), Some(1));
    assert_eq!(fx.run(&["solve"]).status.code(), Some(2));
    let out = fx.run(&["sample", "--p-depol", "2"]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(fx.path("broken.toml"), "species = 3").unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_sqdforge"))
        .args(["sample", fx.path("broken.toml").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diagnostics_report_sizes_and_resources() {
    let fx = small_run();
    fx.run_ok(&["diagnostics", "-s", "h3"]);
    let d = json(&fx.species_file("h3", "diagnostics.json"));
    assert_eq!(d["sector_dimension"], 9);
    assert_eq!(d["ccsd_parameters"], 3);
    assert!(d["samples"].is_null());
    assert_eq!(d["resources"]["n_qubits"], 6);
    fx.run_ok(&["sample", "-s", "h3"]);
    fx.run_ok(&["diagnostics", "-s", "h3"]);
    let d = json(&fx.species_file("h3", "diagnostics.json"));
    assert_eq!(d["samples"]["n_shots"], 20000);
}
