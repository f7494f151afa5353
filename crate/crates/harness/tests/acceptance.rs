//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line on stderr,
//! bypassing output capture, and fails when its criterion fails.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use bergman_harness::experiments::{atoms, equivalence, geometry, kernels, measures, weak};
use bergman_harness::{ExperimentConfig, ReportRow};
use bergman_core::operators::KernelKind;

fn verdict(index: u32, name: &str, rows: &[ReportRow], extra: Option<(bool, String)>) {
    let failed: Vec<&ReportRow> = rows.iter().filter(|r| !r.pass).collect();
    let extra_ok = extra.as_ref().is_none_or(|(ok, _)| *ok);
    let ok = failed.is_empty() && extra_ok && !rows.is_empty();
    let mut line = format!(
        "criterion {index:>2} {name}: {} ({} rows, {} failing)",
        if ok { "PASS" } else { "FAIL" },
        rows.len(),
        failed.len()
    );
    if let Some((_, note)) = &extra {
        line.push_str(&format!("; {note}"));
    }
    let mut err = std::io::stderr().lock();
    writeln!(err, "{line}").unwrap();
    for r in &failed {
        writeln!(err, "    failing {} [{}] lhs={:e} rhs={:e} ratio={:e}", r.experiment, r.params, r.lhs, r.rhs, r.ratio)
            .unwrap();
    }
    drop(err);
    assert!(ok, "{line}");
}

fn cfg() -> ExperimentConfig {
    ExperimentConfig::default()
}

#[test]
fn automorphism_suite() {
    let c = cfg();
    let start = Instant::now();
    let mut rows = Vec::new();
    for n in 1..=3 {
        rows.extend(geometry::automorphisms(&c, n).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(1, "automorphisms", &rows, Some((secs < 5.0, format!("runtime {secs:.3}s"))));
}

#[test]
fn metric_suite() {
    let c = cfg();
    let mut rows = Vec::new();
    for n in 1..=3 {
        rows.extend(geometry::metrics(&c, n).unwrap());
    }
    rows.extend(geometry::hand_values());
    verdict(2, "metrics", &rows, None);
}

#[test]
fn measure_suite() {
    let c = cfg();
    let mut rows = Vec::new();
    for n in 1..=3 {
        for alpha in [-0.5, 0.0, 1.0, 2.5] {
            rows.extend(measures::normalization(&c, n, alpha).unwrap());
        }
    }
    rows.extend(measures::constants());
    rows.extend(measures::tau_ball(&c).unwrap());
    verdict(3, "measures", &rows, None);
}

#[test]
fn ball_volume_window() {
    let c = cfg();
    let mut rows = Vec::new();
    for n in 1..=2 {
        for gamma in [0.5, 1.0, 2.0] {
            rows.extend(measures::volume_window(&c, n, 0.0, gamma).unwrap());
        }
        for gamma in [0.5, 1.0] {
            rows.extend(measures::comparability(&c, n, gamma).unwrap());
        }
    }
    verdict(4, "ball volume window and comparability", &rows, None);
}

#[test]
fn jacobian_suite() {
    let c = cfg();
    let mut rows = Vec::new();
    for n in 1..=2 {
        rows.extend(measures::change_of_variables(&c, n).unwrap());
    }
    rows.extend(measures::grid_oracle(&c).unwrap());
    verdict(5, "invariance and change of variables", &rows, None);
}

#[test]
fn projection_suite() {
    let c = cfg();
    let mut rows = Vec::new();
    for n in 1..=2 {
        for alpha in [0.0, 1.0] {
            rows.extend(measures::projection(&c, n, alpha).unwrap());
        }
    }
    verdict(6, "projection", &rows, None);
}

#[test]
fn kernel_estimates() {
    let c = cfg();
    let mut rows = Vec::new();
    for n in 1..=2 {
        rows.extend(kernels::scalar_size(&c, n, 0.0).unwrap());
        rows.extend(kernels::scalar_smoothness(&c, n, 0.0).unwrap());
        rows.extend(kernels::unfiltered_control(&c, n).unwrap());
    }
    for kind in [KernelKind::Tent, KernelKind::Radial, KernelKind::Grad, KernelKind::InvGrad] {
        rows.extend(kernels::vector_constants(&c, 2, kind).unwrap());
    }
    verdict(7, "kernel size and smoothness", &rows, None);
}

#[test]
fn enorm_identities() {
    let c = cfg();
    let mut rows = Vec::new();
    for kind in [KernelKind::Tent, KernelKind::Radial, KernelKind::Grad, KernelKind::InvGrad] {
        rows.extend(kernels::enorm(&c, 2, kind).unwrap());
    }
    verdict(8, "E-norm identities", &rows, None);
}

#[test]
fn norm_equivalence() {
    let rows = equivalence::run(&cfg()).unwrap();
    verdict(9, "norm equivalence sweeps", &rows, None);
}

#[test]
fn atom_suite() {
    let rows = atoms::run(&cfg()).unwrap();
    verdict(10, "atoms and synthesis", &rows, None);
}

#[test]
fn weak_type_profile() {
    let rows: Vec<ReportRow> = weak::run(&cfg())
        .unwrap()
        .into_iter()
        .filter(|r| r.experiment.starts_with("weak.tube_bump"))
        .collect();
    verdict(11, "weak-type profile", &rows, None);
}

#[test]
fn determinism() {
    let exe = env!("CARGO_BIN_EXE_bergman");
    let kernels: &[&str] = &["verify", "kernels", "--n", "1", "--trials", "2000"];
    let atoms: &[&str] = &["atoms", "--count", "4", "--trials", "300"];
    let outputs: Vec<Vec<u8>> = [(kernels, "1"), (kernels, "3"), (atoms, "1"), (atoms, "4")]
        .iter()
        .map(|(args, threads)| {
            Command::new(exe)
                .args(*args)
                .env("RAYON_NUM_THREADS", threads)
                .output()
                .expect("binary runs")
                .stdout
        })
        .collect();
    let same_kernels = outputs[0] == outputs[1] && !outputs[0].is_empty();
    let same_atoms = outputs[2] == outputs[3] && !outputs[2].is_empty();
    let rows = vec![ReportRow::new("determinism.csv_bytes", "runs=4")
        .lhs((same_kernels && same_atoms) as u8 as f64, 0.0)
        .rhs(1.0, 0.0)
        .with_ratio()
        .pass(same_kernels && same_atoms)];
    verdict(12, "determinism", &rows, None);
}
