//! Acceptance gates. Each test prints one `criterion N: PASS|FAIL` line
//! (visible with `--nocapture`) before asserting.

use std::process::Command;
use std::time::Instant;

use dirac_lab::algebra::{alpha_anticommutator_defect, pauli_product_check, DEFAULT_H_FACTOR};
use dirac_lab::build2d::Construction2D;
use dirac_lab::params::{AnnulusDecomposition, ConstructionParams, Dimension};
use dirac_lab::specfun::{
    f_m_floor_ratio, f_m_route_gap, legendre_sandwich, F_M_FLOOR, LEGENDRE_Q_MAX, LEGENDRE_Q_MIN,
};
use dirac_lab::verify::{
    carleman_sweep, perturbed_sweep, scan_core, scan_envelope, scan_potential, scan_residual,
    seam_check, Construction,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPSILONS: [f64; 3] = [-0.5, 0.0, 0.5];
const TAUS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
const ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];
const ENERGIES: [f64; 3] = [-1.0, 0.0, 1.0];

fn report(n: u32, pass: bool, detail: &str) {
    println!("criterion {n}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

fn build(dim: Dimension, eps: f64, n0: u64, k_max: usize) -> Construction {
    Construction::build(ConstructionParams::new(eps, n0, k_max, dim).unwrap()).unwrap()
}

fn residual_criterion(n: u32, dim: Dimension, k_max: usize, tol: f64) {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for eps in EPSILONS {
        let c = build(dim, eps, 41, k_max);
        let s = scan_residual(&c, 256, DEFAULT_H_FACTOR, 0).unwrap();
        let core = scan_core(&c, 256, 0).unwrap();
        let ok = s.max <= tol && (3.5..=4.5).contains(&s.ratio) && core.pass;
        pass &= ok;
        detail.push(format!(
            "eps={eps}: max={:.2e} p99={:.2e} ratio={:.3} core={:.1e}",
            s.max, s.p99, s.ratio, core.statistic
        ));
    }
    detail.push(format!("{:.1}s", start.elapsed().as_secs_f64()));
    report(n, pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_01_planar_residual() {
    residual_criterion(1, Dimension::Two, 6, 1e-4);
}

#[test]
fn criterion_02_spatial_residual() {
    residual_criterion(2, Dimension::Three, 4, 1e-3);
}

#[test]
fn criterion_03_decay_envelope() {
    let mut pass = true;
    let mut detail = Vec::new();
    for dim in [Dimension::Two, Dimension::Three] {
        for eps in EPSILONS {
            let c = build(dim, eps, 41, 6);
            let e = scan_envelope(&c, 8, 400, 0).unwrap();
            let ok = (e.p_mean - e.target).abs() <= 0.1 * e.target;
            pass &= ok;
            detail.push(format!("{}D eps={eps}: p={:.3}/{}", dim.as_u32(), e.p_mean, e.target));
        }
    }
    report(3, pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_04_potential_trend() {
    let mut pass = true;
    let mut detail = Vec::new();
    for dim in [Dimension::Two, Dimension::Three] {
        for eps in EPSILONS {
            // In 3D with eps = -0.5 the radii are n^{1/3}; n0 = 405 is the
            // smallest seed that puts every annulus past r = e^2.
            let n0 = if dim == Dimension::Three && eps < 0.0 { 405 } else { 41 };
            let c = build(dim, eps, n0, 6);
            let p = scan_potential(&c, 256, 0).unwrap();
            let eligible = p.per_annulus.iter().flatten().count();
            let ok = p.trend.is_finite() && p.trend <= 2.0;
            pass &= ok;
            detail.push(format!(
                "{}D eps={eps} n0={n0}: trend={:.3} over {eligible} annuli",
                dim.as_u32(),
                p.trend
            ));
        }
    }
    report(4, pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_05_carleman_sweep() {
    let mut pass = true;
    let mut detail = Vec::new();
    for (dim, grid) in [(Dimension::Two, 64), (Dimension::Three, 48)] {
        let start = Instant::now();
        let s = carleman_sweep(dim, &TAUS, &ALPHAS, &ENERGIES, 100, 0, grid).unwrap();
        assert_eq!(s.samples.len(), 100 * 36);
        pass &= s.pass;
        detail.push(format!(
            "{}D grid {grid}: {} samples, min slack={:.3}, {:.1}s",
            dim.as_u32(),
            s.samples.len(),
            s.statistic,
            start.elapsed().as_secs_f64()
        ));
    }
    report(5, pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_06_perturbed_carleman() {
    let params = ConstructionParams::new(0.5, 9, 3, Dimension::Two).unwrap();
    let c = Construction2D::build(params).unwrap();
    let p = perturbed_sweep(&c, &TAUS, &ENERGIES, 4, 0, 1024).unwrap();
    assert_eq!(p.alpha, 1.0);
    let tau_star = p.tau_star;
    let pass = match tau_star {
        Some(t) => p
            .sweep
            .samples
            .iter()
            .filter(|s| s.sample.tau >= t)
            .all(|s| s.sample.passes(10.0)),
        None => false,
    };
    report(
        6,
        pass,
        &format!("eps=0.5 alpha=1 rho={}: tau*={tau_star:?}", p.rho),
    );
    assert!(pass);
}

#[test]
fn criterion_07_exact_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut v = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let a = [v(), v(), v()];
        let b = [v(), v(), v()];
        worst = worst.max(pauli_product_check(a, b));
    }
    let anti = alpha_anticommutator_defect();
    let pass = worst <= 1e-14 && anti == 0.0;
    report(7, pass, &format!("pauli residual={worst:.2e}, anticommutator defect={anti}"));
    assert!(pass);
}

#[test]
fn criterion_08_special_functions() {
    let st = legendre_sandwich(200, 1001);
    let floor = (11..=201)
        .step_by(2)
        .map(|m| f_m_floor_ratio(m).unwrap())
        .fold(f64::INFINITY, f64::min);
    let gap = [3, 5, 41]
        .iter()
        .map(|&m| f_m_route_gap(m, 60).unwrap())
        .fold(0.0, f64::max);
    let pass = st.passes() && floor >= F_M_FLOOR && gap <= 1e-12;
    report(
        8,
        pass,
        &format!(
            "Q l^1.5 min={:.4} (gate {LEGENDRE_Q_MIN}), Q/l(l+1) max={:.12} (gate {LEGENDRE_Q_MAX}), \
             min |F_m| m^1.75={floor:.4} (gate {F_M_FLOOR}), route gap={gap:.1e}",
            st.lower, st.upper
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_structure() {
    let mut pass = true;
    let mut detail = Vec::new();
    let mut worst_seam: f64 = 0.0;
    for dim in [Dimension::Two, Dimension::Three] {
        for eps in EPSILONS {
            let r = seam_check(&build(dim, eps, 41, 6), 1e-10).unwrap();
            pass &= r.pass;
            worst_seam = worst_seam.max(r.statistic);
        }
    }
    detail.push(format!("seam max={worst_seam:.1e}"));
    // Long sequences that reach the asymptotic thresholds n_k >= 100 and
    // rho_k >= 50. For delta = 0 the gap ratio is floor(sqrt n)/sqrt n, so
    // that case starts where the floor error is below 5%.
    for (eps, n0) in [(0.0, 41), (0.5, 401), (-0.5, 125_001)] {
        let p = ConstructionParams::new(eps, n0, 64, Dimension::Two).unwrap();
        let dg = AnnulusDecomposition::build(p).unwrap().diagnostics();
        let d = dg.d_deviation.unwrap();
        let g = dg.gap_deviation.unwrap();
        pass &= d <= 2.0 && g <= 0.05 && dg.rho_ratio <= 2.0;
        detail.push(format!("eps={eps} n0={n0}: |d-sqrt n|={d:.3} gap={g:.4}"));
    }
    report(9, pass, &detail.join("; "));
    assert!(pass);
}

fn run_twice(args: &[&str], file: &str) -> (Vec<u8>, Vec<u8>) {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("{i}-{file}"));
        let status = Command::new(env!("CARGO_BIN_EXE_dirac-lab"))
            .args(args)
            .arg("--out")
            .arg(&path)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0), "{args:?}");
        outs.push(std::fs::read(&path).unwrap());
    }
    let b = outs.pop().unwrap();
    (outs.pop().unwrap(), b)
}

#[test]
fn criterion_10_determinism() {
    let runs = [
        (vec!["verify"], "report.json"),
        (vec!["verify", "--dimension", "3", "--epsilon", "0.5"], "report3.json"),
        (vec!["profile", "--seed", "5"], "profile.csv"),
        (vec!["profile", "--dimension", "3"], "profile3.csv"),
        (vec!["carleman", "--n-spinors", "3", "--seed", "9"], "samples.jsonl"),
    ];
    let mut pass = true;
    for (args, file) in &runs {
        let (a, b) = run_twice(args, file);
        pass &= !a.is_empty() && a == b;
    }
    report(10, pass, &format!("{} command pairs byte-identical", runs.len()));
    assert!(pass);
}
