//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64;
use ptsusy_core::coherent::{
    cs_overlap, master_integral, resolution_gram, resolution_kernel, CoherentState, PhasePoint,
};
use ptsusy_core::operators::{interior_grid, verify_operator_identities, ResidualReport, VerifyOptions};
use ptsusy_core::quadrature::{integrate_interval, QuadratureConfig};
use ptsusy_core::wavefn::gram_matrix;
use ptsusy_core::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const ORTHONORMALITY: f64 = 1e-8;
const EIGEN_RESIDUAL: f64 = 1e-6;
const ANNIHILATION: f64 = 1e-9;
const FACTORIZATION: f64 = 1e-9;
const LADDER: f64 = 1e-8;
const MEAN_VALUE: f64 = 1e-8;
const INTERTWINING: f64 = 1e-7;
const PRODUCT: f64 = 1e-9;
const CLOSED_FORM: f64 = 1e-9;
const MASTER: f64 = 1e-10;
const CS_NORM: f64 = 1e-8;
const CS_OVERLAP: f64 = 1e-8;
const CS_SYMMETRY: f64 = 1e-10;
const RESOLUTION: f64 = 1e-6;
const RESOLUTION_GRAM: f64 = 1e-6;

const BUDGET_ORTHONORMALITY: f64 = 60.0;
const BUDGET_EIGEN: f64 = 30.0;
const BUDGET_RESOLUTION: f64 = 120.0;

struct Line {
    id: usize,
    passed: bool,
    text: String,
}

fn line(id: usize, passed: bool, text: String) -> Line {
    Line { id, passed, text }
}

fn grid9() -> Vec<Params> {
    let mut out = Vec::new();
    for nu in [0.5, 1.0, 2.5] {
        for beta in [0.0, 1.0, 3.0] {
            out.push(Params::dimensionless(nu, beta).unwrap());
        }
    }
    out
}

fn within(secs: f64, budget: f64) -> bool {
    secs < budget
}

fn orthonormality() -> Line {
    let start = Instant::now();
    let jobs: Vec<(Params, usize)> = grid9()
        .into_iter()
        .flat_map(|p| (0..=10).map(move |m| (p, m)))
        .collect();
    let worst = jobs
        .par_iter()
        .map(|(p, m)| {
            let (g, _) = gram_matrix(p, *m, 10, 1e-10).unwrap();
            let mut dev = 0.0f64;
            for (i, row) in g.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    dev = dev.max((v - target).norm());
                }
            }
            dev
        })
        .reduce(|| 0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    line(
        1,
        worst < ORTHONORMALITY && within(secs, BUDGET_ORTHONORMALITY),
        format!(
            "orthonormality: max|Gram - I| = {worst:.2e} (< {ORTHONORMALITY:e}) for n,m <= 10 over 9 (nu, beta); {secs:.1} s (< {BUDGET_ORTHONORMALITY} s)"
        ),
    )
}

fn worst_of(reports: &[ResidualReport], names: &[&str]) -> (f64, bool) {
    let mut worst = 0.0f64;
    let mut passed = true;
    for r in reports {
        for name in names {
            for e in r.named(name).filter(|e| e.mandatory) {
                worst = worst.max(e.max_residual);
                passed &= e.passed;
            }
        }
    }
    (worst, passed)
}

fn identity_criteria(reports: &[ResidualReport], secs: f64) -> Vec<Line> {
    let mut out = Vec::new();

    let (eigen, _) = worst_of(reports, &["eigen_residual"]);
    out.push(line(
        2,
        eigen < EIGEN_RESIDUAL && within(secs, BUDGET_EIGEN),
        format!(
            "eigen-residual: max ||(H - E)phi||/|E| = {eigen:.2e} (< {EIGEN_RESIDUAL:e}) for m <= 2, n <= 5; identity suite {secs:.1} s (< {BUDGET_EIGEN} s)"
        ),
    ));

    let (ann, _) = worst_of(reports, &["annihilation"]);
    let (fac, _) = worst_of(reports, &["factorization"]);
    out.push(line(
        3,
        ann < ANNIHILATION && fac < FACTORIZATION,
        format!("annihilation {ann:.2e} (< {ANNIHILATION:e}); factorization on corpus {fac:.2e} (< {FACTORIZATION:e})"),
    ));

    let (ladder, _) = worst_of(reports, &["ladder_chain", "ladder_chain_adjoint"]);
    let (mean, _) = worst_of(reports, &["mean_bdag_b", "mean_b_bdag"]);
    out.push(line(
        4,
        ladder < LADDER && mean < MEAN_VALUE,
        format!("ladder identity {ladder:.2e} (< {LADDER:e}); mean values {mean:.2e} (< {MEAN_VALUE:e})"),
    ));

    let (tw, _) = worst_of(reports, &["intertwining", "chain_intertwining"]);
    out.push(line(
        5,
        tw < INTERTWINING,
        format!("intertwining on corpus {tw:.2e} (< {INTERTWINING:e})"),
    ));

    let (prod, _) = worst_of(reports, &["product_bdag_b", "product_b_bdag"]);
    let mut readings = Vec::new();
    for name in [
        "mixed_product",
        "lambda_lambda_dag",
        "lambda_dag_lambda",
        "theta_theta_dag",
        "theta_dag_theta",
    ] {
        let mut variants: Vec<(String, f64)> = Vec::new();
        for r in reports {
            for e in r.named(name) {
                let v = e.variant.clone().unwrap_or_default();
                match variants.iter_mut().find(|(k, _)| *k == v) {
                    Some((_, w)) => *w = w.max(e.max_residual),
                    None => variants.push((v, e.max_residual)),
                }
            }
        }
        variants.sort_by(|a, b| a.1.total_cmp(&b.1));
        let shown: Vec<String> = variants.iter().map(|(v, w)| format!("{v} {w:.1e}")).collect();
        readings.push(format!("{name}: {}", shown.join(" vs ")));
    }
    out.push(line(
        6,
        prod < PRODUCT,
        format!(
            "product identities {prod:.2e} (< {PRODUCT:e}); informational readings, best first: {}",
            readings.join("; ")
        ),
    ));

    let (cf, _) = worst_of(reports, &["first_level_closed_form"]);
    out.push(line(
        7,
        cf < CLOSED_FORM,
        format!("m = 1 closed form vs ladder-built states {cf:.2e} (< {CLOSED_FORM:e}) for n <= 3"),
    ));
    out
}

fn master() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let cfg = QuadratureConfig::with_tolerances(1e-300, 1e-13);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let delta = rng.gen_range(-1.0..4.0);
        let r = 10.0 * rng.gen::<f64>().sqrt();
        let z = Complex64::from_polar(r, rng.gen_range(0.0..TAU));
        let closed = master_integral(delta, z).unwrap();
        let pow = 2.0 * delta + 2.0;
        let numeric = integrate_interval(
            |x: f64| Ok((std::f64::consts::PI * x).sin().powf(pow) * (z * x).exp()),
            0.0,
            1.0,
            &cfg,
        )
        .unwrap()
        .value;
        worst = worst.max((closed - numeric).norm() / numeric.norm());
    }
    line(
        8,
        worst < MASTER,
        format!("master integral closed form vs quadrature, 50 random (delta, z): max rel {worst:.2e} (< {MASTER:e})"),
    )
}

fn coherent_states() -> Line {
    let cfg = QuadratureConfig::with_tolerances(1e-15, 1e-12);
    let quad = |a: &CoherentState<f64>, b: &CoherentState<f64>| {
        integrate_interval(|x| Ok(a.eval(x)?.conj() * b.eval(x)?), 0.0, 1.0, &cfg)
            .unwrap()
            .value
    };
    let mut by_m: Vec<Vec<CoherentState<f64>>> = vec![Vec::new(); 3];
    for nu in [0.5, 1.0] {
        for beta in [0.0, 2.0] {
            let p = Params::dimensionless(nu, beta).unwrap();
            for (m, states) in by_m.iter_mut().enumerate() {
                for q in [0.2, 0.5, 0.8] {
                    for mom in [-TAU, 0.0, TAU] {
                        states.push(CoherentState::new(&p, m, PhasePoint::new(&p, q, mom).unwrap()).unwrap());
                    }
                }
            }
        }
    }
    let states: Vec<&CoherentState<f64>> = by_m.iter().flatten().collect();
    let norm = states
        .par_iter()
        .map(|s| (quad(s, s).re - 1.0).abs())
        .reduce(|| 0.0, f64::max);
    let pairs: Vec<(&CoherentState<f64>, &CoherentState<f64>)> = by_m
        .iter()
        .flat_map(|group| group.iter().flat_map(move |a| group.iter().map(move |b| (a, b))))
        .collect();
    let (overlap, symmetry, bound) = pairs
        .par_iter()
        .map(|(a, b)| {
            let ab = cs_overlap(a, b).unwrap();
            let ba = cs_overlap(b, a).unwrap();
            ((ab - quad(a, b)).norm(), (ab - ba.conj()).norm(), ab.norm() - 1.0)
        })
        .reduce(
            || (0.0, 0.0, f64::NEG_INFINITY),
            |x, y| (x.0.max(y.0), x.1.max(y.1), x.2.max(y.2)),
        );
    line(
        9,
        norm < CS_NORM && overlap < CS_OVERLAP && symmetry < CS_SYMMETRY && bound < CS_SYMMETRY,
        format!(
            "coherent states: |<eta|eta> - 1| {norm:.2e} (< {CS_NORM:e}); overlap vs quadrature {overlap:.2e} (< {CS_OVERLAP:e}) over {} pairs; Hermiticity {symmetry:.2e}, max |overlap| - 1 = {bound:.2e} (< {CS_SYMMETRY:e})",
            pairs.len()
        ),
    )
}

fn resolution() -> Line {
    let start = Instant::now();
    let jobs: Vec<(Params, usize)> = grid9().into_iter().flat_map(|p| [(p, 0), (p, 1)]).collect();
    let kernel = jobs
        .par_iter()
        .map(|(p, m)| {
            interior_grid(p, 41)
                .into_iter()
                .map(|x| (resolution_kernel(p, *m, x).unwrap() - 1.0).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let gram = jobs
        .par_iter()
        .map(|(p, m)| {
            let g = resolution_gram(p, *m, 4, 32).unwrap();
            let mut dev = 0.0f64;
            for (i, row) in g.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    dev = dev.max((v - if i == j { 1.0 } else { 0.0 }).norm());
                }
            }
            dev
        })
        .reduce(|| 0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    line(
        10,
        kernel < RESOLUTION && gram < RESOLUTION_GRAM && within(secs, BUDGET_RESOLUTION),
        format!(
            "resolution of identity: max|G(x) - 1| = {kernel:.2e} (< {RESOLUTION:e}) on 41 points, m <= 1, 9 (nu, beta); Gram-projected i,j <= 4 {gram:.2e} (< {RESOLUTION_GRAM:e}); {secs:.1} s (< {BUDGET_RESOLUTION} s)"
        ),
    )
}

fn negative_control(options: &VerifyOptions) -> Line {
    let flipped = VerifyOptions {
        sign_flipped: true,
        ..*options
    };
    let reports: Vec<ResidualReport> = grid9()
        .par_iter()
        .map(|p| verify_operator_identities(p, 5, 2, &flipped).unwrap())
        .collect();
    let c3 = reports
        .iter()
        .all(|r| !worst_of(std::slice::from_ref(r), &["annihilation", "factorization"]).1);
    let c5 = reports
        .iter()
        .all(|r| !worst_of(std::slice::from_ref(r), &["intertwining", "chain_intertwining"]).1);
    let (fac, _) = worst_of(&reports, &["factorization"]);
    let (tw, _) = worst_of(&reports, &["intertwining"]);
    line(
        11,
        c3 && c5,
        format!(
            "negative control (sign-flipped W): criterion 3 fails for every (nu, beta): {c3} (factorization up to {fac:.1e}); criterion 5 fails: {c5} (intertwining up to {tw:.1e})"
        ),
    )
}

fn main() {
    let total = Instant::now();
    let mut lines = vec![orthonormality()];

    let options = VerifyOptions::default();
    let start = Instant::now();
    let reports: Vec<ResidualReport> = grid9()
        .par_iter()
        .map(|p| verify_operator_identities(p, 5, 2, &options).unwrap())
        .collect();
    lines.extend(identity_criteria(&reports, start.elapsed().as_secs_f64()));

    lines.push(master());
    lines.push(coherent_states());
    lines.push(resolution());
    lines.push(negative_control(&options));

    let mut failed = 0;
    for l in &lines {
        println!(
            "criterion {:>2} {} {}",
            l.id,
            if l.passed { "PASS" } else { "FAIL" },
            l.text
        );
        failed += usize::from(!l.passed);
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1} s",
        lines.len() - failed,
        lines.len(),
        total.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
