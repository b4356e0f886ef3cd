//! Command bodies. Each returns the rendered report and whether every
//! mandatory check passed.

use std::fmt::Write as _;

use ptsusy_core::coherent::{cs_overlap, resolution_report, CoherentState, PhasePoint};
use ptsusy_core::operators::{verify_operator_identities, ParamsRecord, ResidualReport, VerifyOptions};
use ptsusy_core::quadrature::{integrate_interval, QuadratureConfig};
use ptsusy_core::spectrum::{energy, gap_factor_m, gap_factor_n, LevelIndex, ModelParams};
use ptsusy_core::wavefn::EigenFunction;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, Format, Settings};

pub const NORM_TOL: f64 = 1e-8;
pub const OVERLAP_TOL: f64 = 1e-8;
pub const RESOLUTION_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] ptsusy_core::Error),
}

pub struct Output {
    pub text: String,
    pub passed: bool,
}

/// Shortest round-trip decimal; exponent form outside [1e-5, 1e16).
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Serialize)]
struct Gauge {
    hbar: f64,
    #[serde(rename = "L")]
    length: f64,
    mass: f64,
    eps0: f64,
}

fn gauge(p: &ModelParams<f64>) -> Gauge {
    Gauge {
        hbar: p.hbar,
        length: p.length,
        mass: p.mass,
        eps0: p.epsilon0(),
    }
}

fn gauge_line(p: &ModelParams<f64>) -> String {
    format!(
        "# gauge hbar={} L={} 2M={} eps0={} nu={} beta={}\n",
        num(p.hbar),
        num(p.length),
        num(p.two_mass()),
        num(p.epsilon0()),
        num(p.nu),
        num(p.beta)
    )
}

fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

fn quad_config(s: &Settings) -> QuadratureConfig<f64> {
    QuadratureConfig::with_tolerances(s.tol_abs.unwrap_or(1e-12), s.tol_rel.unwrap_or(1e-10))
}

pub fn spectrum(s: &Settings, gaps: bool) -> Result<Output, RunError> {
    let p = s.params()?;
    let (m_max, n_max) = (s.m_max.unwrap_or(2), s.n_max.unwrap_or(5));
    let mut rows = Vec::new();
    for m in 0..=m_max {
        for n in 0..=n_max {
            let e = energy(&p, LevelIndex::new(m, n)?);
            let g = gaps.then(|| (gap_factor_m(&p, n, m), gap_factor_n(&p, n, m)));
            rows.push((m, n, e, g));
        }
    }
    let text = match s.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = gauge_line(&p);
            t.push_str(if gaps {
                "m,n,energy,gap_m,gap_n\n"
            } else {
                "m,n,energy\n"
            });
            for (m, n, e, g) in &rows {
                let _ = write!(t, "{m},{n},{}", num(*e));
                if let Some((gm, gn)) = g {
                    let _ = write!(t, ",{},{}", num(*gm), num(*gn));
                }
                t.push('\n');
            }
            t
        }
        Format::Json => to_json(&json!({
            "gauge": gauge(&p),
            "params": ParamsRecord::from(&p),
            "levels": rows.iter().map(|(m, n, e, g)| {
                let mut r = json!({ "m": m, "n": n, "energy": e });
                if let Some((gm, gn)) = g {
                    r["gap_m"] = json!(gm);
                    r["gap_n"] = json!(gn);
                }
                r
            }).collect::<Vec<_>>(),
        })),
    };
    Ok(Output { text, passed: true })
}

pub fn wavefn(s: &Settings) -> Result<Output, RunError> {
    let p = s.params()?;
    let idx = LevelIndex::new(s.m.unwrap_or(0), s.n.unwrap_or(0))?;
    let phi = EigenFunction::new(&p, idx)?;
    let points = s.grid_points.unwrap_or(101);
    let grid: Vec<f64> = if points == 1 {
        vec![p.length / 2.0]
    } else {
        (0..points).map(|i| p.length * i as f64 / (points - 1) as f64).collect()
    };
    let samples = grid
        .iter()
        .map(|&x| Ok((x, phi.eval(x)?)))
        .collect::<Result<Vec<_>, ptsusy_core::Error>>()?;
    let norm = integrate_interval(|x| Ok(phi.eval(x)?.norm_sqr().into()), 0.0, p.length, &quad_config(s))?
        .value
        .re;
    let passed = (norm - 1.0).abs() < NORM_TOL;
    let text = match s.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = gauge_line(&p);
            let _ = writeln!(t, "# m={} n={} energy={}", idx.m, idx.n, num(phi.energy()));
            t.push_str("x,re,im,abs2\n");
            for (x, v) in &samples {
                let _ = writeln!(t, "{},{},{},{}", num(*x), num(v.re), num(v.im), num(v.norm_sqr()));
            }
            let _ = writeln!(t, "norm,,,{}", num(norm));
            t
        }
        Format::Json => to_json(&json!({
            "gauge": gauge(&p),
            "params": ParamsRecord::from(&p),
            "m": idx.m,
            "n": idx.n,
            "energy": phi.energy(),
            "samples": samples.iter().map(|(x, v)| json!({
                "x": x, "re": v.re, "im": v.im, "abs2": v.norm_sqr()
            })).collect::<Vec<_>>(),
            "norm": norm,
            "passed": passed,
        })),
    };
    Ok(Output { text, passed })
}

fn apply_thresholds(report: &mut ResidualReport, s: &Settings) -> Result<(), ConfigError> {
    for (identity, &t) in &s.thresholds {
        let mut found = false;
        for e in report.entries.iter_mut().filter(|e| &e.identity == identity) {
            e.threshold = t;
            e.passed = e.max_residual <= t;
            found = true;
        }
        if !found {
            return Err(ConfigError::Field {
                field: format!("tol.{identity}"),
                message: "no identity with this name in the report".into(),
            });
        }
    }
    Ok(())
}

pub fn verify(s: &Settings, negative_control: bool) -> Result<Output, RunError> {
    let p = s.params()?;
    let (m_max, n_max) = (s.m_max.unwrap_or(2), s.n_max.unwrap_or(5));
    let options = VerifyOptions {
        grid_points: s.grid_points.unwrap_or(64),
        sign_flipped: negative_control,
        abs_tol: s.tol_abs.unwrap_or(1e-12),
        rel_tol: s.tol_rel.unwrap_or(1e-10),
    };
    let mut report = verify_operator_identities(&p, n_max, m_max, &options)?;
    apply_thresholds(&mut report, s)?;
    let passed = report.all_mandatory_passed();
    let text = match s.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let mut t = gauge_line(&p);
            t.push_str("identity,variant,indices,max_residual,threshold,grid_size,mandatory,passed\n");
            for e in &report.entries {
                let indices: Vec<String> = e.indices.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = writeln!(
                    t,
                    "{},{},{},{},{},{},{},{}",
                    e.identity,
                    e.variant.as_deref().unwrap_or(""),
                    indices.join(";"),
                    num(e.max_residual),
                    num(e.threshold),
                    e.grid_size.map(|g| g.to_string()).unwrap_or_default(),
                    e.mandatory,
                    e.passed
                );
            }
            t
        }
        Format::Json => to_json(&json!({
            "gauge": gauge(&p),
            "params": ParamsRecord::from(&p),
            "n_max": n_max,
            "m_max": m_max,
            "grid_points": options.grid_points,
            "sign_flipped": negative_control,
            "passed": passed,
            "entries": report.entries,
        })),
    };
    Ok(Output { text, passed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Table {
    Overlaps,
    Normalization,
    Resolution,
}

#[derive(Serialize)]
struct OverlapRow {
    q: f64,
    p: f64,
    q2: f64,
    p2: f64,
    re: f64,
    im: f64,
    abs: f64,
    quad_re: f64,
    quad_im: f64,
}

/// Phase-space labels q ∈ {0.2, 0.5, 0.8}L, p ∈ {0, ±2πħ/L}.
fn phase_grid(p: &ModelParams<f64>) -> Vec<(f64, f64)> {
    let unit = 2.0 * std::f64::consts::PI * p.hbar / p.length;
    let mut labels = Vec::new();
    for q in [0.2, 0.5, 0.8] {
        for mom in [-unit, 0.0, unit] {
            labels.push((q * p.length, mom));
        }
    }
    labels
}

pub fn coherent(s: &Settings, table: Table) -> Result<Output, RunError> {
    let p = s.params()?;
    let m = s.m.unwrap_or(0);
    let cfg = QuadratureConfig::with_tolerances(s.tol_abs.unwrap_or(1e-14), s.tol_rel.unwrap_or(1e-12));
    let states = phase_grid(&p)
        .into_iter()
        .map(|(q, mom)| CoherentState::new(&p, m, PhasePoint::new(&p, q, mom)?))
        .collect::<Result<Vec<_>, _>>()?;
    let quad = |a: &CoherentState<f64>, b: &CoherentState<f64>| {
        integrate_interval(|x| Ok(a.eval(x)?.conj() * b.eval(x)?), 0.0, p.length, &cfg).map(|e| e.value)
    };
    let norms = states
        .par_iter()
        .map(|st| Ok((st.label, quad(st, st)?.re)))
        .collect::<Result<Vec<_>, ptsusy_core::Error>>()?;
    let pairs: Vec<(usize, usize)> = (0..states.len())
        .flat_map(|i| (0..states.len()).map(move |j| (i, j)))
        .collect();
    let overlaps = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&states[i], &states[j]);
            let closed = cs_overlap(a, b)?;
            let numeric = quad(a, b)?;
            Ok(OverlapRow {
                q: a.label.q,
                p: a.label.p,
                q2: b.label.q,
                p2: b.label.p,
                re: closed.re,
                im: closed.im,
                abs: closed.norm(),
                quad_re: numeric.re,
                quad_im: numeric.im,
            })
        })
        .collect::<Result<Vec<_>, ptsusy_core::Error>>()?;
    let points = s.grid_points.unwrap_or(41);
    let resolution = resolution_report(&p, m, points)?;

    let norm_dev = norms.iter().fold(0.0f64, |a, (_, n)| a.max((n - 1.0).abs()));
    let overlap_dev = overlaps.iter().fold(0.0f64, |a, r| {
        a.max(((r.re - r.quad_re).powi(2) + (r.im - r.quad_im).powi(2)).sqrt())
    });
    let resolution_ok = resolution.max_deviation < RESOLUTION_TOL;
    let passed = norm_dev < NORM_TOL && overlap_dev < OVERLAP_TOL && resolution_ok;

    let text = match s.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = gauge_line(&p);
            let _ = writeln!(t, "# m={m}");
            match table {
                Table::Overlaps => {
                    t.push_str("q,p,q2,p2,re,im,abs,quad_re,quad_im\n");
                    for r in &overlaps {
                        let _ = writeln!(
                            t,
                            "{},{},{},{},{},{},{},{},{}",
                            num(r.q),
                            num(r.p),
                            num(r.q2),
                            num(r.p2),
                            num(r.re),
                            num(r.im),
                            num(r.abs),
                            num(r.quad_re),
                            num(r.quad_im)
                        );
                    }
                }
                Table::Normalization => {
                    t.push_str("q,p,norm\n");
                    for (label, n) in &norms {
                        let _ = writeln!(t, "{},{},{}", num(label.q), num(label.p), num(*n));
                    }
                }
                Table::Resolution => {
                    t.push_str("x,G\n");
                    for (x, g) in resolution.grid.iter().zip(&resolution.values) {
                        let _ = writeln!(t, "{},{}", num(*x), num(*g));
                    }
                }
            }
            t
        }
        Format::Json => to_json(&json!({
            "gauge": gauge(&p),
            "params": ParamsRecord::from(&p),
            "m": m,
            "normalization": {
                "tolerance": NORM_TOL,
                "max_deviation": norm_dev,
                "states": norms.iter().map(|(l, n)| json!({ "q": l.q, "p": l.p, "norm": n })).collect::<Vec<_>>(),
            },
            "overlaps": {
                "tolerance": OVERLAP_TOL,
                "max_deviation": overlap_dev,
                "rows": overlaps,
            },
            "resolution": {
                "tolerance": RESOLUTION_TOL,
                "max_deviation": resolution.max_deviation,
                "mean_offset": resolution.mean_offset,
                "passed": resolution_ok,
                "points": resolution.grid.iter().zip(&resolution.values)
                    .map(|(x, g)| json!({ "x": x, "G": g })).collect::<Vec<_>>(),
            },
            "passed": passed,
        })),
    };
    Ok(Output { text, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, 1.0, -2.5, 1e-12, 9.869604401089358, 1e20, 5e-324, 0.1 + 0.2] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1e-12), "1e-12");
        assert_eq!(num(0.25), "0.25");
    }
}
