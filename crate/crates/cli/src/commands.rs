use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use pesinlab::cocycle::{lyapunov_spectrum, mean_exponents, SplittingField};
use pesinlab::dynsys::{torus_distance, StatePoint, SystemSpec};
use pesinlab::format::{fmt_f64, to_json};
use pesinlab::pesin::{beta_from_inputs, mean_hyperbolicity_degree, two_interval_bounds, BlockProfile};
use pesinlab::quasihyp::{canonical_partition, check_qh_pseudo_orbit, check_quasi_hyperbolic, QhSegment};
use pesinlab::shadow::{
    close_orbit, estimate_shadowing_constant, periodic_density_probe, solve_shadow, PseudoOrbit,
    ShadowProbeConfig,
};
use pesinlab::specmeas::{
    build_cover, glue_segments, specification_shadow, transition_times_along, weak_star_distance,
    EmpiricalMeasure, MeasureApproximator,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;

/// A result that was computed but fails the command's own check.
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl std::fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.output {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(p: &Path, text: &str) -> Result<()> {
    std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
}

fn json_lines<T: serde::Serialize>(items: &[T]) -> String {
    items.iter().map(|v| to_json(v) + "\n").collect()
}

fn horizon(cfg: &RunConfig, default: usize) -> usize {
    cfg.horizon.unwrap_or(default)
}

fn first_point(cfg: &RunConfig, sys: &SystemSpec) -> Result<StatePoint> {
    Ok(*cfg.sample_points(sys)?.first().context("no sample point")?)
}

pub fn exponents(cfg: &RunConfig) -> Result<()> {
    let sys = cfg.system()?;
    let pts = cfg.sample_points(&sys)?;
    let h = horizon(cfg, 100_000);
    let spectra = pts
        .par_iter()
        .map(|p| lyapunov_spectrum(&sys, p, h))
        .collect::<pesinlab::Result<Vec<_>>>()?;
    let d = sys.dim();
    let mut out = String::from("index");
    for i in 0..d {
        write!(out, ",x{i}")?;
    }
    for i in 0..d {
        write!(out, ",lambda{}", i + 1)?;
    }
    out.push('\n');
    for (i, (p, s)) in pts.iter().zip(&spectra).enumerate() {
        write!(out, "{i}")?;
        for v in p.coords().iter().chain(&s.raw) {
            write!(out, ",{}", fmt_f64(*v))?;
        }
        out.push('\n');
    }
    emit(cfg, &out)
}

/// Largest admissible rate for the builtin hyperbolic systems.
fn builtin_beta(sys: &SystemSpec) -> Option<f64> {
    let lu = pesinlab::dynsys::CAT_LAMBDA_U.ln();
    let (ls, lam) = match sys {
        SystemSpec::CatMap => (-lu, 2.0 * lu),
        SystemSpec::Product24 => (-std::f64::consts::LN_2, 0.5 * (2.0 * pesinlab::dynsys::CAT_LAMBDA_U).ln()),
        _ => return None,
    };
    beta_from_inputs(ls, lu, 1, lam).ok()
}

pub fn classify(cfg: &RunConfig) -> Result<()> {
    let sys = cfg.system()?;
    if let Some(beta) = builtin_beta(&sys) {
        if cfg.zeta >= beta {
            eprintln!("warning: zeta = {} is not below beta = {beta}; the hyperbolicity budget is violated", cfg.zeta);
        }
    }
    let h = horizon(cfg, 200);
    let pts: Vec<StatePoint> = match cfg.grid {
        Some(grid) => {
            if !matches!(sys, SystemSpec::Product24) {
                bail!("grid sweeps are defined for the product24 system");
            }
            let base = cfg.points.as_ref().and_then(|p| p.first()).cloned().unwrap_or(vec![0.0, 0.3, 0.7]);
            if base.len() != 3 {
                bail!("grid base point must have 3 coordinates");
            }
            (0..grid)
                .map(|i| StatePoint::new(&[i as f64 / grid as f64, base[1], base[2]]))
                .collect::<pesinlab::Result<_>>()?
        }
        None => cfg.sample_points(&sys)?,
    };
    let profiles = pts
        .par_iter()
        .map(|p| BlockProfile::build(&sys, p, &SplittingField::Reference, cfg.k_block, h))
        .collect::<pesinlab::Result<Vec<_>>>()?;
    let mut out = String::new();
    for (p, prof) in pts.iter().zip(&profiles) {
        let cert = prof.certificate(cfg.zeta, cfg.k);
        let line = json!({"point": p, "min_k": prof.min_block_index(cfg.zeta), "certificate": cert});
        out.push_str(&to_json(&line));
        out.push('\n');
    }
    if cfg.grid.is_some() {
        let xs: Vec<f64> = pts.iter().map(|p| p.coords()[0]).collect();
        let geometry: Vec<_> = cfg
            .ks
            .iter()
            .map(|&k| {
                let pass: Vec<bool> = profiles.iter().map(|p| p.passes(cfg.zeta, k)).collect();
                match two_interval_bounds(&xs, &pass) {
                    Ok((a, b)) => json!({"k": k, "a_k": a, "b_k": b}),
                    Err(e) => json!({"k": k, "error": e.to_string()}),
                }
            })
            .collect();
        out.push_str(&to_json(&json!({ "geometry": geometry })));
        out.push('\n');
        if let Some(path) = &cfg.geometry_output {
            let mut csv = String::from("x,min_k\n");
            for (x, prof) in xs.iter().zip(&profiles) {
                let m = prof.min_block_index(cfg.zeta).map(|k| k.to_string()).unwrap_or_default();
                writeln!(csv, "{},{m}", fmt_f64(*x))?;
            }
            write_file(path, &csv)?;
        }
    }
    emit(cfg, &out)
}

pub fn domination(cfg: &RunConfig) -> Result<()> {
    let sys = cfg.system()?;
    let pts = cfg.sample_points(&sys)?;
    let h = horizon(cfg, 1000);
    let lines = pts
        .par_iter()
        .map(|p| {
            let report = mean_exponents(&sys, p, &SplittingField::Reference, cfg.k_block, h)?;
            let degree = mean_hyperbolicity_degree(&sys, p, &SplittingField::Reference, cfg.k_block, h)?;
            Ok(json!({"point": p, "report": report, "degree": degree}))
        })
        .collect::<pesinlab::Result<Vec<_>>>()?;
    emit(cfg, &json_lines(&lines))
}

pub fn partition(cfg: &RunConfig) -> Result<()> {
    let n = cfg.n.context("partition needs n")?;
    let p = canonical_partition(n, cfg.k, cfg.k_block)?;
    let line = json!({"n": n, "k": cfg.k, "K": cfg.k_block, "m": p.m(), "times": p.times, "gaps": p.gaps().collect::<Vec<_>>()});
    emit(cfg, &(to_json(&line) + "\n"))
}

pub fn qh_check(cfg: &RunConfig) -> Result<()> {
    let sys = cfg.system()?;
    let e = (cfg.k + 1) * cfg.k_block;
    if let Some(path) = &cfg.input {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let pseudo = PseudoOrbit::from_text(&text)?;
        let segments: Vec<QhSegment> = pseudo
            .segments()
            .iter()
            .map(|s| QhSegment { x: s[0], n: s.len() - 1, field: SplittingField::Reference })
            .collect();
        let report = check_qh_pseudo_orbit(&sys, &segments, cfg.zeta, e, cfg.k_block, pseudo.delta())?;
        return emit(cfg, &(to_json(&report) + "\n"));
    }
    let n = cfg.n.context("qh-check needs n or an input pseudo-orbit")?;
    let part = canonical_partition(n, cfg.k, cfg.k_block)?;
    let pts = cfg.sample_points(&sys)?;
    let certs = pts
        .par_iter()
        .map(|p| check_quasi_hyperbolic(&sys, p, n, &SplittingField::Reference, cfg.zeta, &part))
        .collect::<pesinlab::Result<Vec<_>>>()?;
    let lines: Vec<_> = pts.iter().zip(&certs).map(|(p, c)| json!({"point": p, "certificate": c})).collect();
    emit(cfg, &json_lines(&lines))
}

pub fn shadow(cfg: &RunConfig) -> Result<()> {
    let sys = cfg.system()?;
    let path = cfg.input.as_ref().context("shadow needs an input pseudo-orbit file")?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let pseudo = PseudoOrbit::from_text(&text)?;
    let res = solve_shadow(&sys, &pseudo, &cfg.shadow_options())?;
    emit(cfg, &(to_json(&res) + "\n"))
}

/// `n` in `1..=n_max` with the smallest return distance.
fn best_return(sys: &SystemSpec, x: &StatePoint, n_max: usize) -> pesinlab::Result<(usize, f64)> {
    let orbit = sys.iterate(x, n_max)?.into_points();
    let mut best = (1, f64::INFINITY);
    for (n, p) in orbit.iter().enumerate().skip(1) {
        let d = torus_distance(x, p)?;
        if d < best.1 {
            best = (n, d);
        }
    }
    Ok(best)
}

pub fn close(cfg: &RunConfig) -> Result<()> {
    let sys = cfg.system()?;
    let pts = cfg.sample_points(&sys)?;
    let opts = cfg.shadow_options();
    let lines = pts
        .par_iter()
        .map(|x| {
            let (n, gap) = match cfg.n {
                Some(n) => (n, torus_distance(x, &sys.iterate_to(x, n)?)?),
                None => best_return(&sys, x, cfg.n_max)?,
            };
            let res = close_orbit(&sys, x, n, &opts)?;
            Ok(json!({"point": x, "n": n, "gap": gap, "result": res}))
        })
        .collect::<pesinlab::Result<Vec<_>>>()?;
    emit(cfg, &json_lines(&lines))
}

pub fn glue(cfg: &RunConfig) -> Result<()> {
    let sys = cfg.system()?;
    let x0 = first_point(cfg, &sys)?;
    let orbit = sys.iterate(&x0, cfg.orbit_len)?.into_points();
    let cover = build_cover(&orbit, cfg.mesh)?;
    let min_n = cfg.min_transit.unwrap_or(2 * cfg.k * cfg.k_block);
    let table = transition_times_along(&cover, min_n, cfg.transit_horizon, &[&orbit])?;
    let segments: Vec<(StatePoint, usize)> = match &cfg.segments {
        Some(list) => list
            .iter()
            .map(|s| Ok((StatePoint::new(&s.x)?, s.n)))
            .collect::<pesinlab::Result<_>>()?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            cfg.lengths.iter().map(|&n| (orbit[rng.random_range(0..orbit.len())], n)).collect()
        }
    };
    let plan = glue_segments(&sys, &segments, &cover, &table)?;
    let spec = specification_shadow(&sys, &plan, &cfg.shadow_options())?;
    if let Some(p) = &cfg.pseudo_output {
        write_file(p, &plan.pseudo.to_text())?;
    }
    if let Some(p) = &cfg.table_output {
        write_file(p, &table.to_csv())?;
    }
    let line = json!({
        "plan": plan,
        "period": spec.period,
        "period_in_bounds": spec.period_in_bounds,
        "deviations": spec.deviations,
        "point": spec.shadow.point(),
        "eps_achieved": spec.shadow.eps_achieved,
        "residual": spec.shadow.residual,
        "iterations": spec.shadow.iterations,
        "cover_size": cover.len(),
        "unresolved": table.unresolved.len(),
    });
    emit(cfg, &(to_json(&line) + "\n"))?;
    if !spec.period_in_bounds {
        return Err(NumericalFailure(format!(
            "period {} outside [{}, {}]",
            plan.period, plan.period_bounds.0, plan.period_bounds.1
        ))
        .into());
    }
    Ok(())
}

pub fn measure(cfg: &RunConfig) -> Result<()> {
    let sys = cfg.system()?;
    let x0 = first_point(cfg, &sys)?;
    let orbit = sys.iterate(&x0, cfg.orbit_len)?.into_points();
    let min_n = cfg.min_transit.unwrap_or(4);
    let approx = MeasureApproximator::new(&sys, &orbit, cfg.mesh, min_n, cfg.transit_horizon)?;
    // Uniform grid measure with vanishing moments up to the degree: Lebesgue moments.
    let lebesgue = EmpiricalMeasure::uniform_grid(sys.dim(), cfg.degree + 1)?;
    let target_vs_lebesgue = weak_star_distance(approx.target(), &lebesgue, cfg.degree)?;
    let mut out = String::from("budget,segments,period,distance,distance_lebesgue,target_lebesgue,max_deviation,residual\n");
    let mut last = None;
    for &b in &cfg.budgets {
        let a = approx.approximate(b, cfg.segment_len, cfg.degree, &cfg.shadow_options())?;
        let dl = weak_star_distance(&a.measure, &lebesgue, cfg.degree)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            a.budget,
            a.segments,
            a.period,
            fmt_f64(a.distance),
            fmt_f64(dl),
            fmt_f64(target_vs_lebesgue),
            fmt_f64(a.max_deviation),
            fmt_f64(a.residual)
        )?;
        last = Some(a);
    }
    if let (Some(p), Some(a)) = (&cfg.measure_output, &last) {
        write_file(p, &a.measure.to_csv())?;
    }
    if let Some(p) = &cfg.table_output {
        write_file(p, &approx.table().to_csv())?;
    }
    emit(cfg, &out)
}

pub fn probe_l(cfg: &RunConfig) -> Result<()> {
    let sys = cfg.system()?;
    let probe = ShadowProbeConfig {
        deltas: cfg.deltas.clone(),
        trials: cfg.trials,
        len_range: cfg.len_range,
        segments: cfg.segment_count,
        seed: cfg.seed,
        opts: cfg.shadow_options(),
    };
    let res = estimate_shadowing_constant(&sys, &probe)?;
    emit(cfg, &(to_json(&res) + "\n"))
}

pub fn probe_per(cfg: &RunConfig) -> Result<()> {
    let sys = cfg.system()?;
    let pts = cfg.sample_points(&sys)?;
    let res = periodic_density_probe(&sys, &pts, cfg.n_max, cfg.eps, &cfg.shadow_options())?;
    emit(cfg, &(to_json(&res) + "\n"))
}
