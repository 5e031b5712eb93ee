//! Experiment drivers. Each writes its CSV files and a `summary.json`; the
//! caller adds the manifest.

use rwrs_core::estimators::bounds::{
    bound_check_heavy_mass, bound_check_levelset, bound_check_max, bound_check_silt,
    lattice_heavy_mass_check, scenery_count_check, BoundCheck,
};
use rwrs_core::estimators::oracle::{enumerate_oracle, MAX_ASSIGNMENTS};
use rwrs_core::estimators::tail::tail_from_summaries;
use rwrs_core::estimators::{
    c_d, confinement_rate, green_function_mc, ks_normal, normal_sf, optimal_tilt,
    tail_is_conditional, tail_mc_conditional, watson_green_z3,
};
use rwrs_core::graph::{run_walk_stream, sample_levels, Graph};
use rwrs_core::local_time::build_ledger;
use rwrs_core::regeneration::{
    detect_regenerations, empirical_epoch_mgf, epoch_histogram, epoch_survival, escape_count,
    escape_probability, lambda_d, s_d_lower_bound,
};
use rwrs_core::replica::simulate_summaries;
use rwrs_core::rng::walk_stream;
use serde::Serialize;
use serde_json::json;

use crate::config::{BoundSpec, ExperimentConfig, ExperimentKind};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::plot::emit_plot_data;

const DEFAULT_EPOCHS: usize = 100_000;
const DEFAULT_REGEN_STEPS: usize = 10_000;
const DEFAULT_ESCAPE_HORIZON: usize = 2000;
const DEFAULT_INSTANCES: usize = 20;

/// Run the experiment and write its result files into `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    match cfg.experiment {
        ExperimentKind::Clt => clt(cfg, out),
        ExperimentKind::Tail => tail(cfg, out),
        ExperimentKind::Bounds => bounds(cfg, out),
        ExperimentKind::Regeneration => regeneration(cfg, out),
        ExperimentKind::Green => green(cfg, out),
        ExperimentKind::Confinement => confinement(cfg, out),
        ExperimentKind::OracleCrosscheck => oracle(cfg, out),
    }
}

#[derive(Serialize)]
struct WRow {
    replica: u64,
    t: f64,
    v2: f64,
    silt2: u64,
    w: Option<f64>,
}

fn clt(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let (graph, n) = (cfg.graph()?, cfg.n()?);
    let sums = simulate_summaries(
        graph,
        cfg.distribution()?,
        n,
        cfg.replicas,
        cfg.seed,
        cfg.threads,
    )?;
    let rows: Vec<WRow> = sums
        .iter()
        .enumerate()
        .map(|(r, s)| WRow {
            replica: r as u64,
            t: s.t,
            v2: s.v2,
            silt2: s.silt2,
            w: s.w,
        })
        .collect();
    out.csv("w_samples.csv", &rows)?;
    let ws: Vec<f64> = sums.iter().filter_map(|s| s.w).collect();
    let ks = if ws.is_empty() {
        None
    } else {
        Some(ks_normal(&ws)?)
    };
    let mean = ws.iter().sum::<f64>() / ws.len().max(1) as f64;
    let var = ws.iter().map(|w| (w - mean).powi(2)).sum::<f64>()
        / ws.len().saturating_sub(1).max(1) as f64;
    let silt = sums.iter().map(|s| s.silt2 as f64 / n as f64).sum::<f64>() / sums.len() as f64;
    out.json(
        "summary.json",
        &json!({
            "ks_statistic": ks,
            "defined": ws.len(),
            "undefined": sums.len() - ws.len(),
            "mean_w": mean,
            "var_w": var,
            "mean_silt2_over_n": silt,
        }),
    )
}

fn tail(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let graph = cfg.graph()?;
    let sums = simulate_summaries(
        graph,
        cfg.distribution()?,
        cfg.n()?,
        cfg.replicas,
        cfg.seed,
        cfg.threads,
    )?;
    let est = tail_from_summaries(&sums, &cfg.ys, graph);
    out.csv("tail.csv", &est)?;
    out.csv("plot.csv", &emit_plot_data(&est)?)?;
    let c = match graph {
        Graph::Tree { d } => match c_d(lambda_d(d)?) {
            Ok(c) => json!(c),
            Err(e) => json!(e.to_string()),
        },
        Graph::Lattice { .. } => json!(null),
    };
    let gaussian: Vec<f64> = cfg.ys.iter().map(|&y| normal_sf(y)).collect();
    out.json(
        "summary.json",
        &json!({ "c_d": c, "gaussian_tail": gaussian, "estimates": est }),
    )
}

#[derive(Serialize)]
struct BoundRow {
    lemma: String,
    params: String,
    hits: u64,
    replicas: u64,
    lhs: f64,
    ci_low: f64,
    ci_high: f64,
    rhs: f64,
    holds: bool,
    calibration: bool,
}

impl From<&BoundCheck> for BoundRow {
    fn from(c: &BoundCheck) -> Self {
        BoundRow {
            lemma: c.lemma.clone(),
            params: serde_json::to_string(&c.params).unwrap_or_default(),
            hits: c.hits,
            replicas: c.replicas,
            lhs: c.lhs,
            ci_low: c.ci_low,
            ci_high: c.ci_high,
            rhs: c.rhs,
            holds: c.holds,
            calibration: c.calibration,
        }
    }
}

fn tree_degree(cfg: &ExperimentConfig) -> Result<usize, CliError> {
    match cfg.graph()? {
        Graph::Tree { d } => Ok(d),
        g => Err(CliError::Validation(format!(
            "this bound needs a tree, got {g}"
        ))),
    }
}

fn lattice_degree(cfg: &ExperimentConfig) -> Result<usize, CliError> {
    match cfg.graph()? {
        Graph::Lattice { d } => Ok(d),
        g => Err(CliError::Validation(format!(
            "this bound needs a lattice, got {g}"
        ))),
    }
}

fn bounds(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let mut checks = Vec::new();
    let mut shells = Vec::new();
    let (reps, th) = (cfg.replicas, cfg.threads);
    for (i, spec) in cfg.bounds.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        match spec {
            BoundSpec::Levelset { points, beta } => checks.extend(bound_check_levelset(
                tree_degree(cfg)?,
                cfg.n()?,
                points,
                *beta,
                reps,
                seed,
                th,
            )?),
            BoundSpec::HeavyMass { us } => checks.extend(bound_check_heavy_mass(
                tree_degree(cfg)?,
                cfg.n()?,
                us,
                reps,
                seed,
                th,
            )?),
            BoundSpec::Max { xs } => {
                checks.extend(bound_check_max(cfg.graph()?, cfg.n()?, xs, reps, seed, th)?)
            }
            BoundSpec::Silt { ns, q, b } => {
                checks.extend(bound_check_silt(cfg.graph()?, ns, *q, *b, reps, seed, th)?)
            }
            BoundSpec::LatticeHeavyMass { ys } => {
                let (c, s) =
                    lattice_heavy_mass_check(lattice_degree(cfg)?, cfg.n()?, ys, reps, seed, th)?;
                checks.extend(c);
                shells.extend(s);
            }
            BoundSpec::SceneryCount { y, m, xs } => checks.extend(scenery_count_check(
                cfg.graph()?,
                cfg.distribution()?,
                cfg.n()?,
                *y,
                *m,
                xs,
                reps,
                seed,
                th,
            )?),
        }
    }
    let rows: Vec<BoundRow> = checks.iter().map(BoundRow::from).collect();
    out.csv("bounds.csv", &rows)?;
    if !shells.is_empty() {
        out.csv("shells.csv", &shells)?;
    }
    out.json(
        "summary.json",
        &json!({ "all_hold": checks.iter().all(|c| c.holds), "checks": checks.len() }),
    )
}

#[derive(Serialize)]
struct SurvivalRow {
    k: usize,
    count: u64,
    p_hat: f64,
    /// `-ln p_hat / k`; NaN when no epoch reaches `k`.
    rate: f64,
}

#[derive(Serialize)]
struct HistRow {
    epoch: usize,
    count: u64,
}

fn regeneration(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let d = tree_degree(cfg)?;
    let target = cfg.epochs.unwrap_or(DEFAULT_EPOCHS);
    let steps = cfg.n.unwrap_or(DEFAULT_REGEN_STEPS);
    let mut epochs = Vec::with_capacity(target);
    let mut levels = Vec::new();
    let mut walks = 0u64;
    while epochs.len() < target {
        sample_levels(d, steps, &mut walk_stream(cfg.seed, walks), &mut levels);
        epochs.extend_from_slice(detect_regenerations(&levels)?.usable_epochs());
        walks += 1;
        if walks > 10 * target as u64 + 1000 {
            return Err(rwrs_core::Error::NotConverged(
                "walks produce no regeneration epochs".into(),
            )
            .into());
        }
    }
    epochs.truncate(target);
    let hist: Vec<HistRow> = epoch_histogram(&epochs)
        .into_iter()
        .map(|(epoch, count)| HistRow { epoch, count })
        .collect();
    out.csv("epoch_histogram.csv", &hist)?;
    let max = epochs.iter().copied().max().unwrap_or(1);
    let ks: Vec<usize> = (1..=max).collect();
    let total = epochs.len() as f64;
    let surv: Vec<SurvivalRow> = epoch_survival(&epochs, &ks)
        .into_iter()
        .map(|(k, count)| {
            let p = count as f64 / total;
            SurvivalRow {
                k,
                count,
                p_hat: p,
                rate: if count > 0 {
                    -p.ln() / k as f64
                } else {
                    f64::NAN
                },
            }
        })
        .collect();
    out.csv("epoch_survival.csv", &surv)?;
    let horizon = cfg.horizon.unwrap_or(DEFAULT_ESCAPE_HORIZON);
    let escapes = escape_count(d, horizon, cfg.replicas, cfg.seed ^ 0x5eed)?;
    let lam = lambda_d(d)?;
    out.json(
        "summary.json",
        &json!({
            "d": d,
            "epochs": epochs.len(),
            "walks": walks,
            "s_d_lower_bound": s_d_lower_bound(d)?,
            "lambda_d": lam,
            "epoch_mgf_at_lambda_d": empirical_epoch_mgf(&epochs, lam)?,
            "escape_frequency": escapes as f64 / cfg.replicas as f64,
            "escape_probability": escape_probability(d)?,
            "escape_horizon": horizon,
        }),
    )
}

fn green(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let d = lattice_degree(cfg)?;
    let horizon = cfg
        .horizon
        .ok_or_else(|| CliError::Validation("green experiment needs a horizon".into()))?;
    let g = green_function_mc(
        d,
        horizon,
        cfg.replicas,
        cfg.seed,
        cfg.short_horizon,
        cfg.threads,
    )?;
    out.csv("green.csv", std::slice::from_ref(&g))?;
    let exact = (d == 3).then(watson_green_z3);
    out.json(
        "summary.json",
        &json!({ "estimate": g, "closed_form": exact }),
    )
}

#[derive(Serialize)]
struct ConfinementRow {
    d: usize,
    radius: usize,
    states: usize,
    lambda: f64,
    decay: f64,
    r2_decay: f64,
    iterations: usize,
    residual: f64,
}

fn confinement(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let d = cfg.graph.map_or(Ok(3), |_| lattice_degree(cfg))?;
    let rows: Vec<ConfinementRow> = cfg
        .radii
        .iter()
        .map(|&r| {
            confinement_rate(d, r).map(|c| ConfinementRow {
                d,
                radius: r,
                states: c.states,
                lambda: c.lambda,
                decay: c.decay,
                r2_decay: (r * r) as f64 * c.decay,
                iterations: c.iterations,
                residual: c.residual,
            })
        })
        .collect::<Result<_, _>>()?;
    out.csv("confinement.csv", &rows)?;
    let scaled: Vec<f64> = rows.iter().map(|r| r.r2_decay).collect();
    let spread = scaled.iter().cloned().fold(f64::MIN, f64::max)
        / scaled.iter().cloned().fold(f64::MAX, f64::min);
    out.json(
        "summary.json",
        &json!({
            "increasing": rows.windows(2).all(|w| w[1].lambda > w[0].lambda),
            "r2_decay_spread": spread,
        }),
    )
}

#[derive(Serialize)]
struct OracleRow {
    instance: usize,
    stream: u64,
    range: u64,
    silt2: u64,
    a: f64,
    oracle: f64,
    plain: f64,
    plain_se: f64,
    tilted: f64,
    tilted_se: f64,
    theta: f64,
    plain_within_3se: bool,
    tilted_within_3se: bool,
}

fn oracle(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let (graph, n, dist) = (cfg.graph()?, cfg.n()?, cfg.distribution()?);
    let atoms = dist.finite_support().map_or(0, |a| a.len()) as f64;
    let instances = cfg.instances.unwrap_or(DEFAULT_INSTANCES);
    let mut rows = Vec::new();
    let mut stream = 0u64;
    let mut found = 0;
    while found < instances {
        if stream > 1000 * instances as u64 + 1000 {
            return Err(rwrs_core::Error::NotConverged(format!(
                "walks of {n} steps on {graph} rarely have a small enough range to enumerate"
            ))
            .into());
        }
        let l = build_ledger(&run_walk_stream(graph, n, cfg.seed, stream)?);
        stream += 1;
        if atoms.powi(l.range() as i32) > MAX_ASSIGNMENTS as f64 {
            continue;
        }
        for (j, &a) in cfg.ys.iter().enumerate() {
            let seed = cfg.seed.wrapping_add((found * cfg.ys.len() + j) as u64 + 1);
            let p = enumerate_oracle(&l, dist, 0.0, a)?.p_t;
            let mc = tail_mc_conditional(&l, dist, a, cfg.replicas, seed)?;
            let theta = optimal_tilt(&l, dist, a)?;
            let is = tail_is_conditional(&l, dist, a, theta, cfg.replicas, seed)?;
            let mc_se = (p * (1.0 - p) / cfg.replicas as f64).sqrt();
            rows.push(OracleRow {
                instance: found,
                stream: stream - 1,
                range: l.range(),
                silt2: l.silt2(),
                a,
                oracle: p,
                plain: mc.p_hat,
                plain_se: mc_se,
                tilted: is.p_hat,
                tilted_se: is.std_error,
                theta,
                plain_within_3se: (mc.p_hat - p).abs() <= 3.0 * mc_se,
                tilted_within_3se: (is.p_hat - p).abs() <= 3.0 * is.std_error,
            });
        }
        found += 1;
    }
    out.csv("oracle.csv", &rows)?;
    let frac =
        |f: fn(&OracleRow) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / rows.len() as f64;
    out.json(
        "summary.json",
        &json!({
            "rows": rows.len(),
            "plain_agreement": frac(|r| r.plain_within_3se),
            "tilted_agreement": frac(|r| r.tilted_within_3se),
        }),
    )
}
