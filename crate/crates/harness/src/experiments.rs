//! One runner per subcommand. Each reads every parameter it needs, rejects
//! unknown keys, validates, and only then starts work.

use rayon::prelude::*;

use spectral_edge::dbm::{
    coupling_run, coupling_time, decorrelation_trial, shift_pair, summarize, CouplingConfig, DecorrelationConfig,
    DriverSpec,
};
use spectral_edge::ensembles::{sample_iid, EntryDistribution};
use spectral_edge::ginibre::{
    gumbel_cdf, kostlan_radius_cdf, linstat_mean, linstat_var, normalized_edge_density, rescaled_point, RadiusLaw,
    VAR_MAX_N,
};
use spectral_edge::girko::{
    girko_rhs, make_test_function, GirkoForm, QuadratureSpec, RadialTestFunction, TestFunctionKind,
    TestFunctionOverrides,
};
use spectral_edge::mde::{density_profile, solve_mde, support};
use spectral_edge::seed::mix64;
use spectral_edge::stats::{kolmogorov_survival, ks_statistic, loglog_slope, median, Proportion};
use spectral_edge::tail_stats::{predicted_tail, tail_trial, TailConfig, Thresholds};
use spectral_edge::Complex64;

use crate::config::Params;
use crate::error::{HarnessError, Result};
use crate::table::{Cell, Table};

/// Fraction of failed trials above which a run counts as degraded.
pub const MAX_FAILURE_RATE: f64 = 0.01;

#[derive(Debug)]
pub struct Report {
    pub table: Table,
    pub summary: Vec<String>,
    pub trials: usize,
    /// `(trial, message)` for trials that hit a numerical error.
    pub failures: Vec<(usize, String)>,
}

impl Report {
    fn new(table: Table) -> Self {
        Self {
            trials: 0,
            table,
            summary: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn degraded(&self) -> bool {
        self.trials > 0 && self.failures.len() as f64 > MAX_FAILURE_RATE * self.trials as f64
    }
}

fn ensemble(p: &Params) -> Result<EntryDistribution> {
    let name: String = p.get_or("ensemble", "ginibre".to_string())?;
    if name.eq_ignore_ascii_case("ginibre") {
        return Ok(EntryDistribution::ComplexGaussian);
    }
    Ok(name.parse()?)
}

fn positive(name: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(HarnessError::usage(format!("{name} must be positive")));
    }
    Ok(v)
}

/// Run `f` for every trial in parallel; results come back in trial order.
fn run_trials<T, F>(trials: usize, f: F) -> Vec<spectral_edge::Result<T>>
where
    T: Send,
    F: Fn(usize) -> spectral_edge::Result<T> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

/// Split trial results into successes (with index) and failures.
fn partition<T>(results: Vec<spectral_edge::Result<T>>, report: &mut Report) -> Vec<(usize, T)> {
    report.trials = results.len();
    let mut ok = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push((i, v)),
            // Configuration problems are caught before work starts, so anything here is numerical.
            Err(e) => report.failures.push((i, e.to_string())),
        }
    }
    ok
}

pub fn radius_mc(p: &Params) -> Result<Report> {
    let n = positive("n", p.get_or("n", 256)?)?;
    let trials = positive("trials", p.get_or("trials", 4000)?)?;
    let seed: u64 = p.get_or("seed", 1)?;
    let dist = ensemble(p)?;
    p.finish()?;

    let results = run_trials(trials, |i| {
        let s = mix64(seed, i as u64);
        sample_iid(n, dist, s)?.spectral_radius()
    });
    let mut report = Report::new(Table::new(vec!["trial", "seed", "rho"]));
    let ok = partition(results, &mut report);
    for (i, rho) in &ok {
        report.table.push(vec![
            Cell::from(*i),
            Cell::from(mix64(seed, *i as u64)),
            Cell::from(*rho),
        ]);
    }
    let rho: Vec<f64> = ok.iter().map(|(_, r)| *r).collect();
    if !rho.is_empty() {
        let ks = ks_statistic(&rho, |r| kostlan_radius_cdf(n, r).unwrap_or(f64::NAN));
        let pval = kolmogorov_survival((rho.len() as f64).sqrt() * ks);
        report
            .summary
            .push(format!("n = {n}, ensemble = {dist}, trials = {}", rho.len()));
        report
            .summary
            .push(format!("KS distance to the Kostlan law: {ks:.5} (p = {pval:.4})"));
        if dist != EntryDistribution::ComplexGaussian {
            report
                .summary
                .push("the Kostlan law is exact only for Ginibre matrices".into());
        }
    }
    Ok(report)
}

fn geometry(p: &Params, center_default: Option<f64>, width_default: Option<f64>) -> Result<TestFunctionOverrides> {
    let read = |key: &str, default: Option<f64>| -> Result<Option<f64>> {
        match p.get::<String>(key)? {
            None => Ok(default),
            Some(v) if v == "auto" => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| HarnessError::usage(format!("bad value for `{key}`: `{v}` ({e})"))),
        }
    };
    Ok(TestFunctionOverrides {
        center: read("center", center_default)?,
        half_width: read("half-width", width_default)?,
        c_n: p.get("c-n")?,
        tau: p.get("tau")?,
    })
}

fn test_function(p: &Params, n: usize, overrides: TestFunctionOverrides) -> Result<RadialTestFunction> {
    let kind = match p.get_or("function", "f1".to_string())?.as_str() {
        "f1" => TestFunctionKind::AnnulusF1,
        "f2" => TestFunctionKind::OuterF2,
        other => return Err(HarnessError::usage(format!("function must be f1 or f2, got `{other}`"))),
    };
    Ok(make_test_function(kind, n, overrides)?)
}

pub fn girko_check(p: &Params) -> Result<Report> {
    let n = positive("n", p.get_or("n", 50)?)?;
    let seed: u64 = p.get_or("seed", 1)?;
    // The default geometry is usable at small n, where γ_n ≤ 0 rules out the automatic one.
    let f = test_function(p, n, geometry(p, Some(1.05), Some(0.02))?)?;
    let form = match p.get_or("form", "logdet".to_string())?.as_str() {
        "logdet" => GirkoForm::LogDet,
        "split" => GirkoForm::EtaSplit,
        other => {
            return Err(HarnessError::usage(format!(
                "form must be logdet or split, got `{other}`"
            )))
        }
    };
    let d = QuadratureSpec::default();
    let quad = QuadratureSpec {
        radial_nodes: p.get_or("radial-nodes", d.radial_nodes)?,
        angular_nodes: p.get_or("angular-nodes", d.angular_nodes)?,
        rel_tol: p.get_or("rel-tol", d.rel_tol)?,
        eta0: p.get("eta0")?,
        ..d
    };
    p.finish()?;

    let x = spectral_edge::ensembles::sample_ginibre(n, seed)?;
    let est = girko_rhs(&x, &f, form, &quad)?;
    let diff = (est.lhs - est.rhs_logdet).abs();
    let mut report = Report::new(Table::new(vec![
        "trial",
        "seed",
        "lhs",
        "rhs",
        "abs_diff",
        "quad_error",
        "nodes",
        "clamped",
    ]));
    report.table.push(vec![
        Cell::from(0usize),
        Cell::from(seed),
        Cell::from(est.lhs),
        Cell::from(est.rhs_logdet),
        Cell::from(diff),
        Cell::from(est.quad_error),
        Cell::from(est.nodes),
        Cell::from(est.clamped),
    ]);
    report.summary.push(format!("knots {:?}", f.knots()));
    report.summary.push(format!(
        "lhs = {:.6}, rhs = {:.6}, |lhs - rhs| = {diff:.3e}, tolerance 1e-2 max(1, |lhs|) = {:.3e}",
        est.lhs,
        est.rhs_logdet,
        1e-2 * est.lhs.abs().max(1.0)
    ));
    if let (Some((i0, it)), Some(rem)) = (est.rhs_split, est.remainder) {
        report
            .summary
            .push(format!("split: I0 = {i0:.6}, I_T = {it:.6}, remainder = {rem:.6}"));
    }
    Ok(report)
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(hi > lo) {
        return Err(HarnessError::usage(format!(
            "need points >= 2 and max > min, got [{lo}, {hi}] x {points}"
        )));
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

pub fn kostlan(p: &Params) -> Result<Report> {
    let n = p.get_or("n", 100_000)?;
    let ts = grid(
        p.get_or("t-min", -2.0)?,
        p.get_or("t-max", 3.0)?,
        p.get_or("points", 51)?,
    )?;
    p.finish()?;

    let law = RadiusLaw::new(n)?;
    let mut report = Report::new(Table::new(vec!["t", "radius", "p_exact", "p_gumbel", "abs_diff"]));
    let mut worst: f64 = 0.0;
    for &t in &ts {
        let exact = law.gumbel_cdf(t)?;
        let g = gumbel_cdf(t);
        worst = worst.max((exact - g).abs());
        report.table.push(vec![
            t.into(),
            law.radius_at(t).into(),
            exact.into(),
            g.into(),
            (exact - g).abs().into(),
        ]);
    }
    report.summary.push(format!(
        "n = {n}, gamma_n = {:.5}, center = {:.6}, scale = {:.3e}",
        law.gamma_n,
        law.center(),
        law.scale()
    ));
    report
        .summary
        .push(format!("sup |P(G_n <= t) - exp(-e^-t)| on the grid: {worst:.5}"));
    let devs = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&c| law.deviation_probability(c).map(|v| format!("C={c}: {v:.3e}")))
        .collect::<spectral_edge::Result<Vec<_>>>()?;
    report
        .summary
        .push(format!("P(|rho - center| >= C/sqrt(n log n)): {}", devs.join(", ")));
    Ok(report)
}

pub fn kernel(p: &Params) -> Result<Report> {
    let n = p.get_or("n", 10_000)?;
    let xs = grid(
        p.get_or("x-min", -3.0)?,
        p.get_or("x-max", 3.0)?,
        p.get_or("points", 61)?,
    )?;
    p.finish()?;

    let mut report = Report::new(Table::new(vec![
        "x",
        "radius",
        "normalized_density",
        "limit",
        "rel_error",
    ]));
    for &x in &xs {
        let r = rescaled_point(n, x, 0.0)?.norm();
        let d = normalized_edge_density(n, x)?;
        let limit = (-x).exp();
        report.table.push(vec![
            x.into(),
            r.into(),
            d.into(),
            limit.into(),
            ((d - limit) / limit).abs().into(),
        ]);
    }
    let at0 = (normalized_edge_density(n, 0.0)? - 1.0).abs();
    let ln = (n as f64).ln();
    report.summary.push(format!(
        "relative error at x = 0: {at0:.4} (reference 3 loglog n / log n = {:.4})",
        3.0 * ln.ln() / ln
    ));
    Ok(report)
}

pub fn mde_scan(p: &Params) -> Result<Report> {
    let mode = p.get_or("mode", "profile".to_string())?;
    let slope_summary =
        |xs: &[f64], ys: &[f64], name: &str| format!("log-log slope of {name}: {:.4}", loglog_slope(xs, ys));
    match mode.as_str() {
        "profile" => {
            let z = Complex64::new(p.get_or("z-re", 1.0)?, p.get_or("z-im", 0.0)?);
            let e_max = p.get_or("e-max", z.norm() + 3.0)?;
            let points = p.get_or("points", 2001)?;
            p.finish()?;
            let prof = density_profile(z, e_max, points)?;
            let mut report = Report::new(Table::new(vec!["energy", "rho"]));
            for (e, r) in prof.grid.iter().zip(&prof.rho) {
                report.table.push(vec![(*e).into(), (*r).into()]);
            }
            report.summary.push(format!(
                "z = {z}, gap = {:.6e}, mass = {:.8}",
                prof.gap,
                prof.trapezoid_mass()
            ));
            Ok(report)
        }
        "gap" => {
            let deltas = p.list("deltas")?.unwrap_or_else(|| vec![0.01, 0.02, 0.04, 0.08, 0.16]);
            p.finish()?;
            if deltas.iter().any(|d: &f64| !(*d > 0.0)) {
                return Err(HarnessError::usage("deltas must be positive"));
            }
            let mut report = Report::new(Table::new(vec!["delta", "gap", "inner_edge", "outer_edge"]));
            let mut gaps = Vec::new();
            for &d in &deltas {
                let s = support(Complex64::new((1.0 + d).sqrt(), 0.0))?;
                gaps.push(s.gap());
                report
                    .table
                    .push(vec![d.into(), s.gap().into(), s.inner.into(), s.outer.into()]);
            }
            report.summary.push(slope_summary(&deltas, &gaps, "gap vs delta"));
            Ok(report)
        }
        "cusp" => {
            let etas = p.list("etas")?.unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4, 1e-5]);
            p.finish()?;
            if etas.iter().any(|e: &f64| !(*e > 0.0)) {
                return Err(HarnessError::usage("etas must be positive"));
            }
            let mut report = Report::new(Table::new(vec!["eta", "im_m", "residual"]));
            let mut ims = Vec::new();
            for &eta in &etas {
                let s = solve_mde(Complex64::new(1.0, 0.0), Complex64::new(0.0, eta))?;
                ims.push(s.m.im);
                report.table.push(vec![eta.into(), s.m.im.into(), s.residual.into()]);
            }
            report
                .summary
                .push(slope_summary(&etas, &ims, "Im m vs eta at |z| = 1"));
            Ok(report)
        }
        other => Err(HarnessError::usage(format!(
            "mode must be profile, gap or cusp, got `{other}`"
        ))),
    }
}

pub fn tail(p: &Params) -> Result<Report> {
    let n = positive("n", p.get_or("n", 200)?)?;
    let cfg = TailConfig {
        n,
        ensemble: ensemble(p)?,
        delta: p.get_or("delta", 2.0 / (n as f64).sqrt())?,
        thresholds: match p.list("thresholds")? {
            Some(es) => Thresholds::Absolute(es),
            None => Thresholds::Relative(p.list("ys")?.unwrap_or_else(|| vec![0.5, 1.0])),
        },
        trials: positive("trials", p.get_or("trials", 2000)?)?,
        seed: p.get_or("seed", 1)?,
        check_budget: p.get_or("check-budget", true)?,
    };
    p.finish()?;
    let thresholds = cfg.validate()?;

    let results = run_trials(cfg.trials, |i| tail_trial(&cfg, i));
    let mut report = Report::new(Table::new(vec!["trial", "seed", "lambda1"]));
    let ok = partition(results, &mut report);
    for (i, l) in &ok {
        report.table.push(vec![
            Cell::from(*i),
            Cell::from(mix64(cfg.seed, *i as u64)),
            Cell::from(*l),
        ]);
    }
    let scale = cfg.delta.powf(1.5);
    report.summary.push(format!(
        "n = {n}, ensemble = {}, delta = {:.5}, n delta^2 = {:.3}",
        cfg.ensemble,
        cfg.delta,
        n as f64 * cfg.delta * cfg.delta
    ));
    for e in thresholds {
        let hits = ok.iter().filter(|(_, l)| *l <= e).count();
        let prop = Proportion::wilson(hits, ok.len().max(1), 1.96);
        let y = e / scale;
        report.summary.push(format!(
            "y = {y:.4}: p = {:.5} [{:.5}, {:.5}], reference shape {:.5}",
            prop.estimate,
            prop.lo,
            prop.hi,
            predicted_tail(n, cfg.delta, y)
        ));
    }
    Ok(report)
}

fn shifts(p: &Params, r_default: f64, d_default: f64) -> Result<(Complex64, Complex64)> {
    let r = p.get_or("r", r_default)?;
    let d = p.get_or("d", d_default)?;
    Ok(shift_pair(r, d)?)
}

pub fn dbm_decorrelation(p: &Params) -> Result<Report> {
    let n = positive("n", p.get_or("n", 256)?)?;
    let nf = n as f64;
    let (z1, z2) = shifts(p, (1.0 + 2.0 / nf.sqrt()).sqrt(), 1.0)?;
    let trials = p.get_or("trials", 2000)?;
    let seed = p.get_or("seed", 1)?;
    let mut cfg = DecorrelationConfig::new(n, z1, z2, trials, seed);
    cfg.threshold = p.get_or("threshold", cfg.threshold)?;
    cfg.eta_tilde = p.get_or("eta-tilde", cfg.eta_tilde)?;
    cfg.t1 = p.get_or("t1", cfg.t1)?;
    cfg.ensemble = ensemble(p)?;
    p.finish()?;
    if trials < 3 || !(cfg.threshold > 0.0 && cfg.eta_tilde > 0.0 && cfg.t1 >= 0.0) {
        return Err(HarnessError::usage(
            "need trials >= 3, threshold > 0, eta-tilde > 0 and t1 >= 0",
        ));
    }

    let results = run_trials(trials, |i| decorrelation_trial(&cfg, i));
    let mut report = Report::new(Table::new(vec![
        "trial",
        "seed",
        "lambda1_z1",
        "lambda1_z2",
        "im_trace_z1",
        "im_trace_z2",
    ]));
    let ok = partition(results, &mut report);
    for (i, s) in &ok {
        let mut row = vec![Cell::from(*i), Cell::from(mix64(seed, *i as u64))];
        row.extend(s.iter().map(|v| Cell::from(*v)));
        report.table.push(row);
    }
    if ok.len() >= 3 {
        let st = summarize(&cfg, ok.into_iter().map(|(_, s)| s).collect());
        let (m1, m2) = st.marginal_tails;
        report.summary.push(format!(
            "z1 = {z1:.5}, z2 = {z2:.5}, |z1 - z2| = {:.5}, t1 = {}",
            (z1 - z2).norm(),
            cfg.t1
        ));
        report.summary.push(format!(
            "P(both <= {:.3e}) = {:.5} [{:.5}, {:.5}]; marginals {:.5}, {:.5}",
            cfg.threshold, st.joint_tail.estimate, st.joint_tail.lo, st.joint_tail.hi, m1.estimate, m2.estimate
        ));
        report.summary.push(format!(
            "trace correlation {:.4} +- {:.4}",
            st.trace_corr, st.trace_corr_se
        ));
        report.summary.push(format!(
            "lambda1 correlation {:.4} +- {:.4}",
            st.lambda_corr, st.lambda_corr_se
        ));
    }
    Ok(report)
}

pub fn coupling(p: &Params) -> Result<Report> {
    let n = positive("n", p.get_or("n", 128)?)?;
    let (z1, z2) = shifts(p, 1.0, 1.0)?;
    let t1 = coupling_time(n, p.get_or("omega1", 0.1)?)?;
    let k = p.get_or("k", 2)?;
    let steps = positive("steps", p.get_or("steps", 2000)?)?;
    let drivers = match p.get_or("drivers", "matrix".to_string())?.as_str() {
        "matrix" => DriverSpec::MatrixInduced,
        "independent" => DriverSpec::Independent,
        "shared" => DriverSpec::Shared,
        other => {
            return Err(HarnessError::usage(format!(
                "drivers must be matrix, independent or shared, got `{other}`"
            )))
        }
    };
    let trials = positive("trials", p.get_or("trials", 200)?)?;
    let seed: u64 = p.get_or("seed", 1)?;
    p.finish()?;
    if k == 0 || k > n {
        return Err(HarnessError::usage(format!("k must lie in 1..={n}")));
    }

    let results = run_trials(trials, |i| {
        coupling_run(&CouplingConfig {
            n,
            z1,
            z2,
            t1,
            k,
            steps,
            drivers,
            seed: mix64(seed, i as u64),
        })
    });
    let mut report = Report::new(Table::new(vec![
        "trial",
        "seed",
        "dist_z1",
        "dist_z2",
        "rejections",
        "reflections",
    ]));
    let ok = partition(results, &mut report);
    for (i, r) in &ok {
        report.table.push(vec![
            Cell::from(*i),
            Cell::from(mix64(seed, *i as u64)),
            r.dist[0].into(),
            r.dist[1].into(),
            r.rejections.into(),
            r.reflections.into(),
        ]);
    }
    let d: Vec<f64> = ok.iter().flat_map(|(_, r)| r.dist).collect();
    if !d.is_empty() {
        report.summary.push(format!(
            "n = {n}, |z1 - z2| = {:.4}, t1 = {t1:.5}, k = {k}, drivers = {drivers:?}",
            (z1 - z2).norm()
        ));
        report.summary.push(format!(
            "median distance {:.5} (n^-3/4 = {:.5})",
            median(&d),
            (n as f64).powf(-0.75)
        ));
    }
    Ok(report)
}

pub fn linstat(p: &Params) -> Result<Report> {
    let n = p.get_or("n", 256)?;
    let ns: Vec<usize> = p.list("ns")?.unwrap_or_else(|| vec![n]);
    let overrides = geometry(p, None, None)?;
    let fs = ns
        .iter()
        .map(|&n| test_function(p, n, overrides))
        .collect::<Result<Vec<_>>>()?;
    p.finish()?;

    let mut report = Report::new(Table::new(vec!["n", "mean", "var", "var_over_mean_sq"]));
    for (&n, f) in ns.iter().zip(&fs) {
        let m = linstat_mean(n, f)?;
        let v = if n <= VAR_MAX_N { linstat_var(n, f)? } else { f64::NAN };
        report
            .table
            .push(vec![n.into(), m.into(), v.into(), (v / (m * m)).into()]);
    }
    if ns.iter().any(|&n| n > VAR_MAX_N) {
        report
            .summary
            .push(format!("variance is computed for n <= {VAR_MAX_N} only"));
    }
    Ok(report)
}
