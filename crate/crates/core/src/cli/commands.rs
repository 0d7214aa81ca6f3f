use super::{EigFdArgs, EigQsimArgs, HybridArgs, SweepArgs, TrialArg, WellOverlapArgs};
use crate::eigen::smallest_eigs;
use crate::error::{Error, Result};
use crate::inflation::{hybrid_spectrum, overlap_sweep, sweep_argmax, HybridParams, PotentialModel};
use crate::io::{OutputDir, RunManifest};
use crate::ledger::LedgerCounts;
use crate::qsvt::{
    end_to_end_grid_size, est_eig, fit_grid_constants, inner_config, Estimate, Estimator, EstimatorConfig,
};
use crate::sturm_liouville::{assemble_fd_matrix, parse_operator_spec, sample_function, DomainBox, OperatorSpec};
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<(OperatorSpec, Value)> {
    let text = read_text(path)?;
    let spec = parse_operator_spec(&text)?;
    let doc = serde_json::from_str(&text)?;
    Ok((spec, doc))
}

fn load_config(path: &Path) -> Result<EstimatorConfig> {
    let text = read_text(path)?;
    let c: EstimatorConfig =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    c.validate()?;
    Ok(c)
}

/// Built-in trial state on the box: a centred Gaussian or the product sine.
pub fn trial_function(kind: TrialArg, domain: DomainBox) -> impl Fn(&[f64]) -> f64 {
    let (lo, w) = (domain.lower, domain.width());
    let c = lo + 0.5 * w;
    let sigma = 0.25 * w;
    move |x: &[f64]| match kind {
        TrialArg::Gaussian => x.iter().map(|xi| (-0.5 * ((xi - c) / sigma).powi(2)).exp()).product(),
        TrialArg::Sine => x.iter().map(|xi| (PI * (xi - lo) / w).sin()).product(),
    }
}

fn config_value<T: Serialize>(args: &T, extra: Value) -> Result<Value> {
    let mut v = serde_json::to_value(args)?;
    if let (Some(map), Value::Object(more)) = (v.as_object_mut(), extra) {
        map.extend(more);
    }
    Ok(v)
}

pub fn cmd_eig_fd(args: &EigFdArgs) -> Result<RunManifest> {
    let start = Instant::now();
    let (spec, doc) = load_spec(&args.spec)?;
    let m = assemble_fd_matrix(&spec, args.n_gr)?;
    let mut out = OutputDir::create(&args.out_dir)?;
    let d = spec.dim();
    let eig = if args.k == 0 {
        None
    } else {
        Some(smallest_eigs(&m, args.k)?)
    };
    out.write_csv("eigenvalues.csv", &["k", "lambda", "residual"], |w| {
        if let Some(e) = &eig {
            for (i, (l, r)) in e.eigenvalues.iter().zip(&e.residuals).enumerate() {
                w.write_record([(i + 1).to_string(), l.to_string(), r.to_string()])?;
            }
        }
        Ok(())
    })?;
    if let Some(e) = &eig {
        let mut header: Vec<String> = vec!["index".into()];
        header.extend((1..=d).map(|i| format!("x{i}")));
        header.push("value".into());
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut x = vec![0.0; d];
        for (k, v) in e.eigenvectors.iter().enumerate() {
            out.write_csv(&format!("eigenvector_{}.csv", k + 1), &header_refs, |w| {
                for (j, value) in v.iter().enumerate() {
                    m.grid.point(j, &mut x);
                    let mut rec = vec![j.to_string()];
                    rec.extend(x.iter().map(f64::to_string));
                    rec.push(value.to_string());
                    w.write_record(&rec)?;
                }
                Ok(())
            })?;
        }
    }
    let config = config_value(
        args,
        json!({"operator": doc, "h": m.grid.h, "dimension": m.dim(), "sparsity": m.sparsity}),
    )?;
    out.finish("eig-fd", config, None, start.elapsed().as_secs_f64(), None)
}

#[derive(Serialize)]
struct QsimSummary {
    mode: &'static str,
    n_gr: usize,
    c1: Option<f64>,
    d1: Option<f64>,
    lambda_hat: f64,
    lower: f64,
    upper: f64,
    /// Smallest eigenvalue of the assembled matrix, from the classical solver.
    reference_lambda: f64,
    /// Accuracy the estimate is held to against `reference_lambda`.
    tolerance: f64,
    runs: usize,
    successes: usize,
    success_rate: f64,
    levels: usize,
    shots_per_level: u64,
    degree: usize,
    alpha: f64,
    inner_config: EstimatorConfig,
}

pub fn cmd_eig_qsim(args: &EigQsimArgs) -> Result<RunManifest> {
    let start = Instant::now();
    let (spec, doc) = load_spec(&args.spec)?;
    let mut config = load_config(&args.config)?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let runs = args.batch_seeds.unwrap_or(1);
    if runs == 0 {
        return Err(Error::Config("--batch-seeds must be positive".into()));
    }
    let (mode, n_gr, inner, c1, d1) = match args.n_gr {
        Some(n) => ("fixed_grid", n, config.clone(), None, None),
        None => {
            let (c1, d1) = match (config.c1, config.d1) {
                (Some(c), Some(d)) => (c, d),
                _ => fit_grid_constants(&spec)?,
            };
            let n = end_to_end_grid_size(&spec, &config, c1, d1)?;
            ("end_to_end", n, inner_config(&config), Some(c1), Some(d1))
        }
    };
    let m = assemble_fd_matrix(&spec, n_gr)?;
    let trial = sample_function(trial_function(args.trial, spec.domain), &m.grid)?;
    let reference = smallest_eigs(&m, 1)?.eigenvalues[0];
    let estimator = Estimator::new(&m, &trial.values, &inner)?;
    let seeds: Vec<u64> = (0..runs as u64).map(|i| config.seed.wrapping_add(i)).collect();
    let estimates = estimator.run_batch(&seeds)?;
    let tol = inner.eps;
    let ok = |e: &Estimate| (e.lambda_hat - reference).abs() <= tol;
    let successes = estimates.iter().filter(|e| ok(e)).count();
    let first = &estimates[0];
    let summary = QsimSummary {
        mode,
        n_gr,
        c1,
        d1,
        lambda_hat: first.lambda_hat,
        lower: first.lower,
        upper: first.upper,
        reference_lambda: reference,
        tolerance: tol,
        runs,
        successes,
        success_rate: successes as f64 / runs as f64,
        levels: first.levels,
        shots_per_level: first.shots_per_level,
        degree: first.degree,
        alpha: first.block_encoding.alpha,
        inner_config: inner.clone(),
    };
    let mut out = OutputDir::create(&args.out_dir)?;
    out.write_json("estimate.json", &summary)?;
    out.write_json("ledger.json", &first.ledger)?;
    out.write_csv(
        "batch.csv",
        &[
            "seed",
            "lambda_hat",
            "lower",
            "upper",
            "abs_error",
            "success",
            "entry_calls",
            "state_prep_calls",
            "block_encoding_calls",
        ],
        |w| {
            for e in &estimates {
                let t = &e.ledger.totals;
                w.write_record([
                    e.seed.to_string(),
                    e.lambda_hat.to_string(),
                    e.lower.to_string(),
                    e.upper.to_string(),
                    (e.lambda_hat - reference).abs().to_string(),
                    ok(e).to_string(),
                    t.entry_oracle_calls.to_string(),
                    t.state_prep_calls.to_string(),
                    t.block_encoding_calls.to_string(),
                ])?;
            }
            Ok(())
        },
    )?;
    let mut total = LedgerCounts::default();
    for e in &estimates {
        total.add(&e.ledger.totals);
    }
    let resolved = config_value(args, json!({"operator": doc, "estimator": config, "seeds": seeds}))?;
    out.finish("eig-qsim", resolved, Some(config.seed), start.elapsed().as_secs_f64(), Some(total))
}

pub fn cmd_well_overlap(args: &WellOverlapArgs) -> Result<RunManifest> {
    let start = Instant::now();
    let rows = overlap_sweep(args.variant, args.r_min, args.r_max, args.steps, args.n_max)?;
    let mut out = OutputDir::create(&args.out_dir)?;
    out.write_csv("overlap.csv", &["r", "n", "overlap_sq"], |w| {
        for row in &rows {
            w.write_record([row.r.to_string(), row.n.to_string(), row.overlap_sq.to_string()])?;
        }
        Ok(())
    })?;
    out.write_csv("argmax.csv", &["n", "r", "overlap_sq"], |w| {
        for n in 1..=args.n_max {
            if let Some(best) = sweep_argmax(&rows, n) {
                w.write_record([n.to_string(), best.r.to_string(), best.overlap_sq.to_string()])?;
            }
        }
        Ok(())
    })?;
    out.finish(
        "well-overlap",
        config_value(args, json!({}))?,
        None,
        start.elapsed().as_secs_f64(),
        None,
    )
}

pub fn cmd_hybrid(args: &HybridArgs) -> Result<RunManifest> {
    let start = Instant::now();
    let model = match &args.model {
        Some(p) => PotentialModel::from_json(&read_text(p)?)?,
        None => PotentialModel::Hybrid(HybridParams::reference()),
    };
    if !matches!(model, PotentialModel::Hybrid(_)) {
        return Err(Error::Config("the hybrid command needs a hybrid model".into()));
    }
    let s = hybrid_spectrum(&model, args.scale, args.k, args.scheme, args.mpl)?;
    let tensor = s.grid.tensor()?;
    let mut out = OutputDir::create(&args.out_dir)?;
    out.write_json(
        "thresholds.json",
        &json!({
            "thresholds": s.grid.thresholds,
            "phi_c": s.grid.phi_c,
            "phi_nodes": s.grid.phi_nodes.len(),
            "psi_nodes": s.grid.psi_nodes.len(),
            "unknowns": s.operator.matrix.dim(),
            "eliminated": s.operator.eliminated(),
        }),
    )?;
    // blocked links put entries near 1e130 on the diagonal, so the scaled residual is the readable one
    let scale = s.operator.matrix.max_abs();
    out.write_csv("eigenvalues.csv", &["n", "lambda_per_efold", "residual", "relative_residual"], |w| {
        for (i, (l, r)) in s.eigen.eigenvalues.iter().zip(&s.eigen.residuals).enumerate() {
            w.write_record([(i + 1).to_string(), l.to_string(), r.to_string(), (r / scale).to_string()])?;
        }
        Ok(())
    })?;
    out.write_csv("overlaps.csv", &["n", "overlap_sq"], |w| {
        for (i, o) in s.overlaps.iter().enumerate() {
            w.write_record([(i + 1).to_string(), o.to_string()])?;
        }
        Ok(())
    })?;
    let mut header: Vec<String> = vec!["phi_mpl".into(), "psi_mpl".into()];
    header.extend((1..=s.fields.len()).map(|i| format!("Psi_{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_csv("eigenfunctions.csv", &header_refs, |w| {
        for j in 0..tensor.interior_total() {
            let p = tensor.interior_point(j);
            let mut rec = vec![p[0].to_string(), p[1].to_string()];
            rec.extend(s.fields.iter().map(|f| f[j].to_string()));
            w.write_record(&rec)?;
        }
        Ok(())
    })?;
    let config = config_value(args, json!({"resolved_model": model}))?;
    out.finish("hybrid", config, None, start.elapsed().as_secs_f64(), None)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Precondition("slope needs at least two matched points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Numeric("log-log slope needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("slope needs distinct abscissae".into()));
    }
    Ok(sxy / sxx)
}

struct SweepRow {
    kind: &'static str,
    eps: f64,
    n_gr: usize,
    estimate: Estimate,
}

pub fn cmd_complexity_sweep(args: &SweepArgs) -> Result<RunManifest> {
    let start = Instant::now();
    let mut eps_list = args.eps_list.clone();
    eps_list.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    eps_list.dedup();
    if eps_list.len() < 3 {
        return Err(Error::Precondition(format!(
            "a slope fit needs at least 3 distinct eps values, got {}",
            eps_list.len()
        )));
    }
    let (spec, doc) = load_spec(&args.spec)?;
    let base = load_config(&args.config)?;
    let (c1, d1) = match (base.c1, base.d1) {
        (Some(c), Some(d)) => (c, d),
        _ => fit_grid_constants(&spec)?,
    };
    let trial_fn = trial_function(args.trial, spec.domain);
    let fixed = assemble_fd_matrix(&spec, args.n_gr)?;
    let fixed_trial = sample_function(&trial_fn, &fixed.grid)?;
    let mut rows = Vec::new();
    for &eps in &eps_list {
        let mut cfg = base.clone();
        cfg.eps = eps;
        cfg.validate()?;
        let e = est_eig(&fixed, &fixed_trial.values, &cfg)?;
        rows.push(SweepRow {
            kind: "fixed_matrix",
            eps,
            n_gr: args.n_gr,
            estimate: e,
        });
        let n = end_to_end_grid_size(&spec, &cfg, c1, d1)?;
        let m = assemble_fd_matrix(&spec, n)?;
        let trial = sample_function(&trial_fn, &m.grid)?;
        let e = est_eig(&m, &trial.values, &inner_config(&cfg))?;
        rows.push(SweepRow {
            kind: "end_to_end",
            eps,
            n_gr: n,
            estimate: e,
        });
        log::info!("eps {eps}: end-to-end grid {n}");
    }
    let mut out = OutputDir::create(&args.out_dir)?;
    out.write_csv(
        "sweep.csv",
        &[
            "kind",
            "eps",
            "n_gr",
            "degree",
            "levels",
            "shots",
            "lambda_hat",
            "entry_calls",
            "row_col_calls",
            "state_prep_calls",
            "block_encoding_calls",
            "coefficient_evals",
        ],
        |w| {
            for r in &rows {
                let e = &r.estimate;
                let t = &e.ledger.totals;
                w.write_record([
                    r.kind.to_string(),
                    r.eps.to_string(),
                    r.n_gr.to_string(),
                    e.degree.to_string(),
                    e.levels.to_string(),
                    e.shots_per_level.to_string(),
                    e.lambda_hat.to_string(),
                    t.entry_oracle_calls.to_string(),
                    t.row_col_oracle_calls.to_string(),
                    t.state_prep_calls.to_string(),
                    t.block_encoding_calls.to_string(),
                    t.coefficient_evals.to_string(),
                ])?;
            }
            Ok(())
        },
    )?;
    let slope = |kind: &str| -> Result<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| (1.0 / r.eps, r.estimate.ledger.totals.entry_oracle_calls as f64))
            .unzip();
        log_log_slope(&x, &y)
    };
    let slopes = json!({
        "fixed_matrix_slope": slope("fixed_matrix")?,
        "end_to_end_slope": slope("end_to_end")?,
        "abscissa": "1/eps",
        "ordinate": "entry_calls",
        "fixed_n_gr": args.n_gr,
        "C1": c1,
        "D1": d1,
    });
    out.write_json("slopes.json", &slopes)?;
    let mut total = LedgerCounts::default();
    for r in &rows {
        total.add(&r.estimate.ledger.totals);
    }
    let config = config_value(
        args,
        json!({"operator": doc, "estimator": base, "eps_sorted": eps_list, "C1": c1, "D1": d1}),
    )?;
    out.finish("complexity-sweep", config, Some(base.seed), start.elapsed().as_secs_f64(), Some(total))
}
