//! Fuzzy bisection on the ground energy with simulated projector measurements.

use super::step::{build_step_polynomial_capped, StepPolynomial, DEFAULT_DEGREE_CAP};
use super::{select_grid_size, BlockEncodingParams};
use crate::eigen::richardson_fit;
use crate::error::{Error, Result};
use crate::ledger::{LedgerCounts, LevelRecord, QueryLedger};
use crate::sparse::{CsrMatrix, SymmetricMatrix};
use crate::sturm_liouville::{assemble_fd_matrix, sample_function, OperatorSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Mutex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    Exact,
    Bernoulli,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub mode: SamplingMode,
    /// Shots per decision; `None` uses `ceil(8 ln(levels/delta) / gamma^2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            mode: SamplingMode::Exact,
            shots: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub eps: f64,
    pub delta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "C1", default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(rename = "D1", default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    #[serde(default = "default_cap")]
    pub max_degree: usize,
}

fn default_cap() -> usize {
    DEFAULT_DEGREE_CAP
}

impl EstimatorConfig {
    pub fn new(eps: f64, delta: f64, gamma: f64) -> Self {
        Self {
            eps,
            delta,
            gamma,
            sampling: SamplingConfig::default(),
            seed: 0,
            c1: None,
            d1: None,
            max_degree: DEFAULT_DEGREE_CAP,
        }
    }

    pub fn bernoulli(mut self, shots: Option<u64>) -> Self {
        self.sampling = SamplingConfig {
            mode: SamplingMode::Bernoulli,
            shots,
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if self.sampling.shots == Some(0) {
            return Err(Error::Config("shots must be positive".into()));
        }
        Ok(())
    }

    /// `eps' = gamma / 2`.
    pub fn eps_prime(&self) -> f64 {
        self.gamma / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Decision {
    Below,
    Above,
}

/// BELOW when the estimate reaches the midpoint of `(gamma - eps'/2)^2` and `(eps'/2)^2`.
pub fn fuzzy_bisection_decision(prob_estimate: f64, gamma: f64, eps_prime: f64) -> Decision {
    if prob_estimate >= decision_threshold(gamma, eps_prime) {
        Decision::Below
    } else {
        Decision::Above
    }
}

pub(crate) fn decision_threshold(gamma: f64, eps_prime: f64) -> f64 {
    let hi = (gamma - eps_prime / 2.0).powi(2);
    let lo = (eps_prime / 2.0).powi(2);
    0.5 * (hi + lo)
}

/// `S((H - shift I)/scale) v` by the three-term Chebyshev recurrence.
pub fn apply_matrix_polynomial(
    h: &CsrMatrix,
    shift: f64,
    scale: f64,
    poly: &StepPolynomial,
    v: &[f64],
    ledger: &mut QueryLedger,
) -> Result<Vec<f64>> {
    let n = h.dim();
    if v.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: v.len(),
        });
    }
    if !(scale > 0.0) {
        return Err(Error::Numeric(format!("polynomial scale must be positive, got {scale}")));
    }
    let c = &poly.chebyshev_coeffs;
    let mut out: Vec<f64> = v.iter().map(|x| c[0] * x).collect();
    if poly.degree == 0 {
        return Ok(out);
    }
    let inv = 1.0 / scale;
    let mut prev = v.to_vec();
    let mut cur = vec![0.0; n];
    let mut hx = vec![0.0; n];
    h.matvec(v, &mut hx);
    for i in 0..n {
        cur[i] = (hx[i] - shift * v[i]) * inv;
        out[i] += c[1] * cur[i];
    }
    for &ck in &c[2..=poly.degree] {
        h.matvec(&cur, &mut hx);
        for i in 0..n {
            let next = 2.0 * (hx[i] - shift * cur[i]) * inv - prev[i];
            prev[i] = next;
            out[i] += ck * next;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    ledger.record_matvecs(poly.degree as u64);
    ledger.record_block_encoding_uses(poly.degree as u64);
    Ok(out)
}

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Numeric("trial vector has zero or non-finite norm".into()));
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

/// `||S((H - mu)/(alpha + |mu|)) phi||` for a unit `phi`.
pub fn proj_amplitude(
    h: &CsrMatrix,
    alpha: f64,
    mu: f64,
    poly: &StepPolynomial,
    phi: &[f64],
    ledger: &mut QueryLedger,
) -> Result<f64> {
    let out = apply_matrix_polynomial(h, mu, alpha + mu.abs(), poly, phi, ledger)?;
    Ok(out.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Success probability of one projector measurement: the exact squared amplitude,
/// or the hit frequency over `shots` Bernoulli draws. Charges the runs performed.
pub fn proj_success_probability(
    h: &CsrMatrix,
    mu: f64,
    config: &EstimatorConfig,
    poly: &StepPolynomial,
    phi: &[f64],
    ledger: &mut QueryLedger,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let alpha = h.max_row_nnz() as f64 * h.max_abs();
    let phi = unit(phi)?;
    let p = proj_amplitude(h, alpha, mu, poly, &phi, ledger)?.powi(2).min(1.0);
    match config.sampling.mode {
        SamplingMode::Exact => {
            ledger.totals.state_prep_calls += 1;
            Ok(p)
        }
        SamplingMode::Bernoulli => {
            let shots = config.sampling.shots.unwrap_or(1);
            ledger.record_circuit_runs(poly.degree as u64, shots - 1);
            ledger.totals.state_prep_calls += 1;
            Ok(sample_frequency(p, shots, rng))
        }
    }
}

fn sample_frequency(p: f64, shots: u64, rng: &mut ChaCha8Rng) -> f64 {
    let b = Binomial::new(shots, p.clamp(0.0, 1.0)).expect("probability in [0, 1]");
    b.sample(rng) as f64 / shots as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub lambda_hat: f64,
    pub lower: f64,
    pub upper: f64,
    pub levels: usize,
    pub shots_per_level: u64,
    pub degree: usize,
    pub block_encoding: BlockEncodingParams,
    pub ledger: QueryLedger,
    pub seed: u64,
}

/// Precomputed state of one estimation problem; runs for different seeds share it.
pub struct Estimator<'a> {
    h: &'a CsrMatrix,
    phi: Vec<f64>,
    config: EstimatorConfig,
    poly: StepPolynomial,
    params: BlockEncodingParams,
    eps_res: f64,
    levels: usize,
    shots: u64,
    dimension: Option<usize>,
    // amplitudes depend only on mu
    cache: Mutex<HashMap<u64, f64>>,
}

impl<'a> Estimator<'a> {
    pub fn new<M: SymmetricMatrix>(m: &'a M, trial: &[f64], config: &EstimatorConfig) -> Result<Self> {
        config.validate()?;
        let h = m.csr();
        if trial.len() != h.dim() {
            return Err(Error::Dimension {
                expected: h.dim(),
                got: trial.len(),
            });
        }
        let phi = unit(trial)?;
        let alpha = h.max_row_nnz() as f64 * h.max_abs();
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Numeric(format!("block-encoding normalization alpha = {alpha}")));
        }
        let eps_res = config.eps / 2.0;
        let eps_prime = config.eps_prime();
        let poly = if eps_res >= 2.0 * alpha {
            // the whole spectrum fits inside one resolution cell
            StepPolynomial::identity()
        } else {
            build_step_polynomial_capped(alpha, eps_res, eps_prime, config.max_degree)?
        };
        let params = BlockEncodingParams::new(h, eps_prime, poly.degree);
        let levels = ((2.0 * alpha / config.eps).log2().ceil().max(1.0)) as usize;
        let shots = config
            .sampling
            .shots
            .unwrap_or_else(|| (8.0 * (levels as f64 / config.delta).ln() / config.gamma.powi(2)).ceil() as u64);
        Ok(Self {
            h,
            phi,
            config: config.clone(),
            poly,
            params,
            eps_res,
            levels,
            shots,
            dimension: m.stencil_dimension(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn polynomial(&self) -> &StepPolynomial {
        &self.poly
    }

    pub fn params(&self) -> &BlockEncodingParams {
        &self.params
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    fn new_ledger(&self) -> QueryLedger {
        match self.dimension {
            Some(d) => QueryLedger::for_dimension(d),
            None => QueryLedger::new(),
        }
    }

    fn amplitude(&self, mu: f64, ledger: &mut QueryLedger) -> Result<f64> {
        if let Some(&a) = self.cache.lock().unwrap().get(&mu.to_bits()) {
            return Ok(a);
        }
        let mut scratch = QueryLedger::new();
        let a = proj_amplitude(self.h, self.params.alpha, mu, &self.poly, &self.phi, &mut scratch)?;
        ledger.record_matvecs(scratch.totals.matvec_count);
        self.cache.lock().unwrap().insert(mu.to_bits(), a);
        Ok(a)
    }

    /// One full bisection with the given seed.
    pub fn run(&self, seed: u64) -> Result<Estimate> {
        let alpha = self.params.alpha;
        let mut ledger = self.new_ledger();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut l, mut r) = (-alpha, alpha);
        let threshold = decision_threshold(self.config.gamma, self.config.eps_prime());
        for level in 0..self.levels {
            let before = ledger.totals;
            let mu = (0.5 * (l + r)).clamp(-alpha, alpha);
            let p = self.amplitude(mu, &mut ledger)?.powi(2).min(1.0);
            ledger.record_circuit_runs(self.poly.degree as u64, self.shots);
            let estimate = match self.config.sampling.mode {
                SamplingMode::Exact => p,
                SamplingMode::Bernoulli => sample_frequency(p, self.shots, &mut rng),
            };
            let below = estimate >= threshold;
            if below {
                r = mu + self.eps_res;
            } else {
                l = mu - self.eps_res;
            }
            if !(l < r) {
                return Err(Error::Estimator(format!(
                    "search interval collapsed at level {level}: [{l}, {r}], mu = {mu}, estimate = {estimate}"
                )));
            }
            let mut counts = ledger.totals;
            counts = diff(&counts, &before);
            ledger.push_level(LevelRecord {
                level,
                lower: l,
                upper: r,
                mu,
                exact_probability: p,
                estimate,
                shots: self.shots,
                below,
                counts,
            });
        }
        Ok(Estimate {
            lambda_hat: 0.5 * (l + r),
            lower: l,
            upper: r,
            levels: self.levels,
            shots_per_level: self.shots,
            degree: self.poly.degree,
            block_encoding: self.params.clone(),
            ledger,
            seed,
        })
    }

    /// Independent runs, one ledger each, in seed order.
    pub fn run_batch(&self, seeds: &[u64]) -> Result<Vec<Estimate>> {
        seeds.par_iter().map(|&s| self.run(s)).collect()
    }
}

fn diff(a: &LedgerCounts, b: &LedgerCounts) -> LedgerCounts {
    LedgerCounts {
        entry_oracle_calls: a.entry_oracle_calls - b.entry_oracle_calls,
        row_col_oracle_calls: a.row_col_oracle_calls - b.row_col_oracle_calls,
        state_prep_calls: a.state_prep_calls - b.state_prep_calls,
        matvec_count: a.matvec_count - b.matvec_count,
        coefficient_evals: a.coefficient_evals - b.coefficient_evals,
        block_encoding_calls: a.block_encoding_calls - b.block_encoding_calls,
    }
}

/// Estimates the smallest eigenvalue of `m` to within `config.eps`, using `trial`
/// as the initial state (its overlap with the ground vector should be `>= gamma`).
pub fn est_eig<M: SymmetricMatrix>(m: &M, trial: &[f64], config: &EstimatorConfig) -> Result<Estimate> {
    Estimator::new(m, trial, config)?.run(config.seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndToEndResult {
    pub lambda_hat: f64,
    pub n_gr: usize,
    pub c1: f64,
    pub d1: f64,
    pub estimate: Estimate,
}

/// `(C1, D1)` from a fit on nested grids `7, 15, 31, 63`.
pub fn fit_grid_constants(spec: &OperatorSpec) -> Result<(f64, f64)> {
    let fit = richardson_fit(spec, &[7, 15, 31, 63], 1)?;
    Ok((fit.constant_estimate, fit.vector_constant_estimate.unwrap_or(0.0)))
}

/// Grid size used by [`end_to_end_estimate`], at least 3.
pub fn end_to_end_grid_size(spec: &OperatorSpec, config: &EstimatorConfig, c1: f64, d1: f64) -> Result<usize> {
    Ok(select_grid_size(config.eps, config.gamma, c1, d1, &spec.domain)?.max(3))
}

/// Configuration of the fixed-grid run inside [`end_to_end_estimate`]: `eps/2`, `gamma/2`.
pub fn inner_config(config: &EstimatorConfig) -> EstimatorConfig {
    let mut inner = config.clone();
    inner.eps = config.eps / 2.0;
    inner.gamma = config.gamma / 2.0;
    inner
}

/// Picks `n_gr` so the discrete ground energy is within `eps/2` of the continuum one,
/// then estimates it to `eps/2` with overlap bound `gamma/2`.
pub fn end_to_end_estimate<F: Fn(&[f64]) -> f64>(
    spec: &OperatorSpec,
    trial_field: F,
    config: &EstimatorConfig,
    c1: f64,
    d1: f64,
) -> Result<EndToEndResult> {
    config.validate()?;
    let n_gr = end_to_end_grid_size(spec, config, c1, d1)?;
    let m = assemble_fd_matrix(spec, n_gr)?;
    let trial = sample_function(trial_field, &m.grid)?;
    let inner = inner_config(config);
    let estimate = est_eig(&m, &trial.values, &inner)?;
    Ok(EndToEndResult {
        lambda_hat: estimate.lambda_hat,
        n_gr,
        c1,
        d1,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsvt::step::step_polynomial_from_width;
    use rand::Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen_range(-1.0..1.0);
                t.push((i, j, v));
                if i != j {
                    t.push((j, i, v));
                }
            }
        }
        CsrMatrix::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn constant_polynomial_is_identity() {
        let h = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 3.0)]).unwrap();
        let mut l = QueryLedger::new();
        let v = [0.3, -0.4];
        let out = apply_matrix_polynomial(&h, 0.5, 4.0, &StepPolynomial::identity(), &v, &mut l).unwrap();
        assert_eq!(out, v.to_vec());
        assert_eq!(l.totals.matvec_count, 0);
    }

    #[test]
    fn diagonal_matches_scalar_evaluation() {
        let d = [-3.0, -1.0, 0.2, 0.5, 2.5];
        let h = CsrMatrix::from_triplets(5, &d.iter().enumerate().map(|(i, &x)| (i, i, x)).collect::<Vec<_>>()).unwrap();
        let poly = step_polynomial_from_width(0.05, 0.1, 100_000).unwrap();
        let (mu, scale) = (0.3, 3.3);
        let v = [1.0, 2.0, -1.0, 0.5, 0.25];
        let mut l = QueryLedger::new();
        let out = apply_matrix_polynomial(&h, mu, scale, &poly, &v, &mut l).unwrap();
        for i in 0..5 {
            let want = poly.eval((d[i] - mu) / scale) * v[i];
            assert!((out[i] - want).abs() < 1e-10, "{i}: {} vs {want}", out[i]);
        }
        assert_eq!(l.totals.matvec_count, poly.degree as u64);
        assert_eq!(l.totals.block_encoding_calls, poly.degree as u64);
    }

    #[test]
    fn polynomial_action_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_symmetric(10, &mut rng);
        let poly = step_polynomial_from_width(0.1, 0.2, 10_000).unwrap();
        let u: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let uv: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let mut l = QueryLedger::new();
        let scale = 10.0 * h.max_abs() + 0.2;
        let a = apply_matrix_polynomial(&h, 0.2, scale, &poly, &u, &mut l).unwrap();
        let b = apply_matrix_polynomial(&h, 0.2, scale, &poly, &v, &mut l).unwrap();
        let c = apply_matrix_polynomial(&h, 0.2, scale, &poly, &uv, &mut l).unwrap();
        for i in 0..10 {
            assert!((a[i] + b[i] - c[i]).abs() < 1e-10);
        }
        assert!(apply_matrix_polynomial(&h, 0.2, scale, &poly, &u[..9], &mut l).is_err());
    }

    #[test]
    fn probability_matches_spectral_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let h = random_symmetric(8, &mut rng);
            let alpha = 8.0 * h.max_abs();
            let poly = crate::qsvt::build_step_polynomial(alpha, 0.2, 0.25).unwrap();
            let phi: Vec<f64> = unit(&(0..8).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()).unwrap();
            let eig = h.to_dense().symmetric_eigen();
            for mu in [-1.0, -0.3, 0.0, 0.4, 1.2] {
                let mut l = QueryLedger::new();
                let cfg = EstimatorConfig::new(0.1, 0.1, 0.5);
                let p = proj_success_probability(&h, mu, &cfg, &poly, &phi, &mut l, &mut rng).unwrap();
                let scale = alpha + f64::abs(mu);
                let mut want = 0.0;
                for k in 0..8 {
                    let col = eig.eigenvectors.column(k);
                    let w: f64 = col.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>().powi(2);
                    want += poly.eval((eig.eigenvalues[k] - mu) / scale).powi(2) * w;
                }
                assert!((p - want).abs() < 1e-8, "{p} vs {want}");
            }
        }
    }

    #[test]
    fn plateau_and_suppression_with_ground_vector() {
        let h = CsrMatrix::from_triplets(3, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]).unwrap();
        let alpha = 3.0;
        let eps = 0.2;
        let eps_prime = 0.25;
        let poly = crate::qsvt::build_step_polynomial(alpha, eps, eps_prime).unwrap();
        let phi = [1.0, 0.0, 0.0];
        let mut l = QueryLedger::new();
        let keep = proj_amplitude(&h, alpha, 1.0 + eps, &poly, &phi, &mut l).unwrap();
        assert!(keep >= 1.0 - eps_prime / 2.0);
        let drop = proj_amplitude(&h, alpha, 1.0 - eps, &poly, &phi, &mut l).unwrap();
        assert!(drop <= eps_prime / 2.0);
    }

    #[test]
    fn decision_rule() {
        let (g, ep) = (0.5, 0.25);
        assert_eq!(fuzzy_bisection_decision(g * g, g, ep), Decision::Below);
        assert_eq!(fuzzy_bisection_decision(0.0, g, ep), Decision::Above);
        let t = decision_threshold(g, ep);
        assert_eq!(fuzzy_bisection_decision(t, g, ep), Decision::Below);
        assert_eq!(fuzzy_bisection_decision(t - 1e-12, g, ep), Decision::Above);
        assert!((t - 0.3125 * g * g).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_frequency_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let p = 0.37;
        let shots = 10_000u64;
        let f = sample_frequency(p, shots, &mut rng);
        let sigma = (p * (1.0 - p) / shots as f64).sqrt();
        assert!((f - p).abs() <= 3.0 * sigma);
    }

    #[test]
    fn two_by_two_diagonal() {
        let h = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 3.0)]).unwrap();
        let cfg = EstimatorConfig::new(0.1, 0.05, 0.5);
        let e = est_eig(&h, &[1.0, 0.0], &cfg).unwrap();
        assert!((e.lambda_hat - 1.0).abs() <= 0.1, "{}", e.lambda_hat);
        let cfg = cfg.bernoulli(None);
        for seed in 0..5 {
            let mut c = cfg.clone();
            c.seed = seed;
            let e = est_eig(&h, &[1.0, 0.0], &c).unwrap();
            assert!((e.lambda_hat - 1.0).abs() <= 0.1);
        }
    }

    #[test]
    fn exact_search_never_excludes_ground_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..8 {
            let h = random_symmetric(6, &mut rng);
            let eig = h.to_dense().symmetric_eigen();
            let (k0, &l1) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            let ground: Vec<f64> = eig.eigenvectors.column(k0).iter().copied().collect();
            let noise: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.2..0.2)).collect();
            let trial: Vec<f64> = ground.iter().zip(&noise).map(|(a, b)| a + b).collect();
            let gamma = 0.9 * crate::eigen::overlap(&trial, &ground).unwrap();
            let cfg = EstimatorConfig::new(0.05, 0.1, gamma);
            let e = est_eig(&h, &trial, &cfg).unwrap();
            for rec in &e.ledger.levels {
                assert!(rec.lower <= l1 && l1 <= rec.upper, "{rec:?} excludes {l1}");
            }
            assert!((e.lambda_hat - l1).abs() <= 0.05);
        }
    }

    #[test]
    fn ledger_totals_and_levels_agree() {
        let h = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 3.0)]).unwrap();
        let cfg = EstimatorConfig::new(0.1, 0.05, 0.5).bernoulli(Some(40));
        let est = Estimator::new(&h, &[1.0, 0.0], &cfg).unwrap();
        let e = est.run(1).unwrap();
        let mut sum = LedgerCounts::default();
        for rec in &e.ledger.levels {
            sum.add(&rec.counts);
        }
        assert_eq!(sum, e.ledger.totals);
        let runs = (e.levels as u64) * 40;
        assert_eq!(e.ledger.totals.state_prep_calls, runs);
        assert_eq!(e.ledger.totals.block_encoding_calls, runs * e.degree as u64);
        assert_eq!(e.ledger.totals.entry_oracle_calls, 2 * runs * e.degree as u64);
    }

    #[test]
    fn perturbation_within_eps_tilde_keeps_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let h = random_symmetric(6, &mut rng);
            let eps_prime = 0.25;
            let alpha = 6.0 * h.max_abs();
            let poly = crate::qsvt::build_step_polynomial(alpha, 0.3, eps_prime).unwrap();
            let params = BlockEncodingParams::new(&h, eps_prime, poly.degree);
            let mut t: Vec<(usize, usize, f64)> = Vec::new();
            for (i, j, v) in h.triplets() {
                if i <= j {
                    let dv = params.eps_tilde * rng.gen_range(-1.0..1.0);
                    t.push((i, j, v + dv));
                    if i != j {
                        t.push((j, i, v + dv));
                    }
                }
            }
            let hp = CsrMatrix::from_triplets(6, &t).unwrap();
            let phi = unit(&[1.0, 0.5, -0.3, 0.2, 0.0, 0.1]).unwrap();
            for mu in [-0.5, 0.0, 0.5] {
                let mut l = QueryLedger::new();
                let a = proj_amplitude(&h, alpha, mu, &poly, &phi, &mut l).unwrap().powi(2);
                let b = proj_amplitude(&hp, alpha, mu, &poly, &phi, &mut l).unwrap().powi(2);
                assert!((a - b).abs() <= eps_prime / 4.0);
            }
        }
    }

    #[test]
    fn config_json_round_trip() {
        let j = r#"{"eps":0.1,"delta":0.05,"gamma":0.5,"sampling":{"mode":"bernoulli","shots":100},"seed":7,"C1":8.0,"D1":0.5}"#;
        let c: EstimatorConfig = serde_json::from_str(j).unwrap();
        assert_eq!(c.sampling.mode, SamplingMode::Bernoulli);
        assert_eq!(c.sampling.shots, Some(100));
        assert_eq!(c.c1, Some(8.0));
        assert_eq!(c.max_degree, DEFAULT_DEGREE_CAP);
        let back: EstimatorConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(EstimatorConfig::new(0.1, 1.0, 0.5).validate().is_err());
        assert!(EstimatorConfig::new(0.1, 0.1, 1.0).validate().is_err());
        assert!(EstimatorConfig::new(-0.1, 0.1, 0.5).validate().is_err());
    }

    #[test]
    fn huge_eps_clamps_grid() {
        let spec = OperatorSpec::laplacian(0.0, 1.0, 1).unwrap();
        let cfg = EstimatorConfig::new(1e6, 0.1, 0.5);
        let r = end_to_end_estimate(&spec, |x| (std::f64::consts::PI * x[0]).sin(), &cfg, 8.0, 0.0).unwrap();
        assert_eq!(r.n_gr, 3);
    }
}
