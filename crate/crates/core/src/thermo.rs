//! Singular value potentials, cylinder-sum pressure, Gibbs diagnostics and
//! the equal-equilibrium-state experiment for two cocycles.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis::{linear_fit, map_word_products, markov_samples, periodic_lyapunov, periodic_orbits, LinearFit};
use crate::cocycle::WindowCocycle;
use crate::error::{Error, Result};
use crate::matnum::{eigenvalues, singular_values, spectral_radius, Mat, WedgeProduct};
use crate::sft::{PeriodicWord, Sft, Word};
use crate::synthesis::{build_proximal_periodic_family, Family, SynthesisOptions};
use crate::typicality::TypicalPair;

/// `log φˢ` from log singular values sorted in decreasing order.
fn log_phi_from_logs(logs: &[f64], s: f64) -> f64 {
    assert!(s >= 0.0, "s must be non-negative");
    let d = logs.len();
    if s >= d as f64 {
        return s / d as f64 * logs.iter().sum::<f64>();
    }
    let k = s.floor() as usize;
    logs[..k].iter().sum::<f64>() + (s - k as f64) * logs[k]
}

/// `log φˢ(g)`.
pub fn log_phi_s(g: &Mat, s: f64) -> f64 {
    let logs: Vec<f64> = singular_values(g).iter().map(|x| x.ln()).collect();
    log_phi_from_logs(&logs, s)
}

/// The singular value function `α₁ ⋯ α_⌊s⌋ α_{⌊s⌋+1}^{s-⌊s⌋}`, and
/// `|det g|^{s/d}` once `s >= d`.
pub fn phi_s(g: &Mat, s: f64) -> f64 {
    log_phi_s(g, s).exp()
}

/// `log φˢ` of a product carried in all exterior powers.
pub fn log_phi_wedge(w: &WedgeProduct, s: f64) -> f64 {
    assert!(s >= 0.0, "s must be non-negative");
    let l = w.log_top_singular();
    let d = w.dim();
    if s >= d as f64 {
        return s / d as f64 * l[d];
    }
    let k = s.floor() as usize;
    l[k] + (s - k as f64) * (l[k + 1] - l[k])
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `log Σ exp(v_i)` with pairwise summation.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    m + pairwise_sum(&e).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// `s = 0`: topological entropy, `log ρ(T)`.
    Entropy,
    /// `d = 1`, radius 0: `log ρ(T_ij |a_i|^s)`.
    TransferMatrix,
    /// Constant cocycle: `log ρ(T) + lim (1/n) log φˢ(gⁿ)`.
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oracle {
    pub kind: OracleKind,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureRow {
    pub n: usize,
    pub p_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    pub s: f64,
    pub rows: Vec<PressureRow>,
    pub extrapolated: f64,
    pub method: String,
    pub oracle: Option<Oracle>,
}

/// Method tag of [`extrapolate`].
pub const EXTRAPOLATION_METHOD: &str = "mean_cesaro_difference_top_quartile";

/// Average of `(n P_n − m P_m)/(n − m)` over consecutive pairs in the top
/// quartile (at least two rows) of the `n`-range.
pub fn extrapolate(rows: &[PressureRow]) -> f64 {
    let mut rows = rows.to_vec();
    rows.sort_by_key(|r| r.n);
    rows.dedup_by_key(|r| r.n);
    match rows.len() {
        0 => f64::NAN,
        1 => rows[0].p_n,
        len => {
            let top = &rows[len - len.div_ceil(4).max(2)..];
            let diffs: Vec<f64> = top
                .windows(2)
                .map(|w| (w[1].n as f64 * w[1].p_n - w[0].n as f64 * w[0].p_n) / (w[1].n - w[0].n) as f64)
                .collect();
            diffs.iter().sum::<f64>() / diffs.len() as f64
        }
    }
}

fn adjacency_matrix(base: &Sft, weights: impl Fn(usize) -> f64) -> Mat {
    let q = base.alphabet_size();
    let adj = base.adjacency();
    Mat::from_fn(q, q, |i, j| if adj[i][j] { weights(i) } else { 0.0 })
}

/// Closed-form pressure when one is known.
pub fn pressure_oracle(a: &WindowCocycle, s: f64) -> Option<Oracle> {
    let base = a.base();
    let entropy = spectral_radius(&adjacency_matrix(base, |_| 1.0)).ln();
    if s == 0.0 {
        return Some(Oracle { kind: OracleKind::Entropy, value: entropy });
    }
    let entries = a.entries();
    if entries.windows(2).all(|w| w[0].1 == w[1].1) {
        let g = entries[0].1;
        let mut logs: Vec<f64> = eigenvalues(g).iter().map(|z| z.norm().ln()).collect();
        logs.sort_by(|x, y| y.total_cmp(x));
        return Some(Oracle { kind: OracleKind::Constant, value: entropy + log_phi_from_logs(&logs, s) });
    }
    if a.dim() == 1 && a.radius() == 0 {
        let m = adjacency_matrix(base, |i| a.matrix_for_window(&[i as u8]).map_or(0.0, |g| g[(0, 0)].abs().powf(s)));
        return Some(Oracle { kind: OracleKind::TransferMatrix, value: spectral_radius(&m).ln() });
    }
    None
}

/// `P_n = (1/n) log Σ_{|w|=n} φˢ(Aⁿ(x_w))` for each `n`, evaluated at the
/// canonical representatives, with the extrapolated limit.
pub fn pressure(a: &WindowCocycle, s: f64, n_range: &[usize]) -> Result<PressureEstimate> {
    if n_range.is_empty() {
        return Err(Error::InvalidArgument("empty n range".into()));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("s = {s} must be finite and non-negative")));
    }
    let rows = n_range
        .iter()
        .map(|&n| {
            let logs = map_word_products(a, n, |_, w| log_phi_wedge(w, s))?;
            Ok(PressureRow { n, p_n: log_sum_exp(&logs) / n as f64 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PressureEstimate {
        s,
        extrapolated: extrapolate(&rows),
        rows,
        method: EXTRAPOLATION_METHOD.into(),
        oracle: pressure_oracle(a, s),
    })
}

/// Normalised `n`-cylinder weights `φˢ(Aⁿ(x_w)) / Z_n`, lexicographic in `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderWeights {
    pub n: usize,
    pub s: f64,
    pub words: Vec<Word>,
    pub weights: Vec<f64>,
    /// `log Z_n`.
    pub log_normalization: f64,
}

pub fn cylinder_weights(a: &WindowCocycle, s: f64, n: usize) -> Result<CylinderWeights> {
    let pairs = map_word_products(a, n, |w, p| (Word::new(w.to_vec()), log_phi_wedge(p, s)))?;
    let (words, logs): (Vec<Word>, Vec<f64>) = pairs.into_iter().unzip();
    let log_z = log_sum_exp(&logs);
    Ok(CylinderWeights { n, s, words, weights: logs.iter().map(|l| (l - log_z).exp()).collect(), log_normalization: log_z })
}

/// Spread of `μ([w]) / (e^{−nP} φˢ(Aⁿ(x_w)))` over the `n`-cylinders, with
/// `μ` the marginal of the normalised weights at level `n + extension`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsDiagnostic {
    pub n: usize,
    pub extension: usize,
    pub s: f64,
    pub p_ref: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max_ratio / min_ratio`.
    pub spread: f64,
}

pub fn gibbs_diagnostic(a: &WindowCocycle, s: f64, n: usize, p_ref: f64) -> Result<GibbsDiagnostic> {
    gibbs_diagnostic_with(a, s, n, n, p_ref)
}

pub fn gibbs_diagnostic_with(
    a: &WindowCocycle,
    s: f64,
    n: usize,
    extension: usize,
    p_ref: f64,
) -> Result<GibbsDiagnostic> {
    let base = a.base();
    let short = map_word_products(a, n, |w, p| (w[n - 1], log_phi_wedge(p, s)))?;
    let long = map_word_products(a, n + extension, |_, p| log_phi_wedge(p, s))?;
    let log_z = log_sum_exp(&long);
    // Extensions of a word depend only on its last symbol.
    let q = base.alphabet_size();
    let adj = base.adjacency();
    let mut ext = vec![1usize; q];
    for _ in 0..extension {
        ext = (0..q).map(|i| (0..q).filter(|&j| adj[i][j]).map(|j| ext[j]).sum()).collect();
    }
    let mut pos = 0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(last, log_phi) in &short {
        let m = ext[last as usize];
        let log_mu = log_sum_exp(&long[pos..pos + m]) - log_z;
        pos += m;
        let r = log_mu + n as f64 * p_ref - log_phi;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    debug_assert_eq!(pos, long.len());
    Ok(GibbsDiagnostic {
        n,
        extension,
        s,
        p_ref,
        min_ratio: lo.exp(),
        max_ratio: hi.exp(),
        spread: (hi - lo).exp(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitDifference {
    pub orbit: PeriodicWord,
    pub lambda_a: f64,
    pub lambda_b: f64,
    /// `λ₁(A, q) − λ₁(B, q)`.
    pub difference: f64,
}

/// The two orbits realising the extreme differences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceWitness {
    pub low: OrbitDifference,
    pub high: OrbitDifference,
    pub tol: f64,
}

impl fmt::Display for DifferenceWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "λ₁(A) − λ₁(B) is {} on {} but {} on {} (tolerance {})",
            self.low.difference, self.low.orbit, self.high.difference, self.high.orbit, self.tol
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremCOptions {
    pub max_period: usize,
    /// Spread allowed in the per-orbit differences.
    pub tol: f64,
    pub n_range: Vec<usize>,
    pub pressure_tol: f64,
    pub weight_levels: Vec<usize>,
    pub samples: usize,
    pub sample_len: usize,
    pub seed: u64,
    pub tau: f64,
    pub synthesis: SynthesisOptions,
}

impl Default for TheoremCOptions {
    fn default() -> Self {
        TheoremCOptions {
            max_period: 8,
            tol: 1e-9,
            n_range: (1..=12).collect(),
            pressure_tol: 1e-4,
            weight_levels: (2..=10).collect(),
            samples: 8,
            sample_len: 10,
            seed: 0,
            tau: 0.05,
            synthesis: SynthesisOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightComparison {
    pub n: usize,
    pub total_variation: f64,
}

/// One periodic orbit certified proximal for both cocycles at once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedApproximation {
    pub word: Word,
    pub q: Option<PeriodicWord>,
    pub lambda_a: Option<f64>,
    pub lambda_b: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremCReport {
    /// The common value of `λ₁(A, q) − λ₁(B, q)`.
    pub c: f64,
    pub spread: f64,
    pub orbits: Vec<OrbitDifference>,
    pub pressure_a: PressureEstimate,
    pub pressure_b: PressureEstimate,
    /// `P(Φ_A) − P(Φ_B)`, extrapolated.
    pub pressure_gap: f64,
    /// `|pressure_gap − c| <= pressure_tol`.
    pub pressure_consistent: bool,
    pub weights: Vec<WeightComparison>,
    /// Total variation against `n`.
    pub weight_trend: Option<LinearFit>,
    pub paired: Vec<PairedApproximation>,
}

/// Tests whether `λ₁(A,·) − λ₁(B,·)` is constant on periodic orbits and,
/// if so, compares pressures, cylinder weights and simultaneous proximal
/// approximations. A non-constant difference is reported as
/// [`Error::NotConstant`] carrying the witnessing orbits.
pub fn theorem_c_experiment(
    a: &WindowCocycle,
    b: &WindowCocycle,
    pair: &TypicalPair,
    opts: &TheoremCOptions,
) -> Result<TheoremCReport> {
    if a.base() != b.base() {
        return Err(Error::InvalidArgument("cocycles live over different shifts".into()));
    }
    let orbits = periodic_orbits(a.base(), opts.max_period)
        .into_iter()
        .map(|q| {
            let lambda_a = periodic_lyapunov(a, &q)?.values[0];
            let lambda_b = periodic_lyapunov(b, &q)?.values[0];
            Ok(OrbitDifference { orbit: q, lambda_a, lambda_b, difference: lambda_a - lambda_b })
        })
        .collect::<Result<Vec<_>>>()?;
    let low = orbits.iter().min_by(|x, y| x.difference.total_cmp(&y.difference)).expect("fixed or periodic orbit exists");
    let high = orbits.iter().max_by(|x, y| x.difference.total_cmp(&y.difference)).expect("fixed or periodic orbit exists");
    let spread = high.difference - low.difference;
    if spread > opts.tol {
        return Err(Error::NotConstant(Box::new(DifferenceWitness {
            low: low.clone(),
            high: high.clone(),
            tol: opts.tol,
        })));
    }
    let c = orbits.iter().map(|o| o.difference).sum::<f64>() / orbits.len() as f64;

    let pressure_a = pressure(a, 1.0, &opts.n_range)?;
    let pressure_b = pressure(b, 1.0, &opts.n_range)?;
    let pressure_gap = pressure_a.extrapolated - pressure_b.extrapolated;

    let weights = opts
        .weight_levels
        .iter()
        .map(|&n| {
            let wa = cylinder_weights(a, 1.0, n)?;
            let wb = cylinder_weights(b, 1.0, n)?;
            let tv = 0.5 * wa.weights.iter().zip(&wb.weights).map(|(x, y)| (x - y).abs()).sum::<f64>();
            Ok(WeightComparison { n, total_variation: tv })
        })
        .collect::<Result<Vec<_>>>()?;
    let weight_trend = linear_fit(
        &weights.iter().map(|w| w.n as f64).collect::<Vec<_>>(),
        &weights.iter().map(|w| w.total_variation).collect::<Vec<_>>(),
    );

    let paired = if a.dim() < 2 || opts.samples == 0 {
        vec![]
    } else {
        let family = Family::new(vec![a.clone(), b.clone()])?;
        markov_samples(a.base(), opts.sample_len, opts.samples, opts.seed)
            .into_iter()
            .map(|w| match build_proximal_periodic_family(&family, pair, a, &w, opts.tau, &opts.synthesis) {
                Ok(r) => {
                    let la = periodic_lyapunov(a, &r.q).map(|v| v.values[0]).ok();
                    let lb = periodic_lyapunov(b, &r.q).map(|v| v.values[0]).ok();
                    PairedApproximation { word: w, q: Some(r.q), lambda_a: la, lambda_b: lb, error: None }
                }
                Err(e) => PairedApproximation { word: w, q: None, lambda_a: None, lambda_b: None, error: Some(e.to_string()) },
            })
            .collect()
    };

    Ok(TheoremCReport {
        c,
        spread,
        orbits,
        pressure_consistent: (pressure_gap - c).abs() <= opts.pressure_tol,
        pressure_a,
        pressure_b,
        pressure_gap,
        weights,
        weight_trend,
        paired,
    })
}
