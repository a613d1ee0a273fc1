//! Periodic Lyapunov spectra, singular value gap profiles, domination
//! evidence and pointwise estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::WindowCocycle;
use crate::error::{Error, Result};
use crate::matnum::WedgeProduct;
use crate::sft::{PeriodicWord, PointSpec, Sft, Symbol, Word};
use crate::synthesis::{build_proximal_periodic_with, SynthesisOptions};
use crate::typicality::TypicalityCertificate;

/// Ordinary least squares `y ≈ slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of the slope (0 for exact or two-point fits).
    pub slope_stderr: f64,
    pub points: usize,
}

/// `None` with fewer than two points or no spread in `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let ss_tot: f64 = ys[..n].iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= 1e-24 {
        1.0
    } else {
        0.0
    };
    let slope_stderr = if n > 2 { (ss_res / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Some(LinearFit { slope, intercept, r2, slope_stderr, points: n })
}

/// The orbit every word is padded to: the fixed point of the least fixed
/// symbol, or else the least primitive cycle of least period.
pub fn anchor_cycle(base: &Sft) -> Vec<Symbol> {
    if let Some(&a) = base.fixed_symbols().first() {
        return vec![a];
    }
    (2..)
        .find_map(|n| base.enumerate_periodic(n).into_iter().find(|w| w.is_primitive()))
        .map(|w| w.canonical_rotation().symbols().to_vec())
        .expect("primitive shifts have periodic orbits")
}

/// The representative of the cylinder `[w]` used throughout: `w` at
/// coordinates `0..n`, joined by shortest lexicographically least bridges
/// to the anchor orbit on both sides.
pub fn representative(base: &Sft, w: &[Symbol]) -> Result<PointSpec> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("empty word".into()));
    }
    base.check_word(w)?;
    let c = anchor_cycle(base);
    let bl = base.shortest_bridge(c[c.len() - 1], w[0]);
    let br = base.shortest_bridge(w[w.len() - 1], c[0]);
    let core = Word::concat(&[&bl, w, &br]).0;
    PointSpec::new(c.clone(), core, c, bl.len() as i64)
}

/// Depth-first enumeration of words with prefix products.
struct Enumerator<'a> {
    a: &'a WindowCocycle,
    n: usize,
    r: usize,
    lpads: &'a [Vec<Symbol>],
    rpads: &'a [Vec<Symbol>],
    buf: Vec<Symbol>,
    stack: Vec<WedgeProduct>,
}

impl Enumerator<'_> {
    fn symbol_at(&self, pos: i64) -> Symbol {
        let r = self.r as i64;
        if pos < 0 {
            self.lpads[self.buf[0] as usize][(pos + r) as usize]
        } else if (pos as usize) < self.buf.len() {
            self.buf[pos as usize]
        } else {
            self.rpads[self.buf[self.n - 1] as usize][pos as usize - self.n]
        }
    }

    fn factor(&self, i: usize, w: &mut WedgeProduct) {
        let r = self.r as i64;
        let win: Vec<Symbol> = (i as i64 - r..=i as i64 + r).map(|p| self.symbol_at(p)).collect();
        w.left_mul(self.a.wedge_by_code(self.a.window_code(&win)));
    }

    fn push(&mut self, s: Symbol) {
        self.buf.push(s);
        let m = self.buf.len();
        let mut top = self.stack.last().expect("nonempty stack").clone();
        if m > self.r {
            self.factor(m - 1 - self.r, &mut top);
        }
        self.stack.push(top);
    }

    fn pop(&mut self) {
        self.buf.pop();
        self.stack.pop();
    }

    fn dfs(&mut self, visit: &mut dyn FnMut(&[Symbol], &WedgeProduct)) {
        if self.buf.len() == self.n {
            let mut w = self.stack.last().expect("nonempty stack").clone();
            for i in self.n.saturating_sub(self.r)..self.n {
                self.factor(i, &mut w);
            }
            visit(&self.buf, &w);
            return;
        }
        let base = self.a.base();
        let last = self.buf.last().copied();
        for s in 0..base.alphabet_size() as Symbol {
            if last.is_none_or(|l| base.allowed(l, s)) {
                self.push(s);
                self.dfs(visit);
                self.pop();
            }
        }
    }
}

/// Applies `f` to every admissible word of length `n` and the product
/// `Aⁿ` at its [`representative`], returning the results in lexicographic
/// order of the words. Subtrees are processed in parallel; the output does
/// not depend on the number of threads.
pub fn map_word_products<T: Send>(
    a: &WindowCocycle,
    n: usize,
    f: impl Fn(&[Symbol], &WedgeProduct) -> T + Sync,
) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("word length must be positive".into()));
    }
    let base = a.base();
    let r = a.radius() as i64;
    let q = base.alphabet_size();
    let mut lpads = Vec::with_capacity(q);
    let mut rpads = Vec::with_capacity(q);
    for s in 0..q as Symbol {
        let p = representative(base, &[s])?;
        lpads.push(p.window(-r, 0));
        rpads.push(p.window(1, 1 + r));
    }
    let depth = (1..=n).find(|&l| base.count_words(l) >= 64).unwrap_or(n);
    let prefixes = base.words(depth);
    let chunks: Vec<Vec<T>> = prefixes
        .par_iter()
        .map(|pre| {
            let mut out = Vec::new();
            let mut en = Enumerator {
                a,
                n,
                r: a.radius(),
                lpads: &lpads,
                rpads: &rpads,
                buf: Vec::with_capacity(n),
                stack: vec![WedgeProduct::identity(a.dim())],
            };
            for &s in pre.iter() {
                en.push(s);
            }
            en.dfs(&mut |w, p| out.push(f(w, p)));
            out
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Uniform Markov word: a uniform first symbol, then uniform among the
/// allowed successors.
pub fn markov_sample(base: &Sft, n: usize, rng: &mut impl Rng) -> Word {
    let q = base.alphabet_size();
    let mut w = Vec::with_capacity(n);
    if n == 0 {
        return Word(w);
    }
    w.push(rng.random_range(0..q) as Symbol);
    for _ in 1..n {
        let last = w[w.len() - 1];
        let next: Vec<Symbol> = (0..q as Symbol).filter(|&s| base.allowed(last, s)).collect();
        w.push(next[rng.random_range(0..next.len())]);
    }
    Word(w)
}

/// `count` Markov words of length `n` from a seeded generator.
pub fn markov_samples(base: &Sft, n: usize, count: usize, seed: u64) -> Vec<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| markov_sample(base, n, &mut rng)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LyapunovSource {
    Periodic { word: PeriodicWord },
    Estimate { word: Word, n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovVector {
    /// `λ₁ >= … >= λ_d`.
    pub values: Vec<f64>,
    pub source: LyapunovSource,
}

/// `(1/n_q) χ⃗(A^{n_q}(q))`.
pub fn periodic_lyapunov(a: &WindowCocycle, q: &PeriodicWord) -> Result<LyapunovVector> {
    if !a.base().is_admissible_cycle(q.symbols()) {
        return Err(Error::InadmissibleWord(q.to_string()));
    }
    let n = q.len();
    let chi = a.product_wedge(&PointSpec::periodic(q), n).chi();
    Ok(LyapunovVector {
        values: chi.iter().map(|c| c / n as f64).collect(),
        source: LyapunovSource::Periodic { word: q.clone() },
    })
}

/// Primitive periodic orbits of period at most `max_period`, one per orbit
/// (the least rotation), ordered by period then lexicographically.
pub fn periodic_orbits(base: &Sft, max_period: usize) -> Vec<PeriodicWord> {
    let mut out = Vec::new();
    for n in 1..=max_period {
        for w in base.enumerate_periodic(n) {
            if w.is_primitive() && w.canonical_rotation() == w {
                out.push(w);
            }
        }
    }
    out
}

pub fn periodic_spectrum(a: &WindowCocycle, max_period: usize) -> Result<Vec<(PeriodicWord, LyapunovVector)>> {
    periodic_orbits(a.base(), max_period)
        .into_par_iter()
        .map(|q| periodic_lyapunov(a, &q).map(|v| (q, v)))
        .collect()
}

/// How words are chosen for a gap profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GapMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
    /// Exhaustive while the word count stays within `budget`.
    Auto { budget: u128, count: usize, seed: u64 },
}

impl Default for GapMode {
    fn default() -> Self {
        GapMode::Auto { budget: 1 << 20, count: 4096, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapRow {
    pub n: usize,
    pub min_gap: f64,
    pub argmin: Word,
    pub words: usize,
    pub exhaustive: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapProfile {
    pub i: usize,
    pub rows: Vec<GapRow>,
    /// Fit of `min_gap` against `n`: slope `C₁`, intercept `−C₂`.
    pub fit: Option<LinearFit>,
}

fn singular_gap(w: &WedgeProduct, i: usize) -> f64 {
    let mu = w.mu();
    mu[i - 1] - mu[i]
}

/// Per-`n` minimum of `(μ_i − μ_{i+1})(Aⁿ)` over words of length `n`.
pub fn gap_profile(a: &WindowCocycle, i: usize, n_list: &[usize], mode: GapMode) -> Result<GapProfile> {
    if i == 0 || i >= a.dim() {
        return Err(Error::InvalidArgument(format!("gap index {i} outside 1..{}", a.dim())));
    }
    let base = a.base();
    let mut rows = Vec::new();
    for &n in n_list {
        let exhaustive = match mode {
            GapMode::Exhaustive => true,
            GapMode::Sampled { .. } => false,
            GapMode::Auto { budget, .. } => base.count_words(n) <= budget,
        };
        let scored: Vec<(f64, Word)> = if exhaustive {
            map_word_products(a, n, |w, p| (singular_gap(p, i), Word(w.to_vec())))?
        } else {
            let (count, seed) = match mode {
                GapMode::Sampled { count, seed } | GapMode::Auto { count, seed, .. } => (count, seed),
                GapMode::Exhaustive => unreachable!(),
            };
            markov_samples(base, n, count, seed ^ n as u64)
                .into_par_iter()
                .map(|w| {
                    let y = representative(base, &w)?;
                    Ok((singular_gap(&a.product_wedge(&y, n), i), w))
                })
                .collect::<Result<_>>()?
        };
        let words = scored.len();
        let (min_gap, argmin) = scored
            .into_iter()
            .fold((f64::INFINITY, Word::default()), |acc, (g, w)| if g < acc.0 { (g, w) } else { acc });
        rows.push(GapRow { n, min_gap, argmin, words, exhaustive });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.min_gap).collect();
    Ok(GapProfile { i, fit: linear_fit(&xs, &ys), rows })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DominationThresholds {
    pub r2_min: f64,
    /// Periodic gaps at or below this count as zero.
    pub gap_tol: f64,
    /// The slope must exceed this many standard errors.
    pub slope_sigmas: f64,
}

impl Default for DominationThresholds {
    fn default() -> Self {
        DominationThresholds { r2_min: 0.99, gap_tol: 1e-9, slope_sigmas: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominationVerdict {
    DominatedEvidence,
    NoEvidence,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DominationReport {
    pub i: usize,
    /// `min_q (λ_i − λ_{i+1})(q)` over periodic orbits.
    pub periodic_gap: f64,
    pub gap_witness: Option<PeriodicWord>,
    pub orbits: usize,
    /// `max_q max_j |λ_j(q)|`, the scale the gaps are measured against.
    pub lambda_scale: f64,
    pub gap_profile: GapProfile,
    pub typical: Option<bool>,
    pub thresholds: DominationThresholds,
    pub verdict: DominationVerdict,
}

/// Periodic gap and gap profile, with an evidence verdict. A certificate,
/// when given, must pass.
pub fn theorem_b_check(
    a: &WindowCocycle,
    cert: Option<&TypicalityCertificate>,
    i: usize,
    max_period: usize,
    n_list: &[usize],
    mode: GapMode,
    thresholds: DominationThresholds,
) -> Result<DominationReport> {
    if let Some(c) = cert {
        if !c.passed {
            return Err(Error::InvalidArgument("typicality certificate did not pass".into()));
        }
    }
    if i == 0 || i >= a.dim() {
        return Err(Error::InvalidArgument(format!("gap index {i} outside 1..{}", a.dim())));
    }
    let spectrum = periodic_spectrum(a, max_period)?;
    let mut periodic_gap = f64::INFINITY;
    let mut gap_witness = None;
    let mut lambda_scale: f64 = 0.0;
    for (q, v) in &spectrum {
        let g = v.values[i - 1] - v.values[i];
        if g < periodic_gap {
            periodic_gap = g;
            gap_witness = Some(q.clone());
        }
        lambda_scale = v.values.iter().fold(lambda_scale, |m, x| m.max(x.abs()));
    }
    let gap_profile = gap_profile(a, i, n_list, mode)?;
    let dominated = periodic_gap > thresholds.gap_tol
        && gap_profile.fit.is_some_and(|f| {
            f.slope > 0.0 && f.slope > thresholds.slope_sigmas * f.slope_stderr && f.r2 > thresholds.r2_min
        });
    Ok(DominationReport {
        i,
        periodic_gap,
        gap_witness,
        orbits: spectrum.len(),
        lambda_scale,
        gap_profile,
        typical: cert.map(|c| c.passed),
        thresholds,
        verdict: if dominated { DominationVerdict::DominatedEvidence } else { DominationVerdict::NoEvidence },
    })
}

/// `(1/n) μ⃗(Aⁿ(y))` at the representative `y` of `[w]`.
pub fn pointwise_estimate(a: &WindowCocycle, w: &Word) -> Result<LyapunovVector> {
    let n = w.len();
    let y = representative(a.base(), w)?;
    let mu = a.product_wedge(&y, n).mu();
    Ok(LyapunovVector {
        values: mu.iter().map(|m| m / n as f64).collect(),
        source: LyapunovSource::Estimate { word: w.clone(), n },
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremDSample {
    pub word: Word,
    pub n: usize,
    pub n_q: usize,
    /// `‖(1/n)μ⃗(Aⁿ(x)) − (n_q/n)λ⃗(q)‖`.
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremDReport {
    pub tau: f64,
    pub samples: Vec<TheoremDSample>,
    pub all_passed: bool,
}

/// Compares each sampled cylinder with its shadowing proximal orbit against
/// the tolerance `tol(n)`.
pub fn theorem_d_check(
    a: &WindowCocycle,
    cert: &TypicalityCertificate,
    samples: &[Word],
    tau: f64,
    opts: &SynthesisOptions,
    tol: impl Fn(usize) -> f64 + Sync,
) -> Result<TheoremDReport> {
    let out: Vec<TheoremDSample> = samples
        .par_iter()
        .map(|w| {
            let r = build_proximal_periodic_with(a, cert, w, tau, opts)?;
            let n = r.n as f64;
            let deviation = r.mu_x.iter().zip(&r.chi_q).map(|(m, c)| (m / n - c / n).powi(2)).sum::<f64>().sqrt();
            let tolerance = tol(r.n);
            Ok(TheoremDSample { word: w.clone(), n: r.n, n_q: r.n_q, deviation, tolerance, passed: deviation <= tolerance })
        })
        .collect::<Result<_>>()?;
    let all_passed = out.iter().all(|s| s.passed);
    Ok(TheoremDReport { tau, samples: out, all_passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matnum::{diag, rotation2, Mat};

    fn scalar(vals: &[f64], base: Sft) -> WindowCocycle {
        WindowCocycle::locally_constant(base, vals.iter().map(|&v| diag(&[v])).collect()).unwrap()
    }

    #[test]
    fn fit_exact_line() {
        let f = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert_eq!(f.r2, 1.0);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn periodic_lyapunov_examples() {
        let c = WindowCocycle::constant(Sft::full_shift(2), diag(&[2.0, 1.0])).unwrap();
        let v = periodic_lyapunov(&c, &PeriodicWord::new(vec![0, 1, 1]).unwrap()).unwrap();
        assert!((v.values[0] - 2f64.ln()).abs() < 1e-12 && v.values[1].abs() < 1e-12);
        let s = scalar(&[2.0, 3.0], Sft::full_shift(2));
        let v = periodic_lyapunov(&s, &PeriodicWord::new(vec![0, 1]).unwrap()).unwrap();
        assert!((v.values[0] - 0.5 * 6f64.ln()).abs() < 1e-12);
        let demo =
            WindowCocycle::locally_constant(Sft::full_shift(2), vec![diag(&[2.0, 0.5]), rotation2(0.7)]).unwrap();
        let v = periodic_lyapunov(&demo, &PeriodicWord::new(vec![0]).unwrap()).unwrap();
        assert!((v.values[0] - 2f64.ln()).abs() < 1e-12 && (v.values[1] + 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn spectrum_counts() {
        let s = scalar(&[2.0, 3.0], Sft::full_shift(2));
        let sp = periodic_spectrum(&s, 2).unwrap();
        let mut vals: Vec<f64> = sp.iter().map(|(_, v)| v.values[0]).collect();
        vals.sort_by(f64::total_cmp);
        let mut want = vec![2f64.ln(), 3f64.ln(), 0.5 * 6f64.ln()];
        want.sort_by(f64::total_cmp);
        assert!(vals.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
        assert_eq!(periodic_orbits(&Sft::full_shift(2), 3).len(), 5);
        let g: Vec<String> = periodic_orbits(&Sft::golden_mean(), 2).iter().map(|w| w.to_string()).collect();
        assert_eq!(g, vec!["0", "01"]);
    }

    #[test]
    fn enumerator_matches_direct_products() {
        let a = WindowCocycle::from_fn(Sft::golden_mean(), 2, 1, |w| {
            let t = w[0] as f64 + 2.0 * w[1] as f64 + 3.0 * w[2] as f64;
            Mat::from_row_slice(2, 2, &[1.5 + 0.1 * t, 0.3, -0.2 * t, 0.8])
        })
        .unwrap();
        for n in [1, 2, 5, 9] {
            let got = map_word_products(&a, n, |w, p| (w.to_vec(), p.log_top_singular())).unwrap();
            assert_eq!(got.len() as u128, a.base().count_words(n));
            let words: Vec<Vec<Symbol>> = a.base().words(n).into_iter().map(|w| w.0).collect();
            for ((w, ls), want) in got.iter().zip(&words) {
                assert_eq!(w, want);
                let y = representative(a.base(), w).unwrap();
                let direct = a.product_wedge(&y, n).log_top_singular();
                assert!(ls.iter().zip(&direct).all(|(x, z)| (x - z).abs() < 1e-10));
            }
        }
    }

    #[test]
    fn gap_profile_constant_and_rotation() {
        let c = WindowCocycle::constant(Sft::full_shift(2), diag(&[4.0, 1.0])).unwrap();
        let g = gap_profile(&c, 1, &[1, 2, 3, 4, 5], GapMode::Exhaustive).unwrap();
        let f = g.fit.unwrap();
        assert!((f.slope - 4f64.ln()).abs() < 1e-12 && f.intercept.abs() < 1e-10 && f.r2 > 1.0 - 1e-12);
        let r = WindowCocycle::constant(Sft::full_shift(2), rotation2(0.4)).unwrap();
        let g = gap_profile(&r, 1, &[1, 2, 3, 4], GapMode::Exhaustive).unwrap();
        assert!(g.fit.unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn sampled_min_dominates_exhaustive() {
        let a = WindowCocycle::locally_constant(
            Sft::full_shift(2),
            vec![diag(&[2.0, 0.5]), Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0])],
        )
        .unwrap();
        let ex = gap_profile(&a, 1, &[6, 8], GapMode::Exhaustive).unwrap();
        let sa = gap_profile(&a, 1, &[6, 8], GapMode::Sampled { count: 50, seed: 3 }).unwrap();
        for (e, s) in ex.rows.iter().zip(&sa.rows) {
            assert!(s.min_gap >= e.min_gap - 1e-12);
        }
    }

    #[test]
    fn pointwise_constant_is_exact() {
        let c = WindowCocycle::constant(Sft::full_shift(2), diag(&[3.0, 0.5])).unwrap();
        let v = pointwise_estimate(&c, &Word::parse("0110").unwrap()).unwrap();
        assert!((v.values[0] - 3f64.ln()).abs() < 1e-12 && (v.values[1] - 0.5f64.ln()).abs() < 1e-12);
        let s = scalar(&[2.0, 5.0], Sft::full_shift(2));
        let v = pointwise_estimate(&s, &Word::parse("011").unwrap()).unwrap();
        assert!((v.values[0] - (2f64.ln() + 2.0 * 5f64.ln()) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn markov_samples_are_admissible_and_seeded() {
        let g = Sft::golden_mean();
        let a = markov_samples(&g, 20, 5, 7);
        assert!(a.iter().all(|w| g.is_admissible(w)));
        assert_eq!(a, markov_samples(&g, 20, 5, 7));
    }
}
