//! Pinching and twisting certificates for a cocycle and all its exterior
//! powers with respect to a common fixed point and homoclinic point.

use serde::{Deserialize, Serialize};

use crate::cocycle::WindowCocycle;
use crate::error::{Error, Result};
use crate::matnum::{self, binomial, eigenvalues, exterior_power, normalize, subsets, Mat, ProjHyperplane, ProjPoint};
use crate::sft::{PointSpec, Sft, Symbol, Word};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_EXCURSION: usize = 6;

/// Largest number of column configurations the twisting test may visit.
const TWIST_BUDGET: u128 = 5_000_000;

/// Eigen-decomposition of a pinching matrix.
#[derive(Clone, Debug)]
pub struct EigenFrame {
    pub p: Mat,
    pub eigvals: Vec<f64>,
    /// Unit eigenvectors `v_1 … v_D` as columns, ordered by decreasing modulus.
    pub eigvecs: Mat,
    /// Unit left eigenvectors; `left[i]` is the normal of
    /// `W_i = span{v_j : j ≠ i}`.
    pub left: Mat,
}

/// Outcome of the pinching test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PinchResult {
    pub margin: f64,
    pub passed: bool,
}

/// Minimum gap between consecutive log eigenvalue moduli.
pub fn pinching_check(p: &Mat, tol: f64) -> PinchResult {
    let ev = eigenvalues(p);
    let margin = if ev.len() < 2 {
        f64::INFINITY
    } else {
        ev.windows(2).map(|w| w[0].norm().ln() - w[1].norm().ln()).fold(f64::INFINITY, f64::min)
    };
    PinchResult { margin, passed: margin > tol }
}

impl EigenFrame {
    /// Requires every eigenvalue modulus to be simple, so that all
    /// eigenvalues are real.
    pub fn new(p: &Mat, tol: f64) -> Result<Self> {
        if !pinching_check(p, tol).passed {
            return Err(Error::InvalidArgument("matrix is not pinching".into()));
        }
        let dd = p.nrows();
        let ev: Vec<f64> = eigenvalues(p).iter().map(|c| c.re).collect();
        let mut vecs = Mat::zeros(dd, dd);
        let mut left = Mat::zeros(dd, dd);
        for (i, &l) in ev.iter().enumerate() {
            let shifted = p - Mat::identity(dd, dd) * l;
            vecs.set_column(i, &matnum::null_vector(&shifted));
            left.set_column(i, &matnum::null_vector(&shifted.transpose()));
        }
        Ok(EigenFrame { p: p.clone(), eigvals: ev, eigvecs: vecs, left })
    }

    pub fn dim(&self) -> usize {
        self.eigvals.len()
    }

    /// The frame of `Pᵀ`: eigenvectors and hyperplane normals swap roles.
    pub fn dual(&self) -> EigenFrame {
        EigenFrame {
            p: self.p.transpose(),
            eigvals: self.eigvals.clone(),
            eigvecs: self.left.clone(),
            left: self.eigvecs.clone(),
        }
    }

    /// `min_{i,j} ρ(ψ v_i, W_j) / (1 + ‖ψ‖_ρ)`: directions within this angle
    /// of an eigendirection are carried by `ψ` at least as far from every
    /// invariant hyperplane.
    pub fn twist_clearance(&self, psi: &Mat) -> f64 {
        let k = matnum::rho_norm_bound(psi, matnum::Domain::Whole);
        let mut m = f64::INFINITY;
        for i in 0..self.dim() {
            let img = normalize(&(psi * self.eigvecs.column(i)));
            for j in 0..self.dim() {
                let n = normalize(&self.left.column(j).into_owned());
                m = m.min(img.dot(&n).abs().min(1.0).asin());
            }
        }
        m / (1.0 + k)
    }

    pub fn vector(&self, i: usize) -> ProjPoint {
        ProjPoint::new(self.eigvecs.column(i).into_owned()).expect("unit eigenvector")
    }

    /// The invariant hyperplane `W_i`.
    pub fn hyperplane(&self, i: usize) -> ProjHyperplane {
        ProjHyperplane::from_normal(ProjPoint::new(self.left.column(i).into_owned()).expect("unit normal"))
    }
}

/// Outcome of the twisting test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwistResult {
    pub margin: f64,
    pub passed: bool,
    /// A configuration `(I, J)` attaining the margin.
    pub worst: (Vec<usize>, Vec<usize>),
}

/// Smallest singular value over all matrices with unit columns
/// `{ψ v_i : i ∈ I} ∪ {v_j : j ∈ J}`, `|I| + |J| <= D`.
///
/// Deleting columns never lowers the smallest singular value, so only
/// configurations with `|I| + |J| = D` are visited.
pub fn twisting_check(psi: &Mat, frame: &EigenFrame, tol: f64) -> Result<TwistResult> {
    let dd = frame.dim();
    let configs = binomial_u128(2 * dd as u128, dd as u128);
    if configs > TWIST_BUDGET {
        return Err(Error::BudgetExceeded(format!("twisting test needs {configs} configurations")));
    }
    let images: Vec<_> = (0..dd).map(|i| normalize(&(psi * frame.eigvecs.column(i)))).collect();
    let mut best = (f64::INFINITY, (vec![], vec![]));
    for k in 0..=dd {
        for i_set in subsets(dd, k) {
            for j_set in subsets(dd, dd - k) {
                let mut m = Mat::zeros(dd, dd);
                for (c, &i) in i_set.iter().enumerate() {
                    m.set_column(c, &images[i]);
                }
                for (c, &j) in j_set.iter().enumerate() {
                    m.set_column(k + c, &frame.eigvecs.column(j));
                }
                let s = matnum::singular_values(&m);
                let smin = s[dd - 1];
                if smin < best.0 {
                    best = (smin, (i_set.clone(), j_set.clone()));
                }
            }
        }
    }
    Ok(TwistResult { margin: best.0, passed: best.0 > tol, worst: best.1 })
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// A fixed symbol `a` with an excursion `e`: `p = a^∞` and `z` has
/// `z_i = a` for `i <= 0`, `z_1 … z_|e| = e`, and `a` afterwards.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypicalPair {
    pub symbol: Symbol,
    pub excursion: Word,
}

impl TypicalPair {
    pub fn new(base: &Sft, symbol: Symbol, excursion: Word) -> Result<Self> {
        if !base.allowed(symbol, symbol) {
            return Err(Error::NotFixedPoint(symbol));
        }
        let e = &excursion;
        if e.is_empty() || e[0] == symbol || e[e.len() - 1] == symbol {
            return Err(Error::NotHomoclinic);
        }
        let mut w = vec![symbol];
        w.extend_from_slice(e);
        w.push(symbol);
        base.check_word(&w)?;
        Ok(TypicalPair { symbol, excursion })
    }

    pub fn p(&self) -> PointSpec {
        PointSpec::fixed(self.symbol)
    }

    pub fn z(&self) -> PointSpec {
        let mut core = vec![self.symbol];
        core.extend_from_slice(&self.excursion);
        PointSpec::new(vec![self.symbol], core, vec![self.symbol], 0).expect("nonempty tails")
    }

    /// Least `ℓ` with `σ^ℓ z` in the local stable set of `p`.
    pub fn min_loop(&self) -> usize {
        self.excursion.len() + 1
    }
}

/// Margins for one exterior power.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelMargins {
    pub t: usize,
    pub pinch_margin: f64,
    pub twist_margin: f64,
    pub pinch_passed: bool,
    pub twist_passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TypicalityCertificate {
    pub pair: TypicalPair,
    pub p: PointSpec,
    pub z: PointSpec,
    pub per_t: Vec<LevelMargins>,
    pub tol: f64,
    pub passed: bool,
}

/// Runs the pinching and twisting tests on `Λ^t P` and `Λ^t ψ_z` for
/// `t = 1 … d-1`.
pub fn typicality_check(a: &WindowCocycle, pair: &TypicalPair, tol: f64) -> Result<TypicalityCertificate> {
    let pair = TypicalPair::new(a.base(), pair.symbol, pair.excursion.clone())?;
    let (p, z) = (pair.p(), pair.z());
    let pm = a.matrix_at(&p, 0).clone();
    let psi = a.holonomy_loop(&p, &z)?;
    let d = a.dim();
    let mut per_t = Vec::new();
    for t in 1..d {
        let pt = exterior_power(&pm, t);
        let pinch = pinching_check(&pt, tol);
        let (twist_margin, twist_passed) = if pinch.passed {
            let frame = EigenFrame::new(&pt, tol)?;
            let tw = twisting_check(&exterior_power(&psi, t), &frame, tol)?;
            (tw.margin, tw.passed)
        } else {
            (0.0, false)
        };
        per_t.push(LevelMargins {
            t,
            pinch_margin: pinch.margin,
            twist_margin,
            pinch_passed: pinch.passed,
            twist_passed,
        });
    }
    let passed = per_t.iter().all(|l| l.pinch_passed && l.twist_passed);
    Ok(TypicalityCertificate { pair, p, z, per_t, tol, passed })
}

/// Candidate excursions for the fixed symbol `a`, by length then
/// lexicographically.
pub fn excursions(base: &Sft, a: Symbol, max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        base.for_each_word(len, |w| {
            if w[0] != a && w[len - 1] != a && base.allowed(a, w[0]) && base.allowed(w[len - 1], a) {
                out.push(Word(w.to_vec()));
            }
        });
    }
    out
}

/// First passing pair in the scan order: fixed symbols ascending, then
/// excursions by length and lexicographically.
pub fn find_typical_pair(a: &WindowCocycle, max_len: usize, tol: f64) -> Result<Option<TypicalityCertificate>> {
    let fixed = a.base().fixed_symbols();
    if fixed.is_empty() {
        return Err(Error::NoFixedSymbol);
    }
    for s in fixed {
        for e in excursions(a.base(), s, max_len) {
            let cert = typicality_check(a, &TypicalPair { symbol: s, excursion: e }, tol)?;
            if cert.passed {
                return Ok(Some(cert));
            }
        }
    }
    Ok(None)
}

/// Dimension of the `t`-th exterior power.
pub fn wedge_dim(d: usize, t: usize) -> usize {
    binomial(d, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matnum::{diag, rotation2};

    fn demo() -> WindowCocycle {
        WindowCocycle::locally_constant(Sft::full_shift(2), vec![diag(&[2.0, 0.5]), rotation2(std::f64::consts::FRAC_PI_4)])
            .unwrap()
    }

    #[test]
    fn pinching_examples() {
        let r = pinching_check(&diag(&[3.0, 2.0, 1.0]), 1e-8);
        assert!(r.passed && (r.margin - 1.5f64.ln()).abs() < 1e-12);
        assert!(!pinching_check(&diag(&[2.0, 2.0, 1.0]), 1e-8).passed);
        assert!(!pinching_check(&rotation2(0.3), 1e-8).passed);
    }

    #[test]
    fn twisting_examples() {
        let f = EigenFrame::new(&diag(&[2.0, 1.0]), 1e-8).unwrap();
        assert!(!twisting_check(&Mat::identity(2, 2), &f, 1e-8).unwrap().passed);
        assert!(twisting_check(&rotation2(std::f64::consts::FRAC_PI_4), &f, 1e-8).unwrap().passed);
        let swap = Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(!twisting_check(&swap, &f, 1e-8).unwrap().passed);
    }

    #[test]
    fn demo_is_typical() {
        let a = demo();
        let pair = TypicalPair { symbol: 0, excursion: Word(vec![1]) };
        let c = typicality_check(&a, &pair, DEFAULT_TOL).unwrap();
        assert!(c.passed);
        let found = find_typical_pair(&a, 6, DEFAULT_TOL).unwrap().unwrap();
        assert_eq!(found.pair, pair);
        let rot = WindowCocycle::constant(Sft::full_shift(2), rotation2(0.4)).unwrap();
        let c = typicality_check(&rot, &pair, DEFAULT_TOL).unwrap();
        assert!(!c.per_t[0].pinch_passed);
        let id = WindowCocycle::constant(Sft::full_shift(2), Mat::identity(2, 2)).unwrap();
        assert!(find_typical_pair(&id, 4, DEFAULT_TOL).unwrap().is_none());
        let one = WindowCocycle::constant(Sft::full_shift(2), diag(&[2.0])).unwrap();
        assert!(typicality_check(&one, &pair, DEFAULT_TOL).unwrap().passed);
    }

    #[test]
    fn golden_mean_uses_zero() {
        let a = WindowCocycle::locally_constant(Sft::golden_mean(), vec![diag(&[2.0, 0.5]), rotation2(0.7)]).unwrap();
        let c = find_typical_pair(&a, 6, DEFAULT_TOL).unwrap().unwrap();
        assert_eq!(c.pair.symbol, 0);
        assert!(matches!(TypicalPair::new(a.base(), 1, Word(vec![0])), Err(Error::NotFixedPoint(1))));
    }
}
