//! Paths between points of the shift, the turning lemma, transversal paths
//! and the construction of proximal periodic orbits shadowing a cylinder.
//!
//! Every existence constant of the construction is replaced by a search:
//! turning exponents are the least that work, excursion loops are doubled
//! until the final periodic product passes [`is_eps_proximal`] for every
//! member of the family. Proximality is always certified on the periodic
//! product itself.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{linear_fit, LinearFit};
use crate::cocycle::WindowCocycle;
use crate::error::{Error, Result};
use crate::matnum::{ams_hyperplane, normalize, rel_residual, rho, Mat, ProjHyperplane, ProjPoint, Vector};
use crate::proximal::{is_eps_proximal, EpsProximalWitness};
use crate::sft::{PeriodicWord, PointSpec, Sft, Symbol, Word};
use crate::typicality::{twisting_check, EigenFrame, TypicalPair, TypicalityCertificate, DEFAULT_TOL};

/// Largest excursion loop length tried.
pub const ELL_CAP: usize = 1 << 14;
/// Largest turning exponent tried.
pub const TURN_CAP: usize = 1 << 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    pub ell_cap: usize,
    pub turn_cap: usize,
    /// Re-bridging attempts after a degenerate AMS hyperplane or a failed
    /// transversality step.
    pub max_retries: usize,
    /// Pad the excursion loop by the slack between each turning exponent,
    /// bridge length and retry count and its uniform bound, so that
    /// `n_q − n` does not depend on the word.
    pub uniform_period: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { ell_cap: ELL_CAP, turn_cap: TURN_CAP, max_retries: 3, uniform_period: true }
    }
}

/// Cocycles over a common shift that are handled simultaneously.
#[derive(Clone, Debug)]
pub struct Family {
    base: Sft,
    members: Vec<WindowCocycle>,
}

impl Family {
    pub fn new(members: Vec<WindowCocycle>) -> Result<Self> {
        let base = members.first().ok_or_else(|| Error::InvalidArgument("empty family".into()))?.base().clone();
        if members.iter().any(|m| m.base() != &base) {
            return Err(Error::InvalidArgument("family members live over different shifts".into()));
        }
        Ok(Family { base, members })
    }

    /// `Λ^t A` for `t = 1 … d-1` (empty when `d = 1`).
    pub fn exterior_powers(a: &WindowCocycle) -> Result<Self> {
        let members = (1..a.dim()).map(|t| a.exterior_power(t)).collect::<Result<Vec<_>>>()?;
        Ok(Family { base: a.base().clone(), members })
    }

    pub fn base(&self) -> &Sft {
        &self.base
    }

    pub fn members(&self) -> &[WindowCocycle] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A path from `start` to `end`: the orbit segment of length `length`
/// starting at `entry`, where `entry` lies on the local unstable set of
/// `start` and its exit `σ^length entry` on the local stable set of `end`.
/// Per cocycle its matrix is `H^s_{exit,end} A^length(entry) H^u_{start,entry}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSpec {
    pub start: PointSpec,
    pub entry: PointSpec,
    pub length: usize,
    pub end: PointSpec,
}

impl PathSpec {
    pub fn new(start: PointSpec, entry: PointSpec, length: usize, end: PointSpec) -> Result<Self> {
        if !start.in_local_unstable(&entry) {
            return Err(Error::NotOnLocalLeaf("unstable"));
        }
        if !entry.shift(length as i64).in_local_stable(&end) {
            return Err(Error::NotOnLocalLeaf("stable"));
        }
        Ok(PathSpec { start, entry, length, end })
    }

    /// The length-0 path at `x`.
    pub fn trivial(x: &PointSpec) -> Self {
        PathSpec { start: x.clone(), entry: x.clone(), length: 0, end: x.clone() }
    }

    pub fn exit(&self) -> PointSpec {
        self.entry.shift(self.length as i64)
    }

    pub fn matrix(&self, a: &WindowCocycle) -> Mat {
        let r = a.radius() as i64;
        let hu = a.holonomy_u_truncated(&self.start, &self.entry, r);
        let hs = a.holonomy_s_truncated(&self.exit(), &self.end, r);
        hs * a.product(&self.entry, self.length as i64) * hu
    }

    /// The path matrix divided by a positive scale, and the log of that scale.
    pub fn matrix_scaled(&self, a: &WindowCocycle) -> (Mat, f64) {
        let r = a.radius() as i64;
        let hu = a.holonomy_u_truncated(&self.start, &self.entry, r);
        let hs = a.holonomy_s_truncated(&self.exit(), &self.end, r);
        let (m, s) = a.product_scaled(&self.entry, self.length);
        let out = hs * m * hu;
        let mx = out.amax();
        (out / mx, s + mx.ln())
    }
}

/// Concatenates a path `x → y` with a path `y → z` through the bracket of
/// the two meeting points.
pub fn connect(p1: &PathSpec, p2: &PathSpec) -> Result<PathSpec> {
    if !p1.end.same_sequence(&p2.start) {
        return Err(Error::EndpointMismatch);
    }
    let b = p1.exit().bracket(&p2.entry)?;
    PathSpec::new(p1.start.clone(), b.shift(-(p1.length as i64)), p1.length + p2.length, p2.end.clone())
}

/// Relative residual between the matrix of `connect(p1, p2)` and
/// `B₂ R B₁`, with `R` the rectangle of holonomies at the meeting point.
pub fn connection_residual(a: &WindowCocycle, p1: &PathSpec, p2: &PathSpec) -> Result<f64> {
    let c = connect(p1, p2)?;
    let (y, y0, y1) = (&p1.end, p1.exit(), &p2.entry);
    let m = c.entry.shift(p1.length as i64);
    let r = a.holonomy_u(y1, y)?.matrix
        * a.holonomy_s(&m, y1)?.matrix
        * a.holonomy_u(&y0, &m)?.matrix
        * a.holonomy_s(y, &y0)?.matrix;
    Ok(rel_residual(&c.matrix(a), &(p2.matrix(a) * r * p1.matrix(a))))
}

fn angle(u: &Vector, v: &Vector) -> f64 {
    match (ProjPoint::new(u.clone()), ProjPoint::new(v.clone())) {
        (Ok(a), Ok(b)) => rho(&a, &b),
        _ => FRAC_PI_2,
    }
}

fn near_eigendirection(f: &EigenFrame, u: &Vector, delta: f64) -> bool {
    (0..f.dim()).any(|i| angle(u, &f.eigvecs.column(i).into_owned()) <= delta)
}

/// Least `a <= cap` such that `P_t^a u_t` is within `delta` of an
/// eigendirection of `P_t`, for every `t` at once.
pub fn turn_direction(frames: &[EigenFrame], dirs: &[ProjPoint], delta: f64, cap: usize) -> Result<usize> {
    if frames.len() != dirs.len() {
        return Err(Error::DimensionMismatch { expected: frames.len(), found: dirs.len() });
    }
    let mut u: Vec<Vector> = dirs.iter().map(|d| d.vector().clone()).collect();
    for a in 0..=cap {
        if frames.iter().zip(&u).all(|(f, v)| near_eigendirection(f, v, delta)) {
            return Ok(a);
        }
        for (f, v) in frames.iter().zip(u.iter_mut()) {
            *v = normalize(&(&f.p * &*v));
        }
    }
    Err(Error::TurnCapExceeded(cap))
}

/// An `N` such that [`turn_direction`] with these frames and `delta`
/// succeeds within `N` steps for every choice of directions.
///
/// In eigen-coordinates the log size of each component of `P^a u` is affine
/// in `a`. The image is within `delta` of `v_j` once component `j` beats
/// every other by `M = ln((D-1)/sin δ)`, which fails only while some pair of
/// lines is closer than `M`: at most `⌊2M/|Δ slope|⌋ + 1` integers per pair.
pub fn turning_bound(frames: &[EigenFrame], delta: f64) -> usize {
    let mut total = 0;
    for f in frames {
        let d = f.dim();
        if d < 2 {
            continue;
        }
        let m = ((d - 1) as f64 / delta.sin()).ln().max(0.0);
        let logs: Vec<f64> = f.eigvals.iter().map(|l| l.abs().ln()).collect();
        for i in 0..d {
            for j in i + 1..d {
                total += (2.0 * m / (logs[i] - logs[j]).abs()).floor() as usize + 1;
            }
        }
    }
    total
}

/// Least `L <= cap` such that `P^L` carries every direction at angle at
/// least `theta0` from `W₁` to within `target` of `v₁`.
///
/// Writing `u = c v₁ + w` with `w ∈ W₁`, `|c| >= sin θ₀ / sin ρ(v₁, W₁)` and
/// `|w| <= 1 + |c|`, so `sin ρ(P^L u, v₁) <= (1 + 1/|c|) ‖P^L|W₁‖ / |λ₁|^L`.
pub fn push_bound(frame: &EigenFrame, theta0: f64, target: f64, cap: usize) -> Option<usize> {
    let d = frame.dim();
    if d < 2 {
        return Some(0);
    }
    let v1 = normalize(&frame.eigvecs.column(0).into_owned());
    let l1 = normalize(&frame.left.column(0).into_owned());
    let sep = v1.dot(&l1).abs().min(1.0);
    let c = theta0.sin() / sep;
    let basis = crate::matnum::orthogonal_complement(&l1);
    let step = &frame.p / frame.eigvals[0].abs();
    let mut q = basis;
    for l in 0..=cap {
        if (1.0 + 1.0 / c) * crate::matnum::op_norm(&q) <= target.sin() {
            return Some(l);
        }
        q = &step * q;
    }
    None
}

/// The point `a^∞ · b_L · x · b_R · a^∞` with `x` at coordinates `0..n`,
/// where `b_L`, `b_R` are the shortest, then lexicographically least,
/// bridges from and to the fixed symbol.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CanonicalRepresentative {
    pub left_bridge: Word,
    pub right_bridge: Word,
    pub point: PointSpec,
}

pub fn canonical_representative(base: &Sft, a: Symbol, x_word: &Word) -> Result<CanonicalRepresentative> {
    if x_word.is_empty() {
        return Err(Error::InvalidArgument("empty word".into()));
    }
    base.check_word(x_word)?;
    if !base.allowed(a, a) {
        return Err(Error::NotFixedPoint(a));
    }
    let bl = base.shortest_bridge(a, x_word[0]);
    let br = base.shortest_bridge(x_word[x_word.len() - 1], a);
    let core = Word::concat(&[&bl, x_word, &br]).0;
    let point = PointSpec::new(vec![a], core, vec![a], bl.len() as i64)?;
    Ok(CanonicalRepresentative { left_bridge: bl, right_bridge: br, point })
}

/// A transversal path with the per-member margins `ρ(B_t w_t, U_t)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransversalPath {
    pub path: PathSpec,
    pub margins: Vec<f64>,
    /// Turning exponent used on the dual side.
    pub dual_turn: usize,
}

/// One family member with the frame data at the fixed point.
struct Member<'a> {
    a: &'a WindowCocycle,
    frame: EigenFrame,
    dual: EigenFrame,
    /// Largest cone radius around eigendirections that the loop twist
    /// carries clear of every invariant hyperplane, forward and dual.
    clearance: f64,
    dual_clearance: f64,
    /// `ρ(v₁, W₁)`.
    sep: f64,
}

struct Engine<'a> {
    base: &'a Sft,
    pair: TypicalPair,
    p: PointSpec,
    z: PointSpec,
    radius: usize,
    ell0: usize,
    members: Vec<Member<'a>>,
    opts: SynthesisOptions,
    /// Uniform bounds on the forward and dual turning exponents.
    turn_bound: usize,
    dual_turn_bound: usize,
    /// A priori dual push length.
    dual_push: usize,
    /// Longest shortest bridges into and out of the fixed symbol.
    bridge_in: usize,
    bridge_out: usize,
}

impl<'a> Engine<'a> {
    fn new(family: &'a Family, pair: &TypicalPair, opts: &SynthesisOptions) -> Result<Self> {
        let pair = TypicalPair::new(family.base(), pair.symbol, pair.excursion.clone())?;
        let (p, z) = (pair.p(), pair.z());
        let radius = family.members().iter().map(|m| m.radius()).max().unwrap_or(0);
        let ell0 = pair.min_loop() + radius;
        let lp = PathSpec::new(p.clone(), z.clone(), ell0, p.clone())?;
        let mut members = Vec::new();
        for (idx, a) in family.members().iter().enumerate() {
            if a.dim() < 2 {
                continue;
            }
            let pm = a.matrix_at(&p, 0).clone();
            let frame = EigenFrame::new(&pm, DEFAULT_TOL).map_err(|_| Error::MemberNotTypical(idx + 1))?;
            let twist = lp.matrix(a);
            if !twisting_check(&twist, &frame, DEFAULT_TOL)?.passed {
                return Err(Error::MemberNotTypical(idx + 1));
            }
            let dual = frame.dual();
            let clearance = frame.twist_clearance(&twist);
            let dual_clearance = dual.twist_clearance(&twist.transpose());
            let v1 = normalize(&frame.eigvecs.column(0).into_owned());
            let l1 = normalize(&frame.left.column(0).into_owned());
            let sep = v1.dot(&l1).abs().min(1.0).asin();
            members.push(Member { a, frame, dual, clearance, dual_clearance, sep });
        }
        let base = family.base();
        let q = base.alphabet_size() as Symbol;
        let a = pair.symbol;
        let bridge_in = (0..q).map(|s| base.shortest_bridge(a, s).len()).max().unwrap_or(0);
        let bridge_out = (0..q).map(|s| base.shortest_bridge(s, a).len()).max().unwrap_or(0);
        let mut e = Engine {
            base,
            pair,
            p,
            z,
            radius,
            ell0,
            members,
            opts: opts.clone(),
            turn_bound: 0,
            dual_turn_bound: 0,
            dual_push: 1,
            bridge_in,
            bridge_out,
        };
        e.turn_bound = turning_bound(&e.frames(), e.clearance() / 3.0);
        e.dual_turn_bound = turning_bound(&e.dual_frames(), e.dual_clearance() / 2.0);
        e.dual_push = e
            .members
            .iter()
            .map(|m| push_bound(&m.dual, e.dual_clearance(), m.sep / 4.0, e.opts.ell_cap).unwrap_or(e.opts.ell_cap))
            .max()
            .unwrap_or(1)
            .max(1);
        Ok(e)
    }

    fn frames(&self) -> Vec<EigenFrame> {
        self.members.iter().map(|m| m.frame.clone()).collect()
    }

    fn dual_frames(&self) -> Vec<EigenFrame> {
        self.members.iter().map(|m| m.dual.clone()).collect()
    }

    fn clearance(&self) -> f64 {
        self.members.iter().map(|m| m.clearance).fold(FRAC_PI_2, f64::min)
    }

    fn dual_clearance(&self) -> f64 {
        self.members.iter().map(|m| m.dual_clearance).fold(FRAC_PI_2, f64::min)
    }

    /// `z`'s orbit segment of length `ell`: matrix `P^ell ψ_z`.
    fn loop_path(&self, ell: usize) -> Result<PathSpec> {
        PathSpec::new(self.p.clone(), self.z.clone(), ell, self.p.clone())
    }

    /// `P^n` as a path at the fixed point.
    fn dwell(&self, n: usize) -> PathSpec {
        PathSpec { length: n, ..PathSpec::trivial(&self.p) }
    }

    /// From `x` into the local stable set of `p`, then `extra` more steps.
    fn to_fixed(&self, x: &PointSpec, extra: usize) -> Result<PathSpec> {
        let a = self.pair.symbol;
        let x0 = x.coord(0);
        let fut = if x0 == a {
            vec![]
        } else {
            let mut b = self.base.shortest_bridge(x0, a).0;
            b.push(a);
            b
        };
        let entry = x.with_future(&fut, &[a]);
        PathSpec::new(x.clone(), entry, fut.len() + self.radius + extra, self.p.clone())
    }

    /// From `p` to `y` through `a^{radius + extra}` and the shortest bridge
    /// to `y_0`; the matrix is `C P^extra` with `C` independent of `extra`.
    fn from_fixed(&self, y: &PointSpec, extra: usize) -> Result<PathSpec> {
        let a = self.pair.symbol;
        let mut past = vec![a; 1 + self.radius + extra];
        past.extend(self.base.shortest_bridge(a, y.coord(0)).0);
        let m = past.len();
        let entry = y.with_past(&past, &[a]).shift(-(m as i64));
        PathSpec::new(self.p.clone(), entry, m, y.clone())
    }

    fn scaled(&self, path: &PathSpec) -> Vec<Mat> {
        self.members.iter().map(|m| path.matrix_scaled(m.a).0).collect()
    }

    /// Path `x → p` carrying each `w_t` within `sep_t / 4` of `v₁⁽ᵗ⁾`.
    fn push_to_top(&self, x: &PointSpec, dirs: &[ProjPoint]) -> Result<PathSpec> {
        let close = |mats: &[Mat]| {
            self.members.iter().zip(mats).zip(dirs).all(|((m, g), w)| {
                angle(&(g * w.vector()), &m.frame.eigvecs.column(0).into_owned()) <= m.sep / 4.0
            })
        };
        if x.same_sequence(&self.p) {
            let id: Vec<Mat> = self.members.iter().map(|m| Mat::identity(m.a.dim(), m.a.dim())).collect();
            if close(&id) {
                return Ok(PathSpec::trivial(x));
            }
        }
        let t0 = self.to_fixed(x, 0)?;
        let u: Vec<ProjPoint> = self
            .scaled(&t0)
            .iter()
            .zip(dirs)
            .map(|(g, w)| ProjPoint::new(g * w.vector()))
            .collect::<Result<_>>()?;
        let a1 = turn_direction(&self.frames(), &u, self.clearance() / 2.0, self.opts.turn_cap)?;
        let head = connect(&self.to_fixed(x, a1)?, &self.loop_path(self.ell0)?)?;
        let mut l = 1;
        loop {
            let path = connect(&head, &self.dwell(l))?;
            if close(&self.scaled(&path)) {
                return Ok(path);
            }
            if l >= self.opts.ell_cap {
                return Err(Error::TransversalityFailed("forward push did not reach the top direction".into()));
            }
            l *= 2;
        }
    }

    /// Path `p → y` whose transpose carries each normal `n_t` within
    /// `sep_t / 4` of the top left eigenvector `ℓ₁⁽ᵗ⁾`.
    fn pull_from_top(&self, y: &PointSpec, normals: &[ProjPoint]) -> Result<(PathSpec, usize)> {
        let c0 = self.from_fixed(y, 0)?;
        let u: Vec<ProjPoint> = self
            .scaled(&c0)
            .iter()
            .zip(normals)
            .map(|(g, n)| ProjPoint::new(g.transpose() * n.vector()))
            .collect::<Result<_>>()?;
        let a2 = turn_direction(&self.dual_frames(), &u, self.dual_clearance() / 2.0, self.opts.turn_cap)?;
        let tail = self.from_fixed(y, a2)?;
        let mut l = self.dual_push;
        loop {
            let path = connect(&connect(&self.dwell(l), &self.loop_path(self.ell0)?)?, &tail)?;
            let ok = self.members.iter().zip(self.scaled(&path)).zip(normals).all(|((m, g), n)| {
                angle(&(g.transpose() * n.vector()), &m.frame.left.column(0).into_owned()) <= m.sep / 4.0
            });
            if ok {
                return Ok((path, a2));
            }
            if l >= self.opts.ell_cap {
                return Err(Error::TransversalityFailed("dual push did not reach the top hyperplane".into()));
            }
            l *= 2;
        }
    }

    fn transversal(
        &self,
        x: &PointSpec,
        y: &PointSpec,
        dirs: &[ProjPoint],
        hyperplanes: &[ProjHyperplane],
    ) -> Result<TransversalPath> {
        let k = self.members.len();
        if dirs.len() != k || hyperplanes.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: dirs.len().min(hyperplanes.len()) });
        }
        let normals: Vec<ProjPoint> = hyperplanes.iter().map(|h| h.normal.clone()).collect();
        let b1 = self.push_to_top(x, dirs)?;
        let (b2, dual_turn) = self.pull_from_top(y, &normals)?;
        let path = connect(&b1, &b2)?;
        let margins: Vec<f64> = self
            .scaled(&path)
            .iter()
            .zip(dirs)
            .zip(&normals)
            .map(|((g, w), n)| normalize(&(g * w.vector())).dot(n.vector()).abs().min(1.0).asin())
            .collect();
        if margins.iter().any(|&m| !(m > 1e-12)) {
            return Err(Error::TransversalityFailed(format!("margins {margins:?}")));
        }
        Ok(TransversalPath { path, margins, dual_turn })
    }

    fn synthesize(&self, x_word: &Word, tau: f64) -> Result<Synthesis> {
        let rep = canonical_representative(self.base, self.pair.symbol, x_word)?;
        if self.members.is_empty() {
            return Ok(self.closure(x_word, rep));
        }
        let mut last = None;
        for retry in 0..=self.opts.max_retries {
            match self.attempt(x_word, &rep, tau, retry) {
                Ok(mut s) => {
                    s.retries = retry;
                    return Ok(s);
                }
                Err(e @ (Error::DegenerateTopSingularValue | Error::TransversalityFailed(_))) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// `q = x · (bridge back to x_0)`, used when no member needs
    /// proximality.
    fn closure(&self, x_word: &Word, rep: CanonicalRepresentative) -> Synthesis {
        let b = self.base.shortest_bridge(x_word[x_word.len() - 1], x_word[0]);
        let q = PeriodicWord::new(Word::concat(&[x_word, &b]).0).expect("nonempty word");
        Synthesis {
            n_q: q.len(),
            q,
            j: 0,
            witnesses: vec![],
            ell_used: 0,
            turn: 0,
            retries: 0,
            margins: vec![],
            factorization_residual: 0.0,
            representative: rep,
        }
    }

    fn attempt(
        &self,
        x_word: &Word,
        rep: &CanonicalRepresentative,
        tau: f64,
        retry: usize,
    ) -> Result<Synthesis> {
        let n = x_word.len();
        let y = &rep.point;
        let g_len = n + rep.right_bridge.len() + self.radius + 1 + retry;
        let g_path = PathSpec::new(y.clone(), y.clone(), g_len, self.p.clone())?;
        let gs = self.scaled(&g_path);
        let hyper: Vec<ProjHyperplane> = gs.iter().map(ams_hyperplane).collect::<Result<_>>()?;
        let v1: Vec<ProjPoint> = self.members.iter().map(|m| m.frame.vector(0)).collect();
        let tp = self.transversal(&self.p, y, &v1, &hyper)?;
        let u: Vec<ProjPoint> = self
            .scaled(&tp.path)
            .iter()
            .zip(&gs)
            .zip(&v1)
            .map(|((b, g), v)| ProjPoint::new(g * (b * v.vector())))
            .collect::<Result<_>>()?;
        let a = turn_direction(&self.frames(), &u, self.clearance() / 3.0, self.opts.turn_cap)?;
        let ga = PathSpec::new(y.clone(), y.clone(), g_len + a, self.p.clone())?;
        let gt = connect(&tp.path, &ga)?;
        let offset = tp.path.length;
        let mut ell = self.ell0;
        if self.opts.uniform_period {
            ell += self.turn_bound.saturating_sub(a)
                + self.dual_turn_bound.saturating_sub(tp.dual_turn)
                + self.bridge_in.saturating_sub(rep.left_bridge.len())
                + self.bridge_out.saturating_sub(rep.right_bridge.len())
                + self.opts.max_retries.saturating_sub(retry);
        }
        loop {
            let bt = connect(&gt, &self.loop_path(ell)?)?;
            let n_q = bt.length;
            let q = PeriodicWord::new(bt.entry.window(0, n_q as i64))?;
            let qp = PointSpec::periodic(&q);
            let witnesses: Vec<EpsProximalWitness> = self
                .members
                .par_iter()
                .map(|m| {
                    let (g, _) = m.a.product_scaled(&qp, n_q);
                    is_eps_proximal(&g, tau)
                })
                .collect();
            if witnesses.iter().all(|w| w.passed) {
                let j = least_offset(&q, x_word)
                    .ok_or_else(|| Error::SynthesisFailed("periodic word does not contain the cylinder word".into()))?;
                debug_assert!(q.symbols()[offset..offset + n] == x_word[..]);
                let factorization_residual = self.factorization_residual(&bt, &q)?;
                return Ok(Synthesis {
                    q,
                    n_q,
                    j,
                    witnesses,
                    ell_used: ell,
                    turn: a,
                    retries: 0,
                    margins: tp.margins,
                    factorization_residual,
                    representative: rep.clone(),
                });
            }
            if ell >= self.opts.ell_cap {
                return Err(Error::SynthesisFailed(format!("loop length cap {} reached", self.opts.ell_cap)));
            }
            ell = (ell * 2).min(self.opts.ell_cap);
        }
    }

    /// Largest relative residual of `A^{n_q}(q) = H₁ B̃ H₂` over the members,
    /// both sides normalised to unit Frobenius norm.
    fn factorization_residual(&self, bt: &PathSpec, q: &PeriodicWord) -> Result<f64> {
        let qp = PointSpec::periodic(q);
        let n_q = bt.length;
        let w = &bt.entry;
        let wt = bt.exit();
        let r = w.bracket(&qp)?;
        let rt = r.shift(n_q as i64);
        let mut worst: f64 = 0.0;
        for m in &self.members {
            let a = m.a;
            let h2 = a.holonomy_u(&r, &self.p)?.matrix * a.holonomy_s(&qp, &r)?.matrix;
            let h1 = a.holonomy_s(&rt, &qp)?.matrix * a.holonomy_u(&wt, &rt)?.matrix * a.holonomy_s(&self.p, &wt)?.matrix;
            let lhs = a.product_scaled(&qp, n_q).0;
            let rhs = h1 * bt.matrix_scaled(a).0 * h2;
            worst = worst.max(rel_residual(&(&lhs / lhs.norm()), &(&rhs / rhs.norm())));
        }
        Ok(worst)
    }
}

struct Synthesis {
    q: PeriodicWord,
    n_q: usize,
    j: usize,
    witnesses: Vec<EpsProximalWitness>,
    ell_used: usize,
    turn: usize,
    retries: usize,
    margins: Vec<f64>,
    factorization_residual: f64,
    representative: CanonicalRepresentative,
}

/// Least `j` with `q_{j+i mod n_q} = x_i` for `0 <= i < n`.
pub fn least_offset(q: &PeriodicWord, x: &[Symbol]) -> Option<usize> {
    let s = q.symbols();
    let nq = s.len();
    (0..nq).find(|&j| x.iter().enumerate().all(|(i, &c)| s[(j + i) % nq] == c))
}

/// Outcome of one synthesis run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub x_word: Word,
    pub n: usize,
    pub q: PeriodicWord,
    pub n_q: usize,
    /// Least shadowing offset: `σ^j q ∈ [x]_n`.
    pub j: usize,
    /// `n_q − n`.
    pub k: usize,
    pub tau: f64,
    /// One passing witness per family member of dimension at least 2.
    pub witnesses: Vec<EpsProximalWitness>,
    /// `‖μ⃗(Aⁿ(y)) − χ⃗(A^{n_q}(q))‖` at the canonical representative `y`.
    pub bound_value: f64,
    pub mu_x: Vec<f64>,
    pub chi_q: Vec<f64>,
    pub ell_used: usize,
    pub turn: usize,
    pub retries: usize,
    pub margins: Vec<f64>,
    pub factorization_residual: f64,
    pub representative: CanonicalRepresentative,
}

fn report(reference: &WindowCocycle, x_word: &Word, tau: f64, s: Synthesis) -> SynthesisReport {
    let n = x_word.len();
    let mu_x = reference.product_wedge(&s.representative.point, n).mu();
    let chi_q = reference.product_wedge(&PointSpec::periodic(&s.q), s.n_q).chi();
    let bound_value = mu_x.iter().zip(&chi_q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    SynthesisReport {
        x_word: x_word.clone(),
        n,
        k: s.n_q - n,
        q: s.q,
        n_q: s.n_q,
        j: s.j,
        tau,
        witnesses: s.witnesses,
        bound_value,
        mu_x,
        chi_q,
        ell_used: s.ell_used,
        turn: s.turn,
        retries: s.retries,
        margins: s.margins,
        factorization_residual: s.factorization_residual,
        representative: s.representative,
    }
}

fn require_passing(cert: &TypicalityCertificate) -> Result<()> {
    if cert.passed {
        Ok(())
    } else {
        Err(Error::InvalidArgument("typicality certificate did not pass".into()))
    }
}

/// A transversal path from `x` to `y` for the exterior powers of `a`.
pub fn transversal_path(
    a: &WindowCocycle,
    cert: &TypicalityCertificate,
    x: &PointSpec,
    y: &PointSpec,
    dirs: &[ProjPoint],
    hyperplanes: &[ProjHyperplane],
) -> Result<TransversalPath> {
    require_passing(cert)?;
    let family = Family::exterior_powers(a)?;
    transversal_path_family(&family, &cert.pair, x, y, dirs, hyperplanes, &SynthesisOptions::default())
}

/// [`transversal_path`] for an arbitrary family with a common typical pair.
/// Members of dimension 1 are skipped; `dirs` and `hyperplanes` list the rest.
pub fn transversal_path_family(
    family: &Family,
    pair: &TypicalPair,
    x: &PointSpec,
    y: &PointSpec,
    dirs: &[ProjPoint],
    hyperplanes: &[ProjHyperplane],
    opts: &SynthesisOptions,
) -> Result<TransversalPath> {
    let engine = Engine::new(family, pair, opts)?;
    if engine.members.is_empty() {
        let path = connect(&engine.to_fixed(x, 0)?, &engine.from_fixed(y, 0)?)?;
        return Ok(TransversalPath { path, margins: vec![], dual_turn: 0 });
    }
    engine.transversal(x, y, dirs, hyperplanes)
}

pub fn build_proximal_periodic(
    a: &WindowCocycle,
    cert: &TypicalityCertificate,
    x_word: &Word,
    tau: f64,
) -> Result<SynthesisReport> {
    build_proximal_periodic_with(a, cert, x_word, tau, &SynthesisOptions::default())
}

pub fn build_proximal_periodic_with(
    a: &WindowCocycle,
    cert: &TypicalityCertificate,
    x_word: &Word,
    tau: f64,
    opts: &SynthesisOptions,
) -> Result<SynthesisReport> {
    require_passing(cert)?;
    let family = Family::exterior_powers(a)?;
    let engine = Engine::new(&family, &cert.pair, opts)?;
    Ok(report(a, x_word, tau, engine.synthesize(x_word, tau)?))
}

/// Synthesis for a family; spectral quantities are reported for `reference`.
pub fn build_proximal_periodic_family(
    family: &Family,
    pair: &TypicalPair,
    reference: &WindowCocycle,
    x_word: &Word,
    tau: f64,
    opts: &SynthesisOptions,
) -> Result<SynthesisReport> {
    let engine = Engine::new(family, pair, opts)?;
    Ok(report(reference, x_word, tau, engine.synthesize(x_word, tau)?))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub word: Word,
    pub n: usize,
    pub bound_value: Option<f64>,
    pub n_q: Option<usize>,
    pub k: Option<usize>,
    pub ell_used: Option<usize>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremAReport {
    pub tau: f64,
    pub samples: Vec<SampleOutcome>,
    pub success_rate: f64,
    /// Largest bound value over successful samples.
    pub empirical_c: f64,
    /// Largest `n_q − n` over successful samples.
    pub empirical_k: usize,
    /// Least-squares fit of bound value against `n`.
    pub fit: Option<LinearFit>,
}

/// Runs the synthesis on every sample (in parallel) and aggregates the
/// shadowing constants. Per-sample failures are recorded, not propagated.
pub fn verify_theorem_a(
    a: &WindowCocycle,
    cert: &TypicalityCertificate,
    samples: &[Word],
    tau: f64,
    opts: &SynthesisOptions,
) -> Result<TheoremAReport> {
    require_passing(cert)?;
    let family = Family::exterior_powers(a)?;
    let engine = Engine::new(&family, &cert.pair, opts)?;
    let outcomes: Vec<SampleOutcome> = samples
        .par_iter()
        .map(|w| match engine.synthesize(w, tau) {
            Ok(s) => {
                let r = report(a, w, tau, s);
                SampleOutcome {
                    word: w.clone(),
                    n: w.len(),
                    bound_value: Some(r.bound_value),
                    n_q: Some(r.n_q),
                    k: Some(r.k),
                    ell_used: Some(r.ell_used),
                    error: None,
                }
            }
            Err(e) => SampleOutcome {
                word: w.clone(),
                n: w.len(),
                bound_value: None,
                n_q: None,
                k: None,
                ell_used: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let ok: Vec<&SampleOutcome> = outcomes.iter().filter(|o| o.error.is_none()).collect();
    let success_rate = if outcomes.is_empty() { 0.0 } else { ok.len() as f64 / outcomes.len() as f64 };
    let empirical_c = ok.iter().filter_map(|o| o.bound_value).fold(0.0, f64::max);
    let empirical_k = ok.iter().filter_map(|o| o.k).max().unwrap_or(0);
    let xs: Vec<f64> = ok.iter().map(|o| o.n as f64).collect();
    let ys: Vec<f64> = ok.iter().filter_map(|o| o.bound_value).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(TheoremAReport { tau, samples: outcomes, success_rate, empirical_c, empirical_k, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matnum::{diag, rotation2};
    use crate::typicality::typicality_check;

    fn typical2() -> WindowCocycle {
        WindowCocycle::locally_constant(Sft::full_shift(2), vec![diag(&[2.0, 0.5]), rotation2(std::f64::consts::FRAC_PI_4)])
            .unwrap()
    }

    fn radius1() -> WindowCocycle {
        WindowCocycle::from_fn(Sft::full_shift(2), 2, 1, |w| {
            let (a, c) = (w[0] as f64, w[2] as f64);
            let base = if w[1] == 0 { diag(&[2.0, 0.5]) } else { rotation2(0.8) };
            base * Mat::from_row_slice(2, 2, &[1.0, 0.2 * (a - c) + 0.1 * a, 0.15 * a * c - 0.1 * c, 1.0])
        })
        .unwrap()
    }

    fn cert(a: &WindowCocycle) -> TypicalityCertificate {
        let pair = TypicalPair::new(a.base(), 0, Word::parse("1").unwrap()).unwrap();
        typicality_check(a, &pair, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn turn_direction_examples() {
        let f = EigenFrame::new(&diag(&[4.0, 1.0]), 1e-8).unwrap();
        let u = ProjPoint::from_slice(&[1.0, 1.0]).unwrap();
        assert_eq!(turn_direction(&[f.clone()], &[u], 0.1, 100).unwrap(), 2);
        assert_eq!(turn_direction(&[f.clone()], &[f.vector(0)], 0.1, 100).unwrap(), 0);
        assert_eq!(turn_direction(&[f.clone()], &[f.vector(1)], 0.1, 100).unwrap(), 0);
        let u = ProjPoint::from_slice(&[1e-30, 1.0]).unwrap();
        assert_eq!(turn_direction(&[f.clone()], &[u], 1e-40, 3).unwrap_err().to_string(), Error::TurnCapExceeded(3).to_string());
    }

    #[test]
    fn connect_radius0_is_plain_product() {
        let a = typical2();
        let fam = Family::exterior_powers(&a).unwrap();
        let e = Engine::new(&fam, &cert(&a).pair, &SynthesisOptions::default()).unwrap();
        let y = canonical_representative(a.base(), 0, &Word::parse("110").unwrap()).unwrap().point;
        let p1 = e.from_fixed(&y, 2).unwrap();
        let p2 = e.to_fixed(&y, 1).unwrap();
        let c = connect(&p1, &p2).unwrap();
        assert!(rel_residual(&c.matrix(&a), &(p2.matrix(&a) * p1.matrix(&a))) < 1e-12);
        let t = PathSpec::trivial(&y);
        assert!(rel_residual(&connect(&p1, &t).unwrap().matrix(&a), &p1.matrix(&a)) < 1e-12);
        assert!(matches!(connect(&p2, &p2), Err(Error::EndpointMismatch)));
    }

    #[test]
    fn connect_radius1_identity() {
        let a = radius1();
        let c = cert(&a);
        assert!(c.passed);
        let fam = Family::exterior_powers(&a).unwrap();
        let e = Engine::new(&fam, &c.pair, &SynthesisOptions::default()).unwrap();
        let y = canonical_representative(a.base(), 0, &Word::parse("1011").unwrap()).unwrap().point;
        let p1 = connect(&e.loop_path(3).unwrap(), &e.from_fixed(&y, 1).unwrap()).unwrap();
        let p2 = e.to_fixed(&y, 2).unwrap();
        assert!(connection_residual(&a, &p1, &p2).unwrap() < 1e-9);
        let p3 = connect(&p2, &e.loop_path(4).unwrap()).unwrap();
        assert!(connection_residual(&a, &p3, &p1).unwrap() < 1e-9);
    }

    #[test]
    fn from_fixed_factors_through_powers() {
        let a = radius1();
        let fam = Family::exterior_powers(&a).unwrap();
        let e = Engine::new(&fam, &cert(&a).pair, &SynthesisOptions::default()).unwrap();
        let y = canonical_representative(a.base(), 0, &Word::parse("11").unwrap()).unwrap().point;
        let c = e.from_fixed(&y, 0).unwrap().matrix(&a);
        let d = e.from_fixed(&y, 3).unwrap().matrix(&a);
        let p = a.matrix_at(&PointSpec::fixed(0), 0);
        assert!(rel_residual(&d, &(c * p * p * p)) < 1e-12);
    }

    #[test]
    fn transversal_demo() {
        let a = typical2();
        let c = cert(&a);
        let x = PointSpec::fixed(0);
        let y = canonical_representative(a.base(), 0, &Word::parse("11").unwrap()).unwrap().point;
        let w = ProjPoint::basis(2, 1);
        let u = ProjHyperplane::from_normal(ProjPoint::basis(2, 1));
        let tp = transversal_path(&a, &c, &x, &y, &[w.clone()], &[u.clone()]).unwrap();
        let img = w.image(&tp.path.matrix(&a)).unwrap();
        let direct = crate::matnum::rho_to_hyperplane(&img, &u);
        assert!(direct > 0.0);
        assert!((direct - tp.margins[0]).abs() < 1e-9);
    }

    #[test]
    fn rotation_has_no_certificate() {
        let a = WindowCocycle::constant(Sft::full_shift(2), rotation2(0.3)).unwrap();
        let c = cert(&a);
        assert!(!c.passed);
        assert!(build_proximal_periodic(&a, &c, &Word::parse("11").unwrap(), 0.05).is_err());
    }

    #[test]
    fn build_demo_111() {
        let a = typical2();
        let c = cert(&a);
        let r = build_proximal_periodic(&a, &c, &Word::parse("111").unwrap(), 0.05).unwrap();
        assert!(r.witnesses.iter().all(|w| w.passed));
        assert!(is_eps_proximal(&a.product(&PointSpec::periodic(&r.q), r.n_q as i64), 0.05).passed);
        let s = r.q.symbols();
        assert!((0..3).all(|i| s[(r.j + i) % r.n_q] == 1));
        assert!(r.factorization_residual < 1e-8);
        assert_eq!(r.k, r.n_q - 3);
    }

    #[test]
    fn build_radius1() {
        let a = radius1();
        let c = cert(&a);
        for w in ["0", "1", "0110", "111111"] {
            let r = build_proximal_periodic(&a, &c, &Word::parse(w).unwrap(), 0.05).unwrap();
            assert!(r.factorization_residual < 1e-8, "{w}: {}", r.factorization_residual);
            assert!(least_offset(&r.q, &Word::parse(w).unwrap()).is_some());
        }
    }

    #[test]
    fn d1_closure() {
        let a = WindowCocycle::locally_constant(Sft::golden_mean(), vec![diag(&[2.0]), diag(&[3.0])]).unwrap();
        let pair = TypicalPair::new(a.base(), 0, Word::parse("1").unwrap()).unwrap();
        let c = typicality_check(&a, &pair, DEFAULT_TOL).unwrap();
        let r = build_proximal_periodic(&a, &c, &Word::parse("101").unwrap(), 0.05).unwrap();
        assert_eq!(r.q.symbols(), &[1, 0, 1, 0]);
        assert_eq!(r.j, 0);
        let k = r.k as f64;
        assert!(r.bound_value <= k * 3f64.ln() + 1e-12);
    }
}
