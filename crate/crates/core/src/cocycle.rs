//! Window cocycles over a subshift of finite type and their canonical
//! holonomies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matnum::{self, check_invertible, op_norm, rel_residual, wedge_stack, LogSpectra, Mat, WedgeProduct};
use crate::sft::{Disagreement, PointSpec, Sft, Symbol};

/// Largest window table accepted.
const MAX_TABLE: usize = 1 << 22;

/// A cocycle `A(x) = table[x_{-k} … x_k]` with values in `GL(d, R)`.
#[derive(Clone, Debug)]
pub struct WindowCocycle {
    base: Sft,
    dim: usize,
    radius: usize,
    table: Vec<Option<Mat>>,
    wedges: Vec<Option<Vec<Mat>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HolonomyKind {
    Stable,
    Unstable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Holonomy {
    #[serde(with = "mat_serde")]
    pub matrix: Mat,
    pub kind: HolonomyKind,
    pub source: PointSpec,
    pub target: PointSpec,
}

impl WindowCocycle {
    /// Builds a cocycle from `(window, matrix)` pairs, which must cover every
    /// admissible window exactly once.
    pub fn new(base: Sft, dim: usize, radius: usize, entries: Vec<(Vec<Symbol>, Mat)>) -> Result<Self> {
        let q = base.alphabet_size();
        let width = 2 * radius + 1;
        let size = (q as f64).powi(width as i32);
        if size > MAX_TABLE as f64 {
            return Err(Error::InvalidCocycle(format!("window table of size {size} is too large")));
        }
        if dim == 0 {
            return Err(Error::InvalidCocycle("dimension must be positive".into()));
        }
        let mut table: Vec<Option<Mat>> = vec![None; size as usize];
        for (w, m) in entries {
            if w.len() != width {
                return Err(Error::InvalidCocycle(format!("window {w:?} has length {} (expected {width})", w.len())));
            }
            if !base.is_admissible(&w) {
                return Err(Error::InvalidCocycle(format!("window {w:?} is not admissible")));
            }
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.nrows().max(m.ncols()) });
            }
            check_invertible(&m).map_err(|e| Error::InvalidCocycle(format!("window {w:?}: {e}")))?;
            let c = code(q, &w);
            if table[c].is_some() {
                return Err(Error::InvalidCocycle(format!("window {w:?} listed twice")));
            }
            table[c] = Some(m);
        }
        let mut missing = None;
        base.for_each_word(width, |w| {
            if missing.is_none() && table[code(q, w)].is_none() {
                missing = Some(w.to_vec());
            }
        });
        if let Some(w) = missing {
            return Err(Error::InvalidCocycle(format!("no matrix for admissible window {w:?}")));
        }
        let wedges = table.iter().map(|m| m.as_ref().map(wedge_stack)).collect();
        Ok(WindowCocycle { base, dim, radius, table, wedges })
    }

    /// Evaluates `f` on every admissible window.
    pub fn from_fn(base: Sft, dim: usize, radius: usize, f: impl Fn(&[Symbol]) -> Mat) -> Result<Self> {
        let mut entries = Vec::new();
        base.for_each_word(2 * radius + 1, |w| entries.push((w.to_vec(), f(w))));
        WindowCocycle::new(base, dim, radius, entries)
    }

    /// Radius-0 cocycle with `A(x) = mats[x_0]`.
    pub fn locally_constant(base: Sft, mats: Vec<Mat>) -> Result<Self> {
        if mats.len() != base.alphabet_size() {
            return Err(Error::InvalidCocycle(format!(
                "{} matrices for {} symbols",
                mats.len(),
                base.alphabet_size()
            )));
        }
        let dim = mats[0].nrows();
        let entries = mats.into_iter().enumerate().map(|(s, m)| (vec![s as Symbol], m)).collect();
        WindowCocycle::new(base, dim, 0, entries)
    }

    pub fn constant(base: Sft, g: Mat) -> Result<Self> {
        let dim = g.nrows();
        WindowCocycle::from_fn(base, dim, 0, |_| g.clone())
    }

    pub fn base(&self) -> &Sft {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn window_code(&self, w: &[Symbol]) -> usize {
        code(self.base.alphabet_size(), w)
    }

    pub fn matrix_by_code(&self, c: usize) -> &Mat {
        self.table[c].as_ref().expect("admissible window")
    }

    pub fn wedge_by_code(&self, c: usize) -> &[Mat] {
        self.wedges[c].as_ref().expect("admissible window")
    }

    pub fn matrix_for_window(&self, w: &[Symbol]) -> Option<&Mat> {
        if w.len() != 2 * self.radius + 1 || w.iter().any(|&s| s as usize >= self.base.alphabet_size()) {
            return None;
        }
        self.table[self.window_code(w)].as_ref()
    }

    /// All `(window, matrix)` pairs in lexicographic window order.
    pub fn entries(&self) -> Vec<(Vec<Symbol>, &Mat)> {
        let mut out = Vec::new();
        self.base.for_each_word(2 * self.radius + 1, |w| out.push(w.to_vec()));
        out.into_iter()
            .map(|w| {
                let m = self.table[self.window_code(&w)].as_ref().expect("admissible window");
                (w, m)
            })
            .collect()
    }

    fn code_at(&self, x: &PointSpec, i: i64) -> usize {
        let k = self.radius as i64;
        let q = self.base.alphabet_size();
        (i - k..=i + k).fold(0usize, |acc, j| acc * q + x.coord(j) as usize)
    }

    /// `A(σ^i x)`.
    pub fn matrix_at(&self, x: &PointSpec, i: i64) -> &Mat {
        self.table[self.code_at(x, i)].as_ref().expect("point must be admissible")
    }

    pub fn wedge_at(&self, x: &PointSpec, i: i64) -> &[Mat] {
        self.wedges[self.code_at(x, i)].as_ref().expect("point must be admissible")
    }

    /// `A^n(x)` for any integer `n`, with `A^{-n}(x) = A^n(σ^{-n}x)^{-1}`.
    pub fn product(&self, x: &PointSpec, n: i64) -> Mat {
        if n >= 0 {
            self.forward(x, 0, n)
        } else {
            invert(&self.forward(x, n, -n))
        }
    }

    /// `A(σ^{s+len-1}x)⋯A(σ^s x)`.
    fn forward(&self, x: &PointSpec, s: i64, len: i64) -> Mat {
        let mut m = Mat::identity(self.dim, self.dim);
        for i in s..s + len {
            m = self.matrix_at(x, i) * m;
        }
        m
    }

    /// `A^n(x)` divided by a power of two, and the natural log of the
    /// divisor. Safe against overflow for long products.
    pub fn product_scaled(&self, x: &PointSpec, n: usize) -> (Mat, f64) {
        let mut m = Mat::identity(self.dim, self.dim);
        let mut log2 = 0i64;
        for i in 0..n as i64 {
            m = self.matrix_at(x, i) * m;
            let e = m.amax().log2().floor() as i32;
            if e.abs() > 64 {
                m *= 2f64.powi(-e);
                log2 += e as i64;
            }
        }
        (m, log2 as f64 * std::f64::consts::LN_2)
    }

    /// `A^n(x)`, `n >= 0`, carried in every exterior power.
    pub fn product_wedge(&self, x: &PointSpec, n: usize) -> WedgeProduct {
        let mut w = WedgeProduct::identity(self.dim);
        for i in 0..n as i64 {
            w.left_mul(self.wedge_at(x, i));
        }
        w
    }

    pub fn product_spectra(&self, x: &PointSpec, n: usize) -> LogSpectra {
        LogSpectra::from(&self.product_wedge(x, n))
    }

    /// `A^m(y)^{-1} A^m(x)`, evaluated by conjugating from the far end so
    /// that trailing steps with equal windows cancel exactly.
    pub fn holonomy_s_truncated(&self, x: &PointSpec, y: &PointSpec, m: i64) -> Mat {
        if m < 0 {
            return invert(&self.product(y, m)) * self.product(x, m);
        }
        self.conjugate(x, y, (0..m).rev(), false)
    }

    /// `A^{-m}(y)^{-1} A^{-m}(x)`, evaluated like the stable case.
    pub fn holonomy_u_truncated(&self, x: &PointSpec, y: &PointSpec, m: i64) -> Mat {
        if m < 0 {
            return invert(&self.product(y, -m)) * self.product(x, -m);
        }
        self.conjugate(x, y, (1..=m).rev().map(|i| -i), true)
    }

    /// Folds `M ↦ A(σ^i y)^{-1} M A(σ^i x)` (or, for `backward`,
    /// `M ↦ A(σ^i y) M A(σ^i x)^{-1}`) over `steps`, skipping steps while
    /// `M` is still exactly the identity and the two windows agree.
    fn conjugate(&self, x: &PointSpec, y: &PointSpec, steps: impl Iterator<Item = i64>, backward: bool) -> Mat {
        let mut m: Option<Mat> = None;
        for i in steps {
            let (cx, cy) = (self.code_at(x, i), self.code_at(y, i));
            if m.is_none() && cx == cy {
                continue;
            }
            let (ax, ay) = (self.matrix_by_code(cx), self.matrix_by_code(cy));
            let cur = m.unwrap_or_else(|| Mat::identity(self.dim, self.dim));
            m = Some(if backward { ay * cur * invert(ax) } else { invert(ay) * cur * ax });
        }
        m.unwrap_or_else(|| Mat::identity(self.dim, self.dim))
    }

    /// Local stable holonomy `H^s_{x,y}`, exact after `radius` steps.
    pub fn holonomy_s(&self, x: &PointSpec, y: &PointSpec) -> Result<Holonomy> {
        if !x.in_local_stable(y) {
            return Err(Error::NotOnLocalLeaf("stable"));
        }
        Ok(Holonomy {
            matrix: self.holonomy_s_truncated(x, y, self.radius as i64),
            kind: HolonomyKind::Stable,
            source: x.clone(),
            target: y.clone(),
        })
    }

    /// Local unstable holonomy `H^u_{x,y}`, exact after `radius` steps.
    pub fn holonomy_u(&self, x: &PointSpec, y: &PointSpec) -> Result<Holonomy> {
        if !x.in_local_unstable(y) {
            return Err(Error::NotOnLocalLeaf("unstable"));
        }
        Ok(Holonomy {
            matrix: self.holonomy_u_truncated(x, y, self.radius as i64),
            kind: HolonomyKind::Unstable,
            source: x.clone(),
            target: y.clone(),
        })
    }

    /// `A^ℓ(y)^{-1} H^s_{σ^ℓx, σ^ℓy} A^ℓ(x)`.
    pub fn global_holonomy_s(&self, x: &PointSpec, y: &PointSpec, ell: i64) -> Result<Mat> {
        let (xs, ys) = (x.shift(ell), y.shift(ell));
        if !xs.in_local_stable(&ys) {
            return Err(Error::NotOnGlobalLeaf("stable"));
        }
        let h = self.holonomy_s_truncated(&xs, &ys, self.radius as i64);
        Ok(invert(&self.product(y, ell)) * h * self.product(x, ell))
    }

    /// `A^{-ℓ}(y)^{-1} H^u_{σ^{-ℓ}x, σ^{-ℓ}y} A^{-ℓ}(x)`.
    pub fn global_holonomy_u(&self, x: &PointSpec, y: &PointSpec, ell: i64) -> Result<Mat> {
        let (xs, ys) = (x.shift(-ell), y.shift(-ell));
        if !xs.in_local_unstable(&ys) {
            return Err(Error::NotOnGlobalLeaf("unstable"));
        }
        let h = self.holonomy_u_truncated(&xs, &ys, self.radius as i64);
        Ok(invert(&self.product(y, -ell)) * h * self.product(x, -ell))
    }

    /// Stable holonomy between any two points on a common global stable
    /// set, evaluated with the least exact truncation.
    pub fn stable_holonomy(&self, x: &PointSpec, y: &PointSpec) -> Result<Mat> {
        match x.last_disagreement(y) {
            Disagreement::None => Ok(Mat::identity(self.dim, self.dim)),
            Disagreement::Unbounded => Err(Error::NotOnGlobalLeaf("stable")),
            Disagreement::At(i) => Ok(self.holonomy_s_truncated(x, y, (i + self.radius as i64 + 1).max(0))),
        }
    }

    /// Unstable counterpart of [`WindowCocycle::stable_holonomy`].
    pub fn unstable_holonomy(&self, x: &PointSpec, y: &PointSpec) -> Result<Mat> {
        match x.first_disagreement(y) {
            Disagreement::None => Ok(Mat::identity(self.dim, self.dim)),
            Disagreement::Unbounded => Err(Error::NotOnGlobalLeaf("unstable")),
            Disagreement::At(i) => Ok(self.holonomy_u_truncated(x, y, (self.radius as i64 - i).max(0))),
        }
    }

    /// `ψ_z = H^s_{z,p} H^u_{p,z}` for `z` homoclinic to the fixed point `p`.
    pub fn holonomy_loop(&self, p: &PointSpec, z: &PointSpec) -> Result<Mat> {
        let a = p.coord(0);
        if !p.same_sequence(&PointSpec::fixed(a)) {
            return Err(Error::NotFixedPoint(a));
        }
        if p.same_sequence(z) {
            return Err(Error::NotHomoclinic);
        }
        let hu = self.unstable_holonomy(p, z).map_err(|_| Error::NotHomoclinic)?;
        let hs = self.stable_holonomy(z, p).map_err(|_| Error::NotHomoclinic)?;
        Ok(hs * hu)
    }

    /// `R_q = H^u_{[p,q],p} H^s_{q,[p,q]} H^u_{[q,p],q} H^s_{p,[q,p]}`.
    pub fn rectangle(&self, p: &PointSpec, q: &PointSpec) -> Result<Mat> {
        let pq = p.bracket(q)?;
        let qp = q.bracket(p)?;
        let m = self.holonomy_u(&pq, p)?.matrix
            * self.holonomy_s(q, &pq)?.matrix
            * self.holonomy_u(&qp, q)?.matrix
            * self.holonomy_s(p, &qp)?.matrix;
        Ok(m)
    }

    /// `max ‖A‖‖A^{-1}‖ / 2` over all windows.
    pub fn fiber_bunching_margin(&self) -> f64 {
        self.table
            .iter()
            .flatten()
            .map(|m| {
                let a = matnum::singular_values(m);
                a[0] / a[a.len() - 1] / 2.0
            })
            .fold(0.0, f64::max)
    }

    /// Relative residual of the bounded distortion identity
    /// `A^n(x) = H^u_{σⁿz,σⁿx} H^s_{σⁿy,σⁿz} A^n(y) H^s_{z,y} H^u_{x,z}`, `z = [x,y]`.
    pub fn distortion_residual(&self, x: &PointSpec, y: &PointSpec, n: usize) -> Result<f64> {
        if (0..n as i64).any(|i| x.coord(i) != y.coord(i)) {
            return Err(Error::InvalidArgument("y must lie in the cylinder [x]_n".into()));
        }
        let z = x.bracket(y)?;
        let ni = n as i64;
        let (xn, yn, zn) = (x.shift(ni), y.shift(ni), z.shift(ni));
        let rhs = self.unstable_holonomy(&zn, &xn)?
            * self.stable_holonomy(&yn, &zn)?
            * self.product(y, ni)
            * self.stable_holonomy(&z, y)?
            * self.unstable_holonomy(x, &z)?;
        Ok(rel_residual(&self.product(x, ni), &rhs))
    }

    /// The cocycle `A'(x') = A(σ^{-1}x)^{-1}` over the transposed shift, where
    /// `x' = x.reversed()`. Its stable holonomies are the unstable
    /// holonomies of `A` and vice versa.
    pub fn inverse_cocycle(&self) -> WindowCocycle {
        let base = self.base.transpose();
        let q = base.alphabet_size();
        let mut table = vec![None; self.table.len()];
        let width = 2 * self.radius + 1;
        base.for_each_word(width, |w| {
            let rev: Vec<Symbol> = w.iter().rev().copied().collect();
            table[code(q, w)] = Some(invert(self.matrix_by_code(code(q, &rev))));
        });
        let wedges = table.iter().map(|m: &Option<Mat>| m.as_ref().map(wedge_stack)).collect();
        WindowCocycle { base, dim: self.dim, radius: self.radius, table, wedges }
    }

    /// Applies `f` to every matrix.
    pub fn map(&self, f: impl Fn(&Mat) -> Mat) -> Result<WindowCocycle> {
        let entries: Vec<(Vec<Symbol>, Mat)> = self.entries().into_iter().map(|(w, m)| (w, f(m))).collect();
        let dim = entries.first().map(|e| e.1.nrows()).unwrap_or(self.dim);
        WindowCocycle::new(self.base.clone(), dim, self.radius, entries)
    }

    /// The cocycle `Λ^t A`.
    pub fn exterior_power(&self, t: usize) -> Result<WindowCocycle> {
        if t == 0 || t > self.dim {
            return Err(Error::InvalidArgument(format!("exterior power {t} of dimension {}", self.dim)));
        }
        self.map(|m| matnum::exterior_power(m, t))
    }

    /// The cocycle `c·A`.
    pub fn scaled(&self, c: f64) -> Result<WindowCocycle> {
        self.map(|m| m * c)
    }

    /// Largest operator norm over the table.
    pub fn max_norm(&self) -> f64 {
        self.table.iter().flatten().map(op_norm).fold(0.0, f64::max)
    }
}

pub(crate) fn code(q: usize, w: &[Symbol]) -> usize {
    w.iter().fold(0usize, |acc, &s| acc * q + s as usize)
}

pub(crate) fn invert(m: &Mat) -> Mat {
    m.clone().try_inverse().unwrap_or_else(|| {
        let d = m.nrows();
        Mat::from_element(d, d, f64::NAN)
    })
}

/// Serializes a matrix as a list of rows.
pub mod mat_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::matnum::Mat;

    pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let c = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(Mat::from_fn(n, c, |i, j| rows[i][j]))
    }
}
