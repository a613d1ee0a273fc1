//! Dense linear algebra on small invertible matrices and certified
//! projective arithmetic.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative tolerance used to decide whether a singular or eigenvalue gap is
/// numerically zero.
pub const GAP_TOL: f64 = 1e-10;

/// `g = U diag(alpha) V^T` with `alpha` nonincreasing.
#[derive(Clone, Debug)]
pub struct SingularData {
    pub u: Mat,
    pub v: Mat,
    pub alpha: Vec<f64>,
}

pub fn svd(g: &Mat) -> SingularData {
    let d = g.nrows();
    // nalgebra's SVD with singular vectors is unreliable on nearly
    // rank-deficient 2x2 blocks.
    let s = faer::Mat::<f64>::from_fn(d, d, |i, j| g[(i, j)]).svd().expect("SVD converges");
    let (fu, fv, fs) = (s.U(), s.V(), s.S().column_vector());
    SingularData {
        u: Mat::from_fn(d, d, |i, j| fu[(i, j)]),
        v: Mat::from_fn(d, d, |i, j| fv[(i, j)]),
        alpha: (0..d).map(|i| fs[i]).collect(),
    }
}

/// Singular values, nonincreasing. Retried on the transpose if the
/// iteration stalls.
pub fn singular_values(g: &Mat) -> Vec<f64> {
    const MAX_ITER: usize = 10_000;
    let s = g
        .clone()
        .try_svd(false, false, f64::EPSILON, MAX_ITER)
        .or_else(|| g.transpose().try_svd(false, false, f64::EPSILON, MAX_ITER))
        .expect("SVD converges on g or its transpose");
    let mut a: Vec<f64> = s.singular_values.iter().copied().collect();
    a.sort_by(|x, y| y.total_cmp(x));
    a
}

/// Spectral norm.
pub fn op_norm(g: &Mat) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    singular_values(g)[0]
}

/// Real Schur iteration occasionally stalls on a cycle. The transpose and
/// fixed orthogonal similarities have the same spectrum, and diagonal shifts
/// change the moduli the iteration sees; one of them breaks the cycle.
fn schur_eigenvalues(g: &Mat) -> nalgebra::DVector<nalgebra::Complex<f64>> {
    let d = g.nrows();
    let max_iter = 100 * d;
    let mut candidates: Vec<(Mat, f64)> = vec![(g.clone(), 0.0), (g.transpose(), 0.0)];
    for k in 1..=4 {
        let v = Vector::from_fn(d, |i, _| ((k + 1) as f64).powi(i as i32));
        let h = Mat::identity(d, d) - &v * v.transpose() * (2.0 / v.norm_squared());
        let m = &h * g * &h;
        candidates.push((m.transpose(), 0.0));
        candidates.push((m, 0.0));
    }
    let scale = g.norm() / (d as f64).sqrt();
    for c in [0.37, -0.61, 1.13, -1.71] {
        candidates.push((g + Mat::identity(d, d) * (c * scale), c * scale));
    }
    for eps in [f64::EPSILON, 64.0 * f64::EPSILON] {
        for (m, shift) in &candidates {
            if let Some(s) = nalgebra::Schur::try_new(m.clone(), eps, max_iter) {
                return s.complex_eigenvalues().map(|z| z - *shift);
            }
        }
    }
    nalgebra::DVector::from_element(d, nalgebra::Complex::new(f64::NAN, f64::NAN))
}

/// Eigenvalues sorted by nonincreasing modulus.
pub fn eigenvalues(g: &Mat) -> Vec<Complex64> {
    if g.nrows() == 1 {
        return vec![Complex64::new(g[(0, 0)], 0.0)];
    }
    let mut e: Vec<Complex64> = schur_eigenvalues(g).iter().map(|c| Complex64::new(c.re, c.im)).collect();
    e.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
    e
}

pub fn spectral_radius(g: &Mat) -> f64 {
    eigenvalues(g).first().map(|c| c.norm()).unwrap_or(0.0)
}

/// Fails when `|det g| <= 1e-12 * ||g||^d`.
pub fn check_invertible(g: &Mat) -> Result<()> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch { expected: g.nrows(), found: g.ncols() });
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularMatrix("non-finite entry".into()));
    }
    let d = g.nrows() as i32;
    let det = g.determinant().abs();
    let n = op_norm(g);
    if n == 0.0 || det <= 1e-12 * n.powi(d) {
        return Err(Error::SingularMatrix(format!("|det| = {det:e}, |g| = {n:e}")));
    }
    Ok(())
}

/// Log singular values, nonincreasing.
pub fn mu_vec(g: &Mat) -> Result<Vec<f64>> {
    check_invertible(g)?;
    Ok(WedgeProduct::from_matrix(g).mu())
}

/// Log eigenvalue moduli, nonincreasing.
pub fn chi_vec(g: &Mat) -> Result<Vec<f64>> {
    check_invertible(g)?;
    Ok(WedgeProduct::from_matrix(g).chi())
}

/// Index sets of size `t` in `0..d`, lexicographic.
pub fn subsets(d: usize, t: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            if d - i < t - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, d, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, t, &mut Vec::new(), &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn minor(g: &Mat, rows: &[usize], cols: &[usize]) -> f64 {
    let t = rows.len();
    match t {
        0 => 1.0,
        1 => g[(rows[0], cols[0])],
        2 => g[(rows[0], cols[0])] * g[(rows[1], cols[1])] - g[(rows[0], cols[1])] * g[(rows[1], cols[0])],
        _ => Mat::from_fn(t, t, |i, j| g[(rows[i], cols[j])]).determinant(),
    }
}

/// `Λ^t g` in the lexicographically ordered basis `{e_I}`.
pub fn exterior_power(g: &Mat, t: usize) -> Mat {
    let d = g.nrows();
    assert!(t >= 1 && t <= d, "exterior power degree out of range");
    if t == 1 {
        return g.clone();
    }
    let sets = subsets(d, t);
    let n = sets.len();
    Mat::from_fn(n, n, |i, j| minor(g, &sets[i], &sets[j]))
}

pub fn normalize(v: &Vector) -> Vector {
    let n = v.norm();
    if n == 0.0 {
        v.clone()
    } else {
        v / n
    }
}

/// A point of projective space, stored as a unit vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct ProjPoint(Vector);

impl ProjPoint {
    pub fn new(v: Vector) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument("projective point from zero vector".into()));
        }
        Ok(ProjPoint(v / n))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        ProjPoint(Vector::from_fn(d, |k, _| (k == i) as u8 as f64))
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        ProjPoint::new(Vector::from_column_slice(v))
    }

    pub fn vector(&self) -> &Vector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Direction of `g·self`.
    pub fn image(&self, g: &Mat) -> Result<ProjPoint> {
        ProjPoint::new(g * &self.0)
    }
}

impl From<ProjPoint> for Vec<f64> {
    fn from(p: ProjPoint) -> Vec<f64> {
        p.0.iter().copied().collect()
    }
}

impl TryFrom<Vec<f64>> for ProjPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProjPoint::from_slice(&v)
    }
}

/// A projective hyperplane, stored by its unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjHyperplane {
    pub normal: ProjPoint,
}

impl ProjHyperplane {
    pub fn from_normal(n: ProjPoint) -> Self {
        ProjHyperplane { normal: n }
    }
}

/// Angle between lines, in `[0, π/2]`.
pub fn rho(u: &ProjPoint, v: &ProjPoint) -> f64 {
    let s = if u.0.dot(&v.0) >= 0.0 { 1.0 } else { -1.0 };
    let chord = (&u.0 - &v.0 * s).norm();
    (2.0 * (chord / 2.0).min(1.0).asin()).min(FRAC_PI_2)
}

pub fn rho_to_hyperplane(u: &ProjPoint, h: &ProjHyperplane) -> f64 {
    u.0.dot(&h.normal.0).abs().min(1.0).asin()
}

/// The closed cone `{u : ρ(u, center) <= radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub center: ProjPoint,
    pub radius: f64,
}

impl Cone {
    pub fn new(center: ProjPoint, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidArgument(format!("cone radius {radius}")));
        }
        Ok(Cone { center, radius: radius.min(FRAC_PI_2) })
    }

    pub fn contains(&self, u: &ProjPoint) -> bool {
        rho(u, &self.center) <= self.radius
    }
}

pub fn rho_to_cone(u: &ProjPoint, c: &Cone) -> f64 {
    (rho(u, &c.center) - c.radius).max(0.0)
}

/// Best Lipschitz constant for ρ implied by `sin ρ(gu,gv) <= k sin ρ(u,v)`.
///
/// For `k <= 1` the map `θ ↦ asin(k sin θ)` is concave, so the ratio is at
/// most its slope `k` at 0. For `k > 1` it is convex up to `asin(1/k)` and
/// capped at `π/2` afterwards, so the ratio peaks at the kink.
pub fn lipschitz_from_sine_ratio(k: f64) -> f64 {
    if k.is_nan() {
        return f64::INFINITY;
    }
    if k <= 1.0 {
        k.max(0.0)
    } else {
        FRAC_PI_2 / (1.0 / k).asin()
    }
}

/// Domain over which a ρ-norm bound is requested.
#[derive(Clone, Copy, Debug)]
pub enum Domain<'a> {
    Whole,
    Cone(&'a Cone),
}

/// Lower bound on `|gu|` over unit `u` in the cone, from
/// `u = cos θ·c + sin θ·w` with `w ⊥ c`: the component of `gu` along `gc` is at
/// least `cos δ·|gc| − sin δ·β/|gc|`, where `β = |(I − ccᵀ) gᵀg c|`.
fn cone_min_image(g: &Mat, c: &Cone, alpha: &[f64]) -> f64 {
    let d = alpha.len();
    if c.radius >= FRAC_PI_2 {
        return alpha[d - 1];
    }
    let cv = c.center.vector();
    let gc = g * cv;
    let ngc = gc.norm();
    if ngc == 0.0 {
        return alpha[d - 1];
    }
    let gtgc = g.transpose() * &gc;
    let beta = (&gtgc - cv * cv.dot(&gtgc)).norm();
    let cross = (beta / ngc).min(alpha[0]);
    (c.radius.cos() * ngc - c.radius.sin() * cross).max(alpha[d - 1])
}

/// Certified upper bound on `sup ρ(gu,gv)/ρ(u,v)` over the domain.
pub fn rho_norm_bound(g: &Mat, domain: Domain<'_>) -> f64 {
    let d = g.nrows();
    if d <= 1 {
        return 0.0;
    }
    let a = singular_values(g);
    let min_image = match domain {
        Domain::Whole => a[d - 1],
        Domain::Cone(c) => cone_min_image(g, c, &a),
    };
    if min_image <= 0.0 {
        return f64::INFINITY;
    }
    lipschitz_from_sine_ratio(a[0] * a[1] / (min_image * min_image))
}

/// A cone certified to contain `g(c)`.
///
/// Two bounds are combined: the ρ-norm bound on `c` times its radius, and
/// the direct estimate `sin ρ(gu, gc) <= sin δ·γ / m`, where
/// `γ = ‖(I − ĝcĝcᵀ) g (I − ccᵀ)‖` and `m` bounds `|gu|` from below.
pub fn map_cone(g: &Mat, c: &Cone) -> Result<Cone> {
    let center = c.center.image(g)?;
    if c.radius == 0.0 || g.nrows() < 2 {
        return Cone::new(center, 0.0);
    }
    let d = g.nrows();
    let a = singular_values(g);
    let via_norm = c.radius * rho_norm_bound(g, Domain::Cone(c));
    let cv = c.center.vector();
    let gv = center.vector();
    let pc = Mat::identity(d, d) - cv * cv.transpose();
    let pg = Mat::identity(d, d) - gv * gv.transpose();
    let gamma = op_norm(&(pg * g * pc));
    let m = cone_min_image(g, c, &a);
    let direct = if m > 0.0 { (c.radius.sin() * gamma / m).min(1.0).asin() } else { FRAC_PI_2 };
    Cone::new(center, via_norm.min(direct).min(FRAC_PI_2))
}

fn top_gap_degenerate(a: &[f64]) -> bool {
    a.len() < 2 || a[0] - a[1] <= GAP_TOL * a[0]
}

/// The hyperplane `U_g` spanned by all but the top right singular vector.
pub fn ams_hyperplane(g: &Mat) -> Result<ProjHyperplane> {
    let s = svd(g);
    if top_gap_degenerate(&s.alpha) {
        return Err(Error::DegenerateTopSingularValue);
    }
    Ok(ProjHyperplane { normal: ProjPoint::new(s.v.column(0).into_owned())? })
}

/// Certified ρ-norm bound of `g` on `{u : ρ(u, U_g) >= eps}`.
pub fn restricted_bound(g: &Mat, eps: f64) -> Result<f64> {
    let a = singular_values(g);
    if top_gap_degenerate(&a) {
        return Err(Error::DegenerateTopSingularValue);
    }
    let s = eps.min(FRAC_PI_2).sin();
    Ok(lipschitz_from_sine_ratio((a[1] / a[0]) / (s * s)))
}

/// Unit vector spanning the (numerical) kernel of `m`: the right singular
/// vector of the smallest singular value.
pub fn null_vector(m: &Mat) -> Vector {
    let s = svd(m);
    s.v.column(m.ncols() - 1).into_owned()
}

/// Orthonormal basis of `n^⊥` (as columns), from a Householder reflector.
pub fn orthogonal_complement(n: &Vector) -> Mat {
    let d = n.len();
    let n = normalize(n);
    let sign = if n[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = n.clone();
    w[0] += sign;
    let ww = w.dot(&w);
    let h = Mat::identity(d, d) - (&w * w.transpose()) * (2.0 / ww);
    h.columns(1, d - 1).into_owned()
}

/// Leading eigen-data of a proximal matrix.
#[derive(Clone, Debug)]
pub struct TopEigen {
    pub lambda: f64,
    /// Right eigenvector spanning `V^>`.
    pub right: ProjPoint,
    /// Left eigenvector, the unit normal of `V^<`.
    pub left: ProjPoint,
    /// `|λ₂| / |λ₁|`.
    pub ratio: f64,
}

/// Leading eigenvalue and eigenvectors when it is simple and real.
pub fn top_eigen(g: &Mat) -> Result<TopEigen> {
    let d = g.nrows();
    let ev = eigenvalues(g);
    let l1 = ev[0];
    let ratio = if d > 1 { ev[1].norm() / l1.norm() } else { 0.0 };
    if !(l1.norm() > 0.0) || ratio >= 1.0 - GAP_TOL || l1.im.abs() > GAP_TOL * l1.norm() {
        return Err(Error::NotProximal);
    }
    let lambda = l1.re;
    let shifted = g - Mat::identity(d, d) * lambda;
    let right = ProjPoint::new(refine_eigvec(g, lambda, null_vector(&shifted)))?;
    let gt = g.transpose();
    let left = ProjPoint::new(refine_eigvec(&gt, lambda, null_vector(&shifted.transpose())))?;
    Ok(TopEigen { lambda, right, left, ratio })
}

/// One step of inverse iteration polishes an eigenvector estimate.
fn refine_eigvec(g: &Mat, lambda: f64, v: Vector) -> Vector {
    let d = g.nrows();
    let shift = lambda * (1.0 + 1e-10) + if lambda == 0.0 { 1e-10 } else { 0.0 };
    let m = g - Mat::identity(d, d) * shift;
    match m.lu().solve(&v) {
        Some(w) if w.iter().all(|x| x.is_finite()) && w.norm() > 0.0 => normalize(&w),
        _ => normalize(&v),
    }
}

/// A product of matrices carried simultaneously in every exterior power,
/// each level rescaled by powers of two and the exponent tracked apart.
///
/// Level `t` holds `Λ^t` of the product, so the singular values and
/// eigenvalue moduli of the product are recovered as ratios of top values of
/// consecutive levels. This keeps the small spectral values accurate long
/// after they would be lost in the plain product.
#[derive(Clone, Debug)]
pub struct WedgeProduct {
    levels: Vec<Mat>,
    log2_scale: Vec<i64>,
}

impl WedgeProduct {
    pub fn identity(d: usize) -> Self {
        let levels = (1..=d).map(|t| Mat::identity(binomial(d, t), binomial(d, t))).collect();
        WedgeProduct { levels, log2_scale: vec![0; d] }
    }

    pub fn from_matrix(g: &Mat) -> Self {
        let d = g.nrows();
        let mut w = WedgeProduct::identity(d);
        w.left_mul(&wedge_stack(g));
        w
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// Replaces the product `M` with `g M`, where `stack[t-1] = Λ^t g`.
    pub fn left_mul(&mut self, stack: &[Mat]) {
        for (t, m) in self.levels.iter_mut().enumerate() {
            *m = &stack[t] * &*m;
        }
        self.rescale();
    }

    /// Replaces the product `M` with `M g`.
    pub fn right_mul(&mut self, stack: &[Mat]) {
        for (t, m) in self.levels.iter_mut().enumerate() {
            *m = &*m * &stack[t];
        }
        self.rescale();
    }

    /// Replaces `M` with `M N`.
    pub fn right_mul_product(&mut self, other: &WedgeProduct) {
        for (t, m) in self.levels.iter_mut().enumerate() {
            *m = &*m * &other.levels[t];
            self.log2_scale[t] += other.log2_scale[t];
        }
        self.rescale();
    }

    fn rescale(&mut self) {
        for (m, s) in self.levels.iter_mut().zip(self.log2_scale.iter_mut()) {
            let mx = m.amax();
            if mx > 0.0 && mx.is_finite() {
                let e = mx.log2().floor() as i32;
                if e != 0 {
                    *m *= 2f64.powi(-e);
                    *s += e as i64;
                }
            }
        }
    }

    /// The rescaled level `t` (1-based) and its base-2 exponent.
    pub fn level(&self, t: usize) -> (&Mat, i64) {
        (&self.levels[t - 1], self.log2_scale[t - 1])
    }

    /// The product itself, rescaled, with the natural log of the scale.
    pub fn matrix(&self) -> (&Mat, f64) {
        (&self.levels[0], self.log2_scale[0] as f64 * std::f64::consts::LN_2)
    }

    /// `log α₁(Λ^t M) = log α₁ + … + log α_t`, for `t = 0..=d`.
    pub fn log_top_singular(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for (m, s) in self.levels.iter().zip(&self.log2_scale) {
            out.push(op_norm(m).ln() + *s as f64 * std::f64::consts::LN_2);
        }
        out
    }

    /// `log ρ(Λ^t M)` for `t = 0..=d`.
    pub fn log_top_eigen(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for (m, s) in self.levels.iter().zip(&self.log2_scale) {
            out.push(spectral_radius(m).ln() + *s as f64 * std::f64::consts::LN_2);
        }
        out
    }

    pub fn mu(&self) -> Vec<f64> {
        self.log_top_singular().windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn chi(&self) -> Vec<f64> {
        self.log_top_eigen().windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `log |det M|`.
    pub fn log_abs_det(&self) -> f64 {
        let d = self.levels.len();
        self.levels[d - 1][(0, 0)].abs().ln() + self.log2_scale[d - 1] as f64 * std::f64::consts::LN_2
    }
}

/// `[Λ^1 g, …, Λ^d g]`.
pub fn wedge_stack(g: &Mat) -> Vec<Mat> {
    (1..=g.nrows()).map(|t| exterior_power(g, t)).collect()
}

/// Log singular values and eigenvalue moduli of one product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogSpectra {
    pub mu: Vec<f64>,
    pub chi: Vec<f64>,
}

impl From<&WedgeProduct> for LogSpectra {
    fn from(w: &WedgeProduct) -> Self {
        LogSpectra { mu: w.mu(), chi: w.chi() }
    }
}

pub fn rotation2(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Rotation by `theta` about `axis` (Rodrigues).
pub fn rotation3(axis: [f64; 3], theta: f64) -> Mat {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (x, y, z) = (axis[0] / n, axis[1] / n, axis[2] / n);
    let k = Mat::from_row_slice(3, 3, &[0.0, -z, y, z, 0.0, -x, -y, x, 0.0]);
    Mat::identity(3, 3) + &k * theta.sin() + &k * &k * (1.0 - theta.cos())
}

pub fn diag(v: &[f64]) -> Mat {
    Mat::from_diagonal(&Vector::from_column_slice(v))
}

/// Relative Frobenius residual `|a - b| / max(|a|, |b|, tiny)`.
pub fn rel_residual(a: &Mat, b: &Mat) -> f64 {
    let den = a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    (a - b).norm() / den
}
