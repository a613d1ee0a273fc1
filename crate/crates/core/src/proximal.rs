//! Proximal maps: detection, certified ε-proximality, Tits cone
//! certificates and the μ₁ − χ₁ defect.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matnum::{
    self, lipschitz_from_sine_ratio, map_cone, op_norm, orthogonal_complement, rho, rho_norm_bound, top_eigen, Cone,
    Domain, Mat, ProjHyperplane, ProjPoint, WedgeProduct,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProximalData {
    pub lambda: f64,
    pub v_g: ProjPoint,
    pub v_less: ProjHyperplane,
    /// `|λ₂| / |λ₁|`.
    pub spectral_gap: f64,
    /// `ρ(v_g, V^<_g)`.
    pub angle: f64,
}

/// Top eigendirection and complementary invariant hyperplane.
pub fn proximal_data(g: &Mat) -> Result<ProximalData> {
    let te = top_eigen(g)?;
    let angle = te.right.vector().dot(te.left.vector()).abs().min(1.0).asin();
    Ok(ProximalData {
        lambda: te.lambda,
        v_g: te.right,
        v_less: ProjHyperplane::from_normal(te.left),
        spectral_gap: te.ratio,
        angle,
    })
}

/// The quantities behind an ε-proximality verdict.
///
/// With `u = c·v_g + w`, `w ∈ V^<`, every unit `u` at angle at least `ε` from
/// `V^<` has `|w| / |c| <= 1 / sin ε`, which bounds both the image angle and
/// the contraction from `|λ₁|` and `L = ‖g|V^<‖`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsProximalWitness {
    pub eps: f64,
    pub proximal: bool,
    /// `ρ(v_g, V^<_g)`; must be at least `2ε`.
    pub separation: f64,
    /// Certified upper bound on `sin ρ(gu, v_g)` off the `ε`-neighbourhood of `V^<`.
    pub image_sine: f64,
    /// Certified ρ-norm bound of `g` off the `ε`-neighbourhood of `V^<`.
    pub contraction: f64,
    /// Certified upper bound on `μ₁(g) − χ₁(g)`.
    pub defect_bound: f64,
    pub separation_ok: bool,
    pub image_ok: bool,
    pub contraction_ok: bool,
    pub passed: bool,
}

impl EpsProximalWitness {
    fn not_proximal(eps: f64) -> Self {
        EpsProximalWitness {
            eps,
            proximal: false,
            separation: 0.0,
            image_sine: f64::INFINITY,
            contraction: f64::INFINITY,
            defect_bound: f64::INFINITY,
            separation_ok: false,
            image_ok: false,
            contraction_ok: false,
            passed: false,
        }
    }
}

/// Checks the three ε-proximality conditions with certified bounds.
pub fn is_eps_proximal(g: &Mat, eps: f64) -> EpsProximalWitness {
    let d = g.nrows();
    let Ok(data) = proximal_data(g) else {
        return EpsProximalWitness::not_proximal(eps);
    };
    let lam = data.lambda.abs();
    let n = data.v_less.normal.vector();
    let sv = data.v_g.vector().dot(n).abs().min(1.0);
    let l = if d > 1 { op_norm(&(g * orthogonal_complement(n))) } else { 0.0 };
    let se = eps.min(FRAC_PI_2).sin();
    let r = l / (lam * se);
    let image_sine = if r < 1.0 { r / (1.0 - r) } else { f64::INFINITY };
    let contraction = if d < 2 {
        0.0
    } else if r < 1.0 {
        let a = matnum::singular_values(g);
        let k = a[0] * a[1] * sv * sv / (lam * lam * (1.0 - r) * (1.0 - r) * se * se);
        lipschitz_from_sine_ratio(k)
    } else {
        f64::INFINITY
    };
    let defect_bound = ((1.0 + l / lam) / sv).ln();
    let separation_ok = data.angle >= 2.0 * eps;
    let image_ok = image_sine <= se;
    let contraction_ok = contraction <= eps;
    EpsProximalWitness {
        eps,
        proximal: true,
        separation: data.angle,
        image_sine,
        contraction,
        defect_bound,
        separation_ok,
        image_ok,
        contraction_ok,
        passed: separation_ok && image_ok && contraction_ok,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TitsCertificate {
    pub cone: Cone,
    pub contraction: f64,
    pub image_cone: Cone,
    pub verdict: bool,
}

/// Tests `g(C(w, 3ε)) ⊆ C(w, ε)` with a strict ρ-contraction on `C(w, 3ε)`.
pub fn tits_certify(g: &Mat, center: &ProjPoint, eps: f64) -> Result<TitsCertificate> {
    let cone = Cone::new(center.clone(), 3.0 * eps)?;
    let contraction = rho_norm_bound(g, Domain::Cone(&cone));
    let image_cone = map_cone(g, &cone)?;
    let inside = rho(&image_cone.center, center) + image_cone.radius <= eps;
    Ok(TitsCertificate { verdict: inside && contraction < 1.0 && 3.0 * eps < FRAC_PI_2, cone, contraction, image_cone })
}

/// `μ₁(g) − χ₁(g) = log ‖g‖ − log ρ(g)`, clamped at 0.
pub fn proximality_defect(g: &Mat) -> f64 {
    let w = WedgeProduct::from_matrix(g);
    let mu = w.log_top_singular()[1];
    let chi = w.log_top_eigen()[1];
    (mu - chi).max(0.0)
}
