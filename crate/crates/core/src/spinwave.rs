//! Small-Δ bosonic theory of the steady state.
//!
//! Replacing `σ⁻_j → b_j` and keeping quadratic terms, each pair of modes
//! `(b_k, b†_{-k})` obeys a linear Langevin equation with drift
//!
//! ```text
//! 𝓜 = [[-κ + iε_k,  iη_k ], [ -iη_k,  -κ - iε_k ]]
//! ε_k = 2(g + cos k),  η_k = 2Δ cos k
//! ```
//!
//! and vacuum input noise. Steady second moments follow from the Lyapunov
//! equation `𝓜 C + C 𝓜† + D = 0` with `D = diag(2κ, 0)`, whose solution is
//! `n_k = η²/(2(ξ²+κ²))`, `a_k = η(iκ - ε)/(2(ξ²+κ²))`, `ξ² = ε² - η²`.
//!
//! Real-space correlators are Fourier integrals of these moments. As rational
//! functions of `c = cos k` they share the denominator
//! `P(c) = 4(1-Δ²)c² + 8gc + 4g² + κ²`, so the integrals also follow from
//! residues at the poles `Z = c_p ± √(c_p² - 1)` inside the unit circle,
//! where `c_p` are the roots of `P`.

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelParams;
use crate::C64;

/// Absolute target of the adaptive quadrature.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Allowed disagreement between quadrature and residues.
pub const AGREEMENT_TOL: f64 = 1e-8;

/// Poles closer than this to the unit circle are marginal.
pub const MARGINAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SpinWaveError {
    #[error("mode k = {k} is unstable: drift eigenvalue {eigenvalue}")]
    UnstableMode { k: f64, eigenvalue: C64 },
    #[error("pole formula needs |Δ| < 1, got {0}")]
    IsingLimit(f64),
    #[error("pole formula needs κ > 0")]
    NoDamping,
    #[error("pole at |Z| = {0} is marginal")]
    MarginalPole(f64),
    #[error("expected two poles inside the unit circle, found {0}")]
    PoleCount(usize),
    #[error("quadrature and residues disagree by {0:.3e}")]
    Discrepancy(f64),
    #[error("covariance matrix is unphysical (min eigenvalue of V + iΩ = {0:.3e})")]
    Unphysical(f64),
    #[error("separation must be at least 1, got {0}")]
    Separation(usize),
    #[error("separation {l} beyond computed range {l_max}")]
    OutOfRange { l: usize, l_max: usize },
    #[error("Lyapunov system is singular at k = {0}")]
    Singular(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dispersions {
    pub eps: f64,
    pub eta: f64,
    /// Principal square root of `ε² - η²`.
    pub xi: C64,
}

pub fn dispersions(params: &ModelParams, k: f64) -> Dispersions {
    let eps = 2.0 * (params.g + k.cos());
    let eta = 2.0 * params.delta * k.cos();
    Dispersions {
        eps,
        eta,
        xi: C64::new(eps * eps - eta * eta, 0.0).sqrt(),
    }
}

/// Drift matrix of `(b_k, b†_{-k})`.
pub fn drift_matrix(params: &ModelParams, k: f64) -> Matrix2<C64> {
    let d = dispersions(params, k);
    let i = C64::new(0.0, 1.0);
    let kap = C64::new(params.kappa, 0.0);
    Matrix2::new(-kap + i * d.eps, i * d.eta, -i * d.eta, -kap - i * d.eps)
}

/// `(n_k, a_k) = (⟨b†_k b_k⟩, ⟨b_k b_{-k}⟩)` from the Lyapunov equation.
pub fn mode_moments(params: &ModelParams, k: f64) -> Result<(f64, C64), SpinWaveError> {
    let m = drift_matrix(params, k);
    let eig = eigenvalues_2x2(&m);
    if let Some(bad) = eig.iter().find(|l| l.re >= 0.0) {
        return Err(SpinWaveError::UnstableMode { k, eigenvalue: *bad });
    }
    // Row-major vectorization: vec(MC) = (M ⊗ 𝟙) vec C, vec(C M†) = (𝟙 ⊗ M̄) vec C.
    let id = Matrix2::<C64>::identity();
    let mbar = m.map(|z| z.conj());
    let mut lhs = Matrix4::<C64>::zeros();
    for r in 0..2 {
        for c in 0..2 {
            for s in 0..2 {
                for t in 0..2 {
                    lhs[(2 * r + s, 2 * c + t)] = m[(r, c)] * id[(s, t)] + id[(r, c)] * mbar[(s, t)];
                }
            }
        }
    }
    let rhs = -Vector4::new(C64::new(2.0 * params.kappa, 0.0), C64::default(), C64::default(), C64::default());
    let sol = lhs.lu().solve(&rhs).ok_or(SpinWaveError::Singular(k))?;
    Ok((sol[3].re, sol[1]))
}

/// Eigenvalues of a 2×2 complex matrix.
fn eigenvalues_2x2(m: &Matrix2<C64>) -> [C64; 2] {
    let half_tr = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let disc = (half_tr * half_tr - m.determinant()).sqrt();
    [half_tr + disc, half_tr - disc]
}

/// Closed-form `(n_k, a_k)`.
pub fn mode_moments_closed_form(params: &ModelParams, k: f64) -> (f64, C64) {
    let d = dispersions(params, k);
    let den = 2.0 * (d.eps * d.eps - d.eta * d.eta + params.kappa * params.kappa);
    (
        d.eta * d.eta / den,
        C64::new(-d.eta * d.eps, d.eta * params.kappa) / den,
    )
}

/// Poles of the real-space correlator integrands.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleSet {
    /// Roots `c_p` of `P(c)`.
    pub c_roots: [C64; 2],
    /// All four `Z = c_p ± √(c_p² - 1)`.
    pub all: [C64; 4],
    /// For each root `c_p`, the member of its pair inside the unit circle.
    pub inside: [C64; 2],
    /// Inside pole of largest modulus.
    pub z0: C64,
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> [C64; 2] {
    let disc = C64::new(b * b - 4.0 * a * c, 0.0).sqrt();
    let bq = C64::new(b, 0.0);
    let q = if b >= 0.0 { -(bq + disc) * 0.5 } else { -(bq - disc) * 0.5 };
    if q.norm() == 0.0 {
        return [C64::default(); 2];
    }
    [q / a, C64::new(c, 0.0) / q]
}

/// Coefficients `(4(1-Δ²), 8g, 4g² + κ²)` of `P(c)`, highest first.
fn denominator(params: &ModelParams) -> (f64, f64, f64) {
    let (g, d, k) = (params.g, params.delta, params.kappa);
    (4.0 * (1.0 - d * d), 8.0 * g, 4.0 * g * g + k * k)
}

pub fn poles(params: &ModelParams) -> Result<PoleSet, SpinWaveError> {
    if params.delta.abs() >= 1.0 {
        return Err(SpinWaveError::IsingLimit(params.delta));
    }
    if !(params.kappa > 0.0) {
        return Err(SpinWaveError::NoDamping);
    }
    let (pa, pb, pc) = denominator(params);
    let c_roots = quadratic_roots(pa, pb, pc);
    let one = C64::new(1.0, 0.0);
    let mut all = [C64::default(); 4];
    let mut inside = [C64::default(); 2];
    let mut count = 0;
    for (r, &c) in c_roots.iter().enumerate() {
        let s = (c * c - one).sqrt();
        let pair = [c + s, c - s];
        all[2 * r] = pair[0];
        all[2 * r + 1] = pair[1];
        for z in pair {
            let m = z.norm();
            if (m - 1.0).abs() < MARGINAL_TOL {
                return Err(SpinWaveError::MarginalPole(m));
            }
            if m < 1.0 {
                inside[r] = z;
                count += 1;
            }
        }
    }
    if count != 2 {
        return Err(SpinWaveError::PoleCount(count));
    }
    let z0 = if inside[0].norm() >= inside[1].norm() { inside[0] } else { inside[1] };
    Ok(PoleSet { c_roots, all, inside, z0 })
}

/// `ξ_c = -1/ln|Z₀|`, infinite for a marginal pole.
pub fn correlation_length(params: &ModelParams) -> Result<f64, SpinWaveError> {
    match poles(params) {
        Ok(p) => {
            let m = p.z0.norm();
            if m >= 1.0 - MARGINAL_TOL {
                Ok(f64::INFINITY)
            } else {
                Ok(-1.0 / m.ln())
            }
        }
        Err(SpinWaveError::MarginalPole(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Whether every mode is damped: `P(c) > 0` on `[-1, 1]`.
pub fn all_modes_stable(params: &ModelParams) -> bool {
    let (a, b, c) = denominator(params);
    let p = |x: f64| (a * x + b) * x + c;
    let mut min = p(-1.0).min(p(1.0));
    if a > 0.0 {
        let v = -b / (2.0 * a);
        if v.abs() <= 1.0 {
            min = min.min(p(v));
        }
    }
    params.kappa > 0.0 && min > 0.0
}

fn first_unstable_mode(params: &ModelParams) -> SpinWaveError {
    for i in 0..=4096 {
        let k = std::f64::consts::PI * i as f64 / 4096.0;
        if let Err(e) = mode_moments(params, k) {
            return e;
        }
    }
    SpinWaveError::UnstableMode {
        k: f64::NAN,
        eigenvalue: C64::new(0.0, 0.0),
    }
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and its difference from the embedded
/// 7-point Gauss rule, for a vector-valued integrand.
fn gk15<F: FnMut(f64) -> Vec<C64>>(f: &mut F, a: f64, b: f64) -> (Vec<C64>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron: Vec<C64> = fc.iter().map(|v| v * GK_WEIGHTS[7]).collect();
    let mut gauss: Vec<C64> = fc.iter().map(|v| v * GAUSS_WEIGHTS[3]).collect();
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for j in 0..kron.len() {
            let s = f1[j] + f2[j];
            kron[j] += s * GK_WEIGHTS[i];
            if i % 2 == 1 {
                gauss[j] += s * GAUSS_WEIGHTS[i / 2];
            }
        }
    }
    let err = kron.iter().zip(&gauss).fold(0.0f64, |m, (k, g)| m.max(((k - g) * h).norm()));
    (kron.into_iter().map(|v| v * h).collect(), err)
}

/// Adaptive Gauss-Kronrod integration of a vector-valued function, bisecting
/// the interval with the largest error until the total error estimate is
/// below `tol`.
pub fn integrate<F: FnMut(f64) -> Vec<C64>>(mut f: F, a: f64, b: f64, tol: f64) -> (Vec<C64>, f64) {
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    for _ in 0..2000 {
        let total: f64 = pieces.iter().map(|p| p.3).sum();
        if total <= tol {
            break;
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = pieces[0].2.len();
    let mut sum = vec![C64::default(); n];
    let mut err = 0.0;
    for p in &pieces {
        for j in 0..n {
            sum[j] += p.2[j];
        }
        err += p.3;
    }
    (sum, err)
}

/// Source of the per-mode moments inside the k-integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentSource {
    Lyapunov,
    ClosedForm,
}

/// `(1/2π) ∫ n_k cos(kl) dk` and `(1/2π) ∫ a_k cos(kl) dk` for `l = 0..=l_max`
/// by adaptive quadrature over `[0, π]`.
pub fn quadrature_correlators(
    params: &ModelParams,
    l_max: usize,
    source: MomentSource,
) -> Result<(Vec<f64>, Vec<C64>), SpinWaveError> {
    if !all_modes_stable(params) {
        return Err(first_unstable_mode(params));
    }
    let mut failure = None;
    let integrand = |k: f64| {
        let (n, a) = match source {
            MomentSource::ClosedForm => mode_moments_closed_form(params, k),
            MomentSource::Lyapunov => mode_moments(params, k).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                (0.0, C64::default())
            }),
        };
        let mut out = Vec::with_capacity(2 * (l_max + 1));
        for l in 0..=l_max {
            let c = (k * l as f64).cos();
            out.push(C64::new(n * c, 0.0));
            out.push(a * c);
        }
        out
    };
    let (vals, _) = integrate(integrand, 0.0, std::f64::consts::PI, QUADRATURE_TOL);
    if let Some(e) = failure {
        return Err(e);
    }
    let scale = 1.0 / std::f64::consts::PI;
    let normal = (0..=l_max).map(|l| vals[2 * l].re * scale).collect();
    let anomalous = (0..=l_max).map(|l| vals[2 * l + 1] * scale).collect();
    Ok((normal, anomalous))
}

/// Residue evaluation. Returns the correlators and, for each, the
/// coefficient `A` of the dominant term `A Z₀^l`.
fn residue_correlators(params: &ModelParams, l_max: usize) -> Result<(Vec<C64>, Vec<C64>, C64, C64), SpinWaveError> {
    let poles = poles(params)?;
    let (g, d, k) = (params.g, params.delta, params.kappa);
    let (pa, pb, _) = denominator(params);
    let num_n = |c: C64| c * c * (2.0 * d * d);
    let num_a = |c: C64| c * d * (C64::new(-2.0 * g, k) - c * 2.0);
    let dp = |c: C64| c * (2.0 * pa) + pb;
    let mut normal = vec![C64::default(); l_max + 1];
    let mut anomalous = vec![C64::default(); l_max + 1];
    let mut lead = (C64::default(), C64::default());
    for (r, &z) in poles.inside.iter().enumerate() {
        let c = poles.c_roots[r];
        let jac = (C64::new(1.0, 0.0) - z.inv() * z.inv()) * 0.5;
        let base = (dp(c) * jac * z).inv();
        let (cn, ca) = (num_n(c) * base, num_a(c) * base);
        if z == poles.z0 {
            lead = (cn, ca);
        }
        let mut zl = C64::new(1.0, 0.0);
        for l in 0..=l_max {
            normal[l] += cn * zl;
            anomalous[l] += ca * zl;
            zl *= z;
        }
    }
    // Pole of z^{-1} at the origin for l = 0.
    normal[0] += C64::new(2.0 * d * d / pa, 0.0);
    anomalous[0] += C64::new(-2.0 * d / pa, 0.0);
    Ok((normal, anomalous, lead.0, lead.1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinWaveCorrelators {
    pub params: ModelParams,
    /// `⟨b†_j b_{j+l}⟩`.
    pub normal: Vec<C64>,
    /// `⟨b_j b_{j+l}⟩`.
    pub anomalous: Vec<C64>,
    pub residue_normal: Vec<C64>,
    pub residue_anomalous: Vec<C64>,
    /// Largest quadrature-residue difference.
    pub discrepancy: f64,
    /// `normal(l) ≈ 2 Re[α Δ² Z₀^l]` at large `l`.
    pub alpha: C64,
    /// Anomalous counterpart: `anomalous(l) ≈ β Δ Z₀^l + (conjugate-pole term)`.
    pub beta: C64,
    pub z0: C64,
}

impl SpinWaveCorrelators {
    pub fn l_max(&self) -> usize {
        self.normal.len() - 1
    }
}

/// Real-space correlators by quadrature of the Lyapunov moments, checked
/// against the residue sum.
pub fn real_space_correlators(params: &ModelParams, l_max: usize) -> Result<SpinWaveCorrelators, SpinWaveError> {
    if params.delta == 0.0 {
        if !(params.kappa > 0.0) {
            return Err(SpinWaveError::NoDamping);
        }
        let zeros = vec![C64::default(); l_max + 1];
        return Ok(SpinWaveCorrelators {
            params: *params,
            normal: zeros.clone(),
            anomalous: zeros.clone(),
            residue_normal: zeros.clone(),
            residue_anomalous: zeros,
            discrepancy: 0.0,
            alpha: C64::default(),
            beta: C64::default(),
            z0: C64::default(),
        });
    }
    let (normal, anomalous) = quadrature_correlators(params, l_max, MomentSource::Lyapunov)?;
    let normal: Vec<C64> = normal.into_iter().map(|v| C64::new(v, 0.0)).collect();
    let (rn, ra, cn, ca) = residue_correlators(params, l_max)?;
    let discrepancy = normal
        .iter()
        .zip(&rn)
        .chain(anomalous.iter().zip(&ra))
        .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
    if discrepancy > AGREEMENT_TOL {
        return Err(SpinWaveError::Discrepancy(discrepancy));
    }
    let d = params.delta;
    Ok(SpinWaveCorrelators {
        params: *params,
        normal,
        anomalous,
        residue_normal: rn,
        residue_anomalous: ra,
        discrepancy,
        alpha: cn / (d * d),
        beta: ca / d,
        z0: poles(params)?.z0,
    })
}

/// Quadrature covariance of sites `j` and `j + l`, ordered
/// `(x_j, p_j, x_{j+l}, p_{j+l})` with `x = b + b†`, `p = (b - b†)/i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceBlock {
    pub v: [[f64; 4]; 4],
}

impl CovarianceBlock {
    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|r, c| self.v[r][c])
    }

    fn block(&self, r: usize, c: usize) -> Matrix2<f64> {
        Matrix2::from_fn(|i, j| self.v[2 * r + i][2 * c + j])
    }

    /// Local blocks `A_j`, `A_{j+l}` and the cross block `C`.
    pub fn blocks(&self) -> (Matrix2<f64>, Matrix2<f64>, Matrix2<f64>) {
        (self.block(0, 0), self.block(1, 1), self.block(0, 1))
    }

    /// Smallest eigenvalue of `V + iΩ`.
    pub fn uncertainty_margin(&self) -> f64 {
        let omega = [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]];
        let m = DMatrix::from_fn(4, 4, |r, c| C64::new(self.v[r][c], omega[r][c]));
        crate::linalg::hermitian_eigenvalues(&m)[0]
    }

    pub fn is_physical(&self) -> bool {
        self.uncertainty_margin() >= -1e-8
    }

    /// Two-mode squeezed vacuum with squeezing `r`.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        Self {
            v: [[c, 0.0, s, 0.0], [0.0, c, 0.0, -s], [s, 0.0, c, 0.0], [0.0, -s, 0.0, c]],
        }
    }

    pub fn vacuum() -> Self {
        Self {
            v: [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
        }
    }
}

/// Assemble the covariance of sites separated by `l`.
pub fn covariance_block(corr: &SpinWaveCorrelators, l: usize) -> Result<CovarianceBlock, SpinWaveError> {
    if l == 0 {
        return Err(SpinWaveError::Separation(l));
    }
    if l > corr.l_max() {
        return Err(SpinWaveError::OutOfRange { l, l_max: corr.l_max() });
    }
    let (n0, a0) = (corr.normal[0].re, corr.anomalous[0]);
    let (nl, al) = (corr.normal[l].re, corr.anomalous[l]);
    let xx = 1.0 + 2.0 * n0 + 2.0 * a0.re;
    let pp = 1.0 + 2.0 * n0 - 2.0 * a0.re;
    let xp = 2.0 * a0.im;
    let cxx = 2.0 * nl + 2.0 * al.re;
    let cpp = 2.0 * nl - 2.0 * al.re;
    let cxp = 2.0 * al.im;
    let block = CovarianceBlock {
        v: [
            [xx, xp, cxx, cxp],
            [xp, pp, cxp, cpp],
            [cxx, cxp, xx, xp],
            [cxp, cpp, xp, pp],
        ],
    };
    let margin = block.uncertainty_margin();
    if margin < -1e-8 {
        return Err(SpinWaveError::Unphysical(margin));
    }
    Ok(block)
}

/// Smallest symplectic eigenvalue of the partial transpose.
pub fn symplectic_nu_minus(v: &CovarianceBlock) -> Result<f64, SpinWaveError> {
    let (a, b, c) = v.blocks();
    let tau = a.determinant() + b.determinant() - 2.0 * c.determinant();
    let det = v.matrix().determinant();
    let disc = tau * tau - 4.0 * det;
    if disc < -1e-10 {
        return Err(SpinWaveError::Unphysical(disc));
    }
    let nu2 = 0.5 * (tau - disc.max(0.0).sqrt());
    Ok(nu2.max(0.0).sqrt())
}

/// `max(0, 1 - ν̃₋)`.
pub fn gaussian_negativity(v: &CovarianceBlock) -> Result<f64, SpinWaveError> {
    Ok((1.0 - symplectic_nu_minus(v)?).max(0.0))
}

/// Gaussian negativity at separation `l` for given parameters.
pub fn pair_negativity(params: &ModelParams, l: usize) -> Result<f64, SpinWaveError> {
    let corr = real_space_correlators(params, l)?;
    gaussian_negativity(&covariance_block(&corr, l)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: f64, delta: f64, kappa: f64) -> ModelParams {
        ModelParams::new(g, delta, kappa, 1).unwrap()
    }

    #[test]
    fn dispersion_examples() {
        let d = dispersions(&p(-1.0, 1.0, 0.5), 0.0);
        assert_eq!((d.eps, d.eta), (0.0, 2.0));
        assert!((d.xi * d.xi - C64::new(-4.0, 0.0)).norm() < 1e-12);
        let d = dispersions(&p(0.3, 0.5, 0.5), std::f64::consts::FRAC_PI_2);
        assert!((d.eps - 0.6).abs() < 1e-12 && d.eta.abs() < 1e-15);
        let d = dispersions(&p(-0.4, 0.0, 0.5), 2.0);
        assert!((d.xi.norm() - d.eps.abs()).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_matches_closed_form() {
        let params = p(-1.0, 0.1, 1.0);
        for i in 0..=64 {
            let k = -std::f64::consts::PI + i as f64 * std::f64::consts::PI / 32.0;
            let (n, a) = mode_moments(&params, k).unwrap();
            let (nc, ac) = mode_moments_closed_form(&params, k);
            assert!((n - nc).abs() < 1e-12, "k={k}: {n} vs {nc}");
            assert!((a - ac).norm() < 1e-12, "k={k}: {a} vs {ac}");
        }
    }

    #[test]
    fn vacuum_at_zero_anisotropy() {
        let (n, a) = mode_moments(&p(0.4, 0.0, 0.7), 0.3).unwrap();
        assert!(n.abs() < 1e-15 && a.norm() < 1e-15);
    }

    #[test]
    fn unstable_mode_is_named() {
        // Δ = 1, g = -1, κ = 0.5 makes k = 0 unstable.
        let err = mode_moments(&p(-1.0, 0.99, 0.5), 0.0).unwrap_err();
        assert!(matches!(err, SpinWaveError::UnstableMode { .. }));
    }

    #[test]
    fn small_delta_pole_limit() {
        let params = p(-1.0, 1e-7, 0.8);
        let poles = poles(&params).unwrap();
        // c roots approach -g ± iκ/2 as Δ → 0.
        let mut re: Vec<f64> = poles.c_roots.iter().map(|c| c.re).collect();
        re.sort_by(|a, b| a.total_cmp(b));
        assert!((re[0] - 1.0).abs() < 1e-6 && (re[1] - 1.0).abs() < 1e-6);
        for c in poles.c_roots {
            assert!((c.im.abs() - 0.4).abs() < 1e-6);
        }
    }

    #[test]
    fn unit_modulus_gives_unit_length() {
        assert!((-1.0 / (-1.0f64).exp().ln() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_and_residues_agree() {
        for &(g, d, k) in &[(-1.0, 0.1, 1.0), (0.5, 0.3, 0.4), (-2.0, 0.7, 2.0), (1.3, 0.05, 0.2)] {
            let c = real_space_correlators(&p(g, d, k), 12).unwrap();
            assert!(c.discrepancy < 1e-10, "({g}, {d}, {k}): {}", c.discrepancy);
        }
    }

    #[test]
    fn zero_anisotropy_gives_zero_correlators() {
        let c = real_space_correlators(&p(-1.0, 0.0, 1.0), 5).unwrap();
        assert!(c.normal.iter().chain(&c.anomalous).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn covariance_of_vacuum_is_identity() {
        let c = real_space_correlators(&p(-1.0, 0.0, 1.0), 2).unwrap();
        let v = covariance_block(&c, 1).unwrap();
        assert_eq!(v, CovarianceBlock::vacuum());
        assert!((symplectic_nu_minus(&v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(gaussian_negativity(&v).unwrap(), 0.0);
    }

    #[test]
    fn two_mode_squeezed_negativity() {
        for r in [0.05, 0.3, 1.0] {
            let v = CovarianceBlock::two_mode_squeezed(r);
            assert!(v.is_physical());
            let n = gaussian_negativity(&v).unwrap();
            assert!((n - (1.0 - (-2.0 * r).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_neighbour_block_is_physical() {
        let c = real_space_correlators(&p(-1.0, 0.01, 1.0), 3).unwrap();
        let v = covariance_block(&c, 1).unwrap();
        assert!(v.is_physical());
        let m = v.matrix();
        assert_eq!(m, m.transpose());
    }

    #[test]
    fn pole_modulus_approaches_one_as_damping_vanishes() {
        let moduli: Vec<f64> = [2.0, 1.0, 0.5, 0.25]
            .iter()
            .map(|&k| poles(&p(-1.0, 0.005, k)).unwrap().z0.norm())
            .collect();
        assert!(moduli.windows(2).all(|w| w[1] > w[0]), "{moduli:?}");
        assert!(moduli[3] < 1.0);
    }

    #[test]
    fn ising_limit_rejected() {
        assert_eq!(poles(&p(-1.0, 1.0, 0.5)), Err(SpinWaveError::IsingLimit(1.0)));
    }
}
