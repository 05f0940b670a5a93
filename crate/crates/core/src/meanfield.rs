//! Mean-field (product-state) dynamics: Bloch equations, linear stability of
//! the trivial state, uniform and staggered fixed points, phase labels.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelParams;
use crate::C64;

/// Number of interior wavenumbers in the stability scan.
pub const K_GRID: usize = 1025;

#[derive(Debug, Error, PartialEq)]
pub enum MeanFieldError {
    #[error("invalid numerics: {0}")]
    InvalidNumerics(String),
    #[error("non-finite Bloch vector at t = {0}")]
    NonFinite(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Classical spin `(⟨σˣ⟩, ⟨σʸ⟩, ⟨σᶻ⟩)` on every site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub spins: Vec<[f64; 3]>,
    pub boundary: Boundary,
}

impl BlochState {
    pub fn new(spins: Vec<[f64; 3]>, boundary: Boundary) -> Self {
        Self { spins, boundary }
    }

    /// All spins down.
    pub fn trivial(n: usize, boundary: Boundary) -> Self {
        Self::new(vec![[0.0, 0.0, -1.0]; n], boundary)
    }

    /// Trivial state plus a small in-plane seed with both uniform and
    /// staggered components, so either order can grow.
    pub fn perturbed_trivial(n: usize, amplitude: f64, boundary: Boundary) -> Self {
        let spins = (0..n)
            .map(|j| {
                let stag = if j % 2 == 0 { 1.0 } else { -1.0 };
                let x = amplitude * (1.0 + 0.6 * stag);
                let y = amplitude * (0.4 - 0.3 * stag);
                [x, y, -(1.0 - x * x - y * y).sqrt()]
            })
            .collect();
        Self::new(spins, boundary)
    }

    /// Uniformly random directions of random length inside the Bloch ball.
    pub fn random(n: usize, seed: u64, boundary: Boundary) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spins = (0..n)
            .map(|_| {
                let r: f64 = rng.random::<f64>().cbrt();
                let cos_t: f64 = rng.random_range(-1.0..1.0);
                let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let sin_t = (1.0 - cos_t * cos_t).sqrt();
                [r * sin_t * phi.cos(), r * sin_t * phi.sin(), r * cos_t]
            })
            .collect();
        Self::new(spins, boundary)
    }

    pub fn n_sites(&self) -> usize {
        self.spins.len()
    }

    fn neighbor_sum(&self, j: usize, axis: usize) -> f64 {
        let n = self.spins.len();
        let mut s = 0.0;
        match self.boundary {
            Boundary::Open => {
                if j > 0 {
                    s += self.spins[j - 1][axis];
                }
                if j + 1 < n {
                    s += self.spins[j + 1][axis];
                }
            }
            Boundary::Periodic => {
                if n > 1 {
                    s += self.spins[(j + n - 1) % n][axis] + self.spins[(j + 1) % n][axis];
                }
            }
        }
        s
    }

    /// Largest Euclidean norm of a site derivative.
    pub fn max_norm(&self) -> f64 {
        self.spins
            .iter()
            .map(|s| (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Right-hand side for one spin given its neighbour sums `(nx, ny)`.
fn site_rhs(s: [f64; 3], nx: f64, ny: f64, p: &ModelParams) -> [f64; 3] {
    let (k, g, d) = (p.kappa, p.g, p.delta);
    let [x, y, z] = s;
    [
        -k * x + 2.0 * g * y - (1.0 - d) * z * ny,
        -k * y - 2.0 * g * x + (1.0 + d) * z * nx,
        -2.0 * k * (z + 1.0) - (1.0 + d) * y * nx + (1.0 - d) * x * ny,
    ]
}

/// Mean-field equations of motion for every site.
pub fn bloch_derivative(state: &BlochState, params: &ModelParams) -> BlochState {
    let spins = (0..state.n_sites())
        .map(|j| site_rhs(state.spins[j], state.neighbor_sum(j, 0), state.neighbor_sum(j, 1), params))
        .collect();
    BlochState::new(spins, state.boundary)
}

fn axpy(a: &BlochState, h: f64, d: &BlochState) -> BlochState {
    let spins = a
        .spins
        .iter()
        .zip(&d.spins)
        .map(|(s, ds)| [s[0] + h * ds[0], s[1] + h * ds[1], s[2] + h * ds[2]])
        .collect();
    BlochState::new(spins, a.boundary)
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step(state: &BlochState, params: &ModelParams, dt: f64) -> BlochState {
    let k1 = bloch_derivative(state, params);
    let k2 = bloch_derivative(&axpy(state, 0.5 * dt, &k1), params);
    let k3 = bloch_derivative(&axpy(state, 0.5 * dt, &k2), params);
    let k4 = bloch_derivative(&axpy(state, dt, &k3), params);
    let spins = (0..state.n_sites())
        .map(|j| {
            std::array::from_fn(|a| {
                state.spins[j][a] + dt / 6.0 * (k1.spins[j][a] + 2.0 * k2.spins[j][a] + 2.0 * k3.spins[j][a] + k4.spins[j][a])
            })
        })
        .collect();
    BlochState::new(spins, state.boundary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochRun {
    pub state: BlochState,
    pub time: f64,
    pub converged: bool,
    /// Largest per-site derivative norm at the end.
    pub final_rate: f64,
}

/// Integrate until the largest site derivative drops below `tol` or until
/// `t_max`.
pub fn evolve_bloch(
    state0: &BlochState,
    params: &ModelParams,
    dt: f64,
    t_max: f64,
    tol: f64,
) -> Result<BlochRun, MeanFieldError> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_max >= 0.0) || !(tol > 0.0) {
        return Err(MeanFieldError::InvalidNumerics(format!("dt={dt}, t_max={t_max}, tol={tol}")));
    }
    let mut state = state0.clone();
    let mut t = 0.0;
    let steps = (t_max / dt).ceil() as u64;
    let mut rate = bloch_derivative(&state, params).max_norm();
    for step in 0..steps {
        if rate < tol {
            break;
        }
        state = rk4_step(&state, params, dt);
        t = (step + 1) as f64 * dt;
        if step % 64 == 63 || step + 1 == steps {
            if state.spins.iter().flatten().any(|v| !v.is_finite()) {
                return Err(MeanFieldError::NonFinite(t));
            }
            rate = bloch_derivative(&state, params).max_norm();
        }
    }
    Ok(BlochRun {
        converged: rate < tol,
        state,
        time: t,
        final_rate: rate,
    })
}

/// Fluctuation frequencies of the trivial state at wavenumber `k`:
/// the two branches `-iκ ± 2√(g² + 2g cos k + (1-Δ²) cos² k)`, ordered so
/// that the first has the larger imaginary part, and the third `-2iκ`.
pub fn mode_frequencies(params: &ModelParams, k: f64) -> (C64, C64, C64) {
    let c = k.cos();
    let arg = stability_argument(params, c);
    let root = C64::new(arg, 0.0).sqrt() * 2.0;
    let root = if root.im < 0.0 { -root } else { root };
    let base = C64::new(0.0, -params.kappa);
    (base + root, base - root, C64::new(0.0, -2.0 * params.kappa))
}

fn stability_argument(p: &ModelParams, c: f64) -> f64 {
    p.g * p.g + 2.0 * p.g * c + (1.0 - p.delta * p.delta) * c * c
}

/// `max Im ν` at a given `cos k`.
fn growth_at(p: &ModelParams, c: f64) -> f64 {
    -p.kappa + 2.0 * (-stability_argument(p, c)).max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Trivial,
    #[serde(rename = "FM")]
    Fm,
    #[serde(rename = "AFM")]
    Afm,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Trivial => "Trivial",
            Phase::Fm => "FM",
            Phase::Afm => "AFM",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub phase: Phase,
    /// Most unstable wavenumber in `[0, π]`.
    pub k: f64,
    pub growth_rate: f64,
}

/// Most unstable plane wave of the trivial state and the resulting label.
/// An instability peaked at `cos k > 0` is labelled FM and one at
/// `cos k < 0` AFM.
pub fn classify_phase(params: &ModelParams) -> PhaseLabel {
    let mut best_c = 1.0;
    let mut best = f64::NEG_INFINITY;
    let mut consider = |c: f64| {
        let c = c.clamp(-1.0, 1.0);
        let r = growth_at(params, c);
        if r > best {
            best = r;
            best_c = c;
        }
    };
    consider(1.0);
    consider(-1.0);
    for i in 1..=K_GRID {
        let k = std::f64::consts::PI * i as f64 / (K_GRID + 1) as f64;
        consider(k.cos());
    }
    // Interior extremum of the quadratic in cos k.
    let a = 1.0 - params.delta * params.delta;
    if a > 0.0 {
        let c_star = -params.g / a;
        if c_star.abs() <= 1.0 {
            consider(c_star);
        }
    }
    let phase = if best <= 0.0 {
        Phase::Trivial
    } else if best_c > 0.0 {
        Phase::Fm
    } else {
        Phase::Afm
    };
    PhaseLabel {
        phase,
        k: best_c.acos(),
        growth_rate: best,
    }
}

/// Ising-limit critical decay rate `2√(1 - (g ∓ 1)²)`, zero outside the
/// ordered lobes.
pub fn ising_boundary(g: f64) -> f64 {
    let shifted = if g < 0.0 { g + 1.0 } else { g - 1.0 };
    let arg = 1.0 - shifted * shifted;
    if g == 0.0 || arg <= 0.0 {
        0.0
    } else {
        2.0 * arg.sqrt()
    }
}

/// Values of `g` in `[g_min, g_max]` where the growth rate changes sign,
/// bracketed on a grid of `n` points and refined by bisection.
pub fn phase_boundaries(delta: f64, kappa: f64, g_min: f64, g_max: f64, n: usize) -> Vec<f64> {
    let rate = |g: f64| {
        classify_phase(&ModelParams {
            g,
            delta,
            kappa,
            n_sites: 1,
        })
        .growth_rate
    };
    let mut out = Vec::new();
    let n = n.max(2);
    let mut prev_g = g_min;
    let mut prev = rate(g_min);
    for i in 1..n {
        let g = g_min + (g_max - g_min) * i as f64 / (n - 1) as f64;
        let r = rate(g);
        if (prev > 0.0) != (r > 0.0) {
            let (mut lo, mut hi) = (prev_g, g);
            let lo_sign = prev > 0.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if (rate(mid) > 0.0) == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        prev_g = g;
        prev = r;
    }
    out
}

/// Uniform (`staggered = false`) or sign-alternating fixed point of the
/// Bloch equations, given on the even sublattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzRoot {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub staggered: bool,
    /// Largest component of the Bloch right-hand side at the root.
    pub residual: f64,
    /// All eigenvalues of the two-sublattice Jacobian have negative real part.
    pub stable: bool,
}

impl AnsatzRoot {
    pub fn is_trivial(&self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }

    /// Sublattice spins `(even, odd)`.
    pub fn sublattices(&self) -> ([f64; 3], [f64; 3]) {
        let s = if self.staggered { -1.0 } else { 1.0 };
        ([self.x, self.y, self.z], [s * self.x, s * self.y, self.z])
    }
}

/// Right-hand sides of the two sublattices when each spin sees two
/// neighbours of the other sublattice.
fn two_sublattice_rhs(a: [f64; 3], b: [f64; 3], p: &ModelParams) -> ([f64; 3], [f64; 3]) {
    (
        site_rhs(a, 2.0 * b[0], 2.0 * b[1], p),
        site_rhs(b, 2.0 * a[0], 2.0 * a[1], p),
    )
}

/// Jacobian of the six-dimensional two-sublattice dynamics.
pub fn sublattice_jacobian(a: [f64; 3], b: [f64; 3], p: &ModelParams) -> DMatrix<f64> {
    let (k, g, d) = (p.kappa, p.g, p.delta);
    let block = |s: [f64; 3], n: [f64; 3]| {
        let (nx, ny) = (2.0 * n[0], 2.0 * n[1]);
        let own = DMatrix::from_row_slice(
            3,
            3,
            &[
                -k, 2.0 * g, -(1.0 - d) * ny,
                -2.0 * g, -k, (1.0 + d) * nx,
                (1.0 - d) * ny, -(1.0 + d) * nx, -2.0 * k,
            ],
        );
        let [x, y, z] = s;
        let other = DMatrix::from_row_slice(
            3,
            3,
            &[
                0.0, -2.0 * (1.0 - d) * z, 0.0,
                2.0 * (1.0 + d) * z, 0.0, 0.0,
                -2.0 * (1.0 + d) * y, 2.0 * (1.0 - d) * x, 0.0,
            ],
        );
        (own, other)
    };
    let (aa, ab) = block(a, b);
    let (bb, ba) = block(b, a);
    let mut j = DMatrix::zeros(6, 6);
    j.view_mut((0, 0), (3, 3)).copy_from(&aa);
    j.view_mut((0, 3), (3, 3)).copy_from(&ab);
    j.view_mut((3, 3), (3, 3)).copy_from(&bb);
    j.view_mut((3, 0), (3, 3)).copy_from(&ba);
    j
}

fn make_root(x: f64, y: f64, z: f64, staggered: bool, p: &ModelParams) -> AnsatzRoot {
    let mut root = AnsatzRoot {
        x,
        y,
        z,
        staggered,
        residual: 0.0,
        stable: false,
    };
    let (a, b) = root.sublattices();
    let (ra, rb) = two_sublattice_rhs(a, b, p);
    root.residual = ra.iter().chain(&rb).fold(0.0f64, |m, v| m.max(v.abs()));
    let eig = sublattice_jacobian(a, b, p).complex_eigenvalues();
    root.stable = eig.iter().all(|l| l.re < 0.0);
    root
}

/// Fixed points of the uniform (or staggered) ansatz. The trivial root comes
/// first; each ordered root is reported once with `X > 0`, its partner
/// `(-X, -Y, Z)` being implied by the Z₂ symmetry.
///
/// With `s = +1` (uniform) or `s = -1` (staggered), writing
/// `a = 2g - 2s(1-Δ)Z` and `b = 2s(1+Δ)Z - 2g`, a nontrivial root needs
/// `ab = κ²`, a quadratic in `Z`; then `Y = κX/a` and
/// `X² = -s a (Z+1) / 2Δ`.
pub fn uniform_ansatz_roots(params: &ModelParams, staggered: bool) -> Vec<AnsatzRoot> {
    let (g, d, k) = (params.g, params.delta, params.kappa);
    let s = if staggered { -1.0 } else { 1.0 };
    let mut roots = vec![make_root(0.0, 0.0, -1.0, staggered, params)];
    if d == 0.0 {
        return roots;
    }
    // 4(1-Δ²) Z² - 8 s g Z + 4g² + κ² = 0
    let qa = 4.0 * (1.0 - d * d);
    let qb = -8.0 * s * g;
    let qc = 4.0 * g * g + k * k;
    let mut zs = Vec::new();
    if qa.abs() < 1e-14 {
        if qb != 0.0 {
            zs.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // Numerically stable pair.
            let q = -0.5 * (qb + qb.signum() * sq);
            if q != 0.0 {
                zs.push(q / qa);
                zs.push(qc / q);
            } else {
                zs.push(0.0);
            }
        }
    }
    zs.sort_by(|a, b| a.total_cmp(b));
    zs.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    for z in zs {
        if !(z > -1.0 && z <= 1.0) {
            continue;
        }
        let a = 2.0 * g - 2.0 * s * (1.0 - d) * z;
        if a == 0.0 {
            continue;
        }
        let x2 = -s * a * (z + 1.0) / (2.0 * d);
        if !(x2 > 0.0) || x2 + z * z > 1.0 + 1e-9 {
            continue;
        }
        let x = x2.sqrt();
        let y = k * x / a;
        if x2 + y * y + z * z > 1.0 + 1e-9 {
            continue;
        }
        roots.push(make_root(x, y, z, staggered, params));
    }
    roots
}

/// One row of the exported phase diagram.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub g: f64,
    pub delta: f64,
    pub kappa: f64,
    pub label: Phase,
    pub growth_rate: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Label plus the stable ansatz root of matching type (trivial if none).
pub fn phase_row(params: &ModelParams) -> PhaseRow {
    let label = classify_phase(params);
    let root = match label.phase {
        Phase::Trivial => None,
        Phase::Fm => uniform_ansatz_roots(params, false).into_iter().skip(1).find(|r| r.stable),
        Phase::Afm => uniform_ansatz_roots(params, true).into_iter().skip(1).find(|r| r.stable),
    };
    let (x, y, z) = root.map_or((0.0, 0.0, -1.0), |r| (r.x, r.y, r.z));
    PhaseRow {
        g: params.g,
        delta: params.delta,
        kappa: params.kappa,
        label: label.phase,
        growth_rate: label.growth_rate,
        x,
        y,
        z,
    }
}
