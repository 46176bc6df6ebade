//! Bounded-domain study on balls: radial finite-volume meshes, the first
//! Dirichlet eigenvalue, and clamped global minimization of
//!
//! ```text
//! I(u) = 1/2 ∫_{B_R} |∇u|² - ∫_{B_R} G(u)
//! ```
//!
//! over nodal vectors confined to `[0, α₀]` (truncating a minimizer at
//! the constant equilibrium never raises the energy, so the box loses
//! nothing and removes all growth issues). As R grows with
//! `g'(0) > λ₁(B_R)`, the minimizers flatten toward the constant α₀,
//! energies diverge to -∞, and every L^q norm blows up: the study
//! documents how the variational approximation degenerates instead of
//! producing a localized limit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::nonlinearity::NonlinearitySpec;
use crate::{Error, Result};

/// Surface area of the unit sphere in R^N: `2 π^{N/2} / Γ(N/2)`.
pub fn unit_sphere_area(n: u32) -> f64 {
    use std::f64::consts::PI;
    // Γ(m/2) via the recurrence from Γ(1/2) = sqrt(pi), Γ(1) = 1.
    let gamma_half = |m: u32| -> f64 {
        let mut x = if m % 2 == 1 { PI.sqrt() } else { 1.0 };
        let mut k = if m % 2 == 1 { 1 } else { 2 };
        while k + 2 <= m {
            x *= k as f64 / 2.0;
            k += 2;
        }
        x
    };
    2.0 * PI.powf(f64::from(n) / 2.0) / gamma_half(n)
}

/// Uniform radial mesh on the ball B_R with Dirichlet data at r = R and
/// the symmetric (zero-flux) treatment of the center.
///
/// Nodes are `r_i = i h`, `h = R / m`; the `m` interior values
/// `u_0 .. u_{m-1}` are unknowns and `u_m = 0`. Quadrature weights are
/// the exact cell volumes, so integrating the constant 1 reproduces
/// |B_R| exactly.
#[derive(Debug, Clone)]
pub struct RadialMesh {
    pub n: u32,
    pub radius: f64,
    pub m: usize,
    pub h: f64,
    /// face areas r_{i+1/2}^{N-1}, i = 0..m-1 (times ω later)
    faces: Vec<f64>,
    /// exact cell volumes for nodes 0..=m (ω included)
    weights: Vec<f64>,
    omega: f64,
}

impl RadialMesh {
    pub fn assemble(n: u32, radius: f64, m: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Mesh("dimension must be >= 1".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Mesh("radius must be positive".into()));
        }
        if m < 64 {
            return Err(Error::Mesh(format!("need at least 64 cells, got {m}")));
        }
        let h = radius / m as f64;
        let nf = f64::from(n);
        let omega = unit_sphere_area(n);
        let faces = (0..m)
            .map(|i| ((i as f64 + 0.5) * h).powf(nf - 1.0))
            .collect();
        let weights = (0..=m)
            .map(|i| {
                let r = i as f64 * h;
                let hi = (r + 0.5 * h).min(radius);
                let lo = (r - 0.5 * h).max(0.0);
                omega * (hi.powf(nf) - lo.powf(nf)) / nf
            })
            .collect();
        Ok(RadialMesh { n, radius, m, h, faces, weights, omega })
    }

    pub fn volume(&self) -> f64 {
        self.omega * self.radius.powf(f64::from(self.n)) / f64::from(self.n)
    }

    /// Sum of the quadrature weights; telescopes to |B_R|.
    pub fn quad_total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn node_r(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Tridiagonal stiffness operator on the interior unknowns:
    /// diag and off-diagonal of `S` with `(S u)_i = ω/h Σ faces (u_i - u_j)`.
    fn stiffness(&self) -> (Vec<f64>, Vec<f64>) {
        let scale = self.omega / self.h;
        let mut diag = vec![0.0; self.m];
        let mut off = vec![0.0; self.m - 1];
        diag[0] = scale * self.faces[0];
        for i in 1..self.m {
            diag[i] = scale * (self.faces[i - 1] + self.faces[i]);
        }
        for i in 0..self.m - 1 {
            off[i] = -scale * self.faces[i];
        }
        (diag, off)
    }

    fn apply_stiffness(&self, u: &[f64], out: &mut [f64]) {
        let scale = self.omega / self.h;
        let m = self.m;
        for i in 0..m {
            let left = if i == 0 { 0.0 } else { self.faces[i - 1] * (u[i] - u[i - 1]) };
            let right_u = if i + 1 < m { u[i + 1] } else { 0.0 };
            let right = self.faces[i] * (u[i] - right_u);
            out[i] = scale * (left + right);
        }
    }

    /// Discrete energy of an interior nodal vector.
    pub fn energy(&self, u: &[f64], spec: &NonlinearitySpec) -> f64 {
        let scale = 0.5 * self.omega / self.h;
        let mut e = 0.0;
        for i in 0..self.m {
            let up = if i + 1 < self.m { u[i + 1] } else { 0.0 };
            let d = up - u[i];
            e += scale * self.faces[i] * d * d;
        }
        for i in 0..self.m {
            e -= self.weights[i] * spec.big_g(0.0, u[i]);
        }
        e
    }

    /// Smallest Dirichlet eigenvalue of the stiffness/mass pencil by
    /// inverse power iteration, with the (positive, sup-normalized)
    /// eigenvector.
    pub fn lambda1_with_mode(&self) -> Result<(f64, Vec<f64>)> {
        let (diag, off) = self.stiffness();
        let fact = LdlTridiag::factor(&diag, &off)?;
        let w = &self.weights[..self.m];
        let mut x: Vec<f64> = (0..self.m).map(|i| 1.0 - self.node_r(i) / self.radius).collect();
        let mut lambda = 0.0;
        let mut rhs = vec![0.0; self.m];
        let mut sx = vec![0.0; self.m];
        for iter in 0..500 {
            for i in 0..self.m {
                rhs[i] = w[i] * x[i];
            }
            let y = fact.solve(&rhs);
            // normalize in the mass norm
            let norm = (y.iter().zip(w).map(|(v, wi)| wi * v * v).sum::<f64>()).sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::NoConvergence("inverse power iteration degenerated".into()));
            }
            x = y.iter().map(|v| v / norm).collect();
            self.apply_stiffness(&x, &mut sx);
            let num: f64 = x.iter().zip(&sx).map(|(a, b)| a * b).sum();
            let den: f64 = x.iter().zip(w).map(|(a, wi)| wi * a * a).sum();
            lambda = num / den;
            let mut resid = 0.0f64;
            let mut scale = 0.0f64;
            for i in 0..self.m {
                let r_i = sx[i] - lambda * w[i] * x[i];
                resid += r_i * r_i;
                let s_i = lambda * w[i] * x[i];
                scale += s_i * s_i;
            }
            if resid.sqrt() <= 1e-10 * scale.sqrt() && iter >= 2 {
                if x[0] < 0.0 {
                    for v in &mut x {
                        *v = -*v;
                    }
                }
                let sup = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
                for v in &mut x {
                    *v /= sup;
                }
                return Ok((lambda, x));
            }
        }
        Err(Error::NoConvergence(format!(
            "eigenvalue residual stayed above 1e-10 (lambda ~ {lambda})"
        )))
    }

    pub fn lambda1(&self) -> Result<f64> {
        self.lambda1_with_mode().map(|(l, _)| l)
    }
}

/// LDL^T factorization of a symmetric tridiagonal matrix.
struct LdlTridiag {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl LdlTridiag {
    fn factor(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        d[0] = diag[0];
        for i in 1..n {
            if d[i - 1] <= 0.0 {
                return Err(Error::Mesh("operator is not positive definite".into()));
            }
            l[i - 1] = off[i - 1] / d[i - 1];
            d[i] = diag[i] - off[i - 1] * l[i - 1];
        }
        Ok(LdlTridiag { d, l })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut x = rhs.to_vec();
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
        x
    }
}

/// Initial iterate for the minimization.
#[derive(Debug, Clone, PartialEq)]
pub enum InitGuess {
    /// Positive λ₁-eigenfunction scaled to amplitude α₀/2 when
    /// `g'(0) > λ₁`, otherwise the zero vector.
    Auto,
    /// Caller-supplied interior nodal values (clamped to the box).
    Nodal(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub l4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerResult {
    /// Nodal values including the boundary zero (length m + 1).
    pub u: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub u_center: f64,
    pub norms: Norms,
    pub lambda1: f64,
    /// Final projected-gradient norm (mass-weighted).
    pub pg_norm: f64,
    /// Largest energy increase observed between accepted iterates
    /// (backtracking keeps this <= 0 up to rounding).
    pub max_energy_increase: f64,
}

/// Projected descent on the clamped box `[0, α₀]^m` with backtracking.
///
/// The search direction is the gradient preconditioned by the fixed SPD
/// operator `P = S + c M` (`c` bounds the negative curvature of -G on
/// the box), which keeps the iteration count mesh-independent; a
/// mass-scaled gradient step is the fallback whenever the projected
/// preconditioned step fails the descent test. Converged when the
/// projected gradient norm falls below `1e-9 (1 + |energy|)`.
pub fn minimize_energy(
    mesh: &RadialMesh,
    spec: &NonlinearitySpec,
    init: InitGuess,
) -> Result<MinimizerResult> {
    if !spec.is_autonomous() {
        return Err(Error::InvalidSpec("domain study needs an autonomous spec".into()));
    }
    let alpha0 = spec.alpha0(0.0)?;
    if !alpha0.is_finite() {
        return Err(Error::InvalidSpec(
            "alpha0 is infinite: the clamped admissible set is unbounded".into(),
        ));
    }
    let slope0 = spec.slope_at_zero(0.0);
    let (lambda1, mode) = mesh.lambda1_with_mode()?;

    let m = mesh.m;
    let w = &mesh.weights[..m];
    let mut u: Vec<f64> = match init {
        InitGuess::Nodal(v) => {
            if v.len() != m {
                return Err(Error::InvalidConfig(format!(
                    "initial vector has {} entries, mesh has {m} interior nodes",
                    v.len()
                )));
            }
            v.iter().map(|&x| x.clamp(0.0, alpha0)).collect()
        }
        InitGuess::Auto => {
            if slope0 > lambda1 {
                mode.iter().map(|&x| (0.5 * alpha0 * x).clamp(0.0, alpha0)).collect()
            } else {
                vec![0.0; m]
            }
        }
    };

    // curvature bound for the preconditioner: c >= sup_[0,a0] (-g'(z))
    let mut c = 0.0f64;
    for j in 0..=512 {
        let z = alpha0 * j as f64 / 512.0;
        let d = spec.dg_dz(0.0, z);
        if d.is_finite() {
            c = c.max(-d);
        }
    }
    let c = 1.0 + c;
    let (sdiag, soff) = mesh.stiffness();
    let pdiag: Vec<f64> = sdiag.iter().zip(w).map(|(s, wi)| s + c * wi).collect();
    let precond = LdlTridiag::factor(&pdiag, &soff)?;

    let mut grad = vec![0.0; m];
    let mut su = vec![0.0; m];
    let mut energy = mesh.energy(&u, spec);
    let mut max_energy_increase = f64::NEG_INFINITY;
    let mut pg_norm = f64::INFINITY;
    let mut converged = false;
    let max_iter = 200_000;
    let mut iterations = 0;

    // fallback step scale for the mass-metric direction
    let l_mass = (0..m)
        .map(|i| sdiag[i] / w[i])
        .fold(0.0f64, f64::max)
        + c;

    for iter in 0..max_iter {
        iterations = iter;
        mesh.apply_stiffness(&u, &mut su);
        for i in 0..m {
            grad[i] = su[i] - w[i] * spec.g(0.0, u[i]);
        }
        // projected-gradient residual in the mass norm
        let mut pg_sq = 0.0;
        for i in 0..m {
            let rho = grad[i] / w[i];
            let rho = if u[i] <= 0.0 {
                rho.min(0.0)
            } else if u[i] >= alpha0 {
                rho.max(0.0)
            } else {
                rho
            };
            pg_sq += w[i] * rho * rho;
        }
        pg_norm = pg_sq.sqrt();
        if pg_norm <= 1e-9 * (1.0 + energy.abs()) {
            converged = true;
            break;
        }

        let accept = |t: f64, d: &[f64], u: &[f64], grad: &[f64], energy: f64| -> Option<(Vec<f64>, f64)> {
            let v: Vec<f64> = (0..m).map(|i| (u[i] - t * d[i]).clamp(0.0, alpha0)).collect();
            let dir_deriv: f64 = (0..m).map(|i| grad[i] * (v[i] - u[i])).sum();
            if dir_deriv > 0.0 {
                return None;
            }
            let e_new = mesh.energy(&v, spec);
            if e_new <= energy + 1e-4 * dir_deriv {
                Some((v, e_new))
            } else {
                None
            }
        };

        let mut took_step = false;
        // preconditioned arc
        let d = precond.solve(&grad);
        let mut t = 1.0;
        for _ in 0..25 {
            if let Some((v, e_new)) = accept(t, &d, &u, &grad, energy) {
                max_energy_increase = max_energy_increase.max(e_new - energy);
                u = v;
                energy = e_new;
                took_step = true;
                break;
            }
            t *= 0.5;
        }
        if !took_step {
            // mass-scaled gradient arc
            let d2: Vec<f64> = (0..m).map(|i| grad[i] / w[i]).collect();
            let mut t = 2.0 / l_mass;
            for _ in 0..60 {
                if let Some((v, e_new)) = accept(t, &d2, &u, &grad, energy) {
                    max_energy_increase = max_energy_increase.max(e_new - energy);
                    u = v;
                    energy = e_new;
                    took_step = true;
                    break;
                }
                t *= 0.5;
            }
        }
        if !took_step {
            break; // no descent available at rounding level
        }
    }

    let mut full = u.clone();
    full.push(0.0);
    let norm_q = |q: f64| -> f64 {
        mesh.weights
            .iter()
            .zip(&full)
            .map(|(wi, ui)| wi * ui.abs().powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    };
    let norms = Norms { l1: norm_q(1.0), l2: norm_q(2.0), l4: norm_q(4.0) };
    if max_energy_increase == f64::NEG_INFINITY {
        max_energy_increase = 0.0;
    }
    Ok(MinimizerResult {
        u_center: full[0],
        u: full,
        energy,
        iterations,
        converged,
        norms,
        lambda1,
        pg_norm,
        max_energy_increase,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRow {
    pub radius: f64,
    pub m: usize,
    pub lambda1: f64,
    pub u_center: f64,
    pub energy: f64,
    pub energy_density: f64,
    pub l1: f64,
    pub l2: f64,
    pub l4: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    /// u(0) nondecreasing along the radii (1e-6 slack for solver noise).
    pub u_center_nondecreasing: bool,
    pub energy_strictly_decreasing: bool,
    pub energy_all_negative: bool,
    /// each of L1, L2, L4 strictly increasing along the radii
    pub norms_strictly_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainStudy {
    pub rows: Vec<DomainRow>,
    pub trends: TrendReport,
}

/// Minimize on a growing family of balls and report the degeneration
/// trends: centre value toward α₀, energy to -∞, norms to ∞.
pub fn domain_limit_study(
    spec: &NonlinearitySpec,
    n: u32,
    radii: &[f64],
    m_per_r: usize,
) -> Result<DomainStudy> {
    let results: Vec<Result<DomainRow>> = radii
        .par_iter()
        .map(|&radius| {
            let m = ((m_per_r as f64) * radius).round() as usize;
            let mesh = RadialMesh::assemble(n, radius, m)?;
            let res = minimize_energy(&mesh, spec, InitGuess::Auto)?;
            Ok(DomainRow {
                radius,
                m,
                lambda1: res.lambda1,
                u_center: res.u_center,
                energy: res.energy,
                energy_density: res.energy / mesh.volume(),
                l1: res.norms.l1,
                l2: res.norms.l2,
                l4: res.norms.l4,
                converged: res.converged,
                iterations: res.iterations,
            })
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        rows.push(r?);
    }
    rows.sort_by(|a, b| a.radius.partial_cmp(&b.radius).unwrap());

    let mut trends = TrendReport {
        u_center_nondecreasing: true,
        energy_strictly_decreasing: true,
        energy_all_negative: rows.iter().all(|r| r.energy < 0.0),
        norms_strictly_increasing: true,
    };
    for w in rows.windows(2) {
        trends.u_center_nondecreasing &= w[1].u_center >= w[0].u_center - 1e-6;
        trends.energy_strictly_decreasing &= w[1].energy < w[0].energy;
        trends.norms_strictly_increasing &=
            w[1].l1 > w[0].l1 && w[1].l2 > w[0].l2 && w[1].l4 > w[0].l4;
    }
    Ok(DomainStudy { rows, trends })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn quadrature_reproduces_ball_volume() {
        // N=3, R=2: 4 pi R^3 / 3
        let mesh = RadialMesh::assemble(3, 2.0, 256).unwrap();
        let exact = 4.0 * std::f64::consts::PI * 8.0 / 3.0;
        assert!((mesh.quad_total() - exact).abs() < 1e-4 * exact);
        assert!((mesh.volume() - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn mesh_rejects_too_coarse() {
        assert!(RadialMesh::assemble(3, 1.0, 32).is_err());
    }

    #[test]
    fn lambda1_exact_scaling_under_radius_doubling() {
        let a = RadialMesh::assemble(3, 1.0, 256).unwrap().lambda1().unwrap();
        let b = RadialMesh::assemble(3, 2.0, 256).unwrap().lambda1().unwrap();
        assert!((b - a / 4.0).abs() <= 1e-10 * a, "{b} vs {}", a / 4.0);
    }

    #[test]
    fn lambda1_n1_cosine_mode() {
        // even mode on (-R, R): lambda = (pi / 2R)^2
        let mesh = RadialMesh::assemble(1, 1.5, 512).unwrap();
        let exact = (std::f64::consts::PI / 3.0).powi(2);
        let got = mesh.lambda1().unwrap();
        assert!((got - exact).abs() < 1e-3 * exact, "{got} vs {exact}");
    }

    #[test]
    fn subcritical_ball_returns_zero() {
        // g2 on B_2 in N=3: lambda1 = (pi/2)^2 > 1 = g'(0)
        let spec = NonlinearitySpec::defocusing_power(1.0, 4.0);
        let mesh = RadialMesh::assemble(3, 2.0, 512).unwrap();
        let res = minimize_energy(&mesh, &spec, InitGuess::Auto).unwrap();
        assert!(res.lambda1 > 1.0);
        assert!(res.converged);
        assert_eq!(res.energy, 0.0);
        assert!(res.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn supercritical_ball_nontrivial_minimizer() {
        let spec = NonlinearitySpec::defocusing_power(1.0, 4.0);
        let mesh = RadialMesh::assemble(3, 8.0, 512).unwrap();
        let res = minimize_energy(&mesh, &spec, InitGuess::Auto).unwrap();
        assert!(res.converged, "pg_norm = {}", res.pg_norm);
        assert!(res.energy < 0.0);
        assert!(res.u.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(res.u_center > 0.9);
        assert!(res.max_energy_increase <= 1e-9 * (1.0 + res.energy.abs()));
    }

    #[test]
    fn minimize_rejects_unbounded_alpha0() {
        let spec = NonlinearitySpec::focusing_power(1.0, 4.0);
        let mesh = RadialMesh::assemble(3, 4.0, 256).unwrap();
        assert!(minimize_energy(&mesh, &spec, InitGuess::Auto).is_err());
    }
}
