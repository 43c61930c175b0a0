//! Closed-form regret bounds, potential functions and the sum-of-squares
//! certificate for the tuned OFW analysis.

use crate::linalg::Matrix;
use crate::model::{ofw_step_params, positive};
use crate::num::{dist, dot, powf, sqrt};
use crate::simulate::Trace;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// `(η, σ)` of tuned fixed-step OFW for horizon `T`.
pub fn ofw_params(horizon: usize, lipschitz: f64, diameter: f64) -> (f64, f64) {
    ofw_step_params(horizon, lipschitz, diameter)
}

fn three_quarter(t: usize) -> f64 {
    powf(t as f64, 0.75)
}

fn need_three(horizon: usize) -> Result<()> {
    if horizon < 3 {
        Err(Error::NotApplicable("the tuned OFW guarantee needs T ≥ 3"))
    } else {
        Ok(())
    }
}

/// `4·3^{−3/4}·L·D·T^{3/4}`
pub fn theorem1_bound(horizon: usize, lipschitz: f64, diameter: f64) -> Result<f64> {
    need_three(horizon)?;
    Ok(4.0 * powf(3.0, -0.75) * lipschitz * diameter * three_quarter(horizon))
}

/// Three-term bound evaluated on a fixed-step OFW run (which must record `v_T`):
/// `λ^g Σ‖g_t‖² + c Σ‖x_t − v_t‖² + (L T^{3/4} / (D 3^{3/4})) ‖x⋆ − x_1‖²`.
pub fn theorem1_refined(
    trace: &Trace,
    x_star: &[f64],
    lipschitz: f64,
    diameter: f64,
) -> Result<f64> {
    let big_t = trace.horizon();
    need_three(big_t)?;
    if trace.v.len() < big_t || trace.x.len() < big_t {
        return Err(Error::DimensionMismatch {
            what: "trace atoms",
            expected: big_t,
            got: trace.v.len(),
        });
    }
    let scale = powf(3.0, 0.75) * powf(big_t as f64, 0.25);
    let c_g = 2.0 * diameter / (lipschitz * scale);
    let c_v = lipschitz / (diameter * scale);
    let c_star = lipschitz * three_quarter(big_t) / (diameter * powf(3.0, 0.75));
    let g2: f64 = trace.grads.iter().map(|g| dot(g, g)).sum();
    let v2: f64 = (0..big_t)
        .map(|t| {
            let d = dist(&trace.x[t], &trace.v[t]);
            d * d
        })
        .sum();
    let s = dist(x_star, &trace.x[0]);
    Ok(c_g * g2 + c_v * v2 + c_star * s * s)
}

/// `(η/2) L² T + D² / (2η)`
pub fn ftrl_bound(horizon: usize, lipschitz: f64, diameter: f64, eta: f64) -> Result<f64> {
    positive("eta", eta)?;
    Ok(0.5 * eta * lipschitz * lipschitz * horizon as f64 + diameter * diameter / (2.0 * eta))
}

fn check_coupled(ofw: &Trace, ftrl: &Trace, t: usize) -> Result<()> {
    if ofw.grads != ftrl.grads {
        return Err(Error::InvalidParameter {
            name: "coupled traces must share gradients",
            value: f64::NAN,
        });
    }
    if t > ofw.horizon() || ofw.x.len() <= t || ftrl.x.len() <= t {
        return Err(Error::DimensionMismatch {
            what: "potential index",
            expected: ofw.horizon(),
            got: t,
        });
    }
    Ok(())
}

/// `ψ_t = Σ_{s≤t} ⟨g_s, y_s − y_{t+1}⟩ − (1/2η) ‖y_{t+1} − y_1‖²`
pub fn potential_psi(t: usize, ftrl: &Trace, eta: f64) -> Result<f64> {
    check_coupled(ftrl, ftrl, t)?;
    let y_next = &ftrl.x[t];
    let mut acc = 0.0;
    for s in 0..t {
        acc += dot(&ftrl.grads[s], &ftrl.x[s]) - dot(&ftrl.grads[s], y_next);
    }
    let r = dist(y_next, &ftrl.x[0]);
    Ok(acc - r * r / (2.0 * eta))
}

/// `φ_t` with weight `1/(6η)` on `‖x_{t+1} − y_{t+1}‖²`.
pub fn potential_phi(t: usize, ofw: &Trace, ftrl: &Trace, eta: f64) -> Result<f64> {
    potential_family(t, ofw, ftrl, eta, 1.0 / (6.0 * eta), 0.0)
}

/// The two-parameter potential family
///
/// ```text
/// Σ_{s≤t} ⟨g_s, x_s − y_{t+1}⟩ + a‖x_{t+1} − y_{t+1}‖² + bη⟨G_t, x_{t+1} − y_{t+1}⟩
///   + (b/2)(‖x_{t+1} − x_1‖² − ‖y_{t+1} − x_1‖²) − (1/2η)‖y_{t+1} − x_1‖²
/// ```
pub fn potential_family(
    t: usize,
    ofw: &Trace,
    ftrl: &Trace,
    eta: f64,
    a: f64,
    b: f64,
) -> Result<f64> {
    check_coupled(ofw, ftrl, t)?;
    let x1 = &ofw.x[0];
    let x_next = &ofw.x[t];
    let y_next = &ftrl.x[t];
    let d = x1.len();
    let mut gsum = alloc::vec![0.0; d];
    let mut acc = 0.0;
    for s in 0..t {
        let g = &ofw.grads[s];
        acc += dot(g, &ofw.x[s]) - dot(g, y_next);
        crate::num::axpy(1.0, g, &mut gsum);
    }
    let xy = crate::num::sub(x_next, y_next);
    let xx = dist(x_next, x1);
    let yy = dist(y_next, x1);
    Ok(
        acc + a * dot(&xy, &xy) + b * eta * dot(&gsum, &xy) + 0.5 * b * (xx * xx - yy * yy)
            - yy * yy / (2.0 * eta),
    )
}

/// Parameters of the potential-based proof.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ProofParams {
    pub eta: f64,
    pub sigma: f64,
    pub a: f64,
    pub lambda_g: f64,
}

/// `η = D·3^{3/4}/(2L T^{3/4})`, `σ = min(1, √(3/T))`, `a = 1/(6η)`,
/// `λ^g = 2aσ²D²/L²`.
pub fn optimal_proof_params(horizon: usize, lipschitz: f64, diameter: f64) -> Result<ProofParams> {
    need_three(horizon)?;
    positive("L", lipschitz)?;
    positive("D", diameter)?;
    let eta = diameter * powf(3.0, 0.75) / (2.0 * lipschitz * three_quarter(horizon));
    let sigma = (sqrt(3.0) / sqrt(horizon as f64)).min(1.0);
    let a = 1.0 / (6.0 * eta);
    let lambda_g = 2.0 * a * sigma * sigma * diameter * diameter / (lipschitz * lipschitz);
    Ok(ProofParams {
        eta,
        sigma,
        a,
        lambda_g,
    })
}

/// `D²/(2η) + λ^g L² T + a σ² D² T`
pub fn regret_upper_from_proof(
    horizon: usize,
    lipschitz: f64,
    diameter: f64,
    p: &ProofParams,
) -> f64 {
    let t = horizon as f64;
    diameter * diameter / (2.0 * p.eta)
        + p.lambda_g * lipschitz * lipschitz * t
        + p.a * p.sigma * p.sigma * diameter * diameter * t
}

/// Per-step budget `λ^g L² + a σ² D²` of the potential argument.
pub fn per_step_budget(lipschitz: f64, diameter: f64, p: &ProofParams) -> f64 {
    p.lambda_g * lipschitz * lipschitz + p.a * p.sigma * p.sigma * diameter * diameter
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SosCertificate {
    pub feasible: bool,
    /// Roots of the quadratic in `λ`, intersected with `λ ≥ 0`.
    pub lambda_interval: [f64; 2],
    /// Discriminant of the exact quadratic, normalised by `(D/L)⁴`.
    pub discriminant: f64,
    /// Discriminant when the constant term keeps only its leading part `a²`.
    pub leading_order_discriminant: f64,
    /// `2aσ − 1/(4λ^g)`
    pub condition_quadratic: f64,
    /// `(2aσ − 1/(4λ^g))/η − a/(2λ^g)`
    pub condition_linear: f64,
    pub lambda: f64,
    /// Coefficient matrix of the 2×2 quadratic form at `lambda`, normalised by `D/L`.
    pub schur_matrix: [[f64; 2]; 2],
    pub schur_min_eigenvalue: f64,
}

/// Checks that the residual quadratic form of the potential step is a sum of
/// squares for some multiplier `λ ≥ 0`.
///
/// With `c = 2aσ − 1/(4λ^g)` the form has coefficient matrix
///
/// ```text
/// [ (1 + 2λ)/(2η) + a − λ²/(4λ^g)    −(a + λ/(4λ^g)) ]
/// [ −(a + λ/(4λ^g))                    c             ]
/// ```
///
/// whose determinant is the negative of
/// `(aσ/(2λ^g)) λ² − (c/η − a/(2λ^g)) λ + (1 − 2σ)a² + a/(4λ^g) − c/(2η)`.
pub fn sos_certificate(
    eta: f64,
    sigma: f64,
    a: f64,
    lambda_g: f64,
    lipschitz: f64,
    diameter: f64,
) -> Result<SosCertificate> {
    positive("eta", eta)?;
    positive("sigma", sigma)?;
    positive("lambda_g", lambda_g)?;
    positive("L", lipschitz)?;
    positive("D", diameter)?;
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a,
        });
    }
    let c1 = 2.0 * a * sigma - 1.0 / (4.0 * lambda_g);
    let lin = c1 / eta - a / (2.0 * lambda_g);
    let qa = a * sigma / (2.0 * lambda_g);
    let qc = (1.0 - 2.0 * sigma) * a * a + a / (4.0 * lambda_g) - c1 / (2.0 * eta);
    let scale = diameter / lipschitz;
    let s2 = scale * scale;
    let disc = (lin * lin - 4.0 * qa * qc) * s2 * s2;
    let lead = (lin * lin - 4.0 * qa * a * a) * s2 * s2;

    let mut interval = [f64::NAN, f64::NAN];
    let mut feasible = c1 >= 0.0 && lin >= 0.0 && disc >= 0.0 && qa > 0.0;
    if qa > 0.0 && disc >= 0.0 {
        let root = sqrt(disc) / s2;
        let lo = (lin - root) / (2.0 * qa);
        let hi = (lin + root) / (2.0 * qa);
        if hi < 0.0 {
            feasible = false;
        }
        interval = [lo.max(0.0), hi];
    }
    let lambda = if feasible {
        0.5 * (interval[0] + interval[1])
    } else {
        0.0
    };
    let off = -(a + lambda / (4.0 * lambda_g));
    let p = (1.0 + 2.0 * lambda) / (2.0 * eta) + a - lambda * lambda / (4.0 * lambda_g);
    let schur = [[p * scale, off * scale], [off * scale, c1 * scale]];
    let m = Matrix::from_fn(2, 2, |i, j| schur[i][j]);
    let min_eig = m.min_eigenvalue();
    Ok(SosCertificate {
        feasible,
        lambda_interval: interval,
        discriminant: disc,
        leading_order_discriminant: lead,
        condition_quadratic: c1,
        condition_linear: lin,
        lambda,
        schur_matrix: schur,
        schur_min_eigenvalue: min_eig,
    })
}
