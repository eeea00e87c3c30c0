//! The smooth delta-method kernel. A bump ω₀ on (1/2, 1) with unit
//! integral and an even cutoff χ on (-1/2, 1/2) generate
//!
//!   h(r, y) = Σ_{j ≥ 1} (1/(rj)) [ω₀(rj) - ω₀(|y|/(rj))],
//!
//! which acts as an approximate Dirac mass in y at scale r: its n = 0
//! moment is 1 + O(r^N) and all higher moments vanish to the same order.
//! Both index windows are finite — ω₀(rj) ≠ 0 forces j ∈ (1/(2r), 1/r)
//! and ω₀(|y|/(rj)) ≠ 0 forces j ∈ (|y|/r, 2|y|/r) — so `h_eval` is exact.
//!
//! The same bump, through divisor-sum cancellation, partitions the
//! Kronecker delta over rationals a/q; `delta_identity_check` verifies that
//! partition to roundoff.

use crate::arith;
use crate::error::{Error, Result};
use crate::quad::{panel_integrate, Kahan};
use num_complex::Complex64;

/// Normalized bump and cutoff choices plus quadrature resolution.
///
/// ω₀(t) = Z·exp(-1/((t-1/2)(1-t))) on (1/2, 1), Z fixed by unit integral;
/// χ(y) = exp(1 - 1/(1-(2y)²)) on (-1/2, 1/2), χ(0) = 1, even.
#[derive(Debug, Clone)]
pub struct KernelConfig {
    omega0_norm: f64,
    /// Gauss–Legendre panels per unit length in kernel quadratures.
    pub points_per_unit: usize,
    /// Lattice scale for the finite normalization C_L = (1/L) Σ_k ω₀(k/L).
    pub lattice_l: u32,
    c_l: f64,
}

fn omega0_raw(t: f64) -> f64 {
    if t <= 0.5 || t >= 1.0 {
        return 0.0;
    }
    (-1.0 / ((t - 0.5) * (1.0 - t))).exp()
}

/// Even cutoff, supported in (-1/2, 1/2), equal to 1 at 0.
pub fn chi(y: f64) -> f64 {
    let u = 2.0 * y;
    if u.abs() >= 1.0 {
        return 0.0;
    }
    (1.0 - 1.0 / (1.0 - u * u)).exp()
}

impl KernelConfig {
    pub fn new(lattice_l: u32, points_per_unit: usize) -> Result<Self> {
        if lattice_l < 4 {
            return Err(Error::domain("lattice scale L must be ≥ 4"));
        }
        // normalize the bump: panels fine enough that the check below is
        // a real cross-validation, not a tautology
        let raw = panel_integrate(0.5, 1.0, 64, 15, omega0_raw);
        let norm = 1.0 / raw;
        // verify against an independent resolution
        let check = panel_integrate(0.5, 1.0, 97, 11, omega0_raw) * norm;
        if (check - 1.0).abs() > 1e-10 {
            return Err(Error::Accuracy {
                what: "bump normalization".into(),
                achieved: (check - 1.0).abs(),
                requested: 1e-10,
            });
        }
        if (chi(0.0) - 1.0).abs() > 1e-15 || chi(0.5) != 0.0 || chi(-0.3) != chi(0.3) {
            return Err(Error::domain("cutoff must be even, supported in (-1/2,1/2), χ(0)=1"));
        }
        let mut cfg = Self {
            omega0_norm: norm,
            points_per_unit,
            lattice_l,
            c_l: 1.0,
        };
        let l = lattice_l as f64;
        let mut acc = Kahan::new();
        for k in 1..lattice_l {
            acc.add(cfg.omega0(k as f64 / l));
        }
        cfg.c_l = acc.value() / l;
        Ok(cfg)
    }

    /// The normalized bump ω₀.
    pub fn omega0(&self, t: f64) -> f64 {
        self.omega0_norm * omega0_raw(t)
    }

    /// C_L = (1/L) Σ_k ω₀(k/L); equals 1 up to superpolynomially small error.
    pub fn c_l(&self) -> f64 {
        self.c_l
    }
}

/// h(r, y): both j-windows evaluated exactly.
pub fn h_eval(cfg: &KernelConfig, r: f64, y: f64) -> Result<f64> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::domain(format!("h(r,y) needs r ∈ (0,1), got r={r}")));
    }
    Ok(h_eval_unchecked(cfg, r, y))
}

pub(crate) fn h_eval_unchecked(cfg: &KernelConfig, r: f64, y: f64) -> f64 {
    let ya = y.abs();
    let mut acc = 0.0;
    // ω₀(rj) ≠ 0 ⟺ 1/2 < rj < 1
    let j_lo = (0.5 / r).floor() as i64 + 1;
    let j_hi = ((1.0 / r).ceil() as i64 - 1).max(0);
    for j in j_lo..=j_hi {
        let rj = r * j as f64;
        acc += cfg.omega0(rj) / rj;
    }
    // ω₀(|y|/(rj)) ≠ 0 ⟺ |y|/r < j < 2|y|/r
    if ya > 0.0 {
        let j_lo = (ya / r).floor() as i64 + 1;
        let j_hi = ((2.0 * ya / r).ceil() as i64 - 1).max(0);
        for j in j_lo..=j_hi {
            let rj = r * j as f64;
            acc -= cfg.omega0(ya / rj) / rj;
        }
    }
    acc
}

/// h_χ(r, y) = χ(y) h(r, y) / C_L.
pub fn h_chi_eval(cfg: &KernelConfig, r: f64, y: f64) -> Result<f64> {
    Ok(chi(y) * h_eval(cfg, r, y)? / cfg.c_l())
}

/// ∫_{-a}^{a} x^n h(r, x) dx. Panels resolve the 1/r-scale structure of h;
/// node pairs ±x are summed together so odd moments vanish identically.
pub fn moment(cfg: &KernelConfig, r: f64, n: u32, a: f64) -> Result<f64> {
    if !(0.0 < r && r < a && a < 1.0) {
        return Err(Error::domain(format!(
            "moment needs 0 < r < a < 1, got r={r}, a={a}"
        )));
    }
    let panels = ((a / (0.25 * r)).ceil() as usize).max(4 * cfg.points_per_unit);
    let (xs, ws) = crate::quad::gauss_legendre(15);
    let h = a / panels as f64;
    let mut acc = Kahan::new();
    for p in 0..panels {
        let mid = p as f64 * h + 0.5 * h;
        for (x, w) in xs.iter().zip(&ws) {
            let t = mid + 0.5 * h * x;
            let hv = h_eval_unchecked(cfg, r, t);
            let sym = t.powi(n as i32) + (-t).powi(n as i32);
            acc.add(w * 0.5 * h * hv * sym);
        }
    }
    Ok(acc.value())
}

/// Fourier transform of the kernel in y at frequency s, with the cutoff
/// applied `chi_power` times:  ∫ χ^k(y) h(r,y)/C_L · e(-sy) dy.
/// `chi_power = 1` is ĥ_χ; `chi_power = 2` arises when the weight carries
/// its own χ∘Q factor. Even in y, so the result is real.
pub fn h_hat_weighted(cfg: &KernelConfig, r: f64, s: f64, chi_power: u32) -> Result<f64> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::domain("h_hat needs r ∈ (0,1)"));
    }
    // resolve both the kernel scale r and the oscillation scale 1/s
    let width = (0.25 * r).min(1.0 / (4.0 * s.abs() + 1.0)).max(1e-5);
    let panels = ((0.5 / width).ceil() as usize).max(8);
    let val = panel_integrate(0.0, 0.5, panels, 15, |y| {
        let k = chi(y).powi(chi_power as i32) * h_eval_unchecked(cfg, r, y) / cfg.c_l();
        2.0 * k * (2.0 * std::f64::consts::PI * s * y).cos()
    });
    Ok(val)
}

/// ĥ_χ(r, s) as a complex number (imaginary part identically zero).
pub fn h_hat(cfg: &KernelConfig, r: f64, s: f64) -> Result<Complex64> {
    Ok(Complex64::new(h_hat_weighted(cfg, r, s, 1)?, 0.0))
}

/// Max over n in `n_range` of | Σ_{q,a} e(-an/q)·(1/C_L)Σ_j (1/(qjL))
/// [ω₀(qj/L) - ω₀(|n|/(qjL))]  -  δ_n |.
///
/// The a-sum over residues coprime to q is the Ramanujan sum c_q(n),
/// taken in exact integer arithmetic. Terms vanish unless qj < L or
/// qj ∈ (|n|/L, 2|n|/L), so q is capped at max(L, 2·max|n|/L); truncating
/// at q ≤ L would break the identity as soon as |n| > L²/2.
pub fn delta_identity_check(
    cfg: &KernelConfig,
    l: u32,
    n_range: std::ops::RangeInclusive<i64>,
) -> Result<f64> {
    if l < 4 {
        return Err(Error::domain("delta identity needs L ≥ 4"));
    }
    let lf = l as f64;
    let n_max = n_range
        .clone()
        .into_iter()
        .map(|n| n.unsigned_abs())
        .max()
        .unwrap_or(0);
    let q_cap = (l as u64).max(2 * n_max / l as u64 + 1);
    let mut worst: f64 = 0.0;
    for n in n_range {
        let na = n.unsigned_abs();
        let mut acc = Kahan::new();
        for q in 1..=q_cap {
            let cq = arith::ramanujan_sum(q, n)? as f64;
            if cq == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            // first window: 1/2 < qj/L < 1
            let lo = (lf / (2.0 * q as f64)).floor() as i64 + 1;
            let hi = ((lf / q as f64).ceil() as i64 - 1).max(0);
            for j in lo..=hi {
                let k = q as f64 * j as f64;
                inner += cfg.omega0(k / lf) / (k * lf);
            }
            // second window: |n|/L < qj < 2|n|/L
            if na > 0 {
                let lo = (na as f64 / (lf * q as f64)).floor() as i64 + 1;
                let hi = ((2.0 * na as f64 / (lf * q as f64)).ceil() as i64 - 1).max(0);
                for j in lo..=hi {
                    let k = q as f64 * j as f64;
                    inner -= cfg.omega0(na as f64 / (k * lf)) / (k * lf);
                }
            }
            acc.add(cq * inner);
        }
        let target = if n == 0 { 1.0 } else { 0.0 };
        let defect = (acc.value() / cfg.c_l() - target).abs();
        worst = worst.max(defect);
    }
    Ok(worst)
}
