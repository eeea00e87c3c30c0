//! Oscillatory archimedean integrals I_μ(r,c) and the reconstruction of
//! weighted lattice sums from them.
//!
//! `oscillatory_i` is the generic route: tensor-product Gauss–Legendre
//! panels with per-axis resolution tied to the oscillation wavelength
//! r/|c_j|, guarded by a hard node budget. `reconstruct` prefers the
//! closed-form pair-Gaussian route from [`crate::gauss`] when the weight
//! admits it, which is what makes summing over thousands of (q, c) pairs
//! practical; the two routes are cross-checked in tests and by the
//! Monte-Carlo oracle.

use crate::arith;
use crate::error::{Error, Result};
use crate::gauss::{i_mu_gaussian, KernelTransform, LatticeWeight};
use crate::kernel::{chi, h_chi_eval, KernelConfig};
use crate::quad::gauss_legendre;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Hard ceiling on tensor-quadrature nodes.
pub const NODE_BUDGET: f64 = 1e9;

/// Paired quadratic form Q(x) = Σ_m x_m x_{m+d/2} on R^d.
pub fn paired_form(x: &[f64]) -> f64 {
    let half = x.len() / 2;
    (0..half).map(|m| x[m] * x[m + half]).sum()
}

fn paired_form_int(z: &[i64]) -> i64 {
    let half = z.len() / 2;
    (0..half).map(|m| z[m] * z[m + half]).sum()
}

/// I_μ(r, c) = ∫ W(x) χ(Q_μ(x)) h_χ(r, Q_μ(x)) e(-c·x/r) dx by tensor
/// Gauss–Legendre panels; the panel width on axis j resolves both the
/// weight and the oscillation scale r/(4|c_j|+1).
pub fn oscillatory_i(
    cfg: &KernelConfig,
    weight: &LatticeWeight,
    mu: f64,
    r: f64,
    c: &[i64],
    points_per_panel: usize,
) -> Result<Complex64> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::domain("oscillatory integral needs r ∈ (0,1)"));
    }
    let d = weight.dim();
    if c.len() != d {
        return Err(Error::domain("c must have the weight's dimension"));
    }
    let radius = weight.decay_radius(1e-12);
    let order = points_per_panel.max(3);
    // per-axis nodes
    let mut axes: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(d);
    let mut total_nodes = 1.0f64;
    for &cj in c {
        let width = (r / (4.0 * cj.abs() as f64 + 1.0)).min(0.5);
        let panels = ((2.0 * radius / width).ceil() as usize).max(2);
        total_nodes *= (panels * order) as f64;
        let (xs, ws) = gauss_legendre(order);
        let h = 2.0 * radius / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut wts = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = -radius + (p as f64 + 0.5) * h;
            for (x, w) in xs.iter().zip(&ws) {
                nodes.push(mid + 0.5 * h * x);
                wts.push(w * 0.5 * h);
            }
        }
        axes.push((nodes, wts));
    }
    if total_nodes > NODE_BUDGET {
        return Err(Error::Budget {
            what: format!("tensor quadrature for I(r={r}, c={c:?})"),
            estimate: total_nodes,
            limit: NODE_BUDGET,
        });
    }
    // iterate the tensor grid; parallelize over the first axis
    let two_pi = 2.0 * std::f64::consts::PI;
    let c_f: Vec<f64> = c.iter().map(|&v| v as f64 / r).collect();
    let sum = axes[0]
        .0
        .par_iter()
        .zip(axes[0].1.par_iter())
        .map(|(&x0, &w0)| {
            let mut x = vec![0.0; d];
            let mut idx = vec![0usize; d];
            x[0] = x0;
            let mut acc = Complex64::new(0.0, 0.0);
            loop {
                for j in 1..d {
                    x[j] = axes[j].0[idx[j]];
                }
                let mut w = w0;
                for j in 1..d {
                    w *= axes[j].1[idx[j]];
                }
                let q = paired_form(&x) - mu;
                let hval = chi(q) * h_chi_eval(cfg, r, q).unwrap_or(0.0);
                if hval != 0.0 {
                    let wv = weight.eval(&x);
                    if wv.norm_sqr() > 1e-300 {
                        let phase: f64 = x.iter().zip(&c_f).map(|(a, b)| a * b).sum();
                        acc += wv * hval * w * Complex64::new(0.0, -two_pi * phase).exp();
                    }
                }
                // odometer over axes 1..d
                let mut j = 1;
                while j < d {
                    idx[j] += 1;
                    if idx[j] < axes[j].0.len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == d {
                    break;
                }
            }
            acc
        })
        .reduce(|| Complex64::new(0.0, 0.0), |a, b| a + b);
    Ok(sum)
}

/// Monte-Carlo estimate of I_μ(r,c) with a Gaussian proposal, used as an
/// independent oracle. Returns (estimate, standard error).
pub fn oscillatory_i_monte_carlo(
    cfg: &KernelConfig,
    weight: &LatticeWeight,
    mu: f64,
    r: f64,
    c: &[i64],
    samples: usize,
    seed: u64,
) -> (Complex64, f64) {
    let d = weight.dim();
    let radius = weight.decay_radius(1e-10);
    let sigma = radius / 2.5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_pi = 2.0 * std::f64::consts::PI;
    let norm = (two_pi / 2.0 * sigma * sigma * 2.0).powf(d as f64 / 2.0); // (2πσ²)^{d/2}
    let mut mean = Complex64::new(0.0, 0.0);
    let mut m2 = 0.0f64;
    let mut x = vec![0.0f64; d];
    for i in 0..samples {
        for xj in x.iter_mut() {
            // Box-Muller
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            *xj = sigma * (-2.0 * u1.ln()).sqrt() * (two_pi * u2).cos();
        }
        let q = paired_form(&x) - mu;
        let kern = chi(q) * h_chi_eval(cfg, r, q).unwrap_or(0.0);
        let val = if kern == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            let pdf_exp: f64 = x.iter().map(|v| v * v).sum::<f64>() / (2.0 * sigma * sigma);
            let phase: f64 = x.iter().zip(c).map(|(a, &b)| a * b as f64 / r).sum();
            weight.eval(&x)
                * kern
                * norm
                * pdf_exp.exp()
                * Complex64::new(0.0, -two_pi * phase).exp()
        };
        let delta = val - mean;
        mean += delta / (i as f64 + 1.0);
        m2 += delta.norm_sqr() * (1.0 - 1.0 / (i as f64 + 1.0));
    }
    let var = m2 / (samples as f64 - 1.0);
    (mean, (var / samples as f64).sqrt())
}

/// Parameters of a lattice level-set sum Σ_{Q(z)=μ̃} W(z/L) over z ∈ Z^d.
#[derive(Debug, Clone, Copy)]
pub struct LevelSetSpec {
    pub d: usize,
    pub l: u32,
    pub mu_tilde: i64,
}

/// Exhaustive evaluation of Σ_{Q(z) = μ̃, |z|_∞ ≤ radius} W(z/L) for d = 4.
/// Loops (z1, z3, z2) and solves z2·z4 = μ̃ - z1·z3 for z4, which visits
/// exactly the solution set; `lattice_level_sum_naive` is the 4-fold loop
/// it is checked against.
pub fn lattice_level_sum(spec: LevelSetSpec, weight: &LatticeWeight, radius: i64) -> Complex64 {
    assert_eq!(spec.d, 4, "structured enumeration is d = 4 only");
    let l = spec.l as f64;
    let acc = (-radius..=radius)
        .into_par_iter()
        .map(|z1| {
            let mut local = Complex64::new(0.0, 0.0);
            for z3 in -radius..=radius {
                let t = spec.mu_tilde - z1 * z3;
                // z2 = 0 plane: need t = 0, any z4
                if t == 0 {
                    for z4 in -radius..=radius {
                        let zf = [z1 as f64 / l, 0.0, z3 as f64 / l, z4 as f64 / l];
                        local += weight.eval(&zf);
                    }
                }
                for z2 in 1..=radius {
                    if t % z2 == 0 {
                        let z4 = t / z2;
                        if z4.abs() <= radius {
                            let mut zf =
                                [z1 as f64 / l, z2 as f64 / l, z3 as f64 / l, z4 as f64 / l];
                            local += weight.eval(&zf);
                            zf[1] = -zf[1];
                            zf[3] = -zf[3];
                            local += weight.eval(&zf);
                        }
                    }
                }
            }
            local
        })
        .reduce(|| Complex64::new(0.0, 0.0), |a, b| a + b);
    acc
}

/// Plain 4-fold loop, tiny radii only; oracle for `lattice_level_sum`.
pub fn lattice_level_sum_naive(
    spec: LevelSetSpec,
    weight: &LatticeWeight,
    radius: i64,
) -> Complex64 {
    let l = spec.l as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut z = [0i64; 4];
    let rr = -radius..=radius;
    for z0 in rr.clone() {
        z[0] = z0;
        for z1 in rr.clone() {
            z[1] = z1;
            for z2 in rr.clone() {
                z[2] = z2;
                for z3 in rr.clone() {
                    z[3] = z3;
                    if paired_form_int(&z) == spec.mu_tilde {
                        let zf: Vec<f64> = z.iter().map(|&v| v as f64 / l).collect();
                        acc += weight.eval(&zf);
                    }
                }
            }
        }
    }
    acc
}

/// One (q, |c|-shell) row of reconstruction diagnostics.
#[derive(Debug, Clone)]
pub struct ReconstructionRow {
    pub q: u64,
    pub c: Vec<i64>,
    pub s_abs: f64,
    pub i_abs: f64,
    pub partial: Complex64,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub value: Complex64,
    pub rows: Vec<ReconstructionRow>,
    /// magnitude of the last c-shell processed, per q, as a convergence flag
    pub tail_estimate: f64,
    pub converged: bool,
}

/// Circle-method evaluation of Σ_{Q(z)=μ̃} W(z/L):
///   (L^{d-2}/C_L) Σ_{q ≤ q_max} Σ_{|c|_∞ ≤ c_max} S_{μ̃}(q,c) q^{-d} I_μ(r,c).
/// Requires a pair-Gaussian weight (the generic tensor route cannot cover
/// the full (q, c) range at any sane budget; see `oscillatory_i` for the
/// cross-checked generic evaluator).
pub fn reconstruct(
    cfg: &KernelConfig,
    weight: &LatticeWeight,
    spec: LevelSetSpec,
    q_max: u64,
    c_max: i64,
    rel_tol: f64,
) -> Result<Reconstruction> {
    let d = spec.d;
    let fac = weight.gaussian_factorization().ok_or_else(|| {
        Error::domain("reconstruction requires a pair-Gaussian weight")
    })?;
    let l = spec.l as f64;
    let mu = spec.mu_tilde as f64 / (l * l);
    let q_cap = q_max.min(spec.l as u64 - 1); // r = q/L ≥ 1 contributes nothing
    if q_cap > arith::BRUTE_Q_CEILING {
        return Err(Error::Budget {
            what: format!("arithmetic factors S(q,c) up to q = {q_cap}"),
            estimate: q_cap as f64,
            limit: arith::BRUTE_Q_CEILING as f64,
        });
    }
    let mut rows: Vec<ReconstructionRow> = Vec::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut tail = 0.0f64;
    for q in 1..=q_cap {
        let r = q as f64 / l;
        let kt = KernelTransform::build(cfg, r, 2)?;
        // the per-pair Gaussian decay in c: beyond a few units of r·width
        // the factor is below any tolerance; shells are cut when their
        // total contribution falls under rel_tol/q²
        let mut shell_mags: Vec<f64> = Vec::new();
        let mut q_total = Complex64::new(0.0, 0.0);
        let mut small_shells = 0u32;
        for shell in 0..=c_max {
            let cs = enumerate_shell(d, shell);
            let shell_sum: Vec<(Vec<i64>, Complex64, f64)> = cs
                .par_iter()
                .map(|c| {
                    let s = arith::s_qc_brute(q, c, spec.mu_tilde, d as u32)
                        .expect("q below brute ceiling");
                    if s == 0 {
                        return (c.clone(), Complex64::new(0.0, 0.0), 0.0);
                    }
                    let i_val = i_mu_gaussian(&kt, &fac, mu, c, 1e-11);
                    let term = i_val * (s as f64) / (q as f64).powi(d as i32);
                    (c.clone(), term, i_val.norm())
                })
                .collect();
            let mag: f64 = shell_sum.iter().map(|(_, t, _)| t.norm()).sum();
            shell_mags.push(mag);
            for (c, term, i_abs) in shell_sum {
                q_total += term;
                if rows.len() < 4096 {
                    let s_abs = arith::s_qc_brute(q, &c, spec.mu_tilde, d as u32).unwrap_or(0);
                    rows.push(ReconstructionRow {
                        q,
                        c,
                        s_abs: (s_abs as f64).abs(),
                        i_abs,
                        partial: total + q_total,
                    });
                }
            }
            if shell >= 1 && mag < rel_tol * q_total.norm().max(1e-12) / 8.0 {
                small_shells += 1;
                if small_shells >= 2 {
                    break;
                }
            } else {
                small_shells = 0;
            }
        }
        tail += shell_mags.last().copied().unwrap_or(0.0);
        total += q_total;
    }
    let scale = l.powi(d as i32 - 2) / cfg.c_l();
    let value = total * scale;
    let tail_abs = tail * scale;
    Ok(Reconstruction {
        value,
        rows,
        tail_estimate: tail_abs,
        converged: tail_abs <= rel_tol * value.norm().max(1e-12),
    })
}

/// All c ∈ Z^d with |c|_∞ = shell.
pub fn enumerate_shell(d: usize, shell: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut c = vec![-shell; d];
    loop {
        if c.iter().any(|v| v.abs() == shell) {
            out.push(c.clone());
        }
        let mut j = 0;
        while j < d {
            c[j] += 1;
            if c[j] <= shell {
                break;
            }
            c[j] = -shell;
            j += 1;
        }
        if j == d {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> KernelConfig {
        KernelConfig::new(16, 8).unwrap()
    }

    fn gaussian_weight() -> LatticeWeight {
        LatticeWeight::ProductGaussian {
            amp: Complex64::new(1.0, 0.0),
            widths: vec![1.0, 0.8, 1.2, 0.9],
        }
    }

    #[test]
    fn zero_weight_integrates_to_zero() {
        let w = LatticeWeight::ProductGaussian {
            amp: Complex64::new(0.0, 0.0),
            widths: vec![1.0; 4],
        };
        let v = oscillatory_i(&cfg(), &w, 0.0, 0.3, &[0, 0, 0, 0], 4).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn tensor_route_matches_gaussian_route() {
        let c = cfg();
        let w = gaussian_weight();
        let fac = w.gaussian_factorization().unwrap();
        for (r, cvec, mu) in [
            (0.45, [0i64, 0, 0, 0], 0.0),
            (0.5, [1, 0, 0, 0], 0.0),
            (0.55, [0, -1, 0, 0], 0.125),
        ] {
            let kt = KernelTransform::build(&c, r, 2).unwrap();
            let fast = i_mu_gaussian(&kt, &fac, mu, &cvec, 1e-10);
            let tensor = oscillatory_i(&c, &w, mu, r, &cvec, 5).unwrap();
            assert!(
                (fast - tensor).norm() < 2e-5 * (1.0 + fast.norm()),
                "r={r}, c={cvec:?}: gaussian {fast} vs tensor {tensor}"
            );
        }
    }

    #[test]
    fn tensor_route_matches_monte_carlo() {
        let c = cfg();
        let w = gaussian_weight();
        let seed = 7191u64;
        println!("monte-carlo oracle seed = {seed}");
        let (mc, se) = oscillatory_i_monte_carlo(&c, &w, 0.0, 0.6, &[1, 0, 0, 0], 400_000, seed);
        let det = oscillatory_i(&c, &w, 0.0, 0.6, &[1, 0, 0, 0], 5).unwrap();
        assert!(
            (mc - det).norm() < 3.0 * se + 1e-9,
            "MC {mc} ± {se} vs deterministic {det}"
        );
    }

    #[test]
    fn budget_guard_trips() {
        let w = gaussian_weight();
        let e = oscillatory_i(&cfg(), &w, 0.0, 0.01, &[40, 40, 40, 40], 6);
        assert!(matches!(e, Err(Error::Budget { .. })));
    }

    #[test]
    fn structured_lattice_enumeration_matches_naive() {
        let w = gaussian_weight();
        for mu in [0i64, 2, -3] {
            let spec = LevelSetSpec {
                d: 4,
                l: 4,
                mu_tilde: mu,
            };
            let a = lattice_level_sum(spec, &w, 9);
            let b = lattice_level_sum_naive(spec, &w, 9);
            assert!((a - b).norm() < 1e-12, "mu={mu}: {a} vs {b}");
        }
    }

    #[test]
    fn reconstruction_matches_direct_sum_small() {
        let c = cfg();
        let w = gaussian_weight();
        let spec = LevelSetSpec {
            d: 4,
            l: 4,
            mu_tilde: 0,
        };
        let direct = lattice_level_sum(spec, &w, 32);
        let rec = reconstruct(&c, &w, spec, 3, 6, 1e-3).unwrap();
        let rel = (rec.value - direct).norm() / direct.norm();
        assert!(
            rel < 0.01,
            "reconstruction {} vs direct {} (rel {rel})",
            rec.value,
            direct
        );
    }
}
