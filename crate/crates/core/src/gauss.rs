//! Closed-form Gaussian pair integrals.
//!
//! The paired quadratic form Q(z) = Σ_m z_{e,m} z_{o,m} couples coordinates
//! two at a time, so for any weight that factors into centered Gaussians per
//! pair, the twisted integral
//!
//!   v(s, ξ) = ∫ W(z) e(s Q(z)) e(-ξ·z) dz
//!
//! is a finite product of 2-d complex Gaussian integrals with an explicit
//! formula. Oscillatory integrals I_μ(r,c) then collapse to one smooth
//! 1-d integral in s against the Fourier transform of the kernel, which is
//! what makes the circle-method reconstruction and the log-correction
//! operator affordable at small r and large |c|/r.

use crate::envelope::{Envelope, EnvelopeFamily};
use crate::error::{Error, Result};
use crate::kernel::{chi, h_eval_unchecked, KernelConfig};
use crate::quad::adaptive_gk_c;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// ∫∫ exp(-π(a u² + b v² + 2c uv) + la·u + lb·v) du dv
///   = det^{-1/2} exp((b·la² + a·lb² - 2c·la·lb)/(4π det)),  det = ab - c².
///
/// Valid whenever Re of the quadratic form is positive definite; in this
/// crate a, b are real positive and Re(det) > 0 always, so the principal
/// square root is the right branch.
pub fn gauss2d(a: f64, b: f64, c: Complex64, la: Complex64, lb: Complex64) -> Complex64 {
    let det = a * b - c * c;
    debug_assert!(det.re > 0.0, "pair integral outside its validity domain");
    let num = la * la * b + lb * lb * a - la * lb * c * 2.0;
    (num / (det * 4.0 * std::f64::consts::PI)).exp() / det.sqrt()
}

/// One coordinate pair of a Gaussian weight: exponent
/// -π(a u² + b v² + 2 c0 uv) + la u + lb v, with real linear parts coming
/// from frequency shifts.
#[derive(Debug, Clone, Copy)]
pub struct PairQuad {
    pub a: f64,
    pub b: f64,
    pub c0: f64,
    pub la: f64,
    pub lb: f64,
}

/// A weight that factors over coordinate pairs as centered complex-amplitude
/// Gaussians: W(z) = prefactor · Π_m exp(-π(...) + la u + lb v).
#[derive(Debug, Clone)]
pub struct GaussianFactorization {
    pub pairs: Vec<PairQuad>,
    pub prefactor: Complex64,
}

impl GaussianFactorization {
    /// v(s, ξ) with ξ given per pair as (ξ_u, ξ_v); e(-ξ·z) contributes
    /// -2πi ξ to the linear parts.
    pub fn v_twisted(&self, s: f64, xi: &[(f64, f64)]) -> Complex64 {
        debug_assert_eq!(xi.len(), self.pairs.len());
        let mut out = self.prefactor;
        for (p, &(xu, xv)) in self.pairs.iter().zip(xi) {
            let c = Complex64::new(p.c0, -s);
            let la = Complex64::new(p.la, -2.0 * std::f64::consts::PI * xu);
            let lb = Complex64::new(p.lb, -2.0 * std::f64::consts::PI * xv);
            out *= gauss2d(p.a, p.b, c, la, lb);
        }
        out
    }

    /// v(s, 0).
    pub fn v_plain(&self, s: f64) -> Complex64 {
        let zero = vec![(0.0, 0.0); self.pairs.len()];
        self.v_twisted(s, &zero)
    }
}

/// Weights over R^d = R^{2n} used by lattice sums: either an explicit
/// axis-aligned Gaussian, or the product f1(K+z1) f̄2(K+z1+z2) f3(K+z2)
/// of three envelopes.
#[derive(Debug, Clone)]
pub enum LatticeWeight {
    ProductGaussian {
        amp: Complex64,
        /// per-coordinate widths: exp(-π Σ w_i x_i²)
        widths: Vec<f64>,
    },
    EnvelopeProduct {
        f1: Envelope,
        f2: Envelope,
        f3: Envelope,
        /// base frequency K ∈ R^n
        k: Vec<f64>,
    },
}

impl LatticeWeight {
    pub fn dim(&self) -> usize {
        match self {
            LatticeWeight::ProductGaussian { widths, .. } => widths.len(),
            LatticeWeight::EnvelopeProduct { k, .. } => 2 * k.len(),
        }
    }

    /// Plain weight value, without any cutoff factor.
    pub fn eval(&self, z: &[f64]) -> Complex64 {
        match self {
            LatticeWeight::ProductGaussian { amp, widths } => {
                let e: f64 = z
                    .iter()
                    .zip(widths)
                    .map(|(x, w)| w * x * x)
                    .sum();
                amp * (-std::f64::consts::PI * e).exp()
            }
            LatticeWeight::EnvelopeProduct { f1, f2, f3, k } => {
                let n = k.len();
                debug_assert_eq!(z.len(), 2 * n);
                let mut a1 = 0.0;
                let mut a2 = 0.0;
                let mut a3 = 0.0;
                for m in 0..n {
                    let u = k[m] + z[m];
                    let w = k[m] + z[m] + z[m + n];
                    let v = k[m] + z[m + n];
                    a1 += u * u;
                    a2 += w * w;
                    a3 += v * v;
                }
                f1.eval_radial(a1.sqrt()) * f2.eval_radial(a2.sqrt()).conj()
                    * f3.eval_radial(a3.sqrt())
            }
        }
    }

    /// Radius beyond which the weight is below `tol` in every direction.
    pub fn decay_radius(&self, tol: f64) -> f64 {
        match self {
            LatticeWeight::ProductGaussian { amp, widths } => {
                let wmin = widths.iter().cloned().fold(f64::INFINITY, f64::min);
                ((amp.norm() / tol).max(1.0).ln() / (std::f64::consts::PI * wmin)).sqrt()
            }
            LatticeWeight::EnvelopeProduct { f1, f2, f3, k } => {
                let kn = k.iter().map(|v| v * v).sum::<f64>().sqrt();
                let peak = f1.x_norm_bound() * f2.x_norm_bound() * f3.x_norm_bound();
                // each factor individually must fall below tol/peak-of-others
                let r = f1
                    .decay_radius(tol / (1.0 + f2.x_norm_bound() * f3.x_norm_bound()))
                    .max(f3.decay_radius(tol / (1.0 + f1.x_norm_bound() * f2.x_norm_bound())));
                let _ = peak;
                r + kn
            }
        }
    }

    /// The pair factorization, when every factor is a centered Gaussian.
    pub fn gaussian_factorization(&self) -> Option<GaussianFactorization> {
        match self {
            LatticeWeight::ProductGaussian { amp, widths } => {
                let d = widths.len();
                if d % 2 != 0 {
                    return None;
                }
                let half = d / 2;
                let pairs = (0..half)
                    .map(|m| PairQuad {
                        a: widths[m],
                        b: widths[m + half],
                        c0: 0.0,
                        la: 0.0,
                        lb: 0.0,
                    })
                    .collect();
                Some(GaussianFactorization {
                    pairs,
                    prefactor: *amp,
                })
            }
            LatticeWeight::EnvelopeProduct { f1, f2, f3, k } => {
                let (a1, w1) = gaussian_params(f1)?;
                let (a2, w2) = gaussian_params(f2)?;
                let (a3, w3) = gaussian_params(f3)?;
                let ksq: f64 = k.iter().map(|v| v * v).sum();
                let pairs = k
                    .iter()
                    .map(|&km| PairQuad {
                        a: w1 + w2,
                        b: w2 + w3,
                        c0: w2,
                        la: -2.0 * std::f64::consts::PI * km * (w1 + w2),
                        lb: -2.0 * std::f64::consts::PI * km * (w2 + w3),
                    })
                    .collect();
                let prefactor = a1
                    * a2.conj()
                    * a3
                    * (-std::f64::consts::PI * ksq * (w1 + w2 + w3)).exp();
                Some(GaussianFactorization { pairs, prefactor })
            }
        }
    }
}

fn gaussian_params(f: &Envelope) -> Option<(Complex64, f64)> {
    match f.family {
        EnvelopeFamily::Gaussian { amp, width } => Some((amp, width)),
        _ => None,
    }
}

/// Tabulated Fourier transform in y of χ^p(y) h(r,y) / C_L for one fixed r,
/// built by sampling the kernel on a uniform grid over its effective
/// support and transforming with a zero-padded FFT. Even in s.
#[derive(Debug, Clone)]
pub struct KernelTransform {
    pub r: f64,
    ds: f64,
    vals: Vec<f64>,
    s_max: f64,
}

impl KernelTransform {
    pub fn build(cfg: &KernelConfig, r: f64, chi_power: u32) -> Result<Self> {
        if !(0.0 < r && r < 1.0) {
            return Err(Error::domain("kernel transform needs r ∈ (0,1)"));
        }
        // effective support of h(r,·): beyond a modest multiple of r both
        // divisor windows average out and h is superpolynomially small;
        // extend adaptively until probes confirm it
        let mut y_sup = (80.0 * r).min(0.5);
        while y_sup < 0.5 {
            let tiny = (1..=5).all(|i| {
                let y = y_sup * (1.0 + 0.1 * i as f64);
                h_eval_unchecked(cfg, r, y.min(0.499_999)).abs() < 1e-15 / r
            });
            if tiny {
                break;
            }
            y_sup = (y_sup * 1.3).min(0.5);
        }
        let kval = |y: f64| -> f64 {
            if y >= 0.5 {
                0.0
            } else {
                chi(y).powi(chi_power as i32) * h_eval_unchecked(cfg, r, y) / cfg.c_l()
            }
        };
        // sample on [0, 2Y) with even symmetry; dy resolves the r-scale
        let dy_target = (r / 64.0).min(y_sup / 2048.0);
        let half = ((y_sup / dy_target).ceil() as usize).next_power_of_two().min(1 << 17);
        let dy = y_sup / half as f64;
        let base = 2 * half;
        // transform length: fine enough s-spacing for cubic interpolation
        let ds_target = 0.0127 / y_sup;
        let flen = ((1.0 / (ds_target * dy)).ceil() as usize)
            .next_power_of_two()
            .max(8 * base)
            .min(1 << 22);
        let mut buf = vec![Complex64::new(0.0, 0.0); flen];
        for j in 0..=half {
            let v = kval(j as f64 * dy);
            buf[j] = Complex64::new(v, 0.0);
            if j > 0 && j < base {
                buf[flen - j] = Complex64::new(v, 0.0);
            }
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(flen);
        fft.process(&mut buf);
        let ds = 1.0 / (flen as f64 * dy);
        // keep values out to where the transform has decayed for good
        let floor = 1e-14 * (buf[0].re * dy).abs().max(1.0);
        let mut keep = flen / 2;
        let mut run = 0usize;
        let run_needed = ((1.0 / (y_sup * ds)).ceil() as usize).max(1024);
        for j in 0..flen / 2 {
            if buf[j].re.abs() * dy < floor {
                run += 1;
                if run > run_needed {
                    keep = j + 1;
                    break;
                }
            } else {
                run = 0;
            }
        }
        let vals: Vec<f64> = buf[..keep].iter().map(|z| z.re * dy).collect();
        let s_max = (keep - 1) as f64 * ds;
        Ok(Self { r, ds, vals, s_max })
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// ĥ(s) by cubic interpolation of the table; 0 beyond the stored range.
    pub fn eval(&self, s: f64) -> f64 {
        let sa = s.abs();
        if sa >= self.s_max {
            return 0.0;
        }
        let t = sa / self.ds;
        let i = (t.floor() as usize).min(self.vals.len() - 2);
        let frac = t - i as f64;
        let vm = self.vals[i.saturating_sub(1)];
        let v0 = self.vals[i];
        let v1 = self.vals[i + 1];
        let vp = self.vals[(i + 2).min(self.vals.len() - 1)];
        let a = 0.5 * (v1 - vm);
        let b = vm - 2.5 * v0 + 2.0 * v1 - 0.5 * vp;
        let c = 0.5 * (vp - vm) + 1.5 * (v0 - v1);
        v0 + (a + (b + c * frac) * frac) * frac
    }
}

/// I_μ(r, c) = ∫ ĥ(r,s) e(-sμ) v(s, -c/r) ds for a pair-Gaussian weight,
/// where ĥ is the χ²-weighted kernel transform (the weight carries one χ∘Q
/// and the kernel the other). Splits [0, s_max] into octaves and integrates
/// each adaptively; the negative half is folded in by symmetry when the
/// integrand allows, otherwise integrated explicitly.
pub fn i_mu_gaussian(
    kt: &KernelTransform,
    fac: &GaussianFactorization,
    mu: f64,
    c: &[i64],
    abs_tol: f64,
) -> Complex64 {
    let half = fac.pairs.len();
    debug_assert_eq!(c.len(), 2 * half);
    let xi: Vec<(f64, f64)> = (0..half)
        .map(|m| (c[m] as f64 / kt.r, c[m + half] as f64 / kt.r))
        .collect();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut integrand = |s: f64| -> Complex64 {
        let k = kt.eval(s);
        if k == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let phase = Complex64::new(0.0, -two_pi * s * mu).exp();
        fac.v_twisted(s, &xi) * k * phase
    };
    let s_max = kt.s_max();
    let mut total = Complex64::new(0.0, 0.0);
    let mut lo = 0.0f64;
    let mut hi = 1.0f64.min(s_max);
    loop {
        let (v1, _) = adaptive_gk_c(lo, hi, abs_tol * 0.1, 28, &mut integrand);
        let (v2, _) = adaptive_gk_c(-hi, -lo, abs_tol * 0.1, 28, &mut integrand);
        total += v1 + v2;
        if hi >= s_max {
            break;
        }
        lo = hi;
        hi = (hi * 2.0).min(s_max);
    }
    total
}

/// ∫ v(s, 0) ds — the level-zero integral ∫ δ(Q(z)) W(z) dz for a
/// pair-Gaussian weight, with Richardson extrapolation of the
/// algebraically decaying tail.
pub fn delta_integral_gaussian(fac: &GaussianFactorization, abs_tol: f64) -> Complex64 {
    level_integral_gaussian(fac, 0.0, abs_tol)
}

/// ∫ e(-sρ) v(s, 0) ds = ∫ δ(Q(z) - ρ) W(z) dz.
pub fn level_integral_gaussian(
    fac: &GaussianFactorization,
    rho: f64,
    abs_tol: f64,
) -> Complex64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut integrand = |s: f64| -> Complex64 {
        fac.v_plain(s) * Complex64::new(0.0, -two_pi * s * rho).exp()
    };
    fn run<F: FnMut(f64) -> Complex64>(s_cap: f64, abs_tol: f64, f: &mut F) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        while lo < s_cap {
            let (v1, _) = adaptive_gk_c(lo, hi.min(s_cap), abs_tol * 0.05, 24, f);
            let (v2, _) = adaptive_gk_c(-hi.min(s_cap), -lo, abs_tol * 0.05, 24, f);
            total += v1 + v2;
            lo = hi;
            hi *= 2.0;
        }
        total
    }
    // v decays like |s|^{-#pairs}; one Richardson step removes the 1/S term
    let s1 = 4096.0;
    let i1 = run(s1, abs_tol, &mut integrand);
    let i2 = run(2.0 * s1, abs_tol, &mut integrand);
    let npairs = fac.pairs.len() as i32;
    if npairs >= 3 {
        i2
    } else {
        // tail ~ α/S: I∞ ≈ 2 I(2S) - I(S)
        i2 * 2.0 - i1
    }
}
