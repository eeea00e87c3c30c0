//! Smooth decaying profiles on R^n with a declared decay exponent ℓ and
//! smoothness order N (the weighted-sup topology ‖⟨x⟩^ℓ f‖_∞ and its
//! derivative refinements). Three families: Gaussians, rational decay
//! profiles, and tabulated radial profiles with cubic interpolation.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub enum EnvelopeFamily {
    /// amp · exp(-π width |x|²)
    Gaussian { amp: Complex64, width: f64 },
    /// amp · ⟨x⟩^{-ell}
    Rational { amp: Complex64 },
    /// radial samples on a uniform grid [0, r_max], cubic interpolation,
    /// zero beyond r_max
    Tabulated {
        values: Arc<Vec<Complex64>>,
        r_max: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Envelope {
    pub family: EnvelopeFamily,
    /// declared decay exponent ℓ
    pub ell: f64,
    /// declared smoothness order N
    pub smoothness: u32,
    /// declared bound B with |f(x)| ≤ B⟨x⟩^{-ℓ}
    pub bound: f64,
}

fn japanese_bracket(r2: f64) -> f64 {
    (1.0 + r2).sqrt()
}

impl Envelope {
    pub fn gaussian(amp: Complex64, width: f64, ell: f64, smoothness: u32) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::domain("gaussian width must be positive"));
        }
        // B = max ⟨x⟩^ℓ |amp| e^{-πw|x|²}, attained at |x|² = ℓ/(2πw) - 1 (or 0)
        let r2 = (ell / (2.0 * std::f64::consts::PI * width) - 1.0).max(0.0);
        let bound =
            amp.norm() * japanese_bracket(r2).powf(ell) * (-std::f64::consts::PI * width * r2).exp();
        let env = Self {
            family: EnvelopeFamily::Gaussian { amp, width },
            ell,
            smoothness,
            bound: bound * (1.0 + 1e-12),
        };
        env.spot_check_decay()?;
        Ok(env)
    }

    pub fn rational(amp: Complex64, ell: f64, smoothness: u32) -> Result<Self> {
        if ell <= 0.0 {
            return Err(Error::domain("rational profile needs ℓ > 0"));
        }
        let env = Self {
            family: EnvelopeFamily::Rational { amp },
            ell,
            smoothness,
            bound: amp.norm() * (1.0 + 1e-12),
        };
        env.spot_check_decay()?;
        Ok(env)
    }

    pub fn tabulated(
        values: Vec<Complex64>,
        r_max: f64,
        ell: f64,
        smoothness: u32,
    ) -> Result<Self> {
        if values.len() < 4 || r_max <= 0.0 {
            return Err(Error::domain("tabulated profile needs ≥ 4 samples and r_max > 0"));
        }
        let bound = values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let r = r_max * i as f64 / (values.len() - 1) as f64;
                v.norm() * japanese_bracket(r * r).powf(ell)
            })
            .fold(0.0_f64, f64::max);
        Ok(Self {
            family: EnvelopeFamily::Tabulated {
                values: Arc::new(values),
                r_max,
            },
            ell,
            smoothness,
            bound: bound * (1.0 + 1e-12),
        })
    }

    /// |f(x)| ≤ bound·⟨x⟩^{-ℓ} sampled on a radial grid.
    fn spot_check_decay(&self) -> Result<()> {
        for i in 0..64 {
            let r = i as f64 * 0.25;
            let v = self.eval_radial(r).norm();
            let cap = self.bound * japanese_bracket(r * r).powf(-self.ell);
            if v > cap * (1.0 + 1e-9) {
                return Err(Error::domain(format!(
                    "declared decay violated at |x| = {r}: {v} > {cap}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.family, EnvelopeFamily::Gaussian { .. })
    }

    /// All families here are radial.
    pub fn eval_radial(&self, r: f64) -> Complex64 {
        match &self.family {
            EnvelopeFamily::Gaussian { amp, width } => {
                amp * (-std::f64::consts::PI * width * r * r).exp()
            }
            EnvelopeFamily::Rational { amp } => {
                amp * japanese_bracket(r * r).powf(-self.ell)
            }
            EnvelopeFamily::Tabulated { values, r_max } => {
                if r >= *r_max || r < 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let n = values.len();
                let t = r / r_max * (n - 1) as f64;
                let i = (t.floor() as usize).min(n - 2);
                let frac = t - i as f64;
                // Catmull-Rom with clamped ends
                let vm = values[i.saturating_sub(1)];
                let v0 = values[i];
                let v1 = values[i + 1];
                let vp = values[(i + 2).min(n - 1)];
                let a = (v1 - vm) * 0.5;
                let b = vm - v0 * 2.5 + v1 * 2.0 - vp * 0.5;
                let c = (vp - vm) * 0.5 + (v0 - v1) * 1.5;
                v0 + (a + (b + c * frac) * frac) * frac
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.eval_radial(r2.sqrt())
    }

    /// Radius beyond which |f| < tol, from the family's actual decay law
    /// (not the declared ℓ, which for Gaussians is massively pessimistic).
    pub fn decay_radius(&self, tol: f64) -> f64 {
        let a = self.bound.max(1e-300);
        match &self.family {
            EnvelopeFamily::Gaussian { amp, width } => {
                let t = (amp.norm() / tol).max(1.0).ln() / (std::f64::consts::PI * width);
                t.sqrt()
            }
            EnvelopeFamily::Rational { .. } => (a / tol).powf(1.0 / self.ell),
            EnvelopeFamily::Tabulated { r_max, .. } => *r_max,
        }
    }

    /// ‖f‖ in the ⟨x⟩^ℓ-weighted sup norm, from the declared bound.
    pub fn x_norm_bound(&self) -> f64 {
        self.bound
    }
}

/// max_K ⟨K⟩^ℓ |a_K - b_K| over paired samples: the lattice weighted-sup
/// defect used by all convergence reports.
pub fn x_ell_defect(ell: f64, pairs: impl Iterator<Item = (f64, Complex64, Complex64)>) -> f64 {
    pairs
        .map(|(k2, a, b)| japanese_bracket(k2).powf(ell) * (a - b).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_decay_radius() {
        let g = Envelope::gaussian(Complex64::new(1.0, 0.0), 1.0, 8.0, 5).unwrap();
        let r = g.decay_radius(1e-9);
        assert!(g.eval_radial(r).norm() <= 1.1e-9);
        assert!(g.eval_radial(r * 0.9).norm() > 1e-9);
    }

    #[test]
    fn tabulated_interpolation_matches_samples() {
        let n = 257;
        let r_max = 8.0;
        let vals: Vec<Complex64> = (0..n)
            .map(|i| {
                let r = r_max * i as f64 / (n - 1) as f64;
                Complex64::new((-r * r).exp(), 0.0)
            })
            .collect();
        let env = Envelope::tabulated(vals, r_max, 6.0, 3).unwrap();
        for i in 0..200 {
            let r = 0.03 * i as f64;
            let want = (-r * r).exp();
            let got = env.eval_radial(r).re;
            assert!((got - want).abs() < 5e-6, "r={r}: {got} vs {want}");
        }
    }

    #[test]
    fn decay_spot_check_rejects_lies() {
        // a Gaussian whose declared bound is too small must be rejected
        let r2 = (8.0 / (2.0 * std::f64::consts::PI) - 1.0).max(0.0);
        let honest = japanese_bracket(r2).powf(8.0) * (-std::f64::consts::PI * r2).exp();
        let env = Envelope {
            family: EnvelopeFamily::Gaussian {
                amp: Complex64::new(1.0, 0.0),
                width: 1.0,
            },
            ell: 8.0,
            smoothness: 3,
            bound: honest * 0.5,
        };
        assert!(env.spot_check_decay().is_err());
    }
}
