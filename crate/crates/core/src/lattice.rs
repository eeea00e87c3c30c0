//! Enumeration of the resonant set on (Z/L)^n in integer coordinates and
//! the weighted sums over it.
//!
//! With shifted integer coordinates m₁' = L(K₁-K), m₂' = L(K₃-K), the
//! constraints "frequencies telescope to zero" and "squared frequencies
//! telescope to μ" become a single Diophantine equation m₁'·m₂' = ν with
//! ν = -μ̃/2. Enumeration is slice-by-slice: each m₁' ≠ 0 determines an
//! affine sublattice of solutions m₂' (solvable iff gcd(m₁') | ν), which is
//! intersected with the truncation box exactly in integer arithmetic. All
//! lattice work stays in integers; floats appear only at envelope
//! evaluation.

use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::zeta::{constants, zeta};
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::{Read, Write};

/// A lattice frequency K = m/L held in integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreqVec {
    pub m: Vec<i64>,
    pub l: u32,
}

impl FreqVec {
    pub fn new(m: Vec<i64>, l: u32) -> Self {
        Self { m, l }
    }

    pub fn value(&self) -> Vec<f64> {
        self.m.iter().map(|&v| v as f64 / self.l as f64).collect()
    }
}

/// Dimension, nonlinearity half-degree, lattice scale, resonance level and
/// truncation radius for one enumeration problem. `r_int = 0` lets the
/// weighted-sum operations pick the radius from their tail tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSpec {
    pub n: usize,
    pub p: usize,
    pub l: u32,
    /// μ̃ = μL²; for p = 1 it must be even (Ω·L² = -2 m₁'·m₂')
    pub mu_tilde: i64,
    pub r_int: i64,
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n * self.p < 2 {
            return Err(Error::domain(format!(
                "need n·p ≥ 2, got n={}, p={}",
                self.n, self.p
            )));
        }
        if self.mu_tilde % 2 != 0 {
            return Err(Error::domain(
                "μ̃ must be even in shifted coordinates (μ̃ = -2ν)",
            ));
        }
        if self.l == 0 {
            return Err(Error::domain("need positive L"));
        }
        Ok(())
    }

    /// ν = -μ̃/2, the level of the pairing form on shifted coordinates.
    pub fn nu(&self) -> i64 {
        -self.mu_tilde / 2
    }
}

/// Enumerated solution set for one base frequency: flat rows [m₁'; m₂']
/// (or [J₁..J₄] for the quintic case) of width 2·p·n, lexicographic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResonantIndex {
    pub n: usize,
    pub p: usize,
    pub l: u32,
    pub nu: i64,
    pub r_int: i64,
    pub base: Vec<i64>,
    pub tuples: Vec<i64>,
}

impl ResonantIndex {
    pub fn width(&self) -> usize {
        2 * self.p * self.n
    }

    pub fn count(&self) -> usize {
        if self.tuples.is_empty() {
            0
        } else {
            self.tuples.len() / self.width()
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i64]> {
        let w = self.width().max(1);
        self.tuples.chunks(w)
    }

    /// Every stored tuple satisfies its Diophantine equation exactly.
    pub fn verify_exact(&self) -> bool {
        let half = self.p * self.n;
        self.rows().all(|row| {
            let dot: i64 = (0..half).map(|i| row[i] * row[half + i]).sum();
            dot == self.nu
        })
    }

    /// Binary layout: header (n, p, L, ν, R_int, count) then the tuples,
    /// all little-endian 64-bit integers.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        for v in [
            self.n as i64,
            self.p as i64,
            self.l as i64,
            self.nu,
            self.r_int,
            self.count() as i64,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.tuples {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = [0u8; 8];
        let mut head = [0i64; 6];
        for h in head.iter_mut() {
            r.read_exact(&mut buf)?;
            *h = i64::from_le_bytes(buf);
        }
        let (n, p, l, nu, r_int, count) = (
            head[0] as usize,
            head[1] as usize,
            head[2] as u32,
            head[3],
            head[4],
            head[5] as usize,
        );
        if n == 0 || p == 0 || n > 8 {
            return Err(Error::domain("corrupt index header"));
        }
        let mut tuples = vec![0i64; count * 2 * p * n];
        for v in tuples.iter_mut() {
            r.read_exact(&mut buf)?;
            *v = i64::from_le_bytes(buf);
        }
        Ok(Self {
            n,
            p,
            l,
            nu,
            r_int,
            base: vec![0; n],
            tuples,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# n={} p={} L={} nu={} r_int={} count={}",
            self.n,
            self.p,
            self.l,
            self.nu,
            self.r_int,
            self.count()
        )?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: (g, x, y) with a·x + b·y = g = gcd(a,b) ≥ 0.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

#[inline]
fn div_floor(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

#[inline]
fn div_ceil_i(a: i64, b: i64) -> i64 {
    -(-a).div_euclid(b)
}

/// Integer t-range with |c0 + t·d| ≤ r, for d ≠ 0.
#[inline]
fn t_interval(c0: i64, d: i64, r: i64) -> (i64, i64) {
    if d > 0 {
        (div_ceil_i(-r - c0, d), div_floor(r - c0, d))
    } else {
        (div_ceil_i(r - c0, d), div_floor(-r - c0, d))
    }
}

/// Walk the box [-r, r]^n in lexicographic order without materializing it.
#[inline]
fn for_each_box<F: FnMut(&[i64])>(n: usize, r: i64, mut f: F) {
    let mut cur = vec![-r; n];
    loop {
        f(&cur);
        let mut j = n;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            cur[j] += 1;
            if cur[j] <= r {
                break;
            }
            cur[j] = -r;
        }
    }
}

/// Decode the i-th point of the lexicographic box walk.
#[inline]
fn box_point(n: usize, r: i64, mut i: usize, out: &mut [i64]) {
    let side = (2 * r + 1) as usize;
    for j in (0..n).rev() {
        out[j] = (i % side) as i64 - r;
        i /= side;
    }
}

fn box_size(n: usize, r: i64) -> usize {
    ((2 * r + 1) as usize).pow(n as u32)
}

/// Solutions x in the box of m·x = ν for a fixed m ∈ Z^n (n ≤ 3), appended
/// to `out` in lexicographic order. The m = 0 slice is degenerate: the
/// whole box when ν = 0, empty otherwise.
fn slice_solutions(n: usize, m: &[i64], nu: i64, r: i64, out: &mut Vec<i64>) {
    if m.iter().all(|&v| v == 0) {
        if nu == 0 {
            for_each_box(n, r, |x| out.extend_from_slice(x));
        }
        return;
    }
    match n {
        1 => {
            if nu % m[0] == 0 {
                let x = nu / m[0];
                if x.abs() <= r {
                    out.push(x);
                }
            }
        }
        2 => {
            let (a, b) = (m[0], m[1]);
            let (g, s, t) = ext_gcd(a, b);
            if nu % g != 0 {
                return;
            }
            let k = nu / g;
            let (mut x0, mut y0) = (s * k, t * k);
            let (du, dv) = (-b / g, a / g);
            // recenter the particular solution near the box
            if du != 0 || dv != 0 {
                let shift = ((x0 * du + y0 * dv) as f64 / (du * du + dv * dv) as f64).round() as i64;
                x0 -= shift * du;
                y0 -= shift * dv;
            }
            let (mut lo, mut hi) = (i64::MIN / 4, i64::MAX / 4);
            for (c0, d) in [(x0, du), (y0, dv)] {
                if d == 0 {
                    if c0.abs() > r {
                        return;
                    }
                } else {
                    let (l2, h2) = t_interval(c0, d, r);
                    lo = lo.max(l2);
                    hi = hi.min(h2);
                }
            }
            if lo > hi {
                return;
            }
            // lexicographic: x strictly monotone in t when du ≠ 0
            let forward = du > 0 || (du == 0 && dv > 0);
            if forward {
                for t in lo..=hi {
                    out.extend_from_slice(&[x0 + t * du, y0 + t * dv]);
                }
            } else {
                for t in (lo..=hi).rev() {
                    out.extend_from_slice(&[x0 + t * du, y0 + t * dv]);
                }
            }
        }
        3 => slice_solutions_3(m, nu, r, out),
        _ => unreachable!("slice enumeration supports n ≤ 3"),
    }
}

/// n = 3: kernel basis of {x : m·x = 0} via two gcd steps (its covolume
/// |m|/gcd(m) confirms the pair generates the whole kernel), Lagrange
/// reduction, recentered particular solution, then exact per-coordinate
/// t₂-intervals for each t₁.
fn slice_solutions_3(m: &[i64], nu: i64, r: i64, out: &mut Vec<i64>) {
    let (a, b, c) = (m[0], m[1], m[2]);
    let g_ab = gcd(a, b);
    let (g, u, _v) = ext_gcd(g_ab, c);
    if nu % g != 0 {
        return;
    }
    let (mut p0, v1, v2);
    if g_ab != 0 {
        let (_, s, t) = ext_gcd(a, b); // s·a + t·b = g_ab
        let k = nu / g;
        let (_, uu, vv) = ext_gcd(g_ab, c); // uu·g_ab + vv·c = g
        p0 = [s * uu * k, t * uu * k, vv * k];
        v1 = [b / g_ab, -a / g_ab, 0];
        v2 = [s * (c / g), t * (c / g), -g_ab / g];
        let _ = u;
    } else {
        // a = b = 0, c ≠ 0
        p0 = [0, 0, nu / c];
        v1 = [1, 0, 0];
        v2 = [0, 1, 0];
    }
    debug_assert_eq!(m[0] * v1[0] + m[1] * v1[1] + m[2] * v1[2], 0);
    debug_assert_eq!(m[0] * v2[0] + m[1] * v2[1] + m[2] * v2[2], 0);
    debug_assert_eq!(m[0] * p0[0] + m[1] * p0[1] + m[2] * p0[2], nu);
    // Lagrange-reduce (v1, v2)
    let mut w1 = v1;
    let mut w2 = v2;
    for _ in 0..64 {
        let n1: i64 = w1.iter().map(|x| x * x).sum();
        let n2: i64 = w2.iter().map(|x| x * x).sum();
        if n1 > n2 {
            std::mem::swap(&mut w1, &mut w2);
        }
        let n1: i64 = w1.iter().map(|x| x * x).sum();
        let dot: i64 = w1.iter().zip(&w2).map(|(x, y)| x * y).sum();
        let q = ((dot as f64) / (n1 as f64)).round() as i64;
        if q == 0 {
            break;
        }
        for i in 0..3 {
            w2[i] -= q * w1[i];
        }
    }
    let (v1, v2) = (w1, w2);
    // recenter p0 using the (float) dual basis — integer shifts only
    let g11: f64 = v1.iter().map(|&x| (x * x) as f64).sum();
    let g22: f64 = v2.iter().map(|&x| (x * x) as f64).sum();
    let g12: f64 = v1.iter().zip(&v2).map(|(&x, &y)| (x * y) as f64).sum();
    let det = g11 * g22 - g12 * g12;
    if det <= 0.5 {
        return;
    }
    for _ in 0..2 {
        let d1: f64 = p0.iter().zip(&v1).map(|(&x, &y)| x as f64 * y as f64).sum();
        let d2: f64 = p0.iter().zip(&v2).map(|(&x, &y)| x as f64 * y as f64).sum();
        let t1 = ((g22 * d1 - g12 * d2) / det).round() as i64;
        let t2 = ((g11 * d2 - g12 * d1) / det).round() as i64;
        for i in 0..3 {
            p0[i] -= t1 * v1[i] + t2 * v2[i];
        }
    }
    let reach = (r as f64) * 3.0_f64.sqrt()
        + p0.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
    let d1_len = (g22 / det).sqrt();
    let t1_max = (reach * d1_len).ceil() as i64 + 1;
    let start = out.len();
    for t1 in -t1_max..=t1_max {
        let base = [
            p0[0] + t1 * v1[0],
            p0[1] + t1 * v1[1],
            p0[2] + t1 * v1[2],
        ];
        let (mut lo, mut hi) = (i64::MIN / 4, i64::MAX / 4);
        let mut feasible = true;
        for i in 0..3 {
            if v2[i] == 0 {
                if base[i].abs() > r {
                    feasible = false;
                    break;
                }
            } else {
                let (l2, h2) = t_interval(base[i], v2[i], r);
                lo = lo.max(l2);
                hi = hi.min(h2);
            }
        }
        if !feasible || lo > hi {
            continue;
        }
        for t2 in lo..=hi {
            out.extend_from_slice(&[
                base[0] + t2 * v2[0],
                base[1] + t2 * v2[1],
                base[2] + t2 * v2[2],
            ]);
        }
    }
    sort_rows_range(out, start, 3);
}

fn sort_rows_range(buf: &mut Vec<i64>, start: usize, w: usize) {
    let tail = &mut buf[start..];
    let mut rows: Vec<Vec<i64>> = tail.chunks(w).map(|r| r.to_vec()).collect();
    rows.sort();
    for (chunk, row) in tail.chunks_mut(w).zip(rows) {
        chunk.copy_from_slice(&row);
    }
}

fn sort_rows(buf: &mut Vec<i64>, w: usize) {
    sort_rows_range(buf, 0, w);
}

pub const ENUMERATION_BUDGET: f64 = 6e9;

/// Realistic work estimate: solutions ~ (2R+1)^{2n-2}·log plus per-slice
/// overhead (2R+1)^n.
fn enumeration_cost(n: usize, r: i64) -> f64 {
    let side = (2 * r + 1) as f64;
    side.powi(2 * n as i32 - 2) * (side.ln() + 1.0) * 4.0 + side.powi(n as i32) * 8.0
}

/// Exhaustive list of pairs (m₁', m₂') with m₁'·m₂' = ν, |·|_∞ ≤ R_int.
pub fn enumerate_resonant(spec: &LatticeSpec, k_int: &[i64]) -> Result<ResonantIndex> {
    spec.validate()?;
    if spec.p != 1 {
        return Err(Error::domain(
            "pairwise enumeration is the p = 1 path; see general_p_enumerate",
        ));
    }
    let n = spec.n;
    if n > 3 {
        return Err(Error::domain("enumeration supports n ≤ 3"));
    }
    let r = spec.r_int;
    if r <= 0 {
        return Err(Error::domain("enumeration needs an explicit R_int > 0"));
    }
    let est = enumeration_cost(n, r);
    if est > ENUMERATION_BUDGET {
        return Err(Error::Budget {
            what: format!("resonant enumeration, n={n}, R={r}"),
            estimate: est,
            limit: ENUMERATION_BUDGET,
        });
    }
    let nu = spec.nu();
    let total = box_size(n, r);
    let slices: Vec<Vec<i64>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut m1 = [0i64; 3];
            box_point(n, r, i, &mut m1[..n]);
            let mut local = Vec::new();
            let mut sols = Vec::new();
            slice_solutions(n, &m1[..n], nu, r, &mut sols);
            for m2 in sols.chunks(n) {
                local.extend_from_slice(&m1[..n]);
                local.extend_from_slice(m2);
            }
            local
        })
        .collect();
    let mut tuples = Vec::new();
    for s in slices {
        tuples.extend(s);
    }
    Ok(ResonantIndex {
        n,
        p: 1,
        l: spec.l,
        nu,
        r_int: r,
        base: k_int.to_vec(),
        tuples,
    })
}

/// Quadratic-cost double loop over the whole box; oracle for
/// `enumerate_resonant`.
pub fn enumerate_resonant_exhaustive(spec: &LatticeSpec, k_int: &[i64]) -> Result<ResonantIndex> {
    spec.validate()?;
    let n = spec.n;
    let r = spec.r_int;
    let candidates = (box_size(n, r) as f64).powi(2);
    if candidates > 2e9 {
        return Err(Error::Budget {
            what: "exhaustive resonant enumeration".into(),
            estimate: candidates,
            limit: 2e9,
        });
    }
    let nu = spec.nu();
    let mut tuples = Vec::new();
    for_each_box(n, r, |m1| {
        for_each_box(n, r, |m2| {
            let dot: i64 = m1.iter().zip(m2).map(|(a, b)| a * b).sum();
            if dot == nu {
                tuples.extend_from_slice(m1);
                tuples.extend_from_slice(m2);
            }
        });
    });
    Ok(ResonantIndex {
        n,
        p: 1,
        l: spec.l,
        nu,
        r_int: r,
        base: k_int.to_vec(),
        tuples,
    })
}

/// Z_{n,p}(L): ζ(pn-1)/ζ(pn)·L^{2pn-2} for pn ≥ 3, L²·log L/ζ(2) for
/// pn = 2. Takes L as a real so closed-form checkpoints stay exact.
pub fn normalization_z(n: usize, p: usize, l: f64) -> Result<f64> {
    let pn = n * p;
    if pn < 2 {
        return Err(Error::domain("normalization needs n·p ≥ 2"));
    }
    if pn == 2 {
        Ok(l * l * l.ln() / constants().zeta2)
    } else {
        Ok(zeta((pn - 1) as f64) / zeta(pn as f64) * l.powi(2 * pn as i32 - 2))
    }
}

/// Result of a weighted sum over the resonant set.
#[derive(Debug, Clone, Copy)]
pub struct WeightedSum {
    pub value: Complex64,
    pub tail_estimate: f64,
    pub r_int: i64,
    pub pair_count: usize,
}

/// Truncation radius from the requested tail tolerance. Gaussian envelopes
/// use their true decay; power-law envelopes use the declared-ℓ bound
/// R_int = L·max(4, (C/tol)^{1/(ℓ-3n-2)}).
pub fn truncation_radius(
    spec: &LatticeSpec,
    f1: &Envelope,
    f2: &Envelope,
    f3: &Envelope,
    k: &[f64],
    tail_tol: f64,
) -> Result<i64> {
    let n = spec.n as f64;
    let ell = f1.ell.min(f2.ell).min(f3.ell);
    if ell <= 3.0 * n + 2.0 {
        return Err(Error::domain(format!(
            "tail control needs decay ℓ > 3n+2 = {}, envelopes declare {ell}",
            3.0 * n + 2.0
        )));
    }
    let l = spec.l as f64;
    let k_norm = k.iter().map(|v| v * v).sum::<f64>().sqrt();
    let all_gaussian = f1.is_gaussian() && f2.is_gaussian() && f3.is_gaussian();
    let r_cont = if all_gaussian {
        let peak = f1.x_norm_bound() * f2.x_norm_bound() * f3.x_norm_bound();
        let per = (tail_tol * 1e-4 / (1.0 + peak)).min(1e-6);
        f1.decay_radius(per)
            .max(f2.decay_radius(per))
            .max(f3.decay_radius(per))
            + k_norm
    } else {
        let c = f1.x_norm_bound() * f2.x_norm_bound() * f3.x_norm_bound();
        (c / tail_tol).powf(1.0 / (ell - 3.0 * n - 2.0)).max(4.0) + k_norm
    };
    let r_int = (l * r_cont).ceil() as i64;
    let est = enumeration_cost(spec.n, r_int);
    if est > ENUMERATION_BUDGET {
        return Err(Error::Budget {
            what: format!("weighted sum box R_int = {r_int}"),
            estimate: est,
            limit: ENUMERATION_BUDGET,
        });
    }
    Ok(r_int)
}

/// Σ over the resonant set of f₁(K+z₁) f̄₂(K+z₁+z₂) f₃(K+z₂), z_i = m_i'/L.
/// Slice-parallel; per-slice sums are combined in lexicographic slice
/// order, so the result is independent of thread scheduling.
pub fn weighted_resonant_sum(
    spec: &LatticeSpec,
    k_int: &[i64],
    f1: &Envelope,
    f2: &Envelope,
    f3: &Envelope,
    tail_tol: f64,
) -> Result<WeightedSum> {
    spec.validate()?;
    let n = spec.n;
    if n > 3 || spec.p != 1 {
        return Err(Error::domain("weighted sums cover p = 1, n ≤ 3"));
    }
    let l = spec.l as f64;
    let k: Vec<f64> = k_int.iter().map(|&v| v as f64 / l).collect();
    let r_int = if spec.r_int > 0 {
        spec.r_int
    } else {
        truncation_radius(spec, f1, f2, f3, &k, tail_tol)?
    };
    let nu = spec.nu();
    let peak23 = f2.x_norm_bound() * f3.x_norm_bound();
    let peak12 = f1.x_norm_bound() * f2.x_norm_bound();
    // per-factor radii beyond which a term is below the per-point floor
    let per_floor = tail_tol * 1e-8;
    let cut1 = f1.decay_radius(per_floor / (1.0 + peak23));
    let cut3 = f3.decay_radius(per_floor / (1.0 + peak12));
    let cut1_int = (cut1 * l).ceil() as i64;
    let total = box_size(n, r_int);
    let partials: Vec<(Complex64, usize)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut m1 = [0i64; 3];
            box_point(n, r_int, i, &mut m1[..n]);
            // slice pruning on the f1 factor
            let d2: i64 = (0..n).map(|j| {
                let v = m1[j] + k_int[j];
                v * v
            }).sum();
            if d2 > cut1_int * cut1_int {
                return (Complex64::new(0.0, 0.0), 0);
            }
            let mut sols = Vec::new();
            slice_solutions(n, &m1[..n], nu, r_int, &mut sols);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut count = 0usize;
            let mut arg1 = 0.0f64;
            for j in 0..n {
                let u = k[j] + m1[j] as f64 / l;
                arg1 += u * u;
            }
            let fa = f1.eval_radial(arg1.sqrt());
            for m2 in sols.chunks(n) {
                count += 1;
                let mut a2 = 0.0f64;
                let mut a3 = 0.0f64;
                for j in 0..n {
                    let z2 = m2[j] as f64 / l;
                    let w = k[j] + m1[j] as f64 / l + z2;
                    let v = k[j] + z2;
                    a2 += w * w;
                    a3 += v * v;
                }
                if a3 > cut3 * cut3 {
                    continue;
                }
                acc += f2.eval_radial(a2.sqrt()).conj() * f3.eval_radial(a3.sqrt());
            }
            (acc * fa, count)
        })
        .collect();
    let mut value = Complex64::new(0.0, 0.0);
    let mut pair_count = 0;
    for (v, c) in partials {
        value += v;
        pair_count += c;
    }
    // tail: envelope magnitude on the outermost shell times the resonant
    // shell cardinality ~ R^{2n-2} log R
    let shell = r_int as f64 / l;
    let growth = (r_int as f64).powi(2 * n as i32 - 2) * (1.0 + (r_int as f64).ln());
    let e1 = f1.eval_radial((shell - k.iter().map(|v| v * v).sum::<f64>().sqrt()).max(0.0)).norm();
    let tail = (e1 * f2.x_norm_bound() * f3.x_norm_bound()
        + f3.eval_radial(shell).norm() * peak12)
        * growth
        + per_floor * pair_count as f64;
    Ok(WeightedSum {
        value,
        tail_estimate: tail,
        r_int,
        pair_count,
    })
}

/// Stability report for the normalized sup over K and μ̃.
#[derive(Debug, Clone)]
pub struct ScanReport {
    pub l_values: Vec<u32>,
    /// sup over the (K, μ̃) grid of ⟨K⟩^ℓ|Σ|/Z(L), per L
    pub ratios: Vec<f64>,
    pub stable: bool,
}

/// Max over K and μ̃ of ⟨K⟩^ℓ |weighted sum| / Z_{n}(L) across an L list;
/// `stable` records whether consecutive ratios stay within 50%.
pub fn sup_bound_scan(
    n: usize,
    l_values: &[u32],
    envelope: &Envelope,
    k_ints: &[Vec<i64>],
    mu_tildes: &[i64],
    tail_tol: f64,
) -> Result<ScanReport> {
    let ell = envelope.ell;
    let mut ratios = Vec::new();
    for &l in l_values {
        let mut worst = 0.0f64;
        for k_int in k_ints {
            for &mu in mu_tildes {
                let spec = LatticeSpec {
                    n,
                    p: 1,
                    l,
                    mu_tilde: mu,
                    r_int: 0,
                };
                let sum =
                    weighted_resonant_sum(&spec, k_int, envelope, envelope, envelope, tail_tol)?;
                let k2: f64 = k_int
                    .iter()
                    .map(|&v| (v as f64 / l as f64).powi(2))
                    .sum();
                let weighted = (1.0 + k2).sqrt().powf(ell) * sum.value.norm();
                worst = worst.max(weighted / normalization_z(n, 1, l as f64)?);
            }
        }
        ratios.push(worst);
    }
    let mut stable = true;
    for w in ratios.windows(2) {
        if w[0] > 0.0 && !(0.5..=1.5).contains(&(w[1] / w[0])) {
            stable = false;
        }
    }
    Ok(ScanReport {
        l_values: l_values.to_vec(),
        ratios,
        stable,
    })
}

/// Per-mode resonant triples on a truncated grid: for every mode K of
/// [-Λ,Λ]^n, the (m₁', m₂') with m₁'·m₂' = 0 keeping all three partners
/// on the grid. Flat (k_idx, i1, i2, i3) quadruples, deterministic order.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    pub n: usize,
    pub lambda: i64,
    pub entries: Vec<u32>,
}

impl CouplingTable {
    pub fn len(&self) -> usize {
        self.entries.len() / 4
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Flat index of a mode m ∈ [-Λ, Λ]^n, row-major.
pub fn mode_index(n: usize, lambda: i64, m: &[i64]) -> Option<u32> {
    let side = (2 * lambda + 1) as u32;
    let mut idx = 0u32;
    for i in 0..n {
        if m[i].abs() > lambda {
            return None;
        }
        idx = idx * side + (m[i] + lambda) as u32;
    }
    Some(idx)
}

pub fn resonant_coupling_table(n: usize, lambda: i64) -> Result<CouplingTable> {
    if n > 3 {
        return Err(Error::domain("coupling table supports n ≤ 3"));
    }
    let est = (box_size(n, lambda) as f64) * enumeration_cost(n, 2 * lambda)
        / (box_size(n, 2 * lambda) as f64);
    if est * (box_size(n, 2 * lambda) as f64) > ENUMERATION_BUDGET * 8.0 {
        return Err(Error::Budget {
            what: format!("coupling table n={n}, Λ={lambda}"),
            estimate: est * box_size(n, 2 * lambda) as f64,
            limit: ENUMERATION_BUDGET * 8.0,
        });
    }
    let modes = box_size(n, lambda);
    let per_mode: Vec<Vec<u32>> = (0..modes)
        .into_par_iter()
        .map(|ki| {
            let mut mk = [0i64; 3];
            box_point(n, lambda, ki, &mut mk[..n]);
            let mut local = Vec::new();
            let k_idx = ki as u32;
            let mut m1 = [0i64; 3];
            let mut sols = Vec::new();
            for_each_box(n, 2 * lambda, |z1| {
                for j in 0..n {
                    m1[j] = mk[j] + z1[j];
                }
                if mode_index(n, lambda, &m1[..n]).is_none() {
                    return;
                }
                let i1 = mode_index(n, lambda, &m1[..n]).unwrap();
                sols.clear();
                slice_solutions(n, z1, 0, 2 * lambda, &mut sols);
                for z2 in sols.chunks(n) {
                    let mut m3 = [0i64; 3];
                    let mut m2 = [0i64; 3];
                    for j in 0..n {
                        m3[j] = mk[j] + z2[j];
                        m2[j] = m1[j] + z2[j];
                    }
                    if let (Some(i2), Some(i3)) = (
                        mode_index(n, lambda, &m2[..n]),
                        mode_index(n, lambda, &m3[..n]),
                    ) {
                        local.extend_from_slice(&[k_idx, i1, i2, i3]);
                    }
                }
            });
            local
        })
        .collect();
    let mut entries = Vec::new();
    for mut v in per_mode {
        entries.append(&mut v);
    }
    Ok(CouplingTable {
        n,
        lambda,
        entries,
    })
}

/// Quintic 1-d enumeration: all (J₁,J₂,J₃,J₄) in the box with
/// J₁J₂ + J₃J₄ = ν, via divisor pairing on the residual J₃J₄ = ν - J₁J₂.
pub fn general_p_enumerate(spec: &LatticeSpec, k_int: &[i64]) -> Result<ResonantIndex> {
    spec.validate()?;
    if spec.p != 2 || spec.n != 1 {
        return Err(Error::domain(
            "general-p enumeration is implemented for the quintic 1-d case",
        ));
    }
    let r = spec.r_int;
    if r <= 0 {
        return Err(Error::domain("enumeration needs an explicit R_int > 0"));
    }
    let est = ((2 * r + 1) as f64).powi(2) * ((r as f64).max(2.0)).sqrt() * 8.0;
    if est > ENUMERATION_BUDGET {
        return Err(Error::Budget {
            what: format!("quintic enumeration R = {r}"),
            estimate: est,
            limit: ENUMERATION_BUDGET,
        });
    }
    let nu = spec.nu();
    let mut tuples: Vec<i64> = Vec::new();
    for j1 in -r..=r {
        for j2 in -r..=r {
            let t = nu - j1 * j2;
            if t == 0 {
                for j4 in -r..=r {
                    tuples.extend_from_slice(&[j1, j2, 0, j4]);
                }
                for j3 in -r..=r {
                    if j3 != 0 {
                        tuples.extend_from_slice(&[j1, j2, j3, 0]);
                    }
                }
            } else {
                let ta = t.abs();
                let mut d = 1i64;
                while d * d <= ta {
                    if ta % d == 0 {
                        let e = ta / d;
                        let mut push = |j3: i64| {
                            let j4 = t / j3;
                            if j3.abs() <= r && j4.abs() <= r {
                                tuples.extend_from_slice(&[j1, j2, j3, j4]);
                            }
                        };
                        push(d);
                        push(-d);
                        if e != d {
                            push(e);
                            push(-e);
                        }
                    }
                    d += 1;
                }
            }
        }
    }
    sort_rows(&mut tuples, 4);
    Ok(ResonantIndex {
        n: 1,
        p: 2,
        l: spec.l,
        nu,
        r_int: r,
        base: k_int.to_vec(),
        tuples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, l: u32, mu_tilde: i64, r_int: i64) -> LatticeSpec {
        LatticeSpec {
            n,
            p: 1,
            l,
            mu_tilde,
            r_int,
        }
    }

    #[test]
    fn slice_divisibility_obstruction() {
        let mut out = Vec::new();
        slice_solutions(2, &[2, 4], 3, 10, &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn degenerate_zero_slice() {
        let mut out = Vec::new();
        slice_solutions(2, &[0, 0], 0, 2, &mut out);
        assert_eq!(out.len() / 2, 25);
        out.clear();
        slice_solutions(2, &[0, 0], 1, 2, &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn enumeration_matches_exhaustive_randomized() {
        let seed = 424242u64;
        println!("enumeration oracle seed = {seed}");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for case in 0..50 {
            let n = if rng.gen_bool(0.5) { 2 } else { 3 };
            let nu: i64 = rng.gen_range(-8..=8);
            let r: i64 = if n == 2 {
                rng.gen_range(2..=14)
            } else {
                rng.gen_range(2..=4)
            };
            let s = spec(n, 1, -2 * nu, r);
            let fast = enumerate_resonant(&s, &vec![0; n]).unwrap();
            assert!(fast.verify_exact(), "case {case}: inexact tuple");
            let slow = enumerate_resonant_exhaustive(&s, &vec![0; n]).unwrap();
            let mut a = fast.tuples.clone();
            let mut b = slow.tuples.clone();
            sort_rows(&mut a, 2 * n);
            sort_rows(&mut b, 2 * n);
            assert_eq!(a, b, "case {case}: n={n}, nu={nu}, r={r}");
        }
    }

    #[test]
    fn involution_symmetries_of_zero_set() {
        let s = spec(2, 1, 0, 6);
        let idx = enumerate_resonant(&s, &[0, 0]).unwrap();
        let mut swapped: Vec<Vec<i64>> = idx
            .rows()
            .map(|r| {
                let mut v = r[2..4].to_vec();
                v.extend_from_slice(&r[0..2]);
                v
            })
            .collect();
        let mut negated: Vec<Vec<i64>> =
            idx.rows().map(|r| r.iter().map(|x| -x).collect()).collect();
        let mut orig: Vec<Vec<i64>> = idx.rows().map(|r| r.to_vec()).collect();
        swapped.sort();
        negated.sort();
        orig.sort();
        assert_eq!(orig, swapped);
        assert_eq!(orig, negated);
    }

    #[test]
    fn normalization_values() {
        let c = constants();
        let v = normalization_z(3, 1, 10.0).unwrap();
        assert!((v - c.zeta2 / c.zeta3 * 1e4).abs() < 1e-9 * v);
        let e = std::f64::consts::E;
        let v = normalization_z(2, 1, e).unwrap();
        assert!((v - e * e / c.zeta2).abs() < 1e-12 * v);
        let v = normalization_z(1, 2, 50.0).unwrap();
        assert!((v - 2500.0 * 50.0_f64.ln() / c.zeta2).abs() < 1e-9 * v);
        assert!(normalization_z(1, 1, 4.0).is_err());
    }

    #[test]
    fn weighted_sum_zero_envelope() {
        let g0 = Envelope::gaussian(C::new(0.0, 0.0), 1.0, 9.0, 3).unwrap();
        let g = Envelope::gaussian(C::new(1.0, 0.0), 1.0, 9.0, 3).unwrap();
        let s = spec(2, 4, 0, 8);
        let v = weighted_resonant_sum(&s, &[0, 0], &g0, &g, &g, 1e-8).unwrap();
        assert_eq!(v.value, C::new(0.0, 0.0));
    }

    #[test]
    fn weighted_sum_matches_exhaustive_loop() {
        let g = Envelope::gaussian(C::new(1.0, 0.0), 1.0, 9.0, 3).unwrap();
        let s = spec(2, 1, 0, 9);
        let fast = weighted_resonant_sum(&s, &[0, 0], &g, &g, &g, 1e-12).unwrap();
        let mut direct = C::new(0.0, 0.0);
        for_each_box(2, 9, |m1| {
            for_each_box(2, 9, |m2| {
                if m1[0] * m2[0] + m1[1] * m2[1] != 0 {
                    return;
                }
                let a1 = ((m1[0] * m1[0] + m1[1] * m1[1]) as f64).sqrt();
                let s1 = m1[0] + m2[0];
                let s2 = m1[1] + m2[1];
                let a2 = ((s1 * s1 + s2 * s2) as f64).sqrt();
                let a3 = ((m2[0] * m2[0] + m2[1] * m2[1]) as f64).sqrt();
                direct += g.eval_radial(a1) * g.eval_radial(a2).conj() * g.eval_radial(a3);
            });
        });
        assert!(
            (fast.value - direct).norm() < 1e-10 * direct.norm(),
            "{} vs {direct}",
            fast.value
        );
    }

    #[test]
    fn weighted_sum_real_nonneg_for_even_real_data() {
        let g = Envelope::gaussian(C::new(0.7, 0.0), 0.9, 9.0, 3).unwrap();
        let s = spec(2, 4, 0, 20);
        let v = weighted_resonant_sum(&s, &[0, 0], &g, &g, &g, 1e-8).unwrap();
        assert!(v.value.im.abs() < 1e-12 * v.value.re);
        assert!(v.value.re > 0.0);
    }

    #[test]
    fn growth_with_l_tracks_normalization() {
        let g = Envelope::gaussian(C::new(1.0, 0.0), 1.0, 9.0, 3).unwrap();
        let v16 = weighted_resonant_sum(&spec(2, 16, 0, 0), &[0, 0], &g, &g, &g, 1e-7)
            .unwrap()
            .value
            .norm();
        let v32 = weighted_resonant_sum(&spec(2, 32, 0, 0), &[0, 0], &g, &g, &g, 1e-7)
            .unwrap()
            .value
            .norm();
        let ratio = v32 / v16;
        let log_factor = 32.0_f64.ln() / 16.0_f64.ln();
        assert!(
            ratio > 0.5 * 4.0 && ratio < 2.0 * 4.0 * log_factor,
            "ratio {ratio}"
        );
    }

    #[test]
    fn z_scaling_stabilizes() {
        let g = Envelope::gaussian(C::new(1.0, 0.0), 1.0, 9.0, 3).unwrap();
        let r32 = weighted_resonant_sum(&spec(2, 32, 0, 0), &[0, 0], &g, &g, &g, 1e-7)
            .unwrap()
            .value
            .norm()
            / normalization_z(2, 1, 32.0).unwrap();
        let r64 = weighted_resonant_sum(&spec(2, 64, 0, 0), &[0, 0], &g, &g, &g, 1e-7)
            .unwrap()
            .value
            .norm()
            / normalization_z(2, 1, 64.0).unwrap();
        assert!((r64 / r32 - 1.0).abs() < 0.10, "r32={r32}, r64={r64}");
    }

    #[test]
    fn coupling_table_single_mode_grid() {
        let t = resonant_coupling_table(2, 0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(&t.entries, &[0, 0, 0, 0]);
    }

    #[test]
    fn coupling_table_1d_cubic_is_degenerate() {
        // z1·z2 = 0 in 1-d forces z1 = 0 or z2 = 0: every triple trivial
        let t = resonant_coupling_table(1, 3).unwrap();
        assert!(!t.is_empty());
        for e in t.entries.chunks(4) {
            let (k, i1, i3) = (e[0], e[1], e[3]);
            assert!(i1 == k || i3 == k, "nontrivial 1-d triple: {e:?}");
        }
    }

    #[test]
    fn coupling_table_matches_triple_loop() {
        let n = 2;
        let lambda = 3i64;
        let t = resonant_coupling_table(n, lambda).unwrap();
        let mut expect: Vec<[u32; 4]> = Vec::new();
        for_each_box(n, lambda, |mk| {
            for_each_box(n, lambda, |m1| {
                for_each_box(n, lambda, |m3| {
                    let z1: Vec<i64> = m1.iter().zip(mk).map(|(a, b)| a - b).collect();
                    let z2: Vec<i64> = m3.iter().zip(mk).map(|(a, b)| a - b).collect();
                    let dot: i64 = z1.iter().zip(&z2).map(|(a, b)| a * b).sum();
                    if dot != 0 {
                        return;
                    }
                    let m2: Vec<i64> = m1
                        .iter()
                        .zip(m3)
                        .zip(mk)
                        .map(|((a, b), c)| a + b - c)
                        .collect();
                    if let (Some(k), Some(i1), Some(i2), Some(i3)) = (
                        mode_index(n, lambda, mk),
                        mode_index(n, lambda, m1),
                        mode_index(n, lambda, &m2),
                        mode_index(n, lambda, m3),
                    ) {
                        expect.push([k, i1, i2, i3]);
                    }
                });
            });
        });
        let mut got: Vec<[u32; 4]> = t
            .entries
            .chunks(4)
            .map(|c| [c[0], c[1], c[2], c[3]])
            .collect();
        got.sort();
        expect.sort();
        assert_eq!(got, expect);
    }

    #[test]
    fn quintic_enumeration_matches_quadruple_loop() {
        for nu in [0i64, 1, -4] {
            let s = LatticeSpec {
                n: 1,
                p: 2,
                l: 1,
                mu_tilde: -2 * nu,
                r_int: 5,
            };
            let fast = general_p_enumerate(&s, &[0]).unwrap();
            assert!(fast.verify_exact());
            let mut expect: Vec<Vec<i64>> = Vec::new();
            for j1 in -5i64..=5 {
                for j2 in -5i64..=5 {
                    for j3 in -5i64..=5 {
                        for j4 in -5i64..=5 {
                            if j1 * j2 + j3 * j4 == nu {
                                expect.push(vec![j1, j2, j3, j4]);
                            }
                        }
                    }
                }
            }
            let got: Vec<Vec<i64>> = fast.rows().map(|r| r.to_vec()).collect();
            expect.sort();
            assert_eq!(got, expect, "nu={nu}");
        }
    }

    #[test]
    fn quintic_count_growth_tracks_normalization() {
        // weighted count under J = L·(continuum coords) should grow like
        // Z_{pn}(L) ~ L² log L
        let g = |l: f64, idx: &ResonantIndex| -> f64 {
            idx.rows()
                .map(|row| {
                    let e: f64 = row.iter().map(|&j| (j as f64 / l).powi(2)).sum();
                    (-std::f64::consts::PI * e).exp()
                })
                .sum()
        };
        let mut vals = Vec::new();
        for l in [8i64, 16, 32] {
            let s = LatticeSpec {
                n: 1,
                p: 2,
                l: l as u32,
                mu_tilde: 0,
                r_int: 3 * l,
            };
            let idx = general_p_enumerate(&s, &[0]).unwrap();
            vals.push(g(l as f64, &idx) / normalization_z(1, 2, l as f64).unwrap());
        }
        assert!(
            (vals[2] / vals[1] - 1.0).abs() < 0.15,
            "normalized quintic counts {vals:?}"
        );
    }

    #[test]
    fn binary_roundtrip() {
        let s = spec(2, 6, -4, 5);
        let idx = enumerate_resonant(&s, &[1, -2]).unwrap();
        let mut buf = Vec::new();
        idx.write_binary(&mut buf).unwrap();
        let back = ResonantIndex::read_binary(&buf[..]).unwrap();
        assert_eq!(idx.tuples, back.tuples);
        assert_eq!(idx.nu, back.nu);
        assert_eq!(idx.count(), back.count());
    }
}
