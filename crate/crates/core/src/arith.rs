//! Exact integer arithmetic for the circle-method coefficients: Euler
//! totient, Ramanujan sums c_q(m), the twisted quadratic exponential sum
//! S(q,c) = q^{d/2} c_q(ω(c)), and partial-sum asymptotics of S over q.
//!
//! Everything here is deterministic and allocation-light; the exponential
//! sums stay in exact i128 while they fit and refuse otherwise.

use crate::error::{Error, Result};
use crate::quad::Kahan;
use crate::zeta::constants;
use num_complex::Complex64;

/// Prime factorization q = Π p^e with primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeFactorization {
    pub q: u64,
    pub factors: Vec<(u64, u32)>,
}

impl PrimeFactorization {
    /// Trial-division factorization; fine for the q ranges used here (≤ ~1e7).
    pub fn of(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::domain("factorization of 0"));
        }
        let mut factors = Vec::new();
        let mut rest = q;
        let mut p = 2u64;
        while p * p <= rest {
            if rest % p == 0 {
                let mut e = 0;
                while rest % p == 0 {
                    rest /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if rest > 1 {
            factors.push((rest, 1));
        }
        Ok(Self { q, factors })
    }

    pub fn totient(&self) -> u64 {
        let mut phi = 1u64;
        for &(p, e) in &self.factors {
            phi *= p.pow(e - 1) * (p - 1);
        }
        phi
    }
}

/// Euler totient φ(q).
pub fn euler_totient(q: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::domain("totient of 0"));
    }
    Ok(PrimeFactorization::of(q)?.totient())
}

/// p-adic valuation v_p(m) for m ≠ 0; `None` encodes v_p(0) = ∞.
fn valuation(mut m: u64, p: u64) -> Option<u32> {
    if m == 0 {
        return None;
    }
    let mut v = 0;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    Some(v)
}

/// Ramanujan sum c_q(m) = Σ_{(x,q)=1} e(mx/q), by multiplicativity and the
/// prime-power values: c_{p^j}(m) = 0, -p^{j-1}, or p^{j-1}(p-1) according
/// to whether p^{j-1} divides m and p^j does not, etc. c_1(m) = 1 (the
/// empty product), which is forced by multiplicativity.
pub fn ramanujan_sum(q: u64, m: i64) -> Result<i64> {
    let fac = PrimeFactorization::of(q)?;
    let mabs = m.unsigned_abs();
    let mut out: i128 = 1;
    for &(p, j) in &fac.factors {
        let v = valuation(mabs, p);
        let local: i128 = match v {
            // m = 0: p^j | m always
            None => (p as i128).pow(j - 1) * (p as i128 - 1),
            Some(v) if v >= j => (p as i128).pow(j - 1) * (p as i128 - 1),
            Some(v) if v + 1 == j => -((p as i128).pow(j - 1)),
            _ => 0,
        };
        out *= local;
        if out == 0 {
            return Ok(0);
        }
    }
    i64::try_from(out).map_err(|_| Error::range(format!("c_{q}({m}) exceeds i64")))
}

/// ω(c) = c_e · c_o for a dual vector c of even length d: the pairing of
/// coordinate m with coordinate m + d/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmegaValue(pub i64);

pub fn omega_of(c: &[i64]) -> OmegaValue {
    assert!(c.len() % 2 == 0, "dual vector must have even length");
    let half = c.len() / 2;
    let mut acc: i64 = 0;
    for m in 0..half {
        acc += c[m] * c[m + half];
    }
    OmegaValue(acc)
}

/// S(q,c) = q^{d/2} c_q(ω(c)) together with the parameters that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SqcValue {
    pub value: i128,
    pub q: u64,
    pub d: u32,
}

/// The closed form S(q,c) = q^{d/2} c_q(ω(c)) (level μ̃ = 0).
pub fn s_qc(q: u64, omega_c: i64, d: u32) -> Result<SqcValue> {
    if d < 2 || d % 2 != 0 {
        return Err(Error::domain(format!("d must be even and ≥ 2, got {d}")));
    }
    let c = ramanujan_sum(q, omega_c)? as i128;
    let qp = (q as i128)
        .checked_pow(d / 2)
        .ok_or_else(|| Error::range(format!("q^(d/2) overflows i128 for q={q}, d={d}")))?;
    let value = qp
        .checked_mul(c)
        .ok_or_else(|| Error::range(format!("S({q},·) overflows i128 at d={d}")))?;
    Ok(SqcValue { value, q, d })
}

/// Brute-force ceiling for `s_qc_brute`.
pub const BRUTE_Q_CEILING: u64 = 64;

/// Direct evaluation of the complete exponential sum
///   S_{μ̃}(q,c) = Σ_{(a,q)=1} Σ_{b ∈ [0,q)^d} e((a(Q(b) - μ̃) + c·b)/q),
/// with Q(b) = b_e·b_o the paired form. The b-sum factors over the d/2
/// coordinate pairs, which keeps the full q ≤ 64, d = 6 range affordable;
/// `s_qc_brute_literal` below keeps the unfactored loop for tiny q as a
/// check on this evaluation. Result is rounded to the nearest integer and
/// the rounding defect is required to be < 1e-3.
pub fn s_qc_brute(q: u64, c: &[i64], mu_tilde: i64, d: u32) -> Result<i128> {
    if d < 2 || d % 2 != 0 || c.len() != d as usize {
        return Err(Error::domain(format!(
            "need even d ≥ 2 and |c| = d, got d={d}, |c|={}",
            c.len()
        )));
    }
    if q > BRUTE_Q_CEILING {
        return Err(Error::Budget {
            what: format!("brute-force S(q,c) at q={q}"),
            estimate: (q as f64).powi(3) * euler_totient(q)? as f64,
            limit: (BRUTE_Q_CEILING as f64).powi(3) * 32.0,
        });
    }
    let qi = q as i64;
    // roots of unity e(k/q), indexed by k mod q
    let table: Vec<Complex64> = (0..q)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / q as f64;
            Complex64::new(t.cos(), t.sin())
        })
        .collect();
    let idx = |v: i64| -> usize { v.rem_euclid(qi) as usize };
    let half = (d / 2) as usize;
    let mut total = Complex64::new(0.0, 0.0);
    for a in 0..qi {
        if gcd(a.unsigned_abs(), q) != 1 {
            continue;
        }
        // e(-a μ̃ / q) prefactor from the shifted form Q(b) - μ̃
        let mut term = table[idx(-a * (mu_tilde.rem_euclid(qi)))];
        for m in 0..half {
            let (cm, cm2) = (c[m], c[m + half]);
            let mut pair = Complex64::new(0.0, 0.0);
            for x in 0..qi {
                for y in 0..qi {
                    pair += table[idx(a * x * y + cm * x + cm2 * y)];
                }
            }
            term *= pair;
        }
        total += term;
    }
    let rounded = total.re.round();
    if (total.re - rounded).abs() > 1e-3 || total.im.abs() > 1e-3 {
        return Err(Error::Accuracy {
            what: format!("brute-force S({q},c) did not round to an integer"),
            achieved: (total.re - rounded).abs().max(total.im.abs()),
            requested: 1e-3,
        });
    }
    Ok(rounded as i128)
}

/// The literal O(φ(q) q^d) sum with no factorization at all; only usable
/// for very small q, and kept as the oracle for `s_qc_brute`.
pub fn s_qc_brute_literal(q: u64, c: &[i64], mu_tilde: i64, d: u32) -> Result<i128> {
    let dd = d as usize;
    if c.len() != dd {
        return Err(Error::domain("c length must equal d"));
    }
    let cost = (q as f64).powi(d as i32) * q as f64;
    if cost > 5e9 {
        return Err(Error::Budget {
            what: format!("literal S(q,c) loop at q={q}, d={d}"),
            estimate: cost,
            limit: 5e9,
        });
    }
    let qi = q as i64;
    let table: Vec<Complex64> = (0..q)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / q as f64;
            Complex64::new(t.cos(), t.sin())
        })
        .collect();
    let idx = |v: i64| -> usize { v.rem_euclid(qi) as usize };
    let half = dd / 2;
    let mut total = Complex64::new(0.0, 0.0);
    let mut b = vec![0i64; dd];
    for a in 0..qi {
        if gcd(a.unsigned_abs(), q) != 1 {
            continue;
        }
        b.iter_mut().for_each(|x| *x = 0);
        loop {
            let mut quad: i64 = -mu_tilde;
            for m in 0..half {
                quad += b[m] * b[m + half];
            }
            let lin: i64 = b.iter().zip(c).map(|(x, y)| x * y).sum();
            total += table[idx(a * quad.rem_euclid(qi) + lin)];
            // odometer over [0, q)^d
            let mut j = 0;
            loop {
                if j == dd {
                    break;
                }
                b[j] += 1;
                if b[j] < qi {
                    break;
                }
                b[j] = 0;
                j += 1;
            }
            if j == dd {
                break;
            }
        }
    }
    Ok(total.re.round() as i128)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_i(a: i64, b: i64) -> u64 {
    gcd(a.unsigned_abs(), b.unsigned_abs())
}

/// Sieve of smallest prime factors up to n, for bulk totient/valuation work.
pub struct Sieve {
    spf: Vec<u32>,
}

impl Sieve {
    pub fn up_to(n: usize) -> Self {
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Self { spf }
    }

    pub fn factorize(&self, mut q: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while q > 1 {
            let p = self.spf[q as usize] as u64;
            let mut e = 0;
            while q % p == 0 {
                q /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    pub fn totient(&self, q: u64) -> u64 {
        let mut phi = 1u64;
        for (p, e) in self.factorize(q) {
            phi *= p.pow(e - 1) * (p - 1);
        }
        phi
    }

    fn ramanujan(&self, q: u64, m: i64) -> i64 {
        if q == 1 {
            return 1;
        }
        let mabs = m.unsigned_abs();
        let mut out: i64 = 1;
        for (p, j) in self.factorize(q) {
            let v = valuation(mabs, p);
            let local: i64 = match v {
                None => (p as i64).pow(j - 1) * (p as i64 - 1),
                Some(v) if v >= j => (p as i64).pow(j - 1) * (p as i64 - 1),
                Some(v) if v + 1 == j => -((p as i64).pow(j - 1)),
                _ => 0,
            };
            out *= local;
            if out == 0 {
                return 0;
            }
        }
        out
    }
}

/// M(X) = Σ_{q ≤ X} q^{-4} S(q,0) = Σ φ(q)/q², compensated summation.
/// Diverges like log X / ζ(2); see `partial_sum_m_constant`.
pub fn partial_sum_m(x: u64) -> f64 {
    let sieve = Sieve::up_to(x as usize);
    let mut acc = Kahan::new();
    for q in 1..=x {
        let phi = if q == 1 { 1 } else { sieve.totient(q) };
        acc.add(phi as f64 / (q as f64 * q as f64));
    }
    acc.value()
}

/// The constant γ/ζ(2) - ζ′(2)/ζ(2)² that M(X) - log X/ζ(2) converges to.
pub fn partial_sum_m_constant() -> f64 {
    let c = constants();
    c.gamma / c.zeta2 - c.zeta_prime2 / (c.zeta2 * c.zeta2)
}

/// A(X,c) = Σ_{q ≤ X} S(q,c) at d = 4, i.e. Σ q² c_q(ω(c)).
/// For ω(c) = 0 this grows like X⁴/(4ζ(2)); for ω(c) ≠ 0 strictly slower.
pub fn partial_sum_a(x: u64, omega_c: i64) -> f64 {
    let sieve = Sieve::up_to(x as usize);
    let mut acc = Kahan::new();
    for q in 1..=x {
        let cq = if q == 1 { 1 } else { sieve.ramanujan(q, omega_c) };
        acc.add((q as f64) * (q as f64) * cq as f64);
    }
    acc.value()
}

/// Σ_{q ≤ Q} q^{-d} S(q,0) for even d ≥ 6; converges to ζ((d-2)/2)/ζ(d/2).
pub fn zeta_ratio_sum(d: u32, q_max: u64) -> Result<f64> {
    if d < 6 || d % 2 != 0 {
        return Err(Error::domain(format!("zeta_ratio_sum needs even d ≥ 6, got {d}")));
    }
    let sieve = Sieve::up_to(q_max as usize);
    let mut acc = Kahan::new();
    for q in 1..=q_max {
        let phi = if q == 1 { 1 } else { sieve.totient(q) };
        acc.add(phi as f64 * (q as f64).powi(-(d as i32) / 2));
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeta;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn totient_basics() {
        assert_eq!(euler_totient(1).unwrap(), 1);
        assert_eq!(euler_totient(12).unwrap(), 4);
        for p in [2u64, 3, 5, 7, 11, 97] {
            assert_eq!(euler_totient(p).unwrap(), p - 1);
        }
        // brute-force gcd count, q = 1..=60
        for q in 1..=60u64 {
            let brute = (1..=q).filter(|&x| gcd(x, q) == 1).count() as u64;
            assert_eq!(euler_totient(q).unwrap(), brute, "φ({q})");
        }
        assert!(euler_totient(0).is_err());
    }

    /// c_q(m) against its definition Σ_{(x,q)=1} e(mx/q).
    fn ramanujan_brute(q: u64, m: i64) -> i64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 1..=q {
            if gcd(x, q) == 1 {
                let t = 2.0 * std::f64::consts::PI * (m as f64) * (x as f64) / q as f64;
                acc += Complex64::new(t.cos(), t.sin());
            }
        }
        acc.re.round() as i64
    }

    #[test]
    fn ramanujan_pinned_values() {
        assert_eq!(ramanujan_sum(4, 2).unwrap(), -2);
        assert_eq!(ramanujan_sum(3, 6).unwrap(), 2);
        assert_eq!(ramanujan_sum(6, 4).unwrap(), -1);
        assert_eq!(ramanujan_sum(1, 7).unwrap(), 1);
    }

    #[test]
    fn ramanujan_matches_definition() {
        for q in 1..=40u64 {
            for m in -25..=25i64 {
                assert_eq!(
                    ramanujan_sum(q, m).unwrap(),
                    ramanujan_brute(q, m),
                    "c_{q}({m})"
                );
            }
        }
    }

    #[test]
    fn sqc_pinned_values() {
        // q^{d/2} c_q(ω): 2² · c_2(0) = 4·1
        assert_eq!(s_qc(2, 0, 4).unwrap().value, 4);
        // middle prime-power case: 4² · c_4(2) = 16 · (-2) = -32,
        // pinned by the brute-force oracle below
        assert_eq!(s_qc(4, 2, 4).unwrap().value, -32);
        assert_eq!(s_qc(1, 123, 6).unwrap().value, 1);
        assert_eq!(s_qc(3, 0, 4).unwrap().value, 18); // 9 · c_3(0) = 9·2
    }

    #[test]
    fn sqc_brute_agrees_with_literal_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in 1..=9u64 {
            for _ in 0..5 {
                let c: Vec<i64> = (0..4).map(|_| rng.gen_range(-20..=20)).collect();
                let mu = rng.gen_range(-3..=3);
                assert_eq!(
                    s_qc_brute(q, &c, mu, 4).unwrap(),
                    s_qc_brute_literal(q, &c, mu, 4).unwrap(),
                    "q={q} c={c:?} mu={mu}"
                );
            }
        }
        // one d=6 spot check
        let c = [3i64, -1, 0, 2, 5, -4];
        assert_eq!(
            s_qc_brute(5, &c, 0, 6).unwrap(),
            s_qc_brute_literal(5, &c, 0, 6).unwrap()
        );
    }

    #[test]
    fn sqc_formula_matches_brute_oracle() {
        // seed printed so failures are reproducible
        let seed = 20260810u64;
        println!("sqc oracle seed = {seed}");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for d in [4u32, 6] {
            for q in 1..=20u64 {
                for _ in 0..8 {
                    let c: Vec<i64> =
                        (0..d as usize).map(|_| rng.gen_range(-20..=20)).collect();
                    let omega = omega_of(&c).0;
                    assert_eq!(
                        s_qc(q, omega, d).unwrap().value,
                        s_qc_brute(q, &c, 0, d).unwrap(),
                        "q={q}, d={d}, c={c:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn sqc_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let u = rng.gen_range(1..=20u64);
            let v = rng.gen_range(1..=20u64);
            if gcd(u, v) != 1 || u * v > 200 {
                continue;
            }
            let omega = rng.gen_range(-400..=400i64);
            let d = if rng.gen_bool(0.5) { 4 } else { 6 };
            assert_eq!(
                s_qc(u * v, omega, d).unwrap().value,
                s_qc(u, omega, d).unwrap().value * s_qc(v, omega, d).unwrap().value
            );
        }
    }

    #[test]
    fn sqc_trivial_bound() {
        // |S(q,c)| ≤ C q^{d/2+1} with a single constant; C = 1 suffices for
        // the closed form since |c_q| ≤ φ(q) < q. For μ̃ ≠ 0 the brute sum
        // obeys the same bound empirically; record C = 1 + 1e-9.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c_bound = 1.0 + 1e-9;
        for _ in 0..300 {
            let q = rng.gen_range(1..=24u64);
            let d = 4u32;
            let c: Vec<i64> = (0..4).map(|_| rng.gen_range(-20..=20)).collect();
            let mu = rng.gen_range(-8..=8i64);
            let s = s_qc_brute(q, &c, mu, d).unwrap();
            let bound = c_bound * (q as f64).powf(d as f64 / 2.0 + 1.0);
            assert!(
                (s as f64).abs() <= bound,
                "|S| = {s} exceeds {bound} at q={q}"
            );
        }
    }

    #[test]
    fn partial_sum_m_values() {
        assert_eq!(partial_sum_m(1), 1.0);
        assert!((partial_sum_m(2) - 1.25).abs() < 1e-15);
        // log asymptotics, modest X for unit-test speed
        let x = 20_000u64;
        let c = constants();
        let resid = partial_sum_m(x) - (x as f64).ln() / c.zeta2;
        assert!(
            (resid - partial_sum_m_constant()).abs() < 2e-2,
            "residual {} vs {}",
            resid,
            partial_sum_m_constant()
        );
    }

    #[test]
    fn partial_sum_m_is_cauchy_in_log_scale() {
        let c = constants();
        let vals: Vec<f64> = [1_000u64, 2_000, 4_000, 8_000, 16_000]
            .iter()
            .map(|&x| partial_sum_m(x) - (x as f64).ln() / c.zeta2)
            .collect();
        let mut prev = f64::INFINITY;
        for w in vals.windows(2) {
            let diff = (w[1] - w[0]).abs();
            assert!(diff <= prev + 1e-3, "doubling differences not settling");
            prev = diff;
        }
    }

    #[test]
    fn partial_sum_a_asymptotics() {
        assert_eq!(partial_sum_a(1, 0), 1.0);
        let x = 3_000u64;
        let c = constants();
        let ratio = partial_sum_a(x, 0) / (x as f64).powi(4);
        assert!(
            (ratio - 1.0 / (4.0 * c.zeta2)).abs() < 0.01 / (4.0 * c.zeta2),
            "A(X)/X⁴ = {ratio}"
        );
        // ω ≠ 0: growth strictly slower than X⁴
        let a = partial_sum_a(x, 6).abs();
        assert!(a / (x as f64).powf(3.1) < 10.0, "A(X,6) too large: {a}");
    }

    #[test]
    fn zeta_ratio_sums() {
        assert_eq!(zeta_ratio_sum(6, 1).unwrap(), 1.0);
        let v6 = zeta_ratio_sum(6, 50_000).unwrap();
        let target6 = zeta::zeta(2.0) / zeta::zeta(3.0);
        assert!((v6 - target6).abs() < 1e-3, "{v6} vs {target6}");
        let v8 = zeta_ratio_sum(8, 10_000).unwrap();
        let target8 = zeta::zeta(3.0) / zeta::zeta(4.0);
        assert!((v8 - target8).abs() < 1e-3);
        assert!(zeta_ratio_sum(4, 10).is_err());
    }
}
