//! Quadrature building blocks: Gauss–Legendre panels, an adaptive
//! Gauss–Kronrod rule, and compensated summation.

use num_complex::Complex64;

/// Compensated (Kahan) accumulator for long partial sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence. Accurate to machine precision for n up to a few
/// hundred.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed-order panel rule: integrates `f` over `[a, b]` split into `panels`
/// equal panels with an `order`-point Gauss–Legendre rule on each.
pub fn panel_integrate<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
    mut f: F,
) -> f64 {
    let (xs, ws) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = Kahan::new();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (x, w) in xs.iter().zip(&ws) {
            acc.add(w * 0.5 * h * f(mid + 0.5 * h * x));
        }
    }
    acc.value()
}

/// Same panel rule for complex integrands.
pub fn panel_integrate_c<F: FnMut(f64) -> Complex64>(
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
    mut f: F,
) -> Complex64 {
    let (xs, ws) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut re = Kahan::new();
    let mut im = Kahan::new();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (x, w) in xs.iter().zip(&ws) {
            let v = f(mid + 0.5 * h * x) * (w * 0.5 * h);
            re.add(v.re);
            im.add(v.im);
        }
    }
    Complex64::new(re.value(), im.value())
}

// Gauss-Kronrod 7-15 pair (nodes symmetric; only the nonnegative half stored).
const GK_XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const GK_WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const GK_WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15_c<F: FnMut(f64) -> Complex64>(a: f64, b: f64, f: &mut F) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * GK_WG[3];
    let mut res_k = fc * GK_WGK[7];
    for j in 0..7 {
        let x = half * GK_XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        res_k += (f1 + f2) * GK_WGK[j];
        if j % 2 == 1 {
            res_g += (f1 + f2) * GK_WG[j / 2];
        }
    }
    let err = ((res_k - res_g) * half).norm();
    (res_k * half, err)
}

/// Adaptive Gauss–Kronrod integration of a complex integrand, recursive
/// bisection until the local error estimate meets the budget.
pub fn adaptive_gk_c<F: FnMut(f64) -> Complex64>(
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
    f: &mut F,
) -> (Complex64, f64) {
    fn rec<F: FnMut(f64) -> Complex64>(
        a: f64,
        b: f64,
        tol: f64,
        depth: u32,
        f: &mut F,
    ) -> (Complex64, f64) {
        let (v, e) = gk15_c(a, b, f);
        if e <= tol || depth == 0 {
            return (v, e);
        }
        let mid = 0.5 * (a + b);
        let (v1, e1) = rec(a, mid, 0.5 * tol, depth - 1, f);
        let (v2, e2) = rec(mid, b, 0.5 * tol, depth - 1, f);
        (v1 + v2, e1 + e2)
    }
    rec(a, b, abs_tol, max_depth, f)
}

pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
    mut f: F,
) -> (f64, f64) {
    let (v, e) = adaptive_gk_c(a, b, abs_tol, max_depth, &mut |x| {
        Complex64::new(f(x), 0.0)
    });
    (v.re, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_nodes_integrate_polynomials_exactly() {
        // order-n GL is exact through degree 2n-1
        let (xs, ws) = gauss_legendre(5);
        let val: f64 = xs
            .iter()
            .zip(&ws)
            .map(|(x, w)| w * x.powi(8))
            .sum();
        assert!((val - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn panel_rule_smooth_integrand() {
        let v = panel_integrate(0.0, 1.0, 8, 7, |x| (x * x).exp());
        let exact = 1.4626517459071816; // ∫_0^1 e^{x²} dx
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_gk_oscillatory() {
        let (v, _) = adaptive_gk(0.0, 10.0, 1e-12, 40, |x| (20.0 * x).sin() * (-x).exp());
        let exact =
            (20.0 - (-10.0_f64).exp() * ((200.0_f64).sin() + 20.0 * (200.0_f64).cos())) / 401.0;
        assert!((v - exact).abs() < 1e-10, "got {v}, want {exact}");
    }

    #[test]
    fn kahan_beats_naive_on_adversarial_sum() {
        let mut k = Kahan::new();
        k.add(1.0);
        for _ in 0..10_000_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-9)).abs() < 1e-15);
    }
}
