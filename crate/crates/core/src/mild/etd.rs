//! Exponential-time-differencing weights for a linear-in-time source.
//!
//! Over one step of length `h` with `z = lambda h`,
//! `int_0^h e^{-lambda (h - s)} g(s) ds = h psi(z) g_0 + h (phi1(z) - psi(z)) g_1`
//! when `g` interpolates linearly between `g_0` and `g_1`.

/// `(1 - e^{-z}) / z`.
pub(crate) fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        series(z, |k| 1.0 / factorial(k + 1))
    } else {
        -(-z).exp_m1() / z
    }
}

/// `(1 - e^{-z}(1 + z)) / z^2`.
pub(crate) fn psi(z: f64) -> f64 {
    if z.abs() < 0.1 {
        series(z, |k| (k + 1) as f64 / factorial(k + 2))
    } else {
        (1.0 - (-z).exp() * (1.0 + z)) / (z * z)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `sum_k c_k (-z)^k` for the first 12 terms.
fn series(z: f64, c: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for k in (0..12).rev() {
        acc = acc * (-z) + c(k);
    }
    acc
}

/// Per-mode step factors for a fixed step `h`.
#[derive(Clone, Debug)]
pub(crate) struct EtdWeights {
    pub decay: Vec<f64>,
    pub w_old: Vec<f64>,
    pub w_new: Vec<f64>,
}

impl EtdWeights {
    pub fn new(lambda: &[f64], h: f64) -> EtdWeights {
        let mut decay = Vec::with_capacity(lambda.len());
        let mut w_old = Vec::with_capacity(lambda.len());
        let mut w_new = Vec::with_capacity(lambda.len());
        for &l in lambda {
            let z = l * h;
            let ps = psi(z);
            decay.push((-z).exp());
            w_old.push(h * ps);
            w_new.push(h * (phi1(z) - ps));
        }
        EtdWeights { decay, w_old, w_new }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson on a fine grid.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn weights_match_direct_integration() {
        for &lambda in &[0.0, 1e-6, 0.3, 2.0, 45.0, 900.0, 1e5] {
            let h = 0.02;
            let w = EtdWeights::new(&[lambda], h);
            let k = |s: f64| (-lambda * (h - s)).exp();
            let old = simpson(|s| k(s) * (1.0 - s / h), 0.0, h, 2_000_000);
            let new = simpson(|s| k(s) * s / h, 0.0, h, 2_000_000);
            assert!((w.w_old[0] - old).abs() < 1e-12 * (1.0 + old.abs() / h) * h, "{lambda}");
            assert!((w.w_new[0] - new).abs() < 1e-12 * (1.0 + new.abs() / h) * h, "{lambda}");
        }
    }

    #[test]
    fn series_and_closed_forms_agree_at_the_switch() {
        let z = 1e-3f64;
        assert!((series(z, |k| 1.0 / factorial(k + 1)) + (-z).exp_m1() / z).abs() < 1e-15);
        // the closed form of psi loses ~z^2 relative accuracy, so switch late
        let z = 0.1f64;
        let closed_psi = (1.0 - (-z).exp() * (1.0 + z)) / (z * z);
        assert!((series(z, |k| (k + 1) as f64 / factorial(k + 2)) - closed_psi).abs() < 1e-13);
    }

    #[test]
    fn zero_rate_is_trapezoid() {
        let w = EtdWeights::new(&[0.0], 0.5);
        assert_eq!(w.decay[0], 1.0);
        assert!((w.w_old[0] - 0.25).abs() < 1e-16);
        assert!((w.w_new[0] - 0.25).abs() < 1e-16);
    }
}
