//! Test oracles shared by unit and integration tests: adaptive quadrature and
//! the Kolmogorov-Smirnov statistic. Nothing here is used by library code.
#![allow(dead_code)]

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Two-sided KS critical constant at the 0.001 level, `sqrt(ln(2 / 0.001) / 2)`.
pub const KS_CRIT_001: f64 = 1.949_466_186_580_061;

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = kronrod(f, a, b);
    if err <= tol.max(1e-15 * k.abs()) || depth >= 60 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth + 1) + adapt(f, m, b, 0.5 * tol, depth + 1)
}

/// Adaptive Gauss-Kronrod (7/15) integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    adapt(&f, a, b, tol, 0)
}

/// Integral of `f` over `[a, inf)` through `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t;
        let v = f(a + t / s) / (s * s);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // the map compresses the far tail near t = 1; split to help the recursion
    let cuts = [0.0, 0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999, 1.0];
    cuts.windows(2)
        .map(|w| adapt(&g, w[0], w[1], tol / 8.0, 0))
        .sum()
}

/// Two-sided Kolmogorov-Smirnov statistic of `draws` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(mut draws: Vec<f64>, cdf: F) -> f64 {
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = draws.len() as f64;
    draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

/// Normalized moments `(E[X], E[X^2])` of the positive density proportional to
/// `exp(log_kernel(x))`, by quadrature. `mode_hint` should sit where the
/// kernel is large; it anchors the log-shift and splits the range.
pub fn positive_moments<F: Fn(f64) -> f64>(log_kernel: F, mode_hint: f64) -> (f64, f64) {
    let shift = log_kernel(mode_hint);
    let k = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            (log_kernel(x) - shift).exp()
        }
    };
    let z = integrate(&k, 0.0, mode_hint, 1e-13) + integrate_to_infinity(&k, mode_hint, 1e-13);
    let m1 = integrate(|x| x * k(x), 0.0, mode_hint, 1e-13)
        + integrate_to_infinity(|x| x * k(x), mode_hint, 1e-13);
    let m2 = integrate(|x| x * x * k(x), 0.0, mode_hint, 1e-13)
        + integrate_to_infinity(|x| x * x * k(x), mode_hint, 1e-13);
    (m1 / z, m2 / z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_on_known_integrals() {
        let v = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-14);
        assert!((v - 2.0).abs() < 1e-13);
        let g = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, 1e-14);
        assert!((g - 1.0).abs() < 1e-12);
        let n = integrate_to_infinity(|x: f64| (-0.5 * x * x).exp(), 0.0, 1e-14);
        assert!((n - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
    }
}
