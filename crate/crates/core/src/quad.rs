//! One-dimensional numerics shared by the rest of the crate: adaptive
//! Gauss–Kronrod quadrature, composite Simpson and golden-section search.

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];

// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive G7K15 integration of `f` over `[a, b]` to absolute-or-relative
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = gk15(&f, a, b);
    let mut stack = vec![(a, b, whole, err, 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, value, err, depth)) = stack.pop() {
        let scale = tol.max(tol * value.abs());
        if err <= scale || depth >= 40 || hi - lo < 1e-14 * (1.0 + lo.abs()) {
            total += value;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (left, el) = gk15(&f, lo, mid);
        let (right, er) = gk15(&f, mid, hi);
        stack.push((lo, mid, left, el, depth + 1));
        stack.push((mid, hi, right, er, depth + 1));
    }
    total
}

/// Composite Simpson rule with `panels` panels (rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2) + panels % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimizer of a unimodal `f` on `[a, b]`.
///
/// Returns `(x, f(x))`. Ties between the two probes move the bracket to the
/// right, so flat stretches resolve toward the larger argument.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while b - a > xtol && iter < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    // Compare the bracket ends as well; the minimum may sit on a boundary.
    let mut best = (d, fd);
    for (x, fx) in [(c, fc), (a, f(a)), (b, f(b))] {
        if fx < best.1 || (fx == best.1 && x > best.0) {
            best = (x, fx);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomial_and_exponential() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-13);
        assert!((v - 0.0).abs() < 1e-12);
        let v = integrate(f64::exp, 0.0, 1.0, 1e-13);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn gauss_kronrod_endpoint_singularity() {
        // ∫_0^1 sqrt(t) dt = 2/3
        let v = integrate(f64::sqrt, 0.0, 1.0, 1e-12);
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x, 0.0, 3.0, 4);
        assert!((v - 81.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_interior_and_boundary() {
        let (x, fx) = golden_section(|x| (x - 1.3).powi(2), 0.0, 4.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-6);
        assert!(fx < 1e-12);
        let (x, _) = golden_section(|x| -x, 0.0, 2.0, 1e-10);
        assert_eq!(x, 2.0);
    }
}
