//! Small numerical kernels shared across modules.

pub(crate) const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Standard normal density.
pub(crate) fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / SQRT_2PI
}

/// `erfc(u / sqrt(2))`, i.e. twice the upper normal tail.
pub(crate) fn two_sided_tail(u: f64) -> f64 {
    libm::erfc(u / std::f64::consts::SQRT_2)
}

/// `(e^x - 1) / x`, accurate near zero.
pub(crate) fn exprel(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 + x / 2.0 + x * x / 6.0
    } else {
        x.exp_m1() / x
    }
}

/// `(e^x - 1 - x) / x^2`, accurate near zero.
pub(crate) fn exprel2(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // sum_k x^k / (k+2)!
        let mut term = 0.5;
        let mut sum = 0.5;
        for k in 1..16 {
            term *= x / (k as f64 + 2.0);
            sum += term;
        }
        sum
    } else {
        (x.exp_m1() - x) / (x * x)
    }
}

/// Variance of `x_t` for `dx = a x dt + dW`, `x_0 = 0`: `(e^{2at} - 1) / (2a)`.
pub(crate) fn ou_variance(a: f64, t: f64) -> f64 {
    t * exprel(2.0 * a * t)
}

/// Expected integrated squared error over a window of length `len` with no samples,
/// starting from zero error: `(e^{2aL} - 1 - 2aL) / (4a^2)`.
pub(crate) fn no_sample_distortion(a: f64, len: f64) -> f64 {
    len * len * exprel2(2.0 * a * len)
}

/// Pairwise summation with a fixed split, so the result depends only on the order of `xs`.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Mean and standard error of the mean of `xs`.
pub(crate) fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
///
/// Stops once the bracket width falls below `rel_tol * max(1, |x|)`.
pub(crate) fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= rel_tol * mid.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Vertex of the parabola through three equally spaced samples `(x - h, x, x + h)`.
///
/// Returns the abscissa offset from the middle node and the interpolated minimum.
pub(crate) fn parabolic_vertex(h: f64, f_left: f64, f_mid: f64, f_right: f64) -> (f64, f64) {
    let curv = f_left - 2.0 * f_mid + f_right;
    if curv <= 0.0 {
        return (0.0, f_mid);
    }
    let offset = 0.5 * h * (f_left - f_right) / curv;
    let offset = offset.clamp(-h, h);
    let value = f_mid - (f_left - f_right) * (f_left - f_right) / (8.0 * curv);
    (offset, value.min(f_mid))
}

/// Linear interpolation of `ys` sampled on the increasing grid `xs`, clamped at the ends.
pub(crate) fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let w = (x - x0) / (x1 - x0);
    ys[j - 1] + w * (ys[j] - ys[j - 1])
}

/// Solve a tridiagonal system in place (Thomas algorithm).
///
/// `lower[0]` and `upper[n - 1]` are ignored. `rhs` is overwritten with the solution.
pub(crate) fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) {
    let n = diag.len();
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exprel_matches_direct_form() {
        for &x in &[-2.0, -0.3, 1e-3, 0.5, 3.0] {
            assert!((exprel(x) - x.exp_m1() / x).abs() < 1e-12);
        }
        assert!((exprel(1e-9) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn exprel2_continuous_across_branch() {
        let below = exprel2(0.0999999);
        let above = exprel2(0.1000001);
        assert!((below - above).abs() < 1e-6);
        assert!((exprel2(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_sample_distortion_brownian_limit() {
        assert!((no_sample_distortion(0.0, 2.0) - 2.0).abs() < 1e-15);
        let a = 1.0f64;
        let direct = ((2.0 * a).exp() - 1.0 - 2.0 * a) / (4.0 * a * a);
        assert!((no_sample_distortion(a, 1.0) - direct).abs() < 1e-14);
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let direct: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - direct).abs() < 1e-12);
    }

    #[test]
    fn golden_section_finds_quadratic_minimum() {
        let (x, fx) = golden_section(|x| (x - 1.3) * (x - 1.3) + 2.0, 0.0, 4.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn parabola_vertex_exact_for_quadratics() {
        let f = |x: f64| 3.0 * (x - 0.2) * (x - 0.2) + 1.0;
        let (off, v) = parabolic_vertex(0.5, f(-0.5), f(0.0), f(0.5));
        assert!((off - 0.2).abs() < 1e-12);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_matches_dense_product() {
        let lower = [0.0, -1.0, -0.5, -1.0];
        let diag = [4.0, 4.0, 3.0, 5.0];
        let upper = [1.0, -2.0, 0.5, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = [0.0; 4];
        for i in 0..4 {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += lower[i] * x[i - 1];
            }
            if i < 3 {
                b[i] += upper[i] * x[i + 1];
            }
        }
        let mut scratch = Vec::new();
        solve_tridiagonal(&lower, &diag, &upper, &mut b, &mut scratch);
        for i in 0..4 {
            assert!((b[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_clamps() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 10.0, 0.0];
        assert_eq!(interp_linear(&xs, &ys, -1.0), 0.0);
        assert_eq!(interp_linear(&xs, &ys, 0.5), 5.0);
        assert_eq!(interp_linear(&xs, &ys, 3.0), 0.0);
    }
}
