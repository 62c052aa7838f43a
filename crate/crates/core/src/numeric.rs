//! Small scalar search helpers shared by the solvers and verifiers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmin, min)`; the endpoints are included in the comparison.
pub fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
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
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    [(c, fc), (d, fd), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold((c, fc), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Golden-section search for a maximum; see [`golden_min`].
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let (x, v) = golden_min(|t| -f(t), lo, hi, iters);
    (x, -v)
}

/// Indices of the cyclic local minima of `values`, sorted by value.
pub fn cyclic_local_minima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n)
        .filter(|&i| {
            let prev = values[(i + n - 1) % n];
            let next = values[(i + 1) % n];
            values[i] <= prev && values[i] <= next
        })
        .collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_smooth_and_kinked_minima() {
        let (x, v) = golden_min(|t| (t - 0.3).powi(2) + 1.0, -1.0, 2.0, 200);
        assert!((x - 0.3).abs() < 1e-7 && (v - 1.0).abs() < 1e-14);
        let (x, _) = golden_min(|t| (t - 0.123).abs(), 0.0, 1.0, 200);
        assert!((x - 0.123).abs() < 1e-12);
        let (x, v) = golden_max(|t| -(t - 0.7).abs(), 0.0, 1.0, 200);
        assert!((x - 0.7).abs() < 1e-12 && v.abs() < 1e-12);
    }

    #[test]
    fn golden_prefers_endpoints_when_monotone() {
        let (x, v) = golden_min(|t| t, 2.0, 3.0, 100);
        assert_eq!((x, v), (2.0, 2.0));
    }

    #[test]
    fn local_minima_wrap_around() {
        let v = [0.5, 1.0, 2.0, 0.1, 3.0, 0.4];
        assert_eq!(cyclic_local_minima(&v), vec![3, 5]);
        let w = [0.2, 1.0, 0.5, 0.9];
        assert_eq!(cyclic_local_minima(&w), vec![0, 2]);
    }
}
