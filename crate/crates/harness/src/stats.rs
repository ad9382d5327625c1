/// Least-squares nondecreasing fit by pool-adjacent-violators.
pub fn isotonic_fit(values: &[f64]) -> Vec<f64> {
    // (sum, count) blocks, merged while they violate the order.
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (s1, n1) = blocks[blocks.len() - 1];
            let (s0, n0) = blocks[blocks.len() - 2];
            if s0 / n0 as f64 <= s1 / n1 as f64 {
                break;
            }
            blocks.pop();
            *blocks.last_mut().expect("two blocks") = (s0 + s1, n0 + n1);
        }
    }
    blocks.into_iter().flat_map(|(s, n)| std::iter::repeat_n(s / n as f64, n)).collect()
}

/// Total absolute distance from the best monotone fit, in the units of the
/// input (trials for success counts).
pub fn monotone_deviation(counts: &[usize], nondecreasing: bool) -> f64 {
    let sign = if nondecreasing { 1.0 } else { -1.0 };
    let v: Vec<f64> = counts.iter().map(|&c| sign * c as f64).collect();
    isotonic_fit(&v).iter().zip(&v).map(|(f, x)| (f - x).abs()).sum()
}

/// Mean and standard error of the mean.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotonic_pools_violators() {
        assert_eq!(isotonic_fit(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(isotonic_fit(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(isotonic_fit(&[]), Vec::<f64>::new());
    }

    #[test]
    fn deviation_counts_trials() {
        assert_eq!(monotone_deviation(&[0, 5, 10, 20], true), 0.0);
        assert_eq!(monotone_deviation(&[0, 6, 4, 20], true), 2.0);
        assert_eq!(monotone_deviation(&[20, 10, 0], false), 0.0);
        assert_eq!(monotone_deviation(&[20, 10, 12], false), 2.0);
    }

    #[test]
    fn summary_statistics() {
        let (m, se) = mean_and_std_error(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
