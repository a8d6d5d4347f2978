/// Nearest odd sample count for a window of `seconds` at `fs` Hz; an even
/// rounding result is bumped up by one.
pub fn round_to_odd(seconds: f64, fs: f64) -> usize {
    let n = (seconds * fs).round().max(1.0) as usize;
    if n % 2 == 0 {
        n + 1
    } else {
        n
    }
}

/// Running median with an odd window `width`, edges padded by replicating
/// the first and last samples. Output length equals input length.
pub fn median_filter(signal: &[f64], width: usize) -> Vec<f64> {
    assert!(width % 2 == 1, "median window must be odd");
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let half = (width / 2) as isize;
    let at = |i: isize| signal[i.clamp(0, n as isize - 1) as usize];

    // Sorted copy of the current window; each step removes the sample that
    // slides out and inserts the one that slides in.
    let mut window: Vec<f64> = (-half..=half).map(at).collect();
    window.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(n);
    out.push(window[half as usize]);
    for i in 1..n as isize {
        let leaving = at(i - 1 - half);
        let pos = window.partition_point(|v| v.total_cmp(&leaving).is_lt());
        window.remove(pos);
        let entering = at(i + half);
        let pos = window.partition_point(|v| v.total_cmp(&entering).is_lt());
        window.insert(pos, entering);
        out.push(window[half as usize]);
    }
    out
}

/// Subtracts a two-stage median estimate of baseline wander: a `w1`-second
/// median removes the QRS complexes, a `w2`-second median over that removes
/// P and T waves, and what remains is the baseline.
pub fn remove_baseline(signal: &[f64], fs: f64, w1: f64, w2: f64) -> Vec<f64> {
    let stage1 = median_filter(signal, round_to_odd(w1, fs));
    let baseline = median_filter(&stage1, round_to_odd(w2, fs));
    signal.iter().zip(&baseline).map(|(s, b)| s - b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct O(n·w log w) running median.
    fn brute_median(x: &[f64], width: usize) -> Vec<f64> {
        let half = (width / 2) as isize;
        let n = x.len() as isize;
        (0..n)
            .map(|i| {
                let mut w: Vec<f64> = (i - half..=i + half).map(|j| x[j.clamp(0, n - 1) as usize]).collect();
                w.sort_by(f64::total_cmp);
                w[width / 2]
            })
            .collect()
    }

    #[test]
    fn window_rounding() {
        assert_eq!(round_to_odd(0.2, 360.0), 73);
        assert_eq!(round_to_odd(0.6, 360.0), 217);
        assert_eq!(round_to_odd(0.2, 250.0), 51);
        assert_eq!(round_to_odd(0.001, 10.0), 1);
    }

    #[test]
    fn constant_signal_has_no_residual() {
        let out = remove_baseline(&[3.25; 500], 360.0, 0.2, 0.6);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ramp_matches_brute_force() {
        let ramp: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let s1 = brute_median(&ramp, round_to_odd(0.2, 360.0));
        let s2 = brute_median(&s1, round_to_odd(0.6, 360.0));
        let expected: Vec<f64> = ramp.iter().zip(&s2).map(|(a, b)| a - b).collect();
        assert_eq!(remove_baseline(&ramp, 360.0, 0.2, 0.6), expected);
    }

    #[test]
    fn short_signals() {
        assert_eq!(median_filter(&[], 5), Vec::<f64>::new());
        assert_eq!(median_filter(&[4.0], 5), vec![4.0]);
        assert_eq!(median_filter(&[1.0, 9.0], 3), vec![1.0, 9.0]);
    }

    proptest! {
        #[test]
        fn median_matches_brute_force(
            x in prop::collection::vec(-1000i32..1000, 1..300),
            half in 0usize..40,
        ) {
            let x: Vec<f64> = x.into_iter().map(|v| v as f64 / 8.0).collect();
            let w = 2 * half + 1;
            prop_assert_eq!(median_filter(&x, w), brute_median(&x, w));
        }

        #[test]
        fn offset_invariance(
            x in prop::collection::vec(-1000i32..1000, 1..400),
            k in -64i32..64,
        ) {
            // Dyadic values keep the comparison exact.
            let x: Vec<f64> = x.into_iter().map(|v| v as f64 / 4.0).collect();
            let shifted: Vec<f64> = x.iter().map(|v| v + k as f64).collect();
            prop_assert_eq!(
                remove_baseline(&x, 100.0, 0.2, 0.6),
                remove_baseline(&shifted, 100.0, 0.2, 0.6)
            );
        }
    }
}
