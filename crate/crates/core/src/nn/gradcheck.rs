use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct GradCheckOptions {
    pub epsilon: f64,
    /// Coordinates sampled; all of them when the input is smaller.
    pub max_coords: usize,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            max_coords: 200,
            seed: 0,
        }
    }
}

/// `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares `analytic` (the claimed gradient of `f` at `theta`) with central
/// differences `(f(θ+εe_i) - f(θ-εe_i)) / 2ε` and returns the largest
/// relative error over the checked coordinates.
pub fn grad_check<F>(mut f: F, theta: &[f64], analytic: &[f64], opts: &GradCheckOptions) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    grad_check_where(|v| Some(f(v)), theta, analytic, opts).worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub worst: f64,
    pub checked: usize,
    /// Coordinates passed over because a probe returned `None`.
    pub skipped: usize,
}

/// Like [`grad_check`], for functions that are only piecewise smooth. `f`
/// returns `None` when a probe point is not on the same smooth piece as
/// `theta`; that coordinate is dropped and another drawn in its place, until
/// `max_coords` have been checked or none are left.
pub fn grad_check_where<F>(mut f: F, theta: &[f64], analytic: &[f64], opts: &GradCheckOptions) -> GradCheckReport
where
    F: FnMut(&[f64]) -> Option<f64>,
{
    assert_eq!(theta.len(), analytic.len(), "gradient length differs from parameter length");
    let n = theta.len();
    let order = sample(&mut ChaCha8Rng::seed_from_u64(opts.seed), n, n);
    let mut probe = theta.to_vec();
    let mut report = GradCheckReport { worst: 0.0, checked: 0, skipped: 0 };
    for i in order {
        if report.checked == opts.max_coords {
            break;
        }
        let orig = probe[i];
        probe[i] = orig + opts.epsilon;
        let up = f(&probe);
        probe[i] = orig - opts.epsilon;
        let down = up.and_then(|_| f(&probe));
        probe[i] = orig;
        let (Some(up), Some(down)) = (up, down) else {
            report.skipped += 1;
            continue;
        };
        let numeric = (up - down) / (2.0 * opts.epsilon);
        report.worst = report.worst.max(relative_error(analytic[i], numeric));
        report.checked += 1;
    }
    report
}
