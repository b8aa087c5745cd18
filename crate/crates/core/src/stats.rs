//! Reduction helpers shared by the ensemble runner and the drivers.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut s = CompensatedSum::default();
    xs.iter().for_each(|&x| s.add(x));
    s.value() / xs.len() as f64
}

/// Mean and batch-means standard error of a correlated series.
///
/// The series is cut into `batches` contiguous chunks of near-equal length
/// (the first `len % batches` chunks get one extra sample). Returns
/// `(mean, stderr)`; the error is NaN when fewer than two batches fit.
pub fn batch_means(series: &[f64], batches: usize) -> (f64, f64) {
    let mean = compensated_mean(series);
    let b = batches.min(series.len());
    if b < 2 {
        return (mean, f64::NAN);
    }
    let base = series.len() / b;
    let extra = series.len() % b;
    let mut start = 0;
    let mut batch_means = Vec::with_capacity(b);
    for k in 0..b {
        let len = base + usize::from(k < extra);
        batch_means.push(compensated_mean(&series[start..start + len]));
        start += len;
    }
    let grand = compensated_mean(&batch_means);
    let mut ss = CompensatedSum::default();
    for m in &batch_means {
        ss.add((m - grand) * (m - grand));
    }
    let var = ss.value() / (b as f64 - 1.0);
    (mean, (var / b as f64).sqrt())
}

/// SplitMix64 finalizer: derives decorrelated child seeds from (seed, index).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
