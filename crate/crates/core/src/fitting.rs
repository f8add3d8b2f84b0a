//! Least-squares fitting of the path-cost parameters from per-path samples,
//! plus the two model-quality metrics (coefficient of determination and
//! tie-corrected rank correlation).

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::surrogate::SurrogateModel;

/// One measured path: depth, taken-branch count, and observed cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub depth: usize,
    pub taken: usize,
    pub wcet: f64,
}

impl PathSample {
    pub fn new(depth: usize, taken: usize, wcet: f64) -> Self {
        PathSample { depth, taken, wcet }
    }
}

/// Fitted model together with its in-sample quality metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: SurrogateModel,
    pub r2: f64,
    pub kendall_tau: f64,
    pub n_samples: usize,
}

#[derive(Serialize, Deserialize)]
struct FitResultFile {
    depth: usize,
    sigma: f64,
    delta: f64,
    gamma: f64,
    r2: f64,
    kendall_tau: f64,
    n: usize,
}

impl FitResult {
    pub fn to_json(&self) -> String {
        let file = FitResultFile {
            depth: self.model.target_depth,
            sigma: self.model.sigma,
            delta: self.model.delta,
            gamma: self.model.gamma,
            r2: self.r2,
            kendall_tau: self.kendall_tau,
            n: self.n_samples,
        };
        let mut out = serde_json::to_string_pretty(&file).expect("fit result serialization");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let file: FitResultFile = serde_json::from_str(text)?;
        Ok(FitResult {
            model: SurrogateModel::new(file.depth, file.sigma, file.delta, file.gamma),
            r2: file.r2,
            kendall_tau: file.kendall_tau,
            n_samples: file.n,
        })
    }
}

/// Smallest pivot (relative to the matrix scale) accepted before the normal
/// equations are declared rank deficient.
const RANK_TOLERANCE: f64 = 1e-9;

/// Ordinary least squares for `wcet ~ sigma + delta * depth + gamma * taken`.
///
/// When every sample shares one depth there is nothing for the per-edge term
/// to explain, so `delta` is fixed to 0 and only the offset and the
/// taken-branch cost are fitted. Any other rank deficiency (for example a
/// taken count that is an affine function of depth) is an error.
///
/// The produced model's target depth is the largest depth among the samples;
/// callers fitting for a specific configured depth may overwrite it.
pub fn fit(samples: &[PathSample]) -> Result<FitResult, Error> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples { got: samples.len(), need: 3 });
    }
    let n = samples.len() as f64;
    let depth_constant = samples.iter().all(|s| s.depth == samples[0].depth);

    let (sigma, delta, gamma) = if depth_constant {
        let taken_constant = samples.iter().all(|s| s.taken == samples[0].taken);
        if taken_constant {
            return Err(Error::Underdetermined);
        }
        // Fit wcet ~ sigma + gamma * taken.
        let st: f64 = samples.iter().map(|s| s.taken as f64).sum();
        let stt: f64 = samples.iter().map(|s| (s.taken as f64).powi(2)).sum();
        let sy: f64 = samples.iter().map(|s| s.wcet).sum();
        let sty: f64 = samples.iter().map(|s| s.taken as f64 * s.wcet).sum();
        let solution = solve(&mut [[n, st], [st, stt]], &mut [sy, sty])?;
        (solution[0], 0.0, solution[1])
    } else {
        let sd: f64 = samples.iter().map(|s| s.depth as f64).sum();
        let st: f64 = samples.iter().map(|s| s.taken as f64).sum();
        let sdd: f64 = samples.iter().map(|s| (s.depth as f64).powi(2)).sum();
        let stt: f64 = samples.iter().map(|s| (s.taken as f64).powi(2)).sum();
        let sdt: f64 = samples.iter().map(|s| s.depth as f64 * s.taken as f64).sum();
        let sy: f64 = samples.iter().map(|s| s.wcet).sum();
        let sdy: f64 = samples.iter().map(|s| s.depth as f64 * s.wcet).sum();
        let sty: f64 = samples.iter().map(|s| s.taken as f64 * s.wcet).sum();
        let solution =
            solve(&mut [[n, sd, st], [sd, sdd, sdt], [st, sdt, stt]], &mut [sy, sdy, sty])?;
        (solution[0], solution[1], solution[2])
    };

    let target_depth = samples.iter().map(|s| s.depth).max().unwrap_or(0);
    let model = SurrogateModel::new(target_depth, sigma, delta, gamma);
    let predicted: Vec<f64> =
        samples.iter().map(|s| sigma + model.path_value(s.depth, s.taken)).collect();
    let actual: Vec<f64> = samples.iter().map(|s| s.wcet).collect();
    // path_value excludes sigma, so fold it in above; recompute cleanly here.
    let r2 = r_squared(&predicted, &actual)?;
    let kendall = kendall_tau(&predicted, &actual)?;
    Ok(FitResult { model, r2, kendall_tau: kendall, n_samples: samples.len() })
}

/// Gaussian elimination with partial pivoting on a small symmetric system.
/// Rejects pivots below `RANK_TOLERANCE` relative to the matrix scale.
fn solve<const N: usize>(
    matrix: &mut [[f64; N]; N],
    rhs: &mut [f64; N],
) -> Result<[f64; N], Error> {
    let scale =
        matrix.iter().flat_map(|row| row.iter()).fold(0.0f64, |acc, &v| acc.max(v.abs())).max(1.0);
    for col in 0..N {
        let pivot_row = (col..N)
            .max_by(|&a, &b| matrix[a][col].abs().total_cmp(&matrix[b][col].abs()))
            .expect("non-empty range");
        if matrix[pivot_row][col].abs() < RANK_TOLERANCE * scale {
            return Err(Error::Underdetermined);
        }
        matrix.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let pivot = matrix[col];
        for row in col + 1..N {
            let factor = matrix[row][col] / pivot[col];
            for (entry, pivot_entry) in matrix[row][col..].iter_mut().zip(&pivot[col..]) {
                *entry -= factor * pivot_entry;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut solution = [0.0; N];
    for col in (0..N).rev() {
        let mut acc = rhs[col];
        for k in col + 1..N {
            acc -= matrix[col][k] * solution[k];
        }
        solution[col] = acc / matrix[col][col];
    }
    Ok(solution)
}

/// Coefficient of determination `1 - SS_res / SS_tot`, with `SS_tot` about
/// the mean of `actual`. Negative when the prediction is worse than the
/// mean. On zero total variance: 1 for a perfect fit, 0 otherwise.
pub fn r_squared(predicted: &[f64], actual: &[f64]) -> Result<f64, Error> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch { left: predicted.len(), right: actual.len() });
    }
    if actual.is_empty() {
        return Err(Error::Empty);
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = predicted.iter().zip(actual).map(|(yhat, y)| (y - yhat).powi(2)).sum();
    if ss_tot == 0.0 {
        return Ok(if ss_res == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(1.0 - ss_res / ss_tot)
}

/// Tie-corrected rank correlation (the tau-b variant):
///
/// ```text
/// tau_b = (C - D) / sqrt((n0 - n1) * (n0 - n2))
/// ```
///
/// with `C`/`D` the concordant/discordant pair counts, `n0 = n(n-1)/2`, and
/// `n1`/`n2` the pair counts tied in `a`/`b`. Path samples contain many tied
/// values, so the tie correction matters. Returns 0 when either input is
/// constant. Discordant pairs are counted as merge-sort inversions, so large
/// sample sets stay cheap.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64, Error> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::TooShort { got: n });
    }

    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));

    let mut tied_a = 0u64;
    let mut tied_both = 0u64;
    let mut run_a = 1u64;
    let mut run_ab = 1u64;
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_a += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_ab += 1;
            } else {
                tied_both += run_ab * (run_ab - 1) / 2;
                run_ab = 1;
            }
        } else {
            tied_a += run_a * (run_a - 1) / 2;
            run_a = 1;
            tied_both += run_ab * (run_ab - 1) / 2;
            run_ab = 1;
        }
    }
    tied_a += run_a * (run_a - 1) / 2;
    tied_both += run_ab * (run_ab - 1) / 2;

    let mut b_sorted: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = count_inversions(&mut b_sorted);

    let mut tied_b = 0u64;
    let mut run_b = 1u64;
    for i in 1..n {
        if b_sorted[i] == b_sorted[i - 1] {
            run_b += 1;
        } else {
            tied_b += run_b * (run_b - 1) / 2;
            run_b = 1;
        }
    }
    tied_b += run_b * (run_b - 1) / 2;

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let denominator = ((n0 - tied_a) as f64) * ((n0 - tied_b) as f64);
    if denominator <= 0.0 {
        return Ok(0.0);
    }
    // C + D = n0 - n1 - n2 + tied_both; D = swaps.
    let concordant_minus_discordant =
        (n0 + tied_both - tied_a - tied_b) as i128 - 2 * swaps as i128;
    let tau = concordant_minus_discordant as f64 / denominator.sqrt();
    Ok(tau.clamp(-1.0, 1.0))
}

/// Bottom-up merge sort counting strict inversions; equal elements are kept
/// stable and do not count.
fn count_inversions(values: &mut [f64]) -> u64 {
    let n = values.len();
    let mut buffer = vec![0.0f64; n];
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || values[i] <= values[j]) {
                    buffer[k] = values[i];
                    i += 1;
                } else {
                    swaps += (mid - i) as u64;
                    buffer[k] = values[j];
                    j += 1;
                }
                k += 1;
            }
            start = end;
        }
        values[..].copy_from_slice(&buffer);
        width *= 2;
    }
    swaps
}

/// Parses the `depth,taken,wcet` sample CSV. Malformed rows are hard errors
/// with 1-based line numbers; silent row skipping would corrupt fits.
/// A completely empty input yields zero samples.
pub fn parse_samples_csv(text: &str) -> Result<Vec<PathSample>, Error> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "depth,taken,wcet" => {}
        Some((_, header)) => {
            return Err(Error::Csv {
                line: 1,
                reason: format!("expected header 'depth,taken,wcet', got '{}'", header.trim()),
            })
        }
        None => return Ok(Vec::new()),
    }
    let mut samples = Vec::new();
    for (index, line) in lines {
        let line_no = index + 1;
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Csv {
                line: line_no,
                reason: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let depth: usize = fields[0].trim().parse().map_err(|_| Error::Csv {
            line: line_no,
            reason: format!("bad depth '{}'", fields[0]),
        })?;
        let taken: usize = fields[1].trim().parse().map_err(|_| Error::Csv {
            line: line_no,
            reason: format!("bad taken count '{}'", fields[1]),
        })?;
        let wcet: f64 = fields[2].trim().parse().map_err(|_| Error::Csv {
            line: line_no,
            reason: format!("bad wcet '{}'", fields[2]),
        })?;
        if taken > depth {
            return Err(Error::Csv {
                line: line_no,
                reason: format!("taken count {taken} exceeds depth {depth}"),
            });
        }
        if !wcet.is_finite() || wcet <= 0.0 {
            return Err(Error::Csv {
                line: line_no,
                reason: format!("wcet must be a positive finite number, got {wcet}"),
            });
        }
        samples.push(PathSample { depth, taken, wcet });
    }
    Ok(samples)
}

pub fn samples_to_csv(samples: &[PathSample]) -> String {
    let mut out = String::from("depth,taken,wcet\n");
    for s in samples {
        out.push_str(&format!("{},{},{}\n", s.depth, s.taken, s.wcet));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, eps: f64) -> bool {
        (a - b).abs() <= eps
    }

    #[test]
    fn fit_recovers_noiseless_parameters() {
        let (sigma, delta, gamma) = (240.0, 26.0, 11.0);
        let mut samples = Vec::new();
        for depth in 2..=12usize {
            for taken in 0..=depth {
                let wcet = sigma + delta * depth as f64 + gamma * taken as f64;
                samples.push(PathSample::new(depth, taken, wcet));
            }
        }
        let fit = fit(&samples).unwrap();
        assert!(close(fit.model.sigma, sigma, 1e-6 * sigma));
        assert!(close(fit.model.delta, delta, 1e-6 * delta));
        assert!(close(fit.model.gamma, gamma, 1e-6 * gamma));
        assert!(close(fit.r2, 1.0, 1e-9));
        assert_eq!(fit.kendall_tau, 1.0);
        assert_eq!(fit.model.target_depth, 12);
    }

    #[test]
    fn fit_depth_constant_fixes_delta_to_zero() {
        let mut samples = Vec::new();
        for taken in 0..=2usize {
            for _ in 0..3 {
                samples.push(PathSample::new(2, taken, 269.75 + 5.0 * taken as f64));
            }
        }
        let fit = fit(&samples).unwrap();
        assert_eq!(fit.model.delta, 0.0);
        assert!(close(fit.model.sigma, 269.75, 1e-9));
        assert!(close(fit.model.gamma, 5.0, 1e-9));
    }

    #[test]
    fn fit_constant_response_zeroes_slopes() {
        let mut samples = Vec::new();
        for depth in 1..=4usize {
            for taken in 0..=depth {
                samples.push(PathSample::new(depth, taken, 100.0));
            }
        }
        let fit = fit(&samples).unwrap();
        assert!(close(fit.model.sigma, 100.0, 1e-9));
        assert!(close(fit.model.delta, 0.0, 1e-9));
        assert!(close(fit.model.gamma, 0.0, 1e-9));
        assert_eq!(fit.kendall_tau, 0.0);
    }

    #[test]
    fn fit_rejects_collinear_design() {
        // taken == depth on every sample: gamma and delta are not separable.
        let samples: Vec<PathSample> =
            (1..=6).map(|d| PathSample::new(d, d, 10.0 + 3.0 * d as f64)).collect();
        assert_eq!(fit(&samples).unwrap_err(), Error::Underdetermined);
    }

    #[test]
    fn fit_rejects_too_few_samples() {
        let samples = vec![PathSample::new(1, 0, 10.0); 2];
        assert_eq!(fit(&samples).unwrap_err(), Error::TooFewSamples { got: 2, need: 3 });
    }

    #[test]
    fn fit_rejects_fully_constant_design() {
        let samples = vec![PathSample::new(3, 1, 10.0); 5];
        assert_eq!(fit(&samples).unwrap_err(), Error::Underdetermined);
    }

    #[test]
    fn r_squared_perfect_and_mean_fits() {
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(r_squared(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn r_squared_hand_case() {
        // SS_res = 1, SS_tot = 14/3, so R^2 = 1 - 3/14.
        let got = r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!(close(got, 1.0 - 3.0 / 14.0, 1e-12));
    }

    #[test]
    fn r_squared_error_cases() {
        assert_eq!(
            r_squared(&[1.0], &[1.0, 2.0]).unwrap_err(),
            Error::LengthMismatch { left: 1, right: 2 }
        );
        assert_eq!(r_squared(&[], &[]).unwrap_err(), Error::Empty);
    }

    #[test]
    fn kendall_endpoints() {
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn kendall_hand_case() {
        // Pairs of [1,2,4,3] vs [1,2,3,4]: 5 concordant, 1 discordant.
        let got = kendall_tau(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 4.0, 3.0]).unwrap();
        assert!(close(got, 4.0 / 6.0, 1e-12));
    }

    #[test]
    fn kendall_constant_input_is_zero() {
        assert_eq!(kendall_tau(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap(), 0.0);
    }

    #[test]
    fn kendall_error_cases() {
        assert_eq!(
            kendall_tau(&[1.0], &[1.0, 2.0]).unwrap_err(),
            Error::LengthMismatch { left: 1, right: 2 }
        );
        assert_eq!(kendall_tau(&[1.0], &[1.0]).unwrap_err(), Error::TooShort { got: 1 });
    }

    #[test]
    fn kendall_with_ties_matches_direct_count() {
        // a has a tie, b has a tie; checked against the quadratic definition.
        let a = [1.0, 1.0, 2.0, 3.0];
        let b = [2.0, 1.0, 1.0, 3.0];
        // Pairs: (0,1) tied-a; (0,2) discordant; (0,3) concordant;
        // (1,2) tied-b; (1,3) concordant; (2,3) concordant.
        // C=3, D=1, n0=6, n1=1, n2=1 => tau = 2 / 5.
        let got = kendall_tau(&a, &b).unwrap();
        assert!(close(got, 2.0 / 5.0, 1e-12));
    }

    #[test]
    fn csv_round_trip() {
        let samples = vec![PathSample::new(2, 1, 300.5), PathSample::new(3, 0, 310.25)];
        let text = samples_to_csv(&samples);
        assert!(text.starts_with("depth,taken,wcet\n"));
        assert_eq!(parse_samples_csv(&text).unwrap(), samples);
    }

    #[test]
    fn csv_rejects_malformed_rows() {
        let text = "depth,taken,wcet\n2,3,100.0\n";
        let err = parse_samples_csv(text).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 2, .. }));

        let text = "depth,taken,wcet\n2,1\n";
        assert!(matches!(parse_samples_csv(text).unwrap_err(), Error::Csv { line: 2, .. }));

        let text = "depth,taken,wcet\n2,1,-5.0\n";
        assert!(matches!(parse_samples_csv(text).unwrap_err(), Error::Csv { line: 2, .. }));

        let text = "wrong,header\n";
        assert!(matches!(parse_samples_csv(text).unwrap_err(), Error::Csv { line: 1, .. }));
    }

    #[test]
    fn empty_csv_yields_no_samples() {
        assert_eq!(parse_samples_csv("").unwrap(), vec![]);
        assert_eq!(parse_samples_csv("  \n").unwrap(), vec![]);
    }

    #[test]
    fn fit_result_json_round_trip() {
        let result = FitResult {
            model: SurrogateModel::new(8, 251.84, 25.62, 8.78),
            r2: 0.90,
            kendall_tau: 0.82,
            n_samples: 42,
        };
        let text = result.to_json();
        assert!(text.contains("\"depth\": 8"));
        assert_eq!(FitResult::from_json(&text).unwrap(), result);
    }
}
