//! Wall-clock scaling of shrinkage initialization with layer width.

use std::fmt::Write as _;
use std::time::Instant;

use shrinkinit::{gaussian_matrix, init_sinl, seeded_rng, InitSpec, Scheme};

use crate::RunError;

/// Samples fed through the network while timing.
pub const PROBE_SAMPLES: usize = 512;
const REPEATS: usize = 3;

/// Times `init_sinl` on a square three-weight network `[w, w, w, w]` for each
/// width, keeping the fastest of a few repeats. Repeated widths are measured
/// again.
pub fn timing_probe(widths: &[usize]) -> Result<Vec<(usize, f64)>, RunError> {
    if widths.is_empty() {
        return Err(shrinkinit::Error::Parameter("width sweep is empty".into()).into());
    }
    let spec = InitSpec::new(Scheme::Sinl, 0);
    widths
        .iter()
        .map(|&w| {
            let x0 = gaussian_matrix(w, PROBE_SAMPLES, 1.0, &mut seeded_rng(w as u64))?;
            let dims = [w, w, w, w];
            let mut best = f64::INFINITY;
            for _ in 0..REPEATS {
                let start = Instant::now();
                init_sinl(&dims, &x0, &spec)?;
                best = best.min(start.elapsed().as_secs_f64());
            }
            Ok((w, best))
        })
        .collect()
}

pub fn probe_csv(rows: &[(usize, f64)]) -> String {
    let mut out = String::from("width,seconds\n");
    for (w, s) in rows {
        let _ = writeln!(out, "{w},{s}");
    }
    out
}

/// Least-squares slope of `ln(seconds)` against `ln(width)`.
pub fn log_log_slope(rows: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(w, s)| ((w as f64).ln(), s.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
