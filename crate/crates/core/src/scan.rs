//! Grid scans of the four-qubit family
//! `alpha |GHZ_4><GHZ_4| + beta |W_4><W_4| + (1 - alpha - beta) 1/16`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{InequalityId, InequalityReport, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::families::ghz_w_noise_family;
use crate::optimizer::{maximize_violation, Budget};
use crate::qstate::{is_ppt, Bipartition, DensityMatrix, PSD_TOL};

pub const DEFAULT_STEP: f64 = 0.01;

/// Column order of the scan CSV.
pub const CSV_HEADER: [&str; 12] = [
    "alpha",
    "beta",
    "lhs_In",
    "lhs_I2",
    "lhs_InM1",
    "lhs_GME",
    "viol_In",
    "viol_I2",
    "viol_InM1",
    "viol_GME",
    "ppt_1v3",
    "ppt_2v2",
];

/// Inequality order used by `ScanPoint::lhs` and `ScanPoint::violated`.
pub const SCAN_ORDER: [InequalityId; 4] =
    [InequalityId::In, InequalityId::I2, InequalityId::InMinus1, InequalityId::Gme];

/// Noise thresholds on the edges of the scan triangle, derived by hand from
/// the closed forms of the left-hand sides and checked by bisection in tests.
pub mod thresholds {
    /// GHZ_4 weight above which `beta = 0` points violate I(n).
    pub const GHZ_IN: f64 = 7.0 / 11.0;
    /// W_4 weight above which `alpha = 0` points violate I(2).
    pub const W_I2: f64 = 13.0 / 17.0;
    /// W_4 weight above which `alpha = 0` points violate the GME inequality.
    pub const W_GME: f64 = 5.0 / 9.0;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub alpha: f64,
    pub beta: f64,
    /// In `SCAN_ORDER`.
    pub lhs: [f64; 4],
    pub violated: [bool; 4],
    pub ppt_1v3: bool,
    pub ppt_2v2: bool,
}

impl ScanPoint {
    pub fn violates(&self, id: InequalityId) -> bool {
        self.violated[SCAN_ORDER.iter().position(|&x| x == id).expect("all ids are scanned")]
    }

    pub fn lhs_of(&self, id: InequalityId) -> f64 {
        self.lhs[SCAN_ORDER.iter().position(|&x| x == id).expect("all ids are scanned")]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub step: f64,
    pub optimize: bool,
    pub tolerance: f64,
    pub seed: u64,
    /// Worker count; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub budget: Budget,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            optimize: false,
            tolerance: DEFAULT_TOLERANCE,
            seed: 0,
            threads: None,
            budget: Budget::default(),
        }
    }
}

/// Grid points `(alpha, beta)` with `alpha + beta <= 1`, alpha-major.
///
/// When `1/step` is an integer `m` the coordinates are `i/m`, so the corners
/// are hit exactly.
pub fn grid(step: f64) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::OutOfRange(format!("grid step {step} must lie in (0, 0.5]")));
    }
    let inv = 1.0 / step;
    let m = inv.round();
    let coord: Box<dyn Fn(usize) -> f64> =
        if (inv - m).abs() < 1e-9 * inv { Box::new(move |i| i as f64 / m) } else { Box::new(move |i| i as f64 * step) };
    let count = (inv + 1e-9).floor() as usize;
    let mut points = Vec::new();
    for i in 0..=count {
        for j in 0..=count - i {
            let (a, b) = (coord(i), coord(j));
            if a + b <= 1.0 + 1e-12 {
                points.push((a, b));
            }
        }
    }
    Ok(points)
}

/// The 1|3 and 2|2 cuts; every other cut is a qubit permutation of one of
/// these, and the family is permutation symmetric.
pub fn scan_cuts() -> [Bipartition; 2] {
    [Bipartition::new(4, &[0]).expect("valid cut"), Bipartition::new(4, &[0, 1]).expect("valid cut")]
}

/// Left-hand sides and violation flags for one state, in `SCAN_ORDER`.
pub fn evaluate_point(rho: &DensityMatrix, opts: &ScanOptions, point_seed: u64) -> Result<([f64; 4], [bool; 4])> {
    let mut lhs = [0.0; 4];
    let mut violated = [false; 4];
    for (k, id) in SCAN_ORDER.into_iter().enumerate() {
        let value =
            if opts.optimize { maximize_violation(rho, id, opts.budget, point_seed)?.best_lhs } else { id.lhs(rho)? };
        let report = InequalityReport::new(id, rho.n(), value, opts.tolerance);
        lhs[k] = report.lhs;
        violated[k] = report.violated;
    }
    Ok((lhs, violated))
}

pub fn scan_point(alpha: f64, beta: f64, opts: &ScanOptions, point_seed: u64) -> Result<ScanPoint> {
    let rho = ghz_w_noise_family(alpha, beta)?;
    let (lhs, violated) = evaluate_point(&rho, opts, point_seed)?;
    let [c13, c22] = scan_cuts();
    Ok(ScanPoint {
        alpha,
        beta,
        lhs,
        violated,
        ppt_1v3: is_ppt(&rho, &c13, PSD_TOL)?,
        ppt_2v2: is_ppt(&rho, &c22, PSD_TOL)?,
    })
}

/// Evaluates every grid point; the output is in grid order regardless of the
/// thread count. Point `k` uses optimizer seed `seed + k`.
pub fn run_scan(opts: &ScanOptions) -> Result<Vec<ScanPoint>> {
    let points = grid(opts.step)?;
    let work = || {
        points
            .par_iter()
            .enumerate()
            .map(|(k, &(a, b))| scan_point(a, b, opts, opts.seed.wrapping_add(k as u64)))
            .collect::<Result<Vec<_>>>()
    };
    match opts.threads {
        None => work(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?
            .install(work),
    }
}

#[derive(Serialize)]
struct CsvRow {
    alpha: f64,
    beta: f64,
    #[serde(rename = "lhs_In")]
    lhs_in: f64,
    #[serde(rename = "lhs_I2")]
    lhs_i2: f64,
    #[serde(rename = "lhs_InM1")]
    lhs_inm1: f64,
    #[serde(rename = "lhs_GME")]
    lhs_gme: f64,
    #[serde(rename = "viol_In")]
    viol_in: u8,
    #[serde(rename = "viol_I2")]
    viol_i2: u8,
    #[serde(rename = "viol_InM1")]
    viol_inm1: u8,
    #[serde(rename = "viol_GME")]
    viol_gme: u8,
    ppt_1v3: u8,
    ppt_2v2: u8,
}

impl From<&ScanPoint> for CsvRow {
    fn from(p: &ScanPoint) -> Self {
        let b = |v: bool| v as u8;
        CsvRow {
            alpha: p.alpha,
            beta: p.beta,
            lhs_in: p.lhs[0],
            lhs_i2: p.lhs[1],
            lhs_inm1: p.lhs[2],
            lhs_gme: p.lhs[3],
            viol_in: b(p.violated[0]),
            viol_i2: b(p.violated[1]),
            viol_inm1: b(p.violated[2]),
            viol_gme: b(p.violated[3]),
            ppt_1v3: b(p.ppt_1v3),
            ppt_2v2: b(p.ppt_2v2),
        }
    }
}

pub fn write_csv<W: Write>(points: &[ScanPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if points.is_empty() {
        w.write_record(CSV_HEADER).map_err(|e| Error::Io(e.to_string()))?;
    }
    for p in points {
        w.serialize(CsvRow::from(p)).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Smallest `x` in `[lo, hi]` (to within `tol`) at which `pred` holds,
/// assuming `pred` is false at `lo`, true at `hi` and monotone in between.
pub fn bisect_threshold(mut pred: impl FnMut(f64) -> Result<bool>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if pred(lo)? || !pred(hi)? {
        return Err(Error::OutOfRange(format!("predicate does not change from false to true on [{lo}, {hi}]")));
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_and_corners() {
        let g = grid(0.01).unwrap();
        assert_eq!(g.len(), 101 * 102 / 2);
        assert_eq!(g[0], (0.0, 0.0));
        assert!(g.contains(&(1.0, 0.0)) && g.contains(&(0.0, 1.0)));
        assert_eq!(grid(0.5).unwrap(), vec![(0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (0.5, 0.0), (0.5, 0.5), (1.0, 0.0)]);
        assert_eq!(grid(0.3).unwrap().len(), 10);
        assert!(grid(0.0).is_err() && grid(0.6).is_err() && grid(f64::NAN).is_err());
    }

    #[test]
    fn csv_header_matches_rows() {
        let p = scan_point(1.0, 0.0, &ScanOptions::default(), 0).unwrap();
        let mut buf = Vec::new();
        write_csv(&[p], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 12);
        assert_eq!(&row[6..], ["1", "0", "0", "0", "0", "0"]);

        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER.join(","));
    }

    #[test]
    fn bisection_finds_a_step() {
        let x = bisect_threshold(|x| Ok(x > 0.3), 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-9);
        assert!(bisect_threshold(|_| Ok(true), 0.0, 1.0, 1e-3).is_err());
    }
}
