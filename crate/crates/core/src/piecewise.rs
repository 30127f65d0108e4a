//! Piecewise-linear power-to-hydrogen curve.
//!
//! The electrolyzer's hydrogen output is a concave function of its power
//! draw. The scheduling model only sees it through `S` straight segments
//! `h = a_s * p + b_s` on contiguous power intervals `[lo_s, hi_s]`, which this
//! module fits from sampled data, validates and evaluates.
//!
//! Text formats, `#` starts a comment and blank lines are ignored:
//!
//! * samples: one `power_mw hydrogen_kg_per_h` pair per line, strictly
//!   increasing in power;
//! * curve: one `a b lo hi` row per segment, in power order.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerance::{close_rel, CURVE_REL};

#[derive(Debug, Error, PartialEq)]
pub enum CurveError {
    #[error("a curve needs at least one segment")]
    NoSegments,
    #[error("need at least {need} samples for {segments} segments, got {got}")]
    TooFewSamples {
        need: usize,
        got: usize,
        segments: usize,
    },
    #[error("segment {segment} covers only {count} sample(s); at least 2 are required")]
    TooFewSamplesInSegment { segment: usize, count: usize },
    #[error("sample powers must be strictly increasing (line {line})")]
    NotIncreasing { line: usize },
    #[error("samples span [{lo}, {hi}] MW but the fit needs [{want_lo}, {want_hi}] MW")]
    RangeNotCovered {
        lo: f64,
        hi: f64,
        want_lo: f64,
        want_hi: f64,
    },
    #[error("segment {segment} has an empty or inverted power interval")]
    EmptyInterval { segment: usize },
    #[error("segments {segment} and {next} are not contiguous")]
    NotContiguous { segment: usize, next: usize },
    #[error("curve jumps at the knot between segments {segment} and {next}")]
    Discontinuous { segment: usize, next: usize },
    #[error("segment {segment} produces negative hydrogen")]
    NegativeOutput { segment: usize },
    #[error("non-finite coefficient in segment {segment}")]
    NonFinite { segment: usize },
    #[error("power {p} MW is outside the curve domain [{lo}, {hi}]")]
    OutOfRange { p: f64, lo: f64, hi: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One linear piece `h = a * p + b` valid on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Slope, kg/MWh.
    pub a: f64,
    /// Intercept, kg/h.
    pub b: f64,
    /// Lower power bound, MW.
    pub lo: f64,
    /// Upper power bound, MW.
    pub hi: f64,
}

impl Segment {
    pub fn value_at(&self, p: f64) -> f64 {
        self.a * p + self.b
    }
}

/// A validated, contiguous and continuous piecewise-linear curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseCurve {
    segments: Vec<Segment>,
}

impl PiecewiseCurve {
    pub fn new(segments: Vec<Segment>) -> Result<Self, CurveError> {
        if segments.is_empty() {
            return Err(CurveError::NoSegments);
        }
        for (i, s) in segments.iter().enumerate() {
            if ![s.a, s.b, s.lo, s.hi].iter().all(|v| v.is_finite()) {
                return Err(CurveError::NonFinite { segment: i });
            }
            if s.lo >= s.hi {
                return Err(CurveError::EmptyInterval { segment: i });
            }
            // Linear on the interval, so the endpoints decide the sign.
            let tol = CURVE_REL * 1f64.max(s.value_at(s.lo).abs());
            if s.value_at(s.lo) < -tol || s.value_at(s.hi) < -tol {
                return Err(CurveError::NegativeOutput { segment: i });
            }
        }
        for (i, pair) in segments.windows(2).enumerate() {
            let (left, right) = (&pair[0], &pair[1]);
            if !close_rel(left.hi, right.lo, CURVE_REL) {
                return Err(CurveError::NotContiguous {
                    segment: i,
                    next: i + 1,
                });
            }
            if !close_rel(left.value_at(left.hi), right.value_at(left.hi), CURVE_REL) {
                return Err(CurveError::Discontinuous {
                    segment: i,
                    next: i + 1,
                });
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Lower end of the domain, MW.
    pub fn p_lo(&self) -> f64 {
        self.segments[0].lo
    }

    /// Upper end of the domain, MW.
    pub fn p_hi(&self) -> f64 {
        self.segments[self.segments.len() - 1].hi
    }

    pub fn max_slope(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.a)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the segment used for `p`; knots belong to the left segment.
    pub fn segment_index(&self, p: f64) -> Result<usize, CurveError> {
        if !(p >= self.p_lo() && p <= self.p_hi()) {
            return Err(CurveError::OutOfRange {
                p,
                lo: self.p_lo(),
                hi: self.p_hi(),
            });
        }
        Ok(self
            .segments
            .iter()
            .position(|s| p <= s.hi)
            .unwrap_or(self.segments.len() - 1))
    }

    /// Hydrogen output in kg/h at power `p` MW.
    pub fn evaluate(&self, p: f64) -> Result<f64, CurveError> {
        let s = self.segment_index(p)?;
        Ok(self.segments[s].value_at(p))
    }

    /// Renders the `a b lo hi` table.
    pub fn to_table(&self) -> String {
        let mut out = String::from("# a_kg_per_mwh b_kg_per_h lo_mw hi_mw\n");
        for s in &self.segments {
            let _ = writeln!(out, "{} {} {} {}", s.a, s.b, s.lo, s.hi);
        }
        out
    }
}

impl FromStr for PiecewiseCurve {
    type Err = CurveError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut segments = Vec::new();
        for (line, fields) in data_lines(text) {
            let [a, b, lo, hi] = parse_fields::<4>(line, &fields)?;
            segments.push(Segment { a, b, lo, hi });
        }
        PiecewiseCurve::new(segments)
    }
}

/// Sampled `(power MW, hydrogen kg/h)` points of the underlying production curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSamples {
    points: Vec<(f64, f64)>,
}

impl CurveSamples {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, CurveError> {
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0.partial_cmp(&w[0].0) != Some(Ordering::Greater) {
                return Err(CurveError::NotIncreasing { line: i + 2 });
            }
        }
        if points.iter().any(|(p, h)| !p.is_finite() || !h.is_finite()) {
            return Err(CurveError::Parse {
                line: 0,
                msg: "non-finite sample".into(),
            });
        }
        Ok(Self { points })
    }

    /// Samples `f` at `n` equally spaced powers over `[lo, hi]`.
    pub fn from_fn(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self, CurveError> {
        let n = n.max(2);
        let step = (hi - lo) / (n - 1) as f64;
        let points = (0..n)
            .map(|i| {
                let p = if i + 1 == n { hi } else { lo + step * i as f64 };
                (p, f(p))
            })
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("# power_mw hydrogen_kg_per_h\n");
        for (p, h) in &self.points {
            let _ = writeln!(out, "{p} {h}");
        }
        out
    }
}

impl FromStr for CurveSamples {
    type Err = CurveError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut points: Vec<(f64, f64)> = Vec::new();
        for (line, fields) in data_lines(text) {
            let [p, h] = parse_fields::<2>(line, &fields)?;
            if let Some(&(prev, _)) = points.last() {
                if p.partial_cmp(&prev) != Some(Ordering::Greater) {
                    return Err(CurveError::NotIncreasing { line });
                }
            }
            points.push((p, h));
        }
        CurveSamples::new(points)
    }
}

/// Result of [`fit_curve`]: the curve plus its fit diagnostics.
#[derive(Debug, Clone)]
pub struct CurveFit {
    pub curve: PiecewiseCurve,
    /// Largest least-squares residual of each segment before the intercepts
    /// were shifted for continuity, kg/h.
    pub segment_residuals: Vec<f64>,
    /// Largest `|sample - curve|` over all samples inside the domain, kg/h.
    pub max_residual: f64,
}

impl CurveFit {
    pub fn max_segment_residual(&self) -> f64 {
        self.segment_residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Fits `n_segments` pieces over the full span of the samples.
pub fn fit_curve(samples: &CurveSamples, n_segments: usize) -> Result<CurveFit, CurveError> {
    let pts = samples.points();
    let (lo, hi) = match (pts.first(), pts.last()) {
        (Some(first), Some(last)) => (first.0, last.0),
        _ => {
            return Err(CurveError::TooFewSamples {
                need: n_segments + 1,
                got: 0,
                segments: n_segments,
            })
        }
    };
    fit_curve_over(samples, n_segments, lo, hi)
}

/// Fits `n_segments` pieces with equally spaced knots over `[p_min, p_max]`.
///
/// Each piece is the least-squares line through the samples of its knot
/// interval (knots included on both sides). Intercepts of pieces 2..S are then
/// shifted so that every piece meets its left neighbour at the shared knot.
pub fn fit_curve_over(
    samples: &CurveSamples,
    n_segments: usize,
    p_min: f64,
    p_max: f64,
) -> Result<CurveFit, CurveError> {
    if n_segments == 0 {
        return Err(CurveError::NoSegments);
    }
    let pts = samples.points();
    if pts.len() < n_segments + 1 {
        return Err(CurveError::TooFewSamples {
            need: n_segments + 1,
            got: pts.len(),
            segments: n_segments,
        });
    }
    let span_tol = CURVE_REL * 1f64.max(p_max.abs());
    let (first, last) = (pts[0].0, pts[pts.len() - 1].0);
    if first > p_min + span_tol || last < p_max - span_tol || p_min >= p_max {
        return Err(CurveError::RangeNotCovered {
            lo: first,
            hi: last,
            want_lo: p_min,
            want_hi: p_max,
        });
    }

    let knots = equal_knots(p_min, p_max, n_segments);
    let mut segments = Vec::with_capacity(n_segments);
    let mut segment_residuals = Vec::with_capacity(n_segments);
    for s in 0..n_segments {
        let (lo, hi) = (knots[s], knots[s + 1]);
        let inside: Vec<(f64, f64)> = pts
            .iter()
            .copied()
            .filter(|&(p, _)| p >= lo - span_tol && p <= hi + span_tol)
            .collect();
        if inside.len() < 2 {
            return Err(CurveError::TooFewSamplesInSegment {
                segment: s,
                count: inside.len(),
            });
        }
        let (a, b) = least_squares_line(&inside);
        let residual = inside
            .iter()
            .map(|&(p, h)| (h - (a * p + b)).abs())
            .fold(0.0, f64::max);
        segments.push(Segment { a, b, lo, hi });
        segment_residuals.push(residual);
    }

    // Anchor at the left knot of each piece and propagate to the right.
    for s in 1..segments.len() {
        let knot = segments[s].lo;
        let target = segments[s - 1].value_at(knot);
        segments[s].b = target - segments[s].a * knot;
    }

    let curve = PiecewiseCurve::new(segments)?;
    let max_residual = pts
        .iter()
        .filter(|&&(p, _)| p >= curve.p_lo() && p <= curve.p_hi())
        .map(|&(p, h)| (h - curve.evaluate(p).unwrap_or(h)).abs())
        .fold(0.0, f64::max);
    log::debug!(
        "fitted {n_segments} segments: max LS residual {:.3e}, max residual {:.3e}",
        segment_residuals.iter().copied().fold(0.0, f64::max),
        max_residual
    );
    Ok(CurveFit {
        curve,
        segment_residuals,
        max_residual,
    })
}

/// `n + 1` equally spaced knots; the last one is exactly `hi`.
pub fn equal_knots(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let width = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| if i == n { hi } else { lo + width * i as f64 })
        .collect()
}

fn least_squares_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_p = points.iter().map(|q| q.0).sum::<f64>() / n;
    let mean_h = points.iter().map(|q| q.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(p, h) in points {
        sxy += (p - mean_p) * (h - mean_h);
        sxx += (p - mean_p) * (p - mean_p);
    }
    let a = sxy / sxx;
    (a, mean_h - a * mean_p)
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then(|| (i + 1, body.split_whitespace().collect()))
    })
}

fn parse_fields<const N: usize>(line: usize, fields: &[&str]) -> Result<[f64; N], CurveError> {
    if fields.len() != N {
        return Err(CurveError::Parse {
            line,
            msg: format!("expected {N} columns, found {}", fields.len()),
        });
    }
    let mut out = [0.0f64; N];
    for (slot, field) in out.iter_mut().zip(fields) {
        *slot = field.parse().map_err(|_| CurveError::Parse {
            line,
            msg: format!("not a number: {field:?}"),
        })?;
        if !slot.is_finite() {
            return Err(CurveError::Parse {
                line,
                msg: format!("non-finite value: {field:?}"),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn concave(p: f64) -> f64 {
        6.0 + 16.33 * p - 0.044 * p * p
    }

    #[test]
    fn linear_samples_are_reproduced_exactly() {
        let samples = CurveSamples::from_fn(1.6, 10.0, 85, |p| 18.0 * p).unwrap();
        for n in 1..=6 {
            let fit = fit_curve(&samples, n).unwrap();
            for s in fit.curve.segments() {
                assert!((s.a - 18.0).abs() < 1e-9, "slope {}", s.a);
                assert!(s.b.abs() < 1e-9, "intercept {}", s.b);
            }
        }
    }

    #[test]
    fn concave_samples_give_decreasing_slopes() {
        let samples = CurveSamples::from_fn(1.6, 10.0, 85, concave).unwrap();
        let fit = fit_curve(&samples, 2).unwrap();
        let s = fit.curve.segments();
        assert!(s[0].a > s[1].a);
    }

    #[test]
    fn five_segment_knots_are_equally_spaced() {
        let knots = equal_knots(1.6, 10.0, 5);
        let expected = [1.6, 3.28, 4.96, 6.64, 8.32, 10.0];
        for (k, e) in knots.iter().zip(expected) {
            assert!((k - e).abs() < 1e-12, "{k} vs {e}");
        }
        let samples = CurveSamples::from_fn(1.6, 10.0, 85, concave).unwrap();
        let fit = fit_curve(&samples, 5).unwrap();
        for (s, pair) in fit.curve.segments().iter().zip(expected.windows(2)) {
            assert!((s.lo - pair[0]).abs() < 1e-12 && (s.hi - pair[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn sparse_samples_are_rejected() {
        let samples =
            CurveSamples::new(vec![(1.0, 10.0), (1.5, 15.0), (9.0, 90.0), (10.0, 100.0)]).unwrap();
        assert_eq!(
            fit_curve(&samples, 3).unwrap_err(),
            CurveError::TooFewSamplesInSegment {
                segment: 1,
                count: 0
            }
        );
        assert!(matches!(
            fit_curve(&samples, 4),
            Err(CurveError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn evaluate_uses_left_segment_at_knots() {
        let curve = PiecewiseCurve::new(vec![
            Segment {
                a: 20.0,
                b: 0.0,
                lo: 1.0,
                hi: 2.0,
            },
            Segment {
                a: 10.0,
                b: 20.0,
                lo: 2.0,
                hi: 4.0,
            },
        ])
        .unwrap();
        assert_eq!(curve.segment_index(2.0).unwrap(), 0);
        assert_eq!(curve.segment_index(1.0).unwrap(), 0);
        assert_eq!(curve.evaluate(1.0).unwrap(), 20.0);
        assert_eq!(curve.evaluate(2.0).unwrap(), 40.0);
        assert_eq!(curve.evaluate(4.0).unwrap(), 60.0);
        assert!(matches!(
            curve.evaluate(0.99),
            Err(CurveError::OutOfRange { .. })
        ));
        assert!(matches!(
            curve.evaluate(4.01),
            Err(CurveError::OutOfRange { .. })
        ));
        assert!(curve.evaluate(f64::NAN).is_err());
    }

    #[test]
    fn construction_rejects_broken_curves() {
        let jump = vec![
            Segment {
                a: 20.0,
                b: 0.0,
                lo: 1.0,
                hi: 2.0,
            },
            Segment {
                a: 10.0,
                b: 25.0,
                lo: 2.0,
                hi: 4.0,
            },
        ];
        assert!(matches!(
            PiecewiseCurve::new(jump),
            Err(CurveError::Discontinuous { .. })
        ));
        let gap = vec![
            Segment {
                a: 20.0,
                b: 0.0,
                lo: 1.0,
                hi: 2.0,
            },
            Segment {
                a: 20.0,
                b: 0.0,
                lo: 2.5,
                hi: 4.0,
            },
        ];
        assert!(matches!(
            PiecewiseCurve::new(gap),
            Err(CurveError::NotContiguous { .. })
        ));
        let negative = vec![Segment {
            a: 1.0,
            b: -5.0,
            lo: 1.0,
            hi: 8.0,
        }];
        assert!(matches!(
            PiecewiseCurve::new(negative),
            Err(CurveError::NegativeOutput { .. })
        ));
        assert_eq!(
            PiecewiseCurve::new(vec![]).unwrap_err(),
            CurveError::NoSegments
        );
    }

    #[test]
    fn tables_round_trip() {
        let samples = CurveSamples::from_fn(1.6, 10.0, 43, concave).unwrap();
        let back: CurveSamples = samples.to_table().parse().unwrap();
        assert_eq!(back, samples);
        let fit = fit_curve(&samples, 5).unwrap();
        let curve: PiecewiseCurve = fit.curve.to_table().parse().unwrap();
        assert_eq!(curve, fit.curve);
    }

    #[test]
    fn sample_parser_reports_lines() {
        let err = "# header\n1 2\n1 3\n".parse::<CurveSamples>().unwrap_err();
        assert_eq!(err, CurveError::NotIncreasing { line: 3 });
        let err = "1 2\n2 x\n".parse::<CurveSamples>().unwrap_err();
        assert!(matches!(err, CurveError::Parse { line: 2, .. }));
    }
}
