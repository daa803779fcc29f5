//! Box-counting dimension estimation for sampled curves.
//!
//! The curve is treated as a polyline: every segment is rasterized into the
//! dyadic grid at each scale, since counting only the vertices systematically
//! underestimates the dimension of harsh curves. The estimate is the
//! least-squares slope of `ln(count)` against `ln(1/scale)`.

use std::collections::HashSet;

use crate::dispersion::DispersionCurve;
use crate::error::{Error, Result};
use crate::scalar::{as_f64, cst, Real};

/// Result of a box-counting run.
#[derive(Clone, Debug, PartialEq)]
pub struct FractalEstimate<T> {
    pub dimension: T,
    /// Coefficient of determination of the log-log fit, in [0, 1].
    pub r2: T,
    /// Box sizes entering the fit, strictly decreasing.
    pub scales_used: Vec<T>,
    /// Occupied-box count per scale; non-decreasing as the scale shrinks.
    pub counts: Vec<usize>,
    /// Set when the estimate leaves [1, 2], the possible range for a graph
    /// in the plane. The value is reported unclamped either way.
    pub out_of_range: bool,
}

// Marks every cell of the width-w grid that the segment passes through:
// walk the x-columns it crosses and fill the contiguous y-range per column.
fn raster_segment(p0: (f64, f64), p1: (f64, f64), w: f64, mark: &mut impl FnMut(i64, i64)) {
    let ((xa, ya), (xb, yb)) = if p0.0 <= p1.0 { (p0, p1) } else { (p1, p0) };
    let col_a = (xa / w).floor() as i64;
    let col_b = (xb / w).floor() as i64;
    let mut fill = |col: i64, y0: f64, y1: f64| {
        let ja = (y0.min(y1) / w).floor() as i64;
        let jb = (y0.max(y1) / w).floor() as i64;
        for j in ja..=jb {
            mark(col, j);
        }
    };
    if col_a == col_b || xa == xb {
        for col in col_a..=col_b {
            fill(col, ya, yb);
        }
        return;
    }
    let slope = (yb - ya) / (xb - xa);
    let mut y_lo = ya;
    for col in col_a..=col_b {
        let y_hi = if col == col_b { yb } else { ya + slope * ((col + 1) as f64 * w - xa) };
        fill(col, y_lo, y_hi);
        y_lo = y_hi;
    }
}

// Occupied-cell count for one grid scale. Dense bitset when the grid fits in
// a few megabytes, hash set of cell indices otherwise (unnormalized curves
// can span huge index ranges while touching few cells).
fn count_occupied(pts: &[(f64, f64)], w: f64, span_x: f64, span_y: f64) -> usize {
    let cols = (span_x / w).ceil().max(1.0) as i64;
    let rows = (span_y / w).ceil().max(1.0) as i64;
    let clamp = |i: i64, n: i64| i.clamp(0, n - 1);
    if (cols as u128) * (rows as u128) <= 1 << 26 {
        let cells = (cols * rows) as usize;
        let mut bits = vec![0u64; cells.div_ceil(64)];
        let mut count = 0usize;
        let mut mark = |i: i64, j: i64| {
            let idx = (clamp(i, cols) * rows + clamp(j, rows)) as usize;
            let m = 1u64 << (idx % 64);
            if bits[idx / 64] & m == 0 {
                bits[idx / 64] |= m;
                count += 1;
            }
        };
        for seg in pts.windows(2) {
            raster_segment(seg[0], seg[1], w, &mut mark);
        }
        count
    } else {
        let mut seen = HashSet::new();
        let mut mark = |i: i64, j: i64| {
            seen.insert((clamp(i, cols), clamp(j, rows)));
        };
        for seg in pts.windows(2) {
            raster_segment(seg[0], seg[1], w, &mut mark);
        }
        seen.len()
    }
}

/// Box-counting dimension of a sampled curve over the dyadic scale ladder
/// `2^-2 .. 2^-(n_scales+1)`.
///
/// With `normalize` the curve is first mapped onto the unit square, which
/// makes the estimate neutral to the ordinate units. The fit drops the two
/// coarsest scales (dominated by the bounding box) and any trailing scales
/// whose count sits within 2% of the sample count (the counting has hit the
/// sampling resolution and the slope would flatten toward the polyline).
pub fn box_count_dimension<T: Real>(
    curve: &DispersionCurve<T>,
    n_scales: usize,
    normalize: bool,
) -> Result<FractalEstimate<T>> {
    let n = curve.samples.len();
    if n < (1 << 12) {
        return Err(Error::TooFewSamples { got: n, need: 1 << 12 });
    }
    if n_scales < 5 {
        return Err(Error::OutOfDomain {
            what: "n_scales (must be >= 5)",
            value: n_scales as f64,
        });
    }
    let mut pts = Vec::with_capacity(n);
    for s in &curve.samples {
        let (x, y) = (as_f64(s.kh), as_f64(s.omega_sq));
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::OutOfDomain { what: "curve sample (must be finite)", value: y });
        }
        pts.push((x, y));
    }
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if !(x_max > x_min) {
        return Err(Error::DegenerateCurve { detail: "zero abscissa extent".into() });
    }
    if !(y_max > y_min) {
        return Err(Error::DegenerateCurve { detail: "constant ordinates".into() });
    }
    let (span_x, span_y) = if normalize {
        for p in &mut pts {
            p.0 = (p.0 - x_min) / (x_max - x_min);
            p.1 = (p.1 - y_min) / (y_max - y_min);
        }
        (1.0, 1.0)
    } else {
        for p in &mut pts {
            p.0 -= x_min;
            p.1 -= y_min;
        }
        (x_max - x_min, y_max - y_min)
    };

    let scales: Vec<f64> = (0..n_scales).map(|l| 0.25 / (1u64 << l) as f64).collect();
    let counts: Vec<usize> =
        scales.iter().map(|&w| count_occupied(&pts, w, span_x, span_y)).collect();

    let saturated = |c: usize| (c as f64 - n as f64).abs() <= 0.02 * n as f64;
    let mut hi = n_scales;
    while hi > 2 && saturated(counts[hi - 1]) {
        hi -= 1;
    }
    if hi < 4 {
        return Err(Error::BadRange {
            detail: format!("only {} usable scales after drops, need 2", hi.saturating_sub(2)),
        });
    }

    let us: Vec<f64> = (2..hi).map(|l| (scales[l].recip()).ln()).collect();
    let vs: Vec<f64> = (2..hi).map(|l| (counts[l] as f64).ln()).collect();
    let m = us.len() as f64;
    let (u_bar, v_bar) = (us.iter().sum::<f64>() / m, vs.iter().sum::<f64>() / m);
    let mut suv = 0.0;
    let mut suu = 0.0;
    let mut svv = 0.0;
    for (u, v) in us.iter().zip(&vs) {
        suv += (u - u_bar) * (v - v_bar);
        suu += (u - u_bar) * (u - u_bar);
        svv += (v - v_bar) * (v - v_bar);
    }
    let dimension = suv / suu;
    let r2 = if svv > 0.0 { (suv * suv) / (suu * svv) } else { 1.0 };

    Ok(FractalEstimate {
        dimension: cst(dimension),
        r2: cst(r2),
        scales_used: scales[2..hi].iter().map(|&w| cst(w)).collect(),
        counts: counts[2..hi].to_vec(),
        out_of_range: !(1.0..=2.0).contains(&dimension),
    })
}
