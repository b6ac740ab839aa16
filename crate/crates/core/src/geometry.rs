//! Planar curves: sampling, perturbation, circularity scoring and anomaly
//! localization with conic-reproducing pyramids.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pyramid::{analyze, LevelSchedule, Pyramid, PyramidConfig};
use crate::sequences::{FinSeq, PeriodicSeq, Seq};
use crate::subdivision::{CurveKind, SchemeFamily};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarCurve {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

impl PlanarCurve {
    pub fn new(points: Vec<[f64; 2]>, closed: bool) -> Result<Self> {
        if closed && points.len() < 4 {
            return Err(Error::BadParams(format!(
                "closed curves need at least 4 points, got {}",
                points.len()
            )));
        }
        Ok(Self { points, closed })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.points.len().max(1) as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
        [sx / n, sy / n]
    }

    /// `x` and `y` as periodic (closed) or finite (open) sequences.
    pub fn components(&self) -> Result<Vec<Seq>> {
        (0..2)
            .map(|axis| {
                let values: Vec<f64> = self.points.iter().map(|p| p[axis]).collect();
                Ok(if self.closed {
                    Seq::Periodic(PeriodicSeq::new(values)?)
                } else {
                    Seq::Finite(FinSeq::new(0, values))
                })
            })
            .collect()
    }

    /// Inverse of [`PlanarCurve::components`]; finite sequences are read
    /// over the union of their supports.
    pub fn from_components(components: &[Seq]) -> Result<Self> {
        let [x, y] = components else {
            return Err(Error::ShapeMismatch(format!(
                "a planar curve needs 2 components, got {}",
                components.len()
            )));
        };
        let closed = x.period().is_some();
        let (lo, hi) = match (x.index_range(), y.index_range()) {
            (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => {
                return Ok(Self {
                    points: Vec::new(),
                    closed,
                })
            }
        };
        Ok(Self {
            points: (lo..=hi).map(|k| [x.get(k), y.get(k)]).collect(),
            closed,
        })
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        self.map_points(|[x, y]| [c * x - s * y, s * x + c * y])
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        self.map_points(|[x, y]| [x + dx, y + dy])
    }

    fn map_points(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        Self {
            points: self.points.iter().map(|&p| f(p)).collect(),
            closed: self.closed,
        }
    }

    /// Rows `x,y` under a `# closed=true|false` header.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# closed={}\n", self.closed);
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p[0], p[1]);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut closed = None;
        let mut points = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(flag) = rest.trim().strip_prefix("closed=") {
                    closed = Some(match flag.trim() {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(Error::Parse {
                                line: i + 1,
                                msg: format!("closed must be true or false, got {other:?}"),
                            })
                        }
                    });
                }
                continue;
            }
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Parse {
                    line: i + 1,
                    msg: "expected x,y".into(),
                })?
                .trim()
                .parse()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: format!("{e}"),
                })
            };
            if line == "x,y" {
                continue;
            }
            let mut cols = line.split(',');
            let x = parse(cols.next())?;
            let y = parse(cols.next())?;
            points.push([x, y]);
        }
        Self::new(points, closed.unwrap_or(true))
    }
}

/// `center + R (cos(2πj/N), sin(2πj/N))`, `j = 0..N`.
pub fn sample_circle(n: usize, radius: f64, center: [f64; 2]) -> Result<PlanarCurve> {
    if n < 4 {
        return Err(Error::BadParams(format!("need at least 4 samples, got {n}")));
    }
    if !(radius > 0.0) {
        return Err(Error::BadParams(format!("radius must be positive, got {radius}")));
    }
    let points = (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
        .collect();
    Ok(PlanarCurve { points, closed: true })
}

fn check_frequency(frequency: u32) -> Result<()> {
    if frequency == 0 {
        return Err(Error::BadParams("frequency must be at least 1".into()));
    }
    Ok(())
}

/// Moves point `j` radially (about the centroid) by `offset(t_j)` with
/// `t_j = 2πj/N`.
fn radial_offset(curve: &PlanarCurve, offset: impl Fn(f64) -> f64) -> PlanarCurve {
    let c = curve.centroid();
    let n = curve.len() as f64;
    let points = curve
        .points
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let dr = offset(2.0 * PI * j as f64 / n);
            if dr == 0.0 {
                return *p;
            }
            let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
            let r = dx.hypot(dy);
            if r == 0.0 {
                return *p;
            }
            let scale = (r + dr) / r;
            [c[0] + dx * scale, c[1] + dy * scale]
        })
        .collect();
    PlanarCurve {
        points,
        closed: curve.closed,
    }
}

/// Radial sinusoid `r_j = r_j + amplitude sin(frequency 2πj/N)`.
pub fn perturb_wavy(curve: &PlanarCurve, amplitude: f64, frequency: u32) -> Result<PlanarCurve> {
    check_frequency(frequency)?;
    let f = frequency as f64;
    Ok(radial_offset(curve, |t| amplitude * (f * t).sin()))
}

/// Raised-cosine window on `(lo, hi)`, zero outside.
pub fn bump(t: f64, lo: f64, hi: f64) -> f64 {
    if t <= lo || t >= hi {
        0.0
    } else {
        0.5 * (1.0 - (2.0 * PI * (t - lo) / (hi - lo)).cos())
    }
}

/// Radial sinusoid confined to the parameter arc `(lo, hi)` by [`bump`].
pub fn perturb_arc(
    curve: &PlanarCurve,
    amplitude: f64,
    frequency: u32,
    lo: f64,
    hi: f64,
) -> Result<PlanarCurve> {
    check_frequency(frequency)?;
    if !(lo < hi) {
        return Err(Error::BadParams(format!("empty arc ({lo}, {hi})")));
    }
    let f = frequency as f64;
    Ok(radial_offset(curve, |t| {
        amplitude * bump(t, lo, hi) * (f * t).sin()
    }))
}

/// Lower-right quadrant arc `(3π/2 - π/4, 3π/2 + π/4)`.
pub const QUADRANT_ARC: (f64, f64) = (1.25 * PI, 1.75 * PI);

pub fn perturb_quadrant(curve: &PlanarCurve, amplitude: f64, frequency: u32) -> Result<PlanarCurve> {
    perturb_arc(curve, amplitude, frequency, QUADRANT_ARC.0, QUADRANT_ARC.1)
}

/// Indices `j` with `t_j = 2πj/N` strictly inside `(lo, hi)`.
pub fn arc_indices(n: usize, lo: f64, hi: f64) -> Vec<usize> {
    (0..n)
        .filter(|&j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            t > lo && t < hi
        })
        .collect()
}

/// `max_j | |p_j - center| - R |`.
pub fn radial_deviation(curve: &PlanarCurve, radius: f64, center: [f64; 2]) -> f64 {
    curve
        .points
        .iter()
        .map(|p| ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).abs())
        .fold(0.0, f64::max)
}

/// Applies `steps` rounds of `family` to both coordinates.
pub fn refine_curve(curve: &PlanarCurve, family: &SchemeFamily, steps: u32) -> Result<PlanarCurve> {
    let refined = curve
        .components()?
        .iter()
        .map(|c| family.refine_n(c, steps))
        .collect::<Result<Vec<_>>>()?;
    PlanarCurve::from_components(&refined)
}

/// Conic pyramid re-seeded per level for trigonometric data.
pub fn circle_pyramid_config(levels: u32, epsilon: f64) -> PyramidConfig {
    PyramidConfig::new(SchemeFamily::Conic { v_init: 0.0 }, levels)
        .periodic()
        .with_epsilon(epsilon)
        .with_schedule(LevelSchedule::Resample(CurveKind::Trigonometric))
}

/// Conic pyramid of a closed curve, re-seeded per level.
pub fn conic_pyramid(curve: &PlanarCurve, levels: u32, epsilon: f64) -> Result<Pyramid> {
    if !curve.closed {
        return Err(Error::BadParams(
            "circularity analysis needs a closed curve".into(),
        ));
    }
    analyze(&curve.components()?, &circle_pyramid_config(levels, epsilon))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircularityReport {
    /// `sum_k |d^(ℓ)_k|` per level, coarsest first.
    pub per_level_l1: Vec<f64>,
    /// Average of `|d^(ℓ)_k|` per level.
    pub per_level_avg_l2: Vec<f64>,
    pub levels: u32,
    /// `max_ℓ per_level_avg_l2`.
    pub verdict_scale: f64,
}

impl CircularityReport {
    pub fn from_pyramid(p: &Pyramid) -> Self {
        let stats = p.detail_decay_report();
        let per_level_avg_l2: Vec<f64> = stats.iter().map(|s| s.avg_l2).collect();
        Self {
            per_level_l1: stats.iter().map(|s| s.l1_norm).collect(),
            verdict_scale: per_level_avg_l2.iter().copied().fold(0.0, f64::max),
            per_level_avg_l2,
            levels: p.levels(),
        }
    }
}

/// Scores how far a closed curve is from a circle: detail magnitudes of a
/// conic pyramid, which vanish for equispaced circle samples.
pub fn circularity_report(curve: &PlanarCurve, levels: u32, epsilon: f64) -> Result<CircularityReport> {
    Ok(CircularityReport::from_pyramid(&conic_pyramid(
        curve, levels, epsilon,
    )?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyOptions {
    /// Flag when the norm exceeds this multiple of the median norm.
    pub threshold_ratio: f64,
    /// Norms at or below this are never flagged.
    pub abs_floor: f64,
    /// Norms at or below this fraction of the largest norm are never flagged.
    pub peak_fraction: f64,
    /// Flags at most this many indices apart join one range.
    pub merge_gap: usize,
}

impl Default for AnomalyOptions {
    fn default() -> Self {
        Self {
            threshold_ratio: 50.0,
            abs_floor: 1e-10,
            peak_fraction: 0.04,
            merge_gap: 4,
        }
    }
}

/// A run of flagged finest-level detail indices. `end` is inclusive; when
/// the range wraps past index `N-1`, `end < start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyRange {
    pub start: usize,
    pub end: usize,
    pub angle_start: f64,
    pub angle_end: f64,
    pub peak_norm: f64,
}

impl AnomalyRange {
    pub fn contains(&self, j: usize) -> bool {
        if self.start <= self.end {
            (self.start..=self.end).contains(&j)
        } else {
            j >= self.start || j <= self.end
        }
    }

    pub fn len(&self, n: usize) -> usize {
        (self.end + n - self.start) % n + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub ranges: Vec<AnomalyRange>,
    pub threshold: f64,
    pub median: f64,
    pub peak: f64,
    /// Finest-level detail norms by index.
    pub norms: Vec<f64>,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Groups sorted cyclic indices into runs whose gaps are at most `gap`.
fn merge_cyclic(flags: &[usize], n: usize, gap: usize) -> Vec<(usize, usize)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for &j in flags {
        match runs.last_mut() {
            Some(run) if j - run.1 <= gap => run.1 = j,
            _ => runs.push((j, j)),
        }
    }
    if runs.len() > 1 {
        let first = runs[0];
        let last = *runs.last().unwrap();
        if first.0 + n - last.1 <= gap {
            runs[0] = (last.0, first.1);
            runs.pop();
        }
    }
    runs
}

/// Flags finest-level detail indices of a closed curve whose Euclidean norm
/// exceeds `max(threshold_ratio · median, abs_floor, peak_fraction · peak)`
/// and merges them into cyclic index ranges.
pub fn anomaly_localize(
    curve: &PlanarCurve,
    levels: u32,
    epsilon: f64,
    options: &AnomalyOptions,
) -> Result<AnomalyReport> {
    let p = conic_pyramid(curve, levels, epsilon)?;
    let norms: Vec<f64> = p.detail_norms(levels).into_iter().map(|(_, v)| v).collect();
    let n = norms.len();
    let med = median(&norms);
    let peak = norms.iter().copied().fold(0.0, f64::max);
    let threshold = (options.threshold_ratio * med)
        .max(options.abs_floor)
        .max(options.peak_fraction * peak);
    let flags: Vec<usize> = (0..n).filter(|&j| norms[j] > threshold).collect();
    let coarse = n >> levels;
    let angle = |j: usize| 2.0 * PI * j as f64 / (coarse as f64 * 2f64.powi(levels as i32));
    let ranges = merge_cyclic(&flags, n, options.merge_gap)
        .into_iter()
        .map(|(start, end)| {
            let mut peak_norm = 0.0f64;
            let mut j = start;
            loop {
                peak_norm = peak_norm.max(norms[j]);
                if j == end {
                    break;
                }
                j = (j + 1) % n;
            }
            AnomalyRange {
                start,
                end,
                angle_start: angle(start),
                angle_end: angle(end),
                peak_norm,
            }
        })
        .collect();
    Ok(AnomalyReport {
        ranges,
        threshold,
        median: med,
        peak,
        norms,
    })
}
