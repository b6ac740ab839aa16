use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use nspyr::geometry::{
    self, anomaly_localize, arc_indices, circularity_report, perturb_quadrant, perturb_wavy, sample_circle,
    AnomalyOptions, AnomalyRange, CircularityReport, PlanarCurve, QUADRANT_ARC,
};
use nspyr::pyramid::{analyze, LevelStats, Pyramid, PyramidConfig};
use nspyr::sequences::{finseq_from_csv, finseq_to_csv, periodic_from_csv, periodic_to_csv};
use nspyr::{solve_gamma, Boundary, CurveKind, Error, FinSeq, LevelSchedule, SchemeFamily, Seq};

use crate::args::{DemoConfig, FamilySpec, ReconstructConfig, RunConfig};
use crate::plot::{self, CurveLayer};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating directory {}", dir.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

/// Data read by `decompose`.
pub enum Input {
    Curve(PlanarCurve),
    Scalar(Seq),
}

/// Curve CSV if it carries `# closed=`, periodic sequence if it carries
/// `# period=`, otherwise `index,value` rows.
pub fn parse_input(text: &str) -> Result<Input, Error> {
    let header = |key: &str| {
        text.lines()
            .filter_map(|l| l.trim().strip_prefix('#'))
            .any(|h| h.trim().starts_with(key))
    };
    if header("closed=") {
        Ok(Input::Curve(PlanarCurve::from_csv(text)?))
    } else if header("period=") {
        Ok(Input::Scalar(Seq::Periodic(periodic_from_csv(text)?)))
    } else {
        Ok(Input::Scalar(Seq::Finite(finseq_from_csv(text)?)))
    }
}

fn coerce(seq: Seq, boundary: Boundary) -> Result<Seq, Error> {
    Ok(match (seq, boundary) {
        (Seq::Periodic(p), Boundary::Finite) => Seq::Finite(FinSeq::new(0, p.into_values())),
        (Seq::Finite(f), Boundary::Periodic) => {
            let values = match f.support() {
                Some((lo, hi)) => (lo..=hi).map(|i| f.get(i)).collect(),
                None => Vec::new(),
            };
            Seq::Periodic(nspyr::PeriodicSeq::new(values)?)
        }
        (s, _) => s,
    })
}

/// Chooses the family parameters: an explicit `theta` seeds the family and
/// advances it level by level; periodic data without `theta` re-seeds each
/// level from its sample count; finite data without `theta` falls back to
/// the polynomial member, which the conic family does not have.
pub fn pyramid_config(cfg: &RunConfig, boundary: Boundary, theta: Option<f64>) -> Result<PyramidConfig> {
    let family = match (&cfg.family, theta) {
        (FamilySpec::Stationary(path), _) => {
            let taps = finseq_from_csv(&read_text(path)?)?;
            SchemeFamily::stationary(taps).context("stationary mask rejected")?
        }
        (FamilySpec::Ns4pt, Some(t)) => SchemeFamily::Ns4Point { theta: t },
        (FamilySpec::NsCubic, Some(t)) => SchemeFamily::ns_cubic(t.cos())?,
        (FamilySpec::Conic, Some(t)) => SchemeFamily::conic(t.cos())?,
        (FamilySpec::Ns4pt, None) => SchemeFamily::Ns4Point { theta: 0.0 },
        (FamilySpec::NsCubic, None) => SchemeFamily::NsCubic { v_init: 1.0 },
        (FamilySpec::Conic, None) => SchemeFamily::Conic { v_init: 0.0 },
    };
    let schedule = match (&cfg.family, theta, boundary) {
        (FamilySpec::Stationary(_), _, _) | (_, Some(_), _) => LevelSchedule::Advance,
        (_, None, Boundary::Periodic) => LevelSchedule::Resample(CurveKind::Trigonometric),
        (FamilySpec::Conic, None, Boundary::Finite) => return Err(Error::BadParams(
            "conic family needs a parameter: pass --theta (angle per coarsest sample) or use periodic data"
                .into(),
        )
        .into()),
        (_, None, Boundary::Finite) => LevelSchedule::Advance,
    };
    let mut pc = PyramidConfig::new(family, cfg.levels)
        .with_epsilon(cfg.epsilon)
        .with_schedule(schedule);
    pc.boundary = boundary;
    Ok(pc)
}

fn stats_csv(stats: &[LevelStats]) -> String {
    let mut out = String::from("level,sup_norm,l1_norm,avg_l2,ratio\n");
    for s in stats {
        let ratio = s.ratio.map(|r| format!("{r:e}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{:e},{:e},{:e},{}\n",
            s.level, s.sup_norm, s.l1_norm, s.avg_l2, ratio
        ));
    }
    out
}

fn level_labels(n: usize) -> Vec<String> {
    (1..=n).map(|l| l.to_string()).collect()
}

fn curve_points(components: &[Seq]) -> Result<Vec<[f64; 2]>> {
    Ok(PlanarCurve::from_components(components)?.points)
}

pub fn decompose(cfg: &RunConfig) -> Result<()> {
    let input = parse_input(&read_text(cfg.input()?)?)
        .with_context(|| format!("parsing {}", cfg.input().unwrap().display()))?;
    let (components, curve) = match input {
        Input::Curve(c) => {
            let mut c = c;
            if let Some(b) = cfg.boundary {
                c.closed = b == crate::args::BoundaryArg::Periodic;
            }
            (c.components()?, Some(c))
        }
        Input::Scalar(s) => {
            let s = match cfg.boundary {
                Some(b) => coerce(s, b.into())?,
                None => s,
            };
            (vec![s], None)
        }
    };
    let boundary = if components[0].period().is_some() {
        Boundary::Periodic
    } else {
        Boundary::Finite
    };
    let pc = pyramid_config(cfg, boundary, cfg.theta)?;
    info!(
        "analyzing {} component(s), J = {}, schedule {:?}",
        components.len(),
        pc.levels,
        pc.schedule
    );
    let pyramid = analyze(&components, &pc)?;
    ensure_dir(&cfg.out)?;
    write_text(&cfg.out.join("pyramid.json"), &pyramid.to_json())?;
    let stats = pyramid.detail_decay_report();
    write_text(&cfg.out.join("detail_norms.csv"), &stats_csv(&stats))?;
    if cfg.plot {
        write_pyramid_plots(&cfg.out, &pyramid, &stats, curve.as_ref())?;
    }
    Ok(())
}

fn write_pyramid_plots(
    dir: &Path,
    pyramid: &Pyramid,
    stats: &[LevelStats],
    curve: Option<&PlanarCurve>,
) -> Result<()> {
    let labels = level_labels(stats.len());
    let sup: Vec<f64> = stats.iter().map(|s| s.sup_norm).collect();
    let avg: Vec<f64> = stats.iter().map(|s| s.avg_l2).collect();
    write_text(
        &dir.join("detail_norms.svg"),
        &plot::bar_chart(
            "Detail norms per level",
            &labels,
            &[("sup".into(), sup.clone()), ("average".into(), avg.clone())],
            true,
        ),
    )?;
    let x: Vec<f64> = (1..=stats.len()).map(|l| l as f64).collect();
    write_text(
        &dir.join("decay.svg"),
        &plot::log_lines(
            "Detail decay",
            &x,
            &[("sup".into(), sup), ("average".into(), avg)],
        ),
    )?;
    if let Some(curve) = curve {
        let coarse = curve_points(&pyramid.coarse)?;
        write_text(
            &dir.join("curve.svg"),
            &plot::curve_overlay(
                "Input curve and coarse points",
                &[CurveLayer {
                    name: "input",
                    points: &curve.points,
                    closed: curve.closed,
                }],
                &coarse,
                &[],
            ),
        )?;
    }
    Ok(())
}

pub fn reconstruct(cfg: &ReconstructConfig) -> Result<()> {
    let text = read_text(&cfg.input)?;
    let mut pyramid =
        Pyramid::from_json(&text).with_context(|| format!("loading {}", cfg.input.display()))?;
    if cfg.zero_details {
        pyramid = pyramid.map_details(|_, d| d.zeros_like());
    }
    if let Some(f) = cfg.scale_details {
        pyramid = pyramid.map_details(|_, d| d.scale(f));
    }
    let fine = pyramid.synthesize()?;
    let out = match fine.as_slice() {
        [x, y] => PlanarCurve::from_components(&[x.clone(), y.clone()])?.to_csv(),
        [Seq::Periodic(p)] => periodic_to_csv(p),
        [Seq::Finite(f)] => finseq_to_csv(f),
        _ => {
            return Err(Error::ShapeMismatch(format!("cannot write {} components as CSV", fine.len())).into())
        }
    };
    if let Some(parent) = cfg.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_text(&cfg.out, &out)
}

#[derive(Serialize)]
struct GammaLevel {
    level: u32,
    mask_level: u32,
    nonzero: usize,
    support: Option<(i64, i64)>,
    zeta_l1: f64,
    metadata: serde_json::Value,
}

pub fn gamma(cfg: &RunConfig) -> Result<()> {
    let theta = cfg.theta.or(cfg.samples.map(|n| 2.0 * PI / n as f64));
    let pc = pyramid_config(cfg, Boundary::Finite, theta)?;
    ensure_dir(&cfg.out)?;
    let mut summary = Vec::new();
    let mut profiles = Vec::new();
    for level in 1..=cfg.levels {
        let mask = pc.family.mask_at_level(level - 1)?;
        let filter = solve_gamma(&mask, cfg.epsilon)?;
        let nonzero = filter.zeta.iter().filter(|p| p.1 != 0.0).count();
        info!(
            "level {level}: {nonzero} coefficients, residual {:e}",
            filter.residual_l1
        );
        write_text(&cfg.out.join(format!("gamma_level{level}.csv")), &filter.to_csv())?;
        let entry = GammaLevel {
            level,
            mask_level: mask.level,
            nonzero,
            support: filter.zeta.support(),
            zeta_l1: filter.zeta.norm_l1(),
            metadata: filter.metadata_json(),
        };
        write_text(
            &cfg.out.join(format!("gamma_level{level}.json")),
            &to_json(&entry),
        )?;
        summary.push(entry);
        profiles.push(filter.zeta);
    }
    write_text(&cfg.out.join("gamma.json"), &to_json(&summary))?;
    if cfg.plot {
        let lo = profiles
            .iter()
            .filter_map(|z| z.support())
            .map(|s| s.0)
            .min()
            .unwrap_or(0);
        let hi = profiles
            .iter()
            .filter_map(|z| z.support())
            .map(|s| s.1)
            .max()
            .unwrap_or(0);
        let x: Vec<f64> = (lo..=hi).map(|i| i as f64).collect();
        let series: Vec<(String, Vec<f64>)> = profiles
            .iter()
            .enumerate()
            .map(|(i, z)| {
                (
                    format!("level {}", i + 1),
                    (lo..=hi).map(|j| z.get(j).abs()).collect(),
                )
            })
            .collect();
        write_text(
            &cfg.out.join("gamma.svg"),
            &plot::log_lines("Decimation coefficients |zeta_j|", &x, &series),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct WavyEntry {
    amplitude: f64,
    frequency: u32,
    report: CircularityReport,
}

#[derive(Serialize)]
struct CircleDemoReport<'a> {
    config: &'a DemoConfig,
    circle: CircularityReport,
    wavy: Vec<WavyEntry>,
    /// Verdict scales strictly increase with amplitude.
    ordered: bool,
}

/// True when sorting by amplitude also sorts the verdict scales strictly.
pub fn strictly_ordered(pairs: &[(f64, f64)]) -> bool {
    let mut v = pairs.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
}

pub fn circle_demo(cfg: &DemoConfig) -> Result<()> {
    let circle = sample_circle(cfg.samples, cfg.radius, [0.0, 0.0])?;
    let wavy: Vec<PlanarCurve> = cfg
        .amplitudes
        .iter()
        .map(|&a| perturb_wavy(&circle, a, cfg.frequency))
        .collect::<nspyr::Result<_>>()?;
    let circle_report = circularity_report(&circle, cfg.levels, cfg.epsilon)?;
    let wavy_reports: Vec<CircularityReport> = wavy
        .par_iter()
        .map(|c| circularity_report(c, cfg.levels, cfg.epsilon))
        .collect::<nspyr::Result<_>>()?;
    let pairs: Vec<(f64, f64)> = cfg
        .amplitudes
        .iter()
        .zip(&wavy_reports)
        .map(|(&a, r)| (a, r.verdict_scale))
        .collect();
    let ordered = strictly_ordered(&pairs);
    if !ordered {
        warn!("verdict scales are not strictly ordered by amplitude");
    }
    info!("circle verdict scale {:e}", circle_report.verdict_scale);

    ensure_dir(&cfg.out)?;
    write_text(&cfg.out.join("circle.csv"), &circle.to_csv())?;
    for (i, c) in wavy.iter().enumerate() {
        write_text(&cfg.out.join(format!("wavy_{}.csv", i + 1)), &c.to_csv())?;
    }

    let coarse = geometry::conic_pyramid(&circle, cfg.levels, cfg.epsilon)?;
    let coarse_pts = curve_points(&coarse.coarse)?;
    let names: Vec<String> = std::iter::once("circle".to_string())
        .chain(cfg.amplitudes.iter().map(|a| format!("wavy a={a}")))
        .collect();
    let mut layers = vec![CurveLayer {
        name: &names[0],
        points: &circle.points,
        closed: true,
    }];
    for (i, c) in wavy.iter().enumerate() {
        layers.push(CurveLayer {
            name: &names[i + 1],
            points: &c.points,
            closed: true,
        });
    }
    write_text(
        &cfg.out.join("circle_overlay.svg"),
        &plot::curve_overlay(
            "Sampled curves with coarse circle points",
            &layers,
            &coarse_pts,
            &[],
        ),
    )?;

    let all_reports: Vec<&CircularityReport> = std::iter::once(&circle_report).chain(&wavy_reports).collect();
    let series = |pick: fn(&CircularityReport) -> &Vec<f64>| -> Vec<(String, Vec<f64>)> {
        names
            .iter()
            .zip(&all_reports)
            .map(|(n, r)| (n.clone(), pick(r).clone()))
            .collect()
    };
    let labels = level_labels(cfg.levels as usize);
    write_text(
        &cfg.out.join("detail_norms.svg"),
        &plot::bar_chart(
            "Averaged detail norm per level",
            &labels,
            &series(|r| &r.per_level_avg_l2),
            true,
        ),
    )?;
    let x: Vec<f64> = (1..=cfg.levels).map(f64::from).collect();
    write_text(
        &cfg.out.join("decay_l1.svg"),
        &plot::log_lines("Detail L1 norm per level", &x, &series(|r| &r.per_level_l1)),
    )?;
    write_text(
        &cfg.out.join("decay_avg_l2.svg"),
        &plot::log_lines(
            "Averaged detail L2 norm per level",
            &x,
            &series(|r| &r.per_level_avg_l2),
        ),
    )?;

    let report = CircleDemoReport {
        config: cfg,
        circle: circle_report,
        wavy: cfg
            .amplitudes
            .iter()
            .zip(wavy_reports)
            .map(|(&amplitude, report)| WavyEntry {
                amplitude,
                frequency: cfg.frequency,
                report,
            })
            .collect(),
        ordered,
    };
    write_text(&cfg.out.join("report.json"), &to_json(&report))
}

#[derive(Serialize)]
struct AnomalyDemoReport<'a> {
    config: &'a DemoConfig,
    ranges: Vec<AnomalyRange>,
    threshold: f64,
    median: f64,
    peak: f64,
    injected_start: Option<usize>,
    injected_end: Option<usize>,
    coverage: f64,
    spillover: f64,
}

/// Fraction of `injected` covered by `ranges`, and flagged indices outside
/// `injected` relative to its size.
pub fn coverage_and_spillover(ranges: &[AnomalyRange], injected: &[usize], n: usize) -> (f64, f64) {
    if injected.is_empty() {
        return (0.0, 0.0);
    }
    let covered = injected
        .iter()
        .filter(|&&j| ranges.iter().any(|r| r.contains(j)))
        .count();
    let spill = (0..n)
        .filter(|j| !injected.contains(j) && ranges.iter().any(|r| r.contains(*j)))
        .count();
    (
        covered as f64 / injected.len() as f64,
        spill as f64 / injected.len() as f64,
    )
}

pub fn anomaly_demo(cfg: &DemoConfig) -> Result<()> {
    if cfg.amplitudes.len() > 1 {
        warn!("anomaly-demo uses only the first amplitude");
    }
    let amplitude = cfg.amplitudes[0];
    let circle = sample_circle(cfg.samples, cfg.radius, [0.0, 0.0])?;
    let curve = perturb_quadrant(&circle, amplitude, cfg.frequency)?;
    let options = AnomalyOptions {
        threshold_ratio: cfg.threshold_ratio,
        peak_fraction: cfg.peak_fraction,
        ..AnomalyOptions::default()
    };
    let found = anomaly_localize(&curve, cfg.levels, cfg.epsilon, &options)?;
    let injected = arc_indices(cfg.samples, QUADRANT_ARC.0, QUADRANT_ARC.1);
    let (coverage, spillover) = coverage_and_spillover(&found.ranges, &injected, cfg.samples);
    info!(
        "{} range(s), coverage {coverage:.3}, spillover {spillover:.3}",
        found.ranges.len()
    );

    ensure_dir(&cfg.out)?;
    write_text(&cfg.out.join("curve.csv"), &curve.to_csv())?;
    let flagged: Vec<[f64; 2]> = (0..cfg.samples)
        .filter(|&j| found.ranges.iter().any(|r| r.contains(j)))
        .map(|j| curve.points[j])
        .collect();
    let pyramid = geometry::conic_pyramid(&curve, cfg.levels, cfg.epsilon)?;
    let coarse = curve_points(&pyramid.coarse)?;
    write_text(
        &cfg.out.join("anomaly_overlay.svg"),
        &plot::curve_overlay(
            "Perturbed circle, coarse points and flagged samples",
            &[
                CurveLayer {
                    name: "circle",
                    points: &circle.points,
                    closed: true,
                },
                CurveLayer {
                    name: "perturbed",
                    points: &curve.points,
                    closed: true,
                },
            ],
            &coarse,
            &flagged,
        ),
    )?;
    let labels: Vec<String> = (0..found.norms.len()).map(|j| j.to_string()).collect();
    write_text(
        &cfg.out.join("finest_details.svg"),
        &plot::bar_chart(
            "Finest-level detail norms by index",
            &labels,
            &[("norm".into(), found.norms.clone())],
            true,
        ),
    )?;
    let circle_stats = geometry::conic_pyramid(&circle, cfg.levels, cfg.epsilon)?.detail_decay_report();
    let stats = pyramid.detail_decay_report();
    write_text(
        &cfg.out.join("detail_norms.svg"),
        &plot::bar_chart(
            "Averaged detail norm per level",
            &level_labels(stats.len()),
            &[
                ("circle".into(), circle_stats.iter().map(|s| s.avg_l2).collect()),
                ("perturbed".into(), stats.iter().map(|s| s.avg_l2).collect()),
            ],
            true,
        ),
    )?;

    let report = AnomalyDemoReport {
        config: cfg,
        ranges: found.ranges,
        threshold: found.threshold,
        median: found.median,
        peak: found.peak,
        injected_start: injected.first().copied(),
        injected_end: injected.last().copied(),
        coverage,
        spillover,
    };
    write_text(&cfg.out.join("report.json"), &to_json(&report))
}
