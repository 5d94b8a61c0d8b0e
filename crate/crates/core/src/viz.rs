//! Exact t-SNE and static SVG figures with companion CSV files.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::squared_distance;
use crate::label::SnrLabel;

/// Largest point count projected; larger inputs are subsampled.
pub const MAX_TSNE_POINTS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub exaggeration: f64,
    pub exaggeration_iters: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            exaggeration: 12.0,
            exaggeration_iters: 250,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    pub points: Vec<(f64, f64)>,
    pub labels: Vec<SnrLabel>,
    /// Positions of the projected points in the input (all of them unless
    /// the input exceeded [`MAX_TSNE_POINTS`]).
    pub source_indices: Vec<usize>,
    pub final_kl: f64,
    /// KL divergence when early exaggeration ends.
    pub kl_after_exaggeration: f64,
}

/// Row-conditional affinities `p(j|i)`, each row calibrated by binary search
/// on the Gaussian precision so its perplexity matches `perplexity`.
pub fn conditional_affinities(points: &[Vec<f64>], perplexity: f64) -> Vec<Vec<f64>> {
    let n = points.len();
    let target = perplexity.ln();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let d: Vec<f64> = (0..n)
                .map(|j| squared_distance(&points[i], &points[j]))
                .collect();
            let mut beta = 1.0;
            let (mut lo, mut hi) = (0.0, f64::INFINITY);
            let mut row = vec![0.0; n];
            for _ in 0..200 {
                let d_min = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| d[j])
                    .fold(f64::INFINITY, f64::min);
                let mut sum = 0.0;
                for j in 0..n {
                    row[j] = if j == i {
                        0.0
                    } else {
                        (-(d[j] - d_min) * beta).exp()
                    };
                    sum += row[j];
                }
                let mut weighted = 0.0;
                for j in 0..n {
                    row[j] /= sum;
                    weighted += row[j] * (d[j] - d_min);
                }
                // Shannon entropy in nats of the normalised row
                let entropy = beta * weighted + sum.ln();
                let diff = entropy - target;
                if diff.abs() < 1e-10 {
                    break;
                }
                if diff > 0.0 {
                    lo = beta;
                    beta = if hi.is_finite() {
                        0.5 * (beta + hi)
                    } else {
                        beta * 2.0
                    };
                } else {
                    hi = beta;
                    beta = 0.5 * (beta + lo);
                }
            }
            row
        })
        .collect()
}

fn kl_divergence(p: &[f64], y: &[(f64, f64)]) -> f64 {
    let n = y.len();
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut z = 0.0;
            let mut plogq = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let q = 1.0 / (1.0 + dist2(y[i], y[j]));
                z += q;
                let pij = p[i * n + j];
                if pij > 0.0 {
                    plogq += pij * (pij / q).ln();
                }
            }
            (z, plogq)
        })
        .collect();
    let z: f64 = rows.iter().map(|r| r.0).sum();
    let total: f64 = rows.iter().map(|r| r.1).sum();
    // Σ p log(p / (q/z)) = Σ p log(p/q) + log z, since Σ p = 1
    total + z.ln()
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

/// Exact t-SNE with early exaggeration, momentum and per-coordinate gains.
pub fn tsne_project(
    embeddings: &[Vec<f64>],
    labels: &[SnrLabel],
    cfg: &TsneConfig,
) -> Result<Projection2D> {
    if embeddings.len() != labels.len() {
        return Err(Error::Mismatch(
            "embeddings and labels differ in length".into(),
        ));
    }
    if embeddings.len() < 4 {
        return Err(Error::EmptyInput("t-SNE needs at least 4 points"));
    }
    if cfg.iterations < cfg.exaggeration_iters || cfg.iterations < 250 {
        return Err(Error::InvalidParameter(
            "t-SNE needs at least 250 iterations".into(),
        ));
    }
    let source_indices: Vec<usize> = if embeddings.len() > MAX_TSNE_POINTS {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut idx = sample(&mut rng, embeddings.len(), MAX_TSNE_POINTS).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..embeddings.len()).collect()
    };
    let n = source_indices.len();
    if !(cfg.perplexity > 0.0) || 3.0 * cfg.perplexity >= n as f64 {
        return Err(Error::Perplexity {
            perplexity: cfg.perplexity,
            points: n,
        });
    }
    let points: Vec<Vec<f64>> = source_indices
        .iter()
        .map(|&i| embeddings[i].clone())
        .collect();
    let cond = conditional_affinities(&points, cfg.perplexity);
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = ((cond[i][j] + cond[j][i]) / (2.0 * n as f64)).max(1e-12);
        }
    }
    for i in 0..n {
        p[i * n + i] = 0.0;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid std");
    let mut y: Vec<(f64, f64)> = (0..n)
        .map(|_| (normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    let mut velocity = vec![(0.0, 0.0); n];
    let mut gains = vec![(1.0, 1.0); n];
    let mut kl_after = f64::NAN;

    for iter in 0..cfg.iterations {
        let exaggerating = iter < cfg.exaggeration_iters;
        let ex = if exaggerating { cfg.exaggeration } else { 1.0 };
        let momentum = if exaggerating { 0.5 } else { 0.8 };
        let z: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| 1.0 / (1.0 + dist2(y[i], y[j])))
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        let grads: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let (mut gx, mut gy) = (0.0, 0.0);
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let w = 1.0 / (1.0 + dist2(y[i], y[j]));
                    let f = (ex * p[i * n + j] - w / z) * w;
                    gx += f * (y[i].0 - y[j].0);
                    gy += f * (y[i].1 - y[j].1);
                }
                (4.0 * gx, 4.0 * gy)
            })
            .collect();
        for i in 0..n {
            let update = |g: f64, v: f64, gain: &mut f64| {
                *gain = if (g > 0.0) != (v > 0.0) {
                    *gain + 0.2
                } else {
                    *gain * 0.8
                };
                *gain = gain.max(0.01);
                momentum * v - cfg.learning_rate * *gain * g
            };
            velocity[i].0 = update(grads[i].0, velocity[i].0, &mut gains[i].0);
            velocity[i].1 = update(grads[i].1, velocity[i].1, &mut gains[i].1);
            y[i].0 += velocity[i].0;
            y[i].1 += velocity[i].1;
        }
        let (mx, my) = y.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        let (mx, my) = (mx / n as f64, my / n as f64);
        y.iter_mut().for_each(|p| {
            p.0 -= mx;
            p.1 -= my;
        });
        if iter + 1 == cfg.exaggeration_iters {
            kl_after = kl_divergence(&p, &y);
        }
    }
    let final_kl = kl_divergence(&p, &y);
    if cfg.exaggeration_iters == 0 {
        kl_after = final_kl;
    }
    if y.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) || !final_kl.is_finite() {
        return Err(Error::Divergence(
            "t-SNE produced non-finite coordinates".into(),
        ));
    }
    Ok(Projection2D {
        points: y,
        labels: source_indices.iter().map(|&i| labels[i]).collect(),
        source_indices,
        final_kl,
        kl_after_exaggeration: kl_after,
    })
}

/// Mean silhouette coefficient of 2-D points under the given labelling.
pub fn silhouette<L: PartialEq>(points: &[(f64, f64)], labels: &[L]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut own = (0.0, 0usize);
        let mut others: Vec<(usize, f64, usize)> = Vec::new();
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = dist2(points[i], points[j]).sqrt();
            if labels[j] == labels[i] {
                own.0 += d;
                own.1 += 1;
            } else if let Some(slot) = others.iter_mut().find(|o| labels[o.0] == labels[j]) {
                slot.1 += d;
                slot.2 += 1;
            } else {
                others.push((j, d, 1));
            }
        }
        if own.1 == 0 || others.is_empty() {
            continue;
        }
        let a = own.0 / own.1 as f64;
        let b = others
            .iter()
            .map(|o| o.1 / o.2 as f64)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const PAD: f64 = 60.0;
const LEGEND_W: f64 = 140.0;

fn colour(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Companion CSV path: same stem, `.csv` extension.
pub fn companion_csv(path: &Path) -> PathBuf {
    path.with_extension("csv")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let range = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
                (l.min(v), h.max(v))
            });
            if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let m = 0.05 * (hi - lo);
                (lo - m, hi + m)
            }
        };
        Frame {
            x: range(&mut xs.clone()),
            y: range(&mut ys.clone()),
        }
    }

    fn px(&self, v: f64) -> f64 {
        PAD + (v - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * PAD - LEGEND_W)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - PAD - (v - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * PAD)
    }
}

fn svg_open(title: &str, x_label: &str, y_label: &str, frame: &Frame) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1) = (PAD, WIDTH - PAD - LEGEND_W);
    let (y0, y1) = (HEIGHT - PAD, PAD);
    let _ = writeln!(
        s,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = frame.x.0 + t * (frame.x.1 - frame.x.0);
        let yv = frame.y.0 + t * (frame.y.1 - frame.y.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            frame.px(xv),
            y0 + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            frame.py(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
    s
}

fn tick(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    format!("{}", if r == 0.0 { 0.0 } else { r })
}

fn legend(s: &mut String, names: &[String]) {
    let x = WIDTH - LEGEND_W - PAD + 16.0;
    for (i, name) in names.iter().enumerate() {
        let y = PAD + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<g class="legend"><rect x="{x}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text></g>"#,
            y - 9.0,
            colour(i),
            x + 16.0,
            y,
            escape(name)
        );
    }
}

/// Scatter plot with one colour per label plus `<path>.csv` (x, y, label).
pub fn emit_scatter(proj: &Projection2D, title: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if proj.points.is_empty() {
        return Err(Error::EmptyInput("nothing to plot"));
    }
    let distinct: Vec<SnrLabel> = proj
        .labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let frame = Frame::fit(
        proj.points.iter().map(|p| p.0),
        proj.points.iter().map(|p| p.1),
    );
    let mut s = svg_open(title, "t-SNE 1", "t-SNE 2", &frame);
    for (p, l) in proj.points.iter().zip(&proj.labels) {
        let c = distinct
            .iter()
            .position(|d| d == l)
            .expect("label collected");
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.7"/>"#,
            frame.px(p.0),
            frame.py(p.1),
            colour(c)
        );
    }
    legend(
        &mut s,
        &distinct.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
    );
    s.push_str("</svg>\n");
    write_text(path, &s)?;

    let csv_path = companion_csv(path);
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["x", "y", "label"])?;
    for (p, l) in proj.points.iter().zip(&proj.labels) {
        w.write_record([p.0.to_string(), p.1.to_string(), l.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))
}

/// A named `(x, y)` polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Line chart with markers plus `<path>.csv` (series, x, y). Non-finite
/// points are skipped in the drawing but kept in the CSV.
pub fn emit_line_chart(
    series: &[Series],
    title: &str,
    x_label: &str,
    y_label: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let finite = || {
        series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|p| p.0.is_finite() && p.1.is_finite())
    };
    if finite().next().is_none() {
        return Err(Error::EmptyInput("nothing to plot"));
    }
    let frame = Frame::fit(finite().map(|p| p.0), finite().map(|p| p.1));
    let mut s = svg_open(title, x_label, y_label, &frame);
    for (i, line) in series.iter().enumerate() {
        let pts: Vec<String> = line
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|p| format!("{:.2},{:.2}", frame.px(p.0), frame.py(p.1)))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            pts.join(" "),
            colour(i)
        );
        for p in &pts {
            let (x, y) = p.split_once(',').expect("formatted pair");
            let _ = writeln!(
                s,
                r#"<circle cx="{x}" cy="{y}" r="3" fill="{}"/>"#,
                colour(i)
            );
        }
    }
    legend(
        &mut s,
        &series.iter().map(|l| l.label.clone()).collect::<Vec<_>>(),
    );
    s.push_str("</svg>\n");
    write_text(path, &s)?;

    let csv_path = companion_csv(path);
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["series", "x", "y"])?;
    for line in series {
        for p in &line.points {
            w.write_record([line.label.clone(), p.0.to_string(), p.1.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn clusters(n_per: usize, dim: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<SnrLabel>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for c in 0..2 {
            for _ in 0..n_per {
                pts.push(
                    (0..dim)
                        .map(|d| {
                            normal.sample(&mut rng) + if d == 0 { 10.0 * c as f64 } else { 0.0 }
                        })
                        .collect(),
                );
                labels.push(if c == 0 {
                    SnrLabel::Noise
                } else {
                    SnrLabel::Decibel(10.0)
                });
            }
        }
        (pts, labels)
    }

    fn quick() -> TsneConfig {
        TsneConfig {
            perplexity: 15.0,
            iterations: 400,
            seed: 2,
            ..Default::default()
        }
    }

    #[test]
    fn affinity_rows_are_distributions_at_target_perplexity() {
        let (pts, _) = clusters(30, 5, 1);
        let p = conditional_affinities(&pts, 10.0);
        for (i, row) in p.iter().enumerate() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(row[i], 0.0);
            let h: f64 = -row
                .iter()
                .filter(|&&v| v > 0.0)
                .map(|v| v * v.ln())
                .sum::<f64>();
            assert!((h.exp() - 10.0).abs() < 1e-3, "perplexity {}", h.exp());
        }
    }

    #[test]
    fn separates_clusters_and_descends() {
        let (pts, labels) = clusters(50, 8, 3);
        let proj = tsne_project(&pts, &labels, &quick()).unwrap();
        assert_eq!(proj.points.len(), 100);
        assert!(proj
            .points
            .iter()
            .all(|p| p.0.is_finite() && p.1.is_finite()));
        assert!(silhouette(&proj.points, &proj.labels) >= 0.3);
        assert!(proj.final_kl <= proj.kl_after_exaggeration);
        assert_eq!(proj, tsne_project(&pts, &labels, &quick()).unwrap());
    }

    #[test]
    fn rotation_leaves_silhouette_nearly_unchanged() {
        let (pts, labels) = clusters(40, 2, 4);
        let theta: f64 = 1.1;
        let rotated: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| {
                vec![
                    theta.cos() * p[0] - theta.sin() * p[1],
                    theta.sin() * p[0] + theta.cos() * p[1],
                ]
            })
            .collect();
        let a = tsne_project(&pts, &labels, &quick()).unwrap();
        let b = tsne_project(&rotated, &labels, &quick()).unwrap();
        let (sa, sb) = (
            silhouette(&a.points, &a.labels),
            silhouette(&b.points, &b.labels),
        );
        assert!((sa - sb).abs() <= 0.1, "{sa} vs {sb}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let (pts, labels) = clusters(2, 3, 0);
        assert!(matches!(
            tsne_project(&pts[..3], &labels[..3], &quick()),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            tsne_project(&pts, &labels, &quick()),
            Err(Error::Perplexity { .. })
        ));
    }

    #[test]
    fn silhouette_of_separated_points() {
        let pts = [(0.0, 0.0), (0.0, 1.0), (10.0, 0.0), (10.0, 1.0)];
        let s = silhouette(&pts, &[0, 0, 1, 1]);
        // a = 1, b = mean(10, √101) for every point
        let b = 0.5 * (10.0 + 101f64.sqrt());
        assert!((s - (b - 1.0) / b).abs() < 1e-12);
    }

    #[test]
    fn scatter_has_legend_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let labels = [
            SnrLabel::Noise,
            SnrLabel::Decibel(0.0),
            SnrLabel::Decibel(10.0),
        ];
        let proj = Projection2D {
            points: (0..30).map(|_| (rng.gen(), rng.gen())).collect(),
            labels: (0..30).map(|i| labels[i % 3]).collect(),
            source_indices: (0..30).collect(),
            final_kl: 0.0,
            kl_after_exaggeration: 0.0,
        };
        let path = dir.path().join("scatter.svg");
        emit_scatter(&proj, "test", &path).unwrap();
        let svg = fs::read_to_string(&path).unwrap();
        assert_eq!(svg.matches("class=\"legend\"").count(), 3);
        let csv = fs::read_to_string(companion_csv(&path)).unwrap();
        assert_eq!(csv.lines().count(), 31);
        emit_scatter(&proj, "test", &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), svg);
        assert!(emit_scatter(&proj, "t", dir.path().join("missing/x.svg")).is_err());
    }

    #[test]
    fn line_chart_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lines.svg");
        let series = vec![
            Series {
                label: "a".into(),
                points: vec![(0.0, 1.0), (1.0, 2.0)],
            },
            Series {
                label: "b".into(),
                points: vec![(0.0, 0.5), (1.0, f64::NAN)],
            },
        ];
        emit_line_chart(&series, "t", "x", "y", &path).unwrap();
        let csv = fs::read_to_string(companion_csv(&path)).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(emit_line_chart(&[], "t", "x", "y", &path).is_err());
    }
}
