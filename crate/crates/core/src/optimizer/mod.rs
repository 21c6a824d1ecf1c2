//! Coordinate sweeps over cone coordinates, angle grid scans and Gaussian fits of
//! ground-state profiles.

mod fit;

use std::cmp::Ordering;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{beta_q, gap_value, CorrelatorTable};
use crate::cone::{coords_to_alpha, ConeCoordinates, ConeDescription};
use crate::dicke::{build_block, MeasurementBasis};
use crate::error::{Error, Result};
use crate::types::{BellCoefficients, BlockSpec, MeasurementParams};

pub use fit::{gaussian_fit, GaussianFit, SIGMA_FLOOR};

/// Grid-scan threshold: a point violates when `gap > 1 + VIOLATION_EPS`.
pub const VIOLATION_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Ray weights range over `[0, ray_upper]`.
    pub ray_upper: f64,
    /// Line weights range over `[−line_upper, line_upper]`.
    pub line_upper: f64,
    pub grid_points: usize,
    /// Resolution multiplier of the final local pass; 1 disables it.
    pub refine_factor: usize,
    pub max_passes: usize,
    pub convergence_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Sweep along pairwise diagonals when a coordinate pass stalls.
    pub pair_sweeps: bool,
    /// Finish with a Nelder–Mead polish from the incumbent.
    pub simplex_polish: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ray_upper: 1.0,
            line_upper: 1.0,
            grid_points: 101,
            refine_factor: 10,
            max_passes: 50,
            convergence_tol: 1e-10,
            restarts: 8,
            seed: 0,
            pair_sweeps: true,
            simplex_polish: true,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::InvalidInput("grid_points must be at least 3".into()));
        }
        if !(self.ray_upper > 0.0 && self.line_upper > 0.0) {
            return Err(Error::InvalidInput("weight intervals must be nonempty".into()));
        }
        if self.restarts == 0 || self.max_passes == 0 || self.refine_factor == 0 {
            return Err(Error::InvalidInput("restarts, max_passes and refine_factor must be positive".into()));
        }
        Ok(())
    }
}

/// Objective value: a defined gap beats any undefined one; among undefined
/// candidates the lower quantum bound wins.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Score {
    beta_q: f64,
    gap: Option<f64>,
}

impl Score {
    fn cmp(&self, o: &Score) -> Ordering {
        match (self.gap, o.gap) {
            (Some(a), Some(b)) => a.total_cmp(&b),
            (Some(_), None) => Ordering::Greater,
            (None, Some(_)) => Ordering::Less,
            (None, None) => o.beta_q.total_cmp(&self.beta_q),
        }
    }

    fn better(&self, o: &Score) -> bool {
        self.cmp(o) == Ordering::Greater
    }
}

struct Objective<'a> {
    cone: &'a ConeDescription,
    basis: MeasurementBasis,
    table: CorrelatorTable,
}

impl<'a> Objective<'a> {
    fn new(cone: &'a ConeDescription) -> Result<Self> {
        let block = BlockSpec::symmetric(cone.n)?;
        Ok(Self {
            cone,
            basis: MeasurementBasis::new(cone.order, &cone.params, block),
            table: CorrelatorTable::new(cone.n, cone.order),
        })
    }

    fn eval(&self, x: &[f64]) -> Score {
        let a = self.alpha(x).expect("coordinates stay in their intervals");
        let (bq, _) = beta_q(&self.basis.combine(a.values()));
        let (bc, _) = self.table.beta_c(a.values());
        Score {
            beta_q: bq,
            gap: gap_value(bq, bc),
        }
    }

    fn alpha(&self, x: &[f64]) -> Result<BellCoefficients> {
        let r = self.cone.rays.len();
        coords_to_alpha(
            &ConeCoordinates {
                ray_weights: x[..r].to_vec(),
                line_weights: x[r..].to_vec(),
            },
            self.cone,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub pass: usize,
    pub coord: usize,
    /// Coordinate value after the sweep.
    pub value: f64,
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    Converged,
    MaxPasses,
    /// `β_C ≥ 0` at every candidate; the result minimises `β_Q` instead.
    NoViolationFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub coords: ConeCoordinates,
    pub alpha: BellCoefficients,
    pub gap: Option<f64>,
    pub beta_q: f64,
    pub status: SweepStatus,
    pub trace: Vec<TraceEntry>,
    pub seed: u64,
    /// Restart that produced this result.
    pub restart: usize,
    /// Final gap of every restart.
    pub restart_gaps: Vec<Option<f64>>,
}

fn linspace(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| if i + 1 == m { hi } else { lo + (hi - lo) * i as f64 / (m - 1) as f64 })
        .collect()
}

struct Run {
    x: Vec<f64>,
    score: Score,
    trace: Vec<TraceEntry>,
    status: SweepStatus,
}

fn pick(obj: &Objective, cands: &[Vec<f64>], x: &mut Vec<f64>, score: &mut Score) {
    let scores: Vec<Score> = cands.par_iter().map(|y| obj.eval(y)).collect();
    // lowest index wins ties
    let mut best: Option<(usize, Score)> = None;
    for (j, s) in scores.into_iter().enumerate() {
        if best.as_ref().is_none_or(|(_, b)| s.better(b)) {
            best = Some((j, s));
        }
    }
    if let Some((j, s)) = best {
        if s.better(score) {
            x.clone_from(&cands[j]);
            *score = s;
        }
    }
}

/// One sweep per coordinate over `[x_i − w, x_i + w]` clipped to its interval.
fn coord_pass(
    obj: &Objective,
    x: &mut Vec<f64>,
    score: &mut Score,
    bounds: &[(f64, f64)],
    w: f64,
    m: usize,
    mut log: impl FnMut(usize, f64, Option<f64>),
) {
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        let (a, b) = ((x[i] - w).max(lo), (x[i] + w).min(hi));
        let cands: Vec<Vec<f64>> = linspace(a, b, m)
            .into_iter()
            .map(|v| {
                let mut y = x.clone();
                y[i] = v;
                y
            })
            .collect();
        pick(obj, &cands, x, score);
        log(i, x[i], score.gap);
    }
}

/// Sweeps along `e_i ± e_j` for every pair, step at most `w`. Coordinate sweeps
/// alone stall on the kinks of the classical bound.
fn pair_pass(
    obj: &Objective,
    x: &mut Vec<f64>,
    score: &mut Score,
    bounds: &[(f64, f64)],
    w: f64,
    m: usize,
    mut log: impl FnMut(usize, f64, Option<f64>),
) {
    let d = bounds.len();
    for i in 0..d {
        for j in i + 1..d {
            for sign in [1.0, -1.0] {
                let (li, hi) = bounds[i];
                let (lj, hj) = bounds[j];
                let (a, b) = if sign > 0.0 { (lj - x[j], hj - x[j]) } else { (x[j] - hj, x[j] - lj) };
                let lo = (li - x[i]).max(a).max(-w);
                let up = (hi - x[i]).min(b).min(w);
                if up <= lo {
                    continue;
                }
                let cands: Vec<Vec<f64>> = linspace(lo, up, m)
                    .into_iter()
                    .map(|t| {
                        let mut y = x.clone();
                        y[i] = (y[i] + t).clamp(li, hi);
                        y[j] = (y[j] + sign * t).clamp(lj, hj);
                        y
                    })
                    .collect();
                pick(obj, &cands, x, score);
            }
            log(i, x[i], score.gap);
        }
    }
}

/// Nelder–Mead on the box-clipped objective, restarted from the incumbent with
/// a shrinking initial simplex. Only improvements are kept.
fn simplex_polish(obj: &Objective, x: &mut Vec<f64>, score: &mut Score, bounds: &[(f64, f64)], evals: usize) {
    let d = bounds.len();
    let clip = |y: &[f64]| -> Vec<f64> {
        y.iter().zip(bounds).map(|(v, (a, b))| v.clamp(*a, *b)).collect()
    };
    let span = bounds.iter().map(|(a, b)| b - a).fold(0.0, f64::max);
    let mut step = 0.05 * span;
    let mut left = evals;
    while step > 1e-9 * span && left > 0 {
        let mut pts: Vec<(Vec<f64>, Score)> = vec![(x.clone(), *score)];
        for i in 0..d {
            let mut y = x.clone();
            y[i] += if y[i] + step <= bounds[i].1 { step } else { -step };
            let y = clip(&y);
            let s = obj.eval(&y);
            pts.push((y, s));
        }
        left = left.saturating_sub(d);
        let start = *score;
        let mut iters = 0;
        while left > 0 && iters < 200 * d {
            iters += 1;
            pts.sort_by(|a, b| b.1.cmp(&a.1));
            let spread = pts.iter().map(|p| {
                p.0.iter().zip(&pts[0].0).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
            }).fold(0.0, f64::max);
            if spread < 1e-12 * span {
                break;
            }
            let worst = pts[d].clone();
            let centroid: Vec<f64> = (0..d).map(|j| pts[..d].iter().map(|p| p.0[j]).sum::<f64>() / d as f64).collect();
            let along = |t: f64| clip(&centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect::<Vec<_>>());
            let xr = along(1.0);
            let sr = obj.eval(&xr);
            left = left.saturating_sub(1);
            if sr.better(&pts[0].1) {
                let xe = along(2.0);
                let se = obj.eval(&xe);
                left = left.saturating_sub(1);
                pts[d] = if se.better(&sr) { (xe, se) } else { (xr, sr) };
            } else if sr.better(&pts[d - 1].1) {
                pts[d] = (xr, sr);
            } else {
                let xc = along(if sr.better(&worst.1) { 0.5 } else { -0.5 });
                let sc = obj.eval(&xc);
                left = left.saturating_sub(1);
                if sc.better(&worst.1) {
                    pts[d] = (xc, sc);
                } else {
                    let best = pts[0].0.clone();
                    for p in pts.iter_mut().skip(1) {
                        p.0 = clip(&p.0.iter().zip(&best).map(|(v, b)| b + 0.5 * (v - b)).collect::<Vec<_>>());
                        p.1 = obj.eval(&p.0);
                    }
                    left = left.saturating_sub(d);
                }
            }
        }
        pts.sort_by(|a, b| b.1.cmp(&a.1));
        if pts[0].1.better(score) {
            x.clone_from(&pts[0].0);
            *score = pts[0].1;
        }
        if !score.better(&start) {
            step /= 10.0;
        }
    }
}

fn single_run(obj: &Objective, cfg: &SweepConfig, bounds: &[(f64, f64)], seed: u64) -> Run {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
    let mut score = obj.eval(&x);
    let mut trace = Vec::new();
    let mut status = SweepStatus::MaxPasses;
    let mut pass = 0;
    let gain = |before: &Score, after: &Score| match (before.gap, after.gap) {
        (Some(a), Some(b)) => b - a,
        (None, None) => before.beta_q - after.beta_q,
        (None, Some(_)) => f64::INFINITY,
        (Some(_), None) => unreachable!("scores never decrease"),
    };
    while pass < cfg.max_passes {
        let before = score;
        let mut log = |c, v, g| trace.push(TraceEntry { pass, coord: c, value: v, gap: g });
        coord_pass(obj, &mut x, &mut score, bounds, f64::INFINITY, cfg.grid_points, &mut log);
        if cfg.pair_sweeps && !score.better(&before) {
            pair_pass(obj, &mut x, &mut score, bounds, f64::INFINITY, cfg.grid_points, &mut log);
        }
        pass += 1;
        if gain(&before, &score) < cfg.convergence_tol {
            status = SweepStatus::Converged;
            break;
        }
    }
    if cfg.refine_factor > 1 {
        // zoom: windows shrink by refine_factor whenever a local pass stalls
        let span = bounds.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
        let mut w = span / (cfg.grid_points - 1) as f64;
        let m = 2 * cfg.refine_factor + 1;
        let mut budget = cfg.max_passes.max(1) * 4;
        while w > 1e-10 * span && budget > 0 {
            let before = score;
            let mut log = |c, v, g| trace.push(TraceEntry { pass, coord: c, value: v, gap: g });
            coord_pass(obj, &mut x, &mut score, bounds, w, m, &mut log);
            if cfg.pair_sweeps {
                pair_pass(obj, &mut x, &mut score, bounds, w, m, &mut log);
            }
            pass += 1;
            budget -= 1;
            if gain(&before, &score) < cfg.convergence_tol {
                w /= cfg.refine_factor as f64;
            }
        }
    }
    if cfg.simplex_polish {
        let (mut y, mut polished) = (x.clone(), score);
        simplex_polish(obj, &mut y, &mut polished, bounds, 20_000);
        if gain(&score, &polished) > cfg.convergence_tol {
            x = y;
            score = polished;
            // coord = number of coordinates marks the polish stage
            trace.push(TraceEntry { pass, coord: bounds.len(), value: 0.0, gap: score.gap });
        }
    }
    if score.gap.is_none() {
        status = SweepStatus::NoViolationFound;
    }
    Run { x, score, trace, status }
}

/// Best of `cfg.restarts` seeded coordinate-sweep runs maximising the gap over
/// the cone. Restart `r` uses seed `cfg.seed + r`.
pub fn sweep_optimize(cone: &ConeDescription, cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if cone.rays.is_empty() && cone.lines.is_empty() {
        return Err(Error::InvalidInput("cone has no generators".into()));
    }
    let obj = Objective::new(cone)?;
    let bounds: Vec<(f64, f64)> = std::iter::repeat_n((0.0, cfg.ray_upper), cone.rays.len())
        .chain(std::iter::repeat_n((-cfg.line_upper, cfg.line_upper), cone.lines.len()))
        .collect();
    let runs: Vec<Run> = (0..cfg.restarts)
        .map(|r| single_run(&obj, cfg, &bounds, cfg.seed.wrapping_add(r as u64)))
        .collect();
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.score.better(&runs[best].score) {
            best = r;
        }
    }
    let restart_gaps = runs.iter().map(|r| r.score.gap).collect();
    let run = runs.into_iter().nth(best).expect("at least one restart");
    let alpha = obj.alpha(&run.x)?;
    let r = cone.rays.len();
    Ok(SweepResult {
        coords: ConeCoordinates {
            ray_weights: run.x[..r].to_vec(),
            line_weights: run.x[r..].to_vec(),
        },
        alpha,
        gap: run.score.gap,
        beta_q: run.score.beta_q,
        status: run.status,
        trace: run.trace,
        seed: cfg.seed,
        restart: best,
        restart_gaps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub phi: f64,
    pub theta: f64,
    pub beta_q: f64,
    pub beta_c: f64,
    pub gap: Option<f64>,
    pub violation: bool,
}

/// Gap on an inclusive `res_phi × res_theta` grid, φ-major.
pub fn grid_scan(
    alpha: &BellCoefficients,
    n: usize,
    phi_range: (f64, f64),
    theta_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<Vec<ScanPoint>> {
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(Error::InvalidInput("scan resolution must be at least 2 per axis".into()));
    }
    let block = BlockSpec::symmetric(n)?;
    let (bc, _) = CorrelatorTable::new(n, alpha.order()).beta_c(alpha.values());
    let phis = linspace(phi_range.0, phi_range.1, resolution.0);
    let thetas = linspace(theta_range.0, theta_range.1, resolution.1);
    let cells: Vec<(f64, f64)> = phis
        .iter()
        .flat_map(|&p| thetas.iter().map(move |&t| (p, t)))
        .collect();
    cells
        .par_iter()
        .map(|&(phi, theta)| {
            let p = MeasurementParams::new(phi, theta)?;
            let (bq, _) = beta_q(&build_block(alpha, &p, block));
            let gap = gap_value(bq, bc);
            Ok(ScanPoint {
                phi,
                theta,
                beta_q: bq,
                beta_c: bc,
                gap,
                violation: gap.is_some_and(|g| g > 1.0 + VIOLATION_EPS),
            })
        })
        .collect()
}

/// `x` with `digits` significant digits, trailing zeros removed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let e = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&e) {
        let s = format!("{:.*e}", digits.saturating_sub(1), x);
        let (m, ex) = s.split_once('e').expect("exponent");
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        return format!("{m}e{ex}");
    }
    let dec = (digits as i32 - 1 - e).max(0) as usize;
    let s = format!("{:.*}", dec, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `phi,theta,beta_q,beta_c,gap,violation`; an undefined gap is left empty.
pub fn scan_csv(points: &[ScanPoint]) -> String {
    let mut out = String::from("phi,theta,beta_q,beta_c,gap,violation\n");
    for p in points {
        let g = p.gap.map(|g| format_sig(g, 12)).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            format_sig(p.phi, 12),
            format_sig(p.theta, 12),
            format_sig(p.beta_q, 12),
            format_sig(p.beta_c, 12),
            g,
            p.violation
        )
        .expect("writing to a String");
    }
    out
}

/// `pass,coord,value,gap`.
pub fn trace_csv(trace: &[TraceEntry]) -> String {
    let mut out = String::from("pass,coord,value,gap\n");
    for t in trace {
        let g = t.gap.map(|g| format_sig(g, 12)).unwrap_or_default();
        writeln!(out, "{},{},{},{}", t.pass, t.coord, format_sig(t.value, 12), g).expect("writing to a String");
    }
    out
}
