//! Inverse problem: recover a coherence-area layout from a noise map.
//!
//! The forward model is the analytic covariance engine evaluated over the
//! map grid; the objective is the sum of squared `nrf_db` residuals. The
//! optimizer is a bounded Nelder-Mead simplex restarted from a multistart
//! grid over the area centers, since the region-indicator geometry makes
//! derivative-free search the simplest robust choice.
//!
//! The probe/conjugate inversion symmetry is structural: candidate
//! conjugate footprints are always the reflected, scaled images of the
//! probe footprints, so symmetry violations are unrepresentable rather
//! than penalized. Fitted pairs are canonicalized by center x so
//! round-trip comparisons are well defined.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::exec::map_indexed;
use crate::geometry::phi;
use crate::scan::{ModeState, NoiseMap};
use crate::util::mix_seed;
use crate::{Error, Execution, Result};

/// Residuals below this RMS (dB) are numerically indistinguishable; the
/// model-selection score floors there so noiseless fits do not reward
/// extra pairs for chasing rounding error.
const RMS_FLOOR_DB: f64 = 1e-2;

/// One candidate pair: probe-plane center, footprint sigma, gain and
/// relative seed-flux weight (normalized across pairs inside the model).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams {
    pub center_x: f64,
    pub center_y: f64,
    pub sigma: f64,
    pub gain: f64,
    pub weight: f64,
}

/// Per-field box bounds; a collapsed box (`lo == hi`) freezes the field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub center_x: (f64, f64),
    pub center_y: (f64, f64),
    pub sigma: (f64, f64),
    pub gain: (f64, f64),
    pub weight: (f64, f64),
}

/// Parameterized layout hypothesis with `k` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FitModel {
    pub k: usize,
    pub pump_center: (f64, f64),
    pub conj_scale: f64,
    pub bounds: Bounds,
    /// Conjugate centers forced to the inversion image of the probe
    /// centers. This is structural in the forward model; the flag is
    /// kept for interface completeness and must currently be `true`.
    pub symmetric: bool,
}

impl FitModel {
    /// Bounds derived from the map extent: centers inside the probe scan
    /// range, sigma between 2% and 60% of it, gain up to 5, and
    /// out-of-plane centers frozen (a horizontal raster carries no
    /// information about them).
    pub fn for_map(k: usize, map: &NoiseMap) -> Self {
        let lo = map.probe_coords.first().copied().unwrap_or(-1.0);
        let hi = map.probe_coords.last().copied().unwrap_or(1.0);
        let span = hi - lo;
        FitModel {
            k,
            pump_center: (0.5 * (lo + hi), 0.0),
            conj_scale: crate::fixtures::CONJ_SCALE,
            bounds: Bounds {
                center_x: (lo, hi),
                center_y: (0.0, 0.0),
                sigma: (0.02 * span, 0.6 * span),
                gain: (1.0, 5.0),
                weight: (1e-6, 1.0),
            },
            symmetric: true,
        }
    }
}

/// Optimizer knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Multistart density: total starts are `starts_per_pair * k`.
    pub starts_per_pair: usize,
    pub max_iters: usize,
    /// Convergence tolerance on the simplex diameter in scaled
    /// parameters.
    pub tol: f64,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            starts_per_pair: 5,
            max_iters: 2000,
            tol: 1e-6,
            seed: 0,
        }
    }
}

/// Best local optimum found by the multistart search.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Canonicalized (sorted by center x) pair parameters with weights
    /// normalized to unit total.
    pub pairs: Vec<PairParams>,
    /// Root-mean-square `nrf_db` residual over the map.
    pub residual_rms_db: f64,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Bayesian information criterion `n ln(RSS/n) + p ln(n)`.
    pub score: f64,
    pub n_cells: usize,
}

fn mode_weight(m: ModeState) -> (f64, bool) {
    match m {
        ModeState::Plus => (1.0, true),
        ModeState::Minus => (-1.0, true),
        ModeState::Blocked => (0.0, false),
    }
}

/// Allocation-free forward model over a fixed map grid.
///
/// Per-axis transmissions are precomputed once per objective evaluation
/// (probe edges only depend on the probe coordinate and vice versa), so
/// one evaluation costs O((np + nc) k) Gaussian CDFs plus O(np nc k)
/// arithmetic. Its output is exercised against [`crate::scan::run_raster`]
/// in tests and must agree to 1e-12.
struct ForwardModel {
    probe_coords: Vec<f64>,
    conj_coords: Vec<f64>,
    target_db: Vec<f64>,
    pump_x: f64,
    conj_scale: f64,
    wa: f64,
    wb: f64,
    wc: f64,
    wd: f64,
    ca: bool,
    cb: bool,
    cc: bool,
    cd: bool,
}

impl ForwardModel {
    fn new(map: &NoiseMap) -> Self {
        let (wa, ca) = mode_weight(map.config.a);
        let (wb, cb) = mode_weight(map.config.b);
        let (wc, cc) = mode_weight(map.config.c);
        let (wd, cd) = mode_weight(map.config.d);
        ForwardModel {
            probe_coords: map.probe_coords.clone(),
            conj_coords: map.conj_coords.clone(),
            target_db: map.values.iter().map(|v| v.nrf_db).collect(),
            pump_x: 0.0,
            conj_scale: crate::fixtures::CONJ_SCALE,
            wa,
            wb,
            wc,
            wd,
            ca,
            cb,
            cc,
            cd,
        }
    }

    fn rss(&self, pairs: &[PairParams], scratch: &mut Scratch) -> f64 {
        let mut rss = 0.0;
        self.visit_residuals(pairs, scratch, |_, r| rss += r * r);
        if rss.is_finite() {
            rss
        } else {
            f64::INFINITY
        }
    }

    /// Mean squared `nrf_db` residual per probe coordinate.
    fn row_mean_sq_residual(&self, pairs: &[PairParams], scratch: &mut Scratch) -> Vec<f64> {
        let mut rows = vec![0.0; self.probe_coords.len()];
        self.visit_residuals(pairs, scratch, |i, r| rows[i] += r * r);
        let nc = self.conj_coords.len().max(1) as f64;
        for r in &mut rows {
            *r /= nc;
        }
        rows
    }

    fn visit_residuals<F: FnMut(usize, f64)>(
        &self,
        pairs: &[PairParams],
        scratch: &mut Scratch,
        mut visit: F,
    ) {
        let np = self.probe_coords.len();
        let nc = self.conj_coords.len();
        let k = pairs.len();
        let total_w: f64 = pairs.iter().map(|p| p.weight).sum();
        scratch.resize(k, np, nc);
        for (kk, p) in pairs.iter().enumerate() {
            let inv_s = 1.0 / p.sigma;
            for (i, &x) in self.probe_coords.iter().enumerate() {
                scratch.ta[kk * np + i] = phi((x - p.center_x) * inv_s);
                scratch.tb[kk * np + i] = phi((p.center_x - x) * inv_s);
            }
            let ccx = 2.0 * self.pump_x - p.center_x;
            let inv_sc = 1.0 / (p.sigma * self.conj_scale);
            for (j, &x) in self.conj_coords.iter().enumerate() {
                scratch.tc[kk * nc + j] = phi((x - ccx) * inv_sc);
                scratch.td[kk * nc + j] = phi((ccx - x) * inv_sc);
            }
        }
        // Per-pair moment prefactors with normalized weights.
        for (kk, p) in pairs.iter().enumerate() {
            let n0 = p.weight / total_w;
            let g = p.gain;
            scratch.mp[kk] = g * n0;
            scratch.mc[kk] = (g - 1.0) * n0;
            scratch.vp[kk] = g * (2.0 * g - 1.0) * n0;
            scratch.vc[kk] = (g - 1.0) * (2.0 * g - 1.0) * n0;
            scratch.cv[kk] = 2.0 * g * (g - 1.0) * n0;
        }
        for i in 0..np {
            for j in 0..nc {
                let mut var = 0.0;
                let mut snl = 0.0;
                for kk in 0..k {
                    let ta = scratch.ta[kk * np + i];
                    let tb = scratch.tb[kk * np + i];
                    let tc = scratch.tc[kk * nc + j];
                    let td = scratch.td[kk * nc + j];
                    let ap = self.wa * ta + self.wb * tb;
                    let w2p = self.wa * self.wa * ta + self.wb * self.wb * tb;
                    let ac = self.wc * tc + self.wd * td;
                    let w2c = self.wc * self.wc * tc + self.wd * self.wd * td;
                    let (mp, mcj) = (scratch.mp[kk], scratch.mc[kk]);
                    var += ap * ap * (scratch.vp[kk] - mp)
                        + w2p * mp
                        + ac * ac * (scratch.vc[kk] - mcj)
                        + w2c * mcj
                        + 2.0 * ap * ac * scratch.cv[kk];
                    let mut counted_p = 0.0;
                    if self.ca {
                        counted_p += ta;
                    }
                    if self.cb {
                        counted_p += tb;
                    }
                    let mut counted_c = 0.0;
                    if self.cc {
                        counted_c += tc;
                    }
                    if self.cd {
                        counted_c += td;
                    }
                    snl += counted_p * mp + counted_c * mcj;
                }
                let model_db = 10.0 * (var / snl).log10();
                visit(i, model_db - self.target_db[i * nc + j]);
            }
        }
    }
}

#[derive(Default)]
struct Scratch {
    ta: Vec<f64>,
    tb: Vec<f64>,
    tc: Vec<f64>,
    td: Vec<f64>,
    mp: Vec<f64>,
    mc: Vec<f64>,
    vp: Vec<f64>,
    vc: Vec<f64>,
    cv: Vec<f64>,
}

impl Scratch {
    fn resize(&mut self, k: usize, np: usize, nc: usize) {
        self.ta.resize(k * np, 0.0);
        self.tb.resize(k * np, 0.0);
        self.tc.resize(k * nc, 0.0);
        self.td.resize(k * nc, 0.0);
        self.mp.resize(k, 0.0);
        self.mc.resize(k, 0.0);
        self.vp.resize(k, 0.0);
        self.vc.resize(k, 0.0);
        self.cv.resize(k, 0.0);
    }
}

/// Field layout of the packed parameter vector.
struct Packing {
    /// (pair index, field index, lo, hi, scale) of each free parameter.
    free: Vec<(usize, usize, f64, f64, f64)>,
    template: Vec<PairParams>,
}

impl Packing {
    fn new(model: &FitModel, init: &[PairParams], center_scale: f64) -> Self {
        let b = &model.bounds;
        let fields = [
            (b.center_x, center_scale),
            (b.center_y, center_scale),
            (b.sigma, center_scale),
            (b.gain, 10.0),
            (b.weight, 1.0),
        ];
        let mut free = Vec::new();
        for k in 0..model.k {
            for (f, &((lo, hi), scale)) in fields.iter().enumerate() {
                if hi > lo {
                    free.push((k, f, lo, hi, scale));
                }
            }
        }
        Packing {
            free,
            template: init.to_vec(),
        }
    }

    fn pack(&self, pairs: &[PairParams]) -> Vec<f64> {
        self.free
            .iter()
            .map(|&(k, f, _, _, scale)| {
                let p = &pairs[k];
                let v = match f {
                    0 => p.center_x,
                    1 => p.center_y,
                    2 => p.sigma,
                    3 => p.gain,
                    _ => p.weight,
                };
                v / scale
            })
            .collect()
    }

    fn unpack(&self, x: &[f64]) -> Vec<PairParams> {
        let mut pairs = self.template.clone();
        for (&(k, f, lo, hi, scale), &xv) in self.free.iter().zip(x) {
            let v = (xv * scale).clamp(lo, hi);
            let p = &mut pairs[k];
            match f {
                0 => p.center_x = v,
                1 => p.center_y = v,
                2 => p.sigma = v,
                3 => p.gain = v,
                _ => p.weight = v,
            }
        }
        pairs
    }
}

/// Bounded Nelder-Mead over the packed vector. Returns the best point,
/// its objective, iterations used, convergence flag, and the trace of
/// best objective values (non-increasing across accepted iterations).
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> (Vec<f64>, f64, usize, bool, Vec<f64>) {
    let n = x0.len();
    if n == 0 {
        let fx = f(x0);
        return (x0.to_vec(), fx, 0, true, vec![fx]);
    }
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1e-8 {
            step * v[i].abs().max(0.05)
        } else {
            step * 0.05
        };
        simplex.push(v);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut history = Vec::new();
    let mut iters = 0;
    let mut converged = false;
    while iters < max_iters {
        iters += 1;
        // order ascending
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| fv[a].partial_cmp(&fv[b]).unwrap());
        let reorder_s: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let reorder_f: Vec<f64> = idx.iter().map(|&i| fv[i]).collect();
        simplex = reorder_s;
        fv = reorder_f;
        history.push(fv[0]);

        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|v| v[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        };
        let reflected = lerp(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        if fr < fv[0] {
            let expanded = lerp(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                fv[n] = fe;
            } else {
                simplex[n] = reflected;
                fv[n] = fr;
            }
        } else if fr < fv[n - 1] {
            simplex[n] = reflected;
            fv[n] = fr;
        } else {
            let contracted = if fr < fv[n] {
                lerp(&centroid, &worst, -0.5)
            } else {
                lerp(&centroid, &worst, 0.5)
            };
            let fc = f(&contracted);
            if fc < fv[n].min(fr) {
                simplex[n] = contracted;
                fv[n] = fc;
            } else {
                // shrink toward the best vertex
                for i in 1..=n {
                    simplex[i] = lerp(&simplex[0], &simplex[i], 0.5);
                    fv[i] = f(&simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..=n {
        if fv[i] < fv[best] {
            best = i;
        }
    }
    history.push(fv[best]);
    (simplex[best].clone(), fv[best], iters, converged, history)
}

fn canonicalize(mut pairs: Vec<PairParams>) -> Vec<PairParams> {
    let total: f64 = pairs.iter().map(|p| p.weight).sum();
    for p in &mut pairs {
        p.weight /= total;
    }
    pairs.sort_by(|a, b| a.center_x.partial_cmp(&b.center_x).unwrap());
    pairs
}

fn bic(rss: f64, n: usize, p: usize) -> f64 {
    let nf = n as f64;
    let per_cell = (rss / nf).max(RMS_FLOOR_DB * RMS_FLOOR_DB);
    nf * per_cell.ln() + p as f64 * (nf).ln()
}

fn default_start_sigma(model: &FitModel) -> f64 {
    let span = model.bounds.center_x.1 - model.bounds.center_x.0;
    (model.bounds.sigma.0 * 2.0)
        .min(model.bounds.sigma.1)
        .max((0.08 * span).clamp(model.bounds.sigma.0, model.bounds.sigma.1))
}

fn deterministic_starts(model: &FitModel, opts: &FitOptions) -> Vec<Vec<PairParams>> {
    let k = model.k;
    let n_starts = opts.starts_per_pair.max(1) * k;
    let (lo, hi) = model.bounds.center_x;
    let span = hi - lo;
    let sigma0 = default_start_sigma(model);
    (0..n_starts)
        .map(|s| {
            let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(opts.seed, 1000 + s as u64));
            (0..k)
                .map(|i| {
                    // Start 0 spreads centers evenly; later starts jitter.
                    let frac = (i as f64 + 0.5) / k as f64;
                    let cx = if s == 0 {
                        lo + frac * span
                    } else {
                        lo + rng.random::<f64>() * span
                    };
                    let gain = if s == 0 {
                        1.3
                    } else {
                        1.05 + 0.8 * rng.random::<f64>()
                    };
                    PairParams {
                        center_x: cx,
                        center_y: model.bounds.center_y.0,
                        sigma: sigma0,
                        gain,
                        weight: 1.0 / k as f64,
                    }
                })
                .collect()
        })
        .collect()
}

fn run_one_start(
    forward: &ForwardModel,
    model: &FitModel,
    opts: &FitOptions,
    init: &[PairParams],
    center_scale: f64,
) -> (f64, Vec<PairParams>, usize, bool) {
    let packing = Packing::new(model, init, center_scale);
    let mut scratch = Scratch::default();
    let mut evals = |x: &[f64]| forward.rss(&packing.unpack(x), &mut scratch);
    let x0 = packing.pack(init);
    let (mut x, mut fx, mut total_iters, mut conv, _) =
        nelder_mead(&mut evals, &x0, 0.25, opts.max_iters, opts.tol);
    // Fresh-simplex restarts deepen convergence of the simplex search.
    for _ in 0..3 {
        let (x2, f2, it2, c2, _) = nelder_mead(&mut evals, &x, 0.05, opts.max_iters, opts.tol);
        total_iters += it2;
        if f2 + 1e-15 < fx {
            x = x2;
            fx = f2;
            conv = c2;
        } else {
            conv = conv || c2;
            break;
        }
    }
    (fx, packing.unpack(&x), total_iters, conv)
}

/// Fits a `k`-pair layout to a noise map by multistart simplex search.
///
/// Non-convergence is reported through the `converged` flag, never by
/// silent success.
pub fn fit_layout(map: &NoiseMap, model: &FitModel, opts: &FitOptions) -> Result<FitResult> {
    fit_layout_with_starts(map, model, opts, &[])
}

/// [`fit_layout`] with extra caller-provided warm starts appended to the
/// multistart grid.
pub fn fit_layout_with_starts(
    map: &NoiseMap,
    model: &FitModel,
    opts: &FitOptions,
    warm_starts: &[Vec<PairParams>],
) -> Result<FitResult> {
    let n = map.n_cells();
    if n == 0 {
        return Err(Error::Fit("empty map".into()));
    }
    if model.k == 0 {
        return Err(Error::Fit("need at least one pair".into()));
    }
    if model.k * 5 + 2 > n {
        return Err(Error::Fit(format!(
            "{} parameters exceed {} map cells",
            model.k * 5 + 2,
            n
        )));
    }
    if !model.symmetric {
        return Err(Error::Fit(
            "only symmetry-constrained fits are supported".into(),
        ));
    }
    let forward = ForwardModel::new(map);
    let span = model.bounds.center_x.1 - model.bounds.center_x.0;
    let center_scale = (span / 4.0).max(1e-9);
    let mut starts = deterministic_starts(model, opts);
    starts.extend(warm_starts.iter().cloned());
    let results = map_indexed(Execution::default(), starts.len(), |s| {
        run_one_start(&forward, model, opts, &starts[s], center_scale)
    });
    let mut best: Option<(f64, Vec<PairParams>, usize, bool)> = None;
    let mut total_iters = 0;
    for r in results {
        total_iters += r.2;
        let better = match &best {
            None => true,
            Some(b) => r.0 < b.0,
        };
        if better {
            best = Some(r);
        }
    }
    let (mut rss, mut pairs, _, mut converged) = best.unwrap();
    // Greedy revival: a pair that converged to a no-op (unit gain or
    // negligible weight) explains nothing, which usually marks a local
    // optimum one component short. Relaunch it at the probe coordinate
    // with the largest remaining residual and keep the result if better.
    let mut scratch = Scratch::default();
    for _ in 0..model.k {
        let total_w: f64 = pairs.iter().map(|p| p.weight).sum();
        let Some(dead) = pairs
            .iter()
            .position(|p| p.gain - 1.0 < 0.02 || p.weight < 1e-3 * total_w)
        else {
            break;
        };
        let rows = forward.row_mean_sq_residual(&pairs, &mut scratch);
        let Some(worst_row) = (0..rows.len()).max_by(|&a, &b| {
            rows[a]
                .partial_cmp(&rows[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        }) else {
            break;
        };
        let mut init = pairs.clone();
        init[dead].center_x = forward.probe_coords[worst_row]
            .clamp(model.bounds.center_x.0, model.bounds.center_x.1);
        init[dead].sigma = default_start_sigma(model);
        init[dead].gain = 1.3_f64.clamp(model.bounds.gain.0, model.bounds.gain.1);
        let (r_rss, r_pairs, r_iters, r_conv) =
            run_one_start(&forward, model, opts, &init, center_scale);
        total_iters += r_iters;
        if r_rss + 1e-15 < rss {
            rss = r_rss;
            pairs = r_pairs;
            converged = r_conv;
        } else {
            break;
        }
    }
    let pairs = canonicalize(pairs);
    Ok(FitResult {
        residual_rms_db: (rss / n as f64).sqrt(),
        rss,
        iterations: total_iters,
        converged,
        score: bic(rss, n, 5 * model.k + 2),
        n_cells: n,
        pairs,
    })
}

/// Model-selection outcome over a range of pair counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSelection {
    pub best_k: usize,
    pub fits: Vec<(usize, FitResult)>,
}

/// Fits every `k` in the range and picks the lowest information
/// criterion; ties break toward fewer pairs. Each `k + 1` fit is warm
/// started from the `k` optimum with one near-zero-weight extra pair, so
/// the residual never worsens with added pairs on the same data.
pub fn select_model(
    map: &NoiseMap,
    k_range: std::ops::RangeInclusive<usize>,
    opts: &FitOptions,
) -> Result<ModelSelection> {
    if k_range.is_empty() {
        return Err(Error::Fit("empty K range".into()));
    }
    let mut fits = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    let mut prev: Option<Vec<PairParams>> = None;
    for k in k_range {
        let model = FitModel::for_map(k, map);
        let warm: Vec<Vec<PairParams>> = match &prev {
            Some(p) if p.len() + 1 == k => {
                let mut w = p.clone();
                w.push(PairParams {
                    center_x: model.pump_center.0,
                    center_y: model.bounds.center_y.0,
                    sigma: model.bounds.sigma.0.max(0.05),
                    gain: 1.001,
                    weight: 1e-6,
                });
                vec![w]
            }
            _ => vec![],
        };
        let fit = fit_layout_with_starts(map, &model, opts, &warm)?;
        if best.map_or(true, |(_, s)| fit.score < s) {
            best = Some((k, fit.score));
        }
        prev = Some(fit.pairs.clone());
        fits.push((k, fit));
    }
    Ok(ModelSelection {
        best_k: best.unwrap().0,
        fits,
    })
}

/// Order-of-magnitude count of spatial modes supported by the
/// four-wave-mixing angular acceptance: `(theta_acc / theta_d)^2` with
/// the diffraction half-angle `theta_d = lambda / (pi w_pump)`.
///
/// This quadratic angle-ratio form is this crate's explicit stand-in for
/// the mode-counting technique referenced in the literature; treat the
/// result as an estimate, not a measurement.
pub fn estimate_mode_count(
    pump_waist_mm: f64,
    wavelength_nm: f64,
    acceptance_half_angle_mrad: f64,
) -> Result<f64> {
    if !(pump_waist_mm > 0.0 && wavelength_nm > 0.0 && acceptance_half_angle_mrad > 0.0) {
        return Err(Error::Domain("all inputs must be positive".into()));
    }
    let theta_d = wavelength_nm * 1e-9 / (std::f64::consts::PI * pump_waist_mm * 1e-3);
    let theta_acc = acceptance_half_angle_mrad * 1e-3;
    Ok((theta_acc / theta_d).powi(2))
}
