//! Gaussian-mixture motion and odometry noise.
//!
//! Each movement action carries two 3-D mixture models over `(dx, dy,
//! dtheta)` residuals, both expressed in the pre-action agent frame:
//!
//! * **actuation**: realized motion minus the commanded motion — what the
//!   base actually did;
//! * **sensor**: odometry reading minus realized motion — what the wheel
//!   encoders mis-reported.
//!
//! Models are fit from calibration trials by expectation-maximization with
//! k-means++ seeding, restarts, and a held-out likelihood sweep over the
//! component count. Everything is seeded and deterministic.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::geometry::{wrap_angle, PoseDelta};
use crate::world::Action;
use crate::{Error, Result};

/// Lower bound enforced on every covariance eigenvalue [m^2 / rad^2].
pub const COVARIANCE_FLOOR: f64 = 1e-8;

/// Held-out fraction of calibration samples used for component-count
/// selection.
pub const DEFAULT_HOLDOUT_FRACTION: f64 = 1.0 / 6.0;

/// EM stops when the mean per-sample log-likelihood improves by less than
/// this, or after [`MAX_EM_ITERATIONS`].
pub const EM_TOLERANCE: f64 = 1e-6;
pub const MAX_EM_ITERATIONS: usize = 200;

/// Independent EM restarts per candidate component count.
pub const EM_RESTARTS: usize = 5;

type Vec3 = [f64; 3];
type Mat3 = [[f64; 3]; 3];

/// Cholesky factor L (lower-triangular, `m = L L^T`), or `None` when `m` is
/// not positive definite.
fn cholesky3(m: &Mat3) -> Option<Mat3> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut sum = m[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][j] = libm::sqrt(sum);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

fn sub3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

const LOG_2PI: f64 = 1.8378770664093453;

/// One weighted Gaussian with a cached Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
struct Component {
    weight: f64,
    mean: Vec3,
    cov: Mat3,
    chol: Mat3,
    /// `-0.5 * (3 ln 2pi + ln det cov)`.
    log_norm: f64,
}

impl Component {
    fn new(weight: f64, mean: Vec3, cov: Mat3) -> Result<Self> {
        let chol = cholesky3(&cov).ok_or_else(|| {
            Error::DegenerateData(String::from("covariance is not positive definite"))
        })?;
        let log_det = 2.0 * (libm::log(chol[0][0]) + libm::log(chol[1][1]) + libm::log(chol[2][2]));
        Ok(Component { weight, mean, cov, chol, log_norm: -0.5 * (3.0 * LOG_2PI + log_det) })
    }

    /// Log density at `x` (without the mixture weight).
    fn log_pdf(&self, x: &Vec3) -> f64 {
        let d = sub3(x, &self.mean);
        // Forward-substitute L z = d; the quadratic form is |z|^2.
        let l = &self.chol;
        let z0 = d[0] / l[0][0];
        let z1 = (d[1] - l[1][0] * z0) / l[1][1];
        let z2 = (d[2] - l[2][0] * z0 - l[2][1] * z1) / l[2][2];
        self.log_norm - 0.5 * (z0 * z0 + z1 * z1 + z2 * z2)
    }
}

/// A mixture of full-covariance 3-D Gaussians over pose residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture3d {
    comps: Vec<Component>,
}

impl GaussianMixture3d {
    /// Builds and validates a mixture. Weights must be non-negative and sum
    /// to 1 within 1e-9; every covariance must be symmetric with minimum
    /// eigenvalue at least [`COVARIANCE_FLOOR`].
    pub fn new(weights: &[f64], means: &[Vec3], covariances: &[Mat3]) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != covariances.len()
        {
            return Err(Error::InvalidArgument(format!(
                "mixture needs matching non-empty weights/means/covariances, got {}/{}/{}",
                weights.len(),
                means.len(),
                covariances.len()
            )));
        }
        let sum: f64 = weights.iter().sum();
        if !sum.is_finite() || libm::fabs(sum - 1.0) > 1e-9 || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mixture weights must be non-negative and sum to 1, got sum {sum}"
            )));
        }
        let mut comps = Vec::with_capacity(weights.len());
        for (idx, ((&w, m), c)) in weights.iter().zip(means).zip(covariances).enumerate() {
            if m.iter().any(|v| !v.is_finite()) || c.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("mixture parameters"));
            }
            for i in 0..3 {
                for j in 0..i {
                    if libm::fabs(c[i][j] - c[j][i]) > 1e-9 {
                        return Err(Error::InvalidArgument(format!(
                            "covariance {idx} is not symmetric"
                        )));
                    }
                }
            }
            // min eigenvalue >= floor  <=>  cov - (floor - slack) I is PD.
            let slack = COVARIANCE_FLOOR * 1e-6;
            let mut shifted = *c;
            for i in 0..3 {
                shifted[i][i] -= COVARIANCE_FLOOR - slack;
            }
            if cholesky3(&shifted).is_none() {
                return Err(Error::InvalidArgument(format!(
                    "covariance {idx} has an eigenvalue below the {COVARIANCE_FLOOR} floor"
                )));
            }
            comps.push(Component::new(w, *m, *c)?);
        }
        Ok(GaussianMixture3d { comps })
    }

    pub fn component_count(&self) -> usize {
        self.comps.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c.weight).collect()
    }

    pub fn means(&self) -> Vec<Vec3> {
        self.comps.iter().map(|c| c.mean).collect()
    }

    pub fn covariances(&self) -> Vec<Mat3> {
        self.comps.iter().map(|c| c.cov).collect()
    }

    /// Log density of the mixture at `x`, computed with log-sum-exp.
    pub fn log_density(&self, x: &Vec3) -> f64 {
        let mut max = f64::NEG_INFINITY;
        let mut terms = [0.0; 32];
        let mut heap_terms;
        let terms: &mut [f64] = if self.comps.len() <= 32 {
            &mut terms[..self.comps.len()]
        } else {
            heap_terms = vec![0.0; self.comps.len()];
            &mut heap_terms
        };
        for (t, c) in terms.iter_mut().zip(&self.comps) {
            *t = if c.weight > 0.0 { libm::log(c.weight) + c.log_pdf(x) } else { f64::NEG_INFINITY };
            if *t > max {
                max = *t;
            }
        }
        if !max.is_finite() {
            return f64::NEG_INFINITY;
        }
        let mut sum = 0.0;
        for &t in terms.iter() {
            sum += libm::exp(t - max);
        }
        max + libm::log(sum)
    }

    /// Mean log density over a sample set.
    pub fn mean_log_density(&self, xs: &[Vec3]) -> f64 {
        if xs.is_empty() {
            return f64::NEG_INFINITY;
        }
        xs.iter().map(|x| self.log_density(x)).sum::<f64>() / xs.len() as f64
    }

    /// Draws one residual. Component choice and the normal draws both come
    /// from `rng`, so a fixed seed reproduces the sequence exactly.
    pub fn sample(&self, rng: &mut impl Rng) -> PoseDelta {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.comps.len() - 1;
        for (i, c) in self.comps.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                chosen = i;
                break;
            }
        }
        let c = &self.comps[chosen];
        let z: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let l = &c.chol;
        let x = c.mean[0] + l[0][0] * z[0];
        let y = c.mean[1] + l[1][0] * z[0] + l[1][1] * z[1];
        let t = c.mean[2] + l[2][0] * z[0] + l[2][1] * z[1] + l[2][2] * z[2];
        PoseDelta { dx: x, dy: y, dtheta: wrap_angle(t) }
    }
}

/// Which of the two per-action models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Actuation,
    Sensor,
}

/// Actuation + sensor models for one action.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionNoise {
    pub actuation: GaussianMixture3d,
    pub sensor: GaussianMixture3d,
}

/// The six fitted models: three movement actions times two noise kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModelSet {
    pub forward: ActionNoise,
    pub turn_left: ActionNoise,
    pub turn_right: ActionNoise,
}

impl NoiseModelSet {
    /// Models for a movement action; `Stop` has no associated noise.
    pub fn for_action(&self, action: Action) -> Option<&ActionNoise> {
        match action {
            Action::Forward => Some(&self.forward),
            Action::TurnLeft => Some(&self.turn_left),
            Action::TurnRight => Some(&self.turn_right),
            Action::Stop => None,
        }
    }

    pub fn get(&self, action: Action, kind: NoiseKind) -> Option<&GaussianMixture3d> {
        self.for_action(action).map(|a| match kind {
            NoiseKind::Actuation => &a.actuation,
            NoiseKind::Sensor => &a.sensor,
        })
    }
}

/// One calibration trial: the agent executed `action` once from a known
/// start; `lidar` is the scan-matched (treated as true) resulting motion and
/// `odom` the odometry reading, both relative to the pre-action frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTrial {
    pub action: Action,
    pub lidar: Vec3,
    pub odom: Vec3,
}

/// A set of calibration trials, usually parsed from CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CalibrationDataset {
    pub trials: Vec<CalibrationTrial>,
}

impl CalibrationDataset {
    /// Extracts the residual samples for one `(action, kind)` model.
    ///
    /// Actuation residuals are `lidar - command`, sensor residuals
    /// `odom - lidar`, component-wise with the angle difference wrapped.
    pub fn residuals(&self, action: Action, kind: NoiseKind) -> Vec<Vec3> {
        let cmd = action.command();
        self.trials
            .iter()
            .filter(|t| t.action == action)
            .map(|t| match kind {
                NoiseKind::Actuation => [
                    t.lidar[0] - cmd.dx,
                    t.lidar[1] - cmd.dy,
                    wrap_angle(t.lidar[2] - cmd.dtheta),
                ],
                NoiseKind::Sensor => [
                    t.odom[0] - t.lidar[0],
                    t.odom[1] - t.lidar[1],
                    wrap_angle(t.odom[2] - t.lidar[2]),
                ],
            })
            .collect()
    }
}

/// Result of one [`fit_gmm`] call.
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub model: GaussianMixture3d,
    pub selected_k: usize,
    /// Mean held-out log-likelihood of the selected model.
    pub validation_ll: f64,
    /// Mean fit-split log-likelihood of the selected model.
    pub fit_ll: f64,
    /// `(k, validation mean log-likelihood)` for every candidate tried.
    pub candidates: Vec<(usize, f64)>,
}

/// Fits a mixture to `samples`, sweeping the component count.
///
/// The samples are shuffled deterministically with `seed`, a
/// `holdout_fraction` tail is reserved for validation, and each candidate
/// `k` gets [`EM_RESTARTS`] seeded EM runs; the candidate with the highest
/// validation mean log-likelihood wins, ties broken toward smaller `k`.
pub fn fit_gmm(
    samples: &[Vec3],
    k_candidates: &[usize],
    holdout_fraction: f64,
    seed: u64,
) -> Result<GmmFit> {
    if k_candidates.is_empty() || k_candidates.iter().any(|&k| k == 0) {
        return Err(Error::InvalidArgument(String::from(
            "component counts must be a non-empty list of positive integers",
        )));
    }
    if !(0.0..1.0).contains(&holdout_fraction) {
        return Err(Error::InvalidArgument(format!(
            "holdout fraction must be in [0, 1), got {holdout_fraction}"
        )));
    }
    if samples.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("calibration samples"));
    }
    let max_k = *k_candidates.iter().max().unwrap();
    let n_val = libm::round(samples.len() as f64 * holdout_fraction) as usize;
    let n_fit = samples.len().saturating_sub(n_val);
    if n_fit <= max_k {
        return Err(Error::InsufficientData { need: max_k + 1 + n_val, got: samples.len() });
    }
    let identical = samples.windows(2).all(|w| w[0] == w[1]);
    if identical && max_k > 1 {
        return Err(Error::DegenerateData(String::from(
            "all samples are identical; a single component (k = 1) is the only meaningful fit",
        )));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut shuffled: Vec<Vec3> = samples.to_vec();
    // Fisher-Yates with draws from the seeded stream.
    for i in (1..shuffled.len()).rev() {
        let j = rng.random_range(0..=i);
        shuffled.swap(i, j);
    }
    let (fit, val) = shuffled.split_at(n_fit);

    let mut ks: Vec<usize> = k_candidates.to_vec();
    ks.sort_unstable();
    ks.dedup();

    let mut best: Option<(usize, f64, EmOutcome)> = None;
    let mut candidates = Vec::with_capacity(ks.len());
    for &k in &ks {
        let mut best_run: Option<EmOutcome> = None;
        for _ in 0..EM_RESTARTS {
            let restart_seed = rng.random::<u64>();
            let run = em(fit, k, restart_seed)?;
            if best_run.as_ref().map_or(true, |b| run.fit_ll > b.fit_ll) {
                best_run = Some(run);
            }
        }
        let run = best_run.unwrap();
        let val_ll =
            if val.is_empty() { run.fit_ll } else { run.model.mean_log_density(val) };
        candidates.push((k, val_ll));
        // Strict improvement required, so exact ties keep the smaller k.
        if best.as_ref().map_or(true, |(_, b, _)| val_ll > *b) {
            best = Some((k, val_ll, run));
        }
    }
    let (selected_k, validation_ll, run) = best.unwrap();
    Ok(GmmFit { model: run.model, selected_k, validation_ll, fit_ll: run.fit_ll, candidates })
}

struct EmOutcome {
    model: GaussianMixture3d,
    fit_ll: f64,
    #[allow(dead_code)]
    ll_trace: Vec<f64>,
}

/// Mean and covariance of a sample set, covariance floored.
fn moments(samples: &[Vec3]) -> (Vec3, Mat3) {
    let n = samples.len() as f64;
    let mut mean = [0.0; 3];
    for s in samples {
        for d in 0..3 {
            mean[d] += s[d];
        }
    }
    for d in 0..3 {
        mean[d] /= n;
    }
    let mut cov = [[0.0; 3]; 3];
    for s in samples {
        let d = sub3(s, &mean);
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] /= n;
        }
        cov[i][i] += COVARIANCE_FLOOR;
    }
    (mean, cov)
}

/// One seeded EM run: k-means++ initialization, then iterate to the
/// tolerance. Log-likelihood is asserted non-decreasing along the way.
fn em(samples: &[Vec3], k: usize, seed: u64) -> Result<EmOutcome> {
    let n = samples.len();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    // k-means++ seeding: first center uniform, then distance^2-weighted.
    let mut centers: Vec<Vec3> = Vec::with_capacity(k);
    centers.push(samples[rng.random_range(0..n)]);
    let mut d2 = vec![0.0f64; n];
    while centers.len() < k {
        let mut total = 0.0;
        for (i, s) in samples.iter().enumerate() {
            let d = centers
                .iter()
                .map(|c| {
                    let v = sub3(s, c);
                    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
                })
                .fold(f64::INFINITY, f64::min);
            d2[i] = d;
            total += d;
        }
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    idx = i;
                    break;
                }
            }
            idx
        } else {
            // All remaining mass at the centers; fall back to uniform.
            rng.random_range(0..n)
        };
        centers.push(samples[pick]);
    }

    // Initial parameters: hard-assign to the seeded centers for weights, a
    // shared global covariance for shape.
    let (_, global_cov) = moments(samples);
    let mut counts = vec![0usize; k];
    for s in samples {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (j, c) in centers.iter().enumerate() {
            let v = sub3(s, c);
            let d = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        counts[best] += 1;
    }
    let mut weights: Vec<f64> = counts.iter().map(|&c| c as f64 + 1e-9).collect();
    let wsum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= wsum);
    let mut means = centers;
    let mut covs = vec![global_cov; k];

    let mut comps: Vec<Component> = weights
        .iter()
        .zip(&means)
        .zip(&covs)
        .map(|((&w, m), c)| Component::new(w, *m, *c))
        .collect::<Result<_>>()?;

    let mut resp = vec![0.0f64; n * k];
    let mut prev_ll = f64::NEG_INFINITY;
    let mut ll_trace = Vec::new();
    for _iter in 0..MAX_EM_ITERATIONS {
        // E step in log space.
        let mut ll = 0.0;
        for (i, s) in samples.iter().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            let mut max = f64::NEG_INFINITY;
            for (j, c) in comps.iter().enumerate() {
                row[j] = if c.weight > 0.0 {
                    libm::log(c.weight) + c.log_pdf(s)
                } else {
                    f64::NEG_INFINITY
                };
                if row[j] > max {
                    max = row[j];
                }
            }
            let mut denom = 0.0;
            for r in row.iter_mut() {
                *r = libm::exp(*r - max);
                denom += *r;
            }
            for r in row.iter_mut() {
                *r /= denom;
            }
            ll += max + libm::log(denom);
        }
        let ll = ll / n as f64;
        // Not asserted monotone here: the covariance floor and collapsed-
        // component reseeds can dip the likelihood between iterations.
        ll_trace.push(ll);
        let done = ll - prev_ll < EM_TOLERANCE;
        prev_ll = ll;
        if done {
            break;
        }

        // M step.
        for j in 0..k {
            let nj: f64 = (0..n).map(|i| resp[i * k + j]).sum();
            if nj < 1e-12 * n as f64 {
                // Collapsed component: reseed on the point the current model
                // explains worst. Deterministic, and EM resumes cleanly.
                let gm = GaussianMixture3d { comps: comps.clone() };
                let worst = (0..n)
                    .min_by(|&a, &b| {
                        gm.log_density(&samples[a])
                            .partial_cmp(&gm.log_density(&samples[b]))
                            .unwrap()
                    })
                    .unwrap();
                means[j] = samples[worst];
                covs[j] = global_cov;
                weights[j] = 1.0 / n as f64;
                continue;
            }
            let mut mean = [0.0; 3];
            for (i, s) in samples.iter().enumerate() {
                let r = resp[i * k + j];
                for d in 0..3 {
                    mean[d] += r * s[d];
                }
            }
            for d in 0..3 {
                mean[d] /= nj;
            }
            let mut cov = [[0.0; 3]; 3];
            for (i, s) in samples.iter().enumerate() {
                let r = resp[i * k + j];
                let d = sub3(s, &mean);
                for a in 0..3 {
                    for b in 0..3 {
                        cov[a][b] += r * d[a] * d[b];
                    }
                }
            }
            for a in 0..3 {
                for b in 0..3 {
                    cov[a][b] /= nj;
                }
                cov[a][a] += COVARIANCE_FLOOR;
            }
            weights[j] = nj / n as f64;
            means[j] = mean;
            covs[j] = cov;
        }
        let wsum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= wsum);
        comps = weights
            .iter()
            .zip(&means)
            .zip(&covs)
            .map(|((&w, m), c)| Component::new(w, *m, *c))
            .collect::<Result<_>>()?;
    }

    Ok(EmOutcome { model: GaussianMixture3d { comps }, fit_ll: prev_ll, ll_trace })
}

/// Report entry from [`build_noise_models`].
#[derive(Debug, Clone)]
pub struct NoiseFitEntry {
    pub action: Action,
    pub kind: NoiseKind,
    pub samples: usize,
    pub selected_k: usize,
    pub validation_ll: f64,
}

/// Fits all six models from a calibration dataset.
pub fn build_noise_models(
    data: &CalibrationDataset,
    k_candidates: &[usize],
    holdout_fraction: f64,
    seed: u64,
) -> Result<(NoiseModelSet, Vec<NoiseFitEntry>)> {
    let mut report = Vec::with_capacity(6);
    let mut fit_one = |action: Action, kind: NoiseKind, salt: u64| -> Result<GaussianMixture3d> {
        let samples = data.residuals(action, kind);
        let fit = fit_gmm(&samples, k_candidates, holdout_fraction, seed ^ salt)?;
        report.push(NoiseFitEntry {
            action,
            kind,
            samples: samples.len(),
            selected_k: fit.selected_k,
            validation_ll: fit.validation_ll,
        });
        Ok(fit.model)
    };
    let set = NoiseModelSet {
        forward: ActionNoise {
            actuation: fit_one(Action::Forward, NoiseKind::Actuation, 0x01)?,
            sensor: fit_one(Action::Forward, NoiseKind::Sensor, 0x02)?,
        },
        turn_left: ActionNoise {
            actuation: fit_one(Action::TurnLeft, NoiseKind::Actuation, 0x03)?,
            sensor: fit_one(Action::TurnLeft, NoiseKind::Sensor, 0x04)?,
        },
        turn_right: ActionNoise {
            actuation: fit_one(Action::TurnRight, NoiseKind::Actuation, 0x05)?,
            sensor: fit_one(Action::TurnRight, NoiseKind::Sensor, 0x06)?,
        },
    };
    Ok((set, report))
}

/// Draws a synthetic calibration dataset from a known model set: each trial
/// executes one action, perturbs it with an actuation draw, and corrupts the
/// odometry reading with a sensor draw. Useful for closed-loop validation of
/// the fitting pipeline and for generating demo data.
pub fn synthesize_calibration(
    models: &NoiseModelSet,
    trials_per_action: usize,
    seed: u64,
) -> CalibrationDataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(trials_per_action * 3);
    for action in [Action::Forward, Action::TurnLeft, Action::TurnRight] {
        let cmd = action.command();
        let noise = models.for_action(action).expect("movement action");
        for _ in 0..trials_per_action {
            let act = noise.actuation.sample(&mut rng);
            let lidar = [
                cmd.dx + act.dx,
                cmd.dy + act.dy,
                wrap_angle(cmd.dtheta + act.dtheta),
            ];
            let sen = noise.sensor.sample(&mut rng);
            let odom = [
                lidar[0] + sen.dx,
                lidar[1] + sen.dy,
                wrap_angle(lidar[2] + sen.dtheta),
            ];
            trials.push(CalibrationTrial { action, lidar, odom });
        }
    }
    CalibrationDataset { trials }
}

fn diag(sx: f64, sy: f64, st: f64) -> Mat3 {
    [[sx * sx, 0.0, 0.0], [0.0, sy * sy, 0.0], [0.0, 0.0, st * st]]
}

/// Bundled reference noise models, scaled to a small indoor
/// differential-drive base taking 0.25 m / 10 degree steps.
///
/// Actuation noise is the dominant term (wheel slip, carpet drag, a slight
/// rightward pull), modeled with two components for the forward action:
/// nominal travel plus an occasional-understep mode. Odometry noise is
/// smaller in translation but carries meaningful heading error, which is
/// what the scan-alignment pose corrector exists to absorb.
pub fn default_models() -> NoiseModelSet {
    let deg = core::f64::consts::PI / 180.0;
    let fwd_act = GaussianMixture3d::new(
        &[0.75, 0.25],
        &[[0.006, 0.002, 0.2 * deg], [-0.012, -0.004, -0.5 * deg]],
        &[diag(0.008, 0.005, 0.8 * deg), diag(0.012, 0.007, 1.2 * deg)],
    )
    .expect("reference forward actuation model");
    let turn_act = |sign: f64| {
        GaussianMixture3d::new(
            &[1.0],
            &[[0.001, 0.0005 * sign, sign * 0.4 * deg]],
            &[diag(0.003, 0.003, 1.0 * deg)],
        )
        .expect("reference turn actuation model")
    };
    let sensor = |sx: f64, st_deg: f64| {
        GaussianMixture3d::new(&[1.0], &[[0.0, 0.0, 0.0]], &[diag(sx, sx, st_deg * deg)])
            .expect("reference sensor model")
    };
    NoiseModelSet {
        forward: ActionNoise { actuation: fwd_act, sensor: sensor(0.004, 1.0) },
        turn_left: ActionNoise { actuation: turn_act(1.0), sensor: sensor(0.003, 1.1) },
        turn_right: ActionNoise { actuation: turn_act(-1.0), sensor: sensor(0.003, 1.1) },
    }
}
