//! Simulation of recognition count data and maximum-likelihood recovery of
//! the covert-judgment parameters, with a closed-form moment estimator as
//! an independent check on the fit.
//!
//! The optimizer is cyclic coordinate ascent over the parameter box. Along
//! each coordinate every cell probability is affine, so each slice of the
//! binomial log-likelihood is concave and a bracketed golden-section search
//! maximizes it exactly; only improving steps are accepted, which makes the
//! ascent monotone by construction.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ftt::{predict_dichotomies, BiasParams, DichotomyPredictions, FttParams, Label};
use crate::scalar::Real;

/// Name of the seedable generator behind [`simulate_counts`], for output
/// metadata.
pub const GENERATOR_NAME: &str = "ChaCha8";

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind")]
pub enum EstimationError {
    #[error("cell ({discrimination}|{probe}) has no observations")]
    EmptyCell { discrimination: Label, probe: Label },
    #[error("yes-count {yes} exceeds total {total} in cell ({discrimination}|{probe})")]
    CountExceedsTotal {
        discrimination: Label,
        probe: Label,
        yes: u64,
        total: u64,
    },
    #[error("n_per_cell must be at least 1")]
    ZeroDraws,
    #[error("counts CSV malformed: {reason}")]
    CsvMalformed { reason: String },
}

/// Yes/total counts for one (discrimination, probe type) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCount {
    pub yes: u64,
    pub total: u64,
}

/// Nine-cell count table: for each discrimination Y and probe type Z, how
/// often subjects answered "Y" out of how many Z probes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    // cells[discrimination][probe]
    cells: [[CellCount; 3]; 3],
}

impl CountTable {
    pub fn new(cells: [[CellCount; 3]; 3]) -> Result<Self, EstimationError> {
        for disc in Label::ALL {
            for probe in Label::ALL {
                let c = cells[disc.index()][probe.index()];
                if c.yes > c.total {
                    return Err(EstimationError::CountExceedsTotal {
                        discrimination: disc,
                        probe,
                        yes: c.yes,
                        total: c.total,
                    });
                }
            }
        }
        Ok(CountTable { cells })
    }

    pub fn cell(&self, discrimination: Label, probe: Label) -> CellCount {
        self.cells[discrimination.index()][probe.index()]
    }

    /// Observed frequencies, with empty cells reported as an error.
    pub fn frequencies<R: Real>(&self) -> Result<[[R; 3]; 3], EstimationError> {
        let mut f = [[R::zero(); 3]; 3];
        for disc in Label::ALL {
            for probe in Label::ALL {
                let c = self.cell(disc, probe);
                if c.total == 0 {
                    return Err(EstimationError::EmptyCell {
                        discrimination: disc,
                        probe,
                    });
                }
                f[disc.index()][probe.index()] =
                    R::from_u64(c.yes).expect("count fits the scalar")
                        / R::from_u64(c.total).expect("count fits the scalar");
            }
        }
        Ok(f)
    }

    /// CSV with header `discrimination,probe_type,yes,total` and nine data
    /// rows, discrimination-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("discrimination,probe_type,yes,total\n");
        for disc in Label::ALL {
            for probe in Label::ALL {
                let c = self.cell(disc, probe);
                writeln!(out, "{disc},{probe},{},{}", c.yes, c.total)
                    .expect("writing to a String cannot fail");
            }
        }
        out
    }

    /// Parses the CSV form; rows may come in any order but each of the nine
    /// cells must appear exactly once.
    pub fn from_csv(text: &str) -> Result<Self, EstimationError> {
        let malformed = |reason: String| EstimationError::CsvMalformed { reason };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| malformed("empty input".into()))?;
        let expected = "discrimination,probe_type,yes,total";
        if header.trim() != expected {
            return Err(malformed(format!(
                "header {header:?}, expected {expected:?}"
            )));
        }
        let mut cells = [[None::<CellCount>; 3]; 3];
        for line in lines {
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 4 {
                return Err(malformed(format!("row {line:?} does not have 4 fields")));
            }
            let disc: Label = fields[0].parse().map_err(&malformed)?;
            let probe: Label = fields[1].parse().map_err(&malformed)?;
            let yes: u64 = fields[2]
                .parse()
                .map_err(|e| malformed(format!("bad yes count {:?}: {e}", fields[2])))?;
            let total: u64 = fields[3]
                .parse()
                .map_err(|e| malformed(format!("bad total {:?}: {e}", fields[3])))?;
            let slot = &mut cells[disc.index()][probe.index()];
            if slot.is_some() {
                return Err(malformed(format!("duplicate cell ({disc}|{probe})")));
            }
            *slot = Some(CellCount { yes, total });
        }
        let mut table = [[CellCount { yes: 0, total: 0 }; 3]; 3];
        for disc in Label::ALL {
            for probe in Label::ALL {
                table[disc.index()][probe.index()] = cells[disc.index()][probe.index()]
                    .ok_or_else(|| malformed(format!("missing cell ({disc}|{probe})")))?;
            }
        }
        CountTable::new(table)
    }
}

/// Draws each cell as an independent binomial with success probability from
/// the forward model. Bit-reproducible for a given seed.
pub fn simulate_counts<R: Real>(
    params: &FttParams<R>,
    bias: Option<&BiasParams<R>>,
    n_per_cell: u64,
    seed: u64,
) -> Result<CountTable, EstimationError> {
    if n_per_cell == 0 {
        return Err(EstimationError::ZeroDraws);
    }
    let predictions = predict_dichotomies(params, bias);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = [[CellCount { yes: 0, total: 0 }; 3]; 3];
    for disc in Label::ALL {
        for probe in Label::ALL {
            let p = predictions
                .p(disc, probe)
                .to_f64()
                .expect("probability converts to f64")
                .clamp(0.0, 1.0);
            let yes = Binomial::new(n_per_cell, p)
                .expect("p is a probability")
                .sample(&mut rng);
            cells[disc.index()][probe.index()] = CellCount {
                yes,
                total: n_per_cell,
            };
        }
    }
    CountTable::new(cells)
}

/// Flags qualifying a moment estimate: clamping marks data inconsistent
/// with the model, unidentifiability marks a σ with no information left
/// (reported as the boundary value 0, never an arbitrary interior value).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentFlags {
    pub clamped_iota_t: bool,
    pub clamped_sigma_t: bool,
    pub clamped_nu_r: bool,
    pub clamped_sigma_r: bool,
    pub unidentifiable_sigma_t: bool,
    pub unidentifiable_sigma_r: bool,
}

impl MomentFlags {
    pub fn any_clamped(&self) -> bool {
        self.clamped_iota_t || self.clamped_sigma_t || self.clamped_nu_r || self.clamped_sigma_r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct MomentEstimate<R: Real> {
    pub params: FttParams<R>,
    pub flags: MomentFlags,
}

/// Closed-form inversion of the forward equations:
/// ι̂ = f(T|T) − f(R|T), σ̂_t = f(R|T)/(1−ι̂), and symmetrically for
/// related distractors. Results are clamped into [0, 1] with flags.
pub fn moment_estimate<R: Real>(freq: &[[R; 3]; 3]) -> MomentEstimate<R> {
    let f = |d: Label, p: Label| freq[d.index()][p.index()];
    let one = R::one();
    let mut flags = MomentFlags::default();

    let iota_raw = f(Label::T, Label::T) - f(Label::R, Label::T);
    let sigma_t_raw = if iota_raw < one {
        f(Label::R, Label::T) / (one - iota_raw)
    } else {
        flags.unidentifiable_sigma_t = true;
        R::zero()
    };
    let nu_raw = f(Label::R, Label::R) - f(Label::T, Label::R);
    let sigma_r_raw = if nu_raw < one {
        f(Label::T, Label::R) / (one - nu_raw)
    } else {
        flags.unidentifiable_sigma_r = true;
        R::zero()
    };

    let clamp = |x: R, flag: &mut bool| -> R {
        if x < R::zero() {
            *flag = true;
            R::zero()
        } else if x > one {
            *flag = true;
            one
        } else {
            x
        }
    };
    let iota_t = clamp(iota_raw, &mut flags.clamped_iota_t);
    let sigma_t = clamp(sigma_t_raw, &mut flags.clamped_sigma_t);
    let nu_r = clamp(nu_raw, &mut flags.clamped_nu_r);
    let sigma_r = clamp(sigma_r_raw, &mut flags.clamped_sigma_r);

    MomentEstimate {
        params: FttParams::new(iota_t, sigma_t, nu_r, sigma_r)
            .expect("clamped values are in the box"),
        flags,
    }
}

/// Which parameters are free in the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitModel {
    /// The four covert-judgment parameters, baseline bias (0, 0, 1).
    FourParam,
    /// Covert-judgment parameters plus the three response biases.
    SevenParam,
}

impl FitModel {
    pub fn free_parameters(self) -> usize {
        match self {
            FitModel::FourParam => 4,
            FitModel::SevenParam => 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FitOptions<R: Real> {
    /// Convergence threshold on the log-likelihood gain of a full sweep.
    pub tol: R,
    pub max_iter: usize,
}

impl<R: Real> Default for FitOptions<R> {
    fn default() -> Self {
        FitOptions {
            tol: R::of(1e-8),
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FitResult<R: Real> {
    pub params: FttParams<R>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub bias: Option<BiasParams<R>>,
    pub log_likelihood: R,
    pub converged: bool,
    pub iterations: usize,
    pub predicted: DichotomyPredictions<R>,
    pub max_abs_residual: R,
    /// Parameters reported at the boundary value 0 because the data leave
    /// them free.
    pub unidentifiable: Vec<String>,
    /// Present when the model contradicts the counts outright (a fixed
    /// probability of 0 or 1 against opposing observations).
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub infeasible: Option<String>,
    /// Log-likelihood after each sweep, nondecreasing.
    pub log_likelihood_trace: Vec<R>,
}

const INIT_MARGIN: f64 = 1e-3;
const UNIDENTIFIABLE_EPS: f64 = 1e-9;

/// Maximizes the binomial log-likelihood over the parameter box.
///
/// Initialization comes from [`moment_estimate`] clamped into
/// [1e-3, 1−1e-3]; iteration is cyclic coordinate ascent with a
/// golden-section line search, accepting only improvements; convergence is
/// a full sweep gaining less than `options.tol`, after which polish sweeps
/// run until the gain falls under a 1e-10-scale floor. Deterministic given
/// counts and options.
pub fn fit_mle<R: Real>(
    counts: &CountTable,
    model: FitModel,
    options: &FitOptions<R>,
) -> Result<FitResult<R>, EstimationError> {
    let freq = counts.frequencies::<R>()?;

    // Structural feasibility of the fixed cells under the four-parameter
    // model: p(T|U) = p(R|U) = 0 and p(U|U) = 1 regardless of parameters.
    if model == FitModel::FourParam {
        let mut bad = Vec::new();
        for (disc, probe, forced_one) in [
            (Label::T, Label::U, false),
            (Label::R, Label::U, false),
            (Label::U, Label::U, true),
        ] {
            let c = counts.cell(disc, probe);
            let contradicted = if forced_one { c.yes < c.total } else { c.yes > 0 };
            if contradicted {
                bad.push(format!("({disc}|{probe})"));
            }
        }
        if !bad.is_empty() {
            let init = moment_estimate(&freq).params;
            return Ok(FitResult {
                params: init,
                bias: None,
                log_likelihood: R::neg_infinity(),
                converged: false,
                iterations: 0,
                predicted: predict_dichotomies(&init, None),
                max_abs_residual: max_abs_residual(&predict_dichotomies(&init, None), &freq),
                unidentifiable: Vec::new(),
                infeasible: Some(format!(
                    "model forces probability 0 or 1 against the counts in {}",
                    bad.join(", ")
                )),
                log_likelihood_trace: Vec::new(),
            });
        }
    }

    let init = moment_estimate(&freq).params;
    let lo = R::of(INIT_MARGIN);
    let hi = R::one() - lo;
    let squeeze = |x: R| x.max(lo).min(hi);
    let mut theta: Vec<R> = init.as_array().iter().map(|&x| squeeze(x)).collect();
    if model == FitModel::SevenParam {
        theta.push(squeeze(freq[Label::T.index()][Label::U.index()]));
        theta.push(squeeze(freq[Label::R.index()][Label::U.index()]));
        theta.push(squeeze(freq[Label::U.index()][Label::U.index()]));
    }

    let objective = |theta: &[R]| -> R { log_likelihood(theta, model, counts) };

    let mut current = objective(&theta);
    debug_assert!(current.is_finite(), "interior initialization is feasible");
    let mut trace = vec![current];
    let mut converged = false;
    let mut iterations = 0usize;

    while iterations < options.max_iter {
        iterations += 1;
        let before = current;
        for k in 0..theta.len() {
            let (x, value) = maximize_coordinate(&theta, k, &objective);
            if value > current {
                theta[k] = x;
                current = value;
            }
        }
        assert!(
            current >= before,
            "log-likelihood decreased within a sweep"
        );
        trace.push(current);
        let gain = current - before;
        if !converged && gain < options.tol {
            converged = true;
        }
        // Polish: keep sweeping until the residual gain is negligible on
        // the scale of the final iterate.
        if converged && gain < R::of(1e-10).max(current.abs() * R::of(1e-15)) {
            break;
        }
    }

    let mut params = FttParams::new(theta[0], theta[1], theta[2], theta[3])
        .expect("ascent stays inside the box");
    let bias = match model {
        FitModel::FourParam => None,
        FitModel::SevenParam => Some(
            BiasParams::new(theta[4], theta[5], theta[6]).expect("ascent stays inside the box"),
        ),
    };

    // Identifiability convention: a σ multiplied everywhere by a vanishing
    // (1 − verbatim) factor is reported as 0 with a flag.
    let mut unidentifiable = Vec::new();
    let eps = R::of(UNIDENTIFIABLE_EPS);
    let arr = params.as_array();
    let (mut sigma_t, mut sigma_r) = (arr[1], arr[3]);
    if R::one() - arr[0] <= eps {
        sigma_t = R::zero();
        unidentifiable.push("sigma_t".to_string());
    }
    if R::one() - arr[2] <= eps {
        sigma_r = R::zero();
        unidentifiable.push("sigma_r".to_string());
    }
    if !unidentifiable.is_empty() {
        params = FttParams::new(arr[0], sigma_t, arr[2], sigma_r)
            .expect("convention keeps the box");
        let mut full: Vec<R> = params.as_array().to_vec();
        if let Some(b) = &bias {
            full.extend(b.as_array());
        }
        current = objective(&full);
    }

    let predicted = predict_dichotomies(&params, bias.as_ref());
    Ok(FitResult {
        params,
        bias,
        log_likelihood: current,
        converged,
        iterations,
        predicted,
        max_abs_residual: max_abs_residual(&predicted, &freq),
        unidentifiable,
        infeasible: None,
        log_likelihood_trace: trace,
    })
}

fn max_abs_residual<R: Real>(predicted: &DichotomyPredictions<R>, freq: &[[R; 3]; 3]) -> R {
    let mut worst = R::zero();
    for disc in Label::ALL {
        for probe in Label::ALL {
            worst = worst.max((predicted.p(disc, probe) - freq[disc.index()][probe.index()]).abs());
        }
    }
    worst
}

fn log_likelihood<R: Real>(theta: &[R], model: FitModel, counts: &CountTable) -> R {
    let params = match FttParams::new(theta[0], theta[1], theta[2], theta[3]) {
        Ok(p) => p,
        Err(_) => return R::neg_infinity(),
    };
    let bias = match model {
        FitModel::FourParam => None,
        FitModel::SevenParam => match BiasParams::new(theta[4], theta[5], theta[6]) {
            Ok(b) => Some(b),
            Err(_) => return R::neg_infinity(),
        },
    };
    let predictions = predict_dichotomies(&params, bias.as_ref());
    let mut total = R::zero();
    for disc in Label::ALL {
        for probe in Label::ALL {
            let c = counts.cell(disc, probe);
            total += cell_log_likelihood(c, predictions.p(disc, probe));
            if total == R::neg_infinity() {
                return total;
            }
        }
    }
    total
}

/// y·ln p + (n−y)·ln(1−p) under the convention 0·ln 0 = 0; a probability of
/// 0 or 1 against opposing counts is −∞ (the point is infeasible).
fn cell_log_likelihood<R: Real>(cell: CellCount, p: R) -> R {
    let yes = R::from_u64(cell.yes).expect("count fits the scalar");
    let no = R::from_u64(cell.total - cell.yes).expect("count fits the scalar");
    let mut value = R::zero();
    if cell.yes > 0 {
        if p <= R::zero() {
            return R::neg_infinity();
        }
        value += yes * p.ln();
    }
    if cell.total - cell.yes > 0 {
        if p >= R::one() {
            return R::neg_infinity();
        }
        value += no * (R::one() - p).ln();
    }
    value
}

/// One-dimensional maximization over [0, 1] along coordinate `k`: a coarse
/// grid to bracket the optimum of the concave slice, then golden-section
/// refinement.
fn maximize_coordinate<R: Real>(
    theta: &[R],
    k: usize,
    objective: &impl Fn(&[R]) -> R,
) -> (R, R) {
    let mut probe = theta.to_vec();
    let mut eval = |x: R| -> R {
        probe[k] = x;
        objective(&probe)
    };

    const GRID: usize = 32;
    let step = R::of(1.0 / GRID as f64);
    let mut best_x = theta[k];
    let mut best_v = eval(best_x);
    for i in 0..=GRID {
        let x = step * R::of(i as f64);
        let v = eval(x);
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }

    let mut lo = (best_x - step).max(R::zero());
    let mut hi = (best_x + step).min(R::one());
    let inv_phi = R::of(0.618_033_988_749_894_9);
    let mut x1 = hi - (hi - lo) * inv_phi;
    let mut x2 = lo + (hi - lo) * inv_phi;
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    let width_tol = R::of(1e-12);
    while hi - lo > width_tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * inv_phi;
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * inv_phi;
            f2 = eval(x2);
        }
    }
    let (xm, fm) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if fm > best_v {
        (xm, fm)
    } else {
        (best_x, best_v)
    }
}

/// Per-cell comparison of observed frequencies with fitted probabilities.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct CellGof<R: Real> {
    pub discrimination: Label,
    pub probe: Label,
    pub observed: R,
    pub predicted: R,
    pub abs_residual: R,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct GofReport<R: Real> {
    pub cells: Vec<CellGof<R>>,
    pub max_abs_residual: R,
    /// Likelihood-ratio statistic G² = 2Σ[y·ln(y/(np)) + (n−y)·ln((n−y)/(n(1−p)))].
    pub g_squared: R,
    pub degrees_of_freedom: usize,
}

pub fn goodness_of_fit<R: Real>(
    result: &FitResult<R>,
    counts: &CountTable,
) -> Result<GofReport<R>, EstimationError> {
    let freq = counts.frequencies::<R>()?;
    let mut cells = Vec::with_capacity(9);
    let mut g_squared = R::zero();
    let mut max_abs = R::zero();
    for disc in Label::ALL {
        for probe in Label::ALL {
            let c = counts.cell(disc, probe);
            let observed = freq[disc.index()][probe.index()];
            let predicted = result.predicted.p(disc, probe);
            let abs_residual = (observed - predicted).abs();
            max_abs = max_abs.max(abs_residual);
            g_squared += g_squared_cell(c, predicted);
            cells.push(CellGof {
                discrimination: disc,
                probe,
                observed,
                predicted,
                abs_residual,
            });
        }
    }
    let free = if result.bias.is_some() { 7 } else { 4 };
    Ok(GofReport {
        cells,
        max_abs_residual: max_abs,
        g_squared: R::of(2.0) * g_squared,
        degrees_of_freedom: 9 - free,
    })
}

fn g_squared_cell<R: Real>(cell: CellCount, p: R) -> R {
    let n = R::from_u64(cell.total).expect("count fits the scalar");
    let yes = R::from_u64(cell.yes).expect("count fits the scalar");
    let no = R::from_u64(cell.total - cell.yes).expect("count fits the scalar");
    let mut value = R::zero();
    if cell.yes > 0 {
        let expected = n * p;
        if expected <= R::zero() {
            return R::infinity();
        }
        value += yes * (yes / expected).ln();
    }
    if cell.total - cell.yes > 0 {
        let expected = n * (R::one() - p);
        if expected <= R::zero() {
            return R::infinity();
        }
        value += no * (no / expected).ln();
    }
    value
}
