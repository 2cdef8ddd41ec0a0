//! Thermal annealing of the truncated Heisenberg constraint.
//!
//! A run has three phases. Cooling: Metropolis sweeps with the temperature
//! lowered once per sweep and the step width tuned toward
//! [`TARGET_ACCEPTANCE`]. Measurement: the temperature and step width are
//! frozen and a sample is taken every `measure_stride` accepted moves.
//! Refinement: from the best state seen, geometric cooling by
//! `refine_decades` more decades followed by `quench_sweeps` sweeps at zero
//! temperature. Near the sphere optimum the landscape has soft directions
//! with shallow traps of height about `t_final`, so stopping at `t_final`
//! leaves the best value stuck well above the true minimum.
//! One sweep is as many proposals as there are coordinates.

mod param;
mod schedule;

pub use param::{propose, DiracParam, ParamKind, Realizer};
pub use schedule::{Schedule, ScheduleKind, MAX_DECREMENT};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{circle_constraint, sphere_constraint};
use crate::linalg::{ComplexMatrix, ZERO};
use crate::triples::{CircleTriple, Model, SphereTriple};

pub const TARGET_ACCEPTANCE: f64 = 0.3;
pub const INITIAL_ACCEPTANCE: f64 = 0.8;
pub const INITIAL_TRIALS: usize = 100;
/// Per-sweep temperature decrement during refinement.
pub const REFINE_DECREMENT: f64 = 0.005;
const SIGMA_RANGE: (f64, f64) = (1e-12, 1e3);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealConfig {
    pub c_speed: f64,
    pub t_final: f64,
    /// Initial proposal width; tuned while cooling.
    pub proposal_sigma: f64,
    pub n_measure: usize,
    pub measure_stride: usize,
    /// Step budget for cooling, and separately for measurement.
    pub max_steps: u64,
    pub seed: u64,
    /// Decades of further cooling below the measurement temperature.
    pub refine_decades: f64,
    pub quench_sweeps: usize,
    pub schedule: ScheduleKind,
}

impl AnnealConfig {
    pub fn defaults(model: Model) -> Self {
        AnnealConfig {
            c_speed: 1e-3,
            t_final: 1e-3,
            proposal_sigma: 0.1,
            n_measure: match model {
                Model::Circle => 500,
                Model::Sphere => 150,
            },
            // Wide enough that the soft modes decorrelate between samples.
            measure_stride: match model {
                Model::Circle => 200,
                Model::Sphere => 1500,
            },
            max_steps: 50_000_000,
            seed: 1,
            refine_decades: 5.0,
            quench_sweeps: 300,
            schedule: ScheduleKind::EntropyMatching,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.c_speed) {
            return Err(Error::invalid(format!("c_speed must be positive, got {}", self.c_speed)));
        }
        if !pos(self.t_final) {
            return Err(Error::invalid(format!("t_final must be positive, got {}", self.t_final)));
        }
        if !pos(self.proposal_sigma) {
            return Err(Error::invalid(format!("proposal_sigma must be positive, got {}", self.proposal_sigma)));
        }
        if !(self.refine_decades >= 0.0 && self.refine_decades.is_finite()) {
            return Err(Error::invalid(format!("refine_decades must be non-negative, got {}", self.refine_decades)));
        }
        if self.n_measure == 0 || self.measure_stride == 0 || self.max_steps == 0 {
            return Err(Error::invalid("n_measure, measure_stride and max_steps must be at least 1"));
        }
        Ok(())
    }
}

/// Anything the walker can minimize.
pub trait Landscape {
    fn n_params(&self) -> usize;
    fn energy(&self, p: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Circle(&'a CircleTriple),
    Sphere { triple: &'a SphereTriple, kappa: f64 },
}

/// A triple, a parametrization and (for the sphere) a normalization.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    target: Target<'a>,
    realizer: Realizer,
}

impl<'a> Problem<'a> {
    pub fn circle(triple: &'a CircleTriple) -> Result<Self> {
        Ok(Problem { target: Target::Circle(triple), realizer: Realizer::new(ParamKind::CircleReal, triple.dim())? })
    }

    pub fn sphere(triple: &'a SphereTriple, kind: ParamKind, kappa: f64) -> Result<Self> {
        if kind == ParamKind::CircleReal {
            return Err(Error::invalid("circle-real parametrizes circle operators only"));
        }
        if !(kappa.is_finite() && kappa != 0.0) {
            return Err(Error::invalid(format!("kappa must be finite and nonzero, got {kappa}")));
        }
        Ok(Problem { target: Target::Sphere { triple, kappa }, realizer: Realizer::new(kind, triple.dim())? })
    }

    pub fn kind(&self) -> ParamKind {
        self.realizer.kind()
    }

    pub fn dim(&self) -> usize {
        self.realizer.dim()
    }

    pub fn target(&self) -> Target<'a> {
        self.target
    }

    pub fn realize(&self, p: &[f64]) -> Result<ComplexMatrix> {
        self.realizer.realize(p)
    }
}

impl Landscape for Problem<'_> {
    fn n_params(&self) -> usize {
        self.realizer.n_params()
    }

    fn energy(&self, p: &[f64]) -> f64 {
        let d = self.realizer.realize_raw(p);
        let e = match self.target {
            Target::Circle(t) => match ComplexMatrix::from_nalgebra(d) {
                Ok(m) => circle_constraint(t, &m),
                Err(_) => f64::INFINITY,
            },
            Target::Sphere { triple, kappa } => sphere_constraint(triple, &d, kappa),
        };
        if e.is_finite() {
            e
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: u64,
    pub temperature: f64,
    pub energy: f64,
    pub best: f64,
}

/// Single-coordinate Metropolis walker.
pub struct Walker<'l, L: Landscape> {
    landscape: &'l L,
    params: Vec<f64>,
    energy: f64,
    sigma: f64,
    best_params: Vec<f64>,
    best_energy: f64,
    steps: u64,
}

impl<'l, L: Landscape> Walker<'l, L> {
    pub fn new(landscape: &'l L, params: Vec<f64>, sigma: f64) -> Result<Self> {
        if params.len() != landscape.n_params() {
            return Err(Error::DimensionMismatch { expected: landscape.n_params(), found: params.len() });
        }
        let energy = landscape.energy(&params);
        Ok(Walker { landscape, best_params: params.clone(), params, energy, sigma, best_energy: energy, steps: 0 })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn best(&self) -> (&[f64], f64) {
        (&self.best_params, self.best_energy)
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One proposal at temperature `t` (`t = 0` accepts downhill moves only).
    pub fn step(&mut self, t: f64, rng: &mut impl Rng) -> bool {
        self.steps += 1;
        let (idx, delta) = param::draw_move(self.params.len(), self.sigma, rng);
        let old = self.params[idx];
        self.params[idx] = old + delta;
        let e = self.landscape.energy(&self.params);
        let de = e - self.energy;
        let accept = de <= 0.0 || (t > 0.0 && e.is_finite() && rng.random::<f64>() < (-de / t).exp());
        if accept {
            self.energy = e;
            if e < self.best_energy {
                self.best_energy = e;
                self.best_params.copy_from_slice(&self.params);
            }
        } else {
            self.params[idx] = old;
        }
        accept
    }

    /// `n_params` proposals; returns the acceptance rate. Every energy
    /// visited is passed to `observe`.
    pub fn sweep(&mut self, t: f64, rng: &mut impl Rng, mut observe: impl FnMut(f64)) -> f64 {
        let n = self.params.len();
        let mut acc = 0;
        for _ in 0..n {
            if self.step(t, rng) {
                acc += 1;
            }
            observe(self.energy);
        }
        acc as f64 / n as f64
    }

    /// Nudges the step width toward `target` acceptance.
    pub fn tune(&mut self, acceptance: f64, target: f64) {
        self.sigma = (self.sigma * (2.0 * (acceptance - target)).exp()).clamp(SIGMA_RANGE.0, SIGMA_RANGE.1);
    }

    /// Restarts from the best state seen.
    pub fn reset_to_best(&mut self) {
        self.params.copy_from_slice(&self.best_params);
        self.energy = self.best_energy;
    }

    /// Temperature at which `trials` trial moves from the current state are
    /// accepted at rate `rate` on average. The state is left unchanged.
    pub fn calibrate_temperature(&mut self, trials: usize, rate: f64, rng: &mut impl Rng) -> f64 {
        let mut des = Vec::with_capacity(trials);
        for _ in 0..trials {
            let (idx, delta) = param::draw_move(self.params.len(), self.sigma, rng);
            let old = self.params[idx];
            self.params[idx] = old + delta;
            let e = self.landscape.energy(&self.params);
            self.params[idx] = old;
            des.push(e - self.energy);
        }
        let mean_acc = |t: f64| {
            des.iter().map(|&de| if de <= 0.0 { 1.0 } else { (-de / t).exp() }).sum::<f64>() / des.len() as f64
        };
        let finite_max = des.iter().copied().filter(|d| d.is_finite()).fold(0.0f64, f64::max);
        if finite_max <= 0.0 || mean_acc(f64::MAX) < rate {
            return finite_max.max(1.0);
        }
        let (mut lo, mut hi) = (1e-300f64.ln(), (finite_max * 1e6).ln());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mean_acc(mid.exp()) < rate {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi.exp()
    }
}

#[derive(Debug, Clone)]
pub struct WalkOutcome {
    pub best_params: Vec<f64>,
    pub best_energy: f64,
    pub trace: Vec<TraceRow>,
    /// Temperature fell below `t_final` and all samples were taken.
    pub complete: bool,
    pub initial_temperature: f64,
    pub final_temperature: f64,
    pub final_sigma: f64,
    pub steps: u64,
    pub samples_taken: usize,
}

/// Runs the three phases on `landscape` from `init`. `on_sample` receives the
/// coordinates at each measurement.
pub fn walk<L: Landscape>(
    landscape: &L,
    init: Vec<f64>,
    cfg: &AnnealConfig,
    rng: &mut impl Rng,
    mut on_sample: impl FnMut(&[f64]),
) -> Result<WalkOutcome> {
    cfg.validate()?;
    let n = landscape.n_params();
    if n == 0 {
        return Err(Error::invalid("landscape has no coordinates"));
    }
    let mut w = Walker::new(landscape, init, cfg.proposal_sigma)?;
    let mut trace = Vec::new();
    let mut t = w.calibrate_temperature(INITIAL_TRIALS, INITIAL_ACCEPTANCE, rng);
    let t0 = t;
    let mut schedule = Schedule::new(cfg.schedule, cfg.c_speed, n);
    let row = |w: &Walker<L>, t: f64| TraceRow { step: w.steps(), temperature: t, energy: w.energy(), best: w.best().1 };

    let mut cooled = false;
    while w.steps() < cfg.max_steps {
        if t < cfg.t_final {
            cooled = true;
            break;
        }
        let acc = w.sweep(t, rng, |e| schedule.observe(e));
        trace.push(row(&w, t));
        w.tune(acc, TARGET_ACCEPTANCE);
        t = schedule.next_temperature(t);
    }
    cooled |= t < cfg.t_final;

    let start = w.steps();
    let mut taken = 0;
    let mut since = 0;
    while taken < cfg.n_measure && w.steps() - start < cfg.max_steps {
        if w.step(t, rng) {
            since += 1;
            if since == cfg.measure_stride {
                on_sample(w.params());
                taken += 1;
                since = 0;
            }
        }
        if (w.steps() - start) % n as u64 == 0 {
            trace.push(row(&w, t));
        }
    }
    let final_temperature = t;
    let final_sigma = w.sigma();

    w.reset_to_best();
    let t_stop = t * 10f64.powf(-cfg.refine_decades);
    let mut tr = t;
    while tr > t_stop {
        let acc = w.sweep(tr, rng, |_| {});
        trace.push(row(&w, tr));
        w.tune(acc, TARGET_ACCEPTANCE);
        tr *= 1.0 - REFINE_DECREMENT;
    }
    for _ in 0..cfg.quench_sweeps {
        let acc = w.sweep(0.0, rng, |_| {});
        trace.push(row(&w, 0.0));
        w.tune(acc, TARGET_ACCEPTANCE);
    }

    let (bp, be) = w.best();
    Ok(WalkOutcome {
        best_params: bp.to_vec(),
        best_energy: be,
        trace,
        complete: cooled && taken == cfg.n_measure,
        initial_temperature: t0,
        final_temperature,
        final_sigma,
        steps: w.steps(),
        samples_taken: taken,
    })
}

#[derive(Debug, Clone)]
pub struct SampleAverage {
    pub mean: ComplexMatrix,
    /// Per-entry standard deviation, `sqrt(mean |z - mean|²)`.
    pub std: DMatrix<f64>,
}

pub fn average_samples(samples: &[ComplexMatrix]) -> Result<SampleAverage> {
    let first = samples.first().ok_or_else(|| Error::invalid("no samples to average"))?;
    let n = first.dim();
    if let Some(bad) = samples.iter().find(|s| s.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
    }
    let k = samples.len() as f64;
    let mut sum = DMatrix::from_element(n, n, ZERO);
    for s in samples {
        sum += s.as_nalgebra();
    }
    let mean = sum / Complex64::new(k, 0.0);
    let mut var = DMatrix::from_element(n, n, 0.0);
    for s in samples {
        for ((v, z), m) in var.iter_mut().zip(s.as_nalgebra().iter()).zip(mean.iter()) {
            *v += (z - m).norm_sqr();
        }
    }
    let std = var.map(|v| (v / k).sqrt());
    Ok(SampleAverage { mean: ComplexMatrix::from_nalgebra(mean)?, std })
}

#[derive(Debug, Clone)]
pub struct AnnealResult {
    pub best_param: DiracParam,
    pub best_constraint: f64,
    pub best_d: ComplexMatrix,
    pub samples: Vec<ComplexMatrix>,
    pub average_d: ComplexMatrix,
    pub average_std: DMatrix<f64>,
    pub trace: Vec<TraceRow>,
    pub config: AnnealConfig,
    pub seed: u64,
    pub complete: bool,
    pub initial_temperature: f64,
    pub final_temperature: f64,
    pub final_sigma: f64,
    pub steps: u64,
}

/// Anneals from standard-normal coordinates drawn from the seeded stream.
pub fn run(problem: &Problem, cfg: &AnnealConfig) -> Result<AnnealResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = DiracParam::random(problem.kind(), problem.dim(), &mut rng)?;
    let mut samples = Vec::new();
    let mut sample_err = None;
    let out = walk(problem, init.params, cfg, &mut rng, |p| match problem.realize(p) {
        Ok(d) => samples.push(d),
        Err(e) => sample_err = Some(e),
    })?;
    if let Some(e) = sample_err {
        return Err(e);
    }
    let best_param = DiracParam::new(problem.kind(), problem.dim(), out.best_params)?;
    let best_d = problem.realize(&best_param.params)?;
    let avg = if samples.is_empty() {
        SampleAverage { mean: best_d.clone(), std: DMatrix::from_element(best_d.dim(), best_d.dim(), 0.0) }
    } else {
        average_samples(&samples)?
    };
    Ok(AnnealResult {
        best_param,
        best_constraint: out.best_energy,
        best_d,
        samples,
        average_d: avg.mean,
        average_std: avg.std,
        trace: out.trace,
        config: cfg.clone(),
        seed: cfg.seed,
        complete: out.complete,
        initial_temperature: out.initial_temperature,
        final_temperature: out.final_temperature,
        final_sigma: out.final_sigma,
        steps: out.steps,
    })
}

/// Independent chains, one per seed, run concurrently. Results are in seed order.
pub fn run_chains(problem: &Problem, cfg: &AnnealConfig, seeds: &[u64]) -> Vec<Result<AnnealResult>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let cfg = AnnealConfig { seed, ..cfg.clone() };
                s.spawn(move || run(problem, &cfg))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::invalid("annealing chain panicked"))))
            .collect()
    })
}
