//! Bacterial foraging optimizer (global-best swarming variant) over a bounded box.
//!
//! The optimizer maximizes the supplied [`Objective`]. Internally every step works on
//! the cost `-objective`, so a bacterium is "doing better" when its swarm-adjusted
//! cost decreases and the healthiest bacteria are those with the lowest accumulated
//! cost. Reported values are always in objective (maximization) terms.
//!
//! One run is a triple loop: `dispersal_events` × `reproduction_steps` ×
//! `chemotactic_steps`. Each chemotactic step visits every bacterium in index order:
//! evaluate, update the global best, add the swarm term, tumble, move, then keep
//! swimming along the same direction for up to `swim_length` extra moves while the
//! swarm-adjusted cost keeps improving. After every chemotactic lifetime the
//! healthier half splits in place; after every reproduction cycle each bacterium is
//! relocated with probability `dispersal_probability`.
//!
//! All randomness comes from one [`Xoshiro256PlusPlus`] stream seeded with
//! `seed_from_u64(seed)` (SplitMix64 expansion), so runs are bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Random source used by the optimizer.
pub type BfoRng = Xoshiro256PlusPlus;

pub fn seeded_rng(seed: u64) -> BfoRng {
    BfoRng::seed_from_u64(seed)
}

#[derive(Debug, Error, PartialEq)]
pub enum BfoError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

/// A pure function to maximize.
pub trait Objective {
    fn evaluate(&self, position: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> Objective for F {
    fn evaluate(&self, position: &[f64]) -> f64 {
        self(position)
    }
}

/// Run-length unit `C(i)`, shared or per bacterium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSize {
    Uniform(f64),
    PerBacterium(Vec<f64>),
}

/// Attract/repel coefficients of the swarming cost term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmCoefficients {
    pub attract_depth: f64,
    pub attract_width: f64,
    pub repel_height: f64,
    pub repel_width: f64,
}

impl SwarmCoefficients {
    pub const DEFAULT: Self =
        Self { attract_depth: 0.1, attract_width: 0.2, repel_height: 0.1, repel_width: 10.0 };

    pub const NONE: Self =
        Self { attract_depth: 0.0, attract_width: 0.0, repel_height: 0.0, repel_width: 0.0 };
}

impl Default for SwarmCoefficients {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfoConfig {
    /// Number of bacteria `S` (even).
    pub population: usize,
    /// Chemotactic steps per reproduction cycle `N_c`.
    pub chemotactic_steps: usize,
    /// Maximum swim length `N_s`.
    pub swim_length: usize,
    /// Reproduction steps per dispersal event `N_re`.
    pub reproduction_steps: usize,
    /// Elimination-dispersal events `N_ed`.
    pub dispersal_events: usize,
    /// Per-bacterium dispersal probability `P_ed`.
    pub dispersal_probability: f64,
    pub step_size: StepSize,
    pub swarm: SwarmCoefficients,
    pub seed: u64,
}

impl Default for BfoConfig {
    fn default() -> Self {
        Self {
            population: 20,
            chemotactic_steps: 50,
            swim_length: 4,
            reproduction_steps: 4,
            dispersal_events: 2,
            dispersal_probability: 0.25,
            step_size: StepSize::Uniform(2.0),
            swarm: SwarmCoefficients::DEFAULT,
            seed: 0,
        }
    }
}

impl BfoConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), BfoError> {
        let bad = |msg: String| Err(BfoError::InvalidConfig(msg));
        if self.population < 2 || !self.population.is_multiple_of(2) {
            return bad(format!("population must be even and >= 2, got {}", self.population));
        }
        for (name, v) in [
            ("chemotactic_steps", self.chemotactic_steps),
            ("swim_length", self.swim_length),
            ("reproduction_steps", self.reproduction_steps),
            ("dispersal_events", self.dispersal_events),
        ] {
            if v == 0 {
                return bad(format!("{name} must be >= 1"));
            }
        }
        if !(0.0..=1.0).contains(&self.dispersal_probability) {
            return bad(format!(
                "dispersal_probability must lie in [0, 1], got {}",
                self.dispersal_probability
            ));
        }
        let steps = self.step_sizes();
        if steps.len() != self.population {
            return bad(format!(
                "{} step sizes given for a population of {}",
                steps.len(),
                self.population
            ));
        }
        if let Some(c) = steps.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return bad(format!("step sizes must be positive and finite, got {c}"));
        }
        let s = &self.swarm;
        if [s.attract_depth, s.attract_width, s.repel_height, s.repel_width]
            .iter()
            .any(|v| !v.is_finite())
        {
            return bad("swarming coefficients must be finite".into());
        }
        Ok(())
    }

    pub fn step_sizes(&self) -> Vec<f64> {
        match &self.step_size {
            StepSize::Uniform(c) => vec![*c; self.population],
            StepSize::PerBacterium(v) => v.clone(),
        }
    }

    /// Length of the convergence trace: one entry per chemotactic step.
    pub fn total_chemotactic_steps(&self) -> usize {
        self.dispersal_events * self.reproduction_steps * self.chemotactic_steps
    }
}

/// Closed interval applied to every coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self, BfoError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(BfoError::InvalidConfig(format!("bounds [{lo}, {hi}] are not a valid interval")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|&v| v >= self.lo && v <= self.hi)
    }

    fn sample(&self, rng: &mut BfoRng, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| rng.gen_range(self.lo..=self.hi)).collect()
    }
}

/// Normalizes a raw tumble vector to unit length; `None` for the zero vector.
pub fn normalize_direction(raw: &[f64]) -> Option<Vec<f64>> {
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| raw.iter().map(|v| v / norm).collect())
}

/// Random unit direction with each raw component uniform on `[-1, 1]`.
pub fn tumble_direction(rng: &mut BfoRng, dim: usize) -> Vec<f64> {
    assert!(dim >= 1, "tumble direction needs at least one dimension");
    loop {
        let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if let Some(dir) = normalize_direction(&raw) {
            return dir;
        }
    }
}

/// `x + step * dir`, clamped into `bounds`.
pub fn move_along(x: &[f64], step: f64, dir: &[f64], bounds: Bounds) -> Vec<f64> {
    x.iter()
        .zip(dir)
        .map(|(&xi, &di)| (xi + step * di).clamp(bounds.lo, bounds.hi))
        .collect()
}

/// Swarming cost of `x` relative to the global best position.
pub fn swarm_cost(x: &[f64], best: &[f64], coeffs: &SwarmCoefficients) -> f64 {
    let d: f64 = x.iter().zip(best).map(|(a, b)| (a - b) * (a - b)).sum();
    -coeffs.attract_depth * (-coeffs.attract_width * d).exp()
        + coeffs.repel_height * (-coeffs.repel_width * d).exp()
}

/// Accumulated cost of a bacterium over one chemotactic lifetime.
pub fn health(per_step_costs: &[f64]) -> f64 {
    per_step_costs.iter().sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestRecord {
    pub position: Vec<f64>,
    /// Objective value (maximization terms).
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacterialPopulation {
    pub positions: Vec<Vec<f64>>,
    /// Accumulated swarm-adjusted cost in the current generation.
    pub health: Vec<f64>,
    pub step_sizes: Vec<f64>,
    pub best: Option<BestRecord>,
    pub chemotactic_step: usize,
    pub reproduction_step: usize,
    pub dispersal_event: usize,
}

impl BacterialPopulation {
    pub fn new(positions: Vec<Vec<f64>>, step_sizes: Vec<f64>) -> Self {
        assert_eq!(positions.len(), step_sizes.len());
        let n = positions.len();
        Self {
            positions,
            health: vec![0.0; n],
            step_sizes,
            best: None,
            chemotactic_step: 0,
            reproduction_step: 0,
            dispersal_event: 0,
        }
    }

    pub fn random(cfg: &BfoConfig, dim: usize, bounds: Bounds, rng: &mut BfoRng) -> Self {
        let positions = (0..cfg.population).map(|_| bounds.sample(rng, dim)).collect();
        Self::new(positions, cfg.step_sizes())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Records `value` at `position` if it beats the global best.
    pub fn observe(&mut self, position: &[f64], value: f64) {
        let better = match &self.best {
            None => true,
            Some(b) => value > b.value,
        };
        if better {
            self.best = Some(BestRecord { position: position.to_vec(), value });
        }
    }

    /// Kills the less healthy half (highest accumulated cost) and splits each survivor
    /// in place. Ties keep the lower index. Health is reset afterwards.
    pub fn reproduce(&mut self) {
        let n = self.len();
        assert!(n.is_multiple_of(2), "reproduction requires an even population");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.health[a].total_cmp(&self.health[b]));
        let survivors = &order[..n / 2];
        let positions: Vec<Vec<f64>> =
            survivors.iter().chain(survivors).map(|&i| self.positions[i].clone()).collect();
        let step_sizes: Vec<f64> =
            survivors.iter().chain(survivors).map(|&i| self.step_sizes[i]).collect();
        self.positions = positions;
        self.step_sizes = step_sizes;
        self.health.iter_mut().for_each(|h| *h = 0.0);
    }

    /// Relocates each bacterium uniformly within `bounds` with probability `p`.
    /// One uniform draw per bacterium is always consumed. Returns the number moved.
    pub fn eliminate_disperse(&mut self, rng: &mut BfoRng, p: f64, bounds: Bounds) -> usize {
        let mut moved = 0;
        for x in &mut self.positions {
            if rng.gen::<f64>() < p {
                *x = bounds.sample(rng, x.len());
                moved += 1;
            }
        }
        moved
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub best_position: Vec<f64>,
    pub best_value: f64,
    /// Best-so-far objective after each chemotactic step.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

impl OptimizeResult {
    /// Convergence trace as `step,best_objective` CSV lines with a header.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,best_objective\n");
        for (i, v) in self.trace.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, v));
        }
        out
    }
}

/// Points in a run where [`optimize_with_observer`] reports the population state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Initialized,
    /// A tumble or swim move of the given bacterium.
    Moved(usize),
    ChemotacticStepDone,
    Reproduced,
    Dispersed,
}

pub fn optimize<O: Objective + ?Sized>(
    objective: &O,
    dim: usize,
    bounds: Bounds,
    cfg: &BfoConfig,
) -> Result<OptimizeResult, BfoError> {
    optimize_with_observer(objective, dim, bounds, cfg, |_, _| {})
}

pub fn optimize_with_observer<O, F>(
    objective: &O,
    dim: usize,
    bounds: Bounds,
    cfg: &BfoConfig,
    mut observer: F,
) -> Result<OptimizeResult, BfoError>
where
    O: Objective + ?Sized,
    F: FnMut(Event, &BacterialPopulation),
{
    cfg.validate()?;
    let bounds = Bounds::new(bounds.lo, bounds.hi)?;
    if dim == 0 {
        return Err(BfoError::InvalidConfig("dimension must be >= 1".into()));
    }

    let mut rng = seeded_rng(cfg.seed);
    let mut pop = BacterialPopulation::random(cfg, dim, bounds, &mut rng);
    let mut trace = Vec::with_capacity(cfg.total_chemotactic_steps());
    let mut evaluations = 0usize;
    observer(Event::Initialized, &pop);

    // cost = -objective, plus the swarm term against the current global best
    let mut swarm_adjusted = |pop: &mut BacterialPopulation, x: &[f64]| -> f64 {
        let value = objective.evaluate(x);
        evaluations += 1;
        pop.observe(x, value);
        let best = &pop.best.as_ref().expect("best is set by observe").position;
        -value + swarm_cost(x, best, &cfg.swarm)
    };

    for ell in 0..cfg.dispersal_events {
        pop.dispersal_event = ell;
        for k in 0..cfg.reproduction_steps {
            pop.reproduction_step = k;
            for j in 0..cfg.chemotactic_steps {
                pop.chemotactic_step = j;
                for i in 0..pop.len() {
                    let here = pop.positions[i].clone();
                    let cost = swarm_adjusted(&mut pop, &here);
                    pop.health[i] += cost;
                    let mut last = cost;

                    let dir = tumble_direction(&mut rng, dim);
                    let step = pop.step_sizes[i];
                    pop.positions[i] = move_along(&here, step, &dir, bounds);
                    observer(Event::Moved(i), &pop);
                    let moved = pop.positions[i].clone();
                    let mut cost = swarm_adjusted(&mut pop, &moved);

                    for _ in 0..cfg.swim_length {
                        if cost >= last {
                            break;
                        }
                        last = cost;
                        pop.positions[i] = move_along(&pop.positions[i], step, &dir, bounds);
                        observer(Event::Moved(i), &pop);
                        let moved = pop.positions[i].clone();
                        cost = swarm_adjusted(&mut pop, &moved);
                    }
                }
                trace.push(pop.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.value));
                observer(Event::ChemotacticStepDone, &pop);
            }
            pop.reproduce();
            observer(Event::Reproduced, &pop);
        }
        pop.eliminate_disperse(&mut rng, cfg.dispersal_probability, bounds);
        observer(Event::Dispersed, &pop);
    }

    let best = pop.best.expect("at least one evaluation ran");
    Ok(OptimizeResult {
        best_position: best.position,
        best_value: best.value,
        trace,
        evaluations,
    })
}
