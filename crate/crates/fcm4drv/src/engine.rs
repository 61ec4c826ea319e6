//! Model representation and the reasoning loop: synchronous state updates
//! with size-bounded intermediate results, clamped concepts, and
//! convergence detection.

use crate::activation::ActivationSpec;
use crate::aggregate::AggregatorSpec;
use crate::drv::{DistanceMetric, Drv};
use crate::error::{EngineError, ModelError};

/// A cognitive map over uncertain weights: named concepts, an n x n matrix
/// of weight variables (entry (i, j) is the influence of concept j on
/// concept i), an initial state vector, and concepts clamped to a fixed
/// distribution after every iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct FcmModel {
    concepts: Vec<String>,
    weights: Vec<Vec<Drv>>,
    initial_state: Vec<Drv>,
    clamps: Vec<(usize, Drv)>,
}

impl FcmModel {
    pub fn new(
        concepts: Vec<String>,
        weights: Vec<Vec<Drv>>,
        initial_state: Vec<Drv>,
        clamps: Vec<(usize, Drv)>,
    ) -> Result<FcmModel, ModelError> {
        if concepts.is_empty() {
            return Err(ModelError::NoConcepts);
        }
        let n = concepts.len();
        let mut seen = std::collections::HashSet::new();
        for name in &concepts {
            if !seen.insert(name.as_str()) {
                return Err(ModelError::DuplicateConcept(name.clone()));
            }
        }
        if weights.len() != n {
            return Err(ModelError::WeightRows { expected: n, got: weights.len() });
        }
        for (row, entries) in weights.iter().enumerate() {
            if entries.len() != n {
                return Err(ModelError::WeightShape { expected: n, row, got: entries.len() });
            }
            for (col, w) in entries.iter().enumerate() {
                if w.min() < -1.0 || w.max() > 1.0 {
                    let value = if w.min() < -1.0 { w.min() } else { w.max() };
                    return Err(ModelError::WeightOutOfRange { row, col, value });
                }
            }
        }
        if initial_state.len() != n {
            return Err(ModelError::StateLength { expected: n, got: initial_state.len() });
        }
        for &(index, _) in &clamps {
            if index >= n {
                return Err(ModelError::ClampIndex { index, concepts: n });
            }
        }
        Ok(FcmModel { concepts, weights, initial_state, clamps })
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn concept_index(&self, name: &str) -> Option<usize> {
        self.concepts.iter().position(|c| c == name)
    }

    /// Influence of concept `j` on concept `i`.
    pub fn weight(&self, i: usize, j: usize) -> &Drv {
        &self.weights[i][j]
    }

    pub fn initial_state(&self) -> &[Drv] {
        &self.initial_state
    }

    pub fn clamps(&self) -> &[(usize, Drv)] {
        &self.clamps
    }

    /// A(0) with clamps already imposed, the state iteration starts from.
    pub fn clamped_initial_state(&self) -> Vec<Drv> {
        let mut state = self.initial_state.clone();
        for (index, drv) in &self.clamps {
            state[*index] = drv.clone();
        }
        state
    }
}

/// The recorded history of one reasoning run: every state A(0) ... A(T),
/// whether the loop settled, at which iteration, and the max-over-concepts
/// distance between each pair of consecutive states.
#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningTrace {
    pub states: Vec<Vec<Drv>>,
    pub converged: bool,
    pub convergence_iteration: Option<usize>,
    pub per_iteration_distances: Vec<f64>,
}

impl ReasoningTrace {
    pub fn final_state(&self) -> &[Drv] {
        self.states.last().expect("trace holds at least the initial state")
    }
}

fn check_dimension(model: &FcmModel, state: &[Drv]) -> Result<(), ModelError> {
    if state.len() != model.concept_count() {
        return Err(ModelError::DimensionMismatch {
            expected: model.concept_count(),
            got: state.len(),
        });
    }
    Ok(())
}

/// One concept's next distribution: the left-to-right fold of the weighted
/// sum, aggregated whenever an intermediate support exceeds the bound k,
/// then pushed through the activation function.
///
/// The fold visits source concepts in ascending index order. Because
/// aggregation applies to partial results, the order is part of the
/// semantics, not just an implementation detail. Edges whose weight is
/// exactly singleton(0) are skipped: they would contribute the additive
/// identity, but folding them would change how often aggregation fires.
pub fn update_concept(
    model: &FcmModel,
    state: &[Drv],
    i: usize,
    activation: &ActivationSpec,
    aggregator: &AggregatorSpec,
) -> Result<Drv, EngineError> {
    check_dimension(model, state)?;
    let bound = aggregator.k;
    let mut acc: Option<Drv> = None;
    for (j, a_j) in state.iter().enumerate() {
        let w = model.weight(i, j);
        if w.is_singleton_at(0.0) {
            continue;
        }
        let mut term = w.product(a_j);
        if term.len() > bound {
            term = aggregator.aggregate(&term);
        }
        acc = Some(match acc {
            None => term,
            Some(sum_so_far) => {
                let mut next = sum_so_far.sum(&term);
                if next.len() > bound {
                    next = aggregator.aggregate(&next);
                }
                next
            }
        });
    }
    let weighted = match acc {
        Some(drv) => drv,
        None => Drv::singleton(0.0)?,
    };
    Ok(activation.activate_drv(&weighted)?)
}

/// One synchronous iteration: every concept is updated from the same input
/// state, then clamped concepts are overwritten with their fixed
/// distribution.
pub fn step(
    model: &FcmModel,
    state: &[Drv],
    activation: &ActivationSpec,
    aggregator: &AggregatorSpec,
) -> Result<Vec<Drv>, EngineError> {
    let mut next = Vec::with_capacity(model.concept_count());
    for i in 0..model.concept_count() {
        next.push(update_concept(model, state, i, activation, aggregator)?);
    }
    for (index, drv) in model.clamps() {
        next[*index] = drv.clone();
    }
    Ok(next)
}

/// Largest per-concept distance between two state vectors.
pub fn state_distance(prev: &[Drv], next: &[Drv], metric: DistanceMetric) -> f64 {
    prev.iter()
        .zip(next)
        .map(|(p, n)| metric.distance(p, n))
        .fold(0.0, f64::max)
}

/// True when every concept moved less than `tol` under the given metric.
pub fn has_converged(
    prev: &[Drv],
    next: &[Drv],
    tol: f64,
    metric: DistanceMetric,
) -> Result<bool, EngineError> {
    if prev.len() != next.len() {
        return Err(ModelError::DimensionMismatch { expected: prev.len(), got: next.len() }.into());
    }
    Ok(state_distance(prev, next, metric) < tol)
}

/// Iterates [`step`] from the clamped initial state, recording every state,
/// until the state settles within `tol` or `max_iters` iterations have run.
pub fn run(
    model: &FcmModel,
    activation: &ActivationSpec,
    aggregator: &AggregatorSpec,
    max_iters: usize,
    tol: f64,
    metric: DistanceMetric,
) -> Result<ReasoningTrace, EngineError> {
    assert!(max_iters >= 1, "at least one iteration is required");
    let mut states = vec![model.clamped_initial_state()];
    let mut per_iteration_distances = Vec::new();
    let mut converged = false;
    let mut convergence_iteration = None;
    for iteration in 1..=max_iters {
        let next = step(model, states.last().unwrap(), activation, aggregator)?;
        let moved = state_distance(states.last().unwrap(), &next, metric);
        per_iteration_distances.push(moved);
        states.push(next);
        if moved < tol {
            converged = true;
            convergence_iteration = Some(iteration);
            break;
        }
    }
    Ok(ReasoningTrace { states, converged, convergence_iteration, per_iteration_distances })
}
