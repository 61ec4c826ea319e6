//! Reference implementations kept deliberately independent of the engine:
//! exact joint-outcome enumeration of one state update, a scalar classical
//! runner, and a seeded Monte Carlo sampler. The test suite compares the
//! engine against these; nothing here is used by the engine itself.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activation::ActivationSpec;
use crate::drv::Drv;
use crate::engine::FcmModel;
use crate::error::OracleError;

/// Most joint assignments enumerated per concept row.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub samples: usize,
    pub seed: u64,
}

/// One state update computed by enumerating every joint assignment of the
/// row's weight and state variables, with no aggregation anywhere. Exact up
/// to floating-point rounding, and exponential in the number of concepts,
/// so only usable on small inputs. Clamps are applied the same way the
/// engine applies them.
pub fn exact_step(
    model: &FcmModel,
    state: &[Drv],
    activation: &ActivationSpec,
) -> Result<Vec<Drv>, OracleError> {
    let n = model.concept_count();
    let mut next = Vec::with_capacity(n);
    for i in 0..n {
        let factors: Vec<(&Drv, &Drv)> = (0..n).map(|j| (model.weight(i, j), &state[j])).collect();
        let size: u128 =
            factors.iter().map(|(w, a)| (w.len() * a.len()) as u128).product();
        if size > ENUMERATION_LIMIT {
            return Err(OracleError::CapacityExceeded {
                concept: i,
                size,
                limit: ENUMERATION_LIMIT,
            });
        }

        // Mixed-radix odometer over (weight outcome, state outcome) per
        // source concept, ascending index, so the scalar sum is formed in
        // the same order as the engine's fold.
        let mut digits = vec![0usize; 2 * n];
        let radix: Vec<usize> = factors
            .iter()
            .flat_map(|(w, a)| [w.len(), a.len()])
            .collect();
        let mut outcomes = Vec::with_capacity(size as usize);
        loop {
            let mut sum = 0.0;
            let mut prob = 1.0;
            for (j, (w, a)) in factors.iter().enumerate() {
                let (wv, wp) = (w.values()[digits[2 * j]], w.probs()[digits[2 * j]]);
                let (av, ap) = (a.values()[digits[2 * j + 1]], a.probs()[digits[2 * j + 1]]);
                sum += wv * av;
                prob *= wp * ap;
            }
            outcomes.push((activation.activate(sum)?, prob));

            let mut pos = digits.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < radix[pos] {
                    break;
                }
                digits[pos] = 0;
            }
            if digits.iter().all(|&d| d == 0) {
                break;
            }
        }
        next.push(Drv::from_weighted(outcomes)?);
    }
    for (index, drv) in model.clamps() {
        next[*index] = drv.clone();
    }
    Ok(next)
}

/// A fully scalar view of a model: the weight matrix and the clamp list.
type ScalarModel = (Vec<Vec<f64>>, Vec<(usize, f64)>);

/// The model's weights and clamps as plain scalars, or an error naming the
/// first non-singleton part.
fn scalarize(model: &FcmModel, context: &'static str) -> Result<ScalarModel, OracleError> {
    let n = model.concept_count();
    let mut weights = vec![vec![0.0; n]; n];
    for (i, row) in weights.iter_mut().enumerate() {
        for (j, w) in row.iter_mut().enumerate() {
            let drv = model.weight(i, j);
            if !drv.is_singleton() {
                return Err(OracleError::NotSingleton { context, what: "weight matrix" });
            }
            *w = drv.values()[0];
        }
    }
    let mut clamps = Vec::with_capacity(model.clamps().len());
    for (index, drv) in model.clamps() {
        if !drv.is_singleton() {
            return Err(OracleError::NotSingleton { context, what: "clamp" });
        }
        clamps.push((*index, drv.values()[0]));
    }
    Ok((weights, clamps))
}

fn scalar_iterate(
    weights: &[Vec<f64>],
    clamps: &[(usize, f64)],
    mut state: Vec<f64>,
    activation: &ActivationSpec,
    iters: usize,
) -> Result<Vec<Vec<f64>>, OracleError> {
    for &(index, value) in clamps {
        state[index] = value;
    }
    let mut states = vec![state];
    for _ in 0..iters {
        let prev = states.last().unwrap();
        let mut next = Vec::with_capacity(prev.len());
        for row in weights {
            let sum: f64 = row.iter().zip(prev).map(|(w, a)| w * a).sum();
            next.push(activation.activate(sum)?);
        }
        for &(index, value) in clamps {
            next[index] = value;
        }
        states.push(next);
    }
    Ok(states)
}

/// Classical scalar reasoning on a fully singleton model: the plain FCM
/// iteration with the same synchronous update and clamp semantics as the
/// engine. Returns all states A(0) ... A(max_iters).
pub fn classical_run(
    model: &FcmModel,
    activation: &ActivationSpec,
    max_iters: usize,
) -> Result<Vec<Vec<f64>>, OracleError> {
    let context = "classical run";
    let (weights, clamps) = scalarize(model, context)?;
    let mut initial = Vec::with_capacity(model.concept_count());
    for drv in model.initial_state() {
        if !drv.is_singleton() {
            return Err(OracleError::NotSingleton { context, what: "initial state" });
        }
        initial.push(drv.values()[0]);
    }
    scalar_iterate(&weights, &clamps, initial, activation, max_iters)
}

/// A uniform draw in [0, 1) from the top 53 bits of the generator.
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF draw: the first support value whose cumulative probability
/// exceeds the uniform variate.
fn sample_drv(drv: &Drv, rng: &mut ChaCha8Rng) -> f64 {
    let u = uniform(rng);
    let mut cum = 0.0;
    for (v, p) in drv.iter() {
        cum += p;
        if u < cum {
            return v;
        }
    }
    drv.max()
}

/// Samples whole trajectories: each sample draws one scalar initial state
/// from the initial distributions (concept by concept, in order) and runs
/// the classical iteration on it. Returns, per concept, the empirical
/// values observed at iteration `iters`. Weights and clamps must be
/// singletons; with distributional weights the engine's semantics redraw
/// weight randomness every iteration, which a trajectory sampler cannot
/// reproduce, so such models are rejected rather than silently
/// approximated.
pub fn monte_carlo_run(
    model: &FcmModel,
    activation: &ActivationSpec,
    iters: usize,
    config: &OracleConfig,
) -> Result<Vec<Vec<f64>>, OracleError> {
    if config.samples == 0 {
        return Err(OracleError::NoSamples);
    }
    let (weights, clamps) = scalarize(model, "Monte Carlo run")?;
    let n = model.concept_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut per_concept = vec![Vec::with_capacity(config.samples); n];
    for _ in 0..config.samples {
        let initial: Vec<f64> =
            model.initial_state().iter().map(|drv| sample_drv(drv, &mut rng)).collect();
        let states = scalar_iterate(&weights, &clamps, initial, activation, iters)?;
        for (i, &value) in states[iters].iter().enumerate() {
            per_concept[i].push(value);
        }
    }
    Ok(per_concept)
}

/// The empirical distribution of a sample set: every observation with mass
/// 1/len, coalesced.
pub fn empirical_drv(samples: &[f64]) -> Result<Drv, OracleError> {
    let mass = 1.0 / samples.len() as f64;
    Ok(Drv::from_weighted(samples.iter().map(|&v| (v, mass)))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationKind;
    use crate::aggregate::{AggregatorKind, AggregatorSpec};
    use crate::engine;

    fn s(c: f64) -> Drv {
        Drv::singleton(c).unwrap()
    }

    fn two_concept_model() -> FcmModel {
        FcmModel::new(
            vec!["a".into(), "b".into()],
            vec![vec![s(0.0), s(0.5)], vec![s(-0.75), s(0.0)]],
            vec![
                Drv::new([(-1.0, 0.25), (0.5, 0.75)]).unwrap(),
                Drv::new([(0.0, 0.5), (1.0, 0.5)]).unwrap(),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn exact_step_on_singletons_is_scalar_arithmetic() {
        let model = FcmModel::new(
            vec!["a".into(), "b".into()],
            vec![vec![s(0.0), s(0.5)], vec![s(0.5), s(0.0)]],
            vec![s(1.0), s(1.0)],
            vec![],
        )
        .unwrap();
        let linear = ActivationSpec::new(ActivationKind::LinearCutoff);
        let next = exact_step(&model, model.initial_state(), &linear).unwrap();
        assert!(next[0].is_singleton_at(0.5));
        assert!(next[1].is_singleton_at(0.5));
    }

    #[test]
    fn exact_step_enumerates_joint_outcomes() {
        let model = two_concept_model();
        let linear = ActivationSpec::new(ActivationKind::LinearCutoff);
        let next = exact_step(&model, model.initial_state(), &linear).unwrap();
        // Concept a hears only b: 0.5 * {0, 1} -> {0: 0.5, 0.5: 0.5}.
        assert_eq!(next[0].values(), &[0.0, 0.5]);
        assert_eq!(next[0].probs(), &[0.5, 0.5]);
        // Concept b hears only a: -0.75 * {-1, 0.5} -> {-0.375: 0.75, 0.75: 0.25}.
        assert_eq!(next[1].values(), &[-0.375, 0.75]);
        assert_eq!(next[1].probs(), &[0.75, 0.25]);
    }

    #[test]
    fn exact_step_matches_engine_with_aggregation_disabled() {
        let model = two_concept_model();
        let s_exp = ActivationSpec::new(ActivationKind::SExp);
        // k far above the worst-case support product, so the engine never
        // aggregates and both sides perform the same exact convolutions.
        let agg = AggregatorSpec::with_params(AggregatorKind::UniBins, 10_000, 6, 100).unwrap();
        let from_engine = engine::step(&model, model.initial_state(), &s_exp, &agg).unwrap();
        let from_oracle = exact_step(&model, model.initial_state(), &s_exp).unwrap();
        for (e, o) in from_engine.iter().zip(&from_oracle) {
            assert_eq!(e.len(), o.len());
            for ((ev, ep), (ov, op)) in e.iter().zip(o.iter()) {
                assert!((ev - ov).abs() < 1e-12);
                assert!((ep - op).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_step_applies_clamps() {
        let model = FcmModel::new(
            vec!["a".into(), "b".into()],
            vec![vec![s(0.0), s(0.5)], vec![s(0.5), s(0.0)]],
            vec![s(1.0), s(1.0)],
            vec![(0, s(1.0))],
        )
        .unwrap();
        let linear = ActivationSpec::new(ActivationKind::LinearCutoff);
        let next = exact_step(&model, model.initial_state(), &linear).unwrap();
        assert!(next[0].is_singleton_at(1.0));
    }

    #[test]
    fn exact_step_rejects_oversized_rows() {
        let wide = Drv::uniform_grid(-1.0, 1.0, 1001).unwrap();
        let model = FcmModel::new(
            vec!["a".into(), "b".into()],
            vec![vec![s(0.1), s(0.5)], vec![s(0.5), s(0.1)]],
            vec![wide.clone(), wide],
            vec![],
        )
        .unwrap();
        let linear = ActivationSpec::new(ActivationKind::LinearCutoff);
        let err = exact_step(&model, model.initial_state(), &linear).unwrap_err();
        assert!(matches!(err, OracleError::CapacityExceeded { size: 1_002_001, .. }));
    }

    #[test]
    fn classical_run_handles_zero_matrix_and_clamps() {
        let model = FcmModel::new(
            vec!["a".into(), "b".into()],
            vec![vec![s(0.0), s(0.0)], vec![s(0.0), s(0.0)]],
            vec![s(0.9), s(-0.4)],
            vec![(1, s(-1.0))],
        )
        .unwrap();
        let tri = ActivationSpec::new(ActivationKind::Trivalent);
        let states = classical_run(&model, &tri, 3).unwrap();
        assert_eq!(states.len(), 4);
        assert_eq!(states[0], vec![0.9, -1.0]);
        for state in &states[1..] {
            assert_eq!(state[0], 0.0, "zero row activates to 0");
            assert_eq!(state[1], -1.0, "clamp holds");
        }
    }

    #[test]
    fn classical_run_matches_engine_on_singleton_embedding() {
        let model = FcmModel::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![s(0.0), s(0.6), s(-0.3)],
                vec![s(0.45), s(0.0), s(0.0)],
                vec![s(0.2), s(-0.8), s(0.1)],
            ],
            vec![s(1.0), s(-0.5), s(0.25)],
            vec![(0, s(1.0))],
        )
        .unwrap();
        for kind in [
            ActivationKind::Bivalent,
            ActivationKind::Trivalent,
            ActivationKind::LinearCutoff,
            ActivationKind::Logistic,
            ActivationKind::Tanh,
            ActivationKind::SExp,
        ] {
            let act = ActivationSpec::new(kind);
            let agg = AggregatorSpec::new(AggregatorKind::PercentileRank);
            let trace = engine::run(
                &model,
                &act,
                &agg,
                10,
                0.0,
                crate::drv::DistanceMetric::Emd,
            )
            .unwrap();
            let states = classical_run(&model, &act, trace.states.len() - 1).unwrap();
            for (k, state) in trace.states.iter().enumerate() {
                for (i, drv) in state.iter().enumerate() {
                    assert!(drv.is_singleton(), "{kind:?} state {k} concept {i}");
                    assert!(
                        (drv.values()[0] - states[k][i]).abs() < 1e-12,
                        "{kind:?} state {k} concept {i}: {} vs {}",
                        drv.values()[0],
                        states[k][i]
                    );
                }
            }
        }
    }

    #[test]
    fn classical_run_rejects_distributional_models() {
        let model = two_concept_model();
        let tri = ActivationSpec::new(ActivationKind::Trivalent);
        let err = classical_run(&model, &tri, 2).unwrap_err();
        assert!(matches!(err, OracleError::NotSingleton { what: "initial state", .. }));
    }

    #[test]
    fn monte_carlo_is_deterministic_and_degenerate_on_singletons() {
        let model = FcmModel::new(
            vec!["a".into(), "b".into()],
            vec![vec![s(0.0), s(0.5)], vec![s(-0.75), s(0.0)]],
            vec![s(0.5), s(-0.25)],
            vec![],
        )
        .unwrap();
        let tanh = ActivationSpec::new(ActivationKind::Tanh);
        let config = OracleConfig { samples: 64, seed: 11 };
        let a = monte_carlo_run(&model, &tanh, 3, &config).unwrap();
        let b = monte_carlo_run(&model, &tanh, 3, &config).unwrap();
        assert_eq!(a, b, "same seed, same samples");

        let reference = classical_run(&model, &tanh, 3).unwrap();
        for (i, samples) in a.iter().enumerate() {
            assert_eq!(samples.len(), 64);
            assert!(samples.iter().all(|&v| v == reference[3][i]));
        }
    }

    #[test]
    fn monte_carlo_means_approach_exact_means() {
        let model = two_concept_model();
        let s_exp = ActivationSpec::new(ActivationKind::SExp);
        let exact = exact_step(&model, model.initial_state(), &s_exp).unwrap();
        let config = OracleConfig { samples: 40_000, seed: 3 };
        let sampled = monte_carlo_run(&model, &s_exp, 1, &config).unwrap();
        for (i, samples) in sampled.iter().enumerate() {
            let mean: f64 = samples.iter().sum::<f64>() / samples.len() as f64;
            // Value spread is <= 2, so a few sigma at n = 40000 stays
            // comfortably under 0.02.
            assert!(
                (mean - exact[i].mean()).abs() < 0.02,
                "concept {i}: {mean} vs {}",
                exact[i].mean()
            );
        }
    }

    #[test]
    fn monte_carlo_validates_inputs() {
        let tanh = ActivationSpec::new(ActivationKind::Tanh);
        let model = two_concept_model();
        assert!(matches!(
            monte_carlo_run(&model, &tanh, 1, &OracleConfig { samples: 0, seed: 0 }),
            Err(OracleError::NoSamples)
        ));

        let drv_weights = FcmModel::new(
            vec!["a".into()],
            vec![vec![Drv::new([(0.0, 0.5), (0.5, 0.5)]).unwrap()]],
            vec![s(0.0)],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            monte_carlo_run(&drv_weights, &tanh, 1, &OracleConfig { samples: 10, seed: 0 }),
            Err(OracleError::NotSingleton { what: "weight matrix", .. })
        ));
    }

    #[test]
    fn empirical_drv_coalesces_samples() {
        let drv = empirical_drv(&[0.5, 0.5, 1.0, 0.0]).unwrap();
        assert_eq!(drv.values(), &[0.0, 0.5, 1.0]);
        assert_eq!(drv.probs(), &[0.25, 0.5, 0.25]);
    }
}
