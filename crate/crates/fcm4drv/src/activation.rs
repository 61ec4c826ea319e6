//! Threshold functions that squash a weighted activation sum back into the
//! concept range, both for scalars and lifted over [`Drv`] supports.

use std::str::FromStr;

use crate::drv::Drv;
use crate::error::DrvError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationKind {
    /// 1 for positive input, 0 otherwise.
    Bivalent,
    /// Sign function: -1, 0 or 1.
    Trivalent,
    /// Identity clipped to [-1, 1].
    LinearCutoff,
    /// 1 / (1 + e^(-lambda x)).
    Logistic,
    Tanh,
    /// 1 - e^(-m x) for x >= 0, extended oddly to e^(m x) - 1 for x < 0.
    SExp,
}

impl ActivationKind {
    pub fn name(&self) -> &'static str {
        match self {
            ActivationKind::Bivalent => "bivalent",
            ActivationKind::Trivalent => "trivalent",
            ActivationKind::LinearCutoff => "linear_cutoff",
            ActivationKind::Logistic => "logistic",
            ActivationKind::Tanh => "tanh",
            ActivationKind::SExp => "s_exp",
        }
    }
}

impl FromStr for ActivationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bivalent" => Ok(ActivationKind::Bivalent),
            "trivalent" => Ok(ActivationKind::Trivalent),
            "linear_cutoff" => Ok(ActivationKind::LinearCutoff),
            "logistic" => Ok(ActivationKind::Logistic),
            "tanh" => Ok(ActivationKind::Tanh),
            "s_exp" => Ok(ActivationKind::SExp),
            other => Err(format!(
                "unknown activation `{other}`, expected one of bivalent, trivalent, \
                 linear_cutoff, logistic, tanh, s_exp"
            )),
        }
    }
}

/// An activation function with its shape parameters. `m` steers the s_exp
/// slope, `lambda` the logistic steepness; each kind reads only its own
/// parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    pub m: f64,
    pub lambda: f64,
}

impl ActivationSpec {
    /// The given kind with default slope parameters m = 1, lambda = 1.
    pub fn new(kind: ActivationKind) -> ActivationSpec {
        ActivationSpec { kind, m: 1.0, lambda: 1.0 }
    }

    pub fn with_params(kind: ActivationKind, m: f64, lambda: f64) -> Result<ActivationSpec, DrvError> {
        if !m.is_finite() || m <= 0.0 {
            return Err(DrvError::NonPositiveParameter { name: "m", value: m });
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(DrvError::NonPositiveParameter { name: "lambda", value: lambda });
        }
        Ok(ActivationSpec { kind, m, lambda })
    }

    /// The interval the function maps into: [0, 1] for bivalent and
    /// logistic, [-1, 1] for the rest.
    pub fn output_range(&self) -> (f64, f64) {
        match self.kind {
            ActivationKind::Bivalent | ActivationKind::Logistic => (0.0, 1.0),
            _ => (-1.0, 1.0),
        }
    }

    /// Applies the function to a scalar.
    pub fn activate(&self, x: f64) -> Result<f64, DrvError> {
        if !x.is_finite() {
            return Err(DrvError::NonFiniteValue(x));
        }
        Ok(self.eval(x))
    }

    /// Applies the function to every support point of a variable, merging
    /// colliding images.
    pub fn activate_drv(&self, x: &Drv) -> Result<Drv, DrvError> {
        x.map(|v| self.eval(v))
    }

    fn eval(&self, x: f64) -> f64 {
        match self.kind {
            ActivationKind::Bivalent => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Trivalent => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            ActivationKind::LinearCutoff => x.clamp(-1.0, 1.0),
            ActivationKind::Logistic => 1.0 / (1.0 + (-self.lambda * x).exp()),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::SExp => {
                if x >= 0.0 {
                    1.0 - (-self.m * x).exp()
                } else {
                    (self.m * x).exp() - 1.0
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KINDS: [ActivationKind; 6] = [
        ActivationKind::Bivalent,
        ActivationKind::Trivalent,
        ActivationKind::LinearCutoff,
        ActivationKind::Logistic,
        ActivationKind::Tanh,
        ActivationKind::SExp,
    ];

    fn spec(kind: ActivationKind) -> ActivationSpec {
        ActivationSpec::new(kind)
    }

    #[test]
    fn step_functions() {
        let bi = spec(ActivationKind::Bivalent);
        assert_eq!(bi.activate(0.3).unwrap(), 1.0);
        assert_eq!(bi.activate(0.0).unwrap(), 0.0);
        assert_eq!(bi.activate(-2.0).unwrap(), 0.0);

        let tri = spec(ActivationKind::Trivalent);
        assert_eq!(tri.activate(-0.4).unwrap(), -1.0);
        assert_eq!(tri.activate(0.0).unwrap(), 0.0);
        assert_eq!(tri.activate(1.7).unwrap(), 1.0);
    }

    #[test]
    fn linear_cutoff_clips() {
        let lin = spec(ActivationKind::LinearCutoff);
        assert_eq!(lin.activate(0.4).unwrap(), 0.4);
        assert_eq!(lin.activate(3.0).unwrap(), 1.0);
        assert_eq!(lin.activate(-1.5).unwrap(), -1.0);
    }

    #[test]
    fn logistic_values() {
        let log = spec(ActivationKind::Logistic);
        assert_eq!(log.activate(0.0).unwrap(), 0.5);
        // 1 / (1 + e^-2) with lambda = 2 at x = 1.
        let steep = ActivationSpec::with_params(ActivationKind::Logistic, 1.0, 2.0).unwrap();
        assert!((steep.activate(1.0).unwrap() - 0.880_797_077_977_882_3).abs() < 1e-15);
    }

    #[test]
    fn s_exp_values() {
        let s = spec(ActivationKind::SExp);
        assert_eq!(s.activate(0.0).unwrap(), 0.0);
        // 1 - e^-1 at x = 1.
        assert!((s.activate(1.0).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-15);
        // Steeper slope saturates faster.
        let fast = ActivationSpec::with_params(ActivationKind::SExp, 3.0, 1.0).unwrap();
        assert!(fast.activate(1.0).unwrap() > s.activate(1.0).unwrap());
    }

    #[test]
    fn odd_symmetry_where_promised() {
        let odd = [
            ActivationKind::Trivalent,
            ActivationKind::LinearCutoff,
            ActivationKind::Tanh,
            ActivationKind::SExp,
        ];
        for kind in odd {
            let s = ActivationSpec::with_params(kind, 1.7, 1.0).unwrap();
            for x in [0.0, 0.1, 0.5, 1.0, 2.5, 10.0] {
                let pos = s.activate(x).unwrap();
                let neg = s.activate(-x).unwrap();
                assert!((pos + neg).abs() < 1e-12, "{kind:?} not odd at {x}");
            }
        }
    }

    #[test]
    fn monotone_and_in_range_for_every_kind() {
        for kind in KINDS {
            let s = ActivationSpec::with_params(kind, 0.8, 2.3).unwrap();
            let (lo, hi) = s.output_range();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=400 {
                let x = -10.0 + i as f64 * 0.05;
                let y = s.activate(x).unwrap();
                assert!(y >= prev, "{kind:?} decreases at {x}");
                assert!((lo..=hi).contains(&y), "{kind:?}({x}) = {y} out of range");
                prev = y;
            }
        }
    }

    #[test]
    fn lifting_matches_scalar_on_singletons() {
        for kind in KINDS {
            let s = spec(kind);
            for x in [-1.3, -0.2, 0.0, 0.4, 2.0] {
                let lifted = s.activate_drv(&Drv::singleton(x).unwrap()).unwrap();
                assert!(lifted.is_singleton_at(s.activate(x).unwrap()), "{kind:?} at {x}");
            }
        }
    }

    #[test]
    fn lifting_examples() {
        let tri = spec(ActivationKind::Trivalent);
        let x = Drv::new([(-0.5, 0.4), (0.0, 0.2), (0.7, 0.4)]).unwrap();
        let out = tri.activate_drv(&x).unwrap();
        assert_eq!(out.values(), &[-1.0, 0.0, 1.0]);
        assert_eq!(out.probs(), &[0.4, 0.2, 0.4]);

        let lin = spec(ActivationKind::LinearCutoff);
        let y = Drv::new([(-2.0, 0.5), (0.5, 0.5)]).unwrap();
        let clipped = lin.activate_drv(&y).unwrap();
        assert_eq!(clipped.values(), &[-1.0, 0.5]);
        assert_eq!(clipped.probs(), &[0.5, 0.5]);

        let s = spec(ActivationKind::SExp);
        let lifted = s.activate_drv(&Drv::singleton(1.0).unwrap()).unwrap();
        assert!((lifted.values()[0] - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert_eq!(lifted.probs(), &[1.0]);
    }

    #[test]
    fn rejects_bad_parameters_and_inputs() {
        assert!(matches!(
            ActivationSpec::with_params(ActivationKind::SExp, 0.0, 1.0),
            Err(DrvError::NonPositiveParameter { name: "m", .. })
        ));
        assert!(matches!(
            ActivationSpec::with_params(ActivationKind::Logistic, 1.0, -2.0),
            Err(DrvError::NonPositiveParameter { name: "lambda", .. })
        ));
        assert!(matches!(
            ActivationSpec::with_params(ActivationKind::Tanh, f64::NAN, 1.0),
            Err(DrvError::NonPositiveParameter { .. })
        ));
        let s = spec(ActivationKind::Tanh);
        assert!(matches!(s.activate(f64::INFINITY), Err(DrvError::NonFiniteValue(_))));
    }

    #[test]
    fn kind_parses_and_round_trips() {
        for kind in KINDS {
            assert_eq!(kind.name().parse::<ActivationKind>().unwrap(), kind);
        }
        assert!("sigmoid".parse::<ActivationKind>().is_err());
    }
}
