//! Experiment configuration: one JSON document per run, plus named presets.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Exact,
    Euler,
}

/// A complex entry as `[re, im]`.
pub type ComplexPair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Angle model. With `alpha` the coupling is k = sqrt(omega) gamma^alpha.
    Unitary {
        omega: f64,
        #[serde(default)]
        alpha: Option<f64>,
    },
    /// Full Bloch model for inefficient detection (Euler only); spikes in q.
    UnitaryBloch { omega: f64, eta: f64 },
    /// Resetting unless both `n_plus` and `n_minus` are given.
    Thermal {
        w_minus_plus: f64,
        w_plus_minus: f64,
        #[serde(default = "one")]
        eta: f64,
        #[serde(default)]
        n_plus: Option<ComplexPair>,
        #[serde(default)]
        n_minus: Option<ComplexPair>,
        /// Excursion floor for non-resetting tips; default 40 W₋₊/(γη).
        #[serde(default)]
        tip_floor: Option<f64>,
    },
    /// γ is γ₁. Emission N₂ unless `n_a`, `n_b` are given.
    Measurement {
        gamma2: f64,
        eta1: f64,
        eta2: f64,
        #[serde(default)]
        n_a: Option<ComplexPair>,
        #[serde(default)]
        n_b: Option<ComplexPair>,
    },
    /// Conjecture examples of the general resetting class.
    General { example: GeneralExample },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneralExample {
    /// F(q) = cos(50q/π)
    Cos,
    /// F(q) = e^{−q} − 0.5
    Exp,
}

fn one() -> f64 {
    1.0
}

fn default_eps() -> f64 {
    1e-2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub t0: f64,
    pub t1: f64,
    pub a: f64,
    pub b: f64,
}

/// Boxes (a, b) × (t0, t1) for every b in `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxGrid {
    pub t0: f64,
    pub t1: f64,
    pub a: f64,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    /// γ values (γ₁ for the measurement model), one block of rows each.
    pub gammas: Vec<f64>,
    /// Only used by `sweep-alpha`: overrides the unitary `alpha`.
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub method: Option<MethodChoice>,
    /// Euler step; default min(1e-5, 0.01 / sup total rate).
    #[serde(default)]
    pub dt: Option<f64>,
    /// Default: the largest box end.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub boxes: Vec<BoxSpec>,
    #[serde(default)]
    pub b_grid: Option<BoxGrid>,
    pub n_realizations: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_eps")]
    pub eps_jump: f64,
    #[serde(default)]
    pub output: Option<String>,
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| bad(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Explicit boxes followed by the grid.
    pub fn all_boxes(&self) -> Vec<BoxSpec> {
        let mut out = self.boxes.clone();
        if let Some(g) = &self.b_grid {
            out.extend(g.b.iter().map(|&b| BoxSpec { t0: g.t0, t1: g.t1, a: g.a, b }));
        }
        out
    }

    pub fn t_end(&self) -> f64 {
        self.t_end.unwrap_or_else(|| self.all_boxes().iter().map(|b| b.t1).fold(0.0, f64::max))
    }

    /// Exact unless stated; the Bloch model has no exact sampler.
    pub fn method(&self) -> MethodChoice {
        match (self.method, &self.model) {
            (Some(m), _) => m,
            (None, ModelSpec::UnitaryBloch { .. }) => MethodChoice::Euler,
            (None, _) => MethodChoice::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() {
            return Err(bad("gammas must list at least one value"));
        }
        for &g in &self.gammas {
            if !(g > 0.0 && g.is_finite()) {
                return Err(bad(format!("gamma must be positive and finite, got {g}")));
            }
        }
        for &a in &self.alphas {
            if !(a > 0.0 && a < 1.0) {
                return Err(bad(format!("alpha must lie in (0,1), got {a}")));
            }
        }
        if !self.alphas.is_empty() && !matches!(self.model, ModelSpec::Unitary { .. }) {
            return Err(bad("alphas apply to the unitary model only"));
        }
        if !(self.eps_jump > 0.0 && self.eps_jump < 0.5) {
            return Err(bad(format!("eps_jump must lie in (0, 0.5), got {}", self.eps_jump)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(bad(format!("dt must be positive, got {dt}")));
            }
        }
        if matches!(self.model, ModelSpec::UnitaryBloch { .. }) && self.method() == MethodChoice::Exact {
            return Err(bad("the Bloch model supports the euler method only"));
        }
        let boxes = self.all_boxes();
        if boxes.is_empty() {
            return Err(bad("no boxes: give `boxes` or `b_grid`"));
        }
        let hi = match self.model {
            ModelSpec::Unitary { .. } => std::f64::consts::PI,
            _ => 1.0,
        };
        for bx in &boxes {
            if !(bx.t0 >= 0.0 && bx.t0 < bx.t1) {
                return Err(bad(format!("box needs 0 <= t0 < t1, got ({}, {})", bx.t0, bx.t1)));
            }
            if !(bx.a >= 0.0 && bx.a <= bx.b && bx.b <= hi) {
                return Err(bad(format!("box needs 0 <= a <= b <= {hi}, got ({}, {})", bx.a, bx.b)));
            }
        }
        if let Some(t) = self.t_end {
            if !(t >= boxes.iter().map(|b| b.t1).fold(0.0, f64::max)) {
                return Err(bad(format!("t_end = {t} ends before the last box")));
            }
        }
        self.validate_model()
    }

    fn validate_model(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(bad(format!("{name} must be positive, got {v}")))
            }
        };
        let efficiency = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(bad(format!("{name} must lie in (0,1], got {v}")))
            }
        };
        match &self.model {
            ModelSpec::Unitary { omega, alpha } => {
                positive("omega", *omega)?;
                if let Some(a) = alpha {
                    if !(*a > 0.0 && *a < 1.0) {
                        return Err(bad(format!("alpha must lie in (0,1), got {a}")));
                    }
                }
            }
            ModelSpec::UnitaryBloch { omega, eta } => {
                positive("omega", *omega)?;
                efficiency("eta", *eta)?;
            }
            ModelSpec::Thermal { w_minus_plus, w_plus_minus, eta, n_plus, n_minus, tip_floor } => {
                if !(*w_minus_plus >= 0.0 && *w_plus_minus >= 0.0) {
                    return Err(bad("bath rates must be non-negative"));
                }
                efficiency("eta", *eta)?;
                if n_plus.is_some() != n_minus.is_some() {
                    return Err(bad("give both n_plus and n_minus or neither"));
                }
                if let Some(f) = tip_floor {
                    if !(*f > 0.0 && *f < 0.5) {
                        return Err(bad(format!("tip_floor must lie in (0, 0.5), got {f}")));
                    }
                }
            }
            ModelSpec::Measurement { gamma2, eta1, eta2, n_a, n_b } => {
                positive("gamma2", *gamma2)?;
                efficiency("eta1", *eta1)?;
                efficiency("eta2", *eta2)?;
                if n_a.is_some() != n_b.is_some() {
                    return Err(bad("give both n_a and n_b or neither"));
                }
            }
            ModelSpec::General { .. } => {}
        }
        Ok(())
    }
}

/// Names accepted by `--preset`.
pub const PRESETS: [&str; 7] = ["fig5", "fig6", "fig7", "fig8", "fig9", "figA", "sweep-alpha"];

fn grid(t1: f64, a: f64, b: &[f64]) -> Option<BoxGrid> {
    Some(BoxGrid { t0: 0.0, t1, a, b: b.to_vec() })
}

const Q_EDGES: [f64; 7] = [0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.9];

/// Parameter sets of the published figures.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = |model: ModelSpec, gammas: Vec<f64>, b_grid: Option<BoxGrid>, n: u64| ExperimentConfig {
        model,
        gammas,
        alphas: Vec::new(),
        method: None,
        dt: None,
        t_end: None,
        boxes: Vec::new(),
        b_grid,
        n_realizations: n,
        master_seed: 1,
        eps_jump: 1e-2,
        output: None,
    };
    let thermal = |n_plus, n_minus| ModelSpec::Thermal {
        w_minus_plus: 0.77,
        w_plus_minus: 0.23,
        eta: 1.0,
        n_plus,
        n_minus,
        tip_floor: None,
    };
    let cfg = match name {
        "fig5" => base(
            ModelSpec::Unitary { omega: 1.0, alpha: None },
            vec![1e6],
            grid(0.1, 0.0, &[0.5, 1.0, 1.5, 2.0, 2.5]),
            16_000,
        ),
        "fig6" => base(thermal(None, None), vec![1e6], grid(0.1, 0.01, &Q_EDGES), 100_000),
        "fig7" => base(
            ModelSpec::Measurement { gamma2: 1.0, eta1: 0.33, eta2: 0.33, n_a: None, n_b: None },
            vec![1e6],
            grid(0.1, 0.01, &Q_EDGES),
            100_000,
        ),
        "fig8" => {
            let mut c = base(ModelSpec::UnitaryBloch { omega: 1.0, eta: 0.33 }, vec![1e4], grid(0.1, 0.01, &Q_EDGES), 1000);
            c.method = Some(MethodChoice::Euler);
            c
        }
        "fig9" => base(
            thermal(Some([0.2f64.sqrt(), 0.0]), Some([0.4f64.sqrt(), 0.0])),
            vec![1e6],
            grid(0.1, 0.01, &Q_EDGES),
            10_000,
        ),
        "figA" => base(ModelSpec::General { example: GeneralExample::Cos }, vec![1e7], grid(0.1, 0.01, &Q_EDGES), 10_000),
        "sweep-alpha" => {
            let mut c = base(
                ModelSpec::Unitary { omega: 1.0, alpha: None },
                vec![1e4, 1e5, 1e6],
                grid(0.02, 0.0, &[1.5, 2.0, 2.5]),
                10_000,
            );
            c.alphas = vec![0.4, 0.45, 0.5, 0.55, 0.6];
            c
        }
        other => return Err(bad(format!("unknown preset {other:?}; known: {}", PRESETS.join(", ")))),
    };
    cfg.validate()?;
    Ok(cfg)
}
