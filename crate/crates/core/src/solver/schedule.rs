use crate::error::{Error, Result};

/// Step sizes `gamma_k`, `k >= 1`.
///
/// The convergence theory asks for `gamma_k` in `(0, 1]`, `gamma_k -> 0` and
/// `sum gamma_k = infinity`. `Harmonic` and `PowerLaw` satisfy all three by
/// construction. An `Explicit` list can only be checked on its own horizon,
/// so [`StepSchedule::is_certified`] reports `false` for it.
#[derive(Clone, Debug, PartialEq)]
pub enum StepSchedule {
    /// `gamma_k = 1/k` (generalized fictitious play).
    Harmonic,
    /// `gamma_k = min(1, c * k^-a)` with `a` in `(0, 1]`, `c > 0`.
    PowerLaw { a: f64, c: f64 },
    /// `gamma_k = steps[k - 1]`.
    Explicit(Vec<f64>),
}

impl StepSchedule {
    pub fn power_law(a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidSchedule(format!("exponent a must lie in (0, 1], got {a}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidSchedule(format!("scale c must be positive, got {c}")));
        }
        Ok(Self::PowerLaw { a, c })
    }

    pub fn explicit(steps: Vec<f64>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidSchedule("explicit schedule is empty".into()));
        }
        if let Some((i, g)) = steps.iter().enumerate().find(|(_, g)| !(**g > 0.0 && **g <= 1.0)) {
            return Err(Error::InvalidSchedule(format!("step {} = {g} is outside (0, 1]", i + 1)));
        }
        Ok(Self::Explicit(steps))
    }

    /// Constant steps `gamma_k = h` for `k = 1..=len`. Not vanishing; used to
    /// replay the Euler discretization of the best-response dynamics.
    pub fn constant(h: f64, len: usize) -> Result<Self> {
        Self::explicit(vec![h; len])
    }

    /// `gamma_k` for `k >= 1`.
    pub fn step_size(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidSchedule("step index starts at k = 1".into()));
        }
        let g = match self {
            Self::Harmonic => 1.0 / k as f64,
            Self::PowerLaw { a, c } => (c * (k as f64).powf(-a)).min(1.0),
            Self::Explicit(steps) => *steps.get(k - 1).ok_or_else(|| {
                Error::InvalidSchedule(format!(
                    "k = {k} is beyond the explicit horizon of {} steps",
                    steps.len()
                ))
            })?,
        };
        if !(g > 0.0 && g <= 1.0) {
            return Err(Error::InvalidSchedule(format!("gamma_{k} = {g} is outside (0, 1]")));
        }
        Ok(g)
    }

    /// Number of available steps, `None` when unbounded.
    pub fn horizon(&self) -> Option<usize> {
        match self {
            Self::Explicit(steps) => Some(steps.len()),
            _ => None,
        }
    }

    /// Whether vanishing and nonsummable hold by construction.
    pub fn is_certified(&self) -> bool {
        !matches!(self, Self::Explicit(_))
    }

    /// Short label used as a column name in comparison outputs.
    pub fn label(&self) -> String {
        match self {
            Self::Harmonic => "1/k".to_string(),
            Self::PowerLaw { a, c } if *c == 1.0 => format!("k^-{a}"),
            Self::PowerLaw { a, c } => format!("{c}k^-{a}"),
            Self::Explicit(steps) => format!("explicit[{}]", steps.len()),
        }
    }
}
