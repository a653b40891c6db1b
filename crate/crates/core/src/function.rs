use std::fmt;
use std::sync::Arc;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Step for central differences when no derivative is supplied.
const DIFF_STEP: f64 = 1e-6;

/// A 2π-periodic trial function, optionally with its derivative and the
/// points where the derivative may jump.
#[derive(Clone)]
pub struct PeriodicFn {
    label: String,
    value: RealFn,
    derivative: Option<RealFn>,
    kinks: Vec<f64>,
}

impl PeriodicFn {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        PeriodicFn {
            label: label.into(),
            value: Arc::new(f),
            derivative: None,
            kinks: Vec::new(),
        }
    }

    pub fn with_derivative<F>(mut self, df: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(df));
        self
    }

    pub fn with_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.kinks = kinks;
        self
    }

    /// `cos(kθ)`.
    pub fn cos(k: f64) -> Self {
        PeriodicFn::new(format!("cos({k}θ)"), move |t| (k * t).cos())
            .with_derivative(move |t| -k * (k * t).sin())
    }

    /// `sin(kθ)`.
    pub fn sin(k: f64) -> Self {
        PeriodicFn::new(format!("sin({k}θ)"), move |t| (k * t).sin())
            .with_derivative(move |t| k * (k * t).cos())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn value(&self, theta: f64) -> f64 {
        (self.value)(theta)
    }

    /// Exact derivative when supplied, else a central difference.
    pub fn derivative(&self, theta: f64) -> f64 {
        match &self.derivative {
            Some(df) => df(theta),
            None => {
                ((self.value)(theta + DIFF_STEP) - (self.value)(theta - DIFF_STEP))
                    / (2.0 * DIFF_STEP)
            }
        }
    }

    /// The translate `θ ↦ f(θ + φ)`.
    pub fn shifted(&self, phi: f64) -> Self {
        let f = self.value.clone();
        let derivative = self
            .derivative
            .clone()
            .map(|df| -> RealFn { Arc::new(move |t| df(t + phi)) });
        PeriodicFn {
            label: format!("shift:{phi}:{}", self.label),
            value: Arc::new(move |t| f(t + phi)),
            derivative,
            kinks: self.kinks.iter().map(|k| k - phi).collect(),
        }
    }
}

impl fmt::Debug for PeriodicFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicFn")
            .field("label", &self.label)
            .field("kinks", &self.kinks)
            .field("has_derivative", &self.derivative.is_some())
            .finish()
    }
}
