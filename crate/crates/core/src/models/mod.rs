//! Uniform model interface for refitting diagnostics.
//!
//! A [`ModelHandle`] describes a model; [`ModelHandle::open`] yields a
//! [`ModelSession`] whose state is the last fit. Built-in models run in
//! process, external ones are subprocesses speaking the JSON-lines protocol
//! in [`protocol`].

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::numerics::stats::{mean, variance_sample};
use crate::numerics::{normal_sample, ols_fit, LinearModelFit, Prng};

mod adapter;
pub mod protocol;

pub use adapter::{AdapterClient, FnTransport, LineTransport, ProcessTransport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Capability {
    #[serde(rename = "fit")]
    Fit,
    #[serde(rename = "predict")]
    Predict,
    #[serde(rename = "simulate")]
    Simulate,
    /// Simulation that cannot honor the seed. Accepted, but flagged.
    #[serde(rename = "simulate-nondeterministic")]
    SimulateNondeterministic,
}

impl Capability {
    pub fn id(self) -> &'static str {
        match self {
            Capability::Fit => "fit",
            Capability::Predict => "predict",
            Capability::Simulate => "simulate",
            Capability::SimulateNondeterministic => "simulate-nondeterministic",
        }
    }

    pub fn from_id(id: &str) -> Option<Capability> {
        [
            Capability::Fit,
            Capability::Predict,
            Capability::Simulate,
            Capability::SimulateNondeterministic,
        ]
        .into_iter()
        .find(|c| c.id() == id)
    }
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

pub type Capabilities = BTreeSet<Capability>;

/// Full built-in capability set.
pub fn all_capabilities() -> Capabilities {
    [Capability::Fit, Capability::Predict, Capability::Simulate]
        .into_iter()
        .collect()
}

/// How to launch an external adapter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdapterDescriptor {
    pub program: String,
    pub args: Vec<String>,
    pub handshake_timeout: Duration,
    /// Timeout for each fit, predict or simulate request.
    pub request_timeout: Duration,
}

impl AdapterDescriptor {
    pub const DEFAULT_HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(10);
    pub const DEFAULT_REQUEST_TIMEOUT: Duration = Duration::from_secs(60);

    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        AdapterDescriptor {
            program: program.into(),
            args,
            handshake_timeout: Self::DEFAULT_HANDSHAKE_TIMEOUT,
            request_timeout: Self::DEFAULT_REQUEST_TIMEOUT,
        }
    }

    /// Splits a shell-like command line on whitespace. No quoting support.
    pub fn from_command_line(cmd: &str) -> Result<Self> {
        let mut parts = cmd.split_whitespace().map(String::from);
        let program = parts
            .next()
            .ok_or_else(|| AuditError::AdapterLaunch("empty adapter command".into()))?;
        Ok(Self::new(program, parts.collect()))
    }

    pub fn connect(&self) -> Result<AdapterClient<ProcessTransport>> {
        let transport = ProcessTransport::spawn(&self.program, &self.args)?;
        AdapterClient::handshake(transport, self.handshake_timeout, self.request_timeout)
    }
}

pub type SessionFactory = Arc<dyn Fn() -> Result<Box<dyn ModelSession>> + Send + Sync>;

#[derive(Clone)]
pub enum Backing {
    Ols,
    Constant,
    External(AdapterDescriptor),
    /// Sessions built by caller code, e.g. an in-process adapter client.
    Factory(SessionFactory),
}

impl fmt::Debug for Backing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backing::Ols => f.write_str("Ols"),
            Backing::Constant => f.write_str("Constant"),
            Backing::External(d) => f.debug_tuple("External").field(d).finish(),
            Backing::Factory(_) => f.write_str("Factory(..)"),
        }
    }
}

/// A model the diagnostics may fit, query and simulate from.
#[derive(Debug, Clone)]
pub struct ModelHandle {
    pub name: String,
    pub capabilities: Capabilities,
    pub backing: Backing,
}

impl ModelHandle {
    pub fn ols() -> Self {
        ModelHandle {
            name: "ols".into(),
            capabilities: all_capabilities(),
            backing: Backing::Ols,
        }
    }

    pub fn constant() -> Self {
        ModelHandle {
            name: "constant".into(),
            capabilities: all_capabilities(),
            backing: Backing::Constant,
        }
    }

    /// Launches the adapter once to learn its name and capabilities.
    pub fn external(descriptor: AdapterDescriptor) -> Result<Self> {
        let client = descriptor.connect()?;
        Ok(ModelHandle {
            name: client.name().to_string(),
            capabilities: client.capabilities().clone(),
            backing: Backing::External(descriptor),
        })
    }

    pub fn from_factory(name: &str, capabilities: Capabilities, factory: SessionFactory) -> Self {
        ModelHandle {
            name: name.into(),
            capabilities,
            backing: Backing::Factory(factory),
        }
    }

    pub fn is_builtin_ols(&self) -> bool {
        matches!(self.backing, Backing::Ols)
    }

    /// Simulation is possible but not reproducible under a seed.
    pub fn is_nondeterministic(&self) -> bool {
        !self.capabilities.contains(&Capability::Simulate)
            && self
                .capabilities
                .contains(&Capability::SimulateNondeterministic)
    }

    pub fn has(&self, cap: Capability) -> bool {
        match cap {
            Capability::Simulate => {
                self.capabilities.contains(&Capability::Simulate)
                    || self
                        .capabilities
                        .contains(&Capability::SimulateNondeterministic)
            }
            c => self.capabilities.contains(&c),
        }
    }

    pub fn require(&self, caps: &[Capability]) -> Result<()> {
        match caps.iter().find(|c| !self.has(**c)) {
            Some(c) => Err(AuditError::MissingCapability {
                model: self.name.clone(),
                capability: c.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// A fresh session. External backings spawn a new process.
    pub fn open(&self) -> Result<Box<dyn ModelSession>> {
        match &self.backing {
            Backing::Ols => Ok(Box::new(OlsSession::default())),
            Backing::Constant => Ok(Box::new(ConstantSession::default())),
            Backing::External(d) => Ok(Box::new(d.connect()?)),
            Backing::Factory(f) => f(),
        }
    }
}

/// A model with mutable fitted state; every `fit` replaces the previous one.
pub trait ModelSession: Send {
    fn fit(&mut self, x: &DMatrix<f64>, y: &[f64]) -> Result<()>;

    fn predict(&mut self, x: &DMatrix<f64>) -> Result<Vec<f64>>;

    /// `m` response vectors drawn around the current fit. Vector `j` must
    /// depend only on `(seed, j)`.
    fn simulate(&mut self, m: usize, seed: u64) -> Result<Vec<Vec<f64>>>;

    /// The OLS fit behind a built-in session, if any.
    fn linear_fit(&self) -> Option<&LinearModelFit> {
        None
    }
}

fn not_fitted() -> AuditError {
    AuditError::invalid("model has not been fitted")
}

fn check_xy(x: &DMatrix<f64>, y: &[f64]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(AuditError::DimensionMismatch(format!(
            "{} design rows, {} responses",
            x.nrows(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AuditError::invalid("fit data must be finite"));
    }
    Ok(())
}

/// Draws `mean_j + sd * z` for each simulation index on its own stream.
fn simulate_around(center: &[f64], sd: f64, m: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..m)
        .map(|j| {
            let mut prng = Prng::split(seed, j as u64);
            let z = normal_sample(&mut prng, center.len());
            center.iter().zip(z).map(|(c, z)| c + sd * z).collect()
        })
        .collect()
}

#[derive(Debug, Default)]
pub struct OlsSession {
    fit: Option<LinearModelFit>,
}

impl ModelSession for OlsSession {
    fn fit(&mut self, x: &DMatrix<f64>, y: &[f64]) -> Result<()> {
        check_xy(x, y)?;
        self.fit = Some(ols_fit(x, y)?);
        Ok(())
    }

    fn predict(&mut self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        let fit = self.fit.as_ref().ok_or_else(not_fitted)?;
        if x.nrows() == 0 {
            return Ok(vec![]);
        }
        fit.predict(x)
    }

    fn simulate(&mut self, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let fit = self.fit.as_ref().ok_or_else(not_fitted)?;
        Ok(simulate_around(&fit.fitted, fit.sigma2.sqrt(), m, seed))
    }

    fn linear_fit(&self) -> Option<&LinearModelFit> {
        self.fit.as_ref()
    }
}

/// Predicts the training mean everywhere; ignores the predictors.
#[derive(Debug, Default)]
pub struct ConstantSession {
    state: Option<(f64, f64, usize)>,
}

impl ModelSession for ConstantSession {
    fn fit(&mut self, x: &DMatrix<f64>, y: &[f64]) -> Result<()> {
        check_xy(x, y)?;
        if y.is_empty() {
            return Err(AuditError::invalid("cannot fit on zero observations"));
        }
        let var = if y.len() > 1 { variance_sample(y) } else { 0.0 };
        self.state = Some((mean(y), var, y.len()));
        Ok(())
    }

    fn predict(&mut self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        let (mu, _, _) = self.state.ok_or_else(not_fitted)?;
        Ok(vec![mu; x.nrows()])
    }

    fn simulate(&mut self, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let (mu, var, n) = self.state.ok_or_else(not_fitted)?;
        Ok(simulate_around(&vec![mu; n], var.sqrt(), m, seed))
    }
}
