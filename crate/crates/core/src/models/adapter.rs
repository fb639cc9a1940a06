//! Client side of the adapter protocol.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use nalgebra::DMatrix;

use super::protocol::{encode, matrix_to_rows, Request, Response};
use super::{Capabilities, Capability, ModelSession};
use crate::error::{AuditError, Result};

/// Bidirectional line channel to an adapter.
pub trait LineTransport: Send {
    fn send(&mut self, line: &str) -> Result<()>;
    fn recv(&mut self, timeout: Duration) -> Result<String>;
}

/// An adapter subprocess. Stdout lines are read on a background thread so
/// replies can be awaited with a timeout; the last stderr line is kept for
/// error messages.
pub struct ProcessTransport {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    last_stderr: Arc<Mutex<String>>,
    stderr_reader: Option<thread::JoinHandle<()>>,
}

impl ProcessTransport {
    pub fn spawn(program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| AuditError::AdapterLaunch(format!("cannot start `{program}`: {e}")))?;
        let stdout = child.stdout.take().expect("piped stdout");
        let stderr = child.stderr.take().expect("piped stderr");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let last_stderr = Arc::new(Mutex::new(String::new()));
        let sink = Arc::clone(&last_stderr);
        let stderr_reader = thread::spawn(move || {
            for line in BufReader::new(stderr).lines().map_while(|l| l.ok()) {
                if !line.trim().is_empty() {
                    *sink.lock().unwrap() = line;
                }
            }
        });
        Ok(ProcessTransport {
            stdin: child.stdin.take(),
            child,
            lines: rx,
            last_stderr,
            stderr_reader: Some(stderr_reader),
        })
    }

    fn stderr_hint(&self) -> String {
        let last = self.last_stderr.lock().unwrap();
        if last.is_empty() {
            String::new()
        } else {
            format!("; adapter stderr: {last}")
        }
    }
}

impl LineTransport for ProcessTransport {
    fn send(&mut self, line: &str) -> Result<()> {
        let hint = self.stderr_hint();
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| AuditError::AdapterFailure("adapter stdin closed".into()))?;
        writeln!(stdin, "{line}")
            .and_then(|_| stdin.flush())
            .map_err(|e| AuditError::AdapterFailure(format!("cannot write to adapter: {e}{hint}")))
    }

    fn recv(&mut self, timeout: Duration) -> Result<String> {
        match self.lines.recv_timeout(timeout) {
            Ok(line) => Ok(line),
            Err(RecvTimeoutError::Timeout) => Err(AuditError::AdapterFailure(format!(
                "no reply within {timeout:?}{}",
                self.stderr_hint()
            ))),
            Err(RecvTimeoutError::Disconnected) => {
                let status = self.child.wait().ok();
                // Let the stderr reader drain, unless a grandchild keeps the pipe open.
                if let Some(h) = self.stderr_reader.take() {
                    for _ in 0..50 {
                        if h.is_finished() {
                            break;
                        }
                        thread::sleep(Duration::from_millis(10));
                    }
                }
                Err(AuditError::AdapterFailure(format!(
                    "adapter exited ({}){}",
                    status.map_or("unknown status".into(), |s| s.to_string()),
                    self.stderr_hint()
                )))
            }
        }
    }
}

impl Drop for ProcessTransport {
    fn drop(&mut self) {
        drop(self.stdin.take());
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// In-process transport: each sent line is answered by a closure.
pub struct FnTransport<F> {
    handler: F,
    pending: std::collections::VecDeque<String>,
}

impl<F: FnMut(&str) -> Option<String> + Send> FnTransport<F> {
    pub fn new(handler: F) -> Self {
        FnTransport {
            handler,
            pending: Default::default(),
        }
    }
}

impl<F: FnMut(&str) -> Option<String> + Send> LineTransport for FnTransport<F> {
    fn send(&mut self, line: &str) -> Result<()> {
        if let Some(reply) = (self.handler)(line) {
            self.pending.push_back(reply);
        }
        Ok(())
    }

    fn recv(&mut self, timeout: Duration) -> Result<String> {
        self.pending
            .pop_front()
            .ok_or_else(|| AuditError::AdapterFailure(format!("no reply within {timeout:?}")))
    }
}

/// A session backed by an adapter speaking the JSON-lines protocol.
pub struct AdapterClient<T: LineTransport> {
    transport: T,
    name: String,
    capabilities: Capabilities,
    request_timeout: Duration,
    trained: Option<(usize, usize)>,
}

fn protocol_error(message: impl Into<String>, line: &str) -> AuditError {
    AuditError::AdapterProtocol {
        message: message.into(),
        line: line.to_string(),
    }
}

impl<T: LineTransport> AdapterClient<T> {
    /// Sends `hello` and records name and capabilities. Unknown capability
    /// names are ignored.
    pub fn handshake(
        mut transport: T,
        handshake_timeout: Duration,
        request_timeout: Duration,
    ) -> Result<Self> {
        let launch = |e: AuditError| match e {
            AuditError::AdapterFailure(m) => {
                AuditError::AdapterLaunch(format!("handshake failed: {m}"))
            }
            other => other,
        };
        transport.send(&encode(&Request::Hello)).map_err(launch)?;
        let line = transport.recv(handshake_timeout).map_err(launch)?;
        let resp = parse_response(&line)?;
        let (Some(name), Some(caps)) = (resp.name, resp.capabilities) else {
            return Err(protocol_error(
                "hello reply needs `name` and `capabilities`",
                &line,
            ));
        };
        let capabilities = caps.iter().filter_map(|c| Capability::from_id(c)).collect();
        Ok(AdapterClient {
            transport,
            name,
            capabilities,
            request_timeout,
            trained: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn capabilities(&self) -> &Capabilities {
        &self.capabilities
    }

    fn need(&self, cap: Capability) -> Result<()> {
        let ok = self.capabilities.contains(&cap)
            || (cap == Capability::Simulate
                && self
                    .capabilities
                    .contains(&Capability::SimulateNondeterministic));
        if ok {
            Ok(())
        } else {
            Err(AuditError::MissingCapability {
                model: self.name.clone(),
                capability: cap.to_string(),
            })
        }
    }

    fn call(&mut self, req: &Request) -> Result<(Response, String)> {
        self.transport.send(&encode(req))?;
        let line = self.transport.recv(self.request_timeout)?;
        let resp = parse_response(&line)?;
        Ok((resp, line))
    }
}

fn parse_response(line: &str) -> Result<Response> {
    let resp: Response = serde_json::from_str(line)
        .map_err(|e| protocol_error(format!("unparseable reply: {e}"), line))?;
    if !resp.ok {
        return Err(AuditError::AdapterFailure(resp.error.unwrap_or_else(
            || format!("adapter reported failure without message: {line}"),
        )));
    }
    Ok(resp)
}

fn check_finite(v: &[f64], what: &str, line: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(protocol_error(
            format!("{what} contains non-finite values"),
            line,
        ));
    }
    Ok(())
}

impl<T: LineTransport> ModelSession for AdapterClient<T> {
    fn fit(&mut self, x: &DMatrix<f64>, y: &[f64]) -> Result<()> {
        self.need(Capability::Fit)?;
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
        self.trained = None;
        self.call(&Request::Fit {
            x: matrix_to_rows(x),
            y: y.to_vec(),
        })?;
        self.trained = Some((x.nrows(), x.ncols()));
        Ok(())
    }

    fn predict(&mut self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        self.need(Capability::Predict)?;
        let (_, p) = self
            .trained
            .ok_or_else(|| AuditError::invalid("model has not been fitted"))?;
        if x.ncols() != p {
            return Err(AuditError::DimensionMismatch(format!(
                "model trained on {p} predictors, got {}",
                x.ncols()
            )));
        }
        if x.nrows() == 0 {
            return Ok(vec![]);
        }
        let (resp, line) = self.call(&Request::Predict {
            x: matrix_to_rows(x),
        })?;
        let yhat = resp
            .yhat
            .ok_or_else(|| protocol_error("predict reply lacks `yhat`", &line))?;
        if yhat.len() != x.nrows() {
            return Err(protocol_error(
                format!("expected {} predictions, got {}", x.nrows(), yhat.len()),
                &line,
            ));
        }
        check_finite(&yhat, "yhat", &line)?;
        Ok(yhat)
    }

    fn simulate(&mut self, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.need(Capability::Simulate)?;
        let (n, _) = self
            .trained
            .ok_or_else(|| AuditError::invalid("model has not been fitted"))?;
        if m == 0 {
            return Ok(vec![]);
        }
        let (resp, line) = self.call(&Request::Simulate { m, seed })?;
        let ysim = resp
            .ysim
            .ok_or_else(|| protocol_error("simulate reply lacks `ysim`", &line))?;
        if ysim.len() != m || ysim.iter().any(|v| v.len() != n) {
            return Err(protocol_error(
                format!("expected {m} simulations of length {n}"),
                &line,
            ));
        }
        for v in &ysim {
            check_finite(v, "ysim", &line)?;
        }
        Ok(ysim)
    }
}
