//! Adapter wire format: one JSON object per line over stdin/stdout.
//!
//! ```text
//! {"cmd":"hello"}                       -> {"ok":true,"name":str,"capabilities":[...]}
//! {"cmd":"fit","x":[[...]],"y":[...]}   -> {"ok":true}
//! {"cmd":"predict","x":[[...]]}         -> {"ok":true,"yhat":[...]}
//! {"cmd":"simulate","m":int,"seed":int} -> {"ok":true,"ysim":[[...],...]}
//! any failure                           -> {"ok":false,"error":str}
//! ```

use std::io::{self, BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Capabilities, ModelSession};
use crate::error::{AuditError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "lowercase")]
pub enum Request {
    Hello,
    Fit { x: Vec<Vec<f64>>, y: Vec<f64> },
    Predict { x: Vec<Vec<f64>> },
    Simulate { m: usize, seed: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capabilities: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yhat: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ysim: Option<Vec<Vec<f64>>>,
}

impl Response {
    pub fn ok() -> Self {
        Response {
            ok: true,
            ..Default::default()
        }
    }

    pub fn hello(name: &str, capabilities: Vec<String>) -> Self {
        Response {
            name: Some(name.into()),
            capabilities: Some(capabilities),
            ..Self::ok()
        }
    }

    pub fn yhat(v: Vec<f64>) -> Self {
        Response {
            yhat: Some(v),
            ..Self::ok()
        }
    }

    pub fn ysim(v: Vec<Vec<f64>>) -> Self {
        Response {
            ysim: Some(v),
            ..Self::ok()
        }
    }

    pub fn error(msg: impl Into<String>) -> Self {
        Response {
            ok: false,
            error: Some(msg.into()),
            ..Default::default()
        }
    }
}

/// Serializes a message as a single line without the trailing newline.
pub fn encode<T: Serialize>(msg: &T) -> String {
    serde_json::to_string(msg).expect("protocol messages always serialize")
}

pub fn matrix_to_rows(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..x.nrows())
        .map(|i| x.row(i).iter().copied().collect())
        .collect()
}

/// Row-major rows into a matrix; `empty_cols` is used when there are no rows.
pub fn rows_to_matrix(rows: &[Vec<f64>], empty_cols: usize) -> Result<DMatrix<f64>> {
    let Some(first) = rows.first() else {
        return Ok(DMatrix::zeros(0, empty_cols));
    };
    let p = first.len();
    if let Some(i) = rows.iter().position(|r| r.len() != p) {
        return Err(AuditError::DimensionMismatch(format!(
            "row {i} has {} columns, expected {p}",
            rows[i].len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
}

fn finite_or_error(v: &[f64], what: &str) -> std::result::Result<(), String> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(format!("{what} has non-finite value at position {i}")),
        None => Ok(()),
    }
}

/// Adapter-side dispatch for one request line. Always returns one response line.
pub fn handle_line(
    session: &mut dyn ModelSession,
    name: &str,
    caps: &Capabilities,
    line: &str,
) -> String {
    let req: Request = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(e) => return encode(&Response::error(format!("malformed request: {e}"))),
    };
    let resp = match req {
        Request::Hello => Response::hello(name, caps.iter().map(|c| c.id().to_string()).collect()),
        Request::Fit { x, y } => match rows_to_matrix(&x, 0).and_then(|x| session.fit(&x, &y)) {
            Ok(()) => Response::ok(),
            Err(e) => Response::error(e.to_string()),
        },
        Request::Predict { x } => {
            let cols = session.linear_fit().map_or(0, |f| f.p);
            match rows_to_matrix(&x, cols).and_then(|x| session.predict(&x)) {
                Ok(v) => match finite_or_error(&v, "prediction") {
                    Ok(()) => Response::yhat(v),
                    Err(e) => Response::error(e),
                },
                Err(e) => Response::error(e.to_string()),
            }
        }
        Request::Simulate { m, seed } => match session.simulate(m, seed) {
            Ok(v) => match v.iter().try_for_each(|s| finite_or_error(s, "simulation")) {
                Ok(()) => Response::ysim(v),
                Err(e) => Response::error(e),
            },
            Err(e) => Response::error(e.to_string()),
        },
    };
    encode(&resp)
}

/// Runs the adapter side of the protocol until end of input.
pub fn serve(
    session: &mut dyn ModelSession,
    name: &str,
    caps: &Capabilities,
    input: impl BufRead,
    mut output: impl Write,
) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        writeln!(output, "{}", handle_line(session, name, caps, &line))?;
        output.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{all_capabilities, OlsSession};

    #[test]
    fn request_framing_is_exact() {
        assert_eq!(encode(&Request::Hello), r#"{"cmd":"hello"}"#);
        assert_eq!(
            encode(&Request::Fit {
                x: vec![vec![1.0, 2.0]],
                y: vec![3.0]
            }),
            r#"{"cmd":"fit","x":[[1.0,2.0]],"y":[3.0]}"#
        );
        assert_eq!(
            encode(&Request::Predict { x: vec![] }),
            r#"{"cmd":"predict","x":[]}"#
        );
        assert_eq!(
            encode(&Request::Simulate { m: 2, seed: 7 }),
            r#"{"cmd":"simulate","m":2,"seed":7}"#
        );
        assert_eq!(encode(&Response::ok()), r#"{"ok":true}"#);
        assert_eq!(
            encode(&Response::error("bad")),
            r#"{"ok":false,"error":"bad"}"#
        );
    }

    #[test]
    fn every_message_round_trips() {
        let requests = vec![
            Request::Hello,
            Request::Fit {
                x: vec![vec![0.5, -1.25], vec![3.0, 1e-300]],
                y: vec![1.0, 2.0],
            },
            Request::Predict { x: vec![vec![0.1]] },
            Request::Predict { x: vec![] },
            Request::Simulate {
                m: 0,
                seed: u64::MAX,
            },
        ];
        for r in requests {
            let back: Request = serde_json::from_str(&encode(&r)).unwrap();
            assert_eq!(back, r);
        }
        let responses = vec![
            Response::ok(),
            Response::hello("m", vec!["fit".into(), "predict".into()]),
            Response::yhat(vec![0.1, 0.2, 1.0 / 3.0]),
            Response::ysim(vec![vec![1.0], vec![2.0]]),
            Response::ysim(vec![]),
            Response::error("boom"),
        ];
        for r in responses {
            let back: Response = serde_json::from_str(&encode(&r)).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn serve_session() {
        let input = concat!(
            "{\"cmd\":\"hello\"}\n",
            "{\"cmd\":\"fit\",\"x\":[[0],[1],[2]],\"y\":[1,3,5]}\n",
            "{\"cmd\":\"predict\",\"x\":[[10]]}\n",
            "{\"cmd\":\"predict\",\"x\":[]}\n",
            "nonsense\n",
            "{\"cmd\":\"simulate\",\"m\":1,\"seed\":3}\n",
        );
        let mut out = Vec::new();
        serve(
            &mut OlsSession::default(),
            "ols",
            &all_capabilities(),
            input.as_bytes(),
            &mut out,
        )
        .unwrap();
        let lines: Vec<Response> = String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(
            lines[0].capabilities.as_ref().unwrap(),
            &vec!["fit", "predict", "simulate"]
        );
        assert!(lines[1].ok);
        assert!((lines[2].yhat.as_ref().unwrap()[0] - 21.0).abs() < 1e-9);
        assert_eq!(lines[3].yhat.as_ref().unwrap().len(), 0);
        assert!(!lines[4].ok);
        assert!(lines[4].error.as_ref().unwrap().contains("malformed"));
        assert_eq!(lines[5].ysim.as_ref().unwrap()[0].len(), 3);
    }
}
