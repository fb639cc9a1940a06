//! Model-agnostic diagnostics driven through the line protocol in memory.

use std::sync::Arc;
use std::time::Duration;

use resaudit_core::influence::{
    cooks_distance, halfnormal, CooksMethod, CooksOptions, HalfNormalOptions,
};
use resaudit_core::models::protocol::handle_line;
use resaudit_core::models::{
    all_capabilities, AdapterClient, Capabilities, Capability, FnTransport, ModelHandle,
    ModelSession, OlsSession,
};
use resaudit_core::numerics::{normal_sample, Matrix, Prng};
use resaudit_core::AuditError;

fn data(n: usize, seed: u64) -> (Matrix, Vec<f64>) {
    let mut prng = Prng::new(seed);
    let z = normal_sample(&mut prng, 2 * n);
    let x = Matrix::from_fn(n, 2, |i, j| z[2 * i + j]);
    let e = normal_sample(&mut prng, n);
    let y = (0..n)
        .map(|i| 0.5 + x[(i, 0)] - 3.0 * x[(i, 1)] + e[i])
        .collect();
    (x, y)
}

fn in_memory(caps: Capabilities) -> ModelHandle {
    let announced = caps.clone();
    ModelHandle::from_factory(
        "mem-ols",
        caps,
        Arc::new(move || {
            let caps = announced.clone();
            let mut server = OlsSession::default();
            let transport = FnTransport::new(move |line: &str| {
                Some(handle_line(&mut server, "mem-ols", &caps, line))
            });
            let client = AdapterClient::handshake(
                transport,
                Duration::from_secs(1),
                Duration::from_secs(1),
            )?;
            Ok(Box::new(client) as Box<dyn ModelSession>)
        }),
    )
}

#[test]
fn adapter_cooks_matches_builtin() {
    let (x, y) = data(40, 1);
    let builtin = cooks_distance(&ModelHandle::ols(), &x, &y, &CooksOptions::default()).unwrap();
    assert_eq!(builtin.method, CooksMethod::HatMatrix);
    let adapter = in_memory(all_capabilities());
    for workers in [1, 3] {
        let via = cooks_distance(
            &adapter,
            &x,
            &y,
            &CooksOptions {
                workers,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(via.method, CooksMethod::LooRefit);
        for (a, b) in builtin.d.iter().zip(&via.d) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-12), "{a} vs {b}");
        }
        assert_eq!(via.top_k, builtin.top_k);
    }
}

#[test]
fn adapter_halfnormal_matches_builtin_simulation() {
    let (x, y) = data(30, 2);
    let opts = HalfNormalOptions::new(25, 9);
    let a = halfnormal(&ModelHandle::ols(), &x, &y, &opts).unwrap();
    let b = halfnormal(&in_memory(all_capabilities()), &x, &y, &opts).unwrap();
    assert_eq!(a.s, b.s);
    assert_eq!(a.hn_score, b.hn_score);
    for (p, q) in a.env_hi.iter().zip(&b.env_hi) {
        assert!((p - q).abs() < 1e-9);
    }
}

#[test]
fn missing_simulate_capability_is_rejected() {
    let (x, y) = data(30, 3);
    let caps: Capabilities = [Capability::Fit, Capability::Predict].into_iter().collect();
    let err = halfnormal(
        &in_memory(caps.clone()),
        &x,
        &y,
        &HalfNormalOptions::new(20, 1),
    )
    .unwrap_err();
    assert!(
        matches!(err, AuditError::MissingCapability { .. }),
        "{err:?}"
    );
    // Cook's distance only needs fit and predict.
    assert!(cooks_distance(&in_memory(caps), &x, &y, &CooksOptions::default()).is_ok());
}
