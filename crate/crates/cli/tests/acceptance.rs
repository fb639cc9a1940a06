//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use resaudit_core::auditor_data::{generate_auditor_data, AUDITOR_ROWS};
use resaudit_core::curves::{roc_curve, trapezoid_area, tsecdf};
use resaudit_core::data::{make_residual_frame, ClassificationFrame, ResidualFrame, ORDER_INDEX};
use resaudit_core::influence::{
    cooks_distance, halfnormal, top_k_indices, CooksMethod, CooksOptions, HalfNormalOptions,
};
use resaudit_core::models::ModelHandle;
use resaudit_core::multimodel::{ranking, RawScores};
use resaudit_core::numerics::stats::variance_pop;
use resaudit_core::numerics::{normal_sample, ols_fit, Matrix, Prng};
use resaudit_core::scores::{
    acf, runs_components, score_auc, score_dw, score_mae, score_rec, score_rmse, score_rroc,
};

type Outcome = Result<String, String>;

fn residuals(prng: &mut Prng, n: usize) -> Vec<f64> {
    let scale = 0.1 + 10.0 * prng.uniform();
    let mut r: Vec<f64> = normal_sample(prng, n)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    // Some exact ties and zeros.
    for i in (0..n).step_by(7) {
        r[i] = (r[i] * 2.0).round() / 2.0;
    }
    r
}

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

fn rec_identity() -> Outcome {
    let mut prng = Prng::new(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = 1 + (prng.next_u64() % 200) as usize;
        let rf = ResidualFrame::from_residuals("m", residuals(&mut prng, n))
            .map_err(|e| e.to_string())?;
        worst = worst.max((score_rec(&rf).value - score_mae(&rf).value).abs());
    }
    if worst <= 1e-12 {
        Ok(format!("max |rec - mae| = {worst:.3e}"))
    } else {
        Err(format!("max |rec - mae| = {worst:.3e} > 1e-12"))
    }
}

/// Area over the RROC curve sampled on a dense grid of shifts.
fn rroc_dense_oracle(r: &[f64], steps: usize) -> f64 {
    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let point = |s: f64| {
        let over: f64 = r.iter().map(|v| (s - v).max(0.0)).sum();
        let under: f64 = r.iter().map(|v| (s - v).min(0.0)).sum();
        (over, under)
    };
    let mut area = 0.0;
    let mut prev = point(lo);
    for k in 1..=steps {
        let cur = point(lo + (hi - lo) * k as f64 / steps as f64);
        area += (cur.0 - prev.0) * -(cur.1 + prev.1) / 2.0;
        prev = cur;
    }
    area
}

fn rroc_variance() -> Outcome {
    let mut prng = Prng::new(202);
    let (mut worst, mut worst_oracle): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        // The curve needs two residuals.
        let n = 2 + (prng.next_u64() % 199) as usize;
        let r = residuals(&mut prng, n);
        let rf = ResidualFrame::from_residuals("m", r.clone()).map_err(|e| e.to_string())?;
        let score = score_rroc(&rf).map_err(|e| e.to_string())?.value;
        let nf = n as f64;
        let theory = nf * nf / 2.0 * variance_pop(&r);
        worst = worst.max(rel(score, theory));
        worst_oracle = worst_oracle.max(rel(score, rroc_dense_oracle(&r, 4_000)));
    }
    if worst <= 1e-9 && worst_oracle <= 1e-4 {
        Ok(format!(
            "theorem rel err {worst:.3e}, dense-shift oracle rel err {worst_oracle:.3e}"
        ))
    } else {
        Err(format!("theorem rel err {worst:.3e} (tol 1e-9), dense-shift oracle rel err {worst_oracle:.3e} (tol 1e-4)"))
    }
}

fn cooks_dual_path() -> Outcome {
    let (n, p) = (50, 3);
    let mut prng = Prng::new(303);
    let z = normal_sample(&mut prng, n * p);
    let x = Matrix::from_fn(n, p, |i, j| z[i * p + j]);
    let noise = normal_sample(&mut prng, n);
    let y: Vec<f64> = (0..n)
        .map(|i| 1.0 + 2.0 * x[(i, 0)] - x[(i, 1)] + 0.5 * x[(i, 2)] + noise[i])
        .collect();
    let ols = ModelHandle::ols();
    let run = |m| {
        cooks_distance(
            &ols,
            &x,
            &y,
            &CooksOptions {
                method: Some(m),
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())
    };
    let hat = run(CooksMethod::HatMatrix)?;
    let loo = run(CooksMethod::LooRefit)?;
    // Literal recomputation straight from the OLS solver.
    let full = ols_fit(&x, &y).map_err(|e| e.to_string())?;
    let s2 = full.sigma2;
    let mut literal = Vec::with_capacity(n);
    for i in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&k| k != i).collect();
        let xi = x.select_rows(&keep);
        let yi: Vec<f64> = keep.iter().map(|&k| y[k]).collect();
        let fit = ols_fit(&xi, &yi).map_err(|e| e.to_string())?;
        let pred = fit.predict(&x).map_err(|e| e.to_string())?;
        let ss: f64 = full
            .fitted
            .iter()
            .zip(&pred)
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        literal.push(ss / (p as f64 * s2));
    }
    let worst = (0..n)
        .map(|i| rel(hat.d[i], loo.d[i]).max(rel(hat.d[i], literal[i])))
        .fold(0.0, f64::max);
    if worst <= 1e-8 {
        Ok(format!("max rel diff {worst:.3e}"))
    } else {
        Err(format!("max rel diff {worst:.3e} > 1e-8"))
    }
}

fn auc_equivalence() -> Outcome {
    let mut prng = Prng::new(404);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = 2 + (prng.next_u64() % 199) as usize;
        let mut labels: Vec<f64> = (0..n)
            .map(|_| f64::from(u8::from(prng.uniform() < 0.4)))
            .collect();
        labels[0] = 1.0;
        labels[1] = 0.0;
        // Coarse scores force ties, including across classes.
        let scores: Vec<f64> = labels
            .iter()
            .map(|l| ((prng.uniform() + 0.3 * l) * 10.0).floor() / 10.0)
            .collect();
        let cf = ClassificationFrame::new("m", &labels, scores).map_err(|e| e.to_string())?;
        worst = worst.max((score_auc(&cf).value - trapezoid_area(&roc_curve(&cf))).abs());
    }
    if worst <= 1e-12 {
        Ok(format!("max |auc - trapezoid| = {worst:.3e}"))
    } else {
        Err(format!("max |auc - trapezoid| = {worst:.3e} > 1e-12"))
    }
}

fn dw_runs_acf() -> Outcome {
    let n = 10_000;
    let mut dw_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut runs_ok = 0;
    let mut worst_acf_share: f64 = 1.0;
    for seed in 0..20 {
        let mut prng = Prng::new(500 + seed);
        let rf = ResidualFrame::from_residuals("m", normal_sample(&mut prng, n))
            .map_err(|e| e.to_string())?;
        let dw = score_dw(&rf).map_err(|e| e.to_string())?.value;
        dw_range = (dw_range.0.min(dw), dw_range.1.max(dw));
        if runs_components(&rf).map_err(|e| e.to_string())?.z.abs() < 4.0 {
            runs_ok += 1;
        }
        let a = acf(&rf, None).map_err(|e| e.to_string())?;
        let band = 3.0 * 1.96 / (n as f64).sqrt();
        let inside = a.rho.iter().filter(|r| r.abs() <= band).count();
        worst_acf_share = worst_acf_share.min(inside as f64 / a.rho.len() as f64);
    }
    let detail = format!(
        "DW in [{:.4}, {:.4}], |Z| < 4 in {runs_ok}/20 seeds, min ACF share inside band {:.3}",
        dw_range.0, dw_range.1, worst_acf_share
    );
    if dw_range.0 >= 1.9 && dw_range.1 <= 2.1 && runs_ok >= 19 && worst_acf_share >= 0.99 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn tsecdf_terminal() -> Outcome {
    let mut prng = Prng::new(606);
    for k in 0..100 {
        let n = 1 + (prng.next_u64() % 200) as usize;
        let mut r = residuals(&mut prng, n);
        // One-sided vectors exercise a missing curve.
        if k % 25 == 0 {
            r.iter_mut().for_each(|v| *v = v.abs() + 0.1);
        } else if k % 25 == 1 {
            r.iter_mut().for_each(|v| *v = -v.abs() - 0.1);
        }
        let rf = ResidualFrame::from_residuals("m", r).map_err(|e| e.to_string())?;
        let t = tsecdf(&rf).map_err(|e| e.to_string())?;
        let neg = t.negative.as_ref().map_or(0.0, |s| s.points[0].y);
        let pos = t
            .positive
            .as_ref()
            .map_or(0.0, |s| s.points.last().unwrap().y);
        if neg + pos != 1.0 {
            return Err(format!(
                "vector {k}: terminal values {neg} + {pos} = {}",
                neg + pos
            ));
        }
    }
    Ok("100/100 vectors sum to exactly 1".into())
}

fn halfnormal_coverage() -> Outcome {
    let (n, m) = (100, 100);
    let ols = ModelHandle::ols();
    let mut coverages = Vec::new();
    for seed in 0..20u64 {
        let mut prng = Prng::new(700 + seed);
        let z = normal_sample(&mut prng, 2 * n);
        let x = Matrix::from_fn(n, 2, |i, j| z[2 * i + j]);
        let e = normal_sample(&mut prng, n);
        let y: Vec<f64> = (0..n)
            .map(|i| 3.0 + x[(i, 0)] - 2.0 * x[(i, 1)] + e[i])
            .collect();
        let opts = HalfNormalOptions::new(m, seed);
        let a = halfnormal(&ols, &x, &y, &opts).map_err(|e| e.to_string())?;
        if seed == 0 {
            let b = halfnormal(&ols, &x, &y, &opts).map_err(|e| e.to_string())?;
            let ja = serde_json::to_string(&a).unwrap();
            let jb = serde_json::to_string(&b).unwrap();
            if ja != jb {
                return Err("rerun with the same seed is not byte-identical".into());
            }
            let par = halfnormal(
                &ols,
                &x,
                &y,
                &HalfNormalOptions {
                    workers: 4,
                    ..opts.clone()
                },
            )
            .map_err(|e| e.to_string())?;
            if serde_json::to_string(&par).unwrap() != ja {
                return Err("4 workers differ from 1 worker".into());
            }
        }
        coverages.push(a.coverage());
    }
    let mean = coverages.iter().sum::<f64>() / coverages.len() as f64;
    let detail = format!("mean coverage {mean:.4} over 20 seeds; reruns byte-identical");
    if (0.90..=1.00).contains(&mean) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn use_case() -> Outcome {
    let frame = generate_auditor_data(2024).map_err(|e| e.to_string())?;
    let names: Vec<String> = (1..=4).map(|j| format!("X{j}")).collect();
    let x = frame.design(&names).map_err(|e| e.to_string())?;
    let y = frame.y().to_vec();
    let cooks = cooks_distance(
        &ModelHandle::ols(),
        &x,
        &y,
        &CooksOptions {
            top_k: 3,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let planted = [AUDITOR_ROWS - 2, AUDITOR_ROWS - 1];
    if !planted.iter().all(|i| cooks.top_k.contains(i)) {
        return Err(format!("Cook's top-3 {:?} misses {planted:?}", cooks.top_k));
    }
    let fit = ols_fit(&x, &y).map_err(|e| e.to_string())?;
    let abs: Vec<f64> = fit.residuals.iter().map(|r| r.abs()).collect();
    let mut top2 = top_k_indices(&abs, 2);
    top2.sort_unstable();
    if top2 != planted {
        return Err(format!("largest |r| at {top2:?}"));
    }
    let scores = |f: &resaudit_core::data::AuditFrame| -> Result<(f64, f64), String> {
        let x = f.design(&names).map_err(|e| e.to_string())?;
        let fitted = ols_fit(&x, f.y()).map_err(|e| e.to_string())?.fitted;
        let f = f
            .clone()
            .with_model("lm", fitted)
            .map_err(|e| e.to_string())?;
        let rf = make_residual_frame(&f, "lm", ORDER_INDEX).map_err(|e| e.to_string())?;
        Ok((score_mae(&rf).value, score_rmse(&rf).value))
    };
    let before = scores(&frame)?;
    let keep: Vec<bool> = (0..frame.n()).map(|i| !planted.contains(&i)).collect();
    let after = scores(&frame.filter_rows(&keep).map_err(|e| e.to_string())?)?;
    let detail = format!(
        "top-3 Cook's {:?}; MAE {:.4} -> {:.4}, RMSE {:.4} -> {:.4}",
        cooks.top_k, before.0, after.0, before.1, after.1
    );
    if after.0 < before.0 && after.1 < before.1 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ranking_invariants() -> Outcome {
    let mut prng = Prng::new(909);
    for t in 0..200 {
        let models = 2 + (prng.next_u64() % 5) as usize;
        let n_scores = 1 + (prng.next_u64() % 5) as usize;
        let mut raw = RawScores::new();
        for s in 0..n_scores {
            let col: BTreeMap<String, f64> = (0..models)
                .map(|m| (format!("m{m}"), 1e-3 + 100.0 * prng.uniform()))
                .collect();
            raw.insert(format!("s{s}"), col);
        }
        let table = ranking(&raw, "m0").map_err(|e| e.to_string())?;
        for (score, col) in &raw {
            let best = col.iter().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            for label in col.keys() {
                let e = table.get(label, score).ok_or("missing entry")?;
                if !(e.invscore > 0.0 && e.invscore <= 1.0) {
                    return Err(format!("table {t}: invscore {} outside (0, 1]", e.invscore));
                }
                if label == best && e.invscore != 1.0 {
                    return Err(format!(
                        "table {t}: minimizer {label} has invscore {}",
                        e.invscore
                    ));
                }
            }
        }
        let target = format!("s{}", prng.next_u64() % n_scores as u64);
        let c = 1e-3 + 1e3 * prng.uniform();
        let mut scaled = raw.clone();
        scaled
            .get_mut(&target)
            .unwrap()
            .values_mut()
            .for_each(|v| *v *= c);
        let rescaled = ranking(&scaled, "m0").map_err(|e| e.to_string())?;
        for (a, b) in table.entries.iter().zip(&rescaled.entries) {
            if rel(a.invscore, b.invscore) > 1e-14 {
                return Err(format!(
                    "table {t}: invscore {} -> {} after rescaling",
                    a.invscore, b.invscore
                ));
            }
        }
    }
    Ok("200 random tables: invscore in (0, 1], minimizer = 1, scale invariant".into())
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = common::write_fixture(dir.path(), 200, 11);
    let data = data.to_str().unwrap();
    let plot_types: Vec<String> = resaudit_core::data::CurveKind::ALL
        .iter()
        .flat_map(|k| ["--type".to_string(), k.id().to_string()])
        .collect();
    let score_types: Vec<String> = resaudit_core::scores::ScoreId::ALL
        .iter()
        .flat_map(|k| ["--type".to_string(), k.id().to_string()])
        .collect();
    let adapter = common::ols_adapter_command();
    let base = ["--data", data, "--label-column", "c", "--seed", "5"];
    let mut commands: Vec<Vec<String>> = vec![
        vec!["generate-data".into(), "--seed".into(), "3".into()],
        ["score"]
            .iter()
            .chain(&base)
            .map(|s| s.to_string())
            .chain(score_types)
            .collect(),
        ["plot"]
            .iter()
            .chain(&base)
            .map(|s| s.to_string())
            .chain(plot_types)
            .collect(),
        ["cooks", "--data", data, "--seed", "5"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        [
            "halfnormal",
            "--data",
            data,
            "--seed",
            "5",
            "--simulations",
            "30",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        ["cooks", "--data", data, "--adapter", &adapter]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    ];
    // Render every plot document produced above.
    let plot_dir = dir.path().join("plots");
    let mut plot_args = commands[2].clone();
    plot_args.extend([
        "--out-dir".to_string(),
        plot_dir.to_str().unwrap().to_string(),
    ]);
    let out = common::run(&plot_args.iter().map(String::as_str).collect::<Vec<_>>());
    if !out.status.success() {
        return Err(format!(
            "plot --out-dir failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    for k in resaudit_core::data::CurveKind::ALL {
        let input = plot_dir.join(format!("{}.json", k.id()));
        commands.push(vec![
            "render".into(),
            "--input".into(),
            input.to_str().unwrap().into(),
        ]);
    }
    let serve_script =
        "{\"cmd\":\"hello\"}\n{\"cmd\":\"fit\",\"x\":[[1],[2],[3],[4]],\"y\":[1,3,2,5]}\n\
        {\"cmd\":\"predict\",\"x\":[[5]]}\n{\"cmd\":\"simulate\",\"m\":2,\"seed\":9}\n";
    let mut checked = 0;
    for args in &commands {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = common::run(&argv);
        let b = common::run(&argv);
        if !a.status.success() {
            return Err(format!(
                "`{}` failed: {}",
                args[0],
                String::from_utf8_lossy(&a.stderr)
            ));
        }
        if common::canonical_stdout(&a) != common::canonical_stdout(&b) || a.stdout.is_empty() {
            return Err(format!("`{}` output differs between runs", args.join(" ")));
        }
        checked += 1;
    }
    let a = common::run_with_stdin(&["serve-adapter"], Some(serve_script));
    let b = common::run_with_stdin(&["serve-adapter"], Some(serve_script));
    if !a.status.success() || a.stdout != b.stdout {
        return Err("serve-adapter output differs between runs".into());
    }
    checked += 1;
    Ok(format!("{checked} invocations identical across two runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("REC area equals MAE", rec_identity, Duration::from_secs(1)),
        (
            "RROC area equals n^2/2 * Var_pop",
            rroc_variance,
            Duration::from_secs(5),
        ),
        (
            "Cook's hat matrix equals LOO refit",
            cooks_dual_path,
            Duration::from_secs(1),
        ),
        (
            "AUC rank formula equals ROC trapezoid",
            auc_equivalence,
            Duration::from_secs(1),
        ),
        (
            "DW, runs and ACF on white noise",
            dw_runs_acf,
            Duration::from_secs(10),
        ),
        (
            "Two-sided ECDF terminals sum to 1",
            tsecdf_terminal,
            Duration::from_secs(1),
        ),
        (
            "Half-normal envelope coverage",
            halfnormal_coverage,
            Duration::from_secs(60),
        ),
        ("Auditor data use case", use_case, Duration::from_secs(30)),
        (
            "Ranking invariants",
            ranking_invariants,
            Duration::from_secs(1),
        ),
        ("CLI determinism", cli_determinism, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        let slow = if took > limit {
            format!(" [over {:.0?} budget]", limit)
        } else {
            String::new()
        };
        println!("{status} {name}: {detail} ({:.2?}){slow}", took);
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
