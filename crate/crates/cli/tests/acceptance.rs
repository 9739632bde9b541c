//! Acceptance suite: one PASS/FAIL line per criterion, written straight to
//! stderr so it shows up without `--nocapture`.

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::time::Instant;

use double_lambda::checks::{dissipation_order, oracle_gap, reference_protocols};
use double_lambda::efficiency::{constant_efficiency_closed, optimal_efficiency_closed};
use double_lambda::pmp_search::{optimize_piecewise, sampled_dominance, verify_singular_arc};
use double_lambda::propagation::{propagate_reduced, FieldState, IntegratorOptions};
use double_lambda::protocols::{singular_slope, solve_theta0, Protocol, ProtocolSpec};

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

fn numeric_eta(spec: &ProtocolSpec) -> f64 {
    let p = spec.profile().unwrap();
    propagate_reduced(&p, spec.alpha, FieldState::INCIDENT_PROBE, &IntegratorOptions::default())
        .unwrap()
        .conversion_efficiency()
}

fn theta0_reproduction() -> Verdict {
    let t0 = solve_theta0(100.0).unwrap();
    let us = singular_slope(t0);
    verdict(
        (t0 - 1.540568).abs() <= 1e-5 && (us - 0.015105).abs() <= 1e-5,
        format!("theta0={t0} u_s={us}"),
    )
}

fn efficiency_triple() -> Verdict {
    let start = Instant::now();
    let opt = ProtocolSpec::new(100.0, Protocol::Optimal);
    let con = ProtocolSpec::new(100.0, Protocol::Constant);
    let adi = ProtocolSpec::new(100.0, Protocol::Adiabatic { zeta0: 50.0, zbar: 5.0 });
    let (o, c, a) = (numeric_eta(&opt), numeric_eta(&con), numeric_eta(&adi));
    let (oc, cc) = (optimal_efficiency_closed(100.0).unwrap(), constant_efficiency_closed(100.0).unwrap());
    let elapsed = start.elapsed().as_secs_f64();
    let ok = (o - 0.9094).abs() <= 5e-4
        && (c - 0.9077).abs() <= 5e-4
        && (a - 0.8197).abs() <= 5e-4
        && (o - oc).abs() <= 1e-6
        && (c - cc).abs() <= 1e-6
        && elapsed < 1.0;
    verdict(
        ok,
        format!("optimal={o} constant={c} adiabatic={a} closed gaps={:e},{:e} in {elapsed:.3}s", (o - oc).abs(), (c - cc).abs()),
    )
}

fn efficiency_curves() -> Verdict {
    let alphas: Vec<f64> = (1..=200).map(|k| 100.0 * k as f64 / 200.0).collect();
    let mut ordered = true;
    let mut prev = (0.0, 0.0);
    let mut increasing = true;
    for &alpha in &alphas {
        let o = numeric_eta(&ProtocolSpec::new(alpha, Protocol::Optimal));
        let c = numeric_eta(&ProtocolSpec::new(alpha, Protocol::Constant));
        ordered &= o >= c;
        increasing &= o > prev.0 && c > prev.1;
        prev = (o, c);
    }
    let ratio = optimal_efficiency_closed(0.01).unwrap() / constant_efficiency_closed(0.01).unwrap();
    let rel = (ratio / (PI * PI / 4.0) - 1.0).abs();
    verdict(
        ordered && increasing && rel <= 0.02,
        format!("rowwise order={ordered} monotone={increasing} small-alpha ratio={ratio} (rel {rel:e})"),
    )
}

fn asymptotics() -> Verdict {
    let alpha = 1e4;
    let deficit = PI * PI / alpha;
    let mut worst: f64 = 0.0;
    for protocol in [Protocol::Optimal, Protocol::Constant] {
        let spec = ProtocolSpec::new(alpha, protocol);
        let closed = match spec.protocol {
            Protocol::Optimal => optimal_efficiency_closed(alpha).unwrap(),
            _ => constant_efficiency_closed(alpha).unwrap(),
        };
        for eta in [closed, numeric_eta(&spec)] {
            worst = worst.max(((1.0 - eta) - deficit).abs() / deficit);
        }
    }
    verdict(worst <= 0.01, format!("worst relative deficit error {worst:e}"))
}

fn oracle_equivalence() -> Verdict {
    let mut worst: f64 = 0.0;
    for alpha in [1.0, 10.0, 100.0] {
        for spec in reference_protocols(alpha) {
            worst = worst.max(oracle_gap(&spec.profile().unwrap(), &IntegratorOptions::default()).unwrap());
        }
    }
    verdict(worst <= 1e-8, format!("max final-state gap {worst:e}"))
}

fn dissipation_identity() -> Verdict {
    let mut orders = Vec::new();
    for spec in reference_protocols(10.0) {
        let (order, _) = dissipation_order(&spec.profile().unwrap(), &[8.0, 16.0, 32.0, 64.0]).unwrap();
        orders.push(order);
    }
    verdict(orders.iter().all(|o| (3.5..=4.5).contains(o)), format!("fitted orders {orders:?}"))
}

fn pmp_verification() -> Verdict {
    let v = verify_singular_arc(100.0, &IntegratorOptions::default()).unwrap();
    let ok = v.max_switching < 1e-8
        && v.max_hamiltonian_drift < 1e-8
        && v.max_feedback_residual < 1e-8
        && v.max_ratio_error <= 1e-6;
    verdict(
        ok,
        format!(
            "|phi|={:e} dH={:e} feedback={:e} y/x={:e}",
            v.max_switching, v.max_hamiltonian_drift, v.max_feedback_residual, v.max_ratio_error
        ),
    )
}

fn optimality_dominance() -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    for alpha in [1.0, 10.0, 100.0] {
        let d = sampled_dominance(alpha, 1000, 1, &IntegratorOptions::default()).unwrap();
        worst = worst.max(d.worst_excess);
    }
    let start = Instant::now();
    let r = optimize_piecewise(100.0, 64, 0, 40_000).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let gap = optimal_efficiency_closed(100.0).unwrap() - r.efficiency;
    verdict(
        worst <= 1e-9 && (-1e-9..=1e-3).contains(&gap) && elapsed < 60.0,
        format!("worst sampled excess {worst:e}; search gap {gap:e} in {elapsed:.1}s"),
    )
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_dlambda");
    let runs: [&[&str]; 4] = [
        &["simulate", "--protocol", "adiabatic", "--alpha", "100"],
        &["efficiency", "--protocol", "optimal,constant,adiabatic", "--alpha-steps", "50"],
        &["verify", "--alpha", "1,10", "--samples", "200"],
        &["search", "--alpha", "10", "--segments", "8", "--budget", "3000", "--seed", "9"],
    ];
    let mut identical = true;
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("run{i}_{rep}.out"));
            let threads = if rep == 0 { "1" } else { "3" };
            let status = Command::new(bin)
                .args(*args)
                .args(["--threads", threads, "--out"])
                .arg(&out)
                .status()
                .unwrap();
            assert!(status.success(), "{args:?}");
            let mut bytes = std::fs::read(&out).unwrap();
            if args[0] == "search" {
                // the sidecar path differs by name; its contents must not
                let side = dir.path().join(format!("run{i}_{rep}.profile.txt"));
                let text = String::from_utf8(bytes).unwrap().replace(&format!("run{i}_{rep}"), "run");
                bytes = text.into_bytes();
                bytes.extend(std::fs::read(side).unwrap());
            }
            outputs.push(bytes);
        }
        identical &= outputs[0] == outputs[1];
    }
    verdict(identical, "simulate, efficiency, verify and search outputs byte-identical across runs and thread counts")
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("optimal angle and slope at alpha=100", theta0_reproduction),
        ("efficiency triple at alpha=100", efficiency_triple),
        ("efficiency curves over (0, 100]", efficiency_curves),
        ("large-alpha deficit at alpha=1e4", asymptotics),
        ("exact steady state vs reduced model", oracle_equivalence),
        ("dissipation identity converges at fourth order", dissipation_identity),
        ("singular-arc optimality conditions at alpha=100", pmp_verification),
        ("sampled dominance and direct search", optimality_dominance),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr().lock();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let tag = if v.ok { "PASS" } else { "FAIL" };
        writeln!(err, "acceptance {}: {tag}: {name}: {}", i + 1, v.detail).unwrap();
        if !v.ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
