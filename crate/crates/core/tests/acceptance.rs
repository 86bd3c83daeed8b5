//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the
//! terminal. Exits non-zero when a criterion fails unless it is listed in
//! `KNOWN_FAILING`, whose entries stay visible as FAIL.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use common::messages::{any_message, golden_messages, golden_vectors};
use common::scan::{baseline_instants, oracle_scan, BASELINE_TRACES};
use ricsim::cli::read_campaign;
use ricsim::e2::{decode, encode};
use ricsim::nn::optim::{step_adam, step_rmsprop, AdamState, RmsPropState};
use ricsim::nn::{train, Activation, CellKind, Dataset, ModelConfig, RecurrentModel};
use ricsim::sim::{run, HoMode, RunOptions, Scenario};
use ricsim::stats::{anova, GroupSamples};
use ricsim::traffic::{run_ota, Aggregates, LinkModel, OtaConfig};

/// The end-to-end directional criterion does not hold under the fixed
/// radio defaults; the measured numbers are printed on every run.
const KNOWN_FAILING: &[u32] = &[8];

const RUNS: u64 = 30;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Work {
    dir: tempfile::TempDir,
}

impl Work {
    fn path(&self, p: &str) -> PathBuf {
        self.dir.path().join(p)
    }
}

fn ricsim(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_ricsim")).args(args).output().expect("spawn ricsim");
    assert!(out.status.success(), "ricsim {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn scenario_file(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name).to_str().unwrap().to_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn codec() -> Outcome {
    let start = Instant::now();
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 10_000, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let round_trips = runner.run(&any_message(), |msg| {
        let bytes = encode(&msg).unwrap();
        let back = decode(&bytes).unwrap();
        proptest::prop_assert_eq!(format!("{back:?}"), format!("{msg:?}"));
        Ok(())
    });
    let golden = golden_vectors();
    let golden_ok = golden.len() == 7
        && golden.iter().zip(golden_messages()).all(|((name, bytes), (want, msg))| {
            name == want && encode(&msg).unwrap() == *bytes && decode(bytes).unwrap() == msg
        });
    let secs = start.elapsed().as_secs_f64();
    outcome(
        round_trips.is_ok() && golden_ok && secs < 10.0,
        format!(
            "10000 round trips {}, 7 golden vectors {}, {secs:.1} s",
            if round_trips.is_ok() { "ok" } else { "FAILED" },
            if golden_ok { "match" } else { "DIFFER" }
        ),
    )
}

fn protocol() -> Outcome {
    let s = Scenario { duration_ms: 300_000, seed: 1, ..Scenario::default() };
    let period = s.radio.report_period_ms;
    let mut parts = Vec::new();
    let mut pass = true;
    for mode in [HoMode::Default, HoMode::Oracle] {
        let c = run(&s, &RunOptions { mode, model: None }).unwrap().counters;
        let ok = c.subscriptions_confirmed == s.cells.len() as u64
            && c.indications_sent == 300_000 / period
            && c.indications_delivered == c.indications_sent
            && c.indications_dropped == 0
            && c.undeliverable_xapp_messages == 0
            && c.control_acks_ok == c.controls_sent
            && c.control_acks_failed == 0
            && c.handovers > 0
            && (mode == HoMode::Default || c.controls_sent > 0);
        pass &= ok;
        parts.push(format!(
            "{mode}: {} subscriptions, {}/{} indications, {} dropped, {} controls, {} handovers",
            c.subscriptions_confirmed, c.indications_delivered, c.indications_sent, c.indications_dropped, c.controls_sent,
            c.handovers
        ));
    }
    outcome(pass, parts.join("; "))
}

fn gradients() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for arch in [CellKind::Gru, CellKind::Lstm] {
        for draw in 0..20u64 {
            let relu = draw % 2 == 0;
            let cfg = ModelConfig {
                units: vec![4],
                lookback: 6,
                dropout: 0.0,
                activation: if relu { Activation::Relu } else { Activation::Linear },
                seed: 1000 + draw,
                ..ModelConfig::preset(arch)
            };
            let mut m = RecurrentModel::new(cfg).unwrap();
            if relu {
                // keep the head pre-activation clear of the kink
                let last = m.params().len() - 1;
                m.params_mut()[last] = 3.0;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(draw);
            let batch: Vec<(Vec<f64>, f64)> =
                (0..4).map(|_| ((0..6).map(|_| rng.random::<f64>()).collect(), rng.random::<f64>())).collect();
            let refs: Vec<(&[f64], f64)> = batch.iter().map(|(w, t)| (w.as_slice(), *t)).collect();
            worst = worst.max(common::gradient_check(&m, &refs, 1e-5, 1e-6));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-4 && secs < 60.0, format!("worst relative error {worst:.2e} over 40 draws, {secs:.1} s"))
}

fn learning() -> Outcome {
    let start = Instant::now();
    let data = Dataset::from_values((0..2000).map(|i| (2.0 * std::f64::consts::PI * i as f64 / 50.0).sin()).collect());
    let mut pass = true;
    let mut parts = Vec::new();
    for arch in [CellKind::Gru, CellKind::Lstm] {
        let cfg = ModelConfig { epochs: 200, target_val_mae: Some(0.05), ..ModelConfig::preset(arch) };
        let (_, r) = train(&cfg, &data).unwrap();
        let mae = r.best_val_mae();
        pass &= mae < 0.05 && r.epochs_run <= 200;
        parts.push(format!("{arch:?} val MAE {mae:.4} after {} epochs", r.epochs_run));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 300.0;
    parts.push(format!("{secs:.1} s"));
    outcome(pass, parts.join(", "))
}

fn optimizers() -> Outcome {
    let lr = 0.001;
    let mut p = [0.0];
    step_adam(&mut p, &[1.0], &mut AdamState::new(1), lr);
    let adam = p[0];
    let mut p = [0.0];
    step_rmsprop(&mut p, &[1.0], &mut RmsPropState::new(1), lr);
    let rms = p[0];
    let want_rms = -lr / 0.1f64.sqrt();
    outcome(
        (adam + lr).abs() < 1e-9 && (rms - want_rms).abs() < 1e-9,
        format!("Adam step {adam:.12}, RMSProp step {rms:.12} (want {want_rms:.12})"),
    )
}

fn decisions() -> Outcome {
    let (bad, handovers) = oracle_scan(1000, 2024);
    let mut baseline_bad = 0;
    let mut triggers = 0;
    for (wobble, hom, guard) in BASELINE_TRACES {
        let (got, want) = baseline_instants(wobble, hom, guard);
        triggers += want.len();
        baseline_bad += usize::from(got != want || want.len() < 2);
    }
    outcome(
        bad.is_empty() && baseline_bad == 0,
        format!(
            "{} of 1000 futures differ ({handovers} handovers), {baseline_bad} of {} baseline traces differ ({triggers} triggers)",
            bad.len(),
            BASELINE_TRACES.len()
        ),
    )
}

fn two(a: &[f64], b: &[f64]) -> ricsim::stats::AnovaResult {
    anova(&[GroupSamples::new("a", a.to_vec()), GroupSamples::new("b", b.to_vec())]).unwrap()
}

fn anova_checks() -> Outcome {
    let same = two(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
    let shift = two(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let group = |rng: &mut ChaCha8Rng, loc: f64| -> Vec<f64> {
        let n = rng.random_range(2..=40);
        let scale = rng.random_range(0.1..20.0);
        (0..n).map(|_| loc + scale * rng.random_range(-1.0..1.0)).collect()
    };
    let mut worst_p: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    for _ in 0..50 {
        let a = group(&mut rng, 0.0);
        let loc = rng.random_range(-10.0..10.0);
        let b = group(&mut rng, loc);
        let r = two(&a, &b);
        let want = 1.0 - FisherSnedecor::new(r.df_between as f64, r.df_within as f64).unwrap().cdf(r.f_value);
        worst_p = worst_p.max((r.p_value - want).abs());
        let c = rng.random_range(-100.0..100.0);
        let k = rng.random_range(0.1..10.0) * if rng.random_bool(0.5) { -1.0 } else { 1.0 };
        let transforms: [fn(&f64, f64, f64) -> f64; 2] = [|v, c, _| v + c, |v, _, k| v * k];
        for f in transforms {
            let a2: Vec<f64> = a.iter().map(|v| f(v, c, k)).collect();
            let b2: Vec<f64> = b.iter().map(|v| f(v, c, k)).collect();
            worst_inv = worst_inv.max((two(&a2, &b2).f_value - r.f_value).abs() / r.f_value.max(1.0));
        }
    }
    let pass = (same.f_value, same.p_value) == (0.0, 1.0)
        && (shift.f_value - 1.5).abs() < 1e-12
        && worst_p < 1e-6
        && worst_inv < 1e-10;
    outcome(
        pass,
        format!(
            "identical F={} p={}, shifted F={:.6}, worst |p - reference| {worst_p:.1e} over 50 cases, worst invariance drift {worst_inv:.1e}",
            same.f_value, same.p_value, shift.f_value
        ),
    )
}

fn campaign_dir(work: &Work, name: &str, jobs: &str) -> (PathBuf, String) {
    let dir = work.path(name);
    let runs = RUNS.to_string();
    let model = work.path("lstm.json");
    let out = ricsim(&[
        "campaign",
        "--scenario",
        &scenario_file("default.json"),
        "--modes",
        "default,oracle,lstm",
        "--runs",
        &runs,
        "--model",
        s(&model),
        "--jobs",
        jobs,
        "--out",
        s(&dir),
    ]);
    (dir, String::from_utf8(out.stdout).unwrap())
}

fn train_lstm(work: &Work) -> String {
    let data = work.path("gen.csv");
    ricsim(&["gen-data", "--scenario", &scenario_file("gen_data.json"), "--out", s(&data)]);
    ricsim(&["train", "--data", s(&data), "--arch", "lstm", "--out", s(&work.path("lstm.json"))]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(work.path("lstm.report.json")).unwrap()).unwrap();
    format!("lstm trained {} epochs, best {}", report["epochs_run"], report["best_epoch"])
}

fn directional_check(base: &BTreeMap<u64, Aggregates>, pred: &BTreeMap<u64, Aggregates>) -> (bool, String) {
    let delay = |m: &BTreeMap<u64, Aggregates>| m.values().map(|a| a.mean_delay_ms).collect::<Vec<_>>();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (bd, pd) = (delay(base), delay(pred));
    let p = anova(&[GroupSamples::new("default", bd.clone()), GroupSamples::new("pred", pd.clone())]).unwrap().p_value;
    let freeze_ok = base.iter().filter(|(seed, b)| pred[*seed].freeze_count <= b.freeze_count).count();
    let cqi = |m: &BTreeMap<u64, Aggregates>| mean(&m.values().map(|a| a.mean_cqi).collect::<Vec<_>>());
    let a = mean(&pd) < mean(&bd) && p < 0.05;
    let b = freeze_ok as f64 >= 0.8 * base.len() as f64;
    let c = cqi(pred) >= cqi(base);
    (
        a && b && c,
        format!(
            "delay {:.2} vs {:.2} ms p={p:.3} [{}], freeze <= default in {freeze_ok}/{} [{}], CQI {:.3} vs {:.3} [{}]",
            mean(&pd),
            mean(&bd),
            if a { "ok" } else { "no" },
            base.len(),
            if b { "ok" } else { "no" },
            cqi(pred),
            cqi(base),
            if c { "ok" } else { "no" }
        ),
    )
}

fn end_to_end(work: &Work) -> Outcome {
    let start = Instant::now();
    let trained = train_lstm(work);
    let (dir, _) = campaign_dir(work, "campaign", "1");
    let runs = read_campaign(&dir).unwrap();
    let base = &runs[&HoMode::Default];
    let mut pass = base.len() as u64 == RUNS;
    let mut parts = vec![trained];
    for mode in [HoMode::Oracle, HoMode::Lstm] {
        let (ok, detail) = directional_check(base, &runs[&mode]);
        pass &= ok;
        parts.push(format!("{mode}: {detail}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 900.0;
    parts.push(format!("{secs:.0} s"));
    outcome(pass, parts.join("; "))
}

fn ota() -> Outcome {
    let c = OtaConfig::default();
    let rx = run_ota(&c, &LinkModel::default(), 15, 200_000);
    let done = rx.completion_ms();
    let within = done.is_some_and(|d| (d as f64 / 173_800.0 - 1.0).abs() <= 0.01);
    outcome(
        c.offered_bps() == 1_638_400.0 && c.packet_count() == 34_766 && within,
        format!("offered {} bps, {} packets, completion {:?} ms", c.offered_bps(), c.packet_count(), done),
    )
}

fn determinism(work: &Work) -> Outcome {
    let mut checks = Vec::new();
    let default = scenario_file("default.json");
    for name in ["run_a", "run_b"] {
        ricsim(&["run", "--scenario", &default, "--mode", "oracle", "--seed", "3", "--sdl-dump", "--out", s(&work.path(name))]);
    }
    checks.push(("run", tree(&work.path("run_a")) == tree(&work.path("run_b"))));

    let gen = scenario_file("gen_data.json");
    for name in ["gen_a.csv", "gen_b.csv"] {
        ricsim(&["gen-data", "--scenario", &gen, "--seed", "4", "--out", s(&work.path(name))]);
    }
    checks.push(("gen-data", fs::read(work.path("gen_a.csv")).unwrap() == fs::read(work.path("gen_b.csv")).unwrap()));

    let data = work.path("gen_a.csv");
    for name in ["m_a.json", "m_b.json"] {
        ricsim(&[
            "train", "--data", s(&data), "--arch", "gru", "--units", "4", "--epochs", "3", "--out", s(&work.path(name)),
        ]);
    }
    checks.push((
        "train",
        fs::read(work.path("m_a.json")).unwrap() == fs::read(work.path("m_b.json")).unwrap()
            && fs::read(work.path("m_a.report.json")).unwrap() == fs::read(work.path("m_b.report.json")).unwrap(),
    ));

    if !work.path("lstm.json").is_file() {
        train_lstm(work);
    }
    let (a, digest_a) = campaign_dir(work, "det_a", "1");
    let (b, digest_b) = campaign_dir(work, "det_b", "2");
    checks.push(("campaign hash", digest_a == digest_b && digest_a.starts_with("campaign digest ")));
    checks.push(("campaign files", tree(&a) == tree(&b)));

    let reports: Vec<Vec<u8>> = [("det_a", "r_a.csv"), ("det_b", "r_b.csv")]
        .iter()
        .map(|(dir, csv)| {
            let out = ricsim(&["report", "--campaign", s(&work.path(dir)), "--out", s(&work.path(csv))]);
            [out.stdout, fs::read(work.path(csv)).unwrap()].concat()
        })
        .collect();
    checks.push(("report", reports[0] == reports[1]));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        failed.is_empty(),
        format!(
            "{} repeated commands identical{}, {}",
            checks.len() - failed.len(),
            if failed.is_empty() { String::new() } else { format!(", differing: {}", failed.join(" ")) },
            digest_a.trim()
        ),
    )
}

fn main() {
    let work = Work { dir: tempfile::tempdir().unwrap() };
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "codec soundness", Box::new(codec)),
        (2, "protocol state machines", Box::new(protocol)),
        (3, "gradient correctness", Box::new(gradients)),
        (4, "learning sanity", Box::new(learning)),
        (5, "optimizer unit values", Box::new(optimizers)),
        (6, "decision-logic oracle equivalence", Box::new(decisions)),
        (7, "ANOVA correctness", Box::new(anova_checks)),
        (8, "end-to-end directional reproduction", Box::new(|| end_to_end(&work))),
        (9, "OTA arithmetic", Box::new(ota)),
        (10, "determinism", Box::new(|| determinism(&work))),
    ];
    let mut unexpected = Vec::new();
    for (n, name, check) in &criteria {
        let o = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {}", panic_text(&e))));
        let known = KNOWN_FAILING.contains(n);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {n:>2} {tag}: {name}: {}", o.detail);
        if !o.pass && !known {
            unexpected.push(*n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

fn panic_text(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}
