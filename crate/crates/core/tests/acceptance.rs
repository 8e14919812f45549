//! The acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the report.

mod common;

use std::time::{Duration, Instant};

use indexmap::IndexMap;
use rand::Rng;

use tdcurriculum::analysis::{approx_randomization, roc_auc, spearman, time_ratio, time_ratio_summary};
use tdcurriculum::corpus::{Corpus, Example, LabelMap, Split};
use tdcurriculum::curricula::{
    build_annealing_plan, build_competence_plan, competence, AnnealingSampler, CompetenceForm, CompetenceSampler,
};
use tdcurriculum::difficulty::DifficultyScores;
use tdcurriculum::dynamics::{confidence, correctness, read_td_stats, variability};
use tdcurriculum::pipeline::{
    cmd_student, cmd_sweep, cmd_synth, cmd_teacher, layout, student_dir, DataConfig, SchedulerKind, ScoreInputs,
    TeacherMetric,
};
use tdcurriculum::trainer::{ModelParams, RunLog, Sampler, ACCURACY, VALIDATION};

use common::{
    ar_exhaustive, dynamics_oracle, gradient_relative_error, jsonl_hashes, pilot_config, random_example,
    small_config, stage_pool_oracle,
};

/// Pilot teacher statistics, frozen from the pinned pilot run.
const GOLDEN_AUC: f64 = 0.9672333333333333;
const GOLDEN_RHO_CONF_CORR: f64 = 0.7536522661900301;
const GOLDEN_RHO_VAR_CORR: f64 = -0.17027824323641902;
const GOLDEN_TOLERANCE: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            out.pass = false;
        }
        out.detail = format!("{} [{:.2?} of {:?}]", out.detail, took, limit);
    } else {
        out.detail = format!("{} [{:.2?}]", out.detail, took);
    }
    out
}

fn scores_of(c: &Corpus, name: &str, higher_easier: bool, vals: &[f64]) -> DifficultyScores {
    let m: IndexMap<String, f64> = c.ids().zip(vals).map(|(id, &v)| (id.to_string(), v)).collect();
    DifficultyScores::new(name, m, higher_easier).unwrap()
}

fn id_corpus(n: usize) -> Corpus {
    let ex = (0..n).map(|i| Example::from_text(format!("e{i:05}"), "x", None, 0, 8)).collect();
    Corpus::new(Split::Train, ex, LabelMap::from_labels(["a"]), 8, false).unwrap()
}

fn dynamics_oracle_equivalence() -> Outcome {
    let mut r = common::rng(1);
    let mut worst = 0.0f64;
    let mut counts_ok = true;
    for _ in 0..200 {
        let e = r.random_range(1..=12);
        let probs: Vec<f64> = (0..e).map(|_| r.random()).collect();
        let corr: Vec<bool> = (0..e).map(|_| r.random_bool(0.5)).collect();
        let (m, k, v) = dynamics_oracle(&probs, &corr);
        worst = worst
            .max((confidence(&probs).unwrap() - m).abs())
            .max((variability(&probs).unwrap() - v).abs());
        counts_ok &= correctness(&corr).unwrap() == k;
    }
    check(worst <= 1e-12 && counts_ok, format!("200 traces, max abs error {worst:.1e}"))
}

fn gradient_correctness() -> Outcome {
    let mut r = common::rng(2);
    let mut worst: [f64; 2] = [0.0, 0.0];
    for instance in 0..60 {
        let hidden_mode = instance % 2;
        let hidden = if hidden_mode == 1 { r.random_range(2..8) } else { 0 };
        let (dim, classes) = (r.random_range(3..12), r.random_range(2..5));
        let params = ModelParams::init(dim, hidden, classes, &mut r);
        let batch: Vec<Example> = (0..r.random_range(1..8)).map(|i| random_example(&mut r, i, dim, classes)).collect();
        let refs: Vec<&Example> = batch.iter().collect();
        let l2 = if instance % 3 == 0 { 0.0 } else { r.random_range(0.0..0.1) };
        worst[hidden_mode] = worst[hidden_mode].max(gradient_relative_error(&params, &refs, l2, 1e-5));
    }
    check(
        worst[0] < 1e-4 && worst[1] < 1e-4,
        format!("60 instances, max relative error linear {:.1e}, hidden {:.1e}", worst[0], worst[1]),
    )
}

fn competence_function() -> Outcome {
    let (c0, t_max) = (0.01, 999);
    let endpoints = competence(0, c0, t_max) == c0 && competence(t_max, c0, t_max) == 1.0;
    let grid: Vec<f64> = (0..=t_max).map(|t| competence(t, c0, t_max)).collect();
    let monotone = grid.windows(2).all(|w| w[1] > w[0]);

    let n = 1000;
    let c = id_corpus(n);
    let mut r = common::rng(3);
    let conf: Vec<f64> = (0..n).map(|_| r.random()).collect();
    let duration = 300;
    let plan = build_competence_plan(
        &c,
        &scores_of(&c, "confidence", true, &conf),
        None,
        false,
        c0,
        duration,
        CompetenceForm::Sqrt,
    )
    .unwrap();
    let mut sampler = CompetenceSampler::new(plan.clone(), 8, n / 8, 4);
    let mut prev = 0;
    let mut sizes_ok = true;
    let mut admitted_ok = true;
    for step in 0..=duration {
        let k = plan.available_len(step);
        sizes_ok &= k >= prev && k == ((competence(step, c0, duration) * n as f64) - 1e-9).ceil() as usize;
        prev = k;
        let allowed = plan.available(step);
        admitted_ok &= sampler.next_batch(step).unwrap().iter().all(|i| allowed.contains(i));
    }
    check(
        endpoints && monotone && sizes_ok && admitted_ok,
        format!(
            "endpoints {endpoints}, strict monotone on 1000 points {monotone}, available sizes {sizes_ok}, \
             draws admitted {admitted_ok}"
        ),
    )
}

fn annealing_combinatorics() -> Outcome {
    let mut r = common::rng(4);
    let mut failures = Vec::new();
    for case in 0..100 {
        let e = r.random_range(1..=10);
        let bs = r.random_range(1..=8);
        let present: Vec<usize> = (0..=e).filter(|_| r.random_bool(0.8)).collect();
        let present = if present.is_empty() { vec![e] } else { present };
        let sizes: Vec<usize> = present.iter().map(|_| r.random_range(bs..bs + 30)).collect();
        let n: usize = sizes.iter().sum();
        let c = id_corpus(n);
        let mut vals: Vec<f64> = present
            .iter()
            .zip(&sizes)
            .flat_map(|(&s, &k)| std::iter::repeat_n(s as f64, k))
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut r);
        vals = order.iter().map(|&i| vals[i]).collect();
        let plan = build_annealing_plan(&c, &scores_of(&c, "correctness", true, &vals), e, None).unwrap();

        let easiest: Vec<usize> = sizes.iter().rev().copied().collect();
        let buckets_ok = plan.num_buckets() == present.len()
            && plan.bucket_scores.windows(2).all(|w| w[0] > w[1])
            && plan.buckets.iter().map(Vec::len).collect::<Vec<_>>() == easiest
            && plan
                .buckets
                .iter()
                .zip(&plan.bucket_scores)
                .all(|(b, &s)| b.iter().all(|&i| vals[i] == s));
        let pools_ok = plan.stage_pool_sizes() == stage_pool_oracle(&easiest, e + 1);

        let mut sampler = AnnealingSampler::new(&plan, bs, case).unwrap();
        let stages = sampler.stages().to_vec();
        let mut served_ok = true;
        let mut step = 0;
        for (k, pool) in stages.iter().enumerate() {
            let allowed: Vec<usize> = plan.buckets[..=k].iter().flatten().copied().collect();
            served_ok &= plan.buckets[k].iter().all(|i| pool.contains(i)) && pool.iter().all(|i| allowed.contains(i));
            for _ in 0..pool.len().div_ceil(bs) {
                served_ok &= sampler.next_batch(step).unwrap().iter().all(|i| pool.contains(i));
                step += 1;
            }
        }
        if !(buckets_ok && pools_ok && served_ok) {
            failures.push(case);
        }
    }
    check(failures.is_empty(), format!("100 configurations, failing cases {failures:?}"))
}

struct PilotTeacher {
    auc: f64,
    conf_noisy: f64,
    conf_clean: f64,
    rho_conf_corr: f64,
    rho_var_corr: f64,
}

fn pilot_teacher() -> PilotTeacher {
    let tmp = tempfile::tempdir().unwrap();
    cmd_teacher(&pilot_config(), TeacherMetric::Dynamics, tmp.path()).unwrap();
    let stats = read_td_stats(&tmp.path().join(layout::TD_STATS)).unwrap();
    let noisy: Vec<bool> = stats.keys().map(|id| tdcurriculum::corpus::is_noisy_id(id)).collect();
    let conf: Vec<f64> = stats.values().map(|s| s.confidence).collect();
    let corr: Vec<f64> = stats.values().map(|s| s.correctness as f64).collect();
    let var: Vec<f64> = stats.values().map(|s| s.variability).collect();
    let mean_where = |flag: bool| {
        let v: Vec<f64> = conf.iter().zip(&noisy).filter(|(_, &n)| n == flag).map(|(c, _)| *c).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let inverted: Vec<f64> = conf.iter().map(|c| 1.0 - c).collect();
    PilotTeacher {
        auc: roc_auc(&inverted, &noisy).unwrap(),
        conf_noisy: mean_where(true),
        conf_clean: mean_where(false),
        rho_conf_corr: spearman(&conf, &corr).unwrap(),
        rho_var_corr: spearman(&var, &corr).unwrap(),
    }
}

fn cartography_separation(p: &PilotTeacher) -> Outcome {
    check(
        p.auc >= 0.80 && p.conf_noisy < p.conf_clean,
        format!(
            "AUC {:.4} (>= 0.80, golden {GOLDEN_AUC:.4}), mean confidence flipped {:.4} < clean {:.4}",
            p.auc, p.conf_noisy, p.conf_clean
        ),
    )
}

fn correlation_signs(p: &PilotTeacher) -> Outcome {
    let near = |x: f64, g: f64| (x - g).abs() <= GOLDEN_TOLERANCE;
    check(
        p.rho_conf_corr >= 0.7
            && p.rho_var_corr <= 0.0
            && near(p.rho_conf_corr, GOLDEN_RHO_CONF_CORR)
            && near(p.rho_var_corr, GOLDEN_RHO_VAR_CORR),
        format!(
            "rho(conf, corr) {:.4} (golden {GOLDEN_RHO_CONF_CORR:.4}), rho(var, corr) {:.4} (golden {GOLDEN_RHO_VAR_CORR:.4})",
            p.rho_conf_corr, p.rho_var_corr
        ),
    )
}

fn curriculum_non_inferiority() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = pilot_config();
    cfg.workers = 3;
    let list = [SchedulerKind::Random, SchedulerKind::CorrAnneal, SchedulerKind::ConfVarComp];
    let report = cmd_sweep(&cfg, &list, tmp.path()).unwrap();
    let val = |k: usize| report.rows[k].best_validation.mean;
    let test_id = |k: usize| report.rows[k].accuracy["test_id"].mean;
    let gaps: Vec<f64> = (1..3).map(|k| 100.0 * (val(k) - val(0))).collect();
    check(
        gaps.iter().all(|g| *g >= -2.0),
        format!(
            "validation accuracy random {:.2}, corr_anneal {:.2} ({:+.2}), conf+var_comp {:.2} ({:+.2}); \
             test_id {:.2} / {:.2} / {:.2}",
            100.0 * val(0),
            100.0 * val(1),
            gaps[0],
            100.0 * val(2),
            gaps[1],
            100.0 * test_id(0),
            100.0 * test_id(1),
            100.0 * test_id(2)
        ),
    )
}

fn statistics_units() -> Outcome {
    let exact = |a: &[f64], b: &[f64], want: f64| (spearman(a, b).unwrap() - want).abs() <= 1e-12;
    let xs = [3.0, 1.0, 4.0, 1.5, 9.0];
    let rev: Vec<f64> = xs.iter().map(|x| -x).collect();
    let spearman_ok = exact(&xs, &xs, 1.0) && exact(&xs, &rev, -1.0) && exact(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0], 0.5);
    let same = [true, false, true, true, false, false, true];
    let identical = approx_randomization(&same, &same, 1000, 5).unwrap() == 1.0;

    let mut r = common::rng(8);
    let rounds = 20_000;
    let mut enumeration_ok = true;
    for n in 1..=12 {
        let a: Vec<bool> = (0..n).map(|_| r.random_bool(0.65)).collect();
        let b: Vec<bool> = (0..n).map(|_| r.random_bool(0.35)).collect();
        let exact_p = ar_exhaustive(&a, &b);
        let p = approx_randomization(&a, &b, rounds, n as u64).unwrap();
        let se = (exact_p * (1.0 - exact_p) / rounds as f64).sqrt();
        enumeration_ok &= (p - exact_p).abs() <= 3.0 * se + 1.0 / (rounds + 1) as f64;
    }
    check(
        spearman_ok && identical && enumeration_ok,
        format!("spearman examples {spearman_ok}, identical p=1 {identical}, enumeration n<=12 {enumeration_ok}"),
    )
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let DataConfig::Synthetic(spec) = &cfg.data else { unreachable!() };
    for run in ["a", "b"] {
        let root = tmp.path().join(run);
        cmd_synth(spec, &root.join("synth")).unwrap();
        let teacher = root.join("teacher");
        for m in [
            TeacherMetric::Dynamics,
            TeacherMetric::CrossReview,
            TeacherMetric::Length,
            TeacherMetric::Rarity,
            TeacherMetric::Perplexity,
        ] {
            cmd_teacher(&cfg, m, &teacher).unwrap();
        }
        for (kind, metric) in [
            (SchedulerKind::CorrVarAnneal, "correctness"),
            (SchedulerKind::ConfVarComp, "confidence"),
            (SchedulerKind::CrAnneal, "cross_review"),
        ] {
            let mut c = cfg.clone();
            c.scheduler = kind;
            let scores = teacher.join(layout::SCORES_DIR).join(format!("{metric}.jsonl"));
            cmd_student(&c, &ScoreInputs::scores(scores), &root.join("students").join(kind.name())).unwrap();
        }
        cmd_sweep(&cfg, &[SchedulerKind::Random, SchedulerKind::Ppl], &root.join("sweep")).unwrap();
    }
    let a = jsonl_hashes(&tmp.path().join("a"));
    let b = jsonl_hashes(&tmp.path().join("b"));
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    check(
        a.len() == b.len() && differing.is_empty() && a.len() > 20,
        format!("{} JSONL artifacts hashed twice, {} differ", a.len(), differing.len()),
    )
}

fn budget_parity() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let report = cmd_sweep(&cfg, &SchedulerKind::ALL, tmp.path()).unwrap();
    let expected = cfg.train.total_steps(300);
    let mut logged = Vec::new();
    for row in &report.rows {
        for &s in &cfg.seeds {
            let log = RunLog::read(&tdcurriculum::pipeline::seed_dir(&student_dir(tmp.path(), row.scheduler), s).join(layout::RUN_LOG))
                .unwrap();
            logged.push(log.last_step());
        }
    }
    let ok = report.rows.len() == 9
        && report.rows.iter().all(|r| r.total_steps == expected)
        && logged.iter().all(|&s| s == expected);
    check(ok, format!("9 schedulers x {} seeds, all at {expected} steps: {ok}", cfg.seeds.len()))
}

fn log_with_best(best: usize) -> RunLog {
    let mut log = RunLog::new();
    for step in (40..=1200).step_by(40) {
        let acc = if step == best { 0.9 } else { 0.5 };
        log.push(step, VALIDATION, ACCURACY, acc);
    }
    log
}

fn time_ratios() -> Outcome {
    let single = time_ratio(&log_with_best(560), &log_with_best(1000)).unwrap();
    let logs = [log_with_best(560), log_with_best(800), log_with_best(1000)];
    let refs = [log_with_best(1000), log_with_best(1000), log_with_best(1000)];
    let summary = time_ratio_summary(&logs, &refs).unwrap();
    let mean = (0.56 + 0.8 + 1.0) / 3.0;
    let ok = single == 0.56 && (summary.mean - mean).abs() < 1e-15 && summary.min == 0.56;
    check(
        ok,
        format!("560/1000 = {single}, 3-seed mean {:.4}, min {}", summary.mean, summary.min),
    )
}

#[test]
fn acceptance_criteria() {
    let pilot_start = Instant::now();
    let pilot = pilot_teacher();
    let pilot_time = pilot_start.elapsed();

    let results = [
        ("1 dynamics oracle equivalence", timed(Some(Duration::from_secs(1)), dynamics_oracle_equivalence)),
        ("2 gradient correctness", timed(Some(Duration::from_secs(5)), gradient_correctness)),
        ("3 competence function", timed(None, competence_function)),
        ("4 annealing combinatorics", timed(None, annealing_combinatorics)),
        ("5 cartography separation", {
            let mut o = cartography_separation(&pilot);
            o.pass &= pilot_time <= Duration::from_secs(60);
            o.detail = format!("{} [teacher {:.2?} of 60s]", o.detail, pilot_time);
            o
        }),
        ("6 correlation signs", correlation_signs(&pilot)),
        ("7 curriculum non-inferiority", timed(Some(Duration::from_secs(300)), curriculum_non_inferiority)),
        ("8 statistics unit checks", timed(None, statistics_units)),
        ("9 determinism", timed(None, determinism)),
        ("10 budget parity", timed(None, budget_parity)),
        ("11 time-ratio computation", timed(None, time_ratios)),
    ];
    let mut failed = Vec::new();
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
