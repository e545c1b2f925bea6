//! One function per subcommand.
//!
//! Each returns a [`Report`]: the output table and the number of rows that
//! could not be computed (reported in-file, `status` column). Rows are
//! computed in a work pool but always emitted in a fixed order. Every task
//! draws from its own ChaCha stream of the master seed, so results do not
//! depend on scheduling.

use qht_core::discrete_qho::{dense_diagonalize, DiscreteQho};
use qht_core::fast_forward::{decompose, low_energy_error};
use qht_core::hermite_sampling::{
    spectrum_table, tv_between, tv_distance, AxisTransform, HermiteSampler, Histogram, OracleFunction, SampleOutcome,
    SpectrumTable,
};
use qht_core::learning_testers::{
    audit, gaussian_goldreich_levin, gaussian_goldreich_levin_sampled, test_hermite_polynomial, test_low_degree,
    test_product_sign, GglConfig, GglOutcome, TesterConfig, TesterVerdict,
};
use qht_core::qht_pipeline::{choose_dimensions, overlap_curve, Calibration, QhtConfig, QhtPipeline, QhtRun};
use qht_core::spectral_core::GridSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{CalibrationRecord, Command, ExperimentConfig, LearnerMode};
use crate::corpus::{learner_corpus, sampling_instance, tester_corpus, TesterInstance, TesterKind};
use crate::fft::rustfft_backend;
use crate::output::{fmt_f, Table};
use crate::Result;

/// Quadrature nodes per axis for reference spectra.
pub const REFERENCE_QUADRATURE: usize = 1024;
/// Grid dimension of the samplers behind the learner and the testers.
pub const SAMPLER_GRID: usize = 1024;

/// A finished command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// The output table.
    pub table: Table,
    /// Rows that could not be computed.
    pub infeasible: usize,
}

impl Report {
    /// Process exit code: 0 when every row was computed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.infeasible == 0 {
            0
        } else {
            2
        }
    }
}

/// Independent stream `task` of the master seed.
pub fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Runs the configured command.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    match config.command {
        Command::FfError => cmd_ff_error(config),
        Command::Overlap => cmd_overlap(config),
        Command::Qht => cmd_qht(config),
        Command::Sample => cmd_sample(config),
        Command::Ggl => cmd_ggl(config),
        Command::Test => cmd_test(config),
        Command::Calibrate => cmd_calibrate(config),
    }
}

fn status(r: &std::result::Result<(), qht_core::Error>) -> String {
    match r {
        Ok(()) => "ok".into(),
        Err(e) => format!("infeasible: {e}"),
    }
}

/// Fast-forwarding error atlas: `‖Π_N(U(t) − Ṽ(t))Π_N‖` for every
/// `(M, N, t)` of the sweep.
pub fn cmd_ff_error(config: &ExperimentConfig) -> Result<Report> {
    let mut table = Table::new(config, &["M", "N", "t", "reps", "projected_error", "status"]);
    let per_m: Vec<Vec<Vec<String>>> = config
        .m
        .par_iter()
        .map(|&m| {
            let setup = GridSpec::new(m)
                .and_then(|spec| DiscreteQho::with_fft(spec, rustfft_backend(m)))
                .and_then(|q| dense_diagonalize(&q).map(|e| (q, e)));
            let mut rows = Vec::new();
            for &n in &config.big_n {
                for &t in &config.t {
                    let reps = decompose(t).map(|f| f.reps.to_string()).unwrap_or_default();
                    let err = match &setup {
                        Ok((q, e)) => low_energy_error(q, e, n, t),
                        Err(e) => Err(e.clone()),
                    };
                    let (value, st) = match err {
                        Ok(v) => (fmt_f(v), status(&Ok(()))),
                        Err(e) => (String::new(), status(&Err(e))),
                    };
                    rows.push(vec![m.to_string(), n.to_string(), fmt_f(t), reps, value, st]);
                }
            }
            rows
        })
        .collect();
    let infeasible = finish(&mut table, per_m.into_iter().flatten());
    Ok(Report { table, infeasible })
}

fn finish(table: &mut Table, rows: impl IntoIterator<Item = Vec<String>>) -> usize {
    let mut bad = 0;
    for r in rows {
        if r.last().is_some_and(|s| s != "ok") {
            bad += 1;
        }
        table.push(r);
    }
    table.summarize("rows", table.rows.len());
    table.summarize("infeasible_rows", bad);
    bad
}

/// Overlap curve `⟨ψ̄_n|φ̄_n⟩` for `n ∈ [0, N]` at each `M`.
pub fn cmd_overlap(config: &ExperimentConfig) -> Result<Report> {
    let mut table = Table::new(config, &["M", "n", "raw", "normalized", "status"]);
    let n_max = config.big_n.first().copied().unwrap_or(100);
    let ns: Vec<usize> = (0..=n_max).collect();
    let mut rows = Vec::new();
    for &m in &config.m {
        match overlap_curve(m, &ns) {
            Ok(points) => {
                for p in points {
                    rows.push(vec![
                        m.to_string(),
                        p.n.to_string(),
                        fmt_f(p.raw),
                        fmt_f(p.normalized),
                        "ok".into(),
                    ]);
                }
            }
            Err(e) => rows.push(vec![
                m.to_string(),
                String::new(),
                String::new(),
                String::new(),
                status(&Err(e)),
            ]),
        }
    }
    let infeasible = finish(&mut table, rows);
    Ok(Report { table, infeasible })
}

/// Transform configuration for `n`: calibrated dimensions, with `M`
/// overridden when the sweep fixes it.
pub fn qht_config(config: &ExperimentConfig, n: usize, m: Option<usize>) -> qht_core::Result<QhtConfig> {
    let cal: Calibration = config.calibration.into();
    match m {
        None => choose_dimensions(n, config.eps, &cal),
        Some(m) => {
            // Derive everything but M from a calibration that cannot fail on
            // the size rule, then impose M.
            let loose = Calibration {
                c0: f64::MIN_POSITIVE,
                hard_cap: usize::MAX,
                ..cal
            };
            let mut c = choose_dimensions(n, config.eps, &loose)?;
            c.m = m;
            c.validate()?;
            Ok(c)
        }
    }
}

/// Runs the transform with the rustfft backend.
pub fn run_pipeline(config: QhtConfig) -> qht_core::Result<QhtRun> {
    let fft = rustfft_backend(config.m);
    QhtPipeline::with_fft(config, fft)?.run()
}

const QHT_COLUMNS: [&str; 11] = [
    "N",
    "M",
    "N_high",
    "n",
    "pr_overlap",
    "filtered_amplitude",
    "amplified_amplitude",
    "fidelity",
    "index_residual",
    "singular_value",
    "status",
];

fn qht_rows(n: usize, setup: qht_core::Result<(QhtConfig, QhtRun)>) -> Vec<Vec<String>> {
    match setup {
        Ok((c, run)) => {
            let mut sv = run.singular_values.clone();
            sv.sort_by(f64::total_cmp);
            run.blocks
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    vec![
                        n.to_string(),
                        c.m.to_string(),
                        c.n_high.to_string(),
                        b.n.to_string(),
                        fmt_f(b.pr_overlap),
                        fmt_f(b.filtered_amplitude),
                        fmt_f(b.amplified_amplitude),
                        fmt_f(b.fidelity),
                        fmt_f(b.index_residual),
                        sv.get(i).map(|&s| fmt_f(s)).unwrap_or_default(),
                        "ok".into(),
                    ]
                })
                .collect()
        }
        Err(e) => {
            let mut row = vec![String::new(); QHT_COLUMNS.len()];
            row[0] = n.to_string();
            row[QHT_COLUMNS.len() - 1] = status(&Err(e));
            vec![row]
        }
    }
}

/// End-to-end transform report: one row per block.
pub fn cmd_qht(config: &ExperimentConfig) -> Result<Report> {
    let mut table = Table::new(config, &QHT_COLUMNS);
    let m = config.m.first().copied();
    let mut rows = Vec::new();
    let (mut min_fid, mut max_res, mut sv_lo, mut sv_hi) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for &n in &config.big_n {
        let setup = qht_config(config, n, m).and_then(|c| run_pipeline(c.clone()).map(|r| (c, r)));
        if let Ok((_, run)) = &setup {
            min_fid = min_fid.min(run.min_fidelity());
            max_res = max_res.max(run.max_index_residual());
            for &s in &run.singular_values {
                sv_lo = sv_lo.min(s);
                sv_hi = sv_hi.max(s);
            }
        }
        rows.extend(qht_rows(n, setup));
    }
    let infeasible = finish(&mut table, rows);
    if min_fid.is_finite() {
        table.summarize("min_fidelity", fmt_f(min_fid));
        table.summarize("max_index_residual", fmt_f(max_res));
        table.summarize("singular_value_min", fmt_f(sv_lo));
        table.summarize("singular_value_max", fmt_f(sv_hi));
    }
    Ok(Report { table, infeasible })
}

/// Calibration sweep: the smallest power-of-two `M` at which the
/// transform meets all three end-to-end targets, and the `c₀` that
/// selects it.
pub fn cmd_calibrate(config: &ExperimentConfig) -> Result<Report> {
    let mut table = Table::new(
        config,
        &[
            "N",
            "M",
            "c0",
            "min_fidelity",
            "singular_min",
            "singular_max",
            "max_index_residual",
            "pass",
            "status",
        ],
    );
    let n = config.big_n.first().copied().unwrap_or(8);
    let eps = config.eps;
    let unit = (n as f64).powf(2.25) / eps.powf(3.25);
    let mut found = None;
    let mut m = 8usize;
    let mut rows = Vec::new();
    while m <= config.calibration.hard_cap && found.is_none() {
        let c0 = m as f64 / unit;
        let r = qht_config(config, n, Some(m)).and_then(run_pipeline);
        match r {
            Ok(run) => {
                let lo = run.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = run.singular_values.iter().copied().fold(0.0, f64::max);
                let pass = run.min_fidelity() >= 1.0 - eps
                    && lo >= 1.0 - eps
                    && hi <= 1.0 + eps
                    && run.max_index_residual() <= eps;
                rows.push(vec![
                    n.to_string(),
                    m.to_string(),
                    fmt_f(c0),
                    fmt_f(run.min_fidelity()),
                    fmt_f(lo),
                    fmt_f(hi),
                    fmt_f(run.max_index_residual()),
                    pass.to_string(),
                    "ok".into(),
                ]);
                if pass {
                    found = Some((m, c0));
                }
            }
            // Grids that cannot hold the configuration are skipped, not
            // failures of the sweep.
            Err(e) => rows.push(vec![
                n.to_string(),
                m.to_string(),
                fmt_f(c0),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "false".into(),
                format!("skipped: {e}"),
            ]),
        }
        m *= 2;
    }
    for r in rows {
        table.push(r);
    }
    let infeasible = match found {
        Some((m, c0)) => {
            // Two significant digits, rounded down so c₀ still selects M.
            let scale = 10f64.powi(c0.log10().floor() as i32 - 1);
            let rec = CalibrationRecord {
                c0: (c0 / scale).floor() * scale,
                ..config.calibration
            };
            table.summarize("M", m);
            table.summarize("calibration_toml", rec.to_toml());
            0
        }
        None => 1,
    };
    table.summarize("rows", table.rows.len());
    Ok(Report { table, infeasible })
}

/// Builds the sampler matching the function's declared range.
pub fn sampler_for(f: &OracleFunction, m: usize, d: usize) -> qht_core::Result<HermiteSampler> {
    let t = AxisTransform::reference(m, d)?;
    if f.is_boolean() {
        HermiteSampler::boolean(f, &t)
    } else {
        HermiteSampler::general(f, &t)
    }
}

fn outcome_label(o: &SampleOutcome) -> String {
    match o {
        SampleOutcome::Index(s) => s.v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(":"),
        SampleOutcome::AboveCutoff(p) => p
            .iter()
            .map(|k| k.map_or(">".into(), |k| k.to_string()))
            .collect::<Vec<_>>()
            .join(":"),
    }
}

/// Hermite sampling log: outcome histogram against the sampler's exact
/// law and the quadrature target.
pub fn cmd_sample(config: &ExperimentConfig) -> Result<Report> {
    let f = sampling_instance(&config.instance, config.n)?;
    let m = config.m.first().copied().unwrap_or(1024);
    let d = config.d;
    let mut table = Table::new(
        config,
        &["outcome", "count", "frequency", "probability", "target", "status"],
    );
    let setup = sampler_for(&f, m, d).and_then(|s| spectrum_table(&f, d, REFERENCE_QUADRATURE).map(|t| (s, t)));
    let (sampler, target) = match setup {
        Ok(x) => x,
        Err(e) => {
            let infeasible = finish(
                &mut table,
                [vec![
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    status(&Err(e)),
                ]],
            );
            return Ok(Report { table, infeasible });
        }
    };
    let mut rng = task_rng(config.seed, 0);
    let mut hist = Histogram::new(config.n, d);
    let mut attempts = 0u64;
    for _ in 0..config.samples {
        let s = sampler.sample_postselected(&mut rng)?;
        attempts += s.attempts;
        hist.record(&s.outcome);
    }
    let dist = sampler.distribution();
    let (q, q_above) = target.probabilities();
    let total = hist.total().max(1) as f64;
    let mut rows = Vec::new();
    for (i, &c) in hist.counts.iter().enumerate() {
        if c > 0 {
            let v = dist.multi_index(i);
            rows.push(vec![
                outcome_label(&SampleOutcome::Index(qht_core::hermite_sampling::HermiteSample { v })),
                c.to_string(),
                fmt_f(c as f64 / total),
                fmt_f(dist.probs[i]),
                fmt_f(q[i]),
                "ok".into(),
            ]);
        }
    }
    if hist.above > 0 {
        rows.push(vec![
            "above".into(),
            hist.above.to_string(),
            fmt_f(hist.above as f64 / total),
            fmt_f(dist.above),
            fmt_f(q_above),
            "ok".into(),
        ]);
    }
    let infeasible = finish(&mut table, rows);
    let (freq, above) = hist.frequencies();
    table.summarize("tv_to_target", fmt_f(tv_distance(&hist, &target)?));
    table.summarize(
        "tv_to_sampler_law",
        fmt_f(tv_between(&freq, above, &dist.probs, dist.above)),
    );
    table.summarize("law_max_deviation", fmt_f(dist.max_deviation(&target)?));
    table.summarize("success_probability", fmt_f(dist.success_probability));
    table.summarize("mean_attempts", fmt_f(attempts as f64 / config.samples.max(1) as f64));
    Ok(Report { table, infeasible })
}

/// Runs the learner on one instance in one mode.
pub fn learn(
    f: &OracleFunction,
    ggl: &GglConfig,
    truth: &SpectrumTable,
    sampled: bool,
    rng: &mut ChaCha8Rng,
) -> qht_core::Result<GglOutcome> {
    if sampled {
        let sampler = sampler_for(f, SAMPLER_GRID, ggl.cap())?;
        gaussian_goldreich_levin_sampled(&sampler, truth.norm_sq, ggl, rng)
    } else {
        gaussian_goldreich_levin(f, ggl, rng)
    }
}

/// `(complete, sound, within_bound, truncated)` of one learner run.
type RunFlags = (bool, bool, bool, bool);

/// Learner transcript over the planted corpus: one row per instance,
/// trial and mode.
pub fn cmd_ggl(config: &ExperimentConfig) -> Result<Report> {
    let mut table = Table::new(
        config,
        &[
            "instance",
            "tau",
            "trial",
            "mode",
            "queries",
            "list_size",
            "list",
            "complete",
            "sound",
            "within_bound",
            "truncated",
            "failed",
            "status",
        ],
    );
    let modes: &[bool] = match config.mode {
        LearnerMode::Classical => &[false],
        LearnerMode::Sampled => &[true],
        LearnerMode::Both => &[false, true],
    };
    let corpus = learner_corpus();
    let mut tasks = Vec::new();
    for i in 0..corpus.len() {
        for trial in 0..config.trials {
            for &sampled in modes {
                tasks.push((i, trial, sampled));
            }
        }
    }
    let truths: Vec<qht_core::Result<(GglConfig, SpectrumTable)>> = corpus
        .par_iter()
        .map(|inst| {
            let mut g = GglConfig::new(config.tau.unwrap_or(inst.tau), config.delta);
            g.gamma_sq = inst.gamma_sq;
            spectrum_table(&inst.function, g.cap(), 2 * REFERENCE_QUADRATURE).map(|t| (g, t))
        })
        .collect();
    let rows: Vec<(Vec<String>, Option<RunFlags>)> = tasks
        .par_iter()
        .map(|&(i, trial, sampled)| {
            let inst = &corpus[i];
            let mode = if sampled { "sampled" } else { "classical" };
            let task = ((i * config.trials + trial) * 2 + sampled as usize) as u64;
            let result = truths[i].clone().and_then(|(g, truth)| {
                let mut rng = task_rng(config.seed, task);
                learn(&inst.function, &g, &truth, sampled, &mut rng).map(|o| (g, truth, o))
            });
            match result {
                Ok((g, truth, o)) => {
                    let a = audit(&o, &truth, g.tau);
                    let list = o
                        .indices()
                        .iter()
                        .map(|v| v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(":"))
                        .collect::<Vec<_>>()
                        .join(" ");
                    (
                        vec![
                            inst.name.into(),
                            fmt_f(g.tau),
                            trial.to_string(),
                            mode.into(),
                            o.queries.to_string(),
                            o.list.len().to_string(),
                            list,
                            a.complete.to_string(),
                            a.sound.to_string(),
                            a.within_bound.to_string(),
                            o.truncated.to_string(),
                            o.failed.to_string(),
                            "ok".into(),
                        ],
                        Some((sampled, a.complete, a.sound, a.within_bound)),
                    )
                }
                Err(e) => {
                    let mut row = vec![String::new(); 13];
                    row[0] = inst.name.into();
                    row[2] = trial.to_string();
                    row[3] = mode.into();
                    row[12] = status(&Err(e));
                    (row, None)
                }
            }
        })
        .collect();
    for &sampled in modes {
        let runs: Vec<_> = rows.iter().filter_map(|(_, a)| *a).filter(|a| a.0 == sampled).collect();
        let key = if sampled { "sampled" } else { "classical" };
        let n = runs.len().max(1) as f64;
        table.summarize(
            &format!("{key}_success_rate"),
            fmt_f(runs.iter().filter(|a| a.1).count() as f64 / n),
        );
        table.summarize(
            &format!("{key}_soundness_violations"),
            runs.iter().filter(|a| !a.2).count(),
        );
        table.summarize(&format!("{key}_bound_violations"), runs.iter().filter(|a| !a.3).count());
    }
    let infeasible = finish(&mut table, rows.into_iter().map(|(r, _)| r));
    Ok(Report { table, infeasible })
}

/// Runs the instance's tester once.
pub fn run_tester(
    inst: &TesterInstance,
    sampler: &mut HermiteSampler,
    eps1: f64,
    eps2: f64,
    delta: f64,
    rng: &mut ChaCha8Rng,
) -> qht_core::Result<TesterVerdict> {
    let cfg = TesterConfig::default();
    match inst.kind {
        TesterKind::ProductSign(k) => test_product_sign(sampler, k, eps1, eps2, delta, &cfg, rng),
        TesterKind::LowDegree(d) => test_low_degree(sampler, d, eps1, eps2, delta, &cfg, rng),
        TesterKind::HermitePolynomial(k) => test_hermite_polynomial(sampler, k, eps1, eps2, delta, &cfg, rng),
    }
}

/// Tester verdict table over the promise corpus.
pub fn cmd_test(config: &ExperimentConfig) -> Result<Report> {
    let mut table = Table::new(
        config,
        &[
            "instance", "tester", "trial", "samples", "queries", "verdict", "expected", "correct", "status",
        ],
    );
    let corpus = tester_corpus()?;
    let per_instance: Vec<Vec<(Vec<String>, Option<bool>)>> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let sampler = sampler_for(&inst.function, inst.m, inst.cutoff);
            (0..config.trials)
                .map(|trial| {
                    let mut rng = task_rng(config.seed, (i * config.trials + trial) as u64);
                    let verdict = sampler
                        .clone()
                        .and_then(|mut s| run_tester(inst, &mut s, config.eps, config.eps2, config.delta, &mut rng));
                    let expected = if inst.accept { "accept" } else { "reject" };
                    match verdict {
                        Ok(v) => {
                            let got = if v.accept { "accept" } else { "reject" };
                            let correct = v.accept == inst.accept;
                            (
                                vec![
                                    inst.name.into(),
                                    inst.kind.name().into(),
                                    trial.to_string(),
                                    v.samples.to_string(),
                                    v.queries.to_string(),
                                    got.into(),
                                    expected.into(),
                                    correct.to_string(),
                                    "ok".into(),
                                ],
                                Some(correct),
                            )
                        }
                        Err(e) => (
                            vec![
                                inst.name.into(),
                                inst.kind.name().into(),
                                trial.to_string(),
                                String::new(),
                                String::new(),
                                String::new(),
                                expected.into(),
                                String::new(),
                                status(&Err(e)),
                            ],
                            None,
                        ),
                    }
                })
                .collect()
        })
        .collect();
    for kind in ["product-sign", "low-degree", "hermite-polynomial"] {
        let v: Vec<bool> = corpus
            .iter()
            .zip(&per_instance)
            .filter(|(inst, _)| inst.kind.name() == kind)
            .flat_map(|(_, rows)| rows.iter().filter_map(|r| r.1))
            .collect();
        let rate = v.iter().filter(|&&c| c).count() as f64 / v.len().max(1) as f64;
        table.summarize(&format!("{kind}_correct_rate"), fmt_f(rate));
    }
    let infeasible = finish(&mut table, per_instance.into_iter().flatten().map(|(r, _)| r));
    Ok(Report { table, infeasible })
}
