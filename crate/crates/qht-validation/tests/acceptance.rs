//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every criterion is evaluated with its stated tolerance and runtime
//! budget; a failing criterion is reported, not skipped, and the process
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qht::commands::{learn, run_pipeline, run_tester, sampler_for};
use qht::corpus::{learner_corpus, sampling_corpus, sampling_instance, tester_corpus, TesterKind};
use qht::fft::rustfft_backend;
use qht_core::discrete_qho::{
    commutator_tail_norm_mp, dense_diagonalize, hermite_basis, tail_dimension, DiscreteQho, MpOptions, TailFamily,
};
use qht_core::fast_forward::{apply_factored, decompose, low_energy_error, projected_norm};
use qht_core::hermite_sampling::{
    coefficient_oracle, planted, spectrum_table, tv_distance, AxisTransform, HermiteSampler, Histogram,
};
use qht_core::learning_testers::{audit, sign_spectrum_decay, GglConfig, TesterConfig};
use qht_core::qht_pipeline::{choose_dimensions, overlap_curve, Calibration};
use qht_core::spectral_core::GridSpec;
use qht_core::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn within_band(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn c1_overlap_figure() -> Outcome {
    let ns: Vec<usize> = (1..=100).collect();
    let pts = overlap_curve(100_000, &ns).map_err(|e| e.to_string())?;
    let bad: Vec<String> = pts
        .iter()
        .filter(|p| {
            let v = p.raw.abs();
            if p.n >= 5 {
                !within_band(v, 0.60, 0.72)
            } else {
                !within_band(v, 0.55, 0.75)
            }
        })
        .map(|p| format!("n={}:{:.3}", p.n, p.raw.abs()))
        .collect();
    let tail = pts.last().map(|p| p.raw.abs()).unwrap_or(f64::NAN);
    Ok((
        bad.is_empty(),
        format!(
            "|<psi_n|phi_n>| at n=100 is {tail:.4}; out of band: [{}]",
            bad.join(" ")
        ),
    ))
}

fn c2_discretization() -> Outcome {
    let spec = GridSpec::new(256).map_err(|e| e.to_string())?;
    let gram = hermite_basis(&spec, 32).map_err(|e| e.to_string())?.gram_defect(32);
    let q = DiscreteQho::with_fft(spec, rustfft_backend(256)).map_err(|e| e.to_string())?;
    let eig = dense_diagonalize(&q).map_err(|e| e.to_string())?;
    let energy = (0..=32)
        .map(|n| (eig.energies[n] - (n as f64 + 0.5)).abs())
        .fold(0.0, f64::max);
    Ok((
        gram <= 1e-10 && energy <= 1e-8,
        format!("Gram defect {gram:.2e} (≤ 1e-10), max |E_n − (n+½)| {energy:.2e} (≤ 1e-8)"),
    ))
}

fn c3_fast_forwarding() -> Outcome {
    let setup = |m: usize| -> Result<_, String> {
        let q = DiscreteQho::with_fft(GridSpec::new(m).map_err(|e| e.to_string())?, rustfft_backend(m))
            .map_err(|e| e.to_string())?;
        let e = dense_diagonalize(&q).map_err(|e| e.to_string())?;
        Ok((q, e))
    };
    let (q512, e512) = setup(512)?;
    let headline = low_energy_error(&q512, &e512, 16, 1.0).map_err(|e| e.to_string())?;
    // Errors sit at the roundoff floor (~1e-13); differences below 1e-12
    // are not resolved and count as ties.
    const FLOOR: f64 = 1e-12;
    let ms = [128usize, 256, 512, 1024];
    let systems: Vec<_> = ms.iter().map(|&m| setup(m)).collect::<Result<_, _>>()?;
    let mut monotone = true;
    let mut worst = 0.0f64;
    for t in [0.25, 1.0, 3.0] {
        let errs: Vec<f64> = systems
            .iter()
            .map(|(q, e)| low_energy_error(q, e, 8, t))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        worst = errs.iter().copied().fold(worst, f64::max);
        monotone &= errs.windows(2).all(|w| w[1] <= w[0] + FLOOR);
    }
    let (q, e) = &systems[2];
    let fe = decompose(2.0 * PI).map_err(|e| e.to_string())?;
    let flip = projected_norm(e, 8, |_, s| {
        let mut d = apply_factored(q, &fe, s)?;
        d.axpy(C64::new(1.0, 0.0), s);
        Ok(d)
    })
    .map_err(|e| e.to_string())?;
    Ok((
        headline <= 1e-6 && monotone && flip <= 1e-6,
        format!(
            "error(512,16,1) {headline:.2e} (≤ 1e-6); non-increasing in M: {monotone} (max {worst:.2e}); \
             ‖Π₈(V(2π)+I)Π₈‖ at M=512 {flip:.2e} (≤ 1e-6)"
        ),
    ))
}

fn c4_commutator_tails() -> Outcome {
    let ms = [64usize, 128, 256];
    let mut ok = true;
    let mut parts = Vec::new();
    for fam in TailFamily::ALL {
        let mut tails = Vec::new();
        for &m in &ms {
            let (n, clamped) = tail_dimension(m);
            let spec = GridSpec::new(m).map_err(|e| e.to_string())?;
            let r = commutator_tail_norm_mp(&spec, fam, n, 30, MpOptions::default()).map_err(|e| e.to_string())?;
            ok &= r.certified;
            tails.push((r.tail_norm, clamped));
        }
        let ratios: Vec<f64> = tails.windows(2).map(|w| w[0].0 / w[1].0).collect();
        ok &= ratios.iter().all(|&r| r >= 10.0);
        parts.push(format!(
            "{}: {:.2e}/{:.2e}/{:.2e} (ratios {:.1e}, {:.1e}{})",
            fam.label(),
            tails[0].0,
            tails[1].0,
            tails[2].0,
            ratios[0],
            ratios[1],
            if tails.iter().any(|t| t.1) {
                ", N clamped to 1"
            } else {
                ""
            }
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c5_end_to_end() -> Outcome {
    let eps = 0.01;
    let config = choose_dimensions(8, eps, &Calibration::DESK).map_err(|e| e.to_string())?;
    let (m, n_high) = (config.m, config.n_high);
    let run = run_pipeline(config).map_err(|e| e.to_string())?;
    let fid = run.min_fidelity();
    let lo = run.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = run.singular_values.iter().copied().fold(0.0, f64::max);
    let res = run.max_index_residual();
    Ok((
        fid >= 1.0 - eps && lo >= 1.0 - eps && hi <= 1.0 + eps && res <= eps,
        format!(
            "M={m}, N_high={n_high}: min fidelity {fid:.5}, singular values [{lo:.5}, {hi:.5}], \
             index residual {res:.1e}"
        ),
    ))
}

fn c6_sampling() -> Outcome {
    const EPS: f64 = 0.05;
    const UPSILON: f64 = 0.0;
    const D: usize = 9;
    let mut ok = true;
    let (mut worst_dev, mut worst_tv) = (0.0f64, 0.0f64);
    for (k, (name, n)) in sampling_corpus().into_iter().enumerate() {
        let f = sampling_instance(name, n).map_err(|e| e.to_string())?;
        let m = if n == 1 { 4096 } else { 1024 };
        let sampler = sampler_for(&f, m, D).map_err(|e| e.to_string())?;
        let table = spectrum_table(&f, D, 1024).map_err(|e| e.to_string())?;
        // The table is the batch form of the single-coefficient oracle;
        // confirm on the ground coefficient.
        let single = coefficient_oracle(&f, &vec![0; n], 1024).map_err(|e| e.to_string())?;
        ok &= (single.value - table.get(&vec![0; n])).abs() <= 1e-9;
        let dev = sampler
            .distribution()
            .max_deviation(&table)
            .map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(600 + k as u64);
        let mut hist = Histogram::new(n, D);
        for _ in 0..10_000 {
            hist.record(
                &sampler
                    .sample_postselected(&mut rng)
                    .map_err(|e| e.to_string())?
                    .outcome,
            );
        }
        let tv = tv_distance(&hist, &table).map_err(|e| e.to_string())?;
        ok &= dev <= EPS && tv <= EPS + UPSILON + 0.03;
        worst_dev = worst_dev.max(dev);
        worst_tv = worst_tv.max(tv);
    }
    Ok((
        ok,
        format!("9 instances: max |p_v − q_v| {worst_dev:.2e} (≤ 0.05), max empirical TV {worst_tv:.4} (≤ 0.08)"),
    ))
}

fn c7_postselection() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let cases = [
        (1.0, planted::sign_threshold(0.0).function),
        (
            3.0,
            planted::centered_indicator(planted::indicator_half_width(3.0), 3.0).function,
        ),
    ];
    for (kappa, f) in cases {
        let t = AxisTransform::reference(4096, 4).map_err(|e| e.to_string())?;
        let s = HermiteSampler::general(&f, &t).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(700 + kappa as u64);
        let mut total = 0u64;
        for _ in 0..1000 {
            total += s.sample_postselected(&mut rng).map_err(|e| e.to_string())?.attempts;
        }
        let mean = total as f64 / 1000.0;
        let bound = 2.0 * kappa + 0.5;
        ok &= mean <= bound;
        parts.push(format!(
            "κ={kappa}: mean attempts {mean:.3} (≤ {bound}), success probability {:.4}",
            s.distribution().success_probability
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c8_learner() -> Outcome {
    let corpus = learner_corpus();
    let mut parts = Vec::new();
    let mut ok = true;
    for sampled in [false, true] {
        let (mut runs, mut complete, mut unsound, mut oversize) = (0usize, 0usize, 0usize, 0usize);
        for (i, inst) in corpus.iter().enumerate() {
            let mut g = GglConfig::new(inst.tau, 0.1);
            g.gamma_sq = inst.gamma_sq;
            let truth = spectrum_table(&inst.function, g.cap(), 2048).map_err(|e| e.to_string())?;
            for seed in 0..20u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(8000 + 100 * i as u64 + seed);
                let out = learn(&inst.function, &g, &truth, sampled, &mut rng).map_err(|e| e.to_string())?;
                let a = audit(&out, &truth, g.tau);
                runs += 1;
                complete += a.complete as usize;
                unsound += !a.sound as usize;
                oversize += !a.within_bound as usize;
            }
        }
        let rate = complete as f64 / runs as f64;
        ok &= rate >= 0.9 && unsound == 0 && oversize == 0;
        parts.push(format!(
            "{}: complete {rate:.2} (≥ 0.9), unsound {unsound}, |L| > 4/τ² {oversize}",
            if sampled { "sampled" } else { "classical" }
        ));
    }
    Ok((ok, format!("{} runs per mode; {}", 5 * 20, parts.join("; "))))
}

fn c9_testers() -> Outcome {
    let (eps1, eps2, delta) = (0.1, 0.3, 0.1);
    let m_expected = TesterConfig::default().sample_count(eps1, eps2, delta);
    let m_formula = (2.0 * (1.0 / delta).ln() / ((eps2 - eps1) * (eps2 - eps1))).ceil() as usize;
    let corpus = tester_corpus().map_err(|e| e.to_string())?;
    let mut ok = m_expected == m_formula;
    let mut parts = Vec::new();
    for kind in ["product-sign", "low-degree", "hermite-polynomial"] {
        let (mut correct, mut total) = (0usize, 0usize);
        for (i, inst) in corpus.iter().enumerate().filter(|(_, x)| x.kind.name() == kind) {
            let mut sampler = sampler_for(&inst.function, inst.m, inst.cutoff).map_err(|e| e.to_string())?;
            for seed in 0..20u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(9000 + 100 * i as u64 + seed);
                let v = run_tester(inst, &mut sampler, eps1, eps2, delta, &mut rng).map_err(|e| e.to_string())?;
                if matches!(inst.kind, TesterKind::LowDegree(_)) {
                    ok &= v.samples == m_expected;
                }
                correct += (v.accept == inst.accept) as usize;
                total += 1;
            }
        }
        let rate = correct as f64 / total as f64;
        ok &= rate >= 0.9;
        parts.push(format!("{kind} {correct}/{total}"));
    }
    Ok((
        ok,
        format!("{} (≥ 90% each); low-degree m = {m_expected}", parts.join(", ")),
    ))
}

fn c10_sign_decay() -> Outcome {
    let fit = sign_spectrum_decay(15, 4096).map_err(|e| e.to_string())?;
    let bounded = fit
        .coeffs
        .iter()
        .enumerate()
        .skip(1)
        .step_by(2)
        .all(|(k, c)| c.abs() <= (-fit.rate * k as f64).exp() * (1.0 + 1e-12));
    Ok((
        fit.even_max <= 1e-12 && fit.rate > 0.0 && bounded,
        format!(
            "max even |f̂(k)| {:.1e} (≤ 1e-12), fitted c = {:.4} (> 0), slope {:.4}",
            fit.even_max, fit.rate, fit.slope
        ),
    ))
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "overlap figure at M=1e5",
            budget: Duration::from_secs(60),
            check: c1_overlap_figure,
        },
        Criterion {
            id: 2,
            name: "discretization fidelity at M=256",
            budget: Duration::from_secs(30),
            check: c2_discretization,
        },
        Criterion {
            id: 3,
            name: "fast-forwarding error",
            budget: Duration::from_secs(300),
            check: c3_fast_forwarding,
        },
        Criterion {
            id: 4,
            name: "commutator-tail decay",
            budget: Duration::from_secs(600),
            check: c4_commutator_tails,
        },
        Criterion {
            id: 5,
            name: "end-to-end transform",
            budget: Duration::from_secs(600),
            check: c5_end_to_end,
        },
        Criterion {
            id: 6,
            name: "Hermite sampling correctness",
            budget: Duration::from_secs(300),
            check: c6_sampling,
        },
        Criterion {
            id: 7,
            name: "distortion and postselection",
            budget: Duration::from_secs(300),
            check: c7_postselection,
        },
        Criterion {
            id: 8,
            name: "Goldreich-Levin guarantee",
            budget: Duration::from_secs(600),
            check: c8_learner,
        },
        Criterion {
            id: 9,
            name: "tolerant testers",
            budget: Duration::from_secs(600),
            check: c9_testers,
        },
        Criterion {
            id: 10,
            name: "sign-spectrum decay",
            budget: Duration::from_secs(60),
            check: c10_sign_decay,
        },
    ];
    let mut passed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        passed += ok as usize;
        println!(
            "criterion {:>2}: {} — {}: {} [{:.1} s of {} s]",
            c.id,
            if ok { "PASS" } else { "FAIL" },
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed != criteria.len() {
        std::process::exit(1);
    }
}
