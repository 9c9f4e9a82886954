//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run alone with `cargo test -p krrlab-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use krrlab::diagnostics::{bound_scan, concentration_coefficients, default_k_grid, master_bias_bound, master_variance_bound};
use krrlab::estimators::{
    exact_bias, exact_variance, gram_variance, mc_bias, mc_variance, underparam_surrogate, DesignFactorization,
};
use krrlab::features::{sample_whitened, FeatureFamily, FeatureSample};
use krrlab::kernels::{gram, min_kernel_mercer_check, sample_points, Domain, KernelKind};
use krrlab::numerics::{loglog_fit, RngStream, SymMatrix};
use krrlab::spectral::{
    effective_ranks, make_spectrum, predict_rates, FeatureAssumption, Rate, RateScale, Regime, RidgeSchedule,
    SpectralFamily, SpectralModel, Variant,
};
use krrlab::sweep::{
    classify_overfitting, fit_rates, log_spaced_grid, run_sweep, run_sweep_with_workers, Overfitting, SweepConfig,
    DEFAULT_TAU,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn poly(a: f64, r: f64, p: usize, variant: Variant) -> SpectralModel {
    make_spectrum(SpectralFamily::Poly, a, r, p, variant).unwrap()
}

fn draw(m: &SpectralModel, family: FeatureFamily, n: usize, seed: u64) -> FeatureSample {
    let mut rng = RngStream::new(seed).derive("acceptance", n as u64);
    sample_whitened(family, n, m.p(), &mut rng).unwrap().materialize(m).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let m = poly(1.0, 1.0, 50, Variant::Plain);
    let mut lines = Vec::new();
    let mut pass = true;
    for lambda in [0.0, 0.01, 1.0] {
        let (mut ok_b, mut ok_v) = (0, 0);
        for seed in 0..20 {
            let fs = draw(&m, FeatureFamily::Gaussian, 20, seed);
            let b = exact_bias(&m, &fs, lambda).unwrap();
            let v = exact_variance(&m, &fs, lambda, 1.0).unwrap();
            let rng = RngStream::new(1000 + seed);
            let mb = mc_bias(&m, &fs, lambda, 20_000, &mut rng.derive("bias", 0)).unwrap();
            let mv = mc_variance(&m, &fs, lambda, 1.0, 20_000, 200, &mut rng.derive("variance", 0)).unwrap();
            ok_b += usize::from((mb.bias - b).abs() <= 3.0 * mb.mc_stderr.unwrap().0);
            ok_v += usize::from((mv.variance - v).abs() <= 3.0 * mv.mc_stderr.unwrap().1);
        }
        pass &= ok_b >= 18 && ok_v >= 18;
        lines.push(format!("λ={lambda}: bias {ok_b}/20, variance {ok_v}/20"));
    }
    outcome(pass, lines.join("; "))
}

fn master_variance() -> Outcome {
    let m = poly(1.0, 1.0, 400, Variant::Plain);
    let lambda = 1.0 / 100.0;
    let (mut checked, mut held) = (0, 0);
    for seed in 0..50 {
        let fs = draw(&m, FeatureFamily::Gaussian, 100, seed);
        let v = exact_variance(&m, &fs, lambda, 1.0).unwrap();
        for k in 1..=100 {
            if let Ok(bound) = master_variance_bound(&fs, &m, lambda, k, 1.0) {
                checked += 1;
                held += usize::from(v <= bound.value);
            }
        }
    }
    outcome(held == checked && checked > 0, format!("{held}/{checked} (instance, k) pairs satisfied"))
}

fn master_bias() -> Outcome {
    let (n, a, b) = (100usize, 1.0, 1.0);
    let m = poly(a, 1.0, 400, Variant::Plain);
    let lambda = (n as f64).powf(-b);
    let k = (n as f64).powf(b / (1.0 + a)).ceil() as usize;
    let mut held = 0;
    for seed in 0..100 {
        let fs = draw(&m, FeatureFamily::Gaussian, n, seed);
        let exact = exact_bias(&m, &fs, lambda).unwrap();
        held += usize::from(exact <= master_bias_bound(&fs, &m, lambda, k, 0.1).unwrap().value);
    }
    outcome(held >= 85, format!("k={k}: {held}/100 seeds satisfied"))
}

fn slope_in(slope: Option<f64>, target: f64, tol: f64) -> bool {
    slope.is_some_and(|s| (s - target).abs() <= tol)
}

fn fmt_slope(s: Option<f64>) -> String {
    s.map_or("none".into(), |s| format!("{s:.3}"))
}

fn strong_ridge_bias_rate() -> Outcome {
    let mut slopes = Vec::new();
    let mut lines = Vec::new();
    let mut pass = true;
    for family in [FeatureFamily::Gaussian, FeatureFamily::Sine, FeatureFamily::Rademacher] {
        let cfg = SweepConfig { features: family, ..SweepConfig::default() };
        let fit = fit_rates(&run_sweep(&cfg).unwrap(), RateScale::PowerOfN).unwrap();
        let slope = fit.bias_slope();
        pass &= slope_in(slope, -3.0, 0.4);
        if family == FeatureFamily::Gaussian {
            pass &= fit.bias.is_some_and(|f| f.r2 >= 0.95);
        }
        lines.push(format!("{family:?} slope {} r² {:.4}", fmt_slope(slope), fit.bias.map_or(0.0, |f| f.r2)));
        slopes.push(slope.unwrap_or(f64::NAN));
    }
    let max_gap = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).map(|(i, j)| (slopes[i] - slopes[j]).abs()).fold(0.0, f64::max);
    pass &= max_gap <= 0.3;
    lines.push(format!("max gap {max_gap:.3}"));
    outcome(pass, lines.join("; "))
}

fn saturation() -> Outcome {
    let cfg = SweepConfig {
        a: 0.5,
        r: 1.5,
        schedule: RidgeSchedule::power_law(1.5, Variant::MinKernel).unwrap(),
        ..SweepConfig::default()
    };
    let s = cfg.model().unwrap().source_coefficient();
    let fit = fit_rates(&run_sweep(&cfg).unwrap(), RateScale::PowerOfN).unwrap();
    let slope = fit.bias_slope();
    outcome(slope_in(slope, -3.0, 0.4), format!("s={s:.3}, bias slope {}", fmt_slope(slope)))
}

fn strong_ridge_variance_rates() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for b in [1.0, 0.2] {
        let cfg = SweepConfig { schedule: RidgeSchedule::power_law(b, Variant::MinKernel).unwrap(), ..SweepConfig::default() };
        let fit = fit_rates(&run_sweep(&cfg).unwrap(), RateScale::PowerOfN).unwrap();
        let target = -1.0 + b / 2.0;
        let slope = fit.variance_slope();
        pass &= slope_in(slope, target, 0.3);
        lines.push(format!("b={b}: variance slope {} (target {target})", fmt_slope(slope)));
    }
    outcome(pass, lines.join("; "))
}

fn weak_ridge_tempered() -> Outcome {
    let cfg = SweepConfig {
        schedule: RidgeSchedule::zero(),
        n_grid: log_spaced_grid(100, 800, 6),
        ..SweepConfig::default()
    };
    let res = run_sweep(&cfg).unwrap();
    let curve: Vec<(f64, f64)> = krrlab::sweep::replicate_means(&res).into_iter().map(|(n, _, v)| (n as f64, v)).collect();
    match classify_overfitting(&curve, DEFAULT_TAU) {
        Ok(v) => outcome(v.class == Overfitting::Tempered, format!("{:?}, slope {:.3}", v.class, v.slope)),
        Err(e) => outcome(false, format!("classification failed: {e}")),
    }
}

fn kernel_dichotomy() -> Outcome {
    let grid = [50usize, 100, 200, 400, 800];
    let mut lines = Vec::new();
    let mut pass = true;
    for (kind, expected) in [(KernelKind::Laplacian, Overfitting::Tempered), (KernelKind::Ntk1, Overfitting::Catastrophic)] {
        let mut curve = Vec::new();
        for &n in &grid {
            let rng = RngStream::new(5).derive("kernel", n as u64);
            let pts = sample_points(Domain::UnitDisk2, n, &mut rng.derive("train", 0)).unwrap();
            let k = gram(kind, &pts, None).unwrap();
            let est = gram_variance(&k, kind, &pts, 0.0, 1.0, 2000, &mut rng.derive("test", 0)).unwrap();
            curve.push((n as f64, est.variance));
        }
        match classify_overfitting(&curve, DEFAULT_TAU) {
            Ok(v) => {
                pass &= v.class == expected;
                lines.push(format!("{kind:?}: {:?}, slope {:.3}", v.class, v.slope));
            }
            Err(e) => {
                pass = false;
                lines.push(format!("{kind:?}: {e}"));
            }
        }
    }
    outcome(pass, lines.join("; "))
}

fn underparam_surrogates() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [400usize, 800, 1600] {
        let m = poly(1.0, 1.0, n / 4, Variant::Plain);
        let lambda = 1.0 / n as f64;
        let sur = underparam_surrogate(&m, lambda, n, 1.0).unwrap();
        let mut inside = 0;
        for seed in 0..20 {
            let fs = draw(&m, FeatureFamily::Gaussian, n, seed);
            let f = DesignFactorization::new(&fs).unwrap();
            let rb = f.bias(&m, lambda).unwrap() / sur.bias;
            let rv = f.variance(&m, lambda, 1.0).unwrap() / sur.variance;
            inside += usize::from((0.5..=2.0).contains(&rb) && (0.5..=2.0).contains(&rv));
        }
        pass &= inside >= 18;
        lines.push(format!("n={n}: {inside}/20"));
    }
    outcome(pass, lines.join("; "))
}

fn mercer_fidelity() -> Outcome {
    let m = poly(1.0, 1.0, 2000, Variant::MinKernel);
    let mut rng = RngStream::new(10);
    let worst = (0..100)
        .map(|_| {
            let (x, x2) = (rng.uniform(), rng.uniform());
            min_kernel_mercer_check(x, x2, &m).unwrap().abs_error
        })
        .fold(0.0, f64::max);
    outcome(worst < 2e-3, format!("max abs error {worst:.3e}"))
}

fn property_suites() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = RngStream::new(2024);

    // effective-rank sandwich
    for _ in 0..200 {
        let a = 0.05 + 4.0 * rng.uniform();
        let p = 2 + (rng.uniform() * 500.0) as usize;
        let m = poly(a, 1.0, p, Variant::Plain);
        let k = (rng.uniform() * (p - 1) as f64) as usize;
        let er = effective_ranks(&m, k).unwrap();
        if !(er.r_k <= er.big_r_k * (1.0 + 1e-12) && er.big_r_k <= er.r_k * er.r_k * (1.0 + 1e-12)) {
            failures.push(format!("rank sandwich a={a} p={p} k={k}"));
        }
    }

    // rate-table band: generic weak ridge with 1 ≤ s ≤ 2 matches −(1+a)s
    for _ in 0..100 {
        let a = 0.1 + 2.9 * rng.uniform();
        let s = 1.0 + rng.uniform();
        let r = (s * (1.0 + a) - a) / 2.0;
        if r <= 0.0 {
            continue;
        }
        let m = poly(a, r, 4, Variant::Plain);
        let pred = predict_rates(&m, &RidgeSchedule::zero(), FeatureAssumption::Generic, Regime::Over).unwrap();
        match pred.bias {
            Rate::Exponent(e) if (e + (1.0 + a) * s).abs() < 1e-9 => {}
            other => failures.push(format!("rate band a={a} s={s}: {other:?}")),
        }
    }

    // bias monotone in λ, and saturating at ‖θ*‖²_Σ
    let m = poly(1.0, 1.0, 50, Variant::Plain);
    let grid = [0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3];
    for seed in 0..20 {
        let fs = draw(&m, FeatureFamily::Gaussian, 20, seed);
        let f = DesignFactorization::new(&fs).unwrap();
        let b: Vec<f64> = grid.iter().map(|&l| f.bias(&m, l).unwrap()).collect();
        if b.windows(2).any(|w| w[1] < w[0] * (1.0 - 1e-9)) {
            failures.push(format!("bias not monotone, seed {seed}"));
        }
        let target = m.sigma_norm_sq(m.theta_star());
        let far = f.bias(&m, 1e9 * m.eigvals()[0]).unwrap();
        if (far - target).abs() > 1e-6 * target {
            failures.push(format!("bias limit seed {seed}"));
        }
    }

    // concentration coefficients and bound-scan shape/argmin
    let m = poly(1.0, 1.0, 400, Variant::Plain);
    for seed in 0..5 {
        let fs = draw(&m, FeatureFamily::Gaussian, 100, seed);
        let k_grid = default_k_grid(100, 400);
        let report = bound_scan(&fs, &m, 0.01, 1.0, 0.1, &k_grid).unwrap();
        if report.per_k.len() != k_grid.len() {
            failures.push("bound scan shape".into());
        }
        let min_b = report.per_k.iter().filter_map(|r| r.bound.as_ref().ok()).map(|b| b.bias.value).fold(f64::INFINITY, f64::min);
        if report.best_bias().value != min_b {
            failures.push("bound scan argmin".into());
        }
        for &k in &k_grid {
            let t = concentration_coefficients(&fs, &m, k, 0.01).unwrap();
            let trace: f64 = fs.z().column_block(0, k).as_slice().iter().map(|v| v * v).sum();
            if t.zeta < 1.0 || t.rho < 1.0 || t.xi < trace / (k as f64 * 100.0) * (1.0 - 1e-12) {
                failures.push(format!("coefficients seed {seed} k {k}"));
            }
        }
    }

    // sweep determinism across worker counts
    let cfg = SweepConfig {
        p: 200,
        variant: Variant::Plain,
        schedule: RidgeSchedule::power_law(1.0, Variant::Plain).unwrap(),
        n_grid: vec![20, 40, 80],
        replicates: 3,
        bounds: true,
        ..SweepConfig::default()
    };
    if run_sweep_with_workers(&cfg, Some(1)).unwrap() != run_sweep_with_workers(&cfg, Some(4)).unwrap() {
        failures.push("sweep determinism".into());
    }

    // exactly symmetric grams, Mercer error non-increasing in p
    let pts = sample_points(Domain::UnitDisk2, 60, &mut rng).unwrap();
    for kind in [KernelKind::Laplacian, KernelKind::Ntk1] {
        if SymMatrix::new(gram(kind, &pts, None).unwrap()).is_err() {
            failures.push(format!("{kind:?} gram asymmetric"));
        }
    }
    let errs: Vec<f64> = [10, 100, 1000, 2000]
        .iter()
        .map(|&p| min_kernel_mercer_check(0.3, 0.7, &poly(1.0, 1.0, p, Variant::MinKernel)).unwrap().abs_error)
        .collect();
    if errs.windows(2).any(|w| w[1] > w[0]) {
        failures.push(format!("Mercer errors {errs:?}"));
    }

    // log-log fit recovers exact power laws
    let pts: Vec<(f64, f64)> = [100.0, 200.0, 400.0_f64].iter().map(|&n| (n, 3.0 * n.powf(-1.7))).collect();
    if (loglog_fit(&pts).unwrap().slope + 1.7).abs() > 1e-12 {
        failures.push("log-log slope".into());
    }

    let detail = if failures.is_empty() { "all property checks hold".to_string() } else { failures.join("; ") };
    outcome(failures.is_empty(), detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 11] = [
        ("oracle equivalence", Duration::from_secs(60), oracle_equivalence),
        ("variance inequality", Duration::from_secs(120), master_variance),
        ("bias inequality", Duration::from_secs(180), master_bias),
        ("strong-ridge bias rate", Duration::from_secs(600), strong_ridge_bias_rate),
        ("saturation", Duration::from_secs(600), saturation),
        ("strong-ridge variance rates", Duration::from_secs(600), strong_ridge_variance_rates),
        ("weak-ridge tempered variance", Duration::from_secs(600), weak_ridge_tempered),
        ("kernel overfitting dichotomy", Duration::from_secs(300), kernel_dichotomy),
        ("under-parameterized surrogate", Duration::from_secs(600), underparam_surrogates),
        ("Mercer fidelity", Duration::from_secs(60), mercer_fidelity),
        ("property suites", Duration::from_secs(60), property_suites),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= *budget;
        failed += usize::from(!pass);
        println!(
            "{} criterion {id:>2} {name}: {} [{:.1}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
