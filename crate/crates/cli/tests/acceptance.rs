//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed; the process
//! exits nonzero when any criterion fails. A positional argument filters
//! criteria by name.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qspec::{analyze_series, Bandwidth, InputSource, OmegaSelection, RunConfig};
use quantile_spectra::{
    ccr_periodogram_matrix, confidence_bands, default_bandwidth, frechet_bounds, gaussian_copula_cdf,
    gaussian_quantile_spectrum, iid_quantile_coherency, quantile_coherency, quantile_dft, simulate_qvar, simulate_toy,
    smooth_periodogram, smoothed_quantile_spectrum, ClippedTensor, DirectReference, EvalFrequencies,
    GaussianProcessSpec, KernelSpec, QuantileGrid, QvarSpec, SeededStream, SmoothedSpectrum, TimeSeriesMatrix, ToyKind,
    DEFAULT_BURN_IN,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn correlated_noise(n: usize, rho: f64, seed: u64) -> TimeSeriesMatrix {
    let z1 = SeededStream::new(seed, 0).normals(n);
    let z2 = SeededStream::new(seed, 1).normals(n);
    let y = z1
        .iter()
        .zip(&z2)
        .map(|(a, b)| rho * a + (1.0 - rho * rho).sqrt() * b)
        .collect();
    TimeSeriesMatrix::from_columns_unnamed(vec![z1, y]).unwrap()
}

fn fourier_spectrum(x: &TimeSeriesMatrix, levels: &QuantileGrid, b: f64) -> SmoothedSpectrum {
    smoothed_quantile_spectrum(x, levels, &KernelSpec::epanechnikov(), b, &EvalFrequencies::FourierHalf)
        .unwrap()
        .normalized()
        .unwrap()
}

/// Fourier indices `s` with `pi b <= w_s <= pi - pi b`.
fn interior(n: usize, b: f64) -> Vec<usize> {
    (0..=n / 2)
        .filter(|&s| {
            let w = 2.0 * PI * s as f64 / n as f64;
            w >= PI * b && w <= PI - PI * b
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn c01_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let levels = QuantileGrid::default();
    let mut worst = 0.0f64;
    for &n in &[16usize, 100, 257, 512] {
        let sim = simulate_qvar(&QvarSpec::cross_linear_qvar1(), n, DEFAULT_BURN_IN, n as u64).unwrap();
        // coarsen the second component so that ties occur
        let tied: Vec<f64> = sim.column(1).iter().map(|v| (v * 2.0).round() / 2.0).collect();
        let x = TimeSeriesMatrix::from_columns_unnamed(vec![sim.column(0).to_vec(), tied]).unwrap();
        let perio = ccr_periodogram_matrix(&quantile_dft(&ClippedTensor::from_series(&x, &levels).unwrap()));
        let reference = DirectReference::new(&x);
        let floor = 1.0 / (2.0 * PI * n as f64);
        for s in 0..n {
            let w = 2.0 * PI * s as f64 / n as f64;
            let dfts: Vec<Vec<Complex64>> = (0..2)
                .map(|j| levels.levels().iter().map(|&t| reference.dft(j, t, w)).collect())
                .collect();
            for j1 in 0..2 {
                for j2 in 0..2 {
                    for k1 in 0..levels.len() {
                        for k2 in 0..levels.len() {
                            let want = dfts[j1][k1] * dfts[j2][k2].conj() / (2.0 * PI * n as f64);
                            let got = perio.get(j1, j2, k1, k2, s);
                            worst = worst.max((got - want).norm() / want.norm().max(floor));
                        }
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst < 1e-10 && secs < 10.0,
        format!("max relative error {worst:.2e} (< 1e-10), {secs:.2}s (< 10s)"),
    )
}

fn c02_symmetries() -> Outcome {
    let n = 1024;
    let levels = QuantileGrid::default();
    let x = simulate_qvar(&QvarSpec::cross_linear_qvar1(), n, DEFAULT_BURN_IN, 77).unwrap();
    let perio = ccr_periodogram_matrix(&quantile_dft(&ClippedTensor::from_series(&x, &levels).unwrap()));
    let m = perio.series_count();
    let err = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(1.0);
    let mut worst = [0.0f64; 3];
    for a in 0..m {
        for c in 0..m {
            for s in 0..n {
                worst[0] = worst[0].max(err(perio.pair(a, c)[s], perio.pair(c, a)[s].conj()));
                worst[0] = worst[0].max(err(perio.pair(a, c)[s], perio.pair(a, c)[(n - s) % n].conj()));
            }
        }
    }
    let kernel = KernelSpec::epanechnikov();
    let b = default_bandwidth(n);
    let mut stream = SeededStream::new(5, 0);
    let ws: Vec<f64> = (0..16).map(|_| PI * stream.uniform()).collect();
    let both: Vec<f64> = ws.iter().flat_map(|&w| [w, -w]).collect();
    let direct = smooth_periodogram(&perio, &kernel, b, &EvalFrequencies::Omegas(both)).unwrap();
    let grid = smooth_periodogram(&perio, &kernel, b, &EvalFrequencies::FourierHalf).unwrap();
    for a in 0..m {
        for c in 0..m {
            for e in 0..direct.len() {
                worst[1] = worst[1].max(err(direct.value(a, c, e), direct.value(c, a, e).conj()));
            }
            for i in 0..ws.len() {
                worst[1] = worst[1].max(err(direct.value(a, c, 2 * i), direct.value(a, c, 2 * i + 1).conj()));
            }
            for e in 0..grid.len() {
                worst[1] = worst[1].max(err(grid.value(a, c, e), grid.value(c, a, e).conj()));
            }
        }
    }
    let r = quantile_coherency(&grid).unwrap();
    for a in 0..m {
        for c in 0..m {
            for e in 0..grid.len() {
                worst[2] = worst[2].max(err(r.value(a, c, e), r.value(c, a, e).conj()));
            }
        }
    }
    let max = worst.iter().cloned().fold(0.0, f64::max);
    Outcome::new(
        max <= 1e-12,
        format!(
            "periodogram {:.1e}, smoothed {:.1e}, coherency {:.1e} (<= 1e-12)",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn c03_white_noise_truth() -> Outcome {
    let start = Instant::now();
    let n = 8192;
    let reps = 50;
    let b = default_bandwidth(n);
    let levels = QuantileGrid::new(vec![0.5]).unwrap();
    let inner = interior(n, b);
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, &rho) in [0.0, 0.3, 0.6].iter().enumerate() {
        let truth = 2.0 * f64::asin(rho) / PI;
        let oracle = iid_quantile_coherency(rho, 0.5, 0.5).unwrap();
        let est: Vec<f64> = (0..reps)
            .map(|rep| {
                let x = correlated_noise(n, rho, 1000 * i as u64 + rep as u64);
                let r = quantile_coherency(&fourier_spectrum(&x, &levels, b)).unwrap();
                mean(&inner.iter().map(|&s| r.value(0, 1, s).re).collect::<Vec<_>>())
            })
            .collect();
        let avg = mean(&est);
        pass &= (avg - truth).abs() <= 0.03 && (oracle - truth).abs() < 1e-12;
        parts.push(format!("rho={rho}: {avg:.4} vs {truth:.5}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    Outcome::new(pass, format!("{} (+-0.03), {secs:.1}s (< 120s)", parts.join("; ")))
}

fn c04_toy_processes() -> Outcome {
    // (a) (e_t, e_t^2) at tau = (0.5, tau2)
    let n = 8192;
    let b = default_bandwidth(n);
    let levels = QuantileGrid::default();
    let inner = interior(n, b);
    let mut worst: f64 = 0.0;
    let reps = 20;
    let mut sums = vec![0.0; levels.len()];
    for rep in 0..reps {
        let x = simulate_toy(ToyKind::EpsSquareNow, n, 500 + rep).unwrap();
        let r = quantile_coherency(&fourier_spectrum(&x, &levels, b)).unwrap();
        for (k2, sum) in sums.iter_mut().enumerate() {
            *sum += mean(&inner.iter().map(|&s| r.get(0, 1, 2, k2, s).re).collect::<Vec<_>>()) / reps as f64;
        }
    }
    for &v in &sums {
        worst = worst.max(v.abs());
    }
    // (b) independent noise, zero coverage of the coherency band
    let n = 2048;
    let reps = 200;
    let levels = QuantileGrid::new(vec![0.5]).unwrap();
    let s = n / 8;
    let covered = (0..reps)
        .filter(|&rep| {
            let x = simulate_toy(ToyKind::IndependentNoise, n, 9000 + rep).unwrap();
            let spec = fourier_spectrum(&x, &levels, default_bandwidth(n));
            let (_, band) = confidence_bands(&spec, 0.05, false).unwrap();
            let cell = band.get(0, 1, 0, 0, s);
            cell.lo_re <= 0.0 && 0.0 <= cell.hi_re
        })
        .count();
    let rate = covered as f64 / reps as f64;
    Outcome::new(
        worst <= 0.05 && (0.91..=0.99).contains(&rate),
        format!("(a) max |mean Re R| = {worst:.4} (<= 0.05); (b) zero coverage {rate:.3} (0.95 +- 0.04)"),
    )
}

/// Coverage of the spectrum and coherency bands for correlated Gaussian noise.
fn coverage(use_coherency: bool) -> Outcome {
    let start = Instant::now();
    let (n, reps, rho) = (2048, 200, 0.6);
    let (t1, t2) = (0.25, 0.75);
    let levels = QuantileGrid::new(vec![t1, t2]).unwrap();
    let s = n / 8;
    let omega = 2.0 * PI * s as f64 / n as f64;
    let process = GaussianProcessSpec::WhiteNoise { rho };
    let truth = if use_coherency {
        iid_quantile_coherency(rho, t1, t2).unwrap()
    } else {
        gaussian_quantile_spectrum(&process, omega, t1, t2, 0, 1).unwrap().re
    };
    let covered = (0..reps)
        .filter(|&rep| {
            let x = correlated_noise(n, rho, 20_000 + rep as u64);
            let spec = fourier_spectrum(&x, &levels, default_bandwidth(n));
            let (fb, rb) = confidence_bands(&spec, 0.05, false).unwrap();
            let cell = if use_coherency {
                rb.get(0, 1, 0, 1, s)
            } else {
                fb.get(0, 1, 0, 1, s)
            };
            cell.lo_re <= truth && truth <= cell.hi_re
        })
        .count();
    let rate = covered as f64 / reps as f64;
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        (0.91..=0.99).contains(&rate) && secs < 300.0,
        format!("coverage {rate:.3} of truth {truth:.6} ([0.91, 0.99]), {secs:.1}s"),
    )
}

fn c05_spectrum_coverage() -> Outcome {
    coverage(false)
}

fn c06_coherency_coverage() -> Outcome {
    coverage(true)
}

fn c07_consistency() -> Outcome {
    let levels = QuantileGrid::new(vec![0.05, 0.95]).unwrap();
    let spec = QvarSpec::cross_linear_qvar1();
    let big = 1usize << 18;
    let bb = 0.4 * (big as f64).powf(-0.25);
    let x = simulate_qvar(&spec, big, DEFAULT_BURN_IN, 424_242).unwrap();
    let truth_r = quantile_coherency(&fourier_spectrum(&x, &levels, bb)).unwrap();
    let at = |w: f64| {
        truth_r
            .get(0, 1, 0, 1, (w * big as f64 / (2.0 * PI)).round() as usize)
            .re
    };
    let truth = at(2.0 * PI / 8.0);
    let low = at(0.1);
    let high = at(PI - 0.1);
    let mut rmse = Vec::new();
    for &n in &[512usize, 2048, 8192] {
        let s = n / 8;
        let errs: Vec<f64> = (0..30)
            .map(|rep| {
                let x = simulate_qvar(&spec, n, DEFAULT_BURN_IN, 7_000 + rep).unwrap();
                let r = quantile_coherency(&fourier_spectrum(&x, &levels, default_bandwidth(n))).unwrap();
                (r.get(0, 1, 0, 1, s).re - truth).powi(2)
            })
            .collect();
        rmse.push(mean(&errs).sqrt());
    }
    let monotone = rmse.windows(2).all(|w| w[1] < w[0]);
    let signs = low > 0.0 && high < 0.0;
    Outcome::new(
        monotone && signs,
        format!(
            "RMSE {:.4} > {:.4} > {:.4} against {truth:.4}; Re R(0.1) = {low:.4} > 0, Re R(pi - 0.1) = {high:.4} < 0",
            rmse[0], rmse[1], rmse[2]
        ),
    )
}

fn c08_frechet() -> Outcome {
    let grid = QuantileGrid::default();
    let mut violations = 0;
    let mut checked = 0;
    for i in -9..=9 {
        let rho = i as f64 / 10.0;
        for &t1 in grid.levels() {
            for &t2 in grid.levels() {
                let (lo, hi) = frechet_bounds(t1, t2).unwrap();
                let r = iid_quantile_coherency(rho, t1, t2).unwrap();
                checked += 1;
                if r < lo - 1e-12 || r > hi + 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    let median = gaussian_copula_cdf(0.5, 0.5, 0.6) - (0.25 + 0.6f64.asin() / (2.0 * PI));
    Outcome::new(
        violations == 0 && median.abs() < 1e-12,
        format!("{violations} violations in {checked} cells"),
    )
}

fn timed_pipeline(pool: &rayon::ThreadPool, x: &TimeSeriesMatrix, config: &RunConfig) -> Duration {
    let levels = QuantileGrid::new(config.quantiles.clone()).unwrap();
    pool.install(|| {
        let start = Instant::now();
        let out = analyze_series(x.clone(), &levels, config).unwrap();
        let elapsed = start.elapsed();
        assert_eq!(out.spectrum.len(), x.n() / 2 + 1);
        elapsed
    })
}

fn c09_performance() -> Outcome {
    let n = 1 << 16;
    let x = simulate_qvar(&QvarSpec::cross_linear_qvar1(), n, DEFAULT_BURN_IN, 99).unwrap();
    let mut config = RunConfig::new(
        InputSource::Csv {
            path: PathBuf::new(),
            columns: None,
        },
        "unused",
    );
    config.bandwidth = Bandwidth::Auto;
    config.omegas = OmegaSelection::Fourier;
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let best = |pool: &rayon::ThreadPool| (0..2).map(|_| timed_pipeline(pool, &x, &config)).min().unwrap();
    let t1 = best(&serial).as_secs_f64();
    let t8 = best(&parallel).as_secs_f64();
    let speedup = t1 / t8;
    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
    Outcome::new(
        t1 < 5.0 && speedup >= 3.0,
        format!(
            "1 worker {t1:.2}s (< 5s), 8 workers {t8:.2}s, speedup {speedup:.2}x (>= 3x) on {cores} available core(s)"
        ),
    )
}

const GOLDEN_MODEL: &str = r#"{"type":"qvar","p":1,"d":2,
 "coeff":[{"lag":1,"row":1,"col":2,"form":"linear","params":[0,1.2]},
          {"lag":1,"row":2,"col":1,"form":"linear","params":[0,1.2]}],
 "intercept":[{"row":1,"form":"normal_quantile","params":[]},
              {"row":2,"form":"normal_quantile","params":[]}]}"#;

fn qspec(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qspec"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_default()
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let run = || -> Result<Vec<String>, String> {
        let mut mismatches = Vec::new();
        for tag in ["a", "b"] {
            let sim = p(&format!("sim_{tag}.csv"));
            qspec(&[
                "simulate",
                "--model",
                GOLDEN_MODEL,
                "--n",
                "256",
                "--seed",
                "2024",
                "--out",
                sim.to_str().unwrap(),
            ])?;
        }
        if read(&p("sim_a.csv")) != read(&p("sim_b.csv")) {
            mismatches.push("simulate output differs between runs".to_string());
        }
        let sim = p("sim_a.csv");
        let sim = sim.to_str().unwrap();
        let modes = [
            ("serial_1", "1"),
            ("serial_2", "1"),
            ("parallel_1", "8"),
            ("parallel_2", "4"),
        ];
        for (tag, threads) in modes {
            let out = p(tag);
            qspec(&[
                "--threads",
                threads,
                "analyze",
                "--input",
                sim,
                "--quantiles",
                "0.1,0.5,0.9",
                "--out",
                out.to_str().unwrap(),
            ])?;
            let small = p(&format!("{tag}_small"));
            qspec(&[
                "--threads",
                threads,
                "analyze",
                "--input",
                sim,
                "--quantiles",
                "0.25,0.75",
                "--omegas",
                "0.5,1,2,3",
                "--out",
                small.to_str().unwrap(),
            ])?;
        }
        for (tag, _) in &modes[1..] {
            for (sub, file) in [("", "spectra.csv"), ("", "metadata.json"), ("_small", "spectra.csv")] {
                let a = read(&p(&format!("serial_1{sub}")).join(file));
                let b = read(&p(&format!("{tag}{sub}")).join(file));
                if a.is_empty() || a != b {
                    mismatches.push(format!("{tag}{sub}/{file} differs from serial_1{sub}"));
                }
            }
        }
        for (produced, frozen) in [
            (p("sim_a.csv"), golden.join("sim.csv")),
            (p("serial_1_small").join("spectra.csv"), golden.join("spectra.csv")),
            (p("serial_1_small").join("metadata.json"), golden.join("metadata.json")),
        ] {
            if read(&produced) != read(&frozen) {
                mismatches.push(format!(
                    "{} differs from frozen {}",
                    produced.display(),
                    frozen.display()
                ));
            }
        }
        Ok(mismatches)
    };
    match run() {
        Ok(m) if m.is_empty() => Outcome::new(
            true,
            "two runs, 1/4/8 threads and frozen golden files are byte-identical",
        ),
        Ok(m) => Outcome::new(false, m.join("; ")),
        Err(e) => Outcome::new(false, format!("command failed: {e}")),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [Criterion; 10] = [
        ("oracle_equivalence", c01_oracle_equivalence),
        ("exact_symmetries", c02_symmetries),
        ("white_noise_truth", c03_white_noise_truth),
        ("toy_processes", c04_toy_processes),
        ("spectrum_ci_coverage", c05_spectrum_coverage),
        ("coherency_ci_coverage", c06_coherency_coverage),
        ("consistency_rate", c07_consistency),
        ("frechet_bounds", c08_frechet),
        ("performance", c09_performance),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if filter.as_ref().is_some_and(|f| !name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {name:<22} {verdict}  {} [{:.1}s]",
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
