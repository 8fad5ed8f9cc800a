//! Acceptance suite. Runs every criterion in sequence, prints one
//! `PASS`/`FAIL` line each, and exits nonzero if any failed.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use usdegrade::bench::{
    default_ladders, emit_pair_dataset, replay_pair, run_ladder, write_csv, DirSink, LadderKind, LadderSpec, Pair,
    PairConfig, PairRecord, PairSink, SourceImage, SourceKind,
};
use usdegrade::degrade::{add_gaussian_noise, blur, draw_training_degradation, gaussian_kernel, speckle, TRAINING_BLUR_SIZES};
use usdegrade::io::{load_image, to_bytes};
use usdegrade::metrics::{
    contrast, extract_profile, fwhm, grad_stats, psnr, ssim, Profile, ProfileAxis, RoiSpec, SSIM_K1,
};
use usdegrade::nllr::{nllr_denoise, NllrParams};
use usdegrade::spectral::{fft2, fourier_perturb, ifft2, wiener_deblur};
use usdegrade::{GrayImage, RandomStream};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn metric_oracles() -> Outcome {
    let mut rng = RandomStream::new(1, 0);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let h = 7 + rng.index(26);
        let w = 7 + rng.index(26);
        let a = random_image(h, w, 10_000 + case);
        let b = if case % 2 == 0 {
            random_image(h, w, 20_000 + case)
        } else {
            let mut noise = RandomStream::new(case, 1);
            GrayImage::from_fn(h, w, |r, c| a.get(r, c) + 0.03 * noise.standard_normal()).unwrap()
        };
        let dp = (psnr(&a, &b).unwrap() - psnr_oracle(&a, &b)).abs();
        let ds = (ssim(&a, &b).unwrap() - ssim_oracle(&a, &b)).abs();
        worst = worst.max(dp).max(ds);
        ensure!(dp < 1e-9 && ds < 1e-9, "case {case} ({h}x{w}): psnr err {dp:e}, ssim err {ds:e}");
        ensure!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-9, "ssim(a, a) != 1 in case {case}");
    }
    let zero = GrayImage::filled(16, 16, 0.0).unwrap();
    let one = GrayImage::filled(16, 16, 1.0).unwrap();
    let c1 = (SSIM_K1 * 255.0f64).powi(2);
    let want = c1 / (255.0 * 255.0 + c1);
    let got = ssim(&zero, &one).unwrap();
    ensure!((got - want).abs() < 1e-9, "constant 0 vs 1: ssim {got} != {want}");
    Ok(format!("200 pairs, max deviation {worst:.1e}"))
}

fn fft_correctness() -> Outcome {
    let mut worst_dft: f64 = 0.0;
    let mut worst_rt: f64 = 0.0;
    let mut worst_parseval: f64 = 0.0;
    for h in 4..=16 {
        for w in [4, 7, 12, 16] {
            let img = random_image(h, w, (h * 100 + w) as u64);
            let spec = fft2(&img);
            for (x, y) in spec.data().iter().zip(dft_oracle(&img)) {
                worst_dft = worst_dft.max((x - y).norm());
            }
            for (x, y) in ifft2(&spec).iter().zip(img.data()) {
                worst_rt = worst_rt.max((x.re - y).abs()).max(x.im.abs());
            }
            let es: f64 = img.data().iter().map(|v| v * v).sum();
            let ef = spec.data().iter().map(|z| z.norm_sqr()).sum::<f64>() / img.len() as f64;
            worst_parseval = worst_parseval.max((es - ef).abs() / es);
        }
    }
    ensure!(worst_dft < 1e-9, "DFT deviation {worst_dft:e}");
    ensure!(worst_rt < 1e-9, "round-trip error {worst_rt:e}");
    ensure!(worst_parseval < 1e-6, "Parseval relative error {worst_parseval:e}");
    Ok(format!(
        "dft {worst_dft:.1e}, round trip {worst_rt:.1e}, parseval {worst_parseval:.1e}"
    ))
}

/// Sample mean and unbiased variance.
fn moments(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Mean and variance z-scores given the true mean, variance and excess
/// kurtosis of the sampled distribution.
fn z_scores(v: &[f64], mean: f64, var: f64, excess_kurtosis: f64) -> (f64, f64) {
    let n = v.len() as f64;
    let (m, s2) = moments(v);
    let se_mean = (var / n).sqrt();
    let se_var = var * ((2.0 + excess_kurtosis) / n).sqrt();
    ((m - mean) / se_mean, (s2 - var) / se_var)
}

fn noise_statistics() -> Outcome {
    let side = 1000;
    let mut lines = Vec::new();

    let sigma = 0.1;
    let base = GrayImage::filled(side, side, 0.5).unwrap();
    let noisy = add_gaussian_noise(&base, sigma, &mut RandomStream::new(31, 0)).unwrap();
    let (zm, zv) = z_scores(noisy.data(), 0.5, sigma * sigma, 0.0);
    ensure!(zm.abs() < 3.0 && zv.abs() < 3.0, "gaussian: z(mean) {zm:.2}, z(var) {zv:.2}");
    lines.push(format!("gauss z=({zm:.2},{zv:.2})"));

    // low enough that the clip at 1 is never reached in practice
    let level = 1.0 / 64.0;
    let base = GrayImage::filled(side, side, level).unwrap();
    for (i, enl) in [1.0, 5.0, 25.0].into_iter().enumerate() {
        let out = speckle(&base, enl, &mut RandomStream::new(40 + i as u64, 0)).unwrap();
        let (zm, zv) = z_scores(out.data(), level, level * level / enl, 6.0 / enl);
        ensure!(zm.abs() < 3.0 && zv.abs() < 3.0, "speckle L={enl}: z(mean) {zm:.2}, z(var) {zv:.2}");
        lines.push(format!("L={enl} z=({zm:.2},{zv:.2})"));
    }

    let img = random_image(33, 20, 9);
    let out = fourier_perturb(&img, 0.0, &mut RandomStream::new(2, 0)).unwrap();
    let err = out.data().iter().zip(img.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure!(err < 1e-9, "fourier_perturb(gamma=0) deviates by {err:e}");
    lines.push(format!("gamma=0 err {err:.1e}"));
    Ok(lines.join(", "))
}

fn composition_frequencies() -> Outcome {
    let n = 100_000;
    let mut rng = RandomStream::new(2024, 0);
    let mut blur_noise = 0usize;
    let mut light = 0usize;
    let mut sizes = [0usize; 8];
    for _ in 0..n {
        let s = draw_training_degradation(&mut rng);
        blur_noise += s.applied_blur_noise as usize;
        light += s.applied_light_path as usize;
        let i = TRAINING_BLUR_SIZES.iter().position(|&k| k == s.blur_k).unwrap();
        sizes[i] += 1;
    }
    let fb = blur_noise as f64 / n as f64;
    let fl = light as f64 / n as f64;
    ensure!((fb - 0.55).abs() <= 0.01, "blur->noise frequency {fb}");
    ensure!((fl - 0.45).abs() <= 0.01, "light path frequency {fl}");
    for (k, &c) in TRAINING_BLUR_SIZES.iter().zip(&sizes) {
        let f = c as f64 / n as f64;
        ensure!((f - 0.125).abs() <= 0.015, "blur_k={k} frequency {f}");
    }
    Ok(format!("blur->noise {fb:.4}, light {fl:.4}, blur_k counts {sizes:?}"))
}

fn resolution_metrics() -> Outcome {
    let tri = Profile::new((0..101).map(|x| (1.0 - (x as f64 - 50.0).abs() / 20.0).max(0.0)).collect()).unwrap();
    let f = fwhm(&tri).unwrap();
    ensure!((f - 20.0).abs() <= 0.1, "triangle FWHM {f}");

    for w in [1usize, 2, 5, 13] {
        let mut v = vec![0.0; 40];
        v[10..10 + w].iter_mut().for_each(|x| *x = 1.0);
        let f = fwhm(&Profile::new(v).unwrap()).unwrap();
        ensure!((f - w as f64).abs() <= 0.1, "rect width {w}: FWHM {f}");
    }

    let sp = 10.0;
    let gauss = Profile::new((0..101).map(|x| (-(x as f64 - 50.0).powi(2) / (2.0 * sp * sp)).exp()).collect()).unwrap();
    let want = 2.0 * (2.0 * 2f64.ln()).sqrt() * sp;
    let f = fwhm(&gauss).unwrap();
    ensure!((f - want).abs() <= 0.1, "gaussian FWHM {f} vs {want}");

    let mono = Profile::new((0..10).map(|x| x as f64 / 9.0).collect()).unwrap();
    ensure!(fwhm(&mono).is_none(), "monotone profile must have no FWHM");

    ensure!(grad_stats(&Profile::new(vec![0.4; 9]).unwrap()) == (0.0, 0.0), "constant grad");
    let ramp = Profile::new((0..33).map(|i| i as f64 / 64.0).collect()).unwrap();
    ensure!(grad_stats(&ramp) == (1.0 / 64.0, 1.0 / 64.0), "ramp grad {:?}", grad_stats(&ramp));
    let step = Profile::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
    let (gm, gx) = grad_stats(&step);
    ensure!(gx == 0.5 && gm == 1.0 / 6.0, "step grad ({gm}, {gx})");

    ensure!(contrast(&Profile::new(vec![0.0, 1.0, 0.5]).unwrap()) == Some(1.0), "contrast 0/1");
    ensure!(contrast(&Profile::new(vec![0.3; 5]).unwrap()) == Some(0.0), "contrast constant");
    let c = contrast(&Profile::new(vec![0.05, 0.95, 0.5]).unwrap()).unwrap();
    ensure!((c - 0.9).abs() < 1e-12, "contrast 0.05/0.95 = {c}");
    ensure!(contrast(&Profile::new(vec![0.0; 4]).unwrap()).is_none(), "all-zero contrast");

    let img = GrayImage::from_fn(6, 4, |_, c| if c < 2 { 0.2 } else { 0.4 }).unwrap();
    let roi = RoiSpec {
        row_range: (1, 5),
        col_range: (1, 3),
        profile_axis: ProfileAxis::AlongRows,
    };
    let p = extract_profile(&img, &roi).unwrap();
    ensure!(
        p.len() == 4 && p.samples().iter().all(|v| (v - 0.3).abs() < 1e-15),
        "ROI profile {:?}",
        p.samples()
    );
    Ok(format!("triangle {:.3}, gaussian {:.3} (closed form {want:.3})", fwhm(&tri).unwrap(), f))
}

fn nllr_efficacy() -> Outcome {
    let clean = phantom(128, 0);
    let params = NllrParams::default();
    let mut gains = Vec::new();
    let mut worst_mean: f64 = 0.0;
    for seed in 0..20 {
        let noisy = speckle(&clean, 5.0, &mut RandomStream::new(seed, 5)).unwrap();
        let out = nllr_denoise(&noisy, &params).unwrap();
        gains.push(psnr(&clean, &out).unwrap() - psnr(&clean, &noisy).unwrap());
        worst_mean = worst_mean.max((out.mean() / noisy.mean() - 1.0).abs());
    }
    let gain = gains.iter().sum::<f64>() / gains.len() as f64;
    ensure!(gain >= 3.0, "mean PSNR gain {gain:.2} dB < 3 dB");
    ensure!(worst_mean <= 0.02, "output mean off by {:.2}%", 100.0 * worst_mean);
    for v in [0.0, 0.37, 1.0] {
        let flat = GrayImage::filled(40, 52, v).unwrap();
        let out = nllr_denoise(&flat, &params).unwrap();
        let err = out.data().iter().map(|x| (x - v).abs()).fold(0.0, f64::max);
        ensure!(err <= 1e-9, "constant {v} drifts by {err:e}");
    }
    Ok(format!(
        "mean gain {gain:.2} dB (min {:.2}), max mean shift {:.3}%",
        gains.iter().cloned().fold(f64::INFINITY, f64::min),
        100.0 * worst_mean
    ))
}

fn deblur_sanity() -> Outcome {
    // three vertical bars, the middle one isolated by the ROI
    let img = GrayImage::from_fn(64, 64, |_, c| {
        if (20..23).contains(&c) || (31..34).contains(&c) || (42..45).contains(&c) {
            0.9
        } else {
            0.1
        }
    })
    .unwrap();
    let kernel = gaussian_kernel(7).unwrap();
    let blurred = blur(&img, &kernel);
    let restored = wiener_deblur(&blurred, &kernel, 0.01).unwrap();
    let roi = RoiSpec {
        row_range: (16, 48),
        col_range: (26, 39),
        profile_axis: ProfileAxis::AlongCols,
    };
    let pb = extract_profile(&blurred, &roi).unwrap();
    let pr = extract_profile(&restored, &roi).unwrap();
    let (fb, fr) = (fwhm(&pb).ok_or("blurred FWHM undefined")?, fwhm(&pr).ok_or("restored FWHM undefined")?);
    let (gb, gr) = (grad_stats(&pb).1, grad_stats(&pr).1);
    ensure!(fr < fb, "FWHM {fb:.3} -> {fr:.3} not reduced");
    ensure!(gr > gb, "GradMax {gb:.3} -> {gr:.3} not increased");
    Ok(format!("FWHM {fb:.3} -> {fr:.3}, GradMax {gb:.3} -> {gr:.3}"))
}

fn csv_bytes(images: &[(String, GrayImage)], spec: &LadderSpec, seed: u64, threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let report = pool.install(|| run_ladder(images, spec, seed)).unwrap();
    let mut out = Vec::new();
    write_csv(&report, &mut out).unwrap();
    out
}

fn ladder_monotonicity() -> Outcome {
    let images: Vec<(String, GrayImage)> = (0..5).map(|i| (format!("phantom{i}"), phantom(64, i))).collect();
    let mut lines = Vec::new();
    for (kind, mut spec) in default_ladders() {
        spec.seeds_per_image = 20;
        let report = run_ladder(&images, &spec, 77).map_err(|e| e.to_string())?;
        ensure!(report.rows.iter().all(|r| r.error.is_none()), "{kind:?}: row errors");
        let levels = usdegrade::bench::aggregate(&report);
        let means: Vec<f64> = levels.iter().map(|l| l.psnr_in.mean.unwrap()).collect();
        let ok = match kind {
            LadderKind::Gaussian | LadderKind::Blur => means.windows(2).all(|w| w[1] <= w[0]),
            LadderKind::Speckle => means.windows(2).all(|w| w[1] >= w[0]),
        };
        ensure!(ok, "{kind:?} mean PSNR not monotone: {means:.2?}");
        ensure!(
            report.rows.iter().all(|r| r.psnr_in == r.psnr_out),
            "{kind:?}: identity restorer changed PSNR"
        );
        let one = csv_bytes(&images, &spec, 77, 1);
        let four = csv_bytes(&images, &spec, 77, 4);
        ensure!(one == four, "{kind:?}: CSV differs between 1 and 4 threads");
        lines.push(format!("{} {:.1}..{:.1} dB", kind.as_str(), means[1], means[means.len() - 1]));
    }
    Ok(lines.join(", "))
}

struct Tee {
    dir: DirSink,
    kept: Vec<Pair>,
}

impl PairSink for Tee {
    fn accept(&mut self, pair: Pair) -> usdegrade::Result<()> {
        self.dir.accept(pair.clone())?;
        self.kept.push(pair);
        Ok(())
    }
}

fn pair_replay() -> Outcome {
    let sources: Vec<SourceImage> = (0..10)
        .map(|i| SourceImage {
            id: format!("src{i}"),
            kind: if i % 2 == 0 { SourceKind::Natural } else { SourceKind::Ultrasound },
            image: if i % 2 == 0 {
                phantom(96, i)
            } else {
                speckle(&phantom(96, i), 4.0, &mut RandomStream::new(i as u64, 9)).unwrap()
            },
        })
        .collect();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut sink = Tee {
        dir: DirSink::new(tmp.path()).map_err(|e| e.to_string())?,
        kept: Vec::new(),
    };
    let summary =
        emit_pair_dataset(&sources, 20, 123, &PairConfig::default(), &mut sink).map_err(|e| e.to_string())?;
    ensure!(summary.pairs == 200 && summary.failures.is_empty(), "summary {summary:?}");
    let mut exact = 0;
    for pair in &sink.kept {
        let stem = DirSink::stem(&pair.record);
        let json = std::fs::read_to_string(tmp.path().join(format!("{stem}_spec.json"))).map_err(|e| e.to_string())?;
        let record: PairRecord = serde_json::from_str(&json).map_err(|e| e.to_string())?;
        let src = sources.iter().find(|s| s.id == record.source_id).ok_or("unknown source id")?;
        let (input, target) = replay_pair(&src.image, &record).map_err(|e| e.to_string())?;
        let on_disk_in = load_image(tmp.path().join(format!("{stem}_input.png"))).map_err(|e| e.to_string())?;
        let on_disk_tg = load_image(tmp.path().join(format!("{stem}_target.png"))).map_err(|e| e.to_string())?;
        if input == pair.input
            && target == pair.target
            && to_bytes(&input) == to_bytes(&on_disk_in)
            && to_bytes(&target) == to_bytes(&on_disk_tg)
        {
            exact += 1;
        }
    }
    ensure!(exact == 200, "{exact}/200 triples replayed bit-exactly");
    Ok("200/200 triples replayed bit-exactly".into())
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("AC1 metric oracles", 10, metric_oracles),
        ("AC2 fft correctness", 5, fft_correctness),
        ("AC3 noise statistics", 30, noise_statistics),
        ("AC4 composition frequencies", 10, composition_frequencies),
        ("AC5 resolution metrics", 5, resolution_metrics),
        ("AC6 nllr efficacy", 120, nllr_efficacy),
        ("AC7 deblurring sanity", 10, deblur_sanity),
        ("AC8 ladder monotonicity and determinism", 300, ladder_monotonicity),
        ("AC9 pair-dataset replay", 120, pair_replay),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{msg}; took {:.1}s, limit {limit}s", elapsed.as_secs_f64()))
            }
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS {name} [{:.2}s] {msg}", elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name} [{:.2}s] {msg}", elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
