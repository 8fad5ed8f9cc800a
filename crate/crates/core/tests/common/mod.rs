//! Independent reference implementations and fixtures shared by the
//! integration tests. Nothing here calls the library's numeric code.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use usdegrade::nllr::NllrParams;
use usdegrade::{GrayImage, RandomStream};

pub fn random_image(h: usize, w: usize, seed: u64) -> GrayImage {
    let mut rng = RandomStream::new(seed, 0);
    GrayImage::from_fn(h, w, |_, _| rng.uniform(0.0, 1.0)).unwrap()
}

/// Disc, bar and square on a mid-grey background.
pub fn phantom(n: usize, variant: usize) -> GrayImage {
    let levels = [0.15, 0.35, 0.55, 0.75, 0.3];
    let bg = levels[variant % levels.len()];
    let f = n as f64;
    GrayImage::from_fn(n, n, |r, c| {
        let (y, x) = (r as f64 / f, c as f64 / f);
        let cx = 0.35 + 0.05 * variant as f64;
        if (y - 0.4).powi(2) + (x - cx).powi(2) < 0.04 {
            0.7
        } else if (0.72..0.82).contains(&y) && (0.15..0.85).contains(&x) {
            0.1
        } else if (0.1..0.3).contains(&y) && (0.65..0.9).contains(&x) {
            0.9 - 0.1 * variant as f64
        } else {
            bg
        }
    })
    .unwrap()
}

pub fn psnr_oracle(a: &GrayImage, b: &GrayImage) -> f64 {
    let mut se = 0.0;
    for r in 0..a.height() {
        for c in 0..a.width() {
            let d = 255.0 * a.get(r, c) - 255.0 * b.get(r, c);
            se += d * d;
        }
    }
    let mse = se / a.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

/// Explicit loops over every 7×7 valid window, two-pass unbiased statistics.
pub fn ssim_oracle(a: &GrayImage, b: &GrayImage) -> f64 {
    let n = 7;
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let (h, w) = a.dims();
    let mut total = 0.0;
    let mut count = 0;
    for r in 0..=h - n {
        for c in 0..=w - n {
            let mut xs = Vec::with_capacity(n * n);
            let mut ys = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    xs.push(255.0 * a.get(r + i, c + j));
                    ys.push(255.0 * b.get(r + i, c + j));
                }
            }
            let m = (n * n) as f64;
            let mx = xs.iter().sum::<f64>() / m;
            let my = ys.iter().sum::<f64>() / m;
            let vx = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / (m - 1.0);
            let vy = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / (m - 1.0);
            let cxy = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (m - 1.0);
            total += (2.0 * mx * my + c1) * (2.0 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    total / count as f64
}

/// Direct O(N⁴) forward DFT, row-major.
pub fn dft_oracle(img: &GrayImage) -> Vec<Complex64> {
    let (h, w) = img.dims();
    let mut out = vec![Complex64::new(0.0, 0.0); h * w];
    for u in 0..h {
        for v in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..h {
                for c in 0..w {
                    let phase = -2.0 * std::f64::consts::PI * ((u * r) as f64 / h as f64 + (v * c) as f64 / w as f64);
                    acc += img.get(r, c) * Complex64::from_polar(1.0, phase);
                }
            }
            out[u * w + v] = acc;
        }
    }
    out
}

fn grid(len: usize, p: usize, stride: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut x = 0;
    while x + p <= len {
        v.push(x);
        x += stride;
    }
    if *v.last().unwrap() != len - p {
        v.push(len - p);
    }
    v
}

fn haar_sigma(img: &[f64], h: usize, w: usize) -> f64 {
    let mut d = Vec::new();
    for r in 0..h - 1 {
        for c in 0..w - 1 {
            let a = img[r * w + c];
            let b = img[r * w + c + 1];
            let e = img[(r + 1) * w + c];
            let f = img[(r + 1) * w + c + 1];
            d.push(((a - b - e + f) / 2.0).abs());
        }
    }
    d.sort_by(f64::total_cmp);
    let n = d.len();
    let med = if n % 2 == 1 { d[n / 2] } else { (d[n / 2 - 1] + d[n / 2]) / 2.0 };
    med / 0.6745
}

/// Straightforward NLLR: exhaustive SSD search with a full sort, dense SVD
/// from nalgebra, weighted aggregation.
pub fn nllr_oracle(img: &GrayImage, params: &NllrParams) -> Vec<f64> {
    let (h, w) = img.dims();
    let p = params.patch_size;
    let k = params.group_size;
    let original: Vec<f64> = img.data().to_vec();
    let mut current = original.clone();
    for it in 0..params.iterations {
        let input: Vec<f64> = if it == 0 {
            original.clone()
        } else {
            current
                .iter()
                .zip(&original)
                .map(|(x, o)| ((1.0 - params.relax_delta) * x + params.relax_delta * o).clamp(0.0, 1.0))
                .collect()
        };
        let sigma = haar_sigma(&input, h, w);
        let tau = params.shrink_lambda * sigma * ((p * p).max(k) as f64).sqrt();
        let patch = |r: usize, c: usize| -> Vec<f64> {
            (0..p * p).map(|i| input[(r + i / p) * w + c + i % p]).collect()
        };
        let mut num = vec![0.0; h * w];
        let mut den = vec![0.0; h * w];
        for &r in &grid(h, p, params.stride) {
            for &c in &grid(w, p, params.stride) {
                let reference = patch(r, c);
                let rad = params.search_radius;
                let mut cands = Vec::new();
                for rr in r.saturating_sub(rad)..=(r + rad).min(h - p) {
                    for cc in c.saturating_sub(rad)..=(c + rad).min(w - p) {
                        if (rr, cc) == (r, c) {
                            continue;
                        }
                        let ssd: f64 = patch(rr, cc).iter().zip(&reference).map(|(a, b)| (a - b).powi(2)).sum();
                        cands.push((ssd, rr, cc));
                    }
                }
                cands.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
                let mut members = vec![(r, c)];
                members.extend(cands.iter().take(k - 1).map(|x| (x.1, x.2)));
                let mut i = 0;
                while members.len() < k {
                    members.push(members[i]);
                    i += 1;
                }
                let mut m = DMatrix::<f64>::zeros(p * p, k);
                let mut means = vec![0.0; k];
                for (j, &(rr, cc)) in members.iter().enumerate() {
                    let col = patch(rr, cc);
                    means[j] = col.iter().sum::<f64>() / (p * p) as f64;
                    for (i, v) in col.iter().enumerate() {
                        m[(i, j)] = v - means[j];
                    }
                }
                let svd = m.svd(true, true);
                let s = svd.singular_values.map(|s| (s - tau).max(0.0));
                let rank = svd.singular_values.iter().filter(|&&s| s > tau).count();
                let recon = svd.u.unwrap() * DMatrix::from_diagonal(&s) * svd.v_t.unwrap();
                let weight = 1.0 / (1.0 + rank as f64);
                for (j, &(rr, cc)) in members.iter().enumerate() {
                    for i in 0..p * p {
                        let idx = (rr + i / p) * w + cc + i % p;
                        num[idx] += weight * (recon[(i, j)] + means[j]);
                        den[idx] += weight;
                    }
                }
            }
        }
        current = num.iter().zip(&den).map(|(n, d)| (n / d).clamp(0.0, 1.0)).collect();
    }
    current
}
