use mienf::estimators::{
    estimate_gaussian_closed_form, estimate_ksg, fit_full_mienf, fit_tridiag_mienf, TrainConfig,
};
use mienf::rng::derive_seed;
use mienf::synthetic::{apply_mapping, gen_correlated_gaussian, Allocation, MappingKind};
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "c8".into());
    match which.as_str() {
        "c8" => c8(),
        "c9" => c9(),
        "c10" => c10(),
        _ => panic!("unknown"),
    }
}

fn c8() {
    // invariance margins: d=4, MI=2, 4 repeats; schedule from argv
    let epochs: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(300);
    let n: usize = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let lr_init: f64 = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(5e-4);
    let lr_final: f64 = std::env::args().nth(5).and_then(|s| s.parse().ok()).unwrap_or(1e-5);
    let cfg_for = |seed: u64| TrainConfig { seed, epochs, lr_init, lr_final, ..TrainConfig::default() };
    for map in [MappingKind::Identity, MappingKind::Asinh, MappingKind::GaussianCdf] {
        let mut ests = Vec::new();
        let t0 = Instant::now();
        for rep in 0..4u64 {
            let pair =
                gen_correlated_gaussian(4, 2.0, &Allocation::Equal, n, derive_seed(100, rep))
                    .unwrap();
            let mapped = apply_mapping(&pair, map, 7).unwrap();
            let r = fit_tridiag_mienf(&mapped.x, &mapped.y, &cfg_for(derive_seed(200, rep))).unwrap();
            ests.push(r.estimate);
        }
        let mean = ests.iter().sum::<f64>() / ests.len() as f64;
        let sd = (ests.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / 3.0).sqrt();
        println!("{map:?}: mean {mean:.4} std {sd:.4} ests {ests:?} secs {:.0}", t0.elapsed().as_secs_f64());
    }
}

fn c9() {
    // KSG on the bivariate grid and on d=16 uniform at MI=10
    let t0 = Instant::now();
    let mut sq = 0.0;
    for (i, mi) in [0.0, 0.5, 1.0, 1.5, 2.0].iter().enumerate() {
        let pair =
            gen_correlated_gaussian(1, *mi, &Allocation::Equal, 10_000, 300 + i as u64).unwrap();
        let est = estimate_ksg(&pair.x, &pair.y, 3).unwrap();
        sq += (est - mi) * (est - mi);
        println!("mi {mi}: ksg {est:.4}");
    }
    println!("grid rmse {:.4} secs {:.0}", (sq / 5.0f64).sqrt(), t0.elapsed().as_secs_f64());
    let pair = gen_correlated_gaussian(16, 10.0, &Allocation::Equal, 10_000, 400).unwrap();
    let uniform = apply_mapping(&pair, MappingKind::GaussianCdf, 0).unwrap();
    let t0 = Instant::now();
    let est = estimate_ksg(&uniform.x, &uniform.y, 3).unwrap();
    println!("d=16 mi=10 uniform: ksg {est:.4} secs {:.0}", t0.elapsed().as_secs_f64());
}

fn c10() {
    // independence null at joint dims 2 and 16
    for d in [1usize, 8] {
        let pair = gen_correlated_gaussian(d, 0.0, &Allocation::Equal, 10_000, 500 + d as u64)
            .unwrap();
        let cf = estimate_gaussian_closed_form(&pair.x, &pair.y).unwrap();
        let ksg = estimate_ksg(&pair.x, &pair.y, 3).unwrap();
        let t0 = Instant::now();
        let cfg = TrainConfig { seed: 1, ..TrainConfig::default() };
        let tri = fit_tridiag_mienf(&pair.x, &pair.y, &cfg).unwrap();
        let full = fit_full_mienf(&pair.x, &pair.y, &cfg).unwrap();
        println!(
            "d={d}: closed {cf:.4} ksg {ksg:.4} tridiag {:.4} full {:.4} secs {:.0}",
            tri.estimate,
            full.estimate,
            t0.elapsed().as_secs_f64()
        );
    }
}
