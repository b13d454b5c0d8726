//! Statistical helpers: moments with standard errors and Kolmogorov–Smirnov
//! tests against the standard normal (one-sample) and between samples.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{HeisError, Result};

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let (mean, _) = mean_stderr(xs);
    if xs.len() < 2 {
        return 0.0;
    }
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    // Normal::new only fails for bad parameters; (0,1) is fine.
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// Survival function of the Kolmogorov distribution,
/// Q(t) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²t²}, with the theta-transformed series
/// for small t where the alternating form converges slowly.
pub fn kolmogorov_sf(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t < 1.18 {
        let x = (-std::f64::consts::PI * std::f64::consts::PI / (8.0 * t * t)).exp();
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / t
            * (x + x.powi(9) + x.powi(25) + x.powi(49));
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..101 {
        let term = (-2.0 * (k as f64) * (k as f64) * t * t).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test of `samples` against N(0,1). Uses the asymptotic
/// Kolmogorov law with the usual finite-n effective factor, accurate for the
/// sample sizes used here (≥ 10³).
pub fn ks_test_standard_normal(samples: &[f64]) -> Result<KsResult> {
    let n = samples.len();
    if n < 8 {
        return Err(HeisError::TooFewSamples { needed: 8, got: n });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite sample in KS test"));
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let cdf = standard_normal_cdf(*x);
        d = d.max((cdf - i as f64 / nf).abs());
        d = d.max(((i + 1) as f64 / nf - cdf).abs());
    }
    let sqrt_n = nf.sqrt();
    let p_value = kolmogorov_sf((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
    Ok(KsResult { statistic: d, p_value })
}

/// Two-sample KS test.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsResult> {
    if xs.len() < 8 || ys.len() < 8 {
        return Err(HeisError::TooFewSamples {
            needed: 8,
            got: xs.len().min(ys.len()),
        });
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).expect("non-finite sample in KS test"));
    b.sort_by(|p, q| p.partial_cmp(q).expect("non-finite sample in KS test"));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let xa = a[i];
        let xb = b[j];
        if xa <= xb {
            i += 1;
        }
        if xb <= xa {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let p_value = kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
    Ok(KsResult { statistic: d, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSpec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn kolmogorov_sf_reference_values() {
        // Q(0.8276) ≈ 0.5 (Kolmogorov distribution median) and the two series
        // branches agree where they meet.
        assert!((kolmogorov_sf(0.8276) - 0.5).abs() < 1e-3);
        let left = kolmogorov_sf(1.18 - 1e-12);
        let right = kolmogorov_sf(1.18 + 1e-12);
        assert!((left - right).abs() < 1e-9);
        assert!(kolmogorov_sf(2.0) < 7e-4);
    }

    #[test]
    fn ks_accepts_actual_gaussians_and_rejects_uniforms() {
        let mut rng = RngSpec::new(5, 0).rng();
        let gauss: Vec<f64> = (0..5000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let ks = ks_test_standard_normal(&gauss).unwrap();
        assert!(ks.p_value > 0.01, "genuine normals rejected: {ks:?}");

        let unif: Vec<f64> = (0..5000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ks = ks_test_standard_normal(&unif).unwrap();
        assert!(ks.p_value < 1e-6, "uniforms accepted: {ks:?}");
    }

    #[test]
    fn two_sample_ks_separates_scales() {
        let mut rng = RngSpec::new(6, 0).rng();
        let a: Vec<f64> = (0..4000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let b: Vec<f64> = (0..4000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let c: Vec<f64> = b.iter().map(|x| 1.3 * x).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01);
        assert!(ks_two_sample(&a, &c).unwrap().p_value < 1e-6);
    }

    #[test]
    fn mean_stderr_shrinks_like_sqrt_n() {
        let xs = vec![1.0, 2.0, 3.0, 4.0];
        let (m, se) = mean_stderr(&xs);
        assert_eq!(m, 2.5);
        let var = sample_variance(&xs);
        assert!((se - (var / 4.0).sqrt()).abs() < 1e-15);
    }
}
