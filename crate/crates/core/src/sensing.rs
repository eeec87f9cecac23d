//! Per-CR energy measurement and the report each CR sends to the fusion center.

use serde::{Deserialize, Serialize};

use crate::channel::SampleBlock;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingReport {
    pub energy: f64,
    pub est_noise_variance: f64,
    /// Carried for MRC weighting.
    pub instantaneous_snr: f64,
    /// 1-based CR index.
    pub cr_index: usize,
}

/// `Σ|y(n)|²` over the whole block, not normalised by length or noise level.
pub fn measure_energy(block: &SampleBlock) -> f64 {
    block.samples.iter().map(|y| y.norm_sqr()).sum()
}

/// Bundles the measured energy with the CR's (genie) noise-variance estimate.
pub fn make_report(block: &SampleBlock, cr_index: usize) -> SensingReport {
    SensingReport {
        energy: measure_energy(block),
        est_noise_variance: block.true_noise_variance,
        instantaneous_snr: block.channel.instantaneous_snr,
        cr_index,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        draw_noise_variance, gen_pu_samples, synthesize_received, ChannelDraw, EnergySampler,
        Hypothesis, NoiseModel,
    };
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn block(samples: Vec<Complex64>) -> SampleBlock {
        SampleBlock {
            samples,
            true_hypothesis: Hypothesis::H0,
            true_noise_variance: 0.9,
            channel: ChannelDraw {
                gain: Complex64::new(0.3, -0.1),
                instantaneous_snr: 0.05,
            },
        }
    }

    #[test]
    fn zero_and_unit_modulus_blocks() {
        assert_eq!(measure_energy(&block(vec![Complex64::new(0.0, 0.0); 10])), 0.0);
        let b = block(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ]);
        assert_eq!(measure_energy(&b), 4.0);
    }

    #[test]
    fn report_passthrough() {
        let b = block(vec![Complex64::new(0.0, 0.0); 4]);
        let r = make_report(&b, 3);
        assert_eq!(r.energy, 0.0);
        assert_eq!(r.est_noise_variance, 0.9);
        assert_eq!(r.instantaneous_snr, b.channel.instantaneous_snr);
        let r2 = make_report(&b, 5);
        assert_eq!(
            SensingReport { cr_index: 3, ..r2 },
            r,
            "reports differ only in cr_index"
        );
    }

    // H0 energy over N = 1000 real degrees of freedom has mean Nσ² and
    // variance 2Nσ⁴.
    #[test]
    fn h0_energy_moments_sample_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pu = gen_pu_samples(500, &mut rng).unwrap();
        let trials = 100_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..trials {
            let b = synthesize_received(Hypothesis::H0, ChannelDraw::silent(), &pu, 1.0, &mut rng)
                .unwrap();
            let e = measure_energy(&b);
            s1 += e;
            s2 += e * e;
        }
        let mean = s1 / trials as f64;
        let var = s2 / trials as f64 - mean * mean;
        let tol = 3.0 * (2.0 * 1000.0 / trials as f64).sqrt();
        assert!((mean - 1000.0).abs() < tol, "mean {mean}");
        // sample variance of χ²_1000·: sd(var) ≈ var·sqrt(2/n)·(1 + small kurtosis term)
        assert!((var / 2000.0 - 1.0).abs() < 3.0 * (2.2 / trials as f64).sqrt(), "var {var}");
    }

    #[test]
    fn h1_energy_moments_sample_level() {
        // fixed γ at −15 dB; mean Nσ²(γ+1), variance ≈ 2Nσ⁴(γ+1)²
        let gamma = 10f64.powf(-1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pu = gen_pu_samples(500, &mut rng).unwrap();
        let ch = ChannelDraw::fixed(gamma, 1.0);
        let trials = 100_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..trials {
            let b = synthesize_received(Hypothesis::H1, ch, &pu, 1.0, &mut rng).unwrap();
            let e = measure_energy(&b);
            s1 += e;
            s2 += e * e;
        }
        let mean = s1 / trials as f64;
        let var = s2 / trials as f64 - mean * mean;
        let want_mean = 1000.0 * (1.0 + gamma);
        let want_var = 2000.0 * (1.0 + gamma).powi(2);
        assert!(
            (mean - want_mean).abs() < 3.0 * (want_var / trials as f64).sqrt(),
            "mean {mean} vs {want_mean}"
        );
        assert!(
            (var / want_var - 1.0).abs() < 3.0 * (2.2 / trials as f64).sqrt(),
            "var {var} vs {want_var}"
        );
    }

    fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    // 1% critical value of the two-sample KS statistic for equal sizes n.
    fn ks_critical(n: usize) -> f64 {
        1.628 * (2.0 / n as f64).sqrt()
    }

    #[test]
    fn zero_gain_h1_matches_h0_in_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let pu = gen_pu_samples(50, &mut rng).unwrap();
        let n = 20_000;
        let zero = ChannelDraw::silent();
        let h0: Vec<f64> = (0..n)
            .map(|_| measure_energy(&synthesize_received(Hypothesis::H0, zero, &pu, 1.0, &mut rng).unwrap()))
            .collect();
        let h1: Vec<f64> = (0..n)
            .map(|_| measure_energy(&synthesize_received(Hypothesis::H1, zero, &pu, 1.0, &mut rng).unwrap()))
            .collect();
        assert!(ks_statistic(h0, h1) < ks_critical(n));
    }

    // The statistic-level sampler must reproduce the sample-level energy law.
    #[test]
    fn energy_sampler_matches_sample_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let model = NoiseModel::new(1.0, 1.0).unwrap();
        let sampler = EnergySampler::new(100).unwrap();
        let n = 20_000;
        for hyp in [Hypothesis::H0, Hypothesis::H1] {
            let ch = ChannelDraw::fixed(0.2, 1.0);
            let slow: Vec<f64> = (0..n)
                .map(|_| {
                    let pu = gen_pu_samples(50, &mut rng).unwrap();
                    let v = draw_noise_variance(&model, &mut rng);
                    measure_energy(&synthesize_received(hyp, ch, &pu, v, &mut rng).unwrap())
                })
                .collect();
            let fast: Vec<f64> = (0..n)
                .map(|_| {
                    let v = draw_noise_variance(&model, &mut rng);
                    sampler.sample(hyp, &ch, v, &mut rng)
                })
                .collect();
            let d = ks_statistic(slow, fast);
            assert!(d < ks_critical(n), "{hyp:?}: KS {d}");
        }
    }

    proptest! {
        #[test]
        fn energy_permutation_and_scaling(
            xs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..64),
            c in -3.0f64..3.0,
            rot in 0usize..64,
        ) {
            let samples: Vec<Complex64> = xs.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
            let e = measure_energy(&block(samples.clone()));
            let mut rotated = samples.clone();
            let len = rotated.len();
            rotated.rotate_left(rot % len);
            rotated.reverse();
            let e_perm = measure_energy(&block(rotated));
            prop_assert!((e - e_perm).abs() <= 1e-12 * e.max(1.0));
            let scaled: Vec<Complex64> = samples.iter().map(|y| y * c).collect();
            let e_scaled = measure_energy(&block(scaled));
            prop_assert!((e_scaled - c * c * e).abs() <= 1e-12 * (c * c * e).max(1.0));
            let split = len / 2;
            let a = measure_energy(&block(samples[..split].to_vec()));
            let b = measure_energy(&block(samples[split..].to_vec()));
            prop_assert!((a + b - e).abs() <= 1e-12 * e.max(1.0));
        }
    }
}
