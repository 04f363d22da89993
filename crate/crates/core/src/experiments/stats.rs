use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    /// Two-sided.
    pub p: f64,
    pub df: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
}

/// Paired t test on `a − b` with `n − 1` degrees of freedom.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::Dimension { expected: a.len(), got: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::Degenerate("paired t test needs at least two pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if d.iter().all(|&x| x == 0.0) {
        return Err(Error::Degenerate("all paired differences are zero".into()));
    }
    if var == 0.0 {
        return Err(Error::Degenerate("paired differences have zero variance".into()));
    }
    let sd = var.sqrt();
    let t = mean / (sd / n.sqrt());
    let df = d.len() - 1;
    Ok(TTest {
        t,
        p: student_t_two_sided(t, df as f64),
        df,
        mean_diff: mean,
        sd_diff: sd,
    })
}

/// `P(|T| ≥ |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5)
}

/// Lanczos approximation (g = 7, nine terms).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (k, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `I_x(a, b)` through the continued fraction evaluated with the modified
/// Lentz method, using the symmetry `I_x(a, b) = 1 − I_{1−x}(b, a)` where
/// the fraction converges slowly.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_fraction(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_fraction(1.0 - x, b, a) / b
    }
}

fn beta_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    #[test]
    fn worked_t_statistic() {
        let a = [1.1, 1.1, 1.1, 1.1, 1.2];
        let b = [1.0; 5];
        let r = paired_t_test(&a, &b).unwrap();
        assert!((r.mean_diff - 0.12).abs() < 1e-12);
        assert!((r.sd_diff - 0.044_721_36).abs() < 1e-8);
        assert!((r.t - 6.0).abs() < 1e-9);
        assert_eq!(r.df, 4);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(paired_t_test(&[0.3, 0.4], &[0.3, 0.4]).is_err());
        assert!(paired_t_test(&[1.5, 2.5, 3.5], &[1.0, 2.0, 3.0]).is_err());
        assert!(paired_t_test(&[0.4], &[0.3]).is_err());
        assert!(paired_t_test(&[0.4, 0.1], &[0.3]).is_err());
    }

    #[test]
    fn tail_matches_reference_distribution() {
        for &df in &[1.0, 2.0, 4.0, 9.0, 30.0, 999.0] {
            let dist = StudentsT::new(0.0, 1.0, df).unwrap();
            for &t in &[0.0, 0.1, 0.7, 1.5, 2.0, 3.3, 6.0, 12.0] {
                let oracle = 2.0 * (1.0 - dist.cdf(t));
                let ours = student_t_two_sided(t, df);
                assert!((ours - oracle).abs() <= 1e-6, "df {df} t {t}: {ours} vs {oracle}");
            }
        }
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-13);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn null_calibration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut above = 0;
        for _ in 0..100 {
            let a: Vec<f64> = (0..1000).map(|_| rng.random()).collect();
            let b: Vec<f64> = (0..1000).map(|_| rng.random()).collect();
            if paired_t_test(&a, &b).unwrap().p > 0.01 {
                above += 1;
            }
        }
        assert!(above >= 95, "{above}");
    }
}
