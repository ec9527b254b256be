//! Bivariate normal upper-orthant probabilities.
//!
//! Drezner–Wesolowsky Gauss–Legendre integration with Genz's double-precision
//! modifications for `|r|` close to one.

use std::f64::consts::PI;

use crate::quantize::q_function;

// Gauss-Legendre (weight, abscissa) pairs on [-1, 1], negative half.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197_0),
];

const GL12: [(f64, f64); 6] = [
    (0.471_753_363_865_117_7e-1, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475_0),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305_0),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];

const GL20: [(f64, f64); 10] = [
    (0.176_140_071_391_521_2e-1, -0.993_128_599_185_094_9),
    (0.406_014_298_003_869_4e-1, -0.963_971_927_277_913_8),
    (0.626_720_483_341_090_6e-1, -0.912_234_428_251_325_9),
    (0.832_767_415_767_047_5e-1, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515_0),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.765_265_211_334_973_3e-1),
];

fn phi_cdf(x: f64) -> f64 {
    q_function(-x)
}

/// `P(X ≥ h, Y ≥ k)` for standard bivariate normal `(X, Y)` with correlation `r`.
pub fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY { 1.0 } else { q_function(k) };
    }
    if k == f64::NEG_INFINITY {
        return q_function(h);
    }
    let r = r.clamp(-1.0, 1.0);
    let quad: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };

    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;

    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for &(w, x) in quad {
            for sgn in [-1.0, 1.0] {
                let sn = (asr * (1.0 + sgn * x) / 2.0).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / (4.0 * PI) + q_function(h) * q_function(k);
        return bvn.clamp(0.0, 1.0);
    }

    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -(b_s / a_s + hk) / 2.0;
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if hk > -100.0 {
            let b = b_s.sqrt();
            let sp = (2.0 * PI).sqrt() * phi_cdf(-b / a);
            bvn -= (-hk / 2.0).exp() * sp * b * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a /= 2.0;
        for &(w, x) in quad {
            for sgn in [-1.0, 1.0] {
                let xs = (a + a * sgn * x).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -(b_s / xs + hk) / 2.0;
                if asr > -100.0 {
                    let sp = 1.0 + c * xs * (1.0 + d * xs);
                    let ep = (-hk * xs / (2.0 * (1.0 + rs).powi(2))).exp() / rs;
                    bvn += a * w * asr.exp() * (ep - sp);
                }
            }
        }
        bvn = -bvn / (2.0 * PI);
    }
    if r > 0.0 {
        bvn += q_function(h.max(k));
    } else if h >= k {
        bvn = -bvn;
    } else {
        let band = if h < 0.0 { phi_cdf(k) - phi_cdf(h) } else { q_function(h) - q_function(k) };
        bvn = band - bvn;
    }
    bvn.clamp(0.0, 1.0)
}
