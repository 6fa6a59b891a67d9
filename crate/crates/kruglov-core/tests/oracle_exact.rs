//! Cross-checks of the float pipeline against the exact rational backend
//! on small lattice instances.

use kruglov_core::constants;
use kruglov_core::dist::DiscreteLaw;
use kruglov_core::exact::{self, rat, ExactLaw};
use kruglov_core::kruglov;
use kruglov_core::spaces::SpaceSpec;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// A lattice law on values k/4 with masses j/16, in both backends.
fn lattice_pair() -> (DiscreteLaw, ExactLaw) {
    let spec: &[(i64, i64)] = &[(-2, 3), (0, 6), (1, 5), (3, 2)];
    let float_pairs: Vec<(f64, f64)> = spec
        .iter()
        .map(|&(k, j)| (k as f64 / 4.0, j as f64 / 16.0))
        .collect();
    let exact_pairs: Vec<(BigRational, BigRational)> = spec
        .iter()
        .map(|&(k, j)| (rat(k, 4), rat(j, 16)))
        .collect();
    (
        DiscreteLaw::from_pairs(float_pairs).unwrap(),
        ExactLaw::from_pairs(exact_pairs).unwrap(),
    )
}

#[test]
fn convolution_powers_match_exact_backend() {
    let (f, e) = lattice_pair();
    for n in [2_u64, 4, 8] {
        let float_law = f.convolve_power(n, 0.0);
        let exact_law = e.convolve_power(n).to_float().unwrap();
        let ks = DiscreteLaw::kolmogorov_distance(&float_law, &exact_law);
        assert!(ks <= 1e-12, "n={n}: ks={ks}");
        let m_float = float_law.abs_moment(2.0);
        let m_exact = exact_law.abs_moment(2.0);
        assert!(
            (m_float - m_exact).abs() <= 1e-12 * (1.0 + m_exact),
            "n={n}: second moments {m_float} vs {m_exact}"
        );
    }
}

#[test]
fn poissonization_matches_exact_mirror() {
    let (f, e) = lattice_pair();
    for n in [1_u64, 2, 3, 4] {
        let float_h = kruglov::finite_poissonization(&f, n).unwrap();
        // Exact mirror: thin by 1/n, then convolve n times.
        let ni = i64::try_from(n).unwrap();
        let zero = ExactLaw::delta(rat(0, 1));
        let thinned =
            ExactLaw::mixture(&[(rat(ni - 1, ni), &zero), (rat(1, ni), &e)]).unwrap();
        let exact_h = thinned.convolve_power(n).to_float().unwrap();
        let ks = DiscreteLaw::kolmogorov_distance(&float_h, &exact_h);
        assert!(ks <= 1e-12, "n={n}: ks={ks}");
    }
}

#[test]
fn binomial_tails_match_exact_rationals() {
    for n in 1..=8_u32 {
        for &(num, den) in &[(1_i64, 1_i64), (1, 2), (1, 4)] {
            let u = num as f64 / den as f64;
            let float_out = constants::binomial_extremal(n, u).unwrap();
            let exact_tails = ExactLaw::binomial_tails(n, rat(num, den)).unwrap();
            assert_eq!(float_out.tails.len(), exact_tails.len());
            for (k, (ft, et)) in float_out.tails.iter().zip(&exact_tails).enumerate() {
                let ev = et.to_f64().unwrap();
                assert!(
                    (ft - ev).abs() <= 1e-13,
                    "n={n} u={u} tail {k}: {ft} vs {ev}"
                );
            }
            let exact_profile = exact::extremal_profile(n, rat(num, den)).unwrap();
            let float_profile_pairs = float_out.profile.to_pairs();
            let exact_pairs = exact_profile.to_float().unwrap().to_pairs();
            assert_eq!(float_profile_pairs.len(), exact_pairs.len(), "n={n} u={u}");
            for ((fl, fv), (el, ev)) in float_profile_pairs.iter().zip(&exact_pairs) {
                assert!((fl - el).abs() <= 1e-13, "n={n} u={u} lengths");
                assert!((fv - ev).abs() <= 1e-13, "n={n} u={u} values");
            }
        }
    }
}

#[test]
fn exact_lp_power_matches_float_norm() {
    for n in [2_u32, 4, 6] {
        let profile = exact::extremal_profile(n, rat(1, 1)).unwrap();
        let exact_sq = profile.lp_pow(2).to_f64().unwrap().sqrt();
        let float_norm = SpaceSpec::lp(2.0)
            .unwrap()
            .norm(&profile.to_float().unwrap())
            .unwrap();
        assert!(
            (exact_sq - float_norm).abs() <= 1e-12 * (1.0 + exact_sq),
            "n={n}: {exact_sq} vs {float_norm}"
        );
    }
}

#[test]
fn quantile_step_matches_exact_computation() {
    let (f, e) = lattice_pair();
    let fq = f.abs_law().quantile_step();
    let eq = e.quantile_step();
    let ef = eq.to_float().unwrap();
    assert!(fq.sup_abs_diff(&ef) <= 1e-13);
}
