use grou::catalog;
use grou::density::{level_set, normalization, total_mass};
use grou::diagnostics::{acceptance_rate_ci, chi_square_binned};
use grou::regions::{region_grou, region_trs_inverse};
use grou::samplers::{sample_uniform_region_with, sample_with, GrouSampler, KhintchineSampler};
use grou::transforms::{self, push_forward_density, GrouConfig};
use grou::{AcceptanceStats, RngStream};
use proptest::prelude::*;

fn transform_by_index(i: usize) -> grou::MonotoneTransform {
    match i {
        0 => transforms::identity(),
        1 => transforms::half_square(),
        2 => transforms::sqrt2u(),
        3 => transforms::arctan(),
        4 => transforms::mobius(),
        5 => transforms::sqrt_mobius(),
        _ => transforms::power(0.5),
    }
}

/// Maps `t` in (0, 1) to an interior point of the domain.
fn interior_point(s: grou::Support, t: f64) -> f64 {
    match (s.lower.is_finite(), s.upper.is_finite()) {
        (true, true) => s.lower + t * (s.upper - s.lower),
        (true, false) => s.lower + t / (1.0 - t),
        (false, true) => s.upper - (1.0 - t) / t,
        (false, false) => (t - 0.5) / (t * (1.0 - t)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transforms_round_trip(i in 0usize..7, t in 0.01f64..0.99) {
        let g = transform_by_index(i);
        let u = interior_point(g.domain(), t);
        let back = g.inverse(g.eval(u));
        prop_assert!((back - u).abs() <= 1e-9 * (1.0 + u.abs()), "{}: {u} -> {back}", g.name());
        let h = 1e-6 * (1.0 + u.abs());
        let fd = (g.eval(u + h) - g.eval(u - h)) / (2.0 * h);
        prop_assert!((fd - g.derivative(u)).abs() <= 1e-5 * (1.0 + fd.abs()), "{}: {fd} vs {}", g.name(), g.derivative(u));
    }

    #[test]
    fn level_set_is_the_superlevel_set(frac in 0.01f64..0.99, x in -3.0f64..3.0) {
        let pieces = catalog::bimodal_pieces();
        let p = pieces.density();
        let y = frac * pieces.supremum();
        let set = level_set(&pieces, y, 1e-12).unwrap();
        let inside = set.iter().any(|iv| iv.contains(x));
        let near_edge = set.iter().any(|iv| (iv.lo - x).abs() < 1e-7 || (iv.hi - x).abs() < 1e-7);
        prop_assume!(!near_edge);
        prop_assert_eq!(inside, p.value(x) >= y, "x = {}, y = {}", x, y);
    }

    #[test]
    fn output_does_not_depend_on_worker_count(seed in any::<u64>(), n in 1usize..10_000, k in 2usize..6) {
        let t = catalog::target("exponential").unwrap();
        let s = KhintchineSampler::new(t.vertical_sampler.clone().unwrap(), 0.0, false);
        let rng = RngStream::new(seed, 3);
        let one = sample_with(&s, &rng, n, 1).unwrap();
        let many = sample_with(&s, &rng, n, k).unwrap();
        prop_assert_eq!(&one.values, &many.values);
        prop_assert_eq!(one.stats, many.stats);
        prop_assert_eq!(one.values.len(), n);
    }

    #[test]
    fn grou_points_are_deterministic(seed in any::<u64>(), k in 1usize..4) {
        let g = GrouSampler::new(&catalog::gaussian(), &GrouConfig::standard_rou()).unwrap();
        let rng = RngStream::new(seed, 0);
        let a = sample_uniform_region_with(g.region(), &rng, 5000, k).unwrap();
        let b = sample_uniform_region_with(g.region(), &rng, 5000, 1).unwrap();
        prop_assert_eq!(a.points, b.points);
    }

    #[test]
    fn wilson_interval_brackets_and_shrinks(accepted in 0u64..1000, extra in 0u64..1000, scale in 2u64..50) {
        let stats = AcceptanceStats { proposed: accepted + extra.max(1), accepted };
        let a = acceptance_rate_ci(stats, 0.95).unwrap();
        prop_assert!(0.0 <= a.ci_low && a.ci_low <= a.rate && a.rate <= a.ci_high && a.ci_high <= 1.0);
        let big = AcceptanceStats { proposed: stats.proposed * scale, accepted: stats.accepted * scale };
        let b = acceptance_rate_ci(big, 0.95).unwrap();
        prop_assert!(b.ci_high - b.ci_low <= a.ci_high - a.ci_low + 1e-15);
        let wide = acceptance_rate_ci(stats, 0.99).unwrap();
        prop_assert!(wide.ci_low <= a.ci_low && wide.ci_high >= a.ci_high);
    }

    #[test]
    fn p_value_falls_as_deviation_grows(d1 in 0u64..200, d2 in 0u64..200) {
        let (lo, hi) = (d1.min(d2), d1.max(d2));
        let probs = [0.25; 4];
        let counts = |d: u64| [250 + d, 250 - d, 250, 250];
        let a = chi_square_binned(&counts(lo), &probs);
        let b = chi_square_binned(&counts(hi), &probs);
        prop_assert!(a.statistic <= b.statistic);
        prop_assert!(a.p_value >= b.p_value);
        prop_assert!((0.0..=1.0).contains(&b.p_value));
    }

    #[test]
    fn push_forward_keeps_mass(rate in 0.5f64..3.0, which in 0usize..2) {
        let p = catalog::exponential(rate);
        let t = if which == 0 { transforms::mobius() } else { transforms::arctan() };
        let rho = push_forward_density(&p, &t).unwrap();
        let m = normalization(&rho, 256).unwrap();
        let want = total_mass(&p).unwrap();
        prop_assert!((m - want).abs() < 1e-6 * want, "{m} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn grou_and_trs_inverse_agree_off_the_boundary(c in 0.3f64..3.0, seed in any::<u64>()) {
        let pieces = catalog::half_gaussian_pieces(1.0);
        let cfg = GrouConfig::new(transforms::half_square(), c).unwrap();
        let a = region_grou(pieces.density(), &cfg).unwrap();
        let b = region_trs_inverse(&pieces, &cfg).unwrap();
        let r = a.rect().union(&b.rect());
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..2000 {
            let v = rng.uniform_in(r.v_min, r.v_max);
            let u = rng.uniform_in(r.u_min, r.u_max);
            if a.contains(v, u) == b.contains(v, u) {
                continue;
            }
            let h = 1e-7 * (1.0 + v.abs() + u.abs());
            let flips = [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)]
                .iter()
                .any(|&(dv, du)| a.contains(v + dv, u + du) != a.contains(v, u));
            prop_assert!(flips, "disagreement away from the boundary at ({v}, {u})");
        }
    }
}
