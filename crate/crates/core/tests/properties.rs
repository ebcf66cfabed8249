use std::sync::OnceLock;

use proptest::prelude::*;
use pulled_saw::enumerate::{enumerate, WalkClass};
use pulled_saw::lattice::{LatticePoint, Walk};
use pulled_saw::phase::{decide_phase, Phase};
use pulled_saw::thermo::{evaluate_partition, moment, Estimate, LogDensity, Observable, PartitionKind, WeightPoint};

fn positive() -> &'static LogDensity {
    static D: OnceLock<LogDensity> = OnceLock::new();
    D.get_or_init(|| LogDensity::from(&enumerate(2, 12, WalkClass::Positive).unwrap()))
}

fn log_c(n: usize, u: f64, w: f64, kind: PartitionKind) -> f64 {
    evaluate_partition(positive(), &WeightPoint::from_logs(u, w).unwrap(), n, kind).unwrap()
}

fn grow(d: usize, moves: &[(usize, bool)]) -> Walk {
    let mut walk = Walk::empty(d);
    for &(axis, up) in moves {
        let next = walk.end().step(axis % d, if up { 1 } else { -1 });
        walk.try_push(next);
    }
    walk
}

fn mirror(walk: &Walk, axis: usize) -> Walk {
    let vs = walk
        .vertices()
        .iter()
        .map(|p| {
            let mut c = p.coords().to_vec();
            c[axis] = -c[axis];
            LatticePoint::new(c)
        })
        .collect();
    Walk::from_vertices(vs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_partition_is_convex_along_lines(
        n in 1usize..=12, u in -2.0f64..3.0, w in -2.0f64..3.0, du in -1.0f64..1.0, dw in -1.0f64..1.0,
    ) {
        let mid = log_c(n, u, w, PartitionKind::C);
        let lo = log_c(n, u - du, w - dw, PartitionKind::C);
        let hi = log_c(n, u + du, w + dw, PartitionKind::C);
        prop_assert!(lo + hi - 2.0 * mid >= -1e-10);
    }

    #[test]
    fn derivative_is_the_mean(n in 1usize..=12, u in -1.0f64..2.0, w in -1.0f64..2.0) {
        let h = 1e-5;
        let wp = WeightPoint::from_logs(u, w).unwrap();
        for (which, du, dw) in [(Observable::Visits, h, 0.0), (Observable::Height, 0.0, h)] {
            let m = moment(positive(), &wp, n, PartitionKind::C, which).unwrap();
            let fd = (log_c(n, u + du, w + dw, PartitionKind::C) - log_c(n, u - du, w - dw, PartitionKind::C)) / (2.0 * h);
            prop_assert!((fd - m.mean).abs() < 1e-5 * (1.0 + m.mean.abs()), "{which:?}: {fd} vs {}", m.mean);
        }
    }

    #[test]
    fn loops_and_tails_grow_with_their_weight(n in 1usize..=12, x in -1.0f64..3.0, dx in 0.0f64..1.0) {
        prop_assert!(log_c(n, x + dx, 0.0, PartitionKind::L) >= log_c(n, x, 0.0, PartitionKind::L));
        prop_assert!(log_c(n, 0.0, x + dx, PartitionKind::T) >= log_c(n, 0.0, x, PartitionKind::T));
    }

    #[test]
    fn surface_features_ignore_parallel_reflections(
        d in 2usize..=3, moves in proptest::collection::vec((0usize..3, any::<bool>()), 0..30),
    ) {
        let walk = grow(d, &moves);
        let f = walk.classify();
        for axis in 0..d - 1 {
            let g = mirror(&walk, axis).classify();
            prop_assert_eq!((f.positive, f.visits, f.height, f.loop_, f.tail), (g.positive, g.visits, g.height, g.loop_, g.tail));
        }
        let r = walk.reversed();
        prop_assert_eq!(r.len(), walk.len());
    }

    #[test]
    fn phase_rule_swaps_under_exchange(k in 0.0f64..3.0, l in 0.0f64..3.0, hk in 0.0f64..0.1, hl in 0.0f64..0.1) {
        let mu = Estimate { value: 0.97, half_width: 0.01 };
        let kappa = Estimate { value: k, half_width: hk };
        let lambda = Estimate { value: l, half_width: hl };
        let swapped = |p: Phase| match p {
            Phase::Adsorbed => Phase::Ballistic,
            Phase::Ballistic => Phase::Adsorbed,
            other => other,
        };
        prop_assert_eq!(decide_phase(lambda, kappa, mu), swapped(decide_phase(kappa, lambda, mu)));
    }
}

#[test]
fn full_lattice_counts_are_submultiplicative() {
    let t = enumerate(2, 12, WalkClass::FullLattice).unwrap();
    for n in 1..=6 {
        for m in 1..=6 {
            assert!(t.total(n + m) <= t.total(n) * t.total(m), "n={n} m={m}");
        }
    }
}

#[test]
fn positive_totals_do_not_decrease() {
    let t = enumerate(3, 8, WalkClass::Positive).unwrap();
    for n in 0..8 {
        assert!(t.total(n) <= t.total(n + 1));
    }
}
