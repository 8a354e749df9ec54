use meandim_core::tiling::{bisector_abscissa, equivariance_check_exact, tiling_for, MarkerFunction};
use meandim_core::FiniteSystem;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

/// A cycle with a marker function whose values are multiples of 1/16.
fn marked_cycle() -> impl Strategy<Value = (FiniteSystem, MarkerFunction)> {
    (1usize..8).prop_flat_map(|p| {
        prop::collection::vec(0u32..=16, p).prop_map(move |mut v| {
            if v.iter().all(|&k| k == 0) {
                v[0] = 16;
            }
            let sys = FiniteSystem::cycle(p).unwrap();
            let psi = MarkerFunction::new(&sys, v.iter().map(|&k| k as f64 / 16.0).collect()).unwrap();
            (sys, psi)
        })
    })
}

proptest! {
    #[test]
    fn bisector_is_equidistant(a in -100i64..100, gap in 1i64..50, ha in 1.0f64..20.0, hb in 1.0f64..20.0) {
        let (af, bf) = (a as f64, (a + gap) as f64);
        let t = bisector_abscissa(&af, &ha, &bf, &hb).unwrap();
        let (da, db) = ((t - af).powi(2) + ha * ha, (t - bf).powi(2) + hb * hb);
        prop_assert!((da - db).abs() <= 1e-12 * da.max(db));

        let q = |v: f64| BigRational::from_float(v).unwrap();
        let (ar, br) = (BigRational::from_integer(BigInt::from(a)), BigRational::from_integer(BigInt::from(a + gap)));
        let tr = bisector_abscissa(&ar, &q(ha), &br, &q(hb)).unwrap();
        let lhs = (&tr - &ar) * (&tr - &ar) + q(ha) * q(ha);
        let rhs = (&tr - &br) * (&tr - &br) + q(hb) * q(hb);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn charts_are_ordered_and_gapless((sys, psi) in marked_cycle(), x in 0usize..8, horizon in 10i64..40) {
        let chart = tiling_for(&sys, &psi, x % sys.len(), horizon).unwrap();
        for iv in &chart.intervals {
            if let (Some(l), Some(u)) = (iv.lo, iv.hi) {
                prop_assert!(l <= u);
            }
        }
        for w in chart.intervals.windows(2) {
            prop_assert!(w[0].marker < w[1].marker);
            prop_assert_eq!(w[0].hi, w[1].lo);
        }
        if let Some((lo, hi)) = chart.certified_window {
            let inside: Vec<_> = chart.intervals.iter().filter(|iv| iv.certified).collect();
            prop_assert_eq!(inside.first().unwrap().lo, Some(lo));
            prop_assert!(inside.last().unwrap().hi.unwrap() >= hi);
        }
    }

    #[test]
    fn tiling_is_equivariant((sys, psi) in marked_cycle(), x in 0usize..8, n in 1i64..8) {
        let r = equivariance_check_exact(&sys, &psi, x % sys.len(), n, 40).unwrap();
        prop_assert!(r.exact_match);
    }
}
