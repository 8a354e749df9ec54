use meandim_core::info::{
    blahut_arimoto, entropy, marginals, mutual_information, mutual_information_by_entropies, rate_distortion_matrix,
    BaOptions, ProbMeasure,
};
use proptest::prelude::*;

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.001f64..1.0], n).prop_map(|v| {
        let t: f64 = v.iter().sum();
        if t == 0.0 {
            let mut e = vec![0.0; v.len()];
            e[0] = 1.0;
            e
        } else {
            v.iter().map(|x| x / t).collect()
        }
    })
}

fn joint() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        simplex(r * c).prop_map(move |w| (0..r).map(|i| w[i * c..(i + 1) * c].to_vec()).collect())
    })
}

fn distortion(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(0.0f64..1.0, n * n).prop_map(move |v| {
        (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { v[i * n + j] + 0.05 }).collect()).collect()
    })
}

proptest! {
    #[test]
    fn mutual_information_bounds_and_symmetry(j in joint()) {
        let i = mutual_information(&j).unwrap();
        let (px, py) = marginals(&j);
        prop_assert!(i >= 0.0);
        prop_assert!(i <= entropy(&px).min(entropy(&py)) + 1e-12);
        let t: Vec<Vec<f64>> = (0..j[0].len()).map(|c| j.iter().map(|r| r[c]).collect()).collect();
        prop_assert!((mutual_information(&t).unwrap() - i).abs() <= 1e-12);
        prop_assert!((mutual_information_by_entropies(&j).unwrap() - i).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn blahut_arimoto_descends((src, d) in (2usize..6).prop_flat_map(|n| (simplex(n), distortion(n))), beta in 0.1f64..20.0) {
        let p = blahut_arimoto(&src, &d, beta, None, &BaOptions::default());
        prop_assert!(p.monotone);
    }

    #[test]
    fn rate_curves_are_nonincreasing_and_convex((src, d) in (2usize..5).prop_flat_map(|n| (simplex(n), distortion(n)))) {
        let mu = ProbMeasure::new(src).unwrap();
        let eps: Vec<f64> = (1..=12).map(|k| k as f64 * 0.06).collect();
        let curve = rate_distortion_matrix(&mu, &d, &eps, 1, &BaOptions::default()).unwrap();
        let rows: Vec<(f64, f64)> = curve.rows.iter().filter(|r| r.rate.is_finite()).map(|r| (r.eps, r.rate)).collect();
        for w in rows.windows(2) {
            prop_assert!(w[1].1 <= w[0].1 + 1e-12);
            prop_assert!(w[1].1 >= 0.0);
        }
        for a in 0..rows.len() {
            for b in (a + 1)..rows.len() {
                for c in (b + 1)..rows.len() {
                    let (x0, y0, x1, y1, x2, y2) = (rows[a].0, rows[a].1, rows[b].0, rows[b].1, rows[c].0, rows[c].1);
                    let chord = y0 + (y2 - y0) * (x1 - x0) / (x2 - x0);
                    prop_assert!(y1 <= chord + 1e-6, "R({x1})={y1} above chord {chord}");
                }
            }
        }
    }
}
