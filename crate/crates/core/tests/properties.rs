use std::collections::BTreeSet;

use proptest::prelude::*;
use taskrisk::adequacy::{bartlett_test, correlation, kmo, CorrelationMatrix};
use taskrisk::clustering::{dissimilarity_matrix, pam, silhouette, Metric, PamInit};
use taskrisk::corpus::{standardize, OccupationMatrix, SocCode};
use taskrisk::factors::{parallel_analysis, ParallelAnalysisOptions};
use taskrisk::linalg::{eigen_residual, jacobi_eigen};
use taskrisk::trends::{compare_sets, YearRange};
use taskrisk::vulnerability::{score_criteria, Direction, SusceptibilityCriterion};
use taskrisk::{DMatrix, EmploymentSeries};

fn soc(i: usize) -> SocCode {
    SocCode::parse(&format!("43-{:04}", 2000 + i)).unwrap()
}

fn occupations(values: DMatrix<f64>) -> OccupationMatrix {
    let (n, p) = values.shape();
    OccupationMatrix::new(
        (0..n).map(soc).collect(),
        (0..p).map(|j| format!("a{j}")).collect(),
        values,
        false,
    )
    .unwrap()
}

fn matrix(rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> impl Strategy<Value = DMatrix<f64>> {
    (rows, cols).prop_flat_map(|(n, p)| {
        prop::collection::vec(-50.0..50.0f64, n * p).prop_map(move |v| DMatrix::from_vec(n, p, v))
    })
}

fn non_degenerate(m: &DMatrix<f64>) -> bool {
    m.column_iter().all(|c| {
        let mean = c.mean();
        c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() > 1e-3
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn correlation_of(m: &DMatrix<f64>) -> CorrelationMatrix {
    correlation(&standardize(&occupations(m.clone())).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standardized_columns_are_unit(m in matrix(3..20, 1..6)) {
        prop_assume!(non_degenerate(&m));
        let z = standardize(&occupations(m)).unwrap();
        let n = z.values.nrows() as f64;
        for c in z.values.column_iter() {
            let mean = c.mean();
            let sd = (c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!((sd - 1.0).abs() < 1e-9);
        }
        prop_assert!(standardize(&z).is_err());
        let again = standardize(&occupations(z.values.clone())).unwrap();
        prop_assert!((again.values - &z.values).amax() < 1e-9);
    }

    #[test]
    fn bartlett_ignores_variable_order(m in matrix(12..30, 3..6), seed in any::<u64>()) {
        prop_assume!(non_degenerate(&m));
        let p = m.ncols();
        let mut order: Vec<usize> = (0..p).collect();
        order.rotate_left((seed % p as u64) as usize);
        order.swap(0, p - 1);
        let permuted = DMatrix::from_fn(m.nrows(), p, |i, j| m[(i, order[j])]);
        let r = correlation_of(&m);
        prop_assume!(r.values.determinant() > 1e-6);
        let a = bartlett_test(&r, m.nrows()).unwrap();
        let b = bartlett_test(&correlation_of(&permuted), m.nrows()).unwrap();
        prop_assert!((a.statistic - b.statistic).abs() <= 1e-9 * a.statistic.abs().max(1.0));
        prop_assert_eq!(a.df, b.df);
    }

    #[test]
    fn kmo_ignores_sign_flips(m in matrix(12..30, 3..6), flips in prop::collection::vec(any::<bool>(), 6)) {
        prop_assume!(non_degenerate(&m));
        let r = correlation_of(&m);
        prop_assume!(r.values.determinant() > 1e-6);
        let flipped = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if flips[j] { -m[(i, j)] } else { m[(i, j)] });
        let a = kmo(&r).unwrap();
        let b = kmo(&correlation_of(&flipped)).unwrap();
        prop_assert!((a.overall - b.overall).abs() < 1e-9);
    }

    #[test]
    fn jacobi_pairs_satisfy_eigen_equation(m in matrix(2..9, 2..9)) {
        let k = m.nrows().min(m.ncols());
        let a = m.view((0, 0), (k, k)).into_owned();
        let s = (&a + a.transpose()) * 0.5;
        let e = jacobi_eigen(&s).unwrap();
        let scale = s.norm().max(1.0);
        for (i, &v) in e.values.iter().enumerate() {
            let vec = e.vectors.column(i).into_owned();
            prop_assert!(eigen_residual(&s, v, &vec) < 1e-8 * scale);
        }
    }

    #[test]
    fn pam_cost_invariant_under_relabeling(
        (pts, perm) in matrix(4..14, 2..3).prop_flat_map(|m| { let n = m.nrows(); (Just(m), permutation(n)) }),
        k in 1usize..4,
    ) {
        let n = pts.nrows();
        prop_assume!(k < n);
        let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let d = dissimilarity_matrix(&pts, ids.clone(), Metric::Euclidean).unwrap();
        let a = pam(&d, k, PamInit::Build).unwrap();
        let shuffled = DMatrix::from_fn(n, 2, |i, j| pts[(perm[i], j)]);
        let d2 = dissimilarity_matrix(&shuffled, ids, Metric::Euclidean).unwrap();
        let b = pam(&d2, k, PamInit::Build).unwrap();
        // ties in BUILD may pick a different local optimum after shuffling
        let mapped: BTreeSet<usize> = b.medoids.iter().map(|&m| perm[m]).collect();
        let own: BTreeSet<usize> = a.medoids.iter().copied().collect();
        if mapped == own {
            prop_assert!((a.cost_z - b.cost_z).abs() <= 1e-9 * a.cost_z.max(1.0));
        }
        let recomputed: f64 = (0..n).map(|i| d.get(i, a.medoids[a.assignment[i]])).sum();
        prop_assert!((recomputed - a.cost_z).abs() <= 1e-9 * a.cost_z.max(1.0));
    }

    #[test]
    fn silhouettes_bounded(pts in matrix(4..25, 1..4), k in 2usize..4) {
        let n = pts.nrows();
        prop_assume!(k < n);
        let d = dissimilarity_matrix(&pts, (0..n).map(|i| i.to_string()).collect(), Metric::Manhattan).unwrap();
        let s = pam(&d, k, PamInit::Build).unwrap();
        let sil = silhouette(&d, &s.assignment).unwrap();
        for v in &sil.values {
            prop_assert!((-1.0..=1.0).contains(v));
        }
    }

    #[test]
    fn flags_invariant_under_positive_scaling(
        m in matrix(10..40, 1..4),
        scale in 0.01..100.0f64,
        fraction in 0.1..0.5f64,
    ) {
        let c: Vec<SusceptibilityCriterion> = (0..m.ncols())
            .map(|j| {
                let dir = if j % 2 == 0 { Direction::Top } else { Direction::Bottom };
                SusceptibilityCriterion::new(j, dir, fraction, &format!("c{j}"))
            })
            .collect();
        let a = score_criteria(&m, &c).unwrap();
        let b = score_criteria(&(&m * scale), &c).unwrap();
        prop_assert_eq!(a.satisfied, b.satisfied);
    }

    #[test]
    fn growth_ratio_invariant_under_scaling_and_relabeling(
        rates in prop::collection::vec(0.001..0.05f64, 6..12),
        scale in 0.1..1000.0f64,
        split in 1usize..5,
    ) {
        let mut series = EmploymentSeries::new();
        for (i, r) in rates.iter().enumerate() {
            for y in 2012..=2016 {
                series.insert(soc(i), y, (200.0 + i as f64) * (1.0 + r).powi(y - 2012)).unwrap();
            }
        }
        let v: Vec<SocCode> = (0..split).map(soc).collect();
        let nv: Vec<SocCode> = (split..rates.len()).map(soc).collect();
        let range = YearRange::new(2012, 2016).unwrap();
        let base = compare_sets(&series, &v, &nv, range, &[]).unwrap();
        let scaled = compare_sets(&series.scaled(scale), &v, &nv, range, &[]).unwrap();
        let (a, b) = (
            base.ratio_vulnerable_to_nonvulnerable.unwrap(),
            scaled.ratio_vulnerable_to_nonvulnerable.unwrap(),
        );
        prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));

        let mut relabeled = EmploymentSeries::new();
        let offset = 500;
        for (i, _) in rates.iter().enumerate() {
            for (y, h) in series.get(&soc(i)).unwrap() {
                relabeled.insert(soc(i + offset), *y, *h).unwrap();
            }
        }
        let v2: Vec<SocCode> = (0..split).map(|i| soc(i + offset)).collect();
        let nv2: Vec<SocCode> = (split..rates.len()).map(|i| soc(i + offset)).collect();
        let r = compare_sets(&relabeled, &v2, &nv2, range, &[]).unwrap();
        prop_assert_eq!(r.ratio_vulnerable_to_nonvulnerable.unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn parallel_analysis_is_deterministic(m in matrix(20..40, 3..6), seed in any::<u64>()) {
        prop_assume!(non_degenerate(&m));
        let z = standardize(&occupations(m)).unwrap();
        let opts = ParallelAnalysisOptions { replicates: 20, quantile: 0.95, seed };
        let a = parallel_analysis(&z, opts).unwrap();
        let b = parallel_analysis(&z, opts).unwrap();
        prop_assert_eq!(a, b);
    }
}
