use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use steklov_trees::bounds::BoundAudit;
use steklov_trees::eigen::eigenvalue_oracle;
use steklov_trees::generators::{gen_random_interior3, gen_random_tree};
use steklov_trees::harmonic::{dtn_matrix, harmonic_extension, laplacian_apply};
use steklov_trees::partition::{partition_k, partition_two, partition_two_optimal};
use steklov_trees::spectra::{rayleigh_quotient, steklov_eigenvalue, steklov_spectrum};
use steklov_trees::{io, BoundaryFunction, BoundaryTree, Tolerances, VertexFunction};

fn random_tree() -> impl Strategy<Value = BoundaryTree> {
    (3usize..40, 2usize..7, any::<u64>()).prop_map(|(n, d, s)| gen_random_tree(n, d, s).unwrap())
}

fn interior3_tree() -> impl Strategy<Value = BoundaryTree> {
    (4usize..40, 3usize..7, any::<u64>())
        .prop_map(|(n, d, s)| gen_random_interior3(n, d, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dtn_is_symmetric_psd_with_zero_rows(t in random_tree()) {
        let dtn = dtn_matrix(&t).unwrap();
        prop_assert!(dtn.max_asymmetry() <= 1e-10);
        prop_assert!(dtn.max_row_sum() <= 1e-10);
        let s = steklov_spectrum(&t).unwrap();
        prop_assert!(s.eigenvalues[0].abs() <= 1e-9);
        prop_assert!(s.eigenvalues[1] > 0.0);
        prop_assert!(*s.eigenvalues.last().unwrap() <= 1.0 + 1e-9);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        s.diagnostics().check(&Tolerances::default()).unwrap();
    }

    #[test]
    fn energy_identity(t in random_tree(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..t.boundary_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = BoundaryFunction::new(&t, g).unwrap();
        let f = harmonic_extension(&g).unwrap();
        let lap = laplacian_apply(&f);
        for &x in t.interior() {
            prop_assert!(lap.values()[x].abs() < 1e-10);
        }
        let dtn = dtn_matrix(&t).unwrap();
        let lhs = dtn.apply(&g).dot(&g);
        let rhs = f.edge_energy();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn solvers_agree(t in random_tree()) {
        let s = steklov_spectrum(&t).unwrap();
        let dtn = dtn_matrix(&t).unwrap();
        for (i, &lam) in s.eigenvalues.iter().enumerate() {
            prop_assert!((eigenvalue_oracle(dtn.matrix(), i + 1).unwrap() - lam).abs() < 1e-8);
            prop_assert!((steklov_eigenvalue(&t, i + 1).unwrap() - lam).abs() < 1e-8);
        }
    }

    #[test]
    fn eigenfunction_quotients(t in random_tree()) {
        let s = steklov_spectrum(&t).unwrap();
        prop_assert!(rayleigh_quotient(&s.eigenfunctions[0]).unwrap().abs() < 1e-9);
        for i in 1..s.len() {
            let r = rayleigh_quotient(&s.eigenfunctions[i]).unwrap();
            prop_assert!((r - s.eigenvalues[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_sum_functions_stay_above_lambda2(t in random_tree(), seed in any::<u64>()) {
        let lam2 = steklov_eigenvalue(&t, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = t.vertex_count();
        for _ in 0..50 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = t.boundary().iter().map(|&b| v[b]).sum::<f64>() / t.boundary_count() as f64;
            for x in v.iter_mut() {
                *x -= mean;
            }
            let f = VertexFunction::new(&t, v).unwrap();
            prop_assert!(rayleigh_quotient(&f).unwrap() >= lam2 - 1e-8);
        }
    }

    #[test]
    fn certificates_verify(t in random_tree()) {
        let c = partition_two(&t).unwrap();
        c.verify(&t).unwrap();
        prop_assert!(partition_two_optimal(&t).fractions[0] >= c.fractions[0]);
        prop_assert!(c.descent_steps[0] <= t.vertex_count());
        for k in 3..=t.boundary_count().min(6) {
            partition_k(&t, k).unwrap().verify(&t).unwrap();
        }
    }

    #[test]
    fn applicable_bounds_hold(t in interior3_tree()) {
        let a = BoundAudit::new(&t, Tolerances::default()).unwrap();
        let ks = steklov_trees::bounds::default_ks(&t);
        for r in a.all(&ks).unwrap() {
            prop_assert!(r.preconditions_met || r.k.is_some(), "{:?}", r.bound_id);
            prop_assert!(!r.violated(), "{:?} {} > {}", r.bound_id, r.measured, r.bound_value);
        }
    }

    #[test]
    fn edge_list_round_trip(t in random_tree()) {
        prop_assert_eq!(io::parse_tree(&io::to_edge_list(&t)).unwrap(), t.clone());
        prop_assert_eq!(io::parse_tree(&io::to_json(&t).to_string()).unwrap(), t);
    }

    #[test]
    fn generators_are_reproducible(n in 3usize..50, d in 2usize..6, seed in any::<u64>()) {
        prop_assert_eq!(gen_random_tree(n, d, seed).unwrap(), gen_random_tree(n, d, seed).unwrap());
        let t = gen_random_tree(n, d, seed).unwrap();
        prop_assert_eq!(t.vertex_count(), n);
        prop_assert!(t.max_degree() <= d);
    }
}

#[test]
fn golden_random_tree() {
    let t = gen_random_tree(5, 3, 42).unwrap();
    assert_eq!(t.edges(), &[(0, 3), (1, 2), (2, 3), (3, 4)]);
}

#[test]
fn degree_cap_two_gives_paths() {
    for seed in 0..50 {
        let t = gen_random_tree(12, 2, seed).unwrap();
        assert_eq!(t.boundary_count(), 2);
        assert_eq!(t.diameter().0, 11);
    }
}
