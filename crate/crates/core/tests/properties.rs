use cbs_core::bounds::{self, BoundConfig, BoundKind, HolderPair, DEFAULT_GRID};
use cbs_core::harness::{self, InstanceKind, InstanceSpec, VerifyOptions};
use cbs_core::inequality;
use cbs_core::io::{self, ProblemFile};
use cbs_core::linalg::{self, CVector, ComplexMatrix};
use cbs_core::vectors::{self, VectorFamily};
use cbs_core::{Complex64, OperatorFamily, WeightVector};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn nonzero_complex() -> impl Strategy<Value = Complex64> {
    (0.05..4.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(complex(), dim * dim).prop_map(move |v| ComplexMatrix::from_fn(dim, |r, c| v[r * dim + c]))
}

fn square(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max_dim).prop_flat_map(matrix)
}

/// Weights and a family of `n` operators on `ℂ^d`.
fn weighted_family() -> impl Strategy<Value = (WeightVector, OperatorFamily)> {
    (1..=5usize, 1..=5usize).prop_flat_map(|(d, n)| {
        (prop::collection::vec(complex(), n), prop::collection::vec(matrix(d), n)).prop_map(|(w, ops)| {
            (WeightVector::new(w).unwrap(), OperatorFamily::new(ops).unwrap())
        })
    })
}

fn vector(dim: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec(complex(), dim).prop_filter("nonzero", |v| linalg::norm(v) > 1e-3)
}

fn weighted_vectors() -> impl Strategy<Value = (WeightVector, VectorFamily)> {
    (1..=6usize, 1..=6usize).prop_flat_map(|(d, n)| {
        (prop::collection::vec(complex(), n), prop::collection::vec(vector(d), n)).prop_map(|(w, ys)| {
            (WeightVector::new(w).unwrap(), VectorFamily::new(ys).unwrap())
        })
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn catalog_bounds(alpha: &WeightVector, fam: &OperatorFamily) -> Vec<f64> {
    bounds::catalog(alpha, fam, &DEFAULT_GRID).unwrap().iter().map(|r| r.bound).collect()
}

/// Householder reflection followed by a diagonal phase; unitary by construction.
fn unitary(v: &[Complex64], phases: &[f64]) -> ComplexMatrix {
    let d = v.len();
    let vv = linalg::norm_sq(v);
    ComplexMatrix::from_fn(d, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        let h = Complex64::new(id, 0.0) - v[r] * v[c].conj() * (2.0 / vv);
        Complex64::from_polar(1.0, phases[r]) * h
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_type_products_have_squared_norm(a in square(16)) {
        let n = linalg::operator_norm(&a).unwrap();
        let aa = linalg::operator_norm(&a.mul_adjoint(&a).unwrap()).unwrap();
        let a_a = linalg::operator_norm(&a.adjoint().matmul(&a).unwrap()).unwrap();
        prop_assert!(rel(aa, n * n) <= 1e-9);
        prop_assert!(rel(a_a, n * n) <= 1e-9);
    }

    #[test]
    fn spectral_norm_is_absolutely_homogeneous(a in square(10), c in complex()) {
        let n = linalg::operator_norm(&a).unwrap();
        let cn = linalg::operator_norm(&a.scale(c)).unwrap();
        prop_assert!(rel(cn, c.norm() * n) <= 1e-9);
    }

    #[test]
    fn spectral_norm_is_submultiplicative((a, b) in (1..=10usize).prop_flat_map(|d| (matrix(d), matrix(d)))) {
        let ab = linalg::operator_norm(&a.matmul(&b).unwrap()).unwrap();
        let bound = linalg::operator_norm(&a).unwrap() * linalg::operator_norm(&b).unwrap();
        prop_assert!(ab <= bound * (1.0 + 1e-9));
    }

    #[test]
    fn power_iteration_matches_eigen_oracle(a in square(16)) {
        let power = linalg::operator_norm(&a).unwrap();
        let eig = linalg::hermitian_eigenvalues(&a.adjoint().matmul(&a).unwrap().hermitian_part(), 1e-14).unwrap();
        let oracle = eig.last().unwrap().max(0.0).sqrt();
        prop_assert!(rel(power, oracle) <= 1e-10, "{} vs {}", power, oracle);
    }

    #[test]
    fn gram_matrix_is_hermitian_psd(ys in (1..=6usize, 1..=8usize).prop_flat_map(|(d, n)| prop::collection::vec(vector(d), n))) {
        let g = linalg::gram(&ys).unwrap();
        prop_assert!(g.hermitian_deviation() <= 4.0 * f64::EPSILON * g.max_abs_entry());
        prop_assert!(linalg::is_psd(&g.hermitian_part(), 1e-10).unwrap());
    }

    #[test]
    fn operator_order_gap_holds((z, fam) in weighted_family()) {
        let r = inequality::cbs_operator_gap(&z, &fam, 1e-8).unwrap();
        prop_assert!(r.holds, "min eigenvalue {}", r.min_eigenvalue);
        prop_assert!(r.product_psd);
        let n = inequality::cbs_norm_check(&z, &fam).unwrap();
        prop_assert!(n.holds && n.lhs <= n.rhs * (1.0 + 1e-9));
    }

    #[test]
    fn gap_is_phase_invariant_and_quadratic((z, fam) in weighted_family(), theta in 0.0..std::f64::consts::TAU, c in nonzero_complex()) {
        // the gap is a difference of two terms of this size and may vanish exactly
        let terms: f64 = z.norm_sq() * fam.norms().iter().map(|n| n * n).sum::<f64>();
        let base = inequality::cbs_operator_gap(&z, &fam, 1e-8).unwrap().gap;
        let rotated = inequality::cbs_operator_gap(&z.scaled(Complex64::from_polar(1.0, theta)), &fam, 1e-8).unwrap().gap;
        prop_assert!(base.sub(&rotated).unwrap().max_abs_entry() <= 1e-12 * terms.max(base.max_abs_entry()));
        let scaled = inequality::cbs_operator_gap(&z.scaled(c), &fam, 1e-8).unwrap().gap;
        let expected = base.scale_real(c.norm_sqr());
        let scale = (c.norm_sqr() * terms).max(expected.max_abs_entry());
        prop_assert!(scaled.sub(&expected).unwrap().max_abs_entry() <= 1e-10 * scale);
    }

    #[test]
    fn every_catalog_bound_dominates((alpha, fam) in weighted_family()) {
        let reports = bounds::catalog(&alpha, &fam, &DEFAULT_GRID).unwrap();
        let tight = bounds::tightest_bound(&alpha, &fam, &DEFAULT_GRID).unwrap();
        for r in &reports {
            prop_assert!(r.lhs_sq <= r.bound * (1.0 + 1e-9), "{} {} > {}", r.kind, r.lhs_sq, r.bound);
            prop_assert!(tight.bound <= r.bound);
        }
    }

    #[test]
    fn bounds_are_quadratic_in_weights((alpha, fam) in weighted_family(), c in nonzero_complex()) {
        let base = bounds::catalog(&alpha, &fam, &DEFAULT_GRID).unwrap();
        let scaled = bounds::catalog(&alpha.scaled(c), &fam, &DEFAULT_GRID).unwrap();
        let c2 = c.norm_sqr();
        prop_assert!(rel(scaled[0].lhs_sq, c2 * base[0].lhs_sq) <= 1e-10);
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!(rel(b.bound, c2 * a.bound) <= 1e-10);
            if a.lhs_sq > 1e-12 * a.bound {
                prop_assert!(rel(a.slack_ratio, b.slack_ratio) <= 1e-9);
            }
        }
    }

    #[test]
    fn bounds_are_quadratic_in_operators((alpha, fam) in weighted_family(), c in nonzero_complex()) {
        let scaled = OperatorFamily::new(fam.ops().iter().map(|a| a.scale(c)).collect()).unwrap();
        let c2 = c.norm_sqr();
        for (a, b) in catalog_bounds(&alpha, &fam).iter().zip(catalog_bounds(&alpha, &scaled)) {
            prop_assert!(rel(b, c2 * a) <= 1e-10);
        }
    }

    #[test]
    fn bounds_ignore_joint_reordering(((alpha, fam), perm) in weighted_family().prop_flat_map(|wf| {
        let n = wf.0.len();
        (Just(wf), permutation(n))
    })) {
        let reordered = OperatorFamily::new(perm.iter().map(|&i| fam.ops()[i].clone()).collect()).unwrap();
        let a = catalog_bounds(&alpha, &fam);
        let b = catalog_bounds(&alpha.permuted(&perm), &reordered);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(rel(*x, *y) <= 1e-12, "{} vs {}", x, y);
        }
    }

    #[test]
    fn power_mean_at_two_recaptures_euclidean((alpha, fam) in weighted_family()) {
        let pm = bounds::bound_power_mean(&alpha, &fam, 2.0).unwrap();
        let eu = bounds::bound_euclidean_cross(&alpha, &fam).unwrap();
        prop_assert!(rel(pm.bound, eu.bound) <= 1e-12);
    }

    #[test]
    fn single_operator_catalog_is_tight(a in square(6), w in nonzero_complex()) {
        let fam = OperatorFamily::new(vec![a]).unwrap();
        let alpha = WeightVector::new(vec![w]).unwrap();
        for r in bounds::catalog(&alpha, &fam, &DEFAULT_GRID).unwrap() {
            prop_assert!(rel(r.bound, r.lhs_sq) <= 1e-9, "{}", r.kind);
        }
    }

    #[test]
    fn gram_path_matches_operator_path((alpha, vf) in weighted_vectors(), x_norm_sq in 0.0..5.0f64) {
        let fam = vectors::rank_one_family(&vf).unwrap();
        let grid = bounds::holder_grid(&DEFAULT_GRID).unwrap();
        for c in BoundConfig::sweep(&grid) {
            let g = vectors::gram_bound(&alpha, &vf, x_norm_sq, c).unwrap();
            let m = bounds::master_bound(&alpha, &fam, c).unwrap();
            prop_assert!(rel(g.bound, x_norm_sq * m.bound) <= 1e-9);
            prop_assert!(rel(g.lhs_sq, x_norm_sq * m.lhs_sq) <= 1e-9);
        }
    }

    #[test]
    fn rank_one_norm_identities((_, vf) in weighted_vectors()) {
        let fam = vectors::rank_one_family(&vf).unwrap();
        let ys = vf.vectors();
        for i in 0..ys.len() {
            prop_assert!(rel(fam.norms()[i], linalg::norm(&ys[i])) <= 1e-10);
            for j in 0..ys.len() {
                let exact = linalg::inner(&ys[i], &ys[j]).unwrap().norm();
                let got = linalg::operator_norm(&fam.ops()[i].matmul(&fam.ops()[j]).unwrap()).unwrap();
                let floor = 8.0 * f64::EPSILON * linalg::norm(&ys[i]) * linalg::norm(&ys[j]);
                prop_assert!((got - exact).abs() <= floor || rel(got, exact) <= 1e-9);
            }
        }
    }

    #[test]
    fn vector_bounds_are_unitarily_invariant(
        ((alpha, vf), v, phases) in weighted_vectors().prop_flat_map(|wv| {
            let d = wv.1.dim();
            (Just(wv), vector(d), prop::collection::vec(0.0..std::f64::consts::TAU, d))
        })
    ) {
        let u = unitary(&v, &phases);
        let moved = VectorFamily::new(vf.vectors().iter().map(|y| u.mul_vec(y).unwrap()).collect()).unwrap();
        let a = vectors::gram_catalog(&alpha, &vf, 1.0, &DEFAULT_GRID).unwrap();
        let b = vectors::gram_catalog(&alpha, &moved, 1.0, &DEFAULT_GRID).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(rel(x.bound, y.bound) <= 1e-9);
            prop_assert!(rel(x.lhs_sq, y.lhs_sq) <= 1e-9);
        }
    }

    #[test]
    fn orthonormal_vectors_reduce_to_n(
        (d, picks, phases) in (1..=8usize).prop_flat_map(|d| {
            (Just(d), Just((0..d).collect::<Vec<_>>()).prop_shuffle(), prop::collection::vec(0.0..std::f64::consts::TAU, d))
        }),
        n_frac in 0.0..1.0f64,
        x_norm_sq in 0.1..3.0f64,
        p in 1.1..5.0f64,
        r in 1.05..2.0f64,
    ) {
        let n = 1 + ((d - 1) as f64 * n_frac) as usize;
        let ys: Vec<CVector> = (0..n)
            .map(|k| {
                let mut y = vec![Complex64::new(0.0, 0.0); d];
                y[picks[k]] = Complex64::from_polar(1.0, phases[k]);
                y
            })
            .collect();
        let vf = VectorFamily::new(ys).unwrap();
        let ones = WeightVector::from_real(&vec![1.0; n]).unwrap();
        let hp = HolderPair::new(p).unwrap();
        let reports = vectors::particular_bounds(&ones, &vf, x_norm_sq, hp, r).unwrap();
        prop_assert_eq!(reports.len(), 6);
        for rep in reports {
            prop_assert!(rel(rep.bound, x_norm_sq * n as f64) <= 1e-12, "{}: {}", rep.kind, rep.bound);
            prop_assert!(rel(rep.lhs_sq, x_norm_sq) <= 1e-12);
        }
    }

    #[test]
    fn probe_bounds_hold((alpha, fam) in weighted_family(), seed in any::<u64>()) {
        let m = bounds::tightest_bound(&alpha, &fam, &DEFAULT_GRID).unwrap().bound;
        for (x, y) in harness::probe_vectors(fam.dim(), 4, seed) {
            prop_assert!(bounds::vector_image_bound(&alpha, &fam, &x, m).unwrap().holds);
            prop_assert!(bounds::bilinear_bound(&alpha, &fam, &x, &y, m).unwrap().holds);
        }
    }
}

fn kind() -> impl Strategy<Value = InstanceKind> {
    prop::sample::select(InstanceKind::ALL.to_vec())
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
        Just(f64::MAX),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn verification_is_deterministic_and_clean(kind in kind(), n in 1..=5usize, extra in 0..=3usize, seed in any::<u64>()) {
        let spec = InstanceSpec::new(kind, n + extra, n, seed);
        let opts = VerifyOptions::default();
        let a = harness::verify_spec(&spec, &opts).unwrap();
        let b = harness::verify_spec(&spec, &opts).unwrap();
        prop_assert!(a.all_hold, "worst violation {}", a.worst_violation);
        prop_assert_eq!(a.worst_violation, 0.0);
        prop_assert_eq!(&a, &b);
        if kind.is_orthogonal() {
            let inst = harness::generate(&spec).unwrap();
            prop_assert_eq!(inst.family.profile().max_cross(), 0.0);
            prop_assert!(a.checks.iter().any(|c| c.name.starts_with("orthogonal[")));
        }
    }

    #[test]
    fn problem_files_round_trip_exactly(
        d in 1..=3usize,
        vals in prop::collection::vec(finite(), 2 * 3 * 9),
        operators in any::<bool>(),
    ) {
        let n = 2;
        let pair = |k: usize| [vals[2 * k], vals[2 * k + 1]];
        let file = if operators {
            ProblemFile {
                schema_version: "1".into(),
                dim: d,
                weights: Some((0..n).map(pair).collect()),
                operators: Some((0..n).map(|i| (0..d).map(|r| (0..d).map(|c| pair(n + i * d * d + r * d + c)).collect()).collect()).collect()),
                vectors: None,
            }
        } else {
            ProblemFile {
                schema_version: "1".into(),
                dim: d,
                weights: None,
                // leading 1 keeps every vector nonzero
                vectors: Some((0..n).map(|i| (0..d).map(|r| if r == 0 { [1.0, vals[i]] } else { pair(n + i * d + r) }).collect()).collect()),
                operators: None,
            }
        };
        let text = io::to_json_string(&file).unwrap();
        let back = io::parse_problem(&text).unwrap();
        prop_assert_eq!(&back, &file);
        let bits = |f: &ProblemFile| -> Vec<u64> {
            let mut v: Vec<u64> = f.weights.iter().flatten().flatten().map(|x| x.to_bits()).collect();
            v.extend(f.operators.iter().flatten().flatten().flatten().flatten().map(|x| x.to_bits()));
            v.extend(f.vectors.iter().flatten().flatten().flatten().map(|x| x.to_bits()));
            v
        };
        prop_assert_eq!(bits(&back), bits(&file));
        prop_assert_eq!(io::to_json_string(&back).unwrap(), text);
    }
}

#[test]
fn catalog_kinds_are_stable_across_instances() {
    let grid = bounds::holder_grid(&DEFAULT_GRID).unwrap();
    let plain = bounds::catalog_kinds(&grid, false);
    let orth = bounds::catalog_kinds(&grid, true);
    assert_eq!(plain.len(), 61);
    assert_eq!(orth.len(), 68);
    assert_eq!(&orth[..61], &plain[..]);
    assert!(orth[61..].iter().all(|k| matches!(k, BoundKind::Orthogonal(_))));
}
