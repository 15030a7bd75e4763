use multiholo::exterior::{binomial, ext_power, hodge_star, hs_norm, wedge, LinearMap, MultiVector};
use multiholo::gridmap::{conformal_equivariance_check, read_gmap, write_gmap, GridMap, McrOperator, Similarity};
use multiholo::octonion::{oct_mul, Octonion};
use multiholo::triad::{apply_j, apply_k, make_triad, Family, Triad};
use proptest::prelude::*;

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, len)
}

fn mv(dim: usize, grade: usize) -> impl Strategy<Value = MultiVector<f64>> {
    coeffs(binomial(dim, grade)).prop_map(move |c| MultiVector::from_coeffs(dim, grade, c).unwrap())
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = LinearMap<f64>> {
    coeffs(rows * cols).prop_map(move |c| LinearMap::from_column_major(rows, cols, c).unwrap())
}

fn octonion() -> impl Strategy<Value = Octonion<f64>> {
    coeffs(8).prop_map(|c| Octonion::new(c.try_into().unwrap()))
}

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

fn triad(f: Family) -> Triad<f64> {
    make_triad(f, f.default_dim()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_graded_commutative(a in mv(6, 2), b in mv(6, 3)) {
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        for (x, y) in ab.coeffs().iter().zip(ba.coeffs()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn wedge_associative(a in mv(7, 1), b in mv(7, 2), c in mv(7, 3)) {
        let l = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
        let r = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
        for (x, y) in l.coeffs().iter().zip(r.coeffs()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn hodge_pairing_and_involution(a in mv(5, 2), b in mv(5, 2)) {
        let lhs = wedge(&a, &hodge_star(&b)).unwrap();
        let vol = MultiVector::volume(5).unwrap();
        prop_assert!(close(lhs.dot(&vol).unwrap(), a.dot(&b).unwrap(), 1e-12));
        // ⋆⋆ = (-1)^{k(d-k)} = +1 for k = 2, d = 5
        let back = hodge_star(&hodge_star(&a));
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn ext_power_functorial(a in matrix(7, 4), b in matrix(4, 3), k in 1usize..=3) {
        let lhs = ext_power(&a.matmul(&b).unwrap(), k).unwrap();
        let rhs = ext_power(&a, k).unwrap().matmul(&ext_power(&b, k).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-10 * (1.0 + lhs.max_abs()));
    }

    #[test]
    fn octonions_normed_and_alternative(x in octonion(), y in octonion()) {
        prop_assert!(close(oct_mul(&x, &y).norm(), x.norm() * y.norm(), 1e-12));
        let l = oct_mul(&oct_mul(&x, &x), &y);
        let r = oct_mul(&x, &oct_mul(&x, &y));
        prop_assert!((l - r).norm() <= 1e-11 * (1.0 + x.norm() * x.norm() * y.norm()));
    }

    #[test]
    fn split_product_identity(f in family(), seed in any::<u64>()) {
        let t = triad(f);
        let mut rng = multiholo::sampling::seeded(seed);
        let v = multiholo::sampling::gaussian_vec::<f64, _>(&mut rng, t.dim());
        let jk = apply_j(&t, &apply_k(&t, &v).unwrap()).unwrap();
        let sign = if t.n().is_multiple_of(2) { 1.0 } else { -1.0 };
        for (a, b) in jk.iter().zip(&v) {
            prop_assert!(close(*a, sign * t.lambda() * b, 1e-12));
        }
    }

    #[test]
    fn hadamard_bound(a in matrix(7, 3)) {
        let lhs = 3f64.sqrt() * hs_norm(&ext_power(&a, 2).unwrap());
        let rhs = hs_norm(&a).powi(2);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn calibration_bound_pointwise(f in family(), seed in any::<u64>()) {
        let t = triad(f);
        let op = McrOperator::new(&t).unwrap();
        let mut rng = multiholo::sampling::seeded(seed);
        let data = multiholo::sampling::gaussian_vec(&mut rng, t.dim() * (t.n() + 1));
        let du = LinearMap::from_column_major(t.dim(), t.n() + 1, data).unwrap();
        let j = op.jet(du, 0.0);
        prop_assert!(j.pullback_density <= j.e_np1_density + 1e-12);
        // <du, ðu> = (n+1) (e - u*ω) and the mixed identity, pointwise
        let np1 = (t.n() + 1) as f64;
        prop_assert!(close(j.pairing, np1 * (j.e_np1_density - j.pullback_density), 1e-10));
        prop_assert!(close(j.e_mix_density, j.mixed_gap_density + j.pullback_density, 1e-10));
    }

    #[test]
    fn conformal_differentials_are_multiholomorphic(f in family(), s in 0.2f64..3.0, seed in any::<u64>()) {
        // s times a calibrated isometry: take the inclusion frame and rotate
        // the domain by a random rotation
        let t = triad(f);
        let n1 = t.n() + 1;
        let mut rng = multiholo::sampling::seeded(seed);
        let mut frame = multiholo::sampling::orthonormal_frame::<f64, _>(&mut rng, n1, n1);
        let r = LinearMap::from_columns(&frame).unwrap();
        if r.det().unwrap() < 0.0 {
            for x in frame[0].iter_mut() {
                *x = -*x;
            }
        }
        let r = LinearMap::from_columns(&frame).unwrap();
        let inc = GridMap::inclusion(t.clone(), &vec![3; n1]).unwrap();
        let base = multiholo::gridmap::finite_diff_jacobian(&inc, 0).unwrap();
        let du = base.matmul(&r).unwrap().scale(s);
        let op = McrOperator::new(&t).unwrap();
        let j = op.jet(du.clone(), 0.0);
        prop_assert!(j.mcr_residual.max_abs() <= 1e-10 * (1.0 + s.powi(t.n() as i32)));
        prop_assert!(close(j.pullback_density, j.e_np1_density, 1e-10));
        // weak conformality follows
        let g = du.transpose().matmul(&du).unwrap();
        let lam = du.hs_dot(&du) / n1 as f64;
        prop_assert!(g.sub(&LinearMap::identity(n1).scale(lam)).unwrap().max_abs() <= 1e-9 * (1.0 + lam));
    }

    #[test]
    fn translations_exact(seed in any::<u64>(), shift in prop::collection::vec(-6i64..6, 3)) {
        let t = triad(Family::Associative);
        let mut rng = multiholo::sampling::seeded(seed);
        let vals: Vec<f64> = multiholo::sampling::gaussian_vec::<f64, _>(&mut rng, 7 * 125).iter().map(|x| 0.05 * x).collect();
        let m = GridMap::inclusion(t, &[5, 5, 5]).unwrap();
        let vals: Vec<f64> = m.values().iter().zip(&vals).map(|(a, b)| a + b).collect();
        let m = m.with_values(vals).unwrap();
        prop_assert!(conformal_equivariance_check(&m, &Similarity::translation(&shift)).unwrap() <= 1e-12);
    }

    #[test]
    fn gmap_round_trip(seed in any::<u64>(), n in 3usize..5, periodic in prop::collection::vec(any::<bool>(), 3)) {
        let t = triad(Family::Conformal);
        let mut rng = multiholo::sampling::seeded(seed);
        let vals = multiholo::sampling::gaussian_vec::<f64, _>(&mut rng, 3 * n * n * n);
        let m = GridMap::new(t, &[n, n, n], &periodic, vals).unwrap();
        let text = write_gmap(&m);
        let back: GridMap<f64> = read_gmap(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(write_gmap(&back), text);
    }
}
