use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectregap::bounds::bound_report;
use spectregap::construction::{klawe_vazirani, rogue_matrix};
use spectregap::expansion::{eulerian_defect, phi_cut, phi_exact};
use spectregap::matrix::{
    load_matrix, random_doubly_stochastic, save_matrix, scale_to_unit_pf, Format, Mode,
    NonnegMatrix,
};
use spectregap::mixing::{mixing_bounds, mixing_residual};
use spectregap::pf::{balance, lazify, pf_data, Classification};
use spectregap::spectral::{eigenvalues, schur_decompose, singular_values, spectrum_distance};

const TOL: f64 = 1e-12;

fn ds(n: usize, seed: u64) -> NonnegMatrix {
    random_doubly_stochastic(n, seed, TOL).unwrap()
}

/// Positive off a random zero pattern, plus a cycle so the support is
/// strongly connected.
fn irreducible(n: usize, seed: u64) -> NonnegMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |i, j| {
        let x: f64 = rng.random();
        let cycle = if j == (i + 1) % n { 0.5 } else { 0.0 };
        if x < 0.4 {
            cycle
        } else {
            x + cycle
        }
    });
    NonnegMatrix::from_dmatrix(m).unwrap()
}

/// Random nonnegative matrix with a sparse support; may be reducible.
fn sparse(n: usize, seed: u64) -> NonnegMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |_, _| {
        let x: f64 = rng.random();
        if x < 0.7 {
            0.0
        } else {
            x
        }
    });
    NonnegMatrix::from_dmatrix(m).unwrap()
}

fn pf(m: &NonnegMatrix) -> spectregap::pf::PfData {
    pf_data(m, TOL).unwrap()
}

fn phi(m: &NonnegMatrix) -> f64 {
    phi_exact(m, &pf(m), 24).unwrap().phi
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn float_round_trip_is_bit_exact(n in 2usize..10, seed in any::<u64>(), mm in any::<bool>()) {
        let a = ds(n, seed);
        let dir = tempfile::tempdir().unwrap();
        let (name, format) = if mm { ("a.mtx", Format::MatrixMarket) } else { ("a.json", Format::Json) };
        let path = dir.path().join(name);
        save_matrix(&a, &path, format).unwrap();
        let b = load_matrix(&path, format).unwrap();
        prop_assert_eq!(a.as_dmatrix(), b.as_dmatrix());
        prop_assert_eq!(b.mode(), Mode::Float);
    }

    #[test]
    fn rational_round_trip_is_exact(pick in 0usize..5, mm in any::<bool>()) {
        let a = match pick {
            0 => rogue_matrix(4, Mode::Rational).unwrap(),
            1 => rogue_matrix(9, Mode::Rational).unwrap(),
            2 => rogue_matrix(16, Mode::Rational).unwrap(),
            3 => klawe_vazirani(7, Mode::Rational).unwrap(),
            _ => klawe_vazirani(11, Mode::Rational).unwrap(),
        };
        let dir = tempfile::tempdir().unwrap();
        let (name, format) = if mm { ("a.mm", Format::MatrixMarket) } else { ("a.json", Format::Json) };
        let path = dir.path().join(name);
        save_matrix(&a, &path, format).unwrap();
        let b = load_matrix(&path, format).unwrap();
        prop_assert_eq!(a.exact(), b.exact());
        prop_assert_eq!(a.as_dmatrix(), b.as_dmatrix());
    }

    #[test]
    fn unit_scaling_is_idempotent(n in 2usize..9, seed in any::<u64>(), c in 0.1f64..10.0) {
        let r = irreducible(n, seed).scaled(c).unwrap();
        let once = scale_to_unit_pf(&r, &pf(&r)).unwrap();
        let twice = scale_to_unit_pf(&once, &pf(&once)).unwrap();
        prop_assert!((once.as_dmatrix() - twice.as_dmatrix()).amax() <= 1e-12);
    }

    #[test]
    fn random_doubly_stochastic_is_irreducible(n in 2usize..12, seed in any::<u64>()) {
        let a = ds(n, seed);
        prop_assert!(a.is_doubly_stochastic());
        prop_assert_eq!(pf(&a).classification, Classification::Irreducible);
        if n >= 2 {
            prop_assert!(phi(&a) > 0.0);
        }
    }

    #[test]
    fn perron_pair_is_accurate(n in 1usize..10, seed in any::<u64>()) {
        let r = irreducible(n, seed);
        let p = pf(&r);
        let a = r.as_dmatrix();
        let v = nalgebra::DVector::from_column_slice(&p.v);
        let u = nalgebra::DVector::from_column_slice(&p.u);
        prop_assert!((a * &v - &v * p.r).amax() <= 1e-10 * p.r * v.amax());
        prop_assert!((a.tr_mul(&u) - &u * p.r).amax() <= 1e-10 * p.r * u.amax());
        prop_assert!((u.dot(&v) - 1.0).abs() <= 1e-12);
        prop_assert!(p.kappa > 0.0 && p.kappa <= 1.0);
        prop_assert!(eulerian_defect(&r, &p) <= 1e-10);
    }

    #[test]
    fn doubly_stochastic_kappa(n in 2usize..12, seed in any::<u64>()) {
        let p = pf(&ds(n, seed));
        prop_assert!((p.kappa - 1.0 / n as f64).abs() <= 1e-12);
    }

    #[test]
    fn balancing_preserves_spectrum_and_phi(n in 2usize..9, seed in any::<u64>()) {
        let r = irreducible(n, seed);
        let p = pf(&r);
        let unit = scale_to_unit_pf(&r, &p).unwrap();
        let pu = pf(&unit);
        let (a, w) = balance(&unit, &pu).unwrap();
        let d = spectrum_distance(
            &eigenvalues(unit.as_dmatrix()).unwrap(),
            &eigenvalues(a.as_dmatrix()).unwrap(),
        );
        prop_assert!(d <= 1e-8, "spectrum moved by {}", d);
        let pa = spectregap::pf::PfData { u: w.clone(), v: w.clone(), w, ..pu.clone() };
        let before = phi_exact(&unit, &pu, 24).unwrap().phi;
        let after = phi_exact(&a, &pa, 24).unwrap().phi;
        prop_assert!((before - after).abs() <= 1e-10);
    }

    #[test]
    fn lazify_maps_spectrum_affinely(n in 1usize..9, seed in any::<u64>(), p in 0.0f64..1.0) {
        let r = irreducible(n, seed);
        let l = lazify(&r, p).unwrap();
        let want: Vec<_> = eigenvalues(r.as_dmatrix())
            .unwrap()
            .into_iter()
            .map(|z| z * (1.0 - p) + p)
            .collect();
        let d = spectrum_distance(&eigenvalues(l.as_dmatrix()).unwrap(), &want);
        prop_assert!(d <= 1e-8, "distance {}", d);
    }

    #[test]
    fn cut_complement_symmetry(n in 2usize..11, seed in any::<u64>(), mask in any::<u64>()) {
        let r = irreducible(n, seed);
        let p = pf(&r);
        let full = (1u64 << n) - 1;
        let s = mask & full;
        prop_assume!(s != 0 && s != full);
        let a = phi_cut(&r, &p, s).unwrap();
        let b = phi_cut(&r, &p, full ^ s).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn phi_is_scale_invariant(n in 2usize..9, seed in any::<u64>()) {
        let r = scale_to_unit_pf(&irreducible(n, seed), &pf(&irreducible(n, seed))).unwrap();
        let r3 = r.scaled(3.0).unwrap();
        let back = scale_to_unit_pf(&r3, &pf(&r3)).unwrap();
        prop_assert!((phi(&r) - phi(&back)).abs() <= 1e-12);
    }

    #[test]
    fn phi_of_transpose(n in 2usize..11, seed in any::<u64>()) {
        let a = ds(n, seed);
        prop_assert!((phi(&a) - phi(&a.transpose())).abs() <= 1e-12);
    }

    #[test]
    fn submultiplicative(n in 2usize..9, seed in any::<u64>(), k in 1u32..5) {
        let r = scale_to_unit_pf(&irreducible(n, seed), &pf(&irreducible(n, seed))).unwrap();
        let p = pf(&r);
        let rk = NonnegMatrix::from_dmatrix(r.pow(k).as_dmatrix().clone()).unwrap();
        let lhs = phi_exact(&rk, &p, 24).unwrap().phi;
        prop_assert!(lhs <= k as f64 * phi_exact(&r, &p, 24).unwrap().phi + 1e-10);
    }

    #[test]
    fn phi_zero_iff_reducible(n in 2usize..9, seed in any::<u64>()) {
        let r = sparse(n, seed);
        let p = pf(&r);
        let value = match p.classification {
            Classification::ReducibleDegenerate => 0.0,
            _ => phi_exact(&r, &p, 24).unwrap().phi,
        };
        prop_assert_eq!(value == 0.0, p.classification != Classification::Irreducible);
    }

    #[test]
    fn schur_diagonal_matches_oracle(n in 1usize..14, seed in any::<u64>()) {
        let r = irreducible(n, seed);
        let mine = schur_decompose(&r).unwrap().eigenvalues();
        let oracle: Vec<_> = nalgebra::Schur::new(r.as_dmatrix().clone())
            .complex_eigenvalues()
            .iter()
            .cloned()
            .collect();
        prop_assert!(spectrum_distance(&mine, &oracle) <= 1e-8);
    }

    #[test]
    fn doubly_stochastic_spectrum(n in 2usize..11, seed in any::<u64>(), split in any::<bool>()) {
        let a = if split && n >= 4 {
            let (b, c) = (ds(n / 2, seed), ds(n - n / 2, seed ^ 1));
            let mut m = DMatrix::zeros(n, n);
            m.view_mut((0, 0), (n / 2, n / 2)).copy_from(b.as_dmatrix());
            m.view_mut((n / 2, n / 2), (n - n / 2, n - n / 2)).copy_from(c.as_dmatrix());
            NonnegMatrix::from_dmatrix(m).unwrap()
        } else {
            ds(n, seed)
        };
        let p = pf(&a);
        let s = spectregap::spectral::spectral_summary(&a, &p.w).unwrap();
        prop_assert!(s.nontrivial_eigs.iter().all(|z| z.norm() <= 1.0 + 1e-8));
        let phi_zero = phi_exact(&a, &p, 24).unwrap().phi == 0.0;
        prop_assert_eq!((s.lambda2.re - 1.0).abs() <= 1e-8, phi_zero);
    }

    #[test]
    fn symmetric_singular_values_are_moduli(n in 2usize..11, seed in any::<u64>()) {
        let a = ds(n, seed);
        let m = spectregap::pf::additive_symmetrize(&a);
        let mut ev: Vec<f64> = eigenvalues(m.as_dmatrix()).unwrap().iter().map(|z| z.norm()).collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        let sv = singular_values(m.as_dmatrix());
        for (x, y) in ev.iter().zip(&sv) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bound_reports_pass(n in 3usize..10, seed in any::<u64>(), variant in 0usize..4) {
        let a = ds(n, seed);
        let m = match variant {
            0 => a,
            1 => lazify(&a, 0.5).unwrap(),
            2 => a.mul(&a),
            _ => spectregap::pf::additive_symmetrize(&a),
        };
        let rep = bound_report(&m).unwrap();
        prop_assert!(rep.all_pass(), "{:?}", rep.records);
    }

    #[test]
    fn mixing_sandwich_on_lazy_inputs(n in 2usize..9, seed in any::<u64>(), general in any::<bool>()) {
        let r = if general { irreducible(n, seed) } else { ds(n, seed) };
        let unit = scale_to_unit_pf(&r, &pf(&r)).unwrap();
        let l = lazify(&unit, 0.5).unwrap();
        let rep = mixing_bounds(&l, &pf(&l), 0.25).unwrap();
        prop_assert!(rep.all_pass(), "{:?}", rep.records);
        prop_assert!(rep.tau.steps().is_some());
    }

    #[test]
    fn residual_is_monotone(n in 2usize..9, seed in any::<u64>()) {
        let r = irreducible(n, seed);
        let unit = scale_to_unit_pf(&r, &pf(&r)).unwrap();
        let l = lazify(&unit, 0.5).unwrap();
        let p = pf(&l);
        let mut pw = l.as_dmatrix().clone();
        let mut prev = mixing_residual(&pw, &p);
        for _ in 0..40 {
            pw = &pw * l.as_dmatrix();
            let cur = mixing_residual(&pw, &p);
            prop_assert!(cur <= prev + 1e-12);
            prev = cur;
        }
    }
}
