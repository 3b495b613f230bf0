use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symtensor::hankel::{catalecticant_rank, is_connected_to_one, MonomialBasis};
use symtensor::linalg::{c, random_complex_gaussian, C64};
use symtensor::poly::text::{parse_input, to_json};
use symtensor::poly::{chordal_distance, expand_power_sum, Decomposition, DualForm, Exponent, HomogeneousPoly, Term};
use symtensor::sylvester::{binary_decompose, BinaryForm};

fn exponent(max_vars: usize, max_part: u32) -> impl Strategy<Value = Exponent> {
    prop::collection::vec(0..=max_part, 1..=max_vars).prop_map(Exponent::new)
}

fn random_form(rng: &mut ChaCha8Rng, n: usize, d: u32) -> HomogeneousPoly {
    let terms = Exponent::all_of_degree(n, d).into_iter().map(|e| (e, random_complex_gaussian(rng)));
    HomogeneousPoly::new(n, d, terms.collect::<Vec<_>>()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_then_unshift_is_identity(e in exponent(5, 6), pick in 0usize..5) {
        let var = pick % e.nvars();
        let up = e.shift(var);
        prop_assert_eq!(up.degree(), e.degree() + 1);
        prop_assert_eq!(up.unshift(var), Some(e.clone()));
        if e.get(var) == 0 {
            prop_assert!(e.unshift(var).is_none());
        }
    }

    #[test]
    fn apolar_pairing_with_a_power_evaluates(seed in any::<u64>(), n in 1usize..=4, d in 1u32..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_form(&mut rng, n, d);
        let k: Vec<C64> = (0..n).map(|_| random_complex_gaussian(&mut rng)).collect();
        let lhs = f.apolar(&HomogeneousPoly::power_of_linear_form(&k, d).unwrap()).unwrap();
        let rhs = f.eval(&k);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), n in 1usize..=4, d in 1u32..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_form(&mut rng, n, d);
        let back = parse_input(&to_json(&f)).unwrap();
        prop_assert_eq!(back.n_vars(), n);
        prop_assert_eq!(back.degree(), d);
        prop_assert!(f.sub(&back).unwrap().norm() <= 1e-14 * f.norm());
    }

    #[test]
    fn moments_of_r_points_have_hankel_rank_r(seed in any::<u64>(), r in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Vec<C64>> =
            (0..r).map(|_| (0..2).map(|_| random_complex_gaussian(&mut rng) * 0.7).collect()).collect();
        let weights: Vec<C64> = (0..r).map(|_| random_complex_gaussian(&mut rng) + c(0.5, 0.0)).collect();
        let l = DualForm::from_points(&points, &weights, 6).unwrap();
        prop_assert_eq!(catalecticant_rank(&l, 1e-9), r);
    }

    #[test]
    fn graded_bases_are_connected(n in 1usize..=4, size in 1usize..=20) {
        let b = MonomialBasis::graded(n, size);
        prop_assert_eq!(b.len(), size);
        prop_assert!(is_connected_to_one(b.monomials()));
        prop_assert!(MonomialBasis::new(n, b.monomials().to_vec()).is_ok());
    }

    #[test]
    fn removing_one_breaks_connectivity(n in 1usize..=4, size in 2usize..=12) {
        let b = MonomialBasis::graded(n, size);
        let without_one: Vec<Exponent> = b.monomials().iter().filter(|m| !m.is_one()).cloned().collect();
        prop_assert!(!is_connected_to_one(&without_one));
        prop_assert!(MonomialBasis::new(n, without_one).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sylvester_recovers_generic_binary_forms(seed in any::<u64>(), d in 3u32..=7, r_pick in 1usize..=4) {
        let r = r_pick.min((d as usize).div_ceil(2));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let forms: Vec<Vec<C64>> = (0..r).map(|_| vec![c(1.0, 0.0), random_complex_gaussian(&mut rng)]).collect();
        let weights: Vec<C64> = (0..r).map(|_| random_complex_gaussian(&mut rng)).collect();
        let planted = Decomposition::new(
            weights.iter().zip(&forms).map(|(w, k)| Term { weight: *w, form: k.clone() }).collect(),
            d,
        );
        let p = BinaryForm::from_poly(&expand_power_sum(&planted, 2, d).unwrap()).unwrap();
        // planted forms closer than a root separation of ~1e-3 make the instance ill posed
        let separated = forms.iter().enumerate().all(|(i, u)| forms[i + 1..].iter().all(|v| chordal_distance(u, v) > 1e-2));
        prop_assume!(separated && weights.iter().all(|w| w.norm() > 1e-2));
        let dec = binary_decompose(&p, seed, 1e-7).unwrap();
        prop_assert_eq!(dec.rank(), r);
        for k in &forms {
            let best = dec.terms().iter().map(|t| chordal_distance(&t.form, k)).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-6, "form {:?} missed by {}", k, best);
        }
    }
}
