//! One test per acceptance criterion; each prints a PASS/FAIL line.
//! Run with `cargo test --test acceptance -- --nocapture --test-threads 1`.

mod common;

use std::time::Instant;

use common::{decomposition, fixture, form, planted, report};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symtensor::extension::{
    commutation_system, numeric_family, solve_extension, PencilSystem, SolverOptions,
};
use symtensor::hankel::{
    build_hankel, catalecticant_rank, full_rank_principal_minor, kernel_generators, multiplication_matrices,
    MonomialBasis, RANK_TOL,
};
use symtensor::linalg::{self, random_complex_gaussian, CMat, C64};
use symtensor::pipeline::{classify_ternary_cubic, decompose, verify, DecomposeOptions, OrbitClass};
use symtensor::poly::{chordal_distance, DualForm, Exponent, HomogeneousPoly, LinearChange};
use symtensor::sylvester::{binary_decompose, hankel_slice, projective_roots, BinaryForm};

fn affine_point(form: &[C64]) -> Vec<C64> {
    form[1..].iter().map(|z| z / form[0]).collect()
}

#[test]
fn criterion_1_quintic_example() {
    let f = form("ex61.txt");
    let start = Instant::now();
    let rep = decompose(&f, &DecomposeOptions::default()).unwrap();
    let elapsed = start.elapsed();

    let expected: [[f64; 2]; 4] = [[2.0, 3.0], [-2.0, 3.0], [-12.0, -3.0], [12.0, -13.0]];
    let points: Vec<Vec<C64>> = rep.decomposition.terms().iter().map(|t| affine_point(&t.form)).collect();
    let matched = expected.iter().all(|p| {
        let pn = (p[0] * p[0] + p[1] * p[1]).sqrt();
        points.iter().any(|z| {
            let err = ((z[0] - C64::new(p[0], 0.0)).norm_sqr() + (z[1] - C64::new(p[1], 0.0)).norm_sqr()).sqrt();
            err / pn < 1e-6
        })
    });
    // independent check of the reference points: the exact decomposition on them re-expands to f
    let exact = verify(&f, &decomposition("ex61_exact.json")).unwrap().residual;

    let pass = rep.rank == 4 && matched && rep.residual < 1e-7 && elapsed.as_secs_f64() < 1.0 && exact < 1e-12;
    report(
        "criterion 1 (quintic example)",
        pass,
        &format!(
            "rank {}, points matched {matched}, residual {:.2e}, {:.3?}, reference residual {exact:.1e}",
            rep.rank, rep.residual, elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_quartic_example() {
    let f = form("ex62.txt");
    let start = Instant::now();
    let rep = decompose(&f, &DecomposeOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let lower = catalecticant_rank(&DualForm::from_form(&f, 0).unwrap(), RANK_TOL);
    let printed = verify(&f, &decomposition("ex62_printed.json")).unwrap();

    let pass = rep.rank == 6 && rep.residual < 1e-6 && elapsed.as_secs_f64() < 10.0 && printed.residual <= 5e-3;
    report(
        "criterion 2 (quartic example)",
        pass,
        &format!(
            "rank {} (catalecticant bound {lower}), residual {:.2e}, {:.3?}, printed decomposition residual {:.2e}",
            rep.rank, rep.residual, elapsed, printed.residual
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_cubic_classes() {
    let cases = [
        ("cubic_cube.txt", OrbitClass::Cube, 1),
        ("cubic_two_cubes.txt", OrbitClass::SumTwoCubes, 2),
        ("cubic_square_line.txt", OrbitClass::SquareTimesLine, 3),
        ("cubic_fermat.txt", OrbitClass::Fermat, 3),
        ("cubic_generic.txt", OrbitClass::Generic, 4),
        ("cubic_maximal.txt", OrbitClass::Maximal, 5),
    ];
    let mut all = true;
    let mut details = Vec::new();
    for (name, class, rank) in cases {
        let got = classify_ternary_cubic(&form(name), &DecomposeOptions::default());
        let ok = matches!(&got, Ok(c) if c.class == class && c.rank == rank);
        all &= ok;
        details.push(match got {
            Ok(c) => format!("({},{})", c.rank, c.class),
            Err(e) => format!("error {e}"),
        });
    }
    report("criterion 3 (ternary cubic classes)", all, &details.join(" "));
    assert!(all);
}

/// The literal printed five-term decomposition of `x0^2 x1 + x0 x2^2`.
fn extreme_printed_residual() -> f64 {
    verify(&form("extreme.txt"), &decomposition("extreme_printed.json")).unwrap().residual
}

#[test]
fn criterion_4_extreme_rank_example() {
    let f = form("extreme.txt");
    let rep = decompose(&f, &DecomposeOptions::default()).unwrap();
    let lower = decompose(&f, &DecomposeOptions { max_rank: Some(4), ..DecomposeOptions::default() }).is_err();
    let computed = rep.rank == 5 && rep.residual < 1e-6;
    report(
        "criterion 4a (extreme-rank example, computed)",
        computed,
        &format!("rank {}, residual {:.2e}, no rank-4 decomposition found: {lower}", rep.rank, rep.residual),
    );
    let printed = extreme_printed_residual();
    report(
        "criterion 4b (extreme-rank example, printed decomposition)",
        printed <= 5e-3,
        &format!(
            "residual {printed:.3e} for the decomposition as printed; see tests/acceptance.rs \
             `criterion_4b_printed_decomposition` (ignored) and the README"
        ),
    );
    assert!(computed);
}

/// Asserts the printed five-term decomposition at the stated threshold. As
/// printed it does not re-expand to the form (two terms carry transcription
/// slips), so this is ignored in the default run.
#[test]
#[ignore = "the printed decomposition has residual about 3.87; see README"]
fn criterion_4b_printed_decomposition() {
    let printed = extreme_printed_residual();
    assert!(printed <= 5e-3, "residual {printed}");
}

#[test]
fn criterion_5_sylvester() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials: usize = 100;
    let mut ok = 0;
    for trial in 0..trials {
        let d: u32 = rng.random_range(4..=10);
        let r = rng.random_range(1..=(d / 2) as usize);
        let (dec, f) = planted(&mut rng, 2, d, r);
        let p = BinaryForm::from_poly(&f).unwrap();
        let good = (|| {
            let got = binary_decompose(&p, trial as u64, 1e-8).ok()?;
            let res = verify(&f, &got).ok()?.residual;
            let kernel = linalg::null_space(&hankel_slice(&p, r).ok()?, RANK_TOL);
            if got.rank() != r || res >= 1e-8 || kernel.ncols() != 1 {
                return None;
            }
            let roots = projective_roots(kernel.column(0).as_slice()).ok()?;
            let all_match = dec
                .terms()
                .iter()
                .all(|t| roots.iter().any(|root| chordal_distance(&t.form, root) < 1e-6));
            all_match.then_some(())
        })()
        .is_some();
        ok += usize::from(good);
    }
    let pass = ok * 100 >= 98 * trials;
    report("criterion 5 (Sylvester)", pass, &format!("{ok}/{trials} recovered"));
    assert!(pass);
}

#[test]
fn criterion_6a_apolar_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..=4);
        let d = rng.random_range(1..=6);
        let coeffs: Vec<(Exponent, C64)> =
            Exponent::all_of_degree(n, d).into_iter().map(|e| (e, random_complex_gaussian(&mut rng))).collect();
        let f = HomogeneousPoly::new(n, d, coeffs).unwrap();
        let k: Vec<C64> = (0..n).map(|_| random_complex_gaussian(&mut rng)).collect();
        let lhs = f.apolar(&HomogeneousPoly::power_of_linear_form(&k, d).unwrap()).unwrap();
        let rhs = f.eval(&k);
        worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
    }
    let pass = worst < 1e-10;
    report("criterion 6a (apolar identity)", pass, &format!("200 pairs, worst relative error {worst:.1e}"));
    assert!(pass);
}

#[test]
fn criterion_6b_hankel_rank_of_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let mut failures = Vec::new();
    let mut trials = 0;
    for r in 1..=8 {
        for _ in 0..5 {
            trials += 1;
            let points: Vec<Vec<C64>> =
                (0..r).map(|_| (0..2).map(|_| random_complex_gaussian(&mut rng) * 0.7).collect()).collect();
            let weights: Vec<C64> = (0..r).map(|_| random_complex_gaussian(&mut rng)).collect();
            let l = DualForm::from_points(&points, &weights, 6).unwrap();
            let got = catalecticant_rank(&l, RANK_TOL);
            if got != r {
                failures.push((r, got));
            }
        }
    }
    let pass = failures.is_empty();
    report("criterion 6b (Hankel rank of r points)", pass, &format!("{trials} moment sequences, mismatches {failures:?}"));
    assert!(pass);
}

fn relative_commutator(l: &DualForm, basis: &MonomialBasis, sol: &symtensor::extension::ExtensionSolution) -> f64 {
    let ext = l.with_assignment(&sol.assignment);
    let family = numeric_family(&ext, basis).unwrap();
    let mults = multiplication_matrices(&family[0], &family[1..]).unwrap();
    let mut worst: f64 = 0.0;
    for a in &mults {
        for b in &mults {
            let (ma, mb) = (&a.matrix, &b.matrix);
            worst = worst.max((ma * mb - mb * ma).norm() / (ma.norm() * mb.norm()));
        }
    }
    worst
}

#[test]
fn criterion_6c_commuting_multiplication_matrices() {
    let mut norms = Vec::new();
    let quartic = DualForm::from_form(&form("ex62.txt"), 0).unwrap();
    let graded = MonomialBasis::new(2, Exponent::all_up_to(2, 2)).unwrap();
    let sys = commutation_system(&quartic, &graded).unwrap();
    for seed in 0..4 {
        let sol = solve_extension(&sys, &SolverOptions { seed, ..SolverOptions::default() }).unwrap();
        norms.push(relative_commutator(&quartic, &graded, &sol));
    }
    let extreme = DualForm::from_form(&form("extreme.txt"), 0).unwrap();
    let ex = |v: [u32; 2]| Exponent::new(v.to_vec());
    let b = MonomialBasis::new(2, vec![ex([0, 0]), ex([1, 0]), ex([0, 1]), ex([2, 0]), ex([1, 1])]).unwrap();
    let pencil = PencilSystem::new(&extreme, &b).unwrap();
    let sol = solve_extension(&pencil, &SolverOptions { seed: 3, ..SolverOptions::default() }).unwrap();
    norms.push(relative_commutator(&extreme, &b, &sol));

    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for _ in 0..3 {
        let (_, f) = planted(&mut rng, 3, 4, 6);
        let l = DualForm::from_form(&f, 0).unwrap();
        let sys = commutation_system(&l, &graded).unwrap();
        let sol = solve_extension(&sys, &SolverOptions::default()).unwrap();
        norms.push(relative_commutator(&l, &graded, &sol));
    }
    let worst = norms.iter().copied().fold(0.0, f64::max);
    let pass = worst < 1e-6;
    report("criterion 6c (commutators)", pass, &format!("{} extensions, worst relative norm {worst:.1e}", norms.len()));
    assert!(pass);
}

/// `max |Λ(g m)| / Σ |g_α| |Λ(x^{α+m})|` over known products.
fn annihilation_error(l: &DualForm, d: u32) -> f64 {
    let half = Exponent::all_up_to(l.n_vars(), d / 2);
    let (basis, _) = full_rank_principal_minor(&build_hankel(l, &half, &half), RANK_TOL).unwrap();
    let gens = kernel_generators(l, &basis).unwrap();
    let mut worst: f64 = 0.0;
    for g in &gens {
        for m in Exponent::all_up_to(l.n_vars(), d.saturating_sub(g.degree())) {
            let mut value = C64::default();
            let mut scale = 0.0;
            for (e, c) in &g.coeffs {
                let moment = l.get(&e.add(&m)).unwrap();
                value += c * moment;
                scale += c.norm() * moment.norm();
            }
            if scale > 0.0 {
                worst = worst.max(value.norm() / scale);
            }
        }
    }
    worst
}

#[test]
fn criterion_6d_kernel_generators() {
    let mut errors = vec![annihilation_error(&DualForm::from_form(&form("ex61.txt"), 0).unwrap(), 5)];
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for r in [2, 3, 4, 4] {
        let (_, f) = planted(&mut rng, 3, 5, r);
        errors.push(annihilation_error(&DualForm::from_form(&f, 0).unwrap(), 5));
    }
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let pass = worst < 1e-8;
    report("criterion 6d (kernel generators)", pass, &format!("{} functionals, worst relative value {worst:.1e}", errors.len()));
    assert!(pass);
}

fn random_change<R: Rng>(rng: &mut R, n: usize) -> LinearChange {
    loop {
        let m = CMat::from_fn(n, n, |_, _| random_complex_gaussian(rng));
        if let Ok(c) = LinearChange::new(m) {
            return c;
        }
    }
}

#[test]
fn criterion_6e_rank_invariance() {
    let fixtures = [
        ("ex61.txt", 4),
        ("ex62.txt", 6),
        ("extreme.txt", 5),
        ("cubic_cube.txt", 1),
        ("cubic_two_cubes.txt", 2),
        ("cubic_square_line.txt", 3),
        ("cubic_fermat.txt", 3),
        ("cubic_generic.txt", 4),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    let mut mismatches = Vec::new();
    let mut trials = 0;
    for (name, expected) in fixtures {
        let f = form(name).embed(3).unwrap();
        for t in 0..20 {
            trials += 1;
            let g = f.change_coordinates(&random_change(&mut rng, 3)).unwrap();
            let opts = DecomposeOptions { seed: t, ..DecomposeOptions::default() };
            match decompose(&g, &opts) {
                Ok(rep) if rep.rank == expected => {}
                Ok(rep) => mismatches.push(format!("{name}#{t}: rank {}", rep.rank)),
                Err(e) => mismatches.push(format!("{name}#{t}: {e}")),
            }
        }
    }
    let pass = mismatches.is_empty();
    report("criterion 6e (rank invariance)", pass, &format!("{trials} coordinate changes, mismatches {mismatches:?}"));
    assert!(pass);
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn criterion_6f_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let trials = 50;
    let mut ok = 0;
    let mut misses = Vec::new();
    for seed in 0..trials {
        let n: usize = rng.random_range(2..=3);
        let d: u32 = rng.random_range(3..=5);
        let generic = binomial((n as u64) + u64::from(d), u64::from(d)).div_ceil(n as u64 + 1) as usize;
        let r = rng.random_range(1..generic);
        let (_, f) = planted(&mut rng, n + 1, d, r);
        match decompose(&f, &DecomposeOptions { seed, ..DecomposeOptions::default() }) {
            Ok(rep) if rep.rank == r && rep.residual < 1e-7 => ok += 1,
            Ok(rep) => misses.push(format!("n={n} d={d} r={r}: rank {}", rep.rank)),
            Err(e) => misses.push(format!("n={n} d={d} r={r}: {e}")),
        }
    }
    let pass = ok * 100 >= 95 * trials as usize;
    report("criterion 6f (round trip)", pass, &format!("{ok}/{trials} recovered; misses {misses:?}"));
    assert!(pass);
}

/// All monomials of degree 3 in 3 variables.
fn cubic_monomials() -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in (0..=3).rev() {
        for b in (0..=3 - a).rev() {
            out.push([a, b, 3 - a - b]);
        }
    }
    out
}

fn multinomial3(e: &[u32; 3]) -> f64 {
    let fact = |k: u32| (1..=k).product::<u32>() as f64;
    6.0 / (fact(e[0]) * fact(e[1]) * fact(e[2]))
}

/// Coefficients of `Σ_j (k_j · x)^3` and their Jacobian in the `3s` entries.
fn power_sum_and_jacobian(z: &DVector<C64>, mons: &[[u32; 3]]) -> (DVector<C64>, DMatrix<C64>) {
    let s = z.len() / 3;
    let mut val = DVector::zeros(mons.len());
    let mut jac = DMatrix::zeros(mons.len(), z.len());
    for (row, e) in mons.iter().enumerate() {
        let m = multinomial3(e);
        for j in 0..s {
            let k = [z[3 * j], z[3 * j + 1], z[3 * j + 2]];
            let mono = |skip: Option<usize>| {
                let mut p = C64::new(m, 0.0);
                for v in 0..3 {
                    let pow = e[v] - u32::from(skip == Some(v));
                    p *= k[v].powu(pow);
                }
                p
            };
            val[row] += mono(None);
            for v in 0..3 {
                if e[v] > 0 {
                    jac[(row, 3 * j + v)] += mono(Some(v)) * f64::from(e[v]);
                }
            }
        }
    }
    (val, jac)
}

/// Smallest `s` for which Levenberg-Marquardt on the `3s` entries of
/// `k_1..k_s` drives `‖Σ (k_j · x)^3 - f‖ / ‖f‖` below `1e-9`; weights are
/// absorbed into the forms since every complex number is a cube.
fn brute_force_rank(f: &HomogeneousPoly, seed: u64) -> usize {
    let mons = cubic_monomials();
    let target = DVector::from_iterator(mons.len(), mons.iter().map(|e| f.coeff(&Exponent::new(e.to_vec()))));
    let fnorm = target.norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 1..=5 {
        for _ in 0..40 {
            let mut z = DVector::from_fn(3 * s, |_, _| random_complex_gaussian(&mut rng));
            let mut mu = 1e-2;
            for _ in 0..400 {
                let (val, jac) = power_sum_and_jacobian(&z, &mons);
                let res = &val - &target;
                if res.norm() / fnorm < 1e-9 {
                    return s;
                }
                let jh = jac.adjoint();
                let mut normal = &jh * &jac;
                for i in 0..normal.nrows() {
                    normal[(i, i)] += C64::new(mu, 0.0);
                }
                let Some(step) = normal.lu().solve(&(&jh * &res)) else { break };
                let trial = &z - step;
                let (tval, _) = power_sum_and_jacobian(&trial, &mons);
                if (&tval - &target).norm() < res.norm() {
                    z = trial;
                    mu = (mu / 3.0).max(1e-12);
                } else {
                    mu *= 4.0;
                }
            }
        }
    }
    usize::MAX
}

#[test]
fn criterion_7_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut disagreements = Vec::new();
    for i in 0..20u64 {
        let r = (i % 3 + 1) as usize;
        let (_, f) = planted(&mut rng, 3, 3, r);
        let oracle = brute_force_rank(&f, 100 + i);
        let ours = decompose(&f, &DecomposeOptions { seed: i, ..DecomposeOptions::default() }).map(|rep| rep.rank);
        if ours.as_ref().ok() != Some(&oracle) {
            disagreements.push(format!("#{i} planted {r}: oracle {oracle}, pipeline {ours:?}"));
        }
    }
    let pass = disagreements.is_empty();
    report("criterion 7 (brute-force oracle)", pass, &format!("20 instances, disagreements {disagreements:?}"));
    assert!(pass);
}

#[test]
fn fixtures_are_the_documented_forms() {
    assert_eq!(fixture("extreme.txt").trim(), "x0^2*x1 + x0*x2^2");
    assert_eq!(form("ex61.txt").coeff(&Exponent::new(vec![5, 0, 0])), C64::new(38.0, 0.0));
}
