//! Properties of the score estimators on exact joints of random models.

use causal_explain::data::{Dataset, Estimator};
use causal_explain::oracle::generate::{random_scm, RandomScmConfig};
use causal_explain::oracle::{random_query, Scm};
use causal_explain::scores::{default_adjustment, point_scores, score_bounds, ContrastQuery};
use causal_explain::{Error, Rational, ScoreKind};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model(seed: u64, monotone: bool) -> (Scm, Dataset<Rational>, ContrastQuery) {
    let cfg = RandomScmConfig {
        n_features: 3,
        max_domain: 3,
        monotone,
        ..Default::default()
    };
    let scm = random_scm(&cfg, seed).unwrap();
    let joint = scm.exhaustive_joint::<Rational>().unwrap().compact();
    let q = random_query(&scm, "O", &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    (scm, joint, q)
}

fn reversed(d: &Dataset<Rational>) -> Dataset<Rational> {
    let rows: Vec<usize> = (0..d.len()).rev().collect();
    let codes = rows.iter().flat_map(|&r| d.row(r).iter().copied()).collect();
    let weights = rows.iter().map(|&r| d.weight(r).clone()).collect();
    Dataset::from_codes(d.shared_schema(), codes, Some(weights)).unwrap()
}

fn skip_null<T>(r: Result<T, Error>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(Error::ConditioningOnNull { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bounds_contain_the_truth(seed in 0u64..100_000) {
        let (scm, joint, q) = model(seed, false);
        let est = Estimator::new(&joint);
        let adj = default_adjustment(scm.graph(), &q).unwrap();
        let Some(b) = skip_null(score_bounds(&est, scm.graph(), &q, &adj)) else { return Ok(()) };
        let Some(t) = skip_null(scm.ground_truth_scores::<Rational>(&q)) else { return Ok(()) };
        prop_assert!(b.contains(&t, &Rational::zero()));
        for k in ScoreKind::ALL {
            let i = b.get(k);
            prop_assert!(Rational::zero() <= i.lower && i.lower <= i.upper && i.upper <= Rational::one());
        }
    }

    #[test]
    fn monotone_point_scores_are_exact(seed in 0u64..100_000) {
        let (scm, joint, q) = model(seed, true);
        let est = Estimator::new(&joint);
        let adj = default_adjustment(scm.graph(), &q).unwrap();
        let Some(p) = skip_null(point_scores(&est, scm.graph(), &q, &adj)) else { return Ok(()) };
        let Some(t) = skip_null(scm.ground_truth_scores::<Rational>(&q)) else { return Ok(()) };
        prop_assert_eq!(&p.scores, &t);
        let b = score_bounds(&est, scm.graph(), &q, &adj).unwrap();
        prop_assert!(b.contains(&p.scores, &Rational::zero()));
    }

    #[test]
    fn weight_scale_and_row_order_do_not_matter(seed in 0u64..100_000, scale in 1i64..50) {
        let (scm, joint, q) = model(seed, true);
        let c = Rational::from_integer(scale.into());
        let scaled = joint.map_weights(|w| w * &c);
        let shuffled = reversed(&joint);
        let adj = default_adjustment(scm.graph(), &q).unwrap();
        let run = |d: &Dataset<Rational>| {
            let est = Estimator::new(d);
            skip_null(point_scores(&est, scm.graph(), &q, &adj)).map(|p| p.raw)
        };
        let base = run(&joint);
        prop_assert_eq!(&base, &run(&scaled));
        prop_assert_eq!(&base, &run(&shuffled));
        let bounds = |d: &Dataset<Rational>| skip_null(score_bounds(&Estimator::new(d), scm.graph(), &q, &adj));
        prop_assert_eq!(bounds(&joint), bounds(&scaled));
    }
}

#[test]
fn most_random_queries_are_identified() {
    let checked = (0..50u64)
        .filter(|&seed| {
            let (scm, joint, q) = model(seed, true);
            let adj = default_adjustment(scm.graph(), &q).unwrap();
            skip_null(point_scores(&Estimator::new(&joint), scm.graph(), &q, &adj)).is_some()
                && skip_null(scm.ground_truth_scores::<Rational>(&q)).is_some()
        })
        .count();
    assert!(checked >= 25, "only {checked} of 50 queries identified");
}
