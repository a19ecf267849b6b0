use super::*;
use crate::corpus::ground_truth;
use crate::evaluation::{evaluate_project, Method};
use crate::similarity::{score_pair, FeatureMask};
use proptest::prelude::*;

fn small(seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        seed,
        n_clusters: 3,
        n_singletons: 4,
        vocabulary_size: 300,
        ..GeneratorSpec::default()
    }
}

#[test]
fn words_are_distinct() {
    let words: HashSet<String> = (0..5000).map(word).collect();
    assert_eq!(words.len(), 5000);
    assert_eq!(word(0), "bababa");
    assert!(words.iter().all(|w| !STOPWORDS.contains(&w.as_str())));
}

#[test]
fn same_seed_same_corpus() {
    let a = generate_corpus(&small(4)).unwrap();
    let b = generate_corpus(&small(4)).unwrap();
    assert_eq!(a.project, b.project);
    assert_eq!(a.images, b.images);
    assert_eq!(a.embeddings, b.embeddings);
    let c = generate_corpus(&small(5)).unwrap();
    assert_ne!(a.project, c.project);
}

#[test]
fn labels_follow_the_spec() {
    let spec = small(9);
    let g = generate_corpus(&spec).unwrap();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &g.project.reports {
        *counts.entry(r.label.as_str()).or_default() += 1;
    }
    assert_eq!(
        counts.get(DEFAULT_SINGLETON_LABEL),
        Some(&spec.n_singletons)
    );
    assert_eq!(counts.len(), spec.n_clusters + 1);
    for (label, n) in counts {
        if label != DEFAULT_SINGLETON_LABEL {
            assert!((spec.cluster_size.min..=spec.cluster_size.max).contains(&n));
        }
    }
}

#[test]
fn two_clean_clusters_are_found_by_every_method() {
    let spec = GeneratorSpec {
        seed: 1,
        n_clusters: 2,
        cluster_size: ClusterSize { min: 2, max: 2 },
        n_singletons: 0,
        intra_overlap: 1.0,
        cross_overlap: 0.0,
        screenshot_reuse: 1.0,
        screenshot_coverage: 1.0,
        ..GeneratorSpec::default()
    };
    let g = generate_corpus(&spec).unwrap();
    assert_eq!(g.project.len(), 4);
    let features = g.featurize(&g.resources()).unwrap();
    let gt = ground_truth(&g.project);
    for name in ["setu", "onlytext", "onlyimage"] {
        let m = Method::parse(name, 0.94).unwrap();
        let report = evaluate_project(&features, &gt, m.combiner, m.mask).unwrap();
        assert_eq!(report.recall_at_1, 1.0, "{name}");
    }
}

#[test]
fn confusable_patterns_are_planted() {
    let spec = GeneratorSpec {
        seed: 3,
        n_clusters: 4,
        pattern1_pairs: 1,
        pattern2_pairs: 1,
        planted_threshold: Some(0.9),
        ..GeneratorSpec::default()
    };
    let g = generate_corpus(&spec).unwrap();
    let res = g.resources();
    let features = g.featurize(&res).unwrap();
    let gt = ground_truth(&g.project);
    let at = |id: &str| features.position(id).unwrap();
    let tokens = |id: &str| {
        let r = &g.project.reports[at(id)];
        let mut t = res.tokens(&r.description()).0;
        t.sort();
        t
    };

    let p1 = &g.pattern1[0];
    assert_eq!(tokens(&p1.anchor), tokens(&p1.confusable));
    assert!(gt
        .duplicates_of(&p1.anchor)
        .unwrap()
        .contains(p1.duplicate.as_str()));
    assert!(!gt
        .duplicates_of(&p1.anchor)
        .unwrap()
        .contains(p1.confusable.as_str()));
    let s = |a: &str, b: &str| {
        score_pair(
            &features.bundles[at(a)],
            &features.bundles[at(b)],
            FeatureMask::FULL,
        )
        .unwrap()
    };
    let conf = s(&p1.anchor, &p1.confusable).s_screenshot;
    let dup = s(&p1.anchor, &p1.duplicate).s_screenshot;
    // the window applies to the closest cluster member, the anchor may be further
    assert!(conf <= 0.898, "{conf}");
    let closest = gt
        .duplicates_of(&p1.anchor)
        .unwrap()
        .iter()
        .chain([&p1.anchor.as_str()])
        .filter(|id| g.project.reports[at(id)].screenshot.is_some())
        .map(|id| s(id, &p1.confusable).s_screenshot)
        .fold(0.0, f64::max);
    assert!(closest > 0.892 && closest <= 0.898, "{closest}");
    assert!(dup > 0.902 && dup <= 0.908, "{dup}");

    let p2 = &g.pattern2[0];
    let a = g.project.reports[at(&p2.anchor)]
        .screenshot
        .as_ref()
        .unwrap();
    let c = g.project.reports[at(&p2.confusable)]
        .screenshot
        .as_ref()
        .unwrap();
    assert_eq!(g.images[a], g.images[c]);
    let ta: HashSet<String> = tokens(&p2.anchor).into_iter().collect();
    assert!(tokens(&p2.confusable).iter().all(|t| !ta.contains(t)));
    assert!(!gt
        .duplicates_of(&p2.anchor)
        .unwrap()
        .contains(p2.confusable.as_str()));
}

#[test]
fn infeasible_specs_are_rejected() {
    let bad = [
        GeneratorSpec {
            intra_overlap: 1.5,
            ..small(1)
        },
        GeneratorSpec {
            cluster_size: ClusterSize { min: 3, max: 2 },
            ..small(1)
        },
        GeneratorSpec {
            pattern1_pairs: 2,
            pattern2_pairs: 2,
            ..small(1)
        },
        GeneratorSpec {
            vocabulary_size: 20,
            ..small(1)
        },
        GeneratorSpec {
            planted_threshold: Some(0.9),
            ..small(1)
        },
        GeneratorSpec {
            planted_threshold: Some(0.99),
            pattern1_pairs: 1,
            ..small(1)
        },
    ];
    for spec in bad {
        assert!(
            matches!(generate_corpus(&spec), Err(Error::Spec(_))),
            "{spec:?}"
        );
    }
}

#[test]
fn written_corpus_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate_corpus(&small(2)).unwrap();
    let b = generate_corpus(&GeneratorSpec {
        project_id: "P2".into(),
        ..small(3)
    })
    .unwrap();
    let manifest = write_corpus(dir.path(), &[a.clone(), b]).unwrap();
    let corpus = crate::corpus::load_corpus(&manifest).unwrap();
    assert_eq!(corpus.projects.len(), 2);
    assert_eq!(corpus.projects[0], a.project);

    let res = TextResources::load(
        &dir.path().join(STOPWORDS_FILE),
        &dir.path().join(SYNONYMS_FILE),
        &dir.path().join(EMBEDDINGS_FILE),
    )
    .unwrap();
    let from_disk = crate::pipeline::featurize_corpus(&corpus, &res).unwrap();
    assert_eq!(from_disk[0], a.featurize(&a.resources()).unwrap());
}

#[test]
fn suite_rejects_repeated_project_ids() {
    assert!(matches!(
        generate_suite(&[small(1), small(2)]),
        Err(Error::Spec(_))
    ));
}

#[test]
fn spec_file_accepts_single_and_suite() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("one.json");
    fs::write(&single, r#"{"seed": 7, "n_clusters": 2}"#).unwrap();
    let specs = SpecFile::load(&single).unwrap();
    assert_eq!(specs.len(), 1);
    assert_eq!(specs[0].seed, 7);
    let suite = dir.path().join("suite.json");
    fs::write(
        &suite,
        r#"{"projects": [{"project_id": "A"}, {"project_id": "B"}]}"#,
    )
    .unwrap();
    assert_eq!(SpecFile::load(&suite).unwrap().len(), 2);
    let typo = dir.path().join("typo.json");
    fs::write(&typo, r#"{"n_cluster": 2}"#).unwrap();
    assert!(SpecFile::load(&typo).is_err());
}

#[test]
fn coverage_converges() {
    let spec = GeneratorSpec {
        seed: 21,
        n_clusters: 0,
        n_singletons: 600,
        screenshot_coverage: 0.9,
        image_width: 32,
        image_height: 48,
        ..GeneratorSpec::default()
    };
    let g = generate_corpus(&spec).unwrap();
    let with = g
        .project
        .reports
        .iter()
        .filter(|r| r.screenshot.is_some())
        .count();
    let rate = with as f64 / g.project.len() as f64;
    assert!((rate - 0.9).abs() <= 0.05, "{rate}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn planted_labels_form_valid_ground_truth(seed in 0u64..1000) {
        let g = generate_corpus(&small(seed)).unwrap();
        let gt = ground_truth(&g.project);
        for i in 0..gt.len() {
            let dups = gt.duplicates_at(i);
            prop_assert!(!dups.contains(&i));
            for &j in dups {
                prop_assert!(gt.duplicates_at(j).contains(&i));
            }
        }
        for r in &g.project.reports {
            if let Some(p) = &r.screenshot {
                prop_assert!(g.images.contains_key(p));
            }
        }
    }
}
