//! Property tests for question generation.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use physquiz_core::concept::{ConceptRecord, IdentifierInfo, RecordSource};
use physquiz_core::dimension::parse_isq;
use physquiz_core::expr::{evaluate, Assignment, Symbol};
use physquiz_core::grader::grade;
use physquiz_core::latex::parse_latex;
use physquiz_core::quiz::{generate_question, render_explanation, render_question_text};
use physquiz_core::solver::{rearrange_all, RearrangementSet};
use proptest::prelude::*;

fn info(symbol: &str, name: &str, dim: &str) -> IdentifierInfo {
    IdentifierInfo {
        symbol: symbol.parse().unwrap(),
        name: name.into(),
        qid: None,
        dimension: Some(parse_isq(dim).unwrap()),
    }
}

fn records() -> Vec<ConceptRecord> {
    let record = |qid: &str, label: &str, latex: &str, dim: &str, ids: Vec<IdentifierInfo>| ConceptRecord {
        qid: qid.into(),
        label: label.into(),
        defining_formula_latex: latex.into(),
        formula_dimension: Some(parse_isq(dim).unwrap()),
        identifiers: ids,
        source: RecordSource::Fixture,
        retrieved_at: 0,
    };
    vec![
        record(
            "Q3711325",
            "speed",
            "v = \\frac{s}{t}",
            "L T^-1",
            vec![info("v", "velocity", "L T^-1"), info("s", "distance", "L"), info("t", "duration", "T")],
        ),
        record(
            "Q35875",
            "mass-energy equivalence",
            "E = m c^2",
            "M L^2 T^-2",
            vec![info("E", "energy", "M L^2 T^-2"), info("m", "mass", "M"), info("c", "speed of light", "L T^-1")],
        ),
        record(
            "Q46276",
            "kinetic energy",
            "E_k = \\frac{1}{2} m v^2",
            "M L^2 T^-2",
            vec![info("E_k", "kinetic energy", "M L^2 T^-2"), info("m", "mass", "M"), info("v", "speed", "L T^-1")],
        ),
        record(
            "Q1",
            "uniform acceleration",
            "v = v_0 + a t",
            "L T^-1",
            vec![
                info("v", "final velocity", "L T^-1"),
                info("v_0", "initial velocity", "L T^-1"),
                info("a", "acceleration", "L T^-2"),
                info("t", "time", "T"),
            ],
        ),
    ]
}

fn rset(record: &ConceptRecord) -> RearrangementSet {
    rearrange_all(&parse_latex(&record.defining_formula_latex).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn same_seed_same_question(which in 0usize..4, seed in any::<u64>(), lo in -20i64..20, width in 0i64..30) {
        let record = &records()[which];
        let set = rset(record);
        let range = lo..=lo + width;
        let a = generate_question(record, &set, None, range.clone(), seed);
        let b = generate_question(record, &set, None, range, seed);
        prop_assert_eq!(&a, &b);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(render_question_text(&a).unwrap(), a.question_text.clone());
            prop_assert_eq!(render_explanation(&a), render_explanation(&b));
        }
    }

    #[test]
    fn explanation_is_consistent(which in 0usize..4, seed in any::<u64>()) {
        let record = &records()[which];
        let set = rset(record);
        let q = generate_question(record, &set, None, 1..=10, seed).unwrap();
        // the stored solution is the rearranged rhs at the givens
        prop_assert_eq!(&evaluate(&q.equation.rhs, &q.assignment()).unwrap(), &q.solution_value);
        let e = render_explanation(&q);
        prop_assert_eq!(e.steps.len(), 3);
        prop_assert_eq!(&evaluate(&e.substituted, &Assignment::new()).unwrap(), &q.solution_value);
        prop_assert_eq!(&e.final_unit, &q.solution_unit);
        for g in &q.givens {
            let triple = format!("{} = {} {}", g.info.symbol, g.value, g.unit);
            prop_assert!(e.steps[1].description.contains(&triple), "{} not in {}", triple, e.steps[1].description);
            prop_assert!(q.question_text.contains(&g.describe()));
        }
        let asked = format!("{} {}", q.target.name, q.target.symbol);
        prop_assert!(q.question_text.contains(&asked));
        // the system's own displayed answer passes the grader
        let report = grade(&q.solution_display(), &q.solution_unit.text, &q.solution_value.value, &q.solution_unit.dimension, &"1/100".parse().unwrap());
        prop_assert!(report.value_correct && report.unit_correct, "{:?}", report);
    }
}

#[test]
fn draws_cover_the_range() {
    let record = &records()[0];
    let set = rset(record);
    let s = Symbol::new("s");
    for range in [1..=10, -5..=5, 7..=7, 97..=103] {
        let mut seen = BTreeSet::new();
        let mut draws = 0;
        for seed in 0..5000 {
            let q = generate_question(record, &set, Some(&s), range.clone(), seed).unwrap();
            for g in &q.givens {
                assert!(range.contains(&i64::try_from(&g.value).unwrap()));
                seen.insert(g.value.clone());
                draws += 1;
            }
        }
        assert!(draws >= 10_000);
        let all: BTreeSet<BigInt> = range.clone().map(BigInt::from).collect();
        assert_eq!(seen, all, "{range:?}");
    }
}
