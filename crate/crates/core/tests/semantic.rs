mod common;

use std::path::Path;

use num_bigint::BigUint;
use semfill::bench::Task;
use semfill::denote::{contains, count, sample};
use semfill::expr::eval;
use semfill::generate::{generate_str_t_prime, generate_str_u, GenOptions};
use semfill::rank::top_k;
use semfill::space::{GenAtom, Root};
use semfill::syntax::parse_program;
use semfill::table::InputState;

fn task(name: &str) -> Task {
    Task::load(
        &Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../benchmarks")
            .join(name),
    )
    .unwrap()
}

fn values(vs: &semfill::space::VersionSpace) -> Vec<String> {
    vs.nodes.iter().map(|n| n.values[0].clone()).collect()
}

#[test]
fn company_codes_reach_names_through_substrings() {
    let t = task("company-codes");
    let state = InputState::new(["c4 c3 c1"]);
    let vs = generate_str_t_prime(&state, "Facebook", &t.catalog, None);
    let vals = values(&vs);
    for v in ["Facebook", "c3", "Apple", "c1", "Microsoft"] {
        assert!(vals.iter().any(|x| x == v), "{v} not reached: {vals:?}");
    }
    assert!(
        !vals.iter().any(|x| x == "Google"),
        "c2 is not in the input"
    );
    assert!(matches!(vs.root, Root::Node(_)));
}

#[test]
fn company_codes_top_dag_spans_the_output() {
    let t = task("company-codes");
    let state = InputState::new(["c4 c3 c1"]);
    let out = "Facebook Apple Microsoft";
    let vs = generate_str_u(&state, out, &t.catalog, GenOptions::default());
    let Root::Dag(d) = vs.root else {
        panic!("expected a dag root")
    };
    let dag = vs.dag(d);
    assert_eq!(dag.node_count(), 25);
    // the first word comes whole from a lookup
    let edge = dag
        .edges
        .iter()
        .find(|e| e.from == 0 && e.to == 8)
        .expect("edge 0-8");
    assert!(edge
        .atoms
        .iter()
        .any(|a| matches!(a, GenAtom::Whole(n) if vs.node(*n).values[0] == "Facebook")));
    let want = parse_program(
        "Concatenate(Select(Name, Comp, Id = SubStr2(v1, AlphTok, 1)), ConstStr(\" \"), \
         Select(Name, Comp, Id = SubStr2(v1, AlphTok, 2)), ConstStr(\" \"), \
         Select(Name, Comp, Id = SubStr2(v1, AlphTok, 3)))",
    )
    .unwrap();
    assert!(contains(&vs, &want));
}

#[test]
fn bike_prices_index_with_concatenated_inputs() {
    let t = task("bike-prices");
    let state = InputState::new(["Honda", "125"]);
    let vs = generate_str_u(&state, "11,500", &t.catalog, GenOptions::default());
    let want = parse_program("Select(Price, BikePrices, Bike = Concatenate(v1, v2))").unwrap();
    assert!(contains(&vs, &want));
    assert_eq!(top_k(&vs, 1)[0].program, want);
    for e in sample(&vs, 200, 5) {
        assert_eq!(eval(&e, &state, &t.catalog).unwrap(), "11,500", "{e}");
    }
}

#[test]
fn selling_price_space_is_large() {
    let t = task("selling-price");
    let (state, out) = &t.examples[0];
    let vs = generate_str_u(state, out, &t.catalog, GenOptions::default());
    assert!(count(&vs) >= BigUint::from(10u64).pow(10));
    for e in sample(&vs, 300, 9) {
        assert_eq!(&eval(&e, state, &t.catalog).unwrap(), out, "{e}");
    }
}

#[test]
fn expected_programs_reproduce_every_row() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks");
    for t in Task::load_all(&root).unwrap() {
        let Some(e) = &t.expected else { continue };
        for (input, want) in t.examples.iter().chain(&t.holdout) {
            assert_eq!(
                &eval(e, input, &t.catalog).unwrap(),
                want,
                "{}: {e}",
                t.name
            );
        }
    }
}

#[test]
fn expected_programs_are_in_the_first_space() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks");
    for t in Task::load_all(&root).unwrap() {
        let Some(e) = &t.expected else { continue };
        let (input, out) = &t.examples[0];
        let vs = generate_str_u(input, out, &t.catalog, GenOptions::default());
        assert!(contains(&vs, e), "{}: {e}", t.name);
    }
}
