//! Knill-Laflamme, deletion-channel and product-form tests must agree.

use qecbound::bounds;
use qecbound::kl::{deletion_test, is_correctable, kl_matrix, reference_environment_product_check};
use qecbound::{Assignment, Code, PauliChannel, PauliTerm};

struct Case {
    name: &'static str,
    code: Code,
    channel: PauliChannel,
    correctable: bool,
    degenerate: bool,
}

fn uniform() -> Assignment {
    Assignment::uniform()
}

fn battery() -> Vec<Case> {
    let pairwise3 = PauliChannel::pairwise_correlated(3, &uniform()).unwrap();
    let trivial = Code::from_codewords(&[
        qecbound::codes::basis_vector(2, 0),
        qecbound::codes::basis_vector(2, 1),
    ])
    .unwrap();
    vec![
        Case {
            name: "repetition(1) / pairwise(3)",
            code: Code::repetition_code(1).unwrap(),
            channel: pairwise3.clone(),
            correctable: true,
            degenerate: true,
        },
        Case {
            name: "ancilla(3) / triple(3)",
            code: Code::ancilla_code(3).unwrap(),
            channel: PauliChannel::triple_correlated(3, &uniform()).unwrap(),
            correctable: true,
            degenerate: false,
        },
        Case {
            name: "repetition(2) / even_weight(2)",
            code: Code::repetition_code(2).unwrap(),
            channel: PauliChannel::even_weight_correlated(2, &uniform()).unwrap(),
            correctable: true,
            degenerate: true,
        },
        Case {
            name: "ancilla(5) / fully_correlated(5)",
            code: Code::ancilla_code(5).unwrap(),
            channel: PauliChannel::fully_correlated(5, &uniform()).unwrap(),
            correctable: true,
            degenerate: false,
        },
        Case {
            name: "trivial / weight_bounded(1,1)",
            code: trivial,
            channel: PauliChannel::weight_bounded(1, 1, &uniform()).unwrap(),
            correctable: false,
            degenerate: false,
        },
        Case {
            name: "repetition(1) / weight_bounded(3,1)",
            code: Code::repetition_code(1).unwrap(),
            channel: PauliChannel::weight_bounded(3, 1, &uniform()).unwrap(),
            correctable: false,
            degenerate: true,
        },
        Case {
            name: "ancilla(5) / triple(5)",
            code: Code::ancilla_code(5).unwrap(),
            channel: PauliChannel::triple_correlated(5, &uniform()).unwrap(),
            correctable: false,
            degenerate: false,
        },
        Case {
            name: "repetition(1) / pairwise(3) + X1",
            code: Code::repetition_code(1).unwrap(),
            channel: pairwise3
                .with_extra_terms(&[PauliTerm {
                    p: 0.05,
                    op: "XII".parse().unwrap(),
                }])
                .unwrap(),
            correctable: false,
            degenerate: true,
        },
    ]
}

#[test]
fn three_characterizations_agree() {
    for case in battery() {
        let kl = is_correctable(&case.code, &case.channel, None).unwrap();
        let deletion = deletion_test(&case.code, &case.channel, 20, 0, None).unwrap();
        let product = reference_environment_product_check(&case.code, &case.channel).unwrap();
        assert_eq!(kl.correctable, case.correctable, "{}", case.name);
        assert_eq!(kl.degenerate, case.degenerate, "{}", case.name);
        assert_eq!(deletion.constant, kl.correctable, "{}: {:e}", case.name, deletion.max_deviation);
        assert_eq!(product.is_product, kl.correctable, "{}: {:e}", case.name, product.deviation);
        assert_eq!(product.deviation < 1e-8, kl.correctable, "{}", case.name);
        if !kl.correctable {
            // failures are clear, not marginal
            assert!(product.deviation > 1e-3, "{}", case.name);
            assert!(deletion.max_deviation > 1e-3, "{}", case.name);
        }
    }
}

#[test]
fn correctable_pairs_have_density_matrix_m() {
    for case in battery().into_iter().filter(|c| c.correctable) {
        let m = kl_matrix(&case.code, &case.channel).unwrap().m;
        assert!(m.hermitian_deviation() < 1e-10, "{}", case.name);
        assert!((m.trace().re - 1.0).abs() < 1e-9, "{}", case.name);
        let e = qecbound::linalg::eigh(&m).unwrap();
        assert!(e.values.iter().all(|&l| l > -1e-12), "{}", case.name);
    }
}

#[test]
fn nondegenerate_correctable_pairs_satisfy_packing_bound() {
    for case in battery() {
        let rep = bounds::violation_report(&case.code, &case.channel, None).unwrap();
        assert_ne!(rep.verdict, bounds::Verdict::ConsistencyError, "{}", case.name);
        if rep.kl.correctable && !rep.kl.degenerate {
            assert!(rep.bound.satisfied, "{}", case.name);
        }
    }
}

#[test]
fn ancilla_general_n_needs_fully_correlated_noise() {
    let code = Code::ancilla_code(5).unwrap();
    let triples = is_correctable(&code, &PauliChannel::triple_correlated(5, &uniform()).unwrap(), None).unwrap();
    assert!(!triples.correctable);
    let full = bounds::violation_report(&code, &PauliChannel::fully_correlated(5, &uniform()).unwrap(), None).unwrap();
    assert!(full.kl.correctable && !full.kl.degenerate);
    assert_eq!(full.bound.verdict, bounds::BoundVerdict::Saturated);
    assert_eq!(full.bound.dim_s, 32u32.into());
    assert_eq!(full.bound.rhs, 32u32.into());
}
