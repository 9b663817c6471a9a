//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;

use num_complex::Complex64;
use qecbound::bounds::{self, BoundVerdict, RankFamily};
use qecbound::channels::choi_matrix;
use qecbound::kl::{deletion_test, is_correctable, reference_environment_product_check};
use qecbound::linalg::{numerical_rank, outer, partial_trace};
use qecbound::recovery::{ancilla_recovery, canonical_recovery, channel_agreement, repetition_syndrome_table, roundtrip_check};
use qecbound::{Assignment, Channel, Code, PauliChannel, PauliString, PauliTerm, Table};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

// negated so that NaN comparisons fail
macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn uniform() -> Assignment {
    Assignment::uniform()
}

fn choose(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn big(v: u128) -> num_bigint::BigUint {
    v.into()
}

fn criterion_1() -> Outcome {
    let ch = PauliChannel::pairwise_correlated(3, &uniform()).map_err(|e| e.to_string())?;
    ensure!(ch.terms().iter().all(|t| t.p > 0.0), "a probability is not positive");
    let expected = 1 + 3 * choose(3, 2) as usize;
    let gram = Channel::<f64>::choi_rank(&ch).map_err(|e| e.to_string())?;
    let explicit = numerical_rank(&choi_matrix::<f64, _>(&ch).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure!(expected == 10, "1 + 3 C(3,2) = {expected}");
    ensure!(gram == expected, "Gram-matrix rank {gram}");
    ensure!(explicit == expected, "explicit Choi rank {explicit}");
    Ok(())
}

fn criterion_2() -> Outcome {
    // oracle: 2^n >= 2 (1 + 3 C(n, 2)) scanned from the smallest support
    let oracle = (2u128..).find(|&n| (1u128 << n) >= 2 * (1 + 3 * choose(n, 2))).unwrap() as usize;
    let got = bounds::min_n_packing(1, &RankFamily::pairwise());
    ensure!(got == 7 && oracle == 7, "library {got}, oracle {oracle}");
    Ok(())
}

fn criterion_3() -> Outcome {
    let code = Code::repetition_code(1).map_err(|e| e.to_string())?;
    let ch = PauliChannel::pairwise_correlated(3, &uniform()).map_err(|e| e.to_string())?;
    let kl = is_correctable(&code, &ch, None).map_err(|e| e.to_string())?;
    ensure!(kl.residual < 1e-8 && kl.correctable, "residual {:e}", kl.residual);
    ensure!(kl.rank_m == 4 && kl.rank_choi == 10, "rank(M) {} rank(R) {}", kl.rank_m, kl.rank_choi);
    ensure!(kl.degenerate, "not degenerate");
    let rep = bounds::violation_report(&code, &ch, None).map_err(|e| e.to_string())?;
    ensure!(
        rep.bound.dim_s == big(8) && rep.bound.rhs == big(20) && rep.bound.verdict == BoundVerdict::Violated,
        "bound {} vs {}",
        rep.bound.dim_s,
        rep.bound.rhs
    );
    ensure!(rep.verdict == bounds::Verdict::ViolationByDegenerateCode, "verdict {:?}", rep.verdict);
    Ok(())
}

fn product_ket(a: [f64; 2], b: [f64; 2]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| Complex64::new(x * y, 0.0))).collect()
}

fn criterion_4() -> Outcome {
    let code = Code::ancilla_code(3).map_err(|e| e.to_string())?;
    let ch = PauliChannel::triple_correlated(3, &uniform()).map_err(|e| e.to_string())?;
    let kl = is_correctable(&code, &ch, None).map_err(|e| e.to_string())?;
    ensure!(kl.correctable, "not correctable, residual {:e}", kl.residual);
    ensure!(!kl.degenerate && kl.rank_m == 4 && kl.rank_choi == 4, "rank(M) {} rank(R) {}", kl.rank_m, kl.rank_choi);
    let b = bounds::packing_bound(3, 1, kl.rank_choi);
    ensure!(
        b.dim_s == big(8) && b.rhs == big(8) && b.verdict == BoundVerdict::Saturated,
        "bound {} vs {}",
        b.dim_s,
        b.rhs
    );
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (zero, one, plus, minus) = ([1.0, 0.0], [0.0, 1.0], [s, s], [s, -s]);
    let cases = [
        ("III", product_ket(zero, plus)),
        ("XXX", product_ket(one, plus)),
        ("YYY", product_ket(one, minus)),
        ("ZZZ", product_ket(zero, minus)),
    ];
    for logical in 0..2 {
        let psi = code.codeword(logical);
        for (err, anc) in &cases {
            let e: PauliString = err.parse().map_err(|e: qecbound::Error| e.to_string())?;
            let hit = e.apply_to_vector(&psi).map_err(|e| e.to_string())?;
            let rho = partial_trace(&outer(&hit, &hit), &[2, 4], &[1]).map_err(|e| e.to_string())?;
            let dev = rho.max_abs_diff(&outer(anc, anc));
            ensure!(dev < 1e-12, "{err} on logical {logical}: ancilla deviation {dev:e}");
        }
    }
    // the three error states are mutually orthogonal
    let labels = ancilla_recovery::<f64>(3).map_err(|e| e.to_string())?;
    ensure!(labels.orthogonality_defect() < 1e-12, "syndrome subspaces overlap");
    Ok(())
}

fn roundtrip_case(name: &str, code: &Code, ch: &PauliChannel, table: &Table) -> Outcome {
    let from_table = table.to_recovery(code).map_err(|e| e.to_string())?;
    let canonical = canonical_recovery(code, ch).map_err(|e| e.to_string())?;
    for (which, rec) in [("table", &from_table), ("canonical", &canonical)] {
        let rt = roundtrip_check(code, ch, rec, 100, 0).map_err(|e| e.to_string())?;
        ensure!(rt.worst_infidelity < 1e-9, "{name}, {which}: worst infidelity {:e}", rt.worst_infidelity);
    }
    let diff = channel_agreement(code, ch, &from_table, &canonical).map_err(|e| e.to_string())?;
    ensure!(diff < 1e-8, "{name}: recoveries differ by {diff:e}");
    Ok(())
}

fn criterion_5() -> Outcome {
    let e = |e: qecbound::Error| e.to_string();
    roundtrip_case(
        "repetition m=1 / pairwise",
        &Code::repetition_code(1).map_err(e)?,
        &PauliChannel::pairwise_correlated(3, &uniform()).map_err(e)?,
        &repetition_syndrome_table(1, &[2]).map_err(e)?,
    )?;
    roundtrip_case(
        "repetition m=2 / even weights 2, 4",
        &Code::repetition_code(2).map_err(e)?,
        &PauliChannel::even_weight_correlated(2, &uniform()).map_err(e)?,
        &repetition_syndrome_table(2, &[2, 4]).map_err(e)?,
    )?;
    roundtrip_case(
        "ancilla n=3 / triple",
        &Code::ancilla_code(3).map_err(e)?,
        &PauliChannel::triple_correlated(3, &uniform()).map_err(e)?,
        &ancilla_recovery(3).map_err(e)?,
    )?;
    roundtrip_case(
        "ancilla n=5 / fully correlated",
        &Code::ancilla_code(5).map_err(e)?,
        &PauliChannel::fully_correlated(5, &uniform()).map_err(e)?,
        &ancilla_recovery(5).map_err(e)?,
    )
}

fn criterion_6() -> Outcome {
    let e = |e: qecbound::Error| e.to_string();
    let pairwise3 = PauliChannel::pairwise_correlated(3, &uniform()).map_err(e)?;
    let rep1 = Code::repetition_code(1).map_err(e)?;
    let trivial = Code::from_codewords(&[qecbound::codes::basis_vector(2, 0), qecbound::codes::basis_vector(2, 1)]).map_err(e)?;
    let x1 = PauliTerm {
        p: 0.05,
        op: "XII".parse().map_err(e)?,
    };
    // (name, code, channel, correctable, degenerate)
    let battery = [
        ("repetition(1) / pairwise(3)", rep1.clone(), pairwise3.clone(), true, true),
        (
            "ancilla(3) / triple(3)",
            Code::ancilla_code(3).map_err(e)?,
            PauliChannel::triple_correlated(3, &uniform()).map_err(e)?,
            true,
            false,
        ),
        (
            "repetition(2) / even_weight(2)",
            Code::repetition_code(2).map_err(e)?,
            PauliChannel::even_weight_correlated(2, &uniform()).map_err(e)?,
            true,
            true,
        ),
        (
            "ancilla(5) / fully_correlated(5)",
            Code::ancilla_code(5).map_err(e)?,
            PauliChannel::fully_correlated(5, &uniform()).map_err(e)?,
            true,
            false,
        ),
        (
            "single qubit / all weight-1 errors",
            trivial,
            PauliChannel::weight_bounded(1, 1, &uniform()).map_err(e)?,
            false,
            false,
        ),
        (
            "repetition(1) / weight_bounded(3,1)",
            rep1.clone(),
            PauliChannel::weight_bounded(3, 1, &uniform()).map_err(e)?,
            false,
            true,
        ),
        (
            "ancilla(5) / triple(5)",
            Code::ancilla_code(5).map_err(e)?,
            PauliChannel::triple_correlated(5, &uniform()).map_err(e)?,
            false,
            false,
        ),
        (
            "repetition(1) / pairwise(3) + X1",
            rep1,
            pairwise3.with_extra_terms(&[x1]).map_err(e)?,
            false,
            true,
        ),
    ];
    for (name, code, ch, correctable, degenerate) in &battery {
        let kl = is_correctable(code, ch, None).map_err(e)?;
        let del = deletion_test(code, ch, 20, 0, None).map_err(e)?;
        let prod = reference_environment_product_check(code, ch).map_err(e)?;
        ensure!(kl.correctable == *correctable, "{name}: KL says correctable = {}", kl.correctable);
        ensure!(kl.degenerate == *degenerate, "{name}: degenerate = {}", kl.degenerate);
        ensure!(del.constant == kl.correctable, "{name}: deletion test disagrees ({:e})", del.max_deviation);
        ensure!(prod.is_product == kl.correctable, "{name}: product test disagrees");
        ensure!((prod.deviation < 1e-8) == kl.correctable, "{name}: trace-norm deviation {:e}", prod.deviation);
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let e = |e: qecbound::Error| e.to_string();
    for n in 1..=7u128 {
        for t in 0..=2u128.min(n) {
            // oracle: sum_i 3^i C(n, i)
            let oracle: u128 = (0..=t).map(|i| 3u128.pow(i as u32) * choose(n, i)).sum();
            let ch = PauliChannel::weight_bounded(n as usize, t as usize, &uniform()).map_err(e)?;
            let rank = Channel::<f64>::choi_rank(&ch).map_err(e)? as u128;
            ensure!(rank == oracle, "n={n} t={t}: Choi rank {rank}, expected {oracle}");
            for k in 0..=2u32 {
                let rhs = bounds::hamming_rhs(n as usize, k as usize, t as usize, 2).map_err(e)?;
                ensure!(rhs == big((1 << k) * rank), "n={n} t={t} k={k}: rhs {rhs}");
            }
        }
    }
    let min = bounds::min_n_hamming(1, 1, 2).map_err(e)?;
    ensure!(min == 5, "q=2 t=1 k=1 minimal length {min}");
    Ok(())
}

fn criterion_8() -> Outcome {
    let e = |e: qecbound::Error| e.to_string();
    let rep = bounds::min_n_report(1, &RankFamily::pairwise_quadruple());
    let oracle = (4u128..)
        .find(|&n| (1u128 << n) >= 2 * (1 + 3 * choose(n, 2) + 3 * choose(n, 4)))
        .unwrap() as usize;
    ensure!(rep.min_n == 12 && oracle == 12, "min_n {} oracle {oracle}", rep.min_n);
    ensure!(rep.published_min_n == Some(14) && rep.note.is_some(), "published value not reported");
    let first = rep.scan.iter().find(|r| r.satisfied).map(|r| r.n);
    ensure!(first == Some(12), "first satisfying scan row {first:?}");

    let code = Code::ancilla_code(5).map_err(e)?;
    let triples = is_correctable(&code, &PauliChannel::triple_correlated(5, &uniform()).map_err(e)?, None).map_err(e)?;
    ensure!(!triples.correctable, "all-triples channel passes KL");
    let full = bounds::violation_report(&code, &PauliChannel::fully_correlated(5, &uniform()).map_err(e)?, None).map_err(e)?;
    ensure!(full.kl.correctable, "fully correlated channel fails KL");
    ensure!(
        full.bound.dim_s == big(32) && full.bound.rhs == big(32) && full.bound.verdict == BoundVerdict::Saturated,
        "bound {} vs {}",
        full.bound.dim_s,
        full.bound.rhs
    );
    Ok(())
}

fn criterion_9() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_qecbound"))
            .args(["demo", "--all", "--seed", "0"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure!(a.status.success(), "exit {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stderr));
    ensure!(b.status.success(), "second run exit {:?}", b.status.code());
    ensure!(!a.stdout.is_empty(), "empty output");
    ensure!(a.stdout == b.stdout, "outputs differ");
    Ok(())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("Choi rank of pairwise(3) is 10 on both paths", criterion_1),
        ("pairwise family minimal n = 7 at k = 1", criterion_2),
        ("repetition(3) vs pairwise: correctable, degenerate, 8 < 20", criterion_3),
        ("ancilla(3) vs triple: nondegenerate, saturates 8 = 2 * 4, syndrome map", criterion_4),
        ("roundtrip fidelity for table and canonical recoveries", criterion_5),
        ("KL, deletion and product tests agree on the battery", criterion_6),
        ("Hamming bound matches weight-bounded Choi rank", criterion_7),
        ("pairwise+quadruple scan and ancilla(5) channel discrepancy", criterion_8),
        ("demo --all --seed 0 is byte-identical across runs", criterion_9),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let res = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match res {
            Ok(()) => println!("PASS criterion {}: {name}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
