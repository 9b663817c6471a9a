//! Worked scenarios. Each one runs the checks end to end and lists every
//! expectation it verified; `demo --all` passes only if all of them do.

use qecbound::bounds::{self, RankFamily, Verdict};
use qecbound::channels::choi_matrix;
use qecbound::kl::{self, deletion_test, reference_environment_product_check};
use qecbound::linalg::{self, numerical_rank, outer};
use qecbound::recovery::{self, canonical_recovery};
use qecbound::{AnyChannel, BoundReport, BoundVerdict, Code, FamilyName, KlSummary, PauliString};
use serde_json::{json, Value};

use crate::commands::{syndrome_table, table_info, PERFECT_TOL};
use crate::input::{channel_info, code_info, resolve_channel, resolve_code, to_value};
use crate::{ChannelArgs, CliError, CliResult, DemoName, Outcome};

/// Largest Choi-matrix difference accepted between two recoveries.
const AGREEMENT_TOL: f64 = 1e-8;
const KL_TOL: f64 = 1e-8;
const DELETION_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct DemoConfig {
    pub seed: u64,
    pub trials: usize,
    pub shots: u64,
}

#[derive(Default)]
struct Checks(Vec<(String, bool)>);

impl Checks {
    fn add(&mut self, name: impl Into<String>, pass: bool) {
        self.0.push((name.into(), pass));
    }

    fn pass(&self) -> bool {
        self.0.iter().all(|(_, p)| *p)
    }

    fn to_value(&self) -> Value {
        Value::Array(self.0.iter().map(|(name, pass)| json!({ "name": name, "pass": pass })).collect())
    }
}

fn family(name: FamilyName, n: usize) -> ChannelArgs {
    ChannelArgs {
        family: Some(name),
        n: Some(n),
        ..ChannelArgs::default()
    }
}

fn even_weight(m: usize) -> ChannelArgs {
    ChannelArgs {
        family: Some(FamilyName::EvenWeight),
        m: Some(m),
        ..ChannelArgs::default()
    }
}

/// What a scenario measured, for the checks.
struct Measured {
    kl: KlSummary,
    bound: BoundReport,
    verdict: Verdict,
    theorems_agree: Option<bool>,
    table_worst: Option<f64>,
    canonical_worst: Option<f64>,
    agreement: Option<f64>,
    mc_fraction: Option<f64>,
    labels: Vec<String>,
}

#[derive(Clone, Copy)]
struct Steps {
    theorems: bool,
    recover: bool,
    monte_carlo: bool,
}

const ALL_STEPS: Steps = Steps {
    theorems: true,
    recover: true,
    monte_carlo: true,
};

fn scenario(code_arg: &str, args: &ChannelArgs, steps: Steps, cfg: &DemoConfig) -> CliResult<(Value, Measured, Code, AnyChannel<f64>)> {
    let (code_spec, code) = resolve_code(code_arg)?;
    let (spec, channel) = resolve_channel(args)?;
    let kl_report = kl::is_correctable(&code, &channel, None)?;
    let kl = kl_report.summary();
    let bound = bounds::packing_bound(code.n(), code.k(), kl.rank_choi);
    let verdict = bounds::classify(&kl, &bound);
    let mut report = json!({
        "code": code_info(&code_spec, &code),
        "channel": channel_info(&spec, &channel)?,
        "kl": to_value(&kl),
        "bound": to_value(&bound),
        "verdict": to_value(&verdict),
    });
    let mut m = Measured {
        kl,
        bound,
        verdict,
        theorems_agree: None,
        table_worst: None,
        canonical_worst: None,
        agreement: None,
        mc_fraction: None,
        labels: Vec::new(),
    };
    if kl_report.m.rows() <= 16 {
        report["kl"]["M"] = to_value(&kl_report.m);
    }
    if steps.theorems {
        let deletion = deletion_test(&code, &channel, DELETION_SAMPLES, cfg.seed, None)?;
        let product = reference_environment_product_check(&code, &channel)?;
        let agree = deletion.constant == m.kl.correctable && product.is_product == m.kl.correctable;
        report["theorems"] = json!({
            "deletion": to_value(&deletion),
            "product": to_value(&product),
            "agree": agree,
        });
        m.theorems_agree = Some(agree);
    }
    if steps.recover && m.kl.correctable {
        let canonical = canonical_recovery(&code, &channel)?;
        let rt = recovery::roundtrip_check(&code, &channel, &canonical, cfg.trials, cfg.seed)?;
        m.canonical_worst = Some(rt.worst_infidelity);
        let mut rec = json!({ "canonical": { "summary": to_value(&canonical.summary()), "roundtrip": to_value(&rt) } });
        if let Some(table) = syndrome_table(&code_spec).transpose()? {
            let from_table = table.to_recovery(&code)?;
            let rt = recovery::roundtrip_check(&code, &channel, &from_table, cfg.trials, cfg.seed)?;
            let agreement = recovery::channel_agreement(&code, &channel, &from_table, &canonical)?;
            m.table_worst = Some(rt.worst_infidelity);
            m.agreement = Some(agreement);
            m.labels = table.labels().into_iter().map(str::to_string).collect();
            rec["table"] = json!({
                "outcomes": table_info(&table),
                "summary": to_value(&from_table.summary()),
                "roundtrip": to_value(&rt),
            });
            rec["agreement"] = json!(agreement);
            if let (true, Some(pauli)) = (steps.monte_carlo, channel.as_pauli()) {
                let mc = recovery::monte_carlo_run(&code, pauli, &table, cfg.shots, cfg.seed)?;
                m.mc_fraction = Some(mc.success_fraction);
                report["monte_carlo"] = to_value(&mc);
            }
        }
        report["recovery"] = rec;
    }
    Ok((report, m, code, channel))
}

/// The checks shared by every correctable scenario with a syndrome table.
fn recovery_checks(checks: &mut Checks, m: &Measured) {
    let below = |v: Option<f64>, tol: f64| v.is_some_and(|x| x < tol);
    checks.add("table roundtrip worst infidelity < 1e-9", below(m.table_worst, PERFECT_TOL));
    checks.add("canonical roundtrip worst infidelity < 1e-9", below(m.canonical_worst, PERFECT_TOL));
    checks.add("table and canonical recoveries agree within 1e-8", below(m.agreement, AGREEMENT_TOL));
}

fn kl_checks(checks: &mut Checks, m: &Measured, rank_m: usize, rank_choi: usize) {
    checks.add("KL residual < 1e-8", m.kl.correctable && m.kl.residual < KL_TOL);
    checks.add(format!("rank(M) = {rank_m}"), m.kl.rank_m == rank_m);
    checks.add(format!("Choi rank = {rank_choi}"), m.kl.rank_choi == rank_choi);
    checks.add(
        if rank_m < rank_choi { "degenerate" } else { "nondegenerate" },
        m.kl.degenerate == (rank_m < rank_choi),
    );
}

fn bound_check(checks: &mut Checks, m: &Measured, dim_s: u64, rhs: u64, verdict: BoundVerdict) {
    let rel = match verdict {
        BoundVerdict::Satisfied => ">",
        BoundVerdict::Saturated => "=",
        BoundVerdict::Violated => "<",
    };
    let pass = m.bound.dim_s == dim_s.into() && m.bound.rhs == rhs.into() && m.bound.verdict == verdict;
    checks.add(format!("packing bound {dim_s} {rel} {rhs}"), pass);
}

fn theorem_check(checks: &mut Checks, m: &Measured) {
    if let Some(agree) = m.theorems_agree {
        checks.add("KL, deletion and product tests agree", agree);
    }
}

fn finish(name: DemoName, mut report: Value, checks: Checks) -> Outcome {
    let pass = checks.pass();
    let body = std::mem::take(&mut report);
    let mut out = json!({ "demo": name.as_str() });
    if let Value::Object(fields) = body {
        out.as_object_mut().expect("object").extend(fields);
    }
    out["checks"] = checks.to_value();
    out["pass"] = json!(pass);
    let mut outcome = Outcome::new(out);
    outcome.tag(if pass { "pass" } else { "fail" });
    outcome
}

fn pairwise3(cfg: &DemoConfig) -> CliResult<Outcome> {
    let (mut report, m, _, channel) = scenario("repetition:3", &family(FamilyName::Pairwise, 3), ALL_STEPS, cfg)?;
    let mut checks = Checks::default();
    let explicit = numerical_rank(&choi_matrix::<f64, _>(&channel)?)?;
    report["explicit_choi_rank"] = json!(explicit);
    checks.add("explicit Choi rank = 10", explicit == 10);
    kl_checks(&mut checks, &m, 4, 10);
    bound_check(&mut checks, &m, 8, 20, BoundVerdict::Violated);
    checks.add("violation by a degenerate code", m.verdict == Verdict::ViolationByDegenerateCode);
    theorem_check(&mut checks, &m);
    checks.add("syndrome labels 00 01 10 11", m.labels == ["00", "01", "10", "11"]);
    recovery_checks(&mut checks, &m);
    checks.add("Monte Carlo success 1.0", m.mc_fraction == Some(1.0));
    let min_n = bounds::min_n_report(1, &RankFamily::pairwise());
    checks.add("pairwise family minimal n = 7 at k = 1", min_n.min_n == 7);
    report["min_n"] = to_value(&min_n);
    Ok(finish(DemoName::Pairwise3, report, checks))
}

fn evenweight5(cfg: &DemoConfig) -> CliResult<Outcome> {
    let (mut report, m, _, _) = scenario("repetition:5", &even_weight(2), ALL_STEPS, cfg)?;
    let mut checks = Checks::default();
    kl_checks(&mut checks, &m, 16, 46);
    bound_check(&mut checks, &m, 32, 92, BoundVerdict::Violated);
    checks.add("violation by a degenerate code", m.verdict == Verdict::ViolationByDegenerateCode);
    theorem_check(&mut checks, &m);
    checks.add("16 syndrome outcomes", m.labels.len() == 16);
    recovery_checks(&mut checks, &m);
    checks.add("Monte Carlo success 1.0", m.mc_fraction == Some(1.0));
    let min_n = bounds::min_n_report(1, &RankFamily::pairwise_quadruple());
    checks.add(
        "pairwise+quadruple minimal n = 12, published 14 reported",
        min_n.min_n == 12 && min_n.published_min_n == Some(14),
    );
    report["min_n"] = to_value(&min_n);
    Ok(finish(DemoName::Evenweight5, report, checks))
}

fn evenweight2m(cfg: &DemoConfig) -> CliResult<Outcome> {
    let (mut report, m, _, _) = scenario("repetition:7", &even_weight(3), ALL_STEPS, cfg)?;
    let mut checks = Checks::default();
    kl_checks(&mut checks, &m, 64, 190);
    let formula = RankFamily::even_weight(3).rank(7);
    checks.add("closed-form rank matches", formula == m.kl.rank_choi.into());
    bound_check(&mut checks, &m, 128, 380, BoundVerdict::Violated);
    checks.add("violation by a degenerate code", m.verdict == Verdict::ViolationByDegenerateCode);
    theorem_check(&mut checks, &m);
    checks.add("64 syndrome outcomes", m.labels.len() == 64);
    recovery_checks(&mut checks, &m);
    checks.add("Monte Carlo success 1.0", m.mc_fraction == Some(1.0));
    report["min_n"] = to_value(&bounds::min_n_report(1, &RankFamily::even_weight(3)));
    Ok(finish(DemoName::Evenweight2m, report, checks))
}

/// Ancilla state after `error` hits the encoded `|0>`.
fn ancilla_state(code: &Code, error: &str) -> CliResult<linalg::DenseMatrix<f64>> {
    let e: PauliString = error.parse()?;
    let psi = e.apply_to_vector(&code.codeword(0))?;
    let data = 1usize << code.k();
    let anc = code.physical_dim() / data;
    Ok(linalg::partial_trace(&outer(&psi, &psi), &[data, anc], &[1])?)
}

fn two_qubit_state(a: [f64; 2], b: [f64; 2]) -> Vec<qecbound::scalar::C<f64>> {
    let mut v = Vec::with_capacity(4);
    for x in a {
        for y in b {
            v.push(qecbound::scalar::C::new(x * y, 0.0));
        }
    }
    v
}

fn triple3(cfg: &DemoConfig) -> CliResult<Outcome> {
    let (mut report, m, code, _) = scenario("ancilla:3", &family(FamilyName::Triple, 3), ALL_STEPS, cfg)?;
    let mut checks = Checks::default();
    kl_checks(&mut checks, &m, 4, 4);
    bound_check(&mut checks, &m, 8, 8, BoundVerdict::Saturated);
    checks.add("consistent with the packing bound", m.verdict == Verdict::Consistent);
    theorem_check(&mut checks, &m);

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (zero, one, plus, minus) = ([1.0, 0.0], [0.0, 1.0], [s, s], [s, -s]);
    let expected = [
        ("XXX", "1+", two_qubit_state(one, plus)),
        ("YYY", "1-", two_qubit_state(one, minus)),
        ("ZZZ", "0-", two_qubit_state(zero, minus)),
    ];
    let mut map = Vec::new();
    let mut all = true;
    for (err, label, state) in &expected {
        let rho = ancilla_state(&code, err)?;
        let dev = rho.max_abs_diff(&outer(state, state));
        let ok = dev < 1e-12;
        all &= ok;
        map.push(json!({ "error": err, "ancilla": label, "deviation": dev }));
    }
    checks.add("XX, YY, ZZ on the ancillas give |1+>, |1->, |0->", all);
    let start = ancilla_state(&code, "III")?;
    let start_ok = start.max_abs_diff(&outer(&two_qubit_state(zero, plus), &two_qubit_state(zero, plus))) < 1e-12;
    checks.add("unerrored ancillas are |0+>", start_ok);
    report["syndrome_map"] = json!(map);

    // encoded states are product across data | ancillas
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cfg.seed);
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.max(1) {
        let psi = code.random_state(&mut rng);
        let anc = linalg::partial_trace(&outer(&psi, &psi), &[2, 4], &[1])?;
        let purity = anc.matmul(&anc).trace().re;
        worst = worst.max((1.0 - purity).abs());
    }
    report["encoding_purity_defect"] = json!(worst);
    checks.add("encoding is product across data | ancillas", worst < 1e-12);

    checks.add("syndrome labels 0+ 1+ 1- 0-", m.labels == ["0+", "1+", "1-", "0-"]);
    recovery_checks(&mut checks, &m);
    checks.add("Monte Carlo success 1.0", m.mc_fraction == Some(1.0));
    Ok(finish(DemoName::Triple3, report, checks))
}

fn ancilla_general(cfg: &DemoConfig) -> CliResult<Outcome> {
    let mut checks = Checks::default();
    let (triples, t, _, _) = scenario("ancilla:5", &family(FamilyName::Triple, 5), ALL_STEPS, cfg)?;
    checks.add("all-triples noise on 5 qubits fails KL", !t.kl.correctable && t.kl.residual > KL_TOL);
    checks.add("uncorrectable verdict", t.verdict == Verdict::NotCorrectable);
    theorem_check(&mut checks, &t);
    let (full, f, _, _) = scenario("ancilla:5", &family(FamilyName::FullyCorrelated, 5), ALL_STEPS, cfg)?;
    checks.add("fully correlated noise on 5 qubits passes KL", f.kl.correctable && f.kl.residual < KL_TOL);
    checks.add("fully correlated: rank(M) = Choi rank = 4", f.kl.rank_m == 4 && f.kl.rank_choi == 4);
    bound_check(&mut checks, &f, 32, 32, BoundVerdict::Saturated);
    recovery_checks(&mut checks, &f);
    checks.add("Monte Carlo success 1.0", f.mc_fraction == Some(1.0));
    let report = json!({ "triple": triples, "fully_correlated": full });
    Ok(finish(DemoName::AncillaGeneral, report, checks))
}

pub fn run(name: DemoName, cfg: &DemoConfig) -> CliResult<Outcome> {
    if cfg.trials == 0 {
        return Err(CliError::input("--trials must be positive"));
    }
    match name {
        DemoName::Pairwise3 => pairwise3(cfg),
        DemoName::Evenweight5 => evenweight5(cfg),
        DemoName::Evenweight2m => evenweight2m(cfg),
        DemoName::Triple3 => triple3(cfg),
        DemoName::AncillaGeneral => ancilla_general(cfg),
    }
}

pub fn run_all(cfg: &DemoConfig) -> CliResult<Outcome> {
    let mut demos = Vec::new();
    let mut pass = true;
    for name in DemoName::ALL {
        let out = run(name, cfg)?;
        pass &= out.tags.contains("pass");
        demos.push(out.report);
    }
    let mut out = Outcome::new(json!({
        "seed": cfg.seed,
        "trials": cfg.trials,
        "shots": cfg.shots,
        "demos": demos,
        "pass": pass,
    }));
    out.tag(if pass { "pass" } else { "fail" });
    Ok(out)
}
