use qecbound::bounds::{self, RankFamily};
use qecbound::channels::choi_matrix;
use qecbound::codes::CodeFamily;
use qecbound::kl::{self, deletion_test, reference_environment_product_check};
use qecbound::linalg::numerical_rank;
use qecbound::recovery::{self, ancilla_recovery, canonical_recovery, repetition_syndrome_table};
use qecbound::{AnyChannel, BoundVerdict, Channel, ChannelSpec, Code, CodeSpec, Recovery, Table};
use serde_json::{json, Value};

use crate::input::{channel_info, channel_spec, code_info, family_spec, resolve_channel, resolve_code, to_value};
use crate::{BoundKindArg, ChannelArgs, CliError, CliResult, Outcome, RecoveryArg};

/// Worst infidelity accepted as perfect correction.
pub const PERFECT_TOL: f64 = 1e-9;

/// Deletion-test sample count for `check --theorems`.
const DELETION_SAMPLES: usize = 20;

pub fn bound_tags(out: &mut Outcome, verdict: BoundVerdict) {
    match verdict {
        BoundVerdict::Satisfied => out.tag("satisfied"),
        BoundVerdict::Saturated => {
            out.tag("satisfied");
            out.tag("saturated");
        }
        BoundVerdict::Violated => out.tag("violated"),
    }
}

pub fn rank(args: &ChannelArgs, explicit: bool) -> CliResult<Outcome> {
    let (spec, channel) = resolve_channel(args)?;
    let choi_rank = Channel::<f64>::choi_rank(&channel)?;
    let kraus = Channel::<f64>::kraus_len(&channel);
    let mut report = json!({
        "channel": channel_info(&spec, &channel)?,
        "kraus_count": kraus,
        "choi_rank": choi_rank,
        "minimal_kraus_count": choi_rank,
        "minimal": kraus == choi_rank,
    });
    if explicit {
        let choi = choi_matrix::<f64, _>(&channel)?;
        report["explicit_choi_rank"] = json!(numerical_rank(&choi)?);
    }
    let mut out = Outcome::new(report);
    out.tag(if kraus == choi_rank { "minimal" } else { "non_minimal" });
    Ok(out)
}

fn check_pair(code: &Code, channel: &AnyChannel<f64>) -> CliResult<()> {
    if Channel::<f64>::input_dim(channel) != code.physical_dim() {
        return Err(CliError::input(format!(
            "channel acts on dimension {}, code on {} qubits",
            Channel::<f64>::input_dim(channel),
            code.n()
        )));
    }
    Ok(())
}

pub fn check(code_arg: &str, args: &ChannelArgs, tol: Option<f64>, theorems: bool, seed: u64) -> CliResult<Outcome> {
    let (code_spec, code) = resolve_code(code_arg)?;
    let (spec, channel) = resolve_channel(args)?;
    check_pair(&code, &channel)?;
    if let Some(t) = tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::input(format!("tolerance must be positive, got {t}")));
        }
    }
    let kl = kl::is_correctable(&code, &channel, tol)?;
    let summary = kl.summary();
    let bound = bounds::packing_bound(code.n(), code.k(), kl.rank_choi);
    let verdict = bounds::classify(&summary, &bound);
    let mut report = json!({
        "code": code_info(&code_spec, &code),
        "channel": channel_info(&spec, &channel)?,
        "kl": to_value(&kl),
        "bound": to_value(&bound),
        "verdict": to_value(&verdict),
    });
    if theorems {
        let deletion = deletion_test(&code, &channel, DELETION_SAMPLES, seed, tol)?;
        let product = reference_environment_product_check(&code, &channel)?;
        report["theorems"] = json!({
            "deletion": to_value(&deletion),
            "product": to_value(&product),
            "agree": deletion.constant == kl.correctable && product.is_product == kl.correctable,
        });
    }
    let mut out = Outcome::new(report);
    out.tag(if kl.correctable { "correctable" } else { "not_correctable" });
    out.tag(if kl.degenerate { "degenerate" } else { "nondegenerate" });
    bound_tags(&mut out, bound.verdict);
    if let Some(v) = out.report["verdict"].as_str().map(str::to_string) {
        out.tag(v);
    }
    Ok(out)
}

pub fn bound(kind: BoundKindArg, args: &ChannelArgs, k: usize, q: usize, min_n: bool) -> CliResult<Outcome> {
    match kind {
        BoundKindArg::Packing => {
            if q != 2 {
                return Err(CliError::input("the packing bound is evaluated for qubits (q = 2)"));
            }
            if min_n {
                let spec = family_spec(args)?;
                let fam = RankFamily::from_spec(&spec)?;
                let rep = bounds::min_n_report(k, &fam);
                let mut report = json!({ "kind": "packing", "family": spec.family.to_string() });
                if let Some(m) = spec.params.m {
                    report["m"] = json!(m);
                }
                if let Some(t) = spec.params.t {
                    report["t"] = json!(t);
                }
                if let Value::Object(extra) = to_value(&rep) {
                    report.as_object_mut().expect("object").extend(extra);
                }
                return Ok(Outcome::new(report));
            }
            let (report, verdict) = match channel_spec(args)? {
                ChannelSpec::Family(f) => {
                    // closed form: no dense work, any n
                    let n = f.resolved_n()?;
                    let fam = RankFamily::from_spec(&f)?;
                    if n < fam.min_support() {
                        return Err(CliError::input(format!("{} needs at least {} qubits", f.family, fam.min_support())));
                    }
                    let b = bounds::packing_bound(n, k, fam.rank(n));
                    let mut v = to_value(&b);
                    v["family"] = json!(f.family.to_string());
                    v["rank_source"] = json!("formula");
                    (v, b.verdict)
                }
                other => {
                    let channel = other.build::<f64>()?;
                    let n = AnyChannel::num_qubits(&channel)
                        .ok_or_else(|| CliError::input("channel dimension is not a power of two"))?;
                    let b = bounds::packing_check::<f64, _>(n, k, &channel)?;
                    let mut v = to_value(&b);
                    v["rank_source"] = json!("choi");
                    (v, b.verdict)
                }
            };
            let mut out = Outcome::new(report);
            bound_tags(&mut out, verdict);
            Ok(out)
        }
        BoundKindArg::Hamming => {
            if args.channel.is_some() || args.family.is_some() {
                return Err(CliError::input("the hamming bound takes --n, --k, --t and --q, not a channel"));
            }
            let t = args.t.ok_or_else(|| CliError::input("hamming needs --t"))?;
            if min_n {
                let n = bounds::min_n_hamming(k, t, q)?;
                let b = bounds::hamming_check(n, k, t, q)?;
                let mut report = json!({ "kind": "hamming", "k": k, "t": t, "q": q, "min_n": n });
                report["at_min_n"] = to_value(&b);
                return Ok(Outcome::new(report));
            }
            let n = args.n.ok_or_else(|| CliError::input("hamming needs --n (or --min-n)"))?;
            let b = bounds::hamming_check(n, k, t, q)?;
            let mut out = Outcome::new(to_value(&b));
            bound_tags(&mut out, b.verdict);
            Ok(out)
        }
    }
}

/// The explicit syndrome measurement of a code family, if it has one. The
/// repetition table covers every even flip pattern.
pub fn syndrome_table(spec: &CodeSpec) -> Option<CliResult<Table>> {
    match spec {
        CodeSpec::Family {
            family: CodeFamily::Repetition,
            n,
        } => {
            let m = n / 2;
            let weights: Vec<usize> = (1..=m).map(|i| 2 * i).collect();
            Some(repetition_syndrome_table(m, &weights).map_err(CliError::from))
        }
        CodeSpec::Family {
            family: CodeFamily::Ancilla,
            n,
        } => Some(ancilla_recovery(*n).map_err(CliError::from)),
        CodeSpec::Codewords { .. } => None,
    }
}

pub fn table_info(table: &Table) -> Value {
    let outcomes: Vec<Value> = table
        .outcomes()
        .iter()
        .map(|o| json!({ "label": o.label, "correction": o.correction.to_string() }))
        .collect();
    json!(outcomes)
}

pub fn simulate(
    code_arg: &str,
    args: &ChannelArgs,
    mode: RecoveryArg,
    trials: usize,
    seed: u64,
    shots: Option<u64>,
) -> CliResult<Outcome> {
    let (code_spec, code) = resolve_code(code_arg)?;
    let (spec, channel) = resolve_channel(args)?;
    check_pair(&code, &channel)?;
    let table = syndrome_table(&code_spec).transpose()?;
    let (method, rec): (&str, Recovery) = match (mode, &table) {
        (RecoveryArg::Auto | RecoveryArg::Table, Some(t)) => ("table", t.to_recovery(&code)?),
        (RecoveryArg::Table, None) => {
            return Err(CliError::input("no syndrome table for this code; use --recovery canonical"));
        }
        (RecoveryArg::Auto | RecoveryArg::Canonical, _) => ("canonical", canonical_recovery(&code, &channel)?),
    };
    let roundtrip = recovery::roundtrip_check(&code, &channel, &rec, trials, seed)?;
    let mut rec_info = json!({ "method": method });
    if let Value::Object(extra) = to_value(&rec.summary()) {
        rec_info.as_object_mut().expect("object").extend(extra);
    }
    let mut report = json!({
        "code": code_info(&code_spec, &code),
        "channel": channel_info(&spec, &channel)?,
        "recovery": rec_info,
        "roundtrip": to_value(&roundtrip),
    });
    let mut perfect = roundtrip.worst_infidelity < PERFECT_TOL;
    if let (Some(t), Some(pauli)) = (&table, channel.as_pauli()) {
        if method == "table" {
            report["recovery"]["outcomes"] = table_info(t);
            report["table_check"] = to_value(&t.check(&code, pauli)?);
        }
    }
    if let Some(shots) = shots {
        let t = table
            .as_ref()
            .ok_or_else(|| CliError::input("Monte Carlo sampling needs a code with a syndrome table"))?;
        let pauli = channel
            .as_pauli()
            .ok_or_else(|| CliError::input("Monte Carlo sampling needs a Pauli channel"))?;
        let mc = recovery::monte_carlo_run(&code, pauli, t, shots, seed)?;
        perfect &= mc.success_fraction == 1.0;
        report["monte_carlo"] = to_value(&mc);
    }
    report["perfect"] = json!(perfect);
    let mut out = Outcome::new(report);
    out.tag(if perfect { "perfect" } else { "imperfect" });
    Ok(out)
}

pub fn expand(args: &ChannelArgs) -> CliResult<Outcome> {
    let (_, channel) = resolve_channel(args)?;
    let spec = match &channel {
        AnyChannel::Pauli(p) => p.to_spec(),
        AnyChannel::Kraus(k) => ChannelSpec::Kraus {
            input_dim: k.input_dim(),
            output_dim: k.output_dim(),
            kraus: k.operators().to_vec(),
        },
    };
    Ok(Outcome::new(to_value(&spec)))
}
