use std::path::Path;

use qecbound::channels::FamilyParams;
use qecbound::{AnyChannel, Channel, ChannelSpec, Code, CodeSpec, FamilySpec};
use serde_json::{json, Value};

use crate::{ChannelArgs, CliError, CliResult};

/// Inline JSON is passed through, anything else is read as a file.
fn json_text(arg: &str, what: &str) -> CliResult<String> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| CliError::input(format!("cannot read {what} file {arg:?}: {e}")))
}

pub fn family_spec(args: &ChannelArgs) -> CliResult<FamilySpec> {
    let family = args
        .family
        .ok_or_else(|| CliError::input("a channel family is required (--family)"))?;
    Ok(FamilySpec {
        family,
        n: args.n,
        params: FamilyParams {
            m: args.m,
            t: args.t,
            weights: args.weights.clone(),
            error_mass: args.error_mass,
        },
    })
}

pub fn channel_spec(args: &ChannelArgs) -> CliResult<ChannelSpec> {
    match (&args.channel, args.family) {
        (Some(src), None) => {
            if args.n.is_some() || args.m.is_some() || args.t.is_some() || args.weights.is_some() || args.error_mass.is_some() {
                return Err(CliError::input("--n, --m, --t, --weights and --error-mass only apply to --family"));
            }
            Ok(ChannelSpec::from_json(&json_text(src, "channel")?)?)
        }
        (None, Some(_)) => Ok(ChannelSpec::Family(family_spec(args)?)),
        (None, None) => Err(CliError::input("a channel is required (--family or --channel)")),
        (Some(_), Some(_)) => Err(CliError::input("--channel and --family are exclusive")),
    }
}

pub fn resolve_channel(args: &ChannelArgs) -> CliResult<(ChannelSpec, AnyChannel<f64>)> {
    let spec = channel_spec(args)?;
    let channel = spec.build::<f64>()?;
    Ok((spec, channel))
}

pub fn resolve_code(arg: &str) -> CliResult<(CodeSpec, Code)> {
    let spec = if arg.trim_start().starts_with('{') {
        CodeSpec::from_json(arg)?
    } else if Path::new(arg).is_file() {
        CodeSpec::from_json(&json_text(arg, "code")?)?
    } else {
        arg.parse::<CodeSpec>()?
    };
    let code = spec.build::<f64>()?;
    Ok((spec, code))
}

pub fn channel_info(spec: &ChannelSpec, channel: &AnyChannel<f64>) -> CliResult<Value> {
    let kraus = Channel::<f64>::kraus_len(channel);
    Ok(match spec {
        ChannelSpec::Family(f) => {
            let mut v = json!({ "family": f.family.to_string(), "n": f.resolved_n()? });
            let params = serde_json::to_value(&f.params).unwrap_or(Value::Null);
            if params.as_object().is_some_and(|p| !p.is_empty()) {
                v["params"] = params;
            }
            v["kraus_count"] = json!(kraus);
            v
        }
        ChannelSpec::Terms { n, .. } => json!({ "source": "terms", "n": n, "kraus_count": kraus }),
        ChannelSpec::Kraus {
            input_dim, output_dim, ..
        } => json!({
            "source": "kraus",
            "input_dim": input_dim,
            "output_dim": output_dim,
            "kraus_count": kraus,
        }),
    })
}

pub fn code_info(spec: &CodeSpec, code: &Code) -> Value {
    let name = match spec {
        CodeSpec::Family { family, n } => {
            let f = serde_json::to_value(family).unwrap_or(Value::Null);
            format!("{}:{n}", f.as_str().unwrap_or_default())
        }
        CodeSpec::Codewords { .. } => "codewords".to_string(),
    };
    json!({ "code": name, "n": code.n(), "k": code.k() })
}

pub fn to_value<S: serde::Serialize>(v: &S) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}
