use std::io::{Read, Write};

use uavbeacon_core::codec::decode_ssid;
use uavbeacon_core::{encode, PositionReport};

use super::emit;
use crate::error::CliError;
use crate::CodecCommand;

/// Reads a report from a JSON object, with absent fields taken as zero.
pub fn parse_report(text: &str) -> Result<PositionReport, CliError> {
    let given: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("report is not valid JSON: {e}")))?;
    let serde_json::Value::Object(fields) = given else {
        return Err(CliError::Input("report must be a JSON object".into()));
    };
    let mut full = serde_json::to_value(PositionReport::default()).expect("report serializes");
    let map = full.as_object_mut().expect("report is an object");
    for (k, v) in fields {
        map.insert(k, v);
    }
    serde_json::from_value(full).map_err(|e| CliError::Input(format!("invalid report: {e}")))
}

pub fn codec(cmd: &CodecCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        CodecCommand::Encode { json } => {
            let text = match json {
                Some(t) => t.clone(),
                None => {
                    let mut t = String::new();
                    std::io::stdin().read_to_string(&mut t).map_err(|e| CliError::io("reading stdin", e))?;
                    t
                }
            };
            let report = parse_report(&text)?;
            emit(out, encode(&report)?.as_str())
        }
        CodecCommand::Decode { ssid } => {
            let report = decode_ssid(ssid)?;
            emit(out, &serde_json::to_string_pretty(&report).expect("report serializes"))
        }
    }
}
