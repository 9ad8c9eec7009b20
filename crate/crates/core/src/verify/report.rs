//! Report serialization: JSON lines (`records`) and CSV.

use std::io::{self, Write};

use super::campaign::{Campaign, CampaignConfig};
use super::BoundReport;

/// Record fields, also the CSV column order.
pub const RECORD_FIELDS: [&str; 8] =
    ["name", "lhs", "rhs", "margin", "pass", "hypotheses_met", "instance_digest", "norms_used"];

/// Seventeen significant digits in scientific notation; `nan`, `inf` and
/// `-inf` for non-finite values.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn json_number(x: f64) -> String {
    if x.is_finite() { format_number(x) } else { "null".into() }
}

fn json_string(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}

fn header_fields(config: &CampaignConfig, campaign: &Campaign) -> Vec<(&'static str, String)> {
    let t = campaign.totals();
    vec![
        ("config_digest", config.digest()),
        ("version", crate::VERSION.to_string()),
        ("total", t.reports.to_string()),
        ("passed", t.passed.to_string()),
        ("failed", t.failed.to_string()),
        ("gated", t.gated.to_string()),
        ("errors", campaign.errors.len().to_string()),
    ]
}

fn record_json(r: &BoundReport) -> String {
    let hyps: Vec<String> =
        r.hypotheses_met.iter().map(|(l, m)| format!("{{\"label\":{},\"met\":{m}}}", json_string(l))).collect();
    format!(
        "{{\"name\":{},\"lhs\":{},\"rhs\":{},\"margin\":{},\"pass\":{},\"hypotheses_met\":[{}],\"instance_digest\":{},\"norms_used\":{}}}",
        json_string(&r.name),
        json_number(r.lhs),
        json_number(r.rhs),
        json_number(r.margin),
        r.pass,
        hyps.join(","),
        json_string(&r.instance_digest),
        json_string(&r.norms_used.to_string()),
    )
}

/// A header line `{"campaign":{…}}` followed by one JSON object per report.
pub fn write_records<W: Write>(mut w: W, config: &CampaignConfig, campaign: &Campaign) -> io::Result<()> {
    let header: Vec<String> = header_fields(config, campaign)
        .into_iter()
        .map(|(k, v)| match k {
            "config_digest" | "version" => format!("\"{k}\":{}", json_string(&v)),
            _ => format!("\"{k}\":{v}"),
        })
        .collect();
    writeln!(w, "{{\"campaign\":{{{}}}}}", header.join(","))?;
    for r in &campaign.reports {
        writeln!(w, "{}", record_json(r))?;
    }
    w.flush()
}

/// `# key=value` header lines, then a CSV table with [`RECORD_FIELDS`] columns.
/// Hypotheses are encoded as `label=true;label=false`.
pub fn write_csv<W: Write>(mut w: W, config: &CampaignConfig, campaign: &Campaign) -> io::Result<()> {
    for (k, v) in header_fields(config, campaign) {
        writeln!(w, "# {k}={v}")?;
    }
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(RECORD_FIELDS)?;
    for r in &campaign.reports {
        let hyps: Vec<String> = r.hypotheses_met.iter().map(|(l, m)| format!("{l}={m}")).collect();
        out.write_record([
            r.name.clone(),
            format_number(r.lhs),
            format_number(r.rhs),
            format_number(r.margin),
            r.pass.to_string(),
            hyps.join(";"),
            r.instance_digest.clone(),
            r.norms_used.to_string(),
        ])?;
    }
    out.flush()
}
