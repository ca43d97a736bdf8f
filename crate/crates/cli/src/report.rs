//! The report envelope every command emits, and the plain-text table
//! renderer. JSON is the interchange format; tables are presentation only.

use serde::Serialize;
use serde_json::Value;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Echo of the resolved run configuration, embedded in every report so
/// golden files are self-describing.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ConfigEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    pub seed: u64,
    pub budget_trees: u64,
    pub budget_seqs: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<f64>,
    pub out: String,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<(String, String)>,
}

#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub command: String,
    pub config: ConfigEcho,
    pub result: T,
    pub version: &'static str,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, config: ConfigEcho, result: T) -> Report<T> {
        Report {
            command: command.to_string(),
            config,
            result,
            version: VERSION,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut out = String::new();
        render(&value, "", &mut out);
        out
    }
}

fn scalar_to_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Flattens nested JSON into aligned `path  value` rows; arrays of objects
/// with shared keys become aligned columns.
fn render(value: &Value, prefix: &str, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let path = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                render(v, &path, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| i.is_object()) && !items.is_empty() => {
            // tabular: union of keys, aligned columns
            let mut keys: Vec<String> = Vec::new();
            for item in items {
                for k in item.as_object().unwrap().keys() {
                    if !keys.contains(k) {
                        keys.push(k.clone());
                    }
                }
            }
            let rows: Vec<Vec<String>> = items
                .iter()
                .map(|item| {
                    keys.iter()
                        .map(|k| {
                            item.get(k)
                                .map(scalar_to_string)
                                .unwrap_or_default()
                        })
                        .collect()
                })
                .collect();
            let widths: Vec<usize> = keys
                .iter()
                .enumerate()
                .map(|(i, k)| {
                    rows.iter()
                        .map(|r| r[i].len())
                        .chain(std::iter::once(k.len()))
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            out.push_str(&format!("{prefix}:\n"));
            let header: Vec<String> = keys
                .iter()
                .enumerate()
                .map(|(i, k)| format!("{:width$}", k, width = widths[i]))
                .collect();
            out.push_str(&format!("  {}\n", header.join("  ")));
            for row in rows {
                let cells: Vec<String> = row
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("{:width$}", c, width = widths[i]))
                    .collect();
                out.push_str(&format!("  {}\n", cells.join("  ")));
            }
        }
        other => {
            out.push_str(&format!("{prefix:40} {}\n", scalar_to_string(other)));
        }
    }
}
