//! JSON model files.
//!
//! ```text
//! {"format_version":1,"k":2,"p":3,"lambda":"inf","has_special":false,
//!  "partition":[[1,3],[2]],"centroids":[[...],[...]]}
//! ```
//!
//! Feature indices are 1-based. When `has_special` is true the first
//! partition entry is the unused feature group and its centroid entry is
//! an empty array. `lambda` is a number, the string `"inf"`, or absent.
//! Floats are written with 17 significant digits.

use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::classifier::NdcModel;
use crate::data::FeaturePartition;
use crate::error::{NdcError, Result};

pub const FORMAT_VERSION: u64 = 1;

/// Compact JSON with every float printed as `d.dddddddddddddddde±x`.
struct SigDigitFormatter;

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

fn to_value(model: &NdcModel) -> Value {
    let part = model.partition();
    let partition: Vec<Vec<usize>> = part
        .groups()
        .iter()
        .map(|g| g.iter().map(|i| i + 1).collect())
        .collect();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(part.groups().len());
    if part.has_special() {
        centroids.push(Vec::new());
    }
    centroids.extend(model.centroids().iter().cloned());

    let mut obj = Map::new();
    obj.insert("format_version".into(), json!(FORMAT_VERSION));
    obj.insert("k".into(), json!(model.k()));
    obj.insert("p".into(), json!(model.p()));
    match model.lambda() {
        Some(l) if l.is_infinite() => {
            obj.insert("lambda".into(), json!("inf"));
        }
        Some(l) => {
            obj.insert("lambda".into(), json!(l));
        }
        None => {}
    }
    obj.insert("has_special".into(), json!(part.has_special()));
    obj.insert("partition".into(), json!(partition));
    obj.insert("centroids".into(), json!(centroids));
    Value::Object(obj)
}

pub fn to_json_string(model: &NdcModel) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter);
    serde::Serialize::serialize(&to_value(model), &mut ser).expect("in-memory JSON serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| NdcError::Model(format!("missing field `{name}`")))
}

fn as_count(v: &Value, name: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| NdcError::Model(format!("`{name}` must be a non-negative integer")))
}

pub fn from_json_str(text: &str) -> Result<NdcModel> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| NdcError::Model("top level must be an object".into()))?;

    let version = as_count(field(obj, "format_version")?, "format_version")?;
    if version as u64 != FORMAT_VERSION {
        return Err(NdcError::Model(format!("unsupported format_version {version}")));
    }
    let k = as_count(field(obj, "k")?, "k")?;
    let p = as_count(field(obj, "p")?, "p")?;
    let lambda = match obj.get("lambda") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) if s == "inf" => Some(f64::INFINITY),
        Some(v) => Some(
            v.as_f64()
                .ok_or_else(|| NdcError::Model("`lambda` must be a number or \"inf\"".into()))?,
        ),
    };
    let has_special = match obj.get("has_special") {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| NdcError::Model("`has_special` must be a boolean".into()))?,
    };

    let groups: Vec<Vec<usize>> = field(obj, "partition")?
        .as_array()
        .ok_or_else(|| NdcError::Model("`partition` must be an array".into()))?
        .iter()
        .map(|g| {
            g.as_array()
                .ok_or_else(|| NdcError::Model("partition entries must be arrays".into()))?
                .iter()
                .map(|i| match i.as_u64() {
                    Some(i) if i >= 1 => Ok(i as usize - 1),
                    _ => Err(NdcError::Model("feature indices must be integers >= 1".into())),
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut centroids: Vec<Vec<f64>> = field(obj, "centroids")?
        .as_array()
        .ok_or_else(|| NdcError::Model("`centroids` must be an array".into()))?
        .iter()
        .map(|c| {
            c.as_array()
                .ok_or_else(|| NdcError::Model("centroid entries must be arrays".into()))?
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| NdcError::Model("centroid values must be numbers".into())))
                .collect()
        })
        .collect::<Result<_>>()?;

    if centroids.len() != groups.len() {
        return Err(NdcError::Model(format!(
            "{} centroid entries for {} partition groups",
            centroids.len(),
            groups.len()
        )));
    }
    if has_special {
        if !centroids[0].is_empty() {
            return Err(NdcError::Model("the special group carries no centroid".into()));
        }
        centroids.remove(0);
    }

    let partition = FeaturePartition::new(groups, has_special);
    if partition.n_classes() != k {
        return Err(NdcError::Model(format!(
            "`k` is {k} but the partition has {} class groups",
            partition.n_classes()
        )));
    }
    NdcModel::from_parts(partition, centroids, p, lambda)
}

pub fn save(model: &NdcModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_json_string(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<NdcModel> {
    from_json_str(&std::fs::read_to_string(path)?)
}
