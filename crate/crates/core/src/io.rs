//! Reading inputs and shaping artifacts for the command line.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::laws::PpfTable;
use crate::limits::XiSpec;
use crate::model::CanningsModel;
use crate::rational::{fraction_string, parse_fraction, Rational};
use crate::tensor::MergeTensor;

pub const TOOL: &str = "cannings";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Prefixes parse errors with the file they came from.
fn located<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn load_model(path: &Path) -> Result<CanningsModel> {
    let v = read_json(path)?;
    located(path, CanningsModel::from_json(&v))
}

pub fn load_xi_spec(path: &Path) -> Result<XiSpec> {
    let v = read_json(path)?;
    located(path, XiSpec::from_json(&v))
}

/// `{"d":2,"depth":3,"N":[4,6],"entries":[{"tensor":{..},"value":"1/8"}]}`;
/// `N` is optional and bounds the required domain.
pub fn ppf_table_from_json(v: &Value) -> Result<PpfTable> {
    let count = |name: &str| {
        v.get(name)
            .and_then(Value::as_u64)
            .map(|x| x as usize)
            .ok_or_else(|| Error::Parse(format!("table: field '{name}' must be a non-negative integer")))
    };
    let d = count("d")?;
    let depth = count("depth")?;
    let list = v
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("table: field 'entries' must be an array".into()))?;
    let mut values = HashMap::new();
    for (n, item) in list.iter().enumerate() {
        let t = item
            .get("tensor")
            .ok_or_else(|| Error::Parse(format!("table: missing field entries[{n}].tensor")))
            .and_then(|t| MergeTensor::from_json(t).map_err(|e| Error::Parse(format!("entries[{n}].tensor: {e}"))))?;
        let value = item
            .get("value")
            .and_then(Value::as_str)
            .and_then(parse_fraction)
            .ok_or_else(|| Error::Parse(format!("table: entries[{n}].value must be a fraction string")))?;
        if values.insert(t, value).is_some() {
            return Err(Error::Parse(format!("table: entries[{n}] repeats an earlier tensor")));
        }
    }
    let table = PpfTable::new(d, depth, values)?;
    match v.get("N") {
        None => Ok(table),
        Some(n) => {
            let sizes: Vec<usize> =
                serde_json::from_value(n.clone()).map_err(|e| Error::Parse(format!("table field 'N': {e}")))?;
            table.with_domain(sizes)
        }
    }
}

pub fn ppf_table_to_json(table: &PpfTable) -> Value {
    let entries: Vec<Value> = table
        .keys()
        .into_iter()
        .map(|t| json!({"tensor": t.to_json(), "value": fraction_string(table.get(t).expect("key"))}))
        .collect();
    let mut out = json!({"d": table.d(), "depth": table.depth(), "entries": entries});
    if let Some(sizes) = table.domain() {
        out["N"] = json!(sizes);
    }
    out
}

pub fn load_ppf_table(path: &Path) -> Result<PpfTable> {
    let v = read_json(path)?;
    located(path, ppf_table_from_json(&v))
}

/// Diagonal tensor from `"2,2;3"`: rows separated by `;`, an empty row
/// meaning `j_k = 0`.
pub fn parse_diagonal(s: &str) -> Result<MergeTensor> {
    let rows = s
        .split(';')
        .map(|row| {
            let row = row.trim();
            if row.is_empty() {
                return Ok(Vec::new());
            }
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("diagonal '{s}': '{x}' is not a count")))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MergeTensor::diagonal(rows))
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            match parse_fraction(x) {
                Some(r) => Ok(crate::rational::to_f64(&r)),
                None => x.parse().map_err(|_| Error::Parse(format!("'{x}' is not a number"))),
            }
        })
        .collect()
}

/// Square matrix from `"1/2,1/2;1/3,2/3"`, or from a JSON file holding an
/// array of rows of numbers or fraction strings. Returns exact entries when
/// every entry is a fraction, floats otherwise.
pub fn parse_matrix(s: &str) -> Result<Matrix> {
    let path = Path::new(s);
    let cells: Vec<Vec<String>> = if path.extension().is_some_and(|e| e == "json") {
        let v = read_json(path)?;
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Parse(format!("{s}: expected an array of rows")))?;
        rows.iter()
            .enumerate()
            .map(|(r, row)| {
                row.as_array()
                    .ok_or_else(|| Error::Parse(format!("{s}: row {r} is not an array")))
                    .map(|cells| {
                        cells
                            .iter()
                            .map(|c| c.as_str().map(str::to_string).unwrap_or_else(|| c.to_string()))
                            .collect()
                    })
            })
            .collect::<Result<_>>()?
    } else {
        s.split(';')
            .map(|row| row.split(',').map(|x| x.trim().to_string()).collect())
            .collect()
    };
    let d = cells.len();
    if let Some(r) = cells.iter().position(|row| row.len() != d) {
        return Err(Error::Parse(format!("matrix row {r} has {} entries, expected {d}", cells[r].len())));
    }
    let exact: Option<Vec<Vec<Rational>>> = cells
        .iter()
        .map(|row| row.iter().map(|c| parse_fraction(c)).collect())
        .collect();
    if let Some(m) = exact {
        return Ok(Matrix::Exact(m));
    }
    let float = cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| c.parse::<f64>().map_err(|_| Error::Parse(format!("matrix entry '{c}' is not a number"))))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(Matrix::Float(float))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Matrix {
    Exact(Vec<Vec<Rational>>),
    Float(Vec<Vec<f64>>),
}

/// A CSV field, quoted when it holds a separator, quote or newline.
pub fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Common wrapper of every JSON artifact.
pub fn envelope(command: &str, config: Value, seed: Option<u64>, provenance: Value, result: Value) -> Value {
    json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "config": config,
        "seed": seed,
        "provenance": provenance,
        "result": result,
    })
}

/// `# key: value` lines heading a CSV artifact.
pub fn csv_header(command: &str, config: &Value, seed: Option<u64>, provenance: &str) -> String {
    let mut out = format!("# tool: {TOOL} {VERSION}\n# command: {command}\n# config: {config}\n");
    if let Some(s) = seed {
        out.push_str(&format!("# seed: {s}\n"));
    }
    out.push_str(&format!("# provenance: {provenance}\n"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn diagonal_rows() {
        let t = parse_diagonal("2,2;3").unwrap();
        assert_eq!(t.j(), &[2, 1]);
        assert_eq!(t.get(0, 0), &[2, 2]);
        assert_eq!(t.get(1, 0), &[0]);
        assert_eq!(parse_diagonal(";2").unwrap().j(), &[0, 1]);
        assert!(parse_diagonal("2,x").is_err());
    }

    #[test]
    fn matrices() {
        assert_eq!(
            parse_matrix("1/2,1/2;0,1").unwrap(),
            Matrix::Exact(vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(0, 1), ratio(1, 1)]])
        );
        assert_eq!(parse_matrix("0.5,0.5;0,1").unwrap(), Matrix::Float(vec![vec![0.5, 0.5], vec![0.0, 1.0]]));
        assert!(parse_matrix("1,0;0").is_err());
    }

    #[test]
    fn ppf_round_trip() {
        let wf = CanningsModel::wright_fisher(vec![4, 6], vec![vec![3, 2], vec![1, 4]]).unwrap();
        let table = PpfTable::from_model(&wf, 2).unwrap();
        let back = ppf_table_from_json(&ppf_table_to_json(&table)).unwrap();
        assert_eq!(back.len(), table.len());
        assert_eq!(back.domain(), Some(&[4, 6][..]));
        for t in table.keys() {
            assert_eq!(back.get(t), table.get(t));
        }
    }

    #[test]
    fn model_errors_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        fs::write(&p, r#"{"d":2,"N":[4],"law":"wright-fisher","counts":[[1]]}"#).unwrap();
        let msg = load_model(&p).unwrap_err().to_string();
        assert!(msg.contains("m.json") && msg.contains("'N'"), "{msg}");
    }
}
