//! Deterministic JSON/CSV export of tables and reports. Cyclotomic values
//! serialize as {conductor, coefficient pairs}; re-export of identical data
//! is byte-identical.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::charfun::{CharTable, ClassFunction};
use crate::cyclotomic::{CycNum, CycNumWire};
use crate::error::Result;

#[derive(Serialize, Deserialize)]
pub struct ClassFunctionWire {
    pub form: String,
    pub name: Option<String>,
    pub values: Vec<CycNumWire>,
}

impl From<&ClassFunction> for ClassFunctionWire {
    fn from(f: &ClassFunction) -> Self {
        ClassFunctionWire {
            form: f.form.clone(),
            name: f.name.clone(),
            values: f.values.iter().map(CycNumWire::from).collect(),
        }
    }
}

impl TryFrom<&ClassFunctionWire> for ClassFunction {
    type Error = crate::SltError;
    fn try_from(w: &ClassFunctionWire) -> Result<ClassFunction> {
        let values = w
            .values
            .iter()
            .map(CycNum::try_from)
            .collect::<Result<Vec<_>>>()?;
        Ok(ClassFunction {
            form: w.form.clone(),
            values,
            name: w.name.clone(),
        })
    }
}

#[derive(Serialize, Deserialize)]
pub struct CharTableWire {
    pub form: String,
    pub conductor: u64,
    pub dixon_prime: u64,
    pub class_sizes: Vec<usize>,
    pub rows: Vec<ClassFunctionWire>,
}

pub fn chartable_wire(table: &CharTable, class_sizes: &[usize]) -> CharTableWire {
    CharTableWire {
        form: table.form.clone(),
        conductor: table.conductor,
        dixon_prime: table.dixon_prime,
        class_sizes: class_sizes.to_vec(),
        rows: table.irreducibles.iter().map(ClassFunctionWire::from).collect(),
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// CSV of a value matrix: one row per class function, cyclotomic values as
/// compact {N, coefficient list} strings.
pub fn values_csv(rows: &[ClassFunction]) -> String {
    let mut out = String::new();
    for f in rows {
        let name = f.name.clone().unwrap_or_default();
        let mut cells = vec![name];
        for v in &f.values {
            let w = CycNumWire::from(v);
            let coeffs: Vec<String> = w
                .coeffs
                .iter()
                .map(|(n, d)| {
                    if d == "1" {
                        n.clone()
                    } else {
                        format!("{n}/{d}")
                    }
                })
                .collect();
            cells.push(format!("{{{};[{}]}}", w.n, coeffs.join(" ")));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_out(path: &str, content: &str) -> Result<()> {
    if path == "-" {
        print!("{content}");
        std::io::stdout().flush()?;
        return Ok(());
    }
    if let Some(parent) = std::path::Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classfunction_roundtrip() {
        let f = ClassFunction::new(
            "test",
            vec![
                CycNum::from_int(2),
                CycNum::zeta_pow(12, 5).unwrap(),
                CycNum::zero(),
            ],
        )
        .named("x");
        let wire = ClassFunctionWire::from(&f);
        let json = to_json_string(&wire).unwrap();
        let parsed: ClassFunctionWire = serde_json::from_str(&json).unwrap();
        let back = ClassFunction::try_from(&parsed).unwrap();
        assert_eq!(f, back);
        // byte-identical re-export
        let json2 = to_json_string(&ClassFunctionWire::from(&back)).unwrap();
        assert_eq!(json, json2);
    }

    #[test]
    fn csv_has_conductor_and_coeffs() {
        let f = ClassFunction::new("t", vec![CycNum::zeta_pow(3, 1).unwrap()]).named("z");
        let csv = values_csv(&[f]);
        assert!(csv.starts_with("z,"));
        assert!(csv.contains("{3;"));
    }
}
