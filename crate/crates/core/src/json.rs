//! JSON formats for monoids, acts and morphisms.
//!
//! Right acts store `action[a][s] = a·s` (one row per element). Left acts
//! store the transpose, `action[s][x] = s·x` (one row per monoid element).
//! An act's `"monoid"` is either an inline monoid object or a string path,
//! resolved against the directory of the referring file. Emission goes
//! through `serde_json::Value`, whose maps are sorted, so output is
//! canonical.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::act::{Act, Side};
use crate::error::{Error, Result};
use crate::monoid::Monoid;
use crate::morphism::ActMorphism;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonoidDoc {
    pub order: usize,
    pub identity: usize,
    pub table: Vec<Vec<usize>>,
}

impl MonoidDoc {
    pub fn from_monoid(m: &Monoid) -> Self {
        MonoidDoc {
            order: m.order(),
            identity: m.identity(),
            table: m.rows(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActDoc {
    pub monoid: MonoidDoc,
    pub side: Side,
    pub size: usize,
    pub action: Vec<Vec<usize>>,
}

impl ActDoc {
    pub fn from_act(a: &Act) -> Self {
        let action = match a.side() {
            Side::Right => a.rows(),
            Side::Left => a
                .monoid()
                .elements()
                .map(|s| a.elements().map(|x| a.apply(x, s)).collect())
                .collect(),
        };
        ActDoc {
            monoid: MonoidDoc::from_monoid(a.monoid()),
            side: a.side(),
            size: a.size(),
            action,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorphismDoc {
    pub dom: ActDoc,
    pub cod: ActDoc,
    pub map: Vec<usize>,
}

impl MorphismDoc {
    pub fn from_morphism(f: &ActMorphism) -> Self {
        MorphismDoc {
            dom: ActDoc::from_act(f.dom()),
            cod: ActDoc::from_act(f.cod()),
            map: f.map().to_vec(),
        }
    }
}

/// Resolves file references and keeps monoids shared by value so that
/// objects read from different files interoperate.
#[derive(Clone, Debug, Default)]
pub struct Parser {
    base: Option<PathBuf>,
    monoids: Vec<Arc<Monoid>>,
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::schema(path, message)
}

fn field<'v>(v: &'v Value, path: &str, key: &str) -> Result<&'v Value> {
    let obj = v
        .as_object()
        .ok_or_else(|| schema(path, "expected an object"))?;
    obj.get(key)
        .ok_or_else(|| schema(path, format!("missing field \"{key}\"")))
}

fn index(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn index_rows(v: &Value, path: &str) -> Result<Vec<Vec<usize>>> {
    let rows = v
        .as_array()
        .ok_or_else(|| schema(path, "expected an array of rows"))?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let rp = format!("{path}[{i}]");
            row.as_array()
                .ok_or_else(|| schema(&rp, "expected an array"))?
                .iter()
                .enumerate()
                .map(|(j, x)| index(x, &format!("{rp}[{j}]")))
                .collect()
        })
        .collect()
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| schema(&path.display().to_string(), e.to_string()))
}

impl Parser {
    pub fn new() -> Self {
        Parser::default()
    }

    /// Relative file references resolve against `dir`.
    pub fn with_base(dir: impl Into<PathBuf>) -> Self {
        Parser {
            base: Some(dir.into()),
            monoids: Vec::new(),
        }
    }

    fn resolve(&self, reference: &str) -> PathBuf {
        match &self.base {
            Some(b) => b.join(reference),
            None => PathBuf::from(reference),
        }
    }

    fn intern(&mut self, m: Monoid) -> Arc<Monoid> {
        if let Some(hit) = self.monoids.iter().find(|x| ***x == m) {
            return hit.clone();
        }
        let m = Arc::new(m);
        self.monoids.push(m.clone());
        m
    }

    fn nested(&self, reference: &str) -> (Parser, PathBuf) {
        let path = self.resolve(reference);
        let mut p = self.clone();
        p.base = path.parent().map(Path::to_path_buf);
        (p, path)
    }

    pub fn monoid(&mut self, v: &Value, path: &str) -> Result<Arc<Monoid>> {
        if let Some(reference) = v.as_str() {
            let (mut p, file) = self.nested(reference);
            let inner = read_json(&file)?;
            let m = p.monoid(&inner, &file.display().to_string())?;
            self.monoids = p.monoids;
            return Ok(self.intern((*m).clone()));
        }
        let order = index(field(v, path, "order")?, &format!("{path}.order"))?;
        let identity = index(field(v, path, "identity")?, &format!("{path}.identity"))?;
        let tpath = format!("{path}.table");
        let table = index_rows(field(v, path, "table")?, &tpath)?;
        if table.len() != order {
            return Err(schema(&tpath, format!("{} rows for order {order}", table.len())));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(schema(
                    &format!("{tpath}[{i}]"),
                    format!("{} entries for order {order}", row.len()),
                ));
            }
            if let Some(j) = row.iter().position(|&x| x >= order) {
                return Err(schema(
                    &format!("{tpath}[{i}][{j}]"),
                    format!("{} is out of range 0..{order}", row[j]),
                ));
            }
        }
        if identity >= order {
            return Err(schema(
                &format!("{path}.identity"),
                format!("{identity} is out of range 0..{order}"),
            ));
        }
        let m = crate::monoid::validate_monoid(&table, identity)?;
        Ok(self.intern(m))
    }

    pub fn act(&mut self, v: &Value, path: &str) -> Result<Act> {
        if let Some(reference) = v.as_str() {
            let (mut p, file) = self.nested(reference);
            let inner = read_json(&file)?;
            let a = p.act(&inner, &file.display().to_string())?;
            self.monoids = p.monoids;
            let m = self.intern((**a.monoid()).clone());
            return a.rebase(m);
        }
        let monoid = self.monoid(field(v, path, "monoid")?, &format!("{path}.monoid"))?;
        let side = match field(v, path, "side")?.as_str() {
            Some("right") => Side::Right,
            Some("left") => Side::Left,
            _ => return Err(schema(&format!("{path}.side"), "expected \"right\" or \"left\"")),
        };
        let size = index(field(v, path, "size")?, &format!("{path}.size"))?;
        let apath = format!("{path}.action");
        let action = index_rows(field(v, path, "action")?, &apath)?;
        let n = monoid.order();
        let (rows, cols) = match side {
            Side::Right => (size, n),
            Side::Left => (n, size),
        };
        if action.len() != rows {
            return Err(schema(&apath, format!("expected {rows} rows, found {}", action.len())));
        }
        for (i, row) in action.iter().enumerate() {
            if row.len() != cols {
                return Err(schema(
                    &format!("{apath}[{i}]"),
                    format!("expected {cols} entries, found {}", row.len()),
                ));
            }
            if let Some(j) = row.iter().position(|&x| x >= size) {
                return Err(schema(
                    &format!("{apath}[{i}][{j}]"),
                    format!("{} is out of range 0..{size}", row[j]),
                ));
            }
        }
        let allow_empty = v
            .get("allow_empty")
            .and_then(Value::as_bool)
            .unwrap_or(size == 0);
        let mut flat = vec![0; size * n];
        for a in 0..size {
            for s in 0..n {
                flat[a * n + s] = match side {
                    Side::Right => action[a][s],
                    Side::Left => action[s][a],
                };
            }
        }
        Act::from_flat(monoid, side, size, flat, allow_empty)
    }

    pub fn morphism(&mut self, v: &Value, path: &str) -> Result<ActMorphism> {
        if let Some(reference) = v.as_str() {
            let (mut p, file) = self.nested(reference);
            let inner = read_json(&file)?;
            let f = p.morphism(&inner, &file.display().to_string())?;
            self.monoids = p.monoids;
            return Ok(f);
        }
        let dom = self.act(field(v, path, "dom")?, &format!("{path}.dom"))?;
        let cod = self.act(field(v, path, "cod")?, &format!("{path}.cod"))?;
        let mpath = format!("{path}.map");
        let mv = field(v, path, "map")?
            .as_array()
            .ok_or_else(|| schema(&mpath, "expected an array"))?;
        let map = mv
            .iter()
            .enumerate()
            .map(|(i, x)| index(x, &format!("{mpath}[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        if !Arc::ptr_eq(dom.monoid(), cod.monoid()) {
            return Err(Error::MixedMonoids);
        }
        ActMorphism::new(Arc::new(dom), Arc::new(cod), map)
    }

    /// A span `{"f": A → B, "g": A → C}`.
    pub fn span(&mut self, v: &Value, path: &str) -> Result<(ActMorphism, ActMorphism)> {
        let f = self.morphism(field(v, path, "f")?, &format!("{path}.f"))?;
        let g = self.morphism(field(v, path, "g")?, &format!("{path}.g"))?;
        if f.dom() != g.dom() {
            return Err(Error::SpanMismatch);
        }
        let g = ActMorphism::new(f.dom().clone(), g.cod().clone(), g.map().to_vec())?;
        Ok((f, g))
    }
}

fn load_with<T>(path: &Path, run: impl FnOnce(&mut Parser, &Value, &str) -> Result<T>) -> Result<T> {
    let v = read_json(path)?;
    let mut p = match path.parent() {
        Some(dir) => Parser::with_base(dir),
        None => Parser::new(),
    };
    run(&mut p, &v, "$")
}

pub fn load_monoid(path: &Path) -> Result<Arc<Monoid>> {
    load_with(path, |p, v, at| p.monoid(v, at))
}

pub fn load_act(path: &Path) -> Result<Act> {
    load_with(path, |p, v, at| p.act(v, at))
}

pub fn load_morphism(path: &Path) -> Result<ActMorphism> {
    load_with(path, |p, v, at| p.morphism(v, at))
}

pub fn load_span(path: &Path) -> Result<(ActMorphism, ActMorphism)> {
    load_with(path, |p, v, at| p.span(v, at))
}

pub fn parse_monoid(text: &str) -> Result<Monoid> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema("$", e.to_string()))?;
    Ok((*Parser::new().monoid(&v, "$")?).clone())
}

pub fn parse_act(text: &str) -> Result<Act> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema("$", e.to_string()))?;
    Parser::new().act(&v, "$")
}

pub fn parse_morphism(text: &str) -> Result<ActMorphism> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema("$", e.to_string()))?;
    Parser::new().morphism(&v, "$")
}

pub fn monoid_value(m: &Monoid) -> Value {
    serde_json::to_value(MonoidDoc::from_monoid(m)).expect("plain data")
}

pub fn act_value(a: &Act) -> Value {
    let mut v = serde_json::to_value(ActDoc::from_act(a)).expect("plain data");
    if a.is_empty() {
        v["allow_empty"] = json!(true);
    }
    v
}

pub fn morphism_value(f: &ActMorphism) -> Value {
    json!({
        "dom": act_value(f.dom()),
        "cod": act_value(f.cod()),
        "map": f.map(),
    })
}

/// Compact JSON with sorted keys.
pub fn canonical_string(v: &Value) -> String {
    serde_json::to_string(v).expect("plain data")
}

/// Sorted-key JSON for any serializable report.
pub fn to_canonical<T: Serialize>(x: &T) -> String {
    canonical_string(&serde_json::to_value(x).expect("plain data"))
}

pub fn emit_monoid(m: &Monoid) -> String {
    canonical_string(&monoid_value(m))
}

pub fn emit_act(a: &Act) -> String {
    canonical_string(&act_value(a))
}

pub fn emit_morphism(f: &ActMorphism) -> String {
    canonical_string(&morphism_value(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    const B2: &str = r#"{"identity":0,"order":2,"table":[[0,1],[1,1]]}"#;

    #[test]
    fn monoid_round_trip() {
        let m = parse_monoid(B2).unwrap();
        assert_eq!(m, Monoid::two_element_semilattice());
        assert_eq!(emit_monoid(&m), B2);
    }

    #[test]
    fn act_round_trip_both_sides() {
        let m = Arc::new(Monoid::two_element_semilattice());
        for side in [Side::Right, Side::Left] {
            for a in crate::enumerate::enumerate_acts(&m, side, 2) {
                let text = emit_act(&a);
                let back = parse_act(&text).unwrap();
                assert_eq!(back, a);
                assert_eq!(emit_act(&back), text);
            }
        }
    }

    #[test]
    fn left_acts_use_transposed_rows() {
        let m = Arc::new(Monoid::two_element_semilattice());
        let x = Act::new(m, Side::Left, &[vec![0, 1], vec![1, 1]], false).unwrap();
        let v = act_value(&x);
        assert_eq!(v["action"], json!([[0, 1], [1, 1]]));
    }

    #[test]
    fn out_of_range_cell_is_named() {
        let text = format!(r#"{{"monoid":{B2},"side":"right","size":2,"action":[[0,1],[1,5]]}}"#);
        match parse_act(&text).unwrap_err() {
            Error::Schema { path, .. } => assert_eq!(path, "$.action[1][1]"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn missing_field_is_named() {
        match parse_monoid(r#"{"order":1,"table":[[0]]}"#).unwrap_err() {
            Error::Schema { path, message } => {
                assert_eq!(path, "$");
                assert!(message.contains("identity"));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn morphism_across_monoids_is_rejected() {
        let z2 = r#"{"identity":0,"order":2,"table":[[0,1],[1,0]]}"#;
        let text = format!(
            r#"{{"dom":{{"monoid":{B2},"side":"right","size":1,"action":[[0,0]]}},
                "cod":{{"monoid":{z2},"side":"right","size":1,"action":[[0,0]]}},"map":[0]}}"#
        );
        assert_eq!(parse_morphism(&text).unwrap_err(), Error::MixedMonoids);
    }

    #[test]
    fn file_references_resolve_relative_to_the_referrer() {
        let dir = std::env::temp_dir().join(format!("actkit-json-{}", std::process::id()));
        std::fs::create_dir_all(dir.join("sub")).unwrap();
        std::fs::write(dir.join("sub/b2.json"), B2).unwrap();
        std::fs::write(
            dir.join("sub/theta.json"),
            r#"{"monoid":"b2.json","side":"right","size":1,"action":[[0,0]]}"#,
        )
        .unwrap();
        std::fs::write(
            dir.join("f.json"),
            r#"{"dom":"sub/theta.json","cod":"sub/theta.json","map":[0]}"#,
        )
        .unwrap();
        let f = load_morphism(&dir.join("f.json")).unwrap();
        assert!(f.is_iso());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
