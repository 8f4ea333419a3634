//! JSON instance files.
//!
//! TSP: `{"name": ..., "points": [[x, y], ...]}`.
//! Bin packing: `{"name": ..., "capacity": ..., "items": [...]}`.
//! Unknown fields are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BppInstance, Point, Problem, TrainingSet, TspInstance};

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Tsp(TspInstance),
    Bpp(BppInstance),
}

impl Instance {
    pub fn digest(&self) -> u64 {
        match self {
            Instance::Tsp(t) => t.digest(),
            Instance::Bpp(b) => b.digest(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Tsp(_) => "tsp",
            Instance::Bpp(_) => "bpp",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Schema { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TspFile {
    name: String,
    points: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BppFile {
    name: String,
    capacity: f64,
    items: Vec<f64>,
}

fn schema_error(path: &Path, err: serde_json::Error) -> LoadError {
    LoadError::Schema {
        path: path.to_path_buf(),
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

/// Parses instance JSON. The kind is decided by the presence of `points`
/// (TSP) or `capacity`/`items` (bin packing).
pub fn parse_instance(text: &str, path: &Path) -> Result<Instance, LoadError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| schema_error(path, e))?;
    let object = value.as_object().ok_or_else(|| LoadError::Invalid {
        path: path.to_path_buf(),
        message: "top-level value must be an object".into(),
    })?;
    let invalid = |message: String| LoadError::Invalid { path: path.to_path_buf(), message };
    if object.contains_key("points") {
        let file: TspFile = serde_json::from_str(text).map_err(|e| schema_error(path, e))?;
        let points = file.points.iter().map(|&[x, y]| Point::new(x, y)).collect();
        TspInstance::new(file.name, points).map(Instance::Tsp).map_err(|e| invalid(e.to_string()))
    } else if object.contains_key("capacity") || object.contains_key("items") {
        let file: BppFile = serde_json::from_str(text).map_err(|e| schema_error(path, e))?;
        BppInstance::new(file.name, file.capacity, file.items)
            .map(Instance::Bpp)
            .map_err(|e| invalid(e.to_string()))
    } else {
        Err(invalid("cannot tell instance kind: expected a \"points\" field (tsp) or \"capacity\" and \"items\" fields (bpp)".into()))
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, LoadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
    parse_instance(&text, path)
}

pub fn load_tsp(path: impl AsRef<Path>) -> Result<TspInstance, LoadError> {
    let path = path.as_ref();
    match load_instance(path)? {
        Instance::Tsp(t) => Ok(t),
        Instance::Bpp(_) => Err(LoadError::Invalid {
            path: path.to_path_buf(),
            message: "expected a TSP instance, found bin packing".into(),
        }),
    }
}

pub fn load_bpp(path: impl AsRef<Path>) -> Result<BppInstance, LoadError> {
    let path = path.as_ref();
    match load_instance(path)? {
        Instance::Bpp(b) => Ok(b),
        Instance::Tsp(_) => Err(LoadError::Invalid {
            path: path.to_path_buf(),
            message: "expected a bin-packing instance, found TSP".into(),
        }),
    }
}

pub fn instance_to_json(instance: &Instance) -> String {
    let text = match instance {
        Instance::Tsp(t) => serde_json::to_string_pretty(&tsp_file(t)),
        Instance::Bpp(b) => serde_json::to_string_pretty(&bpp_file(b)),
    };
    text.expect("instance fields are finite") + "\n"
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<(), LoadError> {
    let path = path.as_ref();
    fs::write(path, instance_to_json(instance)).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })
}

fn tsp_file(t: &TspInstance) -> TspFile {
    TspFile { name: t.name().to_string(), points: t.points().iter().map(|p| [p.x, p.y]).collect() }
}

fn bpp_file(b: &BppInstance) -> BppFile {
    BppFile { name: b.name().to_string(), capacity: b.capacity(), items: b.items().to_vec() }
}

/// Self-contained JSON form of a run's problem data, as embedded in run logs.
pub fn problem_to_json(problem: &Problem) -> serde_json::Value {
    match problem {
        Problem::Tsp(t) => serde_json::json!({ "kind": "tsp", "instance": tsp_file(t) }),
        Problem::Bpp(set) => serde_json::json!({
            "kind": "bpp",
            "instances": set.instances().iter().map(bpp_file).collect::<Vec<_>>(),
            "weights": set.weights(),
        }),
    }
}

pub fn problem_from_json(value: &serde_json::Value) -> Result<Problem, String> {
    let field = |name: &str| value.get(name).cloned().ok_or_else(|| format!("problem has no {name:?} field"));
    match value.get("kind").and_then(|k| k.as_str()) {
        Some("tsp") => {
            let file: TspFile = serde_json::from_value(field("instance")?).map_err(|e| e.to_string())?;
            let points = file.points.iter().map(|&[x, y]| Point::new(x, y)).collect();
            TspInstance::new(file.name, points).map(Problem::Tsp).map_err(|e| e.to_string())
        }
        Some("bpp") => {
            let files: Vec<BppFile> = serde_json::from_value(field("instances")?).map_err(|e| e.to_string())?;
            let weights: Option<Vec<f64>> = serde_json::from_value(field("weights")?).map_err(|e| e.to_string())?;
            let instances = files
                .into_iter()
                .map(|f| BppInstance::new(f.name, f.capacity, f.items))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            TrainingSet::from_normalized(instances, weights).map(Problem::Bpp).map_err(|e| e.to_string())
        }
        _ => Err("problem kind must be \"tsp\" or \"bpp\"".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_bpp, gen_tsp, Rect};

    #[test]
    fn tsp_round_trip_keeps_digest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sq.json");
        let sq = TspInstance::from_coords("sq", &[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]).unwrap();
        let inst = Instance::Tsp(sq);
        save_instance(&inst, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap().digest(), inst.digest());
    }

    #[test]
    fn generated_instances_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        for seed in 0..10 {
            let t = Instance::Tsp(gen_tsp(seed, 9, Rect::unit()).unwrap());
            let b = Instance::Bpp(gen_bpp(seed, 30, 100.0, (10.0, 40.0)).unwrap());
            for inst in [t, b] {
                let path = dir.path().join(format!("{}-{seed}.json", inst.kind()));
                save_instance(&inst, &path).unwrap();
                assert_eq!(load_instance(&path).unwrap(), inst);
            }
        }
    }

    #[test]
    fn missing_capacity_names_the_field() {
        let err = parse_instance(r#"{"name": "x", "items": [1, 2]}"#, Path::new("x.json")).unwrap_err();
        assert!(matches!(err, LoadError::Schema { .. }));
        assert!(err.to_string().contains("capacity"), "{err}");
    }

    #[test]
    fn oversized_item_is_a_validation_error() {
        let err = parse_instance(r#"{"name": "x", "capacity": 10, "items": [4, 11]}"#, Path::new("x.json"))
            .unwrap_err();
        assert!(matches!(err, LoadError::Invalid { .. }));
        assert!(err.to_string().contains("exceeds capacity"), "{err}");
    }

    #[test]
    fn unknown_field_rejected_with_position() {
        let text = "{\n  \"name\": \"x\",\n  \"points\": [[0,0],[1,0],[0,1]],\n  \"extra\": 1\n}";
        match parse_instance(text, Path::new("t.json")).unwrap_err() {
            LoadError::Schema { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("extra"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn malformed_json_and_unknown_kind() {
        assert!(matches!(
            parse_instance("{\"name\": ", Path::new("a")).unwrap_err(),
            LoadError::Schema { .. }
        ));
        assert!(matches!(
            parse_instance("{\"name\": \"a\"}", Path::new("a")).unwrap_err(),
            LoadError::Invalid { .. }
        ));
        assert!(matches!(parse_instance("[1]", Path::new("a")).unwrap_err(), LoadError::Invalid { .. }));
    }

    #[test]
    fn problem_json_round_trip() {
        let t = Problem::Tsp(gen_tsp(3, 9, Rect::unit()).unwrap());
        assert_eq!(problem_from_json(&problem_to_json(&t)).unwrap(), t);
        let insts = (0..3).map(|s| gen_bpp(s, 20, 100.0, (10.0, 40.0)).unwrap()).collect();
        let b = Problem::Bpp(TrainingSet::new(insts, Some(vec![1.0, 1.0, 1.0])).unwrap());
        let back = problem_from_json(&problem_to_json(&b)).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.digest(), b.digest());
    }

    #[test]
    fn missing_file_reports_path() {
        let err = load_instance("/definitely/not/here.json").unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.json"));
    }
}
