use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use super::{EXIT_INPUT, EXIT_OK, EXIT_RUNTIME};
use crate::digest::derive_seed;
use crate::hdsl::{self, Expr};
use crate::problems::io::load_bpp;
use crate::problems::{
    bpp_best_fit, bpp_first_fit, bpp_lower_bound, bpp_pack, excess_ratio, gen_bpp, gen_tsp, save_instance,
    BppInstance, Instance, Packing, Rect, TspInstance,
};

/// Instance files and heuristic expressions to compare. Paths are relative
/// to the suite file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSuite {
    pub instances: Vec<PathBuf>,
    pub heuristics: Vec<String>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

enum Packer {
    FirstFit,
    BestFit,
    Expr(Expr),
}

impl Packer {
    fn pack(&self, inst: &BppInstance) -> Option<Packing> {
        match self {
            Packer::FirstFit => Some(bpp_first_fit(inst)),
            Packer::BestFit => Some(bpp_best_fit(inst)),
            Packer::Expr(e) => bpp_pack(inst, e).ok(),
        }
    }
}

/// The report CSV and the per-heuristic summary table. Cells where the
/// expression fails to evaluate read `infeasible`.
pub fn bench_csv(instances: &[(String, BppInstance)], heuristics: &[String]) -> Result<(String, String), String> {
    let mut packers = vec![("first_fit".to_string(), Packer::FirstFit), ("best_fit".to_string(), Packer::BestFit)];
    for h in heuristics {
        let expr = hdsl::parse(h).map_err(|e| format!("heuristic {h:?}: {e}"))?;
        packers.push((h.clone(), Packer::Expr(expr)));
    }
    let mut csv = String::from("heuristic,instance,bins,lb,excess\n");
    let mut summary = String::from("heuristic,mean_excess\n");
    for (label, packer) in &packers {
        let mut excesses = Some(Vec::new());
        for (name, inst) in instances {
            let lb = bpp_lower_bound(inst);
            let (bins, excess) = match packer.pack(inst) {
                Some(p) => {
                    let x = excess_ratio(p.bin_count(), lb);
                    if let Some(v) = excesses.as_mut() {
                        v.push(x);
                    }
                    (p.bin_count().to_string(), format!("{x:.6}"))
                }
                None => {
                    excesses = None;
                    ("infeasible".to_string(), "infeasible".to_string())
                }
            };
            let _ = writeln!(csv, "{},{},{bins},{lb},{excess}", csv_field(label), csv_field(name));
        }
        let mean = match excesses {
            Some(v) if !v.is_empty() => format!("{:.6}", v.iter().sum::<f64>() / v.len() as f64),
            Some(_) => "n/a".to_string(),
            None => "infeasible".to_string(),
        };
        let _ = writeln!(summary, "{},{mean}", csv_field(label));
    }
    Ok((csv, summary))
}

pub(super) fn cmd_bench(suite_path: &Path, out: &Path) -> i32 {
    let suite: BenchSuite = match fs::read_to_string(suite_path)
        .map_err(|e| e.to_string())
        .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
    {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", suite_path.display());
            return EXIT_INPUT;
        }
    };
    let base = suite_path.parent().unwrap_or(Path::new("."));
    let mut instances = Vec::new();
    for p in &suite.instances {
        match load_bpp(base.join(p)) {
            Ok(inst) => instances.push((p.display().to_string(), inst)),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
        }
    }
    let (csv, summary) = match bench_csv(&instances, &suite.heuristics) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    if let Err(e) = fs::write(out, csv) {
        eprintln!("error: cannot write {}: {e}", out.display());
        return EXIT_RUNTIME;
    }
    print!("{summary}");
    EXIT_OK
}

/// `bins=B lb=L excess=X` for one expression on one instance.
pub fn eval_expr_line(expr: &Expr, inst: &BppInstance) -> Result<String, String> {
    let packing = bpp_pack(inst, expr).map_err(|e| e.to_string())?;
    let lb = bpp_lower_bound(inst);
    Ok(format!("bins={} lb={lb} excess={:.4}", packing.bin_count(), excess_ratio(packing.bin_count(), lb)))
}

pub(super) fn cmd_eval_expr(text: &str, instance: &Path) -> i32 {
    let expr = match hdsl::parse(text) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("  {text}");
            eprintln!("  {}^", " ".repeat(text[..e.position.min(text.len())].chars().count()));
            return EXIT_INPUT;
        }
    };
    let inst = match load_bpp(instance) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match eval_expr_line(&expr, &inst) {
        Ok(line) => {
            println!("{line}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InstanceKind {
    Tsp,
    Bpp,
}

impl InstanceKind {
    fn as_str(self) -> &'static str {
        match self {
            InstanceKind::Tsp => "tsp",
            InstanceKind::Bpp => "bpp",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenParams {
    /// Cities or items; `None` picks 9 cities or 50 items.
    pub size: Option<usize>,
    pub capacity: f64,
    pub item_range: (f64, f64),
}

/// Writes `count` instances named `<kind>-<seed>-<i>.json` into `out`; the
/// i-th is generated from a seed derived from `seed` and `i`.
pub fn gen_instances(kind: InstanceKind, seed: u64, count: usize, out: &Path, params: &GenParams) -> Result<Vec<PathBuf>, String> {
    if count > 0 {
        fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    }
    let mut written = Vec::with_capacity(count);
    for i in 0..count {
        let name = format!("{}-{seed}-{i}", kind.as_str());
        let s = derive_seed(seed, i as u64);
        let inst = match kind {
            InstanceKind::Tsp => {
                let t = gen_tsp(s, params.size.unwrap_or(9), Rect::unit()).map_err(|e| e.to_string())?;
                Instance::Tsp(TspInstance::new(&name, t.points().to_vec()).map_err(|e| e.to_string())?)
            }
            InstanceKind::Bpp => {
                let b = gen_bpp(s, params.size.unwrap_or(50), params.capacity, params.item_range)
                    .map_err(|e| e.to_string())?;
                Instance::Bpp(BppInstance::new(&name, b.capacity(), b.items().to_vec()).map_err(|e| e.to_string())?)
            }
        };
        let path = out.join(format!("{name}.json"));
        save_instance(&inst, &path).map_err(|e| e.to_string())?;
        written.push(path);
    }
    Ok(written)
}

pub(super) fn cmd_gen_instances(kind: InstanceKind, seed: u64, count: usize, out: &Path, params: &GenParams) -> i32 {
    match gen_instances(kind, seed, count, out, params) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(items: &[f64]) -> BppInstance {
        BppInstance::new("x", 10.0, items.to_vec()).unwrap()
    }

    #[test]
    fn eval_line_format() {
        let e = hdsl::parse("-index").unwrap();
        assert_eq!(eval_expr_line(&e, &inst(&[5.0, 5.0, 4.0, 3.0, 3.0])).unwrap(), "bins=2 lb=2 excess=0.0000");
        let e = hdsl::parse("-(cap - item)").unwrap();
        assert!(eval_expr_line(&e, &inst(&[4.0, 3.0, 5.0, 5.0, 3.0])).unwrap().starts_with("bins=2 "));
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(csv_field("min(cap, item)"), "\"min(cap, item)\"");
        assert_eq!(csv_field("-index"), "-index");
    }

    #[test]
    fn infeasible_cells() {
        let insts = vec![("a".to_string(), inst(&[5.0, 5.0])), ("b".to_string(), inst(&[3.0, 3.0, 6.0]))];
        let (csv, summary) = bench_csv(&insts, &["item/(cap-cap)".to_string()]).unwrap();
        let rows: Vec<&str> = csv.lines().filter(|l| l.starts_with("item/")).collect();
        assert_eq!(rows, ["item/(cap-cap),a,infeasible,1,infeasible", "item/(cap-cap),b,infeasible,2,infeasible"]);
        assert!(summary.contains("item/(cap-cap),infeasible"));
    }

    #[test]
    fn count_zero_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("none");
        let params = GenParams { size: None, capacity: 100.0, item_range: (10.0, 40.0) };
        assert!(gen_instances(InstanceKind::Bpp, 7, 0, &out, &params).unwrap().is_empty());
        assert!(!out.exists());
    }
}
