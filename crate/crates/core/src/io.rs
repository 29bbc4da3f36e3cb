//! JSON file formats for chains, operators, tensors and cochains, and the
//! versioned CSV writer.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cochain::CoarseCochain;
use crate::cyclic::CyclicTensor;
use crate::error::{Error, Result};
use crate::opalg::{BandedOperator, OperatorBuilder};
use crate::spaces::{PointId, Window, WindowSpec};
use crate::ufchain::UfChain;

/// First line of every CSV file written by the lab.
pub const CSV_SCHEMA_LINE: &str = "# coarselab csv schema 1";

/// A point given either by its index in the window or by coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRef {
    Id(u32),
    Coords(Vec<i64>),
}

impl PointRef {
    fn resolve(&self, window: &Window) -> Result<PointId> {
        match self {
            PointRef::Id(i) => {
                let p = PointId(*i);
                window
                    .contains(p)
                    .then_some(p)
                    .ok_or_else(|| Error::PointNotInWindow { module: "io", point: format!("id {i}") })
            }
            PointRef::Coords(c) => window
                .lookup(c)
                .ok_or_else(|| Error::PointNotInWindow { module: "io", point: format!("{c:?}") }),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChainTermFile {
    pub tuple: Vec<PointRef>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChainFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSpec>,
    pub degree: usize,
    pub terms: Vec<ChainTermFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EntryFile {
    pub row: PointRef,
    pub col: PointRef,
    pub block: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OperatorFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSpec>,
    #[serde(default = "one")]
    pub fiber: usize,
    pub entries: Vec<EntryFile>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TensorTermFile {
    pub weight: [f64; 2],
    pub ops: Vec<OperatorFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TensorFile {
    pub window: WindowSpec,
    pub degree: usize,
    #[serde(default)]
    pub two_pi_i_power: u32,
    pub terms: Vec<TensorTermFile>,
}

fn pick_window(file: Option<&WindowSpec>, given: Option<&Arc<Window>>) -> Result<Arc<Window>> {
    match (file, given) {
        (_, Some(w)) => Ok(w.clone()),
        (Some(spec), None) => spec.build(),
        (None, None) => Err(Error::Format("no window given and the file carries no \"window\" descriptor".into())),
    }
}

pub fn chain_to_file(chain: &UfChain, with_window: bool) -> ChainFile {
    ChainFile {
        window: with_window.then(|| chain.window().spec().clone()),
        degree: chain.degree(),
        terms: chain
            .terms()
            .map(|(t, v)| ChainTermFile { tuple: t.iter().map(|p| PointRef::Id(p.0)).collect(), re: v.re, im: v.im })
            .collect(),
    }
}

/// Reads a chain; `window` overrides the descriptor embedded in the file.
pub fn chain_from_json(text: &str, window: Option<&Arc<Window>>) -> Result<UfChain> {
    let file: ChainFile = serde_json::from_str(text)?;
    let window = pick_window(file.window.as_ref(), window)?;
    let mut chain = UfChain::zero(window.clone(), file.degree);
    for term in &file.terms {
        let tuple = term.tuple.iter().map(|p| p.resolve(&window)).collect::<Result<Vec<_>>>()?;
        chain.add_term(tuple, Complex64::new(term.re, term.im))?;
    }
    Ok(chain)
}

pub fn chain_to_json(chain: &UfChain) -> Result<String> {
    Ok(serde_json::to_string_pretty(&chain_to_file(chain, true))?)
}

pub fn operator_to_file(op: &BandedOperator, with_window: bool) -> OperatorFile {
    OperatorFile {
        window: with_window.then(|| op.window().spec().clone()),
        fiber: op.fiber(),
        entries: op
            .entries()
            .map(|(r, c, b)| EntryFile {
                row: PointRef::Id(r.0),
                col: PointRef::Id(c.0),
                block: b.iter().map(|z| [z.re, z.im]).collect(),
            })
            .collect(),
    }
}

fn operator_from_file(file: &OperatorFile, window: Arc<Window>) -> Result<BandedOperator> {
    let mut b = OperatorBuilder::new(window.clone(), file.fiber);
    for e in &file.entries {
        let block: Vec<Complex64> = e.block.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        b.add_block(e.row.resolve(&window)?, e.col.resolve(&window)?, &block)?;
    }
    Ok(b.build())
}

pub fn operator_from_json(text: &str, window: Option<&Arc<Window>>) -> Result<BandedOperator> {
    let file: OperatorFile = serde_json::from_str(text)?;
    let window = pick_window(file.window.as_ref(), window)?;
    operator_from_file(&file, window)
}

pub fn operator_to_json(op: &BandedOperator) -> Result<String> {
    Ok(serde_json::to_string_pretty(&operator_to_file(op, true))?)
}

pub fn tensor_from_json(text: &str) -> Result<CyclicTensor> {
    let file: TensorFile = serde_json::from_str(text)?;
    let window = file.window.build()?;
    let fiber = file.terms.first().and_then(|t| t.ops.first()).map_or(1, |o| o.fiber);
    let mut t = CyclicTensor::zero(window.clone(), fiber, file.degree).with_two_pi_i_power(file.two_pi_i_power);
    for term in &file.terms {
        let ops = term
            .ops
            .iter()
            .map(|o| operator_from_file(o, window.clone()).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        t.push(Complex64::new(term.weight[0], term.weight[1]), ops)?;
    }
    Ok(t)
}

pub fn tensor_to_json(t: &CyclicTensor) -> Result<String> {
    let file = TensorFile {
        window: t.window().spec().clone(),
        degree: t.degree(),
        two_pi_i_power: t.two_pi_i_power(),
        terms: t
            .terms()
            .iter()
            .map(|term| TensorTermFile {
                weight: [term.weight.re, term.weight.im],
                ops: term.ops.iter().map(|o| operator_to_file(o, false)).collect(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct TableValue {
    tuple: Vec<Vec<i64>>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TableFile {
    degree: usize,
    values: Vec<TableValue>,
}

/// Parses `jump:axis:threshold`, `coord:axis`, `const:degree:value` or
/// `table:path.json` (a file `{"degree": q, "values": [{"tuple": [[x…]…],
/// "re": a, "im": b}]}`).
pub fn parse_cochain(spec: &str) -> Result<CoarseCochain> {
    let bad = || Error::Format(format!("cannot parse cochain {spec:?}; expected jump:AXIS:THRESHOLD, coord:AXIS, const:DEGREE:VALUE or table:FILE"));
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    match kind {
        "jump" => {
            let (axis, thr) = rest.split_once(':').ok_or_else(bad)?;
            Ok(CoarseCochain::jump(axis.parse().map_err(|_| bad())?, thr.parse().map_err(|_| bad())?))
        }
        "coord" => Ok(CoarseCochain::Coordinate { axis: rest.parse().map_err(|_| bad())? }),
        "const" => {
            let (degree, value) = rest.split_once(':').ok_or_else(bad)?;
            Ok(CoarseCochain::Constant {
                degree: degree.parse().map_err(|_| bad())?,
                value: Complex64::new(value.parse().map_err(|_| bad())?, 0.0),
            })
        }
        "table" => {
            let text = std::fs::read_to_string(rest)?;
            let file: TableFile = serde_json::from_str(&text)?;
            CoarseCochain::table(
                file.degree,
                file.values.into_iter().map(|v| (v.tuple, Complex64::new(v.re, v.im))),
            )
        }
        _ => Err(bad()),
    }
}

/// Writes the schema line, a header and the rows.
pub fn write_csv<W: Write>(mut out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    writeln!(out, "{CSV_SCHEMA_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_csv(std::fs::File::create(path)?, header, rows)
}

/// Shortest round-trip formatting for CSV cells.
pub fn cell(x: f64) -> String {
    format!("{x:?}")
}
