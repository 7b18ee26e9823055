//! Problem files in, path artifacts out.
//!
//! Input CSVs carry a header. Node, row and column indices in files are 1-based; the library
//! is 0-based throughout. A path artifact is a directory holding `problem.json` plus knot,
//! segment and dual tables in CSV or JSON.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::general_x::{solve_path_with_design, DesignMatrix, Route};
use crate::operators::{BoundaryPartition, PenaltySpec};
use crate::path::{
    solve_path, Backend, DualSegment, Event, PathKnot, PathOptions, PathRun, SolutionPath,
    Termination,
};

pub const FORMAT_VERSION: u32 = 1;

const VERSION_LINE: &str = "# format_version=1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Fl1d,
    Flgraph,
    Sfl,
    Tf,
    Custom,
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fl1d" => ProblemKind::Fl1d,
            "flgraph" => ProblemKind::Flgraph,
            "sfl" => ProblemKind::Sfl,
            "tf" => ProblemKind::Tf,
            "custom" => ProblemKind::Custom,
            _ => return Err(Error::input(format!("unknown problem kind {s:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn parse_error(path: &Path, line: u64, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("{}:{line}: {msg}", path.display()))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn records(path: &Path) -> Result<(Vec<String>, Vec<(u64, Vec<String>)>)> {
    let mut rdr = csv_reader(path)?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_error(path, 1, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e)
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok((header, rows))
}

fn parse_field<T: FromStr>(path: &Path, line: u64, field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| parse_error(path, line, format!("cannot parse {what} from {field:?}")))
}

fn parse_real(path: &Path, line: u64, field: &str) -> Result<f64> {
    let v: f64 = parse_field(path, line, field, "a number")?;
    if !v.is_finite() {
        return Err(parse_error(
            path,
            line,
            format!("non-finite value {field:?}"),
        ));
    }
    Ok(v)
}

fn parse_index(path: &Path, line: u64, field: &str) -> Result<usize> {
    let v: usize = parse_field(path, line, field, "a 1-based index")?;
    if v == 0 {
        return Err(parse_error(path, line, "indices are 1-based; got 0"));
    }
    Ok(v - 1)
}

/// One value per row under a single header column.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let (header, rows) = records(path)?;
    if header.len() != 1 {
        return Err(parse_error(
            path,
            1,
            format!("expected one column, found {}", header.len()),
        ));
    }
    rows.iter()
        .map(|(line, r)| {
            if r.len() != 1 {
                return Err(parse_error(path, *line, "expected one field"));
            }
            parse_real(path, *line, &r[0])
        })
        .collect()
}

/// Dense matrix, one row per line; the header names the columns.
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let (header, rows) = records(path)?;
    let p = header.len();
    let mut data = Vec::with_capacity(rows.len() * p);
    for (line, r) in &rows {
        if r.len() != p {
            return Err(parse_error(
                path,
                *line,
                format!("expected {p} fields, found {}", r.len()),
            ));
        }
        for f in r {
            data.push(parse_real(path, *line, f)?);
        }
    }
    Ok(Matrix::from_row_slice(rows.len(), p, &data))
}

fn require_header(path: &Path, header: &[String], want: &[&str]) -> Result<()> {
    if header.iter().map(String::as_str).ne(want.iter().copied()) {
        return Err(parse_error(
            path,
            1,
            format!(
                "expected header {:?}, found {:?}",
                want.join(","),
                header.join(",")
            ),
        ));
    }
    Ok(())
}

/// Edge list with header `i,j`; returned 0-based.
pub fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let (header, rows) = records(path)?;
    require_header(path, &header, &["i", "j"])?;
    rows.iter()
        .map(|(line, r)| {
            Ok((
                parse_index(path, *line, &r[0])?,
                parse_index(path, *line, &r[1])?,
            ))
        })
        .collect()
}

/// Sparse triplets with header `row,col,value`; returned 0-based.
pub fn read_triplets(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let (header, rows) = records(path)?;
    require_header(path, &header, &["row", "col", "value"])?;
    rows.iter()
        .map(|(line, r)| {
            Ok((
                parse_index(path, *line, &r[0])?,
                parse_index(path, *line, &r[1])?,
                parse_real(path, *line, &r[2])?,
            ))
        })
        .collect()
}

/// A fully specified problem: response, optional design and penalty.
#[derive(Clone, Debug)]
pub struct Problem {
    pub kind: ProblemKind,
    pub y: Vec<f64>,
    pub x: Option<Matrix>,
    pub spec: PenaltySpec,
}

impl Problem {
    /// Builds the penalty for `kind`; `p` comes from `X` when given, else from `y`.
    pub fn new(
        kind: ProblemKind,
        y: Vec<f64>,
        x: Option<Matrix>,
        order: Option<usize>,
        alpha: Option<f64>,
        edges: Option<Vec<(usize, usize)>>,
        triplets: Option<Vec<(usize, usize, f64)>>,
    ) -> Result<Self> {
        let p = x.as_ref().map_or(y.len(), |x| x.cols());
        if let Some(x) = &x {
            if x.rows() != y.len() {
                return Err(Error::dim(format!(
                    "X has {} rows but y has length {}",
                    x.rows(),
                    y.len()
                )));
            }
        }
        let spec = match kind {
            ProblemKind::Fl1d => PenaltySpec::trend_filter(0, p),
            ProblemKind::Tf => PenaltySpec::trend_filter(
                order.ok_or_else(|| Error::input("tf needs an order"))?,
                p,
            ),
            ProblemKind::Flgraph => PenaltySpec::fused(
                p,
                &edges.ok_or_else(|| Error::input("flgraph needs an edge list"))?,
            )?,
            ProblemKind::Sfl => PenaltySpec::sparse_fused(
                p,
                &edges.ok_or_else(|| Error::input("sfl needs an edge list"))?,
                alpha.ok_or_else(|| Error::input("sfl needs alpha"))?,
            )?,
            ProblemKind::Custom => {
                let t = triplets.ok_or_else(|| Error::input("custom needs a penalty matrix"))?;
                let m = t.iter().map(|e| e.0 + 1).max().unwrap_or(0);
                PenaltySpec::custom(m, p, &t)?
            }
        };
        Ok(Problem { kind, y, x, spec })
    }

    pub fn solve(
        &self,
        backend: Backend,
        route: Route,
        opts: &PathOptions,
    ) -> Result<SolutionPath> {
        match &self.x {
            None => solve_path(&self.y, &self.spec, backend, opts),
            Some(x) => solve_path_with_design(&self.y, x.clone(), &self.spec, route, opts),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ProblemManifest {
    format_version: u32,
    format: OutputFormat,
    problem: ProblemKind,
    p: usize,
    m: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    alpha: Option<f64>,
    /// 1-based.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    edges: Option<Vec<(usize, usize)>>,
    /// 1-based `(row, col, value)`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    triplets: Option<Vec<(usize, usize, f64)>>,
    y: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    x: Option<Vec<Vec<f64>>>,
    termination: Termination,
    knots: usize,
    segments: usize,
}

fn real(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn json_real(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn sign_str(s: f64) -> &'static str {
    if s > 0.0 {
        "+1"
    } else {
        "-1"
    }
}

fn knot_fields(k: &PathKnot) -> (&'static str, Option<usize>, Option<f64>) {
    match k.event {
        Event::Start => ("start", None, None),
        Event::Hit { coordinate, sign } => ("hit", Some(coordinate + 1), Some(sign)),
        Event::Leave { coordinate } => ("leave", Some(coordinate + 1), None),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Input(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| io_err(path, e))
}

/// Knots as CSV: `step,lambda,event,coordinate,sign,df`.
pub fn knots_csv(knots: &[PathKnot]) -> String {
    let mut s = format!("{VERSION_LINE}\nstep,lambda,event,coordinate,sign,df\n");
    for (step, k) in knots.iter().enumerate() {
        let (ev, coord, sign) = knot_fields(k);
        let _ = writeln!(
            s,
            "{},{},{ev},{},{},{}",
            step + 1,
            real(k.lambda),
            coord.map_or(String::new(), |c| c.to_string()),
            sign.map_or("", sign_str),
            k.df
        );
    }
    s
}

fn knots_json(knots: &[PathKnot]) -> Value {
    let rows: Vec<Value> = knots
        .iter()
        .enumerate()
        .map(|(step, k)| {
            let (ev, coord, sign) = knot_fields(k);
            json!({
                "step": step + 1,
                "lambda": json_real(k.lambda),
                "event": ev,
                "coordinate": coord,
                "sign": sign.map(|s| if s > 0.0 { 1 } else { -1 }),
                "df": k.df,
            })
        })
        .collect();
    json!({ "format_version": FORMAT_VERSION, "rows": rows })
}

fn segment_duals(seg: &DualSegment, m: usize) -> Vec<(usize, i8, Option<(f64, f64)>)> {
    let mut out = Vec::with_capacity(m);
    let mut interior = 0;
    for row in 0..m {
        match seg.boundary.indices.binary_search(&row) {
            Ok(pos) => out.push((
                row,
                if seg.boundary.signs[pos] > 0.0 { 1 } else { -1 },
                None,
            )),
            Err(_) => {
                out.push((row, 0, Some((seg.a[interior], seg.b[interior]))));
                interior += 1;
            }
        }
    }
    out
}

/// Writes `problem.json`, `knots.*`, `segments.*` and `duals.*` into `dir`.
pub fn write_path(
    dir: &Path,
    problem: &Problem,
    path: &SolutionPath,
    format: OutputFormat,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let m = path.num_dual();
    let manifest = ProblemManifest {
        format_version: FORMAT_VERSION,
        format,
        problem: problem.kind,
        p: problem.spec.p(),
        m,
        order: match problem.spec {
            PenaltySpec::TrendFilter { order, .. } if problem.kind == ProblemKind::Tf => {
                Some(order)
            }
            _ => None,
        },
        alpha: match problem.spec {
            PenaltySpec::SparseFusedGraph { alpha, .. } => Some(alpha),
            _ => None,
        },
        edges: problem
            .spec
            .edges()
            .map(|e| e.iter().map(|&(i, j)| (i + 1, j + 1)).collect()),
        triplets: match &problem.spec {
            PenaltySpec::Custom { triplets, .. } => Some(
                triplets
                    .iter()
                    .map(|&(i, j, v)| (i + 1, j + 1, v))
                    .collect(),
            ),
            _ => None,
        },
        y: problem.y.clone(),
        x: problem
            .x
            .as_ref()
            .map(|x| (0..x.rows()).map(|i| x.row(i).to_vec()).collect()),
        termination: path.termination().clone(),
        knots: path.knots().len(),
        segments: path.segments().len(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Input(e.to_string()))?;
    write_file(&dir.join("problem.json"), &(text + "\n"))?;

    match format {
        OutputFormat::Csv => {
            write_file(&dir.join("knots.csv"), &knots_csv(path.knots()))?;
            let mut segs =
                format!("{VERSION_LINE}\nsegment,lambda_hi,lambda_lo,df,boundary_size\n");
            let mut duals = format!("{VERSION_LINE}\nsegment,row,sign,a,b\n");
            for (si, seg) in path.segments().iter().enumerate() {
                let _ = writeln!(
                    segs,
                    "{},{},{},{},{}",
                    si + 1,
                    real(seg.lambda_hi),
                    real(seg.lambda_lo),
                    seg.df,
                    seg.boundary.len()
                );
                for (row, sign, ab) in segment_duals(seg, m) {
                    let (a, b) =
                        ab.map_or((String::new(), String::new()), |(a, b)| (real(a), real(b)));
                    let _ = writeln!(duals, "{},{},{sign},{a},{b}", si + 1, row + 1);
                }
            }
            write_file(&dir.join("segments.csv"), &segs)?;
            write_file(&dir.join("duals.csv"), &duals)?;
        }
        OutputFormat::Json => {
            let segs: Vec<Value> = path
                .segments()
                .iter()
                .enumerate()
                .map(|(si, seg)| {
                    json!({
                        "segment": si + 1,
                        "lambda_hi": json_real(seg.lambda_hi),
                        "lambda_lo": json_real(seg.lambda_lo),
                        "df": seg.df,
                        "boundary_size": seg.boundary.len(),
                    })
                })
                .collect();
            let mut duals = Vec::new();
            for (si, seg) in path.segments().iter().enumerate() {
                for (row, sign, ab) in segment_duals(seg, m) {
                    duals.push(json!({
                        "segment": si + 1,
                        "row": row + 1,
                        "sign": sign,
                        "a": ab.map(|x| x.0),
                        "b": ab.map(|x| x.1),
                    }));
                }
            }
            for (name, v) in [
                ("knots.json", knots_json(path.knots())),
                (
                    "segments.json",
                    json!({ "format_version": FORMAT_VERSION, "rows": segs }),
                ),
                (
                    "duals.json",
                    json!({ "format_version": FORMAT_VERSION, "rows": duals }),
                ),
            ] {
                let text =
                    serde_json::to_string_pretty(&v).map_err(|e| Error::Input(e.to_string()))?;
                write_file(&dir.join(name), &(text + "\n"))?;
            }
        }
    }
    Ok(())
}

/// Table rows as strings keyed by column, from either format.
struct Table {
    path: PathBuf,
    columns: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    fn col(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| parse_error(&self.path, 1, format!("missing column {name:?}")))
    }
}

fn read_table(dir: &Path, stem: &str, format: OutputFormat, columns: &[&str]) -> Result<Table> {
    match format {
        OutputFormat::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            if text.lines().next() != Some(VERSION_LINE) {
                return Err(parse_error(&path, 1, format!("expected {VERSION_LINE:?}")));
            }
            let (header, rows) = records(&path)?;
            Ok(Table {
                path,
                columns: header,
                rows,
            })
        }
        OutputFormat::Json => {
            let path = dir.join(format!("{stem}.json"));
            let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let v: Value =
                serde_json::from_str(&text).map_err(|e| parse_error(&path, e.line() as u64, e))?;
            if v["format_version"] != json!(FORMAT_VERSION) {
                return Err(parse_error(&path, 1, "unsupported format_version"));
            }
            let rows = v["rows"]
                .as_array()
                .ok_or_else(|| parse_error(&path, 1, "missing rows"))?
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let vals = columns
                        .iter()
                        .map(|c| match &r[*c] {
                            Value::Null => {
                                if *c == "lambda_hi" {
                                    "inf".to_string()
                                } else {
                                    String::new()
                                }
                            }
                            Value::String(s) => s.clone(),
                            // Round-trip exact: serde_json prints the shortest representation.
                            Value::Number(n) => n.to_string(),
                            other => other.to_string(),
                        })
                        .collect();
                    (i as u64 + 1, vals)
                })
                .collect();
            Ok(Table {
                path,
                columns: columns.iter().map(|c| c.to_string()).collect(),
                rows,
            })
        }
    }
}

fn parse_lambda(path: &Path, line: u64, field: &str) -> Result<f64> {
    let v: f64 = parse_field(path, line, field, "lambda")?;
    if v.is_nan() || v < 0.0 {
        return Err(parse_error(path, line, format!("invalid lambda {field:?}")));
    }
    Ok(v)
}

/// Loads a path artifact written by [`write_path`] without re-solving.
pub fn read_path(dir: &Path) -> Result<(Problem, SolutionPath)> {
    let mpath = dir.join("problem.json");
    let text = fs::read_to_string(&mpath).map_err(|e| io_err(&mpath, e))?;
    let man: ProblemManifest =
        serde_json::from_str(&text).map_err(|e| parse_error(&mpath, e.line() as u64, e))?;
    if man.format_version != FORMAT_VERSION {
        return Err(parse_error(&mpath, 1, "unsupported format_version"));
    }
    let x = match &man.x {
        Some(rows) => {
            let p = rows.first().map_or(man.p, Vec::len);
            Some(Matrix::from_rows(rows, p))
        }
        None => None,
    };
    let to0 = |v: usize| {
        v.checked_sub(1)
            .ok_or_else(|| parse_error(&mpath, 1, "indices are 1-based"))
    };
    let edges = match &man.edges {
        Some(e) => Some(
            e.iter()
                .map(|&(i, j)| Ok((to0(i)?, to0(j)?)))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let triplets = match &man.triplets {
        Some(t) => Some(
            t.iter()
                .map(|&(i, j, v)| Ok((to0(i)?, to0(j)?, v)))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let mut problem = Problem::new(
        man.problem,
        man.y.clone(),
        x,
        man.order,
        man.alpha,
        edges,
        triplets,
    )?;
    if let PenaltySpec::Custom { m, p, triplets } = &problem.spec {
        // Trailing all-zero rows are not recoverable from the triplets alone.
        if *m != man.m {
            problem.spec = PenaltySpec::custom(man.m, *p, triplets)?;
        }
    }
    let m = problem.spec.m();

    let kt = read_table(
        dir,
        "knots",
        man.format,
        &["step", "lambda", "event", "coordinate", "sign", "df"],
    )?;
    let (cl, ce, cc, cs, cd) = (
        kt.col("lambda")?,
        kt.col("event")?,
        kt.col("coordinate")?,
        kt.col("sign")?,
        kt.col("df")?,
    );
    let mut knots = Vec::with_capacity(kt.rows.len());
    for (line, r) in &kt.rows {
        let coord = || parse_index(&kt.path, *line, &r[cc]);
        let event = match r[ce].as_str() {
            "start" => Event::Start,
            "hit" => Event::Hit {
                coordinate: coord()?,
                sign: parse_field::<f64>(&kt.path, *line, &r[cs], "sign")?.signum(),
            },
            "leave" => Event::Leave {
                coordinate: coord()?,
            },
            other => {
                return Err(parse_error(
                    &kt.path,
                    *line,
                    format!("unknown event {other:?}"),
                ))
            }
        };
        knots.push(PathKnot {
            lambda: parse_lambda(&kt.path, *line, &r[cl])?,
            event,
            df: parse_field(&kt.path, *line, &r[cd], "df")?,
        });
    }

    let st = read_table(
        dir,
        "segments",
        man.format,
        &["segment", "lambda_hi", "lambda_lo", "df", "boundary_size"],
    )?;
    let (ch, clo, cdf) = (st.col("lambda_hi")?, st.col("lambda_lo")?, st.col("df")?);
    let mut segments: Vec<DualSegment> = Vec::with_capacity(st.rows.len());
    for (line, r) in &st.rows {
        segments.push(DualSegment {
            lambda_hi: parse_lambda(&st.path, *line, &r[ch])?,
            lambda_lo: parse_lambda(&st.path, *line, &r[clo])?,
            boundary: BoundaryPartition::empty(),
            a: Vec::new(),
            b: Vec::new(),
            df: parse_field(&st.path, *line, &r[cdf], "df")?,
        });
    }

    let dt = read_table(
        dir,
        "duals",
        man.format,
        &["segment", "row", "sign", "a", "b"],
    )?;
    let (dseg, drow, dsign, da, db) = (
        dt.col("segment")?,
        dt.col("row")?,
        dt.col("sign")?,
        dt.col("a")?,
        dt.col("b")?,
    );
    let mut bnd: Vec<(Vec<usize>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); segments.len()];
    for (line, r) in &dt.rows {
        let si = parse_index(&dt.path, *line, &r[dseg])?;
        let row = parse_index(&dt.path, *line, &r[drow])?;
        if si >= segments.len() || row >= m {
            return Err(parse_error(&dt.path, *line, "segment or row out of range"));
        }
        let sign: i8 = parse_field(&dt.path, *line, &r[dsign], "sign")?;
        let seg = &mut segments[si];
        if sign == 0 {
            seg.a.push(parse_real(&dt.path, *line, &r[da])?);
            seg.b.push(parse_real(&dt.path, *line, &r[db])?);
        } else {
            bnd[si].0.push(row);
            bnd[si].1.push(f64::from(sign.signum()));
        }
    }
    for (seg, (idx, signs)) in segments.iter_mut().zip(bnd) {
        seg.boundary = BoundaryPartition::new(idx, signs)?;
    }

    let design = match &problem.x {
        Some(x) => Some(DesignMatrix::new(x.clone())?),
        None => None,
    };
    let run = PathRun {
        knots,
        segments,
        termination: man.termination,
    };
    let path = SolutionPath::from_parts(problem.y.clone(), problem.spec.matrix(), design, run)?;
    Ok((problem, path))
}

/// `index,beta` with 1-based indices.
pub fn coefficients_csv(beta: &[f64]) -> String {
    let mut s = format!("{VERSION_LINE}\nindex,beta\n");
    for (i, b) in beta.iter().enumerate() {
        let _ = writeln!(s, "{},{}", i + 1, real(*b));
    }
    s
}

pub fn coefficients_json(beta: &[f64]) -> String {
    let rows: Vec<Value> = beta
        .iter()
        .enumerate()
        .map(|(i, b)| json!({ "index": i + 1, "beta": b }))
        .collect();
    serde_json::to_string_pretty(&json!({ "format_version": FORMAT_VERSION, "rows": rows }))
        .unwrap()
        + "\n"
}
