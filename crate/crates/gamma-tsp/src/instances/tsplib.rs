//! TSPLIB .tsp reading and writing with the library's canonical rounded
//! distance functions, so parsed weights are bit-identical across runs.

use thiserror::Error;

use crate::graph::MetricGraph;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("missing DIMENSION")]
    MissingDimension,
    #[error("line {line}: unsupported EDGE_WEIGHT_TYPE {value}")]
    UnsupportedWeightType { line: usize, value: String },
    #[error("line {line}: unsupported EDGE_WEIGHT_FORMAT {value}")]
    UnsupportedWeightFormat { line: usize, value: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("NODE_COORD_SECTION at line {line}: expected {expected} coordinates, found {found}")]
    CoordCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("EDGE_WEIGHT_SECTION at line {line}: expected {expected} entries, found {found}")]
    WeightCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("instance has no coordinate or weight data")]
    NoData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExplicitFormat {
    FullMatrix,
    UpperRow,
    LowerRow,
    UpperDiagRow,
    LowerDiagRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeWeightType {
    Euc2d,
    Ceil2d,
    Geo,
    Att,
    Explicit(ExplicitFormat),
}

/// A parsed .tsp file. Coordinates are kept verbatim so writing them back
/// is loss-free.
#[derive(Debug, Clone)]
pub struct TspLibInstance {
    pub name: String,
    pub comment: String,
    pub dimension: usize,
    pub edge_weight_type: EdgeWeightType,
    pub coords: Option<Vec<(f64, f64)>>,
    /// Full row-major matrix, symmetric-completed at parse time.
    pub matrix: Option<Vec<f64>>,
    /// Unknown keywords encountered, reported but not fatal.
    pub warnings: Vec<String>,
}

pub fn parse_tsplib(text: &str) -> Result<TspLibInstance, ParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut name = String::new();
    let mut comment = String::new();
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<(usize, String)> = None;
    let mut weight_format: Option<(usize, String)> = None;
    let mut coords: Option<Vec<(f64, f64)>> = None;
    let mut raw_weights: Option<(usize, Vec<f64>)> = None;
    let mut warnings = Vec::new();

    let mut i = 0;
    while i < lines.len() {
        let line_no = i + 1;
        let line = lines[i].trim();
        i += 1;
        if line.is_empty() {
            continue;
        }
        if let Some(colon) = line.find(':') {
            let key = line[..colon].trim().to_uppercase();
            let value = line[colon + 1..].trim().to_string();
            match key.as_str() {
                "NAME" => name = value,
                "COMMENT" => {
                    if !comment.is_empty() {
                        comment.push('\n');
                    }
                    comment.push_str(&value);
                }
                "TYPE" => {
                    if value != "TSP" {
                        warnings.push(format!("line {line_no}: TYPE {value} treated as TSP"));
                    }
                }
                "DIMENSION" => {
                    dimension = Some(value.parse().map_err(|_| ParseError::Malformed {
                        line: line_no,
                        message: format!("bad DIMENSION {value}"),
                    })?);
                }
                "EDGE_WEIGHT_TYPE" => weight_type = Some((line_no, value)),
                "EDGE_WEIGHT_FORMAT" => weight_format = Some((line_no, value)),
                "DISPLAY_DATA_TYPE" | "NODE_COORD_TYPE" => {}
                other => warnings.push(format!("line {line_no}: unknown keyword {other}")),
            }
            continue;
        }
        match line {
            "NODE_COORD_SECTION" => {
                let n = dimension.ok_or(ParseError::MissingDimension)?;
                let mut pts = Vec::with_capacity(n);
                let section_line = line_no;
                while i < lines.len() {
                    let l = lines[i].trim();
                    if l.is_empty()
                        || l == "EOF"
                        || l.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                    {
                        break;
                    }
                    let parts: Vec<&str> = l.split_whitespace().collect();
                    if parts.len() < 3 {
                        return Err(ParseError::Malformed {
                            line: i + 1,
                            message: format!("coordinate line needs id x y, got {l:?}"),
                        });
                    }
                    let x: f64 = parts[1].parse().map_err(|_| ParseError::Malformed {
                        line: i + 1,
                        message: format!("bad x coordinate {:?}", parts[1]),
                    })?;
                    let y: f64 = parts[2].parse().map_err(|_| ParseError::Malformed {
                        line: i + 1,
                        message: format!("bad y coordinate {:?}", parts[2]),
                    })?;
                    pts.push((x, y));
                    i += 1;
                }
                if pts.len() != n {
                    return Err(ParseError::CoordCount {
                        line: section_line,
                        expected: n,
                        found: pts.len(),
                    });
                }
                coords = Some(pts);
            }
            "EDGE_WEIGHT_SECTION" => {
                let section_line = line_no;
                let mut values = Vec::new();
                while i < lines.len() {
                    let l = lines[i].trim();
                    if l.is_empty()
                        || l == "EOF"
                        || l.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                    {
                        break;
                    }
                    for tok in l.split_whitespace() {
                        let v: f64 = tok.parse().map_err(|_| ParseError::Malformed {
                            line: i + 1,
                            message: format!("bad matrix entry {tok:?}"),
                        })?;
                        values.push(v);
                    }
                    i += 1;
                }
                raw_weights = Some((section_line, values));
            }
            "DISPLAY_DATA_SECTION" => {
                // Display coordinates carry no weight information; skip.
                while i < lines.len() {
                    let l = lines[i].trim();
                    if l.is_empty()
                        || l == "EOF"
                        || l.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                    {
                        break;
                    }
                    i += 1;
                }
            }
            "EOF" => break,
            other => warnings.push(format!("line {line_no}: unknown section {other}")),
        }
    }

    let dimension = dimension.ok_or(ParseError::MissingDimension)?;
    let edge_weight_type = match weight_type {
        Some((line, value)) => match value.as_str() {
            "EUC_2D" => EdgeWeightType::Euc2d,
            "CEIL_2D" => EdgeWeightType::Ceil2d,
            "GEO" => EdgeWeightType::Geo,
            "ATT" => EdgeWeightType::Att,
            "EXPLICIT" => {
                let fmt = match weight_format.as_ref().map(|(_, f)| f.as_str()) {
                    Some("FULL_MATRIX") | None => ExplicitFormat::FullMatrix,
                    Some("UPPER_ROW") => ExplicitFormat::UpperRow,
                    Some("LOWER_ROW") => ExplicitFormat::LowerRow,
                    Some("UPPER_DIAG_ROW") => ExplicitFormat::UpperDiagRow,
                    Some("LOWER_DIAG_ROW") => ExplicitFormat::LowerDiagRow,
                    Some(other) => {
                        let (fline, _) = weight_format.as_ref().unwrap();
                        return Err(ParseError::UnsupportedWeightFormat {
                            line: *fline,
                            value: other.to_string(),
                        });
                    }
                };
                EdgeWeightType::Explicit(fmt)
            }
            other => {
                return Err(ParseError::UnsupportedWeightType {
                    line,
                    value: other.to_string(),
                })
            }
        },
        None => {
            return Err(ParseError::UnsupportedWeightType {
                line: 0,
                value: "<missing>".into(),
            })
        }
    };

    let matrix = match edge_weight_type {
        EdgeWeightType::Explicit(fmt) => {
            let (section_line, values) = raw_weights.ok_or(ParseError::NoData)?;
            Some(expand_matrix(dimension, fmt, &values, section_line)?)
        }
        _ => {
            if coords.is_none() {
                return Err(ParseError::NoData);
            }
            None
        }
    };

    Ok(TspLibInstance {
        name,
        comment,
        dimension,
        edge_weight_type,
        coords,
        matrix,
        warnings,
    })
}

fn expand_matrix(
    n: usize,
    fmt: ExplicitFormat,
    values: &[f64],
    section_line: usize,
) -> Result<Vec<f64>, ParseError> {
    let expected = match fmt {
        ExplicitFormat::FullMatrix => n * n,
        ExplicitFormat::UpperRow | ExplicitFormat::LowerRow => n * (n - 1) / 2,
        ExplicitFormat::UpperDiagRow | ExplicitFormat::LowerDiagRow => n * (n + 1) / 2,
    };
    if values.len() != expected {
        return Err(ParseError::WeightCount {
            line: section_line,
            expected,
            found: values.len(),
        });
    }
    let mut m = vec![0.0; n * n];
    let mut it = values.iter().copied();
    let set = |m: &mut Vec<f64>, i: usize, j: usize, w: f64| {
        m[i * n + j] = w;
        m[j * n + i] = w;
    };
    match fmt {
        ExplicitFormat::FullMatrix => {
            for i in 0..n {
                for j in 0..n {
                    let w = it.next().unwrap();
                    if i <= j {
                        set(&mut m, i, j, w);
                    }
                }
            }
        }
        ExplicitFormat::UpperRow => {
            for i in 0..n {
                for j in i + 1..n {
                    set(&mut m, i, j, it.next().unwrap());
                }
            }
        }
        ExplicitFormat::LowerRow => {
            for i in 0..n {
                for j in 0..i {
                    set(&mut m, i, j, it.next().unwrap());
                }
            }
        }
        ExplicitFormat::UpperDiagRow => {
            for i in 0..n {
                for j in i..n {
                    set(&mut m, i, j, it.next().unwrap());
                }
            }
        }
        ExplicitFormat::LowerDiagRow => {
            for i in 0..n {
                for j in 0..=i {
                    set(&mut m, i, j, it.next().unwrap());
                }
            }
        }
    }
    for i in 0..n {
        m[i * n + i] = 0.0;
    }
    Ok(m)
}

fn nint(x: f64) -> f64 {
    (x + 0.5).floor()
}

fn euc_2d(a: (f64, f64), b: (f64, f64)) -> f64 {
    nint(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
}

fn ceil_2d(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt().ceil()
}

fn att(a: (f64, f64), b: (f64, f64)) -> f64 {
    let r = (((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)) / 10.0).sqrt();
    let t = nint(r);
    if t < r {
        t + 1.0
    } else {
        t
    }
}

/// Degrees-and-minutes to radians per the TSPLIB convention: the integer
/// part is degrees, the fraction is minutes.
fn geo_radians(x: f64) -> f64 {
    let deg = x.trunc();
    let min = x - deg;
    std::f64::consts::PI * (deg + 5.0 * min / 3.0) / 180.0
}

fn geo(a: (f64, f64), b: (f64, f64)) -> f64 {
    const RRR: f64 = 6378.388;
    let (lat_a, lon_a) = (geo_radians(a.0), geo_radians(a.1));
    let (lat_b, lon_b) = (geo_radians(b.0), geo_radians(b.1));
    let q1 = (lon_a - lon_b).cos();
    let q2 = (lat_a - lat_b).cos();
    let q3 = (lat_a + lat_b).cos();
    (RRR * (0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)).acos() + 1.0).trunc()
}

/// Materializes the instance as a weight matrix using the canonical
/// rounded distance function for its weight type.
pub fn instance_to_graph(inst: &TspLibInstance) -> Result<MetricGraph, ParseError> {
    let n = inst.dimension;
    match inst.edge_weight_type {
        EdgeWeightType::Explicit(_) => {
            let m = inst.matrix.as_ref().ok_or(ParseError::NoData)?;
            let rows = (0..n).map(|i| m[i * n..(i + 1) * n].to_vec()).collect();
            MetricGraph::from_weights(rows).map_err(|e| ParseError::Malformed {
                line: 0,
                message: e.to_string(),
            })
        }
        other => {
            let pts = inst.coords.as_ref().ok_or(ParseError::NoData)?;
            let dist = match other {
                EdgeWeightType::Euc2d => euc_2d,
                EdgeWeightType::Ceil2d => ceil_2d,
                EdgeWeightType::Geo => geo,
                EdgeWeightType::Att => att,
                EdgeWeightType::Explicit(_) => unreachable!(),
            };
            MetricGraph::from_fn(n, |i, j| dist(pts[i], pts[j])).map_err(|e| {
                ParseError::Malformed {
                    line: 0,
                    message: e.to_string(),
                }
            })
        }
    }
}

/// Renders a graph as a TSPLIB EXPLICIT FULL_MATRIX file that re-parses
/// to an identical weight matrix.
pub fn write_explicit(name: &str, comment: &str, graph: &MetricGraph) -> String {
    let n = graph.vertex_count();
    let mut out = String::new();
    out.push_str(&format!("NAME: {name}\n"));
    out.push_str("TYPE: TSP\n");
    if !comment.is_empty() {
        out.push_str(&format!("COMMENT: {comment}\n"));
    }
    out.push_str(&format!("DIMENSION: {n}\n"));
    out.push_str("EDGE_WEIGHT_TYPE: EXPLICIT\n");
    out.push_str("EDGE_WEIGHT_FORMAT: FULL_MATRIX\n");
    out.push_str("EDGE_WEIGHT_SECTION\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{}", graph.weight(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.push_str("EOF\n");
    out
}
