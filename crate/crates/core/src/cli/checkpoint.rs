//! `ratnet-v1`: a line-oriented text format. Every number is written with 17
//! significant digits, so reading back reproduces each `f64` exactly.
//!
//! ```text
//! ratnet-v1
//! kind dense
//! dims 2 8 1
//! pole_bound 1.0000000000000000e1
//! layer 0
//! weights <16 numbers, row-major>
//! biases <8 numbers>
//! activation rational <7 numbers>
//! layer 1
//! ...
//! ```
//!
//! Graph networks store sparse rows instead (`row <bias> <count> <col> <w> ...`)
//! and one `node` line per activation.

use std::fmt::Write as _;
use std::path::Path;

use crate::constructive::{Affine, Layer, NodeActivation, RationalNetwork};
use crate::error::{Error, Result};
use crate::nn::{ActivationKind, ActivationSpec, DenseRationalNet};
use crate::ratfun::{Interval, RationalFunction};

pub const MAGIC: &str = "ratnet-v1";

/// Either network family.
#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Dense(DenseRationalNet),
    Graph(RationalNetwork),
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" ")
}

pub fn write_dense(net: &DenseRationalNet) -> String {
    let mut out = format!("{MAGIC}\nkind dense\n");
    let dims: Vec<String> = net.dims().iter().map(usize::to_string).collect();
    let _ = writeln!(out, "dims {}", dims.join(" "));
    let _ = writeln!(out, "pole_bound {}", num(net.pole_bound()));
    for (l, (w, b)) in net.weights().iter().zip(net.biases()).enumerate() {
        let _ = writeln!(out, "layer {l}");
        let _ = writeln!(out, "weights {}", join(w));
        let _ = writeln!(out, "biases {}", join(b));
        if let Some(act) = net.activations().get(l) {
            let coeffs = if act.params().is_empty() { String::new() } else { format!(" {}", join(act.params())) };
            let _ = writeln!(out, "activation {}{coeffs}", act.kind());
        }
    }
    out
}

fn write_rows(out: &mut String, affine: &Affine) {
    for (row, b) in affine.rows().iter().zip(affine.bias()) {
        let _ = write!(out, "row {} {}", num(*b), row.len());
        for (j, w) in row {
            let _ = write!(out, " {j} {}", num(*w));
        }
        out.push('\n');
    }
}

pub fn write_graph(net: &RationalNetwork) -> String {
    let mut out = format!("{MAGIC}\nkind graph\n");
    let _ = writeln!(out, "input_dim {}", net.input_dim());
    let interval = net.working_interval();
    let _ = writeln!(out, "interval {} {}", num(interval.lo()), num(interval.hi()));
    let _ = writeln!(out, "layers {}", net.depth());
    for (l, layer) in net.layers().iter().enumerate() {
        let _ = writeln!(out, "layer {l} {} {}", layer.affine.in_dim(), layer.affine.out_dim());
        write_rows(&mut out, &layer.affine);
        for act in &layer.activations {
            let _ = match act {
                NodeActivation::Identity => writeln!(out, "node identity"),
                NodeActivation::Relu => writeln!(out, "node relu"),
                NodeActivation::Power(c) => writeln!(out, "node power {c}"),
                NodeActivation::Rational(r) => {
                    writeln!(
                        out,
                        "node rational {} {} {} {}",
                        r.numer().len(),
                        r.denom().len(),
                        join(r.numer()),
                        join(r.denom())
                    )
                }
            };
        }
    }
    let readout = net.readout();
    let _ = writeln!(out, "readout {} {}", readout.in_dim(), readout.out_dim());
    write_rows(&mut out, readout);
    out
}

pub fn write(checkpoint: &Checkpoint) -> String {
    match checkpoint {
        Checkpoint::Dense(net) => write_dense(net),
        Checkpoint::Graph(net) => write_graph(net),
    }
}

/// Line cursor that reports 1-based line numbers.
struct Lines<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { lines: text.lines().enumerate(), line: 0 }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line, message: message.into() }
    }

    /// Next nonblank line, split into tokens, with `keyword` checked.
    fn expect(&mut self, keyword: &str) -> Result<Vec<&'a str>> {
        loop {
            let Some((i, text)) = self.lines.next() else {
                return Err(Error::Parse {
                    line: self.line + 1,
                    message: format!("expected {keyword:?}, found end of file"),
                });
            };
            self.line = i + 1;
            let mut tokens = text.split_whitespace();
            match tokens.next() {
                None => continue,
                Some(found) if found == keyword => return Ok(tokens.collect()),
                Some(found) => return Err(self.err(format!("expected {keyword:?}, found {found:?}"))),
            }
        }
    }

    fn parse<T: std::str::FromStr>(&self, token: Option<&&str>) -> Result<T> {
        let token = token.ok_or_else(|| self.err("missing value"))?;
        token.parse().map_err(|_| self.err(format!("bad value {token:?}")))
    }

    fn floats(&self, tokens: &[&str]) -> Result<Vec<f64>> {
        tokens.iter().map(|t| self.parse(Some(t))).collect()
    }

    fn rows(&mut self, in_dim: usize, out_dim: usize) -> Result<Affine> {
        let mut rows = Vec::with_capacity(out_dim);
        let mut bias = Vec::with_capacity(out_dim);
        for _ in 0..out_dim {
            let tokens = self.expect("row")?;
            bias.push(self.parse(tokens.first())?);
            let count: usize = self.parse(tokens.get(1))?;
            if tokens.len() != 2 + 2 * count {
                return Err(self.err(format!("row declares {count} entries but has {} tokens", tokens.len() - 2)));
            }
            let mut row = Vec::with_capacity(count);
            for pair in tokens[2..].chunks(2) {
                row.push((self.parse(pair.first())?, self.parse(pair.get(1))?));
            }
            rows.push(row);
        }
        Affine::new(in_dim, rows, bias).map_err(|e| self.err(e.to_string()))
    }
}

pub fn read(text: &str) -> Result<Checkpoint> {
    let mut lines = Lines::new(text);
    lines.expect(MAGIC)?;
    let kind = lines.expect("kind")?;
    match kind.first().copied() {
        Some("dense") => read_dense(&mut lines).map(Checkpoint::Dense),
        Some("graph") => read_graph(&mut lines).map(Checkpoint::Graph),
        other => Err(lines.err(format!("unknown network kind {other:?}"))),
    }
}

fn read_dense(lines: &mut Lines) -> Result<DenseRationalNet> {
    let dims_tokens = lines.expect("dims")?;
    let dims: Vec<usize> = dims_tokens.iter().map(|t| lines.parse(Some(t))).collect::<Result<_>>()?;
    if dims.len() < 2 {
        return Err(lines.err("need at least two widths"));
    }
    let bound_tokens = lines.expect("pole_bound")?;
    let pole_bound = lines.parse(bound_tokens.first())?;
    let (mut weights, mut biases, mut activations) = (Vec::new(), Vec::new(), Vec::new());
    for l in 0..dims.len() - 1 {
        let header = lines.expect("layer")?;
        let index: usize = lines.parse(header.first())?;
        if index != l {
            return Err(lines.err(format!("expected layer {l}, found {index}")));
        }
        let w = lines.expect("weights")?;
        weights.push(lines.floats(&w)?);
        let b = lines.expect("biases")?;
        biases.push(lines.floats(&b)?);
        if l + 2 < dims.len() {
            let tokens = lines.expect("activation")?;
            let kind: ActivationKind = tokens
                .first()
                .ok_or_else(|| lines.err("missing activation kind"))?
                .parse()
                .map_err(|e: Error| lines.err(e.to_string()))?;
            let params = lines.floats(&tokens[1..])?;
            activations.push(ActivationSpec::new(kind, params).map_err(|e| lines.err(e.to_string()))?);
        }
    }
    DenseRationalNet::from_parts(dims, weights, biases, activations, pole_bound)
}

fn read_graph(lines: &mut Lines) -> Result<RationalNetwork> {
    let header = lines.expect("input_dim")?;
    let input_dim: usize = lines.parse(header.first())?;
    let bounds = lines.expect("interval")?;
    let interval = Interval::new(lines.parse(bounds.first())?, lines.parse(bounds.get(1))?)
        .map_err(|e| lines.err(e.to_string()))?;
    let header = lines.expect("layers")?;
    let depth: usize = lines.parse(header.first())?;
    let mut layers = Vec::with_capacity(depth);
    for l in 0..depth {
        let header = lines.expect("layer")?;
        let index: usize = lines.parse(header.first())?;
        if index != l {
            return Err(lines.err(format!("expected layer {l}, found {index}")));
        }
        let (in_dim, out_dim) = (lines.parse(header.get(1))?, lines.parse(header.get(2))?);
        let affine = lines.rows(in_dim, out_dim)?;
        let mut activations = Vec::with_capacity(out_dim);
        for _ in 0..out_dim {
            let tokens = lines.expect("node")?;
            activations.push(match tokens.first().copied() {
                Some("identity") => NodeActivation::Identity,
                Some("relu") => NodeActivation::Relu,
                Some("power") => NodeActivation::Power(lines.parse(tokens.get(1))?),
                Some("rational") => {
                    let np: usize = lines.parse(tokens.get(1))?;
                    let nq: usize = lines.parse(tokens.get(2))?;
                    if tokens.len() != 3 + np + nq {
                        return Err(lines.err("rational coefficient count mismatch"));
                    }
                    let numer = lines.floats(&tokens[3..3 + np])?;
                    let denom = lines.floats(&tokens[3 + np..])?;
                    NodeActivation::Rational(RationalFunction::new(numer, denom).map_err(|e| lines.err(e.to_string()))?)
                }
                other => return Err(lines.err(format!("unknown node activation {other:?}"))),
            });
        }
        layers.push(Layer { affine, activations });
    }
    let header = lines.expect("readout")?;
    let (in_dim, out_dim) = (lines.parse(header.first())?, lines.parse(header.get(1))?);
    let readout = lines.rows(in_dim, out_dim)?;
    RationalNetwork::new(input_dim, layers, readout, interval)
}

/// Writes `contents` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path.file_name().ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, contents).map_err(|e| Error::Io(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::Io(format!("{}: {e}", path.display()))
    })
}

pub fn save(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    write_atomic(path, &write(checkpoint))
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructive::{monomial_network, relu_approx_network};

    #[test]
    fn dense_round_trip_is_exact() {
        for kind in ActivationKind::ALL {
            let net = DenseRationalNet::new(&[2, 5, 4, 1], kind, 12).unwrap();
            let back = read(&write_dense(&net)).unwrap();
            assert_eq!(back, Checkpoint::Dense(net));
        }
    }

    #[test]
    fn graph_round_trip_is_exact() {
        for net in [relu_approx_network(0.1).unwrap(), monomial_network(11, 3).unwrap()] {
            assert_eq!(read(&write_graph(&net)).unwrap(), Checkpoint::Graph(net));
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = write_dense(&DenseRationalNet::new(&[1, 2, 1], ActivationKind::Rational, 0).unwrap());
        let broken = text.replacen("biases", "bias", 1);
        assert!(matches!(read(&broken), Err(Error::Parse { line: 7, .. })));
        assert!(matches!(read("ratnet-v0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read("ratnet-v1\nkind dense\n"), Err(Error::Parse { line: 3, .. })));
    }
}
