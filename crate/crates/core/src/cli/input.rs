use std::str::FromStr;

use super::{GraphArgs, TreeKind};
use crate::error::{Error, Result};
use crate::graph::generate::{self, Weighting};
use crate::graph::mtx;
use crate::graph::WeightedGraph;
use crate::tree::{hair_comb, low_stretch, max_weight, SpanningTree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphSpec {
    Grid {
        rows: usize,
        cols: usize,
        random: bool,
    },
    Random {
        n: usize,
        degree: f64,
    },
    Geometric {
        n: usize,
        k: usize,
    },
    Tree {
        n: usize,
    },
    Path {
        n: usize,
    },
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unrecognized graph spec {s:?}"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let int = |x: &str| x.parse::<usize>().map_err(|_| bad());
        match kind {
            "grid" | "grid-random" => {
                let (r, c) = rest.split_once('x').ok_or_else(bad)?;
                Ok(GraphSpec::Grid {
                    rows: int(r)?,
                    cols: int(c)?,
                    random: kind == "grid-random",
                })
            }
            "random" => {
                let (n, d) = rest.split_once(':').ok_or_else(bad)?;
                Ok(GraphSpec::Random {
                    n: int(n)?,
                    degree: d.parse().map_err(|_| bad())?,
                })
            }
            "geometric" => {
                let (n, k) = rest.split_once(':').ok_or_else(bad)?;
                Ok(GraphSpec::Geometric {
                    n: int(n)?,
                    k: int(k)?,
                })
            }
            "tree" => Ok(GraphSpec::Tree { n: int(rest)? }),
            "path" => Ok(GraphSpec::Path { n: int(rest)? }),
            _ => Err(bad()),
        }
    }
}

impl GraphSpec {
    pub fn build(self, seed: u64) -> Result<WeightedGraph> {
        match self {
            GraphSpec::Grid { rows, cols, random } => {
                let w = if random {
                    Weighting::UniformRandom(seed)
                } else {
                    Weighting::Unit
                };
                generate::grid(rows, cols, w)
            }
            GraphSpec::Random { n, degree } => generate::random_connected(n, degree, seed),
            GraphSpec::Geometric { n, k } => generate::random_geometric(n, k, seed),
            GraphSpec::Tree { n } => generate::random_tree(n, seed),
            GraphSpec::Path { n } => generate::path(n, 1.0),
        }
    }
}

pub struct LoadedGraph {
    pub graph: WeightedGraph,
    pub spec: Option<GraphSpec>,
    /// Positive off-diagonal entries dropped while reading Matrix Market.
    pub dropped_positive: usize,
}

pub fn load_graph(args: &GraphArgs) -> Result<LoadedGraph> {
    match (&args.input, &args.generate) {
        (Some(path), None) => {
            let import = mtx::read_matrix_market(path)?;
            Ok(LoadedGraph {
                graph: import.graph,
                spec: None,
                dropped_positive: import.dropped_positive,
            })
        }
        (None, Some(text)) => {
            let spec: GraphSpec = text.parse()?;
            Ok(LoadedGraph {
                graph: spec.build(args.seed)?,
                spec: Some(spec),
                dropped_positive: 0,
            })
        }
        _ => Err(Error::InvalidArgument(
            "give exactly one of --input and --generate".into(),
        )),
    }
}

pub fn build_tree(loaded: &LoadedGraph, kind: TreeKind, seed: u64) -> Result<SpanningTree> {
    let g = &loaded.graph;
    match kind {
        TreeKind::MaxWeight => max_weight(g),
        TreeKind::LowStretch => low_stretch(g, seed),
        TreeKind::HairComb => match loaded.spec {
            Some(GraphSpec::Grid { rows, cols, .. }) => hair_comb(g, rows, cols),
            _ => Err(Error::InvalidArgument(
                "the hair-comb tree needs a generated grid".into(),
            )),
        },
    }
}
