//! The JSON instance format: algebras, elements, sequences and maps by name.
//!
//! Complex numbers are `[re, im]` pairs; matrices are lists of rows. Files
//! are written with sorted keys and shortest-roundtrip floats, so
//! `write(read(f)) == f` for any file this module wrote.

use std::collections::BTreeMap;
use std::fmt;

use nclp_core::maps::Provenance;
use nclp_core::{
    is_positive, Algebra, AlgebraDescriptor, Block, Element, ElementSequence, LinearMap, Mat, ToleranceConfig, C64,
};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = "nclp-instance/1";

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub dim: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub algebra: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub positive: bool,
    pub blocks: Vec<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub algebra: String,
    /// Each item is given by its blocks.
    pub items: Vec<Vec<Matrix>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvenanceSpec {
    #[serde(default)]
    pub positive: bool,
    #[serde(default)]
    pub two_positive: bool,
    #[serde(default)]
    pub completely_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub domain: String,
    pub codomain: String,
    pub p: f64,
    /// Rows indexed by codomain coordinates, columns by domain coordinates;
    /// coordinates run block by block, row-major inside a block.
    pub action: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceSpec>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebraic_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub algebras: BTreeMap<String, Vec<BlockSpec>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub elements: BTreeMap<String, ElementSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sequences: BTreeMap<String, SequenceSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub maps: BTreeMap<String, MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A malformed or inconsistent instance; `path` locates the offending value.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub path: String,
    pub message: String,
}

impl InputError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for InputError {}

/// A validated instance with every object built.
#[derive(Debug, Clone)]
pub struct Instance {
    pub algebras: BTreeMap<String, Algebra>,
    pub elements: BTreeMap<String, Element>,
    pub sequences: BTreeMap<String, ElementSequence>,
    pub maps: BTreeMap<String, LinearMap>,
    pub tolerances: ToleranceSpec,
    pub seed: Option<u64>,
}

impl Default for InstanceFile {
    fn default() -> Self {
        Self {
            version: VERSION.to_string(),
            algebras: BTreeMap::new(),
            elements: BTreeMap::new(),
            sequences: BTreeMap::new(),
            maps: BTreeMap::new(),
            tolerances: None,
            seed: None,
        }
    }
}

impl InstanceFile {
    /// Parses JSON text; schema violations report the JSON path.
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            InputError::new(path, e.into_inner().to_string())
        })?;
        if file.version != VERSION {
            return Err(InputError::new("version", format!("unsupported version {:?}, expected {VERSION:?}", file.version)));
        }
        Ok(file)
    }

    /// Canonical text: pretty JSON with a trailing newline.
    pub fn to_canonical(&self) -> String {
        // through Value so keys come out sorted, like every other output
        let v = serde_json::to_value(self).expect("instance files serialize");
        let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
        s.push('\n');
        s
    }

    /// Applies [`ToleranceSpec`] overrides and the file seed to `base`.
    pub fn config(&self, base: ToleranceConfig) -> ToleranceConfig {
        apply_tolerances(base, &self.tolerances.unwrap_or_default(), self.seed)
    }

    /// Builds and validates every object.
    pub fn build(&self) -> Result<Instance, InputError> {
        let mut algebras = BTreeMap::new();
        for (name, blocks) in &self.algebras {
            let path = format!("algebras.{name}");
            if blocks.is_empty() {
                return Err(InputError::new(path, "an algebra needs at least one block"));
            }
            for (k, b) in blocks.iter().enumerate() {
                if b.dim == 0 {
                    return Err(InputError::new(format!("{path}[{k}].dim"), format!("block {k} has dimension 0")));
                }
                if !(b.weight.is_finite() && b.weight > 0.0) {
                    return Err(InputError::new(
                        format!("{path}[{k}].weight"),
                        format!("block {k} has weight {}; trace weights must be finite and > 0", b.weight),
                    ));
                }
            }
            let alg = AlgebraDescriptor::new(blocks.iter().map(|b| Block::new(b.dim, b.weight)).collect())
                .map_err(|e| InputError::new(path.clone(), e.to_string()))?;
            algebras.insert(name.clone(), alg);
        }
        let lookup = |path: &str, name: &str| -> Result<Algebra, InputError> {
            algebras
                .get(name)
                .cloned()
                .ok_or_else(|| InputError::new(path.to_string(), format!("unknown algebra {name:?}")))
        };
        let mut elements = BTreeMap::new();
        for (name, spec) in &self.elements {
            let path = format!("elements.{name}");
            let alg = lookup(&format!("{path}.algebra"), &spec.algebra)?;
            let x = element_from_blocks(&alg, &spec.blocks, &format!("{path}.blocks"))?;
            if spec.positive && !is_positive(&x, 1e-9) {
                return Err(InputError::new(path, "element declared positive is not a positive (Hermitian, PSD) matrix"));
            }
            elements.insert(name.clone(), x);
        }
        let mut sequences = BTreeMap::new();
        for (name, spec) in &self.sequences {
            let path = format!("sequences.{name}");
            let alg = lookup(&format!("{path}.algebra"), &spec.algebra)?;
            if spec.items.is_empty() {
                return Err(InputError::new(format!("{path}.items"), "a sequence needs at least one item"));
            }
            let items = spec
                .items
                .iter()
                .enumerate()
                .map(|(n, blocks)| element_from_blocks(&alg, blocks, &format!("{path}.items[{n}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let seq = ElementSequence::new(items).map_err(|e| InputError::new(path.clone(), e.to_string()))?;
            sequences.insert(name.clone(), seq);
        }
        let mut maps = BTreeMap::new();
        for (name, spec) in &self.maps {
            let path = format!("maps.{name}");
            let dom = lookup(&format!("{path}.domain"), &spec.domain)?;
            let cod = lookup(&format!("{path}.codomain"), &spec.codomain)?;
            if !(spec.p >= 1.0) {
                return Err(InputError::new(format!("{path}.p"), format!("exponent {} outside [1, ∞]", spec.p)));
            }
            let action = matrix(&spec.action, cod.space_dim(), dom.space_dim(), &format!("{path}.action"))?;
            let mut map = LinearMap::new(&dom, &cod, action, spec.p).map_err(|e| InputError::new(path.clone(), e.to_string()))?;
            if let Some(pv) = spec.provenance {
                map = map.with_provenance(Provenance {
                    positive: pv.positive || pv.two_positive || pv.completely_positive,
                    two_positive: pv.two_positive || pv.completely_positive,
                    completely_positive: pv.completely_positive,
                });
            }
            maps.insert(name.clone(), map);
        }
        let tolerances = self.tolerances.unwrap_or_default();
        let cfg = apply_tolerances(ToleranceConfig::default(), &tolerances, self.seed);
        cfg.validate().map_err(|e| InputError::new("tolerances", e.to_string()))?;
        Ok(Instance { algebras, elements, sequences, maps, tolerances, seed: self.seed })
    }

    /// Registers `alg` (reusing an equal descriptor already present) and
    /// returns its name.
    pub fn add_algebra(&mut self, alg: &Algebra) -> String {
        let spec: Vec<BlockSpec> = alg.blocks().iter().map(|b| BlockSpec { dim: b.dim, weight: b.weight }).collect();
        if let Some((name, _)) = self.algebras.iter().find(|(_, v)| **v == spec) {
            return name.clone();
        }
        let name = format!("A{}", self.algebras.len());
        self.algebras.insert(name.clone(), spec);
        name
    }

    pub fn add_element(&mut self, name: &str, x: &Element, positive: bool) {
        let algebra = self.add_algebra(x.algebra());
        self.elements.insert(name.to_string(), ElementSpec { algebra, positive, blocks: element_blocks(x) });
    }

    pub fn add_sequence(&mut self, name: &str, seq: &ElementSequence) {
        let algebra = self.add_algebra(seq.algebra());
        let items = seq.items().iter().map(element_blocks).collect();
        self.sequences.insert(name.to_string(), SequenceSpec { algebra, items });
    }

    pub fn add_map(&mut self, name: &str, t: &LinearMap) {
        let domain = self.add_algebra(t.domain());
        let codomain = self.add_algebra(t.codomain());
        let pv = t.provenance();
        let provenance = (pv != Provenance::NONE).then_some(ProvenanceSpec {
            positive: pv.positive,
            two_positive: pv.two_positive,
            completely_positive: pv.completely_positive,
        });
        self.maps.insert(name.to_string(), MapSpec { domain, codomain, p: t.exponent(), action: matrix_json(t.action()), provenance });
    }
}

pub fn apply_tolerances(mut cfg: ToleranceConfig, t: &ToleranceSpec, seed: Option<u64>) -> ToleranceConfig {
    if let Some(v) = t.algebraic_tol {
        cfg.algebraic_tol = v;
    }
    if let Some(v) = t.opt_tol {
        cfg.opt_tol = v;
    }
    if let Some(v) = t.rank_cutoff {
        cfg.rank_cutoff = v;
    }
    if let Some(v) = t.restarts {
        cfg.restarts = v;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg
}

fn matrix(rows: &Matrix, nrows: usize, ncols: usize, path: &str) -> Result<Mat, InputError> {
    if rows.len() != nrows {
        return Err(InputError::new(path, format!("expected {nrows} rows, found {}", rows.len())));
    }
    let mut m = Mat::zeros(nrows, ncols);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(InputError::new(format!("{path}[{r}]"), format!("expected {ncols} entries, found {}", row.len())));
        }
        for (c, z) in row.iter().enumerate() {
            if !(z[0].is_finite() && z[1].is_finite()) {
                return Err(InputError::new(format!("{path}[{r}][{c}]"), "entries must be finite"));
            }
            m[(r, c)] = C64::new(z[0], z[1]);
        }
    }
    Ok(m)
}

fn element_from_blocks(alg: &Algebra, blocks: &[Matrix], path: &str) -> Result<Element, InputError> {
    if blocks.len() != alg.block_count() {
        return Err(InputError::new(
            path,
            format!("expected {} blocks, found {}", alg.block_count(), blocks.len()),
        ));
    }
    let mats = blocks
        .iter()
        .zip(alg.blocks())
        .enumerate()
        .map(|(k, (rows, b))| {
            matrix(rows, b.dim, b.dim, &format!("{path}[{k}]")).map_err(|mut e| {
                e.message = format!("block {k}: {}", e.message);
                e
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Element::from_blocks(alg, mats).map_err(|e| InputError::new(path, e.to_string()))
}

/// `[re, im]` rows of a complex matrix.
pub fn matrix_json(m: &Mat) -> Matrix {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

pub fn element_blocks(x: &Element) -> Vec<Matrix> {
    x.blocks().iter().map(matrix_json).collect()
}
