use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::{Rational, SymMatrix};
use crate::error::{Error, Result};

/// Shape of a declared decision variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Scalar,
    /// Symmetric `n × n`, parameterized by its upper triangle.
    Symmetric {
        n: usize,
    },
    /// General `rows × cols`, one scalar per entry.
    General {
        rows: usize,
        cols: usize,
    },
}

/// A declared (possibly matrix-valued) variable and the scalar ids it owns.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarBlock {
    pub name: String,
    pub kind: VarKind,
    /// Scalar ids in row-major (upper-triangle for symmetric) order.
    pub ids: Vec<usize>,
}

/// One scalar decision variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScalarVar {
    /// `name` for scalars, `name[i,j]` (1-based) for matrix entries.
    pub name: String,
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

/// Identifies a registry by content so that expressions built against equal
/// registries can be combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegistryId(pub u64);

/// Append-only table of decision variables. A scalar's id is its position.
#[derive(Clone, Debug, Default)]
pub struct VarRegistry {
    blocks: Vec<VarBlock>,
    scalars: Vec<ScalarVar>,
    by_name: HashMap<String, usize>,
    block_by_name: HashMap<String, usize>,
}

impl VarRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.scalars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scalars.is_empty()
    }

    pub fn blocks(&self) -> &[VarBlock] {
        &self.blocks
    }

    pub fn scalars(&self) -> &[ScalarVar] {
        &self.scalars
    }

    pub fn id_of(&self, entry: &str) -> Option<usize> {
        self.by_name.get(entry).copied()
    }

    pub fn block(&self, name: &str) -> Option<&VarBlock> {
        self.block_by_name.get(name).map(|&b| &self.blocks[b])
    }

    pub fn id(&self) -> RegistryId {
        let mut h = DefaultHasher::new();
        self.blocks.hash(&mut h);
        RegistryId(h.finish())
    }

    fn push_block(&mut self, name: &str, kind: VarKind, entries: Vec<(String, usize, usize)>) -> Result<Vec<usize>> {
        if name.is_empty() {
            return Err(Error::Invalid("variable name must not be empty".into()));
        }
        if self.block_by_name.contains_key(name) {
            return Err(Error::Invalid(format!("variable `{name}` declared twice")));
        }
        if let Some((dup, _, _)) = entries.iter().find(|(n, _, _)| self.by_name.contains_key(n)) {
            return Err(Error::Invalid(format!("scalar name `{dup}` already in use")));
        }
        let block = self.blocks.len();
        let mut ids = Vec::with_capacity(entries.len());
        for (entry, row, col) in entries {
            let id = self.scalars.len();
            self.by_name.insert(entry.clone(), id);
            self.scalars.push(ScalarVar {
                name: entry,
                block,
                row,
                col,
            });
            ids.push(id);
        }
        self.block_by_name.insert(name.to_string(), block);
        self.blocks.push(VarBlock {
            name: name.to_string(),
            kind,
            ids: ids.clone(),
        });
        Ok(ids)
    }

    pub fn add_scalar(&mut self, name: &str) -> Result<usize> {
        let ids = self.push_block(name, VarKind::Scalar, vec![(name.to_string(), 0, 0)])?;
        Ok(ids[0])
    }

    /// Adds an `n × n` symmetric variable; returns `n(n+1)/2` ids.
    pub fn add_symmetric(&mut self, name: &str, n: usize) -> Result<Vec<usize>> {
        if n == 0 {
            return Err(Error::Invalid(format!("symmetric variable `{name}` has size 0")));
        }
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                entries.push((format!("{name}[{},{}]", i + 1, j + 1), i, j));
            }
        }
        self.push_block(name, VarKind::Symmetric { n }, entries)
    }

    /// Adds a `rows × cols` general variable; returns `rows·cols` ids.
    pub fn add_general(&mut self, name: &str, rows: usize, cols: usize) -> Result<Vec<usize>> {
        if rows == 0 || cols == 0 {
            return Err(Error::Invalid(format!("matrix variable `{name}` has an empty shape")));
        }
        let mut entries = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                entries.push((format!("{name}[{},{}]", i + 1, j + 1), i, j));
            }
        }
        self.push_block(name, VarKind::General { rows, cols }, entries)
    }

    /// For a symmetric variable: each scalar id with its basis matrix
    /// (`E_kk` on the diagonal, `E_kl + E_lk` off it).
    pub fn symmetric_basis(&self, name: &str) -> Result<Vec<(usize, SymMatrix<Rational>)>> {
        let block = self
            .block(name)
            .ok_or_else(|| Error::Config(format!("no variable named `{name}`")))?;
        let VarKind::Symmetric { n } = block.kind else {
            return Err(Error::Config(format!("variable `{name}` is not symmetric")));
        };
        Ok(block
            .ids
            .iter()
            .map(|&id| {
                let s = &self.scalars[id];
                let mut m = SymMatrix::zeros(n);
                m.set(s.row, s.col, Rational::from_integer(1.into()));
                (id, m)
            })
            .collect())
    }
}
