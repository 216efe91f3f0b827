use std::borrow::Cow;
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// One per-site token of a basis label, e.g. `"+z"`, `"intact"` or `"1"`.
pub type Token = Cow<'static, str>;

/// Ordered per-site tokens naming one basis vector, e.g. `|+z, -z⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel(Vec<Token>);

impl BasisLabel {
    pub fn new<I, T>(tokens: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<Token>,
    {
        Self(tokens.into_iter().map(Into::into).collect())
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn concat(&self, other: &BasisLabel) -> BasisLabel {
        let mut tokens = Vec::with_capacity(self.arity() + other.arity());
        tokens.extend(self.0.iter().cloned());
        tokens.extend(other.0.iter().cloned());
        BasisLabel(tokens)
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, token) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(token)?;
        }
        Ok(())
    }
}

/// An ordered, duplicate-free list of labels shared by kets and operators.
///
/// Product bases are ordered with site 1 most significant, each site following
/// the order of its factor basis.
#[derive(Debug, Clone)]
pub struct Basis(Arc<[BasisLabel]>);

impl Basis {
    pub fn new(labels: Vec<BasisLabel>) -> Result<Self> {
        let Some(first) = labels.first() else {
            return Err(Error::InvalidBasis("basis has no labels".into()));
        };
        let arity = first.arity();
        if let Some(bad) = labels.iter().find(|l| l.arity() != arity) {
            return Err(Error::InvalidBasis(format!(
                "label `{bad}` has arity {} but the basis uses {arity}",
                bad.arity()
            )));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label) {
                return Err(Error::InvalidBasis(format!("duplicate label `{label}`")));
            }
        }
        Ok(Self(labels.into()))
    }

    /// Single-site basis from a token list.
    pub fn single_site(tokens: &[&'static str]) -> Result<Self> {
        Self::new(tokens.iter().map(|t| BasisLabel::new([*t])).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.0[0].arity()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.0
    }

    pub fn label(&self, index: usize) -> &BasisLabel {
        &self.0[index]
    }

    pub fn index_of(&self, label: &BasisLabel) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    pub fn tensor(&self, other: &Basis) -> Basis {
        let labels: Vec<BasisLabel> = self
            .0
            .iter()
            .flat_map(|a| other.0.iter().map(move |b| a.concat(b)))
            .collect();
        Basis(labels.into())
    }

    pub(crate) fn ensure_same(&self, other: &Basis, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch(format!(
                "{what}: [{}] vs [{}]",
                self.describe(),
                other.describe()
            )))
        }
    }

    fn describe(&self) -> String {
        let shown: Vec<String> = self.0.iter().take(4).map(|l| l.to_string()).collect();
        let more = if self.len() > 4 { ", …" } else { "" };
        format!("{}{more}", shown.join("; "))
    }
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Basis {}
