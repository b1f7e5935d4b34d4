//! Index arithmetic for the parameter-block feature layout.

use super::DomainName;
use crate::model::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    MeanStd,
    Entropy,
    Ggd,
    Aggd,
    Gamma,
}

impl Block {
    pub const ALL: [Block; 5] = [
        Block::MeanStd,
        Block::Entropy,
        Block::Ggd,
        Block::Aggd,
        Block::Gamma,
    ];

    /// Values each domain contributes to this block.
    pub fn width(self) -> usize {
        match self {
            Block::MeanStd => 2,
            Block::Entropy => 1,
            Block::Ggd => 2,
            Block::Aggd => 4,
            Block::Gamma => 2,
        }
    }

    fn names(self) -> &'static [&'static str] {
        match self {
            Block::MeanStd => &["mean", "std"],
            Block::Entropy => &["entropy"],
            Block::Ggd => &["ggd_shape", "ggd_variance"],
            Block::Aggd => &["aggd_eta", "aggd_shape", "aggd_left_var", "aggd_right_var"],
            Block::Gamma => &["gamma_shape", "gamma_rate"],
        }
    }
}

/// Start index of a block in a vector covering `domains` domains.
pub fn offset(block: Block, domains: usize) -> usize {
    Block::ALL
        .iter()
        .take_while(|&&b| b != block)
        .map(|b| b.width() * domains)
        .sum()
}

/// Indices of one domain's entries within a block.
pub fn indices(block: Block, domain_index: usize, domains: usize) -> std::ops::Range<usize> {
    let start = offset(block, domains) + block.width() * domain_index;
    start..start + block.width()
}

/// Descriptive name of every entry, e.g. `ggd_shape_Cur`.
pub fn feature_names(kind: ModelKind) -> Vec<String> {
    let domains = DomainName::for_kind(kind);
    let mut names = Vec::new();
    for block in Block::ALL {
        for d in domains {
            for n in block.names() {
                names.push(format!("{n}_{d}"));
            }
        }
    }
    names
}
