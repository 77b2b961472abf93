//! The loaded grammar resources, bundled for the tools.

use crate::chart::Grammar;
use crate::config::Config;
use crate::diag::Diagnostics;
use crate::fs::{RetentionError, RetentionSpec};
use crate::index::EblIndex;
use crate::lexicon::{Lexicon, TagwordTable};
use crate::runtime::Runtime;
use crate::segment::{RuleSegmenter, UnigramTagger};
use crate::tagset::TagSet;
use crate::trainer::Trainer;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{0}:\n{1}")]
    Diagnostics(&'static str, Diagnostics),
    #[error("retention spec: {0}")]
    Retention(#[from] RetentionError),
}

/// Raw text of each input file.
#[derive(Debug, Clone, Copy)]
pub struct Sources<'a> {
    pub tagset: &'a str,
    pub lexicon: &'a str,
    pub grammar: &'a str,
    pub retention: &'a str,
    pub config: Option<&'a str>,
}

#[derive(Debug, Clone)]
pub struct Resources {
    pub tagset: TagSet,
    pub lexicon: Lexicon,
    pub grammar: Grammar,
    pub retention: RetentionSpec,
    pub config: Config,
    pub tagwords: TagwordTable,
}

impl Resources {
    pub fn load(src: Sources<'_>) -> Result<Resources, LoadError> {
        let tagset = TagSet::parse(src.tagset).map_err(|d| LoadError::Diagnostics("tagset", d))?;
        let lexicon = Lexicon::parse(src.lexicon, &tagset).map_err(|d| LoadError::Diagnostics("lexicon", d))?;
        let grammar = Grammar::parse(src.grammar).map_err(|d| LoadError::Diagnostics("grammar", d))?;
        let retention = RetentionSpec::parse(src.retention)?;
        let config = match src.config {
            Some(text) => Config::parse(text).map_err(|d| LoadError::Diagnostics("config", d))?,
            None => Config::default(),
        };
        if !tagset.contains(config.default_tag.as_str()) {
            let mut d = Diagnostics::default();
            d.push(0, format!("default tag `{}` is not declared", config.default_tag));
            return Err(LoadError::Diagnostics("config", d));
        }
        let tagwords = TagwordTable::new(&tagset, &lexicon);
        Ok(Resources {
            tagset,
            lexicon,
            grammar,
            retention,
            config,
            tagwords,
        })
    }

    pub fn segmenter(&self) -> RuleSegmenter {
        RuleSegmenter::new(&self.config.markers)
    }

    pub fn tagger(&self) -> UnigramTagger<'_> {
        UnigramTagger::new(&self.tagset, &self.lexicon, &self.config.default_tag)
    }

    pub fn trainer(&self) -> Trainer<'_> {
        Trainer {
            grammar: &self.grammar,
            tagset: &self.tagset,
            tagwords: &self.tagwords,
            retention: &self.retention,
            config: self.config.trainer,
        }
    }

    pub fn runtime<'a>(&'a self, index: &'a EblIndex) -> Runtime<'a> {
        Runtime {
            index,
            tagset: &self.tagset,
            lexicon: &self.lexicon,
            tagwords: &self.tagwords,
            default_tag: &self.config.default_tag,
            config: self.config.runtime,
        }
    }

    /// Loads an index file, checking it against these resources.
    pub fn load_index(&self, text: &str) -> Result<EblIndex, crate::index::IndexError> {
        EblIndex::load(text, &self.tagset, &self.retention.fingerprint())
    }
}
