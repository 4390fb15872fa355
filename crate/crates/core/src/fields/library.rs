use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use super::{Aabb, SharedField};
use crate::metrics::Symmetry;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct LibraryEntry {
    pub field: SharedField,
    /// Shape symmetry used when scoring rotation estimates.
    pub symmetry: Symmetry,
}

impl LibraryEntry {
    pub fn bounds(&self) -> Aabb {
        self.field.bounds()
    }
}

/// Named object fields, each in its own canonical frame.
#[derive(Debug, Clone, Default)]
pub struct ObjectLibrary {
    entries: BTreeMap<String, LibraryEntry>,
}

impl ObjectLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, field: SharedField, symmetry: Symmetry) -> Result<()> {
        let name = name.into();
        if self.entries.contains_key(&name) {
            return Err(Error::InvalidArgument(format!("duplicate library entry `{name}`")));
        }
        let b = field.bounds();
        if b.validate().is_err() {
            return Err(Error::InvalidArgument(format!("library entry `{name}` has non-finite bounds")));
        }
        self.entries.insert(name, LibraryEntry { field, symmetry });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&LibraryEntry> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
