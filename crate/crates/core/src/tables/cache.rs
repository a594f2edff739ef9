use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::Result;
use crate::predicates::{PredicateKind, SlotPattern};
use crate::schemes::SchemeId;

use super::{compute_table, Component, EvaluationTable};

/// Memoization key: tables depend only on the slot class, never on the
/// concrete indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TableId {
    pub predicate: PredicateKind,
    pub scheme: SchemeId,
    pub class: Vec<u32>,
    pub component: Component,
}

/// Thread-safe memo of built tables.
#[derive(Default)]
pub struct TableCache {
    tables: RwLock<HashMap<TableId, Arc<EvaluationTable>>>,
}

impl TableCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// The process-wide cache.
    pub fn global() -> &'static TableCache {
        static GLOBAL: OnceLock<TableCache> = OnceLock::new();
        GLOBAL.get_or_init(TableCache::new)
    }

    pub fn get(&self, id: &TableId) -> Result<Arc<EvaluationTable>> {
        if let Some(t) = self.tables.read().expect("cache poisoned").get(id) {
            return Ok(t.clone());
        }
        let built = Arc::new(compute_table(
            id.predicate,
            id.scheme,
            &SlotPattern::new(id.class.clone()),
            id.component,
        )?);
        let mut w = self.tables.write().expect("cache poisoned");
        Ok(w.entry(id.clone()).or_insert(built).clone())
    }

    pub fn len(&self) -> usize {
        self.tables.read().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
