//! Colors, indices and counters of events.
//!
//! A cocircularity of `p, q, a, b` is red-red, blue-blue or red-blue with respect
//! to `pq` according to the sides of `L_pq` holding `a` and `b`. The index of a
//! cocircularity is its rank among the cocircularities of the same 4-tuple.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{KdtError, Result};
use crate::kinetic::{EventKind, EventLog};
use crate::oracle::CensusEvent;
use crate::predicates::TupleCache;
use crate::motion::Scene;

/// Color of a cocircularity with respect to one of its pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ColorLabel {
    RedRed,
    BlueBlue,
    RedBlue,
}

/// Color of a 4-point cocircularity with respect to the directed pair `pair`.
pub fn color_with_respect_to(scene: &Scene, event: &CensusEvent, pair: (u32, u32)) -> Result<ColorLabel> {
    let mut cache = TupleCache::new(scene);
    color_cached(scene, &mut cache, event, pair)
}

pub fn color_cached(scene: &Scene, cache: &mut TupleCache, event: &CensusEvent, pair: (u32, u32)) -> Result<ColorLabel> {
    if event.kind != EventKind::Cocircularity {
        return Err(KdtError::Precondition("colors are defined for cocircularities".into()));
    }
    if pair.0 == pair.1 || !event.involves(pair.0) || !event.involves(pair.1) {
        return Err(KdtError::Precondition(format!("pair {pair:?} is not part of the event")));
    }
    let idx = |id: u32| scene.index_of(id).ok_or_else(|| KdtError::InvalidInput(format!("unknown id {id}")));
    let (p, q) = (idx(pair.0)?, idx(pair.1)?);
    let mut time = event.time.clone();
    let mut reds = 0;
    for &id in &event.participants {
        if id == pair.0 || id == pair.1 {
            continue;
        }
        match cache.orientation_sign_at(&mut time, p, q, idx(id)?)? {
            -1 => reds += 1,
            1 => {}
            _ => return Err(KdtError::Degenerate("collinear point at a cocircularity".into())),
        }
    }
    Ok(match reds {
        2 => ColorLabel::RedRed,
        0 => ColorLabel::BlueBlue,
        _ => ColorLabel::RedBlue,
    })
}

/// A cocircularity with its rank among those of the same 4-tuple.
#[derive(Clone, Debug)]
pub struct IndexedCocircularity {
    pub event: CensusEvent,
    /// 1-based rank in time order.
    pub index: usize,
    /// The rank exceeds the family's declared bound.
    pub flagged: bool,
}

/// Index every cocircularity of a time-sorted census.
pub fn assign_indices(census: &[CensusEvent], s_bound: usize) -> Vec<IndexedCocircularity> {
    let mut seen: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    census
        .iter()
        .filter(|e| e.kind == EventKind::Cocircularity)
        .map(|e| {
            let c = seen.entry(e.sorted_tuple()).or_insert(0);
            *c += 1;
            IndexedCocircularity { event: e.clone(), index: *c, flagged: *c > s_bound }
        })
        .collect()
}

/// Event counts of one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EventCounters {
    pub n: usize,
    pub log_events: usize,
    pub log_cocircularities: usize,
    pub log_collinearities: usize,
    /// Level-0 cocircularities in the census.
    pub delaunay_cocircularities: Option<usize>,
    /// Level-0 collinearities in the census.
    pub hull_collinearities: Option<usize>,
    /// Delaunay cocircularities by index (1, 2, higher).
    pub delaunay_index1: Option<usize>,
    pub delaunay_index2: Option<usize>,
    pub delaunay_index_higher: Option<usize>,
    /// Cocircularities of level at most k, by k.
    pub shallow_cocircularities: BTreeMap<usize, usize>,
    /// Collinearities of level at most k, by k.
    pub shallow_collinearities: BTreeMap<usize, usize>,
    pub crossings: Option<usize>,
    pub single_crossings: Option<usize>,
    pub double_crossings: Option<usize>,
}

impl EventCounters {
    /// Flat JSON object: maps keyed by k become `name_k{k}` fields.
    pub fn to_flat_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("counters serialize");
        let obj = v.as_object_mut().unwrap();
        for name in ["shallow_cocircularities", "shallow_collinearities"] {
            if let Some(serde_json::Value::Object(m)) = obj.remove(name) {
                for (k, c) in m {
                    obj.insert(format!("{name}_k{k}"), c);
                }
            }
        }
        v
    }
}

/// Counters from the census and the kinetic log.
pub fn tally(census: &[CensusEvent], log: &EventLog, n: usize, ks: &[usize]) -> EventCounters {
    let mut c = tally_log_only(log, n);
    let cocirc = census.iter().filter(|e| e.kind == EventKind::Cocircularity);
    let collin = census.iter().filter(|e| e.kind == EventKind::Collinearity);
    c.delaunay_cocircularities = Some(cocirc.clone().filter(|e| e.level == 0).count());
    c.hull_collinearities = Some(collin.clone().filter(|e| e.level == 0).count());
    let indexed = assign_indices(census, usize::MAX);
    let d: Vec<&IndexedCocircularity> = indexed.iter().filter(|e| e.event.level == 0).collect();
    c.delaunay_index1 = Some(d.iter().filter(|e| e.index == 1).count());
    c.delaunay_index2 = Some(d.iter().filter(|e| e.index == 2).count());
    c.delaunay_index_higher = Some(d.iter().filter(|e| e.index > 2).count());
    for &k in ks {
        c.shallow_cocircularities.insert(k, cocirc.clone().filter(|e| e.level <= k).count());
        c.shallow_collinearities.insert(k, collin.clone().filter(|e| e.level <= k).count());
    }
    c
}

/// Counters available without a census (large scenes).
pub fn tally_log_only(log: &EventLog, n: usize) -> EventCounters {
    EventCounters {
        n,
        log_events: log.len(),
        log_cocircularities: log.cocircularities(),
        log_collinearities: log.collinearities(),
        ..Default::default()
    }
}
