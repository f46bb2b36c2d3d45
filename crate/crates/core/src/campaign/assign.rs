//! Within-subject task assignment: every document goes to a fixed set of
//! annotators who judge all of its translations in every setting.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Project, SegmentRef, Setting, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskTarget {
    Single {
        system: String,
    },
    /// Systems in display order.
    Pair {
        left: String,
        right: String,
    },
}

/// A system, or an unordered pair of systems.
type UnitKey = (String, Option<String>);

impl TaskTarget {
    pub fn systems(&self) -> Vec<&str> {
        match self {
            TaskTarget::Single { system } => vec![system],
            TaskTarget::Pair { left, right } => vec![left, right],
        }
    }

    /// Identity of the compared unit regardless of display order.
    fn unit_key(&self) -> UnitKey {
        match self {
            TaskTarget::Single { system } => (system.clone(), None),
            TaskTarget::Pair { left, right } => {
                let (a, b) = if left < right { (left, right) } else { (right, left) };
                (a.clone(), Some(b.clone()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub annotator: String,
    pub setting: Setting,
    pub segment: SegmentRef,
    pub target: TaskTarget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub k: usize,
    pub seed: u64,
    /// Annotators per document.
    pub doc_annotators: BTreeMap<String, BTreeSet<String>>,
    /// Every annotator's queue, in serving order.
    pub tasks: Vec<Task>,
}

impl Assignment {
    pub fn annotators(&self) -> BTreeSet<&str> {
        self.doc_annotators.values().flatten().map(String::as_str).collect()
    }

    /// Segments assigned to each annotator (counted once per document).
    pub fn loads(&self, project: &Project) -> BTreeMap<String, usize> {
        let sizes: HashMap<&str, usize> = project
            .documents
            .iter()
            .map(|d| (d.id.as_str(), d.segments.len()))
            .collect();
        let mut loads = BTreeMap::new();
        for (doc, annotators) in &self.doc_annotators {
            for a in annotators {
                *loads.entry(a.clone()).or_default() += sizes.get(doc.as_str()).copied().unwrap_or(0);
            }
        }
        loads
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignOptions {
    /// Annotators per document.
    pub k: usize,
    pub seed: u64,
    /// Serve a document's three settings back to back instead of all
    /// single-sided work first.
    pub interleave: bool,
}

impl Default for AssignOptions {
    fn default() -> Self {
        AssignOptions {
            k: 3,
            seed: 0,
            interleave: false,
        }
    }
}

/// Systems judged in single-sided MQM: those in designated pairs, or all
/// systems when there are none.
fn mqm_systems(project: &Project) -> Vec<String> {
    let paired = project.paired_systems();
    if paired.is_empty() {
        project.systems.iter().cloned().collect()
    } else {
        paired
    }
}

/// Seeded left/right order per (segment, pair), shared by all annotators.
fn side_orders(project: &Project, seed: u64) -> HashMap<(SegmentRef, usize), bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut out = HashMap::new();
    for segment in project.segments() {
        for i in 0..project.designated_pairs.len() {
            out.insert((segment.clone(), i), rng.gen::<bool>());
        }
    }
    out
}

/// Documents go, largest first, to the `k` annotators with the lowest
/// segment load so far; ties follow a seeded shuffle of the pool. Loads
/// then differ by at most one document's size.
pub fn assign_tasks(project: &Project, pool: &[String], options: AssignOptions) -> Result<Assignment> {
    let unique: BTreeSet<&String> = pool.iter().collect();
    if unique.len() < options.k || options.k == 0 {
        return Err(Error::PoolTooSmall {
            pool: unique.len(),
            k: options.k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut shuffled: Vec<&String> = unique.into_iter().collect();
    shuffled.shuffle(&mut rng);
    let mut loads: Vec<(usize, usize, &String)> =
        shuffled.into_iter().enumerate().map(|(rank, a)| (0, rank, a)).collect();

    let mut order: Vec<usize> = (0..project.documents.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(project.documents[i].segments.len()));
    let mut doc_annotators = BTreeMap::new();
    for i in order {
        let doc = &project.documents[i];
        loads.sort();
        let chosen: BTreeSet<String> = loads[..options.k].iter().map(|(_, _, a)| (*a).clone()).collect();
        for slot in &mut loads[..options.k] {
            slot.0 += doc.segments.len();
        }
        doc_annotators.insert(doc.id.clone(), chosen);
    }

    let sides = side_orders(project, options.seed);
    let mqm = mqm_systems(project);
    let settings: Vec<Setting> = if project.designated_pairs.is_empty() {
        vec![Setting::Mqm]
    } else {
        Setting::ALL.to_vec()
    };
    let targets = |setting: Setting, segment: &SegmentRef| -> Vec<TaskTarget> {
        if setting == Setting::Mqm {
            return mqm
                .iter()
                .filter(|s| project.unit(s, segment).is_some())
                .map(|s| TaskTarget::Single { system: s.clone() })
                .collect();
        }
        project
            .designated_pairs
            .iter()
            .enumerate()
            .filter(|(_, (a, b))| project.unit(a, segment).is_some() && project.unit(b, segment).is_some())
            .map(|(i, (a, b))| {
                let (left, right) = if sides[&(segment.clone(), i)] { (b, a) } else { (a, b) };
                TaskTarget::Pair {
                    left: left.clone(),
                    right: right.clone(),
                }
            })
            .collect()
    };

    let mut tasks = Vec::new();
    let annotators: BTreeSet<&String> = doc_annotators.values().flatten().collect();
    for annotator in annotators {
        let docs: Vec<_> = project
            .documents
            .iter()
            .filter(|d| doc_annotators[&d.id].contains(annotator))
            .collect();
        let mut blocks: Vec<(Setting, &crate::model::Document)> = Vec::new();
        if options.interleave {
            for d in &docs {
                blocks.extend(settings.iter().map(|&s| (s, *d)));
            }
        } else {
            for &s in &settings {
                blocks.extend(docs.iter().map(|d| (s, *d)));
            }
        }
        for (setting, doc) in blocks {
            // Per translation (or pair), the whole document in order.
            let mut groups: Vec<(UnitKey, Vec<(SegmentRef, TaskTarget)>)> = Vec::new();
            for s in &doc.segments {
                let segment = SegmentRef::new(doc.id.clone(), s.clone());
                for target in targets(setting, &segment) {
                    let key = target.unit_key();
                    match groups.iter_mut().find(|(k, _)| *k == key) {
                        Some((_, items)) => items.push((segment.clone(), target)),
                        None => groups.push((key, vec![(segment.clone(), target)])),
                    }
                }
            }
            for (segment, target) in groups.into_iter().flat_map(|(_, items)| items) {
                tasks.push(Task {
                    id: format!("t{:06}", tasks.len() + 1),
                    annotator: annotator.clone(),
                    setting,
                    segment,
                    target,
                });
            }
        }
    }
    Ok(Assignment {
        k: options.k,
        seed: options.seed,
        doc_annotators,
        tasks,
    })
}

/// Standalone check of the within-subject design: each document has `k`
/// annotators, and every (segment, system or pair, setting) unit is
/// queued exactly once for each of them and for nobody else.
pub fn validate_assignment(project: &Project, assignment: &Assignment) -> Vec<Violation> {
    let mut out = Vec::new();
    for doc in &project.documents {
        match assignment.doc_annotators.get(&doc.id) {
            Some(set) if set.len() == assignment.k => {}
            Some(set) => out.push(Violation::new(
                "E_DOC_ANNOTATORS",
                format!("{} has {}", doc.id, set.len()),
            )),
            None => out.push(Violation::new("E_DOC_UNASSIGNED", doc.id.clone())),
        }
    }
    let mut ids = BTreeSet::new();
    let mut seen: BTreeMap<(Setting, SegmentRef, UnitKey), BTreeSet<String>> = BTreeMap::new();
    for t in &assignment.tasks {
        if !ids.insert(&t.id) {
            out.push(Violation::new("E_DUPLICATE_TASK", t.id.clone()));
        }
        let allowed = assignment.doc_annotators.get(&t.segment.doc_id);
        if !allowed.is_some_and(|s| s.contains(&t.annotator)) {
            out.push(Violation::new(
                "E_WITHIN_SUBJECT",
                format!("{} for {}", t.id, t.annotator),
            ));
        }
        if !seen
            .entry((t.setting, t.segment.clone(), t.target.unit_key()))
            .or_default()
            .insert(t.annotator.clone())
        {
            out.push(Violation::new("E_DUPLICATE_TASK", format!("{} repeats a unit", t.id)));
        }
    }
    let settings: Vec<Setting> = if project.designated_pairs.is_empty() {
        vec![Setting::Mqm]
    } else {
        Setting::ALL.to_vec()
    };
    let mqm = mqm_systems(project);
    for segment in project.segments() {
        let Some(expected) = assignment.doc_annotators.get(&segment.doc_id) else {
            continue;
        };
        for &setting in &settings {
            let keys: Vec<UnitKey> = if setting == Setting::Mqm {
                mqm.iter()
                    .filter(|s| project.unit(s, &segment).is_some())
                    .map(|s| (s.clone(), None))
                    .collect()
            } else {
                project
                    .designated_pairs
                    .iter()
                    .filter(|(a, b)| project.unit(a, &segment).is_some() && project.unit(b, &segment).is_some())
                    .map(|(a, b)| {
                        if a < b {
                            (a.clone(), Some(b.clone()))
                        } else {
                            (b.clone(), Some(a.clone()))
                        }
                    })
                    .collect()
            };
            for key in keys {
                let got = seen.get(&(setting, segment.clone(), key.clone()));
                if got != Some(expected) {
                    out.push(Violation::new(
                        "E_INCOMPLETE",
                        format!(
                            "{setting} {segment} {}{}",
                            key.0,
                            key.1.map(|b| format!("/{b}")).unwrap_or_default()
                        ),
                    ));
                }
            }
        }
    }
    out.sort();
    out
}
