//! The annotation service: serves queued tasks, journals submissions and
//! folds the journal into the project store on export.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::assign::{Assignment, Task, TaskTarget};
use crate::error::{Error, Result};
use crate::ingest::journal::Journal;
use crate::ingest::{load_project, save_project, write_atomic, ASSIGNMENTS_FILE, LOG_DIR};
use crate::model::{validate_errors, ErrorSpan, MqmAnnotation, Project, RrJudgment, RrValue, SegmentRef, Setting};

/// What an annotator returns for a task. Side-by-side results refer to
/// the left and right translations as displayed; in RR, "A" is left.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskResult {
    Mqm {
        errors: Vec<ErrorSpan>,
    },
    SxsMqm {
        left: Vec<ErrorSpan>,
        right: Vec<ErrorSpan>,
    },
    Rr {
        value: RrValue,
    },
}

impl TaskResult {
    fn setting(&self) -> Setting {
        match self {
            TaskResult::Mqm { .. } => Setting::Mqm,
            TaskResult::SxsMqm { .. } => Setting::SxsMqm,
            TaskResult::Rr { .. } => Setting::SxsRr,
        }
    }

    fn sort(&mut self) {
        let key = |e: &ErrorSpan| (e.side, e.start, e.end);
        match self {
            TaskResult::Mqm { errors } => errors.sort_by_key(key),
            TaskResult::SxsMqm { left, right } => {
                left.sort_by_key(key);
                right.sort_by_key(key);
            }
            TaskResult::Rr { .. } => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub task_id: String,
    pub annotator: String,
    pub result: TaskResult,
    #[serde(default)]
    pub client_timestamp: Option<String>,
}

/// One journal line. The displayed order of the systems travels with
/// every side-by-side result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalEntry {
    pub task_id: String,
    pub annotator: String,
    pub revision: u32,
    pub target: TaskTarget,
    pub result: TaskResult,
    #[serde(default)]
    pub client_timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub task_id: String,
    pub seq: u64,
    pub revision: u32,
    pub revised: bool,
}

/// A task as shown to its annotator: texts only, no system names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskView {
    pub task_id: String,
    pub annotator: String,
    pub setting: Setting,
    pub doc_id: String,
    pub seg_id: String,
    /// Position of the segment within its document.
    pub seg_index: usize,
    pub source: String,
    /// One target for MQM, left then right otherwise.
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub done: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub per_annotator: BTreeMap<String, Completion>,
    pub per_setting: BTreeMap<Setting, Completion>,
    pub overall: Completion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSegment {
    pub seg_id: String,
    pub source: String,
    /// Targets in the task's display order, when a task was given.
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentContext {
    pub doc_id: String,
    pub name: String,
    pub segments: Vec<ContextSegment>,
}

struct State {
    journal: Journal<JournalEntry>,
    /// Latest revision per task.
    latest: BTreeMap<String, JournalEntry>,
}

pub struct Campaign {
    root: PathBuf,
    project: Project,
    assignment: Assignment,
    task_index: HashMap<String, usize>,
    state: Mutex<State>,
}

impl Campaign {
    /// Writes a fresh store with the assignment and opens it.
    pub fn create(root: &Path, project: &Project, assignment: &Assignment) -> Result<Campaign> {
        let mut project = project.clone();
        project
            .annotators
            .extend(assignment.annotators().into_iter().map(str::to_string));
        save_project(&project, root)?;
        let mut json = serde_json::to_vec_pretty(assignment).expect("assignment serializes");
        json.push(b'\n');
        write_atomic(&root.join(ASSIGNMENTS_FILE), &json)?;
        Campaign::open(root)
    }

    /// Loads the store and replays the journal, dropping a torn tail.
    pub fn open(root: &Path) -> Result<Campaign> {
        let project = load_project(root)?;
        let path = root.join(ASSIGNMENTS_FILE);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let assignment: Assignment = serde_json::from_slice(&bytes).map_err(|e| Error::StoreCorrupt {
            detail: format!("{ASSIGNMENTS_FILE}: {e}"),
        })?;
        let task_index = assignment
            .tasks
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.clone(), i))
            .collect();
        let (journal, entries) = Journal::<JournalEntry>::open(&root.join(LOG_DIR))?;
        let mut latest = BTreeMap::new();
        for (_, e) in entries {
            latest.insert(e.task_id.clone(), e);
        }
        Ok(Campaign {
            root: root.to_path_buf(),
            project,
            assignment,
            task_index,
            state: Mutex::new(State { journal, latest }),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn project(&self) -> &Project {
        &self.project
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    fn state(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn task(&self, id: &str) -> Option<&Task> {
        self.task_index.get(id).map(|&i| &self.assignment.tasks[i])
    }

    fn view(&self, task: &Task) -> TaskView {
        let doc = self.project.documents.iter().find(|d| d.id == task.segment.doc_id);
        let seg_index = doc
            .and_then(|d| d.segments.iter().position(|s| *s == task.segment.seg_id))
            .unwrap_or(0);
        let units: Vec<_> = task
            .target
            .systems()
            .into_iter()
            .filter_map(|s| self.project.unit(s, &task.segment))
            .collect();
        TaskView {
            task_id: task.id.clone(),
            annotator: task.annotator.clone(),
            setting: task.setting,
            doc_id: task.segment.doc_id.clone(),
            seg_id: task.segment.seg_id.clone(),
            seg_index,
            source: units.first().map(|u| u.source.clone()).unwrap_or_default(),
            targets: units.iter().map(|u| u.target.clone()).collect(),
        }
    }

    /// The annotator's earliest unfinished task, if any.
    pub fn next_task(&self, annotator: &str) -> Result<Option<TaskView>> {
        if !self.assignment.annotators().contains(annotator) {
            return Err(Error::UnknownAnnotator(annotator.to_string()));
        }
        let state = self.state();
        Ok(self
            .assignment
            .tasks
            .iter()
            .find(|t| t.annotator == annotator && !state.latest.contains_key(&t.id))
            .map(|t| self.view(t)))
    }

    fn validate(&self, task: &Task, result: &TaskResult) -> Result<()> {
        if result.setting() != task.setting {
            return Err(Error::Validation {
                detail: format!("{} result for a {} task", result.setting(), task.setting),
            });
        }
        let lists: Vec<(&str, &[ErrorSpan])> = match (result, &task.target) {
            (TaskResult::Mqm { errors }, TaskTarget::Single { system }) => vec![(system, errors)],
            (TaskResult::SxsMqm { left: l, right: r }, TaskTarget::Pair { left, right }) => {
                vec![(left, l), (right, r)]
            }
            _ => vec![],
        };
        let mut violations = Vec::new();
        for (system, errors) in lists {
            let unit = self
                .project
                .unit(system, &task.segment)
                .ok_or_else(|| Error::Validation {
                    detail: format!("no translation for task {}", task.id),
                })?;
            let side = if task.target.systems().len() == 2 && task.target.systems()[0] == system {
                "left"
            } else if task.target.systems().len() == 2 {
                "right"
            } else {
                "target"
            };
            violations.extend(validate_errors(unit, errors, side));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation {
                detail: violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
            })
        }
    }

    /// Journals a result. Submitting again for the same task records a
    /// new revision that replaces the earlier one.
    pub fn submit(&self, submission: Submission) -> Result<Ack> {
        let task = self
            .task(&submission.task_id)
            .ok_or_else(|| Error::UnknownTask(submission.task_id.clone()))?;
        if task.annotator != submission.annotator {
            return Err(Error::WrongAnnotator {
                task: task.id.clone(),
                owner: task.annotator.clone(),
                submitter: submission.annotator,
            });
        }
        let mut result = submission.result;
        self.validate(task, &result)?;
        result.sort();
        let mut state = self.state();
        let revision = state.latest.get(&task.id).map_or(0, |e| e.revision + 1);
        let entry = JournalEntry {
            task_id: task.id.clone(),
            annotator: task.annotator.clone(),
            revision,
            target: task.target.clone(),
            result,
            client_timestamp: submission.client_timestamp,
        };
        let seq = state.journal.append(&entry)?;
        state.latest.insert(task.id.clone(), entry);
        Ok(Ack {
            task_id: task.id.clone(),
            seq,
            revision,
            revised: revision > 0,
        })
    }

    pub fn progress(&self) -> Progress {
        let state = self.state();
        let mut p = Progress::default();
        for t in &self.assignment.tasks {
            let done = usize::from(state.latest.contains_key(&t.id));
            for c in [
                p.per_annotator.entry(t.annotator.clone()).or_default(),
                p.per_setting.entry(t.setting).or_default(),
                &mut p.overall,
            ] {
                c.total += 1;
                c.done += done;
            }
        }
        p
    }

    pub fn context(&self, doc_id: &str, task_id: Option<&str>) -> Result<DocumentContext> {
        let doc = self
            .project
            .documents
            .iter()
            .find(|d| d.id == doc_id)
            .ok_or_else(|| Error::Validation {
                detail: format!("unknown document {doc_id}"),
            })?;
        let systems: Vec<&str> = match task_id {
            Some(id) => self
                .task(id)
                .ok_or_else(|| Error::UnknownTask(id.to_string()))?
                .target
                .systems(),
            None => vec![],
        };
        let segments = doc
            .segments
            .iter()
            .map(|s| {
                let seg = SegmentRef::new(doc.id.clone(), s.clone());
                let units: Vec<_> = systems.iter().filter_map(|sys| self.project.unit(sys, &seg)).collect();
                let source = units
                    .first()
                    .map(|u| u.source.clone())
                    .or_else(|| {
                        self.project
                            .units
                            .iter()
                            .find(|u| u.segment == seg)
                            .map(|u| u.source.clone())
                    })
                    .unwrap_or_default();
                ContextSegment {
                    seg_id: s.clone(),
                    source,
                    targets: units.iter().map(|u| u.target.clone()).collect(),
                }
            })
            .collect();
        Ok(DocumentContext {
            doc_id: doc.id.clone(),
            name: doc.name.clone(),
            segments,
        })
    }

    /// The store's project with the latest revision of every journaled
    /// result merged in (replacing any earlier record of the same unit).
    pub fn exported_project(&self) -> Project {
        let state = self.state();
        let mut project = self.project.clone();
        let mut mqm: BTreeMap<(Setting, String, String, SegmentRef, Option<String>), MqmAnnotation> = project
            .mqm
            .drain(..)
            .map(|a| {
                (
                    (
                        a.setting,
                        a.annotator.clone(),
                        a.system.clone(),
                        a.segment.clone(),
                        a.pair_partner.clone(),
                    ),
                    a,
                )
            })
            .collect();
        let mut rr: BTreeMap<(String, SegmentRef, String, String), RrJudgment> = BTreeMap::new();
        for j in project.rr.drain(..) {
            let (a, b) = ordered(&j.system_a, &j.system_b);
            rr.insert((j.annotator.clone(), j.segment.clone(), a, b), j);
        }
        for entry in state.latest.values() {
            let task = &self.assignment.tasks[self.task_index[&entry.task_id]];
            let mut put = |system: &str, partner: Option<&str>, errors: &[ErrorSpan]| {
                let a = MqmAnnotation {
                    annotator: entry.annotator.clone(),
                    setting: task.setting,
                    system: system.to_string(),
                    segment: task.segment.clone(),
                    errors: errors.to_vec(),
                    pair_partner: partner.map(str::to_string),
                };
                mqm.insert(
                    (
                        a.setting,
                        a.annotator.clone(),
                        a.system.clone(),
                        a.segment.clone(),
                        a.pair_partner.clone(),
                    ),
                    a,
                );
            };
            match (&entry.result, &entry.target) {
                (TaskResult::Mqm { errors }, TaskTarget::Single { system }) => put(system, None, errors),
                (TaskResult::SxsMqm { left: l, right: r }, TaskTarget::Pair { left, right }) => {
                    put(left, Some(right), l);
                    put(right, Some(left), r);
                }
                (TaskResult::Rr { value }, TaskTarget::Pair { left, right }) => {
                    let (a, b) = ordered(left, right);
                    rr.insert(
                        (entry.annotator.clone(), task.segment.clone(), a, b),
                        RrJudgment {
                            annotator: entry.annotator.clone(),
                            segment: task.segment.clone(),
                            system_a: left.clone(),
                            system_b: right.clone(),
                            value: *value,
                        },
                    );
                }
                _ => {}
            }
        }
        project.mqm = mqm.into_values().collect();
        project.rr = rr.into_values().collect();
        project.canonicalize();
        project
    }

    /// Writes the merged project to the store's canonical TSVs.
    pub fn export(&self) -> Result<Project> {
        let project = self.exported_project();
        save_project(&project, &self.root)?;
        Ok(project)
    }
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a < b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}
