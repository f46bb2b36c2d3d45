//! Annotation campaigns: who annotates what, and the service that
//! collects the results.

mod assign;
mod service;

pub use assign::{assign_tasks, validate_assignment, AssignOptions, Assignment, Task, TaskTarget};
pub use service::{
    Ack, Campaign, Completion, ContextSegment, DocumentContext, JournalEntry, Progress, Submission, TaskResult,
    TaskView,
};
