//! Pure, transactional application of reflection edits to a plan.
//!
//! Edits are applied in list order against a working list of active steps.
//! Any invalid edit — a dangling or already-cancelled step id — rejects the
//! whole decision and leaves the plan untouched: the model gave us an
//! inconsistent instruction and partial application has no defined meaning.

use thiserror::Error;

use super::{PlanEdit, PlanStep, ReflectionDecision, ResearchPlan, StepStatus};

#[derive(Debug, Error)]
pub enum EditError {
    #[error("edit references step `{step_id}` which does not exist or is cancelled; decision rejected")]
    DanglingStep { step_id: String },
}

/// Apply a reflection decision to a plan, returning the updated plan.
///
/// Deterministic and side-effect free. `update_needed = false` returns the
/// plan unchanged at the same version; otherwise edits apply in order and
/// the version increments by exactly one. Positions given by the model are
/// clamped into range rather than rejected (LLM-produced indices are
/// unreliable). Cancelled steps are never deleted: they leave the active
/// ordering but stay in the plan with their last position.
pub fn apply_edits(
    plan: &ResearchPlan,
    decision: &ReflectionDecision,
) -> Result<ResearchPlan, EditError> {
    if !decision.update_needed {
        return Ok(plan.clone());
    }

    // Working state: active steps in position order, cancelled kept aside.
    let mut active: Vec<PlanStep> = plan.active_steps().into_iter().cloned().collect();
    let mut cancelled: Vec<PlanStep> = plan
        .steps()
        .iter()
        .filter(|s| s.status == StepStatus::Cancelled)
        .cloned()
        .collect();
    let mut next_id = plan.fresh_id_seq();

    for edit in &decision.edits {
        match edit {
            PlanEdit::Add { description, position } => {
                let at = (*position).min(active.len());
                active.insert(
                    at,
                    PlanStep {
                        id: format!("s{next_id}"),
                        description: description.clone(),
                        status: StepStatus::Pending,
                        position: at, // recomputed below
                    },
                );
                next_id += 1;
            }
            PlanEdit::Cancel { step_id } => {
                let idx = active
                    .iter()
                    .position(|s| &s.id == step_id)
                    .ok_or_else(|| EditError::DanglingStep { step_id: step_id.clone() })?;
                let mut step = active.remove(idx);
                step.status = StepStatus::Cancelled;
                cancelled.push(step);
            }
            PlanEdit::Reprioritize { step_id, new_position } => {
                let idx = active
                    .iter()
                    .position(|s| &s.id == step_id)
                    .ok_or_else(|| EditError::DanglingStep { step_id: step_id.clone() })?;
                let step = active.remove(idx);
                let at = (*new_position).min(active.len());
                active.insert(at, step);
            }
        }
    }

    for (i, step) in active.iter_mut().enumerate() {
        step.position = i;
    }
    let mut steps = active;
    steps.extend(cancelled);

    Ok(ResearchPlan::from_parts(plan.topic(), plan.version() + 1, steps)
        .expect("edited plan preserves structural invariants"))
}
