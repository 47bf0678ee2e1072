//! Plan curation and runtime plan editing: a plan is created once, then a
//! reflection decision adds, cancels, and reprioritizes steps. Cancelled
//! steps stay in the plan for the audit trail; every applied decision bumps
//! the version by exactly one.
//!
//! ```sh
//! cargo run --example plan_reflection
//! ```

use deep_researcher::planner::{
    apply_edits, render_plan, PlanEdit, ReflectionDecision, ResearchPlan,
};

fn main() {
    let plan = ResearchPlan::from_steps(
        "municipal heat-pump adoption",
        vec![
            "survey current adoption rates".to_string(),
            "compare subsidy programs".to_string(),
            "estimate grid impact".to_string(),
        ],
    )
    .expect("non-empty step list");

    println!("{}", render_plan(&plan));

    // Mid-run, reflection decides the subsidy angle is a dead end, a permit
    // angle is missing, and grid impact should come first.
    let decision = ReflectionDecision {
        update_needed: true,
        rationale: "subsidies are already well covered; permits are the real bottleneck".into(),
        edits: vec![
            PlanEdit::Cancel { step_id: "s2".into() },
            PlanEdit::Add { description: "map permitting timelines by city".into(), position: 1 },
            PlanEdit::Reprioritize { step_id: "s3".into(), new_position: 0 },
        ],
    };

    let updated = apply_edits(&plan, &decision).expect("all referenced steps exist");
    println!("after reflection (version {} -> {}):", plan.version(), updated.version());
    println!("{}", render_plan(&updated));

    // A decision referencing a missing step rejects atomically: the original
    // plan is untouched and the error names the offender.
    let bad = ReflectionDecision {
        update_needed: true,
        rationale: "model hallucinated a step id".into(),
        edits: vec![
            PlanEdit::Add { description: "this add will be rolled back".into(), position: 0 },
            PlanEdit::Cancel { step_id: "s99".into() },
        ],
    };
    match apply_edits(&updated, &bad) {
        Err(e) => println!("rejected decision: {e}"),
        Ok(_) => unreachable!("dangling step id must reject"),
    }
    println!("plan still at version {} with {} steps", updated.version(), updated.steps().len());

    // No-op decisions change nothing, not even the version.
    let same = apply_edits(&updated, &ReflectionDecision::no_op("coverage looks right")).unwrap();
    assert_eq!(same, updated);
    println!("no-op reflection kept version {}", same.version());
}
