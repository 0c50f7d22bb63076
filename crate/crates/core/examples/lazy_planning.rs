//! Counts the edge checks that lazy search saves over evaluating the whole
//! roadmap first.
//!
//! cargo run --release --example lazy_planning

use svprm::envs::{gen_checkerboard, CheckerboardSpec};
use svprm::geometry::sample_uniform;
use svprm::planner::{plan_eager, plan_lazy, PlanQuery, PlannerOptions};
use svprm::roadmap::{build_roadmap, RoadmapParams};

fn main() -> svprm::Result<()> {
    let spec = CheckerboardSpec::default();
    let model = gen_checkerboard(&spec)?.field;
    let (s, g) = spec.corner_query();
    let query = PlanQuery { start: s.to_vec(), goal: g.to_vec(), beta: 0.5, max_edge_evals: None };
    let params = RoadmapParams { beta: 0.5, rho: 0.18, edge_resolution: 1.0 / 1024.0, lazy: true };
    println!("{:>5} {:>7} {:>6} {:>6} {:>8}", "seed", "edges", "lazy", "eager", "cost");
    for seed in 0..8 {
        let roadmap = build_roadmap(&sample_uniform(&spec.space(), 300, seed), &model, &params)?;
        let lazy = plan_lazy(&mut roadmap.clone(), &model, &query, PlannerOptions::default())?;
        let eager = plan_eager(&mut roadmap.clone(), &model, &query, PlannerOptions::default())?;
        let cost = if lazy.solved() { format!("{:.3}", lazy.cost) } else { "-".into() };
        println!(
            "{seed:>5} {:>7} {:>6} {:>6} {cost:>8}",
            roadmap.num_edges(),
            lazy.edges_evaluated,
            eager.edges_evaluated
        );
    }
    Ok(())
}
