use agco_bench::experiment::{AGG_HEADER, RAW_HEADER};
use agco_bench::{run_experiment, ExperimentSpec, Family, ResultRow};

fn small_seeds(spec: &mut ExperimentSpec, n: u64) {
    spec.seeds = (0..n).collect();
}

#[test]
fn vary_tasks_produces_the_documented_row_count() {
    // 5 task counts x 20 seeds x 2 algorithms.
    let spec = ExperimentSpec::new(Family::VaryTasks);
    let result = run_experiment(&spec).unwrap();
    assert_eq!(result.rows.len(), 200);
    assert_eq!(result.failed_cells, 0);
    // One aggregate per (grid point, algorithm).
    assert_eq!(result.aggregates.len(), 10);
    for aggregate in &result.aggregates {
        assert_eq!(aggregate.n, 20);
    }
}

#[test]
fn raw_csv_header_is_frozen() {
    assert_eq!(
        RAW_HEADER,
        "family,params,seed,algorithm,scenario_hash,tasks_completed,total_distance,total_time,objective,pareto,error,runtime_ms"
    );
    assert_eq!(
        AGG_HEADER,
        "family,params,algorithm,n,mean_tasks_completed,std_tasks_completed,mean_total_distance,std_total_distance,mean_total_time,std_total_time,mean_objective,std_objective"
    );

    let mut spec = ExperimentSpec::new(Family::VaryQ);
    small_seeds(&mut spec, 2);
    spec.grid.q_values = vec![2];
    spec.grid.tasks = 8;
    let result = run_experiment(&spec).unwrap();
    let csv = result.raw_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), RAW_HEADER);
    let columns = RAW_HEADER.split(',').count();
    for line in lines {
        assert_eq!(line.split(',').count(), columns, "row: {line}");
    }
}

#[test]
fn weight_sweep_emits_five_ilp_rows_per_seed_with_pareto_flags() {
    let mut spec = ExperimentSpec::new(Family::WeightSweep);
    small_seeds(&mut spec, 3);
    let result = run_experiment(&spec).unwrap();
    assert_eq!(result.failed_cells, 0);
    for seed in 0..3 {
        let ilp_rows: Vec<&ResultRow> = result
            .rows
            .iter()
            .filter(|r| r.seed == seed && r.algorithm == "w-ilp")
            .collect();
        assert_eq!(ilp_rows.len(), 5);
        assert!(ilp_rows.iter().all(|r| r.pareto.is_some()));
        assert!(ilp_rows.iter().any(|r| r.pareto == Some(true)));
        // Greedy never undercuts the exact solver at matching weights.
        for ilp in &ilp_rows {
            let greedy = result
                .rows
                .iter()
                .find(|r| {
                    r.seed == seed && r.algorithm == "w-grd" && r.params == ilp.params
                })
                .unwrap();
            assert!(greedy.objective.unwrap() >= ilp.objective.unwrap() - 1e-9);
        }
    }
}

#[test]
fn paired_rows_share_scenario_hashes() {
    let mut spec = ExperimentSpec::new(Family::Charging);
    small_seeds(&mut spec, 4);
    spec.grid.uavs_per_ugv = vec![1, 3];
    let result = run_experiment(&spec).unwrap();
    assert_eq!(result.rows.len(), 2 * 4 * 2);
    assert_eq!(result.failed_cells, 0);
    for row in result.rows.iter().filter(|r| r.algorithm == "pctp") {
        let partner = result
            .rows
            .iter()
            .find(|r| {
                r.algorithm == "static" && r.params == row.params && r.seed == row.seed
            })
            .expect("missing paired static row");
        assert_eq!(row.scenario_hash, partner.scenario_hash);
        assert!(row.total_distance.unwrap() <= partner.total_distance.unwrap() + 1e-6);
    }
}

#[test]
fn reruns_are_identical_modulo_runtime() {
    let mut spec = ExperimentSpec::new(Family::VaryDistribution);
    small_seeds(&mut spec, 3);
    spec.grid.tasks = 10;
    let strip = |rows: &[ResultRow]| -> Vec<ResultRow> {
        rows.iter()
            .cloned()
            .map(|mut r| {
                r.runtime_ms = 0.0;
                r
            })
            .collect()
    };
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(strip(&a.rows), strip(&b.rows));
    assert_eq!(a.aggregates, b.aggregates);
}

#[test]
fn failing_cells_become_error_rows_and_the_run_continues() {
    let mut spec = ExperimentSpec::new(Family::Charging);
    small_seeds(&mut spec, 2);
    spec.grid.uavs_per_ugv = vec![2];
    spec.grid.horizon = 0.3; // far too short to finish
    let result = run_experiment(&spec).unwrap();
    assert_eq!(result.rows.len(), 4);
    assert_eq!(result.failed_cells, 4);
    assert!(result
        .rows
        .iter()
        .all(|r| r.error.as_deref().is_some_and(|e| e.contains("incomplete"))));
}

#[test]
fn flow_solver_mean_dominates_greedy_in_vary_q() {
    let mut spec = ExperimentSpec::new(Family::VaryQ);
    small_seeds(&mut spec, 20);
    spec.grid.q_values = vec![2, 3, 4, 5];
    let result = run_experiment(&spec).unwrap();
    for q in [2, 3, 4, 5] {
        let mean_of = |algorithm: &str| -> f64 {
            result
                .aggregates
                .iter()
                .find(|a| a.algorithm == algorithm && a.params.contains(&format!("q={q}")))
                .unwrap()
                .mean_total_distance
        };
        assert!(
            mean_of("mt-mcmf") <= mean_of("mt-grdpt") + 1e-9,
            "q = {q}: flow solver mean above greedy mean"
        );
    }
}
