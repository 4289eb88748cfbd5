use std::collections::BTreeSet;
use std::hint::black_box;

use coalform_bench::fixture;
use coalform_core::baselines::{fast_non_dominated_sort, merge_and_split, nsga2_run};
use coalform_core::rng::rng_for;
use coalform_core::sim::{candidate_pool, detect_and_elect, form_coalitions};
use coalform_core::{qiga, CoalitionProblem, MergeSplitConfig, Nsga2Config, QigaConfig, Solver, UavId};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::Rng;

const SCALES: [(usize, usize); 2] = [(8, 2), (16, 4)];

fn optimizers(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_task");
    group.sample_size(10);
    for (n, k) in SCALES {
        let (scenario, ledger) = fixture(n, k, 1);
        let (task_id, leader) = detect_and_elect(&scenario)[0];
        let task = &scenario.tasks[task_id];
        let pool = candidate_pool(&scenario, task, leader, &BTreeSet::new()).unwrap();

        let qcfg = QigaConfig { population_size: 50, max_iterations: 100, ..Default::default() };
        group.bench_function(format!("qiga/{n}-{k}"), |b| {
            b.iter(|| {
                let mut p = CoalitionProblem::new(&scenario, task, &ledger, leader, &[], pool.clone());
                black_box(qiga::run(&mut p, &qcfg).unwrap().best_eval.fitness)
            })
        });
        let ncfg = Nsga2Config { population_size: 50, max_iterations: 100, ..Default::default() };
        group.bench_function(format!("nsga2/{n}-{k}"), |b| {
            b.iter(|| {
                let mut p = CoalitionProblem::new(&scenario, task, &ledger, leader, &[], pool.clone());
                black_box(nsga2_run(&mut p, &ncfg).unwrap().best_eval.fitness)
            })
        });
    }
    group.finish();
}

fn whole_mission(c: &mut Criterion) {
    let mut group = c.benchmark_group("mission");
    group.sample_size(10);
    for (n, k) in SCALES {
        let (scenario, ledger) = fixture(n, k, 1);
        let ids: Vec<UavId> = (0..n).collect();
        group.bench_function(format!("distance/{n}-{k}"), |b| {
            b.iter(|| black_box(form_coalitions(&scenario, &ledger, &Solver::Distance, 1, false).unwrap().rounds))
        });
        group.bench_function(format!("merge-split/{n}-{k}"), |b| {
            b.iter(|| black_box(merge_and_split(&scenario, &ledger, &ids, &MergeSplitConfig::default()).unwrap().merges))
        });
    }
    group.finish();
}

fn sorting(c: &mut Criterion) {
    let mut rng = rng_for(1, &[]);
    let points: Vec<[f64; 3]> = (0..400).map(|_| [0; 3].map(|_| rng.random_range(0.0..1.0))).collect();
    c.bench_function("non_dominated_sort/400", |b| b.iter(|| black_box(fast_non_dominated_sort(&points).len())));
}

criterion_group!(benches, optimizers, whole_mission, sorting);
criterion_main!(benches);
