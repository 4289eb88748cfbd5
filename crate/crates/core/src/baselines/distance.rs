use crate::error::Result;
use crate::model::{derive_assignment, Scenario, TaskSpec, UavId};
use crate::objectives::resource_shortfall;

/// Greedy nearest-first recruitment: add candidates in order of travel time
/// to the task until the coalition covers the requirement or candidates run
/// out. Reputation and reliability are ignored. Returns the chosen followers.
pub fn distance_based(
    scenario: &Scenario,
    task: &TaskSpec,
    leader: UavId,
    fixed: &[UavId],
    candidates: &[UavId],
) -> Result<Vec<UavId>> {
    let mut order = Vec::with_capacity(candidates.len());
    for &id in candidates {
        order.push((scenario.uav(id)?.travel_time(&task.position), id));
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut members = vec![leader];
    members.extend(fixed.iter().copied().filter(|id| *id != leader));
    let mut chosen = Vec::new();
    for (_, id) in order {
        if covers(scenario, task, &members)? {
            break;
        }
        members.push(id);
        chosen.push(id);
    }
    Ok(chosen)
}

fn covers(scenario: &Scenario, task: &TaskSpec, members: &[UavId]) -> Result<bool> {
    let assign = derive_assignment(scenario, task, members)?;
    Ok(resource_shortfall(&assign, task)?.iter().all(|s| *s == 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ObjectiveWeights, Point, Uav};

    fn scenario(uavs: Vec<(f64, Vec<f64>)>, required: Vec<f64>) -> Scenario {
        let n = required.len();
        Scenario {
            uavs: uavs
                .into_iter()
                .enumerate()
                .map(|(id, (x, resources))| Uav {
                    id,
                    position: Point::new(x, 0.0),
                    resources,
                    failure_rates: vec![0.0; n],
                    speed: 1.0,
                    selfish: false,
                    contribution_fraction: 1.0,
                })
                .collect(),
            tasks: vec![TaskSpec {
                id: 0,
                position: Point::new(0.0, 0.0),
                required,
            }],
            mu: vec![1.0; n],
            weights: ObjectiveWeights::default(),
            call_radius: 100.0,
            seed: 0,
        }
    }

    #[test]
    fn takes_nearest_until_covered() {
        // leader (id 0) brings nothing; candidates at distance 3, 1, 2.
        let s = scenario(
            vec![(0.5, vec![0.0]), (3.0, vec![2.0]), (1.0, vec![2.0]), (2.0, vec![2.0])],
            vec![4.0],
        );
        let chosen = distance_based(&s, &s.tasks[0], 0, &[], &[1, 2, 3]).unwrap();
        assert_eq!(chosen, vec![2, 3]);
    }

    #[test]
    fn exhausts_candidates_when_nothing_helps() {
        let s = scenario(
            vec![(0.5, vec![0.0, 1.0]), (1.0, vec![0.0, 1.0]), (2.0, vec![0.0, 1.0])],
            vec![3.0, 0.0],
        );
        let chosen = distance_based(&s, &s.tasks[0], 0, &[], &[1, 2]).unwrap();
        assert_eq!(chosen, vec![1, 2]);
    }

    #[test]
    fn single_exact_candidate_suffices() {
        let s = scenario(
            vec![(0.5, vec![0.0]), (1.0, vec![5.0]), (2.0, vec![5.0])],
            vec![5.0],
        );
        assert_eq!(distance_based(&s, &s.tasks[0], 0, &[], &[1, 2]).unwrap(), vec![1]);
    }

    #[test]
    fn covered_leader_recruits_nobody() {
        let s = scenario(vec![(0.5, vec![9.0]), (1.0, vec![5.0])], vec![5.0]);
        assert!(distance_based(&s, &s.tasks[0], 0, &[], &[1]).unwrap().is_empty());
    }
}
