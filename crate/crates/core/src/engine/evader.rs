use rand::Rng;
use serde::{Deserialize, Serialize};

use super::predict_lion;
use crate::error::{Error, Result};
use crate::metric::{GeodesicPath, MetricSpace, Point, SpaceDescriptor};

/// Evader strategy, as written in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvaderSpec {
    /// Never moves.
    Stationary {},
    /// Picks, among `k` candidate points at distance ε and staying put, the
    /// one farthest from where the Lion will be at the next moment.
    GreedyMaxDistance { k: usize },
    /// Moves ε directly away from the Lion, stopping at the carrier's edge.
    RadialFlee {},
    /// Circle only: moves ε per interval in a fixed orientation (+1 or -1).
    CircleRunner { orientation: f64 },
    /// Walks the waypoint polyline at unit speed. When the list is exhausted
    /// the evader stops, or starts over if `cycle` is set.
    Scripted {
        waypoints: Vec<Vec<f64>>,
        #[serde(default)]
        cycle: bool,
    },
    /// Loops forever along the space's built-in runner route.
    ScriptedRunner {},
}

impl EvaderSpec {
    pub fn label(&self) -> String {
        match self {
            EvaderSpec::Stationary {} => "stationary".into(),
            EvaderSpec::GreedyMaxDistance { k } => format!("greedy_max_distance(k={k})"),
            EvaderSpec::RadialFlee {} => "radial_flee".into(),
            EvaderSpec::CircleRunner { orientation } => format!("circle_runner({orientation:+})"),
            EvaderSpec::Scripted { waypoints, .. } => format!("scripted({} waypoints)", waypoints.len()),
            EvaderSpec::ScriptedRunner {} => "scripted_runner".into(),
        }
    }
}

/// The Man's motion over one interval: consecutive geodesic legs walked at
/// unit speed, of total length at most ε. Empty means staying put.
#[derive(Clone, Debug)]
pub struct ManPlan {
    start: Point,
    legs: Vec<GeodesicPath>,
}

impl ManPlan {
    pub fn stay(at: Point) -> Self {
        ManPlan { start: at, legs: Vec::new() }
    }

    fn single(path: GeodesicPath) -> Self {
        ManPlan { start: path.start().clone(), legs: vec![path] }
    }

    pub fn length(&self) -> f64 {
        self.legs.iter().map(GeodesicPath::length).sum()
    }

    /// Position at local time `s`.
    pub fn position(&self, s: f64) -> Point {
        let mut left = s;
        for leg in &self.legs {
            if left < leg.length() {
                return leg.advance(left);
            }
            left -= leg.length();
        }
        self.target()
    }

    pub fn target(&self) -> Point {
        self.legs.last().map_or_else(|| self.start.clone(), |leg| leg.end().clone())
    }
}

/// A running evader: a strategy together with its internal state.
#[derive(Clone, Debug)]
pub struct Evader {
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Stationary,
    Greedy { k: usize },
    RadialFlee,
    CircleRunner { orientation: f64 },
    Scripted { waypoints: Vec<Point>, cycle: bool, next: usize },
}

impl Evader {
    pub fn new<S: MetricSpace>(spec: &EvaderSpec, space: &S) -> Result<Self> {
        let kind = match spec {
            EvaderSpec::Stationary {} => Kind::Stationary,
            EvaderSpec::GreedyMaxDistance { k } => {
                if *k == 0 {
                    return Err(Error::InvalidConfig("greedy_max_distance needs k >= 1".into()));
                }
                Kind::Greedy { k: *k }
            }
            EvaderSpec::RadialFlee {} => Kind::RadialFlee,
            EvaderSpec::CircleRunner { orientation } => {
                if !matches!(space.descriptor(), SpaceDescriptor::Circle { .. }) {
                    return Err(Error::InvalidConfig("circle_runner requires a circle space".into()));
                }
                if *orientation != 1.0 && *orientation != -1.0 {
                    return Err(Error::InvalidConfig("circle_runner orientation must be +1 or -1".into()));
                }
                Kind::CircleRunner { orientation: *orientation }
            }
            EvaderSpec::Scripted { waypoints, cycle } => {
                let waypoints = waypoints
                    .iter()
                    .map(|w| space.point(w.clone()))
                    .collect::<Result<Vec<_>>>()?;
                Kind::Scripted { waypoints, cycle: *cycle, next: 0 }
            }
            EvaderSpec::ScriptedRunner {} => {
                Kind::Scripted { waypoints: space.runner_route(), cycle: true, next: 0 }
            }
        };
        Ok(Evader { kind })
    }

    /// Plan the Man's motion for the interval starting now.
    pub fn plan<S: MetricSpace, R: Rng + ?Sized>(
        &mut self,
        space: &S,
        man: &Point,
        lion: &Point,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<ManPlan> {
        let target = match &mut self.kind {
            Kind::Stationary => return Ok(ManPlan::stay(man.clone())),
            Kind::Greedy { k } => {
                let next_lion = predict_lion(space, lion, man, epsilon)?;
                let mut best = man.clone();
                let mut best_d = space.distance(&next_lion, man)?;
                for cand in space.step_candidates(man, epsilon, *k, rng) {
                    let d = space.distance(&next_lion, &cand)?;
                    if d > best_d {
                        best_d = d;
                        best = cand;
                    }
                }
                best
            }
            Kind::RadialFlee => space.flee_target(lion, man, epsilon),
            Kind::CircleRunner { orientation } => {
                let c = match space.descriptor() {
                    SpaceDescriptor::Circle { circumference } => *circumference,
                    _ => unreachable!("checked at construction"),
                };
                let step = epsilon.min(c / 2.0);
                let x = crate::metric::wrap_arc(man.coords()[0] + *orientation * step, c);
                space.point(vec![x])?
            }
            Kind::Scripted { waypoints, cycle, next } => {
                return scripted_plan(space, man, waypoints, *cycle, next, epsilon);
            }
        };
        let path = space.geodesic(man, &target)?;
        if path.length() > epsilon {
            let clipped = path.advance(epsilon);
            return Ok(ManPlan::single(space.geodesic(man, &clipped)?));
        }
        Ok(ManPlan::single(path))
    }
}

fn scripted_plan<S: MetricSpace>(
    space: &S,
    man: &Point,
    waypoints: &[Point],
    cycle: bool,
    next: &mut usize,
    epsilon: f64,
) -> Result<ManPlan> {
    let mut plan = ManPlan::stay(man.clone());
    let mut at = man.clone();
    let mut budget = epsilon;
    let mut idle_laps = 0;
    while budget > 0.0 && !waypoints.is_empty() {
        if *next >= waypoints.len() {
            if !cycle {
                break;
            }
            *next = 0;
        }
        let leg = space.geodesic(&at, &waypoints[*next])?;
        if leg.length() <= budget {
            budget -= leg.length();
            at = leg.end().clone();
            *next += 1;
            if leg.length() > 0.0 {
                plan.legs.push(leg);
                idle_laps = 0;
            } else {
                idle_laps += 1;
                if idle_laps > waypoints.len() {
                    break;
                }
            }
        } else {
            let stop = leg.advance(budget);
            plan.legs.push(space.geodesic(&at, &stop)?);
            budget = 0.0;
        }
    }
    Ok(plan)
}

/// One planning call: the Man's position at the end of the interval.
pub fn evader_move<S: MetricSpace, R: Rng + ?Sized>(
    evader: &mut Evader,
    space: &S,
    man: &Point,
    lion: &Point,
    epsilon: f64,
    rng: &mut R,
) -> Result<Point> {
    Ok(evader.plan(space, man, lion, epsilon, rng)?.target())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;
    use crate::spaces::{CircleSpace, PlanarSpace};

    #[test]
    fn stationary_stays() {
        let disk = PlanarSpace::euclidean_disk(1.0).unwrap();
        let m = disk.point(vec![0.3, 0.1]).unwrap();
        let l = disk.point(vec![0.0, 0.0]).unwrap();
        let mut ev = Evader::new(&EvaderSpec::Stationary {}, &disk).unwrap();
        assert_eq!(evader_move(&mut ev, &disk, &m, &l, 0.1, &mut rng_for(0, 0)).unwrap(), m);
    }

    #[test]
    fn radial_flee_on_the_plane() {
        let plane = PlanarSpace::plane();
        let l = plane.point(vec![0.0, 0.0]).unwrap();
        let m = plane.point(vec![1.0, 0.0]).unwrap();
        let mut ev = Evader::new(&EvaderSpec::RadialFlee {}, &plane).unwrap();
        let t = evader_move(&mut ev, &plane, &m, &l, 0.1, &mut rng_for(0, 0)).unwrap();
        assert!((t.coords()[0] - 1.1).abs() < 1e-15 && t.coords()[1] == 0.0);
    }

    #[test]
    fn circle_runner_steps_forward() {
        let c = CircleSpace::new(1.0).unwrap();
        let m = c.point(vec![0.5]).unwrap();
        let l = c.point(vec![0.1]).unwrap();
        let mut ev = Evader::new(&EvaderSpec::CircleRunner { orientation: 1.0 }, &c).unwrap();
        let t = evader_move(&mut ev, &c, &m, &l, 0.05, &mut rng_for(0, 0)).unwrap();
        assert!((t.coords()[0] - 0.55).abs() < 1e-15);
        let disk = PlanarSpace::euclidean_disk(1.0).unwrap();
        assert!(Evader::new(&EvaderSpec::CircleRunner { orientation: 1.0 }, &disk).is_err());
        assert!(Evader::new(&EvaderSpec::CircleRunner { orientation: 0.5 }, &c).is_err());
    }

    #[test]
    fn greedy_moves_at_most_epsilon_and_beats_staying() {
        let disk = PlanarSpace::euclidean_disk(1.0).unwrap();
        let l = disk.point(vec![-0.5, 0.0]).unwrap();
        let m = disk.point(vec![0.2, 0.1]).unwrap();
        let mut ev = Evader::new(&EvaderSpec::GreedyMaxDistance { k: 32 }, &disk).unwrap();
        let t = evader_move(&mut ev, &disk, &m, &l, 0.1, &mut rng_for(1, 0)).unwrap();
        assert!(disk.distance(&m, &t).unwrap() <= 0.1 + 1e-12);
        let next_lion = predict_lion(&disk, &l, &m, 0.1).unwrap();
        assert!(disk.distance(&next_lion, &t).unwrap() > disk.distance(&next_lion, &m).unwrap());
    }

    #[test]
    fn scripted_walks_the_polyline_then_stops() {
        let disk = PlanarSpace::euclidean_disk(1.0).unwrap();
        let spec = EvaderSpec::Scripted { waypoints: vec![vec![0.05, 0.0], vec![0.05, 0.5]], cycle: false };
        let mut ev = Evader::new(&spec, &disk).unwrap();
        let mut m = disk.point(vec![0.0, 0.0]).unwrap();
        let l = disk.point(vec![-0.5, 0.0]).unwrap();
        let mut rng = rng_for(0, 0);
        let plan = ev.plan(&disk, &m, &l, 0.1, &mut rng).unwrap();
        assert!((plan.length() - 0.1).abs() < 1e-15);
        m = plan.target();
        assert!((m.coords()[0] - 0.05).abs() < 1e-15 && (m.coords()[1] - 0.05).abs() < 1e-15);
        for _ in 0..10 {
            m = evader_move(&mut ev, &disk, &m, &l, 0.1, &mut rng).unwrap();
        }
        assert_eq!(m.coords(), &[0.05, 0.5]);
    }

    #[test]
    fn scripted_rejects_points_outside_the_space() {
        let disk = PlanarSpace::euclidean_disk(1.0).unwrap();
        let spec = EvaderSpec::Scripted { waypoints: vec![vec![2.0, 0.0]], cycle: false };
        assert!(Evader::new(&spec, &disk).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let s: EvaderSpec = serde_json::from_str(r#"{"kind":"greedy_max_distance","k":32}"#).unwrap();
        assert_eq!(s, EvaderSpec::GreedyMaxDistance { k: 32 });
        let s: EvaderSpec = serde_json::from_str(r#"{"kind":"scripted","waypoints":[[0,0]]}"#).unwrap();
        assert!(matches!(s, EvaderSpec::Scripted { cycle: false, .. }));
        assert!(serde_json::from_str::<EvaderSpec>(r#"{"kind":"stationary","k":1}"#).is_err());
    }
}
