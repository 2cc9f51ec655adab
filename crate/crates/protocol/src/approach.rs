//! Choosing a pose from which an estimated object position is in view and
//! within reach, and the navigation actions that reach it.

use arena_core::render::{Camera, REACH_MM};
use arena_core::world::{AgentPose, Heading, Layout, Pitch};
use arena_core::{Action, RoomId};

/// Reach used for planning, slightly inside the simulator's limit.
const PLANNING_REACH: f64 = (REACH_MM as f64 - 60.0) / 1000.0;
/// Pixels of slack required between the projected point and the frame edge.
const EDGE_MARGIN: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub pose: AgentPose,
    pub in_reach: bool,
    /// The estimated center is in frame or the object spans the middle row.
    pub centered: bool,
    pub cost: u32,
    pub distance: f64,
}

fn pitch_steps(from: Pitch, to: Pitch) -> u32 {
    let idx = |p: Pitch| Pitch::ALL.iter().position(|x| *x == p).unwrap() as i32;
    (idx(from) - idx(to)).unsigned_abs()
}

fn turn_steps(from: Heading, to: Heading) -> u32 {
    let q = from.quarter_turns_to(to) as u32;
    q.min(4 - q)
}

fn in_frame(cam: &Camera, p: [f64; 3]) -> bool {
    let c = cam.to_camera(p);
    if c[2] <= 0.1 {
        return false;
    }
    let sx = cam.focal * c[0] / c[2];
    let sy = cam.focal * c[1] / c[2];
    sx.abs() <= cam.width as f64 / 2.0 - EDGE_MARGIN
        && sy.abs() <= cam.height as f64 / 2.0 - EDGE_MARGIN
}

/// Whether an object centered at `p` with the given horizontal and vertical
/// half-extent shows up in the frame for `pose`; returns the distance to the
/// nearest sample in frame and whether the object is centered: its center is
/// in frame, or it spans the middle row. The center and the middle of each
/// face are sampled.
pub fn sees(
    layout: &Layout,
    pose: &AgentPose,
    (width, height): (u32, u32),
    p: [f64; 3],
    half_extent: [f64; 2],
) -> Option<(f64, bool)> {
    let cam = Camera::new(layout, pose, width, height);
    let [eh, ev] = [half_extent[0] * 0.8, half_extent[1] * 0.8];
    let samples = [
        p,
        [p[0], p[1] + ev, p[2]],
        [p[0], p[1] - ev, p[2]],
        [p[0] + eh, p[1], p[2]],
        [p[0] - eh, p[1], p[2]],
        [p[0], p[1], p[2] + eh],
        [p[0], p[1], p[2] - eh],
    ];
    let dist = |s: &[f64; 3]| {
        let d = [
            s[0] - cam.position[0],
            s[1] - cam.position[1],
            s[2] - cam.position[2],
        ];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    };
    let nearest = samples
        .iter()
        .filter(|s| in_frame(&cam, **s))
        .map(dist)
        .min_by(f64::total_cmp)?;
    let row = |q: [f64; 3]| {
        let c = cam.to_camera(q);
        (c[2] > 0.1).then(|| cam.focal * c[1] / c[2])
    };
    let column_ok = {
        let c = cam.to_camera(p);
        c[2] > 0.1 && (cam.focal * c[0] / c[2]).abs() <= cam.width as f64 / 2.0 - EDGE_MARGIN
    };
    let straddles = match (row(samples[1]), row(samples[2])) {
        (Some(top), Some(bottom)) => top >= 0.0 && bottom <= 0.0,
        _ => false,
    };
    Some((nearest, in_frame(&cam, p) || (column_ok && straddles)))
}

/// Poses in `room` that see `p`, best first: in reach, center in frame,
/// staying at the current viewpoint when in reach, nearest viewpoint, then
/// fewest turns and pitch changes.
pub fn candidates(
    layout: &Layout,
    current: &AgentPose,
    room: &RoomId,
    (width, height): (u32, u32),
    p: [f64; 3],
    half_extent: [f64; 2],
) -> Vec<Candidate> {
    let mut out = Vec::new();
    for vp in layout.viewpoints_in(room) {
        let horizontal = ((vp.position[0] - p[0]).powi(2) + (vp.position[1] - p[2]).powi(2)).sqrt();
        for heading in Heading::ALL {
            for pitch in Pitch::ALL {
                let pose = AgentPose {
                    room: room.clone(),
                    viewpoint: vp.id.clone(),
                    heading,
                    pitch,
                };
                let Some((d, centered)) = sees(layout, &pose, (width, height), p, half_extent)
                else {
                    continue;
                };
                let moved = vp.id != current.viewpoint;
                let cost = moved as u32
                    + turn_steps(current.heading, heading)
                    + pitch_steps(current.pitch, pitch);
                out.push(Candidate {
                    pose,
                    in_reach: d <= PLANNING_REACH,
                    centered,
                    cost,
                    distance: horizontal,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        let key = |c: &Candidate| {
            (
                !c.in_reach,
                !c.centered,
                c.in_reach && c.pose.viewpoint != current.viewpoint,
            )
        };
        key(a)
            .cmp(&key(b))
            .then(a.distance.total_cmp(&b.distance))
            .then(a.cost.cmp(&b.cost))
            .then(a.pose.viewpoint.cmp(&b.pose.viewpoint))
            .then(a.pose.heading.cmp(&b.pose.heading))
            .then(a.pose.pitch.cmp(&b.pose.pitch))
    });
    out
}

/// Navigation actions from `from` to `to`. Travel keeps heading and pitch.
pub fn navigate(from: &AgentPose, to: &AgentPose) -> Vec<Action> {
    let mut out = Vec::new();
    if from.viewpoint != to.viewpoint {
        out.push(Action::GotoViewpoint {
            viewpoint: to.viewpoint.clone(),
        });
    }
    match from.heading.quarter_turns_to(to.heading) {
        0 => {}
        3 => out.push(Action::RotateLeft),
        q => out.extend(std::iter::repeat_n(Action::RotateRight, q as usize)),
    }
    let mut pitch = from.pitch;
    while pitch != to.pitch {
        if pitch.degrees() < to.pitch.degrees() {
            out.push(Action::LookUp);
            pitch = pitch.raised().unwrap();
        } else {
            out.push(Action::LookDown);
            pitch = pitch.lowered().unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pose(vp: &str, heading: Heading, pitch: Pitch) -> AgentPose {
        AgentPose {
            room: "r".into(),
            viewpoint: vp.into(),
            heading,
            pitch,
        }
    }

    #[test]
    fn navigation_uses_shortest_turn() {
        let a = pose("a", Heading::N, Pitch::Level);
        assert_eq!(
            navigate(&a, &pose("a", Heading::W, Pitch::Level)),
            vec![Action::RotateLeft]
        );
        assert_eq!(
            navigate(&a, &pose("b", Heading::S, Pitch::Down)),
            vec![
                Action::GotoViewpoint {
                    viewpoint: "b".into()
                },
                Action::RotateRight,
                Action::RotateRight,
                Action::LookDown
            ]
        );
        assert_eq!(
            navigate(
                &pose("a", Heading::N, Pitch::Down),
                &pose("a", Heading::N, Pitch::Up)
            ),
            vec![Action::LookUp, Action::LookUp]
        );
        assert!(navigate(&a, &a).is_empty());
    }
}
