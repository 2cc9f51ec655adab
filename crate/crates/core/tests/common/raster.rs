use arena_core::world::{AgentPose, Heading, Pitch};
use arena_core::{apply_action, InstanceId, WorldState};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{lab, library, random_action};

const NEAR: f64 = 0.05;

/// Brute-force raster: every box is rotated into the camera frame with
/// yaw/pitch angles, each face is clipped against the near plane, and each
/// cell takes the covering rectangle with the smallest (depth, id).
pub fn oracle(state: &WorldState, width: u32, height: u32) -> Vec<Option<InstanceId>> {
    let pose = state.agent();
    let vp = &state.layout().viewpoints[&pose.viewpoint];
    let eye = [vp.position[0], state.layout().eye_height, vp.position[1]];
    let yaw = match pose.heading {
        Heading::N => 0.0f64,
        Heading::E => 90.0,
        Heading::S => 180.0,
        Heading::W => 270.0,
    }
    .to_radians();
    let pitch = match pose.pitch {
        Pitch::Up => 30.0f64,
        Pitch::Level => 0.0,
        Pitch::Down => -30.0,
    }
    .to_radians();
    let f = (width as f64 / 2.0) / 30f64.to_radians().tan();
    let to_cam = |p: [f64; 3]| -> [f64; 3] {
        let (x, y, z) = (p[0] - eye[0], p[1] - eye[1], p[2] - eye[2]);
        let xr = x * yaw.cos() - z * yaw.sin();
        let zr = x * yaw.sin() + z * yaw.cos();
        let yp = y * pitch.cos() - zr * pitch.sin();
        let zp = y * pitch.sin() + zr * pitch.cos();
        [xr, yp, zp]
    };
    let dist = |a: [f64; 3]| {
        ((a[0] - eye[0]).powi(2) + (a[1] - eye[1]).powi(2) + (a[2] - eye[2]).powi(2)).sqrt()
    };

    let mut boxes: Vec<(f64, InstanceId, [f64; 4])> = Vec::new();
    for o in state.objects().values() {
        if o.room != pose.room || state.is_hidden(&o.id) {
            continue;
        }
        // draw depth: own distance, kept in front of each enclosing container
        let mut depth = f64::INFINITY;
        let mut chain: Vec<&arena_core::world::ObjectInstance> = state.ancestors(&o.id);
        chain.reverse();
        chain.push(o);
        for a in chain {
            depth = dist(a.bounds.center).min(depth - 0.001);
        }
        if depth > 10.0 {
            continue;
        }
        let (c, s) = (o.bounds.center, o.bounds.size);
        let lo = [c[0] - s[0] / 2.0, c[1] - s[1] / 2.0, c[2] - s[2] / 2.0];
        let hi = [c[0] + s[0] / 2.0, c[1] + s[1] / 2.0, c[2] + s[2] / 2.0];
        let corner = |i: usize, j: usize, k: usize| {
            to_cam([[lo[0], hi[0]][i], [lo[1], hi[1]][j], [lo[2], hi[2]][k]])
        };
        let faces = [
            [
                corner(0, 0, 0),
                corner(0, 1, 0),
                corner(0, 1, 1),
                corner(0, 0, 1),
            ],
            [
                corner(1, 0, 0),
                corner(1, 1, 0),
                corner(1, 1, 1),
                corner(1, 0, 1),
            ],
            [
                corner(0, 0, 0),
                corner(1, 0, 0),
                corner(1, 0, 1),
                corner(0, 0, 1),
            ],
            [
                corner(0, 1, 0),
                corner(1, 1, 0),
                corner(1, 1, 1),
                corner(0, 1, 1),
            ],
            [
                corner(0, 0, 0),
                corner(1, 0, 0),
                corner(1, 1, 0),
                corner(0, 1, 0),
            ],
            [
                corner(0, 0, 1),
                corner(1, 0, 1),
                corner(1, 1, 1),
                corner(0, 1, 1),
            ],
        ];
        let mut pts = Vec::new();
        for face in faces {
            // Sutherland-Hodgman against z >= NEAR
            for i in 0..4 {
                let (a, b) = (face[i], face[(i + 1) % 4]);
                let (ina, inb) = (a[2] >= NEAR, b[2] >= NEAR);
                if ina {
                    pts.push(a);
                }
                if ina != inb {
                    let t = (NEAR - a[2]) / (b[2] - a[2]);
                    pts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), NEAR]);
                }
            }
        }
        if pts.is_empty() {
            continue;
        }
        let mut r = [
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ];
        for p in pts {
            let sx = width as f64 / 2.0 + f * p[0] / p[2];
            let sy = height as f64 / 2.0 - f * p[1] / p[2];
            r = [r[0].min(sx), r[1].max(sx), r[2].min(sy), r[3].max(sy)];
        }
        boxes.push((depth, o.id.clone(), r));
    }

    let mut out = vec![None; (width * height) as usize];
    for y in 0..height {
        for x in 0..width {
            let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
            let best = boxes
                .iter()
                .filter(|(_, _, r)| r[0] <= cx && cx <= r[1] && r[2] <= cy && cy <= r[3])
                .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            out[(y * width + x) as usize] = best.map(|b| b.1.clone());
        }
    }
    out
}

pub fn random_states(n: usize, seed: u64) -> Vec<WorldState> {
    let lib = library();
    let base = lab(&lib);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vps: Vec<_> = base.layout().viewpoints.values().cloned().collect();
    let mut out = Vec::with_capacity(n);
    let mut s = base.clone();
    while out.len() < n {
        for _ in 0..rng.gen_range(1..6) {
            s = apply_action(&s, &random_action(&s, &mut rng)).0;
        }
        let vp = vps.choose(&mut rng).unwrap();
        let pose = AgentPose {
            room: vp.room.clone(),
            viewpoint: vp.id.clone(),
            heading: *Heading::ALL.choose(&mut rng).unwrap(),
            pitch: *Pitch::ALL.choose(&mut rng).unwrap(),
        };
        out.push(s.with_agent(pose).unwrap());
    }
    out
}
