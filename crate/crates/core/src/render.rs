//! Egocentric symbolic rendering.
//!
//! Every visible object is an axis-aligned box projected through a pinhole
//! camera to its screen-space bounding rectangle. A box is drawn with a single
//! depth (distance from the camera to the box center, pulled just in front of
//! its container for contained objects) and rasters are filled with the
//! painter's algorithm, so each cell ends up holding the nearest box whose
//! rectangle covers the cell center.

use serde::{Deserialize, Serialize};

use crate::error::ArenaError;
use crate::ids::InstanceId;
use crate::world::{Aabb, AgentPose, Layout, WorldState};

pub const HORIZONTAL_FOV_DEGREES: f64 = 60.0;
pub const NEAR_PLANE: f64 = 0.05;
pub const FAR_PLANE: f64 = 10.0;
/// Maximum mask depth, in millimetres, at which an object can be interacted
/// with.
pub const REACH_MM: u16 = 1500;
/// Depth offset that keeps contents drawn in front of their container.
pub const CONTAINED_DEPTH_BIAS: f64 = 0.001;

/// Pinhole camera for one agent pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: [f64; 3],
    pub forward: [f64; 3],
    pub right: [f64; 3],
    pub up: [f64; 3],
    pub focal: f64,
    pub width: u32,
    pub height: u32,
}

/// Screen-space rectangle in continuous pixel coordinates (y grows down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenRect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl ScreenRect {
    /// A cell is covered when its center lies inside the closed rectangle.
    pub fn covers_cell(&self, x: u32, y: u32) -> bool {
        let cx = x as f64 + 0.5;
        let cy = y as f64 + 0.5;
        self.x0 <= cx && cx <= self.x1 && self.y0 <= cy && cy <= self.y1
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = sub(a, b);
    dot(d, d).sqrt()
}

impl Camera {
    pub fn new(layout: &Layout, pose: &AgentPose, width: u32, height: u32) -> Camera {
        let vp = &layout.viewpoints[&pose.viewpoint];
        let [hx, hz] = pose.heading.vector();
        let p = pose.pitch.degrees().to_radians();
        let (sp, cp) = p.sin_cos();
        Camera {
            position: [vp.position[0], layout.eye_height, vp.position[1]],
            forward: [cp * hx, sp, cp * hz],
            right: [hz, 0.0, -hx],
            up: [-sp * hx, cp, -sp * hz],
            focal: (width as f64 / 2.0) / (HORIZONTAL_FOV_DEGREES.to_radians() / 2.0).tan(),
            width,
            height,
        }
    }

    /// Camera-space coordinates (right, up, forward) of a world point.
    pub fn to_camera(&self, p: [f64; 3]) -> [f64; 3] {
        let d = sub(p, self.position);
        [dot(d, self.right), dot(d, self.up), dot(d, self.forward)]
    }

    /// Bounding rectangle of the part of `b` in front of the near plane.
    pub fn project_box(&self, b: &Aabb) -> Option<ScreenRect> {
        let corners = b.corners().map(|c| self.to_camera(c));
        let mut pts: Vec<[f64; 3]> = corners
            .iter()
            .copied()
            .filter(|c| c[2] >= NEAR_PLANE)
            .collect();
        // Box edges join corners differing in exactly one bit.
        for i in 0..8usize {
            for bit in [1usize, 2, 4] {
                let j = i | bit;
                if j == i {
                    continue;
                }
                let (a, c) = (corners[i], corners[j]);
                if (a[2] < NEAR_PLANE) != (c[2] < NEAR_PLANE) {
                    let t = (NEAR_PLANE - a[2]) / (c[2] - a[2]);
                    pts.push([
                        a[0] + t * (c[0] - a[0]),
                        a[1] + t * (c[1] - a[1]),
                        NEAR_PLANE,
                    ]);
                }
            }
        }
        if pts.is_empty() {
            return None;
        }
        let (w2, h2) = (self.width as f64 / 2.0, self.height as f64 / 2.0);
        let mut rect = ScreenRect {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for p in pts {
            let sx = w2 + self.focal * p[0] / p[2];
            let sy = h2 - self.focal * p[1] / p[2];
            rect.x0 = rect.x0.min(sx);
            rect.x1 = rect.x1.max(sx);
            rect.y0 = rect.y0.min(sy);
            rect.y1 = rect.y1.max(sy);
        }
        Some(rect)
    }

    /// World point at `distance` meters along the ray through pixel
    /// coordinates (`px`, `py`).
    pub fn unproject(&self, px: f64, py: f64, distance: f64) -> [f64; 3] {
        let a = (px - self.width as f64 / 2.0) / self.focal;
        let b = -(py - self.height as f64 / 2.0) / self.focal;
        let mut d = [0.0; 3];
        for (k, v) in d.iter_mut().enumerate() {
            *v = self.forward[k] + a * self.right[k] + b * self.up[k];
        }
        let n = dot(d, d).sqrt();
        [
            self.position[0] + distance * d[0] / n,
            self.position[1] + distance * d[1] / n,
            self.position[2] + distance * d[2] / n,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisibleObject {
    pub id: InstanceId,
    pub class: String,
    /// Number of raster cells in the object's mask.
    pub cells: u32,
    /// Inclusive mask bounding box `[x0, y0, x1, y1]`.
    pub bbox: [u32; 4],
    pub depth_mm: u16,
}

/// Symbolic egocentric frame. `cells[y * width + x]` is 0 for background or
/// `k` for `visible[k - 1]`; `depth_mm` is 0 on background cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub width: u32,
    pub height: u32,
    pub visible: Vec<VisibleObject>,
    pub cells: Vec<u16>,
    pub depth_mm: Vec<u16>,
    pub pose: AgentPose,
    pub tick: u64,
}

impl Observation {
    fn index(&self, x: i64, y: i64) -> Result<usize, ArenaError> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return Err(ArenaError::CoordinateOutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(y as usize * self.width as usize + x as usize)
    }

    /// Instance occupying raster cell (`x`, `y`), if any.
    pub fn object_at(&self, x: i64, y: i64) -> Result<Option<&InstanceId>, ArenaError> {
        let i = self.index(x, y)?;
        Ok(match self.cells[i] {
            0 => None,
            k => Some(&self.visible[k as usize - 1].id),
        })
    }

    pub fn depth_at(&self, x: i64, y: i64) -> Result<Option<u16>, ArenaError> {
        let i = self.index(x, y)?;
        Ok((self.cells[i] != 0).then_some(self.depth_mm[i]))
    }

    pub fn visible_object(&self, id: &InstanceId) -> Option<&VisibleObject> {
        self.visible
            .binary_search_by(|v| v.id.cmp(id))
            .ok()
            .map(|i| &self.visible[i])
    }

    pub fn is_visible(&self, id: &InstanceId) -> bool {
        self.visible_object(id).is_some()
    }

    /// Visible and within interaction reach.
    pub fn in_reach(&self, id: &InstanceId) -> bool {
        self.visible_object(id)
            .is_some_and(|v| v.depth_mm <= REACH_MM)
    }

    /// Mean (x, y) of the cell centers in an object's mask.
    pub fn mask_centroid(&self, id: &InstanceId) -> Option<(f64, f64)> {
        let k = self.visible.iter().position(|v| &v.id == id)? as u16 + 1;
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for (i, c) in self.cells.iter().enumerate() {
            if *c == k {
                sx += (i % self.width as usize) as f64 + 0.5;
                sy += (i / self.width as usize) as f64 + 0.5;
                n += 1.0;
            }
        }
        (n > 0.0).then(|| (sx / n, sy / n))
    }
}

/// Draw depth of an object: its center distance, pulled in front of every
/// container on its containment chain.
pub fn draw_depth(state: &WorldState, camera: &Camera, id: &InstanceId) -> f64 {
    let mut key = f64::INFINITY;
    for a in state.ancestors(id).iter().rev() {
        key = distance(a.bounds.center, camera.position).min(key - CONTAINED_DEPTH_BIAS);
    }
    let own = distance(state.objects()[id].bounds.center, camera.position);
    own.min(key - CONTAINED_DEPTH_BIAS)
}

/// Objects that may appear in the agent's current view, with their draw
/// depth and screen rectangle.
pub fn drawable_objects(state: &WorldState, camera: &Camera) -> Vec<(InstanceId, f64, ScreenRect)> {
    let room = &state.agent().room;
    state
        .objects()
        .values()
        .filter(|o| &o.room == room && !state.is_hidden(&o.id))
        .filter_map(|o| {
            let depth = draw_depth(state, camera, &o.id);
            if depth > FAR_PLANE {
                return None;
            }
            camera
                .project_box(&o.bounds)
                .map(|r| (o.id.clone(), depth, r))
        })
        .collect()
}

/// Renders the agent's egocentric view at the given raster size.
pub fn render_observation(state: &WorldState, width: u32, height: u32) -> Observation {
    let camera = Camera::new(state.layout(), state.agent(), width, height);
    let mut boxes = drawable_objects(state, &camera);
    // far to near; on equal depth the smaller id is painted last and wins
    boxes.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| b.0.cmp(&a.0)));

    let n = (width * height) as usize;
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (bi, (_, _, rect)) in boxes.iter().enumerate() {
        let xs = (rect.x0 - 0.5).floor().max(0.0) as i64;
        let xe = ((rect.x1 - 0.5).ceil() as i64).min(width as i64 - 1);
        let ys = (rect.y0 - 0.5).floor().max(0.0) as i64;
        let ye = ((rect.y1 - 0.5).ceil() as i64).min(height as i64 - 1);
        for y in ys..=ye {
            for x in xs..=xe {
                if rect.covers_cell(x as u32, y as u32) {
                    owner[y as usize * width as usize + x as usize] = Some(bi);
                }
            }
        }
    }

    let mut stats: Vec<Option<(u32, [u32; 4])>> = vec![None; boxes.len()];
    for (i, o) in owner.iter().enumerate() {
        if let Some(bi) = o {
            let (x, y) = ((i % width as usize) as u32, (i / width as usize) as u32);
            let s = stats[*bi].get_or_insert((0, [x, y, x, y]));
            s.0 += 1;
            s.1 = [s.1[0].min(x), s.1[1].min(y), s.1[2].max(x), s.1[3].max(y)];
        }
    }
    let mut order: Vec<usize> = (0..boxes.len()).filter(|b| stats[*b].is_some()).collect();
    order.sort_by(|a, b| boxes[*a].0.cmp(&boxes[*b].0));
    let mut slot = vec![0u16; boxes.len()];
    let mut visible = Vec::with_capacity(order.len());
    for (k, bi) in order.iter().enumerate() {
        slot[*bi] = k as u16 + 1;
        let (cells, bbox) = stats[*bi].unwrap();
        let id = boxes[*bi].0.clone();
        visible.push(VisibleObject {
            class: state.objects()[&id].class.clone(),
            id,
            cells,
            bbox,
            depth_mm: depth_to_mm(boxes[*bi].1),
        });
    }
    let cells: Vec<u16> = owner.iter().map(|o| o.map_or(0, |bi| slot[bi])).collect();
    let depth_mm = owner
        .iter()
        .map(|o| o.map_or(0, |bi| depth_to_mm(boxes[bi].1)))
        .collect();
    Observation {
        width,
        height,
        visible,
        cells,
        depth_mm,
        pose: state.agent().clone(),
        tick: state.tick(),
    }
}

pub fn depth_to_mm(depth: f64) -> u16 {
    (depth * 1000.0).round().clamp(0.0, u16::MAX as f64) as u16
}

/// Renders at the raster size configured for the scene.
pub fn render_default(state: &WorldState) -> Observation {
    let r = state.raster();
    render_observation(state, r.width, r.height)
}

/// Pure lookup of the raster cell at (`x`, `y`).
pub fn object_at(obs: &Observation, x: i64, y: i64) -> Result<Option<&InstanceId>, ArenaError> {
    obs.object_at(x, y)
}
