//! Per-session visual memory: where each instance was last seen.

use std::collections::BTreeMap;

use arena_core::render::Camera;
use arena_core::world::{Heading, Layout, Pitch};
use arena_core::{InstanceId, Observation, RoomId, ViewpointId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sighting {
    pub id: InstanceId,
    pub class: String,
    pub room: RoomId,
    pub viewpoint: ViewpointId,
    pub heading: Heading,
    pub pitch: Pitch,
    pub tick: u64,
    /// World position estimated from the mask centroid and depth.
    pub position: [f64; 3],
    pub depth_mm: u16,
    /// Approximate horizontal and vertical half-size, from the mask extent.
    pub half_extent: [f64; 2],
    /// Whether the position estimate came from a mask cut off by the frame
    /// edge (or was inferred rather than seen), which biases the centroid.
    pub clipped: bool,
}

/// Last-seen map: room -> class -> instance -> sighting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VisualMemory {
    rooms: BTreeMap<RoomId, BTreeMap<String, BTreeMap<InstanceId, Sighting>>>,
}

impl VisualMemory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records every visible object (latest sighting wins) and forgets
    /// objects previously seen from this exact pose that are no longer there.
    /// A position estimated from a clipped mask never replaces one estimated
    /// from a whole mask.
    pub fn observe(&mut self, layout: &Layout, obs: &Observation) {
        let camera = Camera::new(layout, &obs.pose, obs.width, obs.height);
        let pose = &obs.pose;
        let stale: Vec<InstanceId> = self
            .iter()
            .filter(|s| {
                s.viewpoint == pose.viewpoint
                    && s.heading == pose.heading
                    && s.pitch == pose.pitch
                    && !obs.is_visible(&s.id)
            })
            .map(|s| s.id.clone())
            .collect();
        for id in stale {
            self.forget(&id);
        }
        for v in &obs.visible {
            let Some((cx, cy)) = obs.mask_centroid(&v.id) else {
                continue;
            };
            let depth = v.depth_mm as f64 / 1000.0;
            let mut position = camera.unproject(cx, cy, depth);
            let [x0, y0, x1, y1] = v.bbox;
            let mut half_extent = [
                (x1 - x0 + 1) as f64 / 2.0 * depth / camera.focal,
                (y1 - y0 + 1) as f64 / 2.0 * depth / camera.focal,
            ];
            let mut clipped = x0 == 0 || y0 == 0 || x1 + 1 == obs.width || y1 + 1 == obs.height;
            if clipped {
                if let Some(old) = self
                    .get(&v.id)
                    .filter(|o| !o.clipped && o.room == pose.room)
                {
                    position = old.position;
                    half_extent = old.half_extent;
                    clipped = false;
                }
            }
            self.insert(Sighting {
                id: v.id.clone(),
                class: v.class.clone(),
                room: pose.room.clone(),
                viewpoint: pose.viewpoint.clone(),
                heading: pose.heading,
                pitch: pose.pitch,
                tick: obs.tick,
                position,
                depth_mm: v.depth_mm,
                half_extent,
                clipped,
            });
        }
    }

    pub fn insert(&mut self, s: Sighting) {
        self.forget(&s.id);
        self.rooms
            .entry(s.room.clone())
            .or_default()
            .entry(s.class.clone())
            .or_default()
            .insert(s.id.clone(), s);
    }

    pub fn forget(&mut self, id: &InstanceId) -> Option<Sighting> {
        let mut found = None;
        for classes in self.rooms.values_mut() {
            for ids in classes.values_mut() {
                if let Some(s) = ids.remove(id) {
                    found = Some(s);
                }
            }
            classes.retain(|_, ids| !ids.is_empty());
        }
        self.rooms.retain(|_, c| !c.is_empty());
        found
    }

    pub fn get(&self, id: &InstanceId) -> Option<&Sighting> {
        self.iter().find(|s| &s.id == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Sighting> {
        self.rooms
            .values()
            .flat_map(|c| c.values())
            .flat_map(|i| i.values())
    }

    /// Sightings of a class across all rooms.
    pub fn of_class<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a Sighting> + 'a {
        self.rooms
            .values()
            .filter_map(move |c| c.get(class))
            .flat_map(|i| i.values())
    }

    pub fn in_room(&self, room: &RoomId) -> impl Iterator<Item = &Sighting> {
        self.rooms
            .get(room)
            .into_iter()
            .flat_map(|c| c.values())
            .flat_map(|i| i.values())
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.rooms.is_empty()
    }
}

/// Functional form of [`VisualMemory::observe`].
pub fn update_visual_memory(
    belief: &VisualMemory,
    layout: &Layout,
    obs: &Observation,
) -> VisualMemory {
    let mut next = belief.clone();
    next.observe(layout, obs);
    next
}
