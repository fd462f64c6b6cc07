use nalgebra::Vector3;

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Vector3::repeat(f64::INFINITY),
            max: Vector3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Vector3<f64>>) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.grow(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x
    }

    pub fn grow(&mut self, p: &Vector3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb { min: self.min.inf(&o.min), max: self.max.sup(&o.max) }
    }

    pub fn center(&self) -> Vector3<f64> {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vector3<f64> {
        self.max - self.min
    }

    /// Squared distance from a point to the box (zero inside).
    pub fn distance_sq(&self, p: &Vector3<f64>) -> f64 {
        let mut d = 0.0;
        for i in 0..3 {
            let v = if p[i] < self.min[i] {
                self.min[i] - p[i]
            } else if p[i] > self.max[i] {
                p[i] - self.max[i]
            } else {
                0.0
            };
            d += v * v;
        }
        d
    }

    /// Squared gap between two boxes (zero when overlapping).
    pub fn box_distance_sq(&self, o: &Aabb) -> f64 {
        let mut d = 0.0;
        for i in 0..3 {
            let v = (self.min[i] - o.max[i]).max(o.min[i] - self.max[i]).max(0.0);
            d += v * v;
        }
        d
    }

    /// Slab test; returns the entry parameter if the ray hits within `[0, t_max]`.
    pub fn ray_entry(&self, origin: &Vector3<f64>, inv_dir: &Vector3<f64>, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for i in 0..3 {
            if inv_dir[i].is_infinite() {
                // Parallel to this slab pair: inside or never.
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            let a = (self.min[i] - origin[i]) * inv_dir[i];
            let b = (self.max[i] - origin[i]) * inv_dir[i];
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Clone, Debug)]
struct Node {
    aabb: Aabb,
    // Leaf: `count > 0`, primitives `indices[start..start + count]`.
    // Inner: `count == 0`, children at `start` and `start + 1`.
    start: u32,
    count: u32,
}

/// Bounding volume hierarchy over an indexed set of primitives.
#[derive(Clone, Debug, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    indices: Vec<u32>,
}

const LEAF_SIZE: usize = 4;

impl Bvh {
    /// Builds a median-split hierarchy from per-primitive boxes.
    pub fn build(boxes: &[Aabb]) -> Self {
        let mut bvh = Bvh { nodes: Vec::new(), indices: (0..boxes.len() as u32).collect() };
        if boxes.is_empty() {
            return bvh;
        }
        let centers: Vec<Vector3<f64>> = boxes.iter().map(|b| b.center()).collect();
        bvh.nodes.push(Node { aabb: Aabb::empty(), start: 0, count: 0 });
        let mut stack = vec![(0usize, 0usize, boxes.len())];
        while let Some((node, lo, hi)) = stack.pop() {
            let aabb = bvh.indices[lo..hi]
                .iter()
                .fold(Aabb::empty(), |acc, &i| acc.union(&boxes[i as usize]));
            if hi - lo <= LEAF_SIZE {
                bvh.nodes[node] = Node { aabb, start: lo as u32, count: (hi - lo) as u32 };
                continue;
            }
            let cb = Aabb::from_points(bvh.indices[lo..hi].iter().map(|&i| &centers[i as usize]));
            let ext = cb.extent();
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            bvh.indices[lo..hi].sort_by(|&a, &b| {
                centers[a as usize][axis]
                    .total_cmp(&centers[b as usize][axis])
                    .then(a.cmp(&b))
            });
            let mid = (lo + hi) / 2;
            let left = bvh.nodes.len();
            bvh.nodes.push(Node { aabb: Aabb::empty(), start: 0, count: 0 });
            bvh.nodes.push(Node { aabb: Aabb::empty(), start: 0, count: 0 });
            bvh.nodes[node] = Node { aabb, start: left as u32, count: 0 };
            stack.push((left, lo, mid));
            stack.push((left + 1, mid, hi));
        }
        bvh
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes.first().map(|n| n.aabb).unwrap_or_else(Aabb::empty)
    }

    /// Nearest primitive hit along a ray. `hit(prim, t_max)` returns the
    /// primitive's hit parameter when it is below `t_max`.
    pub fn ray_nearest<F>(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, mut hit: F) -> Option<(u32, f64)>
    where
        F: FnMut(u32, f64) -> Option<f64>,
    {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = dir.map(|d| 1.0 / d);
        let mut best: Option<(u32, f64)> = None;
        let mut t_max = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.aabb.ray_entry(origin, &inv, t_max).is_none() {
                continue;
            }
            if node.count > 0 {
                for &p in &self.indices[node.start as usize..(node.start + node.count) as usize] {
                    if let Some(t) = hit(p, t_max) {
                        if t < t_max || (t == t_max && best.is_some_and(|(bp, _)| p < bp)) {
                            t_max = t;
                            best = Some((p, t));
                        }
                    }
                }
            } else {
                let l = node.start as usize;
                let r = l + 1;
                let tl = self.nodes[l].aabb.ray_entry(origin, &inv, t_max);
                let tr = self.nodes[r].aabb.ray_entry(origin, &inv, t_max);
                match (tl, tr) {
                    (Some(a), Some(b)) => {
                        if a <= b {
                            stack.push(r);
                            stack.push(l);
                        } else {
                            stack.push(l);
                            stack.push(r);
                        }
                    }
                    (Some(_), None) => stack.push(l),
                    (None, Some(_)) => stack.push(r),
                    (None, None) => {}
                }
            }
        }
        best
    }

    /// Visits every primitive whose box the ray enters.
    pub fn ray_visit<F>(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, mut visit: F)
    where
        F: FnMut(u32),
    {
        if self.nodes.is_empty() {
            return;
        }
        let inv = dir.map(|d| 1.0 / d);
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.aabb.ray_entry(origin, &inv, f64::INFINITY).is_none() {
                continue;
            }
            if node.count > 0 {
                for &p in &self.indices[node.start as usize..(node.start + node.count) as usize] {
                    visit(p);
                }
            } else {
                stack.push(node.start as usize);
                stack.push(node.start as usize + 1);
            }
        }
    }

    /// Primitive minimizing `dist_sq(prim)`, searched best-first with box pruning.
    /// Ties resolve to the smaller primitive index.
    pub fn closest<F>(&self, p: &Vector3<f64>, mut dist_sq: F) -> Option<(u32, f64)>
    where
        F: FnMut(u32) -> f64,
    {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(u32, f64)> = None;
        let mut best_d = f64::INFINITY;
        let mut stack = vec![(0usize, self.nodes[0].aabb.distance_sq(p))];
        while let Some((ni, bd)) = stack.pop() {
            if bd > best_d {
                continue;
            }
            let node = &self.nodes[ni];
            if node.count > 0 {
                for &prim in &self.indices[node.start as usize..(node.start + node.count) as usize] {
                    let d = dist_sq(prim);
                    if d < best_d || (d == best_d && best.is_some_and(|(bp, _)| prim < bp)) {
                        best_d = d;
                        best = Some((prim, d));
                    }
                }
            } else {
                let l = node.start as usize;
                let r = l + 1;
                let dl = self.nodes[l].aabb.distance_sq(p);
                let dr = self.nodes[r].aabb.distance_sq(p);
                if dl <= dr {
                    stack.push((r, dr));
                    stack.push((l, dl));
                } else {
                    stack.push((l, dl));
                    stack.push((r, dr));
                }
            }
        }
        best
    }

    /// Minimum of `pair_dist(a, b, bound)` over primitive pairs of two hierarchies,
    /// pruned by box distance. Stops early once the minimum drops to
    /// `stop_below`; pairs at or beyond `cap` are ignored, so the result is
    /// `min(true minimum, cap)`. With `slack > 0` node pairs are also pruned
    /// once `(1 + slack)·box distance` reaches the current best, and the
    /// result `d` only guarantees `true minimum ≥ d / (1 + slack)`.
    /// `pair_dist` may return any value `≥ bound` for pairs not closer than `bound`.
    pub fn pair_min<F>(&self, other: &Bvh, stop_below: f64, cap: f64, slack: f64, mut pair_dist: F) -> f64
    where
        F: FnMut(u32, u32, f64) -> f64,
    {
        if self.nodes.is_empty() || other.nodes.is_empty() {
            return cap;
        }
        let mut best = cap;
        let mut stack = vec![(0usize, 0usize, 0.0f64)];
        let grow = 1.0 + slack;
        while let Some((a, b, bd)) = stack.pop() {
            if bd * grow >= best {
                continue;
            }
            let na = &self.nodes[a];
            let nb = &other.nodes[b];
            let children = match (na.count > 0, nb.count > 0) {
                (true, true) => {
                    for &pa in &self.indices[na.start as usize..(na.start + na.count) as usize] {
                        for &pb in &other.indices[nb.start as usize..(nb.start + nb.count) as usize] {
                            let d = pair_dist(pa, pb, best / grow);
                            if d < best {
                                best = d;
                                if best <= stop_below {
                                    return best;
                                }
                            }
                        }
                    }
                    continue;
                }
                (true, false) => [(a, nb.start as usize), (a, nb.start as usize + 1)],
                (false, true) => [(na.start as usize, b), (na.start as usize + 1, b)],
                (false, false) => {
                    // Split the larger box.
                    if na.aabb.extent().norm_squared() >= nb.aabb.extent().norm_squared() {
                        [(na.start as usize, b), (na.start as usize + 1, b)]
                    } else {
                        [(a, nb.start as usize), (a, nb.start as usize + 1)]
                    }
                }
            };
            let d: [f64; 2] = children.map(|(x, y)| self.nodes[x].aabb.box_distance_sq(&other.nodes[y].aabb).sqrt());
            // Nearer pair on top of the stack.
            let (first, second) = if d[0] <= d[1] { (0, 1) } else { (1, 0) };
            for k in [second, first] {
                if d[k] * grow < best {
                    stack.push((children[k].0, children[k].1, d[k]));
                }
            }
        }
        best
    }

    /// Visits primitives whose boxes intersect `query`.
    pub fn visit_overlapping<F>(&self, query: &Aabb, mut visit: F)
    where
        F: FnMut(u32),
    {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.aabb.box_distance_sq(query) > 0.0 {
                continue;
            }
            if node.count > 0 {
                for &p in &self.indices[node.start as usize..(node.start + node.count) as usize] {
                    visit(p);
                }
            } else {
                stack.push(node.start as usize);
                stack.push(node.start as usize + 1);
            }
        }
    }
}
