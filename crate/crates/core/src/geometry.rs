//! Integer-grid geometry.
//!
//! A [`Region`] denotes the set of integer points it contains; all
//! boundaries are closed. `intersects` and `includes` are computed
//! analytically but agree exactly with point-by-point evaluation over the
//! grid, which is the normative semantics. Approximation is directional:
//! [`overapprox`](Region::overapprox) never loses a point,
//! [`underapprox`](Region::underapprox) never invents one, so safety
//! verdicts transfer from the abstraction to the concrete region.

use serde::{Deserialize, Serialize};

use crate::model::{AtomValue, Tick};

/// A region of the integer plane.
///
/// Invariants: `Box` corners are sorted (`x1 <= x2`, `y1 <= y2`, see
/// [`Region::rect`]), `Circle` radii are non-negative and `Union` lists
/// are non-empty. The parser and the scenario builders only produce such
/// regions; code constructing variants directly must uphold this.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Point { x: i64, y: i64 },
    Box { x1: i64, y1: i64, x2: i64, y2: i64 },
    Circle { cx: i64, cy: i64, r: i64 },
    Union(Vec<Region>),
}

impl Region {
    /// An axis-aligned box with corners sorted into canonical order.
    pub fn rect(x1: i64, y1: i64, x2: i64, y2: i64) -> Region {
        Region::Box { x1: x1.min(x2), y1: y1.min(y2), x2: x1.max(x2), y2: y1.max(y2) }
    }

    /// The region denoted by an occupancy atom, `None` for other atoms.
    pub fn from_atom(atom: &AtomValue) -> Option<Region> {
        match *atom {
            AtomValue::OccupyPoint(x, y) => Some(Region::Point { x, y }),
            AtomValue::OccupyBox(x1, y1, x2, y2) => Some(Region::rect(x1, y1, x2, y2)),
            AtomValue::OccupyCircle(cx, cy, r) => Some(Region::Circle { cx, cy, r }),
            _ => None,
        }
    }

    /// True when the integer point `(x, y)` lies in the region.
    pub fn contains_point(&self, x: i64, y: i64) -> bool {
        match self {
            Region::Point { x: px, y: py } => x == *px && y == *py,
            Region::Box { x1, y1, x2, y2 } => x >= *x1 && x <= *x2 && y >= *y1 && y <= *y2,
            Region::Circle { cx, cy, r } => dist_sq(x, y, *cx, *cy) <= r * r,
            Region::Union(members) => members.iter().any(|m| m.contains_point(x, y)),
        }
    }

    /// The tightest axis-aligned bounding box, as `(x1, y1, x2, y2)`.
    pub fn bbox(&self) -> (i64, i64, i64, i64) {
        match self {
            Region::Point { x, y } => (*x, *y, *x, *y),
            Region::Box { x1, y1, x2, y2 } => (*x1, *y1, *x2, *y2),
            Region::Circle { cx, cy, r } => (cx - r, cy - r, cx + r, cy + r),
            Region::Union(members) => {
                let mut acc = members[0].bbox();
                for m in &members[1..] {
                    let b = m.bbox();
                    acc = (acc.0.min(b.0), acc.1.min(b.1), acc.2.max(b.2), acc.3.max(b.3));
                }
                acc
            }
        }
    }

    /// True when the two regions share at least one integer point.
    pub fn intersects(&self, other: &Region) -> bool {
        match (self, other) {
            (Region::Union(members), _) => members.iter().any(|m| m.intersects(other)),
            (_, Region::Union(members)) => members.iter().any(|m| self.intersects(m)),
            (Region::Point { x, y }, _) => other.contains_point(*x, *y),
            (_, Region::Point { x, y }) => self.contains_point(*x, *y),
            (Region::Box { .. }, Region::Box { .. }) => {
                let (ax1, ay1, ax2, ay2) = self.bbox();
                let (bx1, by1, bx2, by2) = other.bbox();
                ax1 <= bx2 && bx1 <= ax2 && ay1 <= by2 && by1 <= ay2
            }
            (Region::Box { x1, y1, x2, y2 }, Region::Circle { cx, cy, r })
            | (Region::Circle { cx, cy, r }, Region::Box { x1, y1, x2, y2 }) => {
                let nx = (*cx).clamp(*x1, *x2);
                let ny = (*cy).clamp(*y1, *y2);
                dist_sq(nx, ny, *cx, *cy) <= r * r
            }
            (
                Region::Circle { cx: ax, cy: ay, r: ar },
                Region::Circle { cx: bx, cy: by, r: br },
            ) => {
                let reach = ar + br;
                if dist_sq(*ax, *ay, *bx, *by) > reach * reach {
                    return false;
                }
                // The real discs overlap; look for an integer witness in
                // the overlap of the two bounding boxes.
                let x_lo = (ax - ar).max(bx - br);
                let x_hi = (ax + ar).min(bx + br);
                let y_lo = (ay - ar).max(by - br);
                let y_hi = (ay + ar).min(by + br);
                for x in x_lo..=x_hi {
                    for y in y_lo..=y_hi {
                        if dist_sq(x, y, *ax, *ay) <= ar * ar && dist_sq(x, y, *bx, *by) <= br * br
                        {
                            return true;
                        }
                    }
                }
                false
            }
        }
    }

    /// True when every integer point of `inner` lies in `self`.
    pub fn includes(&self, inner: &Region) -> bool {
        match (self, inner) {
            (_, Region::Union(members)) => members.iter().all(|m| self.includes(m)),
            (_, Region::Point { x, y }) => self.contains_point(*x, *y),
            (Region::Box { .. }, Region::Box { .. }) => {
                let (ox1, oy1, ox2, oy2) = self.bbox();
                let (ix1, iy1, ix2, iy2) = inner.bbox();
                ox1 <= ix1 && oy1 <= iy1 && ix2 <= ox2 && iy2 <= oy2
            }
            // The circle's bounding box is realized by integer points of
            // the circle, so box-includes-circle reduces to the boxes.
            (Region::Box { x1, y1, x2, y2 }, Region::Circle { cx, cy, r }) => {
                *x1 <= cx - r && *y1 <= cy - r && cx + r <= *x2 && cy + r <= *y2
            }
            (Region::Circle { .. }, Region::Box { x1, y1, x2, y2 }) => {
                self.contains_point(*x1, *y1)
                    && self.contains_point(*x1, *y2)
                    && self.contains_point(*x2, *y1)
                    && self.contains_point(*x2, *y2)
            }
            (
                Region::Circle { cx: ox, cy: oy, r: or_ },
                Region::Circle { cx: ix, cy: iy, r: ir },
            ) => {
                if or_ >= ir {
                    let slack = or_ - ir;
                    if dist_sq(*ox, *oy, *ix, *iy) <= slack * slack {
                        return true;
                    }
                }
                self.includes_by_scan(inner)
            }
            _ => self.includes_by_scan(inner),
        }
    }

    fn includes_by_scan(&self, inner: &Region) -> bool {
        let (x1, y1, x2, y2) = inner.bbox();
        for x in x1..=x2 {
            for y in y1..=y2 {
                if inner.contains_point(x, y) && !self.contains_point(x, y) {
                    return false;
                }
            }
        }
        true
    }

    /// A region containing every point of `self`: circles widen to their
    /// bounding box, unions to the common bounding box; points and boxes
    /// are already exact.
    pub fn overapprox(&self) -> Region {
        match self {
            Region::Point { .. } | Region::Box { .. } => self.clone(),
            Region::Circle { .. } | Region::Union(_) => {
                let (x1, y1, x2, y2) = self.bbox();
                Region::Box { x1, y1, x2, y2 }
            }
        }
    }

    /// A region contained in every point of `self`: circles shrink to the
    /// largest inscribed aligned square, unions to the member whose
    /// shrinkage keeps the most points; points and boxes are already exact.
    pub fn underapprox(&self) -> Region {
        match self {
            Region::Point { .. } | Region::Box { .. } => self.clone(),
            Region::Circle { cx, cy, r } => {
                let s = inscribed_half_side(*r);
                Region::Box { x1: cx - s, y1: cy - s, x2: cx + s, y2: cy + s }
            }
            Region::Union(members) => {
                let mut best: Option<(Region, u128)> = None;
                for m in members {
                    let candidate = m.underapprox();
                    let count = candidate.point_count();
                    match &best {
                        Some((_, best_count)) if *best_count >= count => {}
                        _ => best = Some((candidate, count)),
                    }
                }
                best.expect("union regions are non-empty").0
            }
        }
    }

    /// The number of integer points in the region.
    pub fn point_count(&self) -> u128 {
        match self {
            Region::Point { .. } => 1,
            Region::Box { x1, y1, x2, y2 } => {
                ((x2 - x1 + 1) as u128) * ((y2 - y1 + 1) as u128)
            }
            Region::Circle { r, .. } => {
                let mut count: u128 = 0;
                for dy in -r..=*r {
                    let span = (r * r - dy * dy).isqrt();
                    count += (2 * span + 1) as u128;
                }
                count
            }
            Region::Union(_) => {
                let (x1, y1, x2, y2) = self.bbox();
                let mut count: u128 = 0;
                for x in x1..=x2 {
                    for y in y1..=y2 {
                        if self.contains_point(x, y) {
                            count += 1;
                        }
                    }
                }
                count
            }
        }
    }

    /// The occupancy atom denoting this region; `None` for unions, which
    /// have no single-atom form.
    pub fn to_atom(&self) -> Option<AtomValue> {
        match *self {
            Region::Point { x, y } => Some(AtomValue::OccupyPoint(x, y)),
            Region::Box { x1, y1, x2, y2 } => Some(AtomValue::OccupyBox(x1, y1, x2, y2)),
            Region::Circle { cx, cy, r } => Some(AtomValue::OccupyCircle(cx, cy, r)),
            Region::Union(_) => None,
        }
    }

    /// Maps the region onto the grid of `resolution`-sized cells at time
    /// `t`. Cell `(i, j)` covers `[i*res, i*res + res - 1]` in x and the
    /// same in y, so cells are aligned to the origin. In
    /// [`ApproxMode::Over`] every cell touching the region is kept, in
    /// [`ApproxMode::Under`] only cells lying entirely inside it.
    pub fn discretize(&self, t: Tick, resolution: u32, mode: ApproxMode) -> PointSet4D {
        let res = i64::from(resolution.max(1));
        let (bx1, by1, bx2, by2) = self.bbox();
        let mut out = PointSet4D::new();
        for i in div_floor(bx1, res)..=div_floor(bx2, res) {
            for j in div_floor(by1, res)..=div_floor(by2, res) {
                let cell = Region::Box {
                    x1: i * res,
                    y1: j * res,
                    x2: i * res + res - 1,
                    y2: j * res + res - 1,
                };
                let keep = match mode {
                    ApproxMode::Over => self.intersects(&cell),
                    ApproxMode::Under => self.includes(&cell),
                };
                if keep {
                    out.insert(GridPoint { t, x: i, y: j });
                }
            }
        }
        out
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::Point { x, y } => write!(f, "Point({x}, {y})"),
            Region::Box { x1, y1, x2, y2 } => write!(f, "Box({x1}, {y1}, {x2}, {y2})"),
            Region::Circle { cx, cy, r } => write!(f, "Circle({cx}, {cy}, {r})"),
            Region::Union(members) => {
                write!(f, "Union(")?;
                for (i, m) in members.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Which side a discretization or approximation may err on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ApproxMode {
    /// Keep everything that might be occupied.
    Over,
    /// Keep only what is certainly occupied.
    Under,
}

fn dist_sq(ax: i64, ay: i64, bx: i64, by: i64) -> i64 {
    let dx = ax - bx;
    let dy = ay - by;
    dx * dx + dy * dy
}

/// Largest `s` such that the square of half-side `s` around the centre
/// stays inside a circle of radius `r`, i.e. `2*s*s <= r*r`.
fn inscribed_half_side(r: i64) -> i64 {
    let mut s = ((r as f64) / std::f64::consts::SQRT_2).floor() as i64;
    while 2 * (s + 1) * (s + 1) <= r * r {
        s += 1;
    }
    while s > 0 && 2 * s * s > r * r {
        s -= 1;
    }
    s
}

/// Floor division, correct for negative numerators.
pub(crate) fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if a % b != 0 && (a < 0) != (b < 0) {
        q - 1
    } else {
        q
    }
}

/// One occupied grid cell at one tick. The order is lexicographic in
/// `(t, x, y)`, which fixes the first witness reported by the checkers.
/// Models are planar, so the vertical coordinate is a constant zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub t: Tick,
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub fn z(&self) -> i64 {
        0
    }
}

/// An ordered set of occupied grid cells over time.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PointSet4D {
    points: std::collections::BTreeSet<GridPoint>,
}

impl PointSet4D {
    pub fn new() -> PointSet4D {
        PointSet4D::default()
    }

    pub fn insert(&mut self, p: GridPoint) -> bool {
        self.points.insert(p)
    }

    pub fn contains(&self, p: &GridPoint) -> bool {
        self.points.contains(p)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The least point in `(t, x, y)` order.
    pub fn first(&self) -> Option<GridPoint> {
        self.points.iter().next().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &GridPoint> {
        self.points.iter()
    }

    pub fn union_with(&mut self, other: PointSet4D) {
        self.points.extend(other.points);
    }

    pub fn intersection(&self, other: &PointSet4D) -> PointSet4D {
        let (small, large) =
            if self.len() <= other.len() { (self, other) } else { (other, self) };
        PointSet4D {
            points: small.points.iter().filter(|p| large.points.contains(p)).copied().collect(),
        }
    }
}

impl FromIterator<GridPoint> for PointSet4D {
    fn from_iter<I: IntoIterator<Item = GridPoint>>(iter: I) -> PointSet4D {
        PointSet4D { points: iter.into_iter().collect() }
    }
}

impl IntoIterator for PointSet4D {
    type Item = GridPoint;
    type IntoIter = std::collections::btree_set::IntoIter<GridPoint>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.into_iter()
    }
}
