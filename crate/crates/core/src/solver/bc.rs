//! Boundary conditions at the nodes.
//!
//! Every condition is turned into traction forces added to the nodal balance
//! or into linear velocity constraints `v·n = g` carrying a hierarchy rank.
//! Constraints are imposed with Lagrange multipliers; lower ranks win.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::mesh::{MeshTopology, DEFAULT_TAG};
use crate::tensor::{cross, Mat2, Vec2};

/// Wall contact distance tolerance.
pub const CONTACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BcKind {
    FreeTraction,
    /// Traction `T_bc n` with `T_bc = [[txx, txy], [txy, tyy]]`.
    PrescribedTraction {
        txx: f64,
        txy: f64,
        tyy: f64,
    },
    PrescribedVelocity {
        vx: f64,
        vy: f64,
    },
    PrescribedNormalVelocity {
        vn: f64,
    },
    #[serde(alias = "symmetry_line")]
    SymmetryPlane,
    FixedPoint,
    /// Rigid planar wall through `point` with unit `normal` pointing from the
    /// body into the wall.
    EvolvingContact {
        point: [f64; 2],
        normal: [f64; 2],
        #[serde(default = "default_eps_d")]
        eps_d: f64,
    },
}

fn default_eps_d() -> f64 {
    CONTACT_TOLERANCE
}

impl BcKind {
    /// Contact with the default distance tolerance.
    pub fn contact(point: [f64; 2], normal: [f64; 2]) -> Self {
        BcKind::EvolvingContact {
            point,
            normal,
            eps_d: CONTACT_TOLERANCE,
        }
    }

    /// Hierarchy rank; 1 is applied first.
    pub fn rank(&self) -> u8 {
        match self {
            BcKind::FixedPoint | BcKind::EvolvingContact { .. } => 1,
            BcKind::PrescribedVelocity { .. } | BcKind::PrescribedNormalVelocity { .. } => 2,
            BcKind::SymmetryPlane => 3,
            BcKind::PrescribedTraction { .. } | BcKind::FreeTraction => 4,
        }
    }
}

/// `v·n = g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub normal: Vec2,
    pub value: f64,
    pub rank: u8,
}

/// Boundary data gathered at one node for the current geometry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeBc {
    /// Sum of prescribed traction forces.
    pub force: Vec2,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wall {
    pub point: Vec2,
    pub normal: Vec2,
    pub eps_d: f64,
}

impl Wall {
    /// Gap between `x` and the wall; negative when penetrating.
    pub fn distance(&self, x: Vec2) -> f64 {
        (self.point - x).dot(&self.normal)
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryConditions {
    pub kinds: Vec<BcKind>,
    /// Index into `kinds` per boundary face.
    pub face_kind: Vec<usize>,
    pub walls: Vec<Wall>,
    /// Per node: wall index for contact candidates.
    pub node_wall: Vec<Option<usize>>,
}

impl BoundaryConditions {
    /// Maps boundary tags to conditions. Tags without an entry and the default
    /// tag are free-traction faces.
    pub fn new(topo: &MeshTopology, by_tag: &[(String, BcKind)]) -> Result<Self, SolverError> {
        let mut kinds = vec![BcKind::FreeTraction];
        let mut walls = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut wall_of_kind = HashMap::new();
        for (tag, kind) in by_tag {
            if index.contains_key(tag.as_str()) {
                return Err(SolverError::Config(format!(
                    "boundary tag `{tag}` given twice"
                )));
            }
            if let BcKind::EvolvingContact {
                point,
                normal,
                eps_d,
            } = kind
            {
                let n = Vec2::new(normal[0], normal[1]);
                if !(n.norm() > 0.0) {
                    return Err(SolverError::Config(format!(
                        "wall normal for `{tag}` is zero"
                    )));
                }
                wall_of_kind.insert(kinds.len(), walls.len());
                walls.push(Wall {
                    point: Vec2::new(point[0], point[1]),
                    normal: n.normalize(),
                    eps_d: *eps_d,
                });
            }
            index.insert(tag, kinds.len());
            kinds.push(kind.clone());
        }
        let tags = topo.tags();
        for (tag, _) in by_tag {
            if !tags.contains(tag) {
                log::warn!("boundary condition for tag `{tag}` matches no face");
            }
        }
        let face_kind: Vec<usize> = topo
            .boundary_faces
            .iter()
            .map(|bf| {
                if bf.tag == DEFAULT_TAG {
                    0
                } else {
                    index.get(bf.tag.as_str()).copied().unwrap_or(0)
                }
            })
            .collect();
        let mut node_wall = vec![None; topo.num_nodes];
        for (bf, &k) in topo.boundary_faces.iter().zip(&face_kind) {
            if let Some(&w) = wall_of_kind.get(&k) {
                for &p in &bf.nodes {
                    node_wall[p] = Some(w);
                }
            }
        }
        Ok(Self {
            kinds,
            face_kind,
            walls,
            node_wall,
        })
    }

    /// All boundary faces are free.
    pub fn free(topo: &MeshTopology) -> Self {
        Self::new(topo, &[]).expect("empty condition list is valid")
    }

    pub fn has_contact(&self) -> bool {
        !self.walls.is_empty()
    }

    /// Forces and constraints at `node`. Contact faces produce a wall
    /// constraint only when `contact_active[node]` is set.
    pub fn node_bc(
        &self,
        topo: &MeshTopology,
        coords: &[Vec2],
        node: usize,
        contact_active: &[bool],
    ) -> NodeBc {
        let mut out = NodeBc::default();
        let mut raw: Vec<(Constraint, f64)> = Vec::new();
        for &bi in &topo.node_boundary_faces[node] {
            let bf = &topo.boundary_faces[bi];
            let d = coords[bf.nodes[1]] - coords[bf.nodes[0]];
            let len = d.norm();
            let n = Vec2::new(d.y, -d.x) / len;
            let half = 0.5 * len;
            let kind = &self.kinds[self.face_kind[bi]];
            let rank = kind.rank();
            match kind {
                BcKind::FreeTraction => {}
                BcKind::PrescribedTraction { txx, txy, tyy } => {
                    out.force += Mat2::new(*txx, *txy, *txy, *tyy) * n * half;
                }
                BcKind::PrescribedVelocity { vx, vy } => {
                    raw.push((
                        Constraint {
                            normal: Vec2::x(),
                            value: *vx,
                            rank,
                        },
                        half,
                    ));
                    raw.push((
                        Constraint {
                            normal: Vec2::y(),
                            value: *vy,
                            rank,
                        },
                        half,
                    ));
                }
                BcKind::PrescribedNormalVelocity { vn } => raw.push((
                    Constraint {
                        normal: n,
                        value: *vn,
                        rank,
                    },
                    half,
                )),
                BcKind::SymmetryPlane => raw.push((
                    Constraint {
                        normal: n,
                        value: 0.0,
                        rank,
                    },
                    half,
                )),
                BcKind::FixedPoint => {
                    raw.push((
                        Constraint {
                            normal: Vec2::x(),
                            value: 0.0,
                            rank,
                        },
                        half,
                    ));
                    raw.push((
                        Constraint {
                            normal: Vec2::y(),
                            value: 0.0,
                            rank,
                        },
                        half,
                    ));
                }
                BcKind::EvolvingContact { .. } => {
                    if contact_active[node] {
                        let w = &self.walls[self.node_wall[node].expect("contact node has a wall")];
                        raw.push((
                            Constraint {
                                normal: w.normal,
                                value: 0.0,
                                rank,
                            },
                            half,
                        ));
                    }
                }
            }
        }
        out.constraints = merge_parallel(raw);
        out.constraints.sort_by_key(|c| c.rank);
        out
    }
}

/// Length-weighted merge of same-rank constraints with nearly parallel normals.
fn merge_parallel(raw: Vec<(Constraint, f64)>) -> Vec<Constraint> {
    // angle below which two normals are treated as the same direction (30°)
    const PARALLEL: f64 = 0.5;
    let mut groups: Vec<(u8, Vec2, f64)> = Vec::new();
    for (c, w) in raw {
        let hit = groups
            .iter_mut()
            .find(|(r, n, _)| *r == c.rank && cross(n.normalize(), c.normal).abs() < PARALLEL);
        match hit {
            Some((_, n, g)) => {
                let s = if n.dot(&c.normal) < 0.0 { -1.0 } else { 1.0 };
                *n += c.normal * (s * w);
                *g += s * c.value * w;
            }
            None => groups.push((c.rank, c.normal * w, c.value * w)),
        }
    }
    groups
        .into_iter()
        .map(|(rank, n, g)| {
            // consistent data v·n_i = g_i gives v·n̂ = Σ w g_i / |Σ w n_i|
            let len = n.norm();
            Constraint {
                normal: n / len,
                value: g / len,
                rank,
            }
        })
        .collect()
}

/// Resolved node velocity and the constraint reaction `R = M v − rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSolution {
    pub v: Vec2,
    pub reaction: Vec2,
}

/// Minimizes `½ vᵀMv − rhs·v` under the constraints, taken in rank order.
/// Dependent constraints of a higher rank are dropped; conflicting ones of the
/// same rank are an error.
pub fn solve_constrained(
    m: &Mat2,
    rhs: Vec2,
    constraints: &[Constraint],
    node: usize,
) -> Result<NodeSolution, SolverError> {
    const TOL: f64 = 1e-10;
    let mut active: Vec<Constraint> = Vec::with_capacity(2);
    for c in constraints {
        let dependent = match active.len() {
            0 => None,
            1 => (cross(active[0].normal, c.normal).abs() < TOL).then(|| {
                let s = active[0].normal.dot(&c.normal).signum();
                ((s * active[0].value - c.value).abs(), active[0].rank)
            }),
            _ => {
                let v = solve_two(&active[0], &active[1]);
                Some(((v.dot(&c.normal) - c.value).abs(), active[1].rank))
            }
        };
        match dependent {
            None => active.push(*c),
            Some((gap, rank)) => {
                let scale = 1.0 + c.value.abs();
                if gap > TOL * scale {
                    if rank == c.rank {
                        return Err(SolverError::ContradictoryBc { node });
                    }
                    log::debug!(
                        "node {node}: rank-{} constraint relaxed by rank-{rank} one",
                        c.rank
                    );
                }
            }
        }
    }
    let v = match active.len() {
        0 => {
            let inv = m
                .try_inverse()
                .filter(|_| m.determinant() > 0.0)
                .ok_or(SolverError::SingularNodalMatrix { node })?;
            inv * rhs
        }
        1 => {
            let n = active[0].normal;
            let t = Vec2::new(-n.y, n.x);
            let mtt = t.dot(&(m * t));
            if !(mtt > 0.0) {
                return Err(SolverError::SingularNodalMatrix { node });
            }
            let g = active[0].value;
            let alpha = (t.dot(&rhs) - g * t.dot(&(m * n))) / mtt;
            n * g + t * alpha
        }
        _ => solve_two(&active[0], &active[1]),
    };
    Ok(NodeSolution {
        v,
        reaction: m * v - rhs,
    })
}

fn solve_two(a: &Constraint, b: &Constraint) -> Vec2 {
    let n = Mat2::new(a.normal.x, a.normal.y, b.normal.x, b.normal.y);
    n.try_inverse()
        .map(|inv| inv * Vec2::new(a.value, b.value))
        .unwrap_or_else(Vec2::zeros)
}
