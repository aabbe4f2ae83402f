//! Structured triangulations of rectangles used by the built-in test cases.

use super::Mesh;
use crate::error::MeshError;
use crate::tensor::Vec2;

/// Splits an `nx` x `ny` grid of `[x0,x1] x [y0,y1]` into triangles, alternating
/// the diagonal in a checkerboard pattern. Boundary tags are `bottom`, `right`,
/// `top` and `left`.
pub fn rectangle(
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::Empty);
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            coords.push(Vec2::new(
                x0 + (x1 - x0) * i as f64 / nx as f64,
                y0 + (y1 - y0) * j as f64 / ny as f64,
            ));
        }
    }
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                cells.push([a, b, c]);
                cells.push([a, c, d]);
            } else {
                cells.push([a, b, d]);
                cells.push([b, c, d]);
            }
        }
    }
    let mut boundary = Vec::new();
    for i in 0..nx {
        boundary.push((id(i, 0), id(i + 1, 0), "bottom"));
        boundary.push((id(i + 1, ny), id(i, ny), "top"));
    }
    for j in 0..ny {
        boundary.push((id(nx, j), id(nx, j + 1), "right"));
        boundary.push((id(0, j + 1), id(0, j), "left"));
    }
    Mesh::new(coords, &cells, &boundary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_tags() {
        let m = rectangle(0.0, 2.0, 0.0, 1.0, 4, 3).unwrap();
        assert_eq!(m.topology.num_cells(), 24);
        assert_eq!(m.coords.len(), 20);
        assert_eq!(m.topology.boundary_faces.len(), 14);
        assert_eq!(m.topology.tags(), vec!["bottom", "left", "right", "top"]);
        let g = m.geometry().unwrap();
        assert!((g.total_volume() - 2.0).abs() < 1e-14);
    }
}
