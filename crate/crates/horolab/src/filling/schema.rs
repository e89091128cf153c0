//! JSON schemas for sphere inputs and filled outputs.
//!
//! Documented, versioned formats (the `schemas/` directory in the
//! repository carries the field-by-field descriptions):
//!
//! * `horolab.sphere.v1` — a 0- or 1-sphere on the horosphere: order
//!   `n`, dimension `dim` (0 or 1), and `points` as row-major `n x n`
//!   positive-definite determinant-one matrices (two points for a
//!   0-sphere, a cyclic list for a 1-sphere).
//! * `horolab.path.v1` — a filled 0-sphere: parameters, points, and the
//!   length/gauge records.
//! * `horolab.disk.v1` — a filled 1-sphere: the planar mesh, sampled
//!   images, and the recorded constants.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::filling::whitney::{DiskInZ, PathInZ};

#[derive(Debug, Clone)]
pub struct SphereSpec {
    pub n: usize,
    pub dim: usize,
    pub points: Vec<DMatrix<f64>>,
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn rows_to_matrix(rows: &serde_json::Value, n: usize) -> Result<DMatrix<f64>> {
    let arr = rows
        .as_array()
        .ok_or_else(|| Error::SchemaViolation("point must be an array of rows".into()))?;
    if arr.len() != n {
        return Err(Error::SchemaViolation(format!(
            "point has {} rows, expected {}",
            arr.len(),
            n
        )));
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, row) in arr.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::SchemaViolation("row must be an array".into()))?;
        if row.len() != n {
            return Err(Error::SchemaViolation(format!(
                "row {} has {} entries, expected {}",
                i,
                row.len(),
                n
            )));
        }
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = v
                .as_f64()
                .ok_or_else(|| Error::SchemaViolation("entries must be numbers".into()))?;
        }
    }
    Ok(m)
}

pub fn sphere_to_json(n: usize, dim: usize, points: &[DMatrix<f64>]) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "schema": "horolab.sphere.v1",
        "n": n,
        "dim": dim,
        "points": points.iter().map(matrix_to_rows).collect::<Vec<_>>(),
    }))
    .expect("sphere serialization cannot fail")
}

pub fn sphere_from_json(text: &str) -> Result<SphereSpec> {
    let v: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::SchemaViolation(format!("sphere file: {}", e)))?;
    if v["schema"] != "horolab.sphere.v1" {
        return Err(Error::SchemaViolation(format!(
            "unknown sphere schema `{}`",
            v["schema"]
        )));
    }
    let n = v["n"]
        .as_u64()
        .ok_or_else(|| Error::SchemaViolation("missing order n".into()))? as usize;
    let dim = v["dim"]
        .as_u64()
        .ok_or_else(|| Error::SchemaViolation("missing dimension".into()))? as usize;
    let pts = v["points"]
        .as_array()
        .ok_or_else(|| Error::SchemaViolation("missing points".into()))?;
    match dim {
        0 if pts.len() == 2 => {}
        1 if pts.len() >= 3 => {}
        _ => {
            return Err(Error::SchemaViolation(format!(
                "dimension {} with {} points is not a valid sphere",
                dim,
                pts.len()
            )))
        }
    }
    let points: Result<Vec<DMatrix<f64>>> = pts.iter().map(|p| rows_to_matrix(p, n)).collect();
    Ok(SphereSpec {
        n,
        dim,
        points: points?,
    })
}

pub fn path_to_json(path: &PathInZ) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "schema": "horolab.path.v1",
        "params": path.params,
        "points": path.points.iter().map(|p| matrix_to_rows(p.matrix())).collect::<Vec<_>>(),
        "records": {
            "length": path.length,
            "lip": path.lip,
            "max_level_residual": path.max_level_residual,
        },
    }))
    .expect("path serialization cannot fail")
}

pub fn disk_to_json(disk: &DiskInZ) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "schema": "horolab.disk.v1",
        "mesh": disk.mesh,
        "triangles": disk.triangles,
        "samples": disk
            .samples
            .iter()
            .map(|(dom, p)| serde_json::json!({
                "domain": dom,
                "point": matrix_to_rows(p.matrix()),
            }))
            .collect::<Vec<_>>(),
        "records": {
            "lip": disk.lip,
            "c_shape": disk.c_shape,
            "max_level_residual": disk.max_level_residual,
            "boundary_residual": disk.boundary_residual,
        },
    }))
    .expect("disk serialization cannot fail")
}
