//! Diagnostics CSV and legacy-VTK snapshots.

use std::fmt::Write;

use colocated_fv::fields::{ScalarP0, VectorP0};
use colocated_fv::mesh::Mesh;
use colocated_fv::scheme::StepDiagnostics;

pub const CSV_HEADER: &str =
    "step,time,kinetic_energy,tilde_h_norm,div_inf,increment_rate,pressure_p1nc_norm,mom_iters,pres_iters";

pub fn diagnostics_csv(series: &[StepDiagnostics]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for d in series {
        let _ = writeln!(
            s,
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{}",
            d.step,
            d.time,
            d.kinetic_energy,
            d.tilde_h_norm,
            d.div_inf,
            d.increment,
            d.pressure_p1nc_norm,
            d.momentum[0].iterations + d.momentum[1].iterations,
            d.pressure.iterations
        );
    }
    s
}

/// ASCII legacy VTK unstructured grid with cell data `velocity` (z = 0) and `pressure`.
pub fn vtk_snapshot(mesh: &Mesh, u: &VectorP0, p: &ScalarP0, title: &str) -> String {
    let verts = mesh.vertices();
    let tris = mesh.triangles();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "{}", title.replace('\n', " "));
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", verts.len());
    for v in verts {
        let _ = writeln!(s, "{:.17e} {:.17e} 0", v.x, v.y);
    }
    let _ = writeln!(s, "CELLS {} {}", tris.len(), 4 * tris.len());
    for t in tris {
        let [a, b, c] = t.vertices;
        let _ = writeln!(s, "3 {a} {b} {c}");
    }
    let _ = writeln!(s, "CELL_TYPES {}", tris.len());
    for _ in tris {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "CELL_DATA {}", tris.len());
    s.push_str("VECTORS velocity double\n");
    for v in &u.values {
        let _ = writeln!(s, "{:.17e} {:.17e} 0", v.x, v.y);
    }
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for q in &p.values {
        let _ = writeln!(s, "{q:.17e}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vtk_sections_have_matching_counts() {
        let m = Mesh::equilateral(1, 2, 1.0).unwrap();
        let u = VectorP0::zeros(&m);
        let p = ScalarP0::constant(&m, 0.5);
        let text = vtk_snapshot(&m, &u, &p, "t");
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert!(text.contains("POINTS 6 double"));
        assert!(text.contains("CELLS 4 16"));
        assert!(text.contains("CELL_DATA 4"));
        assert_eq!(lines.iter().filter(|l| **l == "5").count(), 4);
        assert!(text.ends_with("5.00000000000000000e-1\n"));
    }
}
