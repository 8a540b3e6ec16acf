//! Legacy ASCII VTK export for meshes and vertex-based scalar fields.

use super::Mesh;
use std::io::{self, Write};

/// Write `mesh` as a legacy VTK unstructured grid. Each entry of `fields` is
/// a named per-vertex scalar array (e.g. an eigenfunction).
pub fn write_vtk<W: Write>(
    w: &mut W,
    mesh: &Mesh,
    fields: &[(&str, &[f64])],
) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "nodalsym mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;

    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for v in &mesh.vertices {
        writeln!(w, "{:.17e} {:.17e} 0.0", v[0], v[1])?;
    }

    let nt = mesh.n_triangles();
    writeln!(w, "CELLS {} {}", nt, 4 * nt)?;
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "5")?; // VTK_TRIANGLE
    }

    if !fields.is_empty() {
        writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
        for (name, data) in fields {
            assert_eq!(data.len(), mesh.n_vertices(), "field length mismatch");
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for x in *data {
                writeln!(w, "{x:.17e}")?;
            }
        }
    }
    Ok(())
}

/// Convenience wrapper writing straight to a file path.
pub fn write_vtk_file(
    path: &std::path::Path,
    mesh: &Mesh,
    fields: &[(&str, &[f64])],
) -> io::Result<()> {
    let mut file = io::BufWriter::new(std::fs::File::create(path)?);
    write_vtk(&mut file, mesh, fields)
}
