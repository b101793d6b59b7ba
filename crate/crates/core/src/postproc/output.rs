use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{PostprocError, Solution};
use crate::fespace::Component;

/// Named columns of floating-point rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.headers.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Vertex coordinates and the values of every component there.
pub fn nodal_table(sol: &Solution) -> Table {
    let mut headers = vec!["x".to_string(), "y".to_string()];
    headers.extend(Component::ALL.iter().map(|c| c.name().to_string()));
    let values: Vec<&[f64]> = Component::ALL.iter().map(|&c| sol.vertex_values(c)).collect();
    let mut t = Table::new(headers);
    for (i, v) in sol.mesh().vertices().iter().enumerate() {
        let mut row = vec![v[0], v[1]];
        row.extend(values.iter().map(|col| col[i]));
        t.push(row);
    }
    t
}

pub fn write_csv(table: &Table, path: impl AsRef<Path>) -> Result<(), PostprocError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Legacy ASCII VTK unstructured grid with vertex values of all fields.
pub fn write_vtk(sol: &Solution, path: impl AsRef<Path>) -> Result<(), PostprocError> {
    let mesh = sol.mesh();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "r13fem solution")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for v in mesh.vertices() {
        writeln!(w, "{:e} {:e} 0", v[0], v[1])?;
    }
    writeln!(w, "CELLS {} {}", mesh.n_cells(), 4 * mesh.n_cells())?;
    for c in mesh.cells() {
        writeln!(w, "3 {} {} {}", c[0], c[1], c[2])?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.n_cells())?;
    for _ in 0..mesh.n_cells() {
        writeln!(w, "5")?;
    }
    let val = |c: Component| sol.vertex_values(c);
    writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
    for (name, c) in [("theta", Component::Theta), ("p", Component::P)] {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in val(c) {
            writeln!(w, "{v:e}")?;
        }
    }
    for (name, cx, cy) in [("u", Component::Ux, Component::Uy), ("s", Component::Sx, Component::Sy)] {
        writeln!(w, "VECTORS {name} double")?;
        for (x, y) in val(cx).iter().zip(val(cy)) {
            writeln!(w, "{x:e} {y:e} 0")?;
        }
    }
    // xx, yy, zz, xy, yz, xz as in the symmetric-tensor convention of ParaView.
    writeln!(w, "FIELD stress 1")?;
    writeln!(w, "sigma 6 {} double", mesh.n_vertices())?;
    let (xx, xy, yy) = (val(Component::SigmaXX), val(Component::SigmaXY), val(Component::SigmaYY));
    for i in 0..mesh.n_vertices() {
        writeln!(w, "{:e} {:e} {:e} {:e} 0 0", xx[i], yy[i], -(xx[i] + yy[i]), xy[i])?;
    }
    w.flush()?;
    Ok(())
}
