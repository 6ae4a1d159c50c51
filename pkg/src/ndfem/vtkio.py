"""Legacy ASCII VTK export of triangulations with point and cell data."""

import numpy as np


def write_vtk(path, mesh, point_data=None, cell_data=None, title="ndfem output"):
    """Write the mesh as an UNSTRUCTURED_GRID of triangles (cell type 5).

    point_data maps names to (V,) arrays; cell_data maps names to (T,)
    scalars or (T, 2) vectors (padded with a zero z component).
    """
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{title}\n")
        fh.write("ASCII\n")
        fh.write("DATASET UNSTRUCTURED_GRID\n")
        V = mesh.n_vertices
        T = mesh.n_triangles
        fh.write(f"POINTS {V} double\n")
        for x, y in mesh.points:
            fh.write(f"{x:.15g} {y:.15g} 0\n")
        fh.write(f"CELLS {T} {4 * T}\n")
        for a, b, c in mesh.tris:
            fh.write(f"3 {a} {b} {c}\n")
        fh.write(f"CELL_TYPES {T}\n")
        fh.write("5\n" * T)
        if point_data:
            fh.write(f"POINT_DATA {V}\n")
            for name, arr in point_data.items():
                arr = np.asarray(arr)
                fh.write(f"SCALARS {name} double 1\n")
                fh.write("LOOKUP_TABLE default\n")
                fh.writelines(f"{v:.15g}\n" for v in arr)
        if cell_data:
            fh.write(f"CELL_DATA {T}\n")
            for name, arr in cell_data.items():
                arr = np.asarray(arr)
                if arr.ndim == 1:
                    fh.write(f"SCALARS {name} double 1\n")
                    fh.write("LOOKUP_TABLE default\n")
                    fh.writelines(f"{v:.15g}\n" for v in arr)
                else:
                    fh.write(f"VECTORS {name} double\n")
                    fh.writelines(f"{v[0]:.15g} {v[1]:.15g} 0\n" for v in arr)
