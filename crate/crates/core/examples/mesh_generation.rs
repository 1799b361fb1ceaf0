//! Structured meshing of a rectangle layout, uniform refinement and a Gmsh
//! round trip.

use foilfem::mesh::{generate, import_msh, write_msh, Layout, RegionRect};

fn main() -> foilfem::Result<()> {
    let layout = Layout {
        regions: vec![
            RegionRect::new("winding", [0.010, 0.020], [-0.010, 0.010]),
            RegionRect::new("shield", [0.024, 0.025], [-0.015, 0.015]).with_h_rho(2.5e-4),
        ],
        fill: Some(RegionRect::new("air", [0.0, 0.030], [-0.020, 0.020])),
    };
    let mut mesh = generate(&layout, 1e-3)?;
    for level in 0..3 {
        if level > 0 {
            mesh = mesh.refine_uniform();
        }
        println!(
            "level {level}: {} nodes, {} triangles, h_max {:.3e} m",
            mesh.n_nodes(),
            mesh.n_triangles(),
            mesh.max_edge_length()
        );
    }
    for (k, name) in mesh.region_names().iter().enumerate() {
        println!("  region {name:<8} area {:.4e} m2", mesh.region_area(k));
    }

    let dir = std::env::temp_dir().join("foilfem_mesh_example");
    std::fs::create_dir_all(&dir).map_err(|e| foilfem::Error::Domain(e.to_string()))?;
    let path = dir.join("layout.msh");
    write_msh(&mesh, &path)?;
    let back = import_msh(&path)?;
    println!(
        "msh round trip: {} nodes, {} triangles -> {}",
        back.n_nodes(),
        back.n_triangles(),
        path.display()
    );
    Ok(())
}
