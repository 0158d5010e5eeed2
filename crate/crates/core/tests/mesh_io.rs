use colocated_fv::mesh::{to_triangle_format, Mesh, MeshError, QualityIssue};
use colocated_fv::verify::perturbed_equilateral;

#[test]
fn perturbed_mesh_survives_a_round_trip() {
    let m = perturbed_equilateral(5, 4, 0.2, 0.06, 3).unwrap();
    let (node, ele) = to_triangle_format(&m);
    let back = Mesh::load(&node, &ele).unwrap();
    assert_eq!(back.n_triangles(), m.n_triangles());
    assert_eq!(back.n_edges(), m.n_edges());
    for (a, b) in m.triangles().iter().zip(back.triangles()) {
        assert!((a.circumcenter - b.circumcenter).norm() < 1e-15);
        assert!((a.area - b.area).abs() < 1e-16);
    }
    assert_eq!(back.h(), m.h());
}

#[test]
fn comments_attributes_and_markers_are_ignored() {
    let node = "# square split in four\n5 2 1 1\n1 0 0 7 1\n2 1 0 7 1\n3 1 1 7 1\n4 0 1 7 1\n5 0.5 0.5 7 0\n";
    let ele = "4 3 1\n1 1 2 5 9\n2 2 3 5 9 # trailing\n3 3 4 5 9\n4 4 1 5 9\n";
    // Right angles at the center make this mesh non-acute, but it still loads.
    let m = Mesh::load(node, ele).unwrap();
    assert_eq!(m.n_triangles(), 4);
    assert_eq!(m.boundary_edges().len(), 4);
    let report = m.validate();
    assert!(!report.passed());
    assert!(report
        .failures
        .iter()
        .any(|f| matches!(f, QualityIssue::NotAcute { .. })));
}

#[test]
fn short_node_file_reports_the_count() {
    let err = Mesh::load("3 2 0 0\n1 0 0\n2 1 0\n", "1 3 0\n1 1 2 3\n").unwrap_err();
    match err {
        MeshError::Parse { file, message, .. } => {
            assert_eq!(file, ".node");
            assert!(message.contains("3 nodes"), "{message}");
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn out_of_range_vertex_is_rejected() {
    let err = Mesh::load("3 2 0 0\n1 0 0\n2 1 0\n3 0.5 0.8\n", "1 3 0\n1 1 2 4\n").unwrap_err();
    assert!(
        matches!(
            err,
            MeshError::Parse {
                file: ".ele",
                line: 2,
                ..
            }
        ),
        "{err}"
    );
}

#[test]
fn three_dimensional_nodes_are_rejected() {
    let err = Mesh::load("1 3 0 0\n1 0 0 0\n", "0 3 0\n").unwrap_err();
    assert!(matches!(
        err,
        MeshError::Parse {
            file: ".node",
            line: 1,
            ..
        }
    ));
}

#[test]
fn refinement_of_a_loaded_mesh_stays_acute() {
    let m = perturbed_equilateral(3, 3, 1.0 / 3.0, 0.05, 11).unwrap();
    let (node, ele) = to_triangle_format(&m);
    let fine = Mesh::load(&node, &ele).unwrap().refine_uniform();
    assert!(fine.validate().passed());
    assert_eq!(fine.n_triangles(), 4 * m.n_triangles());
    assert!((fine.total_area() - m.total_area()).abs() < 1e-14);
    assert!((fine.h() - 0.5 * m.h()).abs() < 1e-14);
}
