use std::ffi::{CStr, CString};
use std::ptr;

use heatsparse_ffi::*;

fn last_error() -> Option<String> {
    let p = hs_last_error_message();
    if p.is_null() {
        None
    } else {
        Some(unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
    }
}

fn grid(rows: usize, cols: usize) -> *mut HsGraph {
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { hs_graph_grid(rows, cols, false, 1, &mut g) },
        HsStatus::Ok
    );
    g
}

#[test]
fn triangle_round_trip() {
    let (p, q, w) = ([0usize, 1, 0], [1usize, 2, 2], [1.0, 1.0, 1.0]);
    let mut g = ptr::null_mut();
    let s = unsafe { hs_graph_new(3, p.as_ptr(), q.as_ptr(), w.as_ptr(), 3, &mut g) };
    assert_eq!(s, HsStatus::Ok);
    assert_eq!(last_error(), None);
    assert_eq!(unsafe { hs_graph_vertex_count(g) }, 3);
    assert_eq!(unsafe { hs_graph_edge_count(g) }, 3);

    let mut opt = hs_sparsify_options_default();
    opt.target_sigma2 = 1.0;
    let mut sp = ptr::null_mut();
    assert_eq!(unsafe { hs_sparsify(g, &opt, &mut sp) }, HsStatus::Ok);
    let mut st = HsSparsifierStats::default();
    assert_eq!(unsafe { hs_sparsifier_stats(sp, &mut st) }, HsStatus::Ok);
    assert_eq!(st.edge_count, 3);
    assert!(st.converged);
    assert!((st.sigma2_est - 1.0).abs() < 1e-9);

    let b = [1.0, 0.0, -1.0];
    let mut x = [0.0; 3];
    let mut ss = HsSolveStats::default();
    assert_eq!(
        unsafe { hs_solve(g, sp, b.as_ptr(), x.as_mut_ptr(), 3, 1e-12, 10, &mut ss) },
        HsStatus::Ok
    );
    assert!(ss.converged && ss.relative_residual <= 1e-12);
    assert!((x[0] - 1.0 / 3.0).abs() < 1e-12 && (x[2] + 1.0 / 3.0).abs() < 1e-12);
    unsafe {
        hs_sparsifier_free(sp);
        hs_graph_free(g);
    }
}

#[test]
fn null_arguments_are_reported() {
    let mut g = ptr::null_mut();
    let s = unsafe { hs_graph_new(3, ptr::null(), ptr::null(), ptr::null(), 2, &mut g) };
    assert_eq!(s, HsStatus::NullPointer);
    assert!(g.is_null());
    assert!(last_error().unwrap().contains("null"));
    assert_eq!(
        unsafe { hs_sparsify(ptr::null(), ptr::null(), &mut ptr::null_mut()) },
        HsStatus::NullPointer
    );
    let mut st = HsSparsifierStats::default();
    assert_eq!(
        unsafe { hs_sparsifier_stats(ptr::null(), &mut st) },
        HsStatus::NullPointer
    );
    assert_eq!(unsafe { hs_graph_vertex_count(ptr::null()) }, 0);
    unsafe {
        hs_graph_free(ptr::null_mut());
        hs_sparsifier_free(ptr::null_mut());
    }
}

#[test]
fn invalid_graphs_and_options() {
    let mut g = ptr::null_mut();
    let (p, q, w) = ([0usize], [1usize], [-1.0]);
    let s = unsafe { hs_graph_new(2, p.as_ptr(), q.as_ptr(), w.as_ptr(), 1, &mut g) };
    assert_eq!(s, HsStatus::InvalidGraph);
    assert!(last_error().unwrap().contains("weight"));

    let (p, q, w) = ([0usize], [1usize], [1.0]);
    let s = unsafe { hs_graph_new(4, p.as_ptr(), q.as_ptr(), w.as_ptr(), 1, &mut g) };
    assert_eq!(s, HsStatus::InvalidGraph);
    assert!(last_error().unwrap().contains("disconnected"));

    let g = grid(4, 4);
    let mut sp = ptr::null_mut();
    let mut opt = hs_sparsify_options_default();
    opt.tree = 9;
    assert_eq!(
        unsafe { hs_sparsify(g, &opt, &mut sp) },
        HsStatus::InvalidArgument
    );
    assert!(last_error().unwrap().contains("tree kind"));
    unsafe { hs_graph_free(g) };
}

#[test]
fn mismatched_handles_and_lengths() {
    let a = grid(5, 5);
    let b = grid(6, 6);
    let mut sp = ptr::null_mut();
    assert_eq!(
        unsafe { hs_sparsify(a, ptr::null(), &mut sp) },
        HsStatus::Ok
    );
    let rhs = vec![1.0; 36];
    let mut x = vec![0.0; 36];
    let s = unsafe {
        hs_solve(
            b,
            sp,
            rhs.as_ptr(),
            x.as_mut_ptr(),
            36,
            1e-6,
            100,
            ptr::null_mut(),
        )
    };
    assert_eq!(s, HsStatus::InvalidArgument);
    let mut signs = vec![0i8; 24];
    let s = unsafe { hs_partition(a, sp, 8, 1, signs.as_mut_ptr(), 24, ptr::null_mut()) };
    assert_eq!(s, HsStatus::LengthMismatch);
    unsafe {
        hs_sparsifier_free(sp);
        hs_graph_free(a);
        hs_graph_free(b);
    }
}

#[test]
fn non_convergence_keeps_outputs() {
    let g = grid(30, 30);
    let mut opt = hs_sparsify_options_default();
    opt.target_sigma2 = 1.5;
    opt.max_rounds = 1;
    let mut sp = ptr::null_mut();
    assert_eq!(
        unsafe { hs_sparsify(g, &opt, &mut sp) },
        HsStatus::NotConverged
    );
    assert!(!sp.is_null());
    let b: Vec<f64> = (0..900).map(|i| (i % 5) as f64).collect();
    let mut x = vec![0.0; 900];
    let mut ss = HsSolveStats::default();
    let s = unsafe { hs_solve(g, sp, b.as_ptr(), x.as_mut_ptr(), 900, 1e-14, 2, &mut ss) };
    assert_eq!(s, HsStatus::NotConverged);
    assert_eq!(ss.iterations, 2);
    assert!(x.iter().any(|&v| v != 0.0));
    assert_eq!(ss.projected_component, 2.0);
    unsafe {
        hs_sparsifier_free(sp);
        hs_graph_free(g);
    }
}

#[test]
fn partition_and_mtx_io() {
    let g = grid(8, 16);
    let mut sp = ptr::null_mut();
    assert_eq!(
        unsafe { hs_sparsify(g, ptr::null(), &mut sp) },
        HsStatus::Ok
    );
    let mut signs = vec![0i8; 128];
    let mut ps = HsPartitionStats::default();
    assert_eq!(
        unsafe { hs_partition(g, sp, 8, 42, signs.as_mut_ptr(), 128, &mut ps) },
        HsStatus::Ok
    );
    assert!(signs.iter().all(|&s| s == 1 || s == -1));
    assert_eq!(ps.positive, signs.iter().filter(|&&s| s > 0).count());
    // the long axis is cut: 8 vertical edges
    assert!((ps.cut_weight - 8.0).abs() < 1e-12, "{ps:?}");

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("p.mtx").to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { hs_sparsifier_write_mtx(sp, path.as_ptr()) },
        HsStatus::Ok
    );
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { hs_graph_read_mtx(path.as_ptr(), &mut back) },
        HsStatus::Ok
    );
    let mut st = HsSparsifierStats::default();
    assert_eq!(unsafe { hs_sparsifier_stats(sp, &mut st) }, HsStatus::Ok);
    assert_eq!(unsafe { hs_graph_edge_count(back) }, st.edge_count);

    let missing = CString::new("/nonexistent/graph.mtx").unwrap();
    assert_eq!(
        unsafe { hs_graph_read_mtx(missing.as_ptr(), &mut back) },
        HsStatus::Io
    );
    unsafe {
        hs_graph_free(back);
        hs_sparsifier_free(sp);
        hs_graph_free(g);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(hs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
