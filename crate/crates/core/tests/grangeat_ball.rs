use cbct_radon::drt::drt3;
use cbct_radon::geometry::Geometry;
use cbct_radon::grangeat::{mask_for, radon_from_projections};
use cbct_radon::phantom::{cone_beam_project, Ellipsoid, Phantom};

fn geometry() -> Geometry {
    Geometry {
        sx: 64.0,
        nx: 16,
        su: 256.0,
        nu: 64,
        sp: 1500.0,
        so: 1000.0,
        n_proj: 360,
    }
}

fn ball(r: f64) -> Phantom {
    Phantom {
        sx: 64.0,
        ellipsoids: vec![Ellipsoid {
            center: [0.0; 3],
            semi_axes: [r; 3],
            rotation: 0.0,
            density: 1.0,
        }],
    }
}

#[test]
fn uniform_ball_calibrates_to_unit_scale() {
    let geom = geometry();
    let phantom = ball(20.0);
    let proj = cone_beam_project(&phantom, &geom).unwrap();
    let (radon, mask) = radon_from_projections(&proj, &geom, true).unwrap();
    let truth = drt3(phantom.voxelize_averaged(16, 4).unwrap().view(), geom.dm()).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for ((idx, &masked), &t) in mask.indexed_iter().zip(truth.data.iter()) {
        if !masked {
            num += radon.data[idx] * t;
            den += t * t;
        }
    }
    let scale = num / den;
    println!("least-squares scale {scale}");
    assert!((scale - 1.0).abs() < 0.02, "scale {scale}");
}

#[test]
fn only_the_axial_line_is_unrecoverable_at_n16() {
    let geom = geometry();
    let mask = mask_for(&geom);
    let n = geom.nx;
    assert_eq!(mask.iter().filter(|&&m| m).count(), 3 * n + 1);
    assert!(mask.slice(ndarray::s![2, .., n / 2, n / 2]).iter().all(|&m| m));
}
