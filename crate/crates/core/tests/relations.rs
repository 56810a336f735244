mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{UnitQuaternion, Vector3};
use pointgen_core::pipeline::Pipeline;
use pointgen_core::procgen::GenConfig;
use pointgen_core::raster::Camera;
use pointgen_core::relations::{self, compute_relations, RelationParams, RelationType};
use pointgen_core::scene::{ObjectInstance, Pose, TriMesh};
use proptest::prelude::*;

fn cube(id: u32, c: [f64; 3], half: [f64; 3], yaw: f64) -> ObjectInstance {
    let h = Vector3::from(half);
    let mesh = Arc::new(TriMesh::cuboid(-h, h));
    let pose = Pose::from_parts(c.into(), UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw));
    ObjectInstance::new(id, "cube", "cube", mesh, pose, false, 0).unwrap()
}

fn cam_at(eye: [f64; 3], target: [f64; 3]) -> Camera {
    let pose = Camera::look_at_pose(eye.into(), target.into()).unwrap();
    Camera::from_vertical_fov(640, 480, 60.0, pose).unwrap()
}

#[test]
fn matches_oracle_on_generated_scenes() {
    let p = Pipeline::with_defaults(GenConfig {
        seed: 11,
        ..Default::default()
    })
    .unwrap();
    let params = RelationParams::default();
    let mut views = 0;
    for i in 0..6 {
        let (scene, cams) = p.generate_views(i).unwrap();
        for v in &cams {
            let got: BTreeSet<_> = compute_relations(&scene, &v.camera, v.id, &v.check.visible, &params)
                .into_iter()
                .map(|t| (t.subject, t.relation, t.refs))
                .collect();
            let want = common::oracle_relations(&scene, &v.camera, &v.check.visible, &params);
            assert_eq!(got, want, "scene {i} camera {}", v.id);
            views += 1;
        }
    }
    assert!(views > 0);
}

#[test]
fn turning_the_camera_around_swaps_left_and_right() {
    let a = cube(1, [-0.3, 0.0, 0.05], [0.05; 3], 0.0);
    let b = cube(2, [0.3, 0.0, 0.05], [0.05; 3], 0.3);
    let p = RelationParams::default();
    let front = cam_at([0.2, -2.0, 1.0], [0.0, 0.0, 0.05]);
    // rotate the eye by 180 degrees about the vertical through the midpoint
    let back = cam_at([-0.2, 2.0, 1.0], [0.0, 0.0, 0.05]);
    assert!(relations::left(&a, &b, &front, &p));
    assert!(relations::right(&a, &b, &back, &p));
    assert!(!relations::left(&a, &b, &back, &p));
}

fn arb_box(id: u32) -> impl Strategy<Value = ObjectInstance> {
    (
        prop::array::uniform3(-1.0..1.0f64),
        prop::array::uniform3(0.02..0.3f64),
        0.0..std::f64::consts::TAU,
    )
        .prop_map(move |(c, h, yaw)| cube(id, [c[0], c[1], c[2] + 0.5], h, yaw))
}

fn arb_cam() -> impl Strategy<Value = Camera> {
    (0.0..std::f64::consts::TAU, 0.2..1.3f64, 2.5..5.0f64).prop_map(|(az, el, d)| {
        cam_at(
            [d * el.cos() * az.cos(), d * el.cos() * az.sin(), 0.5 + d * el.sin()],
            [0.0, 0.0, 0.5],
        )
    })
}

proptest! {
    #[test]
    fn antisymmetric_pairs(a in arb_box(1), b in arb_box(2), cam in arb_cam()) {
        let p = RelationParams::default();
        prop_assert_eq!(relations::left(&a, &b, &cam, &p), relations::right(&b, &a, &cam, &p));
        prop_assert_eq!(relations::in_front(&a, &b, &cam, &p), relations::behind(&b, &a, &cam, &p));
        if relations::above(&a, &b) {
            prop_assert!(!relations::below(&a, &b));
        }
    }

    #[test]
    fn gravity_relations_ignore_the_camera(a in arb_box(1), b in arb_box(2), c1 in arb_cam(), c2 in arb_cam()) {
        let p = RelationParams::default();
        let vis: BTreeSet<u32> = [1, 2].into_iter().collect();
        let scene = {
            let mut s = pointgen_core::scene::Scene::new(0);
            s.objects = vec![a, b];
            s
        };
        let gravity = |cam: &Camera| -> Vec<_> {
            compute_relations(&scene, cam, 0, &vis, &p)
                .into_iter()
                .filter(|t| matches!(t.relation, RelationType::Above | RelationType::Below))
                .map(|t| (t.subject, t.relation, t.refs))
                .collect()
        };
        prop_assert_eq!(gravity(&c1), gravity(&c2));
    }

    #[test]
    fn between_ignores_reference_order(s in arb_box(3), a in arb_box(1), b in arb_box(2), cam in arb_cam()) {
        let p = RelationParams::default();
        prop_assert_eq!(relations::between(&s, &a, &b, &cam, &p), relations::between(&s, &b, &a, &cam, &p));
    }
}
