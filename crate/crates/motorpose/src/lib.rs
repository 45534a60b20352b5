//! Camera poses as motors of the even subalgebra of G(4,0).
//!
//! A rigid camera pose (translation plus rotation) is represented by a
//! single 8-coefficient *motor* acting on a spherical model of Euclidean
//! space one dimension up, where translations are rotors just like
//! rotations. The crate provides:
//!
//! - [`ga`]: dense 16-coefficient multivector arithmetic over `e1..e4`,
//!   all basis vectors squaring to +1;
//! - [`embed`]: the unit-sphere embedding of 3D points, translation
//!   rotors, motor sandwiches, and curvature diagnostics;
//! - [`codec`]: pose label <-> motor conversion, including quaternion and
//!   rotation-matrix ingestion and the motor decoder;
//! - [`metrics`]: positional/rotational error metrics, the motor MSE, run
//!   evaluation reports, and the point-cloud cross-check;
//! - [`io`]: dataset parsing (row-based pose files and per-frame 4x4
//!   matrices), motor/prediction CSV interchange, curvature selection by
//!   scene extent, and point-cloud readers.
//!
//! Everything is a pure function over immutable values; the crate has no
//! shared mutable state and can be used concurrently without restriction.

pub mod codec;
pub mod embed;
pub mod ga;
pub mod io;
pub mod metrics;

pub use codec::{
    canonicalize_motor, decode_motor, encode_pose, quat_to_rotor, rotmat_to_quat, rotor_to_quat,
    CodecError, DecodedPose, Motor, Pose, Quaternion, RotMatrix3, Rotor3,
};
pub use embed::{
    apply_motor, down_project, trace_deviation, translation_rotor, up_project, Curvature,
    EmbedError, EuclidPoint3, SpherePoint4, TranslationRotor,
};
pub use ga::Multivector16;
pub use io::{
    lambda_for_area, parse_cambridge, parse_sevenscenes, read_motor_file, read_prediction_file,
    write_motor_file, write_prediction_file, DatasetArea, DatasetError, MotorRecord, PoseRecord,
    QuatOrder, SceneKind,
};
pub use metrics::{
    evaluate_run, motor_mse, pointcloud_mse, positional_error, rotational_error, EvalReport,
    FrameErrors, MetricsError, Thresholds,
};
