#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rsnet/mat.hpp"
#include "rsnet/skeleton.hpp"

namespace rsnet {

// One supervised lifting example: a normalized 2D pose (image units in
// [-1, 1]) and its root-relative 3D pose in millimeters.
struct PoseSample {
    std::string id;
    Mat pose2d; // N x 2
    Mat pose3d; // N x 3
};

// Shape and finiteness checks; throws ValidationError.
void validate_sample(const PoseSample& s, std::size_t num_joints);

// Maps a raw sample (2D in pixels, 3D in camera-space millimeters) to the
// stored convention: 2D centered on the image and divided by half the
// larger image dimension (aspect ratio preserved), 3D translated so the
// root joint sits at the origin.
PoseSample normalize(const PoseSample& raw, std::size_t image_w, std::size_t image_h,
                     std::size_t root);

// Horizontal mirror: negate x in both poses and swap each left/right pair.
// Applying it twice returns the original sample.
PoseSample flip_pose(const PoseSample& s, const std::vector<std::pair<int, int>>& flip_pairs);

// JSON Lines dataset: {"id": ..., "pose2d": [[x,y]...], "pose3d": [[x,y,z]...]}
// per line. Writing then reading reproduces every value bit-exactly.
std::vector<PoseSample> read_dataset(const std::string& path);
void write_dataset(const std::string& path, const std::vector<PoseSample>& samples);

// Pinhole camera with millimeter world units.
struct CameraModel {
    double focal = 1150.0;       // pixels
    double cx = 500.0, cy = 500.0; // principal point, pixels
    Mat rotation;                // 3x3, world -> camera, orthonormal, det +1
    std::array<double, 3> translation{0.0, 0.0, 0.0}; // camera-frame offset, mm

    void validate() const; // throws ValidationError unless R is a proper rotation

    // World point (mm) to camera frame.
    std::array<double, 3> to_camera(const std::array<double, 3>& world) const;
    // Camera-frame point to pixels; the caller checks z > 0 first.
    std::array<double, 2> project(const std::array<double, 3>& camera_mm) const;
};

// A camera placed at `position` (mm) looking at `target` with +y up.
CameraModel look_at_camera(const std::array<double, 3>& position,
                           const std::array<double, 3>& target, double focal, double cx,
                           double cy);

// Four cameras on a ring around the origin, the stand-in capture rig.
std::vector<CameraModel> default_camera_rig();

// Fixed bone lengths plus a rest direction and an articulation range per
// bone; the rows must be ordered parents-first so a single pass builds the
// pose.
struct Bone {
    int child = 0;
    int parent = 0;
    double length_mm = 0.0;
    std::array<double, 3> rest_dir{0.0, 0.0, 0.0}; // normalized on load
};

struct BoneTable {
    std::vector<Bone> bones;
    std::vector<std::array<double, 2>> angle_ranges; // radians, per bone

    // Throws ValidationError unless the bones form a parents-first spanning
    // tree of the skeleton whose (child, parent) links are skeleton edges.
    void validate(const SkeletonTopology& topo) const;

    static BoneTable from_json(const nlohmann::json& j);
    static BoneTable load(const std::string& path);
    nlohmann::json to_json() const;
};

// Per-sample generation metadata needed to reproject the stored pose.
struct SynthMeta {
    std::array<double, 3> root_camera_mm{0.0, 0.0, 0.0};
    std::size_t camera_index = 0;
};

// Random articulations of the bone table's kinematic tree, projected by the
// rig into exact 2D/3D pairs. Bone lengths and reprojection consistency
// hold to construction accuracy; the same seed yields identical samples.
// Joints that land behind a camera cause a bounded resample, then an error.
std::vector<PoseSample> synth_generate(const SkeletonTopology& topo, const BoneTable& table,
                                       std::size_t count, std::uint64_t seed,
                                       const std::vector<CameraModel>& cameras,
                                       std::size_t image_w = 1000, std::size_t image_h = 1000,
                                       std::vector<SynthMeta>* meta = nullptr);

} // namespace rsnet
