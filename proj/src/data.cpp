#include "rsnet/data.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "rsnet/common.hpp"
#include "rsnet/rng.hpp"

namespace rsnet {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 sub3(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 add3(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 scale3(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }
Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 normalize3(const Vec3& a, const char* what) {
    const double n = norm3(a);
    if (n < 1e-12) throw ValidationError(std::string(what) + ": zero-length vector");
    return scale3(a, 1.0 / n);
}

// Rotation of v around unit axis k by angle (Rodrigues' formula).
Vec3 rotate_axis_angle(const Vec3& v, const Vec3& k, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const Vec3 kxv = cross3(k, v);
    const double kv = dot3(k, v);
    return add3(add3(scale3(v, c), scale3(kxv, s)), scale3(k, kv * (1.0 - c)));
}

nlohmann::ordered_json mat_to_json(const Mat& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const nlohmann::json& j, std::size_t cols, const std::string& what) {
    if (!j.is_array() || j.empty())
        throw ValidationError(what + " must be a non-empty array of rows");
    Mat m(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& row = j[i];
        if (!row.is_array() || row.size() != cols)
            throw ValidationError(what + ": row " + std::to_string(i) + " must have " +
                                  std::to_string(cols) + " numbers");
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = row[c].get<double>();
    }
    return m;
}

} // namespace

void validate_sample(const PoseSample& s, std::size_t num_joints) {
    if (s.pose2d.rows() != num_joints || s.pose2d.cols() != 2)
        throw ValidationError("sample '" + s.id + "': pose2d must be " +
                              std::to_string(num_joints) + "x2");
    if (s.pose3d.rows() != num_joints || s.pose3d.cols() != 3)
        throw ValidationError("sample '" + s.id + "': pose3d must be " +
                              std::to_string(num_joints) + "x3");
    if (!all_finite(s.pose2d) || !all_finite(s.pose3d))
        throw ValidationError("sample '" + s.id + "': non-finite coordinate");
}

PoseSample normalize(const PoseSample& raw, std::size_t image_w, std::size_t image_h,
                     std::size_t root) {
    if (image_w == 0 || image_h == 0)
        throw ValidationError("normalize: image dimensions must be positive");
    if (root >= raw.pose3d.rows())
        throw ValidationError("normalize: root index out of range");
    if (raw.pose2d.rows() != raw.pose3d.rows())
        throw ValidationError("normalize: 2D and 3D joint counts differ");

    PoseSample out;
    out.id = raw.id;
    const double half = static_cast<double>(std::max(image_w, image_h)) / 2.0;
    out.pose2d = Mat(raw.pose2d.rows(), 2);
    for (std::size_t i = 0; i < raw.pose2d.rows(); ++i) {
        out.pose2d(i, 0) = (raw.pose2d(i, 0) - static_cast<double>(image_w) / 2.0) / half;
        out.pose2d(i, 1) = (raw.pose2d(i, 1) - static_cast<double>(image_h) / 2.0) / half;
    }
    out.pose3d = Mat(raw.pose3d.rows(), 3);
    for (std::size_t i = 0; i < raw.pose3d.rows(); ++i)
        for (std::size_t c = 0; c < 3; ++c)
            out.pose3d(i, c) = raw.pose3d(i, c) - raw.pose3d(root, c);
    return out;
}

PoseSample flip_pose(const PoseSample& s, const std::vector<std::pair<int, int>>& flip_pairs) {
    PoseSample out = s;
    for (std::size_t i = 0; i < out.pose2d.rows(); ++i) out.pose2d(i, 0) = -out.pose2d(i, 0);
    for (std::size_t i = 0; i < out.pose3d.rows(); ++i) out.pose3d(i, 0) = -out.pose3d(i, 0);
    auto swap_rows = [](Mat& m, int a, int b) {
        for (std::size_t c = 0; c < m.cols(); ++c)
            std::swap(m(static_cast<std::size_t>(a), c), m(static_cast<std::size_t>(b), c));
    };
    for (const auto& [left, right] : flip_pairs) {
        swap_rows(out.pose2d, left, right);
        swap_rows(out.pose3d, left, right);
    }
    return out;
}

std::vector<PoseSample> read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read dataset '" + path + "'");
    std::vector<PoseSample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            PoseSample s;
            s.id = j.at("id").get<std::string>();
            s.pose2d = mat_from_json(j.at("pose2d"), 2, "pose2d");
            s.pose3d = mat_from_json(j.at("pose3d"), 3, "pose3d");
            out.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("dataset '" + path + "' line " + std::to_string(lineno) +
                                  ": " + e.what());
        }
    }
    if (out.empty()) throw ValidationError("dataset '" + path + "' holds no samples");
    const std::size_t n = out.front().pose3d.rows();
    for (const auto& s : out) validate_sample(s, n);
    return out;
}

void write_dataset(const std::string& path, const std::vector<PoseSample>& samples) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write dataset '" + path + "'");
    for (const auto& s : samples) {
        nlohmann::ordered_json j;
        j["id"] = s.id;
        j["pose2d"] = mat_to_json(s.pose2d);
        j["pose3d"] = mat_to_json(s.pose3d);
        out << j.dump() << "\n";
    }
    if (!out) throw ValidationError("failed writing dataset '" + path + "'");
}

void CameraModel::validate() const {
    if (rotation.rows() != 3 || rotation.cols() != 3)
        throw ValidationError("camera rotation must be 3x3");
    if (focal <= 0.0) throw ValidationError("camera focal length must be positive");
    Mat should_be_i = matmul(rotation, transpose(rotation));
    if (max_abs_diff(should_be_i, Mat::identity(3)) > 1e-9)
        throw ValidationError("camera rotation is not orthonormal");
    // Determinant via the scalar triple product of the rows.
    const Vec3 r0{rotation(0, 0), rotation(0, 1), rotation(0, 2)};
    const Vec3 r1{rotation(1, 0), rotation(1, 1), rotation(1, 2)};
    const Vec3 r2{rotation(2, 0), rotation(2, 1), rotation(2, 2)};
    if (std::abs(dot3(r0, cross3(r1, r2)) - 1.0) > 1e-9)
        throw ValidationError("camera rotation must have determinant +1");
}

Vec3 CameraModel::to_camera(const Vec3& world) const {
    Vec3 out;
    for (std::size_t r = 0; r < 3; ++r)
        out[r] = rotation(r, 0) * world[0] + rotation(r, 1) * world[1] +
                 rotation(r, 2) * world[2] + translation[r];
    return out;
}

std::array<double, 2> CameraModel::project(const Vec3& camera_mm) const {
    return {focal * camera_mm[0] / camera_mm[2] + cx,
            focal * camera_mm[1] / camera_mm[2] + cy};
}

CameraModel look_at_camera(const Vec3& position, const Vec3& target, double focal,
                           double cx, double cy) {
    const Vec3 forward = normalize3(sub3(target, position), "camera forward");
    const Vec3 up{0.0, 1.0, 0.0};
    const Vec3 right = normalize3(cross3(up, forward), "camera right");
    const Vec3 true_up = cross3(forward, right);

    CameraModel cam;
    cam.focal = focal;
    cam.cx = cx;
    cam.cy = cy;
    cam.rotation = Mat(3, 3);
    for (std::size_t c = 0; c < 3; ++c) {
        cam.rotation(0, c) = right[c];
        cam.rotation(1, c) = true_up[c];
        cam.rotation(2, c) = forward[c];
    }
    for (std::size_t r = 0; r < 3; ++r)
        cam.translation[r] = -(cam.rotation(r, 0) * position[0] +
                               cam.rotation(r, 1) * position[1] +
                               cam.rotation(r, 2) * position[2]);
    cam.validate();
    return cam;
}

std::vector<CameraModel> default_camera_rig() {
    std::vector<CameraModel> rig;
    const double radius = 4500.0, height = 400.0;
    for (int k = 0; k < 4; ++k) {
        const double angle = M_PI / 4.0 + k * M_PI / 2.0;
        rig.push_back(look_at_camera({radius * std::sin(angle), height,
                                      radius * std::cos(angle)},
                                     {0.0, 0.0, 0.0}, 1150.0, 500.0, 500.0));
    }
    return rig;
}

void BoneTable::validate(const SkeletonTopology& topo) const {
    const int n = topo.joint_count();
    if (bones.size() != static_cast<std::size_t>(n - 1))
        throw ValidationError("bone table must cover every non-root joint once");
    if (angle_ranges.size() != bones.size())
        throw ValidationError("bone table needs one angle range per bone");

    std::set<std::pair<int, int>> edges;
    for (const auto& [a, b] : topo.edges) edges.insert({std::min(a, b), std::max(a, b)});

    std::set<int> placed{topo.root};
    for (std::size_t b = 0; b < bones.size(); ++b) {
        const Bone& bone = bones[b];
        if (bone.child < 0 || bone.child >= n || bone.parent < 0 || bone.parent >= n)
            throw ValidationError("bone " + std::to_string(b) + ": joint index out of range");
        if (bone.child == topo.root)
            throw ValidationError("bone " + std::to_string(b) + ": the root has no parent");
        if (placed.count(bone.child))
            throw ValidationError("bone " + std::to_string(b) + ": joint " +
                                  std::to_string(bone.child) + " placed twice");
        if (!placed.count(bone.parent))
            throw ValidationError("bone " + std::to_string(b) +
                                  ": parent must appear before its children");
        if (!edges.count({std::min(bone.child, bone.parent),
                          std::max(bone.child, bone.parent)}))
            throw ValidationError("bone " + std::to_string(b) +
                                  ": link is not a skeleton edge");
        if (bone.length_mm <= 0.0)
            throw ValidationError("bone " + std::to_string(b) + ": length must be positive");
        if (norm3(bone.rest_dir) < 1e-12)
            throw ValidationError("bone " + std::to_string(b) + ": rest direction is zero");
        const auto& [lo, hi] = angle_ranges[b];
        if (lo < 0.0 || hi < lo || hi > M_PI)
            throw ValidationError("bone " + std::to_string(b) +
                                  ": angle range must satisfy 0 <= lo <= hi <= pi");
        placed.insert(bone.child);
    }
}

BoneTable BoneTable::from_json(const nlohmann::json& j) {
    BoneTable t;
    try {
        for (const auto& jb : j.at("bones")) {
            Bone b;
            b.child = jb.at("child").get<int>();
            b.parent = jb.at("parent").get<int>();
            b.length_mm = jb.at("length_mm").get<double>();
            const auto dir = jb.at("rest_dir").get<std::vector<double>>();
            if (dir.size() != 3)
                throw ValidationError("bone rest_dir must have three components");
            b.rest_dir = normalize3({dir[0], dir[1], dir[2]}, "bone rest_dir");
            t.bones.push_back(b);
        }
        for (const auto& jr : j.at("angle_ranges")) {
            const auto r = jr.get<std::vector<double>>();
            if (r.size() != 2) throw ValidationError("angle range must be [lo, hi]");
            t.angle_ranges.push_back({r[0], r[1]});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bone table: ") + e.what());
    }
    return t;
}

BoneTable BoneTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read bone table '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("bone table '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

nlohmann::json BoneTable::to_json() const {
    nlohmann::ordered_json j;
    j["bones"] = nlohmann::ordered_json::array();
    for (const auto& b : bones) {
        nlohmann::ordered_json jb;
        jb["child"] = b.child;
        jb["parent"] = b.parent;
        jb["length_mm"] = b.length_mm;
        jb["rest_dir"] = {b.rest_dir[0], b.rest_dir[1], b.rest_dir[2]};
        j["bones"].push_back(std::move(jb));
    }
    j["angle_ranges"] = nlohmann::ordered_json::array();
    for (const auto& r : angle_ranges) j["angle_ranges"].push_back({r[0], r[1]});
    return j;
}

std::vector<PoseSample> synth_generate(const SkeletonTopology& topo, const BoneTable& table,
                                       std::size_t count, std::uint64_t seed,
                                       const std::vector<CameraModel>& cameras,
                                       std::size_t image_w, std::size_t image_h,
                                       std::vector<SynthMeta>* meta) {
    topo.validate();
    table.validate(topo);
    if (cameras.empty()) throw ValidationError("synth_generate: need at least one camera");
    for (const auto& c : cameras) c.validate();

    const std::size_t n = static_cast<std::size_t>(topo.joint_count());
    const std::size_t root = static_cast<std::size_t>(topo.root);
    const double min_depth_mm = 100.0;

    Rng rng(seed);
    std::vector<PoseSample> out;
    if (meta) meta->clear();

    for (std::size_t s = 0; s < count; ++s) {
        const CameraModel& cam = cameras[s % cameras.size()];
        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            // Articulate the tree in world space.
            std::vector<Vec3> world(n);
            world[root] = {rng.uniform(-300.0, 300.0), rng.uniform(-300.0, 300.0),
                           rng.uniform(-300.0, 300.0)};
            for (std::size_t b = 0; b < table.bones.size(); ++b) {
                const Bone& bone = table.bones[b];
                Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
                const double axis_norm = norm3(axis);
                axis = axis_norm < 1e-9 ? Vec3{0.0, 0.0, 1.0} : scale3(axis, 1.0 / axis_norm);
                const double angle =
                    rng.uniform(table.angle_ranges[b][0], table.angle_ranges[b][1]);
                const Vec3 dir = rotate_axis_angle(bone.rest_dir, axis, angle);
                world[static_cast<std::size_t>(bone.child)] =
                    add3(world[static_cast<std::size_t>(bone.parent)],
                         scale3(dir, bone.length_mm));
            }

            // Into the camera frame; every joint must sit in front of the lens.
            std::vector<Vec3> camera_mm(n);
            bool visible = true;
            for (std::size_t i = 0; i < n; ++i) {
                camera_mm[i] = cam.to_camera(world[i]);
                if (camera_mm[i][2] < min_depth_mm) visible = false;
            }
            if (!visible) continue;

            PoseSample raw;
            raw.id = "synth-" + std::to_string(s);
            raw.pose2d = Mat(n, 2);
            raw.pose3d = Mat(n, 3);
            for (std::size_t i = 0; i < n; ++i) {
                const auto uv = cam.project(camera_mm[i]);
                raw.pose2d(i, 0) = uv[0];
                raw.pose2d(i, 1) = uv[1];
                for (std::size_t c = 0; c < 3; ++c) raw.pose3d(i, c) = camera_mm[i][c];
            }
            PoseSample sample = normalize(raw, image_w, image_h, root);
            validate_sample(sample, n);
            out.push_back(std::move(sample));
            if (meta) meta->push_back({camera_mm[root], s % cameras.size()});
            placed = true;
        }
        if (!placed)
            throw ValidationError("synth_generate: sample " + std::to_string(s) +
                                  " kept landing behind the camera; check the rig");
    }
    return out;
}

} // namespace rsnet
