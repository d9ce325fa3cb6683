#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace rsnet {

// A skeleton is an undirected tree (or general connected graph) over named
// joints. flip_pairs lists (left, right) joint indices swapped by a
// horizontal mirror.
struct SkeletonTopology {
    std::vector<std::string> joint_names;
    std::vector<std::pair<int, int>> edges;
    int root = 0;
    std::vector<std::pair<int, int>> flip_pairs;

    int joint_count() const { return static_cast<int>(joint_names.size()); }

    // Throws ValidationError on out-of-range indices, self-loops, duplicate
    // edges, a bad root, inconsistent flip pairs, or a disconnected graph
    // (the message names one stranded component).
    void validate() const;

    static SkeletonTopology from_json(const nlohmann::json& j);
    static SkeletonTopology load(const std::string& path);
    nlohmann::json to_json() const;
};

} // namespace rsnet
