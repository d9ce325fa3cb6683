#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rsnet/mat.hpp"
#include "rsnet/rng.hpp"
#include "rsnet/skeleton.hpp"

namespace rsnet::testing {

inline std::string fixture(const std::string& name) {
    return std::string(RSNET_DATA_DIR) + "/" + name;
}

inline Mat random_mat(Rng& rng, std::size_t rows, std::size_t cols) {
    Mat m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

// Random connected topology: a random attachment tree plus a few extra
// edges. Joint names are synthetic; no flip pairs.
inline SkeletonTopology random_connected_topology(Rng& rng, int n, int extra_edges = 0) {
    SkeletonTopology t;
    for (int i = 0; i < n; ++i) t.joint_names.push_back("j" + std::to_string(i));
    t.root = 0;
    for (int i = 1; i < n; ++i)
        t.edges.emplace_back(static_cast<int>(rng.index(static_cast<std::size_t>(i))), i);
    int added = 0, guard = 0;
    while (added < extra_edges && ++guard < 200) {
        int a = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
        int b = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
        if (a == b) continue;
        bool dup = false;
        for (auto& [x, y] : t.edges)
            if ((x == a && y == b) || (x == b && y == a)) { dup = true; break; }
        if (dup) continue;
        t.edges.emplace_back(a, b);
        ++added;
    }
    return t;
}

inline std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    shuffle(p, rng);
    return p;
}

} // namespace rsnet::testing
