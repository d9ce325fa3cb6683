#include "rsnet/skeleton.hpp"

#include <fstream>
#include <set>

#include "rsnet/common.hpp"

namespace rsnet {

void SkeletonTopology::validate() const {
    const int n = joint_count();
    if (n < 2) throw ValidationError("skeleton: at least two joints required");
    if (root < 0 || root >= n)
        throw ValidationError("skeleton: root index " + std::to_string(root) + " out of range");

    std::set<std::pair<int, int>> seen;
    for (const auto& [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw ValidationError("skeleton: edge (" + std::to_string(a) + ", " +
                                  std::to_string(b) + ") out of range");
        if (a == b)
            throw ValidationError("skeleton: self-loop at joint " + std::to_string(a));
        auto key = std::minmax(a, b);
        if (!seen.insert(key).second)
            throw ValidationError("skeleton: duplicate edge (" + std::to_string(key.first) +
                                  ", " + std::to_string(key.second) + ")");
    }

    for (const auto& [l, r] : flip_pairs) {
        if (l < 0 || l >= n || r < 0 || r >= n || l == r)
            throw ValidationError("skeleton: bad flip pair (" + std::to_string(l) + ", " +
                                  std::to_string(r) + ")");
    }

    // Connectivity sweep from the root; report one stranded component.
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<bool> reached(n, false);
    std::vector<int> stack = {root};
    reached[root] = true;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[v])
            if (!reached[w]) {
                reached[w] = true;
                stack.push_back(w);
            }
    }
    for (int v = 0; v < n; ++v) {
        if (reached[v]) continue;
        // Collect v's whole component for the diagnostic.
        std::vector<int> comp = {v};
        std::vector<bool> in_comp(n, false);
        in_comp[v] = true;
        for (std::size_t i = 0; i < comp.size(); ++i)
            for (int w : adj[comp[i]])
                if (!in_comp[w]) {
                    in_comp[w] = true;
                    comp.push_back(w);
                }
        std::string names;
        for (int c : comp) {
            if (!names.empty()) names += ", ";
            names += joint_names[c];
        }
        throw ValidationError("skeleton: graph is disconnected; component {" + names +
                              "} is unreachable from the root");
    }
}

SkeletonTopology SkeletonTopology::from_json(const nlohmann::json& j) {
    SkeletonTopology t;
    try {
        t.joint_names = j.at("joints").get<std::vector<std::string>>();
        for (const auto& e : j.at("edges"))
            t.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        t.root = j.at("root").get<int>();
        if (j.contains("flip_pairs"))
            for (const auto& p : j.at("flip_pairs"))
                t.flip_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("skeleton: malformed JSON: ") + e.what());
    }
    t.validate();
    return t;
}

SkeletonTopology SkeletonTopology::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("skeleton: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("skeleton: " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

nlohmann::json SkeletonTopology::to_json() const {
    nlohmann::json j;
    j["joints"] = joint_names;
    j["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : edges) j["edges"].push_back({a, b});
    j["root"] = root;
    j["flip_pairs"] = nlohmann::json::array();
    for (const auto& [l, r] : flip_pairs) j["flip_pairs"].push_back({l, r});
    return j;
}

} // namespace rsnet
