#include "logicere/lcg.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace logicere {

namespace {
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void connect(std::vector<std::vector<Neighbor>>& adj, std::size_t a, std::size_t b, EdgeType t) {
    adj[a].push_back({b, t});
    adj[b].push_back({a, t});
}
}  // namespace

std::string_view edge_type_name(EdgeType t) {
    switch (t) {
        case EdgeType::EE: return "EE";
        case EdgeType::PP: return "PP";
        case EdgeType::EP: return "EP";
    }
    return "?";
}

std::optional<std::size_t> Lcg::pair_node(std::size_t i, std::size_t j) const {
    const std::size_t k = num_events();
    if (i >= k || j >= k || i == j) return std::nullopt;
    const auto n = pair_index_[i * k + j];
    if (n == kNone) return std::nullopt;
    return n;
}

std::optional<std::size_t> Lcg::event_position(const std::string& id) const {
    auto it = std::lower_bound(event_ids.begin(), event_ids.end(), id);
    if (it == event_ids.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - event_ids.begin());
}

std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> Lcg::candidate_pairs()
    const {
    std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> out;
    for (std::size_t n = num_events(); n < nodes.size(); ++n) {
        out.push_back({n, {nodes[n].first, nodes[n].second}});
    }
    return out;
}

std::vector<std::int8_t> Lcg::edge_type_matrix() const {
    const std::size_t n = nodes.size();
    std::vector<std::int8_t> m(n * n, -1);
    for (std::size_t a = 0; a < n; ++a) {
        for (const auto& nb : adjacency[a]) m[a * n + nb.node] = static_cast<std::int8_t>(nb.type);
    }
    return m;
}

Lcg build_lcg(const Document& doc, const LcgOptions& opts) {
    Lcg g;
    std::vector<const Event*> events;
    for (const auto& e : doc.events) events.push_back(&e);
    std::sort(events.begin(), events.end(), [](const Event* a, const Event* b) { return a->id < b->id; });
    const std::size_t k = events.size();
    for (const auto* e : events) {
        g.event_ids.push_back(e->id);
        g.nodes.push_back({NodeKind::Event, g.event_ids.size() - 1, 0});
    }
    if (k < 2) {
        g.warning = "document '" + doc.doc_id + "' has fewer than two events; no pair nodes";
    }

    g.pair_index_.assign(k * k, kNone);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            if (opts.max_pair_distance) {
                const auto si = events[i]->start, sj = events[j]->start;
                if ((si > sj ? si - sj : sj - si) > *opts.max_pair_distance) continue;
            }
            g.pair_index_[i * k + j] = g.nodes.size();
            g.nodes.push_back({NodeKind::Pair, i, j});
        }
    }

    g.adjacency.assign(g.nodes.size(), {});
    if (opts.use_coref) {
        for (const auto& cluster : doc.coref_clusters) {
            std::vector<std::size_t> pos;
            for (const auto& id : cluster) {
                if (auto p = g.event_position(id)) pos.push_back(*p);
            }
            std::sort(pos.begin(), pos.end());
            for (std::size_t a = 0; a < pos.size(); ++a)
                for (std::size_t b = a + 1; b < pos.size(); ++b) connect(g.adjacency, pos[a], pos[b], EdgeType::EE);
        }
    }
    for (std::size_t a = k; a < g.nodes.size(); ++a) {
        const auto& pa = g.nodes[a];
        if (opts.use_ep_edges) {
            connect(g.adjacency, a, pa.first, EdgeType::EP);
            connect(g.adjacency, a, pa.second, EdgeType::EP);
        }
        for (std::size_t b = a + 1; b < g.nodes.size(); ++b) {
            const auto& pb = g.nodes[b];
            const bool share = pa.first == pb.first || pa.first == pb.second ||
                               pa.second == pb.first || pa.second == pb.second;
            if (share) connect(g.adjacency, a, b, EdgeType::PP);
        }
    }
    for (auto& list : g.adjacency) {
        std::sort(list.begin(), list.end(),
                  [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
    }
    return g;
}

const std::vector<Neighbor>& neighbors(const Lcg& g, std::size_t node) {
    if (node >= g.adjacency.size()) {
        throw std::out_of_range("neighbors: unknown node " + std::to_string(node));
    }
    return g.adjacency[node];
}

LcgStats lcg_stats(const Lcg& g) {
    LcgStats s;
    for (const auto& n : g.nodes) (n.kind == NodeKind::Event ? s.event_nodes : s.pair_nodes)++;
    for (std::size_t a = 0; a < g.adjacency.size(); ++a) {
        for (const auto& nb : g.adjacency[a]) {
            if (nb.node < a) continue;
            switch (nb.type) {
                case EdgeType::EE: ++s.ee_edges; break;
                case EdgeType::PP: ++s.pp_edges; break;
                case EdgeType::EP: ++s.ep_edges; break;
            }
        }
    }
    return s;
}

std::string lcg_to_json(const Lcg& g) {
    nlohmann::ordered_json j;
    j["event_ids"] = g.event_ids;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : g.nodes) {
        if (n.kind == NodeKind::Event) {
            nodes.push_back({{"kind", "EVENT"}, {"event", g.event_ids[n.first]}});
        } else {
            nodes.push_back({{"kind", "PAIR"}, {"e1", g.event_ids[n.first]}, {"e2", g.event_ids[n.second]}});
        }
    }
    j["nodes"] = nodes;
    std::map<std::string, nlohmann::ordered_json> edges{
        {"EE", nlohmann::ordered_json::array()},
        {"PP", nlohmann::ordered_json::array()},
        {"EP", nlohmann::ordered_json::array()}};
    for (std::size_t a = 0; a < g.adjacency.size(); ++a) {
        for (const auto& nb : g.adjacency[a]) {
            if (nb.node > a) edges[std::string(edge_type_name(nb.type))].push_back({a, nb.node});
        }
    }
    j["edges"] = {{"EE", edges["EE"]}, {"PP", edges["PP"]}, {"EP", edges["EP"]}};
    if (g.warning) j["warning"] = *g.warning;
    return j.dump();
}

}  // namespace logicere
